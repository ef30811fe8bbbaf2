//! Dense-matrix assembly of operators over the truncated real Fourier
//! basis of covector tuples, and the numeric Dirac-reduction engine.
//!
//! Basis per component (orthonormal in L²): 1, √2·cos 2πkx, √2·sin 2πkx
//! for k = 1..kmax, so the L² pairing is the Euclidean dot product, formal
//! skew-adjointness becomes matrix skew-symmetry, and Casimir covectors
//! appear as kernel vectors.
//!
//! Dirac reduction forms the Schur complement B_kk − B_kc·pinv(B_cc)·B_ck
//! with an SVD pseudo-inverse restricted to the numerically determined
//! range of B_cc. The constraint block can be genuinely singular: its
//! kernel maps through B_kc to "gauge" directions along which the reduced
//! action is only defined up to the generalized-inverse convention (they
//! are Hamiltonian directions of residual first-class constraints). The
//! engine reports these directions so comparisons can quotient them out;
//! on the admissible covector sector the reduced bracket itself is
//! convention-free.

use crate::error::{Error, Result};
use crate::fourier::FourierField;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn basis_size(kmax: usize) -> usize {
    2 * kmax + 1
}

pub fn field_to_coords(f: &FourierField, kmax: usize) -> Vec<f64> {
    let mut v = vec![0.0; basis_size(kmax)];
    v[0] = f.amp(0).re;
    let s = std::f64::consts::SQRT_2;
    for k in 1..=kmax {
        let a = f.amp(k as i32);
        v[2 * k - 1] = s * a.re;
        v[2 * k] = -s * a.im;
    }
    v
}

pub fn coords_to_field(v: &[f64]) -> FourierField {
    let kmax = (v.len() - 1) / 2;
    let s = std::f64::consts::SQRT_2;
    let mut amps = vec![Complex64::ZERO; kmax + 1];
    amps[0] = Complex64::new(v[0], 0.0);
    for k in 1..=kmax {
        amps[k] = Complex64::new(v[2 * k - 1] / s, -v[2 * k] / s);
    }
    FourierField::from_modes(amps)
}

pub fn tuple_to_coords(fields: &[FourierField], kmax: usize) -> DVector<f64> {
    let b = basis_size(kmax);
    let mut v = DVector::zeros(fields.len() * b);
    for (c, f) in fields.iter().enumerate() {
        let fc = field_to_coords(f, kmax);
        for (i, x) in fc.into_iter().enumerate() {
            v[c * b + i] = x;
        }
    }
    v
}

pub fn coords_to_tuple(v: &DVector<f64>, ncomp: usize, kmax: usize) -> Vec<FourierField> {
    let b = basis_size(kmax);
    (0..ncomp)
        .map(|c| coords_to_field(&v.as_slice()[c * b..(c + 1) * b]))
        .collect()
}

/// A linear operator on covector tuples, compressed to modes ≤ kmax.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub mat: DMatrix<f64>,
    pub ncomp: usize,
    pub kmax: usize,
}

impl OperatorMatrix {
    /// Columns are the action on the real basis covectors.
    pub fn assemble(
        ncomp: usize,
        kmax: usize,
        mut action: impl FnMut(&[FourierField]) -> Result<Vec<FourierField>>,
    ) -> Result<OperatorMatrix> {
        let b = basis_size(kmax);
        let n = ncomp * b;
        let mut mat = DMatrix::zeros(n, n);
        for c in 0..ncomp {
            for i in 0..b {
                let mut basis = vec![FourierField::zero(); ncomp];
                let mut coords = vec![0.0; b];
                coords[i] = 1.0;
                basis[c] = coords_to_field(&coords);
                let out = action(&basis)?;
                if out.len() != ncomp {
                    return Err(Error::Config(format!(
                        "action returned {} components, expected {ncomp}",
                        out.len()
                    )));
                }
                let col = tuple_to_coords(&out, kmax);
                mat.set_column(c * b + i, &col);
            }
        }
        Ok(OperatorMatrix { mat, ncomp, kmax })
    }

    pub fn apply(&self, fields: &[FourierField]) -> Vec<FourierField> {
        let v = tuple_to_coords(fields, self.kmax);
        let out = &self.mat * v;
        coords_to_tuple(&out, self.ncomp, self.kmax)
    }

    /// ‖M + Mᵀ‖_F / max(1, ‖M‖_F): zero for a formally skew-adjoint
    /// operator compressed to any symmetric window.
    pub fn skew_defect(&self) -> f64 {
        let sym = &self.mat + self.mat.transpose();
        sym.norm() / self.mat.norm().max(1.0)
    }

    /// Orthonormal kernel basis at the given relative singular-value cut.
    pub fn kernel(&self, rel_tol: f64) -> Vec<DVector<f64>> {
        let svd = self.mat.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let vt = svd.v_t.as_ref().expect("svd with v_t");
        let mut out = vec![];
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= rel_tol * smax {
                out.push(vt.row(i).transpose());
            }
        }
        out
    }
}

/// Result of a numeric Dirac reduction.
#[derive(Debug, Clone)]
pub struct DiracReduction {
    pub matrix: OperatorMatrix,
    /// Gauge directions B_kc·ker(B_cc) on the kept components (normalized;
    /// only those with non-negligible norm). The reduced action is defined
    /// modulo their span.
    pub gauge: Vec<DVector<f64>>,
    /// Orthonormal kernel of the constraint block.
    pub cc_kernel: Vec<DVector<f64>>,
    /// Orthonormal complement of range(B_cc) (for per-probe range tests).
    range_complement: Vec<DVector<f64>>,
    b_ck: DMatrix<f64>,
    b_kc: DMatrix<f64>,
    cc_pinv: DMatrix<f64>,
}

impl DiracReduction {
    /// ‖out-of-range component of B_ck·ξ‖ / ‖B_ck·ξ‖; the Schur solve is
    /// exact on probes where this vanishes.
    pub fn range_residual(&self, xi_kept: &DVector<f64>) -> f64 {
        let y = &self.b_ck * xi_kept;
        let n = y.norm();
        if n == 0.0 {
            return 0.0;
        }
        self.range_components(xi_kept).norm() / n
    }

    /// The linear out-of-range components U_nullᵀ·(B_ck·ξ); the admissible
    /// sector is their joint kernel.
    pub fn range_components(&self, xi_kept: &DVector<f64>) -> DVector<f64> {
        let y = &self.b_ck * xi_kept;
        let mut out = DVector::zeros(self.range_complement.len());
        for (i, u) in self.range_complement.iter().enumerate() {
            out[i] = u.dot(&y);
        }
        out
    }

    /// Change of the reduced action when the constrained solve is
    /// perturbed by a kernel vector: returns the largest norm of
    /// B_kc·κ over the kernel basis (the gauge magnitude itself) and,
    /// as the second component, its largest weak residual against a test
    /// covector ζ from the admissible sector (⟨ζ, gauge⟩, which vanishes:
    /// the reduced bracket is insensitive to the pseudo-inverse choice).
    pub fn kernel_sensitivity(&self, admissible: &[DVector<f64>]) -> (f64, f64) {
        let mut strong: f64 = 0.0;
        let mut weak: f64 = 0.0;
        for kappa in &self.cc_kernel {
            let dir = &self.b_kc * kappa;
            strong = strong.max(dir.norm());
            for z in admissible {
                weak = weak.max(z.dot(&dir).abs() / z.norm().max(1e-300));
            }
        }
        (strong, weak)
    }

    /// Projects a kept-space vector onto the orthogonal complement of the
    /// gauge span (the convention-independent part of the action).
    pub fn mod_gauge(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        if self.gauge.is_empty() {
            return out;
        }
        // Gram-Schmidt projection against the (small) gauge set.
        let mut basis: Vec<DVector<f64>> = vec![];
        for g in &self.gauge {
            let mut b = g.clone();
            for e in &basis {
                let c = e.dot(&b);
                b -= e * c;
            }
            if b.norm() > 1e-12 {
                let n = b.norm();
                basis.push(b / n);
            }
        }
        for e in &basis {
            let c = e.dot(&out);
            out -= e * c;
        }
        out
    }

    pub fn cc_pinv(&self) -> &DMatrix<f64> {
        &self.cc_pinv
    }
}

/// Schur-complement Dirac reduction of an assembled operator, keeping the
/// components in `keep` and constraining those in `constrain`.
pub fn dirac_reduce(
    ext: &OperatorMatrix,
    keep: &[usize],
    constrain: &[usize],
) -> Result<DiracReduction> {
    let b = basis_size(ext.kmax);
    let idx = |comps: &[usize]| -> Vec<usize> {
        comps
            .iter()
            .flat_map(|&c| (c * b..(c + 1) * b).collect::<Vec<_>>())
            .collect()
    };
    let (ik, ic) = (idx(keep), idx(constrain));
    if ic.is_empty() {
        return Ok(DiracReduction {
            matrix: OperatorMatrix {
                mat: ext.mat.select_rows(ik.iter()).select_columns(ik.iter()),
                ncomp: keep.len(),
                kmax: ext.kmax,
            },
            gauge: vec![],
            cc_kernel: vec![],
            range_complement: vec![],
            b_ck: DMatrix::zeros(0, ik.len()),
            b_kc: DMatrix::zeros(ik.len(), 0),
            cc_pinv: DMatrix::zeros(0, 0),
        });
    }
    let b_kk = ext.mat.select_rows(ik.iter()).select_columns(ik.iter());
    let b_kc = ext.mat.select_rows(ik.iter()).select_columns(ic.iter());
    let b_ck = ext.mat.select_rows(ic.iter()).select_columns(ik.iter());
    let b_cc = ext.mat.select_rows(ic.iter()).select_columns(ic.iter());

    let svd = b_cc.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Err(Error::IllPosedReduction(
            "constraint block vanishes identically".into(),
        ));
    }
    let rel = 1e-9;
    let cc_pinv = svd
        .clone()
        .pseudo_inverse(rel * smax)
        .map_err(|e| Error::IllPosedReduction(e.to_string()))?;
    let vt = svd.v_t.as_ref().expect("v_t");
    let u = svd.u.as_ref().expect("u");
    let mut cc_kernel = vec![];
    let mut range_complement = vec![];
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel * smax {
            cc_kernel.push(vt.row(i).transpose());
            range_complement.push(u.column(i).into_owned());
        }
    }
    let reduced = &b_kk - &b_kc * &cc_pinv * &b_ck;
    // Kernel directions that genuinely reach the kept components; tiny
    // images are compression artifacts of the truncated kernel vectors.
    let mut gauge = vec![];
    for kappa in &cc_kernel {
        let dir = &b_kc * kappa;
        if dir.norm() > 1e-7 * b_kc.norm().max(1.0) {
            let n = dir.norm();
            gauge.push(dir / n);
        }
    }
    Ok(DiracReduction {
        matrix: OperatorMatrix {
            mat: reduced,
            ncomp: keep.len(),
            kmax: ext.kmax,
        },
        gauge,
        cc_kernel,
        range_complement,
        b_ck,
        b_kc,
        cc_pinv,
    })
}

/// R = B₀·pinv(B₋₁) iterated k times onto B₀, with the kernel of B₋₁
/// (the Casimir covectors) propagated through the remaining pipeline as
/// gauge directions. Inputs outside the solvable sector are rejected.
pub struct RecursionChain {
    pub b0: OperatorMatrix,
    pub bm1: OperatorMatrix,
    bm1_pinv: DMatrix<f64>,
    /// Orthonormal kernel of B₋₁ (= complement of its range, by skewness).
    pub kernel: Vec<DVector<f64>>,
}

impl RecursionChain {
    pub fn new(b0: OperatorMatrix, bm1: OperatorMatrix) -> Result<RecursionChain> {
        let svd = bm1.mat.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rel = 1e-9;
        let bm1_pinv = svd
            .clone()
            .pseudo_inverse(rel * smax)
            .map_err(|e| Error::IllPosedReduction(e.to_string()))?;
        let vt = svd.v_t.as_ref().expect("v_t");
        let mut kernel = vec![];
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= rel * smax {
                kernel.push(vt.row(i).transpose());
            }
        }
        Ok(RecursionChain {
            b0,
            bm1,
            bm1_pinv,
            kernel,
        })
    }

    /// (Rᵏ B₀)ξ together with the gauge directions injected by each
    /// pseudo-inverse stage. `sector_tol` bounds the admissible
    /// out-of-range component at every solve.
    pub fn apply(
        &self,
        xi: &DVector<f64>,
        k: usize,
        sector_tol: f64,
    ) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        self.apply_inner(xi, k, Some(sector_tol))
    }

    /// Same pipeline with the sector checks disabled (used to set up the
    /// admissibility map itself, which needs the raw linear stages).
    pub fn apply_unchecked(
        &self,
        xi: &DVector<f64>,
        k: usize,
    ) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        self.apply_inner(xi, k, None)
    }

    fn apply_inner(
        &self,
        xi: &DVector<f64>,
        k: usize,
        sector_tol: Option<f64>,
    ) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        let mut v = &self.b0.mat * xi;
        let mut gauges: Vec<DVector<f64>> = vec![];
        for stage in 0..k {
            // Range check: B₋₁ is skew, so its range complement is its
            // kernel.
            if let Some(tol) = sector_tol {
                let vn = v.norm().max(1e-300);
                for kappa in &self.kernel {
                    let c = kappa.dot(&v).abs() / vn;
                    if c > tol {
                        return Err(Error::SectorViolation(format!(
                            "stage {stage}: component {c:.3e} outside range(B₋₁)"
                        )));
                    }
                }
            }
            let w = &self.bm1_pinv * &v;
            v = &self.b0.mat * &w;
            // A kernel shift at this stage propagates through the rest.
            for kappa in &self.kernel {
                let mut dir = &self.b0.mat * kappa;
                for _ in stage + 1..k {
                    dir = &self.b0.mat * (&self.bm1_pinv * &dir);
                }
                if dir.norm() > 1e-12 {
                    let n = dir.norm();
                    gauges.push(dir / n);
                }
            }
        }
        Ok((v, gauges))
    }
}

/// Least-squares residual of `v` against the span of `dirs`.
pub fn residual_mod_span(v: &DVector<f64>, dirs: &[DVector<f64>]) -> f64 {
    if dirs.is_empty() {
        return v.norm();
    }
    let mut out = v.clone();
    let mut basis: Vec<DVector<f64>> = vec![];
    for g in dirs {
        let mut b = g.clone();
        for e in &basis {
            let c = e.dot(&b);
            b -= e * c;
        }
        if b.norm() > 1e-12 {
            let n = b.norm();
            basis.push(b / n);
        }
    }
    for e in &basis {
        let c = e.dot(&out);
        out -= e * c;
    }
    out.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_round_trip() {
        let f = FourierField::cosine(2, 1.3)
            .add(&FourierField::sine(1, -0.4))
            .add(&FourierField::constant(0.7));
        let v = field_to_coords(&f, 4);
        let g = coords_to_field(&v);
        assert!(f.sub(&g).l2_norm() < 1e-14);
        // The basis is orthonormal: coords carry the L² norm.
        let n2: f64 = v.iter().map(|x| x * x).sum();
        assert!((n2.sqrt() - f.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn assemble_zero_and_derivative() {
        let zero = OperatorMatrix::assemble(1, 3, |xi| Ok(vec![xi[0].scale(0.0)])).unwrap();
        assert!(zero.mat.norm() < 1e-15);

        // d/dx is skew and kills constants.
        let d = OperatorMatrix::assemble(1, 5, |xi| Ok(vec![xi[0].dx()])).unwrap();
        assert!(d.skew_defect() < 1e-13);
        let ker = d.kernel(1e-10);
        assert_eq!(ker.len(), 1);
    }

    #[test]
    fn recursion_chain_at_zero_steps_is_the_base_operator() {
        let b0 = OperatorMatrix::assemble(1, 4, |xi| Ok(vec![xi[0].dx()])).unwrap();
        let bm1 = OperatorMatrix::assemble(1, 4, |xi| Ok(vec![xi[0].dx()])).unwrap();
        let chain = RecursionChain::new(b0.clone(), bm1).unwrap();
        let xi = DVector::from_fn(9, |i, _| (i as f64 + 1.0).sin());
        let (got, gauges) = chain.apply(&xi, 0, 1e-6).unwrap();
        assert!(gauges.is_empty());
        assert!((got - &b0.mat * &xi).norm() < 1e-14);
    }

    #[test]
    fn trivial_dirac_reduction_keeps_everything() {
        let d = OperatorMatrix::assemble(2, 3, |xi| Ok(vec![xi[1].dx(), xi[0].dx()])).unwrap();
        let red = dirac_reduce(&d, &[0, 1], &[]).unwrap();
        assert!((&red.matrix.mat - &d.mat).norm() < 1e-14);
    }
}
