//! Hydrodynamic-type Hamiltonian operators B = g(u)·D + z(u, uₓ) with an
//! optional nonlocal tail Σ_α s_α·wᵅ D⁻¹ (wᵅ)ᵀ, acting on covector tuples
//! δH/δu over the pattern coordinates of a hierarchy.
//!
//! Coefficient entries are polynomials in the field components and their
//! x-derivatives (degree ≤ 3, which covers every operator table in scope),
//! evaluated spectrally with exact convolutions. D⁻¹ inverts the nonzero
//! Fourier modes and sets the output mean to zero; feeding it a nonzero-
//! mean argument is an error, matching the symplectic-leaf restriction
//! under which the nonlocal operators exist.

use crate::error::{Error, Result};
use crate::fourier::FourierField;
use crate::hierarchy::{FieldState, HierarchyName, HierarchySpec};
use crate::laurent::LaurentElement;

/// One monomial `c·Π uᵢ^pᵢ·Π (uᵢₓ)^qᵢ` in the field components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coeff: f64,
    /// Powers of each field component.
    pub pows: Vec<u32>,
    /// Powers of each component's x-derivative.
    pub dx_pows: Vec<u32>,
}

/// A polynomial expression in fields and their derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyExpr {
    pub terms: Vec<PolyTerm>,
}

impl PolyExpr {
    pub fn zero() -> Self {
        PolyExpr { terms: vec![] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        PolyExpr {
            terms: vec![PolyTerm {
                coeff: c,
                pows: vec![0; dim],
                dx_pows: vec![0; dim],
            }],
        }
    }

    /// `c·Π uᵢ^pows[i]` (no derivatives).
    pub fn mono(c: f64, pows: &[u32]) -> Self {
        PolyExpr {
            terms: vec![PolyTerm {
                coeff: c,
                pows: pows.to_vec(),
                dx_pows: vec![0; pows.len()],
            }],
        }
    }

    /// `c·Π uᵢ^pows[i] · Π (uᵢₓ)^dx[i]`.
    pub fn mono_dx(c: f64, pows: &[u32], dx: &[u32]) -> Self {
        PolyExpr {
            terms: vec![PolyTerm {
                coeff: c,
                pows: pows.to_vec(),
                dx_pows: dx.to_vec(),
            }],
        }
    }

    pub fn plus(mut self, other: PolyExpr) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    /// Spectral evaluation at a state (exact convolutions).
    pub fn eval(&self, fields: &[FourierField]) -> FourierField {
        let mut acc = FourierField::zero();
        for t in &self.terms {
            let mut prod = FourierField::constant(t.coeff);
            for (i, &p) in t.pows.iter().enumerate() {
                for _ in 0..p {
                    prod = prod.mul(&fields[i]);
                }
            }
            for (i, &q) in t.dx_pows.iter().enumerate() {
                if q > 0 {
                    let dx = fields[i].dx();
                    for _ in 0..q {
                        prod = prod.mul(&dx);
                    }
                }
            }
            acc = acc.add(&prod);
        }
        acc
    }
}

/// Nonlocal tail term s·w D⁻¹ wᵀ (vector of entries per component).
#[derive(Debug, Clone)]
pub struct TailTerm {
    pub sign: f64,
    pub left: Vec<PolyExpr>,
    pub right: Vec<PolyExpr>,
}

#[derive(Debug, Clone)]
pub struct HydroOperator {
    pub dim: usize,
    /// Multiplies Dξ.
    pub g: Vec<Vec<PolyExpr>>,
    /// Multiplies ξ (zeroth order; carries the b·uₓ terms).
    pub z: Vec<Vec<PolyExpr>>,
    pub tail: Vec<TailTerm>,
}

impl HydroOperator {
    pub fn zero(dim: usize) -> Self {
        HydroOperator {
            dim,
            g: vec![vec![PolyExpr::zero(); dim]; dim],
            z: vec![vec![PolyExpr::zero(); dim]; dim],
            tail: vec![],
        }
    }

    /// (Bξ)ᵢ = Σⱼ gᵢⱼ·(ξⱼ)ₓ + Σⱼ zᵢⱼ·ξⱼ + Σ_α s_α wᵅᵢ·D⁻¹(Σⱼ wᵅⱼ ξⱼ).
    /// Any nonlocal tail requires its D⁻¹ argument to have zero mean.
    pub fn apply(&self, state: &FieldState, xi: &[FourierField]) -> Result<Vec<FourierField>> {
        self.apply_impl(state, xi, true)
    }

    /// Same action with the tail arguments mean-projected instead of
    /// rejected: the operator composed with the admissible-sector
    /// projection. Used when assembling matrices over a full covector
    /// basis; agrees with [`Self::apply`] on the admissible sector.
    pub fn apply_on_sector(
        &self,
        state: &FieldState,
        xi: &[FourierField],
    ) -> Result<Vec<FourierField>> {
        self.apply_impl(state, xi, false)
    }

    fn apply_impl(
        &self,
        state: &FieldState,
        xi: &[FourierField],
        strict_mean: bool,
    ) -> Result<Vec<FourierField>> {
        if xi.len() != self.dim {
            return Err(Error::Config(format!(
                "operator dimension {} vs covector {}",
                self.dim,
                xi.len()
            )));
        }
        let u = &state.fields;
        let mut out = vec![FourierField::zero(); self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.g[i][j].is_zero() {
                    out[i] = out[i].add(&self.g[i][j].eval(u).mul(&xi[j].dx()));
                }
                if !self.z[i][j].is_zero() {
                    out[i] = out[i].add(&self.z[i][j].eval(u).mul(&xi[j]));
                }
            }
        }
        for t in &self.tail {
            let mut arg = FourierField::zero();
            for j in 0..self.dim {
                arg = arg.add(&t.right[j].eval(u).mul(&xi[j]));
            }
            let mean = arg.mean();
            if strict_mean && mean.abs() > 1e-9 * (1.0 + arg.l2_norm()) {
                return Err(Error::NonzeroMeanInNonlocalTail { mean });
            }
            let prim = arg.dx_inv();
            for i in 0..self.dim {
                out[i] = out[i].add(&t.left[i].eval(u).mul(&prim).scale(t.sign));
            }
        }
        Ok(out)
    }

    /// Pointwise determinant of the metric g on the grid.
    pub fn metric_det_grid(&self, state: &FieldState, n: usize) -> Vec<f64> {
        assert_eq!(self.dim, 2, "metric diagnostics cover 2-component patterns");
        let u = &state.fields;
        let (a, b) = (self.g[0][0].eval(u), self.g[0][1].eval(u));
        let (c, d) = (self.g[1][0].eval(u), self.g[1][1].eval(u));
        let (ga, gb, gc, gd) = (
            a.eval_grid(n),
            b.eval_grid(n),
            c.eval_grid(n),
            d.eval_grid(n),
        );
        (0..n).map(|j| ga[j] * gd[j] - gb[j] * gc[j]).collect()
    }
}

/// Pointwise nondegeneracy diagnostics of the metric g of a structure.
#[derive(Debug, Clone)]
pub struct MetricDiagnostics {
    /// min over the grid of |det g|.
    pub min_abs_det: f64,
    /// Grid points where det g vanishes (to tolerance).
    pub degenerate: bool,
    /// Benny: min |u₀² − 4u₋₁|; dToda: min |w₁w₂| (n ≥ 0) and min u₁.
    pub min_abs_discriminant: f64,
    pub min_leading_field: f64,
}

/// Evaluates det g on the grid for a builtin structure and reports where
/// the associated metric degenerates.
pub fn metric_degeneracy(
    family: HierarchyName,
    n: i32,
    state: &FieldState,
    grid: usize,
) -> Result<MetricDiagnostics> {
    let op = builtin_operator(family, n)?;
    let det = op.metric_det_grid(state, grid);
    let min_abs_det = det.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let (g0, g1) = (
        state.fields[0].eval_grid(grid),
        state.fields[1].eval_grid(grid),
    );
    let disc = |j: usize| -> f64 {
        match family {
            HierarchyName::Benny => g0[j] * g0[j] - 4.0 * g1[j],
            HierarchyName::DToda => {
                if n < 0 {
                    1.0
                } else {
                    (g0[j] - 2.0 * g1[j]) * (g0[j] + 2.0 * g1[j])
                }
            }
            _ => f64::NAN,
        }
    };
    let min_abs_discriminant = (0..grid).map(disc).fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let min_leading_field = g1.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    Ok(MetricDiagnostics {
        min_abs_det,
        degenerate: min_abs_det < 1e-10,
        min_abs_discriminant,
        min_leading_field,
    })
}

/// The structures carried by a hierarchy’s pattern, by bracket index.
pub fn builtin_operator(family: HierarchyName, n: i32) -> Result<HydroOperator> {
    match (family, n) {
        (HierarchyName::Benny, -1) => {
            // [[0, D], [D, 0]].
            let mut op = HydroOperator::zero(2);
            op.g[0][1] = PolyExpr::constant(2, 1.0);
            op.g[1][0] = PolyExpr::constant(2, 1.0);
            Ok(op)
        }
        (HierarchyName::Benny, 0) => {
            // [[2, u₀],[u₀, 2u₋₁]]D + u₀ₓ in (1,2) and u₋₁ₓ in (2,2).
            // The printed table puts the u₋₁ₓ term at (2,1), which breaks
            // skew-adjointness and the Schur complement; the diagonal
            // placement is forced (see the reduction cross-checks).
            let mut op = HydroOperator::zero(2);
            op.g[0][0] = PolyExpr::mono(2.0, &[0, 0]);
            op.g[0][1] = PolyExpr::mono(1.0, &[1, 0]);
            op.g[1][0] = PolyExpr::mono(1.0, &[1, 0]);
            op.g[1][1] = PolyExpr::mono(2.0, &[0, 1]);
            op.z[0][1] = PolyExpr::mono_dx(1.0, &[0, 0], &[1, 0]);
            op.z[1][1] = PolyExpr::mono_dx(1.0, &[0, 0], &[0, 1]);
            Ok(op)
        }
        (HierarchyName::Benny, 1) => {
            // [[4u₀, u₀²+4u₋₁],[u₀²+4u₋₁, 4u₀u₋₁]]D
            //  + [[2, 2u₀],[0, 2u₋₁]]u₀ₓ + [[0, 2],[2, 2u₀]]u₋₁ₓ.
            let mut op = HydroOperator::zero(2);
            op.g[0][0] = PolyExpr::mono(4.0, &[1, 0]);
            op.g[0][1] = PolyExpr::mono(1.0, &[2, 0]).plus(PolyExpr::mono(4.0, &[0, 1]));
            op.g[1][0] = op.g[0][1].clone();
            op.g[1][1] = PolyExpr::mono(4.0, &[1, 1]);
            op.z[0][0] = PolyExpr::mono_dx(2.0, &[0, 0], &[1, 0]);
            op.z[0][1] = PolyExpr::mono_dx(2.0, &[1, 0], &[1, 0])
                .plus(PolyExpr::mono_dx(2.0, &[0, 0], &[0, 1]));
            op.z[1][0] = PolyExpr::mono_dx(2.0, &[0, 0], &[0, 1]);
            op.z[1][1] = PolyExpr::mono_dx(2.0, &[0, 1], &[1, 0])
                .plus(PolyExpr::mono_dx(2.0, &[1, 0], &[0, 1]));
            Ok(op)
        }
        (HierarchyName::DToda, -1) => {
            // [[0, u₁],[u₁, 0]]D + [[0, u₁ₓ],[0, 0]].
            let mut op = HydroOperator::zero(2);
            op.g[0][1] = PolyExpr::mono(1.0, &[0, 1]);
            op.g[1][0] = PolyExpr::mono(1.0, &[0, 1]);
            op.z[0][1] = PolyExpr::mono_dx(1.0, &[0, 0], &[0, 1]);
            Ok(op)
        }
        (HierarchyName::DToda, 0) => {
            // [[4u₁², u₀u₁],[u₀u₁, u₁²]]D + [[0,0],[u₁,0]]u₀ₓ
            //  + [[4u₁, u₀],[0, u₁]]u₁ₓ.
            let mut op = HydroOperator::zero(2);
            op.g[0][0] = PolyExpr::mono(4.0, &[0, 2]);
            op.g[0][1] = PolyExpr::mono(1.0, &[1, 1]);
            op.g[1][0] = PolyExpr::mono(1.0, &[1, 1]);
            op.g[1][1] = PolyExpr::mono(1.0, &[0, 2]);
            op.z[0][0] = PolyExpr::mono_dx(4.0, &[0, 1], &[0, 1]);
            op.z[0][1] = PolyExpr::mono_dx(1.0, &[1, 0], &[0, 1]);
            op.z[1][0] = PolyExpr::mono_dx(1.0, &[0, 1], &[1, 0]);
            op.z[1][1] = PolyExpr::mono_dx(1.0, &[0, 1], &[0, 1]);
            Ok(op)
        }
        (HierarchyName::DToda, 1) => {
            // [[8u₀u₁², 4u₁³+u₀²u₁],[4u₁³+u₀²u₁, 2u₀u₁²]]D
            //  + [[4u₁², 0],[2u₀u₁, u₁²]]u₀ₓ
            //  + [[8u₀u₁, u₀²+8u₁²],[4u₁², 2u₀u₁]]u₁ₓ.
            let mut op = HydroOperator::zero(2);
            op.g[0][0] = PolyExpr::mono(8.0, &[1, 2]);
            op.g[0][1] = PolyExpr::mono(4.0, &[0, 3]).plus(PolyExpr::mono(1.0, &[2, 1]));
            op.g[1][0] = op.g[0][1].clone();
            op.g[1][1] = PolyExpr::mono(2.0, &[1, 2]);
            op.z[0][0] = PolyExpr::mono_dx(4.0, &[0, 2], &[1, 0])
                .plus(PolyExpr::mono_dx(8.0, &[1, 1], &[0, 1]));
            op.z[0][1] = PolyExpr::mono_dx(1.0, &[2, 0], &[0, 1])
                .plus(PolyExpr::mono_dx(8.0, &[0, 2], &[0, 1]));
            op.z[1][0] = PolyExpr::mono_dx(2.0, &[1, 1], &[1, 0])
                .plus(PolyExpr::mono_dx(4.0, &[0, 2], &[0, 1]));
            op.z[1][1] = PolyExpr::mono_dx(1.0, &[0, 2], &[1, 0])
                .plus(PolyExpr::mono_dx(2.0, &[1, 1], &[0, 1]));
            Ok(op)
        }
        (HierarchyName::DToda, 2) => {
            // Local part
            //   [[16u₁⁴+12u₀²u₁², 12u₀u₁³+u₀³u₁],[12u₀u₁³+u₀³u₁, 4u₁⁴+3u₀²u₁²]]D
            //   + [[12u₀u₁², 4u₁³],[3u₀²u₁+8u₁³, 3u₀u₁²]]u₀ₓ
            //   + [[32u₁³+12u₀²u₁, 24u₀u₁²+u₀³],[12u₀u₁², 8u₁³+3u₀²u₁]]u₁ₓ
            // minus the nonlocal tail w D⁻¹ wᵀ with w = (4u₁u₁ₓ, u₁u₀ₓ).
            let mut op = HydroOperator::zero(2);
            op.g[0][0] = PolyExpr::mono(16.0, &[0, 4]).plus(PolyExpr::mono(12.0, &[2, 2]));
            op.g[0][1] = PolyExpr::mono(12.0, &[1, 3]).plus(PolyExpr::mono(1.0, &[3, 1]));
            op.g[1][0] = op.g[0][1].clone();
            op.g[1][1] = PolyExpr::mono(4.0, &[0, 4]).plus(PolyExpr::mono(3.0, &[2, 2]));
            op.z[0][0] = PolyExpr::mono_dx(12.0, &[1, 2], &[1, 0])
                .plus(PolyExpr::mono_dx(32.0, &[0, 3], &[0, 1]))
                .plus(PolyExpr::mono_dx(12.0, &[2, 1], &[0, 1]));
            op.z[0][1] = PolyExpr::mono_dx(4.0, &[0, 3], &[1, 0])
                .plus(PolyExpr::mono_dx(24.0, &[1, 2], &[0, 1]))
                .plus(PolyExpr::mono_dx(1.0, &[3, 0], &[0, 1]));
            op.z[1][0] = PolyExpr::mono_dx(3.0, &[2, 1], &[1, 0])
                .plus(PolyExpr::mono_dx(8.0, &[0, 3], &[1, 0]))
                .plus(PolyExpr::mono_dx(12.0, &[1, 2], &[0, 1]));
            op.z[1][1] = PolyExpr::mono_dx(3.0, &[1, 2], &[1, 0])
                .plus(PolyExpr::mono_dx(8.0, &[0, 3], &[0, 1]))
                .plus(PolyExpr::mono_dx(3.0, &[2, 1], &[0, 1]));
            let w = vec![
                PolyExpr::mono_dx(4.0, &[0, 1], &[0, 1]),
                PolyExpr::mono_dx(1.0, &[0, 1], &[1, 0]),
            ];
            op.tail.push(TailTerm {
                sign: -1.0,
                left: w.clone(),
                right: w,
            });
            Ok(op)
        }
        (f, n) => Err(Error::UnknownOperator(format!("{}:B{}", f.name(), n))),
    }
}

/// Scalar functionals of a field state, for variational derivatives and
/// induced-bracket checks.
#[derive(Clone)]
pub enum FieldFunctional {
    /// tr(Lᵏ)/k of the embedded Lax element.
    TraceMonomial(u32),
    /// Σᵢ ∫ aᵢ(x)·uᵢ(x) dx.
    LinearFields(Vec<FourierField>),
    /// Opaque evaluation.
    Custom(std::sync::Arc<dyn Fn(&FieldState) -> Result<f64> + Send + Sync>),
}

impl std::fmt::Debug for FieldFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldFunctional::TraceMonomial(k) => write!(f, "TraceMonomial({k})"),
            FieldFunctional::LinearFields(_) => write!(f, "LinearFields"),
            FieldFunctional::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl FieldFunctional {
    pub fn eval(&self, spec: &HierarchySpec, state: &FieldState) -> Result<f64> {
        match self {
            FieldFunctional::TraceMonomial(k) => {
                let ctx = spec.context();
                let l = spec.to_element(state);
                Ok(ctx.trace(&ctx.power(&l, *k)?) / *k as f64)
            }
            FieldFunctional::LinearFields(a) => {
                let mut acc = 0.0;
                for (ai, ui) in a.iter().zip(&state.fields) {
                    acc += ai.product_mean(ui);
                }
                Ok(acc)
            }
            FieldFunctional::Custom(f) => f(state),
        }
    }
}

/// δH/δu by spectral finite differences along every grid mode of every
/// component (centered, step `h`), modes up to `kmax`.
pub fn variational_derivative(
    spec: &HierarchySpec,
    h_functional: &FieldFunctional,
    state: &FieldState,
    kmax: usize,
    h: f64,
) -> Result<Vec<FourierField>> {
    use num_complex::Complex64;
    let ncomp = state.fields.len();
    let mut out = Vec::with_capacity(ncomp);
    for c in 0..ncomp {
        let probe = |dir: FourierField| -> Result<f64> {
            let mut plus = state.clone();
            plus.fields[c] = plus.fields[c].add(&dir.scale(h));
            let mut minus = state.clone();
            minus.fields[c] = minus.fields[c].sub(&dir.scale(h));
            Ok((h_functional.eval(spec, &plus)? - h_functional.eval(spec, &minus)?) / (2.0 * h))
        };
        let mut amps = vec![Complex64::ZERO; kmax + 1];
        for k in 0..=kmax {
            // ∫ g·cos(2πkx) dx = Re ĝ_k and ∫ g·sin(2πkx) dx = −Im ĝ_k
            // for real g, so each probe reads off one amplitude directly.
            let re_deriv = probe(if k == 0 {
                FourierField::constant(1.0)
            } else {
                FourierField::cosine(k, 1.0)
            })?;
            let im_deriv = if k == 0 {
                0.0
            } else {
                -probe(FourierField::sine(k, 1.0))?
            };
            amps[k] = Complex64::new(re_deriv, im_deriv);
        }
        out.push(FourierField::from_modes(amps));
    }
    Ok(out)
}

/// Closed-form variational derivative of tr(Lᵏ)/k in pattern coordinates:
/// the pairing identifies δH/δuᵢ with coefficients of dH(L) = Lᵏ⁻¹ (degree
/// −1−i for the tr₋₁ families; degree −i with the λ±1 slots summed for the
/// tied dToda pattern).
pub fn trace_variational_derivative(
    spec: &HierarchySpec,
    k: u32,
    state: &FieldState,
) -> Result<Vec<FourierField>> {
    let ctx = spec.context();
    let l = spec.to_element(state);
    let dh = ctx.power(&l, k - 1)?;
    Ok(covector_from_element(spec, &dh))
}

/// Pattern-coordinate covector of an algebra element under the pairing
/// identification.
pub fn covector_from_element(spec: &HierarchySpec, dh: &LaurentElement) -> Vec<FourierField> {
    match spec.name {
        HierarchyName::DToda => vec![dh.coeff(0), dh.coeff(1).add(&dh.coeff(-1))],
        _ => spec
            .component_degrees()
            .iter()
            .map(|&d| dh.coeff(-1 - d))
            .collect(),
    }
}

/// Embeds a pattern covector as an algebra element (adjoint of
/// [`covector_from_element`]); for the tied dToda slot the weight is split
/// evenly across λ±1.
pub fn element_from_covector(spec: &HierarchySpec, xi: &[FourierField]) -> LaurentElement {
    match spec.name {
        HierarchyName::DToda => LaurentElement::from_pairs([
            (0, xi[0].clone()),
            (1, xi[1].scale(0.5)),
            (-1, xi[1].scale(0.5)),
        ]),
        _ => LaurentElement::from_pairs(
            spec.component_degrees()
                .iter()
                .zip(xi)
                .map(|(&d, f)| (-1 - d, f.clone())),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn benny_state(rng: &mut impl rand::Rng) -> FieldState {
        FieldState {
            fields: vec![
                FourierField::random(rng, 2, 0.3),
                FourierField::constant(1.0).add(&FourierField::random(rng, 2, 0.3)),
            ],
            time: 0.0,
        }
    }

    fn dtoda_state(rng: &mut impl rand::Rng) -> FieldState {
        FieldState {
            fields: vec![
                FourierField::random(rng, 2, 0.3),
                FourierField::constant(1.0).add(&FourierField::random(rng, 2, 0.2)),
            ],
            time: 0.0,
        }
    }

    #[test]
    fn zero_operator_does_nothing() {
        let op = HydroOperator::zero(2);
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        let state = benny_state(&mut rng);
        let xi = vec![FourierField::sine(1, 1.0), FourierField::cosine(2, 1.0)];
        let out = op.apply(&state, &xi).unwrap();
        assert!(out.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn benny_first_structure_swaps_and_differentiates() {
        let op = builtin_operator(HierarchyName::Benny, -1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(403);
        let state = benny_state(&mut rng);
        let xi = vec![FourierField::sine(1, 1.0), FourierField::cosine(2, 0.5)];
        let out = op.apply(&state, &xi).unwrap();
        assert!(out[0].sub(&xi[1].dx()).l2_norm() < 1e-14);
        assert!(out[1].sub(&xi[0].dx()).l2_norm() < 1e-14);
    }

    #[test]
    fn dtoda_b2_tail_matches_grid_oracle() {
        // Term-by-term mode arithmetic vs pointwise-grid evaluation of
        // −w D⁻¹ (wᵀξ) with w = (4u₁u₁ₓ, u₁u₀ₓ).
        let op = builtin_operator(HierarchyName::DToda, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(405);
        let state = dtoda_state(&mut rng);
        let (u0, u1) = (state.fields[0].clone(), state.fields[1].clone());
        let w0 = u1.mul(&u1.dx()).scale(4.0);
        let w1 = u1.mul(&u0.dx());

        // Build an admissible covector: wᵀξ must have zero mean.
        let raw0 = FourierField::sine(1, 0.8);
        let raw1 = FourierField::cosine(1, 0.6);
        let mean = w0.mul(&raw0).add(&w1.mul(&raw1)).mean();
        let w1_mean = w1.mean();
        // Shift ξ¹ by a constant to cancel the mean (w₁ has nonzero mean
        // for generic states).
        assert!(w1_mean.abs() > 1e-10);
        let xi = vec![raw0, raw1.sub(&FourierField::constant(mean / w1_mean))];

        let full = op.apply(&state, &xi).unwrap();
        // Local part alone.
        let mut local = op.clone();
        local.tail.clear();
        let loc = local.apply(&state, &xi).unwrap();

        let n = 257;
        let arg = w0.mul(&xi[0]).add(&w1.mul(&xi[1]));
        let prim = arg.dx_inv();
        for i in 0..2 {
            let tail_i = full[i].sub(&loc[i]);
            let want = if i == 0 { &w0 } else { &w1 };
            let (gt, gw, gp) = (
                tail_i.eval_grid(n),
                want.eval_grid(n),
                prim.eval_grid(n),
            );
            for j in 0..n {
                assert!(
                    (gt[j] + gw[j] * gp[j]).abs() < 1e-10,
                    "tail mismatch at grid point {j}"
                );
            }
        }
    }

    #[test]
    fn nonzero_mean_tail_argument_is_an_error() {
        let op = builtin_operator(HierarchyName::DToda, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(407);
        let state = dtoda_state(&mut rng);
        let xi = vec![FourierField::constant(1.0), FourierField::sine(1, 1.0)];
        // For a generic state ∫ w·ξ ≠ 0.
        match op.apply(&state, &xi) {
            Err(Error::NonzeroMeanInNonlocalTail { .. }) => {}
            other => panic!("expected NonzeroMeanInNonlocalTail, got {other:?}"),
        }
    }

    #[test]
    fn metric_degeneracy_diagnostics() {
        let mut rng = ChaCha8Rng::seed_from_u64(421);
        // Constants u₀ = 0, u₋₁ = −1: Δ = u₀² − 4u₋₁ = 4 everywhere.
        let state = FieldState {
            fields: vec![FourierField::zero(), FourierField::constant(-1.0)],
            time: 0.0,
        };
        let d = metric_degeneracy(HierarchyName::Benny, 0, &state, 65).unwrap();
        assert!(!d.degenerate);
        assert!((d.min_abs_discriminant - 4.0).abs() < 1e-12);
        // u₀² = 4u₋₁ pointwise: degenerate.
        let state = FieldState {
            fields: vec![FourierField::constant(2.0), FourierField::constant(1.0)],
            time: 0.0,
        };
        let d = metric_degeneracy(HierarchyName::Benny, 0, &state, 65).unwrap();
        assert!(d.degenerate);
        // dToda first structure: det g = −u₁² on the grid.
        let state = dtoda_state(&mut rng);
        let d = metric_degeneracy(HierarchyName::DToda, -1, &state, 65).unwrap();
        let min_u1_sq = state
            .fields[1]
            .eval_grid(65)
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v * v));
        assert!((d.min_abs_det - min_u1_sq).abs() < 1e-10);
        assert!(d.min_leading_field > 0.0);
    }

    #[test]
    fn unknown_operator_is_an_error() {
        assert!(matches!(
            builtin_operator(HierarchyName::Benny, 2),
            Err(Error::UnknownOperator(_))
        ));
        assert!(matches!(
            builtin_operator(HierarchyName::DKp, 0),
            Err(Error::UnknownOperator(_))
        ));
    }

    #[test]
    fn variational_derivative_examples() {
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let mut rng = ChaCha8Rng::seed_from_u64(409);
        let state = benny_state(&mut rng);

        // H = ∫u₀ dx → δH/δu = (1, 0).
        let h = FieldFunctional::LinearFields(vec![
            FourierField::constant(1.0),
            FourierField::zero(),
        ]);
        let g = variational_derivative(&spec, &h, &state, 4, 1e-6).unwrap();
        assert!(g[0].sub(&FourierField::constant(1.0)).l2_norm() < 1e-8);
        assert!(g[1].l2_norm() < 1e-8);

        // Trace functionals: finite differences vs the analytic rule.
        for k in 2..=3u32 {
            let fd = variational_derivative(
                &spec,
                &FieldFunctional::TraceMonomial(k),
                &state,
                6,
                1e-6,
            )
            .unwrap();
            let exact = trace_variational_derivative(&spec, k, &state).unwrap();
            for (a, b) in fd.iter().zip(&exact) {
                assert!(a.sub(b).l2_norm() < 1e-7, "k={k}");
            }
        }

        // tr L²/2 = ∫u₀u₋₁ for the Benny embedding: gradient (u₋₁, u₀).
        let exact = trace_variational_derivative(&spec, 2, &state).unwrap();
        assert!(exact[0].sub(&state.fields[1]).l2_norm() < 1e-12);
        assert!(exact[1].sub(&state.fields[0]).l2_norm() < 1e-12);

        // tr L³/3 = ∫(u₀²u₋₁ + u₋₁²): gradient (2u₀u₋₁, u₀² + 2u₋₁).
        let exact = trace_variational_derivative(&spec, 3, &state).unwrap();
        let (u0, um1) = (&state.fields[0], &state.fields[1]);
        assert!(exact[0].sub(&u0.mul(um1).scale(2.0)).l2_norm() < 1e-12);
        let want = u0.mul(u0).add(&um1.scale(2.0));
        assert!(exact[1].sub(&want).l2_norm() < 1e-12);
    }

    #[test]
    fn dtoda_covector_identification_round_trip() {
        let spec = HierarchySpec::new(HierarchyName::DToda);
        let mut rng = ChaCha8Rng::seed_from_u64(411);
        let state = dtoda_state(&mut rng);
        // tr L²/2 = ½∫(u₀² + 2u₁²): gradient (u₀, 4u₁)... via the tied
        // slots: dH = L, so δ/δu₀ = u₀ and δ/δu₁ = 2u₁.
        let exact = trace_variational_derivative(&spec, 2, &state).unwrap();
        assert!(exact[0].sub(&state.fields[0]).l2_norm() < 1e-12);
        assert!(exact[1].sub(&state.fields[1].scale(2.0)).l2_norm() < 1e-12);
        let fd = variational_derivative(
            &spec,
            &FieldFunctional::TraceMonomial(2),
            &state,
            6,
            1e-6,
        )
        .unwrap();
        for (a, b) in fd.iter().zip(&exact) {
            assert!(a.sub(b).l2_norm() < 1e-7);
        }
    }
}
