//! The working context for all algebra operations: which Lie bracket and
//! trace pairing are in force, which r-matrix decomposition, the Fourier
//! mode cap, the λ-degree window, and the tolerances.
//!
//! Operations grow supports exactly and then check the result against the
//! caps ("grow-then-check"): exceeding a cap is an error under the strict
//! policy, never a silent truncation. The `Truncate` policy is reserved for
//! time evolution, where Galerkin projection onto the resolved band is the
//! intended discretization.

use crate::error::{Error, Result};
use crate::fourier::FourierField;
use crate::laurent::LaurentElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketVariant {
    /// `[u,v]₋₁ = u_λ v_x − u_x v_λ`, paired with tr₋₁ u = ∫u₋₁ dx.
    MinusOne,
    /// `[u,v]₀ = λ·[u,v]₋₁`, paired with tr₀ u = ∫u₀ dx.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RMatrixKind {
    Benny,
    DToda,
    DKp,
    DmKp,
    DDym,
}

impl RMatrixKind {
    pub const ALL: [RMatrixKind; 5] = [
        RMatrixKind::Benny,
        RMatrixKind::DToda,
        RMatrixKind::DKp,
        RMatrixKind::DmKp,
        RMatrixKind::DDym,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RMatrixKind::Benny => "benny",
            RMatrixKind::DToda => "dtoda",
            RMatrixKind::DKp => "dkp",
            RMatrixKind::DmKp => "dmkp",
            RMatrixKind::DDym => "ddym",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "benny" => Ok(RMatrixKind::Benny),
            "dtoda" => Ok(RMatrixKind::DToda),
            "dkp" => Ok(RMatrixKind::DKp),
            "dmkp" => Ok(RMatrixKind::DmKp),
            "ddym" => Ok(RMatrixKind::DDym),
            other => Err(Error::Config(format!("unknown r-matrix '{other}'"))),
        }
    }

    /// The bracket variant each decomposition lives in.
    pub fn bracket_variant(&self) -> BracketVariant {
        match self {
            RMatrixKind::DToda => BracketVariant::Zero,
            _ => BracketVariant::MinusOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowPolicy {
    Strict,
    Truncate,
}

#[derive(Debug, Clone)]
pub struct AlgebraContext {
    pub rmatrix: RMatrixKind,
    pub bracket: BracketVariant,
    pub mode_cap: usize,
    pub degree_min: i32,
    pub degree_max: i32,
    pub prune_tol: f64,
    pub fd_step: f64,
    pub overflow: OverflowPolicy,
}

impl AlgebraContext {
    /// Context sized for desk-scale runs: 16 modes, window [−12, 6].
    pub fn new(rmatrix: RMatrixKind) -> Self {
        Self::with_caps(rmatrix, 16, -12, 6)
    }

    pub fn with_caps(rmatrix: RMatrixKind, mode_cap: usize, degree_min: i32, degree_max: i32) -> Self {
        AlgebraContext {
            rmatrix,
            bracket: rmatrix.bracket_variant(),
            mode_cap,
            degree_min,
            degree_max,
            prune_tol: 1e-14,
            fd_step: 1e-5,
            overflow: OverflowPolicy::Strict,
        }
    }

    pub fn truncating(mut self) -> Self {
        self.overflow = OverflowPolicy::Truncate;
        self
    }

    pub fn with_window(mut self, degree_min: i32, degree_max: i32) -> Self {
        self.degree_min = degree_min;
        self.degree_max = degree_max;
        self
    }

    pub fn with_mode_cap(mut self, cap: usize) -> Self {
        self.mode_cap = cap;
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// Validates (or truncates) an op result against window and cap.
    pub(crate) fn admit(&self, mut u: LaurentElement) -> Result<LaurentElement> {
        u.prune(self.prune_tol);
        match self.overflow {
            OverflowPolicy::Strict => {
                if let (Some(lo), Some(hi)) = (u.degree_min(), u.degree_max()) {
                    if lo < self.degree_min || hi > self.degree_max {
                        return Err(Error::DegreeOverflow {
                            lo,
                            hi,
                            win_lo: self.degree_min,
                            win_hi: self.degree_max,
                        });
                    }
                }
                let support = u.max_mode();
                if support > self.mode_cap {
                    return Err(Error::ModeOverflow {
                        support,
                        cap: self.mode_cap,
                    });
                }
                Ok(u)
            }
            OverflowPolicy::Truncate => {
                let mut out = LaurentElement::zero();
                for (d, f) in u.iter() {
                    if d >= self.degree_min && d <= self.degree_max {
                        out.set_coeff(d, f.truncate(self.mode_cap));
                    }
                }
                Ok(out.pruned(self.prune_tol))
            }
        }
    }

    /// Commutative product u·v.
    pub fn mul(&self, u: &LaurentElement, v: &LaurentElement) -> Result<LaurentElement> {
        self.admit(u.mul_raw(v))
    }

    /// ∂u/∂λ.
    pub fn d_lambda(&self, u: &LaurentElement) -> Result<LaurentElement> {
        self.admit(u.d_lambda_raw())
    }

    /// ∂u/∂x (cannot overflow; kept on the context for symmetry).
    pub fn d_x(&self, u: &LaurentElement) -> LaurentElement {
        u.d_x()
    }

    /// Trace in the context's variant: the circle average of the degree −1
    /// (variant −1) or degree 0 (variant 0) coefficient.
    pub fn trace(&self, u: &LaurentElement) -> f64 {
        self.trace_with(u, self.bracket)
    }

    pub fn trace_with(&self, u: &LaurentElement, variant: BracketVariant) -> f64 {
        let d = match variant {
            BracketVariant::MinusOne => -1,
            BracketVariant::Zero => 0,
        };
        u.coeff(d).mean()
    }

    /// Ad-invariant pairing (u,v) = tr(uv) in the context's variant.
    pub fn pairing(&self, u: &LaurentElement, v: &LaurentElement) -> Result<f64> {
        // Only the traced degree of the product is needed; computing it
        // directly keeps huge pairings inside the caps.
        let d = match self.bracket {
            BracketVariant::MinusOne => -1,
            BracketVariant::Zero => 0,
        };
        let mut acc = 0.0;
        for (da, fa) in u.iter() {
            if let Some(fb) = v.coeff_ref(d - da) {
                acc += fa.product_mean(fb);
            }
        }
        Ok(acc)
    }

    /// Lᵏ for k ≥ 0 by repeated checked multiplication.
    pub fn power(&self, base: &LaurentElement, k: u32) -> Result<LaurentElement> {
        let mut acc = LaurentElement::one();
        for _ in 0..k {
            acc = self.mul(&acc, base)?;
        }
        Ok(acc)
    }

    /// L^p for any integer p; negative powers go through the truncated
    /// Neumann inverse of the given `order`.
    pub fn power_signed(&self, base: &LaurentElement, p: i32, inv_order: usize) -> Result<LaurentElement> {
        if p >= 0 {
            self.power(base, p as u32)
        } else {
            let inv = self.invert(base, inv_order)?.inverse;
            self.power(&inv, (-p) as u32)
        }
    }

    /// Truncated Neumann inverse around the dominant monomial.
    ///
    /// Requires a dominant monomial λᵈ·c with c bounded away from zero on
    /// the grid and everything else at strictly lower degree. The returned
    /// λ-support has length `order` and the residual ‖L·M − 1‖ is reported;
    /// it is bounded by the dropped geometric tail.
    pub fn invert(&self, l: &LaurentElement, order: usize) -> Result<Inverse> {
        if order == 0 {
            return Err(Error::Config("inversion order must be positive".into()));
        }
        let d = l
            .degree_max()
            .ok_or_else(|| Error::NotInvertible("zero element".into()))?;
        let c = l.coeff(d);
        let c_inv = c
            .recip(self.mode_cap, 1e-9)
            .ok_or_else(|| Error::NotInvertible("leading coefficient vanishes on the grid".into()))?;
        // L = λᵈc·(1 + W), W = λ⁻ᵈc⁻¹·(L − λᵈc), deg W < 0.
        let dominant = LaurentElement::monomial(d, c.clone());
        let rest = l.sub(&dominant);
        let w = self.admit(
            LaurentElement::monomial(-d, c_inv.clone())
                .mul_raw(&rest)
                .pruned(self.prune_tol),
        )?;
        debug_assert!(w.degree_max().map_or(true, |m| m < 0));
        // M = (1 − W + W² − …)·λ⁻ᵈ·c⁻¹, keeping `order` λ-degrees.
        let dinv = LaurentElement::monomial(-d, c_inv);
        let mut series = LaurentElement::one();
        let mut term = LaurentElement::one();
        for _ in 1..order {
            term = self.admit(term.mul_raw(&w).scale(-1.0))?;
            if term.is_zero() {
                break;
            }
            series = series.add(&term);
        }
        let keep_min = -d - (order as i32) + 1;
        let inverse = self.admit(series.mul_raw(&dinv).filter_degrees(|deg| deg >= keep_min))?;
        let residual = self
            .admit(l.mul_raw(&inverse))?
            .sub(&LaurentElement::one())
            .sup_norm();
        Ok(Inverse { inverse, residual })
    }

    /// Random element with degrees in [lo, hi], modes up to kmax.
    pub fn random_element(
        &self,
        rng: &mut impl rand::Rng,
        deg_lo: i32,
        deg_hi: i32,
        kmax: usize,
        amp: f64,
    ) -> LaurentElement {
        let mut e = LaurentElement::zero();
        for d in deg_lo..=deg_hi {
            e.set_coeff(d, FourierField::random(rng, kmax, amp));
        }
        e.pruned(self.prune_tol)
    }
}

#[derive(Debug, Clone)]
pub struct Inverse {
    pub inverse: LaurentElement,
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> AlgebraContext {
        AlgebraContext::new(RMatrixKind::Benny)
    }

    #[test]
    fn monomial_product() {
        let c = ctx();
        let u = LaurentElement::monomial(1, FourierField::sine(1, 1.0));
        let v = LaurentElement::const_monomial(-1, 1.0);
        let p = c.mul(&u, &v).unwrap();
        assert_eq!(p.degrees().collect::<Vec<_>>(), vec![0]);
        assert!(p.coeff(0).sub(&FourierField::sine(1, 1.0)).l2_norm() < 1e-15);
    }

    #[test]
    fn unit_law() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = c.random_element(&mut rng, -3, 2, 4, 1.0);
        let p = c.mul(&LaurentElement::one(), &u).unwrap();
        assert!(p.sub(&u).norm() < 1e-13);
    }

    #[test]
    fn grid_product_oracle() {
        // Independent route: evaluate both factors on a fine grid, multiply
        // pointwise, re-transform, and compare coefficient by coefficient.
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = c.random_element(&mut rng, -2, 2, 4, 1.0);
        let v = c.random_element(&mut rng, -2, 1, 4, 1.0);
        let p = c.mul(&u, &v).unwrap();
        let n = 4 * c.mode_cap + 1;
        for d in -4..=3 {
            let mut grid = vec![0.0; n];
            for du in -2..=2i32 {
                let dv = d - du;
                let gu = u.coeff(du).eval_grid(n);
                let gv = v.coeff(dv).eval_grid(n);
                for j in 0..n {
                    grid[j] += gu[j] * gv[j];
                }
            }
            let via_grid = FourierField::from_grid(&grid, c.mode_cap);
            assert!(
                p.coeff(d).sub(&via_grid).l2_norm() < 1e-12,
                "degree {d} mismatch"
            );
        }
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let c = ctx().with_window(-2, 2);
        let u = LaurentElement::const_monomial(2, 1.0);
        match c.mul(&u, &u) {
            Err(Error::DegreeOverflow { hi: 4, .. }) => {}
            other => panic!("expected DegreeOverflow, got {other:?}"),
        }
    }

    #[test]
    fn mode_overflow_is_an_error() {
        let c = ctx().with_mode_cap(5);
        let u = LaurentElement::monomial(0, FourierField::sine(3, 1.0));
        match c.mul(&u, &u) {
            Err(Error::ModeOverflow { support: 6, .. }) => {}
            other => panic!("expected ModeOverflow, got {other:?}"),
        }
    }

    #[test]
    fn d_lambda_monomial() {
        let c = ctx();
        let u = LaurentElement::const_monomial(2, 1.0);
        let got = c.d_lambda(&u).unwrap();
        assert!(got.sub(&LaurentElement::const_monomial(1, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn d_x_matches_centered_difference() {
        // Grid finite-difference oracle with one Richardson step:
        // D(h) = (f(x+h) − f(x−h))/2h, then (4D(h/2) − D(h))/3.
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = c.random_element(&mut rng, -1, 1, 2, 1.0);
        let du = c.d_x(&u);
        let n = 4096;
        let h = 1.0 / n as f64;
        for d in -1..=1 {
            let g = u.coeff(d).eval_grid(n);
            let gd = du.coeff(d).eval_grid(2048);
            for j in (0..n).step_by(2) {
                let d_h = (g[(j + 2) % n] - g[(j + n - 2) % n]) / (4.0 * h);
                let d_h2 = (g[(j + 1) % n] - g[(j + n - 1) % n]) / (2.0 * h);
                let fd = (4.0 * d_h2 - d_h) / 3.0;
                assert!((fd - gd[j / 2]).abs() < 1e-8 * (1.0 + gd[j / 2].abs()));
            }
        }
        // Spectral check against the exact derivative of a known field.
        let s = LaurentElement::monomial(0, FourierField::sine(2, 1.0));
        let want = LaurentElement::monomial(
            0,
            FourierField::cosine(2, 2.0 * std::f64::consts::PI * 2.0),
        );
        assert!(c.d_x(&s).sub(&want).norm() < 1e-12);
    }

    #[test]
    fn traces() {
        let c = ctx();
        assert!((c.trace(&LaurentElement::const_monomial(-1, 1.0)) - 1.0).abs() < 1e-15);
        let f = LaurentElement::monomial(0, FourierField::sine(1, 2.0));
        assert!(c.trace(&f).abs() < 1e-15);
        // tr₀ of u₁λ + u₀ + u₁λ⁻¹ with u₀ = 3 + cos 2πx.
        let u = LaurentElement::from_pairs([
            (1, FourierField::constant(1.0)),
            (0, FourierField::constant(3.0).add(&FourierField::cosine(1, 1.0))),
            (-1, FourierField::constant(1.0)),
        ]);
        assert!((c.trace_with(&u, BracketVariant::Zero) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pairing_language() {
        let c = ctx();
        let lam = LaurentElement::const_monomial(1, 1.0);
        let lam_m2 = LaurentElement::const_monomial(-2, 1.0);
        assert!((c.pairing(&lam, &lam_m2).unwrap() - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = c.random_element(&mut rng, -2, 2, 3, 1.0);
        let v = c.random_element(&mut rng, -2, 2, 3, 1.0);
        let w = c.random_element(&mut rng, -1, 1, 3, 1.0);
        // Symmetry.
        assert!((c.pairing(&u, &v).unwrap() - c.pairing(&v, &u).unwrap()).abs() < 1e-13);
        // Multiplication symmetry (XY, Z) = (X, YZ).
        let xy = c.mul(&u, &v).unwrap();
        let yz = c.mul(&v, &w).unwrap();
        assert!((c.pairing(&xy, &w).unwrap() - c.pairing(&u, &yz).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn powers() {
        let c = ctx();
        let l = LaurentElement::from_pairs([
            (1, FourierField::constant(1.0)),
            (-1, FourierField::sine(1, 1.0)),
        ]);
        assert!(c.power(&l, 0).unwrap().sub(&LaurentElement::one()).norm() < 1e-15);
        assert!(c.power(&l, 1).unwrap().sub(&l).norm() < 1e-15);
        // L² = λ² + 2 sin 2πx + sin² 2πx λ⁻², with sin² = (1 − cos 4πx)/2.
        let sq = c.power(&l, 2).unwrap();
        let sin_sq = FourierField::constant(0.5).add(&FourierField::cosine(2, -0.5));
        let want = LaurentElement::from_pairs([
            (2, FourierField::constant(1.0)),
            (0, FourierField::sine(1, 2.0)),
            (-2, sin_sq),
        ]);
        assert!(sq.sub(&want).norm() < 1e-14);
    }

    #[test]
    fn invert_monomials() {
        let c = ctx();
        let lam = LaurentElement::const_monomial(1, 1.0);
        let inv = c.invert(&lam, 1).unwrap();
        assert!(inv.inverse.sub(&LaurentElement::const_monomial(-1, 1.0)).norm() < 1e-14);
        assert!(inv.residual < 1e-14);

        let one = LaurentElement::one();
        let inv = c.invert(&one, 1).unwrap();
        assert!(inv.inverse.sub(&one).norm() < 1e-14);
    }

    #[test]
    fn invert_tail_bound() {
        let c = ctx();
        let l = LaurentElement::from_pairs([
            (1, FourierField::constant(1.0)),
            (0, FourierField::sine(1, 0.1)),
        ]);
        let inv = c.invert(&l, 6).unwrap();
        // Geometric-series tail: ‖W‖ = 0.1, residual ≤ 0.1⁶/(1−0.1) < 2·0.1⁶.
        assert!(inv.residual < 2.0 * 0.1f64.powi(6), "residual {}", inv.residual);
        assert!(inv.residual > 0.0);
    }

    #[test]
    fn not_invertible_when_leading_coefficient_vanishes() {
        let c = ctx();
        let l = LaurentElement::monomial(1, FourierField::sine(1, 1.0));
        assert!(matches!(c.invert(&l, 4), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn ring_laws_on_random_elements() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let u = c.random_element(&mut rng, -2, 1, 3, 1.0);
            let v = c.random_element(&mut rng, -2, 1, 3, 1.0);
            let w = c.random_element(&mut rng, -1, 1, 3, 1.0);
            let uv = c.mul(&u, &v).unwrap();
            let vu = c.mul(&v, &u).unwrap();
            assert!(uv.sub(&vu).norm() < 1e-12);
            let a = c.mul(&uv, &w).unwrap();
            let b = c.mul(&u, &c.mul(&v, &w).unwrap()).unwrap();
            assert!(a.sub(&b).norm() < 1e-12);
            let lhs = c.mul(&u, &v.add(&w)).unwrap();
            let rhs = c.mul(&u, &v).unwrap().add(&c.mul(&u, &w).unwrap());
            assert!(lhs.sub(&rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn leibniz_for_partials() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u = c.random_element(&mut rng, -2, 2, 3, 1.0);
        let v = c.random_element(&mut rng, -2, 2, 3, 1.0);
        let uv = c.mul(&u, &v).unwrap();
        let lhs_x = c.d_x(&uv);
        let rhs_x = c.mul(&c.d_x(&u), &v).unwrap().add(&c.mul(&u, &c.d_x(&v)).unwrap());
        assert!(lhs_x.sub(&rhs_x).norm() < 1e-11);
        let lhs_l = c.d_lambda(&uv).unwrap();
        let rhs_l = c
            .mul(&c.d_lambda(&u).unwrap(), &v)
            .unwrap()
            .add(&c.mul(&u, &c.d_lambda(&v).unwrap()).unwrap());
        assert!(lhs_l.sub(&rhs_l).norm() < 1e-11);
    }

    #[test]
    fn pairing_nondegeneracy_spot_check() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let u = c.random_element(&mut rng, -2, 2, 3, 1.0);
        // Some dual basis monomial must see u.
        let mut best: f64 = 0.0;
        for d in -3..=3 {
            for k in 0..=3usize {
                for f in [FourierField::cosine(k, 1.0), FourierField::sine(k, 1.0)] {
                    if f.is_zero() {
                        continue;
                    }
                    let b = LaurentElement::monomial(d, f);
                    best = best.max(c.pairing(&u, &b).unwrap().abs());
                }
            }
        }
        assert!(best > c.prune_tol);
    }
}
