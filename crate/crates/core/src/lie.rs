//! The two Poisson-algebra Lie brackets, the five direct-sum decompositions
//! with their projections, the associated r-matrices R = Π₊ − Π₋, and the
//! pairing adjoints R*.
//!
//! Adjoints are closed-form degree rules: the tr₋₁ pairing couples degree i
//! with −1−i, so the adjoint of a degree half-line is the reflected
//! half-line; the tr₀ pairing couples i with −i, and the adjoint of the
//! lower-triangular projection is the symmetrizer. Both rules are certified
//! against the defining identity (Ru, v) = (u, R*v) in the tests.

use crate::context::{AlgebraContext, BracketVariant, RMatrixKind};
use crate::error::Result;
use crate::laurent::LaurentElement;
use rand::Rng;

/// One side of a direct-sum decomposition of the Laurent algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceId {
    /// Degrees ≥ k.
    Ge(i32),
    /// Degrees ≤ k.
    Le(i32),
    /// Span of f(x)·(λⁱ − λ⁻ⁱ), i > 0.
    TodaK,
    /// Degrees ≤ 0.
    TodaL,
}

impl RMatrixKind {
    pub fn plus_space(&self) -> SubspaceId {
        match self {
            RMatrixKind::Benny | RMatrixKind::DmKp => SubspaceId::Ge(1),
            RMatrixKind::DKp => SubspaceId::Ge(0),
            RMatrixKind::DDym => SubspaceId::Ge(2),
            RMatrixKind::DToda => SubspaceId::TodaK,
        }
    }

    pub fn minus_space(&self) -> SubspaceId {
        match self {
            RMatrixKind::Benny | RMatrixKind::DmKp => SubspaceId::Le(0),
            RMatrixKind::DKp => SubspaceId::Le(-1),
            RMatrixKind::DDym => SubspaceId::Le(1),
            RMatrixKind::DToda => SubspaceId::TodaL,
        }
    }
}

impl AlgebraContext {
    /// Lie bracket in the requested variant:
    /// `[u,v]₋₁ = u_λ v_x − u_x v_λ` and `[u,v]₀ = λ·[u,v]₋₁`.
    pub fn lie_bracket_with(
        &self,
        u: &LaurentElement,
        v: &LaurentElement,
        variant: BracketVariant,
    ) -> Result<LaurentElement> {
        let ul = u.d_lambda_raw();
        let vl = v.d_lambda_raw();
        let core = ul.mul_raw(&v.d_x()).sub(&u.d_x().mul_raw(&vl));
        let out = match variant {
            BracketVariant::MinusOne => core,
            BracketVariant::Zero => LaurentElement::const_monomial(1, 1.0).mul_raw(&core),
        };
        self.admit(out)
    }

    /// Lie bracket in the context's variant.
    pub fn lie_bracket(&self, u: &LaurentElement, v: &LaurentElement) -> Result<LaurentElement> {
        self.lie_bracket_with(u, v, self.bracket)
    }

    /// Projection onto a subspace along its decomposition partner.
    ///
    /// For TodaK the decomposition v = k + l is solved degreewise: for
    /// i > 0, k_i = v_i and k_{-i} = -v_i; the l part keeps l_0 = v_0 and
    /// l_{-i} = v_{-i} + v_i.
    pub fn project(&self, u: &LaurentElement, s: SubspaceId) -> LaurentElement {
        match s {
            SubspaceId::Ge(k) => u.filter_degrees(|d| d >= k),
            SubspaceId::Le(k) => u.filter_degrees(|d| d <= k),
            SubspaceId::TodaK => {
                let mut out = LaurentElement::zero();
                for (d, f) in u.iter() {
                    if d > 0 {
                        out.set_coeff(d, out.coeff(d).add(f));
                        out.set_coeff(-d, out.coeff(-d).sub(f));
                    }
                }
                out.pruned(self.prune_tol)
            }
            SubspaceId::TodaL => u.sub(&self.project(u, SubspaceId::TodaK)),
        }
    }

    /// Adjoint projection under the pairing of the given bracket variant.
    pub fn project_adjoint(
        &self,
        u: &LaurentElement,
        s: SubspaceId,
        variant: BracketVariant,
    ) -> LaurentElement {
        match (variant, s) {
            // tr₋₁ couples degree i with −1−i.
            (BracketVariant::MinusOne, SubspaceId::Ge(k)) => u.filter_degrees(|d| d <= -1 - k),
            (BracketVariant::MinusOne, SubspaceId::Le(k)) => u.filter_degrees(|d| d >= -1 - k),
            // tr₀ couples degree i with −i. The adjoint of the l-projection
            // is the projection onto symmetric elements (v_i = v_{-i})
            // along strictly negative degrees.
            (BracketVariant::Zero, SubspaceId::TodaL) => {
                let mut out = LaurentElement::zero();
                out.set_coeff(0, u.coeff(0));
                for (d, f) in u.iter() {
                    if d > 0 {
                        out.set_coeff(d, f.clone());
                        out.set_coeff(-d, out.coeff(-d).add(f));
                    }
                }
                out.pruned(self.prune_tol)
            }
            (BracketVariant::Zero, SubspaceId::TodaK) => {
                u.sub(&self.project_adjoint(u, SubspaceId::TodaL, variant))
            }
            // Degree half-lines paired with tr₀ reflect through 0.
            (BracketVariant::Zero, SubspaceId::Ge(k)) => u.filter_degrees(|d| d <= -k),
            (BracketVariant::Zero, SubspaceId::Le(k)) => u.filter_degrees(|d| d >= -k),
            (BracketVariant::MinusOne, SubspaceId::TodaK | SubspaceId::TodaL) => {
                unreachable!("toda decomposition pairs with the tr₀ trace")
            }
        }
    }

    /// R = Π₊ − Π₋ for the context's decomposition.
    pub fn r_apply(&self, u: &LaurentElement) -> LaurentElement {
        self.project(u, self.rmatrix.plus_space())
            .sub(&self.project(u, self.rmatrix.minus_space()))
    }

    /// R* with (Ru, v) = (u, R*v) for the context's pairing.
    pub fn r_adjoint_apply(&self, u: &LaurentElement) -> LaurentElement {
        let variant = self.bracket;
        self.project_adjoint(u, self.rmatrix.plus_space(), variant)
            .sub(&self.project_adjoint(u, self.rmatrix.minus_space(), variant))
    }

    /// R-bracket ½([RX, Y] + [X, RY]).
    pub fn r_bracket(&self, x: &LaurentElement, y: &LaurentElement) -> Result<LaurentElement> {
        let a = self.lie_bracket(&self.r_apply(x), y)?;
        let b = self.lie_bracket(x, &self.r_apply(y))?;
        Ok(a.add(&b).scale(0.5))
    }

    /// Max over random pairs drawn from the subspace of the relative norm
    /// of the bracket component that escapes the subspace. ≈0 certifies
    /// that the subspace is a Lie subalgebra; one bad pair refutes it.
    pub fn subalgebra_closure_defect(
        &self,
        s: SubspaceId,
        variant: BracketVariant,
        rng: &mut impl Rng,
        pairs: usize,
    ) -> Result<f64> {
        let complement = |u: &LaurentElement| -> LaurentElement {
            match s {
                SubspaceId::Ge(k) => u.filter_degrees(|d| d < k),
                SubspaceId::Le(k) => u.filter_degrees(|d| d > k),
                SubspaceId::TodaK => self.project(u, SubspaceId::TodaL),
                SubspaceId::TodaL => self.project(u, SubspaceId::TodaK),
            }
        };
        let mut worst: f64 = 0.0;
        // Sample inside the window with room for the bracket's support.
        let lo = (self.degree_min + 2).div_euclid(2);
        let hi = self.degree_max.div_euclid(2);
        for _ in 0..pairs {
            let raw_u = self.random_element(rng, lo, hi, 2, 1.0);
            let raw_v = self.random_element(rng, lo, hi, 2, 1.0);
            let u = self.project(&raw_u, s);
            let v = self.project(&raw_v, s);
            if u.is_zero() || v.is_zero() {
                continue;
            }
            let br = self.lie_bracket_with(&u, &v, variant)?;
            let defect = complement(&br).norm() / (u.norm() * v.norm());
            worst = worst.max(defect);
        }
        Ok(worst)
    }
}
