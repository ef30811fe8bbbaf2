//! The family of compatible Poisson brackets
//!
//!   {F,H}_(n)(L) = ½·(L, [R(Lⁿ⁺¹dF(L)), dH(L)] + [dF(L), R(Lⁿ⁺¹dH(L))]),
//!
//! its Hamiltonian vector fields, the power vector fields Vₘ(L) = Lᵐ⁺¹
//! that generate the tower by Lie derivatives, and defect computations for
//! every structural identity: Jacobi, pairwise compatibility, the Witt
//! commutation relations, involution of trace functionals, the product
//! morphism property of the n = 0 bracket, the inversion anti-morphism,
//! and commutation of Lax flows.
//!
//! The ½ rescale is applied uniformly so that the induced hydrodynamic
//! operators carry their standard normalization.
//!
//! Finite-difference probing note: probe evaluations happen at perturbed
//! points L ± t·b, whose powers contain O(t²) cross terms at degrees and
//! modes beyond the working caps. Those terms cancel exactly in centered
//! differences, so probe closures run under the truncating overflow policy
//! while all direct algebra stays strict. Window adequacy for the O(t)
//! terms is certified by comparing reconstructed gradients against closed
//! forms in the tests.

use crate::context::{AlgebraContext, BracketVariant};
use crate::error::Result;
use crate::fd;
use crate::functional::{Functional, GradSpan};
use crate::laurent::LaurentElement;

/// Degree-interval plus mode-count bookkeeping for sizing probe spans.
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: i32,
    hi: i32,
    modes: usize,
}

impl Span {
    fn of(e: &LaurentElement) -> Span {
        Span {
            lo: e.degree_min().unwrap_or(0),
            hi: e.degree_max().unwrap_or(0),
            modes: e.max_mode(),
        }
    }

    fn of_grad(span: GradSpan) -> Span {
        Span {
            lo: span.deg_lo,
            hi: span.deg_hi,
            modes: span.mode_max,
        }
    }

    fn mul(self, o: Span) -> Span {
        Span {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
            modes: self.modes + o.modes,
        }
    }

    /// Support of the k-th power, k ≥ 0.
    fn power(self, k: i32) -> Span {
        debug_assert!(k >= 0);
        Span {
            lo: self.lo * k,
            hi: self.hi * k,
            modes: self.modes * k as usize,
        }
    }

    fn bracket(self, o: Span, variant: BracketVariant) -> Span {
        let shift = match variant {
            BracketVariant::MinusOne => -1,
            BracketVariant::Zero => 0,
        };
        Span {
            lo: self.lo + o.lo + shift,
            hi: self.hi + o.hi + shift,
            modes: self.modes + o.modes,
        }
    }

    fn symmetrize(self) -> Span {
        let m = self.lo.abs().max(self.hi.abs());
        Span {
            lo: -m,
            hi: m,
            modes: self.modes,
        }
    }

    fn hull(self, o: Span) -> Span {
        Span {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
            modes: self.modes.max(o.modes),
        }
    }

    fn pad(self, degrees: i32, modes: usize) -> Span {
        Span {
            lo: self.lo - degrees,
            hi: self.hi + degrees,
            modes: self.modes + modes,
        }
    }

    fn as_grad_span(self) -> GradSpan {
        GradSpan::new(self.lo, self.hi, self.modes)
    }
}

#[derive(Debug, Clone)]
pub struct BracketTower {
    pub ctx: AlgebraContext,
    /// Truncation order used whenever an inverse power Lⁿ⁺¹, n+1 < 0, is
    /// needed (negative half of the tower).
    pub inv_order: usize,
}

impl BracketTower {
    pub fn new(ctx: AlgebraContext) -> Self {
        BracketTower { ctx, inv_order: 8 }
    }

    /// The uniform rescale applied to every bracket and Hamiltonian field.
    fn factor(&self) -> f64 {
        0.5
    }

    fn fd_ctx(&self) -> AlgebraContext {
        self.ctx.clone().truncating()
    }

    fn lambda_power(&self, ctx: &AlgebraContext, l: &LaurentElement, p: i32) -> Result<LaurentElement> {
        ctx.power_signed(l, p, self.inv_order)
    }

    /// {F,H}_(n)(L).
    pub fn bracket_n(
        &self,
        f: &Functional,
        h: &Functional,
        l: &LaurentElement,
        n: i32,
    ) -> Result<f64> {
        let x1 = f.grad(&self.ctx, l)?;
        let x2 = h.grad(&self.ctx, l)?;
        self.bracket_core(&self.ctx, l, &x1, &x2, n)
    }

    fn bracket_core(
        &self,
        ctx: &AlgebraContext,
        l: &LaurentElement,
        x1: &LaurentElement,
        x2: &LaurentElement,
        n: i32,
    ) -> Result<f64> {
        let lp = self.lambda_power(ctx, l, n + 1)?;
        let t1 = ctx.lie_bracket(&ctx.r_apply(&ctx.mul(&lp, x1)?), x2)?;
        let t2 = ctx.lie_bracket(x1, &ctx.r_apply(&ctx.mul(&lp, x2)?))?;
        Ok(self.factor() * (ctx.pairing(l, &t1)? + ctx.pairing(l, &t2)?))
    }

    /// Hamiltonian vector field of H in {·,·}_(n):
    /// X_H⁽ⁿ⁾(L) = ½([R(Lⁿ⁺¹dH), L] + Lⁿ⁺¹·R*([dH, L])), the unique field
    /// with (dF, X_H⁽ⁿ⁾) = {F,H}_(n) for all F.
    pub fn ham_field(&self, h: &Functional, l: &LaurentElement, n: i32) -> Result<LaurentElement> {
        let x2 = h.grad(&self.ctx, l)?;
        self.ham_field_from_grad(&x2, l, n)
    }

    pub fn ham_field_from_grad(
        &self,
        dh: &LaurentElement,
        l: &LaurentElement,
        n: i32,
    ) -> Result<LaurentElement> {
        let c = &self.ctx;
        let lp = self.lambda_power(c, l, n + 1)?;
        let a = c.lie_bracket(&c.r_apply(&c.mul(&lp, dh)?), l)?;
        let b = c.mul(&lp, &c.r_adjoint_apply(&c.lie_bracket(dh, l)?))?;
        Ok(a.add(&b).scale(self.factor()))
    }

    /// The two projection-split forms of the Hamiltonian field, for
    /// r-matrices of the form R = Π₊ − Π₋:
    ///   [Π₊(Lⁿ⁺¹dH), L] − Lⁿ⁺¹ Π₋*([dH, L])   and
    ///   Lⁿ⁺¹ Π₊*([dH, L]) − [Π₋(Lⁿ⁺¹dH), L].
    /// Their agreement with [`Self::ham_field`] is itself a test.
    pub fn ham_field_projection_forms(
        &self,
        h: &Functional,
        l: &LaurentElement,
        n: i32,
    ) -> Result<(LaurentElement, LaurentElement)> {
        let c = &self.ctx;
        let x2 = h.grad(c, l)?;
        let lp = self.lambda_power(c, l, n + 1)?;
        let lpx = c.mul(&lp, &x2)?;
        let br = c.lie_bracket(&x2, l)?;
        let plus = c.rmatrix.plus_space();
        let minus = c.rmatrix.minus_space();
        let form_plus = c
            .lie_bracket(&c.project(&lpx, plus), l)?
            .sub(&c.mul(&lp, &c.project_adjoint(&br, minus, c.bracket))?);
        let form_minus = c
            .mul(&lp, &c.project_adjoint(&br, plus, c.bracket))?
            .sub(&c.lie_bracket(&c.project(&lpx, minus), l)?);
        Ok((form_plus, form_minus))
    }

    /// Vₘ(L) = Lᵐ⁺¹.
    pub fn virasoro_field(&self, l: &LaurentElement, m: i32) -> Result<LaurentElement> {
        self.lambda_power(&self.ctx, l, m + 1)
    }

    /// ‖(dVₙ·Vₘ − dVₘ·Vₙ)(L) − (n−m)·Lᵐ⁺ⁿ⁺¹‖ with dVₙ(L)·W = (n+1)Lⁿ·W.
    /// Exact algebra; also cross-checks the multiplication routing.
    pub fn virasoro_commutator_defect(&self, m: i32, n: i32, l: &LaurentElement) -> Result<f64> {
        let c = &self.ctx;
        let commutator = if n >= 0 {
            c.mul(&self.lambda_power(c, l, n)?, &self.virasoro_field(l, m)?)?
                .scale((n + 1) as f64)
        } else {
            LaurentElement::zero()
        }
        .sub(&if m >= 0 {
            c.mul(&self.lambda_power(c, l, m)?, &self.virasoro_field(l, n)?)?
                .scale((m + 1) as f64)
        } else {
            LaurentElement::zero()
        });
        // n = m makes both sides vanish without needing L^{m+n+1} (which
        // would be an inverse power at m = n = −1).
        let target = if n == m {
            LaurentElement::zero()
        } else {
            self.lambda_power(c, l, m + n + 1)?.scale((n - m) as f64)
        };
        Ok(commutator.sub(&target).norm())
    }

    /// The inner bracket L ↦ {F,H}_(n)(L) as an eval-only functional whose
    /// gradient is reconstructed by finite differences. `l` only sizes the
    /// probe span.
    pub fn bracket_functional(
        &self,
        f: &Functional,
        h: &Functional,
        n: i32,
        l: &LaurentElement,
    ) -> Functional {
        let span = self.bracket_grad_span(f, h, n, l);
        let fd = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let (f2, h2) = (f.clone(), h.clone());
        Functional::composite(format!("bracket({n})"), span, move |u| {
            fd.bracket_n(&f2, &h2, u, n)
        })
    }

    /// Support bound for d{F,H}_(n) from the operand supports:
    /// the gradient is built from [R(Lⁿ⁺¹X₁), X₂] and X₁LⁿR*([X₂, L])
    /// pieces (plus 1 ↔ 2).
    fn bracket_grad_span(
        &self,
        f: &Functional,
        h: &Functional,
        n: i32,
        l: &LaurentElement,
    ) -> GradSpan {
        let ls = Span::of(l);
        let xf = Span::of_grad(f.grad_hint((ls.lo, ls.hi), ls.modes));
        let xh = Span::of_grad(h.grad_hint((ls.lo, ls.hi), ls.modes));
        let variant = self.ctx.bracket;
        let lp = ls.power(n + 1);
        let mut out = lp.mul(xf).bracket(xh, variant);
        out = out.hull(lp.mul(xh).bracket(xf, variant));
        if n >= 0 {
            let ln = ls.power(n);
            for (a, b) in [(xf, xh), (xh, xf)] {
                let mut inner = b.bracket(ls, variant);
                if matches!(variant, BracketVariant::Zero) {
                    inner = inner.symmetrize();
                }
                out = out.hull(a.mul(ln).mul(inner));
            }
        }
        out.pad(1, 1).as_grad_span()
    }

    /// Cyclic Jacobi sum {{F,G},H} + {{G,H},F} + {{H,F},G} at L, inner
    /// brackets as finite-difference composites. Relative to the largest
    /// cyclic term (the identity is homogeneous in the probe scales).
    pub fn jacobi_defect(
        &self,
        n: i32,
        f: &Functional,
        g: &Functional,
        h: &Functional,
        l: &LaurentElement,
    ) -> Result<f64> {
        let fg = self.bracket_functional(f, g, n, l);
        let gh = self.bracket_functional(g, h, n, l);
        let hf = self.bracket_functional(h, f, n, l);
        let b1 = self.bracket_n(&fg, h, l, n)?;
        let b2 = self.bracket_n(&gh, f, l, n)?;
        let b3 = self.bracket_n(&hf, g, l, n)?;
        // Relative to the magnitude of the competing terms.
        let scale = 1.0f64.max(b1.abs()).max(b2.abs()).max(b3.abs());
        Ok((b1 + b2 + b3).abs() / scale)
    }

    /// Jacobi defect of the sum bracket {·,·}_(m) + {·,·}_(n); together
    /// with the individual Jacobi defects this bounds the mixed cyclic
    /// terms, i.e. pairwise compatibility.
    pub fn compatibility_defect(
        &self,
        m: i32,
        n: i32,
        f: &Functional,
        g: &Functional,
        h: &Functional,
        l: &LaurentElement,
    ) -> Result<f64> {
        let sum_functional = |a: &Functional, b: &Functional| -> Functional {
            let span_m = self.bracket_grad_span(a, b, m, l);
            let span_n = self.bracket_grad_span(a, b, n, l);
            let span = Span::of_grad(span_m).hull(Span::of_grad(span_n)).as_grad_span();
            let fd = BracketTower {
                ctx: self.fd_ctx(),
                inv_order: self.inv_order,
            };
            let (a2, b2) = (a.clone(), b.clone());
            Functional::composite(format!("bracket({m})+bracket({n})"), span, move |u| {
                Ok(fd.bracket_n(&a2, &b2, u, m)? + fd.bracket_n(&a2, &b2, u, n)?)
            })
        };
        let fg = sum_functional(f, g);
        let gh = sum_functional(g, h);
        let hf = sum_functional(h, f);
        let sum_bracket = |a: &Functional, b: &Functional| -> Result<f64> {
            Ok(self.bracket_n(a, b, l, m)? + self.bracket_n(a, b, l, n)?)
        };
        let b1 = sum_bracket(&fg, h)?;
        let b2 = sum_bracket(&gh, f)?;
        let b3 = sum_bracket(&hf, g)?;
        let scale = 1.0f64.max(b1.abs()).max(b2.abs()).max(b3.abs());
        Ok((b1 + b2 + b3).abs() / scale)
    }

    /// The composite (VₘF)(L) = (dF(L), Lᵐ⁺¹) with finite-difference
    /// gradient.
    pub fn directional_composite(
        &self,
        f: &Functional,
        m: i32,
        l: &LaurentElement,
    ) -> Functional {
        let ls = Span::of(l);
        let fspan = Span::of_grad(f.grad_hint((ls.lo, ls.hi), ls.modes));
        // d(VₘF) = d²F(·)Lᵐ⁺¹ + (m+1)Lᵐ·dF sits inside dF-span + m·L-span.
        let shifted = Span {
            lo: fspan.lo + (m * ls.lo).min(m * ls.hi),
            hi: fspan.hi + (m * ls.lo).max(m * ls.hi),
            modes: fspan.modes + m.unsigned_abs() as usize * ls.modes,
        }
        .pad(1, 1);
        let ctx = self.fd_ctx();
        let f2 = f.clone();
        Functional::composite(
            format!("V_{m}∘grad"),
            shifted.as_grad_span(),
            move |u| {
                let g = f2.grad(&ctx, u)?;
                let lp = ctx.power(u, (m + 1) as u32)?;
                ctx.pairing(&g, &lp)
            },
        )
    }

    /// |Vₘ{F,H}_(n) − {VₘF,H}_(n) − {F,VₘH}_(n) − (n−m){F,H}_(m+n)| at L,
    /// relative to the largest term.
    pub fn lie_derivative_defect(
        &self,
        m: i32,
        n: i32,
        f: &Functional,
        h: &Functional,
        l: &LaurentElement,
    ) -> Result<f64> {
        let direction = self.virasoro_field(l, m)?;
        let fd_tower = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let (f2, h2) = (f.clone(), h.clone());
        let term1 = fd::dirderiv_scalar(
            move |u| fd_tower.bracket_n(&f2, &h2, u, n),
            l,
            &direction,
            self.ctx.fd_step,
        )?;
        let vmf = self.directional_composite(f, m, l);
        let vmh = self.directional_composite(h, m, l);
        let term2 = self.bracket_n(&vmf, h, l, n)? + self.bracket_n(f, &vmh, l, n)?;
        let term3 = if n == m {
            0.0
        } else {
            (n - m) as f64 * self.bracket_n(f, h, l, m + n)?
        };
        let scale = 1.0f64.max(term1.abs()).max(term2.abs()).max(term3.abs());
        Ok((term1 - term2 - term3).abs() / scale)
    }

    /// |{tr Lʲ/j, tr Lᵏ/k}_(n)(L)|; ad-invariant functionals must commute.
    pub fn involution_defect(&self, j: u32, k: u32, n: i32, l: &LaurentElement) -> Result<f64> {
        Ok(self
            .bracket_n(
                &Functional::trace_monomial(j),
                &Functional::trace_monomial(k),
                l,
                n,
            )?
            .abs())
    }

    /// |{F∘mul, H∘mul}₍₀₎(L₁,L₂) − {F,H}₍₀₎(L₁L₂)| where A×A carries the
    /// product structure and the partial gradients are
    /// d₁(F∘mul) = L₂·dF(L₁L₂), d₂(F∘mul) = L₁·dF(L₁L₂).
    pub fn multiplicativity_defect(
        &self,
        f: &Functional,
        h: &Functional,
        l1: &LaurentElement,
        l2: &LaurentElement,
    ) -> Result<f64> {
        let c = &self.ctx;
        let l = c.mul(l1, l2)?;
        let df = f.grad(c, &l)?;
        let dh = h.grad(c, &l)?;
        let mut product_side = 0.0;
        for (base, other) in [(l1, l2), (l2, l1)] {
            let x1 = c.mul(other, &df)?;
            let x2 = c.mul(other, &dh)?;
            product_side += self.bracket_core(c, base, &x1, &x2, 0)?;
        }
        let direct = self.bracket_core(c, &l, &df, &dh, 0)?;
        Ok((product_side - direct).abs())
    }

    /// {F,H}_(−n)(L) for n ≥ 2, the negative half of the tower on the
    /// invertible elements; Lⁿ⁺¹ goes through the truncated Neumann
    /// inverse of the given order.
    pub fn negative_bracket(
        &self,
        f: &Functional,
        h: &Functional,
        l: &LaurentElement,
        n: u32,
        order: usize,
    ) -> Result<f64> {
        assert!(n >= 2, "the negative half starts at n = 2");
        let tower = BracketTower {
            ctx: self.ctx.clone(),
            inv_order: order,
        };
        tower.bracket_n(f, h, l, -(n as i32))
    }

    /// |{F∘ι, H∘ι}_(n)(L) + {F,H}_(−n)(ι(L))| for the inversion map
    /// ι(L) = L⁻¹ (truncated to `order` λ-degrees).
    pub fn inversion_defect(
        &self,
        f: &Functional,
        h: &Functional,
        l: &LaurentElement,
        n: i32,
        order: usize,
    ) -> Result<f64> {
        let fi = Functional::InversionPullback(Box::new(f.clone()), order);
        let hi = Functional::InversionPullback(Box::new(h.clone()), order);
        let lhs = self.bracket_n(&fi, &hi, l, n)?;
        let linv = self.ctx.invert(l, order)?.inverse;
        let tower = BracketTower {
            ctx: self.ctx.clone(),
            inv_order: order,
        };
        let rhs = tower.bracket_n(f, h, &linv, -n)?;
        Ok((lhs + rhs).abs())
    }

    /// The Lax vector field X̃(L) = [R(Lᵏ), L] of the power map X(L) = Lᵏ.
    pub fn lax_field(&self, l: &LaurentElement, k: u32) -> Result<LaurentElement> {
        let c = &self.ctx;
        c.lie_bracket(&c.r_apply(&c.power(l, k)?), l)
    }

    /// `‖[X̃, Ỹ](L)‖` for X(L) = Lʲ, Y(L) = Lᵏ via finite-difference
    /// Jacobians of the two Lax fields, relative to the Jacobian-action
    /// magnitudes; must vanish.
    pub fn commuting_flows_defect(&self, j: u32, k: u32, l: &LaurentElement) -> Result<f64> {
        let fd_tower = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let xj = self.lax_field(l, j)?;
        let yk = self.lax_field(l, k)?;
        let t1 = fd::dirderiv_element(
            |u| fd_tower.lax_field(u, k),
            l,
            &xj,
            self.ctx.fd_step,
        )?;
        let t2 = fd::dirderiv_element(
            |u| fd_tower.lax_field(u, j),
            l,
            &yk,
            self.ctx.fd_step,
        )?;
        let scale = 1.0f64.max(t1.norm()).max(t2.norm());
        Ok(t1.sub(&t2).norm() / scale)
    }

    /// ‖(L_{Vₘ} Zₙ − n·Z_{m+n})(L)‖ for the basic Lax fields Zₙ = [R(Lⁿ), L],
    /// with dVₘ(L)·W = (m+1)Lᵐ·W in closed form.
    pub fn degree1_invariant_defect(&self, m: i32, n: u32, l: &LaurentElement) -> Result<f64> {
        let c = &self.ctx;
        let fd_tower = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let vm = self.virasoro_field(l, m)?;
        let zn = self.lax_field(l, n)?;
        let dz_vm = fd::dirderiv_element(|u| fd_tower.lax_field(u, n), l, &vm, c.fd_step)?;
        let dv_zn = if m >= 0 {
            c.mul(&self.lambda_power(c, l, m)?, &zn)?.scale((m + 1) as f64)
        } else {
            LaurentElement::zero()
        };
        let lie = dz_vm.sub(&dv_zn);
        // n + m stays ≥ 0 for the basic fields n ≥ 1, m ≥ −1.
        let target = self.lax_field(l, (n as i32 + m) as u32)?.scale(n as f64);
        let scale = 1.0f64.max(lie.norm()).max(target.norm());
        Ok(lie.sub(&target).norm() / scale)
    }

    /// ‖L²_{X̃} Vₙ(L)‖ for X(L) = Lᵏ: the power fields are degree-1
    /// invariants of every Lax flow.
    pub fn second_lie_derivative_defect(&self, k: u32, n: i32, l: &LaurentElement) -> Result<f64> {
        let c = &self.ctx;
        let fd_outer = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let fd_tower = fd_outer.clone();
        let h = 10.0 * c.fd_step;
        // G = L_X̃ Vₙ = dVₙ·X̃ − dX̃·Vₙ, with dVₙ in closed form.
        let lie_once = move |u: &LaurentElement| -> Result<LaurentElement> {
            let xf = fd_tower.lax_field(u, k)?;
            let dvn_x = if n >= 0 {
                fd_tower
                    .ctx
                    .mul(&fd_tower.lambda_power(&fd_tower.ctx, u, n)?, &xf)?
                    .scale((n + 1) as f64)
            } else {
                LaurentElement::zero()
            };
            let vn = fd_tower.lambda_power(&fd_tower.ctx, u, n + 1)?;
            let dx_vn = fd::dirderiv_element(|w| fd_tower.lax_field(w, k), u, &vn, h)?;
            Ok(dvn_x.sub(&dx_vn))
        };
        let g = lie_once(l)?;
        let xf = self.lax_field(l, k)?;
        let dg_x = fd::dirderiv_element(&lie_once, l, &xf, h)?;
        let dx_g = fd::dirderiv_element(|w| fd_outer.lax_field(w, k), l, &g, h)?;
        let scale = 1.0f64.max(dg_x.norm()).max(dx_g.norm());
        Ok(dg_x.sub(&dx_g).norm() / scale)
    }

    /// Defect of the linearization of {·,·}_(n) at the unit against the
    /// R-bracket: `d/dε {F_a,F_b}_(n)(1 + εE)|₀ = (E, [a,b]_R)`.
    pub fn linearization_defect(
        &self,
        a: &LaurentElement,
        b: &LaurentElement,
        e: &LaurentElement,
        n: i32,
    ) -> Result<f64> {
        let fd_tower = BracketTower {
            ctx: self.fd_ctx(),
            inv_order: self.inv_order,
        };
        let (fa, fb) = (Functional::linear(a.clone()), Functional::linear(b.clone()));
        let one = LaurentElement::one();
        let deriv = fd::dirderiv_scalar(
            move |u| fd_tower.bracket_n(&fa, &fb, u, n),
            &one,
            e,
            self.ctx.fd_step,
        )?;
        let want = self.ctx.pairing(e, &self.ctx.r_bracket(a, b)?)?;
        Ok((deriv - want).abs())
    }
}
