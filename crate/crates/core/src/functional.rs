//! Scalar functionals F on the Laurent algebra carrying a value rule and a
//! gradient rule dF, defined by F(L + tE)'|₀ = (dF(L), E).
//!
//! Linear and trace-monomial functionals have closed-form gradients.
//! Composite functionals (inner brackets, directional compositions) carry
//! only an evaluation closure; their gradient is reconstructed mode by mode
//! from centered finite differences against a probe basis, which is what
//! makes the tower checks independent of the bracket implementation.

use crate::context::{AlgebraContext, BracketVariant};
use crate::error::{Error, Result};
use crate::fd;
use crate::fourier::FourierField;
use crate::laurent::LaurentElement;
use num_complex::Complex64;
use std::sync::Arc;

/// Where a finite-difference gradient may live: λ-degrees [deg_lo, deg_hi]
/// and Fourier modes up to mode_max. Must contain the support of the true
/// gradient; [`check_gradient_consistency`] catches an undersized span.
#[derive(Debug, Clone, Copy)]
pub struct GradSpan {
    pub deg_lo: i32,
    pub deg_hi: i32,
    pub mode_max: usize,
}

impl GradSpan {
    pub fn new(deg_lo: i32, deg_hi: i32, mode_max: usize) -> Self {
        GradSpan {
            deg_lo,
            deg_hi,
            mode_max,
        }
    }
}

pub type EvalFn = Arc<dyn Fn(&LaurentElement) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Functional {
    /// F(L) = (a, L), dF = a.
    Linear(LaurentElement),
    /// F(L) = tr(Lᵏ)/k, dF = Lᵏ⁻¹ (ad-invariant).
    TraceMonomial(u32),
    /// c·F.
    Scaled(f64, Box<Functional>),
    /// Eval-only functional with finite-difference gradient.
    Composite {
        label: String,
        eval: EvalFn,
        span: GradSpan,
    },
    /// F∘ι with ι(L) = L⁻¹ (truncated to `order` λ-degrees);
    /// d(F∘ι)(L) = −L⁻² dF(L⁻¹).
    InversionPullback(Box<Functional>, usize),
}

impl std::fmt::Debug for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Functional::Linear(a) => write!(f, "Linear(deg {:?}..{:?})", a.degree_min(), a.degree_max()),
            Functional::TraceMonomial(k) => write!(f, "TraceMonomial({k})"),
            Functional::Scaled(c, inner) => write!(f, "Scaled({c}, {inner:?})"),
            Functional::Composite { label, .. } => write!(f, "Composite({label})"),
            Functional::InversionPullback(inner, order) => {
                write!(f, "InversionPullback({inner:?}, order {order})")
            }
        }
    }
}

impl Functional {
    pub fn linear(a: LaurentElement) -> Self {
        Functional::Linear(a)
    }

    pub fn trace_monomial(k: u32) -> Self {
        assert!(k >= 1, "trace monomial needs k >= 1");
        Functional::TraceMonomial(k)
    }

    pub fn scaled(c: f64, f: Functional) -> Self {
        Functional::Scaled(c, Box::new(f))
    }

    /// Extracts the real or imaginary part of one Fourier mode of one
    /// λ-coefficient. These are linear, so the gradient is the dual symbol
    /// under the context pairing.
    pub fn coordinate(
        ctx: &AlgebraContext,
        degree: i32,
        wavenumber: usize,
        imaginary: bool,
    ) -> Self {
        let dual_degree = match ctx.bracket {
            BracketVariant::MinusOne => -1 - degree,
            BracketVariant::Zero => -degree,
        };
        // ∫ L_d cos(2πkx) dx = Re L̂_{d,k}; −∫ L_d sin(2πkx) dx = Im L̂_{d,k}.
        let field = if imaginary {
            FourierField::sine(wavenumber, -1.0)
        } else if wavenumber == 0 {
            FourierField::constant(1.0)
        } else {
            FourierField::cosine(wavenumber, 1.0)
        };
        Functional::Linear(LaurentElement::monomial(dual_degree, field))
    }

    pub fn composite(
        label: impl Into<String>,
        span: GradSpan,
        eval: impl Fn(&LaurentElement) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Functional::Composite {
            label: label.into(),
            eval: Arc::new(eval),
            span,
        }
    }

    pub fn eval(&self, ctx: &AlgebraContext, l: &LaurentElement) -> Result<f64> {
        match self {
            Functional::Linear(a) => ctx.pairing(a, l),
            Functional::TraceMonomial(k) => Ok(ctx.trace(&ctx.power(l, *k)?) / *k as f64),
            Functional::Scaled(c, f) => Ok(c * f.eval(ctx, l)?),
            Functional::Composite { eval, .. } => eval(l),
            Functional::InversionPullback(f, order) => {
                let inv = ctx.invert(l, *order)?.inverse;
                f.eval(ctx, &inv)
            }
        }
    }

    pub fn grad(&self, ctx: &AlgebraContext, l: &LaurentElement) -> Result<LaurentElement> {
        match self {
            Functional::Linear(a) => Ok(a.clone()),
            Functional::TraceMonomial(k) => ctx.power(l, *k - 1),
            Functional::Scaled(c, f) => Ok(f.grad(ctx, l)?.scale(*c)),
            Functional::Composite { eval, span, .. } => {
                fd_gradient(ctx, |u| eval(u), l, *span)
            }
            Functional::InversionPullback(f, order) => {
                let inv = ctx.invert(l, *order)?.inverse;
                let inner = f.grad(ctx, &inv)?;
                let inv_sq = ctx.mul(&inv, &inv)?;
                Ok(ctx.mul(&inv_sq, &inner)?.scale(-1.0))
            }
        }
    }

    /// Conservative bound on where the gradient lives, given the degree
    /// range and mode support of the base point. Used to size probe spans
    /// for composites built on this functional.
    pub fn grad_hint(&self, l_degs: (i32, i32), l_modes: usize) -> GradSpan {
        match self {
            Functional::Linear(a) => GradSpan::new(
                a.degree_min().unwrap_or(0),
                a.degree_max().unwrap_or(0),
                a.max_mode(),
            ),
            Functional::TraceMonomial(k) => {
                let p = (*k as i32) - 1;
                GradSpan::new(p * l_degs.0, p * l_degs.1, (*k as usize - 1) * l_modes)
            }
            Functional::Scaled(_, f) => f.grad_hint(l_degs, l_modes),
            Functional::Composite { span, .. } => *span,
            Functional::InversionPullback(f, order) => {
                // L⁻¹ occupies [−d − order + 1, −d] with d the top degree.
                let inv_lo = -l_degs.1 - (*order as i32) + 1;
                let inv_hi = -l_degs.1.min(l_degs.0.abs());
                let inner = f.grad_hint((inv_lo, inv_hi), l_modes * *order);
                GradSpan::new(
                    2 * inv_lo + inner.deg_lo,
                    2 * inv_hi + inner.deg_hi,
                    inner.mode_max + 2 * l_modes * *order,
                )
            }
        }
    }
}

/// Reconstructs dF(L) mode by mode from directional derivatives along the
/// probe basis λᵈ·{1, cos 2πkx, sin 2πkx}. The pairing couples probe degree
/// d with gradient degree −1−d (tr₋₁) or −d (tr₀), so each probe direction
/// reads off exactly one gradient amplitude.
pub fn fd_gradient(
    ctx: &AlgebraContext,
    eval: impl Fn(&LaurentElement) -> Result<f64>,
    l: &LaurentElement,
    span: GradSpan,
) -> Result<LaurentElement> {
    let h = ctx.fd_step;
    let mut grad = LaurentElement::zero();
    for grad_deg in span.deg_lo..=span.deg_hi {
        let probe_deg = match ctx.bracket {
            BracketVariant::MinusOne => -1 - grad_deg,
            BracketVariant::Zero => -grad_deg,
        };
        let mut amps = vec![Complex64::ZERO; span.mode_max + 1];
        for (k, amp) in amps.iter_mut().enumerate() {
            let dir_cos = LaurentElement::monomial(
                probe_deg,
                if k == 0 {
                    FourierField::constant(1.0)
                } else {
                    FourierField::cosine(k, 1.0)
                },
            );
            let re = fd::dirderiv_scalar(&eval, l, &dir_cos, h)?;
            let im = if k == 0 {
                0.0
            } else {
                let dir_sin = LaurentElement::monomial(probe_deg, FourierField::sine(k, 1.0));
                -fd::dirderiv_scalar(&eval, l, &dir_sin, h)?
            };
            *amp = Complex64::new(re, im);
        }
        grad.set_coeff(grad_deg, FourierField::from_modes(amps).truncate(span.mode_max));
    }
    grad.prune(1e-13);
    Ok(grad)
}

/// Asserts that a gradient reproduces the finite-difference derivative of
/// the evaluation along a handful of random directions. Guards against a
/// probe span that is too small for the functional at hand.
pub fn check_gradient_consistency(
    ctx: &AlgebraContext,
    f: &Functional,
    l: &LaurentElement,
    rng: &mut impl rand::Rng,
    tol: f64,
) -> Result<f64> {
    let g = f.grad(ctx, l)?;
    // Probe evaluations run under the truncating policy: the perturbation-
    // quadratic overspill cancels in the centered difference.
    let fd_ctx = ctx.clone().truncating();
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let dir = ctx.random_element(rng, -2, 2, 2, 1.0);
        let fd_val = fd::dirderiv_scalar(|u| f.eval(&fd_ctx, u), l, &dir, ctx.fd_step)?;
        let exact = ctx.pairing(&g, &dir)?;
        let scale = 1.0f64.max(exact.abs());
        worst = worst.max((fd_val - exact).abs() / scale);
    }
    if worst > tol {
        return Err(Error::Config(format!(
            "gradient of {f:?} inconsistent with finite differences: {worst:.3e} > {tol:.1e}"
        )));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RMatrixKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn benny_ctx() -> AlgebraContext {
        AlgebraContext::new(RMatrixKind::Benny).with_window(-14, 8)
    }

    #[test]
    fn linear_functional_gradient_is_its_symbol() {
        let c = benny_ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = c.random_element(&mut rng, -2, 1, 2, 1.0);
        let f = Functional::linear(a.clone());
        let l = c.random_element(&mut rng, -1, 1, 2, 1.0);
        assert!(f.grad(&c, &l).unwrap().sub(&a).norm() < 1e-14);
        check_gradient_consistency(&c, &f, &l, &mut rng, 1e-8).unwrap();
    }

    #[test]
    fn trace_monomial_gradient_and_ad_invariance() {
        let c = benny_ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = c.random_element(&mut rng, -1, 1, 2, 0.8);
        let f = Functional::trace_monomial(3);
        let g = f.grad(&c, &l).unwrap();
        assert!(g.sub(&c.power(&l, 2).unwrap()).norm() < 1e-13);
        // [dF(L), L] = 0.
        assert!(c.lie_bracket(&g, &l).unwrap().norm() < 1e-11);
        check_gradient_consistency(&c, &f, &l, &mut rng, 1e-6).unwrap();
    }

    #[test]
    fn coordinate_functional_extracts_modes() {
        let c = benny_ctx();
        let l = LaurentElement::from_pairs([
            (0, FourierField::cosine(2, 0.8).add(&FourierField::sine(2, -0.3))),
        ]);
        let re = Functional::coordinate(&c, 0, 2, false);
        let im = Functional::coordinate(&c, 0, 2, true);
        // cos(2·2πx)·0.8 − 0.3·sin(2·2πx) has mode-2 amplitude 0.4 + 0.15i.
        assert!((re.eval(&c, &l).unwrap() - 0.4).abs() < 1e-13);
        assert!((im.eval(&c, &l).unwrap() - 0.15).abs() < 1e-13);
    }

    #[test]
    fn composite_fd_gradient_matches_closed_form() {
        let c = benny_ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = c.random_element(&mut rng, -1, 1, 1, 0.6);
        // F(L) = tr(L³)/3 as an opaque closure; dF = L².
        let ctx2 = c.clone();
        let f = Functional::composite(
            "tr L^3 / 3",
            GradSpan {
                deg_lo: -3,
                deg_hi: 3,
                mode_max: 4,
            },
            move |u| Ok(ctx2.trace(&ctx2.power(u, 3)?) / 3.0),
        );
        let g = f.grad(&c, &l).unwrap();
        let want = c.power(&l, 2).unwrap();
        assert!(
            g.sub(&want).norm() < 1e-7,
            "fd gradient error {}",
            g.sub(&want).norm()
        );
    }

    #[test]
    fn composite_gradient_in_zero_variant() {
        let c = AlgebraContext::new(RMatrixKind::DToda).with_window(-14, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = c.random_element(&mut rng, -1, 1, 1, 0.6);
        let ctx2 = c.clone();
        let f = Functional::composite(
            "tr L^2 / 2",
            GradSpan {
                deg_lo: -2,
                deg_hi: 2,
                mode_max: 3,
            },
            move |u| Ok(ctx2.trace(&ctx2.power(u, 2)?) / 2.0),
        );
        let g = f.grad(&c, &l).unwrap();
        assert!(g.sub(&l).norm() < 1e-8);
    }
}
