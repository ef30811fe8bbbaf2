//! Centered finite differences with one Richardson extrapolation, used as
//! the independent oracle for every directional and Lie derivative.
//!
//! Directions are unit-normalized before stepping; the returned derivative
//! is rescaled by the original direction norm.

use crate::error::Result;
use crate::laurent::LaurentElement;

/// d/dt f(L + t·e) at t = 0 for scalar-valued f.
pub fn dirderiv_scalar(
    f: impl Fn(&LaurentElement) -> Result<f64>,
    l: &LaurentElement,
    dir: &LaurentElement,
    h: f64,
) -> Result<f64> {
    let scale = dir.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let e = dir.scale(1.0 / scale);
    let centered = |h: f64| -> Result<f64> {
        let fp = f(&l.add(&e.scale(h)))?;
        let fm = f(&l.sub(&e.scale(h)))?;
        Ok((fp - fm) / (2.0 * h))
    };
    let d1 = centered(h)?;
    let d2 = centered(h / 2.0)?;
    Ok(scale * (4.0 * d2 - d1) / 3.0)
}

/// d/dt F(L + t·e) at t = 0 for element-valued maps (finite-difference
/// Jacobian action).
pub fn dirderiv_element(
    f: impl Fn(&LaurentElement) -> Result<LaurentElement>,
    l: &LaurentElement,
    dir: &LaurentElement,
    h: f64,
) -> Result<LaurentElement> {
    let scale = dir.norm();
    if scale == 0.0 {
        return Ok(LaurentElement::zero());
    }
    let e = dir.scale(1.0 / scale);
    let centered = |h: f64| -> Result<LaurentElement> {
        let fp = f(&l.add(&e.scale(h)))?;
        let fm = f(&l.sub(&e.scale(h)))?;
        Ok(fp.sub(&fm).scale(1.0 / (2.0 * h)))
    };
    let d1 = centered(h)?;
    let d2 = centered(h / 2.0)?;
    Ok(d2.scale(4.0 / 3.0).sub(&d1.scale(1.0 / 3.0)).scale(scale))
}
