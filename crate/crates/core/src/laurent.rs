//! Laurent polynomials in λ whose coefficients are [`FourierField`]s:
//! u(x,λ) = Σᵢ uᵢ(x)λⁱ with finitely many nonzero coefficients.
//!
//! Arithmetic that can grow the λ-support or the Fourier support lives on
//! [`crate::context::AlgebraContext`], which enforces the degree window and
//! mode cap. The raw ops here (add, scale, unchecked convolution) never
//! fail.

use crate::error::{Error, Result};
use crate::fourier::{FourierField, DEFAULT_PRUNE_TOL};
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaurentElement {
    coeffs: BTreeMap<i32, FourierField>,
}

impl LaurentElement {
    pub fn zero() -> Self {
        LaurentElement {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, FourierField::constant(1.0))
    }

    /// f(x)·λᵈ.
    pub fn monomial(degree: i32, field: FourierField) -> Self {
        let mut e = LaurentElement::zero();
        e.set_coeff(degree, field);
        e
    }

    /// λᵈ with constant coefficient c.
    pub fn const_monomial(degree: i32, c: f64) -> Self {
        Self::monomial(degree, FourierField::constant(c))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i32, FourierField)>) -> Self {
        let mut e = LaurentElement::zero();
        for (d, f) in pairs {
            e.set_coeff(d, e.coeff(d).add(&f));
        }
        e
    }

    pub fn coeff(&self, degree: i32) -> FourierField {
        self.coeffs.get(&degree).cloned().unwrap_or_default()
    }

    pub fn coeff_ref(&self, degree: i32) -> Option<&FourierField> {
        self.coeffs.get(&degree)
    }

    pub fn set_coeff(&mut self, degree: i32, field: FourierField) {
        if field.is_zero() {
            self.coeffs.remove(&degree);
        } else {
            self.coeffs.insert(degree, field);
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &FourierField)> {
        self.coeffs.iter().map(|(&d, f)| (d, f))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree_min(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree_max(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Largest Fourier mode over all coefficients.
    pub fn max_mode(&self) -> usize {
        self.coeffs.values().map(|f| f.max_mode()).max().unwrap_or(0)
    }

    pub fn prune(&mut self, tol: f64) {
        let degs: Vec<i32> = self.coeffs.keys().copied().collect();
        for d in degs {
            let f = self.coeffs.get_mut(&d).unwrap();
            f.prune(tol);
            if f.is_zero() {
                self.coeffs.remove(&d);
            }
        }
    }

    pub fn pruned(mut self, tol: f64) -> Self {
        self.prune(tol);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, f) in other.iter() {
            out.set_coeff(d, out.coeff(d).add(f));
        }
        out.pruned(DEFAULT_PRUNE_TOL)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = LaurentElement::zero();
        for (d, f) in self.iter() {
            out.set_coeff(d, f.scale(s));
        }
        out.pruned(DEFAULT_PRUNE_TOL)
    }

    /// Unchecked convolution product; support checks are the context's job.
    pub(crate) fn mul_raw(&self, other: &Self) -> Self {
        self.mul_raw_scaled(other, 1.0)
    }

    /// s·(self·other), accumulating each output degree in one dense buffer.
    pub(crate) fn mul_raw_scaled(&self, other: &Self, s: f64) -> Self {
        let (Some(alo), Some(ahi)) = (self.degree_min(), self.degree_max()) else {
            return LaurentElement::zero();
        };
        let (Some(blo), Some(bhi)) = (other.degree_min(), other.degree_max()) else {
            return LaurentElement::zero();
        };
        let lo = alo + blo;
        let n_out = (ahi + bhi - lo + 1) as usize;
        let ma = self.max_mode();
        let mb = other.max_mode();
        let mut bufs: Vec<Option<Vec<Complex64>>> = vec![None; n_out];
        for (da, fa) in self.iter() {
            for (db, fb) in other.iter() {
                let buf = bufs[(da + db - lo) as usize]
                    .get_or_insert_with(|| vec![Complex64::ZERO; ma + mb + 1]);
                fa.mul_acc(fb, s, buf);
            }
        }
        let mut out = LaurentElement::zero();
        for (i, buf) in bufs.into_iter().enumerate() {
            if let Some(b) = buf {
                out.set_coeff(lo + i as i32, FourierField::from_modes(b));
            }
        }
        out.pruned(DEFAULT_PRUNE_TOL)
    }

    /// ∂/∂λ: maps f·λᵈ to d·f·λᵈ⁻¹.
    pub(crate) fn d_lambda_raw(&self) -> Self {
        let mut out = LaurentElement::zero();
        for (d, f) in self.iter() {
            if d != 0 {
                out.set_coeff(d - 1, f.scale(d as f64));
            }
        }
        out
    }

    /// ∂/∂x on every coefficient.
    pub fn d_x(&self) -> Self {
        let mut out = LaurentElement::zero();
        for (d, f) in self.iter() {
            out.set_coeff(d, f.dx());
        }
        out.pruned(DEFAULT_PRUNE_TOL)
    }

    /// Keeps only degrees for which `keep` holds.
    pub fn filter_degrees(&self, keep: impl Fn(i32) -> bool) -> Self {
        let mut out = LaurentElement::zero();
        for (d, f) in self.iter() {
            if keep(d) {
                out.set_coeff(d, f.clone());
            }
        }
        out
    }

    /// √(Σ_d ‖u_d‖²_{L²}).
    pub fn norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|f| f.l2_norm_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// max_d sup_x |u_d(x)|.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|f| f.sup_norm())
            .fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / n)
        }
    }

    /// Structured-text serialization: one line per degree, records
    /// `(wavenumber, re, im)` for every stored mode (negative wavenumbers
    /// are written explicitly even though they are conjugates).
    pub fn to_text(&self) -> String {
        let mut s = String::from("laurent v1\n");
        for (d, f) in self.iter() {
            s.push_str(&format!("degree {d}:"));
            let kmax = f.max_mode() as i32;
            for k in -kmax..=kmax {
                let a = f.amp(k);
                if a.norm() > 0.0 {
                    s.push_str(&format!(" ({k}, {:.17e}, {:.17e})", a.re, a.im));
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("laurent v1") => {}
            _ => return Err(Error::Parse("missing 'laurent v1' header".into())),
        }
        let mut out = LaurentElement::zero();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix("degree ")
                .ok_or_else(|| Error::Parse(format!("bad line: {line}")))?;
            let (deg_str, records) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad line: {line}")))?;
            let degree: i32 = deg_str
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree: {deg_str}")))?;
            let mut modes: Vec<(i32, Complex64)> = Vec::new();
            for rec in records.split(')').map(str::trim).filter(|r| !r.is_empty()) {
                let rec = rec
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Parse(format!("bad record in: {line}")))?;
                let parts: Vec<&str> = rec.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad record in: {line}")));
                }
                let k: i32 = parts[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad wavenumber: {}", parts[0])))?;
                let re: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad re: {}", parts[1])))?;
                let im: f64 = parts[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad im: {}", parts[2])))?;
                modes.push((k, Complex64::new(re, im)));
            }
            let kmax = modes.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0) as usize;
            let mut amps = vec![Complex64::ZERO; kmax + 1];
            for (k, a) in &modes {
                if *k >= 0 {
                    amps[*k as usize] = *a;
                }
            }
            // Hermitian-symmetry check against the explicit negative modes.
            for (k, a) in &modes {
                if *k < 0 {
                    let expect = amps[k.unsigned_abs() as usize].conj();
                    if (expect - a).norm() > 1e-9 * (1.0 + a.norm()) {
                        return Err(Error::Parse(format!(
                            "mode {k} of degree {degree} breaks Hermitian symmetry"
                        )));
                    }
                }
            }
            out.set_coeff(degree, FourierField::from_modes(amps));
        }
        Ok(out)
    }

    /// Grid export: csv rows `x, u_{d_min}(x), ..., u_{d_max}(x)` over the
    /// stored degree range, N equispaced points.
    pub fn to_grid_csv(&self, n: usize) -> String {
        let degs: Vec<i32> = self.degrees().collect();
        let mut s = String::from("x");
        for d in &degs {
            s.push_str(&format!(",c[{d}]"));
        }
        s.push('\n');
        let grids: Vec<Vec<f64>> = degs.iter().map(|&d| self.coeff(d).eval_grid(n)).collect();
        for j in 0..n {
            s.push_str(&format!("{:.12e}", j as f64 / n as f64));
            for g in &grids {
                s.push_str(&format!(",{:.12e}", g[j]));
            }
            s.push('\n');
        }
        s
    }
}
