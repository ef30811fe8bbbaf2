//! Real-valued trigonometric polynomials on the unit circle S¹ = ℝ/ℤ,
//! stored as truncated complex Fourier modes.
//!
//! A field f is represented by its non-negative modes `amps[k] = f̂_k`;
//! negative modes are implied by Hermitian symmetry f̂_{-k} = conj(f̂_k),
//! so every stored field is real-valued by construction. The circle has
//! unit length and ∫ f dx is the zero mode.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Amplitudes below this are dropped when pruning.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierField {
    /// `amps[k]` is the mode `k >= 0` amplitude; `amps[0]` is real.
    amps: Vec<Complex64>,
}

impl FourierField {
    pub fn zero() -> Self {
        FourierField { amps: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        let mut f = FourierField {
            amps: vec![Complex64::new(c, 0.0)],
        };
        f.prune(DEFAULT_PRUNE_TOL);
        f
    }

    /// `a·cos(2πkx)` for `k > 0`; `a` itself for `k = 0`.
    pub fn cosine(k: usize, a: f64) -> Self {
        if k == 0 {
            return Self::constant(a);
        }
        let mut amps = vec![Complex64::ZERO; k + 1];
        amps[k] = Complex64::new(a / 2.0, 0.0);
        let mut f = FourierField { amps };
        f.prune(DEFAULT_PRUNE_TOL);
        f
    }

    /// `a·sin(2πkx)` for `k > 0`.
    pub fn sine(k: usize, a: f64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        let mut amps = vec![Complex64::ZERO; k + 1];
        // sin = (e^{iθ} - e^{-iθ})/(2i), so f̂_k = -i a/2.
        amps[k] = Complex64::new(0.0, -a / 2.0);
        let mut f = FourierField { amps };
        f.prune(DEFAULT_PRUNE_TOL);
        f
    }

    /// Builds a field from non-negative mode amplitudes. The imaginary part
    /// of mode 0 is discarded (Hermitian symmetry forces it to vanish).
    pub fn from_modes(mut amps: Vec<Complex64>) -> Self {
        if let Some(a0) = amps.first_mut() {
            a0.im = 0.0;
        }
        let mut f = FourierField { amps };
        f.prune(DEFAULT_PRUNE_TOL);
        f
    }

    /// Signed-mode accessor: `amp(-k) = conj(amp(k))`.
    pub fn amp(&self, k: i32) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.amps.get(idx) {
            None => Complex64::ZERO,
            Some(&a) => {
                if k < 0 {
                    a.conj()
                } else {
                    a
                }
            }
        }
    }

    /// Largest stored wavenumber (0 for the zero field).
    pub fn max_mode(&self) -> usize {
        self.amps.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.amp(0).re
    }

    pub fn prune(&mut self, tol: f64) {
        for a in &mut self.amps {
            if a.norm() <= tol {
                *a = Complex64::ZERO;
            }
        }
        while self.amps.last().is_some_and(|a| a.norm() <= tol) {
            self.amps.pop();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.amps.len().max(other.amps.len());
        let mut amps = vec![Complex64::ZERO; n];
        for (k, a) in amps.iter_mut().enumerate() {
            *a = self.amp(k as i32) + other.amp(k as i32);
        }
        Self::from_modes(amps)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_modes(self.amps.iter().map(|a| a * s).collect())
    }

    /// Exact convolution product; the support grows to the sum of supports.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut amps = vec![Complex64::ZERO; self.max_mode() + other.max_mode() + 1];
        self.mul_acc(other, 1.0, &mut amps);
        Self::from_modes(amps)
    }

    /// acc[k] += s·(self·other)_k for k ≥ 0; the accumulator must hold the
    /// full product support.
    pub(crate) fn mul_acc(&self, other: &Self, s: f64, acc: &mut [Complex64]) {
        if self.is_zero() || other.is_zero() {
            return;
        }
        let sa = self.max_mode() as i32;
        let sb = other.max_mode() as i32;
        debug_assert!(acc.len() > (sa + sb) as usize);
        for (k, out) in acc.iter_mut().enumerate().take((sa + sb) as usize + 1) {
            let k = k as i32;
            let mut sum = Complex64::ZERO;
            let lo = (k - sb).max(-sa);
            let hi = sa.min(k + sb);
            for j in lo..=hi {
                let a = if j < 0 {
                    self.amps[(-j) as usize].conj()
                } else {
                    self.amps[j as usize]
                };
                let b = if k - j < 0 {
                    other.amps[(j - k) as usize].conj()
                } else {
                    other.amps[(k - j) as usize]
                };
                sum += a * b;
            }
            *out += s * sum;
        }
    }

    /// Drops all modes above `cap`.
    pub fn truncate(&self, cap: usize) -> Self {
        if self.max_mode() <= cap {
            return self.clone();
        }
        Self::from_modes(self.amps[..=cap].to_vec())
    }

    /// Spectral derivative d/dx: mode k scales by 2πik.
    pub fn dx(&self) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::new(0.0, 2.0 * PI * k as f64))
            .collect();
        Self::from_modes(amps)
    }

    /// Antiderivative with the zero mode of the output set to 0.
    /// The caller is responsible for checking that `mean()` vanishes.
    pub fn dx_inv(&self) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k == 0 {
                    Complex64::ZERO
                } else {
                    a / Complex64::new(0.0, 2.0 * PI * k as f64)
                }
            })
            .collect();
        Self::from_modes(amps)
    }

    /// Values on the equispaced grid x_j = j/n.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (j, v) in out.iter_mut().enumerate() {
            let x = j as f64 / n as f64;
            let mut acc = self.amp(0).re;
            for k in 1..=self.max_mode() {
                let ph = 2.0 * PI * k as f64 * x;
                let a = self.amps[k];
                acc += 2.0 * (a.re * ph.cos() - a.im * ph.sin());
            }
            *v = acc;
        }
        out
    }

    pub fn eval_at(&self, x: f64) -> f64 {
        let mut acc = self.amp(0).re;
        for k in 1..=self.max_mode() {
            let ph = 2.0 * PI * k as f64 * x;
            let a = self.amps[k];
            acc += 2.0 * (a.re * ph.cos() - a.im * ph.sin());
        }
        acc
    }

    /// Direct DFT of grid samples at x_j = j/n, keeping modes `k <= kmax`.
    /// Exact when the sampled function is band-limited below (n-1)/2.
    pub fn from_grid(samples: &[f64], kmax: usize) -> Self {
        let n = samples.len();
        let kept = kmax.min(n.saturating_sub(1) / 2);
        let mut amps = vec![Complex64::ZERO; kept + 1];
        for (k, out) in amps.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (j, &s) in samples.iter().enumerate() {
                let ph = -2.0 * PI * (k * j) as f64 / n as f64;
                acc += s * Complex64::new(ph.cos(), ph.sin());
            }
            *out = acc / n as f64;
        }
        Self::from_modes(amps)
    }

    /// ∫ self·other dx, i.e. the zero mode of the product, without forming
    /// the convolution.
    pub fn product_mean(&self, other: &Self) -> f64 {
        let n = self.amps.len().min(other.amps.len());
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.amps[0].re * other.amps[0].re;
        for k in 1..n {
            // a_k · b_{-k} + a_{-k} · b_k = 2 Re(a_k · conj(b_k)).
            acc += 2.0 * (self.amps[k] * other.amps[k].conj()).re;
        }
        acc
    }

    /// L² norm on the unit circle (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut s = self.amp(0).norm_sqr();
        for a in self.amps.iter().skip(1) {
            s += 2.0 * a.norm_sqr();
        }
        s
    }

    /// Sup norm sampled on a grid fine enough for the stored band.
    pub fn sup_norm(&self) -> f64 {
        let n = (4 * self.max_mode() + 5).max(8);
        self.eval_grid(n)
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise reciprocal 1/f computed on a grid and re-transformed with
    /// modes up to `kmax`. Fails when |f| dips below `floor` on the grid.
    pub fn recip(&self, kmax: usize, floor: f64) -> Option<Self> {
        let n = 4 * (self.max_mode().max(kmax)) + 5;
        let vals = self.eval_grid(n);
        if vals.iter().any(|v| v.abs() < floor) {
            return None;
        }
        let inv: Vec<f64> = vals.iter().map(|v| 1.0 / v).collect();
        Some(Self::from_grid(&inv, kmax))
    }

    /// Random field with modes up to `kmax`, entries O(`amp`).
    pub fn random(rng: &mut impl rand::Rng, kmax: usize, amp: f64) -> Self {
        let mut amps = vec![Complex64::ZERO; kmax + 1];
        for (k, a) in amps.iter_mut().enumerate() {
            let re = rng.random_range(-amp..amp);
            let im = if k == 0 {
                0.0
            } else {
                rng.random_range(-amp..amp)
            };
            *a = Complex64::new(re, im);
        }
        Self::from_modes(amps)
    }
}
