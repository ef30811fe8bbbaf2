//! The five concrete Lax hierarchies: Benny, dispersionless Toda,
//! dispersionless KP, dispersionless modified KP, and dispersionless Dym.
//!
//! Each hierarchy is a manifold pattern (which λ-degrees are free, fixed,
//! or tied) inside its algebra, together with the flows
//! L̇ = [Π₊(Lᵐ), L] = −[Π₋(Lᵐ), L]. Both sides are always computed; their
//! mismatch is a defect (exactly zero in exact arithmetic, a reported
//! truncation artifact for the infinite-tail patterns).
//!
//! Time evolution is classical RK4 on Fourier modes under the Galerkin
//! (truncating) policy, with spectral blow-up detection: quasi-linear
//! systems form shocks, and the integrator stops rather than alias.

use crate::context::{AlgebraContext, RMatrixKind};
use crate::error::{Error, Result};
use crate::fourier::FourierField;
use crate::functional::Functional;
use crate::laurent::LaurentElement;
use crate::tower::BracketTower;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyName {
    Benny,
    DToda,
    DKp,
    DmKp,
    DDym,
}

impl HierarchyName {
    pub const ALL: [HierarchyName; 5] = [
        HierarchyName::Benny,
        HierarchyName::DToda,
        HierarchyName::DKp,
        HierarchyName::DmKp,
        HierarchyName::DDym,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HierarchyName::Benny => "benny",
            HierarchyName::DToda => "dtoda",
            HierarchyName::DKp => "dkp",
            HierarchyName::DmKp => "dmkp",
            HierarchyName::DDym => "ddym",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "benny" => Ok(HierarchyName::Benny),
            "dtoda" => Ok(HierarchyName::DToda),
            "dkp" => Ok(HierarchyName::DKp),
            "dmkp" => Ok(HierarchyName::DmKp),
            "ddym" => Ok(HierarchyName::DDym),
            other => Err(Error::Config(format!("unknown hierarchy '{other}'"))),
        }
    }

    pub fn rmatrix(&self) -> RMatrixKind {
        match self {
            HierarchyName::Benny => RMatrixKind::Benny,
            HierarchyName::DToda => RMatrixKind::DToda,
            HierarchyName::DKp => RMatrixKind::DKp,
            HierarchyName::DmKp => RMatrixKind::DmKp,
            HierarchyName::DDym => RMatrixKind::DDym,
        }
    }
}

/// A hierarchy with its desk-scale caps. `tail_depth` is the lowest kept
/// λ-degree for the infinite-tail patterns (dKP, dmKP, dDym).
#[derive(Debug, Clone)]
pub struct HierarchySpec {
    pub name: HierarchyName,
    pub mode_cap: usize,
    pub tail_depth: i32,
}

/// Field coordinates of a state on the manifold pattern, one Fourier field
/// per pattern component, plus the current time.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub fields: Vec<FourierField>,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct LaxRhs {
    pub rhs: LaurentElement,
    /// ‖[Π₊(Lᵐ),L] + [Π₋(Lᵐ),L]‖: zero in exact arithmetic, a reported
    /// truncation defect otherwise.
    pub split_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
    /// tr(Lᵏ)/k for k = 1..=kmax at each sample.
    pub traces: Vec<Vec<f64>>,
    /// Hierarchy-specific Casimirs at each sample.
    pub casimirs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub flow_m: u32,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    pub trace_kmax: u32,
    pub blowup_sup: f64,
    pub tail_energy_frac: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            flow_m: 2,
            dt: 1e-3,
            t_final: 0.5,
            sample_every: 50,
            trace_kmax: 5,
            blowup_sup: 1e3,
            tail_energy_frac: 0.01,
        }
    }
}

/// Report of the Poisson-submanifold probe for one bracket index n.
#[derive(Debug, Clone)]
pub struct SubmanifoldReport {
    pub n: i32,
    /// Max over probes of ‖transverse part‖ / ‖X_H‖.
    pub defect: f64,
    /// Degrees carrying a non-negligible transverse component.
    pub leak_degrees: Vec<i32>,
    /// For the tied Toda pattern: ‖X₁ − X₋₁‖ relative.
    pub tie_defect: f64,
}

impl HierarchySpec {
    pub fn new(name: HierarchyName) -> Self {
        HierarchySpec {
            name,
            mode_cap: 16,
            tail_depth: -8,
        }
    }

    pub fn with_mode_cap(mut self, cap: usize) -> Self {
        self.mode_cap = cap;
        self
    }

    pub fn with_tail_depth(mut self, depth: i32) -> Self {
        self.tail_depth = depth;
        self
    }

    /// Strict context sized for this hierarchy's flows (m ≤ 3 on states
    /// that conform to the pattern).
    pub fn context(&self) -> AlgebraContext {
        let (lo, hi) = match self.name {
            HierarchyName::Benny => (-12, 6),
            HierarchyName::DToda => (-12, 12),
            HierarchyName::DKp | HierarchyName::DmKp | HierarchyName::DDym => {
                (4 * self.tail_depth - 8, 8)
            }
        };
        AlgebraContext::with_caps(self.name.rmatrix(), self.mode_cap, lo, hi)
    }

    /// The λ-degrees of the free field components, in storage order.
    pub fn component_degrees(&self) -> Vec<i32> {
        match self.name {
            HierarchyName::Benny => vec![0, -1],
            HierarchyName::DToda => vec![0, 1],
            HierarchyName::DKp | HierarchyName::DmKp => (self.tail_depth..=0).rev().collect(),
            HierarchyName::DDym => (self.tail_depth..=1).rev().collect(),
        }
    }

    /// Human-readable component names (used in CSV headers).
    pub fn component_names(&self) -> Vec<String> {
        self.component_degrees()
            .iter()
            .map(|d| format!("u[{d}]"))
            .collect()
    }

    pub fn state(&self, fields: Vec<FourierField>) -> Result<FieldState> {
        if fields.len() != self.component_degrees().len() {
            return Err(Error::Config(format!(
                "{} expects {} field components, got {}",
                self.name.name(),
                self.component_degrees().len(),
                fields.len()
            )));
        }
        Ok(FieldState { fields, time: 0.0 })
    }

    /// Embeds a state into the Laurent algebra according to the pattern.
    pub fn to_element(&self, state: &FieldState) -> LaurentElement {
        let mut l = LaurentElement::zero();
        match self.name {
            HierarchyName::Benny | HierarchyName::DKp | HierarchyName::DmKp => {
                l.set_coeff(1, FourierField::constant(1.0));
                for (d, f) in self.component_degrees().iter().zip(&state.fields) {
                    l.set_coeff(*d, f.clone());
                }
            }
            HierarchyName::DDym => {
                for (d, f) in self.component_degrees().iter().zip(&state.fields) {
                    l.set_coeff(*d, f.clone());
                }
            }
            HierarchyName::DToda => {
                l.set_coeff(0, state.fields[0].clone());
                l.set_coeff(1, state.fields[1].clone());
                l.set_coeff(-1, state.fields[1].clone());
            }
        }
        l
    }

    /// Extracts pattern coordinates of a tangent element, verifying that
    /// the transverse part is below `tol` (relative to the element norm).
    pub fn tangent_coords(&self, rhs: &LaurentElement, tol: f64) -> Result<Vec<FourierField>> {
        let scale = rhs.norm().max(1.0);
        let degs = self.component_degrees();
        let fields: Vec<FourierField> = match self.name {
            HierarchyName::DToda => {
                let tie = rhs.coeff(1).sub(&rhs.coeff(-1)).l2_norm();
                if tie > tol * scale {
                    return Err(Error::TangencyViolation(format!(
                        "tied λ±1 coefficients differ by {tie:.3e}"
                    )));
                }
                vec![rhs.coeff(0), rhs.coeff(1)]
            }
            _ => degs.iter().map(|&d| rhs.coeff(d)).collect(),
        };
        let mut transverse = rhs.clone();
        for &d in &degs {
            transverse.set_coeff(d, FourierField::zero());
        }
        if matches!(self.name, HierarchyName::DToda) {
            transverse.set_coeff(-1, FourierField::zero());
        }
        // For the infinite-tail patterns everything below the kept tail is
        // still tangent to the (untruncated) manifold.
        if matches!(
            self.name,
            HierarchyName::DKp | HierarchyName::DmKp | HierarchyName::DDym
        ) {
            transverse = transverse.filter_degrees(|d| d > self.tail_depth);
        }
        let t = transverse.norm();
        if t > tol * scale {
            return Err(Error::TangencyViolation(format!(
                "transverse norm {t:.3e} at degrees {:?}",
                transverse.degrees().collect::<Vec<_>>()
            )));
        }
        Ok(fields)
    }

    /// Degrees a tangent element may occupy (used to classify leaks).
    fn is_tangent_degree(&self, d: i32) -> bool {
        match self.name {
            HierarchyName::Benny => d == 0 || d == -1,
            HierarchyName::DToda => d.abs() <= 1,
            HierarchyName::DKp | HierarchyName::DmKp => d <= 0,
            HierarchyName::DDym => d <= 1,
        }
    }

    /// Random conforming state; amplitudes O(`amp`), modes ≤ `kmax`.
    pub fn random_state(&self, rng: &mut impl Rng, kmax: usize, amp: f64) -> FieldState {
        let fields = self
            .component_degrees()
            .iter()
            .map(|&d| {
                let base = FourierField::random(rng, kmax, amp);
                // dToda positivity chart and invertible leading parts.
                if (matches!(self.name, HierarchyName::DToda) && d == 1)
                    || (matches!(self.name, HierarchyName::DDym) && d == 1)
                {
                    FourierField::constant(1.0).add(&base)
                } else {
                    base
                }
            })
            .collect();
        FieldState { fields, time: 0.0 }
    }

    /// L̇ = [Π₊(Lᵐ), L]; the minus-projection route −[Π₋(Lᵐ), L] is
    /// computed as well and the mismatch reported.
    pub fn lax_rhs(&self, ctx: &AlgebraContext, l: &LaurentElement, m: u32) -> Result<LaxRhs> {
        let p = ctx.power(l, m)?;
        let kind = self.name.rmatrix();
        let plus = ctx.lie_bracket(&ctx.project(&p, kind.plus_space()), l)?;
        let minus = ctx
            .lie_bracket(&ctx.project(&p, kind.minus_space()), l)?
            .scale(-1.0);
        let split_defect = plus.sub(&minus).norm();
        if matches!(ctx.overflow, crate::context::OverflowPolicy::Strict)
            && split_defect > 1e-10 * plus.norm().max(1.0)
        {
            return Err(Error::TangencyViolation(format!(
                "projection-split mismatch {split_defect:.3e}"
            )));
        }
        Ok(LaxRhs {
            rhs: plus,
            split_defect,
        })
    }

    /// RHS in pattern coordinates.
    pub fn rhs_fields(
        &self,
        ctx: &AlgebraContext,
        state: &FieldState,
        m: u32,
    ) -> Result<Vec<FourierField>> {
        let l = self.to_element(state);
        let lax = self.lax_rhs(ctx, &l, m)?;
        // Under Galerkin truncation the transverse tolerance is looser; it
        // only guards against leaving the pattern, not spectral tails.
        let tol = match ctx.overflow {
            crate::context::OverflowPolicy::Strict => 1e-10,
            crate::context::OverflowPolicy::Truncate => 1e-8,
        };
        self.tangent_coords(&lax.rhs, tol)
    }

    /// [tr(Lᵏ)/k for k = 1..=kmax] in the hierarchy's pairing.
    pub fn conserved_quantities(
        &self,
        ctx: &AlgebraContext,
        l: &LaurentElement,
        kmax: u32,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(kmax as usize);
        let mut p = LaurentElement::one();
        for k in 1..=kmax {
            p = ctx.mul(&p, l)?;
            out.push(ctx.trace(&p) / k as f64);
        }
        Ok(out)
    }

    /// Hierarchy-specific Casimirs of the first structure.
    pub fn casimirs(&self, state: &FieldState) -> Result<Vec<f64>> {
        match self.name {
            HierarchyName::Benny => Ok(vec![state.fields[0].mean(), state.fields[1].mean()]),
            HierarchyName::DToda => {
                let u1 = &state.fields[1];
                let n = 4 * self.mode_cap + 1;
                let vals = u1.eval_grid(n);
                if vals.iter().any(|&v| v <= 0.0) {
                    return Err(Error::BlowUp(
                        "dToda positivity chart violated: u₁ ≤ 0 on the grid".into(),
                    ));
                }
                let log_mean = vals.iter().map(|v| v.ln()).sum::<f64>() / n as f64;
                Ok(vec![state.fields[0].mean(), log_mean])
            }
            _ => Ok(vec![]),
        }
    }

    /// Rough largest characteristic speed, used for the RK4 step check.
    fn wave_speed(&self, state: &FieldState) -> f64 {
        let sups: Vec<f64> = state.fields.iter().map(|f| f.sup_norm()).collect();
        match self.name {
            HierarchyName::Benny => sups[0] + sups[1].sqrt().max(1.0),
            HierarchyName::DToda => sups[0] + 2.0 * sups[1],
            _ => 1.0 + sups.iter().sum::<f64>(),
        }
    }

    /// Classical RK4 on Fourier modes with Galerkin-truncated products.
    pub fn evolve(&self, state0: &FieldState, opts: &EvolveOptions) -> Result<Trajectory> {
        let ctx = self.context().truncating();
        let speed = self.wave_speed(state0);
        let m_growth = opts.flow_m.max(1) as f64;
        let cfl = opts.dt
            * speed.powf(m_growth)
            * 2.0
            * std::f64::consts::PI
            * self.mode_cap as f64;
        if cfl > 2.8 {
            return Err(Error::Config(format!(
                "dt·(max speed)·K = {cfl:.2} exceeds the RK4 stability bound 2.8"
            )));
        }

        let n_steps = (opts.t_final / opts.dt).round() as usize;
        let mut state = state0.clone();
        let mut traj = Trajectory {
            times: vec![],
            states: vec![],
            traces: vec![],
            casimirs: vec![],
        };
        let record = |s: &FieldState, traj: &mut Trajectory| -> Result<()> {
            let l = self.to_element(s);
            traj.times.push(s.time);
            traj.traces
                .push(self.conserved_quantities(&ctx, &l, opts.trace_kmax)?);
            traj.casimirs.push(self.casimirs(s)?);
            traj.states.push(s.clone());
            Ok(())
        };
        record(&state, &mut traj)?;

        let add_scaled = |s: &FieldState, k: &[FourierField], c: f64| -> FieldState {
            FieldState {
                fields: s
                    .fields
                    .iter()
                    .zip(k)
                    .map(|(f, df)| f.add(&df.scale(c)).truncate(self.mode_cap))
                    .collect(),
                time: s.time,
            }
        };

        for step in 1..=n_steps {
            let dt = opts.dt;
            let k1 = self.rhs_fields(&ctx, &state, opts.flow_m)?;
            let k2 = self.rhs_fields(&ctx, &add_scaled(&state, &k1, dt / 2.0), opts.flow_m)?;
            let k3 = self.rhs_fields(&ctx, &add_scaled(&state, &k2, dt / 2.0), opts.flow_m)?;
            let k4 = self.rhs_fields(&ctx, &add_scaled(&state, &k3, dt), opts.flow_m)?;
            let fields: Vec<FourierField> = state
                .fields
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    f.add(
                        &k1[i]
                            .add(&k2[i].scale(2.0))
                            .add(&k3[i].scale(2.0))
                            .add(&k4[i])
                            .scale(dt / 6.0),
                    )
                    .truncate(self.mode_cap)
                })
                .collect();
            state = FieldState {
                fields,
                time: step as f64 * dt,
            };

            for f in &state.fields {
                if f.sup_norm() > opts.blowup_sup {
                    return Err(Error::BlowUp(format!(
                        "amplitude overflow at t = {:.4}",
                        state.time
                    )));
                }
                let total = f.l2_norm_sq();
                if total > 1e-20 {
                    let cutoff = (2 * self.mode_cap) / 3;
                    let mut tail = 0.0;
                    for k in cutoff..=f.max_mode() {
                        tail += 2.0 * f.amp(k as i32).norm_sqr();
                    }
                    if tail / total > opts.tail_energy_frac {
                        return Err(Error::BlowUp(format!(
                            "spectral tail carries {:.1}% of the energy at t = {:.4} \
                             (gradient catastrophe approaching)",
                            100.0 * tail / total,
                            state.time
                        )));
                    }
                }
            }
            if step % opts.sample_every == 0 || step == n_steps {
                record(&state, &mut traj)?;
            }
        }
        Ok(traj)
    }

    /// Probes whether the pattern manifold is a Poisson submanifold of
    /// {·,·}_(n): max transverse component of X_H over random conforming
    /// states and random functionals, with the leaking degrees reported.
    pub fn poisson_submanifold_defect(
        &self,
        n: i32,
        rng: &mut impl Rng,
        probes: usize,
    ) -> Result<SubmanifoldReport> {
        let ctx = self.submanifold_context();
        let tower = BracketTower::new(ctx.clone());
        let mut defect: f64 = 0.0;
        let mut tie_defect: f64 = 0.0;
        let mut leak_norms: std::collections::BTreeMap<i32, f64> = Default::default();
        for i in 0..probes {
            let state = self.probe_state(rng);
            let l = self.to_element(&state);
            let h = if i % 3 == 2 {
                Functional::trace_monomial(2 + (i % 2) as u32)
            } else {
                let mut a = LaurentElement::zero();
                for d in -3..=2 {
                    a.set_coeff(d, FourierField::random(rng, 2, 1.0));
                }
                Functional::linear(a)
            };
            let x = tower.ham_field(&h, &l, n)?;
            let scale = x.norm().max(1e-12);
            if matches!(self.name, HierarchyName::DToda) {
                let tie = x.coeff(1).sub(&x.coeff(-1)).l2_norm() / scale;
                tie_defect = tie_defect.max(tie);
                if tie > 1e-9 {
                    *leak_norms.entry(1).or_default() += tie;
                }
            }
            for (d, f) in x.iter() {
                if !self.is_tangent_degree(d) {
                    let r = f.l2_norm() / scale;
                    defect = defect.max(r);
                    if r > 1e-9 {
                        let e = leak_norms.entry(d).or_default();
                        *e = e.max(r);
                    }
                }
            }
        }
        if matches!(self.name, HierarchyName::DToda) {
            defect = defect.max(tie_defect);
        }
        Ok(SubmanifoldReport {
            n,
            defect,
            leak_degrees: leak_norms.keys().copied().collect(),
            tie_defect,
        })
    }

    /// The set of n for which the pattern must be a Poisson submanifold.
    pub fn expected_poisson_range(&self) -> Vec<i32> {
        match self.name {
            HierarchyName::Benny => vec![-1],
            HierarchyName::DToda | HierarchyName::DmKp => vec![-1, 0, 1],
            HierarchyName::DKp => vec![-1, 0],
            HierarchyName::DDym => vec![-1, 0, 1, 2, 3],
        }
    }

    fn submanifold_context(&self) -> AlgebraContext {
        // Sized for L⁴·dH products on shallow probe states.
        let (lo, hi) = match self.name {
            HierarchyName::Benny => (-14, 8),
            HierarchyName::DToda => (-14, 14),
            _ => (-24, 10),
        };
        AlgebraContext::with_caps(self.name.rmatrix(), self.mode_cap.max(16), lo, hi)
    }

    fn probe_state(&self, rng: &mut impl Rng) -> FieldState {
        match self.name {
            HierarchyName::Benny | HierarchyName::DToda => self.random_state(rng, 2, 0.3),
            // Shallow tails keep L⁴ inside the window.
            _ => {
                let shallow = self.clone().with_tail_depth(-3);
                let mut s = shallow.random_state(rng, 2, 0.3);
                for _ in 0..(self.component_degrees().len() - s.fields.len()) {
                    s.fields.push(FourierField::zero());
                }
                FieldState {
                    fields: s.fields,
                    time: 0.0,
                }
            }
        }
    }

    /// Riemann invariants of the dToda system: w₁ = u₀ − 2u₁,
    /// w₂ = u₀ + 2u₁, with the strict-hyperbolicity flag (u₁ ≠ 0 on the
    /// grid) and the metric-degeneracy flag (w₁w₂ = 0 somewhere).
    pub fn riemann_invariants(&self, state: &FieldState) -> Result<RiemannInvariants> {
        if !matches!(self.name, HierarchyName::DToda) {
            return Err(Error::Config(
                "Riemann invariants are defined for the dToda pattern".into(),
            ));
        }
        let (u0, u1) = (&state.fields[0], &state.fields[1]);
        let w1 = u0.sub(&u1.scale(2.0));
        let w2 = u0.add(&u1.scale(2.0));
        let n = 4 * self.mode_cap + 1;
        let (g1, g2, gu1) = (w1.eval_grid(n), w2.eval_grid(n), u1.eval_grid(n));
        let eps = 1e-12;
        let strictly_hyperbolic = gu1.iter().all(|v| v.abs() > eps);
        let degenerate = g1
            .iter()
            .zip(&g2)
            .any(|(a, b)| (a * b).abs() <= 1e-10 * (1.0 + a.abs() + b.abs()));
        Ok(RiemannInvariants {
            w1,
            w2,
            strictly_hyperbolic,
            degenerate,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RiemannInvariants {
    pub w1: FourierField,
    pub w2: FourierField,
    pub strictly_hyperbolic: bool,
    pub degenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn benny_rhs_reproduces_the_quasilinear_system() {
        // Flow m = 2 in coordinates: 2·(u₀u₀ₓ + u₋₁ₓ, u₋₁u₀ₓ + u₀u₋₁ₓ).
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let ctx = spec.context();
        let mut rng = ChaCha8Rng::seed_from_u64(301);
        let state = spec.random_state(&mut rng, 2, 0.3);
        let (u0, um1) = (&state.fields[0], &state.fields[1]);
        let rhs = spec.rhs_fields(&ctx, &state, 2).unwrap();
        let want0 = u0.mul(&u0.dx()).add(&um1.dx()).scale(2.0);
        let want1 = um1.mul(&u0.dx()).add(&u0.mul(&um1.dx())).scale(2.0);
        assert!(rhs[0].sub(&want0).l2_norm() < 1e-12);
        assert!(rhs[1].sub(&want1).l2_norm() < 1e-12);
    }

    #[test]
    fn dtoda_rhs_reproduces_the_lattice_system() {
        let spec = HierarchySpec::new(HierarchyName::DToda);
        let ctx = spec.context();
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let state = spec.random_state(&mut rng, 2, 0.2);
        let (u0, u1) = (&state.fields[0], &state.fields[1]);
        let rhs = spec.rhs_fields(&ctx, &state, 1).unwrap();
        assert!(rhs[0].sub(&u1.mul(&u1.dx()).scale(4.0)).l2_norm() < 1e-12);
        assert!(rhs[1].sub(&u1.mul(&u0.dx())).l2_norm() < 1e-12);
    }

    #[test]
    fn constant_lax_operator_is_stationary() {
        for name in HierarchyName::ALL {
            let spec = HierarchySpec::new(name).with_tail_depth(-3);
            let ctx = spec.context();
            let fields = spec
                .component_degrees()
                .iter()
                .map(|&d| {
                    if d == 1 {
                        FourierField::constant(1.0)
                    } else {
                        FourierField::constant(0.3)
                    }
                })
                .collect();
            let state = spec.state(fields).unwrap();
            let rhs = spec.rhs_fields(&ctx, &state, 2).unwrap();
            for f in rhs {
                assert!(f.l2_norm() < 1e-13, "{} moved a constant state", name.name());
            }
        }
    }

    #[test]
    fn tail_hierarchy_rhs_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(307);
        for name in [HierarchyName::DKp, HierarchyName::DmKp, HierarchyName::DDym] {
            let spec = HierarchySpec::new(name).with_tail_depth(-4);
            let ctx = spec.context();
            let state = spec.random_state(&mut rng, 2, 0.2);
            for m in 1..=2 {
                let rhs = spec.rhs_fields(&ctx, &state, m);
                assert!(rhs.is_ok(), "{} m={m}: {rhs:?}", name.name());
            }
        }
    }

    #[test]
    fn evolve_conserves_traces_and_casimirs() {
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let state = spec
            .state(vec![FourierField::sine(1, 0.1), FourierField::constant(1.0)])
            .unwrap();
        let opts = EvolveOptions {
            flow_m: 2,
            dt: 1e-3,
            t_final: 0.1,
            ..Default::default()
        };
        let traj = spec.evolve(&state, &opts).unwrap();
        let t0 = &traj.traces[0];
        for row in &traj.traces {
            for (a, b) in row.iter().zip(t0) {
                assert!((a - b).abs() < 1e-9, "trace drift {}", (a - b).abs());
            }
        }
        let c0 = &traj.casimirs[0];
        for row in &traj.casimirs {
            for (a, b) in row.iter().zip(c0) {
                assert!((a - b).abs() < 1e-11);
            }
        }
        // The state genuinely moved.
        let moved = traj.states.last().unwrap().fields[0]
            .sub(&traj.states[0].fields[0])
            .l2_norm();
        assert!(moved > 1e-4, "state did not evolve ({moved})");
    }

    #[test]
    fn dtoda_evolution_preserves_positivity_and_logs() {
        let spec = HierarchySpec::new(HierarchyName::DToda);
        let state = spec
            .state(vec![
                FourierField::cosine(1, 0.1),
                FourierField::constant(1.0),
            ])
            .unwrap();
        let opts = EvolveOptions {
            flow_m: 1,
            dt: 1e-3,
            t_final: 0.1,
            ..Default::default()
        };
        let traj = spec.evolve(&state, &opts).unwrap();
        let c0 = &traj.casimirs[0];
        for row in &traj.casimirs {
            assert!((row[0] - c0[0]).abs() < 1e-11);
            assert!((row[1] - c0[1]).abs() < 1e-10);
        }
        // Positivity of u₁ held at every sample (casimirs() would have
        // errored otherwise); check the final state explicitly.
        let last = traj.states.last().unwrap();
        assert!(last.fields[1].eval_grid(65).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn blowup_is_detected_for_large_data() {
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let state = spec
            .state(vec![FourierField::sine(1, 2.0), FourierField::constant(1.0)])
            .unwrap();
        let opts = EvolveOptions {
            flow_m: 2,
            dt: 2e-3,
            t_final: 3.0,
            ..Default::default()
        };
        match spec.evolve(&state, &opts) {
            Err(Error::BlowUp(_)) | Err(Error::Config(_)) => {}
            other => panic!("expected blow-up or stability rejection, got {other:?}"),
        }
    }

    #[test]
    fn conserved_quantities_examples() {
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let ctx = spec.context();
        // L = λ: every trace vanishes (powers never reach degree −1).
        let lam = LaurentElement::const_monomial(1, 1.0);
        for q in spec.conserved_quantities(&ctx, &lam, 4).unwrap() {
            assert!(q.abs() < 1e-15);
        }
        // Benny: tr L = ∫u₋₁ and tr L²/2 = ∫u₀u₋₁ (expand and extract).
        let mut rng = ChaCha8Rng::seed_from_u64(311);
        let state = spec.random_state(&mut rng, 2, 0.4);
        let l = spec.to_element(&state);
        let qs = spec.conserved_quantities(&ctx, &l, 2).unwrap();
        let (u0, um1) = (&state.fields[0], &state.fields[1]);
        assert!((qs[0] - um1.mean()).abs() < 1e-13);
        assert!((qs[1] - u0.mul(um1).mean()).abs() < 1e-13);
        // dToda: tr L = ∫u₀.
        let spec = HierarchySpec::new(HierarchyName::DToda);
        let ctx = spec.context();
        let state = spec.random_state(&mut rng, 2, 0.3);
        let l = spec.to_element(&state);
        let qs = spec.conserved_quantities(&ctx, &l, 1).unwrap();
        assert!((qs[0] - state.fields[0].mean()).abs() < 1e-13);
    }

    #[test]
    fn submanifold_classification_matches_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(313);
        for name in HierarchyName::ALL {
            let spec = HierarchySpec::new(name);
            let expected = spec.expected_poisson_range();
            for n in -1..=3 {
                let rep = spec.poisson_submanifold_defect(n, &mut rng, 4).unwrap();
                if expected.contains(&n) {
                    assert!(
                        rep.defect < 1e-11,
                        "{} n={n}: unexpected leak {:.3e} at {:?}",
                        name.name(),
                        rep.defect,
                        rep.leak_degrees
                    );
                } else {
                    assert!(
                        rep.defect > 1e-6,
                        "{} n={n}: expected a genuine leak, defect {:.3e}",
                        name.name(),
                        rep.defect
                    );
                }
            }
        }
    }

    #[test]
    fn benny_leak_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(317);
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let rep = spec.poisson_submanifold_defect(0, &mut rng, 6).unwrap();
        assert_eq!(rep.leak_degrees, vec![-2]);
        let rep = spec.poisson_submanifold_defect(1, &mut rng, 6).unwrap();
        assert_eq!(rep.leak_degrees, vec![-3, -2]);
    }

    #[test]
    fn riemann_invariants_flags() {
        let spec = HierarchySpec::new(HierarchyName::DToda);
        let s = spec
            .state(vec![FourierField::zero(), FourierField::constant(1.0)])
            .unwrap();
        let ri = spec.riemann_invariants(&s).unwrap();
        assert!((ri.w1.mean() + 2.0).abs() < 1e-14);
        assert!((ri.w2.mean() - 2.0).abs() < 1e-14);
        assert!(ri.strictly_hyperbolic);
        assert!(!ri.degenerate);

        // u₀ = 2u₁ somewhere: w₁ vanishes there.
        let s = spec
            .state(vec![
                FourierField::constant(2.0),
                FourierField::constant(1.0),
            ])
            .unwrap();
        let ri = spec.riemann_invariants(&s).unwrap();
        assert!(ri.degenerate);
    }
}
