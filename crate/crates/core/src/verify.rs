//! Seeded verification sweeps. Every structural identity becomes a set of
//! [`CheckRow`]s with a stable check id, a human-readable anchor naming
//! the property, the probe parameters, the measured defect, and the
//! tolerance it must beat. The CLI and the acceptance suite both consume
//! these rows, so a fixed seed reproduces a report byte for byte.

use crate::context::{AlgebraContext, RMatrixKind};
use crate::error::Result;
use crate::fourier::FourierField;
use crate::functional::Functional;
use crate::hierarchy::{EvolveOptions, FieldState, HierarchyName, HierarchySpec};
use crate::hydro;
use crate::laurent::LaurentElement;
use crate::opmatrix::{self, dirac_reduce, tuple_to_coords, OperatorMatrix};
use crate::reduction;
use crate::tower::BracketTower;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check_id: String,
    pub anchor: String,
    pub params: String,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
    /// True for negative controls, where the defect must EXCEED `tol`.
    pub is_lower_bound: bool,
}

impl CheckRow {
    pub fn new(
        check_id: impl Into<String>,
        anchor: impl Into<String>,
        params: impl Into<String>,
        defect: f64,
        tol: f64,
    ) -> Self {
        let pass = defect.is_finite() && defect < tol;
        CheckRow {
            check_id: check_id.into(),
            anchor: anchor.into(),
            params: params.into(),
            defect: defect + 0.0, // normalizes -0.0 in reports
            tol,
            pass,
            is_lower_bound: false,
        }
    }

    /// A row that must EXCEED the bound (negative controls: genuine leaks,
    /// non-closure witnesses). `defect` must be at least `floor`.
    pub fn must_exceed(
        check_id: impl Into<String>,
        anchor: impl Into<String>,
        params: impl Into<String>,
        defect: f64,
        floor: f64,
    ) -> Self {
        CheckRow {
            check_id: check_id.into(),
            anchor: anchor.into(),
            params: params.into(),
            defect,
            tol: floor,
            pass: defect.is_finite() && defect > floor,
            is_lower_bound: true,
        }
    }
}

pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    // Text fields are sanitized so every row splits into exactly six
    // comma-separated columns.
    let clean = |s: &str| s.replace(',', ";").replace('\n', " ");
    let mut s = String::from("check_id,anchor,params,defect,tol,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.12e},{:.3e},{}\n",
            clean(&r.check_id),
            clean(&r.anchor),
            clean(&r.params),
            r.defect,
            r.tol,
            r.pass
        ));
    }
    s
}

pub fn rows_to_text(rows: &[CheckRow]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!(
            "[{}] {:<42} {:<28} defect {:>12.5e}  tol {:>8.1e}  ({})\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_id,
            r.params,
            r.defect,
            r.tol,
            r.anchor,
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub probes: usize,
    pub modes: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            probes: 20,
            modes: 16,
        }
    }
}

/// Deterministic parallel map: results land in task order and every task
/// derives its own seed, so the report is byte-identical regardless of
/// the thread schedule.
fn parallel_rows<T, F>(tasks: Vec<T>, f: F) -> Result<Vec<CheckRow>>
where
    T: Send + Sync,
    F: Fn(&T) -> Result<CheckRow> + Send + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let n_threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(tasks.len().max(1));
    let next = AtomicUsize::new(0);
    let out: Vec<Mutex<Option<Result<CheckRow>>>> =
        (0..tasks.len()).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..n_threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let r = f(&tasks[i]);
                *out[i].lock().expect("poisoned") = Some(r);
            });
        }
    });
    out.into_iter()
        .map(|m| m.into_inner().expect("poisoned").expect("task ran"))
        .collect()
}

/// Stable per-task seed derived from the base seed (splitmix-style).
fn task_seed(base: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(b.wrapping_mul(0xbf58476d1ce4e5b9))
        .wrapping_add(c.wrapping_mul(0x94d049bb133111eb));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Tower sized for nested composite-gradient sweeps with n, m ≤ 3.
fn tower_for(kind: RMatrixKind, cfg: &VerifyConfig) -> BracketTower {
    let (lo, hi) = match kind {
        RMatrixKind::DToda => (-18, 18),
        _ => (-18, 14),
    };
    BracketTower::new(AlgebraContext::with_caps(kind, cfg.modes.max(20), lo, hi))
}

/// Generic probe point: λ-degrees −1..1, one harmonic per coefficient.
fn generic_l(rng: &mut impl Rng, kind: RMatrixKind) -> LaurentElement {
    let mut l = LaurentElement::zero();
    match kind {
        RMatrixKind::DToda => {
            let u1 = FourierField::constant(1.0).add(&FourierField::random(rng, 1, 0.2));
            l.set_coeff(1, u1.clone());
            l.set_coeff(-1, u1);
            l.set_coeff(0, FourierField::random(rng, 1, 0.3));
        }
        _ => {
            l.set_coeff(1, FourierField::constant(1.0));
            l.set_coeff(0, FourierField::random(rng, 1, 0.3));
            l.set_coeff(-1, FourierField::random(rng, 1, 0.3));
        }
    }
    l
}

fn random_linear(rng: &mut impl Rng) -> Functional {
    let mut a = LaurentElement::zero();
    for d in -1..=1 {
        a.set_coeff(d, FourierField::random(rng, 1, 1.0));
    }
    Functional::linear(a)
}

fn random_functional(rng: &mut impl Rng, i: usize) -> Functional {
    if i % 3 == 2 {
        Functional::trace_monomial(2 + (i % 2) as u32)
    } else {
        random_linear(rng)
    }
}

/// R-bracket Jacobi identity for every decomposition, plus the closure
/// classification of the degree half-lines (lower half-lines close only
/// for the three smallest cuts).
pub fn suite_rbracket(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5bc1);
    for kind in RMatrixKind::ALL {
        let ctx = AlgebraContext::with_caps(kind, cfg.modes.max(16), -16, 12);
        let mut worst: f64 = 0.0;
        let triples = cfg.probes.max(50);
        for _ in 0..triples {
            let x = ctx.random_element(&mut rng, -2, 2, 2, 1.0);
            let y = ctx.random_element(&mut rng, -2, 2, 2, 1.0);
            let z = ctx.random_element(&mut rng, -2, 2, 2, 1.0);
            let s = ctx
                .r_bracket(&ctx.r_bracket(&x, &y)?, &z)?
                .add(&ctx.r_bracket(&ctx.r_bracket(&y, &z)?, &x)?)
                .add(&ctx.r_bracket(&ctx.r_bracket(&z, &x)?, &y)?);
            worst = worst.max(s.norm());
        }
        rows.push(CheckRow::new(
            format!("rbracket-jacobi[{}]", kind.name()),
            "r-bracket Jacobi identity",
            format!("triples={triples}"),
            worst,
            1e-10,
        ));
    }
    // Closure classification for the lower half-lines.
    use crate::context::BracketVariant;
    use crate::lie::SubspaceId;
    let ctx = AlgebraContext::with_caps(RMatrixKind::Benny, cfg.modes.max(16), -16, 12);
    for k in 0..=2i32 {
        let d = ctx.subalgebra_closure_defect(
            SubspaceId::Le(k - 1),
            BracketVariant::MinusOne,
            &mut rng,
            20,
        )?;
        rows.push(CheckRow::new(
            format!("closure[le_{}]", k - 1),
            "lower half-line closes under the bracket",
            format!("cut={}", k - 1),
            d,
            1e-12,
        ));
    }
    let f = LaurentElement::monomial(2, FourierField::sine(1, 1.0));
    let g = LaurentElement::monomial(2, FourierField::cosine(1, 1.0));
    let escaped = ctx
        .lie_bracket(&f, &g)?
        .filter_degrees(|d| d > 2)
        .norm();
    rows.push(CheckRow::must_exceed(
        "closure[le_2-witness]",
        "cut at degree 2 fails to close",
        "pair=(sin·λ², cos·λ²)",
        escaped,
        0.1,
    ));
    Ok(rows)
}

/// Jacobi identity of {·,·}_(n) with finite-difference inner gradients.
pub fn suite_jacobi(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut tasks = vec![];
    for (ki, kind) in RMatrixKind::ALL.into_iter().enumerate() {
        for n in -1..=3 {
            tasks.push((ki, kind, n));
        }
    }
    parallel_rows(tasks, |&(ki, kind, n)| {
        let t = tower_for(kind, cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(
            cfg.seed ^ 0x1acb,
            ki as u64,
            (n + 2) as u64,
            0,
        ));
        let mut worst: f64 = 0.0;
        for i in 0..cfg.probes {
            let l = generic_l(&mut rng, kind);
            let f = random_functional(&mut rng, i);
            let g = random_linear(&mut rng);
            let h = random_linear(&mut rng);
            worst = worst.max(t.jacobi_defect(n, &f, &g, &h, &l)?);
        }
        Ok(CheckRow::new(
            format!("tower-jacobi[{},n={n}]", kind.name()),
            "bracket family Jacobi identity",
            format!("probes={}", cfg.probes),
            worst,
            1e-5,
        ))
    })
}

/// Pairwise compatibility: the sum of any two brackets satisfies Jacobi.
pub fn suite_compat(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut tasks = vec![];
    for (ki, kind) in RMatrixKind::ALL.into_iter().enumerate() {
        for m in -1..=3 {
            for n in (m + 1)..=3 {
                tasks.push((ki, kind, m, n));
            }
        }
    }
    parallel_rows(tasks, |&(ki, kind, m, n)| {
        let t = tower_for(kind, cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(
            cfg.seed ^ 0x2bd3,
            ki as u64,
            (m + 2) as u64,
            (n + 2) as u64,
        ));
        let mut worst: f64 = 0.0;
        for i in 0..cfg.probes {
            let l = generic_l(&mut rng, kind);
            let f = random_functional(&mut rng, i);
            let g = random_linear(&mut rng);
            let h = random_linear(&mut rng);
            worst = worst.max(t.compatibility_defect(m, n, &f, &g, &h, &l)?);
        }
        Ok(CheckRow::new(
            format!("tower-compat[{},m={m},n={n}]", kind.name()),
            "pairwise compatibility of the brackets",
            format!("probes={}", cfg.probes),
            worst,
            1e-5,
        ))
    })
}

/// Witt relations of the power fields: exact algebra, tight tolerance.
pub fn suite_virasoro(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x3999);
    for kind in [RMatrixKind::Benny, RMatrixKind::DToda] {
        let t = tower_for(kind, cfg);
        let mut worst: f64 = 0.0;
        for m in -1..=3 {
            for n in -1..=3 {
                for _ in 0..3 {
                    let l = generic_l(&mut rng, kind);
                    worst = worst.max(t.virasoro_commutator_defect(m, n, &l)?);
                }
            }
        }
        rows.push(CheckRow::new(
            format!("virasoro-commutator[{}]", kind.name()),
            "power fields satisfy the Witt relations",
            "(m,n) in {-1..3}^2",
            worst,
            1e-11,
        ));
    }
    Ok(rows)
}

/// The tower-generating identity: the Lie derivative of the n-th bracket
/// along Vₘ is (n−m) times the (m+n)-th bracket.
pub fn suite_liederiv(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut tasks = vec![];
    for (ki, kind) in [RMatrixKind::Benny, RMatrixKind::DToda].into_iter().enumerate() {
        for m in -1..=3 {
            for n in -1..=3 {
                tasks.push((ki, kind, m, n));
            }
        }
    }
    parallel_rows(tasks, |&(ki, kind, m, n)| {
        let t = tower_for(kind, cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(
            cfg.seed ^ 0x41ed,
            ki as u64,
            (m + 2) as u64,
            (n + 2) as u64,
        ));
        let mut worst: f64 = 0.0;
        for i in 0..cfg.probes {
            let l = generic_l(&mut rng, kind);
            let f = random_functional(&mut rng, i);
            let h = random_functional(&mut rng, i + 1);
            worst = worst.max(t.lie_derivative_defect(m, n, &f, &h, &l)?);
        }
        Ok(CheckRow::new(
            format!("liederiv[{},m={m},n={n}]", kind.name()),
            "power fields generate the bracket family",
            format!("probes={}", cfg.probes),
            worst,
            1e-6,
        ))
    })
}

/// Trace functionals Poisson-commute; their flows take Lax form.
pub fn suite_involution(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5717);
    for kind in RMatrixKind::ALL {
        let t = tower_for(kind, cfg);
        let mut worst_inv: f64 = 0.0;
        let mut worst_lax: f64 = 0.0;
        for n in -1..=3 {
            for _ in 0..3 {
                let l = generic_l(&mut rng, kind);
                for (j, k) in [(1u32, 2u32), (2, 3), (1, 3), (2, 2)] {
                    worst_inv = worst_inv.max(t.involution_defect(j, k, n, &l)?);
                }
                // Ad-invariant Hamiltonians flow by the Lax equation.
                let h = Functional::trace_monomial(3);
                let field = t.ham_field(&h, &l, n)?;
                let c = &t.ctx;
                let dh = h.grad(c, &l)?;
                let lp = c.power_signed(&l, n + 1, t.inv_order)?;
                let lax = c
                    .lie_bracket(&c.r_apply(&c.mul(&lp, &dh)?), &l)?
                    .scale(0.5);
                worst_lax = worst_lax.max(field.sub(&lax).norm());
            }
        }
        rows.push(CheckRow::new(
            format!("involution[{}]", kind.name()),
            "ad-invariant trace functionals commute",
            "(j,k) up to 3, n in {-1..3}",
            worst_inv,
            1e-11,
        ));
        rows.push(CheckRow::new(
            format!("lax-form[{}]", kind.name()),
            "ad-invariant flows take Lax form",
            "n in {-1..3}",
            worst_lax,
            1e-12,
        ));
    }
    Ok(rows)
}

/// The multiplication map is a morphism for the quadratic bracket.
pub fn suite_mult(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6335);
    for kind in RMatrixKind::ALL {
        let t = tower_for(kind, cfg);
        let mut worst: f64 = 0.0;
        for i in 0..cfg.probes {
            let l1 = generic_l(&mut rng, kind);
            let mut l2 = LaurentElement::from_pairs([(
                0,
                FourierField::constant(1.0).add(&FourierField::random(&mut rng, 1, 0.2)),
            )]);
            l2.set_coeff(-1, FourierField::random(&mut rng, 1, 0.2));
            let f = random_functional(&mut rng, i);
            let h = random_functional(&mut rng, i + 2);
            worst = worst.max(t.multiplicativity_defect(&f, &h, &l1, &l2)?);
        }
        rows.push(CheckRow::new(
            format!("mult-morphism[{}]", kind.name()),
            "multiplication is a morphism of the quadratic bracket",
            format!("probes={}", cfg.probes),
            worst,
            1e-10,
        ));
    }
    Ok(rows)
}

/// Inversion is an anti-morphism between the positive and negative halves
/// of the tower.
pub fn suite_inversion(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7e11);
    for kind in [RMatrixKind::Benny, RMatrixKind::DKp, RMatrixKind::DDym] {
        let t = BracketTower::new(AlgebraContext::with_caps(
            kind,
            cfg.modes.max(24),
            -44,
            14,
        ));
        for n in [0, 1] {
            let mut worst: f64 = 0.0;
            for _ in 0..cfg.probes {
                let l = LaurentElement::from_pairs([
                    (1, FourierField::constant(1.0)),
                    (1, FourierField::random(&mut rng, 1, 0.1)),
                ]);
                let f = random_linear(&mut rng);
                let h = random_linear(&mut rng);
                worst = worst.max(t.inversion_defect(&f, &h, &l, n, 8)?);
            }
            let tol = if n == 0 { 1e-6 } else { 1e-5 };
            rows.push(CheckRow::new(
                format!("inversion[{},n={n}]", kind.name()),
                "inversion maps the tower to its negative half",
                format!("order=8, probes={}", cfg.probes),
                worst,
                tol,
            ));
        }
    }
    Ok(rows)
}

/// Lax flows commute; power fields are degree-1 invariants of every flow.
pub fn suite_flows(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x8d2f);
    for kind in [RMatrixKind::Benny, RMatrixKind::DToda, RMatrixKind::DDym] {
        let t = tower_for(kind, cfg);
        let mut worst_comm: f64 = 0.0;
        let mut worst_deg1: f64 = 0.0;
        let mut worst_second: f64 = 0.0;
        for _ in 0..5 {
            let l = generic_l(&mut rng, kind);
            worst_comm = worst_comm.max(t.commuting_flows_defect(1, 2, &l)?);
            worst_comm = worst_comm.max(t.commuting_flows_defect(2, 3, &l)?);
            for (m, n) in [(0, 1), (1, 2), (-1, 2)] {
                worst_deg1 = worst_deg1.max(t.degree1_invariant_defect(m, n as u32, &l)?);
            }
            worst_second = worst_second.max(t.second_lie_derivative_defect(2, 1, &l)?);
        }
        rows.push(CheckRow::new(
            format!("flows-commute[{}]", kind.name()),
            "Lax flows commute",
            "(j,k)=(1,2),(2,3)",
            worst_comm,
            1e-5,
        ));
        rows.push(CheckRow::new(
            format!("degree1-invariance[{}]", kind.name()),
            "Lie derivative of basic flows along power fields",
            "(m,n) in {(0,1),(1,2),(-1,2)}",
            worst_deg1,
            1e-5,
        ));
        rows.push(CheckRow::new(
            format!("second-lie-derivative[{}]", kind.name()),
            "power fields are degree-1 invariants",
            "(k,n)=(2,1)",
            worst_second,
            1e-5,
        ));
    }
    Ok(rows)
}

/// The Benny and dToda Lax right-hand sides reproduce the quasi-linear
/// systems pointwise, with the documented scale constants (the flow
/// [Π₊(L²),L] is twice the textbook Benny right-hand side; the dToda flow
/// matches at scale one).
pub fn suite_pde(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9b05);
    let grid = 4 * cfg.modes + 1;

    let benny = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(cfg.modes.max(16));
    let ctx = benny.context();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let state = benny.random_state(&mut rng, 2, 0.3);
        let (u0, um1) = (&state.fields[0], &state.fields[1]);
        let rhs = benny.rhs_fields(&ctx, &state, 2)?;
        // 2·(u₀u₀ₓ + u₋₁ₓ, u₋₁u₀ₓ + u₀u₋₁ₓ).
        let want0 = u0.mul(&u0.dx()).add(&um1.dx()).scale(2.0);
        let want1 = um1.mul(&u0.dx()).add(&u0.mul(&um1.dx())).scale(2.0);
        for (got, want) in [(&rhs[0], &want0), (&rhs[1], &want1)] {
            let (g, w) = (got.eval_grid(grid), want.eval_grid(grid));
            let d = g
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(d);
        }
    }
    rows.push(CheckRow::new(
        "pde-benny[m=2]",
        "flow reproduces the quasi-linear long-wave system",
        "scale=2 vs textbook",
        worst,
        1e-10,
    ));

    let dtoda = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    let ctx = dtoda.context();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let state = dtoda.random_state(&mut rng, 2, 0.2);
        let (u0, u1) = (&state.fields[0], &state.fields[1]);
        let rhs = dtoda.rhs_fields(&ctx, &state, 1)?;
        let want0 = u1.mul(&u1.dx()).scale(4.0);
        let want1 = u1.mul(&u0.dx());
        for (got, want) in [(&rhs[0], &want0), (&rhs[1], &want1)] {
            let (g, w) = (got.eval_grid(grid), want.eval_grid(grid));
            let d = g
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(d);
        }
    }
    rows.push(CheckRow::new(
        "pde-dtoda[m=1]",
        "flow reproduces the long-wave lattice system",
        "scale=1",
        worst,
        1e-10,
    ));

    // Split-form agreement and Hamiltonian routing.
    let mut worst_split: f64 = 0.0;
    let mut worst_ham: f64 = 0.0;
    for name in HierarchyName::ALL {
        let spec = HierarchySpec::new(name)
            .with_mode_cap(cfg.modes.max(16))
            .with_tail_depth(-3);
        let ctx = spec.context();
        let tower = BracketTower::new(ctx.clone());
        for _ in 0..3 {
            let state = spec.random_state(&mut rng, 2, 0.25);
            let l = spec.to_element(&state);
            for m in 1..=2u32 {
                let lax = spec.lax_rhs(&ctx, &l, m)?;
                worst_split = worst_split.max(lax.split_defect);
                // The m-th flow is the Hamiltonian flow of tr L^{m+1}/(m+1)
                // in the linear structure.
                let ham =
                    tower.ham_field(&Functional::trace_monomial(m + 1), &l, -1)?;
                worst_ham = worst_ham.max(ham.sub(&lax.rhs).norm());
            }
        }
    }
    rows.push(CheckRow::new(
        "pde-split-agreement",
        "plus- and minus-projection flows agree",
        "all hierarchies, m<=2",
        worst_split,
        1e-12,
    ));
    rows.push(CheckRow::new(
        "pde-hamiltonian-route",
        "flows are trace-functional Hamiltonian flows",
        "all hierarchies, m<=2",
        worst_ham,
        1e-11,
    ));
    Ok(rows)
}

/// Poisson-submanifold classification, including the leak degrees of the
/// first two Benny extensions.
pub fn suite_submanifold(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa0a7);
    for name in HierarchyName::ALL {
        let spec = HierarchySpec::new(name).with_mode_cap(cfg.modes.max(16));
        let expected = spec.expected_poisson_range();
        for n in -1..=3 {
            let report = spec.poisson_submanifold_defect(n, &mut rng, 6)?;
            if expected.contains(&n) {
                rows.push(CheckRow::new(
                    format!("submanifold[{},n={n}]", name.name()),
                    "pattern is invariant under the bracket",
                    "probes=6",
                    report.defect,
                    1e-11,
                ));
            } else {
                rows.push(CheckRow::must_exceed(
                    format!("submanifold-leak[{},n={n}]", name.name()),
                    "pattern genuinely leaks",
                    format!("leak_degrees={:?}", report.leak_degrees),
                    report.defect,
                    1e-6,
                ));
                if name == HierarchyName::Benny {
                    let want: Vec<i32> = if n == 0 { vec![-2] } else { vec![-3, -2] };
                    let ok = n > 1 || report.leak_degrees == want;
                    rows.push(CheckRow::new(
                        format!("leak-degrees[benny,n={n}]"),
                        "leak confined to the predicted degrees",
                        format!("got={:?} want={:?}", report.leak_degrees, want),
                        if ok { 0.0 } else { 1.0 },
                        0.5,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

// Probe states for the operator checks stay mild: the constrained solves
// involve reciprocals of the fields, whose Fourier tails must sit far
// below the comparison tolerances at the assembly mode cap.
fn benny_probe_state(rng: &mut impl Rng, cfg: &VerifyConfig) -> FieldState {
    let spec = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(cfg.modes.max(16));
    let mut s = spec.random_state(rng, 1, 0.1);
    // Keep u₋₁ away from zero so the constrained blocks stay tame.
    s.fields[1] = FourierField::constant(1.0).add(&s.fields[1]);
    s
}

fn dtoda_probe_state(rng: &mut impl Rng, cfg: &VerifyConfig) -> FieldState {
    let spec = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    spec.random_state(rng, 1, 0.1)
}

/// Generated extended operators vs the printed tables, entrywise on basis
/// covectors, with any table discrepancy reported.
pub fn suite_extended_operators(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xb129);
    let kmax = 8;

    // n = −1: no leak; the generated operator must equal the first
    // structure directly.
    let spec = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(cfg.modes.max(16));
    let state = benny_probe_state(&mut rng, cfg);
    let gen =
        reduction::build_extended_matrix(&spec, -1, &state, kmax)?;
    let b = hydro::builtin_operator(HierarchyName::Benny, -1)?;
    let table = reduction::assemble_table_operator(&b, &state.fields, kmax)?;
    rows.push(CheckRow::new(
        "extended[benny,n=-1]",
        "first structure appears with no leak",
        format!("kmax={kmax}"),
        (&gen.mat - &table.mat).norm(),
        1e-9,
    ));

    for n in [0, 1] {
        let state = benny_probe_state(&mut rng, cfg);
        let degrees = reduction::extended_degrees(HierarchyName::Benny, n)?;
        let gen = reduction::build_extended_matrix(&spec, n, &state, kmax)?;
        let mut ext_fields = state.fields.clone();
        ext_fields.resize(degrees.len(), FourierField::zero());
        let table_op = reduction::builtin_extended_operator(HierarchyName::Benny, n)?;
        let table = reduction::assemble_table_operator(&table_op, &ext_fields, kmax)?;
        rows.push(CheckRow::new(
            format!("extended[benny,n={n}]"),
            "generated extended operator matches the printed table",
            format!("kmax={kmax}, dim={}", degrees.len()),
            (&gen.mat - &table.mat).norm() / table.mat.norm().max(1.0),
            1e-9,
        ));
        rows.push(CheckRow::new(
            format!("extended-skew[benny,n={n}]"),
            "extended operator is skew-adjoint",
            format!("kmax={kmax}"),
            gen.skew_defect(),
            1e-9,
        ));
        for note in reduction::printed_table_discrepancies(HierarchyName::Benny, n) {
            rows.push(CheckRow::new(
                format!("table-discrepancy[benny,n={n}]"),
                note,
                "generated operator is ground truth",
                0.0,
                1.0,
            ));
        }
    }

    // dToda n = 2 extended operator: generated, confined, skew.
    let spec = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    let state = dtoda_probe_state(&mut rng, cfg);
    let gen = reduction::build_extended_matrix(&spec, 2, &state, kmax)?;
    rows.push(CheckRow::new(
        "extended-skew[dtoda,n=2]",
        "extended operator is skew-adjoint",
        format!("kmax={kmax}"),
        gen.skew_defect(),
        1e-9,
    ));
    Ok(rows)
}

/// Projects random covector probes onto the admissible sector (in-range
/// for the constrained solve, zero-mean where nonlocal tails require it).
fn admissible_probes(
    rng: &mut impl Rng,
    dim: usize,
    kmax: usize,
    probe_modes: usize,
    violation_rows: &[DVector<f64>],
    count: usize,
) -> Vec<DVector<f64>> {
    let b = opmatrix::basis_size(kmax);
    // Orthonormalize the violation functionals.
    let mut basis: Vec<DVector<f64>> = vec![];
    for v in violation_rows {
        let mut w = v.clone();
        for e in &basis {
            let c = e.dot(&w);
            w -= e * c;
        }
        if w.norm() > 1e-10 {
            let n = w.norm();
            basis.push(w / n);
        }
    }
    let mut out = vec![];
    for _ in 0..count {
        let mut v = DVector::zeros(dim * b);
        for c in 0..dim {
            for k in 0..=probe_modes.min(kmax) {
                let idx = c * b + if k == 0 { 0 } else { 2 * k - 1 };
                v[idx] = rng.random_range(-1.0..1.0);
                if k > 0 {
                    v[c * b + 2 * k] = rng.random_range(-1.0..1.0);
                }
            }
        }
        for e in &basis {
            let c = e.dot(&v);
            v -= e * c;
        }
        if v.norm() > 1e-6 {
            let n = v.norm();
            out.push(v / n);
        }
    }
    out
}

/// Dirac reduction of the generated extended operators against the
/// two-field tables, on admissible probes, modulo the reported gauge span.
pub fn suite_reduce(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0de);
    let kmax = 14;
    let probe_modes = 3;
    let probes = cfg.probes.max(20);

    struct Case {
        name: HierarchyName,
        n: i32,
        tol: f64,
    }
    for case in [
        Case {
            name: HierarchyName::Benny,
            n: 0,
            tol: 1e-8,
        },
        Case {
            name: HierarchyName::Benny,
            n: 1,
            tol: 1e-8,
        },
        Case {
            name: HierarchyName::DToda,
            n: 2,
            tol: 1e-8,
        },
    ] {
        let spec = HierarchySpec::new(case.name).with_mode_cap(cfg.modes.max(16));
        let state = match case.name {
            HierarchyName::Benny => benny_probe_state(&mut rng, cfg),
            _ => dtoda_probe_state(&mut rng, cfg),
        };
        let degrees = reduction::extended_degrees(case.name, case.n)?;
        let ext = reduction::build_extended_matrix(&spec, case.n, &state, kmax)?;
        let keep: Vec<usize> = vec![0, 1];
        let constrain: Vec<usize> = (2..degrees.len()).collect();
        let red = dirac_reduce(&ext, &keep, &constrain)?;

        let builtin = hydro::builtin_operator(case.name, case.n)?;
        // Admissibility: in-range for the Schur solve plus zero-mean
        // arguments for any nonlocal tail.
        let probe_dim = keep.len() * opmatrix::basis_size(kmax);
        let mut violations: Vec<DVector<f64>> = range_violation_rows(&red, probe_dim);
        violations.extend(reduction::tail_mean_rows(&builtin, &state.fields, kmax));

        let probes_v =
            admissible_probes(&mut rng, 2, kmax, probe_modes, &violations, probes);
        let mut worst: f64 = 0.0;
        let mut worst_range: f64 = 0.0;
        for xi in &probes_v {
            worst_range = worst_range.max(red.range_residual(xi));
            let got = &red.matrix.mat * xi;
            let fields = opmatrix::coords_to_tuple(xi, 2, kmax);
            let want_fields = builtin.apply(
                &FieldState {
                    fields: state.fields.clone(),
                    time: 0.0,
                },
                &fields,
            )?;
            let want = tuple_to_coords(&want_fields, kmax);
            let diff = &got - &want;
            worst = worst.max(opmatrix::residual_mod_span(&diff, &red.gauge));
        }
        let (gauge_strong, gauge_weak) = red.kernel_sensitivity(&probes_v);
        rows.push(CheckRow::new(
            format!("dirac[{},n={}]", case.name.name(), case.n),
            "Dirac reduction reproduces the printed structure",
            format!(
                "probes={}, gauge_dim={}, range_residual={:.1e}",
                probes_v.len(),
                red.gauge.len(),
                worst_range
            ),
            worst,
            case.tol,
        ));
        rows.push(CheckRow::new(
            format!("dirac-kernel-insensitivity[{},n={}]", case.name.name(), case.n),
            "reduced bracket ignores the pseudo-inverse kernel choice",
            format!("gauge_norm={gauge_strong:.3e}"),
            gauge_weak,
            1e-8,
        ));
    }
    Ok(rows)
}

/// Rows spanning the out-of-range conditions of the constrained solve,
/// reconstructed by probing the (linear) map ξ ↦ U_nullᵀ B_ck ξ.
fn range_violation_rows(
    red: &crate::opmatrix::DiracReduction,
    probe_dim: usize,
) -> Vec<DVector<f64>> {
    // range_residual is a norm, not linear; recover the rows by probing
    // the underlying linear map against unit vectors.
    let mut rows: Vec<DVector<f64>> = vec![];
    let n_null = red.cc_kernel.len();
    if n_null == 0 {
        return rows;
    }
    let mut cols: Vec<DVector<f64>> = vec![];
    for j in 0..probe_dim {
        let mut e = DVector::zeros(probe_dim);
        e[j] = 1.0;
        cols.push(red.range_components(&e));
    }
    for i in 0..n_null {
        let mut r = DVector::zeros(probe_dim);
        for (j, c) in cols.iter().enumerate() {
            r[j] = c[i];
        }
        rows.push(r);
    }
    rows
}

/// Recursion identities on the symplectic leaves of the first structure.
pub fn suite_recursion(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd00d);
    let kmax = 14;
    let probe_modes = 3;

    struct Case {
        name: HierarchyName,
        k: usize,
        target_n: i32,
        tol: f64,
    }
    for case in [
        Case {
            name: HierarchyName::Benny,
            k: 1,
            target_n: 1,
            tol: 1e-8,
        },
        Case {
            name: HierarchyName::DToda,
            k: 1,
            target_n: 1,
            tol: 1e-7,
        },
        Case {
            name: HierarchyName::DToda,
            k: 2,
            target_n: 2,
            tol: 1e-7,
        },
    ] {
        let state = match case.name {
            HierarchyName::Benny => benny_probe_state(&mut rng, cfg),
            _ => dtoda_probe_state(&mut rng, cfg),
        };
        let assemble = |n: i32| -> Result<OperatorMatrix> {
            let op = hydro::builtin_operator(case.name, n)?;
            reduction::assemble_table_operator(&op, &state.fields, kmax)
        };
        let chain = opmatrix::RecursionChain::new(assemble(0)?, assemble(-1)?)?;
        let target = assemble(case.target_n)?;
        let builtin_target = hydro::builtin_operator(case.name, case.target_n)?;

        // Admissible sector: zero-mean components, in-range at each solve,
        // zero-mean nonlocal-tail arguments of the target.
        let bsz = opmatrix::basis_size(kmax);
        let mut violations: Vec<DVector<f64>> = vec![];
        for c in 0..2 {
            let mut v = DVector::zeros(2 * bsz);
            v[c * bsz] = 1.0;
            violations.push(v);
        }
        violations.extend(chain_violation_rows(&chain, case.k, 2 * bsz));
        violations.extend(reduction::tail_mean_rows(
            &builtin_target,
            &state.fields,
            kmax,
        ));

        let probes =
            admissible_probes(&mut rng, 2, kmax, probe_modes, &violations, cfg.probes.max(10));
        let mut worst: f64 = 0.0;
        for xi in &probes {
            let (got, gauges) = chain.apply(xi, case.k, 1e-6)?;
            let want = &target.mat * xi;
            worst = worst.max(opmatrix::residual_mod_span(&(got - want), &gauges));
        }
        rows.push(CheckRow::new(
            format!("recursion[{},R^{}B0=B{}]", case.name.name(), case.k, case.target_n),
            "recursion operator climbs the structures",
            format!("probes={}", probes.len()),
            worst,
            case.tol,
        ));
    }
    Ok(rows)
}

/// Violation rows of the staged solves in Rᵏ B₀: κᵀ·(B₀ pinv)ⁱ B₀ ξ = 0.
fn chain_violation_rows(
    chain: &opmatrix::RecursionChain,
    k: usize,
    dim: usize,
) -> Vec<DVector<f64>> {
    let mut rows = vec![];
    for i in 0..k {
        for kappa in &chain.kernel {
            let mut r = DVector::zeros(dim);
            for j in 0..dim {
                let mut e = DVector::zeros(dim);
                e[j] = 1.0;
                let (v, _) = match chain.apply_unchecked(&e, i) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                r[j] = kappa.dot(&v);
            }
            if r.norm() > 1e-12 {
                rows.push(r);
            }
        }
    }
    rows
}

/// Conservation along evolution with fourth-order convergence of the
/// integrator drift.
pub fn suite_conservation(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];

    // Benny: u₀ = 0.1 sin 2πx, u₋₁ ≡ 1, flow m = 2.
    let spec = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(cfg.modes.max(16));
    let state = spec.state(vec![
        FourierField::sine(1, 0.1),
        FourierField::constant(1.0),
    ])?;
    let opts = EvolveOptions {
        flow_m: 2,
        dt: 1e-3,
        t_final: 0.5,
        ..Default::default()
    };
    let traj = spec.evolve(&state, &opts)?;
    let drift = max_drift(&traj.traces);
    rows.push(CheckRow::new(
        "conservation[benny,traces]",
        "trace functionals are constants of motion",
        "m=2, T=0.5, dt=1e-3, k<=5",
        drift,
        1e-8,
    ));
    let cas = max_drift(&traj.casimirs);
    rows.push(CheckRow::new(
        "conservation[benny,casimirs]",
        "first-structure Casimirs are exactly flat",
        "means of u0, u-1",
        cas,
        1e-10,
    ));

    // dToda: u₀ = 0.1 cos 2πx, u₁ ≡ 1, flow m = 1.
    let spec = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    let state = spec.state(vec![
        FourierField::cosine(1, 0.1),
        FourierField::constant(1.0),
    ])?;
    let opts = EvolveOptions {
        flow_m: 1,
        dt: 1e-3,
        t_final: 0.5,
        ..Default::default()
    };
    let traj = spec.evolve(&state, &opts)?;
    rows.push(CheckRow::new(
        "conservation[dtoda,traces]",
        "trace functionals are constants of motion",
        "m=1, T=0.5, dt=1e-3, k<=5",
        max_drift(&traj.traces),
        1e-8,
    ));
    rows.push(CheckRow::new(
        "conservation[dtoda,casimirs]",
        "mean of u0 and of ln u1 are flat",
        "T=0.5",
        max_drift(&traj.casimirs),
        1e-10,
    ));

    // Fourth-order convergence of the drift. The invariant drift
    // approaches its C·dt⁴ asymptote from below (ratios climb 10 → 12.5 →
    // 14.4 → 15.3 per halving, identically across seeds), so the ratio is
    // measured on the two finest stable halvings of a small ensemble,
    // with the drift taken as the trajectory maximum.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0dde);
    let spec = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(32);
    let states: Vec<FieldState> = (0..3)
        .map(|_| {
            let mut s = spec.random_state(&mut rng, 1, 0.05);
            s.fields[1] = FourierField::constant(1.0).add(&s.fields[1]);
            s
        })
        .collect();
    let drift_at = |dt: f64| -> Result<f64> {
        let mut mean = 0.0;
        for state in &states {
            let opts = EvolveOptions {
                flow_m: 2,
                dt,
                t_final: 0.3,
                sample_every: 10,
                ..Default::default()
            };
            let traj = spec.evolve(state, &opts)?;
            let first = traj.traces[0].clone();
            let mut worst = 0.0f64;
            for row in &traj.traces {
                let tot: f64 = row.iter().zip(&first).map(|(a, b)| (a - b).abs()).sum();
                worst = worst.max(tot);
            }
            mean += worst / states.len() as f64;
        }
        Ok(mean)
    };
    let (d0, d2) = (drift_at(1e-3)?, drift_at(2.5e-4)?);
    let ratio = (d0 / d2.max(1e-300)).powf(0.5);
    rows.push(CheckRow::new(
        "conservation[order]",
        "trace drift converges at fourth order",
        format!(
            "per-halving ratio {ratio:.2} from drift(1e-3)={d0:.3e}, drift(2.5e-4)={d2:.3e}"
        ),
        (ratio - 16.0).abs(),
        4.0,
    ));
    Ok(rows)
}

fn max_drift(series: &[Vec<f64>]) -> f64 {
    if series.is_empty() || series[0].is_empty() {
        return 0.0;
    }
    let first = &series[0];
    let mut worst: f64 = 0.0;
    for row in series {
        for (a, b) in row.iter().zip(first) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Metric determinants and degeneracy flags against pointwise analytic
/// evaluation.
pub fn suite_diagnostics(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xe77e);
    let grid = 4 * cfg.modes.max(16) + 1;

    // Benny second structure: det g = 4u₋₁ − u₀² = −Δ.
    let state = benny_probe_state(&mut rng, cfg);
    let op = hydro::builtin_operator(HierarchyName::Benny, 0)?;
    let det = op.metric_det_grid(&state, grid);
    let (gu0, gum1) = (state.fields[0].eval_grid(grid), state.fields[1].eval_grid(grid));
    let mut worst: f64 = 0.0;
    for j in 0..grid {
        let delta = gu0[j] * gu0[j] - 4.0 * gum1[j];
        worst = worst.max((det[j] + delta).abs());
    }
    rows.push(CheckRow::new(
        "metric[benny,B0]",
        "metric determinant equals the discriminant",
        "det g = -(u0^2 - 4u-1)",
        worst,
        1e-12,
    ));
    // Degenerate exactly on u₀² = 4u₋₁.
    let deg_state = FieldState {
        fields: vec![
            FourierField::constant(2.0),
            FourierField::constant(1.0),
        ],
        time: 0.0,
    };
    let det = op.metric_det_grid(&deg_state, grid);
    let flat = det.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    rows.push(CheckRow::new(
        "metric[benny,degenerate]",
        "discriminant zero flags a degenerate metric",
        "u0=2, u-1=1",
        flat,
        1e-12,
    ));

    // dToda: det g(B₋₁) = −u₁²; B₀/B₁ degeneracy governed by w₁w₂.
    let state = dtoda_probe_state(&mut rng, cfg);
    let op = hydro::builtin_operator(HierarchyName::DToda, -1)?;
    let det = op.metric_det_grid(&state, grid);
    let gu1 = state.fields[1].eval_grid(grid);
    let mut worst: f64 = 0.0;
    for j in 0..grid {
        worst = worst.max((det[j] + gu1[j] * gu1[j]).abs());
    }
    rows.push(CheckRow::new(
        "metric[dtoda,B-1]",
        "metric determinant is minus the square of u1",
        "det g = -u1^2",
        worst,
        1e-12,
    ));
    let spec = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    for n in [0, 1] {
        let op = hydro::builtin_operator(HierarchyName::DToda, n)?;
        let det = op.metric_det_grid(&state, grid);
        let ri = spec.riemann_invariants(&state)?;
        let (g1, g2) = (ri.w1.eval_grid(grid), ri.w2.eval_grid(grid));
        let mut worst: f64 = 0.0;
        for j in 0..grid {
            let w12 = g1[j] * g2[j];
            let want = match n {
                0 => -gu1[j] * gu1[j] * w12,
                _ => -gu1[j] * gu1[j] * w12 * w12,
            };
            worst = worst.max((det[j] - want).abs());
        }
        rows.push(CheckRow::new(
            format!("metric[dtoda,B{n}]"),
            "degeneracy locus is the vanishing of the invariants' product",
            "det g vs -u1^2 (w1 w2)^p",
            worst,
            1e-10,
        ));
    }

    // Riemann invariants: values and flags.
    let s = spec.state(vec![FourierField::zero(), FourierField::constant(1.0)])?;
    let ri = spec.riemann_invariants(&s)?;
    let d = (ri.w1.mean() + 2.0).abs() + (ri.w2.mean() - 2.0).abs();
    rows.push(CheckRow::new(
        "riemann[constants]",
        "invariants of the flat state",
        "u0=0, u1=1 -> (-2, 2)",
        d,
        1e-14,
    ));
    rows.push(CheckRow::new(
        "riemann[hyperbolic]",
        "positive u1 gives strict hyperbolicity",
        format!("flag={}", ri.strictly_hyperbolic),
        if ri.strictly_hyperbolic { 0.0 } else { 1.0 },
        0.5,
    ));
    let s = spec.state(vec![
        FourierField::constant(2.0),
        FourierField::constant(1.0),
    ])?;
    let ri = spec.riemann_invariants(&s)?;
    rows.push(CheckRow::new(
        "riemann[degenerate]",
        "u0 = 2u1 lands on the degeneracy locus",
        format!("flag={}", ri.degenerate),
        if ri.degenerate { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(rows)
}

/// Cyclic Jacobi sum of the bracket {F,G}(u) = ⟨δF, B(u)·δG⟩ induced on
/// field functionals by a builtin operator, with finite-difference
/// variational derivatives of the inner bracket. Nonlocal tails act
/// through the admissible-sector projection under probing.
fn induced_bracket_jacobi(
    spec: &HierarchySpec,
    n: i32,
    state: &FieldState,
    rng: &mut impl Rng,
) -> Result<f64> {
    let op = hydro::builtin_operator(spec.name, n)?;
    let ncomp = op.dim;
    let pair = |xi: &[FourierField], eta: &[FourierField]| -> f64 {
        xi.iter().zip(eta).map(|(a, b)| a.product_mean(b)).sum()
    };
    let covector = |rng: &mut dyn rand::RngCore| -> Vec<FourierField> {
        (0..ncomp)
            .map(|_| FourierField::random(&mut &mut *rng, 2, 1.0))
            .collect()
    };
    let (a, b, c) = (covector(rng), covector(rng), covector(rng));
    let bracket = |x: &[FourierField], y: &[FourierField], u: &FieldState| -> Result<f64> {
        Ok(pair(x, &op.apply_on_sector(u, y)?))
    };
    let mut cyclic = 0.0;
    let mut scale = 1.0f64;
    for (x, y, z) in [(&a, &b, &c), (&b, &c, &a), (&c, &a, &b)] {
        // δ{F_x, F_y} by spectral finite differences, then paired into the
        // outer bracket against z.
        let (x2, y2) = (x.clone(), y.clone());
        let op2 = op.clone();
        let inner = hydro::FieldFunctional::Custom(std::sync::Arc::new(move |u: &FieldState| {
            let mut acc = 0.0;
            let by = op2.apply_on_sector(u, &y2)?;
            for (xi, byi) in x2.iter().zip(&by) {
                acc += xi.product_mean(byi);
            }
            Ok(acc)
        }));
        let grad = hydro::variational_derivative(spec, &inner, state, 8, 1e-6)?;
        let outer = bracket(&grad, z, state)?;
        cyclic += outer;
        scale = scale.max(outer.abs());
    }
    Ok(cyclic.abs() / scale)
}

/// Flow-consistency: the builtin operators applied to trace-functional
/// variational derivatives reproduce the Hamiltonian fields in pattern
/// coordinates, and the Casimir covectors sit in the kernels.
pub fn suite_operator_flows(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf0f0);

    struct Case {
        name: HierarchyName,
        ns: Vec<i32>,
    }
    for case in [
        Case {
            name: HierarchyName::Benny,
            ns: vec![-1],
        },
        Case {
            name: HierarchyName::DToda,
            ns: vec![-1, 0, 1],
        },
    ] {
        let spec = HierarchySpec::new(case.name).with_mode_cap(cfg.modes.max(16));
        let tower = BracketTower::new(spec.context());
        let state = match case.name {
            HierarchyName::Benny => benny_probe_state(&mut rng, cfg),
            _ => dtoda_probe_state(&mut rng, cfg),
        };
        let l = spec.to_element(&state);
        for &n in &case.ns {
            let mut worst: f64 = 0.0;
            for k in 2..=4u32 {
                let xi = hydro::trace_variational_derivative(&spec, k, &state)?;
                let want = tower.ham_field(&Functional::trace_monomial(k), &l, n)?;
                let want_fields = spec.tangent_coords(&want, 1e-9)?;
                let got = hydro::builtin_operator(case.name, n)?.apply(&state, &xi)?;
                for (a, b) in got.iter().zip(&want_fields) {
                    worst = worst.max(a.sub(b).l2_norm());
                }
            }
            rows.push(CheckRow::new(
                format!("flow-consistency[{},n={n}]", case.name.name()),
                "operator route equals the Hamiltonian-field route",
                "trace functionals k=2..4",
                worst,
                1e-8,
            ));
        }
    }

    // Casimir kernels.
    let state = benny_probe_state(&mut rng, cfg);
    let op = hydro::builtin_operator(HierarchyName::Benny, -1)?;
    let mat = reduction::assemble_table_operator(&op, &state.fields, 8)?;
    let kernel = mat.kernel(1e-10);
    rows.push(CheckRow::new(
        "casimir[benny,B-1]",
        "kernel is spanned by the constant covectors",
        format!("dim={}", kernel.len()),
        (kernel.len() as f64 - 2.0).abs(),
        0.5,
    ));
    rows.push(CheckRow::new(
        "skew[benny,B-1]",
        "assembled first structure is skew-symmetric",
        "kmax=8",
        mat.skew_defect(),
        1e-12,
    ));

    // 1/u₁ has an infinite Fourier tail; a mild state keeps the truncated
    // reciprocal exact to well below the tolerance.
    let spec_t = HierarchySpec::new(HierarchyName::DToda).with_mode_cap(cfg.modes.max(16));
    let state = FieldState {
        fields: vec![
            FourierField::random(&mut rng, 1, 0.1),
            FourierField::constant(1.0).add(&FourierField::random(&mut rng, 1, 0.05)),
        ],
        time: 0.0,
    };
    let op = hydro::builtin_operator(HierarchyName::DToda, -1)?;
    let u1 = &state.fields[1];
    let u1_inv = u1
        .recip(spec_t.mode_cap, 1e-9)
        .ok_or_else(|| crate::error::Error::NotInvertible("u1 touches zero".into()))?;
    let mut worst: f64 = 0.0;
    for xi in [
        vec![FourierField::constant(1.0), FourierField::zero()],
        vec![FourierField::zero(), u1_inv],
    ] {
        let out = op.apply(&state, &xi)?;
        for f in out {
            worst = worst.max(f.l2_norm());
        }
    }
    rows.push(CheckRow::new(
        "casimir[dtoda,B-1]",
        "mean of u0 and of ln u1 generate no flow",
        "covectors (1,0), (0,1/u1)",
        worst,
        1e-9,
    ));

    // Jacobi identity of the induced brackets on field functionals. The
    // nonlocal fourth lattice structure is excluded: random linear
    // functionals violate its zero-mean tail precondition at perturbed
    // states (the only universally admissible linear covectors span one
    // dimension, where the cyclic sum is vacuous); its Poisson property
    // is certified by the Dirac-reduction cross-check instead.
    for (name, ns) in [
        (HierarchyName::Benny, vec![-1, 0, 1]),
        (HierarchyName::DToda, vec![-1, 0, 1]),
    ] {
        let spec = HierarchySpec::new(name).with_mode_cap(cfg.modes.max(16));
        for n in ns {
            let mut worst: f64 = 0.0;
            for _ in 0..2 {
                let state = match name {
                    HierarchyName::Benny => benny_probe_state(&mut rng, cfg),
                    _ => dtoda_probe_state(&mut rng, cfg),
                };
                worst = worst.max(induced_bracket_jacobi(&spec, n, &state, &mut rng)?);
            }
            rows.push(CheckRow::new(
                format!("operator-jacobi[{},B{n}]", name.name()),
                "induced bracket on field functionals satisfies Jacobi",
                "fd variational derivatives",
                worst,
                1e-5,
            ));
        }
    }
    Ok(rows)
}

/// Suite registry used by the CLI.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    match name {
        "jacobi" => {
            let mut rows = suite_rbracket(cfg)?;
            rows.extend(suite_jacobi(cfg)?);
            Ok(rows)
        }
        "compat" => suite_compat(cfg),
        "virasoro" => suite_virasoro(cfg),
        "liederiv" => suite_liederiv(cfg),
        "involution" => suite_involution(cfg),
        "mult" => suite_mult(cfg),
        "inversion" => suite_inversion(cfg),
        "flows" => suite_flows(cfg),
        other => Err(crate::error::Error::Config(format!(
            "unknown verify suite '{other}' (expected jacobi, compat, virasoro, \
             liederiv, involution, mult, inversion, or flows)"
        ))),
    }
}

pub const SUITE_NAMES: [&str; 8] = [
    "jacobi",
    "compat",
    "virasoro",
    "liederiv",
    "involution",
    "mult",
    "inversion",
    "flows",
];
