//! Numerical certificates for the quantitative statements behind the dichotomy:
//! the gradient bound on the auxiliary quotient `Q`, positively invariant cones around
//! a translated heteroclinic, the strip-exit time bound, the late-life sets, the
//! rescaled blowup variables and the empirical nonexistence constant.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    heteroclinic, integrate_orbit_with, linear_fit, rhs, seed_unstable, Orbit, OrbitEventKind, OrbitOptions,
    SeedDescriptor,
};
use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate_adaptive, Direction, EventSpec, Guards, StopReason};
use crate::types::{PhaseState, Vec4};

/// Bound on `∂x Q`.
pub const C0: f64 = 0.99;
/// Slack on the `∂x Q` bound.
pub const QGRAD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub s: Option<f64>,
    pub values: Vec<f64>,
}

impl Witness {
    pub fn new(label: impl Into<String>, s: Option<f64>, values: &[f64]) -> Self {
        Self { label: label.into(), s, values: values.to_vec() }
    }
}

/// Outcome of one verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub id: String,
    pub bound_claimed: f64,
    pub bound_observed: f64,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub resolution: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
}

impl CertificateReport {
    fn new(id: &str, bound_claimed: f64, bound_observed: f64, pass: bool) -> Self {
        Self {
            id: id.to_string(),
            bound_claimed,
            bound_observed,
            pass,
            witnesses: Vec::new(),
            resolution: BTreeMap::new(),
            metrics: BTreeMap::new(),
        }
    }
}

pub fn f_aux(y: f64) -> f64 {
    let (s, c) = (2.0 * y).sin_cos();
    0.5 * s * (3.0 * c - 2.0)
}

/// `min f = -(1/12)·sqrt(169 + 38·sqrt(19))`.
pub fn f_min_closed_form() -> f64 {
    -(169.0 + 38.0 * 19f64.sqrt()).sqrt() / 12.0
}

/// Grid minimum of [`f_aux`] over one period, polished by golden section.
pub fn f_min_numeric(n: usize) -> (f64, f64) {
    let n = n.max(16);
    let h = PI / n as f64;
    let i = (0..n).min_by(|&a, &b| f_aux(a as f64 * h).total_cmp(&f_aux(b as f64 * h))).unwrap_or(0);
    let y = golden_max(|y| -f_aux(y), (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
    (f_aux(y), y)
}

pub fn q_func(x: f64, fy: f64) -> f64 {
    let (s, c) = (2.0 * x).sin_cos();
    (2.0 * fy + 9.0 * s) / (14.0 + 6.0 * c)
}

pub fn q_grad(x: f64, fy: f64) -> f64 {
    let (s, c) = (2.0 * x).sin_cos();
    let den = 7.0 + 3.0 * c;
    3.0 * (9.0 + 21.0 * c + 2.0 * fy * s) / (den * den)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Range of `f(y)` values used for the `Q` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FyRange {
    /// `[f_min, -f_min]` from the closed-form minimum.
    Tight,
    /// `[-2, 2]`.
    Coarse,
    Fixed(f64),
}

impl FyRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            FyRange::Tight => (f_min_closed_form(), -f_min_closed_form()),
            FyRange::Coarse => (-2.0, 2.0),
            FyRange::Fixed(v) => (v, v),
        }
    }
}

/// Maximize `∂x Q` over `x ∈ (-π/2, π/2]` and the chosen `f(y)` range on a
/// `grid_n × fy_n` grid, then polish the best cells by alternating golden sections.
pub fn verify_qgrad_bound(grid_n: usize, fy_n: usize, range: FyRange) -> Result<CertificateReport> {
    if grid_n < 16 || fy_n < 1 {
        return Err(invalid("grid too small for the Q-gradient certificate"));
    }
    let (lo, hi) = range.bounds();
    let hx = PI / grid_n as f64;
    let hf = if fy_n > 1 { (hi - lo) / (fy_n - 1) as f64 } else { 0.0 };
    let fys: Vec<f64> = (0..fy_n).map(|j| if fy_n > 1 { lo + hf * j as f64 } else { lo }).collect();
    // q_grad = A(x) + B(x)·fy
    let cells: Vec<(f64, usize, usize)> = (1..=grid_n)
        .into_par_iter()
        .map(|i| {
            let x = -FRAC_PI_2 + hx * i as f64;
            let (s, c) = (2.0 * x).sin_cos();
            let den = (7.0 + 3.0 * c).powi(2);
            let a = 3.0 * (9.0 + 21.0 * c) / den;
            let b = 6.0 * s / den;
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (j, fy) in fys.iter().enumerate() {
                let v = a + b * fy;
                if v > best.0 {
                    best = (v, j);
                }
            }
            (best.0, i, best.1)
        })
        .collect();
    let grid_max = cells.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let mut ranked = cells;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (_, i0, j0) = ranked[0];
    let mut best = (grid_max, -FRAC_PI_2 + hx * i0 as f64, fys[j0]);
    for &(_, i, j) in ranked.iter().take(8) {
        let xa = -FRAC_PI_2 + hx * (i as f64 - 1.0);
        let xb = (-FRAC_PI_2 + hx * (i as f64 + 1.0)).min(FRAC_PI_2);
        let fa = (fys[j] - hf).max(lo);
        let fb = (fys[j] + hf).min(hi);
        let (mut x, mut fy) = (-FRAC_PI_2 + hx * i as f64, fys[j]);
        for _ in 0..4 {
            x = golden_max(|t| q_grad(t, fy), xa, xb);
            if fb > fa {
                fy = golden_max(|t| q_grad(x, t), fa, fb);
            }
        }
        let v = q_grad(x, fy);
        if v > best.0 {
            best = (v, x, fy);
        }
    }
    let observed = best.0;
    let mut rep = CertificateReport::new("qgrad-bound", C0, observed, observed <= C0 + QGRAD_SLACK);
    rep.witnesses.push(Witness::new("argmax (x, fy)", None, &[best.1, best.2]));
    rep.resolution.insert("grid_x".into(), grid_n as f64);
    rep.resolution.insert("grid_fy".into(), fy_n as f64);
    rep.metrics.insert("grid_max".into(), grid_max);
    rep.metrics.insert("fy_lo".into(), lo);
    rep.metrics.insert("fy_hi".into(), hi);
    let (fmin, ymin) = f_min_numeric(grid_n);
    rep.metrics.insert("f_min_closed_form".into(), f_min_closed_form());
    rep.metrics.insert("f_min_numeric".into(), fmin);
    rep.metrics.insert("f_min_argmin".into(), ymin);
    rep.metrics.insert("f_min_error".into(), (fmin - f_min_closed_form()).abs());
    Ok(rep)
}

/// Membership in the product cones built from `Λ+ = {b ≥ 2a, a ≥ 0}` and `Λ- = -Λ+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeTag {
    pub in_w_plus: bool,
    pub in_w_minus: bool,
    pub in_w_plus_star: bool,
    pub in_w_minus_star: bool,
}

fn in_lambda_plus(a: f64, b: f64) -> bool {
    a >= 0.0 && b >= 2.0 * a
}

fn in_lambda_minus(a: f64, b: f64) -> bool {
    a <= 0.0 && b <= 2.0 * a
}

pub fn cone_membership(x: &Vec4) -> ConeTag {
    let in_w_plus = in_lambda_plus(x[0], x[2]) && in_lambda_plus(x[1], x[3]);
    let in_w_minus = in_lambda_minus(x[0], x[2]) && in_lambda_minus(x[1], x[3]);
    ConeTag {
        in_w_plus,
        in_w_minus,
        in_w_plus_star: in_w_plus && x[2] != 0.0,
        in_w_minus_star: in_w_minus && x[2] != 0.0,
    }
}

/// `Y` translated so that its first component equals `y1_at_zero` at `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslatedHeteroclinic {
    pub shift: f64,
}

impl TranslatedHeteroclinic {
    pub fn through(y1_at_zero: f64) -> Self {
        Self { shift: (0.5 * y1_at_zero).tan().ln() }
    }

    pub fn at(&self, s: f64) -> Vec4 {
        heteroclinic(s + self.shift).phi
    }
}

/// Initial deviation `X(0)` in `W+*` with `X1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSample {
    pub key: usize,
    pub x: Vec4,
}

impl ConeSample {
    /// `X = (0, u·x3, x3, 2u·x3 + v·x3)` with `u, v ≥ 0`.
    pub fn from_params(key: usize, x3: f64, u: f64, v: f64) -> Self {
        let x2 = u * x3;
        Self { key, x: [0.0, x2, x3, 2.0 * x2 + v * x3] }
    }
}

/// Seeded draws with `x3` log-uniform in `[1e-3, 0.5]` and `u, v` uniform in `[0, 1]`.
pub fn draw_cone_samples(n: usize, rng_seed: u64) -> Vec<ConeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n)
        .map(|key| {
            let x3 = (1e-3f64.ln() + rng.gen::<f64>() * (0.5f64 / 1e-3).ln()).exp();
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            ConeSample::from_params(key, x3, u, v)
        })
        .collect()
}

/// Settings for the cone and strip-exit runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeRunOptions {
    pub tol: f64,
    pub horizon: f64,
    /// First component of the translated heteroclinic at `s0 = 0`.
    pub y1_at_start: f64,
    /// Dense samples checked per accepted step.
    pub dense_per_step: usize,
}

impl ConeRunOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, horizon: 60.0, y1_at_start: 1e-2, dense_per_step: 4 }
    }
}

/// Result of evolving `Φ = ±(Y⁰ + X)` until `|Φ3| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSampleOutcome {
    pub sample: ConeSample,
    pub mirrored: bool,
    pub s_exit: Option<f64>,
    pub exit_bound: f64,
    pub checked_points: usize,
    pub cone_violation: Option<(f64, Vec4)>,
    /// Smallest `∂s X4 - 4(X3 - c0 X1)` (sign-adjusted) seen at nodes.
    pub min_ineq_margin: f64,
    pub ineq_violation: Option<(f64, Vec4)>,
}

impl ConeSampleOutcome {
    pub fn clean(&self) -> bool {
        self.cone_violation.is_none() && self.ineq_violation.is_none() && self.s_exit.is_some()
    }
}

/// Evolve one sample (or its mirror image) and check cone membership of the deviation.
pub fn run_cone_sample(sample: &ConeSample, mirrored: bool, opts: &ConeRunOptions) -> Result<ConeSampleOutcome> {
    let y0 = TranslatedHeteroclinic::through(opts.y1_at_start);
    let sg = if mirrored { -1.0 } else { 1.0 };
    let base = y0.at(0.0);
    let phi0: Vec4 = std::array::from_fn(|i| sg * (base[i] + sample.x[i]));
    let level = sg;
    let guards = Guards::blowup(1e6).with_event(
        EventSpec::new(0, move |y: &Vec4| y[2] - level)
            .direction(if mirrored { Direction::Falling } else { Direction::Rising })
            .terminal(),
    );
    let traj = integrate_adaptive(rhs, PhaseState::new(0.0, phi0), opts.horizon, opts.tol, &guards)?;
    let s_exit = match traj.stop_reason() {
        StopReason::Event(0) => Some(traj.last().s),
        _ => None,
    };
    let deviation = |s: f64, phi: &Vec4| -> Vec4 {
        let y = y0.at(s);
        std::array::from_fn(|i| phi[i] - sg * y[i])
    };
    let in_cone = |x: &Vec4| {
        let t = cone_membership(x);
        if mirrored {
            t.in_w_minus_star
        } else {
            t.in_w_plus_star
        }
    };
    let mut out = ConeSampleOutcome {
        sample: *sample,
        mirrored,
        s_exit,
        exit_bound: (1.5 / sample.x[2]).sqrt(),
        checked_points: 0,
        cone_violation: None,
        min_ineq_margin: f64::INFINITY,
        ineq_violation: None,
    };
    let states = traj.states();
    for (k, st) in states.iter().enumerate() {
        let x = deviation(st.s, &st.phi);
        out.checked_points += 1;
        if out.cone_violation.is_none() && !in_cone(&x) {
            out.cone_violation = Some((st.s, x));
        }
        let dx4 = rhs(&st.phi)[3] - sg * rhs(&y0.at(st.s))[3];
        let margin = sg * (dx4 - 4.0 * (x[2] - C0 * x[0]));
        out.min_ineq_margin = out.min_ineq_margin.min(margin);
        if margin < 0.0 && out.ineq_violation.is_none() {
            out.ineq_violation = Some((st.s, x));
        }
        if k + 1 < states.len() {
            let (a, b) = (st.s, states[k + 1].s);
            for j in 1..opts.dense_per_step {
                let s = a + (b - a) * j as f64 / opts.dense_per_step as f64;
                if let Some(phi) = traj.state_at(s) {
                    out.checked_points += 1;
                    let x = deviation(s, &phi);
                    if out.cone_violation.is_none() && !in_cone(&x) {
                        out.cone_violation = Some((s, x));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// All outcomes of a cone suite, sorted by `(mirrored, key)`.
pub fn run_cone_suite(samples: &[ConeSample], opts: &ConeRunOptions) -> Result<Vec<ConeSampleOutcome>> {
    let jobs: Vec<(ConeSample, bool)> =
        [false, true].iter().flat_map(|&m| samples.iter().map(move |s| (*s, m))).collect();
    jobs.par_iter().map(|(s, m)| run_cone_sample(s, *m, opts)).collect()
}

/// Cone invariance for `n_samples` seeded draws and their mirror images; violating
/// samples are re-run at `tol/100` to separate integrator error from genuine failure.
pub fn check_cone_invariance(n_samples: usize, rng_seed: u64, opts: &ConeRunOptions) -> Result<CertificateReport> {
    if n_samples < 1 {
        return Err(invalid("need at least one sample"));
    }
    let samples = draw_cone_samples(n_samples, rng_seed);
    let outcomes = run_cone_suite(&samples, opts)?;
    Ok(cone_report(&outcomes, opts))
}

pub fn cone_report(outcomes: &[ConeSampleOutcome], opts: &ConeRunOptions) -> CertificateReport {
    let mut violations = 0usize;
    let mut tolerance_induced = 0usize;
    let mut witnesses = Vec::new();
    for o in outcomes {
        if o.cone_violation.is_none() && o.ineq_violation.is_none() {
            continue;
        }
        violations += 1;
        let (s, x) = o.cone_violation.or(o.ineq_violation).expect("violation present");
        let label = if o.cone_violation.is_some() { "cone" } else { "differential inequality" };
        let finer = ConeRunOptions { tol: opts.tol / 100.0, ..*opts };
        let rerun_clean = run_cone_sample(&o.sample, o.mirrored, &finer)
            .map(|r| r.cone_violation.is_none() && r.ineq_violation.is_none())
            .unwrap_or(false);
        if rerun_clean {
            tolerance_induced += 1;
        }
        let tag = if rerun_clean { "tolerance-induced" } else { "persistent" };
        witnesses.push(Witness::new(
            format!("{label} violation, sample {} mirrored={} ({tag})", o.sample.key, o.mirrored),
            Some(s),
            &x,
        ));
    }
    let missing_exit = outcomes.iter().filter(|o| o.s_exit.is_none()).count();
    let mut rep = CertificateReport::new("cone-invariance", 0.0, violations as f64, violations == 0);
    rep.witnesses = witnesses;
    rep.resolution.insert("tol".into(), opts.tol);
    rep.resolution.insert("samples".into(), outcomes.len() as f64);
    rep.resolution.insert("dense_per_step".into(), opts.dense_per_step as f64);
    rep.metrics.insert("checked_points".into(), outcomes.iter().map(|o| o.checked_points).sum::<usize>() as f64);
    rep.metrics.insert("tolerance_induced".into(), tolerance_induced as f64);
    rep.metrics.insert("runs_without_exit".into(), missing_exit as f64);
    rep.metrics.insert(
        "min_inequality_margin".into(),
        outcomes.iter().map(|o| o.min_ineq_margin).fold(f64::INFINITY, f64::min),
    );
    rep
}

/// First `|Φ3| = 1` crossing no later than `s0 + sqrt(3/(2 X3(0)))`.
pub fn check_exit_bound(outcomes: &[ConeSampleOutcome], slack: f64) -> CertificateReport {
    let mut worst_ratio = 0.0f64;
    let mut witnesses = Vec::new();
    for o in outcomes {
        let ok = matches!(o.s_exit, Some(s) if s <= o.exit_bound + slack);
        let ratio = o.s_exit.map_or(f64::INFINITY, |s| s / o.exit_bound);
        worst_ratio = worst_ratio.max(ratio);
        if !ok {
            witnesses.push(Witness::new(
                format!("sample {} mirrored={}", o.sample.key, o.mirrored),
                o.s_exit,
                &[o.sample.x[2], o.exit_bound],
            ));
        }
    }
    let pass = witnesses.is_empty() && !outcomes.is_empty();
    let mut rep = CertificateReport::new("strip-exit-time", 1.0, worst_ratio, pass);
    rep.witnesses = witnesses;
    rep.resolution.insert("samples".into(), outcomes.len() as f64);
    rep.resolution.insert("slack".into(), slack);
    rep
}

/// Default `σ` for the set `S1`.
pub const DEFAULT_SIGMA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LateLife {
    pub in_s1: bool,
    pub in_s2: bool,
}

/// `S1 = {Φ2 ≥ σ, Φ3 ≥ 1, Φ4 ≥ 0}`, `S2 = {Φ3 ≥ 1, Φ4 ≥ 0}`.
pub fn late_life_invariance(state: &PhaseState, sigma: f64) -> LateLife {
    let p = state.phi;
    let in_s2 = p[2] >= 1.0 && p[3] >= 0.0;
    LateLife { in_s1: in_s2 && p[1] >= sigma, in_s2 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LateLifeSweep {
    /// `+1` checks the sets themselves, `-1` their mirror images.
    pub sign: i8,
    pub s2_entry: Option<f64>,
    pub s1_entry: Option<f64>,
    pub s2_exit: Option<f64>,
    pub s1_exit: Option<f64>,
}

impl LateLifeSweep {
    pub fn invariant(&self) -> bool {
        self.s1_exit.is_none() && self.s2_exit.is_none()
    }
}

/// Forward invariance of `S1`, `S2` (or their mirrors) along the accepted nodes of an orbit.
pub fn late_life_sweep(orbit: &Orbit, sigma: f64, sign: i8) -> LateLifeSweep {
    let sg = sign as f64;
    let mut out = LateLifeSweep { sign, s2_entry: None, s1_entry: None, s2_exit: None, s1_exit: None };
    for st in orbit.trajectory.states() {
        let m = late_life_invariance(&PhaseState::new(st.s, st.phi.map(|v| sg * v)), sigma);
        match (out.s2_entry, m.in_s2) {
            (None, true) => out.s2_entry = Some(st.s),
            (Some(_), false) if out.s2_exit.is_none() => out.s2_exit = Some(st.s),
            _ => {}
        }
        match (out.s1_entry, m.in_s1) {
            (None, true) => out.s1_entry = Some(st.s),
            (Some(_), false) if out.s1_exit.is_none() => out.s1_exit = Some(st.s),
            _ => {}
        }
    }
    out
}

/// Minimum number of tail samples with `|Φ4| > 1`.
pub const MIN_TAIL: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupDiagnostics {
    pub sign: i8,
    pub tail_samples: usize,
    pub fit_samples: usize,
    /// Extrapolated blowup time.
    pub s_star: f64,
    /// Slope of `log|Φ4|` against `log(s* - s)`.
    pub slope: f64,
    pub slope_r2: f64,
    /// Slope of `sign·Φ1` against `-log(s* - s)`.
    pub phi1_log_rate: f64,
    pub phi1_r2: f64,
    pub z1_range: (f64, f64),
    pub z2_range: (f64, f64),
}

impl BlowupDiagnostics {
    pub fn z_confined(&self) -> bool {
        let ok = |r: (f64, f64)| r.0 > 0.0 && r.1.is_finite() && r.0 <= r.1;
        ok(self.z1_range) && ok(self.z2_range)
    }
}

/// Tail analysis of a blowup orbit: blowup time by profile least squares on the last
/// 30% of the tail, the `Φ4` exponent, the logarithmic growth of `Φ1`, and the ranges of
/// `z1 = Φ2/Φ4^{1/3}`, `z2 = Φ3/Φ4^{2/3}` over the last decade of `Φ4`.
pub fn blowup_diagnostics(orbit: &Orbit) -> Result<BlowupDiagnostics> {
    let states = orbit.trajectory.states();
    let last = states.last().expect("trajectory has a start state");
    let sign: i8 = if last.phi[3] >= 0.0 { 1 } else { -1 };
    let sg = sign as f64;
    let start = states.iter().rposition(|st| sg * st.phi[3] <= 1.0).map_or(0, |i| i + 1);
    let tail: Vec<(f64, Vec4)> = states[start..].iter().map(|st| (st.s, st.phi.map(|v| sg * v))).collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientTail { have: tail.len(), needed: MIN_TAIL });
    }
    let nfit = ((tail.len() as f64 * 0.3).ceil() as usize).max(10);
    let fit = &tail[tail.len() - nfit..];
    let s_last = fit[fit.len() - 1].0;
    let span = (s_last - tail[0].0).max(1e-6);
    let sse = |delta: f64| -> f64 {
        let s_star = s_last + delta;
        let pts: Vec<(f64, f64)> = fit.iter().map(|(s, p)| ((s_star - s).ln(), p[3].ln())).collect();
        let (a, b, _) = linear_fit(&pts);
        pts.iter().map(|(x, y)| (y - a * x - b).powi(2)).sum()
    };
    // log-spaced scan of the offset, then golden polish in log(offset)
    let lo = (span * 1e-10).ln();
    let hi = span.ln();
    let m = 400;
    let grid: Vec<f64> = (0..=m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect();
    let kbest = (0..=m).min_by(|&a, &b| sse(grid[a].exp()).total_cmp(&sse(grid[b].exp()))).unwrap_or(0);
    let a = grid[kbest.saturating_sub(1)];
    let b = grid[(kbest + 1).min(m)];
    let t = golden_max(|t| -sse(t.exp()), a, b);
    let s_star = s_last + t.exp();

    let pts: Vec<(f64, f64)> = fit.iter().map(|(s, p)| ((s_star - s).ln(), p[3].ln())).collect();
    let (slope, _, slope_r2) = linear_fit(&pts);
    let pts1: Vec<(f64, f64)> = fit.iter().map(|(s, p)| (-(s_star - s).ln(), p[0])).collect();
    let (phi1_log_rate, _, phi1_r2) = linear_fit(&pts1);

    let p4max = tail.iter().map(|(_, p)| p[3]).fold(0.0, f64::max);
    let mut z1_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut z2_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, p) in tail.iter().filter(|(_, p)| p[3] >= 0.1 * p4max) {
        let z1 = p[1] / p[3].cbrt();
        let z2 = p[2] / p[3].cbrt().powi(2);
        z1_range = (z1_range.0.min(z1), z1_range.1.max(z1));
        z2_range = (z2_range.0.min(z2), z2_range.1.max(z2));
    }
    Ok(BlowupDiagnostics {
        sign,
        tail_samples: tail.len(),
        fit_samples: nfit,
        s_star,
        slope,
        slope_r2,
        phi1_log_rate,
        phi1_r2,
        z1_range,
        z2_range,
    })
}

/// How seeds are spread around the origin for the nonexistence-constant sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedFamily {
    /// `seed_unstable(ε cos θ, ε sin θ)`.
    UniformAngles,
    /// `ε cos θ·v1 + ε³ sin θ·v3`, which keeps the fast-direction weight comparable to the
    /// nonlinear manifold correction as `ε` shrinks.
    ResonantScaled,
}

fn family_seed(family: SeedFamily, eps: f64, theta: f64) -> Result<PhaseState> {
    match family {
        SeedFamily::UniformAngles => seed_unstable(eps * theta.cos(), eps * theta.sin()),
        SeedFamily::ResonantScaled => {
            let (a, b) = (eps * theta.cos(), eps.powi(3) * theta.sin());
            Ok(PhaseState::new(0.0, [a + b, a + 3.0 * b, a + 9.0 * b, a + 27.0 * b]))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KOptions {
    pub family: SeedFamily,
    pub span: f64,
    pub tol: f64,
    pub blowup_norm: f64,
}

impl Default for KOptions {
    fn default() -> Self {
        Self { family: SeedFamily::UniformAngles, span: 100.0, tol: 1e-10, blowup_norm: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRung {
    pub eps: f64,
    /// Largest `|Φ1|` at a `Φ2 = 0` event.
    pub k_emp: f64,
    pub k_angle: f64,
    /// Largest `|(Φ1, Φ2)|` at a first `|Φ3| = 1` crossing.
    pub c_emp: f64,
    pub c_angle: f64,
    pub zero_events: usize,
    pub exits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub rungs: Vec<KRung>,
    pub k_rel_changes: Vec<f64>,
    pub c_rel_changes: Vec<f64>,
    pub report: CertificateReport,
}

/// Relative change allowed between consecutive ladder rungs.
pub const K_STABILITY: f64 = 0.1;

/// Per-orbit contributions: `(|Φ1|` at `Φ2` zeros, exit speed`)`.
fn orbit_k_data(orbit: &Orbit) -> (Vec<f64>, Option<f64>) {
    let zeros = orbit
        .events
        .iter()
        .filter(|e| e.kind == OrbitEventKind::Phi2Zero)
        .map(|e| e.state.phi[0].abs())
        .collect();
    let exit = orbit.first_strip_exit().map(|e| e.state.phi[0].hypot(e.state.phi[1]));
    (zeros, exit)
}

pub fn estimate_k(eps_ladder: &[f64], n_angles: usize, opts: &KOptions) -> Result<KEstimate> {
    if n_angles < 16 {
        return Err(invalid(format!("n_angles = {n_angles} < 16")));
    }
    if eps_ladder.is_empty() {
        return Err(invalid("empty epsilon ladder"));
    }
    let oopts = OrbitOptions { blowup_norm: opts.blowup_norm, ..OrbitOptions::with_tol(opts.tol) };
    let jobs: Vec<(usize, usize)> = (0..eps_ladder.len()).flat_map(|e| (0..n_angles).map(move |a| (e, a))).collect();
    let results: Vec<(usize, f64, Vec<f64>, Option<f64>)> = jobs
        .par_iter()
        .map(|&(e, a)| {
            let theta = 2.0 * PI * a as f64 / n_angles as f64;
            let seed = family_seed(opts.family, eps_ladder[e], theta)?;
            let orbit = integrate_orbit_with(seed, SeedDescriptor::State, opts.span, &oopts)?;
            let (zeros, exit) = orbit_k_data(&orbit);
            Ok((e, theta, zeros, exit))
        })
        .collect::<Result<_>>()?;
    let mut rungs: Vec<KRung> = eps_ladder
        .iter()
        .map(|&eps| KRung { eps, k_emp: 0.0, k_angle: f64::NAN, c_emp: 0.0, c_angle: f64::NAN, zero_events: 0, exits: 0 })
        .collect();
    for (e, theta, zeros, exit) in results {
        let r = &mut rungs[e];
        r.zero_events += zeros.len();
        for z in zeros {
            if z > r.k_emp {
                r.k_emp = z;
                r.k_angle = theta;
            }
        }
        if let Some(c) = exit {
            r.exits += 1;
            if c > r.c_emp {
                r.c_emp = c;
                r.c_angle = theta;
            }
        }
    }
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let k_rel_changes: Vec<f64> = rungs.windows(2).map(|w| rel(w[0].k_emp, w[1].k_emp)).collect();
    let c_rel_changes: Vec<f64> = rungs.windows(2).map(|w| rel(w[0].c_emp, w[1].c_emp)).collect();
    let worst = k_rel_changes.iter().chain(&c_rel_changes).fold(0.0f64, |m, v| m.max(*v));
    let finite = rungs.iter().all(|r| r.k_emp.is_finite() && r.c_emp.is_finite() && r.exits > 0);
    let mut report = CertificateReport::new("nonexistence-constant", K_STABILITY, worst, finite && worst <= K_STABILITY);
    for r in &rungs {
        report.witnesses.push(Witness::new(
            format!("eps={:e}: (K_emp, angle, C_emp, angle)", r.eps),
            None,
            &[r.k_emp, r.k_angle, r.c_emp, r.c_angle],
        ));
    }
    report.resolution.insert("n_angles".into(), n_angles as f64);
    report.resolution.insert("span".into(), opts.span);
    report.resolution.insert("tol".into(), opts.tol);
    if let Some(r) = rungs.last() {
        report.metrics.insert("k_emp".into(), r.k_emp);
        report.metrics.insert("c_emp".into(), r.c_emp);
    }
    Ok(KEstimate { rungs, k_rel_changes, c_rel_changes, report })
}
