//! Adaptive Dormand–Prince 5(4) integrator with PI step control, dense output,
//! event location and a norm blowup guard.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fd::fornberg_weights;
use crate::types::{norm_inf, PhaseState, Vec4};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Relative tolerance on the embedded error estimate, measured against the max-norm of the state.
    pub tol: f64,
    /// Absolute floor added to the error scale.
    pub atol: f64,
    /// Minimum step as a fraction of the integration interval.
    pub min_step_rel: f64,
    pub max_steps: usize,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, atol: 0.0, min_step_rel: 1e-13, max_steps: 2_000_000, h_init: None, h_max: None }
    }
}

/// Crossing direction required for an event to register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

/// What happens when an event fires.
pub enum Termination {
    Continue,
    Stop,
    /// Stop only if the predicate holds at the located event state.
    StopIf(Box<dyn Fn(&Vec4) -> bool + Send + Sync>),
}

/// A scalar event function `g(phi) = 0`.
pub struct EventSpec {
    pub id: usize,
    pub func: Box<dyn Fn(&Vec4) -> f64 + Send + Sync>,
    pub direction: Direction,
    pub termination: Termination,
}

impl EventSpec {
    pub fn new(id: usize, func: impl Fn(&Vec4) -> f64 + Send + Sync + 'static) -> Self {
        Self { id, func: Box::new(func), direction: Direction::Either, termination: Termination::Continue }
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn terminal(mut self) -> Self {
        self.termination = Termination::Stop;
        self
    }

    pub fn terminal_if(mut self, pred: impl Fn(&Vec4) -> bool + Send + Sync + 'static) -> Self {
        self.termination = Termination::StopIf(Box::new(pred));
        self
    }
}

/// Event functions, blowup guard and an optional stop predicate checked at accepted nodes.
pub struct Guards {
    /// Stop when the max-norm of the state reaches this value (`f64::INFINITY` disables).
    pub blowup_norm: f64,
    pub events: Vec<EventSpec>,
    pub stop_when: Option<Box<dyn Fn(&Vec4) -> bool + Send + Sync>>,
}

impl Default for Guards {
    fn default() -> Self {
        Self { blowup_norm: f64::INFINITY, events: Vec::new(), stop_when: None }
    }
}

impl Guards {
    pub fn blowup(norm: f64) -> Self {
        Self { blowup_norm: norm, ..Self::default() }
    }

    pub fn with_event(mut self, ev: EventSpec) -> Self {
        self.events.push(ev);
        self
    }
}

/// Identifier used for the blowup guard in event records.
pub const BLOWUP_EVENT_ID: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: usize,
    pub s: f64,
    pub state: Vec4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ReachedEnd,
    Event(usize),
    BlowupGuard,
    Predicate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// One accepted step with its continuous extension coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseStep {
    pub s0: f64,
    pub h: f64,
    pub coeffs: [Vec4; 5],
}

impl DenseStep {
    fn eval(&self, theta: f64) -> Vec4 {
        let t1 = 1.0 - theta;
        let c = &self.coeffs;
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = c[0][i] + theta * (c[1][i] + t1 * (c[2][i] + theta * (c[3][i] + t1 * c[4][i])));
        }
        y
    }

    fn eval_derivative(&self, theta: f64) -> Vec4 {
        let t1 = 1.0 - theta;
        let c = &self.coeffs;
        let mut dy = [0.0; 4];
        for i in 0..4 {
            let a = c[3][i] + t1 * c[4][i];
            let da = -c[4][i];
            let b = c[2][i] + theta * a;
            let db = a + theta * da;
            let cc = c[1][i] + t1 * b;
            let dc = -b + t1 * db;
            dy[i] = (cc + theta * dc) / self.h;
        }
        dy
    }
}

/// Accepted states joined by dense steps; `states[i]` and `states[i + 1]` bound `steps[i]`.
///
/// The last state may sit inside its step when integration stopped at an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    states: Vec<PhaseState>,
    steps: Vec<DenseStep>,
    events: Vec<EventRecord>,
    stats: StepStats,
    stop: StopReason,
    truncated_last: bool,
}

impl Trajectory {
    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn start(&self) -> &PhaseState {
        &self.states[0]
    }

    pub fn last(&self) -> &PhaseState {
        &self.states[self.states.len() - 1]
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.start().s, self.last().s)
    }

    fn locate(&self, s: f64) -> Option<usize> {
        let (a, b) = self.s_range();
        if !(s >= a && s <= b) || self.steps.is_empty() {
            return None;
        }
        let i = self.states.partition_point(|st| st.s <= s);
        Some(i.saturating_sub(1).min(self.steps.len() - 1))
    }

    /// Dense-output state at `s`, or `None` outside the covered range.
    pub fn state_at(&self, s: f64) -> Option<Vec4> {
        if self.steps.is_empty() {
            return (s == self.start().s).then_some(self.start().phi);
        }
        let i = self.locate(s)?;
        let st = &self.steps[i];
        if s == self.states[i].s {
            return Some(self.states[i].phi);
        }
        if s == self.states[i + 1].s {
            return Some(self.states[i + 1].phi);
        }
        Some(st.eval((s - st.s0) / st.h))
    }

    /// Derivative of the dense output at `s`.
    pub fn derivative_at(&self, s: f64) -> Option<Vec4> {
        let i = self.locate(s)?;
        let st = &self.steps[i];
        Some(st.eval_derivative((s - st.s0) / st.h))
    }

    /// State and derivative at `s` from the interpolating polynomial through the
    /// `width` accepted nodes nearest to `s`.
    ///
    /// The node values carry the full fifth-order accuracy, so this reconstruction
    /// is far more accurate in the derivative than the step-local dense output.
    pub fn nodal_state_and_derivative(&self, s: f64, width: usize) -> Option<(Vec4, Vec4)> {
        let usable = if self.truncated_last { self.states.len() - 1 } else { self.states.len() };
        let (a, b) = self.s_range();
        if !(s >= a && s <= b) || usable < 2 {
            return None;
        }
        let width = width.clamp(2, usable);
        let nodes = &self.states[..usable];
        let k = nodes.partition_point(|st| st.s <= s);
        let lo = k.saturating_sub(width / 2).min(usable - width);
        let window = &nodes[lo..lo + width];
        let xs: Vec<f64> = window.iter().map(|st| st.s).collect();
        let w = fornberg_weights(s, &xs, 1);
        let mut val = [0.0; 4];
        let mut der = [0.0; 4];
        for (j, st) in window.iter().enumerate() {
            for c in 0..4 {
                val[c] += w[0][j] * st.phi[c];
                der[c] += w[1][j] * st.phi[c];
            }
        }
        Some((val, der))
    }

    /// First `s >= from` where `component` crosses `level`, located on the dense output.
    pub fn find_crossing(&self, component: usize, level: f64, from: f64) -> Option<f64> {
        for (i, st) in self.steps.iter().enumerate() {
            let sa = self.states[i].s;
            let sb = self.states[i + 1].s;
            if sb < from {
                continue;
            }
            let ta = ((from.max(sa) - st.s0) / st.h).max(0.0);
            let tb = (sb - st.s0) / st.h;
            let g = |t: f64| st.eval(t)[component] - level;
            let (ga, gb) = (g(ta), g(tb));
            if ga == 0.0 {
                return Some(st.s0 + ta * st.h);
            }
            if ga * gb < 0.0 || gb == 0.0 {
                let t = solve_theta(&g, ta, tb, ga, gb, st.h);
                return Some(st.s0 + t * st.h);
            }
        }
        None
    }
}

/// Root of `g` in `[ta, tb]` by Illinois-modified regula falsi with periodic bisection.
fn solve_theta(g: &dyn Fn(f64) -> f64, ta: f64, tb: f64, ga: f64, gb: f64, h: f64) -> f64 {
    if gb == 0.0 {
        return tb;
    }
    let (mut a, mut b, mut fa, mut fb) = (ta, tb, ga, gb);
    let mut best = if ga.abs() < gb.abs() { (ta, ga.abs()) } else { (tb, gb.abs()) };
    let mut side = 0i8;
    for it in 0..200 {
        if (b - a) * h.abs() <= 2.0 * f64::EPSILON * (a.abs() + 1.0) * h.abs() {
            break;
        }
        let mut c = if it % 4 == 3 { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
            if !(c > a && c < b) {
                break;
            }
        }
        let fc = g(c);
        if fc.abs() < best.1 {
            best = (c, fc.abs());
        }
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    best.0
}

fn add_scaled(y: &Vec4, h: f64, terms: &[(f64, &Vec4)]) -> Vec4 {
    let mut out = *y;
    for i in 0..4 {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn finite4(v: &Vec4) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn crosses(g0: f64, g1: f64, dir: Direction) -> bool {
    if g0 == 0.0 || g0.is_nan() || g1.is_nan() {
        return false;
    }
    let rising = g0 < 0.0 && g1 >= 0.0;
    let falling = g0 > 0.0 && g1 <= 0.0;
    match dir {
        Direction::Rising => rising,
        Direction::Falling => falling,
        Direction::Either => rising || falling,
    }
}

/// Integrate with default step control at relative tolerance `tol`.
pub fn integrate_adaptive<F>(rhs: F, start: PhaseState, s_end: f64, tol: f64, guards: &Guards) -> Result<Trajectory>
where
    F: Fn(&Vec4) -> Vec4,
{
    integrate_adaptive_with(rhs, start, s_end, &IntegratorOptions::with_tol(tol), guards)
}

pub fn integrate_adaptive_with<F>(
    rhs: F,
    start: PhaseState,
    s_end: f64,
    opts: &IntegratorOptions,
    guards: &Guards,
) -> Result<Trajectory>
where
    F: Fn(&Vec4) -> Vec4,
{
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance {} must be positive", opts.tol)));
    }
    if !(s_end > start.s) {
        return Err(invalid(format!("s_end = {s_end} must exceed start s = {}", start.s)));
    }
    if !start.is_finite() {
        return Err(Error::NonFiniteState { s: start.s });
    }
    let mut stats = StepStats::default();
    let mut k1 = rhs(&start.phi);
    stats.rhs_evals += 1;
    if !finite4(&k1) {
        return Err(Error::NonFiniteState { s: start.s });
    }

    let interval = s_end - start.s;
    let h_min = opts.min_step_rel * interval;
    let h_max = opts.h_max.unwrap_or(interval).min(interval);
    let scale = |y: &Vec4, yn: &Vec4| opts.atol + opts.tol * norm_inf(y).max(norm_inf(yn));

    let mut y = start.phi;
    let mut s = start.s;
    let mut h = match opts.h_init {
        Some(h0) => h0.min(h_max),
        None => initial_step(&rhs, &y, &k1, opts, h_max, &mut stats),
    };

    let mut states = vec![start];
    let mut steps: Vec<DenseStep> = Vec::new();
    let mut events: Vec<EventRecord> = Vec::new();
    let mut ev_vals: Vec<f64> = guards.events.iter().map(|e| (e.func)(&y)).collect();
    let mut facold = 1e-4f64;
    let mut last_rejected = false;

    if norm_inf(&y) >= guards.blowup_norm {
        return Ok(Trajectory { states, steps, events, stats, stop: StopReason::BlowupGuard, truncated_last: false });
    }

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepLimit { s, limit: opts.max_steps });
        }
        let remaining = s_end - s;
        let last = h >= remaining;
        if last {
            h = remaining;
        }

        let k2 = rhs(&add_scaled(&y, h, &[(A21, &k1)]));
        let k3 = rhs(&add_scaled(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(&add_scaled(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(&add_scaled(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let y6 = add_scaled(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = rhs(&y6);
        let ynew = add_scaled(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(&ynew);
        stats.rhs_evals += 6;

        let mut err = 0.0f64;
        let sc = scale(&y, &ynew).max(f64::MIN_POSITIVE);
        let all_finite = [&k2, &k3, &k4, &k5, &k6, &k7, &ynew].iter().all(|v| finite4(v));
        if all_finite {
            for i in 0..4 {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err = err.max(e.abs() / sc);
            }
        } else {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            // Accept.
            let fac11 = err.powf(0.2 - BETA * 0.75);
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut hnew = h / fac;
            facold = err.max(1e-4);
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
            stats.accepted += 1;

            let mut coeffs = [[0.0; 4]; 5];
            for i in 0..4 {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                coeffs[0][i] = y[i];
                coeffs[1][i] = ydiff;
                coeffs[2][i] = bspl;
                coeffs[3][i] = ydiff - h * k7[i] - bspl;
                coeffs[4][i] =
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = DenseStep { s0: s, h, coeffs };
            let s_new = if last { s_end } else { s + h };

            // Events within the step, in order of occurrence.
            let new_vals: Vec<f64> = guards.events.iter().map(|e| (e.func)(&ynew)).collect();
            let mut hits: Vec<(f64, usize)> = Vec::new();
            for (j, spec) in guards.events.iter().enumerate() {
                if crosses(ev_vals[j], new_vals[j], spec.direction) {
                    let g = |t: f64| (spec.func)(&step.eval(t));
                    let th = solve_theta(&g, 0.0, 1.0, ev_vals[j], new_vals[j], h);
                    hits.push((th, j));
                }
            }
            let norm_new = norm_inf(&ynew);
            if norm_new >= guards.blowup_norm {
                let g = |t: f64| norm_inf(&step.eval(t)) - guards.blowup_norm;
                let th = solve_theta(&g, 0.0, 1.0, norm_inf(&y) - guards.blowup_norm, norm_new - guards.blowup_norm, h);
                hits.push((th, usize::MAX));
            }
            hits.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut stop: Option<(f64, StopReason)> = None;
            for &(th, j) in &hits {
                let st = step.eval(th);
                let se = if th >= 1.0 { s_new } else { s + th * h };
                if j == usize::MAX {
                    events.push(EventRecord { id: BLOWUP_EVENT_ID, s: se, state: st });
                    stop = Some((th, StopReason::BlowupGuard));
                    break;
                }
                let spec = &guards.events[j];
                events.push(EventRecord { id: spec.id, s: se, state: st });
                let halt = match &spec.termination {
                    Termination::Continue => false,
                    Termination::Stop => true,
                    Termination::StopIf(p) => p(&st),
                };
                if halt {
                    stop = Some((th, StopReason::Event(spec.id)));
                    break;
                }
            }

            steps.push(step);
            if let Some((th, reason)) = stop {
                let truncated = th < 1.0;
                let se = if truncated { s + th * h } else { s_new };
                let st = if truncated { step.eval(th) } else { ynew };
                states.push(PhaseState::new(se, st));
                return Ok(Trajectory { states, steps, events, stats, stop: reason, truncated_last: truncated });
            }

            y = ynew;
            s = s_new;
            k1 = k7;
            ev_vals = new_vals;
            states.push(PhaseState::new(s, y));
            if let Some(p) = &guards.stop_when {
                if p(&y) {
                    return Ok(Trajectory { states, steps, events, stats, stop: StopReason::Predicate, truncated_last: false });
                }
            }
            if last {
                return Ok(Trajectory { states, steps, events, stats, stop: StopReason::ReachedEnd, truncated_last: false });
            }
            h = hnew.min(h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let fac11 = if err.is_finite() { err.powf(0.2 - BETA * 0.75) } else { 1.0 / FAC_MIN };
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN).max(1.0);
            if h < h_min {
                return Err(Error::StepUnderflow { s, h });
            }
        }
    }
}

fn initial_step<F>(rhs: &F, y0: &Vec4, f0: &Vec4, opts: &IntegratorOptions, h_max: f64, stats: &mut StepStats) -> f64
where
    F: Fn(&Vec4) -> Vec4,
{
    let sc = (opts.atol + opts.tol * norm_inf(y0)).max(f64::MIN_POSITIVE);
    let dnf = norm_inf(f0) / sc;
    let dny = norm_inf(y0) / sc;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf) };
    h = h.min(h_max);
    let y1 = add_scaled(y0, h, &[(1.0, f0)]);
    let f1 = rhs(&y1);
    stats.rhs_evals += 1;
    let mut diff = [0.0; 4];
    for i in 0..4 {
        diff[i] = f1[i] - f0[i];
    }
    let der2 = norm_inf(&diff) / sc / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 || !der12.is_finite() {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(y: &Vec4) -> Vec4 {
        [y[1], y[2], y[3], -9.0 * y[0] + 10.0 * y[2]]
    }

    #[test]
    fn zero_field_is_constant() {
        let t = integrate_adaptive(|_| [0.0; 4], PhaseState::new(0.0, [1.0, 2.0, 3.0, 4.0]), 5.0, 1e-10, &Guards::default())
            .unwrap();
        assert_eq!(t.last().phi, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.last().s, 5.0);
        assert_eq!(t.stop_reason(), StopReason::ReachedEnd);
    }

    #[test]
    fn exponential_growth_matches_closed_form() {
        let eps = 1e-6;
        let n = (1.0f64 + 9.0 + 81.0 + 729.0).sqrt();
        let e: Vec4 = [1.0 / n, 3.0 / n, 9.0 / n, 27.0 / n];
        let y0 = [eps * e[0], eps * e[1], eps * e[2], eps * e[3]];
        let t = integrate_adaptive(linear, PhaseState::new(0.0, y0), 1.0, 1e-10, &Guards::default()).unwrap();
        let g = 3.0f64.exp();
        for i in 0..4 {
            assert!((t.last().phi[i] - eps * g * e[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_output_reproduces_nodes_and_tracks_solution() {
        let y0 = [1.0, 1.0, 1.0, 1.0];
        let t = integrate_adaptive(linear, PhaseState::new(0.0, y0), 2.0, 1e-10, &Guards::default()).unwrap();
        for st in t.states() {
            let q = t.state_at(st.s).unwrap();
            for i in 0..4 {
                assert!((q[i] - st.phi[i]).abs() <= 10.0 * 1e-10 * norm_inf(&st.phi));
            }
        }
        for k in 0..50 {
            let s = 2.0 * k as f64 / 49.0;
            let q = t.state_at(s).unwrap();
            assert!((q[0] - s.exp()).abs() < 1e-8 * s.exp());
            let d = t.derivative_at(s).unwrap();
            assert!((d[0] - s.exp()).abs() < 1e-6 * s.exp());
            let (v, dv) = t.nodal_state_and_derivative(s, 8).unwrap();
            assert!((v[3] - s.exp()).abs() < 1e-8 * s.exp());
            assert!((dv[3] - s.exp()).abs() < 1e-7 * s.exp());
        }
    }

    #[test]
    fn events_are_located_precisely() {
        let guards = Guards::default().with_event(EventSpec::new(7, |y: &Vec4| y[0] - 2.0).terminal());
        let t = integrate_adaptive(linear, PhaseState::new(0.0, [1.0; 4]), 5.0, 1e-12, &guards).unwrap();
        assert_eq!(t.stop_reason(), StopReason::Event(7));
        let ev = t.events()[0];
        assert!((ev.s - 2f64.ln()).abs() < 1e-10);
        assert!((ev.state[0] - 2.0).abs() < 1e-13);
        assert_eq!(t.last().s, ev.s);
    }

    #[test]
    fn blowup_guard_localizes_crossing() {
        let t = integrate_adaptive(|y: &Vec4| [y[0] * y[0], 0.0, 0.0, 0.0], PhaseState::new(0.0, [1.0, 0.0, 0.0, 0.0]), 2.0, 1e-10, &Guards::blowup(1e6))
            .unwrap();
        assert_eq!(t.stop_reason(), StopReason::BlowupGuard);
        // y = 1/(1-s) reaches 1e6 at s = 1 - 1e-6.
        assert!((t.last().s - (1.0 - 1e-6)).abs() < 1e-10);
    }

    #[test]
    fn non_finite_start_rejected() {
        let r = integrate_adaptive(|_| [f64::NAN; 4], PhaseState::new(0.0, [0.0; 4]), 1.0, 1e-8, &Guards::default());
        assert!(matches!(r, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn finite_time_singularity_underflows_without_guard() {
        let r = integrate_adaptive(|y: &Vec4| [y[0] * y[0], 0.0, 0.0, 0.0], PhaseState::new(0.0, [1.0, 0.0, 0.0, 0.0]), 2.0, 1e-10, &Guards::default());
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. })));
    }
}
