//! Method-of-lines solver for the reduced biharmonic heat flow on `r ∈ [0, 1]`.
//!
//! Unknowns live at the interior nodes of a uniform grid. The origin is closed by odd
//! reflection, `ψ(1) = a0` is pinned at the last node and `∂r ψ(1) = a1` enters through a
//! ghost node `ψ_N = ψ_{N-2} + 2h·a1`. The closed-form right-hand side is evaluated with
//! second-order centered differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::maps::bi_energy_on_grid;
use crate::reduction::{biharmonic_rhs_closed, biharmonic_rhs_closed_partials};
use crate::types::{Parity, RadialGrid, RadialProfile};

const W1: [f64; 5] = [0.0, -0.5, 0.0, 0.5, 0.0];
const W2: [f64; 5] = [0.0, 1.0, -2.0, 1.0, 0.0];
const W3: [f64; 5] = [-0.5, 1.0, 0.0, -1.0, 0.5];
const W4: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];

/// Default `c_safety` of the explicit scheme. RK4 on the 257-node operator diverges above
/// `c ≈ 0.11`.
pub const EXPLICIT_C_SAFETY: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Classical RK4 with `Δt = c_safety·h⁴`.
    Explicit { c_safety: f64 },
    /// Backward Euler with Newton iterations and a local-error step controller.
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub scheme: Scheme,
    pub steady_tol: f64,
    pub gradient_cap: f64,
    /// Local error target of the implicit controller.
    pub err_tol: f64,
    pub dt_init: f64,
    /// Disables the controller when set (implicit scheme only).
    pub fixed_dt: Option<f64>,
    pub max_steps: usize,
    /// Keep a copy of the profile every this many accepted steps (0 disables).
    pub snapshot_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Implicit,
            steady_tol: 1e-6,
            gradient_cap: 1e3,
            err_tol: 1e-3,
            dt_init: 1e-9,
            fixed_dt: None,
            max_steps: 100_000,
            snapshot_every: 0,
        }
    }
}

impl FlowOptions {
    pub fn explicit() -> Self {
        Self { scheme: Scheme::Explicit { c_safety: EXPLICIT_C_SAFETY }, ..Self::default() }
    }
}

/// The odd cubic `αr + βr³` with `c(1) = a0`, `c'(1) = a1`. Its centered differences are
/// known in closed form, so the solver differences only `ψ - c`; rounding amplified by
/// `h⁻⁴` then scales with the deviation rather than with `|ψ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Reference {
    alpha: f64,
    beta: f64,
}

impl Reference {
    fn new(a0: f64, a1: f64) -> Self {
        let beta = 0.5 * (a1 - a0);
        Self { alpha: a0 - beta, beta }
    }

    fn value(&self, r: f64) -> f64 {
        self.alpha * r + self.beta * r.powi(3)
    }

    /// Centered stencil values `[D1, D2, D3, D4]c` at `r`.
    fn differences(&self, r: f64, h: f64) -> [f64; 4] {
        let b = self.beta;
        [self.alpha + b * (3.0 * r * r + h * h), 6.0 * b * r, 6.0 * b, 0.0]
    }
}

#[derive(Debug, Clone, Copy)]
struct Discretization {
    h: f64,
    d: u32,
    reference: Reference,
}

impl Discretization {
    fn offset(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mut w: Vec<f64> =
            values.iter().enumerate().map(|(j, x)| x - self.reference.value(j as f64 * self.h)).collect();
        w[0] = 0.0;
        w[n - 1] = 0.0;
        w
    }

    fn values(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut v: Vec<f64> = w.iter().enumerate().map(|(j, x)| self.reference.value(j as f64 * self.h) + x).collect();
        v[0] = 0.0;
        v[n - 1] = self.reference.value(1.0);
        v
    }

    /// Offset at node `k`: odd reflection below 0, ghost relation past `N-1`.
    fn node(&self, w: &[f64], k: isize) -> f64 {
        let n = w.len() as isize;
        if k < 0 {
            -w[(-k) as usize]
        } else if k < n {
            w[k as usize]
        } else {
            w[w.len() - 2] - 2.0 * self.reference.beta * self.h.powi(3)
        }
    }

    /// `(ψ, ψ', ψ'', ψ''', ψ'''')` at interior node `j`.
    fn jet(&self, w: &[f64], j: usize) -> [f64; 5] {
        let r = j as f64 * self.h;
        let rd = self.reference.differences(r, self.h);
        let mut out = [self.reference.value(r) + w[j], 0.0, 0.0, 0.0, 0.0];
        for (m, st) in [W1, W2, W3, W4].iter().enumerate() {
            let mut acc = 0.0;
            for (o, wk) in st.iter().enumerate() {
                if *wk != 0.0 {
                    acc += wk * self.node(w, j as isize + o as isize - 2);
                }
            }
            out[m + 1] = rd[m] + acc / self.h.powi(m as i32 + 1);
        }
        out
    }

    fn rhs(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate().take(n - 1).skip(1) {
            let jt = self.jet(w, j);
            *o = biharmonic_rhs_closed(jt[0], jt[1], jt[2], jt[3], jt[4], j as f64 * self.h, self.d);
        }
        out
    }

    /// Jacobian of [`Self::rhs`] with respect to the interior unknowns `1..N-1`.
    fn jacobian(&self, w: &[f64]) -> DMatrix<f64> {
        let n = w.len();
        let mut jac = DMatrix::zeros(n - 2, n - 2);
        for j in 1..n - 1 {
            let r = j as f64 * self.h;
            let jt = self.jet(w, j);
            let p = biharmonic_rhs_closed_partials(jt[0], jt[1], jt[2], jt[3], r, self.d);
            for o in 0..5 {
                let mut c = if o == 2 { p[0] } else { 0.0 };
                for (m, st) in [W1, W2, W3, W4].iter().enumerate() {
                    c += p[m + 1] * st[o] / self.h.powi(m as i32 + 1);
                }
                if c == 0.0 {
                    continue;
                }
                let k = j as isize + o as isize - 2;
                let (col, sign) = if k < 0 {
                    ((-k) as usize, -1.0)
                } else if k as usize == n {
                    (n - 2, 1.0)
                } else {
                    (k as usize, 1.0)
                };
                // pinned nodes carry no unknown
                if col == 0 || col >= n - 1 {
                    continue;
                }
                jac[(j - 1, col - 1)] += sign * c;
            }
        }
        jac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub profile: RadialProfile,
    pub a0: f64,
    pub a1: f64,
    pub d: u32,
    /// Next step size proposed by the controller.
    pub dt: f64,
    offset: Vec<f64>,
}

impl FlowState {
    pub fn h(&self) -> f64 {
        self.profile.grid().uniform_h().expect("flow grids are uniform")
    }

    pub fn values(&self) -> &[f64] {
        self.profile.values()
    }

    fn disc(&self) -> Discretization {
        Discretization { h: self.h(), d: self.d, reference: Reference::new(self.a0, self.a1) }
    }

    fn with_offset(&self, t: f64, offset: Vec<f64>, dt: f64) -> Result<Self> {
        let values = self.disc().values(&offset);
        let profile = RadialProfile::new(self.profile.grid().clone(), values, Parity::Odd)?;
        Ok(Self { t, profile, dt, offset, ..self.clone() })
    }

    /// Ghost value `ψ_N = ψ_{N-2} + 2h·a1` beyond `r = 1`.
    pub fn ghost(&self) -> f64 {
        let v = self.values();
        v[v.len() - 2] + 2.0 * self.h() * self.a1
    }

    /// Semi-discrete `∂t ψ` at every node; the pinned nodes get zero.
    pub fn rhs(&self) -> Vec<f64> {
        self.disc().rhs(&self.offset)
    }

    /// The state with negated profile and boundary data.
    pub fn negated(&self) -> Self {
        Self {
            profile: self.profile.negated(),
            a0: -self.a0,
            a1: -self.a1,
            offset: self.offset.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

/// Validate initial data and boundary values on a uniform grid over `[0, 1]`.
///
/// `slope_at_1` is `∂r ψ0(1)`; it must equal `a1` to within `1e-8`.
pub fn init_flow(psi0: &RadialProfile, slope_at_1: f64, a0: f64, a1: f64, d: u32) -> Result<FlowState> {
    let h = psi0.grid().uniform_h()?;
    let n = psi0.values().len();
    if n < 7 {
        return Err(Error::GridTooCoarse { needed: 7, have: n });
    }
    if (psi0.grid().r_max() - 1.0).abs() > 1e-12 {
        return Err(invalid("flow grid must end at r = 1"));
    }
    if d < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if !(a0.is_finite() && a1.is_finite()) {
        return Err(invalid("boundary data must be finite"));
    }
    let v = psi0.values();
    if v[0] != 0.0 {
        return Err(Error::IncompatibleData(format!("psi0(0) = {} is not 0", v[0])));
    }
    if (v[n - 1] - a0).abs() > 1e-8 {
        return Err(Error::IncompatibleData(format!("psi0(1) = {} differs from a0 = {a0}", v[n - 1])));
    }
    if (slope_at_1 - a1).abs() > 1e-8 {
        return Err(Error::IncompatibleData(format!("psi0'(1) = {slope_at_1} differs from a1 = {a1}")));
    }
    let shell = FlowState { t: 0.0, profile: psi0.clone(), a0, a1, d, dt: h.powi(4), offset: Vec::new() };
    let offset = shell.disc().offset(v);
    shell.with_offset(0.0, offset, h.powi(4))
}

/// Semi-discrete `∂t ψ` for nodal values `ψ` with `ψ(1)` read from the last node and outer
/// slope `a1`; the pinned nodes get zero.
pub fn flow_rhs(values: &[f64], a1: f64, h: f64, d: u32) -> Vec<f64> {
    let disc = Discretization { h, d, reference: Reference::new(values[values.len() - 1], a1) };
    disc.rhs(&disc.offset(values))
}

/// Largest `|ψ_{j+1} - ψ_j|/h` including the ghost interval.
pub fn max_gradient(state: &FlowState) -> f64 {
    let v = state.values();
    if !v.iter().all(|x| x.is_finite()) {
        return f64::INFINITY;
    }
    let h = state.h();
    let g = v.windows(2).map(|w| ((w[1] - w[0]) / h).abs()).fold(0.0f64, f64::max);
    g.max(((state.ghost() - v[v.len() - 1]) / h).abs())
}

pub fn residual_norm(state: &FlowState) -> f64 {
    norm_inf(&state.rhs())
}

/// Discrete bi-energy of one state on its grid.
pub fn state_energy(state: &FlowState) -> Result<f64> {
    bi_energy_on_grid(&state.profile, Some(state.a1))
}

pub fn energy_trace(states: &[FlowState]) -> Result<Vec<f64>> {
    states.iter().map(state_energy).collect()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Backward Euler step of size `dt`: `Some(w)` when Newton converges to a finite state.
fn implicit_solve(disc: &Discretization, u: &[f64], dt: f64) -> Option<Vec<f64>> {
    let n = u.len();
    let mut v = u.to_vec();
    for _ in 0..25 {
        let f = disc.rhs(&v);
        let g = DVector::from_iterator(n - 2, (1..n - 1).map(|j| v[j] - u[j] - dt * f[j]));
        let mut a = disc.jacobian(&v) * (-dt);
        for i in 0..n - 2 {
            a[(i, i)] += 1.0;
        }
        let dv = a.lu().solve(&g)?;
        for j in 1..n - 1 {
            v[j] -= dv[j - 1];
        }
        if !v.iter().all(|x| x.is_finite()) {
            return None;
        }
        if dv.amax() < 1e-10 * (1.0 + norm_inf(&v)) {
            return Some(v);
        }
    }
    None
}

fn rk4_step(disc: &Discretization, u: &[f64], dt: f64) -> Vec<f64> {
    let add = |x: &[f64], k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = disc.rhs(u);
    let k2 = disc.rhs(&add(u, &k1, 0.5 * dt));
    let k3 = disc.rhs(&add(u, &k2, 0.5 * dt));
    let k4 = disc.rhs(&add(u, &k3, dt));
    (0..u.len()).map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect()
}

/// Advance one accepted step.
pub fn step(state: &FlowState, opts: &FlowOptions) -> Result<FlowState> {
    let disc = state.disc();
    let u = &state.offset;
    let fail = || Error::NonFiniteState { s: state.t };
    match opts.scheme {
        Scheme::Explicit { c_safety } => {
            if !(c_safety > 0.0) {
                return Err(invalid("c_safety must be positive"));
            }
            let dt = c_safety * disc.h.powi(4);
            let v = rk4_step(&disc, u, dt);
            if !v.iter().all(|x| x.is_finite()) {
                return Err(fail());
            }
            state.with_offset(state.t + dt, v, dt)
        }
        Scheme::Implicit => {
            if let Some(dt) = opts.fixed_dt {
                let v = implicit_solve(&disc, u, dt).ok_or_else(fail)?;
                return state.with_offset(state.t + dt, v, dt);
            }
            let f0 = disc.rhs(u);
            let mut dt = state.dt;
            loop {
                if !(dt > 1e-30) {
                    return Err(fail());
                }
                let Some(v) = implicit_solve(&disc, u, dt) else {
                    dt /= 4.0;
                    continue;
                };
                let f1 = disc.rhs(&v);
                let est = 0.5 * dt * f1.iter().zip(&f0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let ratio = if est > 0.0 { 0.9 * (opts.err_tol / est).sqrt() } else { 3.0 };
                if est > opts.err_tol {
                    dt *= ratio.max(0.2);
                    continue;
                }
                return state.with_offset(state.t + dt, v, dt * ratio.clamp(0.2, 3.0));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Running,
    SteadyState,
    BlowupIndicated,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub max_gradient: Vec<f64>,
    pub residual: Vec<f64>,
    pub verdict: Verdict,
    pub steps: usize,
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl FlowDiagnostics {
    /// Largest energy increase between consecutive recorded states (`-inf` for one state).
    pub fn max_energy_increase(&self) -> f64 {
        self.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Step until `t_end`, a steady state (`‖RHS‖∞ < steady_tol`) or a blowup indicator
/// (gradient above the cap or a failed step). Traces are recorded for every accepted state;
/// `max_steps` exhaustion leaves the verdict at `Running`.
pub fn evolve(state: &FlowState, t_end: f64, opts: &FlowOptions) -> Result<(FlowState, FlowDiagnostics)> {
    if !(t_end > state.t) {
        return Err(invalid(format!("t_end = {t_end} must exceed t = {}", state.t)));
    }
    let mut st = state.clone();
    if let Some(dt) = opts.fixed_dt {
        st.dt = dt;
    } else if opts.scheme == Scheme::Implicit {
        st.dt = opts.dt_init;
    }
    let mut diag = FlowDiagnostics {
        t: Vec::new(),
        energy: Vec::new(),
        max_gradient: Vec::new(),
        residual: Vec::new(),
        verdict: Verdict::Running,
        steps: 0,
        snapshots: Vec::new(),
    };
    let record = |st: &FlowState, diag: &mut FlowDiagnostics| -> Result<f64> {
        let res = residual_norm(st);
        diag.t.push(st.t);
        diag.energy.push(state_energy(st)?);
        diag.max_gradient.push(max_gradient(st));
        diag.residual.push(res);
        if opts.snapshot_every > 0 && diag.steps % opts.snapshot_every == 0 {
            diag.snapshots.push((st.t, st.values().to_vec()));
        }
        Ok(res)
    };
    let mut res = record(&st, &mut diag)?;
    loop {
        if res < opts.steady_tol {
            diag.verdict = Verdict::SteadyState;
            break;
        }
        if st.t >= t_end {
            diag.verdict = Verdict::TimeLimit;
            break;
        }
        if diag.steps >= opts.max_steps {
            break;
        }
        let mut trial = st.clone();
        if opts.fixed_dt.is_none() && opts.scheme == Scheme::Implicit {
            trial.dt = trial.dt.min(t_end - st.t);
        }
        match step(&trial, opts) {
            Ok(next) => st = next,
            Err(Error::NonFiniteState { .. }) => {
                diag.verdict = Verdict::BlowupIndicated;
                break;
            }
            Err(e) => return Err(e),
        }
        diag.steps += 1;
        res = record(&st, &mut diag)?;
        if diag.max_gradient.last().is_some_and(|g| !(*g <= opts.gradient_cap)) {
            diag.verdict = Verdict::BlowupIndicated;
            break;
        }
    }
    Ok((st, diag))
}

/// The odd cubic `αr + βr³` on `n` nodes with `ψ(1) = a0`, `ψ'(1) = a1`, and its slope at 1.
pub fn cubic_initial_data(n: usize, a0: f64, a1: f64) -> Result<(RadialProfile, f64)> {
    let c = Reference::new(a0, a1);
    let grid = RadialGrid::uniform(n, 1.0)?;
    let mut v: Vec<f64> = grid.nodes().iter().map(|&r| c.value(r)).collect();
    let last = v.len() - 1;
    v[last] = a0;
    Ok((RadialProfile::new(grid, v, Parity::Odd)?, c.alpha + 3.0 * c.beta))
}
