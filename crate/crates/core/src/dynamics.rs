//! The autonomous phase-space system for steady profiles in `s = log r`, its
//! linearization at the origin, the heteroclinic bubble orbit, unstable-manifold
//! seeding, orbit integration with events, and the heteroclinic/blowup dichotomy.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrator::{
    integrate_adaptive, EventSpec, Guards, StopReason, Trajectory, BLOWUP_EVENT_ID,
};
use crate::types::{neg4, norm_inf, PhaseState, Vec4};

pub fn f1(p1: f64, p3: f64) -> f64 {
    let (s2, c2) = (2.0 * p1).sin_cos();
    -4.5 * s2 + (7.0 + 3.0 * c2) * p3
}

pub fn f2(p1: f64, p3: f64) -> f64 {
    3.0 * (2.0 * p3 - (2.0 * p1).sin())
}

/// `(Φ2, Φ3, Φ4, F1 + Φ2² F2)`.
pub fn rhs(phi: &Vec4) -> Vec4 {
    let [p1, p2, p3, p4] = *phi;
    let (s2, c2) = (2.0 * p1).sin_cos();
    let f1 = -4.5 * s2 + (7.0 + 3.0 * c2) * p3;
    let f2 = 3.0 * (2.0 * p3 - s2);
    [p2, p3, p4, f1 + p2 * p2 * f2]
}

pub fn rhs_state(state: &PhaseState) -> Vec4 {
    rhs(&state.phi)
}

/// Jacobian of [`rhs`].
pub fn jacobian(phi: &Vec4) -> [[f64; 4]; 4] {
    let [p1, p2, p3, _] = *phi;
    let (s2, c2) = (2.0 * p1).sin_cos();
    let d1 = -9.0 * c2 - 6.0 * s2 * p3 - 6.0 * p2 * p2 * c2;
    let d2 = 2.0 * p2 * 3.0 * (2.0 * p3 - s2);
    let d3 = 7.0 + 3.0 * c2 + 6.0 * p2 * p2;
    [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [d1, d2, d3, 0.0]]
}

/// The linearization at the origin with its integer eigenstructure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizationData {
    pub a: [[i64; 4]; 4],
    pub eigenvalues: [i64; 4],
    pub eigenvectors: [[i64; 4]; 4],
}

pub fn linearization() -> LinearizationData {
    LinearizationData {
        a: [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-9, 0, 10, 0]],
        eigenvalues: [-3, -1, 1, 3],
        eigenvectors: [[1, -3, 9, -27], [1, -1, 1, -1], [1, 1, 1, 1], [1, 3, 9, 27]],
    }
}

impl LinearizationData {
    /// `A v = λ v` for every pair, in exact integer arithmetic.
    pub fn eigenpairs_exact(&self) -> bool {
        self.eigenvalues.iter().zip(&self.eigenvectors).all(|(&l, v)| {
            (0..4).all(|i| (0..4).map(|j| self.a[i][j] * v[j]).sum::<i64>() == l * v[i])
        })
    }

    /// Coefficients `[1, c3, c2, c1, c0]` of `det(λI - A)` by the Faddeev–LeVerrier recursion.
    pub fn characteristic_polynomial(&self) -> [i64; 5] {
        let n = 4usize;
        let mut coeffs = [0i64; 5];
        coeffs[0] = 1;
        let mut m = [[0i64; 4]; 4];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k
            let mut next = [[0i64; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    next[i][j] = (0..4).map(|l| self.a[i][l] * m[l][j]).sum::<i64>();
                }
                next[i][i] += coeffs[k - 1];
            }
            m = next;
            let mut am = 0i64;
            for i in 0..4 {
                am += (0..4).map(|l| self.a[i][l] * m[l][i]).sum::<i64>();
            }
            coeffs[k] = -am / k as i64;
        }
        coeffs
    }
}

/// The phase-space image of the bubble `y(s) = 2 arctan(e^s)` with derivatives.
pub fn heteroclinic(s: f64) -> PhaseState {
    let (sech, tanh) = sech_tanh(s);
    let y = 2.0 * s.exp().atan();
    PhaseState::new(s, [y, sech, -sech * tanh, sech * (tanh * tanh - sech * sech)])
}

/// `∂s⁴ y` along the heteroclinic.
pub fn heteroclinic_d4(s: f64) -> f64 {
    let (sech, tanh) = sech_tanh(s);
    sech * tanh * (5.0 * sech * sech - tanh * tanh)
}

fn sech_tanh(s: f64) -> (f64, f64) {
    let e = (-s.abs()).exp();
    let sech = 2.0 * e / (1.0 + e * e);
    (sech, s.tanh())
}

/// Default cap on the seed radius.
pub const SEED_CAP: f64 = 1e-2;

/// A point of the unstable eigenspace over the `(Φ1, Φ3)` plane at `s = 0`.
pub fn seed_unstable(phi1: f64, phi3: f64) -> Result<PhaseState> {
    seed_unstable_capped(phi1, phi3, SEED_CAP)
}

pub fn seed_unstable_capped(phi1: f64, phi3: f64, cap: f64) -> Result<PhaseState> {
    let radius = phi1.hypot(phi3);
    if !radius.is_finite() || radius > cap {
        return Err(Error::SeedTooLarge { radius, cap });
    }
    Ok(PhaseState::new(0.0, [phi1, 0.75 * phi1 + 0.25 * phi3, phi3, -2.25 * phi1 + 3.25 * phi3]))
}

/// Columns `(1,λ,λ²,λ³)` for `λ = 1, 3, -1, -3`.
pub fn p_matrix() -> Matrix4<f64> {
    let mut p = Matrix4::zeros();
    for (c, l) in [1.0f64, 3.0, -1.0, -3.0].iter().enumerate() {
        for k in 0..4 {
            p[(k, c)] = l.powi(k as i32);
        }
    }
    p
}

pub fn p_inverse() -> Matrix4<f64> {
    p_matrix().try_inverse().expect("Vandermonde matrix with distinct nodes is invertible")
}

/// Coordinates of `phi` in the eigenbasis ordered as in [`p_matrix`].
pub fn eigen_coordinates(phi: &Vec4) -> Vec4 {
    let v = p_inverse() * nalgebra::Vector4::from_column_slice(phi);
    [v[0], v[1], v[2], v[3]]
}

/// `exp(A·ds)·phi`, the linearized flow at the origin.
pub fn linear_flow(phi: &Vec4, ds: f64) -> Vec4 {
    let c = eigen_coordinates(phi);
    let mut out = [0.0; 4];
    for (ci, l) in c.iter().zip([1.0f64, 3.0, -1.0, -3.0]) {
        let g = ci * (l * ds).exp();
        for (k, o) in out.iter_mut().enumerate() {
            *o += g * l.powi(k as i32);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeedDescriptor {
    Unstable { phi1: f64, phi3: f64 },
    Heteroclinic { s: f64 },
    State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitEventKind {
    Phi3HitsPlusOne,
    Phi3HitsMinusOne,
    Phi2Zero,
    BlowupGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitEvent {
    pub kind: OrbitEventKind,
    pub s: f64,
    pub state: PhaseState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OrbitClass {
    HeteroclinicShadow { sign: i8, shadow_distance: f64 },
    Blowup { sign: i8, s_max_estimate: f64 },
}

impl OrbitClass {
    pub fn sign(&self) -> i8 {
        match *self {
            OrbitClass::HeteroclinicShadow { sign, .. } | OrbitClass::Blowup { sign, .. } => sign,
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, OrbitClass::Blowup { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub tol: f64,
    pub blowup_norm: f64,
    /// Sup-distance allowed between the orbit and the aligned heteroclinic.
    pub shadow_tol: f64,
    /// Shadowing is checked until `|Φ1|` first reaches this level.
    pub shadow_level: f64,
}

impl OrbitOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, blowup_norm: 1e6, shadow_tol: 1e-2, shadow_level: 3.0 }
    }
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// A forward trajectory from a seed with classified events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub trajectory: Trajectory,
    pub events: Vec<OrbitEvent>,
    pub class: Option<OrbitClass>,
    pub seed: SeedDescriptor,
    pub seed_state: PhaseState,
}

const EV_P3_PLUS: usize = 0;
const EV_P3_MINUS: usize = 1;
const EV_P2_ZERO: usize = 2;

impl Orbit {
    pub fn blew_up(&self) -> bool {
        self.trajectory.stop_reason() == StopReason::BlowupGuard
    }

    pub fn first_event(&self, kind: OrbitEventKind) -> Option<&OrbitEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }

    /// First crossing of `|Φ3| = 1`.
    pub fn first_strip_exit(&self) -> Option<&OrbitEvent> {
        self.events
            .iter()
            .find(|e| matches!(e.kind, OrbitEventKind::Phi3HitsPlusOne | OrbitEventKind::Phi3HitsMinusOne))
    }

    /// State at `s`; before the seed the orbit continues backward along the exact
    /// heteroclinic (heteroclinic seeds) or the linear unstable flow (other seeds).
    pub fn state_at(&self, s: f64) -> Option<Vec4> {
        if s >= self.seed_state.s {
            self.trajectory.state_at(s)
        } else {
            Some(self.backward_extension(s).0)
        }
    }

    /// State and `∂s Φ4` at `s` from the nodal reconstruction of the trajectory.
    pub fn jet_at(&self, s: f64) -> Option<(Vec4, f64)> {
        if s >= self.seed_state.s {
            let (v, d) = self.trajectory.nodal_state_and_derivative(s, 8)?;
            Some((v, d[3]))
        } else {
            Some(self.backward_extension(s))
        }
    }

    fn backward_extension(&self, s: f64) -> (Vec4, f64) {
        if let SeedDescriptor::Heteroclinic { s: s0 } = self.seed {
            let shift = self.seed_state.s - s0;
            return (heteroclinic(s - shift).phi, heteroclinic_d4(s - shift));
        }
        let c = eigen_coordinates(&self.seed_state.phi);
        let dt = s - self.seed_state.s;
        let mut out = [0.0; 4];
        let mut d4 = 0.0;
        for (ci, l) in [(c[0], 1.0f64), (c[1], 3.0)] {
            let g = ci * (l * dt).exp();
            for (k, o) in out.iter_mut().enumerate() {
                *o += g * l.powi(k as i32);
            }
            d4 += g * l.powi(4);
        }
        (out, d4)
    }
}

fn orbit_guards(blowup_norm: f64) -> Guards {
    Guards::blowup(blowup_norm)
        .with_event(EventSpec::new(EV_P3_PLUS, |y: &Vec4| y[2] - 1.0))
        .with_event(EventSpec::new(EV_P3_MINUS, |y: &Vec4| y[2] + 1.0))
        .with_event(EventSpec::new(EV_P2_ZERO, |y: &Vec4| y[1]))
}

/// Integrate forward from `seed` over `s_span` with default orbit options at `tol`.
pub fn integrate_orbit(seed: PhaseState, s_span: f64, tol: f64) -> Result<Orbit> {
    integrate_orbit_with(seed, SeedDescriptor::State, s_span, &OrbitOptions::with_tol(tol))
}

pub fn integrate_orbit_with(
    seed: PhaseState,
    descriptor: SeedDescriptor,
    s_span: f64,
    opts: &OrbitOptions,
) -> Result<Orbit> {
    if !(s_span > 0.0) {
        return Err(invalid(format!("span {s_span} must be positive")));
    }
    let guards = orbit_guards(opts.blowup_norm);
    let trajectory = integrate_adaptive(rhs, seed, seed.s + s_span, opts.tol, &guards)?;
    let events = trajectory
        .events()
        .iter()
        .map(|e| OrbitEvent {
            kind: match e.id {
                EV_P3_PLUS => OrbitEventKind::Phi3HitsPlusOne,
                EV_P3_MINUS => OrbitEventKind::Phi3HitsMinusOne,
                EV_P2_ZERO => OrbitEventKind::Phi2Zero,
                BLOWUP_EVENT_ID => OrbitEventKind::BlowupGuard,
                other => unreachable!("unknown event id {other}"),
            },
            s: e.s,
            state: PhaseState::new(e.s, e.state),
        })
        .collect();
    let mut orbit = Orbit { trajectory, events, class: None, seed: descriptor, seed_state: seed };
    orbit.class = classify_with(&orbit, opts).ok();
    Ok(orbit)
}

/// Classify with default shadowing settings.
pub fn classify(orbit: &Orbit) -> Result<OrbitClass> {
    classify_with(orbit, &OrbitOptions::default())
}

/// Heteroclinic shadowing (checked until `|Φ1|` reaches the shadow level) takes
/// precedence; otherwise a fired blowup guard gives `Blowup`; otherwise undecided.
pub fn classify_with(orbit: &Orbit, opts: &OrbitOptions) -> Result<OrbitClass> {
    if let Some((sign, dist)) = shadow_distance(orbit, opts.shadow_level) {
        if dist <= opts.shadow_tol {
            return Ok(OrbitClass::HeteroclinicShadow { sign, shadow_distance: dist });
        }
    }
    if orbit.blew_up() {
        let last = orbit.trajectory.last();
        let sign = if last.phi[0] >= 0.0 { 1 } else { -1 };
        let f = rhs(&last.phi);
        let s_max_estimate = if f[3] != 0.0 && last.phi[3] * f[3] > 0.0 {
            last.s + 3.0 * last.phi[3] / f[3]
        } else {
            last.s
        };
        return Ok(OrbitClass::Blowup { sign, s_max_estimate });
    }
    Err(Error::UndecidedOrbit { s_end: orbit.trajectory.last().s })
}

/// Sup-distance to `±Y` aligned at the first `|Φ1| = π/2` crossing, measured until `|Φ1|`
/// first reaches `level` (or the end of the trajectory).
pub fn shadow_distance(orbit: &Orbit, level: f64) -> Option<(i8, f64)> {
    let traj = &orbit.trajectory;
    let s0 = traj.start().s;
    let up = traj.find_crossing(0, FRAC_PI_2, s0);
    let dn = traj.find_crossing(0, -FRAC_PI_2, s0);
    let (sign, s_half) = match (up, dn) {
        (Some(a), Some(b)) => {
            if a <= b {
                (1i8, a)
            } else {
                (-1, b)
            }
        }
        (Some(a), None) => (1, a),
        (None, Some(b)) => (-1, b),
        (None, None) => return None,
    };
    let sg = sign as f64;
    let s_end = traj.find_crossing(0, sg * level, s0).unwrap_or(traj.last().s);
    let dist_at = |s: f64| -> f64 {
        let y = heteroclinic(s - s_half).phi;
        let x = traj.state_at(s).unwrap_or([f64::NAN; 4]);
        (0..4).map(|i| (x[i] - sg * y[i]).abs()).fold(0.0, f64::max)
    };
    let mut worst = 0.0f64;
    for w in traj.states().windows(2) {
        if w[0].s > s_end {
            break;
        }
        let b = w[1].s.min(s_end);
        for k in 0..4 {
            let s = w[0].s + (b - w[0].s) * k as f64 / 4.0;
            let d = dist_at(s);
            if !d.is_finite() {
                return Some((sign, f64::INFINITY));
            }
            worst = worst.max(d);
        }
    }
    worst = worst.max(dist_at(s_end));
    Some((sign, worst))
}

/// Integrate and classify, doubling the span while the orbit is undecided.
pub fn integrate_until_classified(
    seed: PhaseState,
    descriptor: SeedDescriptor,
    span: f64,
    max_span: f64,
    opts: &OrbitOptions,
) -> Result<Orbit> {
    let mut span = span;
    loop {
        let orbit = integrate_orbit_with(seed, descriptor, span, opts)?;
        if orbit.class.is_some() || span >= max_span {
            return Ok(orbit);
        }
        span = (2.0 * span).min(max_span);
    }
}

/// Unstable seeds at `n` equally spaced angles on the circle of radius `eps` in the `(Φ1, Φ3)` plane.
pub fn circle_seeds(eps: f64, n: usize) -> Result<Vec<(f64, PhaseState, SeedDescriptor)>> {
    (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            let (p1, p3) = (eps * th.cos(), eps * th.sin());
            Ok((th, seed_unstable(p1, p3)?, SeedDescriptor::Unstable { phi1: p1, phi3: p3 }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub angle: f64,
    pub orbit: Orbit,
}

/// Integrate and classify every seed in parallel; results keep the seed order.
pub fn classify_sweep(
    seeds: &[(f64, PhaseState, SeedDescriptor)],
    span: f64,
    max_span: f64,
    opts: &OrbitOptions,
) -> Result<Vec<SweepEntry>> {
    seeds
        .par_iter()
        .enumerate()
        .map(|(index, (angle, st, desc))| {
            let orbit = integrate_until_classified(*st, *desc, span, max_span, opts)?;
            Ok(SweepEntry { index, angle: *angle, orbit })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// Fitted exponential decay rate of `|Φ|∞` under backward evolution.
    pub rate: f64,
    /// Fitted rates of the individual components (`None` if identically zero).
    pub component_rates: [Option<f64>; 4],
    pub window: (f64, f64),
    pub samples: usize,
    pub pass: bool,
}

/// Minimum acceptable backward decay rate (slowest unstable eigenvalue minus slack).
pub const BACKWARD_RATE_FLOOR: f64 = 0.95;

/// Integrate the negated field from `seed` for `s_back` and fit the decay rate of `|Φ|`.
///
/// Backward evolution amplifies components along the stable directions, so the fit
/// window runs from `transient` to where `|Φ|` is still 100 times its minimum (or the end
/// of the run if `|Φ|` keeps decreasing).
pub fn backward_decay_check(seed: PhaseState, s_back: f64, tol: f64, transient: f64) -> Result<DecayReport> {
    let start = PhaseState::new(0.0, seed.phi);
    let traj = integrate_adaptive(|y: &Vec4| neg4(&rhs(y)), start, s_back, tol, &Guards::blowup(1e6))?;
    let t_end = traj.last().s;
    let n = 4000;
    let samples: Vec<(f64, Vec4)> = (0..=n)
        .map(|k| {
            let t = t_end * k as f64 / n as f64;
            (t, traj.state_at(t).unwrap_or([f64::NAN; 4]))
        })
        .collect();
    let imin = samples
        .iter()
        .enumerate()
        .min_by(|a, b| norm_inf(&a.1 .1).total_cmp(&norm_inf(&b.1 .1)))
        .map(|(i, _)| i)
        .unwrap_or(n);
    // Stop well before the minimum, where the components growing backward are still
    // negligible against the decaying ones.
    let floor = 100.0 * norm_inf(&samples[imin].1);
    let iend = if imin == n { n } else { (0..=imin).rev().find(|&i| norm_inf(&samples[i].1) >= floor).unwrap_or(0) };
    let window: Vec<&(f64, Vec4)> = samples[..=iend].iter().filter(|(t, _)| *t >= transient).collect();
    if window.len() < 10 {
        return Err(Error::InsufficientTail { have: window.len(), needed: 10 });
    }
    let pts: Vec<(f64, f64)> = window.iter().map(|(t, y)| (*t, norm_inf(y).ln())).collect();
    let rate = -linear_fit(&pts).0;
    let mut component_rates = [None; 4];
    for (c, cr) in component_rates.iter_mut().enumerate() {
        let pts: Vec<(f64, f64)> =
            window.iter().filter(|(_, y)| y[c] != 0.0).map(|(t, y)| (*t, y[c].abs().ln())).collect();
        if pts.len() >= 10 {
            *cr = Some(-linear_fit(&pts).0);
        }
    }
    let win = (window[0].0, window[window.len() - 1].0);
    Ok(DecayReport { rate, component_rates, window: win, samples: window.len(), pass: rate >= BACKWARD_RATE_FLOOR })
}

/// Least-squares `(slope, intercept, r²)` of `y` against `x`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_equator_are_fixed() {
        assert_eq!(rhs(&[0.0; 4]), [0.0; 4]);
        let r = rhs(&[FRAC_PI_2, 0.0, 0.0, 0.0]);
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn jacobian_at_origin_is_linearization() {
        let j = jacobian(&[0.0; 4]);
        let a = linearization().a;
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(j[i][k], a[i][k] as f64);
            }
        }
    }

    #[test]
    fn eigenstructure() {
        let l = linearization();
        assert!(l.eigenpairs_exact());
        assert_eq!(l.characteristic_polynomial(), [1, 0, -10, 0, 9]);
    }

    #[test]
    fn heteroclinic_at_zero() {
        let y = heteroclinic(0.0).phi;
        assert!((y[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(y[1], 1.0);
        assert_eq!(y[2], 0.0);
        assert_eq!(y[3], -1.0);
    }

    #[test]
    fn seeds() {
        let e = 1e-4;
        let s = seed_unstable(e, e).unwrap().phi;
        for v in s {
            assert!((v - e).abs() < 1e-19);
        }
        let s = seed_unstable(e, 9.0 * e).unwrap().phi;
        for (v, w) in s.iter().zip([1.0, 3.0, 9.0, 27.0]) {
            assert!((v - w * e).abs() < 1e-18);
        }
        assert_eq!(seed_unstable(0.0, 0.0).unwrap().phi, [0.0; 4]);
        assert!(matches!(seed_unstable(0.02, 0.0), Err(Error::SeedTooLarge { .. })));
    }

    #[test]
    fn eigen_coordinates_of_basis() {
        let c = eigen_coordinates(&[1.0, 1.0, 1.0, 1.0]);
        assert!((c[0] - 1.0).abs() < 1e-14 && c[1].abs() < 1e-14 && c[2].abs() < 1e-14 && c[3].abs() < 1e-14);
        let c = eigen_coordinates(&[1.0, 3.0, 9.0, 27.0]);
        assert!((c[1] - 1.0).abs() < 1e-14 && c[0].abs() < 1e-13);
    }

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 - 3.0 * i as f64)).collect();
        let (a, b, r2) = linear_fit(&pts);
        assert!((a + 3.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
