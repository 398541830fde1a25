//! Equivariant biharmonic map profiles in dimension four: the bubble, maps built from
//! unstable-manifold orbits with arbitrary boundary value, bi-energy, steady residuals
//! and growth/decay diagnostics at the origin.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{eigen_coordinates, linear_fit, linear_flow, rhs, seed_unstable, Orbit, SeedDescriptor};
use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate_adaptive, EventSpec, Guards};
use crate::quadrature;
use crate::reduction::{biharmonic_rhs_closed, closed_rhs_on_grid, FdOrder};
use crate::types::{norm_inf, Parity, PhaseState, RadialGrid, RadialProfile, Vec4};

/// `vol(S³)`.
pub const VOL_S3: f64 = 2.0 * PI * PI;

/// `(ψ, ψ', ψ'', ψ''', ψ'''')` at a radius.
pub type Jet = [f64; 5];

/// Where a profile's derivatives come from.
#[derive(Clone)]
pub enum ProfileSource {
    Trivial,
    Bubble { lambda: f64 },
    /// `ψ(r) = Φ1(log r + s_a)` along an orbit.
    Orbit { orbit: Arc<Orbit>, s_a: f64 },
    Analytic { jet: Arc<dyn Fn(f64) -> Jet + Send + Sync> },
    /// Grid values only; derivatives by finite differences.
    Samples,
}

impl fmt::Debug for ProfileSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSource::Trivial => write!(f, "Trivial"),
            ProfileSource::Bubble { lambda } => write!(f, "Bubble {{ lambda: {lambda} }}"),
            ProfileSource::Orbit { s_a, .. } => write!(f, "Orbit {{ s_a: {s_a} }}"),
            ProfileSource::Analytic { .. } => write!(f, "Analytic"),
            ProfileSource::Samples => write!(f, "Samples"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingChoice {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Trivial,
    Bubble { lambda: f64 },
    Orbit { seed: SeedDescriptor, seed_phi: Vec4, s_translation: f64, crossing: CrossingChoice },
    Analytic { name: String },
    Samples,
}

/// A steady profile on `[0, r_max]` with its boundary data and derivative source.
#[derive(Debug, Clone)]
pub struct BiharmonicMapProfile {
    pub profile: RadialProfile,
    /// `(ψ(1), ∂r ψ(1))`, or the values at `r_max` when the grid ends elsewhere.
    pub boundary: (f64, f64),
    pub provenance: Provenance,
    pub source: ProfileSource,
}

impl BiharmonicMapProfile {
    pub fn trivial(grid: RadialGrid) -> Result<Self> {
        let n = grid.len();
        Ok(Self {
            profile: RadialProfile::new(grid, vec![0.0; n], Parity::Odd)?,
            boundary: (0.0, 0.0),
            provenance: Provenance::Trivial,
            source: ProfileSource::Trivial,
        })
    }

    /// A profile with analytic derivatives supplied by `jet`.
    pub fn from_jet(
        name: impl Into<String>,
        grid: RadialGrid,
        jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Result<Self> {
        let r1 = grid.r_max();
        let j1 = jet(r1);
        let profile = RadialProfile::from_fn(grid, |r| jet(r)[0], Parity::Odd)?;
        Ok(Self {
            profile,
            boundary: (j1[0], j1[1]),
            provenance: Provenance::Analytic { name: name.into() },
            source: ProfileSource::Analytic { jet: Arc::new(jet) },
        })
    }

    pub fn from_samples(profile: RadialProfile) -> Result<Self> {
        if profile.parity() != Parity::Odd {
            return Err(invalid("profile must be odd"));
        }
        let n = profile.values().len();
        let h = profile.grid().uniform_h()?;
        let v = profile.values();
        let slope = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        Ok(Self {
            boundary: (v[n - 1], slope),
            profile,
            provenance: Provenance::Samples,
            source: ProfileSource::Samples,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        self.profile.grid()
    }

    /// Analytic or orbit-derived jet at `r > 0`; `None` for sampled profiles.
    pub fn jet(&self, r: f64) -> Option<Jet> {
        match &self.source {
            ProfileSource::Trivial => Some([0.0; 5]),
            ProfileSource::Bubble { lambda } => Some(bubble_jet(*lambda, r)),
            ProfileSource::Orbit { orbit, s_a } => orbit_jet(orbit, *s_a, r),
            ProfileSource::Analytic { jet } => Some(jet(r)),
            ProfileSource::Samples => None,
        }
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.profile = self.profile.negated();
        out.boundary = (-self.boundary.0, -self.boundary.1);
        out.source = match &self.source {
            ProfileSource::Bubble { lambda } => {
                let l = *lambda;
                ProfileSource::Analytic { jet: Arc::new(move |r| bubble_jet(l, r).map(|v| -v)) }
            }
            ProfileSource::Orbit { orbit, s_a } => {
                let (orbit, s_a) = (orbit.clone(), *s_a);
                ProfileSource::Analytic {
                    jet: Arc::new(move |r| orbit_jet(&orbit, s_a, r).unwrap_or([f64::NAN; 5]).map(|v| -v)),
                }
            }
            ProfileSource::Analytic { jet } => {
                let jet = jet.clone();
                ProfileSource::Analytic { jet: Arc::new(move |r| jet(r).map(|v| -v)) }
            }
            other => other.clone(),
        };
        out
    }
}

/// Jet of `2 arctan(λr)`.
pub fn bubble_jet(lambda: f64, r: f64) -> Jet {
    let u = lambda * r;
    let q = 1.0 + u * u;
    [
        2.0 * u.atan(),
        2.0 * lambda / q,
        -4.0 * lambda.powi(2) * u / (q * q),
        4.0 * lambda.powi(3) * (3.0 * u * u - 1.0) / q.powi(3),
        48.0 * lambda.powi(4) * u * (1.0 - u * u) / q.powi(4),
    ]
}

/// Radial jet from the log-radial state: with `s = log r`,
/// `ψ' = Φ2/r`, `ψ'' = (Φ3 - Φ2)/r²`, `ψ''' = (Φ4 - 3Φ3 + 2Φ2)/r³`,
/// `ψ'''' = (∂sΦ4 - 6Φ4 + 11Φ3 - 6Φ2)/r⁴`.
pub fn jet_from_phase(phi: &Vec4, dphi4: f64, r: f64) -> Jet {
    let [p1, p2, p3, p4] = *phi;
    [
        p1,
        p2 / r,
        (p3 - p2) / (r * r),
        (p4 - 3.0 * p3 + 2.0 * p2) / r.powi(3),
        (dphi4 - 6.0 * p4 + 11.0 * p3 - 6.0 * p2) / r.powi(4),
    ]
}

fn orbit_jet(orbit: &Orbit, s_a: f64, r: f64) -> Option<Jet> {
    let (phi, d4) = orbit.jet_at(r.ln() + s_a)?;
    Some(jet_from_phase(&phi, d4, r))
}

pub fn bubble(lambda: f64, grid: RadialGrid) -> Result<BiharmonicMapProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("bubble scale {lambda} must be positive")));
    }
    let r1 = grid.r_max();
    let j = bubble_jet(lambda, r1);
    Ok(BiharmonicMapProfile {
        profile: RadialProfile::from_fn(grid, |r| 2.0 * (lambda * r).atan(), Parity::Odd)?,
        boundary: (j[0], j[1]),
        provenance: Provenance::Bubble { lambda },
        source: ProfileSource::Bubble { lambda },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    pub seed_eps: f64,
    /// Seed direction in the `(Φ1, Φ3)` plane, scaled by `seed_eps`.
    pub seed_dir: (f64, f64),
    /// The orbit starts this far before `s = 0` on the linear flow through the seed, so
    /// that small targets still have their interior on the integrated part of the orbit.
    pub backtrack: f64,
    pub crossing: CrossingChoice,
    pub integrator_tol: f64,
    pub span: f64,
    pub blowup_norm: f64,
    pub grid_nodes: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            seed_eps: 1e-4,
            seed_dir: (1.0, 9.0),
            backtrack: 4.0,
            crossing: CrossingChoice::Last,
            integrator_tol: 1e-12,
            span: 60.0,
            blowup_norm: 1e100,
            grid_nodes: 257,
        }
    }
}

/// A steady profile on `[0, 1]` with `ψ(1) = a`, using default options.
pub fn construct_map(a: f64) -> Result<BiharmonicMapProfile> {
    construct_map_with(a, &MapOptions::default())
}

/// Integrate the unstable-manifold orbit of the sign of `a`, locate `Φ1 = a`, translate the
/// crossing to `s = 0` and read `ψ(r) = Φ1(log r)` off the orbit.
///
/// The run stops once the orbit is in the late-life region beyond `|a|`, where `Φ1` is
/// monotone, so the last crossing is the one on the monotone tail.
pub fn construct_map_with(a: f64, opts: &MapOptions) -> Result<BiharmonicMapProfile> {
    if !a.is_finite() {
        return Err(invalid("target must be finite"));
    }
    let grid = RadialGrid::uniform(opts.grid_nodes, 1.0)?;
    if a == 0.0 {
        return BiharmonicMapProfile::trivial(grid);
    }
    let sg = a.signum();
    let (p1, p3) = (sg * opts.seed_eps * opts.seed_dir.0, sg * opts.seed_eps * opts.seed_dir.1);
    let seed0 = seed_unstable(p1, p3)?;
    let seed = PhaseState::new(-opts.backtrack, linear_flow(&seed0.phi, -opts.backtrack));
    let target = a;
    let mut guards =
        Guards::blowup(opts.blowup_norm).with_event(EventSpec::new(0, move |y: &Vec4| y[0] - target));
    guards.stop_when = Some(Box::new(move |y: &Vec4| {
        sg * y[1] > 0.0 && sg * y[2] >= 1.0 && sg * y[3] >= 0.0 && sg * y[0] > sg * target
    }));
    let trajectory = integrate_adaptive(rhs, seed, opts.span, opts.integrator_tol, &guards)?;
    let crossings: Vec<(f64, Vec4)> =
        trajectory.events().iter().filter(|e| e.id == 0).map(|e| (e.s, e.state)).collect();
    let pick = match opts.crossing {
        CrossingChoice::First => crossings.first(),
        CrossingChoice::Last => crossings.last(),
    };
    let Some(&(s_a, state_a)) = pick else {
        let reached = trajectory.states().iter().map(|st| st.phi[0].abs()).fold(0.0, f64::max);
        return Err(Error::TargetUnreachableOnOrbit { target: a, reached });
    };
    let orbit = Arc::new(Orbit {
        trajectory,
        events: Vec::new(),
        class: None,
        seed: SeedDescriptor::Unstable { phi1: p1, phi3: p3 },
        seed_state: seed,
    });
    let nodes = grid.nodes().to_vec();
    let mut values = Vec::with_capacity(nodes.len());
    for &r in &nodes {
        let v = if r == 0.0 {
            0.0
        } else if r == 1.0 {
            state_a[0]
        } else {
            orbit.state_at(r.ln() + s_a).ok_or_else(|| invalid("orbit does not cover the grid"))?[0]
        };
        values.push(v);
    }
    Ok(BiharmonicMapProfile {
        profile: RadialProfile::new(grid, values, Parity::Odd)?,
        boundary: (state_a[0], state_a[1]),
        provenance: Provenance::Orbit {
            seed: orbit.seed,
            seed_phi: seed0.phi,
            s_translation: s_a,
            crossing: opts.crossing,
        },
        source: ProfileSource::Orbit { orbit, s_a },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub r: Vec<f64>,
    pub residual: Vec<f64>,
    pub max_abs: f64,
    pub band: (f64, f64),
}

/// Steady residual of the closed-form reduced equation (`d = 4`) at grid nodes inside
/// `band`, from the profile's jet when available and from second-order differences otherwise.
pub fn ode_residual(map: &BiharmonicMapProfile, band: (f64, f64)) -> Result<ResidualReport> {
    let (r, residual): (Vec<f64>, Vec<f64>) = if matches!(map.source, ProfileSource::Samples) {
        let rr = closed_rhs_on_grid(&map.profile, 4, FdOrder::Second)?;
        rr.r.iter().zip(&rr.values).filter(|(r, _)| **r >= band.0 && **r <= band.1).map(|(a, b)| (*a, *b)).unzip()
    } else {
        map.grid()
            .nodes()
            .iter()
            .filter(|&&r| r > 0.0 && r >= band.0 && r <= band.1)
            .map(|&r| {
                let j = map.jet(r).unwrap_or([f64::NAN; 5]);
                (r, biharmonic_rhs_closed(j[0], j[1], j[2], j[3], j[4], r, 4))
            })
            .unzip()
    };
    let max_abs = residual.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
    Ok(ResidualReport { r, residual, max_abs, band })
}

/// Slope of `log|ψ|` against `log r` over `[r_lo, r_hi]`, sampled log-uniformly.
pub fn origin_rate(map: &BiharmonicMapProfile, r_lo: f64, r_hi: f64) -> Option<f64> {
    let n = 60;
    let pts: Vec<(f64, f64)> = (0..n)
        .filter_map(|k| {
            let r = (r_lo.ln() + (r_hi / r_lo).ln() * k as f64 / (n - 1) as f64).exp();
            let v = map.jet(r)?[0].abs();
            (v > 0.0).then(|| (r.ln(), v.ln()))
        })
        .collect();
    (pts.len() >= 10).then(|| linear_fit(&pts).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Ball(f64),
    AllSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub error_estimate: f64,
    pub domain: Domain,
    /// `(R, E(B_R))` for doubling radii, filled for the whole-space domain.
    pub tail_check: Vec<(f64, f64)>,
}

/// Energy density `((L0 sin ψ)² + (L1 cos ψ)²) r³` in dimension four.
pub fn energy_density(j: &Jet, r: f64) -> f64 {
    let (s, c) = j[0].sin_cos();
    let (p1, p2) = (j[1], j[2]);
    let g0 = s;
    let g0d = c * p1;
    let g0dd = -s * p1 * p1 + c * p2;
    let g1d = -s * p1;
    let g1dd = -c * p1 * p1 - s * p2;
    let l0 = -g0dd - 3.0 * g0d / r + 3.0 * g0 / (r * r);
    let l1 = -g1dd - 3.0 * g1d / r;
    (l0 * l0 + l1 * l1) * r.powi(3)
}

/// Bi-energy `vol(S³) ∫ ((L0 sin ψ)² + (L1 cos ψ)²) r³ dr` by adaptive Gauss–Kronrod quadrature.
/// The whole-space integral uses `r = tan(θ/2)` and reports the doubling-radius sequence.
pub fn bi_energy(map: &BiharmonicMapProfile, domain: Domain, tol: f64) -> Result<EnergyReport> {
    if matches!(map.source, ProfileSource::Samples) {
        let e = bi_energy_on_grid(&map.profile, Some(map.boundary.1))?;
        return Ok(EnergyReport { value: e, error_estimate: f64::NAN, domain, tail_check: Vec::new() });
    }
    let density = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        map.jet(r).map_or(f64::NAN, |j| energy_density(&j, r))
    };
    let ball = |radius: f64| quadrature::integrate(density, 0.0, radius, tol * 1e-3, tol, 4000);
    match domain {
        Domain::Ball(radius) => {
            if !(radius > 0.0) {
                return Err(invalid("ball radius must be positive"));
            }
            if !matches!(map.source, ProfileSource::Bubble { .. } | ProfileSource::Trivial | ProfileSource::Analytic { .. })
                && radius > map.grid().r_max() * (1.0 + 1e-12)
            {
                return Err(invalid("profile is only defined up to the end of its grid"));
            }
            let q = ball(radius)?;
            Ok(EnergyReport { value: VOL_S3 * q.value, error_estimate: VOL_S3 * q.error, domain, tail_check: Vec::new() })
        }
        Domain::AllSpace => {
            if !matches!(map.source, ProfileSource::Bubble { .. } | ProfileSource::Trivial | ProfileSource::Analytic { .. }) {
                return Err(invalid("whole-space energy needs a profile defined on all radii"));
            }
            let compact = |t: f64| {
                let r = (0.5 * t).tan();
                density(r) * 0.5 * (1.0 + r * r)
            };
            let q = quadrature::integrate(compact, 0.0, PI, tol * 1e-3, tol, 4000)?;
            let value = VOL_S3 * q.value;
            let mut tail_check = Vec::new();
            let mut radius = 1.0;
            let mut prev_gap = f64::INFINITY;
            for _ in 0..12 {
                let e = VOL_S3 * ball(radius)?.value;
                tail_check.push((radius, e));
                let gap = (value - e).abs();
                if gap <= tol * value.abs().max(1e-300) {
                    break;
                }
                if gap > prev_gap * (1.0 + 1e-9) {
                    return Err(Error::QuadratureNotConverged { estimate: gap, tol: tol * value.abs() });
                }
                prev_gap = gap;
                radius *= 2.0;
            }
            Ok(EnergyReport { value, error_estimate: VOL_S3 * q.error, domain, tail_check })
        }
    }
}

/// Discrete bi-energy on a uniform odd profile: second-order differences with odd/even
/// reflection at the origin, a ghost node from `outer_slope` at the last node (one-sided
/// differences otherwise), and composite Simpson in `r`.
pub fn bi_energy_on_grid(psi: &RadialProfile, outer_slope: Option<f64>) -> Result<f64> {
    let h = psi.grid().uniform_h()?;
    let v = psi.values();
    let n = v.len();
    if n < 5 {
        return Err(Error::GridTooCoarse { needed: 5, have: n });
    }
    let ghost = match outer_slope {
        Some(a1) => v[n - 2] + 2.0 * h * a1,
        None => 3.0 * v[n - 1] - 3.0 * v[n - 2] + v[n - 3],
    };
    let at = |j: isize| -> f64 {
        if j < 0 {
            -v[(-j) as usize]
        } else if j as usize >= n {
            ghost
        } else {
            v[j as usize]
        }
    };
    let dens: Vec<f64> = (0..n as isize)
        .map(|j| {
            if j == 0 {
                return 0.0;
            }
            let r = j as f64 * h;
            let (sm, s0, sp) = (at(j - 1).sin(), at(j).sin(), at(j + 1).sin());
            let (cm, c0, cp) = (at(j - 1).cos(), at(j).cos(), at(j + 1).cos());
            let l0 = -(sp - 2.0 * s0 + sm) / (h * h) - 3.0 * (sp - sm) / (2.0 * h * r) + 3.0 * s0 / (r * r);
            let l1 = -(cp - 2.0 * c0 + cm) / (h * h) - 3.0 * (cp - cm) / (2.0 * h * r);
            (l0 * l0 + l1 * l1) * r.powi(3)
        })
        .collect();
    Ok(VOL_S3 * composite_simpson(&dens, h))
}

/// Simpson's rule on equally spaced samples; an odd interval count closes with a trapezoid.
pub fn composite_simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    let mut k = 0;
    while k + 2 <= even {
        s += h / 3.0 * (y[k] + 4.0 * y[k + 1] + y[k + 2]);
        k += 2;
    }
    if even < intervals {
        s += 0.5 * h * (y[n - 2] + y[n - 1]);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Per refinement level: `r_min` and the suprema of `|ψ|/r`, `|ψ'|`, `|ψ''|/r`.
    pub levels: Vec<(f64, [f64; 3])>,
    pub sup: [f64; 3],
    pub stable: bool,
    pub pass: bool,
}

/// Suprema of `|ψ|/r`, `|∂r ψ|`, `|∂r² ψ|/r` on geometric grids over `[r_min, r_cut]` with
/// `r_min` shrinking by `10²` per level; stable when consecutive levels agree to 1%.
pub fn origin_growth_check(map: &BiharmonicMapProfile, r_cut: f64) -> Result<GrowthReport> {
    if !(r_cut > 0.0) {
        return Err(invalid("r_cut must be positive"));
    }
    let mut levels = Vec::new();
    for k in 1..=4 {
        let r_min = r_cut * 10f64.powi(-2 * k);
        let n = 100 * 2 * k as usize;
        let mut sup = [0.0f64; 3];
        for i in 0..=n {
            let r = (r_min.ln() + (r_cut / r_min).ln() * i as f64 / n as f64).exp();
            let j = map.jet(r).ok_or_else(|| invalid("growth check needs profile derivatives"))?;
            let vals = [j[0].abs() / r, j[1].abs(), j[2].abs() / r];
            for c in 0..3 {
                sup[c] = if vals[c].is_nan() { f64::NAN } else { sup[c].max(vals[c]) };
            }
        }
        levels.push((r_min, sup));
    }
    let last = levels[levels.len() - 1].1;
    let prev = levels[levels.len() - 2].1;
    let stable = (0..3).all(|c| (last[c] - prev[c]).abs() <= 1e-2 * last[c].abs().max(1e-300) || last[c] == prev[c]);
    let finite = last.iter().all(|v| v.is_finite());
    Ok(GrowthReport { levels, sup: last, stable, pass: stable && finite })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VDecayReport {
    /// Decay rates of `V(σ) = P⁻¹ Φ(-σ)` per component; `None` where the component vanishes identically.
    pub rates: [Option<f64>; 4],
    pub window: (f64, f64),
    pub samples: usize,
    pub floors: [f64; 4],
    pub pass: bool,
}

pub const V_RATE_FLOORS: [f64; 4] = [0.95, 2.85, 2.85, 2.85];

/// Decay rates of the eigen-coordinates `V = P⁻¹Φ` toward `s → -∞`, fitted on the orbit's
/// near-origin segment: from `transient` after its start until `|Φ|∞` first reaches
/// `phi_max`.
pub fn v_decay_check(orbit: &Orbit, transient: f64, phi_max: f64) -> Result<VDecayReport> {
    let traj = &orbit.trajectory;
    let s0 = traj.start().s + transient;
    let s1 = traj
        .states()
        .iter()
        .find(|st| norm_inf(&st.phi) >= phi_max)
        .map_or(traj.last().s, |st| st.s);
    let n = 400;
    if !(s1 > s0) {
        return Err(Error::InsufficientTail { have: 0, needed: 20 });
    }
    let samples: Vec<(f64, Vec4)> = (0..=n)
        .map(|k| {
            let s = s0 + (s1 - s0) * k as f64 / n as f64;
            (s, eigen_coordinates(&orbit.state_at(s).unwrap_or([f64::NAN; 4])))
        })
        .collect();
    let mut rates = [None; 4];
    for (c, rate) in rates.iter_mut().enumerate() {
        let pts: Vec<(f64, f64)> =
            samples.iter().filter(|(_, v)| v[c] != 0.0).map(|(s, v)| (*s, v[c].abs().ln())).collect();
        if pts.is_empty() {
            continue;
        }
        if pts.len() < 20 {
            return Err(Error::InsufficientTail { have: pts.len(), needed: 20 });
        }
        // growth in s is decay in σ = -s
        *rate = Some(linear_fit(&pts).0);
    }
    let pass = rates.iter().zip(V_RATE_FLOORS).all(|(r, f)| r.map_or(true, |r| r >= f));
    Ok(VDecayReport { rates, window: (s0, s1), samples: n + 1, floors: V_RATE_FLOORS, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_jet_matches_differences() {
        let h = 1e-4;
        for r in [0.3, 1.0, 2.5] {
            let j = bubble_jet(1.7, r);
            let jp = bubble_jet(1.7, r + h);
            let jm = bubble_jet(1.7, r - h);
            for k in 0..4 {
                let fd = (jp[k] - jm[k]) / (2.0 * h);
                assert!((fd - j[k + 1]).abs() < 1e-6 * (1.0 + j[k + 1].abs()), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let h = 0.125;
        let y: Vec<f64> = (0..=8).map(|k| (k as f64 * h).powi(3)).collect();
        assert!((composite_simpson(&y, h) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn phase_jet_of_power() {
        // ψ = r³ has Φ = (e^{3s}, 3e^{3s}, 9e^{3s}, 27e^{3s}), ∂sΦ4 = 81 e^{3s}
        let r: f64 = 0.7;
        let e = r.powi(3);
        let j = jet_from_phase(&[e, 3.0 * e, 9.0 * e, 27.0 * e], 81.0 * e, r);
        let expect = [e, 3.0 * r * r, 6.0 * r, 6.0, 0.0];
        for k in 0..5 {
            assert!((j[k] - expect[k]).abs() < 1e-12, "{k}");
        }
    }
}
