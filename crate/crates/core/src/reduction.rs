//! Radial operator calculus and the symmetry-reduced right-hand side of the flow.
//!
//! For `u = {g0, g1}` with `g0` multiplying `x/|x|`, the negative Laplacian acts
//! componentwise as `{L0 g0, L1 g1}` with
//! `L1 f = -f'' - (d-1) f'/r` and `L0 f = L1 f + (d-1) f/r²`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fd::{centered_half_width, centered_weights};
use crate::types::{FlowParams, Parity, RadialGrid, RadialProfile, MIN_GRID_NODES};

/// Accuracy order of the centered finite-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdOrder {
    Second,
    Fourth,
}

impl FdOrder {
    pub fn accuracy(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    /// Half-width of the stencils used by `L0`/`L1`.
    pub fn half_width(self) -> usize {
        centered_half_width(2, self.accuracy())
    }
}

/// Uniform-grid stencils for derivatives 1..=4 with parity-based reflection at the origin.
pub(crate) struct Stencils {
    pub w: [Vec<f64>; 4],
    pub h: f64,
}

impl Stencils {
    pub fn new(h: f64, order: FdOrder) -> Self {
        let a = order.accuracy();
        Self { w: [centered_weights(1, a), centered_weights(2, a), centered_weights(3, a), centered_weights(4, a)], h }
    }

    pub fn half(&self, k: usize) -> usize {
        self.w[k - 1].len() / 2
    }

    /// Derivative `k` at node `j`, reading neighbours through `get`.
    pub fn apply(&self, k: usize, j: isize, get: &dyn Fn(isize) -> f64) -> f64 {
        let w = &self.w[k - 1];
        let p = (w.len() / 2) as isize;
        let mut acc = 0.0;
        for (i, c) in w.iter().enumerate() {
            if *c != 0.0 {
                acc += c * get(j + i as isize - p);
            }
        }
        acc / self.h.powi(k as i32)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RadialOp {
    L0,
    L1,
}

fn radial_op(f: &RadialProfile, d: u32, order: FdOrder, op: RadialOp) -> Result<RadialProfile> {
    if d < 2 {
        return Err(invalid(format!("dimension d = {d} must be at least 2")));
    }
    let h = f.grid().uniform_h()?;
    let n = f.grid().len();
    let p = order.half_width();
    let needed = (MIN_GRID_NODES + p).max(5);
    if n < needed {
        return Err(Error::GridTooCoarse { needed, have: n });
    }
    let st = Stencils::new(h, order);
    let vals = f.values();
    let sign = if f.valid_from() == 0 { f.parity().reflection_sign() } else { None };
    let get = |j: isize| -> f64 {
        if j >= 0 {
            vals[j as usize]
        } else {
            sign.unwrap_or(f64::NAN) * vals[(-j) as usize]
        }
    };
    let dm1 = (d - 1) as f64;
    let out_n = n - p;
    let (out_parity, origin) = match (op, sign) {
        (RadialOp::L1, Some(s)) if s > 0.0 => {
            (Parity::Even, Some(-(d as f64) * st.apply(2, 0, &get)))
        }
        (RadialOp::L0, Some(s)) if s < 0.0 => (Parity::Odd, Some(0.0)),
        _ => (Parity::None, None),
    };
    let first = if sign.is_some() { 1 } else { (f.valid_from() + p).max(1) };
    let mut out = vec![0.0; out_n];
    if let Some(v0) = origin {
        out[0] = v0;
    }
    for (j, o) in out.iter_mut().enumerate().take(out_n).skip(first) {
        let r = j as f64 * h;
        let jj = j as isize;
        let d1 = st.apply(1, jj, &get);
        let d2 = st.apply(2, jj, &get);
        let mut v = -d2 - dm1 * d1 / r;
        if op == RadialOp::L0 {
            v += dm1 * vals[j] / (r * r);
        }
        *o = v;
    }
    let valid_from = if origin.is_some() { 0 } else { first };
    RadialProfile::with_valid_from(f.grid().truncated(out_n)?, out, out_parity, valid_from)
}

/// `L1 f = -f'' - (d-1) f'/r` with second-order stencils.
pub fn apply_l1(f: &RadialProfile, d: u32) -> Result<RadialProfile> {
    radial_op(f, d, FdOrder::Second, RadialOp::L1)
}

pub fn apply_l1_with(f: &RadialProfile, d: u32, order: FdOrder) -> Result<RadialProfile> {
    radial_op(f, d, order, RadialOp::L1)
}

/// `L0 f = -f'' - (d-1) f'/r + (d-1) f/r²` with second-order stencils.
pub fn apply_l0(f: &RadialProfile, d: u32) -> Result<RadialProfile> {
    radial_op(f, d, FdOrder::Second, RadialOp::L0)
}

pub fn apply_l0_with(f: &RadialProfile, d: u32, order: FdOrder) -> Result<RadialProfile> {
    radial_op(f, d, order, RadialOp::L0)
}

/// Components `{g0, g1}` of an equivariant field on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePair {
    g0: RadialProfile,
    g1: RadialProfile,
}

impl ProfilePair {
    pub fn new(g0: RadialProfile, g1: RadialProfile) -> Result<Self> {
        if g0.grid() != g1.grid() {
            return Err(invalid("pair components must share a grid"));
        }
        Ok(Self { g0, g1 })
    }

    /// `{sin ψ, cos ψ}`, the map itself.
    pub fn from_psi(psi: &RadialProfile) -> Result<Self> {
        let (p0, p1) = match psi.parity() {
            Parity::Odd => (Parity::Odd, Parity::Even),
            _ => (Parity::None, Parity::None),
        };
        Self::new(psi.map(f64::sin, p0)?, psi.map(f64::cos, p1)?)
    }

    pub fn g0(&self) -> &RadialProfile {
        &self.g0
    }

    pub fn g1(&self) -> &RadialProfile {
        &self.g1
    }

    pub fn grid(&self) -> &RadialGrid {
        self.g0.grid()
    }

    /// Largest deviation of `g0² + g1²` from one over valid nodes.
    pub fn unit_defect(&self) -> f64 {
        let from = self.g0.valid_from().max(self.g1.valid_from());
        self.g0.values()[from..]
            .iter()
            .zip(&self.g1.values()[from..])
            .map(|(a, b)| (a * a + b * b - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `-Δ{g0, g1} = {L0 g0, L1 g1}`.
pub fn neg_laplacian_pair(p: &ProfilePair, d: u32) -> Result<ProfilePair> {
    neg_laplacian_pair_with(p, d, FdOrder::Second)
}

pub fn neg_laplacian_pair_with(p: &ProfilePair, d: u32, order: FdOrder) -> Result<ProfilePair> {
    ProfilePair::new(apply_l0_with(&p.g0, d, order)?, apply_l1_with(&p.g1, d, order)?)
}

/// Tangential part `-v + (v·u) u` of `-v` at the unit vector `u`.
pub fn tangential_part(v: (f64, f64), u: (f64, f64)) -> (f64, f64) {
    let vu = v.0 * u.0 + v.1 * u.1;
    (-v.0 + vu * u.0, -v.1 + vu * u.1)
}

/// `∂t ψ` on interior nodes; the origin is excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRHS {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub order: FdOrder,
}

impl ReducedRHS {
    /// Max of |value| over nodes with `lo <= r <= hi`.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| **r >= lo && **r <= hi)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// `∂t ψ` from `m` nested applications of `-Δ` to `{sin ψ, cos ψ}` followed by the
/// tangential projection read off in the frame `(cos ψ, -sin ψ)`.
pub fn reduced_rhs_numeric(psi: &RadialProfile, params: FlowParams) -> Result<ReducedRHS> {
    reduced_rhs_numeric_with(psi, params, FdOrder::Second)
}

pub fn reduced_rhs_numeric_with(psi: &RadialProfile, params: FlowParams, order: FdOrder) -> Result<ReducedRHS> {
    if psi.parity() != Parity::Odd {
        return Err(invalid("the profile must be odd about the origin (ψ(0) = 0)"));
    }
    let m = params.m() as usize;
    let needed = (4 * m + 5).max(MIN_GRID_NODES + m * order.half_width());
    if psi.grid().len() < needed {
        return Err(Error::GridTooCoarse { needed, have: psi.grid().len() });
    }
    let u = ProfilePair::from_psi(psi)?;
    let mut v = u.clone();
    for _ in 0..m {
        v = neg_laplacian_pair_with(&v, params.d(), order)?;
    }
    let n = v.grid().len();
    let from = v.g0.valid_from().max(v.g1.valid_from()).max(1);
    let mut r = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in from..n {
        let (s, c) = (u.g0.values()[j], u.g1.values()[j]);
        let w = tangential_part((v.g0.values()[j], v.g1.values()[j]), (s, c));
        r.push(v.grid().nodes()[j]);
        values.push(w.0 * c - w.1 * s);
    }
    Ok(ReducedRHS { r, values, order })
}

/// Closed-form `∂t ψ` of the biharmonic flow in dimension `d` from the local jet of `ψ` at `r > 0`.
pub fn biharmonic_rhs_closed(psi: f64, dpsi: f64, d2psi: f64, d3psi: f64, d4psi: f64, r: f64, d: u32) -> f64 {
    let d = d as f64;
    let (s2, c2) = (2.0 * psi).sin_cos();
    let dm1 = d - 1.0;
    let q = d * d - 4.0 * d + 3.0;
    -d4psi - 2.0 * dm1 / r * d3psi + 6.0 * dpsi * dpsi * d2psi - dm1 / (r * r) * s2 * dpsi * dpsi
        + 2.0 * dm1 / r * dpsi.powi(3)
        + (dm1 * c2 - d * d + 5.0 * d - 4.0) / (r * r) * d2psi
        + (q * c2 + 2.0 * d * d - 8.0 * d + 6.0) / r.powi(3) * dpsi
        - 3.0 * q / (2.0 * r.powi(4)) * s2
}

/// Partial derivatives of [`biharmonic_rhs_closed`] with respect to `(ψ, ψ', ψ'', ψ''', ψ'''')`.
pub fn biharmonic_rhs_closed_partials(psi: f64, dpsi: f64, d2psi: f64, _d3psi: f64, r: f64, d: u32) -> [f64; 5] {
    let d = d as f64;
    let (s2, c2) = (2.0 * psi).sin_cos();
    let dm1 = d - 1.0;
    let q = d * d - 4.0 * d + 3.0;
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let dpsi_ = -dm1 / r2 * 2.0 * c2 * dpsi * dpsi - 2.0 * dm1 * s2 / r2 * d2psi - 2.0 * q * s2 / r3 * dpsi
        - 3.0 * q / r4 * c2;
    let d1 = 12.0 * dpsi * d2psi - 2.0 * dm1 / r2 * s2 * dpsi + 6.0 * dm1 / r * dpsi * dpsi
        + (q * c2 + 2.0 * d * d - 8.0 * d + 6.0) / r3;
    let d2 = 6.0 * dpsi * dpsi + (dm1 * c2 - d * d + 5.0 * d - 4.0) / r2;
    let d3 = -2.0 * dm1 / r;
    [dpsi_, d1, d2, d3, -1.0]
}

/// A smooth odd test profile for the cross-validation study.
pub struct TestProfile {
    pub name: String,
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TestProfile {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Box::new(f) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationRow {
    pub profile: String,
    pub n: usize,
    pub h: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub order: FdOrder,
    pub band: (f64, f64),
    pub rows: Vec<CrossValidationRow>,
    /// Least-squares slope of log(discrepancy) against log(h), per profile; `None` when all discrepancies vanish.
    pub rates: Vec<(String, Option<f64>)>,
    pub pass: bool,
}

/// Closed-form RHS at interior nodes with FD derivatives of `psi` of the given order.
pub fn closed_rhs_on_grid(psi: &RadialProfile, d: u32, order: FdOrder) -> Result<ReducedRHS> {
    if psi.parity() != Parity::Odd {
        return Err(invalid("the profile must be odd about the origin (ψ(0) = 0)"));
    }
    let h = psi.grid().uniform_h()?;
    let st = Stencils::new(h, order);
    let p = st.half(4);
    let n = psi.grid().len();
    if n < MIN_GRID_NODES + p {
        return Err(Error::GridTooCoarse { needed: MIN_GRID_NODES + p, have: n });
    }
    let vals = psi.values();
    let get = |j: isize| if j >= 0 { vals[j as usize] } else { -vals[(-j) as usize] };
    let mut r = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in 1..n - p {
        let jj = j as isize;
        let rj = psi.grid().nodes()[j];
        let v = biharmonic_rhs_closed(
            vals[j],
            st.apply(1, jj, &get),
            st.apply(2, jj, &get),
            st.apply(3, jj, &get),
            st.apply(4, jj, &get),
            rj,
            d,
        );
        r.push(rj);
        values.push(v);
    }
    Ok(ReducedRHS { r, values, order })
}

/// Compare the nested-operator RHS with the closed form over a sequence of uniform grids on `[0, 1]`.
pub fn cross_validate(
    params: FlowParams,
    profiles: &[TestProfile],
    grid_sizes: &[usize],
    order: FdOrder,
    band: (f64, f64),
) -> Result<CrossValidationReport> {
    if params != FlowParams::biharmonic() {
        return Err(invalid("the closed form is available for d = 4, m = 2 only"));
    }
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    let mut pass = true;
    for tp in profiles {
        let mut pts = Vec::new();
        for &n in grid_sizes {
            let grid = RadialGrid::uniform(n, 1.0)?;
            let h = grid.uniform_h()?;
            let psi = RadialProfile::from_fn(grid, |r| (tp.f)(r), Parity::Odd)?;
            let a = reduced_rhs_numeric_with(&psi, params, order)?;
            let b = closed_rhs_on_grid(&psi, params.d(), order)?;
            let mut disc = 0.0f64;
            for (ra, va) in a.r.iter().zip(&a.values) {
                if *ra < band.0 || *ra > band.1 {
                    continue;
                }
                // both vectors start at node 1
                let j = b.r.partition_point(|x| x < ra);
                if j < b.r.len() && b.r[j] == *ra {
                    disc = disc.max((va - b.values[j]).abs());
                }
            }
            rows.push(CrossValidationRow { profile: tp.name.clone(), n, h, discrepancy: disc });
            pts.push((h, disc));
        }
        let rate = fit_rate(&pts);
        if let Some(rt) = rate {
            if rt < order.accuracy() as f64 - 0.2 {
                pass = false;
            }
        }
        rates.push((tp.name.clone(), rate));
    }
    Ok(CrossValidationReport { order, band, rows, rates, pass })
}

fn fit_rate(pts: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pos.len() < 2 || pos.len() < pts.len() {
        return None;
    }
    let n = pos.len() as f64;
    let mx = pos.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pos.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pos.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pos.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::uniform(n, 1.0).unwrap()
    }

    #[test]
    fn constants_and_quadratics() {
        let c = RadialProfile::from_fn(grid(33), |_| 2.5, Parity::Even).unwrap();
        let l = apply_l1(&c, 4).unwrap();
        assert!(l.values().iter().all(|v| v.abs() < 1e-9));
        for d in [2, 3, 4, 7] {
            let q = RadialProfile::from_fn(grid(33), |r| r * r, Parity::Even).unwrap();
            let l = apply_l1(&q, d).unwrap();
            for v in l.values() {
                assert!((v + 2.0 * d as f64).abs() < 1e-9, "d={d} v={v}");
            }
        }
    }

    #[test]
    fn l0_annihilates_r() {
        let f = RadialProfile::from_fn(grid(33), |r| r, Parity::Odd).unwrap();
        for d in [2, 4, 6] {
            assert!(apply_l0(&f, d).unwrap().values().iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn parity_mismatch_marks_origin_singular() {
        let f = RadialProfile::from_fn(grid(33), |r| r, Parity::Odd).unwrap();
        let l = apply_l1(&f, 4).unwrap();
        assert_eq!(l.valid_from(), 1);
        assert_eq!(l.origin_value(), Err(Error::SingularOrigin));
        let g = RadialProfile::from_fn(grid(33), |r| r, Parity::None).unwrap();
        assert_eq!(apply_l0(&g, 4).unwrap().valid_from(), 1);
        assert_eq!(apply_l0_with(&g, 4, FdOrder::Fourth).unwrap().valid_from(), 2);
    }

    #[test]
    fn grid_too_coarse() {
        let f = RadialProfile::from_fn(grid(8), |r| r, Parity::Odd).unwrap();
        assert!(matches!(apply_l0(&f, 4), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn closed_form_vanishes_at_zero() {
        assert_eq!(biharmonic_rhs_closed(0.0, 0.0, 0.0, 0.0, 0.0, 0.7, 4), 0.0);
    }

    #[test]
    fn closed_partials_match_finite_differences() {
        let x = [0.4, -0.3, 1.1, 0.8, -2.0];
        let r = 0.6;
        let part = biharmonic_rhs_closed_partials(x[0], x[1], x[2], x[3], r, 5);
        for k in 0..5 {
            let e = 1e-6;
            let mut a = x;
            let mut b = x;
            a[k] += e;
            b[k] -= e;
            let fa = biharmonic_rhs_closed(a[0], a[1], a[2], a[3], a[4], r, 5);
            let fb = biharmonic_rhs_closed(b[0], b[1], b[2], b[3], b[4], r, 5);
            let fd = (fa - fb) / (2.0 * e);
            assert!((fd - part[k]).abs() < 1e-6 * (1.0 + fd.abs()), "k={k} {fd} {}", part[k]);
        }
    }

    #[test]
    fn tangential_part_is_tangent() {
        let psi: f64 = 1.234;
        let u = (psi.sin(), psi.cos());
        let w = tangential_part((3.0, -7.0), u);
        assert!((w.0 * u.0 + w.1 * u.1).abs() < 1e-14);
    }
}
