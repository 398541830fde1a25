//! Shared domain types: flow parameters, radial grids and profiles, phase states.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point of the four-dimensional phase space.
pub type Vec4 = [f64; 4];

pub fn norm_inf(v: &Vec4) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn neg4(v: &Vec4) -> Vec4 {
    [-v[0], -v[1], -v[2], -v[3]]
}

/// Spatial dimension `d` and order `m` of the polyharmonic flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowParams {
    d: u32,
    m: u32,
}

impl FlowParams {
    pub fn new(d: u32, m: u32) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("dimension d = {d} must be at least 2")));
        }
        if m < 1 {
            return Err(invalid(format!("order m = {m} must be at least 1")));
        }
        Ok(Self { d, m })
    }

    /// The biharmonic flow in its critical dimension, `d = 4`, `m = 2`.
    pub fn biharmonic() -> Self {
        Self { d: 4, m: 2 }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// True when the energy is scale invariant, `d = 2m`.
    pub fn is_critical(&self) -> bool {
        self.d == 2 * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Spacing {
    Uniform { h: f64 },
    /// Zero followed by nodes in geometric progression with the given ratio.
    Geometric { ratio: f64 },
    Irregular,
}

pub const MIN_GRID_NODES: usize = 8;

/// Strictly increasing radii starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    /// `n` equally spaced nodes on `[0, r_max]`.
    pub fn uniform(n: usize, r_max: f64) -> Result<Self> {
        if n < MIN_GRID_NODES {
            return Err(Error::GridTooCoarse { needed: MIN_GRID_NODES, have: n });
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(invalid(format!("r_max = {r_max} must be positive and finite")));
        }
        let h = r_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        nodes[n - 1] = r_max;
        Ok(Self { nodes, spacing: Spacing::Uniform { h } })
    }

    /// The origin followed by `n - 1` nodes from `r_min` to `r_max` in geometric progression.
    pub fn geometric(n: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if n < MIN_GRID_NODES {
            return Err(Error::GridTooCoarse { needed: MIN_GRID_NODES, have: n });
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(invalid(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
        }
        let k = (n - 2) as f64;
        let ratio = (r_max / r_min).powf(1.0 / k);
        let mut nodes = Vec::with_capacity(n);
        nodes.push(0.0);
        for i in 0..n - 1 {
            nodes.push(r_min * (i as f64 * (r_max / r_min).ln() / k).exp());
        }
        nodes[n - 1] = r_max;
        Ok(Self { nodes, spacing: Spacing::Geometric { ratio } })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_GRID_NODES {
            return Err(Error::GridTooCoarse { needed: MIN_GRID_NODES, have: nodes.len() });
        }
        if nodes[0] != 0.0 {
            return Err(invalid("first grid node must be 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("grid nodes must be finite and strictly increasing"));
        }
        Ok(Self { nodes, spacing: Spacing::Irregular })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Uniform spacing, or an error for other grids.
    pub fn uniform_h(&self) -> Result<f64> {
        match self.spacing {
            Spacing::Uniform { h } => Ok(h),
            _ => Err(invalid("operation requires a uniform grid")),
        }
    }

    /// The first `n` nodes as a new grid.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n < MIN_GRID_NODES {
            return Err(Error::GridTooCoarse { needed: MIN_GRID_NODES, have: n });
        }
        Ok(Self { nodes: self.nodes[..n].to_vec(), spacing: self.spacing })
    }
}

/// Symmetry of a profile under `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
    None,
}

impl Parity {
    /// Sign picked up by the reflected value, if the profile has a parity.
    pub fn reflection_sign(self) -> Option<f64> {
        match self {
            Parity::Odd => Some(-1.0),
            Parity::Even => Some(1.0),
            Parity::None => None,
        }
    }
}

/// A scalar profile sampled on a radial grid.
///
/// `valid_from` marks leading nodes whose values are undefined (singular operator
/// output); such entries are stored as zero and must not be read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    parity: Parity,
    valid_from: usize,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>, parity: Parity) -> Result<Self> {
        Self::with_valid_from(grid, values, parity, 0)
    }

    pub(crate) fn with_valid_from(
        grid: RadialGrid,
        values: Vec<f64>,
        parity: Parity,
        valid_from: usize,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite profile value at node {i}")));
        }
        if parity == Parity::Odd && valid_from == 0 && values[0] != 0.0 {
            return Err(invalid("odd profile must vanish at the origin"));
        }
        Ok(Self { grid, values, parity, valid_from })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64, parity: Parity) -> Result<Self> {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        if parity == Parity::Odd {
            values[0] = 0.0;
        }
        Self::new(grid, values, parity)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Index of the first node carrying a defined value.
    pub fn valid_from(&self) -> usize {
        self.valid_from
    }

    pub fn origin_value(&self) -> Result<f64> {
        if self.valid_from > 0 {
            Err(Error::SingularOrigin)
        } else {
            Ok(self.values[0])
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64, parity: Parity) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::with_valid_from(self.grid.clone(), values, parity, self.valid_from)
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = -*v);
        out
    }
}

/// The log-radial state `phi = (φ, ∂φ, ∂²φ, ∂³φ)` at `s = log r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub s: f64,
    pub phi: Vec4,
}

impl PhaseState {
    pub fn new(s: f64, phi: Vec4) -> Self {
        Self { s, phi }
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.phi.iter().all(|x| x.is_finite())
    }

    pub fn negated(&self) -> Self {
        Self { s: self.s, phi: neg4(&self.phi) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_flag() {
        assert!(FlowParams::biharmonic().is_critical());
        assert!(FlowParams::new(2, 1).unwrap().is_critical());
        assert!(!FlowParams::new(3, 2).unwrap().is_critical());
        assert!(FlowParams::new(1, 1).is_err());
        assert!(FlowParams::new(4, 0).is_err());
    }

    #[test]
    fn grids_validate() {
        let g = RadialGrid::uniform(9, 2.0).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.r_max(), 2.0);
        assert_eq!(g.uniform_h().unwrap(), 0.25);
        assert!(RadialGrid::uniform(7, 1.0).is_err());
        let geo = RadialGrid::geometric(10, 1e-3, 1.0).unwrap();
        assert!(geo.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!((geo.nodes()[1] - 1e-3).abs() < 1e-15);
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 0.5, 2.0, 3.0, 4.0, 5.0, 6.0]).is_err());
    }

    #[test]
    fn odd_profile_must_vanish_at_origin() {
        let g = RadialGrid::uniform(9, 1.0).unwrap();
        let bad = vec![0.1; 9];
        assert!(RadialProfile::new(g.clone(), bad, Parity::Odd).is_err());
        let p = RadialProfile::from_fn(g, |r| r + 1.0, Parity::Odd).unwrap();
        assert_eq!(p.values()[0], 0.0);
    }
}
