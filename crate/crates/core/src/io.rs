//! Deterministic text serialization: CSV tables with shortest round-trip floats and JSON
//! with sorted keys.

use serde::Serialize;

use crate::dynamics::Orbit;
use crate::error::{Error, Result};
use crate::maps::BiharmonicMapProfile;
use crate::reduction::ReducedRHS;
use crate::types::RadialProfile;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Parse(format!("row has {} fields, table has {}", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let mut table = Self::new(header.split(',').map(str::trim));
        for line in lines {
            let row = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Pretty JSON with object keys sorted and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's default map type is ordered, so a round trip through Value sorts keys
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn profile_table(p: &RadialProfile) -> Table {
    let mut t = Table::new(["r", "value"]);
    t.rows = p.grid().nodes().iter().zip(p.values()).map(|(r, v)| vec![*r, *v]).collect();
    t
}

pub fn rhs_table(rhs: &ReducedRHS) -> Table {
    let mut t = Table::new(["r", "value"]);
    t.rows = rhs.r.iter().zip(&rhs.values).map(|(r, v)| vec![*r, *v]).collect();
    t
}

/// Accepted steps of an orbit as `(s, phi1..phi4)`.
pub fn orbit_table(orbit: &Orbit) -> Table {
    let mut t = Table::new(["s", "phi1", "phi2", "phi3", "phi4"]);
    t.rows = orbit.trajectory.states().iter().map(|st| vec![st.s, st.phi[0], st.phi[1], st.phi[2], st.phi[3]]).collect();
    t
}

/// `(r, ψ, ∂r ψ)` for a constructed map. Slopes come from the analytic or orbit jet where
/// available, otherwise from second-order differences (one-sided at the ends).
pub fn map_table(map: &BiharmonicMapProfile) -> Table {
    let r = map.grid().nodes();
    let v = map.profile.values();
    let n = v.len();
    let mut t = Table::new(["r", "psi", "dpsi"]);
    for j in 0..n {
        let fd = || {
            if n < 3 {
                return f64::NAN;
            }
            if j == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (r[2] - r[0])
            } else if j == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (r[n - 1] - r[n - 3])
            } else {
                (v[j + 1] - v[j - 1]) / (r[j + 1] - r[j - 1])
            }
        };
        let slope = if r[j] > 0.0 { map.jet(r[j]).map(|jt| jt[1]).unwrap_or_else(fd) } else { fd() };
        t.rows.push(vec![r[j], v[j], slope]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324, f64::MAX, 0.0, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(parse_f64(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert!(parse_f64(&fmt_f64(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: u8,
        }
        let s = to_json(&S { zeta: 0.5, alpha: 1 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Table::from_csv("a,b\n1,2\n3\n").is_err());
        assert!(Table::from_csv("a\nx\n").is_err());
    }
}
