use serde::{Deserialize, Serialize};
use serde_json::json;

use super::SolveMode;
use crate::error::{Error, Result};
use crate::numfmt::json_num;
use crate::units::{from_af, to_af};

/// Solver settings recorded alongside a capacitance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub mode: SolveMode,
    pub p: usize,
    pub mac_ratio: f64,
    pub tol: f64,
}

/// Maxwell capacitance matrix in farads, symmetrised.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellMatrix {
    pub conductor_names: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    /// `max|M - M^T| / max|M|` of the raw solve.
    pub asymmetry: f64,
    pub solver: SolverInfo,
}

#[derive(Deserialize)]
struct MaxwellFile {
    conductor_names: Vec<String>,
    #[serde(rename = "entries_aF")]
    entries_af: Vec<Vec<f64>>,
    asymmetry: f64,
    solver: SolverInfo,
}

impl MaxwellMatrix {
    /// Symmetrise a raw matrix (`raw[j][k]`: charge on `j` with `k` at 1 V).
    pub fn from_raw(conductor_names: Vec<String>, raw: Vec<Vec<f64>>, solver: SolverInfo) -> Self {
        let n = raw.len();
        let scale = raw.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0f64;
        let mut entries = vec![vec![0.0; n]; n];
        for j in 0..n {
            for k in 0..n {
                asym = asym.max((raw[j][k] - raw[k][j]).abs());
                entries[j][k] = if j == k { raw[j][j] } else { 0.5 * (raw[j][k] + raw[k][j]) };
            }
        }
        MaxwellMatrix {
            conductor_names,
            entries,
            asymmetry: if scale > 0.0 { asym / scale } else { 0.0 },
            solver,
        }
    }

    pub fn n_cond(&self) -> usize {
        self.entries.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.conductor_names.iter().position(|c| c == name)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    /// Descriptions of every violated matrix property. Off-diagonal and
    /// row-sum tolerances are `rel_tol` times the largest diagonal entry.
    pub fn property_violations(&self, rel_tol: f64) -> Vec<String> {
        let n = self.n_cond();
        let diag = (0..n).fold(0.0f64, |m, i| m.max(self.entries[i][i]));
        let tol = rel_tol * diag;
        let mut out = Vec::new();
        for j in 0..n {
            let name = &self.conductor_names[j];
            if !(self.entries[j][j] > 0.0) {
                out.push(format!("diagonal of {name} is not positive"));
            }
            for k in 0..n {
                if j != k && self.entries[j][k] > tol {
                    out.push(format!(
                        "entry ({name}, {}) = {:e} F is positive",
                        self.conductor_names[k], self.entries[j][k]
                    ));
                }
                if self.entries[j][k] != self.entries[k][j] {
                    out.push(format!("entry ({j}, {k}) not symmetric"));
                }
            }
            let s: f64 = self.entries[j].iter().sum();
            if s < -tol {
                out.push(format!("row sum of {name} = {s:e} F is negative"));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "conductor_names": self.conductor_names,
            "entries_aF": self.entries.iter()
                .map(|r| r.iter().map(|v| json_num(to_af(*v))).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "asymmetry": json_num(self.asymmetry),
            "solver": {
                "mode": self.solver.mode,
                "p": self.solver.p,
                "mac_ratio": json_num(self.solver.mac_ratio),
                "tol": json_num(self.solver.tol),
            },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: MaxwellFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = f.conductor_names.len();
        if f.entries_af.len() != n || f.entries_af.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("entries_aF must be {n} x {n}")));
        }
        Ok(MaxwellMatrix {
            conductor_names: f.conductor_names,
            entries: f
                .entries_af
                .iter()
                .map(|r| r.iter().map(|v| from_af(*v)).collect())
                .collect(),
            asymmetry: f.asymmetry,
            solver: f.solver,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> SolverInfo {
        SolverInfo {
            mode: SolveMode::Dense,
            p: 2,
            mac_ratio: 0.5,
            tol: 1e-6,
        }
    }

    #[test]
    fn symmetrises_and_records_asymmetry() {
        let raw = vec![vec![4.0, -1.0], vec![-1.2, 3.0]];
        let m = MaxwellMatrix::from_raw(vec!["a".into(), "b".into()], raw, info());
        assert_eq!(m.entries[0][1], m.entries[1][0]);
        assert!((m.entries[0][1] + 1.1).abs() < 1e-15);
        assert!((m.asymmetry - 0.05).abs() < 1e-15);
        assert!(m.property_violations(1e-3).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let raw = vec![vec![3e-18, -1e-18], vec![-1e-18, 2.5e-18]];
        let m = MaxwellMatrix::from_raw(vec!["a".into(), "b".into()], raw, info());
        let text = m.to_json().to_string();
        let back = MaxwellMatrix::from_json(&text).unwrap();
        assert_eq!(back.conductor_names, m.conductor_names);
        for j in 0..2 {
            for k in 0..2 {
                assert!((back.entries[j][k] - m.entries[j][k]).abs() < 1e-27);
            }
        }
        assert!(MaxwellMatrix::from_json("{}").is_err());
    }

    #[test]
    fn flags_positive_mutuals() {
        let raw = vec![vec![3.0, 0.5], vec![0.5, 3.0]];
        let m = MaxwellMatrix::from_raw(vec!["a".into(), "b".into()], raw, info());
        assert!(!m.property_violations(1e-3).is_empty());
    }
}
