use serde::Deserialize;
use serde_json::{json, Value};

use super::metrics::coulomb_period;
use crate::capsolve::MaxwellMatrix;
use crate::error::{Error, Result};
use crate::geometry::Role;
use crate::numfmt::{fmt_sig, json_num};
use crate::units::{from_af, to_af, to_mv};

/// Measured SET-gate capacitances, one entry per gate.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MeasuredTable {
    /// Role of the SET island the gates couple to.
    pub island: String,
    pub gates: Vec<MeasuredGate>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MeasuredGate {
    /// Role of the gate conductor.
    pub gate: String,
    /// Previously calculated value to compare against, if any.
    #[serde(rename = "reference_aF", default)]
    pub reference_af: Option<f64>,
    #[serde(rename = "measured_aF")]
    pub measured_af: f64,
    #[serde(rename = "sd_aF")]
    pub sd_af: f64,
}

impl MeasuredTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: MeasuredTable = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for g in &t.gates {
            if !(g.measured_af > 0.0 && g.sd_af >= 0.0) {
                return Err(Error::Parse(format!("gate '{}': measured value must be positive and SD non-negative", g.gate)));
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub gate: String,
    /// Calculated island-gate capacitance, farads.
    pub calculated: f64,
    pub measured: f64,
    pub sd: f64,
    pub reference: Option<f64>,
}

impl CompareRow {
    /// Deviation from the measured mean in standard deviations.
    pub fn z_score(&self) -> f64 {
        (self.calculated - self.measured) / self.sd
    }

    pub fn ratio_to_reference(&self) -> Option<f64> {
        self.reference.map(|r| self.calculated / r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub island: String,
    pub rows: Vec<CompareRow>,
}

/// Island-gate couplings of `m` next to the measured table. `roles[k]` is
/// the role of conductor `k`.
pub fn compare(m: &MaxwellMatrix, roles: &[Role], table: &MeasuredTable) -> Result<CompareReport> {
    if roles.len() != m.n_cond() {
        return Err(Error::Model(format!("{} roles for a {}-conductor matrix", roles.len(), m.n_cond())));
    }
    let find = |name: &str| -> Result<usize> {
        let role = Role::parse(name).ok_or_else(|| Error::Parse(format!("unknown role '{name}'")))?;
        roles
            .iter()
            .position(|r| *r == role)
            .ok_or_else(|| Error::Model(format!("no conductor has role '{name}'")))
    };
    let i = find(&table.island)?;
    let rows = table
        .gates
        .iter()
        .map(|g| {
            let k = find(&g.gate)?;
            Ok(CompareRow {
                gate: g.gate.clone(),
                calculated: -m.entries[i][k],
                measured: from_af(g.measured_af),
                sd: from_af(g.sd_af),
                reference: g.reference_af.map(from_af),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport { island: table.island.clone(), rows })
}

impl CompareReport {
    pub fn to_json(&self) -> Value {
        let period = |c: f64| coulomb_period(c).map(|v| json_num(to_mv(v))).unwrap_or(Value::Null);
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "gate": r.gate,
                    "calculated_aF": json_num(to_af(r.calculated)),
                    "measured_aF": json_num(to_af(r.measured)),
                    "sd_aF": json_num(to_af(r.sd)),
                    "z_score": json_num(r.z_score()),
                    "reference_aF": r.reference.map(|v| json_num(to_af(v))).unwrap_or(Value::Null),
                    "ratio_to_reference": r.ratio_to_reference().map(json_num).unwrap_or(Value::Null),
                    "period_calculated_mV": period(r.calculated),
                    "period_measured_mV": period(r.measured),
                })
            })
            .collect();
        json!({ "island": self.island, "gates": rows })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<6} {:>14} {:>12} {:>8} {:>8} {:>14} {:>10}\n",
            "gate", "calculated_aF", "measured_aF", "sd_aF", "z", "reference_aF", "ratio"
        );
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:<6} {:>14} {:>12} {:>8} {:>8} {:>14} {:>10}\n",
                r.gate,
                format!("{:.2}", to_af(r.calculated)),
                fmt_sig(to_af(r.measured)),
                fmt_sig(to_af(r.sd)),
                format!("{:.2}", r.z_score()),
                opt(r.reference.map(to_af)),
                opt(r.ratio_to_reference().map(|v| (v * 1e3).round() / 1e3)),
            ));
        }
        s
    }
}
