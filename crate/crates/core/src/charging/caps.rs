use serde_json::{Map, Value};

use crate::capsolve::MaxwellMatrix;
use crate::error::{Error, Result};
use crate::geometry::Role;
use crate::numfmt::json_num;
use crate::units::{from_af, to_af};

/// Gates that enter the bias vector, in bias-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    SL,
    SR,
    G1,
    G2,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::SL, Gate::SR, Gate::G1, Gate::G2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn role(self) -> Role {
        match self {
            Gate::SL => Role::SL,
            Gate::SR => Role::SR,
            Gate::G1 => Role::G1,
            Gate::G2 => Role::G2,
        }
    }

    pub fn symbol(self) -> &'static str {
        self.role().as_str()
    }
}

/// Mutual capacitance below zero by at most this fraction of the diagonal
/// scale is treated as numerical noise and clipped.
pub const CLIP_TOLERANCE: f64 = 1e-3;

/// SET island couplings. `gate` is indexed by [`Gate::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslandCaps {
    pub csum: f64,
    pub c_d1: f64,
    pub c_d2: f64,
    pub gate: [f64; 4],
}

/// Circuit quantities of the constant-interaction model, in farads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCaps {
    pub csum_d1: f64,
    pub csum_d2: f64,
    pub c_d1d2: f64,
    pub gate_d1: [f64; 4],
    pub gate_d2: [f64; 4],
    /// SET1 island, needed for induced-charge analysis and g1 compensation.
    pub i1: Option<IslandCaps>,
    /// SET2 island gate couplings, used only for g2 compensation.
    pub gate_i2: Option<[f64; 4]>,
}

impl ModelCaps {
    /// Dot block of the capacitance matrix.
    pub fn dot_matrix(&self) -> [[f64; 2]; 2] {
        [[self.csum_d1, -self.c_d1d2], [-self.c_d1d2, self.csum_d2]]
    }

    /// Dot plus SET1 island block.
    pub fn island_matrix(&self) -> Result<[[f64; 3]; 3]> {
        let i = self.island()?;
        Ok([
            [self.csum_d1, -self.c_d1d2, -i.c_d1],
            [-self.c_d1d2, self.csum_d2, -i.c_d2],
            [-i.c_d1, -i.c_d2, i.csum],
        ])
    }

    pub fn island(&self) -> Result<&IslandCaps> {
        self.i1
            .as_ref()
            .ok_or_else(|| Error::Model("no SET1 island (role i1) in the capacitances".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Model(m));
        let mut all = vec![self.csum_d1, self.csum_d2, self.c_d1d2];
        all.extend(self.gate_d1);
        all.extend(self.gate_d2);
        if let Some(i) = &self.i1 {
            all.extend([i.csum, i.c_d1, i.c_d2]);
            all.extend(i.gate);
        }
        if let Some(g) = &self.gate_i2 {
            all.extend(g);
        }
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite capacitance".into());
        }
        if !(self.csum_d1 > 0.0 && self.csum_d2 > 0.0) {
            return bad("dot self capacitances must be positive".into());
        }
        if all.iter().any(|v| *v < 0.0) {
            return bad("mutual and gate capacitances must be non-negative".into());
        }
        if !(self.c_d1d2 < self.csum_d1.min(self.csum_d2)) {
            return bad("C_d1d2 must be below both dot self capacitances".into());
        }
        if !(self.csum_d1 * self.csum_d2 - self.c_d1d2 * self.c_d1d2 > 0.0) {
            return bad("dot capacitance matrix is not positive definite".into());
        }
        if let Some(i) = &self.i1 {
            if !(i.csum > 0.0) {
                return bad("island self capacitance must be positive".into());
            }
            if super::energy::cholesky3(&self.island_matrix()?).is_none() {
                return bad("dot-island capacitance matrix is not positive definite".into());
            }
        }
        Ok(())
    }

    /// JSON object keyed by circuit symbol, values in aF.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        let mut put = |k: String, v: f64| {
            m.insert(k, json_num(to_af(v)));
        };
        put("Csum_d1".into(), self.csum_d1);
        put("Csum_d2".into(), self.csum_d2);
        put("C_d1d2".into(), self.c_d1d2);
        for g in Gate::ALL {
            put(format!("C_{}d1", g.symbol()), self.gate_d1[g.index()]);
            put(format!("C_{}d2", g.symbol()), self.gate_d2[g.index()]);
        }
        if let Some(i) = &self.i1 {
            put("Csum_i1".into(), i.csum);
            put("C_d1i1".into(), i.c_d1);
            put("C_d2i1".into(), i.c_d2);
            for g in Gate::ALL {
                put(format!("C_{}i1", g.symbol()), i.gate[g.index()]);
            }
        }
        if let Some(gi) = &self.gate_i2 {
            for g in Gate::ALL {
                put(format!("C_{}i2", g.symbol()), gi[g.index()]);
            }
        }
        Value::Object(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("capacitances must be a JSON object".into()))?;
        let get = |k: &str| -> Result<Option<f64>> {
            match obj.get(k) {
                None => Ok(None),
                Some(x) => x
                    .as_f64()
                    .map(|f| Some(from_af(f)))
                    .ok_or_else(|| Error::Parse(format!("'{k}' must be a number"))),
            }
        };
        let need = |k: &str| -> Result<f64> {
            get(k)?.ok_or_else(|| Error::Parse(format!("missing '{k}'")))
        };
        let gates = |suffix: &str| -> Result<[f64; 4]> {
            let mut out = [0.0; 4];
            for g in Gate::ALL {
                out[g.index()] = get(&format!("C_{}{suffix}", g.symbol()))?.unwrap_or(0.0);
            }
            Ok(out)
        };
        let i1 = match get("Csum_i1")? {
            None => None,
            Some(csum) => Some(IslandCaps {
                csum,
                c_d1: need("C_d1i1")?,
                c_d2: need("C_d2i1")?,
                gate: gates("i1")?,
            }),
        };
        let has_i2 = Gate::ALL
            .iter()
            .any(|g| obj.contains_key(&format!("C_{}i2", g.symbol())));
        let caps = ModelCaps {
            csum_d1: need("Csum_d1")?,
            csum_d2: need("Csum_d2")?,
            c_d1d2: need("C_d1d2")?,
            gate_d1: gates("d1")?,
            gate_d2: gates("d2")?,
            i1,
            gate_i2: if has_i2 { Some(gates("i2")?) } else { None },
        };
        caps.validate()?;
        Ok(caps)
    }
}

/// Map a Maxwell matrix onto the circuit model. `roles[k]` is the role of
/// conductor `k`; gates without a conductor get zero coupling.
pub fn reduce_caps(m: &MaxwellMatrix, roles: &[Role]) -> Result<ModelCaps> {
    if roles.len() != m.n_cond() {
        return Err(Error::Model(format!(
            "{} roles for a {}-conductor matrix",
            roles.len(),
            m.n_cond()
        )));
    }
    let find = |r: Role| roles.iter().position(|x| *x == r);
    let d1 = find(Role::D1).ok_or_else(|| Error::Model("role d1 missing".into()))?;
    let d2 = find(Role::D2).ok_or_else(|| Error::Model("role d2 missing".into()))?;

    let coupling = |a: usize, b: usize| -> Result<f64> {
        let c = -m.entries[a][b];
        let scale = m.entries[a][a].abs().max(m.entries[b][b].abs());
        if c >= 0.0 {
            Ok(c)
        } else if -c <= CLIP_TOLERANCE * scale {
            Ok(0.0)
        } else {
            Err(Error::Model(format!(
                "coupling between '{}' and '{}' is negative ({:.4} aF)",
                m.conductor_names[a],
                m.conductor_names[b],
                to_af(c)
            )))
        }
    };
    let gate_row = |t: usize| -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for g in Gate::ALL {
            if let Some(k) = find(g.role()) {
                out[g.index()] = coupling(k, t)?;
            }
        }
        Ok(out)
    };
    let i1 = match find(Role::I1) {
        None => None,
        Some(i) => Some(IslandCaps {
            csum: m.entries[i][i],
            c_d1: coupling(d1, i)?,
            c_d2: coupling(d2, i)?,
            gate: gate_row(i)?,
        }),
    };
    let gate_i2 = match find(Role::I2) {
        None => None,
        Some(i) => Some(gate_row(i)?),
    };
    let caps = ModelCaps {
        csum_d1: m.entries[d1][d1],
        csum_d2: m.entries[d2][d2],
        c_d1d2: coupling(d1, d2)?,
        gate_d1: gate_row(d1)?,
        gate_d2: gate_row(d2)?,
        i1,
        gate_i2,
    };
    caps.validate()?;
    Ok(caps)
}
