use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Absolute slack used when comparing box faces, in nm.
pub(crate) const GEOM_TOL: f64 = 1e-9;

/// Circuit role of a conductor group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "d1")]
    D1,
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "i1")]
    I1,
    #[serde(rename = "i2")]
    I2,
    SL,
    SR,
    B,
    #[serde(rename = "g1")]
    G1,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "other")]
    Other,
}

impl Role {
    pub const ALL: [Role; 10] = [
        Role::D1,
        Role::D2,
        Role::I1,
        Role::I2,
        Role::SL,
        Role::SR,
        Role::B,
        Role::G1,
        Role::G2,
        Role::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::D1 => "d1",
            Role::D2 => "d2",
            Role::I1 => "i1",
            Role::I2 => "i2",
            Role::SL => "SL",
            Role::SR => "SR",
            Role::B => "B",
            Role::G1 => "g1",
            Role::G2 => "g2",
            Role::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn is_dot(self) -> bool {
        matches!(self, Role::D1 | Role::D2)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned box in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_min_dims(min: Vec3, dims: Vec3) -> Self {
        Aabb {
            min,
            max: [min[0] + dims[0], min[1] + dims[1], min[2] + dims[2]],
        }
    }

    pub fn dims(&self) -> Vec3 {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn surface_area(&self) -> f64 {
        let [a, b, c] = self.dims();
        2.0 * (a * b + b * c + c * a)
    }

    /// Positive-volume intersection.
    pub fn interpenetrates(&self, other: &Aabb) -> bool {
        (0..3).all(|k| {
            self.min[k] < other.max[k] - GEOM_TOL && other.min[k] < self.max[k] - GEOM_TOL
        })
    }

    /// Closed intersection: overlap or face/edge/corner contact.
    pub fn touches(&self, other: &Aabb) -> bool {
        (0..3).all(|k| {
            self.min[k] <= other.max[k] + GEOM_TOL && other.min[k] <= self.max[k] + GEOM_TOL
        })
    }

    pub fn contains_closed(&self, p: Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] - GEOM_TOL && p[k] <= self.max[k] + GEOM_TOL)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| {
            other.min[k] >= self.min[k] - GEOM_TOL && other.max[k] <= self.max[k] + GEOM_TOL
        })
    }
}

/// One rectangular block of conductor material.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductorBox {
    pub name: String,
    /// Index into [`DeviceSpec::conductors`].
    pub conductor: usize,
    pub min_nm: Vec3,
    pub dims_nm: Vec3,
    /// Lower bound on the number of panels along every box edge.
    pub min_divisions: usize,
}

/// An electrically connected conductor made of one or more boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Conductor {
    pub name: String,
    pub role: Role,
}

/// Device geometry plus the material parameters the solver needs.
///
/// The plane `z = 0` is the top of the gate oxide. Boxes whose bottom lies at
/// or above it are surface metal and are lifted by `air_gap_nm`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    pub epsilon_r: f64,
    pub air_gap_nm: f64,
    pub domain: Aabb,
    pub boxes: Vec<ConductorBox>,
    pub conductors: Vec<Conductor>,
}

pub const DEFAULT_EPSILON_R: f64 = 6.0;
pub const DEFAULT_DOMAIN_HALF_WIDTH_NM: f64 = 5000.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxConfig {
    name: String,
    group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<Role>,
    min_nm: Vec3,
    dims_nm: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_divisions: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainConfig {
    min: Vec3,
    max: Vec3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    air_gap_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_nm: Option<DomainConfig>,
    boxes: Vec<BoxConfig>,
}

/// Parse and validate a device description (JSON object text).
pub fn load_device(config_text: &str) -> Result<DeviceSpec> {
    let cfg: DeviceConfig =
        serde_json::from_str(config_text).map_err(|e| Error::Parse(e.to_string()))?;
    from_config(cfg)
}

fn from_config(cfg: DeviceConfig) -> Result<DeviceSpec> {
    let h = DEFAULT_DOMAIN_HALF_WIDTH_NM;
    let domain = match cfg.domain_nm {
        Some(d) => Aabb {
            min: d.min,
            max: d.max,
        },
        None => Aabb {
            min: [-h; 3],
            max: [h; 3],
        },
    };

    let mut conductors: Vec<Conductor> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut explicit_role: Vec<Option<Role>> = Vec::new();
    let mut boxes = Vec::with_capacity(cfg.boxes.len());

    for b in cfg.boxes {
        let idx = *index.entry(b.group.clone()).or_insert_with(|| {
            conductors.push(Conductor {
                name: b.group.clone(),
                role: Role::Other,
            });
            explicit_role.push(None);
            conductors.len() - 1
        });
        if let Some(role) = b.role {
            match explicit_role[idx] {
                Some(prev) if prev != role => {
                    return Err(Error::Validation(format!(
                        "group '{}' declared with conflicting roles {prev} and {role}",
                        b.group
                    )))
                }
                _ => explicit_role[idx] = Some(role),
            }
        }
        boxes.push(ConductorBox {
            name: b.name,
            conductor: idx,
            min_nm: b.min_nm,
            dims_nm: b.dims_nm,
            min_divisions: b.min_divisions.unwrap_or(1),
        });
    }
    for (c, r) in conductors.iter_mut().zip(explicit_role) {
        c.role = r.unwrap_or(Role::Other);
    }

    let spec = DeviceSpec {
        epsilon_r: cfg.epsilon_r.unwrap_or(DEFAULT_EPSILON_R),
        air_gap_nm: cfg.air_gap_nm.unwrap_or(0.0),
        domain,
        boxes,
        conductors,
    };
    spec.validate()?;
    Ok(spec)
}

impl DeviceSpec {
    pub fn n_conductors(&self) -> usize {
        self.conductors.len()
    }

    pub fn conductor_names(&self) -> Vec<String> {
        self.conductors.iter().map(|c| c.name.clone()).collect()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.conductors.iter().map(|c| c.role).collect()
    }

    /// Conductor index carrying `role`, for roles other than `Other`.
    pub fn conductor_with_role(&self, role: Role) -> Option<usize> {
        if role == Role::Other {
            return None;
        }
        self.conductors.iter().position(|c| c.role == role)
    }

    /// Box geometry after the air gap is applied.
    pub fn placed_box(&self, i: usize) -> Aabb {
        let b = &self.boxes[i];
        let mut min = b.min_nm;
        if b.min_nm[2] >= -GEOM_TOL {
            min[2] += self.air_gap_nm;
        }
        Aabb::from_min_dims(min, b.dims_nm)
    }

    /// Index of the single box forming the conductor with `role`.
    pub(crate) fn dot_box(&self, role: Role) -> Result<usize> {
        let c = self
            .conductor_with_role(role)
            .ok_or_else(|| Error::Validation(format!("no conductor with role {role}")))?;
        let mut it = self.boxes.iter().enumerate().filter(|(_, b)| b.conductor == c);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Ok(i),
            _ => Err(Error::Validation(format!(
                "dot conductor '{}' must consist of exactly one box",
                self.conductors[c].name
            ))),
        }
    }

    /// Check every structural invariant of the geometry.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if !(self.epsilon_r.is_finite() && self.epsilon_r > 0.0) {
            return bad(format!("epsilon_r must be positive, got {}", self.epsilon_r));
        }
        if !(self.air_gap_nm.is_finite() && self.air_gap_nm >= 0.0) {
            return bad(format!("air_gap_nm must be >= 0, got {}", self.air_gap_nm));
        }
        if self.boxes.is_empty() {
            return bad("device has no boxes".into());
        }
        if (0..3).any(|k| !(self.domain.min[k] < self.domain.max[k])) {
            return bad("domain min must be below max on every axis".into());
        }

        for c in &self.conductors {
            if c.name.is_empty() || c.name.chars().any(char::is_whitespace) {
                return bad(format!("group name '{}' must be non-empty without whitespace", c.name));
            }
        }

        let mut names = std::collections::BTreeSet::new();
        for (i, b) in self.boxes.iter().enumerate() {
            if !names.insert(b.name.as_str()) {
                return bad(format!("duplicate box name '{}'", b.name));
            }
            if b.dims_nm.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
                return bad(format!("box '{}' has non-positive dims {:?}", b.name, b.dims_nm));
            }
            if b.min_nm.iter().any(|v| !v.is_finite()) {
                return bad(format!("box '{}' has non-finite corner", b.name));
            }
            if b.min_divisions == 0 {
                return bad(format!("box '{}' has min_divisions = 0", b.name));
            }
            if !self.domain.contains_box(&self.placed_box(i)) {
                return bad(format!("box '{}' leaves the bounding domain", b.name));
            }
        }

        for i in 0..self.boxes.len() {
            let a = self.placed_box(i);
            for j in (i + 1)..self.boxes.len() {
                let b = self.placed_box(j);
                let same = self.boxes[i].conductor == self.boxes[j].conductor;
                let clash = if same { a.interpenetrates(&b) } else { a.touches(&b) };
                if clash {
                    return bad(format!(
                        "boxes '{}' and '{}' overlap",
                        self.boxes[i].name, self.boxes[j].name
                    ));
                }
            }
        }

        for role in Role::ALL.into_iter().filter(|r| *r != Role::Other) {
            let n = self.conductors.iter().filter(|c| c.role == role).count();
            if n > 1 {
                return bad(format!("role {role} is assigned to {n} groups"));
            }
            if n == 0 && role.is_dot() {
                return bad(format!("missing role {role}"));
            }
        }
        self.dot_box(Role::D1)?;
        self.dot_box(Role::D2)?;
        Ok(())
    }

    /// Serialise back to the config schema accepted by [`load_device`].
    pub fn to_config_json(&self) -> String {
        let cfg = DeviceConfig {
            epsilon_r: Some(self.epsilon_r),
            air_gap_nm: Some(self.air_gap_nm),
            domain_nm: Some(DomainConfig {
                min: self.domain.min,
                max: self.domain.max,
            }),
            boxes: self
                .boxes
                .iter()
                .map(|b| {
                    let c = &self.conductors[b.conductor];
                    BoxConfig {
                        name: b.name.clone(),
                        group: c.name.clone(),
                        role: Some(c.role),
                        min_nm: b.min_nm,
                        dims_nm: b.dims_nm,
                        min_divisions: (b.min_divisions != 1).then_some(b.min_divisions),
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&cfg).expect("device config serialises")
    }
}

/// The shipped reference device: two buried dots, barrier and symmetry
/// gates, two SET islands and their gates.
pub const REFERENCE_DEVICE_JSON: &str = include_str!("../../data/reference_device.json");

pub fn reference_device() -> DeviceSpec {
    load_device(REFERENCE_DEVICE_JSON).expect("shipped reference device is valid")
}
