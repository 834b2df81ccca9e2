//! Physical constants and unit conversions.
//!
//! Everything inside the crate is SI. Files and the command line use
//! nm, aF, mV and multiples of the elementary charge.

/// Elementary charge in coulombs.
pub const Q_E: f64 = 1.602176634e-19;

/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.8541878128e-12;

pub const NM: f64 = 1e-9;
pub const AF: f64 = 1e-18;
pub const MV: f64 = 1e-3;
pub const MEV: f64 = Q_E * 1e-3;

#[inline]
pub fn to_af(farads: f64) -> f64 {
    farads / AF
}

#[inline]
pub fn from_af(af: f64) -> f64 {
    af * AF
}

#[inline]
pub fn to_mv(volts: f64) -> f64 {
    volts / MV
}

#[inline]
pub fn from_mv(mv: f64) -> f64 {
    mv * MV
}
