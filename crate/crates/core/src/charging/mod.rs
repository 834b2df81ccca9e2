//! Constant-interaction model of the double dot and SET1 island.
//!
//! Sign convention: dot configuration `x` carries `[-x, x]` excess
//! electrons, and the total charge entering the energy is
//! `Q = C~ V - q_e [q_d1, q_d2]`.

mod caps;
mod compensate;
mod energy;
mod island;
mod roots;
mod stable;

pub use caps::{reduce_caps, Gate, IslandCaps, ModelCaps, CLIP_TOLERANCE};
pub use compensate::{compensate, CompensationMode};
pub use energy::{
    config_energy, dot_charges, induced_dots, induced_with_island, island_energy, polarization, Bias,
};
pub use island::{
    delta_q, delta_q_along, delta_q_fixed_island, island_transfer_points, set_transfer_points,
    stable_island,
};
pub use stable::{
    compensated_bias, degeneracy_bias, degeneracy_bias_with, degeneracy_gap, stable_config,
    stable_config_at, stable_config_with, Ray, ROOT_TOL_V,
};
