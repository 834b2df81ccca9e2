//! Stability diagrams, transfer metrics, misalignment and dot-size sweeps,
//! and comparison with measured SET-gate capacitances.

mod compare;
mod diagram;
mod metrics;
mod sweep;

pub use compare::{compare, CompareReport, CompareRow, MeasuredGate, MeasuredTable};
pub use diagram::{auto_stability_diagram, stability_diagram, BoundaryLine, StabilityDiagram, Window, AUTO_CAP_V, DEFAULT_GRID};
pub use metrics::{coulomb_period, theta_deg, to_db, transfer_metrics};
pub use sweep::{
    analyse_cell, dotsize_sweep, estimate_misalignment, extract, misalign_sweep, range_values, simulate_cell,
    CellRecord, CellStatus, MatchTolerance, SweepAxes, SweepMap, SweepSettings, DEFAULT_DX, DEFAULT_DY,
    DEFAULT_RADII,
};
