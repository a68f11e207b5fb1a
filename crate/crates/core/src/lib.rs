//! Classical and semiclassical model of a Stern-Gerlach interferometer
//! acting on a levitated nanodiamond with a single NV spin, in a 2D
//! bias + quadrupole field.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod nv_spin;
pub mod validation;
pub mod wavepacket;

pub use angular::{AngularStats, StatsSource};
pub use dynamics::{
    accelerations, integrate, phase_1d, run_sgi, Arm, Numerics, PhaseState, SequenceConfig, SgiRun, Trajectory,
};
pub use error::{Result, SgiError};
pub use experiments::{Experiment, Scenario, SweepRange, SweepSpec, SweepVar};
pub use field::{FieldConfig, NDParams, Pose, RampPolicy};
pub use nv_spin::{EnergyLevels, LambdaMode, LocalField, NVParams, SpinLabel};
pub use validation::{run_oracles, OracleReport, ValidationOptions};
pub use wavepacket::{AngularWavepacket, CoherenceResult};
