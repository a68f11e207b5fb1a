//! Physical constants (CODATA 2018, SI) and unit factors.

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant [J·s].
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Bohr magneton [J/T].
pub const MU_BOHR: f64 = 9.274_010_078_3e-24;
/// Vacuum permeability [T·m/A].
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// One gauss in tesla.
pub const GAUSS: f64 = 1e-4;
pub const NANOMETER: f64 = 1e-9;
pub const MICROMETER: f64 = 1e-6;
pub const MICROSECOND: f64 = 1e-6;
/// 1 G/nm in T/m.
pub const GAUSS_PER_NM: f64 = GAUSS / NANOMETER;
/// 1 G/μm in T/m.
pub const GAUSS_PER_UM: f64 = GAUSS / MICROMETER;

/// Standard gravity [m/s²].
pub const G_STANDARD: f64 = 9.806_65;

/// Diamond density [kg/m³].
pub const DIAMOND_DENSITY: f64 = 3510.0;
/// Mass magnetic susceptibility of diamond [m³/kg].
pub const DIAMOND_CHI_PER_MASS: f64 = -6.2e-9;
/// NV ground-state zero-field splitting frequency [Hz].
pub const NV_ZFS_HZ: f64 = 2.87e9;
