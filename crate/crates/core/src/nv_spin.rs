//! NV ground-state triplet in a weak magnetic field.
//!
//! The triplet is written in the basis (|mS=+1⟩, |0⟩, |mS=−1⟩) with the
//! |±1⟩ pair at zero energy and |0⟩ at −D. For μ|B| ≪ D the |0⟩ level
//! decouples and the |±1⟩ pair is described by an effective 2×2 Hamiltonian
//! whose eigenstates are the adiabatic |+⟩ (weak-field seeking) and |−⟩
//! (strong-field seeking) states.

use std::fmt;

use log::warn;
use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{H_PLANCK, MU_BOHR, NV_ZFS_HZ};
use crate::error::{invalid, Result, SgiError};

/// How the Zeeman saturation factor λ enters forces and torques.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    /// λ → 1: the |±⟩ energies are ±μB∥.
    #[default]
    Unity,
    /// Full ±sqrt(μ²B∥² + |ε|²) energies.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NVParams {
    /// Magnetic moment [J/T].
    pub mu: f64,
    /// Zero-field splitting D [J].
    pub zfs: f64,
    /// Strain/electric coupling between |mS=±1⟩ [J].
    pub epsilon: Complex64,
    pub lambda_mode: LambdaMode,
    /// Include the second-order transverse shifts ηp, ε̃ and δE0 in the
    /// spin potential used by the dynamics.
    pub transverse_shifts: bool,
}

impl Default for NVParams {
    fn default() -> Self {
        Self {
            mu: 2.0 * MU_BOHR,
            zfs: H_PLANCK * NV_ZFS_HZ,
            epsilon: Complex64::new(H_PLANCK * 5e6, 0.0),
            lambda_mode: LambdaMode::Unity,
            transverse_shifts: false,
        }
    }
}

impl NVParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(invalid("mu", format!("must be positive, got {}", self.mu)));
        }
        if !(self.zfs > 0.0 && self.zfs.is_finite()) {
            return Err(invalid("zfs", format!("must be positive, got {}", self.zfs)));
        }
        if !(self.epsilon.re.is_finite() && self.epsilon.im.is_finite()) {
            return Err(invalid("epsilon", "must be finite"));
        }
        Ok(())
    }

    fn check_weak_field(&self, b_par: f64, b_perp: f64) {
        let zeeman = self.mu * b_par.hypot(b_perp);
        if zeeman > 0.1 * self.zfs {
            warn!(
                "mu|B| = {:.3e} J exceeds D/10 = {:.3e} J; weak-field formulas are unreliable",
                zeeman,
                0.1 * self.zfs
            );
        }
    }

    /// Potential energy of the adiabatic state `spin` and its partial
    /// derivatives with respect to the axial and (signed) transverse field.
    ///
    /// This is the energy the dynamics and the action use; it honours the
    /// `lambda_mode` and `transverse_shifts` switches.
    pub fn spin_potential(&self, spin: SpinLabel, b_par: f64, b_perp: f64) -> Result<SpinPotential> {
        let mu = self.mu;
        let d = self.zfs;
        let p = spin.p() as f64;

        if spin == SpinLabel::Zero {
            if !self.transverse_shifts {
                return Ok(SpinPotential::default());
            }
            let (lo, hi) = (d - mu * b_par, d + mu * b_par);
            if lo <= 0.0 || hi <= 0.0 {
                return Err(SgiError::DegenerateDenominator { p: 0, value: lo.min(hi) });
            }
            let s = 1.0 / lo + 1.0 / hi;
            return Ok(SpinPotential {
                energy: -0.5 * mu * mu * s * b_perp * b_perp,
                d_b_par: -0.5 * mu * mu * b_perp * b_perp * (mu / (lo * lo) - mu / (hi * hi)),
                d_b_perp: -mu * mu * s * b_perp,
            });
        }

        let mut out = SpinPotential::default();
        let mut eps_re = self.epsilon.re;
        let mut d_eps_re_d_perp = 0.0;
        if self.transverse_shifts {
            let den = d - p * mu * b_par.abs();
            if den <= 0.0 {
                return Err(SgiError::DegenerateDenominator { p: spin.p(), value: den });
            }
            out.energy += 0.5 * mu * mu * b_perp * b_perp / den;
            out.d_b_perp += mu * mu * b_perp / den;
            out.d_b_par += 0.5 * mu * mu * b_perp * b_perp * p * mu * b_par.signum() / (den * den);
            // ε̃ = ε + η0 (field in the NV plane, φ = 0)
            eps_re += 0.5 * mu * mu * b_perp * b_perp / d;
            d_eps_re_d_perp = mu * mu * b_perp / d;
        }

        match self.lambda_mode {
            LambdaMode::Unity => {
                out.energy += p * mu * b_par;
                out.d_b_par += p * mu;
            }
            LambdaMode::Exact => {
                let eps2 = eps_re * eps_re + self.epsilon.im * self.epsilon.im;
                let root = (mu * mu * b_par * b_par + eps2).sqrt();
                out.energy += p * root;
                if root > 0.0 {
                    out.d_b_par += p * mu * mu * b_par / root;
                    out.d_b_perp += p * eps_re * d_eps_re_d_perp / root;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpinPotential {
    /// E_p [J]
    pub energy: f64,
    /// ∂E_p/∂B∥ [J/T]
    pub d_b_par: f64,
    /// ∂E_p/∂B⊥ [J/T], B⊥ signed as −Bx sin θ′ + By cos θ′
    pub d_b_perp: f64,
}

/// Field at the NV resolved along and across the NV axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalField {
    pub b_par: f64,
    /// Transverse magnitude, always ≥ 0.
    pub b_perp: f64,
    /// Transverse azimuth; 0 for fields in the NV plane.
    pub phi: f64,
}

/// Adiabatic spin state |+⟩, |0⟩ or |−⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum SpinLabel {
    Plus,
    Zero,
    Minus,
}

impl SpinLabel {
    pub const fn p(self) -> i8 {
        match self {
            SpinLabel::Plus => 1,
            SpinLabel::Zero => 0,
            SpinLabel::Minus => -1,
        }
    }

    pub const fn is_magnetic(self) -> bool {
        !matches!(self, SpinLabel::Zero)
    }
}

impl TryFrom<i8> for SpinLabel {
    type Error = String;

    fn try_from(p: i8) -> std::result::Result<Self, Self::Error> {
        match p {
            1 => Ok(SpinLabel::Plus),
            0 => Ok(SpinLabel::Zero),
            -1 => Ok(SpinLabel::Minus),
            _ => Err(format!("spin label must be -1, 0 or +1, got {p}")),
        }
    }
}

impl From<SpinLabel> for i8 {
    fn from(s: SpinLabel) -> i8 {
        s.p()
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinLabel::Plus => write!(f, "+"),
            SpinLabel::Zero => write!(f, "0"),
            SpinLabel::Minus => write!(f, "-"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevels {
    pub e_plus: f64,
    pub e_minus: f64,
    /// Shift of |0⟩ away from −D.
    pub de_zero: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub eta_zero: f64,
    pub eps_tilde: Complex64,
}

impl EnergyLevels {
    /// Absolute energy of |0⟩ in the matrix convention (|0⟩ at −D).
    pub fn e_zero(&self, nv: &NVParams) -> f64 {
        -nv.zfs + self.de_zero
    }
}

/// Resolve an in-plane field (bx, by) along the NV axis at angle `theta_prime`.
pub fn local_field_components(bx: f64, by: f64, theta_prime: f64) -> LocalField {
    let (s, c) = theta_prime.sin_cos();
    LocalField { b_par: bx * c + by * s, b_perp: (-bx * s + by * c).abs(), phi: 0.0 }
}

/// Weak-field adiabatic energies including the second-order transverse
/// shifts ηp, the shifted coupling ε̃ and the |0⟩ shift δE0.
pub fn adiabatic_energies(f: &LocalField, nv: &NVParams) -> Result<EnergyLevels> {
    nv.check_weak_field(f.b_par, f.b_perp);
    let mu = nv.mu;
    let half_mu2_bperp2 = 0.5 * mu * mu * f.b_perp * f.b_perp;

    let eta = |p: i8| -> Result<f64> {
        let den = nv.zfs - p as f64 * mu * f.b_par.abs();
        if den <= 0.0 {
            Err(SgiError::DegenerateDenominator { p, value: den })
        } else {
            Ok(half_mu2_bperp2 / den)
        }
    };
    let eta_plus = eta(1)?;
    let eta_minus = eta(-1)?;
    let eta_zero = eta(0)?;

    let eps_tilde = nv.epsilon + eta_zero * Complex64::from_polar(1.0, 2.0 * f.phi);
    let root = (mu * mu * f.b_par * f.b_par + eps_tilde.norm_sqr()).sqrt();

    let (lo, hi) = (nv.zfs - mu * f.b_par, nv.zfs + mu * f.b_par);
    if lo <= 0.0 || hi <= 0.0 {
        return Err(SgiError::DegenerateDenominator { p: 0, value: lo.min(hi) });
    }
    let de_zero = -half_mu2_bperp2 * (1.0 / lo + 1.0 / hi);

    Ok(EnergyLevels {
        e_plus: eta_plus + root,
        e_minus: eta_minus - root,
        de_zero,
        eta_plus,
        eta_minus,
        eta_zero,
        eps_tilde,
    })
}

/// Eigenvalues of the full 3×3 triplet Hamiltonian, ascending.
pub fn exact_hamiltonian_eigvals(f: &LocalField, nv: &NVParams) -> [f64; 3] {
    let mu = nv.mu;
    let zeeman = Complex64::new(mu * f.b_par, 0.0);
    let c = mu * f.b_perp / std::f64::consts::SQRT_2;
    let down = Complex64::from_polar(c, -f.phi);
    let up = Complex64::from_polar(c, f.phi);
    let eps = nv.epsilon;
    #[rustfmt::skip]
    let h = Matrix3::new(
        zeeman,      down,                           eps.conj(),
        up,          Complex64::new(-nv.zfs, 0.0),   down,
        eps,         up,                             -zeeman,
    );
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    [ev[0], ev[1], ev[2]]
}

/// Zeeman saturation factor λ = μ|B∥| / sqrt(μ²B∥² + |ε|²) ∈ [0, 1].
pub fn lambda_factor(b_par: f64, nv: &NVParams) -> f64 {
    let z = nv.mu * b_par.abs();
    let denom = (z * z + nv.epsilon.norm_sqr()).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        z / denom
    }
}
