//! Nanodiamond geometry and the bias + 2D quadrupole field model,
//! B(x, y) = B0(t)·(cos θ0, sin θ0) + B′·(x, −y).

use serde::{Deserialize, Serialize};

use crate::constants::{DIAMOND_CHI_PER_MASS, DIAMOND_DENSITY, NANOMETER};
use crate::error::{invalid, Result, SgiError};
use crate::nv_spin::NVParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NDParams {
    /// Radius R [m].
    pub radius: f64,
    /// Density ρ [kg/m³].
    pub density: f64,
    /// Distance d of the NV from the ND center [m].
    pub nv_distance: f64,
    /// Angle α between the NV axis and the center→NV vector [rad].
    pub nv_angle: f64,
    /// Mass susceptibility [m³/kg]; χ = chi_per_mass·M.
    pub chi_per_mass: f64,
    pub diamagnetic_enabled: bool,
    pub nv: NVParams,
}

impl Default for NDParams {
    /// The 25 nm test-case particle with d = 1 nm, α = π/4.
    fn default() -> Self {
        Self {
            radius: 25.0 * NANOMETER,
            density: DIAMOND_DENSITY,
            nv_distance: 1.0 * NANOMETER,
            nv_angle: std::f64::consts::FRAC_PI_4,
            chi_per_mass: DIAMOND_CHI_PER_MASS,
            diamagnetic_enabled: false,
            nv: NVParams::default(),
        }
    }
}

impl NDParams {
    pub fn mass(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.density * self.radius.powi(3)
    }

    /// Moment of inertia of a homogeneous sphere, (2/5)MR².
    pub fn inertia(&self) -> f64 {
        0.4 * self.mass() * self.radius * self.radius
    }

    /// Volume susceptibility integrated over the particle [m³].
    pub fn chi(&self) -> f64 {
        self.chi_per_mass * self.mass()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius", "must be positive"));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(invalid("density", "must be positive"));
        }
        if !(0.0..=self.radius).contains(&self.nv_distance) {
            return Err(invalid("nv_distance", "must lie in [0, R]"));
        }
        if !self.nv_angle.is_finite() {
            return Err(invalid("nv_angle", "must be finite"));
        }
        if !(self.chi_per_mass <= 0.0) {
            return Err(invalid("chi_per_mass", "diamond is diamagnetic, must be <= 0"));
        }
        self.nv.validate()
    }
}

/// Time dependence of the bias magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RampPolicy {
    #[default]
    Constant,
    /// B0(t) = B0(0) − ½B′(a_av + g_ξ)t², holding the field at the mean
    /// position of the two arms fixed.
    Quadratic { a_av: f64, g_xi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Bias magnitude B0(0) [T].
    pub b0: f64,
    /// Bias direction θ0 [rad].
    pub theta0: f64,
    /// Quadrupole gradient B′ [T/m].
    pub b_grad: f64,
    pub ramp: RampPolicy,
    /// Gravity along ξ [m/s²].
    pub g_xi: f64,
    /// Gravity along ζ [m/s²].
    pub g_zeta: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            b0: 10.0 * crate::constants::GAUSS,
            theta0: std::f64::consts::FRAC_PI_8,
            b_grad: 0.2 * crate::constants::GAUSS_PER_NM,
            ramp: RampPolicy::Constant,
            g_xi: 0.0,
            g_zeta: 0.0,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b0 >= 0.0 && self.b0.is_finite()) {
            return Err(invalid("b0", "must be >= 0"));
        }
        if !self.theta0.is_finite() || !self.b_grad.is_finite() {
            return Err(invalid("field", "theta0 and b_grad must be finite"));
        }
        if !self.g_xi.is_finite() || !self.g_zeta.is_finite() {
            return Err(invalid("gravity", "must be finite"));
        }
        Ok(())
    }

    /// Raw bias magnitude at time `t`; may be negative once a ramp overshoots.
    pub fn bias_raw(&self, t: f64) -> f64 {
        match self.ramp {
            RampPolicy::Constant => self.b0,
            RampPolicy::Quadratic { a_av, g_xi } => self.b0 - 0.5 * self.b_grad * (a_av + g_xi) * t * t,
        }
    }

    /// Bias magnitude at `t`, erroring once a ramp has driven it to zero.
    pub fn bias_checked(&self, t: f64) -> Result<f64> {
        let b = self.bias_raw(t);
        if b <= 0.0 && !matches!(self.ramp, RampPolicy::Constant) {
            Err(SgiError::BiasExhausted { t })
        } else {
            Ok(b)
        }
    }

    /// Bias magnitude at `t`, clipped at zero.
    pub fn bias(&self, t: f64) -> f64 {
        self.bias_raw(t).max(0.0)
    }

    /// Gravity in quadrupole coordinates (g_x, g_y).
    pub fn gravity_xy(&self) -> (f64, f64) {
        from_xi_zeta(self.g_xi, self.g_zeta, self.theta0)
    }
}

/// ND center and rotation angle. θ is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// NV-axis angle θ′ = θ + α.
    pub fn theta_prime(&self, nd: &NDParams) -> f64 {
        self.theta + nd.nv_angle
    }

    /// θ reduced to [0, 2π) for reporting.
    pub fn theta_wrapped(&self) -> f64 {
        self.theta.rem_euclid(std::f64::consts::TAU)
    }
}

pub fn field_at(x: f64, y: f64, cfg: &FieldConfig, t: f64) -> (f64, f64) {
    let b0 = cfg.bias(t);
    let (s, c) = cfg.theta0.sin_cos();
    (b0 * c + cfg.b_grad * x, b0 * s - cfg.b_grad * y)
}

pub fn nv_position(p: &Pose, nd: &NDParams) -> (f64, f64) {
    let (s, c) = p.theta.sin_cos();
    (p.x + nd.nv_distance * c, p.y + nd.nv_distance * s)
}

pub fn b_parallel_at_nv(p: &Pose, nd: &NDParams, cfg: &FieldConfig, t: f64) -> f64 {
    let tp = p.theta_prime(nd);
    let (xn, yn) = nv_position(p, nd);
    let (s, c) = tp.sin_cos();
    cfg.bias(t) * (tp - cfg.theta0).cos() + cfg.b_grad * (xn * c - yn * s)
}

/// Total derivative dB∥/dθ, including the motion of the NV with θ.
pub fn dbpar_dtheta(p: &Pose, nd: &NDParams, cfg: &FieldConfig, t: f64) -> f64 {
    let tp = p.theta_prime(nd);
    let (s, c) = tp.sin_cos();
    -cfg.bias(t) * (tp - cfg.theta0).sin()
        - cfg.b_grad * (p.x * s + p.y * c)
        - 2.0 * nd.nv_distance * cfg.b_grad * (2.0 * tp - nd.nv_angle).sin()
}

/// Bias angle that makes the NV-along-field orientation stationary: θ0 = α/2.
pub fn preparation_bias_angle(alpha: f64) -> f64 {
    0.5 * alpha
}

/// (x, y) → (ξ, ζ) with ξ along the 1D splitting direction (cos θ0, −sin θ0).
pub fn to_xi_zeta(x: f64, y: f64, theta0: f64) -> (f64, f64) {
    let (s, c) = theta0.sin_cos();
    (x * c - y * s, x * s + y * c)
}

pub fn from_xi_zeta(xi: f64, zeta: f64, theta0: f64) -> (f64, f64) {
    let (s, c) = theta0.sin_cos();
    (xi * c + zeta * s, -xi * s + zeta * c)
}

/// Field at the NV and its derivatives with respect to (x, y, θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvFieldGeometry {
    pub b_par: f64,
    /// Signed transverse component −Bx sin θ′ + By cos θ′.
    pub b_perp: f64,
    pub grad_par: [f64; 3],
    pub grad_perp: [f64; 3],
}

pub fn nv_field_geometry(p: &Pose, nd: &NDParams, cfg: &FieldConfig, t: f64) -> NvFieldGeometry {
    let tp = p.theta_prime(nd);
    let (s, c) = tp.sin_cos();
    let (xn, yn) = nv_position(p, nd);
    let (bx, by) = field_at(xn, yn, cfg, t);
    let b_par = bx * c + by * s;
    let b_perp = -bx * s + by * c;
    let g = cfg.b_grad;
    let sum_angle = p.theta + tp;
    NvFieldGeometry {
        b_par,
        b_perp,
        grad_par: [g * c, -g * s, dbpar_dtheta(p, nd, cfg, t)],
        grad_perp: [-g * s, -g * c, -b_par - g * nd.nv_distance * sum_angle.cos()],
    }
}
