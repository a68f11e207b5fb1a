//! Gaussian width dynamics for the angular and centre-of-mass degrees of
//! freedom, and the overlap of the two arms at the output.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::dynamics::{Arm, SequenceConfig};
use crate::error::{invalid, Result, SgiError};
use crate::field::{FieldConfig, NDParams};
use crate::nv_spin::SpinLabel;

/// Largest angular width for which the Gaussian overlap over (−π, π] is
/// taken in closed form.
pub const MAX_OVERLAP_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularWavepacket {
    /// σθ [rad]
    pub sigma_theta: f64,
    /// σ̇θ [rad/s]
    pub sigma_dot: f64,
    /// αθ = (I/ħ)·σ̇θ/σθ [1/rad²]
    pub alpha_theta: f64,
}

impl AngularWavepacket {
    pub fn new(sigma_theta: f64, sigma_dot: f64, inertia: f64) -> Result<Self> {
        if !(sigma_theta > 0.0 && sigma_theta.is_finite()) {
            return Err(invalid("sigma_theta", "must be positive"));
        }
        Ok(Self { sigma_theta, sigma_dot, alpha_theta: inertia / HBAR * sigma_dot / sigma_theta })
    }

    /// Libration ground state, σ0 = sqrt(ħ/2Iω).
    pub fn ground(omega: f64, inertia: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(invalid("omega", "ground state needs omega > 0"));
        }
        Self::new((HBAR / (2.0 * inertia * omega)).sqrt(), 0.0, inertia)
    }
}

/// Piecewise-constant signed ω²: +ω² in |−⟩, 0 in |0⟩, −ω² in |+⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSchedule {
    /// (duration [s], ω² [1/s²])
    pub pieces: Vec<(f64, f64)>,
}

impl OmegaSchedule {
    pub fn for_spins(segments: &[(SpinLabel, f64)], omega: f64) -> Self {
        let w2 = omega * omega;
        Self { pieces: segments.iter().map(|(s, t)| (*t, -(s.p() as f64) * w2)).collect() }
    }

    pub fn for_arm(seq: &SequenceConfig, arm: Arm, omega: f64) -> Self {
        let segs: Vec<(SpinLabel, f64)> = seq.segments(arm).iter().map(|s| (s.spin, s.duration)).collect();
        Self::for_spins(&segs, omega)
    }

    pub fn duration(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthSample {
    pub t: f64,
    pub packet: AngularWavepacket,
}

/// Largest RK4 substep as a fraction of the local width timescale.
const SUBSTEP: f64 = 0.01;

fn rk4_step2(y: [f64; 2], h: f64, f: impl Fn([f64; 2]) -> [f64; 2]) -> [f64; 2] {
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates σ̈θ = ħ²/(4I²σθ³) − ω(t)²σθ over `duration` with RK4, steps
/// aligned to the schedule pieces and refined where the width changes fast. Past the end of the schedule the last ω²
/// is held.
pub fn evolve_sigma_theta(
    w0: &AngularWavepacket,
    schedule: &OmegaSchedule,
    duration: f64,
    dt: f64,
    inertia: f64,
) -> Result<Vec<WidthSample>> {
    if !(w0.sigma_theta > 0.0) {
        return Err(invalid("sigma_theta", "must be positive"));
    }
    if !(dt > 0.0) {
        return Err(SgiError::StepSize { dt, limit: duration });
    }
    let q = HBAR * HBAR / (4.0 * inertia * inertia);
    let sigma0 = w0.sigma_theta;
    let mut pieces = Vec::new();
    let mut left = duration;
    for &(len, w2) in &schedule.pieces {
        if left <= 0.0 {
            break;
        }
        pieces.push((len.min(left), w2));
        left -= len;
    }
    if left > 0.0 {
        pieces.push((left, schedule.pieces.last().map_or(0.0, |p| p.1)));
    }

    let mut out = vec![WidthSample { t: 0.0, packet: *w0 }];
    let mut y = [w0.sigma_theta, w0.sigma_dot];
    let mut t0 = 0.0;
    for (len, w2) in pieces {
        if len <= 0.0 {
            continue;
        }
        let n = (len / dt - 1e-9).ceil().max(1.0) as usize;
        let h = len / n as f64;
        for k in 0..n {
            let t = if k + 1 == n { t0 + len } else { t0 + (k + 1) as f64 * h };
            // A squeezed packet passes its waist in ~2Iσ²/ħ, which can be far
            // shorter than the nominal step, so substep on the local rate.
            let mut left = h;
            while left > 0.0 {
                let rate = (y[1] / y[0]).abs().max(q.sqrt() / (y[0] * y[0])).max(w2.abs().sqrt());
                let sub = left.min(SUBSTEP / rate);
                y = rk4_step2(y, sub, |s| [s[1], q / s[0].powi(3) - w2 * s[0]]);
                left -= sub;
                if !(y[0] > 1e-6 * sigma0) || !y[1].is_finite() {
                    return Err(SgiError::WidthCollapse { sigma: y[0], sigma0, t });
                }
            }
            out.push(WidthSample { t, packet: AngularWavepacket::new(y[0], y[1], inertia)? });
        }
        t0 += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceResult {
    pub c_theta: f64,
    /// (σθ, αθ) of arm 1
    pub arm1: (f64, f64),
    pub arm2: (f64, f64),
}

/// Overlap of two θ0-centred Gaussians,
/// [σ1σ2·sqrt(¼(σ1⁻² + σ2⁻²)² + (α1 − α2)²)]^(−1/2).
pub fn overlap_coherence(w1: &AngularWavepacket, w2: &AngularWavepacket) -> Result<CoherenceResult> {
    for w in [w1, w2] {
        if !(w.sigma_theta > 0.0) {
            return Err(invalid("sigma_theta", "must be positive"));
        }
        if w.sigma_theta > MAX_OVERLAP_WIDTH {
            return Err(SgiError::WavepacketTooWide { sigma: w.sigma_theta });
        }
    }
    let (s1, s2) = (w1.sigma_theta, w2.sigma_theta);
    let sum = 0.25 * (1.0 / (s1 * s1) + 1.0 / (s2 * s2)).powi(2);
    let da = w1.alpha_theta - w2.alpha_theta;
    let c = (s1 * s2 * (sum + da * da).sqrt()).powf(-0.5);
    Ok(CoherenceResult { c_theta: c.min(1.0), arm1: (s1, w1.alpha_theta), arm2: (s2, w2.alpha_theta) })
}

/// Width-overlap coherence after the full sequence, both arms starting in
/// the libration ground state of frequency `omega`.
pub fn sequence_coherence(
    seq: &SequenceConfig,
    omega: f64,
    inertia: f64,
    steps_per_pulse: u32,
) -> Result<CoherenceResult> {
    let w0 = AngularWavepacket::ground(omega, inertia)?;
    let dt = seq.t_pulse / steps_per_pulse as f64;
    let total = seq.total_duration();
    let end = |arm| -> Result<AngularWavepacket> {
        let sched = OmegaSchedule::for_arm(seq, arm, omega);
        let tr = evolve_sigma_theta(&w0, &sched, total, dt, inertia)?;
        Ok(tr.last().map(|s| s.packet).unwrap_or(w0))
    };
    overlap_coherence(&end(Arm::One)?, &end(Arm::Two)?)
}

/// Centre and width coherences multiplied. The two come from different
/// approximations, so the product is only a rough combined estimate.
pub fn combined_coherence(center: f64, width: f64) -> f64 {
    center * width
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoMWavepacket {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_x_dot: f64,
    pub sigma_y_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoMSample {
    pub t: f64,
    pub packet: CoMWavepacket,
}

fn interpolate_sigma(history: &[WidthSample], t: f64) -> f64 {
    match history.len() {
        0 => 0.0,
        1 => history[0].packet.sigma_theta,
        _ => {
            let k = history.partition_point(|s| s.t <= t).clamp(1, history.len() - 1);
            let (a, b) = (&history[k - 1], &history[k]);
            let f = if b.t > a.t { ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0) } else { 0.0 };
            a.packet.sigma_theta + f * (b.packet.sigma_theta - a.packet.sigma_theta)
        }
    }
}

/// CoM widths during one pulse in spin state `spin`:
/// σ̈x = ħ²/(4M²σx³) + |p|(μB′/M)·sin θ′·σθ,
/// σ̈y = ħ²/(4M²σy³) + |p|(μB′/M)·cos θ′·σθ,
/// with σθ(t) interpolated from `sigma_theta_history`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_sigma_cm(
    w0: &CoMWavepacket,
    spin: SpinLabel,
    theta_prime: f64,
    sigma_theta_history: &[WidthSample],
    nd: &NDParams,
    cfg: &FieldConfig,
    duration: f64,
    dt: f64,
) -> Result<Vec<CoMSample>> {
    if !(w0.sigma_x > 0.0 && w0.sigma_y > 0.0) {
        return Err(invalid("sigma_cm", "widths must be positive"));
    }
    if !(dt > 0.0 && duration >= 0.0) {
        return Err(SgiError::StepSize { dt, limit: duration });
    }
    let m = nd.mass();
    let q = HBAR * HBAR / (4.0 * m * m);
    let drive = (spin.p() as f64).abs() * nd.nv.mu * cfg.b_grad / m;
    let (sx, cx) = theta_prime.sin_cos();
    let mut out = vec![CoMSample { t: 0.0, packet: *w0 }];
    if duration == 0.0 {
        return Ok(out);
    }
    let n = (duration / dt - 1e-9).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let mut y = [w0.sigma_x, w0.sigma_x_dot, w0.sigma_y, w0.sigma_y_dot];
    let f = |t: f64, y: &[f64; 4]| -> [f64; 4] {
        let st = interpolate_sigma(sigma_theta_history, t);
        [y[1], q / y[0].powi(3) + drive * sx * st, y[3], q / y[2].powi(3) + drive * cx * st]
    };
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = f(t, &y);
        let y2 = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
        let k2 = f(t + 0.5 * h, &y2);
        let y3 = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
        let k3 = f(t + 0.5 * h, &y3);
        let y4 = std::array::from_fn(|i| y[i] + h * k3[i]);
        let k4 = f(t + h, &y4);
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if k + 1 == n { duration } else { t + h };
        for (s, s0) in [(y[0], w0.sigma_x), (y[2], w0.sigma_y)] {
            if !(s > 1e-6 * s0) {
                return Err(SgiError::WidthCollapse { sigma: s, sigma0: s0, t: t_next });
            }
        }
        out.push(CoMSample {
            t: t_next,
            packet: CoMWavepacket { sigma_x: y[0], sigma_x_dot: y[1], sigma_y: y[2], sigma_y_dot: y[3] },
        });
    }
    Ok(out)
}

/// Gaussian overlap of CoM widths by analogy with the angular case, product
/// over x and y. Experimental: no recombination model backs it.
pub fn com_overlap(w1: &CoMWavepacket, w2: &CoMWavepacket, mass: f64) -> f64 {
    let axis = |s1: f64, d1: f64, s2: f64, d2: f64| {
        let a1 = mass / HBAR * d1 / s1;
        let a2 = mass / HBAR * d2 / s2;
        let sum = 0.25 * (1.0 / (s1 * s1) + 1.0 / (s2 * s2)).powi(2);
        (s1 * s2 * (sum + (a1 - a2).powi(2)).sqrt()).powf(-0.5).min(1.0)
    };
    axis(w1.sigma_x, w1.sigma_x_dot, w2.sigma_x, w2.sigma_x_dot)
        * axis(w1.sigma_y, w1.sigma_y_dot, w2.sigma_y, w2.sigma_y_dot)
}
