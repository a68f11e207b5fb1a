//! Small-angle libration analytics: propagators on (θ̃, θ̇), output mismatch,
//! per-segment angular phases and the statistics of the resulting phase.
//!
//! Angles here are deviations θ̃ = θ′ − θ0 of the NV axis from the bias.

use log::warn;
use nalgebra::Matrix2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{invalid, Result};
use crate::field::{FieldConfig, NDParams};
use crate::nv_spin::SpinLabel;

pub type Propagator = Matrix2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LibrationParams {
    pub omega: f64,
    pub inertia: f64,
    pub t_pulse: f64,
    pub omega_t: f64,
}

impl LibrationParams {
    pub fn new(b_nv: f64, nd: &NDParams, t_pulse: f64) -> Result<Self> {
        let omega = libration_frequency(b_nv, nd)?;
        Ok(Self { omega, inertia: nd.inertia(), t_pulse, omega_t: omega * t_pulse })
    }
}

/// ω = sqrt(μ·B_NV/I).
pub fn libration_frequency(b_nv: f64, nd: &NDParams) -> Result<f64> {
    if !(b_nv >= 0.0) {
        return Err(invalid("b_nv", format!("must be >= 0, got {b_nv}")));
    }
    Ok((nd.nv.mu * b_nv / nd.inertia()).sqrt())
}

/// Field at the NV that sets the libration frequency at the start of the
/// sequence, B0 + 4d·B′ (ND at the origin, NV along the bias).
pub fn initial_nv_field(cfg: &FieldConfig, nd: &NDParams) -> f64 {
    cfg.b0 + 4.0 * nd.nv_distance * cfg.b_grad
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatsSource {
    Thermal { t_theta: f64 },
    GroundState { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularStats {
    /// Δθ [rad]
    pub d_theta: f64,
    /// Δθ̇ [rad/s]
    pub d_theta_dot: f64,
    pub source: StatsSource,
}

/// Thermal spread in the harmonic well of the bias field.
pub fn thermal_stats(t_theta: f64, b0: f64, nd: &NDParams) -> Result<AngularStats> {
    if !(t_theta >= 0.0) {
        return Err(invalid("t_theta", "must be >= 0"));
    }
    if !(b0 > 0.0) {
        return Err(invalid("b0", "thermal libration needs a confining field"));
    }
    let kt = K_B * t_theta;
    let well = nd.nv.mu * b0;
    if kt > 0.1 * well {
        warn!(
            "T_theta = {t_theta:.3e} K is not small against mu*B0/kB = {:.3e} K; the harmonic picture fails",
            well / K_B
        );
    }
    let d_theta = (2.0 * kt / well).sqrt();
    if d_theta > 0.3 {
        warn!("thermal angular spread {d_theta:.3} rad is not small");
    }
    Ok(AngularStats {
        d_theta,
        d_theta_dot: (2.0 * kt / nd.inertia()).sqrt(),
        source: StatsSource::Thermal { t_theta },
    })
}

pub fn ground_state_stats(omega: f64, nd: &NDParams) -> Result<AngularStats> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("omega", "ground state needs omega > 0"));
    }
    let i = nd.inertia();
    Ok(AngularStats {
        d_theta: (HBAR / (2.0 * i * omega)).sqrt(),
        d_theta_dot: (HBAR * omega / (2.0 * i)).sqrt(),
        source: StatsSource::GroundState { omega },
    })
}

/// Phase-space propagator on (θ̃, θ̇) for time `t`. The |+⟩ well is
/// inverted, so its propagator is the hyperbolic analogue of the |−⟩ one.
pub fn evolution_matrix(spin: SpinLabel, t: f64, omega: f64) -> Propagator {
    let wt = omega * t;
    match spin {
        SpinLabel::Zero => Matrix2::new(1.0, t, 0.0, 1.0),
        _ if omega == 0.0 => Matrix2::new(1.0, t, 0.0, 1.0),
        SpinLabel::Minus => {
            let (s, c) = wt.sin_cos();
            Matrix2::new(c, s / omega, -omega * s, c)
        }
        SpinLabel::Plus => {
            if wt > 0.3 {
                warn!("|+> libration with omega*t = {wt:.3} > 0.3: small-angle treatment is unreliable");
            }
            let (s, c) = (wt.sinh(), wt.cosh());
            Matrix2::new(c, s / omega, omega * s, c)
        }
    }
}

/// Product of segment propagators in time order.
pub fn sequence_matrix(segments: &[(SpinLabel, f64)], omega: f64) -> Propagator {
    segments.iter().fold(Matrix2::identity(), |acc, (spin, t)| evolution_matrix(*spin, *t, omega) * acc)
}

type ArmSegments = [(SpinLabel, f64); 3];

fn asymmetric_arms(t_pulse: f64) -> (ArmSegments, ArmSegments) {
    use SpinLabel::*;
    (
        [(Minus, t_pulse), (Zero, 2.0 * t_pulse), (Minus, t_pulse)],
        [(Zero, t_pulse), (Minus, 2.0 * t_pulse), (Zero, t_pulse)],
    )
}

/// (U1, U2) for the |−⟩,|0⟩,|−⟩ and |0⟩,|−⟩,|0⟩ arms.
pub fn arm_matrices(t_pulse: f64, omega: f64) -> (Propagator, Propagator) {
    let (a1, a2) = asymmetric_arms(t_pulse);
    (sequence_matrix(&a1, omega), sequence_matrix(&a2, omega))
}

/// Output mismatch coefficients: U1 − U2 = [[0, a/ω], [ω·b, 0]].
pub fn mismatch_coeffs(omega_t: f64) -> (f64, f64) {
    let (s, c) = omega_t.sin_cos();
    (2.0 * omega_t * s * (s + omega_t * c), 2.0 * omega_t * s * s)
}

/// ħ/ΔLz [rad] and ħ/Δθ [J·s].
pub fn coherence_lengths(stats: &AngularStats, nd: &NDParams) -> (f64, f64) {
    (HBAR / (nd.inertia() * stats.d_theta_dot), HBAR / stats.d_theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchResult {
    pub a_coeff: f64,
    pub b_coeff: f64,
    pub delta_theta: f64,
    pub delta_theta_dot: f64,
    /// angular coherence length l_c [rad]
    pub l_c: f64,
    /// angular-momentum coherence width l_w [J·s]
    pub l_w: f64,
}

impl MismatchResult {
    /// exp[−½(δθ²/l_c² + δLz²/l_w²)]
    pub fn coherence(&self, nd: &NDParams) -> f64 {
        let dl = nd.inertia() * self.delta_theta_dot;
        (-0.5 * ((self.delta_theta / self.l_c).powi(2) + (dl / self.l_w).powi(2))).exp()
    }
}

pub fn mismatch(
    theta0: f64,
    theta_dot0: f64,
    omega: f64,
    t_pulse: f64,
    stats: &AngularStats,
    nd: &NDParams,
) -> MismatchResult {
    let (a, b) = mismatch_coeffs(omega * t_pulse);
    let (l_c, l_w) = coherence_lengths(stats, nd);
    let delta_theta = if omega > 0.0 { a * theta_dot0 / omega } else { 0.0 };
    MismatchResult { a_coeff: a, b_coeff: b, delta_theta, delta_theta_dot: omega * b * theta0, l_c, l_w }
}

/// exp[−(a²ΔE_kin² + b²ΔE_pot²)/(2E0²)]
pub fn semiclassical_coherence(a: f64, b: f64, de_kin: f64, de_pot: f64, e0: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(invalid("e0", "must be positive"));
    }
    Ok((-(a * a * de_kin * de_kin + b * b * de_pot * de_pot) / (2.0 * e0 * e0)).exp())
}

/// Ground-state form exp[−(a² + b²)/8].
pub fn semiclassical_coherence_gs(omega_t: f64) -> f64 {
    let (a, b) = mismatch_coeffs(omega_t);
    (-(a * a + b * b) / 8.0).exp()
}

/// Angular action of one segment, (I/2ħ)∫(θ̇² ∓ ω²θ²)dt, from its initial
/// (θ̃, θ̇).
pub fn segment_phase(spin: SpinLabel, t: f64, omega: f64, theta_i: f64, theta_dot_i: f64, nd: &NDParams) -> f64 {
    let i = nd.inertia();
    let free = i * t * theta_dot_i * theta_dot_i / (2.0 * HBAR);
    if spin == SpinLabel::Zero || omega == 0.0 {
        return free;
    }
    let wt = omega * t;
    let (th, td) = (theta_i, theta_dot_i);
    match spin {
        SpinLabel::Minus => {
            let (s, c) = wt.sin_cos();
            i * s / (2.0 * HBAR * omega) * ((td * td - omega * omega * th * th) * c - 2.0 * omega * th * td * s)
        }
        _ => {
            let (s, c) = (wt.sinh(), wt.cosh());
            i * s / (2.0 * HBAR * omega) * ((td * td + omega * omega * th * th) * c + 2.0 * omega * th * td * s)
        }
    }
}

/// Segment phases of both arms and the angular separation phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposedPhase {
    pub arm1: Vec<f64>,
    pub arm2: Vec<f64>,
    /// −I·mean(θ̇)·δθ/ħ at the output
    pub separation: f64,
    pub total: f64,
}

fn arm_phases(segments: &[(SpinLabel, f64)], omega: f64, mut x: [f64; 2], nd: &NDParams) -> (Vec<f64>, [f64; 2]) {
    let mut phases = Vec::with_capacity(segments.len());
    for (spin, t) in segments {
        phases.push(segment_phase(*spin, *t, omega, x[0], x[1], nd));
        let u = evolution_matrix(*spin, *t, omega);
        x = [u[(0, 0)] * x[0] + u[(0, 1)] * x[1], u[(1, 0)] * x[0] + u[(1, 1)] * x[1]];
    }
    (phases, x)
}

/// Angular phase difference of two arms by propagating (θ̃, θ̇) through
/// each segment and summing segment phases.
pub fn compose_phase(
    arm1: &[(SpinLabel, f64)],
    arm2: &[(SpinLabel, f64)],
    omega: f64,
    theta0: f64,
    theta_dot0: f64,
    nd: &NDParams,
) -> ComposedPhase {
    let (p1, x1) = arm_phases(arm1, omega, [theta0, theta_dot0], nd);
    let (p2, x2) = arm_phases(arm2, omega, [theta0, theta_dot0], nd);
    let separation = -nd.inertia() * 0.5 * (x1[1] + x2[1]) * (x1[0] - x2[0]) / HBAR;
    let total = p1.iter().sum::<f64>() - p2.iter().sum::<f64>() + separation;
    ComposedPhase { arm1: p1, arm2: p2, separation, total }
}

pub fn composed_angular_phase(theta0: f64, theta_dot0: f64, omega: f64, t_pulse: f64, nd: &NDParams) -> ComposedPhase {
    let (a1, a2) = asymmetric_arms(t_pulse);
    compose_phase(&a1, &a2, omega, theta0, theta_dot0, nd)
}

/// (A, B, C, D) as functions of u = ωT.
pub fn abcd(u: f64) -> (f64, f64, f64, f64) {
    let (s, c) = u.sin_cos();
    let d = s + u * c;
    let k = 1.0 - 2.0 * s * d;
    (s * k, -d * k, 2.0 * s * d * (2.0 * c - u * s), d)
}

/// δφθ = q_tt·θ̃² + q_dd·θ̇² + q_td·θ̃θ̇
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    pub q_tt: f64,
    pub q_dd: f64,
    pub q_td: f64,
}

impl QuadForm {
    pub fn eval(&self, theta: f64, theta_dot: f64) -> f64 {
        self.q_tt * theta * theta + self.q_dd * theta_dot * theta_dot + self.q_td * theta * theta_dot
    }

    /// sqrt(E[Q²]) for independent zero-mean Gaussian inputs.
    pub fn rms(&self, s1: f64, s2: f64) -> f64 {
        let (v1, v2) = (s1 * s1, s2 * s2);
        (3.0 * self.q_tt.powi(2) * v1 * v1
            + 3.0 * self.q_dd.powi(2) * v2 * v2
            + (2.0 * self.q_tt * self.q_dd + self.q_td.powi(2)) * v1 * v2)
            .sqrt()
    }

    /// E[Q]
    pub fn mean(&self, s1: f64, s2: f64) -> f64 {
        self.q_tt * s1 * s1 + self.q_dd * s2 * s2
    }
}

/// Coefficients of the angular phase of the |−⟩/|0⟩ sequence:
/// (Iω/ħ)·sin u·[u·A·θ̃² + (T/ω)·B·θ̇² + T·C·θ̃θ̇].
pub fn angular_phase_form(omega: f64, t_pulse: f64, nd: &NDParams) -> QuadForm {
    if omega == 0.0 {
        return QuadForm { q_tt: 0.0, q_dd: 0.0, q_td: 0.0 };
    }
    let u = omega * t_pulse;
    let (a, b, c, _) = abcd(u);
    let pre = nd.inertia() * omega / HBAR * u.sin();
    QuadForm { q_tt: pre * u * a, q_dd: pre * t_pulse / omega * b, q_td: pre * t_pulse * c }
}

pub fn angular_phase(theta0: f64, theta_dot0: f64, omega: f64, t_pulse: f64, nd: &NDParams) -> f64 {
    angular_phase_form(omega, t_pulse, nd).eval(theta0, theta_dot0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub delta_phi: f64,
    pub delta_phi_uncertainty: f64,
    /// arm-1 segment phases, arm-2 segment phases, separation phase
    pub components: Vec<f64>,
}

pub fn phase_result(
    theta0: f64,
    theta_dot0: f64,
    stats: &AngularStats,
    omega: f64,
    t_pulse: f64,
    nd: &NDParams,
) -> PhaseResult {
    let c = composed_angular_phase(theta0, theta_dot0, omega, t_pulse, nd);
    let mut components = c.arm1.clone();
    components.extend(&c.arm2);
    components.push(c.separation);
    PhaseResult {
        delta_phi: angular_phase(theta0, theta_dot0, omega, t_pulse, nd),
        delta_phi_uncertainty: phase_uncertainty(stats, omega, t_pulse, nd),
        components,
    }
}

/// RMS of δφθ over independent Gaussian (θ̃, θ̇) with the given spreads.
pub fn phase_uncertainty(stats: &AngularStats, omega: f64, t_pulse: f64, nd: &NDParams) -> f64 {
    angular_phase_form(omega, t_pulse, nd).rms(stats.d_theta, stats.d_theta_dot)
}

/// Ground-state phase uncertainty, ½|sin u|·u·sqrt(3A² + 3B² + 2AB + C²);
/// a function of u = ωT alone.
pub fn phase_uncertainty_gs(omega_t: f64) -> f64 {
    let (a, b, c, _) = abcd(omega_t);
    0.5 * omega_t.sin().abs() * omega_t * (3.0 * a * a + 3.0 * b * b + 2.0 * a * b + c * c).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// sqrt(mean δφ²), the quantity the closed form predicts
    pub rms: f64,
    pub stderr: f64,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

const MC_SHARDS: u64 = 64;

/// Monte Carlo estimate of the phase spread, evaluating the quadratic form
/// on i.i.d. Gaussian draws. Shards use fixed ChaCha streams, so the result
/// depends only on `seed` and `n_samples`, not on the thread count.
pub fn phase_uncertainty_mc(
    stats: &AngularStats,
    omega: f64,
    t_pulse: f64,
    nd: &NDParams,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 10_000 {
        return Err(invalid("n_samples", "need at least 1e4 samples"));
    }
    let form = angular_phase_form(omega, t_pulse, nd);
    let per = n_samples / MC_SHARDS as usize;
    let extra = n_samples % MC_SHARDS as usize;
    let sums: Vec<[f64; 3]> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let n = per + usize::from((shard as usize) < extra);
            let mut acc = [0.0; 3];
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let q = form.eval(stats.d_theta * z1, stats.d_theta_dot * z2);
                let q2 = q * q;
                acc[0] += q;
                acc[1] += q2;
                acc[2] += q2 * q2;
            }
            acc
        })
        .collect();
    let n = n_samples as f64;
    let tot = sums.iter().fold([0.0; 3], |a, s| [a[0] + s[0], a[1] + s[1], a[2] + s[2]]);
    let (m1, m2, m4) = (tot[0] / n, tot[1] / n, tot[2] / n);
    let rms = m2.sqrt();
    let se_m2 = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    Ok(McEstimate {
        rms,
        stderr: if rms > 0.0 { se_m2 / (2.0 * rms) } else { 0.0 },
        mean: m1,
        std: (m2 - m1 * m1).max(0.0).sqrt(),
        n: n_samples,
    })
}

/// One point of an angular history, θ̃ and θ̇ at time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSample {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversePath {
    pub zeta: Vec<f64>,
    pub zeta_dot: Vec<f64>,
    /// (M/ħ)∫[½ζ̇² + qθ̃ζ]dt
    pub phase: f64,
}

/// Transverse drift ζ driven by a small libration during a |−⟩ pulse,
/// ζ̈ = q·θ̃, with ζ(t0) = ζi and ζ̇(t0) = ζ̇i.
///
/// `history` must be uniformly sampled.
pub fn transverse_phase(
    history: &[AngularSample],
    q: f64,
    omega: f64,
    zeta_i: f64,
    zeta_dot_i: f64,
    nd: &NDParams,
) -> Result<TransversePath> {
    if history.len() < 2 {
        return Err(invalid("history", "need at least two samples"));
    }
    if !(omega > 0.0) {
        return Err(invalid("omega", "transverse solution needs omega > 0"));
    }
    let h0 = history[0];
    let k = q / (omega * omega);
    let c0 = zeta_i + k * h0.theta;
    let c1 = zeta_dot_i + k * h0.theta_dot;
    let zeta: Vec<f64> = history.iter().map(|s| c0 + c1 * (s.t - h0.t) - k * s.theta).collect();
    let zeta_dot: Vec<f64> = history.iter().map(|s| c1 - k * s.theta_dot).collect();
    let integrand: Vec<f64> =
        history.iter().zip(zeta.iter().zip(&zeta_dot)).map(|(s, (z, zd))| 0.5 * zd * zd + q * s.theta * z).collect();
    let h = (history[history.len() - 1].t - h0.t) / (history.len() - 1) as f64;
    let phase = nd.mass() / HBAR * simpson(&integrand, h);
    Ok(TransversePath { zeta, zeta_dot, phase })
}

/// Composite Simpson on uniform samples; an even sample count closes with
/// the 3/8 rule on the last four points.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ if n % 2 == 1 => {
            let mut s = f[0] + f[n - 1];
            for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * s
        }
        _ => {
            let m = n - 3;
            let tail = &f[m - 1..];
            simpson(&f[..m], h) + 3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
        }
    }
}

/// Ground-state spread scaled to a thermal state, Δφ_gs·kB·Tθ/(ħω).
pub fn thermal_scaling(delta_phi_gs: f64, t_theta: f64, omega: f64) -> f64 {
    let ratio = K_B * t_theta / (HBAR * omega);
    if ratio < 1.0 {
        warn!("kB*T_theta/(hbar*omega) = {ratio:.3} < 1: linear thermal scaling does not apply");
    }
    delta_phi_gs * ratio
}

/// The angular-phase and spread expressions in the form they are usually
/// quoted, kept for comparison with the composed-segment results above.
pub mod printed {
    use super::*;

    /// (Iω/ħ)·sin u·[A·θ² + T²·B·θ̇² + T·C·θθ̇]
    pub fn angular_phase(theta0: f64, theta_dot0: f64, omega: f64, t_pulse: f64, nd: &NDParams) -> f64 {
        let u = omega * t_pulse;
        let (a, b, c, _) = abcd(u);
        nd.inertia() * omega / HBAR
            * u.sin()
            * (a * theta0 * theta0
                + t_pulse * t_pulse * b * theta_dot0 * theta_dot0
                + t_pulse * c * theta0 * theta_dot0)
    }

    /// (Iω/ħ)·sqrt(3A²Δθ⁴ + 3B²Δθ̇⁴T⁴ + (2AB + C²)T²Δθ²Δθ̇²)
    pub fn phase_uncertainty(stats: &AngularStats, omega: f64, t_pulse: f64, nd: &NDParams) -> f64 {
        let (a, b, c, _) = abcd(omega * t_pulse);
        let (v1, v2) = (stats.d_theta.powi(2), stats.d_theta_dot.powi(2));
        let t2 = t_pulse * t_pulse;
        nd.inertia() * omega / HBAR
            * (3.0 * a * a * v1 * v1 + 3.0 * b * b * v2 * v2 * t2 * t2 + (2.0 * a * b + c * c) * t2 * v1 * v2).sqrt()
    }

    /// ½|sin u|·sqrt(3A² + 3u⁴B² + (2AB + C²)u²)
    pub fn phase_uncertainty_gs(u: f64) -> f64 {
        let (a, b, c, _) = abcd(u);
        0.5 * u.sin().abs() * (3.0 * a * a + 3.0 * u.powi(4) * b * b + (2.0 * a * b + c * c) * u * u).sqrt()
    }
}
