//! Classical translational and rotational dynamics of the ND through the
//! interferometer sequence, with the Lagrangian action carried alongside.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU_0};
use crate::error::{invalid, Result, SgiError};
use crate::field::{field_at, nv_field_geometry, FieldConfig, NDParams, Pose, RampPolicy};
use crate::nv_spin::SpinLabel;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub theta_dot: f64,
}

impl PhaseState {
    /// ND at rest at the origin with the NV axis rotated by `dtheta` away
    /// from the bias direction and angular velocity `dtheta_dot`.
    pub fn prepared(theta0: f64, nd: &NDParams, dtheta: f64, dtheta_dot: f64) -> Self {
        Self { theta: theta0 - nd.nv_angle + dtheta, theta_dot: dtheta_dot, ..Self::default() }
    }

    pub fn pose(&self) -> Pose {
        Pose { x: self.x, y: self.y, theta: self.theta }
    }

    /// (px, py, Lz)
    pub fn momenta(&self, nd: &NDParams) -> (f64, f64, f64) {
        let m = nd.mass();
        (m * self.vx, m * self.vy, nd.inertia() * self.theta_dot)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.theta, self.vx, self.vy, self.theta_dot]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self { x: a[0], y: a[1], theta: a[2], vx: a[3], vy: a[4], theta_dot: a[5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    One,
    Two,
}

/// One constant-spin interval of an arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub spin: SpinLabel,
    pub duration: f64,
    /// false for the delays between pulses
    pub gradient_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    /// Pulse duration T [s].
    pub t_pulse: f64,
    /// Delay between pulses Td [s].
    pub t_delay: f64,
    pub arm1: Vec<SpinLabel>,
    pub arm2: Vec<SpinLabel>,
    /// Pulse durations in units of T.
    pub pulse_multiples: Vec<f64>,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self::asymmetric(25.0 * crate::constants::MICROSECOND)
    }
}

impl SequenceConfig {
    /// |−⟩,|0⟩,|−⟩ against |0⟩,|−⟩,|0⟩ for T, 2T, T.
    pub fn asymmetric(t_pulse: f64) -> Self {
        use SpinLabel::*;
        Self {
            t_pulse,
            t_delay: 0.0,
            arm1: vec![Minus, Zero, Minus],
            arm2: vec![Zero, Minus, Zero],
            pulse_multiples: vec![1.0, 2.0, 1.0],
        }
    }

    /// |−⟩,|+⟩,|−⟩ against |+⟩,|−⟩,|+⟩.
    pub fn symmetric(t_pulse: f64) -> Self {
        Self::asymmetric(t_pulse).with_symmetric()
    }

    /// Replaces every |0⟩ by |+⟩.
    pub fn with_symmetric(mut self) -> Self {
        for s in self.arm1.iter_mut().chain(self.arm2.iter_mut()) {
            if *s == SpinLabel::Zero {
                *s = SpinLabel::Plus;
            }
        }
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.arm1.iter().chain(&self.arm2).any(|s| *s == SpinLabel::Plus)
            && !self.arm1.iter().chain(&self.arm2).any(|s| *s == SpinLabel::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_pulse > 0.0 && self.t_pulse.is_finite()) {
            return Err(invalid("t_pulse", "must be positive"));
        }
        if !(self.t_delay >= 0.0 && self.t_delay.is_finite()) {
            return Err(invalid("t_delay", "must be >= 0"));
        }
        let n = self.pulse_multiples.len();
        if n == 0 {
            return Err(invalid("pulse_multiples", "sequence is empty"));
        }
        if self.pulse_multiples.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(invalid("pulse_multiples", "must be positive"));
        }
        if self.arm1.len() != n || self.arm2.len() != n {
            return Err(SgiError::UnbalancedArms { arm1: self.arm1.len(), arm2: self.arm2.len() });
        }
        Ok(())
    }

    pub fn spins(&self, arm: Arm) -> &[SpinLabel] {
        match arm {
            Arm::One => &self.arm1,
            Arm::Two => &self.arm2,
        }
    }

    /// Pulses with the delays in between; a delay keeps the spin of the
    /// preceding pulse.
    pub fn segments(&self, arm: Arm) -> Vec<Segment> {
        let mut out = Vec::with_capacity(2 * self.pulse_multiples.len());
        for (i, (spin, m)) in self.spins(arm).iter().zip(&self.pulse_multiples).enumerate() {
            if i > 0 && self.t_delay > 0.0 {
                let prev = self.spins(arm)[i - 1];
                out.push(Segment { spin: prev, duration: self.t_delay, gradient_on: false });
            }
            out.push(Segment { spin: *spin, duration: m * self.t_pulse, gradient_on: true });
        }
        out
    }

    pub fn total_duration(&self) -> f64 {
        let n = self.pulse_multiples.len();
        self.pulse_multiples.iter().sum::<f64>() * self.t_pulse + n.saturating_sub(1) as f64 * self.t_delay
    }

    /// (δa, a_av) along ξ from the spins of the first pulse: δa is the
    /// acceleration of arm 1 minus arm 2, a_av their mean.
    pub fn accelerations(&self, nd: &NDParams, b_grad: f64) -> (f64, f64) {
        let a = nd.nv.mu * b_grad / nd.mass();
        let p1 = self.arm1.first().map_or(0.0, |s| s.p() as f64);
        let p2 = self.arm2.first().map_or(0.0, |s| s.p() as f64);
        ((p2 - p1) * a, -(p1 + p2) * a / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// RK4 steps per pulse of duration T.
    pub steps_per_pulse: u32,
    /// Keep every n-th step in the trajectory (segment ends are always kept).
    pub record_stride: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { steps_per_pulse: 2000, record_stride: 1 }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_pulse < 4 {
            return Err(invalid("steps_per_pulse", "must be >= 4"));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: PhaseState,
    pub spin: SpinLabel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Action of each integrated segment [J·s].
    pub segment_actions: Vec<f64>,
}

impl Trajectory {
    pub fn action(&self) -> f64 {
        neumaier_sum(self.segment_actions.iter().copied())
    }

    pub fn final_state(&self) -> PhaseState {
        self.samples.last().map(|s| s.state).unwrap_or_default()
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    fn append(&mut self, other: Trajectory) {
        let skip = usize::from(!self.samples.is_empty());
        self.samples.extend(other.samples.into_iter().skip(skip));
        self.segment_actions.extend(other.segment_actions);
    }
}

fn neumaier_sum(it: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0_f64, 0.0_f64);
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

struct Eval {
    acc: [f64; 3],
    lagrangian: f64,
}

fn evaluate(s: &PhaseState, spin: SpinLabel, nd: &NDParams, cfg: &FieldConfig, t: f64) -> Result<Eval> {
    let geo = nv_field_geometry(&s.pose(), nd, cfg, t);
    let pot = nd.nv.spin_potential(spin, geo.b_par, geo.b_perp)?;
    let m = nd.mass();
    let inertia = nd.inertia();
    let force = |i: usize| -(pot.d_b_par * geo.grad_par[i] + pot.d_b_perp * geo.grad_perp[i]);

    // The component equations carry the signs: for |−⟩ (dE/dB∥ = −μ) the
    // force is +μB′(cos θ′, −sin θ′), towards stronger axial field.
    let mut ax = force(0) / m;
    let mut ay = force(1) / m;
    let alpha = force(2) / inertia;

    let mut potential = pot.energy;
    if nd.diamagnetic_enabled {
        let (bx, by) = field_at(s.x, s.y, cfg, t);
        let k = nd.chi() / (MU_0 * m);
        ax += k * bx * cfg.b_grad;
        ay -= k * by * cfg.b_grad;
        potential -= nd.chi() * (bx * bx + by * by) / (2.0 * MU_0);
    }
    let (gx, gy) = cfg.gravity_xy();
    ax += gx;
    ay += gy;
    potential -= m * (gx * s.x + gy * s.y);

    let kinetic = 0.5 * m * (s.vx * s.vx + s.vy * s.vy) + 0.5 * inertia * s.theta_dot * s.theta_dot;
    Ok(Eval { acc: [ax, ay, alpha], lagrangian: kinetic - potential })
}

/// (ẍ, ÿ, θ̈) for the ND in adiabatic spin state `spin`.
pub fn accelerations(s: &PhaseState, spin: SpinLabel, nd: &NDParams, cfg: &FieldConfig, t: f64) -> Result<[f64; 3]> {
    Ok(evaluate(s, spin, nd, cfg, t)?.acc)
}

/// Kinetic minus potential energy, including the spin, diamagnetic and
/// gravitational terms that are switched on.
pub fn lagrangian(s: &PhaseState, spin: SpinLabel, nd: &NDParams, cfg: &FieldConfig, t: f64) -> Result<f64> {
    Ok(evaluate(s, spin, nd, cfg, t)?.lagrangian)
}

/// Conservative upper bound on the libration rate reachable within
/// `duration`, from the largest field the ND can reach.
pub fn max_libration_rate(s0: &PhaseState, duration: f64, nd: &NDParams, cfg: &FieldConfig) -> f64 {
    let m = nd.mass();
    let g = cfg.g_xi.hypot(cfg.g_zeta);
    let b_grad = cfg.b_grad.abs();
    let b_start = field_at(s0.x, s0.y, cfg, 0.0);
    let dia = if nd.diamagnetic_enabled {
        nd.chi().abs() / (MU_0 * m) * b_grad * (cfg.b0 + b_start.0.hypot(b_start.1))
    } else {
        0.0
    };
    let acc = nd.nv.mu * b_grad / m + g + dia;
    let reach = s0.x.hypot(s0.y) + s0.vx.hypot(s0.vy) * duration + 0.5 * acc * duration * duration;
    let ramp = match cfg.ramp {
        RampPolicy::Constant => 0.0,
        RampPolicy::Quadratic { a_av, g_xi } => 0.5 * b_grad * (a_av + g_xi).abs() * duration * duration,
    };
    let b_max = cfg.b0 + ramp + b_grad * (reach + 4.0 * nd.nv_distance);
    let rate = (nd.nv.mu * b_max / nd.inertia()).sqrt();
    rate.max(s0.theta_dot.abs())
}

/// Fixed-step RK4 through one constant-spin interval starting at `t0`.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    s0: &PhaseState,
    spin: SpinLabel,
    t0: f64,
    duration: f64,
    nd: &NDParams,
    cfg: &FieldConfig,
    dt: f64,
    record_stride: usize,
) -> Result<Trajectory> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid("duration", "must be >= 0"));
    }
    let mut traj = Trajectory { samples: vec![Sample { t: t0, state: *s0, spin }], segment_actions: vec![] };
    if duration == 0.0 {
        traj.segment_actions.push(0.0);
        return Ok(traj);
    }
    let limit = duration.min(std::f64::consts::TAU / (200.0 * max_libration_rate(s0, duration, nd, cfg)));
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(SgiError::StepSize { dt, limit });
    }
    let n = (duration / dt - 1e-9).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let stride = record_stride.max(1);

    let mut y = s0.to_array();
    let (mut action, mut comp) = (0.0_f64, 0.0_f64);
    let f = |y: &[f64; 6], t: f64| -> Result<([f64; 6], f64)> {
        let st = PhaseState::from_array(*y);
        cfg.bias_checked(t)?;
        let e = evaluate(&st, spin, nd, cfg, t)?;
        Ok(([y[3], y[4], y[5], e.acc[0], e.acc[1], e.acc[2]], e.lagrangian))
    };
    let shifted = |y: &[f64; 6], k: &[f64; 6], c: f64| -> [f64; 6] { std::array::from_fn(|i| y[i] + c * k[i]) };
    for step in 0..n {
        let t = t0 + step as f64 * h;
        let (k1, l1) = f(&y, t)?;
        let (k2, l2) = f(&shifted(&y, &k1, 0.5 * h), t + 0.5 * h)?;
        let (k3, l3) = f(&shifted(&y, &k2, 0.5 * h), t + 0.5 * h)?;
        let (k4, l4) = f(&shifted(&y, &k3, h), t + h)?;
        for i in 0..6 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let ds = h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        let sum = action + ds;
        comp += if action.abs() >= ds.abs() { (action - sum) + ds } else { (ds - sum) + action };
        action = sum;

        let t_next = if step + 1 == n { t0 + duration } else { t + h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SgiError::NonFinite { t: t_next });
        }
        if (step + 1) % stride == 0 || step + 1 == n {
            traj.samples.push(Sample { t: t_next, state: PhaseState::from_array(y), spin });
        }
    }
    traj.segment_actions.push(action + comp);
    Ok(traj)
}

/// Field seen during a delay: gradient off, bias held at its value when the
/// delay starts.
fn delay_field(cfg: &FieldConfig, t: f64) -> FieldConfig {
    FieldConfig { b0: cfg.bias(t), b_grad: 0.0, ramp: RampPolicy::Constant, ..*cfg }
}

/// Runs one arm of the sequence from `s0`.
pub fn run_arm(
    s0: &PhaseState,
    seq: &SequenceConfig,
    arm: Arm,
    nd: &NDParams,
    cfg: &FieldConfig,
    num: &Numerics,
) -> Result<Trajectory> {
    let dt = seq.t_pulse / num.steps_per_pulse as f64;
    let mut traj = Trajectory::default();
    let mut state = *s0;
    let mut t = 0.0;
    for seg in seq.segments(arm) {
        let part = if seg.gradient_on {
            integrate(&state, seg.spin, t, seg.duration, nd, cfg, dt.min(seg.duration), num.record_stride)?
        } else {
            let frozen = delay_field(cfg, t);
            integrate(&state, seg.spin, t, seg.duration, nd, &frozen, dt.min(seg.duration), num.record_stride)?
        };
        state = part.final_state();
        t += seg.duration;
        traj.append(part);
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgiRun {
    pub arm1: Trajectory,
    pub arm2: Trajectory,
    /// (S1 − S2)/ħ [rad]
    pub action_phase: f64,
    /// −(p̄·δr + L̄z·δθ)/ħ [rad]
    pub separation_phase: f64,
    pub delta_phi: f64,
}

impl SgiRun {
    /// Final arm-1 minus arm-2 differences (δx, δy, δθ, δvx, δvy, δθ̇).
    pub fn mismatch(&self) -> [f64; 6] {
        let a = self.arm1.final_state().to_array();
        let b = self.arm2.final_state().to_array();
        std::array::from_fn(|i| a[i] - b[i])
    }
}

pub fn separation_phase(s1: &PhaseState, s2: &PhaseState, nd: &NDParams) -> f64 {
    let (px1, py1, l1) = s1.momenta(nd);
    let (px2, py2, l2) = s2.momenta(nd);
    let p_dot_dr = 0.5 * (px1 + px2) * (s1.x - s2.x) + 0.5 * (py1 + py2) * (s1.y - s2.y);
    let l_dtheta = 0.5 * (l1 + l2) * (s1.theta - s2.theta);
    -(p_dot_dr + l_dtheta) / HBAR
}

/// Both arms from the common initial state `s0` and their phase difference.
pub fn run_sgi(
    s0: &PhaseState,
    seq: &SequenceConfig,
    nd: &NDParams,
    cfg: &FieldConfig,
    num: &Numerics,
) -> Result<SgiRun> {
    seq.validate()?;
    num.validate()?;
    if !s0.is_finite() {
        return Err(invalid("initial state", "must be finite"));
    }
    let arm1 = run_arm(s0, seq, Arm::One, nd, cfg, num)?;
    let arm2 = run_arm(s0, seq, Arm::Two, nd, cfg, num)?;
    let action_phase = (arm1.action() - arm2.action()) / HBAR;
    let separation_phase = separation_phase(&arm1.final_state(), &arm2.final_state(), nd);
    Ok(SgiRun { arm1, arm2, action_phase, separation_phase, delta_phi: action_phase + separation_phase })
}

/// Phase of a strictly 1D interferometer, 2M·δa·T³·(a_av + g_ξ)/ħ.
pub fn phase_1d(delta_a: f64, a_av: f64, g_xi: f64, mass: f64, t_pulse: f64) -> f64 {
    2.0 * mass * delta_a * t_pulse.powi(3) * (a_av + g_xi) / HBAR
}

/// The bias ramp that holds the field at the mean arm position fixed.
pub fn compensating_ramp(seq: &SequenceConfig, nd: &NDParams, cfg: &FieldConfig) -> RampPolicy {
    let (_, a_av) = seq.accelerations(nd, cfg.b_grad);
    RampPolicy::Quadratic { a_av, g_xi: cfg.g_xi }
}
