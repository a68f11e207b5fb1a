//! Built-in oracle suite: each check compares a closed form against an
//! independent computation and reports the worst deviation seen.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angular::{
    arm_matrices, composed_angular_phase, evolution_matrix, ground_state_stats, mismatch_coeffs, phase_uncertainty,
    phase_uncertainty_mc, printed, Propagator,
};
use crate::constants::{GAUSS, GAUSS_PER_NM, NANOMETER};
use crate::dynamics::{compensating_ramp, integrate, run_sgi, Numerics, PhaseState, SequenceConfig};
use crate::field::{b_parallel_at_nv, dbpar_dtheta, FieldConfig, NDParams, Pose};
use crate::nv_spin::{adiabatic_energies, exact_hamiltonian_eigvals, local_field_components, SpinLabel};

/// Signature of the angular derivative under test; swapped in the mutation
/// test.
pub type TorqueFn = fn(&Pose, &NDParams, &FieldConfig, f64) -> f64;

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub quick: bool,
    pub seed: u64,
    pub torque: TorqueFn,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { quick: false, seed: 20_240_601, torque: dbpar_dtheta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: &'static str,
    pub tolerance: f64,
    /// Worst deviation in the units the tolerance is stated in.
    pub observed: f64,
    pub pass: bool,
    /// Reported but not part of the pass/fail verdict.
    pub informational: bool,
    pub detail: String,
}

impl OracleReport {
    fn check(name: &'static str, tolerance: f64, observed: f64, detail: String) -> Self {
        Self {
            name,
            tolerance,
            observed,
            pass: observed.is_finite() && observed < tolerance,
            informational: false,
            detail,
        }
    }
}

pub fn all_pass(reports: &[OracleReport]) -> bool {
    reports.iter().all(|r| r.pass || r.informational)
}

pub fn run_oracles(opts: &ValidationOptions) -> Vec<OracleReport> {
    let (torque_n, draws, samples) = if opts.quick { (200, 5, 100_000) } else { (2000, 20, 1_000_000) };
    vec![
        eigenvalue_oracle(100),
        propagator_oracle(),
        mismatch_oracle(),
        composition_oracle(200, opts.seed),
        torque_oracle(opts.torque, torque_n, opts.seed),
        mc_oracle(draws, samples, opts.seed),
        ramp_oracle(),
        printed_form_discrepancy(),
    ]
}

/// Adiabatic |±⟩, |0⟩ energies against the 3×3 eigenvalues on an
/// |B| × direction grid with |B| ≤ 10 G.
pub fn eigenvalue_oracle(n: usize) -> OracleReport {
    let nd = NDParams::default();
    let nv = &nd.nv;
    let mut worst: f64 = 0.0;
    let mut failure = String::new();
    for i in 0..n {
        let b = 10.0 * GAUSS * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let ang = TAU * j as f64 / n as f64;
            let f = local_field_components(b * ang.cos(), b * ang.sin(), 0.0);
            match adiabatic_energies(&f, nv) {
                Ok(lv) => {
                    let ev = exact_hamiltonian_eigvals(&f, nv);
                    for (a, e) in [(lv.e_zero(nv), ev[0]), (lv.e_minus, ev[1]), (lv.e_plus, ev[2])] {
                        worst = worst.max((a - e).abs() / e.abs());
                    }
                }
                Err(e) => failure = e.to_string(),
            }
        }
    }
    if !failure.is_empty() {
        worst = f64::INFINITY;
    }
    OracleReport::check(
        "adiabatic energies vs exact 3x3 diagonalization",
        1e-3,
        worst,
        format!("{n}x{n} grid, |B| <= 10 G, max relative error{failure}"),
    )
}

fn scaled_diff(a: &Propagator, b: &Propagator, omega: f64) -> f64 {
    let d = a - b;
    let s = [d[(0, 0)], d[(0, 1)] * omega, d[(1, 0)] / omega, d[(1, 1)]];
    let n = [b[(0, 0)], b[(0, 1)] * omega, b[(1, 0)] / omega, b[(1, 1)]];
    s.iter().map(|v| v * v).sum::<f64>().sqrt() / n.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// U0 and U− against the full dynamics started from small basis offsets.
pub fn propagator_oracle() -> OracleReport {
    let nd = NDParams { nv_distance: 0.0, ..NDParams::default() };
    // equilibrium at θ = 0 so the 1e-6 rad offsets are not lost to roundoff
    let cfg = FieldConfig { b0: 10.0 * GAUSS, theta0: nd.nv_angle, b_grad: 0.0, ..FieldConfig::default() };
    let omega = (nd.nv.mu * cfg.b0 / nd.inertia()).sqrt();
    let amp = 1e-6;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for spin in [SpinLabel::Minus, SpinLabel::Zero] {
        for u in [0.7, 2.3, 5.0] {
            let t = u / omega;
            let column = |dtheta: f64, dtheta_dot: f64| -> Option<[f64; 2]> {
                let s0 = PhaseState::prepared(cfg.theta0, &nd, dtheta, dtheta_dot);
                let tr = integrate(&s0, spin, 0.0, t, &nd, &cfg, t / 4000.0, usize::MAX).ok()?;
                let s = tr.final_state();
                Some([s.theta + nd.nv_angle - cfg.theta0, s.theta_dot])
            };
            let (Some(c0), Some(c1)) = (column(amp, 0.0), column(0.0, amp * omega)) else {
                worst = f64::INFINITY;
                detail = format!("integration failed for {spin} at wt={u}");
                continue;
            };
            let num = Propagator::new(c0[0] / amp, c1[0] / (amp * omega), c0[1] / amp, c1[1] / (amp * omega));
            worst = worst.max(scaled_diff(&num, &evolution_matrix(spin, t, omega), omega));
        }
    }
    if detail.is_empty() {
        detail = "|-> and |0> at wt in {0.7, 2.3, 5.0}, RK4 with 4000 steps".into();
    }
    OracleReport::check("analytic propagators vs numerical integration", 1e-8, worst, detail)
}

/// a(ωT), b(ωT) against the entries of U1 − U2.
pub fn mismatch_oracle() -> OracleReport {
    let omega = 1.8e4;
    let mut worst: f64 = 0.0;
    for k in 1..=200 {
        let u = 4.0 * PI * k as f64 / 200.0;
        let (u1, u2) = arm_matrices(u / omega, omega);
        let d = u1 - u2;
        let (a, b) = mismatch_coeffs(u);
        let scale = 1.0 + a.abs().max(b.abs());
        worst = worst
            .max((d[(0, 1)] * omega - a).abs() / scale)
            .max((d[(1, 0)] / omega - b).abs() / scale)
            .max(d[(0, 0)].abs() / scale)
            .max((d[(1, 1)]).abs() / scale);
    }
    OracleReport::check(
        "mismatch coefficients vs propagator products",
        1e-12,
        worst,
        "wT in (0, 4pi], 200 points".into(),
    )
}

/// Closed-form angular phase against the sum of per-segment phases plus
/// the separation phase.
pub fn composition_oracle(n: usize, seed: u64) -> OracleReport {
    let nd = NDParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let omega = rng.random_range(1e3..1e5);
        let t = rng.random_range(0.05..4.0 * PI) / omega;
        let th = rng.random_range(-0.02..0.02);
        let thd = rng.random_range(-500.0..500.0);
        let c = composed_angular_phase(th, thd, omega, t, &nd);
        let a = crate::angular::angular_phase(th, thd, omega, t, &nd);
        let scale = c.arm1.iter().chain(&c.arm2).map(|v| v.abs()).sum::<f64>() + c.separation.abs();
        worst = worst.max((a - c.total).abs() / scale.max(f64::MIN_POSITIVE));
    }
    OracleReport::check("angular phase vs composed segment phases", 1e-10, worst, format!("{n} random draws"))
}

/// Angular derivative of the axial field against a central difference of
/// b_parallel_at_nv with step 1e-6 rad.
pub fn torque_oracle(torque: TorqueFn, n: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let nd = NDParams {
            nv_distance: rng.random_range(0.0..5.0) * NANOMETER,
            nv_angle: rng.random_range(-PI..PI),
            ..NDParams::default()
        };
        let cfg = FieldConfig {
            b0: rng.random_range(1.0..20.0) * GAUSS,
            theta0: rng.random_range(-PI..PI),
            b_grad: rng.random_range(0.0..1.0) * GAUSS_PER_NM,
            ..FieldConfig::default()
        };
        let p = Pose {
            x: rng.random_range(-100.0..100.0) * NANOMETER,
            y: rng.random_range(-100.0..100.0) * NANOMETER,
            theta: rng.random_range(-PI..PI),
        };
        let at = |th: f64| b_parallel_at_nv(&Pose { theta: th, ..p }, &nd, &cfg, 0.0);
        let fd = (at(p.theta + h) - at(p.theta - h)) / (2.0 * h);
        let an = torque(&p, &nd, &cfg, 0.0);
        let scale = fd.abs().max(1e-3 * cfg.b0);
        worst = worst.max((an - fd).abs() / scale);
    }
    OracleReport::check("dB_par/dtheta vs finite differences", 1e-6, worst, format!("{n} random poses"))
}

/// Ground-state Δφ closed form against Monte Carlo over random (ω, T):
/// the observed value is the worst |difference| in standard errors.
pub fn mc_oracle(draws: usize, samples: usize, seed: u64) -> OracleReport {
    let nd = NDParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c);
    let mut worst: f64 = 0.0;
    let mut detail = format!("{draws} draws of (omega, T), N = {samples}");
    for k in 0..draws {
        let omega = rng.random_range(5e3..5e4);
        let mut u = rng.random_range(0.1..3.0 * PI);
        if (u / PI - (u / PI).round()).abs() < 0.05 {
            u += 0.2;
        }
        let t = u / omega;
        let stats = match ground_state_stats(omega, &nd) {
            Ok(s) => s,
            Err(e) => {
                return OracleReport::check(
                    "ground-state phase spread vs Monte Carlo",
                    3.0,
                    f64::INFINITY,
                    e.to_string(),
                )
            }
        };
        let closed = phase_uncertainty(&stats, omega, t, &nd);
        match phase_uncertainty_mc(&stats, omega, t, &nd, samples, seed.wrapping_add(k as u64)) {
            Ok(mc) => worst = worst.max((mc.rms - closed).abs() / mc.stderr),
            Err(e) => {
                worst = f64::INFINITY;
                detail = e.to_string();
            }
        }
    }
    OracleReport::check("ground-state phase spread vs Monte Carlo", 3.0, worst, detail)
}

/// The quadratic bias ramp cancels δφ under ideal preparation.
pub fn ramp_oracle() -> OracleReport {
    let nd = NDParams::default();
    let mut cfg = FieldConfig { theta0: nd.nv_angle / 2.0, g_xi: 3.0, ..FieldConfig::default() };
    let seq = SequenceConfig::default();
    cfg.ramp = compensating_ramp(&seq, &nd, &cfg);
    let s0 = PhaseState::prepared(cfg.theta0, &nd, 0.0, 0.0);
    let observed = run_sgi(&s0, &seq, &nd, &cfg, &Numerics { steps_per_pulse: 2000, record_stride: usize::MAX })
        .map_or(f64::INFINITY, |r| r.delta_phi.abs());
    OracleReport::check("quadratic ramp cancels the 1D phase [rad]", 1e-6, observed, "test case, g_xi = 3 m/s^2".into())
}

/// How far the printed angular-phase prefactors sit from the composed
/// segment phases; informational.
pub fn printed_form_discrepancy() -> OracleReport {
    let nd = NDParams::default();
    let omega = 1.8e4;
    let t = 25e-6;
    let (th, thd) = (5e-3, 100.0);
    let composed = composed_angular_phase(th, thd, omega, t, &nd).total;
    let printed = printed::angular_phase(th, thd, omega, t, &nd);
    let rel = (printed - composed).abs() / composed.abs();
    OracleReport {
        name: "printed angular-phase prefactors vs composed segment phases",
        tolerance: 1e-10,
        observed: rel,
        pass: rel < 1e-10,
        informational: true,
        detail: "prefactors differ by powers of wT; the composed form is used".into(),
    }
}
