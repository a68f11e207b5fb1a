use std::f64::consts::{PI, TAU};

use sgi_core::constants::*;
use sgi_core::wavepacket::*;
use sgi_core::*;

fn inertia() -> f64 {
    NDParams::default().inertia()
}

#[test]
fn ground_state_is_stationary() {
    let w = 1.8e4;
    let w0 = AngularWavepacket::ground(w, inertia()).unwrap();
    let sched = OmegaSchedule { pieces: vec![(10.0 * TAU / w, w * w)] };
    let tr = evolve_sigma_theta(&w0, &sched, 10.0 * TAU / w, TAU / w / 400.0, inertia()).unwrap();
    for s in &tr {
        assert!((s.packet.sigma_theta / w0.sigma_theta - 1.0).abs() < 1e-8);
    }
}

#[test]
fn free_spreading_matches_closed_form() {
    let w0 = AngularWavepacket::ground(1.8e4, inertia()).unwrap();
    let s0 = w0.sigma_theta;
    let sched = OmegaSchedule { pieces: vec![(1e-3, 0.0)] };
    let tr = evolve_sigma_theta(&w0, &sched, 1e-3, 1e-7, inertia()).unwrap();
    for s in tr.iter().step_by(500) {
        let tau = HBAR * s.t / (2.0 * inertia() * s0 * s0);
        let exact = s0 * (1.0 + tau * tau).sqrt();
        assert!((s.packet.sigma_theta / exact - 1.0).abs() < 1e-9);
    }
}

#[test]
fn chirp_is_consistent() {
    let w = AngularWavepacket::new(3e-3, 5.0, inertia()).unwrap();
    assert!((w.alpha_theta - inertia() / HBAR * 5.0 / 3e-3).abs() <= 1e-12 * w.alpha_theta.abs());
    assert!(AngularWavepacket::new(0.0, 0.0, inertia()).is_err());
}

#[test]
fn overlap_examples() {
    let i = inertia();
    let w1 = AngularWavepacket::new(1e-3, 0.0, i).unwrap();
    assert!((overlap_coherence(&w1, &w1).unwrap().c_theta - 1.0).abs() < 1e-15);
    let w2 = AngularWavepacket::new(2e-3, 0.0, i).unwrap();
    let c = overlap_coherence(&w1, &w2).unwrap().c_theta;
    assert!((c - 1.25f64.powf(-0.5)).abs() < 1e-14);
    let wide = AngularWavepacket::new(0.5, 0.0, i).unwrap();
    assert!(matches!(overlap_coherence(&w1, &wide), Err(SgiError::WavepacketTooWide { .. })));
}

#[test]
fn coherence_peaks_at_multiples_of_pi() {
    let t = 25e-6;
    let seq = SequenceConfig::asymmetric(t);
    let c = |u: f64, steps| sequence_coherence(&seq, u / t, inertia(), steps).unwrap().c_theta;
    for n in 1..=3 {
        let u = n as f64 * PI;
        let peak = c(u, 8000);
        assert!(c(u - 0.05, 8000) < peak && c(u + 0.05, 8000) < peak);
        // the |+> arm amplifies step error by cosh(nπ); the deficit must
        // shrink as h⁸ (squared RK4 width error) towards exactly 1
        let coarse = 1.0 - c(u, 4000);
        let fine = 1.0 - peak;
        assert!(fine.abs() < 1e-5 && (fine.abs() < 1e-12 || coarse / fine > 100.0), "n={n}: {coarse} {fine}");
    }
    assert!((1.0 - c(PI, 8000)).abs() < 1e-10);
}

/// Second moments (⟨θ²⟩, ⟨θθ̇⟩ symmetrized, ⟨θ̇²⟩) of a Gaussian are carried
/// exactly by the classical flow of each constant-ω² piece.
fn exact_width(w0: &AngularWavepacket, pieces: &[(f64, f64)], i: f64) -> f64 {
    let s = w0.sigma_theta;
    let v = w0.sigma_dot;
    let (mut x, mut c, mut p) = (s * s, s * v, v * v + HBAR * HBAR / (4.0 * i * i * s * s));
    for &(t, w2) in pieces {
        // θ(t) = a θ0 + b θ̇0, θ̇(t) = a' θ0 + b' θ̇0
        let (a, b, da, db) = if w2 > 0.0 {
            let w = w2.sqrt();
            ((w * t).cos(), (w * t).sin() / w, -w * (w * t).sin(), (w * t).cos())
        } else if w2 < 0.0 {
            let w = (-w2).sqrt();
            ((w * t).cosh(), (w * t).sinh() / w, w * (w * t).sinh(), (w * t).cosh())
        } else {
            (1.0, t, 0.0, 1.0)
        };
        (x, c, p) = (
            a * a * x + 2.0 * a * b * c + b * b * p,
            a * da * x + (a * db + b * da) * c + b * db * p,
            da * da * x + 2.0 * da * db * c + db * db * p,
        );
    }
    x.sqrt()
}

#[test]
fn large_omega_t_widths_match_exact_moments() {
    let i = inertia();
    let t = 25e-6;
    let seq = SequenceConfig::asymmetric(t);
    for u in [7.9, 10.0, 4.0 * PI] {
        let w = u / t;
        let w0 = AngularWavepacket::ground(w, i).unwrap();
        for arm in [Arm::One, Arm::Two] {
            let sched = OmegaSchedule::for_arm(&seq, arm, w);
            let tr = evolve_sigma_theta(&w0, &sched, seq.total_duration(), t / 2000.0, i).unwrap();
            let got = tr.last().unwrap().packet.sigma_theta;
            let exact = exact_width(&w0, &sched.pieces, i);
            assert!((got / exact - 1.0).abs() < 1e-8, "wT={u} {arm:?}: {got} vs {exact}");
        }
    }
}

#[test]
fn coherence_depends_only_on_omega_t() {
    let base = sequence_coherence(&SequenceConfig::asymmetric(25e-6), 1.0 / 25e-6, inertia(), 1000).unwrap();
    for k in [0.5, 3.0] {
        let seq = SequenceConfig::asymmetric(k * 25e-6);
        let c = sequence_coherence(&seq, 1.0 / (k * 25e-6), inertia(), 1000).unwrap();
        assert!((c.c_theta - base.c_theta).abs() < 1e-6);
    }
}

#[test]
fn com_widths_decouple_without_drive() {
    let nd = NDParams::default();
    let m = nd.mass();
    let s0 = 1e-9;
    let w0 = CoMWavepacket { sigma_x: s0, sigma_y: 2.0 * s0, sigma_x_dot: 0.0, sigma_y_dot: 0.0 };
    let hist = [WidthSample { t: 0.0, packet: AngularWavepacket::new(7e-3, 0.0, nd.inertia()).unwrap() }];
    let free = |s: f64, t: f64| s * (1.0 + (HBAR * t / (2.0 * m * s * s)).powi(2)).sqrt();
    let cfg0 = FieldConfig { b_grad: 0.0, ..FieldConfig::default() };
    let tr = evolve_sigma_cm(&w0, SpinLabel::Minus, 0.4, &hist, &nd, &cfg0, 1e-4, 1e-7).unwrap();
    let last = tr.last().unwrap();
    assert!((last.packet.sigma_x / free(s0, 1e-4) - 1.0).abs() < 1e-10);
    assert!((last.packet.sigma_y / free(2.0 * s0, 1e-4) - 1.0).abs() < 1e-10);

    let zero_hist =
        [WidthSample { t: 0.0, packet: AngularWavepacket { sigma_theta: 0.0, sigma_dot: 0.0, alpha_theta: 0.0 } }];
    let cfg = FieldConfig { b_grad: 0.2 * GAUSS_PER_NM, ..FieldConfig::default() };
    let tr2 = evolve_sigma_cm(&w0, SpinLabel::Minus, 0.4, &zero_hist, &nd, &cfg, 1e-4, 1e-7).unwrap();
    assert_eq!(tr2.last().unwrap().packet, last.packet);
}

#[test]
fn com_widths_grow_under_drive() {
    let nd = NDParams::default();
    let cfg = FieldConfig { b_grad: 0.2 * GAUSS_PER_NM, ..FieldConfig::default() };
    let w0 = CoMWavepacket { sigma_x: 1e-9, sigma_y: 1e-9, sigma_x_dot: 0.0, sigma_y_dot: 0.0 };
    let hist = [WidthSample { t: 0.0, packet: AngularWavepacket::new(7e-3, 0.0, nd.inertia()).unwrap() }];
    let tr = evolve_sigma_cm(&w0, SpinLabel::Minus, cfg.theta0, &hist, &nd, &cfg, 25e-6, 1e-8).unwrap();
    for w in tr.windows(2) {
        assert!(w[1].packet.sigma_x >= w[0].packet.sigma_x && w[1].packet.sigma_y >= w[0].packet.sigma_y);
    }
    assert!(com_overlap(&w0, &tr.last().unwrap().packet, nd.mass()) < 1.0);
    assert!((com_overlap(&w0, &w0, nd.mass()) - 1.0).abs() < 1e-15);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_bounded(
            s1 in 1e-4f64..0.3, s2 in 1e-4f64..0.3, d1 in -1e3f64..1e3, d2 in -1e3f64..1e3,
        ) {
            let i = inertia();
            let w1 = AngularWavepacket::new(s1, d1, i).unwrap();
            let w2 = AngularWavepacket::new(s2, d2, i).unwrap();
            let a = overlap_coherence(&w1, &w2).unwrap().c_theta;
            let b = overlap_coherence(&w2, &w1).unwrap().c_theta;
            prop_assert_eq!(a, b);
            prop_assert!(a > 0.0 && a <= 1.0);
        }
    }
}
