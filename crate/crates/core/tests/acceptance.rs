//! Acceptance criteria 1 to 7. Prints one verdict line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use sgi_core::angular::{
    ground_state_stats, libration_frequency, phase_uncertainty, phase_uncertainty_gs, semiclassical_coherence_gs,
};
use sgi_core::constants::{GAUSS, GAUSS_PER_NM, GAUSS_PER_UM, HBAR, K_B, NANOMETER};
use sgi_core::experiments::{paths, sweep, Series, SweepRange, SweepRow};
use sgi_core::field::dbpar_dtheta;
use sgi_core::validation::{
    composition_oracle, eigenvalue_oracle, mc_oracle, mismatch_oracle, propagator_oracle, ramp_oracle, torque_oracle,
    OracleReport,
};
use sgi_core::wavepacket::sequence_coherence;
use sgi_core::{
    accelerations, phase_1d, Experiment, NDParams, PhaseState, Scenario, SequenceConfig, SpinLabel, SweepSpec, SweepVar,
};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, msg: String) {
        self.lines.push(format!("     {msg}"));
    }

    fn oracle(&mut self, r: &OracleReport) {
        self.check(r.pass, format!("{}: {:.3e} (tol {:.0e}) {}", r.name, r.observed, r.tolerance, r.detail));
    }

    fn rel(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs();
        self.check(
            err <= tol,
            format!("{what} = {got:.4e}, expected {want:.4e} ({:.2}% vs {:.0}%)", 100.0 * err, 100.0 * tol),
        );
    }
}

fn curves(rows: &[SweepRow], n_series: usize) -> Vec<Vec<(f64, Vec<f64>)>> {
    let per = rows.len() / n_series;
    rows.chunks(per)
        .map(|c| c.iter().map(|r| (r.value, r.outputs.clone().unwrap_or_else(|e| panic!("{e}")))).collect())
        .collect()
}

fn nondecreasing(v: &[f64]) -> Option<usize> {
    v.windows(2).position(|w| w[1] < w[0] * (1.0 - 1e-12))
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    let nd = NDParams::default();
    let m = nd.mass();
    v.rel("M [kg]", m, 2.3e-19, 0.02);
    let a = nd.nv.mu * 198.0 * GAUSS_PER_UM / m;
    v.rel("|a| at B' = 198 G/um [m/s^2]", a, 1.6, 0.02);
    let w = libration_frequency(10.0 * GAUSS, &nd).unwrap();
    v.rel("omega/2pi at 10 G [Hz]", w / (2.0 * PI), 2.86e3, 0.01);
    let gs = ground_state_stats(w, &nd).unwrap();
    v.rel("ground-state dtheta [rad]", gs.d_theta, 7e-3, 0.03);
    v.rel("ground-state dtheta_dot [rad/s]", gs.d_theta_dot, 128.0, 0.02);
    v.rel("hbar omega / 2 kB [K]", HBAR * w / (2.0 * K_B), 70e-9, 0.03);
    let dia = NDParams { diamagnetic_enabled: true, ..nd };
    let cfg =
        sgi_core::FieldConfig { b0: 10.0 * GAUSS, theta0: 0.0, b_grad: 198.0 * GAUSS_PER_UM, ..Default::default() };
    let acc = accelerations(&PhaseState::default(), SpinLabel::Zero, &dia, &cfg, 0.0).unwrap();
    v.rel("diamagnetic a/B [m/s^2/G]", acc[0].hypot(acc[1]) / 10.0, 0.01, 0.10);
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    for r in [
        eigenvalue_oracle(100),
        propagator_oracle(),
        mismatch_oracle(),
        composition_oracle(2000, SEED),
        torque_oracle(dbpar_dtheta, 2000, SEED),
    ] {
        v.oracle(&r);
    }
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let mut reference: Option<Vec<f64>> = None;
    for d in [0.0, 1.0, 2.0, 3.0] {
        let mut scn = Scenario::test_case();
        scn.nd.nv_distance = d * NANOMETER;
        let run = scn.run(0.0, 0.0).unwrap();
        let rows = paths(&run, &scn);
        let xi_max = rows.iter().map(|r| r.xi.abs()).fold(0.0, f64::max);
        let zeta_max = rows.iter().map(|r| r.zeta.abs()).fold(0.0, f64::max);
        v.check(
            zeta_max < 1e-3 * xi_max,
            format!("d = {d} nm: |zeta|max / |xi|max = {:.2e} (< 1e-3)", zeta_max / xi_max),
        );
        let xi: Vec<f64> = rows.iter().map(|r| r.xi).collect();
        match &reference {
            None => reference = Some(xi),
            Some(x0) => {
                let dev = xi.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / xi_max;
                v.check(dev < 1e-6, format!("d = {d} nm: max |xi - xi(d=0)| / |xi|max = {dev:.2e} (< 1e-6)"));
            }
        }
    }

    let exp = Experiment::Fig4;
    let spec = exp.default_sweep();
    let step = (spec.range.max - spec.range.min) / (spec.range.n_points - 1) as f64;
    let series: Vec<Series> =
        [0.0, 1.0, 2.0, 3.0].iter().map(|d| vec![(SweepVar::NvDistance, d * NANOMETER)]).collect();
    let rows = sweep(&exp.base(), exp, &spec, &series).unwrap();
    let alpha = exp.base().nd.nv_angle;
    for (d, curve) in [0.0, 1.0, 2.0, 3.0].iter().zip(curves(&rows, series.len())) {
        let spread: Vec<f64> = curve.iter().map(|(_, o)| o[0]).collect();
        let (imin, lo) =
            spread.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &x)| if x < b.1 { (i, x) } else { b });
        let hi = spread.iter().cloned().fold(0.0, f64::max);
        if *d == 0.0 {
            v.check(
                (hi - lo) <= 1e-6 * hi,
                format!("d = 0: dphi(theta0) flat, (max - min)/max = {:.2e}, argmin undefined", (hi - lo) / hi),
            );
            continue;
        }
        let at = curve[imin].0;
        let ok = [alpha / 2.0, -alpha / 2.0].iter().any(|t| (at - t).abs() <= 0.5 * step + 1e-12);
        v.check(ok, format!("d = {d} nm: argmin theta0 = {at:.5} rad (alpha/2 = {:.5}), dphi = {lo:.4e}", alpha / 2.0));
        let i_neg = curve.iter().position(|(t, _)| (t + alpha / 2.0).abs() < 0.5 * step).unwrap();
        let imax = spread.iter().enumerate().fold(0, |b, (i, &x)| if x > spread[b] { i } else { b });
        v.note(format!(
            "d = {d} nm: dphi(-alpha/2) = {:.4e}, maximum {:.4e} at theta0 = {:.5} rad",
            spread[i_neg], spread[imax], curve[imax].0
        ));
    }

    let mut mirrored = exp.base();
    mirrored.nd.nv_angle = -alpha;
    mirrored.field.theta0 = -alpha / 2.0;
    let rows = sweep(&mirrored, exp, &spec, &[vec![(SweepVar::NvDistance, 3.0 * NANOMETER)]]).unwrap();
    let best = rows.iter().map(|r| (r.value, r.outputs.as_ref().unwrap()[0])).fold((0.0, f64::INFINITY), |b, x| {
        if x.1 < b.1 {
            x
        } else {
            b
        }
    });
    v.check(
        (best.0 + alpha / 2.0).abs() <= 0.5 * step + 1e-12,
        format!("mirrored ND (alpha -> -alpha), d = 3 nm: argmin theta0 = {:.5} rad", best.0),
    );
    v
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new();
    let nd = NDParams::default();
    let inertia = nd.inertia();
    let w = libration_frequency(10.0 * GAUSS, &nd).unwrap();
    let wave = |u: f64, omega: f64| {
        sequence_coherence(&SequenceConfig::asymmetric(u / omega), omega, inertia, 8000).unwrap().c_theta
    };
    let du = 0.05;
    for n in 1..=4 {
        let u = n as f64 * PI;
        let c = semiclassical_coherence_gs(u);
        let (l, r) = (semiclassical_coherence_gs(u - du), semiclassical_coherence_gs(u + du));
        v.check(
            (1.0 - c).abs() < 1e-12 && c > l && c > r,
            format!("semiclassical n = {n}: C = {c:.15}, neighbours {l:.6} / {r:.6}"),
        );
        let c = wave(u, w);
        let (l, r) = (wave(u - du, w), wave(u + du, w));
        v.check(c > l && c > r, format!("wavepacket n = {n}: C = {c:.9}, neighbours {l:.6} / {r:.6}"));
    }
    let w2 = libration_frequency(40.0 * GAUSS, &nd).unwrap();
    let probe = |u: f64, omega: f64| sequence_coherence(&SequenceConfig::asymmetric(u / omega), omega, inertia, 8000);
    let mut used = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=40 {
        let u = 0.1 * PI * k as f64 + 0.013;
        // Skips points where a packet outgrows the small-angle overlap.
        if let (Ok(a), Ok(b)) = (probe(u, w), probe(u, w2)) {
            worst = worst.max((a.c_theta - b.c_theta).abs());
            used.push(u);
        }
    }
    v.check(
        worst < 1e-6 && used.len() >= 20,
        format!(
            "wavepacket C at equal omegaT, omega doubled: max |dC| = {worst:.2e} (< 1e-6) over {} points in (0, 4pi]",
            used.len()
        ),
    );
    v
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new();
    v.oracle(&mc_oracle(20, 1_000_000, SEED));
    v.oracle(&ramp_oracle());
    let nd = NDParams::default();
    let w = libration_frequency(10.0 * GAUSS, &nd).unwrap();
    let gs = ground_state_stats(w, &nd).unwrap();
    let worst = (1..=4)
        .map(|n| {
            let u = n as f64 * PI;
            phase_uncertainty_gs(u).abs().max(phase_uncertainty(&gs, w, u / w, &nd).abs())
        })
        .fold(0.0, f64::max);
    v.check(worst < 1e-12, format!("dphi(omegaT = n pi), n = 1..4: max {worst:.2e} rad"));
    v
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new();
    let exp = Experiment::Fig10;
    let base = exp.base();
    let spec =
        SweepSpec { variable: SweepVar::BGrad, range: SweepRange::linear(0.02 * GAUSS_PER_NM, 1.0 * GAUSS_PER_NM, 50) };
    let cases: Vec<(f64, f64)> = [0.0, 3.0].iter().flat_map(|&d| [0.0, 4.9, -4.9, 9.8, -9.8].map(|g| (d, g))).collect();
    let series: Vec<Series> =
        cases.iter().map(|&(d, g)| vec![(SweepVar::NvDistance, d * NANOMETER), (SweepVar::GXi, g)]).collect();
    let rows = sweep(&base, exp, &spec, &series).unwrap();
    let t = base.sequence.t_pulse;
    v.note(format!("symmetric |->/|+> sequence, T = {:.0} us, B0 = {:.0} G", t * 1e6, base.field.b0 / GAUSS));

    let mut small_ok = true;
    let mut found = None;
    for (&(d, g), curve) in cases.iter().zip(curves(&rows, series.len())) {
        let small: Vec<f64> =
            curve.iter().filter(|(b, _)| *b <= 0.2 * GAUSS_PER_NM * (1.0 + 1e-9)).map(|(_, o)| o[0]).collect();
        let worst_small = small.iter().cloned().fold(0.0, f64::max);
        small_ok &= worst_small < 1.0;
        let spread: Vec<f64> = curve.iter().map(|(_, o)| o[0]).collect();
        let minima: Vec<usize> = (1..spread.len() - 1)
            .filter(|&i| curve[i].0 > 0.2 * GAUSS_PER_NM && spread[i] < spread[i - 1] && spread[i] <= spread[i + 1])
            .collect();
        let describe = |i: usize| {
            let b = curve[i].0;
            let (da, a_av) = base.sequence.accelerations(&base.nd, b);
            let p1d = phase_1d(da, a_av, g, base.nd.mass(), t);
            (b / GAUSS_PER_NM, spread[i], p1d)
        };
        let summary: Vec<String> = minima
            .iter()
            .map(|&i| describe(i))
            .map(|(b, s, p)| format!("B'={b:.2} G/nm dphi={s:.3} phi1D={p:.2e}"))
            .collect();
        v.note(format!(
            "d = {d} nm, g_xi = {g:+}: max dphi(B' <= 0.2 G/nm) = {worst_small:.3}, dphi(1 G/nm) = {:.3e}, interior minima above 0.2 G/nm: [{}]",
            spread.last().unwrap(),
            summary.join("; ")
        ));
        for &i in &minima {
            let (b, s, p) = describe(i);
            if (0.125..=0.375).contains(&s) && (1e3..=1.6e4).contains(&p.abs()) {
                found.get_or_insert((d, g, b, s, p));
            }
        }
    }
    v.check(small_ok, "dphi < 1 rad for all B' <= 0.2 G/nm".into());
    match found {
        Some((d, g, b, s, p)) => v.check(
            true,
            format!("nonmonotonic minimum: d = {d} nm, g_xi = {g}, B' = {b:.2} G/nm, dphi = {s:.3}, phi1D = {p:.2e}"),
        ),
        None => v.check(
            false,
            "no local minimum above 0.2 G/nm with dphi in [0.125, 0.375] rad and |phi1D| in [1e3, 1.6e4] rad".into(),
        ),
    }
    v
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    let monotone = |v: &mut Verdict, exp: Experiment, what: &str| {
        let spec = exp.default_sweep();
        let series = exp.default_series();
        let rows = sweep(&exp.base(), exp, &spec, &series).unwrap();
        let cs = curves(&rows, series.len());
        for (s, c) in series.iter().zip(&cs) {
            let y: Vec<f64> = c.iter().map(|(_, o)| o[0]).collect();
            let bad = nondecreasing(&y);
            v.check(
                bad.is_none(),
                format!(
                    "{}: dphi nondecreasing in {what} at B' = {:.2} G/nm ({:.3e} .. {:.3e}){}",
                    exp.name(),
                    s[0].1 / GAUSS_PER_NM,
                    y[0],
                    y[y.len() - 1],
                    bad.map(|i| format!(", drops after point {i}")).unwrap_or_default()
                ),
            );
        }
        let mut bad = 0;
        for i in 0..cs[0].len() {
            let y: Vec<f64> = cs.iter().map(|c| c[i].1[0]).collect();
            bad += usize::from(nondecreasing(&y).is_some());
        }
        v.check(bad == 0, format!("{}: dphi nondecreasing in B' at every {what} ({bad} violations)", exp.name()));
    };
    monotone(&mut v, Experiment::Fig7, "B0");
    monotone(&mut v, Experiment::Fig8, "g_xi");

    let exp = Experiment::Fig9;
    let spec = exp.default_sweep();
    let series = exp.default_series();
    let rows = sweep(&exp.base(), exp, &spec, &series).unwrap();
    let per = rows.len() / series.len();
    for (s, chunk) in series.iter().zip(rows.chunks(per)) {
        // Points where the ramp would drive the bias through zero have no
        // ramped curve; they are counted, not compared.
        let valid: Vec<&Vec<f64>> = chunk.iter().filter_map(|r| r.outputs.as_ref().ok()).collect();
        let worst = valid.iter().map(|o| o[0] - o[1]).fold(f64::NEG_INFINITY, f64::max);
        v.check(
            !valid.is_empty() && worst <= 0.0,
            format!(
                "fig9 d = {:.0} nm, B' = {:.2} G/nm: max(ramped - unramped) = {worst:.3e} rad over {} realizable points (must be <= 0), {} points past bias exhaustion",
                s[0].1 / NANOMETER,
                s[1].1 / GAUSS_PER_NM,
                valid.len(),
                chunk.len() - valid.len()
            ),
        );
    }
    v
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (1, "test-case consistency", criterion_1),
        (2, "oracle equivalence", criterion_2),
        (3, "preparation theorem", criterion_3),
        (4, "coherence structure", criterion_4),
        (5, "phase machinery", criterion_5),
        (6, "symmetric configuration", criterion_6),
        (7, "figure properties", criterion_7),
    ];
    let mut all = true;
    for (n, name, f) in criteria {
        let t0 = Instant::now();
        let v = f();
        for l in &v.lines {
            println!("    {l}");
        }
        println!(
            "criterion {n}: {} ({name}, {:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        all &= v.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
