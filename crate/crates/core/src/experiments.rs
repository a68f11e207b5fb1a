//! Scenarios, numeric phase spread and the named experiments behind each
//! figure-style data table.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{
    ground_state_stats, initial_nv_field, libration_frequency, phase_uncertainty, phase_uncertainty_gs,
    semiclassical_coherence_gs, thermal_stats, AngularStats,
};
use crate::constants::{GAUSS, GAUSS_PER_NM, NANOMETER};
use crate::dynamics::{compensating_ramp, run_sgi, Numerics, PhaseState, SequenceConfig, SgiRun};
use crate::error::{invalid, Result, SgiError};
use crate::field::{to_xi_zeta, FieldConfig, NDParams, RampPolicy};
use crate::wavepacket::sequence_coherence;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationalState {
    #[default]
    GroundState,
    Thermal {
        t_theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampMode {
    #[default]
    Constant,
    /// Quadratic ramp recomputed from the current sequence and field.
    Compensating,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Preparation {
    pub rotational: RotationalState,
    /// θ′(0) − θ0 [rad]
    pub theta_offset: f64,
    /// θ̇(0) [rad/s]
    pub theta_dot_offset: f64,
}

/// Everything needed to run and analyse one interferometer shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nd: NDParams,
    pub field: FieldConfig,
    pub ramp: RampMode,
    pub sequence: SequenceConfig,
    pub numerics: Numerics,
    pub preparation: Preparation,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::test_case()
    }
}

impl Scenario {
    /// R = 25 nm, d = 1 nm, α = π/4, B0 = 10 G at θ0 = α/2, B′ = 0.2 G/nm,
    /// asymmetric sequence with T = 25 μs, libration ground state.
    pub fn test_case() -> Self {
        Self {
            nd: NDParams::default(),
            field: FieldConfig::default(),
            ramp: RampMode::Constant,
            sequence: SequenceConfig::default(),
            numerics: Numerics::default(),
            preparation: Preparation::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.nd.validate()?;
        self.field.validate()?;
        self.sequence.validate()?;
        self.numerics.validate()
    }

    /// Field with the ramp resolved against the current sequence.
    pub fn resolved_field(&self) -> FieldConfig {
        let mut f = self.field;
        f.ramp = match self.ramp {
            RampMode::Constant => RampPolicy::Constant,
            RampMode::Compensating => compensating_ramp(&self.sequence, &self.nd, &self.field),
        };
        f
    }

    /// Libration frequency in the field the ND sees at t = 0.
    pub fn omega_prep(&self) -> Result<f64> {
        libration_frequency(initial_nv_field(&self.field, &self.nd), &self.nd)
    }

    pub fn angular_stats(&self) -> Result<AngularStats> {
        match self.preparation.rotational {
            RotationalState::GroundState => ground_state_stats(self.omega_prep()?, &self.nd),
            RotationalState::Thermal { t_theta } => thermal_stats(t_theta, self.field.b0, &self.nd),
        }
    }

    pub fn initial_state(&self, dtheta: f64, dtheta_dot: f64) -> PhaseState {
        let p = &self.preparation;
        PhaseState::prepared(self.field.theta0, &self.nd, p.theta_offset + dtheta, p.theta_dot_offset + dtheta_dot)
    }

    pub fn run(&self, dtheta: f64, dtheta_dot: f64) -> Result<SgiRun> {
        run_sgi(
            &self.initial_state(dtheta, dtheta_dot),
            &self.sequence,
            &self.nd,
            &self.resolved_field(),
            &self.numerics,
        )
    }
}

/// 3-point Gauss–Hermite rule for a unit normal: nodes 0, ±√3.
const GH_NODES: [f64; 3] = [-1.732_050_807_568_877_2, 0.0, 1.732_050_807_568_877_2];
const GH_WEIGHTS: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpread {
    /// δφ of the nominal shot [rad]
    pub delta_phi: f64,
    /// RMS of δφ − δφ(nominal) over the initial angular distribution [rad]
    pub spread: f64,
    pub omega: f64,
    pub stats: AngularStats,
}

/// Phase spread of the full dynamics over independent Gaussian (θ, θ̇)
/// initial deviations. The 3×3 rule is exact for δφ up to quadratic order
/// in the deviations, which is the order the angular analytics keep.
pub fn phase_spread(scn: &Scenario) -> Result<PhaseSpread> {
    scn.validate()?;
    let stats = scn.angular_stats()?;
    let omega = scn.omega_prep()?;
    let nodes: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let phases = nodes
        .par_iter()
        .map(|&(i, j)| scn.run(GH_NODES[i] * stats.d_theta, GH_NODES[j] * stats.d_theta_dot).map(|r| r.delta_phi))
        .collect::<Result<Vec<f64>>>()?;
    let center = phases[4];
    let ms: f64 =
        nodes.iter().zip(&phases).map(|(&(i, j), p)| GH_WEIGHTS[i] * GH_WEIGHTS[j] * (p - center).powi(2)).sum();
    Ok(PhaseSpread { delta_phi: center, spread: ms.sqrt(), omega, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Theta0,
    OmegaT,
    B0,
    BGrad,
    GXi,
    NvDistance,
    TTheta,
}

impl SweepVar {
    pub const ALL: [SweepVar; 7] = [
        SweepVar::Theta0,
        SweepVar::OmegaT,
        SweepVar::B0,
        SweepVar::BGrad,
        SweepVar::GXi,
        SweepVar::NvDistance,
        SweepVar::TTheta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Theta0 => "theta0",
            SweepVar::OmegaT => "omega_t",
            SweepVar::B0 => "b0",
            SweepVar::BGrad => "b_grad",
            SweepVar::GXi => "g_xi",
            SweepVar::NvDistance => "d",
            SweepVar::TTheta => "t_theta",
        }
    }

    /// SI unit of the swept value.
    pub fn unit(self) -> &'static str {
        match self {
            SweepVar::Theta0 => "rad",
            SweepVar::OmegaT => "1",
            SweepVar::B0 => "T",
            SweepVar::BGrad => "T/m",
            SweepVar::GXi => "m/s^2",
            SweepVar::NvDistance => "m",
            SweepVar::TTheta => "K",
        }
    }

    /// Sets the variable on a copy of `scn`. ωT is reached by changing T
    /// at fixed libration frequency.
    pub fn apply(self, scn: &Scenario, v: f64) -> Result<Scenario> {
        if !v.is_finite() {
            return Err(invalid(self.name(), "must be finite"));
        }
        let mut s = scn.clone();
        match self {
            SweepVar::Theta0 => s.field.theta0 = v,
            SweepVar::OmegaT => {
                if !(v > 0.0) {
                    return Err(invalid("omega_t", "must be positive"));
                }
                s.sequence.t_pulse = v / scn.omega_prep()?;
            }
            SweepVar::B0 => s.field.b0 = v,
            SweepVar::BGrad => s.field.b_grad = v,
            SweepVar::GXi => s.field.g_xi = v,
            SweepVar::NvDistance => s.nd.nv_distance = v,
            SweepVar::TTheta => s.preparation.rotational = RotationalState::Thermal { t_theta: v },
        }
        Ok(s)
    }

    pub fn get(self, scn: &Scenario) -> Option<f64> {
        Some(match self {
            SweepVar::Theta0 => scn.field.theta0,
            SweepVar::OmegaT => scn.omega_prep().ok()? * scn.sequence.t_pulse,
            SweepVar::B0 => scn.field.b0,
            SweepVar::BGrad => scn.field.b_grad,
            SweepVar::GXi => scn.field.g_xi,
            SweepVar::NvDistance => scn.nd.nv_distance,
            SweepVar::TTheta => match scn.preparation.rotational {
                RotationalState::Thermal { t_theta } => t_theta,
                RotationalState::GroundState => return None,
            },
        })
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = SgiError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '′', '\''], "_");
        Ok(match key.as_str() {
            "theta0" | "θ0" => SweepVar::Theta0,
            "omega_t" | "omegat" | "ωt" => SweepVar::OmegaT,
            "b0" => SweepVar::B0,
            "b_grad" | "bgrad" | "b_" => SweepVar::BGrad,
            "g_xi" | "gxi" | "g_ξ" => SweepVar::GXi,
            "d" | "nv_distance" => SweepVar::NvDistance,
            "t_theta" | "ttheta" | "tθ" => SweepVar::TTheta,
            _ => return Err(invalid("variable", format!("unknown sweep variable '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
}

impl SweepRange {
    pub fn linear(min: f64, max: f64, n_points: usize) -> Self {
        Self { min, max, n_points, spacing: Spacing::Linear }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(invalid("n_points", "must be >= 2"));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(invalid("range", "need finite min < max"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(invalid("range", "log spacing needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub range: SweepRange,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.range.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Run,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

/// A set of overrides defining one curve of a figure.
pub type Series = Vec<(SweepVar, f64)>;

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Run,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Fig6,
        Experiment::Fig7,
        Experiment::Fig8,
        Experiment::Fig9,
        Experiment::Fig10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Fig8 => "fig8",
            Experiment::Fig9 => "fig9",
            Experiment::Fig10 => "fig10",
        }
    }

    /// Output columns as (name, unit).
    pub fn columns(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::Run => &[
                ("delta_phi", "rad"),
                ("delta_phi_spread", "rad"),
                ("delta_phi_analytic", "rad"),
                ("omega", "rad/s"),
                ("omega_t", "1"),
                ("c_theta_semiclassical", "1"),
                ("c_theta_wavepacket", "1"),
                ("max_abs_zeta", "m"),
                ("max_abs_xi", "m"),
            ],
            Experiment::Fig3 => &[("t", "s"), ("arm", "1"), ("xi", "m"), ("zeta", "m"), ("theta_prime", "rad")],
            Experiment::Fig4 | Experiment::Fig7 | Experiment::Fig8 | Experiment::Fig10 => {
                &[("delta_phi_spread", "rad"), ("delta_phi", "rad"), ("omega_t", "1")]
            }
            Experiment::Fig5 => &[("c_theta_wavepacket", "1"), ("c_theta_semiclassical", "1")],
            Experiment::Fig6 => &[("delta_phi_gs", "rad"), ("coherence", "1")],
            Experiment::Fig9 => &[
                ("delta_phi_spread", "rad"),
                ("delta_phi_spread_unramped", "rad"),
                ("delta_phi", "rad"),
                ("omega_t", "1"),
            ],
        }
    }

    /// Base scenario matching the figure caption.
    pub fn base(self) -> Scenario {
        let mut s = Scenario::test_case();
        s.numerics.steps_per_pulse = 400;
        match self {
            Experiment::Run | Experiment::Fig3 => s.numerics = Numerics::default(),
            Experiment::Fig4 => {}
            Experiment::Fig5 | Experiment::Fig6 => s.field.b_grad = 0.0,
            Experiment::Fig7 => s.nd.nv_distance = 0.0,
            Experiment::Fig8 => s.nd.nv_distance = 3.0 * NANOMETER,
            Experiment::Fig9 => {
                s.field.b0 = 5.0 * GAUSS;
                s.ramp = RampMode::Compensating;
            }
            Experiment::Fig10 => s.sequence = s.sequence.with_symmetric(),
        }
        s
    }

    /// Default swept variable and range.
    pub fn default_sweep(self) -> SweepSpec {
        let (variable, range) = match self {
            Experiment::Run | Experiment::Fig3 | Experiment::Fig4 => {
                (SweepVar::Theta0, SweepRange::linear(-FRAC_PI_4, FRAC_PI_4, 101))
            }
            Experiment::Fig5 | Experiment::Fig6 => {
                (SweepVar::OmegaT, SweepRange::linear(4.0 * PI / 400.0, 4.0 * PI, 400))
            }
            Experiment::Fig7 => (SweepVar::B0, SweepRange::linear(1.0 * GAUSS, 20.0 * GAUSS, 39)),
            Experiment::Fig8 | Experiment::Fig9 => (SweepVar::GXi, SweepRange::linear(0.0, 9.8, 50)),
            Experiment::Fig10 => (SweepVar::BGrad, SweepRange::linear(0.01 * GAUSS_PER_NM, 1.0 * GAUSS_PER_NM, 100)),
        };
        SweepSpec { variable, range }
    }

    /// Curves drawn in the figure.
    pub fn default_series(self) -> Vec<Series> {
        let grads = [0.05, 0.1, 0.2, 0.4].map(|g| g * GAUSS_PER_NM);
        match self {
            Experiment::Fig4 => [1.0, 2.0, 3.0].iter().map(|d| vec![(SweepVar::NvDistance, d * NANOMETER)]).collect(),
            Experiment::Fig7 | Experiment::Fig8 => grads.iter().map(|g| vec![(SweepVar::BGrad, *g)]).collect(),
            Experiment::Fig9 => [3.0, 0.0]
                .iter()
                .flat_map(|d| {
                    grads.iter().map(move |g| vec![(SweepVar::NvDistance, d * NANOMETER), (SweepVar::BGrad, *g)])
                })
                .collect(),
            Experiment::Fig10 => [0.0, 3.0]
                .iter()
                .flat_map(|d| {
                    [0.0, 4.9, 9.8]
                        .iter()
                        .map(move |g| vec![(SweepVar::NvDistance, d * NANOMETER), (SweepVar::GXi, *g)])
                })
                .collect(),
            _ => vec![Vec::new()],
        }
    }

    /// Output values for one fully specified scenario. `Fig3` rows come
    /// from `paths` instead.
    pub fn evaluate(self, scn: &Scenario) -> Result<Vec<f64>> {
        match self {
            Experiment::Run => {
                let s = summarize(scn)?;
                Ok(vec![
                    s.delta_phi,
                    s.delta_phi_spread,
                    s.delta_phi_analytic,
                    s.omega,
                    s.omega_t,
                    s.c_theta_semiclassical,
                    s.c_theta_wavepacket.unwrap_or(f64::NAN),
                    s.max_abs_zeta,
                    s.max_abs_xi,
                ])
            }
            Experiment::Fig3 => Err(invalid("experiment", "fig3 produces paths, not sweep values")),
            Experiment::Fig4 | Experiment::Fig7 | Experiment::Fig8 | Experiment::Fig10 => {
                let p = phase_spread(scn)?;
                Ok(vec![p.spread, p.delta_phi, p.omega * scn.sequence.t_pulse])
            }
            Experiment::Fig5 => {
                let omega = scn.omega_prep()?;
                let u = omega * scn.sequence.t_pulse;
                let c = sequence_coherence(&scn.sequence, omega, scn.nd.inertia(), scn.numerics.steps_per_pulse)?;
                Ok(vec![c.c_theta, semiclassical_coherence_gs(u)])
            }
            Experiment::Fig6 => {
                let u = scn.omega_prep()? * scn.sequence.t_pulse;
                let dp = phase_uncertainty_gs(u);
                Ok(vec![dp, (-0.5 * dp * dp).exp()])
            }
            Experiment::Fig9 => {
                let ramped = phase_spread(scn)?;
                let flat = phase_spread(&Scenario { ramp: RampMode::Constant, ..scn.clone() })?;
                Ok(vec![ramped.spread, flat.spread, ramped.delta_phi, ramped.omega * scn.sequence.t_pulse])
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = SgiError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid("experiment", format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub series: Series,
    pub value: f64,
    /// Fully resolved scenario of this point; `None` if it could not be built.
    pub scenario: Option<Scenario>,
    /// Per-point failures are kept in the row.
    pub outputs: std::result::Result<Vec<f64>, String>,
}

/// Evaluates `exp` over the product of `series` and the swept values. Rows
/// keep the series-major, value-minor order whatever the thread count.
pub fn sweep(base: &Scenario, exp: Experiment, spec: &SweepSpec, series: &[Series]) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let values = spec.range.values();
    let default_series = [Vec::new()];
    let series = if series.is_empty() { &default_series[..] } else { series };
    let jobs: Vec<(usize, &Series, f64)> = series
        .iter()
        .flat_map(|s| values.iter().map(move |v| (s, *v)))
        .enumerate()
        .map(|(k, (s, v))| (k, s, v))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(index, s, v)| {
            let scenario = s
                .iter()
                .try_fold(base.clone(), |acc, (var, x)| var.apply(&acc, *x))
                .and_then(|scn| spec.variable.apply(&scn, v));
            let outputs =
                scenario.as_ref().map_err(Clone::clone).and_then(|scn| exp.evaluate(scn)).map_err(|e| e.to_string());
            SweepRow { index, series: s.clone(), value: v, scenario: scenario.ok(), outputs }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRow {
    pub t: f64,
    pub arm: u8,
    pub xi: f64,
    pub zeta: f64,
    pub theta_prime: f64,
}

/// Sampled paths of both arms in the ξ/ζ frame of the bias.
pub fn paths(run: &SgiRun, scn: &Scenario) -> Vec<PathRow> {
    let mut rows = Vec::new();
    for (arm, traj) in [(1u8, &run.arm1), (2, &run.arm2)] {
        for s in &traj.samples {
            let (xi, zeta) = to_xi_zeta(s.state.x, s.state.y, scn.field.theta0);
            rows.push(PathRow { t: s.t, arm, xi, zeta, theta_prime: s.state.theta + scn.nd.nv_angle });
        }
    }
    rows
}

/// The two Fig. 3 cases: bias at α/2 with θ′(0) = θ0 + 10 mrad, and bias
/// at 0 with θ′(0) = 10 mrad.
pub fn fig3_scenarios() -> [Scenario; 2] {
    let mut ideal = Scenario::test_case();
    ideal.preparation.theta_offset = 10e-3;
    let mut tilted = ideal.clone();
    tilted.field.theta0 = 0.0;
    [ideal, tilted]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub delta_phi: f64,
    pub action_phase: f64,
    pub separation_phase: f64,
    pub delta_phi_spread: f64,
    /// Angular-only closed form at the preparation frequency.
    pub delta_phi_analytic: f64,
    pub omega: f64,
    pub libration_hz: f64,
    /// ω/2π in the bias field B0 alone.
    pub libration_hz_bias: f64,
    pub omega_t: f64,
    pub d_theta: f64,
    pub d_theta_dot: f64,
    pub c_theta_semiclassical: f64,
    pub c_theta_wavepacket: Option<f64>,
    pub max_abs_xi: f64,
    pub max_abs_zeta: f64,
    pub mismatch: [f64; 6],
}

/// Runs the nominal shot plus the angular analytics and the wavepacket
/// overlap. A wavepacket failure is logged and leaves its field empty.
pub fn summarize(scn: &Scenario) -> Result<RunSummary> {
    let run = scn.run(0.0, 0.0)?;
    let spread = phase_spread(scn)?;
    let omega = spread.omega;
    let u = omega * scn.sequence.t_pulse;
    let wave = match sequence_coherence(&scn.sequence, omega, scn.nd.inertia(), scn.numerics.steps_per_pulse) {
        Ok(c) => Some(c.c_theta),
        Err(e) => {
            log::warn!("wavepacket overlap skipped: {e}");
            None
        }
    };
    let rows = paths(&run, scn);
    let max_abs = |f: fn(&PathRow) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    Ok(RunSummary {
        delta_phi: run.delta_phi,
        action_phase: run.action_phase,
        separation_phase: run.separation_phase,
        delta_phi_spread: spread.spread,
        delta_phi_analytic: phase_uncertainty(&spread.stats, omega, scn.sequence.t_pulse, &scn.nd),
        omega,
        libration_hz: omega / (2.0 * PI),
        libration_hz_bias: libration_frequency(scn.field.b0, &scn.nd)? / (2.0 * PI),
        omega_t: u,
        d_theta: spread.stats.d_theta,
        d_theta_dot: spread.stats.d_theta_dot,
        c_theta_semiclassical: semiclassical_coherence_gs(u),
        c_theta_wavepacket: wave,
        max_abs_xi: max_abs(|r| r.xi),
        max_abs_zeta: max_abs(|r| r.zeta),
        mismatch: run.mismatch(),
    })
}
