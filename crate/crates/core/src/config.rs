//! TOML scenario and experiment files.
//!
//! Every field has a default, so an empty file describes the reference
//! scenario: three agents, a 100 m cube, and the detection, filter and
//! planner settings listed on each field below. Unknown keys are errors.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Matrix3;
use serde::Deserialize;

use crate::control::NeighborMode;
use crate::error::{Error, Result};
use crate::filter::FilterParams;
use crate::fusion::CiWeightPolicy;
use crate::geometry::{Aabb, Vec3};
use crate::metrics::OspaParams;
use crate::models::{db_to_linear, ControlGrid, DetectionRatioDomain, PowerLevel, SensingParams, TargetDynamicsParams, TargetState};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Master seed of every random stream.
    pub seed: u64,
    pub n_steps: usize,
    pub surveillance_box: BoxConfig,
    pub agents: AgentsConfig,
    pub target: TargetConfig,
    pub sensing: SensingConfig,
    pub control: ControlConfig,
    pub filter: FilterConfig,
    pub initial_belief: InitialBeliefConfig,
    pub fusion: FusionConfig,
    pub metrics: MetricsConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_steps: 30,
            surveillance_box: BoxConfig::default(),
            agents: AgentsConfig::default(),
            target: TargetConfig::default(),
            sensing: SensingConfig::default(),
            control: ControlConfig::default(),
            filter: FilterConfig::default(),
            initial_belief: InitialBeliefConfig::default(),
            fusion: FusionConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self { min: [0.0; 3], max: [100.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentsConfig {
    pub positions: Vec<[f64; 3]>,
    /// Point the antennas face at step 0; defaults to the target's initial
    /// position.
    pub initial_aim: Option<[f64; 3]>,
}

impl Default for AgentsConfig {
    fn default() -> Self {
        Self {
            positions: vec![[30.0, 30.0, 30.0], [20.0, 10.0, 10.0], [10.0, 15.0, 15.0]],
            initial_aim: None,
        }
    }
}

/// Which steps the target can be observed in.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "PresenceRepr")]
pub enum Presence {
    Always,
    /// Birth and death drawn from `p_birth` / `p_survive`.
    Stochastic,
    /// Inclusive 1-based step intervals in which the target is present.
    Intervals(Vec<(usize, usize)>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PresenceRepr {
    Word(String),
    Intervals(Vec<[usize; 2]>),
}

impl TryFrom<PresenceRepr> for Presence {
    type Error = String;

    fn try_from(r: PresenceRepr) -> Result<Self, String> {
        match r {
            PresenceRepr::Word(w) if w == "always" => Ok(Presence::Always),
            PresenceRepr::Word(w) if w == "stochastic" => Ok(Presence::Stochastic),
            PresenceRepr::Word(w) => Err(format!("presence must be \"always\", \"stochastic\" or a list of [first, last] intervals, got \"{w}\"")),
            PresenceRepr::Intervals(v) => Ok(Presence::Intervals(v.into_iter().map(|[a, b]| (a, b)).collect())),
        }
    }
}

impl Presence {
    /// Scheduled presence at `step`; `None` when presence is stochastic.
    pub fn scheduled(&self, step: usize) -> Option<bool> {
        match self {
            Presence::Always => Some(true),
            Presence::Stochastic => None,
            Presence::Intervals(v) => Some(v.iter().any(|&(a, b)| (a..=b).contains(&step))),
        }
    }
}

/// What the hidden target does while scheduled absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionMotion {
    /// Keeps moving under the motion model.
    Continue,
    /// Holds its state until it reappears.
    Freeze,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    /// `[x, y, z, vx, vy, vz]` at step 1.
    pub initial_state: [f64; 6],
    pub presence: Presence,
    pub occlusion_motion: OcclusionMotion,
    /// Acceleration noise variance per axis, (m/s²)².
    pub accel_noise_var: f64,
    pub dt: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            initial_state: [20.0, 20.0, 20.0, 1.5, 2.0, 1.7],
            presence: Presence::Always,
            occlusion_motion: OcclusionMotion::Freeze,
            accel_noise_var: 0.5,
            dt: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioDomain {
    Linear,
    NormalizedDb,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensingConfig {
    pub p_d_max: f64,
    /// Reference range R_0 (m).
    pub r0: f64,
    pub path_loss_exp: f64,
    pub cone_height: f64,
    /// Full opening angle (degrees).
    pub cone_angle_deg: f64,
    /// Measurement noise standard deviations: range (m), azimuth and
    /// inclination (rad).
    pub meas_noise_std: [f64; 3],
    pub clutter_rate: f64,
    pub detection_ratio_domain: RatioDomain,
    /// Level mapped to zero detection in the normalized dB domain (dBW).
    pub normalized_db_floor: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            p_d_max: 0.95,
            r0: 6.0,
            path_loss_exp: 2.0,
            cone_height: 40.0,
            cone_angle_deg: 80.0,
            meas_noise_std: [0.8, PI / 50.0, PI / 50.0],
            clutter_rate: 3.0,
            detection_ratio_domain: RatioDomain::Linear,
            normalized_db_floor: -60.0,
        }
    }
}

/// A power level in a config file: `"off"` or a number of dBW.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "LevelRepr")]
pub struct LevelConfig(pub PowerLevel);

#[derive(Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Db(f64),
    Word(String),
}

impl TryFrom<LevelRepr> for LevelConfig {
    type Error = String;

    fn try_from(r: LevelRepr) -> Result<Self, String> {
        match r {
            LevelRepr::Db(d) => Ok(LevelConfig(PowerLevel::Dbw(d))),
            LevelRepr::Word(w) if w.eq_ignore_ascii_case("off") => Ok(LevelConfig(PowerLevel::Off)),
            LevelRepr::Word(w) => Err(format!("power level must be \"off\" or a number of dBW, got \"{w}\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborConfig {
    Nearest,
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    /// Radial step lengths of the mobility grid (m).
    pub radial_steps: Vec<f64>,
    pub n_phi: usize,
    pub n_theta: usize,
    pub include_hover: bool,
    /// Ordered from weakest to strongest; the last entry is the maximum
    /// level.
    pub power_levels: Vec<LevelConfig>,
    /// Detections required by the objective (at least this many agents).
    pub n_required: usize,
    /// Interference tolerance of every agent (dBW).
    pub tolerance_db: f64,
    pub constraints_enabled: bool,
    pub n_samples: usize,
    pub n_iterations: usize,
    /// Every agent solves the joint problem with its own random stream and
    /// the best plan wins; otherwise one solve per step.
    pub distributed: bool,
    pub local_search_neighbors: NeighborConfig,
    /// Steps the last fused estimate is extrapolated for planning once no
    /// agent believes the target present.
    pub coast_steps: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            radial_steps: vec![1.0, 3.0, 5.0],
            n_phi: 8,
            n_theta: 8,
            include_hover: true,
            power_levels: vec![
                LevelConfig(PowerLevel::Off),
                LevelConfig(PowerLevel::Dbw(-50.0)),
                LevelConfig(PowerLevel::Dbw(-7.0)),
                LevelConfig(PowerLevel::Dbw(0.5)),
            ],
            n_required: 2,
            tolerance_db: -40.0,
            constraints_enabled: true,
            n_samples: 10_000,
            n_iterations: 100,
            distributed: true,
            local_search_neighbors: NeighborConfig::Nearest,
            coast_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub p_birth: f64,
    pub p_survive: f64,
    pub n_particles: usize,
    pub n_birth_particles: usize,
    pub resample_threshold: f64,
    pub birth_velocity_std: f64,
    pub clutter_floor: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            p_birth: 0.02,
            p_survive: 0.98,
            n_particles: 5000,
            n_birth_particles: 1000,
            resample_threshold: 0.5,
            birth_velocity_std: 1.0,
            clutter_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBeliefKind {
    /// Particles around the target's initial state.
    Cued,
    /// Particles uniform over the surveillance box.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialBeliefConfig {
    pub kind: InitialBeliefKind,
    pub existence: f64,
    pub position_std: f64,
    pub velocity_std: f64,
}

impl Default for InitialBeliefConfig {
    fn default() -> Self {
        Self { kind: InitialBeliefKind::Cued, existence: 0.9, position_std: 2.0, velocity_std: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    /// Fraction of each agent's particles replaced by draws from the fused
    /// estimate.
    pub inject_fraction: f64,
    /// Fixed covariance-intersection weight; the trace-minimizing weight
    /// when absent.
    pub ci_weight: Option<f64>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { inject_fraction: 0.5, ci_weight: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub ospa_order: f64,
    pub ospa_cutoff: f64,
    /// Received power counted as a jamming incident (dBW); defaults to the
    /// interference tolerance.
    pub jamming_threshold_db: Option<f64>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { ospa_order: 2.0, ospa_cutoff: 10.0, jamming_threshold_db: None }
    }
}

fn arr(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ScenarioConfig {
    pub fn bounds(&self) -> Aabb {
        Aabb::new(arr(self.surveillance_box.min), arr(self.surveillance_box.max))
    }

    pub fn agent_positions(&self) -> Vec<Vec3> {
        self.agents.positions.iter().copied().map(arr).collect()
    }

    pub fn initial_target(&self) -> TargetState {
        TargetState::from_array(self.target.initial_state)
    }

    pub fn initial_aim(&self) -> Vec3 {
        self.agents.initial_aim.map(arr).unwrap_or(self.initial_target().pos)
    }

    pub fn levels(&self) -> Vec<PowerLevel> {
        self.control.power_levels.iter().map(|l| l.0).collect()
    }

    pub fn sensing_params(&self) -> SensingParams {
        let s = &self.sensing;
        SensingParams {
            p_d_max: s.p_d_max,
            r0: s.r0,
            path_loss_exp: s.path_loss_exp,
            cone_height: s.cone_height,
            cone_angle: s.cone_angle_deg.to_radians(),
            meas_noise_var: arr(s.meas_noise_std.map(|v| v * v)),
            clutter_rate: s.clutter_rate,
            l_max: self.levels().last().copied().unwrap_or(PowerLevel::Off),
            ratio_domain: match s.detection_ratio_domain {
                RatioDomain::Linear => DetectionRatioDomain::Linear,
                RatioDomain::NormalizedDb => DetectionRatioDomain::NormalizedDb { floor_dbw: s.normalized_db_floor },
            },
        }
    }

    pub fn dynamics(&self) -> TargetDynamicsParams {
        TargetDynamicsParams {
            dt: self.target.dt,
            accel_noise_cov: Matrix3::identity() * self.target.accel_noise_var,
            p_birth: self.filter.p_birth,
            p_survive: self.filter.p_survive,
            birth_region: self.bounds(),
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            n_particles: self.filter.n_particles,
            n_birth_particles: self.filter.n_birth_particles,
            resample_threshold: self.filter.resample_threshold,
            dynamics: self.dynamics(),
            sensing: self.sensing_params(),
            surveillance_box: self.bounds(),
            birth_velocity_std: self.filter.birth_velocity_std,
            clutter_floor: self.filter.clutter_floor,
        }
    }

    pub fn grid(&self) -> ControlGrid {
        ControlGrid {
            radial_steps: self.control.radial_steps.clone(),
            n_phi: self.control.n_phi,
            n_theta: self.control.n_theta,
            include_hover: self.control.include_hover,
        }
    }

    pub fn tolerance_w(&self) -> f64 {
        db_to_linear(self.control.tolerance_db)
    }

    pub fn jamming_threshold_w(&self) -> f64 {
        self.metrics.jamming_threshold_db.map(db_to_linear).unwrap_or(self.tolerance_w())
    }

    pub fn neighbor_mode(&self) -> NeighborMode {
        match self.control.local_search_neighbors {
            NeighborConfig::Nearest => NeighborMode::Nearest,
            NeighborConfig::Random => NeighborMode::Random,
        }
    }

    pub fn ci_policy(&self) -> CiWeightPolicy {
        self.fusion.ci_weight.map(CiWeightPolicy::Fixed).unwrap_or(CiWeightPolicy::MinTrace)
    }

    pub fn ospa_params(&self) -> OspaParams {
        OspaParams { order: self.metrics.ospa_order, cutoff: self.metrics.ospa_cutoff }
    }

    /// Checks every semantic constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                e.push(msg);
            }
        };
        let b = &self.surveillance_box;
        need(
            (0..3).all(|k| b.min[k].is_finite() && b.max[k].is_finite() && b.min[k] < b.max[k]),
            "surveillance_box: min must be below max on every axis".into(),
        );
        need(self.n_steps >= 1, "n_steps must be at least 1".into());
        let n = self.agents.positions.len();
        need(n >= 1, "agents.positions must list at least one agent".into());
        let bounds = self.bounds();
        for (j, p) in self.agent_positions().iter().enumerate() {
            need(bounds.contains(p), format!("agents.positions[{j}] lies outside the surveillance box"));
        }
        let t = &self.target;
        need(t.initial_state.iter().all(|v| v.is_finite()), "target.initial_state must be finite".into());
        need(bounds.contains(&self.initial_target().pos), "target.initial_state position lies outside the surveillance box".into());
        need(t.accel_noise_var >= 0.0, "target.accel_noise_var must be non-negative".into());
        need(t.dt > 0.0, "target.dt must be positive".into());
        if let Presence::Intervals(v) = &t.presence {
            let mut sorted = v.clone();
            sorted.sort();
            for &(a, z) in &sorted {
                need(a >= 1 && a <= z && z <= self.n_steps, format!("target.presence interval [{a}, {z}] must satisfy 1 <= first <= last <= n_steps"));
            }
            for w in sorted.windows(2) {
                need(w[0].1 < w[1].0, format!("target.presence intervals [{}, {}] and [{}, {}] overlap", w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
        let s = &self.sensing;
        need(s.p_d_max > 0.0 && s.p_d_max < 1.0, "sensing.p_d_max must lie in (0, 1)".into());
        need(s.r0 > 0.0, "sensing.r0 must be positive".into());
        need(s.path_loss_exp > 0.0, "sensing.path_loss_exp must be positive".into());
        need(s.cone_height > 0.0, "sensing.cone_height must be positive".into());
        need(s.cone_angle_deg > 0.0 && s.cone_angle_deg < 180.0, "sensing.cone_angle_deg must lie in (0, 180)".into());
        need(s.meas_noise_std.iter().all(|&v| v > 0.0), "sensing.meas_noise_std entries must be positive".into());
        need(s.clutter_rate >= 0.0, "sensing.clutter_rate must be non-negative".into());
        let c = &self.control;
        need(!c.radial_steps.is_empty() && c.radial_steps.iter().all(|&r| r > 0.0), "control.radial_steps must be non-empty and positive".into());
        need(c.n_phi >= 2, "control.n_phi must be at least 2".into());
        need(c.n_theta >= 1, "control.n_theta must be at least 1".into());
        need(!c.power_levels.is_empty(), "control.power_levels must not be empty".into());
        let lin: Vec<f64> = self.levels().iter().map(|l| l.linear()).collect();
        need(lin.windows(2).all(|w| w[0] < w[1]), "control.power_levels must be strictly increasing".into());
        need(c.n_required >= 1 && c.n_required <= n.max(1), format!("control.n_required must lie in 1..={}", n.max(1)));
        need(c.tolerance_db.is_finite(), "control.tolerance_db must be finite".into());
        need(c.n_samples >= 1, "control.n_samples must be at least 1".into());
        need(c.n_iterations >= 1, "control.n_iterations must be at least 1".into());
        let f = &self.filter;
        need((0.0..=1.0).contains(&f.p_birth), "filter.p_birth must lie in [0, 1]".into());
        need((0.0..=1.0).contains(&f.p_survive), "filter.p_survive must lie in [0, 1]".into());
        need(f.n_particles >= 1, "filter.n_particles must be at least 1".into());
        need(f.n_birth_particles >= 1, "filter.n_birth_particles must be at least 1".into());
        need(f.resample_threshold > 0.0 && f.resample_threshold <= 1.0, "filter.resample_threshold must lie in (0, 1]".into());
        need(f.birth_velocity_std >= 0.0, "filter.birth_velocity_std must be non-negative".into());
        need(f.clutter_floor > 0.0, "filter.clutter_floor must be positive".into());
        let ib = &self.initial_belief;
        need((0.0..=1.0).contains(&ib.existence), "initial_belief.existence must lie in [0, 1]".into());
        need(ib.position_std >= 0.0 && ib.velocity_std >= 0.0, "initial_belief standard deviations must be non-negative".into());
        need((0.0..=1.0).contains(&self.fusion.inject_fraction), "fusion.inject_fraction must lie in [0, 1]".into());
        if let Some(w) = self.fusion.ci_weight {
            need((0.0..=1.0).contains(&w), "fusion.ci_weight must lie in [0, 1]".into());
        }
        need(self.metrics.ospa_order >= 1.0, "metrics.ospa_order must be at least 1".into());
        need(self.metrics.ospa_cutoff > 0.0, "metrics.ospa_cutoff must be positive".into());
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(e))
        }
    }
}

/// Parses and validates a scenario from TOML text. `path` only labels
/// errors.
pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// The scenario as written, repeated over trials.
    Single,
    /// One randomly spawned scenario per trial for each sweep entry.
    Sweep,
    /// Paired randomly spawned trials with interference constraints on and
    /// off.
    Ablation,
}

/// Overrides applied to the base scenario by one sweep configuration.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub name: String,
    pub radial_steps: Option<Vec<f64>>,
    pub n_phi: Option<usize>,
    pub n_theta: Option<usize>,
    pub include_hover: Option<bool>,
    pub cone_angle_deg: Option<f64>,
}

impl SweepEntry {
    pub fn apply(&self, base: &ScenarioConfig) -> ScenarioConfig {
        let mut c = base.clone();
        if let Some(v) = &self.radial_steps {
            c.control.radial_steps = v.clone();
        }
        if let Some(v) = self.n_phi {
            c.control.n_phi = v;
        }
        if let Some(v) = self.n_theta {
            c.control.n_theta = v;
        }
        if let Some(v) = self.include_hover {
            c.control.include_hover = v;
        }
        if let Some(v) = self.cone_angle_deg {
            c.sensing.cone_angle_deg = v;
        }
        c
    }
}

/// The eight grid/opening-angle configurations of the parameter sweep.
/// Configurations 1-4 use an 11-action grid (one 3 m step, two inclination
/// rings of eight azimuths, hover); 5-8 use a 79-action grid (steps of 1, 3
/// and 5 m, four rings of eight, hover). Opening angles run 60-120 degrees.
pub fn table_sweep() -> Vec<SweepEntry> {
    let mut v = Vec::new();
    for (k, (steps, n_phi)) in [(vec![3.0], 2usize), (vec![1.0, 3.0, 5.0], 4)].into_iter().enumerate() {
        for (a, angle) in [60.0, 80.0, 100.0, 120.0].into_iter().enumerate() {
            v.push(SweepEntry {
                name: format!("config{}", 4 * k + a + 1),
                radial_steps: Some(steps.clone()),
                n_phi: Some(n_phi),
                n_theta: Some(8),
                include_hover: Some(true),
                cone_angle_deg: Some(angle),
            });
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_trials: usize,
    /// Trial `k` runs with seed `seed + k`.
    pub seed: u64,
    pub out_dir: String,
    /// Radius of the ball around the target agents spawn in (m).
    pub spawn_radius: f64,
    /// Standard deviation of the spawned target's velocity per axis (m/s).
    pub spawn_velocity_std: f64,
    /// Sweep configurations; the eight-entry table when empty.
    pub sweep: Vec<SweepEntry>,
    pub scenario: ScenarioConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Single,
            n_trials: 1,
            seed: 1,
            out_dir: "out".into(),
            spawn_radius: 20.0,
            spawn_velocity_std: 1.0,
            sweep: Vec::new(),
            scenario: ScenarioConfig::default(),
        }
    }
}

impl ExperimentSpec {
    /// Named scenario variants the experiment runs.
    pub fn variants(&self) -> Vec<(String, ScenarioConfig)> {
        match self.kind {
            ExperimentKind::Single => vec![("single".into(), self.scenario.clone())],
            ExperimentKind::Sweep => {
                let entries = if self.sweep.is_empty() { table_sweep() } else { self.sweep.clone() };
                entries.iter().map(|e| (e.name.clone(), e.apply(&self.scenario))).collect()
            }
            ExperimentKind::Ablation => {
                let mut on = self.scenario.clone();
                on.control.constraints_enabled = true;
                let mut off = self.scenario.clone();
                off.control.constraints_enabled = false;
                vec![("constraints_enabled".into(), on), ("constraints_disabled".into(), off)]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        if self.n_trials < 1 {
            e.push("n_trials must be at least 1".to_string());
        }
        if !(self.spawn_radius >= 0.0) {
            e.push("spawn_radius must be non-negative".to_string());
        }
        if !(self.spawn_velocity_std >= 0.0) {
            e.push("spawn_velocity_std must be non-negative".to_string());
        }
        let mut names: Vec<&str> = self.sweep.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            e.push("sweep entry names must be unique".to_string());
        }
        for (name, cfg) in self.variants() {
            if let Err(Error::Validation(v)) = cfg.validate() {
                e.extend(v.into_iter().map(|m| format!("{name}: {m}")));
            }
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(e))
        }
    }
}

pub fn parse_experiment(text: &str, path: &Path) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_experiment(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::admissible_controls;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_scenario(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.bounds(), Aabb::new(Vec3::zeros(), Vec3::repeat(100.0)));
        assert_eq!(c.dynamics().accel_noise_cov, Matrix3::identity() * 0.5);
        let s = c.sensing_params();
        assert_eq!((s.p_d_max, s.clutter_rate, s.cone_height), (0.95, 3.0, 40.0));
        assert_eq!(s.cone_angle, 80f64.to_radians());
        assert_eq!(s.l_max, PowerLevel::Dbw(0.5));
        assert!((c.tolerance_w() - 1e-4).abs() < 1e-18);
        assert_eq!((c.filter.p_birth, c.filter.p_survive), (0.02, 0.98));
        assert_eq!((c.control.n_samples, c.control.n_iterations), (10_000, 100));
        assert_eq!(c.levels(), vec![PowerLevel::Off, PowerLevel::Dbw(-50.0), PowerLevel::Dbw(-7.0), PowerLevel::Dbw(0.5)]);
        assert_eq!(c.control.n_required, 2);
    }

    #[test]
    fn zero_steps_is_rejected() {
        match parse("n_steps = 0") {
            Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("n_steps"))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        for text in ["foo = 1", "[control]\nfoo = 1"] {
            match parse(text) {
                Err(Error::Parse { message, .. }) => assert!(message.contains("foo"), "{message}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn parse_errors_carry_a_location() {
        match parse("n_steps = \n") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("line 1"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = "n_steps = 0\n[sensing]\np_d_max = 2.0\n[filter]\nresample_threshold = 0.0\n";
        match parse(text) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn presence_forms() {
        let c = parse("[target]\npresence = [[1, 13], [18, 30]]").unwrap();
        assert_eq!(c.target.presence.scheduled(13), Some(true));
        assert_eq!(c.target.presence.scheduled(14), Some(false));
        assert_eq!(c.target.presence.scheduled(18), Some(true));
        assert_eq!(parse("[target]\npresence = \"stochastic\"").unwrap().target.presence, Presence::Stochastic);
        assert!(matches!(parse("[target]\npresence = \"sometimes\""), Err(Error::Parse { .. })));
        assert!(matches!(parse("[target]\npresence = [[1, 10], [8, 20]]"), Err(Error::Validation(_))));
        assert!(matches!(parse("[target]\npresence = [[0, 10]]"), Err(Error::Validation(_))));
    }

    #[test]
    fn power_levels_mix_words_and_numbers() {
        let c = parse("[control]\npower_levels = [\"off\", -20, 0]").unwrap();
        assert_eq!(c.levels(), vec![PowerLevel::Off, PowerLevel::Dbw(-20.0), PowerLevel::Dbw(0.0)]);
        assert!(parse("[control]\npower_levels = [0, -20]").is_err());
        assert!(parse("[control]\npower_levels = [\"loud\"]").is_err());
    }

    #[test]
    fn agents_outside_the_box_are_rejected() {
        assert!(matches!(parse("[agents]\npositions = [[150.0, 1.0, 1.0]]\n[control]\nn_required = 1"), Err(Error::Validation(_))));
    }

    #[test]
    fn sweep_table_cardinalities() {
        let t = table_sweep();
        assert_eq!(t.len(), 8);
        let base = ScenarioConfig::default();
        let u = Vec3::repeat(50.0);
        for (k, e) in t.iter().enumerate() {
            let c = e.apply(&base);
            let expected = if k < 4 { 11 } else { 79 };
            assert_eq!(admissible_controls(&u, &c.grid()).len(), expected, "{}", e.name);
            assert_eq!(c.sensing.cone_angle_deg, [60.0, 80.0, 100.0, 120.0][k % 4]);
        }
    }

    #[test]
    fn experiment_kinds() {
        let p = Path::new("e.toml");
        let s = parse_experiment("kind = \"ablation\"\nn_trials = 2\n[scenario]\nn_steps = 5", p).unwrap();
        let v = s.variants();
        assert_eq!(v.len(), 2);
        assert!(v[0].1.control.constraints_enabled && !v[1].1.control.constraints_enabled);
        assert_eq!(v[0].1.n_steps, 5);
        let s = parse_experiment("kind = \"sweep\"", p).unwrap();
        assert_eq!(s.variants().len(), 8);
        let s = parse_experiment("kind = \"sweep\"\n[[sweep]]\nname = \"a\"\ncone_angle_deg = 30.0", p).unwrap();
        assert_eq!(s.variants()[0].1.sensing.cone_angle_deg, 30.0);
        assert!(matches!(parse_experiment("n_trials = 0", p), Err(Error::Validation(_))));
        assert!(matches!(parse_experiment("kind = \"sweep\"\n[[sweep]]\nname = \"a\"\ncone_angle_deg = 200.0", p), Err(Error::Validation(_))));
    }
}
