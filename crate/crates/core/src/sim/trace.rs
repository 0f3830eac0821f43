//! Per-step simulation records.

use crate::geometry::Vec3;
use crate::models::{PowerLevel, TargetState};

/// How the joint control of a step was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    /// GRASP returned a feasible joint.
    Solved,
    /// GRASP met no feasible joint; everyone hovered with transmitters off.
    Fallback,
    /// No target estimate: agents held position and listened.
    Search,
}

impl std::fmt::Display for PlanMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlanMode::Solved => "solved",
            PlanMode::Fallback => "fallback",
            PlanMode::Search => "search",
        })
    }
}

impl std::str::FromStr for PlanMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "solved" => Ok(PlanMode::Solved),
            "fallback" => Ok(PlanMode::Fallback),
            "search" => Ok(PlanMode::Search),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRecord {
    pub position: Vec3,
    pub level: PowerLevel,
    pub axis: Vec3,
    /// Local posterior existence before fusion.
    pub existence: f64,
    /// Local posterior mean, when existence exceeds one half.
    pub estimate: Option<TargetState>,
    /// Total power received from teammates (W).
    pub interference_w: f64,
    pub n_measurements: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    /// Whether the target is present and observable.
    pub truth_present: bool,
    /// True target state; kept while occluded.
    pub truth: Option<TargetState>,
    pub agents: Vec<AgentRecord>,
    /// `received_w[i][j]`: power at agent `i` from agent `j`.
    pub received_w: Vec<Vec<f64>>,
    pub fused_existence: f64,
    pub fused: Option<TargetState>,
    /// Power delivered to the target by the whole team (W).
    pub target_received_w: f64,
    pub ospa_m: f64,
    pub plan: PlanMode,
}

impl StepRecord {
    /// True when the planner produced this step's controls.
    pub fn solver_found(&self) -> bool {
        self.plan == PlanMode::Solved
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn n_agents(&self) -> usize {
        self.steps.first().map_or(0, |s| s.agents.len())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
