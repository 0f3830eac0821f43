//! Tracking-and-jamming control: the joint detection objective, the
//! interference constraints, a single-agent controller, the GRASP solver
//! and an exhaustive reference solver.

mod grasp;
mod objective;
mod oracle;

use std::cmp::Ordering;

pub use grasp::{grasp_greedy_randomized, grasp_local_search, grasp_solve, select_best, GraspOutcome};
pub use objective::{objective_at_least_n, poisson_binomial_pmf, xi_exactly_m};
pub use oracle::{exhaustive_oracle, DEFAULT_ORACLE_CAP};

use crate::error::{Error, Result};
use crate::geometry::{aim_axis, Aabb, Vec3};
use crate::models::{admissible_controls, detection_prob, received_power, ControlGrid, PowerLevel, SensingParams};

/// One agent's hypothesised mobility and power choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateAction {
    pub position: Vec3,
    pub level: PowerLevel,
}

/// One action per agent, in agent order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointControl {
    pub actions: Vec<CandidateAction>,
}

/// How local search picks the two positions next to the incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    /// The two closest admissible positions.
    Nearest,
    /// Two distinct positions drawn from the closest few.
    Random,
}

/// Everything one agent contributes to the joint problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentOptions {
    pub previous_position: Vec3,
    /// Antenna axis kept when the aim point is undefined or degenerate.
    pub previous_axis: Vec3,
    pub positions: Vec<Vec3>,
    /// Admissible power levels, ordered from weakest (usually off) to
    /// strongest.
    pub levels: Vec<PowerLevel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub agents: Vec<AgentOptions>,
    /// Mean predicted target position; antennas aim here.
    pub target_estimate: Option<Vec3>,
    /// At least this many agents should detect the target.
    pub n_required: usize,
    /// Interference tolerance of each agent, linear watts.
    pub tolerances_w: Vec<f64>,
    pub sensing: SensingParams,
    /// When false the interference constraints are ignored by the solvers.
    pub constraints_enabled: bool,
    pub neighbor_mode: NeighborMode,
}

impl ControlProblem {
    /// Builds each agent's option set from the mobility grid around its
    /// previous position, dropping positions outside `bounds`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_grid(
        previous_positions: &[Vec3],
        previous_axes: &[Vec3],
        grid: &ControlGrid,
        levels: &[PowerLevel],
        bounds: Option<&Aabb>,
        target_estimate: Option<Vec3>,
        n_required: usize,
        tolerance_w: f64,
        sensing: SensingParams,
    ) -> Self {
        let agents = previous_positions
            .iter()
            .zip(previous_axes)
            .map(|(prev, axis)| {
                let mut positions = admissible_controls(prev, grid);
                if let Some(b) = bounds {
                    positions.retain(|p| b.contains(p));
                }
                if positions.is_empty() {
                    positions.push(*prev);
                }
                AgentOptions {
                    previous_position: *prev,
                    previous_axis: *axis,
                    positions,
                    levels: levels.to_vec(),
                }
            })
            .collect();
        Self {
            tolerances_w: vec![tolerance_w; previous_positions.len()],
            agents,
            target_estimate,
            n_required,
            sensing,
            constraints_enabled: true,
            neighbor_mode: NeighborMode::Nearest,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// Antenna axis of agent `j` when it stands at `position`: towards the
    /// target estimate, or the previous axis when that is undefined.
    pub fn axis_for(&self, j: usize, position: &Vec3) -> Vec3 {
        self.target_estimate
            .and_then(|x| aim_axis(position, &x).ok())
            .unwrap_or(self.agents[j].previous_axis)
    }

    /// Number of joint controls in the full product space.
    pub fn space_size(&self) -> u128 {
        self.agents
            .iter()
            .map(|a| (a.positions.len() * a.levels.len()) as u128)
            .product()
    }

    /// Every agent hovering with its transmitter off.
    pub fn all_off(&self) -> JointControl {
        JointControl {
            actions: self
                .agents
                .iter()
                .map(|a| CandidateAction {
                    position: a.previous_position,
                    level: PowerLevel::Off,
                })
                .collect(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.agents.is_empty() {
            errs.push("control problem has no agents".to_string());
        }
        if self.tolerances_w.len() != self.agents.len() {
            errs.push("one interference tolerance per agent is required".to_string());
        }
        if self.tolerances_w.iter().any(|&t| !(t > 0.0)) {
            errs.push("interference tolerances must be positive".to_string());
        }
        if self.n_required < 1 || self.n_required > self.agents.len() {
            errs.push(format!("n_required must be within 1..={}", self.agents.len()));
        }
        for (j, a) in self.agents.iter().enumerate() {
            if a.positions.is_empty() || a.levels.is_empty() {
                errs.push(format!("agent {j} has an empty action set"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Detection probability of every agent for the target estimate, each
/// agent aiming at it from its hypothesised position.
pub fn detection_vector(joint: &JointControl, prob: &ControlProblem) -> Result<Vec<f64>> {
    let x = prob.target_estimate.ok_or(Error::MissingEstimate)?;
    joint
        .actions
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let cone = prob.sensing.cone(a.position, prob.axis_for(j, &a.position))?;
            Ok(detection_prob(&x, &a.position, a.level, &cone, &prob.sensing))
        })
        .collect()
}

/// `received[i][j]`: power agent `i` receives from agent `j` (zero on the
/// diagonal).
pub fn interference_matrix(joint: &JointControl, prob: &ControlProblem) -> Vec<Vec<f64>> {
    let n = joint.actions.len();
    let cones: Vec<_> = joint
        .actions
        .iter()
        .enumerate()
        .map(|(j, a)| prob.sensing.cone(a.position, prob.axis_for(j, &a.position)).ok())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let src = &joint.actions[j];
                    cones[j]
                        .as_ref()
                        .map(|c| received_power(&joint.actions[i].position, &src.position, src.level, c, &prob.sensing))
                        .unwrap_or(0.0)
                })
                .collect()
        })
        .collect()
}

/// True when the total interference every agent receives from its
/// teammates stays strictly below its tolerance.
pub fn interference_feasible(joint: &JointControl, prob: &ControlProblem) -> bool {
    interference_matrix(joint, prob)
        .iter()
        .zip(&prob.tolerances_w)
        .all(|(row, &tol)| row.iter().sum::<f64>() < tol)
}

/// Joint objective of an explicit joint control: probability that at least
/// `n_required` agents detect the estimate.
pub fn joint_objective(joint: &JointControl, prob: &ControlProblem) -> Result<f64> {
    Ok(objective_at_least_n(&detection_vector(joint, prob)?, prob.n_required))
}

/// Lexicographic order on positions.
pub(crate) fn cmp_position(a: &Vec3, b: &Vec3) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Best action for a lone agent: maximise its own detection probability
/// of `estimate`. Without an estimate the agent hovers with its
/// transmitter off. Ties go to the lower level, then the lexicographically
/// smaller position.
pub fn single_agent_control(
    agent: &Vec3,
    grid: &ControlGrid,
    levels: &[PowerLevel],
    estimate: Option<&Vec3>,
    sensing: &SensingParams,
) -> CandidateAction {
    let hover = CandidateAction {
        position: *agent,
        level: PowerLevel::Off,
    };
    let Some(x) = estimate else {
        return hover;
    };
    let mut best: Option<(f64, usize, CandidateAction)> = None;
    for u in admissible_controls(agent, grid) {
        // at the estimate itself any axis works: the apex is inside the cone
        let axis = aim_axis(&u, x).unwrap_or(Vec3::z());
        let Ok(cone) = sensing.cone(u, axis) else { continue };
        for (li, &level) in levels.iter().enumerate() {
            let pd = detection_prob(x, &u, level, &cone, sensing);
            let cand = CandidateAction { position: u, level };
            let better = match &best {
                None => true,
                Some((bp, bl, ba)) => match pd.total_cmp(bp) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => li.cmp(bl).then(cmp_position(&u, &ba.position)) == Ordering::Less,
                },
            };
            if better {
                best = Some((pd, li, cand));
            }
        }
    }
    best.map(|(_, _, a)| a).unwrap_or(hover)
}

/// Plan used when no target estimate exists: every agent hovers, keeps its
/// antenna axis and, in agent order, takes the strongest level that keeps
/// the team interference-feasible.
pub fn hold_and_listen(prob: &ControlProblem) -> JointControl {
    let mut joint = prob.all_off();
    for j in 0..prob.n_agents() {
        let levels = &prob.agents[j].levels;
        let mut order: Vec<usize> = (0..levels.len()).collect();
        order.sort_by(|&a, &b| levels[b].linear().total_cmp(&levels[a].linear()).then(b.cmp(&a)));
        for li in order {
            joint.actions[j].level = levels[li];
            if !prob.constraints_enabled || interference_feasible(&joint, prob) {
                break;
            }
            joint.actions[j].level = PowerLevel::Off;
        }
    }
    joint
}
