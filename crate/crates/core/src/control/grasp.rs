//! Greedy randomized adaptive search over joint mobility and power
//! controls.

use std::cmp::Ordering;

use rand::Rng;

use super::objective::tail_into;
use super::{cmp_position, CandidateAction, ControlProblem, JointControl, NeighborMode};
use crate::error::{Error, Result};
use crate::models::{detection_prob, received_power, PowerLevel};

/// How many nearest positions the random neighbour mode draws from.
const RANDOM_NEIGHBOR_POOL: usize = 6;

/// Result of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspOutcome {
    pub joint: JointControl,
    /// Probability that at least `n_required` agents detect the estimate.
    pub objective: f64,
    /// False when no feasible joint was met and the all-off fallback was
    /// returned.
    pub found: bool,
    /// Best objective reached by the greedy randomized phase alone.
    pub greedy_best_objective: f64,
}

/// Index form of a joint control: `(position, level)` per agent.
pub(crate) type Choice = Vec<(usize, usize)>;

/// The problem with every per-action quantity tabulated once, so that a
/// joint evaluation is a handful of lookups.
pub(crate) struct Space<'a> {
    prob: &'a ControlProblem,
    n: usize,
    n_pos: Vec<usize>,
    n_lvl: Vec<usize>,
    /// `pd[j][p * n_lvl + l]`
    pd: Vec<Vec<f64>>,
    lin: Vec<Vec<f64>>,
    /// `gain[j][pj][i]` holds, for every position of agent `i`, the power
    /// agent `j` at `pj` delivers per transmitted watt.
    gain: Vec<Vec<Vec<Vec<f64>>>>,
    rank: Vec<Vec<usize>>,
    /// Other positions of each agent ordered by distance.
    near: Vec<Vec<Vec<usize>>>,
}

impl<'a> Space<'a> {
    pub(crate) fn new(prob: &'a ControlProblem) -> Result<Self> {
        prob.validate()?;
        let x = prob.target_estimate.ok_or(Error::MissingEstimate)?;
        let s = &prob.sensing;
        let n = prob.n_agents();
        let cones: Vec<Vec<_>> = prob
            .agents
            .iter()
            .enumerate()
            .map(|(j, a)| {
                a.positions
                    .iter()
                    .map(|u| s.cone(*u, prob.axis_for(j, u)).ok())
                    .collect()
            })
            .collect();
        let pd = prob
            .agents
            .iter()
            .zip(&cones)
            .map(|(a, cs)| {
                let mut row = Vec::with_capacity(a.positions.len() * a.levels.len());
                for (u, c) in a.positions.iter().zip(cs) {
                    for &l in &a.levels {
                        row.push(c.as_ref().map_or(0.0, |c| detection_prob(&x, u, l, c, s)));
                    }
                }
                row
            })
            .collect();
        let unit = PowerLevel::Dbw(0.0);
        let gain = (0..n)
            .map(|j| {
                prob.agents[j]
                    .positions
                    .iter()
                    .zip(&cones[j])
                    .map(|(uj, c)| {
                        (0..n)
                            .map(|i| {
                                if i == j {
                                    return Vec::new();
                                }
                                prob.agents[i]
                                    .positions
                                    .iter()
                                    .map(|ui| c.as_ref().map_or(0.0, |c| received_power(ui, uj, unit, c, s)))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let rank = prob
            .agents
            .iter()
            .map(|a| {
                let mut order: Vec<usize> = (0..a.positions.len()).collect();
                order.sort_by(|&p, &q| cmp_position(&a.positions[p], &a.positions[q]));
                let mut rank = vec![0; order.len()];
                for (r, p) in order.into_iter().enumerate() {
                    rank[p] = r;
                }
                rank
            })
            .collect::<Vec<Vec<usize>>>();
        let near = prob
            .agents
            .iter()
            .zip(&rank)
            .map(|(a, rk)| {
                (0..a.positions.len())
                    .map(|p| {
                        let mut others: Vec<usize> = (0..a.positions.len()).filter(|&q| q != p).collect();
                        others.sort_by(|&q, &r| {
                            let dq = (a.positions[q] - a.positions[p]).norm_squared();
                            let dr = (a.positions[r] - a.positions[p]).norm_squared();
                            dq.total_cmp(&dr).then(rk[q].cmp(&rk[r]))
                        });
                        others
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            prob,
            n,
            n_pos: prob.agents.iter().map(|a| a.positions.len()).collect(),
            n_lvl: prob.agents.iter().map(|a| a.levels.len()).collect(),
            pd,
            lin: prob.agents.iter().map(|a| a.levels.iter().map(|l| l.linear()).collect()).collect(),
            gain,
            rank,
            near,
        })
    }

    pub(crate) fn n_agents(&self) -> usize {
        self.n
    }

    pub(crate) fn actions_of(&self, j: usize) -> usize {
        self.n_pos[j] * self.n_lvl[j]
    }

    /// Splits a flat per-agent action index into `(position, level)`.
    pub(crate) fn split(&self, j: usize, k: usize) -> (usize, usize) {
        (k / self.n_lvl[j], k % self.n_lvl[j])
    }

    pub(crate) fn objective(&self, c: &[(usize, usize)], p: &mut Vec<f64>, scratch: &mut Vec<f64>) -> f64 {
        p.clear();
        p.extend(c.iter().enumerate().map(|(j, &(pi, li))| self.pd[j][pi * self.n_lvl[j] + li]));
        scratch.resize(self.n + 1, 0.0);
        tail_into(p, self.prob.n_required, scratch)
    }

    pub(crate) fn feasible(&self, c: &[(usize, usize)]) -> bool {
        if !self.prob.constraints_enabled {
            return true;
        }
        (0..self.n).all(|i| {
            let pi = c[i].0;
            let mut total = 0.0;
            for (j, &(pj, lj)) in c.iter().enumerate() {
                if j != i {
                    total += self.lin[j][lj] * self.gain[j][pj][i][pi];
                }
            }
            total < self.prob.tolerances_w[i]
        })
    }

    /// Solver preference: higher objective, then lower power indices in
    /// agent order, then lexicographically smaller positions in agent
    /// order. `Less` means `a` is preferred.
    pub(crate) fn prefer(&self, a_obj: f64, a: &[(usize, usize)], b_obj: f64, b: &[(usize, usize)]) -> Ordering {
        b_obj
            .total_cmp(&a_obj)
            .then_with(|| a.iter().map(|x| x.1).cmp(b.iter().map(|x| x.1)))
            .then_with(|| {
                let ra = a.iter().enumerate().map(|(j, x)| self.rank[j][x.0]);
                let rb = b.iter().enumerate().map(|(j, x)| self.rank[j][x.0]);
                ra.cmp(rb)
            })
    }

    pub(crate) fn to_joint(&self, c: &[(usize, usize)]) -> JointControl {
        JointControl {
            actions: c
                .iter()
                .enumerate()
                .map(|(j, &(p, l))| CandidateAction {
                    position: self.prob.agents[j].positions[p],
                    level: self.prob.agents[j].levels[l],
                })
                .collect(),
        }
    }

    /// Index form of the all-off joint at the previous positions, when
    /// that joint lies in the action space.
    fn all_off_choice(&self) -> Option<Choice> {
        self.prob
            .agents
            .iter()
            .map(|a| {
                let p = a.positions.iter().position(|u| *u == a.previous_position)?;
                let l = a.levels.iter().position(|l| l.is_off())?;
                Some((p, l))
            })
            .collect()
    }

    /// Outcome for the case where nothing feasible was met.
    pub(crate) fn fallback(&self) -> GraspOutcome {
        let joint = self.prob.all_off();
        let objective = super::joint_objective(&joint, self.prob).unwrap_or(0.0);
        GraspOutcome {
            joint,
            objective,
            found: false,
            greedy_best_objective: objective,
        }
    }
}

/// Best incumbent tracker shared by the phases.
struct Best {
    choice: Option<Choice>,
    obj: f64,
}

impl Best {
    fn none() -> Self {
        Self { choice: None, obj: f64::NEG_INFINITY }
    }

    /// Adopts `c` when it is preferred and feasible. The objective test
    /// comes first since it is far cheaper than the interference sums.
    fn offer(&mut self, space: &Space, c: &[(usize, usize)], obj: f64) -> bool {
        let preferred = match &self.choice {
            None => true,
            Some(b) => space.prefer(obj, c, self.obj, b) == Ordering::Less,
        };
        if preferred && space.feasible(c) {
            match &mut self.choice {
                Some(b) => b.copy_from_slice(c),
                None => self.choice = Some(c.to_vec()),
            }
            self.obj = obj;
            return true;
        }
        false
    }
}

fn greedy_phase<R: Rng + ?Sized>(space: &Space, n_s: usize, rng: &mut R) -> Option<(Choice, f64)> {
    let mut best = Best::none();
    let mut c: Choice = vec![(0, 0); space.n_agents()];
    let (mut p, mut scratch) = (Vec::new(), Vec::new());
    for _ in 0..n_s {
        for (j, slot) in c.iter_mut().enumerate() {
            *slot = space.split(j, rng.random_range(0..space.actions_of(j)));
        }
        let obj = space.objective(&c, &mut p, &mut scratch);
        best.offer(space, &c, obj);
    }
    best.choice.map(|c| (c, best.obj))
}

fn local_phase<R: Rng + ?Sized>(space: &Space, start: Choice, start_obj: f64, rng: &mut R) -> (Choice, f64) {
    let mut best = Best { choice: Some(start), obj: start_obj };
    let (mut p, mut scratch) = (Vec::new(), Vec::new());
    for j in 0..space.n_agents() {
        let mut cur = best.choice.clone().expect("incumbent is always set");
        let (pj, lj) = cur[j];
        let near = &space.near[j][pj];
        let mut positions = vec![pj];
        match space.prob.neighbor_mode {
            NeighborMode::Nearest => positions.extend(near.iter().take(2)),
            NeighborMode::Random => {
                let pool = near.len().min(RANDOM_NEIGHBOR_POOL);
                let k = pool.min(2);
                positions.extend(rand::seq::index::sample(rng, pool, k).iter().map(|i| near[i]));
            }
        }
        let top = space.n_lvl[j] - 1;
        let mut levels = vec![lj.saturating_sub(1), lj, (lj + 1).min(top)];
        levels.dedup();
        for &u in &positions {
            for &l in &levels {
                cur[j] = (u, l);
                let obj = space.objective(&cur, &mut p, &mut scratch);
                best.offer(space, &cur, obj);
            }
        }
    }
    (best.choice.expect("incumbent is always set"), best.obj)
}

/// Best feasible joint among `n_s` uniform samples of the joint action
/// space. When no sample is feasible the all-off joint at the previous
/// positions is returned with `found = false`.
pub fn grasp_greedy_randomized<R: Rng + ?Sized>(prob: &ControlProblem, n_s: usize, rng: &mut R) -> Result<GraspOutcome> {
    let space = Space::new(prob)?;
    Ok(match greedy_phase(&space, n_s, rng) {
        Some((c, obj)) => GraspOutcome {
            joint: space.to_joint(&c),
            objective: obj,
            found: true,
            greedy_best_objective: obj,
        },
        None => space.fallback(),
    })
}

/// One pass over the agents; each agent's action is replaced by the best
/// feasible member of its neighbourhood (two nearby positions and the
/// adjacent power levels). The input must be in the action space; the
/// output is never worse than the input.
pub fn grasp_local_search<R: Rng + ?Sized>(joint: &JointControl, prob: &ControlProblem, rng: &mut R) -> Result<GraspOutcome> {
    let space = Space::new(prob)?;
    let start: Option<Choice> = joint
        .actions
        .iter()
        .zip(&prob.agents)
        .map(|(a, opts)| {
            let p = opts.positions.iter().position(|u| *u == a.position)?;
            let l = opts.levels.iter().position(|l| *l == a.level)?;
            Some((p, l))
        })
        .collect();
    let start = start.ok_or(Error::Validation(vec!["joint control is outside the action space".into()]))?;
    let (mut p, mut scratch) = (Vec::new(), Vec::new());
    let obj = space.objective(&start, &mut p, &mut scratch);
    let found = space.feasible(&start);
    let (c, obj) = local_phase(&space, start, obj, rng);
    Ok(GraspOutcome {
        joint: space.to_joint(&c),
        objective: obj,
        found,
        greedy_best_objective: obj,
    })
}

/// `n_i` rounds of greedy randomized construction followed by local
/// search; returns the best feasible joint seen.
pub fn grasp_solve<R: Rng + ?Sized>(prob: &ControlProblem, n_s: usize, n_i: usize, rng: &mut R) -> Result<GraspOutcome> {
    if n_s == 0 || n_i == 0 {
        return Err(Error::Validation(vec!["n_s and n_I must be at least 1".into()]));
    }
    let space = Space::new(prob)?;
    let mut best = Best::none();
    let mut greedy_best = f64::NEG_INFINITY;
    for _ in 0..n_i {
        let start = match greedy_phase(&space, n_s, rng) {
            Some((c, obj)) => {
                greedy_best = greedy_best.max(obj);
                Some((c, obj))
            }
            None => space.all_off_choice().map(|c| {
                let (mut p, mut s) = (Vec::new(), Vec::new());
                let obj = space.objective(&c, &mut p, &mut s);
                (c, obj)
            }),
        };
        if let Some((c, obj)) = start {
            let (c, obj) = local_phase(&space, c, obj, rng);
            best.offer(&space, &c, obj);
        }
    }
    Ok(match best.choice {
        Some(c) => GraspOutcome {
            joint: space.to_joint(&c),
            objective: best.obj,
            found: true,
            greedy_best_objective: if greedy_best.is_finite() { greedy_best } else { best.obj },
        },
        None => space.fallback(),
    })
}

/// Picks the team plan among the agents' local solutions: highest
/// objective among those that found a feasible joint, ties to the lowest
/// agent id. Returns the winning agent and its outcome.
pub fn select_best(outcomes: &[GraspOutcome]) -> Option<(usize, &GraspOutcome)> {
    let mut best: Option<(usize, &GraspOutcome)> = None;
    for (j, o) in outcomes.iter().enumerate() {
        let better = match best {
            None => true,
            Some((_, b)) => (o.found, o.objective) > (b.found, b.objective),
        };
        if better {
            best = Some((j, o));
        }
    }
    best
}
