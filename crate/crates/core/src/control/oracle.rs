//! Exhaustive reference solver for small joint action spaces.

use std::cmp::Ordering;

use super::grasp::{Choice, GraspOutcome, Space};
use super::ControlProblem;
use crate::error::{Error, Result};

/// Largest joint space the oracle enumerates by default.
pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

/// Enumerates every joint control and returns the feasible one the solvers
/// would prefer: maximal objective under the same tie-break as GRASP.
/// Falls back to all-off when nothing is feasible.
pub fn exhaustive_oracle(prob: &ControlProblem, cap: u128) -> Result<GraspOutcome> {
    let size = prob.space_size();
    if size > cap {
        return Err(Error::SpaceTooLarge { size, cap });
    }
    let space = Space::new(prob)?;
    let n = space.n_agents();
    let mut digits = vec![0usize; n];
    let mut c: Choice = vec![(0, 0); n];
    let mut best: Option<(Choice, f64)> = None;
    let (mut p, mut scratch) = (Vec::new(), Vec::new());
    loop {
        for (j, slot) in c.iter_mut().enumerate() {
            *slot = space.split(j, digits[j]);
        }
        let obj = space.objective(&c, &mut p, &mut scratch);
        let preferred = best
            .as_ref()
            .is_none_or(|(b, bo)| space.prefer(obj, &c, *bo, b) == Ordering::Less);
        if preferred && space.feasible(&c) {
            best = Some((c.clone(), obj));
        }
        // mixed-radix increment, last agent fastest
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(match best {
                    Some((c, obj)) => GraspOutcome {
                        joint: space.to_joint(&c),
                        objective: obj,
                        found: true,
                        greedy_best_objective: obj,
                    },
                    None => space.fallback(),
                });
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < space.actions_of(j) {
                break;
            }
            digits[j] = 0;
        }
    }
}
