//! Keyed random streams derived from one master seed.
//!
//! Every stream is ChaCha8 seeded with `master_seed` and switched to its own
//! stream id, so draws from one stream never shift another and the mapping
//! from key to stream does not depend on the order streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id of the ground-truth process (target motion, presence,
/// measurement noise and clutter).
pub const TRUTH_STREAM: u64 = u64::MAX;
/// Stream id of the planner.
pub const SOLVER_STREAM: u64 = u64::MAX - 1;
/// Stream id used by experiments to spawn targets and agents.
pub const SPAWN_STREAM: u64 = u64::MAX - 2;

/// Stream `key` of `master_seed`. Agent `j` uses key `j`.
pub fn stream(master_seed: u64, key: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(master_seed);
    r.set_stream(key);
    r
}

#[derive(Debug, Clone)]
pub struct RngStreams {
    pub agents: Vec<ChaCha8Rng>,
    pub truth: ChaCha8Rng,
    pub solver: ChaCha8Rng,
}

/// One stream per agent plus the truth and solver streams.
pub fn derive_rng_streams(master_seed: u64, n_agents: usize) -> RngStreams {
    RngStreams {
        agents: (0..n_agents as u64).map(|j| stream(master_seed, j)).collect(),
        truth: stream(master_seed, TRUTH_STREAM),
        solver: stream(master_seed, SOLVER_STREAM),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(r: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
        (0..n).map(|_| r.random()).collect()
    }

    #[test]
    fn same_seed_same_outputs() {
        let mut a = derive_rng_streams(42, 3);
        let mut b = derive_rng_streams(42, 3);
        for j in 0..3 {
            assert_eq!(draws(&mut a.agents[j], 16), draws(&mut b.agents[j], 16));
        }
        assert_eq!(draws(&mut a.truth, 16), draws(&mut b.truth, 16));
        assert_eq!(draws(&mut a.solver, 16), draws(&mut b.solver, 16));
    }

    #[test]
    fn streams_differ() {
        let mut s = derive_rng_streams(7, 4);
        let mut all: Vec<Vec<u64>> = s.agents.iter_mut().map(|r| draws(r, 64)).collect();
        all.push(draws(&mut s.truth, 64));
        all.push(draws(&mut s.solver, 64));
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let same = all[i].iter().zip(&all[j]).filter(|(a, b)| a == b).count();
                assert_eq!(same, 0, "streams {i} and {j} collide");
            }
        }
    }

    #[test]
    fn keyed_not_ordered() {
        // creating more agents, or creating them later, does not change a stream
        let mut few = derive_rng_streams(3, 1);
        let mut many = derive_rng_streams(3, 5);
        assert_eq!(draws(&mut few.agents[0], 8), draws(&mut many.agents[0], 8));
        assert_eq!(draws(&mut few.truth, 8), draws(&mut stream(3, TRUTH_STREAM), 8));
    }
}
