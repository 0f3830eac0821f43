//! Joint detection probabilities: the probability that exactly `m`, or at
//! least `n`, of `N` independent detectors fire.

/// Poisson-binomial distribution of the number of detections, computed
/// by the usual O(N^2) recurrence. Entry `m` is the probability of exactly
/// `m` detections. Handles `p_i = 1` without special casing.
pub fn poisson_binomial_pmf(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; p.len() + 1];
    pmf_into(p, &mut pmf);
    pmf
}

/// Allocation-free variant used by the solvers; `out.len()` must be
/// `p.len() + 1`.
#[inline]
pub(crate) fn pmf_into(p: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    out[0] = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        let qi = 1.0 - pi;
        for m in (1..=i + 1).rev() {
            out[m] = out[m] * qi + out[m - 1] * pi;
        }
        out[0] *= qi;
    }
}

/// Probability that exactly `m` detectors fire.
pub fn xi_exactly_m(p: &[f64], m: usize) -> f64 {
    if m > p.len() {
        return 0.0;
    }
    poisson_binomial_pmf(p)[m]
}

/// Probability that at least `n` detectors fire. `n = 0` is exactly one.
pub fn objective_at_least_n(p: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > p.len() {
        return 0.0;
    }
    poisson_binomial_pmf(p)[n..].iter().sum()
}

#[inline]
pub(crate) fn tail_into(p: &[f64], n: usize, scratch: &mut [f64]) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > p.len() {
        return 0.0;
    }
    pmf_into(p, scratch);
    scratch[n..].iter().sum()
}
