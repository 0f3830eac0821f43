//! Tracking error and power accounting over simulation traces.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sim::Trace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    pub order: f64,
    /// Cut-off distance (m).
    pub cutoff: f64,
}

impl Default for OspaParams {
    fn default() -> Self {
        Self { order: 2.0, cutoff: 10.0 }
    }
}

/// OSPA distance between sets of at most one point each. Empty pairs
/// score zero, a cardinality mismatch scores the cut-off, and two points
/// score their distance capped at the cut-off (the order drops out for
/// singletons).
pub fn ospa(truth: Option<&Vec3>, est: Option<&Vec3>, params: &OspaParams) -> f64 {
    match (truth, est) {
        (None, None) => 0.0,
        (Some(a), Some(b)) => (a - b).norm().min(params.cutoff),
        _ => params.cutoff,
    }
}

/// Agent `victim` received at least the threshold from agent `source` at
/// `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JammingEvent {
    pub step: usize,
    pub victim: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JammingReport {
    pub events: Vec<JammingEvent>,
    /// Events per victim agent.
    pub per_agent: Vec<usize>,
}

impl JammingReport {
    pub fn mean_per_agent(&self) -> f64 {
        if self.per_agent.is_empty() {
            return 0.0;
        }
        self.per_agent.iter().sum::<usize>() as f64 / self.per_agent.len() as f64
    }
}

/// Every `(step, victim, source)` whose received power reaches
/// `threshold_w`, in step, victim, source order.
pub fn jamming_incidents(trace: &Trace, threshold_w: f64) -> JammingReport {
    let mut report = JammingReport {
        events: Vec::new(),
        per_agent: vec![0; trace.n_agents()],
    };
    for s in &trace.steps {
        for (i, row) in s.received_w.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j && w >= threshold_w {
                    report.events.push(JammingEvent { step: s.step, victim: i, source: j });
                    report.per_agent[i] += 1;
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSummary {
    /// Mean over steps of the power the target receives (W).
    pub mean_target_received_w: f64,
    /// Mean over steps and agents of the interference an agent receives (W).
    pub mean_agent_interference_w: f64,
    /// Mean over steps and agents of the transmitted power (W).
    pub mean_transmit_w: f64,
}

pub fn power_summary(trace: &Trace) -> Result<PowerSummary> {
    if trace.is_empty() {
        return Err(Error::EmptyInput("trace has no steps"));
    }
    let n_steps = trace.len() as f64;
    let n_cells = trace.steps.iter().map(|s| s.agents.len()).sum::<usize>().max(1) as f64;
    Ok(PowerSummary {
        mean_target_received_w: trace.steps.iter().map(|s| s.target_received_w).sum::<f64>() / n_steps,
        mean_agent_interference_w: trace
            .steps
            .iter()
            .flat_map(|s| s.agents.iter().map(|a| a.interference_w))
            .sum::<f64>()
            / n_cells,
        mean_transmit_w: trace
            .steps
            .iter()
            .flat_map(|s| s.agents.iter().map(|a| a.level.linear()))
            .sum::<f64>()
            / n_cells,
    })
}

/// Mean OSPA over all steps.
pub fn mean_ospa(trace: &Trace) -> Option<f64> {
    if trace.is_empty() {
        return None;
    }
    Some(trace.steps.iter().map(|s| s.ospa_m).sum::<f64>() / trace.len() as f64)
}
