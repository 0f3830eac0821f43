//! Trace and summary CSV files.
//!
//! Trace columns: `step, truth_present, truth_x .. truth_vz`, then per
//! agent `k` (1-based) `a{k}_x, a{k}_y, a{k}_z, a{k}_level_dbw,
//! a{k}_axis_x .. a{k}_axis_z, a{k}_existence, a{k}_est_x .. a{k}_est_vz,
//! a{k}_interference_w`, then `fused_existence, fused_x .. fused_vz,
//! target_received_w, ospa_m, plan`. Levels are `OFF` or a dBW number, missing
//! states are empty cells, `plan` is `solved`, `fallback` or `search`,
//! and floats use the shortest decimal that reads
//! back to the same value.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::metrics::JammingEvent;
use crate::models::{PowerLevel, TargetState};
use crate::sim::{PlanMode, StepRecord, Trace};

const STATE: [&str; 6] = ["x", "y", "z", "vx", "vy", "vz"];

pub fn trace_header(n_agents: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["step".into(), "truth_present".into()];
    h.extend(STATE.iter().map(|c| format!("truth_{c}")));
    for k in 1..=n_agents {
        h.extend(["x", "y", "z"].iter().map(|c| format!("a{k}_{c}")));
        h.push(format!("a{k}_level_dbw"));
        h.extend(["x", "y", "z"].iter().map(|c| format!("a{k}_axis_{c}")));
        h.push(format!("a{k}_existence"));
        h.extend(STATE.iter().map(|c| format!("a{k}_est_{c}")));
        h.push(format!("a{k}_interference_w"));
    }
    h.push("fused_existence".into());
    h.extend(STATE.iter().map(|c| format!("fused_{c}")));
    h.push("target_received_w".into());
    h.push("ospa_m".into());
    h.push("plan".into());
    h
}

/// One agent's columns of a trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRow {
    pub position: Vec3,
    pub level: PowerLevel,
    pub axis: Vec3,
    pub existence: f64,
    pub estimate: Option<TargetState>,
    pub interference_w: f64,
}

/// Everything a trace CSV row holds.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub truth_present: bool,
    pub truth: Option<TargetState>,
    pub agents: Vec<AgentRow>,
    pub fused_existence: f64,
    pub fused: Option<TargetState>,
    pub target_received_w: f64,
    pub ospa_m: f64,
    pub plan: PlanMode,
}

impl From<&StepRecord> for TraceRow {
    fn from(s: &StepRecord) -> Self {
        Self {
            step: s.step,
            truth_present: s.truth_present,
            truth: s.truth,
            agents: s
                .agents
                .iter()
                .map(|a| AgentRow {
                    position: a.position,
                    level: a.level,
                    axis: a.axis,
                    existence: a.existence,
                    estimate: a.estimate,
                    interference_w: a.interference_w,
                })
                .collect(),
            fused_existence: s.fused_existence,
            fused: s.fused,
            target_received_w: s.target_received_w,
            ospa_m: s.ospa_m,
            plan: s.plan,
        }
    }
}

fn push_state(out: &mut Vec<String>, x: &Option<TargetState>) {
    match x {
        Some(x) => out.extend(x.to_array().iter().map(f64::to_string)),
        None => out.extend(std::iter::repeat_n(String::new(), 6)),
    }
}

fn push_vec(out: &mut Vec<String>, v: &Vec3) {
    out.extend(v.iter().map(f64::to_string));
}

fn row_fields(s: &StepRecord) -> Vec<String> {
    let mut f = vec![s.step.to_string(), u8::from(s.truth_present).to_string()];
    push_state(&mut f, &s.truth);
    for a in &s.agents {
        push_vec(&mut f, &a.position);
        f.push(a.level.to_string());
        push_vec(&mut f, &a.axis);
        f.push(a.existence.to_string());
        push_state(&mut f, &a.estimate);
        f.push(a.interference_w.to_string());
    }
    f.push(s.fused_existence.to_string());
    push_state(&mut f, &s.fused);
    f.push(s.target_received_w.to_string());
    f.push(s.ospa_m.to_string());
    f.push(s.plan.to_string());
    f
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.into(), source }
}

pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(trace_header(trace.n_agents())).map_err(csv_err(path))?;
    for s in &trace.steps {
        w.write_record(row_fields(s)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Trace CSV as a string, same bytes as [`write_trace_csv`].
pub fn trace_csv_string(trace: &Trace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(trace_header(trace.n_agents()));
    for s in &trace.steps {
        let _ = w.write_record(row_fields(s));
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

struct Cells<'a> {
    rec: &'a csv::StringRecord,
    at: usize,
    path: &'a Path,
    line: u64,
}

impl<'a> Cells<'a> {
    fn bad(&self, what: &str) -> Error {
        Error::TraceFormat {
            path: self.path.into(),
            message: format!("line {}, column {}: {what}", self.line, self.at + 1),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        let rec: &'a csv::StringRecord = self.rec;
        let v = rec.get(self.at).ok_or_else(|| self.bad("row too short"))?;
        self.at += 1;
        Ok(v)
    }

    fn f64(&mut self) -> Result<f64> {
        let v = self.next()?;
        v.parse().map_err(|_| {
            self.at -= 1;
            self.bad(&format!("not a number: {v:?}"))
        })
    }

    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    fn state(&mut self) -> Result<Option<TargetState>> {
        let start = self.at;
        let cells: Vec<String> = (0..6).map(|_| self.next().map(str::to_owned)).collect::<Result<_>>()?;
        if cells.iter().all(String::is_empty) {
            return Ok(None);
        }
        self.at = start;
        let mut a = [0.0; 6];
        for v in &mut a {
            *v = self.f64()?;
        }
        Ok(Some(TargetState::from_array(a)))
    }

    fn level(&mut self) -> Result<PowerLevel> {
        let v = self.next()?;
        if v == "OFF" {
            return Ok(PowerLevel::Off);
        }
        v.parse().map(PowerLevel::Dbw).map_err(|_| {
            self.at -= 1;
            self.bad(&format!("not a power level: {v:?}"))
        })
    }
}

/// Reads a trace CSV back; every float round-trips exactly.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    let fixed = 8 + 7 + 3;
    let per_agent = 3 + 1 + 3 + 1 + 6 + 1;
    if header.len() < fixed || (header.len() - fixed) % per_agent != 0 {
        return Err(Error::TraceFormat { path: path.into(), message: format!("unexpected column count {}", header.len()) });
    }
    let n = (header.len() - fixed) / per_agent;
    if header.iter().ne(trace_header(n).iter().map(String::as_str)) {
        return Err(Error::TraceFormat { path: path.into(), message: "header does not match the trace schema".into() });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut c = Cells { rec: &rec, at: 0, path, line };
        let step = c.next()?.parse().map_err(|_| c.bad("bad step index"))?;
        let truth_present = match c.next()? {
            "1" => true,
            "0" => false,
            _ => return Err(c.bad("truth_present must be 0 or 1")),
        };
        let truth = c.state()?;
        let mut agents = Vec::with_capacity(n);
        for _ in 0..n {
            agents.push(AgentRow {
                position: c.vec3()?,
                level: c.level()?,
                axis: c.vec3()?,
                existence: c.f64()?,
                estimate: c.state()?,
                interference_w: c.f64()?,
            });
        }
        rows.push(TraceRow {
            step,
            truth_present,
            truth,
            agents,
            fused_existence: c.f64()?,
            fused: c.state()?,
            target_received_w: c.f64()?,
            ospa_m: c.f64()?,
            plan: {
                let v = c.next()?;
                v.parse().map_err(|_| c.bad(&format!("unknown plan mode {v:?}")))?
            },
        });
    }
    Ok(rows)
}

/// One row per jamming event: `step, victim, source, power_w` with
/// 1-based agent numbers.
pub fn write_jamming_csv(trace: &Trace, events: &[JammingEvent], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["step", "victim", "source", "power_w"]).map_err(csv_err(path))?;
    for e in events {
        let power = trace.steps.iter().find(|s| s.step == e.step).map_or(0.0, |s| s.received_w[e.victim][e.source]);
        w.write_record([e.step.to_string(), (e.victim + 1).to_string(), (e.source + 1).to_string(), power.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads the jamming events of a file written by [`write_jamming_csv`]
/// back as 0-based events.
pub fn read_jamming_csv(path: &Path) -> Result<Vec<JammingEvent>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let num = |k: usize| -> Result<usize> {
            rec.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::TraceFormat { path: path.into(), message: format!("bad jamming row {rec:?}") })
        };
        out.push(JammingEvent { step: num(0)?, victim: num(1)? - 1, source: num(2)? - 1 });
    }
    Ok(out)
}

/// One summary record.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub configuration: String,
    pub metric: String,
    pub value: f64,
}

pub fn write_summary_csv(records: &[SummaryRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["configuration", "metric", "value"]).map_err(csv_err(path))?;
    for r in records {
        w.write_record([r.configuration.as_str(), r.metric.as_str(), &r.value.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = || Error::TraceFormat { path: path.into(), message: format!("bad summary row {rec:?}") };
        out.push(SummaryRecord {
            configuration: rec.get(0).ok_or_else(bad)?.to_string(),
            metric: rec.get(1).ok_or_else(bad)?.to_string(),
            value: rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::step;

    fn sample() -> Trace {
        let mut a = step(1, vec![vec![0.0, 1.0 / 3.0], vec![2e-310, 0.0]], &[PowerLevel::Dbw(-7.0), PowerLevel::Off], 0.1 + 0.2);
        a.truth = Some(TargetState::from_array([20.0, 20.0, 20.0, 1.5, 2.0, 1.7]));
        a.truth_present = true;
        a.agents[0].estimate = Some(TargetState::from_array([1e-17, -0.0, 3.0, f64::MAX, 1.0 / 7.0, -2.5]));
        a.agents[1].existence = 0.1 + 0.7;
        a.fused = Some(TargetState::from_array([0.3; 6]));
        a.fused_existence = 0.6;
        let b = step(2, vec![vec![0.0, 0.0], vec![0.0, 0.0]], &[PowerLevel::Off, PowerLevel::Dbw(0.5)], 0.0);
        Trace { steps: vec![a, b] }
    }

    #[test]
    fn header_shape() {
        let h = trace_header(3);
        assert_eq!(h.len(), 8 + 3 * 15 + 10);
        assert_eq!(&h[..3], &["step", "truth_present", "truth_x"]);
        assert_eq!(h[8], "a1_x");
        assert_eq!(h[11], "a1_level_dbw");
        assert_eq!(h.last().unwrap(), "plan");
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let tr = sample();
        write_trace_csv(&tr, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, trace_csv_string(&tr));
        assert_eq!(text.lines().count(), 3);
        let rows = read_trace_csv(&p).unwrap();
        let expected: Vec<TraceRow> = tr.steps.iter().map(TraceRow::from).collect();
        assert_eq!(rows, expected);
        let e = rows[0].agents[0].estimate.unwrap().to_array();
        assert_eq!(e[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn absent_values_are_empty_cells() {
        let text = trace_csv_string(&sample());
        let row2 = text.lines().nth(2).unwrap();
        assert!(row2.starts_with("2,0,,,,,,,"), "{row2}");
        assert!(row2.contains(",OFF,"));
    }

    #[test]
    fn malformed_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_trace_csv(&p), Err(Error::TraceFormat { .. })));
        let mut text = trace_csv_string(&sample());
        text = text.replacen("OFF", "LOUD", 1);
        std::fs::write(&p, text).unwrap();
        assert!(matches!(read_trace_csv(&p), Err(Error::TraceFormat { .. })));
    }

    #[test]
    fn jamming_and_summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let tr = sample();
        let ev = crate::metrics::jamming_incidents(&tr, 1e-4).events;
        let p = dir.path().join("j.csv");
        write_jamming_csv(&tr, &ev, &p).unwrap();
        assert_eq!(read_jamming_csv(&p).unwrap(), ev);
        assert!(std::fs::read_to_string(&p).unwrap().contains("1,1,2,0.3333333333333333"));

        let recs = vec![SummaryRecord { configuration: "c1".into(), metric: "m".into(), value: 0.1 + 0.2 }];
        let p = dir.path().join("s.csv");
        write_summary_csv(&recs, &p).unwrap();
        assert_eq!(read_summary_csv(&p).unwrap(), recs);
    }
}
