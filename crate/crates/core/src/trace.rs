//! Anytime traces and their CSV form.

use std::fmt::Write as _;

use thiserror::Error;

pub const TRACE_HEADER: &str = "iteration,round,gbest_fitness,envelopes,scalars";

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace header mismatch: {0:?}")]
    Header(String),
    #[error("trace line {line}: {msg}")]
    Row { line: usize, msg: String },
}

/// One completed iteration as seen by the root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    /// 1-based count of completed iterations.
    pub iteration: u64,
    /// Simulation round in which the root finished this iteration's verdict.
    pub round: u64,
    pub gbest_fitness: f64,
    /// Envelopes sent network-wide by the end of that round.
    pub envelopes: u64,
    pub scalars: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnytimeTrace {
    pub rows: Vec<TraceRow>,
}

impl AnytimeTrace {
    pub fn final_gbest(&self) -> Option<f64> {
        self.rows.last().map(|r| r.gbest_fitness)
    }

    pub fn gbest_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gbest_fitness).collect()
    }

    /// Number of iterations whose global best is above the previous one.
    pub fn monotonicity_violations(&self) -> usize {
        self.rows.windows(2).filter(|w| w[1].gbest_fitness > w[0].gbest_fitness).count()
    }

    /// Largest per-iteration difference of global-best fitness, relative to
    /// `max(1, |a|)`. `None` when the lengths differ.
    pub fn max_relative_gap(&self, other: &AnytimeTrace) -> Option<f64> {
        if self.rows.len() != other.rows.len() {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| (a.gbest_fitness - b.gbest_fitness).abs() / a.gbest_fitness.abs().max(1.0))
                .fold(0.0, f64::max),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * (self.rows.len() + 1));
        s.push_str(TRACE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.iteration, r.round, r.gbest_fitness, r.envelopes, r.scalars);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != TRACE_HEADER {
            return Err(TraceError::Header(header.to_string()));
        }
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let bad = |msg: String| TraceError::Row { line: line_no, msg };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(format!("expected 5 fields, got {}", f.len())));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
            rows.push(TraceRow {
                iteration: int(f[0])?,
                round: int(f[1])?,
                gbest_fitness: f[2].parse().map_err(|e| bad(format!("{:?}: {e}", f[2])))?,
                envelopes: int(f[3])?,
                scalars: int(f[4])?,
            });
        }
        Ok(Self { rows })
    }
}
