//! Reference solvers: a centralized GCPSO sharing the swarm arithmetic and
//! random streams with the distributed run, and exhaustive grid search.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Assignment, Problem};
use crate::runtime::{InitialPositions, RunError};
use crate::swarm::{AgentSwarmState, BestTracker, SwarmParams};
use crate::trace::{AnytimeTrace, TraceRow};

pub const DEFAULT_GRID_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid needs at least 2 points per dimension, got {0}")]
    TooFewPoints(usize),
    #[error("grid of {points}^{dims} points exceeds the cap of {cap}")]
    CapExceeded { points: usize, dims: usize, cap: u64 },
}

/// Same particles, same verdicts, same keyed draws as the distributed run;
/// fitness is computed on full assignments in constraint-list order.
pub fn centralized_gcpso(
    problem: &Problem,
    params: &SwarmParams,
    iterations: u64,
    init: Option<&InitialPositions>,
) -> Result<AnytimeTrace, RunError> {
    params.validate()?;
    if iterations == 0 {
        return Err(RunError::NoIterations);
    }
    if let Some(init) = init {
        init.validate(problem, params.particles)?;
    }
    let n = problem.len();
    let k = params.particles;
    let mut agents: Vec<AgentSwarmState> = (0..n)
        .map(|v| match init {
            Some(init) => AgentSwarmState::new(init.0[v].clone()),
            None => AgentSwarmState::random(params, &problem.agent(v).domain, v),
        })
        .collect();
    let mut tracker = BestTracker::new(k);
    let mut trace = AnytimeTrace::default();
    let mut assignment = vec![0.0; n];
    for t in 0..iterations {
        let fitness: Vec<f64> = (0..k)
            .map(|p| {
                for (slot, a) in assignment.iter_mut().zip(&agents) {
                    *slot = a.position[p];
                }
                problem.cost(&assignment)
            })
            .collect();
        let best = tracker.update(&fitness, t);
        trace.rows.push(TraceRow { iteration: t + 1, round: 0, gbest_fitness: best.gbest_fitness, envelopes: 0, scalars: 0 });
        for (v, a) in agents.iter_mut().enumerate() {
            a.apply(&best, params, v, &problem.agent(v).domain);
        }
    }
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub points_per_dim: usize,
    pub cap: u64,
}

impl GridSpec {
    pub fn new(points_per_dim: usize) -> Self {
        Self { points_per_dim, cap: DEFAULT_GRID_CAP }
    }
}

/// Exhaustive search over evenly spaced points (endpoints included) in every
/// domain. Returns the first minimizer in lexicographic order, with agent 0
/// as the most significant digit.
pub fn grid_search(problem: &Problem, grid: GridSpec) -> Result<(Assignment, f64), OracleError> {
    let m = grid.points_per_dim;
    let n = problem.len();
    if m < 2 {
        return Err(OracleError::TooFewPoints(m));
    }
    let total = (m as u64).checked_pow(n as u32).filter(|&t| t <= grid.cap);
    let Some(total) = total else {
        return Err(OracleError::CapExceeded { points: m, dims: n, cap: grid.cap });
    };
    let axes: Vec<Vec<f64>> = problem
        .agents()
        .iter()
        .map(|a| {
            let d = a.domain;
            (0..m)
                .map(|s| if s + 1 == m { d.upper } else { d.lower + d.width() * s as f64 / (m - 1) as f64 })
                .collect()
        })
        .collect();

    // chunks are reduced in index order, so ties resolve to the earliest point
    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK);
    let (best_idx, best_cost) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (start, end) = (c * CHUNK, ((c + 1) * CHUNK).min(total));
            let mut digits = decode(start, m, n);
            let mut x: Vec<f64> = digits.iter().enumerate().map(|(v, &d)| axes[v][d]).collect();
            let mut best = (start, f64::INFINITY);
            for idx in start..end {
                let cost = problem.cost(&x);
                if cost < best.1 {
                    best = (idx, cost);
                }
                // increment the mixed-radix counter, last agent fastest
                for v in (0..n).rev() {
                    digits[v] += 1;
                    if digits[v] < m {
                        x[v] = axes[v][digits[v]];
                        break;
                    }
                    digits[v] = 0;
                    x[v] = axes[v][0];
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, f64::INFINITY), |acc, b| if b.1 < acc.1 { b } else { acc });
    let values: Vec<f64> = decode(best_idx, m, n).iter().enumerate().map(|(v, &d)| axes[v][d]).collect();
    Ok((Assignment::from_vector(problem, &values), best_cost))
}

fn decode(mut idx: u64, m: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for v in (0..n).rev() {
        digits[v] = (idx % m as u64) as usize;
        idx /= m as u64;
    }
    digits
}
