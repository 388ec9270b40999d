//! Batch runs over generated instances.
//!
//! Instance `k` of a batch uses generator seed `seed + k` and solver seed
//! `params.seed + k`, so any single row can be reproduced in isolation.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::generator::{generate, GenSpec, Topology};
use crate::model::ContinuousDomain;
use crate::runtime::run_with;
use crate::swarm::SwarmParams;

pub const BENCH_HEADER: &str = "instance,n,topology,seed,final_cost,iterations,rounds,envelopes,wall_ms";
pub const SUMMARY_HEADER: &str =
    "n,topology,instances,failures,mean_cost,sd_cost,mean_wall_ms,mean_envelopes_per_iteration";

/// `<topology>_n<N>_s<seed>_<k>`
pub fn instance_name(topology: &Topology, n: usize, seed: u64, k: usize) -> String {
    format!("{}_n{n}_s{seed}_{k}", topology.tag())
}

/// Generator spec of instance `k` in a batch.
pub fn instance_spec(
    topology: Topology,
    n: usize,
    coeff_range: (f64, f64),
    domain: ContinuousDomain,
    seed: u64,
    k: usize,
) -> GenSpec {
    GenSpec { topology, n, coeff_range, domain, seed: seed.wrapping_add(k as u64) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub topology: Topology,
    pub agent_counts: Vec<usize>,
    pub instances: usize,
    pub coeff_range: (f64, f64),
    pub domain: ContinuousDomain,
    pub seed: u64,
    pub params: SwarmParams,
    pub iterations: u64,
    /// Per-instance trace CSVs are written here when set.
    pub trace_dir: Option<PathBuf>,
}

impl BenchConfig {
    pub fn new(topology: Topology, agent_counts: Vec<usize>, instances: usize, params: SwarmParams, iterations: u64) -> Self {
        Self {
            topology,
            agent_counts,
            instances,
            coeff_range: (-5.0, 5.0),
            domain: ContinuousDomain { lower: -50.0, upper: 50.0 },
            seed: 0,
            params,
            iterations,
            trace_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceResult {
    pub instance: usize,
    pub n: usize,
    pub topology: &'static str,
    pub seed: u64,
    pub final_cost: Result<f64, String>,
    pub iterations: u64,
    pub rounds: u64,
    pub envelopes: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub topology: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub mean_cost: f64,
    pub sd_cost: f64,
    pub mean_rounds: f64,
    pub mean_wall_ms: f64,
    pub mean_envelopes_per_iteration: f64,
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<InstanceResult>,
    pub summaries: Vec<Summary>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation; zero for a single value.
fn sample_sd(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        len => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (len - 1) as f64).sqrt()
        }
    }
}

/// Aggregates the successful rows of one agent count.
pub fn summarize(rows: &[InstanceResult]) -> Summary {
    let ok: Vec<&InstanceResult> = rows.iter().filter(|r| r.final_cost.is_ok()).collect();
    let costs: Vec<f64> = ok.iter().map(|r| *r.final_cost.as_ref().unwrap()).collect();
    let pick = |f: &dyn Fn(&InstanceResult) -> f64| mean(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    Summary {
        n: rows.first().map_or(0, |r| r.n),
        topology: rows.first().map_or("", |r| r.topology),
        instances: rows.len(),
        failures: rows.len() - ok.len(),
        mean_cost: mean(&costs),
        sd_cost: sample_sd(&costs),
        mean_rounds: pick(&|r| r.rounds as f64),
        mean_wall_ms: pick(&|r| r.wall_ms),
        mean_envelopes_per_iteration: pick(&|r| r.envelopes as f64 / r.iterations as f64),
        iterations: rows.first().map_or(0, |r| r.iterations),
    }
}

fn run_instance(cfg: &BenchConfig, n: usize, k: usize) -> InstanceResult {
    let spec = instance_spec(cfg.topology, n, cfg.coeff_range, cfg.domain, cfg.seed, k);
    let params = SwarmParams { seed: cfg.params.seed.wrapping_add(k as u64), ..cfg.params.clone() };
    let start = Instant::now();
    let outcome = generate(&spec).map_err(|e| e.to_string()).and_then(|problem| {
        run_with(&problem, &params, cfg.iterations, None).map_err(|e| e.to_string())
    });
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut result = InstanceResult {
        instance: k,
        n,
        topology: cfg.topology.tag(),
        seed: spec.seed,
        final_cost: Err(String::new()),
        iterations: cfg.iterations,
        rounds: 0,
        envelopes: 0,
        wall_ms,
    };
    match outcome {
        Ok(out) => {
            if let Some(dir) = &cfg.trace_dir {
                let path = dir.join(format!("{}.trace.csv", instance_name(&cfg.topology, n, cfg.seed, k)));
                if let Err(e) = std::fs::write(&path, out.trace.to_csv()) {
                    result.final_cost = Err(format!("writing {}: {e}", path.display()));
                    return result;
                }
            }
            result.final_cost = Ok(out.final_gbest);
            result.rounds = out.rounds;
            result.envelopes = out.envelopes;
        }
        Err(e) => result.final_cost = Err(e),
    }
    result
}

/// Runs every instance (in parallel) and returns rows ordered by agent count
/// then instance index. Failed instances are kept as error rows.
pub fn run_bench(cfg: &BenchConfig) -> BenchReport {
    let jobs: Vec<(usize, usize)> =
        cfg.agent_counts.iter().flat_map(|&n| (0..cfg.instances).map(move |k| (n, k))).collect();
    let rows: Vec<InstanceResult> = jobs.par_iter().map(|&(n, k)| run_instance(cfg, n, k)).collect();
    let summaries = rows.chunks(cfg.instances.max(1)).map(summarize).collect();
    BenchReport { rows, summaries }
}

impl BenchReport {
    /// Per-instance rows followed by one aggregate row per agent count. The
    /// aggregate row holds the mean final cost, mean rounds, mean envelopes
    /// per iteration and mean wall time; its seed field is empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(BENCH_HEADER);
        s.push('\n');
        for (chunk, sum) in self.rows.chunks(self.rows.len().max(1) / self.summaries.len().max(1)).zip(&self.summaries) {
            for r in chunk {
                let cost = r.final_cost.as_ref().map_or("NaN".to_string(), |c| c.to_string());
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{:.3}",
                    r.instance, r.n, r.topology, r.seed, cost, r.iterations, r.rounds, r.envelopes, r.wall_ms
                );
            }
            let _ = writeln!(
                s,
                "aggregate,{},{},,{},{},{},{},{:.3}",
                sum.n, sum.topology, sum.mean_cost, sum.iterations, sum.mean_rounds, sum.mean_envelopes_per_iteration, sum.mean_wall_ms
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(SUMMARY_HEADER);
        s.push('\n');
        for m in &self.summaries {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.3},{}",
                m.n, m.topology, m.instances, m.failures, m.mean_cost, m.sd_cost, m.mean_wall_ms, m.mean_envelopes_per_iteration
            );
        }
        s
    }
}
