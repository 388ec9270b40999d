//! Seeded random instances on the three experimental topologies.
//!
//! All randomness comes from one [`SplitMix64`] stream seeded with
//! `GenSpec::seed`. Edges are produced first, then each edge draws `a`, `b`,
//! `c` (in that order) uniformly from the coefficient range. Agents are named
//! `x1..xn`; an edge between ordinals `u < v` gets scope `(x{u+1}, x{v+1})`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Agent, ContinuousDomain, ModelError, Problem, QuadraticCost};
use crate::rng::SplitMix64;

/// Resampling budget for Erdős–Rényi graphs before giving up.
pub const MAX_ER_ATTEMPTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error("no connected graph after {0} attempts")]
    NotConnected(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Topology {
    ErdosRenyi { p: f64 },
    /// Barabási–Albert growth from an initial clique of `m` nodes; every later
    /// node attaches to `m` distinct existing nodes chosen proportionally to
    /// degree (uniformly while all degrees are zero).
    ScaleFree { m: usize },
    RandomTree,
}

impl Topology {
    /// Short tag used in file names and CSV rows.
    pub fn tag(&self) -> &'static str {
        match self {
            Topology::ErdosRenyi { .. } => "er",
            Topology::ScaleFree { .. } => "sf",
            Topology::RandomTree => "tree",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::ErdosRenyi { p } => write!(f, "er(p={p})"),
            Topology::ScaleFree { m } => write!(f, "sf(m={m})"),
            Topology::RandomTree => f.write_str("tree"),
        }
    }
}

/// Topology family without its parameter, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyKind {
    Er,
    Sf,
    Tree,
}

impl FromStr for TopologyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "er" | "erdos_renyi" => Ok(Self::Er),
            "sf" | "scale_free" => Ok(Self::Sf),
            "tree" | "random_tree" => Ok(Self::Tree),
            other => Err(format!("unknown topology {other:?} (expected er, sf or tree)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub topology: Topology,
    pub n: usize,
    pub coeff_range: (f64, f64),
    pub domain: ContinuousDomain,
    pub seed: u64,
}

impl GenSpec {
    /// Coefficients in `[-5, 5]`, domains `[-50, 50]`.
    pub fn new(topology: Topology, n: usize, seed: u64) -> Self {
        Self {
            topology,
            n,
            coeff_range: (-5.0, 5.0),
            domain: ContinuousDomain { lower: -50.0, upper: 50.0 },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::Infeasible("agent count must be at least 1".into()));
        }
        let (lo, hi) = self.coeff_range;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(GenError::Infeasible(format!("bad coefficient range [{lo}, {hi}]")));
        }
        ContinuousDomain::new(self.domain.lower, self.domain.upper)?;
        match self.topology {
            Topology::ErdosRenyi { p } if !(p > 0.0 && p <= 1.0) => {
                Err(GenError::Infeasible(format!("edge probability {p} outside (0, 1]")))
            }
            Topology::ScaleFree { m } if m < 1 || m >= self.n => Err(GenError::Infeasible(format!(
                "attachment count m={m} needs 1 <= m < n={}",
                self.n
            ))),
            _ => Ok(()),
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<Problem, GenError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let edges = match spec.topology {
        Topology::ErdosRenyi { p } => erdos_renyi(spec.n, p, &mut rng)?,
        Topology::ScaleFree { m } => scale_free(spec.n, m, &mut rng),
        Topology::RandomTree => random_tree(spec.n, &mut rng),
    };
    let (lo, hi) = spec.coeff_range;
    let agents = (1..=spec.n).map(|k| Agent { id: format!("x{k}"), domain: spec.domain }).collect();
    let constraints = edges
        .into_iter()
        .map(|(u, v)| {
            let a = rng.uniform(lo, hi);
            let b = rng.uniform(lo, hi);
            let c = rng.uniform(lo, hi);
            (format!("x{}", u + 1), format!("x{}", v + 1), QuadraticCost::new(a, b, c))
        })
        .collect();
    Ok(Problem::new(agents, constraints)?)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Each unordered pair `u < v` (row-major) kept with probability `p`; the
/// whole graph is redrawn until connected.
fn erdos_renyi(n: usize, p: f64, rng: &mut SplitMix64) -> Result<Vec<(usize, usize)>, GenError> {
    for _ in 0..MAX_ER_ATTEMPTS {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.next_f64() < p {
                    edges.push((u, v));
                }
            }
        }
        if connected(n, &edges) {
            return Ok(edges);
        }
    }
    Err(GenError::NotConnected(MAX_ER_ATTEMPTS))
}

fn scale_free(n: usize, m: usize, rng: &mut SplitMix64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    // one entry per edge endpoint, so a uniform pick is degree-proportional
    let mut ends: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    for new in m..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = if ends.is_empty() { rng.below(new) } else { ends[rng.below(ends.len())] };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, new));
            ends.push(t);
            ends.push(new);
        }
    }
    edges
}

/// Uniform labelled tree decoded from a random Prüfer sequence.
fn random_tree(n: usize, rng: &mut SplitMix64) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.below(n)).collect();
            decode_prufer(&seq, n)
        }
    }
}

fn decode_prufer(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::serialize_problem;
    use proptest::prelude::*;

    fn is_acyclic_connected(p: &Problem) -> bool {
        p.constraints().len() + 1 == p.len() && connected(p.len(), &edge_list(p))
    }

    fn edge_list(p: &Problem) -> Vec<(usize, usize)> {
        p.constraints().iter().map(|c| (c.i, c.j)).collect()
    }

    #[test]
    fn tree_of_four() {
        for seed in 0..20 {
            let p = generate(&GenSpec::new(Topology::RandomTree, 4, seed)).unwrap();
            assert_eq!(p.constraints().len(), 3);
            assert!(is_acyclic_connected(&p));
        }
    }

    #[test]
    fn complete_graph_when_p_is_one() {
        let p = generate(&GenSpec::new(Topology::ErdosRenyi { p: 1.0 }, 4, 1)).unwrap();
        assert_eq!(p.constraints().len(), 6);
    }

    #[test]
    fn deterministic_output() {
        let spec = GenSpec::new(Topology::ErdosRenyi { p: 0.2 }, 10, 42);
        let a = serialize_problem(&generate(&spec).unwrap());
        let b = serialize_problem(&generate(&spec).unwrap());
        assert_eq!(a, b);
        let other = serialize_problem(&generate(&GenSpec { seed: 43, ..spec }).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn infeasible_specs() {
        let bad = [
            GenSpec::new(Topology::ScaleFree { m: 4 }, 4, 0),
            GenSpec::new(Topology::ScaleFree { m: 0 }, 4, 0),
            GenSpec::new(Topology::ErdosRenyi { p: 0.0 }, 4, 0),
            GenSpec::new(Topology::ErdosRenyi { p: 1.5 }, 4, 0),
            GenSpec::new(Topology::RandomTree, 0, 0),
            GenSpec { coeff_range: (1.0, -1.0), ..GenSpec::new(Topology::RandomTree, 3, 0) },
        ];
        for spec in bad {
            assert!(matches!(generate(&spec), Err(GenError::Infeasible(_))), "{spec:?}");
        }
    }

    #[test]
    fn degenerate_sizes() {
        for topo in [Topology::RandomTree, Topology::ErdosRenyi { p: 0.5 }] {
            let p = generate(&GenSpec::new(topo, 1, 0)).unwrap();
            assert_eq!(p.len(), 1);
            assert!(p.constraints().is_empty());
        }
        let p = generate(&GenSpec::new(Topology::RandomTree, 2, 0)).unwrap();
        assert_eq!(p.constraints().len(), 1);
    }

    #[test]
    fn prufer_decoding_known_sequence() {
        // Sequence [3, 3, 3, 4] on 6 nodes decodes to edges
        // 0-3, 1-3, 2-3, 3-4, 4-5.
        let edges = decode_prufer(&[3, 3, 3, 4], 6);
        assert_eq!(edges, vec![(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn trees_of_three_are_roughly_uniform() {
        // three labelled trees on three nodes, each the path centred on one node
        let mut counts = [0usize; 3];
        for seed in 0..3000 {
            let p = generate(&GenSpec::new(Topology::RandomTree, 3, seed)).unwrap();
            let centre = (0..3).find(|&v| p.neighbors(v).len() == 2).unwrap();
            counts[centre] += 1;
        }
        for c in counts {
            assert!((850..1150).contains(&c), "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn generated_instances_hold_invariants(
            n in 1usize..25, seed in any::<u64>(), kind in 0u8..3, p in 0.15..1.0f64, m in 1usize..4,
        ) {
            let topo = match kind {
                0 => Topology::ErdosRenyi { p },
                1 => Topology::ScaleFree { m },
                _ => Topology::RandomTree,
            };
            let spec = GenSpec::new(topo, n, seed);
            if let Topology::ScaleFree { m } = topo {
                if m >= n {
                    prop_assert!(generate(&spec).is_err());
                    return Ok(());
                }
            }
            let prob = generate(&spec).unwrap();
            prop_assert_eq!(prob.len(), n);
            prop_assert!(connected(n, &edge_list(&prob)));
            for a in prob.agents() {
                prop_assert_eq!(a.domain, spec.domain);
            }
            for c in prob.constraints() {
                for v in [c.cost.a, c.cost.b, c.cost.c] {
                    prop_assert!((-5.0..=5.0).contains(&v));
                }
            }
            let e = prob.constraints().len();
            match topo {
                Topology::RandomTree => prop_assert_eq!(e, n - 1),
                Topology::ScaleFree { m } => prop_assert_eq!(e, m * (n - m) + m * (m - 1) / 2),
                Topology::ErdosRenyi { .. } => prop_assert!(e >= n - 1 && e <= n * (n - 1) / 2),
            }
        }
    }
}
