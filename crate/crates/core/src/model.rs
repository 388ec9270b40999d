//! Functional DCOP instances: agents over continuous box domains, binary
//! quadratic constraints, and the JSON problem format.
//!
//! Every agent controls exactly one variable, so agents and variables are
//! identified. Agents are stored in id order (see [`compare_ids`]) and the
//! position in that order is the agent's ordinal. Constraints keep the order
//! they were declared in; [`Problem::cost`] sums in that order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed problem document: {0}")]
    Syntax(String),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("{path}: unknown agent {id:?}")]
    UnknownAgent { path: String, id: String },
    #[error("{path}: non-finite number")]
    NonFinite { path: String },
    #[error("constraint graph is disconnected: {unreached:?} unreachable from {root:?}")]
    Disconnected { root: String, unreached: Vec<String> },
    #[error("problem has no agents")]
    Empty,
    #[error("assignment is missing agent {0:?}")]
    MissingAgent(String),
    #[error("assignment value {value} for {id:?} lies outside [{lower}, {upper}]")]
    OutOfDomain { id: String, value: f64, lower: f64, upper: f64 },
}

/// Orders agent ids "alphabetically" with digit runs compared by value, so
/// that `x2 < x10`. For ids of the form `x1..xn` this coincides with the
/// variable index order.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(cb.iter()) {
        let ord = if *da && *db {
            let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            sa.cmp(sb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

/// Closed interval `[lower, upper]` with `lower < upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousDomain {
    pub lower: f64,
    pub upper: f64,
}

impl ContinuousDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self, ModelError> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(ModelError::NonFinite { path: "domain".into() });
        }
        if lower >= upper {
            return Err(ModelError::Invalid {
                path: "domain".into(),
                msg: format!("lower bound {lower} must be below upper bound {upper}"),
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

/// `a·xi² + b·xi·xj + c·xj²`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticCost {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticCost {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }
}

#[inline]
pub fn evaluate_edge(cost: &QuadraticCost, xi: f64, xj: f64) -> f64 {
    cost.a * xi * xi + cost.b * xi * xj + cost.c * xj * xj
}

#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: String,
    pub domain: ContinuousDomain,
}

/// Binary constraint over agent ordinals. `i` binds to the first coefficient
/// slot and `j` to the last.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub cost: QuadraticCost,
}

impl Constraint {
    #[inline]
    pub fn eval(&self, xi: f64, xj: f64) -> f64 {
        evaluate_edge(&self.cost, xi, xj)
    }

    pub fn other(&self, agent: usize) -> Option<usize> {
        if agent == self.i {
            Some(self.j)
        } else if agent == self.j {
            Some(self.i)
        } else {
            None
        }
    }

    /// Cost with `me`'s value and the neighbour's value given explicitly,
    /// regardless of which endpoint `me` is.
    #[inline]
    pub fn eval_from(&self, me: usize, mine: f64, theirs: f64) -> f64 {
        if me == self.i {
            self.eval(mine, theirs)
        } else {
            self.eval(theirs, mine)
        }
    }
}

/// A validated F-DCOP instance. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    agents: Vec<Agent>,
    constraints: Vec<Constraint>,
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl Problem {
    /// Builds a problem from agents in any order and constraints whose scope is
    /// given by agent id.
    pub fn new(
        agents: Vec<Agent>,
        constraints: Vec<(String, String, QuadraticCost)>,
    ) -> Result<Self, ModelError> {
        let spec = agents
            .into_iter()
            .map(|a| (a.id, a.domain.lower, a.domain.upper))
            .collect::<Vec<_>>();
        let cons = constraints
            .into_iter()
            .map(|(i, j, c)| ((i, j), c.a, c.b, c.c))
            .collect::<Vec<_>>();
        Self::build(spec, cons)
    }

    fn build(
        agents: Vec<(String, f64, f64)>,
        constraints: Vec<((String, String), f64, f64, f64)>,
    ) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = HashSet::new();
        let mut list = Vec::with_capacity(agents.len());
        for (idx, (id, lower, upper)) in agents.into_iter().enumerate() {
            let path = format!("agents[{idx}]");
            if id.is_empty() {
                return Err(ModelError::Invalid { path: format!("{path}.id"), msg: "empty id".into() });
            }
            if !seen.insert(id.clone()) {
                return Err(ModelError::Invalid {
                    path: format!("{path}.id"),
                    msg: format!("duplicate agent id {id:?}"),
                });
            }
            if !lower.is_finite() || !upper.is_finite() {
                return Err(ModelError::NonFinite { path: format!("{path}.domain") });
            }
            if lower >= upper {
                return Err(ModelError::Invalid {
                    path: format!("{path}.domain"),
                    msg: format!("lower bound {lower} must be below upper bound {upper}"),
                });
            }
            list.push(Agent { id, domain: ContinuousDomain { lower, upper } });
        }
        list.sort_by(|a, b| compare_ids(&a.id, &b.id));
        let index: HashMap<&str, usize> =
            list.iter().enumerate().map(|(k, a)| (a.id.as_str(), k)).collect();

        let mut pairs = HashSet::new();
        let mut cons = Vec::with_capacity(constraints.len());
        for (idx, ((si, sj), a, b, c)) in constraints.into_iter().enumerate() {
            let path = format!("constraints[{idx}]");
            let lookup = |id: &str, slot: usize| {
                index.get(id).copied().ok_or_else(|| ModelError::UnknownAgent {
                    path: format!("{path}.scope[{slot}]"),
                    id: id.to_string(),
                })
            };
            let i = lookup(&si, 0)?;
            let j = lookup(&sj, 1)?;
            if i == j {
                return Err(ModelError::Invalid {
                    path: format!("{path}.scope"),
                    msg: format!("constraint endpoints must differ (both {si:?})"),
                });
            }
            if !pairs.insert((i.min(j), i.max(j))) {
                return Err(ModelError::Invalid {
                    path: format!("{path}.scope"),
                    msg: format!("second constraint between {si:?} and {sj:?}"),
                });
            }
            for (name, v) in [("a", a), ("b", b), ("c", c)] {
                if !v.is_finite() {
                    return Err(ModelError::NonFinite { path: format!("{path}.{name}") });
                }
            }
            cons.push(Constraint { i, j, cost: QuadraticCost { a, b, c } });
        }

        let mut neighbors = vec![Vec::new(); list.len()];
        for (e, c) in cons.iter().enumerate() {
            neighbors[c.i].push((c.j, e));
            neighbors[c.j].push((c.i, e));
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }

        let problem = Self { agents: list, constraints: cons, neighbors };
        problem.check_connected()?;
        Ok(problem)
    }

    fn check_connected(&self) -> Result<(), ModelError> {
        let mut seen = vec![false; self.agents.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        let unreached: Vec<String> = seen
            .iter()
            .enumerate()
            .filter(|(_, s)| !**s)
            .map(|(k, _)| self.agents[k].id.clone())
            .collect();
        if unreached.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Disconnected { root: self.agents[0].id.clone(), unreached })
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, ordinal: usize) -> &Agent {
        &self.agents[ordinal]
    }

    pub fn ordinal(&self, id: &str) -> Option<usize> {
        self.agents.binary_search_by(|a| compare_ids(&a.id, id)).ok()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `(neighbour ordinal, constraint index)` pairs sorted by neighbour.
    pub fn neighbors(&self, ordinal: usize) -> &[(usize, usize)] {
        &self.neighbors[ordinal]
    }

    /// Constraint index between two agents, if any.
    pub fn constraint_between(&self, u: usize, v: usize) -> Option<usize> {
        let n = &self.neighbors[u];
        n.binary_search_by_key(&v, |&(w, _)| w).ok().map(|p| n[p].1)
    }

    /// Objective for a full assignment indexed by ordinal, summed in
    /// constraint-list order.
    pub fn cost(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.agents.len());
        self.constraints.iter().map(|c| c.eval(values[c.i], values[c.j])).sum()
    }

    pub fn global_cost(&self, assignment: &Assignment) -> Result<f64, ModelError> {
        Ok(self.cost(&assignment.to_vector(self)?))
    }
}

pub fn global_cost(problem: &Problem, assignment: &Assignment) -> Result<f64, ModelError> {
    problem.global_cost(assignment)
}

/// Values keyed by agent id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    pub values: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vector(problem: &Problem, values: &[f64]) -> Self {
        Self {
            values: problem.agents.iter().zip(values).map(|(a, &v)| (a.id.clone(), v)).collect(),
        }
    }

    pub fn set(&mut self, id: impl Into<String>, value: f64) -> &mut Self {
        self.values.insert(id.into(), value);
        self
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    /// Dense ordinal-indexed vector; fails on a missing agent or a value
    /// outside its domain.
    pub fn to_vector(&self, problem: &Problem) -> Result<Vec<f64>, ModelError> {
        problem
            .agents
            .iter()
            .map(|a| {
                let v = self.get(&a.id).ok_or_else(|| ModelError::MissingAgent(a.id.clone()))?;
                if !a.domain.contains(v) {
                    return Err(ModelError::OutOfDomain {
                        id: a.id.clone(),
                        value: v,
                        lower: a.domain.lower,
                        upper: a.domain.upper,
                    });
                }
                Ok(v)
            })
            .collect()
    }
}

// JSON document shape. Keys are exactly these; unknown keys are rejected.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    id: String,
    domain: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    scope: [String; 2],
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    agents: Vec<AgentDoc>,
    constraints: Vec<ConstraintDoc>,
}

pub fn parse_problem(text: &str) -> Result<Problem, ModelError> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    Problem::build(
        doc.agents.into_iter().map(|a| (a.id, a.domain[0], a.domain[1])).collect(),
        doc.constraints
            .into_iter()
            .map(|c| {
                let [i, j] = c.scope;
                ((i, j), c.a, c.b, c.c)
            })
            .collect(),
    )
}

/// Pretty-printed JSON. Floats use the shortest representation that parses
/// back to the same bits.
pub fn serialize_problem(problem: &Problem) -> String {
    let doc = ProblemDoc {
        agents: problem
            .agents
            .iter()
            .map(|a| AgentDoc { id: a.id.clone(), domain: [a.domain.lower, a.domain.upper] })
            .collect(),
        constraints: problem
            .constraints
            .iter()
            .map(|c| ConstraintDoc {
                scope: [problem.agents[c.i].id.clone(), problem.agents[c.j].id.clone()],
                a: c.cost.a,
                b: c.cost.b,
                c: c.cost.c,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("problem documents always serialize");
    s.push('\n');
    s
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_problem(self))
    }
}

/// The four-agent instance used as a running example: x1 joined to every
/// other agent, plus a cross edge x3–x4, all domains `[-10, 10]`.
pub fn example_problem() -> Problem {
    let d = ContinuousDomain { lower: -10.0, upper: 10.0 };
    let agents = ["x1", "x2", "x3", "x4"].iter().map(|id| Agent { id: id.to_string(), domain: d }).collect();
    let c = |i: &str, j: &str, a, b, c| (i.to_string(), j.to_string(), QuadraticCost::new(a, b, c));
    Problem::new(
        agents,
        vec![
            c("x1", "x2", 1.0, 0.0, -1.0),
            c("x1", "x3", 1.0, 2.0, 0.0),
            c("x1", "x4", 2.0, 0.0, -2.0),
            c("x3", "x4", 1.0, 0.0, 3.0),
        ],
    )
    .expect("example problem is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assign(pairs: &[(&str, f64)]) -> Assignment {
        let mut a = Assignment::new();
        for (id, v) in pairs {
            a.set(*id, *v);
        }
        a
    }

    #[test]
    fn edge_goldens() {
        assert_eq!(evaluate_edge(&QuadraticCost::new(1.0, 0.0, 3.0), 2.0, 9.5), 274.75);
        assert_eq!(evaluate_edge(&QuadraticCost::new(2.0, 0.0, -2.0), -1.0, 9.5), -178.5);
        assert_eq!(evaluate_edge(&QuadraticCost::new(-4.2, 1.7, 3.3), 0.0, 0.0), 0.0);
    }

    #[test]
    fn example_costs() {
        let p = example_problem();
        let x = assign(&[("x1", -1.0), ("x2", 0.0), ("x3", 2.0), ("x4", 9.5)]);
        assert!((global_cost(&p, &x).unwrap() - 94.25).abs() < 1e-9);
        let y = assign(&[("x1", 3.5), ("x2", 4.9), ("x3", 1.0), ("x4", 0.0)]);
        assert!((global_cost(&p, &y).unwrap() - 32.99).abs() < 1e-9);
        let z = assign(&[("x1", 0.0), ("x2", 0.0), ("x3", 0.0), ("x4", 0.0)]);
        assert_eq!(global_cost(&p, &z).unwrap(), 0.0);
    }

    #[test]
    fn missing_agent_is_named() {
        let p = example_problem();
        let x = assign(&[("x1", 0.0), ("x2", 0.0), ("x4", 0.0)]);
        assert_eq!(global_cost(&p, &x), Err(ModelError::MissingAgent("x3".into())));
    }

    #[test]
    fn out_of_domain_rejected() {
        let p = example_problem();
        let x = assign(&[("x1", 0.0), ("x2", 11.0), ("x3", 0.0), ("x4", 0.0)]);
        assert!(matches!(global_cost(&p, &x), Err(ModelError::OutOfDomain { .. })));
    }

    #[test]
    fn example_round_trips() {
        let p = example_problem();
        let text = serialize_problem(&p);
        assert_eq!(parse_problem(&text).unwrap(), p);
    }

    #[test]
    fn single_agent_no_constraints() {
        let p = parse_problem(r#"{"agents":[{"id":"x1","domain":[-1.0,1.0]}],"constraints":[]}"#).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.cost(&[0.3]), 0.0);
    }

    #[test]
    fn unknown_scope_agent() {
        let doc = r#"{"agents":[{"id":"x1","domain":[-1,1]},{"id":"x2","domain":[-1,1]}],
            "constraints":[{"scope":["x1","x2"],"a":1,"b":0,"c":0},{"scope":["x1","x9"],"a":1,"b":0,"c":0}]}"#;
        let err = parse_problem(doc).unwrap_err();
        assert_eq!(err, ModelError::UnknownAgent { path: "constraints[1].scope[1]".into(), id: "x9".into() });
    }

    #[test]
    fn validation_errors() {
        let two = |cons: &str| {
            format!(r#"{{"agents":[{{"id":"x1","domain":[-1,1]}},{{"id":"x2","domain":[-1,1]}}],"constraints":[{cons}]}}"#)
        };
        assert!(matches!(parse_problem(&two("")), Err(ModelError::Disconnected { .. })));
        assert!(matches!(
            parse_problem(&two(r#"{"scope":["x1","x1"],"a":1,"b":0,"c":0}"#)),
            Err(ModelError::Invalid { .. })
        ));
        assert!(matches!(
            parse_problem(&two(
                r#"{"scope":["x1","x2"],"a":1,"b":0,"c":0},{"scope":["x2","x1"],"a":1,"b":0,"c":0}"#
            )),
            Err(ModelError::Invalid { .. })
        ));
        assert!(matches!(parse_problem("{"), Err(ModelError::Syntax(_))));
        assert!(matches!(parse_problem(r#"{"agents":[],"constraints":[]}"#), Err(ModelError::Empty)));
        let bad_domain = r#"{"agents":[{"id":"x1","domain":[1,1]}],"constraints":[]}"#;
        match parse_problem(bad_domain) {
            Err(ModelError::Invalid { path, .. }) => assert_eq!(path, "agents[0].domain"),
            other => panic!("{other:?}"),
        }
        let extra_key = r#"{"agents":[{"id":"x1","domain":[0,1],"w":2}],"constraints":[]}"#;
        assert!(matches!(parse_problem(extra_key), Err(ModelError::Syntax(_))));
    }

    #[test]
    fn non_finite_coefficient_rejected() {
        let p = Problem::new(
            vec![
                Agent { id: "x1".into(), domain: ContinuousDomain { lower: 0.0, upper: 1.0 } },
                Agent { id: "x2".into(), domain: ContinuousDomain { lower: 0.0, upper: 1.0 } },
            ],
            vec![("x1".into(), "x2".into(), QuadraticCost::new(f64::NAN, 0.0, 0.0))],
        );
        assert_eq!(p.unwrap_err(), ModelError::NonFinite { path: "constraints[0].a".into() });
    }

    #[test]
    fn natural_id_order() {
        assert_eq!(compare_ids("x2", "x10"), Ordering::Less);
        assert_eq!(compare_ids("x10", "x9"), Ordering::Greater);
        assert_eq!(compare_ids("a", "b"), Ordering::Less);
        assert_eq!(compare_ids("x1", "x1"), Ordering::Equal);
        assert_eq!(compare_ids("x01", "x1"), Ordering::Less);
        let mut ids = vec!["x10", "x2", "y1", "x1", "x3"];
        ids.sort_by(|a, b| compare_ids(a, b));
        assert_eq!(ids, vec!["x1", "x2", "x3", "x10", "y1"]);
    }

    #[test]
    fn ordinals_follow_id_order() {
        let doc = r#"{"agents":[{"id":"x10","domain":[0,1]},{"id":"x2","domain":[0,1]},{"id":"x1","domain":[0,1]}],
            "constraints":[{"scope":["x10","x2"],"a":1,"b":2,"c":3},{"scope":["x1","x2"],"a":0,"b":0,"c":0}]}"#;
        let p = parse_problem(doc).unwrap();
        let ids: Vec<_> = p.agents().iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["x1", "x2", "x10"]);
        assert_eq!(p.ordinal("x10"), Some(2));
        // scope orientation survives reordering of the agent list
        assert_eq!((p.constraints()[0].i, p.constraints()[0].j), (2, 1));
        assert_eq!(p.constraint_between(1, 2), Some(0));
        assert_eq!(p.constraint_between(0, 2), None);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())]
    }

    proptest! {
        #[test]
        fn edge_is_homogeneous_of_degree_two(
            a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64,
            x in -50.0..50.0f64, y in -50.0..50.0f64, s in -10.0..10.0f64,
        ) {
            let q = QuadraticCost::new(a, b, c);
            let lhs = evaluate_edge(&q, s * x, s * y);
            let rhs = s * s * evaluate_edge(&q, x, y);
            let scale = (a.abs() + b.abs() + c.abs()) * (x.abs() + y.abs()).powi(2) * s * s + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn round_trip_is_bit_exact(
            coeffs in proptest::collection::vec((finite(), finite(), finite()), 1..6),
            lower in -1e3..0.0f64, width in 1e-3..1e3f64,
        ) {
            let n = coeffs.len() + 1;
            let agents = (1..=n)
                .map(|k| Agent { id: format!("x{k}"), domain: ContinuousDomain { lower, upper: lower + width } })
                .collect();
            // path x1-x2-...-xn
            let cons = coeffs.iter().enumerate()
                .map(|(k, &(a, b, c))| (format!("x{}", k + 2), format!("x{}", k + 1), QuadraticCost::new(a, b, c)))
                .collect();
            let p = Problem::new(agents, cons).unwrap();
            let q = parse_problem(&serialize_problem(&p)).unwrap();
            for (c1, c2) in p.constraints().iter().zip(q.constraints()) {
                prop_assert_eq!(c1.cost.a.to_bits(), c2.cost.a.to_bits());
                prop_assert_eq!(c1.cost.b.to_bits(), c2.cost.b.to_bits());
                prop_assert_eq!(c1.cost.c.to_bits(), c2.cost.c.to_bits());
            }
            prop_assert_eq!(p, q);
        }

        #[test]
        fn cost_is_order_insensitive(
            coeffs in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 2..8),
            xs in proptest::collection::vec(-50.0..50.0f64, 9),
            rot in 0usize..8,
        ) {
            let n = coeffs.len() + 1;
            let agents: Vec<Agent> = (1..=n)
                .map(|k| Agent { id: format!("x{k}"), domain: ContinuousDomain { lower: -50.0, upper: 50.0 } })
                .collect();
            let cons: Vec<_> = coeffs.iter().enumerate()
                .map(|(k, &(a, b, c))| (format!("x{}", k + 1), format!("x{}", k + 2), QuadraticCost::new(a, b, c)))
                .collect();
            let mut rotated = cons.clone();
            rotated.rotate_left(rot % cons.len());
            let p = Problem::new(agents.clone(), cons).unwrap();
            let q = Problem::new(agents, rotated).unwrap();
            let v = &xs[..n];
            let (cp, cq) = (p.cost(v), q.cost(v));
            let mag: f64 = p.constraints().iter().map(|c| c.eval(v[c.i], v[c.j]).abs()).sum();
            prop_assert!((cp - cq).abs() <= 1e-9 * mag.max(1.0));
        }
    }
}
