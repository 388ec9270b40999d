//! The distributed solver: one state machine per agent on a synchronous
//! round-based network.
//!
//! Each round the simulator delivers everything sent in the previous round,
//! then fires agents in ordinal order. Anything an agent sends is queued for
//! the next round, so a message crosses one constraint edge per round.
//!
//! Per iteration `t` an agent
//! 1. waits for `VALUE(t)`/`UPDATE(t)` from every higher neighbour, computes
//!    the cost of each of those edges for all particles and reports it to that
//!    neighbour (`EDGE_FITNESS(t)`);
//! 2. if it has lower neighbours, sums the edge costs and child aggregates it
//!    receives and forwards the total to its tree parent (`AGG_FITNESS(t)`);
//!    the root instead turns the total into a [`BestInfo`] verdict;
//! 3. on the first verdict for `t` it moves its particle components and sends
//!    `UPDATE(t+1)` (new positions plus the verdict) to its lower neighbours.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Constraint, ContinuousDomain, ModelError, Problem};
use crate::pseudotree::{build_bfs_pseudotree, PseudoTree, TreeError};
use crate::swarm::{AgentSwarmState, BestInfo, BestTracker, SwarmError, SwarmParams};
use crate::trace::{AnytimeTrace, TraceRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("initial positions: {0}")]
    Init(String),
    #[error("protocol violation at {agent}: {msg}")]
    Protocol { agent: String, msg: String },
    #[error("deadlock in round {round}: blocked agents {blocked:?}")]
    Deadlock { round: u64, blocked: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Value,
    EdgeFitness,
    AggFitness,
    Update,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Value, Kind::EdgeFitness, Kind::AggFitness, Kind::Update];

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Value => "VALUE",
            Kind::EdgeFitness => "EDGE_FITNESS",
            Kind::AggFitness => "AGG_FITNESS",
            Kind::Update => "UPDATE",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Value(Vec<f64>),
    EdgeFitness(Vec<f64>),
    AggFitness(Vec<f64>),
    Update { values: Vec<f64>, best: Arc<BestInfo> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub iteration: u64,
    pub from: usize,
    pub to: usize,
    pub payload: Payload,
}

impl Envelope {
    pub fn kind(&self) -> Kind {
        match self.payload {
            Payload::Value(_) => Kind::Value,
            Payload::EdgeFitness(_) => Kind::EdgeFitness,
            Payload::AggFitness(_) => Kind::AggFitness,
            Payload::Update { .. } => Kind::Update,
        }
    }

    pub fn scalars(&self) -> usize {
        match &self.payload {
            Payload::Value(v) | Payload::EdgeFitness(v) | Payload::AggFitness(v) => v.len(),
            Payload::Update { values, best } => values.len() + best.payload_scalars(),
        }
    }

    /// The Evaluation+Update cycle this envelope belongs to. `UPDATE(t+1)` is
    /// sent while finishing cycle `t`.
    pub fn cycle(&self) -> u64 {
        match self.payload {
            Payload::Update { .. } => self.iteration - 1,
            _ => self.iteration,
        }
    }

    pub fn fitness(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::EdgeFitness(v) | Payload::AggFitness(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) {}->{}", self.kind(), self.iteration, self.from, self.to)
    }
}

/// Per-agent, per-particle starting positions, indexed by ordinal.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialPositions(pub Vec<Vec<f64>>);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitDoc {
    id: String,
    positions: Vec<f64>,
}

impl InitialPositions {
    /// Parses `[{"id":"x1","positions":[...]}, ...]`.
    pub fn parse(text: &str, problem: &Problem) -> Result<Self, RunError> {
        let docs: Vec<InitDoc> = serde_json::from_str(text).map_err(|e| RunError::Init(e.to_string()))?;
        let mut slots: Vec<Option<Vec<f64>>> = vec![None; problem.len()];
        for d in docs {
            let v = problem.ordinal(&d.id).ok_or_else(|| RunError::Init(format!("unknown agent {:?}", d.id)))?;
            if slots[v].replace(d.positions).is_some() {
                return Err(RunError::Init(format!("agent {:?} listed twice", d.id)));
            }
        }
        let rows = slots
            .into_iter()
            .enumerate()
            .map(|(v, s)| s.ok_or_else(|| RunError::Init(format!("missing agent {:?}", problem.agent(v).id))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(rows))
    }

    pub fn to_json(&self, problem: &Problem) -> String {
        let docs: Vec<InitDoc> = self
            .0
            .iter()
            .enumerate()
            .map(|(v, p)| InitDoc { id: problem.agent(v).id.clone(), positions: p.clone() })
            .collect();
        serde_json::to_string(&docs).expect("positions serialize")
    }

    pub fn validate(&self, problem: &Problem, particles: usize) -> Result<(), RunError> {
        if self.0.len() != problem.len() {
            return Err(RunError::Init(format!("expected {} agents, got {}", problem.len(), self.0.len())));
        }
        for (v, row) in self.0.iter().enumerate() {
            let a = problem.agent(v);
            if row.len() != particles {
                return Err(RunError::Init(format!("{:?} has {} positions, expected {particles}", a.id, row.len())));
            }
            if let Some(x) = row.iter().find(|&&x| !a.domain.contains(x)) {
                return Err(RunError::Init(format!("{:?} position {x} outside its domain", a.id)));
            }
        }
        Ok(())
    }
}

/// Root-side record of a finished aggregation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Completion {
    pub iteration: u64,
    pub round: u64,
    pub gbest_fitness: f64,
}

/// What an agent did during one firing.
#[derive(Debug, Default)]
pub struct FireOutput {
    pub sent: Vec<Envelope>,
    pub progressed: bool,
}

/// One agent's side of the protocol. Reads only its own fields and the
/// envelopes handed to it.
#[derive(Clone, Debug)]
pub struct AgentMachine {
    ordinal: usize,
    id: String,
    domain: ContinuousDomain,
    parent: Option<usize>,
    higher: Vec<(usize, Constraint)>,
    lower: Vec<usize>,
    expected_fitness: usize,
    params: SwarmParams,
    iterations: u64,
    swarm: AgentSwarmState,
    tracker: Option<BestTracker>,
    started: bool,
    next_eval: u64,
    next_agg: u64,
    next_verdict: u64,
    values: BTreeMap<u64, BTreeMap<usize, Vec<f64>>>,
    fitness: BTreeMap<u64, (Vec<f64>, usize)>,
    verdicts: BTreeMap<u64, Arc<BestInfo>>,
    applied_round: Vec<u64>,
    known_gbest: Vec<f64>,
    completions: Vec<Completion>,
    record: bool,
    aggregated: Vec<Vec<f64>>,
    evaluated: Vec<Vec<f64>>,
}

impl AgentMachine {
    pub fn new(
        problem: &Problem,
        tree: &PseudoTree,
        ordinal: usize,
        params: &SwarmParams,
        iterations: u64,
        swarm: AgentSwarmState,
    ) -> Self {
        let higher = tree
            .higher(ordinal)
            .iter()
            .map(|&h| {
                let e = problem.constraint_between(ordinal, h).expect("tree neighbours share a constraint");
                (h, problem.constraints()[e])
            })
            .collect();
        let agent = problem.agent(ordinal);
        Self {
            ordinal,
            id: agent.id.clone(),
            domain: agent.domain,
            parent: tree.parent(ordinal),
            higher,
            lower: tree.lower(ordinal).to_vec(),
            expected_fitness: tree.expected_fitness_msgs(ordinal),
            params: params.clone(),
            iterations,
            swarm,
            tracker: tree.is_root(ordinal).then(|| BestTracker::new(params.particles)),
            started: false,
            next_eval: 0,
            next_agg: 0,
            next_verdict: 0,
            values: BTreeMap::new(),
            fitness: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            applied_round: Vec::new(),
            known_gbest: Vec::new(),
            completions: Vec::new(),
            record: false,
            aggregated: Vec::new(),
            evaluated: Vec::new(),
        }
    }

    pub fn ordinal(&self) -> usize {
        self.ordinal
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_root(&self) -> bool {
        self.tracker.is_some()
    }

    pub fn swarm(&self) -> &AgentSwarmState {
        &self.swarm
    }

    /// All verdicts applied.
    pub fn is_done(&self) -> bool {
        self.next_verdict >= self.iterations
    }

    /// Round in which the verdict of each iteration was applied.
    pub fn applied_rounds(&self) -> &[u64] {
        &self.applied_round
    }

    /// Global-best fitness this agent learned with each verdict.
    pub fn known_gbest(&self) -> &[f64] {
        &self.known_gbest
    }

    /// Root only: the aggregated fitness vector of each iteration (when
    /// recording).
    pub fn aggregated(&self) -> &[Vec<f64>] {
        &self.aggregated
    }

    /// Positions evaluated in each iteration (when recording).
    pub fn evaluated(&self) -> &[Vec<f64>] {
        &self.evaluated
    }

    pub fn set_recording(&mut self, on: bool) {
        self.record = on;
    }

    fn take_completions(&mut self) -> Vec<Completion> {
        std::mem::take(&mut self.completions)
    }

    fn violation(&self, msg: String) -> RunError {
        RunError::Protocol { agent: self.id.clone(), msg }
    }

    fn describe_wait(&self) -> String {
        if self.next_verdict < self.next_eval || (self.next_verdict == self.next_eval && self.next_eval >= self.iterations) {
            return format!("{} awaits verdict {}", self.id, self.next_verdict);
        }
        let have = self.values.get(&self.next_eval).map_or(0, |m| m.len());
        format!(
            "{} at iteration {} holds {}/{} higher values, {}/{} fitness reports",
            self.id,
            self.next_eval,
            have,
            self.higher.len(),
            self.fitness.get(&self.next_agg).map_or(0, |f| f.1),
            self.expected_fitness
        )
    }

    fn ingest(&mut self, env: Envelope) -> Result<(), RunError> {
        if env.to != self.ordinal {
            return Err(self.violation(format!("received misaddressed {env}")));
        }
        let from_higher = self.higher.iter().any(|&(h, _)| h == env.from);
        let k = self.params.particles;
        match env.payload {
            Payload::Value(_) | Payload::Update { .. } if !from_higher => {
                Err(self.violation(format!("value message from non-higher neighbour {}", env.from)))
            }
            Payload::Value(values) => {
                if env.iteration != 0 {
                    return Err(self.violation(format!("VALUE tagged {}", env.iteration)));
                }
                self.store_values(env.iteration, env.from, values, k)
            }
            Payload::Update { values, best } => {
                if best.iteration + 1 != env.iteration {
                    return Err(self.violation("UPDATE carries a verdict for the wrong iteration".into()));
                }
                if best.iteration >= self.next_verdict {
                    self.verdicts.entry(best.iteration).or_insert(best);
                }
                if env.iteration < self.iterations {
                    self.store_values(env.iteration, env.from, values, k)?;
                }
                Ok(())
            }
            Payload::EdgeFitness(f) | Payload::AggFitness(f) => {
                if f.len() != k {
                    return Err(self.violation(format!("fitness vector of length {}", f.len())));
                }
                let slot = self.fitness.entry(env.iteration).or_insert_with(|| (vec![0.0; k], 0));
                for (acc, x) in slot.0.iter_mut().zip(&f) {
                    *acc += x;
                }
                slot.1 += 1;
                if slot.1 > self.expected_fitness {
                    return Err(self.violation(format!("too many fitness reports for iteration {}", env.iteration)));
                }
                Ok(())
            }
        }
    }

    fn store_values(&mut self, t: u64, from: usize, values: Vec<f64>, k: usize) -> Result<(), RunError> {
        if values.len() != k {
            return Err(self.violation(format!("value vector of length {}", values.len())));
        }
        if self.values.entry(t).or_default().insert(from, values).is_some() {
            return Err(self.violation(format!("duplicate values from {from} for iteration {t}")));
        }
        Ok(())
    }

    fn send_values(&self, t: u64, best: Option<&Arc<BestInfo>>, out: &mut Vec<Envelope>) {
        for &l in &self.lower {
            let values = self.swarm.position.clone();
            let payload = match best {
                None => Payload::Value(values),
                Some(b) => Payload::Update { values, best: Arc::clone(b) },
            };
            out.push(Envelope { iteration: t, from: self.ordinal, to: l, payload });
        }
    }

    /// Runs every action whose inputs are available, given the envelopes
    /// delivered this round.
    pub fn fire(&mut self, round: u64, incoming: Vec<Envelope>) -> Result<FireOutput, RunError> {
        let mut out = FireOutput::default();
        for env in incoming {
            self.ingest(env)?;
        }
        if !self.started {
            self.started = true;
            out.progressed = true;
            self.send_values(0, None, &mut out.sent);
        }
        loop {
            let mut progressed = false;

            // verdict -> move particles, publish next positions
            if let Some(best) = self.verdicts.remove(&self.next_verdict) {
                let t = self.next_verdict;
                self.swarm.apply(&best, &self.params, self.ordinal, &self.domain);
                self.applied_round.push(round);
                self.known_gbest.push(best.gbest_fitness);
                self.next_verdict += 1;
                self.send_values(t + 1, Some(&best), &mut out.sent);
                progressed = true;
            }

            // evaluation of edges towards higher neighbours
            let e = self.next_eval;
            if e < self.iterations
                && self.next_verdict == e
                && self.values.get(&e).map_or(0, |m| m.len()) == self.higher.len()
            {
                let held = self.values.remove(&e).unwrap_or_default();
                for &(h, ref cons) in &self.higher {
                    let theirs = &held[&h];
                    let costs: Vec<f64> = self
                        .swarm
                        .position
                        .iter()
                        .zip(theirs)
                        .map(|(&mine, &other)| cons.eval_from(self.ordinal, mine, other))
                        .collect();
                    out.sent.push(Envelope { iteration: e, from: self.ordinal, to: h, payload: Payload::EdgeFitness(costs) });
                }
                if self.record {
                    self.evaluated.push(self.swarm.position.clone());
                }
                self.next_eval += 1;
                progressed = true;
            }

            // aggregation
            let a = self.next_agg;
            if a < self.iterations {
                let total = if self.lower.is_empty() {
                    (self.is_root() && a < self.next_eval).then(|| vec![0.0; self.params.particles])
                } else if self.fitness.get(&a).is_some_and(|f| f.1 == self.expected_fitness) {
                    self.fitness.remove(&a).map(|f| f.0)
                } else {
                    None
                };
                if let Some(total) = total {
                    self.next_agg += 1;
                    progressed = true;
                    if let Some(tracker) = self.tracker.as_mut() {
                        let best = tracker.update(&total, a);
                        self.completions.push(Completion { iteration: a, round, gbest_fitness: best.gbest_fitness });
                        if self.record {
                            self.aggregated.push(total);
                        }
                        self.verdicts.insert(a, Arc::new(best));
                    } else {
                        let parent = self.parent.expect("non-root agents have a parent");
                        out.sent.push(Envelope { iteration: a, from: self.ordinal, to: parent, payload: Payload::AggFitness(total) });
                    }
                }
            }

            if !progressed {
                break;
            }
            out.progressed = true;
        }
        Ok(out)
    }
}

/// Counts for one round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundReport {
    pub round: u64,
    pub delivered: usize,
    pub fired: usize,
    pub sent: usize,
}

impl fmt::Display for RoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round {}: delivered {} fired {} sent {}", self.round, self.delivered, self.fired, self.sent)
    }
}

/// Summary of a finished distributed run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub trace: AnytimeTrace,
    pub final_gbest: f64,
    pub rounds: u64,
    pub envelopes: u64,
    pub scalars: u64,
}

pub struct Simulator {
    tree: PseudoTree,
    machines: Vec<AgentMachine>,
    in_flight: Vec<Envelope>,
    round: u64,
    iterations: u64,
    envelopes: u64,
    scalars: u64,
    /// `sent[agent][cycle][kind]`
    sent: Vec<Vec<[u32; 4]>>,
    trace: AnytimeTrace,
    log: Option<Vec<(u64, Envelope)>>,
}

impl Simulator {
    pub fn new(problem: &Problem, params: &SwarmParams, iterations: u64) -> Result<Self, RunError> {
        Self::build(problem, params, iterations, None)
    }

    pub fn with_initial_positions(
        problem: &Problem,
        params: &SwarmParams,
        iterations: u64,
        init: &InitialPositions,
    ) -> Result<Self, RunError> {
        Self::build(problem, params, iterations, Some(init))
    }

    fn build(
        problem: &Problem,
        params: &SwarmParams,
        iterations: u64,
        init: Option<&InitialPositions>,
    ) -> Result<Self, RunError> {
        params.validate()?;
        if iterations == 0 {
            return Err(RunError::NoIterations);
        }
        if let Some(init) = init {
            init.validate(problem, params.particles)?;
        }
        let tree = build_bfs_pseudotree(problem)?;
        let machines = (0..problem.len())
            .map(|v| {
                let swarm = match init {
                    Some(init) => AgentSwarmState::new(init.0[v].clone()),
                    None => AgentSwarmState::random(params, &problem.agent(v).domain, v),
                };
                AgentMachine::new(problem, &tree, v, params, iterations, swarm)
            })
            .collect();
        Ok(Self {
            tree,
            machines,
            in_flight: Vec::new(),
            round: 0,
            iterations,
            envelopes: 0,
            scalars: 0,
            sent: vec![vec![[0; 4]; iterations as usize]; problem.len()],
            trace: AnytimeTrace::default(),
            log: None,
        })
    }

    /// Keeps every sent envelope and per-iteration fitness and position
    /// histories. Memory grows with the run; meant for tests and debugging.
    pub fn set_recording(&mut self, on: bool) {
        self.log = on.then(Vec::new);
        for m in &mut self.machines {
            m.set_recording(on);
        }
    }

    pub fn tree(&self) -> &PseudoTree {
        &self.tree
    }

    pub fn machines(&self) -> &[AgentMachine] {
        &self.machines
    }

    pub fn trace(&self) -> &AnytimeTrace {
        &self.trace
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn envelopes(&self) -> u64 {
        self.envelopes
    }

    /// `(round sent, envelope)` pairs, when recording.
    pub fn envelope_log(&self) -> &[(u64, Envelope)] {
        self.log.as_deref().unwrap_or(&[])
    }

    /// Envelopes of `kind` sent by `agent` while working on cycle `t`.
    pub fn sent_count(&self, agent: usize, t: u64, kind: Kind) -> u32 {
        self.sent[agent][t as usize][kind.slot()]
    }

    pub fn is_quiescent(&self) -> bool {
        self.in_flight.is_empty() && self.machines.iter().all(AgentMachine::is_done)
    }

    pub fn step(&mut self) -> Result<RoundReport, RunError> {
        let round = self.round;
        let delivered = self.in_flight.len();
        let mut inbox: Vec<Vec<Envelope>> = vec![Vec::new(); self.machines.len()];
        for env in self.in_flight.drain(..) {
            let to = env.to;
            inbox[to].push(env);
        }
        let mut fired = 0;
        let mut outgoing = Vec::new();
        for (machine, incoming) in self.machines.iter_mut().zip(inbox) {
            if round > 0 && incoming.is_empty() {
                continue;
            }
            let out = machine.fire(round, incoming)?;
            if out.progressed {
                fired += 1;
            }
            outgoing.extend(out.sent);
        }
        for env in &outgoing {
            self.envelopes += 1;
            self.scalars += env.scalars() as u64;
            self.sent[env.from][env.cycle() as usize][env.kind().slot()] += 1;
        }
        if let Some(log) = self.log.as_mut() {
            log.extend(outgoing.iter().map(|e| (round, e.clone())));
        }
        let sent = outgoing.len();
        self.in_flight = outgoing;
        let root = self.tree.root();
        for c in self.machines[root].take_completions() {
            self.trace.rows.push(TraceRow {
                iteration: c.iteration + 1,
                round: c.round,
                gbest_fitness: c.gbest_fitness,
                envelopes: self.envelopes,
                scalars: self.scalars,
            });
        }
        self.round += 1;

        if delivered == 0 && fired == 0 && !self.is_quiescent() {
            let blocked =
                self.machines.iter().filter(|m| !m.is_done()).map(AgentMachine::describe_wait).collect();
            return Err(RunError::Deadlock { round, blocked });
        }
        Ok(RoundReport { round, delivered, fired, sent })
    }

    /// Steps until nothing is in flight and every agent has applied the last
    /// verdict.
    pub fn run_to_quiescence(&mut self) -> Result<(), RunError> {
        self.run_observed(|_| {})
    }

    pub fn run_observed(&mut self, mut observe: impl FnMut(&RoundReport)) -> Result<(), RunError> {
        while !self.is_quiescent() {
            let report = self.step()?;
            observe(&report);
        }
        debug_assert_eq!(self.trace.rows.len() as u64, self.iterations);
        Ok(())
    }

    pub fn outcome(&self) -> RunOutcome {
        RunOutcome {
            final_gbest: self.trace.final_gbest().unwrap_or(f64::INFINITY),
            trace: self.trace.clone(),
            rounds: self.round,
            envelopes: self.envelopes,
            scalars: self.scalars,
        }
    }
}

/// Runs the distributed solver for `iterations` Evaluation+Update cycles and
/// returns the root's anytime trace.
pub fn run(problem: &Problem, params: &SwarmParams, iterations: u64) -> Result<AnytimeTrace, RunError> {
    Ok(run_with(problem, params, iterations, None)?.trace)
}

pub fn run_with(
    problem: &Problem,
    params: &SwarmParams,
    iterations: u64,
    init: Option<&InitialPositions>,
) -> Result<RunOutcome, RunError> {
    let mut sim = Simulator::build(problem, params, iterations, init)?;
    sim.run_to_quiescence()?;
    Ok(sim.outcome())
}
