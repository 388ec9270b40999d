//! Guaranteed-convergence PSO arithmetic, split per agent.
//!
//! Each agent owns one component of every particle. The root turns aggregated
//! fitness into a [`BestInfo`] verdict; every agent applies the same verdict
//! to its own components with [`AgentSwarmState::apply`], so the replicated
//! `rho`, success and failure counters stay identical everywhere.

use thiserror::Error;

use crate::model::ContinuousDomain;
use crate::rng::{velocity_draws, Purpose, StreamKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmError {
    #[error("invalid swarm parameters: {0}")]
    Params(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmParams {
    /// Particle count `K`.
    pub particles: usize,
    /// Inertia weight.
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_sc: u32,
    pub max_fc: u32,
    /// Limit `|v|` to the domain width after each velocity update.
    pub clamp_velocity: bool,
    pub seed: u64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self { particles: 2000, w: 0.9, c1: 0.9, c2: 0.1, max_sc: 15, max_fc: 5, clamp_velocity: false, seed: 0 }
    }
}

impl SwarmParams {
    pub fn with_particles(particles: usize, seed: u64) -> Self {
        Self { particles, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        if self.particles == 0 {
            return Err(SwarmError::Params("particle count must be at least 1".into()));
        }
        for (name, v) in [("w", self.w), ("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SwarmError::Params(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if self.max_sc == 0 || self.max_fc == 0 {
            return Err(SwarmError::Params("max_sc and max_fc must be at least 1".into()));
        }
        Ok(())
    }
}

/// The root's verdict for one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct BestInfo {
    pub iteration: u64,
    /// Particle `k` lowered its personal best this iteration.
    pub improved: Vec<bool>,
    pub pbest_fitness: Vec<f64>,
    pub gbest_index: usize,
    pub gbest_fitness: f64,
    pub gbest_changed: bool,
}

impl BestInfo {
    /// Scalars carried on the wire: flags, personal bests, index, global
    /// fitness and the changed flag.
    pub fn payload_scalars(&self) -> usize {
        2 * self.improved.len() + 3
    }
}

/// Strict `<` everywhere; ties keep the incumbent. Among particles that beat
/// the global best in the same iteration the lowest fitness wins, and on
/// equal fitness the lowest index.
pub fn root_update(
    fitness: &[f64],
    pbest_fitness: &[f64],
    gbest_fitness: f64,
    gbest_index: usize,
    t: u64,
) -> BestInfo {
    debug_assert_eq!(fitness.len(), pbest_fitness.len());
    let mut improved = vec![false; fitness.len()];
    let mut pbest = pbest_fitness.to_vec();
    let (mut g_fit, mut g_idx, mut changed) = (gbest_fitness, gbest_index, false);
    for (k, &f) in fitness.iter().enumerate() {
        if f < pbest[k] {
            pbest[k] = f;
            improved[k] = true;
        }
        if f < g_fit {
            g_fit = f;
            g_idx = k;
            changed = true;
        }
    }
    BestInfo { iteration: t, improved, pbest_fitness: pbest, gbest_index: g_idx, gbest_fitness: g_fit, gbest_changed: changed }
}

/// Root-side personal/global best bookkeeping across iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct BestTracker {
    pbest_fitness: Vec<f64>,
    gbest_fitness: f64,
    gbest_index: usize,
}

impl BestTracker {
    pub fn new(particles: usize) -> Self {
        Self { pbest_fitness: vec![f64::INFINITY; particles], gbest_fitness: f64::INFINITY, gbest_index: 0 }
    }

    pub fn update(&mut self, fitness: &[f64], t: u64) -> BestInfo {
        let best = root_update(fitness, &self.pbest_fitness, self.gbest_fitness, self.gbest_index, t);
        self.pbest_fitness.clone_from(&best.pbest_fitness);
        self.gbest_fitness = best.gbest_fitness;
        self.gbest_index = best.gbest_index;
        best
    }

    pub fn gbest_fitness(&self) -> f64 {
        self.gbest_fitness
    }
}

/// Zero velocities and positions drawn uniformly from the domain, one keyed
/// draw per particle.
pub fn init_components(particles: usize, domain: &ContinuousDomain, seed: u64, agent: usize) -> (Vec<f64>, Vec<f64>) {
    let positions = (0..particles)
        .map(|k| {
            let u = StreamKey::new(seed, Purpose::InitPosition, agent, k, 0).unit();
            domain.clamp(domain.lower + domain.width() * u)
        })
        .collect();
    (positions, vec![0.0; particles])
}

/// Velocity for every particle except the current global best.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn velocity_standard(v: f64, x: f64, pbest_c: f64, gbest_c: f64, w: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    w * v + r1 * c1 * (pbest_c - x) + r2 * c2 * (gbest_c - x)
}

/// Velocity for the global-best particle: jump to the best position and search
/// a box of radius `rho` around it.
#[inline]
pub fn velocity_gbest(v: f64, x: f64, gbest_c: f64, w: f64, rho: f64, r2: f64) -> f64 {
    -x + gbest_c + w * v + rho * (1.0 - 2.0 * r2)
}

#[inline]
pub fn position_update(x: f64, v_new: f64, domain: &ContinuousDomain) -> f64 {
    domain.clamp(x + v_new)
}

pub fn rho_update(rho: f64, s_c: u32, f_c: u32, max_sc: u32, max_fc: u32, t: u64) -> f64 {
    if t == 0 {
        1.0
    } else if s_c > max_sc {
        2.0 * rho
    } else if f_c > max_fc {
        0.5 * rho
    } else {
        rho
    }
}

/// Success counts when the previous global-best particle beat the previous
/// global best; failure counts when the global best did not move.
pub fn counters_update(s_c: u32, f_c: u32, best: &BestInfo, prev_gbest_index: usize, prev_gbest_fitness: f64) -> (u32, u32) {
    let s = if best.pbest_fitness[prev_gbest_index] < prev_gbest_fitness { s_c + 1 } else { 0 };
    let f = if !best.gbest_changed { f_c + 1 } else { 0 };
    (s, f)
}

/// One agent's share of the swarm.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSwarmState {
    /// Current positions. Between publishing and receiving the verdict these
    /// are the values under evaluation.
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_component: Vec<f64>,
    pub gbest_component: f64,
    pub gbest_index: usize,
    pub rho: f64,
    pub s_c: u32,
    pub f_c: u32,
    /// `(gbest_index, gbest_fitness)` of the last applied verdict.
    last: Option<(usize, f64)>,
}

impl AgentSwarmState {
    pub fn new(positions: Vec<f64>) -> Self {
        let k = positions.len();
        Self {
            pbest_component: positions.clone(),
            position: positions,
            velocity: vec![0.0; k],
            gbest_component: f64::NAN,
            gbest_index: 0,
            rho: 1.0,
            s_c: 0,
            f_c: 0,
            last: None,
        }
    }

    pub fn random(params: &SwarmParams, domain: &ContinuousDomain, agent: usize) -> Self {
        let (positions, _) = init_components(params.particles, domain, params.seed, agent);
        Self::new(positions)
    }

    pub fn particles(&self) -> usize {
        self.position.len()
    }

    /// Applies the verdict for iteration `best.iteration` and moves every
    /// particle one step.
    pub fn apply(&mut self, best: &BestInfo, params: &SwarmParams, agent: usize, domain: &ContinuousDomain) {
        let t = best.iteration;
        for (k, &imp) in best.improved.iter().enumerate() {
            if imp {
                self.pbest_component[k] = self.position[k];
            }
        }
        self.gbest_index = best.gbest_index;
        self.gbest_component = self.pbest_component[best.gbest_index];

        if let Some((prev_idx, prev_fit)) = self.last {
            (self.s_c, self.f_c) = counters_update(self.s_c, self.f_c, best, prev_idx, prev_fit);
        }
        self.last = Some((best.gbest_index, best.gbest_fitness));
        self.rho = rho_update(self.rho, self.s_c, self.f_c, params.max_sc, params.max_fc, t);

        let vmax = domain.width();
        for k in 0..self.position.len() {
            let (r1, r2) = velocity_draws(params.seed, agent, k, t);
            let (x, v) = (self.position[k], self.velocity[k]);
            let mut v_new = if k == best.gbest_index {
                velocity_gbest(v, x, self.gbest_component, params.w, self.rho, r2)
            } else {
                velocity_standard(v, x, self.pbest_component[k], self.gbest_component, params.w, params.c1, params.c2, r1, r2)
            };
            if params.clamp_velocity {
                v_new = v_new.clamp(-vmax, vmax);
            }
            self.velocity[k] = v_new;
            self.position[k] = position_update(x, v_new, domain);
        }
    }
}
