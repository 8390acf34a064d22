// SPDX-License-Identifier: Apache-2.0
//! Particle swarm over real-valued cluster-by-core positions.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MappingError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub particles: usize,
    pub phi1: f64,
    pub phi2: f64,
    pub iterations: usize,
    pub v_max: f64,
    pub seed: u64,
    /// Velocity carry-over weight; `None` keeps the full previous velocity.
    pub inertia: Option<f64>,
    /// Scale the attraction terms by fresh uniform draws per component.
    pub stochastic: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particles: 20,
            phi1: 1.5,
            phi2: 1.5,
            iterations: 50,
            v_max: 0.5,
            seed: 0,
            inertia: None,
            stochastic: false,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), MappingError> {
        let bad = |m: &str| Err(MappingError::InvalidConfig(m.to_string()));
        if self.particles == 0 {
            return bad("particle count must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iteration count must be at least 1");
        }
        if !(self.phi1 >= 0.0 && self.phi2 >= 0.0 && self.phi1.is_finite() && self.phi2.is_finite()) {
            return bad("acceleration constants must be finite and non-negative");
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad("v_max must be positive");
        }
        if self.inertia.is_some_and(|w| !w.is_finite()) {
            return bad("inertia must be finite");
        }
        Ok(())
    }
}

/// Throughput as an exact fraction `iterations / time`; zero for mappings
/// that are infeasible or deadlock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fitness {
    pub iterations: u64,
    pub time: u64,
}

impl Fitness {
    pub const ZERO: Fitness = Fitness {
        iterations: 0,
        time: 1,
    };

    pub fn throughput(&self) -> f64 {
        self.iterations as f64 / self.time as f64
    }

    pub fn is_zero(&self) -> bool {
        self.iterations == 0
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fitness {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.iterations as u128 * other.time as u128;
        let b = other.iterations as u128 * self.time as u128;
        a.cmp(&b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: Fitness,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best: Fitness,
    /// Global best after initialization and after every step.
    pub history: Vec<Fitness>,
    cfg: SwarmConfig,
    rng: ChaCha8Rng,
}

/// Scores a batch of positions, one fitness each.
pub type BatchFitness<'f> = dyn FnMut(&[Vec<f64>]) -> Result<Vec<Fitness>, MappingError> + 'f;

impl Swarm {
    /// Uniform positions in `[0, 1]^dims` and velocities in
    /// `[-v_max, v_max]^dims`, then one evaluation round to seed the bests.
    pub fn new(dims: usize, cfg: &SwarmConfig, fitness: &mut BatchFitness<'_>) -> Result<Self, MappingError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut particles = Vec::with_capacity(cfg.particles);
        for _ in 0..cfg.particles {
            let position: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let velocity = (0..dims)
                .map(|_| rng.gen_range(-cfg.v_max..=cfg.v_max))
                .collect();
            particles.push(Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: Fitness::ZERO,
            });
        }
        let positions: Vec<Vec<f64>> = particles.iter().map(|p| p.position.clone()).collect();
        let scores = fitness(&positions)?;
        let mut best = 0;
        for (i, (p, &f)) in particles.iter_mut().zip(&scores).enumerate() {
            p.best_fitness = f;
            if f > scores[best] {
                best = i;
            }
        }
        Ok(Swarm {
            global_best_position: particles[best].position.clone(),
            global_best: scores[best],
            history: vec![scores[best]],
            particles,
            cfg: cfg.clone(),
            rng,
        })
    }
}

/// One swarm update: move every particle, evaluate, then refresh personal
/// and global bests. Bests only change on a strictly higher throughput.
pub fn pso_step(swarm: &mut Swarm, fitness: &mut BatchFitness<'_>) -> Result<(), MappingError> {
    let cfg = &swarm.cfg;
    for p in &mut swarm.particles {
        for k in 0..p.position.len() {
            let (r1, r2) = if cfg.stochastic {
                (swarm.rng.gen::<f64>(), swarm.rng.gen::<f64>())
            } else {
                (1.0, 1.0)
            };
            let carried = cfg.inertia.map_or(p.velocity[k], |w| w * p.velocity[k]);
            let v = carried
                + cfg.phi1 * r1 * (p.best_position[k] - p.position[k])
                + cfg.phi2 * r2 * (swarm.global_best_position[k] - p.position[k]);
            p.velocity[k] = v.clamp(-cfg.v_max, cfg.v_max);
            p.position[k] = (p.position[k] + p.velocity[k]).clamp(0.0, 1.0);
        }
    }
    let positions: Vec<Vec<f64>> = swarm.particles.iter().map(|p| p.position.clone()).collect();
    let scores = fitness(&positions)?;
    for (p, &f) in swarm.particles.iter_mut().zip(&scores) {
        if f > p.best_fitness {
            p.best_fitness = f;
            p.best_position = p.position.clone();
        }
        if f > swarm.global_best {
            swarm.global_best = f;
            swarm.global_best_position = p.position.clone();
        }
    }
    swarm.history.push(swarm.global_best);
    Ok(())
}
