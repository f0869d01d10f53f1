//! Hybrid genetic-algorithm / particle-swarm optimizer over box bounds.
//!
//! Iterations alternate a PSO move and a GA generation, each followed by a
//! fitness-spread check that reseeds the non-elite particles around their
//! personal bests when the swarm is too scattered. Random draws come from
//! per-(iteration, particle) ChaCha streams, so parallel fitness evaluation
//! never changes the result.

mod png;

use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use png::{png_fitness, PngFitness, PENALTY_FITNESS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    Ga,
    Pso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    /// Inclusive `(low, high)` per dimension.
    pub bounds: Vec<(f64, f64)>,
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub keep_prob: f64,
    pub cross_prob: f64,
    pub mutation_prob: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Spread threshold that triggers reseeding; `None` means half the swarm size.
    pub aggregation_threshold: Option<f64>,
    /// Per-dimension speed cap; `None` means half of each bound range.
    pub velocity_limit: Option<Vec<f64>>,
    /// Operator used on odd iterations (the first iteration is 1).
    pub odd_operator: Operator,
    pub rng_seed: u64,
}

impl SwarmConfig {
    /// Standard settings: 20 particles, 20 iterations, 20/40/40 keep/cross/mutate,
    /// constriction-factor PSO coefficients.
    pub fn with_bounds(bounds: Vec<(f64, f64)>, rng_seed: u64) -> Self {
        Self {
            bounds,
            swarm_size: 20,
            max_iterations: 20,
            keep_prob: 0.2,
            cross_prob: 0.4,
            mutation_prob: 0.4,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            aggregation_threshold: None,
            velocity_limit: None,
            odd_operator: Operator::Pso,
            rng_seed,
        }
    }

    /// Search box for pulse-and-glide tuning: `a_x1 ∈ [0, 2]`, `a_x2 ∈ [-2, 0]`.
    pub fn png_default(rng_seed: u64) -> Self {
        Self::with_bounds(vec![(0.0, 2.0), (-2.0, 0.0)], rng_seed)
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn threshold(&self) -> f64 {
        self.aggregation_threshold.unwrap_or(self.swarm_size as f64 / 2.0)
    }

    pub fn velocity_limits(&self) -> Vec<f64> {
        self.velocity_limit
            .clone()
            .unwrap_or_else(|| self.bounds.iter().map(|(lo, hi)| 0.5 * (hi - lo)).collect())
    }

    /// Elite, crossover and mutation counts; at least one elite.
    pub fn split(&self) -> (usize, usize, usize) {
        let n = self.swarm_size;
        let keep = ((self.keep_prob * n as f64).round() as usize).clamp(1, n);
        let cross = ((self.cross_prob * n as f64).round() as usize).min(n - keep);
        (keep, cross, n - keep - cross)
    }

    pub fn operator_for(&self, iteration: usize) -> Operator {
        match (iteration % 2 == 1, self.odd_operator) {
            (true, op) => op,
            (false, Operator::Pso) => Operator::Ga,
            (false, Operator::Ga) => Operator::Pso,
        }
    }

    pub fn validate(&self) -> Result<(), IgpsoError> {
        let bad = |msg: String| Err(IgpsoError::Config(msg));
        if self.bounds.is_empty() {
            return bad("at least one dimension is required".into());
        }
        for (d, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("bounds of dimension {d} must be finite with low <= high"));
            }
        }
        if self.swarm_size == 0 {
            return bad("swarm size must be at least 1".into());
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be at least 1".into());
        }
        let probs = [self.keep_prob, self.cross_prob, self.mutation_prob];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("keep, cross and mutation probabilities must lie in [0, 1]".into());
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("keep, cross and mutation probabilities must sum to 1".into());
        }
        for (name, v) in [("inertia", self.inertia), ("cognitive", self.cognitive), ("social", self.social)] {
            if !v.is_finite() {
                return bad(format!("{name} coefficient must be finite"));
            }
        }
        if let Some(t) = self.aggregation_threshold {
            if !(t >= 0.0) {
                return bad("aggregation threshold must be nonnegative".into());
            }
        }
        if let Some(v) = &self.velocity_limit {
            if v.len() != self.dims() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return bad("velocity limit needs one positive finite value per dimension".into());
            }
        }
        Ok(())
    }

    fn clamp(&self, z: &mut [f64]) {
        for (x, &(lo, hi)) in z.iter_mut().zip(&self.bounds) {
            *x = x.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Error)]
pub enum IgpsoError {
    #[error("invalid swarm configuration: {0}")]
    Config(String),
    #[error("fitness evaluation failed for particle {particle} at iteration {iteration}: {message}")]
    Fitness {
        iteration: usize,
        particle: usize,
        message: String,
    },
    #[error("fitness of particle {particle} at iteration {iteration} is not finite ({value})")]
    NonFinite {
        iteration: usize,
        particle: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_fitness: f64,
    pub iteration: usize,
    /// Global best after initialization (index 0) and after each iteration.
    pub fitness_history: Vec<f64>,
    pub evaluations: usize,
}

impl SwarmState {
    fn absorb(&mut self, slot: usize, position: Vec<f64>, fitness: f64) {
        let p = &mut self.particles[slot];
        p.position = position;
        p.fitness = fitness;
        if fitness < p.best_fitness {
            p.best_fitness = fitness;
            p.best_position = p.position.clone();
        }
        if fitness < self.global_best_fitness {
            self.global_best_fitness = fitness;
            self.global_best_position = p.position.clone();
        }
    }

    /// Slot indices ordered by current fitness, best first; ties keep slot order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.particles.len()).collect();
        idx.sort_by(|&a, &b| self.particles[a].fitness.total_cmp(&self.particles[b].fitness));
        idx
    }
}

const TAG_INIT: u64 = 1;
const TAG_GA: u64 = 2;
const TAG_PSO: u64 = 3;
const TAG_RESEED: u64 = 4;

/// Independent random stream for one particle slot at one stage of one iteration.
fn stream(seed: u64, iteration: usize, slot: usize, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) ^ ((slot as u64) << 4) ^ tag);
    rng
}

fn evaluate_all<F, E>(positions: &[(usize, Vec<f64>)], iteration: usize, fitness: &F) -> Result<Vec<f64>, IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    positions
        .par_iter()
        .map(|(slot, z)| match fitness(z) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(value) => Err(IgpsoError::NonFinite {
                iteration,
                particle: *slot,
                value,
            }),
            Err(e) => Err(IgpsoError::Fitness {
                iteration,
                particle: *slot,
                message: e.to_string(),
            }),
        })
        .collect()
}

fn apply<F, E>(state: &mut SwarmState, moves: Vec<(usize, Vec<f64>)>, fitness: &F) -> Result<(), IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    let values = evaluate_all(&moves, state.iteration, fitness)?;
    state.evaluations += values.len();
    for ((slot, z), f) in moves.into_iter().zip(values) {
        state.absorb(slot, z, f);
    }
    Ok(())
}

/// Uniform random positions inside the bounds, zero velocities, all evaluated.
pub fn initialize_swarm<F, E>(cfg: &SwarmConfig, fitness: &F) -> Result<SwarmState, IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    cfg.validate()?;
    let positions: Vec<(usize, Vec<f64>)> = (0..cfg.swarm_size)
        .map(|i| {
            let mut rng = stream(cfg.rng_seed, 0, i, TAG_INIT);
            let z = cfg
                .bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
                .collect();
            (i, z)
        })
        .collect();
    let values = evaluate_all(&positions, 0, fitness)?;
    let particles: Vec<Particle> = positions
        .into_iter()
        .zip(&values)
        .map(|((_, z), &f)| Particle {
            velocity: vec![0.0; z.len()],
            best_position: z.clone(),
            best_fitness: f,
            fitness: f,
            position: z,
        })
        .collect();
    let best = (0..particles.len())
        .min_by(|&a, &b| particles[a].fitness.total_cmp(&particles[b].fitness))
        .expect("swarm is nonempty");
    Ok(SwarmState {
        global_best_position: particles[best].position.clone(),
        global_best_fitness: particles[best].fitness,
        fitness_history: vec![particles[best].fitness],
        evaluations: particles.len(),
        particles,
        iteration: 0,
    })
}

/// Arithmetic crossover `p·a + (1 − p)·b`.
pub fn crossover(p: f64, parent1: f64, parent2: f64) -> f64 {
    p * parent1 + (1.0 - p) * parent2
}

/// One generation: keep the elites, refill the rest with crossover children and
/// Gaussian mutants of elites. Slots keep their personal-best memory.
pub fn ga_operator<F, E>(state: &mut SwarmState, cfg: &SwarmConfig, fitness: &F) -> Result<(), IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    let (keep, cross, _) = cfg.split();
    let rank = state.ranking();
    let elites: Vec<Vec<f64>> = rank[..keep].iter().map(|&s| state.particles[s].position.clone()).collect();
    let sigmas: Vec<f64> = cfg.bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo)).collect();
    let moves = rank[keep..]
        .iter()
        .enumerate()
        .map(|(k, &slot)| {
            let mut rng = stream(cfg.rng_seed, state.iteration, slot, TAG_GA);
            let mut child = if k < cross {
                let a = rng.random_range(0..keep);
                let b = if keep > 1 {
                    (a + rng.random_range(1..keep)) % keep
                } else {
                    a
                };
                let p: f64 = rng.random();
                elites[a].iter().zip(&elites[b]).map(|(&x, &y)| crossover(p, x, y)).collect::<Vec<_>>()
            } else {
                let e = &elites[rng.random_range(0..keep)];
                e.iter()
                    .zip(&sigmas)
                    .map(|(&x, &s)| match Normal::new(0.0, s) {
                        Ok(n) if s > 0.0 => x + n.sample(&mut rng),
                        _ => x,
                    })
                    .collect()
            };
            cfg.clamp(&mut child);
            (slot, child)
        })
        .collect();
    apply(state, moves, fitness)
}

/// Velocity update for one coordinate.
#[allow(clippy::too_many_arguments)]
pub fn pso_velocity(v: f64, z: f64, pb: f64, pg: f64, w: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    w * v + c1 * r1 * (pb - z) + c2 * r2 * (pg - z)
}

/// One swarm move: velocity update, velocity cap, position update, bound clamp.
pub fn pso_operator<F, E>(state: &mut SwarmState, cfg: &SwarmConfig, fitness: &F) -> Result<(), IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    let vmax = cfg.velocity_limits();
    let pg = state.global_best_position.clone();
    let mut moves = Vec::with_capacity(state.particles.len());
    for (slot, p) in state.particles.iter_mut().enumerate() {
        let mut rng = stream(cfg.rng_seed, state.iteration, slot, TAG_PSO);
        let mut z = p.position.clone();
        for d in 0..z.len() {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let v = pso_velocity(
                p.velocity[d],
                z[d],
                p.best_position[d],
                pg[d],
                cfg.inertia,
                cfg.cognitive,
                cfg.social,
                r1,
                r2,
            );
            p.velocity[d] = v.clamp(-vmax[d], vmax[d]);
            z[d] += p.velocity[d];
        }
        cfg.clamp(&mut z);
        moves.push((slot, z));
    }
    apply(state, moves, fitness)
}

/// Normalized fitness spread: deviations from the mean, scaled by the largest
/// deviation when that exceeds 1, squared and summed.
pub fn aggregation_variance(fitnesses: &[f64]) -> f64 {
    if fitnesses.is_empty() {
        return 0.0;
    }
    let avg = fitnesses.iter().sum::<f64>() / fitnesses.len() as f64;
    let max_dev = fitnesses.iter().map(|f| (f - avg).abs()).fold(0.0, f64::max);
    let scale = if max_dev > 1.0 { max_dev } else { 1.0 };
    fitnesses.iter().map(|f| ((f - avg) / scale).powi(2)).sum()
}

/// Reseed coordinate `p_b·(1 + 0.5μ)`.
pub fn reseed_coordinate(best: f64, mu: f64) -> f64 {
    best * (1.0 + 0.5 * mu)
}

/// Reseed non-elite particles around their personal bests when the spread
/// exceeds the threshold. Returns whether reseeding happened.
pub fn aggregation_check<F, E>(state: &mut SwarmState, cfg: &SwarmConfig, fitness: &F) -> Result<bool, IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    let fits: Vec<f64> = state.particles.iter().map(|p| p.fitness).collect();
    if aggregation_variance(&fits) <= cfg.threshold() {
        return Ok(false);
    }
    let (keep, _, _) = cfg.split();
    let moves = state.ranking()[keep..]
        .iter()
        .map(|&slot| {
            let mut rng = stream(cfg.rng_seed, state.iteration, slot, TAG_RESEED);
            let mu: f64 = StandardNormal.sample(&mut rng);
            let mut z: Vec<f64> = state.particles[slot]
                .best_position
                .iter()
                .map(|&b| reseed_coordinate(b, mu))
                .collect();
            cfg.clamp(&mut z);
            (slot, z)
        })
        .collect();
    apply(state, moves, fitness)?;
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub fitness_history: Vec<f64>,
    pub evaluations: usize,
    pub reseeds: usize,
}

/// Run the full optimization loop.
pub fn optimize<F, E>(cfg: &SwarmConfig, fitness: F) -> Result<OptimizeResult, IgpsoError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    let mut state = initialize_swarm(cfg, &fitness)?;
    let mut reseeds = 0;
    for j in 1..=cfg.max_iterations {
        state.iteration = j;
        match cfg.operator_for(j) {
            Operator::Ga => ga_operator(&mut state, cfg, &fitness)?,
            Operator::Pso => pso_operator(&mut state, cfg, &fitness)?,
        }
        if aggregation_check(&mut state, cfg, &fitness)? {
            reseeds += 1;
        }
        state.fitness_history.push(state.global_best_fitness);
    }
    Ok(OptimizeResult {
        best_position: state.global_best_position,
        best_fitness: state.global_best_fitness,
        fitness_history: state.fitness_history,
        evaluations: state.evaluations,
        reseeds,
    })
}

/// Serializable record of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerReport {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub fitness_history: Vec<f64>,
    pub evaluations: usize,
    pub reseeds: usize,
    pub seed: u64,
    pub config: SwarmConfig,
}

impl OptimizerReport {
    pub fn new(cfg: &SwarmConfig, result: &OptimizeResult) -> Self {
        Self {
            best_position: result.best_position.clone(),
            best_fitness: result.best_fitness,
            fitness_history: result.fitness_history.clone(),
            evaluations: result.evaluations,
            reseeds: result.reseeds,
            seed: cfg.rng_seed,
            config: cfg.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::convert::Infallible;

    fn sphere(z: &[f64]) -> Result<f64, Infallible> {
        Ok(z.iter().map(|x| x * x).sum())
    }

    fn sphere_cfg(seed: u64) -> SwarmConfig {
        SwarmConfig::with_bounds(vec![(-2.0, 2.0), (-2.0, 2.0)], seed)
    }

    #[test]
    fn split_for_twenty() {
        assert_eq!(sphere_cfg(0).split(), (4, 8, 8));
        let mut one = sphere_cfg(0);
        one.swarm_size = 1;
        assert_eq!(one.split(), (1, 0, 0));
    }

    #[test]
    fn parity_convention() {
        let cfg = sphere_cfg(0);
        assert_eq!(cfg.operator_for(1), Operator::Pso);
        assert_eq!(cfg.operator_for(2), Operator::Ga);
        let flipped = SwarmConfig {
            odd_operator: Operator::Ga,
            ..cfg
        };
        assert_eq!(flipped.operator_for(1), Operator::Ga);
        assert_eq!(flipped.operator_for(4), Operator::Pso);
    }

    #[test]
    fn init_within_bounds_and_deterministic() {
        let cfg = SwarmConfig::png_default(3);
        let a = initialize_swarm(&cfg, &sphere).unwrap();
        let b = initialize_swarm(&cfg, &sphere).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.particles.len(), 20);
        for p in &a.particles {
            assert!((0.0..=2.0).contains(&p.position[0]));
            assert!((-2.0..=0.0).contains(&p.position[1]));
            assert_eq!(p.velocity, vec![0.0, 0.0]);
            assert_eq!(p.best_position, p.position);
        }
    }

    #[test]
    fn single_particle_is_global_best() {
        let mut cfg = sphere_cfg(9);
        cfg.swarm_size = 1;
        let s = initialize_swarm(&cfg, &sphere).unwrap();
        assert_eq!(s.global_best_position, s.particles[0].position);
        let r = optimize(&cfg, sphere).unwrap();
        assert_eq!(r.fitness_history.len(), cfg.max_iterations + 1);
    }

    #[test]
    fn crossover_examples() {
        assert!((crossover(0.5, 0.4, 1.0) - 0.7).abs() < 1e-15);
        assert_eq!(crossover(1.0, 0.4, 1.0), 0.4);
        assert_eq!(crossover(0.0, 0.4, 1.0), 1.0);
    }

    #[test]
    fn pso_update_examples() {
        assert_eq!(pso_velocity(0.0, 1.0, 1.0, 1.0, 0.7, 1.5, 1.5, 0.3, 0.9), 0.0);
        // w = 0, c2 = 0, c1·r1 = 1 lands on the personal best
        let z = 0.3;
        let v = pso_velocity(5.0, z, 1.2, -7.0, 0.0, 2.0, 0.0, 0.5, 0.8);
        assert!((z + v - 1.2).abs() < 1e-15);
    }

    #[test]
    fn velocity_is_clamped() {
        let mut cfg = sphere_cfg(1);
        cfg.velocity_limit = Some(vec![0.01, 0.01]);
        let mut s = initialize_swarm(&cfg, &sphere).unwrap();
        s.iteration = 1;
        pso_operator(&mut s, &cfg, &sphere).unwrap();
        for p in &s.particles {
            assert!(p.velocity.iter().all(|v| v.abs() <= 0.01));
        }
    }

    #[test]
    fn aggregation_examples() {
        assert_eq!(aggregation_variance(&[3.0; 7]), 0.0);
        assert!((aggregation_variance(&[0.0, 10.0]) - 2.0).abs() < 1e-15);
        // small spread is not rescaled
        assert!((aggregation_variance(&[0.0, 0.2]) - 0.02).abs() < 1e-15);
        assert_eq!(reseed_coordinate(0.37, 0.0), 0.37);
    }

    #[test]
    fn constant_fitness_gives_flat_history() {
        let r = optimize(&sphere_cfg(5), |_: &[f64]| Ok::<_, Infallible>(1.0)).unwrap();
        assert!(r.fitness_history.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn sphere_converges() {
        let r = optimize(&sphere_cfg(11), sphere).unwrap();
        assert!(r.best_fitness < 1e-2, "{}", r.best_fitness);
        assert!(r.fitness_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fitness_errors_carry_particle_index() {
        let cfg = sphere_cfg(2);
        let init = initialize_swarm(&cfg, &sphere).unwrap();
        let bad = init.particles[7].position.clone();
        let err = initialize_swarm(&cfg, &|z: &[f64]| if z == bad.as_slice() { Err("boom") } else { Ok(0.0) })
            .unwrap_err();
        assert!(matches!(err, IgpsoError::Fitness { particle: 7, iteration: 0, .. }), "{err}");
        let err = initialize_swarm(&cfg, &|_: &[f64]| Ok::<_, Infallible>(f64::NAN)).unwrap_err();
        assert!(matches!(err, IgpsoError::NonFinite { .. }));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = sphere_cfg(0);
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        let mut c = sphere_cfg(0);
        c.keep_prob = 0.5;
        assert!(c.validate().is_err());
        let mut c = sphere_cfg(0);
        c.bounds = vec![(1.0, -1.0)];
        assert!(c.validate().is_err());
        let mut c = sphere_cfg(0);
        c.swarm_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn optimize_is_deterministic() {
        let a = optimize(&sphere_cfg(7), sphere).unwrap();
        let b = optimize(&sphere_cfg(7), sphere).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn crossover_stays_in_parent_hull(p in 0.0f64..=1.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let c = crossover(p, a, b);
            prop_assert!(c >= a.min(b) - 1e-12 && c <= a.max(b) + 1e-12);
        }

        #[test]
        fn operators_respect_bounds(seed in 0u64..1000, iterations in 1usize..6) {
            let mut cfg = SwarmConfig::png_default(seed);
            cfg.swarm_size = 8;
            cfg.aggregation_threshold = Some(0.0);
            let f = |z: &[f64]| Ok::<_, Infallible>((z[0] - 1.7).powi(2) + (z[1] + 1.9).powi(2));
            let mut s = initialize_swarm(&cfg, &f).unwrap();
            for j in 1..=iterations {
                s.iteration = j;
                match cfg.operator_for(j) {
                    Operator::Ga => ga_operator(&mut s, &cfg, &f).unwrap(),
                    Operator::Pso => pso_operator(&mut s, &cfg, &f).unwrap(),
                }
                aggregation_check(&mut s, &cfg, &f).unwrap();
                for p in &s.particles {
                    prop_assert!((0.0..=2.0).contains(&p.position[0]));
                    prop_assert!((-2.0..=0.0).contains(&p.position[1]));
                    prop_assert!(p.best_fitness >= s.global_best_fitness);
                }
            }
        }
    }
}
