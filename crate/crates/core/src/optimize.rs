//! Derivative-free minimizers for the joint GARCH/consequent parameter vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive rejections before every step scale is halved.
pub const DEFAULT_PATIENCE: usize = 50;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    /// Seeded Gaussian-perturbation hill climbing.
    #[default]
    HillClimb,
    /// Deterministic coordinate-wise grid refinement.
    CoordinateGrid,
}

#[derive(Debug, Clone)]
pub struct SearchSpace {
    /// Initial per-coordinate step scale.
    pub scales: Vec<f64>,
    /// Per-coordinate lower bound; proposals are clamped onto it.
    pub lower_bounds: Vec<f64>,
    pub patience: usize,
}

impl SearchSpace {
    /// Unbounded space with scale `0.1 * max(|x|, 0.1)` per coordinate.
    pub fn around(init: &[f64]) -> Self {
        Self {
            scales: init.iter().map(|x| 0.1 * x.abs().max(0.1)).collect(),
            lower_bounds: vec![f64::NEG_INFINITY; init.len()],
            patience: DEFAULT_PATIENCE,
        }
    }

    fn project(&self, x: &mut [f64]) {
        for (v, lb) in x.iter_mut().zip(&self.lower_bounds) {
            if *v < *lb {
                *v = *lb;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Objective at the start point followed by every accepted value.
    pub accepted: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizeOutcome {
    pub fn accepted_moves(&self) -> usize {
        self.accepted.len() - 1
    }
}

fn evaluate<F: FnMut(&[f64]) -> f64>(objective: &mut F, x: &[f64]) -> f64 {
    let v = objective(x);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn check_inputs(init: &[f64], space: &SearchSpace, iterations: usize) -> Result<()> {
    if iterations == 0 {
        return Err(Error::invalid("optimizer budget must be >= 1"));
    }
    if space.scales.len() != init.len() || space.lower_bounds.len() != init.len() {
        return Err(Error::LengthMismatch {
            left: init.len(),
            right: space.scales.len(),
        });
    }
    Ok(())
}

/// Hill climbing with Gaussian proposals.
///
/// Each proposal perturbs a random subset of coordinates (about two on
/// average, never none) by `N(0, scale_i^2)`, is projected onto the lower
/// bounds, and is accepted only if it strictly lowers the objective. After
/// `patience` consecutive rejections every scale is halved.
pub fn optimize_params<F>(
    mut objective: F,
    init: &[f64],
    iterations: usize,
    seed: u64,
    space: &SearchSpace,
) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    check_inputs(init, space, iterations)?;
    let mut current = init.to_vec();
    space.project(&mut current);
    let mut value = objective(&current);
    if !value.is_finite() {
        return Err(Error::NonFinite("objective at initial point"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scales = space.scales.clone();
    let mut accepted = vec![value];
    let mut rejections = 0;
    let dim = current.len();
    let p_mutate = if dim == 0 { 1.0 } else { (2.0 / dim as f64).min(1.0) };
    let mut candidate = current.clone();

    for _ in 0..iterations {
        candidate.copy_from_slice(&current);
        if dim > 0 {
            let forced = rng.random_range(0..dim);
            for (i, c) in candidate.iter_mut().enumerate() {
                if i == forced || rng.random::<f64>() < p_mutate {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *c += scales[i] * z;
                }
            }
        }
        space.project(&mut candidate);
        let v = evaluate(&mut objective, &candidate);
        if v < value {
            std::mem::swap(&mut current, &mut candidate);
            value = v;
            accepted.push(v);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections % space.patience.max(1) == 0 {
                scales.iter_mut().for_each(|s| *s *= 0.5);
            }
        }
    }
    Ok(OptimizeOutcome {
        best: current,
        best_value: value,
        accepted,
        evaluations: iterations,
    })
}

/// Cyclic coordinate search over the offsets `{-2, -1, 1, 2} * step_i`,
/// halving all steps after a full sweep without improvement. Consumes
/// exactly `iterations` objective evaluations.
pub fn optimize_grid<F>(
    mut objective: F,
    init: &[f64],
    iterations: usize,
    space: &SearchSpace,
) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    check_inputs(init, space, iterations)?;
    let mut current = init.to_vec();
    space.project(&mut current);
    let mut value = objective(&current);
    if !value.is_finite() {
        return Err(Error::NonFinite("objective at initial point"));
    }
    let mut steps = space.scales.clone();
    let mut accepted = vec![value];
    let mut used = 0;
    let dim = current.len();
    'outer: while used < iterations && dim > 0 {
        let mut improved = false;
        for i in 0..dim {
            for k in [-2.0, -1.0, 1.0, 2.0] {
                if used == iterations {
                    break 'outer;
                }
                let mut cand = current.clone();
                cand[i] += k * steps[i];
                space.project(&mut cand);
                used += 1;
                let v = evaluate(&mut objective, &cand);
                if v < value {
                    current = cand;
                    value = v;
                    accepted.push(v);
                    improved = true;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok(OptimizeOutcome {
        best: current,
        best_value: value,
        accepted,
        evaluations: used,
    })
}
