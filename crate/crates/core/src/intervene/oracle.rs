//! Projected-gradient ascent on the sphere `‖x‖² = C`, used as an independent
//! check of the exact solver.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_STEPS: usize = 50_000;

/// Best point found by [`sphere_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Index of the start that produced `x`.
    pub start: usize,
}

/// Maximises `xᵀSx + vᵀx` over the sphere of squared radius `budget`.
///
/// Runs one ascent from each nonzero `seeds` direction and from `restarts`
/// pseudo-random directions (fixed seed), keeping the best objective and
/// the lowest start index on ties.
pub fn sphere_oracle(
    s: &DMatrix<f64>,
    v: &DVector<f64>,
    budget: f64,
    seeds: &[DVector<f64>],
    restarts: usize,
    tol: f64,
) -> OracleResult {
    let m = v.len();
    let radius = budget.sqrt();
    let mut starts: Vec<DVector<f64>> = seeds.iter().filter(|d| d.norm() > 0.0).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0f0_ac1e);
    for _ in 0..restarts {
        starts.push(DVector::from_fn(m, |_, _| rng.random::<f64>() * 2.0 - 1.0));
    }
    if starts.is_empty() {
        starts.push(DVector::from_element(m, 1.0));
    }
    let objective = |x: &DVector<f64>| x.dot(&(s * x)) + v.dot(x);
    let mut best: Option<OracleResult> = None;
    if radius == 0.0 {
        return OracleResult {
            x: DVector::zeros(m),
            objective: 0.0,
            start: 0,
        };
    }
    for (idx, dir) in starts.iter().enumerate() {
        let x = ascend(s, v, dir * (radius / dir.norm()), radius, tol);
        let val = objective(&x);
        if best.as_ref().is_none_or(|b| val > b.objective) {
            best = Some(OracleResult {
                x,
                objective: val,
                start: idx,
            });
        }
    }
    best.expect("at least one start")
}

fn ascend(
    s: &DMatrix<f64>,
    v: &DVector<f64>,
    mut x: DVector<f64>,
    radius: f64,
    tol: f64,
) -> DVector<f64> {
    let objective = |x: &DVector<f64>| x.dot(&(s * x)) + v.dot(x);
    let mut step = 1.0 / (2.0 * s.norm()).max(1e-12);
    let mut value = objective(&x);
    for _ in 0..MAX_STEPS {
        let grad = s * &x * 2.0 + v;
        let radial = grad.dot(&x) / (radius * radius);
        let tangent = &grad - &x * radial;
        if tangent.norm() <= tol * grad.norm().max(1.0) {
            break;
        }
        let mut improved = false;
        for _ in 0..60 {
            let trial = &x + &grad * step;
            let norm = trial.norm();
            if norm == 0.0 {
                step *= 0.5;
                continue;
            }
            let trial = trial * (radius / norm);
            let trial_value = objective(&trial);
            if trial_value >= value {
                improved = trial_value > value;
                x = trial;
                value = trial_value;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}
