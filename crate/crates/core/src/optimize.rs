//! Deterministic multistart Nelder-Mead maximizer.
//!
//! Each restart draws its start point and initial simplex from its own RNG
//! stream, so restarts run in parallel and still merge to the same result for
//! a given seed.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    /// Convergence threshold on the spread of simplex values.
    pub simplex_tolerance: f64,
    /// Standard deviation of the Gaussian offsets forming the initial simplex.
    pub init_scale: f64,
    /// Standard deviation of each start-point coordinate.
    pub start_spread: f64,
    /// Keep the per-iteration best value of every restart.
    pub record_history: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_evals_per_restart: 20_000,
            simplex_tolerance: 1e-10,
            init_scale: 0.5,
            start_spread: std::f64::consts::PI,
            record_history: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals_per_restart == 0 {
            return Err(Error::InvalidConfig("restarts and evaluation budget must be positive".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.simplex_tolerance)
            || !positive(self.init_scale)
            || self.start_spread.is_nan()
            || self.start_spread < 0.0
        {
            return Err(Error::InvalidConfig("tolerance and scales must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome<T: Real> {
    pub value: T,
    pub point: Vec<T>,
    pub initial_value: T,
    pub evals: usize,
    pub converged: bool,
    /// Best objective after each iteration (empty unless requested).
    pub history: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum<T: Real> {
    pub best_value: T,
    pub best_point: Vec<T>,
    /// Total objective evaluations across restarts.
    pub evals: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartOutcome<T>>,
}

/// Maximizes `objective` over `R^n` from `config.restarts` random starts.
pub fn maximize<T, F>(objective: F, n: usize, config: &OptimizerConfig, seed: u64) -> Result<Maximum<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    config.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("problem dimension must be positive".into()));
    }
    let outcomes: Vec<RestartOutcome<T>> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng::stream(seed, k as u64);
            let start: Vec<T> =
                (0..n).map(|_| T::lit(stream.sample::<f64, _>(StandardNormal) * config.start_spread)).collect();
            nelder_mead(&objective, start, config, &mut stream)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = k;
        }
    }
    Ok(Maximum {
        best_value: outcomes[best].value,
        best_point: outcomes[best].point.clone(),
        evals: outcomes.iter().map(|o| o.evals).sum(),
        best_restart: best,
        restarts: outcomes,
    })
}

struct Counted<'a, T, F> {
    f: &'a F,
    evals: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real, F: Fn(&[T]) -> T> Counted<'_, T, F> {
    /// Negated objective, i.e. the quantity the simplex minimizes.
    fn cost(&mut self, x: &[T]) -> Result<T> {
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { point: x.iter().map(|t| t.to_f64_lossy()).collect() });
        }
        Ok(-v)
    }
}

/// One restart: simplex descent on `−objective`, re-seeding the simplex at the
/// incumbent after each convergence while the budget lasts and it keeps
/// improving.
fn nelder_mead<T, F, R>(
    objective: &F,
    start: Vec<T>,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<RestartOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> T,
    R: Rng,
{
    let n = start.len();
    let budget = config.max_evals_per_restart;
    let tol = T::lit(config.simplex_tolerance);
    let mut f = Counted { f: objective, evals: 0, _t: std::marker::PhantomData };

    let initial_cost = f.cost(&start)?;
    let mut best_point = start;
    let mut best_cost = initial_cost;
    let mut history = Vec::new();
    let mut converged = false;

    while f.evals < budget {
        let mut simplex = Vec::with_capacity(n + 1);
        simplex.push((best_point.clone(), best_cost));
        for _ in 0..n {
            if f.evals >= budget {
                break;
            }
            let v: Vec<T> = best_point
                .iter()
                .map(|&x| x + T::lit(rng.sample::<f64, _>(StandardNormal) * config.init_scale))
                .collect();
            let c = f.cost(&v)?;
            simplex.push((v, c));
        }
        if simplex.len() < n + 1 {
            break;
        }
        let entry_cost = best_cost;
        converged = descend(&mut f, &mut simplex, tol, budget, config.record_history.then_some(&mut history))?;
        let (p, c) =
            simplex.into_iter().min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite costs")).expect("nonempty simplex");
        if c < best_cost {
            best_cost = c;
            best_point = p;
        }
        if !converged || entry_cost - best_cost <= tol {
            break;
        }
    }

    Ok(RestartOutcome {
        value: -best_cost,
        point: best_point,
        initial_value: -initial_cost,
        evals: f.evals,
        converged,
        history,
    })
}

/// Runs the simplex until the value spread drops below `tol` (returns true) or
/// the evaluation budget is exhausted (returns false).
fn descend<T, F>(
    f: &mut Counted<'_, T, F>,
    simplex: &mut [(Vec<T>, T)],
    tol: T,
    budget: usize,
    mut history: Option<&mut Vec<T>>,
) -> Result<bool>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    let n = simplex.len() - 1;
    let (alpha, gamma, rho, sigma) = (T::lit(REFLECT), T::lit(EXPAND), T::lit(CONTRACT), T::lit(SHRINK));
    let along =
        |from: &[T], to: &[T], t: T| -> Vec<T> { from.iter().zip(to).map(|(&a, &b)| a + t * (b - a)).collect() };

    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite costs"));
        if let Some(h) = history.as_deref_mut() {
            h.push(-simplex[0].1);
        }
        if simplex[n].1 - simplex[0].1 < tol {
            return Ok(true);
        }
        if f.evals >= budget {
            return Ok(false);
        }

        let mut centroid = vec![T::zero(); simplex[0].0.len()];
        for (x, _) in &simplex[..n] {
            for (c, &xi) in centroid.iter_mut().zip(x) {
                *c = *c + xi;
            }
        }
        let inv = T::one() / T::from_usize(n).unwrap();
        centroid.iter_mut().for_each(|c| *c = *c * inv);

        let worst = simplex[n].1;
        let second = simplex[n - 1].1;
        let bestc = simplex[0].1;

        let xr = along(&centroid, &simplex[n].0, -alpha);
        let fr = f.cost(&xr)?;

        if fr < bestc {
            let xe = along(&centroid, &xr, gamma);
            let fe = f.cost(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second {
            simplex[n] = (xr, fr);
            continue;
        }
        if fr < worst {
            let xc = along(&centroid, &xr, rho);
            let fc = f.cost(&xc)?;
            if fc <= fr {
                simplex[n] = (xc, fc);
                continue;
            }
        } else {
            let xc = along(&centroid, &simplex[n].0, rho);
            let fc = f.cost(&xc)?;
            if fc < worst {
                simplex[n] = (xc, fc);
                continue;
            }
        }

        let x0 = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let xs = along(&x0, &v.0, sigma);
            let fs = f.cost(&xs)?;
            *v = (xs, fs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, ..OptimizerConfig::default() }
    }

    #[test]
    fn concave_bowl() {
        let m = maximize(|x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>(), 3, &small(), 1).unwrap();
        assert!(m.best_value.abs() <= 1e-8);
        assert!(m.best_point.iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn negated_rosenbrock() {
        let cfg = OptimizerConfig { simplex_tolerance: 1e-16, ..small() };
        let rosen = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let m = maximize(rosen, 2, &cfg, 9).unwrap();
        assert!((m.best_point[0] - 1.0).abs() < 1e-6, "{:?}", m.best_point);
        assert!((m.best_point[1] - 1.0).abs() < 1e-6, "{:?}", m.best_point);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = |x: &[f64]| (x[0].sin() * x[1].cos()) - 0.01 * x[2] * x[2];
        let cfg = OptimizerConfig { record_history: true, ..small() };
        let a = maximize(f, 3, &cfg, 42).unwrap();
        let b = maximize(f, 3, &cfg, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn history_monotone_and_beats_start() {
        let f = |x: &[f64]| -(x[0] - 0.3).powi(2) - (x[1] + 1.0).powi(4) + (3.0 * x[0]).cos();
        let cfg = OptimizerConfig { record_history: true, ..small() };
        let m = maximize(f, 2, &cfg, 5).unwrap();
        for r in &m.restarts {
            assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
            assert!(r.value >= r.initial_value);
            assert!(m.best_value >= r.initial_value);
        }
    }

    #[test]
    fn non_finite_objective_reports_point() {
        let err = maximize(|x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 }, 1, &small(), 3).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective { point } if point[0] > 0.0));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = OptimizerConfig { restarts: 0, ..OptimizerConfig::default() };
        assert!(maximize(|_: &[f64]| 0.0, 1, &cfg, 0).is_err());
    }
}
