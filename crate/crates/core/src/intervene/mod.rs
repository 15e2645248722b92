//! The planner's problem: shift baseline marginal utilities on a subset of
//! activities, under a quadratic budget, to maximise equilibrium welfare.
//!
//! With `x` the shift on the allowed activities, welfare is
//! `Ŵ + xᵀSx + vᵀx` where `S` is the restricted welfare matrix and
//! `v = 2·(restricted rows of P)·â`, so the problem is a ball-constrained
//! quadratic program.

mod oracle;
mod qp;

use nalgebra::{DMatrix, DVector};

pub use oracle::{sphere_oracle, OracleResult};
pub use qp::{
    qp_solve, qp_solve_spectral, qp_solve_weighted, QpInstance, QpSolution, HARD_CASE_TOL,
};

use crate::game::{equilibrium, ActivitySet, GameParams, UtilityVector};
use crate::welfare::{top_candidates, Restriction, WelfareMatrix};
use crate::{linalg, Error, Result};

/// A restricted, budgeted intervention problem.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionProblem {
    params: GameParams,
    a_hat: UtilityVector,
    set: ActivitySet,
    budget: f64,
    costs: Option<Vec<f64>>,
}

impl InterventionProblem {
    pub fn new(
        params: GameParams,
        a_hat: UtilityVector,
        set: ActivitySet,
        budget: f64,
    ) -> Result<Self> {
        if a_hat.k() != params.k() || a_hat.n() != params.n() {
            return Err(Error::Dimension(format!(
                "baseline is shaped for k = {}, n = {} but the game has k = {}, n = {}",
                a_hat.k(),
                a_hat.n(),
                params.k(),
                params.n()
            )));
        }
        if set.k() != params.k() {
            return Err(Error::InvalidActivitySet(format!(
                "activity set built for k = {} but the game has k = {}",
                set.k(),
                params.k()
            )));
        }
        check_budget(budget)?;
        Ok(Self {
            params,
            a_hat,
            set,
            budget,
            costs: None,
        })
    }

    /// Per-activity prices `τ_s > 0`; the budget then bounds `Σ τ_s ‖aˢ − âˢ‖²`.
    pub fn with_costs(mut self, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != self.params.k() {
            return Err(Error::Dimension(format!(
                "expected {} activity costs, got {}",
                self.params.k(),
                costs.len()
            )));
        }
        if let Some(bad) = costs.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "activity costs must be positive, got {bad}"
            )));
        }
        self.costs = Some(costs);
        Ok(self)
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        check_budget(budget)?;
        Ok(Self {
            budget,
            ..self.clone()
        })
    }

    pub fn with_set(&self, set: ActivitySet) -> Result<Self> {
        let mut out = Self::new(self.params.clone(), self.a_hat.clone(), set, self.budget)?;
        out.costs = self.costs.clone();
        Ok(out)
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn a_hat(&self) -> &UtilityVector {
        &self.a_hat
    }

    pub fn set(&self) -> &ActivitySet {
        &self.set
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn costs(&self) -> Option<&[f64]> {
        self.costs.as_deref()
    }

    /// `Σ_s τ_s ‖shiftˢ‖²`.
    pub fn shift_cost(&self, shift: &UtilityVector) -> f64 {
        (0..self.params.k())
            .map(|s| self.cost_of(s) * shift.block(s).norm_squared())
            .sum()
    }

    fn cost_of(&self, s: usize) -> f64 {
        self.costs.as_ref().map_or(1.0, |c| c[s])
    }

    fn restricted_costs(&self) -> Vec<f64> {
        self.set
            .indices()
            .iter()
            .map(|&s| self.cost_of(s))
            .collect()
    }

    fn reduce(&self) -> Result<Reduction> {
        let wm = WelfareMatrix::build(&self.params)?;
        let restriction = wm.restrict(&self.set)?;
        let v = restriction.apply_rows(&self.a_hat) * 2.0;
        Ok(Reduction { restriction, v })
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if budget >= 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "budget must be finite and nonnegative, got {budget}"
        )))
    }
}

struct Reduction {
    restriction: Restriction,
    /// `2·P^𝓛â` over the allowed activities.
    v: DVector<f64>,
}

impl Reduction {
    fn gain(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.restriction.apply_ll(x)) + self.v.dot(x)
    }
}

/// Optimal intervention with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionResult {
    pub a_star: UtilityVector,
    /// `a* − â`; zero outside the allowed activities.
    pub shift: UtilityVector,
    /// Equilibrium welfare at `a*`, summed over agents.
    pub welfare: f64,
    /// Equilibrium welfare at `â`.
    pub baseline_welfare: f64,
    /// Welfare improvement, evaluated as the quadratic objective of the shift.
    pub welfare_gain: f64,
    pub multiplier: f64,
    pub binding: bool,
    pub hard_case: bool,
    /// Fraction of the shift lying in the top eigenspace of the restricted welfare matrix.
    pub alignment: f64,
    pub kkt_residual: f64,
}

/// Solves the restricted intervention problem exactly.
pub fn optimal_intervention(prob: &InterventionProblem) -> Result<InterventionResult> {
    let red = prob.reduce()?;
    let sol = match prob.costs {
        None => {
            let ss = red.restriction.structured_eigen();
            qp_solve_spectral(&ss.values(), &ss.vectors(), &red.v, prob.budget)?
        }
        Some(_) => {
            let inst = QpInstance::new(red.restriction.dense_ll(), red.v.clone(), prob.budget)?;
            qp_solve_weighted(
                &inst,
                &cost_matrix(&prob.restricted_costs(), prob.params.n()),
            )?
        }
    };
    let shift = prob.set.scatter(&sol.x, prob.params.n());
    let welfare_gain = red.gain(&sol.x);
    finish_result(
        prob,
        shift,
        welfare_gain,
        sol.multiplier,
        sol.binding,
        sol.hard_case,
        sol.alignment,
        sol.kkt_residual,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_result(
    prob: &InterventionProblem,
    shift: UtilityVector,
    welfare_gain: f64,
    multiplier: f64,
    binding: bool,
    hard_case: bool,
    alignment: f64,
    kkt_residual: f64,
) -> Result<InterventionResult> {
    let a_star = add(&prob.a_hat, &shift);
    let welfare = equilibrium(&prob.params, &a_star)?.welfare;
    let baseline_welfare = equilibrium(&prob.params, &prob.a_hat)?.welfare;
    Ok(InterventionResult {
        a_star,
        shift,
        welfare,
        baseline_welfare,
        welfare_gain,
        multiplier,
        binding,
        hard_case,
        alignment,
        kkt_residual,
    })
}

fn add(a: &UtilityVector, b: &UtilityVector) -> UtilityVector {
    UtilityVector::new(a.k(), a.n(), a.values() + b.values()).expect("same shape")
}

fn cost_matrix(costs: &[f64], n: usize) -> DMatrix<f64> {
    let diag = DVector::from_fn(costs.len() * n, |i, _| costs[i / n]);
    DMatrix::from_diagonal(&diag)
}

/// Welfare improvement `W(a) − Ŵ` of an intervention that leaves the frozen
/// activities untouched, computed from the shift without cancellation.
pub fn intervention_gain(prob: &InterventionProblem, a: &UtilityVector) -> Result<f64> {
    if a.k() != prob.params.k() || a.n() != prob.params.n() {
        return Err(Error::Dimension("intervention has the wrong shape".into()));
    }
    let shift = UtilityVector::new(a.k(), a.n(), a.values() - prob.a_hat.values())?;
    for s in 0..prob.params.k() {
        if !prob.set.contains(s) && shift.block(s).iter().any(|&d| d != 0.0) {
            return Err(Error::InvalidActivitySet(format!(
                "activity {} is frozen but the intervention changes it",
                s + 1
            )));
        }
    }
    let red = prob.reduce()?;
    Ok(red.gain(&prob.set.gather(&shift)))
}

/// Equilibrium welfare at marginal utilities `a`.
pub fn welfare_at(params: &GameParams, a: &UtilityVector) -> Result<f64> {
    Ok(equilibrium(params, a)?.welfare)
}

/// Shape of a closed-form large-budget intervention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleForm {
    /// The same direction on every allowed activity.
    Spread,
    /// Opposite directions on the first two allowed activities.
    Pair,
    /// The whole budget on the first allowed activity.
    Single,
}

/// Unit-direction shift of the given form, scaled so its cost equals the budget.
pub fn simple_shift(prob: &InterventionProblem, form: SimpleForm) -> Result<UtilityVector> {
    let params = &prob.params;
    let (k, n) = (params.k(), params.n());
    let u = params.spectrum().top_direction(params.delta());
    let members = prob.set.indices();
    let mut shift = UtilityVector::zeros(k, n);
    match form {
        SimpleForm::Spread => {
            for &s in members {
                shift.block_mut(s).copy_from(&u);
            }
        }
        SimpleForm::Pair => {
            if members.len() < 2 {
                return Err(Error::InvalidActivitySet(
                    "the paired form needs at least two allowed activities".into(),
                ));
            }
            shift.block_mut(members[0]).copy_from(&u);
            shift.block_mut(members[1]).copy_from(&(-&u));
        }
        SimpleForm::Single => {
            shift.block_mut(members[0]).copy_from(&u);
        }
    }
    let cost = prob.shift_cost(&shift);
    let scale = (prob.budget / cost).sqrt();
    UtilityVector::new(k, n, shift.values() * scale)
}

/// Which closed-form shape the large-budget construction uses.
pub fn simple_form(params: &GameParams, l: usize) -> SimpleForm {
    let beta = params.beta();
    if l == 1 {
        return SimpleForm::Single;
    }
    if params.has_spillover() {
        if beta < 0.0 {
            return SimpleForm::Spread;
        }
        let (spread, pair) = top_candidates(params, l);
        return if pair > spread {
            SimpleForm::Pair
        } else {
            SimpleForm::Spread
        };
    }
    if beta < 0.0 {
        SimpleForm::Spread
    } else if beta > 0.0 {
        SimpleForm::Pair
    } else {
        SimpleForm::Single
    }
}

/// Closed-form intervention built from an extreme eigenvector `u` of `δG`
/// (the Perron vector for `δ ≥ 0`, the first `λ_min` eigenvector otherwise).
///
/// Complements spread the budget equally over the allowed activities;
/// substitutes push `u` on one activity and `−u` on another; a single
/// allowed activity, or `β = 0`, gets the whole budget on one activity.
/// Returns the intervened utilities `â + shift`.
pub fn simple_intervention(prob: &InterventionProblem) -> Result<UtilityVector> {
    prob.params.ensure_valid()?;
    let shift = simple_shift(prob, simple_form(&prob.params, prob.set.len()))?;
    Ok(add(&prob.a_hat, &shift))
}

/// Small-budget intervention: shift along `P^𝓛â` (divided by the activity
/// prices when costs differ), scaled to exhaust the budget.
pub fn small_budget_intervention(prob: &InterventionProblem) -> Result<UtilityVector> {
    let red = prob.reduce()?;
    let n = prob.params.n();
    let mut dir = red.v * 0.5;
    for (pos, tau) in prob.restricted_costs().into_iter().enumerate() {
        dir.rows_mut(pos * n, n).unscale_mut(tau);
    }
    let scale = dir.amax();
    if scale == 0.0 || prob.a_hat.values().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroBaseline(
            "the small-budget construction needs nonzero baseline utilities; use the simple intervention instead"
                .into(),
        ));
    }
    let shift = prob.set.scatter(&dir, n);
    let cost = prob.shift_cost(&shift);
    let shift = UtilityVector::new(
        prob.params.k(),
        n,
        shift.values() * (prob.budget / cost).sqrt(),
    )?;
    Ok(add(&prob.a_hat, &shift))
}

/// Budgets above which the simple intervention is within a factor `1 + ε` of optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBudget {
    /// `9 λ_max ‖â‖² / (d ε)`.
    pub coarse: f64,
    /// `(1/λ_max + 1/(2d) + 1/(2√(d λ_max ε)))² ‖v‖²` with `‖v‖ = 2‖P^𝓛â‖`.
    pub sharp: f64,
    pub lambda_max: f64,
    pub gap: f64,
}

/// Budget thresholds for near-optimality of the simple intervention, from the
/// top eigenvalue and spectral gap of the restricted welfare matrix. Costs,
/// if any, are ignored.
pub fn budget_for_epsilon(prob: &InterventionProblem, eps: f64) -> Result<EpsilonBudget> {
    let red = prob.reduce()?;
    let ss = red.restriction.structured_eigen();
    let lambda_max = ss.top().value;
    let gap = ss.gap();
    if prob.a_hat.values().iter().all(|&x| x == 0.0) {
        return Ok(EpsilonBudget {
            coarse: 0.0,
            sharp: 0.0,
            lambda_max,
            gap,
        });
    }
    if gap <= 0.0 {
        return Err(Error::DegenerateGap);
    }
    let limit = (gap / lambda_max).min(lambda_max / (4.0 * gap));
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::Precondition(format!(
            "epsilon must lie in (0, {limit:.6e}) for this gap and top eigenvalue, got {eps}"
        )));
    }
    let a_norm2 = prob.a_hat.values().norm_squared();
    let coarse = 9.0 * lambda_max * a_norm2 / (gap * eps);
    let v_norm = red.v.norm();
    let factor =
        1.0 / lambda_max + 1.0 / (2.0 * gap) + 1.0 / (2.0 * (gap * lambda_max * eps).sqrt());
    let sharp = factor * factor * v_norm * v_norm;
    Ok(EpsilonBudget {
        coarse,
        sharp,
        lambda_max,
        gap,
    })
}

/// Independent check of [`optimal_intervention`] by projected-gradient
/// ascent from the `v` direction, every structured eigenvector (both signs)
/// and `restarts` pseudo-random directions.
pub fn oracle_optimize(
    prob: &InterventionProblem,
    restarts: usize,
    tol: f64,
) -> Result<InterventionResult> {
    let red = prob.reduce()?;
    let n = prob.params.n();
    let ss = red.restriction.structured_eigen();
    let mut seeds = vec![red.v.clone()];
    for idx in 0..ss.len() {
        let e = ss.vector(idx);
        seeds.push(-&e);
        seeds.push(e);
    }
    // work in y = T^{1/2} x so the constraint is a sphere
    let scales: Vec<f64> = prob
        .restricted_costs()
        .iter()
        .map(|t| 1.0 / t.sqrt())
        .collect();
    let dim = red.v.len();
    let inv_half = DVector::from_fn(dim, |i, _| scales[i / n]);
    let mut s = red.restriction.dense_ll();
    for i in 0..dim {
        for j in 0..dim {
            s[(i, j)] *= inv_half[i] * inv_half[j];
        }
    }
    let v = red.v.component_mul(&inv_half);
    let found = sphere_oracle(&s, &v, prob.budget, &seeds, restarts, tol);
    let x = found.x.component_mul(&inv_half);
    let gain = red.gain(&x);
    let multiplier = if prob.budget > 0.0 {
        (found.x.dot(&(&s * &found.x)) + 0.5 * v.dot(&found.x)) / prob.budget
    } else {
        f64::INFINITY
    };
    let top = ss.top();
    let alignment = if x.norm() > 0.0 {
        linalg::projection_norm(&top.basis, &x) / x.norm()
    } else {
        0.0
    };
    let kkt_residual = (&s * &found.x - &found.x * multiplier + &v * 0.5).norm();
    let shift = prob.set.scatter(&x, n);
    finish_result(
        prob,
        shift,
        gain,
        multiplier,
        prob.budget > 0.0,
        false,
        alignment,
        kkt_residual,
    )
}
