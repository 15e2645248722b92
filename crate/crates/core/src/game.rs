//! The multi-activity game: parameters, regularity margins, the closed-form
//! equilibrium, payoffs and a best-response oracle.

use std::fmt;

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use crate::graph::{Network, Spectrum};
use crate::{Error, Result, MARGIN_THRESHOLD};

/// Network, activity count and interaction parameters.
///
/// `beta` is the cross-activity cost interaction (positive for substitutes),
/// `delta` the within-activity network spillover and `gamma` the
/// cross-activity network spillover.
#[derive(Debug, Clone, PartialEq)]
pub struct GameParams {
    net: Network,
    spectrum: Spectrum,
    k: usize,
    beta: f64,
    delta: f64,
    gamma: f64,
}

impl GameParams {
    pub fn new(net: Network, k: usize, beta: f64, delta: f64) -> Result<Self> {
        Self::with_gamma(net, k, beta, delta, 0.0)
    }

    /// Parameters with a cross-activity spillover. `gamma` must lie between
    /// 0 and `delta` (inclusive).
    pub fn with_gamma(net: Network, k: usize, beta: f64, delta: f64, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        for (name, value) in [("beta", beta), ("delta", delta), ("gamma", gamma)] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        let gamma_ok =
            gamma == 0.0 || (0.0 <= gamma && gamma <= delta) || (delta <= gamma && gamma <= 0.0);
        if !gamma_ok {
            return Err(Error::InvalidParams(format!(
                "gamma = {gamma} must lie between 0 and delta = {delta}"
            )));
        }
        let spectrum = net.spectral_decompose();
        Ok(Self {
            net,
            spectrum,
            k,
            beta,
            delta,
            gamma,
        })
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn has_spillover(&self) -> bool {
        self.gamma != 0.0
    }

    /// Same game with a different `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let mut out = self.clone();
        if !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "beta must be finite, got {beta}"
            )));
        }
        out.beta = beta;
        Ok(out)
    }

    /// Same network with different spillovers.
    pub fn with_spillovers(&self, delta: f64, gamma: f64) -> Result<Self> {
        let mut out = Self::with_gamma(self.net.clone(), self.k, self.beta, delta, gamma)?;
        out.spectrum = self.spectrum.clone();
        Ok(out)
    }

    /// `1 + (k−1)β`, the cost curvature along the all-activities direction.
    pub fn sum_scale(&self) -> f64 {
        1.0 + (self.k as f64 - 1.0) * self.beta
    }

    /// `1 − β`, the cost curvature across activities. Equals the sum scale when `k = 1`.
    pub fn diff_scale(&self) -> f64 {
        if self.k == 1 {
            self.sum_scale()
        } else {
            1.0 - self.beta
        }
    }

    /// `δ + (k−1)γ`.
    pub fn sum_spill(&self) -> f64 {
        self.delta + (self.k as f64 - 1.0) * self.gamma
    }

    /// `δ − γ`. Equals the sum spillover when `k = 1`.
    pub fn diff_spill(&self) -> f64 {
        if self.k == 1 {
            self.sum_spill()
        } else {
            self.delta - self.gamma
        }
    }

    /// Eigenvalue of `M₊` paired with the network eigenvalue `lambda`.
    pub fn sum_factor(&self, lambda: f64) -> f64 {
        1.0 / (self.sum_scale() - self.sum_spill() * lambda)
    }

    /// Eigenvalue of `M₋` paired with the network eigenvalue `lambda`.
    pub fn diff_factor(&self, lambda: f64) -> f64 {
        1.0 / (self.diff_scale() - self.diff_spill() * lambda)
    }

    /// Largest eigenvalue of `c·G`.
    pub fn scaled_lambda_max(&self, c: f64) -> f64 {
        self.spectrum.scaled_max(c)
    }

    pub fn margins(&self) -> AssumptionMargins {
        check_assumption(self)
    }

    /// Errors unless both margins exceed the threshold.
    pub fn ensure_valid(&self) -> Result<AssumptionMargins> {
        let m = self.margins();
        if m.holds() {
            Ok(m)
        } else {
            Err(Error::AssumptionViolated {
                sum: m.sum,
                diff: m.diff,
            })
        }
    }

    /// Cost-interaction regime.
    pub fn regime(&self) -> Regime {
        Regime::of(self.beta)
    }
}

/// Sign of the cost interaction between activities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Substitutes,
    Complements,
    Independent,
}

impl Regime {
    pub fn of(beta: f64) -> Self {
        if beta > 0.0 {
            Regime::Substitutes
        } else if beta < 0.0 {
            Regime::Complements
        } else {
            Regime::Independent
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Substitutes => "substitutes",
            Regime::Complements => "complements",
            Regime::Independent => "independent",
        })
    }
}

/// The two regularity margins. Both must exceed [`MARGIN_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionMargins {
    /// `1 + (k−1)β − λ_max` along the activity-sum direction.
    pub sum: f64,
    /// `1 − β − λ_max` along activity differences.
    pub diff: f64,
}

impl AssumptionMargins {
    pub fn holds(&self) -> bool {
        self.sum > MARGIN_THRESHOLD && self.diff > MARGIN_THRESHOLD
    }
}

/// Computes the regularity margins.
///
/// Without cross spillovers these are `1+(k−1)β − λ_max(δG)` and
/// `1−β − λ_max(δG)`; with them the spillover coefficients enter in
/// absolute value against `λ_max(G)`.
pub fn check_assumption(params: &GameParams) -> AssumptionMargins {
    let spec = params.spectrum();
    let (sum, diff) = if params.has_spillover() {
        let lmax = spec.lambda_max();
        (
            params.sum_scale() - params.sum_spill().abs() * lmax,
            params.diff_scale() - params.diff_spill().abs() * lmax,
        )
    } else {
        let lam = spec.scaled_max(params.delta());
        (params.sum_scale() - lam, params.diff_scale() - lam)
    };
    AssumptionMargins { sum, diff }
}

/// One value per (activity, agent) pair, activity-major: all agents for
/// activity 1, then activity 2, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    k: usize,
    n: usize,
    values: DVector<f64>,
}

impl UtilityVector {
    pub fn new(k: usize, n: usize, values: DVector<f64>) -> Result<Self> {
        if values.len() != k * n {
            return Err(Error::Dimension(format!(
                "expected {} = {k}·{n} entries, got {}",
                k * n,
                values.len()
            )));
        }
        Ok(Self { k, n, values })
    }

    pub fn from_slice(k: usize, n: usize, values: &[f64]) -> Result<Self> {
        Self::new(k, n, DVector::from_column_slice(values))
    }

    pub fn zeros(k: usize, n: usize) -> Self {
        Self {
            k,
            n,
            values: DVector::zeros(k * n),
        }
    }

    /// The same per-agent vector repeated for every activity.
    pub fn repeated(k: usize, block: &[f64]) -> Self {
        let n = block.len();
        let mut values = DVector::zeros(k * n);
        for s in 0..k {
            values.rows_mut(s * n, n).copy_from_slice(block);
        }
        Self { k, n, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.values
    }

    /// Entries for activity `s` (0-based).
    pub fn block(&self, s: usize) -> DVectorView<'_, f64> {
        self.values.rows(s * self.n, self.n)
    }

    pub fn block_mut(&mut self, s: usize) -> DVectorViewMut<'_, f64> {
        self.values.rows_mut(s * self.n, self.n)
    }

    pub fn get(&self, agent: usize, activity: usize) -> f64 {
        self.values[activity * self.n + agent]
    }

    /// Sum over activities, one entry per agent.
    pub fn activity_sum(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for s in 0..self.k {
            out += self.block(s);
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    fn check_shape(&self, params: &GameParams) -> Result<()> {
        if self.k != params.k() || self.n != params.n() {
            return Err(Error::Dimension(format!(
                "vector is shaped for k = {}, n = {} but the game has k = {}, n = {}",
                self.k,
                self.n,
                params.k(),
                params.n()
            )));
        }
        Ok(())
    }
}

/// Nonempty set of activities (0-based, sorted, distinct).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivitySet {
    k: usize,
    members: Vec<usize>,
}

impl ActivitySet {
    /// From 0-based indices in any order.
    pub fn new(k: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidActivitySet("activity set is empty".into()));
        }
        let mut members = indices.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.len() != indices.len() {
            return Err(Error::InvalidActivitySet(format!(
                "duplicate activities in {indices:?}"
            )));
        }
        if let Some(&bad) = members.iter().find(|&&s| s >= k) {
            return Err(Error::InvalidActivitySet(format!(
                "activity index {bad} is out of range for k = {k}"
            )));
        }
        Ok(Self { k, members })
    }

    /// From 1-based activity labels.
    pub fn from_labels(k: usize, labels: &[usize]) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&s| s == 0 || s > k) {
            return Err(Error::InvalidActivitySet(format!(
                "activity label {bad} is out of range 1..={k}"
            )));
        }
        let zero_based: Vec<usize> = labels.iter().map(|s| s - 1).collect();
        Self::new(k, &zero_based)
    }

    /// The first `l` activities.
    pub fn prefix(k: usize, l: usize) -> Result<Self> {
        if l == 0 || l > k {
            return Err(Error::InvalidActivitySet(format!(
                "prefix length {l} not in 1..={k}"
            )));
        }
        Ok(Self {
            k,
            members: (0..l).collect(),
        })
    }

    pub fn all(k: usize) -> Self {
        Self {
            k,
            members: (0..k).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.k
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, s: usize) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.members.iter().map(|s| s + 1).collect()
    }

    /// Stacks the blocks of `full` that belong to the set.
    pub fn gather(&self, full: &UtilityVector) -> DVector<f64> {
        let n = full.n();
        let mut out = DVector::zeros(self.len() * n);
        for (pos, &s) in self.members.iter().enumerate() {
            out.rows_mut(pos * n, n).copy_from(&full.block(s));
        }
        out
    }

    /// Spreads a stacked restricted vector over a zero `k·n` vector.
    pub fn scatter(&self, restricted: &DVector<f64>, n: usize) -> UtilityVector {
        let mut out = UtilityVector::zeros(self.k, n);
        for (pos, &s) in self.members.iter().enumerate() {
            out.block_mut(s).copy_from(&restricted.rows(pos * n, n));
        }
        out
    }
}

/// Equilibrium actions with their payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub x_star: UtilityVector,
    pub welfare: f64,
    pub per_agent_utilities: Vec<f64>,
    /// Norm of the first-order-condition residual at `x_star`.
    pub foc_residual: f64,
}

/// The two resolvents acting on activity sums and activity differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolvents {
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

/// `M₊ = [(1+(k−1)β)I − (δ+(k−1)γ)G]⁻¹` and `M₋ = [(1−β)I − (δ−γ)G]⁻¹`,
/// built from the network eigenbasis.
pub fn m_matrices(params: &GameParams) -> Result<Resolvents> {
    params.ensure_valid()?;
    let spec = params.spectrum();
    Ok(Resolvents {
        plus: spec.map(|l| params.sum_factor(l)),
        minus: spec.map(|l| params.diff_factor(l)),
    })
}

/// `(C ⊗ I − Π ⊗ G) x`, the left side of the first-order conditions.
pub fn foc_operator(params: &GameParams, x: &UtilityVector) -> DVector<f64> {
    let (k, n) = (params.k(), params.n());
    let g = params.net().weights();
    let total = x.activity_sum();
    let g_total = g * &total;
    let (beta, delta, gamma) = (params.beta(), params.delta(), params.gamma());
    let mut out = DVector::zeros(k * n);
    for s in 0..k {
        let xs = x.block(s);
        let g_xs = g * xs;
        let mut block = xs * (1.0 - beta) + &total * beta;
        block -= g_xs * (delta - gamma) + &g_total * gamma;
        out.rows_mut(s * n, n).copy_from(&block);
    }
    out
}

fn equilibrium_actions(params: &GameParams, res: &Resolvents, a: &UtilityVector) -> UtilityVector {
    let (k, n) = (params.k(), params.n());
    let mean = a.activity_sum() / k as f64;
    let common = &res.plus * &mean;
    let mut x = UtilityVector::zeros(k, n);
    for s in 0..k {
        let dev = a.block(s) - &mean;
        let xs = &res.minus * dev + &common;
        x.block_mut(s).copy_from(&xs);
    }
    x
}

/// Closed-form equilibrium: `M₋` applied to each activity's deviation from
/// the activity mean plus `M₊` applied to the mean.
pub fn equilibrium(params: &GameParams, a: &UtilityVector) -> Result<EquilibriumResult> {
    a.check_shape(params)?;
    let res = m_matrices(params)?;
    let x = equilibrium_actions(params, &res, a);
    let foc_residual = (a.values() - foc_operator(params, &x)).norm();
    let per_agent_utilities: Vec<f64> = (0..params.n())
        .map(|i| utility_unchecked(params, i, &x, a))
        .collect();
    let welfare = per_agent_utilities.iter().sum();
    Ok(EquilibriumResult {
        x_star: x,
        welfare,
        per_agent_utilities,
        foc_residual,
    })
}

/// Payoff of agent `i` at actions `x` and marginal utilities `a`, evaluated
/// term by term: direct benefit, quadratic cost with cross-activity
/// interaction, and network spillovers within and across activities.
pub fn agent_utility(
    params: &GameParams,
    i: usize,
    x: &UtilityVector,
    a: &UtilityVector,
) -> Result<f64> {
    x.check_shape(params)?;
    a.check_shape(params)?;
    if i >= params.n() {
        return Err(Error::Dimension(format!(
            "agent {i} out of range 0..{}",
            params.n()
        )));
    }
    Ok(utility_unchecked(params, i, x, a))
}

fn utility_unchecked(params: &GameParams, i: usize, x: &UtilityVector, a: &UtilityVector) -> f64 {
    let (k, n) = (params.k(), params.n());
    let g = params.net().weights();
    let (beta, delta, gamma) = (params.beta(), params.delta(), params.gamma());
    let mut benefit = 0.0;
    let mut own_cost = 0.0;
    let mut cross_cost = 0.0;
    let mut within = 0.0;
    let mut across = 0.0;
    for s in 0..k {
        let xis = x.get(i, s);
        benefit += a.get(i, s) * xis;
        own_cost += xis * xis;
        for t in 0..k {
            if t != s {
                cross_cost += xis * x.get(i, t);
            }
        }
        for j in 0..n {
            let gij = g[(i, j)];
            if gij == 0.0 {
                continue;
            }
            within += gij * xis * x.get(j, s);
            for t in 0..k {
                if t != s {
                    across += gij * xis * x.get(j, t);
                }
            }
        }
    }
    benefit - 0.5 * own_cost - 0.5 * beta * cross_cost + delta * within + gamma * across
}

/// Iterated best responses until the largest change in a sweep drops below `tol`.
///
/// Agents update one at a time, each solving its own `k`-dimensional
/// first-order conditions given the current actions of its neighbours.
pub fn best_response_oracle(
    params: &GameParams,
    a: &UtilityVector,
    tol: f64,
    max_iters: usize,
) -> Result<UtilityVector> {
    a.check_shape(params)?;
    let (k, n) = (params.k(), params.n());
    let g = params.net().weights();
    let (beta, delta, gamma) = (params.beta(), params.delta(), params.gamma());
    // inverse of (1−β)I + βJ is (I − cJ)/(1−β) with c = β/(1+(k−1)β)
    let (inv_scale, inv_shift) = if k == 1 {
        (1.0, 0.0)
    } else {
        (1.0 / (1.0 - beta), beta / params.sum_scale())
    };
    let mut x = UtilityVector::zeros(k, n);
    let mut rhs = vec![0.0; k];
    let mut change = f64::INFINITY;
    for _ in 0..max_iters {
        change = 0.0_f64;
        for i in 0..n {
            let mut across_total = 0.0;
            for s in 0..k {
                let mut neigh = 0.0;
                for j in 0..n {
                    let gij = g[(i, j)];
                    if gij != 0.0 {
                        neigh += gij * x.get(j, s);
                    }
                }
                rhs[s] = neigh;
                across_total += neigh;
            }
            for s in 0..k {
                let own = rhs[s];
                rhs[s] = a.get(i, s) + delta * own + gamma * (across_total - own);
            }
            let r_sum: f64 = rhs.iter().sum();
            for s in 0..k {
                let new = inv_scale * (rhs[s] - inv_shift * r_sum);
                let idx = s * n + i;
                change = change.max((new - x.values[idx]).abs());
                x.values[idx] = new;
            }
        }
        if !change.is_finite() {
            break;
        }
        if change < tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        change,
    })
}

/// Residuals of the activity-sum and activity-difference identities:
/// `‖Σₜ x*ᵗ − M₊ Σₜ aᵗ‖` and the largest `‖(x*ˢ − x*ᵗ) − M₋(aˢ − aᵗ)‖`.
pub fn sum_and_difference_check(params: &GameParams, a: &UtilityVector) -> Result<(f64, f64)> {
    a.check_shape(params)?;
    let res = m_matrices(params)?;
    let x = equilibrium_actions(params, &res, a);
    let residual_sum = (x.activity_sum() - &res.plus * a.activity_sum()).norm();
    let mut residual_diff = 0.0_f64;
    for s in 0..params.k() {
        for t in (s + 1)..params.k() {
            let dx = x.block(s) - x.block(t);
            let da = a.block(s) - a.block(t);
            residual_diff = residual_diff.max((dx - &res.minus * da).norm());
        }
    }
    Ok((residual_sum, residual_diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named_graph;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn dyad_game(k: usize, beta: f64, delta: f64) -> GameParams {
        GameParams::new(named_graph("dyad").unwrap(), k, beta, delta).unwrap()
    }

    #[test]
    fn margins_on_dyad() {
        let m = check_assumption(&dyad_game(3, 0.4, 0.1));
        assert_abs_diff_eq!(m.sum, 1.7, epsilon = 1e-14);
        assert_abs_diff_eq!(m.diff, 0.5, epsilon = 1e-14);
        assert!(m.holds());

        let m = check_assumption(&dyad_game(3, 0.0, 0.0));
        assert_eq!((m.sum, m.diff), (1.0, 1.0));

        let m = check_assumption(&dyad_game(2, 0.0, 1.0));
        assert_abs_diff_eq!(m.diff, 0.0, epsilon = 1e-15);
        assert!(!m.holds());
        assert!(matches!(
            equilibrium(&dyad_game(2, 0.0, 1.0), &UtilityVector::zeros(2, 2)),
            Err(Error::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn negative_delta_uses_lambda_min() {
        // star: λ_min = −√3, so λ_max(−0.2 G) = 0.2√3
        let p = GameParams::new(named_graph("G1").unwrap(), 2, 0.1, -0.2).unwrap();
        let m = p.margins();
        assert_abs_diff_eq!(m.diff, 0.9 - 0.2 * 3f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn gamma_sign_constraint() {
        let g = named_graph("dyad").unwrap();
        assert!(GameParams::with_gamma(g.clone(), 2, 0.0, 0.4, 0.1).is_ok());
        assert!(GameParams::with_gamma(g.clone(), 2, 0.0, 0.4, 0.5).is_err());
        assert!(GameParams::with_gamma(g.clone(), 2, 0.0, -0.4, -0.1).is_ok());
        assert!(GameParams::with_gamma(g.clone(), 2, 0.0, -0.4, 0.1).is_err());
        assert!(GameParams::new(g, 0, 0.0, 0.1).is_err());
    }

    #[test]
    fn resolvents_closed_forms() {
        let res = m_matrices(&dyad_game(3, 0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(res.plus, DMatrix::identity(2, 2) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(res.minus, DMatrix::identity(2, 2) / 0.5, epsilon = 1e-15);

        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]) / 0.99;
        for k in [1, 2, 4] {
            let res = m_matrices(&dyad_game(k, 0.0, 0.1)).unwrap();
            assert_abs_diff_eq!(res.plus, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(res.minus, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn independent_activities_without_network() {
        let p = dyad_game(2, 0.0, 0.0);
        let a = UtilityVector::from_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let eq = equilibrium(&p, &a).unwrap();
        assert_abs_diff_eq!(eq.x_star.values(), a.values(), epsilon = 1e-15);
        assert_abs_diff_eq!(eq.welfare, a.values().norm_squared() / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn symmetric_substitutes() {
        let p = dyad_game(2, 0.5, 0.0);
        let a = UtilityVector::repeated(2, &[3.0, -1.5]);
        let eq = equilibrium(&p, &a).unwrap();
        for s in 0..2 {
            assert_abs_diff_eq!(eq.x_star.get(0, s), 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(eq.x_star.get(1, s), -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn dyad_matches_best_responses() {
        let p = dyad_game(3, 0.4, 0.1);
        let a = UtilityVector::repeated(3, &[2.0, 1.0]);
        let eq = equilibrium(&p, &a).unwrap();
        let br = best_response_oracle(&p, &a, 1e-13, 10_000).unwrap();
        assert_abs_diff_eq!(eq.x_star.values(), br.values(), epsilon = 1e-10);
        assert!(eq.foc_residual < 1e-12);
    }

    #[test]
    fn oracle_trivial_and_failure() {
        let p = dyad_game(2, 0.0, 0.0);
        let a = UtilityVector::from_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = best_response_oracle(&p, &a, 1e-14, 2).unwrap();
        assert_eq!(x.values(), a.values());

        // outside the regular region the iteration blows up
        let bad = dyad_game(2, 0.0, 1.5);
        assert!(matches!(
            best_response_oracle(&bad, &a, 1e-12, 200),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn oracle_near_boundary() {
        // diff margin = 1 − 0.2 − δ·λ_max = 1e-3
        let g = named_graph("G2").unwrap();
        let lmax = g.spectral_decompose().lambda_max();
        let delta = (0.8 - 1e-3) / lmax;
        let p = GameParams::new(g, 2, 0.2, delta).unwrap();
        assert_abs_diff_eq!(p.margins().diff, 1e-3, epsilon = 1e-12);
        let a =
            UtilityVector::from_slice(2, 4, &[1.0, 0.0, 2.0, -1.0, 0.5, 0.5, 0.0, 1.0]).unwrap();
        let eq = equilibrium(&p, &a).unwrap();
        let br = best_response_oracle(&p, &a, 1e-14, 1_000_000).unwrap();
        assert_relative_eq!(
            eq.x_star.values(),
            br.values(),
            max_relative = 1e-8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn scalar_utility() {
        let p = GameParams::new(Network::empty(1).unwrap(), 1, 0.0, 0.0).unwrap();
        let x = UtilityVector::from_slice(1, 1, &[2.0]).unwrap();
        assert_eq!(agent_utility(&p, 0, &x, &x).unwrap(), 2.0);
        let zero = UtilityVector::zeros(1, 1);
        assert_eq!(agent_utility(&p, 0, &zero, &x).unwrap(), 0.0);
        assert!(agent_utility(&p, 1, &x, &x).is_err());
    }

    #[test]
    fn single_activity_is_leontief_inverse() {
        let g = named_graph("G2").unwrap();
        let p = GameParams::new(g.clone(), 1, 0.3, 0.2).unwrap();
        let a = UtilityVector::from_slice(1, 4, &[1.0, 2.0, 0.5, -1.0]).unwrap();
        let eq = equilibrium(&p, &a).unwrap();
        let leontief = (DMatrix::<f64>::identity(4, 4) - g.weights() * 0.2)
            .try_inverse()
            .unwrap();
        let expected = leontief * a.values();
        assert_abs_diff_eq!(eq.x_star.values(), &expected, epsilon = 1e-12);
    }

    #[test]
    fn sum_and_difference_identities() {
        let p = GameParams::with_gamma(named_graph("G0").unwrap(), 3, -0.2, 0.15, 0.05).unwrap();
        let a = UtilityVector::from_slice(
            3,
            5,
            &(0..15).map(|i| (i as f64 * 0.7).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let (rs, rd) = sum_and_difference_check(&p, &a).unwrap();
        assert!(rs < 1e-12 && rd < 1e-12);

        let same = UtilityVector::repeated(3, &[1.0, 0.5, 2.0, 0.0, 1.0]);
        let eq = equilibrium(&p, &same).unwrap();
        assert_abs_diff_eq!(eq.x_star.block(0), eq.x_star.block(2), epsilon = 1e-14);

        let p2 = GameParams::new(named_graph("G0").unwrap(), 2, 0.3, 0.1).unwrap();
        let mut a2 = UtilityVector::zeros(2, 5);
        a2.block_mut(0).copy_from_slice(&[1.0, 0.0, 2.0, 1.0, -1.0]);
        let eq = equilibrium(&p2, &a2).unwrap();
        let res = m_matrices(&p2).unwrap();
        let diff = eq.x_star.block(0) - eq.x_star.block(1);
        assert_abs_diff_eq!(diff, &res.minus * a2.block(0), epsilon = 1e-13);
    }

    #[test]
    fn activity_sets() {
        let s = ActivitySet::from_labels(4, &[3, 1]).unwrap();
        assert_eq!(s.indices(), &[0, 2]);
        assert_eq!(s.labels(), vec![1, 3]);
        assert!(ActivitySet::from_labels(4, &[]).is_err());
        assert!(ActivitySet::from_labels(4, &[5]).is_err());
        assert!(ActivitySet::from_labels(4, &[2, 2]).is_err());
        assert!(ActivitySet::prefix(3, 0).is_err());
        let a = UtilityVector::from_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let set = ActivitySet::new(3, &[0, 2]).unwrap();
        let g = set.gather(&a);
        assert_eq!(g.as_slice(), &[1.0, 2.0, 5.0, 6.0]);
        let back = set.scatter(&g, 2);
        assert_eq!(back.values().as_slice(), &[1.0, 2.0, 0.0, 0.0, 5.0, 6.0]);
    }
}
