//! Welfare-improvement ratios, their large- and small-budget limits, and
//! parameter sweeps.

use std::fmt;

use nalgebra::DVector;

use crate::game::{ActivitySet, GameParams, Regime, UtilityVector};
use crate::graph::{NamedGraph, Network};
use crate::intervene::{optimal_intervention, InterventionProblem};
use crate::welfare::{closed_form_top, WelfareMatrix};
use crate::{Error, Result};

/// The budget at which a ratio is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetPoint {
    Finite(f64),
    Infinite,
    Zero,
}

impl fmt::Display for BudgetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetPoint::Finite(c) => write!(f, "{c}"),
            BudgetPoint::Infinite => f.write_str("inf"),
            BudgetPoint::Zero => f.write_str("zero"),
        }
    }
}

/// Ratio of the restricted to the unrestricted welfare gain.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub l: usize,
    pub budget: BudgetPoint,
    pub rho: f64,
    pub phi: f64,
    pub regime: Regime,
}

/// Ratio of the two top slopes:
/// `(1+(k−1)β)(1−β−λ)² / ((1−β)(1+(k−1)β−λ)²)` with `λ = λ_max(δG)`.
///
/// With cross spillovers `λ` is taken separately for the sum coefficient
/// `δ+(k−1)γ` and the difference coefficient `δ−γ`.
pub fn phi(params: &GameParams) -> Result<f64> {
    params.ensure_valid()?;
    let sum_scale = params.sum_scale();
    let diff_scale = params.diff_scale();
    let lam_sum = params.scaled_lambda_max(params.sum_spill());
    let lam_diff = params.scaled_lambda_max(params.diff_spill());
    Ok(sum_scale * (diff_scale - lam_diff).powi(2) / (diff_scale * (sum_scale - lam_sum).powi(2)))
}

/// `(W*(l, C) − Ŵ) / (W*(k, C) − Ŵ)` with the first `l` activities allowed.
///
/// Uses the game, baseline and costs of `prob`; its own activity set and
/// budget are ignored.
pub fn rho_finite(prob: &InterventionProblem, l: usize, budget: f64) -> Result<f64> {
    let k = prob.params().k();
    let restricted = prob
        .with_set(ActivitySet::prefix(k, l)?)?
        .with_budget(budget)?;
    let full = prob.with_set(ActivitySet::all(k))?.with_budget(budget)?;
    let num = optimal_intervention(&restricted)?.welfare_gain;
    let den = optimal_intervention(&full)?.welfare_gain;
    if !(den > 0.0) {
        return Err(Error::ZeroBaseline(format!(
            "the unrestricted welfare gain at budget {budget} is zero; the ratio is undefined"
        )));
    }
    Ok(num / den)
}

/// Large-budget limit of the ratio.
///
/// Substitutes: `(k−1+φ)/k` for `l = 1`, else 1. Complements:
/// `(l + (k−l)/φ)/k`. Independent activities: 1. With cross spillovers the
/// ratio of the two top slopes is returned instead.
pub fn rho_infinity(params: &GameParams, l: usize) -> Result<f64> {
    let k = params.k();
    if l == 0 || l > k {
        return Err(Error::InvalidActivitySet(format!("l = {l} not in 1..={k}")));
    }
    if params.has_spillover() {
        return Ok(closed_form_top(params, l)? / closed_form_top(params, k)?);
    }
    let f = phi(params)?;
    let (kf, lf) = (k as f64, l as f64);
    Ok(match params.regime() {
        Regime::Substitutes if l == 1 => (kf - 1.0 + f) / kf,
        Regime::Substitutes | Regime::Independent => 1.0,
        Regime::Complements => (lf + (kf - lf) / f) / kf,
    })
}

/// Large-budget ratio from the top eigenvalues of the restricted and full
/// welfare matrices.
pub fn rho_infinity_spectral(params: &GameParams, l: usize) -> Result<f64> {
    Ok(theta(params, l)? / theta(params, params.k())?)
}

/// Small-budget limit of the ratio, `‖P^𝓛â‖ / ‖Pâ‖` (block norms weighted by
/// `τ_s^{-1/2}` when activity costs are set).
pub fn rho_zero(prob: &InterventionProblem, l: usize) -> Result<f64> {
    let params = prob.params();
    let k = params.k();
    let set = ActivitySet::prefix(k, l)?;
    if prob.a_hat().values().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroBaseline(
            "the small-budget ratio needs nonzero baseline utilities".into(),
        ));
    }
    let wm = WelfareMatrix::build(params)?;
    let pa = wm.apply(prob.a_hat());
    let weight = |s: usize| prob.costs().map_or(1.0, |c| 1.0 / c[s].sqrt());
    let block_norm2 = |s: usize| (pa.block(s) * weight(s)).norm_squared();
    let num: f64 = set.indices().iter().map(|&s| block_norm2(s)).sum();
    let den: f64 = (0..k).map(block_norm2).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroBaseline("P·â vanishes".into()));
    }
    Ok((num / den).sqrt())
}

/// `lim (W*(l, C) − Ŵ)/C`: the top eigenvalue of the welfare matrix
/// restricted to the first `l` activities.
pub fn theta(params: &GameParams, l: usize) -> Result<f64> {
    let wm = WelfareMatrix::build(params)?;
    Ok(wm
        .restrict(&ActivitySet::prefix(params.k(), l)?)?
        .top_eigenvalue()
        .value)
}

/// Ratio report for a symbolic or finite budget.
pub fn ratio_report(
    prob: &InterventionProblem,
    l: usize,
    budget: BudgetPoint,
) -> Result<RatioReport> {
    let params = prob.params();
    let rho = match budget {
        BudgetPoint::Finite(c) => rho_finite(prob, l, c)?,
        BudgetPoint::Infinite => rho_infinity(params, l)?,
        BudgetPoint::Zero => rho_zero(prob, l)?,
    };
    Ok(RatioReport {
        l,
        budget,
        rho,
        phi: phi(params)?,
        regime: params.regime(),
    })
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Budget,
    Beta,
    Delta,
    L,
    Graph,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Budget => "C",
            Axis::Beta => "beta",
            Axis::Delta => "delta",
            Axis::L => "l",
            Axis::Graph => "graph",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" | "budget" => Ok(Axis::Budget),
            "beta" => Ok(Axis::Beta),
            "delta" => Ok(Axis::Delta),
            "l" => Ok(Axis::L),
            "graph" => Ok(Axis::Graph),
            other => Err(Error::InvalidParams(format!(
                "unknown axis `{other}` (expected C, beta, delta, l or graph)"
            ))),
        }
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Number(f64),
    Graph(NamedGraph),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Number(x) => write!(f, "{x}"),
            AxisValue::Graph(g) => write!(f, "{g}"),
        }
    }
}

/// Everything a sweep varies around.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub net: Network,
    pub k: usize,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Activity-major baseline, length `k·n`.
    pub a_hat: Vec<f64>,
    pub budget: Option<f64>,
    pub costs: Option<Vec<f64>>,
}

/// Outcome of a grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// The regularity assumption fails at this point.
    Violated,
    /// The point could not be evaluated (bad `l`, baseline shape, ...).
    Invalid(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Violated => f.write_str("violated"),
            RowStatus::Invalid(_) => f.write_str("invalid"),
        }
    }
}

/// One sweep row. Budget-dependent entries are `None` without a budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Value of the secondary axis, if any.
    pub series: Option<AxisValue>,
    pub value: AxisValue,
    pub l: usize,
    pub status: RowStatus,
    pub w_hat: Option<f64>,
    pub w_star: Option<f64>,
    pub gain: Option<f64>,
    pub rho: Option<f64>,
    pub rho_inf: Option<f64>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub alignment: Option<f64>,
}

/// Evaluates every combination of `series` value, grid value and `l`, in
/// that nesting order. For axes other than `l`, every `l` in `1..=k` is
/// reported.
pub fn sweep(
    base: &SweepBase,
    axis: Axis,
    grid: &[AxisValue],
    series: Option<(Axis, &[AxisValue])>,
) -> Result<Vec<SweepRow>> {
    check_values(axis, grid)?;
    if let Some((by, values)) = series {
        check_values(by, values)?;
        if by == axis {
            return Err(Error::InvalidParams(
                "series axis must differ from the swept axis".into(),
            ));
        }
    }
    let outer: Vec<Option<AxisValue>> = match series {
        Some((_, values)) => values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    for s in outer {
        let mut point = base.clone();
        let mut fixed_l = None;
        if let (Some((by, _)), Some(value)) = (series, s) {
            if let Err(msg) = apply(&mut point, by, value, &mut fixed_l) {
                rows.push(invalid_row(s, value, fixed_l.unwrap_or(1), msg));
                continue;
            }
        }
        for &value in grid {
            let mut here = point.clone();
            let mut l_here = fixed_l;
            if let Err(msg) = apply(&mut here, axis, value, &mut l_here) {
                rows.push(invalid_row(s, value, l_here.unwrap_or(1), msg));
                continue;
            }
            let ls: Vec<usize> = match l_here {
                Some(l) => vec![l],
                None => (1..=here.k).collect(),
            };
            rows.extend(evaluate_point(&here, s, value, &ls));
        }
    }
    Ok(rows)
}

fn check_values(axis: Axis, values: &[AxisValue]) -> Result<()> {
    for v in values {
        let ok = matches!((axis, v), (Axis::Graph, AxisValue::Graph(_)))
            || (axis != Axis::Graph && matches!(v, AxisValue::Number(_)));
        if !ok {
            return Err(Error::InvalidParams(format!(
                "value `{v}` does not fit axis {}",
                axis.name()
            )));
        }
    }
    Ok(())
}

fn apply(
    point: &mut SweepBase,
    axis: Axis,
    value: AxisValue,
    l: &mut Option<usize>,
) -> std::result::Result<(), String> {
    match (axis, value) {
        (Axis::Budget, AxisValue::Number(c)) => point.budget = Some(c),
        (Axis::Beta, AxisValue::Number(b)) => point.beta = b,
        (Axis::Delta, AxisValue::Number(d)) => point.delta = d,
        (Axis::L, AxisValue::Number(x)) => {
            if x.fract() != 0.0 || x < 1.0 || x > point.k as f64 {
                return Err(format!("l = {x} is not an integer in 1..={}", point.k));
            }
            *l = Some(x as usize);
        }
        (Axis::Graph, AxisValue::Graph(g)) => {
            point.net = g.build().map_err(|e| e.to_string())?;
        }
        _ => return Err("value does not fit the axis".into()),
    }
    Ok(())
}

fn empty_row(series: Option<AxisValue>, value: AxisValue, l: usize, status: RowStatus) -> SweepRow {
    SweepRow {
        series,
        value,
        l,
        status,
        w_hat: None,
        w_star: None,
        gain: None,
        rho: None,
        rho_inf: None,
        phi: None,
        theta: None,
        alignment: None,
    }
}

fn invalid_row(series: Option<AxisValue>, value: AxisValue, l: usize, msg: String) -> SweepRow {
    empty_row(series, value, l, RowStatus::Invalid(msg))
}

fn evaluate_point(
    point: &SweepBase,
    series: Option<AxisValue>,
    value: AxisValue,
    ls: &[usize],
) -> Vec<SweepRow> {
    let fail = |msg: String| {
        ls.iter()
            .map(|&l| invalid_row(series, value, l, msg.clone()))
            .collect::<Vec<_>>()
    };
    let params = match GameParams::with_gamma(
        point.net.clone(),
        point.k,
        point.beta,
        point.delta,
        point.gamma,
    ) {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    if !params.margins().holds() {
        return ls
            .iter()
            .map(|&l| empty_row(series, value, l, RowStatus::Violated))
            .collect();
    }
    if let Some(c) = point.budget {
        if !(c >= 0.0 && c.is_finite()) {
            return fail(format!("budget {c} must be finite and nonnegative"));
        }
    }
    let phi_value = phi(&params).ok();
    // the baseline only fits when its length matches this network
    let a_hat = if point.a_hat.len() == point.k * params.n() {
        UtilityVector::new(
            point.k,
            params.n(),
            DVector::from_column_slice(&point.a_hat),
        )
        .ok()
    } else {
        None
    };
    let make_problem =
        |a: &UtilityVector, set: ActivitySet, c: f64| -> Result<InterventionProblem> {
            let p = InterventionProblem::new(params.clone(), a.clone(), set, c)?;
            match &point.costs {
                Some(costs) => p.with_costs(costs.clone()),
                None => Ok(p),
            }
        };
    let w_hat = a_hat
        .as_ref()
        .and_then(|a| crate::intervene::welfare_at(&params, a).ok());
    let full_gain = match (&a_hat, point.budget) {
        (Some(a), Some(c)) => make_problem(a, ActivitySet::all(point.k), c)
            .and_then(|p| optimal_intervention(&p))
            .map(|r| r.welfare_gain)
            .ok(),
        _ => None,
    };
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let mut row = empty_row(series, value, l, RowStatus::Ok);
        row.w_hat = w_hat;
        row.phi = phi_value;
        row.rho_inf = rho_infinity(&params, l).ok();
        row.theta = theta(&params, l).ok();
        if let (Some(a), Some(c)) = (&a_hat, point.budget) {
            let result = ActivitySet::prefix(point.k, l)
                .and_then(|set| make_problem(a, set, c))
                .and_then(|p| optimal_intervention(&p));
            match result {
                Ok(r) => {
                    row.w_star = Some(r.welfare);
                    row.gain = Some(r.welfare_gain);
                    row.alignment = Some(r.alignment);
                    row.rho = full_gain.filter(|&g| g > 0.0).map(|g| r.welfare_gain / g);
                }
                Err(e) => row.status = RowStatus::Invalid(e.to_string()),
            }
        }
        rows.push(row);
    }
    rows
}
