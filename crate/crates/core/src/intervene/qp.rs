//! Ball-constrained quadratic programs: maximise `xᵀSx + vᵀx` subject to
//! `‖x‖² ≤ C`, solved exactly in the eigenbasis of `S`.

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::{Error, Result};

/// Components of `v` on the top eigenspace below this fraction of `‖v‖` count as zero.
pub const HARD_CASE_TOL: f64 = 1e-12;

const MAX_ROOT_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub s: DMatrix<f64>,
    pub v: DVector<f64>,
    /// Squared-norm budget `C`.
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Lagrange multiplier of the norm constraint; infinite when `C = 0`.
    pub multiplier: f64,
    pub binding: bool,
    /// `v` has no component on the top eigenspace and the secular equation
    /// has no root above the top eigenvalue.
    pub hard_case: bool,
    /// `S` has no positive eigenvalue and `v = 0`; every feasible point is
    /// optimal and zero is returned.
    pub degenerate: bool,
    /// `‖(S − μI)x + v/2‖`, measured in the eigenbasis.
    pub kkt_residual: f64,
    /// Fraction of `‖x‖` lying in the top eigenspace of `S`.
    pub alignment: f64,
}

impl QpInstance {
    pub fn new(s: DMatrix<f64>, v: DVector<f64>, budget: f64) -> Result<Self> {
        let inst = Self { s, v, budget };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if !self.s.is_square() || self.s.nrows() != self.v.len() {
            return Err(Error::Dimension(format!(
                "S is {}x{} but v has length {}",
                self.s.nrows(),
                self.s.ncols(),
                self.v.len()
            )));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "budget must be finite and nonnegative, got {}",
                self.budget
            )));
        }
        let scale = self.s.amax().max(1.0);
        if linalg::asymmetry(&self.s) > 1e-10 * scale {
            return Err(Error::InvalidParams("S is not symmetric".into()));
        }
        Ok(())
    }

    /// `xᵀSx + vᵀx`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.s * x)) + self.v.dot(x)
    }
}

/// Global maximiser via the eigendecomposition of `S`.
pub fn qp_solve(inst: &QpInstance) -> Result<QpSolution> {
    inst.validate()?;
    let eig = linalg::jacobi_eigen(&inst.s);
    qp_solve_spectral(&eig.values, &eig.vectors, &inst.v, inst.budget)
}

/// Same problem under the constraint `xᵀQx ≤ C` for symmetric positive definite `Q`,
/// solved in the variables `y = Q^{1/2}x`. The multiplier, residual and
/// alignment refer to the transformed problem.
pub fn qp_solve_weighted(inst: &QpInstance, q: &DMatrix<f64>) -> Result<QpSolution> {
    inst.validate()?;
    if !q.is_square() || q.nrows() != inst.v.len() {
        return Err(Error::Dimension(format!(
            "Q is {}x{} but the problem has dimension {}",
            q.nrows(),
            q.ncols(),
            inst.v.len()
        )));
    }
    if linalg::asymmetry(q) > 1e-10 * q.amax().max(1.0) {
        return Err(Error::NotPositiveDefinite(f64::NAN));
    }
    let qe = linalg::jacobi_eigen(q);
    let smallest = qe.values.last().copied().unwrap_or(0.0);
    if !(smallest > 1e-14 * qe.values[0].abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    let inv_half = qe.map(|l| 1.0 / l.sqrt());
    let s = &inv_half * &inst.s * &inv_half;
    let s = symmetrized(s);
    let v = &inv_half * &inst.v;
    let eig = linalg::jacobi_eigen(&s);
    let mut sol = qp_solve_spectral(&eig.values, &eig.vectors, &v, inst.budget)?;
    sol.x = &inv_half * &sol.x;
    Ok(sol)
}

fn symmetrized(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

/// Solves the problem given `S = V diag(values) Vᵀ` with `values` descending
/// and orthonormal columns in `vectors`.
///
/// With `σ = values[0] > 0` the multiplier is `μ = σ + t` where `t ≥ 0`
/// solves the secular equation `Σ (v'_i / (2(μ − σ_i)))² = C`; `t` is found by
/// safeguarded Newton iteration on `1/‖x(t)‖ − 1/√C`. When `v` is orthogonal
/// to the top eigenspace and the remaining components fit inside the ball,
/// the boundary is reached by adding a top eigenvector. When `σ ≤ 0` the
/// unconstrained maximiser is returned if it is feasible.
pub fn qp_solve_spectral(
    values: &[f64],
    vectors: &DMatrix<f64>,
    v: &DVector<f64>,
    budget: f64,
) -> Result<QpSolution> {
    let m = values.len();
    if vectors.nrows() != m || vectors.ncols() != m || v.len() != m {
        return Err(Error::Dimension(format!(
            "eigenbasis is {}x{} for {} eigenvalues and v of length {}",
            vectors.nrows(),
            vectors.ncols(),
            m,
            v.len()
        )));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "budget must be finite and nonnegative, got {budget}"
        )));
    }
    if m == 0 {
        return Err(Error::Dimension("empty problem".into()));
    }
    let vp = vectors.transpose() * v;
    let vnorm = vp.norm();
    let sigma = values[0];

    if budget == 0.0 {
        return Ok(QpSolution {
            x: DVector::zeros(m),
            objective: 0.0,
            multiplier: f64::INFINITY,
            binding: true,
            hard_case: false,
            degenerate: false,
            kkt_residual: 0.0,
            alignment: 0.0,
        });
    }

    let base = sigma.max(0.0);
    let gaps: Vec<f64> = values.iter().map(|&s| (base - s).max(0.0)).collect();
    let tol = linalg::group_tolerance(values);
    // top group: eigenvalues numerically equal to σ
    let top_len = if sigma > 0.0 {
        values.iter().take_while(|&&s| sigma - s <= tol).count()
    } else {
        0
    };
    let top_norm = vp.rows(0, top_len).norm();

    let secular = |t: f64| -> f64 {
        vp.iter()
            .zip(&gaps)
            .map(|(&c, &g)| {
                if c == 0.0 {
                    0.0
                } else {
                    let d = 2.0 * (t + g);
                    (c / d) * (c / d)
                }
            })
            .sum()
    };

    let finish = |xp: DVector<f64>, mu: f64, hard_case: bool, binding: bool, degenerate: bool| {
        let objective: f64 = xp
            .iter()
            .zip(values)
            .zip(vp.iter())
            .map(|((&x, &s), &c)| s * x * x + c * x)
            .sum();
        let kkt_residual = xp
            .iter()
            .zip(values)
            .zip(vp.iter())
            .map(|((&x, &s), &c)| {
                let r = (s - mu) * x + 0.5 * c;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        let xnorm = xp.norm();
        let alignment = if xnorm > 0.0 && top_len > 0 {
            xp.rows(0, top_len).norm() / xnorm
        } else {
            0.0
        };
        QpSolution {
            x: vectors * &xp,
            objective,
            multiplier: mu,
            binding,
            hard_case,
            degenerate,
            kkt_residual,
            alignment,
        }
    };

    // partial solution off the top group at μ = base
    let rest = |skip: usize| -> DVector<f64> {
        DVector::from_fn(m, |i, _| {
            if i < skip || vp[i] == 0.0 {
                0.0
            } else {
                vp[i] / (2.0 * gaps[i])
            }
        })
    };

    if sigma > 0.0 && top_norm <= HARD_CASE_TOL * vnorm {
        let mut xp = rest(top_len);
        let r2 = xp.norm_squared();
        if r2 <= budget {
            xp[0] = (budget - r2).sqrt() * top_sign(&vectors.column(0).into_owned());
            return Ok(finish(xp, sigma, true, true, false));
        }
    }

    let at_zero = secular(0.0);
    if at_zero <= budget {
        if sigma > 0.0 {
            // v vanishes exactly on the σ-eigenvectors; fill the boundary along the first one
            let mut xp = rest(0);
            let r2 = xp.norm_squared();
            xp[0] = (budget - r2).max(0.0).sqrt() * top_sign(&vectors.column(0).into_owned());
            return Ok(finish(xp, sigma, true, true, false));
        }
        // nonpositive curvature: the unconstrained maximiser is feasible
        let xp = rest(0);
        let binding = xp.norm_squared() >= budget * (1.0 - 1e-12);
        return Ok(finish(xp, base, false, binding, vnorm == 0.0));
    }

    let t = secular_root(&vp, &gaps, budget, vnorm);
    let mut xp = DVector::from_fn(m, |i, _| vp[i] / (2.0 * (t + gaps[i])));
    let norm = xp.norm();
    if norm > 0.0 {
        xp *= budget.sqrt() / norm;
    }
    Ok(finish(xp, base + t, false, true, false))
}

/// `+1` or `−1` so that the vector has a nonnegative coordinate sum, with
/// ties resolved by making the first non-negligible entry positive.
fn top_sign(e: &DVector<f64>) -> f64 {
    let sum = e.sum();
    let scale = e.amax().max(f64::MIN_POSITIVE) * (e.len() as f64);
    if sum.abs() > 1e-12 * scale {
        return sum.signum();
    }
    match e.iter().find(|x| x.abs() > 1e-12 * scale) {
        Some(&x) if x < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Root in `t > 0` of `Σ c_i² / (4(t + g_i)²) = C`, given that the sum exceeds `C` at 0.
fn secular_root(vp: &DVector<f64>, gaps: &[f64], budget: f64, vnorm: f64) -> f64 {
    let target = 1.0 / budget.sqrt();
    // ψ(t) = 1/√f(t) − 1/√C is increasing and concave
    let eval = |t: f64| -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for (&c, &g) in vp.iter().zip(gaps) {
            if c == 0.0 {
                continue;
            }
            let d = t + g;
            let q = c * c / (4.0 * d * d);
            f += q;
            df += 2.0 * q / d;
        }
        let inv = 1.0 / f.sqrt();
        // dψ/dt = f^{-3/2}·(−f'/2) with −f' = df
        (inv - target, 0.5 * df * inv * inv * inv)
    };
    let mut lo = 0.0_f64;
    let mut hi = vnorm / (2.0 * budget.sqrt());
    let mut t = hi;
    for _ in 0..MAX_ROOT_ITERS {
        let (psi, dpsi) = eval(t);
        if psi == 0.0 {
            return t;
        }
        if psi > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - psi / dpsi;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= 4.0 * f64::EPSILON * hi
        {
            return next;
        }
        t = next;
    }
    t
}
