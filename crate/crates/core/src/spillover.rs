//! Cross-activity spillovers: block-circulant inverses, the two candidate
//! asymptotic welfare slopes and their simple interventions.

use nalgebra::DMatrix;

use crate::game::{GameParams, UtilityVector};
use crate::intervene::{simple_shift, InterventionProblem, SimpleForm};
use crate::welfare::{closed_form_top, top_candidates};
use crate::{Error, Result};

/// `k×k` block matrix with `A + B` on the diagonal and `B` off it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCirculant {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub k: usize,
}

impl BlockCirculant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, k: usize) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "blocks must be square and equal in size, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        if k == 0 {
            return Err(Error::Dimension("block count must be positive".into()));
        }
        Ok(Self { a, b, k })
    }

    /// `A + B`.
    pub fn diagonal_block(&self) -> DMatrix<f64> {
        &self.a + &self.b
    }

    pub fn off_block(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.a.nrows();
        let diag = self.diagonal_block();
        let mut out = DMatrix::zeros(self.k * n, self.k * n);
        for r in 0..self.k {
            for c in 0..self.k {
                let block = if r == c { &diag } else { &self.b };
                out.view_mut((r * n, c * n), (n, n)).copy_from(block);
            }
        }
        out
    }

    /// Inverse in the same form: diagonal blocks `E`, off-diagonal `F`, with
    /// `E = ((A+kB)⁻¹ + (k−1)A⁻¹)/k` and `F = ((A+kB)⁻¹ − A⁻¹)/k`.
    pub fn block_inverse(&self) -> Result<BlockCirculant> {
        let n = self.a.nrows();
        let kf = self.k as f64;
        let a_inv = checked_inverse(&self.a, "A")?;
        let sum_inv = checked_inverse(&(&self.a + &self.b * kf), "A + kB")?;
        // E − F = A⁻¹
        let f = (&sum_inv - &a_inv) / kf;
        let out = BlockCirculant {
            a: a_inv,
            b: f,
            k: self.k,
        };
        let resid = (self.assemble() * out.assemble()
            - DMatrix::<f64>::identity(self.k * n, self.k * n))
        .amax();
        if !(resid <= 1e-9) {
            return Err(Error::Singular(format!(
                "block inverse residual {resid:.3e}"
            )));
        }
        Ok(out)
    }
}

fn checked_inverse(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{name} is singular")))?;
    let n = m.nrows();
    let resid = (m * &inv - DMatrix::<f64>::identity(n, n)).amax();
    if !(resid <= 1e-9) {
        return Err(Error::Singular(format!(
            "{name} is numerically singular (residual {resid:.3e})"
        )));
    }
    Ok(inv)
}

/// `k×k` matrix with `δ` on the diagonal and `γ` off it.
pub fn pi_matrix(k: usize, delta: f64, gamma: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { delta } else { gamma })
}

/// The first-order-condition matrix `((1−β)I + βJ) ⊗ I − Π ⊗ G` in block form:
/// `A = (1−β)I − (δ−γ)G`, `B = βI − γG`.
pub fn foc_blocks(params: &GameParams) -> Result<BlockCirculant> {
    let n = params.n();
    let g = params.net().weights();
    let eye = DMatrix::<f64>::identity(n, n);
    let (beta, delta, gamma) = (params.beta(), params.delta(), params.gamma());
    let a = &eye * (1.0 - beta) - g * (delta - gamma);
    let b = &eye * beta - g * gamma;
    BlockCirculant::new(a, b, params.k())
}

/// Dense equilibrium operator `x* = X a`, via the block inverse.
pub fn equilibrium_operator(params: &GameParams) -> Result<DMatrix<f64>> {
    params.ensure_valid()?;
    Ok(foc_blocks(params)?.block_inverse()?.assemble())
}

/// Dense welfare matrix `½ Xᵀ ((βJ + (1−β)I) ⊗ I) X` from the equilibrium operator.
pub fn assembled_welfare(params: &GameParams) -> Result<DMatrix<f64>> {
    let x = equilibrium_operator(params)?;
    let (k, n) = (params.k(), params.n());
    let beta = params.beta();
    let cost = DMatrix::from_fn(k * n, k * n, |i, j| {
        if i % n != j % n {
            0.0
        } else if i == j {
            1.0
        } else {
            beta
        }
    });
    let w = x.transpose() * cost * &x * 0.5;
    Ok((&w + w.transpose()) * 0.5)
}

/// `(ω₁, ω₂)`: the slope reached by spreading over all `l` allowed activities
/// and the slope reached by an opposite-sign pair.
pub fn omega_values(params: &GameParams, l: usize) -> Result<(f64, f64)> {
    params.ensure_valid()?;
    if l == 0 || l > params.k() {
        return Err(Error::InvalidActivitySet(format!(
            "l = {l} not in 1..={}",
            params.k()
        )));
    }
    Ok(top_candidates(params, l))
}

/// Large-budget welfare slope `lim W*(l, C)/C`: `ω₁` for complements or a
/// single allowed activity, `max(ω₁, ω₂)` otherwise.
pub fn spillover_asymptotic_welfare(params: &GameParams, l: usize) -> Result<f64> {
    closed_form_top(params, l)
}

/// The two simple interventions: equal spread (`ω₁`) and opposite pair (`ω₂`,
/// absent when fewer than two activities are allowed). Both return `â + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplePair {
    pub spread: UtilityVector,
    pub pair: Option<UtilityVector>,
}

pub fn spillover_simple_interventions(prob: &InterventionProblem) -> Result<SimplePair> {
    prob.params().ensure_valid()?;
    let base = prob.a_hat();
    let with = |form| -> Result<UtilityVector> {
        let shift = simple_shift(prob, form)?;
        UtilityVector::new(base.k(), base.n(), base.values() + shift.values())
    };
    let spread = with(SimpleForm::Spread)?;
    let pair = if prob.set().len() >= 2 {
        Some(with(SimpleForm::Pair)?)
    } else {
        None
    };
    Ok(SimplePair { spread, pair })
}
