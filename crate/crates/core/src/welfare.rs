//! The equilibrium welfare quadratic form and its block eigenstructure.
//!
//! Welfare at equilibrium is `aᵀPa` where `P` is a `k×k` block matrix with
//! `Y` on the diagonal and `Z` off it. Both blocks are functions of the
//! network, so every eigenvector of `P` (and of any principal block
//! restriction) is an activity pattern tensored with a network eigenvector.

use nalgebra::{DMatrix, DVector};

use crate::game::{ActivitySet, GameParams, UtilityVector};
use crate::graph::Spectrum;
use crate::linalg;
use crate::{Error, Result};

/// Block form of the welfare matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareMatrix {
    k: usize,
    n: usize,
    y: DMatrix<f64>,
    z: DMatrix<f64>,
    /// `Y − Z`, the part acting on each activity separately.
    own: DMatrix<f64>,
    spectrum: Spectrum,
    /// Per network eigenvalue: `(1+(k−1)β)/(2k)·m₊²` and `(1−β)/2·m₋²`.
    sum_weights: Vec<f64>,
    diff_weights: Vec<f64>,
    spillover: bool,
}

/// Assembles the welfare matrix for a valid game.
pub fn build_welfare_matrix(params: &GameParams) -> Result<WelfareMatrix> {
    WelfareMatrix::build(params)
}

impl WelfareMatrix {
    pub fn build(params: &GameParams) -> Result<Self> {
        params.ensure_valid()?;
        let k = params.k();
        let kf = k as f64;
        let sum_scale = params.sum_scale();
        let diff_scale = params.diff_scale();
        let spectrum = params.spectrum().clone();
        let sum_weights: Vec<f64> = spectrum
            .values()
            .iter()
            .map(|&l| sum_scale / (2.0 * kf) * params.sum_factor(l).powi(2))
            .collect();
        let diff_weights: Vec<f64> = spectrum
            .values()
            .iter()
            .map(|&l| diff_scale / 2.0 * params.diff_factor(l).powi(2))
            .collect();
        // Y = s₊ + (k−1)/k·s₋ and Z = s₊ − s₋/k, eigenvalue by eigenvalue
        let y_diag: Vec<f64> = sum_weights
            .iter()
            .zip(&diff_weights)
            .map(|(p, m)| p + (kf - 1.0) / kf * m)
            .collect();
        let z_diag: Vec<f64> = sum_weights
            .iter()
            .zip(&diff_weights)
            .map(|(p, m)| p - m / kf)
            .collect();
        let q = spectrum.vectors();
        let y = linalg::from_eigen(q, &y_diag);
        let z = linalg::from_eigen(q, &z_diag);
        let own = linalg::from_eigen(q, &diff_weights);
        Ok(Self {
            k,
            n: params.n(),
            y,
            z,
            own,
            spectrum,
            sum_weights,
            diff_weights,
            spillover: params.has_spillover(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    /// `Y − Z`.
    pub fn own_block(&self) -> &DMatrix<f64> {
        &self.own
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `true` when built with cross-activity spillovers.
    pub fn is_spillover(&self) -> bool {
        self.spillover
    }

    /// `aᵀPa` using only `n×n` block products.
    pub fn quadratic_form(&self, a: &UtilityVector) -> f64 {
        self.check(a);
        let total = a.activity_sum();
        let mut acc = total.dot(&(&self.z * &total));
        for s in 0..self.k {
            let b = a.block(s);
            acc += b.dot(&(&self.own * b));
        }
        acc
    }

    /// `P a` by blocks.
    pub fn apply(&self, a: &UtilityVector) -> UtilityVector {
        self.check(a);
        let common = &self.z * a.activity_sum();
        let mut out = UtilityVector::zeros(self.k, self.n);
        for s in 0..self.k {
            let b = &self.own * a.block(s) + &common;
            out.block_mut(s).copy_from(&b);
        }
        out
    }

    /// Fully assembled `kn × kn` matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        assemble(&self.y, &self.z, self.k, self.k)
    }

    /// Restriction to the rows and columns of the activities in `set`.
    pub fn restrict(&self, set: &ActivitySet) -> Result<Restriction> {
        if set.k() != self.k {
            return Err(Error::InvalidActivitySet(format!(
                "activity set built for k = {} but the game has k = {}",
                set.k(),
                self.k
            )));
        }
        Ok(Restriction {
            wm: self.clone(),
            set: set.clone(),
        })
    }

    fn check(&self, a: &UtilityVector) {
        assert!(
            a.k() == self.k && a.n() == self.n,
            "vector shape ({}, {}) does not match welfare matrix ({}, {})",
            a.k(),
            a.n(),
            self.k,
            self.n
        );
    }
}

fn assemble(diag: &DMatrix<f64>, off: &DMatrix<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    let n = diag.nrows();
    let mut out = DMatrix::zeros(rows * n, cols * n);
    for r in 0..rows {
        for c in 0..cols {
            let block = if r == c { diag } else { off };
            out.view_mut((r * n, c * n), (n, n)).copy_from(block);
        }
    }
    out
}

/// Principal restriction of the welfare matrix to an activity set, together
/// with the matching row block against all activities.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    wm: WelfareMatrix,
    set: ActivitySet,
}

/// Family of a structured eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Equal weight on every restricted activity.
    Sum,
    /// Activity pattern summing to zero.
    Difference,
}

/// One eigenpair `(value, w ⊗ q_i)` of a restricted welfare matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredEigenpair {
    pub value: f64,
    /// Unit activity pattern of length `l`.
    pub activity_factor: DVector<f64>,
    /// Index of the network eigenvector `q_i`.
    pub agent_factor: usize,
    pub family: Family,
}

/// Complete eigendecomposition of a restricted welfare matrix, sorted by
/// descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredSpectrum {
    pub entries: Vec<StructuredEigenpair>,
    l: usize,
    q: DMatrix<f64>,
    groups: Vec<std::ops::Range<usize>>,
}

/// Top eigenvalue of a restricted welfare matrix with its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEigen {
    pub value: f64,
    /// Orthonormal basis, one column per dimension.
    pub basis: DMatrix<f64>,
    pub multiplicity: usize,
}

impl StructuredSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// Eigenvector of entry `idx`, activity-major over the restricted activities.
    pub fn vector(&self, idx: usize) -> DVector<f64> {
        let e = &self.entries[idx];
        let n = self.q.nrows();
        let q = self.q.column(e.agent_factor);
        let mut out = DVector::zeros(self.l * n);
        for s in 0..self.l {
            out.rows_mut(s * n, n)
                .copy_from(&(q * e.activity_factor[s]));
        }
        out
    }

    /// All eigenvectors as columns, in entry order.
    pub fn vectors(&self) -> DMatrix<f64> {
        let dim = self.entries.len();
        let mut out = DMatrix::zeros(dim, dim);
        for idx in 0..dim {
            out.set_column(idx, &self.vector(idx));
        }
        out
    }

    pub fn groups(&self) -> &[std::ops::Range<usize>] {
        &self.groups
    }

    pub fn top(&self) -> TopEigen {
        let range = self.groups[0].clone();
        let mut basis = DMatrix::zeros(self.entries.len(), range.len());
        for (col, idx) in range.clone().enumerate() {
            basis.set_column(col, &self.vector(idx));
        }
        TopEigen {
            value: self.entries[0].value,
            basis,
            multiplicity: range.len(),
        }
    }

    /// `λ_max − λ₂`, with `λ₂` the largest eigenvalue outside the top group; 0 if there is none.
    pub fn gap(&self) -> f64 {
        match self.groups.get(1) {
            Some(next) => self.entries[0].value - self.entries[next.start].value,
            None => 0.0,
        }
    }
}

/// Orthonormal basis of the zero-sum activity patterns of length `l`: the
/// differences `e₁ − e_m` orthonormalised in order.
pub fn difference_basis(l: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(l.saturating_sub(1));
    for m in 1..l {
        let mut v = DVector::zeros(l);
        v[0] = 1.0;
        v[m] = -1.0;
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        basis.push(v / norm);
    }
    basis
}

impl Restriction {
    pub fn set(&self) -> &ActivitySet {
        &self.set
    }

    pub fn welfare(&self) -> &WelfareMatrix {
        &self.wm
    }

    pub fn l(&self) -> usize {
        self.set.len()
    }

    pub fn n(&self) -> usize {
        self.wm.n
    }

    /// Size of the restricted matrix, `l·n`.
    pub fn dim(&self) -> usize {
        self.l() * self.wm.n
    }

    /// Restricted matrix times a stacked restricted vector.
    pub fn apply_ll(&self, x: &DVector<f64>) -> DVector<f64> {
        let (l, n) = (self.l(), self.wm.n);
        assert_eq!(x.len(), l * n, "restricted vector has the wrong length");
        let mut total = DVector::zeros(n);
        for s in 0..l {
            total += x.rows(s * n, n);
        }
        let common = &self.wm.z * total;
        let mut out = DVector::zeros(l * n);
        for s in 0..l {
            let b = &self.wm.own * x.rows(s * n, n) + &common;
            out.rows_mut(s * n, n).copy_from(&b);
        }
        out
    }

    /// Restricted rows of `P` applied to a full vector.
    pub fn apply_rows(&self, a: &UtilityVector) -> DVector<f64> {
        let full = self.wm.apply(a);
        self.set.gather(&full)
    }

    pub fn dense_ll(&self) -> DMatrix<f64> {
        assemble(&self.wm.y, &self.wm.z, self.l(), self.l())
    }

    /// The `l·n × k·n` row block.
    pub fn dense_rows(&self) -> DMatrix<f64> {
        let (l, n, k) = (self.l(), self.wm.n, self.wm.k);
        let mut out = DMatrix::zeros(l * n, k * n);
        for (r, &s) in self.set.indices().iter().enumerate() {
            for t in 0..k {
                let block = if s == t { &self.wm.y } else { &self.wm.z };
                out.view_mut((r * n, t * n), (n, n)).copy_from(block);
            }
        }
        out
    }

    /// Eigenpairs from the block structure.
    ///
    /// Per network eigenvalue there is one eigenvector with equal weight on
    /// every restricted activity and, when `l > 1`, `l − 1` zero-sum ones.
    pub fn structured_eigen(&self) -> StructuredSpectrum {
        let l = self.l();
        let (k, lf) = (self.wm.k as f64, l as f64);
        let n = self.wm.n;
        let sum_factor = DVector::from_element(l, 1.0 / lf.sqrt());
        let diffs = difference_basis(l);
        let mut entries = Vec::with_capacity(l * n);
        for i in 0..n {
            let p = self.wm.sum_weights[i];
            let m = self.wm.diff_weights[i];
            // eigenvalue of Y + (l−1)Z
            let mu = lf * p + (k - lf) / k * m;
            entries.push(StructuredEigenpair {
                value: mu,
                activity_factor: sum_factor.clone(),
                agent_factor: i,
                family: Family::Sum,
            });
            for w in &diffs {
                entries.push(StructuredEigenpair {
                    value: m,
                    activity_factor: w.clone(),
                    agent_factor: i,
                    family: Family::Difference,
                });
            }
        }
        // stable: ties keep (agent, family, pattern) order
        entries.sort_by(|a, b| b.value.total_cmp(&a.value));
        let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
        let groups = linalg::eigen_groups(&values, linalg::group_tolerance(&values));
        StructuredSpectrum {
            entries,
            l,
            q: self.wm.spectrum.vectors().clone(),
            groups,
        }
    }

    pub fn top_eigenvalue(&self) -> TopEigen {
        self.structured_eigen().top()
    }

    pub fn spectral_gap(&self) -> f64 {
        self.structured_eigen().gap()
    }
}

/// Case formula for the top eigenvalue of the restricted welfare matrix.
///
/// Without cross spillovers: `(1−β)/(2(1−β−λ)²)` when `l ≥ 2` and `β ≥ 0`,
/// otherwise `l(1+(k−1)β)/(2k(1+(k−1)β−λ)²) + (k−l)(1−β)/(2k(1−β−λ)²)`,
/// with `λ = λ_max(δG)`. With cross spillovers the two candidates use the
/// combined coefficients and the larger one wins whenever `l ≥ 2` and `β ≥ 0`.
pub fn closed_form_top(params: &GameParams, l: usize) -> Result<f64> {
    params.ensure_valid()?;
    if l == 0 || l > params.k() {
        return Err(Error::InvalidActivitySet(format!(
            "l = {l} not in 1..={}",
            params.k()
        )));
    }
    let (all_activities, pair) = top_candidates(params, l);
    let beta = params.beta();
    if !params.has_spillover() {
        if l >= 2 && beta >= 0.0 {
            Ok(pair)
        } else {
            Ok(all_activities)
        }
    } else if beta < 0.0 || l == 1 {
        Ok(all_activities)
    } else {
        Ok(all_activities.max(pair))
    }
}

/// `(ω₁, ω₂)`: the top sum-family and top difference-family eigenvalues
/// of the restricted welfare matrix.
pub(crate) fn top_candidates(params: &GameParams, l: usize) -> (f64, f64) {
    let k = params.k() as f64;
    let lf = l as f64;
    let sum_scale = params.sum_scale();
    let diff_scale = params.diff_scale();
    let lam_sum = params.scaled_lambda_max(params.sum_spill());
    let lam_diff = params.scaled_lambda_max(params.diff_spill());
    let pair = diff_scale / (2.0 * (diff_scale - lam_diff).powi(2));
    let all = lf * sum_scale / (2.0 * k * (sum_scale - lam_sum).powi(2))
        + (k - lf) * diff_scale / (2.0 * k * (diff_scale - lam_diff).powi(2));
    (all, pair)
}
