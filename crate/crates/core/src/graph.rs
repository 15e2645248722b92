//! Weighted undirected networks and their spectral decompositions.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, SymmetricEigen};
use crate::{Error, Result};

/// A weighted undirected graph without self-loops, stored as its adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: DMatrix<f64>,
}

impl Network {
    /// Validates and wraps an adjacency matrix.
    ///
    /// Entries must be finite and nonnegative, the diagonal zero, and the
    /// matrix symmetric up to `1e-12` relative; the stored matrix is
    /// symmetrised exactly.
    pub fn from_matrix(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::InvalidNetwork(format!(
                "adjacency matrix is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if weights.nrows() == 0 {
            return Err(Error::InvalidNetwork(
                "network needs at least one agent".into(),
            ));
        }
        let n = weights.nrows();
        let scale = weights.amax().max(1.0);
        let mut w = weights;
        for i in 0..n {
            if w[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!("self-loop at node {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (w[(i, j)], w[(j, i)]);
                if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "weight ({i}, {j}) must be finite and nonnegative"
                    )));
                }
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidNetwork(format!(
                        "weights ({i}, {j}) = {a} and ({j}, {i}) = {b} differ"
                    )));
                }
                let m = 0.5 * (a + b);
                w[(i, j)] = m;
                w[(j, i)] = m;
            }
        }
        Ok(Self { weights: w })
    }

    /// Builds a network from `(i, j, weight)` triples with 0-based node indices.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork(
                "network needs at least one agent".into(),
            ));
        }
        let mut w = DMatrix::zeros(n, n);
        for (idx, &(i, j, weight)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge {idx} ({i}, {j}) references a node outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidNetwork(format!(
                    "edge {idx} is a self-loop at node {i}"
                )));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "edge {idx} has weight {weight}; weights must be finite and nonnegative"
                )));
            }
            if w[(i, j)] != 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "edge {idx} ({i}, {j}) is listed twice"
                )));
            }
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
        Ok(Self { weights: w })
    }

    /// `n` isolated agents.
    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Nonzero edges as `(i, j, weight)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn has_edges(&self) -> bool {
        self.weights.iter().any(|&w| w != 0.0)
    }

    /// Spectral decomposition by cyclic Jacobi rotations.
    pub fn spectral_decompose(&self) -> Spectrum {
        Spectrum::from_eigen(linalg::jacobi_eigen(&self.weights))
    }

    /// Two-colourability of the graph on its nonzero edges.
    pub fn is_bipartite(&self) -> bool {
        let n = self.n();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        for root in 0..n {
            if colour[root].is_some() {
                continue;
            }
            colour[root] = Some(false);
            let mut queue = VecDeque::from([root]);
            while let Some(i) = queue.pop_front() {
                let ci = colour[i].unwrap();
                for j in 0..n {
                    if self.weights[(i, j)] == 0.0 {
                        continue;
                    }
                    match colour[j] {
                        None => {
                            colour[j] = Some(!ci);
                            queue.push_back(j);
                        }
                        Some(cj) if cj == ci => return false,
                        Some(_) => {}
                    }
                }
            }
        }
        true
    }
}

/// `true` when every weight of `lower` is at most the matching weight of `upper`
/// (the partial order `lower ⪯ upper`).
pub fn dominates(lower: &Network, upper: &Network) -> Result<bool> {
    if lower.n() != upper.n() {
        return Err(Error::Dimension(format!(
            "cannot compare networks on {} and {} agents",
            lower.n(),
            upper.n()
        )));
    }
    Ok(lower
        .weights
        .iter()
        .zip(upper.weights.iter())
        .all(|(a, b)| a <= b))
}

/// Which end of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// Eigenvalues sorted descending with orthonormal eigenvectors and clusters
/// of numerically equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    groups: Vec<Range<usize>>,
}

/// Orthonormal basis of an eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub basis: DMatrix<f64>,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }
}

impl Spectrum {
    fn from_eigen(e: SymmetricEigen) -> Self {
        let tol = linalg::group_tolerance(&e.values);
        let groups = linalg::eigen_groups(&e.values, tol);
        Self {
            values: e.values,
            vectors: e.vectors,
            groups,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `λ_max(c·G)`: `c·λ_max` for `c ≥ 0`, `c·λ_min` otherwise.
    pub fn scaled_max(&self, c: f64) -> f64 {
        if c >= 0.0 {
            c * self.lambda_max()
        } else {
            c * self.lambda_min()
        }
    }

    pub fn eigenspace(&self, which: Extreme) -> Eigenspace {
        let range = match which {
            Extreme::Max => self.groups[0].clone(),
            Extreme::Min => self.groups[self.groups.len() - 1].clone(),
        };
        let value = self.values[range.start];
        let basis = self.vectors.columns(range.start, range.len()).into_owned();
        Eigenspace { value, basis }
    }

    /// Deterministic unit vector in the top eigenspace of `c·G`: the leading
    /// column of the `λ_max` group when `c ≥ 0`, of the `λ_min` group otherwise.
    pub fn top_direction(&self, c: f64) -> DVector<f64> {
        let space = if c >= 0.0 { Extreme::Max } else { Extreme::Min };
        self.eigenspace(space).basis.column(0).into_owned()
    }

    /// `Q diag(f(λ)) Qᵀ`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        linalg::from_eigen(&self.vectors, &d)
    }
}

/// The example graphs used throughout, plus standard families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedGraph {
    /// Single edge of weight one.
    Dyad,
    /// Five agents: a hub linked to four others, two of which are also linked.
    G0,
    /// Star on four agents.
    G1,
    /// Triangle with one pendant agent.
    G2,
    /// Four-cycle with one chord (diamond).
    G3,
    Path(usize),
    Cycle(usize),
    /// Star with the given total number of agents; agent 0 is the centre.
    Star(usize),
    Complete(usize),
    Empty(usize),
}

impl NamedGraph {
    pub fn build(self) -> Result<Network> {
        let edges: Vec<(usize, usize)> = match self {
            NamedGraph::Dyad => vec![(0, 1)],
            NamedGraph::G0 => vec![(0, 1), (0, 2), (2, 3), (3, 0), (0, 4)],
            // nodes are labelled so that G1 ⪯ G2 ⪯ G3 holds entrywise
            NamedGraph::G1 => vec![(0, 1), (1, 2), (1, 3)],
            NamedGraph::G2 => vec![(0, 1), (1, 2), (1, 3), (2, 3)],
            NamedGraph::G3 => vec![(0, 1), (1, 2), (1, 3), (2, 3), (0, 3)],
            NamedGraph::Path(n) => (1..n).map(|i| (i - 1, i)).collect(),
            NamedGraph::Cycle(n) => {
                if n < 3 {
                    return Err(Error::UnknownGraph(format!("cycle:{n} (needs n >= 3)")));
                }
                (0..n).map(|i| (i, (i + 1) % n)).collect()
            }
            NamedGraph::Star(n) => (1..n).map(|i| (0, i)).collect(),
            NamedGraph::Complete(n) => {
                let mut e = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        e.push((i, j));
                    }
                }
                e
            }
            NamedGraph::Empty(_) => Vec::new(),
        };
        let triples: Vec<(usize, usize, f64)> =
            edges.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
        Network::from_edges(self.size(), &triples)
    }

    pub fn size(self) -> usize {
        match self {
            NamedGraph::Dyad => 2,
            NamedGraph::G0 => 5,
            NamedGraph::G1 | NamedGraph::G2 | NamedGraph::G3 => 4,
            NamedGraph::Path(n)
            | NamedGraph::Cycle(n)
            | NamedGraph::Star(n)
            | NamedGraph::Complete(n)
            | NamedGraph::Empty(n) => n,
        }
    }
}

impl FromStr for NamedGraph {
    type Err = Error;

    /// Accepts `dyad`, `G0`..`G3`, and `path:N`, `cycle:N`, `star:N`,
    /// `complete:N`, `empty:N`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let fixed = match lower.as_str() {
            "dyad" => Some(NamedGraph::Dyad),
            "g0" => Some(NamedGraph::G0),
            "g1" => Some(NamedGraph::G1),
            "g2" => Some(NamedGraph::G2),
            "g3" => Some(NamedGraph::G3),
            _ => None,
        };
        if let Some(g) = fixed {
            return Ok(g);
        }
        let (family, size) = lower
            .split_once(':')
            .ok_or_else(|| Error::UnknownGraph(s.to_string()))?;
        let n: usize = size
            .parse()
            .map_err(|_| Error::UnknownGraph(s.to_string()))?;
        if n == 0 {
            return Err(Error::UnknownGraph(s.to_string()));
        }
        match family {
            "path" => Ok(NamedGraph::Path(n)),
            "cycle" => Ok(NamedGraph::Cycle(n)),
            "star" => Ok(NamedGraph::Star(n)),
            "complete" => Ok(NamedGraph::Complete(n)),
            "empty" => Ok(NamedGraph::Empty(n)),
            _ => Err(Error::UnknownGraph(s.to_string())),
        }
    }
}

impl fmt::Display for NamedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedGraph::Dyad => write!(f, "dyad"),
            NamedGraph::G0 => write!(f, "G0"),
            NamedGraph::G1 => write!(f, "G1"),
            NamedGraph::G2 => write!(f, "G2"),
            NamedGraph::G3 => write!(f, "G3"),
            NamedGraph::Path(n) => write!(f, "path:{n}"),
            NamedGraph::Cycle(n) => write!(f, "cycle:{n}"),
            NamedGraph::Star(n) => write!(f, "star:{n}"),
            NamedGraph::Complete(n) => write!(f, "complete:{n}"),
            NamedGraph::Empty(n) => write!(f, "empty:{n}"),
        }
    }
}

/// Looks a graph up by name, e.g. `"G2"` or `"cycle:6"`.
pub fn named_graph(name: &str) -> Result<Network> {
    name.parse::<NamedGraph>()?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spectrum_of(name: &str) -> Spectrum {
        named_graph(name).unwrap().spectral_decompose()
    }

    #[test]
    fn sample_network_eigenvalues() {
        let cases = [
            ("G1", 1.73, -1.73),
            ("G2", 2.17, -1.48),
            ("G3", 2.56, -1.56),
        ];
        for (name, hi, lo) in cases {
            let s = spectrum_of(name);
            assert_abs_diff_eq!(s.lambda_max(), hi, epsilon = 0.005);
            assert_abs_diff_eq!(s.lambda_min(), lo, epsilon = 0.005);
        }
        // exact values for the star and the diamond
        assert_abs_diff_eq!(spectrum_of("G1").lambda_max(), 3f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(
            spectrum_of("G3").lambda_max(),
            (1.0 + 17f64.sqrt()) / 2.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn empty_graph_spectrum() {
        let s = named_graph("empty:3").unwrap().spectral_decompose();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(s.vectors(), &DMatrix::identity(3, 3));
        assert_eq!(s.groups().len(), 1);
    }

    #[test]
    fn dyad_spectrum_and_vectors() {
        let s = spectrum_of("dyad");
        assert_eq!(s.values(), &[1.0, -1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.vector(0), DVector::from_vec(vec![h, h]), epsilon = 1e-15);
        assert_abs_diff_eq!(s.vector(1), DVector::from_vec(vec![h, -h]), epsilon = 1e-15);
        let top = s.eigenspace(Extreme::Max);
        assert_eq!(top.multiplicity(), 1);
    }

    #[test]
    fn complete_graph_has_degenerate_minimum() {
        let s = spectrum_of("complete:3");
        let low = s.eigenspace(Extreme::Min);
        assert_eq!(low.multiplicity(), 2);
        assert_abs_diff_eq!(low.value, -1.0, epsilon = 1e-12);
        // J - I annihilates nothing in the span except by the eigenvalue
        let g = named_graph("complete:3").unwrap();
        let resid = g.weights() * &low.basis + &low.basis;
        assert!(resid.amax() < 1e-12);
    }

    #[test]
    fn star_perron_vector_is_positive() {
        let s = spectrum_of("G1");
        let top = s.eigenspace(Extreme::Max);
        assert_eq!(top.multiplicity(), 1);
        assert!(top.basis.iter().all(|&x| x > 0.0));
        // power iteration oracle on G + I (shift removes the ±λ tie)
        let g = named_graph("G1").unwrap();
        let shifted = g.weights() + DMatrix::<f64>::identity(4, 4);
        let mut x = DVector::from_element(4, 1.0);
        for _ in 0..500 {
            x = &shifted * &x;
            x /= x.norm();
        }
        assert_abs_diff_eq!(top.basis.column(0).into_owned(), x, epsilon = 1e-12);
    }

    #[test]
    fn domination_chain() {
        let g1 = named_graph("G1").unwrap();
        let g2 = named_graph("G2").unwrap();
        let g3 = named_graph("G3").unwrap();
        assert!(dominates(&g1, &g2).unwrap());
        assert!(dominates(&g2, &g3).unwrap());
        assert!(dominates(&g2, &g2).unwrap());
        assert!(!dominates(&g3, &g1).unwrap());
        assert!(dominates(&g1, &named_graph("dyad").unwrap()).is_err());
    }

    #[test]
    fn bipartite_checks() {
        assert!(named_graph("G1").unwrap().is_bipartite());
        assert!(!named_graph("complete:3").unwrap().is_bipartite());
        assert!(named_graph("cycle:4").unwrap().is_bipartite());
        assert!(!named_graph("cycle:5").unwrap().is_bipartite());
        assert!(named_graph("empty:3").unwrap().is_bipartite());
    }

    #[test]
    fn named_graph_parsing() {
        let dyad = named_graph("dyad").unwrap();
        assert_eq!(
            dyad.weights(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        let k3 = named_graph("complete:3").unwrap();
        assert_eq!(
            k3.weights(),
            &(DMatrix::from_element(3, 3, 1.0) - DMatrix::<f64>::identity(3, 3))
        );
        assert_eq!(named_graph("G1").unwrap().edges().len(), 3);
        assert!(matches!(
            named_graph("petersen"),
            Err(Error::UnknownGraph(_))
        ));
        assert!(named_graph("path:0").is_err());
        assert_eq!(
            "cycle:6".parse::<NamedGraph>().unwrap().to_string(),
            "cycle:6"
        );
    }

    #[test]
    fn edge_validation() {
        assert!(Network::from_edges(2, &[(0, 0, 1.0)]).is_err());
        assert!(Network::from_edges(2, &[(0, 2, 1.0)]).is_err());
        assert!(Network::from_edges(2, &[(0, 1, -1.0)]).is_err());
        assert!(Network::from_edges(2, &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(Network::from_matrix(asym).is_err());
    }

    #[test]
    fn decomposition_is_deterministic() {
        let g = named_graph("G0").unwrap();
        assert_eq!(g.spectral_decompose(), g.spectral_decompose());
    }

    #[test]
    fn scaled_max_uses_sign() {
        let s = spectrum_of("G2");
        assert_eq!(s.scaled_max(0.5), 0.5 * s.lambda_max());
        assert_eq!(s.scaled_max(-0.5), -0.5 * s.lambda_min());
    }
}
