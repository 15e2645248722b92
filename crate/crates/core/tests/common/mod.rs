#![allow(dead_code)]

use nalgebra::DMatrix;
use netgame::{GameParams, Network, UtilityVector};
use proptest::prelude::*;

/// Symmetric nonnegative weights with zero diagonal; roughly half the pairs
/// are connected.
pub fn network(max_n: usize) -> impl Strategy<Value = Network> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((any::<bool>(), 0.1f64..2.0), n * (n - 1) / 2).prop_map(move |raw| {
            let mut w = DMatrix::zeros(n, n);
            let mut it = raw.into_iter();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (on, x) = it.next().unwrap();
                    if on {
                        w[(i, j)] = x;
                        w[(j, i)] = x;
                    }
                }
            }
            Network::from_matrix(w).unwrap()
        })
    })
}

/// Raw draws mapped into the regularity region: `t` is the fraction of the
/// admissible network intensity (sign gives the sign of `delta`) and `u` the
/// share of `delta` carried across activities.
pub fn game(net: Network, k: usize, beta_frac: f64, t: f64, u: f64) -> Option<GameParams> {
    // keep 1+(k−1)β and 1−β away from zero
    let lo = if k > 1 { -1.0 / (k as f64 - 1.0) } else { -1.0 };
    let beta = if beta_frac >= 0.0 {
        0.9 * beta_frac
    } else {
        -0.9 * beta_frac * lo
    };
    let spectrum = net.spectral_decompose();
    let radius = spectrum.lambda_max().abs().max(spectrum.lambda_min().abs());
    let kf = k as f64;
    let sum_scale = 1.0 + (kf - 1.0) * beta;
    let diff_scale = 1.0 - beta;
    let delta = if radius == 0.0 {
        t
    } else {
        let mut cap = sum_scale / ((1.0 + (kf - 1.0) * u) * radius);
        if k > 1 {
            cap = cap.min(diff_scale / ((1.0 - u) * radius));
        }
        t * cap
    };
    let gamma = if k > 1 { u * delta } else { 0.0 };
    let p = GameParams::with_gamma(net, k, beta, delta, gamma).ok()?;
    p.margins().holds().then_some(p)
}

pub fn params(max_n: usize, max_k: usize, spill: bool) -> impl Strategy<Value = GameParams> {
    (
        network(max_n),
        1..=max_k,
        -1.0f64..1.0,
        -0.9f64..0.9,
        0.0f64..1.0,
        any::<bool>(),
    )
        .prop_filter_map(
            "outside the regularity region",
            move |(net, k, b, t, u, zero_u)| {
                let u = if spill && !zero_u { u } else { 0.0 };
                game(net, k, b, t, u)
            },
        )
}

pub fn utilities(k: usize, n: usize) -> impl Strategy<Value = UtilityVector> {
    prop::collection::vec(-3.0f64..3.0, k * n)
        .prop_map(move |v| UtilityVector::from_slice(k, n, &v).unwrap())
}

/// A game together with baseline utilities for it.
pub fn instance(
    max_n: usize,
    max_k: usize,
    spill: bool,
) -> impl Strategy<Value = (GameParams, UtilityVector)> {
    params(max_n, max_k, spill).prop_flat_map(|p| {
        let (k, n) = (p.k(), p.n());
        (Just(p), utilities(k, n))
    })
}

pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
