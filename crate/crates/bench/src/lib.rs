//! Fixtures shared by the solver benchmarks.

use netgame::graph::NamedGraph;
use netgame::{ActivitySet, GameParams, InterventionProblem, UtilityVector};

/// A cycle of `n` agents in `k` activities with mild substitutes and
/// complementary network effects.
pub fn cycle_game(n: usize, k: usize) -> GameParams {
    let net = NamedGraph::Cycle(n).build().expect("cycle");
    GameParams::new(net, k, 0.2, 0.2).expect("inside the regularity region")
}

/// Deterministic, non-constant baseline utilities.
pub fn baseline(k: usize, n: usize) -> UtilityVector {
    let values: Vec<f64> = (0..k * n)
        .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
        .collect();
    UtilityVector::from_slice(k, n, &values).expect("shape")
}

pub fn problem(n: usize, k: usize, l: usize, budget: f64) -> InterventionProblem {
    let params = cycle_game(n, k);
    InterventionProblem::new(
        params,
        baseline(k, n),
        ActivitySet::prefix(k, l).expect("l <= k"),
        budget,
    )
    .expect("valid problem")
}
