//! Abstract Grover search over `N` items with real amplitudes.
//!
//! The iteration never leaves the real plane spanned by the uniform state and
//! the target, so amplitudes are stored as `f64`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Real amplitude vector over `N` items with one marked target.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    amplitudes: Vec<f64>,
    target: usize,
}

impl SearchState {
    /// Builds a state from raw amplitudes. The vector must be non-empty and
    /// of unit norm (within `1e-12`).
    pub fn new(amplitudes: Vec<f64>, target: usize) -> Result<Self> {
        if amplitudes.is_empty() {
            return domain("search space must contain at least one item");
        }
        if target >= amplitudes.len() {
            return domain(format!(
                "target {target} out of range for {} items",
                amplitudes.len()
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("amplitudes must have unit norm, got {norm}"));
        }
        Ok(Self { amplitudes, target })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn target_amplitude(&self) -> f64 {
        self.amplitudes[self.target]
    }

    /// Probability of finding the target on measurement.
    pub fn success_probability(&self) -> f64 {
        let a = self.target_amplitude();
        a * a
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Inner product with another state over the same items.
    pub fn overlap(&self, other: &SearchState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Stopping plan derived from the query equation `(2Q+1)·asin(1/√N) = π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPlan {
    /// Real-valued solution of the query equation.
    pub q_exact: f64,
    /// Rounded (half up) stopping count.
    pub q_int: u64,
    /// `sin²((2·q_int + 1)·θ)`.
    pub success_prob: f64,
    /// Success probability when stopping at `floor(q_exact)`.
    pub floor_success: f64,
    /// Success probability when stopping at `ceil(q_exact)`.
    pub ceil_success: f64,
}

/// Rotation half-angle `θ = asin(1/√N)`.
pub fn rotation_angle(n_items: usize) -> f64 {
    (1.0 / (n_items as f64).sqrt()).asin()
}

/// Closed-form success probability after `iterations` Grover steps from the
/// uniform start.
pub fn success_after(n_items: usize, iterations: u64) -> f64 {
    let s = ((2 * iterations + 1) as f64 * rotation_angle(n_items)).sin();
    s * s
}

pub fn uniform_state(n_items: usize, target: usize) -> Result<SearchState> {
    if n_items == 0 {
        return domain("search space must contain at least one item");
    }
    if target >= n_items {
        return domain(format!("target {target} out of range for {n_items} items"));
    }
    let a = 1.0 / (n_items as f64).sqrt();
    Ok(SearchState {
        amplitudes: vec![a; n_items],
        target,
    })
}

/// Oracle `U_t`: flips the sign of the target amplitude.
pub fn reflect_target(state: &SearchState) -> SearchState {
    let mut next = state.clone();
    next.amplitudes[next.target] = -next.amplitudes[next.target];
    next
}

/// Reflection in the mean, `aᵢ ↦ 2·mean(a) − aᵢ` (the composite `−U_s`).
pub fn reflect_mean(state: &SearchState) -> SearchState {
    let n = state.amplitudes.len() as f64;
    let twice_mean = 2.0 * state.amplitudes.iter().sum::<f64>() / n;
    SearchState {
        amplitudes: state.amplitudes.iter().map(|a| twice_mean - a).collect(),
        target: state.target,
    }
}

/// Applies `−U_s·U_t` the given number of times.
pub fn grover_iterate(state: &SearchState, iterations: u64) -> SearchState {
    let mut current = state.clone();
    for _ in 0..iterations {
        current = reflect_mean(&reflect_target(&current));
    }
    current
}

pub fn optimal_queries(n_items: usize) -> Result<QueryPlan> {
    if n_items == 0 {
        return domain("search space must contain at least one item");
    }
    // θ = π/2 for a single item: already solved.
    if n_items == 1 {
        return Ok(QueryPlan {
            q_exact: 0.0,
            q_int: 0,
            success_prob: 1.0,
            floor_success: 1.0,
            ceil_success: 1.0,
        });
    }
    let theta = rotation_angle(n_items);
    let q_exact = (FRAC_PI_2 / theta - 1.0) / 2.0;
    let q_int = (q_exact + 0.5).floor().max(0.0) as u64;
    let floor_q = q_exact.floor().max(0.0) as u64;
    let ceil_q = q_exact.ceil().max(0.0) as u64;
    Ok(QueryPlan {
        q_exact,
        q_int,
        success_prob: success_after(n_items, q_int),
        floor_success: success_after(n_items, floor_q),
        ceil_success: success_after(n_items, ceil_q),
    })
}

/// Number of iterations in the sampling window used by the random-stop
/// average: a whole number of rotation cycles spanning at least 1024 steps.
pub fn random_stop_window(n_items: usize) -> u64 {
    let cycle = std::f64::consts::PI / rotation_angle(n_items);
    let cycles = (1024.0 / cycle).ceil().max(1.0);
    ((cycles * cycle).round() as u64).max(1)
}

/// Monte-Carlo estimate of the target probability when the search is stopped
/// after a uniformly random number of iterations.
pub fn average_success_over_random_stop(
    n_items: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    if n_items == 0 {
        return domain("search space must contain at least one item");
    }
    if samples == 0 {
        return domain("at least one sample is required");
    }
    let window = random_stop_window(n_items);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let total: f64 = (0..samples)
        .map(|_| success_after(n_items, rng.random_range(0..window)))
        .sum();
    Ok(total / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_amplitudes() {
        let s = uniform_state(4, 2).unwrap();
        assert!(s.amplitudes().iter().all(|&a| close(a, 0.5, 1e-15)));
        assert_eq!(uniform_state(1, 0).unwrap().amplitudes(), &[1.0]);
        let s = uniform_state(100, 0).unwrap();
        assert!(s.amplitudes().iter().all(|&a| close(a, 0.1, 1e-15)));
        assert!(close(s.norm_squared(), 1.0, 1e-12));
    }

    #[test]
    fn uniform_rejects_bad_target() {
        assert!(uniform_state(4, 4).is_err());
        assert!(uniform_state(0, 0).is_err());
    }

    #[test]
    fn new_rejects_non_unit() {
        assert!(SearchState::new(vec![1.0, 1.0], 0).is_err());
        assert!(SearchState::new(vec![], 0).is_err());
    }

    #[test]
    fn target_reflection() {
        let s = uniform_state(4, 2).unwrap();
        let r = reflect_target(&s);
        assert_eq!(r.amplitudes(), &[0.5, 0.5, -0.5, 0.5]);
        assert_eq!(reflect_target(&r), s);

        let s = SearchState::new(vec![1.0, 0.0], 1).unwrap();
        assert_eq!(reflect_target(&s).amplitudes(), &[1.0, 0.0]);
    }

    #[test]
    fn mean_reflection() {
        let s = uniform_state(4, 2).unwrap();
        let r = reflect_mean(&s);
        for (a, b) in r.amplitudes().iter().zip(s.amplitudes()) {
            assert!(close(*a, *b, 1e-15));
        }
        let flipped = reflect_target(&s);
        let r = reflect_mean(&flipped);
        let expected = [0.0, 0.0, 1.0, 0.0];
        for (a, b) in r.amplitudes().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
        let back = reflect_mean(&r);
        for (a, b) in back.amplitudes().iter().zip(flipped.amplitudes()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn iterate_small_cases() {
        let s = uniform_state(4, 1).unwrap();
        assert!(close(grover_iterate(&s, 1).target_amplitude(), 1.0, 1e-12));
        assert_eq!(grover_iterate(&s, 0).target_amplitude(), 0.5);

        let s = uniform_state(100, 0).unwrap();
        let p = grover_iterate(&s, 7).success_probability();
        let expected = (15.0 * 0.1f64.asin()).sin().powi(2);
        assert!(close(p, expected, 1e-10));
        assert!(close(p, 0.9953444003575992, 1e-12));
    }

    #[test]
    fn query_plans() {
        let plan = optimal_queries(4).unwrap();
        assert!(close(plan.q_exact, 1.0, 1e-12));
        assert_eq!(plan.q_int, 1);
        assert!(close(plan.success_prob, 1.0, 1e-12));

        let plan = optimal_queries(1).unwrap();
        assert_eq!(plan.q_int, 0);
        assert_eq!(plan.success_prob, 1.0);

        // q_exact = 0.5 exactly; ties round up.
        let plan = optimal_queries(2).unwrap();
        assert!(close(plan.q_exact, 0.5, 1e-12));
        assert_eq!(plan.q_int, 1);
        let quarter_turn = std::f64::consts::FRAC_PI_4;
        assert!(close(
            plan.success_prob,
            (3.0 * quarter_turn).sin().powi(2),
            1e-12
        ));
        assert!(close(plan.floor_success, 0.5, 1e-12));
        assert!(close(plan.ceil_success, 0.5, 1e-12));

        assert!(optimal_queries(0).is_err());
    }

    #[test]
    fn random_stop_average() {
        let avg = average_success_over_random_stop(2, 10_000, 7).unwrap();
        assert!(close(avg, 0.5, 1e-12));
        let one = average_success_over_random_stop(100, 1, 3).unwrap();
        assert!((0.0..=1.0).contains(&one));
        assert!(average_success_over_random_stop(4, 0, 0).is_err());
    }

    #[test]
    fn random_stop_is_seeded() {
        let a = average_success_over_random_stop(37, 5000, 11).unwrap();
        let b = average_success_over_random_stop(37, 5000, 11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn window_covers_whole_cycles() {
        // N = 4: cycle of 6 iterations.
        assert_eq!(random_stop_window(4) % 6, 0);
        assert!(random_stop_window(4) >= 1024);
        assert!(random_stop_window(1_000_000) >= 1024);
    }
}
