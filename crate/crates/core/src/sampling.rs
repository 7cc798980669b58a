//! Deterministic pseudo-random group elements k(θ₁)a(t)k(θ₂).

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{CartanCoordinates, GroupElement};

/// Default range of the hyperbolic parameter for fit samples.
pub const T_RANGE: (f64, f64) = (0.2, 1.8);

/// Stream of Cartan samples with θ₁, θ₂ uniform on [0, 2π) and t uniform
/// on [t_lo, t_hi).
#[derive(Clone, Debug)]
pub struct SampleStream {
    rng: ChaCha8Rng,
    t_lo: f64,
    t_hi: f64,
}

impl SampleStream {
    pub fn new(seed: u64, t_lo: f64, t_hi: f64) -> Self {
        SampleStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            t_lo,
            t_hi,
        }
    }

    pub fn next_coordinates(&mut self) -> CartanCoordinates {
        let theta1 = self.rng.gen_range(0.0..TAU);
        let t = if self.t_hi > self.t_lo {
            self.rng.gen_range(self.t_lo..self.t_hi)
        } else {
            self.t_lo
        };
        let theta2 = self.rng.gen_range(0.0..TAU);
        CartanCoordinates::new(theta1, t, theta2)
    }

    pub fn take(&mut self, count: usize) -> Vec<GroupElement> {
        (0..count).map(|_| self.next_coordinates().reconstruct()).collect()
    }
}

/// `count` samples with t ∈ [0.2, 1.8).
pub fn sample_points(seed: u64, count: usize) -> Vec<GroupElement> {
    SampleStream::new(seed, T_RANGE.0, T_RANGE.1).take(count)
}

/// Consecutive fit and holdout draws from one stream; the two sets are
/// checked to share no point.
pub fn fit_and_holdout(seed: u64, n_fit: usize, n_holdout: usize) -> (Vec<GroupElement>, Vec<GroupElement>) {
    let mut stream = SampleStream::new(seed, T_RANGE.0, T_RANGE.1);
    let fit = stream.take(n_fit);
    let mut holdout = Vec::with_capacity(n_holdout);
    while holdout.len() < n_holdout {
        let g = stream.next_coordinates().reconstruct();
        if fit.iter().all(|f| f.max_abs_diff(&g) > 0.0) {
            holdout.push(g);
        }
    }
    (fit, holdout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::cartan_decompose;

    #[test]
    fn streams_are_reproducible() {
        let a = sample_points(7, 20);
        let b = sample_points(7, 20);
        assert!(a.iter().zip(&b).all(|(x, y)| x.max_abs_diff(y) == 0.0));
        let c = sample_points(8, 20);
        assert!(a.iter().zip(&c).any(|(x, y)| x.max_abs_diff(y) > 0.0));
    }

    #[test]
    fn samples_stay_in_the_t_range() {
        for g in sample_points(3, 200) {
            let t = cartan_decompose(&g).unwrap().t;
            assert!((0.2 - 1e-9..1.8 + 1e-9).contains(&t));
        }
    }

    #[test]
    fn fit_and_holdout_are_disjoint() {
        let (fit, holdout) = fit_and_holdout(11, 50, 20);
        assert_eq!((fit.len(), holdout.len()), (50, 20));
        for h in &holdout {
            assert!(fit.iter().all(|f| f.max_abs_diff(h) > 0.0));
        }
    }
}
