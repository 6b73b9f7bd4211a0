//! Zipf file popularity and seeded request sampling.

use num_traits::Float;
use rand::distributions::{Distribution, Standard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{FileId, RequestProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopularityError {
    #[error("library size must be at least 1")]
    EmptyLibrary,
    #[error("zipf exponent must be a non-negative number, got {0}")]
    BadExponent(f64),
}

/// Probability of each file, index 0 being file 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<S> {
    probs: Vec<S>,
    cdf: Vec<S>,
}

impl<S: Float> Pmf<S> {
    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights(weights: Vec<S>) -> Result<Self, PopularityError> {
        if weights.is_empty() {
            return Err(PopularityError::EmptyLibrary);
        }
        // Summing smallest-first keeps the tail from being absorbed.
        let total = weights.iter().rev().fold(S::zero(), |acc, &w| acc + w);
        let probs: Vec<S> = weights.into_iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = S::zero();
        for &p in &probs {
            acc = acc + p;
            cdf.push(acc);
        }
        Ok(Self { probs, cdf })
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn prob(&self, file: FileId) -> S {
        self.probs[file as usize - 1]
    }

    pub fn library_size(&self) -> usize {
        self.probs.len()
    }

    /// File whose cumulative interval contains `u` in `[0, 1)`.
    pub fn inverse_cdf(&self, u: S) -> FileId {
        let idx = self.cdf.partition_point(|&c| c <= u);
        // u can exceed the last cumulative value by rounding
        (idx.min(self.probs.len() - 1) + 1) as FileId
    }
}

/// `P_f = f^-gamma / sum_g g^-gamma` for f in 1..=F.
pub fn zipf_pmf<S: Float>(library_size: usize, gamma: S) -> Result<Pmf<S>, PopularityError> {
    if library_size == 0 {
        return Err(PopularityError::EmptyLibrary);
    }
    if gamma.is_nan() || gamma < S::zero() {
        return Err(PopularityError::BadExponent(gamma.to_f64().unwrap_or(f64::NAN)));
    }
    let weights = (1..=library_size)
        .map(|f| S::from(f).expect("file index fits the float type").powf(-gamma))
        .collect();
    Pmf::from_weights(weights)
}

/// Draws `num_ms` independent requests by inverse-CDF sampling.
pub fn sample_requests<S, R>(pmf: &Pmf<S>, num_ms: usize, rng: &mut R) -> RequestProfile
where
    S: Float,
    Standard: Distribution<S>,
    R: Rng + ?Sized,
{
    RequestProfile::new((0..num_ms).map(|_| pmf.inverse_cdf(rng.gen::<S>())).collect())
}

/// Independent stream for trial `trial` of an experiment seeded by `seed`.
///
/// Streams depend only on `(seed, trial)`, so trials can run in any order
/// and two policies evaluated with the same seed see the same requests.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    }

    #[test]
    fn uniform_when_gamma_is_zero() {
        let pmf = zipf_pmf(4, 0.0f64).unwrap();
        assert!(close(pmf.probs(), &[0.25; 4]));
    }

    #[test]
    fn harmonic_weights_for_gamma_one() {
        let pmf = zipf_pmf(3, 1.0f64).unwrap();
        assert!(close(pmf.probs(), &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]));
    }

    #[test]
    fn squared_weights_for_gamma_two() {
        let pmf = zipf_pmf(2, 2.0f64).unwrap();
        assert!(close(pmf.probs(), &[0.8, 0.2]));
    }

    #[test]
    fn works_in_single_precision() {
        let pmf = zipf_pmf(3, 1.0f32).unwrap();
        assert!((pmf.prob(1) - 6.0 / 11.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(zipf_pmf(0, 1.0f64), Err(PopularityError::EmptyLibrary));
        assert!(zipf_pmf(3, -1.0f64).is_err());
        assert!(zipf_pmf(3, f64::NAN).is_err());
    }

    #[test]
    fn single_file_always_sampled() {
        let pmf = zipf_pmf(1, 1.5f64).unwrap();
        let mut rng = trial_rng(9, 0);
        assert_eq!(sample_requests(&pmf, 3, &mut rng).as_slice(), &[1, 1, 1]);
    }

    #[test]
    fn same_seed_same_profile() {
        let pmf = zipf_pmf(2, 0.0f64).unwrap();
        let a = sample_requests(&pmf, 2, &mut trial_rng(17, 4));
        let b = sample_requests(&pmf, 2, &mut trial_rng(17, 4));
        assert_eq!(a, b);
        let long_a = sample_requests(&pmf, 64, &mut trial_rng(17, 4));
        let long_b = sample_requests(&pmf, 64, &mut trial_rng(17, 5));
        assert_ne!(long_a, long_b);
    }

    #[test]
    fn inverse_cdf_edges() {
        let pmf = zipf_pmf(3, 1.0f64).unwrap();
        assert_eq!(pmf.inverse_cdf(0.0), 1);
        assert_eq!(pmf.inverse_cdf(6.0 / 11.0 - 1e-9), 1);
        assert_eq!(pmf.inverse_cdf(6.0 / 11.0 + 1e-9), 2);
        assert_eq!(pmf.inverse_cdf(0.999_999_999), 3);
        assert_eq!(pmf.inverse_cdf(1.0), 3);
    }
}
