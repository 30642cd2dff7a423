//! First-order Markov sources and what the deletion channel does to them.
//!
//! The source starts with a uniform bit and repeats the previous bit with
//! probability `γ`. After i.i.d. deletions the received sequence is again a
//! symmetric first-order Markov chain, with stay probability
//! `q = 1 - (1-γ) / (1 + d(1-2γ))`.

use rand::Rng;
use rayon::prelude::*;

use crate::bitseq::{delete_with, BitString, DeletionProb};
use crate::bounds::first_bit_flip;
use crate::entropy::binary_entropy;
use crate::error::{domain, Error, Result};
use crate::rng::{derive_seed, seeded_rng};

/// Output symbols dropped at the start of every trial in [`estimate_q`].
pub const BURN_IN: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovParams {
    gamma: f64,
}

impl MarkovParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&gamma) {
            Ok(Self { gamma })
        } else {
            domain(format!("stay probability {gamma} is outside [0, 1]"))
        }
    }

    pub fn gamma(self) -> f64 {
        self.gamma
    }

    /// Second eigenvalue of the transition matrix, `2γ - 1`.
    fn eigenvalue(self) -> f64 {
        2.0 * self.gamma - 1.0
    }
}

/// `n` bits of the Markov source, deterministic in `seed`.
pub fn generate(n: usize, params: MarkovParams, seed: u64) -> Result<BitString> {
    if n == 0 {
        return domain("source length must be at least 1");
    }
    Ok(generate_with(n, params, &mut seeded_rng(seed)))
}

fn generate_with<R: Rng + ?Sized>(n: usize, params: MarkovParams, rng: &mut R) -> BitString {
    let mut bits = Vec::with_capacity(n);
    let mut current: bool = rng.gen();
    bits.push(current);
    for _ in 1..n {
        if rng.gen::<f64>() >= params.gamma {
            current = !current;
        }
        bits.push(current);
    }
    BitString::new(bits)
}

/// Stay probability of the received process, `1 - (1-γ) / (1 + d(1-2γ))`.
/// The `γ = d = 1` corner returns its limit along `d`, which is 1.
pub fn output_q(params: MarkovParams, d: DeletionProb) -> f64 {
    if d.value() == 0.0 {
        return params.gamma;
    }
    let denom = 1.0 + d.value() * (1.0 - 2.0 * params.gamma);
    if denom <= 0.0 {
        return 1.0;
    }
    1.0 - (1.0 - params.gamma) / denom
}

/// `Pr(X_{1+k} = X_1) = (1 + (2γ-1)^k) / 2`.
pub fn same_symbol_prob(k: u32, params: MarkovParams) -> f64 {
    (1.0 + params.eigenvalue().powi(k as i32)) / 2.0
}

/// Length of the input block for [`first_bit_match_prob`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockLength {
    Finite(usize),
    Infinite,
}

/// `sum_{k < n} r^k`, exact at `r = 1`.
fn geometric_sum(r: f64, n: usize) -> f64 {
    if r == 1.0 {
        n as f64
    } else {
        (1.0 - r.powi(n as i32)) / (1.0 - r)
    }
}

/// Probability that the first received bit exists and equals the first sent
/// bit.
///
/// For a block of `n` input bits, `X_1` either survives, or it and the next
/// `k` bits are deleted and `X_{k+2}` (which agrees with `X_1` with
/// probability `same_symbol_prob(k + 1)`) survives:
///
/// ```text
/// (1-d) + d sum_{k=0}^{n-2} d^k (1-d) (1 + (2γ-1)^(k+1)) / 2
///   = (1-d) + d(1-d)/2 [ S(d) + (2γ-1) S(d(2γ-1)) ],   S(r) = sum_{k<n-1} r^k
/// ```
///
/// As `n` grows this increases to `1 - d(1-γ) / (1 + d(1-2γ))`.
pub fn first_bit_match_prob(params: MarkovParams, d: DeletionProb, n: BlockLength) -> Result<f64> {
    let dv = d.value();
    match n {
        BlockLength::Infinite => Ok(1.0 - first_bit_flip(dv, params.gamma)),
        BlockLength::Finite(0) => domain("block length must be at least 1"),
        BlockLength::Finite(n) => {
            let a = params.eigenvalue();
            let terms = n - 1;
            let sums = geometric_sum(dv, terms) + a * geometric_sum(dv * a, terms);
            Ok(d.keep() + dv * d.keep() / 2.0 * sums)
        }
    }
}

/// Exhaustive reference for [`first_bit_match_prob`] on `n` bits: sums the
/// Markov weight of every input times the weight of every deletion pattern
/// whose first survivor equals `X_1`. Cost is `O(n 2^n)`.
pub fn first_bit_match_enumerated(params: MarkovParams, d: DeletionProb, n: usize) -> Result<f64> {
    if n == 0 || n > 24 {
        return domain(format!("enumeration supports 1 <= n <= 24, got {n}"));
    }
    let (dv, kv) = (d.value(), d.keep());
    // weight of all deletion patterns whose first survivor is position j
    let mut first_survivor = vec![0.0; n];
    for mask in 0u32..1 << n {
        // bit j of mask set = position j survives
        if mask == 0 {
            continue;
        }
        let kept = mask.count_ones() as i32;
        let w = kv.powi(kept) * dv.powi(n as i32 - kept);
        first_survivor[mask.trailing_zeros() as usize] += w;
    }
    let g = params.gamma;
    let mut total = 0.0;
    for word in 0u32..1 << n {
        let bit = |i: usize| (word >> i) & 1;
        let mut weight = 0.5;
        for i in 1..n {
            weight *= if bit(i) == bit(i - 1) { g } else { 1.0 - g };
        }
        if weight == 0.0 {
            continue;
        }
        let matched: f64 = (0..n).filter(|&j| bit(j) == bit(0)).map(|j| first_survivor[j]).sum();
        total += weight * matched;
    }
    Ok(total)
}

/// `I(X_1; Y_1) = 1 - H(d(1-γ) / (1 + d(1-2γ)))`.
pub fn first_bit_mi(params: MarkovParams, d: DeletionProb) -> Result<f64> {
    Ok(1.0 - binary_entropy(first_bit_flip(d.value(), params.gamma))?)
}

/// `Pr(Y_i = Y_{i+lag}) = (1 + (1-2q)^lag) / 2`.
pub fn output_match_prob(lag: u32, q: f64) -> f64 {
    (1.0 + (1.0 - 2.0 * q).powi(lag as i32)) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QEstimate {
    pub estimate: f64,
    pub std_err: f64,
    /// Adjacent output pairs counted.
    pub pairs: u64,
    pub trials: usize,
}

impl QEstimate {
    /// `(estimate - expected) / std_err`; zero when both agree exactly.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = self.estimate - expected;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_err
        }
    }
}

/// Monte Carlo estimate of the output stay probability.
///
/// Trial `i` draws its source and deletions from one stream seeded with
/// `derive_seed(seed, i)`, drops the first [`BURN_IN`] received symbols and
/// counts equal adjacent pairs in the rest. Stay indicators of a symmetric
/// two-state chain are i.i.d. Bernoulli(q), so the standard error is the
/// binomial one over all pooled pairs.
pub fn estimate_q(params: MarkovParams, d: DeletionProb, n: usize, trials: usize, seed: u64) -> Result<QEstimate> {
    if n < 1000 {
        return domain(format!("source length {n} is below 1000"));
    }
    if trials == 0 {
        return domain("at least one trial is required");
    }
    let counts: Vec<(u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded_rng(derive_seed(seed, trial as u64));
            let input = generate_with(n, params, &mut rng);
            let output = delete_with(input.bits(), d, &mut rng);
            let bits = output.bits().get(BURN_IN..).unwrap_or(&[]);
            let pairs = bits.len().saturating_sub(1) as u64;
            let stays = bits.windows(2).filter(|w| w[0] == w[1]).count() as u64;
            (stays, pairs)
        })
        .collect();
    let (stays, pairs) = counts.iter().fold((0, 0), |(s, p), (ds, dp)| (s + ds, p + dp));
    if pairs == 0 {
        return Err(Error::Estimation(format!(
            "no adjacent output pairs after burn-in (d = {})",
            d.value()
        )));
    }
    let estimate = stays as f64 / pairs as f64;
    Ok(QEstimate {
        estimate,
        std_err: (estimate * (1.0 - estimate) / pairs as f64).sqrt(),
        pairs,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(g: f64) -> MarkovParams {
        MarkovParams::new(g).unwrap()
    }

    fn dp(d: f64) -> DeletionProb {
        DeletionProb::new(d).unwrap()
    }

    #[test]
    fn generator_extremes() {
        let constant = generate(50, mp(1.0), 3).unwrap();
        assert!(constant.bits().iter().all(|&b| b == constant.bits()[0]));
        let alternating = generate(50, mp(0.0), 3).unwrap();
        assert!(alternating.bits().windows(2).all(|w| w[0] != w[1]));
        assert_eq!(generate(50, mp(0.6), 9).unwrap(), generate(50, mp(0.6), 9).unwrap());
        assert!(generate(0, mp(0.6), 9).is_err());
        assert!(MarkovParams::new(1.1).is_err());
    }

    #[test]
    fn iid_source_stay_fraction() {
        let n = 1_000_000;
        let x = generate(n, mp(0.5), 17).unwrap();
        let stays = x.bits().windows(2).filter(|w| w[0] == w[1]).count() as f64 / (n - 1) as f64;
        assert!((stays - 0.5).abs() <= 3.0 * (0.25f64 / n as f64).sqrt());
    }

    #[test]
    fn output_q_values() {
        for g in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert_eq!(output_q(mp(g), DeletionProb::ZERO), g);
        }
        for d in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(output_q(mp(0.5), dp(d)), 0.5);
        }
        assert!((output_q(mp(0.7), dp(0.4)) - (1.0 - 0.3 / 0.84)).abs() < 1e-15);
        assert!((output_q(mp(0.7), dp(0.4)) - 0.642_857_142_857_142_9).abs() < 1e-15);
        assert_eq!(output_q(mp(1.0), DeletionProb::ONE), 1.0);
    }

    #[test]
    fn same_symbol_values() {
        assert_eq!(same_symbol_prob(0, mp(0.3)), 1.0);
        for k in 1..6 {
            assert_eq!(same_symbol_prob(k, mp(0.5)), 0.5);
        }
        // two-step chain: 0.8^2 + 0.2^2
        assert!((same_symbol_prob(2, mp(0.8)) - (0.64 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn first_bit_values() {
        for g in [0.1, 0.5, 0.9] {
            for n in [BlockLength::Finite(1), BlockLength::Finite(7), BlockLength::Infinite] {
                assert_eq!(first_bit_match_prob(mp(g), DeletionProb::ZERO, n).unwrap(), 1.0);
            }
        }
        for d in [0.1, 0.5, 0.99] {
            assert_eq!(first_bit_match_prob(mp(1.0), dp(d), BlockLength::Infinite).unwrap(), 1.0);
            let half = first_bit_match_prob(mp(0.5), dp(d), BlockLength::Infinite).unwrap();
            assert!((half - (1.0 - d / 2.0)).abs() < 1e-15);
        }
        assert!((first_bit_match_prob(mp(0.3), dp(0.4), BlockLength::Finite(1)).unwrap() - 0.6).abs() < 1e-15);
        assert!(first_bit_match_prob(mp(0.3), dp(0.4), BlockLength::Finite(0)).is_err());
    }

    #[test]
    fn first_bit_matches_enumeration() {
        for g in [0.3, 0.5, 0.8] {
            for d in [0.2, 0.5] {
                for n in 1..=12 {
                    let closed = first_bit_match_prob(mp(g), dp(d), BlockLength::Finite(n)).unwrap();
                    let brute = first_bit_match_enumerated(mp(g), dp(d), n).unwrap();
                    assert!((closed - brute).abs() < 1e-10, "g={g} d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn first_bit_converges_geometrically() {
        for g in [0.2, 0.5, 0.75, 1.0] {
            for d in [0.1, 0.5, 0.9] {
                let limit = first_bit_match_prob(mp(g), dp(d), BlockLength::Infinite).unwrap();
                let mut prev = 0.0;
                for n in [10, 20, 40] {
                    let v = first_bit_match_prob(mp(g), dp(d), BlockLength::Finite(n)).unwrap();
                    // the tail bound drops below f64 resolution for small d
                    assert!((v - limit).abs() <= 2.0 * d.powi(n as i32) / (1.0 - d) + 4.0 * f64::EPSILON);
                    assert!(v >= prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn first_bit_mi_values() {
        assert_eq!(first_bit_mi(mp(0.3), DeletionProb::ZERO).unwrap(), 1.0);
        assert_eq!(first_bit_mi(mp(1.0), dp(0.6)).unwrap(), 1.0);
        let expected = 1.0 - binary_entropy(1.0 / 6.0).unwrap();
        assert!((first_bit_mi(mp(0.75), dp(0.5)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.349_977_578_351_646).abs() < 1e-12);
    }

    #[test]
    fn output_match_values() {
        assert_eq!(output_match_prob(0, 0.8), 1.0);
        assert_eq!(output_match_prob(3, 0.5), 0.5);
        assert!((output_match_prob(3, 0.8) - 0.392).abs() < 1e-15);
    }

    #[test]
    fn q_estimates() {
        let e = estimate_q(mp(0.7), DeletionProb::ZERO, 1_000_000, 1, 5).unwrap();
        assert!(e.z_score(0.7).abs() <= 3.0);
        for d in [0.0, 0.4, 0.9] {
            let e = estimate_q(mp(0.5), dp(d), 100_000, 4, 11).unwrap();
            assert!(e.z_score(0.5).abs() <= 3.0, "d = {d}: {e:?}");
        }
        let e = estimate_q(mp(0.7), dp(0.4), 100_000, 10, 23).unwrap();
        assert!(e.z_score(output_q(mp(0.7), dp(0.4))).abs() <= 3.0, "{e:?}");
        assert_eq!(e, estimate_q(mp(0.7), dp(0.4), 100_000, 10, 23).unwrap());
    }

    #[test]
    fn q_estimate_errors() {
        assert!(estimate_q(mp(0.5), dp(0.5), 999, 1, 0).is_err());
        assert!(estimate_q(mp(0.5), dp(0.5), 1000, 0, 0).is_err());
        assert!(matches!(
            estimate_q(mp(0.5), DeletionProb::ONE, 1000, 3, 0),
            Err(Error::Estimation(_))
        ));
    }
}
