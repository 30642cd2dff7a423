//! Bit strings, subsequence counting and the deletion channel itself.
//!
//! A [`BitString`] is an input or output word of the channel. Deleting each
//! bit independently with probability `d` maps an `n`-bit input `x` to an
//! `m`-bit output `y` with probability `E(y, x) (1 - d)^m d^(n - m)`, where
//! `E(y, x)` counts the index subsets of `x` that spell out `y`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::rng::seeded_rng;

/// A finite binary word. The empty word is the "nothing received" output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The `len`-bit word whose most significant bit comes first, so that
    /// numeric order of `index` is lexicographic order of the words.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "BitString::from_index supports at most 64 bits");
        let bits = (0..len).rev().map(|shift| (index >> shift) & 1 == 1).collect();
        Self { bits }
    }

    /// Inverse of [`BitString::from_index`]. Panics past 64 bits.
    pub fn to_index(&self) -> u64 {
        assert!(self.len() <= 64, "BitString::to_index supports at most 64 bits");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// All `2^len` words of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "cannot enumerate words of {len} bits");
        (0..1u64 << len).map(move |i| BitString::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Every bit flipped.
    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self { bits }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => domain(format!("invalid bit character {other:?} in {s:?}")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Deletion probability `d`, always in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DeletionProb(f64);

impl DeletionProb {
    pub const ZERO: DeletionProb = DeletionProb(0.0);
    pub const ONE: DeletionProb = DeletionProb(1.0);

    pub fn new(d: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&d) {
            Ok(Self(d))
        } else {
            domain(format!("deletion probability {d} is outside [0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Survival probability `1 - d`.
    pub fn keep(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for DeletionProb {
    type Error = Error;

    fn try_from(d: f64) -> Result<Self> {
        Self::new(d)
    }
}

/// Number of index subsets of `x` whose induced subsequence equals `y`.
///
/// Classic O(|x|·|y|) counting DP over a single row; overflow of the
/// exact count is reported rather than wrapped.
pub fn subsequence_count(x: &BitString, y: &BitString) -> Result<u64> {
    let (n, m) = (x.len(), y.len());
    if m > n {
        return Ok(0);
    }
    // ways[j] = number of ways the processed prefix of x produces y[..j]
    let mut ways = vec![0u64; m + 1];
    ways[0] = 1;
    for &xb in x.bits() {
        for j in (1..=m).rev() {
            if y.bits()[j - 1] == xb {
                ways[j] = ways[j].checked_add(ways[j - 1]).ok_or(Error::CountOverflow {
                    input_len: n,
                    output_len: m,
                })?;
            }
        }
    }
    Ok(ways[m])
}

/// `C(n, k)` as a float. Exact for every `n` this crate handles.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Probability that the deletion channel turns `x` into `y`.
pub fn deletion_output_prob(x: &BitString, y: &BitString, d: DeletionProb) -> Result<f64> {
    let (n, m) = (x.len(), y.len());
    if m > n {
        return domain(format!("output length {m} exceeds input length {n}"));
    }
    let ways = subsequence_count(x, y)? as f64;
    Ok(ways * d.keep().powi(m as i32) * d.value().powi((n - m) as i32))
}

/// Probability that exactly `k` of `n` bits are deleted.
pub fn deletion_count_prob(n: usize, k: usize, d: DeletionProb) -> Result<f64> {
    if k > n {
        return domain(format!("deletion count {k} is outside [0, {n}]"));
    }
    Ok(binomial(n, k) * d.value().powi(k as i32) * d.keep().powi((n - k) as i32))
}

/// Passes `x` through the deletion channel once.
///
/// Bit `i` is dropped when the `i`-th uniform draw of the seeded stream is
/// below `d`, so the output is a pure function of `(x, d, seed)`.
pub fn sample_deletion(x: &BitString, d: DeletionProb, seed: u64) -> BitString {
    let mut rng = seeded_rng(seed);
    delete_with(x.bits(), d, &mut rng)
}

pub(crate) fn delete_with<R: Rng + ?Sized>(bits: &[bool], d: DeletionProb, rng: &mut R) -> BitString {
    let dv = d.value();
    bits.iter()
        .copied()
        .filter(|_| rng.gen::<f64>() >= dv)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn dp(d: f64) -> DeletionProb {
        DeletionProb::new(d).unwrap()
    }

    #[test]
    fn worked_subsequence_counts() {
        assert_eq!(subsequence_count(&bs("10101010"), &bs("10011")).unwrap(), 1);
        assert_eq!(subsequence_count(&bs("10101010"), &bs("10101")).unwrap(), 6);
    }

    #[test]
    fn trivial_subsequence_counts() {
        assert_eq!(subsequence_count(&bs("0110"), &BitString::empty()).unwrap(), 1);
        assert_eq!(subsequence_count(&BitString::empty(), &BitString::empty()).unwrap(), 1);
        assert_eq!(subsequence_count(&bs("0110"), &bs("0110")).unwrap(), 1);
        assert_eq!(subsequence_count(&bs("01"), &bs("011")).unwrap(), 0);
        assert_eq!(subsequence_count(&bs("0000"), &bs("1")).unwrap(), 0);
        assert_eq!(subsequence_count(&bs("0000"), &bs("00")).unwrap(), 6);
    }

    #[test]
    fn overflow_is_reported() {
        let x = BitString::new(vec![false; 80]);
        let y = BitString::new(vec![false; 40]);
        assert!(matches!(
            subsequence_count(&x, &y),
            Err(Error::CountOverflow { input_len: 80, output_len: 40 })
        ));
    }

    #[test]
    fn text_form() {
        assert_eq!(bs("").to_string(), "");
        assert_eq!(bs("0101").to_string(), "0101");
        assert!("01a".parse::<BitString>().is_err());
        assert_eq!(BitString::from_index(5, 4), bs("0101"));
        assert_eq!(bs("0101").to_index(), 5);
        let all: Vec<String> = BitString::all_of_length(2).map(|b| b.to_string()).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        assert_eq!(BitString::all_of_length(0).count(), 1);
    }

    #[test]
    fn output_probability_examples() {
        let x = bs("10101010");
        let p = deletion_output_prob(&x, &bs("10011"), dp(0.5)).unwrap();
        assert_eq!(p, 0.00390625);
        for d in [0.0, 0.2, 0.7, 1.0] {
            let same = deletion_output_prob(&x, &x, dp(d)).unwrap();
            assert!((same - (1.0 - d).powi(8)).abs() < 1e-15);
            assert_eq!(deletion_output_prob(&bs("0"), &BitString::empty(), dp(d)).unwrap(), d);
        }
        assert!(deletion_output_prob(&bs("0"), &bs("00"), dp(0.1)).is_err());
    }

    #[test]
    fn deletion_count_examples() {
        for d in [0.0, 0.3, 0.5, 1.0] {
            assert_eq!(deletion_count_prob(1, 1, dp(d)).unwrap(), d);
            let two = deletion_count_prob(2, 1, dp(d)).unwrap();
            assert!((two - 2.0 * d * (1.0 - d)).abs() < 1e-15);
        }
        for n in 1..10 {
            assert_eq!(deletion_count_prob(n, 0, DeletionProb::ZERO).unwrap(), 1.0);
        }
        assert!(deletion_count_prob(3, 4, dp(0.1)).is_err());
    }

    #[test]
    fn deletion_prob_domain() {
        assert!(DeletionProb::new(-0.01).is_err());
        assert!(DeletionProb::new(1.01).is_err());
        assert!(DeletionProb::new(f64::NAN).is_err());
        assert_eq!(DeletionProb::new(1.0).unwrap(), DeletionProb::ONE);
    }

    #[test]
    fn sampling_extremes_and_determinism() {
        let x = bs("1100101110001");
        for seed in [0, 1, 42, u64::MAX] {
            assert_eq!(sample_deletion(&x, DeletionProb::ZERO, seed), x);
            assert!(sample_deletion(&x, DeletionProb::ONE, seed).is_empty());
            let a = sample_deletion(&x, dp(0.4), seed);
            let b = sample_deletion(&x, dp(0.4), seed);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sampled_length_matches_binomial_mean() {
        let n = 20usize;
        let d = 0.35;
        let trials = 100_000u64;
        let x = BitString::from_index(0b1011_0010_1110_0101_0011, n);
        let total: usize = (0..trials)
            .map(|t| sample_deletion(&x, dp(d), crate::rng::derive_seed(7, t)).len())
            .sum();
        let mean = total as f64 / trials as f64;
        let expected = n as f64 * (1.0 - d);
        let sd_of_mean = (n as f64 * d * (1.0 - d) / trials as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sd_of_mean, "mean {mean}");
    }
}
