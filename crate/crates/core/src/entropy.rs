//! Entropy in bits, with `0 log 0 = 0`.

use crate::error::{domain, Result};

/// Normalization slack accepted for probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// `-p log2 p`, zero at `p = 0`.
#[inline]
pub(crate) fn neg_plog2p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability {p} is outside [0, 1]"));
    }
    Ok(binary_entropy_unchecked(p))
}

pub(crate) fn binary_entropy_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    // log2(1 - p) through ln_1p keeps precision for tiny p
    -p * p.log2() - (1.0 - p) * (-p).ln_1p() / std::f64::consts::LN_2
}

/// Shannon entropy of a probability vector, in bits.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    check_distribution(dist)?;
    Ok(dist.iter().map(|&p| neg_plog2p(p)).sum())
}

pub(crate) fn check_distribution(dist: &[f64]) -> Result<()> {
    if let Some(bad) = dist.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return domain(format!("probability entry {bad} is negative or not finite"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return domain(format!("probabilities sum to {total}, not 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        // -0.25 log2 0.25 - 0.75 log2 0.75
        let expected = 0.5 + 0.75 * (4.0f64 / 3.0).log2();
        assert!((binary_entropy(0.25).unwrap() - expected).abs() < 1e-15);
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert!(binary_entropy(-1e-9).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        for k in 0..6 {
            let n = 1usize << k;
            let h = entropy(&vec![1.0 / n as f64; n]).unwrap();
            assert!((h - k as f64).abs() < 1e-12);
        }
        assert!((entropy(&[0.5, 0.25, 0.25]).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_bad_vectors() {
        assert!(entropy(&[0.5, 0.4]).is_err());
        assert!(entropy(&[1.5, -0.5]).is_err());
        assert!(entropy(&[0.5, 0.5 + 1e-11]).is_err());
        assert!(entropy(&[0.5, 0.5 + 1e-13]).is_ok());
    }
}
