//! Exact transition matrices of the finite-block deletion channels.
//!
//! * FIFO: `L` bits in, exactly `R` bits out. Entry `[x, y]` is
//!   `E(y, x) / C(L, R)`, the channel law conditioned on the output length,
//!   which no longer depends on `d`.
//! * FI: `L` bits in, any output length `0..=L`. Entry `[x, y]` is the
//!   unconditioned deletion probability `E(y, x) (1-d)^|y| d^(L-|y|)`.
//!
//! Inputs are the `2^L` words in lexicographic order. FI outputs are ordered
//! by length descending, then lexicographically, ending with the empty word.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::bitseq::{binomial, BitString, DeletionProb};
use crate::error::{domain, Error, Result};

/// Row-sum slack accepted for a stochastic matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Dense row-stochastic channel matrix with labelled alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    input_labels: Vec<BitString>,
    output_labels: Vec<BitString>,
    entries: Vec<f64>,
}

impl ChannelMatrix {
    /// Builds a matrix from row-major `entries`, checking that every entry
    /// lies in `[0, 1]` and every row sums to one.
    pub fn new(input_labels: Vec<BitString>, output_labels: Vec<BitString>, entries: Vec<f64>) -> Result<Self> {
        let (rows, cols) = (input_labels.len(), output_labels.len());
        if rows == 0 || cols == 0 {
            return domain("channel matrix needs at least one input and one output");
        }
        if entries.len() != rows * cols {
            return domain(format!(
                "{} entries cannot fill a {rows} x {cols} matrix",
                entries.len()
            ));
        }
        let m = Self {
            input_labels,
            output_labels,
            entries,
        };
        m.check_stochastic()?;
        Ok(m)
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(input_labels: Vec<BitString>, output_labels: Vec<BitString>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != output_labels.len()) {
            return domain("ragged rows in channel matrix");
        }
        Self::new(input_labels, output_labels, rows.concat())
    }

    pub fn check_stochastic(&self) -> Result<()> {
        for (i, row) in self.row_iter().enumerate() {
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return domain(format!("entry {bad} in row {i} is not a probability"));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return domain(format!("row {i} sums to {total}"));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.input_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.output_labels.len()
    }

    pub fn input_labels(&self) -> &[BitString] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[BitString] {
        &self.output_labels
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.entries[i * c..(i + 1) * c]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.cols())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols() + j]
    }

    pub fn input_index(&self, label: &BitString) -> Option<usize> {
        self.input_labels.iter().position(|l| l == label)
    }

    pub fn output_index(&self, label: &BitString) -> Option<usize> {
        self.output_labels.iter().position(|l| l == label)
    }

    /// Entry addressed by labels; zero if either label is unknown.
    pub fn prob(&self, input: &BitString, output: &BitString) -> f64 {
        match (self.input_index(input), self.output_index(output)) {
            (Some(i), Some(j)) => self.get(i, j),
            _ => 0.0,
        }
    }

    /// CSV with a header of output labels and one row per input label.
    /// Entries carry 17 significant digits; the empty word is an empty field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "input")?;
        for label in &self.output_labels {
            write!(out, ",{label}")?;
        }
        writeln!(out)?;
        for (label, row) in self.input_labels.iter().zip(self.row_iter()) {
            write!(out, "{label}")?;
            for p in row {
                write!(out, ",{p:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Largest block lengths the builders accept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixCaps {
    pub fifo_max_len: usize,
    pub fi_max_len: usize,
}

impl Default for MatrixCaps {
    fn default() -> Self {
        Self {
            fifo_max_len: 12,
            fi_max_len: 11,
        }
    }
}

impl MatrixCaps {
    /// FIFO matrix `Π_{L,R}`: `2^L x 2^R`, entries `E(y, x) / C(L, R)`.
    pub fn fifo_matrix(&self, l: usize, r: usize) -> Result<ChannelMatrix> {
        if l == 0 {
            return domain("input length must be positive");
        }
        if r > l {
            return domain(format!("output length {r} exceeds input length {l}"));
        }
        if l > self.fifo_max_len {
            return Err(Error::CapExceeded {
                len: l,
                cap: self.fifo_max_len,
            });
        }
        let cols = 1usize << r;
        let norm = binomial(l, r);
        let mut entries = vec![0.0; (1usize << l) * cols];
        entries.par_chunks_mut(cols).enumerate().for_each(|(x, row)| {
            let counts = subsequence_counts_by_length(x as u64, l, r);
            for (slot, &c) in row.iter_mut().zip(&counts[r]) {
                *slot = c as f64 / norm;
            }
        });
        let inputs = BitString::all_of_length(l).collect();
        let outputs = BitString::all_of_length(r).collect();
        Ok(ChannelMatrix {
            input_labels: inputs,
            output_labels: outputs,
            entries,
        })
    }

    /// FI matrix: `2^L` inputs, `2^(L+1) - 1` outputs of every length.
    pub fn fi_matrix(&self, l: usize, d: DeletionProb) -> Result<ChannelMatrix> {
        if l == 0 {
            return domain("input length must be positive");
        }
        if l > self.fi_max_len {
            return Err(Error::CapExceeded {
                len: l,
                cap: self.fi_max_len,
            });
        }
        let cols = (1usize << (l + 1)) - 1;
        // probability of one particular survival pattern with m survivors
        let pattern_prob: Vec<f64> = (0..=l)
            .map(|m| d.keep().powi(m as i32) * d.value().powi((l - m) as i32))
            .collect();
        let mut entries = vec![0.0; (1usize << l) * cols];
        entries.par_chunks_mut(cols).enumerate().for_each(|(x, row)| {
            let counts = subsequence_counts_by_length(x as u64, l, l);
            for m in (0..=l).rev() {
                let offset = fi_block_offset(l, m);
                for (y, &c) in counts[m].iter().enumerate() {
                    row[offset + y] = c as f64 * pattern_prob[m];
                }
            }
        });
        let inputs = BitString::all_of_length(l).collect();
        let outputs = (0..=l).rev().flat_map(BitString::all_of_length).collect();
        Ok(ChannelMatrix {
            input_labels: inputs,
            output_labels: outputs,
            entries,
        })
    }
}

/// Column of the first length-`m` output in an `L`-bit FI matrix.
pub fn fi_block_offset(l: usize, m: usize) -> usize {
    (1usize << (l + 1)) - (1usize << (m + 1))
}

/// `build_fifo_matrix` with the default caps.
pub fn build_fifo_matrix(l: usize, r: usize) -> Result<ChannelMatrix> {
    MatrixCaps::default().fifo_matrix(l, r)
}

/// `build_fi_matrix` with the default caps.
pub fn build_fi_matrix(l: usize, d: DeletionProb) -> Result<ChannelMatrix> {
    MatrixCaps::default().fi_matrix(l, d)
}

/// For the `len`-bit word `x` (MSB first), `out[m][y]` is the number of ways
/// to obtain the `m`-bit word `y` by deletions, for all `m <= max_out`.
///
/// Same recurrence as [`crate::bitseq::subsequence_count`], run for every
/// target at once. Counts are bounded by `C(len, m)`, so `len <= 60` is safe.
fn subsequence_counts_by_length(x: u64, len: usize, max_out: usize) -> Vec<Vec<u64>> {
    debug_assert!(len <= 60);
    let mut out: Vec<Vec<u64>> = (0..=max_out).map(|m| vec![0u64; 1 << m]).collect();
    out[0][0] = 1;
    for pos in 0..len {
        let bit = ((x >> (len - 1 - pos)) & 1) as usize;
        let top = (pos + 1).min(max_out);
        for m in (1..=top).rev() {
            let (shorter, longer) = out.split_at_mut(m);
            let prev = &shorter[m - 1];
            let cur = &mut longer[0];
            for (y, &ways) in prev.iter().enumerate() {
                if ways != 0 {
                    cur[(y << 1) | bit] += ways;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitseq::{deletion_count_prob, subsequence_count};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn dp(d: f64) -> DeletionProb {
        DeletionProb::new(d).unwrap()
    }

    #[test]
    fn fifo_identity_and_null() {
        for l in 1..=5 {
            let id = build_fifo_matrix(l, l).unwrap();
            for i in 0..id.rows() {
                for j in 0..id.cols() {
                    assert_eq!(id.get(i, j), if i == j { 1.0 } else { 0.0 });
                }
            }
            let null = build_fifo_matrix(l, 0).unwrap();
            assert_eq!(null.cols(), 1);
            assert!(null.entries().iter().all(|&p| p == 1.0));
            assert_eq!(null.output_labels()[0], BitString::empty());
        }
    }

    #[test]
    fn fifo_two_to_one() {
        let m = build_fifo_matrix(2, 1).unwrap();
        assert_eq!(m.prob(&bs("01"), &bs("0")), 0.5);
        assert_eq!(m.prob(&bs("01"), &bs("1")), 0.5);
        assert_eq!(m.prob(&bs("00"), &bs("0")), 1.0);
        assert_eq!(m.prob(&bs("11"), &bs("0")), 0.0);
    }

    #[test]
    fn fifo_matches_integer_dp() {
        for (l, r) in [(4, 2), (5, 3), (6, 4), (7, 3)] {
            let m = build_fifo_matrix(l, r).unwrap();
            let norm = binomial(l, r);
            for (i, x) in m.input_labels().iter().enumerate() {
                for (j, y) in m.output_labels().iter().enumerate() {
                    let exact = subsequence_count(x, y).unwrap() as f64 / norm;
                    assert_eq!(m.get(i, j), exact, "{x} -> {y}");
                }
            }
        }
    }

    #[test]
    fn one_bit_fi_matrix() {
        for d in [0.0, 0.25, 0.9] {
            let m = build_fi_matrix(1, dp(d)).unwrap();
            let labels: Vec<String> = m.output_labels().iter().map(|b| b.to_string()).collect();
            assert_eq!(labels, ["0", "1", ""]);
            assert_eq!(m.row(0), &[1.0 - d, 0.0, d]);
            assert_eq!(m.row(1), &[0.0, 1.0 - d, d]);
        }
    }

    #[test]
    fn two_bit_fi_matrix() {
        let d = 0.3;
        let m = build_fi_matrix(2, dp(d)).unwrap();
        let labels: Vec<String> = m.output_labels().iter().map(|b| b.to_string()).collect();
        assert_eq!(labels, ["00", "01", "10", "11", "0", "1", ""]);
        let a = (1.0 - d) * (1.0 - d);
        let b = d * (1.0 - d);
        let c = d * d;
        let expect = [
            [a, 0.0, 0.0, 0.0, 2.0 * b, 0.0, c],
            [0.0, a, 0.0, 0.0, b, b, c],
            [0.0, 0.0, a, 0.0, b, b, c],
            [0.0, 0.0, 0.0, a, 0.0, 2.0 * b, c],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert!((m.get(i, j) - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn noiseless_fi_matrix() {
        let m = build_fi_matrix(3, DeletionProb::ZERO).unwrap();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                assert_eq!(m.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn fi_blocks_are_scaled_fifo_matrices() {
        for l in 1..=6 {
            for d in [0.1, 0.5, 0.85] {
                let fi = build_fi_matrix(l, dp(d)).unwrap();
                for r in 0..=l {
                    let fifo = build_fifo_matrix(l, r).unwrap();
                    let weight = deletion_count_prob(l, l - r, dp(d)).unwrap();
                    let offset = fi_block_offset(l, r);
                    for i in 0..fi.rows() {
                        for j in 0..fifo.cols() {
                            assert_eq!(fi.output_labels()[offset + j], fifo.output_labels()[j]);
                            let diff = fi.get(i, offset + j) - weight * fifo.get(i, j);
                            assert!(diff.abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn complement_symmetry() {
        let fi = build_fi_matrix(4, dp(0.37)).unwrap();
        for x in fi.input_labels() {
            for y in fi.output_labels() {
                assert_eq!(fi.prob(x, y), fi.prob(&x.complement(), &y.complement()));
            }
        }
        let fifo = build_fifo_matrix(5, 3).unwrap();
        for x in fifo.input_labels() {
            for y in fifo.output_labels() {
                assert_eq!(fifo.prob(x, y), fifo.prob(&x.complement(), &y.complement()));
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(build_fifo_matrix(13, 2), Err(Error::CapExceeded { len: 13, cap: 12 })));
        assert!(matches!(build_fi_matrix(12, dp(0.1)), Err(Error::CapExceeded { len: 12, cap: 11 })));
        assert!(build_fifo_matrix(3, 4).is_err());
        assert!(build_fifo_matrix(0, 0).is_err());
        let wide = MatrixCaps {
            fifo_max_len: 13,
            fi_max_len: 11,
        };
        assert_eq!(wide.fifo_matrix(13, 1).unwrap().rows(), 8192);
    }

    #[test]
    fn rejects_non_stochastic() {
        let labels = || vec![bs("0"), bs("1")];
        assert!(ChannelMatrix::from_rows(labels(), labels(), &[vec![0.5, 0.5], vec![0.6, 0.5]]).is_err());
        assert!(ChannelMatrix::from_rows(labels(), labels(), &[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(ChannelMatrix::from_rows(labels(), labels(), &[vec![1.0, 0.0], vec![0.0, 1.0]]).is_ok());
    }

    #[test]
    fn csv_layout() {
        let m = build_fi_matrix(1, dp(0.25)).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "input,0,1,");
        assert_eq!(
            lines[1],
            "0,7.5000000000000000e-1,0.0000000000000000e0,2.5000000000000000e-1"
        );
        assert_eq!(lines.len(), 3);
    }
}
