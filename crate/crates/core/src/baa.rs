//! Blahut-Arimoto capacity computation for discrete memoryless channels.
//!
//! Each iteration evaluates, for the current input law `p` and output law
//! `q = p W`, the row divergences `D_i = KL(W_i || q)`. Classical theory gives
//! the certified bracket
//!
//! ```text
//! log2 sum_i p_i 2^(D_i)  <=  C  <=  max_i D_i
//! ```
//!
//! and the update `p_i <- p_i 2^(D_i) / sum_k p_k 2^(D_k)`. The solver stops
//! once the bracket is narrower than `tol` and reports the lower end, which
//! never decreases from one iteration to the next.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;

use crate::bitseq::DeletionProb;
use crate::entropy::{check_distribution, neg_plog2p};
use crate::error::{domain, Error, Result};
use crate::matrix::{ChannelMatrix, MatrixCaps};
use crate::rng::seeded_rng;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Slack allowed when checking that the lower bracket never decreases.
const MONOTONE_SLACK: f64 = 1e-12;

/// A probability vector over a channel's inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_distribution(&probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Random interior point of the simplex (normalized exponential draws).
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
        let total: f64 = raw.iter().sum();
        Self {
            probs: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    /// Rescales to unit sum. Only done on request.
    pub fn renormalized(&self) -> Result<Self> {
        let total: f64 = self.probs.iter().sum();
        if total.is_nan() || total <= 0.0 || self.probs.iter().any(|p| *p < 0.0) {
            return domain("cannot renormalize a vector without positive mass");
        }
        Ok(Self {
            probs: self.probs.iter().map(|p| p / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaaResult {
    /// Lower end of the final bracket, in bits.
    pub capacity: f64,
    pub distribution: InputDistribution,
    pub iterations: usize,
    pub converged: bool,
    /// Final `upper - lower`, in bits.
    pub gap_bound: f64,
    /// Whether the lower bracket was nondecreasing over the whole run.
    pub monotone: bool,
}

/// `I(X; Y) = H(pW) - sum_i p_i H(W_i)` in bits.
pub fn mutual_information(p: &InputDistribution, ch: &ChannelMatrix) -> Result<f64> {
    if p.len() != ch.rows() {
        return domain(format!(
            "distribution has {} entries but the channel has {} inputs",
            p.len(),
            ch.rows()
        ));
    }
    let mut output = vec![0.0; ch.cols()];
    let mut conditional = 0.0;
    for (&pi, row) in p.probs().iter().zip(ch.row_iter()) {
        if pi == 0.0 {
            continue;
        }
        for (o, &w) in output.iter_mut().zip(row) {
            *o += pi * w;
        }
        conditional += pi * row.iter().map(|&w| neg_plog2p(w)).sum::<f64>();
    }
    let output_entropy: f64 = output.iter().map(|&q| neg_plog2p(q)).sum();
    Ok(output_entropy - conditional)
}

/// Sparse copy of the channel used inside the iteration.
struct SparseRows {
    cols: usize,
    starts: Vec<usize>,
    index: Vec<usize>,
    weight: Vec<f64>,
    /// `sum_j W_ij ln W_ij` per row
    neg_entropy: Vec<f64>,
}

impl SparseRows {
    fn new(ch: &ChannelMatrix) -> Self {
        let mut starts = Vec::with_capacity(ch.rows() + 1);
        let mut index = Vec::new();
        let mut weight = Vec::new();
        let mut neg_entropy = Vec::with_capacity(ch.rows());
        starts.push(0);
        for row in ch.row_iter() {
            let mut acc = 0.0;
            for (j, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    index.push(j);
                    weight.push(w);
                    acc += w * w.ln();
                }
            }
            neg_entropy.push(acc);
            starts.push(index.len());
        }
        Self {
            cols: ch.cols(),
            starts,
            index,
            weight,
            neg_entropy,
        }
    }

    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.starts[i]..self.starts[i + 1];
        (&self.index[range.clone()], &self.weight[range])
    }

    fn rows(&self) -> usize {
        self.neg_entropy.len()
    }
}

/// Runs Blahut-Arimoto until the capacity bracket is at most `tol` bits wide
/// or `max_iter` updates have been made.
pub fn blahut_arimoto(
    ch: &ChannelMatrix,
    tol: f64,
    max_iter: usize,
    init: Option<&InputDistribution>,
) -> Result<BaaResult> {
    if tol.is_nan() || tol <= 0.0 {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    ch.check_stochastic()?;
    let mut p = match init {
        Some(init) if init.len() != ch.rows() => {
            return domain(format!(
                "initial distribution has {} entries but the channel has {} inputs",
                init.len(),
                ch.rows()
            ))
        }
        Some(init) => init.probs().to_vec(),
        None => vec![1.0 / ch.rows() as f64; ch.rows()],
    };

    let w = SparseRows::new(ch);
    let ln2 = std::f64::consts::LN_2;
    let mut q = vec![0.0; w.cols];
    let mut ln_q = vec![0.0; w.cols];
    let mut div = vec![0.0; w.rows()];
    let mut prev_lower = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut iterations = 0;

    loop {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let (idx, wt) = w.row(i);
            for (&j, &wij) in idx.iter().zip(wt) {
                q[j] += pi * wij;
            }
        }
        for (l, &v) in ln_q.iter_mut().zip(&q) {
            *l = if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
        }
        // D_i = sum_j W_ij ln(W_ij / q_j), in nats
        for (i, d) in div.iter_mut().enumerate() {
            let (idx, wt) = w.row(i);
            let cross: f64 = idx.iter().zip(wt).map(|(&j, &wij)| wij * ln_q[j]).sum();
            *d = w.neg_entropy[i] - cross;
        }

        let upper = div.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let active_max = p
            .iter()
            .zip(&div)
            .filter(|(pi, _)| **pi > 0.0)
            .map(|(_, d)| *d)
            .fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = p
            .iter()
            .zip(&div)
            .filter(|(pi, _)| **pi > 0.0)
            .map(|(pi, d)| pi * (d - active_max).exp())
            .sum();
        let lower = (active_max + z.ln()) / ln2;
        let gap = (upper / ln2 - lower).max(0.0);

        if lower < prev_lower - MONOTONE_SLACK {
            monotone = false;
        }
        prev_lower = prev_lower.max(lower);

        let converged = gap <= tol;
        if converged || iterations >= max_iter {
            // the update below is what attains `lower`, so report it
            let next = update(&p, &div, active_max, z);
            return Ok(BaaResult {
                capacity: lower.max(0.0),
                distribution: InputDistribution { probs: next },
                iterations,
                converged,
                gap_bound: gap,
                monotone,
            });
        }
        p = update(&p, &div, active_max, z);
        iterations += 1;
    }
}

fn update(p: &[f64], div: &[f64], shift: f64, z: f64) -> Vec<f64> {
    p.iter()
        .zip(div)
        .map(|(&pi, &d)| if pi > 0.0 { pi * (d - shift).exp() / z } else { 0.0 })
        .collect()
}

/// `f(L, R)`: capacity of the `L`-in, `R`-out FIFO channel.
pub fn f_value(l: usize, r: usize, tol: f64) -> Result<f64> {
    Ok(f_value_run(&MatrixCaps::default(), l, r, tol)?.capacity)
}

fn f_value_run(caps: &MatrixCaps, l: usize, r: usize, tol: f64) -> Result<BaaResult> {
    let ch = caps.fifo_matrix(l, r)?;
    blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, None)
}

/// `C_L`: capacity of the `L`-bit FI channel (all output lengths).
pub fn c_l(l: usize, d: DeletionProb, tol: f64) -> Result<f64> {
    Ok(c_l_run(&MatrixCaps::default(), l, d, tol)?.capacity)
}

pub fn c_l_run(caps: &MatrixCaps, l: usize, d: DeletionProb, tol: f64) -> Result<BaaResult> {
    let ch = caps.fi_matrix(l, d)?;
    blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, None)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FEntry {
    pub value: f64,
    pub iterations: usize,
    pub gap_bound: f64,
    pub converged: bool,
}

impl From<&BaaResult> for FEntry {
    fn from(r: &BaaResult) -> Self {
        Self {
            value: r.capacity,
            iterations: r.iterations,
            gap_bound: r.gap_bound,
            converged: r.converged,
        }
    }
}

/// Table of `f(L, R)` values keyed by `(L, R)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FTable {
    entries: BTreeMap<(usize, usize), FEntry>,
}

impl FTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every `f(L, R)` with `1 <= L <= l_max`, computed in parallel.
    pub fn compute(l_max: usize, tol: f64, caps: &MatrixCaps) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = (1..=l_max).flat_map(|l| (0..=l).map(move |r| (l, r))).collect();
        let entries = pairs
            .par_iter()
            .map(|&(l, r)| f_value_run(caps, l, r, tol).map(|res| ((l, r), FEntry::from(&res))))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self { entries })
    }

    pub fn get(&self, l: usize, r: usize) -> Option<f64> {
        self.entries.get(&(l, r)).map(|e| e.value)
    }

    pub fn value(&self, l: usize, r: usize) -> Result<f64> {
        self.get(l, r).ok_or(Error::MissingFValue { l, r })
    }

    pub fn entry(&self, l: usize, r: usize) -> Option<&FEntry> {
        self.entries.get(&(l, r))
    }

    pub fn insert(&mut self, l: usize, r: usize, entry: FEntry) {
        self.entries.insert((l, r), entry);
    }

    /// Replaces a value, keeping the other diagnostics.
    pub fn set_value(&mut self, l: usize, r: usize, value: f64) {
        let entry = self.entries.entry((l, r)).or_insert(FEntry {
            value,
            iterations: 0,
            gap_bound: 0.0,
            converged: true,
        });
        entry.value = value;
    }

    pub fn max_l(&self) -> usize {
        self.entries.keys().map(|(l, _)| *l).max().unwrap_or(0)
    }

    /// Whether every `R` in `0..=L` is present.
    pub fn has_level(&self, l: usize) -> bool {
        (0..=l).all(|r| self.entries.contains_key(&(l, r)))
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &FEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// CSV with columns `L,R,f,iterations,gap_bound`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "L,R,f,iterations,gap_bound")?;
        for ((l, r), e) in &self.entries {
            writeln!(out, "{l},{r},{},{},{:e}", e.value, e.iterations, e.gap_bound)?;
        }
        Ok(())
    }
}

/// Thread-safe memo of f-values at a fixed tolerance.
#[derive(Debug)]
pub struct FCache {
    tol: f64,
    caps: MatrixCaps,
    memo: Mutex<HashMap<(usize, usize), FEntry>>,
}

impl FCache {
    pub fn new(tol: f64, caps: MatrixCaps) -> Self {
        Self {
            tol,
            caps,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, l: usize, r: usize) -> Result<FEntry> {
        if let Some(e) = self.memo.lock().unwrap().get(&(l, r)) {
            return Ok(*e);
        }
        // computed outside the lock so other pairs proceed concurrently
        let entry = FEntry::from(&f_value_run(&self.caps, l, r, self.tol)?);
        self.memo.lock().unwrap().entry((l, r)).or_insert(entry);
        Ok(entry)
    }

    /// Fills every `R` for each `L` in `1..=l_max` and returns the table.
    pub fn table(&self, l_max: usize) -> Result<FTable> {
        let pairs: Vec<(usize, usize)> = (1..=l_max).flat_map(|l| (0..=l).map(move |r| (l, r))).collect();
        let entries = pairs
            .par_iter()
            .map(|&(l, r)| self.get(l, r).map(|e| ((l, r), e)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(FTable { entries })
    }

    pub fn len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitseq::BitString;
    use crate::entropy::binary_entropy;
    use crate::matrix::{build_fi_matrix, build_fifo_matrix};

    fn dp(d: f64) -> DeletionProb {
        DeletionProb::new(d).unwrap()
    }

    fn bsc(p: f64) -> ChannelMatrix {
        let labels = || vec!["0".parse::<BitString>().unwrap(), "1".parse().unwrap()];
        ChannelMatrix::from_rows(labels(), labels(), &[vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    #[test]
    fn mutual_information_basics() {
        for l in 1..=4 {
            let id = build_fifo_matrix(l, l).unwrap();
            let mi = mutual_information(&InputDistribution::uniform(id.rows()), &id).unwrap();
            assert!((mi - l as f64).abs() < 1e-12);
        }
        let ch = build_fi_matrix(3, dp(0.4)).unwrap();
        for at in [0, 3, 7] {
            let mi = mutual_information(&InputDistribution::point_mass(8, at), &ch).unwrap();
            assert!(mi.abs() < 1e-12);
        }
        for d in [0.0, 0.3, 0.8] {
            let ch = build_fi_matrix(1, dp(d)).unwrap();
            let mi = mutual_information(&InputDistribution::uniform(2), &ch).unwrap();
            assert!((mi - (1.0 - d)).abs() < 1e-12);
        }
        assert!(mutual_information(&InputDistribution::uniform(3), &bsc(0.1)).is_err());
    }

    #[test]
    fn bsc_capacity() {
        for p in [0.0, 0.05, 0.11, 0.3, 0.5] {
            let res = blahut_arimoto(&bsc(p), 1e-10, DEFAULT_MAX_ITER, None).unwrap();
            let expected = 1.0 - binary_entropy(p).unwrap();
            assert!(res.converged);
            assert!((res.capacity - expected).abs() <= 1e-10, "p = {p}");
        }
    }

    #[test]
    fn erasure_capacity() {
        for d in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let res = blahut_arimoto(&build_fi_matrix(1, dp(d)).unwrap(), 1e-9, DEFAULT_MAX_ITER, None).unwrap();
            assert!((res.capacity - (1.0 - d)).abs() <= 1e-9);
            assert!((c_l(1, dp(d), 1e-9).unwrap() - (1.0 - d)).abs() <= 1e-9);
        }
    }

    #[test]
    fn noiseless_fi_capacity() {
        for l in 1..=5 {
            assert!((c_l(l, DeletionProb::ZERO, 1e-9).unwrap() - l as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn f_value_anchors() {
        for l in 1..=6 {
            assert_eq!(f_value(l, 0, 1e-9).unwrap(), 0.0);
            assert!((f_value(l, 1, 1e-9).unwrap() - 1.0).abs() <= 1e-9);
            assert!((f_value(l, l, 1e-9).unwrap() - l as f64).abs() <= 1e-9);
        }
    }

    #[test]
    fn lemma_one_at_two_bits() {
        // p(2,0) f(2,2) + p(2,1) f(2,1) + p(2,2) f(2,0) = 0.25*2 + 0.5*1 + 0
        assert!(c_l(2, dp(0.5), 1e-9).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn result_invariants() {
        let ch = build_fifo_matrix(5, 3).unwrap();
        let res = blahut_arimoto(&ch, 1e-9, DEFAULT_MAX_ITER, None).unwrap();
        assert!(res.converged && res.monotone);
        assert!(res.capacity >= 0.0);
        assert!(res.capacity <= (8f64).log2() + 1e-9);
        assert!(res.gap_bound >= 0.0 && res.gap_bound <= 1e-9);
        let achieved = mutual_information(&res.distribution, &ch).unwrap();
        assert!(achieved >= res.capacity - 1e-12);
        assert!(achieved <= res.capacity + 1e-9);
    }

    #[test]
    fn stops_at_iteration_cap() {
        let ch = build_fifo_matrix(5, 3).unwrap();
        let res = blahut_arimoto(&ch, 1e-15, 5, None).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 5);
        assert!(res.gap_bound > 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let ch = bsc(0.2);
        assert!(blahut_arimoto(&ch, 0.0, 10, None).is_err());
        assert!(blahut_arimoto(&ch, 1e-9, 10, Some(&InputDistribution::uniform(3))).is_err());
    }

    #[test]
    fn initialization_independence() {
        let ch = build_fifo_matrix(4, 2).unwrap();
        let tol = 1e-9;
        let base = blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, None).unwrap();
        for seed in 0..10 {
            let init = InputDistribution::random(ch.rows(), seed);
            let res = blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, Some(&init)).unwrap();
            assert!((res.capacity - base.capacity).abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn distribution_construction() {
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
        let loose = InputDistribution { probs: vec![1.0, 3.0] };
        assert_eq!(loose.renormalized().unwrap().probs(), &[0.25, 0.75]);
        let r = InputDistribution::random(16, 3);
        assert!(InputDistribution::new(r.probs().to_vec()).is_ok());
        assert_eq!(r, InputDistribution::random(16, 3));
    }

    #[test]
    fn cache_and_table_agree() {
        let cache = FCache::new(1e-9, MatrixCaps::default());
        let table = cache.table(4).unwrap();
        assert_eq!(cache.len(), 14);
        let direct = FTable::compute(4, 1e-9, &MatrixCaps::default()).unwrap();
        assert_eq!(table, direct);
        assert!(table.has_level(4) && !table.has_level(5));
        assert!(matches!(table.value(5, 2), Err(Error::MissingFValue { l: 5, r: 2 })));
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("L,R,f,iterations,gap_bound\n1,0,0,0,0e0\n1,1,1,0,0e0\n"));
    }
}
