//! The `fibdc`, `simulate` and `matrix` commands.

use std::fmt;
use std::io::Write;
use std::path::Path;

use bdc_core::baa::{blahut_arimoto, c_l_run, DEFAULT_MAX_ITER};
use bdc_core::bitseq::deletion_count_prob;
use bdc_core::bounds::t_l;
use bdc_core::markov::{estimate_q, output_q, MarkovParams, QEstimate};
use bdc_core::{BaaResult, ChannelMatrix, DeletionProb, FEntry, FTable, MatrixCaps};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::format::sig12;

/// Lemma-1 slack below which the report flags a violation.
pub const LEMMA1_SLACK: f64 = -1e-9;

#[derive(Clone, Debug)]
pub struct FibdcReport {
    pub l: usize,
    pub d: DeletionProb,
    pub tol: f64,
    /// `f(L, R)` for `R = 0..=L`.
    pub f: Vec<FEntry>,
    pub c_l: BaaResult,
    pub t_l: f64,
    /// `sum_i p(L, i) f(L, L - i)`
    pub weighted_f: f64,
}

impl FibdcReport {
    /// `sum_i p(L, i) f(L, L - i) - C_L`, nonnegative up to solver tolerance.
    pub fn lemma1_gap(&self) -> f64 {
        self.weighted_f - self.c_l.capacity
    }

    pub fn lemma1_holds(&self) -> bool {
        self.lemma1_gap() >= LEMMA1_SLACK
    }
}

pub fn fibdc_report(l: usize, d: DeletionProb, tol: f64, caps: &MatrixCaps) -> CliResult<FibdcReport> {
    if l == 0 {
        return Err(CliError::Usage("L must be positive".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    let f = (0..=l)
        .into_par_iter()
        .map(|r| {
            let ch = caps.fifo_matrix(l, r)?;
            Ok(FEntry::from(&blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, None)?))
        })
        .collect::<bdc_core::Result<Vec<_>>>()?;
    let c_l = c_l_run(caps, l, d, tol)?;
    let mut table = FTable::new();
    for (r, e) in f.iter().enumerate() {
        table.insert(l, r, *e);
    }
    let mut weighted_f = 0.0;
    for i in 0..=l {
        weighted_f += deletion_count_prob(l, i, d)? * f[l - i].value;
    }
    Ok(FibdcReport {
        l,
        d,
        tol,
        t_l: t_l(l, d, &table)?,
        f,
        c_l,
        weighted_f,
    })
}

impl fmt::Display for FibdcReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.l;
        writeln!(out, "FI-BDC report: L = {l}, d = {}, tol = {:e}", sig12(self.d.value()), self.tol)?;
        writeln!(out)?;
        writeln!(out, "{:>3}  {:>16}  {:>10}  {:>10}  converged", "R", "f(L,R)", "iterations", "gap")?;
        for (r, e) in self.f.iter().enumerate() {
            writeln!(
                out,
                "{r:>3}  {:>16}  {:>10}  {:>10.3e}  {}",
                sig12(e.value),
                e.iterations,
                e.gap_bound,
                e.converged
            )?;
        }
        writeln!(out)?;
        let c = &self.c_l;
        writeln!(out, "C_{l}          = {}", sig12(c.capacity))?;
        writeln!(out, "  iterations  = {}", c.iterations)?;
        writeln!(out, "  gap         = {:.3e}", c.gap_bound)?;
        writeln!(out, "  converged   = {}", c.converged)?;
        writeln!(out, "  monotone    = {}", c.monotone)?;
        writeln!(out, "C_{l} / {l}      = {}", sig12(c.capacity / l as f64))?;
        writeln!(out, "T_{l}          = {}", sig12(self.t_l))?;
        writeln!(out, "sum p f      = {}", sig12(self.weighted_f))?;
        writeln!(out, "lemma 1 gap  = {}", sig12(self.lemma1_gap()))?;
        writeln!(out, "lemma 1      = {}", if self.lemma1_holds() { "ok" } else { "VIOLATED" })
    }
}

/// `|z|` above which `simulate` exits with a failure.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Clone, Debug)]
pub struct SimulateReport {
    pub gamma: f64,
    pub d: DeletionProb,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub q_analytic: f64,
    pub estimate: QEstimate,
}

impl SimulateReport {
    pub fn z_score(&self) -> f64 {
        self.estimate.z_score(self.q_analytic)
    }

    pub fn within_limit(&self) -> bool {
        self.z_score().abs() <= Z_LIMIT
    }
}

pub fn simulate(gamma: f64, d: DeletionProb, n: usize, trials: usize, seed: u64) -> CliResult<SimulateReport> {
    let params = MarkovParams::new(gamma)?;
    let estimate = estimate_q(params, d, n, trials, seed)?;
    Ok(SimulateReport {
        gamma,
        d,
        n,
        trials,
        seed,
        q_analytic: output_q(params, d),
        estimate,
    })
}

impl fmt::Display for SimulateReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "gamma      = {}", sig12(self.gamma))?;
        writeln!(out, "d          = {}", sig12(self.d.value()))?;
        writeln!(out, "n          = {}", self.n)?;
        writeln!(out, "trials     = {}", self.trials)?;
        writeln!(out, "seed       = {}", self.seed)?;
        writeln!(out, "pairs      = {}", self.estimate.pairs)?;
        writeln!(out, "q_analytic = {}", sig12(self.q_analytic))?;
        writeln!(out, "q_estimate = {}", sig12(self.estimate.estimate))?;
        writeln!(out, "std_err    = {}", sig12(self.estimate.std_err))?;
        writeln!(out, "z_score    = {}", sig12(self.z_score()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Fifo,
    Fi,
}

pub fn build_matrix(
    kind: MatrixKind,
    l: usize,
    r: Option<usize>,
    d: Option<DeletionProb>,
    caps: &MatrixCaps,
) -> CliResult<ChannelMatrix> {
    Ok(match kind {
        MatrixKind::Fifo => {
            let r = r.ok_or_else(|| CliError::Usage("fifo matrix needs --R".into()))?;
            caps.fifo_matrix(l, r)?
        }
        MatrixKind::Fi => {
            let d = d.ok_or_else(|| CliError::Usage("fi matrix needs --d".into()))?;
            caps.fi_matrix(l, d)?
        }
    })
}

pub fn write_matrix(ch: &ChannelMatrix, path: Option<&Path>) -> CliResult<()> {
    let mut buf = Vec::new();
    ch.write_csv(&mut buf).map_err(|e| CliError::io("<buffer>", e))?;
    match path {
        Some(p) => std::fs::write(p, &buf).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
