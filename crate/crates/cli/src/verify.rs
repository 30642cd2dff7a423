//! The `verify` command: every machine-checkable invariant, one table row
//! per check.

use std::fmt;
use std::time::Instant;

use bdc_core::baa::{blahut_arimoto, c_l, InputDistribution, DEFAULT_MAX_ITER};
use bdc_core::bitseq::{binomial, deletion_count_prob, sample_deletion, subsequence_count};
use bdc_core::bounds::{
    c2bit_closed_form, c4_bound, c4_direct, cascade_bsc_bec, dg_lower_bound, dm_lower_bound, optimal_2bit_dist,
    t_l, theorem1_bound, theorem2_bound,
};
use bdc_core::entropy::binary_entropy;
use bdc_core::markov::{
    first_bit_match_enumerated, first_bit_match_prob, first_bit_mi, output_q, BlockLength, MarkovParams,
};
use bdc_core::rng::{derive_seed, seeded_rng};
use bdc_core::{BitString, DeletionProb, FTable, MatrixCaps};
use rand::Rng;
use rayon::prelude::*;

use crate::format::sig12;

/// Slack allowed on inequalities between BAA outputs.
pub const INEQ_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub l_max: usize,
    pub tol: f64,
    pub seed: u64,
    /// `(L, R, value)` written into the f-table after it is computed.
    pub f_overrides: Vec<(usize, usize, f64)>,
}

impl VerifyOptions {
    pub fn new(l_max: usize, tol: f64, seed: u64) -> Self {
        Self {
            l_max,
            tol,
            seed,
            f_overrides: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    /// `Err` holds the first counterexample.
    pub outcome: Result<String, String>,
    pub seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let (tag, detail) = match &c.outcome {
                Ok(s) => ("PASS", s),
                Err(s) => ("FAIL", s),
            };
            writeln!(out, "{tag}  {:<width$}  {:>7.2}s  {detail}", c.name, c.seconds)?;
        }
        let failed = self.failed();
        if failed.is_empty() {
            writeln!(out, "all {} checks passed", self.checks.len())
        } else {
            writeln!(out, "{} of {} checks failed: {}", failed.len(), self.checks.len(), failed.join(", "))
        }
    }
}

type Check = Result<String, String>;

fn dp(d: f64) -> DeletionProb {
    DeletionProb::new(d).expect("grid value in [0, 1]")
}

fn tenths() -> Vec<DeletionProb> {
    (1..=9).map(|i| dp(i as f64 / 10.0)).collect()
}

fn core_err(e: bdc_core::Error) -> String {
    e.to_string()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_counts() -> Check {
    let x: BitString = "10101010".parse().map_err(core_err)?;
    for (y, want) in [("10011", 1), ("10101", 6)] {
        let got = subsequence_count(&x, &y.parse().map_err(core_err)?).map_err(core_err)?;
        ensure(got == want, || format!("E({y}, 10101010) = {got}, expected {want}"))?;
    }
    for n in 0..=8 {
        for x in BitString::all_of_length(n) {
            for r in 0..=n {
                let mut total = 0u64;
                for y in BitString::all_of_length(r) {
                    total += subsequence_count(&x, &y).map_err(core_err)?;
                }
                ensure(total as f64 == binomial(n, r), || format!("counts of x = {x}, R = {r} sum to {total}"))?;
            }
        }
    }
    Ok("worked examples; sum over outputs = C(n, R) for n <= 8".into())
}

fn check_matrices(l_max: usize, caps: &MatrixCaps) -> Check {
    let mut grid = vec![DeletionProb::ZERO];
    grid.extend(tenths());
    grid.push(DeletionProb::ONE);
    for l in 1..=l_max.min(caps.fi_max_len) {
        let fifo: Vec<_> = (0..=l)
            .map(|r| caps.fifo_matrix(l, r))
            .collect::<bdc_core::Result<_>>()
            .map_err(core_err)?;
        for &d in &grid {
            let fi = caps.fi_matrix(l, d).map_err(core_err)?;
            fi.check_stochastic().map_err(core_err)?;
            for (i, x) in fi.input_labels().iter().enumerate() {
                if d.value() == 0.0 {
                    ensure(fi.prob(x, x) == 1.0, || format!("L = {l}: d = 0 is not the identity at {x}"))?;
                }
                for (j, y) in fi.output_labels().iter().enumerate() {
                    let m = y.len();
                    let want = deletion_count_prob(l, l - m, d).map_err(core_err)? * fifo[m].prob(x, y);
                    let got = fi.get(i, j);
                    ensure((got - want).abs() <= 1e-12, || {
                        format!("L = {l}, d = {}: FI({x}, {y}) = {got}, block form {want}", d.value())
                    })?;
                }
            }
        }
    }
    Ok(format!("FI rows stochastic and FI = p(L, L-m) FIFO blockwise for L <= {l_max}"))
}

fn check_erasure(tol: f64, caps: &MatrixCaps) -> Check {
    for i in 0..=10 {
        let d = dp(i as f64 / 10.0);
        let r = blahut_arimoto(&caps.fi_matrix(1, d).map_err(core_err)?, tol, DEFAULT_MAX_ITER, None)
            .map_err(core_err)?;
        ensure((r.capacity - d.keep()).abs() <= 1e-6, || {
            format!("d = {}: C_1 = {}, expected {}", d.value(), r.capacity, d.keep())
        })?;
    }
    Ok("C_1 = 1 - d for d = 0, 0.1, ..., 1".into())
}

fn check_two_bit(tol: f64, caps: &MatrixCaps) -> Check {
    let mut worst = 0.0f64;
    for i in 1..=19 {
        let d = dp(i as f64 * 0.05);
        let r = blahut_arimoto(&caps.fi_matrix(2, d).map_err(core_err)?, tol.min(1e-10), DEFAULT_MAX_ITER, None)
            .map_err(core_err)?;
        let closed = c2bit_closed_form(d);
        worst = worst.max((r.capacity - closed).abs());
        ensure((r.capacity - closed).abs() <= 1e-6, || {
            format!("d = {}: BAA {} vs closed form {closed}", d.value(), r.capacity)
        })?;
        let opt = optimal_2bit_dist(d);
        for (k, (got, want)) in r.distribution.probs().iter().zip(opt.as_array()).enumerate() {
            ensure((got - want).abs() <= 1e-4, || format!("d = {}: p{k} = {got}, expected {want}", d.value()))?;
        }
        ensure(theorem1_bound(d) == closed / 2.0, || format!("d = {}: c1 is not half the 2-bit capacity", d.value()))?;
        let ratio = (2.0 * d.value() / d.keep()).exp2();
        ensure((opt.p0 - ratio * opt.p1).abs() <= 1e-12 * opt.p0.max(1.0), || {
            format!("d = {}: p0 != 2^(2d/(1-d)) p1", d.value())
        })?;
    }
    Ok(format!("max |BAA - closed form| = {worst:.2e} over d = 0.05..0.95"))
}

fn check_anchors(f: &FTable, l_max: usize) -> Check {
    for l in 1..=l_max {
        let get = |r| f.value(l, r).map_err(core_err);
        ensure(get(0)? == 0.0, || format!("f({l},0) = {}", f.get(l, 0).unwrap_or(f64::NAN)))?;
        let one = get(1)?;
        ensure((one - 1.0).abs() <= 1e-8, || format!("f({l},1) = {one}"))?;
        let top = get(l)?;
        ensure((top - l as f64).abs() <= 1e-6, || format!("f({l},{l}) = {top}"))?;
        for r in 0..=l {
            let v = get(r)?;
            ensure((0.0..=r as f64).contains(&v), || format!("f({l},{r}) = {v} outside [0, {r}]"))?;
        }
    }
    Ok(format!("f(L,0) = 0, f(L,1) = 1, f(L,L) = L, 0 <= f <= R for L <= {l_max}"))
}

fn check_lemma1(f: &FTable, l_max: usize, tol: f64) -> Check {
    let cases: Vec<(usize, DeletionProb)> = (1..=l_max).flat_map(|l| tenths().into_iter().map(move |d| (l, d))).collect();
    let gaps = cases
        .par_iter()
        .map(|&(l, d)| {
            let cap = c_l(l, d, tol)?;
            let mut rhs = 0.0;
            for i in 0..=l {
                rhs += deletion_count_prob(l, i, d)? * f.value(l, l - i)?;
            }
            Ok((l, d, rhs - cap))
        })
        .collect::<bdc_core::Result<Vec<_>>>()
        .map_err(core_err)?;
    let mut min_gap = f64::INFINITY;
    for (l, d, gap) in gaps {
        ensure(gap >= -INEQ_SLACK, || format!("L = {l}, d = {}: C_L exceeds sum p f by {}", d.value(), -gap))?;
        min_gap = min_gap.min(gap);
    }
    Ok(format!("C_L <= sum_i p(L,i) f(L,L-i), min slack {min_gap:.2e}"))
}

fn check_one_step(f: &FTable, l_max: usize) -> Check {
    let mut min_slack = f64::INFINITY;
    for l in 1..l_max {
        for i in 0..=l + 1 {
            let lhs = f.value(l + 1, l + 1 - i).map_err(core_err)?;
            let w = i as f64 / (l + 1) as f64;
            let deleted = if i >= 1 { f.value(l, l + 1 - i).map_err(core_err)? } else { 0.0 };
            let kept = if i <= l { 1.0 + f.value(l, l - i).map_err(core_err)? } else { 0.0 };
            let slack = w * deleted + (1.0 - w) * kept - lhs;
            ensure(slack >= -INEQ_SLACK, || format!("L = {l}, i = {i}: slack {slack}"))?;
            min_slack = min_slack.min(slack);
        }
    }
    Ok(format!(
        "f(L+1,L+1-i) <= (i/(L+1)) f(L,L+1-i) + (1 - i/(L+1))(1 + f(L,L-i)), min slack {min_slack:.2e}"
    ))
}

fn t_values(f: &FTable, l_max: usize, d: DeletionProb) -> Result<Vec<f64>, String> {
    (1..=l_max).map(|l| t_l(l, d, f).map_err(core_err)).collect()
}

fn check_lemma2(f: &FTable, l_max: usize) -> Check {
    for d in tenths() {
        let t = t_values(f, l_max, d)?;
        for l in 1..l_max {
            let lhs = (l + 1) as f64 * t[l];
            let rhs = l as f64 * t[l - 1] + d.keep();
            ensure(lhs <= rhs + INEQ_SLACK, || format!("L = {l}, d = {}: {lhs} > {rhs}", d.value()))?;
        }
    }
    Ok(format!("(L+1) T_(L+1) <= L T_L + 1 - d for L < {l_max}"))
}

fn check_monotone_t(f: &FTable, l_max: usize) -> Check {
    for d in tenths() {
        let t = t_values(f, l_max, d)?;
        for l in 1..l_max {
            ensure(t[l] <= t[l - 1] + INEQ_SLACK, || {
                format!("d = {}: T_{} = {} > T_{l} = {}", d.value(), l + 1, t[l], t[l - 1])
            })?;
        }
    }
    Ok(format!("T_1 >= T_2 >= ... >= T_{l_max}"))
}

fn check_entropy_identity(seed: u64) -> Check {
    let mut rng = seeded_rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let f: f64 = rng.gen_range(-20.0..=20.0);
        let p = 1.0 / (1.0 + f.exp2());
        let lhs = binary_entropy(p).map_err(core_err)? - f * p;
        let rhs = (-f).exp2().ln_1p() / std::f64::consts::LN_2;
        worst = worst.max((lhs - rhs).abs());
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("H(p) - f p = log2(1 + 2^-f), max deviation {worst:.2e} over 1e4 draws"))
}

fn check_theorem2_family() -> Check {
    for i in 0..=1000 {
        let d = dp(i as f64 / 1000.0);
        let c4 = c4_bound(d);
        ensure((c4 - c4_direct(d)).abs() <= 1e-12, || format!("d = {}: c4 forms differ", d.value()))?;
        if i > 0 {
            let prev = c4_bound(dp((i - 1) as f64 / 1000.0));
            ensure(c4 <= prev, || format!("c4 increases at d = {}", d.value()))?;
        }
    }
    for d in (0..=20).map(|i| dp(i as f64 / 20.0)) {
        for gamma in (0..=20).map(|j| 0.5 + j as f64 / 40.0) {
            let t2 = theorem2_bound(d, gamma).map_err(core_err)?;
            ensure(t2 <= d.keep() + 1e-15, || format!("d = {}, g = {gamma}: {t2} > 1 - d", d.value()))?;
            let dv = d.value();
            let denom = 1.0 + dv * (1.0 - 2.0 * gamma);
            // at d = g = 1 nothing survives and the flip probability is taken as 0
            let flip = if denom > 0.0 { dv * (1.0 - gamma) / denom } else { 0.0 };
            let cascade = cascade_bsc_bec(flip, dv).map_err(core_err)?;
            ensure((t2 - cascade).abs() <= 1e-12, || format!("d = {dv}, g = {gamma}: cascade form differs"))?;
            let params = MarkovParams::new(gamma).map_err(core_err)?;
            let mi = first_bit_mi(params, d).map_err(core_err)?;
            ensure((t2 - d.keep() * mi).abs() <= 1e-12, || format!("d = {dv}, g = {gamma}: first-bit form differs"))?;
        }
    }
    Ok("c4 forms agree and decrease; theorem2 <= 1 - d and matches cascade and first-bit forms".into())
}

fn check_first_bit() -> Check {
    let mut worst = 0.0f64;
    for gamma in [0.3, 0.5, 0.8] {
        let params = MarkovParams::new(gamma).map_err(core_err)?;
        for d in [dp(0.2), dp(0.5)] {
            for n in 1..=12 {
                let closed = first_bit_match_prob(params, d, BlockLength::Finite(n)).map_err(core_err)?;
                let brute = first_bit_match_enumerated(params, d, n).map_err(core_err)?;
                worst = worst.max((closed - brute).abs());
            }
            let far = first_bit_match_prob(params, d, BlockLength::Finite(2000)).map_err(core_err)?;
            let limit = first_bit_match_prob(params, d, BlockLength::Infinite).map_err(core_err)?;
            let limit_q = 1.0 - d.value() * (1.0 - gamma) / (1.0 + d.value() * (1.0 - 2.0 * gamma));
            ensure((far - limit).abs() <= 1e-12 && (limit - limit_q).abs() <= 1e-15, || {
                format!("g = {gamma}, d = {}: limit {limit}, n = 2000 gives {far}", d.value())
            })?;
        }
    }
    ensure(worst <= 1e-10, || format!("closed form vs enumeration differs by {worst:e}"))?;
    Ok(format!("closed form = enumeration for n <= 12 (max diff {worst:.1e}); limit = 1 - flip"))
}

fn check_monte_carlo(seed: u64, trials: usize) -> Check {
    let cases: Vec<(f64, f64)> = (1..=9)
        .flat_map(|g| (1..=9).map(move |d| (g as f64 / 10.0, d as f64 / 10.0)))
        .collect();
    let mut worst = 0.0f64;
    for (k, (gamma, d)) in cases.into_iter().enumerate() {
        let params = MarkovParams::new(gamma).map_err(core_err)?;
        let est = bdc_core::markov::estimate_q(params, dp(d), 100_000, trials, derive_seed(seed, k as u64))
            .map_err(core_err)?;
        let z = est.z_score(output_q(params, dp(d)));
        worst = worst.max(z.abs());
        ensure(z.abs() <= 4.0, || format!("g = {gamma}, d = {d}: z = {z}"))?;
    }
    Ok(format!("81 (g, d) points, n = 1e5, {trials} trials, max |z| = {worst:.2}"))
}

fn check_cross_family(f: &FTable, l_max: usize) -> Check {
    let grid: Vec<DeletionProb> = (1..=19).map(|i| dp(i as f64 * 0.05)).collect();
    let rows = grid
        .par_iter()
        .map(|&d| {
            let dg = dg_lower_bound(d);
            let dm = dm_lower_bound(d);
            let mut upper = theorem1_bound(d).min(c4_bound(d)).min(d.keep());
            for l in 1..=l_max {
                upper = upper.min(t_l(l, d, f)?);
            }
            Ok((d, dg, dm, upper))
        })
        .collect::<bdc_core::Result<Vec<_>>>()
        .map_err(core_err)?;
    let mut min_margin = f64::INFINITY;
    for (d, dg, dm, upper) in rows {
        let lower = dg.max(dm);
        ensure(lower <= upper + 1e-6, || format!("d = {}: lower {lower} > upper {upper}", d.value()))?;
        ensure(dm >= dg - 1e-7, || format!("d = {}: dm {dm} < dg {dg}", d.value()))?;
        min_margin = min_margin.min(upper - lower);
    }
    Ok(format!("max(dg, dm) <= min upper bound, min margin {}; dm >= dg", sig12(min_margin)))
}

fn check_solver(tol: f64, seed: u64, l_max: usize, caps: &MatrixCaps) -> Check {
    let l = l_max.clamp(2, 5);
    let ch = caps.fifo_matrix(l, l / 2 + 1).map_err(core_err)?;
    let base = blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, None).map_err(core_err)?;
    ensure(base.converged && base.monotone, || "uniform start did not converge monotonically".into())?;
    for k in 0..5 {
        let init = InputDistribution::random(ch.rows(), derive_seed(seed, k));
        let r = blahut_arimoto(&ch, tol, DEFAULT_MAX_ITER, Some(&init)).map_err(core_err)?;
        ensure(r.monotone && (r.capacity - base.capacity).abs() <= 10.0 * tol, || {
            format!("start {k}: {} vs {}", r.capacity, base.capacity)
        })?;
    }
    let x: BitString = (0..64).map(|i| i % 3 == 0).collect();
    ensure(sample_deletion(&x, dp(0.4), seed) == sample_deletion(&x, dp(0.4), seed), || {
        "deletion sampling is not reproducible".into()
    })?;
    Ok(format!("FIFO({l},{}) capacity independent of start; sampling reproducible", l / 2 + 1))
}

/// Runs every check. The f-table covers `L <= l_max`; checks that need one
/// more level use the levels available.
pub fn run_verify(opts: &VerifyOptions, caps: &MatrixCaps) -> Result<VerifyReport, bdc_core::Error> {
    let mut f = FTable::compute(opts.l_max, opts.tol, caps)?;
    for &(l, r, v) in &opts.f_overrides {
        f.set_value(l, r, v);
    }
    let (l_max, tol, seed) = (opts.l_max, opts.tol, opts.seed);
    let mc_trials = if l_max <= 3 { 5 } else { 20 };

    let mut checks = Vec::new();
    let mut run = |name: &'static str, check: &dyn Fn() -> Check| {
        let start = Instant::now();
        let outcome = check();
        checks.push(CheckResult {
            name,
            outcome,
            seconds: start.elapsed().as_secs_f64(),
        });
    };
    run("subsequence counts", &check_counts);
    run("channel matrices", &|| check_matrices(l_max, caps));
    run("erasure capacity", &|| check_erasure(tol, caps));
    run("2-bit closed form", &|| check_two_bit(tol, caps));
    run("solver behaviour", &|| check_solver(tol, seed, l_max, caps));
    run("f anchors", &|| check_anchors(&f, l_max));
    run("lemma 1", &|| check_lemma1(&f, l_max, tol));
    run("one-step f inequality", &|| check_one_step(&f, l_max));
    run("lemma 2", &|| check_lemma2(&f, l_max));
    run("T_L nonincreasing", &|| check_monotone_t(&f, l_max));
    run("entropy identity", &|| check_entropy_identity(seed));
    run("theorem 2 family", &check_theorem2_family);
    run("first-bit match", &check_first_bit);
    run("output stay probability", &|| check_monte_carlo(seed, mc_trials));
    run("bound families", &|| check_cross_family(&f, l_max));
    Ok(VerifyReport { checks })
}
