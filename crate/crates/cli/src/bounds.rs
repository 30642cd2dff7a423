//! The `bounds` command: evaluate bound curves on a grid and write CSV.

use std::io::Write;

use bdc_core::bounds::{
    c4_bound, dg_lower_bound, dm_lower_bound, lemma2_extend, reference_bounds, t_l, theorem1_bound,
    theorem2_bound, BoundCurve, BoundKind,
};
use bdc_core::{DeletionProb, FTable, MatrixCaps};
use rayon::prelude::*;

use crate::config::{BoundId, RunConfig};
use crate::error::{CliError, CliResult};
use crate::format::sig12_or_na;

/// Stay probabilities of the fixed `theorem2` curves.
pub const C2_GAMMA: f64 = 0.51;
pub const C3_GAMMA: f64 = 0.99;

/// Slack for the upper-above-lower check.
pub const CROSS_TOL: f64 = 1e-6;

/// A computed curve plus the text that goes into the CSV header.
#[derive(Clone, Debug)]
pub struct Column {
    pub curve: BoundCurve,
    pub description: String,
}

type Eval<'a> = Box<dyn Fn(DeletionProb) -> bdc_core::Result<Option<f64>> + Sync + 'a>;

fn column(name: String, kind: BoundKind, description: String, grid: &[DeletionProb], f: Eval<'_>) -> CliResult<Column> {
    let values = grid.par_iter().map(|&d| f(d)).collect::<bdc_core::Result<Vec<_>>>()?;
    let curve = BoundCurve::new(name, kind, grid.to_vec(), values)?;
    Ok(Column { curve, description })
}

/// Evaluates every selected curve in config order. Grid points run in
/// parallel; output order does not depend on scheduling.
pub fn compute_columns(cfg: &RunConfig, caps: &MatrixCaps) -> CliResult<Vec<Column>> {
    cfg.validate(caps)?;
    let grid = cfg.d_grid()?;
    let needs_f = cfg
        .selected_bounds
        .iter()
        .any(|id| matches!(id, BoundId::Tl | BoundId::Lemma2));
    let f = if needs_f {
        FTable::compute(cfg.l_max, cfg.tol, caps)?
    } else {
        FTable::new()
    };
    let f = &f;
    let theorem2 = |gamma: f64| -> Eval<'static> { Box::new(move |d| theorem2_bound(d, gamma).map(Some)) };

    let mut out = Vec::new();
    let mut seen = Vec::new();
    for &id in &cfg.selected_bounds {
        if seen.contains(&id) {
            continue;
        }
        seen.push(id);
        let name = id.as_str().to_string();
        match id {
            BoundId::C1 => out.push(column(
                name,
                BoundKind::Upper,
                "half the 2-bit FI capacity, (1-d)^2 (1 + log2(1 + 2^(-2d/(1-d))))/2 + d(1-d)".into(),
                &grid,
                Box::new(|d| Ok(Some(theorem1_bound(d)))),
            )?),
            BoundId::C2 => out.push(column(
                name,
                BoundKind::Upper,
                format!("approximate, (1-d)(1 - H(d(1-g)/(1 + d(1-2g)))) at g = {C2_GAMMA}"),
                &grid,
                theorem2(C2_GAMMA),
            )?),
            BoundId::C3 => out.push(column(
                name,
                BoundKind::Upper,
                format!("approximate, (1-d)(1 - H(d(1-g)/(1 + d(1-2g)))) at g = {C3_GAMMA}"),
                &grid,
                theorem2(C3_GAMMA),
            )?),
            BoundId::C4 => out.push(column(
                name,
                BoundKind::Upper,
                "approximate, (1-d)(1 - H(d/(2(1+d)))), the g = (1+d)/2 case".into(),
                &grid,
                Box::new(|d| Ok(Some(c4_bound(d)))),
            )?),
            BoundId::Theorem2 => out.push(column(
                name,
                BoundKind::Upper,
                format!("approximate, (1-d)(1 - H(d(1-g)/(1 + d(1-2g)))) at g = {}", cfg.gamma),
                &grid,
                theorem2(cfg.gamma),
            )?),
            BoundId::Tl => {
                for l in 1..=cfg.l_max {
                    out.push(column(
                        format!("t{l}"),
                        BoundKind::Upper,
                        format!("(1/{l}) sum_i p({l},i) f({l},{l}-i), FIFO capacities at tol {:e}", cfg.tol),
                        &grid,
                        Box::new(move |d| t_l(l, d, f).map(Some)),
                    )?);
                }
            }
            BoundId::Lemma2 => {
                let l = cfg.l_max;
                for step in 1..=cfg.lemma2_steps {
                    let k = l + step;
                    out.push(column(
                        format!("lemma2_t{k}"),
                        BoundKind::Upper,
                        format!("U_(k+1) = (k U_k + 1 - d)/(k+1) iterated {step} time(s) from t{l}"),
                        &grid,
                        Box::new(move |d| Ok(Some(lemma2_extend(t_l(l, d, f)?, l, d, step)[step - 1]))),
                    )?);
                }
            }
            BoundId::Erasure => out.push(column(
                name,
                BoundKind::Upper,
                "erasure channel capacity, 1 - d".into(),
                &grid,
                Box::new(|d| Ok(Some(reference_bounds(d).erasure))),
            )?),
            BoundId::RahmatiDuman => out.push(column(
                name,
                BoundKind::Reference,
                "0.4143 (1-d), quoted for d >= 0.65".into(),
                &grid,
                Box::new(|d| Ok(reference_bounds(d).rahmati_duman)),
            )?),
            BoundId::OneMinusH => out.push(column(
                name,
                BoundKind::Reference,
                "1 - H(d), quoted for d < 0.5 with no direction".into(),
                &grid,
                Box::new(|d| Ok(reference_bounds(d).one_minus_h)),
            )?),
            BoundId::DgLower => out.push(column(
                name,
                BoundKind::Lower,
                "sup over t, g of -t log2(e) - (1-d) log2((1-q)A + qB), Markov(g) inputs".into(),
                &grid,
                Box::new(|d| Ok(Some(dg_lower_bound(d)))),
            )?),
            BoundId::DmLower => out.push(column(
                name,
                BoundKind::Lower,
                "sup over t, g of -t log2(e) - (1-d) log2(A^(1-q) B^q), geometric block lengths".into(),
                &grid,
                Box::new(|d| Ok(Some(dm_lower_bound(d)))),
            )?),
        }
    }
    Ok(out)
}

/// Names every `(upper, lower, d)` where a lower curve rises above an upper
/// one by more than [`CROSS_TOL`].
pub fn crossings(columns: &[Column]) -> Vec<String> {
    let of_kind = |k: BoundKind| columns.iter().filter(move |c| c.curve.kind() == k);
    let mut out = Vec::new();
    for up in of_kind(BoundKind::Upper) {
        for low in of_kind(BoundKind::Lower) {
            let pairs = up.curve.values().iter().zip(low.curve.values());
            for (i, (u, l)) in pairs.enumerate() {
                if let (Some(u), Some(l)) = (u, l) {
                    if *l > u + CROSS_TOL {
                        let d = up.curve.d_grid()[i].value();
                        out.push(format!("{} < {} at d = {d}", up.curve.name(), low.curve.name()));
                    }
                }
            }
        }
    }
    out
}

/// The command line that reproduces `cfg`, minus output path and thread count.
pub fn provenance(cfg: &RunConfig) -> String {
    let ids: Vec<&str> = cfg.selected_bounds.iter().map(|id| id.as_str()).collect();
    format!(
        "bdc bounds --bounds {} --d-min {} --d-max {} --d-step {} --L-max {} --tol {:e} --gamma {} --lemma2-steps {}",
        ids.join(","),
        cfg.d_min,
        cfg.d_max,
        cfg.d_step,
        cfg.l_max,
        cfg.tol,
        cfg.gamma,
        cfg.lemma2_steps,
    )
}

pub fn write_csv<W: Write>(cfg: &RunConfig, columns: &[Column], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# {}", provenance(cfg))?;
    for c in columns {
        writeln!(out, "# {} [{}]: {}", c.curve.name(), c.curve.kind().as_str(), c.description)?;
    }
    write!(out, "d")?;
    for c in columns {
        write!(out, ",{}", c.curve.name())?;
    }
    writeln!(out)?;
    let grid = cfg.d_grid().map_err(|e| std::io::Error::other(e.to_string()))?;
    for (i, d) in grid.iter().enumerate() {
        write!(out, "{}", sig12_or_na(Some(d.value())))?;
        for c in columns {
            write!(out, ",{}", sig12_or_na(c.curve.values()[i]))?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Computes, writes and cross-checks. Returns the curves on success; a
/// crossing is reported as a verification failure after the CSV is written.
pub fn cmd_bounds(cfg: &RunConfig, caps: &MatrixCaps) -> CliResult<Vec<Column>> {
    let columns = compute_columns(cfg, caps)?;
    let mut buf = Vec::new();
    write_csv(cfg, &columns, &mut buf).map_err(|e| CliError::io("<buffer>", e))?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::io(path.display().to_string(), e))?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    let crossed = crossings(&columns);
    if !crossed.is_empty() {
        return Err(CliError::Verify(format!("bound families cross: {}", crossed.join("; "))));
    }
    Ok(columns)
}
