//! Run configuration: defaults, a plain `key = value` file, then flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bdc_core::{DeletionProb, MatrixCaps};

use crate::error::{CliError, CliResult};

/// Column groups `bounds` can export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundId {
    C1,
    C2,
    C3,
    C4,
    Theorem2,
    Tl,
    Lemma2,
    Erasure,
    RahmatiDuman,
    OneMinusH,
    DgLower,
    DmLower,
}

impl BoundId {
    pub const ALL: [BoundId; 12] = [
        BoundId::C1,
        BoundId::C2,
        BoundId::C3,
        BoundId::C4,
        BoundId::Theorem2,
        BoundId::Tl,
        BoundId::Lemma2,
        BoundId::Erasure,
        BoundId::RahmatiDuman,
        BoundId::OneMinusH,
        BoundId::DgLower,
        BoundId::DmLower,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::C1 => "c1",
            BoundId::C2 => "c2",
            BoundId::C3 => "c3",
            BoundId::C4 => "c4",
            BoundId::Theorem2 => "theorem2",
            BoundId::Tl => "tl",
            BoundId::Lemma2 => "lemma2",
            BoundId::Erasure => "erasure",
            BoundId::RahmatiDuman => "rahmati_duman",
            BoundId::OneMinusH => "one_minus_h",
            BoundId::DgLower => "dg_lower",
            BoundId::DmLower => "dm_lower",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = BoundId::ALL.iter().map(|id| id.as_str()).collect();
                CliError::Usage(format!("unknown bound '{s}' (known: {})", known.join(", ")))
            })
    }
}

pub fn parse_bound_list(s: &str) -> CliResult<Vec<BoundId>> {
    let ids = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(BoundId::from_str)
        .collect::<CliResult<Vec<_>>>()?;
    if ids.is_empty() {
        return Err(CliError::Usage("empty bound list".into()));
    }
    Ok(ids)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub d_step: f64,
    pub l_max: usize,
    pub tol: f64,
    pub seed: u64,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub selected_bounds: Vec<BoundId>,
    /// Stay probability for the `theorem2` column.
    pub gamma: f64,
    /// Recursion steps past `L_max` for the `lemma2` columns.
    pub lemma2_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d_min: 0.0,
            d_max: 1.0,
            d_step: 0.01,
            l_max: 6,
            tol: bdc_core::baa::DEFAULT_TOL,
            seed: 1,
            output_path: None,
            selected_bounds: vec![BoundId::C1, BoundId::C2, BoundId::C3, BoundId::C4],
            gamma: 0.75,
            lemma2_steps: 1,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{value}' for {key}")))
}

impl RunConfig {
    /// Sets one key. Keys match the long flag names, with `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "d_min" => self.d_min = parse_num(key, value)?,
            "d_max" => self.d_max = parse_num(key, value)?,
            "d_step" => self.d_step = parse_num(key, value)?,
            "L_max" | "l_max" => self.l_max = parse_num(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" | "output_path" => self.output_path = Some(PathBuf::from(value)),
            "bounds" | "selected_bounds" => self.selected_bounds = parse_bound_list(value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "lemma2_steps" => self.lemma2_steps = parse_num(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a config file body: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, text: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn validate(&self, caps: &MatrixCaps) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !(0.0 <= self.d_min && self.d_min < self.d_max && self.d_max <= 1.0) {
            return usage(format!("need 0 <= d_min < d_max <= 1, got {} and {}", self.d_min, self.d_max));
        }
        if !(self.d_step > 0.0 && self.d_step.is_finite()) {
            return usage(format!("d_step must be positive, got {}", self.d_step));
        }
        if self.l_max == 0 || self.l_max > caps.fifo_max_len {
            return usage(format!("L_max must lie in 1..={}, got {}", caps.fifo_max_len, self.l_max));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return usage(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return usage(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }

    /// `d_min + k d_step` for every `k` that stays at or below `d_max`,
    /// rounded to 12 decimals so that steps like 0.1 land on clean values.
    pub fn d_grid(&self) -> CliResult<Vec<DeletionProb>> {
        let n = ((self.d_max - self.d_min) / self.d_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                let d = ((self.d_min + k as f64 * self.d_step) * 1e12).round() / 1e12;
                Ok(DeletionProb::new(d.min(1.0))?)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_clean_values() {
        let cfg = RunConfig {
            d_step: 0.1,
            ..RunConfig::default()
        };
        let grid: Vec<f64> = cfg.d_grid().unwrap().iter().map(|d| d.value()).collect();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[3], 0.3);
        assert_eq!(grid[10], 1.0);

        let fig = RunConfig::default().d_grid().unwrap();
        assert_eq!(fig.len(), 101);
    }

    #[test]
    fn grid_stops_below_d_max() {
        let cfg = RunConfig {
            d_step: 0.3,
            ..RunConfig::default()
        };
        let grid: Vec<f64> = cfg.d_grid().unwrap().iter().map(|d| d.value()).collect();
        assert_eq!(grid, vec![0.0, 0.3, 0.6, 0.9]);
    }

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# sweep\nd_step = 0.05\nbounds = c1, dg_lower\nL_max=4\n\n").unwrap();
        assert_eq!(cfg.d_step, 0.05);
        assert_eq!(cfg.selected_bounds, vec![BoundId::C1, BoundId::DgLower]);
        assert_eq!(cfg.l_max, 4);
        cfg.set("d-step", "0.25").unwrap();
        assert_eq!(cfg.d_step, 0.25);
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.set("bounds", "c1,c9"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.set("colour", "red"), Err(CliError::Usage(_))));
        assert!(matches!(cfg.set("seed", "-1"), Err(CliError::Usage(_))));
        assert!(cfg.apply_file("d_min 0.1").is_err());

        let caps = MatrixCaps::default();
        for bad in [
            RunConfig { d_min: 0.5, d_max: 0.5, ..RunConfig::default() },
            RunConfig { d_max: 1.5, ..RunConfig::default() },
            RunConfig { d_step: 0.0, ..RunConfig::default() },
            RunConfig { l_max: 13, ..RunConfig::default() },
            RunConfig { gamma: 0.0, ..RunConfig::default() },
        ] {
            assert!(bad.validate(&caps).is_err(), "{bad:?}");
        }
        assert!(RunConfig::default().validate(&caps).is_ok());
    }
}
