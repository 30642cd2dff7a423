//! Achievable-rate lower bounds for first-order Markov inputs.
//!
//! Both bounds are suprema over `t > 0` and `0 < γ < 1` of
//! `-t log2(e) - (1-d) · log2(M)`, where `q` is the stay probability of the
//! output process and
//!
//! ```text
//! A = (1-γ) e^-t / (1 - γ e^-t)
//! B = (1-γ)^2 e^-2t / (1 - γ e^-t) + γ e^-t
//! ```
//!
//! The arithmetic variant takes `M = (1-q) A + q B`; the geometric
//! block-length variant takes `M = A^(1-q) B^q`, which is never larger, so
//! its supremum dominates.
//!
//! The supremum is found by a 64 x 99 grid (log-spaced `t` in `[1e-4, 10]`,
//! `γ = 0.01, ..., 0.99`) followed by coordinate-wise golden-section
//! refinement in `(ln t, γ)`. Negative estimates are clamped to zero.

use crate::bitseq::DeletionProb;
use crate::optimize::{grid_refine_max, GridRefine, Maximum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkovLowerBound {
    /// `M = (1-q) A + q B`
    Arithmetic,
    /// `M = A^(1-q) B^q`
    Geometric,
}

/// Result of one supremum search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundFit {
    /// Clamped supremum estimate, in bits.
    pub value: f64,
    /// Unclamped objective at the maximizer.
    pub raw: f64,
    pub t: f64,
    pub gamma: f64,
    pub sweeps: usize,
}

pub const GRID_T: (f64, f64, usize) = (1e-4, 10.0, 64);
pub const GRID_GAMMA: (f64, f64, usize) = (0.01, 0.99, 99);
pub const REFINE_FTOL: f64 = 1e-12;

impl MarkovLowerBound {
    /// The objective inside the supremum.
    pub fn objective(self, d: f64, t: f64, gamma: f64) -> f64 {
        let q = 1.0 - (1.0 - gamma) / (1.0 + d * (1.0 - 2.0 * gamma));
        let e = (-t).exp();
        // 1 - γ e^-t without cancellation at small t
        let damp = (1.0 - gamma) - gamma * (-t).exp_m1();
        let a = (1.0 - gamma) * e / damp;
        let b = (1.0 - gamma) * (1.0 - gamma) * e * e / damp + gamma * e;
        let log2_m = match self {
            MarkovLowerBound::Arithmetic => ((1.0 - q) * a + q * b).log2(),
            MarkovLowerBound::Geometric => (1.0 - q) * a.log2() + q * b.log2(),
        };
        -t * std::f64::consts::LOG2_E - (1.0 - d) * log2_m
    }

    pub fn fit(self, d: DeletionProb) -> LowerBoundFit {
        if d.value() >= 1.0 {
            return LowerBoundFit {
                value: 0.0,
                raw: 0.0,
                t: f64::NAN,
                gamma: f64::NAN,
                sweeps: 0,
            };
        }
        let dv = d.value();
        let (t_lo, t_hi, nt) = GRID_T;
        let (g_lo, g_hi, ng) = GRID_GAMMA;
        let cfg = GridRefine {
            grid_x: linspace(t_lo.ln(), t_hi.ln(), nt),
            grid_y: linspace(g_lo, g_hi, ng),
            bounds_x: (1e-12f64.ln(), 60f64.ln()),
            bounds_y: (1e-9, 1.0 - 1e-9),
            ftol: REFINE_FTOL,
            max_sweeps: 10_000,
        };
        let objective = |log_t: f64, gamma: f64| {
            let v = self.objective(dv, log_t.exp(), gamma);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        };
        let Maximum { x, y, value, sweeps } = grid_refine_max(objective, &cfg);
        LowerBoundFit {
            value: value.max(0.0),
            raw: value,
            t: x.exp(),
            gamma: y,
            sweeps,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Lower bound with the arithmetic mixture `(1-q) A + q B`.
pub fn dg_lower_bound(d: DeletionProb) -> f64 {
    MarkovLowerBound::Arithmetic.fit(d).value
}

/// Lower bound for geometric block lengths, `A^(1-q) B^q`.
pub fn dm_lower_bound(d: DeletionProb) -> f64 {
    MarkovLowerBound::Geometric.fit(d).value
}
