//! Capacity bounds for the binary deletion channel.
//!
//! Upper bounds:
//! * `T_L`, the length-normalized deletion-weighted sum of FIFO capacities,
//!   and its one-step recursion [`lemma2_extend`].
//! * The 2-bit FI capacity in closed form and half of it ([`theorem1_bound`]).
//! * The first-bit BSC/BEC-style formula [`theorem2_bound`] and its
//!   linear-`γ` specialization [`c4_bound`].
//!
//! Lower bounds over first-order Markov inputs live in [`lower`].
//!
//! Limits at `d = 1`, where exponents like `2d / (1 - d)` diverge, are
//! returned explicitly instead of being evaluated.

pub mod lower;

use crate::baa::FTable;
use crate::bitseq::{deletion_count_prob, DeletionProb};
use crate::entropy::{binary_entropy, binary_entropy_unchecked};
use crate::error::{domain, Result};

pub use lower::{dg_lower_bound, dm_lower_bound};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Upper,
    Lower,
    Reference,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Reference => "reference",
        }
    }
}

/// A named bound sampled on a grid of deletion probabilities. `None` marks
/// grid points outside the curve's domain.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    name: String,
    kind: BoundKind,
    d_grid: Vec<DeletionProb>,
    values: Vec<Option<f64>>,
}

impl BoundCurve {
    pub fn new(name: impl Into<String>, kind: BoundKind, d_grid: Vec<DeletionProb>, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        if d_grid.len() != values.len() {
            return domain(format!(
                "curve {name}: {} grid points but {} values",
                d_grid.len(),
                values.len()
            ));
        }
        if d_grid.windows(2).any(|w| w[0].value() >= w[1].value()) {
            return domain(format!("curve {name}: grid is not strictly increasing"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return domain(format!("curve {name}: non-finite value"));
        }
        Ok(Self {
            name,
            kind,
            d_grid,
            values,
        })
    }

    /// Evaluates `f` at every grid point.
    pub fn evaluate<F>(name: impl Into<String>, kind: BoundKind, d_grid: &[DeletionProb], f: F) -> Result<Self>
    where
        F: Fn(DeletionProb) -> Result<Option<f64>>,
    {
        let values = d_grid.iter().map(|&d| f(d)).collect::<Result<Vec<_>>>()?;
        Self::new(name, kind, d_grid.to_vec(), values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn d_grid(&self) -> &[DeletionProb] {
        &self.d_grid
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// `T_L = (1/L) sum_i p(L, i) f(L, L - i)`.
pub fn t_l(l: usize, d: DeletionProb, f: &FTable) -> Result<f64> {
    if l == 0 {
        return domain("block length must be positive");
    }
    let mut acc = 0.0;
    for i in 0..=l {
        acc += deletion_count_prob(l, i, d)? * f.value(l, l - i)?;
    }
    Ok(acc / l as f64)
}

/// Iterates `U_{k+1} = (k U_k + 1 - d) / (k + 1)` from `U_L = T_L`, giving
/// upper bounds on `T_{L+1}, ..., T_{L+steps}`.
pub fn lemma2_extend(t_l_value: f64, l: usize, d: DeletionProb, steps: usize) -> Vec<f64> {
    let mut u = t_l_value;
    (l..l + steps)
        .map(|k| {
            u = (k as f64 * u + d.keep()) / (k + 1) as f64;
            u
        })
        .collect()
}

/// `2d / (1 - d)`; callers handle `d = 1` before reaching here.
fn skew_exponent(d: f64) -> f64 {
    2.0 * d / (1.0 - d)
}

/// Capacity of the 2-bit FI channel:
/// `(1-d)^2 (1 + log2(1 + 2^(-2d/(1-d)))) + 2d(1-d)`.
pub fn c2bit_closed_form(d: DeletionProb) -> f64 {
    let d = d.value();
    if d >= 1.0 {
        return 0.0;
    }
    let k = 1.0 - d;
    let tail = (-skew_exponent(d)).exp2().ln_1p() / std::f64::consts::LN_2;
    k * k * (1.0 + tail) + 2.0 * d * k
}

/// Input law on `00, 01, 10, 11` for the 2-bit channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoBitDistribution {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl TwoBitDistribution {
    /// Accepts only complement-symmetric laws: `p0 = p3`, `p1 = p2`, `p0 + p1 = 1/2`.
    pub fn new(p0: f64, p1: f64, p2: f64, p3: f64) -> Result<Self> {
        let tol = 1e-12;
        if [p0, p1, p2, p3].iter().any(|p| !(0.0..=1.0).contains(p)) {
            return domain("two-bit probabilities must lie in [0, 1]");
        }
        if (p0 + p1 + p2 + p3 - 1.0).abs() > tol {
            return domain("two-bit probabilities must sum to 1");
        }
        if (p0 - p3).abs() > tol || (p1 - p2).abs() > tol || (p0 + p1 - 0.5).abs() > tol {
            return domain("two-bit distribution is not complement symmetric");
        }
        Ok(Self { p0, p1, p2, p3 })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }
}

/// Capacity-achieving 2-bit input law: `p0 = 2^(2d/(1-d)) p1`, `p0 + p1 = 1/2`.
pub fn optimal_2bit_dist(d: DeletionProb) -> TwoBitDistribution {
    let d = d.value();
    if d >= 1.0 {
        return TwoBitDistribution {
            p0: 0.5,
            p1: 0.0,
            p2: 0.0,
            p3: 0.5,
        };
    }
    let a = skew_exponent(d);
    // written so that neither branch overflows for d close to 1
    let p0 = 0.5 / (1.0 + (-a).exp2());
    let p1 = 0.5 / (1.0 + a.exp2());
    TwoBitDistribution { p0, p1, p2: p1, p3: p0 }
}

/// Half the 2-bit FI capacity.
pub fn theorem1_bound(d: DeletionProb) -> f64 {
    c2bit_closed_form(d) / 2.0
}

/// Stay probability `2^(2d/(1-d)) / (1 + 2^(2d/(1-d)))` of the Markov input
/// matching the optimal 2-bit law.
pub fn gamma_star(d: DeletionProb) -> f64 {
    let d = d.value();
    if d >= 1.0 {
        return 1.0;
    }
    1.0 / (1.0 + (-skew_exponent(d)).exp2())
}

/// `d(1-γ) / (1 + d(1-2γ))`: probability that the first received bit differs
/// from the first sent bit under a Markov(γ) input. The `γ = d = 1` corner
/// takes its limit along `d`, which is 0.
pub(crate) fn first_bit_flip(d: f64, gamma: f64) -> f64 {
    let denom = 1.0 + d * (1.0 - 2.0 * gamma);
    if denom <= 0.0 {
        return 0.0;
    }
    d * (1.0 - gamma) / denom
}

/// `(1-d)(1 - H(d(1-γ) / (1 + d(1-2γ))))`.
pub fn theorem2_bound(d: DeletionProb, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return domain(format!("gamma {gamma} is outside (0, 1]"));
    }
    let flip = first_bit_flip(d.value(), gamma);
    Ok(d.keep() * (1.0 - binary_entropy(flip)?))
}

/// `γ = (1 + d) / 2`.
pub fn linear_gamma(d: DeletionProb) -> f64 {
    (1.0 + d.value()) / 2.0
}

/// [`theorem2_bound`] at `γ = (1 + d) / 2`.
pub fn c4_bound(d: DeletionProb) -> f64 {
    theorem2_bound(d, linear_gamma(d)).expect("linear gamma lies in [1/2, 1]")
}

/// `(1-d)(1 - H(d / (2(1+d))))`, the simplified form of [`c4_bound`].
pub fn c4_direct(d: DeletionProb) -> f64 {
    let dv = d.value();
    d.keep() * (1.0 - binary_entropy_unchecked(dv / (2.0 * (1.0 + dv))))
}

/// Bounds quoted from earlier work, each on its own domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceBounds {
    /// `1 - d` everywhere.
    pub erasure: f64,
    /// `0.4143 (1 - d)`, defined for `d >= 0.65`.
    pub rahmati_duman: Option<f64>,
    /// `1 - H(d)`, defined for `d < 0.5`.
    pub one_minus_h: Option<f64>,
}

pub fn reference_bounds(d: DeletionProb) -> ReferenceBounds {
    let dv = d.value();
    ReferenceBounds {
        erasure: d.keep(),
        rahmati_duman: (dv >= 0.65).then(|| 0.4143 * d.keep()),
        one_minus_h: (dv < 0.5).then(|| 1.0 - binary_entropy_unchecked(dv)),
    }
}

/// Capacity of a BSC(p) followed by a BEC(e): `(1-e)(1 - H(p))`.
pub fn cascade_bsc_bec(p: f64, e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return domain(format!("erasure probability {e} is outside [0, 1]"));
    }
    Ok((1.0 - e) * (1.0 - binary_entropy(p)?))
}
