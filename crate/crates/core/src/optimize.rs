//! Derivative-free maximization: golden-section line search and a
//! grid-then-coordinate-refinement driver for two-parameter objectives.

/// `(sqrt(5) - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[a, b]`; returns `(x, f(x))` of the best
/// point seen once the bracket is narrower than `xtol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(a), f(b));
    [(a, fa), (c, fc), (d, fd), (b, fb)]
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .fold((a, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Search box and grid for [`grid_refine_max`], in the optimizer's own
/// coordinates.
#[derive(Clone, Debug)]
pub struct GridRefine {
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    pub bounds_x: (f64, f64),
    pub bounds_y: (f64, f64),
    /// Stop once a full sweep improves the objective by less than this.
    pub ftol: f64,
    pub max_sweeps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub sweeps: usize,
}

/// Exhaustive grid scan, then alternating golden-section searches along each
/// coordinate starting from the best grid point.
///
/// Each line search covers the current point plus or minus a half-width,
/// clipped to the bounds. The half-width starts at the grid spacing, shrinks
/// when the optimum lands inside the bracket and grows when it hits an edge.
pub fn grid_refine_max<F: Fn(f64, f64) -> f64>(f: F, cfg: &GridRefine) -> Maximum {
    let mut best = Maximum {
        x: cfg.grid_x[0],
        y: cfg.grid_y[0],
        value: f64::NEG_INFINITY,
        sweeps: 0,
    };
    for &x in &cfg.grid_x {
        for &y in &cfg.grid_y {
            let v = f(x, y);
            if v > best.value {
                best = Maximum { x, y, value: v, sweeps: 0 };
            }
        }
    }

    let (gx, gy) = (spacing(&cfg.grid_x), spacing(&cfg.grid_y));
    let (mut hx, mut hy) = (gx, gy);
    for sweep in 1..=cfg.max_sweeps {
        let start = best.value;

        let (lo, hi) = clip(best.x, hx, cfg.bounds_x);
        let (x, v) = golden_section_max(|x| f(x, best.y), lo, hi, (hi - lo) * 1e-9);
        if v > best.value {
            best.x = x;
            best.value = v;
        }
        hx = adapt(hx, x, lo, hi, cfg.bounds_x).max(gx * 1e-6);

        let (lo, hi) = clip(best.y, hy, cfg.bounds_y);
        let (y, v) = golden_section_max(|y| f(best.x, y), lo, hi, (hi - lo) * 1e-9);
        if v > best.value {
            best.y = y;
            best.value = v;
        }
        hy = adapt(hy, y, lo, hi, cfg.bounds_y).max(gy * 1e-6);

        best.sweeps = sweep;
        if best.value - start < cfg.ftol {
            break;
        }
    }
    best
}

fn spacing(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        1.0
    } else {
        (grid[grid.len() - 1] - grid[0]).abs() / (grid.len() - 1) as f64
    }
}

fn clip(center: f64, half: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    ((center - half).max(lo), (center + half).min(hi))
}

fn adapt(half: f64, at: f64, lo: f64, hi: f64, bounds: (f64, f64)) -> f64 {
    let edge = 1e-3 * (hi - lo);
    let hit_edge = (at - lo < edge && lo > bounds.0) || (hi - at < edge && hi < bounds.1);
    if hit_edge {
        half * 2.0
    } else {
        half * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 4.0, 1e-10);
        // flat peak: x is only resolved to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_section_monotone_goes_to_edge() {
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-10);
        assert!(x > 1.0 - 1e-9);
    }

    #[test]
    fn refinement_leaves_the_grid_box() {
        // peak at (2.5, -0.7): outside the grid box on x
        let f = |x: f64, y: f64| -(x - 2.5).powi(2) - 3.0 * (y + 0.7).powi(2) - 0.5 * (x - 2.5) * (y + 0.7);
        let cfg = GridRefine {
            grid_x: (0..11).map(|i| i as f64 * 0.2).collect(),
            grid_y: (0..11).map(|i| -1.0 + i as f64 * 0.2).collect(),
            bounds_x: (-10.0, 10.0),
            bounds_y: (-10.0, 10.0),
            ftol: 1e-12,
            max_sweeps: 2000,
        };
        let m = grid_refine_max(f, &cfg);
        assert!((m.x - 2.5).abs() < 1e-4, "{m:?}");
        assert!((m.y + 0.7).abs() < 1e-4, "{m:?}");
        assert!(m.value > -1e-8);
    }
}
