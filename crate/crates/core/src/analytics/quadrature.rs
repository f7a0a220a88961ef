//! Composite Simpson quadrature and Gaussian integration helpers.

use crate::analytics::normal::{norm_cdf, norm_pdf};
use crate::error::{PricingError, Result};

/// Uniform grid for composite Simpson integration. `points` must be odd.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureGrid {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl QuadratureGrid {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(lower < upper) {
            return Err(PricingError::Invalid(format!(
                "quadrature grid needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        if points < 3 || points % 2 == 0 {
            return Err(PricingError::Invalid(format!(
                "Simpson grid needs an odd number of points >= 3, got {points}"
            )));
        }
        Ok(Self { lower, upper, points })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.points - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lower + i as f64 * self.step()
    }

    /// Simpson weight of node `i` in units of h/3.
    #[inline]
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.points - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    }

    /// Translates the grid so that `kink` coincides with an even-index node
    /// (a sub-panel boundary). Composite Simpson is then exact-order on each
    /// side of a derivative discontinuity at `kink`. No-op when the kink is
    /// outside the grid.
    pub fn snapped_to(&self, kink: f64) -> Self {
        let h = self.step();
        if kink <= self.lower + h || kink >= self.upper - h {
            return *self;
        }
        let mut idx = ((kink - self.lower) / h).round() as usize;
        if idx % 2 == 1 {
            idx += 1;
        }
        let shift = kink - self.node(idx);
        Self { lower: self.lower + shift, upper: self.upper + shift, points: self.points }
    }
}

/// Composite Simpson rule in one dimension.
pub fn simpson_1d(f: impl Fn(f64) -> f64, grid: &QuadratureGrid) -> f64 {
    let h = grid.step();
    let mut acc = 0.0;
    for i in 0..grid.points {
        acc += grid.weight(i) * f(grid.node(i));
    }
    acc * h / 3.0
}

/// Tensor-product composite Simpson rule in two dimensions.
pub fn simpson_2d(
    f: impl Fn(f64, f64) -> f64,
    grid_x: &QuadratureGrid,
    grid_y: &QuadratureGrid,
) -> f64 {
    let hy = grid_y.step();
    let mut acc = 0.0;
    for j in 0..grid_y.points {
        let y = grid_y.node(j);
        acc += grid_y.weight(j) * simpson_1d(|x| f(x, y), grid_x);
    }
    acc * hy / 3.0
}

/// Default number of quadrature nodes per axis.
pub const DEFAULT_NODES: usize = 201;
/// Default half-width of Gaussian integration domains, in standard deviations.
pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

/// Grid covering `mean +- DEFAULT_HALF_WIDTH * stdev`, optionally snapped so a
/// payoff kink sits on a sub-panel boundary.
pub fn gaussian_grid(mean: f64, stdev: f64, points: usize, kink: Option<f64>) -> Result<QuadratureGrid> {
    let w = DEFAULT_HALF_WIDTH * stdev;
    let grid = QuadratureGrid::new(mean - w, mean + w, points)?;
    Ok(match kink {
        Some(k) => grid.snapped_to(k),
        None => grid,
    })
}

/// Expectation of `f(X)` for `X ~ N(mean, stdev)` by Simpson over the grid,
/// weighting `f` by the normal density.
pub fn gaussian_expectation(
    f: impl Fn(f64) -> f64,
    mean: f64,
    stdev: f64,
    points: usize,
    kink: Option<f64>,
) -> Result<f64> {
    if stdev == 0.0 {
        return Ok(f(mean));
    }
    let grid = gaussian_grid(mean, stdev, points, kink)?;
    Ok(simpson_1d(|x| f(x) * norm_pdf((x - mean) / stdev) / stdev, &grid))
}

/// A piecewise-linear function on a strictly increasing grid, extended by
/// linear extrapolation with the edge slopes.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(PricingError::Invalid("piecewise-linear needs >= 2 matching nodes".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PricingError::Invalid("piecewise-linear grid must be strictly increasing".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(PricingError::Invalid("piecewise-linear values must be finite".into()));
        }
        Ok(Self { xs, ys })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let slope = (self.ys[1] - self.ys[0]) / (self.xs[1] - self.xs[0]);
            return self.ys[0] + slope * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            let slope = (self.ys[n - 1] - self.ys[n - 2]) / (self.xs[n - 1] - self.xs[n - 2]);
            return self.ys[n - 1] + slope * (x - self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + w * (self.ys[i + 1] - self.ys[i])
    }

    /// Exact `E[f(X)]` for `X ~ N(mean, stdev)` with `f` this piecewise-linear
    /// function (tails integrated against the extrapolated edge segments).
    ///
    /// Each segment `a + b x` contributes
    /// `a (Phi(u) - Phi(l)) + b [mean (Phi(u) - Phi(l)) - stdev (phi(u) - phi(l))]`
    /// in standardized coordinates.
    pub fn gaussian_expectation(&self, mean: f64, stdev: f64) -> f64 {
        if stdev == 0.0 {
            return self.eval(mean);
        }
        let n = self.xs.len();
        let std = |x: f64| (x - mean) / stdev;
        let mut acc = 0.0;
        let mut add_segment = |x0: f64, y0: f64, x1: f64, y1: f64, lo: f64, hi: f64| {
            // segment through (x0,y0)-(x1,y1) integrated over [lo, hi]
            let b = (y1 - y0) / (x1 - x0);
            let a = y0 - b * x0;
            let (l, u) = (std(lo), std(hi));
            let dphi_cap = norm_cdf(u) - norm_cdf(l);
            let dpdf = norm_pdf(u) - norm_pdf(l);
            acc += a * dphi_cap + b * (mean * dphi_cap - stdev * dpdf);
        };
        add_segment(self.xs[0], self.ys[0], self.xs[1], self.ys[1], f64::NEG_INFINITY, self.xs[0]);
        for i in 0..n - 1 {
            add_segment(self.xs[i], self.ys[i], self.xs[i + 1], self.ys[i + 1], self.xs[i], self.xs[i + 1]);
        }
        add_segment(
            self.xs[n - 2],
            self.ys[n - 2],
            self.xs[n - 1],
            self.ys[n - 1],
            self.xs[n - 1],
            f64::INFINITY,
        );
        acc
    }

    /// The piecewise-linear function `max(scale * f(x), floor)`, with a node
    /// inserted at every interior crossing so the maximum stays exact between
    /// the original nodes.
    pub fn scaled_floor(&self, scale: f64, floor: f64) -> Self {
        let n = self.xs.len();
        let mut xs = Vec::with_capacity(n + 4);
        let mut ys = Vec::with_capacity(n + 4);
        let push = |x: f64, y: f64, xs: &mut Vec<f64>, ys: &mut Vec<f64>| {
            if xs.last().is_none_or(|&last| x > last) {
                xs.push(x);
                ys.push(y);
            }
        };
        for i in 0..n {
            let yi = scale * self.ys[i];
            if i > 0 {
                let y_prev = scale * self.ys[i - 1];
                // Insert the crossing when the segment straddles the floor.
                if (y_prev - floor) * (yi - floor) < 0.0 {
                    let w = (floor - y_prev) / (yi - y_prev);
                    let x = self.xs[i - 1] + w * (self.xs[i] - self.xs[i - 1]);
                    push(x, floor, &mut xs, &mut ys);
                }
            }
            push(self.xs[i], yi.max(floor), &mut xs, &mut ys);
        }
        Self { xs, ys }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::normal::bachelier;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_constant() {
        let g = QuadratureGrid::new(0.0, 1.0, 3).unwrap();
        assert_relative_eq!(simpson_1d(|_| 1.0, &g), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let g = QuadratureGrid::new(0.0, 1.0, 3).unwrap();
        assert_relative_eq!(simpson_1d(|x| x * x * x, &g), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn simpson_2d_bivariate_normal_mass() {
        let g = QuadratureGrid::new(-8.0, 8.0, 201).unwrap();
        let total = simpson_2d(|x, y| norm_pdf(x) * norm_pdf(y), &g, &g);
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn simpson_fourth_order_convergence() {
        // Error ratio between a 2h grid and an h grid should sit near 16.
        let exact = 1.0 - (-1.0f64).exp();
        let f = |x: f64| (-x).exp();
        let coarse = simpson_1d(f, &QuadratureGrid::new(0.0, 1.0, 9).unwrap());
        let fine = simpson_1d(f, &QuadratureGrid::new(0.0, 1.0, 17).unwrap());
        let ratio = (coarse - exact).abs() / (fine - exact).abs();
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn even_points_rejected() {
        assert!(QuadratureGrid::new(0.0, 1.0, 4).is_err());
        assert!(QuadratureGrid::new(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn snapped_kink_lands_on_even_node() {
        let g = QuadratureGrid::new(-1.0, 1.0, 101).unwrap().snapped_to(0.0137);
        let h = g.step();
        let idx = ((0.0137 - g.lower) / h).round() as usize;
        assert_eq!(idx % 2, 0);
        assert_relative_eq!(g.node(idx), 0.0137, epsilon = 1e-12);
    }

    #[test]
    fn snapped_grid_integrates_kinked_payoff_sharply() {
        // E[(X - k)^+] for standard normal X equals the Bachelier call.
        let k = 0.3123456;
        let v = gaussian_expectation(|x| (x - k).max(0.0), 0.0, 1.0, 201, Some(k)).unwrap();
        assert_relative_eq!(v, bachelier(0.0, k, 1.0, 1.0).unwrap(), epsilon = 5e-7);
        // without snapping the kink ruins the Simpson order
        let raw = {
            let grid = gaussian_grid(0.0, 1.0, 201, None).unwrap();
            simpson_1d(|x| (x - k).max(0.0) * norm_pdf(x), &grid)
        };
        assert!((raw - bachelier(0.0, k, 1.0, 1.0).unwrap()).abs() > 1e-6);
    }

    #[test]
    fn piecewise_linear_gaussian_expectation_matches_bachelier() {
        // Hockey-stick payoff is exactly piecewise linear, so the segment-wise
        // Gaussian integration reproduces Bachelier to machine precision.
        let k = 0.0123;
        let xs: Vec<f64> = (0..=200).map(|i| -0.08 + 0.16 * i as f64 / 200.0).collect();
        let xs = {
            // place the kink on a node
            let mut xs = xs;
            let j = xs.iter().position(|&x| x > k).unwrap();
            xs[j] = k;
            xs
        };
        let ys: Vec<f64> = xs.iter().map(|&x| (x - k).max(0.0)).collect();
        let pl = PiecewiseLinear::new(xs, ys).unwrap();
        let v = pl.gaussian_expectation(0.004, 0.02);
        assert_relative_eq!(v, bachelier(0.004, k, 0.02, 1.0).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn piecewise_linear_extrapolates_with_edge_slopes() {
        let pl = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_relative_eq!(pl.eval(-1.0), -1.0, epsilon = 1e-15);
        assert_relative_eq!(pl.eval(3.0), 5.0, epsilon = 1e-15);
        assert_relative_eq!(pl.eval(1.5), 2.0, epsilon = 1e-15);
    }
}
