//! Deterministic Monte Carlo cross-checks for every pricer.
//!
//! Sampling is reproducible bit-for-bit: a counter-based generator seeded per
//! fixed-size block, inverse-cdf normal transforms and antithetic pairs, all
//! single-threaded with a fixed reduction order. These estimators exist to
//! validate the semi-analytical models, not to be fast.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::analytics::normal::{bachelier, norm_inv_cdf};
use crate::bermudan::{lattice_solve, CoterminalSet};
use crate::canary::CanarySetup;
use crate::error::{PricingError, Result};
use crate::market::Annuity;
use crate::midcurve::{BasketWeights, MidcurveSetup};
use crate::relstrike::FixingVols;

/// Paths per generator block; each block reseeds the generator stream so the
/// estimate is independent of how work could be partitioned.
const BLOCK_PATHS: u64 = 65_536;

/// Monte Carlo request: number of antithetic path pairs and the seed.
#[derive(Debug, Clone, Copy)]
pub struct McSpec {
    pub paths: u64,
    pub seed: u64,
}

impl McSpec {
    pub fn new(paths: u64, seed: u64) -> Result<Self> {
        if paths == 0 {
            return Err(PricingError::Invalid("Monte Carlo needs at least one path".into()));
        }
        Ok(Self { paths, seed })
    }
}

/// Estimate and its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McResult {
    pub mean: f64,
    pub std_error: f64,
}

/// Expectation of `payoff` over `dim` iid standard normals, antithetic:
/// each path contributes the average of `payoff(e)` and `payoff(-e)`.
pub fn mc_expectation(
    dim: usize,
    spec: &McSpec,
    mut payoff: impl FnMut(&[f64]) -> f64,
) -> Result<McResult> {
    if dim == 0 {
        return Err(PricingError::Invalid("mc_expectation needs dim >= 1".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut e = vec![0.0_f64; dim];
    let mut neg = vec![0.0_f64; dim];
    let blocks = spec.paths.div_ceil(BLOCK_PATHS);
    for block in 0..blocks {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
        rng.set_stream(block + 1);
        let in_block = (spec.paths - block * BLOCK_PATHS).min(BLOCK_PATHS);
        for _ in 0..in_block {
            for slot in e.iter_mut() {
                let u: f64 = rng.random();
                *slot = norm_inv_cdf(u.clamp(1e-16, 1.0 - 1e-16));
            }
            for (n, x) in neg.iter_mut().zip(&e) {
                *n = -x;
            }
            let sample = 0.5 * (payoff(&e) + payoff(&neg));
            sum += sample;
            sum_sq += sample * sample;
        }
    }
    let n = spec.paths as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(McResult { mean, std_error: var.sqrt() })
}

/// Lower-triangular factor `L` with `L L^T = corr`. Falls back to a symmetric
/// eigen square root (negative eigenvalues clipped) when the matrix is only
/// semidefinite.
pub fn gaussian_factor(corr: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = corr.len();
    if n == 0 || corr.iter().any(|row| row.len() != n) {
        return Err(PricingError::Invalid("gaussian_factor needs a square matrix".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| corr[i][j]);
    if let Some(chol) = nalgebra::linalg::Cholesky::new(m.clone()) {
        return Ok(chol.l());
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    let mut scaled = eig.eigenvectors.clone();
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-8 {
            return Err(PricingError::Model(format!(
                "matrix is not positive semidefinite: eigenvalue {lambda}"
            )));
        }
        let s = lambda.max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    Ok(scaled)
}

/// Relative-strike swaption: simulate the fixing Z, set the strike at
/// Z + spread and exercise the option on X = Z + forward-vol noise.
pub fn mc_price_relative_strike(
    annuity: Annuity,
    spread: f64,
    omega: f64,
    vols: &FixingVols,
    vol_spread_mult: f64,
    spec: &McSpec,
) -> Result<McResult> {
    let fwd = vol_spread_mult * vols.forward_vol();
    let r = mc_expectation(2, spec, |e| {
        let x_minus_k = fwd * e[1] - spread;
        // the fixing level e[0] cancels from the payoff; keep it sampled so
        // the estimator exercises the same joint draw as the model setup
        let _ = vols.sigma_z * e[0];
        (omega * x_minus_k).max(0.0)
    })?;
    Ok(McResult { mean: annuity.value() * r.mean, std_error: annuity.value() * r.std_error })
}

/// Midcurve swaption: joint draw of the long and short rates.
pub fn mc_price_midcurve(
    setup: &MidcurveSetup,
    strike: f64,
    omega: f64,
    spec: &McSpec,
) -> Result<McResult> {
    let BasketWeights { a, b } = setup.weights;
    let rho = setup.rho_se;
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let r = mc_expectation(2, spec, |e| {
        let x = setup.long.mean + setup.long.stdev * e[0];
        let y = setup.short.mean + setup.short.stdev * (rho * e[0] + c * e[1]);
        (omega * (a * x - b * y - strike)).max(0.0)
    })?;
    let af = setup.fwd_annuity.value();
    Ok(McResult { mean: af * r.mean, std_error: af * r.std_error })
}

/// Canary swaption: draw (X1, Z), exercise at T1 when the immediate value
/// beats the exact conditional continuation, otherwise realize the T2 option
/// on X2 = Z + forward-vol noise.
pub fn mc_price_canary(
    setup: &CanarySetup,
    strike: f64,
    omega: f64,
    spec: &McSpec,
) -> Result<McResult> {
    let fwd_vol = setup.forward_vol();
    let rho = setup.rho_x1_z;
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let (a1, a2) = (setup.a1e.value(), setup.a2e.value());
    mc_expectation(3, spec, |e| {
        let x1 = setup.x1.mean + setup.x1.stdev * e[0];
        let z = setup.z.mean + setup.z.stdev * (rho * e[0] + c * e[1]);
        let exercise = a1 * omega * (x1 - strike);
        let cont = a2 * bachelier(z, strike, fwd_vol, omega).unwrap_or(f64::NAN);
        if exercise >= cont {
            exercise
        } else {
            let x2 = z + fwd_vol * e[2];
            a2 * (omega * (x2 - strike)).max(0.0)
        }
    })
}

/// Expectation of `max(max_i A_ie omega (X_i - K), 0)` by joint sampling of
/// the coterminal rates — the exact target that the Clark moment-matching
/// pricer approximates.
pub fn mc_price_bermudan_max_law(
    set: &CoterminalSet,
    strike: f64,
    omega: f64,
    spec: &McSpec,
) -> Result<McResult> {
    let n = set.exercises.len();
    let factor = gaussian_factor(&set.corr)?;
    mc_expectation(n, spec, |e| {
        let mut best = 0.0_f64;
        for i in 0..n {
            let mut g = 0.0;
            for (j, &ej) in e.iter().enumerate().take(i + 1) {
                g += factor[(i, j)] * ej;
            }
            let x = set.exercises[i].mean + set.exercises[i].sigma * g;
            let v = set.exercises[i].annuity.value() * omega * (x - strike);
            best = best.max(v);
        }
        best
    })
}

/// Bermudan value by simulating the exercise chain under the adjacent-pair
/// projection dynamics, stopping with the policy induced by the lattice's
/// continuation functions (computed on a `policy_points` grid).
pub fn mc_price_bermudan_chain(
    set: &CoterminalSet,
    strike: f64,
    omega: f64,
    spec: &McSpec,
    policy_points: usize,
) -> Result<McResult> {
    let n = set.exercises.len();
    let conts = lattice_solve(set, strike, omega, policy_points)?.continuations;
    mc_expectation(2 * n - 1, spec, |e| {
        let mut x = set.exercises[0].mean + set.exercises[0].sigma * e[0];
        for j in 0..n {
            let ex = &set.exercises[j];
            let immediate = omega * (x - strike);
            if j == n - 1 {
                return ex.annuity.value() * immediate.max(0.0);
            }
            let cont = conts[j].eval(x).max(0.0);
            if immediate >= cont && immediate > 0.0 {
                return ex.annuity.value() * immediate;
            }
            let pair = set.pair(j, j + 1);
            let next = &set.exercises[j + 1];
            let fwd_vol = (next.sigma * next.sigma - pair.sigma_z * pair.sigma_z).max(0.0).sqrt();
            let c = (1.0 - pair.rho_xz * pair.rho_xz).max(0.0).sqrt();
            let slope = if ex.sigma > 0.0 { pair.rho_xz * pair.sigma_z / ex.sigma } else { 0.0 };
            let z = next.mean + slope * (x - ex.mean) + pair.sigma_z * c * e[2 * j + 1];
            x = z + fwd_vol * e[2 * j + 2];
        }
        0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn estimator_is_deterministic() {
        let spec = McSpec::new(10_000, 42).unwrap();
        let a = mc_expectation(2, &spec, |e| e[0] * e[0] + e[1]).unwrap();
        let b = mc_expectation(2, &spec, |e| e[0] * e[0] + e[1]).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn antithetic_kills_odd_payoffs() {
        let spec = McSpec::new(1_000, 7).unwrap();
        let r = mc_expectation(1, &spec, |e| e[0]).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn second_moment_estimate() {
        let spec = McSpec::new(400_000, 11).unwrap();
        let r = mc_expectation(1, &spec, |e| e[0] * e[0]).unwrap();
        assert_relative_eq!(r.mean, 1.0, max_relative = 5e-3);
        assert!(r.std_error < 5e-3);
    }

    #[test]
    fn hockey_stick_matches_bachelier() {
        let spec = McSpec::new(2_000_000, 3).unwrap();
        let k = 0.01;
        let sigma = 0.02;
        let r = mc_expectation(1, &spec, |e| (sigma * e[0] - k).max(0.0)).unwrap();
        let exact = bachelier(0.0, k, sigma, 1.0).unwrap();
        assert!((r.mean - exact).abs() < 4.0 * r.std_error + 1e-6, "{} vs {exact}", r.mean);
    }

    #[test]
    fn factor_reproduces_correlation() {
        let corr = vec![vec![1.0, 0.8, 0.5], vec![0.8, 1.0, 0.7], vec![0.5, 0.7, 1.0]];
        let l = gaussian_factor(&corr).unwrap();
        let back = &l * l.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(back[(i, j)], corr[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn factor_handles_singular_matrix() {
        let corr = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let l = gaussian_factor(&corr).unwrap();
        let back = &l * l.transpose();
        assert_relative_eq!(back[(0, 1)], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn relative_strike_mc_matches_formula() {
        let vols = FixingVols::new(0.02, 0.012).unwrap();
        let spec = McSpec::new(2_000_000, 5).unwrap();
        let r = mc_price_relative_strike(Annuity(1.0), 0.005, 1.0, &vols, 1.0, &spec).unwrap();
        let exact = bachelier(0.0, 0.005, 0.016, 1.0).unwrap();
        assert!((r.mean - exact).abs() < 4.0 * r.std_error + 1e-7, "{} vs {exact}", r.mean);
    }
}
