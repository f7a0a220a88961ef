//! Bermudan swaption pricing on a set of coterminal swap rates.
//!
//! Each exercise time T_i carries the rate X_i = R(T_i, T_i, T_e) with a
//! Gaussian marginal. Pairwise correlations follow from decomposing the
//! projected later rate Z_j = E[X_j | F_{T_i}] into the long [T_i, T_e] and
//! short [T_i, T_j] rates. Two pricers share this setup: a Clark
//! moment-matching approximation of `max_i A_ie omega (X_i - K), 0)` and a
//! backward-induction lattice that rolls the exercise boundary through the
//! projected rates with exact piecewise-linear Gaussian convolutions.

use crate::analytics::clark::clark_running_max;
use crate::analytics::corrmatrix::{validate_correlation_matrix, CorrelationRepairReport};
use crate::analytics::normal::{bachelier, NormalLaw};
use crate::analytics::quadrature::PiecewiseLinear;
use crate::canary::rho_x1_z;
use crate::error::{PricingError, Result};
use crate::market::{annuity, par_rate, Annuity, DiscountCurve, SwapSpec};
use crate::trades::{BermudanSwaption, PricingResult};
use crate::volsurface::{apply_convexity_shift, midcurve_vol_approx, CorrelationConfig, VolSurface};

/// Half-width of lattice grids in standard deviations.
const LATTICE_HALF_WIDTH: f64 = 8.0;
/// Frobenius repair distance above which pricing is refused.
const REPAIR_ERROR_THRESHOLD: f64 = 0.2;
/// Frobenius repair distance above which a warning is recorded.
const REPAIR_WARN_THRESHOLD: f64 = 0.05;

/// How pairwise coterminal correlations are assembled from the
/// decomposition identity `A_je Z_j = A_ie X_i - A_ij X_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrConvention {
    /// Law-of-cosines form:
    /// `rho_ij = (A_ie^2 s_i^2 + A_je^2 s_Zj^2 - A_ij^2 s_ij^2) / (2 A_ie A_je s_i s_Xj)`.
    #[default]
    LawOfCosines,
    /// Legacy normalization with denominator `2 A_ie A_ij s_Xj s_ij`.
    Legacy,
}

/// Pairwise correlation of (X_i, X_j), i < j, from the decomposition at T_i.
///
/// `sigma_i`, `sigma_ij`, `sigma_z` are absolute vols observed at T_i;
/// `sigma_xj` is the absolute vol of X_j observed at T_j.
#[allow(clippy::too_many_arguments)]
pub fn coterminal_corr(
    a_ie: Annuity,
    a_ij: Annuity,
    a_je: Annuity,
    sigma_i: f64,
    sigma_ij: f64,
    sigma_z: f64,
    sigma_xj: f64,
    convention: CorrConvention,
) -> Result<f64> {
    if sigma_i <= 0.0 || sigma_ij <= 0.0 || sigma_z <= 0.0 || sigma_xj <= 0.0 {
        return Err(PricingError::Domain("coterminal_corr needs positive vols".into()));
    }
    let num = a_ie.value() * a_ie.value() * sigma_i * sigma_i
        + a_je.value() * a_je.value() * sigma_z * sigma_z
        - a_ij.value() * a_ij.value() * sigma_ij * sigma_ij;
    let den = match convention {
        CorrConvention::LawOfCosines => 2.0 * a_ie.value() * a_je.value() * sigma_i * sigma_xj,
        CorrConvention::Legacy => 2.0 * a_ie.value() * a_ij.value() * sigma_xj * sigma_ij,
    };
    let rho = num / den;
    if rho.abs() > 1.0 + 1e-8 {
        return Err(PricingError::Model(format!("coterminal correlation {rho} outside [-1, 1]")));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// Per-exercise market data. Vols are absolute, means convexity-shifted.
#[derive(Debug, Clone)]
pub struct ExerciseInfo {
    pub time: f64,
    /// Annuity A_ie of the coterminal swap [T_i, T_e].
    pub annuity: Annuity,
    pub forward: f64,
    pub mean: f64,
    pub sigma: f64,
}

/// Decomposition data of one exercise pair (T_i, T_j), i < j.
#[derive(Debug, Clone)]
pub struct PairInfo {
    pub a_ij: Annuity,
    /// Absolute vol of R(T_i, T_i, T_j) at T_i.
    pub sigma_ij: f64,
    pub rho_ls: f64,
    /// Absolute vol of Z_j = E[X_j | F_{T_i}].
    pub sigma_z: f64,
    /// Correlation of (X_i, Z_j).
    pub rho_xz: f64,
}

/// All marginals, pairs and the repaired correlation matrix of a Bermudan.
#[derive(Debug, Clone)]
pub struct CoterminalSet {
    pub exercises: Vec<ExerciseInfo>,
    pub end: f64,
    /// pairs[i][j - i - 1] describes (T_i, T_j) for j > i.
    pub pairs: Vec<Vec<PairInfo>>,
    /// Repaired correlation matrix of the X_i.
    pub corr: Vec<Vec<f64>>,
    pub repair: CorrelationRepairReport,
}

impl CoterminalSet {
    pub fn pair(&self, i: usize, j: usize) -> &PairInfo {
        &self.pairs[i][j - i - 1]
    }
}

/// Resolves curve, surface and correlation inputs for every exercise and
/// exercise pair, assembles the correlation matrix under `convention` and
/// repairs it to positive semidefinite if needed.
pub fn build_coterminal_set(
    trade: &BermudanSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr_cfg: &CorrelationConfig,
    convention: CorrConvention,
) -> Result<CoterminalSet> {
    trade.validate()?;
    let te = trade.end;
    let n = trade.exercises.len();
    let mut exercises = Vec::with_capacity(n);
    for &ti in &trade.exercises {
        let spec = SwapSpec::annual(ti, te)?;
        let a = annuity(curve, &spec)?;
        let f = par_rate(curve, &spec)?;
        let sigma = surface.lookup_vol(ti, ti, te, trade.strike, f)? * ti.sqrt();
        let mean = apply_convexity_shift(f, sigma, corr_cfg.convexity_shift(ti));
        exercises.push(ExerciseInfo { time: ti, annuity: a, forward: f, mean, sigma });
    }
    let mut pairs: Vec<Vec<PairInfo>> = Vec::with_capacity(n);
    let mut corr = vec![vec![0.0; n]; n];
    for i in 0..n {
        corr[i][i] = 1.0;
        let mut row = Vec::with_capacity(n - i - 1);
        for j in i + 1..n {
            let (ti, tj) = (exercises[i].time, exercises[j].time);
            let s_ij_spec = SwapSpec::annual(ti, tj)?;
            let a_ij = annuity(curve, &s_ij_spec)?;
            let r_ij = par_rate(curve, &s_ij_spec)?;
            let mapped = r_ij + (trade.strike - exercises[j].forward);
            let sigma_ij = surface.lookup_vol(ti, ti, tj, mapped, r_ij)? * ti.sqrt();
            let rho_ls = corr_cfg.long_short(ti, tj)?;
            let sigma_z = match corr_cfg.forward_fix(ti, tj, te) {
                Some(rho_fix) => {
                    if !(0.0..=1.0).contains(&rho_fix) {
                        return Err(PricingError::Domain(format!(
                            "forward_fix correlation must be in [0, 1], got {rho_fix}"
                        )));
                    }
                    rho_fix * exercises[j].sigma
                }
                None => midcurve_vol_approx(
                    exercises[i].annuity,
                    a_ij,
                    exercises[j].annuity,
                    exercises[i].sigma,
                    sigma_ij,
                    rho_ls,
                )?,
            };
            if sigma_z > exercises[j].sigma * (1.0 + 1e-10) {
                return Err(PricingError::Model(format!(
                    "projected vol {sigma_z} for pair ({ti}, {tj}) exceeds sigma_Xj {}: negative forward variance",
                    exercises[j].sigma
                )));
            }
            let sigma_z = sigma_z.min(exercises[j].sigma);
            let rho_xz = rho_x1_z(
                exercises[i].annuity,
                a_ij,
                exercises[j].annuity,
                exercises[i].sigma,
                sigma_ij,
                rho_ls,
                sigma_z,
            )?;
            let rho_ij = coterminal_corr(
                exercises[i].annuity,
                a_ij,
                exercises[j].annuity,
                exercises[i].sigma,
                sigma_ij,
                sigma_z,
                exercises[j].sigma,
                convention,
            )?;
            corr[i][j] = rho_ij;
            corr[j][i] = rho_ij;
            row.push(PairInfo { a_ij, sigma_ij, rho_ls, sigma_z, rho_xz });
        }
        pairs.push(row);
    }
    let (repaired, repair) = validate_correlation_matrix(&corr)?;
    if repair.frobenius_distance > REPAIR_ERROR_THRESHOLD {
        return Err(PricingError::Model(format!(
            "correlation matrix repair moved it too far (Frobenius distance {:.4} > {REPAIR_ERROR_THRESHOLD})",
            repair.frobenius_distance
        )));
    }
    Ok(CoterminalSet { exercises, end: te, pairs, corr: repaired, repair })
}

fn put_set_diagnostics(result: &mut PricingResult, set: &CoterminalSet) {
    result.diagnostics.put("exercise_times", set.exercises.iter().map(|e| e.time).collect::<Vec<_>>());
    result.diagnostics.put("sigmas", set.exercises.iter().map(|e| e.sigma).collect::<Vec<_>>());
    result.diagnostics.put("correlation_matrix", &set.corr);
    result.diagnostics.put("correlation_repaired", set.repair.repaired);
    result.diagnostics.put("min_eigenvalue_before", set.repair.min_eigenvalue_before);
    result.diagnostics.put("repair_frobenius_distance", set.repair.frobenius_distance);
    if set.repair.frobenius_distance > REPAIR_WARN_THRESHOLD {
        result.diagnostics.put("repair_warning", true);
    }
}

/// Correlation matrix of the coterminal rates under the
/// perfect-correlation-of-forward-rates assumption (each projected rate Z_j
/// carries the full variance of X_j), repaired to positive semidefinite if
/// needed. This is the matrix the moment-matching pricer uses with the
/// full-vol marginals.
pub fn perfect_corr_matrix(
    set: &CoterminalSet,
    convention: CorrConvention,
) -> Result<(Vec<Vec<f64>>, CorrelationRepairReport)> {
    let n = set.exercises.len();
    let mut corr = vec![vec![0.0; n]; n];
    for i in 0..n {
        corr[i][i] = 1.0;
        for j in i + 1..n {
            let pair = set.pair(i, j);
            let rho = coterminal_corr(
                set.exercises[i].annuity,
                pair.a_ij,
                set.exercises[j].annuity,
                set.exercises[i].sigma,
                pair.sigma_ij,
                set.exercises[j].sigma,
                set.exercises[j].sigma,
                convention,
            )?;
            corr[i][j] = rho;
            corr[j][i] = rho;
        }
    }
    validate_correlation_matrix(&corr)
}

/// Bermudan value by Clark moment matching of the swap values
/// `max(max_i A_ie omega (X_i - K), 0)` with the zero floor as a point-mass
/// member of the maximum. The members carry the full marginal vols and the
/// perfect-correlation matrix from [`perfect_corr_matrix`].
pub fn price_bermudan_mm(
    trade: &BermudanSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr_cfg: &CorrelationConfig,
    convention: CorrConvention,
) -> Result<PricingResult> {
    let set = build_coterminal_set(trade, curve, surface, corr_cfg, convention)?;
    let n = set.exercises.len();
    let mut laws = Vec::with_capacity(n + 1);
    for e in &set.exercises {
        laws.push(NormalLaw::new(
            e.annuity.value() * trade.omega * (e.mean - trade.strike),
            e.annuity.value() * e.sigma,
        )?);
    }
    laws.push(NormalLaw::point_mass(0.0));
    let (mm_corr, mm_repair) = perfect_corr_matrix(&set, convention)?;
    let mut corr = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            corr[i][j] = mm_corr[i][j];
        }
    }
    corr[n][n] = 1.0;
    let max_law = clark_running_max(&laws, &corr, None)?;
    // The true price dominates each single-exercise European; the
    // re-Gaussianized maximum can dip below that bound out of the money, so
    // clip to the best member value.
    let mut floor = 0.0f64;
    for law in &laws[..n] {
        floor = floor.max(bachelier(law.mean, 0.0, law.stdev, 1.0)?);
    }
    let pv = max_law.mean.max(floor);
    let a1 = set.exercises[0].annuity.value();
    let mut result = PricingResult::from_normalized(pv / a1, a1);
    put_set_diagnostics(&mut result, &set);
    result.diagnostics.put("mm_correlation_matrix", &mm_corr);
    result.diagnostics.put("mm_correlation_repaired", mm_repair.repaired);
    Ok(result)
}

/// Grid over `mean +- LATTICE_HALF_WIDTH * stdev` with `strike` inserted as a
/// node when it falls inside.
fn lattice_nodes(mean: f64, stdev: f64, points: usize, strike: f64) -> Vec<f64> {
    let lo = mean - LATTICE_HALF_WIDTH * stdev;
    let hi = mean + LATTICE_HALF_WIDTH * stdev;
    let h = (hi - lo) / (points - 1) as f64;
    let mut xs: Vec<f64> = (0..points).map(|i| lo + i as f64 * h).collect();
    if strike > lo + 0.25 * h && strike < hi - 0.25 * h {
        match xs.binary_search_by(|x| x.partial_cmp(&strike).unwrap()) {
            Ok(_) => {}
            Err(pos) => {
                // Replace the nearest node instead of inserting when it is
                // too close, keeping the grid strictly increasing.
                if strike - xs[pos - 1] < 1e-9 * h {
                    xs[pos - 1] = strike;
                } else if xs[pos] - strike < 1e-9 * h {
                    xs[pos] = strike;
                } else {
                    xs.insert(pos, strike);
                }
            }
        }
    }
    xs
}

/// Output of the lattice backward induction.
#[derive(Debug, Clone)]
pub struct LatticeSolution {
    /// Value at the first exercise date as a function of X_1, per unit of
    /// A_1e, including the exercise decision at T_1.
    pub value: PiecewiseLinear,
    /// `continuations[j](x)`: expected value of not exercising at T_j given
    /// X_j = x, per unit of A_je. `continuations[n-1]` is identically zero.
    pub continuations: Vec<PiecewiseLinear>,
}

/// Backward induction over the exercise dates.
///
/// Stepping back from T_j to T_{j-1} first integrates out the forward
/// variance `sigma_Xj^2 - sigma_Zj^2` (an exact Gaussian convolution of the
/// piecewise-linear value function, giving the continuation as a function of
/// the projected rate Z_j), then takes the conditional expectation over
/// Z_j | X_{j-1} of the exercise comparison. The comparison sits inside that
/// expectation: the holder at T_{j-1} observes both X_{j-1} and the projected
/// later rate Z_j, exactly as in the two-date double integral.
pub fn lattice_solve(
    set: &CoterminalSet,
    strike: f64,
    omega: f64,
    points: usize,
) -> Result<LatticeSolution> {
    if points < 3 {
        return Err(PricingError::Grid(format!("lattice needs at least 3 points, got {points}")));
    }
    let n = set.exercises.len();
    let k = strike;
    let last = &set.exercises[n - 1];
    let xs = lattice_nodes(last.mean, last.sigma, points, k);
    let zero = PiecewiseLinear::new(xs.clone(), vec![0.0; xs.len()])?;
    let ys: Vec<f64> = xs.iter().map(|&x| (omega * (x - k)).max(0.0)).collect();
    // Value function per unit of A_je, on the X_j grid.
    let mut value = PiecewiseLinear::new(xs, ys)?;
    let mut conts_rev = vec![zero];
    for j in (1..n).rev() {
        let prev = &set.exercises[j - 1];
        let cur = &set.exercises[j];
        let pair = set.pair(j - 1, j);
        let fwd_vol = (cur.sigma * cur.sigma - pair.sigma_z * pair.sigma_z).max(0.0).sqrt();
        let ratio = cur.annuity.value() / prev.annuity.value();
        let cond_sd = pair.sigma_z * (1.0 - pair.rho_xz * pair.rho_xz).max(0.0).sqrt();
        let slope = if prev.sigma > 0.0 { pair.rho_xz * pair.sigma_z / prev.sigma } else { 0.0 };
        // Continuation seen from Z_j: integrate out the forward variance.
        let zs = lattice_nodes(cur.mean, pair.sigma_z.max(1e-12 * cur.sigma), points, k);
        let hz: Vec<f64> = zs.iter().map(|&z| value.gaussian_expectation(z, fwd_vol)).collect();
        let h = PiecewiseLinear::new(zs, hz)?;
        // Roll to the X_{j-1} grid in units of A_{j-1,e}. The exercise
        // decision compares the intrinsic value against the continuation on
        // the realized Z_j, inside the conditional expectation.
        let xs = lattice_nodes(prev.mean, prev.sigma, points, k);
        let mut cont = Vec::with_capacity(xs.len());
        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            let cond_mean = cur.mean + slope * (x - prev.mean);
            cont.push(ratio * h.gaussian_expectation(cond_mean, cond_sd));
            let intrinsic = (omega * (x - k)).max(0.0);
            ys.push(h.scaled_floor(ratio, intrinsic).gaussian_expectation(cond_mean, cond_sd));
        }
        conts_rev.push(PiecewiseLinear::new(xs.clone(), cont)?);
        value = PiecewiseLinear::new(xs, ys)?;
    }
    conts_rev.reverse();
    Ok(LatticeSolution { value, continuations: conts_rev })
}

/// Bermudan value by backward induction over the exercise dates.
///
/// With a single date the scheme reproduces the Bachelier price exactly,
/// since the hockey-stick value function is integrated in closed form.
pub fn price_bermudan_lattice(
    trade: &BermudanSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr_cfg: &CorrelationConfig,
    convention: CorrConvention,
    points: usize,
) -> Result<PricingResult> {
    let set = build_coterminal_set(trade, curve, surface, corr_cfg, convention)?;
    let solution = lattice_solve(&set, trade.strike, trade.omega, points)?;
    let first = &set.exercises[0];
    let normalized = solution.value.gaussian_expectation(first.mean, first.sigma);
    let mut result = PricingResult::from_normalized(normalized, first.annuity.value());
    put_set_diagnostics(&mut result, &set);
    result.diagnostics.put("lattice_points", points);
    Ok(result)
}
