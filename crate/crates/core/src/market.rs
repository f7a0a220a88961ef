//! Discount curves, payment schedules, annuities and forward par swap rates.
//!
//! Time is a plain number of years from the valuation date; there are no
//! calendars or day-count conventions. The curve interpolates linearly in
//! log-discount-factor between pillars and extrapolates the zero rate flat
//! beyond the last pillar.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Zero-rate curve. Pillars are `(time_in_years, continuously_compounded_zero_rate)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscountCurve {
    pillars: Vec<(f64, f64)>,
}

impl DiscountCurve {
    /// Builds a curve from pillars. Times must be strictly increasing and non-negative.
    pub fn new(pillars: Vec<(f64, f64)>) -> Result<Self> {
        if pillars.is_empty() {
            return Err(PricingError::Invalid("curve needs at least one pillar".into()));
        }
        for w in pillars.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PricingError::Invalid(format!(
                    "pillar times must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if pillars[0].0 < 0.0 {
            return Err(PricingError::Invalid("pillar times must be >= 0".into()));
        }
        Ok(Self { pillars })
    }

    /// Flat curve at a single zero rate.
    pub fn flat(rate: f64) -> Self {
        Self { pillars: vec![(1.0, rate)] }
    }

    pub fn pillars(&self) -> &[(f64, f64)] {
        &self.pillars
    }

    /// Discount factor df(t) = exp(-z(t) t), linear in log-df between pillars,
    /// flat zero rate beyond the last pillar. df(0) = 1.
    pub fn discount_factor(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(PricingError::Domain(format!("discount time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok(self.log_df(t).exp())
    }

    fn log_df(&self, t: f64) -> f64 {
        // log-df nodes, with the implicit (0, 0) anchor.
        let last = *self.pillars.last().unwrap();
        if t >= last.0 {
            return -last.1 * t; // flat zero rate
        }
        let mut prev = (0.0_f64, 0.0_f64); // (time, log df)
        for &(ti, zi) in &self.pillars {
            let node = (ti, -zi * ti);
            if t <= ti {
                let w = (t - prev.0) / (node.0 - prev.0);
                return prev.1 + w * (node.1 - prev.1);
            }
            prev = node;
        }
        unreachable!()
    }
}

/// A fixed-for-float swap skeleton: start, end and fixed-leg payment frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapSpec {
    pub start: f64,
    pub end: f64,
    /// Fixed-leg payments per year.
    pub frequency: u32,
}

impl SwapSpec {
    pub fn new(start: f64, end: f64, frequency: u32) -> Result<Self> {
        let spec = Self { start, end, frequency };
        spec.validate()?;
        Ok(spec)
    }

    /// Annual fixed leg, the default throughout.
    pub fn annual(start: f64, end: f64) -> Result<Self> {
        Self::new(start, end, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.start < 0.0 || self.end <= self.start {
            return Err(PricingError::Invalid(format!(
                "need 0 <= start < end, got start={} end={}",
                self.start, self.end
            )));
        }
        if self.frequency == 0 {
            return Err(PricingError::Invalid("frequency must be >= 1".into()));
        }
        let periods = (self.end - self.start) * self.frequency as f64;
        if (periods - periods.round()).abs() > 1e-9 || periods.round() < 1.0 {
            return Err(PricingError::Invalid(format!(
                "(end - start) * frequency must be a positive integer, got {periods}"
            )));
        }
        Ok(())
    }

    /// Fixed-leg payment times in (start, end].
    pub fn payment_times(&self) -> Vec<f64> {
        let n = ((self.end - self.start) * self.frequency as f64).round() as usize;
        let tau = 1.0 / self.frequency as f64;
        (1..=n).map(|i| self.start + i as f64 * tau).collect()
    }
}

/// Discounted sum of fixed-leg accruals: A = sum tau_i df(t_i).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Annuity(pub f64);

impl Annuity {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Annuity of the swap's fixed leg as seen from the valuation date.
pub fn annuity(curve: &DiscountCurve, spec: &SwapSpec) -> Result<Annuity> {
    spec.validate()?;
    let tau = 1.0 / spec.frequency as f64;
    let mut total = 0.0;
    for t in spec.payment_times() {
        total += tau * curve.discount_factor(t)?;
    }
    Ok(Annuity(total))
}

/// Forward par swap rate R = (df(start) - df(end)) / A.
pub fn par_rate(curve: &DiscountCurve, spec: &SwapSpec) -> Result<f64> {
    let a = annuity(curve, spec)?;
    let num = curve.discount_factor(spec.start)? - curve.discount_factor(spec.end)?;
    Ok(num / a.value())
}
