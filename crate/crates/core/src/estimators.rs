//! Click-count estimators for the vacuum and single-photon probabilities.
//!
//! The signal is split on a beam splitter of effective transmittance `T`
//! onto two on/off detectors A and B. Per heralding trigger (`R0` in total)
//! each window is classified exclusively as no click, A only (`R1A`),
//! B only (`R1B`) or both (`R2`). With unit-efficiency detectors assumed,
//!
//! * `p0 = 1 − (R1A + R1B + R2)/R0`
//! * `p1_est = (R1A + R1B)/R0 − [T² + (1−T)²]/[2T(1−T)] · R2/R0 ≤ p1`
//! * `T_est = R1A/(R1A + R1B) ≥ T` for `T ≥ 1/2`
//!
//! Uncertainties use first-order propagation with every count an
//! independent Poisson variable, `R0` included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::witness::ProbabilityPair;

pub use crate::stats::PhotonStatistics;

/// `t` closer than this to 0 or 1 makes the `p1` coefficient blow up.
pub const SINGULAR_T_EPS: f64 = 1e-9;

/// Totals of a trigger-conditioned two-detector run, classified exclusively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickCounts {
    #[serde(rename = "R0")]
    pub r0: u64,
    #[serde(rename = "R1A")]
    pub r1a: u64,
    #[serde(rename = "R1B")]
    pub r1b: u64,
    #[serde(rename = "R2")]
    pub r2: u64,
    #[serde(default)]
    pub duration_s: Option<f64>,
}

impl ClickCounts {
    pub fn new(r0: u64, r1a: u64, r1b: u64, r2: u64) -> Result<Self> {
        let c = ClickCounts {
            r0,
            r1a,
            r1b,
            r2,
            duration_s: None,
        };
        c.validate()?;
        Ok(c)
    }

    /// Counts where `R1A`/`R1B` also include the three-fold events.
    pub fn from_inclusive(r0: u64, r1a: u64, r1b: u64, r2: u64) -> Result<Self> {
        if r1a < r2 || r1b < r2 {
            return Err(Error::InvalidInput(format!(
                "inclusive two-fold counts ({r1a}, {r1b}) smaller than three-fold count {r2}"
            )));
        }
        Self::new(r0, r1a - r2, r1b - r2, r2)
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration_s = Some(seconds);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let clicked = self.r1a as u128 + self.r1b as u128 + self.r2 as u128;
        if clicked > self.r0 as u128 {
            return Err(Error::InvalidInput(format!(
                "R1A + R1B + R2 = {clicked} exceeds R0 = {}",
                self.r0
            )));
        }
        if let Some(d) = self.duration_s {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::param("duration_s", "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Per-trigger outcome fractions.
    pub fn fractions(&self) -> Result<ClickFractions> {
        if self.r0 == 0 {
            return Err(Error::EmptyRun);
        }
        let r0 = self.r0 as f64;
        Ok(ClickFractions {
            a: self.r1a as f64 / r0,
            b: self.r1b as f64 / r0,
            coinc: self.r2 as f64 / r0,
        })
    }

    /// Same run with detectors A and B exchanged.
    pub fn swapped(&self) -> Self {
        ClickCounts {
            r1a: self.r1b,
            r1b: self.r1a,
            ..*self
        }
    }
}

/// Outcome fractions per heralding window: A only, B only and both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickFractions {
    pub a: f64,
    pub b: f64,
    pub coinc: f64,
}

impl ClickFractions {
    pub fn p0(&self) -> f64 {
        1.0 - (self.a + self.b + self.coinc)
    }

    /// `a/(a + b)`, without relabeling.
    pub fn splitting(&self) -> Option<f64> {
        let s = self.a + self.b;
        (s > 0.0).then(|| self.a / s)
    }

    pub fn p1(&self, t: f64) -> f64 {
        self.a + self.b - splitting_coefficient(t) * self.coinc
    }
}

/// Value and one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    /// A value known without uncertainty.
    pub fn exact(value: f64) -> Self {
        EstimateWithError { value, sigma: 0.0 }
    }
}

/// Splitting ratio oriented so that `T_est ≥ 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingEstimate {
    pub t: EstimateWithError,
    /// Channels A and B were exchanged to reach `T_est ≥ 1/2`.
    pub swapped: bool,
}

/// `[T² + (1−T)²] / [2T(1−T)]`, symmetric under `T ↔ 1−T`, equal to 1 at `T = 1/2`.
pub fn splitting_coefficient(t: f64) -> f64 {
    let u = t * (1.0 - t);
    0.5 / u - 1.0
}

fn splitting_coefficient_derivative(t: f64) -> f64 {
    let u = t * (1.0 - t);
    -(1.0 - 2.0 * t) / (2.0 * u * u)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > SINGULAR_T_EPS && t < 1.0 - SINGULAR_T_EPS) {
        return Err(Error::SingularSplitting(t));
    }
    Ok(())
}

/// Vacuum probability `1 − (R1A + R1B + R2)/R0`.
pub fn estimate_p0(counts: &ClickCounts) -> Result<EstimateWithError> {
    counts.validate()?;
    let f = counts.fractions()?;
    let r0 = counts.r0 as f64;
    let clicked = (counts.r1a + counts.r1b + counts.r2) as f64;
    // d/dR_i = -1/R0 for the three click counts, d/dR0 = clicked/R0²
    let var = clicked / (r0 * r0) + clicked * clicked / (r0 * r0 * r0);
    Ok(EstimateWithError {
        value: f.p0(),
        sigma: var.sqrt(),
    })
}

/// Splitting ratio `R1A/(R1A + R1B)`, relabeled to be at least 1/2.
pub fn estimate_splitting(counts: &ClickCounts) -> Result<SplittingEstimate> {
    counts.validate()?;
    let (a, b) = (counts.r1a as f64, counts.r1b as f64);
    let s = a + b;
    if s == 0.0 {
        return Err(Error::NoClicks("R1A + R1B = 0"));
    }
    let swapped = counts.r1a < counts.r1b;
    let t = a.max(b) / s;
    Ok(SplittingEstimate {
        t: EstimateWithError {
            value: t,
            sigma: (a * b / (s * s * s)).sqrt(),
        },
        swapped,
    })
}

/// Lower-biased single-photon estimate for splitting ratio `t`.
///
/// `t.sigma` enters through the derivative of the coincidence coefficient;
/// pass [`EstimateWithError::exact`] for a calibrated ratio. The result is
/// not clamped and may be negative.
pub fn estimate_p1(counts: &ClickCounts, t: &EstimateWithError) -> Result<EstimateWithError> {
    counts.validate()?;
    check_t(t.value)?;
    let f = counts.fractions()?;
    let r0 = counts.r0 as f64;
    let c = splitting_coefficient(t.value);
    let value = f.p1(t.value);
    let dt = splitting_coefficient_derivative(t.value) * f.coinc;
    let var = (counts.r1a + counts.r1b) as f64 / (r0 * r0)
        + c * c * counts.r2 as f64 / (r0 * r0)
        + value * value / r0
        + dt * dt * t.sigma * t.sigma;
    Ok(EstimateWithError {
        value,
        sigma: var.sqrt(),
    })
}

/// All count-derived quantities with a joint first-order error model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEstimate {
    pub p0: EstimateWithError,
    pub p1: EstimateWithError,
    pub t: EstimateWithError,
    pub cov_p0_p1: f64,
    pub swapped: bool,
    /// `p1_est < 0`; kept unclamped so the lower-bias guarantee survives.
    pub p1_negative: bool,
}

impl JointEstimate {
    pub fn pair(&self) -> ProbabilityPair {
        ProbabilityPair {
            p0: self.p0.value,
            p1: self.p1.value,
            sigma_p0: Some(self.p0.sigma),
            sigma_p1: Some(self.p1.sigma),
        }
    }
}

/// `p0`, `T_est` and `p1_est` from one run, with `T_est` fed into `p1_est` and
/// the covariance of `(p0, p1)` from the shared counts.
///
/// The Jacobian runs over `(R0, R1A, R1B, R2)` and includes `p1`'s dependence
/// on the counts through `T_est`.
pub fn estimate_joint(counts: &ClickCounts) -> Result<JointEstimate> {
    counts.validate()?;
    if counts.r0 == 0 {
        return Err(Error::EmptyRun);
    }
    let split = estimate_splitting(counts)?;
    let c = if split.swapped { counts.swapped() } else { *counts };
    let t = split.t.value;
    check_t(t)?;

    let r0 = c.r0 as f64;
    let (a, b, k) = (c.r1a as f64, c.r1b as f64, c.r2 as f64);
    let f = c.fractions()?;
    let p0 = f.p0();
    let p1 = f.p1(t);
    let coef = splitting_coefficient(t);
    let dcoef = splitting_coefficient_derivative(t);
    let s2 = (a + b) * (a + b);

    // order: R0, R1A, R1B, R2
    let var = [r0, a, b, k];
    let j0 = [(a + b + k) / (r0 * r0), -1.0 / r0, -1.0 / r0, -1.0 / r0];
    let j1 = [
        -p1 / r0,
        1.0 / r0 - dcoef * f.coinc * b / s2,
        1.0 / r0 + dcoef * f.coinc * a / s2,
        -coef / r0,
    ];
    let mut v0 = 0.0;
    let mut v1 = 0.0;
    let mut cov = 0.0;
    for i in 0..4 {
        v0 += j0[i] * j0[i] * var[i];
        v1 += j1[i] * j1[i] * var[i];
        cov += j0[i] * j1[i] * var[i];
    }
    Ok(JointEstimate {
        p0: EstimateWithError {
            value: p0,
            sigma: v0.sqrt(),
        },
        p1: EstimateWithError {
            value: p1,
            sigma: v1.sqrt(),
        },
        t: split.t,
        cov_p0_p1: cov,
        swapped: split.swapped,
        p1_negative: p1 < 0.0,
    })
}

/// Exact shortfall `p1 − p1_est` implied by a photon-number distribution:
/// `Σ_{n≥3} p_n [T² − Tⁿ + (1−T)² − (1−T)ⁿ] / [2T(1−T)]`.
///
/// Mass in the statistics' tail is not attributed to any `n` and adds nothing.
pub fn p1_bias_bound(stats: &PhotonStatistics, t: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "[1/2, 1)",
        });
    }
    let s = 1.0 - t;
    let denom = 2.0 * t * s;
    Ok(stats
        .probs()
        .iter()
        .enumerate()
        .skip(3)
        .map(|(n, p)| {
            let n = n as i32;
            p * (t * t - t.powi(n) + s * s - s.powi(n)) / denom
        })
        .sum())
}

/// `g²(0) = 2(1 − p0 − p1) / [2(1 − p0) − p1]²` of the three-level model state.
pub fn g2_of_rho_t(p0: f64, p1: f64) -> Result<f64> {
    ProbabilityPair::new(p0, p1)?;
    let den = 2.0 * (1.0 - p0) - p1;
    if den.is_nan() || den <= 0.0 {
        return Err(Error::Degenerate("2(1 - p0) = p1: vacuum state has no g2"));
    }
    let p2 = (1.0 - p0 - p1).max(0.0);
    Ok(2.0 * p2 / (den * den))
}

/// `g²(0) = Σ n(n−1) p_n / (Σ n p_n)²` for finite-support statistics.
pub fn g2_of_stats(stats: &PhotonStatistics) -> Result<f64> {
    if stats.tail() > crate::stats::NORM_TOL {
        return Err(Error::InvalidInput(format!(
            "g2 needs finite support, tail mass is {:e}",
            stats.tail()
        )));
    }
    let mean = stats.mean();
    if mean <= 0.0 {
        return Err(Error::ZeroMean);
    }
    let fact2: f64 = stats
        .probs()
        .iter()
        .enumerate()
        .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
        .sum();
    Ok(fact2 / (mean * mean))
}

/// Grangier anticorrelation parameter `α = R0·R2 / (R1A·R1B)`.
pub fn alpha_anticorrelation(counts: &ClickCounts) -> Result<EstimateWithError> {
    counts.validate()?;
    if counts.r1a == 0 || counts.r1b == 0 {
        return Err(Error::NoClicks("alpha needs R1A > 0 and R1B > 0"));
    }
    let (r0, a, b, k) = (counts.r0 as f64, counts.r1a as f64, counts.r1b as f64, counts.r2 as f64);
    let alpha = r0 * k / (a * b);
    // relative derivatives: +1/R0, +1/R2, -1/R1A, -1/R1B
    let var = alpha * alpha / r0 + (r0 / (a * b)).powi(2) * k + alpha * alpha / a + alpha * alpha / b;
    Ok(EstimateWithError {
        value: alpha,
        sigma: var.sqrt(),
    })
}

/// Diagonal state `p0|0⟩⟨0| + p1|1⟩⟨1| + (1 − p0 − p1)|2⟩⟨2|`.
pub fn rho_t_from_pair(pair: &ProbabilityPair) -> Result<PhotonStatistics> {
    pair.validate()?;
    let p2 = (1.0 - pair.p0 - pair.p1).max(0.0);
    PhotonStatistics::from_probs(vec![pair.p0, pair.p1, p2])
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: (u64, u64, u64, u64) = (17_375_000, 1_259_000, 1_192_000, 605);

    fn worked() -> ClickCounts {
        ClickCounts::new(WORKED.0, WORKED.1, WORKED.2, WORKED.3).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn counts_invariants() {
        assert!(ClickCounts::new(10, 5, 5, 1).is_err());
        assert!(ClickCounts::new(10, 5, 4, 1).is_ok());
        let c = ClickCounts::from_inclusive(100, 30, 20, 5).unwrap();
        assert_eq!((c.r1a, c.r1b, c.r2), (25, 15, 5));
        assert!(ClickCounts::from_inclusive(100, 3, 20, 5).is_err());
        assert!(ClickCounts::new(u64::MAX, u64::MAX, u64::MAX, 0).is_err());
    }

    #[test]
    fn p0_examples() {
        assert_eq!(estimate_p0(&ClickCounts::new(10, 0, 0, 0).unwrap()).unwrap().value, 1.0);
        assert_eq!(estimate_p0(&ClickCounts::new(4, 1, 1, 1).unwrap()).unwrap().value, 0.25);
        let p0 = estimate_p0(&worked()).unwrap();
        assert!(close(p0.value, 0.8589, 5e-5), "{}", p0.value);
        assert!(p0.sigma < 2e-4);
        assert!(matches!(
            estimate_p0(&ClickCounts::new(0, 0, 0, 0).unwrap()),
            Err(Error::EmptyRun)
        ));
    }

    #[test]
    fn splitting_examples() {
        let s = estimate_splitting(&ClickCounts::new(100, 20, 20, 0).unwrap()).unwrap();
        assert_eq!(s.t.value, 0.5);
        let s = estimate_splitting(&worked()).unwrap();
        assert!(close(s.t.value, 1_259_000.0 / 2_451_000.0, 1e-15));
        assert!(close(s.t.value, 0.513668, 1e-6));
        assert!(!s.swapped);
        let s = estimate_splitting(&ClickCounts::new(10, 3, 1, 0).unwrap()).unwrap();
        assert_eq!(s.t.value, 0.75);
        let s = estimate_splitting(&ClickCounts::new(10, 1, 3, 0).unwrap()).unwrap();
        assert_eq!(s.t.value, 0.75);
        assert!(s.swapped);
        assert!(matches!(
            estimate_splitting(&ClickCounts::new(10, 0, 0, 3).unwrap()),
            Err(Error::NoClicks(_))
        ));
    }

    #[test]
    fn p1_examples() {
        let c = worked();
        let t = estimate_splitting(&c).unwrap().t;
        assert!(close(splitting_coefficient(t.value), 1.0015, 1e-4));
        let p1 = estimate_p1(&c, &t).unwrap();
        assert!(close(p1.value, 0.14103, 5e-6), "{}", p1.value);
        assert!(p1.sigma < 2e-4);

        let c = ClickCounts::new(1000, 120, 80, 0).unwrap();
        let p1 = estimate_p1(&c, &EstimateWithError::exact(0.6)).unwrap();
        assert_eq!(p1.value, 0.2);

        let c = ClickCounts::new(100, 25, 25, 10).unwrap();
        let p1 = estimate_p1(&c, &EstimateWithError::exact(0.5)).unwrap();
        assert!(close(p1.value, 0.40, 1e-15));
    }

    #[test]
    fn p1_errors_and_negative_values() {
        let c = ClickCounts::new(100, 10, 10, 30).unwrap();
        for t in [1.0, 1.0 - 1e-10, 0.0] {
            assert!(matches!(
                estimate_p1(&c, &EstimateWithError::exact(t)),
                Err(Error::SingularSplitting(_))
            ));
        }
        assert!(matches!(
            estimate_p1(&ClickCounts::new(0, 0, 0, 0).unwrap(), &EstimateWithError::exact(0.5)),
            Err(Error::EmptyRun)
        ));
        let p1 = estimate_p1(&c, &EstimateWithError::exact(0.9)).unwrap();
        assert!(p1.value < 0.0);
        let j = estimate_joint(&ClickCounts::new(100, 12, 10, 30).unwrap()).unwrap();
        assert!(j.p1_negative);
    }

    #[test]
    fn p1_non_increasing_in_t() {
        let c = worked();
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let t = 0.5 + 0.4999 * i as f64 / 1000.0;
            let v = estimate_p1(&c, &EstimateWithError::exact(t)).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn splitting_uncertainty_raises_p1_sigma() {
        let c = worked();
        let exact = estimate_p1(&c, &EstimateWithError::exact(0.52)).unwrap();
        let noisy = estimate_p1(
            &c,
            &EstimateWithError {
                value: 0.52,
                sigma: 0.01,
            },
        )
        .unwrap();
        assert_eq!(exact.value, noisy.value);
        assert!(noisy.sigma > exact.sigma);
    }

    #[test]
    fn joint_matches_single_estimators() {
        let c = worked();
        let j = estimate_joint(&c).unwrap();
        let p0 = estimate_p0(&c).unwrap();
        let p1 = estimate_p1(&c, &EstimateWithError::exact(j.t.value)).unwrap();
        assert_eq!(j.p0.value, p0.value);
        assert!(close(j.p0.sigma, p0.sigma, 1e-18));
        assert!(close(j.p1.value, p1.value, 1e-15));
        // T-dependence adds only a tiny contribution at these rates
        assert!(close(j.p1.sigma, p1.sigma, 1e-7));
        // sum p0 + p1 better determined than the difference
        let var_sum = j.p0.sigma.powi(2) + j.p1.sigma.powi(2) + 2.0 * j.cov_p0_p1;
        let var_diff = j.p0.sigma.powi(2) + j.p1.sigma.powi(2) - 2.0 * j.cov_p0_p1;
        assert!(var_sum < var_diff);
    }

    #[test]
    fn joint_relabels_channels() {
        let j = estimate_joint(&worked().swapped()).unwrap();
        assert!(j.swapped);
        let k = estimate_joint(&worked()).unwrap();
        assert_eq!(j.p1.value, k.p1.value);
        assert_eq!(j.t, k.t);
    }

    #[test]
    fn bias_bound_examples() {
        let s = PhotonStatistics::from_probs(vec![0.7, 0.2, 0.1]).unwrap();
        assert_eq!(p1_bias_bound(&s, 0.6).unwrap(), 0.0);
        assert!(close(
            p1_bias_bound(&PhotonStatistics::fock(3), 0.5).unwrap(),
            0.5,
            1e-15
        ));
        assert!(p1_bias_bound(&s, 0.4).is_err());
        assert!(p1_bias_bound(&s, 1.0).is_err());
    }

    #[test]
    fn g2_examples() {
        assert_eq!(g2_of_rho_t(0.6, 0.4).unwrap(), 0.0);
        assert!(close(g2_of_rho_t(0.5, 0.3).unwrap(), 0.4 / 0.49, 1e-15));
        assert!(close(g2_of_rho_t(0.5, 0.3).unwrap(), 0.81633, 1e-5));
        assert!(matches!(g2_of_rho_t(1.0, 0.0), Err(Error::Degenerate(_))));

        let s = PhotonStatistics::from_probs(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(close(g2_of_stats(&s).unwrap(), 0.4 / 0.49, 1e-15));
        assert_eq!(g2_of_stats(&PhotonStatistics::fock(1)).unwrap(), 0.0);
        let poisson = PhotonStatistics::poisson(0.7, 40).unwrap();
        assert!(poisson.tail() < 1e-12);
        assert!(close(g2_of_stats(&poisson).unwrap(), 1.0, 1e-9));
        assert!(matches!(g2_of_stats(&PhotonStatistics::vacuum()), Err(Error::ZeroMean)));
        assert!(g2_of_stats(&PhotonStatistics::poisson(3.0, 4).unwrap()).is_err());
    }

    #[test]
    fn g2_interval_table2_row_02() {
        // perturb within the printed rounding of (0.9408, 0.0591)
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in -20..=20 {
            for j in -20..=20 {
                let p0 = 0.9408 + 5e-5 * i as f64 / 20.0;
                let p1 = 0.0591 + 5e-5 * j as f64 / 20.0;
                if p0 + p1 > 1.0 {
                    continue;
                }
                let g = g2_of_rho_t(p0, p1).unwrap();
                lo = lo.min(g);
                hi = hi.max(g);
            }
        }
        assert!(lo <= 0.0519 && 0.0519 <= hi, "[{lo}, {hi}]");
        assert!(hi < 0.115);
    }

    #[test]
    fn alpha_examples() {
        let c = ClickCounts::new(10_000, 1000, 500, 50).unwrap();
        assert!(close(alpha_anticorrelation(&c).unwrap().value, 1.0, 1e-15));
        let a = alpha_anticorrelation(&worked()).unwrap();
        assert!(close(a.value, 0.00700, 5e-6), "{}", a.value);
        assert!(a.sigma > 0.0);
        assert_eq!(
            alpha_anticorrelation(&ClickCounts::new(100, 10, 10, 0).unwrap())
                .unwrap()
                .value,
            0.0
        );
        assert!(matches!(
            alpha_anticorrelation(&ClickCounts::new(100, 0, 10, 0).unwrap()),
            Err(Error::NoClicks(_))
        ));
    }

    #[test]
    fn rho_t_examples() {
        let v = rho_t_from_pair(&ProbabilityPair::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(v.probs(), &[1.0, 0.0, 0.0]);
        let s = rho_t_from_pair(&ProbabilityPair::new(0.8589, 0.1410).unwrap()).unwrap();
        assert!(close(s.p(2), 0.0001, 1e-12));
        let s = rho_t_from_pair(&ProbabilityPair::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5, 0.0]);
    }
}
