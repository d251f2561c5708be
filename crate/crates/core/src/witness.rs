//! Non-Gaussianity witness on the vacuum and single-photon probabilities.
//!
//! Every mixture of Gaussian states has `(p0, p1)` inside a convex region
//! whose upper boundary is traced by pure squeezed displaced states with the
//! extremal displacement `d² = (e^{4r} − 1)/4`. The linear witness
//! `W(a) = a·p0 + p1` has Gaussian maximum `W_G(a)`, attained where the line
//! of slope `−a` touches that boundary. A measured pair with
//! `ΔW = max_a [W(a) − W_G(a)] > 0` cannot come from any Gaussian mixture.

use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::stats::PhotonStatistics;

/// Slack on `p0 + p1 ≤ 1`.
pub const PAIR_SLACK: f64 = 1e-12;

/// Absolute tolerance in `r` for the boundary inversion.
pub const R_TOL: f64 = 1e-12;

/// Default cap on the squeezing searched by [`solve_r_for_p0`].
pub const DEFAULT_R_MAX: f64 = 10.0;

/// Squeezing at which the boundary reaches its largest `p1` (tangent slope zero).
pub const R_P1_MAX: f64 = 0.549_306_144_334_054_9;

/// Largest single-photon probability of any Gaussian state, `3√3/(4e)`.
pub fn p1_gaussian_max() -> f64 {
    3.0 * 3f64.sqrt() / (4.0 * std::f64::consts::E)
}

/// Squeezing `r` and real displacement `d` of a pure single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPureParams {
    pub r: f64,
    pub d: f64,
}

impl GaussianPureParams {
    pub fn new(r: f64, d: f64) -> Result<Self> {
        let p = GaussianPureParams { r, d };
        p.validate()?;
        Ok(p)
    }

    pub fn vacuum() -> Self {
        GaussianPureParams { r: 0.0, d: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        check_nonneg("r", self.r)?;
        check_nonneg("d", self.d)
    }
}

/// Vacuum and single-photon probabilities with optional one-sigma uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityPair {
    pub p0: f64,
    pub p1: f64,
    #[serde(default)]
    pub sigma_p0: Option<f64>,
    #[serde(default)]
    pub sigma_p1: Option<f64>,
}

impl ProbabilityPair {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let pair = ProbabilityPair {
            p0,
            p1,
            sigma_p0: None,
            sigma_p1: None,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn with_sigmas(mut self, sigma_p0: f64, sigma_p1: f64) -> Self {
        self.sigma_p0 = Some(sigma_p0);
        self.sigma_p1 = Some(sigma_p1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p0", self.p0), ("p1", self.p1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        if self.p0 + self.p1 > 1.0 + PAIR_SLACK {
            return Err(Error::InvalidInput(format!(
                "p0 + p1 = {} exceeds 1",
                self.p0 + self.p1
            )));
        }
        for (name, s) in [("sigma_p0", self.sigma_p0), ("sigma_p1", self.sigma_p1)] {
            if let Some(s) = s {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(Error::param(name, "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }

    /// `W(a) = a·p0 + p1`.
    pub fn witness(&self, a: f64) -> f64 {
        a * self.p0 + self.p1
    }
}

/// Outcome of maximizing the witness gap over the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub a_opt: f64,
    pub w_value: f64,
    pub w_bound: f64,
    pub delta_w: f64,
    pub sigma_delta_w: f64,
    pub non_gaussian: bool,
    /// The measured `p0` lies left of the `p1` maximum; `a_opt` is the `a → 0⁺` limit.
    pub clamped: bool,
}

/// Verdict threshold and correlation input for [`max_delta_w_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOptions {
    /// Certify non-Gaussianity only when `ΔW > sigma_k · σ_ΔW`.
    pub sigma_k: f64,
    /// Covariance of the `p0` and `p1` estimates.
    pub cov_p0_p1: f64,
    pub r_max: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            sigma_k: 3.0,
            cov_p0_p1: 0.0,
            r_max: DEFAULT_R_MAX,
        }
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is not finite and non-negative")))
    }
}

/// `(p0, p1)` of the pure Gaussian state with squeezing `r` and displacement `d`:
/// `p0 = e^{−d²(1−tanh r)}/cosh r`, `p1 = d²·e^{−d²(1−tanh r)}/cosh³ r`.
pub fn gaussian_p01(params: GaussianPureParams) -> Result<ProbabilityPair> {
    params.validate()?;
    let GaussianPureParams { r, d } = params;
    let d2 = d * d;
    // 1 - tanh r = 2/(e^{2r} + 1), exact for large r where tanh saturates
    let weight = (-d2 * 2.0 / ((2.0 * r).exp() + 1.0)).exp();
    let c = r.cosh();
    Ok(ProbabilityPair {
        p0: weight / c,
        p1: d2 * weight / (c * c * c),
        sigma_p0: None,
        sigma_p1: None,
    })
}

/// Point of the Gaussian-mixture boundary at squeezing `r`.
///
/// Uses the simplified exponent `d²(1 − tanh r) = (e^{2r} − 1)/2` and
/// `d² = (e^{4r} − 1)/4 = expm1(2r)·(e^{2r} + 1)/4`.
pub fn boundary_point(r: f64) -> Result<ProbabilityPair> {
    check_nonneg("r", r)?;
    let em1 = (2.0 * r).exp_m1();
    let weight = (-0.5 * em1).exp();
    let d2 = 0.25 * em1 * (em1 + 2.0);
    let c = r.cosh();
    Ok(ProbabilityPair {
        p0: weight / c,
        p1: d2 * weight / (c * c * c),
        sigma_p0: None,
        sigma_p1: None,
    })
}

/// Extremal displacement `d = √((e^{4r} − 1)/4)` paired with squeezing `r` on the boundary.
pub fn boundary_displacement(r: f64) -> f64 {
    let em1 = (2.0 * r).exp_m1();
    (0.25 * em1 * (em1 + 2.0)).sqrt()
}

/// Slope `a = x(3 − x)/(1 + x)`, `x = e^{2r}`, of the witness line tangent at `boundary_point(r)`.
pub fn tangent_slope(r: f64) -> Result<f64> {
    if !(0.0..=R_P1_MAX).contains(&r) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "[0, ln(3)/2]",
        });
    }
    let x = (2.0 * r).exp();
    Ok((x * (3.0 - x) / (1.0 + x)).clamp(0.0, 1.0))
}

/// Tangent squeezing for slope `a`: the root `x ≥ 1` of `x² + (a − 3)x + a = 0`, `r = ln(x)/2`.
pub fn tangent_r(a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::OutOfRange {
            name: "a",
            value: a,
            range: "(0, 1]",
        });
    }
    let disc = ((a - 1.0) * (a - 9.0)).max(0.0);
    let x = 0.5 * ((3.0 - a) + disc.sqrt());
    Ok(0.5 * x.ln().max(0.0))
}

/// Gaussian-mixture maximum `W_G(a)` of the witness `a·p0 + p1`.
pub fn wg_bound(a: f64) -> Result<f64> {
    let r = tangent_r(a)?;
    Ok(boundary_point(r)?.witness(a))
}

/// Inverts the boundary's strictly decreasing `p0(r)` by bisection on `[0, r_max]`.
pub fn solve_r_for_p0(p0: f64, r_max: f64) -> Result<f64> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::param("r_max", "must be finite and positive"));
    }
    if p0 == 1.0 {
        return Ok(0.0);
    }
    let p0_min = boundary_point(r_max)?.p0;
    if !(p0 > p0_min && p0 < 1.0) {
        return Err(Error::NoRoot(format!(
            "p0 = {p0} not in ({p0_min:e}, 1] reachable for r in [0, {r_max}]"
        )));
    }
    numeric::bisect(
        |r| boundary_point(r).map(|b| b.p0 - p0).unwrap_or(f64::NAN),
        0.0,
        r_max,
        R_TOL,
    )
    .ok_or_else(|| Error::NoRoot(format!("bisection failed for p0 = {p0}")))
}

/// Maximal witness gap with default options (`k = 3`, zero covariance).
pub fn max_delta_w(pair: &ProbabilityPair) -> Result<WitnessReport> {
    max_delta_w_with(pair, &WitnessOptions::default())
}

/// Maximal witness gap `ΔW = max_{a∈(0,1]} [a·p0 + p1 − W_G(a)]` by the envelope condition.
///
/// The optimal line is tangent to the boundary at the measured `p0`, so
/// `ΔW = p1 − p1_boundary(p0)`. Pairs with `p0` below the boundary point of
/// maximal `p1` take the `a → 0⁺` supremum `p1 − 3√3/(4e)` and are flagged.
pub fn max_delta_w_with(pair: &ProbabilityPair, opts: &WitnessOptions) -> Result<WitnessReport> {
    pair.validate()?;
    if opts.sigma_k.is_nan() || opts.sigma_k < 0.0 {
        return Err(Error::param("sigma_k", "must be non-negative"));
    }
    let p0_turn = boundary_point(R_P1_MAX)?.p0;

    let (a_opt, w_bound, clamped) = if pair.p0 <= p0_turn {
        (0.0, p1_gaussian_max(), true)
    } else {
        let r = solve_r_for_p0(pair.p0, opts.r_max)?;
        let a = tangent_slope(r.min(R_P1_MAX))?;
        let b = boundary_point(r)?;
        // a·p0_b + p1_b with p0_b = p0 to solver precision
        (a, a * pair.p0 + b.p1, false)
    };
    let w_value = pair.witness(a_opt);
    let delta_w = w_value - w_bound;

    let s0 = pair.sigma_p0.unwrap_or(0.0);
    let s1 = pair.sigma_p1.unwrap_or(0.0);
    let var = (a_opt * s0).powi(2) + s1 * s1 + 2.0 * a_opt * opts.cov_p0_p1;
    let sigma_delta_w = var.max(0.0).sqrt();

    Ok(WitnessReport {
        a_opt,
        w_value,
        w_bound,
        delta_w,
        sigma_delta_w,
        non_gaussian: delta_w > opts.sigma_k * sigma_delta_w && delta_w > 0.0,
        clamped,
    })
}

/// `ΔW(a)` at a fixed slope; `a = 0` is read as the `a → 0⁺` limit.
pub fn delta_w_at(pair: &ProbabilityPair, a: f64) -> Result<f64> {
    let bound = if a == 0.0 { p1_gaussian_max() } else { wg_bound(a)? };
    Ok(pair.witness(a) - bound)
}

/// Grid points of the dense scan in [`scan_delta_w`].
pub const SCAN_GRID: usize = 2000;

/// Maximizes `ΔW(a)` numerically: grid over `(0, 1]`, then golden-section refinement.
///
/// Independent of the tangent construction; returns `(a, ΔW)`.
pub fn scan_delta_w(pair: &ProbabilityPair) -> Result<(f64, f64)> {
    pair.validate()?;
    let a_min = 1e-12;
    let f = |a: f64| delta_w_at(pair, a).unwrap_or(f64::NEG_INFINITY);
    let grid: Vec<f64> = (0..=SCAN_GRID)
        .map(|i| (i as f64 / SCAN_GRID as f64).max(a_min))
        .collect();
    let (best, _) =
        grid.iter().map(|&a| f(a)).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(SCAN_GRID)];
    Ok(numeric::golden_max(f, lo, hi, 1e-11))
}

/// Whether the pair is compatible with a Gaussian mixture (`ΔW ≤ 0`).
pub fn in_gaussian_region(pair: &ProbabilityPair) -> Result<bool> {
    Ok(max_delta_w(pair)?.delta_w <= 0.0)
}

/// Total-photon-number `(p0, p1)` of a product of independent pure Gaussian modes.
pub fn multimode_p01(modes: &[GaussianPureParams]) -> Result<ProbabilityPair> {
    if modes.is_empty() {
        return Err(Error::param("modes", "at least one mode required"));
    }
    let (mut p0, mut p1) = (1.0, 0.0);
    for m in modes {
        let q = gaussian_p01(*m)?;
        // one photon in total: either already in earlier modes or in this one
        p1 = p1 * q.p0 + p0 * q.p1;
        p0 *= q.p0;
    }
    Ok(ProbabilityPair {
        p0,
        p1,
        sigma_p0: None,
        sigma_p1: None,
    })
}

/// Lower bound `(2p0 − 1)/π` on the Wigner function at the phase-space origin.
pub fn wigner_origin_bound(p0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::OutOfRange {
            name: "p0",
            value: p0,
            range: "[0, 1]",
        });
    }
    Ok((2.0 * p0 - 1.0) * FRAC_1_PI)
}

/// Wigner function at the origin, `(1/π)·Σ (−1)^n p_n`, over the explicit support.
pub fn wigner_origin(stats: &PhotonStatistics) -> f64 {
    let parity: f64 = stats
        .probs()
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    parity * FRAC_1_PI
}
