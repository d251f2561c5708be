//! Heralded single-photon source and two-detector click model.
//!
//! Pairs follow a thermal (two-mode squeezed vacuum) distribution
//! `P(n) = (1 − λ²) λ^{2n}`. The trigger fires with probability
//! `1 − (1 − q)(1 − η_t)^n`, where `q` is the spurious (dark/noise) click
//! probability. Conditioning on the trigger gives the heralded signal
//! distribution, which is then thinned by the signal efficiency and mixed
//! with Poissonian background before the beam splitter.
//!
//! Random counts are drawn from the exact outcome probabilities. Trials are
//! cut into fixed blocks; block `i` uses a ChaCha8 generator seeded with
//! `seed` on stream `i`, so the merged counts do not depend on how blocks
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_joint, ClickCounts, ClickFractions};
use crate::stats::{poisson_pmf, PhotonStatistics};

/// Largest tail mass allowed beyond `n_max`.
pub const MAX_TAIL: f64 = 1e-10;

/// Trials per RNG stream.
pub const BLOCK_TRIALS: u64 = 1 << 20;

/// Largest accepted photon-number truncation.
pub const N_MAX_LIMIT: usize = 1000;

fn default_n_max() -> usize {
    12
}

/// Heralded source and detection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Thermal pair parameter λ in `[0, 1)`.
    pub pair_gain: f64,
    pub trigger_efficiency: f64,
    /// Overall signal transmittance η, coupling and detection included.
    pub signal_efficiency: f64,
    /// Effective beam-splitter transmittance towards detector A.
    pub splitter_t: f64,
    /// Mean background photons per window in the signal arm.
    pub noise_signal_mean: f64,
    /// Probability of a spurious trigger click per window.
    pub noise_trigger_click_prob: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            pair_gain: 0.1,
            trigger_efficiency: 0.5,
            signal_efficiency: 0.15,
            splitter_t: 0.52,
            noise_signal_mean: 0.0,
            noise_trigger_click_prob: 0.0,
            n_max: default_n_max(),
            trials: 10_000_000,
            seed: 0,
        }
    }
}

fn check_prob(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, 1]",
        })
    }
}

impl SourceConfig {
    /// Range checks plus the truncation tail check on the heralded signal.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.pair_gain) {
            return Err(Error::OutOfRange {
                name: "pair_gain",
                value: self.pair_gain,
                range: "[0, 1)",
            });
        }
        check_prob("trigger_efficiency", self.trigger_efficiency)?;
        check_prob("signal_efficiency", self.signal_efficiency)?;
        check_prob("noise_trigger_click_prob", self.noise_trigger_click_prob)?;
        if !(self.splitter_t > 0.0 && self.splitter_t < 1.0) {
            return Err(Error::OutOfRange {
                name: "splitter_t",
                value: self.splitter_t,
                range: "(0, 1)",
            });
        }
        if !(self.noise_signal_mean.is_finite() && self.noise_signal_mean >= 0.0) {
            return Err(Error::param("noise_signal_mean", "must be finite and non-negative"));
        }
        if !(4..=N_MAX_LIMIT).contains(&self.n_max) {
            return Err(Error::param(
                "n_max",
                format!("{} outside [4, {N_MAX_LIMIT}]", self.n_max),
            ));
        }
        signal_at_splitter(self).map(|_| ())
    }
}

/// Per-window outcome probabilities of the two detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    pub p_none: f64,
    pub p_a_only: f64,
    pub p_b_only: f64,
    pub p_coinc: f64,
}

impl ClickProbabilities {
    pub fn fractions(&self) -> ClickFractions {
        ClickFractions {
            a: self.p_a_only,
            b: self.p_b_only,
            coinc: self.p_coinc,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_none + self.p_a_only + self.p_b_only + self.p_coinc
    }
}

/// Heralded signal photon-number distribution before signal loss.
pub fn pdc_heralded_stats(config: &SourceConfig) -> Result<PhotonStatistics> {
    let l2 = config.pair_gain * config.pair_gain;
    let q = config.noise_trigger_click_prob;
    let miss = 1.0 - config.trigger_efficiency;
    let ln_miss = (-config.trigger_efficiency).ln_1p();
    let n_max = config.n_max;

    // herald probability for n pairs, 1 - (1-q)(1-eta_t)^n without cancellation
    let herald = |n: usize| -> f64 {
        let all_missed = if n == 0 { 0.0 } else { -(n as f64 * ln_miss).exp_m1() };
        let all_missed = if miss == 0.0 && n > 0 { 1.0 } else { all_missed };
        q + (1.0 - q) * all_missed
    };

    let mut weights = Vec::with_capacity(n_max + 1);
    let mut pn = 1.0 - l2;
    for n in 0..=n_max {
        weights.push(pn * herald(n));
        pn *= l2;
    }
    let k = n_max as i32 + 1;
    let tail_weight = if l2 == 0.0 {
        0.0
    } else {
        let y = miss.powi(k) * (1.0 - l2) / (1.0 - l2 * miss);
        (l2.powi(k) * (1.0 - (1.0 - q) * y)).max(0.0)
    };
    let z = weights.iter().sum::<f64>() + tail_weight;
    if z.is_nan() || z <= 0.0 {
        return Err(Error::Config {
            path: "pair_gain".into(),
            reason: "no heralding events possible (pair_gain, trigger_efficiency and noise_trigger_click_prob give zero trigger rate)".into(),
        });
    }
    let tail = tail_weight / z;
    if tail >= MAX_TAIL {
        return Err(Error::TruncationOverflow { tail, n_max });
    }
    let probs = weights.into_iter().map(|w| w / z).collect();
    Ok(PhotonStatistics::from_parts_unchecked(probs, tail))
}

/// Loss channel of transmittance `eta`: binomial thinning of each photon-number term.
///
/// Tail mass stays in the tail except at `eta = 0`, where everything ends in vacuum.
pub fn apply_loss(stats: &PhotonStatistics, eta: f64) -> Result<PhotonStatistics> {
    check_prob("eta", eta)?;
    let total = stats.total();
    if (total - 1.0).abs() > crate::stats::NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    if eta == 0.0 {
        let mut probs = vec![0.0; stats.probs().len()];
        probs[0] = 1.0;
        return Ok(PhotonStatistics::from_parts_unchecked(probs, 0.0));
    }
    let lost = 1.0 - eta;
    let n_max = stats.n_max();
    let mut out = vec![0.0; n_max + 1];
    for (n, &p) in stats.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        // C(n, m) built up along m
        let mut binom = 1.0;
        for (m, slot) in out.iter_mut().enumerate().take(n + 1) {
            if m > 0 {
                binom *= (n - m + 1) as f64 / m as f64;
            }
            *slot += p * binom * eta.powi(m as i32) * lost.powi((n - m) as i32);
        }
    }
    Ok(PhotonStatistics::from_parts_unchecked(out, stats.tail()))
}

/// Adds independent Poissonian background of the given mean (photon-number convolution).
///
/// Mass pushed past the current truncation joins the tail.
pub fn add_poisson_noise(stats: &PhotonStatistics, mean: f64) -> Result<PhotonStatistics> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::param("mean", "must be finite and non-negative"));
    }
    if mean == 0.0 {
        return Ok(stats.clone());
    }
    let n_max = stats.n_max();
    let noise = poisson_pmf(mean, n_max);
    let mut out = vec![0.0; n_max + 1];
    for (n, &p) in stats.probs().iter().enumerate() {
        for (k, &w) in noise.iter().enumerate().take(n_max + 1 - n) {
            out[n + k] += p * w;
        }
    }
    let kept: f64 = out.iter().sum();
    let tail = (stats.total() - kept).max(0.0);
    Ok(PhotonStatistics::from_parts_unchecked(out, tail))
}

/// Exact outcome probabilities of the split-detection scheme with perfect on/off detectors.
///
/// For `n` signal photons detector A stays dark with probability
/// `(1 − T)ⁿ e^{−noise_a}` and B with `Tⁿ e^{−noise_b}`. Tail mass is
/// counted as coincidences, the large-`n` limit.
pub fn click_probabilities_exact(
    stats: &PhotonStatistics,
    t: f64,
    noise_a: f64,
    noise_b: f64,
) -> Result<ClickProbabilities> {
    let total = stats.total();
    if (total - 1.0).abs() > crate::stats::NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "(0, 1)",
        });
    }
    for (name, v) in [("noise_a", noise_a), ("noise_b", noise_b)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(name, "must be finite and non-negative"));
        }
    }
    let dark_a = (-noise_a).exp();
    let dark_b = (-noise_b).exp();
    let s = 1.0 - t;
    let p0 = stats.p(0);

    let p_none = p0 * dark_a * dark_b;
    let mut p_a_only = p0 * dark_b * (1.0 - dark_a);
    let mut p_b_only = p0 * dark_a * (1.0 - dark_b);
    let mut p_coinc = p0 * (-noise_a).exp_m1() * (-noise_b).exp_m1();
    for (n, &p) in stats.probs().iter().enumerate().skip(1) {
        let all_a = t.powi(n as i32) * dark_b;
        let all_b = s.powi(n as i32) * dark_a;
        p_a_only += p * all_a;
        p_b_only += p * all_b;
        p_coinc += p * (1.0 - all_a - all_b);
    }
    p_coinc += stats.tail();
    Ok(ClickProbabilities {
        p_none,
        p_a_only,
        p_b_only,
        p_coinc,
    })
}

fn clamp_prob(p: f64) -> f64 {
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

fn binomial<R: rand::Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    let p = clamp_prob(p);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|b| b.sample(rng)).unwrap_or(0)
}

fn sample_block(probs: &ClickProbabilities, trials: u64, seed: u64, stream: u64) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // sequential conditional binomials give a multinomial draw
    let mut remaining = trials;
    let mut mass = probs.total();
    let mut out = [0u64; 3];
    for (slot, p) in [probs.p_a_only, probs.p_b_only, probs.p_coinc].into_iter().enumerate() {
        let k = if mass > 0.0 {
            binomial(&mut rng, remaining, p / mass)
        } else {
            0
        };
        out[slot] = k;
        remaining -= k;
        mass -= p;
    }
    out
}

/// Multinomial draw of `r0` windows over the four outcomes, deterministic in `seed`.
pub fn sample_counts(probs: &ClickProbabilities, r0: u64, seed: u64) -> ClickCounts {
    sample_counts_blocked(probs, r0, seed, BLOCK_TRIALS)
}

/// [`sample_counts`] with an explicit partition plan of `block` trials per stream.
pub fn sample_counts_blocked(probs: &ClickProbabilities, r0: u64, seed: u64, block: u64) -> ClickCounts {
    let block = block.max(1);
    let n_blocks = r0.div_ceil(block);
    let sums = (0..n_blocks)
        .into_par_iter()
        .map(|i| {
            let trials = block.min(r0 - i * block);
            sample_block(probs, trials, seed, i)
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    ClickCounts {
        r0,
        r1a: sums[0],
        r1b: sums[1],
        r2: sums[2],
        duration_s: None,
    }
}

/// Heralded, lossy, noisy signal as it reaches the beam splitter.
pub fn signal_at_splitter(config: &SourceConfig) -> Result<PhotonStatistics> {
    let heralded = pdc_heralded_stats(config)?;
    let lossy = apply_loss(&heralded, config.signal_efficiency)?;
    let noisy = add_poisson_noise(&lossy, config.noise_signal_mean)?;
    if noisy.tail() >= MAX_TAIL {
        return Err(Error::TruncationOverflow {
            tail: noisy.tail(),
            n_max: config.n_max,
        });
    }
    Ok(noisy)
}

/// Exact click probabilities of a configured source.
///
/// Background enters as independent Poisson means `T·μ` and `(1 − T)·μ` per detector.
pub fn source_click_probabilities(config: &SourceConfig) -> Result<ClickProbabilities> {
    config.validate()?;
    let heralded = pdc_heralded_stats(config)?;
    let lossy = apply_loss(&heralded, config.signal_efficiency)?;
    let mu = config.noise_signal_mean;
    click_probabilities_exact(
        &lossy,
        config.splitter_t,
        config.splitter_t * mu,
        (1.0 - config.splitter_t) * mu,
    )
}

/// Samples a run of `config.trials` heralds and returns it with the true signal statistics.
pub fn run_experiment(config: &SourceConfig) -> Result<(ClickCounts, PhotonStatistics)> {
    let probs = source_click_probabilities(config)?;
    let truth = signal_at_splitter(config)?;
    Ok((sample_counts(&probs, config.trials, config.seed), truth))
}

/// Bootstrap standard deviations of `(p0, p1_est)`: multinomial resampling of the
/// observed outcome fractions at fixed `R0`.
pub fn bootstrap_p01(counts: &ClickCounts, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let f = counts.fractions()?;
    let probs = ClickProbabilities {
        p_none: f.p0(),
        p_a_only: f.a,
        p_b_only: f.b,
        p_coinc: f.coinc,
    };
    let mut p0s = Vec::with_capacity(resamples);
    let mut p1s = Vec::with_capacity(resamples);
    for i in 0..resamples {
        let c = sample_counts(&probs, counts.r0, seed.wrapping_add(i as u64));
        let j = estimate_joint(&c)?;
        p0s.push(j.p0.value);
        p1s.push(j.p1.value);
    }
    Ok((std_dev(&p0s), std_dev(&p1s)))
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
