//! Truncated photon-number distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization slack accepted by [`PhotonStatistics::new`].
pub const NORM_TOL: f64 = 1e-9;

/// Photon-number distribution `p_0..p_N` plus the probability mass beyond `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    probs: Vec<f64>,
    tail: f64,
}

impl PhotonStatistics {
    pub fn new(probs: Vec<f64>, tail: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("probs", "empty distribution"));
        }
        if let Some(bad) = probs
            .iter()
            .chain(std::iter::once(&tail))
            .find(|p| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::param(
                "probs",
                format!("entry {bad} is not a finite non-negative probability"),
            ));
        }
        let total = probs.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(PhotonStatistics { probs, tail })
    }

    /// Distribution with finite support and no tail.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs, 0.0)
    }

    pub fn vacuum() -> Self {
        PhotonStatistics {
            probs: vec![1.0],
            tail: 0.0,
        }
    }

    /// Pure Fock state `|n⟩`.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        PhotonStatistics { probs, tail: 0.0 }
    }

    /// Poisson distribution of the given mean truncated at `n_max`, remainder in the tail.
    pub fn poisson(mean: f64, n_max: usize) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::param("mean", "must be finite and non-negative"));
        }
        if n_max > crate::photon_sim::N_MAX_LIMIT {
            return Err(Error::param(
                "n_max",
                format!("{n_max} above {}", crate::photon_sim::N_MAX_LIMIT),
            ));
        }
        let probs = poisson_pmf(mean, n_max);
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Self::new(probs, tail)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Largest photon number carried explicitly.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `p_n`, zero beyond the explicit support.
    pub fn p(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Mean photon number of the explicit support.
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Total mass `Σ p_n + tail`.
    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail
    }

    pub(crate) fn from_parts_unchecked(probs: Vec<f64>, tail: f64) -> Self {
        PhotonStatistics { probs, tail }
    }
}

/// Poisson probabilities `0..=n_max` computed by recurrence.
pub(crate) fn poisson_pmf(mean: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = (-mean).exp();
    out.push(term);
    for n in 1..=n_max {
        term *= mean / n as f64;
        out.push(term);
    }
    out
}
