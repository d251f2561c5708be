//! Quantum non-Gaussianity witness for heralded single-photon sources.
//!
//! * [`witness`]: Gaussian-mixture boundary in the `(p0, p1)` plane, the
//!   witness bound `W_G(a)` and the maximal violation `ΔW`.
//! * [`estimators`]: `p0`, `p1` and splitting-ratio estimates from
//!   trigger-conditioned click counts, with Poissonian errors, plus `g²(0)`
//!   and the anticorrelation parameter `α`.
//! * [`photon_sim`]: exact and Monte Carlo model of a heralded PDC source
//!   observed with a beam splitter and two on/off detectors.
//! * [`io`]: CSV/JSON formats, analysis pipeline, bundled reference data.

pub mod error;
pub mod estimators;
pub mod io;
pub mod numeric;
pub mod photon_sim;
pub mod stats;
pub mod witness;

pub use error::{Error, Result};
pub use estimators::{ClickCounts, EstimateWithError, JointEstimate};
pub use photon_sim::{ClickProbabilities, SourceConfig};
pub use stats::PhotonStatistics;
pub use witness::{GaussianPureParams, ProbabilityPair, WitnessOptions, WitnessReport};
