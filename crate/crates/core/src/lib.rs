//! Non-Gaussianity and security of entanglement-based QKD links.
//!
//! Given channel coupling, noise statistics and detector imperfections, the
//! library computes the QBER and CHSH score of a Werner-state link, the
//! Devetak-Winter key rates for BB84 and DI-QKD, and whether the detected
//! light passes a non-Gaussianity witness. [`scan`] traces the boundaries of
//! those regions over the (transmittance, noise mean) plane.

pub mod channels;
pub mod error;
pub mod keyrates;
pub mod photodetection;
pub mod scan;
pub mod witness;

pub use channels::{assess, ChannelConfig, LinkAssessment, NoiseModel, NoiseStatistics};
pub use error::{Error, Result};
pub use keyrates::{BellParameter, KeyRates, Protocol, Qber};
pub use photodetection::{DetectorKind, DetectorModel, PhotocountDistribution, TruncationPolicy};
pub use scan::{BoundaryCurve, Criterion, LinkSettings, ScanConfig, Search};
