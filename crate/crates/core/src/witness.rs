//! Non-Gaussianity criteria on coincidence statistics.
//!
//! Both witnesses compare the success probability `P_s` against a curve in
//! the error probability `P_e`; light is certified non-Gaussian only strictly
//! above the curve.

use serde::Serialize;

use crate::error::{check_unit, Result};
use crate::photodetection::DetectorKind;

/// Coincidence probabilities fed to a witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoincidenceStats {
    pub p_s: f64,
    pub p_e: f64,
}

impl CoincidenceStats {
    pub fn new(p_s: f64, p_e: f64) -> Result<Self> {
        Ok(CoincidenceStats {
            p_s: check_unit("P_s", p_s)?,
            p_e: check_unit("P_e", p_e)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessVerdict {
    pub passed: bool,
    /// `P_s` minus the threshold at `P_e`.
    pub margin: f64,
}

/// Threshold for the two-SPAD-per-side setup:
/// `½·√(P_e/(8+P_e))·(2 + P_e + √(P_e(8+P_e)))`.
pub fn spad_threshold(p_e: f64) -> Result<f64> {
    check_unit("P_e", p_e)?;
    let root = (p_e * (8.0 + p_e)).sqrt();
    Ok(0.5 * (p_e / (8.0 + p_e)).sqrt() * (2.0 + p_e + root))
}

/// Threshold for PNRDs: `√P_e − P_e`.
pub fn pnrd_threshold(p_e: f64) -> Result<f64> {
    check_unit("P_e", p_e)?;
    Ok(p_e.sqrt() - p_e)
}

pub fn threshold(kind: DetectorKind, p_e: f64) -> Result<f64> {
    match kind {
        DetectorKind::Spad => spad_threshold(p_e),
        DetectorKind::Pnrd => pnrd_threshold(p_e),
    }
}

pub fn evaluate(kind: DetectorKind, stats: CoincidenceStats) -> WitnessVerdict {
    // CoincidenceStats is range-checked on construction
    let t = threshold(kind, stats.p_e).expect("P_e validated by CoincidenceStats");
    let margin = stats.p_s - t;
    WitnessVerdict {
        passed: margin > 0.0,
        margin,
    }
}
