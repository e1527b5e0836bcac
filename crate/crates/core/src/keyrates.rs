//! Binary entropy, the CHSH/QBER correlation family and Devetak-Winter key
//! rates for device-independent QKD and entanglement-based BB84.
//!
//! Rates are the right-hand sides of the collective-attack lower bounds, in
//! bits per sifted pair. They are allowed to go negative; a negative value
//! simply means no key can be distilled.

use serde::Serialize;
use std::f64::consts::SQRT_2;

use crate::error::{check_unit, Error, Result};

/// Maximal CHSH value, 2√2.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Round-off slack admitted above [`TSIRELSON_BOUND`].
pub const BELL_SLACK: f64 = 1e-9;

/// Quantum bit error rate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Qber(f64);

impl Qber {
    pub fn new(value: f64) -> Result<Self> {
        check_unit("Q", value).map(Qber)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// CHSH score `S`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct BellParameter(f64);

impl BellParameter {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || !(0.0..=TSIRELSON_BOUND + BELL_SLACK).contains(&value) {
            return Err(Error::Domain {
                name: "S",
                value,
                domain: "[0, 2*sqrt(2)]",
            });
        }
        Ok(BellParameter(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether the score violates the local bound `S ≤ 2`.
    pub fn violates_chsh(self) -> bool {
        self.0 > 2.0
    }
}

/// Key rates for both protocols at one `(Q, S)` point.
///
/// When `di_defined` is false the Bell inequality is not violated and `di`
/// holds the sentinel `0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRates {
    pub bb84: f64,
    pub di: f64,
    pub di_defined: bool,
}

impl KeyRates {
    pub fn evaluate(q: Qber, s: BellParameter) -> Result<Self> {
        let bb84 = dw_rate_bb84(q, s)?;
        let (di, di_defined) = dw_rate_di(q, s)?;
        Ok(KeyRates {
            bb84,
            di,
            di_defined,
        })
    }

    pub fn bb84_secure(&self) -> bool {
        self.bb84 > 0.0
    }

    pub fn di_secure(&self) -> bool {
        self.di_defined && self.di > 0.0
    }
}

/// Standard binary entropy in bits, with `0·log 0 := 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    check_unit("q", q)?;
    if q == 0.0 || q == 1.0 {
        return Ok(0.0);
    }
    Ok(-q * q.log2() - (1.0 - q) * (1.0 - q).log2())
}

/// The CHSH-optimal correlation family `S = 2√2(1 − 2Q)`.
pub fn bell_from_qber(q: Qber) -> Result<BellParameter> {
    if q.0 > 0.5 {
        return Err(Error::Domain {
            name: "Q",
            value: q.0,
            domain: "[0, 1/2] for the CHSH correlation family",
        });
    }
    BellParameter::new(TSIRELSON_BOUND * (1.0 - 2.0 * q.0))
}

// Snap arguments that left [0, 1] only through round-off.
fn snap_unit(x: f64) -> f64 {
    if (-BELL_SLACK..0.0).contains(&x) {
        0.0
    } else if x > 1.0 && x <= 1.0 + BELL_SLACK {
        1.0
    } else {
        x
    }
}

/// `1 − h(Q) − h(Q + S/(2√2))`.
pub fn dw_rate_bb84(q: Qber, s: BellParameter) -> Result<f64> {
    let arg = snap_unit(q.0 + s.0 / TSIRELSON_BOUND);
    let penalty = binary_entropy(arg).map_err(|_| Error::Domain {
        name: "Q + S/(2*sqrt(2))",
        value: arg,
        domain: "[0, 1]",
    })?;
    Ok(1.0 - binary_entropy(q.0)? - penalty)
}

/// `1 − h(Q) − h((1 + √((S/2)² − 1))/2)`, defined only for `S > 2`.
///
/// Returns `(0.0, false)` without a CHSH violation.
pub fn dw_rate_di(q: Qber, s: BellParameter) -> Result<(f64, bool)> {
    let hq = binary_entropy(q.0)?;
    if !s.violates_chsh() {
        return Ok((0.0, false));
    }
    let half = s.0 / 2.0;
    let arg = snap_unit((1.0 + (half * half - 1.0).sqrt()) / 2.0);
    Ok((1.0 - hq - binary_entropy(arg)?, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Protocol {
    Bb84,
    Di,
}

/// Rate along the correlation family, with undefined DI rates mapped to `-∞`
/// so the family has a total order.
pub fn rate_on_family(protocol: Protocol, q: f64) -> Result<f64> {
    let q = Qber::new(q)?;
    let s = bell_from_qber(q)?;
    match protocol {
        Protocol::Bb84 => dw_rate_bb84(q, s),
        Protocol::Di => match dw_rate_di(q, s)? {
            (r, true) => Ok(r),
            (_, false) => Ok(f64::NEG_INFINITY),
        },
    }
}

/// Largest QBER on the correlation family with a positive rate, found by
/// bisection on `[0, 1/2]`.
pub fn security_threshold(protocol: Protocol) -> Qber {
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if rate_on_family(protocol, mid).expect("midpoint lies in [0, 1/2]") > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Qber(lo)
}
