//! Source, channel noise and detection combined into the observables of a
//! link: QBER, CHSH score, key rates and the witness coincidence statistics.
//!
//! The source emits `|Φ⁺⟩`, depolarised into a Werner state of weight `p`.
//! Each polarisation mode is coupled to a noise mode on a beam splitter of
//! transmittance `T`, identically on both sides. Two noise models are
//! supported, each with the detector the analysis pairs it with:
//!
//! * single-mode thermal noise, detected by PNRDs;
//! * multimode (Poissonian) noise, folded into an effective SPAD.

use serde::Serialize;

use crate::error::{check_nonneg, check_unit, Error, Result};
use crate::keyrates::{bell_from_qber, BellParameter, KeyRates, Qber};
use crate::photodetection::{
    detect_pmf, photocount_pmf, DetectorKind, DetectorModel, TruncationPolicy,
};
use crate::witness::{self, CoincidenceStats, WitnessVerdict};

/// Below this the coincidence normalisation is treated as zero.
pub const COINCIDENCE_FLOOR: f64 = 1e-30;

/// Name of the (T, nbar, detector) → (eta_eff, d_eff) mapping used for
/// Poissonian noise.
pub const EFFECTIVE_MAPPING: &str = "eta_eff = T*eta; d_eff = dark + eta*(1-T)*nbar";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub transmittance: f64,
    /// Werner weight of `|Φ⁺⟩`.
    pub p: f64,
}

impl ChannelConfig {
    pub fn new(transmittance: f64, p: f64) -> Result<Self> {
        Ok(ChannelConfig {
            transmittance: check_unit("T", transmittance)?,
            p: check_unit("p", p)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseStatistics {
    #[serde(rename = "thermal")]
    SingleModeThermal,
    #[serde(rename = "poisson")]
    PoissonianMultimode,
}

impl NoiseStatistics {
    pub fn name(self) -> &'static str {
        match self {
            NoiseStatistics::SingleModeThermal => "thermal",
            NoiseStatistics::PoissonianMultimode => "poisson",
        }
    }

    /// The detector this noise model is analysed with.
    pub fn paired_detector(self) -> DetectorKind {
        match self {
            NoiseStatistics::SingleModeThermal => DetectorKind::Pnrd,
            NoiseStatistics::PoissonianMultimode => DetectorKind::Spad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub statistics: NoiseStatistics,
    pub nbar: f64,
}

impl NoiseModel {
    pub fn new(statistics: NoiseStatistics, nbar: f64) -> Result<Self> {
        Ok(NoiseModel {
            statistics,
            nbar: check_nonneg("nbar", nbar)?,
        })
    }
}

/// Full evaluation of a link at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkAssessment {
    pub q: Qber,
    pub s: BellParameter,
    pub rates: KeyRates,
    pub stats: CoincidenceStats,
    pub witness: WitnessVerdict,
    pub nongauss: bool,
    /// False when no coincidences occur; `q` is then reported as 1/2.
    pub coincidence_defined: bool,
    /// Detector seen by the closed forms, for the Poissonian model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_detector: Option<DetectorModel>,
}

impl LinkAssessment {
    fn build(
        q: f64,
        stats: CoincidenceStats,
        kind: DetectorKind,
        coincidence_defined: bool,
        effective_detector: Option<DetectorModel>,
    ) -> Result<Self> {
        let q = if coincidence_defined {
            q.clamp(0.0, 0.5)
        } else {
            0.5
        };
        let q = Qber::new(q)?;
        let s = bell_from_qber(q)?;
        let rates = KeyRates::evaluate(q, s)?;
        let witness = witness::evaluate(kind, stats);
        Ok(LinkAssessment {
            q,
            s,
            rates,
            stats,
            witness,
            nongauss: coincidence_defined && witness.passed,
            coincidence_defined,
            effective_detector,
        })
    }

    pub fn bb84_secure(&self) -> bool {
        self.coincidence_defined && self.rates.bb84_secure()
    }

    pub fn di_secure(&self) -> bool {
        self.coincidence_defined && self.rates.di_secure()
    }
}

/// Thermal-noise link with PNRDs.
///
/// Detected probabilities `p_{sl}` (s counts for an incident `|l⟩`) enter
/// `N = (p₁₁p₀₀ + p₁₀p₀₁)²`, `Q = (4p·p₁₁p₀₀p₀₁p₁₀ + (1−p)N)/(2N)`,
/// `P_s = p₁₁²` and `P_e = 1 − p₀₁ − p₁₁`.
pub fn thermal_observables(
    cfg: &ChannelConfig,
    noise: &NoiseModel,
    det: &DetectorModel,
    policy: &TruncationPolicy,
) -> Result<LinkAssessment> {
    require_pairing(
        noise.statistics,
        det.kind,
        NoiseStatistics::SingleModeThermal,
    )?;

    let t = cfg.transmittance;
    let vacuum = detect_pmf(&photocount_pmf(0, noise.nbar, t, policy)?, det);
    let single = detect_pmf(&photocount_pmf(1, noise.nbar, t, policy)?, det);
    let (p00, p10) = (vacuum.zero, vacuum.one);
    let (p01, p11) = (single.zero, single.one);

    let n = (p11 * p00 + p10 * p01).powi(2);
    let defined = n >= COINCIDENCE_FLOOR;
    let q = if defined {
        (4.0 * cfg.p * p11 * p00 * p01 * p10 + (1.0 - cfg.p) * n) / (2.0 * n)
    } else {
        0.5
    };
    let stats = CoincidenceStats::new((p11 * p11).min(1.0), (1.0 - p01 - p11).clamp(0.0, 1.0))?;
    LinkAssessment::build(q, stats, DetectorKind::Pnrd, defined, None)
}

/// Multimode noise absorbed into a SPAD with effective parameters, followed
/// by the closed-form `Q`, `P_s` and `P_e`.
pub fn poisson_observables(
    cfg: &ChannelConfig,
    noise: &NoiseModel,
    det: &DetectorModel,
) -> Result<LinkAssessment> {
    require_pairing(
        noise.statistics,
        det.kind,
        NoiseStatistics::PoissonianMultimode,
    )?;

    let eff = effective_detector(cfg.transmittance, noise.nbar, det)?;
    let (eta, d) = (eff.eta, eff.dark);
    let em1 = d.exp_m1();
    // 2 + e^d(η−2) − 2η, rewritten as −(η + (2−η)(e^d − 1))
    let denom = eta + (2.0 - eta) * em1;
    let denom_sq = denom * denom;
    let defined = denom_sq >= COINCIDENCE_FLOOR;

    let q = if defined {
        let num = d.exp() * eta;
        0.5 - cfg.p * num * num / (2.0 * denom_sq)
    } else {
        0.5
    };
    let decay = (-4.0 * d).exp();
    let p_s = 0.25 * decay * denom_sq;
    // (1 − e^d)(1−η)(1−η−e^d) with both negative factors flipped
    let p_e = decay * em1 * (1.0 - eta) * (eta + em1);
    let stats = CoincidenceStats::new(p_s.clamp(0.0, 1.0), p_e.clamp(0.0, 1.0))?;
    LinkAssessment::build(q, stats, DetectorKind::Spad, defined, Some(eff))
}

/// SPAD equivalent to a detector behind a multimode-noise coupler: the
/// signal survives with `T`, and `(1−T)·nbar` noise photons reach the
/// detector as extra Poissonian dark counts.
pub fn effective_detector(
    transmittance: f64,
    nbar: f64,
    det: &DetectorModel,
) -> Result<DetectorModel> {
    check_unit("T", transmittance)?;
    check_nonneg("nbar", nbar)?;
    DetectorModel::new(
        det.kind,
        transmittance * det.eta,
        det.dark + det.eta * (1.0 - transmittance) * nbar,
    )
}

fn require_pairing(
    noise: NoiseStatistics,
    kind: DetectorKind,
    expected: NoiseStatistics,
) -> Result<()> {
    if noise != expected || kind != expected.paired_detector() {
        return Err(Error::UnsupportedPairing {
            noise: noise.name(),
            detector: kind.name(),
        });
    }
    Ok(())
}

/// Evaluates a link with whichever model matches `noise.statistics`.
pub fn assess(
    cfg: &ChannelConfig,
    noise: &NoiseModel,
    det: &DetectorModel,
    policy: &TruncationPolicy,
) -> Result<LinkAssessment> {
    match noise.statistics {
        NoiseStatistics::SingleModeThermal => thermal_observables(cfg, noise, det, policy),
        NoiseStatistics::PoissonianMultimode => poisson_observables(cfg, noise, det),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn thermal(t: f64, nbar: f64, p: f64, det: DetectorModel) -> LinkAssessment {
        thermal_observables(
            &ChannelConfig::new(t, p).unwrap(),
            &NoiseModel::new(NoiseStatistics::SingleModeThermal, nbar).unwrap(),
            &det,
            &TruncationPolicy::default(),
        )
        .unwrap()
    }

    fn poisson(t: f64, nbar: f64, p: f64, det: DetectorModel) -> LinkAssessment {
        poisson_observables(
            &ChannelConfig::new(t, p).unwrap(),
            &NoiseModel::new(NoiseStatistics::PoissonianMultimode, nbar).unwrap(),
            &det,
        )
        .unwrap()
    }

    const PNRD: DetectorModel = DetectorModel {
        kind: DetectorKind::Pnrd,
        eta: 1.0,
        dark: 0.0,
    };

    #[test]
    fn thermal_decoupled() {
        for p in [1.0, 0.8, 0.3] {
            let a = thermal(1.0, 3.0, p, PNRD);
            assert_abs_diff_eq!(a.q.value(), (1.0 - p) / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn thermal_reference_point() {
        // p₀₁ = 4/9, p₁₁ = 8/27, p₀₀ = 2/3, p₁₀ = 2/9 from the geometric series
        let a = thermal(0.5, 1.0, 1.0, PNRD);
        assert!(a.coincidence_defined);
        assert_abs_diff_eq!(a.q.value(), 4.0 / 9.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.stats.p_s, (8.0f64 / 27.0).powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(a.stats.p_e, 7.0 / 27.0, epsilon = 1e-9);
        assert!(!a.nongauss);
        assert_abs_diff_eq!(a.s.value(), 2.0 * 2f64.sqrt() / 9.0, epsilon = 1e-8);
    }

    #[test]
    fn thermal_no_coincidences() {
        let a = thermal(0.0, 0.0, 1.0, PNRD);
        assert!(!a.coincidence_defined);
        assert!(!a.nongauss && !a.bb84_secure() && !a.di_secure());
    }

    #[test]
    fn thermal_pure_loss_is_error_free() {
        for t in [0.05, 0.3, 0.77, 1.0] {
            let a = thermal(t, 0.0, 1.0, PNRD);
            assert_abs_diff_eq!(a.q.value(), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(a.stats.p_e, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn thermal_qber_nondecreasing_in_noise() {
        for t in [0.4, 0.6, 0.8] {
            let qs: Vec<f64> = (0..20)
                .map(|i| thermal(t, 0.05 * i as f64, 1.0, PNRD).q.value())
                .collect();
            for w in qs.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "T = {t}: {qs:?}");
                assert!(w[1] - w[0] < 0.1);
            }
        }
    }

    #[test]
    fn thermal_rejects_spad() {
        let cfg = ChannelConfig::new(0.5, 1.0).unwrap();
        let noise = NoiseModel::new(NoiseStatistics::SingleModeThermal, 0.2).unwrap();
        let det = DetectorModel::perfect(DetectorKind::Spad);
        assert!(matches!(
            thermal_observables(&cfg, &noise, &det, &TruncationPolicy::default()),
            Err(Error::UnsupportedPairing { .. })
        ));
    }

    #[test]
    fn effective_detector_examples() {
        let det = DetectorModel::new(DetectorKind::Spad, 0.7, 0.001).unwrap();
        let e = effective_detector(1.0, 4.0, &det).unwrap();
        assert_eq!((e.eta, e.dark), (0.7, 0.001));

        let e = effective_detector(0.5, 0.0, &DetectorModel::perfect(DetectorKind::Spad)).unwrap();
        assert_eq!((e.eta, e.dark), (0.5, 0.0));

        let det = DetectorModel::new(DetectorKind::Spad, 0.5, 0.01).unwrap();
        let e = effective_detector(0.5, 0.2, &det).unwrap();
        assert_abs_diff_eq!(e.eta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(e.dark, 0.06, epsilon = 1e-15);
    }

    // The closed forms exactly as printed, used as a second route.
    fn printed_forms(eta: f64, d: f64, p: f64) -> (f64, f64, f64) {
        let base = 2.0 + d.exp() * (eta - 2.0) - 2.0 * eta;
        let q = 0.5 - (2.0 * d).exp() * p * eta * eta / (2.0 * base * base);
        let p_s = 0.25 * (-4.0 * d).exp() * base * base;
        let p_e = (-4.0 * d).exp() * (1.0 - d.exp()) * (1.0 - eta) * (1.0 - eta - d.exp());
        (q, p_s, p_e)
    }

    #[test]
    fn poisson_matches_printed_forms() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let eta: f64 = rng.gen_range(0.05..1.0);
            let d: f64 = rng.gen_range(0.0..0.5);
            let p: f64 = rng.gen_range(0.0..=1.0);
            let det = DetectorModel::new(DetectorKind::Spad, eta, d).unwrap();
            let a = poisson(1.0, 0.0, p, det);
            let (q, p_s, p_e) = printed_forms(eta, d, p);
            assert_abs_diff_eq!(a.q.value(), q, epsilon = 1e-12);
            assert_abs_diff_eq!(a.stats.p_s, p_s, epsilon = 1e-12);
            assert_abs_diff_eq!(a.stats.p_e, p_e, epsilon = 1e-12);
        }
    }

    #[test]
    fn poisson_zero_dark_identities() {
        for (eta, p) in [(0.3, 1.0), (0.9, 0.6), (1.0, 0.25)] {
            let det = DetectorModel::new(DetectorKind::Spad, eta, 0.0).unwrap();
            let a = poisson(1.0, 0.0, p, det);
            assert_abs_diff_eq!(a.q.value(), (1.0 - p) / 2.0, epsilon = 1e-12);
            assert_eq!(a.stats.p_e, 0.0);
            assert_abs_diff_eq!(a.stats.p_s, eta * eta / 4.0, epsilon = 1e-12);
            assert!(a.nongauss);
        }
    }

    #[test]
    fn poisson_unit_efficiency_has_no_errors() {
        for d in [0.0, 0.01, 0.3, 2.0] {
            let det = DetectorModel::new(DetectorKind::Spad, 1.0, d).unwrap();
            assert_eq!(poisson(1.0, 0.0, 1.0, det).stats.p_e, 0.0);
        }
    }

    #[test]
    fn poisson_dead_detector_is_undefined() {
        let det = DetectorModel::perfect(DetectorKind::Spad);
        let a = poisson(0.0, 0.0, 1.0, det);
        assert!(!a.coincidence_defined);
        assert!(!a.bb84_secure());
    }

    #[test]
    fn observables_stay_in_range() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let t: f64 = rng.gen_range(0.0..=1.0);
            let nbar: f64 = rng.gen_range(0.0..3.0);
            let p: f64 = rng.gen_range(0.0..=1.0);
            let eta: f64 = rng.gen_range(0.0..=1.0);
            let d: f64 = rng.gen_range(0.0..0.2);
            let a = poisson(
                t,
                nbar,
                p,
                DetectorModel::new(DetectorKind::Spad, eta, d).unwrap(),
            );
            assert!((0.0..=0.5).contains(&a.q.value()));
            assert!((0.0..=1.0).contains(&a.stats.p_s) && (0.0..=1.0).contains(&a.stats.p_e));
        }
        for _ in 0..40 {
            let t: f64 = rng.gen_range(0.0..=1.0);
            let nbar: f64 = rng.gen_range(0.0..3.0);
            let det = DetectorModel::new(
                DetectorKind::Pnrd,
                rng.gen_range(0.2..=1.0),
                rng.gen_range(0.0..0.05),
            )
            .unwrap();
            let a = thermal(t, nbar, rng.gen_range(0.0..=1.0), det);
            assert!((0.0..=0.5).contains(&a.q.value()));
            assert!((0.0..=1.0).contains(&a.stats.p_s) && (0.0..=1.0).contains(&a.stats.p_e));
        }
    }

    #[test]
    fn noise_models_agree_without_noise() {
        for t in [0.1, 0.5, 0.9, 1.0] {
            for p in [1.0, 0.7] {
                let a = thermal(t, 0.0, p, PNRD);
                let b = poisson(t, 0.0, p, DetectorModel::perfect(DetectorKind::Spad));
                assert_abs_diff_eq!(a.q.value(), b.q.value(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn assess_dispatch() {
        let cfg = ChannelConfig::new(0.5, 1.0).unwrap();
        let policy = TruncationPolicy::default();
        let th = NoiseModel::new(NoiseStatistics::SingleModeThermal, 1.0).unwrap();
        let po = NoiseModel::new(NoiseStatistics::PoissonianMultimode, 1.0).unwrap();
        let pnrd = DetectorModel::perfect(DetectorKind::Pnrd);
        let spad = DetectorModel::perfect(DetectorKind::Spad);

        assert_eq!(
            assess(&cfg, &th, &pnrd, &policy).unwrap(),
            thermal_observables(&cfg, &th, &pnrd, &policy).unwrap()
        );
        assert_eq!(
            assess(&cfg, &po, &spad, &policy).unwrap(),
            poisson_observables(&cfg, &po, &spad).unwrap()
        );

        let err = assess(&cfg, &th, &spad, &policy).unwrap_err();
        assert!(err.to_string().contains("thermal+PNRD"), "{err}");
        assert!(assess(&cfg, &po, &pnrd, &policy).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn thermal_qber_grows_with_noise(t in 0.2f64..=1.0, nbar in 0.0f64..2.0, step in 0.01f64..0.5) {
            let q0 = thermal(t, nbar, 1.0, PNRD).q.value();
            let q1 = thermal(t, nbar + step, 1.0, PNRD).q.value();
            proptest::prop_assert!(q1 >= q0 - 1e-12, "{} then {}", q0, q1);
        }

        #[test]
        fn poisson_observables_in_range(
            t in 0.0f64..=1.0,
            nbar in 0.0f64..10.0,
            p in 0.0f64..=1.0,
            eta in 0.0f64..=1.0,
            dark in 0.0f64..0.5,
        ) {
            let a = poisson(t, nbar, p, DetectorModel::new(DetectorKind::Spad, eta, dark).unwrap());
            proptest::prop_assert!((0.0..=0.5).contains(&a.q.value()));
            proptest::prop_assert!((0.0..=1.0).contains(&a.stats.p_s) && (0.0..=1.0).contains(&a.stats.p_e));
        }
    }
}
