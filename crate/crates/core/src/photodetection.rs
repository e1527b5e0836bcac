//! Detector POVMs and photocount statistics.
//!
//! Every operator here is diagonal in the Fock basis, so a POVM element is
//! just a weight per incident photon number. Two detector families are
//! modelled, a click/no-click SPAD and a photon-number-resolving detector
//! (PNRD), both with efficiency `eta` and a Poissonian dark-count rate
//! `dark` per gate. Some literature writes the dark-count rate as `ν`; here
//! `ν`/`nbar` is reserved for the mean photon number of the noise mode.
//!
//! The photocount distribution of a Fock state mixed with a single-mode
//! thermal state on a beam splitter of transmittance `T` is built from the
//! beam-splitter amplitudes [`bs_coefficient`], averaged over the thermal
//! photon-number distribution and truncated at `n_max`.

use serde::Serialize;

use crate::error::{check_nonneg, check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Spad,
    Pnrd,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Spad => "SPAD",
            DetectorKind::Pnrd => "PNRD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub eta: f64,
    pub dark: f64,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, eta: f64, dark: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        check_nonneg("dark", dark)?;
        Ok(DetectorModel { kind, eta, dark })
    }

    /// Unit efficiency, no dark counts.
    pub fn perfect(kind: DetectorKind) -> Self {
        DetectorModel {
            kind,
            eta: 1.0,
            dark: 0.0,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.eta == 1.0 && self.dark == 0.0
    }
}

/// Cutoff for the thermal photon-number sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Fixed cutoff; `None` picks `max(50, ⌈40·(nbar + 1)⌉)`.
    pub n_max: Option<usize>,
    /// Largest neglected thermal mass that is accepted.
    pub tail_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            n_max: None,
            tail_tol: 1e-10,
        }
    }
}

impl TruncationPolicy {
    pub fn new(n_max: Option<usize>, tail_tol: f64) -> Result<Self> {
        if n_max == Some(0) {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if tail_tol.is_nan() || tail_tol <= 0.0 {
            return Err(Error::Domain {
                name: "tail_tol",
                value: tail_tol,
                domain: "(0, inf)",
            });
        }
        Ok(TruncationPolicy { n_max, tail_tol })
    }

    pub fn fixed(n_max: usize) -> Self {
        TruncationPolicy {
            n_max: Some(n_max),
            ..Default::default()
        }
    }

    /// Cutoff that will be used for a thermal mode of mean `nbar`.
    pub fn resolve(&self, nbar: f64) -> usize {
        self.n_max
            .unwrap_or_else(|| 50.max((40.0 * (nbar + 1.0)).ceil() as usize))
    }
}

/// Thermal mass beyond `n_max`: `(nbar/(nbar+1))^(n_max+1)`.
pub fn thermal_tail(nbar: f64, n_max: usize) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    let x = nbar / (nbar + 1.0);
    ((n_max as f64 + 1.0) * x.ln()).exp()
}

/// Count distribution `probs[s]` for an incident Fock state `|l⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotocountDistribution {
    pub probs: Vec<f64>,
    pub incident_l: usize,
    pub truncation_tail: f64,
}

impl PhotocountDistribution {
    pub fn prob(&self, s: usize) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// `ln(m!)` for `m = 0..=max`. Exact integer factorials up to 20, `lgamma`
/// beyond.
struct LnFactorials(Vec<f64>);

impl LnFactorials {
    const EXACT_LIMIT: usize = 20;

    fn up_to(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut fact: u64 = 1;
        for m in 0..=max {
            if m <= Self::EXACT_LIMIT {
                if m > 0 {
                    fact *= m as u64;
                }
                table.push((fact as f64).ln());
            } else {
                table.push(libm::lgamma(m as f64 + 1.0));
            }
        }
        LnFactorials(table)
    }

    #[inline]
    fn get(&self, m: usize) -> f64 {
        self.0[m]
    }

    #[inline]
    fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.get(n) - self.get(k) - self.get(n - k)
    }
}

fn binomial_exact(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `ln(√T)` and `ln(√(1−T))` with zero bases tracked separately.
#[derive(Clone, Copy)]
struct SplitRatio {
    ln_t: f64,
    ln_r: f64,
    t_zero: bool,
    r_zero: bool,
}

impl SplitRatio {
    fn new(transmittance: f64) -> Self {
        SplitRatio {
            ln_t: 0.5 * transmittance.ln(),
            ln_r: 0.5 * (1.0 - transmittance).ln(),
            t_zero: transmittance == 0.0,
            r_zero: transmittance == 1.0,
        }
    }

    /// `ln((√(1−T))^e_r (√T)^e_t)`, or `None` when a zero base carries a
    /// positive power.
    #[inline]
    fn ln_weight(&self, e_r: usize, e_t: usize) -> Option<f64> {
        if (self.r_zero && e_r > 0) || (self.t_zero && e_t > 0) {
            return None;
        }
        let mut acc = 0.0;
        if e_r > 0 {
            acc += e_r as f64 * self.ln_r;
        }
        if e_t > 0 {
            acc += e_t as f64 * self.ln_t;
        }
        Some(acc)
    }
}

/// Unchecked amplitude for valid indices (`k ≤ l`, `k ≤ s`, `s − k ≤ n`).
#[inline]
fn amplitude(lf: &LnFactorials, ratio: SplitRatio, l: usize, n: usize, k: usize, s: usize) -> f64 {
    let j = s - k;
    let Some(ln_pow) = ratio.ln_weight(l + s - 2 * k, n + 2 * k - s) else {
        return 0.0;
    };
    let ln_mag = 0.5 * (lf.get(s) + lf.get(l + n - s) - lf.get(l) - lf.get(n))
        + lf.ln_binomial(l, k)
        + lf.ln_binomial(n, j)
        + ln_pow;
    let mag = ln_mag.exp();
    if j.is_multiple_of(2) {
        mag
    } else {
        -mag
    }
}

/// Beam-splitter amplitude `A^{l,n}_{k,s−k}` for `|l⟩` (signal) and `|n⟩`
/// (noise) producing `s` photons in the detected port, `k` of which come
/// from the signal.
///
/// Returns zero whenever a binomial index constraint fails.
pub fn bs_coefficient(l: i64, n: i64, k: i64, s: i64, transmittance: f64) -> Result<f64> {
    for (name, v) in [("l", l), ("n", n), ("k", k), ("s", s)] {
        if v < 0 {
            return Err(Error::Domain {
                name,
                value: v as f64,
                domain: "nonnegative integers",
            });
        }
    }
    check_unit("T", transmittance)?;
    if k > l || k > s || s - k > n || l + n - s < 0 {
        return Ok(0.0);
    }
    let (l, n, k, s) = (l as usize, n as usize, k as usize, s as usize);
    if l + n <= LnFactorials::EXACT_LIMIT {
        return Ok(amplitude_small(l, n, k, s, transmittance));
    }
    let lf = LnFactorials::up_to(l + n);
    Ok(amplitude(&lf, SplitRatio::new(transmittance), l, n, k, s))
}

// Direct evaluation with exact integer factorials and binomials.
fn amplitude_small(l: usize, n: usize, k: usize, s: usize, t: f64) -> f64 {
    let fact = |m: usize| -> u64 { (1..=m as u64).product() };
    let j = s - k;
    let ratio = (fact(s) * fact(l + n - s)) as f64 / (fact(l) * fact(n)) as f64;
    let binoms = (binomial_exact(l as u64, k as u64) * binomial_exact(n as u64, j as u64)) as f64;
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * ratio.sqrt()
        * binoms
        * (1.0 - t).sqrt().powi((l + s - 2 * k) as i32)
        * t.sqrt().powi((n + 2 * k - s) as i32)
}

/// Photocount distribution of `|l⟩` mixed with a thermal mode of mean
/// `nbar` on a beam splitter of transmittance `T`.
///
/// Fails with [`Error::Truncation`] when the thermal tail beyond the policy's
/// cutoff exceeds its tolerance.
pub fn photocount_pmf(
    l: usize,
    nbar: f64,
    transmittance: f64,
    policy: &TruncationPolicy,
) -> Result<PhotocountDistribution> {
    check_nonneg("nbar", nbar)?;
    check_unit("T", transmittance)?;
    let n_max = policy.resolve(nbar);
    let tail = thermal_tail(nbar, n_max);
    if tail > policy.tail_tol {
        return Err(Error::Truncation {
            n_max,
            achieved: tail,
            tol: policy.tail_tol,
        });
    }

    let lf = LnFactorials::up_to(l + n_max);
    let ratio = SplitRatio::new(transmittance);
    let x = nbar / (nbar + 1.0);
    let mut weight = 1.0 / (nbar + 1.0);
    let mut probs = vec![0.0; l + n_max + 1];
    let mut last_n = 0;

    for n in 0..=n_max {
        if weight == 0.0 {
            break;
        }
        last_n = n;
        for (s, slot) in probs.iter_mut().enumerate().take(l + n + 1) {
            let k_lo = s.saturating_sub(n);
            let k_hi = l.min(s);
            let amp: f64 = (k_lo..=k_hi)
                .map(|k| amplitude(&lf, ratio, l, n, k, s))
                .sum();
            *slot += weight * amp * amp;
        }
        weight *= x;
    }
    probs.truncate(l + last_n + 1);

    Ok(PhotocountDistribution {
        probs,
        incident_l: l,
        truncation_tail: tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpadWeights {
    pub no_click: f64,
    pub click: f64,
}

/// SPAD POVM weights on `|n⟩`: no click with `e^{-dark}(1−eta)^n`.
pub fn spad_weights(n: usize, det: &DetectorModel) -> SpadWeights {
    let no_click = (-det.dark).exp() * (1.0 - det.eta).powi(n as i32);
    SpadWeights {
        no_click,
        click: 1.0 - no_click,
    }
}

/// Coarse-grained PNRD outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CountOutcome {
    Zero,
    One,
    TwoOrMore,
}

#[inline]
fn pnrd_zero_one(k: usize, det: &DetectorModel) -> (f64, f64) {
    let loss = 1.0 - det.eta;
    let pd = (-det.dark).exp();
    let zero = pd * loss.powi(k as i32);
    let single = if k == 0 {
        0.0
    } else {
        k as f64 * det.eta * loss.powi(k as i32 - 1)
    };
    (zero, pd * (single + det.dark * loss.powi(k as i32)))
}

/// PNRD POVM weight of `count` on the Fock state `|k⟩`.
pub fn pnrd_weights(count: CountOutcome, k: usize, det: &DetectorModel) -> f64 {
    let (zero, one) = pnrd_zero_one(k, det);
    match count {
        CountOutcome::Zero => zero,
        CountOutcome::One => one,
        CountOutcome::TwoOrMore => (1.0 - zero - one).max(0.0),
    }
}

/// Detected-count probabilities over `{0, 1, ≥2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedCounts {
    pub zero: f64,
    pub one: f64,
    pub two_or_more: f64,
}

impl DetectedCounts {
    pub fn get(&self, outcome: CountOutcome) -> f64 {
        match outcome {
            CountOutcome::Zero => self.zero,
            CountOutcome::One => self.one,
            CountOutcome::TwoOrMore => self.two_or_more,
        }
    }
}

/// Pushes a photocount distribution through an imperfect detector.
/// The `≥2` bin also absorbs any truncated tail mass.
pub fn detect_pmf(pmf: &PhotocountDistribution, det: &DetectorModel) -> DetectedCounts {
    let loss = 1.0 - det.eta;
    let pd = (-det.dark).exp();
    let mut zero = 0.0;
    let mut single = 0.0;
    // loss^s and loss^(s-1), carried forward
    let mut pow_s = 1.0;
    let mut pow_prev = 0.0;
    for (s, &p) in pmf.probs.iter().enumerate() {
        zero += pow_s * p;
        if s > 0 {
            single += s as f64 * pow_prev * p;
        }
        pow_prev = pow_s;
        pow_s *= loss;
    }
    let zero = pd * zero;
    let one = pd * det.eta * single + det.dark * zero;
    DetectedCounts {
        zero,
        one,
        two_or_more: (1.0 - zero - one).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

    #[test]
    fn coefficient_examples() {
        for t in TS {
            assert_abs_diff_eq!(
                bs_coefficient(1, 0, 1, 1, t).unwrap(),
                t.sqrt(),
                epsilon = 1e-15
            );
            assert_eq!(bs_coefficient(1, 0, 0, 1, t).unwrap(), 0.0);
        }
        assert_eq!(bs_coefficient(0, 0, 0, 0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn coefficient_rejects_negative_indices() {
        assert!(matches!(
            bs_coefficient(-1, 0, 0, 0, 0.5),
            Err(Error::Domain { name: "l", .. })
        ));
        assert!(matches!(
            bs_coefficient(1, 0, 0, -2, 0.5),
            Err(Error::Domain { name: "s", .. })
        ));
        assert!(bs_coefficient(1, 0, 0, 0, 1.5).is_err());
    }

    #[test]
    fn log_space_matches_exact_path() {
        let lf = LnFactorials::up_to(40);
        for t in [0.1, 0.5, 0.9] {
            let ratio = SplitRatio::new(t);
            for n in 0usize..=19 {
                for s in 0..=n + 1 {
                    for k in s.saturating_sub(n)..=1.min(s) {
                        let a = amplitude(&lf, ratio, 1, n, k, s);
                        let b = amplitude_small(1, n, k, s, t);
                        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn beam_splitter_is_unitary_above_exact_range() {
        for t in TS {
            for l in 0..=2i64 {
                for n in [25i64, 60] {
                    let total: f64 = (0..=l + n)
                        .map(|s| {
                            let a: f64 = (0..=s)
                                .map(|k| bs_coefficient(l, n, k, s, t).unwrap())
                                .sum();
                            a * a
                        })
                        .sum();
                    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn pmf_vacuum_ancilla() {
        let pmf = photocount_pmf(1, 0.0, 0.7, &TruncationPolicy::default()).unwrap();
        assert_eq!(pmf.probs.len(), 2);
        assert_abs_diff_eq!(pmf.probs[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf.probs[1], 0.7, epsilon = 1e-15);
        assert_eq!(pmf.truncation_tail, 0.0);
    }

    #[test]
    fn pmf_unit_transmittance_decouples() {
        for nbar in [0.1, 1.0, 5.0] {
            let pmf = photocount_pmf(1, nbar, 1.0, &TruncationPolicy::default()).unwrap();
            assert_abs_diff_eq!(pmf.probs[1], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn pmf_truncation_error_reports_tail() {
        let policy = TruncationPolicy::fixed(5);
        match photocount_pmf(1, 1.0, 0.5, &policy) {
            Err(Error::Truncation {
                n_max, achieved, ..
            }) => {
                assert_eq!(n_max, 5);
                assert_abs_diff_eq!(achieved, 0.5f64.powi(6), epsilon = 1e-15);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn pmf_rejects_bad_inputs() {
        let p = TruncationPolicy::default();
        assert!(photocount_pmf(1, -0.1, 0.5, &p).is_err());
        assert!(photocount_pmf(1, 0.1, 1.2, &p).is_err());
        assert!(TruncationPolicy::new(Some(0), 1e-10).is_err());
        assert!(TruncationPolicy::new(None, 0.0).is_err());
    }

    #[test]
    fn pmf_normalised() {
        for (l, nbar, t) in [(1, 0.3, 0.2), (1, 4.0, 0.6), (0, 2.0, 0.9), (2, 0.7, 0.5)] {
            let pmf = photocount_pmf(l, nbar, t, &TruncationPolicy::default()).unwrap();
            assert!(pmf.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
            let mass = pmf.total() + pmf.truncation_tail;
            assert!((mass - 1.0).abs() <= 1e-8, "mass {mass}");
        }
    }

    #[test]
    fn vacuum_signal_gives_attenuated_thermal() {
        for (nbar, t) in [(2.0, 0.5), (0.8, 0.3), (5.0, 0.9)] {
            let pmf = photocount_pmf(0, nbar, t, &TruncationPolicy::default()).unwrap();
            let m: f64 = (1.0 - t) * nbar;
            for s in 0..10 {
                let expected = (m / (m + 1.0)).powi(s as i32) / (m + 1.0);
                assert_abs_diff_eq!(pmf.prob(s), expected, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn spad_examples() {
        let det = DetectorModel::new(DetectorKind::Spad, 0.42, 0.001).unwrap();
        assert_abs_diff_eq!(spad_weights(0, &det).no_click, (-0.001f64).exp());
        let ideal = DetectorModel::perfect(DetectorKind::Spad);
        assert_eq!(spad_weights(3, &ideal).click, 1.0);
        let det = DetectorModel::new(DetectorKind::Spad, 0.7, 0.001).unwrap();
        assert_abs_diff_eq!(
            spad_weights(1, &det).no_click,
            0.299_700_149_950_012_5,
            epsilon = 1e-15
        );
        for n in 0..50 {
            let w = spad_weights(n, &det);
            assert!((w.no_click + w.click - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn pnrd_examples() {
        let ideal = DetectorModel::perfect(DetectorKind::Pnrd);
        assert_eq!(pnrd_weights(CountOutcome::One, 1, &ideal), 1.0);
        let det = DetectorModel::new(DetectorKind::Pnrd, 0.7, 0.001).unwrap();
        assert_abs_diff_eq!(pnrd_weights(CountOutcome::Zero, 0, &det), (-0.001f64).exp());
        assert_abs_diff_eq!(
            pnrd_weights(CountOutcome::TwoOrMore, 0, &det),
            4.996_667_916_333_403e-7,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pnrd_weights_complete_and_nonnegative() {
        for (eta, dark) in [
            (0.7, 0.001),
            (0.1, 0.5),
            (1.0, 0.0),
            (0.0, 0.2),
            (0.95, 2.0),
        ] {
            let det = DetectorModel::new(DetectorKind::Pnrd, eta, dark).unwrap();
            for k in 0..=200 {
                let w: Vec<f64> = [
                    CountOutcome::Zero,
                    CountOutcome::One,
                    CountOutcome::TwoOrMore,
                ]
                .iter()
                .map(|&c| pnrd_weights(c, k, &det))
                .collect();
                assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn detect_perfect_is_coarse_graining() {
        let pmf = photocount_pmf(1, 0.9, 0.4, &TruncationPolicy::default()).unwrap();
        let counts = detect_pmf(&pmf, &DetectorModel::perfect(DetectorKind::Pnrd));
        assert_eq!(counts.zero, pmf.probs[0]);
        assert_eq!(counts.one, pmf.probs[1]);
        assert_abs_diff_eq!(
            counts.two_or_more,
            pmf.probs[2..].iter().sum::<f64>(),
            epsilon = 1e-12
        );

        let pmf = photocount_pmf(1, 0.0, 0.35, &TruncationPolicy::default()).unwrap();
        let counts = detect_pmf(&pmf, &DetectorModel::perfect(DetectorKind::Pnrd));
        assert_abs_diff_eq!(counts.zero, 0.65, epsilon = 1e-15);
        assert_abs_diff_eq!(counts.one, 0.35, epsilon = 1e-15);
        assert_eq!(counts.two_or_more, 0.0);
    }

    #[test]
    fn detect_vacuum_sees_only_dark_counts() {
        let vacuum = PhotocountDistribution {
            probs: vec![1.0],
            incident_l: 0,
            truncation_tail: 0.0,
        };
        let det = DetectorModel::new(DetectorKind::Pnrd, 0.7, 0.001).unwrap();
        let counts = detect_pmf(&vacuum, &det);
        assert_abs_diff_eq!(counts.one, 0.001 * (-0.001f64).exp(), epsilon = 1e-18);
        assert_abs_diff_eq!(
            counts.zero + counts.one + counts.two_or_more,
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn detect_matches_weighted_povm_sum() {
        let pmf = photocount_pmf(1, 1.3, 0.55, &TruncationPolicy::default()).unwrap();
        let det = DetectorModel::new(DetectorKind::Pnrd, 0.6, 0.02).unwrap();
        let counts = detect_pmf(&pmf, &det);
        let direct = |c| -> f64 {
            pmf.probs
                .iter()
                .enumerate()
                .map(|(s, p)| pnrd_weights(c, s, &det) * p)
                .sum()
        };
        assert_abs_diff_eq!(counts.zero, direct(CountOutcome::Zero), epsilon = 1e-13);
        assert_abs_diff_eq!(counts.one, direct(CountOutcome::One), epsilon = 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn spad_weights_complete(n in 0usize..200, eta in 0.0f64..=1.0, dark in 0.0f64..1.0) {
            let w = spad_weights(n, &DetectorModel::new(DetectorKind::Spad, eta, dark).unwrap());
            proptest::prop_assert!((w.no_click + w.click - 1.0).abs() <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn pnrd_weights_form_a_povm(k in 0usize..=200, eta in 0.0f64..=1.0, dark in 0.0f64..1.0) {
            let det = DetectorModel::new(DetectorKind::Pnrd, eta, dark).unwrap();
            let [zero, one, more] = [CountOutcome::Zero, CountOutcome::One, CountOutcome::TwoOrMore]
                .map(|c| pnrd_weights(c, k, &det));
            proptest::prop_assert!(zero >= 0.0 && one >= 0.0 && more >= 0.0);
            proptest::prop_assert!((zero + one + more - 1.0).abs() <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn vacuum_signal_is_attenuated_thermal(nbar in 0.0f64..4.0, t in 0.0f64..=1.0) {
            let pmf = photocount_pmf(0, nbar, t, &TruncationPolicy::default()).unwrap();
            let m = (1.0 - t) * nbar;
            for s in 0..10 {
                let expected = (m / (m + 1.0)).powi(s as i32) / (m + 1.0);
                proptest::prop_assert!((pmf.prob(s) - expected).abs() < 1e-8, "s {}: {} vs {}", s, pmf.prob(s), expected);
            }
        }
    }
}
