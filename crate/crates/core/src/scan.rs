//! Boundary curves over the (T, ν) plane.
//!
//! For each transmittance the largest tolerable noise mean `ν*` is found by
//! bisection on the indicator of each criterion, assuming the indicator is
//! true on `[0, ν*)` and false above. A coarse probe can flag points where
//! that assumption fails; the bisection result is still returned.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{assess, ChannelConfig, LinkAssessment, NoiseModel, NoiseStatistics};
use crate::error::{Error, Result};
use crate::photodetection::{DetectorModel, TruncationPolicy};

pub const DEFAULT_NU_CAP: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_T_POINTS: usize = 96;
pub const DEFAULT_T_RANGE: (f64, f64) = (0.02, 1.0);
const PROBE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    NonGauss,
    Bb84,
    Di,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::NonGauss, Criterion::Bb84, Criterion::Di];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::NonGauss => "nongauss",
            Criterion::Bb84 => "bb84",
            Criterion::Di => "di",
        }
    }

    pub fn holds(self, a: &LinkAssessment) -> bool {
        match self {
            Criterion::NonGauss => a.nongauss,
            Criterion::Bb84 => a.bb84_secure(),
            Criterion::Di => a.di_secure(),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nongauss" | "non-gauss" | "ng" => Ok(Criterion::NonGauss),
            "bb84" => Ok(Criterion::Bb84),
            "di" | "di-qkd" => Ok(Criterion::Di),
            other => Err(Error::Config(format!(
                "unknown criterion '{other}' (expected nongauss, bb84 or di)"
            ))),
        }
    }
}

/// Everything about a link except the (T, ν) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSettings {
    pub noise: NoiseStatistics,
    pub detector: DetectorModel,
    pub p: f64,
    pub policy: TruncationPolicy,
}

impl LinkSettings {
    pub fn new(
        noise: NoiseStatistics,
        detector: DetectorModel,
        p: f64,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        ChannelConfig::new(1.0, p)?;
        if detector.kind != noise.paired_detector() {
            return Err(Error::UnsupportedPairing {
                noise: noise.name(),
                detector: detector.kind.name(),
            });
        }
        Ok(LinkSettings {
            noise,
            detector,
            p,
            policy,
        })
    }

    pub fn assess(&self, transmittance: f64, nu: f64) -> Result<LinkAssessment> {
        let cfg = ChannelConfig::new(transmittance, self.p)?;
        let noise = NoiseModel::new(self.noise, nu)?;
        assess(&cfg, &noise, &self.detector, &self.policy)
    }
}

pub fn indicator(
    criterion: Criterion,
    transmittance: f64,
    nu: f64,
    settings: &LinkSettings,
) -> Result<bool> {
    Ok(criterion.holds(&settings.assess(transmittance, nu)?))
}

/// Bisection controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Search {
    pub nu_cap: f64,
    pub tol: f64,
    /// Check single crossing on a coarse grid before bisecting.
    pub probe: bool,
}

impl Default for Search {
    fn default() -> Self {
        Search {
            nu_cap: DEFAULT_NU_CAP,
            tol: DEFAULT_TOL,
            probe: true,
        }
    }
}

impl Search {
    fn validate(&self) -> Result<()> {
        if !(self.nu_cap > 0.0 && self.nu_cap.is_finite()) {
            return Err(Error::Config(format!(
                "nu_cap must be positive, got {}",
                self.nu_cap
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxNoise {
    pub nu_star: f64,
    pub capped: bool,
    /// No coincidences even without noise.
    pub undefined: bool,
    /// The probe saw the indicator switch back on above a failing point.
    pub non_monotone: bool,
}

/// Memoised assessments along one vertical line `T = const`.
struct Line<'a> {
    settings: &'a LinkSettings,
    transmittance: f64,
    cache: HashMap<u64, LinkAssessment>,
}

impl<'a> Line<'a> {
    fn new(settings: &'a LinkSettings, transmittance: f64) -> Self {
        Line {
            settings,
            transmittance,
            cache: HashMap::new(),
        }
    }

    fn at(&mut self, nu: f64) -> Result<LinkAssessment> {
        if let Some(a) = self.cache.get(&nu.to_bits()) {
            return Ok(*a);
        }
        let a = self.settings.assess(self.transmittance, nu)?;
        self.cache.insert(nu.to_bits(), a);
        Ok(a)
    }

    fn max_noise(&mut self, criterion: Criterion, search: &Search) -> Result<MaxNoise> {
        let origin = self.at(0.0)?;
        let mut result = MaxNoise {
            nu_star: 0.0,
            capped: false,
            undefined: !origin.coincidence_defined,
            non_monotone: false,
        };

        if search.probe {
            let mut seen_false = false;
            for i in 0..PROBE_POINTS {
                let nu = search.nu_cap * i as f64 / (PROBE_POINTS - 1) as f64;
                let ok = criterion.holds(&self.at(nu)?);
                if ok && seen_false {
                    result.non_monotone = true;
                    break;
                }
                seen_false |= !ok;
            }
        }

        if !criterion.holds(&origin) {
            return Ok(result);
        }
        if criterion.holds(&self.at(search.nu_cap)?) {
            result.nu_star = search.nu_cap;
            result.capped = true;
            return Ok(result);
        }

        let (mut lo, mut hi) = (0.0, search.nu_cap);
        while hi - lo > search.tol {
            let mid = 0.5 * (lo + hi);
            if criterion.holds(&self.at(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        result.nu_star = lo;
        Ok(result)
    }
}

/// Largest noise mean compatible with `criterion` at transmittance `T`.
pub fn max_noise(
    criterion: Criterion,
    transmittance: f64,
    settings: &LinkSettings,
    search: &Search,
) -> Result<MaxNoise> {
    search.validate()?;
    Line::new(settings, transmittance).max_noise(criterion, search)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub t_grid: Vec<f64>,
    pub criteria: Vec<Criterion>,
    pub search: Search,
    pub settings: LinkSettings,
    /// Worker threads; 1 runs on the calling thread.
    pub workers: usize,
}

impl ScanConfig {
    pub fn new(settings: LinkSettings) -> Self {
        ScanConfig {
            t_grid: uniform_grid(DEFAULT_T_RANGE.0, DEFAULT_T_RANGE.1, DEFAULT_T_POINTS)
                .expect("default grid is valid"),
            criteria: Criterion::ALL.to_vec(),
            search: Search::default(),
            settings,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::Config("t_grid is empty".into()));
        }
        if self.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Config("t_grid values must lie in [0, 1]".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("t_grid must be strictly increasing".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("no criteria selected".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.search.validate()
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::Config("grid needs at least one point".into())),
        1 => Ok(vec![lo]),
        _ => Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

/// Boundaries at one transmittance; `None` for criteria not scanned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRecord {
    #[serde(rename = "T")]
    pub transmittance: f64,
    pub nongauss: Option<MaxNoise>,
    pub bb84: Option<MaxNoise>,
    pub di: Option<MaxNoise>,
}

impl BoundaryRecord {
    pub fn get(&self, criterion: Criterion) -> Option<&MaxNoise> {
        match criterion {
            Criterion::NonGauss => self.nongauss.as_ref(),
            Criterion::Bb84 => self.bb84.as_ref(),
            Criterion::Di => self.di.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub records: Vec<BoundaryRecord>,
}

fn scan_line(
    cfg: &ScanConfig,
    criteria: &[Criterion],
    transmittance: f64,
) -> Result<BoundaryRecord> {
    let mut line = Line::new(&cfg.settings, transmittance);
    let mut record = BoundaryRecord {
        transmittance,
        nongauss: None,
        bb84: None,
        di: None,
    };
    for &c in criteria {
        let m = line.max_noise(c, &cfg.search)?;
        match c {
            Criterion::NonGauss => record.nongauss = Some(m),
            Criterion::Bb84 => record.bb84 = Some(m),
            Criterion::Di => record.di = Some(m),
        }
    }
    Ok(record)
}

/// One boundary record per grid transmittance, in grid order.
pub fn sweep(cfg: &ScanConfig) -> Result<BoundaryCurve> {
    cfg.validate()?;
    let mut criteria = cfg.criteria.clone();
    criteria.sort();
    criteria.dedup();

    let records = if cfg.workers == 1 {
        cfg.t_grid
            .iter()
            .map(|&t| scan_line(cfg, &criteria, t))
            .collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            cfg.t_grid
                .par_iter()
                .map(|&t| scan_line(cfg, &criteria, t))
                .collect::<Result<Vec<_>>>()
        })?
    };
    Ok(BoundaryCurve { records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    SecureAndNonGauss,
    SecureOnly,
    NonGaussOnly,
    Neither,
}

impl RegionLabel {
    pub fn from_indicators(secure: bool, nongauss: bool) -> Self {
        match (secure, nongauss) {
            (true, true) => RegionLabel::SecureAndNonGauss,
            (true, false) => RegionLabel::SecureOnly,
            (false, true) => RegionLabel::NonGaussOnly,
            (false, false) => RegionLabel::Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub bb84: RegionLabel,
    pub di: RegionLabel,
}

impl Classification {
    pub fn of(a: &LinkAssessment) -> Self {
        Classification {
            bb84: RegionLabel::from_indicators(a.bb84_secure(), a.nongauss),
            di: RegionLabel::from_indicators(a.di_secure(), a.nongauss),
        }
    }
}

pub fn classify(transmittance: f64, nu: f64, settings: &LinkSettings) -> Result<Classification> {
    Ok(Classification::of(&settings.assess(transmittance, nu)?))
}
