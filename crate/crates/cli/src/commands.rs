use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use ngqkd::channels::EFFECTIVE_MAPPING;
use ngqkd::photodetection::photocount_pmf;
use ngqkd::scan::{
    self, uniform_grid, Classification, Criterion, LinkSettings, ScanConfig, Search,
};
use ngqkd::{DetectorKind, DetectorModel, LinkAssessment, NoiseStatistics, TruncationPolicy};

use crate::output::{self, RunManifest};
use crate::settings::{nonneg, positive, unit, DetectorArg, Layers, NoiseArg};
use crate::{EvalArgs, LinkArgs, PmfArgs, ScanArgs};

const LINK_KEYS: &[&str] = &[
    "preset", "noise", "detector", "eta", "dark", "p", "n-max", "tail-tol",
];

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

/// Resolved knobs, in the form written to the manifest.
type Knobs = BTreeMap<String, Value>;

fn link_layers(link: &LinkArgs, extra_keys: &[&'static str]) -> Result<Layers> {
    let keys: Vec<&'static str> = LINK_KEYS.iter().chain(extra_keys).copied().collect();
    let mut layers = Layers::new(&keys);
    layers.flag("preset", link.preset.map(enum_name));
    layers.flag("noise", link.noise.map(enum_name));
    layers.flag("detector", link.detector.map(enum_name));
    layers.flag("eta", link.eta);
    layers.flag("dark", link.dark);
    layers.flag("p", link.p);
    layers.flag("n-max", link.n_max);
    layers.flag("tail-tol", link.tail_tol);
    if let Some(path) = &link.config {
        layers.load_config(path)?;
    }
    Ok(layers)
}

fn resolve_truncation(layers: &mut Layers, knobs: &mut Knobs) -> Result<TruncationPolicy> {
    layers.default("tail-tol", "1e-10");
    let n_max: Option<usize> = layers.optional("n-max")?;
    if n_max == Some(0) {
        bail!("--n-max must be at least 1");
    }
    let tail_tol = positive("tail-tol", layers.required("tail-tol")?)?;
    knobs.insert(
        "n-max".into(),
        n_max.map_or(json!("auto: max(50, ceil(40*(nbar+1)))"), |n| json!(n)),
    );
    knobs.insert("tail-tol".into(), json!(tail_tol));
    Ok(TruncationPolicy::new(n_max, tail_tol)?)
}

fn resolve_link(layers: &mut Layers, knobs: &mut Knobs) -> Result<LinkSettings> {
    layers.apply_preset()?;
    layers.check_preset_requirements()?;
    layers.default("noise", "thermal");
    layers.default("eta", "1");
    layers.default("dark", "0");
    layers.default("p", "1");

    let noise: NoiseArg = layers.choice("noise")?.expect("default set");
    let statistics = NoiseStatistics::from(noise);
    let paired = match statistics.paired_detector() {
        DetectorKind::Pnrd => "pnrd",
        DetectorKind::Spad => "spad",
    };
    layers.default("detector", paired);
    let detector: DetectorArg = layers.choice("detector")?.expect("default set");
    let kind = DetectorKind::from(detector);
    if kind != statistics.paired_detector() {
        bail!(
            "--noise {} cannot be combined with --detector {} (supported pairings: thermal+pnrd, poisson+spad)",
            enum_name(noise),
            enum_name(detector)
        );
    }

    let eta = unit("eta", layers.required("eta")?)?;
    let dark = nonneg("dark", layers.required("dark")?)?;
    let p = unit("p", layers.required("p")?)?;
    let policy = resolve_truncation(layers, knobs)?;

    if let Some(preset) = layers.preset_name {
        knobs.insert("preset".into(), json!(enum_name(preset)));
    }
    knobs.insert("noise".into(), json!(enum_name(noise)));
    knobs.insert("detector".into(), json!(enum_name(detector)));
    knobs.insert("eta".into(), json!(eta));
    knobs.insert("dark".into(), json!(dark));
    knobs.insert("p".into(), json!(p));

    let detector = DetectorModel::new(kind, eta, dark)?;
    Ok(LinkSettings::new(statistics, detector, p, policy)?)
}

fn mapping_for(settings: &LinkSettings) -> Option<&'static str> {
    (settings.noise == NoiseStatistics::PoissonianMultimode).then_some(EFFECTIVE_MAPPING)
}

#[derive(Serialize)]
struct EvalDocument {
    #[serde(rename = "T")]
    transmittance: f64,
    nu: f64,
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "S")]
    s: f64,
    r_bb84: f64,
    /// `null` without a CHSH violation.
    r_di: Option<f64>,
    di_defined: bool,
    #[serde(rename = "P_s")]
    p_s: f64,
    #[serde(rename = "P_e")]
    p_e: f64,
    witness: WitnessDoc,
    nongauss: bool,
    coincidence_defined: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective_detector: Option<DetectorModel>,
    region: Classification,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct WitnessDoc {
    detector: &'static str,
    passed: bool,
    margin: f64,
}

impl EvalDocument {
    fn new(t: f64, nu: f64, a: &LinkAssessment, kind: DetectorKind, manifest: RunManifest) -> Self {
        EvalDocument {
            transmittance: t,
            nu,
            q: a.q.value(),
            s: a.s.value(),
            r_bb84: a.rates.bb84,
            r_di: a.rates.di_defined.then_some(a.rates.di),
            di_defined: a.rates.di_defined,
            p_s: a.stats.p_s,
            p_e: a.stats.p_e,
            witness: WitnessDoc {
                detector: kind.name(),
                passed: a.witness.passed,
                margin: a.witness.margin,
            },
            nongauss: a.nongauss,
            coincidence_defined: a.coincidence_defined,
            effective_detector: a.effective_detector,
            region: Classification::of(a),
            manifest,
        }
    }
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let mut layers = link_layers(&args.link, &["T", "nu"])?;
    layers.flag("T", args.t);
    layers.flag("nu", args.nu);
    let mut knobs = Knobs::new();
    let settings = resolve_link(&mut layers, &mut knobs)?;
    let t = unit("T", layers.required("T")?)?;
    let nu = nonneg("nu", layers.required("nu")?)?;
    knobs.insert("T".into(), json!(t));
    knobs.insert("nu".into(), json!(nu));

    let assessment = settings.assess(t, nu)?;
    let mut manifest = RunManifest::new(
        "eval",
        knobs,
        layers.sources.clone(),
        mapping_for(&settings),
    );
    if settings.noise == NoiseStatistics::SingleModeThermal {
        manifest
            .derived
            .insert("n-max-used".into(), json!(settings.policy.resolve(nu)));
    }
    let doc = EvalDocument::new(t, nu, &assessment, settings.detector.kind, manifest);
    output::emit(&(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScanFormat {
    Csv,
    Json,
}

fn parse_list<T>(flag: &str, raw: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("--{flag}: invalid entry '{}': {e}", s.trim()))
        })
        .collect()
}

pub fn scan(args: &ScanArgs) -> Result<()> {
    let extra = [
        "t-grid", "t-min", "t-max", "t-points", "criteria", "nu-cap", "tol", "probe", "workers",
        "format", "out",
    ];
    let mut layers = link_layers(&args.link, &extra)?;
    layers.flag("t-grid", args.t_grid.as_ref());
    layers.flag("t-min", args.t_min);
    layers.flag("t-max", args.t_max);
    layers.flag("t-points", args.t_points);
    layers.flag("criteria", args.criteria.as_ref());
    layers.flag("nu-cap", args.nu_cap);
    layers.flag("tol", args.tol);
    layers.flag("probe", args.no_probe.then_some(false));
    layers.flag("workers", args.workers);
    layers.flag("format", args.format.as_ref());
    layers.flag("out", args.out.as_ref().map(|p| p.display().to_string()));

    let mut knobs = Knobs::new();
    let settings = resolve_link(&mut layers, &mut knobs)?;

    let t_grid = match layers.optional::<String>("t-grid")? {
        Some(raw) => {
            let grid: Vec<f64> = parse_list("t-grid", &raw)?;
            knobs.insert("t-grid".into(), json!(grid));
            grid
        }
        None => {
            layers.default("t-min", &scan::DEFAULT_T_RANGE.0.to_string());
            layers.default("t-max", &scan::DEFAULT_T_RANGE.1.to_string());
            layers.default("t-points", &scan::DEFAULT_T_POINTS.to_string());
            let lo = unit("t-min", layers.required("t-min")?)?;
            let hi = unit("t-max", layers.required("t-max")?)?;
            let n: usize = layers.required("t-points")?;
            if n == 0 {
                bail!("--t-points must be at least 1");
            }
            if n > 1 && hi <= lo {
                bail!("--t-max must exceed --t-min");
            }
            knobs.insert("t-min".into(), json!(lo));
            knobs.insert("t-max".into(), json!(hi));
            knobs.insert("t-points".into(), json!(n));
            uniform_grid(lo, hi, n)?
        }
    };
    for &t in &t_grid {
        unit("t-grid", t)?;
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        bail!("--t-grid must be strictly increasing");
    }

    layers.default("criteria", "nongauss,bb84,di");
    let criteria: Vec<Criterion> = parse_list("criteria", &layers.required::<String>("criteria")?)?;
    if criteria.is_empty() {
        bail!("--criteria selects nothing");
    }
    layers.default("nu-cap", &scan::DEFAULT_NU_CAP.to_string());
    layers.default("tol", &scan::DEFAULT_TOL.to_string());
    layers.default("probe", "true");
    layers.default("workers", "1");
    layers.default("format", "csv");
    let nu_cap = positive("nu-cap", layers.required("nu-cap")?)?;
    let tol = positive("tol", layers.required("tol")?)?;
    let probe: bool = layers.required("probe")?;
    let workers: usize = layers.required("workers")?;
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let format = match layers
        .required::<String>("format")?
        .to_ascii_lowercase()
        .as_str()
    {
        "csv" => ScanFormat::Csv,
        "json" => ScanFormat::Json,
        other => bail!("--format must be csv or json, got '{other}'"),
    };
    let out: PathBuf = layers.required::<String>("out")?.into();

    let names: Vec<&str> = criteria.iter().map(|c| c.name()).collect();
    knobs.insert("criteria".into(), json!(names.join(",")));
    knobs.insert("nu-cap".into(), json!(nu_cap));
    knobs.insert("tol".into(), json!(tol));
    knobs.insert("probe".into(), json!(probe));
    knobs.insert("workers".into(), json!(workers));
    knobs.insert(
        "format".into(),
        json!(if format == ScanFormat::Csv {
            "csv"
        } else {
            "json"
        }),
    );
    knobs.insert("out".into(), json!(out.display().to_string()));

    let cfg = ScanConfig {
        t_grid,
        criteria: criteria.clone(),
        search: Search { nu_cap, tol, probe },
        settings,
        workers,
    };
    let curve = scan::sweep(&cfg)?;

    for record in &curve.records {
        for c in Criterion::ALL {
            if record.get(c).is_some_and(|m| m.non_monotone) {
                eprintln!(
                    "warning: {} indicator is not single-crossing in nu at T = {}",
                    c.name(),
                    record.transmittance
                );
            }
        }
    }

    let body = match format {
        ScanFormat::Csv => output::boundary_csv(&curve)?,
        ScanFormat::Json => serde_json::to_string_pretty(&curve)? + "\n",
    };
    std::fs::write(&out, body).with_context(|| format!("--out: cannot write {}", out.display()))?;

    let manifest = RunManifest::new(
        "scan",
        knobs,
        layers.sources.clone(),
        mapping_for(&settings),
    );
    let manifest_path = output::manifest_path(&out);
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )
    .with_context(|| format!("--out: cannot write {}", manifest_path.display()))?;
    eprintln!("wrote {} and {}", out.display(), manifest_path.display());
    Ok(())
}

pub fn pmf(args: &PmfArgs) -> Result<()> {
    let mut layers = Layers::new(&["l", "nbar", "T", "n-max", "tail-tol", "format"]);
    layers.flag("l", args.l);
    layers.flag("nbar", args.nbar);
    layers.flag("T", args.t);
    layers.flag("n-max", args.n_max);
    layers.flag("tail-tol", args.tail_tol);
    layers.flag("format", args.format.as_ref());
    if let Some(path) = &args.config {
        layers.load_config(path)?;
    }

    let mut knobs = Knobs::new();
    let l: usize = layers.required("l")?;
    let nbar = nonneg("nbar", layers.required("nbar")?)?;
    let t = unit("T", layers.required("T")?)?;
    let policy = resolve_truncation(&mut layers, &mut knobs)?;
    layers.default("format", "text");
    let format = layers.required::<String>("format")?.to_ascii_lowercase();
    if format != "text" && format != "json" {
        bail!("--format must be text or json, got '{format}'");
    }
    knobs.insert("l".into(), json!(l));
    knobs.insert("nbar".into(), json!(nbar));
    knobs.insert("T".into(), json!(t));
    knobs.insert("format".into(), json!(format));

    let dist = photocount_pmf(l, nbar, t, &policy)
        .with_context(|| format!("photocount distribution for l = {l}, nbar = {nbar}, T = {t}"))?;
    let mut manifest = RunManifest::new("pmf", knobs, layers.sources.clone(), None);
    manifest
        .derived
        .insert("n-max-used".into(), json!(policy.resolve(nbar)));

    if format == "json" {
        let doc = json!({ "distribution": dist, "manifest": manifest });
        output::emit(&(serde_json::to_string_pretty(&doc)? + "\n"))?;
    } else {
        output::emit(&output::pmf_text(&dist, &manifest)?)?;
    }
    Ok(())
}
