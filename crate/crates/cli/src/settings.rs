//! Flag resolution: command-line flags override a `key=value` config file,
//! which overrides a preset, which overrides built-in defaults. Every
//! resolved knob remembers where its value came from.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;

use ngqkd::{DetectorKind, NoiseStatistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Preset {
    /// Thermal noise, perfect PNRD.
    Fig3,
    /// Thermal noise, PNRD with eta = 0.7, dark = 0.001.
    Fig4,
    /// Poissonian noise, SPAD; --eta and --dark must be given.
    Fig5,
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::from_str_ci(s)
    }
}

impl Preset {
    fn from_str_ci(s: &str) -> Result<Self> {
        <Preset as ValueEnum>::from_str(s, true)
            .map_err(|_| anyhow!("unknown preset '{s}' (expected fig3, fig4 or fig5)"))
    }

    /// Knob values fixed by the preset.
    fn values(self) -> Vec<(&'static str, &'static str)> {
        match self {
            Preset::Fig3 => vec![
                ("noise", "thermal"),
                ("detector", "pnrd"),
                ("eta", "1"),
                ("dark", "0"),
                ("p", "1"),
            ],
            Preset::Fig4 => vec![
                ("noise", "thermal"),
                ("detector", "pnrd"),
                ("eta", "0.7"),
                ("dark", "0.001"),
                ("p", "1"),
            ],
            Preset::Fig5 => vec![("noise", "poisson"), ("detector", "spad"), ("p", "1")],
        }
    }

    /// Knobs the preset leaves to the user.
    fn required(self) -> &'static [&'static str] {
        match self {
            Preset::Fig5 => &["eta", "dark"],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    Preset,
    Config,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Thermal,
    Poisson,
}

impl From<NoiseArg> for NoiseStatistics {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Thermal => NoiseStatistics::SingleModeThermal,
            NoiseArg::Poisson => NoiseStatistics::PoissonianMultimode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Pnrd,
    Spad,
}

impl From<DetectorArg> for DetectorKind {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::Pnrd => DetectorKind::Pnrd,
            DetectorArg::Spad => DetectorKind::Spad,
        }
    }
}

/// Raw knob values keyed by flag name (without the leading `--`).
#[derive(Debug, Default, Clone)]
pub struct Layers {
    flags: BTreeMap<String, String>,
    config: BTreeMap<String, String>,
    preset: BTreeMap<String, String>,
    defaults: BTreeMap<String, String>,
    known: Vec<&'static str>,
    pub preset_name: Option<Preset>,
    pub sources: BTreeMap<String, Source>,
}

impl Layers {
    /// `known` lists every key accepted in the config file for this command.
    pub fn new(known: &[&'static str]) -> Self {
        Layers {
            known: known.to_vec(),
            ..Default::default()
        }
    }

    pub fn flag<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.flags.insert(key.to_string(), v.to_string());
        }
    }

    pub fn default(&mut self, key: &str, value: &str) {
        self.defaults.insert(key.to_string(), value.to_string());
    }

    pub fn load_config(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("--config: cannot read {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "--config {}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                )
            })?;
            let key = key.trim().trim_start_matches("--");
            if !self.known.contains(&key) {
                bail!(
                    "--config {}:{}: unknown key '{key}'",
                    path.display(),
                    lineno + 1
                );
            }
            self.config
                .insert(key.to_string(), value.trim().to_string());
        }
        Ok(())
    }

    /// Applies the preset named by a flag or the config file, if any.
    pub fn apply_preset(&mut self) -> Result<()> {
        let name = self
            .flags
            .get("preset")
            .or_else(|| self.config.get("preset"))
            .cloned();
        if let Some(name) = name {
            let preset = Preset::from_str_ci(&name).context("--preset")?;
            for (k, v) in preset.values() {
                self.preset.insert(k.to_string(), v.to_string());
            }
            self.preset_name = Some(preset);
        }
        Ok(())
    }

    fn lookup(&self, key: &str) -> Option<(&str, Source)> {
        [
            (&self.flags, Source::Flag),
            (&self.config, Source::Config),
            (&self.preset, Source::Preset),
            (&self.defaults, Source::Default),
        ]
        .into_iter()
        .find_map(|(layer, src)| layer.get(key).map(|v| (v.as_str(), src)))
    }

    pub fn optional<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((raw, src)) = self.lookup(key) else {
            return Ok(None);
        };
        let value = raw
            .parse::<T>()
            .map_err(|e| anyhow!("--{key}: invalid value '{raw}': {e}"))?;
        self.sources.insert(key.to_string(), src);
        Ok(Some(value))
    }

    pub fn required<T>(&mut self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.optional(key)?
            .ok_or_else(|| anyhow!("--{key} is required"))
    }

    pub fn choice<T: ValueEnum>(&mut self, key: &str) -> Result<Option<T>> {
        let Some((raw, src)) = self.lookup(key) else {
            return Ok(None);
        };
        let value = T::from_str(raw, true).map_err(|e| anyhow!("--{key}: {e}"))?;
        self.sources.insert(key.to_string(), src);
        Ok(Some(value))
    }

    /// Fails if the preset leaves a knob to the user and none was given.
    pub fn check_preset_requirements(&self) -> Result<()> {
        let Some(preset) = self.preset_name else {
            return Ok(());
        };
        for key in preset.required() {
            if !self.flags.contains_key(*key) && !self.config.contains_key(*key) {
                bail!(
                    "--preset {} requires --{key}",
                    preset.to_possible_value().unwrap().get_name()
                );
            }
        }
        Ok(())
    }
}

pub fn unit(flag: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        bail!("--{flag} must lie in [0, 1], got {value}");
    }
    Ok(value)
}

pub fn nonneg(flag: &str, value: f64) -> Result<f64> {
    if !(value >= 0.0 && value.is_finite()) {
        bail!("--{flag} must be a finite nonnegative number, got {value}");
    }
    Ok(value)
}

pub fn positive(flag: &str, value: f64) -> Result<f64> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("--{flag} must be positive, got {value}");
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn precedence_flag_config_preset_default() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\neta = 0.5\ndark=0.01\npreset=fig4").unwrap();

        let mut layers = Layers::new(&["eta", "dark", "p", "preset"]);
        layers.default("p", "1");
        layers.default("eta", "1");
        layers.flag("dark", Some(0.02));
        layers.load_config(file.path()).unwrap();
        layers.apply_preset().unwrap();

        assert_eq!(layers.required::<f64>("eta").unwrap(), 0.5);
        assert_eq!(layers.required::<f64>("dark").unwrap(), 0.02);
        assert_eq!(layers.required::<f64>("p").unwrap(), 1.0);
        assert_eq!(layers.sources["eta"], Source::Config);
        assert_eq!(layers.sources["dark"], Source::Flag);
        assert_eq!(layers.sources["p"], Source::Preset);
        assert_eq!(layers.preset_name, Some(Preset::Fig4));
    }

    #[test]
    fn unknown_config_key_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "colour=blue").unwrap();
        let mut layers = Layers::new(&["eta"]);
        let err = layers.load_config(file.path()).unwrap_err();
        assert!(err.to_string().contains("unknown key 'colour'"));
    }

    #[test]
    fn fig5_needs_detector_parameters() {
        let mut layers = Layers::new(&["eta", "dark", "preset"]);
        layers.flag("preset", Some("fig5"));
        layers.flag("eta", Some(0.6));
        layers.apply_preset().unwrap();
        let err = layers.check_preset_requirements().unwrap_err();
        assert!(err.to_string().contains("--dark"), "{err}");
    }

    #[test]
    fn bad_number_names_flag() {
        let mut layers = Layers::new(&[]);
        layers.flag("nu", Some("lots"));
        let err = layers.required::<f64>("nu").unwrap_err();
        assert!(err.to_string().starts_with("--nu"));
    }

    #[test]
    fn range_checks_name_flag() {
        assert!(unit("eta", 1.5).unwrap_err().to_string().contains("--eta"));
        assert!(nonneg("dark", -1.0).is_err());
        assert!(positive("tol", 0.0).is_err());
    }
}
