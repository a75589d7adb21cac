//! Run configuration: every flag has a field here, and a JSON config file
//! given with `--config` overrides the flags it sets.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use shearframe::frame::Variant;
use shearframe::spaces::parse_exponent;
use shearframe::verify::VerifyConfig;
use shearframe::windows::WindowParams;

use crate::CliError;

/// A Lebesgue or summability exponent; accepts numbers and `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl std::str::FromStr for Exponent {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_exponent(s).map(Exponent)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Exponent(v)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub j_max: Option<u32>,
    pub variant: Option<Variant>,
    pub period: Option<usize>,
    pub windows: Option<WindowParams>,
    /// Sample count for `windows dump`.
    pub grid: Option<usize>,
    pub input: Option<PathBuf>,
    pub frame: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub suite: Option<String>,
    pub space: Option<String>,
    pub alpha: Option<f64>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub format: Option<ReportFormat>,
    /// Full verification configuration; replaces the defaults derived from
    /// d, N and seed.
    pub verify: Option<VerifyConfig>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overridden_by(mut self, top: RunConfig) -> RunConfig {
        overlay!(self, top; d, n, j_max, variant, period, windows, grid, input, frame, out, seed, suite, space,
                 alpha, p, q, format, verify);
        self
    }

    pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_win() {
        let flags = RunConfig {
            d: Some(2),
            n: Some(64),
            seed: Some(1),
            ..Default::default()
        };
        let file: RunConfig = serde_json::from_str(r#"{"N": 128, "p": "inf", "q": 2}"#).unwrap();
        let cfg = flags.overridden_by(file);
        assert_eq!((cfg.d, cfg.n, cfg.seed), (Some(2), Some(128), Some(1)));
        assert_eq!(cfg.p, Some(Exponent(f64::INFINITY)));
        assert_eq!(cfg.q, Some(Exponent(2.0)));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig {
            d: Some(3),
            p: Some(Exponent(f64::INFINITY)),
            variant: Some(Variant::Smooth),
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"dims": 2}"#).is_err());
    }
}
