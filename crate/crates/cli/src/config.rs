//! Run configuration: a JSON file mirroring [`RunConfig`], overridden field
//! by field by command-line flags.
//!
//! Precedence, highest first: flag, config file, built-in default. The
//! thread count additionally falls back to `VORONOI_RSW_THREADS` before the
//! logical-core count.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use voronoi_rsw::events::{Direction, EventKind, EventSpec};
use voronoi_rsw::mc::TrialPlan;
use voronoi_rsw::rsw::Model;
use voronoi_rsw::tiling::Color;

use crate::error::{usage, Result};

pub const THREADS_ENV: &str = "VORONOI_RSW_THREADS";

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_C0: f64 = 0.5;

fn parse_color(s: &str) -> std::result::Result<Color, String> {
    match s {
        "black" => Ok(Color::Black),
        "white" => Ok(Color::White),
        _ => Err(format!("unknown color '{s}' (expected black or white)")),
    }
}

fn parse_direction(s: &str) -> std::result::Result<Direction, String> {
    match s {
        "horizontal" => Ok(Direction::Horizontal),
        "vertical" => Ok(Direction::Vertical),
        _ => Err(format!("unknown direction '{s}' (expected horizontal or vertical)")),
    }
}

/// Every setting of a run. All fields are optional so that a file and the
/// flags can each supply a subset.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Event kind: crossing, h, x, circuit, one_arm or f.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Scale.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Aspect ratio of a crossing rectangle.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Inner half-side of a circuit annulus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Outer half-side of a circuit annulus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Outer half-side of a one-arm event.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long, value_parser = parse_color)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    #[arg(long, value_parser = parse_direction)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,

    /// Probability that a site is black.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    /// Trial budget.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// Stop once the interval half-width is at most this.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_target: Option<f64>,
    /// Confidence level of reported intervals.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[arg(long = "seed")]
    #[serde(alias = "seed", skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// Sweep values of p.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    /// Sweep values of s.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_list: Option<Vec<f64>>,
    /// Sweep values of rho.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_list: Option<Vec<f64>>,
    /// Values of alpha for a phi curve.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    /// Outer scales of a one-arm fit.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    /// Inner scale of a one-arm fit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    /// Reference constant for alpha.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,

    /// Append CSV rows to this file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Append a JSONL run record to this file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),+ $(,)?) => {
        RunConfig { $($f: $top.$f.or($base.$f)),+ }
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields of `top` win over fields of `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self, top, kind, s, rho, alpha, beta, a, b, t, color, direction, p, intensity, n_max, ci_target,
            confidence, master_seed, threads, p_list, s_list, rho_list, grid, t_list, s0, c0, csv, log,
        )
    }

    /// Resolve threads from the environment when no explicit value is set.
    pub fn with_env_threads(mut self) -> Result<Self> {
        if self.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
                self.threads = Some(n);
            }
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn model(&self) -> Result<Model> {
        Ok(Model::new(self.p.unwrap_or(0.5), self.intensity.unwrap_or(1.0))?)
    }

    pub fn z(&self) -> Result<f64> {
        let c = self.confidence.unwrap_or(DEFAULT_CONFIDENCE);
        if !(c > 0.0 && c < 1.0) {
            return Err(usage(format!("confidence must lie in (0, 1), got {c}")));
        }
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        Ok(normal.inverse_cdf(0.5 + 0.5 * c))
    }

    pub fn plan(&self) -> Result<TrialPlan> {
        let mut plan = TrialPlan::default();
        if let Some(n) = self.n_max {
            plan.n_max = n;
        }
        if let Some(c) = self.ci_target {
            plan.ci_target = c;
        }
        plan.z = self.z()?;
        plan.threads = self.threads;
        plan.validate()?;
        Ok(plan)
    }

    /// A plan that always spends its whole budget.
    pub fn fixed_plan(&self) -> Result<TrialPlan> {
        let mut plan = self.plan()?;
        plan.ci_target = f64::MIN_POSITIVE;
        Ok(plan)
    }

    pub fn c0(&self) -> Result<f64> {
        let c0 = self.c0.unwrap_or(DEFAULT_C0);
        if !(c0 > 0.0 && c0 <= 1.0) {
            return Err(usage(format!("c0 must lie in (0, 1], got {c0}")));
        }
        Ok(c0)
    }

    pub fn require_s(&self) -> Result<f64> {
        self.s.ok_or_else(|| usage("missing --s"))
    }

    /// The event described by the event fields. Fields that the kind does
    /// not use are rejected rather than ignored.
    pub fn event_kind(&self) -> Result<EventKind> {
        let kind = self.kind.as_deref().ok_or_else(|| usage("missing --kind"))?;
        let set = [
            ("s", self.s.is_some()),
            ("rho", self.rho.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("t", self.t.is_some()),
            ("color", self.color.is_some()),
            ("direction", self.direction.is_some()),
        ];
        let used: &[&str] = match kind {
            "crossing" => &["s", "rho", "color", "direction"],
            "h" => &["s", "alpha", "beta"],
            "x" => &["s", "alpha"],
            "circuit" => &["a", "b", "color"],
            "one_arm" => &["s", "t"],
            "f" => &["s"],
            other => {
                return Err(usage(format!(
                    "unknown event kind '{other}' (expected crossing, h, x, circuit, one_arm or f)"
                )))
            }
        };
        if let Some((name, _)) = set.iter().find(|(name, on)| *on && !used.contains(name)) {
            return Err(usage(format!("parameter {name} does not apply to {kind} events")));
        }
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("{kind} events need --{name}")));
        let color = self.color.unwrap_or(Color::Black);
        let event = match kind {
            "crossing" => EventKind::Crossing {
                rho: need(self.rho, "rho")?,
                s: need(self.s, "s")?,
                color,
                direction: self.direction.unwrap_or_default(),
            },
            "h" => EventKind::H {
                s: need(self.s, "s")?,
                alpha: need(self.alpha, "alpha")?,
                beta: need(self.beta, "beta")?,
            },
            "x" => EventKind::X {
                s: need(self.s, "s")?,
                alpha: need(self.alpha, "alpha")?,
            },
            "circuit" => EventKind::Circuit {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
                color,
            },
            "one_arm" => EventKind::OneArm {
                s: need(self.s, "s")?,
                t: need(self.t, "t")?,
            },
            _ => EventKind::F { s: need(self.s, "s")? },
        };
        Ok(event)
    }

    pub fn event_spec(&self) -> Result<EventSpec> {
        let model = self.model()?;
        Ok(EventSpec::new(self.event_kind()?, model.p, model.intensity)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_fields() {
        let file: RunConfig = serde_json::from_str(r#"{"kind":"crossing","s":8,"rho":1,"p":0.3,"seed":5}"#).unwrap();
        let flags = RunConfig {
            p: Some(0.7),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!(c.p, Some(0.7));
        assert_eq!(c.s, Some(8.0));
        assert_eq!(c.seed(), 5);
    }

    #[test]
    fn unused_event_fields_are_rejected() {
        let c = RunConfig {
            kind: Some("circuit".into()),
            a: Some(1.0),
            b: Some(2.0),
            s: Some(3.0),
            ..Default::default()
        };
        assert!(c.event_kind().unwrap_err().to_string().contains("parameter s"));
    }

    #[test]
    fn missing_fields_are_named() {
        let c = RunConfig {
            kind: Some("one_arm".into()),
            s: Some(1.0),
            ..Default::default()
        };
        assert_eq!(c.event_kind().unwrap_err().to_string(), "one_arm events need --t");
    }

    #[test]
    fn confidence_quantile() {
        let c = RunConfig::default();
        assert!((c.z().unwrap() - 1.959964).abs() < 1e-6);
        let bad = RunConfig {
            confidence: Some(1.0),
            ..Default::default()
        };
        assert!(bad.z().is_err());
    }
}
