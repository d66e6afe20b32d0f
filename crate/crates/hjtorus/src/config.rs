//! Experiment configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use hjtorus_core::{GridFunction, InitialDatum, SchemeConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::descriptor::HamiltonianSpec;
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// `H`.
    pub hamiltonian: HamiltonianSpec,
    /// `G` for two-Hamiltonian commands; defaults to `negate(H)`.
    pub second: Option<HamiltonianSpec>,
    /// `zero | const:<c> | sawtooth | cosine | small-sine | pendulum-weak-kam | file:<path>`
    pub u0: String,
    pub n: usize,
    /// Record times (`solve`), `t` grid (`defect`), push times (`flow`).
    pub t: Vec<f64>,
    /// `s` grid (`defect`).
    pub s: Vec<f64>,
    /// Horizon `T` of `critical`.
    pub horizon: f64,
    pub cfl: f64,
    /// Momentum radius for `bracket`; defaults to the gradient bound of `u0`.
    pub radius: Option<f64>,
    pub flow_dt: f64,
    pub budget: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            hamiltonian: HamiltonianSpec::Pendulum {},
            second: None,
            u0: "zero".into(),
            n: 512,
            t: Vec::new(),
            s: Vec::new(),
            horizon: 20.0,
            cfl: hjtorus_core::solver::CFL_DEFAULT,
            radius: None,
            flow_dt: 1e-3,
            budget: hjtorus_core::weakkam::DEFAULT_C11_BUDGET,
            out: PathBuf::from("out"),
        }
    }
}

/// Per-field command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub t: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config; the top level must be a JSON object.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if !value.is_object() {
            return Err(CliError::Config("config must be a JSON object".into()));
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Reads the config file (or the defaults when `path` is `None`) and
    /// applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::from_json(&text).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", p.display())),
                    other => other,
                })?
            }
            None => Self::default(),
        };
        if let Some(n) = overrides.n {
            cfg.n = n;
        }
        if let Some(t) = &overrides.t {
            cfg.t = t.clone();
        }
        if let Some(s) = &overrides.s {
            cfg.s = s.clone();
        }
        if let Some(out) = &overrides.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n.is_power_of_two() && (64..=8192).contains(&self.n)) {
            return Err(CliError::Config(format!("n = {} is not a power of two in [64, 8192]", self.n)));
        }
        for (name, list) in [("t", &self.t), ("s", &self.s)] {
            if list.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(CliError::Config(format!("{name} values must be finite and >= 0")));
            }
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(CliError::Config(format!("{name} values must be strictly increasing")));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.flow_dt.is_finite() && self.flow_dt > 0.0) {
            return Err(CliError::Config(format!("flow_dt must be positive, got {}", self.flow_dt)));
        }
        SchemeConfig::new(self.cfl)?;
        self.datum()?;
        Ok(())
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig { cfl: self.cfl }
    }

    pub fn second_spec(&self) -> HamiltonianSpec {
        self.second.clone().unwrap_or_else(|| HamiltonianSpec::negate(self.hamiltonian.clone()))
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        parse_datum(&self.u0)
    }

    pub fn initial(&self) -> Result<GridFunction> {
        Ok(self.datum()?.sample(self.n)?)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub fn parse_datum(spec: &str) -> Result<InitialDatum> {
    let spec = spec.trim();
    Ok(match spec {
        "zero" => InitialDatum::Zero,
        "sawtooth" => InitialDatum::Sawtooth,
        "cosine" => InitialDatum::Cosine,
        "small-sine" => InitialDatum::SmallSine,
        "pendulum-weak-kam" => InitialDatum::PendulumWeakKam,
        _ => {
            if let Some(c) = spec.strip_prefix("const:") {
                let c: f64 = c.parse().map_err(|_| CliError::Config(format!("bad constant in {spec:?}")))?;
                if !c.is_finite() {
                    return Err(CliError::Config(format!("bad constant in {spec:?}")));
                }
                InitialDatum::Constant(c)
            } else if let Some(path) = spec.strip_prefix("file:") {
                InitialDatum::Samples(io::read_grid_csv(Path::new(path))?)
            } else {
                return Err(CliError::Config(format!("unknown initial datum {spec:?}")));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides { n: Some(128), t: Some(vec![0.0, 0.5]), s: None, out: Some("x".into()) };
        let cfg = ExperimentConfig::load(None, &o).unwrap();
        assert_eq!((cfg.n, cfg.t.clone(), cfg.out.clone()), (128, vec![0.0, 0.5], PathBuf::from("x")));
        let bad = Overrides { n: Some(100), ..Overrides::default() };
        assert_eq!(ExperimentConfig::load(None, &bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn parses_json() {
        let cfg =
            ExperimentConfig::from_json(r#"{"hamiltonian":{"kind":"kinetic"},"u0":"const:0.3","n":256,"t":[0,1]}"#)
                .unwrap();
        assert_eq!(cfg.hamiltonian, HamiltonianSpec::Kinetic { stiffness: 1.0 });
        assert_eq!(cfg.datum().unwrap(), InitialDatum::Constant(0.3));
        assert!(ExperimentConfig::from_json(r#"{"nn":3}"#).is_err());
        assert!(ExperimentConfig::from_json("{").is_err());
    }

    #[test]
    fn datum_names() {
        assert_eq!(parse_datum("pendulum-weak-kam").unwrap(), InitialDatum::PendulumWeakKam);
        assert!(parse_datum("const:abc").is_err());
        assert!(parse_datum("file:/nonexistent/u0.csv").is_err());
        assert!(parse_datum("spline").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.n = 1024;
        assert_ne!(a.hash(), b.hash());
    }
}
