//! JSON descriptors for the Hamiltonian catalog.
//!
//! ```json
//! {"kind": "negate", "inner": {"kind": "pendulum"}}
//! ```

use hjtorus_core::{Hamiltonian1D, HjError, Potential};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// `p^2/2 + cos(2 pi x)`
    Pendulum {},
    /// `stiffness * p^2 / 2`
    Kinetic {
        #[serde(default = "one")]
        stiffness: f64,
    },
    /// `p^2/2 + offset + sum a_k cos(2 pi k x) + b_k sin(2 pi k x)`
    Mechanical {
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Negate {
        inner: Box<HamiltonianSpec>,
    },
    Reflect {
        inner: Box<HamiltonianSpec>,
    },
    /// Potential samples on a uniform grid; `kinetic = false` drops the `p^2/2` term.
    Tabulated {
        values: Vec<f64>,
        #[serde(default = "yes")]
        kinetic: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl HamiltonianSpec {
    pub fn negate(inner: HamiltonianSpec) -> Self {
        HamiltonianSpec::Negate { inner: Box::new(inner) }
    }

    pub fn build(&self) -> Result<Hamiltonian1D, HjError> {
        Ok(match self {
            HamiltonianSpec::Pendulum {} => Hamiltonian1D::pendulum(),
            HamiltonianSpec::Kinetic { stiffness } => Hamiltonian1D::kinetic_scaled(*stiffness)?,
            HamiltonianSpec::Mechanical { offset, cos, sin } => {
                Hamiltonian1D::mechanical(Potential { offset: *offset, cos: cos.clone(), sin: sin.clone() })?
            }
            HamiltonianSpec::Negate { inner } => Hamiltonian1D::negate(inner.build()?),
            HamiltonianSpec::Reflect { inner } => Hamiltonian1D::reflect(inner.build()?),
            HamiltonianSpec::Tabulated { values, kinetic } => Hamiltonian1D::tabulated(values.clone(), *kinetic)?,
        })
    }

    pub fn parse(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}
