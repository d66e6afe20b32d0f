//! JSON shapes of the experiment outputs.

use hjtorus_core::multitime::MultiTimeReport;
use hjtorus_core::weakkam::{RegularityReport, TransverseReport, WeakKamReport};
use hjtorus_core::SolveParams;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiTimeJson {
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub defect: Vec<Vec<f64>>,
    pub max_defect: f64,
    pub argmax: [f64; 2],
    pub refinement: Vec<(usize, f64)>,
    pub verdict: String,
}

impl MultiTimeJson {
    pub fn new(report: &MultiTimeReport, verdict: &str) -> Self {
        MultiTimeJson {
            t_grid: report.t_grid.clone(),
            s_grid: report.s_grid.clone(),
            defect: report.defect.clone(),
            max_defect: report.max_defect,
            argmax: [report.argmax.0, report.argmax.1],
            refinement: report.refinement_history.clone(),
            verdict: verdict.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakKamJson {
    pub c_estimate: f64,
    pub history: Vec<(f64, f64)>,
    pub residual: f64,
    pub converged: bool,
}

impl From<&WeakKamReport> for WeakKamJson {
    fn from(r: &WeakKamReport) -> Self {
        WeakKamJson {
            c_estimate: r.c_estimate,
            history: r.history.clone(),
            residual: r.residual,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityJson {
    pub t: f64,
    #[serde(rename = "semiconcavity_C")]
    pub semiconcavity_c: f64,
    #[serde(rename = "semiconvexity_C")]
    pub semiconvexity_c: f64,
    pub c11: bool,
    pub lip: f64,
    pub budget: f64,
}

impl RegularityJson {
    pub fn new(t: f64, r: &RegularityReport) -> Self {
        RegularityJson {
            t,
            semiconcavity_c: r.semiconcavity_c,
            semiconvexity_c: r.semiconvexity_c,
            c11: r.c11,
            lip: r.lip,
            budget: r.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushJson {
    pub t: f64,
    pub is_graph: bool,
    pub graph_distortion: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransverseJson {
    pub invariant: bool,
    pub alpha: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pushes: Vec<PushJson>,
}

impl From<&TransverseReport> for TransverseJson {
    fn from(r: &TransverseReport) -> Self {
        TransverseJson {
            invariant: r.invariant,
            alpha: r.alpha,
            residual: r.residual,
            tolerance: r.tolerance,
            pushes: r
                .pushes
                .iter()
                .map(|p| PushJson {
                    t: p.t,
                    is_graph: p.is_graph,
                    graph_distortion: p.graph_distortion,
                    hausdorff: p.hausdorff,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketJson {
    pub bracket_sup: f64,
    pub radius: f64,
    pub nx: usize,
    pub np: usize,
}

/// Scheme data recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeJson {
    pub dt: f64,
    pub theta: f64,
    pub grad_bound: f64,
}

impl SchemeJson {
    pub fn new(params: &SolveParams, n: usize) -> Self {
        SchemeJson { dt: params.dt(1.0 / n as f64), theta: params.theta, grad_bound: params.grad_bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub n: usize,
    pub dx: f64,
    pub dt: Option<f64>,
    pub theta: Option<f64>,
    #[serde(rename = "P")]
    pub grad_bound: Option<f64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, scheme: Option<&SchemeJson>, outputs: Vec<String>) -> Self {
        Manifest {
            command: command.to_string(),
            config: config.clone(),
            config_hash: config.hash(),
            n: config.n,
            dx: 1.0 / config.n as f64,
            dt: scheme.map(|s| s.dt),
            theta: scheme.map(|s| s.theta),
            grad_bound: scheme.map(|s| s.grad_bound),
            outputs,
        }
    }
}
