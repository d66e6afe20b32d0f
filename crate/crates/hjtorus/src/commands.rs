//! One function per subcommand. Each writes its artifacts under `cfg.out`
//! together with a `manifest.json` and returns the main report.

use std::fmt::Write as _;

use hjtorus_core::hamiltonians::{poisson_bracket_sup, push_graph};
use hjtorus_core::multitime::{self, VerdictConfig};
use hjtorus_core::solver::{self, TimeSlab};
use hjtorus_core::weakkam::{self, TransverseOptions};
use hjtorus_core::{FlowState, GraphCloud, Hamiltonian1D, HjError, InitialDatum};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::descriptor::HamiltonianSpec;
use crate::error::{CliError, Result};
use crate::io::{self, fmt_num};
use crate::reports::{BracketJson, Manifest, MultiTimeJson, RegularityJson, SchemeJson, TransverseJson, WeakKamJson};

const DEFAULT_GRID: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
const BRACKET_LATTICE: usize = 256;
const MAX_N: usize = 8192;

fn times_or(list: &[f64], default: &[f64]) -> Vec<f64> {
    if list.is_empty() {
        default.to_vec()
    } else {
        list.to_vec()
    }
}

fn time_label(t: f64) -> String {
    format!("{t}")
}

fn write_text(cfg: &ExperimentConfig, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    io::write_atomic(&cfg.out.join(name), text.as_bytes())?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_report<T: Serialize>(cfg: &ExperimentConfig, name: &str, value: &T, outputs: &mut Vec<String>) -> Result<()> {
    io::write_json(&cfg.out.join(name), value)?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_manifest(
    cfg: &ExperimentConfig,
    command: &str,
    scheme: Option<&SchemeJson>,
    outputs: Vec<String>,
) -> Result<()> {
    io::write_json(&cfg.out.join("manifest.json"), &Manifest::new(command, cfg, scheme, outputs))
}

fn hamiltonian(cfg: &ExperimentConfig) -> Result<Hamiltonian1D> {
    Ok(cfg.hamiltonian.build()?)
}

/// Evolves `u0` and writes `u_t<t>.csv` for each record time plus `slab.csv`.
pub fn solve(cfg: &ExperimentConfig) -> Result<TimeSlab> {
    let h = hamiltonian(cfg)?;
    let u0 = cfg.initial()?;
    let times = times_or(&cfg.t, &[1.0]);
    let params = cfg.scheme().params(&h, &u0)?.with_record_times(times.clone());
    let slab = solver::evolve_recording(&h, &u0, &params)?;

    let mut outputs = Vec::new();
    for &t in &times {
        let k = slab.times().iter().position(|&s| s == t).expect("record time is in the slab");
        write_text(cfg, &format!("u_t{}.csv", time_label(t)), &io::grid_csv(&slab.values()[k]), &mut outputs)?;
    }
    write_text(cfg, "slab.csv", &io::slab_csv(&slab), &mut outputs)?;
    write_manifest(cfg, "solve", Some(&SchemeJson::new(&params, cfg.n)), outputs)?;
    Ok(slab)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub max_error: f64,
    pub tolerance: f64,
    pub within: bool,
}

/// Compares the scheme for `p^2/2` against the Hopf-Lax formula at each
/// positive record time. The tolerance column is `3 sqrt(dx)`.
pub fn oracle(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    if cfg.hamiltonian != (HamiltonianSpec::Kinetic { stiffness: 1.0 }) {
        return Err(CliError::Config("oracle needs hamiltonian {\"kind\": \"kinetic\"} with stiffness 1".into()));
    }
    let h = hamiltonian(cfg)?;
    let u0 = cfg.initial()?;
    let times: Vec<f64> = times_or(&cfg.t, &[0.25]).into_iter().filter(|&t| t > 0.0).collect();
    if times.is_empty() {
        return Err(CliError::Config("oracle needs a positive time".into()));
    }
    let params = cfg.scheme().params(&h, &u0)?.with_record_times(times.clone());
    let slab = solver::evolve_recording(&h, &u0, &params)?;
    let tolerance = 3.0 * u0.dx().sqrt();

    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    for (&t, scheme) in slab.times().iter().zip(slab.values()).skip(1) {
        let exact = solver::hopf_lax(&u0, t)?;
        let mut csv = String::from("x,scheme,hopf_lax,abs_error,tolerance\n");
        for j in 0..u0.n() {
            let (a, b) = (scheme.values()[j], exact.values()[j]);
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_num(u0.x(j)),
                fmt_num(a),
                fmt_num(b),
                fmt_num((a - b).abs()),
                fmt_num(tolerance)
            );
        }
        write_text(cfg, &format!("hopf_lax_t{}.csv", time_label(t)), &io::grid_csv(&exact), &mut outputs)?;
        write_text(cfg, &format!("compare_t{}.csv", time_label(t)), &csv, &mut outputs)?;
        let max_error = scheme.sup_distance(&exact);
        rows.push(OracleRow { t, max_error, tolerance, within: max_error <= tolerance });
    }
    write_report(cfg, "oracle.json", &rows, &mut outputs)?;
    write_manifest(cfg, "oracle", Some(&SchemeJson::new(&params, cfg.n)), outputs)?;
    Ok(rows)
}

/// Defect matrix refined at `n` and `2n`. Pairs that meet the existence
/// hypotheses get a verdict; other pairs are reported as `unclassified`.
pub fn defect(cfg: &ExperimentConfig) -> Result<MultiTimeJson> {
    let h = hamiltonian(cfg)?;
    let g = cfg.second_spec().build()?;
    let datum = cfg.datum()?;
    let t_grid = times_or(&cfg.t, &DEFAULT_GRID);
    let s_grid = times_or(&cfg.s, &DEFAULT_GRID);
    let json = defect_json(&h, &g, &datum, cfg, &t_grid, &s_grid)?;

    let mut outputs = Vec::new();
    write_report(cfg, "defect.json", &json, &mut outputs)?;
    write_text(cfg, "defect.csv", &defect_csv(&json), &mut outputs)?;
    write_manifest(cfg, "defect", None, outputs)?;
    Ok(json)
}

fn defect_json(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    datum: &InitialDatum,
    cfg: &ExperimentConfig,
    t_grid: &[f64],
    s_grid: &[f64],
) -> Result<MultiTimeJson> {
    let levels: Vec<usize> = if 2 * cfg.n <= MAX_N { vec![cfg.n, 2 * cfg.n] } else { vec![cfg.n] };
    let classifiable = levels.len() == 2
        && match multitime::check_pair(h, g, &datum.sample(2 * cfg.n)?) {
            Ok(_) => true,
            Err(HjError::Precondition(_)) => false,
            Err(e) => return Err(e.into()),
        };
    if classifiable {
        let vcfg = VerdictConfig { n: cfg.n, t_grid: t_grid.to_vec(), s_grid: s_grid.to_vec(), scheme: cfg.scheme() };
        let v = multitime::multitime_verdict(h, g, datum, &vcfg)?;
        Ok(MultiTimeJson::new(&v.report, v.verdict.as_str()))
    } else {
        let report = multitime::commutation_defect_refined(h, g, datum, &levels, t_grid, s_grid, cfg.scheme())?;
        Ok(MultiTimeJson::new(&report, "unclassified"))
    }
}

fn defect_csv(json: &MultiTimeJson) -> String {
    let mut csv = String::from("t,s,defect\n");
    for (t, row) in json.t_grid.iter().zip(&json.defect) {
        for (s, d) in json.s_grid.iter().zip(row) {
            let _ = writeln!(csv, "{},{},{}", fmt_num(*t), fmt_num(*s), fmt_num(*d));
        }
    }
    csv
}

/// Large-time critical value of `H` from `u0` over `cfg.horizon`.
pub fn critical(cfg: &ExperimentConfig) -> Result<WeakKamJson> {
    let h = hamiltonian(cfg)?;
    let u0 = cfg.initial()?;
    let params = cfg.scheme().params(&h, &u0)?;
    let report = weakkam::critical_value(&h, &u0, cfg.horizon, cfg.scheme())?;
    let json = WeakKamJson::from(&report);
    let mut outputs = Vec::new();
    write_report(cfg, "critical.json", &json, &mut outputs)?;
    write_manifest(cfg, "critical", Some(&SchemeJson::new(&params, cfg.n)), outputs)?;
    Ok(json)
}

/// Sampled `sup |{H, G}|` over `|p| <= radius`.
pub fn bracket(cfg: &ExperimentConfig) -> Result<BracketJson> {
    let h = hamiltonian(cfg)?;
    let g = cfg.second_spec().build()?;
    let radius = match cfg.radius {
        Some(r) => r,
        None => {
            let u0 = cfg.initial()?;
            solver::grad_bound(&h, &u0)?.max(solver::grad_bound(&g, &u0)?)
        }
    };
    let sup = poisson_bracket_sup(&h, &g, radius, BRACKET_LATTICE, BRACKET_LATTICE)?;
    let json = BracketJson { bracket_sup: sup, radius, nx: BRACKET_LATTICE, np: BRACKET_LATTICE };
    let mut outputs = Vec::new();
    write_report(cfg, "bracket.json", &json, &mut outputs)?;
    write_manifest(cfg, "bracket", None, outputs)?;
    Ok(json)
}

fn points_csv(points: &[FlowState]) -> String {
    let mut csv = String::from("x,p\n");
    for s in points {
        let _ = writeln!(csv, "{},{}", fmt_num(s.x), fmt_num(s.p));
    }
    csv
}

fn flow_options(cfg: &ExperimentConfig) -> TransverseOptions {
    TransverseOptions { dt: cfg.flow_dt, hausdorff_tol: None, kink_threshold: cfg.budget }
}

/// Pushes the derivative graph of `u0` by the flow of `H`.
pub fn flow(cfg: &ExperimentConfig) -> Result<TransverseJson> {
    let h = hamiltonian(cfg)?;
    let u0 = cfg.initial()?;
    let times = times_or(&cfg.t, &[1.0]);
    let opts = flow_options(cfg);
    let cloud = GraphCloud::from_slopes(&weakkam::discrete_derivative(&u0, opts.kink_threshold))?;
    let report = weakkam::transverse_check_graph(&h, &cloud, &times, &opts)?;

    let mut outputs = Vec::new();
    write_text(cfg, "graph_t0.csv", &points_csv(cloud.points()), &mut outputs)?;
    for &t in &times {
        let pushed = push_graph(&h, &cloud, t, opts.dt)?;
        write_text(cfg, &format!("graph_t{}.csv", time_label(t)), &points_csv(&pushed.pushed), &mut outputs)?;
    }
    let json = TransverseJson::from(&report);
    write_report(cfg, "flow.json", &json, &mut outputs)?;
    write_manifest(cfg, "flow", None, outputs)?;
    Ok(json)
}

/// Second-difference constants of `S^t_H u0` at each record time.
pub fn regularity(cfg: &ExperimentConfig) -> Result<Vec<RegularityJson>> {
    let h = hamiltonian(cfg)?;
    let u0 = cfg.initial()?;
    let times = times_or(&cfg.t, &[1.0]);
    let params = cfg.scheme().params(&h, &u0)?.with_record_times(times.clone());
    let slab = solver::evolve_recording(&h, &u0, &params)?;
    let rows: Vec<RegularityJson> = times
        .iter()
        .map(|&t| {
            let k = slab.times().iter().position(|&s| s == t).expect("record time is in the slab");
            RegularityJson::new(t, &weakkam::regularity_with_budget(&slab.values()[k], cfg.budget))
        })
        .collect();
    let mut outputs = Vec::new();
    write_report(cfg, "regularity.json", &rows, &mut outputs)?;
    write_manifest(cfg, "regularity", Some(&SchemeJson::new(&params, cfg.n)), outputs)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldEvidence {
    pub t: f64,
    pub is_graph: bool,
    pub graph_distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSummary {
    pub verdict: String,
    pub max_defect: f64,
    pub refinement: Vec<(usize, f64)>,
    pub critical_value: f64,
    pub weak_kam_c11: bool,
    #[serde(rename = "weak_kam_semiconcavity_C")]
    pub weak_kam_semiconcavity: f64,
    pub weak_kam_graph_invariant: bool,
    pub zero_section_folds: bool,
    pub zero_section: Vec<FoldEvidence>,
}

/// The pendulum pair `(H, -H)`: defect matrix and verdict from `cfg.u0`, the
/// regularity and graph invariance of the weak KAM solution, the critical
/// value, and the folding of the zero section. The Hamiltonian fields of the
/// config are ignored.
pub fn pendulum_demo(cfg: &ExperimentConfig) -> Result<DemoSummary> {
    let h = Hamiltonian1D::pendulum();
    let g = Hamiltonian1D::negate(Hamiltonian1D::pendulum());
    let datum = cfg.datum()?;
    let t_grid = times_or(&cfg.t, &DEFAULT_GRID);
    let s_grid = times_or(&cfg.s, &DEFAULT_GRID);
    let mut outputs = Vec::new();

    let defect = defect_json(&h, &g, &datum, cfg, &t_grid, &s_grid)?;
    write_report(cfg, "defect.json", &defect, &mut outputs)?;
    write_text(cfg, "defect.csv", &defect_csv(&defect), &mut outputs)?;

    let v = weakkam::pendulum_weak_kam(cfg.n)?;
    write_text(cfg, "weak_kam.csv", &io::grid_csv(&v), &mut outputs)?;
    let reg = RegularityJson::new(0.0, &weakkam::regularity_with_budget(&v, cfg.budget));
    write_report(cfg, "regularity.json", &reg, &mut outputs)?;
    let invariance = weakkam::transverse_check_with(&h, &v, &[0.5, 1.0], &flow_options(cfg))?;
    write_report(cfg, "weak_kam_flow.json", &TransverseJson::from(&invariance), &mut outputs)?;

    let zero = InitialDatum::Zero.sample(cfg.n)?;
    let critical = WeakKamJson::from(&weakkam::critical_value(&h, &zero, cfg.horizon, cfg.scheme())?);
    write_report(cfg, "critical.json", &critical, &mut outputs)?;

    let section = GraphCloud::from_slopes(&vec![0.0; cfg.n])?;
    let mut zero_section = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let pushed = push_graph(&h, &section, t, cfg.flow_dt)?;
        write_text(cfg, &format!("zero_section_t{}.csv", time_label(t)), &points_csv(&pushed.pushed), &mut outputs)?;
        zero_section.push(FoldEvidence { t, is_graph: pushed.is_graph, graph_distortion: pushed.graph_distortion });
    }

    let summary = DemoSummary {
        verdict: defect.verdict.clone(),
        max_defect: defect.max_defect,
        refinement: defect.refinement.clone(),
        critical_value: critical.c_estimate,
        weak_kam_c11: reg.c11,
        weak_kam_semiconcavity: reg.semiconcavity_c,
        weak_kam_graph_invariant: invariance.invariant,
        zero_section_folds: zero_section.iter().any(|f| !f.is_graph),
        zero_section,
    };
    write_report(cfg, "summary.json", &summary, &mut outputs)?;
    write_manifest(cfg, "pendulum-demo", None, outputs)?;
    Ok(summary)
}
