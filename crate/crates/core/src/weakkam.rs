//! Weak KAM diagnostics: critical values, semiconcavity constants and
//! invariant-graph checks.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{HjError, Result};
use crate::grid::{GridFunction, InitialDatum};
use crate::hamiltonians::{push_graph, Convexity, FlowState, GraphCloud, Hamiltonian1D};
use crate::math;
use crate::multitime::{multitime_verdict, Verdict, VerdictConfig};
use crate::solver::{evolve_recording, SchemeConfig};

/// Second-difference magnitude separating curvature from kinks.
pub const DEFAULT_C11_BUDGET: f64 = 100.0;

/// Slopes closer than this are considered converged.
const SLOPE_TOLERANCE: f64 = 1e-3;

/// The pendulum weak KAM solution
/// `(2/pi)(1 - cos(pi x))` on `[0, 1/2]`, `(2/pi)(1 + cos(pi x))` on `(1/2, 1)`.
pub fn pendulum_weak_kam_value(x: f64) -> f64 {
    let x = math::wrap_unit(x);
    let c = math::cos(PI * x);
    if x <= 0.5 {
        2.0 / PI * (1.0 - c)
    } else {
        2.0 / PI * (1.0 + c)
    }
}

/// Derivative of [`pendulum_weak_kam_value`], taking the left branch at `x = 1/2`.
pub fn pendulum_weak_kam_slope(x: f64) -> f64 {
    let x = math::wrap_unit(x);
    let s = 2.0 * math::sin(PI * x);
    if x <= 0.5 {
        s
    } else {
        -s
    }
}

pub fn pendulum_weak_kam(n: usize) -> Result<GridFunction> {
    InitialDatum::PendulumWeakKam.sample(n)
}

/// The derivative graph of the pendulum weak KAM solution, sampled branchwise
/// on the two separatrices.
pub fn pendulum_separatrix_graph(n: usize) -> Result<GraphCloud> {
    crate::grid::check_size(n)?;
    let slopes: Vec<f64> = (0..n).map(|j| pendulum_weak_kam_slope(j as f64 / n as f64)).collect();
    GraphCloud::from_slopes(&slopes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakKamReport {
    /// Estimate of the critical value.
    pub c_estimate: f64,
    /// `(T_k, slope at T_k)` for `T_k` in `T/4, T/2, 3T/4, T`.
    pub history: Vec<(f64, f64)>,
    /// `|| (S^T u0 + c T) - (S^{T-1} u0 + c (T-1)) ||_inf`
    pub residual: f64,
    pub converged: bool,
}

/// Large-time slope `-(S^T u0 - S^{T-1} u0)`, averaged over the nodes.
pub fn critical_value(
    h: &Hamiltonian1D,
    u0: &GridFunction,
    horizon: f64,
    scheme: SchemeConfig,
) -> Result<WeakKamReport> {
    if h.convexity() != Convexity::TonelliConvex {
        return Err(HjError::Precondition("critical value needs a Tonelli Hamiltonian".into()));
    }
    if !(horizon.is_finite() && horizon >= 10.0) {
        return Err(HjError::InvalidArgument(format!("horizon must be >= 10, got {horizon}")));
    }
    let checkpoints = [0.25 * horizon, 0.5 * horizon, 0.75 * horizon, horizon];
    let record: Vec<f64> = checkpoints.iter().flat_map(|&t| [t - 1.0, t]).collect();
    let params = scheme.params(h, u0)?.with_record_times(record);
    let slab = evolve_recording(h, u0, &params)?;
    // slab holds t = 0 followed by the (T_k - 1, T_k) pairs
    let frames = slab.values();
    let history: Vec<(f64, f64)> = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let before = &frames[1 + 2 * k];
            let after = &frames[2 + 2 * k];
            (t, before.mean() - after.mean())
        })
        .collect();
    let c = history[3].1;
    let before = &frames[7];
    let after = &frames[8];
    let residual = after
        .values()
        .iter()
        .zip(before.values())
        .fold(0.0f64, |m, (a, b)| m.max((a + c * horizon - b - c * (horizon - 1.0)).abs()));
    Ok(WeakKamReport {
        c_estimate: c,
        converged: (history[2].1 - history[3].1).abs() < SLOPE_TOLERANCE,
        history,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// `max_j (u_{j+1} - 2 u_j + u_{j-1}) / dx^2`
    pub semiconcavity_c: f64,
    /// `min_j (u_{j+1} - 2 u_j + u_{j-1}) / dx^2`
    pub semiconvexity_c: f64,
    /// Both constants stay within `budget` on this grid and on the grid of
    /// half the resolution.
    pub c11: bool,
    pub lip: f64,
    pub budget: f64,
}

/// Periodic second differences `(u_{j+1} - 2u_j + u_{j-1}) / dx^2`.
pub fn second_differences(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let inv_dx2 = (n * n) as f64;
    (0..n).map(|j| (values[(j + 1) % n] - 2.0 * values[j] + values[(j + n - 1) % n]) * inv_dx2).collect()
}

fn extrema(values: &[f64]) -> (f64, f64) {
    let d2 = second_differences(values);
    let hi = d2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = d2.iter().copied().fold(f64::INFINITY, f64::min);
    (hi, lo)
}

pub fn regularity(u: &GridFunction) -> RegularityReport {
    regularity_with_budget(u, DEFAULT_C11_BUDGET)
}

pub fn regularity_with_budget(u: &GridFunction, budget: f64) -> RegularityReport {
    let (hi, lo) = extrema(u.values());
    let coarse: Vec<f64> = u.values().iter().step_by(2).copied().collect();
    let (chi, clo) = extrema(&coarse);
    let within = |a: f64, b: f64| a.abs() <= budget && b.abs() <= budget;
    RegularityReport {
        semiconcavity_c: hi,
        semiconvexity_c: lo,
        c11: within(hi, lo) && within(chi, clo),
        lip: u.lipschitz(),
        budget,
    }
}

/// Discrete derivative: centered differences, except at nodes whose second
/// difference exceeds `kink_threshold` in magnitude, where a one-sided
/// difference from the side without a kink is used.
pub fn discrete_derivative(v: &GridFunction, kink_threshold: f64) -> Vec<f64> {
    let n = v.n();
    let inv_dx = n as f64;
    let d2 = second_differences(v.values());
    let kink = |j: usize| d2[j].abs() > kink_threshold;
    (0..n)
        .map(|j| {
            let left = v.values()[(j + n - 1) % n];
            let right = v.values()[(j + 1) % n];
            let here = v.values()[j];
            if !kink(j) {
                0.5 * (right - left) * inv_dx
            } else if !kink((j + n - 1) % n) {
                (here - left) * inv_dx
            } else {
                (right - here) * inv_dx
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseOptions {
    /// Flow integration step.
    pub dt: f64,
    /// Hausdorff tolerance; defaults to twice the largest gap between
    /// consecutive points of the initial graph.
    pub hausdorff_tol: Option<f64>,
    pub kink_threshold: f64,
}

impl Default for TransverseOptions {
    fn default() -> Self {
        TransverseOptions { dt: 1e-3, hausdorff_tol: None, kink_threshold: DEFAULT_C11_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushRecord {
    pub t: f64,
    pub is_graph: bool,
    pub graph_distortion: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseReport {
    pub invariant: bool,
    /// Mean energy of the initial graph.
    pub alpha: f64,
    /// Largest deviation of the initial graph's energy from `alpha`.
    pub residual: f64,
    pub tolerance: f64,
    pub pushes: Vec<PushRecord>,
}

pub fn transverse_check(h: &Hamiltonian1D, v: &GridFunction, times: &[f64]) -> Result<TransverseReport> {
    transverse_check_with(h, v, times, &TransverseOptions::default())
}

pub fn transverse_check_with(
    h: &Hamiltonian1D,
    v: &GridFunction,
    times: &[f64],
    opts: &TransverseOptions,
) -> Result<TransverseReport> {
    let cloud = GraphCloud::from_slopes(&discrete_derivative(v, opts.kink_threshold))?;
    transverse_check_graph(h, &cloud, times, opts)
}

/// Pushes a derivative graph by the flow at each time and reports whether
/// every push is still a graph lying within the tolerance of the original.
pub fn transverse_check_graph(
    h: &Hamiltonian1D,
    cloud: &GraphCloud,
    times: &[f64],
    opts: &TransverseOptions,
) -> Result<TransverseReport> {
    let pts = cloud.points();
    let energies: Vec<f64> = pts.iter().map(|s| s.energy(h)).collect();
    let alpha = energies.iter().sum::<f64>() / energies.len() as f64;
    let residual = energies.iter().fold(0.0f64, |m, e| m.max((e - alpha).abs()));
    let tolerance = opts.hausdorff_tol.unwrap_or_else(|| 2.0 * max_gap(pts));

    let mut pushes = Vec::with_capacity(times.len());
    for &t in times {
        let out = push_graph(h, cloud, t, opts.dt)?;
        pushes.push(PushRecord {
            t,
            is_graph: out.is_graph,
            graph_distortion: out.graph_distortion,
            hausdorff: hausdorff(pts, &out.pushed),
        });
    }
    let invariant = pushes.iter().all(|r| r.is_graph && r.hausdorff <= tolerance);
    Ok(TransverseReport { invariant, alpha, residual, tolerance, pushes })
}

fn cylinder_distance(a: &FlowState, b: &FlowState) -> f64 {
    let mut dx = (a.x - b.x).abs();
    if dx > 0.5 {
        dx = 1.0 - dx;
    }
    let dp = a.p - b.p;
    math::sqrt(dx * dx + dp * dp)
}

fn max_gap(pts: &[FlowState]) -> f64 {
    let n = pts.len();
    (0..n).map(|j| cylinder_distance(&pts[j], &pts[(j + 1) % n])).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two point sets on the cylinder.
pub fn hausdorff(a: &[FlowState], b: &[FlowState]) -> f64 {
    let one_way = |from: &[FlowState], to: &[FlowState]| {
        from.iter()
            .map(|p| to.iter().map(|q| cylinder_distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub matched: bool,
    pub c_h: f64,
    pub c_g: f64,
    pub sup_error: f64,
    pub tolerance: f64,
    /// Critical value of `H`.
    pub alpha_h: f64,
    /// Critical value of `-G`, computed on `-G(x, -p)`.
    pub alpha_minus_g: f64,
    /// `c_H = alpha_H` and `c_G = -alpha_{-G}` within the critical-value tolerance.
    pub remark_holds: bool,
}

/// Tolerance on critical-value agreement.
pub const CRITICAL_TOLERANCE: f64 = 0.05;

/// Fits the composed surfaces to `u0 - t c_H - s c_G` and cross-checks the
/// constants against critical values. Requires existence evidence.
pub fn theorem_main_surface(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    datum: &InitialDatum,
    cfg: &VerdictConfig,
) -> Result<SurfaceReport> {
    let verdict = multitime_verdict(h, g, datum, cfg)?;
    let (c_h, c_g) = match (verdict.verdict, verdict.constants) {
        (Verdict::ExistsEvidence, Some(c)) => c,
        _ => {
            return Err(HjError::Precondition(format!(
                "multi-time verdict is {}, not exists_evidence",
                verdict.verdict
            )))
        }
    };
    let u0 = datum.sample(cfg.n)?;
    let alpha_h = critical_value(h, &u0, 10.0, cfg.scheme)?.c_estimate;
    let alpha_minus_g = critical_value(&g.flipped(), &u0.negated(), 10.0, cfg.scheme)?.c_estimate;
    let remark_holds = (c_h - alpha_h).abs() <= CRITICAL_TOLERANCE && (c_g + alpha_minus_g).abs() <= CRITICAL_TOLERANCE;
    Ok(SurfaceReport {
        matched: verdict.surface_error <= verdict.surface_tolerance,
        c_h,
        c_g,
        sup_error: verdict.surface_error,
        tolerance: verdict.surface_tolerance,
        alpha_h,
        alpha_minus_g,
        remark_holds,
    })
}
