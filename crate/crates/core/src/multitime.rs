//! Composition of two semigroups and the multi-time existence test.
//!
//! The system `u_t + H(x, u_x) = 0`, `u_s + G(x, u_x) = 0`, `u(0, 0) = u0`
//! has a viscosity solution exactly when `S^t_H S^s_G u0 = S^s_G S^t_H u0`
//! for all `t, s`. This module measures how far the two orders are apart on
//! the grid and whether the gap survives refinement.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{HjError, Result};
use crate::grid::{GridFunction, InitialDatum};
use crate::hamiltonians::{poisson_bracket_sup, Convexity, Hamiltonian1D};
use crate::solver::{evolve_auto, grad_bound, SchemeConfig};

/// Bracket threshold below which two Hamiltonians are treated as commuting.
pub const BRACKET_TOLERANCE: f64 = 1e-8;

/// `S^t_H S^s_G u0`: evolve under `g` for `s`, then under `h` for `t`.
pub fn compose(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    t: f64,
    s: f64,
    u0: &GridFunction,
    scheme: SchemeConfig,
) -> Result<GridFunction> {
    check_time(t)?;
    check_time(s)?;
    let inner = evolve_auto(g, u0, s, scheme)?;
    evolve_auto(h, &inner, t, scheme)
}

/// `-S^s_{Gbar}(-u0)` with `Gbar(x, p) = -G(x, -p)`; equals `S^s_G u0`.
pub fn flip_solve(g: &Hamiltonian1D, u0: &GridFunction, s: f64, scheme: SchemeConfig) -> Result<GridFunction> {
    check_time(s)?;
    if s == 0.0 {
        return Ok(u0.clone());
    }
    let gbar = g.flipped();
    Ok(evolve_auto(&gbar, &u0.negated(), s, scheme)?.negated())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(HjError::InvalidArgument(format!("times must be >= 0, got {t}")))
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if !grid.contains(&0.0) {
        return Err(HjError::Precondition(format!("{name} grid must contain 0")));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(HjError::InvalidArgument(format!("{name} grid must be increasing and >= 0")));
    }
    Ok(())
}

/// Commutation defect of two semigroups over a `(t, s)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTimeReport {
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// `defect[i][k] = || S^{t_i}_H S^{s_k}_G u0 - S^{s_k}_G S^{t_i}_H u0 ||_inf`
    pub defect: Vec<Vec<f64>>,
    /// Same differences in the discrete L1 norm; diagnostic only.
    pub defect_l1: Vec<Vec<f64>>,
    pub max_defect: f64,
    pub argmax: (f64, f64),
    pub refinement_history: Vec<(usize, f64)>,
}

/// Both composition orders for every grid cell, `[i][k] = (H after G, G after H)`.
type Surfaces = Vec<Vec<(GridFunction, GridFunction)>>;

fn surfaces(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    u0: &GridFunction,
    t_grid: &[f64],
    s_grid: &[f64],
    scheme: SchemeConfig,
) -> Result<Surfaces> {
    let after_g = s_grid.iter().map(|&s| evolve_auto(g, u0, s, scheme)).collect::<Result<Vec<_>>>()?;
    let after_h = t_grid.iter().map(|&t| evolve_auto(h, u0, t, scheme)).collect::<Result<Vec<_>>>()?;
    t_grid
        .iter()
        .zip(&after_h)
        .map(|(&t, uh)| {
            s_grid
                .iter()
                .zip(&after_g)
                .map(|(&s, ug)| Ok((evolve_auto(h, ug, t, scheme)?, evolve_auto(g, uh, s, scheme)?)))
                .collect()
        })
        .collect()
}

fn report_from(n: usize, t_grid: &[f64], s_grid: &[f64], cells: &Surfaces) -> MultiTimeReport {
    let mut max_defect = 0.0;
    let mut argmax = (0.0, 0.0);
    let mut defect = Vec::with_capacity(t_grid.len());
    let mut defect_l1 = Vec::with_capacity(t_grid.len());
    for (i, row) in cells.iter().enumerate() {
        let mut d_row = Vec::with_capacity(row.len());
        let mut l_row = Vec::with_capacity(row.len());
        for (k, (a, b)) in row.iter().enumerate() {
            let d = a.sup_distance(b);
            if d > max_defect {
                max_defect = d;
                argmax = (t_grid[i], s_grid[k]);
            }
            d_row.push(d);
            l_row.push(a.l1_distance(b));
        }
        defect.push(d_row);
        defect_l1.push(l_row);
    }
    MultiTimeReport {
        n,
        t_grid: t_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        defect,
        defect_l1,
        max_defect,
        argmax,
        refinement_history: alloc::vec![(n, max_defect)],
    }
}

/// Fills the defect matrix on the grid of `u0`.
pub fn commutation_defect(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    u0: &GridFunction,
    t_grid: &[f64],
    s_grid: &[f64],
    scheme: SchemeConfig,
) -> Result<MultiTimeReport> {
    check_grid("t", t_grid)?;
    check_grid("s", s_grid)?;
    let cells = surfaces(h, g, u0, t_grid, s_grid, scheme)?;
    Ok(report_from(u0.n(), t_grid, s_grid, &cells))
}

/// Runs [`commutation_defect`] at every resolution in `levels` (increasing)
/// and returns the finest report with the full refinement history.
pub fn commutation_defect_refined(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    datum: &InitialDatum,
    levels: &[usize],
    t_grid: &[f64],
    s_grid: &[f64],
    scheme: SchemeConfig,
) -> Result<MultiTimeReport> {
    if levels.is_empty() || !levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(HjError::InvalidArgument("refinement levels must be increasing".into()));
    }
    let mut history = Vec::with_capacity(levels.len());
    let mut last = None;
    for &n in levels {
        let report = commutation_defect(h, g, &datum.sample(n)?, t_grid, s_grid, scheme)?;
        history.push((n, report.max_defect));
        last = Some(report);
    }
    let mut report = last.expect("levels is non-empty");
    report.refinement_history = history;
    Ok(report)
}

/// `max_t || S^t_n u0 - R S^t_ref u0 ||_inf`, the sup distance between the
/// `n`-node run and a `reference`-node run restricted to the coarse nodes.
pub fn self_convergence_error(
    h: &Hamiltonian1D,
    datum: &InitialDatum,
    n: usize,
    reference: usize,
    times: &[f64],
    scheme: SchemeConfig,
) -> Result<f64> {
    if reference <= n || !reference.is_multiple_of(n) {
        return Err(HjError::InvalidArgument(format!("reference grid {reference} must refine {n}")));
    }
    let coarse = datum.sample(n)?;
    let fine = datum.sample(reference)?;
    let mut err = 0.0f64;
    for &t in times {
        let a = evolve_auto(h, &coarse, t, scheme)?;
        let b = evolve_auto(h, &fine, t, scheme)?.restrict(reference / n)?;
        err = err.max(a.sup_distance(&b));
    }
    Ok(err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExistsEvidence,
    NonexistenceEvidence,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExistsEvidence => "exists_evidence",
            Verdict::NonexistenceEvidence => "nonexistence_evidence",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resolution and time grids for [`multitime_verdict`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictConfig {
    /// Coarse resolution; the verdict also runs at `2n`.
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub scheme: SchemeConfig,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        VerdictConfig {
            n: 256,
            t_grid: alloc::vec![0.0, 0.25, 0.5, 1.0],
            s_grid: alloc::vec![0.0, 0.25, 0.5, 1.0],
            scheme: SchemeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub verdict: Verdict,
    /// Defect at `2n` with history at `n` and `2n`.
    pub report: MultiTimeReport,
    /// Self-commutation defect of `H` at `2n` on the same grids.
    pub baseline: f64,
    pub bracket_sup: f64,
    /// `(c_H, c_G)` when the verdict is [`Verdict::ExistsEvidence`].
    pub constants: Option<(f64, f64)>,
    /// Sup distance of both composed surfaces to `u0 - t c_H - s c_G` at `2n`.
    pub surface_error: f64,
    pub surface_tolerance: f64,
}

/// Checks that `(h, g)` satisfies the hypotheses of the existence theorem:
/// `h` and `-g` Tonelli, vanishing bracket. Returns the sampled bracket sup.
pub fn check_pair(h: &Hamiltonian1D, g: &Hamiltonian1D, u0: &GridFunction) -> Result<f64> {
    if h.convexity() != Convexity::TonelliConvex {
        return Err(HjError::Precondition("H must be Tonelli".into()));
    }
    if g.convexity() != Convexity::TonelliConcave {
        return Err(HjError::Precondition("-G must be Tonelli".into()));
    }
    let radius = grad_bound(h, u0)?.max(grad_bound(g, u0)?);
    let bracket = poisson_bracket_sup(h, g, radius, 256, 256)?;
    if bracket > BRACKET_TOLERANCE {
        return Err(HjError::Precondition(format!(
            "H and G do not commute: sup |{{H, G}}| = {bracket} at |p| <= {radius}"
        )));
    }
    Ok(bracket)
}

/// Least-squares `(c_H, c_G)` from `S^t_H v - v ~ -t c_H` and
/// `S^s_G w - w ~ -s c_G`, with `v = S^e_H u0` and `w = S^e_G u0` smoothed over
/// `e = 2 dx`.
pub fn estimate_constants(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    u0: &GridFunction,
    t_grid: &[f64],
    s_grid: &[f64],
    scheme: SchemeConfig,
) -> Result<(f64, f64)> {
    let eps = 2.0 * u0.dx();
    let slope = |ham: &Hamiltonian1D, grid: &[f64]| -> Result<f64> {
        let v = evolve_auto(ham, u0, eps, scheme)?;
        let (mut num, mut den) = (0.0, 0.0);
        for &t in grid.iter().filter(|&&t| t > 0.0) {
            let moved = evolve_auto(ham, &v, t, scheme)?;
            let mean_change = moved.mean() - v.mean();
            num += t * mean_change;
            den += t * t;
        }
        // `0 - num` rather than `-num` so flat data reports +0
        Ok(if den > 0.0 { (0.0 - num) / den } else { 0.0 })
    };
    Ok((slope(h, t_grid)?, slope(g, s_grid)?))
}

fn surface_error(u0: &GridFunction, cells: &Surfaces, t_grid: &[f64], s_grid: &[f64], c: (f64, f64)) -> f64 {
    let mut err = 0.0f64;
    for (i, row) in cells.iter().enumerate() {
        for (k, (a, b)) in row.iter().enumerate() {
            let shift = -t_grid[i] * c.0 - s_grid[k] * c.1;
            for j in 0..u0.n() {
                let target = u0.values()[j] + shift;
                err = err.max((a.values()[j] - target).abs()).max((b.values()[j] - target).abs());
            }
        }
    }
    err
}

/// Decides whether the grid evidence supports a multi-time solution from `datum`.
///
/// The defect is *persistent* when it does not halve from `n` to `2n` and
/// exceeds ten times the self-commutation defect of `h`. A non-persistent
/// defect counts as existence evidence only if both composed surfaces also
/// match `u0 - t c_H - s c_G` within five times the single-run scheme error.
pub fn multitime_verdict(
    h: &Hamiltonian1D,
    g: &Hamiltonian1D,
    datum: &InitialDatum,
    cfg: &VerdictConfig,
) -> Result<VerdictReport> {
    let coarse = datum.sample(cfg.n)?;
    let fine = datum.sample(2 * cfg.n)?;
    let bracket_sup = check_pair(h, g, &fine)?;
    check_grid("t", &cfg.t_grid)?;
    check_grid("s", &cfg.s_grid)?;

    let d_coarse = commutation_defect(h, g, &coarse, &cfg.t_grid, &cfg.s_grid, cfg.scheme)?.max_defect;
    let cells = surfaces(h, g, &fine, &cfg.t_grid, &cfg.s_grid, cfg.scheme)?;
    let mut report = report_from(fine.n(), &cfg.t_grid, &cfg.s_grid, &cells);
    report.refinement_history = alloc::vec![(cfg.n, d_coarse), (fine.n(), report.max_defect)];
    let baseline = commutation_defect(h, h, &fine, &cfg.t_grid, &cfg.t_grid, cfg.scheme)?.max_defect;

    let d_fine = report.max_defect;
    let persistent = d_fine > 0.5 * d_coarse && d_fine > 10.0 * baseline;

    let constants = estimate_constants(h, g, &fine, &cfg.t_grid, &cfg.s_grid, cfg.scheme)?;
    let surface_error = surface_error(&fine, &cells, &cfg.t_grid, &cfg.s_grid, constants);
    let scheme_error = self_convergence_error(h, datum, cfg.n, 2 * cfg.n, &cfg.t_grid, cfg.scheme)?
        .max(self_convergence_error(g, datum, cfg.n, 2 * cfg.n, &cfg.s_grid, cfg.scheme)?);
    let surface_tolerance = (5.0 * scheme_error).max(1e-10);

    let exists = !persistent && surface_error <= surface_tolerance;
    Ok(VerdictReport {
        verdict: if exists { Verdict::ExistsEvidence } else { Verdict::NonexistenceEvidence },
        report,
        baseline,
        bracket_sup,
        constants: exists.then_some(constants),
        surface_error,
        surface_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::evolve_auto;

    fn kin_pair() -> (Hamiltonian1D, Hamiltonian1D) {
        (Hamiltonian1D::kinetic(), Hamiltonian1D::negate(Hamiltonian1D::kinetic()))
    }

    #[test]
    fn compose_with_zero_t_is_inner_evolution() {
        let h = Hamiltonian1D::pendulum();
        let g = Hamiltonian1D::negate(Hamiltonian1D::pendulum());
        let u = InitialDatum::Sawtooth.sample(128).unwrap();
        let sc = SchemeConfig::default();
        assert_eq!(compose(&h, &g, 0.0, 0.3, &u, sc).unwrap(), evolve_auto(&g, &u, 0.3, sc).unwrap());
        assert!(compose(&h, &g, -0.1, 0.3, &u, sc).is_err());
    }

    #[test]
    fn kinetic_pair_preserves_constants() {
        let (h, g) = kin_pair();
        let u = GridFunction::constant(128, 0.3).unwrap();
        for (t, s) in [(0.2, 0.7), (1.0, 1.0), (0.0, 0.5)] {
            assert_eq!(compose(&h, &g, t, s, &u, SchemeConfig::default()).unwrap(), u);
        }
    }

    #[test]
    fn pendulum_semigroup_property() {
        let h = Hamiltonian1D::pendulum();
        let sc = SchemeConfig::default();
        let n = 256;
        let u = InitialDatum::Sawtooth.sample(n).unwrap();
        let composed = compose(&h, &h, 0.3, 0.2, &u, sc).unwrap();
        let single = evolve_auto(&h, &u, 0.5, sc).unwrap();
        let scheme_error = self_convergence_error(&h, &InitialDatum::Sawtooth, n, 4 * n, &[0.5], sc).unwrap();
        assert!(composed.sup_distance(&single) <= 2.0 * scheme_error);
    }

    #[test]
    fn flip_solve_examples() {
        let sc = SchemeConfig::default();
        let pend = Hamiltonian1D::pendulum();
        let g = Hamiltonian1D::negate(pend.clone());
        let zero = GridFunction::constant(256, 0.0).unwrap();
        let flipped = flip_solve(&g, &zero, 0.4, sc).unwrap();
        let expected = evolve_auto(&pend, &zero, 0.4, sc).unwrap().negated();
        assert_eq!(flipped, expected);

        let n = 512;
        let u = InitialDatum::Sawtooth.sample(n).unwrap();
        let g = Hamiltonian1D::negate(Hamiltonian1D::kinetic());
        let a = flip_solve(&g, &u, 0.25, sc).unwrap();
        let b = evolve_auto(&g, &u, 0.25, sc).unwrap();
        assert!(a.sup_distance(&b) <= 3.0 * libm::sqrt(1.0 / n as f64));
        assert_eq!(flip_solve(&g, &u, 0.0, sc).unwrap(), u);
    }

    #[test]
    fn kinetic_pair_has_no_defect() {
        let (h, g) = kin_pair();
        let grid = [0.0, 0.25, 0.5];
        let u = GridFunction::constant(128, -1.25).unwrap();
        let r = commutation_defect(&h, &g, &u, &grid, &grid, SchemeConfig::default()).unwrap();
        assert!(r.max_defect <= 1e-12);
        assert!(commutation_defect(&h, &g, &u, &[0.25], &grid, SchemeConfig::default()).is_err());
    }

    #[test]
    fn order_zero_rows_vanish() {
        let h = Hamiltonian1D::pendulum();
        let g = Hamiltonian1D::negate(h.clone());
        let grid = [0.0, 0.3, 0.6];
        let u = InitialDatum::Cosine.sample(128).unwrap();
        let r = commutation_defect(&h, &g, &u, &grid, &grid, SchemeConfig::default()).unwrap();
        for k in 0..grid.len() {
            assert!(r.defect[0][k] <= 1e-12 && r.defect[k][0] <= 1e-12);
        }
        assert!(r.defect.iter().flatten().all(|d| *d >= 0.0));
    }

    #[test]
    fn verdict_requires_commuting_tonelli_pair() {
        let h = Hamiltonian1D::pendulum();
        let cfg = VerdictConfig { n: 64, ..VerdictConfig::default() };
        let err = multitime_verdict(&h, &h, &InitialDatum::Zero, &cfg).unwrap_err();
        assert!(matches!(err, HjError::Precondition(_)));
        let bent = Hamiltonian1D::negate(
            Hamiltonian1D::mechanical(crate::hamiltonians::Potential {
                offset: 0.0,
                cos: alloc::vec![0.0],
                sin: alloc::vec![1.0],
            })
            .unwrap(),
        );
        let err = multitime_verdict(&h, &bent, &InitialDatum::Zero, &cfg).unwrap_err();
        assert!(matches!(err, HjError::Precondition(_)));
    }

    #[test]
    fn verdict_kinetic_pair_exists() {
        let (h, g) = kin_pair();
        let cfg = VerdictConfig { n: 64, ..VerdictConfig::default() };
        let v = multitime_verdict(&h, &g, &InitialDatum::Zero, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::ExistsEvidence);
        assert_eq!(v.constants, Some((0.0, 0.0)));
    }
}
