//! Monotone finite-difference solver for `u_t + H(x, u_x) = 0` on the circle.
//!
//! One step of the local Lax-Friedrichs scheme reads
//!
//! ```text
//! u_j' = u_j - dt * [ H(x_j, (D- u + D+ u) / 2) - theta / 2 * (D+ u - D- u) ]
//! ```
//!
//! with periodic one-sided differences `D-`, `D+`. The scheme is monotone as
//! long as `theta >= sup |H_p|` over the momenta it sees and
//! `dt * theta / dx <= 1`; the solver enforces the stricter `<= 0.5`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{HjError, Result};
use crate::grid::GridFunction;
use crate::hamiltonians::{Coercivity, Hamiltonian1D};
use crate::math;

pub const CFL_DEFAULT: f64 = 0.4;
pub const CFL_MAX: f64 = 0.5;

/// Gradient scan step and cap.
const SCAN_STEP: f64 = 0.05;
const SCAN_CAP: f64 = 50.0;

/// Smallest momentum radius used for the dissipation coefficient.
const MIN_RADIUS: f64 = 1e-8;

/// Scheme-wide settings that do not depend on the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { cfl: CFL_DEFAULT }
    }
}

impl SchemeConfig {
    pub fn new(cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= CFL_MAX) {
            return Err(HjError::InvalidArgument(format!("cfl must lie in (0, {CFL_MAX}], got {cfl}")));
        }
        Ok(SchemeConfig { cfl })
    }

    /// Parameters for evolving `u0` under `h`.
    pub fn params(&self, h: &Hamiltonian1D, u0: &GridFunction) -> Result<SolveParams> {
        SolveParams::for_problem(h, u0, self.cfl)
    }
}

/// Controls of a single run of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub cfl: f64,
    /// A-priori momentum radius `P`.
    pub grad_bound: f64,
    /// Dissipation coefficient, at least `speed_bound(H, P)`.
    pub theta: f64,
    /// Output times for [`evolve_recording`].
    pub record_times: Vec<f64>,
}

impl SolveParams {
    pub fn for_problem(h: &Hamiltonian1D, u0: &GridFunction, cfl: f64) -> Result<Self> {
        SchemeConfig::new(cfl)?;
        let grad_bound = grad_bound(h, u0)?;
        let theta = h.speed_bound(grad_bound.max(MIN_RADIUS))?;
        Ok(SolveParams { cfl, grad_bound, theta, record_times: Vec::new() })
    }

    pub fn with_record_times(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    /// Full time step on a grid of spacing `dx`.
    pub fn dt(&self, dx: f64) -> f64 {
        self.cfl * dx / self.theta.max(1.0)
    }

    fn validate(&self, u0: &GridFunction) -> Result<()> {
        SchemeConfig::new(self.cfl)?;
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(HjError::InvalidArgument(format!("theta must be positive, got {}", self.theta)));
        }
        let lip = u0.lipschitz();
        if self.grad_bound.is_nan() || self.grad_bound < lip * (1.0 - 1e-12) {
            return Err(HjError::Precondition(format!(
                "gradient bound {} is below the Lipschitz constant {lip} of the datum",
                self.grad_bound
            )));
        }
        if !self.record_times.windows(2).all(|w| w[0] < w[1])
            || self.record_times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(HjError::InvalidArgument("record times must be increasing and >= 0".into()));
        }
        Ok(())
    }
}

/// A-priori bound on `|u_x|` for the solution issued from `u0`.
///
/// For an anti-coercive `h` the bound is computed on `-h(x, -p)`, which is
/// coercive and whose semigroup is conjugate to the one of `h`.
pub fn grad_bound(h: &Hamiltonian1D, u0: &GridFunction) -> Result<f64> {
    grad_bound_from_lipschitz(h, u0.lipschitz())
}

/// [`grad_bound`] for a datum with Lipschitz constant `lip`.
///
/// With `M = sup { |H(x, p)| : |p| <= lip }`, returns the smallest sampled
/// `R` (step 0.05, cap 50) such that `inf_x H(x, p) > M` for all sampled
/// `|p| > R`, and at least `lip`.
pub fn grad_bound_from_lipschitz(h: &Hamiltonian1D, lip: f64) -> Result<f64> {
    if !(lip.is_finite() && lip >= 0.0) {
        return Err(HjError::InvalidArgument(format!("bad Lipschitz constant {lip}")));
    }
    let coercive;
    let h = match h.coercivity() {
        Coercivity::Coercive => h,
        Coercivity::AntiCoercive => {
            coercive = h.flipped();
            &coercive
        }
        Coercivity::Neither => {
            return Err(HjError::Coercivity("neither H nor -H is coercive; no gradient bound exists".into()))
        }
    };
    let m = h.sup_abs(lip);
    const XS: usize = 256;
    let inf_at = |p: f64| {
        (0..XS)
            .map(|i| {
                let x = i as f64 / XS as f64;
                h.value(x, p).min(h.value(x, -p))
            })
            .fold(f64::INFINITY, f64::min)
    };
    let steps = math::floor(SCAN_CAP / SCAN_STEP + 0.5) as usize;
    let mut last_failure = None;
    for k in 0..=steps {
        let p = k as f64 * SCAN_STEP;
        let inf = inf_at(p);
        if inf.is_nan() || inf <= m {
            last_failure = Some(k);
        }
    }
    match last_failure {
        Some(k) if k == steps => Err(HjError::Coercivity(format!("inf_x H(x, p) <= {m} still at |p| = {SCAN_CAP}"))),
        Some(k) => Ok((k as f64 * SCAN_STEP).max(lip)),
        None => Ok(lip),
    }
}

/// One local Lax-Friedrichs step.
pub fn lf_step(h: &Hamiltonian1D, u: &GridFunction, theta: f64, dt: f64) -> Result<GridFunction> {
    check_step(theta, dt, u.dx())?;
    let mut out = Vec::with_capacity(u.n());
    lf_apply(h, u.values(), &mut out, theta, dt);
    Ok(GridFunction::from_raw(out))
}

fn check_step(theta: f64, dt: f64, dx: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(HjError::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(HjError::InvalidArgument(format!("time step must be >= 0, got {dt}")));
    }
    let courant = dt * theta / dx;
    if courant > CFL_MAX * (1.0 + 1e-12) {
        return Err(HjError::Cfl { courant, limit: CFL_MAX });
    }
    Ok(())
}

fn lf_apply(h: &Hamiltonian1D, u: &[f64], out: &mut Vec<f64>, theta: f64, dt: f64) {
    let n = u.len();
    let inv_dx = n as f64;
    let dx = 1.0 / inv_dx;
    out.clear();
    for j in 0..n {
        let left = u[(j + n - 1) % n];
        let right = u[(j + 1) % n];
        let d_minus = (u[j] - left) * inv_dx;
        let d_plus = (right - u[j]) * inv_dx;
        let p = 0.5 * (d_minus + d_plus);
        let flux = h.value(j as f64 * dx, p) - 0.5 * theta * (d_plus - d_minus);
        out.push(u[j] - dt * flux);
    }
}

/// Marches `u` forward by `span` in place, using full steps `dt` and one
/// final fractional step.
fn march(h: &Hamiltonian1D, u: &mut Vec<f64>, scratch: &mut Vec<f64>, span: f64, theta: f64, dt: f64) -> Result<()> {
    if span <= 0.0 {
        return Ok(());
    }
    let full = math::floor(span / dt) as usize;
    let rest = span - full as f64 * dt;
    for _ in 0..full {
        lf_apply(h, u, scratch, theta, dt);
        core::mem::swap(u, scratch);
    }
    if rest > 0.0 {
        lf_apply(h, u, scratch, theta, rest.min(dt));
        core::mem::swap(u, scratch);
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(HjError::Domain("scheme produced non-finite values".into()));
    }
    Ok(())
}

/// The discrete semigroup `S^t_H u0`.
pub fn evolve(h: &Hamiltonian1D, u0: &GridFunction, t: f64, params: &SolveParams) -> Result<GridFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(HjError::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    params.validate(u0)?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let dt = params.dt(u0.dx());
    check_step(params.theta, dt, u0.dx())?;
    let mut u = u0.values().to_vec();
    let mut scratch = Vec::with_capacity(u.len());
    march(h, &mut u, &mut scratch, t, params.theta, dt)?;
    Ok(GridFunction::from_raw(u))
}

/// [`evolve`] with parameters derived from `u0` by `scheme`.
pub fn evolve_auto(h: &Hamiltonian1D, u0: &GridFunction, t: f64, scheme: SchemeConfig) -> Result<GridFunction> {
    if t == 0.0 {
        return Ok(u0.clone());
    }
    evolve(h, u0, t, &scheme.params(h, u0)?)
}

/// Runs the scheme once and keeps the solution at `0` and at every record time.
pub fn evolve_recording(h: &Hamiltonian1D, u0: &GridFunction, params: &SolveParams) -> Result<TimeSlab> {
    params.validate(u0)?;
    let dt = params.dt(u0.dx());
    check_step(params.theta, dt, u0.dx())?;
    let mut times = alloc::vec![0.0];
    let mut values = alloc::vec![u0.clone()];
    let mut u = u0.values().to_vec();
    let mut scratch = Vec::with_capacity(u.len());
    let mut now = 0.0;
    for &t in params.record_times.iter().filter(|&&t| t > 0.0) {
        march(h, &mut u, &mut scratch, t - now, params.theta, dt)?;
        now = t;
        times.push(t);
        values.push(GridFunction::from_raw(u.clone()));
    }
    TimeSlab::new(times, values)
}

/// Solutions at an increasing list of times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlab {
    times: Vec<f64>,
    values: Vec<GridFunction>,
}

impl TimeSlab {
    pub fn new(times: Vec<f64>, values: Vec<GridFunction>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(HjError::InvalidArgument("slab needs one grid function per time".into()));
        }
        if times[0] != 0.0 || !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(HjError::InvalidArgument("slab times must start at 0 and increase strictly".into()));
        }
        let n = values[0].n();
        if values.iter().any(|v| v.n() != n) {
            return Err(HjError::InvalidArgument("slab grid sizes differ".into()));
        }
        Ok(TimeSlab { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[GridFunction] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.values[0].n()
    }
}

/// Sup-convolution in time, `v^d(t_i, x) = max_k v(s_k, x) - |t_i - s_k| / d`,
/// over the slab's own times.
pub fn sup_convolution_time(slab: &TimeSlab, delta: f64) -> Result<TimeSlab> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(HjError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if slab.is_empty() {
        return Err(HjError::InvalidArgument("empty slab".into()));
    }
    let n = slab.n();
    let inv = 1.0 / delta;
    let values = slab
        .times
        .iter()
        .map(|&t| {
            let mut out = alloc::vec![f64::NEG_INFINITY; n];
            for (s, v) in slab.times.iter().zip(&slab.values) {
                let penalty = (t - s).abs() * inv;
                for (o, vj) in out.iter_mut().zip(v.values()) {
                    *o = o.max(vj - penalty);
                }
            }
            GridFunction::from_raw(out)
        })
        .collect();
    TimeSlab::new(slab.times.clone(), values)
}

/// Brute-force Hopf-Lax formula for `H = p^2 / 2`:
/// `min_y u0(y) + |x - y|^2 / (2t)` over grid nodes `y` and their periodic
/// translates.
pub fn hopf_lax(u0: &GridFunction, t: f64) -> Result<GridFunction> {
    if !(t.is_finite() && t > 0.0) {
        return Err(HjError::InvalidArgument(format!("Hopf-Lax needs t > 0, got {t}")));
    }
    let n = u0.n();
    let dx = u0.dx();
    // minimizers lie within t * Lip(u0) of x
    let shifts = (math::ceil(t * u0.lipschitz()) as i64).max(1);
    let inv_2t = 0.5 / t;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = i as f64 * dx;
        let mut best = f64::INFINITY;
        for k in -shifts..=shifts {
            for (j, &uj) in u0.values().iter().enumerate() {
                let d = x - (j as f64 * dx + k as f64);
                best = best.min(uj + d * d * inv_2t);
            }
        }
        out.push(best);
    }
    GridFunction::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialDatum;
    use crate::hamiltonians::Potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pend() -> Hamiltonian1D {
        Hamiltonian1D::pendulum()
    }

    #[test]
    fn grad_bound_examples() {
        let zero = GridFunction::constant(256, 0.0).unwrap();
        let p = grad_bound(&pend(), &zero).unwrap();
        assert!((2.0..=2.1).contains(&p), "{p}");

        // oracle: dense scan of the closed form 1/2 p^2 - 1 > M
        let wk = InitialDatum::PendulumWeakKam.sample(1024).unwrap();
        let l0 = wk.lipschitz();
        let p = grad_bound(&pend(), &wk).unwrap();
        let m = 0.5 * l0 * l0 + 1.0;
        let threshold = libm::sqrt(2.0 * (m + 1.0));
        assert!(p >= l0 && p <= 3.2, "{p}");
        assert!((p - threshold).abs() <= 0.05 + 1e-12, "{p} vs {threshold}");

        let c = GridFunction::constant(128, 0.7).unwrap();
        assert_eq!(grad_bound(&Hamiltonian1D::kinetic(), &c).unwrap(), 0.0);
    }

    #[test]
    fn grad_bound_uses_flip_for_anticoercive() {
        let u = InitialDatum::Sawtooth.sample(256).unwrap();
        let g = Hamiltonian1D::negate(pend());
        assert_eq!(grad_bound(&g, &u).unwrap(), grad_bound(&g.flipped(), &u).unwrap());
        let bare = Hamiltonian1D::tabulated(alloc::vec![0.0, 1.0, 0.0, -1.0], false).unwrap();
        assert!(matches!(grad_bound(&bare, &u), Err(HjError::Coercivity(_))));
    }

    #[test]
    fn grad_bound_cap_signals_weak_coercivity() {
        // p^2 / 2 with a potential of amplitude 2000 needs |p| > 50 to dominate
        let h =
            Hamiltonian1D::mechanical(Potential { offset: 0.0, cos: alloc::vec![2000.0], sin: alloc::vec![] }).unwrap();
        let u = GridFunction::constant(64, 0.0).unwrap();
        assert!(matches!(grad_bound(&h, &u), Err(HjError::Coercivity(_))));
    }

    #[test]
    fn lf_step_examples() {
        let u = GridFunction::constant(128, 5.0).unwrap();
        let out = lf_step(&Hamiltonian1D::kinetic(), &u, 1.0, 1e-3).unwrap();
        assert_eq!(out, u);

        let zero = GridFunction::constant(128, 0.0).unwrap();
        let dt = 1e-3;
        let out = lf_step(&pend(), &zero, 2.2, dt).unwrap();
        for j in 0..128 {
            let expected = -dt * libm::cos(math::TAU * zero.x(j));
            assert!((out.values()[j] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn lf_step_rejects_cfl_violation() {
        let u = GridFunction::constant(128, 0.0).unwrap();
        let err = lf_step(&pend(), &u, 2.0, 0.01).unwrap_err();
        assert!(matches!(err, HjError::Cfl { .. }));
        assert!(lf_step(&pend(), &u, 2.0, 0.5 / 128.0 / 2.0).is_ok());
    }

    #[test]
    fn lf_step_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 128;
        let theta = pend().speed_bound(3.0).unwrap();
        let dt = CFL_DEFAULT / n as f64 / theta;
        for _ in 0..100 {
            // Lipschitz data so every difference stays inside |p| <= 3
            let mut a = alloc::vec![0.0; n];
            for j in 1..n {
                a[j] = a[j - 1] + rng.gen_range(-1.0..1.0) / n as f64;
            }
            let drift = a[n - 1] / n as f64;
            for (j, v) in a.iter_mut().enumerate() {
                *v -= drift * j as f64;
            }
            let b: Vec<f64> = a.iter().map(|v| v + rng.gen_range(0.0..0.5) / n as f64).collect();
            let u = GridFunction::new(a).unwrap();
            let v = GridFunction::new(b).unwrap();
            assert!(u.lipschitz() <= 3.0 && v.lipschitz() <= 3.0);
            let su = lf_step(&pend(), &u, theta, dt).unwrap();
            let sv = lf_step(&pend(), &v, theta, dt).unwrap();
            for (x, y) in su.values().iter().zip(sv.values()) {
                assert!(x <= y);
            }
        }
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let u = InitialDatum::Cosine.sample(64).unwrap();
        let p = SolveParams::for_problem(&pend(), &u, CFL_DEFAULT).unwrap();
        assert_eq!(evolve(&pend(), &u, 0.0, &p).unwrap(), u);
        assert!(evolve(&pend(), &u, -1.0, &p).is_err());
    }

    #[test]
    fn evolve_kinetic_keeps_constants() {
        let u = GridFunction::constant(256, 0.3).unwrap();
        let out = evolve_auto(&Hamiltonian1D::kinetic(), &u, 1.7, SchemeConfig::default()).unwrap();
        assert_eq!(out, u);
    }

    #[test]
    fn evolve_rejects_underestimated_gradient_bound() {
        let u = InitialDatum::Cosine.sample(64).unwrap();
        let mut p = SolveParams::for_problem(&pend(), &u, CFL_DEFAULT).unwrap();
        p.grad_bound = 1.0;
        assert!(matches!(evolve(&pend(), &u, 0.1, &p), Err(HjError::Precondition(_))));
    }

    #[test]
    fn evolve_sawtooth_midpoint() {
        let n = 1024;
        let u = InitialDatum::Sawtooth.sample(n).unwrap();
        let out = evolve_auto(&Hamiltonian1D::kinetic(), &u, 0.25, SchemeConfig::default()).unwrap();
        let dx = 1.0 / n as f64;
        assert!((out.values()[n / 2] - 0.375).abs() <= 3.0 * libm::sqrt(dx));
    }

    #[test]
    fn evolve_weak_kam_drifts_by_critical_value() {
        let u = InitialDatum::PendulumWeakKam.sample(1024).unwrap();
        let out = evolve_auto(&pend(), &u, 1.0, SchemeConfig::default()).unwrap();
        assert!(out.sup_distance(&u.shifted(-1.0)) <= 0.05);
    }

    #[test]
    fn recording_matches_final_time() {
        let u = InitialDatum::Sawtooth.sample(128).unwrap();
        let params =
            SolveParams::for_problem(&pend(), &u, CFL_DEFAULT).unwrap().with_record_times(alloc::vec![0.1, 0.2, 0.3]);
        let slab = evolve_recording(&pend(), &u, &params).unwrap();
        assert_eq!(slab.times(), &[0.0, 0.1, 0.2, 0.3]);
        let direct = evolve(&pend(), &u, 0.3, &params).unwrap();
        // only the partition of [0, 0.3] into steps differs
        assert!(slab.values()[3].sup_distance(&direct) < 1e-3);
    }

    #[test]
    fn hopf_lax_examples() {
        let c = GridFunction::constant(128, 0.4).unwrap();
        let out = hopf_lax(&c, 0.3).unwrap();
        assert!(out.sup_distance(&c) < 1e-15);

        let n = 256;
        let u = InitialDatum::Sawtooth.sample(n).unwrap();
        let out = hopf_lax(&u, 0.25).unwrap();
        assert!((out.values()[n / 2] - 0.375).abs() <= 1.0 / n as f64);
        assert_eq!(out.values()[0], 0.0);
        assert!(hopf_lax(&u, 0.0).is_err());
    }

    #[test]
    fn hopf_lax_closed_form_sawtooth() {
        // minimizing |y| + (x - y)^2 / 2t near 0 and 1/2 - t near 1/2
        let n = 512;
        let t = 0.25;
        let u = InitialDatum::Sawtooth.sample(n).unwrap();
        let out = hopf_lax(&u, t).unwrap();
        for j in 0..n {
            let x = j as f64 / n as f64;
            let d = x.min(1.0 - x);
            let exact = if d <= t { d * d / (2.0 * t) } else { d - t / 2.0 };
            assert!((out.values()[j] - exact).abs() <= 1.0 / n as f64, "x = {x}");
        }
    }

    #[test]
    fn sup_convolution_examples() {
        let n = 64;
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let u0 = InitialDatum::Cosine.sample(n).unwrap();
        let flat = TimeSlab::new(times.clone(), alloc::vec![u0.clone(); times.len()]).unwrap();
        let out = sup_convolution_time(&flat, 0.3).unwrap();
        assert_eq!(out, flat);

        let descending =
            TimeSlab::new(times.clone(), times.iter().map(|t| GridFunction::constant(n, -t).unwrap()).collect())
                .unwrap();
        let out = sup_convolution_time(&descending, 0.5).unwrap();
        for (k, v) in out.values().iter().enumerate() {
            assert!(v.sup_distance(&descending.values()[k]) < 1e-15);
        }
        assert!(sup_convolution_time(&flat, 0.0).is_err());
    }

    #[test]
    fn slab_invariants() {
        let g = GridFunction::constant(64, 0.0).unwrap();
        assert!(TimeSlab::new(alloc::vec![], alloc::vec![]).is_err());
        assert!(TimeSlab::new(alloc::vec![0.1], alloc::vec![g.clone()]).is_err());
        assert!(TimeSlab::new(alloc::vec![0.0, 0.0], alloc::vec![g.clone(), g]).is_err());
    }
}
