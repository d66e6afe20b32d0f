//! Hamiltonians on `T^1 x R`, their flows and pushed derivative graphs.
//!
//! Every catalog entry carries a convexity and a coercivity tag. Tags are
//! derived from the structure of the entry (negation swaps both, the momentum
//! reflection `p -> -p` keeps both) and are checked against samples when the
//! entry is built.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{HjError, Result};
use crate::math::{self, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convexity {
    /// `C^2`, superlinear and strictly convex in `p`.
    TonelliConvex,
    /// `-H` is Tonelli.
    TonelliConcave,
    General,
}

impl Convexity {
    fn negated(self) -> Self {
        match self {
            Convexity::TonelliConvex => Convexity::TonelliConcave,
            Convexity::TonelliConcave => Convexity::TonelliConvex,
            Convexity::General => Convexity::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coercivity {
    /// `H(x, p) -> +inf` as `|p| -> inf`.
    Coercive,
    /// `-H` is coercive.
    AntiCoercive,
    /// Neither orientation, e.g. a bare potential `H(x, p) = V(x)`.
    Neither,
}

impl Coercivity {
    fn negated(self) -> Self {
        match self {
            Coercivity::Coercive => Coercivity::AntiCoercive,
            Coercivity::AntiCoercive => Coercivity::Coercive,
            Coercivity::Neither => Coercivity::Neither,
        }
    }
}

/// Trigonometric potential `V(x) = c0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub offset: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Potential {
    /// `cos(2 pi x)`, the pendulum potential.
    pub fn pendulum() -> Self {
        Potential { offset: 0.0, cos: alloc::vec![1.0], sin: Vec::new() }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        let mut v = self.offset;
        for (k, a) in self.cos.iter().enumerate() {
            v += a * math::cos(TAU * (k + 1) as f64 * x);
        }
        for (k, b) in self.sin.iter().enumerate() {
            v += b * math::sin(TAU * (k + 1) as f64 * x);
        }
        v
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mut d = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            d -= a * w * math::sin(w * x);
        }
        for (k, b) in self.sin.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            d += b * w * math::cos(w * x);
        }
        d
    }

    fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.cos.iter().all(|a| a.is_finite()) && self.sin.iter().all(|b| b.is_finite())
    }
}

/// Periodic table of potential values at `x_j = j / m`, evaluated off-grid by
/// cubic (Catmull-Rom) interpolation and differentiated by centered
/// differences with step `1 / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTable {
    values: Vec<f64>,
}

impl PeriodicTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(HjError::InvalidArgument(format!(
                "tabulated potential needs at least 4 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HjError::Domain("tabulated potential has non-finite samples".into()));
        }
        Ok(PeriodicTable { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    fn sample(&self, j: isize) -> f64 {
        let m = self.values.len() as isize;
        self.values[j.rem_euclid(m) as usize]
    }

    pub fn value(&self, x: f64) -> f64 {
        let m = self.values.len();
        let s = math::wrap_unit(x) * m as f64;
        let j = math::floor(s);
        let w = s - j;
        let j = j as isize;
        let (p0, p1, p2, p3) = (self.sample(j - 1), self.sample(j), self.sample(j + 1), self.sample(j + 2));
        // Catmull-Rom: exact on nodes, C^1 between them
        let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
        let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let c = -0.5 * p0 + 0.5 * p2;
        ((a * w + b) * w + c) * w + p1
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let h = self.spacing();
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianKind {
    /// `p^2 / 2 + V(x)`
    Mechanical { potential: Potential },
    /// `stiffness * p^2 / 2`
    KineticOnly { stiffness: f64 },
    /// `-H(x, p)`
    Negate(Box<Hamiltonian1D>),
    /// `H(x, -p)`
    Reflect(Box<Hamiltonian1D>),
    /// `p^2 / 2 + V(x)` when `kinetic`, otherwise the bare potential `V(x)`.
    TabulatedPotential { table: PeriodicTable, kinetic: bool },
}

/// A Hamiltonian `H(x, p)` on the circle, 1-periodic in `x`.
///
/// Instances are immutable; cloning is cheap except for large tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian1D {
    kind: HamiltonianKind,
    convexity: Convexity,
    coercivity: Coercivity,
}

impl Hamiltonian1D {
    /// `p^2 / 2 + cos(2 pi x)`.
    pub fn pendulum() -> Self {
        Self::mechanical(Potential::pendulum()).expect("pendulum tags are consistent")
    }

    pub fn mechanical(potential: Potential) -> Result<Self> {
        if !potential.is_finite() {
            return Err(HjError::Domain("potential has non-finite coefficients".into()));
        }
        Self::build(HamiltonianKind::Mechanical { potential }, Convexity::TonelliConvex, Coercivity::Coercive)
    }

    /// `p^2 / 2`.
    pub fn kinetic() -> Self {
        Self::kinetic_scaled(1.0).expect("kinetic tags are consistent")
    }

    pub fn kinetic_scaled(stiffness: f64) -> Result<Self> {
        if !(stiffness.is_finite() && stiffness > 0.0) {
            return Err(HjError::InvalidArgument(format!("kinetic stiffness must be positive, got {stiffness}")));
        }
        Self::build(HamiltonianKind::KineticOnly { stiffness }, Convexity::TonelliConvex, Coercivity::Coercive)
    }

    pub fn tabulated(values: Vec<f64>, kinetic: bool) -> Result<Self> {
        let table = PeriodicTable::new(values)?;
        let (convexity, coercivity) = if kinetic {
            (Convexity::TonelliConvex, Coercivity::Coercive)
        } else {
            (Convexity::General, Coercivity::Neither)
        };
        Self::build(HamiltonianKind::TabulatedPotential { table, kinetic }, convexity, coercivity)
    }

    pub fn negate(inner: Hamiltonian1D) -> Self {
        let convexity = inner.convexity.negated();
        let coercivity = inner.coercivity.negated();
        Hamiltonian1D { kind: HamiltonianKind::Negate(Box::new(inner)), convexity, coercivity }
    }

    pub fn reflect(inner: Hamiltonian1D) -> Self {
        let convexity = inner.convexity;
        let coercivity = inner.coercivity;
        Hamiltonian1D { kind: HamiltonianKind::Reflect(Box::new(inner)), convexity, coercivity }
    }

    /// `Gbar(x, p) = -G(x, -p)`, the Hamiltonian whose semigroup conjugates
    /// the one of `G` under `u -> -u`.
    pub fn flipped(&self) -> Self {
        Self::reflect(Self::negate(self.clone()))
    }

    fn build(kind: HamiltonianKind, convexity: Convexity, coercivity: Coercivity) -> Result<Self> {
        let h = Hamiltonian1D { kind, convexity, coercivity };
        h.check_tags()?;
        Ok(h)
    }

    pub fn kind(&self) -> &HamiltonianKind {
        &self.kind
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn coercivity(&self) -> Coercivity {
        self.coercivity
    }

    /// Samples the Hamiltonian and confirms that its tags describe it.
    pub fn check_tags(&self) -> Result<()> {
        const XS: usize = 32;
        let xs = (0..XS).map(|i| i as f64 / XS as f64);
        let far = 1.0e3;
        let sign = match self.coercivity {
            Coercivity::Coercive => Some(1.0),
            Coercivity::AntiCoercive => Some(-1.0),
            Coercivity::Neither => None,
        };
        if let Some(sign) = sign {
            let at_zero = xs.clone().map(|x| sign * self.value(x, 0.0)).fold(f64::MIN, f64::max);
            let at_far = xs
                .clone()
                .map(|x| (sign * self.value(x, far)).min(sign * self.value(x, -far)))
                .fold(f64::MAX, f64::min);
            if at_far <= at_zero {
                return Err(HjError::Tags(format!("{:?} not observed", self.coercivity)));
            }
        }
        let curvature_sign = match self.convexity {
            Convexity::TonelliConvex => Some(1.0),
            Convexity::TonelliConcave => Some(-1.0),
            Convexity::General => None,
        };
        if let Some(sign) = curvature_sign {
            let h = 1e-2;
            for x in xs {
                for p in [-10.0, -1.0, 0.0, 1.0, 10.0] {
                    let d2 = self.value(x, p + h) - 2.0 * self.value(x, p) + self.value(x, p - h);
                    if sign * d2 <= 0.0 {
                        return Err(HjError::Tags(format!("{:?} violated at (x, p) = ({x}, {p})", self.convexity)));
                    }
                }
            }
        }
        Ok(())
    }

    /// `H(x, p)` without input validation; the hot path of the scheme.
    #[inline]
    pub fn value(&self, x: f64, p: f64) -> f64 {
        match &self.kind {
            HamiltonianKind::Mechanical { potential } => 0.5 * p * p + potential.value(x),
            HamiltonianKind::KineticOnly { stiffness } => 0.5 * stiffness * p * p,
            HamiltonianKind::Negate(inner) => -inner.value(x, p),
            HamiltonianKind::Reflect(inner) => inner.value(x, -p),
            HamiltonianKind::TabulatedPotential { table, kinetic } => {
                let kin = if *kinetic { 0.5 * p * p } else { 0.0 };
                kin + table.value(x)
            }
        }
    }

    pub fn eval(&self, x: f64, p: f64) -> Result<f64> {
        check_finite(x, p)?;
        Ok(self.value(x, p))
    }

    /// `(dH/dx, dH/dp)`.
    #[inline]
    pub fn partials(&self, x: f64, p: f64) -> (f64, f64) {
        match &self.kind {
            HamiltonianKind::Mechanical { potential } => (potential.derivative(x), p),
            HamiltonianKind::KineticOnly { stiffness } => (0.0, stiffness * p),
            HamiltonianKind::Negate(inner) => {
                let (hx, hp) = inner.partials(x, p);
                (-hx, -hp)
            }
            HamiltonianKind::Reflect(inner) => {
                let (hx, hp) = inner.partials(x, -p);
                (hx, -hp)
            }
            HamiltonianKind::TabulatedPotential { table, kinetic } => {
                (table.derivative(x), if *kinetic { p } else { 0.0 })
            }
        }
    }

    /// `1.1 * sup |dH/dp|` over `x in [0, 1)`, `|p| <= radius`, sampled on a
    /// 256 x 256 lattice that includes `p = +-radius`.
    pub fn speed_bound(&self, radius: f64) -> Result<f64> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(HjError::InvalidArgument(format!("momentum radius must be positive, got {radius}")));
        }
        const SAMPLES: usize = 256;
        let mut sup = 0.0f64;
        for i in 0..SAMPLES {
            let x = i as f64 / SAMPLES as f64;
            for k in 0..SAMPLES {
                let p = -radius + 2.0 * radius * k as f64 / (SAMPLES - 1) as f64;
                sup = sup.max(self.partials(x, p).1.abs());
            }
        }
        Ok(sup + 0.1 * sup)
    }

    /// `sup |H(x, p)|` over `|p| <= radius`, sampled.
    pub fn sup_abs(&self, radius: f64) -> f64 {
        let mut sup = 0.0f64;
        for_lattice(radius, 256, 65, |x, p| sup = sup.max(self.value(x, p).abs()));
        sup
    }

    /// `sup (-H)` over `|p| <= radius`, sampled.
    pub fn sup_negative(&self, radius: f64) -> f64 {
        let mut sup = f64::NEG_INFINITY;
        for_lattice(radius, 256, 65, |x, p| sup = sup.max(-self.value(x, p)));
        sup
    }

    /// Right-hand side of Hamilton's equations, `(dH/dp, -dH/dx)`.
    #[inline]
    pub fn vector_field(&self, x: f64, p: f64) -> (f64, f64) {
        let (hx, hp) = self.partials(x, p);
        (hp, -hx)
    }
}

fn for_lattice(radius: f64, nx: usize, np: usize, mut f: impl FnMut(f64, f64)) {
    for i in 0..nx {
        let x = i as f64 / nx as f64;
        if radius == 0.0 {
            f(x, 0.0);
            continue;
        }
        for k in 0..np {
            f(x, -radius + 2.0 * radius * k as f64 / (np - 1) as f64);
        }
    }
}

fn check_finite(x: f64, p: f64) -> Result<()> {
    if x.is_finite() && p.is_finite() {
        Ok(())
    } else {
        Err(HjError::Domain(format!("non-finite phase point ({x}, {p})")))
    }
}

/// Poisson bracket `{H, G} = H_p G_x - G_p H_x`.
#[inline]
pub fn poisson_bracket(h: &Hamiltonian1D, g: &Hamiltonian1D, x: f64, p: f64) -> f64 {
    let (hx, hp) = h.partials(x, p);
    let (gx, gp) = g.partials(x, p);
    hp * gx - gp * hx
}

/// `max |{H, G}|` over the lattice `x_i = i / nx`, `p_k` evenly spaced in
/// `[-radius, radius]` (endpoints included).
pub fn poisson_bracket_sup(h: &Hamiltonian1D, g: &Hamiltonian1D, radius: f64, nx: usize, np: usize) -> Result<f64> {
    if nx < 64 || np < 64 {
        return Err(HjError::InvalidArgument(format!(
            "bracket lattice needs at least 64 x 64 samples, got {nx} x {np}"
        )));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(HjError::InvalidArgument(format!("bad momentum radius {radius}")));
    }
    let mut sup = 0.0f64;
    for_lattice(radius, nx, np, |x, p| sup = sup.max(poisson_bracket(h, g, x, p).abs()));
    Ok(sup)
}

/// A phase-space point with `x` reduced to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub x: f64,
    pub p: f64,
}

impl FlowState {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        check_finite(x, p)?;
        Ok(FlowState { x: math::wrap_unit(x), p })
    }

    pub fn energy(&self, h: &Hamiltonian1D) -> f64 {
        h.value(self.x, self.p)
    }
}

/// One classical Runge-Kutta step of the Hamiltonian vector field on the
/// universal cover (no reduction of `x`).
#[inline]
fn rk4_lifted(h: &Hamiltonian1D, x: f64, p: f64, dt: f64) -> (f64, f64) {
    let (k1x, k1p) = h.vector_field(x, p);
    let (k2x, k2p) = h.vector_field(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p);
    let (k3x, k3p) = h.vector_field(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p);
    let (k4x, k4p) = h.vector_field(x + dt * k3x, p + dt * k3p);
    (x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x), p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
}

/// Advances `s` by `dt` along the flow of `h`.
pub fn flow_step(h: &Hamiltonian1D, s: FlowState, dt: f64) -> Result<FlowState> {
    check_finite(s.x, s.p)?;
    if !dt.is_finite() {
        return Err(HjError::Integration(format!("non-finite step {dt}")));
    }
    let (x, p) = rk4_lifted(h, s.x, s.p, dt);
    if !(x.is_finite() && p.is_finite()) {
        return Err(HjError::Integration(format!("state blew up from ({}, {})", s.x, s.p)));
    }
    Ok(FlowState { x: math::wrap_unit(x), p })
}

/// Flows `(x, p)` on the universal cover for time `t`, in uniform steps no
/// longer than `dt`.
pub fn flow_lifted(h: &Hamiltonian1D, x: f64, p: f64, t: f64, dt: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && dt.is_finite() && dt > 0.0) {
        return Err(HjError::InvalidArgument(format!("bad flow time {t} / step {dt}")));
    }
    let steps = math::ceil(t.abs() / dt) as usize;
    if steps == 0 {
        return Ok((x, p));
    }
    let step = t / steps as f64;
    let (mut x, mut p) = (x, p);
    for _ in 0..steps {
        (x, p) = rk4_lifted(h, x, p, step);
    }
    if !(x.is_finite() && p.is_finite()) {
        return Err(HjError::Integration("trajectory left the finite range".into()));
    }
    Ok((x, p))
}

/// Sampled graph `{(x_j, p_j)}` over the circle, with strictly increasing `x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCloud {
    points: Vec<FlowState>,
}

impl GraphCloud {
    pub fn new(points: Vec<FlowState>) -> Result<Self> {
        if points.len() < 2 {
            return Err(HjError::InvalidArgument("graph cloud needs at least two points".into()));
        }
        if !points.windows(2).all(|w| w[0].x < w[1].x) {
            return Err(HjError::InvalidArgument("graph cloud x coordinates must be strictly increasing".into()));
        }
        Ok(GraphCloud { points })
    }

    /// Cloud `(x_j, slopes_j)` on the grid `x_j = j / n`.
    pub fn from_slopes(slopes: &[f64]) -> Result<Self> {
        let n = slopes.len() as f64;
        let points =
            slopes.iter().enumerate().map(|(j, &p)| FlowState::new(j as f64 / n, p)).collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[FlowState] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Result of pushing a graph cloud by the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PushedGraph {
    /// Pushed points in the original order; `x` reduced to `[0, 1)`.
    pub pushed: Vec<FlowState>,
    /// Pushed abscissae on the universal cover.
    pub lifted_x: Vec<f64>,
    pub is_graph: bool,
    /// Largest backwards step between consecutive (originally adjacent)
    /// pushed abscissae; zero when the order is preserved.
    pub graph_distortion: f64,
}

/// Pushes every point of `cloud` by the time-`t` flow of `h` and re-checks
/// the graph property. Equal abscissae count as a fold.
pub fn push_graph(h: &Hamiltonian1D, cloud: &GraphCloud, t: f64, dt: f64) -> Result<PushedGraph> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(HjError::InvalidArgument(format!("push time must be >= 0, got {t}")));
    }
    let mut lifted_x = Vec::with_capacity(cloud.len());
    let mut pushed = Vec::with_capacity(cloud.len());
    for s in cloud.points() {
        let (x, p) = flow_lifted(h, s.x, s.p, t, dt)?;
        lifted_x.push(x);
        pushed.push(FlowState { x: math::wrap_unit(x), p });
    }
    let (is_graph, graph_distortion) = graph_order(&lifted_x);
    Ok(PushedGraph { pushed, lifted_x, is_graph, graph_distortion })
}

/// Checks that lifted abscissae increase strictly along the cyclic order,
/// including the wrap from the last point to the first point plus one period.
pub fn graph_order(lifted_x: &[f64]) -> (bool, f64) {
    let n = lifted_x.len();
    let mut is_graph = true;
    let mut distortion = 0.0f64;
    for j in 0..n {
        let next = if j + 1 < n { lifted_x[j + 1] } else { lifted_x[0] + 1.0 };
        let gap = next - lifted_x[j];
        if gap <= 0.0 {
            is_graph = false;
            distortion = distortion.max(-gap);
        }
    }
    (is_graph, distortion)
}
