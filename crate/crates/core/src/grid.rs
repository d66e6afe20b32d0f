//! Periodic grid functions and named initial data.

use alloc::vec::Vec;

use crate::error::{HjError, Result};
use crate::math::{self, TAU};
use crate::weakkam;

pub const MIN_NODES: usize = 64;
pub const MAX_NODES: usize = 8192;

/// A 1-periodic function sampled at `x_j = j / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_size(values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(HjError::Domain(alloc::format!("grid value {j} is not finite")));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        check_size(n)?;
        let h = 1.0 / n as f64;
        Self::new((0..n).map(|j| f(j as f64 * h)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// Wraps values that are already known to be finite and correctly sized.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(check_size(values.len()).is_ok());
        GridFunction { values }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at node `j` with periodic wrap, for any integer index.
    #[inline]
    pub fn at(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        self.values[j.rem_euclid(n) as usize]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_j |u_{j+1} - u_j| / dx` with periodic wrap.
    pub fn lipschitz(&self) -> f64 {
        let n = self.values.len();
        let mut lip = 0.0f64;
        for j in 0..n {
            let next = self.values[(j + 1) % n];
            lip = lip.max((next - self.values[j]).abs());
        }
        lip * n as f64
    }

    /// Sup-norm distance. Panics if the grids differ in size.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.n(), other.n(), "grid size mismatch");
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Discrete L1 distance `dx * sum |u_j - v_j|`.
    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.n(), other.n(), "grid size mismatch");
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        s * self.dx()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn negated(&self) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| -v).collect() }
    }

    pub fn shifted(&self, c: f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| v + c).collect() }
    }

    /// Every `factor`-th node, i.e. the same function on a coarser grid.
    pub fn restrict(&self, factor: usize) -> Result<GridFunction> {
        if factor == 0 || !self.n().is_multiple_of(factor) {
            return Err(HjError::InvalidArgument(alloc::format!("cannot restrict {} nodes by {factor}", self.n())));
        }
        GridFunction::new(self.values.iter().step_by(factor).copied().collect())
    }

    /// Periodic piecewise-linear interpolation at an arbitrary `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.n();
        let s = math::wrap_unit(x) * n as f64;
        let j = (math::floor(s) as usize).min(n - 1);
        let w = s - j as f64;
        (1.0 - w) * self.values[j] + w * self.values[(j + 1) % n]
    }

    /// Resamples onto a grid of `n` nodes by periodic linear interpolation.
    pub fn resample(&self, n: usize) -> Result<GridFunction> {
        if n == self.n() {
            return Ok(self.clone());
        }
        GridFunction::from_fn(n, |x| self.interpolate(x))
    }
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n.is_power_of_two() && (MIN_NODES..=MAX_NODES).contains(&n) {
        Ok(())
    } else {
        Err(HjError::GridSize(n))
    }
}

/// Initial data that can be sampled at any resolution, so experiments can be
/// rerun under grid refinement.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Zero,
    Constant(f64),
    /// `min(x, 1 - x)`
    Sawtooth,
    /// `cos(2 pi x)`
    Cosine,
    /// `0.1 sin(2 pi x)`
    SmallSine,
    /// The pendulum weak KAM solution, see [`weakkam::pendulum_weak_kam`].
    PendulumWeakKam,
    /// Periodic piecewise-linear interpolant through `(x_k, y_k)` knots with
    /// `x_k` increasing in `[0, 1)`.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// Tabulated samples, linearly interpolated at other resolutions.
    Samples(GridFunction),
}

impl InitialDatum {
    pub fn value(&self, x: f64) -> f64 {
        let x = math::wrap_unit(x);
        match self {
            InitialDatum::Zero => 0.0,
            InitialDatum::Constant(c) => *c,
            InitialDatum::Sawtooth => x.min(1.0 - x),
            InitialDatum::Cosine => math::cos(TAU * x),
            InitialDatum::SmallSine => 0.1 * math::sin(TAU * x),
            InitialDatum::PendulumWeakKam => weakkam::pendulum_weak_kam_value(x),
            InitialDatum::PiecewiseLinear(knots) => piecewise_linear(knots, x),
            InitialDatum::Samples(g) => g.interpolate(x),
        }
    }

    pub fn sample(&self, n: usize) -> Result<GridFunction> {
        if let InitialDatum::PiecewiseLinear(knots) = self {
            validate_knots(knots)?;
        }
        if let InitialDatum::Samples(g) = self {
            return g.resample(n);
        }
        GridFunction::from_fn(n, |x| self.value(x))
    }
}

fn validate_knots(knots: &[(f64, f64)]) -> Result<()> {
    if knots.is_empty() {
        return Err(HjError::InvalidArgument("piecewise-linear datum without knots".into()));
    }
    let ordered = knots.windows(2).all(|w| w[0].0 < w[1].0);
    let in_range = knots.iter().all(|(x, y)| (0.0..1.0).contains(x) && y.is_finite());
    if !ordered || !in_range {
        return Err(HjError::InvalidArgument("knots must be finite with strictly increasing x in [0, 1)".into()));
    }
    Ok(())
}

fn piecewise_linear(knots: &[(f64, f64)], x: f64) -> f64 {
    let m = knots.len();
    if m == 1 {
        return knots[0].1;
    }
    // segment [k, k+1] containing x, where the last segment wraps to the first knot + 1
    let k = match knots.iter().rposition(|(xk, _)| *xk <= x) {
        Some(k) => k,
        None => m - 1,
    };
    let (x0, y0) = knots[k];
    let (mut x1, y1) = knots[(k + 1) % m];
    let mut xq = x;
    if k + 1 == m {
        x1 += 1.0;
    }
    if xq < x0 {
        xq += 1.0;
    }
    let w = (xq - x0) / (x1 - x0);
    (1.0 - w) * y0 + w * y1
}
