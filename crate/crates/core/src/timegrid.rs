//! Uniform time grids and sampled functions on them, with the convolution
//! quadrature every solver in this crate is built on.
//!
//! The convolution `(a*b)(t) = ∫₀ᵗ a(t−s)b(s) ds` is discretized by
//! trapezoidal product integration. The weights are symmetric, so the
//! discrete convolution is commutative, and the diagonal weight multiplies
//! the kernel value at 0, so marching solvers stay explicit whenever the
//! kernel vanishes there (every lifted kernel does).
//!
//! Differentiation of sampled data uses second-order stencils whose boundary
//! rows are built by polynomial ghost-point extrapolation, which makes the
//! leading error coefficient match the interior one. The error of a
//! derivative of smooth samples is then a smooth O(Δt²) function of t, not
//! merely O(Δt²) node by node; downstream differentiation does not lose an
//! order at the ends.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform grid on `[0, T]` with nodes `t_n = n·Δt`, `Δt = T/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T: Scalar> {
    horizon: T,
    steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    /// A grid over `[0, horizon]` with `steps` intervals (`steps + 1` nodes).
    ///
    /// Panics if `horizon <= 0`, `horizon` is not finite, or `steps < 2`.
    pub fn new(horizon: T, steps: usize) -> Self {
        assert!(
            horizon.is_finite() && horizon > T::zero(),
            "horizon must be a positive finite number"
        );
        assert!(steps >= 2, "a grid needs at least 2 steps");
        Self { horizon, steps }
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width `Δt`.
    pub fn dt(&self) -> T {
        self.horizon / T::from_usize(self.steps).unwrap()
    }

    /// Node `t_n = n·Δt`.
    pub fn node(&self, n: usize) -> T {
        debug_assert!(n <= self.steps);
        T::from_usize(n).unwrap() * self.dt()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |n| self.node(n))
    }

    /// Same horizon, `factor`-times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        Self::new(self.horizon, self.steps * factor)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_horizon: self.horizon.as_f64(),
                left_steps: self.steps,
                right_horizon: other.horizon.as_f64(),
                right_steps: other.steps,
            })
        }
    }
}

/// A real-valued function sampled at every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Scalar> {
    grid: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    /// Wraps explicit node values. Fails if the length is not `N + 1` or any
    /// value is non-finite.
    pub fn from_values(grid: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                what: "grid function values",
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid function values",
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples a closure at every node.
    pub fn sample(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().map(f).collect();
        Self::from_values(grid, values).expect("sampled closure produced non-finite values")
    }

    pub fn zeros(grid: TimeGrid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn constant(grid: TimeGrid<T>, c: T) -> Self {
        Self::sample(grid, |_| c)
    }

    /// The identity function `t ↦ t` on the grid.
    pub fn ramp(grid: TimeGrid<T>) -> Self {
        Self::sample(grid, |t| t)
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, n: usize) -> T {
        self.values[n]
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        *self.values.last().unwrap()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    /// Max-norm over all nodes.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// Largest node-wise difference against `other`.
    pub fn max_difference(&self, other: &Self) -> Result<T> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// Trapezoidal integral over the whole interval `[0, T]`.
    pub fn integral(&self) -> T {
        let dt = self.grid.dt();
        let n = self.grid.steps();
        let mut acc = (self.values[0] + self.values[n]) * T::half();
        for &v in &self.values[1..n] {
            acc += v;
        }
        acc * dt
    }

    /// Running trapezoidal integral `t_n ↦ ∫₀^{t_n} f`; starts at exactly 0.
    pub fn cumulative_integral(&self) -> Self {
        let dt = self.grid.dt();
        let mut values = Vec::with_capacity(self.grid.len());
        let mut acc = T::zero();
        values.push(acc);
        for w in self.values.windows(2) {
            acc += (w[0] + w[1]) * T::half() * dt;
            values.push(acc);
        }
        Self {
            grid: self.grid,
            values,
        }
    }
}

/// Trapezoidal product-integration convolution
/// `c(t_n) ≈ ∫₀^{t_n} a(t_n − s) b(s) ds`, with `c(0) = 0` exactly.
pub fn convolve<T: Scalar>(a: &GridFunction<T>, b: &GridFunction<T>) -> Result<GridFunction<T>> {
    a.grid().check_same(b.grid())?;
    let n = a.grid().steps();
    let dt = a.grid().dt();
    let av = a.values();
    let bv = b.values();
    let mut values = Vec::with_capacity(n + 1);
    values.push(T::zero());
    for k in 1..=n {
        let mut acc = (av[k] * bv[0] + av[0] * bv[k]) * T::half();
        for i in 1..k {
            acc += av[k - i] * bv[i];
        }
        values.push(acc * dt);
    }
    GridFunction::from_values(*a.grid(), values)
}

/// Convolution of `r` with the ramp `t ↦ t`:
/// `r⁽¹⁾(t_n) ≈ ∫₀^{t_n} (t_n − s) r(s) ds`.
///
/// The result vanishes at 0 and its kernel role always has a zero diagonal
/// weight, which is what keeps the marching solvers explicit.
pub fn lift1<T: Scalar>(r: &GridFunction<T>) -> GridFunction<T> {
    let ramp = GridFunction::ramp(*r.grid());
    convolve(&ramp, r).expect("ramp shares the grid by construction")
}

/// Derivative order accepted by [`differentiate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
    Third,
}

impl DerivOrder {
    pub fn as_usize(self) -> usize {
        match self {
            DerivOrder::First => 1,
            DerivOrder::Second => 2,
            DerivOrder::Third => 3,
        }
    }

    fn min_steps(self) -> usize {
        match self {
            DerivOrder::First | DerivOrder::Second => 4,
            DerivOrder::Third => 6,
        }
    }
}

/// Second-order finite-difference derivative of sampled data.
///
/// Interior nodes use central stencils; boundary nodes use one-sided
/// stencils whose leading error coefficient equals the interior one.
pub fn differentiate<T: Scalar>(g: &GridFunction<T>, order: DerivOrder) -> Result<GridFunction<T>> {
    let n = g.grid().steps();
    if n < order.min_steps() {
        return Err(Error::GridTooCoarse {
            order: order.as_usize(),
            steps: n,
            min_steps: order.min_steps(),
        });
    }
    let dt = g.grid().dt();
    let f = g.values();
    let mut d = vec![T::zero(); n + 1];
    match order {
        DerivOrder::First => {
            let w = T::half() / dt;
            d[0] = (T::of(-4.0) * f[0] + T::of(7.0) * f[1] - T::of(4.0) * f[2] + f[3]) * w;
            for i in 1..n {
                d[i] = (f[i + 1] - f[i - 1]) * w;
            }
            d[n] =
                (T::of(4.0) * f[n] - T::of(7.0) * f[n - 1] + T::of(4.0) * f[n - 2] - f[n - 3]) * w;
        }
        DerivOrder::Second => {
            let w = (dt * dt).recip();
            let edge = |a: T, b: T, c: T, e: T, q: T| {
                (T::of(3.0) * a - T::of(9.0) * b + T::of(10.0) * c - T::of(5.0) * e + q) * w
            };
            d[0] = edge(f[0], f[1], f[2], f[3], f[4]);
            for i in 1..n {
                d[i] = (f[i - 1] - T::two() * f[i] + f[i + 1]) * w;
            }
            d[n] = edge(f[n], f[n - 1], f[n - 2], f[n - 3], f[n - 4]);
        }
        DerivOrder::Third => {
            let w = T::half() / (dt * dt * dt);
            d[0] = (T::of(-9.0) * f[0] + T::of(38.0) * f[1] - T::of(64.0) * f[2]
                + T::of(54.0) * f[3]
                - T::of(23.0) * f[4]
                + T::of(4.0) * f[5])
                * w;
            d[1] = (T::of(-4.0) * f[0] + T::of(15.0) * f[1] - T::of(22.0) * f[2]
                + T::of(16.0) * f[3]
                - T::of(6.0) * f[4]
                + f[5])
                * w;
            for i in 2..n - 1 {
                d[i] = (f[i + 2] - T::two() * f[i + 1] + T::two() * f[i - 1] - f[i - 2]) * w;
            }
            d[n - 1] = (T::of(4.0) * f[n] - T::of(15.0) * f[n - 1] + T::of(22.0) * f[n - 2]
                - T::of(16.0) * f[n - 3]
                + T::of(6.0) * f[n - 4]
                - f[n - 5])
                * w;
            d[n] = (T::of(9.0) * f[n] - T::of(38.0) * f[n - 1] + T::of(64.0) * f[n - 2]
                - T::of(54.0) * f[n - 3]
                + T::of(23.0) * f[n - 4]
                - T::of(4.0) * f[n - 5])
                * w;
        }
    }
    GridFunction::from_values(*g.grid(), d)
}
