//! Volterra integral equations of the second and first kind on a uniform
//! grid, resolvent kernels, and the growth bounds used by the mixed-problem
//! diagnostics.
//!
//! Everything marches forward in time: with trapezoidal product quadrature
//! each step solves a single scalar linear equation, and when the kernel
//! vanishes at 0 the diagonal quadrature weight drops out, so the step is
//! explicit.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::timegrid::{convolve, differentiate, lift1, DerivOrder, GridFunction, TimeGrid};

/// Relative cutoff below which the marching diagonal counts as degenerate.
const DIAGONAL_CUTOFF: f64 = 1e-12;

/// Absolute slack allowed below zero when checking nonnegativity of
/// quadrature output.
pub const POSITIVITY_SLACK: f64 = 1e-10;

/// Relative slack for the analytic growth bounds.
const BOUND_SLACK: f64 = 1e-8;

/// Consistency tolerance for first-kind right-hand sides at `t = 0`,
/// relative to the sup norm of the right-hand side.
const FIRST_KIND_RHS_TOL: f64 = 1e-8;

/// A convolution (memory) kernel: a grid function in the role of `h`
/// (second-order equation) or `l` (first-order equation).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T: Scalar> {
    samples: GridFunction<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(samples: GridFunction<T>) -> Self {
        Self { samples }
    }

    pub fn sample(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self::new(GridFunction::sample(grid, f))
    }

    pub fn zero(grid: TimeGrid<T>) -> Self {
        Self::new(GridFunction::zeros(grid))
    }

    pub fn samples(&self) -> &GridFunction<T> {
        &self.samples
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.samples.grid()
    }

    /// Value at `t = 0`; the first-order theory requires it to vanish.
    pub fn at_zero(&self) -> T {
        self.samples.first()
    }

    pub fn min_value(&self) -> T {
        self.samples.min_value()
    }

    /// Nonnegative up to the quadrature slack.
    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= -T::of(POSITIVITY_SLACK)
    }

    /// The lift `h⁽¹⁾(t) = ∫₀ᵗ (t−s) h(s) ds`.
    pub fn lift(&self) -> GridFunction<T> {
        lift1(&self.samples)
    }

    /// The running integral `∫₀ᵗ h`; for a first-order kernel `l` with
    /// `l(0) = 0` this is the lift of `l′`.
    pub fn cumulative_integral(&self) -> GridFunction<T> {
        self.samples.cumulative_integral()
    }
}

/// Solves `c·x(t) + ∫₀ᵗ kernel(t−s) x(s) ds = rhs(t)` by forward marching.
///
/// The discrete analogue of `c ≠ 0` is that both `c` and the effective
/// diagonal `c + (Δt/2)·kernel(0)` stay away from zero; a violation is the
/// degenerate case where the measured initial value vanishes.
pub fn solve_second_kind<T: Scalar>(
    c: T,
    kernel: &GridFunction<T>,
    rhs: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    kernel.grid().check_same(rhs.grid())?;
    let n = kernel.grid().steps();
    let dt = kernel.grid().dt();
    let half_dt = dt * T::half();
    let k = kernel.values();
    let r = rhs.values();

    let effective = c + half_dt * k[0];
    let cutoff = T::of(DIAGONAL_CUTOFF) * T::one().max(c.abs());
    if effective.abs() <= cutoff || c.abs() <= cutoff {
        return Err(Error::DegenerateDiagonal {
            effective: effective.as_f64(),
            constant: c.as_f64(),
        });
    }

    let mut x = Vec::with_capacity(n + 1);
    x.push(r[0] / c);
    for m in 1..=n {
        let mut acc = k[m] * x[0] * T::half();
        for i in 1..m {
            acc += k[m - i] * x[i];
        }
        x.push((r[m] - dt * acc) / effective);
    }
    GridFunction::from_values(*kernel.grid(), x)
}

/// Solves the first-kind equation `∫₀ᵗ kernel(t−s) x(s) ds = rhs(t)` by
/// differentiating it into a second-kind one with free coefficient
/// `kernel(0)`.
pub fn solve_first_kind<T: Scalar>(
    kernel: &GridFunction<T>,
    rhs: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    let k0 = kernel.first();
    if k0.abs() <= T::of(DIAGONAL_CUTOFF) * T::one().max(kernel.sup_norm()) {
        return Err(Error::FirstKindKernelVanishes { value: k0.as_f64() });
    }
    let rhs_tol = T::of(FIRST_KIND_RHS_TOL) * rhs.sup_norm();
    if rhs.first().abs() > rhs_tol {
        return Err(Error::FirstKindInconsistentRhs {
            value: rhs.first().as_f64(),
            tolerance: rhs_tol.as_f64(),
        });
    }
    let kernel_deriv = differentiate(kernel, DerivOrder::First)?;
    let rhs_deriv = differentiate(rhs, DerivOrder::First)?;
    solve_second_kind(k0, &kernel_deriv, &rhs_deriv)
}

/// Resolvent kernel `k` of a lifted convolution kernel `h⁽¹⁾`:
/// `(I − λH)⁻¹ = I + λK` with `Hf = h⁽¹⁾∗f` and `Kf = k∗f`.
#[derive(Debug, Clone)]
pub struct ResolventKernel<T: Scalar> {
    lambda: T,
    kernel: GridFunction<T>,
    source_lift: GridFunction<T>,
}

impl<T: Scalar> ResolventKernel<T> {
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// The kernel `k` itself.
    pub fn kernel(&self) -> &GridFunction<T> {
        &self.kernel
    }

    /// The lifted kernel this resolvent was built from.
    pub fn source_lift(&self) -> &GridFunction<T> {
        &self.source_lift
    }

    /// Applies `I + λK` to a probe.
    pub fn apply(&self, x: &GridFunction<T>) -> Result<GridFunction<T>> {
        x.add(&convolve(&self.kernel, x)?.scaled(self.lambda))
    }
}

/// Builds the resolvent kernel by solving `k = h⁽¹⁾ + λ·(k∗h⁽¹⁾)`.
///
/// `h1` must vanish at `t = 0` (it is a lift); then the marching diagonal is
/// exactly 1 and the solve cannot fail. The discrete resolvent satisfies the
/// defining identity to machine precision because convolution by a kernel
/// vanishing at 0 is associative at the discrete level.
pub fn resolvent<T: Scalar>(h1: &GridFunction<T>, lambda: T) -> ResolventKernel<T> {
    assert!(
        h1.first() == T::zero(),
        "resolvent input must be a lift with h1(0) = 0, got {}",
        h1.first()
    );
    let kernel = solve_second_kind(T::one(), &h1.scaled(-lambda), h1)
        .expect("unit diagonal cannot degenerate");
    ResolventKernel {
        lambda,
        kernel,
        source_lift: h1.clone(),
    }
}

/// Truncated Neumann series `Σ_{m=1}^{mMax} λ^{m−1} h_m`, where
/// `h_1 = h⁽¹⁾` and `h_m = h⁽¹⁾ ∗ h_{m−1}`.
///
/// Serves as an independent oracle for [`resolvent`].
pub fn resolvent_neumann<T: Scalar>(
    h1: &GridFunction<T>,
    lambda: T,
    m_max: usize,
) -> GridFunction<T> {
    assert!(m_max >= 1, "the series needs at least one term");
    let mut sum = h1.clone();
    let mut iterate = h1.clone();
    let mut lambda_pow = T::one();
    for _ in 2..=m_max {
        iterate = convolve(h1, &iterate).expect("shared grid");
        lambda_pow *= lambda;
        sum = sum.add(&iterate.scaled(lambda_pow)).expect("shared grid");
    }
    sum
}

/// The growth constant `M = T·∫₀ᵀ |h(t)| dt`.
pub fn bound_m<T: Scalar>(h: &GridFunction<T>) -> T {
    h.grid().horizon() * h.abs().integral()
}

/// Outcome of checking a resolvent kernel against its analytic growth
/// bounds `0 ≤ k(t) ≤ M·e^{λMt}` and `∫₀ᵀ k² ≤ M·e^{2λMT}/(2λ)`.
#[derive(Debug, Clone)]
pub struct BoundsReport<T: Scalar> {
    /// Per-node distance of `k` above the (slack-relaxed) lower bound.
    pub lower_margins: Vec<T>,
    /// Per-node distance of `k` below the (slack-relaxed) upper bound.
    pub upper_margins: Vec<T>,
    pub pointwise_pass: bool,
    pub l2_value: T,
    pub l2_bound: T,
    pub l2_pass: bool,
}

impl<T: Scalar> BoundsReport<T> {
    pub fn pass(&self) -> bool {
        self.pointwise_pass && self.l2_pass
    }
}

/// Checks the pointwise and L² growth bounds of a resolvent kernel built
/// from a nonnegative kernel `h` with positive eigenvalue.
///
/// `m` is the growth constant, normally [`bound_m`]`(h)`. The preconditions
/// (`h ≥ 0`, `λ > 0`) are reported as errors rather than silently assumed.
pub fn check_bounds<T: Scalar>(
    rk: &ResolventKernel<T>,
    h: &GridFunction<T>,
    m: T,
) -> Result<BoundsReport<T>> {
    let slack = T::of(POSITIVITY_SLACK);
    if h.min_value() < -slack {
        return Err(Error::SignIndefiniteKernel {
            min: h.min_value().as_f64(),
        });
    }
    if rk.lambda() <= T::zero() {
        return Err(Error::NonpositiveEigenvalue {
            lambda: rk.lambda().as_f64(),
        });
    }
    let lambda = rk.lambda();
    let grid = rk.kernel().grid();
    let relax = T::one() + T::of(BOUND_SLACK);
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    let mut pointwise = true;
    for (n, t) in grid.nodes().enumerate() {
        let k = rk.kernel().value(n);
        let cap = m * (lambda * m * t).exp() * relax;
        let lo = k + slack;
        let hi = cap - k;
        pointwise = pointwise && lo >= T::zero() && hi >= T::zero();
        lower.push(lo);
        upper.push(hi);
    }
    let l2_value = rk.kernel().map(|v| v * v).integral();
    let l2_bound = m * (T::two() * lambda * m * grid.horizon()).exp() / (T::two() * lambda) * relax;
    let l2_pass = l2_value <= l2_bound;
    Ok(BoundsReport {
        lower_margins: lower,
        upper_margins: upper,
        pointwise_pass: pointwise,
        l2_value,
        l2_bound,
        l2_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TimeGrid<f64> {
        TimeGrid::new(1.0, n)
    }

    /// Closed form of the resolvent of h⁽¹⁾ = t²/2 at λ = 1, from the
    /// Laplace transform 1/(s³ − 1) by partial fractions.
    fn resolvent_closed_form(t: f64) -> f64 {
        let a = 3f64.sqrt() / 2.0;
        (t.exp() - (-t / 2.0).exp() * ((a * t).cos() + 3f64.sqrt() * (a * t).sin())) / 3.0
    }

    #[test]
    fn zero_kernel_second_kind_is_identity() {
        let g = grid(40);
        let rhs = GridFunction::sample(g, |t| (4.0 * t).sin() - t);
        let x = solve_second_kind(1.0, &GridFunction::zeros(g), &rhs).unwrap();
        assert!(x.max_difference(&rhs).unwrap() <= 1e-15);
    }

    #[test]
    fn exponential_closed_form_case() {
        // x + 1∗x = 1 gives x(t) = e^{−t}.
        let g = grid(400);
        let one = GridFunction::constant(g, 1.0);
        let x = solve_second_kind(1.0, &one, &one).unwrap();
        let exact = GridFunction::sample(g, |t| (-t).exp());
        let err = x.max_difference(&exact).unwrap();
        assert!(err <= 1e-4, "max error {err}");
        // Substitution oracle: the residual of the discrete equation is zero
        // by construction.
        let residual = x
            .add(&convolve(&one, &x).unwrap())
            .unwrap()
            .max_difference(&one)
            .unwrap();
        assert!(residual <= 1e-13);
    }

    #[test]
    fn polynomial_closed_form_case() {
        // x + (2t)∗x = 1 + t² has solution x ≡ 1.
        let g = grid(100);
        let kernel = GridFunction::sample(g, |t| 2.0 * t);
        let rhs = GridFunction::sample(g, |t| 1.0 + t * t);
        let x = solve_second_kind(1.0, &kernel, &rhs).unwrap();
        let err = x.max_difference(&GridFunction::constant(g, 1.0)).unwrap();
        assert!(err <= 1e-12, "trapezoid is exact on this integrand: {err}");
    }

    #[test]
    fn homogeneous_second_kind_is_exactly_zero() {
        let g = grid(60);
        let kernel = GridFunction::sample(g, |t| 1.0 + t);
        let x = solve_second_kind(2.0, &kernel, &GridFunction::zeros(g)).unwrap();
        assert_eq!(x.sup_norm(), 0.0);
    }

    #[test]
    fn degenerate_diagonal_is_reported() {
        let g = grid(10);
        let rhs = GridFunction::constant(g, 1.0);
        let err = solve_second_kind(0.0, &GridFunction::constant(g, 1.0), &rhs);
        assert!(matches!(err, Err(Error::DegenerateDiagonal { .. })));
        // c cancelling against the diagonal weight is degenerate too.
        let dt = g.dt();
        let err = solve_second_kind(-dt / 2.0, &GridFunction::constant(g, 1.0), &rhs);
        assert!(matches!(err, Err(Error::DegenerateDiagonal { .. })));
    }

    #[test]
    fn second_kind_refinement_order_two() {
        let errs: Vec<f64> = [100usize, 400]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let one = GridFunction::constant(g, 1.0);
                let x = solve_second_kind(1.0, &one, &one).unwrap();
                x.max_difference(&GridFunction::sample(g, |t| (-t).exp()))
                    .unwrap()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2() / 2.0;
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn first_kind_zero_rhs_gives_zero() {
        let g = grid(50);
        let kernel = GridFunction::sample(g, |t| 1.0 + t * t);
        let x = solve_first_kind(&kernel, &GridFunction::zeros(g)).unwrap();
        assert_eq!(x.sup_norm(), 0.0);
    }

    #[test]
    fn first_kind_unit_kernel() {
        // ∫₀ᵗ x = t forces x ≡ 1.
        let g = grid(80);
        let x = solve_first_kind(&GridFunction::constant(g, 1.0), &GridFunction::ramp(g)).unwrap();
        let err = x.max_difference(&GridFunction::constant(g, 1.0)).unwrap();
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn first_kind_with_generated_rhs() {
        // rhs = (kernel ∗ 1) produced by the convolution oracle, so x ≡ 1.
        let g = grid(200);
        let kernel = GridFunction::sample(g, |t| 1.0 + t * t);
        let rhs = convolve(&kernel, &GridFunction::constant(g, 1.0)).unwrap();
        let x = solve_first_kind(&kernel, &rhs).unwrap();
        let err = x.max_difference(&GridFunction::constant(g, 1.0)).unwrap();
        let dt = g.dt();
        assert!(err <= 10.0 * dt * dt, "{err}");
    }

    #[test]
    fn first_kind_guards() {
        let g = grid(50);
        let vanishing = GridFunction::ramp(g);
        assert!(matches!(
            solve_first_kind(&vanishing, &GridFunction::zeros(g)),
            Err(Error::FirstKindKernelVanishes { .. })
        ));
        let kernel = GridFunction::constant(g, 1.0);
        let bad_rhs = GridFunction::constant(g, 1.0);
        assert!(matches!(
            solve_first_kind(&kernel, &bad_rhs),
            Err(Error::FirstKindInconsistentRhs { .. })
        ));
    }

    #[test]
    fn resolvent_at_lambda_zero_is_the_lift() {
        let g = grid(64);
        let h1 = lift1(&GridFunction::sample(g, |t| 1.0 + t));
        let rk = resolvent(&h1, 0.0);
        assert!(rk.kernel().max_difference(&h1).unwrap() <= 1e-15);
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let g = grid(30);
        let rk = resolvent(&GridFunction::zeros(g), 3.0);
        assert_eq!(rk.kernel().sup_norm(), 0.0);
    }

    #[test]
    fn resolvent_matches_laplace_oracle() {
        let g = grid(800);
        let h1 = GridFunction::sample(g, |t| 0.5 * t * t);
        let rk = resolvent(&h1, 1.0);
        let exact = GridFunction::sample(g, resolvent_closed_form);
        let err = rk.kernel().max_difference(&exact).unwrap();
        assert!(err <= 1e-6, "max error {err}");
        assert_eq!(rk.kernel().first(), 0.0);
    }

    #[test]
    fn resolvent_matches_scaled_laplace_oracle_at_large_lambda() {
        // For h ≡ 1 the transform of k is 1/(s³ − λ), so
        // k_λ(t) = λ^{-2/3}·k₁(λ^{1/3}·t). Stress case λ = π².
        let lambda = std::f64::consts::PI.powi(2);
        let g = grid(800);
        let h1 = GridFunction::sample(g, |t| 0.5 * t * t);
        let rk = resolvent(&h1, lambda);
        let scale = lambda.powf(1.0 / 3.0);
        let exact = GridFunction::sample(g, |t| resolvent_closed_form(scale * t) / (scale * scale));
        let err = rk.kernel().max_difference(&exact).unwrap();
        assert!(err <= 1e-5, "max error {err}");
    }

    #[test]
    fn resolvent_identity_holds_to_machine_precision() {
        let g = grid(200);
        let h1 = lift1(&GridFunction::sample(g, |t| (1.5 * t).cos().abs()));
        for &lambda in &[1.0, std::f64::consts::PI.powi(2)] {
            let rk = resolvent(&h1, lambda);
            let x = GridFunction::sample(g, |t| (7.0 * t).sin() + 0.5);
            let y = rk.apply(&x).unwrap();
            let z = y.sub(&convolve(&h1, &y).unwrap().scaled(lambda)).unwrap();
            let defect = z.max_difference(&x).unwrap();
            assert!(defect <= 1e-10 * x.sup_norm(), "λ={lambda}: {defect}");
        }
    }

    #[test]
    fn neumann_series_first_term_and_lambda_zero() {
        let g = grid(40);
        let h1 = lift1(&GridFunction::constant(g, 1.0));
        assert!(
            resolvent_neumann(&h1, 5.0, 1)
                .max_difference(&h1)
                .unwrap()
                .abs()
                <= 1e-15
        );
        assert!(
            resolvent_neumann(&h1, 0.0, 8)
                .max_difference(&h1)
                .unwrap()
                .abs()
                <= 1e-15
        );
    }

    #[test]
    fn neumann_series_agrees_with_resolvent() {
        let g = grid(200);
        let h1 = GridFunction::sample(g, |t| 0.5 * t * t);
        let rk = resolvent(&h1, 1.0);
        let series = resolvent_neumann(&h1, 1.0, 20);
        let err = series.max_difference(rk.kernel()).unwrap();
        assert!(err <= 1e-8, "series vs marching: {err}");
    }

    #[test]
    fn bound_m_arithmetic() {
        assert_eq!(bound_m(&GridFunction::<f64>::zeros(grid(10))), 0.0);
        assert!((bound_m(&GridFunction::constant(grid(10), 1.0)) - 1.0).abs() <= 1e-14);
        let g2 = TimeGrid::new(2.0f64, 100);
        assert!((bound_m(&GridFunction::ramp(g2)) - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn positivity_of_resolvent_for_nonnegative_kernel() {
        let g = grid(150);
        let h = GridFunction::sample(g, |t| 1.5 + (6.0 * t).sin().abs());
        let rk = resolvent(&lift1(&h), 2.0);
        assert!(rk.kernel().min_value() >= -POSITIVITY_SLACK);
    }

    #[test]
    fn bounds_hold_for_unit_kernel() {
        let g = grid(400);
        let h = GridFunction::constant(g, 1.0);
        let m = bound_m(&h);
        for &lambda in &[1.0, std::f64::consts::PI.powi(2)] {
            let rk = resolvent(&lift1(&h), lambda);
            let report = check_bounds(&rk, &h, m).unwrap();
            assert!(report.pass(), "λ={lambda}: {report:?}");
        }
    }

    #[test]
    fn bounds_trivially_pass_for_zero_kernel() {
        let g = grid(20);
        let h = GridFunction::zeros(g);
        let rk = resolvent(&lift1(&h), 1.0);
        let report = check_bounds(&rk, &h, bound_m(&h)).unwrap();
        assert!(report.pass());
    }

    #[test]
    fn bounds_reject_sign_indefinite_kernel() {
        let g = grid(20);
        let h = GridFunction::sample(g, |t| t - 0.5);
        let rk = resolvent(&lift1(&h), 1.0);
        assert!(matches!(
            check_bounds(&rk, &h, 1.0),
            Err(Error::SignIndefiniteKernel { .. })
        ));
    }
}
