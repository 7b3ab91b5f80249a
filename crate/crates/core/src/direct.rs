//! Direct Cauchy problems, mode by mode.
//!
//! The second-order problem `û″ = λ·h∗û + f̂`, `û(0) = u₀`, `û′(0) = c` is
//! marched in its fixed-point form `û = u₀ + t·c + f̃ + λ·h⁽¹⁾∗û`, which is
//! explicit because the lifted kernel vanishes at 0. The first-order problem
//! `û′ = λ·l∗û + f̂`, `û(0) = u₀` with `l(0) = 0` is reduced to a
//! second-order one with `h = l′`, `c = f̂(0)` and forcing `f̂′`, and the
//! result is cross-checked against marching the first-order fixed-point form
//! `û = u₀ + 1∗f̂ + λ·(∫l)∗û` directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{ModalProblemData, SpectralOperator};
use crate::timegrid::{convolve, differentiate, lift1, DerivOrder, GridFunction, TimeGrid};
use crate::volterra::{solve_second_kind, Kernel};

/// Tolerance on `|l(0)|` for the first-order problem.
const L0_TOLERANCE: f64 = 1e-10;

/// Slack factor, in units of `Δt²`, allowed between the reduced and the
/// fixed-point routes of the first-order solve.
const CROSS_CHECK_FACTOR: f64 = 1000.0;

/// Per-mode traces of a solution, one per eigenvalue.
#[derive(Debug, Clone)]
pub struct ModalSolution<T: Scalar> {
    op: SpectralOperator<T>,
    modes: Vec<GridFunction<T>>,
}

impl<T: Scalar> ModalSolution<T> {
    pub fn new(op: SpectralOperator<T>, modes: Vec<GridFunction<T>>) -> Result<Self> {
        if modes.len() != op.modes() {
            return Err(Error::LengthMismatch {
                what: "solution modes",
                expected: op.modes(),
                got: modes.len(),
            });
        }
        let grid = *modes[0].grid();
        for m in &modes[1..] {
            grid.check_same(m.grid())?;
        }
        Ok(Self { op, modes })
    }

    pub fn op(&self) -> &SpectralOperator<T> {
        &self.op
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.modes[0].grid()
    }

    pub fn modes(&self) -> &[GridFunction<T>] {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> &GridFunction<T> {
        &self.modes[j]
    }

    /// The trace seen by the measurement functional.
    pub fn measured_mode(&self) -> &GridFunction<T> {
        &self.modes[self.op.measure_index()]
    }
}

/// Where a derivative trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// Provenance of a measurement trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceSource {
    MeasuredSampled,
    Analytic,
}

/// The measured data `g(t) = (u(t), φ)`, optionally with analytic
/// derivative traces.
#[derive(Debug, Clone)]
pub struct MeasurementTrace<T: Scalar> {
    g: GridFunction<T>,
    d1: Option<GridFunction<T>>,
    d2: Option<GridFunction<T>>,
    d3: Option<GridFunction<T>>,
    source: TraceSource,
}

impl<T: Scalar> MeasurementTrace<T> {
    /// A trace known only through its samples; derivatives will be finite
    /// differences.
    pub fn sampled(g: GridFunction<T>) -> Self {
        Self {
            g,
            d1: None,
            d2: None,
            d3: None,
            source: TraceSource::MeasuredSampled,
        }
    }

    /// A trace with analytic derivative information.
    pub fn analytic(
        g: GridFunction<T>,
        d1: Option<GridFunction<T>>,
        d2: Option<GridFunction<T>>,
        d3: Option<GridFunction<T>>,
    ) -> Result<Self> {
        for d in [&d1, &d2, &d3].into_iter().flatten() {
            g.grid().check_same(d.grid())?;
        }
        Ok(Self {
            g,
            d1,
            d2,
            d3,
            source: TraceSource::Analytic,
        })
    }

    pub fn g(&self) -> &GridFunction<T> {
        &self.g
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.g.grid()
    }

    pub fn source(&self) -> TraceSource {
        self.source
    }

    /// Derivative trace of the requested order: the analytic one when
    /// supplied, a finite difference of the samples otherwise.
    pub fn derivative(&self, order: DerivOrder) -> Result<(GridFunction<T>, DerivativeSource)> {
        let analytic = match order {
            DerivOrder::First => &self.d1,
            DerivOrder::Second => &self.d2,
            DerivOrder::Third => &self.d3,
        };
        if let Some(d) = analytic {
            return Ok((d.clone(), DerivativeSource::Analytic));
        }
        let fd = differentiate(&self.g, order).map_err(|e| Error::DerivativeUnavailable {
            order: order.as_usize(),
            reason: e.to_string(),
        })?;
        Ok((fd, DerivativeSource::FiniteDifference))
    }

    /// Max defect between the supplied first derivative and a finite
    /// difference of the samples; `None` when no analytic derivative is
    /// attached. Should be O(Δt²) for consistent data.
    pub fn derivative_consistency_defect(&self) -> Option<T> {
        let d1 = self.d1.as_ref()?;
        let fd = differentiate(&self.g, DerivOrder::First).ok()?;
        fd.max_difference(d1).ok()
    }
}

/// One second-order mode: `û″ = λ·h∗û + f̂`, `û(0) = u0`, `û′(0) = c`.
///
/// Returns the trace with `û(0) = u0` exact.
pub fn solve_mode_ivp2<T: Scalar>(
    lambda: T,
    h: &Kernel<T>,
    u0: T,
    c: T,
    f: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    h.grid().check_same(f.grid())?;
    let h1 = h.lift();
    let rhs = GridFunction::sample(*f.grid(), |t| u0 + c * t).add(&lift1(f))?;
    solve_second_kind(T::one(), &h1.scaled(-lambda), &rhs)
}

/// The full second-order Cauchy problem; `u1` supplies the per-mode initial
/// derivative.
pub fn solve_ivp2<T: Scalar>(
    data: &ModalProblemData<T>,
    h: &Kernel<T>,
) -> Result<ModalSolution<T>> {
    let mut modes = Vec::with_capacity(data.modes());
    for j in 0..data.modes() {
        modes.push(solve_mode_ivp2(
            data.op().eigenvalue(j),
            h,
            data.u0()[j],
            data.u1()[j],
            &data.forcing()[j],
        )?);
    }
    ModalSolution::new(data.op().clone(), modes)
}

/// The first-order Cauchy problem `u′ = l∗Au + f`, `u(0) = u₀`, requiring
/// `l(0) = 0`.
///
/// Solved through the reduction `h = l′`, `û′(0) = f̂(0)`, forcing `f̂′`
/// (derivatives taken by finite differences), then cross-checked against
/// direct marching of the first-order fixed-point form; a disagreement
/// beyond quadrature accuracy is reported as an error.
pub fn solve_ivp1<T: Scalar>(
    data: &ModalProblemData<T>,
    l: &Kernel<T>,
) -> Result<ModalSolution<T>> {
    if l.at_zero().abs() > T::of(L0_TOLERANCE) {
        return Err(Error::KernelNonzeroAtZero {
            value: l.at_zero().as_f64(),
        });
    }
    let h = Kernel::new(differentiate(l.samples(), DerivOrder::First)?);
    let l_integral = l.cumulative_integral();
    let dt = data.grid().dt();
    let cross_tol_unit = T::of(CROSS_CHECK_FACTOR) * dt * dt;

    let mut modes = Vec::with_capacity(data.modes());
    for j in 0..data.modes() {
        let lambda = data.op().eigenvalue(j);
        let f = &data.forcing()[j];
        let forcing_deriv = differentiate(f, DerivOrder::First)?;
        let reduced = solve_mode_ivp2(lambda, &h, data.u0()[j], f.first(), &forcing_deriv)?;

        // Fixed-point route: û = u₀ + 1∗f̂ + λ·(∫l)∗û.
        let u0 = data.u0()[j];
        let rhs = f.cumulative_integral().map(|v| v + u0);
        let direct = solve_second_kind(T::one(), &l_integral.scaled(-lambda), &rhs)?;

        let difference = reduced.max_difference(&direct)?;
        let allowed = cross_tol_unit * T::one().max(direct.sup_norm());
        if difference > allowed {
            return Err(Error::CrossCheckFailed {
                difference: difference.as_f64(),
                allowed: allowed.as_f64(),
            });
        }
        modes.push(reduced);
    }
    ModalSolution::new(data.op().clone(), modes)
}

/// The measured trace `g = (u, φ)`: the coefficient along the measurement
/// eigenvector.
pub fn measure<T: Scalar>(sol: &ModalSolution<T>) -> MeasurementTrace<T> {
    MeasurementTrace::sampled(sol.measured_mode().clone())
}

/// The auxiliary trace `g₀ = λ₀₀·g` of the generalized problem in which a
/// second operator shares the measurement eigenvector with eigenvalue
/// `λ₀₀`.
pub fn measure_a0<T: Scalar>(sol: &ModalSolution<T>, lambda00: T) -> MeasurementTrace<T> {
    MeasurementTrace::sampled(sol.measured_mode().scaled(lambda00))
}

/// Max discrete residual of `û″ⱼ − λⱼ·h∗ûⱼ − f̂ⱼ` over all modes and nodes:
/// the universal a-posteriori check for second-order solves.
pub fn residual_ivp2<T: Scalar>(
    sol: &ModalSolution<T>,
    h: &Kernel<T>,
    data: &ModalProblemData<T>,
) -> Result<T> {
    let mut worst = T::zero();
    for j in 0..sol.op().modes() {
        let u = sol.mode(j);
        let second = differentiate(u, DerivOrder::Second)?;
        let mem = convolve(h.samples(), u)?.scaled(sol.op().eigenvalue(j));
        let residual = second.sub(&mem)?.sub(&data.forcing()[j])?;
        worst = worst.max(residual.sup_norm());
    }
    Ok(worst)
}

/// First-order counterpart: max residual of `û′ⱼ − λⱼ·l∗ûⱼ − f̂ⱼ`.
pub fn residual_ivp1<T: Scalar>(
    sol: &ModalSolution<T>,
    l: &Kernel<T>,
    data: &ModalProblemData<T>,
) -> Result<T> {
    let mut worst = T::zero();
    for j in 0..sol.op().modes() {
        let u = sol.mode(j);
        let first = differentiate(u, DerivOrder::First)?;
        let mem = convolve(l.samples(), u)?.scaled(sol.op().eigenvalue(j));
        let residual = first.sub(&mem)?.sub(&data.forcing()[j])?;
        worst = worst.max(residual.sup_norm());
    }
    Ok(worst)
}

/// Max defect of the identity `û″ⱼ(0) = f̂ⱼ(0)`, which exact solutions
/// satisfy automatically; checked a posteriori, never imposed.
pub fn initial_accel_defect<T: Scalar>(
    sol: &ModalSolution<T>,
    data: &ModalProblemData<T>,
) -> Result<T> {
    let mut worst = T::zero();
    for j in 0..sol.op().modes() {
        let second = differentiate(sol.mode(j), DerivOrder::Second)?;
        worst = worst.max((second.first() - data.forcing()[j].first()).abs());
    }
    Ok(worst)
}
