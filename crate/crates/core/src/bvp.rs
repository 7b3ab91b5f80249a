//! Modal two-point problems.
//!
//! Second order: `û″ = λ·h∗û + f̂` with `û(0) = u₀`, `û(T) = u₂`. The trace
//! is reconstructed through the resolvent kernel,
//! `û = u₀ + t·c + f̃ + λ[k∗(u₀ + f̃)] + λ·c·(k∗s)`, where the unknown
//! initial slope `c` is fixed by the terminal condition; the mode is
//! solvable iff the denominator `T + λ∫₀ᵀ k(T−s)s ds` stays away from zero.
//!
//! First order: `û′ = λ·l∗û + f̂` with `û′(0) = f̂(0)` implicit and
//! `û(T) = u₂`; the unknown is the initial value `c = û(0)` and the
//! denominator becomes `1 + λ∫₀ᵀ k`.
//!
//! Positivity of the kernel makes every mode solvable: the resolvent kernel
//! is then nonnegative, so both denominators are bounded below by `T`
//! (resp. 1).

use serde::Serialize;

use crate::direct::{MeasurementTrace, ModalSolution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::ModalProblemData;
use crate::timegrid::{convolve, lift1, DerivOrder, GridFunction};
use crate::volterra::{bound_m, resolvent, Kernel};

/// Default relative tolerance deciding when a denominator counts as zero.
pub const DEFAULT_DENOMINATOR_TOL: f64 = 1e-10;

const L0_TOLERANCE: f64 = 1e-10;

/// Solvability classification of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeStatus {
    /// Denominator away from zero: unique solution.
    Unique,
    /// Denominator and numerator both vanish: a one-parameter family; the
    /// `c = 0` representative is returned.
    Nonunique,
    /// Denominator vanishes, numerator does not: no solution.
    Unsolvable,
}

/// Per-mode solvability report.
#[derive(Debug, Clone, Serialize)]
pub struct BvpModeReport<T: Scalar> {
    pub mode: usize,
    pub denominator: T,
    pub numerator: T,
    /// Recovered `û′(0)` (second order) or `û(0)` (first order);
    /// 0 for the nonunique representative.
    pub c: T,
    pub status: ModeStatus,
}

/// Trace plus report of one mode; the trace is absent only for unsolvable
/// modes.
#[derive(Debug, Clone)]
pub struct BvpModeOutcome<T: Scalar> {
    pub trace: Option<GridFunction<T>>,
    pub report: BvpModeReport<T>,
}

fn classify<T: Scalar>(
    denominator: T,
    numerator: T,
    den_scale: T,
    num_scale: T,
    tol: T,
) -> (ModeStatus, T) {
    if denominator.abs() > tol * den_scale {
        (ModeStatus::Unique, numerator / denominator)
    } else if numerator.abs() <= tol * num_scale {
        (ModeStatus::Nonunique, T::zero())
    } else {
        (ModeStatus::Unsolvable, T::zero())
    }
}

/// One second-order mode with `û(0) = u0`, `û(T) = u2`.
pub fn solve_mode_bvp2<T: Scalar>(
    lambda: T,
    h: &Kernel<T>,
    u0: T,
    u2: T,
    f: &GridFunction<T>,
    tol: T,
) -> Result<BvpModeOutcome<T>> {
    h.grid().check_same(f.grid())?;
    let grid = *f.grid();
    let horizon = grid.horizon();

    let rk = resolvent(&h.lift(), lambda);
    let k = rk.kernel();
    let f_lift = lift1(f);
    let k_ramp = convolve(k, &GridFunction::ramp(grid))?;
    let base = f_lift.map(|v| v + u0);
    let k_base = convolve(k, &base)?;

    let denominator = horizon + lambda * k_ramp.last();
    let numerator = u2 - u0 - f_lift.last() - lambda * k_base.last();

    let k_abs_int = k.abs().integral();
    let den_scale = horizon.max(lambda.abs() * k_abs_int * horizon);
    let amplification = T::one() + lambda.abs() * k_abs_int;
    let num_scale = T::one().max(u2.abs() + amplification * (u0.abs() + f_lift.sup_norm()));

    let (status, c) = classify(denominator, numerator, den_scale, num_scale, tol);
    let trace = match status {
        ModeStatus::Unsolvable => None,
        _ => {
            let values = grid
                .nodes()
                .enumerate()
                .map(|(n, t)| {
                    u0 + c * t + f_lift.value(n) + lambda * (k_base.value(n) + c * k_ramp.value(n))
                })
                .collect();
            Some(GridFunction::from_values(grid, values)?)
        }
    };
    Ok(BvpModeOutcome {
        trace,
        report: BvpModeReport {
            mode: 0,
            denominator,
            numerator,
            c,
            status,
        },
    })
}

/// One first-order mode with `û(T) = u2` and `l(0) = 0`.
pub fn solve_mode_bvp1<T: Scalar>(
    lambda: T,
    l: &Kernel<T>,
    f: &GridFunction<T>,
    u2: T,
    tol: T,
) -> Result<BvpModeOutcome<T>> {
    l.grid().check_same(f.grid())?;
    if l.at_zero().abs() > T::of(L0_TOLERANCE) {
        return Err(Error::KernelNonzeroAtZero {
            value: l.at_zero().as_f64(),
        });
    }
    let grid = *f.grid();

    // The lifted kernel of the reduced problem is the running integral of l.
    let rk = resolvent(&l.cumulative_integral(), lambda);
    let k = rk.kernel();
    let f_int = f.cumulative_integral();
    let k_one = convolve(k, &GridFunction::constant(grid, T::one()))?;
    let k_fint = convolve(k, &f_int)?;

    let denominator = T::one() + lambda * k_one.last();
    let numerator = u2 - f_int.last() - lambda * k_fint.last();

    let k_abs_int = k.abs().integral();
    let den_scale = T::one().max(lambda.abs() * k_abs_int);
    let amplification = T::one() + lambda.abs() * k_abs_int;
    let num_scale = T::one().max(u2.abs() + amplification * f_int.sup_norm());

    let (status, c) = classify(denominator, numerator, den_scale, num_scale, tol);
    let trace = match status {
        ModeStatus::Unsolvable => None,
        _ => {
            let values = (0..grid.len())
                .map(|n| c + f_int.value(n) + lambda * (c * k_one.value(n) + k_fint.value(n)))
                .collect();
            Some(GridFunction::from_values(grid, values)?)
        }
    };
    Ok(BvpModeOutcome {
        trace,
        report: BvpModeReport {
            mode: 0,
            denominator,
            numerator,
            c,
            status,
        },
    })
}

fn aggregate<T: Scalar>(
    data: &ModalProblemData<T>,
    outcomes: Vec<BvpModeOutcome<T>>,
) -> Result<(ModalSolution<T>, Vec<BvpModeReport<T>>)> {
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut unsolvable = Vec::new();
    for (j, outcome) in outcomes.into_iter().enumerate() {
        let mut report = outcome.report;
        report.mode = j;
        if report.status == ModeStatus::Unsolvable {
            unsolvable.push(j);
        } else {
            traces.push(outcome.trace.expect("solvable mode has a trace"));
        }
        reports.push(report);
    }
    if let Some(&first) = unsolvable.first() {
        let r = &reports[first];
        return Err(Error::UnsolvableModes {
            modes: unsolvable.clone(),
            denominator: r.denominator.as_f64(),
            numerator: r.numerator.as_f64(),
        });
    }
    Ok((ModalSolution::new(data.op().clone(), traces)?, reports))
}

/// Full second-order mixed problem; fails only when a mode is unsolvable.
pub fn solve_bvp2<T: Scalar>(
    data: &ModalProblemData<T>,
    h: &Kernel<T>,
    tol: T,
) -> Result<(ModalSolution<T>, Vec<BvpModeReport<T>>)> {
    let mut outcomes = Vec::with_capacity(data.modes());
    for j in 0..data.modes() {
        outcomes.push(solve_mode_bvp2(
            data.op().eigenvalue(j),
            h,
            data.u0()[j],
            data.u2()[j],
            &data.forcing()[j],
            tol,
        )?);
    }
    aggregate(data, outcomes)
}

/// Full first-order mixed problem.
pub fn solve_bvp1<T: Scalar>(
    data: &ModalProblemData<T>,
    l: &Kernel<T>,
    tol: T,
) -> Result<(ModalSolution<T>, Vec<BvpModeReport<T>>)> {
    let mut outcomes = Vec::with_capacity(data.modes());
    for j in 0..data.modes() {
        outcomes.push(solve_mode_bvp1(
            data.op().eigenvalue(j),
            l,
            &data.forcing()[j],
            data.u2()[j],
            tol,
        )?);
    }
    aggregate(data, outcomes)
}

/// Node-by-node verdicts of the data sign conditions that guarantee
/// solvability of every mode.
#[derive(Debug, Clone, Serialize)]
pub struct SignConditionReport<T: Scalar> {
    pub g_at_zero: T,
    /// `g(0)·g′(t) < 0` per node.
    pub first: Vec<bool>,
    /// Positivity of the order-specific bracket per node.
    pub second: Vec<bool>,
}

impl<T: Scalar> SignConditionReport<T> {
    pub fn first_holds(&self) -> bool {
        self.first.iter().all(|&b| b)
    }

    pub fn second_holds(&self) -> bool {
        self.second.iter().all(|&b| b)
    }

    pub fn all_hold(&self) -> bool {
        self.first_holds() && self.second_holds()
    }
}

/// Second-order sign conditions:
/// `g(0)g′(t) < 0` and `λ₀g(0)·[g‴(t) − λ₀g′(t) − (f′(t),φ)] > 0`.
///
/// `fphi` is the derivative trace `(f′(t), φ)`. Strict inequalities; both
/// are sufficient, not necessary, so a failed node is a verdict, not an
/// error.
pub fn check_sign_conditions2<T: Scalar>(
    g: &MeasurementTrace<T>,
    fphi: &GridFunction<T>,
    lambda0: T,
) -> Result<SignConditionReport<T>> {
    g.grid().check_same(fphi.grid())?;
    let g0 = g.g().first();
    let (g1, _) = g.derivative(DerivOrder::First)?;
    let (g3, _) = g.derivative(DerivOrder::Third)?;
    let first = g1.values().iter().map(|&d| g0 * d < T::zero()).collect();
    let second = (0..g.grid().len())
        .map(|n| {
            let bracket = g3.value(n) - lambda0 * g1.value(n) - fphi.value(n);
            lambda0 * g0 * bracket > T::zero()
        })
        .collect();
    Ok(SignConditionReport {
        g_at_zero: g0,
        first,
        second,
    })
}

/// First-order sign conditions:
/// `g(0)g′(t) < 0` and `λ₀g(0)·[g″(t) − (f′(t),φ)] > 0`.
pub fn check_sign_conditions1<T: Scalar>(
    g: &MeasurementTrace<T>,
    fphi: &GridFunction<T>,
    lambda0: T,
) -> Result<SignConditionReport<T>> {
    g.grid().check_same(fphi.grid())?;
    let g0 = g.g().first();
    let (g1, _) = g.derivative(DerivOrder::First)?;
    let (g2, _) = g.derivative(DerivOrder::Second)?;
    let first = g1.values().iter().map(|&d| g0 * d < T::zero()).collect();
    let second = (0..g.grid().len())
        .map(|n| lambda0 * g0 * (g2.value(n) - fphi.value(n)) > T::zero())
        .collect();
    Ok(SignConditionReport {
        g_at_zero: g0,
        first,
        second,
    })
}

/// Which evolution equation a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemOrder {
    FirstOrder,
    SecondOrder,
}

/// Summability diagnostic of the modal series: the solution series converges
/// when `Σ_j L_j λ_j³ exp(2λ_j M T)` does.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport<T: Scalar> {
    /// Growth constant `M = T·∫₀ᵀ|h|`.
    pub m: T,
    /// Data weights `L_j`.
    pub l: Vec<T>,
    /// Series terms `L_j·λ_j³·exp(2λ_j M T)`.
    pub terms: Vec<T>,
    /// Partial sums in ascending mode order.
    pub partial_sums: Vec<T>,
    pub tail_sum: T,
    /// True when the terms are still growing at the largest retained mode.
    pub growing: bool,
}

/// Evaluates the convergence diagnostic for the given data and kernel.
///
/// The weight is `L_j = |û₀ⱼ|² + T²|cⱼ|² + sup|f̃ⱼ|²` for the second-order
/// problem (with `cⱼ` read from the `u1` slot) and
/// `L_j = |û₂ⱼ|² + |cⱼ|² + sup|f̃ⱼ|²` for the first-order one (with `cⱼ`
/// read from the `u0` slot, where the recovered initial value lives).
pub fn convergence_diagnostic<T: Scalar>(
    data: &ModalProblemData<T>,
    h: &Kernel<T>,
    which: ProblemOrder,
) -> Result<ConvergenceReport<T>> {
    h.grid().check_same(data.grid())?;
    let horizon = data.grid().horizon();
    let m = bound_m(h.samples());
    let mut l = Vec::with_capacity(data.modes());
    for j in 0..data.modes() {
        let f_lift_sup = lift1(&data.forcing()[j]).sup_norm();
        let weight = match which {
            ProblemOrder::SecondOrder => {
                let c = data.u1()[j];
                data.u0()[j].powi(2) + horizon * horizon * c * c + f_lift_sup * f_lift_sup
            }
            ProblemOrder::FirstOrder => {
                let c = data.u0()[j];
                data.u2()[j].powi(2) + c * c + f_lift_sup * f_lift_sup
            }
        };
        l.push(weight);
    }
    let mut terms = Vec::with_capacity(l.len());
    let mut partial_sums = Vec::with_capacity(l.len());
    let mut tail_sum = T::zero();
    for (j, &weight) in l.iter().enumerate() {
        let lambda = data.op().eigenvalue(j);
        let term = if weight == T::zero() {
            T::zero()
        } else {
            weight * lambda.powi(3) * (T::two() * lambda * m * horizon).exp()
        };
        tail_sum += term;
        terms.push(term);
        partial_sums.push(tail_sum);
    }
    let growing = terms.len() >= 2 && {
        let last = terms[terms.len() - 1];
        last > terms[terms.len() - 2] && last > T::zero()
    };
    Ok(ConvergenceReport {
        m,
        l,
        terms,
        partial_sums,
        tail_sum,
        growing,
    })
}

/// Checks the a-priori bound
/// `sup_t |ûⱼ(t)|² ≤ 6·L_j·[1 + 0.5·M·T·λⱼ·exp(2λⱼMT)]`
/// for a second-order solution against a matching [`ConvergenceReport`].
pub fn check_u_bound<T: Scalar>(sol: &ModalSolution<T>, report: &ConvergenceReport<T>) -> bool {
    let horizon = sol.grid().horizon();
    let relax = T::one() + T::of(1e-8);
    sol.modes().iter().enumerate().all(|(j, mode)| {
        let weight = report.l[j];
        let sup_sq = mode.sup_norm().powi(2);
        if weight == T::zero() {
            return sup_sq == T::zero();
        }
        let lambda = sol.op().eigenvalue(j);
        let bracket = T::one()
            + T::half()
                * report.m
                * horizon
                * lambda
                * (T::two() * lambda * report.m * horizon).exp();
        sup_sq <= T::of(6.0) * weight * bracket * relax
    })
}
