//! Recovery of the memory kernel from the measured trace.
//!
//! Multiplying the second-order equation by the measurement functional turns
//! it into the scalar identity `g″ − λ₀·h∗g = ψ` with `ψ = (f(t), φ)`, i.e.
//! a first-kind Volterra equation `h∗g = p`, `p = (g″ − ψ)/λ₀`, for the
//! unknown kernel. Differentiating once more gives the second-kind equation
//!
//! `g(0)·h(t) + ∫₀ᵗ g′(t−s) h(s) ds = p′(t)`,
//!
//! which marches as long as `g(0) ≠ 0`. The first-order equation yields the
//! analogous pair `g∗l = w`, `w = (g′ − ψ)/λ₀`, and
//! `g(0)·l + g′∗l = w′`. An alternative route solves the first-kind
//! equation for the lift `h⁽¹⁾` and differentiates twice; it loses one
//! order of accuracy and serves as an independent cross-check.

use serde::Serialize;

use crate::direct::{DerivativeSource, MeasurementTrace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::ModalProblemData;
use crate::timegrid::{convolve, differentiate, lift1, DerivOrder, GridFunction};
use crate::volterra::{solve_first_kind, solve_second_kind, Kernel};

/// Relative cutoff for `|g(0)|`, below which the data are degenerate.
const G0_CUTOFF: f64 = 1e-10;

/// Compatibility tolerance in units of `Δt²` (relative to the data scale).
const COMPAT_TOL_FACTOR: f64 = 100.0;

/// Everything the identification step consumes.
#[derive(Debug, Clone)]
pub struct IdentificationInput<T: Scalar> {
    g: MeasurementTrace<T>,
    psi: GridFunction<T>,
    psi_deriv: Option<GridFunction<T>>,
    lambda0: T,
    g0: Option<GridFunction<T>>,
    lambda00: Option<T>,
    fprime0phi: T,
}

impl<T: Scalar> IdentificationInput<T> {
    /// Measurement trace `g`, forcing trace `ψ = (f(t),φ)` and the nonzero
    /// measurement eigenvalue `λ₀`.
    pub fn new(g: MeasurementTrace<T>, psi: GridFunction<T>, lambda0: T) -> Result<Self> {
        g.grid().check_same(psi.grid())?;
        if lambda0 == T::zero() {
            return Err(Error::ZeroMeasurementEigenvalue);
        }
        Ok(Self {
            g,
            psi,
            psi_deriv: None,
            lambda0,
            g0: None,
            lambda00: None,
            fprime0phi: T::zero(),
        })
    }

    /// Attach the analytic derivative `ψ′`.
    pub fn with_psi_deriv(mut self, psi_deriv: GridFunction<T>) -> Result<Self> {
        self.g.grid().check_same(psi_deriv.grid())?;
        self.psi_deriv = Some(psi_deriv);
        Ok(self)
    }

    /// Attach the auxiliary trace `g₀ = (u, A₀*φ)` of the generalized
    /// problem.
    pub fn with_g0(mut self, g0: GridFunction<T>) -> Result<Self> {
        self.g.grid().check_same(g0.grid())?;
        self.g0 = Some(g0);
        Ok(self)
    }

    /// When the second operator shares the measurement eigenvector,
    /// `g₀ = λ₀₀·g` and the samples need not be supplied.
    pub fn with_lambda00(mut self, lambda00: T) -> Self {
        self.lambda00 = Some(lambda00);
        self
    }

    /// The scalar `(f′(0), φ)`, used by the initial-value formula for `l`.
    pub fn with_fprime0phi(mut self, fprime0phi: T) -> Self {
        self.fprime0phi = fprime0phi;
        self
    }

    pub fn g(&self) -> &MeasurementTrace<T> {
        &self.g
    }

    pub fn psi(&self) -> &GridFunction<T> {
        &self.psi
    }

    pub fn lambda0(&self) -> T {
        self.lambda0
    }

    pub fn fprime0phi(&self) -> T {
        self.fprime0phi
    }

    /// `g(0)`, or an error when it is too close to zero for the
    /// identification to proceed.
    fn g_at_zero(&self) -> Result<T> {
        let g0 = self.g.g().first();
        if g0.abs() <= T::of(G0_CUTOFF) * T::one().max(self.g.g().sup_norm()) {
            return Err(Error::MeasurementVanishesAtZero { value: g0.as_f64() });
        }
        Ok(g0)
    }

    /// The effective auxiliary trace: explicit samples, or `λ₀₀·g`.
    fn g0_effective(&self) -> Result<GridFunction<T>> {
        if let Some(g0) = &self.g0 {
            return Ok(g0.clone());
        }
        if let Some(lambda00) = self.lambda00 {
            return Ok(self.g.g().scaled(lambda00));
        }
        Err(Error::MissingAuxiliaryTrace)
    }
}

/// A recovered kernel, with the provenance of the derivatives that entered
/// the computation and the residual of the first-kind identity it solves.
#[derive(Debug, Clone)]
pub struct RecoveredKernel<T: Scalar> {
    pub kernel: Kernel<T>,
    pub derivatives_from: DerivativeSource,
    /// Sup-norm residual of the convolution identity
    /// (`h∗g − p`, `q`-variant, or `g∗l − w`).
    pub residual: T,
}

fn combined_source(sources: &[DerivativeSource]) -> DerivativeSource {
    if sources.iter().all(|s| *s == DerivativeSource::Analytic) {
        DerivativeSource::Analytic
    } else {
        DerivativeSource::FiniteDifference
    }
}

/// Recovers `h` from `(g, ψ, λ₀)` for the second-order equation.
fn identify_h_with_offset<T: Scalar>(
    inp: &IdentificationInput<T>,
    offset: Option<&GridFunction<T>>,
) -> Result<RecoveredKernel<T>> {
    let g_zero = inp.g_at_zero()?;
    let (g2, s2) = inp.g().derivative(DerivOrder::Second)?;
    let (g1, s1) = inp.g().derivative(DerivOrder::First)?;

    // p = (g″ − ψ)/λ₀, or q = (g″ − g₀ − ψ)/λ₀ for the generalized problem.
    let mut numerator = g2.sub(inp.psi())?;
    if let Some(g0) = offset {
        numerator = numerator.sub(g0)?;
    }
    let p = numerator.scaled(inp.lambda0().recip());

    // p′ analytically when g‴, ψ′ (and λ₀₀-shaped g₀′) are available,
    // otherwise by differentiating the samples of p.
    let analytic_offset_deriv = match (offset, inp.lambda00, inp.g0.is_some()) {
        (None, _, _) => Some(None),
        (Some(_), Some(l00), false) => Some(Some(l00)),
        _ => None,
    };
    let mut sources = vec![s1, s2];
    let p_deriv = match (&inp.psi_deriv, analytic_offset_deriv) {
        (Some(psi_deriv), Some(offset_scale)) if inp.g().derivative(DerivOrder::Third).is_ok() => {
            let (g3, s3) = inp.g().derivative(DerivOrder::Third)?;
            if s3 == DerivativeSource::Analytic {
                sources.push(DerivativeSource::Analytic);
                let mut d = g3.sub(psi_deriv)?;
                if let Some(l00) = offset_scale {
                    let (g1a, s1a) = inp.g().derivative(DerivOrder::First)?;
                    sources.push(s1a);
                    d = d.sub(&g1a.scaled(l00))?;
                }
                d.scaled(inp.lambda0().recip())
            } else {
                sources.push(DerivativeSource::FiniteDifference);
                differentiate(&p, DerivOrder::First)?
            }
        }
        _ => {
            sources.push(DerivativeSource::FiniteDifference);
            differentiate(&p, DerivOrder::First)?
        }
    };

    let h = solve_second_kind(g_zero, &g1, &p_deriv)?;
    let residual = convolve(&h, inp.g().g())?.max_difference(&p)?;
    Ok(RecoveredKernel {
        kernel: Kernel::new(h),
        derivatives_from: combined_source(&sources),
        residual,
    })
}

/// Recovers the second-order kernel `h` from the measurement data.
pub fn identify_h<T: Scalar>(inp: &IdentificationInput<T>) -> Result<RecoveredKernel<T>> {
    identify_h_with_offset(inp, None)
}

/// Recovers `h` for the generalized equation carrying a second operator
/// term; the auxiliary trace `g₀` (or the shared eigenvalue `λ₀₀`) enters
/// the data.
pub fn identify_h_ip0<T: Scalar>(inp: &IdentificationInput<T>) -> Result<RecoveredKernel<T>> {
    let g0 = inp.g0_effective()?;
    identify_h_with_offset(inp, Some(&g0))
}

/// Recovers `h` through the first-kind route: solve `g∗h⁽¹⁾ = rhs` for the
/// lift and differentiate twice. One order of accuracy is lost; useful as an
/// independent cross-check of [`identify_h`].
pub fn identify_h_firstkind<T: Scalar>(inp: &IdentificationInput<T>) -> Result<RecoveredKernel<T>> {
    let g_zero = inp.g_at_zero()?;
    let (g1, s1) = inp.g().derivative(DerivOrder::First)?;
    let g_slope = g1.first();
    let psi_lift = lift1(inp.psi());
    let grid = *inp.g().grid();
    let inv_lambda = inp.lambda0().recip();
    let g_values = inp.g().g();
    let rhs_values: Vec<T> = grid
        .nodes()
        .enumerate()
        .map(|(n, t)| (g_values.value(n) - g_zero - t * g_slope - psi_lift.value(n)) * inv_lambda)
        .collect();
    let rhs = GridFunction::from_values(grid, rhs_values)?;

    let h_lift = solve_first_kind(g_values, &rhs)?;
    let residual = convolve(g_values, &h_lift)?.max_difference(&rhs)?;
    let h = differentiate(&h_lift, DerivOrder::Second)?;
    Ok(RecoveredKernel {
        kernel: Kernel::new(h),
        derivatives_from: combined_source(&[s1, DerivativeSource::FiniteDifference]),
        residual,
    })
}

/// Recovers the first-order kernel `l` from `(g, ψ, λ₀)`.
pub fn identify_l<T: Scalar>(inp: &IdentificationInput<T>) -> Result<RecoveredKernel<T>> {
    let g_zero = inp.g_at_zero()?;
    let (g1, s1) = inp.g().derivative(DerivOrder::First)?;
    let w = g1.sub(inp.psi())?.scaled(inp.lambda0().recip());

    let mut sources = vec![s1];
    let w_deriv = match &inp.psi_deriv {
        Some(psi_deriv) => {
            let (g2, s2) = inp.g().derivative(DerivOrder::Second)?;
            if s2 == DerivativeSource::Analytic {
                sources.push(s2);
                g2.sub(psi_deriv)?.scaled(inp.lambda0().recip())
            } else {
                sources.push(DerivativeSource::FiniteDifference);
                differentiate(&w, DerivOrder::First)?
            }
        }
        None => {
            sources.push(DerivativeSource::FiniteDifference);
            differentiate(&w, DerivOrder::First)?
        }
    };

    let l = solve_second_kind(g_zero, &g1, &w_deriv)?;
    let residual = convolve(&l, inp.g().g())?.max_difference(&w)?;
    Ok(RecoveredKernel {
        kernel: Kernel::new(l),
        derivatives_from: combined_source(&sources),
        residual,
    })
}

/// The initial value the recovered first-order kernel must take:
/// `l(0) = (g″(0) − (f′(0),φ)) / (g(0)·λ₀)`.
pub fn l0_from_data<T: Scalar>(inp: &IdentificationInput<T>) -> Result<T> {
    let g_zero = inp.g_at_zero()?;
    let (g2, _) = inp.g().derivative(DerivOrder::Second)?;
    Ok((g2.first() - inp.fprime0phi()) / (g_zero * inp.lambda0()))
}

/// Which data contract a compatibility check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompatibilityMode {
    /// Cauchy data of the second-order problem.
    SecondOrder,
    /// Cauchy data of the first-order problem.
    FirstOrder,
    /// Terminal-value data of the first-order mixed problem.
    BvpFirstOrder,
}

/// Flavor of an individual compatibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `|expected − actual| ≤ tolerance` must hold.
    Equality,
    /// `|actual|` must exceed the tolerance (a nondegeneracy requirement).
    NonDegeneracy,
}

/// One evaluated compatibility condition.
#[derive(Debug, Clone, Serialize)]
pub struct CompatCheck<T: Scalar> {
    pub name: &'static str,
    pub expected: T,
    pub actual: T,
    pub tolerance: T,
    pub kind: CheckKind,
    pub pass: bool,
}

impl<T: Scalar> CompatCheck<T> {
    pub fn defect(&self) -> T {
        (self.expected - self.actual).abs()
    }

    fn equality(name: &'static str, expected: T, actual: T, tolerance: T) -> Self {
        Self {
            name,
            expected,
            actual,
            tolerance,
            kind: CheckKind::Equality,
            pass: (expected - actual).abs() <= tolerance,
        }
    }

    fn nondegeneracy(name: &'static str, actual: T, tolerance: T) -> Self {
        Self {
            name,
            expected: T::zero(),
            actual,
            tolerance,
            kind: CheckKind::NonDegeneracy,
            pass: actual.abs() > tolerance,
        }
    }
}

/// The full set of compatibility verdicts for one data configuration.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport<T: Scalar> {
    pub checks: Vec<CompatCheck<T>>,
}

impl<T: Scalar> CompatibilityReport<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CompatCheck<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates the compatibility conditions exact data necessarily satisfy.
///
/// Finite-difference derivative traces make the equalities hold only up to
/// O(Δt²); the tolerance scales accordingly, so a genuine data defect well
/// above discretization level is always flagged.
pub fn check_compatibility<T: Scalar>(
    inp: &IdentificationInput<T>,
    modal: &ModalProblemData<T>,
    mode: CompatibilityMode,
) -> Result<CompatibilityReport<T>> {
    inp.g().grid().check_same(modal.grid())?;
    let dt = modal.grid().dt();
    let scale = T::one().max(inp.g().g().sup_norm());
    let tol = T::of(COMPAT_TOL_FACTOR) * dt * dt * scale;

    let g_zero = inp.g().g().first();
    let mut checks = Vec::new();
    match mode {
        CompatibilityMode::SecondOrder => {
            let (g1, _) = inp.g().derivative(DerivOrder::First)?;
            let (g2, _) = inp.g().derivative(DerivOrder::Second)?;
            checks.push(CompatCheck::equality(
                "g(0) = (u0, phi)",
                modal.measured_u0(),
                g_zero,
                tol,
            ));
            checks.push(CompatCheck::equality(
                "g'(0) = (u1, phi)",
                modal.measured_u1(),
                g1.first(),
                tol,
            ));
            checks.push(CompatCheck::equality(
                "g''(0) = (f(0), phi)",
                modal.measured_forcing().first(),
                g2.first(),
                tol,
            ));
        }
        CompatibilityMode::FirstOrder => {
            let (g1, _) = inp.g().derivative(DerivOrder::First)?;
            checks.push(CompatCheck::equality(
                "g(0) = (u0, phi)",
                modal.measured_u0(),
                g_zero,
                tol,
            ));
            checks.push(CompatCheck::equality(
                "g'(0) = (f(0), phi)",
                modal.measured_forcing().first(),
                g1.first(),
                tol,
            ));
        }
        CompatibilityMode::BvpFirstOrder => {
            let (g1, _) = inp.g().derivative(DerivOrder::First)?;
            let (g2, _) = inp.g().derivative(DerivOrder::Second)?;
            checks.push(CompatCheck::equality(
                "g'(0) = (f(0), phi)",
                modal.measured_forcing().first(),
                g1.first(),
                tol,
            ));
            checks.push(CompatCheck::equality(
                "g''(0) - (f'(0), phi) = 0",
                T::zero(),
                g2.first() - inp.fprime0phi(),
                tol,
            ));
            checks.push(CompatCheck::equality(
                "g(T) = (u2, phi)",
                modal.measured_u2(),
                inp.g().g().last(),
                tol,
            ));
            checks.push(CompatCheck::nondegeneracy("g(0) != 0", g_zero, tol));
        }
    }
    Ok(CompatibilityReport { checks })
}
