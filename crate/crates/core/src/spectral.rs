//! Finite spectral realization of the self-adjoint operator `A`.
//!
//! The operator is carried as an ordered list of eigenvalues; data and
//! solutions live in the span of the corresponding eigenvectors. One
//! distinguished mode plays the measurement functional `φ`, so the measured
//! trace is simply that mode's coefficient. For the concrete 1-D example the
//! eigenbasis is the Dirichlet Laplacian on `(0,1)`:
//! `λ_j = (jπ)²`, `φ_j(x) = √2·sin(jπx)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::timegrid::{GridFunction, TimeGrid};

/// Spatial eigenbasis descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialBasis {
    /// Eigenfunctions of `−d²/dx²` on `(0,1)` with zero boundary values.
    DirichletLaplacian1d,
}

/// A self-adjoint operator truncated to finitely many eigenmodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator<T: Scalar> {
    eigenvalues: Vec<T>,
    spatial_basis: Option<SpatialBasis>,
    /// 0-based index of the eigenvector playing the measurement functional.
    measure_index: usize,
}

impl<T: Scalar> SpectralOperator<T> {
    /// Wraps an explicit nondecreasing eigenvalue list; the mode at
    /// `measure_index` (0-based) carries the measurement functional and must
    /// have a nonzero eigenvalue.
    pub fn new(eigenvalues: Vec<T>, measure_index: usize) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::LengthMismatch {
                what: "eigenvalue list",
                expected: 1,
                got: 0,
            });
        }
        for (i, pair) in eigenvalues.windows(2).enumerate() {
            if pair[0] > pair[1] {
                return Err(Error::EigenvaluesNotSorted { index: i + 1 });
            }
        }
        if measure_index >= eigenvalues.len() {
            return Err(Error::MeasureIndexOutOfRange {
                index: measure_index,
                modes: eigenvalues.len(),
            });
        }
        if eigenvalues[measure_index] == T::zero() {
            return Err(Error::ZeroMeasurementEigenvalue);
        }
        Ok(Self {
            eigenvalues,
            spatial_basis: None,
            measure_index,
        })
    }

    /// The first `modes` eigenpairs of the Dirichlet Laplacian on `(0,1)`,
    /// measuring along the first eigenfunction.
    pub fn dirichlet_laplacian_1d(modes: usize) -> Self {
        assert!(modes >= 1, "need at least one mode");
        let pi = T::PI();
        let eigenvalues = (1..=modes)
            .map(|j| {
                let jpi = T::from_usize(j).unwrap() * pi;
                jpi * jpi
            })
            .collect();
        Self {
            eigenvalues,
            spatial_basis: Some(SpatialBasis::DirichletLaplacian1d),
            measure_index: 0,
        }
    }

    /// Same operator, measuring along a different eigenvector.
    pub fn with_measure_index(mut self, measure_index: usize) -> Result<Self> {
        if measure_index >= self.eigenvalues.len() {
            return Err(Error::MeasureIndexOutOfRange {
                index: measure_index,
                modes: self.eigenvalues.len(),
            });
        }
        if self.eigenvalues[measure_index] == T::zero() {
            return Err(Error::ZeroMeasurementEigenvalue);
        }
        self.measure_index = measure_index;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> T {
        self.eigenvalues[j]
    }

    pub fn measure_index(&self) -> usize {
        self.measure_index
    }

    /// The eigenvalue `λ₀` of the measurement mode.
    pub fn measured_eigenvalue(&self) -> T {
        self.eigenvalues[self.measure_index]
    }

    pub fn spatial_basis(&self) -> Option<SpatialBasis> {
        self.spatial_basis
    }

    pub fn all_eigenvalues_positive(&self) -> bool {
        self.eigenvalues.iter().all(|&l| l > T::zero())
    }

    /// Eigenfunction value `φ_j(x)` (0-based `j`); needs a spatial basis.
    pub fn eigenfunction(&self, j: usize, x: T) -> Result<T> {
        match self.spatial_basis {
            Some(SpatialBasis::DirichletLaplacian1d) => {
                let jpi = T::from_usize(j + 1).unwrap() * T::PI();
                Ok(T::two().sqrt() * (jpi * x).sin())
            }
            None => Err(Error::MissingSpatialBasis),
        }
    }
}

/// Uniform spatial sample grid on `[0,1]`, endpoints included.
pub fn spatial_nodes<T: Scalar>(points: usize) -> Vec<T> {
    assert!(points >= 2);
    let last = T::from_usize(points - 1).unwrap();
    (0..points)
        .map(|i| T::from_usize(i).unwrap() / last)
        .collect()
}

/// Coefficients `(v, φ_j)` of spatial samples by trapezoidal quadrature.
///
/// `values` must sample a uniform grid on `[0,1]` including both endpoints,
/// with at least `8·J` points.
pub fn project<T: Scalar>(values: &[T], op: &SpectralOperator<T>) -> Result<Vec<T>> {
    if op.spatial_basis().is_none() {
        return Err(Error::MissingSpatialBasis);
    }
    let required = 8 * op.modes();
    if values.len() < required {
        return Err(Error::UnderResolvedSpatialGrid {
            points: values.len(),
            modes: op.modes(),
            required,
        });
    }
    let nodes = spatial_nodes::<T>(values.len());
    let dx = T::one() / T::from_usize(values.len() - 1).unwrap();
    let mut coeffs = Vec::with_capacity(op.modes());
    for j in 0..op.modes() {
        let mut acc = T::zero();
        for (i, (&x, &v)) in nodes.iter().zip(values).enumerate() {
            let w = if i == 0 || i == values.len() - 1 {
                T::half()
            } else {
                T::one()
            };
            acc += w * v * op.eigenfunction(j, x)?;
        }
        coeffs.push(acc * dx);
    }
    Ok(coeffs)
}

/// Field `Σ_j coeffs_j φ_j(x)` at the given spatial points.
pub fn synthesize<T: Scalar>(
    coeffs: &[T],
    op: &SpectralOperator<T>,
    points: &[T],
) -> Result<Vec<T>> {
    if op.spatial_basis().is_none() {
        return Err(Error::MissingSpatialBasis);
    }
    if coeffs.len() != op.modes() {
        return Err(Error::LengthMismatch {
            what: "coefficient list",
            expected: op.modes(),
            got: coeffs.len(),
        });
    }
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let mut acc = T::zero();
        for (j, &c) in coeffs.iter().enumerate() {
            acc += c * op.eigenfunction(j, x)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Zeroes every coefficient past the first `keep` ones: the spectral
/// projection applied to (possibly noisy) modal data.
pub fn truncate_noisy<T: Scalar>(coeffs: &[T], keep: usize) -> Result<Vec<T>> {
    if keep > coeffs.len() {
        return Err(Error::TruncationOutOfRange {
            requested: keep,
            available: coeffs.len(),
        });
    }
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| if i < keep { c } else { T::zero() })
        .collect())
}

/// Modal data of a Cauchy or two-point problem: initial/terminal
/// coefficients and one forcing trace per mode, all on one grid.
#[derive(Debug, Clone)]
pub struct ModalProblemData<T: Scalar> {
    op: SpectralOperator<T>,
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    forcing: Vec<GridFunction<T>>,
}

impl<T: Scalar> ModalProblemData<T> {
    pub fn new(
        op: SpectralOperator<T>,
        u0: Vec<T>,
        u1: Vec<T>,
        u2: Vec<T>,
        forcing: Vec<GridFunction<T>>,
    ) -> Result<Self> {
        let modes = op.modes();
        for (what, len) in [
            ("initial coefficients u0", u0.len()),
            ("derivative coefficients u1", u1.len()),
            ("terminal coefficients u2", u2.len()),
            ("forcing traces", forcing.len()),
        ] {
            if len != modes {
                return Err(Error::LengthMismatch {
                    what,
                    expected: modes,
                    got: len,
                });
            }
        }
        let grid = *forcing[0].grid();
        for f in &forcing[1..] {
            grid.check_same(f.grid())?;
        }
        Ok(Self {
            op,
            u0,
            u1,
            u2,
            forcing,
        })
    }

    /// All-zero data on the given grid.
    pub fn zero(op: SpectralOperator<T>, grid: TimeGrid<T>) -> Self {
        let modes = op.modes();
        Self {
            op,
            u0: vec![T::zero(); modes],
            u1: vec![T::zero(); modes],
            u2: vec![T::zero(); modes],
            forcing: vec![GridFunction::zeros(grid); modes],
        }
    }

    pub fn op(&self) -> &SpectralOperator<T> {
        &self.op
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.forcing[0].grid()
    }

    pub fn modes(&self) -> usize {
        self.op.modes()
    }

    pub fn u0(&self) -> &[T] {
        &self.u0
    }

    pub fn u1(&self) -> &[T] {
        &self.u1
    }

    pub fn u2(&self) -> &[T] {
        &self.u2
    }

    pub fn forcing(&self) -> &[GridFunction<T>] {
        &self.forcing
    }

    pub fn set_u0(&mut self, u0: Vec<T>) -> Result<()> {
        if u0.len() != self.modes() {
            return Err(Error::LengthMismatch {
                what: "initial coefficients u0",
                expected: self.modes(),
                got: u0.len(),
            });
        }
        self.u0 = u0;
        Ok(())
    }

    pub fn set_u1(&mut self, u1: Vec<T>) -> Result<()> {
        if u1.len() != self.modes() {
            return Err(Error::LengthMismatch {
                what: "derivative coefficients u1",
                expected: self.modes(),
                got: u1.len(),
            });
        }
        self.u1 = u1;
        Ok(())
    }

    pub fn set_u2(&mut self, u2: Vec<T>) -> Result<()> {
        if u2.len() != self.modes() {
            return Err(Error::LengthMismatch {
                what: "terminal coefficients u2",
                expected: self.modes(),
                got: u2.len(),
            });
        }
        self.u2 = u2;
        Ok(())
    }

    /// Modal coefficient of the measurement functional, `(u0, φ)`.
    pub fn measured_u0(&self) -> T {
        self.u0[self.op.measure_index()]
    }

    pub fn measured_u1(&self) -> T {
        self.u1[self.op.measure_index()]
    }

    pub fn measured_u2(&self) -> T {
        self.u2[self.op.measure_index()]
    }

    /// Forcing trace seen by the measurement functional, `(f(t), φ)`.
    pub fn measured_forcing(&self) -> &GridFunction<T> {
        &self.forcing[self.op.measure_index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_eigenvalues() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(3);
        assert!((op.eigenvalue(0) - PI * PI).abs() <= 1e-12);
        assert!((op.eigenvalue(1) - 4.0 * PI * PI).abs() <= 1e-12);
        assert!((op.eigenvalue(2) - 9.0 * PI * PI).abs() <= 1e-12);
        assert!(op.eigenvalues().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eigenfunctions_are_normalized() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(2);
        let nodes = spatial_nodes::<f64>(1001);
        let dx = 1.0 / 1000.0;
        let mut acc = 0.0;
        for (i, &x) in nodes.iter().enumerate() {
            let w = if i == 0 || i == nodes.len() - 1 {
                0.5
            } else {
                1.0
            };
            let phi = op.eigenfunction(1, x).unwrap();
            acc += w * phi * phi;
        }
        assert!((acc * dx - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn projection_recovers_basis_vectors() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(4);
        let nodes = spatial_nodes::<f64>(2000);
        let samples: Vec<f64> = nodes
            .iter()
            .map(|&x| op.eigenfunction(0, x).unwrap())
            .collect();
        let coeffs = project(&samples, &op).unwrap();
        assert!((coeffs[0] - 1.0).abs() <= 1e-8);
        for &c in &coeffs[1..] {
            assert!(c.abs() <= 1e-8);
        }
        let zeros = vec![0.0; nodes.len()];
        assert!(project(&zeros, &op).unwrap().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn projection_of_parabola_matches_sine_series() {
        // (x(1−x), φ_j) = √2·2(1−(−1)^j)/(jπ)³ in 1-based mode numbering.
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(5);
        let nodes = spatial_nodes::<f64>(2000);
        let samples: Vec<f64> = nodes.iter().map(|&x| x * (1.0 - x)).collect();
        let coeffs = project(&samples, &op).unwrap();
        for (idx, &c) in coeffs.iter().enumerate() {
            let j = (idx + 1) as f64;
            let parity = if (idx + 1) % 2 == 0 { 0.0 } else { 2.0 };
            let exact = 2f64.sqrt() * 2.0 * parity / (j * PI).powi(3);
            assert!((c - exact).abs() <= 1e-6, "mode {idx}: {c} vs {exact}");
        }
    }

    #[test]
    fn project_synthesize_round_trip() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(5);
        let coeffs = [0.7, -0.2, 0.05, 0.4, -0.9];
        let nodes = spatial_nodes::<f64>(2000);
        let field = synthesize(&coeffs, &op, &nodes).unwrap();
        let back = project(&field, &op).unwrap();
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn synthesize_basis_vector() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(3);
        let nodes = spatial_nodes::<f64>(64);
        let field = synthesize(&[1.0, 0.0, 0.0], &op, &nodes).unwrap();
        for (&x, &v) in nodes.iter().zip(&field) {
            assert!((v - op.eigenfunction(0, x).unwrap()).abs() <= 1e-14);
        }
        let zero_field = synthesize(&[0.0, 0.0, 0.0], &op, &nodes).unwrap();
        assert!(zero_field.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orthonormality_gram_matrix() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(8);
        let nodes = spatial_nodes::<f64>(2000);
        for j in 0..8 {
            let samples: Vec<f64> = nodes
                .iter()
                .map(|&x| op.eigenfunction(j, x).unwrap())
                .collect();
            let row = project(&samples, &op).unwrap();
            for (k, &v) in row.iter().enumerate() {
                let expected = if k == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() <= 1e-8, "gram[{j}][{k}] = {v}");
            }
        }
    }

    #[test]
    fn eigen_relation_second_difference() {
        // Discrete −φ_j″ ≈ λ_j φ_j in the interior.
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(3);
        let m = 400;
        let nodes = spatial_nodes::<f64>(m + 1);
        let dx = 1.0 / m as f64;
        for j in 0..3 {
            let phi: Vec<f64> = nodes
                .iter()
                .map(|&x| op.eigenfunction(j, x).unwrap())
                .collect();
            let lambda = op.eigenvalue(j);
            for i in 1..m {
                let second = (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) / (dx * dx);
                let defect = (second + lambda * phi[i]).abs();
                assert!(defect <= lambda * lambda * dx * dx, "mode {j} node {i}");
            }
        }
    }

    #[test]
    fn truncation_contracts_noise() {
        let clean = [1.0, 0.5, 0.25, 0.125];
        let noisy: Vec<f64> = clean.iter().map(|c| c + 1e-3).collect();
        assert_eq!(truncate_noisy(&clean, 4).unwrap(), clean.to_vec());
        assert!(truncate_noisy(&clean, 0).unwrap().iter().all(|&c| c == 0.0));
        let kept = truncate_noisy(&noisy, 2).unwrap();
        let clean_kept = truncate_noisy(&clean, 2).unwrap();
        for (a, b) in kept.iter().zip(&clean_kept) {
            assert!((a - b).abs() <= 1e-3 + 1e-15);
        }
        assert!(matches!(
            truncate_noisy(&clean, 5),
            Err(Error::TruncationOutOfRange { .. })
        ));
    }

    #[test]
    fn under_resolved_projection_is_rejected() {
        let op = SpectralOperator::<f64>::dirichlet_laplacian_1d(4);
        let samples = vec![0.0; 16];
        assert!(matches!(
            project(&samples, &op),
            Err(Error::UnderResolvedSpatialGrid { .. })
        ));
    }

    #[test]
    fn operator_validation() {
        assert!(matches!(
            SpectralOperator::new(vec![2.0, 1.0], 0),
            Err(Error::EigenvaluesNotSorted { .. })
        ));
        assert!(matches!(
            SpectralOperator::new(vec![0.0, 1.0], 0),
            Err(Error::ZeroMeasurementEigenvalue)
        ));
        assert!(SpectralOperator::new(vec![0.0, 1.0], 1).is_ok());
        assert!(matches!(
            SpectralOperator::new(vec![1.0, 2.0], 5),
            Err(Error::MeasureIndexOutOfRange { .. })
        ));
    }
}
