use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{displacement, fock, Operator, SpaceLayout};
use crate::{Error, Result};

const TRACE_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const POSITIVITY_FLOOR: f64 = -1e-9;

/// A normalized, Hermitian, positive-semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity before wrapping `matrix`.
    pub fn new(layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(layout, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix after checking only its dimension.
    pub fn from_matrix_unchecked(layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(DensityMatrix { layout, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = (&self.matrix - self.matrix.adjoint()).norm();
        if herm > HERMITIAN_TOL * self.matrix.norm().max(1.0) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < POSITIVITY_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn pure(layout: SpaceLayout, psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Self::from_matrix_unchecked(layout, &v * v.adjoint())
    }

    /// Diagonal state with the given populations (normalized on construction).
    pub fn diagonal(layout: SpaceLayout, populations: &[f64]) -> Result<Self> {
        let total: f64 = populations.iter().sum();
        if total <= 0.0 || populations.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidState("populations must be non-negative with positive sum".into()));
        }
        let diag = DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p / total, 0.0)),
        );
        Self::from_matrix_unchecked(layout, DMatrix::from_diagonal(&diag))
    }

    pub fn fock_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::LevelOutOfRange { n, dim });
        }
        let layout = SpaceLayout::single(dim, "mode")?;
        let mut pops = vec![0.0; dim];
        pops[n] = 1.0;
        Self::diagonal(layout, &pops)
    }

    /// `D(alpha)|0><0|D^dag(alpha)` using the matrix-exponential displacement.
    pub fn coherent_state(alpha: C64, dim: usize) -> Result<Self> {
        let d = displacement(alpha, dim)?;
        let column = DVector::from_iterator(dim, (0..dim).map(|m| d.matrix().get(m, 0)));
        Self::pure(SpaceLayout::single(dim, "mode")?, &column)
    }

    /// Coherent state from its closed-form Fock amplitudes, renormalized
    /// over the kept levels.
    pub fn coherent_state_closed_form(alpha: C64, dim: usize) -> Result<Self> {
        let amps = fock::coherent_amplitudes(alpha, dim);
        Self::pure(SpaceLayout::single(dim, "mode")?, &DVector::from_vec(amps))
    }

    /// Thermal state `p_n ~ (nbar/(nbar+1))^n`, renormalized over the
    /// truncated space.
    pub fn thermal_state(nbar: f64, dim: usize) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::InvalidParams(format!("thermal occupation {nbar} must be >= 0")));
        }
        let ratio = nbar / (nbar + 1.0);
        let pops: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
        Self::diagonal(SpaceLayout::single(dim, "mode")?, &pops)
    }

    /// Tensor product in the given order; labels are taken from `layout`.
    pub fn product(layout: SpaceLayout, factors: &[&DensityMatrix]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        if dims != layout.dims() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: dims.iter().product() });
        }
        let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for f in factors {
            m = m.kronecker(&f.matrix);
        }
        Self::from_matrix_unchecked(layout, m)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `Tr[A rho]`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.layout().total_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(op.matrix().trace_with(&self.matrix))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Reduced state of subsystem `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix> {
        let dims = self.layout.dims();
        let d = self.layout.dim(keep)?;
        let before: usize = dims[..keep].iter().product();
        let after: usize = dims[keep + 1..].iter().product();
        let mut out = DMatrix::zeros(d, d);
        for b in 0..before {
            for a in 0..after {
                for i in 0..d {
                    let row = (b * d + i) * after + a;
                    for j in 0..d {
                        let col = (b * d + j) * after + a;
                        out[(i, j)] += self.matrix[(row, col)];
                    }
                }
            }
        }
        let layout = SpaceLayout::single(d, &self.layout.labels()[keep])?;
        Self::from_matrix_unchecked(layout, out)
    }

    /// `U rho U^dag`.
    pub fn transform(&self, unitary: &DMatrix<C64>) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: unitary.nrows() });
        }
        Self::from_matrix_unchecked(self.layout.clone(), unitary * &self.matrix * unitary.adjoint())
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(fidelity_dense(&self.matrix, &other.matrix))
    }

    /// Projects onto the nearest unit-trace state by clipping negative
    /// eigenvalues and renormalizing.
    pub fn project_physical(layout: SpaceLayout, matrix: &DMatrix<C64>) -> Result<Self> {
        let herm = (matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("no positive spectral weight to project".into()));
        }
        let diag = DVector::from_iterator(clipped.len(), clipped.iter().map(|&v| C64::new(v / total, 0.0)));
        let m = &eig.eigenvectors * DMatrix::from_diagonal(&diag) * eig.eigenvectors.adjoint();
        Self::from_matrix_unchecked(layout, m)
    }
}

/// Square root of a Hermitian positive-semidefinite matrix (negative
/// eigenvalues from rounding are clipped).
pub fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let diag = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&diag) * eig.eigenvectors.adjoint()
}

pub(crate) fn fidelity_dense(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let s = hermitian_sqrt(rho);
    let inner = &s * sigma * &s;
    let herm = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let tr: f64 = herm.symmetric_eigenvalues().iter().map(|&v| v.max(0.0).sqrt()).sum();
    (tr * tr).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed, number};

    #[test]
    fn fock_bounds() {
        assert!(DensityMatrix::fock_state(3, 4).is_ok());
        assert!(matches!(DensityMatrix::fock_state(4, 4), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn thermal_zero_is_vacuum() {
        let t = DensityMatrix::thermal_state(0.0, 6).unwrap();
        assert_eq!(t, DensityMatrix::fock_state(0, 6).unwrap());
    }

    #[test]
    fn thermal_geometric_populations() {
        let t = DensityMatrix::thermal_state(1.0, 30).unwrap();
        let p = t.populations();
        assert!((p[0] - 0.5).abs() < 1e-9);
        assert!((p[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let rho = DensityMatrix::coherent_state(C64::new(2.0, 0.0), 24).unwrap();
        let n = rho.expectation(&number(24).unwrap()).unwrap().re;
        assert!((n - 4.0).abs() < 1e-6, "n = {n}");
        let closed = DensityMatrix::coherent_state_closed_form(C64::new(2.0, 0.0), 40).unwrap();
        let nc = closed.expectation(&number(40).unwrap()).unwrap().re;
        assert!((nc - 4.0).abs() < 1e-9);
    }

    #[test]
    fn embedded_number_on_thermal_product() {
        let layout = SpaceLayout::qubit_memory_readout(30, 3).unwrap();
        let rho = DensityMatrix::product(
            layout.clone(),
            &[
                &DensityMatrix::fock_state(0, 2).unwrap(),
                &DensityMatrix::thermal_state(1.0, 30).unwrap(),
                &DensityMatrix::fock_state(0, 3).unwrap(),
            ],
        )
        .unwrap();
        let n_m = embed(&number(30).unwrap(), &layout, 1).unwrap();
        // Truncated at 30 levels the mean is 1 - 30 * 2^-30 / (1 - 2^-30).
        assert!((rho.expectation(&n_m).unwrap().re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn partial_trace_of_product_returns_factor() {
        let layout = SpaceLayout::qubit_memory_readout(5, 3).unwrap();
        let mem = DensityMatrix::coherent_state_closed_form(C64::new(0.3, 0.4), 5).unwrap();
        let q = DensityMatrix::diagonal(SpaceLayout::single(2, "qubit").unwrap(), &[0.3, 0.7]).unwrap();
        let r = DensityMatrix::thermal_state(0.2, 3).unwrap();
        let rho = DensityMatrix::product(layout, &[&q, &mem, &r]).unwrap();
        let reduced = rho.partial_trace(1).unwrap();
        assert!((reduced.matrix() - mem.matrix()).norm() < 1e-12);
        assert!((reduced.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangled_state_reduces_to_maximally_mixed_qubit() {
        // (|g,1> + |e,0>)/sqrt(2) on a qubit (x) 3-level mode
        let layout = SpaceLayout::new(vec![2, 3], vec!["qubit".into(), "memory".into()]).unwrap();
        let mut psi = DVector::zeros(6);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[layout.compose(&[0, 1])] = s;
        psi[layout.compose(&[1, 0])] = s;
        let rho = DensityMatrix::pure(layout, &psi).unwrap();
        let q = rho.partial_trace(0).unwrap();
        let half = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!((q.matrix() - half).norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_states() {
        let layout = SpaceLayout::single(2, "q").unwrap();
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(DensityMatrix::new(layout, bad).is_err());
    }

    #[test]
    fn fidelity_of_identical_and_orthogonal_states() {
        let a = DensityMatrix::fock_state(0, 3).unwrap();
        let b = DensityMatrix::fock_state(1, 3).unwrap();
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-12);
        assert!(a.fidelity(&b).unwrap() < 1e-12);
    }
}
