use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{fock, SpaceLayout, SparseMatrix};
use crate::{Error, Result};

/// Coherent-state norm error above which displacements log a warning.
pub const TRUNCATION_WARN: f64 = 1e-6;

/// A linear operator on the space described by its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: SparseMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// Raising operator `|e><g|`.
    Plus,
    /// Lowering operator `|g><e|`.
    Minus,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: SparseMatrix) -> Result<Self> {
        if matrix.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: matrix.dim(),
            });
        }
        Ok(Operator { layout, matrix })
    }

    pub fn from_dense(layout: SpaceLayout, m: &DMatrix<C64>) -> Result<Self> {
        Self::new(layout, SparseMatrix::from_dense(m))
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        Operator { matrix: SparseMatrix::zeros(layout.total_dim()), layout: layout.clone() }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    pub fn adjoint(&self) -> Self {
        Operator { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        Operator { layout: self.layout.clone(), matrix: self.matrix.scale(c.into()) }
    }

    fn check_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.layout.total_dim(),
                found: other.layout.total_dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Operator { layout: self.layout.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Operator { layout: self.layout.clone(), matrix: self.matrix.mul(&other.matrix) })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        Ok(Operator { layout: self.layout.clone(), matrix: ab.matrix.sub(&ba.matrix) })
    }

    /// Relative Frobenius distance to the adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.hermiticity_error()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= 1e-12
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let dense = self.to_dense();
        let herm = (&dense + dense.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

impl Add for &Operator {
    type Output = Operator;
    /// Panics on layout mismatch; use [`Operator::try_add`] for a fallible sum.
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator layouts differ")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_add(&rhs.scale(-1.0)).expect("operator layouts differ")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    /// Panics on layout mismatch; use [`Operator::try_mul`] for a fallible product.
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator layouts differ")
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

fn check_mode_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    Ok(())
}

/// Bosonic annihilation operator on a single mode truncated to `dim` levels.
pub fn annihilation(dim: usize) -> Result<Operator> {
    check_mode_dim(dim)?;
    let triplets =
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect();
    Operator::new(SpaceLayout::single(dim, "mode")?, SparseMatrix::from_triplets(dim, triplets))
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<Operator> {
    check_mode_dim(dim)?;
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    Operator::new(SpaceLayout::single(dim, "mode")?, SparseMatrix::diagonal(&diag))
}

pub fn identity(layout: &SpaceLayout) -> Operator {
    Operator { matrix: SparseMatrix::identity(layout.total_dim()), layout: layout.clone() }
}

/// Two-level operators in the (ground, excited) basis.
///
/// `Z = diag(-1, +1)`, `Plus = |e><g|`, `Minus = |g><e|`, and
/// `Plus/Minus = (X -/+ iY)/2` with `Y = [[0, -i], [i, 0]]`.
pub fn pauli(which: Pauli) -> Operator {
    let (o, one, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let m = match which {
        Pauli::X => [[o, one], [one, o]],
        Pauli::Y => [[o, -i], [i, o]],
        Pauli::Z => [[-one, o], [o, one]],
        Pauli::Plus => [[o, o], [one, o]],
        Pauli::Minus => [[o, one], [o, o]],
    };
    let dense = DMatrix::from_fn(2, 2, |r, c| m[r][c]);
    Operator::from_dense(SpaceLayout::single(2, "qubit").expect("valid"), &dense)
        .expect("2x2 matches a qubit layout")
}

/// `op (x) identities` placed in `slot` of `layout`.
pub fn embed(op: &Operator, layout: &SpaceLayout, slot: usize) -> Result<Operator> {
    let dim = layout.dim(slot)?;
    if op.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
    }
    let before: usize = layout.dims()[..slot].iter().product();
    let after: usize = layout.dims()[slot + 1..].iter().product();
    let m = SparseMatrix::identity(before)
        .kron(op.matrix())
        .kron(&SparseMatrix::identity(after));
    Operator::new(layout.clone(), m)
}

/// Displacement `exp(alpha a^dag - alpha* a)` on a mode truncated to `dim`
/// levels, computed as the matrix exponential of the truncated generator.
///
/// Logs a warning when the coherent state `D(alpha)|0>` loses more than
/// [`TRUNCATION_WARN`] of its norm to the truncation.
pub fn displacement(alpha: C64, dim: usize) -> Result<Operator> {
    check_mode_dim(dim)?;
    let lost = fock::coherent_truncation_error(alpha, dim);
    if lost > TRUNCATION_WARN {
        log::warn!(
            "displacement |alpha|^2 = {:.3} in dimension {dim} truncates {lost:.2e} of the coherent state",
            alpha.norm_sqr()
        );
    }
    let a = annihilation(dim)?.to_dense();
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    let mut m = SparseMatrix::from_dense(&generator.exp());
    m.prune(1e-300);
    Operator::new(SpaceLayout::single(dim, "mode")?, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn annihilation_small_dims() {
        let a2 = annihilation(2).unwrap().to_dense();
        assert_eq!(a2[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a2[(1, 0)], C64::new(0.0, 0.0));
        let a3 = annihilation(3).unwrap().to_dense();
        assert!((a3[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension { dim: 1 })));
    }

    #[test]
    fn commutator_shows_truncation_artifact() {
        let a = annihilation(10).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap().to_dense();
        for n in 0..9 {
            assert!((comm[(n, n)].re - 1.0).abs() < 1e-12);
        }
        assert!((comm[(9, 9)].re + 9.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_products_project() {
        let minus_plus = &pauli(Pauli::Minus) * &pauli(Pauli::Plus);
        let ground = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0].map(|v| C64::new(v, 0.0)));
        assert!(approx_eq(&minus_plus.to_dense(), &ground, 0.0));
        let x = pauli(Pauli::X).to_dense();
        let y = pauli(Pauli::Y).to_dense();
        let half = C64::new(0.5, 0.0);
        let i = C64::new(0.0, 1.0);
        assert!(approx_eq(&((&x - &y * i) * half), &pauli(Pauli::Plus).to_dense(), 1e-15));
        assert!(approx_eq(&((&x + &y * i) * half), &pauli(Pauli::Minus).to_dense(), 1e-15));
    }

    #[test]
    fn sigma_x_eigenvectors_are_dressed_states() {
        let x = pauli(Pauli::X).to_dense();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for sign in [1.0, -1.0] {
            let v = nalgebra::DVector::from_vec(vec![C64::new(s, 0.0), C64::new(sign * s, 0.0)]);
            assert!((&x * &v - &v * C64::new(sign, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_identity_is_identity() {
        let layout = SpaceLayout::qubit_memory_readout(4, 3).unwrap();
        let id = identity(&SpaceLayout::single(4, "m").unwrap());
        assert_eq!(embed(&id, &layout, 1).unwrap(), identity(&layout));
        let wrong = identity(&SpaceLayout::single(5, "m").unwrap());
        assert!(embed(&wrong, &layout, 1).is_err());
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let layout = SpaceLayout::qubit_memory_readout(5, 4).unwrap();
        let am = embed(&annihilation(5).unwrap(), &layout, 1).unwrap();
        let ard = embed(&creation(4).unwrap(), &layout, 2).unwrap();
        assert_eq!(am.commutator(&ard).unwrap().matrix().nnz(), 0);
    }

    #[test]
    fn displacement_identities() {
        let dim = 24;
        let zero = displacement(C64::new(0.0, 0.0), dim).unwrap().to_dense();
        assert!(approx_eq(&zero, &DMatrix::identity(dim, dim), 1e-14));
        let alpha = C64::new(1.1, -1.4);
        let d = displacement(alpha, dim).unwrap();
        let dm = displacement(-alpha, dim).unwrap();
        assert!(approx_eq(&(&d * &dm).to_dense(), &DMatrix::identity(dim, dim), 1e-9));
        let vac = displacement(C64::new(1.0, 0.0), 40).unwrap().to_dense()[(0, 0)];
        assert!((vac.re - (-0.5f64).exp()).abs() < 1e-12);
        assert!((vac.re - 0.60653).abs() < 1e-5);
    }
}
