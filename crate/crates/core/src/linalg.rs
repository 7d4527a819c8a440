//! Dense complex Hermitian matrix calculus for small dimensions.
//!
//! Everything here works in units with ħ = 1: a [`HermitianOperator`] used as
//! a Hamiltonian is an angular frequency and `t` is the conjugate time.

use std::ops::{Add, Mul, Neg, Range, Sub};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative asymmetry (against the largest entry) absorbed by symmetrization.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Allowed deviation of a state norm from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Allowed deviation of U†U from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A dense complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity and symmetrizes away rounding-level asymmetry.
    ///
    /// Entries may deviate from the conjugate transpose by at most
    /// `1e-12 * max|a_ij|`; larger deviations are rejected with the offending
    /// entry.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        let tol = HERMITICITY_TOL * max_abs(&matrix);
        let mut worst = (0, 0, 0.0_f64);
        for i in 0..rows {
            for j in i..rows {
                let dev = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if dev > worst.2 {
                    worst = (i, j, dev);
                }
            }
        }
        if worst.2 > tol || !worst.2.is_finite() {
            return Err(Error::NonHermitianInput {
                row: worst.0,
                col: worst.1,
                deviation: worst.2,
            });
        }
        Ok(Self::hermitian_part(&matrix))
    }

    /// (M + M†)/2 without any tolerance check.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part: non-square matrix");
        let matrix = (m + m.adjoint()).scale(0.5);
        Self { matrix }
    }

    /// Builds an operator from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let rows = re.len();
        for row in re {
            if row.len() != rows {
                return Err(Error::InvalidShape {
                    rows,
                    cols: row.len(),
                });
            }
        }
        if let Some(im) = im {
            if im.len() != rows {
                return Err(Error::InvalidShape {
                    rows: im.len(),
                    cols: rows,
                });
            }
            for row in im {
                if row.len() != rows {
                    return Err(Error::InvalidShape {
                        rows,
                        cols: row.len(),
                    });
                }
            }
        }
        let matrix = CMatrix::from_fn(rows, rows, |i, j| {
            let imag = im.map_or(0.0, |im| im[i][j]);
            C64::new(re[i][j], imag)
        });
        Self::new(matrix)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "diagonal: empty spectrum");
        let n = values.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zeros: dimension must be positive");
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "identity: dimension must be positive");
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// A ⊗ I_n, the operator acting trivially on an n-dimensional ancilla.
    pub fn kron_identity(&self, ancilla_dim: usize) -> Self {
        assert!(ancilla_dim > 0, "kron_identity: ancilla dimension must be positive");
        let matrix = self.matrix.kronecker(&CMatrix::identity(ancilla_dim, ancilla_dim));
        Self { matrix }
    }

    /// A·A, re-Hermitized.
    pub fn square(&self) -> Self {
        Self::hermitian_part(&(&self.matrix * &self.matrix))
    }

    /// U A U†.
    pub fn conjugate_by(&self, u: &UnitaryOperator) -> Result<Self> {
        check_same_dim(self.dim(), u.dim())?;
        let m = u.matrix() * &self.matrix * u.matrix().adjoint();
        Ok(Self::hermitian_part(&m))
    }

    pub fn eig(&self) -> EigenDecomposition {
        eig_hermitian(self)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    /// Panics on mismatched dimensions; see [`HermitianOperator::try_add`].
    fn add(self, rhs: Self) -> HermitianOperator {
        self.try_add(rhs).expect("HermitianOperator addition")
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: Self) -> HermitianOperator {
        &self + &rhs
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: Self) -> HermitianOperator {
        self.try_sub(rhs).expect("HermitianOperator subtraction")
    }
}

impl Sub for HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: Self) -> HermitianOperator {
        &self - &rhs
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for HermitianOperator {
    type Output = HermitianOperator;

    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Ascending eigenvalues with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// λ_max − λ_min.
    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }

    /// Two eigenvalues closer than this are treated as degenerate.
    pub fn degeneracy_tolerance(&self) -> f64 {
        degeneracy_tolerance(self.spread())
    }

    pub fn degenerate(&self, i: usize, j: usize) -> bool {
        (self.eigenvalues[i] - self.eigenvalues[j]).abs() <= self.degeneracy_tolerance()
    }

    /// Index ranges of degenerate clusters, in ascending order.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        blocks_of(&self.eigenvalues, self.degeneracy_tolerance())
    }

    /// Multiplicity of the minimal and maximal eigenvalue.
    pub fn extremal_multiplicities(&self) -> (usize, usize) {
        let blocks = self.blocks();
        let first = blocks.first().map_or(0, |b| b.len());
        let last = blocks.last().map_or(0, |b| b.len());
        (first, last)
    }

    /// Σ_k f(λ_k) |v_k⟩⟨v_k|.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fk = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        scaled * v.adjoint()
    }

    /// e^{−itA} from the stored spectrum.
    pub fn evolution(&self, t: f64) -> UnitaryOperator {
        let matrix = self.apply_function(|lambda| C64::from_polar(1.0, -t * lambda));
        UnitaryOperator { matrix }
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|lambda| C64::new(lambda, 0.0))
    }

    /// V† M V, a matrix expressed in this eigenbasis.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// V M V†, the inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

pub(crate) fn degeneracy_tolerance(spread: f64) -> f64 {
    (1e-9 * spread).max(1e-13)
}

pub(crate) fn blocks_of(sorted: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > tol {
            blocks.push(start..k);
            start = k;
        }
    }
    blocks
}

/// Eigendecomposition of a Hermitian operator with a reproducible basis.
///
/// Within each degenerate cluster the eigenvectors are replaced by the
/// Gram–Schmidt orthonormalization of the canonical basis vectors projected
/// onto the cluster, taken in index order. For a simple eigenvalue this fixes
/// the phase so that the first non-negligible component is real and positive.
pub fn eig_hermitian(a: &HermitianOperator) -> EigenDecomposition {
    let n = a.dim();
    let se = SymmetricEigen::new(a.matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    let spread = eigenvalues[n - 1] - eigenvalues[0];
    for block in blocks_of(&eigenvalues, degeneracy_tolerance(spread)) {
        canonicalize_block(&mut eigenvectors, block);
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

fn canonicalize_block(vectors: &mut CMatrix, block: Range<usize>) {
    let n = vectors.nrows();
    let k = block.len();
    let q = vectors.columns(block.start, k).into_owned();
    // Any threshold with n·τ² < 1 guarantees k acceptances in one pass.
    let threshold = (0.5 / n as f64).sqrt();
    let mut accepted: Vec<CVector> = Vec::with_capacity(k);
    for j in 0..n {
        if accepted.len() == k {
            break;
        }
        // Q Q† e_j
        let coeffs = q.row(j).adjoint();
        let mut r = &q * coeffs;
        for _ in 0..2 {
            for u in &accepted {
                let overlap = u.dotc(&r);
                r -= u * overlap;
            }
        }
        let norm = r.norm();
        if norm >= threshold {
            accepted.push(r / C64::new(norm, 0.0));
        }
    }
    debug_assert_eq!(accepted.len(), k);
    for (offset, u) in accepted.iter().enumerate() {
        vectors.set_column(block.start + offset, u);
    }
}

/// A unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        let u = Self { matrix };
        let dev = u.unitarity_defect();
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidParameter {
                name: "unitary",
                reason: format!("U†U deviates from identity by {dev:e}"),
            });
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// max |(U†U − I)_ij|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &CMatrix::identity(n, n))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        check_same_dim(self.dim(), psi.dim())?;
        PureState::normalize(&self.matrix * psi.amplitudes())
    }
}

/// e^{−itA} through the spectral decomposition of A.
pub fn expm_unitary(a: &HermitianOperator, t: f64) -> UnitaryOperator {
    eig_hermitian(a).evolution(t)
}

/// ‖A‖_sn = λ_max − λ_min.
pub fn seminorm(a: &HermitianOperator) -> f64 {
    eig_hermitian(a).spread()
}

/// A unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn normalize(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// |k⟩ in a `dim`-dimensional space.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis: index {k} out of range for dimension {dim}");
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// (|a⟩ + |b⟩)/√2, renormalized.
    pub fn balanced(a: &CVector, b: &CVector) -> Result<Self> {
        check_same_dim(a.len(), b.len())?;
        Self::normalize(a + b)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// ⟨ψ|A|ψ⟩.
pub fn expectation(a: &HermitianOperator, psi: &PureState) -> Result<f64> {
    check_same_dim(a.dim(), psi.dim())?;
    Ok(psi.amplitudes.dotc(&(a.matrix() * &psi.amplitudes)).re)
}

/// ⟨A²⟩ − ⟨A⟩², evaluated as ‖(A − ⟨A⟩)ψ‖².
pub fn variance(a: &HermitianOperator, psi: &PureState) -> Result<f64> {
    let mean = expectation(a, psi)?;
    let shifted = a.matrix() * &psi.amplitudes - &psi.amplitudes * C64::new(mean, 0.0);
    Ok(shifted.norm_squared())
}

/// AB − BA.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<CMatrix> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

/// GUE sample with density ∝ exp(−tr A²/2): unit-variance real diagonal,
/// off-diagonal real and imaginary parts of variance 1/2.
pub fn random_hermitian_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    assert!(dim > 0, "random_hermitian: dimension must be positive");
    let x = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    HermitianOperator::hermitian_part(&x)
}

/// Deterministic GUE sample for a given seed.
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    random_hermitian_with(&mut ChaCha8Rng::seed_from_u64(seed), dim)
}

/// Haar-uniform pure state.
pub fn random_state_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if let Ok(psi) = PureState::normalize(v) {
            return psi;
        }
    }
}

pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryOperator {
    expm_unitary(&random_hermitian_with(rng, dim), 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spin1() -> (HermitianOperator, HermitianOperator, HermitianOperator) {
        let s = FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let sx = CMatrix::from_row_slice(3, 3, &[z, c(s, 0.0), z, c(s, 0.0), z, c(s, 0.0), z, c(s, 0.0), z]);
        let sy = CMatrix::from_row_slice(
            3,
            3,
            &[z, c(0.0, -s), z, c(0.0, s), z, c(0.0, -s), z, c(0.0, s), z],
        );
        (
            HermitianOperator::new(sx).unwrap(),
            HermitianOperator::new(sy).unwrap(),
            HermitianOperator::diagonal(&[1.0, 0.0, -1.0]),
        )
    }

    fn taylor_exp(a: &HermitianOperator, t: f64, terms: usize) -> CMatrix {
        let n = a.dim();
        let x = a.matrix().map(|z| z * c(0.0, -t));
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * &x / c(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let d = eig_hermitian(&HermitianOperator::diagonal(&[3.0, 1.0, 0.0]));
        assert_eq!(d.eigenvalues(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    fn spin1_sx_spectrum() {
        let (sx, _, _) = spin1();
        let d = sx.eig();
        for (got, want) in d.eigenvalues().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn gue_reconstruction_and_eigen_invariants() {
        let a = random_hermitian(5, 7);
        let d = a.eig();
        assert!(max_abs_diff(&d.reconstruct(), a.matrix()) < 1e-10);
        let v = d.eigenvectors();
        assert!(max_abs_diff(&(v.adjoint() * v), &CMatrix::identity(5, 5)) < 1e-10);
        let norm = d.eigenvalues().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for k in 0..5 {
            let r = a.matrix() * d.vector(k) - d.vector(k) * c(d.eigenvalues()[k], 0.0);
            assert!(r.norm() < 1e-10 * norm);
        }
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_basis_is_canonical() {
        // Identity rotated by a random unitary is still the identity; any
        // eigensolver basis must collapse to the canonical one.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary_with(&mut rng, 4);
        let a = HermitianOperator::diagonal(&[2.0, 2.0, 2.0, 5.0]).conjugate_by(&u).unwrap();
        let d1 = a.eig();
        let d2 = a.eig();
        assert_eq!(d1, d2);
        assert_eq!(d1.blocks(), vec![0..3, 3..4]);
        let v = d1.eigenvectors();
        for k in 0..3 {
            let r = a.matrix() * d1.vector(k) - d1.vector(k) * c(2.0, 0.0);
            assert!(r.norm() < 1e-12);
        }
        // First vector of the block has a real positive leading component.
        assert!(v[(0, 0)].im.abs() < 1e-14 && v[(0, 0)].re > 0.0);
        // Later vectors are orthogonal to e_0 components already used.
        assert!(v[(0, 1)].norm() < 1e-12);
        assert!(max_abs_diff(&(v.adjoint() * v), &CMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected_with_indices() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 2)] = c(1.0, 0.0);
        match HermitianOperator::new(m) {
            Err(Error::NonHermitianInput { row, col, .. }) => assert_eq!((row, col), (0, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rounding_asymmetry_is_symmetrized() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.5, 0.25);
        m[(1, 0)] = c(0.5 + 1e-14, -0.25);
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(2, 3)),
            Err(Error::InvalidShape { .. })
        ));
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let a = random_hermitian(4, 11);
        let u = expm_unitary(&a, 0.0);
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(4, 4)) < 1e-14);
    }

    #[test]
    fn expm_sz_at_pi() {
        let (_, _, sz) = spin1();
        let u = expm_unitary(&sz, PI);
        let want = CMatrix::from_diagonal(&CVector::from_vec(vec![c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(max_abs_diff(u.matrix(), &want) < 1e-14);
    }

    #[test]
    fn expm_matches_taylor_series() {
        let a = random_hermitian(4, 5);
        let u = expm_unitary(&a, 0.3);
        assert!(max_abs_diff(u.matrix(), &taylor_exp(&a, 0.3, 30)) < 1e-9);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn seminorm_examples() {
        let (_, _, sz) = spin1();
        assert!((seminorm(&sz) - 2.0).abs() < 1e-14);
        assert_eq!(seminorm(&HermitianOperator::identity(4)), 0.0);
    }

    #[test]
    fn seminorm_triangle_inequality_campaign() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let b = random_hermitian_with(&mut rng, 6);
            let cc = random_hermitian_with(&mut rng, 6);
            let a = &b + &cc;
            assert!(seminorm(&a) <= seminorm(&b) + seminorm(&cc) + 1e-10);
        }
    }

    #[test]
    fn expectation_and_variance_examples() {
        let (_, _, sz) = spin1();
        let up = PureState::basis(3, 0);
        assert!((expectation(&sz, &up).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&sz, &up).unwrap().abs() < 1e-15);
        let sym = PureState::balanced(PureState::basis(3, 0).amplitudes(), PureState::basis(3, 2).amplitudes()).unwrap();
        assert!(expectation(&sz, &sym).unwrap().abs() < 1e-15);
        assert!((variance(&sz, &sym).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn variance_dimension_mismatch() {
        let (_, _, sz) = spin1();
        assert!(matches!(
            variance(&sz, &PureState::basis(2, 0)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn popoviciu_bound_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let a = random_hermitian_with(&mut rng, 5);
            let psi = random_state_with(&mut rng, 5);
            let sn = seminorm(&a);
            assert!(4.0 * variance(&a, &psi).unwrap() <= sn * sn + 1e-9);
        }
    }

    #[test]
    fn commutator_examples() {
        let (sx, sy, sz) = spin1();
        let comm = commutator(&sx, &sy).unwrap();
        let isz = sz.matrix().map(|z| z * c(0.0, 1.0));
        assert!(max_abs_diff(&comm, &isz) < 1e-15);
        assert!(max_abs(&commutator(&sx, &sx).unwrap()) == 0.0);

        // [diag(1,2), σ_x] = [[0, -1], [1, 0]] by hand.
        let d = HermitianOperator::diagonal(&[1.0, 2.0]);
        let x = HermitianOperator::from_parts(&[vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        let got = commutator(&d, &x).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(got, want);
        // Anti-Hermitian for Hermitian inputs.
        assert!(max_abs_diff(&got, &(-got.adjoint())) == 0.0);
    }

    #[test]
    fn random_hermitian_deterministic() {
        assert_eq!(random_hermitian(3, 42), random_hermitian(3, 42));
        assert_ne!(random_hermitian(3, 42), random_hermitian(3, 43));
        let a = random_hermitian(5, 1);
        assert!(HermitianOperator::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn gue_dim2_mean_spread() {
        // For this scaling λ_max − λ_min = √2·χ₃, whose mean is 4/√π.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mean: f64 = (0..1000)
            .map(|_| seminorm(&random_hermitian_with(&mut rng, 2)))
            .sum::<f64>()
            / 1000.0;
        let expected = 4.0 / PI.sqrt();
        assert!((mean - expected).abs() < 0.1 * expected, "mean {mean} vs {expected}");
    }

    #[test]
    fn pure_state_normalization() {
        assert!(PureState::new(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
        assert!(PureState::normalize(CVector::zeros(3)).is_err());
    }

    #[test]
    fn ancilla_tensor_keeps_spectrum() {
        let a = random_hermitian(3, 8);
        let ext = a.kron_identity(2);
        assert_eq!(ext.dim(), 6);
        assert!((seminorm(&ext) - seminorm(&a)).abs() < 1e-12);
    }
}
