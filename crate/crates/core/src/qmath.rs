//! Small fixed-dimension complex linear algebra.
//!
//! Every Hilbert space in the protocol is a qubit (dimension 2), the
//! eavesdropper's probe (dimension 4), or their product (dimension 8), so the
//! types here reject any other dimension. Tensor products are ordered
//! particle ⊗ probe: basis index `i * d2 + j` pairs particle index `i` with
//! probe index `j`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SUPPORTED_DIMS: [usize; 3] = [2, 4, 8];

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const BORN_TOL: f64 = 1e-10;

fn check_dim(dim: usize) -> Result<usize> {
    if SUPPORTED_DIMS.contains(&dim) {
        Ok(dim)
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Square complex matrix of dimension 2, 4 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(dim, &entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            inner: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            inner: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        let dim = check_dim(diagonal.len())?;
        let mut inner = DMatrix::zeros(dim, dim);
        for (i, &x) in diagonal.iter().enumerate() {
            inner[(i, i)] = Complex64::new(x, 0.0);
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<Complex64> {
        self.inner.transpose().as_slice().to_vec()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * Complex64::new(factor, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        same_dim(self, other)?;
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.inner[(i, j)] * other.inner[(j, i)];
            }
        }
        Ok(acc)
    }

    /// `self · other · self†`
    pub fn conjugate(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            inner: &self.inner * &other.inner * self.inner.adjoint(),
        })
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let hermitian = (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Residual `‖U†U − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let product = self.inner.adjoint() * &self.inner;
        let identity = DMatrix::<Complex64>::identity(n, n);
        product
            .iter()
            .zip(identity.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{0} against {}x{1}",
            a.dim(),
            b.dim()
        )))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix product dimension mismatch");
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum dimension mismatch");
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix difference dimension mismatch");
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: &[Complex64]) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes: v })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        let amplitudes: Vec<Complex64> =
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(&amplitudes)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} in dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self⟩⟨self|`
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dim = check_dim(self.dim() * other.dim())?;
        let mut v = DVector::zeros(dim);
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                v[i * other.dim() + j] = self.amplitudes[i] * other.amplitudes[j];
            }
        }
        Ok(Self { amplitudes: v })
    }

    pub fn apply(&self, operator: &ComplexMatrix) -> Result<Self> {
        if operator.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} on a vector of dimension {}",
                operator.dim(),
                self.dim()
            )));
        }
        Self::new((&operator.inner * &self.amplitudes).as_slice())
    }
}

/// Trace-one, Hermitian, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian(residual));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(trace.re));
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a state (internal hot paths).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.hermitian_residual() < 1e-9);
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-9);
        Self { matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::identity(dim)?.scale(1.0 / dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = check_dim(da * db)?;
    let mut inner = DMatrix::zeros(dim, dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a.inner[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    inner[(i * db + k, j * db + l)] = aij * b.inner[(k, l)];
                }
            }
        }
    }
    Ok(ComplexMatrix { inner })
}

fn split_dims(total: usize, factor: usize) -> Result<usize> {
    if factor == 0 || !total.is_multiple_of(factor) {
        return Err(Error::DimensionMismatch(format!(
            "dimension {total} is not divisible by {factor}"
        )));
    }
    check_dim(total / factor)
}

/// Traces out the second tensor factor, of dimension `d2`.
pub fn partial_trace_second(m: &ComplexMatrix, d2: usize) -> Result<ComplexMatrix> {
    let d1 = split_dims(m.dim(), d2)?;
    let mut inner = DMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d2 {
                acc += m.inner[(i * d2 + k, j * d2 + k)];
            }
            inner[(i, j)] = acc;
        }
    }
    Ok(ComplexMatrix { inner })
}

/// Traces out the first tensor factor, of dimension `d1`.
pub fn partial_trace_first(m: &ComplexMatrix, d1: usize) -> Result<ComplexMatrix> {
    let d2 = split_dims(m.dim(), d1)?;
    let mut inner = DMatrix::zeros(d2, d2);
    for k in 0..d2 {
        for l in 0..d2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d1 {
                acc += m.inner[(i * d2 + k, i * d2 + l)];
            }
            inner[(k, l)] = acc;
        }
    }
    Ok(ComplexMatrix { inner })
}

/// Born rule `Tr(effect · state)`.
///
/// The effect is assumed positive; results within `BORN_TOL` of `[0, 1]` are
/// clamped, anything further out is reported as an invalid effect.
pub fn born_probability(state: &DensityMatrix, effect: &ComplexMatrix) -> Result<f64> {
    let p = effect.trace_product(state.matrix())?.re;
    clamp_probability(p)
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !(-BORN_TOL..=1.0 + BORN_TOL).contains(&p) {
        return Err(Error::InvalidEffect(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Positive operator-valued measure over a single space.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    /// Structural checks only (non-empty, common dimension); see [`check_povm`].
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty POVM".into()))?;
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "POVM elements of dimension {dim} and {}",
                bad.dim()
            )));
        }
        Ok(Self { elements })
    }

    /// Rank-one projective measurement onto the given vectors.
    pub fn from_basis(vectors: &[StateVector]) -> Result<Self> {
        Self::new(vectors.iter().map(StateVector::projector).collect())
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// `{O E_i O†}`
    pub fn conjugated_by(&self, operator: &ComplexMatrix) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| operator.conjugate(e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    /// Outcome probabilities for `state`.
    pub fn probabilities(&self, state: &DensityMatrix) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| born_probability(state, e))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmReport {
    /// `max |Σ E_i − I|` entrywise.
    pub completeness_residual: f64,
    /// Per-element worst Hermiticity defect.
    pub hermitian_residuals: Vec<f64>,
    /// Per-element smallest eigenvalue.
    pub min_eigenvalues: Vec<f64>,
    pub valid: bool,
}

pub fn check_povm(povm: &Povm) -> PovmReport {
    let dim = povm.dim();
    let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
    for e in povm.elements() {
        sum += &e.inner;
    }
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let completeness_residual = sum
        .iter()
        .zip(identity.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let hermitian_residuals: Vec<f64> = povm
        .elements()
        .iter()
        .map(ComplexMatrix::hermitian_residual)
        .collect();
    let min_eigenvalues: Vec<f64> = povm
        .elements()
        .iter()
        .map(|e| e.hermitian_eigenvalues()[0])
        .collect();
    let valid = completeness_residual <= COMPLETENESS_TOL
        && hermitian_residuals.iter().all(|&r| r <= HERMITIAN_TOL)
        && min_eigenvalues.iter().all(|&l| l >= -PSD_TOL);
    PovmReport {
        completeness_residual,
        hermitian_residuals,
        min_eigenvalues,
        valid,
    }
}

/// Extends `columns` (orthonormal, length `dim`) to a full unitary.
///
/// Column `positions[i]` of the result is `columns[i]`; the remaining columns
/// come from Gram–Schmidt over the computational basis.
pub(crate) fn complete_unitary(
    dim: usize,
    columns: &[(usize, DVector<Complex64>)],
) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    let mut basis: Vec<DVector<Complex64>> = columns.iter().map(|(_, c)| c.clone()).collect();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[..i] {
            let overlap = b.dotc(a).norm();
            if overlap > 1e-10 {
                return Err(Error::Construction(format!(
                    "isometry columns overlap by {overlap:e}"
                )));
            }
        }
        if (a.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Construction("isometry column is not unit".into()));
        }
    }
    let mut extra = Vec::new();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(dim);
        v[e] = Complex64::new(1.0, 0.0);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= Complex64::new(norm, 0.0);
            basis.push(v.clone());
            extra.push(v);
        }
    }
    if basis.len() != dim {
        return Err(Error::Construction("could not complete the isometry".into()));
    }
    let mut inner = DMatrix::<Complex64>::zeros(dim, dim);
    let mut extra = extra.into_iter();
    for col in 0..dim {
        let v = match columns.iter().find(|(p, _)| *p == col) {
            Some((_, c)) => c.clone(),
            None => extra.next().expect("column count checked above"),
        };
        inner.set_column(col, &v);
    }
    Ok(ComplexMatrix { inner })
}
