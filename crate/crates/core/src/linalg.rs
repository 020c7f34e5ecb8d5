//! Dense complex operator algebra.
//!
//! [`Operator`] is the carrier for every Hamiltonian, generator and
//! propagator in the crate. Distances are Frobenius norms throughout.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance for Hermiticity checks: `max|X - X^dag| <= tol * max(1, |X|_F)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative tolerance used to cluster degenerate eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}x{}) {}", self.dim(), self.dim(), self.0)
    }
}

impl Operator {
    /// Wraps a matrix, checking it is square with finite entries.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Operator(m))
    }

    /// Row-major constructor; panics if `entries.len() != dim * dim`.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "expected {} entries", dim * dim);
        Operator(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Operator::from_fn(n, |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| re(x)).collect();
        Operator::diagonal(&v)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator(&self.0 * z)
    }

    pub fn scale_real(&self, x: f64) -> Operator {
        self.scale(re(x))
    }

    /// `self += z * other`
    pub fn axpy(&mut self, z: C64, other: &Operator) {
        self.0.zip_apply(&other.0, |a, b| *a += z * b);
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    /// `max|X - X^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.norm().max(1.0)
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian { defect: self.hermiticity_defect() })
        }
    }

    /// `(X + X^dag) / 2`
    pub fn hermitian_part(&self) -> Operator {
        Operator((&self.0 + self.0.adjoint()) * re(0.5))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 * &other.0 - &other.0 * &self.0))
    }

    /// Matrix elements restricted to the index set `idx` (rows and columns).
    pub fn submatrix(&self, idx: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.0[(idx[i], idx[j])])
    }
}

impl From<DMatrix<C64>> for Operator {
    fn from(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        Operator(m)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator(&self.0 * rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator(&self.0 * re(rhs))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        self.0 -= &rhs.0;
    }
}

/// `ad_X^k Y`, with `ad_X Y = [X, Y]`.
pub fn commutator_power(x: &Operator, y: &Operator, k: usize) -> Result<Operator> {
    x.check_same_dim(y)?;
    let mut out = y.clone();
    for _ in 0..k {
        out = x.commutator(&out)?;
    }
    Ok(out)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian operator.
pub fn hermitian_eigen(h: &Operator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    h.ensure_hermitian()?;
    let eig = h.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// `exp(-i s X)` for Hermitian `X`, assembled from the spectral decomposition.
pub fn hermitian_exponential(x: &Operator, s: f64) -> Result<Operator> {
    if s == 0.0 {
        x.ensure_hermitian()?;
        return Ok(Operator::identity(x.dim()));
    }
    let (values, v) = hermitian_eigen(x)?;
    let phases: Vec<C64> = values.iter().map(|&e| C64::from_polar(1.0, -s * e)).collect();
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(Operator(vd * v.adjoint()))
}

/// `U Y U^{-1}`; for the unitary `U` used throughout this is `U Y U^dag`.
pub fn adjoint_conjugate(u: &Operator, y: &Operator) -> Result<Operator> {
    u.check_same_dim(y)?;
    Ok(Operator(&u.0 * &y.0 * u.0.adjoint()))
}

/// `|U^dag U - I|_F`.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let n = u.dim();
    (u.0.adjoint() * &u.0 - DMatrix::<C64>::identity(n, n)).norm()
}

/// One eigenvalue cluster of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub energy: f64,
    pub projector: Operator,
    pub multiplicity: usize,
    /// Indices of the eigenvectors (in ascending eigenvalue order) forming the cluster.
    pub members: Vec<usize>,
}

/// Clustered spectral decomposition `H = Σ E_m P_m`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub clusters: Vec<Cluster>,
    pub dim: usize,
    /// Absolute clustering threshold actually applied.
    pub cluster_gap: f64,
    pub eigenvectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.energy).collect()
    }

    /// `Σ E_m P_m`
    pub fn reconstruct(&self) -> Operator {
        let mut h = Operator::zeros(self.dim);
        for cl in &self.clusters {
            h.axpy(re(cl.energy), &cl.projector);
        }
        h
    }
}

/// Spectral decomposition of a Hermitian operator with degeneracy clustering.
///
/// Consecutive eigenvalues closer than `rel_tol * max(1, spectral range)`
/// are merged into one cluster; the cluster energy is their mean.
pub fn spectral_decompose(h: &Operator, rel_tol: f64) -> Result<Spectrum> {
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("clustering tolerance {rel_tol} must be positive")));
    }
    let (values, v) = hermitian_eigen(h)?;
    let n = h.dim();
    let range = values.last().copied().unwrap_or(0.0) - values.first().copied().unwrap_or(0.0);
    let gap = rel_tol * range.max(1.0);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if values[k] - values[*g.last().unwrap()] <= gap => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let clusters = groups
        .into_iter()
        .map(|members| {
            let energy = members.iter().map(|&k| values[k]).sum::<f64>() / members.len() as f64;
            let cols = DMatrix::from_fn(n, members.len(), |i, j| v[(i, members[j])]);
            let projector = Operator(&cols * cols.adjoint());
            Cluster { energy, projector, multiplicity: members.len(), members }
        })
        .collect();

    Ok(Spectrum { clusters, dim: n, cluster_gap: gap, eigenvectors: v })
}
