//! Small dense complex linear algebra: operators, states and a Hermitian
//! eigensolver (cyclic Jacobi).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self {
            dim,
            data,
            hermitian: false,
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| Complex::new(T::lit(rows[r][c]), T::zero()))
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(*v, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Marks the matrix hermitian after checking `max|M - M†| ≤ tol·max|M|`.
    pub fn into_hermitian(mut self, tol: T) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > tol * self.max_abs() {
            return Err(Error::NotHermitian(defect.to_f64_lossy()));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub(crate) fn with_hermitian_flag(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_fn(self.dim, |r, c| self[(c, r)].conj());
        out.hermitian = self.hermitian;
        out
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * s).collect(),
            hermitian: self.hermitian && s.im == T::zero(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        out.hermitian = false;
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d = *d + a * *b;
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let mut out = Self::from_fn(n * m, |r, c| self[(r / m, c / m)] * rhs[(r % m, c % m)]);
        out.hermitian = self.hermitian && rhs.hermitian;
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        let mut out = StateVector::zeros(self.dim);
        self.apply_into(v.as_slice(), out.as_mut_slice());
        out
    }

    pub fn apply_into(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.dim;
        debug_assert_eq!(v.len(), n);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * n..(r + 1) * n];
            *o = row
                .iter()
                .zip(v)
                .fold(Complex::zero(), |acc, (a, b)| acc + *a * *b);
        }
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Largest deviation of `M† M` from the identity.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint()
            .matmul(self)
            .max_diff(&Self::identity(self.dim))
    }

    pub fn expectation(&self, v: &StateVector<T>) -> Complex<T> {
        v.inner(&self.apply(v))
    }
}

impl<T> Index<(usize, usize)> for OperatorMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T> IndexMut<(usize, usize)> for OperatorMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.dim + c]
    }
}

impl<T: Real> Add for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn add(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl<T: Real> Sub for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn sub(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl<T: Real> Mul for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn mul(self, rhs: Self) -> OperatorMatrix<T> {
        self.matmul(rhs)
    }
}

/// Dense complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    data: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Complex::zero(); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn from_vec(data: Vec<Complex<T>>) -> Self {
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            data: self.data.iter().map(|z| *z / n).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.data
            .iter()
            .zip(&other.data)
            .fold(Complex::zero(), |s, (a, b)| s + a.conj() * *b)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn max_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}

impl<T> Index<usize> for StateVector<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.data[i]
    }
}

/// Eigendecomposition `H = V Λ V†` of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Columns are eigenvectors.
    pub vectors: OperatorMatrix<T>,
}

const MAX_SWEEPS: usize = 64;

impl<T: Real> HermitianEigen<T> {
    pub fn new(h: &OperatorMatrix<T>) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian(h.hermiticity_defect().to_f64_lossy()));
        }
        let n = h.dim();
        let mut a = h.clone();
        let mut v = OperatorMatrix::identity(n);
        let scale = a.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
        let two = T::lit(2.0);

        let mut converged = n < 2 || scale == T::zero();
        let mut sweeps = 0;
        while !converged {
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence(MAX_SWEEPS));
            }
            sweeps += 1;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag == T::zero() {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    // unit phase e^{iφ} of a_pq
                    let phase = apq / mag;
                    let tau = (aqq - app) / (two * mag);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let cz = Complex::new(c, T::zero());
                    let sz = Complex::new(s, T::zero());
                    // J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] acting on columns p, q
                    let jqp = -sz * phase.conj();
                    let jqq = cz * phase.conj();
                    for r in 0..n {
                        let x = a[(r, p)];
                        let y = a[(r, q)];
                        a[(r, p)] = x * cz + y * jqp;
                        a[(r, q)] = x * sz + y * jqq;
                        let x = v[(r, p)];
                        let y = v[(r, q)];
                        v[(r, p)] = x * cz + y * jqp;
                        v[(r, q)] = x * sz + y * jqq;
                    }
                    for col in 0..n {
                        let x = a[(p, col)];
                        let y = a[(q, col)];
                        a[(p, col)] = x * cz + y * jqp.conj();
                        a[(q, col)] = x * sz + y * jqq.conj();
                    }
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    a[(p, p)].im = T::zero();
                    a[(q, q)].im = T::zero();
                }
            }
            let mut off = T::zero();
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        off = off + a[(r, c)].norm_sqr();
                    }
                }
            }
            converged = off.sqrt() <= T::epsilon() * scale;
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = OperatorMatrix::from_fn(n, |r, c| v[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> OperatorMatrix<T> {
        let n = self.values.len();
        let fv: Vec<Complex<T>> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        OperatorMatrix::from_fn(n, |r, c| {
            (0..n).fold(Complex::zero(), |s, k| s + v[(r, k)] * fv[k] * v[(c, k)].conj())
        })
    }

    /// `V f(Λ) V† ψ` without forming the matrix.
    pub fn apply_spectrum(&self, f: impl Fn(T) -> Complex<T>, psi: &mut [Complex<T>]) {
        let n = self.values.len();
        let v = &self.vectors;
        let coeffs: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let proj = (0..n).fold(Complex::<T>::zero(), |s, r| s + v[(r, k)].conj() * psi[r]);
                proj * f(self.values[k])
            })
            .collect();
        for (r, out) in psi.iter_mut().enumerate() {
            *out = (0..n).fold(Complex::zero(), |s, k| s + v[(r, k)] * coeffs[k]);
        }
    }
}
