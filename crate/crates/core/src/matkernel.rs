//! Dense complex matrices and state vectors for the small Hilbert spaces used
//! here (qubits, qutrits and their two-party products, dimension ≤ 9).
//!
//! Every operator in the crate is a [`ComplexMatrix`]; the commutator and
//! complex anticommutator live here because every Bell-operator identity is
//! assembled from them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

/// Normalized pure state.
#[derive(Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: Vec<Complex<T>>,
}

fn is_finite<T: Real>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::BadShape { dim, got: entries.len() });
        }
        if !entries.iter().all(is_finite) {
            return Err(Error::NonFinite { context: "matrix construction" });
        }
        Ok(Self { dim, data: entries })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[T]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![Complex::new(T::one(), T::zero()); dim])
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * dim + i] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let d: Vec<_> = diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::from_diag(&d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    /// `self + c·I`.
    pub fn add_identity(&self, c: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i].re = out.data[i * self.dim + i].re + c;
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest singular value, by power iteration on `M†M`.
    pub fn operator_norm(&self) -> T {
        let gram = &self.dagger() * self;
        let n = self.dim;
        // Deterministic start with no special alignment to any basis vector.
        let mut v: Vec<Complex<T>> = (0..n).map(|i| Complex::new(T::one(), T::lit(0.1 * (i as f64 + 1.0)))).collect();
        let mut lambda = T::zero();
        for _ in 0..500 {
            let w: Vec<Complex<T>> = (0..n)
                .map(|i| (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + gram.get(i, j) * v[j]))
                .collect();
            let norm = w.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            if norm == T::zero() {
                return T::zero();
            }
            let prev = lambda;
            lambda = norm / v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            v = w.into_iter().map(|z| z / norm).collect();
            if (lambda - prev).abs() <= T::epsilon() * lambda {
                break;
            }
        }
        lambda.sqrt()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Kronecker product; entry `(i·dB + k, j·dB + l)` is `A(i,j)·B(k,l)`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let n = da * db;
        let mut out = Self::zeros(n);
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * n + (j * db + l)] = a * other.data[k * db + l];
                    }
                }
            }
        }
        out
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_residual(&self) -> T {
        (self - &self.dagger()).frobenius_norm()
    }

    /// `‖M·M† − I‖_F`.
    pub fn unitarity_residual(&self) -> T {
        (&(self * &self.dagger()) - &Self::identity(self.dim)).frobenius_norm()
    }

    /// Matrix exponential by scaling and squaring around a Taylor kernel.
    pub fn exp(&self) -> Self {
        let n = self.dim;
        let half = T::lit(0.5);
        let mut squarings = 0i32;
        let mut scaled_norm = self.frobenius_norm();
        while scaled_norm > half {
            scaled_norm = scaled_norm * half;
            squarings += 1;
        }
        let factor = half.powi(squarings);
        let a: Vec<Complex<T>> = self.data.iter().map(|&z| z * factor).collect();

        let zero = Complex::new(T::zero(), T::zero());
        let mut result = Self::identity(n).data;
        let mut term = result.clone();
        let mut scratch = vec![zero; n * n];
        for k in 1..=30 {
            mul_into(&term, &a, &mut scratch, n);
            let inv_k = T::one() / T::from_usize(k).unwrap();
            let mut tn = T::zero();
            for (t, s) in term.iter_mut().zip(&scratch) {
                *t = *s * inv_k;
                tn = tn + t.norm_sqr();
            }
            for (r, t) in result.iter_mut().zip(&term) {
                *r = *r + *t;
            }
            if tn.sqrt() <= T::epsilon() * T::lit(0.01) {
                break;
            }
        }
        for _ in 0..squarings {
            mul_into(&result, &result, &mut scratch, n);
            std::mem::swap(&mut result, &mut scratch);
        }
        Self { dim: n, data: result }
    }

    /// Casts entries into another scalar type.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T: Real> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl<T: Real> $trait<&ComplexMatrix<T>> for &ComplexMatrix<T> {
            type Output = ComplexMatrix<T>;

            /// Panics on dimension mismatch; use the `try_` form for fallible use.
            fn $method(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
                self.$try(rhs).expect("matrix dimensions agree")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        self.scale_real(-T::one())
    }
}

/// `A ⊗ B`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

/// Conjugate transpose.
pub fn dagger<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.dagger()
}

/// `[A, B] = AB − BA`.
pub fn commutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    Ok(&a.try_mul(b)? - &(b * a))
}

/// Complex anticommutator `{{A, B}} = A·B† + B·A†`, Hermitian for any inputs.
pub fn complex_anticommutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    Ok(&a.try_mul(&b.dagger())? + &(b * &a.dagger()))
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation<T: Real>(a: &ComplexMatrix<T>, psi: &StateVector<T>) -> Result<Complex<T>> {
    let n = a.dim();
    if n != psi.dim() {
        return Err(Error::DimensionMismatch { left: n, right: psi.dim() });
    }
    let amps = psi.amplitudes();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        let mut row = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            row = row + a.get(i, j) * amps[j];
        }
        acc = acc + amps[i].conj() * row;
    }
    Ok(acc)
}

/// Frobenius norm of `Π_r (O − r·I)`.
///
/// Zero exactly when `O` is diagonalizable with spectrum contained in `roots`.
pub fn spectral_residual<T: Real>(o: &ComplexMatrix<T>, roots: &[Complex<T>]) -> T {
    let n = o.dim();
    let id = ComplexMatrix::identity(n);
    roots.iter().fold(id.clone(), |acc, &r| &acc * &(o - &id.scale(r))).frobenius_norm()
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        if !amps.iter().all(is_finite) {
            return Err(Error::NonFinite { context: "state construction" });
        }
        let norm = norm_of(&amps);
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
        }
        Ok(Self { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<Complex<T>>) -> Result<Self> {
        if !amps.iter().all(is_finite) {
            return Err(Error::NonFinite { context: "state construction" });
        }
        let norm = norm_of(&amps);
        if norm == T::zero() {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(Self { amps: amps.into_iter().map(|z| z / norm).collect() })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        Self { amps }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        norm_of(&self.amps)
    }

    /// `|ψ⟩ ⊗ |φ⟩`.
    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self.amps.iter().flat_map(|&a| other.amps.iter().map(move |&b| a * b)).collect();
        Self { amps }
    }
}

impl<T: Real> fmt::Debug for StateVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter()).finish()
    }
}

/// `out = a·b` for row-major `n × n` buffers.
fn mul_into<T: Real>(a: &[Complex<T>], b: &[Complex<T>], out: &mut [Complex<T>], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..n {
                acc = acc + a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
}

fn norm_of<T: Real>(amps: &[Complex<T>]) -> T {
    amps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
