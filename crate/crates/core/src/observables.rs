//! Measurement operators: qubit spin observables along unit directions and
//! three-outcome qutrit observables `U·diag(outcomes)·U†`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::ComplexMatrix;
use crate::scalar::Real;

/// Unit 3-vector giving a qubit measurement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T: Real> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> Direction<T> {
    /// Accepts only vectors whose norm is 1 within the scalar tolerance.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite { context: "direction" });
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(Error::NonUnitDirection { norm: norm.to_f64_lossy() });
        }
        Ok(Self { x, y, z })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == T::zero() {
            return Err(Error::NonUnitDirection { norm: norm.to_f64_lossy() });
        }
        Ok(Self { x: x / norm, y: y / norm, z: z / norm })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_spherical(theta: T, phi: T) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (x, y, z) = (st * cp, st * sp, ct);
        // Renormalize to absorb rounding in the trig products.
        let norm = (x * x + y * y + z * z).sqrt();
        Self { x: x / norm, y: y / norm, z: z / norm }
    }

    pub fn components(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Cross product (not normalized).
    pub fn cross(&self, other: &Self) -> [T; 3] {
        [self.y * other.z - self.z * other.y, self.z * other.x - self.x * other.z, self.x * other.y - self.y * other.x]
    }
}

/// Pauli matrix `σ_k` for `k ∈ {1, 2, 3}` (x, y, z).
pub fn pauli<T: Real>(k: usize) -> ComplexMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    let c = Complex::new;
    let entries = match k {
        1 => vec![c(o, o), c(l, o), c(l, o), c(o, o)],
        2 => vec![c(o, o), c(o, -l), c(o, l), c(o, o)],
        3 => vec![c(l, o), c(o, o), c(o, o), c(-l, o)],
        _ => panic!("Pauli index {k} outside 1..=3"),
    };
    ComplexMatrix::new(2, entries).expect("Pauli matrices are finite")
}

/// Gell-Mann matrix `λ_k` for `k ∈ {1, …, 8}` in the standard ordering.
pub fn gell_mann<T: Real>(k: usize) -> ComplexMatrix<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut m = vec![zero; 9];
    let mut set = |r: usize, c: usize, v: Complex<T>| m[r * 3 + c] = v;
    match k {
        1 => {
            set(0, 1, one);
            set(1, 0, one);
        }
        2 => {
            set(0, 1, -i);
            set(1, 0, i);
        }
        3 => {
            set(0, 0, one);
            set(1, 1, -one);
        }
        4 => {
            set(0, 2, one);
            set(2, 0, one);
        }
        5 => {
            set(0, 2, -i);
            set(2, 0, i);
        }
        6 => {
            set(1, 2, one);
            set(2, 1, one);
        }
        7 => {
            set(1, 2, -i);
            set(2, 1, i);
        }
        8 => {
            let s = one * (T::one() / T::lit(3.0).sqrt());
            set(0, 0, s);
            set(1, 1, s);
            set(2, 2, s * T::lit(-2.0));
        }
        _ => panic!("Gell-Mann index {k} outside 1..=8"),
    }
    ComplexMatrix::new(3, m).expect("Gell-Mann matrices are finite")
}

/// `n_x σ_x + n_y σ_y + n_z σ_z`, spectrum `{+1, −1}`.
pub fn qubit_observable<T: Real>(n: &Direction<T>) -> ComplexMatrix<T> {
    let [x, y, z] = n.components();
    &(&pauli::<T>(1).scale_real(x) + &pauli::<T>(2).scale_real(y)) + &pauli::<T>(3).scale_real(z)
}

/// Outcome convention for three-outcome observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeSpectrum {
    /// Real outcomes `0, 1, 2`.
    Hermitian012,
    /// Roots of unity `1, ω, ω²` with `ω = e^{2πi/3}`.
    UnitaryRoots,
    /// Real outcomes `−1, 0, 1`.
    HermitianCentered,
}

impl OutcomeSpectrum {
    pub const ALL: [OutcomeSpectrum; 3] =
        [OutcomeSpectrum::Hermitian012, OutcomeSpectrum::UnitaryRoots, OutcomeSpectrum::HermitianCentered];

    pub fn values<T: Real>(self) -> [Complex<T>; 3] {
        let re = |x: f64| Complex::new(T::lit(x), T::zero());
        match self {
            OutcomeSpectrum::Hermitian012 => [re(0.0), re(1.0), re(2.0)],
            OutcomeSpectrum::HermitianCentered => [re(-1.0), re(0.0), re(1.0)],
            OutcomeSpectrum::UnitaryRoots => {
                let w = T::lit(2.0) * T::PI() / T::lit(3.0);
                [re(1.0), Complex::from_polar(T::one(), w), Complex::from_polar(T::one(), w + w)]
            }
        }
    }

    pub fn is_hermitian(self) -> bool {
        !matches!(self, OutcomeSpectrum::UnitaryRoots)
    }

    pub fn name(self) -> &'static str {
        match self {
            OutcomeSpectrum::Hermitian012 => "hermitian",
            OutcomeSpectrum::UnitaryRoots => "unitary",
            OutcomeSpectrum::HermitianCentered => "centered",
        }
    }
}

impl std::str::FromStr for OutcomeSpectrum {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hermitian" | "hermitian012" => Ok(OutcomeSpectrum::Hermitian012),
            "unitary" | "roots" => Ok(OutcomeSpectrum::UnitaryRoots),
            "centered" => Ok(OutcomeSpectrum::HermitianCentered),
            other => Err(format!("unknown convention `{other}` (expected hermitian, unitary or centered)")),
        }
    }
}

/// Qutrit observable with eigenbasis `U` and a fixed outcome spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritObservable<T: Real> {
    basis: ComplexMatrix<T>,
    spectrum: OutcomeSpectrum,
}

impl<T: Real> QutritObservable<T> {
    pub fn new(basis: ComplexMatrix<T>, spectrum: OutcomeSpectrum) -> Result<Self> {
        if basis.dim() != 3 {
            return Err(Error::DimensionMismatch { left: basis.dim(), right: 3 });
        }
        let residual = basis.unitarity_residual();
        if residual > T::tolerance() {
            return Err(Error::NotUnitary { residual: residual.to_f64_lossy() });
        }
        Ok(Self { basis, spectrum })
    }

    pub fn spectrum(&self) -> OutcomeSpectrum {
        self.spectrum
    }

    pub fn basis(&self) -> &ComplexMatrix<T> {
        &self.basis
    }

    /// `U·diag(outcomes)·U†`.
    pub fn operator(&self) -> ComplexMatrix<T> {
        let d = ComplexMatrix::from_diag(&self.spectrum.values::<T>());
        &(&self.basis * &d) * &self.basis.dagger()
    }
}

pub fn qutrit_observable<T: Real>(obs: &QutritObservable<T>) -> ComplexMatrix<T> {
    obs.operator()
}

/// `exp(i·Σ θ_k G_k)` with Pauli (`d = 2`) or Gell-Mann (`d = 3`) generators.
pub fn unitary_from_params<T: Real>(theta: &[T], d: usize) -> Result<ComplexMatrix<T>> {
    if !(d == 2 || d == 3) {
        return Err(Error::UnsupportedDimension(d));
    }
    let expected = d * d - 1;
    if theta.len() != expected {
        return Err(Error::WrongParamCount { expected, got: theta.len() });
    }
    if !theta.iter().all(|t| t.is_finite()) {
        return Err(Error::NonFinite { context: "unitary parameters" });
    }
    let h = if d == 2 { pauli_combination(theta) } else { gell_mann_combination(theta) };
    Ok(h.scale(Complex::new(T::zero(), T::one())).exp())
}

/// `Σ θ_k σ_k`.
fn pauli_combination<T: Real>(t: &[T]) -> ComplexMatrix<T> {
    let c = Complex::new;
    let o = T::zero();
    ComplexMatrix::new(2, vec![c(t[2], o), c(t[0], -t[1]), c(t[0], t[1]), c(-t[2], o)]).expect("finite parameters")
}

/// `Σ θ_k λ_k`, assembled entrywise.
fn gell_mann_combination<T: Real>(t: &[T]) -> ComplexMatrix<T> {
    let c = Complex::new;
    let o = T::zero();
    let r = t[7] / T::lit(3.0).sqrt();
    ComplexMatrix::new(
        3,
        vec![
            c(t[2] + r, o),
            c(t[0], -t[1]),
            c(t[3], -t[4]),
            c(t[0], t[1]),
            c(-t[2] + r, o),
            c(t[5], -t[6]),
            c(t[3], t[4]),
            c(t[5], t[6]),
            c(T::lit(-2.0) * r, o),
        ],
    )
    .expect("finite parameters")
}

/// Uniform point on the unit sphere from a normalized Gaussian triple.
pub fn random_direction<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Direction<T> {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        if let Ok(d) = Direction::normalized(T::lit(v[0]), T::lit(v[1]), T::lit(v[2])) {
            return d;
        }
    }
}

/// Unitary from Gaussian generator coefficients of scale `π`.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<ComplexMatrix<T>> {
    let theta: Vec<T> =
        (0..d * d - 1).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal) * std::f64::consts::PI)).collect();
    unitary_from_params(&theta, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::spectral_residual;
    use crate::rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    type M = ComplexMatrix<f64>;

    fn pm() -> [Complex<f64>; 2] {
        [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]
    }

    #[test]
    fn qubit_observable_axes() {
        assert_eq!(qubit_observable(&Direction::new(0.0, 0.0, 1.0).unwrap()), pauli(3));
        assert_eq!(qubit_observable(&Direction::new(1.0, 0.0, 0.0).unwrap()), pauli(1));
        let n = Direction::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).unwrap();
        let o = qubit_observable(&n);
        let oracle = (&pauli::<f64>(1) + &pauli::<f64>(2)).scale_real(FRAC_1_SQRT_2);
        assert!((&o - &oracle).frobenius_norm() < 1e-15);
        assert!(spectral_residual(&o, &pm()) <= 1e-12);
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(Direction::new(1.0, 1.0, 0.0), Err(Error::NonUnitDirection { .. })));
        assert!(Direction::<f64>::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn qutrit_observable_identity_basis() {
        let h = QutritObservable::new(M::identity(3), OutcomeSpectrum::Hermitian012).unwrap();
        assert_eq!(h.operator(), M::from_real_diag(&[0.0, 1.0, 2.0]));
        let u = QutritObservable::new(M::identity(3), OutcomeSpectrum::UnitaryRoots).unwrap();
        let w = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let oracle = M::from_diag(&[Complex::new(1.0, 0.0), w, w * w]);
        assert!((&u.operator() - &oracle).frobenius_norm() < 1e-15);
    }

    #[test]
    fn qutrit_observable_random_basis_spectrum() {
        let mut r = rng::stream(3, 0);
        let roots: [Complex<f64>; 3] = OutcomeSpectrum::Hermitian012.values();
        for _ in 0..20 {
            let u = random_unitary::<f64, _>(&mut r, 3).unwrap();
            let o = QutritObservable::new(u, OutcomeSpectrum::Hermitian012).unwrap().operator();
            assert!(spectral_residual(&o, &roots) <= 1e-10);
            assert!(o.hermiticity_residual() <= 1e-12);
        }
    }

    #[test]
    fn non_unitary_basis_rejected() {
        let bad = M::from_real_diag(&[1.0, 2.0, 1.0]);
        assert!(matches!(QutritObservable::new(bad, OutcomeSpectrum::Hermitian012), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn unitary_from_params_cases() {
        assert_eq!(unitary_from_params(&[0.0; 8], 3).unwrap(), M::identity(3));
        let u = unitary_from_params(&[FRAC_PI_2, 0.0, 0.0], 2).unwrap();
        let oracle = pauli::<f64>(1).scale(Complex::new(0.0, 1.0));
        assert!((&u - &oracle).frobenius_norm() < 1e-14);
        assert!(matches!(unitary_from_params(&[0.0; 7], 3), Err(Error::WrongParamCount { expected: 8, got: 7 })));
        assert!(matches!(unitary_from_params(&[0.0; 15], 4), Err(Error::UnsupportedDimension(4))));
    }

    #[test]
    fn random_direction_statistics() {
        let mut r = rng::stream(11, 0);
        let mut sums = [0.0; 3];
        let n = 10_000;
        for _ in 0..n {
            let d: Direction<f64> = random_direction(&mut r);
            let c = d.components();
            assert!((c.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= 1e-12);
            for k in 0..3 {
                sums[k] += c[k];
            }
        }
        for s in sums {
            assert!((s / n as f64).abs() < 0.05);
        }
        let a: Direction<f64> = random_direction(&mut rng::stream(4, 2));
        let b: Direction<f64> = random_direction(&mut rng::stream(4, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn gell_mann_basis_is_traceless_hermitian() {
        for k in 1..=8 {
            let g = gell_mann::<f64>(k);
            assert!(g.trace().norm() < 1e-15);
            assert_eq!(g.hermiticity_residual(), 0.0);
            // Tr(λ_k²) = 2
            assert!(((&g * &g).trace().re - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn generator_combinations_match_basis_sums() {
        let t2 = [0.3, -1.1, 0.8];
        let sum2 = (0..3).fold(M::zeros(2), |acc, k| &acc + &pauli::<f64>(k + 1).scale_real(t2[k]));
        assert!((&pauli_combination(&t2) - &sum2).frobenius_norm() < 1e-15);
        let t3 = [0.3, -1.1, 0.8, 2.0, -0.4, 0.9, 1.7, -2.2];
        let sum3 = (0..8).fold(M::zeros(3), |acc, k| &acc + &gell_mann::<f64>(k + 1).scale_real(t3[k]));
        assert!((&gell_mann_combination(&t3) - &sum3).frobenius_norm() < 1e-15);
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut r = rng::stream(21, 0);
        for _ in 0..50 {
            assert!(random_unitary::<f64, _>(&mut r, 3).unwrap().unitarity_residual() <= 1e-12);
            assert!(random_unitary::<f64, _>(&mut r, 2).unwrap().unitarity_residual() <= 1e-12);
        }
    }

    #[test]
    fn spectrum_parsing() {
        assert_eq!("hermitian".parse::<OutcomeSpectrum>().unwrap(), OutcomeSpectrum::Hermitian012);
        assert_eq!("unitary".parse::<OutcomeSpectrum>().unwrap(), OutcomeSpectrum::UnitaryRoots);
        assert!("bogus".parse::<OutcomeSpectrum>().is_err());
    }
}
