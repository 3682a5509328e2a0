//! The two-party, two-setting, three-outcome Bell operator `C₂₂₃`, the
//! anticommutator form of its square, and the `G` correlator that carries the
//! leading deformation of that square.
//!
//! The operator and the square form are built independently. They are not
//! equal in general: with every observable set to the identity the operator is
//! `2·I` (square `4·I`) while the square form gives `12·I`. [`square_gap`]
//! measures the difference.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{complex_anticommutator, expectation, kron, ComplexMatrix, StateVector};
use crate::observables::{unitary_from_params, OutcomeSpectrum, QutritObservable};
use crate::optimize::{maximize, OptimizerConfig};
use crate::scalar::Real;

/// Alice's `A`, `A′` and Bob's `B`, `B′` as realized 3×3 operators.
#[derive(Debug, Clone, PartialEq)]
pub struct CglmpSettings<T: Real> {
    pub a: ComplexMatrix<T>,
    pub a_prime: ComplexMatrix<T>,
    pub b: ComplexMatrix<T>,
    pub b_prime: ComplexMatrix<T>,
    spectrum: Option<OutcomeSpectrum>,
}

impl<T: Real> CglmpSettings<T> {
    /// Settings from four observables sharing one outcome convention.
    pub fn from_observables(obs: [&QutritObservable<T>; 4]) -> Result<Self> {
        let spectrum = obs[0].spectrum();
        if obs.iter().any(|o| o.spectrum() != spectrum) {
            return Err(Error::InvalidParams("all four observables must share one outcome convention".into()));
        }
        Ok(Self {
            a: obs[0].operator(),
            a_prime: obs[1].operator(),
            b: obs[2].operator(),
            b_prime: obs[3].operator(),
            spectrum: Some(spectrum),
        })
    }

    /// Settings from arbitrary 3×3 matrices (no outcome convention attached).
    pub fn from_matrices(
        a: ComplexMatrix<T>,
        a_prime: ComplexMatrix<T>,
        b: ComplexMatrix<T>,
        b_prime: ComplexMatrix<T>,
    ) -> Result<Self> {
        for m in [&a, &a_prime, &b, &b_prime] {
            if m.dim() != 3 {
                return Err(Error::DimensionMismatch { left: m.dim(), right: 3 });
            }
        }
        Ok(Self { a, a_prime, b, b_prime, spectrum: None })
    }

    /// The same matrix for all four settings.
    pub fn uniform(m: ComplexMatrix<T>) -> Result<Self> {
        Self::from_matrices(m.clone(), m.clone(), m.clone(), m)
    }

    /// `A = A′ = B = B′ = diag(0, 1, 2)`, the `l_z` configuration.
    pub fn lz_example() -> Self {
        Self::uniform(ComplexMatrix::from_real_diag(&[T::zero(), T::one(), T::lit(2.0)])).expect("3×3")
    }

    pub fn spectrum(&self) -> Option<OutcomeSpectrum> {
        self.spectrum
    }

    pub fn alice_anticommutator(&self) -> ComplexMatrix<T> {
        complex_anticommutator(&self.a, &self.a_prime).expect("3×3 settings")
    }

    pub fn bob_anticommutator(&self) -> ComplexMatrix<T> {
        complex_anticommutator(&self.b, &self.b_prime).expect("3×3 settings")
    }
}

/// Local operator slots: 0 = I, 1 = X, 2 = X², 3 = X′, 4 = X′².
type Slot = u8;

/// `(coefficient numerator over 4, Alice slot, Bob slot)`, term by term.
const C223_TERMS: [(i8, Slot, Slot); 19] = [
    (8, 0, 0),
    (-12, 2, 0),
    (-12, 0, 4),
    (3, 1, 1),
    (3, 2, 1),
    (-3, 3, 1),
    (-3, 4, 1),
    (-3, 1, 2),
    (3, 3, 2),
    (3, 1, 3),
    (-3, 2, 3),
    (3, 3, 3),
    (3, 4, 3),
    (3, 1, 4),
    (-3, 3, 4),
    (9, 2, 2),
    (-9, 4, 2),
    (9, 2, 4),
    (9, 4, 4),
];

fn local_slots<T: Real>(x: &ComplexMatrix<T>, x_prime: &ComplexMatrix<T>) -> [ComplexMatrix<T>; 5] {
    [ComplexMatrix::identity(3), x.clone(), x * x, x_prime.clone(), x_prime * x_prime]
}

/// `C₂₂₃` as a 9×9 operator; single-party terms carry the other party's identity.
pub fn c223_operator<T: Real>(s: &CglmpSettings<T>) -> ComplexMatrix<T> {
    let alice = local_slots(&s.a, &s.a_prime);
    let bob = local_slots(&s.b, &s.b_prime);
    let quarter = T::lit(0.25);
    C223_TERMS.iter().fold(ComplexMatrix::zeros(9), |acc, &(c, i, j)| {
        &acc + &kron(&alice[i as usize], &bob[j as usize]).scale_real(T::from_i8(c).unwrap() * quarter)
    })
}

/// `3·I + (I + {{A, A′}}) ⊗ (I + {{B, B′}})`.
pub fn c223_square_rhs<T: Real>(s: &CglmpSettings<T>) -> ComplexMatrix<T> {
    let left = s.alice_anticommutator().add_identity(T::one());
    let right = s.bob_anticommutator().add_identity(T::one());
    kron(&left, &right).add_identity(T::lit(3.0))
}

/// `‖C₂₂₃² − (3·I + (I + {{A,A′}}) ⊗ (I + {{B,B′}}))‖_F`.
pub fn square_gap<T: Real>(s: &CglmpSettings<T>) -> T {
    let c = c223_operator(s);
    (&(&c * &c) - &c223_square_rhs(s)).frobenius_norm()
}

/// `(√11 − √3)/2`.
pub fn optimal_gamma<T: Real>() -> T {
    (T::lit(11.0).sqrt() - T::lit(3.0).sqrt()) / T::lit(2.0)
}

/// `2(5 − γ²)/3`.
pub fn optimal_value<T: Real>(gamma: T) -> T {
    T::lit(2.0) * (T::lit(5.0) - gamma * gamma) / T::lit(3.0)
}

/// Schmidt coefficients `(1, γ, 1)/√(2+γ²)` of the optimal-state family.
pub fn optimal_coefficients<T: Real>(gamma: T) -> [T; 3] {
    let norm = (T::lit(2.0) + gamma * gamma).sqrt();
    [T::one() / norm, gamma / norm, T::one() / norm]
}

/// `(|00⟩ + γ|11⟩ + |22⟩)/√(2+γ²)`.
pub fn optimal_state<T: Real>(gamma: T) -> Result<StateVector<T>> {
    if !gamma.is_finite() {
        return Err(Error::NonFinite { context: "gamma" });
    }
    let c = optimal_coefficients(gamma);
    let mut amps = vec![Complex::new(T::zero(), T::zero()); 9];
    for k in 0..3 {
        amps[4 * k] = Complex::new(c[k], T::zero());
    }
    StateVector::normalized(amps)
}

/// `{{A,A′}}⊗I + I⊗{{B,B′}} + 2·{{A,A′}}⊗{{B,B′}}`.
pub fn g_operator<T: Real>(s: &CglmpSettings<T>) -> ComplexMatrix<T> {
    let ka = s.alice_anticommutator();
    let kb = s.bob_anticommutator();
    let id = ComplexMatrix::identity(3);
    &(&kron(&ka, &id) + &kron(&id, &kb)) + &kron(&ka, &kb).scale_real(T::lit(2.0))
}

/// `⟨G⟩` in `psi`.
pub fn g_correlator<T: Real>(s: &CglmpSettings<T>, psi: &StateVector<T>) -> Result<T> {
    Ok(expectation(&g_operator(s), psi)?.re)
}

/// `⟨C₂₂₃⟩` for a state `Σ_k c_k |kk⟩`, using `⟨X⊗Y⟩ = Σ_{kl} c̄_k c_l X_kl Y_kl`.
pub fn c223_expectation_schmidt<T: Real>(s: &CglmpSettings<T>, coeffs: &[Complex<T>; 3]) -> Complex<T> {
    let alice = local_slots(&s.a, &s.a_prime);
    let bob = local_slots(&s.b, &s.b_prime);
    let mut weights = [[Complex::new(T::zero(), T::zero()); 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            weights[k][l] = coeffs[k].conj() * coeffs[l];
        }
    }
    let quarter = T::lit(0.25);
    C223_TERMS.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(c, i, j)| {
        let (x, y) = (&alice[i as usize], &bob[j as usize]);
        let mut e = Complex::new(T::zero(), T::zero());
        for k in 0..3 {
            for l in 0..3 {
                e = e + weights[k][l] * x.get(k, l) * y.get(k, l);
            }
        }
        acc + e * (T::from_i8(c).unwrap() * quarter)
    })
}

#[derive(Debug, Clone)]
pub struct CglmpSearch<T: Real> {
    pub config: OptimizerConfig,
    /// Fixes γ instead of optimizing it.
    pub pinned_gamma: Option<T>,
}

impl<T: Real> Default for CglmpSearch<T> {
    fn default() -> Self {
        Self { config: OptimizerConfig::default(), pinned_gamma: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CglmpMaxReport {
    pub convention: OutcomeSpectrum,
    pub value: f64,
    pub imaginary_part: f64,
    pub gamma: f64,
    pub evals: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct CglmpMax<T: Real> {
    pub convention: OutcomeSpectrum,
    /// Best `Re⟨C₂₂₃⟩`.
    pub value: T,
    /// Imaginary part of `⟨C₂₂₃⟩` at the optimum.
    pub imaginary_part: T,
    pub settings: CglmpSettings<T>,
    pub gamma: T,
    pub evals: usize,
    /// No restart exceeded the classical value 2.
    pub flagged: bool,
}

impl<T: Real> CglmpMax<T> {
    pub fn report(&self) -> CglmpMaxReport {
        CglmpMaxReport {
            convention: self.convention,
            value: self.value.to_f64_lossy(),
            imaginary_part: self.imaginary_part.to_f64_lossy(),
            gamma: self.gamma.to_f64_lossy(),
            evals: self.evals,
            flagged: self.flagged,
        }
    }
}

fn settings_from_params<T: Real>(x: &[T], convention: OutcomeSpectrum) -> CglmpSettings<T> {
    let obs: Vec<QutritObservable<T>> = (0..4)
        .map(|k| {
            let u = unitary_from_params(&x[8 * k..8 * k + 8], 3).expect("eight finite parameters");
            // exp of an anti-Hermitian generator is unitary to rounding.
            QutritObservable::new(u, convention).expect("exponential map yields unitaries")
        })
        .collect();
    CglmpSettings::from_observables([&obs[0], &obs[1], &obs[2], &obs[3]]).expect("shared convention")
}

fn schmidt<T: Real>(gamma: T) -> [Complex<T>; 3] {
    optimal_coefficients(gamma).map(|c| Complex::new(c, T::zero()))
}

/// Maximizes `Re⟨C₂₂₃⟩` over four Gell-Mann-parametrized bases (and γ unless
/// pinned), with the state restricted to the optimal-state family.
pub fn cglmp_max<T: Real>(convention: OutcomeSpectrum, search: &CglmpSearch<T>, seed: u64) -> Result<CglmpMax<T>> {
    let n = 32 + usize::from(search.pinned_gamma.is_none());
    let gamma_of = |x: &[T]| search.pinned_gamma.unwrap_or_else(|| x[32]);
    let objective = |x: &[T]| c223_expectation_schmidt(&settings_from_params(x, convention), &schmidt(gamma_of(x))).re;
    let m = maximize(objective, n, &search.config, seed)?;
    let gamma = gamma_of(&m.best_point);
    let settings = settings_from_params(&m.best_point, convention);
    let value = c223_expectation_schmidt(&settings, &schmidt(gamma));
    Ok(CglmpMax {
        convention,
        value: value.re,
        imaginary_part: value.im,
        settings,
        gamma,
        evals: m.evals,
        flagged: !m.restarts.iter().any(|r| r.value > T::lit(2.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::spectral_residual;
    use crate::observables::random_unitary;
    use crate::rng;

    type M = ComplexMatrix<f64>;

    fn max_entangled() -> StateVector<f64> {
        optimal_state(1.0).unwrap()
    }

    fn random_settings(convention: OutcomeSpectrum, seed: u64) -> CglmpSettings<f64> {
        let mut r = rng::stream(seed, 0);
        let obs: Vec<_> =
            (0..4).map(|_| QutritObservable::new(random_unitary(&mut r, 3).unwrap(), convention).unwrap()).collect();
        CglmpSettings::from_observables([&obs[0], &obs[1], &obs[2], &obs[3]]).unwrap()
    }

    #[test]
    fn zero_observables() {
        let s = CglmpSettings::uniform(M::zeros(3)).unwrap();
        assert_eq!(c223_operator(&s), M::identity(9).scale_real(2.0));
        assert_eq!(c223_square_rhs(&s), M::identity(9).scale_real(4.0));
        assert_eq!(square_gap(&s), 0.0);
        assert_eq!(g_correlator(&s, &max_entangled()).unwrap(), 0.0);
    }

    #[test]
    fn identity_observables() {
        let s = CglmpSettings::uniform(M::identity(3)).unwrap();
        assert!((&c223_operator(&s) - &M::identity(9).scale_real(2.0)).frobenius_norm() < 1e-15);
        assert!((&c223_square_rhs(&s) - &M::identity(9).scale_real(12.0)).frobenius_norm() < 1e-15);
        assert!((square_gap(&s) - 24.0).abs() < 1e-13);
        assert!((g_correlator(&s, &max_entangled()).unwrap() - 12.0).abs() < 1e-14);
    }

    /// Scalar oracle: for diagonal observables and ψ = Σ|kk⟩/√3 every ⟨X⊗Y⟩ is
    /// the mean of x_k·y_k, so ⟨C₂₂₃⟩ is the mean of the printed polynomial.
    fn lz_c223_oracle() -> f64 {
        let c = |a: f64, ap: f64, b: f64, bp: f64| {
            2.0 - 3.0 * (a * a + bp * bp)
                + 0.75
                    * (a * b + a * a * b - ap * b - ap * ap * b - a * b * b + ap * b * b + a * bp - a * a * bp
                        + ap * bp
                        + ap * ap * bp
                        + a * bp * bp
                        - ap * bp * bp)
                + 2.25 * (a * a * b * b - ap * ap * b * b + a * a * bp * bp + ap * ap * bp * bp)
        };
        (0..3).map(|k| c(k as f64, k as f64, k as f64, k as f64)).sum::<f64>() / 3.0
    }

    #[test]
    fn lz_example_values() {
        let s = CglmpSettings::<f64>::lz_example();
        let psi = max_entangled();
        let c = expectation(&c223_operator(&s), &psi).unwrap();
        assert!((c.re - lz_c223_oracle()).abs() < 1e-12);
        let rhs = expectation(&c223_square_rhs(&s), &psi).unwrap();
        assert!((rhs.re - 100.0 / 3.0).abs() < 1e-12);
        assert!((g_correlator(&s, &psi).unwrap() - 52.0).abs() < 1e-12);
    }

    #[test]
    fn lz_anticommutator_is_twice_square() {
        let s = CglmpSettings::<f64>::lz_example();
        assert_eq!(s.alice_anticommutator(), M::from_real_diag(&[0.0, 2.0, 8.0]));
    }

    #[test]
    fn optimal_state_family() {
        let g: f64 = optimal_gamma();
        assert!((g - 0.7923).abs() < 1e-4);
        assert!((optimal_value(g) - 2.9149).abs() < 1e-4);
        for gamma in [0.0f64, 0.7923, 1.0, 10.0] {
            assert!((optimal_state(gamma).unwrap().norm() - 1.0).abs() <= 1e-12);
        }
        let s = optimal_state(1.0).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert!((s.amplitudes()[0].re - t).abs() < 1e-15 && (s.amplitudes()[8].re - t).abs() < 1e-15);
        assert!(optimal_state(f64::NAN).is_err());
    }

    #[test]
    fn hermiticity_by_convention() {
        for seed in 0..10 {
            let h = random_settings(OutcomeSpectrum::Hermitian012, seed);
            assert!(c223_operator(&h).hermiticity_residual() <= 1e-12);
            assert!(c223_square_rhs(&h).hermiticity_residual() <= 1e-12);
            let u = random_settings(OutcomeSpectrum::UnitaryRoots, seed);
            assert!(c223_square_rhs(&u).hermiticity_residual() <= 1e-12);
            let g = g_operator(&u);
            assert!(g.hermiticity_residual() <= 1e-12);
        }
    }

    #[test]
    fn schmidt_fast_path_matches_full_operator() {
        for (seed, conv) in OutcomeSpectrum::ALL.iter().enumerate() {
            let s = random_settings(*conv, 20 + seed as u64);
            let gamma = 0.4 + seed as f64;
            let full = expectation(&c223_operator(&s), &optimal_state(gamma).unwrap()).unwrap();
            let fast = c223_expectation_schmidt(&s, &schmidt(gamma));
            assert!((full - fast).norm() < 1e-12);
        }
    }

    #[test]
    fn product_eigenvector_enumeration() {
        // A = A′ and B = B′ with outcomes {0,1,2}: {{A,A}} = 2A², so the square
        // form on u_i ⊗ v_j is 3 + (1 + 2a_i²)(1 + 2b_j²).
        let mut r = rng::stream(8, 0);
        let ua = random_unitary::<f64, _>(&mut r, 3).unwrap();
        let ub = random_unitary::<f64, _>(&mut r, 3).unwrap();
        let a = QutritObservable::new(ua.clone(), OutcomeSpectrum::Hermitian012).unwrap();
        let b = QutritObservable::new(ub.clone(), OutcomeSpectrum::Hermitian012).unwrap();
        let s = CglmpSettings::from_observables([&a, &a, &b, &b]).unwrap();
        let rhs = c223_square_rhs(&s);
        let column = |u: &M, k: usize| StateVector::new((0..3).map(|i| u.get(i, k)).collect()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let psi = column(&ua, i).tensor(&column(&ub, j));
                let (ai, bj) = (i as f64, j as f64);
                let expected = 3.0 + (1.0 + 2.0 * ai * ai) * (1.0 + 2.0 * bj * bj);
                assert!((expectation(&rhs, &psi).unwrap().re - expected).abs() < 1e-10);
            }
        }
        assert!(spectral_residual(&a.operator(), &OutcomeSpectrum::Hermitian012.values()) < 1e-10);
    }

    #[test]
    fn mixed_conventions_rejected() {
        let h = QutritObservable::new(M::identity(3), OutcomeSpectrum::Hermitian012).unwrap();
        let u = QutritObservable::new(M::identity(3), OutcomeSpectrum::UnitaryRoots).unwrap();
        assert!(CglmpSettings::from_observables([&h, &h, &h, &u]).is_err());
        assert!(CglmpSettings::from_matrices(M::identity(2), M::identity(3), M::identity(3), M::identity(3)).is_err());
    }
}
