//! CHSH Bell operator, its square, and the search for the maximal quantum
//! value.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matkernel::{commutator, expectation, kron, ComplexMatrix, StateVector};
use crate::observables::{pauli, qubit_observable, random_direction, Direction};
use crate::optimize::{maximize, OptimizerConfig};
use crate::scalar::Real;

/// Measurement axes for Alice (`a`, `a′`) and Bob (`b`, `b′`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings<T: Real> {
    pub a: Direction<T>,
    pub a_prime: Direction<T>,
    pub b: Direction<T>,
    pub b_prime: Direction<T>,
}

impl<T: Real> ChshSettings<T> {
    /// `a = z`, `a′ = x`, `b = (x+z)/√2`, `b′ = (z−x)/√2`: maximal for `Φ⁺`.
    pub fn optimal() -> Self {
        let h = T::FRAC_1_SQRT_2();
        let (o, l) = (T::zero(), T::one());
        Self {
            a: Direction::new(o, o, l).unwrap(),
            a_prime: Direction::new(l, o, o).unwrap(),
            b: Direction::new(h, o, h).unwrap(),
            b_prime: Direction::new(-h, o, h).unwrap(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            a: random_direction(rng),
            a_prime: random_direction(rng),
            b: random_direction(rng),
            b_prime: random_direction(rng),
        }
    }

    /// Realized `A, A′, B, B′`.
    pub fn observables(&self) -> [ComplexMatrix<T>; 4] {
        [
            qubit_observable(&self.a),
            qubit_observable(&self.a_prime),
            qubit_observable(&self.b),
            qubit_observable(&self.b_prime),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellStateKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellStateKind {
    pub const ALL: [BellStateKind; 4] =
        [BellStateKind::PhiPlus, BellStateKind::PhiMinus, BellStateKind::PsiPlus, BellStateKind::PsiMinus];
}

pub fn bell_state<T: Real>(kind: BellStateKind) -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    let (z, p, m) = (T::zero(), h, -h);
    let amps = match kind {
        BellStateKind::PhiPlus => [p, z, z, p],
        BellStateKind::PhiMinus => [p, z, z, m],
        BellStateKind::PsiPlus => [z, p, p, z],
        BellStateKind::PsiMinus => [z, p, m, z],
    };
    StateVector::new(amps.iter().map(|&x| Complex::new(x, T::zero())).collect()).expect("Bell states are normalized")
}

/// `A⊗B + A⊗B′ + A′⊗B − A′⊗B′`.
pub fn chsh_operator<T: Real>(s: &ChshSettings<T>) -> ComplexMatrix<T> {
    let [a, ap, b, bp] = s.observables();
    let terms = [kron(&a, &b), kron(&a, &bp), kron(&ap, &b), kron(&ap, &bp)];
    &(&(&terms[0] + &terms[1]) + &terms[2]) - &terms[3]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareIdentity<T: Real> {
    /// The CHSH operator multiplied by itself.
    pub direct: ComplexMatrix<T>,
    /// `4·I − [A, A′] ⊗ [B, B′]`.
    pub rhs: ComplexMatrix<T>,
    /// Frobenius norm of `direct − rhs`.
    pub gap: T,
}

pub fn chsh_square_identity<T: Real>(s: &ChshSettings<T>) -> SquareIdentity<T> {
    let b = chsh_operator(s);
    let direct = &b * &b;
    let [a, ap, bb, bp] = s.observables();
    let ca = commutator(&a, &ap).expect("qubit observables share dimension");
    let cb = commutator(&bb, &bp).expect("qubit observables share dimension");
    let rhs = &ComplexMatrix::identity(4).scale_real(T::lit(4.0)) - &kron(&ca, &cb);
    let gap = (&direct - &rhs).frobenius_norm();
    SquareIdentity { direct, rhs, gap }
}

/// `(a×a′)·σ ⊗ (b×b′)·σ`.
///
/// Since `[A, A′] = 2i (a×a′)·σ`, the CHSH square is `4·I + 4·T` with `T` this
/// operator; its expectation is the correlator the deformation rescales.
pub fn cross_correlator<T: Real>(s: &ChshSettings<T>) -> ComplexMatrix<T> {
    let sigma_dot =
        |v: [T; 3]| (1..=3).fold(ComplexMatrix::zeros(2), |acc, k| &acc + &pauli::<T>(k).scale_real(v[k - 1]));
    kron(&sigma_dot(s.a.cross(&s.a_prime)), &sigma_dot(s.b.cross(&s.b_prime)))
}

/// Which states the maximization ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSearch {
    /// The four Bell states.
    BellFamily,
    /// All two-qubit pure states (six real parameters).
    PureStates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingsConstraint {
    Free,
    /// Forces `a′ = a`, so Alice's observables commute.
    CommutingAlice,
}

#[derive(Debug, Clone)]
pub struct TsirelsonSearch {
    pub config: OptimizerConfig,
    pub states: StateSearch,
    pub constraint: SettingsConstraint,
}

impl Default for TsirelsonSearch {
    fn default() -> Self {
        Self {
            config: OptimizerConfig::default(),
            states: StateSearch::BellFamily,
            constraint: SettingsConstraint::Free,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsirelsonResult<T: Real> {
    pub value: T,
    pub settings: ChshSettings<T>,
    pub state: StateVector<T>,
    pub bell_kind: Option<BellStateKind>,
    pub evals: usize,
    /// Set when an unconstrained search never exceeded the classical bound 2.
    pub flagged: bool,
}

fn settings_from_angles<T: Real>(x: &[T], constraint: SettingsConstraint) -> ChshSettings<T> {
    let dir = |i: usize| Direction::from_spherical(x[2 * i], x[2 * i + 1]);
    match constraint {
        SettingsConstraint::Free => ChshSettings { a: dir(0), a_prime: dir(1), b: dir(2), b_prime: dir(3) },
        SettingsConstraint::CommutingAlice => {
            let a = dir(0);
            ChshSettings { a, a_prime: a, b: dir(1), b_prime: dir(2) }
        }
    }
}

/// Two-qubit pure state from three hyperspherical magnitudes and three relative phases.
pub fn pure_state_from_params<T: Real>(x: &[T]) -> StateVector<T> {
    let (s1, c1) = x[0].sin_cos();
    let (s2, c2) = x[1].sin_cos();
    let (s3, c3) = x[2].sin_cos();
    let mags = [c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3];
    let amps = (0..4)
        .map(|k| if k == 0 { Complex::new(mags[0], T::zero()) } else { Complex::from_polar(mags[k], x[2 + k]) })
        .collect();
    StateVector::normalized(amps).expect("hyperspherical amplitudes have unit norm")
}

fn best_bell<T: Real>(op: &ComplexMatrix<T>) -> (T, BellStateKind) {
    BellStateKind::ALL
        .iter()
        .map(|&k| (expectation(op, &bell_state(k)).expect("4-dim state").re, k))
        .fold(None, |best: Option<(T, BellStateKind)>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        })
        .expect("four Bell states")
}

/// Maximizes `⟨B_CHSH⟩` over measurement directions and the chosen state family.
pub fn tsirelson_max<T: Real>(search: &TsirelsonSearch, seed: u64) -> Result<TsirelsonResult<T>> {
    let n_angles = match search.constraint {
        SettingsConstraint::Free => 8,
        SettingsConstraint::CommutingAlice => 6,
    };
    let n = n_angles + if search.states == StateSearch::PureStates { 6 } else { 0 };
    let objective = |x: &[T]| -> T {
        let s = settings_from_angles(x, search.constraint);
        let op = chsh_operator(&s);
        match search.states {
            StateSearch::BellFamily => best_bell(&op).0,
            StateSearch::PureStates => {
                expectation(&op, &pure_state_from_params(&x[n_angles..])).expect("4-dim state").re
            }
        }
    };
    let m = maximize(objective, n, &search.config, seed)?;
    let settings = settings_from_angles(&m.best_point, search.constraint);
    let (state, bell_kind) = match search.states {
        StateSearch::BellFamily => {
            let (_, k) = best_bell(&chsh_operator(&settings));
            (bell_state(k), Some(k))
        }
        StateSearch::PureStates => (pure_state_from_params(&m.best_point[n_angles..]), None),
    };
    let flagged = search.constraint == SettingsConstraint::Free && m.best_value <= T::lit(2.0) + T::tolerance();
    Ok(TsirelsonResult { value: m.best_value, settings, state, bell_kind, evals: m.evals, flagged })
}
