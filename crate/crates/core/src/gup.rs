//! Minimal-length deformations of the spin and angular-momentum algebra and
//! their effect on the squared Bell operators.
//!
//! Momentum enters only as a plane-wave label: the deformed momentum is
//! `P = p·(1 + f(p))` with `f(p) = α·p + β·p²`, and deformed spin or angular
//! momentum observables rescale commutators by `g = (1 + f(P))/(1 + f(p))`
//! (anticommutators by `g²`). Every deformed quantity is returned as the
//! undeformed value plus a separately computed shift, so corrections far below
//! the rounding level of the total remain resolvable.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cglmp::{c223_square_rhs, g_correlator, CglmpSettings};
use crate::chsh::{chsh_square_identity, cross_correlator, ChshSettings};
use crate::error::{Error, Result};
use crate::matkernel::{commutator, expectation, kron, ComplexMatrix, StateVector};
use crate::observables::pauli;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GupModel {
    /// `f(p) = β·p²`.
    Quadratic,
    /// `f(p) = α·p + β·p²`.
    LinearQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GupParams<T: Real> {
    model: GupModel,
    alpha: T,
    beta: T,
}

impl<T: Real> GupParams<T> {
    pub fn quadratic(beta: T) -> Result<Self> {
        Self::new(GupModel::Quadratic, T::zero(), beta)
    }

    pub fn linear_quadratic(alpha: T, beta: T) -> Result<Self> {
        Self::new(GupModel::LinearQuadratic, alpha, beta)
    }

    pub fn undeformed() -> Self {
        Self { model: GupModel::Quadratic, alpha: T::zero(), beta: T::zero() }
    }

    pub fn new(model: GupModel, alpha: T, beta: T) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite { context: "deformation parameters" });
        }
        if alpha < T::zero() || beta < T::zero() {
            return Err(Error::InvalidParams("alpha and beta must be nonnegative".into()));
        }
        if model == GupModel::Quadratic && alpha != T::zero() {
            return Err(Error::InvalidParams("the quadratic model has alpha = 0".into()));
        }
        Ok(Self { model, alpha, beta })
    }

    pub fn model(&self) -> GupModel {
        self.model
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

/// Momentum magnitude of each particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics<T: Real> {
    pub p1: T,
    pub p2: T,
}

impl<T: Real> Kinematics<T> {
    pub fn new(p1: T, p2: T) -> Result<Self> {
        for p in [p1, p2] {
            check_momentum(p)?;
        }
        Ok(Self { p1, p2 })
    }

    pub fn equal(p: T) -> Result<Self> {
        Self::new(p, p)
    }

    fn common(&self) -> Result<T> {
        if self.p1 != self.p2 {
            return Err(Error::UnequalMomenta { p1: self.p1.to_f64_lossy(), p2: self.p2.to_f64_lossy() });
        }
        Ok(self.p1)
    }
}

fn check_momentum<T: Real>(p: T) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::NonFinite { context: "momentum" });
    }
    if p < T::zero() {
        return Err(Error::InvalidParams("momentum must be nonnegative".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Unexpanded deformation ratios.
    Exact,
    /// Leading-order series with equal momenta.
    Series2,
}

/// A deformed expectation split as `undeformed + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformed<T: Real> {
    pub undeformed: T,
    pub shift: T,
}

impl<T: Real> Deformed<T> {
    pub fn value(&self) -> T {
        self.undeformed + self.shift
    }
}

/// `f(p) = α·p + β·p²`.
pub fn f_of_p<T: Real>(p: T, params: &GupParams<T>) -> T {
    params.alpha * p + params.beta * p * p
}

/// Deformed momentum `P = p·(1 + f(p))`.
pub fn capital_p<T: Real>(p: T, params: &GupParams<T>) -> T {
    p * (T::one() + f_of_p(p, params))
}

/// `g − 1 = (f(P) − f(p))/(1 + f(p))`, evaluated without cancellation.
pub fn g_factor_excess<T: Real>(p: T, params: &GupParams<T>) -> T {
    let f = f_of_p(p, params);
    // P − p and P² − p² = (P − p)(P + p), both formed from the increment directly.
    let dp = p * f;
    let df = params.alpha * dp + params.beta * dp * (p + p + dp);
    df / (T::one() + f)
}

/// Commutator rescaling `g = (1 + f(P))/(1 + f(p))`.
pub fn g_factor<T: Real>(p: T, params: &GupParams<T>) -> T {
    T::one() + g_factor_excess(p, params)
}

/// `x·y − 1` from `x − 1` and `y − 1`.
fn product_excess<T: Real>(dx: T, dy: T) -> T {
    dx + dy + dx * dy
}

/// Deformed `⟨B²⟩` for a two-qubit state.
///
/// Exact mode: `⟨B²_CHSH⟩ + 4⟨T⟩·(g(p₁)·g(p₂) − 1)`, which equals
/// `4 + 4·g(p₁)·g(p₂)·⟨T⟩` because `B²_CHSH = 4 + 4T`. Series mode:
/// `⟨B²_CHSH⟩ + (8α²p² + 16β²p⁴)·⟨T⟩`.
pub fn deformed_b2<T: Real>(
    state: &StateVector<T>,
    s: &ChshSettings<T>,
    kin: &Kinematics<T>,
    params: &GupParams<T>,
    mode: EvalMode,
) -> Result<Deformed<T>> {
    let undeformed = expectation(&chsh_square_identity(s).direct, state)?.re;
    let t = expectation(&cross_correlator(s), state)?.re;
    let shift = match mode {
        EvalMode::Exact => {
            let excess = product_excess(g_factor_excess(kin.p1, params), g_factor_excess(kin.p2, params));
            T::lit(4.0) * t * excess
        }
        EvalMode::Series2 => {
            let p = kin.common()?;
            let (ap, bp2) = (params.alpha * p, params.beta * p * p);
            (T::lit(8.0) * ap * ap + T::lit(16.0) * bp2 * bp2) * t
        }
    };
    Ok(Deformed { undeformed, shift })
}

/// Deformed square form of `C₂₂₃` (quadratic model only).
///
/// Exact mode: `3 + ⟨(I + h₁{{A,A′}}) ⊗ (I + h₂{{B,B′}})⟩` with `hᵢ = g(pᵢ)²`.
/// Series mode: `⟨C²⟩ + 4β²p⁴·⟨G⟩`.
pub fn deformed_c223_sq<T: Real>(
    state: &StateVector<T>,
    s: &CglmpSettings<T>,
    kin: &Kinematics<T>,
    params: &GupParams<T>,
    mode: EvalMode,
) -> Result<Deformed<T>> {
    if params.model == GupModel::LinearQuadratic {
        return Err(Error::UnsupportedModel);
    }
    let undeformed = expectation(&c223_square_rhs(s), state)?.re;
    let shift = match mode {
        EvalMode::Exact => {
            let h_excess = |p: T| {
                let d = g_factor_excess(p, params);
                product_excess(d, d)
            };
            let (e1, e2) = (h_excess(kin.p1), h_excess(kin.p2));
            let (ka, kb) = (s.alice_anticommutator(), s.bob_anticommutator());
            let id = ComplexMatrix::identity(3);
            let ea = expectation(&kron(&ka, &id), state)?.re;
            let eb = expectation(&kron(&id, &kb), state)?.re;
            let eab = expectation(&kron(&ka, &kb), state)?.re;
            e1 * ea + e2 * eb + product_excess(e1, e2) * eab
        }
        EvalMode::Series2 => {
            let p = kin.common()?;
            let bp2 = params.beta * p * p;
            T::lit(4.0) * bp2 * bp2 * g_correlator(s, state)?
        }
    };
    Ok(Deformed { undeformed, shift })
}

/// Leading-order relative deviation `α²p² + 2β²p⁴` of the deformed CHSH square.
pub fn relative_deviation<T: Real>(p: T, params: &GupParams<T>) -> T {
    let (ap, bp2) = (params.alpha * p, params.beta * p * p);
    ap * ap + T::lit(2.0) * bp2 * bp2
}

/// Largest operator-norm violation of `[S_i, S_j] = i ε_ijk S_k (1 + βP²)`
/// for the deformed spin `S_k = (1 + βp²)·σ_k/2`.
pub fn spin_commutator_residual<T: Real>(beta: T, p: T) -> Result<T> {
    let params = GupParams::quadratic(beta)?;
    check_momentum(p)?;
    let scale = T::one() + beta * p * p;
    let big_p = capital_p(p, &params);
    let deformation = T::one() + beta * big_p * big_p;
    let spin = |k: usize| pauli::<T>(k).scale_real(scale / T::lit(2.0));
    let mut worst = T::zero();
    for (i, j, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        for (x, y, sign) in [(i, j, T::one()), (j, i, -T::one())] {
            let lhs = commutator(&spin(x), &spin(y))?;
            let rhs = spin(k).scale(Complex::new(T::zero(), sign * deformation));
            worst = worst.max((&lhs - &rhs).operator_norm());
        }
    }
    Ok(worst)
}

/// Closed form of [`spin_commutator_residual`]: `βp²·((1+βp²)² − 1)·(1+βp²)/2`.
pub fn spin_commutator_residual_closed_form<T: Real>(beta: T, p: T) -> T {
    let x = beta * p * p;
    let s = T::one() + x;
    x * (s * s - T::one()) * s / T::lit(2.0)
}
