use nalgebra::Vector3;

use super::RJComponents;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Excitation-block state `ρ = ½(b₀ + b⃗·σ⃗) + (1 − b₀)|↓↓⟩⟨↓↓|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T> {
    pub b0: T,
    pub b: Vector3<T>,
}

impl<T: Real> BlochState<T> {
    /// `|↑↓⟩`: `b₀ = 1`, `b⃗ = ẑ`.
    pub fn sender_excited() -> Self {
        Self {
            b0: T::one(),
            b: Vector3::z(),
        }
    }

    /// Population of `|↓↑⟩`.
    pub fn success(&self) -> T {
        (self.b0 - self.b.z) / T::lit(2.0)
    }

    /// Unit vector along `b⃗` (zero if `b⃗ = 0`).
    pub fn direction(&self) -> Vector3<T> {
        let n = self.b.norm();
        if n > T::zero() {
            self.b / n
        } else {
            Vector3::zeros()
        }
    }
}

/// `ḃ₀ = −½R₀b₀ − ½R⃗·b⃗`, `ḃ⃗ = J⃗×b⃗ − ½R₀b⃗ − ½b₀R⃗`.
pub fn bloch_rhs<T: Real>(state: &BlochState<T>, rj: &RJComponents<T>) -> (T, Vector3<T>) {
    let half = T::lit(0.5);
    let db0 = -(rj.r0 * state.b0 + rj.r.dot(&state.b)) * half;
    let db = rj.j.cross(&state.b) - state.b * (half * rj.r0) - rj.r * (half * state.b0);
    (db0, db)
}

/// `b₀(t) = b₀(0) exp[−½∫(R₀ + R⃗·e⃗_b)]` by trapezoidal quadrature over
/// the samples. Requires a pure initial state, `‖b⃗(0)‖ = b₀(0)`.
pub fn b0_closed_form<T: Real>(
    times: &[T],
    states: &[BlochState<T>],
    rj: &[RJComponents<T>],
) -> Result<Vec<T>> {
    if times.len() != states.len() || times.len() != rj.len() {
        return Err(Error::DimensionMismatch(
            "times, states and R samples must have equal length".into(),
        ));
    }
    let Some(first) = states.first() else {
        return Ok(Vec::new());
    };
    let norm = first.b.norm();
    if !((norm - first.b0).abs() <= T::lit(1e-12)) {
        return Err(Error::InitialConditionMismatch {
            norm: norm.as_f64(),
            b0: first.b0.as_f64(),
        });
    }
    let rate = |k: usize| rj[k].r0 + rj[k].r.dot(&states[k].direction());
    let half = T::lit(0.5);
    let mut integral = T::zero();
    let mut out = Vec::with_capacity(times.len());
    out.push(first.b0);
    for k in 1..times.len() {
        integral += (times[k] - times[k - 1]) * (rate(k - 1) + rate(k)) * half;
        out.push(first.b0 * (-half * integral).exp());
    }
    Ok(out)
}
