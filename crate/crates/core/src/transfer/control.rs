use super::{QubitControls, RJComponents, TransferCoefficients};
use crate::error::{Error, Result};
use crate::lindblad::Sampled;
use crate::scalar::Real;

/// Receiver schedules that keep the joint state in the dark state while the
/// sender couples at a constant `κ₀` over `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlProtocol<T> {
    pub kappa0: T,
    pub t_final: T,
    pub dt: T,
    pub ratio_db: T,
    pub kappa_b: Sampled<T>,
    pub h_bz: Sampled<T>,
    pub h_az: T,
    /// Phase reference: `φ_a − φ_b = −δ₊`, with `φ_b = 0`.
    pub phi_a: T,
    pub phi_b: T,
    pub warnings: Vec<String>,
}

impl<T: Real> ControlProtocol<T> {
    pub fn controls_at(&self, t: T) -> QubitControls<T> {
        QubitControls {
            kappa_a: self.kappa0,
            kappa_b: self.kappa_b.eval(t),
            phi_a: self.phi_a,
            phi_b: self.phi_b,
            h_az: self.h_az,
            h_bz: self.h_bz.eval(t),
        }
    }

    /// `κ_b(T)/κ₀` in dB.
    pub fn terminal_ratio_db(&self) -> T {
        let last = *self.kappa_b.values.last().expect("non-empty schedule");
        T::lit(10.0) * (last / self.kappa0).log10()
    }

    pub fn n_samples(&self) -> usize {
        self.kappa_b.values.len()
    }
}

/// `κ̇_b = cos(δ₊−δ₋) κ_b (β₋/β₊) ‖R⃗‖²/R₀` with `κ_a = κ₀`.
fn kappa_b_rate<T: Real>(coeffs: &TransferCoefficients<T>, kappa0: T, kb: T) -> T {
    let q = QubitControls {
        phi_a: -coeffs.delta_plus,
        ..QubitControls::rates(kappa0, kb)
    };
    let rj = RJComponents::new(coeffs, &q);
    if rj.r0 == T::zero() {
        return T::zero();
    }
    coeffs.cos_delta() * kb * (coeffs.beta_minus / coeffs.beta_plus) * rj.r.norm_squared() / rj.r0
}

/// Receiver detuning keeping `J_z/R_z = J_x/R_x`.
pub fn dark_h_bz<T: Real>(coeffs: &TransferCoefficients<T>, kappa0: T, kb: T, h_az: T) -> T {
    let ratio = coeffs.dark_ratio();
    kb * (coeffs.eta_b * ratio - coeffs.t_bb.im) - kappa0 * (coeffs.eta_a * ratio - coeffs.t_aa.im) + h_az
}

/// Integrates the receiver-rate ODE with RK4 from `κ_b(0) = κ₀·10^{dB/10}`
/// and samples `κ_b`, `h_bz` on the grid `k·dt`.
pub fn synthesize_controls<T: Real>(
    coeffs: &TransferCoefficients<T>,
    kappa0: T,
    ratio_db: T,
    t_final: T,
    dt: T,
    h_az: T,
) -> Result<ControlProtocol<T>> {
    if !(kappa0 > T::zero()) || !(t_final > T::zero()) || !(dt > T::zero()) {
        return Err(Error::InvalidArgument("kappa0, T and dt must be positive".into()));
    }
    if !(coeffs.beta_plus > T::zero()) {
        return Err(Error::DegenerateBeta);
    }
    if !(coeffs.eta_a > T::zero()) || !(coeffs.eta_b > T::zero()) {
        return Err(Error::NonPositivePurcell {
            eta_a: coeffs.eta_a.as_f64(),
            eta_b: coeffs.eta_b.as_f64(),
        });
    }
    let cos_delta = coeffs.cos_delta();
    if !(cos_delta < T::zero()) {
        return Err(Error::WrongDirectionality {
            cos_delta: cos_delta.as_f64(),
        });
    }

    let n = (t_final / dt).round().to_usize().unwrap_or(0).max(1);
    let h = t_final / T::lit(n as f64);
    let f = |kb: T| kappa_b_rate(coeffs, kappa0, kb);
    let two = T::lit(2.0);
    let six = T::lit(6.0);

    let mut kb = kappa0 * T::lit(10.0).powf(ratio_db / T::lit(10.0));
    let mut values = Vec::with_capacity(n + 1);
    values.push(kb);
    for _ in 0..n {
        let k1 = f(kb);
        let k2 = f(kb + h / two * k1);
        let k3 = f(kb + h / two * k2);
        let k4 = f(kb + h * k3);
        kb += h / six * (k1 + two * (k2 + k3) + k4);
        if !(kb > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "kappa_b left the positive axis ({:.3e}); reduce dt",
                kb.as_f64()
            )));
        }
        values.push(kb);
    }
    let h_values = values
        .iter()
        .map(|&kb| dark_h_bz(coeffs, kappa0, kb, h_az))
        .collect();

    let mut protocol = ControlProtocol {
        kappa0,
        t_final,
        dt: h,
        ratio_db,
        kappa_b: Sampled::new(T::zero(), h, values)?,
        h_bz: Sampled::new(T::zero(), h, h_values)?,
        h_az,
        phi_a: -coeffs.delta_plus,
        phi_b: T::zero(),
        warnings: Vec::new(),
    };
    let terminal = protocol.terminal_ratio_db();
    if terminal > T::lit(-15.0) {
        protocol.warnings.push(format!(
            "kappa_b(T)/kappa0 = {:.2} dB > -15 dB: the pi-pulse is incomplete, increase T",
            terminal.as_f64()
        ));
    }
    Ok(protocol)
}

/// Schedules for a time-dependent sender rate `κ_a(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RemappedControls<T> {
    pub kappa_a: Sampled<T>,
    pub kappa_b: Sampled<T>,
    pub h_bz: Sampled<T>,
    /// Time at which the rescaled clock `∫κ_a/κ₀` reaches `T`.
    pub t_end: T,
}

/// Re-times a constant-`κ₀` protocol for a sender rate `κ_a(t)`: the
/// protocol is a function of `τ = ∫₀ᵗ κ_a(s) ds / κ₀`, and every rate (and
/// detuning) scales with `κ_a(t)/κ₀`. Samples on the grid `k·dt` until `τ`
/// reaches the protocol duration or `t_max` is hit.
pub fn remap_for_sender_rate<T: Real>(
    protocol: &ControlProtocol<T>,
    kappa_a: impl Fn(T) -> T,
    dt: T,
    t_max: T,
) -> Result<RemappedControls<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let k0 = protocol.kappa0;
    let two = T::lit(2.0);
    let mut t = T::zero();
    let mut tau = T::zero();
    let (mut ka_v, mut kb_v, mut h_v) = (Vec::new(), Vec::new(), Vec::new());
    loop {
        let ka = kappa_a(t);
        if ka < T::zero() {
            return Err(Error::NegativeRate(ka.as_f64()));
        }
        let scale = ka / k0;
        ka_v.push(ka);
        kb_v.push(scale * protocol.kappa_b.eval(tau));
        h_v.push(scale * protocol.h_bz.eval(tau));
        if tau >= protocol.t_final || t >= t_max {
            break;
        }
        // trapezoidal clock update
        let next = kappa_a(t + dt);
        tau += dt * (ka + next) / (two * k0);
        t += dt;
    }
    Ok(RemappedControls {
        kappa_a: Sampled::new(T::zero(), dt, ka_v)?,
        kappa_b: Sampled::new(T::zero(), dt, kb_v)?,
        h_bz: Sampled::new(T::zero(), dt, h_v)?,
        t_end: t,
    })
}
