use nalgebra::Vector3;

use super::{qubit_ports, BlochState, ControlProtocol, RJComponents, TransferCoefficients};
use super::bloch::bloch_rhs;
use crate::contraction::ContractionOptions;
use crate::error::{Error, Result};
use crate::lindblad::{
    hz_key, integrate, kappa_key, phi_key, Control, DensityMatrix, IntegrateOptions, OpenSystem,
    Schedule,
};
use crate::network::Network;
use crate::scalar::Real;

/// Slack allowed on `b₀(t) ≤ exp[−∫Γ_d]`.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferSample<T> {
    pub t: T,
    pub state: BlochState<T>,
    pub success: T,
    /// `exp[−∫₀ᵗ Γ_d]`.
    pub dark_bound: T,
    pub rj: RJComponents<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferRun<T> {
    pub samples: Vec<TransferSample<T>>,
    pub success_probability: T,
    pub dark_bound: T,
}

impl<T: Real> TransferRun<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn states(&self) -> Vec<BlochState<T>> {
        self.samples.iter().map(|s| s.state).collect()
    }

    pub fn rj(&self) -> Vec<RJComponents<T>> {
        self.samples.iter().map(|s| s.rj).collect()
    }
}

#[derive(Clone, Copy)]
struct Augmented<T: Real> {
    b0: T,
    b: Vector3<T>,
    /// `∫Γ_d`.
    dark: T,
}

impl<T: Real> Augmented<T> {
    fn axpy(&self, h: T, k: &Augmented<T>) -> Self {
        Self {
            b0: self.b0 + h * k.b0,
            b: self.b + k.b * h,
            dark: self.dark + h * k.dark,
        }
    }
}

fn derivative<T: Real>(s: &Augmented<T>, rj: &RJComponents<T>) -> Augmented<T> {
    let (db0, db) = bloch_rhs(&BlochState { b0: s.b0, b: s.b }, rj);
    Augmented {
        b0: db0,
        b: db,
        dark: rj.gamma_dark(),
    }
}

/// Integrates the Bloch equations under `protocol` from `|↑↓⟩` with RK4,
/// carrying `∫Γ_d` along. Every step is recorded.
pub fn simulate_transfer<T: Real>(
    coeffs: &TransferCoefficients<T>,
    protocol: &ControlProtocol<T>,
    dt: T,
) -> Result<TransferRun<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let n = (protocol.t_final / dt).round().to_usize().unwrap_or(0).max(1);
    let h = protocol.t_final / T::lit(n as f64);
    let rj_at = |t: T| RJComponents::new(coeffs, &protocol.controls_at(t));
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let slack = T::lit(BOUND_SLACK);

    let mut s = Augmented {
        b0: T::one(),
        b: Vector3::z(),
        dark: T::zero(),
    };
    let mut samples = Vec::with_capacity(n + 1);
    let record = |t: T, s: &Augmented<T>, rj: RJComponents<T>| {
        let state = BlochState { b0: s.b0, b: s.b };
        TransferSample {
            t,
            state,
            success: state.success(),
            dark_bound: (-s.dark).exp(),
            rj,
        }
    };
    let mut rj_t = rj_at(T::zero());
    samples.push(record(T::zero(), &s, rj_t));
    for step in 0..n {
        let t = h * T::lit(step as f64);
        let rj_mid = rj_at(t + h / two);
        let t_next = h * T::lit((step + 1) as f64);
        let rj_end = rj_at(t_next);
        let k1 = derivative(&s, &rj_t);
        let k2 = derivative(&s.axpy(h / two, &k1), &rj_mid);
        let k3 = derivative(&s.axpy(h / two, &k2), &rj_mid);
        let k4 = derivative(&s.axpy(h, &k3), &rj_end);
        let mut incr = k1.axpy(two, &k2).axpy(two, &k3).axpy(T::one(), &k4);
        incr.b0 /= six;
        incr.b /= six;
        incr.dark /= six;
        s = s.axpy(h, &incr);
        let sample = record(t_next, &s, rj_end);
        if sample.state.b0 > sample.dark_bound + slack {
            return Err(Error::BoundViolated {
                t: t_next.as_f64(),
                b0: sample.state.b0.as_f64(),
                bound: sample.dark_bound.as_f64(),
            });
        }
        samples.push(sample);
        rj_t = rj_end;
    }
    let last = samples.last().expect("at least the initial sample");
    Ok(TransferRun {
        success_probability: last.success,
        dark_bound: last.dark_bound,
        samples,
    })
}

/// Generic open-system model of a two-qubit network with `½σ_z` drives on
/// both qubits (`hz:<element>`).
pub fn transfer_open_system<T: Real>(
    net: &Network<T>,
    opts: &ContractionOptions<T>,
) -> Result<OpenSystem<T>> {
    qubit_ports(net)?;
    let dims = net.joint_dims();
    let sys = OpenSystem::from_network(net, opts)?;
    Ok(sys
        .with_qubit_hz(&net.systems[0].element, &dims, 0)
        .with_qubit_hz(&net.systems[1].element, &dims, 1))
}

/// Schedule realizing `protocol` on a two-qubit network.
pub fn transfer_schedule<T: Real>(net: &Network<T>, protocol: &ControlProtocol<T>) -> Result<Schedule<T>> {
    let (pa, pb) = qubit_ports(net)?;
    Schedule::new()
        .with(kappa_key(pa), Control::Constant(protocol.kappa0))?
        .with(kappa_key(pb), Control::Sampled(protocol.kappa_b.clone()))?
        .with(phi_key(pa), Control::Constant(protocol.phi_a))?
        .with(phi_key(pb), Control::Constant(protocol.phi_b))?
        .with(hz_key(&net.systems[0].element), Control::Constant(protocol.h_az))?
        .with(hz_key(&net.systems[1].element), Control::Sampled(protocol.h_bz.clone()))
}

/// Runs `protocol` through the full 4-dimensional master equation and
/// returns `(t, b₀, success)` samples.
pub fn lindblad_transfer<T: Real>(
    net: &Network<T>,
    protocol: &ControlProtocol<T>,
    dt: T,
    sample_every: usize,
    opts: &ContractionOptions<T>,
) -> Result<Vec<(T, T, T)>> {
    let sys = transfer_open_system(net, opts)?;
    let sched = transfer_schedule(net, protocol)?;
    // |↑↓⟩ is index 1, |↓↑⟩ index 2 in the joint basis
    let rho0 = DensityMatrix::basis(4, 1)?;
    let traj = integrate(
        &sys,
        &sched,
        &rho0,
        protocol.t_final,
        dt,
        &IntegrateOptions {
            sample_every,
            ..IntegrateOptions::default()
        },
    )?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| (t, rho[(1, 1)].re + rho[(2, 2)].re, rho[(2, 2)].re))
        .collect())
}
