//! Qubit-to-qubit excitation transfer through a contracted network.
//!
//! Two qubits `a` (sender) and `b` (receiver) couple to the network through
//! one port each. Everything about the network that matters for the
//! single-excitation dynamics is captured by the four coefficients
//! `t_jk = T[j, k]` at the qubit ports. Basis of the excitation block:
//! `|0⟩ = |↑↓⟩`, `|1⟩ = |↓↑⟩`.

mod bloch;
mod control;
mod imperfect;
mod master;
mod simulate;

pub use bloch::{b0_closed_form, bloch_rhs, BlochState};
pub use control::{remap_for_sender_rate, synthesize_controls, ControlProtocol, RemappedControls};
pub use imperfect::{
    random_imperfect_network, reflectances, sample_network_class, ImperfectNetwork, NetworkClass,
};
pub use master::{compare_with_generic, specialized_master_equation};
pub use simulate::{
    lindblad_transfer, simulate_transfer, transfer_open_system, transfer_schedule, TransferRun,
    TransferSample,
};

use nalgebra::Vector3;

use crate::contraction::{ContractionOptions, RoutingMatrices};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::scalar::{abs, arg, Real, C};

#[derive(Clone, Debug, PartialEq)]
pub struct TransferCoefficients<T> {
    pub port_a: usize,
    pub port_b: usize,
    pub t_aa: C<T>,
    pub t_ab: C<T>,
    pub t_ba: C<T>,
    pub t_bb: C<T>,
    /// `(j, M_ja, M_jb)` for every external output `j`.
    pub t_out: Vec<(usize, C<T>, C<T>)>,
    pub eta_a: T,
    pub eta_b: T,
    pub beta_plus: T,
    pub beta_minus: T,
    pub delta_plus: T,
    pub delta_minus: T,
}

impl<T: Real> TransferCoefficients<T> {
    /// Builds the derived quantities from the four `t_jk`.
    pub fn from_t(port_a: usize, port_b: usize, t_aa: C<T>, t_ab: C<T>, t_ba: C<T>, t_bb: C<T>) -> Self {
        let two = T::lit(2.0);
        let plus = t_ab.conj() + t_ba;
        let minus = t_ab.conj() - t_ba;
        Self {
            port_a,
            port_b,
            t_aa,
            t_ab,
            t_ba,
            t_bb,
            t_out: Vec::new(),
            eta_a: T::one() + two * t_aa.re,
            eta_b: T::one() + two * t_bb.re,
            beta_plus: abs(plus),
            beta_minus: abs(minus),
            delta_plus: arg(plus),
            delta_minus: arg(minus),
        }
    }

    /// `cos(δ₊ − δ₋)`, the network's non-reciprocity measure.
    pub fn cos_delta(&self) -> T {
        (self.delta_plus - self.delta_minus).cos()
    }

    /// `(β₋/2β₊) sin(δ₊ − δ₋)`, the constant ratio `J_z/R_z = J_x/R_x`
    /// along dark-state protocols.
    pub fn dark_ratio(&self) -> T {
        self.beta_minus / (T::lit(2.0) * self.beta_plus) * (self.delta_plus - self.delta_minus).sin()
    }
}

/// Reads `t_jk` at the two qubit ports.
pub fn extract_coefficients<T: Real>(
    routing: &RoutingMatrices<T>,
    qubit_ports: (usize, usize),
) -> Result<TransferCoefficients<T>> {
    let (a, b) = qubit_ports;
    let n = routing.n_ports();
    if a >= n || b >= n || a == b {
        return Err(Error::NotTwoQubitNetwork(format!(
            "qubit ports ({a}, {b}) invalid for {n} ports"
        )));
    }
    let t = &routing.t;
    let mut coeffs = TransferCoefficients::from_t(a, b, t[(a, a)], t[(a, b)], t[(b, a)], t[(b, b)]);
    coeffs.t_out = routing
        .partition
        .external_outputs
        .iter()
        .map(|&j| (j, routing.g[(j, a)], routing.g[(j, b)]))
        .collect();
    Ok(coeffs)
}

/// Locates the sender and receiver: the network must hold exactly two
/// two-level systems with one coupling each. The first declared system is
/// the sender.
pub fn qubit_ports<T: Real>(net: &Network<T>) -> Result<(usize, usize)> {
    if net.systems.len() != 2 {
        return Err(Error::NotTwoQubitNetwork(format!(
            "found {} local systems",
            net.systems.len()
        )));
    }
    let mut ports = [0usize; 2];
    for (slot, sys) in ports.iter_mut().zip(&net.systems) {
        if sys.dim != 2 || sys.couplings.len() != 1 {
            return Err(Error::NotTwoQubitNetwork(format!(
                "system `{}` has dimension {} and {} couplings",
                sys.element,
                sys.dim,
                sys.couplings.len()
            )));
        }
        *slot = sys.couplings[0].port;
    }
    Ok((ports[0], ports[1]))
}

/// Contracts a two-qubit network and extracts its transfer coefficients.
pub fn network_coefficients<T: Real>(
    net: &Network<T>,
    opts: &ContractionOptions<T>,
) -> Result<TransferCoefficients<T>> {
    let ports = qubit_ports(net)?;
    net.validate(&opts.tol)?;
    let s = net.assemble_s(&opts.tol)?;
    let w = net.assemble_w()?;
    let routing = RoutingMatrices::new(&s, &w, opts)?;
    extract_coefficients(&routing, ports)
}

/// `η_a η_b − β₊²`; zero exactly when a perfectly dark state exists.
pub fn dark_state_residual<T: Real>(coeffs: &TransferCoefficients<T>) -> T {
    coeffs.eta_a * coeffs.eta_b - coeffs.beta_plus * coeffs.beta_plus
}

/// Local parameters of the two qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitControls<T> {
    pub kappa_a: T,
    pub kappa_b: T,
    pub phi_a: T,
    pub phi_b: T,
    pub h_az: T,
    pub h_bz: T,
}

impl<T: Real> QubitControls<T> {
    pub fn rates(kappa_a: T, kappa_b: T) -> Self {
        Self {
            kappa_a,
            kappa_b,
            phi_a: T::zero(),
            phi_b: T::zero(),
            h_az: T::zero(),
            h_bz: T::zero(),
        }
    }
}

/// Components of the feeding operator `R = ½(R₀ + R⃗·σ⃗)` and the exchange
/// operator `J = ½(J₀ + J⃗·σ⃗)` on the excitation block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RJComponents<T> {
    pub r0: T,
    pub r: Vector3<T>,
    pub j0: T,
    pub j: Vector3<T>,
}

impl<T: Real> RJComponents<T> {
    pub fn new(coeffs: &TransferCoefficients<T>, q: &QubitControls<T>) -> Self {
        let two = T::lit(2.0);
        let root = (q.kappa_a * q.kappa_b).sqrt();
        let dphi = q.phi_a - q.phi_b;
        let ka_eta = q.kappa_a * coeffs.eta_a;
        let kb_eta = q.kappa_b * coeffs.eta_b;
        let psi_p = dphi + coeffs.delta_plus;
        let psi_m = dphi + coeffs.delta_minus;
        let cross = two * root * coeffs.beta_plus;
        let exch = root * coeffs.beta_minus;
        let im_a = q.kappa_a * coeffs.t_aa.im;
        let im_b = q.kappa_b * coeffs.t_bb.im;
        Self {
            r0: ka_eta + kb_eta,
            r: Vector3::new(cross * psi_p.cos(), cross * psi_p.sin(), ka_eta - kb_eta),
            j0: im_a + im_b,
            j: Vector3::new(-exch * psi_m.sin(), exch * psi_m.cos(), im_a - im_b + q.h_az - q.h_bz),
        }
    }

    /// `Γ_d = ½(R₀ − ‖R⃗‖)`.
    pub fn gamma_dark(&self) -> T {
        let norm = self.r.norm();
        let denom = self.r0 + norm;
        if denom > T::zero() {
            // (R₀² − ‖R⃗‖²) / (2(R₀ + ‖R⃗‖)) avoids cancellation near a dark state
            (self.r0 * self.r0 - norm * norm) / (T::lit(2.0) * denom)
        } else {
            T::zero()
        }
    }

    pub fn gamma_bright(&self) -> T {
        (self.r0 + self.r.norm()) / T::lit(2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectiveRates<T> {
    pub gamma_bright: T,
    pub gamma_dark: T,
    /// Mixing angle in `[0, π]`.
    pub theta: T,
    /// `φ_a − φ_b + δ₊`.
    pub varphi: T,
}

/// Bright/dark decay rates and the dark-state mixing angle.
pub fn collective_rates<T: Real>(coeffs: &TransferCoefficients<T>, q: &QubitControls<T>) -> CollectiveRates<T> {
    let two = T::lit(2.0);
    let root = (q.kappa_a * q.kappa_b).sqrt();
    let cross = two * root * coeffs.beta_plus;
    let diff = q.kappa_a * coeffs.eta_a - q.kappa_b * coeffs.eta_b;
    let r0 = q.kappa_a * coeffs.eta_a + q.kappa_b * coeffs.eta_b;
    let norm = (cross * cross + diff * diff).sqrt();
    // R₀² − ‖R⃗‖² = 4κ_aκ_b(η_aη_b − β₊²)
    let numer = T::lit(4.0) * q.kappa_a * q.kappa_b * dark_state_residual(coeffs);
    let gamma_dark = if r0 + norm > T::zero() {
        numer / (two * (r0 + norm))
    } else {
        T::zero()
    };
    CollectiveRates {
        gamma_bright: (r0 + norm) / two,
        gamma_dark,
        theta: cross.atan2(diff),
        varphi: q.phi_a - q.phi_b + coeffs.delta_plus,
    }
}
