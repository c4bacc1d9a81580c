//! Input-output network contraction for open quantum systems.
//!
//! Build a [`network::Network`] of scattering blocks, local systems and
//! feedback connections, contract it to an effective `(S, L, H)` model
//! ([`contraction`]), check the zero-delay approximation by enumerating
//! scattering paths ([`paths`]), integrate the resulting Lindblad equation
//! ([`lindblad`]) and synthesize dark-state transfer protocols between two
//! qubits ([`transfer`]).
//!
//! Everything is generic over the real scalar type; the `*64` / `*32`
//! aliases below pin it.
// `!(x < tol)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod contraction;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod network;
pub mod paths;
pub mod random;
pub mod scalar;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real, C};

pub type Network64 = network::Network<f64>;
pub type Network32 = network::Network<f32>;
pub type RoutingMatrices64 = contraction::RoutingMatrices<f64>;
pub type RoutingMatrices32 = contraction::RoutingMatrices<f32>;
pub type EffectiveModel64 = contraction::EffectiveModel<f64>;
pub type EffectiveModel32 = contraction::EffectiveModel<f32>;
pub type PathRecord64 = paths::PathRecord<f64>;
pub type OpenSystem64 = lindblad::OpenSystem<f64>;
pub type DensityMatrix64 = lindblad::DensityMatrix<f64>;
pub type TransferCoefficients64 = transfer::TransferCoefficients<f64>;
pub type ControlProtocol64 = transfer::ControlProtocol<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
