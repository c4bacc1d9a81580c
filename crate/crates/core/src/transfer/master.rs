use super::{qubit_ports, transfer_open_system, QubitControls, RJComponents, TransferCoefficients};
use crate::contraction::ContractionOptions;
use crate::error::{Error, Result};
use crate::lindblad::{hz_key, kappa_key, phi_key, Control, Schedule};
use crate::linalg::{self, kron, max_abs_diff, qubit};
use crate::network::Network;
use crate::scalar::{c, cr, CMatrix, Real};

// joint basis: |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
const UU: usize = 0;
const UD: usize = 1;
const DU: usize = 2;
const DD: usize = 3;

/// 2×2 operator `½(x₀ + x⃗·σ⃗)` on the excitation block, embedded in the
/// joint space.
fn block_operator<T: Real>(x0: T, x: &nalgebra::Vector3<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    let mut m = linalg::zeros(4, 4);
    m[(UD, UD)] = cr(half * (x0 + x.z));
    m[(DU, DU)] = cr(half * (x0 - x.z));
    m[(UD, DU)] = c(half * x.x, -half * x.y);
    m[(DU, UD)] = c(half * x.x, half * x.y);
    m
}

/// Two-qubit master equation assembled from `R`, `J` and the feeding
/// structure alone (no routing matrices): `ρ̇ = −i[H, ρ] + F(ρ) − ½{Γ, ρ}`
/// with
///
/// * `H = J` on the excitation block, `J₀ + ½(h_a + h_b)` on `|↑↑⟩`,
///   `−½(h_a + h_b)` on `|↓↓⟩`;
/// * `Γ = Tr(R)|↑↑⟩⟨↑↑| + R`;
/// * `F(ρ) = Σ_ij R_{x_i x_j} σ⁻_j ρ σ⁺_i` with `x_a = |↑↓⟩`, `x_b = |↓↑⟩`.
///
/// Restricted to block-diagonal `ρ`, `F` reduces to
/// `⟨↑↑|ρ|↑↑⟩ R̃ + Tr(Rρ)|↓↓⟩⟨↓↓|`, where `R̃` is `R` with its two diagonal
/// entries exchanged: the `|↑↑⟩` population feeds `|↓↑⟩` at `κ_aη_a` and
/// `|↑↓⟩` at `κ_bη_b`.
pub fn specialized_master_equation<T: Real>(
    coeffs: &TransferCoefficients<T>,
    q: &QubitControls<T>,
) -> CMatrix<T> {
    let rj = RJComponents::new(coeffs, q);
    let half = T::lit(0.5);
    let r = block_operator(rj.r0, &rj.r);
    let mut h = block_operator(rj.j0, &rj.j);
    h[(UU, UU)] = cr(rj.j0 + half * (q.h_az + q.h_bz));
    h[(DD, DD)] = cr(-half * (q.h_az + q.h_bz));
    let mut gamma = r.clone();
    gamma[(UU, UU)] = cr(rj.r0);

    let one = linalg::identity::<T>(4);
    let i = c(T::zero(), T::one());
    let mut gen = (kron(&one, &h) - kron(&h.transpose(), &one)) * (-i);
    gen -= (kron(&one, &gamma) + kron(&gamma.transpose(), &one)) * cr(half);

    let lower = [
        kron(&qubit::sigma_minus::<T>(), &linalg::identity(2)),
        kron(&linalg::identity::<T>(2), &qubit::sigma_minus()),
    ];
    let x = [UD, DU];
    for (ii, si) in lower.iter().enumerate() {
        for (jj, sj) in lower.iter().enumerate() {
            let rij = r[(x[ii], x[jj])];
            gen += kron(&si.conjugate(), sj) * rij;
        }
    }
    gen
}

/// Builds the generic generator for the same controls from the network and
/// compares; returns the max-abs residual.
pub fn compare_with_generic<T: Real>(
    net: &Network<T>,
    coeffs: &TransferCoefficients<T>,
    q: &QubitControls<T>,
    tol: T,
    opts: &ContractionOptions<T>,
) -> Result<T> {
    let (pa, pb) = qubit_ports(net)?;
    let sys = transfer_open_system(net, opts)?;
    let sched = Schedule::new()
        .with(kappa_key(pa), Control::Constant(q.kappa_a))?
        .with(kappa_key(pb), Control::Constant(q.kappa_b))?
        .with(phi_key(pa), Control::Constant(q.phi_a))?
        .with(phi_key(pb), Control::Constant(q.phi_b))?
        .with(hz_key(&net.systems[0].element), Control::Constant(q.h_az))?
        .with(hz_key(&net.systems[1].element), Control::Constant(q.h_bz))?;
    let generic = sys.build_generator(&sched, T::zero())?;
    let special = specialized_master_equation(coeffs, q);
    let residual = max_abs_diff(&generic, &special);
    if !(residual < tol) {
        return Err(Error::MismatchWithGenericGenerator {
            residual: residual.as_f64(),
        });
    }
    Ok(residual)
}
