use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dark_state_residual, network_coefficients, TransferCoefficients};
use crate::circuits::{ideal_circulator, ChannelSpec};
use crate::contraction::ContractionOptions;
use crate::error::{Error, Result};
use crate::linalg::exp_i_hermitian;
use crate::network::{Link, Network};
use crate::random::{phase, unit_hermitian};
use crate::scalar::{Real, CMatrix};

/// Two-circulator channel with each circulator replaced by `exp(iεH̃)·S`,
/// `H̃` a seeded random Hermitian matrix of unit spectral norm (one per
/// circulator), and the given interconnect phase.
pub fn random_imperfect_network<T: Real>(eps: T, interconnect_phase: T, seed: u64) -> Result<Network<T>> {
    if !(eps >= T::zero() && eps <= T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in [0, 2], got {}",
            eps.as_f64()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perturbed = || -> CMatrix<T> {
        let h = unit_hermitian::<T, _>(&mut rng, 3);
        if eps == T::zero() {
            // exp(0) through the eigendecomposition is only identity to round-off
            return ideal_circulator();
        }
        exp_i_hermitian(&h, eps) * ideal_circulator::<T>()
    };
    let circulator_1 = perturbed();
    let circulator_2 = perturbed();
    Ok(ChannelSpec {
        circulator_1,
        circulator_2,
        interconnect: Link::Phase(interconnect_phase),
        ..ChannelSpec::ideal()
    }
    .build())
}

/// `|r_ii|²` of every port of every multi-port scattering block.
pub fn reflectances<T: Real>(net: &Network<T>) -> Vec<T> {
    net.blocks
        .iter()
        .filter(|b| b.matrix.nrows() > 1)
        .flat_map(|b| b.matrix.diagonal().iter().map(|r| r.norm_sqr()).collect::<Vec<_>>())
        .collect()
}

/// Acceptance window for [`sample_network_class`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkClass {
    /// Every retro-reflectance `|r_ii|²` must lie in `[r2_min, r2_max]`.
    pub r2_min: f64,
    pub r2_max: f64,
    /// Upper bound on `η_aη_b − β₊²`.
    pub residual_max: Option<f64>,
    /// Window for `cos(δ₊ − δ₋)`; the upper end is exclusive.
    pub cos_range: (f64, f64),
    /// Range `ε` is drawn from.
    pub eps_range: (f64, f64),
}

impl NetworkClass {
    /// Weakly reflecting circulators, `0.04 ≤ |r_ii|² ≤ 0.15`, with a nearly
    /// dark collective state.
    pub const LOW_REFLECTION: Self = Self {
        r2_min: 0.04,
        r2_max: 0.15,
        residual_max: Some(0.01),
        cos_range: (-1.0, 0.0),
        eps_range: (0.2, 0.8),
    };

    /// Weakly reflecting circulators with no constraint on the dark residual.
    pub const LOW_REFLECTION_ANY: Self = Self {
        residual_max: None,
        ..Self::LOW_REFLECTION
    };

    /// Strongly reflecting circulators, `0.42 ≤ |r_ii|² ≤ 0.84`, with weak
    /// non-reciprocity `cos(δ₊ − δ₋) ≈ −0.15`.
    pub const HIGH_REFLECTION: Self = Self {
        r2_min: 0.42,
        r2_max: 0.84,
        residual_max: None,
        cos_range: (-0.201, -0.101),
        eps_range: (0.8, 2.0),
    };

    fn reflectances_in_band<T: Real>(&self, r2: &[T]) -> bool {
        r2.iter()
            .all(|r| (self.r2_min..=self.r2_max).contains(&r.as_f64()))
    }

    fn accepts<T: Real>(&self, coeffs: &TransferCoefficients<T>) -> bool {
        let cos = coeffs.cos_delta().as_f64();
        let residual = dark_state_residual(coeffs).as_f64();
        cos >= self.cos_range.0
            && cos < self.cos_range.1
            && self.residual_max.is_none_or(|m| residual < m)
            && coeffs.eta_a > T::zero()
            && coeffs.eta_b > T::zero()
            && coeffs.beta_plus > T::zero()
    }
}

#[derive(Clone, Debug)]
pub struct ImperfectNetwork<T> {
    pub network: Network<T>,
    pub eps: T,
    pub phase: T,
    /// Seed passed to [`random_imperfect_network`].
    pub seed: u64,
    /// Number of draws until acceptance.
    pub tries: usize,
    pub coeffs: TransferCoefficients<T>,
}

/// Rejection-samples `(ε, H̃, interconnect phase)` until the network falls in
/// `class`. Deterministic in `seed`.
pub fn sample_network_class<T: Real>(
    class: &NetworkClass,
    seed: u64,
    max_tries: usize,
) -> Result<ImperfectNetwork<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = ContractionOptions::default();
    for tries in 1..=max_tries {
        let eps = T::lit(rng.random_range(class.eps_range.0..=class.eps_range.1));
        let ph: T = phase(&mut rng);
        let sub_seed: u64 = rng.random();
        let network = random_imperfect_network(eps, ph, sub_seed)?;
        if !class.reflectances_in_band(&reflectances(&network)) {
            continue;
        }
        let Ok(coeffs) = network_coefficients(&network, &opts) else {
            continue;
        };
        if class.accepts(&coeffs) {
            return Ok(ImperfectNetwork {
                network,
                eps,
                phase: ph,
                seed: sub_seed,
                tries,
                coeffs,
            });
        }
    }
    Err(Error::SamplingExhausted { tries: max_tries })
}
