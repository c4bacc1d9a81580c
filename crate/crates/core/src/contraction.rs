//! Elimination of the internal fields: `(S, L, H_sys, W) → (S_eff, L_eff, H_eff)`.
//!
//! Everything is expressed through `G = (1 − SW)⁻¹`:
//!
//! * `M = X_o G` routes sources and inputs to the external outputs,
//! * `T = SW·G = G − 1` is the network's round-trip contribution,
//! * `S_eff = X_o G S X_i`, `L_eff = M L`,
//! * `H_eff = H_sys + (1/2i) Σ_jk L_j† K_jk L_k` with `K = G − G†`.
//!
//! Operator-valued checks (Hermiticity, the dissipative-Hamiltonian identity)
//! compare against `tol · max(1, scale)` where `scale` is the largest entry
//! of the operators involved, so physical rates in rad/s do not trip an
//! absolute threshold meant for O(1) numbers.

use crate::error::{Error, Result};
use crate::linalg::{self, condition_number, hermiticity_deviation, max_abs, max_abs_diff};
use crate::network::{Network, Partition, Tolerances};
use crate::scalar::{c, cr, CMatrix, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionOptions<T> {
    /// Required margin below one for the spectral radius of `SW`.
    pub delta_conv: T,
    /// Largest accepted condition number of `1 − SW`.
    pub cond_max: T,
    pub tol: Tolerances<T>,
}

impl<T: Real> Default for ContractionOptions<T> {
    fn default() -> Self {
        Self {
            delta_conv: T::lit(1e-6),
            cond_max: T::lit(1e12),
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutingMatrices<T> {
    /// `SW`.
    pub sw: CMatrix<T>,
    /// `(1 − SW)⁻¹`.
    pub g: CMatrix<T>,
    /// `X_o G`.
    pub m: CMatrix<T>,
    /// `SW·G`.
    pub t: CMatrix<T>,
    pub spectral_radius_sw: T,
    pub sigma_max_sw: T,
    pub condition: T,
    pub partition: Partition,
}

impl<T: Real> RoutingMatrices<T> {
    /// Computes the routing matrices, refusing loops that are not weak.
    pub fn new(s: &CMatrix<T>, w: &CMatrix<T>, opts: &ContractionOptions<T>) -> Result<Self> {
        let n = s.nrows();
        if s.shape() != (n, n) || w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "S is {}x{}, W is {}x{}",
                s.nrows(),
                s.ncols(),
                w.nrows(),
                w.ncols()
            )));
        }
        let sw = s * w;
        let rho = linalg::spectral_radius(&sw);
        let limit = T::one() - opts.delta_conv;
        if !(rho < limit) {
            return Err(Error::NonConvergentLoop {
                spectral_radius: rho.as_f64(),
                limit: limit.as_f64(),
            });
        }
        let one = linalg::identity::<T>(n);
        let a = &one - &sw;
        let condition = condition_number(&a);
        if !(condition <= opts.cond_max) {
            return Err(Error::SingularMatrix {
                condition: condition.as_f64(),
            });
        }
        let g = a.clone().lu().try_inverse().ok_or(Error::SingularMatrix {
            condition: condition.as_f64(),
        })?;
        let residual = max_abs_diff(&(&a * &g), &one);
        if !(residual < opts.tol.solve) {
            return Err(Error::IdentityViolation {
                what: "(1 - SW) G = 1",
                residual: residual.as_f64(),
            });
        }
        let partition = Partition::from_connection_matrix(w);
        let m = partition.x_out::<T>() * &g;
        let t = &sw * &g;
        Ok(Self {
            sigma_max_sw: linalg::sigma_max(&sw),
            spectral_radius_sw: rho,
            condition,
            sw,
            g,
            m,
            t,
            partition,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.g.nrows()
    }

    /// `K = G − G†`.
    pub fn k(&self) -> CMatrix<T> {
        &self.g - self.g.adjoint()
    }

    /// Rows of `M` at the external outputs (`ext-outputs × N`).
    pub fn external_m(&self) -> CMatrix<T> {
        self.g.select_rows(&self.partition.external_outputs)
    }
}

/// Network-induced Hamiltonian `(1/2i) Σ_jk L_j† K_jk L_k`.
pub fn network_hamiltonian<T: Real>(k: &CMatrix<T>, l: &[CMatrix<T>]) -> Option<CMatrix<T>> {
    let d = l.first()?.nrows();
    let mut h = linalg::zeros(d, d);
    let nonzero: Vec<usize> = (0..l.len())
        .filter(|&i| max_abs(&l[i]) > T::zero())
        .collect();
    for &j in &nonzero {
        let lj_dag = l[j].adjoint();
        for &kk in &nonzero {
            let kjk = k[(j, kk)];
            if kjk != cr(T::zero()) {
                h += &lj_dag * &l[kk] * kjk;
            }
        }
    }
    // 1/(2i) = −i/2
    Some(h * c(T::zero(), -T::lit(0.5)))
}

/// `Σ_k coeffs[row, k] · ops[k]` for every row.
pub fn combine_operators<T: Real>(coeffs: &CMatrix<T>, ops: &[CMatrix<T>]) -> Vec<CMatrix<T>> {
    let d = ops.first().map_or(1, |o| o.nrows());
    (0..coeffs.nrows())
        .map(|j| {
            let mut acc = linalg::zeros(d, d);
            for (k, op) in ops.iter().enumerate() {
                let cjk = coeffs[(j, k)];
                if cjk != cr(T::zero()) {
                    acc += op * cjk;
                }
            }
            acc
        })
        .collect()
}

fn scaled_tol<T: Real>(tol: T, scale: T) -> T {
    tol * scale.max(T::one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModel<T> {
    pub routing: RoutingMatrices<T>,
    /// `X_o G S X_i` restricted to external outputs × external inputs.
    pub s_eff: CMatrix<T>,
    /// Row `j` holds the coefficients of `L_eff_j = Σ_k M_jk L_k`.
    pub l_eff_coeffs: CMatrix<T>,
    pub h_sys: CMatrix<T>,
    pub h_eff: CMatrix<T>,
    /// `H_eff − (i/2) Σ_j L_eff_j† L_eff_j` (non-Hermitian).
    pub h_loss: CMatrix<T>,
    pub base_l: Vec<CMatrix<T>>,
    pub tol: Tolerances<T>,
}

/// Contracts the network `(S, W, L, H_sys)`.
pub fn contract<T: Real>(
    s: &CMatrix<T>,
    w: &CMatrix<T>,
    l: &[CMatrix<T>],
    h_sys: &CMatrix<T>,
    opts: &ContractionOptions<T>,
) -> Result<EffectiveModel<T>> {
    let n = s.nrows();
    if l.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} coupling operators for {n} ports",
            l.len()
        )));
    }
    let d = h_sys.nrows();
    if let Some(bad) = l.iter().find(|op| op.shape() != (d, d)) {
        return Err(Error::DimensionMismatch(format!(
            "coupling operator is {}x{}, joint space has dimension {d}",
            bad.nrows(),
            bad.ncols()
        )));
    }
    let routing = RoutingMatrices::new(s, w, opts)?;
    let part = &routing.partition;
    let gs = &routing.g * s;
    let s_eff = gs
        .select_rows(&part.external_outputs)
        .select_columns(&part.external_inputs);
    let l_eff_coeffs = routing.external_m();

    let h_net = network_hamiltonian(&routing.k(), l).unwrap_or_else(|| linalg::zeros(d, d));
    let h_eff = h_sys + h_net;
    let scale = max_abs(&h_eff);
    let herm = hermiticity_deviation(&h_eff);
    if !(herm < scaled_tol(opts.tol.herm, scale)) {
        return Err(Error::IdentityViolation {
            what: "H_eff is Hermitian",
            residual: herm.as_f64(),
        });
    }
    let l_eff = combine_operators(&l_eff_coeffs, l);
    let h_loss = l_eff.iter().fold(h_eff.clone(), |acc, op| {
        acc - op.adjoint() * op * c(T::zero(), T::lit(0.5))
    });

    Ok(EffectiveModel {
        routing,
        s_eff,
        l_eff_coeffs,
        h_sys: h_sys.clone(),
        h_eff,
        h_loss,
        base_l: l.to_vec(),
        tol: opts.tol,
    })
}

/// Validates the network, assembles `S`, `W`, `L`, `H_sys` and contracts.
pub fn contract_network<T: Real>(
    net: &Network<T>,
    opts: &ContractionOptions<T>,
) -> Result<EffectiveModel<T>> {
    net.validate(&opts.tol)?;
    let s = net.assemble_s(&opts.tol)?;
    let w = net.assemble_w()?;
    let l = net.assemble_l()?;
    let h = net.assemble_h();
    contract(&s, &w, &l, &h, opts)
}

impl<T: Real> EffectiveModel<T> {
    pub fn partition(&self) -> &Partition {
        &self.routing.partition
    }

    pub fn joint_dim(&self) -> usize {
        self.h_sys.nrows()
    }

    /// Materializes `L_eff_j` as joint-space operators.
    pub fn effective_l_operators(&self) -> Vec<CMatrix<T>> {
        combine_operators(&self.l_eff_coeffs, &self.base_l)
    }

    /// `H_sys − (i/2) L†L − i L† T L`, checked against `h_loss`.
    pub fn dissipative_hamiltonian(&self) -> Result<CMatrix<T>> {
        let d = self.joint_dim();
        let t = &self.routing.t;
        let half_i = c(T::zero(), T::lit(0.5));
        let i = c(T::zero(), T::one());
        let mut h = self.h_sys.clone();
        for lk in &self.base_l {
            h -= lk.adjoint() * lk * half_i;
        }
        let mut cross = linalg::zeros::<T>(d, d);
        for (j, lj) in self.base_l.iter().enumerate() {
            for (k, lk) in self.base_l.iter().enumerate() {
                let tjk = t[(j, k)];
                if tjk != cr(T::zero()) {
                    cross += lj.adjoint() * lk * tjk;
                }
            }
        }
        h -= cross * i;
        let residual = max_abs_diff(&h, &self.h_loss);
        let scale = max_abs(&h).max(max_abs(&self.h_loss));
        if !(residual < scaled_tol(self.tol.solve, scale)) {
            return Err(Error::IdentityViolation {
                what: "dissipative Hamiltonian equals H_eff - (i/2) L_eff^dag L_eff",
                residual: residual.as_f64(),
            });
        }
        Ok(h)
    }

    /// `‖S_eff†S_eff − 1‖_max` on the external inputs.
    pub fn isometry_deviation(&self) -> T {
        let gram = self.s_eff.adjoint() * &self.s_eff;
        max_abs_diff(&gram, &linalg::identity(gram.nrows()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackIdentityReport<T> {
    /// `‖G†X_oG − G − (SW)†G†‖_max`.
    pub gram: T,
    /// `‖½ + SW·G − ½[G†X_oG + G − G†]‖_max`.
    pub splitting: T,
}

impl<T: Real> FeedbackIdentityReport<T> {
    pub fn max(&self) -> T {
        self.gram.max(self.splitting)
    }
}

/// Residuals of the two resolvent identities used to derive `H_eff`.
/// Singular `1 − SW` yields infinite residuals.
pub fn verify_feedback_identities<T: Real>(s: &CMatrix<T>, w: &CMatrix<T>) -> FeedbackIdentityReport<T> {
    let n = s.nrows();
    let one = linalg::identity::<T>(n);
    let sw = s * w;
    let Some(g) = (&one - &sw).lu().try_inverse() else {
        let inf = T::max_value().unwrap_or_else(T::one);
        return FeedbackIdentityReport {
            gram: inf,
            splitting: inf,
        };
    };
    let gd = g.adjoint();
    let x_o = &one - w.adjoint() * w;
    let sandwich = &gd * &x_o * &g;
    let gram = max_abs_diff(&sandwich, &(&g + sw.adjoint() * &gd));
    let half = cr(T::lit(0.5));
    let lhs = &one * half + &sw * &g;
    let rhs = (&sandwich + &g - &gd) * half;
    FeedbackIdentityReport {
        gram,
        splitting: max_abs_diff(&lhs, &rhs),
    }
}

