//! Vacuum-input master equation of a contracted network and its fixed-step
//! RK4 integration.
//!
//! Time dependence enters only through scalar prefactors: the source at port
//! `k` is `L_k(t) = √κ_k(t) e^{iφ_k(t)} A_k`, and named drives add
//! `f_d(t)·O_d` to the Hamiltonian. `S` and `W` (hence `G`, `M`, `K`) are
//! fixed. Superoperators use column-major vectorization,
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::contraction::{combine_operators, network_hamiltonian, ContractionOptions, RoutingMatrices};
use crate::error::{Error, Result};
use crate::linalg::{self, hermiticity_deviation, kron, max_abs_diff, trace};
use crate::network::{Network, Source};
use crate::scalar::{c, cr, CMatrix, Real, C};

pub fn kappa_key(port: usize) -> String {
    format!("kappa:{port}")
}

pub fn phi_key(port: usize) -> String {
    format!("phi:{port}")
}

/// Control name of the `½σ_z` drive on a qubit element.
pub fn hz_key(element: &str) -> String {
    format!("hz:{element}")
}

/// Uniformly sampled function with linear interpolation; constant
/// extrapolation outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled<T> {
    pub t0: T,
    pub dt: T,
    pub values: Vec<T>,
}

impl<T: Real> Sampled<T> {
    pub fn new(t0: T, dt: T, values: Vec<T>) -> Result<Self> {
        if values.is_empty() || !(dt > T::zero()) {
            return Err(Error::InvalidArgument(
                "sampled control needs a positive step and at least one sample".into(),
            ));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn t_end(&self) -> T {
        self.t0 + self.dt * T::lit((self.values.len() - 1) as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.values.len()).map(|k| self.t0 + self.dt * T::lit(k as f64))
    }

    pub fn eval(&self, t: T) -> T {
        let last = self.values.len() - 1;
        let x = (t - self.t0) / self.dt;
        if !(x > T::zero()) {
            return self.values[0];
        }
        let k = x.floor().to_usize().unwrap_or(usize::MAX);
        if k >= last {
            return self.values[last];
        }
        let frac = x - T::lit(k as f64);
        self.values[k] + (self.values[k + 1] - self.values[k]) * frac
    }
}

#[derive(Clone)]
pub enum Control<T> {
    Constant(T),
    Sampled(Sampled<T>),
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> Control<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            Control::Constant(v) => *v,
            Control::Sampled(s) => s.eval(t),
            Control::Function(f) => f(t),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Control<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Control::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Control::Sampled(s) => f.debug_tuple("Sampled").field(s).finish(),
            Control::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Named time-dependent controls.
#[derive(Clone, Debug, Default)]
pub struct Schedule<T> {
    controls: BTreeMap<String, Control<T>>,
}

impl<T: Real> Schedule<T> {
    pub fn new() -> Self {
        Self {
            controls: BTreeMap::new(),
        }
    }

    /// Adds a control; rate controls (`kappa:*`) must be non-negative at
    /// every sample.
    pub fn set(&mut self, name: impl Into<String>, control: Control<T>) -> Result<&mut Self> {
        let name = name.into();
        if name.starts_with("kappa:") {
            let negative = match &control {
                Control::Constant(v) => *v < T::zero(),
                Control::Sampled(s) => s.values.iter().any(|v| *v < T::zero()),
                Control::Function(_) => false,
            };
            if negative {
                return Err(Error::InvalidSchedule {
                    name,
                    reason: "rate schedules must be non-negative".into(),
                });
            }
        }
        self.controls.insert(name, control);
        Ok(self)
    }

    pub fn with(mut self, name: impl Into<String>, control: Control<T>) -> Result<Self> {
        self.set(name, control)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&Control<T>> {
        self.controls.get(name)
    }

    pub fn eval(&self, name: &str, t: T) -> Option<T> {
        self.get(name).map(|c| c.eval(t))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.controls.keys().map(String::as_str)
    }
}

/// Hamiltonian term `f(t)·O` driven by the control `name`.
#[derive(Clone, Debug, PartialEq)]
pub struct Drive<T> {
    pub name: String,
    pub operator: CMatrix<T>,
}

/// Everything needed to evaluate the generator at any time.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenSystem<T> {
    pub h_sys: CMatrix<T>,
    /// `K = G − G†`.
    pub k: CMatrix<T>,
    /// `M` restricted to external outputs.
    pub m_ext: CMatrix<T>,
    /// Unit operators `A_k` and nominal `(κ_k, φ_k)` per port.
    pub sources: Vec<Option<Source<T>>>,
    pub drives: Vec<Drive<T>>,
}

/// Hamiltonian and jump operators at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct InstantTerms<T> {
    pub h: CMatrix<T>,
    pub jumps: Vec<CMatrix<T>>,
    /// `H − (i/2) Σ L†L`.
    h_loss: CMatrix<T>,
}

impl<T: Real> OpenSystem<T> {
    pub fn from_routing(routing: &RoutingMatrices<T>, h_sys: CMatrix<T>, sources: Vec<Option<Source<T>>>) -> Self {
        Self {
            h_sys,
            k: routing.k(),
            m_ext: routing.external_m(),
            sources,
            drives: Vec::new(),
        }
    }

    pub fn from_network(net: &Network<T>, opts: &ContractionOptions<T>) -> Result<Self> {
        net.validate(&opts.tol)?;
        let s = net.assemble_s(&opts.tol)?;
        let w = net.assemble_w()?;
        let routing = RoutingMatrices::new(&s, &w, opts)?;
        Ok(Self::from_routing(&routing, net.assemble_h(), net.sources()?))
    }

    pub fn dim(&self) -> usize {
        self.h_sys.nrows()
    }

    pub fn with_drive(mut self, name: impl Into<String>, operator: CMatrix<T>) -> Self {
        self.drives.push(Drive {
            name: name.into(),
            operator,
        });
        self
    }

    /// Adds `h(t)·½σ_z` on local system `index` of a multi-qubit space.
    pub fn with_qubit_hz(self, element: &str, dims: &[usize], index: usize) -> Self {
        let op = linalg::embed(&linalg::qubit::sigma_z(), dims, index) * cr(T::lit(0.5));
        self.with_drive(hz_key(element), op)
    }

    /// Source operators `L_k(t)` for every port.
    pub fn source_operators(&self, sched: &Schedule<T>, t: T) -> Result<Vec<CMatrix<T>>> {
        let d = self.dim();
        self.sources
            .iter()
            .map(|src| match src {
                None => Ok(linalg::zeros(d, d)),
                Some(src) => {
                    let kappa = sched.eval(&kappa_key(src.port), t).unwrap_or(src.kappa);
                    if kappa < T::zero() {
                        return Err(Error::NegativeRate(kappa.as_f64()));
                    }
                    let phi = sched.eval(&phi_key(src.port), t).unwrap_or(src.phi);
                    Ok(&src.operator * Source::amplitude_for(kappa, phi))
                }
            })
            .collect()
    }

    pub fn terms(&self, sched: &Schedule<T>, t: T) -> Result<InstantTerms<T>> {
        let d = self.dim();
        let l = self.source_operators(sched, t)?;
        let mut h = self.h_sys.clone();
        for drive in &self.drives {
            let f = sched
                .eval(&drive.name, t)
                .ok_or_else(|| Error::ScheduleMissing(drive.name.clone()))?;
            h += &drive.operator * cr(f);
        }
        if let Some(h_net) = network_hamiltonian(&self.k, &l) {
            h += h_net;
        }
        let jumps: Vec<CMatrix<T>> = combine_operators(&self.m_ext, &l)
            .into_iter()
            .filter(|op| linalg::max_abs(op) > T::zero())
            .collect();
        let half_i = c(T::zero(), T::lit(0.5));
        let h_loss = jumps
            .iter()
            .fold(h.clone(), |acc, op| acc - op.adjoint() * op * half_i);
        debug_assert_eq!(h.nrows(), d);
        Ok(InstantTerms { h, jumps, h_loss })
    }

    /// Vectorized generator `𝓛(t)` (`D² × D²`).
    pub fn build_generator(&self, sched: &Schedule<T>, t: T) -> Result<CMatrix<T>> {
        Ok(self.terms(sched, t)?.generator())
    }
}

impl<T: Real> InstantTerms<T> {
    pub fn generator(&self) -> CMatrix<T> {
        let d = self.h.nrows();
        let one = linalg::identity::<T>(d);
        let i = c(T::zero(), T::one());
        let half = cr(T::lit(0.5));
        let mut gen = (kron(&one, &self.h) - kron(&self.h.transpose(), &one)) * (-i);
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            gen += kron(&l.conjugate(), l);
            gen -= (kron(&one, &ldl) + kron(&ldl.transpose(), &one)) * half;
        }
        gen
    }

    /// `ρ̇ = −i(H_loss ρ − ρ H_loss†) + Σ_j L_j ρ L_j†`.
    pub fn rhs(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let i = c(T::zero(), T::one());
        let mut out = (&self.h_loss * rho - rho * self.h_loss.adjoint()) * (-i);
        for l in &self.jumps {
            out += l * rho * l.adjoint();
        }
        out
    }
}

/// Column-major `vec(ρ)`.
pub fn vectorize<T: Real>(rho: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_column_slice(rho.len(), 1, rho.as_slice())
}

pub fn unvectorize<T: Real>(v: &CMatrix<T>, d: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    rho: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks trace, Hermiticity and positivity (`λ_min ≥ −tol_pos`).
    pub fn new(rho: CMatrix<T>, tol_trace: T, tol_herm: T, tol_pos: T) -> Result<Self> {
        if !rho.is_square() || rho.is_empty() {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        let tr = trace(&rho);
        if !((tr - cr(T::one())).norm_sqr().sqrt() < tol_trace) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {:.3e}{:+.3e}i",
                tr.re.as_f64(),
                tr.im.as_f64()
            )));
        }
        let herm = hermiticity_deviation(&rho);
        if !(herm < tol_herm) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {:.3e})",
                herm.as_f64()
            )));
        }
        let sym = (&rho + rho.adjoint()) * cr(T::lit(0.5));
        let min_eig = sym
            .symmetric_eigenvalues()
            .iter()
            .fold(T::max_value().unwrap_or_else(T::one), |acc, l| acc.min(*l));
        if min_eig < -tol_pos {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                min_eig.as_f64()
            )));
        }
        Ok(Self { rho })
    }

    pub fn with_default_tolerances(rho: CMatrix<T>) -> Result<Self> {
        let tol = T::lit(T::DEFAULT_TOL_TRACE);
        Self::new(rho, tol, T::lit(T::DEFAULT_TOL), tol)
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        let v = CMatrix::from_column_slice(psi.len(), 1, psi);
        let norm = v.norm();
        if !(norm > T::zero()) {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let v = v / cr(norm);
        Self::with_default_tolerances(&v * v.adjoint())
    }

    /// Projector on basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidDensityMatrix(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut rho = linalg::zeros(dim, dim);
        rho[(index, index)] = cr(T::one());
        Ok(Self { rho })
    }

    /// Qubit product state from a label of `u`/`d` (or `e`/`g`, `1`/`0`)
    /// characters, first character on the first qubit.
    pub fn from_qubit_label(label: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in label.chars() {
            let bit = match ch {
                'u' | 'U' | 'e' | 'E' | '1' => 0,
                'd' | 'D' | 'g' | 'G' | '0' => 1,
                _ => {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "unknown qubit state `{ch}` in `{label}`"
                    )))
                }
            };
            index = 2 * index + bit;
        }
        Self::basis(1 << label.chars().count(), index)
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }
}

/// Qubit basis index of a `u`/`d` label.
pub fn qubit_label_index(label: &str) -> Option<usize> {
    label.chars().try_fold(0usize, |acc, ch| match ch {
        'u' | 'U' | 'e' | 'E' | '1' => Some(2 * acc),
        'd' | 'D' | 'g' | 'G' | '0' => Some(2 * acc + 1),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions<T> {
    /// Keep every `sample_every`-th state (the final state is always kept).
    pub sample_every: usize,
    pub tol_trace: T,
    pub tol_herm: T,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        Self {
            sample_every: 1,
            tol_trace: T::lit(T::DEFAULT_TOL_TRACE),
            tol_herm: T::lit(T::DEFAULT_TOL),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<CMatrix<T>>,
    pub max_trace_drift: T,
    pub max_herm_drift: T,
}

impl<T: Real> Trajectory<T> {
    pub fn expectation(&self, op: &CMatrix<T>) -> Vec<C<T>> {
        self.states.iter().map(|rho| trace(&(rho * op))).collect()
    }

    pub fn final_state(&self) -> &CMatrix<T> {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Fixed-step RK4 on `ρ` from `t = 0` to `t_final`. The last step is
/// shortened if `t_final` is not a multiple of `dt`. After each step `ρ` is
/// symmetrized; drift measured before symmetrization above 100× the
/// tolerance aborts with [`Error::StepUnstable`].
pub fn integrate<T: Real>(
    sys: &OpenSystem<T>,
    sched: &Schedule<T>,
    rho0: &DensityMatrix<T>,
    t_final: T,
    dt: T,
    opts: &IntegrateOptions<T>,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || t_final < T::zero() {
        return Err(Error::InvalidArgument("need dt > 0 and t_final >= 0".into()));
    }
    if rho0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has dimension {}, system has {}",
            rho0.dim(),
            sys.dim()
        )));
    }
    let ratio = t_final / dt;
    let mut n_full = ratio.floor().to_usize().unwrap_or(0);
    let mut tail = t_final - dt * T::lit(n_full as f64);
    // absorb round-off so that t_final = n·dt does not produce a sliver step
    if tail < dt * T::lit(1e-9) {
        tail = T::zero();
    } else if dt - tail < dt * T::lit(1e-9) {
        n_full += 1;
        tail = T::zero();
    }
    let every = opts.sample_every.max(1);
    let half = cr(T::lit(0.5));
    let two = T::lit(2.0);
    let sixth = cr(T::one() / T::lit(6.0));

    let mut rho = rho0.matrix().clone();
    let mut times = vec![T::zero()];
    let mut states = vec![rho.clone()];
    let mut max_trace_drift = T::zero();
    let mut max_herm_drift = T::zero();
    let mut terms_t = sys.terms(sched, T::zero())?;

    let n_steps = n_full + usize::from(tail > T::zero());
    for step in 0..n_steps {
        let t = dt * T::lit(step as f64);
        let h = if step < n_full { dt } else { tail };
        let terms_mid = sys.terms(sched, t + h / two)?;
        let t_next = if step + 1 == n_steps { t_final } else { t + h };
        let terms_end = sys.terms(sched, t_next)?;
        let hc = cr(h);
        let k1 = terms_t.rhs(&rho);
        let k2 = terms_mid.rhs(&(&rho + &k1 * (hc * half)));
        let k3 = terms_mid.rhs(&(&rho + &k2 * (hc * half)));
        let k4 = terms_end.rhs(&(&rho + &k3 * hc));
        rho += (k1 + (k2 + k3) * cr(two) + k4) * (hc * sixth);

        let herm = hermiticity_deviation(&rho);
        let drift = (trace(&rho) - cr(T::one())).norm_sqr().sqrt();
        max_trace_drift = max_trace_drift.max(drift);
        max_herm_drift = max_herm_drift.max(herm);
        let limit = T::lit(100.0);
        if !(drift <= limit * opts.tol_trace) || !(herm <= limit * opts.tol_herm) {
            return Err(Error::StepUnstable {
                t: t_next.as_f64(),
                trace_drift: drift.as_f64(),
                herm_drift: herm.as_f64(),
            });
        }
        rho = (&rho + rho.adjoint()) * half;
        terms_t = terms_end;
        if (step + 1) % every == 0 || step + 1 == n_steps {
            times.push(t_next);
            states.push(rho.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        max_trace_drift,
        max_herm_drift,
    })
}

/// Max-abs difference between final states at `dt` and `dt/2`; a cheap
/// self-check of the step size.
pub fn step_halving_check<T: Real>(
    sys: &OpenSystem<T>,
    sched: &Schedule<T>,
    rho0: &DensityMatrix<T>,
    t_final: T,
    dt: T,
) -> Result<T> {
    let opts = IntegrateOptions {
        sample_every: usize::MAX,
        ..IntegrateOptions::default()
    };
    let coarse = integrate(sys, sched, rho0, t_final, dt, &opts)?;
    let fine = integrate(sys, sched, rho0, t_final, dt / T::lit(2.0), &opts)?;
    Ok(max_abs_diff(coarse.final_state(), fine.final_state()))
}
