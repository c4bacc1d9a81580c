use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scattering block of element `{element}` is not unitary (max deviation {deviation:.3e})")]
    NonUnitaryBlock { element: String, deviation: f64 },

    #[error("port coverage gap: {0}")]
    PortCoverageGap(String),

    #[error("invalid port table: {0}")]
    InvalidPorts(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("unknown port {0}")]
    UnknownPort(usize),

    #[error("port {port} appears twice as connection {side}")]
    DuplicateConnection { port: usize, side: &'static str },

    #[error("connection {from} -> {to} gives both a phase and a distance")]
    PhaseAndDistanceBothGiven { from: usize, to: usize },

    #[error("connection {from} -> {to} stays inside element `{element}` (self-loops are disabled)")]
    SelfLoop { from: usize, to: usize, element: String },

    #[error("hamiltonian of element `{element}` is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { element: String, deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coupling rate must be non-negative, got {0}")]
    NegativeRate(f64),

    #[error("loop is not weak: spectral radius of SW is {spectral_radius:.6} (limit {limit:.6})")]
    NonConvergentLoop { spectral_radius: f64, limit: f64 },

    #[error("1 - SW is numerically singular (condition number {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("internal identity violated (residual {residual:.3e}): {what}")]
    IdentityViolation { what: &'static str, residual: f64 },

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathExplosion { cap: usize },

    #[error("missing geometry: {0}")]
    MissingGeometry(String),

    #[error("no schedule for control `{0}`")]
    ScheduleMissing(String),

    #[error("invalid schedule `{name}`: {reason}")]
    InvalidSchedule { name: String, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("integration unstable at t = {t:.6e}: trace drift {trace_drift:.3e}, hermiticity drift {herm_drift:.3e}")]
    StepUnstable { t: f64, trace_drift: f64, herm_drift: f64 },

    #[error("network is not a two-qubit network: {0}")]
    NotTwoQubitNetwork(String),

    #[error("cos(δ+ − δ−) = {cos_delta:.4} ≥ 0: swap sender and receiver")]
    WrongDirectionality { cos_delta: f64 },

    #[error("β+ = 0: the qubits have no cross-coupling")]
    DegenerateBeta,

    #[error("non-positive Purcell factor (η_a = {eta_a:.4}, η_b = {eta_b:.4})")]
    NonPositivePurcell { eta_a: f64, eta_b: f64 },

    #[error("initial Bloch state is not pure in the excitation block: |b| = {norm:.12}, b0 = {b0:.12}")]
    InitialConditionMismatch { norm: f64, b0: f64 },

    #[error("dark-state bound violated at t = {t:.6e}: b0 = {b0:.9}, bound = {bound:.9}")]
    BoundViolated { t: f64, b0: f64, bound: f64 },

    #[error("specialized master equation differs from the generic generator (residual {residual:.3e})")]
    MismatchWithGenericGenerator { residual: f64 },

    #[error("could not draw a network in the requested class after {tries} tries")]
    SamplingExhausted { tries: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonUnitaryBlock { .. } => "NonUnitaryBlock",
            Error::PortCoverageGap(_) => "PortCoverageGap",
            Error::InvalidPorts(_) => "InvalidPorts",
            Error::UnknownElement(_) => "UnknownElement",
            Error::UnknownPort(_) => "UnknownPort",
            Error::DuplicateConnection { .. } => "DuplicateConnection",
            Error::PhaseAndDistanceBothGiven { .. } => "PhaseAndDistanceBothGiven",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::NonHermitian { .. } => "NonHermitian",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NegativeRate(_) => "NegativeRate",
            Error::NonConvergentLoop { .. } => "NonConvergentLoop",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::IdentityViolation { .. } => "IdentityViolation",
            Error::PathExplosion { .. } => "PathExplosion",
            Error::MissingGeometry(_) => "MissingGeometry",
            Error::ScheduleMissing(_) => "ScheduleMissing",
            Error::InvalidSchedule { .. } => "InvalidSchedule",
            Error::InvalidDensityMatrix(_) => "InvalidDensityMatrix",
            Error::StepUnstable { .. } => "StepUnstable",
            Error::NotTwoQubitNetwork(_) => "NotTwoQubitNetwork",
            Error::WrongDirectionality { .. } => "WrongDirectionality",
            Error::DegenerateBeta => "DegenerateBeta",
            Error::NonPositivePurcell { .. } => "NonPositivePurcell",
            Error::InitialConditionMismatch { .. } => "InitialConditionMismatch",
            Error::BoundViolated { .. } => "BoundViolated",
            Error::MismatchWithGenericGenerator { .. } => "MismatchWithGenericGenerator",
            Error::SamplingExhausted { .. } => "SamplingExhausted",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Schema(_) => "Schema",
            Error::Json(_) => "Json",
        }
    }

    /// True for errors that mean the input could not be read as a network
    /// description at all, as opposed to a well-formed but unphysical one.
    pub fn is_schema_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::Json(_)
                | Error::InvalidPorts(_)
                | Error::UnknownElement(_)
                | Error::UnknownPort(_)
                | Error::DuplicateConnection { .. }
                | Error::PhaseAndDistanceBothGiven { .. }
                | Error::SelfLoop { .. }
                | Error::DimensionMismatch(_)
                | Error::PortCoverageGap(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
