//! JSON network description.
//!
//! ```json
//! {
//!   "ports": [{"id": 0, "element": "qubit_a", "z": 0.0}],
//!   "blocks": [{"element": "qubit_a", "matrix": [[[1.0, 0.0]]]}],
//!   "systems": [{"element": "qubit_a", "dim": 2,
//!                "couplings": [{"port": 0, "op": "sigma_minus", "kappa": 1.0, "phi": 0.0}]}],
//!   "connections": [{"from": 0, "to": 1, "phase": 0.5}],
//!   "geometry": {"k0": 1.0, "v_p": 3e8, "kappa0": 1.0}
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major lists of
//! rows. A connection with neither `phase` nor `distance` takes its phase
//! from the port positions `z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    Connection, Coupling, CouplingOperator, Geometry, Link, LocalSystem, Network, Port,
    ScatteringBlock,
};
use crate::scalar::{c, CMatrix, Real};

type ComplexPair = [f64; 2];
type MatrixRows = Vec<Vec<ComplexPair>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub ports: Vec<PortFile>,
    pub blocks: Vec<BlockFile>,
    #[serde(default)]
    pub systems: Vec<SystemFile>,
    #[serde(default)]
    pub connections: Vec<ConnectionFile>,
    #[serde(default)]
    pub geometry: GeometryFile,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_self_loops: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortFile {
    pub id: usize,
    pub element: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub element: String,
    pub matrix: MatrixRows,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub element: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixRows>,
    #[serde(default)]
    pub couplings: Vec<CouplingFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorFile {
    Named(String),
    Matrix(MatrixRows),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub port: usize,
    pub op: OperatorFile,
    pub kappa: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionFile {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<f64>,
}

fn matrix_from_rows<T: Real>(rows: &MatrixRows, what: &str) -> Result<CMatrix<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Schema(format!("{what}: ragged matrix")));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| {
        let [re, im] = rows[i][j];
        c(T::lit(re), T::lit(im))
    }))
}

fn rows_from_matrix<T: Real>(m: &CMatrix<T>) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

impl NetworkFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Converts to the in-memory model. Only schema-level checks happen
    /// here; call [`Network::validate`] for the physics checks.
    pub fn to_network<T: Real>(&self) -> Result<Network<T>> {
        let ports = self
            .ports
            .iter()
            .map(|p| Port {
                id: p.id,
                element: p.element.clone(),
                z: p.z.map(T::lit),
                label: p.label.clone(),
            })
            .collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(ScatteringBlock {
                    element: b.element.clone(),
                    matrix: matrix_from_rows(&b.matrix, &format!("block `{}`", b.element))?,
                })
            })
            .collect::<Result<_>>()?;
        let systems = self
            .systems
            .iter()
            .map(|s| {
                let hamiltonian = match &s.hamiltonian {
                    Some(h) => matrix_from_rows(h, &format!("hamiltonian of `{}`", s.element))?,
                    None => CMatrix::zeros(s.dim, s.dim),
                };
                let couplings = s
                    .couplings
                    .iter()
                    .map(|cpl| {
                        let operator = match &cpl.op {
                            OperatorFile::Named(name) => match name.as_str() {
                                "sigma_minus" => CouplingOperator::SigmaMinus,
                                "sigma_plus" => CouplingOperator::SigmaPlus,
                                other => {
                                    return Err(Error::Schema(format!(
                                        "unknown coupling operator `{other}`"
                                    )))
                                }
                            },
                            OperatorFile::Matrix(rows) => CouplingOperator::Matrix(
                                matrix_from_rows(rows, &format!("coupling of `{}`", s.element))?,
                            ),
                        };
                        Ok(Coupling {
                            port: cpl.port,
                            operator,
                            kappa: T::lit(cpl.kappa),
                            phi: T::lit(cpl.phi),
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(LocalSystem {
                    element: s.element.clone(),
                    dim: s.dim,
                    hamiltonian,
                    couplings,
                })
            })
            .collect::<Result<_>>()?;
        let connections = self
            .connections
            .iter()
            .map(|cn| {
                let link = match (cn.phase, cn.distance) {
                    (Some(_), Some(_)) => {
                        return Err(Error::PhaseAndDistanceBothGiven {
                            from: cn.from,
                            to: cn.to,
                        })
                    }
                    (Some(p), None) => Link::Phase(T::lit(p)),
                    (None, Some(d)) => Link::Distance(T::lit(d)),
                    (None, None) => Link::PortSeparation,
                };
                Ok(Connection {
                    from: cn.from,
                    to: cn.to,
                    link,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Network {
            ports,
            blocks,
            systems,
            connections,
            geometry: Geometry {
                k0: self.geometry.k0.map(T::lit),
                v_p: self.geometry.v_p.map(T::lit),
                kappa0: self.geometry.kappa0.map(T::lit),
            },
            allow_self_loops: self.allow_self_loops,
        })
    }

    pub fn from_network<T: Real>(net: &Network<T>) -> Self {
        let f = |x: T| x.as_f64();
        Self {
            ports: net
                .ports
                .iter()
                .map(|p| PortFile {
                    id: p.id,
                    element: p.element.clone(),
                    z: p.z.map(f),
                    label: p.label.clone(),
                })
                .collect(),
            blocks: net
                .blocks
                .iter()
                .map(|b| BlockFile {
                    element: b.element.clone(),
                    matrix: rows_from_matrix(&b.matrix),
                })
                .collect(),
            systems: net
                .systems
                .iter()
                .map(|s| SystemFile {
                    element: s.element.clone(),
                    dim: s.dim,
                    hamiltonian: Some(rows_from_matrix(&s.hamiltonian)),
                    couplings: s
                        .couplings
                        .iter()
                        .map(|cpl| CouplingFile {
                            port: cpl.port,
                            op: match &cpl.operator {
                                CouplingOperator::SigmaMinus => OperatorFile::Named("sigma_minus".into()),
                                CouplingOperator::SigmaPlus => OperatorFile::Named("sigma_plus".into()),
                                CouplingOperator::Matrix(m) => OperatorFile::Matrix(rows_from_matrix(m)),
                            },
                            kappa: f(cpl.kappa),
                            phi: f(cpl.phi),
                        })
                        .collect(),
                })
                .collect(),
            connections: net
                .connections
                .iter()
                .map(|cn| {
                    let (phase, distance) = match cn.link {
                        Link::Phase(p) => (Some(f(p)), None),
                        Link::Distance(d) => (None, Some(f(d))),
                        Link::PortSeparation => (None, None),
                    };
                    ConnectionFile {
                        from: cn.from,
                        to: cn.to,
                        phase,
                        distance,
                    }
                })
                .collect(),
            geometry: GeometryFile {
                k0: net.geometry.k0.map(f),
                v_p: net.geometry.v_p.map(f),
                kappa0: net.geometry.kappa0.map(f),
            },
            allow_self_loops: net.allow_self_loops,
        }
    }
}

/// Parses a network description; JSON errors are reported as schema errors.
pub fn parse_network<T: Real>(text: &str) -> Result<Network<T>> {
    NetworkFile::from_json(text)?.to_network()
}

pub fn network_to_json<T: Real>(net: &Network<T>) -> Result<String> {
    NetworkFile::from_network(net).to_json()
}
