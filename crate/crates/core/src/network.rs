//! Unconnected network elements and the connection topology.
//!
//! A [`Network`] is a list of ports, one unitary scattering block per
//! element, optional local quantum systems coupled to some of the ports, and
//! a list of output-to-input connections. From it we assemble the global
//! scattering matrix `S` (inputs → outputs, columns index inputs), the
//! connection matrix `W` (internal outputs → internal inputs, columns index
//! outputs) and the vector `L` of coupling operators indexed by output port.
//!
//! Qubit conventions: local basis `{|↑⟩, |↓⟩}` (excited first); joint space
//! is the tensor product of the local systems in declaration order with the
//! first system most significant.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::linalg::{self, embed, hermiticity_deviation, qubit, unitarity_deviation};
use crate::scalar::{cis, cr, CMatrix, Real};

pub type ElementId = String;

/// Numerical tolerances for the structural checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Max-abs deviation allowed in `B†B = 1`.
    pub unitary: T,
    /// Max-abs deviation allowed in `H = H†`.
    pub herm: T,
    /// Max-abs residual allowed in identities involving `(1 − SW)⁻¹`.
    pub solve: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            unitary: T::lit(T::DEFAULT_TOL),
            herm: T::lit(T::DEFAULT_TOL),
            solve: T::lit(T::DEFAULT_TOL_SOLVE),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Port<T> {
    pub id: usize,
    pub element: ElementId,
    /// Position along the guide in meters.
    pub z: Option<T>,
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringBlock<T> {
    pub element: ElementId,
    /// Square matrix over the element's ports, ordered by global port id.
    pub matrix: CMatrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingOperator<T> {
    SigmaMinus,
    SigmaPlus,
    Matrix(CMatrix<T>),
}

impl<T: Real> CouplingOperator<T> {
    pub fn resolve(&self, dim: usize) -> Result<CMatrix<T>> {
        match self {
            CouplingOperator::SigmaMinus | CouplingOperator::SigmaPlus if dim != 2 => {
                Err(Error::DimensionMismatch(format!(
                    "sigma operators need a two-level system, got dimension {dim}"
                )))
            }
            CouplingOperator::SigmaMinus => Ok(qubit::sigma_minus()),
            CouplingOperator::SigmaPlus => Ok(qubit::sigma_plus()),
            CouplingOperator::Matrix(m) if m.shape() == (dim, dim) => Ok(m.clone()),
            CouplingOperator::Matrix(m) => Err(Error::DimensionMismatch(format!(
                "coupling operator is {}x{}, local space has dimension {dim}",
                m.nrows(),
                m.ncols()
            ))),
        }
    }
}

/// One system-field coupling, `L_port = √κ e^{iφ} A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<T> {
    pub port: usize,
    pub operator: CouplingOperator<T>,
    pub kappa: T,
    pub phi: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSystem<T> {
    pub element: ElementId,
    pub dim: usize,
    pub hamiltonian: CMatrix<T>,
    pub couplings: Vec<Coupling<T>>,
}

impl<T: Real> LocalSystem<T> {
    /// Two-level system with zero Hamiltonian and a single `σ⁻` coupling.
    pub fn qubit(element: impl Into<ElementId>, port: usize, kappa: T, phi: T) -> Self {
        Self {
            element: element.into(),
            dim: 2,
            hamiltonian: linalg::zeros(2, 2),
            couplings: vec![Coupling {
                port,
                operator: CouplingOperator::SigmaMinus,
                kappa,
                phi,
            }],
        }
    }
}

/// How the propagation phase of a connection is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link<T> {
    /// Explicit phase in radians.
    Phase(T),
    /// Guide length in meters; phase is `k₀·distance`.
    Distance(T),
    /// Phase `k₀|z_from − z_to|` from the port positions.
    PortSeparation,
}

/// Routes output `from` into input `to`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Connection<T> {
    pub from: usize,
    pub to: usize,
    pub link: Link<T>,
}

impl<T> Connection<T> {
    pub fn phase(from: usize, to: usize, phase: T) -> Self {
        Self {
            from,
            to,
            link: Link::Phase(phase),
        }
    }

    pub fn distance(from: usize, to: usize, distance: T) -> Self {
        Self {
            from,
            to,
            link: Link::Distance(distance),
        }
    }
}

/// Field parameters: carrier wave number `k₀` (rad/m), phase velocity `v_p`
/// (m/s) and reference coupling rate `κ₀` (rad/s).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Geometry<T> {
    pub k0: Option<T>,
    pub v_p: Option<T>,
    pub kappa0: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub ports: Vec<Port<T>>,
    pub blocks: Vec<ScatteringBlock<T>>,
    pub systems: Vec<LocalSystem<T>>,
    pub connections: Vec<Connection<T>>,
    pub geometry: Geometry<T>,
    /// Permit connections whose ends belong to the same element.
    pub allow_self_loops: bool,
}

/// Internal/external split of the port set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub n_ports: usize,
    pub internal_inputs: Vec<usize>,
    pub internal_outputs: Vec<usize>,
    pub external_inputs: Vec<usize>,
    pub external_outputs: Vec<usize>,
}

impl Partition {
    /// Reads the partition off the nonzero pattern of `W` (rows are
    /// inputs, columns are outputs).
    pub fn from_connection_matrix<T: Real>(w: &CMatrix<T>) -> Self {
        let n = w.nrows();
        let zero = T::zero();
        let row_used = |i: usize| (0..n).any(|j| w[(i, j)].modulus() > zero);
        let col_used = |j: usize| (0..n).any(|i| w[(i, j)].modulus() > zero);
        let (internal_inputs, external_inputs) = (0..n).partition(|&i| row_used(i));
        let (internal_outputs, external_outputs) = (0..n).partition(|&j| col_used(j));
        Self {
            n_ports: n,
            internal_inputs,
            internal_outputs,
            external_inputs,
            external_outputs,
        }
    }

    pub fn m(&self) -> usize {
        self.internal_inputs.len()
    }

    fn projector<T: Real>(&self, members: &[usize]) -> CMatrix<T> {
        let mut p = linalg::zeros(self.n_ports, self.n_ports);
        for &k in members {
            p[(k, k)] = cr(T::one());
        }
        p
    }

    /// `X_i`, projector onto external inputs.
    pub fn x_in<T: Real>(&self) -> CMatrix<T> {
        self.projector(&self.external_inputs)
    }

    /// `I_i`, projector onto internal inputs.
    pub fn i_in<T: Real>(&self) -> CMatrix<T> {
        self.projector(&self.internal_inputs)
    }

    /// `X_o`, projector onto external outputs.
    pub fn x_out<T: Real>(&self) -> CMatrix<T> {
        self.projector(&self.external_outputs)
    }

    /// `I_o`, projector onto internal outputs.
    pub fn i_out<T: Real>(&self) -> CMatrix<T> {
        self.projector(&self.internal_outputs)
    }
}

/// Coupling of one output port, with the operator already embedded in the
/// joint Hilbert space: `L = √κ e^{iφ} A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Source<T> {
    pub port: usize,
    pub element: ElementId,
    pub operator: CMatrix<T>,
    pub kappa: T,
    pub phi: T,
}

impl<T: Real> Source<T> {
    pub fn amplitude_for(kappa: T, phi: T) -> crate::scalar::C<T> {
        cis(phi) * kappa.sqrt()
    }

    pub fn amplitude(&self) -> crate::scalar::C<T> {
        Self::amplitude_for(self.kappa, self.phi)
    }

    pub fn l_operator(&self) -> CMatrix<T> {
        &self.operator * self.amplitude()
    }
}

impl<T: Real> Network<T> {
    pub fn n_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn port(&self, id: usize) -> Result<&Port<T>> {
        self.ports
            .iter()
            .find(|p| p.id == id)
            .ok_or(Error::UnknownPort(id))
    }

    /// Global ids of the ports owned by `element`, ascending.
    pub fn element_ports(&self, element: &str) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .ports
            .iter()
            .filter(|p| p.element == element)
            .map(|p| p.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Element names in first-appearance order of the port table.
    pub fn elements(&self) -> Vec<ElementId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut ports: Vec<&Port<T>> = self.ports.iter().collect();
        ports.sort_by_key(|p| p.id);
        for p in ports {
            if seen.insert(p.element.clone()) {
                out.push(p.element.clone());
            }
        }
        out
    }

    /// Dimensions of the local Hilbert spaces, in declaration order.
    pub fn joint_dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn joint_dim(&self) -> usize {
        self.joint_dims().iter().product()
    }

    /// Index of the local system owned by `element`, if any.
    pub fn system_index(&self, element: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.element == element)
    }

    /// Runs every structural check: port table, block coverage and
    /// unitarity, local systems and the connection list.
    pub fn validate(&self, tol: &Tolerances<T>) -> Result<()> {
        self.check_ports()?;
        self.check_blocks(tol)?;
        self.check_systems(tol)?;
        self.check_connections()?;
        Ok(())
    }

    fn check_ports(&self) -> Result<()> {
        let n = self.ports.len();
        let mut seen = vec![false; n];
        for p in &self.ports {
            if p.id >= n {
                return Err(Error::InvalidPorts(format!(
                    "port id {} outside 0..{n}",
                    p.id
                )));
            }
            if std::mem::replace(&mut seen[p.id], true) {
                return Err(Error::InvalidPorts(format!("port id {} repeated", p.id)));
            }
            if p.element.is_empty() {
                return Err(Error::InvalidPorts(format!("port {} has no element", p.id)));
            }
        }
        Ok(())
    }

    fn check_blocks(&self, tol: &Tolerances<T>) -> Result<()> {
        let mut covered = BTreeSet::new();
        for block in &self.blocks {
            let ports = self.element_ports(&block.element);
            if ports.is_empty() {
                return Err(Error::UnknownElement(block.element.clone()));
            }
            if !covered.insert(block.element.clone()) {
                return Err(Error::PortCoverageGap(format!(
                    "element `{}` has more than one scattering block",
                    block.element
                )));
            }
            if block.matrix.shape() != (ports.len(), ports.len()) {
                return Err(Error::DimensionMismatch(format!(
                    "block of `{}` is {}x{} but the element has {} ports",
                    block.element,
                    block.matrix.nrows(),
                    block.matrix.ncols(),
                    ports.len()
                )));
            }
            let deviation = unitarity_deviation(&block.matrix);
            if !(deviation < tol.unitary) {
                return Err(Error::NonUnitaryBlock {
                    element: block.element.clone(),
                    deviation: deviation.as_f64(),
                });
            }
        }
        for element in self.elements() {
            if !covered.contains(&element) {
                return Err(Error::PortCoverageGap(format!(
                    "element `{element}` has ports but no scattering block"
                )));
            }
        }
        Ok(())
    }

    fn check_systems(&self, tol: &Tolerances<T>) -> Result<()> {
        let mut seen = BTreeSet::new();
        for sys in &self.systems {
            if !seen.insert(sys.element.clone()) {
                return Err(Error::Schema(format!(
                    "element `{}` declares more than one local system",
                    sys.element
                )));
            }
            if sys.dim == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "system `{}` has dimension 0",
                    sys.element
                )));
            }
            if sys.hamiltonian.shape() != (sys.dim, sys.dim) {
                return Err(Error::DimensionMismatch(format!(
                    "hamiltonian of `{}` is {}x{}, expected {}x{}",
                    sys.element,
                    sys.hamiltonian.nrows(),
                    sys.hamiltonian.ncols(),
                    sys.dim,
                    sys.dim
                )));
            }
            let deviation = hermiticity_deviation(&sys.hamiltonian);
            if !(deviation < tol.herm) {
                return Err(Error::NonHermitian {
                    element: sys.element.clone(),
                    deviation: deviation.as_f64(),
                });
            }
            let own = self.element_ports(&sys.element);
            let mut coupled = BTreeSet::new();
            for cpl in &sys.couplings {
                if !own.contains(&cpl.port) {
                    return Err(Error::Schema(format!(
                        "system `{}` couples to port {} which belongs to another element",
                        sys.element, cpl.port
                    )));
                }
                if !coupled.insert(cpl.port) {
                    return Err(Error::Schema(format!(
                        "system `{}` couples to port {} twice",
                        sys.element, cpl.port
                    )));
                }
                if cpl.kappa < T::zero() {
                    return Err(Error::NegativeRate(cpl.kappa.as_f64()));
                }
                cpl.operator.resolve(sys.dim)?;
            }
        }
        Ok(())
    }

    fn check_connections(&self) -> Result<()> {
        let n = self.ports.len();
        let mut from_seen = BTreeSet::new();
        let mut to_seen = BTreeSet::new();
        for conn in &self.connections {
            for id in [conn.from, conn.to] {
                if id >= n {
                    return Err(Error::UnknownPort(id));
                }
            }
            if !from_seen.insert(conn.from) {
                return Err(Error::DuplicateConnection {
                    port: conn.from,
                    side: "source (output)",
                });
            }
            if !to_seen.insert(conn.to) {
                return Err(Error::DuplicateConnection {
                    port: conn.to,
                    side: "target (input)",
                });
            }
            let from_el = &self.port(conn.from)?.element;
            let to_el = &self.port(conn.to)?.element;
            if from_el == to_el && !self.allow_self_loops {
                return Err(Error::SelfLoop {
                    from: conn.from,
                    to: conn.to,
                    element: from_el.clone(),
                });
            }
        }
        Ok(())
    }

    /// Block-diagonal scattering matrix in global port order.
    pub fn assemble_s(&self, tol: &Tolerances<T>) -> Result<CMatrix<T>> {
        self.check_ports()?;
        self.check_blocks(tol)?;
        let n = self.n_ports();
        let mut s = linalg::zeros(n, n);
        for block in &self.blocks {
            let ports = self.element_ports(&block.element);
            for (a, &pa) in ports.iter().enumerate() {
                for (b, &pb) in ports.iter().enumerate() {
                    s[(pa, pb)] = block.matrix[(a, b)];
                }
            }
        }
        let deviation = unitarity_deviation(&s);
        if !(deviation < tol.unitary) {
            return Err(Error::NonUnitaryBlock {
                element: "<assembled S>".into(),
                deviation: deviation.as_f64(),
            });
        }
        Ok(s)
    }

    /// Propagation phase of a connection.
    pub fn link_phase(&self, conn: &Connection<T>) -> Result<T> {
        match conn.link {
            Link::Phase(p) => Ok(p),
            Link::Distance(d) => {
                let k0 = self.geometry.k0.ok_or_else(|| {
                    Error::MissingGeometry(format!(
                        "connection {} -> {} gives a distance but k0 is not set",
                        conn.from, conn.to
                    ))
                })?;
                Ok(k0 * d)
            }
            Link::PortSeparation => {
                let k0 = self.geometry.k0.ok_or_else(|| {
                    Error::MissingGeometry("k0 is needed for port-separation phases".into())
                })?;
                let d = self.port_separation(conn.from, conn.to).ok_or_else(|| {
                    Error::MissingGeometry(format!(
                        "ports {} and {} need z coordinates",
                        conn.from, conn.to
                    ))
                })?;
                Ok(k0 * d)
            }
        }
    }

    fn port_separation(&self, a: usize, b: usize) -> Option<T> {
        let za = self.port(a).ok()?.z?;
        let zb = self.port(b).ok()?.z?;
        Some((za - zb).abs())
    }

    /// Guide length travelled along a connection, when known.
    pub fn hop_length(&self, conn: &Connection<T>) -> Option<T> {
        match conn.link {
            Link::Distance(d) => Some(d.abs()),
            _ => self.port_separation(conn.from, conn.to),
        }
    }

    /// Connection matrix: `W[to, from] = e^{iφ}`.
    pub fn assemble_w(&self) -> Result<CMatrix<T>> {
        self.check_ports()?;
        self.check_connections()?;
        let n = self.n_ports();
        let mut w = linalg::zeros(n, n);
        for conn in &self.connections {
            w[(conn.to, conn.from)] = cis(self.link_phase(conn)?);
        }
        Ok(w)
    }

    pub fn partition_ports(&self) -> Result<Partition> {
        Ok(Partition::from_connection_matrix(&self.assemble_w()?))
    }

    /// Per-port couplings with operators embedded in the joint space;
    /// `None` for uncoupled ports.
    pub fn sources(&self) -> Result<Vec<Option<Source<T>>>> {
        let n = self.n_ports();
        let dims = self.joint_dims();
        let mut out: Vec<Option<Source<T>>> = vec![None; n];
        for (idx, sys) in self.systems.iter().enumerate() {
            for cpl in &sys.couplings {
                if cpl.port >= n {
                    return Err(Error::UnknownPort(cpl.port));
                }
                let local = cpl.operator.resolve(sys.dim)?;
                out[cpl.port] = Some(Source {
                    port: cpl.port,
                    element: sys.element.clone(),
                    operator: embed(&local, &dims, idx),
                    kappa: cpl.kappa,
                    phi: cpl.phi,
                });
            }
        }
        Ok(out)
    }

    /// The operator vector `L`, one joint-space operator per output port.
    pub fn assemble_l(&self) -> Result<Vec<CMatrix<T>>> {
        let d = self.joint_dim();
        Ok(self
            .sources()?
            .into_iter()
            .map(|src| match src {
                Some(src) => src.l_operator(),
                None => linalg::zeros(d, d),
            })
            .collect())
    }

    /// Sum of the local Hamiltonians embedded in the joint space.
    pub fn assemble_h(&self) -> CMatrix<T> {
        let dims = self.joint_dims();
        let d = self.joint_dim();
        self.systems
            .iter()
            .enumerate()
            .fold(linalg::zeros(d, d), |acc, (idx, sys)| {
                acc + embed(&sys.hamiltonian, &dims, idx)
            })
    }

    /// Largest nominal coupling rate, falling back on the geometry's `κ₀`.
    pub fn kappa_max(&self) -> Option<T> {
        let from_couplings = self
            .systems
            .iter()
            .flat_map(|s| s.couplings.iter().map(|c| c.kappa))
            .fold(None, |acc: Option<T>, k| Some(acc.map_or(k, |a| a.max(k))));
        match from_couplings {
            Some(k) if k > T::zero() => Some(k),
            _ => self.geometry.kappa0,
        }
    }

    /// Rename ports: old id `k` becomes `perm[k]`. Scattering blocks are
    /// re-ordered so that each element keeps its physical behavior.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_ports();
        if perm.len() != n || perm.iter().copied().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidArgument("relabeling is not a permutation".into()));
        }
        if perm.iter().any(|&p| p >= n) {
            return Err(Error::InvalidArgument("relabeling out of range".into()));
        }
        let ports = self
            .ports
            .iter()
            .map(|p| Port {
                id: perm[p.id],
                ..p.clone()
            })
            .collect();
        let mut relabeled = Self {
            ports,
            blocks: Vec::new(),
            systems: self.systems.clone(),
            connections: self
                .connections
                .iter()
                .map(|c| Connection {
                    from: perm[c.from],
                    to: perm[c.to],
                    link: c.link,
                })
                .collect(),
            geometry: self.geometry,
            allow_self_loops: self.allow_self_loops,
        };
        for sys in &mut relabeled.systems {
            for cpl in &mut sys.couplings {
                cpl.port = perm[cpl.port];
            }
        }
        for block in &self.blocks {
            let old = self.element_ports(&block.element);
            let new_order = relabeled.element_ports(&block.element);
            // position of each new id inside the old ordering
            let index_of: BTreeMap<usize, usize> =
                old.iter().enumerate().map(|(i, &p)| (perm[p], i)).collect();
            let k = old.len();
            let mut m = linalg::zeros(k, k);
            for (a, pa) in new_order.iter().enumerate() {
                for (b, pb) in new_order.iter().enumerate() {
                    m[(a, b)] = block.matrix[(index_of[pa], index_of[pb])];
                }
            }
            relabeled.blocks.push(ScatteringBlock {
                element: block.element.clone(),
                matrix: m,
            });
        }
        Ok(relabeled)
    }
}
