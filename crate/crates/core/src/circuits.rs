//! Ready-made networks used throughout the examples and tests.

use crate::linalg::{self, nearest_unitary};
use crate::network::{
    Connection, Coupling, CouplingOperator, Geometry, Link, LocalSystem, Network, Port,
    ScatteringBlock,
};
use crate::scalar::{c, cis, cr, CMatrix, Real, C};

fn port<T>(id: usize, element: &str, label: &str) -> Port<T> {
    Port {
        id,
        element: element.to_string(),
        z: None,
        label: Some(label.to_string()),
    }
}

fn block<T>(element: &str, matrix: CMatrix<T>) -> ScatteringBlock<T> {
    ScatteringBlock {
        element: element.to_string(),
        matrix,
    }
}

fn both_ways<T: Copy>(a: usize, b: usize, link: Link<T>) -> [Connection<T>; 2] {
    [
        Connection { from: a, to: b, link },
        Connection { from: b, to: a, link },
    ]
}

/// 1×1 block `e^{iθ}`.
pub fn phase_block<T: Real>(theta: T) -> CMatrix<T> {
    CMatrix::from_element(1, 1, cis(theta))
}

/// Ideal three-port circulator `1 → 2 → 3 → 1` (rows are outputs).
pub fn ideal_circulator<T: Real>() -> CMatrix<T> {
    let (z, o) = (cr(T::zero()), cr(T::one()));
    CMatrix::from_row_slice(3, 3, &[z, z, o, o, z, z, z, o, z])
}

/// Circulator from datasheet amplitudes: transmission `t` along `1→2→3→1`,
/// retro-reflection `r` on the diagonal and cross-talk `x` against the
/// circulation direction, projected onto the nearest unitary.
pub fn circulator_from_amplitudes<T: Real>(t: C<T>, r: C<T>, x: C<T>) -> CMatrix<T> {
    let b = CMatrix::from_row_slice(3, 3, &[r, x, t, t, r, x, x, t, r]);
    nearest_unitary(&b)
}

/// Magnitude-only circulator spec with real transmission and retro-reflection
/// and cross-talk in quadrature.
pub fn circulator_from_magnitudes<T: Real>(t: T, r: T, x: T) -> CMatrix<T> {
    circulator_from_amplitudes(cr(t), c(T::zero(), r), c(T::zero(), x))
}

/// Parameters of the two-qubit, two-circulator channel.
///
/// Port layout: `0` qubit a, `1,2,3` circulator 1, `4,5,6` circulator 2,
/// `7` qubit b. Bidirectional links `0↔1`, `2↔4` (interconnect), `5↔7`;
/// ports 3 and 6 are external. Ideal circulators route `a → b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec<T> {
    pub circulator_1: CMatrix<T>,
    pub circulator_2: CMatrix<T>,
    pub link_a: Link<T>,
    pub interconnect: Link<T>,
    pub link_b: Link<T>,
    pub kappa_a: T,
    pub kappa_b: T,
    pub phi_a: T,
    pub phi_b: T,
    pub h_a: CMatrix<T>,
    pub h_b: CMatrix<T>,
    pub geometry: Geometry<T>,
}

impl<T: Real> ChannelSpec<T> {
    /// Ideal circulators, zero-phase links, unit coupling rates.
    pub fn ideal() -> Self {
        Self {
            circulator_1: ideal_circulator(),
            circulator_2: ideal_circulator(),
            link_a: Link::Phase(T::zero()),
            interconnect: Link::Phase(T::zero()),
            link_b: Link::Phase(T::zero()),
            kappa_a: T::one(),
            kappa_b: T::one(),
            phi_a: T::zero(),
            phi_b: T::zero(),
            h_a: linalg::zeros(2, 2),
            h_b: linalg::zeros(2, 2),
            geometry: Geometry::default(),
        }
    }

    pub fn build(&self) -> Network<T> {
        let ports = vec![
            port(0, "qubit_a", "a"),
            port(1, "circulator_1", "1"),
            port(2, "circulator_1", "2"),
            port(3, "circulator_1", "3"),
            port(4, "circulator_2", "4"),
            port(5, "circulator_2", "5"),
            port(6, "circulator_2", "6"),
            port(7, "qubit_b", "b"),
        ];
        let blocks = vec![
            block("qubit_a", phase_block(T::zero())),
            block("circulator_1", self.circulator_1.clone()),
            block("circulator_2", self.circulator_2.clone()),
            block("qubit_b", phase_block(T::zero())),
        ];
        let qubit = |element: &str, port: usize, kappa: T, phi: T, h: &CMatrix<T>| LocalSystem {
            element: element.to_string(),
            dim: 2,
            hamiltonian: h.clone(),
            couplings: vec![Coupling {
                port,
                operator: CouplingOperator::SigmaMinus,
                kappa,
                phi,
            }],
        };
        let systems = vec![
            qubit("qubit_a", 0, self.kappa_a, self.phi_a, &self.h_a),
            qubit("qubit_b", 7, self.kappa_b, self.phi_b, &self.h_b),
        ];
        let mut connections = Vec::new();
        connections.extend(both_ways(0, 1, self.link_a));
        connections.extend(both_ways(2, 4, self.interconnect));
        connections.extend(both_ways(5, 7, self.link_b));
        Network {
            ports,
            blocks,
            systems,
            connections,
            geometry: self.geometry,
            allow_self_loops: false,
        }
    }
}

/// Port ids of the two qubits in [`ChannelSpec::build`].
pub const CHANNEL_QUBIT_PORTS: (usize, usize) = (0, 7);

/// Ideal two-circulator channel with the given interconnect phase.
pub fn perfect_channel<T: Real>(kappa_a: T, kappa_b: T, interconnect_phase: T) -> Network<T> {
    ChannelSpec {
        kappa_a,
        kappa_b,
        interconnect: Link::Phase(interconnect_phase),
        ..ChannelSpec::ideal()
    }
    .build()
}

/// Fabry–Pérot cavity: mirror `ℓ` on ports `(0, 1)`, mirror `r` on ports
/// `(2, 3)`, bidirectional link `1↔2` with round-trip half phase `phase`.
/// Mirrors are `[[r, t], [t, −r]]` and `[[−r, t], [t, r]]` with `t = √(1−r²)`.
pub fn fabry_perot<T: Real>(r_left: T, r_right: T, phase: T) -> Network<T> {
    let mirror = |r: T, sign: T| {
        let t = (T::one() - r * r).sqrt();
        CMatrix::from_row_slice(2, 2, &[cr(sign * r), cr(t), cr(t), cr(-sign * r)])
    };
    Network {
        ports: vec![
            port(0, "mirror_left", "outer"),
            port(1, "mirror_left", "inner"),
            port(2, "mirror_right", "inner"),
            port(3, "mirror_right", "outer"),
        ],
        blocks: vec![
            block("mirror_left", mirror(r_left, T::one())),
            block("mirror_right", mirror(r_right, -T::one())),
        ],
        systems: Vec::new(),
        connections: both_ways(1, 2, Link::Phase(phase)).to_vec(),
        geometry: Geometry::default(),
        allow_self_loops: false,
    }
}

/// Analytic Fabry–Pérot transmission `t_ℓ t_r e^{iφ} / (1 − r_ℓ r_r e^{2iφ})`.
pub fn fabry_perot_transmission<T: Real>(r_left: T, r_right: T, phase: T) -> C<T> {
    let tl = (T::one() - r_left * r_left).sqrt();
    let tr = (T::one() - r_right * r_right).sqrt();
    let two = T::lit(2.0);
    cis(phase) * (tl * tr) / (cr(T::one()) - cis(two * phase) * (r_left * r_right))
}

/// A two-port transparent qubit in front of a mirror.
///
/// Ports: `0` faces the open guide, `1` faces the mirror (port `2`, block
/// `e^{iθ}`). The qubit emits `√κ e^{iφ} e^{−ik₀z} σ⁻` into port 0 and
/// `√κ e^{iφ} e^{+ik₀z} σ⁻` into port 1; the link `1↔2` carries no extra
/// phase, so the single external output sees
/// `|L_eff| = 2√κ |cos(k₀z + θ/2)|`.
pub fn mirror_qubit<T: Real>(kappa: T, phi: T, k0z: T, theta: T) -> Network<T> {
    let (z, o) = (cr(T::zero()), cr(T::one()));
    let coupling = |port: usize, extra: T| Coupling {
        port,
        operator: CouplingOperator::SigmaMinus,
        kappa,
        phi: phi + extra,
    };
    Network {
        ports: vec![
            port(0, "qubit", "open"),
            port(1, "qubit", "mirror side"),
            port(2, "mirror", "mirror"),
        ],
        blocks: vec![
            block("qubit", CMatrix::from_row_slice(2, 2, &[z, o, o, z])),
            block("mirror", phase_block(theta)),
        ],
        systems: vec![LocalSystem {
            element: "qubit".into(),
            dim: 2,
            hamiltonian: linalg::zeros(2, 2),
            couplings: vec![coupling(0, -k0z), coupling(1, k0z)],
        }],
        connections: both_ways(1, 2, Link::Phase(T::zero())).to_vec(),
        geometry: Geometry::default(),
        allow_self_loops: false,
    }
}

/// Crossed-waveguide network: two one-port terminations `a`, `b` (blocks
/// `e^{iθ_a}`, `e^{iθ_b}`) on ports 0, 1 and a four-port junction on ports
/// 2–5, with bidirectional links `0↔2` and `1↔4`.
pub fn crossed_waveguide<T: Real>(
    theta_a: T,
    theta_b: T,
    junction: CMatrix<T>,
    phi_1a: T,
    phi_3b: T,
) -> Network<T> {
    let mut connections = both_ways(0, 2, Link::Phase(phi_1a)).to_vec();
    connections.extend(both_ways(1, 4, Link::Phase(phi_3b)));
    Network {
        ports: vec![
            port(0, "a", "a"),
            port(1, "b", "b"),
            port(2, "junction", "1"),
            port(3, "junction", "2"),
            port(4, "junction", "3"),
            port(5, "junction", "4"),
        ],
        blocks: vec![
            block("a", phase_block(theta_a)),
            block("b", phase_block(theta_b)),
            block("junction", junction),
        ],
        systems: Vec::new(),
        connections,
        geometry: Geometry::default(),
        allow_self_loops: false,
    }
}
