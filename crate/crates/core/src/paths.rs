//! Scattering-path expansion of the contracted network.
//!
//! `G = Σ_n (SW)ⁿ`, so every entry of `S_eff`, `M` and `T` is a coherent sum
//! over paths that traverse the internal links a given number of times. The
//! enumerator walks these paths depth-first over output ports: from output
//! `j` the next output is `j'` with weight `(SW)_{j'j}`, and the hop adds
//! the length of the link leaving `j` to the path delay.
//!
//! Because `S` is unitary and `W` a partial isometry, `|(SW)_{j'j}| ≤ 1`, so
//! path weights never grow along a path and pruning at `min_weight` is
//! exact: no discarded prefix can lead to a path above the threshold.

use std::collections::BTreeSet;

use crate::contraction::combine_operators;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{Network, Partition, Tolerances};
use crate::scalar::{abs, cr, CMatrix, Real, C};

pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// Where a path starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathStart {
    /// Field entering at an external input.
    ExternalInput(usize),
    /// Emission of the source `L_k` into output `k`.
    Source(usize),
}

/// Where a path ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathEnd {
    /// Field leaving through an external output (contributes to `S_eff`/`M`).
    ExternalOutput(usize),
    /// Field arriving back at a coupled output port after at least one
    /// traversal (contributes to `T`).
    Source(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord<T> {
    pub start: PathStart,
    pub end: PathEnd,
    /// Entry port, then alternating (input, output) pairs for every internal
    /// hop, ending at the exit output.
    pub ports: Vec<usize>,
    /// Number of `SW` factors in the weight.
    pub n_traversals: usize,
    pub weight: C<T>,
    /// Total propagation delay in seconds, when the geometry is known.
    pub delay: Option<T>,
    /// Total guide length travelled, when known.
    pub length: Option<T>,
}

impl<T: Real> PathRecord<T> {
    pub fn magnitude(&self) -> T {
        abs(self.weight)
    }

    pub fn port_string(&self) -> String {
        self.ports
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// Inputs to the path enumerator: `S`, `W`, the coupled ports and, per
/// internal output, the length of the link leaving it.
#[derive(Clone, Debug, PartialEq)]
pub struct PathGraph<T> {
    pub s: CMatrix<T>,
    pub w: CMatrix<T>,
    pub sources: Vec<usize>,
    /// `hop_length[j]` for the link leaving output `j`.
    pub hop_length: Vec<Option<T>>,
    pub v_p: Option<T>,
    partition: Partition,
    /// `target[j]`: the input fed by output `j`.
    target: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationLimits<T> {
    pub max_order: usize,
    pub min_weight: T,
    pub cap: usize,
}

impl<T: Real> EnumerationLimits<T> {
    pub fn new(max_order: usize, min_weight: T) -> Self {
        Self {
            max_order,
            min_weight,
            cap: DEFAULT_PATH_CAP,
        }
    }
}

impl<T: Real> PathGraph<T> {
    pub fn new(s: CMatrix<T>, w: CMatrix<T>) -> Self {
        let n = s.nrows();
        let partition = Partition::from_connection_matrix(&w);
        let target = (0..n)
            .map(|j| (0..n).find(|&i| abs(w[(i, j)]) > T::zero()))
            .collect();
        Self {
            s,
            w,
            sources: Vec::new(),
            hop_length: vec![None; n],
            v_p: None,
            partition,
            target,
        }
    }

    pub fn with_sources(mut self, sources: impl IntoIterator<Item = usize>) -> Self {
        self.sources = sources.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        self
    }

    pub fn from_network(net: &Network<T>, tol: &Tolerances<T>) -> Result<Self> {
        let s = net.assemble_s(tol)?;
        let w = net.assemble_w()?;
        let sources = net
            .sources()?
            .into_iter()
            .flatten()
            .map(|src| src.port)
            .collect::<Vec<_>>();
        let mut graph = Self::new(s, w).with_sources(sources);
        for conn in &net.connections {
            graph.hop_length[conn.from] = net.hop_length(conn);
        }
        graph.v_p = net.geometry.v_p;
        Ok(graph)
    }

    pub fn n_ports(&self) -> usize {
        self.s.nrows()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn sigma_max_sw(&self) -> T {
        linalg::sigma_max(&(&self.s * &self.w))
    }

    fn is_external_output(&self, j: usize) -> bool {
        self.target[j].is_none()
    }

    /// Depth-first enumeration of every path with at most `max_order`
    /// traversals and `|w| ≥ min_weight`. Paths are produced in a fixed
    /// order: starts ascending (external inputs, then sources), next ports
    /// ascending. `cap` bounds the number of visited path prefixes.
    pub fn enumerate(&self, limits: &EnumerationLimits<T>) -> Result<Vec<PathRecord<T>>> {
        if !(limits.min_weight > T::zero()) {
            return Err(Error::InvalidArgument("min_weight must be positive".into()));
        }
        let n = self.n_ports();
        let is_source: Vec<bool> = (0..n).map(|j| self.sources.contains(&j)).collect();
        let mut out = Vec::new();
        let mut visited = 0usize;

        struct Frame<T> {
            output: usize,
            weight: C<T>,
            n: usize,
            ports: Vec<usize>,
            length: Option<T>,
        }

        let mut starts: Vec<(PathStart, Vec<Frame<T>>)> = Vec::new();
        for &k in &self.partition.external_inputs {
            let frames = (0..n)
                .filter(|&j| abs(self.s[(j, k)]) > T::zero())
                .map(|j| Frame {
                    output: j,
                    weight: self.s[(j, k)],
                    n: 0,
                    ports: vec![k, j],
                    length: Some(T::zero()),
                })
                .collect();
            starts.push((PathStart::ExternalInput(k), frames));
        }
        for &k in &self.sources {
            starts.push((
                PathStart::Source(k),
                vec![Frame {
                    output: k,
                    weight: cr(T::one()),
                    n: 0,
                    ports: vec![k],
                    length: Some(T::zero()),
                }],
            ));
        }

        for (start, frames) in starts {
            let mut stack: Vec<Frame<T>> = frames.into_iter().rev().collect();
            while let Some(f) = stack.pop() {
                visited += 1;
                if visited > limits.cap {
                    return Err(Error::PathExplosion { cap: limits.cap });
                }
                if abs(f.weight) < limits.min_weight {
                    continue;
                }
                let record = |end: PathEnd| PathRecord {
                    start,
                    end,
                    ports: f.ports.clone(),
                    n_traversals: f.n,
                    weight: f.weight,
                    delay: self.delay(f.length),
                    length: f.length,
                };
                let Some(i) = self.target[f.output] else {
                    out.push(record(PathEnd::ExternalOutput(f.output)));
                    continue;
                };
                if f.n >= 1 && is_source[f.output] {
                    out.push(record(PathEnd::Source(f.output)));
                }
                if f.n >= limits.max_order {
                    continue;
                }
                let hop = self.w[(i, f.output)];
                let length = match (f.length, self.hop_length[f.output]) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
                for j in (0..n).rev() {
                    let sji = self.s[(j, i)];
                    if abs(sji) == T::zero() {
                        continue;
                    }
                    let mut ports = f.ports.clone();
                    ports.push(i);
                    ports.push(j);
                    stack.push(Frame {
                        output: j,
                        weight: f.weight * hop * sji,
                        n: f.n + 1,
                        ports,
                        length,
                    });
                }
            }
        }
        debug_assert!(out
            .iter()
            .all(|p| !matches!(p.end, PathEnd::ExternalOutput(j) if !self.is_external_output(j))));
        Ok(out)
    }

    fn delay(&self, length: Option<T>) -> Option<T> {
        match (length, self.v_p) {
            (Some(l), _) if l == T::zero() => Some(T::zero()),
            (Some(l), Some(v)) => Some(l / v),
            _ => None,
        }
    }

    /// Weight of a port sequence recomputed from the matrix entries, for
    /// cross-checking enumerated paths.
    pub fn weight_of(&self, start: PathStart, ports: &[usize]) -> C<T> {
        let (mut w, mut prev, rest) = match start {
            PathStart::ExternalInput(k) => (self.s[(ports[1], k)], ports[1], &ports[2..]),
            PathStart::Source(k) => (cr(T::one()), k, &ports[1..]),
        };
        for hop in rest.chunks(2) {
            let (i, j) = (hop[0], hop[1]);
            w *= self.w[(i, prev)] * self.s[(j, i)];
            prev = j;
        }
        w
    }
}

/// Path sums grouped by (start, end).
pub fn sum_paths<T: Real>(paths: &[PathRecord<T>]) -> Vec<(PathStart, PathEnd, C<T>)> {
    let mut sums: std::collections::BTreeMap<(PathStart, PathEnd), C<T>> = Default::default();
    for p in paths {
        *sums.entry((p.start, p.end)).or_insert(cr(T::zero())) += p.weight;
    }
    sums.into_iter().map(|((s, e), w)| (s, e, w)).collect()
}

/// Brute-force truncation of the resolvent series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesOracle<T> {
    /// `X_o [Σ_{n≤N} (SW)ⁿ] S X_i`, external rows and columns.
    pub s_eff: CMatrix<T>,
    /// `X_o Σ_{n≤N} (SW)ⁿ`, external rows.
    pub l_eff_coeffs: CMatrix<T>,
    /// Coefficients applied to the supplied operators.
    pub l_eff: Vec<CMatrix<T>>,
}

pub fn truncated_series_oracle<T: Real>(
    s: &CMatrix<T>,
    w: &CMatrix<T>,
    l: &[CMatrix<T>],
    n_terms: usize,
) -> SeriesOracle<T> {
    let n = s.nrows();
    let sw = s * w;
    let mut power = linalg::identity::<T>(n);
    let mut sum = power.clone();
    for _ in 0..n_terms {
        power = &sw * &power;
        sum += &power;
    }
    let part = Partition::from_connection_matrix(w);
    let l_eff_coeffs = sum.select_rows(&part.external_outputs);
    let s_eff = (&l_eff_coeffs * s).select_columns(&part.external_inputs);
    let l_eff = if l.is_empty() {
        Vec::new()
    } else {
        combine_operators(&l_eff_coeffs, l)
    };
    SeriesOracle {
        s_eff,
        l_eff_coeffs,
        l_eff,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityOptions<T> {
    /// Minimum relevant system timescale; `None` means `1/κ_max`.
    pub tau_min: Option<T>,
    /// Weight above which a delayed path counts as significant.
    pub weight_threshold: T,
    /// Paths down to this weight are listed in the report.
    pub list_min_weight: T,
    pub max_order: usize,
    pub cap: usize,
}

impl<T: Real> Default for ValidityOptions<T> {
    fn default() -> Self {
        Self {
            tau_min: None,
            weight_threshold: T::lit(0.05),
            list_min_weight: T::lit(1e-3),
            max_order: 64,
            cap: DEFAULT_PATH_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport<T> {
    pub tau_min: T,
    pub weight_threshold: T,
    /// Every path with `|w| ≥ list_min_weight`.
    pub paths: Vec<PathRecord<T>>,
    pub violating_paths: Vec<PathRecord<T>>,
    pub max_violating_weight: T,
    pub sigma_max_sw: T,
    /// Traversal count at which the accumulated link length reaches
    /// `ℓ₀ = v_p/κ₀`, using the longest link.
    pub n_cut: Option<usize>,
}

impl<T: Real> ValidityReport<T> {
    pub fn is_valid(&self) -> bool {
        self.violating_paths.is_empty()
    }
}

/// Weak-loop criterion: every path whose delay reaches `τ_min` must have a
/// weight below the threshold.
pub fn validity_check<T: Real>(
    net: &Network<T>,
    tol: &Tolerances<T>,
    opts: &ValidityOptions<T>,
) -> Result<ValidityReport<T>> {
    let graph = PathGraph::from_network(net, tol)?;
    if !net.connections.is_empty() {
        if graph.v_p.is_none() {
            return Err(Error::MissingGeometry(
                "v_p is needed to turn link lengths into delays".into(),
            ));
        }
        if let Some(conn) = net.connections.iter().find(|c| net.hop_length(c).is_none()) {
            return Err(Error::MissingGeometry(format!(
                "connection {} -> {} has neither a distance nor port coordinates",
                conn.from, conn.to
            )));
        }
    }
    let tau_min = match opts.tau_min {
        Some(t) => t,
        None => {
            let kappa = net.kappa_max().ok_or_else(|| {
                Error::MissingGeometry("tau_min not given and no coupling rate to derive it".into())
            })?;
            T::one() / kappa
        }
    };
    let floor = opts.list_min_weight.min(opts.weight_threshold);
    let paths = graph.enumerate(&EnumerationLimits {
        max_order: opts.max_order,
        min_weight: floor,
        cap: opts.cap,
    })?;
    let violating_paths: Vec<_> = paths
        .iter()
        .filter(|p| p.magnitude() >= opts.weight_threshold && p.delay.is_some_and(|d| d >= tau_min))
        .cloned()
        .collect();
    let max_violating_weight = violating_paths
        .iter()
        .fold(T::zero(), |acc, p| acc.max(p.magnitude()));

    let longest = net
        .connections
        .iter()
        .filter_map(|c| net.hop_length(c))
        .fold(T::zero(), |acc, l| acc.max(l));
    let n_cut = match (net.geometry.v_p, net.geometry.kappa0.or(net.kappa_max())) {
        (Some(v), Some(k)) if longest > T::zero() && k > T::zero() => {
            let ell0 = v / k;
            (ell0 / longest).ceil().to_usize()
        }
        _ => None,
    };

    Ok(ValidityReport {
        tau_min,
        weight_threshold: opts.weight_threshold,
        paths,
        violating_paths,
        max_violating_weight,
        sigma_max_sw: graph.sigma_max_sw(),
        n_cut,
    })
}
