//! Connectivity graphs: Chimera, Pegasus and Zephyr hardware lattices,
//! complete and Erdős–Rényi graphs, defect simulation, and the edge-list
//! text format.
//!
//! Hardware node indices are the row-major flattening of each topology's
//! native coordinates. For Pegasus the flattened range contains qubits that
//! are not part of the main fabric; those indices are dropped and the rest
//! renumbered in order, so every node of a generated graph has an edge.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Undirected simple graph on `0..num_vars` with canonical `(i, j)`, `i < j`
/// edges. Nodes removed by [`apply_defects`] keep their index and are listed
/// as inactive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    num_vars: usize,
    edges: BTreeSet<(usize, usize)>,
    inactive: BTreeSet<usize>,
    label: String,
}

impl EdgeSet {
    pub fn new(num_vars: usize, label: impl Into<String>) -> Self {
        EdgeSet {
            num_vars,
            edges: BTreeSet::new(),
            inactive: BTreeSet::new(),
            label: label.into(),
        }
    }

    pub fn from_edges(
        num_vars: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut e = EdgeSet::new(num_vars, label);
        for (i, j) in edges {
            e.insert(i, j)?;
        }
        Ok(e)
    }

    /// Adds `{i, j}`; duplicates are ignored.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Range(format!("self-loop on node {i}")));
        }
        if i.max(j) >= self.num_vars {
            return Err(Error::Range(format!(
                "edge ({i}, {j}) outside 0..{}",
                self.num_vars
            )));
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn inactive(&self) -> &BTreeSet<usize> {
        &self.inactive
    }

    pub fn active_nodes(&self) -> usize {
        self.num_vars - self.inactive.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vars];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Active nodes without any incident edge.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        self.degrees()
            .into_iter()
            .enumerate()
            .filter(|&(v, d)| d == 0 && !self.inactive.contains(&v))
            .map(|(v, _)| v)
            .collect()
    }

    /// Whether the active nodes form a single connected component.
    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let Some(start) = (0..self.num_vars).find(|v| !self.inactive.contains(v)) else {
            return true;
        };
        let mut seen = vec![false; self.num_vars];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.active_nodes()
    }

    /// Renumbers the nodes that have at least one edge to `0..k`, keeping
    /// their order. Returns the compacted graph and, for each new index, the
    /// original one.
    pub fn compact(&self) -> (EdgeSet, Vec<usize>) {
        let deg = self.degrees();
        let kept: Vec<usize> = (0..self.num_vars).filter(|&v| deg[v] > 0).collect();
        let mut new_index = vec![usize::MAX; self.num_vars];
        for (k, &v) in kept.iter().enumerate() {
            new_index[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .map(|&(i, j)| (new_index[i], new_index[j]))
            .collect();
        let out = EdgeSet {
            num_vars: kept.len(),
            edges,
            inactive: BTreeSet::new(),
            label: self.label.clone(),
        };
        (out, kept)
    }

    /// `n <num_vars>` followed by one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.edges.len());
        writeln!(out, "n {}", self.num_vars).unwrap();
        for &(i, j) in &self.edges {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }

    /// Parses the edge-list format. Blank lines and `#` comments are skipped;
    /// edges may appear in either orientation.
    pub fn from_edge_list(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let num_vars = header
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge-list header {header:?}")))?;
        let mut e = EdgeSet::new(num_vars, label);
        for (lineno, line) in lines {
            let bad = || Error::Parse(format!("line {}: bad edge {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let i = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let j = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if parts.next().is_some() {
                return Err(bad());
            }
            e.insert(i, j)
                .map_err(|err| Error::Parse(format!("line {}: {err}", lineno + 1)))?;
        }
        Ok(e)
    }
}

/// Chimera `C_m`: an `m x m` grid of `K_{4,4}` cells.
pub fn chimera(m: usize) -> Result<EdgeSet> {
    chimera_graph(m, m, 4)
}

/// Chimera with `rows x cols` cells of `K_{t,t}`. Node `(i, j, u, k)` has
/// index `((i cols + j) 2 + u) t + k`; `u = 0` qubits couple vertically to
/// the next row, `u = 1` qubits horizontally to the next column.
pub fn chimera_graph(rows: usize, cols: usize, t: usize) -> Result<EdgeSet> {
    if rows == 0 || cols == 0 || t == 0 {
        return Err(Error::Range("chimera dimensions must be at least 1".into()));
    }
    let idx = |i: usize, j: usize, u: usize, k: usize| ((i * cols + j) * 2 + u) * t + k;
    let label = if rows == cols && t == 4 {
        format!("chimera({rows})")
    } else {
        format!("chimera({rows},{cols},{t})")
    };
    let mut e = EdgeSet::new(rows * cols * 2 * t, label);
    for i in 0..rows {
        for j in 0..cols {
            for k in 0..t {
                for kk in 0..t {
                    e.insert(idx(i, j, 0, k), idx(i, j, 1, kk))?;
                }
                if i + 1 < rows {
                    e.insert(idx(i, j, 0, k), idx(i + 1, j, 0, k))?;
                }
                if j + 1 < cols {
                    e.insert(idx(i, j, 1, k), idx(i, j + 1, 1, k))?;
                }
            }
        }
    }
    Ok(e)
}

/// Standard shift offsets of vertical (`0`) and horizontal (`1`) qubits.
const PEGASUS_OFFSETS: [[usize; 12]; 2] = [
    [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6],
    [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10],
];

/// Pegasus `P_m`, main fabric only.
///
/// Native coordinates `(u, w, k, z)` with `u` the orientation, `w < m`, `k <
/// 12`, `z < m - 1` flatten to `((u m + w) 12 + k)(m - 1) + z`. Couplers:
/// internal (a vertical and a horizontal qubit crossing), external
/// (consecutive `z`), odd (`k` paired as `2r, 2r + 1`).
pub fn pegasus(m: usize) -> Result<EdgeSet> {
    if m < 2 {
        return Err(Error::Range("pegasus size must be at least 2".into()));
    }
    let m1 = m - 1;
    let c2i = |u: usize, w: usize, k: usize, z: usize| ((u * m + w) * 12 + k) * m1 + z;
    let [off0, off1] = PEGASUS_OFFSETS;
    let start = [
        *off1.iter().min().unwrap(),
        *off0.iter().min().unwrap(),
    ];
    let end = [
        12 - *off1.iter().max().unwrap(),
        12 - *off0.iter().max().unwrap(),
    ];
    let in_fabric = |u: usize, w: usize, k: usize| {
        (w != 0 || k >= start[u]) && (w != m1 || k < 12 - end[u])
    };
    let k_range = |u: usize, w: usize| {
        let lo = if w == 0 { start[u] } else { 0 };
        let hi = if w == m1 { 12 - end[u] } else { 12 };
        lo..hi
    };

    let mut raw: Vec<(usize, usize)> = Vec::new();
    for u in 0..2 {
        for w in 0..m {
            for k in k_range(u, w) {
                for z in 0..m1.saturating_sub(1) {
                    raw.push((c2i(u, w, k, z), c2i(u, w, k, z + 1)));
                }
            }
            for k in k_range(u, w).step_by(2) {
                for z in 0..m1 {
                    raw.push((c2i(u, w, k, z), c2i(u, w, k + 1, z)));
                }
            }
        }
    }
    for w in 0..m {
        for kk in 0..12 {
            let lo = if w > 0 { 0 } else { off1[kk] };
            let hi = if w < m1 { 12 } else { off1[kk] };
            for k in lo..hi {
                for z in 0..m1 {
                    let w2 = z + usize::from(kk < off0[k]);
                    let z2 = w - usize::from(k < off1[kk]);
                    if in_fabric(0, w, k) && in_fabric(1, w2, kk) {
                        raw.push((c2i(0, w, k, z), c2i(1, w2, kk, z2)));
                    }
                }
            }
        }
    }
    let full = EdgeSet::from_edges(24 * m * m1, raw, format!("pegasus({m})"))?;
    Ok(full.compact().0)
}

/// Zephyr `Z_{m,t}`.
///
/// Native coordinates `(u, w, k, j, z)` with `w < 2m + 1`, `k < t`, `j < 2`,
/// `z < m` flatten to `(((u (2m+1) + w) t + k) 2 + j) m + z`.
pub fn zephyr(m: usize, t: usize) -> Result<EdgeSet> {
    if m == 0 || t == 0 {
        return Err(Error::Range("zephyr parameters must be at least 1".into()));
    }
    let big_m = 2 * m + 1;
    let c2i = |u: usize, w: usize, k: usize, j: usize, z: usize| {
        (((u * big_m + w) * t + k) * 2 + j) * m + z
    };
    let label = if t == 4 {
        format!("zephyr({m})")
    } else {
        format!("zephyr({m},{t})")
    };
    let mut e = EdgeSet::new(4 * t * m * big_m, label);
    for u in 0..2 {
        for w in 0..big_m {
            for k in 0..t {
                for j in 0..2 {
                    for z in 0..m - 1 {
                        e.insert(c2i(u, w, k, j, z), c2i(u, w, k, j, z + 1))?;
                    }
                }
                for a in 0..2 {
                    for z in a..m {
                        e.insert(c2i(u, w, k, 0, z), c2i(u, w, k, 1, z - a))?;
                    }
                }
            }
        }
    }
    for w in 0..m {
        for z in 0..m {
            for h in 0..t {
                for k in 0..t {
                    for i in 0..2 {
                        for j in 0..2 {
                            for a in 0..2 {
                                for b in 0..2 {
                                    let wv = 2 * w + 1 + a * (2 * i) - a;
                                    let wh = 2 * z + 1 + b * (2 * j) - b;
                                    e.insert(c2i(0, wv, k, j, z), c2i(1, wh, h, i, w))?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(e)
}

pub fn complete(n: usize) -> EdgeSet {
    let mut e = EdgeSet::new(n, format!("complete({n})"));
    e.edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    e
}

/// Erdős–Rényi `G(n, p)`: each pair independently with probability
/// `density`. Connectivity is not guaranteed.
pub fn random_graph(n: usize, density: f64, seed: u64) -> Result<EdgeSet> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Range(format!("density {density} outside (0, 1]")));
    }
    let mut r = rng::from_seed(seed);
    let mut e = EdgeSet::new(n, format!("gnp({n},{density},{seed})"));
    for i in 0..n {
        for j in i + 1..n {
            if r.gen::<f64>() < density {
                e.edges.insert((i, j));
            }
        }
    }
    Ok(e)
}

/// Removes `node_kill` uniformly chosen active nodes with their edges, then
/// `edge_kill` uniformly chosen remaining edges. Indices are not reused.
pub fn apply_defects(e: &EdgeSet, node_kill: usize, edge_kill: usize, seed: u64) -> Result<EdgeSet> {
    let mut r = rng::from_seed(seed);
    let active: Vec<usize> = (0..e.num_vars)
        .filter(|v| !e.inactive.contains(v))
        .collect();
    if node_kill > active.len() {
        return Err(Error::Range(format!(
            "cannot remove {node_kill} of {} active nodes",
            active.len()
        )));
    }
    let mut out = e.clone();
    let mut doomed: Vec<usize> = sample(&mut r, active.len(), node_kill)
        .into_iter()
        .map(|k| active[k])
        .collect();
    doomed.sort_unstable();
    out.inactive.extend(doomed.iter().copied());
    out.edges
        .retain(|(i, j)| !out.inactive.contains(i) && !out.inactive.contains(j));

    if edge_kill > out.edges.len() {
        return Err(Error::Range(format!(
            "cannot remove {edge_kill} of {} remaining edges",
            out.edges.len()
        )));
    }
    let listed: Vec<(usize, usize)> = out.edges.iter().copied().collect();
    for k in sample(&mut r, listed.len(), edge_kill) {
        out.edges.remove(&listed[k]);
    }
    if node_kill > 0 || edge_kill > 0 {
        out.label = format!("{}-defects({node_kill},{edge_kill},{seed})", e.label);
    }
    Ok(out)
}

/// Applies random defects until exactly `nodes` active nodes and `edges`
/// edges remain. Successive attempts use seeds derived from `seed`, since a
/// node draw that removes too many edges cannot be repaired.
pub fn apply_defects_to_match(e: &EdgeSet, nodes: usize, edges: usize, seed: u64) -> Result<EdgeSet> {
    let node_kill = e.active_nodes().checked_sub(nodes).ok_or_else(|| {
        Error::Range(format!(
            "graph has {} active nodes, fewer than {nodes}",
            e.active_nodes()
        ))
    })?;
    const ATTEMPTS: u64 = 256;
    for attempt in 0..ATTEMPTS {
        let s = rng::derive_seed(seed, attempt);
        let thinned = apply_defects(e, node_kill, 0, s)?;
        if let Some(edge_kill) = thinned.num_edges().checked_sub(edges) {
            return apply_defects(e, node_kill, edge_kill, s);
        }
    }
    Err(Error::Range(format!(
        "no draw of {node_kill} node defects left {edges} edges after {ATTEMPTS} attempts"
    )))
}

/// Qubit and coupler availability of the annealers the generator targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardwareProfile {
    pub chip: &'static str,
    pub topology: Topology,
    pub qubits: usize,
    pub couplers: usize,
    /// Initial clause batch used when planting on this chip.
    pub batch_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Chimera(usize),
    Pegasus(usize),
    Zephyr(usize),
}

impl Topology {
    pub fn build(self) -> Result<EdgeSet> {
        match self {
            Topology::Chimera(m) => chimera(m),
            Topology::Pegasus(m) => pegasus(m),
            Topology::Zephyr(m) => zephyr(m, 4),
        }
    }
}

pub const HARDWARE_PROFILES: [HardwareProfile; 4] = [
    HardwareProfile {
        chip: "DW_2000Q_6",
        topology: Topology::Chimera(16),
        qubits: 2041,
        couplers: 5974,
        batch_size: 2000,
    },
    HardwareProfile {
        chip: "Advantage_system4.1",
        topology: Topology::Pegasus(16),
        qubits: 5627,
        couplers: 40279,
        batch_size: 30000,
    },
    HardwareProfile {
        chip: "Advantage_system6.1",
        topology: Topology::Pegasus(16),
        qubits: 5616,
        couplers: 40135,
        batch_size: 30000,
    },
    HardwareProfile {
        chip: "Advantage2_prototype1.1",
        topology: Topology::Zephyr(4),
        qubits: 563,
        couplers: 4790,
        batch_size: 1000,
    },
];

pub fn hardware_profile(chip: &str) -> Option<&'static HardwareProfile> {
    HARDWARE_PROFILES.iter().find(|p| p.chip == chip)
}

impl HardwareProfile {
    /// The logical topology thinned by random defects to this chip's counts.
    pub fn graph(&self, seed: u64) -> Result<EdgeSet> {
        let mut g = apply_defects_to_match(&self.topology.build()?, self.qubits, self.couplers, seed)?;
        g.set_label(format!("{}-{}", self.chip, g.label()));
        Ok(g)
    }
}
