//! Coupling maps and a deterministic greedy SWAP router.

use std::collections::VecDeque;

use super::{Circuit, Gate};
use crate::{Error, Result};

/// Undirected coupling graph over physical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    pub name: String,
    adj: Vec<Vec<usize>>,
}

impl CouplingMap {
    /// Builds a map from an edge list, rejecting disconnected graphs.
    pub fn from_edges(name: &str, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidArgument(format!("bad coupling edge ({a}, {b})")));
            }
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        let map = CouplingMap { name: name.to_string(), adj };
        if n == 0 || map.distances(0).iter().any(Option::is_none) {
            return Err(Error::DisconnectedCoupling);
        }
        Ok(map)
    }

    pub fn all_to_all(n: usize) -> Self {
        let adj = (0..n).map(|a| (0..n).filter(|&b| b != a).collect()).collect();
        CouplingMap { name: "all-to-all".into(), adj }
    }

    pub fn line(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges("line", n, &edges)
    }

    /// Heavy-hex patch: `rows` lines of `row_len` qubits, with a bridge
    /// qubit joining consecutive rows every fourth column (offset by two on
    /// odd rows). No qubit has more than three neighbours.
    pub fn heavy_hex(rows: usize, row_len: usize) -> Result<Self> {
        if rows == 0 || row_len == 0 {
            return Err(Error::InvalidArgument("empty heavy-hex patch".into()));
        }
        let row_q = |r: usize, c: usize| r * row_len + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 1..row_len {
                edges.push((row_q(r, c - 1), row_q(r, c)));
            }
        }
        let mut next = rows * row_len;
        for r in 0..rows.saturating_sub(1) {
            let offset = if r % 2 == 0 { 0 } else { 2 };
            for c in (offset..row_len).step_by(4) {
                edges.push((row_q(r, c), next));
                edges.push((next, row_q(r + 1, c)));
                next += 1;
            }
        }
        Self::from_edges("heavy-hex", next, &edges)
    }

    /// Smallest square-ish heavy-hex patch with at least `n` qubits.
    pub fn heavy_hex_for(n: usize) -> Self {
        (2..)
            .map(|rows| Self::heavy_hex(rows, rows * 2 + 1).expect("patch is connected"))
            .find(|m| m.num_qubits() >= n)
            .expect("unbounded search")
    }

    pub fn num_qubits(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    fn distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].map(|d| d + 1);
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = d;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest path from `a` to `b`; at each hop the lowest-index neighbour
    /// that gets closer to `b` is taken.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let dist = self.distances(b);
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let want = dist[cur].expect("coupling map is connected") - 1;
            cur = *self.adj[cur].iter().find(|&&v| dist[v] == Some(want)).expect("bfs layer");
            path.push(cur);
        }
        path
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit over physical qubits.
    pub circuit: Circuit,
    pub swap_count: usize,
    /// `final_layout[l]` is the physical qubit holding logical qubit `l` at
    /// the end; measurement results must be read through it.
    pub final_layout: Vec<usize>,
}

/// Routes a circuit of one- and two-qubit gates onto `coupling`, starting
/// from the trivial layout. For a non-adjacent pair the first qubit is
/// swapped along a shortest path until it neighbours the second.
pub fn route(circuit: &Circuit, coupling: &CouplingMap) -> Result<RoutedCircuit> {
    let n_phys = coupling.num_qubits();
    if circuit.num_qubits > n_phys {
        return Err(Error::InvalidArgument(format!(
            "{} logical qubits do not fit {} physical",
            circuit.num_qubits, n_phys
        )));
    }
    let mut l2p: Vec<usize> = (0..n_phys).collect();
    let mut p2l: Vec<usize> = (0..n_phys).collect();
    let mut out = Circuit::new(n_phys);
    let mut swaps = 0;
    for g in &circuit.gates {
        match g.qubits.len() {
            1 => {}
            2 => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                let (pa, pb) = (l2p[a], l2p[b]);
                if !coupling.adjacent(pa, pb) {
                    let path = coupling.shortest_path(pa, pb);
                    for w in path[..path.len() - 1].windows(2) {
                        let (u, v) = (w[0], w[1]);
                        out.add(Gate::swap(u, v));
                        swaps += 1;
                        let (lu, lv) = (p2l[u], p2l[v]);
                        p2l.swap(u, v);
                        l2p[lu] = v;
                        l2p[lv] = u;
                    }
                }
            }
            k => {
                return Err(Error::InvalidArgument(format!(
                    "route needs a decomposed circuit, found {:?} on {k} qubits",
                    g.kind
                )))
            }
        }
        let mut mapped = g.clone();
        for q in &mut mapped.qubits {
            *q = l2p[*q];
        }
        out.add(mapped);
    }
    out.registers = circuit.registers.as_ref().map(|r| {
        let m = |v: &[usize]| v.iter().map(|&q| l2p[q]).collect();
        super::Registers { x: m(&r.x), y: m(&r.y), coin: m(&r.coin) }
    });
    Ok(RoutedCircuit { circuit: out, swap_count: swaps, final_layout: l2p[..circuit.num_qubits].to_vec() })
}
