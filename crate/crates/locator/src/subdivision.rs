//! Implicit subdivided graphs with an exact distance oracle.
//!
//! Replacing each base edge by a path ("thread") would blow up the vertex
//! count if materialized naively, so vertices are kept in thread
//! coordinates. Branch vertices keep their base ids; the interior of each
//! thread occupies a contiguous dense id block. Distances come from a
//! precomputed weighted all-pairs table over branch vertices plus endpoint
//! arithmetic; the direct in-thread path is also considered.

use crate::error::GraphError;
use crate::graph::Graph;
use std::fmt;

/// A vertex of a subdivided graph in thread coordinates.
///
/// `Inner { u, v, off }` is canonical: `u < v` and `0 < off < length(u,v)`,
/// with `off` measured from `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Branch(u32),
    Inner { u: u32, v: u32, off: u32 },
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Vertex::Branch(b) => write!(f, "b:{b}"),
            Vertex::Inner { u, v, off } => write!(f, "i:{u}/{v}/{off}"),
        }
    }
}

/// A base graph with every edge replaced by a path of a given length.
#[derive(Debug, Clone)]
pub struct SubdividedGraph {
    base: Graph,
    lengths: Vec<u32>,
    /// Dense id of the first interior vertex of each edge's thread.
    inner_start: Vec<u32>,
    vertex_count: u32,
    /// Weighted branch-to-branch distances, row-major `n x n`.
    branch_dist: Vec<u32>,
    adj: Vec<Vec<u32>>,
}

impl SubdividedGraph {
    /// Subdivides `g`, replacing edge `i` by a path of `lengths[i]` edges
    /// (indexed in canonical edge order). Length 1 keeps the edge as-is.
    pub fn new(g: Graph, lengths: Vec<u32>) -> Result<SubdividedGraph, GraphError> {
        assert_eq!(lengths.len(), g.edge_count(), "one length per edge");
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        for (i, &len) in lengths.iter().enumerate() {
            if len == 0 {
                let (u, v) = g.edges()[i];
                return Err(GraphError::NonPositiveLength(u, v));
            }
        }
        let n = g.vertex_count();
        let mut inner_start = Vec::with_capacity(lengths.len());
        let mut next = n as u64;
        for &len in &lengths {
            inner_start.push(next as u32);
            next += (len - 1) as u64;
        }
        if next > 4_000_000 {
            return Err(GraphError::TooLarge(next));
        }
        let vertex_count = next as u32;

        // Weighted all-pairs over branch vertices (Floyd-Warshall; n is small).
        let total: u64 = lengths.iter().map(|&l| l as u64).sum();
        if total >= u32::MAX as u64 / 4 {
            return Err(GraphError::TooLarge(total));
        }
        const INF: u32 = u32::MAX / 2;
        let nn = n as usize;
        let mut dist = vec![INF; nn * nn];
        for v in 0..nn {
            dist[v * nn + v] = 0;
        }
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            let w = lengths[i];
            let (u, v) = (u as usize, v as usize);
            if w < dist[u * nn + v] {
                dist[u * nn + v] = w;
                dist[v * nn + u] = w;
            }
        }
        for k in 0..nn {
            for i in 0..nn {
                let dik = dist[i * nn + k];
                if dik == INF {
                    continue;
                }
                for j in 0..nn {
                    let alt = dik + dist[k * nn + j];
                    if alt < dist[i * nn + j] {
                        dist[i * nn + j] = alt;
                    }
                }
            }
        }

        let mut s = SubdividedGraph {
            base: g,
            lengths,
            inner_start,
            vertex_count,
            branch_dist: dist,
            adj: Vec::new(),
        };
        s.adj = (0..vertex_count).map(|id| s.compute_neighbors(id)).collect();
        Ok(s)
    }

    /// Equal-length subdivision: every edge becomes a path of length `m`.
    pub fn equal(g: Graph, m: u32) -> Result<SubdividedGraph, GraphError> {
        let lengths = vec![m; g.edge_count()];
        SubdividedGraph::new(g, lengths)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn branch_count(&self) -> u32 {
        self.base.vertex_count()
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn length_of_edge(&self, idx: usize) -> u32 {
        self.lengths[idx]
    }

    pub fn length(&self, u: u32, v: u32) -> Option<u32> {
        self.base.edge_index(u, v).map(|i| self.lengths[i])
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    /// True when every thread has the same length `m`.
    pub fn equal_length(&self) -> Option<u32> {
        let first = *self.lengths.first()?;
        self.lengths.iter().all(|&l| l == first).then_some(first)
    }

    pub fn is_branch(&self, id: u32) -> bool {
        id < self.base.vertex_count()
    }

    /// Dense id of a vertex in thread coordinates.
    pub fn id(&self, v: Vertex) -> u32 {
        match v {
            Vertex::Branch(b) => {
                debug_assert!(b < self.base.vertex_count());
                b
            }
            Vertex::Inner { u, v, off } => {
                let idx = self.base.edge_index(u, v).expect("edge exists");
                debug_assert!(u < v && 0 < off && off < self.lengths[idx]);
                self.inner_start[idx] + off - 1
            }
        }
    }

    /// Thread coordinates of a dense id.
    pub fn vertex(&self, id: u32) -> Vertex {
        let n = self.base.vertex_count();
        if id < n {
            return Vertex::Branch(id);
        }
        // Edge blocks are contiguous; length-1 edges have empty blocks
        // sharing the next block's start, so take the last start <= id.
        let idx = self.inner_start.partition_point(|&s| s <= id) - 1;
        let (u, v) = self.base.edges()[idx];
        Vertex::Inner {
            u,
            v,
            off: id - self.inner_start[idx] + 1,
        }
    }

    /// The vertex at distance `i` from `u` along the thread `u..v`.
    /// `i = 0` gives `u` itself and `i = length` gives `v`.
    pub fn thread_vertex(&self, u: u32, v: u32, i: u32) -> Result<u32, GraphError> {
        let idx = self
            .base
            .edge_index(u, v)
            .ok_or(GraphError::MissingEdge(u, v))?;
        let len = self.lengths[idx];
        if i > len {
            return Err(GraphError::OffsetOutOfRange(u, v, i));
        }
        if i == 0 {
            return Ok(u);
        }
        if i == len {
            return Ok(v);
        }
        let off = if u < v { i } else { len - i };
        let (cu, cv) = (u.min(v), u.max(v));
        Ok(self.id(Vertex::Inner {
            u: cu,
            v: cv,
            off,
        }))
    }

    /// Midpoint of the thread `u..v`: the vertex at distance `m/2` from each
    /// end when `m` is even, and the vertex at distance `t = (m-1)/2` from
    /// `u` when `m` is odd.
    pub fn midpoint(&self, u: u32, v: u32) -> Result<u32, GraphError> {
        let len = self
            .length(u, v)
            .ok_or(GraphError::MissingEdge(u, v))?;
        self.thread_vertex(u, v, len / 2)
    }

    /// Off-midpoint of an odd-length thread: distance `t - 1` from `u` and
    /// `t + 2` from `v`.
    pub fn off_midpoint(&self, u: u32, v: u32) -> Result<u32, GraphError> {
        let len = self
            .length(u, v)
            .ok_or(GraphError::MissingEdge(u, v))?;
        if len % 2 == 0 {
            return Err(GraphError::EvenLengthOffMidpoint(len));
        }
        self.thread_vertex(u, v, (len - 1) / 2 - 1)
    }

    fn compute_neighbors(&self, id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        match self.vertex(id) {
            Vertex::Branch(b) => {
                for &c in self.base.neighbors(b) {
                    out.push(self.thread_vertex(b, c, 1).unwrap());
                }
            }
            Vertex::Inner { u, v, off } => {
                out.push(self.thread_vertex(u, v, off - 1).unwrap());
                out.push(self.thread_vertex(u, v, off + 1).unwrap());
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adj[id as usize]
    }

    #[inline]
    fn bdist(&self, a: u32, b: u32) -> u32 {
        self.branch_dist[(a as usize) * (self.base.vertex_count() as usize) + b as usize]
    }

    /// Exact shortest-path distance between two vertices.
    pub fn distance(&self, x: u32, y: u32) -> u32 {
        debug_assert!(x < self.vertex_count && y < self.vertex_count);
        match (self.vertex(x), self.vertex(y)) {
            (Vertex::Branch(a), Vertex::Branch(b)) => self.bdist(a, b),
            (Vertex::Branch(a), Vertex::Inner { u, v, off })
            | (Vertex::Inner { u, v, off }, Vertex::Branch(a)) => {
                let len = self.length(u, v).unwrap();
                (self.bdist(a, u) + off).min(self.bdist(a, v) + len - off)
            }
            (
                Vertex::Inner { u: u1, v: v1, off: o1 },
                Vertex::Inner { u: u2, v: v2, off: o2 },
            ) => {
                let l1 = self.length(u1, v1).unwrap();
                let l2 = self.length(u2, v2).unwrap();
                let mut best = u32::MAX;
                if (u1, v1) == (u2, v2) {
                    best = o1.abs_diff(o2);
                }
                for (ea, da) in [(u1, o1), (v1, l1 - o1)] {
                    for (eb, db) in [(u2, o2), (v2, l2 - o2)] {
                        best = best.min(da + self.bdist(ea, eb) + db);
                    }
                }
                best
            }
        }
    }

    /// Distances from `x` to every vertex, indexed by dense id.
    pub fn dist_row(&self, x: u32) -> Vec<u32> {
        (0..self.vertex_count).map(|y| self.distance(x, y)).collect()
    }

    /// Distance from `id` to its nearest branch vertex.
    pub fn nearest_branch_dist(&self, id: u32) -> u32 {
        match self.vertex(id) {
            Vertex::Branch(_) => 0,
            Vertex::Inner { u: _, v: _, off } => {
                let len = match self.vertex(id) {
                    Vertex::Inner { u, v, .. } => self.length(u, v).unwrap(),
                    _ => unreachable!(),
                };
                off.min(len - off)
            }
        }
    }

    /// The thread (as a canonical base edge) an interior vertex lies inside.
    pub fn thread_of(&self, id: u32) -> Option<(u32, u32)> {
        match self.vertex(id) {
            Vertex::Branch(_) => None,
            Vertex::Inner { u, v, .. } => Some((u, v)),
        }
    }

    /// True if `id` lies on the thread `u..v` (endpoints included).
    pub fn on_thread(&self, id: u32, u: u32, v: u32) -> bool {
        match self.vertex(id) {
            Vertex::Branch(b) => b == u || b == v,
            Vertex::Inner { u: a, v: b, .. } => (a, b) == (u.min(v), u.max(v)),
        }
    }

    /// Offset of a vertex from branch `from` along the thread `from..to`,
    /// if the vertex lies on that thread.
    pub fn offset_on_thread(&self, id: u32, from: u32, to: u32) -> Option<u32> {
        let len = self.length(from, to)?;
        match self.vertex(id) {
            Vertex::Branch(b) if b == from => Some(0),
            Vertex::Branch(b) if b == to => Some(len),
            Vertex::Inner { u, v, off } if (u, v) == (from.min(to), from.max(to)) => {
                Some(if from < to { off } else { len - off })
            }
            _ => None,
        }
    }

    /// Textual form of a vertex id ("b:<id>" or "i:<u>/<v>/<i>").
    pub fn vertex_name(&self, id: u32) -> String {
        self.vertex(id).to_string()
    }

    /// Parses a textual vertex form back to a dense id.
    pub fn parse_vertex(&self, text: &str) -> Result<u32, String> {
        if let Some(rest) = text.strip_prefix("b:") {
            let b: u32 = rest.parse().map_err(|_| format!("bad branch id {rest:?}"))?;
            if b >= self.branch_count() {
                return Err(format!("branch id {b} out of range"));
            }
            return Ok(b);
        }
        if let Some(rest) = text.strip_prefix("i:") {
            let parts: Vec<&str> = rest.split('/').collect();
            if parts.len() != 3 {
                return Err(format!("bad inner vertex {text:?}"));
            }
            let u: u32 = parts[0].parse().map_err(|_| "bad inner vertex".to_string())?;
            let v: u32 = parts[1].parse().map_err(|_| "bad inner vertex".to_string())?;
            let off: u32 = parts[2].parse().map_err(|_| "bad inner vertex".to_string())?;
            let len = self
                .length(u, v)
                .ok_or_else(|| format!("no thread {u}..{v}"))?;
            if off == 0 || off >= len {
                return Err(format!("offset {off} not interior to {u}..{v}"));
            }
            return self
                .thread_vertex(u, v, off)
                .map_err(|e| e.to_string());
        }
        Err(format!("unrecognized vertex {text:?}"))
    }
}
