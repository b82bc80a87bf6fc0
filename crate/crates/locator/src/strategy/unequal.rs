//! Strategy for unequal subdivisions where every thread has length at
//! least twice the base vertex count.
//!
//! Phases: probe every branch vertex once, recording the distances; pick
//! the ordered pair (u, v) with lexicographically least distances; probe
//! v (a result of at most n pins the robber on u..v); otherwise probe u
//! and scan at most n-1 selected thread vertices around u until the
//! returned distance is small enough, which identifies the position
//! uniquely. Each win claim is asserted on the tracked belief and any
//! failure surfaces as a strategy error rather than a wrong probe.

use crate::engine::{expand, refine, Belief, CopStrategy, StrategyAudit};
use crate::error::{StrategyBuildError, StrategyError};
use crate::subdivision::SubdividedGraph;
use crate::vertex_set::VertexSet;
use std::sync::Arc;

/// The thread vertices to scan after probing `u` returned `dprime`: for
/// every base neighbour `y` of `u` with `dprime + n - 1 <= length(u, y)`,
/// the vertex at offset `dprime + n - 1` from `u` along `u..y` (ascending
/// neighbour order).
pub fn candidate_probes(s: &SubdividedGraph, u: u32, dprime: u32) -> Vec<u32> {
    let n = s.branch_count();
    let offset = dprime + n - 1;
    s.base()
        .neighbors(u)
        .iter()
        .filter(|&&y| offset <= s.length(u, y).unwrap())
        .map(|&y| s.thread_vertex(u, y, offset).unwrap())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Phase {
    Sweep { idx: u32, dists: Vec<u32> },
    ProbeV { u: u32, v: u32 },
    ProbeU { u: u32, v: u32 },
    Scan { u: u32, dprime: u32, probes: Vec<u32>, idx: u32 },
    Done,
}

/// Deterministic probe strategy for `G^{1/l}` with all lengths >= 2n.
#[derive(Debug, Clone)]
pub struct UnequalStrategy {
    s: Arc<SubdividedGraph>,
    belief: Belief,
    phase: Phase,
    probes_used: u32,
}

/// Builds the strategy, rejecting any edge shorter than `2n`.
pub fn build_unequal_strategy(
    s: Arc<SubdividedGraph>,
) -> Result<UnequalStrategy, StrategyBuildError> {
    let n = s.branch_count();
    for (i, &(u, v)) in s.base().edges().iter().enumerate() {
        let len = s.length_of_edge(i);
        if len < 2 * n {
            return Err(StrategyBuildError::EdgeLengthBound {
                u,
                v,
                len,
                required: 2 * n,
            });
        }
    }
    let belief = VertexSet::full(s.vertex_count());
    Ok(UnequalStrategy {
        s,
        belief,
        phase: Phase::Sweep {
            idx: 0,
            dists: Vec::new(),
        },
        probes_used: 0,
    })
}

impl UnequalStrategy {
    fn err(&self, msg: impl Into<String>) -> StrategyError {
        StrategyError::new(format!("[unequal:{}] {}", self.tag_inner(), msg.into()))
    }

    fn tag_inner(&self) -> &'static str {
        match self.phase {
            Phase::Sweep { .. } => "sweep",
            Phase::ProbeV { .. } => "probe-v",
            Phase::ProbeU { .. } => "probe-u",
            Phase::Scan { .. } => "scan",
            Phase::Done => "done",
        }
    }

    /// The pair (u, v) minimizing (d_u, d_v) lexicographically over ordered
    /// pairs of distinct branch vertices; ties resolved by lowest ids.
    fn select_pair(dists: &[u32]) -> (u32, u32) {
        let n = dists.len() as u32;
        let mut best: Option<((u32, u32), (u32, u32))> = None;
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let key = (dists[u as usize], dists[v as usize]);
                if best.map_or(true, |(bk, _)| key < bk) {
                    best = Some((key, (u, v)));
                }
            }
        }
        best.expect("at least two branch vertices").1
    }

    /// Invariant asserted before the second pair probe: every candidate sits
    /// on a thread containing `u`, with its shortest path to `u` running
    /// along that thread, and its nearest branch vertex is `u` or `v`.
    fn check_pair_invariant(&self, u: u32, v: u32) -> Result<(), StrategyError> {
        let s = &self.s;
        let candidates = expand(s, &self.belief);
        for cand in candidates.iter() {
            match s.vertex(cand) {
                crate::subdivision::Vertex::Branch(b) => {
                    if b != u && b != v {
                        return Err(self.err(format!(
                            "candidate b:{b} is a branch vertex other than the selected pair"
                        )));
                    }
                }
                crate::subdivision::Vertex::Inner { u: a, v: b, off } => {
                    if a != u && b != u {
                        return Err(self.err(format!(
                            "candidate {} is not on a thread containing {u}",
                            s.vertex_name(cand)
                        )));
                    }
                    let len = s.length(a, b).unwrap();
                    let to_u = if a == u { off } else { len - off };
                    if s.distance(u, cand) != to_u {
                        return Err(self.err(format!(
                            "candidate {} is nearer to {u} around the far end",
                            s.vertex_name(cand)
                        )));
                    }
                    let w = if a == u { b } else { a };
                    let nearest = if to_u <= len - to_u { u } else { w };
                    if nearest != u && nearest != v {
                        return Err(self.err(format!(
                            "candidate {} has nearest branch vertex {nearest}, not {u} or {v}",
                            s.vertex_name(cand)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl CopStrategy for UnequalStrategy {
    fn choose_probe(&mut self) -> Result<u32, StrategyError> {
        match &self.phase {
            Phase::Sweep { idx, .. } => Ok(*idx),
            Phase::ProbeV { u, v } => {
                let (u, v) = (*u, *v);
                self.check_pair_invariant(u, v)?;
                Ok(v)
            }
            Phase::ProbeU { u, .. } => Ok(*u),
            Phase::Scan { probes, idx, .. } => {
                probes.get(*idx as usize).copied().ok_or_else(|| {
                    self.err("candidate scan exhausted without locating the robber")
                })
            }
            Phase::Done => Err(self.err("probe requested after the game was decided")),
        }
    }

    fn observe(&mut self, probe: u32, dist: u32) -> Result<(), StrategyError> {
        let expanded = expand(&self.s, &self.belief);
        self.belief = refine(&self.s, &expanded, probe, dist)
            .map_err(|e| self.err(e.to_string()))?;
        self.probes_used += 1;
        let n = self.s.branch_count();
        if self.probes_used > 2 * n + 1 {
            return Err(self.err(format!(
                "probe budget exceeded: {} > {}",
                self.probes_used,
                2 * n + 1
            )));
        }
        if self.belief.is_singleton() {
            self.phase = Phase::Done;
            return Ok(());
        }
        match std::mem::replace(&mut self.phase, Phase::Done) {
            Phase::Sweep { idx, mut dists } => {
                dists.push(dist);
                if idx + 1 < n {
                    self.phase = Phase::Sweep {
                        idx: idx + 1,
                        dists,
                    };
                } else {
                    let (u, v) = Self::select_pair(&dists);
                    self.phase = Phase::ProbeV { u, v };
                }
            }
            Phase::ProbeV { u, v } => {
                if dist <= n {
                    // The robber must be pinned on u..v here.
                    return Err(self.err(format!(
                        "probe of {v} returned {dist} <= n but the belief kept {} candidates",
                        self.belief.len()
                    )));
                }
                self.phase = Phase::ProbeU { u, v };
            }
            Phase::ProbeU { u, .. } => {
                // dist = 0 would have been a capture above.
                let probes = candidate_probes(&self.s, u, dist);
                if probes.len() as u32 > n - 1 {
                    return Err(self.err("more than n-1 scan candidates selected"));
                }
                self.phase = Phase::Scan {
                    u,
                    dprime: dist,
                    probes,
                    idx: 0,
                };
            }
            Phase::Scan {
                u,
                dprime,
                probes,
                idx,
            } => {
                let threshold = (2 * (n - 1)).min(dprime + n - 1);
                if dist <= threshold {
                    // Identification claim: the scan hit the robber's thread.
                    return Err(self.err(format!(
                        "scan result {dist} at or below threshold {threshold} left {} candidates",
                        self.belief.len()
                    )));
                }
                self.phase = Phase::Scan {
                    u,
                    dprime,
                    probes,
                    idx: idx + 1,
                };
            }
            Phase::Done => unreachable!("observe after Done"),
        }
        Ok(())
    }

    fn state_key(&self, out: &mut Vec<u8>) {
        out.push(b'U');
        match &self.phase {
            Phase::Sweep { idx, dists } => {
                out.push(0);
                out.extend_from_slice(&idx.to_le_bytes());
                for d in dists {
                    out.extend_from_slice(&d.to_le_bytes());
                }
            }
            Phase::ProbeV { u, v } => {
                out.push(1);
                out.extend_from_slice(&u.to_le_bytes());
                out.extend_from_slice(&v.to_le_bytes());
            }
            Phase::ProbeU { u, v } => {
                out.push(2);
                out.extend_from_slice(&u.to_le_bytes());
                out.extend_from_slice(&v.to_le_bytes());
            }
            Phase::Scan {
                u,
                dprime,
                probes,
                idx,
            } => {
                out.push(3);
                out.extend_from_slice(&u.to_le_bytes());
                out.extend_from_slice(&dprime.to_le_bytes());
                out.extend_from_slice(&idx.to_le_bytes());
                for p in probes {
                    out.extend_from_slice(&p.to_le_bytes());
                }
            }
            Phase::Done => out.push(4),
        }
        out.extend_from_slice(&self.probes_used.to_le_bytes());
        self.belief.write_key(out);
    }

    fn belief(&self) -> &Belief {
        &self.belief
    }

    fn phase_tag(&self) -> String {
        format!("unequal:{}", self.tag_inner())
    }

    fn audit(&self) -> StrategyAudit {
        let n = self.s.branch_count();
        StrategyAudit {
            probes_in_reduction: self.probes_used,
            reduction_probe_budget: 2 * n + 1,
            reduction_count: 0,
            routine: Some(("unequal-scan", self.probes_used, 2 * n + 1)),
            fallback_taken: false,
        }
    }

    fn clone_box(&self) -> Box<dyn CopStrategy + Send> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn bound_check() {
        // P_3 with lengths 6, 7: n = 3, 2n = 6, both admissible.
        let g = Graph::path(3);
        let s = Arc::new(SubdividedGraph::new(g, vec![6, 7]).unwrap());
        assert!(build_unequal_strategy(s).is_ok());

        // K_3 with one length 5 < 6 rejected, naming the edge.
        let g = Graph::complete(3);
        let s = Arc::new(SubdividedGraph::new(g, vec![6, 5, 7]).unwrap());
        match build_unequal_strategy(s) {
            Err(StrategyBuildError::EdgeLengthBound { u, v, len, required }) => {
                assert_eq!((u, v, len, required), (0, 2, 5, 6));
            }
            other => panic!("expected length bound error, got {other:?}"),
        }
    }

    #[test]
    fn candidate_probe_formula() {
        // n = 4: star at u = 0 with thread lengths 8, 9, 8; d' = 2 selects
        // offset 5 on every thread long enough.
        let g = Graph::star(3);
        let s = SubdividedGraph::new(g, vec![8, 9, 8]).unwrap();
        let probes = candidate_probes(&s, 0, 2);
        assert_eq!(probes.len(), 3);
        for (p, y) in probes.iter().zip([1u32, 2, 3]) {
            assert_eq!(s.distance(*p, 0), 5, "offset from u along 0..{y}");
        }
        // d' = 6 excludes the length-8 threads (6 + 3 > 8).
        let probes = candidate_probes(&s, 0, 6);
        assert_eq!(probes.len(), 1);
        assert_eq!(s.distance(probes[0], 0), 9);
    }

    #[test]
    fn pair_selection_is_lexicographic() {
        assert_eq!(UnequalStrategy::select_pair(&[5, 3, 7]), (1, 0));
        assert_eq!(UnequalStrategy::select_pair(&[3, 3, 7]), (0, 1));
        assert_eq!(UnequalStrategy::select_pair(&[7, 5, 5]), (1, 2));
    }

    #[test]
    fn scan_trigger_threshold() {
        use crate::engine::CopStrategy;
        use crate::vertex_set::VertexSet;
        // Star with center 0, lengths 8/8/9, n = 4. With d' = 5 the scan
        // probes sit at offset 8; only the 0..3 thread is long enough.
        // A result at or below min(2(n-1), d'+n-1) = 6 must pin the robber;
        // anything larger advances the scan cursor.
        let g = Graph::star(3);
        let s = Arc::new(SubdividedGraph::new(g, vec![8, 8, 9]).unwrap());
        let strat = build_unequal_strategy(s.clone()).unwrap();
        let probes = candidate_probes(&s, 0, 5);
        // Offset 8 reaches the far branch vertex on the length-8 threads
        // (the count includes endpoints) and an interior vertex on 0..3.
        assert_eq!(
            probes,
            vec![1, 2, s.thread_vertex(0, 3, 8).unwrap()]
        );

        // Above the threshold: the cursor advances.
        let mut st = strat.clone();
        let mut belief = VertexSet::empty(s.vertex_count());
        belief.insert(s.thread_vertex(0, 3, 5).unwrap());
        belief.insert(s.thread_vertex(0, 2, 4).unwrap());
        belief.insert(s.thread_vertex(0, 1, 5).unwrap());
        st.belief = belief.clone();
        st.phase = Phase::Scan {
            u: 0,
            dprime: 5,
            probes: probes.clone(),
            idx: 2,
        };
        let probe = st.choose_probe().unwrap();
        st.observe(probe, 12).unwrap();
        assert!(matches!(st.phase, Phase::Scan { idx: 3, .. }));

        // At the threshold: a unique position remains and the game is over.
        let mut st = strat.clone();
        st.belief = belief;
        st.phase = Phase::Scan {
            u: 0,
            dprime: 5,
            probes,
            idx: 2,
        };
        let probe = st.choose_probe().unwrap();
        st.observe(probe, 3).unwrap();
        assert!(matches!(st.phase, Phase::Done));
        assert_eq!(st.belief.sole(), Some(s.thread_vertex(0, 3, 5).unwrap()));
    }
}
