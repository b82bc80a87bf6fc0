//! Game semantics: robber dynamics, probe responses, belief tracking, and
//! the strategy contract.
//!
//! A round is a robber move (stay or step to a neighbour) followed by a
//! probe. The probe returns the exact graph distance to the robber. The
//! belief state is the set of positions consistent with every result so
//! far; the engine, not the strategy, detects the win: the cop has located
//! the robber exactly when the belief is a singleton after refining.

use crate::error::{EngineError, StrategyError};
use crate::subdivision::SubdividedGraph;
use crate::vertex_set::VertexSet;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

/// The set of robber positions consistent with the probe history.
pub type Belief = VertexSet;

/// Closed-neighbourhood expansion: the robber may stay or move one step.
pub fn expand(s: &SubdividedGraph, b: &Belief) -> Belief {
    let mut out = b.clone();
    for v in b.iter() {
        for &w in s.neighbors(v) {
            out.insert(w);
        }
    }
    out
}

/// Keeps the candidates at distance exactly `dist` from `probe`.
///
/// An empty result is a protocol violation: it can only happen when the
/// distance feed lies (or the belief was corrupted), never in an honest
/// simulation.
pub fn refine(
    s: &SubdividedGraph,
    b: &Belief,
    probe: u32,
    dist: u32,
) -> Result<Belief, EngineError> {
    let mut out = VertexSet::empty(b.universe());
    for v in b.iter() {
        if s.distance(probe, v) == dist {
            out.insert(v);
        }
    }
    if out.is_empty() {
        return Err(EngineError::ProtocolViolation { probe, dist });
    }
    Ok(out)
}

/// Per-routine probe accounting exposed by strategies for auditing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrategyAudit {
    /// Probes spent since the current candidate-set reduction began.
    pub probes_in_reduction: u32,
    /// Hard cap the strategy imposes on itself per reduction (0 = none).
    pub reduction_probe_budget: u32,
    /// Completed reductions so far.
    pub reduction_count: u32,
    /// Active subroutine: (name, probes used, probe budget).
    pub routine: Option<(&'static str, u32, u32)>,
    /// A belief-guided fallback outside the main schedule was taken.
    pub fallback_taken: bool,
}

/// A deterministic probe selector.
///
/// A strategy owns its own copy of the public belief (a function of the
/// probe history, hence information-legal) and any schedule state. The
/// contract that makes memoized adversarial search sound: `choose_probe` is
/// a function of the serialized state alone, and `observe` deterministically
/// transitions it. `state_key` must write a canonical encoding of everything
/// the next probe depends on.
pub trait CopStrategy {
    fn choose_probe(&mut self) -> Result<u32, StrategyError>;
    fn observe(&mut self, probe: u32, dist: u32) -> Result<(), StrategyError>;
    /// Canonical serialization of the internal state.
    fn state_key(&self, out: &mut Vec<u8>);
    /// The tracked belief (equal to the engine's by construction).
    fn belief(&self) -> &Belief;
    /// Short tag of the active phase, for trace lines.
    fn phase_tag(&self) -> String;
    fn audit(&self) -> StrategyAudit {
        StrategyAudit::default()
    }
    fn clone_box(&self) -> Box<dyn CopStrategy + Send>;
}

impl Clone for Box<dyn CopStrategy + Send> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// How the robber chooses moves in a simulated play.
pub enum RobberPolicy {
    /// Explicit positions: a start vertex, then the position after each
    /// round's move. When the script runs out the robber stays put.
    Scripted { start: u32, moves: Vec<u32> },
    /// Uniformly random start and moves from a seeded generator.
    Random { seed: u64 },
    /// Callback: receives the graph, the current position (`None` before
    /// the start) and the belief, and returns the next position.
    Callback(Box<dyn FnMut(&SubdividedGraph, Option<u32>, &Belief) -> u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Belief became a singleton at `round`; `vertex` is the located position.
    Captured { round: u32, vertex: u32 },
    /// The robber survived `rounds` rounds.
    Evaded { rounds: u32 },
    /// The strategy aborted: a probe result escaped its case analysis.
    StrategyError { description: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRound {
    /// Hidden in serialized traces; kept for test assertions.
    pub robber: Option<u32>,
    pub probe: u32,
    pub dist: u32,
    pub belief_size: u32,
    pub tag: String,
}

/// Full record of a play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTrace {
    pub rounds: Vec<TraceRound>,
    pub outcome: Outcome,
}

impl GameTrace {
    /// Line-delimited JSON: one `{round, probe, dist, belief_size}` object
    /// per round and a terminal `{outcome, rounds, located}` line.
    pub fn to_jsonl(&self, s: &SubdividedGraph) -> String {
        self.render(s, false)
    }

    /// Same as [`to_jsonl`](Self::to_jsonl) with a `tag` field naming the
    /// strategy phase active at each probe.
    pub fn to_jsonl_tagged(&self, s: &SubdividedGraph) -> String {
        self.render(s, true)
    }

    fn render(&self, s: &SubdividedGraph, tags: bool) -> String {
        let mut out = String::new();
        for (i, r) in self.rounds.iter().enumerate() {
            write!(
                out,
                "{{\"round\":{},\"probe\":\"{}\",\"dist\":{},\"belief_size\":{}",
                i + 1,
                s.vertex_name(r.probe),
                r.dist,
                r.belief_size
            )
            .unwrap();
            if tags && !r.tag.is_empty() {
                write!(out, ",\"tag\":\"{}\"", r.tag).unwrap();
            }
            out.push_str("}\n");
        }
        match &self.outcome {
            Outcome::Captured { round, vertex } => {
                write!(
                    out,
                    "{{\"outcome\":\"captured\",\"rounds\":{},\"located\":\"{}\"}}\n",
                    round,
                    s.vertex_name(*vertex)
                )
                .unwrap();
            }
            Outcome::Evaded { rounds } => {
                write!(out, "{{\"outcome\":\"evaded\",\"rounds\":{rounds}}}\n").unwrap();
            }
            Outcome::StrategyError { description } => {
                write!(
                    out,
                    "{{\"outcome\":\"strategy_error\",\"rounds\":{},\"error\":{}}}\n",
                    self.rounds.len(),
                    serde_json::to_string(description).unwrap()
                )
                .unwrap();
            }
        }
        out
    }

    pub fn captured(&self) -> bool {
        matches!(self.outcome, Outcome::Captured { .. })
    }

    /// Robber positions per round, when recorded (usable as a script).
    pub fn robber_positions(&self) -> Option<Vec<u32>> {
        self.rounds.iter().map(|r| r.robber).collect()
    }
}

/// Simulates a play of at most `max_rounds` rounds.
///
/// The initial belief is the full vertex set (the robber starts anywhere).
/// A one-vertex graph is captured at round 0 by convention. The true
/// position is checked against the belief every round; a violation is an
/// engine bug and reported as such.
pub fn play(
    s: &SubdividedGraph,
    strategy: &mut dyn CopStrategy,
    mut robber: RobberPolicy,
    max_rounds: u32,
) -> Result<GameTrace, EngineError> {
    let nv = s.vertex_count();
    let mut belief = VertexSet::full(nv);
    if belief.is_singleton() {
        return Ok(GameTrace {
            rounds: Vec::new(),
            outcome: Outcome::Captured {
                round: 0,
                vertex: belief.sole().unwrap(),
            },
        });
    }

    let mut rng = match &robber {
        RobberPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut pos: Option<u32> = None;
    let mut rounds = Vec::new();

    for round in 1..=max_rounds {
        // Robber move (or initial placement on the first round).
        let next = match &mut robber {
            RobberPolicy::Scripted { start, moves } => match pos {
                None => *start,
                Some(p) => moves.get(round as usize - 2).copied().unwrap_or(p),
            },
            RobberPolicy::Random { .. } => {
                let rng = rng.as_mut().unwrap();
                match pos {
                    None => rng.gen_range(0..nv),
                    Some(p) => {
                        let nbrs = s.neighbors(p);
                        let k = rng.gen_range(0..=nbrs.len());
                        if k == nbrs.len() {
                            p
                        } else {
                            nbrs[k]
                        }
                    }
                }
            }
            RobberPolicy::Callback(f) => f(s, pos, &belief),
        };
        if next >= nv {
            return Err(EngineError::IllegalRobberMove {
                from: pos.unwrap_or(next),
                to: next,
            });
        }
        if let Some(p) = pos {
            if next != p && !s.neighbors(p).contains(&next) {
                return Err(EngineError::IllegalRobberMove { from: p, to: next });
            }
        }
        pos = Some(next);
        let robber_at = pos.unwrap();

        belief = expand(s, &belief);
        let tag = strategy.phase_tag();
        let probe = match strategy.choose_probe() {
            Ok(p) => p,
            Err(e) => {
                return Ok(GameTrace {
                    rounds,
                    outcome: Outcome::StrategyError {
                        description: e.0,
                    },
                })
            }
        };
        let dist = s.distance(probe, robber_at);
        if let Err(e) = strategy.observe(probe, dist) {
            rounds.push(TraceRound {
                robber: Some(robber_at),
                probe,
                dist,
                belief_size: 0,
                tag,
            });
            return Ok(GameTrace {
                rounds,
                outcome: Outcome::StrategyError {
                    description: e.0,
                },
            });
        }
        belief = refine(s, &belief, probe, dist)?;
        if !belief.contains(robber_at) {
            return Err(EngineError::SoundnessViolation {
                pos: robber_at,
                round,
            });
        }
        debug_assert_eq!(
            strategy.belief(),
            &belief,
            "strategy belief diverged from engine belief"
        );
        rounds.push(TraceRound {
            robber: Some(robber_at),
            probe,
            dist,
            belief_size: belief.len(),
            tag,
        });
        if belief.is_singleton() {
            return Ok(GameTrace {
                rounds,
                outcome: Outcome::Captured {
                    round,
                    vertex: belief.sole().unwrap(),
                },
            });
        }
    }
    Ok(GameTrace {
        rounds,
        outcome: Outcome::Evaded { rounds: max_rounds },
    })
}

/// Always probes the same vertex. Useful as a baseline and in tests.
#[derive(Clone)]
pub struct AlwaysProbe {
    s: std::sync::Arc<SubdividedGraph>,
    target: u32,
    belief: Belief,
}

impl AlwaysProbe {
    pub fn new(s: std::sync::Arc<SubdividedGraph>, target: u32) -> AlwaysProbe {
        let belief = VertexSet::full(s.vertex_count());
        AlwaysProbe { s, target, belief }
    }
}

impl CopStrategy for AlwaysProbe {
    fn choose_probe(&mut self) -> Result<u32, StrategyError> {
        Ok(self.target)
    }

    fn observe(&mut self, probe: u32, dist: u32) -> Result<(), StrategyError> {
        let expanded = expand(&self.s, &self.belief);
        self.belief = refine(&self.s, &expanded, probe, dist)
            .map_err(|e| StrategyError::new(e.to_string()))?;
        Ok(())
    }

    fn state_key(&self, out: &mut Vec<u8>) {
        out.push(b'A');
        out.extend_from_slice(&self.target.to_le_bytes());
        self.belief.write_key(out);
    }

    fn belief(&self) -> &Belief {
        &self.belief
    }

    fn phase_tag(&self) -> String {
        format!("always:{}", self.target)
    }

    fn clone_box(&self) -> Box<dyn CopStrategy + Send> {
        Box::new(self.clone())
    }
}

/// Probes vertices from a seeded pseudo-random sequence. Deterministic for a
/// fixed seed; used by randomized soundness tests.
#[derive(Clone)]
pub struct SeededRandomProbe {
    s: std::sync::Arc<SubdividedGraph>,
    rng: ChaCha8Rng,
    draws: u32,
    seed: u64,
    belief: Belief,
}

impl SeededRandomProbe {
    pub fn new(s: std::sync::Arc<SubdividedGraph>, seed: u64) -> SeededRandomProbe {
        let belief = VertexSet::full(s.vertex_count());
        SeededRandomProbe {
            s,
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
            seed,
            belief,
        }
    }
}

impl CopStrategy for SeededRandomProbe {
    fn choose_probe(&mut self) -> Result<u32, StrategyError> {
        Ok(self.rng.gen_range(0..self.s.vertex_count()))
    }

    fn observe(&mut self, probe: u32, dist: u32) -> Result<(), StrategyError> {
        self.draws += 1;
        let expanded = expand(&self.s, &self.belief);
        self.belief = refine(&self.s, &expanded, probe, dist)
            .map_err(|e| StrategyError::new(e.to_string()))?;
        Ok(())
    }

    fn state_key(&self, out: &mut Vec<u8>) {
        out.push(b'R');
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.draws.to_le_bytes());
        self.belief.write_key(out);
    }

    fn belief(&self) -> &Belief {
        &self.belief
    }

    fn phase_tag(&self) -> String {
        "random".to_string()
    }

    fn clone_box(&self) -> Box<dyn CopStrategy + Send> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use std::sync::Arc;

    fn path3() -> SubdividedGraph {
        SubdividedGraph::equal(Graph::path(3), 1).unwrap()
    }

    #[test]
    fn expand_examples() {
        let s = path3();
        let b = VertexSet::from_iter_n(3, [0]);
        assert_eq!(expand(&s, &b).to_vec(), vec![0, 1]);
        let all = VertexSet::full(3);
        assert_eq!(expand(&s, &all), all);

        let c6 = SubdividedGraph::equal(Graph::cycle(6), 1).unwrap();
        let b = VertexSet::from_iter_n(6, [0, 3]);
        assert_eq!(expand(&c6, &b).len(), 6);
    }

    #[test]
    fn refine_examples() {
        let s = path3();
        let b = VertexSet::full(3);
        assert_eq!(refine(&s, &b, 0, 1).unwrap().to_vec(), vec![1]);

        // Star: center 0, leaves 1,2,3; probe a leaf at distance 2 keeps the
        // other two leaves.
        let star = SubdividedGraph::equal(Graph::star(3), 1).unwrap();
        let b = VertexSet::full(4);
        assert_eq!(refine(&star, &b, 1, 2).unwrap().to_vec(), vec![2, 3]);

        // Empty result is a protocol violation.
        let b = VertexSet::full(3);
        assert!(refine(&s, &b, 0, 9).is_err());
    }

    #[test]
    fn refine_on_subdivided_triangle() {
        // K_3 at length 2 is the 6-cycle. Probing a branch vertex at
        // distance 2 keeps the two other branch vertices (value computed
        // with the explicit breadth-first oracle).
        let s = SubdividedGraph::equal(Graph::complete(3), 2).unwrap();
        let b = VertexSet::full(6);
        let kept = refine(&s, &b, 0, 2).unwrap();
        assert_eq!(kept.to_vec(), vec![1, 2]);
    }

    #[test]
    fn play_path_endpoint_probe_captures_in_one() {
        let s = Arc::new(SubdividedGraph::equal(Graph::path(5), 1).unwrap());
        for start in 0..5 {
            let mut strat = AlwaysProbe::new(s.clone(), 0);
            let trace = play(
                &s,
                &mut strat,
                RobberPolicy::Scripted {
                    start,
                    moves: vec![],
                },
                10,
            )
            .unwrap();
            assert!(matches!(trace.outcome, Outcome::Captured { round: 1, .. }));
        }
    }

    #[test]
    fn play_star_center_probe_never_splits_leaves() {
        let s = Arc::new(SubdividedGraph::equal(Graph::star(3), 1).unwrap());
        let mut strat = AlwaysProbe::new(s.clone(), 0);
        let trace = play(
            &s,
            &mut strat,
            RobberPolicy::Scripted {
                start: 1,
                moves: vec![],
            },
            20,
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::Evaded { rounds: 20 });
    }

    #[test]
    fn one_vertex_graph_is_captured_at_round_zero() {
        let s = Arc::new(SubdividedGraph::equal(Graph::new(1, &[]).unwrap(), 1).unwrap());
        let mut strat = AlwaysProbe::new(s.clone(), 0);
        let trace = play(
            &s,
            &mut strat,
            RobberPolicy::Scripted {
                start: 0,
                moves: vec![],
            },
            5,
        )
        .unwrap();
        assert_eq!(
            trace.outcome,
            Outcome::Captured {
                round: 0,
                vertex: 0
            }
        );
    }

    #[test]
    fn illegal_move_rejected() {
        // Leaves of a star are not adjacent; jumping between them is illegal.
        let s = Arc::new(SubdividedGraph::equal(Graph::star(3), 1).unwrap());
        let mut strat = AlwaysProbe::new(s.clone(), 0);
        let err = play(
            &s,
            &mut strat,
            RobberPolicy::Scripted {
                start: 1,
                moves: vec![2],
            },
            10,
        )
        .unwrap_err();
        assert_eq!(err, EngineError::IllegalRobberMove { from: 1, to: 2 });
    }

    #[test]
    fn deterministic_traces() {
        let s = Arc::new(SubdividedGraph::equal(Graph::cycle(5), 3).unwrap());
        let run = || {
            let mut strat = SeededRandomProbe::new(s.clone(), 11);
            play(&s, &mut strat, RobberPolicy::Random { seed: 7 }, 50).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        assert_eq!(a.to_jsonl(&s), b.to_jsonl(&s));
    }

    #[test]
    fn jsonl_shape() {
        let s = Arc::new(SubdividedGraph::equal(Graph::path(5), 1).unwrap());
        let mut strat = AlwaysProbe::new(s.clone(), 0);
        let trace = play(
            &s,
            &mut strat,
            RobberPolicy::Scripted {
                start: 2,
                moves: vec![],
            },
            10,
        )
        .unwrap();
        let text = trace.to_jsonl(&s);
        assert!(text.starts_with("{\"round\":1,\"probe\":\"b:0\",\"dist\":2,\"belief_size\":1}\n"));
        assert!(text.contains("\"outcome\":\"captured\""));
        assert!(text.contains("\"located\":\"b:2\""));
    }
}
