//! Exhaustive adversarial verification of deterministic strategies.
//!
//! The robber is an omniscient adversary: the search branches over every
//! robber move (stay plus each neighbour) while the cop's probe is a
//! function of the strategy state. Nodes are (canonical strategy state,
//! robber position) pairs; since strategies are deterministic and the win
//! check is a function of the tracked belief, a repeated pair on the
//! current search path proves the robber can evade forever. If every leaf
//! is a capture, the exact worst-case round count is returned.
//!
//! Memo keys are resolved by full state comparison, never by hash alone: a
//! wrong verdict is not acceptable for a verifier.

use crate::engine::{CopStrategy, GameTrace, Outcome, TraceRound};
use crate::error::VerifyError;
use crate::subdivision::SubdividedGraph;
use std::collections::BTreeMap;
use std::collections::HashMap;

/// Outcome of exhaustive verification.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// Every robber play is captured.
    AllCaptured {
        /// Exact worst-case capture round under optimal evasion.
        max_rounds: u32,
        /// Robber positions (one per round) realizing `max_rounds`.
        worst_positions: Vec<u32>,
        /// Largest per-reduction probe count any branch observed.
        max_probes_per_reduction: u32,
        /// Largest reduction count any branch observed.
        max_reductions: u32,
        /// Per-routine maxima: name -> (max probes used, budget).
        routine_maxima: BTreeMap<&'static str, (u32, u32)>,
        states_explored: u64,
    },
    /// A repeated (strategy state, robber position) pair: the robber evades
    /// forever by looping. The witness replays through the engine.
    EvasionFound {
        witness: GameTrace,
        states_explored: u64,
    },
    /// The strategy aborted on some branch.
    StrategyErrorFound {
        description: String,
        witness: GameTrace,
        states_explored: u64,
    },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::AllCaptured { .. } => "all_captured",
            Verdict::EvasionFound { .. } => "evasion_found",
            Verdict::StrategyErrorFound { .. } => "strategy_error_found",
        }
    }

    pub fn states_explored(&self) -> u64 {
        match self {
            Verdict::AllCaptured {
                states_explored, ..
            }
            | Verdict::EvasionFound {
                states_explored, ..
            }
            | Verdict::StrategyErrorFound {
                states_explored, ..
            } => *states_explored,
        }
    }
}

/// Budgets for the adversarial search.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_states: u64,
    pub max_depth: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_states: 10_000_000,
            max_depth: 100_000,
        }
    }
}

#[derive(Clone, Copy)]
enum Entry {
    InProgress,
    Done { value: u32, best_move: u32 },
}

struct Frame {
    state: Box<dyn CopStrategy + Send>,
    probe: u32,
    tag: String,
    moves: Vec<u32>,
    next_move: usize,
    best: u32,
    best_move: u32,
    key: (Box<[u8]>, u32),
    /// The move currently being explored by an open child frame:
    /// (position, dist, belief size after refine).
    open_edge: Option<(u32, u32, u32)>,
}

fn state_key_of(s: &dyn CopStrategy, pos: u32) -> (Box<[u8]>, u32) {
    let mut k = Vec::with_capacity(64);
    s.state_key(&mut k);
    (k.into_boxed_slice(), pos)
}

fn trace_from_stack(stack: &[Frame], outcome: Outcome) -> GameTrace {
    let rounds = stack
        .iter()
        .filter_map(|f| {
            f.open_edge.map(|(pos, dist, bsize)| TraceRound {
                robber: Some(pos),
                probe: f.probe,
                dist,
                belief_size: bsize,
                tag: f.tag.clone(),
            })
        })
        .collect();
    GameTrace { rounds, outcome }
}

/// Verifies `strategy` against every robber behaviour on `s`.
///
/// `strategy` is the freshly built strategy (initial state); it is cloned
/// internally and never mutated.
pub fn adversarial_verify(
    s: &SubdividedGraph,
    strategy: &dyn CopStrategy,
    config: &VerifyConfig,
) -> Result<Verdict, VerifyError> {
    let nv = s.vertex_count();
    let mut states: u64 = 0;
    let mut memo: HashMap<(Box<[u8]>, u32), Entry> = HashMap::new();
    let mut max_probes_per_reduction = 0u32;
    let mut max_reductions = 0u32;
    let mut routine_maxima: BTreeMap<&'static str, (u32, u32)> = BTreeMap::new();

    if nv == 1 {
        return Ok(Verdict::AllCaptured {
            max_rounds: 0,
            worst_positions: Vec::new(),
            max_probes_per_reduction: 0,
            max_reductions: 0,
            routine_maxima,
            states_explored: 0,
        });
    }

    // The root explores every possible round-1 position (the robber starts
    // anywhere and moves first, so all vertices are reachable).
    let root_key = state_key_of(strategy, u32::MAX);
    let mut root_state = strategy.clone_box();
    let root_probe = match root_state.choose_probe() {
        Ok(p) => p,
        Err(e) => {
            return Ok(Verdict::StrategyErrorFound {
                witness: GameTrace {
                    rounds: vec![],
                    outcome: Outcome::StrategyError {
                        description: e.0.clone(),
                    },
                },
                description: e.0,
                states_explored: 0,
            })
        }
    };
    let root_tag = strategy.phase_tag();
    memo.insert(root_key.clone(), Entry::InProgress);
    let mut stack: Vec<Frame> = vec![Frame {
        state: root_state,
        probe: root_probe,
        tag: root_tag,
        moves: (0..nv).collect(),
        next_move: 0,
        best: 0,
        best_move: 0,
        key: root_key,
        open_edge: None,
    }];

    // Audit bookkeeping shared by the edge-expansion closure below.
    macro_rules! track_audit {
        ($st:expr) => {{
            let audit = $st.audit();
            max_probes_per_reduction = max_probes_per_reduction.max(audit.probes_in_reduction);
            max_reductions = max_reductions.max(audit.reduction_count);
            if let Some((name, used, budget)) = audit.routine {
                let entry = routine_maxima.entry(name).or_insert((0, budget));
                entry.0 = entry.0.max(used);
                entry.1 = budget;
            }
        }};
    }

    loop {
        if stack.len() as u32 > config.max_depth {
            return Err(VerifyError::DepthBound(config.max_depth));
        }
        let frame = stack.last_mut().expect("stack never empties mid-search");
        if frame.next_move >= frame.moves.len() {
            // Node complete.
            let done = Entry::Done {
                value: frame.best,
                best_move: frame.best_move,
            };
            let finished = stack.pop().unwrap();
            memo.insert(finished.key.clone(), done);
            match stack.last_mut() {
                None => {
                    // Root finished: reconstruct the worst play.
                    let worst =
                        reconstruct_worst(s, strategy, &memo, finished.best, finished.best_move);
                    return Ok(Verdict::AllCaptured {
                        max_rounds: finished.best,
                        worst_positions: worst,
                        max_probes_per_reduction,
                        max_reductions,
                        routine_maxima,
                        states_explored: memo.len() as u64,
                    });
                }
                Some(parent) => {
                    let candidate = 1 + finished.best;
                    let (pos, _, _) = parent.open_edge.take().unwrap();
                    if candidate > parent.best {
                        parent.best = candidate;
                        parent.best_move = pos;
                    }
                    parent.next_move += 1;
                    continue;
                }
            }
        }

        let pos = frame.moves[frame.next_move];
        let probe = frame.probe;
        let dist = s.distance(probe, pos);
        let mut child = frame.state.clone_box();
        match child.observe(probe, dist) {
            Ok(()) => {}
            Err(e) => {
                let frame = stack.last_mut().unwrap();
                frame.open_edge = Some((pos, dist, 0));
                let trace = trace_from_stack(
                    &stack,
                    Outcome::StrategyError {
                        description: e.0.clone(),
                    },
                );
                return Ok(Verdict::StrategyErrorFound {
                    description: e.0,
                    witness: trace,
                    states_explored: memo.len() as u64,
                });
            }
        }
        track_audit!(child);
        let belief = child.belief();
        debug_assert!(
            belief.contains(pos),
            "true position must stay in the tracked belief"
        );
        let bsize = belief.len();
        if belief.is_singleton() {
            if 1 > frame.best {
                frame.best = 1;
                frame.best_move = pos;
            }
            frame.next_move += 1;
            continue;
        }

        let key = state_key_of(child.as_ref(), pos);
        match memo.get(&key) {
            Some(Entry::Done { value, .. }) => {
                let candidate = 1 + value;
                if candidate > frame.best {
                    frame.best = candidate;
                    frame.best_move = pos;
                }
                frame.next_move += 1;
            }
            Some(Entry::InProgress) => {
                frame.open_edge = Some((pos, dist, bsize));
                let trace = trace_from_stack(
                    &stack,
                    Outcome::Evaded {
                        rounds: stack.len() as u32,
                    },
                );
                return Ok(Verdict::EvasionFound {
                    witness: trace,
                    states_explored: memo.len() as u64,
                });
            }
            None => {
                states += 1;
                if states > config.max_states {
                    return Err(VerifyError::StateBudget(config.max_states));
                }
                frame.open_edge = Some((pos, dist, bsize));
                let probe = match child.choose_probe() {
                    Ok(p) => p,
                    Err(e) => {
                        let trace = trace_from_stack(
                            &stack,
                            Outcome::StrategyError {
                                description: e.0.clone(),
                            },
                        );
                        return Ok(Verdict::StrategyErrorFound {
                            description: e.0,
                            witness: trace,
                            states_explored: memo.len() as u64,
                        });
                    }
                };
                let tag = child.phase_tag();
                let mut moves: Vec<u32> = Vec::with_capacity(s.neighbors(pos).len() + 1);
                moves.push(pos);
                moves.extend_from_slice(s.neighbors(pos));
                moves.sort_unstable();
                memo.insert(key.clone(), Entry::InProgress);
                stack.push(Frame {
                    state: child,
                    probe,
                    tag,
                    moves,
                    next_move: 0,
                    best: 0,
                    best_move: 0,
                    key,
                    open_edge: None,
                });
            }
        }
    }
}

/// Rebuilds the robber positions of a worst-case play by following the
/// recorded best moves through the memo table.
fn reconstruct_worst(
    s: &SubdividedGraph,
    strategy: &dyn CopStrategy,
    memo: &HashMap<(Box<[u8]>, u32), Entry>,
    root_value: u32,
    root_move: u32,
) -> Vec<u32> {
    let mut positions = Vec::new();
    if root_value == 0 {
        return positions;
    }
    let mut state = strategy.clone_box();
    let mut pos = root_move;
    loop {
        let probe = state.choose_probe().expect("replay of explored path");
        let dist = s.distance(probe, pos);
        positions.push(pos);
        state.observe(probe, dist).expect("replay of explored path");
        if state.belief().is_singleton() {
            return positions;
        }
        let key = state_key_of(state.as_ref(), pos);
        match memo.get(&key) {
            Some(Entry::Done { best_move, .. }) => pos = *best_move,
            _ => unreachable!("worst path leads through completed nodes"),
        }
    }
}
