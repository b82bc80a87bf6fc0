//! Exact locatability on small instances.
//!
//! The cop wins from a belief `B` iff `|B| = 1` or some probe splits every
//! distance class of the expanded belief into winning beliefs. This is a
//! least fixpoint over the belief graph reachable from the initial belief
//! (the full vertex set), computed by lazy forward exploration plus
//! backward rank propagation. Ranks are exact optimal capture bounds.
//!
//! Beliefs are bitsets over the expanded vertex set; the memo table is
//! keyed on them directly, so a hash collision can never produce a wrong
//! answer.

use crate::engine::{expand, refine, Belief, CopStrategy, StrategyAudit};
use crate::error::{SolverError, StrategyError};
use crate::subdivision::SubdividedGraph;
use crate::vertex_set::VertexSet;
use std::collections::HashMap;
use std::sync::Arc;

/// Budgets for the solver. The vertex cap is deliberately conservative;
/// callers opt in to larger instances explicitly.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_vertices: u32,
    pub max_states: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_vertices: 64,
            max_states: 5_000_000,
        }
    }
}

/// Outcome of an exact solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub locatable: bool,
    /// Worst-case rounds to capture under optimal play, when locatable.
    pub capture_bound: Option<u32>,
    pub states_explored: u64,
}

#[derive(Debug)]
struct Node {
    belief: VertexSet,
    /// Child node ids per probe vertex (distance classes of the expansion).
    children: Vec<Box<[u32]>>,
    rank: Option<u32>,
}

/// The solved reachable belief graph. Kept alive by extracted strategies.
#[derive(Debug)]
pub struct Solved {
    s: Arc<SubdividedGraph>,
    nodes: Vec<Node>,
    index: HashMap<VertexSet, u32>,
    root: u32,
}

impl Solved {
    pub fn graph(&self) -> &Arc<SubdividedGraph> {
        &self.s
    }

    pub fn result(&self) -> SolveResult {
        let rank = self.nodes[self.root as usize].rank;
        SolveResult {
            locatable: rank.is_some(),
            capture_bound: rank,
            states_explored: self.nodes.len() as u64,
        }
    }

    pub fn rank_of(&self, b: &VertexSet) -> Option<Option<u32>> {
        self.index.get(b).map(|&i| self.nodes[i as usize].rank)
    }

    /// All explored beliefs with their ranks (`None` = not a cop win).
    pub fn explored(&self) -> impl Iterator<Item = (&VertexSet, Option<u32>)> {
        self.nodes.iter().map(|n| (&n.belief, n.rank))
    }
}

/// Decides locatability exactly. Never returns a wrong answer: exceeding a
/// budget is an explicit error.
pub fn decide_locatable(
    s: &Arc<SubdividedGraph>,
    config: &SolverConfig,
) -> Result<(SolveResult, Arc<Solved>), SolverError> {
    let nv = s.vertex_count();
    if nv > config.max_vertices {
        return Err(SolverError::VertexBudget {
            actual: nv,
            limit: config.max_vertices,
        });
    }
    // Distance rows per probe vertex, once.
    let rows: Vec<Vec<u32>> = (0..nv).map(|p| s.dist_row(p)).collect();

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<VertexSet, u32> = HashMap::new();
    let root_belief = VertexSet::full(nv);

    let intern = |b: VertexSet,
                      nodes: &mut Vec<Node>,
                      index: &mut HashMap<VertexSet, u32>|
     -> Result<u32, SolverError> {
        if let Some(&i) = index.get(&b) {
            return Ok(i);
        }
        if nodes.len() as u64 >= config.max_states {
            return Err(SolverError::StateBudget {
                limit: config.max_states,
            });
        }
        let id = nodes.len() as u32;
        let rank = if b.is_singleton() { Some(0) } else { None };
        index.insert(b.clone(), id);
        nodes.push(Node {
            belief: b,
            children: Vec::new(),
            rank,
        });
        Ok(id)
    };

    let root = intern(root_belief, &mut nodes, &mut index)?;
    let mut frontier = vec![root];
    while let Some(id) = frontier.pop() {
        if !nodes[id as usize].children.is_empty() || nodes[id as usize].belief.is_singleton() {
            continue;
        }
        let expanded = expand(s, &nodes[id as usize].belief);
        let mut children: Vec<Box<[u32]>> = Vec::with_capacity(nv as usize);
        for p in 0..nv {
            let row = &rows[p as usize];
            let mut classes: HashMap<u32, VertexSet> = HashMap::new();
            for v in expanded.iter() {
                classes
                    .entry(row[v as usize])
                    .or_insert_with(|| VertexSet::empty(nv))
                    .insert(v);
            }
            let mut kids: Vec<u32> = Vec::with_capacity(classes.len());
            // Deterministic order: by distance value.
            let mut by_dist: Vec<(u32, VertexSet)> = classes.into_iter().collect();
            by_dist.sort_by_key(|(d, _)| *d);
            for (_, class) in by_dist {
                let cid = intern(class, &mut nodes, &mut index)?;
                if nodes[cid as usize].children.is_empty()
                    && !nodes[cid as usize].belief.is_singleton()
                {
                    frontier.push(cid);
                }
                kids.push(cid);
            }
            kids.sort_unstable();
            kids.dedup();
            children.push(kids.into_boxed_slice());
        }
        nodes[id as usize].children = children;
    }

    // Backward rank propagation, one level per pass so ranks are exact.
    let mut level = 0u32;
    loop {
        level += 1;
        let mut newly: Vec<u32> = Vec::new();
        for (id, node) in nodes.iter().enumerate() {
            if node.rank.is_some() || node.children.is_empty() {
                continue;
            }
            let wins = node.children.iter().any(|kids| {
                kids.iter()
                    .all(|&c| matches!(nodes[c as usize].rank, Some(r) if r < level))
            });
            if wins {
                newly.push(id as u32);
            }
        }
        if newly.is_empty() {
            break;
        }
        for id in newly {
            nodes[id as usize].rank = Some(level);
        }
    }

    let solved = Solved {
        s: s.clone(),
        nodes,
        index,
        root,
    };
    Ok((solved.result(), Arc::new(solved)))
}

/// The optimal strategy read off the solved table: its state is the current
/// belief; each step picks the lowest-id probe whose worst distance class
/// strictly decreases the rank.
#[derive(Clone)]
pub struct ExtractedStrategy {
    table: Arc<Solved>,
    belief: Belief,
}

/// Builds the optimal strategy for a locatable instance.
pub fn extract_strategy(table: &Arc<Solved>) -> Result<ExtractedStrategy, SolverError> {
    if !table.result().locatable {
        return Err(SolverError::NotLocatable);
    }
    Ok(ExtractedStrategy {
        belief: VertexSet::full(table.s.vertex_count()),
        table: table.clone(),
    })
}

impl CopStrategy for ExtractedStrategy {
    fn choose_probe(&mut self) -> Result<u32, StrategyError> {
        let table = &self.table;
        let &id = table
            .index
            .get(&self.belief)
            .ok_or_else(|| StrategyError::new("belief left the solved table"))?;
        let node = &table.nodes[id as usize];
        let rank = node
            .rank
            .ok_or_else(|| StrategyError::new("reached a non-winning belief"))?;
        debug_assert!(rank > 0, "singleton beliefs are already captured");
        for (p, kids) in node.children.iter().enumerate() {
            let worst = kids
                .iter()
                .map(|&c| table.nodes[c as usize].rank)
                .collect::<Option<Vec<u32>>>()
                .map(|rs| rs.into_iter().max().unwrap_or(0));
            if let Some(w) = worst {
                if w < rank {
                    return Ok(p as u32);
                }
            }
        }
        Err(StrategyError::new(
            "no rank-decreasing probe exists; rank table inconsistent",
        ))
    }

    fn observe(&mut self, probe: u32, dist: u32) -> Result<(), StrategyError> {
        let expanded = expand(&self.table.s, &self.belief);
        self.belief = refine(&self.table.s, &expanded, probe, dist)
            .map_err(|e| StrategyError::new(e.to_string()))?;
        Ok(())
    }

    fn state_key(&self, out: &mut Vec<u8>) {
        out.push(b'O');
        self.belief.write_key(out);
    }

    fn belief(&self) -> &Belief {
        &self.belief
    }

    fn phase_tag(&self) -> String {
        "optimal".to_string()
    }

    fn audit(&self) -> StrategyAudit {
        StrategyAudit::default()
    }

    fn clone_box(&self) -> Box<dyn CopStrategy + Send> {
        Box::new(self.clone())
    }
}

/// A constructive witness of non-locatability: a family of beliefs of size
/// at least 2 that the robber can stay inside forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafeFamily {
    pub beliefs: Vec<VertexSet>,
}

impl SafeFamily {
    /// Certificate lines: one belief per line as sorted vertex names.
    pub fn dump(&self, s: &SubdividedGraph) -> String {
        let mut out = String::new();
        for b in &self.beliefs {
            let names: Vec<String> = b.iter().map(|v| s.vertex_name(v)).collect();
            out.push_str(&names.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Extracts an evasion certificate from a non-locatable solve: the set of
/// non-winning reachable beliefs.
pub fn evasion_certificate(table: &Solved) -> Result<SafeFamily, SolverError> {
    if table.result().locatable {
        return Err(SolverError::Locatable);
    }
    let mut beliefs: Vec<VertexSet> = table
        .nodes
        .iter()
        .filter(|n| n.rank.is_none())
        .map(|n| n.belief.clone())
        .collect();
    beliefs.sort_by(|a, b| a.to_vec().cmp(&b.to_vec()));
    Ok(SafeFamily { beliefs })
}

/// Independently re-checks the closure property of a family by direct
/// enumeration over all probes and distance classes; no solver internals
/// are reused. For every member `B` and every probe, some distance class of
/// the expansion must have size >= 2 and contain a member of the family.
///
/// An empty family is vacuously closed; a non-locatability claim
/// additionally needs a nonempty family (every belief is a subset of the
/// full initial belief, so a nonempty closed family is anchored at the
/// start of the game).
pub fn verify_certificate(s: &SubdividedGraph, fam: &SafeFamily) -> bool {
    let nv = s.vertex_count();
    for b in &fam.beliefs {
        if b.len() < 2 || b.universe() != nv {
            return false;
        }
    }
    for b in &fam.beliefs {
        let expanded = expand(s, b);
        for p in 0..nv {
            let mut classes: HashMap<u32, VertexSet> = HashMap::new();
            for v in expanded.iter() {
                classes
                    .entry(s.distance(p, v))
                    .or_insert_with(|| VertexSet::empty(nv))
                    .insert(v);
            }
            let escapable = classes.values().any(|class| {
                class.len() >= 2 && fam.beliefs.iter().any(|f| f.is_subset_of(class))
            });
            if !escapable {
                return false;
            }
        }
    }
    true
}

/// A verified non-locatability witness: nonempty and closed.
pub fn certifies_non_locatable(s: &SubdividedGraph, fam: &SafeFamily) -> bool {
    !fam.beliefs.is_empty() && verify_certificate(s, fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn solve(g: Graph, m: u32) -> (SolveResult, Arc<Solved>) {
        let s = Arc::new(SubdividedGraph::equal(g, m).unwrap());
        decide_locatable(&s, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn paths_are_located_in_one_probe() {
        for n in 2..=10 {
            let (r, _) = solve(Graph::path(n), 1);
            assert!(r.locatable, "P_{n}");
            assert_eq!(r.capture_bound, Some(1), "P_{n}");
        }
    }

    #[test]
    fn triangle_is_not_locatable() {
        let (r, t) = solve(Graph::complete(3), 1);
        assert!(!r.locatable);
        let fam = evasion_certificate(&t).unwrap();
        assert!(certifies_non_locatable(&t.s, &fam));
    }

    #[test]
    fn star_k13_locatable_in_two() {
        let (r, _) = solve(Graph::star(3), 1);
        assert!(r.locatable);
        assert_eq!(r.capture_bound, Some(2));
    }

    #[test]
    fn one_vertex_graph() {
        let (r, _) = solve(Graph::new(1, &[]).unwrap(), 1);
        assert!(r.locatable);
        assert_eq!(r.capture_bound, Some(0));
    }

    #[test]
    fn certificate_rejects_singletons() {
        let s = SubdividedGraph::equal(Graph::complete(3), 1).unwrap();
        let fam = SafeFamily {
            beliefs: vec![VertexSet::from_iter_n(3, [0])],
        };
        assert!(!verify_certificate(&s, &fam));
        // Empty families are vacuously closed but certify nothing.
        let empty = SafeFamily { beliefs: vec![] };
        assert!(verify_certificate(&s, &empty));
        assert!(!certifies_non_locatable(&s, &empty));
    }

    #[test]
    fn triangle_certificate_contains_antipodal_pairs() {
        // On K_3 the three 2-element beliefs {v, w} (v, w the two vertices
        // other than any probe) stay closed under every probe.
        let (_, t) = solve(Graph::complete(3), 1);
        let fam = evasion_certificate(&t).unwrap();
        let pairs: Vec<Vec<u32>> = fam
            .beliefs
            .iter()
            .filter(|b| b.len() == 2)
            .map(|b| b.to_vec())
            .collect();
        assert!(pairs.contains(&vec![0, 1]));
        assert!(pairs.contains(&vec![0, 2]));
        assert!(pairs.contains(&vec![1, 2]));
    }

    #[test]
    fn vertex_budget_is_enforced() {
        let s = Arc::new(SubdividedGraph::equal(Graph::complete(4), 12).unwrap());
        let err = decide_locatable(&s, &SolverConfig::default()).unwrap_err();
        assert_eq!(
            err,
            SolverError::VertexBudget {
                actual: 70,
                limit: 64
            }
        );
    }

    #[test]
    fn extraction_requires_locatable() {
        let (_, t) = solve(Graph::complete(3), 1);
        assert!(matches!(
            extract_strategy(&t),
            Err(SolverError::NotLocatable)
        ));
        let (_, t) = solve(Graph::star(3), 1);
        assert!(extract_strategy(&t).is_ok());
        assert!(matches!(
            evasion_certificate(&t),
            Err(SolverError::Locatable)
        ));
    }

    #[test]
    fn downward_closure_on_explored_states() {
        // If B is a subset of B' and B' is a cop win, B is a cop win with a
        // rank no larger. Checked over all explored pairs on small instances.
        for (g, m) in [
            (Graph::star(3), 1),
            (Graph::cycle(4), 1),
            (Graph::path(4), 2),
        ] {
            let (_, t) = solve(g, m);
            let all: Vec<(&VertexSet, Option<u32>)> = t.explored().collect();
            for &(b, rb) in &all {
                for &(b2, rb2) in &all {
                    if b.is_subset_of(b2) {
                        if let Some(r2) = rb2 {
                            let r1 = rb.expect("subset of a cop win must be a cop win");
                            assert!(r1 <= r2);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn relabeling_preserves_result() {
        let g = Graph::paw();
        let (r1, _) = solve(g.clone(), 2);
        let perm = [2u32, 0, 3, 1];
        let (r2, _) = solve(g.relabel(&perm), 2);
        assert_eq!(r1.locatable, r2.locatable);
        assert_eq!(r1.capture_bound, r2.capture_bound);
    }
}
