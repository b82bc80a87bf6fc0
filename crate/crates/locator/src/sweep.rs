//! Batch adversarial verification across small graph families.

use crate::enumerate::connected_iso_classes;
use crate::error::EnumError;
use crate::graph::Graph;
use crate::matching::min_maximal_matching;
use crate::strategy::matching::build_matching_strategy;
use crate::subdivision::SubdividedGraph;
use crate::verify::{adversarial_verify, Verdict, VerifyConfig};
use rayon::prelude::*;
use std::sync::Arc;

/// One verified instance of the batch.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
    pub m: u32,
    pub matching_size: u32,
    /// Verdict kind, or the error that prevented a verdict.
    pub outcome: Result<SweepOutcome, String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub kind: &'static str,
    pub max_rounds: u32,
    pub max_probes_per_reduction: u32,
    pub max_reductions: u32,
    pub states_explored: u64,
}

/// Runs the matching strategy against every connected graph on up to
/// `max_n` vertices (one representative per isomorphism class, minimum
/// maximal matchings) for each subdivision length in `ms`. Rows come back
/// in a deterministic order regardless of parallelism.
pub fn sweep_matching_strategy(
    max_n: u32,
    ms: &[u32],
    config: &VerifyConfig,
) -> Result<Vec<SweepRow>, EnumError> {
    let mut instances = Vec::new();
    for n in 1..=max_n {
        for g in connected_iso_classes(n)? {
            for &m in ms {
                instances.push((n, g.clone(), m));
            }
        }
    }
    let rows: Vec<SweepRow> = instances
        .into_par_iter()
        .map(|(n, g, m)| verify_one(n, g, m, config))
        .collect();
    Ok(rows)
}

fn verify_one(n: u32, g: Graph, m: u32, config: &VerifyConfig) -> SweepRow {
    let edges = g.edges().to_vec();
    let matching = min_maximal_matching(&g);
    let matching_size = matching.size();
    let outcome = (|| {
        let s = Arc::new(SubdividedGraph::equal(g, m).map_err(|e| e.to_string())?);
        let strat = build_matching_strategy(s.clone(), &matching).map_err(|e| e.to_string())?;
        let verdict = adversarial_verify(&s, &strat, config).map_err(|e| e.to_string())?;
        Ok(match verdict {
            Verdict::AllCaptured {
                max_rounds,
                max_probes_per_reduction,
                max_reductions,
                states_explored,
                ..
            } => SweepOutcome {
                kind: "all_captured",
                max_rounds,
                max_probes_per_reduction,
                max_reductions,
                states_explored,
            },
            Verdict::EvasionFound {
                states_explored, ..
            } => SweepOutcome {
                kind: "evasion_found",
                max_rounds: 0,
                max_probes_per_reduction: 0,
                max_reductions: 0,
                states_explored,
            },
            Verdict::StrategyErrorFound {
                description,
                states_explored,
                ..
            } => {
                return Err(format!("strategy error: {description} ({states_explored} states)"));
            }
        })
    })();
    SweepRow {
        n,
        edges,
        m,
        matching_size,
        outcome,
    }
}
