//! Parity structure of labeled components, read off the small unlabeled
//! graph.
//!
//! Every closed walk in the unlabeled graph permutes the tokens. The closed
//! walks at the root are generated by the fundamental cycles of a BFS tree,
//! so if all of those permute the tokens evenly, no labeled component can
//! contain two configurations that differ by an odd permutation.

use serde::{Deserialize, Serialize};

use crate::config::Rules;
use crate::error::{Error, Result};
use crate::explore::Regime;
use crate::moves::MoveEngine;
use crate::perm::{Perm, StabChain};
use crate::unlabeled::{all_components, cycle_permutation, tree_transport, unlabeled_component, UnlabeledComponent};

/// Token permutation attached to one fundamental cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclePermutation {
    /// Occupancy mask the cycle starts and ends at (the component root).
    pub base: u64,
    /// Image of each root token, tokens numbered in ascending vertex order.
    pub perm: Perm,
    /// Edges in the cycle.
    pub length: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    AtMostTwoMobileClasses,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub step: String,
    pub holds: bool,
    pub detail: String,
}

impl Evidence {
    fn new(step: &str, holds: bool, detail: String) -> Self {
        Evidence { step: step.to_string(), holds, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityReport {
    pub d: u32,
    pub k: u32,
    pub l: u32,
    /// Unlabeled configurations in the analysed component.
    pub component_size: u64,
    /// Every fundamental cycle permutes the tokens evenly.
    pub all_base_cycles_even: bool,
    pub conclusion: Conclusion,
    pub evidence: Vec<Evidence>,
}

/// Fundamental cycles of the BFS tree of `comp`, one per non-tree edge, in
/// BFS order of the lower endpoint.
pub fn fundamental_cycles(engine: &MoveEngine, comp: &UnlabeledComponent) -> Vec<CyclePermutation> {
    let pos = tree_transport(comp);
    let index = comp.index();
    let mut out = Vec::new();
    for (u, &m) in comp.masks.iter().enumerate() {
        for nb in engine.unlabeled_neighbors(m) {
            let v = index[&nb] as usize;
            if v <= u || comp.parent[v] as usize == u {
                continue;
            }
            out.push(CyclePermutation {
                base: comp.root(),
                perm: cycle_permutation(comp, &pos, u, v),
                length: comp.depth[u] + comp.depth[v] + 1,
            });
        }
    }
    out
}

/// Parity facts about one component.
#[derive(Clone, Debug)]
struct CycleFacts {
    cycles: u64,
    odd_token: u64,
    odd_length: u64,
    /// The group generated by the cycle permutations is the alternating
    /// group, so every even relabeling is reachable.
    alternating: bool,
    symmetric: bool,
    order_log2: f64,
}

fn cycle_facts(engine: &MoveEngine, comp: &UnlabeledComponent) -> CycleFacts {
    let n = comp.tokens() as usize;
    let pos = tree_transport(comp);
    let index = comp.index();
    let mut chain = StabChain::new(n);
    let mut f = CycleFacts { cycles: 0, odd_token: 0, odd_length: 0, alternating: false, symmetric: false, order_log2: 0.0 };
    for (u, &m) in comp.masks.iter().enumerate() {
        for nb in engine.unlabeled_neighbors(m) {
            let v = index[&nb] as usize;
            if v <= u || comp.parent[v] as usize == u {
                continue;
            }
            f.cycles += 1;
            f.odd_length += ((comp.depth[u] + comp.depth[v] + 1) % 2) as u64;
            let p = cycle_permutation(comp, &pos, u, v);
            let odd = p.parity() == 1;
            f.odd_token += odd as u64;
            // once the group is alternating, only odd elements can add to it
            if (f.alternating && !odd) || f.symmetric {
                continue;
            }
            if chain.add_generator(&p) {
                f.symmetric = chain.is_symmetric();
                f.alternating = chain.is_alternating();
            }
        }
    }
    f.order_log2 = chain.log2_order();
    // one or zero tokens: every permutation is even and trivially reachable
    if n <= 1 {
        f.alternating = true;
    }
    f
}

/// Parity report for the component containing `root`.
pub fn cycle_base_parity(engine: &MoveEngine, root: u64) -> ParityReport {
    let comp = unlabeled_component(engine, root);
    report_for(engine, &comp, &cycle_facts(engine, &comp))
}

fn report_for(engine: &MoveEngine, comp: &UnlabeledComponent, f: &CycleFacts) -> ParityReport {
    let d = engine.d();
    let all_even = f.odd_token == 0;
    let mut evidence = vec![
        Evidence::new(
            "unlabeled-component",
            true,
            format!("root {:#x}, {} configurations, {} fundamental cycles", comp.root(), comp.len(), f.cycles),
        ),
        Evidence::new(
            "fundamental-cycle-parity",
            all_even,
            format!("{} of {} cycles permute the tokens oddly", f.odd_token, f.cycles),
        ),
        Evidence::new(
            "cycle-length-parity",
            f.odd_length == 0,
            format!("{} of {} cycles have odd length", f.odd_length, f.cycles),
        ),
    ];
    if comp.tokens() >= 2 {
        evidence.push(Evidence::new(
            "loop-group",
            f.alternating || f.symmetric,
            format!(
                "log2 order {:.3}; {}",
                f.order_log2,
                if f.symmetric {
                    "full symmetric group"
                } else if f.alternating {
                    "alternating group"
                } else {
                    "proper subgroup of the alternating group"
                }
            ),
        ));
    }
    ParityReport {
        d,
        k: engine.k(),
        l: (1u32 << d) - comp.tokens(),
        component_size: comp.len() as u64,
        all_base_cycles_even: all_even,
        conclusion: if all_even { Conclusion::AtMostTwoMobileClasses } else { Conclusion::Inconclusive },
        evidence,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityVerdict {
    pub d: u32,
    pub k: u32,
    pub l: u32,
    /// `strong-parity`, `connected`, `at-most-two`, `isolated` or
    /// `semi-isolated`. `None` when neither leg settles it.
    pub regime: Option<Regime>,
    pub mobile_unlabeled_components: u64,
    pub reports: Vec<ParityReport>,
    pub evidence: Vec<Evidence>,
}

/// Combine the cycle-parity leg with even solvability (the loop group
/// contains every even permutation) into a regime for the mobile stratum.
pub fn strong_parity_verdict(rules: Rules) -> Result<ParityVerdict> {
    let engine = MoveEngine::for_rules(&rules)?;
    let n = rules.tokens();
    let comps = all_components(&engine, n);
    let mobile: Vec<&UnlabeledComponent> = comps.iter().filter(|c| c.is_mobile() && !c.is_isolated()).collect();
    let mut evidence = vec![Evidence::new(
        "mobile-stratum",
        mobile.len() == 1,
        format!("{} unlabeled components, {} containing mobile configurations", comps.len(), mobile.len()),
    )];
    let mut verdict = ParityVerdict {
        d: rules.d,
        k: rules.k,
        l: rules.l,
        regime: None,
        mobile_unlabeled_components: mobile.len() as u64,
        reports: Vec::new(),
        evidence: Vec::new(),
    };
    if mobile.is_empty() {
        let any_moves = comps.iter().any(|c| !c.is_isolated());
        verdict.regime = Some(if any_moves { Regime::SemiIsolated } else { Regime::Isolated });
        verdict.evidence = evidence;
        return Ok(verdict);
    }
    let mut facts = Vec::new();
    for c in &mobile {
        let f = cycle_facts(&engine, c);
        verdict.reports.push(report_for(&engine, c, &f));
        facts.push(f);
    }
    let all_even = facts.iter().all(|f| f.odd_token == 0);
    let even_solvable = facts.iter().all(|f| f.alternating || f.symmetric);
    let full = facts.iter().all(|f| f.symmetric);
    evidence.push(Evidence::new(
        "all-base-cycles-even",
        all_even,
        "labeled components never join configurations of opposite parity".to_string(),
    ));
    evidence.push(Evidence::new(
        "even-solvability",
        even_solvable,
        "closed walks realise every even relabeling".to_string(),
    ));
    verdict.regime = if mobile.len() == 1 && full {
        Some(Regime::Connected)
    } else if mobile.len() == 1 && all_even && even_solvable && n >= 2 {
        Some(Regime::StrongParity)
    } else if mobile.len() == 1 && all_even {
        Some(Regime::AtMostTwo)
    } else {
        None
    };
    verdict.evidence = evidence;
    Ok(verdict)
}

/// Strong parity check for a rules triple; errors when the verdict is
/// anything else.
pub fn require_strong_parity(rules: Rules) -> Result<ParityVerdict> {
    let v = strong_parity_verdict(rules)?;
    match v.regime {
        Some(Regime::StrongParity) => Ok(v),
        other => Err(Error::Infeasible(format!("regime {other:?} instead of strong parity"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LabeledConfig;
    use crate::explore::distances_from;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use rustc_hash::FxHashSet;

    #[test]
    fn three_two_four_all_even() {
        let e = MoveEngine::new(3, 2).unwrap();
        let r = cycle_base_parity(&e, 0b0001_0111);
        assert_eq!(r.component_size, 56);
        assert!(r.all_base_cycles_even);
        assert_eq!(r.conclusion, Conclusion::AtMostTwoMobileClasses);
        let v = strong_parity_verdict(Rules::new(3, 2, 4).unwrap()).unwrap();
        assert_eq!(v.regime, Some(Regime::StrongParity));
    }

    #[test]
    fn tree_component_is_vacuously_even() {
        // four stuck tokens on a 2-face, one free token on the opposite face
        let e = MoveEngine::new(3, 2).unwrap();
        let r = cycle_base_parity(&e, 0b0001_0111 | 1 << 3);
        assert!(r.all_base_cycles_even);
        let e = MoveEngine::new(2, 1).unwrap();
        let r = cycle_base_parity(&e, 0b0001);
        // a single token going round a square
        assert_eq!(r.component_size, 4);
        assert!(r.all_base_cycles_even);
    }

    #[test]
    fn length_parity_matches_two_colouring() {
        for (d, k) in [(2, 1), (3, 1), (3, 2), (3, 3), (4, 3)] {
            let e = MoveEngine::new(d, k).unwrap();
            for n in 1..(1u32 << d) {
                for c in all_components(&e, n) {
                    let odd_len = fundamental_cycles(&e, &c).iter().filter(|cy| cy.length % 2 == 1).count();
                    assert_eq!(odd_len == 0, c.is_bipartite(&e), "d={d} k={k} root={:#x}", c.root());
                }
            }
        }
    }

    #[test]
    fn adjacent_slides_give_even_cycles() {
        for d in 2..=4u32 {
            let e = MoveEngine::new(d, 1).unwrap();
            for n in [1, (1u32 << d) - 2, (1u32 << d) - 1] {
                for c in all_components(&e, n).iter().take(20) {
                    assert!(fundamental_cycles(&e, c).iter().all(|cy| cy.length % 2 == 0));
                }
            }
        }
    }

    #[test]
    fn single_token_in_a_square_face_has_odd_cycles_but_even_tokens() {
        let e = MoveEngine::new(2, 2).unwrap();
        let c = unlabeled_component(&e, 0b0001);
        assert_eq!(c.len(), 4);
        let cycles = fundamental_cycles(&e, &c);
        assert!(cycles.iter().any(|cy| cy.length % 2 == 1));
        assert!(cycles.iter().all(|cy| cy.perm.parity() == 0));
    }

    /// Token permutation of a closed walk, tracked directly.
    fn walk_perm(masks: &[u64]) -> Perm {
        let start: Vec<u8> = (0..64u8).filter(|&v| masks[0] >> v & 1 == 1).collect();
        let mut pos = start.clone();
        for w in masks.windows(2) {
            let from = (w[0] & !w[1]).trailing_zeros() as u8;
            let to = (w[1] & !w[0]).trailing_zeros() as u8;
            for x in pos.iter_mut() {
                if *x == from {
                    *x = to;
                }
            }
        }
        Perm(pos.iter().map(|x| start.iter().position(|s| s == x).unwrap() as u8).collect())
    }

    #[test]
    fn random_closed_walks_lie_in_the_cycle_group() {
        let mut rng = StdRng::seed_from_u64(7);
        for (d, k, l) in [(3, 2, 4), (3, 1, 2), (3, 2, 5), (3, 1, 1)] {
            let e = MoveEngine::new(d, k).unwrap();
            let n = (1u32 << d) - l;
            for c in all_components(&e, n).iter().filter(|c| c.len() > 1).take(3) {
                let cycles = fundamental_cycles(&e, c);
                let mut chain = StabChain::new(n as usize);
                for cy in &cycles {
                    chain.add_generator(&cy.perm);
                }
                let all_even = cycles.iter().all(|cy| cy.perm.parity() == 0);
                for _ in 0..40 {
                    // random walk out and back along a different random path
                    let mut walk = vec![c.root()];
                    for _ in 0..rng.gen_range(1..12) {
                        let nb = e.unlabeled_neighbors(*walk.last().unwrap());
                        walk.push(nb[rng.gen_range(0..nb.len())]);
                    }
                    // return through the BFS tree
                    let index = c.index();
                    let mut i = index[walk.last().unwrap()] as usize;
                    while i != 0 {
                        i = c.parent[i] as usize;
                        walk.push(c.masks[i]);
                    }
                    let p = walk_perm(&walk);
                    assert!(chain.contains(&p));
                    if all_even {
                        assert_eq!(p.parity(), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn labeled_oracle_reaches_exactly_even_relabelings() {
        let e = MoveEngine::new(3, 2).unwrap();
        let start = LabeledConfig::from_mask(3, 0b0001_0111).unwrap();
        let reached: FxHashSet<LabeledConfig> = distances_from(&e, start).into_keys().collect();
        assert_eq!(reached.len(), 672);
        let mut per_mask = rustc_hash::FxHashMap::default();
        for c in &reached {
            *per_mask.entry(c.occupancy()).or_insert(0u32) += 1;
            // a 3-cycle of labels stays in the component, a swap leaves it
            let three = c.relabel(&[0, 2, 3, 1, 4]);
            let swap = c.relabel(&[0, 2, 1, 3, 4]);
            assert!(reached.contains(&three));
            assert!(!reached.contains(&swap));
        }
        assert_eq!(per_mask.len(), 56);
        assert!(per_mask.values().all(|&x| x == 12));
    }

    #[test]
    fn verdicts_on_small_tables() {
        let r = |d, k, l| strong_parity_verdict(Rules::new(d, k, l).unwrap()).unwrap().regime;
        assert_eq!(r(2, 1, 1), Some(Regime::StrongParity));
        assert_eq!(r(2, 1, 2), Some(Regime::Connected));
        assert_eq!(r(3, 1, 1), Some(Regime::StrongParity));
        assert_eq!(r(3, 2, 5), Some(Regime::Connected));
        assert_eq!(r(3, 2, 3), Some(Regime::SemiIsolated));
        assert_eq!(r(3, 2, 1), Some(Regime::Isolated));
        assert_eq!(r(4, 3, 11), Some(Regime::StrongParity));
    }

    #[test]
    fn json_shape() {
        let e = MoveEngine::new(3, 2).unwrap();
        let r = cycle_base_parity(&e, 0b0001_0111);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["conclusion"], "at-most-two-mobile-classes");
        assert_eq!(v["l"], 4);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 7);
    }
}
