//! Isolated / semi-isolated / mobile classification.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::config::{canonical_mask, LabeledConfig, Rules};
use crate::error::{Error, Result};
use crate::moves::MoveEngine;
use crate::unlabeled::{unlabeled_component, MaskSpace};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Isolated,
    SemiIsolated,
    Mobile,
    /// The budget ran out while some label had not moved yet.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    /// Labels never moved inside the explored part of the component.
    pub stuck: Vec<u8>,
    /// Configurations seen; the full component size unless truncated.
    pub component_size: u64,
    pub truncated: bool,
}

/// Classify `cfg` by BFS over its component, recording which labels move.
/// Stops early once every label has moved.
pub fn classify(cfg: &LabeledConfig, k: u32, budget: u64) -> Result<Classification> {
    let engine = MoveEngine::new(cfg.dim(), k)?;
    classify_with(&engine, cfg, budget)
}

pub fn classify_with(engine: &MoveEngine, cfg: &LabeledConfig, budget: u64) -> Result<Classification> {
    if cfg.dim() != engine.d() {
        return Err(Error::DimensionMismatch { expected: engine.d(), found: cfg.dim() });
    }
    let labels = cfg.labels();
    let mut moved = [false; 256];
    let mut unmoved = labels.len();
    let mut seen: FxHashSet<LabeledConfig> = FxHashSet::default();
    seen.insert(*cfg);
    let mut queue = std::collections::VecDeque::from([*cfg]);
    let mut truncated = false;
    'bfs: while let Some(c) = queue.pop_front() {
        for m in engine.legal_moves(&c) {
            if !moved[m.label as usize] {
                moved[m.label as usize] = true;
                unmoved -= 1;
                if unmoved == 0 {
                    truncated = !queue.is_empty() || engine.legal_moves(&c).len() > 0;
                    break 'bfs;
                }
            }
            let next = engine.apply_unchecked(&c, m.from, m.to);
            if seen.insert(next) {
                if seen.len() as u64 > budget {
                    truncated = true;
                    break 'bfs;
                }
                queue.push_back(next);
            }
        }
    }
    let stuck: Vec<u8> = labels.iter().copied().filter(|&l| !moved[l as usize]).collect();
    let kind = if stuck.is_empty() {
        Kind::Mobile
    } else if truncated {
        Kind::Inconclusive
    } else if stuck.len() == labels.len() {
        Kind::Isolated
    } else {
        Kind::SemiIsolated
    };
    // an empty board has nothing to move
    let kind = if labels.is_empty() { Kind::Isolated } else { kind };
    Ok(Classification { kind, stuck, component_size: seen.len() as u64, truncated })
}

/// Classification from the unlabeled component alone: a token is stuck
/// exactly when its vertex stays occupied throughout the component.
pub fn classify_unlabeled(engine: &MoveEngine, mask: u64) -> (Kind, u64) {
    let comp = unlabeled_component(engine, mask);
    let kind = if comp.is_isolated() || mask == 0 {
        Kind::Isolated
    } else if comp.is_mobile() {
        Kind::Mobile
    } else {
        Kind::SemiIsolated
    };
    (kind, comp.always_occupied)
}

/// Smallest `l <= l_max` for which `puz[d,k,l]` has a mobile configuration.
/// Scans one mask per cube-symmetry class.
pub fn first_mobile_l(d: u32, k: u32, l_max: u32) -> Result<u32> {
    let engine = MoveEngine::new(d, k)?;
    let v = 1u32 << d;
    for l in 1..=l_max.min(v - 1) {
        let space = MaskSpace::new(v, v - l);
        if space.count() > crate::explore::DEFAULT_MASK_BUDGET {
            return Err(Error::Budget(crate::explore::DEFAULT_MASK_BUDGET));
        }
        let mut tried = FxHashSet::default();
        for m in space.masks() {
            let c = canonical_mask(d, m);
            if !tried.insert(c) {
                continue;
            }
            if classify_unlabeled(&engine, c).0 == Kind::Mobile {
                return Ok(l);
            }
        }
    }
    Err(Error::Infeasible(format!("no mobile configuration with l <= {l_max}")))
}

/// Whether any configuration of `puz[d,k,l]` has the given kind, judged on
/// canonical masks.
pub fn kinds_present(rules: Rules) -> Result<Vec<Kind>> {
    let engine = MoveEngine::for_rules(&rules)?;
    let space = MaskSpace::new(rules.vertices(), rules.tokens());
    let mut tried = FxHashSet::default();
    let mut kinds = Vec::new();
    for m in space.masks() {
        let c = canonical_mask(rules.d, m);
        if tried.insert(c) {
            let k = classify_unlabeled(&engine, c).0;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    kinds.sort_by_key(|k| *k as u8);
    Ok(kinds)
}
