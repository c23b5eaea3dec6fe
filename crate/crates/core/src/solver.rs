//! Optimal solutions of single puzzles by bidirectional BFS.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::config::LabeledConfig;
use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::moves::{Move, MoveEngine};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Solved,
    UnsolvableDifferentComponent,
    UnknownBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Number of moves; only set when solved.
    pub length: Option<u32>,
    pub moves: Vec<Move>,
    /// Configurations stored by both searches together.
    pub explored: u64,
}

struct Side {
    parent: FxHashMap<LabeledConfig, LabeledConfig>,
    frontier: Vec<LabeledConfig>,
    depth: u32,
}

impl Side {
    fn new(root: LabeledConfig) -> Self {
        let mut parent = FxHashMap::default();
        parent.insert(root, root);
        Side { parent, frontier: vec![root], depth: 0 }
    }

    /// Configurations from `c` back to the root, `c` first.
    fn chain(&self, mut c: LabeledConfig) -> Vec<LabeledConfig> {
        let mut out = vec![c];
        loop {
            let p = self.parent[&c];
            if p == c {
                return out;
            }
            out.push(p);
            c = p;
        }
    }
}

enum Outcome {
    Met { meet: LabeledConfig, forward: Side, backward: Side },
    Exhausted(u64),
    Budget(u64),
    /// No path of length at most the limit.
    Farther(u64),
}

fn check_pair(engine: &MoveEngine, start: &LabeledConfig, target: &LabeledConfig) -> Result<()> {
    for c in [start, target] {
        if c.dim() != engine.d() {
            return Err(Error::DimensionMismatch { expected: engine.d(), found: c.dim() });
        }
    }
    let (mut a, mut b) = (start.labels(), target.labels());
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::Config("start and target carry different labels".into()));
    }
    Ok(())
}

fn search(engine: &MoveEngine, start: LabeledConfig, target: LabeledConfig, budget: u64, limit: Option<u32>) -> Outcome {
    let mut fwd = Side::new(start);
    let mut bwd = Side::new(target);
    if start == target {
        return Outcome::Met { meet: start, forward: fwd, backward: bwd };
    }
    loop {
        let explored = (fwd.parent.len() + bwd.parent.len()) as u64;
        if let Some(limit) = limit {
            if fwd.depth + bwd.depth >= limit {
                return Outcome::Farther(explored);
            }
        }
        // grow the smaller frontier; forward on ties
        let forward = fwd.frontier.len() <= bwd.frontier.len();
        let (me, other) = if forward { (&mut fwd, &bwd) } else { (&mut bwd, &fwd) };
        let mut next = Vec::new();
        let mut best: Option<(u32, LabeledConfig)> = None;
        let mut stored = explored;
        for c in std::mem::take(&mut me.frontier) {
            for m in engine.legal_moves(&c) {
                let n = engine.apply_unchecked(&c, m.from, m.to);
                if me.parent.contains_key(&n) {
                    continue;
                }
                me.parent.insert(n, c);
                stored += 1;
                if other.parent.contains_key(&n) {
                    // the other side reached n at some depth <= its own
                    let d_other = other.chain(n).len() as u32 - 1;
                    if best.map_or(true, |(b, _)| d_other < b) {
                        best = Some((d_other, n));
                    }
                }
                next.push(n);
            }
            if stored > budget && best.is_none() {
                return Outcome::Budget(stored);
            }
        }
        me.depth += 1;
        me.frontier = next;
        if let Some((_, meet)) = best {
            return Outcome::Met { meet, forward: fwd, backward: bwd };
        }
        if me.frontier.is_empty() {
            return Outcome::Exhausted(stored);
        }
    }
}

fn vacated(a: &LabeledConfig, b: &LabeledConfig) -> (Vertex, Vertex) {
    let (oa, ob) = (a.occupancy(), b.occupancy());
    let d = a.dim();
    (Vertex::raw(d, (oa & !ob).trailing_zeros()), Vertex::raw(d, (ob & !oa).trailing_zeros()))
}

/// Shortest k-move sequence from `start` to `target`.
pub fn solve(engine: &MoveEngine, start: &LabeledConfig, target: &LabeledConfig, budget: u64) -> Result<SolveResult> {
    check_pair(engine, start, target)?;
    Ok(match search(engine, *start, *target, budget, None) {
        Outcome::Met { meet, forward, backward } => {
            let mut path = forward.chain(meet);
            path.reverse();
            path.extend(backward.chain(meet).into_iter().skip(1));
            let moves: Vec<Move> = path
                .windows(2)
                .map(|w| {
                    let (from, to) = vacated(&w[0], &w[1]);
                    engine.find_move(&w[0], from, to).expect("path edges are legal moves")
                })
                .collect();
            SolveResult {
                status: SolveStatus::Solved,
                length: Some(moves.len() as u32),
                moves,
                explored: (forward.parent.len() + backward.parent.len()) as u64,
            }
        }
        Outcome::Exhausted(n) => {
            SolveResult { status: SolveStatus::UnsolvableDifferentComponent, length: None, moves: vec![], explored: n }
        }
        Outcome::Budget(n) | Outcome::Farther(n) => {
            SolveResult { status: SolveStatus::UnknownBudget, length: None, moves: vec![], explored: n }
        }
    })
}

/// Distance if it is at most `limit`, `None` if it is larger.
pub fn distance_within(
    engine: &MoveEngine,
    start: &LabeledConfig,
    target: &LabeledConfig,
    limit: u32,
    budget: u64,
) -> Result<Option<u32>> {
    check_pair(engine, start, target)?;
    match search(engine, *start, *target, budget, Some(limit)) {
        Outcome::Met { meet, forward, backward } => {
            Ok(Some((forward.chain(meet).len() + backward.chain(meet).len() - 2) as u32))
        }
        Outcome::Exhausted(_) | Outcome::Farther(_) => Ok(None),
        Outcome::Budget(_) => Err(Error::Budget(budget)),
    }
}

/// The smallest legal move (by label, then target vertex) that starts a
/// shortest solution. `None` when `current` already equals `target`.
pub fn hint(engine: &MoveEngine, current: &LabeledConfig, target: &LabeledConfig, budget: u64) -> Result<Option<Move>> {
    let r = solve(engine, current, target, budget)?;
    let dist = match r.status {
        SolveStatus::Solved => r.length.unwrap_or(0),
        SolveStatus::UnsolvableDifferentComponent => return Err(Error::Unsolvable),
        SolveStatus::UnknownBudget => return Err(Error::Budget(budget)),
    };
    if dist == 0 {
        return Ok(None);
    }
    for m in engine.legal_moves(current) {
        let next = engine.apply_unchecked(current, m.from, m.to);
        if distance_within(engine, &next, target, dist - 1, budget)?.is_some() {
            return Ok(Some(m));
        }
    }
    unreachable!("a shortest path starts with some legal move")
}

/// Replay `moves` from `start`, checking each one.
pub fn replay(engine: &MoveEngine, start: &LabeledConfig, moves: &[Move]) -> Result<LabeledConfig> {
    moves.iter().try_fold(*start, |c, m| engine.apply_move(&c, m))
}
