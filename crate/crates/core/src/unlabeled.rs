//! The unlabeled puzzle graph: occupancy masks joined by single moves, its
//! components, and the token permutations its cycles induce.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::moves::MoveEngine;
use crate::perm::{factorial, Perm, StabChain};

/// Binomial coefficients `C(a, b)` for `a, b <= 64`.
pub(crate) struct Binomials([[u64; 65]; 65]);

impl Binomials {
    pub fn new() -> Self {
        let mut t = [[0u64; 65]; 65];
        for a in 0..=64 {
            t[a][0] = 1;
            for b in 1..=a {
                t[a][b] = t[a - 1][b - 1].saturating_add(if b <= a - 1 { t[a - 1][b] } else { 0 });
            }
        }
        Binomials(t)
    }

    #[inline]
    pub fn get(&self, a: u32, b: u32) -> u64 {
        if b > a {
            0
        } else {
            self.0[a as usize][b as usize]
        }
    }
}

/// Colex ranking of the `n`-subsets of `0..v`. Colex order coincides with
/// numeric order of the bit masks.
pub struct MaskSpace {
    pub v: u32,
    pub n: u32,
    binom: Binomials,
}

impl MaskSpace {
    pub fn new(v: u32, n: u32) -> Self {
        assert!(v <= 64 && n <= v);
        MaskSpace { v, n, binom: Binomials::new() }
    }

    pub fn count(&self) -> u64 {
        self.binom.get(self.v, self.n)
    }

    #[inline]
    pub fn rank(&self, mask: u64) -> u64 {
        let mut m = mask;
        let mut r = 0;
        let mut i = 1;
        while m != 0 {
            let p = m.trailing_zeros();
            r += self.binom.get(p, i);
            i += 1;
            m &= m - 1;
        }
        r
    }

    pub fn unrank(&self, mut r: u64) -> u64 {
        let mut mask = 0u64;
        let mut p = self.v;
        for i in (1..=self.n).rev() {
            p -= 1;
            while self.binom.get(p, i) > r {
                p -= 1;
            }
            r -= self.binom.get(p, i);
            mask |= 1 << p;
        }
        mask
    }

    /// All masks in rank order.
    pub fn masks(&self) -> MaskIter {
        let first = if self.n == 0 { 0 } else { u64::MAX >> (64 - self.n) };
        MaskIter { next: Some(first), v: self.v }
    }
}

pub struct MaskIter {
    next: Option<u64>,
    v: u32,
}

impl Iterator for MaskIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if self.v < 64 && cur >> self.v != 0 {
            self.next = None;
            return None;
        }
        // Gosper's hack
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            if r == 0 {
                None
            } else {
                Some((((r ^ cur) >> 2) / c) | r)
            }
        };
        Some(cur)
    }
}

/// A connected component of the unlabeled puzzle graph, in BFS order from
/// its root, with the BFS tree.
#[derive(Clone, Debug)]
pub struct UnlabeledComponent {
    pub d: u32,
    pub k: u32,
    pub masks: Vec<u64>,
    /// BFS parent index (root points to itself).
    pub parent: Vec<u32>,
    pub depth: Vec<u32>,
    /// Vertices occupied in every mask: the stuck tokens sit here.
    pub always_occupied: u64,
}

impl UnlabeledComponent {
    pub fn root(&self) -> u64 {
        self.masks[0]
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn tokens(&self) -> u32 {
        self.masks[0].count_ones()
    }

    pub fn is_isolated(&self) -> bool {
        self.masks.len() == 1
    }

    pub fn is_mobile(&self) -> bool {
        self.always_occupied == 0
    }

    /// Largest BFS depth from the root.
    pub fn eccentricity_of_root(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// A 2-colouring exists.
    pub fn is_bipartite(&self, engine: &MoveEngine) -> bool {
        let index = self.index();
        self.masks.iter().enumerate().all(|(i, &m)| {
            engine
                .unlabeled_neighbors(m)
                .iter()
                .all(|n| (self.depth[index[n] as usize] + self.depth[i]) % 2 == 1)
        })
    }

    pub(crate) fn index(&self) -> FxHashMap<u64, u32> {
        self.masks.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect()
    }
}

/// BFS over occupancy masks from `root`.
pub fn unlabeled_component(engine: &MoveEngine, root: u64) -> UnlabeledComponent {
    let mut index: FxHashMap<u64, u32> = FxHashMap::default();
    index.insert(root, 0);
    let mut comp = UnlabeledComponent {
        d: engine.d(),
        k: engine.k(),
        masks: vec![root],
        parent: vec![0],
        depth: vec![0],
        always_occupied: root,
    };
    let mut head = 0;
    while head < comp.masks.len() {
        let m = comp.masks[head];
        for n in engine.unlabeled_neighbors(m) {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(n) {
                e.insert(comp.masks.len() as u32);
                comp.masks.push(n);
                comp.parent.push(head as u32);
                comp.depth.push(comp.depth[head] + 1);
                comp.always_occupied &= n;
            }
        }
        head += 1;
    }
    comp
}

/// Every component of the unlabeled graph with `n` tokens, each rooted at
/// its smallest mask, in increasing root order.
pub fn all_components(engine: &MoveEngine, n: u32) -> Vec<UnlabeledComponent> {
    let space = MaskSpace::new(1 << engine.d(), n);
    let mut seen = vec![false; space.count() as usize];
    let mut out = Vec::new();
    for m in space.masks() {
        let r = space.rank(m) as usize;
        if seen[r] {
            continue;
        }
        let comp = unlabeled_component(engine, m);
        for &x in &comp.masks {
            seen[space.rank(x) as usize] = true;
        }
        out.push(comp);
    }
    out
}

/// Where each root token sits after walking the BFS tree to every node:
/// `pos[node][t]` is the vertex of root token `t`. Root tokens are numbered
/// in ascending vertex order of the root mask.
pub(crate) fn tree_transport(comp: &UnlabeledComponent) -> Vec<Vec<u8>> {
    let root = comp.root();
    let start: Vec<u8> = (0..64u8).filter(|&v| root >> v & 1 == 1).collect();
    let mut pos = Vec::with_capacity(comp.len());
    pos.push(start);
    for i in 1..comp.len() {
        let p = comp.parent[i] as usize;
        let (from, to) = moved_vertices(comp.masks[p], comp.masks[i]);
        let mut next = pos[p].clone();
        for x in next.iter_mut() {
            if *x == from {
                *x = to;
            }
        }
        pos.push(next);
    }
    pos
}

/// The vertex vacated and the vertex filled by the move `a -> b`.
#[inline]
pub(crate) fn moved_vertices(a: u64, b: u64) -> (u8, u8) {
    ((a & !b).trailing_zeros() as u8, (b & !a).trailing_zeros() as u8)
}

/// Permutation of root tokens induced by the fundamental cycle of the
/// non-tree edge `u -> v`: walk the tree to `u`, take the edge, walk the tree
/// back from `v`.
pub(crate) fn cycle_permutation(comp: &UnlabeledComponent, pos: &[Vec<u8>], u: usize, v: usize) -> Perm {
    let (from, to) = moved_vertices(comp.masks[u], comp.masks[v]);
    let mut owner = [u8::MAX; 64];
    for (t, &x) in pos[v].iter().enumerate() {
        owner[x as usize] = t as u8;
    }
    Perm(
        pos[u]
            .iter()
            .map(|&x| {
                let x = if x == from { to } else { x };
                owner[x as usize]
            })
            .collect(),
    )
}

/// The group of token permutations realised by closed walks at the root.
#[derive(Clone, Debug, Serialize)]
pub struct LoopGroup {
    pub tokens: u32,
    /// `None` when the order exceeds `u128`.
    pub order: Option<u128>,
    pub symmetric: bool,
    pub alternating: bool,
    /// Non-tree edges examined.
    pub cycles_examined: u64,
    /// Non-tree edges in total.
    pub cycles_total: u64,
    /// Fundamental cycles whose token permutation is odd.
    pub odd_token_cycles: u64,
    /// Fundamental cycles of odd length.
    pub odd_length_cycles: u64,
    /// True when every examined cycle was examined with full detail; false
    /// when the symmetric group was reached early and the rest skipped.
    pub complete: bool,
}

impl LoopGroup {
    pub fn all_token_cycles_even(&self) -> bool {
        self.complete && self.odd_token_cycles == 0
    }

    /// Labeled configurations over the component reachable from one start.
    pub fn labeled_component_size(&self, unlabeled_size: u64) -> Option<u128> {
        self.order.and_then(|o| o.checked_mul(unlabeled_size as u128))
    }

    /// Labeled components lying over the unlabeled component.
    pub fn labeled_components(&self) -> Option<u128> {
        if self.tokens > 34 {
            return None;
        }
        self.order.map(|o| factorial(self.tokens) / o)
    }
}

/// Compute the loop group of a component from its fundamental cycles.
pub fn loop_group(engine: &MoveEngine, comp: &UnlabeledComponent) -> LoopGroup {
    let n = comp.tokens() as usize;
    let pos = tree_transport(comp);
    let index = comp.index();
    let mut chain = StabChain::new(n);
    let mut g = LoopGroup {
        tokens: n as u32,
        order: Some(1),
        symmetric: false,
        alternating: false,
        cycles_examined: 0,
        cycles_total: 0,
        odd_token_cycles: 0,
        odd_length_cycles: 0,
        complete: true,
    };
    for (u, &m) in comp.masks.iter().enumerate() {
        for nb in engine.unlabeled_neighbors(m) {
            let v = index[&nb] as usize;
            // each undirected non-tree edge once
            if v <= u || comp.parent[v] as usize == u {
                continue;
            }
            g.cycles_total += 1;
            if g.symmetric {
                g.complete = false;
                continue;
            }
            g.cycles_examined += 1;
            let perm = cycle_permutation(comp, &pos, u, v);
            let odd = perm.parity() == 1;
            g.odd_token_cycles += odd as u64;
            g.odd_length_cycles += ((comp.depth[u] + comp.depth[v] + 1) % 2) as u64;
            if g.alternating && !odd {
                continue;
            }
            if chain.add_generator(&perm) {
                g.symmetric = chain.is_symmetric();
                g.alternating = chain.is_alternating();
            }
        }
    }
    g.order = chain.order();
    g.symmetric = chain.is_symmetric();
    g.alternating = chain.is_alternating();
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LabeledConfig;
    use std::collections::{HashSet, VecDeque};

    #[test]
    fn colex_rank_round_trip() {
        let s = MaskSpace::new(16, 5);
        assert_eq!(s.count(), 4368);
        for (i, m) in s.masks().enumerate() {
            assert_eq!(s.rank(m), i as u64);
            assert_eq!(s.unrank(i as u64), m);
        }
        assert_eq!(s.masks().count(), 4368);
        assert_eq!(MaskSpace::new(8, 0).masks().collect::<Vec<_>>(), vec![0]);
        assert_eq!(MaskSpace::new(8, 8).masks().collect::<Vec<_>>(), vec![0xff]);
        assert_eq!(MaskSpace::new(64, 63).masks().count(), 64);
    }

    #[test]
    fn component_partition_covers_space() {
        let e = MoveEngine::new(3, 2).unwrap();
        for n in 0..=8 {
            let comps = all_components(&e, n);
            let total: usize = comps.iter().map(|c| c.len()).sum();
            assert_eq!(total as u64, MaskSpace::new(8, n).count());
        }
    }

    #[test]
    fn isolated_mask_is_single_vertex() {
        let e = MoveEngine::new(3, 2).unwrap();
        let left = LabeledConfig::from_mask(3, 0b1001_0110).unwrap();
        let c = unlabeled_component(&e, left.occupancy());
        assert!(c.is_isolated());
    }

    /// Oracle: explicit labeled BFS from one configuration.
    fn labeled_size(engine: &MoveEngine, start: LabeledConfig) -> usize {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for m in engine.legal_moves(&c) {
                let n = engine.apply_move(&c, &m).unwrap();
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn loop_group_predicts_labeled_sizes() {
        for (d, k) in [(2, 1), (3, 1), (3, 2)] {
            let e = MoveEngine::new(d, k).unwrap();
            for n in 1..(1 << d) {
                for comp in all_components(&e, n) {
                    let g = loop_group(&e, &comp);
                    let start = LabeledConfig::from_mask(d, comp.root()).unwrap();
                    let want = labeled_size(&e, start) as u128;
                    assert_eq!(g.labeled_component_size(comp.len() as u64), Some(want), "d={d} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn odd_cycles_with_even_token_permutation() {
        // one token alone in a square: the unlabeled graph is a triangle-rich
        // K4 yet every closed walk fixes the token
        let e = MoveEngine::new(2, 2).unwrap();
        let comp = unlabeled_component(&e, 1);
        assert_eq!(comp.len(), 4);
        assert!(!comp.is_bipartite(&e));
        let g = loop_group(&e, &comp);
        assert_eq!(g.odd_token_cycles, 0);
        assert!(g.odd_length_cycles > 0);
    }

    #[test]
    fn bipartite_iff_no_odd_length_cycle() {
        for (d, k) in [(2, 1), (3, 1), (3, 2), (3, 3)] {
            let e = MoveEngine::new(d, k).unwrap();
            for n in 1..(1 << d) {
                for comp in all_components(&e, n) {
                    let g = loop_group(&e, &comp);
                    if g.complete {
                        assert_eq!(comp.is_bipartite(&e), g.odd_length_cycles == 0);
                    }
                }
            }
        }
    }
}
