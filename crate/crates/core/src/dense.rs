//! Bitset breadth-first search over all labelings of one unlabeled
//! component.
//!
//! A state is `rank(mask) * n! + lehmer(labels)`, where `labels` lists the
//! token labels in ascending vertex order. Moving the token in slot `i` to an
//! empty vertex that becomes slot `j` rotates the label sequence, so the new
//! Lehmer rank comes from a precomputed table indexed by `(i, j, rank)`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::config::LabeledConfig;
use crate::error::{Error, Result};
use crate::moves::MoveEngine;

/// Largest token count handled by the dense engine.
pub const MAX_DENSE_TOKENS: u32 = 9;

fn fact(n: u32) -> u64 {
    (1..=n as u64).product()
}

pub(crate) fn lehmer_rank(seq: &[u8]) -> u32 {
    let n = seq.len() as u32;
    let mut used = 0u32;
    let mut r = 0u32;
    for (i, &x) in seq.iter().enumerate() {
        let smaller_unused = (!used & ((1u32 << x) - 1)).count_ones();
        r += smaller_unused * fact(n - 1 - i as u32) as u32;
        used |= 1 << x;
    }
    r
}

pub(crate) fn lehmer_unrank(mut r: u32, n: u32, out: &mut [u8]) {
    let mut unused: u32 = (1u32 << n) - 1;
    for i in 0..n {
        let f = fact(n - 1 - i) as u32;
        let mut q = r / f;
        r %= f;
        let mut m = unused;
        while q > 0 {
            m &= m - 1;
            q -= 1;
        }
        let x = m.trailing_zeros();
        out[i as usize] = x as u8;
        unused &= !(1 << x);
    }
}

/// `table[(i * n + j) * n! + r]`: rank after moving slot `i` to slot `j`.
fn shift_table(n: u32) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<Mutex<FxHashMap<u32, Arc<Vec<u32>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(FxHashMap::default()));
    if let Some(t) = cache.lock().expect("cache lock").get(&n) {
        return t.clone();
    }
    let f = fact(n) as usize;
    let nn = n as usize;
    let mut table = vec![0u32; nn * nn * f];
    table.par_chunks_mut(f).enumerate().for_each(|(ij, row)| {
        let (i, j) = (ij / nn, ij % nn);
        let mut seq = [0u8; 16];
        for (r, slot) in row.iter_mut().enumerate() {
            lehmer_unrank(r as u32, n, &mut seq);
            let s = &mut seq[..nn];
            if i < j {
                s[i..=j].rotate_left(1);
            } else {
                s[j..=i].rotate_right(1);
            }
            *slot = lehmer_rank(s);
        }
    });
    let table = Arc::new(table);
    cache.lock().expect("cache lock").insert(n, table.clone());
    table
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    i: u8,
    j: u8,
    target: u32,
}

/// Per-level statistics of one BFS.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BfsStats {
    pub visited: u64,
    /// Final depth reached (eccentricity of the start).
    pub max_depth: u32,
    pub frontier_peak: u64,
    pub level_sizes: Vec<u64>,
}

/// All labelings of one unlabeled component, ready for repeated BFS runs.
pub struct DenseSpace {
    d: u32,
    n: u32,
    fact: u64,
    masks: Vec<u64>,
    index: FxHashMap<u64, u32>,
    offsets: Vec<u32>,
    edges: Vec<Edge>,
    shift: Arc<Vec<u32>>,
    visited: Vec<AtomicU64>,
    frontier: Vec<AtomicU64>,
    next: Vec<AtomicU64>,
}

impl DenseSpace {
    /// Number of bits needed for a component of `masks` masks with `n` tokens.
    pub fn states_for(masks: usize, n: u32) -> u64 {
        masks as u64 * fact(n)
    }

    /// Build the space over the given masks, which must be closed under moves.
    pub fn new(engine: &MoveEngine, masks: &[u64]) -> Result<Self> {
        let mut masks = masks.to_vec();
        masks.sort_unstable();
        let n = masks.first().map(|m| m.count_ones()).unwrap_or(0);
        if n > MAX_DENSE_TOKENS {
            return Err(Error::Infeasible(format!(
                "dense search supports at most {MAX_DENSE_TOKENS} tokens, got {n}"
            )));
        }
        let index: FxHashMap<u64, u32> = masks.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let mut offsets = Vec::with_capacity(masks.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for &m in &masks {
            let mut occ = m;
            let mut slot = 0u8;
            while occ != 0 {
                let a = occ.trailing_zeros();
                occ &= occ - 1;
                let mut r = engine.reach(a as usize, m);
                while r != 0 {
                    let b = r.trailing_zeros();
                    r &= r - 1;
                    let next = m ^ (1u64 << a) ^ (1u64 << b);
                    let target = *index.get(&next).ok_or_else(|| {
                        Error::Config("mask set is not closed under moves".into())
                    })?;
                    let j = (next & ((1u64 << b) - 1)).count_ones() as u8;
                    edges.push(Edge { i: slot, j, target });
                }
                slot += 1;
            }
            offsets.push(edges.len() as u32);
        }
        let f = fact(n);
        let words = ((masks.len() as u64 * f + 63) / 64) as usize;
        let alloc = |w: usize| (0..w).map(|_| AtomicU64::new(0)).collect::<Vec<_>>();
        Ok(DenseSpace {
            d: engine.d(),
            n,
            fact: f,
            masks,
            index,
            offsets,
            edges,
            shift: shift_table(n),
            visited: alloc(words),
            frontier: alloc(words),
            next: alloc(words),
        })
    }

    pub fn num_states(&self) -> u64 {
        self.masks.len() as u64 * self.fact
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    /// State index of a configuration with labels `1..=n`.
    pub fn state_of(&self, cfg: &LabeledConfig) -> Result<u64> {
        if !cfg.is_standard() || cfg.num_tokens() != self.n || cfg.dim() != self.d {
            return Err(Error::Config("configuration does not belong to this space".into()));
        }
        let r = *self
            .index
            .get(&cfg.occupancy())
            .ok_or_else(|| Error::Config("occupancy outside the component".into()))?;
        let seq: Vec<u8> = cfg.cells().iter().filter(|&&c| c != 0).map(|&c| c - 1).collect();
        Ok(r as u64 * self.fact + lehmer_rank(&seq) as u64)
    }

    pub fn config_of(&self, state: u64) -> LabeledConfig {
        let mask = self.masks[(state / self.fact) as usize];
        let mut seq = [0u8; 16];
        lehmer_unrank((state % self.fact) as u32, self.n, &mut seq);
        let mut cells = vec![0u8; 1 << self.d];
        let mut slot = 0;
        for (v, cell) in cells.iter_mut().enumerate() {
            if mask >> v & 1 == 1 {
                *cell = seq[slot] + 1;
                slot += 1;
            }
        }
        LabeledConfig::from_cells(self.d, &cells).expect("valid cells")
    }

    fn clear(bits: &[AtomicU64]) {
        bits.par_iter().for_each(|w| w.store(0, Ordering::Relaxed));
    }

    #[inline]
    fn get(bits: &[AtomicU64], i: u64) -> bool {
        bits[(i / 64) as usize].load(Ordering::Relaxed) >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(bits: &[AtomicU64], i: u64) {
        let w = &bits[(i / 64) as usize];
        let bit = 1u64 << (i % 64);
        if w.load(Ordering::Relaxed) & bit == 0 {
            w.fetch_or(bit, Ordering::Relaxed);
        }
    }

    /// Level-synchronous BFS from `start`. The visited set is kept for
    /// [`DenseSpace::is_visited`] until the next run.
    pub fn bfs(&mut self, start: u64) -> BfsStats {
        Self::clear(&self.visited);
        Self::clear(&self.frontier);
        Self::clear(&self.next);
        Self::set(&self.visited, start);
        Self::set(&self.frontier, start);
        let mut stats = BfsStats { visited: 1, max_depth: 0, frontier_peak: 1, level_sizes: vec![1] };
        loop {
            self.expand();
            let found: u64 = self
                .next
                .par_iter()
                .zip(self.visited.par_iter())
                .map(|(n, v)| {
                    let bits = n.load(Ordering::Relaxed) & !v.load(Ordering::Relaxed);
                    n.store(bits, Ordering::Relaxed);
                    v.fetch_or(bits, Ordering::Relaxed);
                    bits.count_ones() as u64
                })
                .sum();
            if found == 0 {
                break;
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            Self::clear(&self.next);
            stats.visited += found;
            stats.max_depth += 1;
            stats.frontier_peak = stats.frontier_peak.max(found);
            stats.level_sizes.push(found);
        }
        stats
    }

    /// Sizes of every labeled component in the space, in order of their
    /// smallest state, with the BFS depth reached from that state.
    pub fn component_census(&mut self) -> Vec<(u64, u64, u32)> {
        let words = self.visited.len();
        let seen: Vec<AtomicU64> = (0..words).map(|_| AtomicU64::new(0)).collect();
        let total = self.num_states();
        let mut out = Vec::new();
        let mut w = 0usize;
        loop {
            while w < words && seen[w].load(Ordering::Relaxed) == u64::MAX {
                w += 1;
            }
            if w == words {
                break;
            }
            let start = w as u64 * 64 + (!seen[w].load(Ordering::Relaxed)).trailing_zeros() as u64;
            if start >= total {
                break;
            }
            let stats = self.bfs(start);
            seen.par_iter().zip(self.visited.par_iter()).for_each(|(s, v)| {
                s.fetch_or(v.load(Ordering::Relaxed), Ordering::Relaxed);
            });
            out.push((start, stats.visited, stats.max_depth));
        }
        out
    }

    pub fn is_visited(&self, state: u64) -> bool {
        Self::get(&self.visited, state)
    }

    fn expand(&self) {
        let f = self.fact;
        let n = self.n as usize;
        let shift = &self.shift[..];
        (0..self.masks.len()).into_par_iter().for_each_init(Vec::new, |ps: &mut Vec<u32>, r| {
            let lo = r as u64 * f;
            let hi = lo + f;
            ps.clear();
            let mut w = lo / 64;
            while w * 64 < hi {
                let mut bits = self.frontier[w as usize].load(Ordering::Relaxed);
                let base = w * 64;
                if base < lo {
                    bits &= u64::MAX << (lo - base);
                }
                if base + 64 > hi {
                    bits &= u64::MAX >> (base + 64 - hi);
                }
                while bits != 0 {
                    ps.push((base + bits.trailing_zeros() as u64 - lo) as u32);
                    bits &= bits - 1;
                }
                w += 1;
            }
            if ps.is_empty() {
                return;
            }
            for e in &self.edges[self.offsets[r] as usize..self.offsets[r + 1] as usize] {
                let row = &shift[(e.i as usize * n + e.j as usize) * f as usize..][..f as usize];
                let block = e.target as u64 * f;
                for &p in ps.iter() {
                    Self::set(&self.next, block + row[p as usize] as u64);
                }
            }
        });
    }
}
