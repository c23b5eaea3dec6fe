//! Move generation under the k-face rule and the adjacent-only variant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{LabeledConfig, Rules};
use crate::cube::{star_sets, FaceSpec, Vertex};
use crate::error::{Error, Result};

/// Token `label` slides from `from` to `to` inside the free face `face`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub label: u8,
    pub from: Vertex,
    pub to: Vertex,
    pub face: FaceSpec,
}

impl Move {
    pub fn reverse(&self) -> Move {
        Move { label: self.label, from: self.to, to: self.from, face: self.face }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{} [{}]", self.label, self.from, self.to, self.face)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FaceEntry {
    pub face: FaceSpec,
    /// Vertices of the face other than the base vertex.
    pub others: u64,
}

/// Precomputed face tables for one `(d, k)`.
#[derive(Clone, Debug)]
pub struct MoveEngine {
    d: u32,
    k: u32,
    /// `faces[v]`: the k-faces through `v`, lexicographic by star set.
    faces: Vec<Vec<FaceEntry>>,
}

impl MoveEngine {
    pub fn new(d: u32, k: u32) -> Result<Self> {
        crate::cube::check_dim(d)?;
        if k == 0 || k > d {
            return Err(Error::FaceDimension { k, d });
        }
        let stars = star_sets(d, k);
        let faces = (0..1u32 << d)
            .map(|v| {
                stars
                    .iter()
                    .map(|&s| {
                        let face = FaceSpec::new(d, s as u32, v & !(s as u32)).expect("valid face");
                        FaceEntry { face, others: face.vertex_mask() & !(1u64 << v) }
                    })
                    .collect()
            })
            .collect();
        Ok(MoveEngine { d, k, faces })
    }

    pub fn for_rules(rules: &Rules) -> Result<Self> {
        MoveEngine::new(rules.d, rules.k)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Vertices a token on `v` can reach when the occupancy is `occ`.
    #[inline]
    pub fn reach(&self, v: usize, occ: u64) -> u64 {
        let mut out = 0;
        for f in &self.faces[v] {
            if f.others & occ == 0 {
                out |= f.others;
            }
        }
        out
    }

    fn check(&self, cfg: &LabeledConfig) -> Result<()> {
        if cfg.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: cfg.dim() });
        }
        Ok(())
    }

    pub fn is_free_k_state(&self, cfg: &LabeledConfig, v: Vertex, face: FaceSpec) -> Result<bool> {
        self.check(cfg)?;
        if cfg.label_at(v).is_none() {
            return Err(Error::Unoccupied(v.to_string()));
        }
        if face.dim() != self.d || face.rank() != self.k || !face.contains(v) {
            return Err(Error::Config(format!("{face} is not a {}-face through {v}", self.k)));
        }
        let others = face.vertex_mask() & !(1u64 << v.bits());
        Ok(others & cfg.occupancy() == 0)
    }

    /// All legal moves, one per `(token, target)` with the first free face,
    /// ordered by label and then target.
    pub fn legal_moves(&self, cfg: &LabeledConfig) -> Vec<Move> {
        self.moves_filtered(cfg, false)
    }

    /// Legal moves whose endpoints are adjacent.
    pub fn legal_moves_adjacent(&self, cfg: &LabeledConfig) -> Vec<Move> {
        self.moves_filtered(cfg, true)
    }

    fn moves_filtered(&self, cfg: &LabeledConfig, adjacent: bool) -> Vec<Move> {
        assert_eq!(cfg.dim(), self.d, "configuration dimension does not match the engine");
        let occ = cfg.occupancy();
        let mut tokens: Vec<(u8, usize)> =
            cfg.tokens().map(|(v, label)| (label, v.bits() as usize)).collect();
        tokens.sort_unstable();
        let mut out = Vec::new();
        for (label, v) in tokens {
            let mut seen = 0u64;
            let start = out.len();
            for f in &self.faces[v] {
                if f.others & occ != 0 {
                    continue;
                }
                let mut fresh = f.others & !seen;
                if adjacent {
                    fresh &= adjacent_mask(v, self.d);
                }
                seen |= fresh;
                while fresh != 0 {
                    let w = fresh.trailing_zeros();
                    fresh &= fresh - 1;
                    out.push(Move {
                        label,
                        from: Vertex::raw(self.d, v as u32),
                        to: Vertex::raw(self.d, w),
                        face: f.face,
                    });
                }
            }
            out[start..].sort_unstable_by_key(|m| m.to);
        }
        out
    }

    /// Apply a move after checking that it is legal.
    pub fn apply_move(&self, cfg: &LabeledConfig, m: &Move) -> Result<LabeledConfig> {
        self.check(cfg)?;
        let illegal = |why: &str| Err(Error::IllegalMove(format!("{m}: {why}")));
        if cfg.label_at(m.from) != Some(m.label) {
            return illegal("token is not on the source vertex");
        }
        if m.from == m.to {
            return illegal("source equals target");
        }
        if m.face.dim() != self.d || m.face.rank() != self.k {
            return illegal("wrong face dimension");
        }
        if !m.face.contains(m.from) || !m.face.contains(m.to) {
            return illegal("face does not contain both endpoints");
        }
        let others = m.face.vertex_mask() & !(1u64 << m.from.bits());
        if others & cfg.occupancy() != 0 {
            return illegal("face is not free");
        }
        Ok(self.apply_unchecked(cfg, m.from, m.to))
    }

    /// Move the token on `from` to `to` if some free k-face allows it.
    pub fn apply_to(&self, cfg: &LabeledConfig, from: Vertex, to: Vertex) -> Result<LabeledConfig> {
        self.check(cfg)?;
        let m = self
            .find_move(cfg, from, to)
            .ok_or_else(|| Error::IllegalMove(format!("{from}->{to}")))?;
        Ok(self.apply_unchecked(cfg, m.from, m.to))
    }

    /// The canonical move taking the token on `from` to `to`, if legal.
    pub fn find_move(&self, cfg: &LabeledConfig, from: Vertex, to: Vertex) -> Option<Move> {
        let label = cfg.label_at(from)?;
        if from.dim() != self.d || to.dim() != self.d {
            return None;
        }
        let occ = cfg.occupancy();
        self.faces[from.bits() as usize]
            .iter()
            .find(|f| f.others & occ == 0 && f.others >> to.bits() & 1 == 1)
            .map(|f| Move { label, from, to, face: f.face })
    }

    pub(crate) fn apply_unchecked(&self, cfg: &LabeledConfig, from: Vertex, to: Vertex) -> LabeledConfig {
        let mut out = *cfg;
        let cells = out.cells_mut();
        cells[to.bits() as usize] = cells[from.bits() as usize];
        cells[from.bits() as usize] = 0;
        out
    }

    /// Distinct occupancy masks one move away from `mask`, ascending.
    pub fn unlabeled_neighbors(&self, mask: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let mut r = self.reach(v, mask);
            while r != 0 {
                let w = r.trailing_zeros();
                r &= r - 1;
                out.push(mask ^ (1u64 << v) ^ (1u64 << w));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True when no token can move.
    pub fn is_stuck(&self, mask: u64) -> bool {
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.reach(v, mask) != 0 {
                return false;
            }
        }
        true
    }
}

fn adjacent_mask(v: usize, d: u32) -> u64 {
    (0..d).fold(0u64, |m, j| m | 1u64 << (v ^ (1 << j)))
}
