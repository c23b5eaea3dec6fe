//! Labeled and unlabeled configurations, their packed keys, lifts,
//! restrictions and canonical forms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cube::{check_dim, map_mask, symmetry_tables, CubeSymmetry, FaceSpec, Vertex, MAX_DIM};
use crate::error::{Error, Result};

const MAX_VERTS: usize = 1 << MAX_DIM;

/// The parameters of a puzzle graph: cube dimension `d`, move dimension `k`
/// and number of empty vertices `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rules {
    pub d: u32,
    pub k: u32,
    pub l: u32,
}

impl Rules {
    pub fn new(d: u32, k: u32, l: u32) -> Result<Self> {
        let bad = |reason| Err(Error::Rules { d, k, l, reason });
        if check_dim(d).is_err() {
            return bad("d must be in 1..=6");
        }
        if !(1..=d).contains(&k) {
            return bad("k must be in 1..=d");
        }
        if !(1..=1 << d).contains(&l) {
            return bad("l must be in 1..=2^d");
        }
        Ok(Rules { d, k, l })
    }

    pub fn vertices(&self) -> u32 {
        1 << self.d
    }

    /// Number of tokens, `2^d - l`.
    pub fn tokens(&self) -> u32 {
        self.vertices() - self.l
    }
}

impl fmt::Display for Rules {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.d, self.k, self.l)
    }
}

/// Distinct labeled tokens on the vertices of `Q^d`. Label 0 marks an empty
/// vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledConfig {
    dim: u8,
    cells: [u8; MAX_VERTS],
}

impl LabeledConfig {
    pub fn empty(d: u32) -> Result<Self> {
        check_dim(d)?;
        Ok(LabeledConfig { dim: d as u8, cells: [0; MAX_VERTS] })
    }

    /// Build from `(vertex, label)` pairs. Labels must be distinct and
    /// nonzero.
    pub fn new(d: u32, tokens: &[(Vertex, u8)]) -> Result<Self> {
        let mut cfg = LabeledConfig::empty(d)?;
        let mut seen = [false; 256];
        for &(v, label) in tokens {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
            }
            if label == 0 {
                return Err(Error::Config("label 0 is reserved for empty vertices".into()));
            }
            if seen[label as usize] {
                return Err(Error::Config(format!("label {label} used twice")));
            }
            if cfg.cells[v.bits() as usize] != 0 {
                return Err(Error::Config(format!("vertex {v} occupied twice")));
            }
            seen[label as usize] = true;
            cfg.cells[v.bits() as usize] = label;
        }
        Ok(cfg)
    }

    /// Build from a per-vertex label array (0 = empty).
    pub fn from_cells(d: u32, cells: &[u8]) -> Result<Self> {
        check_dim(d)?;
        if cells.len() != 1 << d {
            return Err(Error::Config(format!("expected {} cells, got {}", 1 << d, cells.len())));
        }
        let tokens: Vec<(Vertex, u8)> = cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(v, &c)| (Vertex::raw(d, v as u32), c))
            .collect();
        LabeledConfig::new(d, &tokens)
    }

    /// Tokens `1..=n` placed on the occupied vertices of `mask` in ascending
    /// vertex order.
    pub fn from_mask(d: u32, mask: u64) -> Result<Self> {
        check_dim(d)?;
        if d < 6 && mask >> (1u32 << d) != 0 {
            return Err(Error::Config("mask wider than the cube".into()));
        }
        let mut cfg = LabeledConfig { dim: d as u8, cells: [0; MAX_VERTS] };
        let mut label = 1u8;
        for v in 0..1usize << d {
            if mask >> v & 1 == 1 {
                cfg.cells[v] = label;
                label += 1;
            }
        }
        Ok(cfg)
    }

    pub(crate) fn from_cells_unchecked(d: u32, cells: [u8; MAX_VERTS]) -> Self {
        LabeledConfig { dim: d as u8, cells }
    }

    pub fn dim(&self) -> u32 {
        self.dim as u32
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells[..1 << self.dim]
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u8; MAX_VERTS] {
        &mut self.cells
    }

    pub fn label_at(&self, v: Vertex) -> Option<u8> {
        match self.cells[v.bits() as usize] {
            0 => None,
            c => Some(c),
        }
    }

    pub fn position_of(&self, label: u8) -> Option<Vertex> {
        self.cells()
            .iter()
            .position(|&c| c == label && label != 0)
            .map(|v| Vertex::raw(self.dim(), v as u32))
    }

    pub fn occupancy(&self) -> u64 {
        self.cells().iter().enumerate().fold(0u64, |m, (v, &c)| if c != 0 { m | 1 << v } else { m })
    }

    pub fn num_tokens(&self) -> u32 {
        self.cells().iter().filter(|&&c| c != 0).count() as u32
    }

    pub fn num_empty(&self) -> u32 {
        (1 << self.dim) - self.num_tokens()
    }

    /// Labels in ascending order.
    pub fn labels(&self) -> Vec<u8> {
        let mut labels: Vec<u8> = self.cells().iter().copied().filter(|&c| c != 0).collect();
        labels.sort_unstable();
        labels
    }

    pub fn max_label(&self) -> u8 {
        self.cells().iter().copied().max().unwrap_or(0)
    }

    /// True when the labels are exactly `1..=n`.
    pub fn is_standard(&self) -> bool {
        self.labels().iter().enumerate().all(|(i, &l)| l as usize == i + 1)
    }

    pub fn tokens(&self) -> impl Iterator<Item = (Vertex, u8)> + '_ {
        let d = self.dim();
        self.cells()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(v, &c)| (Vertex::raw(d, v as u32), c))
    }

    pub fn forget_labels(&self) -> UnlabeledConfig {
        UnlabeledConfig { dim: self.dim, mask: self.occupancy() }
    }

    /// Coordinate-sum parity of the occupied vertices.
    pub fn phi(&self) -> u32 {
        self.forget_labels().phi()
    }

    pub fn apply_symmetry(&self, g: &CubeSymmetry) -> LabeledConfig {
        assert_eq!(g.dim(), self.dim());
        self.map_vertices(&g.vertex_table())
    }

    pub(crate) fn map_vertices(&self, table: &[u8]) -> LabeledConfig {
        let mut cells = [0u8; MAX_VERTS];
        for (v, &c) in self.cells().iter().enumerate() {
            cells[table[v] as usize] = c;
        }
        LabeledConfig { dim: self.dim, cells }
    }

    /// Relabel tokens `1, 2, ...` in ascending vertex order.
    pub fn relabel_first_visit(&self) -> LabeledConfig {
        let mut out = *self;
        let mut next = 1u8;
        for c in out.cells.iter_mut().take(1 << self.dim) {
            if *c != 0 {
                *c = next;
                next += 1;
            }
        }
        out
    }

    /// Apply a relabeling `label -> map[label]`.
    pub fn relabel(&self, map: &[u8]) -> LabeledConfig {
        let mut out = *self;
        for c in out.cells.iter_mut().take(1 << self.dim) {
            if *c != 0 {
                *c = map[*c as usize];
            }
        }
        out
    }

    pub fn key(&self) -> PackedKey {
        KeyCodec::for_config(self).encode(self)
    }

    /// Embed into `Q^{d+1}` as the facet where coordinate `axis` equals
    /// `side`, and put a new token (label `max + 1`) on `extra`, which must
    /// lie on the opposite facet.
    pub fn lift(&self, axis: u32, side: u32, extra: Vertex) -> Result<LabeledConfig> {
        let d = self.dim();
        if d + 1 > MAX_DIM {
            return Err(Error::Lift(format!("lifting d={d} exceeds the maximum dimension")));
        }
        if axis > d || side > 1 {
            return Err(Error::Lift(format!("axis {axis} / side {side} out of range")));
        }
        if extra.dim() != d + 1 {
            return Err(Error::DimensionMismatch { expected: d + 1, found: extra.dim() });
        }
        if extra.coord(axis) == side {
            return Err(Error::Lift(format!("{extra} lies on the embedded facet")));
        }
        let mut cells = [0u8; MAX_VERTS];
        for (v, &c) in self.cells().iter().enumerate() {
            cells[embed_bits(v as u32, axis, side) as usize] = c;
        }
        cells[extra.bits() as usize] = self.max_label() + 1;
        Ok(LabeledConfig { dim: (d + 1) as u8, cells })
    }

    /// The configuration induced on a face of dimension at least 1, in the
    /// face's own coordinates (star positions in ascending order). Labels are
    /// kept as they are.
    pub fn restrict(&self, face: FaceSpec) -> Result<LabeledConfig> {
        if face.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: face.dim() });
        }
        let r = face.rank();
        if r == 0 {
            return Err(Error::FaceDimension { k: 0, d: self.dim() });
        }
        let mut cells = [0u8; MAX_VERTS];
        for w in face.vertices() {
            cells[extract_bits(w.bits(), face.stars()) as usize] = self.cells[w.bits() as usize];
        }
        Ok(LabeledConfig { dim: r as u8, cells })
    }
}

/// Insert bit `side` at position `axis`.
pub(crate) fn embed_bits(bits: u32, axis: u32, side: u32) -> u32 {
    let low = bits & ((1 << axis) - 1);
    let high = bits >> axis;
    low | side << axis | high << (axis + 1)
}

/// Gather the bits of `bits` selected by `stars` into the low positions.
pub(crate) fn extract_bits(bits: u32, stars: u32) -> u32 {
    let mut out = 0;
    let mut i = 0;
    for j in 0..MAX_DIM {
        if stars >> j & 1 == 1 {
            out |= (bits >> j & 1) << i;
            i += 1;
        }
    }
    out
}

impl fmt::Debug for LabeledConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tokens().map(|(v, c)| format!("{c}@{v}")).collect();
        write!(f, "LabeledConfig(d={}; {})", self.dim, parts.join(", "))
    }
}

/// `q_{d,l}(n) = l + sum_{i<n} 2^{d+i} - n`: empty vertices after `n` lifts.
pub fn q(d: u32, l: u64, n: u32) -> u64 {
    let grown: u64 = (0..n).map(|i| 1u64 << (d + i)).sum();
    l + grown - n as u64
}

/// Occupancy of `Q^d` without labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnlabeledConfig {
    dim: u8,
    mask: u64,
}

impl UnlabeledConfig {
    pub fn new(d: u32, mask: u64) -> Result<Self> {
        check_dim(d)?;
        if d < 6 && mask >> (1u32 << d) != 0 {
            return Err(Error::Config("mask wider than the cube".into()));
        }
        Ok(UnlabeledConfig { dim: d as u8, mask })
    }

    pub fn dim(&self) -> u32 {
        self.dim as u32
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn num_tokens(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        (0..1u32 << self.dim)
            .filter(|&v| self.mask >> v & 1 == 1)
            .map(|v| Vertex::raw(self.dim(), v))
            .collect()
    }

    pub fn phi(&self) -> u32 {
        mask_phi(self.mask)
    }

    pub fn restrict(&self, face: FaceSpec) -> Result<UnlabeledConfig> {
        let labeled = LabeledConfig::from_mask(self.dim(), self.mask)?.restrict(face)?;
        Ok(labeled.forget_labels())
    }

    /// Lexicographically smallest mask in the orbit under cube symmetries.
    pub fn canonical(&self) -> UnlabeledConfig {
        UnlabeledConfig { dim: self.dim, mask: canonical_mask(self.dim(), self.mask) }
    }
}

pub(crate) fn mask_phi(mask: u64) -> u32 {
    let mut m = mask;
    let mut sum = 0;
    while m != 0 {
        sum += m.trailing_zeros().count_ones();
        m &= m - 1;
    }
    sum & 1
}

pub(crate) fn canonical_mask(d: u32, mask: u64) -> u64 {
    symmetry_tables(d).iter().map(|t| map_mask(t, mask)).min().expect("group is nonempty")
}

/// Fixed-width key: one slot of `width` bits per vertex holding its label,
/// 0 for empty. Slots are packed little-endian, vertex 0 first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PackedKey(pub [u64; 6]);

/// Encoder/decoder for [`PackedKey`]s of a given dimension and slot width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyCodec {
    pub d: u32,
    pub width: u32,
}

impl KeyCodec {
    /// Slot width `ceil(log2(n + 1))` for `n` tokens.
    pub fn new(d: u32, n: u32) -> Self {
        let width = (32 - n.leading_zeros()).max(1);
        KeyCodec { d, width }
    }

    pub fn for_config(cfg: &LabeledConfig) -> Self {
        KeyCodec::new(cfg.dim(), cfg.max_label() as u32)
    }

    pub fn encode(&self, cfg: &LabeledConfig) -> PackedKey {
        let mut words = [0u64; 6];
        for (v, &c) in cfg.cells().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let bit = v as u32 * self.width;
            let (w, off) = ((bit / 64) as usize, bit % 64);
            words[w] |= (c as u64) << off;
            if off + self.width > 64 {
                words[w + 1] |= (c as u64) >> (64 - off);
            }
        }
        PackedKey(words)
    }

    pub fn decode(&self, key: &PackedKey) -> LabeledConfig {
        let mut cells = [0u8; MAX_VERTS];
        let slot_mask = (1u64 << self.width) - 1;
        for (v, cell) in cells.iter_mut().enumerate().take(1 << self.d) {
            let bit = v as u32 * self.width;
            let (w, off) = ((bit / 64) as usize, bit % 64);
            let mut val = key.0[w] >> off;
            if off + self.width > 64 {
                val |= key.0[w + 1] << (64 - off);
            }
            *cell = (val & slot_mask) as u8;
        }
        LabeledConfig::from_cells_unchecked(self.d, cells)
    }
}

/// Which group acts when computing a canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalMode {
    CubeSymmetry,
    CubeSymmetryRelabel,
}

/// Smallest key over the orbit of `cfg`. With relabeling, each image is
/// relabeled in first-visit order before encoding.
pub fn canonical_form(cfg: &LabeledConfig, mode: CanonicalMode) -> PackedKey {
    let codec = KeyCodec::for_config(cfg);
    symmetry_tables(cfg.dim())
        .iter()
        .map(|t| {
            let img = cfg.map_vertices(t);
            match mode {
                CanonicalMode::CubeSymmetry => codec.encode(&img),
                CanonicalMode::CubeSymmetryRelabel => codec.encode(&img.relabel_first_visit()),
            }
        })
        .min()
        .expect("group is nonempty")
}

/// JSON form shared with the service and the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub d: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<BTreeMap<String, u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
}

impl ConfigDoc {
    pub fn labeled(cfg: &LabeledConfig, k: Option<u32>) -> Self {
        ConfigDoc {
            d: cfg.dim(),
            k,
            tokens: Some(cfg.tokens().map(|(v, c)| (v.to_string(), c)).collect()),
            vertices: None,
        }
    }

    pub fn unlabeled(cfg: &UnlabeledConfig, k: Option<u32>) -> Self {
        ConfigDoc {
            d: cfg.dim(),
            k,
            tokens: None,
            vertices: Some(cfg.vertices().iter().map(|v| v.to_string()).collect()),
        }
    }

    fn parse_vertex(&self, s: &str) -> Result<Vertex> {
        let v: Vertex = s.parse()?;
        if v.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: v.dim() });
        }
        Ok(v)
    }

    pub fn to_labeled(&self) -> Result<LabeledConfig> {
        let tokens = self
            .tokens
            .as_ref()
            .ok_or_else(|| Error::Config("expected a \"tokens\" object".into()))?;
        let pairs = tokens
            .iter()
            .map(|(s, &c)| Ok((self.parse_vertex(s)?, c)))
            .collect::<Result<Vec<_>>>()?;
        LabeledConfig::new(self.d, &pairs)
    }

    pub fn to_unlabeled(&self) -> Result<UnlabeledConfig> {
        if let Some(vertices) = &self.vertices {
            let mut mask = 0u64;
            for s in vertices {
                let v = self.parse_vertex(s)?;
                if mask >> v.bits() & 1 == 1 {
                    return Err(Error::Config(format!("vertex {v} listed twice")));
                }
                mask |= 1 << v.bits();
            }
            UnlabeledConfig::new(self.d, mask)
        } else {
            Ok(self.to_labeled()?.forget_labels())
        }
    }
}

impl LabeledConfig {
    pub fn to_json(&self, k: Option<u32>) -> serde_json::Value {
        serde_json::to_value(ConfigDoc::labeled(self, k)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<(LabeledConfig, Option<u32>)> {
        let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok((doc.to_labeled()?, doc.k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn cfg(d: u32, tokens: &[(&str, u8)]) -> LabeledConfig {
        let pairs: Vec<(Vertex, u8)> = tokens.iter().map(|(s, c)| (s.parse().unwrap(), *c)).collect();
        LabeledConfig::new(d, &pairs).unwrap()
    }

    fn sample_initial() -> LabeledConfig {
        cfg(3, &[("001", 1), ("000", 2), ("100", 3), ("010", 4)])
    }

    #[test]
    fn rules_validation() {
        assert!(Rules::new(3, 2, 4).is_ok());
        assert!(Rules::new(3, 4, 4).is_err());
        assert!(Rules::new(3, 0, 4).is_err());
        assert!(Rules::new(3, 2, 0).is_err());
        assert!(Rules::new(3, 2, 9).is_err());
        assert!(Rules::new(7, 2, 9).is_err());
        assert_eq!(Rules::new(4, 3, 11).unwrap().tokens(), 5);
    }

    #[test]
    fn forget_labels_examples() {
        let u = sample_initial().forget_labels();
        let names: Vec<String> = u.vertices().iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["000", "100", "010", "001"]);
        assert_eq!(LabeledConfig::empty(3).unwrap().forget_labels().mask(), 0);
        assert_eq!(sample_initial().occupancy().count_ones(), sample_initial().num_tokens());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(sample_initial().phi(), 1);
        assert_eq!(LabeledConfig::empty(3).unwrap().phi(), 0);
        assert_eq!(cfg(3, &[("110", 1)]).phi(), 0);
    }

    #[test]
    fn q_examples() {
        assert_eq!(q(3, 4, 1), 11);
        assert_eq!(q(5, 7, 0), 7);
        assert_eq!(q(3, 4, 2), 26);
    }

    #[test]
    fn lift_example() {
        // C[3,4] -> C[4,11] with token 5 on the opposite facet
        let base = cfg(3, &[("000", 1), ("010", 4), ("100", 3), ("001", 2)]);
        let lifted = base.lift(3, 0, "1101".parse().unwrap()).unwrap();
        assert_eq!(lifted.dim(), 4);
        assert_eq!(lifted.num_empty() as u64, q(3, 4, 1));
        assert_eq!(lifted.label_at("1101".parse().unwrap()), Some(5));
        let face: FaceSpec = "***0".parse().unwrap();
        assert_eq!(lifted.restrict(face).unwrap(), base);
        assert!(base.lift(3, 0, "1100".parse().unwrap()).is_err());
        let six = LabeledConfig::from_mask(6, 1).unwrap();
        assert!(six.lift(0, 0, Vertex::new(6, 1).unwrap()).is_err());
    }

    #[test]
    fn restrict_examples() {
        // a 2-mobile cube configuration splits into a 1-mobile square and a
        // 2-mobile square
        let c = cfg(3, &[("010", 3), ("000", 1), ("100", 2), ("001", 4)]);
        let low = c.restrict("**0".parse().unwrap()).unwrap();
        let high = c.restrict("**1".parse().unwrap()).unwrap();
        assert_eq!(low, cfg(2, &[("00", 1), ("10", 2), ("01", 3)]));
        assert_eq!(high, cfg(2, &[("00", 4)]));
        assert_eq!(c.restrict("***".parse().unwrap()).unwrap(), c);
        let e = LabeledConfig::empty(3).unwrap();
        assert_eq!(e.restrict("*1*".parse().unwrap()).unwrap(), LabeledConfig::empty(2).unwrap());
        assert!(c.restrict("010".parse().unwrap()).is_err());
    }

    #[test]
    fn json_forms() {
        let text = r#"{"d":3, "k":2, "tokens": {"001":1, "000":2, "100":3, "010":4}}"#;
        let (c, k) = LabeledConfig::from_json(text).unwrap();
        assert_eq!(c, sample_initial());
        assert_eq!(k, Some(2));
        let back: ConfigDoc = serde_json::from_value(c.to_json(Some(2))).unwrap();
        assert_eq!(back.to_labeled().unwrap(), c);
        let u: ConfigDoc = serde_json::from_str(r#"{"d":3,"vertices":["000","001"]}"#).unwrap();
        assert_eq!(u.to_unlabeled().unwrap().mask(), 0b1_0001);
        assert!(LabeledConfig::from_json(r#"{"d":3,"tokens":{"0011":1}}"#).is_err());
        assert!(LabeledConfig::from_json(r#"{"d":3,"tokens":{"001":1,"000":1}}"#).is_err());
    }

    #[test]
    fn canonical_form_idempotent() {
        for mode in [CanonicalMode::CubeSymmetry, CanonicalMode::CubeSymmetryRelabel] {
            let c = sample_initial();
            let key = canonical_form(&c, mode);
            let codec = KeyCodec::for_config(&c);
            assert_eq!(canonical_form(&codec.decode(&key), mode), key);
        }
    }

    /// Brute-force orbit under cube symmetries and every relabeling.
    fn full_orbit(c: &LabeledConfig) -> std::collections::HashSet<LabeledConfig> {
        let n = c.num_tokens() as usize;
        let mut perms = vec![Vec::new()];
        for _ in 0..n {
            perms = perms
                .into_iter()
                .flat_map(|p: Vec<u8>| {
                    (1..=n as u8)
                        .filter(|x| !p.contains(x))
                        .map(|x| {
                            let mut q = p.clone();
                            q.push(x);
                            q
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        let mut out = std::collections::HashSet::new();
        for g in CubeSymmetry::all(c.dim()) {
            let img = c.apply_symmetry(&g);
            for p in &perms {
                let mut map = vec![0u8; n + 1];
                for (i, &x) in p.iter().enumerate() {
                    map[i + 1] = x;
                }
                out.insert(img.relabel(&map));
            }
        }
        out
    }

    #[test]
    fn orbit_sizes_divide_group_order() {
        let fact = |n: usize| (1..=n).product::<usize>();
        for mask in [0b1011u64, 0b0001_0111, 0b1000_0001, 0b0110_1001] {
            let c = LabeledConfig::from_mask(3, mask).unwrap();
            let orbit = full_orbit(&c);
            let order = 8 * 6 * fact(c.num_tokens() as usize);
            assert_eq!(order % orbit.len(), 0, "mask {mask:#b}");
            let key = canonical_form(&c, CanonicalMode::CubeSymmetryRelabel);
            for o in &orbit {
                assert_eq!(canonical_form(o, CanonicalMode::CubeSymmetryRelabel), key);
            }
        }
    }

    #[test]
    fn canonical_separates_orbits() {
        // same occupancy class, different cube orbits
        let a = LabeledConfig::from_mask(3, 0b0000_1111).unwrap();
        let b = LabeledConfig::from_mask(3, 0b0001_0111).unwrap();
        assert_ne!(
            canonical_form(&a, CanonicalMode::CubeSymmetryRelabel),
            canonical_form(&b, CanonicalMode::CubeSymmetryRelabel)
        );
    }

    fn arb_config() -> impl Strategy<Value = LabeledConfig> {
        (1u32..=5).prop_flat_map(|d| {
            let verts = 1usize << d;
            (Just(d), proptest::collection::vec(any::<bool>(), verts), any::<u64>())
        })
        .prop_map(|(d, occ, seed)| {
            let mut labels: Vec<u8> = (1..=occ.iter().filter(|&&b| b).count() as u8).collect();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..labels.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                labels.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut it = labels.into_iter();
            let cells: Vec<u8> = occ.iter().map(|&b| if b { it.next().unwrap() } else { 0 }).collect();
            LabeledConfig::from_cells(d, &cells).unwrap()
        })
    }

    proptest! {
        #[test]
        fn packed_key_round_trip(c in arb_config()) {
            let codec = KeyCodec::for_config(&c);
            prop_assert_eq!(codec.decode(&codec.encode(&c)), c);
        }

        #[test]
        fn symmetry_preserves_occupancy_count(c in arb_config(), idx in 0usize..1000) {
            let all = CubeSymmetry::all(c.dim());
            let g = &all[idx % all.len()];
            let img = c.apply_symmetry(g);
            prop_assert_eq!(img.num_tokens(), c.num_tokens());
            prop_assert_eq!(img.apply_symmetry(&g.inverse()), c);
        }
    }

    #[test]
    fn packed_key_wide_slots() {
        // d=6 with 63 tokens needs 6-bit slots straddling words
        let full = LabeledConfig::from_mask(6, u64::MAX >> 1).unwrap();
        let codec = KeyCodec::for_config(&full);
        assert_eq!(codec.width, 6);
        assert_eq!(codec.decode(&codec.encode(&full)), full);
    }
}
