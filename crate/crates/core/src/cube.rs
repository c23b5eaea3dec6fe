//! Geometry of `Q^d`: vertices, faces in star-vector notation and the
//! hyperoctahedral symmetry group.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported cube dimension.
pub const MAX_DIM: u32 = 6;

pub(crate) fn check_dim(d: u32) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::Dimension(d))
    }
}

/// A vertex of `Q^d`. Bit `j` of `bits` holds coordinate `x_{j+1}`; the
/// textual form lists `x1 x2 ... xd` left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    dim: u8,
    bits: u8,
}

impl Vertex {
    pub fn new(d: u32, bits: u32) -> Result<Self> {
        check_dim(d)?;
        if bits >= 1 << d {
            return Err(Error::Parse(format!("vertex {bits} out of range for d={d}")));
        }
        Ok(Vertex { dim: d as u8, bits: bits as u8 })
    }

    pub(crate) fn raw(d: u32, bits: u32) -> Self {
        debug_assert!(bits < 1 << d);
        Vertex { dim: d as u8, bits: bits as u8 }
    }

    pub fn dim(self) -> u32 {
        self.dim as u32
    }

    pub fn bits(self) -> u32 {
        self.bits as u32
    }

    pub fn coord(self, j: u32) -> u32 {
        (self.bits as u32 >> j) & 1
    }

    pub fn hamming(self, other: Vertex) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    /// Every k-face containing this vertex, ordered lexicographically by the
    /// set of star positions.
    pub fn faces_through(self, k: u32) -> Result<Vec<FaceSpec>> {
        let d = self.dim();
        if k > d {
            return Err(Error::FaceDimension { k, d });
        }
        Ok(star_sets(d, k)
            .into_iter()
            .map(|stars| FaceSpec { dim: self.dim, stars, fixed: self.bits & !stars })
            .collect())
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.dim {
            f.write_str(if (self.bits >> j) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = s.len() as u32;
        check_dim(d).map_err(|_| Error::Parse(format!("bad vertex {s:?}")))?;
        let mut bits = 0u32;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << j,
                _ => return Err(Error::Parse(format!("bad vertex {s:?}"))),
            }
        }
        Ok(Vertex::raw(d, bits))
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All k-subsets of `0..d` as bit masks, in lexicographic order of the
/// sorted position lists.
pub(crate) fn star_sets(d: u32, k: u32) -> Vec<u8> {
    fn rec(start: u32, d: u32, left: u32, acc: u8, out: &mut Vec<u8>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for p in start..=d - left {
            rec(p + 1, d, left - 1, acc | (1 << p), out);
        }
    }
    let mut out = Vec::new();
    if k <= d {
        rec(0, d, k, 0, &mut out);
    }
    out
}

/// A face of `Q^d` written as a vector over `{0, 1, *}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaceSpec {
    dim: u8,
    stars: u8,
    fixed: u8,
}

impl FaceSpec {
    pub fn new(d: u32, stars: u32, fixed: u32) -> Result<Self> {
        check_dim(d)?;
        let full = (1u32 << d) - 1;
        if stars & !full != 0 || fixed & !full != 0 || stars & fixed != 0 {
            return Err(Error::Parse(format!("bad face stars={stars:#b} fixed={fixed:#b}")));
        }
        Ok(FaceSpec { dim: d as u8, stars: stars as u8, fixed: fixed as u8 })
    }

    pub fn dim(self) -> u32 {
        self.dim as u32
    }

    /// Face dimension: the number of star entries.
    pub fn rank(self) -> u32 {
        self.stars.count_ones()
    }

    pub fn stars(self) -> u32 {
        self.stars as u32
    }

    pub fn fixed(self) -> u32 {
        self.fixed as u32
    }

    pub fn contains(self, v: Vertex) -> bool {
        v.dim == self.dim && v.bits & !self.stars == self.fixed
    }

    /// The `2^r` vertices of the face in ascending order.
    pub fn vertices(self) -> Vec<Vertex> {
        let d = self.dim();
        let mut out: Vec<Vertex> = subsets(self.stars as u32)
            .map(|s| Vertex::raw(d, s | self.fixed as u32))
            .collect();
        out.sort();
        out
    }

    /// Bit mask over the `2^d` vertices of the cube.
    pub fn vertex_mask(self) -> u64 {
        subsets(self.stars as u32).fold(0u64, |m, s| m | 1u64 << (s | self.fixed as u32))
    }

    /// The facet parallel to this one. Only defined for facets, i.e. faces
    /// with exactly one fixed coordinate.
    pub fn parallel(self) -> Result<FaceSpec> {
        let full = ((1u32 << self.dim) - 1) as u8;
        let fixed_positions = full & !self.stars;
        if fixed_positions.count_ones() != 1 {
            return Err(Error::NotAFacet(self.to_string()));
        }
        Ok(FaceSpec { fixed: self.fixed ^ fixed_positions, ..self })
    }
}

/// All submasks of `mask`, including zero.
pub(crate) fn subsets(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask { None } else { Some(((cur | !mask).wrapping_add(1)) & mask) };
        Some(cur)
    })
}

impl fmt::Display for FaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.dim {
            let c = if (self.stars >> j) & 1 == 1 {
                "*"
            } else if (self.fixed >> j) & 1 == 1 {
                "1"
            } else {
                "0"
            };
            f.write_str(c)?;
        }
        Ok(())
    }
}

impl FromStr for FaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = s.len() as u32;
        check_dim(d).map_err(|_| Error::Parse(format!("bad face {s:?}")))?;
        let (mut stars, mut fixed) = (0u32, 0u32);
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => fixed |= 1 << j,
                '*' | '⋆' => stars |= 1 << j,
                _ => return Err(Error::Parse(format!("bad face {s:?}"))),
            }
        }
        FaceSpec::new(d, stars, fixed)
    }
}

impl Serialize for FaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FaceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An element of the symmetry group of `Q^d`: a permutation of the
/// coordinate axes followed by reflections.
///
/// Coordinate `j` of the image of `v` is coordinate `perm[j]` of `v`, XOR bit
/// `j` of `flips`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeSymmetry {
    dim: u8,
    perm: [u8; MAX_DIM as usize],
    flips: u8,
}

impl CubeSymmetry {
    pub fn identity(d: u32) -> Self {
        let mut perm = [0u8; MAX_DIM as usize];
        for (j, p) in perm.iter_mut().enumerate() {
            *p = j as u8;
        }
        CubeSymmetry { dim: d as u8, perm, flips: 0 }
    }

    pub fn new(perm: &[u32], flips: u32) -> Result<Self> {
        let d = perm.len() as u32;
        check_dim(d)?;
        let mut seen = 0u32;
        let mut arr = [0u8; MAX_DIM as usize];
        for (j, &p) in perm.iter().enumerate() {
            if p >= d || seen & (1 << p) != 0 {
                return Err(Error::Parse(format!("{perm:?} is not a permutation")));
            }
            seen |= 1 << p;
            arr[j] = p as u8;
        }
        for (j, a) in arr.iter_mut().enumerate().skip(d as usize) {
            *a = j as u8;
        }
        if flips >= 1 << d {
            return Err(Error::Parse(format!("flip mask {flips:#b} too wide")));
        }
        Ok(CubeSymmetry { dim: d as u8, perm: arr, flips: flips as u8 })
    }

    pub fn dim(&self) -> u32 {
        self.dim as u32
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        debug_assert_eq!(v.dim, self.dim);
        Vertex { dim: self.dim, bits: self.apply_bits(v.bits) }
    }

    pub(crate) fn apply_bits(&self, bits: u8) -> u8 {
        let mut out = 0u8;
        for j in 0..self.dim {
            out |= ((bits >> self.perm[j as usize]) & 1) << j;
        }
        out ^ self.flips
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &CubeSymmetry) -> CubeSymmetry {
        let mut perm = CubeSymmetry::identity(self.dim()).perm;
        let mut flips = 0u8;
        for j in 0..self.dim as usize {
            let pj = other.perm[j] as usize;
            perm[j] = self.perm[pj];
            flips |= (((self.flips >> pj) & 1) ^ ((other.flips >> j) & 1)) << j;
        }
        CubeSymmetry { dim: self.dim, perm, flips }
    }

    pub fn inverse(&self) -> CubeSymmetry {
        let mut perm = CubeSymmetry::identity(self.dim()).perm;
        let mut flips = 0u8;
        for j in 0..self.dim as usize {
            let p = self.perm[j] as usize;
            perm[p] = j as u8;
            flips |= ((self.flips >> j) & 1) << p;
        }
        CubeSymmetry { dim: self.dim, perm, flips }
    }

    /// All `2^d * d!` symmetries.
    pub fn all(d: u32) -> Vec<CubeSymmetry> {
        let mut out = Vec::new();
        let mut axes: Vec<u32> = (0..d).collect();
        permutations(&mut axes, 0, &mut |p| {
            for flips in 0..1u32 << d {
                out.push(CubeSymmetry::new(p, flips).expect("valid permutation"));
            }
        });
        out
    }

    /// Image of each vertex index under this symmetry.
    pub fn vertex_table(&self) -> Vec<u8> {
        (0..1u32 << self.dim).map(|v| self.apply_bits(v as u8)).collect()
    }
}

fn permutations(items: &mut Vec<u32>, start: usize, f: &mut impl FnMut(&[u32])) {
    if start == items.len() {
        f(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, f);
        items.swap(start, i);
    }
}

/// Vertex tables of the whole symmetry group, one per dimension, built once.
pub(crate) fn symmetry_tables(d: u32) -> &'static [Vec<u8>] {
    static TABLES: [OnceLock<Vec<Vec<u8>>>; MAX_DIM as usize] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    TABLES[d as usize - 1].get_or_init(|| CubeSymmetry::all(d).iter().map(|g| g.vertex_table()).collect())
}

/// Apply a vertex table to an occupancy mask.
pub(crate) fn map_mask(table: &[u8], mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        out |= 1u64 << table[v];
    }
    out
}
