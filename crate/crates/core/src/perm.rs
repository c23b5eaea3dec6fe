//! Permutations of `0..n` and a deterministic Schreier-Sims group order.

/// A permutation of `0..n` stored as its image list: `p[i]` is the image
/// of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm(pub Vec<u8>);

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u8).collect())
    }

    pub fn from_images(images: Vec<u8>) -> Option<Perm> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x as usize >= images.len() || seen[x as usize] {
                return None;
            }
            seen[x as usize] = true;
        }
        Some(Perm(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Perm(inv)
    }

    /// 0 for even, 1 for odd.
    pub fn parity(&self) -> u32 {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut transpositions = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.apply(i);
                len += 1;
            }
            transpositions += len - 1;
        }
        (transpositions & 1) as u32
    }

    fn first_moved(&self) -> Option<usize> {
        self.0.iter().enumerate().position(|(i, &x)| i != x as usize)
    }
}

struct Level {
    point: usize,
    /// `trans[b]`: an element mapping `point` to `b`, if `b` is in the orbit.
    trans: Vec<Option<Perm>>,
    orbit: Vec<usize>,
    /// Schreier generators already verified, as `(orbit index, generator index)`.
    checked: Vec<Vec<bool>>,
}

/// A base and strong generating set for a permutation group on `0..n`.
pub struct StabChain {
    n: usize,
    levels: Vec<Level>,
    /// Strong generators with the deepest level they belong to.
    gens: Vec<(Perm, usize)>,
}

impl StabChain {
    pub fn new(n: usize) -> Self {
        assert!(n <= 255, "degree too large");
        StabChain { n, levels: Vec::new(), gens: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Orbit lengths along the base; their product is the group order.
    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Group order, or `None` if it does not fit in a `u128`.
    pub fn order(&self) -> Option<u128> {
        self.levels.iter().try_fold(1u128, |acc, l| acc.checked_mul(l.orbit.len() as u128))
    }

    /// `log2` of the order, always available.
    pub fn log2_order(&self) -> f64 {
        self.levels.iter().map(|l| (l.orbit.len() as f64).log2()).sum()
    }

    /// True when the group is the full symmetric group on `0..n`.
    pub fn is_symmetric(&self) -> bool {
        self.matches_factorial(0)
    }

    /// True when the group has index 2 in the symmetric group, which for
    /// `n >= 2` means it is the alternating group.
    pub fn is_alternating(&self) -> bool {
        self.n >= 2 && !self.is_symmetric() && self.matches_factorial(1)
    }

    fn matches_factorial(&self, drop_last: usize) -> bool {
        // compare prime factorisations so large degrees cannot overflow
        let mut need: Vec<usize> = (2..=self.n).collect();
        if drop_last == 1 {
            if self.n < 2 {
                return false;
            }
            need[0] = 1; // n!/2: replace the factor 2 with 1
        }
        same_product(&self.orbit_lengths(), &need)
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (h, _) = self.strip(g, 0);
        h.is_identity()
    }

    /// Sift `g` from level `from`. Returns the residue and the level where
    /// sifting stopped.
    fn strip(&self, g: &Perm, from: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let b = h.apply(level.point);
            match &level.trans[b] {
                Some(u) => h = h.then(&u.inverse()),
                None => return (h, i),
            }
        }
        (h, self.levels.len())
    }

    /// Add a generator. Returns true if the group grew.
    pub fn add_generator(&mut self, g: &Perm) -> bool {
        assert_eq!(g.len(), self.n);
        let (h, j) = self.strip(g, 0);
        if h.is_identity() {
            return false;
        }
        self.insert(h, j);
        self.complete();
        true
    }

    fn insert(&mut self, h: Perm, level: usize) {
        if level == self.levels.len() {
            let point = h.first_moved().expect("non-identity");
            let mut trans = vec![None; self.n];
            trans[point] = Some(Perm::identity(self.n));
            self.levels.push(Level { point, trans, orbit: vec![point], checked: Vec::new() });
        }
        self.gens.push((h, level));
    }

    /// Grow orbits and check Schreier generators until the chain is closed.
    fn complete(&mut self) {
        'outer: loop {
            for i in (0..self.levels.len()).rev() {
                self.extend_orbit(i);
                let gen_ids: Vec<usize> =
                    (0..self.gens.len()).filter(|&g| self.gens[g].1 >= i).collect();
                let orbit_len = self.levels[i].orbit.len();
                for oi in 0..orbit_len {
                    for &gi in &gen_ids {
                        if self.levels[i].checked.len() <= oi {
                            self.levels[i].checked.resize(oi + 1, Vec::new());
                        }
                        let row = &mut self.levels[i].checked[oi];
                        if row.len() <= gi {
                            row.resize(gi + 1, false);
                        }
                        if row[gi] {
                            continue;
                        }
                        row[gi] = true;
                        let level = &self.levels[i];
                        let b = level.orbit[oi];
                        let s = &self.gens[gi].0;
                        let ub = level.trans[b].as_ref().expect("orbit point");
                        let usb = level.trans[s.apply(b)].as_ref().expect("orbit closed");
                        let schreier = ub.then(s).then(&usb.inverse());
                        let (h, j) = self.strip(&schreier, i + 1);
                        if !h.is_identity() {
                            self.insert(h, j);
                            continue 'outer;
                        }
                    }
                }
            }
            break;
        }
    }

    fn extend_orbit(&mut self, i: usize) {
        let gen_ids: Vec<usize> = (0..self.gens.len()).filter(|&g| self.gens[g].1 >= i).collect();
        let level = &mut self.levels[i];
        let mut idx = 0;
        while idx < level.orbit.len() {
            let b = level.orbit[idx];
            for &gi in &gen_ids {
                let s = &self.gens[gi].0;
                let c = s.apply(b);
                if level.trans[c].is_none() {
                    let u = level.trans[b].as_ref().expect("orbit point").then(s);
                    level.trans[c] = Some(u);
                    level.orbit.push(c);
                }
            }
            idx += 1;
        }
    }
}

/// Compare two products of small integers without overflow.
fn same_product(a: &[usize], b: &[usize]) -> bool {
    fn factor(xs: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; 256];
        for &x in xs {
            let mut x = x;
            let mut p = 2;
            while x > 1 {
                while x % p == 0 {
                    counts[p] += 1;
                    x /= p;
                }
                p += 1;
            }
        }
        counts
    }
    factor(a) == factor(b)
}

pub fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn cycle(n: usize, pts: &[usize]) -> Perm {
        let mut p: Vec<u8> = (0..n as u8).collect();
        for w in 0..pts.len() {
            p[pts[w]] = pts[(w + 1) % pts.len()] as u8;
        }
        Perm(p)
    }

    /// Oracle: close the generating set under multiplication.
    fn brute_order(n: usize, gens: &[Perm]) -> usize {
        let mut seen: HashSet<Perm> = HashSet::new();
        let mut stack = vec![Perm::identity(n)];
        seen.insert(Perm::identity(n));
        while let Some(p) = stack.pop() {
            for g in gens {
                let q = p.then(g);
                if seen.insert(q.clone()) {
                    stack.push(q);
                }
            }
        }
        seen.len()
    }

    fn chain(n: usize, gens: &[Perm]) -> StabChain {
        let mut c = StabChain::new(n);
        for g in gens {
            c.add_generator(g);
        }
        c
    }

    #[test]
    fn parity_examples() {
        assert_eq!(Perm::identity(5).parity(), 0);
        assert_eq!(cycle(5, &[0, 1]).parity(), 1);
        assert_eq!(cycle(5, &[0, 1, 2]).parity(), 0);
        assert_eq!(cycle(5, &[0, 1, 2, 3]).parity(), 1);
    }

    #[test]
    fn symmetric_and_alternating() {
        for n in 2..=9 {
            let s = chain(n, &[cycle(n, &[0, 1]), cycle(n, &(0..n).collect::<Vec<_>>())]);
            assert_eq!(s.order(), Some(factorial(n as u32)));
            assert!(s.is_symmetric());
            assert!(!s.is_alternating());
        }
        for n in 3..=9 {
            let threes: Vec<Perm> = (2..n).map(|i| cycle(n, &[0, 1, i])).collect();
            let a = chain(n, &threes);
            assert_eq!(a.order(), Some(factorial(n as u32) / 2));
            assert!(a.is_alternating());
            assert!(a.contains(&cycle(n, &[0, 1, 2])));
            assert!(!a.contains(&cycle(n, &[0, 1])));
        }
    }

    #[test]
    fn large_degree_orders() {
        let n = 26;
        let s = chain(n, &[cycle(n, &[0, 1]), cycle(n, &(0..n).collect::<Vec<_>>())]);
        assert_eq!(s.order(), Some(factorial(26)));
        let a = chain(n, &[cycle(n, &[0, 1, 2]), cycle(n, &(0..n).collect::<Vec<_>>()[1..])]);
        assert!(a.is_alternating());
        let t = StabChain::new(40);
        assert_eq!(t.order(), Some(1));
    }

    #[test]
    fn small_groups() {
        // dihedral group of the square acting on corners
        let d4 = chain(4, &[cycle(4, &[0, 1, 2, 3]), Perm(vec![1, 0, 3, 2])]);
        assert_eq!(d4.order(), Some(8));
        let trivial = chain(6, &[Perm::identity(6)]);
        assert_eq!(trivial.order(), Some(1));
        // two disjoint transpositions
        let v = chain(6, &[cycle(6, &[0, 1]), cycle(6, &[4, 5])]);
        assert_eq!(v.order(), Some(4));
    }

    fn arb_gens() -> impl Strategy<Value = (usize, Vec<Perm>)> {
        (1usize..=6).prop_flat_map(|n| {
            let perm = Just((0..n as u8).collect::<Vec<u8>>()).prop_shuffle().prop_map(Perm);
            (Just(n), proptest::collection::vec(perm, 1..4))
        })
    }

    proptest! {
        #[test]
        fn order_matches_closure((n, gens) in arb_gens()) {
            let c = chain(n, &gens);
            prop_assert_eq!(c.order(), Some(brute_order(n, &gens) as u128));
            for g in &gens {
                prop_assert!(c.contains(g));
                prop_assert_eq!(g.then(&g.inverse()), Perm::identity(n));
            }
        }
    }
}
