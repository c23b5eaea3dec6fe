//! `s(d,k)`, `S(d,k)` and the k=1 diameter conjecture value.

use serde::Serialize;

/// Smallest number of empty vertices for which a non-isolated configuration
/// exists: a single free k-face minus its one token.
pub fn s_small(d: u32, k: u32) -> u64 {
    assert!(1 <= k && k <= d, "need 1 <= k <= d");
    (1u64 << k) - 1
}

/// `S(d,k)` by the recursion `S(d,k) = S(d-1,k-1) + S(d-1,k)` with
/// `S(i,i) = 2^i - 1` and `S(i,1) = 1`.
pub fn s_value(d: u32, k: u32) -> u64 {
    assert!(1 <= k && k <= d && d <= 62, "need 1 <= k <= d <= 62");
    let mut row = vec![0u64; d as usize + 1];
    // row[j] = S(i, j) for the current i
    for i in 1..=d {
        let mut next = vec![0u64; d as usize + 1];
        for j in 1..=i {
            next[j as usize] = if j == i {
                (1u64 << i) - 1
            } else if j == 1 {
                1
            } else {
                row[j as usize - 1] + row[j as usize]
            };
        }
        row = next;
    }
    row[k as usize]
}

pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (1..=r).fold(1u64, |acc, i| acc * (n - r + i) / i)
}

/// Closed form for `S(n+k, k)` with `k >= 2`, `n >= 1`, obtained by
/// counting the paths of the recursion that end on each base case.
pub fn s_closed_form(n: u32, k: u32) -> u64 {
    assert!(k >= 2 && n >= 1, "need k >= 2 and n >= 1");
    let (n, k) = (n as u64, k as u64);
    let top: u64 = (2..=k).map(|i| binomial(n - 1 + k - i, k - i) * ((1u64 << i) - 1)).sum();
    let side: u64 = (2..=n + 1).map(|i| binomial(n + k - i - 1, k - 2)).sum();
    top + side
}

/// Conjectured diameter `d(2^d - l)` of the k=1 puzzle graph.
pub fn diameter_conjecture_value(d: u32, l: u32) -> u64 {
    assert!(l >= 2 && l <= 1 << d, "need 2 <= l <= 2^d");
    d as u64 * ((1u64 << d) - l as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Base,
    Recursion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SdkEntry {
    pub d: u32,
    pub k: u32,
    #[serde(rename = "S")]
    pub s: u64,
    pub provenance: Provenance,
    /// Value of the closed form where it applies.
    pub closed_form: Option<u64>,
}

/// Every `S(d,k)` with `1 <= k <= d <= max_d`, row by row.
pub fn sdk_table(max_d: u32) -> Vec<SdkEntry> {
    let mut out = Vec::new();
    for d in 1..=max_d {
        for k in 1..=d {
            let base = k == d || k == 1;
            out.push(SdkEntry {
                d,
                k,
                s: s_value(d, k),
                provenance: if base { Provenance::Base } else { Provenance::Recursion },
                closed_form: (!base).then(|| s_closed_form(d - k, k)),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain memo-free recursion as an oracle for the row-wise table.
    fn rec(d: u32, k: u32) -> u64 {
        if k == d {
            (1 << d) - 1
        } else if k == 1 {
            1
        } else {
            rec(d - 1, k - 1) + rec(d - 1, k)
        }
    }

    #[test]
    fn s_small_examples() {
        assert_eq!(s_small(3, 2), 3);
        assert_eq!(s_small(5, 3), 7);
        for k in 1..=6 {
            assert_eq!(s_small(k, k), s_value(k, k));
        }
    }

    #[test]
    fn s_value_examples() {
        assert_eq!(s_value(3, 2), 4);
        assert_eq!(s_value(4, 3), 11);
        assert_eq!(s_value(4, 2), 5);
        assert_eq!(s_value(5, 4), 26);
        assert_eq!(s_value(5, 2), s_value(4, 1) + s_value(4, 2));
        assert_eq!(s_value(5, 2), 6);
        assert_eq!(s_value(5, 3), 16);
    }

    #[test]
    fn table_matches_plain_recursion() {
        for d in 1..=16 {
            for k in 1..=d {
                assert_eq!(s_value(d, k), rec(d, k), "S({d},{k})");
            }
        }
    }

    #[test]
    fn closed_form_matches_recursion() {
        for k in 2..=11 {
            for n in 1..=12 - k {
                assert_eq!(s_closed_form(n, k), s_value(n + k, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn one_step_off_diagonal() {
        for k in 1..=10 {
            assert_eq!(s_value(k + 1, k), (1u64 << (k + 1)) - k as u64 - 2);
            let sum: u64 = (1..=k).map(|i| (1u64 << i) - 1).sum();
            assert_eq!(s_value(k + 1, k), sum);
        }
    }

    #[test]
    fn conjecture_values() {
        assert_eq!(diameter_conjecture_value(3, 2), 18);
        assert_eq!(diameter_conjecture_value(4, 8), 32);
        assert_eq!(diameter_conjecture_value(2, 3), 2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn table_shape() {
        let t = sdk_table(12);
        assert_eq!(t.len(), 78);
        for e in &t {
            if let Some(c) = e.closed_form {
                assert_eq!(c, e.s);
            }
        }
    }
}
