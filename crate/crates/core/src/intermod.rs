//! Third-order intermodulation counters.
//!
//! For a subcarrier `k` out of `N`, the counters enumerate the index tuples
//! whose mixing product lands on `f_k`:
//!
//! | counter | condition     | tuple       |
//! |---------|---------------|-------------|
//! | `m1`    | 2m + n = k    | (m, n)      |
//! | `m2`    | 2m − n = k    | (m, n)      |
//! | `w1`    | m + n + l = k | (m, n, l)   |
//! | `w2`    | m + n − l = k | (m, n, l)   |
//! | `w3`    | m − n − l = k | (m, n, l)   |
//!
//! All indices lie in `1..=N`. Pairs require `m ≠ n`; triples require
//! pairwise-distinct indices, none equal to `k`. [`IndexRule`] relaxes or
//! tightens the `k` exclusion.
//!
//! [`count_intermod`] returns *ordered* tuple counts. The noise model usually
//! consumes [`IntermodCounts::combinations`], which divides out the index
//! permutations that leave a condition invariant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};

/// Which indices may coincide with the target subcarrier `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRule {
    /// Also drop pairs with `m == k` or `n == k` from the M-counters.
    pub m_excludes_k: bool,
    /// Drop triples containing `k` from the W-counters.
    pub w_excludes_k: bool,
}

impl Default for IndexRule {
    fn default() -> Self {
        IndexRule {
            m_excludes_k: false,
            w_excludes_k: true,
        }
    }
}

/// How tuple counts enter the noise formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TupleCounting {
    /// Unordered index combinations: w1/3!, w2/2!, w3/2!.
    #[default]
    Combinations,
    /// Ordered tuples as enumerated.
    Ordered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermodCounts {
    pub n_total: usize,
    pub k: usize,
    pub m1: u64,
    pub m2: u64,
    pub w1: u64,
    pub w2: u64,
    pub w3: u64,
}

impl IntermodCounts {
    fn zero(n_total: usize, k: usize) -> Self {
        IntermodCounts {
            n_total,
            k,
            m1: 0,
            m2: 0,
            w1: 0,
            w2: 0,
            w3: 0,
        }
    }

    /// Counts of unordered index sets. `w1` is symmetric in all three
    /// indices, `w2` in (m, n) and `w3` in (n, l); the divisions are exact.
    pub fn combinations(&self) -> IntermodCounts {
        debug_assert!(
            self.w1.is_multiple_of(6) && self.w2.is_multiple_of(2) && self.w3.is_multiple_of(2)
        );
        IntermodCounts {
            w1: self.w1 / 6,
            w2: self.w2 / 2,
            w3: self.w3 / 2,
            ..*self
        }
    }

    pub fn under(&self, counting: TupleCounting) -> IntermodCounts {
        match counting {
            TupleCounting::Combinations => self.combinations(),
            TupleCounting::Ordered => *self,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m1 == 0 && self.m2 == 0 && self.w1 == 0 && self.w2 == 0 && self.w3 == 0
    }
}

/// Ordered counts for subcarrier `k` of `n_total` under the default rule.
pub fn count_intermod(n_total: usize, k: usize) -> Result<IntermodCounts> {
    count_intermod_with(n_total, k, IndexRule::default())
}

pub fn count_intermod_with(n_total: usize, k: usize, rule: IndexRule) -> Result<IntermodCounts> {
    if n_total == 0 {
        return Err(Error::param("carrier count must be >= 1"));
    }
    if k == 0 || k > n_total {
        return Err(Error::IndexOutOfRange { k, n_total });
    }
    Ok(count_unchecked(n_total as i64, k as i64, rule))
}

/// Counts for every `k = 1..=n_total`, element `k − 1` holding subcarrier `k`.
pub fn count_table(n_total: usize) -> Result<Vec<IntermodCounts>> {
    count_table_with(n_total, IndexRule::default(), Execution::default())
}

pub fn count_table_with(
    n_total: usize,
    rule: IndexRule,
    exec: Execution,
) -> Result<Vec<IntermodCounts>> {
    if n_total == 0 {
        return Err(Error::param("carrier count must be >= 1"));
    }
    let n = n_total as i64;
    Ok(map_range(exec, n_total, |i| {
        count_unchecked(n, i as i64 + 1, rule)
    }))
}

fn count_unchecked(n: i64, k: i64, rule: IndexRule) -> IntermodCounts {
    let mut out = IntermodCounts::zero(n as usize, k as usize);
    out.m1 = count_pairs(n, k, rule.m_excludes_k, |m| k - 2 * m);
    out.m2 = count_pairs(n, k, rule.m_excludes_k, |m| 2 * m - k);
    // l written as c(m) + s·n
    out.w1 = count_triples(n, k, rule.w_excludes_k, |m| k - m, -1);
    out.w2 = count_triples(n, k, rule.w_excludes_k, |m| m - k, 1);
    out.w3 = count_triples(n, k, rule.w_excludes_k, |m| m - k, -1);
    out
}

fn count_pairs(n: i64, k: i64, exclude_k: bool, partner: impl Fn(i64) -> i64) -> u64 {
    (1..=n)
        .filter(|&m| {
            let p = partner(m);
            (1..=n).contains(&p) && p != m && !(exclude_k && (m == k || p == k))
        })
        .count() as u64
}

/// Counts `(m, n, l)` with `l = c(m) + s·n`, all in `1..=big_n`, pairwise
/// distinct and (optionally) different from `k`. For each `m` the admissible
/// `n` form an interval; each coincidence condition removes at most one `n`.
fn count_triples(big_n: i64, k: i64, exclude_k: bool, c_of: impl Fn(i64) -> i64, s: i64) -> u64 {
    let mut total = 0i64;
    for m in 1..=big_n {
        if exclude_k && m == k {
            continue;
        }
        let c = c_of(m);
        let (lo, hi) = if s == 1 {
            ((1 - c).max(1), (big_n - c).min(big_n))
        } else {
            ((c - big_n).max(1), (c - 1).min(big_n))
        };
        if lo > hi {
            continue;
        }
        let mut bad = [0i64; 5];
        let mut nbad = 0;
        let mut push = |v: i64| {
            if (lo..=hi).contains(&v) && !bad[..nbad].contains(&v) {
                bad[nbad] = v;
                nbad += 1;
            }
        };
        // n == m, and l == m  ⇔  c + s·n = m
        push(m);
        push((m - c) * s);
        // l == n  ⇔  c + s·n = n
        if s == 1 {
            if c == 0 {
                continue;
            }
        } else if c % 2 == 0 {
            push(c / 2);
        }
        if exclude_k {
            push(k);
            push((k - c) * s);
        }
        total += (hi - lo + 1) - nbad as i64;
    }
    total as u64
}

/// Exhaustive reference enumeration, O(N³). Used as a test oracle.
#[doc(hidden)]
pub fn brute_force_counts(n_total: usize, k: usize, rule: IndexRule) -> IntermodCounts {
    let n = n_total as i64;
    let k = k as i64;
    let mut out = IntermodCounts::zero(n_total, k as usize);
    for m in 1..=n {
        for p in 1..=n {
            if m == p || (rule.m_excludes_k && (m == k || p == k)) {
                continue;
            }
            out.m1 += (2 * m + p == k) as u64;
            out.m2 += (2 * m - p == k) as u64;
        }
    }
    for m in 1..=n {
        for p in 1..=n {
            for l in 1..=n {
                if m == p || p == l || m == l {
                    continue;
                }
                if rule.w_excludes_k && (m == k || p == k || l == k) {
                    continue;
                }
                out.w1 += (m + p + l == k) as u64;
                out.w2 += (m + p - l == k) as u64;
                out.w3 += (m - p - l == k) as u64;
            }
        }
    }
    out
}
