//! Incomplete matchings of `[n] = {1, …, n}`: partitions into pairs and singletons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of `[n]` into pairs `(i, j)` with `i < j` and singletons, stored canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IncompleteMatching {
    n: usize,
    pairs: Vec<(usize, usize)>,
    singletons: Vec<usize>,
}

impl IncompleteMatching {
    /// Builds a matching of `[n]` from its pairs; every other point is a singleton.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut used = vec![false; n + 1];
        let mut canon = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == 0 || j > n || i == j {
                return Err(Error::InvalidMatching(format!("pair ({a}, {b}) is not inside [{n}]")));
            }
            if used[i] || used[j] {
                return Err(Error::InvalidMatching(format!("pair ({a}, {b}) reuses a point")));
            }
            used[i] = true;
            used[j] = true;
            canon.push((i, j));
        }
        canon.sort_unstable();
        let singletons = (1..=n).filter(|&k| !used[k]).collect();
        Ok(IncompleteMatching { n, pairs: canon, singletons })
    }

    pub fn empty(n: usize) -> Self {
        IncompleteMatching { n, pairs: Vec::new(), singletons: (1..=n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    /// Pairs sorted by their left endpoint.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
    pub fn singletons(&self) -> &[usize] {
        &self.singletons
    }
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }
    pub fn num_singletons(&self) -> usize {
        self.singletons.len()
    }

    pub fn is_singleton(&self, k: usize) -> bool {
        self.singletons.binary_search(&k).is_ok()
    }

    /// Partner of `k`, if `k` is paired.
    pub fn partner(&self, k: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(i, j)| {
            if i == k {
                Some(j)
            } else if j == k {
                Some(i)
            } else {
                None
            }
        })
    }

    /// Intersection of the open intervals `]i, j[` over all pairs; all of `[n]` if there are none.
    pub fn pair_intersection(&self) -> Vec<usize> {
        let lo = self.pairs.iter().map(|p| p.0 + 1).max().unwrap_or(1);
        let hi = self.pairs.iter().map(|p| p.1 - 1).min().unwrap_or(self.n);
        (lo..=hi).collect()
    }

    /// Position (1-based) of the singleton `k` among the singletons.
    pub fn singleton_position(&self, k: usize) -> Result<usize> {
        self.singletons.binary_search(&k).map(|p| p + 1).map_err(|_| Error::NotASingleton(k))
    }

    /// Total crossing number `Σ_V singletons inside V + 2·#nested + #crossing`.
    pub fn crossing_total(&self) -> usize {
        let mut total = 0;
        for &(i, j) in &self.pairs {
            total += self.singletons.iter().filter(|&&s| i < s && s < j).count();
        }
        for (a, &(_, j)) in self.pairs.iter().enumerate() {
            for &(k, l) in &self.pairs[a + 1..] {
                // pairs are sorted by left endpoint, so i < k
                if l < j {
                    total += 2;
                } else if k < j {
                    total += 1;
                }
            }
        }
        total
    }

    /// Ordered by left endpoints.
    pub fn left_standard(&self) -> AdmissibleOrder {
        AdmissibleOrder(self.pairs.clone())
    }

    /// Ordered by decreasing right endpoints.
    pub fn right_standard(&self) -> AdmissibleOrder {
        let mut p = self.pairs.clone();
        p.sort_by(|a, b| b.1.cmp(&a.1));
        AdmissibleOrder(p)
    }

    /// Whether `order` is a linear extension of the nesting order on the pairs of `self`.
    pub fn is_admissible(&self, order: &AdmissibleOrder) -> bool {
        let mut sorted = order.0.clone();
        sorted.sort_unstable();
        if sorted != self.pairs {
            return false;
        }
        for (a, &(k, l)) in order.0.iter().enumerate() {
            // nothing placed later may enclose an earlier pair
            if order.0[a + 1..].iter().any(|&(i, j)| i < k && l < j) {
                return false;
            }
        }
        true
    }

    /// All linear extensions of the nesting order.
    pub fn admissible_orders(&self, pair_cap: usize, count_cap: usize) -> Result<Vec<AdmissibleOrder>> {
        let p = self.pairs.len();
        if p > pair_cap {
            return Err(Error::CapExceeded { what: "pairs for order enumeration", value: p, cap: pair_cap });
        }
        // preds[a] = pairs that must precede pair a (those enclosing it)
        let preds: Vec<Vec<usize>> = (0..p)
            .map(|a| {
                let (k, l) = self.pairs[a];
                (0..p).filter(|&b| self.pairs[b].0 < k && l < self.pairs[b].1).collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut placed = vec![false; p];
        let mut current = Vec::with_capacity(p);
        extend_orders(&self.pairs, &preds, &mut placed, &mut current, &mut out, count_cap)?;
        Ok(out)
    }

    /// Per-pair crossing numbers along `order` and their total.
    pub fn crossing_numbers(&self, order: &AdmissibleOrder) -> Result<(Vec<usize>, usize)> {
        if !self.is_admissible(order) {
            return Err(Error::NotAdmissible);
        }
        let mut removed: Vec<usize> = Vec::with_capacity(2 * order.0.len());
        let mut per = Vec::with_capacity(order.0.len());
        for &(i, j) in &order.0 {
            let r = |x: usize| removed.iter().filter(|&&y| y < x).count();
            per.push((j - i - 1) - (r(j) - r(i)));
            removed.push(i);
            removed.push(j);
        }
        let total = per.iter().sum();
        Ok((per, total))
    }
}

fn extend_orders(
    pairs: &[(usize, usize)],
    preds: &[Vec<usize>],
    placed: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Vec<AdmissibleOrder>,
    cap: usize,
) -> Result<()> {
    if current.len() == pairs.len() {
        if out.len() >= cap {
            return Err(Error::CapExceeded { what: "admissible orders", value: out.len() + 1, cap });
        }
        out.push(AdmissibleOrder(current.iter().map(|&a| pairs[a]).collect()));
        return Ok(());
    }
    for a in 0..pairs.len() {
        if !placed[a] && preds[a].iter().all(|&b| placed[b]) {
            placed[a] = true;
            current.push(a);
            extend_orders(pairs, preds, placed, current, out, cap)?;
            current.pop();
            placed[a] = false;
        }
    }
    Ok(())
}

/// A linear order on the pairs of a matching, earliest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdmissibleOrder(pub Vec<(usize, usize)>);

impl AdmissibleOrder {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }
}

/// Every incomplete matching of `[n]`, in a fixed recursive order.
pub fn enumerate_matchings(n: usize, cap: usize) -> Result<Vec<IncompleteMatching>> {
    if n > cap {
        return Err(Error::CapExceeded { what: "matching size", value: n, cap });
    }
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    let points: Vec<usize> = (1..=n).collect();
    enumerate_rec(n, &points, &mut pairs, &mut out);
    Ok(out)
}

fn enumerate_rec(n: usize, rest: &[usize], pairs: &mut Vec<(usize, usize)>, out: &mut Vec<IncompleteMatching>) {
    let Some((&first, tail)) = rest.split_first() else {
        out.push(IncompleteMatching::new(n, pairs).expect("generated pairs are valid"));
        return;
    };
    enumerate_rec(n, tail, pairs, out);
    for (idx, &partner) in tail.iter().enumerate() {
        let mut remaining = tail.to_vec();
        remaining.remove(idx);
        pairs.push((first, partner));
        enumerate_rec(n, &remaining, pairs, out);
        pairs.pop();
    }
}

/// Matchings of `[2k+1]` where `k+1` is a singleton and every point `≤ k` is paired to one `> k+1`.
pub fn enumerate_b(m: usize, cap: usize) -> Result<Vec<IncompleteMatching>> {
    if m % 2 == 0 {
        return Err(Error::NotOdd(m));
    }
    if m > cap {
        return Err(Error::CapExceeded { what: "B size", value: m, cap });
    }
    let k = m / 2;
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        let pairs: Vec<(usize, usize)> = perm.iter().enumerate().map(|(a, &b)| (a + 1, k + 2 + b)).collect();
        out.push(IncompleteMatching::new(m, &pairs)?);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// `(π^m, k, σ^l, σ^r)`: the pairs straddling `k`, and the left and right remainders renumbered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decomposition {
    pub middle: IncompleteMatching,
    pub k: usize,
    pub left: IncompleteMatching,
    pub right: IncompleteMatching,
}

pub fn dcp(pi: &IncompleteMatching, k: usize) -> Result<Decomposition> {
    if !pi.is_singleton(k) {
        return Err(Error::NotASingleton(k));
    }
    let mid: Vec<(usize, usize)> = pi.pairs.iter().copied().filter(|&(i, j)| i < k && k < j).collect();
    let middle = IncompleteMatching::new(pi.n, &mid)?;
    let left_pts: Vec<usize> = middle.singletons.iter().copied().filter(|&t| t < k).collect();
    let right_pts: Vec<usize> = middle.singletons.iter().copied().filter(|&t| t > k).collect();
    let rank = |pts: &[usize], x: usize| pts.binary_search(&x).expect("point is a singleton of π^m") + 1;
    let left_pairs: Vec<(usize, usize)> =
        pi.pairs.iter().filter(|&&(_, j)| j < k).map(|&(i, j)| (rank(&left_pts, i), rank(&left_pts, j))).collect();
    let right_pairs: Vec<(usize, usize)> =
        pi.pairs.iter().filter(|&&(i, _)| i > k).map(|&(i, j)| (rank(&right_pts, i), rank(&right_pts, j))).collect();
    Ok(Decomposition {
        left: IncompleteMatching::new(left_pts.len(), &left_pairs)?,
        right: IncompleteMatching::new(right_pts.len(), &right_pairs)?,
        middle,
        k,
    })
}

pub fn dcp_inverse(dec: &Decomposition) -> Result<(IncompleteMatching, usize)> {
    let m = &dec.middle;
    let k = dec.k;
    if !m.pair_intersection().contains(&k) || !m.is_singleton(k) {
        return Err(Error::InconsistentSizes(format!("{k} is not inside every pair of π^m")));
    }
    let left_pts: Vec<usize> = m.singletons.iter().copied().filter(|&t| t < k).collect();
    let right_pts: Vec<usize> = m.singletons.iter().copied().filter(|&t| t > k).collect();
    if dec.left.n != left_pts.len() || dec.right.n != right_pts.len() {
        return Err(Error::InconsistentSizes(format!(
            "σ^l, σ^r have sizes {}, {} but π^m leaves {}, {} points",
            dec.left.n,
            dec.right.n,
            left_pts.len(),
            right_pts.len()
        )));
    }
    let mut pairs = m.pairs.clone();
    pairs.extend(dec.left.pairs.iter().map(|&(i, j)| (left_pts[i - 1], left_pts[j - 1])));
    pairs.extend(dec.right.pairs.iter().map(|&(i, j)| (right_pts[i - 1], right_pts[j - 1])));
    Ok((IncompleteMatching::new(m.n, &pairs)?, k))
}

/// `d_s`: drop the singleton `{1}` and shift down.
pub fn delete_singleton(pi: &IncompleteMatching) -> Result<IncompleteMatching> {
    if pi.n < 2 || !pi.is_singleton(1) {
        return Err(Error::WrongCase("d_s needs n ≥ 2 and {1} a singleton"));
    }
    let pairs: Vec<(usize, usize)> = pi.pairs.iter().map(|&(i, j)| (i - 1, j - 1)).collect();
    IncompleteMatching::new(pi.n - 1, &pairs)
}

/// Inverse of `d_s`: shift up and add the singleton `{1}`.
pub fn delete_singleton_inverse(sigma: &IncompleteMatching) -> IncompleteMatching {
    let pairs: Vec<(usize, usize)> = sigma.pairs.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
    IncompleteMatching::new(sigma.n + 1, &pairs).expect("shifted pairs are valid")
}

/// `D_p(π) = (d_p(π), j_1 - 1)` where `{1, j_1}` is a pair.
pub fn delete_pair(pi: &IncompleteMatching) -> Result<(IncompleteMatching, usize)> {
    if pi.n < 3 {
        return Err(Error::WrongCase("D_p needs n ≥ 3"));
    }
    let Some(j1) = pi.partner(1) else { return Err(Error::WrongCase("D_p needs 1 to be paired")) };
    let shift = |x: usize| x - 1 - usize::from(x > j1);
    let pairs: Vec<(usize, usize)> =
        pi.pairs.iter().filter(|&&(i, _)| i != 1).map(|&(i, j)| (shift(i), shift(j))).collect();
    Ok((IncompleteMatching::new(pi.n - 2, &pairs)?, j1 - 1))
}

/// Inverse of `D_p`: insert the pair `{1, k+1}` and renumber.
pub fn delete_pair_inverse(sigma: &IncompleteMatching, k: usize) -> Result<IncompleteMatching> {
    let n = sigma.n + 2;
    if k == 0 || k > n - 1 {
        return Err(Error::IndexOutOfRange { index: k, max: n - 1 });
    }
    let f = |x: usize| if x + 1 < k + 1 { x + 1 } else { x + 2 };
    let mut pairs: Vec<(usize, usize)> = sigma.pairs.iter().map(|&(i, j)| (f(i), f(j))).collect();
    pairs.push((1, k + 1));
    IncompleteMatching::new(n, &pairs)
}
