//! Symmetric multi-indices over base coordinates.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use smallvec::SmallVec;

/// A multi-index `σ = (σ₁, …, σ_k)` of base-coordinate indices (0-based),
/// stored sorted so that mixed partials are symmetric by construction.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u8; 6]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: SmallVec<[u8; 6]> = indices
            .into_iter()
            .map(|i| u8::try_from(i).expect("base index out of range"))
            .collect();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn single(lambda: usize) -> Self {
        Self::new([lambda])
    }

    /// `|σ|`.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&i| i as usize)
    }

    /// `σ,λ` realised as sorted insertion.
    pub fn with(&self, lambda: usize) -> Self {
        let l = u8::try_from(lambda).expect("base index out of range");
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x <= l);
        v.insert(pos, l);
        MultiIndex(v)
    }

    pub fn join(&self, other: &MultiIndex) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().copied());
        v.sort_unstable();
        MultiIndex(v)
    }

    /// Splits off the smallest letter.
    pub fn split_first(&self) -> Option<(usize, MultiIndex)> {
        let (&first, rest) = self.0.split_first()?;
        Some((first as usize, MultiIndex(SmallVec::from_slice(rest))))
    }

    /// Removes one occurrence of `lambda`, if present.
    pub fn without(&self, lambda: usize) -> Option<MultiIndex> {
        let pos = self.0.iter().position(|&x| x as usize == lambda)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(MultiIndex(v))
    }

    /// Number of occurrences of each base index `0..n`.
    pub fn counts(&self, n: usize) -> Vec<usize> {
        let mut c = vec![0; n.max(self.max_index().map_or(0, |m| m + 1))];
        for i in self.indices() {
            c[i] += 1;
        }
        c
    }

    /// Every sub-multi-index `ρ ⊆ σ` with the complement `σ − ρ` and the
    /// multinomial weight `Π_k C(σ_k, ρ_k)` appearing in the Leibniz rule
    /// `D_σ(ab) = Σ_ρ w · D_ρ(a) · D_{σ−ρ}(b)`.
    pub fn splits(&self) -> Vec<(MultiIndex, MultiIndex, BigInt)> {
        let letters: Vec<(u8, usize)> = {
            let mut out: Vec<(u8, usize)> = Vec::new();
            for &l in &self.0 {
                match out.last_mut() {
                    Some((last, c)) if *last == l => *c += 1,
                    _ => out.push((l, 1)),
                }
            }
            out
        };
        let mut result = vec![(MultiIndex::empty(), MultiIndex::empty(), BigInt::one())];
        for &(letter, count) in &letters {
            let mut next = Vec::with_capacity(result.len() * (count + 1));
            for (rho, rest, w) in &result {
                for take in 0..=count {
                    let mut r = rho.clone();
                    let mut s = rest.clone();
                    for _ in 0..take {
                        r.0.push(letter);
                    }
                    for _ in take..count {
                        s.0.push(letter);
                    }
                    next.push((r, s, w * binomial(count, take)));
                }
            }
            result = next;
        }
        result
    }

    /// All sorted multi-indices over `n` letters with `|σ| == k`, in increasing order.
    pub fn of_order(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex::new(cur.iter().copied()));
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, k, i, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, k, 0, &mut Vec::new(), &mut out);
        out
    }

    /// All sorted multi-indices with `|σ| ≤ k`, ordered by `|σ|` first.
    pub fn up_to(n: usize, k: usize) -> Vec<MultiIndex> {
        (0..=k).flat_map(|j| Self::of_order(n, j)).collect()
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_keeps_sorted() {
        let s = MultiIndex::new([1, 0]);
        assert_eq!(s, MultiIndex::new([0, 1]));
        assert_eq!(s.with(0), MultiIndex::new([0, 0, 1]));
        assert_eq!(s.with(1).order(), 3);
    }

    #[test]
    fn symmetric_index_counts() {
        // 1 + 2 + 3 multi-indices of order ≤ 2 in two letters
        assert_eq!(MultiIndex::up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::of_order(3, 2).len(), 6);
    }

    #[test]
    fn leibniz_weights_sum_to_two_to_the_order() {
        let s = MultiIndex::new([0, 0, 1]);
        let total: BigInt = s.splits().into_iter().map(|(_, _, w)| w).sum();
        assert_eq!(total, BigInt::from(8));
    }
}
