//! Ranking of strictly increasing multi-indices in lexicographic order.
//!
//! A multi-index `i_0 < … < i_{k-1}` drawn from `0..d` has lexicographic rank
//! `C(d,k) - 1 - Σ_j C(d-1-i_j, k-j)`, which is the combinatorial number
//! system applied to the reflected indices `d-1-i_j`.

/// Binomial coefficient, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn rank(indices: &[usize], dim: usize) -> usize {
    let k = indices.len();
    debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(indices.iter().all(|&i| i < dim));
    let tail: usize = indices
        .iter()
        .enumerate()
        .map(|(j, &i)| binomial(dim - 1 - i, k - j))
        .sum();
    binomial(dim, k) - 1 - tail
}

pub fn unrank(mut rank: usize, dim: usize, k: usize) -> Vec<usize> {
    debug_assert!(rank < binomial(dim, k));
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        let mut i = next;
        loop {
            // number of multi-indices that start with `i` at this slot
            let block = binomial(dim - 1 - i, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            i += 1;
        }
        out.push(i);
        next = i + 1;
    }
    out
}

pub fn to_mask(indices: &[usize]) -> u64 {
    indices.iter().fold(0u64, |m, &i| m | (1u64 << i))
}

pub fn from_mask(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out.push(i);
        m &= m - 1;
    }
    out
}

/// Rank of the multi-index encoded as a bit mask.
pub fn rank_mask(mask: u64, dim: usize) -> usize {
    let k = mask.count_ones() as usize;
    let mut tail = 0;
    let mut m = mask;
    let mut j = 0;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        tail += binomial(dim - 1 - i, k - j);
        j += 1;
        m &= m - 1;
    }
    binomial(dim, k) - 1 - tail
}

/// Sign of the shuffle that sorts the concatenation `(a, b)` of two disjoint
/// index sets, i.e. `(-1)^{#{(i,j) : i∈a, j∈b, i>j}}`.
pub fn shuffle_sign(a: u64, b: u64) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut m = b;
    while m != 0 {
        let j = m.trailing_zeros();
        inversions += (a >> j).count_ones();
        m &= m - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Iterator over all `k`-subsets of `0..dim` in lexicographic order, as masks.
pub struct Subsets {
    current: Option<Vec<usize>>,
    dim: usize,
}

impl Subsets {
    pub fn new(dim: usize, k: usize) -> Self {
        let current = if k <= dim { Some((0..k).collect()) } else { None };
        Subsets { current, dim }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let out = cur.clone();
        let k = cur.len();
        let mut nxt = cur;
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if nxt[pos] < self.dim - k + pos {
                nxt[pos] += 1;
                for q in pos + 1..k {
                    nxt[q] = nxt[q - 1] + 1;
                }
                self.current = Some(nxt);
                return Some(out);
            }
        }
        Some(out)
    }
}
