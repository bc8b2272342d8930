use std::fmt;

use crate::error::{Error, Result};
use crate::f2::BitVector;

/// Index set `S` of a parity function `χ_S(y) = ⊕_{i∈S} y_i`.
///
/// Indices are 0-based and kept sorted and distinct. `Display` prints them
/// 1-based, e.g. `{1,3}`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityIndexSet {
    indices: Vec<usize>,
}

impl ParityIndexSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    /// From 1-based coordinates, as written in `[n]` notation.
    pub fn from_one_based(indices: &[usize]) -> Self {
        assert!(indices.iter().all(|&i| i >= 1), "1-based indices start at 1");
        Self::new(indices.iter().map(|i| i - 1))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn check_arity(&self, arity: usize) -> Result<()> {
        match self.max_index() {
            Some(i) if i >= arity => Err(Error::CoordinateOutOfRange { index: i, arity }),
            _ => Ok(()),
        }
    }

    /// Indicator vector of `S` in `F_2^arity`.
    pub fn to_vector(&self, arity: usize) -> Result<BitVector> {
        BitVector::from_support(arity, self.indices.iter().copied())
    }

    pub fn from_vector(v: &BitVector) -> Self {
        Self {
            indices: v.support(),
        }
    }

    /// `χ_S(y)` as a GF(2) value.
    pub fn eval(&self, y: &BitVector) -> bool {
        self.indices.iter().fold(false, |acc, &i| acc ^ y.get(i))
    }

    /// Symmetric difference, i.e. the index set of `χ_S · χ_T`.
    pub fn symmetric_difference(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) if x == y => {
                    a.next();
                    b.next();
                }
                (Some(&&x), Some(&&y)) if x < y => {
                    out.push(x);
                    a.next();
                }
                (Some(_), Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { indices: out }
    }

    /// Order used to break ties between equally good parities: smaller sets
    /// first, then lexicographic.
    pub fn size_lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.indices.cmp(&other.indices))
    }
}

impl fmt::Display for ParityIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ParityIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{self}")
    }
}

impl FromIterator<usize> for ParityIndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// Calls `visit` on every subset of `{0..n}` of size at most `max_size`,
/// by increasing size and lexicographically within a size.
pub fn for_each_subset_up_to(n: usize, max_size: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, want: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == want {
            visit(cur);
            return;
        }
        let remaining = want - cur.len();
        for i in start..=(n - remaining) {
            cur.push(i);
            rec(i + 1, n, want, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(max_size);
    for size in 0..=max_size.min(n) {
        rec(0, n, size, &mut cur, &mut visit);
    }
}
