//! Decision trees over `F_2^n`.
//!
//! Trees are kept in reduced form: no coordinate is queried twice on one
//! root-to-leaf path. [`DecisionTree::query`] enforces this by collapsing any
//! repeated query in a child onto the branch already taken.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::parity::ParityIndexSet;
use crate::source::{FinitePmf, LabeledSource};
use crate::Rational;

/// Input-size guard for the brute-force Fourier transform.
pub const FOURIER_GUARD: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    kind: Kind,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Kind {
    Leaf(bool),
    Query {
        var: usize,
        zero: Box<DecisionTree>,
        one: Box<DecisionTree>,
    },
}

/// Borrowed view of a tree node.
#[derive(Clone, Copy, Debug)]
pub enum TreeView<'a> {
    Leaf(bool),
    Query {
        var: usize,
        zero: &'a DecisionTree,
        one: &'a DecisionTree,
    },
}

/// Label given to the leaves that replace pruned subtrees.
#[derive(Clone, Copy, Debug)]
pub enum PruneLabel<'a> {
    Constant(bool),
    /// Majority label of the examples reaching the pruned node; ties and
    /// unreached nodes get 0.
    Majority(&'a [(BitVector, bool)]),
}

impl Default for PruneLabel<'_> {
    fn default() -> Self {
        PruneLabel::Constant(false)
    }
}

impl DecisionTree {
    pub fn leaf(label: bool) -> Self {
        Self {
            kind: Kind::Leaf(label),
        }
    }

    /// Internal node querying `var`. Queries of `var` inside the children are
    /// collapsed onto the corresponding branch.
    pub fn query(var: usize, zero: DecisionTree, one: DecisionTree) -> Self {
        let zero = zero.restrict(var, false);
        let one = one.restrict(var, true);
        Self {
            kind: Kind::Query {
                var,
                zero: Box::new(zero),
                one: Box::new(one),
            },
        }
    }

    /// The subtree obtained by fixing `var = value` everywhere.
    pub fn restrict(self, var: usize, value: bool) -> DecisionTree {
        match self.kind {
            Kind::Leaf(_) => self,
            Kind::Query { var: v, zero, one } if v == var => {
                if value {
                    one.restrict(var, value)
                } else {
                    zero.restrict(var, value)
                }
            }
            Kind::Query { var: v, zero, one } => DecisionTree {
                kind: Kind::Query {
                    var: v,
                    zero: Box::new(zero.restrict(var, value)),
                    one: Box::new(one.restrict(var, value)),
                },
            },
        }
    }

    pub fn view(&self) -> TreeView<'_> {
        match &self.kind {
            Kind::Leaf(b) => TreeView::Leaf(*b),
            Kind::Query { var, zero, one } => TreeView::Query {
                var: *var,
                zero,
                one,
            },
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, Kind::Leaf(_))
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        match &self.kind {
            Kind::Leaf(_) => 1,
            Kind::Query { zero, one, .. } => zero.size() + one.size(),
        }
    }

    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        match &self.kind {
            Kind::Leaf(_) => 0,
            Kind::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match &self.kind {
            Kind::Leaf(_) => None,
            Kind::Query { var, zero, one } => {
                Some((*var).max(zero.max_var().unwrap_or(0)).max(one.max_var().unwrap_or(0)))
            }
        }
    }

    /// Label of the leaf reached by `y`.
    pub fn eval(&self, y: &BitVector) -> Result<bool> {
        if let Some(v) = self.max_var() {
            if v >= y.len() {
                return Err(Error::CoordinateOutOfRange {
                    index: v,
                    arity: y.len(),
                });
            }
        }
        Ok(self.eval_unchecked(y))
    }

    pub(crate) fn eval_unchecked(&self, y: &BitVector) -> bool {
        let mut node = self;
        loop {
            match &node.kind {
                Kind::Leaf(b) => return *b,
                Kind::Query { var, zero, one } => node = if y.get(*var) { one } else { zero },
            }
        }
    }

    /// Every root-to-leaf path as `(var, branch)` pairs with its leaf label.
    pub fn leaves(&self) -> Vec<(Vec<(usize, bool)>, bool)> {
        fn walk(t: &DecisionTree, path: &mut Vec<(usize, bool)>, out: &mut Vec<(Vec<(usize, bool)>, bool)>) {
            match &t.kind {
                Kind::Leaf(b) => out.push((path.clone(), *b)),
                Kind::Query { var, zero, one } => {
                    path.push((*var, false));
                    walk(zero, path, out);
                    path.pop();
                    path.push((*var, true));
                    walk(one, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Replaces every internal node at depth `d` by a leaf labeled per
    /// `label`. Trees of depth at most `d` come back unchanged.
    pub fn prune(&self, d: usize) -> DecisionTree {
        self.prune_with(d, PruneLabel::default())
    }

    pub fn prune_with(&self, d: usize, label: PruneLabel<'_>) -> DecisionTree {
        fn go(t: &DecisionTree, depth: usize, d: usize, label: &PruneLabel<'_>, path: &mut Vec<(usize, bool)>) -> DecisionTree {
            match &t.kind {
                Kind::Leaf(_) => t.clone(),
                Kind::Query { .. } if depth == d => DecisionTree::leaf(match label {
                    PruneLabel::Constant(b) => *b,
                    PruneLabel::Majority(samples) => {
                        let (mut ones, mut total) = (0usize, 0usize);
                        for (y, l) in samples.iter() {
                            if path.iter().all(|&(v, b)| y.get(v) == b) {
                                total += 1;
                                ones += usize::from(*l);
                            }
                        }
                        2 * ones > total
                    }
                }),
                Kind::Query { var, zero, one } => {
                    path.push((*var, false));
                    let z = go(zero, depth + 1, d, label, path);
                    path.pop();
                    path.push((*var, true));
                    let o = go(one, depth + 1, d, label, path);
                    path.pop();
                    DecisionTree {
                        kind: Kind::Query {
                            var: *var,
                            zero: Box::new(z),
                            one: Box::new(o),
                        },
                    }
                }
            }
        }
        go(self, 0, d, &label, &mut Vec::new())
    }

    /// All subsets of the variables queried along each root-to-leaf path,
    /// deduplicated. These are the only sets that can carry nonzero Fourier
    /// weight.
    pub fn path_support_sets(&self) -> BTreeSet<ParityIndexSet> {
        let mut out = BTreeSet::new();
        for (path, _) in self.leaves() {
            let vars: Vec<usize> = path.iter().map(|&(v, _)| v).collect();
            for mask in 0u64..(1u64 << vars.len()) {
                out.insert(
                    vars.iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect(),
                );
            }
        }
        out
    }

    /// Nonzero coefficients of the ±1 Fourier expansion of `T` under the
    /// uniform distribution on `F_2^n`, via a Walsh–Hadamard transform of the
    /// full truth table. Label `b` maps to `(-1)^b`.
    pub fn exact_uniform_fourier(&self, n: usize) -> Result<BTreeMap<ParityIndexSet, Rational>> {
        if n > FOURIER_GUARD {
            return Err(Error::GuardExceeded {
                what: "Fourier input size",
                value: n,
                limit: FOURIER_GUARD,
            });
        }
        if let Some(v) = self.max_var() {
            if v >= n {
                return Err(Error::CoordinateOutOfRange { index: v, arity: n });
            }
        }
        let size = 1usize << n;
        let mut table: Vec<i64> = (0..size)
            .map(|x| {
                if self.eval_unchecked(&BitVector::from_word(n, x as u64)) {
                    -1
                } else {
                    1
                }
            })
            .collect();
        let mut h = 1;
        while h < size {
            for block in (0..size).step_by(2 * h) {
                for i in block..block + h {
                    let (a, b) = (table[i], table[i + h]);
                    table[i] = a + b;
                    table[i + h] = a - b;
                }
            }
            h *= 2;
        }
        let denom = BigInt::from(size as u64);
        Ok(table
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(s, c)| {
                (
                    ParityIndexSet::from_vector(&BitVector::from_word(n, s as u64)),
                    Rational::new(BigInt::from(c), denom.clone()),
                )
            })
            .collect())
    }

    /// Exact weighted fraction of the support where `T` differs from the label.
    pub fn exact_distance(&self, labeled: &FinitePmf) -> Result<Rational> {
        if let Some(v) = self.max_var() {
            if v >= labeled.arity() {
                return Err(Error::CoordinateOutOfRange {
                    index: v,
                    arity: labeled.arity(),
                });
            }
        }
        Ok(labeled.expect_halves(|y, l| if self.eval_unchecked(y) != l { 2 } else { 0 }))
    }

    /// Sampled distance with `hoeffding_samples(tol, conf)` draws.
    pub fn estimate_distance(
        &self,
        source: &dyn LabeledSource,
        tol: f64,
        conf: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Rational> {
        let samples = hoeffding_samples(tol, conf)?;
        if let Some(v) = self.max_var() {
            if v >= source.arity() {
                return Err(Error::CoordinateOutOfRange {
                    index: v,
                    arity: source.arity(),
                });
            }
        }
        let mut wrong = 0u64;
        for _ in 0..samples {
            let (y, l) = source.sample(rng);
            if self.eval_unchecked(&y) != l {
                wrong += 1;
            }
        }
        Ok(Rational::new(BigInt::from(wrong), BigInt::from(samples)))
    }

    /// Prefix serialization: `q<i>` (1-based coordinate) followed by the
    /// 0-child and 1-child, or `l0` / `l1` for leaves.
    pub fn to_prefix(&self) -> String {
        let mut tokens = Vec::new();
        fn go(t: &DecisionTree, out: &mut Vec<String>) {
            match &t.kind {
                Kind::Leaf(b) => out.push(if *b { "l1".into() } else { "l0".into() }),
                Kind::Query { var, zero, one } => {
                    out.push(format!("q{}", var + 1));
                    go(zero, out);
                    go(one, out);
                }
            }
        }
        go(self, &mut tokens);
        tokens.join(" ")
    }

    pub fn parse_prefix(text: &str) -> Result<DecisionTree> {
        let mut tokens = text.split_whitespace();
        fn go<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<DecisionTree> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::parse(1, "tree ended early"))?;
            match tok {
                "l0" => Ok(DecisionTree::leaf(false)),
                "l1" => Ok(DecisionTree::leaf(true)),
                _ => {
                    let var = tok
                        .strip_prefix('q')
                        .and_then(|s| s.parse::<usize>().ok())
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| Error::parse(1, format!("bad tree token {tok:?}")))?;
                    let zero = go(tokens)?;
                    let one = go(tokens)?;
                    Ok(DecisionTree::query(var - 1, zero, one))
                }
            }
        }
        let tree = go(&mut tokens)?;
        if let Some(extra) = tokens.next() {
            return Err(Error::parse(1, format!("unexpected token {extra:?} after tree")));
        }
        Ok(tree)
    }
}

/// `⌈ln(2/(1−conf)) / (2·tol²)⌉`, the Hoeffding sample count for additive
/// error `tol` with probability at least `conf`.
pub fn hoeffding_samples(tol: f64, conf: f64) -> Result<u64> {
    if !(tol > 0.0) || !(conf > 0.0 && conf < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need tol > 0 and 0 < conf < 1, got tol = {tol}, conf = {conf}"
        )));
    }
    Ok(((2.0 / (1.0 - conf)).ln() / (2.0 * tol * tol)).ceil() as u64)
}

impl fmt::Debug for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DecisionTree({})", self.to_prefix())
    }
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_prefix())
    }
}

/// Uniformly shaped random reduced tree: each node becomes a leaf with
/// probability `leaf_prob` (always at `max_depth` or when no unused variable
/// remains), otherwise queries a random unused variable below `n`.
pub fn random_tree(n: usize, max_depth: usize, leaf_prob: f64, rng: &mut dyn RngCore) -> DecisionTree {
    use rand::Rng;
    fn go(n: usize, depth_left: usize, leaf_prob: f64, used: &mut Vec<usize>, rng: &mut dyn RngCore) -> DecisionTree {
        if depth_left == 0 || used.len() == n || rng.gen_bool(leaf_prob) {
            return DecisionTree::leaf(rng.gen());
        }
        let var = loop {
            let v = rng.gen_range(0..n);
            if !used.contains(&v) {
                break v;
            }
        };
        used.push(var);
        let zero = go(n, depth_left - 1, leaf_prob, used, rng);
        let one = go(n, depth_left - 1, leaf_prob, used, rng);
        used.pop();
        DecisionTree::query(var, zero, one)
    }
    go(n, max_depth, leaf_prob, &mut Vec::new(), rng)
}
