//! Decision-tree learners behind a common black-box interface: a labeled
//! example source, the input arity, a budget and a random generator in; a
//! tree (or a budget-exhausted error) out.

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::RngCore;
use thiserror::Error;

use crate::dtree::DecisionTree;
use crate::error::Error;
use crate::f2::BitVector;
use crate::parity::{for_each_subset_up_to, ParityIndexSet};
use crate::source::LabeledSource;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerBudget {
    /// Maximum number of leaves of the hypothesis.
    pub size_budget: u64,
    pub depth_budget: usize,
    pub sample_budget: usize,
    pub error_target: Rational,
    pub time_budget: Duration,
}

impl LearnerBudget {
    pub fn new(size_budget: u64, depth_budget: usize, sample_budget: usize, error_target: Rational) -> Result<Self, Error> {
        let budget = Self {
            size_budget,
            depth_budget,
            sample_budget,
            error_target,
            time_budget: Duration::from_secs(60),
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn with_time_budget(mut self, time_budget: Duration) -> Self {
        self.time_budget = time_budget;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.size_budget == 0 || self.sample_budget == 0 || self.time_budget.is_zero() {
            return Err(Error::InvalidParameter(
                "size, sample and time budgets must be positive".into(),
            ));
        }
        if self.error_target >= Rational::new(1.into(), 2.into()) {
            return Err(Error::InvalidParameter(format!(
                "error target {} must be below 1/2",
                self.error_target
            )));
        }
        Ok(())
    }

    /// Largest parity size whose complete tree fits in both budgets.
    pub fn max_parity_size(&self) -> usize {
        let by_size = 63 - self.size_budget.leading_zeros() as usize;
        self.depth_budget.min(by_size)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("learner budget exhausted: {reason}")]
    BudgetExhausted {
        reason: String,
        best: Option<DecisionTree>,
    },
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub trait Learner: Sync {
    fn name(&self) -> &str;

    fn learn(
        &self,
        source: &dyn LabeledSource,
        arity: usize,
        budget: &LearnerBudget,
        rng: &mut dyn RngCore,
    ) -> Result<DecisionTree, LearnError>;
}

/// Complete tree computing `χ_S`, querying `S` in ascending order.
pub fn parity_to_tree(s: &ParityIndexSet) -> DecisionTree {
    affine_parity_tree(s.indices(), false)
}

/// Complete tree computing `χ_S ⊕ negate`.
fn affine_parity_tree(vars: &[usize], negate: bool) -> DecisionTree {
    match vars.split_first() {
        None => DecisionTree::leaf(negate),
        Some((&v, rest)) => DecisionTree::query(
            v,
            affine_parity_tree(rest, negate),
            affine_parity_tree(rest, !negate),
        ),
    }
}

/// Samples stored column-wise: one bitset over the examples per coordinate,
/// so the predictions of `χ_S` on the whole sample are an XOR of columns.
struct ColumnSample {
    columns: Vec<Vec<u64>>,
    labels: Vec<u64>,
    count: usize,
}

impl ColumnSample {
    fn new(arity: usize, examples: &[(BitVector, bool)]) -> Self {
        let words = examples.len().div_ceil(64);
        let mut columns = vec![vec![0u64; words]; arity];
        let mut labels = vec![0u64; words];
        for (e, (y, l)) in examples.iter().enumerate() {
            let (w, b) = (e / 64, 1u64 << (e % 64));
            for c in y.iter_ones() {
                columns[c][w] |= b;
            }
            if *l {
                labels[w] |= b;
            }
        }
        Self {
            columns,
            labels,
            count: examples.len(),
        }
    }
}

/// Draws the sample, then scores every parity `χ_S` (and its complement) with
/// `|S| ≤ min(depth_budget, log₂ size_budget)` and returns the one with the
/// fewest training errors. Ties prefer smaller `|S|`, then lexicographically
/// smaller `S`, then the uncomplemented parity.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveParityLearner;

impl ExhaustiveParityLearner {
    /// The winning `(S, complemented, training errors)` on an explicit sample.
    pub fn best_parity(
        arity: usize,
        max_size: usize,
        examples: &[(BitVector, bool)],
        deadline: Option<Instant>,
    ) -> Result<(ParityIndexSet, bool, usize), LearnError> {
        let sample = ColumnSample::new(arity, examples);
        let words = sample.labels.len();
        let mut best: Option<(Vec<usize>, bool, usize)> = None;
        let mut pred = vec![0u64; words];
        let mut visited = 0u64;
        let mut timed_out = false;
        for_each_subset_up_to(arity, max_size, |s| {
            if timed_out {
                return;
            }
            visited += 1;
            if visited.is_multiple_of(256) {
                if let Some(d) = deadline {
                    if Instant::now() > d {
                        timed_out = true;
                        return;
                    }
                }
            }
            pred.iter_mut().for_each(|w| *w = 0);
            for &c in s {
                for (o, w) in pred.iter_mut().zip(&sample.columns[c]) {
                    *o ^= w;
                }
            }
            let errors: usize = pred
                .iter()
                .zip(&sample.labels)
                .map(|(p, l)| (p ^ l).count_ones() as usize)
                .sum();
            let (negate, errs) = if sample.count - errors < errors {
                (true, sample.count - errors)
            } else {
                (false, errors)
            };
            if best.as_ref().is_none_or(|(_, _, e)| errs < *e) {
                best = Some((s.to_vec(), negate, errs));
            }
        });
        let (s, negate, errs) = best.expect("the empty set is always visited");
        let result = (ParityIndexSet::new(s), negate, errs);
        if timed_out {
            return Err(LearnError::BudgetExhausted {
                reason: "time budget exceeded during parity enumeration".into(),
                best: Some(affine_parity_tree(result.0.indices(), result.1)),
            });
        }
        Ok(result)
    }
}

impl Learner for ExhaustiveParityLearner {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn learn(
        &self,
        source: &dyn LabeledSource,
        arity: usize,
        budget: &LearnerBudget,
        rng: &mut dyn RngCore,
    ) -> Result<DecisionTree, LearnError> {
        budget.validate()?;
        Error::check_len(arity, source.arity())?;
        let deadline = Instant::now() + budget.time_budget;
        let examples = source.sample_many(budget.sample_budget, rng);
        let (s, negate, _) = Self::best_parity(arity, budget.max_parity_size(), &examples, Some(deadline))?;
        Ok(affine_parity_tree(s.indices(), negate))
    }
}

/// Top-down greedy learner. Leaves are grown best-first: the leaf whose best
/// split removes the most training errors is split next (ties by creation
/// order, split coordinate ties by lowest index). Splitting continues through
/// zero-gain splits while the node is impure, so depth and size budgets are
/// the stopping rule.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyLearner;

struct GreedyLeaf {
    path: Vec<(usize, bool)>,
    examples: Vec<usize>,
}

impl GreedyLeaf {
    fn counts(&self, data: &[(BitVector, bool)]) -> (usize, usize) {
        let ones = self.examples.iter().filter(|&&e| data[e].1).count();
        (self.examples.len() - ones, ones)
    }

    /// `(gain, var)` of the best split, if any split is allowed.
    fn best_split(&self, data: &[(BitVector, bool)], arity: usize) -> Option<(usize, usize)> {
        let (zeros, ones) = self.counts(data);
        if zeros == 0 || ones == 0 {
            return None;
        }
        let before = zeros.min(ones);
        let mut best: Option<(usize, usize)> = None;
        for var in 0..arity {
            if self.path.iter().any(|&(v, _)| v == var) {
                continue;
            }
            let mut c = [[0usize; 2]; 2];
            for &e in &self.examples {
                c[usize::from(data[e].0.get(var))][usize::from(data[e].1)] += 1;
            }
            let after = c[0][0].min(c[0][1]) + c[1][0].min(c[1][1]);
            let gain = before - after;
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, var));
            }
        }
        best
    }
}

impl GreedyLearner {
    pub fn fit(arity: usize, budget: &LearnerBudget, data: &[(BitVector, bool)]) -> DecisionTree {
        let mut leaves = vec![GreedyLeaf {
            path: Vec::new(),
            examples: (0..data.len()).collect(),
        }];
        let mut done: Vec<GreedyLeaf> = Vec::new();
        while (leaves.len() + done.len()) < budget.size_budget as usize {
            let mut pick: Option<(usize, usize, usize)> = None;
            let mut i = 0;
            while i < leaves.len() {
                let leaf = &leaves[i];
                let split = if leaf.path.len() < budget.depth_budget {
                    leaf.best_split(data, arity)
                } else {
                    None
                };
                match split {
                    None => {
                        done.push(leaves.remove(i));
                        continue;
                    }
                    Some((gain, var)) => {
                        if pick.is_none_or(|(g, _, _)| gain > g) {
                            pick = Some((gain, i, var));
                        }
                    }
                }
                i += 1;
            }
            let Some((_, i, var)) = pick else { break };
            let leaf = leaves.remove(i);
            let (ex0, ex1): (Vec<usize>, Vec<usize>) =
                leaf.examples.iter().partition(|&&e| !data[e].0.get(var));
            for (branch, examples) in [(false, ex0), (true, ex1)] {
                let mut path = leaf.path.clone();
                path.push((var, branch));
                leaves.push(GreedyLeaf { path, examples });
            }
        }
        done.extend(leaves);
        build_from_leaves(&done, data, &[])
    }
}

fn build_from_leaves(leaves: &[GreedyLeaf], data: &[(BitVector, bool)], prefix: &[(usize, bool)]) -> DecisionTree {
    let here: Vec<&GreedyLeaf> = leaves
        .iter()
        .filter(|l| l.path.starts_with(prefix))
        .collect();
    if let [leaf] = here[..] {
        if leaf.path.len() == prefix.len() {
            let (zeros, ones) = leaf.counts(data);
            return DecisionTree::leaf(ones > zeros);
        }
    }
    let var = here
        .iter()
        .find(|l| l.path.len() > prefix.len())
        .map(|l| l.path[prefix.len()].0)
        .expect("internal prefix has a deeper leaf");
    let mut p0 = prefix.to_vec();
    p0.push((var, false));
    let mut p1 = prefix.to_vec();
    p1.push((var, true));
    DecisionTree::query(var, build_from_leaves(leaves, data, &p0), build_from_leaves(leaves, data, &p1))
}

impl Learner for GreedyLearner {
    fn name(&self) -> &str {
        "greedy"
    }

    fn learn(
        &self,
        source: &dyn LabeledSource,
        arity: usize,
        budget: &LearnerBudget,
        rng: &mut dyn RngCore,
    ) -> Result<DecisionTree, LearnError> {
        budget.validate()?;
        Error::check_len(arity, source.arity())?;
        let started = Instant::now();
        let data = source.sample_many(budget.sample_budget, rng);
        let tree = Self::fit(arity, budget, &data);
        if started.elapsed() > budget.time_budget {
            return Err(LearnError::BudgetExhausted {
                reason: "time budget exceeded while growing the tree".into(),
                best: Some(tree),
            });
        }
        Ok(tree)
    }
}

/// Ignores its examples and returns `parity_to_tree(S)`. Used to drive the
/// reduction with a known-good hypothesis.
#[derive(Clone, Debug)]
pub struct PlantedLearner {
    target: ParityIndexSet,
}

impl PlantedLearner {
    pub fn new(target: ParityIndexSet) -> Self {
        Self { target }
    }
}

impl Learner for PlantedLearner {
    fn name(&self) -> &str {
        "planted"
    }

    fn learn(
        &self,
        _source: &dyn LabeledSource,
        arity: usize,
        _budget: &LearnerBudget,
        _rng: &mut dyn RngCore,
    ) -> Result<DecisionTree, LearnError> {
        self.target.check_arity(arity)?;
        Ok(parity_to_tree(&self.target))
    }
}

/// Learner selectable by name from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerKind {
    Exhaustive,
    Greedy,
}

impl LearnerKind {
    pub fn learner(self) -> Box<dyn Learner> {
        match self {
            LearnerKind::Exhaustive => Box::new(ExhaustiveParityLearner),
            LearnerKind::Greedy => Box::new(GreedyLearner),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearnerKind::Exhaustive => "exhaustive",
            LearnerKind::Greedy => "greedy",
        })
    }
}

/// Fraction of `examples` on which `tree` errs, as a float.
pub fn empirical_error(tree: &DecisionTree, examples: &[(BitVector, bool)]) -> f64 {
    let wrong = examples
        .iter()
        .filter(|(y, l)| tree.eval_unchecked(y) != *l)
        .count();
    (Rational::new(wrong.into(), examples.len().max(1).into()))
        .to_f64()
        .unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::source::FinitePmf;
    use num_traits::Zero;

    fn budget(size: u64, depth: usize, samples: usize) -> LearnerBudget {
        LearnerBudget::new(size, depth, samples, Rational::zero()).unwrap()
    }

    fn cube_source(n: usize, label: impl Fn(&BitVector) -> bool) -> FinitePmf {
        FinitePmf::uniform(
            n,
            (0..1u64 << n)
                .map(|w| {
                    let x = BitVector::from_word(n, w);
                    let l = label(&x);
                    (x, l)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parity_tree_examples() {
        assert_eq!(parity_to_tree(&ParityIndexSet::empty()), DecisionTree::leaf(false));
        let d = parity_to_tree(&ParityIndexSet::new([2]));
        assert_eq!(d, DecisionTree::query(2, DecisionTree::leaf(false), DecisionTree::leaf(true)));
        let s = ParityIndexSet::new([1, 4, 6]);
        let t = parity_to_tree(&s);
        assert_eq!((t.depth(), t.size()), (3, 8));
        for w in 0..128u64 {
            let y = BitVector::from_word(7, w);
            assert_eq!(t.eval(&y).unwrap(), s.eval(&y));
        }
    }

    #[test]
    fn budget_validation() {
        assert!(LearnerBudget::new(0, 1, 1, Rational::zero()).is_err());
        assert!(LearnerBudget::new(1, 1, 0, Rational::zero()).is_err());
        assert!(LearnerBudget::new(1, 1, 1, Rational::new(1.into(), 2.into())).is_err());
        assert_eq!(budget(16, 9, 1).max_parity_size(), 4);
        assert_eq!(budget(17, 9, 1).max_parity_size(), 4);
        assert_eq!(budget(1 << 20, 3, 1).max_parity_size(), 3);
    }

    #[test]
    fn exhaustive_recovers_planted_parity() {
        let arity = 12;
        let depth = 3;
        // 8 · depth · log2(arity) ≈ 86; use 200 examples
        for seed in 0..100u64 {
            let mut rng = seeded_rng(seed);
            let planted = ParityIndexSet::new(rand::seq::index::sample(&mut rng, arity, 1 + (seed as usize % depth)));
            let src = cube_source(arity, |x| planted.eval(x));
            let t = ExhaustiveParityLearner
                .learn(&src, arity, &budget(1 << depth, depth, 200), &mut rng)
                .unwrap();
            assert_eq!(t, parity_to_tree(&planted), "seed {seed}");
        }
    }

    #[test]
    fn exhaustive_depth_zero_picks_better_constant() {
        let src = cube_source(3, |x| x.weight() >= 1); // 7 of 8 ones
        let mut rng = seeded_rng(1);
        let t = ExhaustiveParityLearner.learn(&src, 3, &budget(4, 0, 400), &mut rng).unwrap();
        assert_eq!(t, DecisionTree::leaf(true));
        let src = cube_source(3, |x| x.weight() == 3);
        let t = ExhaustiveParityLearner.learn(&src, 3, &budget(4, 0, 400), &mut rng).unwrap();
        assert_eq!(t, DecisionTree::leaf(false));
    }

    #[test]
    fn exhaustive_is_deterministic() {
        let src = cube_source(8, |x| x.get(1) ^ x.get(5) ^ (x.weight() % 3 == 0));
        let b = budget(8, 3, 300);
        let a = ExhaustiveParityLearner.learn(&src, 8, &b, &mut seeded_rng(4)).unwrap();
        let c = ExhaustiveParityLearner.learn(&src, 8, &b, &mut seeded_rng(4)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn exhaustive_is_optimal_on_its_sample() {
        let mut rng = seeded_rng(31);
        let src = cube_source(7, |x| x.get(0) ^ (x.weight() > 4));
        let examples = src.sample_many(150, &mut rng);
        let (s, negate, errs) = ExhaustiveParityLearner::best_parity(7, 3, &examples, None).unwrap();
        let tree = affine_parity_tree(s.indices(), negate);
        let direct = examples.iter().filter(|(y, l)| tree.eval(y).unwrap() != *l).count();
        assert_eq!(direct, errs);
        for_each_subset_up_to(7, 3, |sub| {
            let t = parity_to_tree(&ParityIndexSet::new(sub.iter().copied()));
            let e = examples.iter().filter(|(y, l)| t.eval(y).unwrap() != *l).count();
            assert!(errs <= e);
        });
    }

    #[test]
    fn exhaustive_reports_time_exhaustion() {
        let src = cube_source(10, |x| x.get(0));
        let b = budget(1 << 10, 10, 50).with_time_budget(Duration::from_nanos(1));
        let err = ExhaustiveParityLearner.learn(&src, 10, &b, &mut seeded_rng(0)).unwrap_err();
        assert!(matches!(err, LearnError::BudgetExhausted { best: Some(_), .. }));
    }

    #[test]
    fn greedy_pure_sample_gives_single_leaf() {
        let src = cube_source(5, |_| true);
        let t = GreedyLearner.learn(&src, 5, &budget(16, 4, 100), &mut seeded_rng(2)).unwrap();
        assert_eq!(t, DecisionTree::leaf(true));
    }

    #[test]
    fn greedy_respects_budgets() {
        let src = cube_source(8, |x| x.get(0) ^ x.get(3) ^ x.get(6));
        let mut rng = seeded_rng(3);
        for size in 1..=20u64 {
            for depth in 0..=5 {
                let t = GreedyLearner.learn(&src, 8, &budget(size, depth, 300), &mut rng).unwrap();
                assert!(t.size() as u64 <= size);
                assert!(t.depth() <= depth);
            }
        }
    }

    #[test]
    fn greedy_first_split_finds_dictator() {
        for seed in 0..100u64 {
            let mut rng = seeded_rng(seed);
            let i = (seed % 10) as usize;
            let src = cube_source(10, |x| x.get(i));
            let t = GreedyLearner.learn(&src, 10, &budget(8, 3, 1000), &mut rng).unwrap();
            match t.view() {
                crate::dtree::TreeView::Query { var, .. } => assert_eq!(var, i, "seed {seed}"),
                _ => panic!("greedy returned a leaf"),
            }
            assert_eq!(t.size(), 2);
        }
    }

    #[test]
    fn planted_learner_ignores_examples() {
        let s = ParityIndexSet::new([0, 3]);
        let learner = PlantedLearner::new(s.clone());
        let src = cube_source(4, |_| false);
        let t = learner.learn(&src, 4, &budget(4, 2, 10), &mut seeded_rng(0)).unwrap();
        assert_eq!(t, parity_to_tree(&s));
        assert!(learner.learn(&src, 3, &budget(4, 2, 10), &mut seeded_rng(0)).is_err());
    }
}
