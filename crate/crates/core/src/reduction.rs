//! From a syndrome-decoding instance to a decision-tree learning problem and
//! back.
//!
//! The lifted learning problem is `Unif(Span(D))_⊕ℓ` labeled by
//! `(f^ext)_⊕ℓ`, where `D` is the set of rows of `H` labeled by `t`. A sparse
//! solution of `Hx = t` is exactly a parity consistent with `D`, and its lift
//! is a `kℓ`-parity for the learning problem.
//!
//! The search pipeline learns a tree, prunes it, ranks the parities supported
//! on its paths by agreement with the target, unlifts each candidate to a
//! base parity and accepts the first one that satisfies every constraint
//! exactly. Nothing probabilistic survives into a returned certificate.

use std::time::Duration;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::dtree::{hoeffding_samples, DecisionTree};
use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::gadget::{exact_lifted_agreement, unlift_parity, GadgetOracle, GadgetParams};
use crate::instance::{syndrome_to_labeled_set, Alpha, SyndromeInstance};
use crate::learners::{LearnError, Learner, LearnerBudget};
use crate::parity::ParityIndexSet;
use crate::source::{FinitePmf, LabeledSource};
use crate::span::{SpanOracle, DEFAULT_ENUMERATION_GUARD};
use crate::Rational;

/// Largest tree depth whose path-subset enumeration is attempted.
pub const EXTRACTION_DEPTH_GUARD: usize = 30;

/// Additive accuracy of each sampled candidate agreement.
pub const SAMPLED_AGREEMENT_TOLERANCE: f64 = 0.125;

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionConfig {
    /// Gadget block length `ℓ ≥ 2`.
    pub ell: usize,
    /// `c` in "prune at depth `c·⌈log₂ s⌉`".
    pub prune_constant: usize,
    /// Smallest advantage `γ` the sampled agreement backend must resolve.
    pub gamma_floor: Rational,
    /// Success probability demanded of every sampled estimate.
    pub confidence: f64,
    /// Examples handed to the learner.
    pub sample_budget: usize,
    /// Learner depth budget; `ℓ·k` when unset.
    pub learner_depth: Option<usize>,
    pub time_budget: Duration,
    /// Span dimensions up to this use exact agreement computations.
    pub exact_guard: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            ell: 2,
            prune_constant: 3,
            gamma_floor: Rational::new(1.into(), 8.into()),
            confidence: 0.999,
            sample_budget: 2000,
            learner_depth: None,
            time_budget: Duration::from_secs(60),
            exact_guard: DEFAULT_ENUMERATION_GUARD,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ell < 2 {
            return Err(Error::InvalidParameter(format!("ell must be at least 2, got {}", self.ell)));
        }
        if self.prune_constant < 2 {
            return Err(Error::InvalidParameter(format!(
                "prune constant must be at least 2, got {}",
                self.prune_constant
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.gamma_floor <= Rational::from_integer(0.into()) {
            return Err(Error::InvalidParameter("gamma floor must be positive".into()));
        }
        Ok(())
    }

    fn learner_depth_for(&self, k: usize) -> usize {
        self.learner_depth.unwrap_or(self.ell * k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMeta {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    pub k: usize,
    pub alpha: Alpha,
}

/// The lifted learning problem built from a syndrome instance.
#[derive(Clone, Debug)]
pub struct LearningInstance {
    pub oracle: GadgetOracle<SpanOracle>,
    pub meta: InstanceMeta,
}

impl LearningInstance {
    pub fn span(&self) -> &SpanOracle {
        self.oracle.base()
    }

    pub fn params(&self) -> &GadgetParams {
        self.oracle.params()
    }

    pub fn arity(&self) -> usize {
        self.oracle.arity()
    }
}

/// Builds `Unif(Span(D))_⊕ℓ` labeled by `(f^ext)_⊕ℓ`. Dependent rows of `H`
/// are dropped first; a contradictory dependent row is an error.
pub fn build_learning_instance(inst: &SyndromeInstance, cfg: &ReductionConfig) -> Result<LearningInstance> {
    cfg.validate()?;
    let inst = inst.normalize()?;
    let set = syndrome_to_labeled_set(&inst)?;
    let span = SpanOracle::new(set)?;
    let params = GadgetParams::new(cfg.ell, inst.n())?;
    Ok(LearningInstance {
        oracle: GadgetOracle::new(params, span)?,
        meta: InstanceMeta {
            n: inst.n(),
            m: inst.m(),
            ell: cfg.ell,
            k: inst.k(),
            alpha: inst.alpha(),
        },
    })
}

/// Acceptance thresholds of the decision procedure for given `ℓ, α, k`.
///
/// With `a = 2^{-ℓαk/6}`: the No-case error floor is `β = 1/2 − a`, the target
/// error is `ε = 1/2 − 2a`, and distances are estimated to `τ = (β − ε)/3`.
/// Hypotheses larger than `2^{⌊ℓαk/3⌋}` leaves are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct DecideThresholds {
    pub size_cap: u64,
    pub beta: f64,
    pub epsilon: f64,
    pub tau: f64,
}

impl DecideThresholds {
    pub fn new(ell: usize, alpha: Alpha, k: usize) -> Self {
        let num = ell as u128 * k as u128 * *alpha.numer() as u128;
        let den = 3 * *alpha.denom() as u128;
        let size_exp = (num / den).min(63) as u32;
        let ell_alpha_k = ell as f64 * k as f64 * (*alpha.numer() as f64 / *alpha.denom() as f64);
        let a = (-ell_alpha_k / 6.0).exp2();
        let beta = 0.5 - a;
        let epsilon = 0.5 - 2.0 * a;
        Self {
            size_cap: 1u64 << size_exp,
            beta,
            epsilon,
            tau: (beta - epsilon) / 3.0,
        }
    }

    pub fn accept_distance(&self) -> f64 {
        self.epsilon + self.tau
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecideReason {
    Accepted,
    /// The learner returned no hypothesis within its budget.
    LearnerFailed,
    /// The hypothesis exceeded the size cap.
    SizeGate,
    /// The estimated distance was above the acceptance threshold.
    DistanceGate,
    /// A dependent row of `H` carries a contradictory label.
    Unsatisfiable,
}

#[derive(Clone, Debug)]
pub struct DecideOutcome {
    pub answer: Answer,
    pub reason: DecideReason,
    pub thresholds: DecideThresholds,
    pub hypothesis: Option<DecisionTree>,
    pub estimated_distance: Option<f64>,
}

/// Decides whether `Hx = t` has a `k`-sparse solution (Yes) or no
/// `αk`-sparse one (No), by learning the lifted problem and checking the
/// hypothesis' size and estimated error.
pub fn decide(
    inst: &SyndromeInstance,
    cfg: &ReductionConfig,
    learner: &dyn Learner,
    rng: &mut dyn RngCore,
) -> Result<DecideOutcome> {
    let thresholds = DecideThresholds::new(cfg.ell, inst.alpha(), inst.k());
    let no = |reason, thresholds| DecideOutcome {
        answer: Answer::No,
        reason,
        thresholds,
        hypothesis: None,
        estimated_distance: None,
    };
    let learning = match build_learning_instance(inst, cfg) {
        Ok(l) => l,
        Err(Error::UnsatisfiableByAnyParity) => return Ok(no(DecideReason::Unsatisfiable, thresholds)),
        Err(e) => return Err(e),
    };
    let budget = LearnerBudget {
        size_budget: thresholds.size_cap,
        depth_budget: cfg.ell * inst.k(),
        sample_budget: cfg.sample_budget,
        error_target: BigRational::from_f64(thresholds.epsilon.clamp(0.0, 0.499_999))
            .expect("finite threshold"),
        time_budget: cfg.time_budget,
    };
    let tree = match learner.learn(&learning.oracle, learning.arity(), &budget, rng) {
        Ok(t) => t,
        Err(LearnError::BudgetExhausted { .. }) => return Ok(no(DecideReason::LearnerFailed, thresholds)),
        Err(LearnError::Invalid(e)) => return Err(e),
    };
    if tree.size() as u64 > thresholds.size_cap {
        return Ok(DecideOutcome {
            hypothesis: Some(tree),
            ..no(DecideReason::SizeGate, thresholds)
        });
    }
    let estimate = tree
        .estimate_distance(&learning.oracle, thresholds.tau, cfg.confidence, rng)?
        .to_f64()
        .expect("finite ratio");
    let accept = estimate <= thresholds.accept_distance();
    Ok(DecideOutcome {
        answer: if accept { Answer::Yes } else { Answer::No },
        reason: if accept {
            DecideReason::Accepted
        } else {
            DecideReason::DistanceGate
        },
        thresholds,
        hypothesis: Some(tree),
        estimated_distance: Some(estimate),
    })
}

/// How `extract_parity` measures a candidate's agreement with the lifted
/// target.
#[derive(Clone, Copy, Debug)]
pub enum AgreementBackend<'a> {
    /// Exact agreement under `base_⊕ℓ`.
    Exact {
        base: &'a FinitePmf,
        params: GadgetParams,
    },
    /// Empirical agreement on lifted labeled examples.
    Sampled { examples: &'a [(BitVector, bool)] },
}

impl AgreementBackend<'_> {
    fn agreement(&self, s: &ParityIndexSet) -> Result<Rational> {
        match self {
            AgreementBackend::Exact { base, params } => exact_lifted_agreement(base, s, params),
            AgreementBackend::Sampled { examples } => {
                let hits = examples.iter().filter(|(y, l)| s.eval(y) == *l).count();
                Ok(Rational::new(
                    BigInt::from(hits),
                    BigInt::from(examples.len().max(1)),
                ))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub set: ParityIndexSet,
    pub agreement: Rational,
}

/// Ranks every parity supported on a root-to-leaf path of `tree` by agreement
/// with the target, best first; ties go to smaller, then lexicographically
/// smaller sets.
///
/// If `tree` errs with probability at most `1/2 − γ` against a target whose
/// parities all have nonnegative correlation with it (as lifted linear
/// labelings do), the first candidate agrees with probability at least
/// `1/2 + γ/4^depth`.
pub fn extract_parity(tree: &DecisionTree, backend: AgreementBackend<'_>) -> Result<Vec<Candidate>> {
    if tree.depth() > EXTRACTION_DEPTH_GUARD {
        return Err(Error::GuardExceeded {
            what: "tree depth",
            value: tree.depth(),
            limit: EXTRACTION_DEPTH_GUARD,
        });
    }
    let sets: Vec<ParityIndexSet> = tree.path_support_sets().into_iter().collect();
    let mut ranked = sets
        .into_par_iter()
        .map(|set| {
            let agreement = backend.agreement(&set)?;
            Ok(Candidate { set, agreement })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.agreement
            .cmp(&a.agreement)
            .then_with(|| a.set.size_lex_cmp(&b.set))
    });
    Ok(ranked)
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub solution: BitVector,
    pub hypothesis: DecisionTree,
    pub pruned: DecisionTree,
    /// The lifted candidate that unlifted to the solution.
    pub candidate: ParityIndexSet,
    pub candidates_tried: usize,
    /// `⌊c·⌈log₂ s⌉ / ℓ⌋`, the largest accepted sparsity.
    pub sparsity_bound: usize,
    pub exact_backend: bool,
}

#[derive(Debug, Clone, Error)]
pub enum SearchFailure {
    #[error(transparent)]
    Input(#[from] Error),
    #[error("learner failed: {0}")]
    Learner(LearnError),
    #[error("none of the {tried} candidate parities satisfies every constraint")]
    NoCandidateVerified {
        tried: usize,
        hypothesis: DecisionTree,
    },
}

/// `⌈log₂ s⌉`, with `⌈log₂ 1⌉ = 0`.
pub fn ceil_log2(s: usize) -> usize {
    if s <= 1 {
        0
    } else {
        (usize::BITS - (s - 1).leading_zeros()) as usize
    }
}

/// Learns the lifted problem and turns the hypothesis into an exact sparse
/// solution of `Hx = t`, or fails.
pub fn search(
    inst: &SyndromeInstance,
    cfg: &ReductionConfig,
    learner: &dyn Learner,
    rng: &mut dyn RngCore,
) -> Result<SearchOutcome, SearchFailure> {
    let learning = build_learning_instance(inst, cfg)?;
    let depth = cfg.learner_depth_for(inst.k());
    let budget = LearnerBudget {
        size_budget: 1u64 << depth.min(63),
        depth_budget: depth,
        sample_budget: cfg.sample_budget,
        error_target: Rational::new(1.into(), 2.into()) - &cfg.gamma_floor,
        time_budget: cfg.time_budget,
    };
    let tree = learner
        .learn(&learning.oracle, learning.arity(), &budget, rng)
        .map_err(SearchFailure::Learner)?;

    let prune_depth = cfg.prune_constant * ceil_log2(tree.size());
    let pruned = tree.prune(prune_depth);
    let sparsity_bound = prune_depth / cfg.ell;

    let exact = learning.span().dimension() <= cfg.exact_guard;
    let pmf;
    let examples;
    let backend = if exact {
        pmf = learning.span().to_pmf()?;
        AgreementBackend::Exact {
            base: &pmf,
            params: *learning.params(),
        }
    } else {
        // Every lifted parity agrees with the target w.p. exactly 1/2 or 1,
        // so resolving agreements to 1/8 separates the two.
        let candidates = pruned.path_support_sets().len().max(1);
        let tol = SAMPLED_AGREEMENT_TOLERANCE;
        let per_candidate_conf = 1.0 - (1.0 - cfg.confidence) / candidates as f64;
        let count = hoeffding_samples(tol, per_candidate_conf)?;
        examples = learning.oracle.sample_many(count as usize, rng);
        AgreementBackend::Sampled { examples: &examples }
    };
    let ranked = extract_parity(&pruned, backend)?;

    let set = learning.span().base();
    for (tried, cand) in ranked.iter().enumerate() {
        let s_star = unlift_parity(&cand.set, learning.params())?;
        if s_star.len() <= sparsity_bound && set.is_consistent_with(&s_star) {
            let solution = s_star.to_vector(inst.n())?;
            debug_assert!(inst.is_solution(&solution).unwrap_or(false));
            return Ok(SearchOutcome {
                solution,
                hypothesis: tree,
                pruned,
                candidate: cand.set.clone(),
                candidates_tried: tried + 1,
                sparsity_bound,
                exact_backend: exact,
            });
        }
    }
    Err(SearchFailure::NoCandidateVerified {
        tried: ranked.len(),
        hypothesis: tree,
    })
}

/// `Hx = t` and `sparsity(x) ≤ k_max`.
pub fn verify_certificate(inst: &SyndromeInstance, x: &BitVector, k_max: usize) -> Result<bool> {
    Error::check_len(inst.n(), x.len())?;
    Ok(x.weight() <= k_max && inst.is_solution(x)?)
}

#[cfg(test)]
mod tests {
    use num_traits::{One, Zero};

    use super::*;
    use crate::dtree::random_tree;
    use crate::f2::BitMatrix;
    use crate::gadget::{exact_lifted_distance, lift_parity};
    use crate::instance::{brute_force_nearest, random_planted};
    use crate::learners::{parity_to_tree, ExhaustiveParityLearner, PlantedLearner};
    use crate::rng::seeded_rng;

    fn cfg() -> ReductionConfig {
        ReductionConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(ReductionConfig { ell: 1, ..cfg() }.validate().is_err());
        assert!(ReductionConfig { prune_constant: 1, ..cfg() }.validate().is_err());
        assert!(ReductionConfig { confidence: 1.0, ..cfg() }.validate().is_err());
    }

    #[test]
    fn thresholds_for_standard_parameters() {
        let th = DecideThresholds::new(2, Alpha::from_integer(3), 2);
        assert_eq!(th.size_cap, 16);
        assert_eq!(th.beta, 0.25);
        assert_eq!(th.epsilon, 0.0);
        assert!((th.tau - 1.0 / 12.0).abs() < 1e-15);
        assert!(th.epsilon < th.beta && th.epsilon + th.tau < th.beta);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            [1, 2, 3, 4, 5, 16, 17].map(ceil_log2),
            [0, 1, 2, 2, 3, 4, 5]
        );
    }

    #[test]
    fn yes_instance_oracle_is_a_lifted_parity() {
        let (inst, x) = random_planted(10, 6, 2, 3).unwrap();
        let learning = build_learning_instance(&inst, &cfg()).unwrap();
        let lifted = lift_parity(&ParityIndexSet::from_vector(&x), learning.params()).unwrap();
        let mut rng = seeded_rng(1);
        for _ in 0..500 {
            let (y, b) = learning.oracle.sample(&mut rng);
            assert_eq!(y.len(), 20);
            assert_eq!(lifted.eval(&y), b);
        }
    }

    #[test]
    fn empty_instance_oracle_emits_even_blocks() {
        let inst = SyndromeInstance::new(BitMatrix::zeros(0, 4), BitVector::zeros(0), 0, Alpha::from_integer(1)).unwrap();
        let learning = build_learning_instance(&inst, &ReductionConfig { ell: 3, ..cfg() }).unwrap();
        assert_eq!(learning.arity(), 12);
        let mut rng = seeded_rng(2);
        for _ in 0..200 {
            let (y, b) = learning.oracle.sample(&mut rng);
            assert!(!b);
            for i in 0..4 {
                assert_eq!((3 * i..3 * i + 3).filter(|&c| y.get(c)).count() % 2, 0);
            }
        }
    }

    #[test]
    fn decide_answers_yes_on_planted_instance() {
        let (inst, _) = random_planted(14, 10, 2, 8).unwrap();
        let inst = inst.with_alpha(Alpha::from_integer(3)).unwrap();
        let out = decide(&inst, &cfg(), &ExhaustiveParityLearner, &mut seeded_rng(8)).unwrap();
        assert_eq!(out.answer, Answer::Yes);
        assert_eq!(out.estimated_distance, Some(0.0));
    }

    #[test]
    fn decide_answers_no_when_no_sparse_solution_exists() {
        let mut rng = seeded_rng(40);
        let inst = loop {
            let h = crate::instance::random_full_rank(&mut rng, 12, 12);
            let t = crate::instance::random_vector(&mut rng, 12);
            let inst = SyndromeInstance::new(h, t, 2, Alpha::from_integer(3)).unwrap();
            if brute_force_nearest(&inst, 6).unwrap().is_none() {
                break inst;
            }
        };
        let out = decide(&inst, &cfg(), &ExhaustiveParityLearner, &mut rng).unwrap();
        assert_eq!(out.answer, Answer::No);
        assert_eq!(out.reason, DecideReason::DistanceGate);
    }

    struct OversizedLearner;

    impl Learner for OversizedLearner {
        fn name(&self) -> &str {
            "oversized"
        }

        fn learn(
            &self,
            _: &dyn LabeledSource,
            arity: usize,
            _: &LearnerBudget,
            _: &mut dyn RngCore,
        ) -> Result<DecisionTree, LearnError> {
            // χ over the first six coordinates: 64 leaves.
            Ok(parity_to_tree(&ParityIndexSet::new(0..6.min(arity))))
        }
    }

    #[test]
    fn decide_rejects_oversized_hypotheses() {
        let (inst, _) = random_planted(14, 10, 2, 1).unwrap();
        let inst = inst.with_alpha(Alpha::from_integer(3)).unwrap();
        let out = decide(&inst, &cfg(), &OversizedLearner, &mut seeded_rng(0)).unwrap();
        assert_eq!(out.answer, Answer::No);
        assert_eq!(out.reason, DecideReason::SizeGate);
    }

    #[test]
    fn decide_on_contradictory_rows_is_no() {
        let h = BitMatrix::from_strs(&["110", "110"]).unwrap();
        let inst = SyndromeInstance::new(h, BitVector::parse_bits("10").unwrap(), 1, Alpha::from_integer(3)).unwrap();
        let out = decide(&inst, &cfg(), &ExhaustiveParityLearner, &mut seeded_rng(0)).unwrap();
        assert_eq!((out.answer, out.reason), (Answer::No, DecideReason::Unsatisfiable));
    }

    #[test]
    fn extract_parity_of_parity_tree() {
        let (inst, x) = random_planted(8, 5, 2, 4).unwrap();
        let learning = build_learning_instance(&inst, &cfg()).unwrap();
        let pmf = learning.span().to_pmf().unwrap();
        let s = lift_parity(&ParityIndexSet::from_vector(&x), learning.params()).unwrap();
        let ranked = extract_parity(
            &parity_to_tree(&s),
            AgreementBackend::Exact { base: &pmf, params: *learning.params() },
        )
        .unwrap();
        assert_eq!(ranked.len(), 16);
        assert_eq!(ranked[0].set, s);
        assert!(ranked[0].agreement.is_one());
    }

    #[test]
    fn extract_parity_of_constant_tree_is_a_tie() {
        let (inst, _) = random_planted(8, 5, 2, 4).unwrap();
        let learning = build_learning_instance(&inst, &cfg()).unwrap();
        let pmf = learning.span().to_pmf().unwrap();
        let ranked = extract_parity(
            &DecisionTree::leaf(true),
            AgreementBackend::Exact { base: &pmf, params: *learning.params() },
        )
        .unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].set, ParityIndexSet::empty());
        assert_eq!(ranked[0].agreement, Rational::new(1.into(), 2.into()));
    }

    #[test]
    fn extract_parity_guard() {
        let deep = (0..31).rev().fold(DecisionTree::leaf(false), |t, v| {
            DecisionTree::query(v, t, DecisionTree::leaf(true))
        });
        let pmf = FinitePmf::uniform(31, vec![(BitVector::zeros(31), false)]).unwrap();
        let err = extract_parity(&deep, AgreementBackend::Sampled { examples: &[] }).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
        drop(pmf);
    }

    #[test]
    fn extraction_advantage_on_random_trees() {
        let mut rng = seeded_rng(17);
        let mut checked = 0;
        while checked < 30 {
            let (inst, _) = random_planted(3, 2, 1, rng.next_u64()).unwrap();
            let learning = build_learning_instance(&inst, &cfg()).unwrap();
            let pmf = learning.span().to_pmf().unwrap();
            let params = *learning.params();
            let tree = random_tree(6, 4, 0.25, &mut rng);
            let dist = exact_lifted_distance(&pmf, &tree, &params).unwrap();
            let gamma = Rational::new(1.into(), 2.into()) - dist;
            if gamma <= Rational::zero() {
                continue;
            }
            checked += 1;
            let ranked = extract_parity(&tree, AgreementBackend::Exact { base: &pmf, params }).unwrap();
            let bound = Rational::new(1.into(), 2.into())
                + gamma / Rational::from_integer(BigInt::from(4u64.pow(tree.depth() as u32)));
            assert!(ranked[0].agreement >= bound, "tree {tree}");
        }
    }

    #[test]
    fn search_with_planted_learner_recovers_planted_solution() {
        for seed in 0..20 {
            let (inst, x) = random_planted(12, 8, 2, seed).unwrap();
            let lifted = lift_parity(&ParityIndexSet::from_vector(&x), &GadgetParams::new(2, 12).unwrap()).unwrap();
            let out = search(&inst, &cfg(), &PlantedLearner::new(lifted), &mut seeded_rng(seed)).unwrap();
            assert_eq!(out.solution, x);
            assert!(verify_certificate(&inst, &out.solution, 2).unwrap());
        }
    }

    #[test]
    fn search_with_exhaustive_learner() {
        let (inst, _) = random_planted(14, 10, 2, 5).unwrap();
        let out = search(&inst, &cfg(), &ExhaustiveParityLearner, &mut seeded_rng(5)).unwrap();
        assert!(inst.is_solution(&out.solution).unwrap());
        assert!(out.solution.weight() <= 2);
        assert!(out.exact_backend);
        let best = brute_force_nearest(&inst, 2).unwrap().unwrap();
        assert!(best.weight() <= out.solution.weight());
    }

    #[test]
    fn search_with_sampled_backend() {
        let (inst, _) = random_planted(14, 10, 2, 6).unwrap();
        let c = ReductionConfig { exact_guard: 4, ..cfg() };
        let out = search(&inst, &c, &ExhaustiveParityLearner, &mut seeded_rng(6)).unwrap();
        assert!(!out.exact_backend);
        assert!(verify_certificate(&inst, &out.solution, out.sparsity_bound).unwrap());
    }

    #[test]
    fn search_on_zero_syndrome_returns_zero() {
        let (inst, _) = random_planted(10, 6, 0, 9).unwrap();
        let out = search(&inst.with_k(2), &cfg(), &ExhaustiveParityLearner, &mut seeded_rng(1)).unwrap();
        assert!(out.solution.is_zero());
        assert_eq!(out.candidate, ParityIndexSet::empty());
    }

    #[test]
    fn search_fails_on_contradictory_rows() {
        let h = BitMatrix::from_strs(&["110", "110"]).unwrap();
        let inst = SyndromeInstance::new(h, BitVector::parse_bits("10").unwrap(), 1, Alpha::from_integer(1)).unwrap();
        let err = search(&inst, &cfg(), &ExhaustiveParityLearner, &mut seeded_rng(0)).unwrap_err();
        assert!(matches!(err, SearchFailure::Input(Error::UnsatisfiableByAnyParity)));
    }

    #[test]
    fn search_fails_when_learner_misses() {
        let (inst, x) = random_planted(10, 8, 2, 2).unwrap();
        let wrong = ParityIndexSet::new([2 * x.support()[0]]);
        let out = search(&inst, &cfg(), &PlantedLearner::new(wrong), &mut seeded_rng(0));
        assert!(matches!(out, Err(SearchFailure::NoCandidateVerified { .. })));
    }

    #[test]
    fn verify_certificate_examples() {
        let (inst, x) = random_planted(9, 5, 3, 12).unwrap();
        assert!(verify_certificate(&inst, &x, 3).unwrap());
        assert!(!verify_certificate(&inst, &x, 2).unwrap());
        if !inst.syndrome().is_zero() {
            assert!(!verify_certificate(&inst, &BitVector::zeros(9), 9).unwrap());
        }
        assert!(verify_certificate(&inst, &BitVector::zeros(8), 3).is_err());
    }
}
