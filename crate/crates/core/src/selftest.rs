//! Property suites behind `ncpdt selftest` and the acceptance test target.
//!
//! Each criterion checks a structural fact exactly on small enumerable
//! instances, or runs the pipelines end to end on seeded planted instances.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::dtree::{random_tree, DecisionTree, TreeView};
use crate::f2::BitVector;
use crate::gadget::{
    exact_lifted_agreement, exact_lifted_distance, exact_restriction_probability, is_block_complete,
    unlift_parity, within_pruning_bound, within_uniform_like_bound, GadgetParams, Restriction,
};
use crate::instance::{
    brute_force_nearest, random_full_rank, random_planted, Alpha, LabeledSet, SyndromeInstance,
};
use crate::learners::ExhaustiveParityLearner;
use crate::oracle;
use crate::parity::{for_each_subset_up_to, ParityIndexSet};
use crate::reduction::{
    ceil_log2, decide, extract_parity, search, verify_certificate, AgreementBackend, Answer, ReductionConfig,
};
use crate::rng::{seeded_rng, SeededRng};
use crate::source::{random_full_pmf, FinitePmf};
use crate::span::SpanOracle;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Reduced counts and sizes.
    Fast,
    /// Every criterion at its stated size.
    Full,
}

impl Level {
    fn pick<T>(self, fast: T, full: T) -> T {
        match self {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

/// A deliberate bug for checking that the suites notice one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Lifted agreement ignores partially covered blocks instead of
    /// collapsing to 1/2.
    Amplification,
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    /// The property held on every case checked.
    pub held: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.held && self.elapsed <= self.limit
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}): {} [{:.2}s of {}s]",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

/// Certificates returned by the end-to-end runs, rechecked independently.
#[derive(Clone, Debug, Default)]
pub struct SoundnessLog {
    pub certificates: usize,
    pub failures: Vec<String>,
}

impl SoundnessLog {
    fn record(&mut self, inst: &SyndromeInstance, x: &BitVector, context: &str) {
        self.certificates += 1;
        let ok = x.len() == inst.n()
            && inst
                .parity_check()
                .rows()
                .iter()
                .zip(inst.syndrome().iter())
                .all(|(row, t)| row.dot(x) == t);
        if !ok {
            self.failures.push(format!("{context}: x = {x}"));
        }
    }
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn timed(
    id: u8,
    name: &'static str,
    limit_secs: u64,
    body: impl FnOnce() -> (bool, String),
) -> CriterionReport {
    let start = Instant::now();
    let (held, detail) = body();
    CriterionReport {
        id,
        name,
        held,
        detail,
        elapsed: start.elapsed(),
        limit: Duration::from_secs(limit_secs),
    }
}

fn random_labeled_set(rng: &mut SeededRng, m: usize, n: usize) -> LabeledSet {
    let h = random_full_rank(rng, m, n);
    let labels = (0..m).map(|_| rng.gen()).collect();
    LabeledSet::new(n, h.into_rows(), labels).expect("shapes agree")
}

fn span_pmf(set: LabeledSet) -> FinitePmf {
    SpanOracle::new(set)
        .and_then(|o| o.to_pmf())
        .expect("independent rows, small dimension")
}

/// Exact `Pr[χ_S(x) = label]` under `pmf`, computed directly.
fn base_agreement(pmf: &FinitePmf, s: &ParityIndexSet) -> Rational {
    pmf.expect_halves(|x, label| {
        let chi = s.indices().iter().filter(|&&i| x.get(i)).count() % 2 == 1;
        if chi == label {
            2
        } else {
            0
        }
    })
}

/// Criterion 1: on `Span(D)` every parity disagrees with `f^ext` on exactly
/// 0 or exactly half of the points.
pub fn boosting_dichotomy(level: Level) -> CriterionReport {
    timed(1, "boosting dichotomy", 10, || {
        let sets = level.pick(50, 200);
        let mut checked = 0u64;
        let mut bad = Vec::new();
        for case in 0..sets {
            let mut rng = seeded_rng(1_000 + case);
            let n = rng.gen_range(1..=14);
            let m = rng.gen_range(0..=n.min(10));
            let set = random_labeled_set(&mut rng, m, n);
            let span = SpanOracle::new(set.clone()).expect("independent rows");
            for_each_subset_up_to(n, 4, |idx| {
                let s = ParityIndexSet::new(idx.iter().copied());
                let consistent = set
                    .points()
                    .iter()
                    .zip(set.labels())
                    .all(|(p, &l)| (idx.iter().filter(|&&i| p.get(i)).count() % 2 == 1) == l);
                let expected = if consistent { Rational::zero() } else { half() };
                match span.exact_disagreement(&s) {
                    Ok(d) if d == expected => {}
                    other => bad.push(format!("case {case}, S = {s}: {other:?}, expected {expected}")),
                }
                checked += 1;
            });
        }
        let detail = match bad.first() {
            None => format!("{sets} labeled sets, {checked} parities, all exactly 0 or 1/2"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

/// Criterion 2: every restriction of `D_⊕ℓ` to `|R|` coordinates has
/// probability at most `2^{-|R|(1-1/ℓ)}`; the closed form matches fiber
/// enumeration for `n ≤ 2`.
pub fn uniform_like_bound(level: Level) -> CriterionReport {
    timed(2, "uniform-like bound", 30, || {
        let max_n = level.pick(3, 4);
        let pmfs = 20;
        let mut checked = 0u64;
        let mut cross_checked = 0u64;
        let mut bad = Vec::new();
        let mut rng = seeded_rng(2);
        for n in 1..=max_n {
            for ell in [2, 3] {
                let params = GadgetParams::new(ell, n).expect("ell ≥ 1");
                let arity = params.lifted_arity();
                for _ in 0..pmfs {
                    let base = random_full_pmf(n, &mut rng);
                    let lifted = (n <= 2).then(|| oracle::lifted_pmf(&base, &params).expect("small"));
                    // Each coordinate is free, fixed to 0, or fixed to 1.
                    let mut digits = vec![0u8; arity];
                    loop {
                        let coords: Vec<usize> = (0..arity).filter(|&c| digits[c] != 0).collect();
                        let bits: Vec<bool> = coords.iter().map(|&c| digits[c] == 2).collect();
                        let values = BitVector::from_bools(&bits);
                        let rho = Restriction::new(coords, values).expect("distinct coordinates");
                        let p = exact_restriction_probability(&base, &rho, &params).expect("shapes agree");
                        if !within_uniform_like_bound(&p, rho.len(), ell) {
                            bad.push(format!("n={n} ell={ell} {rho:?}: p = {p}"));
                        }
                        if let Some(lifted) = &lifted {
                            if oracle::restriction_probability(lifted, &rho) != p {
                                bad.push(format!("n={n} ell={ell} {rho:?}: closed form {p} differs from enumeration"));
                            }
                            cross_checked += 1;
                        }
                        checked += 1;
                        let Some(pos) = digits.iter().position(|&d| d < 2) else {
                            break;
                        };
                        digits[pos] += 1;
                        digits[..pos].fill(0);
                    }
                }
            }
        }
        let detail = match bad.first() {
            None => format!("{checked} restrictions within bound, {cross_checked} matched fiber enumeration"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

fn faulty_lifted_agreement(base: &FinitePmf, s: &ParityIndexSet, params: &GadgetParams) -> Rational {
    base_agreement(base, &unlift_parity(s, params).expect("in range"))
}

/// Criterion 3: lifted agreement is exactly 1/2 unless `S` is block-complete,
/// in which case it equals the base agreement of `χ_{S★}`.
pub fn block_complete_correlation(level: Level, fault: Fault) -> CriterionReport {
    timed(3, "block-complete correlation", 30, || {
        let sources = level.pick(20, 100);
        let mut checked = 0u64;
        let mut cross_checked = 0u64;
        let mut bad = Vec::new();
        let mut rng = seeded_rng(3);
        for n in 1..=3 {
            for ell in [2, 3] {
                let params = GadgetParams::new(ell, n).expect("ell ≥ 1");
                let arity = params.lifted_arity();
                for _ in 0..sources {
                    let base = random_full_pmf(n, &mut rng);
                    let lifted = (n == 2 && ell == 2).then(|| oracle::lifted_pmf(&base, &params).expect("small"));
                    for word in 0u64..(1 << arity) {
                        let s = ParityIndexSet::from_vector(&BitVector::from_word(arity, word));
                        let got = match fault {
                            Fault::None => exact_lifted_agreement(&base, &s, &params).expect("in range"),
                            Fault::Amplification => faulty_lifted_agreement(&base, &s, &params),
                        };
                        let expected = if is_block_complete(&s, &params).expect("in range") {
                            base_agreement(&base, &unlift_parity(&s, &params).expect("in range"))
                        } else {
                            half()
                        };
                        if got != expected {
                            bad.push(format!("n={n} ell={ell} S={s}: {got}, expected {expected}"));
                        }
                        if let Some(lifted) = &lifted {
                            if oracle::agreement(lifted, &s) != got {
                                bad.push(format!("n={n} ell={ell} S={s}: {got} differs from enumeration"));
                            }
                            cross_checked += 1;
                        }
                        checked += 1;
                    }
                }
            }
        }
        let detail = match bad.first() {
            None => format!("{checked} lifted parities, {cross_checked} matched fiber enumeration"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

/// Criterion 4: a reduced depth-`d` tree has Fourier support inside its path
/// support sets, of which there are at most `4^d`.
pub fn fourier_support(_level: Level) -> CriterionReport {
    timed(4, "Fourier support", 10, || {
        let trees = 200;
        let mut rng = seeded_rng(4);
        let mut coefficients = 0usize;
        let mut bad = Vec::new();
        for case in 0..trees {
            let n = rng.gen_range(1..=8);
            let tree = random_tree(n, 4, 0.25, &mut rng);
            let reduced = tree.leaves().iter().all(|(path, _)| {
                let mut vars: Vec<usize> = path.iter().map(|&(v, _)| v).collect();
                vars.sort_unstable();
                vars.windows(2).all(|w| w[0] != w[1])
            });
            let support = tree.path_support_sets();
            let fourier = tree.exact_uniform_fourier(n).expect("n ≤ 8");
            coefficients += fourier.len();
            if !reduced {
                bad.push(format!("tree {case} is not reduced: {tree}"));
            }
            if let Some(s) = fourier.keys().find(|s| !support.contains(s)) {
                bad.push(format!("tree {case}: coefficient {s} outside path supports"));
            }
            if support.len() > 1 << (2 * tree.depth()) {
                bad.push(format!("tree {case}: {} supports at depth {}", support.len(), tree.depth()));
            }
        }
        let detail = match bad.first() {
            None => format!("{trees} trees, {coefficients} nonzero coefficients all on path supports"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

/// A path-shaped tree with `leaves` leaves over distinct random variables.
fn random_caterpillar(arity: usize, leaves: usize, rng: &mut SeededRng) -> DecisionTree {
    let vars = rand::seq::index::sample(rng, arity, leaves - 1).into_vec();
    let mut tree = DecisionTree::leaf(rng.gen());
    for &v in vars.iter().rev() {
        let side = DecisionTree::leaf(rng.gen());
        tree = if rng.gen() {
            DecisionTree::query(v, side, tree)
        } else {
            DecisionTree::query(v, tree, side)
        };
    }
    tree
}

/// Criterion 5: pruning a size-`s` tree at depth `c⌈log₂ s⌉` raises its error
/// under a lifted distribution by at most `s^{1-c(1-1/ℓ)}`.
pub fn pruning_bound(_level: Level) -> CriterionReport {
    timed(5, "pruning bound", 20, || {
        const N: usize = 8;
        const ELL: usize = 2;
        const C: usize = 3;
        let trees = 100;
        let params = GadgetParams::new(ELL, N).expect("ell ≥ 1");
        let mut rng = seeded_rng(5);
        let mut changed = 0;
        let mut bad = Vec::new();
        for case in 0..trees {
            let m = rng.gen_range(1..=N);
            let base = span_pmf(random_labeled_set(&mut rng, m, N));
            let tree = if case % 2 == 0 {
                loop {
                    let t = random_tree(params.lifted_arity(), 8, 0.3, &mut rng);
                    if t.size() <= 16 {
                        break t;
                    }
                }
            } else {
                let leaves = rng.gen_range(14..=16);
                random_caterpillar(params.lifted_arity(), leaves, &mut rng)
            };
            let s = tree.size();
            let pruned = tree.prune(C * ceil_log2(s));
            if pruned != tree {
                changed += 1;
            }
            let before = exact_lifted_distance(&base, &tree, &params).expect("in range");
            let after = exact_lifted_distance(&base, &pruned, &params).expect("in range");
            let delta = &after - &before;
            if !within_pruning_bound(&delta, s, C, ELL) {
                bad.push(format!("tree {case} (size {s}): error rose by {delta}"));
            }
        }
        let detail = match bad.first() {
            None => format!("{trees} trees, {changed} changed by pruning, all within s^(1-c(1-1/l))"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

/// Relabels every leaf with the majority target label among the points of
/// `lifted` that reach it (ties to 0).
fn majority_relabel(tree: &DecisionTree, lifted: &FinitePmf, path: &mut Vec<(usize, bool)>) -> DecisionTree {
    match tree.view() {
        TreeView::Leaf(_) => {
            let rho = Restriction::from_path(path);
            let ones = lifted.expect_halves(|y, l| if l && rho.matches(y) { 2 } else { 0 });
            let zeros = lifted.expect_halves(|y, l| if !l && rho.matches(y) { 2 } else { 0 });
            DecisionTree::leaf(ones > zeros)
        }
        TreeView::Query { var, zero, one } => {
            path.push((var, false));
            let z = majority_relabel(zero, lifted, path);
            path.pop();
            path.push((var, true));
            let o = majority_relabel(one, lifted, path);
            path.pop();
            DecisionTree::query(var, z, o)
        }
    }
}

/// Criterion 6: if `T` errs with probability at most `1/2 − γ`, its best path
/// parity agrees with the target with probability at least `1/2 + γ/4^d`.
pub fn extraction_advantage(_level: Level) -> CriterionReport {
    timed(6, "extraction advantage", 20, || {
        let cases = 100;
        let gamma_floor = Rational::new(1.into(), 8.into());
        let mut rng = seeded_rng(6);
        let mut accepted = 0;
        let mut attempts = 0;
        let mut bad = Vec::new();
        while accepted < cases && attempts < 100 * cases {
            attempts += 1;
            let n = rng.gen_range(2..=4);
            let m = rng.gen_range(1..=n);
            let params = GadgetParams::new(2, n).expect("ell ≥ 1");
            let base = span_pmf(random_labeled_set(&mut rng, m, n));
            let lifted = oracle::lifted_pmf(&base, &params).expect("arity ≤ 8");
            let shape = random_tree(params.lifted_arity(), 4, 0.2, &mut rng);
            let tree = majority_relabel(&shape, &lifted, &mut Vec::new());
            let gamma = half() - exact_lifted_distance(&base, &tree, &params).expect("in range");
            if gamma < gamma_floor {
                continue;
            }
            accepted += 1;
            let ranked = extract_parity(&tree, AgreementBackend::Exact { base: &base, params }).expect("depth ≤ 4");
            let top = &ranked[0];
            let bound = half() + &gamma / Rational::from_integer(BigInt::from(1u64 << (2 * tree.depth())));
            if top.agreement < bound {
                bad.push(format!("{tree}: top {} agrees {}, bound {bound}", top.set, top.agreement));
            }
            if oracle::agreement(&lifted, &top.set) != top.agreement {
                bad.push(format!("{tree}: agreement of {} differs from enumeration", top.set));
            }
        }
        if accepted < cases {
            bad.push(format!("only {accepted} of {cases} cases reached gamma >= 1/8"));
        }
        let detail = match bad.first() {
            None => format!("{cases} cases with gamma >= 1/8 ({attempts} drawn), top candidate above 1/2 + gamma/4^d"),
            Some(b) => format!("{} violations, first: {b}", bad.len()),
        };
        (bad.is_empty(), detail)
    })
}

fn search_config() -> ReductionConfig {
    ReductionConfig {
        ell: 2,
        sample_budget: 2000,
        learner_depth: Some(4),
        ..ReductionConfig::default()
    }
}

fn required(count: u64, numer: u64, denom: u64) -> u64 {
    (count * numer).div_ceil(denom)
}

/// Criterion 7: search on planted `(14, 10, 2)` instances returns 2-sparse
/// solutions.
pub fn end_to_end_search(level: Level, log: &mut SoundnessLog) -> CriterionReport {
    timed(7, "end-to-end search", 60, || {
        let runs = level.pick(20, 100);
        let need = required(runs, 95, 100);
        let cfg = search_config();
        let mut solved = 0;
        let mut bad = Vec::new();
        for seed in 1..=runs {
            let (inst, _) = random_planted(14, 10, 2, seed).expect("valid parameters");
            match search(&inst, &cfg, &ExhaustiveParityLearner, &mut seeded_rng(seed)) {
                Ok(out) => {
                    log.record(&inst, &out.solution, &format!("search seed {seed}"));
                    if !verify_certificate(&inst, &out.solution, cfg.prune_constant * inst.k()).unwrap_or(false) {
                        bad.push(format!("seed {seed}: certificate rejected"));
                    }
                    if inst.is_solution(&out.solution).unwrap_or(false) && out.solution.weight() <= 2 {
                        solved += 1;
                    }
                }
                Err(e) => bad.push(format!("seed {seed}: {e}")),
            }
        }
        let held = solved >= need && !bad.iter().any(|b| b.contains("rejected"));
        let mut detail = format!("{solved}/{runs} solved with sparsity <= 2 (need {need})");
        if let Some(b) = bad.first() {
            detail += &format!("; first miss: {b}");
        }
        (held, detail)
    })
}

/// A square full-rank instance whose unique solution has weight above
/// `3k`, certified by brute force.
fn certified_no_instance(rng: &mut SeededRng, n: usize, k: usize, alpha: u64) -> SyndromeInstance {
    loop {
        let h = random_full_rank(rng, n, n);
        let t = crate::instance::random_vector(rng, n);
        let inst = SyndromeInstance::new(h, t, k, Alpha::from_integer(alpha)).expect("shapes agree");
        if brute_force_nearest(&inst, alpha as usize * k).expect("k ≤ n").is_none() {
            return inst;
        }
    }
}

/// Criterion 8: decide answers Yes on planted instances and No on instances
/// certified to have no `3k`-sparse solution. Search also runs on every
/// instance so its certificates feed criterion 9.
pub fn end_to_end_decide(level: Level, log: &mut SoundnessLog) -> CriterionReport {
    timed(8, "end-to-end decide", 120, || {
        let runs = level.pick(10, 50);
        let need = required(runs, 48, 50);
        let cfg = search_config();
        let alpha = Alpha::from_integer(3);
        let mut yes = 0;
        for seed in 1..=runs {
            let (inst, _) = random_planted(14, 10, 2, 10_000 + seed).expect("valid parameters");
            let inst = inst.with_alpha(alpha).expect("alpha ≥ 1");
            let mut rng = seeded_rng(10_000 + seed);
            if decide(&inst, &cfg, &ExhaustiveParityLearner, &mut rng).map(|o| o.answer) == Ok(Answer::Yes) {
                yes += 1;
            }
            if let Ok(out) = search(&inst, &cfg, &ExhaustiveParityLearner, &mut rng) {
                log.record(&inst, &out.solution, &format!("decide yes seed {seed}"));
            }
        }
        let mut no = 0;
        let mut gen = seeded_rng(20_000);
        for seed in 1..=runs {
            let inst = certified_no_instance(&mut gen, 12, 2, 3);
            let mut rng = seeded_rng(20_000 + seed);
            if decide(&inst, &cfg, &ExhaustiveParityLearner, &mut rng).map(|o| o.answer) == Ok(Answer::No) {
                no += 1;
            }
            if let Ok(out) = search(&inst, &cfg, &ExhaustiveParityLearner, &mut rng) {
                log.record(&inst, &out.solution, &format!("decide no instance {seed}"));
            }
        }
        (
            yes >= need && no >= need,
            format!("{yes}/{runs} Yes on planted, {no}/{runs} No on certified (need {need} each)"),
        )
    })
}

/// Criterion 9: every certificate returned in criteria 7 and 8 satisfies
/// `Hx = t`.
pub fn soundness(log: &SoundnessLog) -> CriterionReport {
    timed(9, "soundness", 1, || {
        let detail = match log.failures.first() {
            None => format!("{} certificates, all satisfy Hx = t", log.certificates),
            Some(f) => format!("{} of {} certificates fail Hx = t, first: {f}", log.failures.len(), log.certificates),
        };
        (log.failures.is_empty() && log.certificates > 0, detail)
    })
}

/// Runs criteria 1 through 9 in order.
pub fn run_all(level: Level, fault: Fault) -> Vec<CriterionReport> {
    let mut log = SoundnessLog::default();
    let mut out = vec![
        boosting_dichotomy(level),
        uniform_like_bound(level),
        block_complete_correlation(level, fault),
        fourier_support(level),
        pruning_bound(level),
        extraction_advantage(level),
    ];
    out.push(end_to_end_search(level, &mut log));
    out.push(end_to_end_decide(level, &mut log));
    out.push(soundness(&log));
    out
}
