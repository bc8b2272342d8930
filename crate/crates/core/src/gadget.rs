//! Parity substitution.
//!
//! Each base coordinate `x_i` is replaced by a block of `ℓ` fresh bits whose
//! XOR is `x_i`. A base distribution `D` over `F_2^n` lifts to `D_⊕ℓ` over
//! `F_2^{ℓn}` (draw `x ∼ D`, then `y` uniform in the fiber of `x`), and a base
//! labeling `g` lifts to `g_⊕ℓ(y) = g(BlockwisePar(y))`.
//!
//! Block `i` (0-based) covers lifted coordinates `iℓ .. (i+1)ℓ`. Exact
//! quantities over `D_⊕ℓ` are computed with per-block closed forms, one base
//! point at a time, never by enumerating fibers.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};

use crate::dtree::DecisionTree;
use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::parity::ParityIndexSet;
use crate::source::{FinitePmf, LabeledSource};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GadgetParams {
    ell: usize,
    base_n: usize,
}

impl GadgetParams {
    /// `ell = 1` is accepted as the identity gadget; the reduction itself
    /// requires `ell ≥ 2`.
    pub fn new(ell: usize, base_n: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        Ok(Self { ell, base_n })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn lifted_arity(&self) -> usize {
        self.ell * self.base_n
    }

    pub fn block_of(&self, coord: usize) -> usize {
        coord / self.ell
    }

    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        i * self.ell..(i + 1) * self.ell
    }

    fn check_lifted_set(&self, s: &ParityIndexSet) -> Result<()> {
        s.check_arity(self.lifted_arity())
    }

    /// Number of elements of `s` in each block.
    fn block_counts(&self, s: &ParityIndexSet) -> Vec<usize> {
        let mut counts = vec![0; self.base_n];
        for &c in s.indices() {
            counts[self.block_of(c)] += 1;
        }
        counts
    }
}

/// `BlockwisePar(y)`: coordinate `i` is the XOR of block `i`.
pub fn blockwise_parity(y: &BitVector, params: &GadgetParams) -> Result<BitVector> {
    Error::check_len(params.lifted_arity(), y.len())?;
    let mut x = BitVector::zeros(params.base_n);
    for c in y.iter_ones() {
        x.flip(params.block_of(c));
    }
    Ok(x)
}

/// Lifts one labeled base example: each block gets `ℓ − 1` uniform bits and
/// its last bit is set so that the block XOR equals the base coordinate.
pub fn lift_sample(
    base: (&BitVector, bool),
    params: &GadgetParams,
    rng: &mut dyn RngCore,
) -> Result<(BitVector, bool)> {
    let (x, label) = base;
    Error::check_len(params.base_n, x.len())?;
    let mut y = BitVector::zeros(params.lifted_arity());
    for i in 0..params.base_n {
        let block = params.block(i);
        let mut parity = false;
        for c in block.start..block.end - 1 {
            if rng.gen::<bool>() {
                y.set(c, true);
                parity = !parity;
            }
        }
        if parity != x.get(i) {
            y.set(block.end - 1, true);
        }
    }
    Ok((y, label))
}

/// Union of the full blocks indexed by `s_star`.
pub fn lift_parity(s_star: &ParityIndexSet, params: &GadgetParams) -> Result<ParityIndexSet> {
    s_star.check_arity(params.base_n)?;
    Ok(s_star.indices().iter().flat_map(|&i| params.block(i)).collect())
}

/// Indices of the blocks that meet `s`.
pub fn unlift_parity(s: &ParityIndexSet, params: &GadgetParams) -> Result<ParityIndexSet> {
    params.check_lifted_set(s)?;
    Ok(s.indices().iter().map(|&c| params.block_of(c)).collect())
}

/// Whether every block meeting `s` lies entirely inside `s`.
pub fn is_block_complete(s: &ParityIndexSet, params: &GadgetParams) -> Result<bool> {
    params.check_lifted_set(s)?;
    Ok(params
        .block_counts(s)
        .iter()
        .all(|&c| c == 0 || c == params.ell))
}

/// `D_⊕ℓ` labeled by `g_⊕ℓ`, over any base source.
#[derive(Clone, Debug)]
pub struct GadgetOracle<B> {
    params: GadgetParams,
    base: B,
}

impl<B: LabeledSource> GadgetOracle<B> {
    pub fn new(params: GadgetParams, base: B) -> Result<Self> {
        Error::check_len(params.base_n, base.arity())?;
        Ok(Self { params, base })
    }

    pub fn params(&self) -> &GadgetParams {
        &self.params
    }

    pub fn base(&self) -> &B {
        &self.base
    }
}

impl<B: LabeledSource> LabeledSource for GadgetOracle<B> {
    fn arity(&self) -> usize {
        self.params.lifted_arity()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> (BitVector, bool) {
        let (x, b) = self.base.sample(rng);
        lift_sample((&x, b), &self.params, rng).expect("base arity checked at construction")
    }
}

/// A partial assignment `y_R = r` of lifted coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    coords: Vec<usize>,
    values: BitVector,
}

impl Restriction {
    pub fn new(coords: Vec<usize>, values: BitVector) -> Result<Self> {
        Error::check_len(coords.len(), values.len())?;
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("restriction coordinates repeat".into()));
        }
        Ok(Self { coords, values })
    }

    pub fn empty() -> Self {
        Self {
            coords: Vec::new(),
            values: BitVector::zeros(0),
        }
    }

    /// The restriction that forces a tree down the path `(var, value)*`.
    pub fn from_path(path: &[(usize, bool)]) -> Self {
        let coords = path.iter().map(|&(c, _)| c).collect();
        let values = BitVector::from_bools(&path.iter().map(|&(_, b)| b).collect::<Vec<_>>());
        Self { coords, values }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn values(&self) -> &BitVector {
        &self.values
    }

    pub fn matches(&self, y: &BitVector) -> bool {
        self.coords
            .iter()
            .enumerate()
            .all(|(k, &c)| y.get(c) == self.values.get(k))
    }
}

/// Per-block summary of a restriction: the blocks it fills completely (with
/// the parity it forces there) and the exponent `e` with the fiber
/// probability `2^{-e}` whenever those parities are met.
struct RestrictionShape {
    full_blocks: Vec<(usize, bool)>,
    exponent: usize,
}

fn restriction_shape(rho: &Restriction, params: &GadgetParams) -> Result<RestrictionShape> {
    let mut counts = vec![0usize; params.base_n];
    let mut parities = vec![false; params.base_n];
    for (k, &c) in rho.coords.iter().enumerate() {
        if c >= params.lifted_arity() {
            return Err(Error::CoordinateOutOfRange {
                index: c,
                arity: params.lifted_arity(),
            });
        }
        let b = params.block_of(c);
        counts[b] += 1;
        parities[b] ^= rho.values.get(k);
    }
    let mut full_blocks = Vec::new();
    let mut exponent = 0;
    for (b, &count) in counts.iter().enumerate() {
        if count == params.ell {
            full_blocks.push((b, parities[b]));
            exponent += params.ell - 1;
        } else {
            exponent += count;
        }
    }
    Ok(RestrictionShape {
        full_blocks,
        exponent,
    })
}

/// Exact `Pr_{y∼D_⊕ℓ}[y_R = r]`.
///
/// Conditioned on the base point `x`, blocks are independent; a block that
/// `R` covers partially matches with probability `2^{-|R⁽ⁱ⁾|}`, and a block it
/// covers fully matches with probability `2^{-(ℓ-1)}` if the parity of `r⁽ⁱ⁾`
/// equals `x_i` and 0 otherwise.
pub fn exact_restriction_probability(
    base: &FinitePmf,
    rho: &Restriction,
    params: &GadgetParams,
) -> Result<Rational> {
    Error::check_len(params.base_n, base.arity())?;
    let shape = restriction_shape(rho, params)?;
    let consistent = base.expect_halves(|x, _| {
        if shape.full_blocks.iter().all(|&(b, p)| x.get(b) == p) {
            2
        } else {
            0
        }
    });
    let (numer, denom) = consistent.into_raw();
    Ok(Rational::new(numer, denom << shape.exponent))
}

/// Exact `Pr_{y∼D_⊕ℓ}[g_⊕ℓ(y) = χ_S(y)]`.
///
/// Given `x`, `E[(-1)^{χ_S(y)}]` factors over blocks: 1 for blocks missing
/// `S`, 0 for blocks `S` meets partially, `(-1)^{x_i}` for blocks inside `S`.
pub fn exact_lifted_agreement(
    base: &FinitePmf,
    s: &ParityIndexSet,
    params: &GadgetParams,
) -> Result<Rational> {
    Error::check_len(params.base_n, base.arity())?;
    params.check_lifted_set(s)?;
    let counts = params.block_counts(s);
    let partial = counts.iter().any(|&c| c != 0 && c != params.ell);
    let full: Vec<usize> = (0..params.base_n).filter(|&i| counts[i] == params.ell).collect();
    Ok(base.expect_halves(|x, label| {
        if partial {
            1
        } else {
            let chi = full.iter().fold(false, |acc, &i| acc ^ x.get(i));
            if chi == label {
                2
            } else {
                0
            }
        }
    }))
}

/// Exact `Pr_{y∼D_⊕ℓ}[T(y) ≠ g_⊕ℓ(y)]`, summing over leaves the probability
/// of reaching the leaf given `x`.
pub fn exact_lifted_distance(
    base: &FinitePmf,
    tree: &DecisionTree,
    params: &GadgetParams,
) -> Result<Rational> {
    Error::check_len(params.base_n, base.arity())?;
    if let Some(v) = tree.max_var() {
        if v >= params.lifted_arity() {
            return Err(Error::CoordinateOutOfRange {
                index: v,
                arity: params.lifted_arity(),
            });
        }
    }
    let leaves: Vec<(RestrictionShape, bool)> = tree
        .leaves()
        .into_iter()
        .map(|(path, label)| Ok((restriction_shape(&Restriction::from_path(&path), params)?, label)))
        .collect::<Result<_>>()?;
    let max_exp = leaves.iter().map(|(s, _)| s.exponent).max().unwrap_or(0);
    // Numerators over the common denominator 2^max_exp.
    Ok(base.expect(|x, label| {
        let mut num = BigInt::zero();
        for (shape, leaf) in &leaves {
            if *leaf != label && shape.full_blocks.iter().all(|&(b, p)| x.get(b) == p) {
                num += BigInt::one() << (max_exp - shape.exponent);
            }
        }
        Rational::new(num, BigInt::one() << max_exp)
    }))
}

/// Whether `p ≤ 2^{-|R|(1-1/ℓ)}`, compared exactly as `p^ℓ ≤ 2^{-|R|(ℓ-1)}`.
pub fn within_uniform_like_bound(p: &Rational, restriction_len: usize, ell: usize) -> bool {
    if !p.is_positive() {
        return true;
    }
    let lhs = num_traits::pow(p.numer().clone(), ell) << (restriction_len * (ell - 1));
    lhs <= num_traits::pow(p.denom().clone(), ell)
}

/// Whether `delta ≤ s^{1-c(1-1/ℓ)}`, compared exactly as
/// `delta^ℓ · s^{c(ℓ-1)-ℓ} ≤ 1` (or `delta^ℓ ≤ s^{ℓ-c(ℓ-1)}`).
pub fn within_pruning_bound(delta: &Rational, size: usize, c: usize, ell: usize) -> bool {
    if !delta.is_positive() {
        return true;
    }
    let lhs = num_traits::pow(delta.clone(), ell);
    let s = BigInt::from(size);
    let (pos, neg) = (ell, c * (ell - 1));
    if pos >= neg {
        lhs <= Rational::from_integer(num_traits::pow(s, pos - neg))
    } else {
        lhs * Rational::from_integer(num_traits::pow(s, neg - pos)) <= Rational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn v(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    fn p(ell: usize, n: usize) -> GadgetParams {
        GadgetParams::new(ell, n).unwrap()
    }

    fn one_based(ix: &[usize]) -> ParityIndexSet {
        ParityIndexSet::from_one_based(ix)
    }

    fn half() -> Rational {
        Rational::new(1.into(), 2.into())
    }

    #[test]
    fn blockwise_parity_examples() {
        assert_eq!(blockwise_parity(&v("1101"), &p(2, 2)).unwrap(), v("01"));
        assert_eq!(blockwise_parity(&v("1011"), &p(1, 4)).unwrap(), v("1011"));
        assert_eq!(blockwise_parity(&v("000000"), &p(3, 2)).unwrap(), v("00"));
        assert!(blockwise_parity(&v("101"), &p(2, 2)).is_err());
    }

    #[test]
    fn lift_sample_stays_in_fiber() {
        let mut rng = seeded_rng(3);
        let params = p(3, 4);
        for w in 0..16u64 {
            let x = BitVector::from_word(4, w);
            for label in [false, true] {
                let (y, b) = lift_sample((&x, label), &params, &mut rng).unwrap();
                assert_eq!(blockwise_parity(&y, &params).unwrap(), x);
                assert_eq!(b, label);
            }
        }
    }

    #[test]
    fn lift_sample_single_block_is_fair() {
        let mut rng = seeded_rng(4);
        let x = v("0");
        let mut ones = 0;
        for _ in 0..4000 {
            let (y, _) = lift_sample((&x, false), &p(2, 1), &mut rng).unwrap();
            assert!(y == v("00") || y == v("11"));
            ones += usize::from(y == v("11"));
        }
        assert!((ones as f64 / 4000.0 - 0.5).abs() < 0.04);
    }

    /// Each of the four fibers of ℓ = 2, n = 2 has 4 points; χ² with 3 degrees
    /// of freedom at 10⁻³ (critical value 16.266).
    #[test]
    fn lift_sample_fiber_frequencies() {
        let params = p(2, 2);
        let mut rng = seeded_rng(21);
        for w in 0..4u64 {
            let x = BitVector::from_word(2, w);
            let fiber: Vec<BitVector> = (0..16u64)
                .map(|y| BitVector::from_word(4, y))
                .filter(|y| blockwise_parity(y, &params).unwrap() == x)
                .collect();
            assert_eq!(fiber.len(), 4);
            let mut counts = [0f64; 4];
            let draws = 20_000;
            for _ in 0..draws {
                let (y, _) = lift_sample((&x, false), &params, &mut rng).unwrap();
                counts[fiber.iter().position(|f| f == &y).unwrap()] += 1.0;
            }
            let e = draws as f64 / 4.0;
            let chi2: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
            assert!(chi2 < 16.266, "fiber {x}: chi2 {chi2}");
        }
    }

    #[test]
    fn lift_and_unlift_examples() {
        assert_eq!(lift_parity(&one_based(&[2]), &p(3, 3)).unwrap(), one_based(&[4, 5, 6]));
        assert_eq!(lift_parity(&ParityIndexSet::empty(), &p(3, 3)).unwrap(), ParityIndexSet::empty());
        assert_eq!(lift_parity(&one_based(&[1, 3]), &p(2, 3)).unwrap(), one_based(&[1, 2, 5, 6]));
        assert!(lift_parity(&one_based(&[4]), &p(2, 3)).is_err());

        assert_eq!(unlift_parity(&one_based(&[1, 2]), &p(2, 2)).unwrap(), one_based(&[1]));
        assert_eq!(unlift_parity(&one_based(&[1]), &p(2, 2)).unwrap(), one_based(&[1]));
        assert_eq!(unlift_parity(&ParityIndexSet::empty(), &p(2, 2)).unwrap(), ParityIndexSet::empty());
    }

    #[test]
    fn block_completeness_examples() {
        assert!(is_block_complete(&one_based(&[1, 2]), &p(2, 2)).unwrap());
        assert!(!is_block_complete(&one_based(&[1]), &p(2, 2)).unwrap());
        assert!(is_block_complete(&ParityIndexSet::empty(), &p(2, 2)).unwrap());
        assert!(is_block_complete(&one_based(&[3]), &p(1, 3)).unwrap());
    }

    #[test]
    fn lift_unlift_round_trips_exhaustively() {
        for ell in 1..=3 {
            for n in 0..=3 {
                let params = p(ell, n);
                for w in 0..(1u64 << n) {
                    let s_star = ParityIndexSet::from_vector(&BitVector::from_word(n, w));
                    let s = lift_parity(&s_star, &params).unwrap();
                    assert_eq!(s.len(), ell * s_star.len());
                    assert!(is_block_complete(&s, &params).unwrap());
                    assert_eq!(unlift_parity(&s, &params).unwrap(), s_star);
                }
                for w in 0..(1u64 << (ell * n)) {
                    let s = ParityIndexSet::from_vector(&BitVector::from_word(ell * n, w));
                    let up = lift_parity(&unlift_parity(&s, &params).unwrap(), &params).unwrap();
                    assert!(s.indices().iter().all(|&c| up.contains(c)));
                    assert_eq!(up == s, is_block_complete(&s, &params).unwrap());
                    assert!(unlift_parity(&s, &params).unwrap().len() <= s.len());
                }
            }
        }
    }

    fn point_mass(x: &str, label: bool) -> FinitePmf {
        FinitePmf::uniform(x.len(), vec![(v(x), label)]).unwrap()
    }

    #[test]
    fn restriction_probability_examples() {
        let base = point_mass("10", true);
        let params = p(2, 2);
        assert_eq!(
            exact_restriction_probability(&base, &Restriction::empty(), &params).unwrap(),
            Rational::one()
        );
        // Block 0 forced to parity 0, but x_0 = 1.
        let contradict = Restriction::new(vec![0, 1], v("11")).unwrap();
        assert!(exact_restriction_probability(&base, &contradict, &params)
            .unwrap()
            .is_zero());
        let agree = Restriction::new(vec![0, 1], v("10")).unwrap();
        assert_eq!(exact_restriction_probability(&base, &agree, &params).unwrap(), half());
        let partial = Restriction::new(vec![2], v("1")).unwrap();
        assert_eq!(exact_restriction_probability(&base, &partial, &params).unwrap(), half());
        assert!(exact_restriction_probability(&base, &Restriction::new(vec![4], v("1")).unwrap(), &params).is_err());
        assert!(Restriction::new(vec![1, 1], v("00")).is_err());
    }

    #[test]
    fn lifted_agreement_examples() {
        let mut rng = seeded_rng(8);
        let params = p(2, 3);
        let base = crate::source::random_full_pmf(3, &mut rng);
        assert_eq!(exact_lifted_agreement(&base, &one_based(&[1]), &params).unwrap(), half());
        assert_eq!(exact_lifted_agreement(&base, &one_based(&[1, 2, 3]), &params).unwrap(), half());

        let s_star = one_based(&[1, 3]);
        let lifted = lift_parity(&s_star, &params).unwrap();
        let base_agreement = base.expect_halves(|x, l| if s_star.eval(x) == l { 2 } else { 0 });
        assert_eq!(exact_lifted_agreement(&base, &lifted, &params).unwrap(), base_agreement);
    }

    #[test]
    fn planted_base_lifts_to_perfect_agreement() {
        let params = p(3, 3);
        let s_star = one_based(&[2, 3]);
        let points = (0..8u64)
            .map(|w| {
                let x = BitVector::from_word(3, w);
                let l = s_star.eval(&x);
                (x, l)
            })
            .collect();
        let base = FinitePmf::uniform(3, points).unwrap();
        let lifted = lift_parity(&s_star, &params).unwrap();
        assert_eq!(exact_lifted_agreement(&base, &lifted, &params).unwrap(), Rational::one());
    }

    #[test]
    fn uniform_like_bound_comparison() {
        let params_ell = 2;
        assert!(within_uniform_like_bound(&half(), 2, params_ell));
        let just_over = Rational::new(51.into(), 100.into());
        assert!(!within_uniform_like_bound(&just_over, 2, params_ell));
        // 2^{-3/2} ≈ 0.3536
        assert!(within_uniform_like_bound(&Rational::new(35.into(), 100.into()), 3, 2));
        assert!(!within_uniform_like_bound(&Rational::new(36.into(), 100.into()), 3, 2));
    }

    #[test]
    fn pruning_bound_examples() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        // c = 3, ℓ = 2: s^{-1/2}
        assert!(within_pruning_bound(&r(1, 4), 16, 3, 2));
        assert!(!within_pruning_bound(&r(26, 100), 16, 3, 2));
        assert!(within_pruning_bound(&r(57, 100), 3, 3, 2));
        assert!(!within_pruning_bound(&r(58, 100), 3, 3, 2));
        assert!(within_pruning_bound(&r(-1, 1), 16, 3, 2));
        // c = 2, ℓ = 2: exponent 0, bound 1
        assert!(within_pruning_bound(&Rational::one(), 9, 2, 2));
        assert!(!within_pruning_bound(&r(101, 100), 9, 2, 2));
        // ℓ = 1: exponent 1, bound s
        assert!(within_pruning_bound(&r(5, 1), 5, 3, 1));
    }

    #[test]
    fn gadget_oracle_emits_consistent_labels() {
        let params = p(2, 3);
        let base = point_mass("101", true);
        let o = GadgetOracle::new(params, base).unwrap();
        let mut rng = seeded_rng(6);
        for _ in 0..100 {
            let (y, b) = o.sample(&mut rng);
            assert_eq!(blockwise_parity(&y, &params).unwrap(), v("101"));
            assert!(b);
        }
        assert!(GadgetOracle::new(p(2, 2), point_mass("101", true)).is_err());
    }
}
