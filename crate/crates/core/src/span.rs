//! The linear extension `f^ext` of a labeling on a linearly independent set
//! `D`, and the uniform distribution over `Span(D)` labeled by it.
//!
//! The span is never materialized by the oracle itself: a sample is a random
//! subset sum of the basis. Exact enumeration walks the `2^m` subsets in Gray
//! code order so each step costs one basis XOR.

use num_bigint::BigInt;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::instance::LabeledSet;
use crate::parity::ParityIndexSet;
use crate::source::{FinitePmf, LabeledSource};
use crate::Rational;

/// Default enumeration guard on the span dimension (about 10⁶ points).
pub const DEFAULT_ENUMERATION_GUARD: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanOracle {
    base: LabeledSet,
}

impl SpanOracle {
    /// Wraps `D`; rejects linearly dependent points.
    pub fn new(base: LabeledSet) -> Result<Self> {
        if !base.is_independent() {
            return Err(Error::LinearlyDependent);
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> &LabeledSet {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.base.len()
    }

    /// Draws a uniform subset `I ⊆ [m]` and returns the subset sum with its
    /// summed label.
    pub fn sample_span(&self, rng: &mut dyn RngCore) -> (BitVector, bool) {
        let mut point = BitVector::zeros(self.base.arity());
        let mut label = false;
        for (x, &f) in self.base.points().iter().zip(self.base.labels()) {
            if rng.gen::<bool>() {
                point.xor_assign(x);
                label ^= f;
            }
        }
        (point, label)
    }

    fn check_guard(&self, guard: usize) -> Result<()> {
        if self.dimension() > guard {
            return Err(Error::GuardExceeded {
                what: "span dimension",
                value: self.dimension(),
                limit: guard,
            });
        }
        Ok(())
    }

    /// Visits all `2^m` span elements with their `f^ext` labels, each subset
    /// exactly once, in Gray code order starting from `(0, 0)`.
    pub fn for_each_span_point(&self, guard: usize, mut visit: impl FnMut(&BitVector, bool)) -> Result<()> {
        self.check_guard(guard)?;
        let mut point = BitVector::zeros(self.base.arity());
        let mut label = false;
        visit(&point, label);
        let m = self.dimension();
        for step in 1u64..(1u64 << m) {
            let i = step.trailing_zeros() as usize;
            point.xor_assign(&self.base.points()[i]);
            label ^= self.base.labels()[i];
            visit(&point, label);
        }
        Ok(())
    }

    pub fn enumerate_span(&self) -> Result<Vec<(BitVector, bool)>> {
        self.enumerate_span_with_guard(DEFAULT_ENUMERATION_GUARD)
    }

    pub fn enumerate_span_with_guard(&self, guard: usize) -> Result<Vec<(BitVector, bool)>> {
        self.check_guard(guard)?;
        let mut out = Vec::with_capacity(1 << self.dimension());
        self.for_each_span_point(guard, |p, l| out.push((p.clone(), l)))?;
        Ok(out)
    }

    /// `Unif(Span(D))` labeled by `f^ext` as an exact distribution.
    pub fn to_pmf(&self) -> Result<FinitePmf> {
        FinitePmf::uniform(self.base.arity(), self.enumerate_span()?)
    }

    /// Exact fraction of `Span(D)` on which `χ_S ≠ f^ext`.
    pub fn exact_disagreement(&self, s: &ParityIndexSet) -> Result<Rational> {
        s.check_arity(self.base.arity())?;
        let mask = s.to_vector(self.base.arity())?;
        let mut disagree = 0u64;
        self.for_each_span_point(DEFAULT_ENUMERATION_GUARD, |p, l| {
            if p.dot(&mask) != l {
                disagree += 1;
            }
        })?;
        Ok(Rational::new(
            BigInt::from(disagree),
            BigInt::from(1u64 << self.dimension()),
        ))
    }
}

impl LabeledSource for SpanOracle {
    fn arity(&self) -> usize {
        self.base.arity()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> (BitVector, bool) {
        self.sample_span(rng)
    }
}
