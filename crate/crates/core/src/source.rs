//! Labeled-example sources: anything that can emit `(point, label)` pairs, and
//! finite weighted distributions that can also be enumerated exactly.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::Rational;

/// A sampler for a labeled distribution over `F_2^arity`.
pub trait LabeledSource: Sync {
    fn arity(&self) -> usize;

    fn sample(&self, rng: &mut dyn RngCore) -> (BitVector, bool);

    fn sample_many(&self, count: usize, rng: &mut dyn RngCore) -> Vec<(BitVector, bool)> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

impl<T: LabeledSource + ?Sized> LabeledSource for &T {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> (BitVector, bool) {
        (**self).sample(rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Weights {
    Uniform,
    Explicit(Vec<Rational>),
}

/// A labeled distribution with finite support and exact rational weights.
///
/// Uniform distributions are stored without per-point weights so that exact
/// sums over them reduce to integer counting.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePmf {
    arity: usize,
    points: Vec<BitVector>,
    labels: Vec<bool>,
    weights: Weights,
    /// Explicit weights as integer numerators over a common denominator, when
    /// that denominator fits in a `u64`.
    scaled: Option<(Vec<u64>, u64)>,
    cumulative: Vec<f64>,
}

impl FinitePmf {
    /// Uniform distribution over distinct `points`.
    pub fn uniform(arity: usize, points: Vec<(BitVector, bool)>) -> Result<Self> {
        let (points, labels) = points.into_iter().unzip();
        Self::build(arity, points, labels, Weights::Uniform)
    }

    /// Explicit weights; they must be nonnegative and sum to exactly one.
    pub fn weighted(arity: usize, points: Vec<(BitVector, bool, Rational)>) -> Result<Self> {
        let mut pts = Vec::with_capacity(points.len());
        let mut labels = Vec::with_capacity(points.len());
        let mut weights = Vec::with_capacity(points.len());
        for (p, l, w) in points {
            if w.is_negative() {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            pts.push(p);
            labels.push(l);
            weights.push(w);
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Self::build(arity, pts, labels, Weights::Explicit(weights))
    }

    fn build(arity: usize, points: Vec<BitVector>, labels: Vec<bool>, weights: Weights) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty support".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            Error::check_len(arity, p.len())?;
            if !seen.insert(p) {
                return Err(Error::InvalidParameter(format!("duplicate support point {p}")));
            }
        }
        let cumulative = match &weights {
            Weights::Uniform => Vec::new(),
            Weights::Explicit(ws) => {
                let mut acc = 0.0;
                ws.iter()
                    .map(|w| {
                        acc += w.to_f64().unwrap_or(0.0);
                        acc
                    })
                    .collect()
            }
        };
        let scaled = match &weights {
            Weights::Uniform => None,
            Weights::Explicit(ws) => common_denominator(ws),
        };
        Ok(Self {
            arity,
            points,
            labels,
            weights,
            scaled,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &BitVector {
        &self.points[i]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn weight(&self, i: usize) -> Rational {
        match &self.weights {
            Weights::Uniform => Rational::new(BigInt::one(), BigInt::from(self.points.len())),
            Weights::Explicit(ws) => ws[i].clone(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.weights, Weights::Uniform)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitVector, bool)> + '_ {
        self.points.iter().zip(self.labels.iter().copied())
    }

    /// Exact `E[score(x, label)]` where `score` returns a value in halves:
    /// `score = h` contributes `h / 2`.
    pub fn expect_halves(&self, mut score: impl FnMut(&BitVector, bool) -> u32) -> Rational {
        match &self.weights {
            Weights::Uniform => {
                let total: u64 = self.iter().map(|(p, l)| u64::from(score(p, l))).sum();
                Rational::new(BigInt::from(total), BigInt::from(2 * self.points.len() as u64))
            }
            Weights::Explicit(_) if self.scaled.is_some() => {
                let (nums, den) = self.scaled.as_ref().expect("checked");
                let mut total: u128 = 0;
                for ((p, l), &w) in self.iter().zip(nums) {
                    total += u128::from(w) * u128::from(score(p, l));
                }
                Rational::new(BigInt::from(total), BigInt::from(2 * u128::from(*den)))
            }
            Weights::Explicit(ws) => {
                let mut acc = Rational::zero();
                for ((p, l), w) in self.iter().zip(ws) {
                    let h = score(p, l);
                    if h != 0 {
                        acc += w * Rational::from_integer(BigInt::from(h));
                    }
                }
                acc / Rational::from_integer(BigInt::from(2))
            }
        }
    }

    /// Exact `E[value(x, label)]` for arbitrary rational values.
    pub fn expect(&self, mut value: impl FnMut(&BitVector, bool) -> Rational) -> Rational {
        match &self.weights {
            Weights::Uniform => {
                let sum: Rational = self.iter().map(|(p, l)| value(p, l)).sum();
                sum / Rational::from_integer(BigInt::from(self.points.len()))
            }
            Weights::Explicit(ws) => self.iter().zip(ws).map(|((p, l), w)| value(p, l) * w).sum(),
        }
    }
}

impl LabeledSource for FinitePmf {
    fn arity(&self) -> usize {
        self.arity
    }

    fn sample(&self, rng: &mut dyn RngCore) -> (BitVector, bool) {
        let i = match &self.weights {
            Weights::Uniform => rng.gen_range(0..self.points.len()),
            Weights::Explicit(_) => {
                let total = *self.cumulative.last().expect("nonempty support");
                let u: f64 = rng.gen::<f64>() * total;
                self.cumulative
                    .partition_point(|&c| c <= u)
                    .min(self.points.len() - 1)
            }
        };
        (self.points[i].clone(), self.labels[i])
    }
}

fn common_denominator(ws: &[Rational]) -> Option<(Vec<u64>, u64)> {
    let den = ws.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let den64 = den.to_u64()?;
    let nums = ws
        .iter()
        .map(|w| (w.numer() * (&den / w.denom())).to_u64())
        .collect::<Option<Vec<_>>>()?;
    Some((nums, den64))
}

/// Random explicit pmf over all of `F_2^arity` with random labels; weights are
/// small positive integers normalized to one.
pub fn random_full_pmf(arity: usize, rng: &mut dyn RngCore) -> FinitePmf {
    assert!(arity <= 16, "random_full_pmf enumerates the whole cube");
    let raw: Vec<u64> = (0..1u64 << arity).map(|_| rng.gen_range(0..=8)).collect();
    let mut raw = raw;
    if raw.iter().all(|&w| w == 0) {
        raw[0] = 1;
    }
    let total: u64 = raw.iter().sum();
    let points = raw
        .iter()
        .enumerate()
        .map(|(x, &w)| {
            (
                BitVector::from_word(arity, x as u64),
                rng.gen::<bool>(),
                Rational::new(BigInt::from(w), BigInt::from(total)),
            )
        })
        .collect();
    FinitePmf::weighted(arity, points).expect("normalized weights")
}
