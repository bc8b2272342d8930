//! Brute-force references for the closed forms in [`crate::gadget`]: the
//! lifted distribution is materialized by enumerating every fiber.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::gadget::{blockwise_parity, GadgetParams, Restriction};
use crate::parity::ParityIndexSet;
use crate::source::{FinitePmf, LabeledSource};
use crate::Rational;

/// Largest lifted arity [`lifted_pmf`] will enumerate.
pub const FIBER_GUARD: usize = 16;

/// `base_⊕ℓ` as an explicit distribution over `{0,1}^{ℓn}`: every `y` whose
/// block parities give a support point `x` gets weight `w(x)·2^{-(ℓ-1)n}`
/// and label `f(x)`.
pub fn lifted_pmf(base: &FinitePmf, params: &GadgetParams) -> Result<FinitePmf> {
    Error::check_len(params.base_n(), base.arity())?;
    let arity = params.lifted_arity();
    if arity > FIBER_GUARD {
        return Err(Error::GuardExceeded {
            what: "lifted arity",
            value: arity,
            limit: FIBER_GUARD,
        });
    }
    let index: std::collections::HashMap<&BitVector, usize> =
        (0..base.len()).map(|i| (base.point(i), i)).collect();
    let fiber = Rational::new(BigInt::one(), BigInt::one() << ((params.ell() - 1) * params.base_n()));
    let mut uniform = Vec::new();
    let mut weighted = Vec::new();
    for word in 0u64..(1u64 << arity) {
        let y = BitVector::from_word(arity, word);
        let Some(&i) = index.get(&blockwise_parity(&y, params)?) else {
            continue;
        };
        if base.is_uniform() {
            uniform.push((y, base.label(i)));
        } else {
            weighted.push((y, base.label(i), base.weight(i) * &fiber));
        }
    }
    if base.is_uniform() {
        FinitePmf::uniform(arity, uniform)
    } else {
        FinitePmf::weighted(arity, weighted)
    }
}

/// `Pr[y_R = r]` by summing over the support of `lifted`.
pub fn restriction_probability(lifted: &FinitePmf, rho: &Restriction) -> Rational {
    lifted.expect_halves(|y, _| if rho.matches(y) { 2 } else { 0 })
}

/// `Pr[χ_S(y) = label]` by summing over the support of `pmf`.
pub fn agreement(pmf: &FinitePmf, s: &ParityIndexSet) -> Rational {
    pmf.expect_halves(|y, label| if s.eval(y) == label { 2 } else { 0 })
}
