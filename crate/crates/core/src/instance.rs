//! Nearest-codeword instances in generator, parity-check and labeled-set form.
//!
//! * generator view: a code `C` spanned by the columns of `G ∈ F_2^{n×d}` and a
//!   received word `z`; is some codeword within Hamming distance `k` of `z`?
//! * parity-check view: `H ∈ F_2^{m×n}`, `t ∈ F_2^m`; is there a `k`-sparse
//!   `x` with `Hx = t`?
//! * labeled-set view: the rows of `H` labeled by `t`; is the labeling a
//!   `k`-parity?

use num_rational::Ratio;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::f2::{parse_bit_line, parse_rows, BitMatrix, BitVector, EchelonBasis};
use crate::parity::ParityIndexSet;
use crate::rng::seeded_rng;

/// Approximation factor `α ≥ 1`.
pub type Alpha = Ratio<u64>;

fn check_alpha(alpha: Alpha) -> Result<()> {
    if alpha < Alpha::from_integer(1) {
        return Err(Error::InvalidParameter(format!("alpha must be at least 1, got {alpha}")));
    }
    Ok(())
}

/// Generator view `(G, z, k, α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NcpInstance {
    generator: BitMatrix,
    received: BitVector,
    k: usize,
    alpha: Alpha,
}

impl NcpInstance {
    pub fn new(generator: BitMatrix, received: BitVector, k: usize, alpha: Alpha) -> Result<Self> {
        Error::check_len(generator.nrows(), received.len())?;
        check_alpha(alpha)?;
        Ok(Self {
            generator,
            received,
            k,
            alpha,
        })
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn received(&self) -> &BitVector {
        &self.received
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// Block length `n`.
    pub fn n(&self) -> usize {
        self.generator.nrows()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "ncpgen v1\n{} {} {} {} {}\n",
            self.n(),
            self.generator.ncols(),
            self.k,
            self.alpha.numer(),
            self.alpha.denom()
        );
        for row in self.generator.rows() {
            s.push_str(&format!("{row}\n"));
        }
        s.push_str(&format!("{}\n", self.received));
        s
    }
}

/// Parity-check view `(H, t, k, α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeInstance {
    parity_check: BitMatrix,
    syndrome: BitVector,
    k: usize,
    alpha: Alpha,
}

impl SyndromeInstance {
    pub fn new(parity_check: BitMatrix, syndrome: BitVector, k: usize, alpha: Alpha) -> Result<Self> {
        Error::check_len(parity_check.nrows(), syndrome.len())?;
        check_alpha(alpha)?;
        Ok(Self {
            parity_check,
            syndrome,
            k,
            alpha,
        })
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn syndrome(&self) -> &BitVector {
        &self.syndrome
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Result<Self> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// Number of constraints `m`.
    pub fn m(&self) -> usize {
        self.parity_check.nrows()
    }

    /// Number of variables `n`.
    pub fn n(&self) -> usize {
        self.parity_check.ncols()
    }

    pub fn has_independent_rows(&self) -> bool {
        self.parity_check.rank() == self.m()
    }

    /// Drops linearly dependent rows of `H` (keeping the first occurrence of
    /// each new direction). Fails with [`Error::UnsatisfiableByAnyParity`] if a
    /// dropped row's label contradicts the combination of kept rows that
    /// produces it, in which case no `x` satisfies `Hx = t`.
    pub fn normalize(&self) -> Result<SyndromeInstance> {
        let n = self.n();
        let mut plain = EchelonBasis::new(n);
        let mut augmented = EchelonBasis::new(n + 1);
        let mut kept = Vec::new();
        for (i, row) in self.parity_check.rows().iter().enumerate() {
            let label = BitVector::from_bools(&[self.syndrome.get(i)]);
            let aug = row.concat(&label);
            let new_direction = plain.insert(row);
            let new_aug = augmented.insert(&aug);
            if new_direction {
                kept.push(i);
            } else if new_aug {
                return Err(Error::UnsatisfiableByAnyParity);
            }
        }
        let rows = kept.iter().map(|&i| self.parity_check.row(i).clone()).collect();
        let t: Vec<bool> = kept.iter().map(|&i| self.syndrome.get(i)).collect();
        Ok(SyndromeInstance {
            parity_check: BitMatrix::from_rows(n, rows)?,
            syndrome: BitVector::from_bools(&t),
            k: self.k,
            alpha: self.alpha,
        })
    }

    pub fn is_solution(&self, x: &BitVector) -> Result<bool> {
        Ok(self.parity_check.mat_vec(x)? == self.syndrome)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "ncpsd v1\n{} {} {} {} {}\n",
            self.m(),
            self.n(),
            self.k,
            self.alpha.numer(),
            self.alpha.denom()
        );
        for row in self.parity_check.rows() {
            s.push_str(&format!("{row}\n"));
        }
        s.push_str(&format!("{}\n", self.syndrome));
        s
    }
}

/// Either view, as read from an instance file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Generator(NcpInstance),
    Syndrome(SyndromeInstance),
}

impl Instance {
    /// Parity-check view of the instance, converting if needed.
    pub fn into_syndrome(self) -> SyndromeInstance {
        match self {
            Instance::Generator(g) => generator_to_syndrome(&g),
            Instance::Syndrome(s) => s,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Instance::Generator(g) => g.to_text(),
            Instance::Syndrome(s) => s.to_text(),
        }
    }
}

/// Parses an `ncpsd v1` or `ncpgen v1` instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text.lines();
    let magic = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let is_generator = match magic {
        "ncpsd v1" => false,
        "ncpgen v1" => true,
        other => return Err(Error::parse(1, format!("unknown header {other:?}"))),
    };
    let header = lines.next().ok_or_else(|| Error::parse(2, "missing size line"))?;
    let fields = header
        .split(' ')
        .map(|f| {
            f.parse::<u64>()
                .map_err(|_| Error::parse(2, format!("not a nonnegative integer: {f:?}")))
        })
        .collect::<Result<Vec<u64>>>()?;
    let [rows, cols, k, an, ad] = fields[..] else {
        return Err(Error::parse(2, format!("expected 5 fields, found {}", fields.len())));
    };
    if ad == 0 {
        return Err(Error::parse(2, "alpha denominator is zero"));
    }
    let (rows, cols, k) = (rows as usize, cols as usize, k as usize);
    let alpha = Alpha::new(an, ad);
    let matrix = parse_rows(&mut lines, rows, cols, 3)?;
    let last_no = rows + 3;
    let last = lines
        .next()
        .ok_or_else(|| Error::parse(last_no, "missing final vector line"))?;
    let vector = parse_bit_line(last, rows, last_no)?;
    if let Some(extra) = lines.find(|l| !l.is_empty()) {
        return Err(Error::parse(last_no + 1, format!("trailing content {extra:?}")));
    }
    let wrap = |e: Error| match e {
        Error::InvalidParameter(msg) => Error::parse(2, msg),
        other => other,
    };
    if is_generator {
        NcpInstance::new(matrix, vector, k, alpha).map(Instance::Generator).map_err(wrap)
    } else {
        SyndromeInstance::new(matrix, vector, k, alpha).map(Instance::Syndrome).map_err(wrap)
    }
}

/// The set `D` of points (rows of `H`) with labels `f(x⁽ⁱ⁾) = t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSet {
    arity: usize,
    points: Vec<BitVector>,
    labels: Vec<bool>,
}

impl LabeledSet {
    /// Checks shapes only; linear independence is checked where it is needed.
    pub fn new(arity: usize, points: Vec<BitVector>, labels: Vec<bool>) -> Result<Self> {
        Error::check_len(points.len(), labels.len())?;
        for p in &points {
            Error::check_len(arity, p.len())?;
        }
        Ok(Self {
            arity,
            points,
            labels,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BitVector] {
        &self.points
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn is_independent(&self) -> bool {
        let mut basis = EchelonBasis::new(self.arity);
        self.points.iter().all(|p| basis.insert(p))
    }

    /// Whether `χ_S` agrees with the labels on every point.
    pub fn is_consistent_with(&self, s: &ParityIndexSet) -> bool {
        self.points
            .iter()
            .zip(&self.labels)
            .all(|(p, &l)| s.eval(p) == l)
    }
}

/// `H = dual_basis(G)`, `t = Hz`.
pub fn generator_to_syndrome(inst: &NcpInstance) -> SyndromeInstance {
    let h = inst.generator.dual_basis();
    let t = h.mat_vec(&inst.received).expect("H has n columns");
    SyndromeInstance {
        parity_check: h,
        syndrome: t,
        k: inst.k,
        alpha: inst.alpha,
    }
}

/// Rows of `H` labeled by `t`. Requires independent rows; call
/// [`SyndromeInstance::normalize`] first on arbitrary input.
pub fn syndrome_to_labeled_set(inst: &SyndromeInstance) -> Result<LabeledSet> {
    if !inst.has_independent_rows() {
        return Err(Error::LinearlyDependent);
    }
    LabeledSet::new(
        inst.n(),
        inst.parity_check.rows().to_vec(),
        inst.syndrome.iter().collect(),
    )
}

/// Exact minimum-sparsity solution of `Hx = t` among sparsity `≤ k_max`.
///
/// Sparsities are tried in increasing order and supports lexicographically
/// within each sparsity, so the first hit is the lexicographically smallest
/// optimum.
pub fn brute_force_nearest(inst: &SyndromeInstance, k_max: usize) -> Result<Option<BitVector>> {
    let n = inst.n();
    if k_max > n {
        return Err(Error::InvalidParameter(format!("k_max = {k_max} exceeds n = {n}")));
    }
    let columns = inst.parity_check.transpose();
    let target = &inst.syndrome;
    let mut support = Vec::with_capacity(k_max);
    for size in 0..=k_max {
        let mut acc = BitVector::zeros(inst.m());
        if search_combinations(columns.rows(), target, 0, size, &mut acc, &mut support) {
            return Ok(Some(BitVector::from_support(n, support)?));
        }
    }
    Ok(None)
}

fn search_combinations(
    columns: &[BitVector],
    target: &BitVector,
    start: usize,
    remaining: usize,
    acc: &mut BitVector,
    support: &mut Vec<usize>,
) -> bool {
    if remaining == 0 {
        return acc == target;
    }
    for j in start..=(columns.len() - remaining) {
        acc.xor_assign(&columns[j]);
        support.push(j);
        if search_combinations(columns, target, j + 1, remaining - 1, acc, support) {
            return true;
        }
        support.pop();
        acc.xor_assign(&columns[j]);
    }
    false
}

/// Planted instance: `H` uniform among `m×n` matrices with independent rows,
/// `x` uniform among vectors of sparsity exactly `k`, `t = Hx`. α is 1.
pub fn random_planted(n: usize, m: usize, k: usize, seed: u64) -> Result<(SyndromeInstance, BitVector)> {
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "m = {m} rows cannot be independent in dimension n = {n}"
        )));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let mut rng = seeded_rng(seed);
    let h = random_full_rank(&mut rng, m, n);
    let x = BitVector::from_support(n, index::sample(&mut rng, n, k))?;
    let t = h.mat_vec(&x)?;
    let inst = SyndromeInstance::new(h, t, k, Alpha::from_integer(1))?;
    Ok((inst, x))
}

/// Uniformly random `rows × cols` matrix with independent rows, by rejection.
pub fn random_full_rank<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> BitMatrix {
    assert!(rows <= cols);
    loop {
        let m = random_matrix(rng, rows, cols);
        if m.rank() == rows {
            return m;
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> BitMatrix {
    let rows = (0..rows).map(|_| random_vector(rng, cols)).collect();
    BitMatrix::from_rows(cols, rows).expect("consistent widths")
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitVector {
    let mut v = BitVector::zeros(len);
    for i in 0..len {
        if rng.gen::<bool>() {
            v.set(i, true);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    fn m(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_strs(rows).unwrap()
    }

    fn one() -> Alpha {
        Alpha::from_integer(1)
    }

    fn sd(h: BitMatrix, t: &str, k: usize) -> SyndromeInstance {
        SyndromeInstance::new(h, v(t), k, one()).unwrap()
    }

    #[test]
    fn repetition_code_conversion() {
        let inst = NcpInstance::new(m(&["1", "1"]), v("10"), 1, one()).unwrap();
        let s = generator_to_syndrome(&inst);
        assert_eq!(s.parity_check(), &m(&["11"]));
        assert_eq!(s.syndrome(), &v("1"));
        let x = brute_force_nearest(&s, 1).unwrap().unwrap();
        assert_eq!(x.weight(), 1);
    }

    #[test]
    fn codeword_received_gives_zero_syndrome() {
        let g = m(&["10", "11", "01", "10"]);
        let z = v("0110"); // second column
        let s = generator_to_syndrome(&NcpInstance::new(g, z, 0, one()).unwrap());
        assert!(s.syndrome().is_zero());
        assert_eq!(brute_force_nearest(&s, 0).unwrap(), Some(BitVector::zeros(4)));
    }

    #[test]
    fn full_code_has_no_constraints() {
        let s = generator_to_syndrome(&NcpInstance::new(BitMatrix::identity(3), v("101"), 0, one()).unwrap());
        assert_eq!(s.m(), 0);
        assert_eq!(brute_force_nearest(&s, 0).unwrap(), Some(BitVector::zeros(3)));
    }

    #[test]
    fn labeled_set_transcribes_rows() {
        let d = syndrome_to_labeled_set(&sd(BitMatrix::identity(2), "10", 1)).unwrap();
        assert_eq!(d.points(), &[v("10"), v("01")]);
        assert_eq!(d.labels(), &[true, false]);

        let empty = syndrome_to_labeled_set(&sd(BitMatrix::zeros(0, 3), "", 0)).unwrap();
        assert!(empty.is_empty());

        let d = syndrome_to_labeled_set(&sd(m(&["11"]), "1", 1)).unwrap();
        assert!(d.is_consistent_with(&ParityIndexSet::new([0])));
        assert!(d.is_consistent_with(&ParityIndexSet::new([1])));
        assert!(!d.is_consistent_with(&ParityIndexSet::new([0, 1])));
    }

    #[test]
    fn labeled_set_requires_independent_rows() {
        let err = syndrome_to_labeled_set(&sd(m(&["11", "11"]), "00", 1)).unwrap_err();
        assert_eq!(err, Error::LinearlyDependent);
    }

    #[test]
    fn normalization_drops_consistent_dependent_rows() {
        let inst = sd(m(&["101", "011", "110"]), "101", 1);
        let norm = inst.normalize().unwrap();
        assert_eq!(norm.parity_check(), &m(&["101", "011"]));
        assert_eq!(norm.syndrome(), &v("10"));
    }

    #[test]
    fn normalization_flags_contradictory_rows() {
        let inst = sd(m(&["101", "011", "110"]), "100", 1);
        assert_eq!(inst.normalize().unwrap_err(), Error::UnsatisfiableByAnyParity);
        let dup = sd(m(&["11", "11"]), "10", 1);
        assert_eq!(dup.normalize().unwrap_err(), Error::UnsatisfiableByAnyParity);
    }

    #[test]
    fn brute_force_examples() {
        let zero = sd(BitMatrix::identity(3), "000", 0);
        assert_eq!(brute_force_nearest(&zero, 3).unwrap(), Some(v("000")));
        assert_eq!(brute_force_nearest(&sd(BitMatrix::identity(2), "11", 1), 1).unwrap(), None);
        assert_eq!(brute_force_nearest(&sd(m(&["11"]), "1", 1), 1).unwrap(), Some(v("10")));
        assert!(brute_force_nearest(&zero, 4).is_err());
    }

    #[test]
    fn planted_examples() {
        let (inst, x) = random_planted(8, 5, 0, 3).unwrap();
        assert!(x.is_zero());
        assert!(inst.syndrome().is_zero());

        let a = random_planted(12, 7, 3, 99).unwrap();
        let b = random_planted(12, 7, 3, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_planted(12, 7, 3, 100).unwrap());

        assert!(random_planted(4, 5, 1, 0).is_err());
        assert!(random_planted(4, 4, 5, 0).is_err());
        let (full, _) = random_planted(6, 6, 2, 5).unwrap();
        assert!(full.has_independent_rows());
    }

    #[test]
    fn instance_text_round_trip() {
        let (inst, _) = random_planted(6, 3, 2, 1).unwrap();
        let inst = inst.with_alpha(Alpha::new(3, 2)).unwrap();
        let text = inst.to_text();
        assert!(text.starts_with("ncpsd v1\n3 6 2 3 2\n"));
        assert_eq!(parse_instance(&text).unwrap(), Instance::Syndrome(inst));

        let g = NcpInstance::new(m(&["10", "11", "01"]), v("110"), 1, Alpha::from_integer(2)).unwrap();
        let text = g.to_text();
        assert_eq!(text, "ncpgen v1\n3 2 1 2 1\n10\n11\n01\n110\n");
        assert_eq!(parse_instance(&text).unwrap(), Instance::Generator(g));
    }

    #[test]
    fn zero_row_instance_has_empty_syndrome_line() {
        let inst = sd(BitMatrix::zeros(0, 4), "", 0);
        let text = inst.to_text();
        assert_eq!(text, "ncpsd v1\n0 4 0 1 1\n\n");
        assert_eq!(parse_instance(&text).unwrap(), Instance::Syndrome(inst));
    }

    #[test]
    fn parse_rejects_malformed_instances() {
        for bad in [
            "",
            "ncpxx v1\n",
            "ncpsd v1\n1 2 1 1\n11\n1\n",
            "ncpsd v1\n1 2 1 1 0\n11\n1\n",
            "ncpsd v1\n1 2 1 1 2\n11\n1\n",
            "ncpsd v1\n2 2 1 1 1\n11\n1\n",
            "ncpsd v1\n1 2 1 1 1\n1\n1\n",
            "ncpsd v1\n1 2 1 1 1\n11\n1\n1\n",
            "ncpsd v1\n1 2 1 1 1\n1a\n1\n",
        ] {
            assert!(parse_instance(bad).is_err(), "accepted {bad:?}");
        }
    }

    fn min_distance_to_code(g: &BitMatrix, z: &BitVector) -> usize {
        let cols = g.transpose();
        (0..(1u64 << cols.nrows()))
            .map(|c| {
                let mut y = BitVector::zeros(g.nrows());
                for (j, col) in cols.rows().iter().enumerate() {
                    if c >> j & 1 == 1 {
                        y.xor_assign(col);
                    }
                }
                y.xor(z).weight()
            })
            .min()
            .unwrap()
    }

    proptest! {
        #[test]
        fn views_agree_on_distance(n in 1usize..=6, d in 1usize..=4, gw in any::<u64>(), zw in any::<u64>()) {
            let rows = (0..n).map(|i| BitVector::from_word(d, gw >> (i * d))).collect();
            let g = BitMatrix::from_rows(d, rows).unwrap();
            let z = BitVector::from_word(n, zw);
            let inst = NcpInstance::new(g.clone(), z.clone(), n, one()).unwrap();
            let s = generator_to_syndrome(&inst);
            let x = brute_force_nearest(&s, n).unwrap().expect("x = z always works");
            prop_assert_eq!(x.weight(), min_distance_to_code(&g, &z));

            let set = syndrome_to_labeled_set(&s).unwrap();
            for w in 0..(1u64 << n) {
                let sel = BitVector::from_word(n, w);
                let parity = ParityIndexSet::from_vector(&sel);
                prop_assert_eq!(set.is_consistent_with(&parity), s.is_solution(&sel).unwrap());
            }
        }

        #[test]
        fn planted_sparsity_bounds_optimum(n in 4usize..=10, m_frac in 0.2f64..1.0, k in 0usize..=3, seed in any::<u64>()) {
            let m = ((n as f64) * m_frac) as usize;
            let k = k.min(n);
            let (inst, x) = random_planted(n, m, k, seed).unwrap();
            prop_assert_eq!(x.weight(), k);
            prop_assert!(inst.is_solution(&x).unwrap());
            let best = brute_force_nearest(&inst, k).unwrap().expect("planted solution exists");
            prop_assert!(best.weight() <= k);
            prop_assert!(inst.is_solution(&best).unwrap());
        }
    }
}
