//! Dense linear algebra over GF(2).
//!
//! Vectors are bit-packed into `u64` words; bit `i` lives in word `i / 64` at
//! position `i % 64`. Bits past `len` in the last word are always zero, so
//! word-level equality, hashing and popcounts are exact.
//!
//! Indices are 0-based in this API. The text format and user-facing displays
//! are the only places where coordinates are spelled out, and those are
//! position-based strings rather than indices.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// Builds a vector of length `len` with ones exactly at `indices`.
    pub fn from_support<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Result<Self> {
        let mut v = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Error::CoordinateOutOfRange {
                    index: i,
                    arity: len,
                });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `word`, bit `i` of the word becoming coordinate `i`.
    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(len <= WORD, "from_word supports at most 64 coordinates");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word & low_mask(len);
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => v.set(i, true),
                other => {
                    return Err(Error::parse(
                        0,
                        format!("unexpected character {:?} in bit string", other as char),
                    ))
                }
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The first word; the whole vector when `len <= 64`.
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Number of nonzero coordinates.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the nonzero coordinates, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// `self ^= other`. Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// GF(2) inner product. Panics on length mismatch.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(wi, w)| wi * WORD + w.trailing_zeros() as usize)
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Text form: a single-row matrix.
    pub fn to_text(&self) -> String {
        format!("1 {}\n{}\n", self.len, self)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let m = BitMatrix::parse_text(text)?;
        if m.nrows() != 1 {
            return Err(Error::parse(1, format!("expected a vector (1 row), found {} rows", m.nrows())));
        }
        Ok(m.rows.into_iter().next().expect("one row"))
    }
}

fn low_mask(len: usize) -> u64 {
    if len >= WORD {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense matrix over GF(2), stored as a list of rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            cols: ncols,
            rows: vec![BitVector::zeros(ncols); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Builds a matrix from rows that must all have length `ncols`.
    pub fn from_rows(ncols: usize, rows: Vec<BitVector>) -> Result<Self> {
        for r in &rows {
            Error::check_len(ncols, r.len())?;
        }
        Ok(Self { cols: ncols, rows })
    }

    /// Convenience constructor from `0`/`1` strings, e.g. `["101", "011"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| BitVector::parse_bits(r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(ncols, rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    /// `M·v`: coordinate `i` is the inner product of row `i` with `v`.
    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector> {
        Error::check_len(self.cols, v.len())?;
        let mut out = BitVector::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.iter_ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// Reduced row echelon form. Pivots are taken on the lowest-index
    /// nonzero column; zero rows are dropped.
    pub fn row_reduce(&self) -> BitMatrix {
        let (reduced, _) = self.rref_with_pivots();
        reduced
    }

    fn rref_with_pivots(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        (
            BitMatrix {
                cols: self.cols,
                rows,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols);
        self.rows.iter().filter(|r| basis.insert(r)).count()
    }

    /// A maximal linearly independent subset of the rows, in original order,
    /// together with the retained row indices.
    pub fn independent_row_basis(&self) -> (BitMatrix, Vec<usize>) {
        let mut basis = EchelonBasis::new(self.cols);
        let mut kept = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            if basis.insert(row) {
                kept.push(i);
            }
        }
        let rows = kept.iter().map(|&i| self.rows[i].clone()).collect();
        (
            BitMatrix {
                cols: self.cols,
                rows,
            },
            kept,
        )
    }

    /// Basis of `{x : M·x = 0}`, one row per free column of the RREF.
    pub fn null_space(&self) -> BitMatrix {
        let (reduced, pivots) = self.rref_with_pivots();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut x = BitVector::zeros(self.cols);
            x.set(free, true);
            for (row, &p) in reduced.rows.iter().zip(&pivots) {
                if row.get(free) {
                    x.set(p, true);
                }
            }
            out.push(x);
        }
        BitMatrix {
            cols: self.cols,
            rows: out,
        }
    }

    /// Parity-check matrix of the column span of `self`: the rows span the
    /// dual code, so `H·x = 0` iff `x` is a codeword.
    pub fn dual_basis(&self) -> BitMatrix {
        self.transpose().null_space()
    }

    /// Whether `v` lies in the span of the rows.
    pub fn row_span_contains(&self, v: &BitVector) -> Result<bool> {
        Error::check_len(self.cols, v.len())?;
        let mut basis = EchelonBasis::new(self.cols);
        for r in &self.rows {
            basis.insert(r);
        }
        Ok(basis.reduce(v).is_zero())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.nrows(), self.cols);
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the `rows cols` header followed by `rows` lines of `cols` bits.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let (nrows, ncols) = parse_header(lines.next(), 1)?;
        let m = parse_rows(&mut lines, nrows, ncols, 2)?;
        if let Some(extra) = lines.find(|l| !l.is_empty()) {
            return Err(Error::parse(nrows + 2, format!("trailing content {extra:?}")));
        }
        Ok(m)
    }
}

pub(crate) fn parse_header(line: Option<&str>, line_no: usize) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::parse(line_no, "missing `rows cols` header"))?;
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != 2 {
        return Err(Error::parse(line_no, format!("expected `rows cols`, found {line:?}")));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(line_no, format!("not a count: {s:?}")))
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

pub(crate) fn parse_rows<'a, I: Iterator<Item = &'a str>>(
    lines: &mut I,
    nrows: usize,
    ncols: usize,
    first_line_no: usize,
) -> Result<BitMatrix> {
    let mut rows = Vec::with_capacity(nrows);
    for k in 0..nrows {
        let line_no = first_line_no + k;
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(line_no, "unexpected end of input"))?;
        rows.push(parse_bit_line(line, ncols, line_no)?);
    }
    BitMatrix::from_rows(ncols, rows)
}

pub(crate) fn parse_bit_line(line: &str, len: usize, line_no: usize) -> Result<BitVector> {
    if line.len() != len {
        return Err(Error::parse(
            line_no,
            format!("expected {len} bits, found {} characters", line.len()),
        ));
    }
    BitVector::parse_bits(line).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(line_no, msg),
        other => other,
    })
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.nrows(), self.cols)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

/// Incrementally built echelon basis keyed by leading coordinate.
#[derive(Clone, Debug)]
pub(crate) struct EchelonBasis {
    by_lead: Vec<Option<BitVector>>,
}

impl EchelonBasis {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            by_lead: vec![None; len],
        }
    }

    pub(crate) fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        while let Some(lead) = v.first_one() {
            match &self.by_lead[lead] {
                Some(b) => v.xor_assign(b),
                None => break,
            }
        }
        v
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub(crate) fn insert(&mut self, v: &BitVector) -> bool {
        let mut v = v.clone();
        loop {
            let Some(lead) = v.first_one() else {
                return false;
            };
            match &self.by_lead[lead] {
                Some(b) => v.xor_assign(b),
                None => {
                    self.by_lead[lead] = Some(v);
                    return true;
                }
            }
        }
    }
}
