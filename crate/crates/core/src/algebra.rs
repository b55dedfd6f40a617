//! Words over a finite alphabet, polynomials, generating series and their
//! linear representations.
//!
//! Letters are plain indices `0..=m`. Letter `0` is always the drift letter
//! `x0`, whose input channel is identically one. A word `x_{i_k} ... x_{i_1}`
//! is stored left to right, so `letters()[0]` is the outermost (latest in
//! time) letter of the corresponding iterated integral.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{factorial, saturating_pow};

/// Default upper limit on the number of words any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("letter x{letter} is outside the alphabet x0..x{m}")]
    LetterOutOfRange { letter: usize, m: usize },
    #[error("enumeration needs {requested} words, cap is {cap}")]
    CapExceeded { requested: u128, cap: usize },
    #[error("invalid linear representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid growth class: {0}")]
    InvalidGrowth(String),
    #[error("cannot parse word {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// The alphabet `{x0, x1, ..., xm}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    m: usize,
}

impl Alphabet {
    /// An alphabet with `m` controlled letters plus the drift letter.
    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total letter count, `m + 1`.
    pub fn size(&self) -> usize {
        self.m + 1
    }

    pub fn letters(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.m
    }

    pub fn check_letter(&self, letter: usize) -> Result<()> {
        if letter > self.m {
            Err(AlgebraError::LetterOutOfRange { letter, m: self.m })
        } else {
            Ok(())
        }
    }

    pub fn check_word(&self, word: &Word) -> Result<()> {
        word.letters().iter().try_for_each(|&l| self.check_letter(l))
    }
}

/// A finite sequence of letter indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Self(letters)
    }

    /// `x_letter` repeated `count` times.
    pub fn power(letter: usize, count: usize) -> Self {
        Self(vec![letter; count])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of occurrences of `letter`, written `|w|_{x_letter}`.
    pub fn count(&self, letter: usize) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Catenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `x_letter · self`.
    pub fn prepend(&self, letter: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// If `self = prefix · rest`, returns `rest`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0.strip_prefix(prefix.letters()).map(|r| Word(r.to_vec()))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = AlgebraError;

    /// Parses `"x1x0x1"`; `""`, `"∅"` and `"e"` denote the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" || s == "e" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('x').skip(1) {
            let idx = part.parse::<usize>().map_err(|_| AlgebraError::Parse(s.to_string()))?;
            letters.push(idx);
        }
        if !s.starts_with('x') || letters.is_empty() {
            return Err(AlgebraError::Parse(s.to_string()));
        }
        Ok(Word(letters))
    }
}

/// A finite linear combination of words, kept in canonical form (no zero
/// coefficients stored).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Word, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Word::empty(), 1.0)
    }

    pub fn monomial(word: Word, coefficient: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(word, coefficient);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    /// Adds `coefficient · word`, dropping the term if it cancels to zero.
    pub fn add_term(&mut self, word: Word, coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(word);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + coefficient;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn coefficient(&self, word: &Word) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    /// Number of words in the support.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length in the support, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    /// Sum of all coefficients.
    pub fn mass(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn letters(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|w| w.letters().iter().copied()).collect()
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::from_terms(self.iter().map(|(w, c)| (w.clone(), c * factor)))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(w.clone(), c);
        }
        out
    }

    /// Drops every term longer than `order`.
    pub fn truncate(&self, order: usize) -> Polynomial {
        Polynomial::from_terms(
            self.iter().filter(|(w, _)| w.len() <= order).map(|(w, c)| (w.clone(), c)),
        )
    }

    /// Bilinear extension of the word shuffle.
    pub fn shuffle(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                for (w, n) in shuffle(a, b).iter() {
                    out.add_term(w.clone(), ca * cb * n);
                }
            }
        }
        out
    }

    /// Catenation (Cauchy) product `self · other`, keeping words of length
    /// at most `max_len` when given.
    pub fn concat_product(&self, other: &Polynomial, max_len: Option<usize>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                if max_len.is_some_and(|j| a.len() + b.len() > j) {
                    continue;
                }
                out.add_term(a.concat(b), ca * cb);
            }
        }
        out
    }
}

/// Shuffle product of two words.
///
/// `(x_i η) ⧢ (x_j ξ) = x_i (η ⧢ x_j ξ) + x_j (x_i η ⧢ ξ)`; every interleaving
/// is generated and counted, so the coefficient mass is `C(|a|+|b|, |a|)`.
pub fn shuffle(a: &Word, b: &Word) -> Polynomial {
    fn go(a: &[usize], b: &[usize], buf: &mut Vec<usize>, out: &mut BTreeMap<Word, f64>) {
        if a.is_empty() || b.is_empty() {
            let mut w = buf.clone();
            w.extend_from_slice(a);
            w.extend_from_slice(b);
            *out.entry(Word(w)).or_insert(0.0) += 1.0;
            return;
        }
        buf.push(a[0]);
        go(&a[1..], b, buf, out);
        buf.pop();
        buf.push(b[0]);
        go(a, &b[1..], buf, out);
        buf.pop();
    }
    let mut out = BTreeMap::new();
    go(a.letters(), b.letters(), &mut Vec::new(), &mut out);
    Polynomial { terms: out }
}

/// `(μ, γ, λ)` with `(c, η) = λ μ(η) γ` and `μ(x_j) = A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRepresentation {
    matrices: Vec<DMatrix<f64>>,
    gamma: DVector<f64>,
    lambda: RowDVector<f64>,
}

impl LinearRepresentation {
    /// `matrices[j]` is `A_j`; there must be one per letter `x0..xm`.
    pub fn new(
        matrices: Vec<DMatrix<f64>>,
        gamma: DVector<f64>,
        lambda: RowDVector<f64>,
    ) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(AlgebraError::InvalidRepresentation("state dimension must be at least 1".into()));
        }
        if matrices.is_empty() {
            return Err(AlgebraError::InvalidRepresentation("need at least the drift matrix A_0".into()));
        }
        if lambda.len() != n {
            return Err(AlgebraError::InvalidRepresentation(format!(
                "lambda has length {}, gamma has length {n}",
                lambda.len()
            )));
        }
        for (j, a) in matrices.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(AlgebraError::InvalidRepresentation(format!(
                    "A_{j} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        let finite = matrices.iter().all(|a| a.iter().all(|v| v.is_finite()))
            && gamma.iter().all(|v| v.is_finite())
            && lambda.iter().all(|v| v.is_finite());
        if !finite {
            return Err(AlgebraError::InvalidRepresentation("non-finite entry".into()));
        }
        Ok(Self { matrices, gamma, lambda })
    }

    /// Builds from row-major flat matrix data.
    pub fn from_row_major(
        dim: usize,
        matrices: &[Vec<f64>],
        gamma: &[f64],
        lambda: &[f64],
    ) -> Result<Self> {
        let mats = matrices
            .iter()
            .enumerate()
            .map(|(j, data)| {
                if data.len() != dim * dim {
                    Err(AlgebraError::InvalidRepresentation(format!(
                        "A_{j} has {} entries, expected {}",
                        data.len(),
                        dim * dim
                    )))
                } else {
                    Ok(DMatrix::from_row_slice(dim, dim, data))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if gamma.len() != dim {
            return Err(AlgebraError::InvalidRepresentation(format!(
                "gamma has length {}, expected {dim}",
                gamma.len()
            )));
        }
        Self::new(mats, DVector::from_row_slice(gamma), RowDVector::from_row_slice(lambda))
    }

    /// Scalar representation with `A_j = a[j]`.
    pub fn scalar(a: &[f64], gamma: f64, lambda: f64) -> Result<Self> {
        Self::new(
            a.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect(),
            DVector::from_element(1, gamma),
            RowDVector::from_element(1, lambda),
        )
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.matrices.len() - 1)
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, letter: usize) -> &DMatrix<f64> {
        &self.matrices[letter]
    }

    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    pub fn lambda(&self) -> &RowDVector<f64> {
        &self.lambda
    }

    /// `μ(w) = A_{w_0} A_{w_1} ⋯`. The empty word maps to the identity.
    pub fn mu(&self, word: &Word) -> DMatrix<f64> {
        word.letters()
            .iter()
            .fold(DMatrix::identity(self.dim(), self.dim()), |acc, &l| acc * &self.matrices[l])
    }

    /// `λ μ(w) γ` by matrix-vector products applied to `γ`, innermost
    /// letter first. Same operation order as [`SeriesSpec::coefficient_table`],
    /// so both routes give bit-identical values.
    pub fn coefficient(&self, word: &Word) -> f64 {
        let y = word
            .letters()
            .iter()
            .rev()
            .fold(self.gamma.clone(), |y, &l| &self.matrices[l] * y);
        (&self.lambda * y)[(0, 0)]
    }

    /// Same `μ` and `γ`, output row replaced.
    pub fn with_lambda(&self, lambda: RowDVector<f64>) -> Self {
        Self { matrices: self.matrices.clone(), gamma: self.gamma.clone(), lambda }
    }

    /// Letters whose matrix is not identically zero.
    pub fn active_letters(&self) -> Vec<usize> {
        self.matrices
            .iter()
            .enumerate()
            .filter(|(_, a)| a.iter().any(|&v| v != 0.0))
            .map(|(j, _)| j)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    /// `|(c,η)| ≤ K M^|η| |η|!`
    #[serde(alias = "lc")]
    LocallyConvergent,
    /// `|(c,η)| ≤ K M^|η|`
    #[serde(alias = "gc")]
    GloballyConvergent,
    /// `|(c,η)| ≤ K M^|η| / |η|!`
    FactorialDecay,
}

/// A declared coefficient growth bound with constants `K` (scale) and `M` (rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthClass {
    pub kind: GrowthKind,
    #[serde(rename = "K")]
    pub scale: f64,
    #[serde(rename = "M")]
    pub rate: f64,
}

impl GrowthClass {
    pub fn new(kind: GrowthKind, scale: f64, rate: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
            return Err(AlgebraError::InvalidGrowth(format!(
                "K and M must be positive and finite, got K={scale}, M={rate}"
            )));
        }
        Ok(Self { kind, scale, rate })
    }

    pub fn locally_convergent(scale: f64, rate: f64) -> Result<Self> {
        Self::new(GrowthKind::LocallyConvergent, scale, rate)
    }

    pub fn globally_convergent(scale: f64, rate: f64) -> Result<Self> {
        Self::new(GrowthKind::GloballyConvergent, scale, rate)
    }

    pub fn factorial_decay(scale: f64, rate: f64) -> Result<Self> {
        Self::new(GrowthKind::FactorialDecay, scale, rate)
    }

    /// Coefficient bound for words of length `len`.
    pub fn bound(&self, len: usize) -> f64 {
        let geometric = self.scale * self.rate.powi(len as i32);
        match self.kind {
            GrowthKind::LocallyConvergent => geometric * factorial(len),
            GrowthKind::GloballyConvergent => geometric,
            GrowthKind::FactorialDecay => geometric / factorial(len),
        }
    }
}

pub type CoefficientFn = Arc<dyn Fn(&Word) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SeriesSource {
    Polynomial(Polynomial),
    Callback(CoefficientFn),
    Representation(LinearRepresentation),
}

impl fmt::Debug for SeriesSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesSource::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            SeriesSource::Callback(_) => f.write_str("Callback(..)"),
            SeriesSource::Representation(r) => f.debug_tuple("Representation").field(r).finish(),
        }
    }
}

/// A single-output generating series `c : X* → R`.
///
/// Besides the coefficient source, a series records the letters its support
/// can involve. Every word using another letter has coefficient zero, which
/// lets enumeration skip it and gives the effective letter count used by the
/// error bounds.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    alphabet: Alphabet,
    source: SeriesSource,
    growth: Option<GrowthClass>,
    active: Vec<usize>,
}

impl SeriesSpec {
    pub fn from_polynomial(alphabet: Alphabet, poly: Polynomial) -> Result<Self> {
        for (w, _) in poly.iter() {
            alphabet.check_word(w)?;
        }
        let active = poly.letters().into_iter().collect();
        Ok(Self { alphabet, source: SeriesSource::Polynomial(poly), growth: None, active })
    }

    /// A series given by a pure coefficient function.
    pub fn from_callback<F>(alphabet: Alphabet, f: F) -> Self
    where
        F: Fn(&Word) -> f64 + Send + Sync + 'static,
    {
        Self {
            alphabet,
            source: SeriesSource::Callback(Arc::new(f)),
            growth: None,
            active: alphabet.letters().collect(),
        }
    }

    pub fn from_representation(rep: LinearRepresentation) -> Self {
        let active = rep.active_letters();
        Self { alphabet: rep.alphabet(), source: SeriesSource::Representation(rep), growth: None, active }
    }

    pub fn with_growth(mut self, growth: GrowthClass) -> Self {
        self.growth = Some(growth);
        self
    }

    /// Restricts the support to words over `letters`. Coefficients of other
    /// words read as zero from then on.
    pub fn with_active_letters(mut self, letters: &[usize]) -> Result<Self> {
        for &l in letters {
            self.alphabet.check_letter(l)?;
        }
        let set: BTreeSet<usize> = letters.iter().copied().collect();
        self.active = set.into_iter().filter(|l| self.active.contains(l)).collect();
        Ok(self)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn source(&self) -> &SeriesSource {
        &self.source
    }

    pub fn growth(&self) -> Option<GrowthClass> {
        self.growth
    }

    /// Letters the support can involve, ascending.
    pub fn active_letters(&self) -> &[usize] {
        &self.active
    }

    pub fn representation(&self) -> Option<&LinearRepresentation> {
        match &self.source {
            SeriesSource::Representation(r) => Some(r),
            _ => None,
        }
    }

    /// `(c, w)`.
    pub fn coefficient(&self, word: &Word) -> Result<f64> {
        self.alphabet.check_word(word)?;
        Ok(self.coefficient_unchecked(word))
    }

    pub(crate) fn coefficient_unchecked(&self, word: &Word) -> f64 {
        if !word.letters().iter().all(|l| self.active.contains(l)) {
            return 0.0;
        }
        match &self.source {
            SeriesSource::Polynomial(p) => p.coefficient(word),
            SeriesSource::Callback(f) => f(word),
            SeriesSource::Representation(r) => r.coefficient(word),
        }
    }

    /// Coefficients of every word in `table`, in table order.
    pub fn coefficient_table(&self, table: &WordTable) -> Vec<f64> {
        match &self.source {
            SeriesSource::Representation(rep) => {
                // y(x_i η) = A_i y(η), y(∅) = γ
                let mut states: Vec<DVector<f64>> = Vec::with_capacity(table.len());
                let mut out = Vec::with_capacity(table.len());
                for k in 0..table.len() {
                    let y = if k == 0 {
                        rep.gamma().clone()
                    } else {
                        rep.matrix(table.letter(k)) * &states[table.parent(k)]
                    };
                    out.push((rep.lambda() * &y)[(0, 0)]);
                    states.push(y);
                }
                out
            }
            SeriesSource::Polynomial(p) => {
                let mut out = vec![0.0; table.len()];
                for (w, c) in p.iter() {
                    if let Some(k) = table.index_of(w) {
                        out[k] = c;
                    }
                }
                out
            }
            SeriesSource::Callback(_) => {
                (0..table.len()).map(|k| self.coefficient_unchecked(&table.word(k))).collect()
            }
        }
    }

    /// The polynomial of all coefficients up to word length `order`.
    pub fn truncate(&self, order: usize, cap: usize) -> Result<Polynomial> {
        let table = WordTable::new(self.alphabet, &self.active, order, cap)?;
        let coeffs = self.coefficient_table(&table);
        Ok(Polynomial::from_terms((0..table.len()).map(|k| (table.word(k), coeffs[k]))))
    }
}

/// Left shift `prefix⁻¹(c)`: the series `η ↦ (c, prefix·η)`.
pub fn left_shift(prefix: &Word, series: &SeriesSpec) -> Result<SeriesSpec> {
    series.alphabet.check_word(prefix)?;
    if !prefix.letters().iter().all(|l| series.active.contains(l)) {
        return Ok(SeriesSpec {
            alphabet: series.alphabet,
            source: SeriesSource::Polynomial(Polynomial::zero()),
            growth: series.growth,
            active: Vec::new(),
        });
    }
    let (source, active) = match &series.source {
        SeriesSource::Polynomial(p) => {
            let shifted = Polynomial::from_terms(
                p.iter().filter_map(|(w, c)| w.strip_prefix(prefix).map(|r| (r, c))),
            );
            let active = shifted.letters().into_iter().collect();
            (SeriesSource::Polynomial(shifted), active)
        }
        SeriesSource::Callback(_) => {
            let inner = series.clone();
            let prefix = prefix.clone();
            let f = move |w: &Word| inner.coefficient_unchecked(&prefix.concat(w));
            (SeriesSource::Callback(Arc::new(f)), series.active.clone())
        }
        SeriesSource::Representation(rep) => {
            // (c, pη) = (λ μ(p)) μ(η) γ
            let lambda = prefix
                .letters()
                .iter()
                .fold(rep.lambda().clone(), |row, &l| row * rep.matrix(l));
            (SeriesSource::Representation(rep.with_lambda(lambda)), series.active.clone())
        }
    };
    Ok(SeriesSpec { alphabet: series.alphabet, source, growth: series.growth, active })
}

/// All words of length `len` over the alphabet, lexicographic in letter index.
pub fn enumerate_words(alphabet: Alphabet, len: usize, cap: usize) -> Result<Vec<Word>> {
    let letters: Vec<usize> = alphabet.letters().collect();
    enumerate_words_over(&letters, len, cap)
}

/// All words of length `len` over `letters` (which must be ascending).
pub fn enumerate_words_over(letters: &[usize], len: usize, cap: usize) -> Result<Vec<Word>> {
    let count = saturating_pow(letters.len(), len);
    if count > cap as u128 {
        return Err(AlgebraError::CapExceeded { requested: count, cap });
    }
    let count = count as usize;
    let b = letters.len();
    let mut out = Vec::with_capacity(count);
    for mut q in 0..count {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = letters[q % b];
            q /= b;
        }
        out.push(Word(w));
    }
    Ok(out)
}

/// Flat layout of every word of length `0..=max_len` over a letter set.
///
/// Words are ranked by length, then lexicographically. Each non-empty word
/// `x_i η` records its first letter `i` and the index of its suffix `η`,
/// and the suffix always precedes the word. Recursions of the form
/// `V(x_i η) = f(i, V(η))` therefore run as one ascending pass.
#[derive(Debug, Clone)]
pub struct WordTable {
    letters: Vec<usize>,
    max_len: usize,
    offsets: Vec<usize>,
    letter: Vec<u32>,
    parent: Vec<u32>,
}

impl WordTable {
    pub fn new(alphabet: Alphabet, letters: &[usize], max_len: usize, cap: usize) -> Result<Self> {
        for &l in letters {
            alphabet.check_letter(l)?;
        }
        let letters: Vec<usize> = letters.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let b = letters.len();
        // with no letters only the empty word exists
        let levels = if b == 0 { 0 } else { max_len };
        let mut total: u128 = 0;
        let mut offsets = vec![0usize];
        for len in 0..=levels {
            total = total.saturating_add(saturating_pow(b, len));
            if total > cap as u128 {
                return Err(AlgebraError::CapExceeded { requested: total, cap });
            }
            offsets.push(total as usize);
        }
        let total = total as usize;
        let mut letter = vec![0u32; total];
        let mut parent = vec![0u32; total];
        let mut block = 1usize; // b^(len-1)
        for len in 1..offsets.len() - 1 {
            let start = offsets[len];
            let prev = offsets[len - 1];
            for q in 0..offsets[len + 1] - start {
                letter[start + q] = letters[q / block] as u32;
                parent[start + q] = (prev + q % block) as u32;
            }
            block *= b;
        }
        Ok(Self { letters, max_len, offsets, letter, parent })
    }

    pub fn len(&self) -> usize {
        self.letter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letter.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    /// First letter of word `k` (meaningless for `k = 0`).
    pub fn letter(&self, k: usize) -> usize {
        self.letter[k] as usize
    }

    /// Index of the suffix of word `k` after its first letter.
    pub fn parent(&self, k: usize) -> usize {
        self.parent[k] as usize
    }

    /// Index range of the words of length `len`.
    pub fn level(&self, len: usize) -> std::ops::Range<usize> {
        if len + 1 >= self.offsets.len() {
            return 0..0;
        }
        self.offsets[len]..self.offsets[len + 1]
    }

    pub fn word(&self, mut k: usize) -> Word {
        let mut w = Vec::new();
        while k != 0 {
            w.push(self.letter(k));
            k = self.parent(k);
        }
        Word(w)
    }

    pub fn index_of(&self, word: &Word) -> Option<usize> {
        let len = word.len();
        if len + 1 >= self.offsets.len() {
            return None;
        }
        let b = self.letters.len();
        let mut q = 0usize;
        for l in word.letters() {
            let pos = self.letters.binary_search(l).ok()?;
            q = q * b + pos;
        }
        Some(self.offsets[len] + q)
    }
}

/// A word whose coefficient exceeds the declared growth bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthViolation {
    pub word: Word,
    pub coefficient: f64,
    pub bound: f64,
}

/// Every word of length at most `max_len` whose coefficient magnitude
/// exceeds `growth.bound(|η|)`. An empty result certifies the bound on the
/// checked range.
pub fn check_growth(
    series: &SeriesSpec,
    growth: &GrowthClass,
    max_len: usize,
    cap: usize,
) -> Result<Vec<GrowthViolation>> {
    let table = WordTable::new(series.alphabet, &series.active, max_len, cap)?;
    let coeffs = series.coefficient_table(&table);
    let bounds: Vec<f64> = (0..=max_len).map(|len| growth.bound(len)).collect();
    let mut out = Vec::new();
    for len in 0..=max_len {
        for k in table.level(len) {
            if coeffs[k].abs() > bounds[len] {
                out.push(GrowthViolation { word: table.word(k), coefficient: coeffs[k], bound: bounds[len] });
            }
        }
    }
    Ok(out)
}
