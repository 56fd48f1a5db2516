//! Frequency measures on `∂F` and the current values they induce.
//!
//! A frequency measure is a finite shift-invariant Borel measure on the
//! boundary. It is determined by its values on cylinders, so a measure here is
//! just an exact evaluator `Word → ℚ`. The matching geodesic current assigns
//! `η(Cyl(v) × Cyl(w)) = μ(Cyl(v⁻¹w))` to a product of disjoint ray cylinders.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, pow};
use crate::words::{count_cyclic, reduced_words, Letter, Rank, Word};
use crate::{Error, Result};

pub trait CylinderMeasure {
    fn rank(&self) -> Rank;

    /// `μ(Cyl v)`; the empty word gives the total mass.
    fn eval(&self, v: &Word) -> BigRational;

    fn mass(&self) -> BigRational {
        self.eval(&Word::empty())
    }

    /// Whether this is the uniform measure `μ_A`, which has a closed form
    /// the engine can exploit.
    fn is_uniform(&self) -> bool {
        false
    }
}

/// `μ_A(Cyl v) = 1 / (2k(2k−1)^(|v|−1))`, and 1 on the empty word.
pub fn uniform_eval(rank: Rank, v: &Word) -> BigRational {
    uniform_of_len(rank, v.len())
}

pub(crate) fn uniform_of_len(rank: Rank, n: usize) -> BigRational {
    if n == 0 {
        return rational::one();
    }
    let k = rank.get() as u64;
    BigRational::new(BigInt::one(), BigInt::from(2 * k) * pow(2 * k - 1, n - 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovSpec {
    pub rank: Rank,
    pub mass: BigRational,
    /// Initial distribution indexed by [`Letter::code`].
    pub initial: Vec<BigRational>,
    /// Transition matrix indexed by letter codes `[from][to]`.
    pub transitions: Vec<Vec<BigRational>>,
}

impl MarkovSpec {
    /// Uniform measure written as a Markov chain: `p ≡ 1/2k`, `P ≡ 1/(2k−1)` off the inverse.
    pub fn uniform(rank: Rank) -> Self {
        let n = rank.alphabet_size();
        let p = rational::ratio(1, n as i64);
        let q = rational::ratio(1, n as i64 - 1);
        let mut transitions = vec![vec![rational::zero(); n]; n];
        for x in rank.letters() {
            for y in rank.letters() {
                if y != x.inverse() {
                    transitions[x.code()][y.code()] = q.clone();
                }
            }
        }
        MarkovSpec { rank, mass: rational::one(), initial: vec![p; n], transitions }
    }

    pub fn p(&self, x: Letter) -> &BigRational {
        &self.initial[x.code()]
    }

    pub fn transition(&self, x: Letter, y: Letter) -> &BigRational {
        &self.transitions[x.code()][y.code()]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank.alphabet_size();
        if self.initial.len() != n || self.transitions.len() != n || self.transitions.iter().any(|r| r.len() != n) {
            return Err(Error::ImageCount { expected: n, got: self.initial.len() });
        }
        if !self.mass.is_positive() {
            return Err(Error::NonPositive(String::from("mass")));
        }
        for x in self.rank.letters() {
            if self.p(x).is_negative() {
                return Err(Error::Negative(format!("p({x})")));
            }
            for y in self.rank.letters() {
                let t = self.transition(x, y);
                if t.is_negative() {
                    return Err(Error::Negative(format!("P({x},{y})")));
                }
                if y == x.inverse() && !t.is_zero() {
                    return Err(Error::ForbiddenTransition(x.to_char(), y.to_char()));
                }
            }
        }
        let total: BigRational = self.rank.letters().map(|x| self.p(x).clone()).sum();
        if !total.is_one() {
            return Err(Error::NotStochastic(String::from("initial distribution")));
        }
        for x in self.rank.letters() {
            let row: BigRational = self.rank.letters().map(|y| self.transition(x, y).clone()).sum();
            if !row.is_one() {
                return Err(Error::NotStochastic(format!("transition row {x}")));
            }
        }
        for y in self.rank.letters() {
            let inflow: BigRational = self.rank.letters().map(|x| self.p(x) * self.transition(x, y)).sum();
            if &inflow != self.p(y) {
                return Err(Error::NotStationary);
            }
        }
        Ok(())
    }
}

/// A validated Markov spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovMeasure {
    spec: MarkovSpec,
}

impl MarkovMeasure {
    pub fn spec(&self) -> &MarkovSpec {
        &self.spec
    }
}

impl CylinderMeasure for MarkovMeasure {
    fn rank(&self) -> Rank {
        self.spec.rank
    }

    fn eval(&self, v: &Word) -> BigRational {
        let letters = v.letters();
        let Some(&first) = letters.first() else {
            return self.spec.mass.clone();
        };
        let mut value = &self.spec.mass * self.spec.p(first);
        for pair in letters.windows(2) {
            if value.is_zero() {
                break;
            }
            value *= self.spec.transition(pair[0], pair[1]);
        }
        value
    }
}

/// Counting measure of a cyclic word: `μ_w(Cyl u)` is the number of
/// occurrences of `u` in `…www…` per period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMeasure {
    rank: Rank,
    word: Word,
}

impl RationalMeasure {
    pub fn word(&self) -> &Word {
        &self.word
    }
}

impl CylinderMeasure for RationalMeasure {
    fn rank(&self) -> Rank {
        self.rank
    }

    fn eval(&self, v: &Word) -> BigRational {
        if v.is_empty() {
            return rational::int(self.word.len() as i64);
        }
        rational::int(count_cyclic(v, &self.word) as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrequencyMeasure {
    Uniform(Rank),
    Markov(MarkovMeasure),
    Rational(RationalMeasure),
}

impl FrequencyMeasure {
    pub fn id(&self) -> String {
        match self {
            FrequencyMeasure::Uniform(_) => String::from("uniform"),
            FrequencyMeasure::Markov(_) => String::from("markov"),
            FrequencyMeasure::Rational(m) => format!("rational:{}", m.word),
        }
    }
}

impl CylinderMeasure for FrequencyMeasure {
    fn rank(&self) -> Rank {
        match self {
            FrequencyMeasure::Uniform(k) => *k,
            FrequencyMeasure::Markov(m) => m.rank(),
            FrequencyMeasure::Rational(m) => m.rank(),
        }
    }

    fn eval(&self, v: &Word) -> BigRational {
        match self {
            FrequencyMeasure::Uniform(k) => uniform_eval(*k, v),
            FrequencyMeasure::Markov(m) => m.eval(v),
            FrequencyMeasure::Rational(m) => m.eval(v),
        }
    }

    fn is_uniform(&self) -> bool {
        matches!(self, FrequencyMeasure::Uniform(_))
    }
}

pub fn uniform_measure(rank: Rank) -> FrequencyMeasure {
    FrequencyMeasure::Uniform(rank)
}

pub fn markov_measure(spec: MarkovSpec) -> Result<FrequencyMeasure> {
    spec.validate()?;
    Ok(FrequencyMeasure::Markov(MarkovMeasure { spec }))
}

pub fn rational_measure(rank: Rank, w: &Word) -> Result<FrequencyMeasure> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::NotCyclicallyReduced(w.clone()));
    }
    if w.is_proper_power() {
        return Err(Error::ProperPower(w.clone()));
    }
    if !w.fits_rank(rank) {
        return Err(Error::InvalidLetter('?', rank.get()));
    }
    Ok(FrequencyMeasure::Rational(RationalMeasure { rank, word: w.clone() }))
}

/// `η(Cyl(v) × Cyl(w)) = μ(Cyl(v⁻¹w))` for disjoint ray cylinders.
pub fn current_pair_value<M: CylinderMeasure + ?Sized>(mu: &M, v: &Word, w: &Word) -> Result<BigRational> {
    if v.is_empty() || w.is_empty() {
        return Err(Error::EmptyWord);
    }
    if v.comparable(w) {
        return Err(Error::ComparableCylinders(v.clone(), w.clone()));
    }
    Ok(mu.eval(&v.inverse().concat(w)))
}

/// `L(η) = Σ_{x∈A} η(Cyl[1,x]) = Σ_x μ(Cyl x)`.
pub fn current_length<M: CylinderMeasure + ?Sized>(mu: &M) -> BigRational {
    mu.rank().letters().map(|x| mu.eval(&Word::letter(x))).sum()
}

/// Exact Kolmogorov consistency and shift invariance for every word shorter
/// than `depth` (so all extensions checked have length at most `depth`).
pub fn consistency_check<M: CylinderMeasure + ?Sized>(mu: &M, depth: usize) -> bool {
    let rank = mu.rank();
    for len in 0..depth {
        for v in reduced_words(rank, len) {
            let value = mu.eval(&v);
            if value.is_negative() {
                return false;
            }
            let right: BigRational = v.extensions(rank).map(|e| mu.eval(&e)).sum();
            if right != value {
                return false;
            }
            let left: BigRational = rank
                .letters()
                .filter(|a| v.first() != Some(a.inverse()))
                .map(|a| mu.eval(&Word::letter(a).concat(&v)))
                .sum();
            if left != value {
                return false;
            }
        }
    }
    true
}

/// Finite table of cylinder values, e.g. a computed pushforward. Words missing
/// from the table evaluate to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMeasure {
    pub rank: Rank,
    pub depth: usize,
    pub values: BTreeMap<Word, BigRational>,
}

impl CylinderMeasure for TableMeasure {
    fn rank(&self) -> Rank {
        self.rank
    }

    fn eval(&self, v: &Word) -> BigRational {
        self.values.get(v).cloned().unwrap_or_else(rational::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionReport {
    /// `C₁(a)` per letter, in letter order.
    pub c1: Vec<(Letter, BigRational)>,
    pub c2: Vec<(Letter, BigRational)>,
    /// Translation constants `b(a) = min{C₁(a), 1/C₂(a⁻¹)}`.
    pub b: Vec<(Letter, BigRational)>,
    pub passes: bool,
    pub witness: Option<Letter>,
}

/// Per-letter form of the compactness criterion for a Markov measure.
///
/// For `E ⊆ ∂F ∖ Cyl(a⁻¹)` the ratio `μ(aE)/μ(E)` lies between the extreme
/// values of `p(a)P(a,b)/p(b)` over `b ≠ a⁻¹`. Products over words reduce to
/// powers of single letters, so the global conditions become `C₂(a) ≤ 1` and
/// `C₁(a⁻¹) ≥ C₂(a)` for every letter.
pub fn criterion_check(spec: &MarkovSpec) -> Result<CriterionReport> {
    spec.validate()?;
    let rank = spec.rank;
    for x in rank.letters() {
        if !spec.p(x).is_positive() {
            return Err(Error::NonPositive(format!("p({x})")));
        }
    }
    let n = rank.alphabet_size();
    let mut c1 = vec![rational::zero(); n];
    let mut c2 = vec![rational::zero(); n];
    for a in rank.letters() {
        let ratios: Vec<BigRational> = rank
            .letters()
            .filter(|b| *b != a.inverse())
            .map(|b| spec.p(a) * spec.transition(a, b) / spec.p(b))
            .collect();
        c1[a.code()] = ratios.iter().min().cloned().unwrap_or_else(rational::zero);
        c2[a.code()] = ratios.iter().max().cloned().unwrap_or_else(rational::zero);
    }
    let mut witness = None;
    for a in rank.letters() {
        let ok =
            c1[a.code()].is_positive() && c2[a.code()] <= rational::one() && c1[a.inverse().code()] >= c2[a.code()];
        if !ok {
            witness = Some(a);
            break;
        }
    }
    let b = rank
        .letters()
        .map(|a| {
            let inv = &c2[a.inverse().code()];
            let recip = if inv.is_zero() { None } else { Some(inv.recip()) };
            let value = match recip {
                Some(r) if r < c1[a.code()] => r,
                _ => c1[a.code()].clone(),
            };
            (a, value)
        })
        .collect();
    let tag = |v: &Vec<BigRational>| rank.letters().map(|a| (a, v[a.code()].clone())).collect();
    Ok(CriterionReport { c1: tag(&c1), c2: tag(&c2), b, passes: witness.is_none(), witness })
}
