//! Freely and cyclically reduced words over the alphabet `A = Σ ∪ Σ⁻¹`.
//!
//! Basis letters print as lowercase (`a`, `b`, ...) and their inverses as the
//! matching uppercase letter. A [`Word`] is always freely reduced; the empty
//! word is the identity and, read as a cylinder label, the whole boundary.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Rank `k` of the free group, `2 ≤ k ≤ 26`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u8);

impl Rank {
    pub const MAX: usize = 26;

    pub fn new(k: usize) -> Result<Self> {
        if (2..=Self::MAX).contains(&k) {
            Ok(Rank(k as u8))
        } else {
            Err(Error::InvalidRank(k))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `2k`, the number of letters.
    pub fn alphabet_size(self) -> usize {
        2 * self.get()
    }

    /// Letters in index order: the basis `a, b, ...` then the inverses `A, B, ...`.
    pub fn letters(self) -> impl Iterator<Item = Letter> + Clone {
        let k = self.0;
        (0..k).map(Letter::basis).chain((0..k).map(Letter::inverse_of_basis))
    }

    pub fn basis(self) -> impl Iterator<Item = Letter> + Clone {
        (0..self.0).map(Letter::basis)
    }

    /// Letter with the given index in `[0, 2k)`; index `i + k` inverts index `i`.
    pub fn letter(self, index: usize) -> Letter {
        let k = self.get();
        assert!(index < 2 * k, "letter index {index} out of range for rank {k}");
        if index < k {
            Letter::basis(index as u8)
        } else {
            Letter::inverse_of_basis((index - k) as u8)
        }
    }

    pub fn contains(self, x: Letter) -> bool {
        x.generator() < self.get()
    }

    /// Number of reduced words of length `n`: `2k(2k−1)^(n−1)`, and 1 for `n = 0`.
    pub fn count_reduced(self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let k = self.get() as u128;
        2 * k * (2 * k - 1).pow(n as u32 - 1)
    }
}

/// A letter of `A`. Inversion is an involution without fixed points.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(u8);

impl Letter {
    pub const fn basis(generator: u8) -> Self {
        Letter(generator << 1)
    }

    pub const fn inverse_of_basis(generator: u8) -> Self {
        Letter((generator << 1) | 1)
    }

    /// Index of the underlying basis letter.
    pub const fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub const fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub const fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    /// Dense code in `[0, 2k)` that does not depend on the rank; handy for
    /// indexing per-letter tables.
    pub const fn code(self) -> usize {
        self.0 as usize
    }

    pub const fn from_code(code: usize) -> Self {
        Letter(code as u8)
    }

    /// Index in `[0, 2k)` with basis letters first.
    pub fn index(self, rank: Rank) -> usize {
        self.generator() + if self.is_inverse() { rank.get() } else { 0 }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }

    pub fn from_char(c: char, rank: Rank) -> Result<Self> {
        let letter = match c {
            'a'..='z' => Letter::basis(c as u8 - b'a'),
            'A'..='Z' => Letter::inverse_of_basis(c as u8 - b'A'),
            _ => return Err(Error::InvalidLetter(c, rank.get())),
        };
        if rank.contains(letter) {
            Ok(letter)
        } else {
            Err(Error::InvalidLetter(c, rank.get()))
        }
    }

    fn order_key(self) -> (bool, u8) {
        (self.is_inverse(), self.0 >> 1)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word. Ordered lexicographically by letter index, so all
/// words sharing a prefix form a contiguous run in a sorted list.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub const fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(x: Letter) -> Self {
        Word(alloc::vec![x])
    }

    /// Accepts `letters` only if already freely reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self> {
        let word = Word(letters);
        if word.0.windows(2).any(|p| p[1] == p[0].inverse()) {
            Err(Error::NotReduced(word.to_string_lossy()))
        } else {
            Ok(word)
        }
    }

    /// Parses the text grammar, rejecting input that is not freely reduced.
    pub fn parse(text: &str, rank: Rank) -> Result<Self> {
        let letters = parse_letters(text, rank)?;
        Word::from_reduced(letters)
    }

    /// Parses the text grammar and freely reduces the result.
    pub fn parse_reducing(text: &str, rank: Rank) -> Result<Self> {
        Ok(free_reduce(parse_letters(text, rank)?))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn fits_rank(&self, rank: Rank) -> bool {
        self.0.iter().all(|&x| rank.contains(x))
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|x| x.inverse()).collect())
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let cancel = self.0.iter().rev().zip(other.0.iter()).take_while(|(x, y)| **y == x.inverse()).count();
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * cancel);
        out.extend_from_slice(&self.0[..self.len() - cancel]);
        out.extend_from_slice(&other.0[cancel..]);
        Word(out)
    }

    /// Number of letters cancelled from the end of `self` in `self · other`.
    pub fn cancellation_with(&self, other: &Word) -> usize {
        self.0.iter().rev().zip(other.0.iter()).take_while(|(x, y)| **y == x.inverse()).count()
    }

    /// `self · x` when that product is reduced.
    pub fn extended(&self, x: Letter) -> Option<Word> {
        if self.last() == Some(x.inverse()) {
            return None;
        }
        let mut out = self.0.clone();
        out.push(x);
        Some(Word(out))
    }

    /// Reduced one-letter extensions in letter order (all of `A` for the empty word).
    pub fn extensions(&self, rank: Rank) -> impl Iterator<Item = Word> + '_ {
        rank.letters().filter_map(move |x| self.extended(x))
    }

    pub fn lcp_len(&self, other: &Word) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(x, y)| x == y).count()
    }

    pub fn lcp(&self, other: &Word) -> Word {
        self.prefix(self.lcp_len(other))
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Whether the cylinders of the two words are nested.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(x), Some(y)) => self.len() == 1 || x != y.inverse(),
            _ => true,
        }
    }

    /// Splits `self = conj · core · conj⁻¹` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.len();
        let mut t = 0;
        while 2 * t + 1 < n && self.0[t] == self.0[n - 1 - t].inverse() {
            t += 1;
        }
        (Word(self.0[t..n - t].to_vec()), Word(self.0[..t].to_vec()))
    }

    /// `||w||`, the length of the cyclic reduction.
    pub fn cyclic_len(&self) -> usize {
        let n = self.len();
        let mut t = 0;
        while 2 * t + 1 < n && self.0[t] == self.0[n - 1 - t].inverse() {
            t += 1;
        }
        n - 2 * t
    }

    /// Whether `self = z^m` for some `m ≥ 2`.
    pub fn is_proper_power(&self) -> bool {
        let n = self.len();
        (1..n).filter(|d| n.is_multiple_of(*d)).any(|d| (d..n).all(|i| self.0[i] == self.0[i - d]))
    }

    /// Letters of the bi-infinite periodic word `…www…` read from `start`.
    fn cyclic_at(&self, i: usize) -> Letter {
        self.0[i % self.len()]
    }

    pub fn to_string_lossy(&self) -> String {
        self.0.iter().map(|x| x.to_char()).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.0 {
            write!(f, "{}", x.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "\"\"")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

fn parse_letters(text: &str, rank: Rank) -> Result<Vec<Letter>> {
    text.trim().chars().map(|c| Letter::from_char(c, rank)).collect()
}

/// Iterated cancellation of adjacent inverse pairs.
pub fn free_reduce<I: IntoIterator<Item = Letter>>(seq: I) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for x in seq {
        if out.last() == Some(&x.inverse()) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    Word(out)
}

pub fn concat(u: &Word, v: &Word) -> Word {
    u.concat(v)
}

pub fn inverse(w: &Word) -> Word {
    w.inverse()
}

pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    w.cyclic_reduce()
}

pub fn lcp(u: &Word, v: &Word) -> Word {
    u.lcp(v)
}

pub fn comparable(u: &Word, v: &Word) -> bool {
    u.comparable(v)
}

/// Positions `i ∈ [0, |w|)` where `u` is read off the periodic word `…www…`.
pub fn occurrences_in_cyclic(u: &Word, w: &Word) -> Result<usize> {
    if w.is_empty() || u.is_empty() {
        return Err(Error::EmptyWord);
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::NotCyclicallyReduced(w.clone()));
    }
    Ok(count_cyclic(u, w))
}

pub(crate) fn count_cyclic(u: &Word, w: &Word) -> usize {
    (0..w.len()).filter(|&i| u.0.iter().enumerate().all(|(j, &x)| w.cyclic_at(i + j) == x)).count()
}

/// Uniformly random reduced word of length `n`.
pub fn random_reduced<R: Rng + ?Sized>(rank: Rank, n: usize, rng: &mut R) -> Word {
    let size = rank.alphabet_size();
    let mut out: Vec<Letter> = Vec::with_capacity(n);
    for i in 0..n {
        let x = if i == 0 {
            rank.letter(rng.gen_range(0..size))
        } else {
            let forbidden = out[i - 1].inverse();
            let mut j = rng.gen_range(0..size - 1);
            if j >= forbidden.index(rank) {
                j += 1;
            }
            rank.letter(j)
        };
        out.push(x);
    }
    Word(out)
}

/// [`random_reduced`] driven by a ChaCha8 stream seeded from `seed`.
pub fn random_reduced_seeded(rank: Rank, n: usize, seed: u64) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_reduced(rank, n, &mut rng)
}

/// All reduced words of length exactly `n`, in lexicographic order.
pub fn reduced_words(rank: Rank, n: usize) -> Vec<Word> {
    let mut level = alloc::vec![Word::empty()];
    for _ in 0..n {
        level = level.iter().flat_map(|w| w.extensions(rank).collect::<Vec<_>>()).collect();
    }
    level
}

/// All reduced words of length `1..=n`.
pub fn reduced_words_up_to(rank: Rank, n: usize) -> Vec<Word> {
    (1..=n).flat_map(|len| reduced_words(rank, len)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, r2()).unwrap()
    }

    fn seq(s: &str) -> Vec<Letter> {
        parse_letters(s, r2()).unwrap()
    }

    #[test]
    fn letter_indices_follow_basis_then_inverse() {
        let k = r2();
        let letters: Vec<_> = k.letters().collect();
        assert_eq!(letters.iter().map(|x| x.to_char()).collect::<String>(), "abAB");
        for (i, x) in letters.iter().enumerate() {
            assert_eq!(x.index(k), i);
            assert_eq!(k.letter(i), *x);
            assert_eq!(x.inverse().inverse(), *x);
            assert_ne!(x.inverse(), *x);
            assert_eq!(x.inverse().index(k), (i + 2) % 4);
        }
        assert!(Letter::from_char('c', k).is_err());
        assert!(Rank::new(1).is_err());
        assert!(Rank::new(27).is_err());
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(free_reduce(seq("abB")), w("a"));
        assert_eq!(free_reduce(seq("aA")), Word::empty());
        assert_eq!(free_reduce(seq("abAB")), w("abAB"));
        assert_eq!(free_reduce(seq("abBAab")), w("ab"));
    }

    #[test]
    fn parse_rejects_unreduced_unless_asked() {
        assert!(matches!(Word::parse("abB", r2()), Err(Error::NotReduced(_))));
        assert_eq!(Word::parse_reducing("abB", r2()).unwrap(), w("a"));
        assert_eq!(Word::parse("", r2()).unwrap(), Word::empty());
    }

    #[test]
    fn concat_and_inverse_examples() {
        assert_eq!(concat(&w("ab"), &w("BA")), Word::empty());
        assert_eq!(concat(&w("ab"), &w("a")), w("aba"));
        assert_eq!(concat(&w("ab"), &w("b")), w("abb"));
        assert_eq!(inverse(&w("ab")), w("BA"));
        assert_eq!(inverse(&Word::empty()), Word::empty());
        assert_eq!(inverse(&w("aBa")), w("AbA"));
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(cyclic_reduce(&w("aBA")), (w("B"), w("a")));
        assert_eq!(cyclic_reduce(&w("ab")), (w("ab"), Word::empty()));
        assert_eq!(cyclic_reduce(&w("abA")), (w("b"), w("a")));
        assert_eq!(w("abA").cyclic_len(), 1);
    }

    #[test]
    fn lcp_examples() {
        assert_eq!(lcp(&w("ab"), &w("aB")), w("a"));
        assert!(!comparable(&w("ab"), &w("aB")));
        assert_eq!(lcp(&w("a"), &w("ab")), w("a"));
        assert!(comparable(&w("a"), &w("ab")));
        assert_eq!(lcp(&w("b"), &w("Ba")), Word::empty());
        assert!(!comparable(&w("b"), &w("Ba")));
    }

    #[test]
    fn occurrence_examples() {
        assert_eq!(occurrences_in_cyclic(&w("a"), &w("aab")).unwrap(), 2);
        assert_eq!(occurrences_in_cyclic(&w("ba"), &w("aab")).unwrap(), 1);
        assert_eq!(occurrences_in_cyclic(&w("bb"), &w("aab")).unwrap(), 0);
        assert!(matches!(occurrences_in_cyclic(&w("a"), &w("abA")), Err(Error::NotCyclicallyReduced(_))));
    }

    #[test]
    fn proper_powers() {
        assert!(w("abab").is_proper_power());
        assert!(w("aa").is_proper_power());
        assert!(!w("aab").is_proper_power());
        assert!(!w("a").is_proper_power());
    }

    #[test]
    fn random_reduced_small_lengths() {
        let k = r2();
        assert_eq!(random_reduced_seeded(k, 0, 1), Word::empty());
        // n = 1: each letter with probability 1/4, chi-square with 3 dof.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = BTreeMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(random_reduced(k, 1, &mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99.9% quantile of chi-square(3) is 16.27.
        assert!(chi2 < 16.27, "chi2 = {chi2}");

        // n = 2: the 12 reduced words, equiprobable.
        let all = reduced_words(k, 2);
        assert_eq!(all.len() as u128, k.count_reduced(2));
        let mut counts = BTreeMap::new();
        let draws = 24_000;
        for _ in 0..draws {
            let x = random_reduced(k, 2, &mut rng);
            assert!(Word::from_reduced(x.letters().to_vec()).is_ok());
            *counts.entry(x).or_insert(0usize) += 1;
        }
        assert_eq!(counts.keys().cloned().collect::<Vec<_>>(), all);
        let expected = draws as f64 / 12.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99.9% quantile of chi-square(11) is 31.26.
        assert!(chi2 < 31.26, "chi2 = {chi2}");
    }

    #[test]
    fn random_reduced_is_deterministic() {
        let k = Rank::new(3).unwrap();
        assert_eq!(random_reduced_seeded(k, 50, 9), random_reduced_seeded(k, 50, 9));
        assert_ne!(random_reduced_seeded(k, 50, 9), random_reduced_seeded(k, 50, 10));
    }

    fn arb_word(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..4, 0..max).prop_map(|v| free_reduce(v.into_iter().map(|i| r2().letter(i))))
    }

    proptest! {
        #[test]
        fn reduction_is_confluent(raw in prop::collection::vec(0usize..4, 0..24), order in prop::collection::vec(any::<u16>(), 0..64)) {
            let letters: Vec<Letter> = raw.iter().map(|&i| r2().letter(i)).collect();
            let canonical = free_reduce(letters.clone());
            // Cancel adjacent pairs in an arbitrary order.
            let mut cur = letters;
            let mut picks = order.into_iter();
            loop {
                let spots: Vec<usize> = (0..cur.len().saturating_sub(1))
                    .filter(|&i| cur[i + 1] == cur[i].inverse())
                    .collect();
                if spots.is_empty() { break; }
                let pick = picks.next().unwrap_or(0) as usize % spots.len();
                let i = spots[pick];
                cur.drain(i..i + 2);
            }
            prop_assert_eq!(Word::from_reduced(cur).unwrap(), canonical.clone());
            prop_assert_eq!(free_reduce(canonical.letters().to_vec()), canonical);
        }

        #[test]
        fn concat_properties(u in arb_word(12), v in arb_word(12)) {
            prop_assert!(u.concat(&u.inverse()).is_empty());
            let p = u.concat(&v);
            prop_assert!(p.len() >= u.len().abs_diff(v.len()));
            prop_assert_eq!(p.len() % 2, (u.len() + v.len()) % 2);
            prop_assert_eq!(p.inverse(), v.inverse().concat(&u.inverse()));
        }

        #[test]
        fn cyclic_reduce_round_trip(x in arb_word(16)) {
            let (core, conj) = x.cyclic_reduce();
            prop_assert_eq!(conj.concat(&core).concat(&conj.inverse()), x.clone());
            prop_assert!(core.is_cyclically_reduced());
            prop_assert!(core.len() <= x.len());
            prop_assert_eq!(core.cyclic_reduce().0, core.clone());
            prop_assert_eq!(x.cyclic_len(), core.len());
        }

        #[test]
        fn single_letter_occurrences_sum_to_length(x in arb_word(16)) {
            let (core, _) = x.cyclic_reduce();
            prop_assume!(!core.is_empty());
            let total: usize = r2().letters()
                .map(|a| occurrences_in_cyclic(&Word::letter(a), &core).unwrap())
                .sum();
            prop_assert_eq!(total, core.len());
        }
    }
}
