//! Automorphisms of `F` as verified pairs `(Φ, Φ⁻¹)` of basis images.
//!
//! Every automorphism built from generators (signed permutations, inner
//! automorphisms, elementary transvections and the Whitehead automorphisms
//! they compose into) remembers that factorization. The boundary engine uses
//! it to compose exact cylinder images; free-form maps are factored on demand
//! by [`Automorphism::elementary_factors`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::words::{free_reduce, Letter, Rank, Word};
use crate::{Error, Result};

/// Building blocks with known boundary behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Signed permutation given by the images of the basis letters.
    Permutation(Vec<Letter>),
    /// `x ↦ v x v⁻¹`.
    Inner(Word),
    /// `target ↦ target · multiplier`, all other basis letters fixed. When
    /// `target` is an inverse letter `X`, this sends `x ↦ multiplier⁻¹ x`.
    Transvection { target: Letter, multiplier: Letter },
}

impl Generator {
    pub fn inverse(&self) -> Generator {
        match self {
            Generator::Permutation(images) => {
                let mut inv = images.clone();
                for (g, y) in images.iter().enumerate() {
                    let x = Letter::basis(g as u8);
                    inv[y.generator()] = if y.is_inverse() { x.inverse() } else { x };
                }
                Generator::Permutation(inv)
            }
            Generator::Inner(v) => Generator::Inner(v.inverse()),
            Generator::Transvection { target, multiplier } => {
                Generator::Transvection { target: *target, multiplier: multiplier.inverse() }
            }
        }
    }

    /// Basis images of the generator alone.
    fn images(&self, rank: Rank) -> Result<Vec<Word>> {
        match self {
            Generator::Permutation(images) => {
                if images.len() != rank.get() {
                    return Err(Error::ImageCount { expected: rank.get(), got: images.len() });
                }
                let mut seen = vec![false; rank.get()];
                for y in images {
                    if !rank.contains(*y) || seen[y.generator()] {
                        return Err(Error::NotPermutation);
                    }
                    seen[y.generator()] = true;
                }
                Ok(images.iter().map(|&y| Word::letter(y)).collect())
            }
            Generator::Inner(v) => {
                if !v.fits_rank(rank) {
                    return Err(Error::RankMismatch(rank.get(), 0));
                }
                Ok(rank.basis().map(|x| v.concat(&Word::letter(x)).concat(&v.inverse())).collect())
            }
            Generator::Transvection { target, multiplier } => {
                if !rank.contains(*target) || !rank.contains(*multiplier) {
                    return Err(Error::RankMismatch(rank.get(), 0));
                }
                if target.generator() == multiplier.generator() {
                    return Err(Error::MultiplierTyped);
                }
                let a = Word::letter(*multiplier);
                Ok(rank
                    .basis()
                    .map(|x| {
                        let xw = Word::letter(x);
                        if x.generator() != target.generator() {
                            xw
                        } else if target.is_inverse() {
                            a.inverse().concat(&xw)
                        } else {
                            xw.concat(&a)
                        }
                    })
                    .collect())
            }
        }
    }

    pub fn automorphism(&self, rank: Rank) -> Result<Automorphism> {
        let fwd = self.images(rank)?;
        let bwd = self.inverse().images(rank)?;
        let mut aut = Automorphism::from_basis_images(rank, fwd, bwd);
        aut.factors = Some(vec![self.clone()]);
        Ok(aut)
    }
}

/// An automorphism with both directions stored for all `2k` letters.
#[derive(Clone)]
pub struct Automorphism {
    rank: Rank,
    fwd: Vec<Word>,
    bwd: Vec<Word>,
    factors: Option<Vec<Generator>>,
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.fwd == other.fwd
    }
}

impl Eq for Automorphism {}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({self})")
    }
}

/// `a->w1,b->w2,...` using the basis images.
impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_map(f, self.rank, &self.fwd)
    }
}

fn write_map(f: &mut fmt::Formatter<'_>, rank: Rank, images: &[Word]) -> fmt::Result {
    for (i, x) in rank.basis().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}->{}", x, images[x.code()])?;
    }
    Ok(())
}

fn extend_to_alphabet(rank: Rank, basis_images: Vec<Word>) -> Vec<Word> {
    let mut all = vec![Word::empty(); rank.alphabet_size()];
    for (g, w) in basis_images.into_iter().enumerate() {
        let x = Letter::basis(g as u8);
        all[x.inverse().code()] = w.inverse();
        all[x.code()] = w;
    }
    all
}

fn substitute(images: &[Word], w: &Word) -> Word {
    free_reduce(w.letters().iter().flat_map(|x| images[x.code()].letters().iter().copied()))
}

impl Automorphism {
    fn from_basis_images(rank: Rank, fwd: Vec<Word>, bwd: Vec<Word>) -> Self {
        Automorphism { rank, fwd: extend_to_alphabet(rank, fwd), bwd: extend_to_alphabet(rank, bwd), factors: None }
    }

    /// Verified construction from basis images of `Φ` and of `Φ⁻¹`.
    pub fn new(rank: Rank, fwd: Vec<Word>, bwd: Vec<Word>) -> Result<Self> {
        for images in [&fwd, &bwd] {
            if images.len() != rank.get() {
                return Err(Error::ImageCount { expected: rank.get(), got: images.len() });
            }
            for (g, w) in images.iter().enumerate() {
                if w.is_empty() {
                    return Err(Error::EmptyImage(Letter::basis(g as u8).to_char()));
                }
                if !w.fits_rank(rank) {
                    return Err(Error::InvalidLetter('?', rank.get()));
                }
            }
        }
        let aut = Automorphism::from_basis_images(rank, fwd, bwd);
        for x in rank.basis() {
            let single = Word::letter(x);
            if substitute(&aut.bwd, &aut.fwd[x.code()]) != single || substitute(&aut.fwd, &aut.bwd[x.code()]) != single
            {
                return Err(Error::NotInverse(x.to_char()));
            }
        }
        Ok(aut)
    }

    pub fn identity(rank: Rank) -> Self {
        let id: Vec<Word> = rank.basis().map(Word::letter).collect();
        let mut aut = Automorphism::from_basis_images(rank, id.clone(), id);
        aut.factors = Some(Vec::new());
        aut
    }

    /// `x ↦ v x v⁻¹`.
    pub fn inner(rank: Rank, v: &Word) -> Result<Self> {
        Generator::Inner(v.clone()).automorphism(rank)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn image(&self, x: Letter) -> &Word {
        &self.fwd[x.code()]
    }

    pub fn inverse_image(&self, x: Letter) -> &Word {
        &self.bwd[x.code()]
    }

    pub fn basis_images(&self) -> Vec<Word> {
        self.rank.basis().map(|x| self.fwd[x.code()].clone()).collect()
    }

    pub fn inverse_basis_images(&self) -> Vec<Word> {
        self.rank.basis().map(|x| self.bwd[x.code()].clone()).collect()
    }

    /// Known factorization `Φ = g₁ ∘ g₂ ∘ … ∘ gₙ`, if the automorphism was
    /// assembled from generators.
    pub fn factors(&self) -> Option<&[Generator]> {
        self.factors.as_deref()
    }

    pub fn apply(&self, w: &Word) -> Word {
        substitute(&self.fwd, w)
    }

    pub fn apply_inverse(&self, w: &Word) -> Word {
        substitute(&self.bwd, w)
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            rank: self.rank,
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
            factors: self.factors.as_ref().map(|fs| fs.iter().rev().map(Generator::inverse).collect()),
        }
    }

    /// `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        assert_eq!(self.rank, other.rank, "composing automorphisms of different ranks");
        let fwd = other.fwd.iter().map(|w| self.apply(w)).collect();
        let bwd = self.bwd.iter().map(|w| other.apply_inverse(w)).collect();
        let factors = match (&self.factors, &other.factors) {
            (Some(a), Some(b)) => Some(a.iter().chain(b.iter()).cloned().collect()),
            _ => None,
        };
        Automorphism { rank: self.rank, fwd, bwd, factors }
    }

    /// `inner(v) ∘ self`, i.e. `x ↦ v Φ(x) v⁻¹`.
    pub fn conj(&self, v: &Word) -> Automorphism {
        Automorphism::inner(self.rank, v).expect("conjugator outside the rank").compose(self)
    }

    pub fn is_identity(&self) -> bool {
        self.rank.basis().all(|x| self.fwd[x.code()] == Word::letter(x))
    }

    /// `(max |Φ(x)|, max |Φ⁻¹(x)|)` over the alphabet.
    pub fn lipschitz(&self) -> (usize, usize) {
        let m = self.fwd.iter().map(Word::len).max().unwrap_or(0);
        let m_inv = self.bwd.iter().map(Word::len).max().unwrap_or(0);
        (m, m_inv)
    }

    /// Certified bound `2M²M' + M` on the cancellation in `Φ(u)·Φ(v)` for
    /// reduced `uv`: images of prefixes of `uv` form an `(M, M')`
    /// quasi-geodesic in the tree, and the backtrack at `Φ(u)` is confined to
    /// a ball around where that path re-enters the geodesic.
    pub fn cancellation_bound(&self) -> usize {
        let (m, m_inv) = self.lipschitz();
        2 * m * m * m_inv + m
    }

    /// Returns `(v, π)` with `Φ(x) = v π(x) v⁻¹` and `π` a signed permutation,
    /// if it exists.
    pub fn is_simple(&self) -> Option<(Word, Vec<Letter>)> {
        let x0 = Letter::basis(0);
        let (core, conj) = self.fwd[x0.code()].cyclic_reduce();
        if core.len() != 1 {
            return None;
        }
        let ell = Word::letter(core.letters()[0]);
        let bound = self.fwd.iter().map(Word::len).max().unwrap_or(0) as i64;
        // Two basis images pin the conjugator down uniquely, and it lies in
        // conj · ⟨ℓ⟩.
        for n in 0..=bound {
            for sign in [1i64, -1] {
                if n == 0 && sign < 0 {
                    continue;
                }
                let step = if sign > 0 { ell.clone() } else { ell.inverse() };
                let mut v = conj.clone();
                for _ in 0..n {
                    v = v.concat(&step);
                }
                if let Some(pi) = self.conjugated_permutation(&v) {
                    return Some((v, pi));
                }
            }
        }
        None
    }

    fn conjugated_permutation(&self, v: &Word) -> Option<Vec<Letter>> {
        let vinv = v.inverse();
        let mut seen = vec![false; self.rank.get()];
        let mut pi = Vec::with_capacity(self.rank.get());
        for x in self.rank.basis() {
            let y = vinv.concat(&self.fwd[x.code()]).concat(v);
            if y.len() != 1 {
                return None;
            }
            let y = y.letters()[0];
            if seen[y.generator()] {
                return None;
            }
            seen[y.generator()] = true;
            pi.push(y);
        }
        Some(pi)
    }

    fn basis_weight(&self) -> usize {
        self.rank.basis().map(|x| self.fwd[x.code()].len() + self.bwd[x.code()].len()).sum()
    }

    /// A factorization into generators: the recorded one, or else one found
    /// by greedy Nielsen reduction. The reduction pre- and post-composes with
    /// elementary transvections while the total length of the basis images of
    /// `Φ` and `Φ⁻¹` strictly drops, and stops at a simple automorphism.
    /// Returns `None` if the greedy search stalls.
    pub fn elementary_factors(&self) -> Option<Vec<Generator>> {
        if let Some(fs) = &self.factors {
            return Some(fs.clone());
        }
        let rank = self.rank;
        let moves: Vec<Generator> = rank
            .letters()
            .flat_map(|t| {
                rank.letters()
                    .filter(move |a| a.generator() != t.generator())
                    .map(move |a| Generator::Transvection { target: t, multiplier: a })
            })
            .collect();
        let move_auts: Vec<Automorphism> =
            moves.iter().map(|g| g.automorphism(rank).expect("valid transvection")).collect();

        let mut cur = self.clone();
        let mut pre: Vec<Generator> = Vec::new();
        let mut post: Vec<Generator> = Vec::new();
        loop {
            if let Some((v, pi)) = cur.is_simple() {
                // cur = post_m ∘ … ∘ post_1 ∘ Φ ∘ pre_1 ∘ … ∘ pre_n
                let mut factors: Vec<Generator> = post.iter().map(Generator::inverse).collect();
                if !v.is_empty() {
                    factors.push(Generator::Inner(v));
                }
                if pi.iter().enumerate().any(|(g, y)| *y != Letter::basis(g as u8)) {
                    factors.push(Generator::Permutation(pi));
                }
                factors.extend(pre.iter().rev().map(Generator::inverse));
                return Some(factors);
            }
            let weight = cur.basis_weight();
            let mut best: Option<(usize, bool, usize)> = None;
            for (i, t) in move_auts.iter().enumerate() {
                for on_left in [false, true] {
                    let cand = if on_left { t.compose(&cur) } else { cur.compose(t) };
                    let w = cand.basis_weight();
                    if w < weight && best.is_none_or(|(bw, _, _)| w < bw) {
                        best = Some((w, on_left, i));
                    }
                }
            }
            let (_, on_left, i) = best?;
            if on_left {
                cur = move_auts[i].compose(&cur);
                post.push(moves[i].clone());
            } else {
                cur = cur.compose(&move_auts[i]);
                pre.push(moves[i].clone());
            }
            cur.factors = None;
        }
    }

    /// Same automorphism with the given factorization attached, after checking
    /// that the factors recompose to it.
    pub fn with_factors(&self, factors: Vec<Generator>) -> Result<Automorphism> {
        let mut acc = Automorphism::identity(self.rank);
        for g in &factors {
            acc = acc.compose(&g.automorphism(self.rank)?);
        }
        if acc != *self {
            return Err(Error::Precondition("factors do not recompose to the automorphism"));
        }
        let mut out = self.clone();
        out.factors = Some(factors);
        Ok(out)
    }

    pub fn inverse_to_string(&self) -> String {
        struct Inv<'a>(&'a Automorphism);
        impl fmt::Display for Inv<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_map(f, self.0.rank, &self.0.bwd)
            }
        }
        alloc::format!("{}", Inv(self))
    }
}

pub fn make_automorphism(rank: Rank, fwd: Vec<Word>, bwd: Vec<Word>) -> Result<Automorphism> {
    Automorphism::new(rank, fwd, bwd)
}

pub fn compose(phi: &Automorphism, psi: &Automorphism) -> Automorphism {
    phi.compose(psi)
}

/// Type of a basis letter under a Whitehead automorphism of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WhType {
    /// `x ↦ x`
    Fix,
    /// `x ↦ x a`
    Right,
    /// `x ↦ a⁻¹ x`
    Left,
    /// `x ↦ a⁻¹ x a`
    Conj,
}

impl WhType {
    pub const ALL: [WhType; 4] = [WhType::Fix, WhType::Right, WhType::Left, WhType::Conj];

    pub fn name(self) -> &'static str {
        match self {
            WhType::Fix => "FIX",
            WhType::Right => "RIGHT",
            WhType::Left => "LEFT",
            WhType::Conj => "CONJ",
        }
    }

    pub fn from_name(name: &str) -> Option<WhType> {
        WhType::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(name.trim()))
    }
}

/// Whitehead automorphism of the second kind: fixes the generator under
/// `multiplier` and sends every other basis letter to one of `x`, `xa`,
/// `a⁻¹x`, `a⁻¹xa`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WhiteheadSecondKind {
    rank: Rank,
    multiplier: Letter,
    types: Vec<WhType>,
}

impl WhiteheadSecondKind {
    /// `types` is indexed by generator; the multiplier's own entry must be `Fix`.
    pub fn new(rank: Rank, multiplier: Letter, types: Vec<WhType>) -> Result<Self> {
        if types.len() != rank.get() {
            return Err(Error::ImageCount { expected: rank.get(), got: types.len() });
        }
        if !rank.contains(multiplier) {
            return Err(Error::InvalidLetter(multiplier.to_char(), rank.get()));
        }
        if types[multiplier.generator()] != WhType::Fix {
            return Err(Error::MultiplierTyped);
        }
        Ok(WhiteheadSecondKind { rank, multiplier, types })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn multiplier(&self) -> Letter {
        self.multiplier
    }

    pub fn type_of(&self, x: Letter) -> WhType {
        self.types[x.generator()]
    }

    pub fn types(&self) -> &[WhType] {
        &self.types
    }

    pub fn is_trivial(&self) -> bool {
        self.types.iter().all(|t| *t == WhType::Fix)
    }

    /// Multiplier inverted, same type map.
    pub fn inverse(&self) -> WhiteheadSecondKind {
        WhiteheadSecondKind { rank: self.rank, multiplier: self.multiplier.inverse(), types: self.types.clone() }
    }

    pub fn generators(&self) -> Vec<Generator> {
        let a = self.multiplier;
        let mut out = Vec::new();
        for (g, t) in self.types.iter().enumerate() {
            let x = Letter::basis(g as u8);
            if matches!(t, WhType::Right | WhType::Conj) {
                out.push(Generator::Transvection { target: x, multiplier: a });
            }
            if matches!(t, WhType::Left | WhType::Conj) {
                out.push(Generator::Transvection { target: x.inverse(), multiplier: a });
            }
        }
        out
    }

    pub fn automorphism(&self) -> Automorphism {
        let images = |a: Letter| -> Vec<Word> {
            let aw = Word::letter(a);
            self.rank
                .basis()
                .map(|x| {
                    let xw = Word::letter(x);
                    match self.types[x.generator()] {
                        WhType::Fix => xw,
                        WhType::Right => xw.concat(&aw),
                        WhType::Left => aw.inverse().concat(&xw),
                        WhType::Conj => aw.inverse().concat(&xw).concat(&aw),
                    }
                })
                .collect()
        };
        let mut aut =
            Automorphism::from_basis_images(self.rank, images(self.multiplier), images(self.multiplier.inverse()));
        aut.factors = Some(self.generators());
        aut
    }
}

/// `W2[a; b:RIGHT, c:CONJ]`, listing only the letters that move.
impl fmt::Display for WhiteheadSecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W2[{}", self.multiplier)?;
        let mut first = true;
        for (g, t) in self.types.iter().enumerate() {
            if *t == WhType::Fix {
                continue;
            }
            write!(f, "{} {}:{}", if first { ";" } else { "," }, Letter::basis(g as u8), t.name())?;
            first = false;
        }
        write!(f, "]")
    }
}

/// All `2k·4^(k−1)` second-kind automorphisms, multiplier-major in letter
/// order, then type maps in lexicographic order (earlier generators most
/// significant, `FIX < RIGHT < LEFT < CONJ`). This is the canonical order used
/// for tie-breaking.
pub fn enumerate_second_kind(rank: Rank) -> Vec<WhiteheadSecondKind> {
    let k = rank.get();
    let mut out = Vec::new();
    for a in rank.letters() {
        let free: Vec<usize> = (0..k).filter(|&g| g != a.generator()).collect();
        let count = 4usize.pow(free.len() as u32);
        for code in 0..count {
            let mut types = vec![WhType::Fix; k];
            let mut rest = code;
            for &g in free.iter().rev() {
                types[g] = WhType::ALL[rest % 4];
                rest /= 4;
            }
            out.push(WhiteheadSecondKind { rank, multiplier: a, types });
        }
    }
    out
}

/// All `2^k·k!` signed permutations.
pub fn enumerate_signed_permutations(rank: Rank) -> Vec<Automorphism> {
    let k = rank.get();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    permutations(&mut (0..k).collect(), 0, &mut perms);
    perms.sort();
    let mut out = Vec::new();
    for p in &perms {
        for signs in 0..(1u32 << k) {
            let images: Vec<Letter> = p
                .iter()
                .enumerate()
                .map(|(i, &g)| {
                    let y = Letter::basis(g as u8);
                    if signs >> (k - 1 - i) & 1 == 1 {
                        y.inverse()
                    } else {
                        y
                    }
                })
                .collect();
            out.push(Generator::Permutation(images).automorphism(rank).expect("valid permutation"));
        }
    }
    out
}

fn permutations(items: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, out);
        items.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::random_reduced;
    use alloc::string::ToString;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, r2()).unwrap()
    }

    fn map(fwd: &[&str], bwd: &[&str]) -> Result<Automorphism> {
        Automorphism::new(r2(), fwd.iter().map(|s| w(s)).collect(), bwd.iter().map(|s| w(s)).collect())
    }

    pub(crate) fn nielsen() -> Automorphism {
        map(&["a", "ba"], &["a", "bA"]).unwrap()
    }

    fn swap() -> Automorphism {
        map(&["b", "a"], &["b", "a"]).unwrap()
    }

    #[test]
    fn construction_checks_inverse() {
        assert!(map(&["a", "ba"], &["a", "bA"]).is_ok());
        assert_eq!(map(&["a", "ba"], &["a", "ba"]), Err(Error::NotInverse('b')));
        assert!(map(&["b", "a"], &["b", "a"]).is_ok());
        assert!(matches!(map(&["a", ""], &["a", "b"]), Err(Error::EmptyImage('b'))));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(nielsen().apply(&w("bA")), w("b"));
        assert_eq!(nielsen().apply(&Word::empty()), Word::empty());
        assert_eq!(swap().apply(&w("aB")), w("bA"));
    }

    #[test]
    fn compose_examples() {
        let phi = nielsen();
        let id = Automorphism::identity(r2());
        assert_eq!(phi.compose(&id), phi);
        assert!(phi.compose(&phi.inverse()).is_identity());
        assert_eq!(swap().compose(&phi).image(Letter::basis(1)), &w("ab"));
    }

    #[test]
    fn inner_and_conj_examples() {
        assert!(Automorphism::inner(r2(), &Word::empty()).unwrap().is_identity());
        let ia = Automorphism::inner(r2(), &w("a")).unwrap();
        assert_eq!(ia.apply(&w("b")), w("abA"));
        assert_eq!(nielsen().conj(&w("a")).image(Letter::basis(1)), &w("ab"));
    }

    #[test]
    fn lipschitz_and_bound_examples() {
        let id = Automorphism::identity(r2());
        assert_eq!(id.lipschitz(), (1, 1));
        assert_eq!(id.cancellation_bound(), 3);
        assert_eq!(nielsen().lipschitz(), (2, 2));
        assert_eq!(nielsen().cancellation_bound(), 18);
    }

    #[test]
    fn cancellation_bound_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = nielsen().compose(&swap()).compose(&nielsen()).conj(&w("ab"));
        let bound = phi.cancellation_bound();
        let mut worst = 0;
        for _ in 0..10_000 {
            let u = random_reduced(r2(), 1 + (rand::Rng::gen_range(&mut rng, 0..8)), &mut rng);
            let v = random_reduced(r2(), 1 + (rand::Rng::gen_range(&mut rng, 0..8)), &mut rng);
            if u.last() == v.first().map(|x| x.inverse()) {
                continue;
            }
            let c = phi.apply(&u).cancellation_with(&phi.apply(&v));
            worst = worst.max(c);
        }
        assert!(worst <= bound, "observed {worst} > {bound}");
    }

    #[test]
    fn simplicity_examples() {
        assert_eq!(
            Automorphism::identity(r2()).is_simple(),
            Some((Word::empty(), vec![Letter::basis(0), Letter::basis(1)]))
        );
        let inner = Automorphism::inner(r2(), &w("ab")).unwrap();
        assert_eq!(inner.is_simple(), Some((w("ab"), vec![Letter::basis(0), Letter::basis(1)])));
        assert_eq!(nielsen().is_simple(), None);
        let p = Generator::Permutation(vec![Letter::inverse_of_basis(1), Letter::basis(0)]).automorphism(r2()).unwrap();
        assert_eq!(p.conj(&w("aab")).is_simple().unwrap().0, w("aab"));
        // conj by a power of the image of a
        let q = Automorphism::inner(r2(), &w("aa")).unwrap();
        assert_eq!(q.is_simple().unwrap().0, w("aa"));
    }

    #[test]
    fn simplicity_matches_brute_force() {
        // Exhaustive oracle over conjugators of length <= 2 and all signed
        // permutations.
        let k = r2();
        let perms = enumerate_signed_permutations(k);
        let mut simples = Vec::new();
        for v in crate::words::reduced_words_up_to(k, 2).into_iter().chain([Word::empty()]) {
            for p in &perms {
                simples.push(p.conj(&v));
            }
        }
        for s in &simples {
            assert!(s.is_simple().is_some(), "{s}");
        }
        for tau in enumerate_second_kind(k) {
            let t = tau.automorphism();
            let brute = simples.contains(&t);
            assert_eq!(t.is_simple().is_some(), brute, "{tau}");
        }
    }

    #[test]
    fn enumeration_counts() {
        let k = r2();
        let second = enumerate_second_kind(k);
        assert_eq!(second.len(), 16);
        assert_eq!(enumerate_signed_permutations(k).len(), 8);
        let k3 = Rank::new(3).unwrap();
        assert_eq!(enumerate_second_kind(k3).len(), 6 * 16);
        assert_eq!(enumerate_signed_permutations(k3).len(), 48);
        for tau in &second {
            let t = tau.automorphism();
            let verified = Automorphism::new(k, t.basis_images(), t.inverse_basis_images()).unwrap();
            assert_eq!(verified, t);
            assert!(t.compose(&tau.inverse().automorphism()).is_identity());
            assert!(t.with_factors(tau.generators()).is_ok());
            assert_eq!(t.image(tau.multiplier()), &Word::letter(tau.multiplier()));
        }
    }

    #[test]
    fn whitehead_images_and_display() {
        let tau = WhiteheadSecondKind::new(r2(), Letter::basis(0), vec![WhType::Fix, WhType::Conj]).unwrap();
        assert_eq!(tau.automorphism().image(Letter::basis(1)), &w("Aba"));
        assert_eq!(tau.to_string(), "W2[a; b:CONJ]");
        assert_eq!(tau.inverse().automorphism().image(Letter::basis(1)), &w("abA"));
        assert!(WhiteheadSecondKind::new(r2(), Letter::basis(0), vec![WhType::Right, WhType::Fix]).is_err());
    }

    #[test]
    fn nielsen_reduction_recovers_factors() {
        let k = r2();
        let gens = enumerate_second_kind(k);
        let perms = enumerate_signed_permutations(k);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let mut phi = perms[rand::Rng::gen_range(&mut rng, 0..perms.len())].clone();
            for _ in 0..4 {
                phi = gens[rand::Rng::gen_range(&mut rng, 0..gens.len())].automorphism().compose(&phi);
            }
            let v = random_reduced(k, 2, &mut rng);
            let phi = phi.conj(&v);
            let bare = Automorphism::new(k, phi.basis_images(), phi.inverse_basis_images()).unwrap();
            assert!(bare.factors().is_none());
            let factors = bare.elementary_factors().expect("greedy reduction stalled");
            assert!(bare.with_factors(factors).is_ok());
        }
    }

    fn arb_aut() -> impl Strategy<Value = Automorphism> {
        let k = Rank::new(2).unwrap();
        let gens = enumerate_second_kind(k);
        let perms = enumerate_signed_permutations(k);
        (prop::collection::vec(0..gens.len(), 0..4), 0..perms.len())
            .prop_map(move |(ix, p)| ix.iter().fold(perms[p].clone(), |acc, &i| gens[i].automorphism().compose(&acc)))
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..4, 0..10)
            .prop_map(|v| free_reduce(v.into_iter().map(|i| Rank::new(2).unwrap().letter(i))))
    }

    proptest! {
        #[test]
        fn composition_acts_as_function_composition(phi in arb_aut(), psi in arb_aut(), x in arb_word()) {
            prop_assert_eq!(phi.compose(&psi).apply(&x), phi.apply(&psi.apply(&x)));
            prop_assert_eq!(phi.apply_inverse(&phi.apply(&x)), x.clone());
        }

        #[test]
        fn homomorphism_law(phi in arb_aut(), u in arb_word(), v in arb_word()) {
            prop_assert_eq!(phi.apply(&u.concat(&v)), phi.apply(&u).concat(&phi.apply(&v)));
        }

        #[test]
        fn conjugation_preserves_cyclic_lengths(phi in arb_aut(), v in arb_word(), x in arb_word()) {
            prop_assert_eq!(phi.conj(&v).apply(&x).cyclic_len(), phi.apply(&x).cyclic_len());
        }

        #[test]
        fn cancellation_never_exceeds_bound(phi in arb_aut(), u in arb_word(), v in arb_word()) {
            prop_assume!(u.last().is_none() || v.first() != u.last().map(|x| x.inverse()));
            let c = phi.apply(&u).cancellation_with(&phi.apply(&v));
            prop_assert!(c <= phi.cancellation_bound());
        }

        #[test]
        fn transvections_cancel_at_most_one_letter(t in 0usize..4, a in 0usize..4, u in arb_word(), v in arb_word()) {
            let k = Rank::new(2).unwrap();
            let (t, a) = (k.letter(t), k.letter(a));
            prop_assume!(t.generator() != a.generator());
            prop_assume!(u.last().is_none() || v.first() != u.last().map(|x| x.inverse()));
            let r = Generator::Transvection { target: t, multiplier: a }.automorphism(k).unwrap();
            prop_assert!(r.apply(&u).cancellation_with(&r.apply(&v)) <= 1);
        }
    }
}
