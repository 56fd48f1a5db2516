//! Exact boundary dynamics: images and preimages of cylinders under the
//! homeomorphism of `∂F` induced by an automorphism.
//!
//! A [`BoundaryMap`] stores, for every letter `x`, the clopen sets `Φ(Cyl x)`
//! and `Φ⁻¹(Cyl x)` as canonical cylinder partitions. Equivariance then gives
//! every other cylinder: `Cyl(c) = c · (∂F ∖ Cyl(c_last⁻¹))`, so
//! `Φ(Cyl c) = Φ(c) · Φ(∂F ∖ Cyl(c_last⁻¹))`, a left translate of a stored set.
//!
//! The per-letter data of a generator is computed once (signed permutations
//! and inner automorphisms in closed form, transvections by subdivision with
//! their exact cancellation constant 1) and composite maps compose the data of
//! their factors. Maps without a known factorization fall back to
//! subdivision under the coarse bound of
//! [`Automorphism::cancellation_bound`].

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::automorphisms::{Automorphism, Generator};
use crate::measures::{uniform_of_len, CylinderMeasure, TableMeasure};
use crate::rational;
use crate::words::{reduced_words_up_to, Letter, Rank, Word};
use crate::{Error, Result};

/// Default node budget for subdivision searches.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A clopen subset of `∂F` as a finite, prefix-free, sibling-coalesced set of
/// cylinder labels, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderPartition {
    rank: Rank,
    words: Vec<Word>,
}

impl fmt::Debug for CylinderPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.words.iter()).finish()
    }
}

impl fmt::Display for CylinderPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "}}")
    }
}

impl CylinderPartition {
    pub fn empty(rank: Rank) -> Self {
        CylinderPartition { rank, words: Vec::new() }
    }

    /// `∂F`, made of the `2k` one-letter cylinders.
    pub fn whole(rank: Rank) -> Self {
        CylinderPartition { rank, words: rank.letters().map(Word::letter).collect() }
    }

    pub fn cylinder(rank: Rank, w: &Word) -> Self {
        if w.is_empty() {
            Self::whole(rank)
        } else {
            CylinderPartition { rank, words: vec![w.clone()] }
        }
    }

    /// Canonical form of the union of the given cylinders. The empty word
    /// stands for the whole boundary.
    pub fn from_words<I: IntoIterator<Item = Word>>(rank: Rank, words: I) -> Self {
        let mut words: Vec<Word> = words.into_iter().collect();
        if words.iter().any(Word::is_empty) {
            return Self::whole(rank);
        }
        words.sort();
        words.dedup();
        let mut kept: Vec<Word> = Vec::with_capacity(words.len());
        for w in words {
            if kept.last().is_none_or(|p| !p.is_prefix_of(&w)) {
                kept.push(w);
            }
        }
        CylinderPartition { rank, words: coalesce(rank, kept) }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.words.len() == self.rank.alphabet_size() && self.words.iter().all(|w| w.len() == 1)
    }

    pub fn max_depth(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn union(&self, other: &CylinderPartition) -> CylinderPartition {
        Self::from_words(self.rank, self.words.iter().chain(other.words.iter()).cloned())
    }

    pub fn complement(&self) -> CylinderPartition {
        let mut out = Vec::new();
        let root = Word::empty();
        complement_rec(self.rank, &root, &self.words, &mut out);
        Self::from_words(self.rank, out)
    }

    /// Left translate `g · E`. A cylinder `Cyl(c)` maps onto the single
    /// cylinder `Cyl(gc)` unless `c` is a prefix of `g⁻¹`, in which case it
    /// is split into its children first.
    pub fn translate(&self, g: &Word) -> CylinderPartition {
        if g.is_empty() {
            return self.clone();
        }
        let ginv = g.inverse();
        let mut out = Vec::with_capacity(self.words.len());
        for c in &self.words {
            translate_rec(self.rank, g, &ginv, c, &mut out);
        }
        Self::from_words(self.rank, out)
    }

    /// Longest word whose cylinder contains the whole set.
    pub fn lcp(&self) -> Word {
        let mut it = self.words.iter();
        let Some(first) = it.next() else {
            return Word::empty();
        };
        let mut n = first.len();
        for w in it {
            n = n.min(first.lcp_len(w));
        }
        first.prefix(n)
    }

    /// `Some(true)` if `Cyl(w)` lies inside the set, `Some(false)` if it is
    /// disjoint from it, `None` if it straddles the boundary.
    pub fn classify(&self, w: &Word) -> Option<bool> {
        if w.is_empty() {
            return if self.is_whole() {
                Some(true)
            } else if self.is_empty() {
                Some(false)
            } else {
                None
            };
        }
        let i = self.words.partition_point(|x| x < w);
        if i > 0 && self.words[i - 1].is_prefix_of(w) {
            return Some(true);
        }
        if i < self.words.len() && w.is_prefix_of(&self.words[i]) {
            return if self.words[i] == *w { Some(true) } else { None };
        }
        Some(false)
    }

    pub fn mass<M: CylinderMeasure + ?Sized>(&self, mu: &M) -> BigRational {
        self.words.iter().map(|w| mu.eval(w)).sum()
    }
}

fn coalesce(rank: Rank, words: Vec<Word>) -> Vec<Word> {
    let max = words.iter().map(Word::len).max().unwrap_or(0);
    let mut set: BTreeSet<Word> = words.into_iter().collect();
    let siblings = rank.alphabet_size() - 1;
    for len in (2..=max).rev() {
        let mut groups: BTreeMap<Word, usize> = BTreeMap::new();
        for w in set.iter().filter(|w| w.len() == len) {
            *groups.entry(w.prefix(len - 1)).or_insert(0) += 1;
        }
        for (parent, count) in groups {
            if count == siblings {
                for child in parent.extensions(rank).collect::<Vec<_>>() {
                    set.remove(&child);
                }
                set.insert(parent);
            }
        }
    }
    set.into_iter().collect()
}

fn complement_rec(rank: Rank, prefix: &Word, slice: &[Word], out: &mut Vec<Word>) {
    if slice.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if slice[0] == *prefix {
        return;
    }
    let depth = prefix.len();
    let mut i = 0;
    for child in prefix.extensions(rank) {
        let x = child.letters()[depth];
        let start = i;
        while i < slice.len() && slice[i].letters()[depth] == x {
            i += 1;
        }
        complement_rec(rank, &child, &slice[start..i], out);
    }
}

fn translate_rec(rank: Rank, g: &Word, ginv: &Word, c: &Word, out: &mut Vec<Word>) {
    if c.is_prefix_of(ginv) {
        for child in c.extensions(rank) {
            translate_rec(rank, g, ginv, &child, out);
        }
    } else {
        out.push(g.concat(c));
    }
}

/// Counters reported alongside exact results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeStats {
    /// Subdivision nodes visited.
    pub nodes: u64,
    /// Cylinders across the partitions used.
    pub cylinders: u64,
    /// Cylinder pairs summed.
    pub pairs: u64,
}

impl NodeStats {
    pub fn absorb(&mut self, other: NodeStats) {
        self.nodes += other.nodes;
        self.cylinders += other.cylinders;
        self.pairs += other.pairs;
    }
}

/// Breadth-first subdivision for `{ξ : Φ(ξ) ∈ Cyl(u)}` given a routine that
/// returns a certain prefix of `Φ(Cyl w)` for each node `w`.
fn subdivide<F>(rank: Rank, u: &Word, budget: u64, stats: &mut NodeStats, mut certain: F) -> Result<CylinderPartition>
where
    F: FnMut(&Word) -> Word,
{
    if u.is_empty() {
        return Ok(CylinderPartition::whole(rank));
    }
    let mut queue: VecDeque<Word> = rank.letters().map(Word::letter).collect();
    let mut included = Vec::new();
    while let Some(w) = queue.pop_front() {
        stats.nodes += 1;
        if stats.nodes > budget {
            return Err(Error::ResourceLimit("subdivision nodes", budget));
        }
        let s = certain(&w);
        if u.is_prefix_of(&s) {
            included.push(w);
        } else if s.is_prefix_of(u) {
            queue.extend(w.extensions(rank));
        }
    }
    Ok(CylinderPartition::from_words(rank, included))
}

/// Prefix of `Φ(w)` that survives any cancellation allowed by `bound`.
pub fn truncated_prefix(aut: &Automorphism, w: &Word, bound: usize) -> Word {
    let img = aut.apply(w);
    img.prefix(img.len().saturating_sub(bound))
}

/// Coarse certain prefix: `Φ(w)` minus [`Automorphism::cancellation_bound`] letters.
pub fn stable_prefix_coarse(aut: &Automorphism, w: &Word) -> Word {
    truncated_prefix(aut, w, aut.cancellation_bound())
}

/// Preimage of `Cyl(u)` by subdivision, certifying each node with a
/// cancellation bound valid for `aut`.
pub fn certified_preimage(aut: &Automorphism, bound: usize, u: &Word, budget: u64) -> Result<CylinderPartition> {
    let mut stats = NodeStats::default();
    subdivide(aut.rank(), u, budget, &mut stats, |w| truncated_prefix(aut, w, bound))
}

/// Exact per-letter boundary data of an automorphism.
#[derive(Clone, Debug)]
pub struct BoundaryMap {
    aut: Automorphism,
    /// `Φ(Cyl x)` by letter code.
    images: Vec<CylinderPartition>,
    /// `Φ⁻¹(Cyl x)` by letter code.
    preimages: Vec<CylinderPartition>,
    /// `Φ(∂F ∖ Cyl(x⁻¹))` by letter code.
    image_tails: Vec<CylinderPartition>,
    /// `Φ⁻¹(∂F ∖ Cyl(x⁻¹))` by letter code.
    preimage_tails: Vec<CylinderPartition>,
}

impl BoundaryMap {
    fn from_parts(aut: Automorphism, images: Vec<CylinderPartition>, preimages: Vec<CylinderPartition>) -> Self {
        let tails = |sets: &[CylinderPartition]| -> Vec<CylinderPartition> {
            (0..sets.len()).map(|c| sets[Letter::from_code(c).inverse().code()].complement()).collect()
        };
        let image_tails = tails(&images);
        let preimage_tails = tails(&preimages);
        BoundaryMap { aut, images, preimages, image_tails, preimage_tails }
    }

    pub fn identity(rank: Rank) -> Self {
        let cyl: Vec<CylinderPartition> = (0..rank.alphabet_size())
            .map(|c| CylinderPartition::cylinder(rank, &Word::letter(Letter::from_code(c))))
            .collect();
        Self::from_parts(Automorphism::identity(rank), cyl.clone(), cyl)
    }

    pub fn from_generator(rank: Rank, g: &Generator) -> Result<Self> {
        let aut = g.automorphism(rank)?;
        let n = rank.alphabet_size();
        let letter = |c: usize| Word::letter(Letter::from_code(c));
        let (images, preimages) = match g {
            Generator::Permutation(_) => (
                (0..n).map(|c| CylinderPartition::cylinder(rank, &aut.apply(&letter(c)))).collect(),
                (0..n).map(|c| CylinderPartition::cylinder(rank, &aut.apply_inverse(&letter(c)))).collect(),
            ),
            Generator::Inner(v) => (
                (0..n).map(|c| CylinderPartition::cylinder(rank, &letter(c)).translate(v)).collect(),
                (0..n).map(|c| CylinderPartition::cylinder(rank, &letter(c)).translate(&v.inverse())).collect(),
            ),
            Generator::Transvection { .. } => {
                // Cancellation under a transvection is at most one letter.
                let inv = aut.inverse();
                let mut images = Vec::with_capacity(n);
                let mut preimages = Vec::with_capacity(n);
                for c in 0..n {
                    images.push(certified_preimage(&inv, 1, &letter(c), DEFAULT_BUDGET)?);
                    preimages.push(certified_preimage(&aut, 1, &letter(c), DEFAULT_BUDGET)?);
                }
                (images, preimages)
            }
        };
        Ok(Self::from_parts(aut, images, preimages))
    }

    /// Boundary data for `outer ∘ inner`.
    pub fn compose(outer: &BoundaryMap, inner: &BoundaryMap) -> BoundaryMap {
        let aut = outer.aut.compose(&inner.aut);
        let images = inner.images.iter().map(|s| outer.image_of_set(s)).collect();
        let preimages = outer.preimages.iter().map(|s| inner.preimage_of_set(s)).collect();
        Self::from_parts(aut, images, preimages)
    }

    /// Data from a factorization `g₁ ∘ … ∘ gₙ`.
    pub fn from_factors(rank: Rank, factors: &[Generator]) -> Result<Self> {
        let mut acc = BoundaryMap::identity(rank);
        for g in factors.iter().rev() {
            acc = BoundaryMap::compose(&BoundaryMap::from_generator(rank, g)?, &acc);
        }
        Ok(acc)
    }

    /// Data for any automorphism: through its recorded or Nielsen-reduced
    /// factorization, else by certified subdivision within `budget` nodes.
    pub fn with_budget(aut: &Automorphism, budget: u64) -> Result<Self> {
        let rank = aut.rank();
        if let Some(factors) = aut.elementary_factors() {
            let mut bm = Self::from_factors(rank, &factors)?;
            debug_assert!(bm.aut == *aut);
            bm.aut = aut.clone();
            return Ok(bm);
        }
        Self::by_subdivision(aut, budget)
    }

    pub fn new(aut: &Automorphism) -> Result<Self> {
        Self::with_budget(aut, DEFAULT_BUDGET)
    }

    /// Per-letter data from the coarse certified bound alone.
    pub fn by_subdivision(aut: &Automorphism, budget: u64) -> Result<Self> {
        let rank = aut.rank();
        let inv = aut.inverse();
        let (fwd_bound, bwd_bound) = (aut.cancellation_bound(), inv.cancellation_bound());
        let mut images = Vec::new();
        let mut preimages = Vec::new();
        for x in 0..rank.alphabet_size() {
            let u = Word::letter(Letter::from_code(x));
            images.push(certified_preimage(&inv, bwd_bound, &u, budget)?);
            preimages.push(certified_preimage(aut, fwd_bound, &u, budget)?);
        }
        Ok(Self::from_parts(aut.clone(), images, preimages))
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.aut
    }

    pub fn rank(&self) -> Rank {
        self.aut.rank()
    }

    pub fn inverse(&self) -> BoundaryMap {
        BoundaryMap {
            aut: self.aut.inverse(),
            images: self.preimages.clone(),
            preimages: self.images.clone(),
            image_tails: self.preimage_tails.clone(),
            preimage_tails: self.image_tails.clone(),
        }
    }

    /// `Φ(Cyl c)`.
    pub fn image_of_cylinder(&self, c: &Word) -> CylinderPartition {
        match c.last() {
            None => CylinderPartition::whole(self.rank()),
            Some(x) => self.image_tails[x.code()].translate(&self.aut.apply(c)),
        }
    }

    /// `Φ⁻¹(Cyl u)`, computed directly from the inverse data.
    pub fn preimage_of_cylinder(&self, u: &Word) -> CylinderPartition {
        match u.last() {
            None => CylinderPartition::whole(self.rank()),
            Some(x) => self.preimage_tails[x.code()].translate(&self.aut.apply_inverse(u)),
        }
    }

    pub fn image_of_set(&self, set: &CylinderPartition) -> CylinderPartition {
        CylinderPartition::from_words(
            self.rank(),
            set.words().iter().flat_map(|c| self.image_of_cylinder(c).words.into_iter()),
        )
    }

    pub fn preimage_of_set(&self, set: &CylinderPartition) -> CylinderPartition {
        CylinderPartition::from_words(
            self.rank(),
            set.words().iter().flat_map(|u| self.preimage_of_cylinder(u).words.into_iter()),
        )
    }

    /// Longest `s` with `Φ(Cyl w) ⊆ Cyl(s)`.
    pub fn stable_prefix(&self, w: &Word) -> Word {
        self.image_of_cylinder(w).lcp()
    }

    /// The per-letter images `Φ(Cyl x)`, in letter order.
    pub fn letter_images(&self) -> Vec<(Letter, &CylinderPartition)> {
        self.rank().letters().map(|x| (x, &self.images[x.code()])).collect()
    }

    /// Largest number of letters of `Φ(u)` cancelled by `Φ(v)` over reduced
    /// products `uv`, computed from the boundary data: the maximal common
    /// prefix between `Φ(Cyl x)` and `Φ(Cyl y)` over distinct letters.
    pub fn exact_cancellation(&self) -> usize {
        let mut best = 0;
        let rank = self.rank();
        for x in rank.letters() {
            for y in rank.letters().filter(|y| *y > x) {
                for p in self.images[x.code()].words() {
                    for q in self.images[y.code()].words() {
                        best = best.max(p.lcp_len(q));
                    }
                }
            }
        }
        best
    }
}

/// Exact stable prefix of `Φ(Cyl w)`.
pub fn stable_prefix(bm: &BoundaryMap, w: &Word) -> Word {
    bm.stable_prefix(w)
}

/// `Φ⁻¹(Cyl u)` by breadth-first subdivision. Each node `w` is included when
/// `u` is a prefix of the stable prefix of `Φ(Cyl w)`, dropped when the two
/// are not comparable, and split otherwise.
pub fn preimage_partition(bm: &BoundaryMap, u: &Word, budget: u64) -> Result<(CylinderPartition, NodeStats)> {
    if u.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut stats = NodeStats::default();
    let partition = subdivide(bm.rank(), u, budget, &mut stats, |w| bm.stable_prefix(w))?;
    stats.cylinders = partition.len() as u64;
    Ok((partition, stats))
}

pub fn partition_mass<M: CylinderMeasure + ?Sized>(mu: &M, p: &CylinderPartition) -> BigRational {
    p.mass(mu)
}

/// `Σ_{v∈left, w∈right} μ(v⁻¹w)` for disjoint sets. For `μ_A` only the
/// lengths `|v| + |w| − 2|lcp(v,w)|` matter, so they are histogrammed first.
pub fn pair_sum<M: CylinderMeasure + ?Sized>(
    mu: &M,
    left: &CylinderPartition,
    right: &CylinderPartition,
    stats: &mut NodeStats,
) -> BigRational {
    stats.pairs += (left.len() * right.len()) as u64;
    if mu.is_uniform() {
        let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
        for v in left.words() {
            for w in right.words() {
                let n = v.len() + w.len() - 2 * v.lcp_len(w);
                *hist.entry(n).or_insert(0) += 1;
            }
        }
        hist.into_iter().map(|(n, count)| uniform_of_len(mu.rank(), n) * rational::int(count as i64)).sum()
    } else {
        let mut total = BigRational::zero();
        for v in left.words() {
            let vinv = v.inverse();
            for w in right.words() {
                total += mu.eval(&vinv.concat(w));
            }
        }
        total
    }
}

/// `(Φη)(Cyl[1,u])` for `η = α(μ)`, i.e. the image frequency measure of
/// `Cyl(u)`: `Cyl[1,u]` is the product of `∂F ∖ Cyl(u₁)` and `Cyl(u)`, and
/// its preimage is the product of the two preimage sets.
pub fn pushforward_current_value<M: CylinderMeasure + ?Sized>(
    bm: &BoundaryMap,
    mu: &M,
    u: &Word,
    stats: &mut NodeStats,
) -> Result<BigRational> {
    let first = u.first().ok_or(Error::EmptyWord)?;
    let target = bm.preimage_of_cylinder(u);
    let outside = bm.preimage_of_cylinder(&Word::letter(first)).complement();
    stats.cylinders += (target.len() + outside.len()) as u64;
    Ok(pair_sum(mu, &outside, &target, stats))
}

/// Image measure on every cylinder of length at most `depth`, with the empty
/// word carrying the total mass.
pub fn pushforward_table<M: CylinderMeasure + ?Sized>(bm: &BoundaryMap, mu: &M, depth: usize) -> Result<TableMeasure> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1"));
    }
    let rank = bm.rank();
    let mut values = BTreeMap::new();
    let mut stats = NodeStats::default();
    let mut total = BigRational::zero();
    for v in reduced_words_up_to(rank, depth) {
        let value = pushforward_current_value(bm, mu, &v, &mut stats)?;
        if v.len() == 1 {
            total += &value;
        }
        values.insert(v, value);
    }
    values.insert(Word::empty(), total);
    Ok(TableMeasure { rank, depth, values })
}

/// `x ↦ μ_A(Φ⁻¹ Cyl x)`.
pub fn depth1_profile(bm: &BoundaryMap) -> Vec<(Letter, BigRational)> {
    let mu = crate::measures::uniform_measure(bm.rank());
    bm.rank().letters().map(|x| (x, bm.preimage_of_cylinder(&Word::letter(x)).mass(&mu))).collect()
}

/// Greedy recentering: descend from the root to the longest `v` whose
/// preimage `Φ⁻¹(Cyl v)` keeps uniform mass at least 1/2, taking the least
/// letter on ties, and return `v` with `Ψ = x ↦ v⁻¹ Φ(x) v`.
pub fn recenter(bm: &BoundaryMap, budget: u64) -> Result<(Word, Automorphism)> {
    let rank = bm.rank();
    let mu = crate::measures::uniform_measure(rank);
    let half = rational::ratio(1, 2);
    let mut v = Word::empty();
    let mut steps = 0u64;
    'descend: loop {
        for child in v.extensions(rank).collect::<Vec<_>>() {
            if bm.preimage_of_cylinder(&child).mass(&mu) >= half {
                v = child;
                steps += 1;
                if steps > budget {
                    return Err(Error::ResourceLimit("recentering depth", budget));
                }
                continue 'descend;
            }
        }
        break;
    }
    let psi = bm.automorphism().conj(&v.inverse());
    Ok((v, psi))
}

/// Memo of preimage partitions keyed by the automorphism's map text and the
/// target word.
#[derive(Debug, Clone, Default)]
pub struct PartitionCache {
    entries: BTreeMap<(String, Word), CylinderPartition>,
}

impl PartitionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(aut: &Automorphism) -> String {
        alloc::format!("{aut}")
    }

    pub fn get(&self, aut_key: &str, u: &Word) -> Option<&CylinderPartition> {
        self.entries.get(&(String::from(aut_key), u.clone()))
    }

    pub fn insert(&mut self, aut_key: String, u: Word, p: CylinderPartition) {
        self.entries.insert((aut_key, u), p);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Word, &CylinderPartition)> {
        self.entries.iter().map(|((k, u), p)| (k.as_str(), u, p))
    }

    /// Cached preimage, computed on a miss.
    pub fn preimage(&mut self, bm: &BoundaryMap, u: &Word) -> CylinderPartition {
        let key = (Self::key(bm.automorphism()), u.clone());
        self.entries.entry(key).or_insert_with(|| bm.preimage_of_cylinder(u)).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{enumerate_second_kind, enumerate_signed_permutations};
    use crate::measures::{consistency_check, uniform_measure};
    use crate::rational::ratio;
    use crate::words::{random_reduced, reduced_words};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, r2()).unwrap()
    }

    fn set(words: &[&str]) -> CylinderPartition {
        CylinderPartition::from_words(r2(), words.iter().map(|s| w(s)))
    }

    fn nielsen() -> Automorphism {
        Automorphism::new(r2(), vec![w("a"), w("ba")], vec![w("a"), w("bA")]).unwrap()
    }

    fn test_family() -> Vec<Automorphism> {
        let k = r2();
        let gens = enumerate_second_kind(k);
        let perms = enumerate_signed_permutations(k);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut out = vec![Automorphism::identity(k), nielsen(), Automorphism::inner(k, &w("ab")).unwrap()];
        for _ in 0..12 {
            let mut phi = perms[rng.gen_range(0..perms.len())].clone();
            for _ in 0..rng.gen_range(1..4) {
                phi = gens[rng.gen_range(0..gens.len())].automorphism().compose(&phi);
            }
            out.push(phi);
        }
        out
    }

    #[test]
    fn canonical_form() {
        assert_eq!(set(&["ab", "a", "b"]).words(), &[w("a"), w("b")]);
        assert_eq!(set(&["aa", "ab", "aB"]).words(), &[w("a")]);
        assert_eq!(set(&["aaa", "aab", "aaB", "ab", "aB"]).words(), &[w("a")]);
        assert!(set(&["a", "b", "A", "B"]).is_whole());
        assert!(set(&[""]).is_whole());
    }

    #[test]
    fn complement_and_classify() {
        let s = set(&["aa", "ab"]);
        assert_eq!(s.complement(), set(&["aB", "b", "A", "B"]));
        assert_eq!(s.complement().complement(), s);
        assert!(CylinderPartition::empty(r2()).complement().is_whole());
        assert!(CylinderPartition::whole(r2()).complement().is_empty());
        assert_eq!(s.classify(&w("aab")), Some(true));
        assert_eq!(s.classify(&w("a")), None);
        assert_eq!(s.classify(&w("aB")), Some(false));
        assert_eq!(s.classify(&w("b")), Some(false));
    }

    #[test]
    fn translation_splits_when_needed() {
        assert_eq!(set(&["b"]).translate(&w("a")), set(&["ab"]));
        // a · Cyl(A) = ∂F ∖ Cyl(a)
        assert_eq!(set(&["A"]).translate(&w("a")), set(&["b", "A", "B"]));
        assert_eq!(CylinderPartition::whole(r2()).translate(&w("abA")), CylinderPartition::whole(r2()));
        let mu = uniform_measure(r2());
        let s = set(&["A", "bb"]);
        assert_eq!(s.translate(&w("ab")).translate(&w("BA")), s);
        assert!(s.translate(&w("a")).mass(&mu) >= s.mass(&mu) / rational::int(3));
    }

    #[test]
    fn nielsen_preimages() {
        let bm = BoundaryMap::new(&nielsen()).unwrap();
        let mu = uniform_measure(r2());
        let expect = [("a", &["aa", "ab"][..]), ("A", &["A", "B"]), ("b", &["b"]), ("B", &["aB"])];
        let mut total = BigRational::zero();
        for (u, words) in expect {
            let direct = bm.preimage_of_cylinder(&w(u));
            assert_eq!(direct, set(words), "{u}");
            let (sub, stats) = preimage_partition(&bm, &w(u), DEFAULT_BUDGET).unwrap();
            assert_eq!(sub, direct);
            assert!(stats.nodes > 0);
            total += direct.mass(&mu);
        }
        assert_eq!(total, ratio(1, 1));
        assert_eq!(partition_mass(&mu, &bm.preimage_of_cylinder(&w("a"))), ratio(1, 6));
        assert_eq!(partition_mass(&mu, &set(&["a", "b"])), ratio(1, 2));
        assert_eq!(partition_mass(&mu, &CylinderPartition::empty(r2())), ratio(0, 1));
    }

    #[test]
    fn identity_preimage() {
        let bm = BoundaryMap::new(&Automorphism::identity(r2())).unwrap();
        assert_eq!(preimage_partition(&bm, &w("ab"), 100).unwrap().0, set(&["ab"]));
    }

    #[test]
    fn stable_prefix_examples() {
        let bm = BoundaryMap::new(&nielsen()).unwrap();
        assert_eq!(bm.stable_prefix(&w("b")), w("b"));
        assert_eq!(bm.stable_prefix(&w("aB")), w("B"));
        let id = Automorphism::identity(r2());
        assert_eq!(stable_prefix_coarse(&id, &w("ab")), Word::empty());
        assert!(stable_prefix_coarse(&nielsen(), &w("b")).is_empty());
        // Exact prefixes always extend the coarse ones.
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            for x in reduced_words_up_to(r2(), 4) {
                assert!(stable_prefix_coarse(&phi, &x).is_prefix_of(&bm.stable_prefix(&x)));
            }
        }
    }

    #[test]
    fn coarse_subdivision_agrees_for_small_maps() {
        // Coarse-bound route (no factorization used) against the composed data.
        // The coarse bound is only small for signed permutations.
        for phi in enumerate_signed_permutations(r2()) {
            let exact = BoundaryMap::new(&phi).unwrap();
            let coarse = BoundaryMap::by_subdivision(&phi, DEFAULT_BUDGET).unwrap();
            for x in r2().letters() {
                let u = Word::letter(x);
                assert_eq!(exact.preimage_of_cylinder(&u), coarse.preimage_of_cylinder(&u));
                assert_eq!(exact.image_of_cylinder(&u), coarse.image_of_cylinder(&u));
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let err = BoundaryMap::by_subdivision(&nielsen(), 50).unwrap_err();
        assert_eq!(err, Error::ResourceLimit("subdivision nodes", 50));
    }

    #[test]
    fn depth_one_preimages_partition_the_boundary() {
        let mu = uniform_measure(r2());
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            let parts: Vec<_> = r2().letters().map(|x| bm.preimage_of_cylinder(&Word::letter(x))).collect();
            let total: BigRational = parts.iter().map(|p| p.mass(&mu)).sum();
            assert_eq!(total, ratio(1, 1), "{phi}");
            let mut union = CylinderPartition::empty(r2());
            for p in &parts {
                union = union.union(p);
            }
            assert!(union.is_whole());
        }
    }

    #[test]
    fn refinement_coherence_and_route_agreement() {
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            for u in reduced_words_up_to(r2(), 2) {
                let direct = bm.preimage_of_cylinder(&u);
                let (sub, _) = preimage_partition(&bm, &u, DEFAULT_BUDGET).unwrap();
                assert_eq!(sub, direct, "{phi} {u}");
                let children = u
                    .extensions(r2())
                    .fold(CylinderPartition::empty(r2()), |acc, c| acc.union(&bm.preimage_of_cylinder(&c)));
                assert_eq!(children, direct);
                // Images and preimages are mutually inverse.
                assert_eq!(bm.image_of_set(&direct), CylinderPartition::cylinder(r2(), &u));
            }
        }
    }

    #[test]
    fn preimages_are_sound_on_long_rays() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            for u in reduced_words(r2(), 2) {
                for p in bm.preimage_of_cylinder(&u).words() {
                    for _ in 0..4 {
                        let tail = loop {
                            let t = random_reduced(r2(), 40, &mut rng);
                            if p.extended(t.letters()[0]).is_some() {
                                break t;
                            }
                        };
                        let ray = p.concat(&tail);
                        assert!(u.is_prefix_of(&phi.apply(&ray)), "{phi}: {p}·… ∉ Φ⁻¹Cyl({u})");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_cancellation_bounds_observed_cancellation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            let exact = bm.exact_cancellation();
            assert!(exact <= phi.cancellation_bound());
            for _ in 0..500 {
                let u = random_reduced(r2(), rng.gen_range(1..10), &mut rng);
                let v = random_reduced(r2(), rng.gen_range(1..10), &mut rng);
                if u.extended(v.letters()[0]).is_none() {
                    continue;
                }
                assert!(phi.apply(&u).cancellation_with(&phi.apply(&v)) <= exact + 1);
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let mu = uniform_measure(r2());
        let mut stats = NodeStats::default();
        let id = BoundaryMap::new(&Automorphism::identity(r2())).unwrap();
        assert_eq!(pushforward_current_value(&id, &mu, &w("a"), &mut stats).unwrap(), ratio(1, 4));
        let bm = BoundaryMap::new(&nielsen()).unwrap();
        assert_eq!(pushforward_current_value(&bm, &mu, &w("b"), &mut stats).unwrap(), ratio(1, 4));
        let table = pushforward_table(&bm, &mu, 1).unwrap();
        assert_eq!(table.eval(&Word::empty()), ratio(7, 6));
        assert_eq!(pushforward_table(&id, &mu, 2).unwrap().values, {
            let mut m = BTreeMap::new();
            m.insert(Word::empty(), ratio(1, 1));
            for v in reduced_words_up_to(r2(), 2) {
                let value = mu.eval(&v);
                m.insert(v, value);
            }
            m
        });
    }

    #[test]
    fn uniform_fast_path_matches_generic_sum() {
        let markov = crate::measures::markov_measure(crate::measures::MarkovSpec::uniform(r2())).unwrap();
        let mu = uniform_measure(r2());
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            let mut s = NodeStats::default();
            for u in reduced_words_up_to(r2(), 2) {
                assert_eq!(
                    pushforward_current_value(&bm, &mu, &u, &mut s).unwrap(),
                    pushforward_current_value(&bm, &markov, &u, &mut s).unwrap()
                );
            }
        }
    }

    #[test]
    fn pushforward_tables_are_consistent() {
        let mu = uniform_measure(r2());
        for phi in test_family().into_iter().take(6) {
            let bm = BoundaryMap::new(&phi).unwrap();
            let table = pushforward_table(&bm, &mu, 3).unwrap();
            assert!(consistency_check(&table, 3), "{phi}");
        }
    }

    #[test]
    fn profile_examples() {
        let id = BoundaryMap::new(&Automorphism::identity(r2())).unwrap();
        assert!(depth1_profile(&id).iter().all(|(_, m)| *m == ratio(1, 4)));
        let bm = BoundaryMap::new(&nielsen()).unwrap();
        let profile: Vec<_> = depth1_profile(&bm).into_iter().map(|(_, m)| m).collect();
        // letter order a, b, A, B
        assert_eq!(profile, vec![ratio(1, 6), ratio(1, 4), ratio(1, 2), ratio(1, 12)]);
        let inner = BoundaryMap::new(&Automorphism::inner(r2(), &w("a")).unwrap()).unwrap();
        assert_eq!(depth1_profile(&inner)[0].1, ratio(3, 4));
    }

    #[test]
    fn recenter_examples() {
        let k = r2();
        let (v, psi) = recenter(&BoundaryMap::new(&Automorphism::identity(k)).unwrap(), 1000).unwrap();
        assert_eq!(v, Word::empty());
        assert!(psi.is_identity());
        for s in ["a", "ab"] {
            let phi = Automorphism::inner(k, &w(s)).unwrap();
            let (v, psi) = recenter(&BoundaryMap::new(&phi).unwrap(), 1000).unwrap();
            assert_eq!(v, w(s));
            assert!(psi.is_identity());
        }
    }

    #[test]
    fn recentering_ignores_prior_conjugation() {
        for phi in test_family() {
            let bm = BoundaryMap::new(&phi).unwrap();
            let (_, psi) = recenter(&bm, 1000).unwrap();
            for v in ["a", "bA"] {
                let shifted = BoundaryMap::new(&phi.conj(&w(v))).unwrap();
                let (_, psi2) = recenter(&shifted, 1000).unwrap();
                // Tie-free greedy paths give the same normal form.
                if psi2 != psi {
                    let profile = depth1_profile(&BoundaryMap::new(&psi).unwrap());
                    assert!(profile.iter().any(|(_, m)| *m == ratio(1, 2)), "{phi} vs conj by {v}");
                }
            }
        }
    }

    #[test]
    fn cache_hits_equal_recomputation() {
        let bm = BoundaryMap::new(&nielsen()).unwrap();
        let mut cache = PartitionCache::new();
        let first = cache.preimage(&bm, &w("ab"));
        assert_eq!(cache.len(), 1);
        let second = cache.preimage(&bm, &w("ab"));
        assert_eq!(first, second);
        assert_eq!(first, bm.preimage_of_cylinder(&w("ab")));
    }
}
