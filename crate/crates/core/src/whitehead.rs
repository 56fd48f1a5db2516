//! Whitehead descent, factorization into second-kind maps over a simple
//! automorphism, and the length spectrum of short compositions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::automorphisms::{enumerate_second_kind, enumerate_signed_permutations, Automorphism, WhiteheadSecondKind};
use crate::boundary::BoundaryMap;
use crate::length::length_with;
use crate::measures::{uniform_measure, FrequencyMeasure};
use crate::rational;
use crate::words::{reduced_words_up_to, Rank, Word};
use crate::{Error, Result};

/// Longest descent the factorization loop will attempt.
pub const MAX_DESCENT_STEPS: usize = 10_000;

fn uniform_length(bm: &BoundaryMap, mu: &FrequencyMeasure) -> Result<BigRational> {
    Ok(length_with(bm, mu, String::new())?.value)
}

/// The nontrivial second-kind maps of a rank with their boundary data, in
/// canonical order.
#[derive(Debug, Clone)]
pub struct SecondKindTable {
    entries: Vec<(WhiteheadSecondKind, BoundaryMap)>,
}

impl SecondKindTable {
    pub fn new(rank: Rank) -> Result<Self> {
        let mut entries = Vec::new();
        for tau in enumerate_second_kind(rank).into_iter().filter(|t| !t.is_trivial()) {
            let bm = BoundaryMap::new(&tau.automorphism())?;
            entries.push((tau, bm));
        }
        Ok(SecondKindTable { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Steepest strict descent from the map with data `bm` and length
    /// `current`: the `τ` minimizing `L(τ∘Φ)` below `current`, first in
    /// canonical order on ties, with its composed data and length.
    pub fn best_step(
        &self,
        bm: &BoundaryMap,
        current: &BigRational,
    ) -> Result<Option<(WhiteheadSecondKind, BoundaryMap, BigRational)>> {
        let mu = uniform_measure(bm.rank());
        let mut best: Option<(usize, BoundaryMap, BigRational)> = None;
        for (i, (_, tau_bm)) in self.entries.iter().enumerate() {
            let next = BoundaryMap::compose(tau_bm, bm);
            let l = uniform_length(&next, &mu)?;
            if l < *current && best.as_ref().is_none_or(|(_, _, bl)| l < *bl) {
                best = Some((i, next, l));
            }
        }
        Ok(best.map(|(i, next, l)| (self.entries[i].0.clone(), next, l)))
    }
}

/// One steepest-descent step. `Ok(None)` when `Φ` is already simple;
/// [`Error::DescentStuck`] when no second-kind map lowers its length.
pub fn descent_step(aut: &Automorphism) -> Result<Option<WhiteheadSecondKind>> {
    if aut.is_simple().is_some() {
        return Ok(None);
    }
    let table = SecondKindTable::new(aut.rank())?;
    let bm = BoundaryMap::new(aut)?;
    let l = uniform_length(&bm, &uniform_measure(aut.rank()))?;
    match table.best_step(&bm, &l)? {
        Some((tau, _, _)) => Ok(Some(tau)),
        None => Err(stuck(aut, &l)),
    }
}

fn stuck(aut: &Automorphism, l: &BigRational) -> Error {
    Error::DescentStuck { map: format!("{aut}"), length: rational::format(l) }
}

/// `Φ = τ_n ∘ … ∘ τ_1 ∘ σ` with `σ` simple and lengths increasing strictly
/// along the partial products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationReport {
    pub sigma: Automorphism,
    /// `τ_n, …, τ_1`, outermost first.
    pub taus: Vec<WhiteheadSecondKind>,
    /// `L(σ), L(τ_1σ), …, L(τ_n⋯τ_1σ)`.
    pub lengths: Vec<BigRational>,
}

impl FactorizationReport {
    /// `τ_n ∘ … ∘ τ_1 ∘ σ`.
    pub fn recompose(&self) -> Automorphism {
        let mut acc = self.sigma.clone();
        for tau in self.taus.iter().rev() {
            acc = tau.automorphism().compose(&acc);
        }
        acc
    }

    pub fn lengths_increase(&self) -> bool {
        self.lengths.windows(2).all(|w| w[0] < w[1])
    }

    /// All structural guarantees of the report against the input map.
    pub fn verify(&self, aut: &Automorphism) -> bool {
        self.recompose() == *aut
            && self.lengths_increase()
            && self.sigma.is_simple().is_some()
            && self.lengths.len() == self.taus.len() + 1
            && self.lengths.iter().all(|l| *l >= BigRational::one())
    }
}

/// Greedy descent `Φ_{j+1} = w_{j+1} ∘ Φ_j` until `Φ_m` is simple; then
/// `σ = Φ_m` and `τ_i` are the inverses of the `w_j` in reverse.
pub fn factorize(aut: &Automorphism) -> Result<FactorizationReport> {
    let rank = aut.rank();
    let mu = uniform_measure(rank);
    let table = SecondKindTable::new(rank)?;
    let mut cur = aut.clone();
    let mut bm = BoundaryMap::new(aut)?;
    let mut l = uniform_length(&bm, &mu)?;
    let mut steps: Vec<WhiteheadSecondKind> = Vec::new();
    let mut lengths = alloc::vec![l.clone()];
    while cur.is_simple().is_none() {
        if steps.len() >= MAX_DESCENT_STEPS {
            return Err(Error::ResourceLimit("descent steps", MAX_DESCENT_STEPS as u64));
        }
        let Some((w, next, next_l)) = table.best_step(&bm, &l)? else {
            return Err(stuck(&cur, &l));
        };
        cur = w.automorphism().compose(&cur);
        bm = next;
        l = next_l;
        lengths.push(l.clone());
        steps.push(w);
    }
    lengths.reverse();
    let report =
        FactorizationReport { sigma: cur, taus: steps.iter().map(WhiteheadSecondKind::inverse).collect(), lengths };
    if !report.verify(aut) {
        return Err(Error::Precondition("factorization failed its own verification"));
    }
    Ok(report)
}

/// Conjugacy normal form used to deduplicate outer classes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutKey(pub Vec<Word>);

impl OutKey {
    pub fn weight(&self) -> usize {
        self.0.iter().map(Word::len).sum()
    }
}

impl core::fmt::Display for OutKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (g, w) in self.0.iter().enumerate() {
            if g > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}->{}", crate::words::Letter::basis(g as u8), w)?;
        }
        Ok(())
    }
}

fn key_of(aut: &Automorphism) -> OutKey {
    OutKey(aut.basis_images())
}

fn rank_key(key: &OutKey) -> (usize, &OutKey) {
    (key.weight(), key)
}

/// Conjugation normal form: greedy single-letter conjugation
/// `x ↦ vΦ(x)v⁻¹` while the total image length drops, then the least key on
/// the plateau of conjugates with that same minimal length. The total length
/// is a convex function of the conjugator on the Cayley tree, so the greedy
/// stop is a global minimum and the plateau is a finite connected set;
/// equal keys therefore mean equal outer classes.
pub fn canonical_out_key(aut: &Automorphism) -> (OutKey, Automorphism) {
    let mut cur = aut.clone();
    let mut key = key_of(&cur);
    loop {
        let mut best: Option<(OutKey, Automorphism)> = None;
        for y in cur.rank().letters() {
            let cand = cur.conj(&Word::letter(y));
            let k = key_of(&cand);
            if k.weight() < key.weight() && best.as_ref().is_none_or(|(bk, _)| rank_key(&k) < rank_key(bk)) {
                best = Some((k, cand));
            }
        }
        match best {
            Some((k, c)) => {
                key = k;
                cur = c;
            }
            None => break,
        }
    }
    let weight = key.weight();
    let mut plateau: BTreeMap<OutKey, Automorphism> = BTreeMap::new();
    let mut frontier = alloc::vec![cur];
    plateau.insert(key, frontier[0].clone());
    while let Some(phi) = frontier.pop() {
        for y in phi.rank().letters() {
            let cand = phi.conj(&Word::letter(y));
            let k = key_of(&cand);
            if k.weight() == weight && !plateau.contains_key(&k) {
                plateau.insert(k, cand.clone());
                frontier.push(cand);
            }
        }
    }
    plateau.into_iter().next().expect("plateau contains the start")
}

/// Like [`canonical_out_key`] but also starting the greedy search from every
/// conjugate by a word of length at most `depth`, keeping the least key.
pub fn canonical_out_key_extended(aut: &Automorphism, depth: usize) -> (OutKey, Automorphism) {
    let mut best = canonical_out_key(aut);
    for v in reduced_words_up_to(aut.rank(), depth) {
        let cand = canonical_out_key(&aut.conj(&v));
        if rank_key(&cand.0) < rank_key(&best.0) {
            best = cand;
        }
    }
    best
}

/// One spectrum entry: an exact length and how many distinct keys carry it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub length: BigRational,
    pub multiplicity: usize,
    /// Least key, in its text form, among those with this length.
    pub representative: String,
}

/// A representative of one deduplicated class with its exact length.
#[derive(Debug, Clone)]
pub struct KeyedLength {
    pub key: OutKey,
    pub representative: Automorphism,
    pub length: BigRational,
    pub simple: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub rank: Rank,
    pub max_factors: usize,
    pub entries: Vec<SpectrumEntry>,
    /// Least difference of consecutive lengths; `None` with a single value.
    pub min_gap: Option<BigRational>,
    pub classes: Vec<KeyedLength>,
}

impl SpectrumReport {
    /// Keys whose length is 1 but which are not simple, or the reverse.
    pub fn simplicity_mismatches(&self) -> Vec<&KeyedLength> {
        self.classes.iter().filter(|c| (c.length == BigRational::one()) != c.simple).collect()
    }

    pub fn values(&self) -> Vec<BigRational> {
        self.entries.iter().map(|e| e.length.clone()).collect()
    }

    pub fn note(&self) -> &'static str {
        "multiplicities count outer classes, identified by their conjugation normal form"
    }
}

/// The generating set: signed permutations and nontrivial second-kind maps.
pub fn spectrum_generators(rank: Rank) -> Vec<Automorphism> {
    let mut gens = enumerate_signed_permutations(rank);
    gens.extend(enumerate_second_kind(rank).into_iter().filter(|t| !t.is_trivial()).map(|t| t.automorphism()));
    gens
}

/// Distinct classes reached by compositions of at most `max_factors`
/// generators, one representative per key, sorted by key. `conj_depth`
/// widens the key search as in [`canonical_out_key_extended`].
pub fn spectrum_candidates(rank: Rank, max_factors: usize, conj_depth: usize) -> Result<Vec<(OutKey, Automorphism)>> {
    if max_factors == 0 {
        return Err(Error::Precondition("max_factors must be at least 1"));
    }
    let gens = spectrum_generators(rank);
    let mut seen: BTreeMap<OutKey, Automorphism> = BTreeMap::new();
    let mut level: BTreeMap<OutKey, Automorphism> = BTreeMap::new();
    level.insert(key_of(&Automorphism::identity(rank)), Automorphism::identity(rank));
    let mut classes: BTreeMap<OutKey, Automorphism> = BTreeMap::new();
    for _ in 0..max_factors {
        let mut next: BTreeMap<OutKey, Automorphism> = BTreeMap::new();
        for phi in level.values() {
            for g in &gens {
                let psi = g.compose(phi);
                let k = key_of(&psi);
                if !seen.contains_key(&k) && !next.contains_key(&k) {
                    next.insert(k, psi);
                }
            }
        }
        for (k, psi) in &next {
            seen.insert(k.clone(), psi.clone());
            let (ck, rep) =
                if conj_depth == 0 { canonical_out_key(psi) } else { canonical_out_key_extended(psi, conj_depth) };
            classes.entry(ck).or_insert(rep);
        }
        level = next;
    }
    Ok(classes.into_iter().collect())
}

pub fn class_length(key: OutKey, rep: Automorphism) -> Result<KeyedLength> {
    let bm = BoundaryMap::new(&rep)?;
    let length = uniform_length(&bm, &uniform_measure(rep.rank()))?;
    let simple = rep.is_simple().is_some();
    Ok(KeyedLength { key, representative: rep, length, simple })
}

/// Sorted distinct lengths with multiplicities and the least gap.
pub fn aggregate(rank: Rank, max_factors: usize, mut classes: Vec<KeyedLength>) -> SpectrumReport {
    classes.sort_by(|a, b| a.key.cmp(&b.key));
    let mut by_length: BTreeMap<BigRational, (usize, String)> = BTreeMap::new();
    for c in &classes {
        let text = format!("{}", c.key);
        by_length
            .entry(c.length.clone())
            .and_modify(|(m, rep)| {
                *m += 1;
                if text < *rep {
                    *rep = text.clone();
                }
            })
            .or_insert((1, text));
    }
    let entries: Vec<SpectrumEntry> = by_length
        .into_iter()
        .map(|(length, (multiplicity, representative))| SpectrumEntry { length, multiplicity, representative })
        .collect();
    let min_gap = entries.windows(2).map(|w| &w[1].length - &w[0].length).fold(None, |acc: Option<BigRational>, g| {
        Some(match acc {
            Some(a) if a <= g => a,
            _ => g,
        })
    });
    SpectrumReport { rank, max_factors, entries, min_gap, classes }
}

/// Length spectrum of compositions of at most `max_factors` generators.
pub fn spectrum(rank: Rank, max_factors: usize) -> Result<SpectrumReport> {
    let classes = spectrum_candidates(rank, max_factors, 0)?
        .into_iter()
        .map(|(k, rep)| class_length(k, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(rank, max_factors, classes))
}

/// Distinct values only, for comparing normalizations.
pub fn value_set(report: &SpectrumReport) -> BTreeSet<BigRational> {
    report.entries.iter().map(|e| e.length.clone()).collect()
}

pub fn gap_is_positive(report: &SpectrumReport) -> bool {
    report.min_gap.as_ref().is_none_or(|g| *g > BigRational::zero())
}
