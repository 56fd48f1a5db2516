//! Exact checks of the measure identities the engine relies on.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{pair_sum, CylinderPartition, NodeStats};
use crate::measures::{consistency_check, current_pair_value, uniform_measure, CylinderMeasure};
use crate::rational::{self, int, pow};
use crate::words::{random_reduced, reduced_words_up_to, Letter, Rank, Word};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestConfig {
    pub rank: Rank,
    /// Longest cylinder label used.
    pub depth: usize,
    /// Number of random cylinder unions for the translation bound.
    pub unions: usize,
    /// Longest translating word.
    pub max_translation: usize,
    pub seed: u64,
}

impl SelftestConfig {
    pub fn new(rank: Rank, depth: usize) -> Self {
        SelftestConfig { rank, depth, unions: 100, max_translation: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Instances examined.
    pub cases: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `μ_A` value of the pair `(v, w)` from the closed form
/// `2k(2k−1)^(2|lcp|−1) μ_A(v) μ_A(w)`.
fn disintegration_rhs(rank: Rank, v: &Word, w: &Word) -> BigRational {
    let mu = uniform_measure(rank);
    let k2 = 2 * rank.get() as u64;
    let l0 = v.lcp_len(w);
    let factor = if l0 == 0 {
        rational::ratio(k2 as i64, k2 as i64 - 1)
    } else {
        BigRational::from_integer(pow(k2 - 1, 2 * l0 - 1) * k2)
    };
    factor * mu.eval(v) * mu.eval(w)
}

pub fn check_disintegration(rank: Rank, depth: usize) -> Result<CheckResult> {
    let mu = uniform_measure(rank);
    let words = reduced_words_up_to(rank, depth);
    let mut cases = 0;
    let mut lower_bound_ok = true;
    for v in &words {
        for w in &words {
            if v.comparable(w) {
                continue;
            }
            cases += 1;
            let value = current_pair_value(&mu, v, w)?;
            if value != disintegration_rhs(rank, v, w) {
                return Ok(failed("disintegration identity", cases, format!("pair ({v}, {w})")));
            }
            lower_bound_ok &= value >= mu.eval(v) * mu.eval(w);
        }
    }
    let detail = if lower_bound_ok { String::new() } else { String::from("product bound failed") };
    Ok(CheckResult { name: "disintegration identity", passed: lower_bound_ok, cases, detail })
}

fn failed(name: &'static str, cases: u64, detail: String) -> CheckResult {
    CheckResult { name, passed: false, cases, detail }
}

pub fn check_consistency(rank: Rank, depth: usize) -> CheckResult {
    let passed = consistency_check(&uniform_measure(rank), depth);
    CheckResult {
        name: "Kolmogorov and shift invariance",
        passed,
        cases: reduced_words_up_to(rank, depth).len() as u64,
        detail: String::new(),
    }
}

fn random_union(rank: Rank, depth: usize, rng: &mut ChaCha8Rng) -> CylinderPartition {
    let count = rng.gen_range(1..=6);
    CylinderPartition::from_words(rank, (0..count).map(|_| random_reduced(rank, rng.gen_range(1..=depth), rng)))
}

/// Random pairs of disjoint unions satisfy `η_A(E×D) ≥ μ_A(E) μ_A(D)`.
pub fn check_product_bound(cfg: &SelftestConfig) -> CheckResult {
    let mu = uniform_measure(cfg.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = 0;
    let mut stats = NodeStats::default();
    while cases < cfg.unions as u64 {
        let e = random_union(cfg.rank, cfg.depth, &mut rng);
        let d = random_union(cfg.rank, cfg.depth, &mut rng);
        if e.words().iter().any(|v| d.words().iter().any(|w| v.comparable(w))) {
            continue;
        }
        cases += 1;
        if pair_sum(&mu, &e, &d, &mut stats) < e.mass(&mu) * d.mass(&mu) {
            return failed("product lower bound", cases, format!("E = {e}, D = {d}"));
        }
    }
    CheckResult { name: "product lower bound", passed: true, cases, detail: String::new() }
}

/// `μ_A(f·E) ≥ μ_A(E) / (2k−1)^|f|` for random unions `E` and every `f`
/// up to the configured length.
pub fn check_translation_bound(cfg: &SelftestConfig) -> CheckResult {
    let mu = uniform_measure(cfg.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let translations = reduced_words_up_to(cfg.rank, cfg.max_translation);
    let base = cfg.rank.alphabet_size() as u64 - 1;
    let mut cases = 0;
    for _ in 0..cfg.unions {
        let e = random_union(cfg.rank, cfg.depth, &mut rng);
        let m = e.mass(&mu);
        for f in &translations {
            cases += 1;
            let bound = &m / BigRational::from_integer(pow(base, f.len()));
            if e.translate(f).mass(&mu) < bound {
                return failed("translation bound", cases, format!("f = {f}, E = {e}"));
            }
        }
    }
    CheckResult { name: "translation bound", passed: true, cases, detail: String::new() }
}

/// `f = a`, `E = Cyl(a⁻¹)`, `S = Cyl(a)`: the ping-pong hypotheses hold and
/// `η_A(E×S) = 1/12 ≥ (1 − 1/4)²/(2k−1)² = 1/16` in rank 2.
pub fn check_witness(rank: Rank) -> CheckResult {
    let mu = uniform_measure(rank);
    let a = Letter::basis(0);
    let f = Word::letter(a);
    let e = CylinderPartition::cylinder(rank, &Word::letter(a.inverse()));
    let s = CylinderPartition::cylinder(rank, &f);
    let hyp1 = e.complement().translate(&f).union(&s) == s;
    let hyp2 = s.complement().translate(&f.inverse()).union(&e) == e;
    let mut stats = NodeStats::default();
    let lhs = pair_sum(&mu, &e, &s, &mut stats);
    let base = rank.alphabet_size() as u64 - 1;
    let rhs = (int(1) - e.mass(&mu)) * (int(1) - s.mass(&mu)) / BigRational::from_integer(pow(base, 2 * f.len()));
    let passed = hyp1 && hyp2 && lhs >= rhs;
    CheckResult {
        name: "witness inequality",
        passed,
        cases: 1,
        detail: format!("{} >= {}", rational::format(&lhs), rational::format(&rhs)),
    }
}

pub fn run(cfg: &SelftestConfig) -> Result<SelftestReport> {
    let checks = vec![
        check_disintegration(cfg.rank, cfg.depth)?,
        check_consistency(cfg.rank, cfg.depth),
        check_product_bound(cfg),
        check_translation_bound(cfg),
        check_witness(cfg.rank),
    ];
    Ok(SelftestReport { checks })
}
