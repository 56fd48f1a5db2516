//! Exact lengths `L(Φ)` and `L_η(Φ)`, and Monte Carlo estimates of the
//! stretching factor.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automorphisms::Automorphism;
use crate::boundary::{pushforward_current_value, BoundaryMap, NodeStats};
use crate::measures::{uniform_measure, CylinderMeasure, FrequencyMeasure};
use crate::words::{random_reduced, Letter, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthReport {
    pub value: BigRational,
    /// `x ↦ Φη(Cyl[1,x])`, in letter order.
    pub breakdown: Vec<(Letter, BigRational)>,
    pub stats: NodeStats,
    pub measure: String,
}

/// `L(Φ)` for the uniform measure.
pub fn length_exact(aut: &Automorphism) -> Result<LengthReport> {
    eta_length(aut, &uniform_measure(aut.rank()))
}

/// `L_η(Φ) = L(Φη)` for the current `η` of a frequency measure.
pub fn eta_length(aut: &Automorphism, mu: &FrequencyMeasure) -> Result<LengthReport> {
    let bm = BoundaryMap::new(aut)?;
    length_with(&bm, mu, mu.id())
}

/// Length from precomputed boundary data, for any cylinder measure.
pub fn length_with<M: CylinderMeasure + ?Sized>(bm: &BoundaryMap, mu: &M, measure: String) -> Result<LengthReport> {
    if mu.rank() != bm.rank() {
        return Err(Error::RankMismatch(bm.rank().get(), mu.rank().get()));
    }
    let mut stats = NodeStats::default();
    let mut breakdown = Vec::with_capacity(bm.rank().alphabet_size());
    for x in bm.rank().letters() {
        breakdown.push((x, pushforward_current_value(bm, mu, &Word::letter(x), &mut stats)?));
    }
    let value = breakdown.iter().map(|(_, v)| v).sum();
    Ok(LengthReport { value, breakdown, stats, measure })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

/// One Monte Carlo sample `||Φ(w)|| / n`. Trial `i` draws from stream `i`
/// of the generator seeded with `seed`, so samples do not depend on the
/// order in which trials run.
pub fn mc_sample(aut: &Automorphism, n: usize, seed: u64, trial: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let w = random_reduced(aut.rank(), n, &mut rng);
    aut.apply(&w).cyclic_len() as f64 / n as f64
}

/// Mean and standard error of samples taken in trial order.
pub fn mc_summarize(samples: &[f64], n: usize, seed: u64) -> McEstimate {
    let trials = samples.len();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (trials as f64 - 1.0);
    McEstimate { mean, stderr: libm::sqrt(var / trials as f64), n, trials, seed }
}

pub fn check_mc_args(n: usize, trials: usize) -> Result<()> {
    if n < 10 {
        return Err(Error::Precondition("word length n must be at least 10"));
    }
    if trials < 2 {
        return Err(Error::Precondition("at least 2 trials are needed"));
    }
    Ok(())
}

/// Mean of `||Φ(w)|| / n` over `trials` uniform reduced words of length `n`.
pub fn length_mc(aut: &Automorphism, n: usize, trials: usize, seed: u64) -> Result<McEstimate> {
    check_mc_args(n, trials)?;
    let samples: Vec<f64> = (0..trials).map(|i| mc_sample(aut, n, seed, i)).collect();
    Ok(mc_summarize(&samples, n, seed))
}

impl McEstimate {
    /// `|mean − exact| ≤ 3·stderr + 4/n`.
    pub fn agrees_with(&self, exact: &BigRational) -> bool {
        let exact = crate::rational::to_f64(exact);
        (self.mean - exact).abs() <= 3.0 * self.stderr + 4.0 / self.n as f64
    }
}
