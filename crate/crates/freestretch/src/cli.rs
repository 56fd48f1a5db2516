use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use freestretch_core::boundary::{
    depth1_profile, partition_mass, preimage_partition, pushforward_current_value, recenter, BoundaryMap, NodeStats,
    DEFAULT_BUDGET,
};
use freestretch_core::length::{check_mc_args, length_with, mc_sample, mc_summarize};
use freestretch_core::measures::{
    consistency_check, criterion_check, current_length, uniform_measure, FrequencyMeasure, TableMeasure,
};
use freestretch_core::rational;
use freestretch_core::selftest::{self, SelftestConfig};
use freestretch_core::whitehead::{aggregate, class_length, factorize, spectrum_candidates, SpectrumReport};
use freestretch_core::words::reduced_words_up_to;
use freestretch_core::{Automorphism, BigRational, CylinderMeasure, Rank, Word};

use crate::cache::DiskCache;
use crate::error::CliError;
use crate::parse::{parse_automorphism, parse_measure, parse_word, word_text};

#[derive(Debug, Parser)]
#[command(name = "freestretch", version, about = "Exact generic stretching factors of free group automorphisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Node budget for subdivision searches.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Do not read or write the partition cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Directory of the partition cache (default: system temp dir).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Breadth-first subdivision driven by exact stable prefixes.
    Subdivision,
    /// Translate the stored per-letter preimages.
    Direct,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// `a->w1,b->w2,…` or a generator expression such as `W2[a; b:RIGHT] * perm[a->b,b->a]`.
    #[arg(long)]
    pub map: String,
    /// Inverse of a free-form map, in the same `a->…` form.
    #[arg(long)]
    pub inverse: Option<String>,
}

impl MapArgs {
    fn rank(&self) -> Result<Rank, CliError> {
        Ok(Rank::new(self.rank)?)
    }

    fn automorphism(&self) -> Result<Automorphism, CliError> {
        parse_automorphism(self.rank()?, &self.map, self.inverse.as_deref())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact L(Φ), or L_η(Φ) for another measure.
    Length {
        #[command(flatten)]
        map: MapArgs,
        /// `uniform`, `markov:<file>` or `rational:<word>`.
        #[arg(long, default_value = "uniform")]
        measure: String,
    },
    /// Monte Carlo estimate of ||Φ(w)||/|w| over random reduced words.
    Estimate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the exact length and test agreement.
        #[arg(long)]
        compare: bool,
    },
    /// Image frequency measure on all cylinders up to a depth.
    Pushforward {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value = "uniform")]
        measure: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Canonical partition of Φ⁻¹(Cyl u).
    Preimage {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value_t = Strategy::Subdivision)]
        strategy: Strategy,
        #[arg(long, default_value = "uniform")]
        measure: String,
    },
    /// Greedy recentering v and Ψ = x ↦ v⁻¹Φ(x)v.
    Recenter {
        #[command(flatten)]
        map: MapArgs,
    },
    /// Φ = τ_n ∘ … ∘ τ_1 ∘ σ by steepest Whitehead descent.
    Factorize {
        #[command(flatten)]
        map: MapArgs,
    },
    /// Length spectrum of compositions of signed permutations and second-kind maps.
    Spectrum {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 2)]
        max_factors: usize,
        /// Write the spectrum as CSV to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Also start the conjugation normal form from conjugators up to this length.
        #[arg(long, default_value_t = 0)]
        conj_depth: usize,
    },
    /// Consistency of a frequency measure, and the compactness criterion for Markov measures.
    CheckCurrent {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Exact checks of the uniform measure identities.
    Selftest {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        unions: usize,
        #[arg(long, default_value_t = 2)]
        max_translation: usize,
    },
}

/// A report in all three renderings.
struct Output {
    text: String,
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Output {
    fn new(json: Value, header: Vec<&'static str>) -> Self {
        Output { text: String::new(), json, header, rows: Vec::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable report");
                s.push('\n');
                s
            }
            Format::Csv => csv_text(&self.header, &self.rows),
        }
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn q(x: &BigRational) -> String {
    rational::format(x)
}

fn approx(x: &BigRational) -> String {
    rational::decimal(x, 12)
}

/// Runs a parsed invocation, returning standard output and the exit code.
pub fn run(cli: &Cli) -> Result<(String, u8), CliError> {
    match cli.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<(String, u8), CliError> {
    let mut code = 0;
    let out = match &cli.command {
        Command::Length { map, measure } => length(cli, map, measure)?,
        Command::Estimate { map, n, trials, seed, compare } => estimate(cli, map, *n, *trials, *seed, *compare)?,
        Command::Pushforward { map, measure, depth } => pushforward(cli, map, measure, *depth)?,
        Command::Preimage { map, word, strategy, measure } => preimage(cli, map, word, *strategy, measure)?,
        Command::Recenter { map } => recenter_cmd(cli, map)?,
        Command::Factorize { map } => factorize_cmd(map)?,
        Command::Spectrum { rank, max_factors, emit, conj_depth } => {
            spectrum_cmd(*rank, *max_factors, emit.as_ref(), *conj_depth)?
        }
        Command::CheckCurrent { rank, measure, depth } => check_current(*rank, measure, *depth)?,
        Command::Selftest { rank, depth, seed, unions, max_translation } => {
            let cfg = SelftestConfig {
                rank: Rank::new(*rank)?,
                depth: *depth,
                unions: *unions,
                max_translation: *max_translation,
                seed: *seed,
            };
            let (out, passed) = selftest_cmd(&cfg)?;
            if !passed {
                code = 1;
            }
            out
        }
    };
    Ok((out.render(cli.format), code))
}

fn boundary(cli: &Cli, aut: &Automorphism) -> Result<BoundaryMap, CliError> {
    Ok(BoundaryMap::with_budget(aut, cli.budget)?)
}

fn check_rank(mu: &FrequencyMeasure, rank: Rank) -> Result<(), CliError> {
    if mu.rank() != rank {
        return Err(freestretch_core::Error::RankMismatch(rank.get(), mu.rank().get()).into());
    }
    Ok(())
}

fn length(cli: &Cli, args: &MapArgs, measure: &str) -> Result<Output, CliError> {
    let aut = args.automorphism()?;
    let mu = parse_measure(measure, aut.rank())?;
    let bm = boundary(cli, &aut)?;
    let letters: Vec<_> = aut.rank().letters().collect();
    let values = letters
        .par_iter()
        .map(|x| {
            let mut stats = NodeStats::default();
            let v = pushforward_current_value(&bm, &mu, &Word::letter(*x), &mut stats)?;
            Ok((v, stats))
        })
        .collect::<Result<Vec<_>, freestretch_core::Error>>()?;
    let mut stats = NodeStats::default();
    for (_, s) in &values {
        stats.absorb(*s);
    }
    let total: BigRational = values.iter().map(|(v, _)| v).sum();
    debug_assert_eq!(total, length_with(&bm, &mu, mu.id())?.value);
    let breakdown: Vec<Value> =
        letters.iter().zip(&values).map(|(x, (v, _))| json!({ "letter": x.to_string(), "value": q(v) })).collect();
    let mut out = Output::new(
        json!({
            "command": "length",
            "map": aut.to_string(),
            "measure": mu.id(),
            "value": q(&total),
            "approx": approx(&total),
            "breakdown": breakdown,
            "cylinders": stats.cylinders,
            "pairs": stats.pairs,
        }),
        vec!["letter", "value"],
    );
    out.line(format!("map: {aut}"));
    out.line(format!("measure: {}", mu.id()));
    out.line(format!("value: {}", q(&total)));
    out.line(format!("approx: {} (decimal, not exact)", approx(&total)));
    out.line("breakdown:");
    for (x, (v, _)) in letters.iter().zip(&values) {
        out.line(format!("  {x}: {}", q(v)));
        out.rows.push(vec![x.to_string(), q(v)]);
    }
    out.rows.push(vec![String::from("total"), q(&total)]);
    out.line(format!("cylinders: {}, pairs: {}", stats.cylinders, stats.pairs));
    Ok(out)
}

fn estimate(cli: &Cli, args: &MapArgs, n: usize, trials: usize, seed: u64, compare: bool) -> Result<Output, CliError> {
    let aut = args.automorphism()?;
    check_mc_args(n, trials)?;
    let samples: Vec<f64> = (0..trials).into_par_iter().map(|i| mc_sample(&aut, n, seed, i)).collect();
    let est = mc_summarize(&samples, n, seed);
    let mut json = json!({
        "command": "estimate",
        "map": aut.to_string(),
        "mean": format!("{:.12}", est.mean),
        "stderr": format!("{:.12}", est.stderr),
        "n": n,
        "trials": trials,
        "seed": seed,
    });
    let mut out_json_extra = None;
    if compare {
        let exact = length_with(&boundary(cli, &aut)?, &uniform_measure(aut.rank()), String::from("uniform"))?.value;
        let agrees = est.agrees_with(&exact);
        json["exact"] = json!(q(&exact));
        json["agrees"] = json!(agrees);
        out_json_extra = Some((exact, agrees));
    }
    let mut out = Output::new(json, vec!["mean", "stderr", "n", "trials", "seed"]);
    out.line(format!("map: {aut}"));
    out.line(format!("mean: {:.12}", est.mean));
    out.line(format!("stderr: {:.12}", est.stderr));
    out.line(format!("n: {n}, trials: {trials}, seed: {seed}"));
    if let Some((exact, agrees)) = out_json_extra {
        out.line(format!("exact: {}", q(&exact)));
        out.line(format!("agrees within 3*stderr + 4/n: {agrees}"));
    }
    out.rows.push(vec![
        format!("{:.12}", est.mean),
        format!("{:.12}", est.stderr),
        n.to_string(),
        trials.to_string(),
        seed.to_string(),
    ]);
    Ok(out)
}

fn pushforward(cli: &Cli, args: &MapArgs, measure: &str, depth: usize) -> Result<Output, CliError> {
    if depth == 0 {
        return Err(CliError::Usage(String::from("--depth must be at least 1")));
    }
    let aut = args.automorphism()?;
    let rank = aut.rank();
    let mu = parse_measure(measure, rank)?;
    check_rank(&mu, rank)?;
    let bm = boundary(cli, &aut)?;
    let words = reduced_words_up_to(rank, depth);
    let values = words
        .par_iter()
        .map(|v| pushforward_current_value(&bm, &mu, v, &mut NodeStats::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let total: BigRational = words.iter().zip(&values).filter(|(v, _)| v.len() == 1).map(|(_, x)| x).sum();
    let mut table = TableMeasure { rank, depth, values: Default::default() };
    table.values.insert(Word::empty(), total.clone());
    for (v, x) in words.iter().zip(&values) {
        table.values.insert(v.clone(), x.clone());
    }
    let consistent = consistency_check(&table, depth);
    let rows: Vec<Value> =
        words.iter().zip(&values).map(|(v, x)| json!({ "word": v.to_string(), "value": q(x) })).collect();
    let mut out = Output::new(
        json!({
            "command": "pushforward",
            "map": aut.to_string(),
            "measure": mu.id(),
            "depth": depth,
            "total": q(&total),
            "consistent": consistent,
            "table": rows,
        }),
        vec!["word", "value"],
    );
    out.line(format!("map: {aut}"));
    out.line(format!("measure: {}", mu.id()));
    out.line(format!("total mass: {}", q(&total)));
    out.line(format!("consistent: {consistent}"));
    for (v, x) in words.iter().zip(&values) {
        out.line(format!("  {v}: {}", q(x)));
        out.rows.push(vec![v.to_string(), q(x)]);
    }
    Ok(out)
}

fn preimage(cli: &Cli, args: &MapArgs, word: &str, strategy: Strategy, measure: &str) -> Result<Output, CliError> {
    let aut = args.automorphism()?;
    let rank = aut.rank();
    let u = parse_word(word, rank)?;
    if u.is_empty() {
        return Err(freestretch_core::Error::EmptyWord.into());
    }
    let mu = parse_measure(measure, rank)?;
    let bm = boundary(cli, &aut)?;
    let mut cache = if cli.no_cache {
        DiskCache::disabled()
    } else {
        DiskCache::open(&cli.cache_dir.clone().unwrap_or_else(|| std::env::temp_dir().join("freestretch-cache")))
    };
    let partition = match cache.get(&bm, &u) {
        Some(p) => p,
        None => {
            let p = match strategy {
                Strategy::Direct => bm.preimage_of_cylinder(&u),
                Strategy::Subdivision => preimage_partition(&bm, &u, cli.budget)?.0,
            };
            cache.insert(&bm, &u, &p);
            cache.save()?;
            p
        }
    };
    let uniform = partition_mass(&uniform_measure(rank), &partition);
    let mass = partition_mass(&mu, &partition);
    let cells: Vec<String> = partition.words().iter().map(Word::to_string).collect();
    let mut out = Output::new(
        json!({
            "command": "preimage",
            "map": aut.to_string(),
            "word": u.to_string(),
            "partition": cells,
            "uniform_mass": q(&uniform),
            "measure": mu.id(),
            "mass": q(&mass),
        }),
        vec!["cylinder", "mass"],
    );
    out.line(format!("map: {aut}"));
    out.line(format!("word: {u}"));
    out.line(format!("partition: {partition}"));
    out.line(format!("cylinders: {}", partition.len()));
    out.line(format!("uniform mass: {}", q(&uniform)));
    if !mu.is_uniform() {
        out.line(format!("{} mass: {}", mu.id(), q(&mass)));
    }
    for w in partition.words() {
        out.rows.push(vec![w.to_string(), q(&mu.eval(w))]);
    }
    Ok(out)
}

fn profile_json(bm: &BoundaryMap) -> Vec<Value> {
    depth1_profile(bm).iter().map(|(x, m)| json!({ "letter": x.to_string(), "mass": q(m) })).collect()
}

fn recenter_cmd(cli: &Cli, args: &MapArgs) -> Result<Output, CliError> {
    let aut = args.automorphism()?;
    let bm = boundary(cli, &aut)?;
    let (v, psi) = recenter(&bm, cli.budget)?;
    let psi_bm = boundary(cli, &psi)?;
    let mut out = Output::new(
        json!({
            "command": "recenter",
            "map": aut.to_string(),
            "v": word_text(&v),
            "psi": psi.to_string(),
            "psi_inverse": psi.inverse_to_string(),
            "profile": profile_json(&bm),
            "psi_profile": profile_json(&psi_bm),
        }),
        vec!["v", "psi", "psi_inverse"],
    );
    out.line(format!("map: {aut}"));
    out.line(format!("v: {}", word_text(&v)));
    out.line(format!("psi: {psi}"));
    out.line(format!("psi inverse: {}", psi.inverse_to_string()));
    out.line("depth-1 preimage masses (map, psi):");
    for ((x, m), (_, m2)) in depth1_profile(&bm).iter().zip(depth1_profile(&psi_bm).iter()) {
        out.line(format!("  {x}: {}  {}", q(m), q(m2)));
    }
    out.rows.push(vec![word_text(&v), psi.to_string(), psi.inverse_to_string()]);
    Ok(out)
}

fn factorize_cmd(args: &MapArgs) -> Result<Output, CliError> {
    let aut = args.automorphism()?;
    let report = factorize(&aut)?;
    let taus: Vec<String> = report.taus.iter().map(ToString::to_string).collect();
    let lengths: Vec<String> = report.lengths.iter().map(q).collect();
    let mut out = Output::new(
        json!({
            "command": "factorize",
            "map": aut.to_string(),
            "sigma": report.sigma.to_string(),
            "sigma_inverse": report.sigma.inverse_to_string(),
            "taus": taus,
            "lengths": lengths,
            "recomposition_exact": report.recompose() == aut,
        }),
        vec!["step", "factor", "length"],
    );
    out.line(format!("map: {aut}"));
    out.line(format!("sigma: {}", report.sigma));
    out.line(format!("sigma inverse: {}", report.sigma.inverse_to_string()));
    out.line(format!(
        "taus (outermost first): {}",
        if taus.is_empty() { String::from("none") } else { taus.join(" * ") }
    ));
    out.line(format!("lengths: {}", lengths.join(" < ")));
    out.line(format!("recomposition exact: {}", report.recompose() == aut));
    out.rows.push(vec![String::from("0"), report.sigma.to_string(), lengths[0].clone()]);
    for (i, tau) in report.taus.iter().rev().enumerate() {
        out.rows.push(vec![(i + 1).to_string(), tau.to_string(), lengths[i + 1].clone()]);
    }
    Ok(out)
}

fn spectrum_rows(report: &SpectrumReport) -> Vec<Vec<String>> {
    report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.length.numer().to_string(),
                e.length.denom().to_string(),
                e.multiplicity.to_string(),
                e.representative.clone(),
            ]
        })
        .collect()
}

const SPECTRUM_HEADER: [&str; 4] = ["length_num", "length_den", "multiplicity", "representative"];

fn spectrum_cmd(
    rank: usize,
    max_factors: usize,
    emit: Option<&PathBuf>,
    conj_depth: usize,
) -> Result<Output, CliError> {
    let rank = Rank::new(rank)?;
    let candidates = spectrum_candidates(rank, max_factors, conj_depth)?;
    let classes = candidates.into_par_iter().map(|(k, rep)| class_length(k, rep)).collect::<Result<Vec<_>, _>>()?;
    let report = aggregate(rank, max_factors, classes);
    let rows = spectrum_rows(&report);
    if let Some(path) = emit {
        std::fs::write(path, csv_text(&SPECTRUM_HEADER, &rows))
            .map_err(|e| CliError::Output(path.display().to_string(), e))?;
    }
    let gap = report.min_gap.as_ref().map(q);
    let mismatches = report.simplicity_mismatches().len();
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| json!({ "length": q(&e.length), "multiplicity": e.multiplicity, "representative": e.representative }))
        .collect();
    let mut out = Output::new(
        json!({
            "command": "spectrum",
            "rank": rank.get(),
            "max_factors": max_factors,
            "classes": report.classes.len(),
            "entries": entries,
            "min_gap": gap,
            "simplicity_mismatches": mismatches,
            "note": report.note(),
        }),
        SPECTRUM_HEADER.to_vec(),
    );
    out.line(format!("rank: {}, max factors: {max_factors}, classes: {}", rank.get(), report.classes.len()));
    for e in &report.entries {
        out.line(format!("  {}  ({})  x{}  {}", q(&e.length), approx(&e.length), e.multiplicity, e.representative));
    }
    out.line(format!("min gap: {}", gap.unwrap_or_else(|| String::from("none"))));
    out.line(format!("L = 1 exactly on simple representatives: {}", mismatches == 0));
    out.line(format!("note: {}", report.note()));
    out.rows = rows;
    Ok(out)
}

fn check_current(rank: usize, measure: &str, depth: usize) -> Result<Output, CliError> {
    let rank = Rank::new(rank)?;
    let mu = parse_measure(measure, rank)?;
    check_rank(&mu, rank)?;
    let consistent = consistency_check(&mu, depth);
    let length = current_length(&mu);
    let mass = mu.mass();
    let mut json = json!({
        "command": "check-current",
        "measure": mu.id(),
        "depth": depth,
        "consistent": consistent,
        "length": q(&length),
        "mass": q(&mass),
    });
    let mut out_lines = vec![
        format!("measure: {}", mu.id()),
        format!("Kolmogorov and shift invariance to depth {depth}: {consistent}"),
        format!("length: {}, mass: {}", q(&length), q(&mass)),
    ];
    let mut rows = Vec::new();
    if let FrequencyMeasure::Markov(m) = &mu {
        let report = criterion_check(m.spec())?;
        let per_letter: Vec<Value> = rank
            .letters()
            .enumerate()
            .map(|(i, x)| json!({ "letter": x.to_string(), "c1": q(&report.c1[i].1), "c2": q(&report.c2[i].1), "b": q(&report.b[i].1) }))
            .collect();
        json["criterion"] = json!({
            "passes": report.passes,
            "witness": report.witness.map(|x| x.to_string()),
            "letters": per_letter,
        });
        out_lines.push(format!("criterion passes: {}", report.passes));
        if let Some(x) = report.witness {
            out_lines.push(format!("witness: {x}"));
        }
        for (i, x) in rank.letters().enumerate() {
            out_lines.push(format!(
                "  {x}: C1 {}  C2 {}  b {}",
                q(&report.c1[i].1),
                q(&report.c2[i].1),
                q(&report.b[i].1)
            ));
            rows.push(vec![x.to_string(), q(&report.c1[i].1), q(&report.c2[i].1), q(&report.b[i].1)]);
        }
    }
    let mut out = Output::new(json, vec!["letter", "c1", "c2", "b"]);
    for l in out_lines {
        out.line(l);
    }
    out.rows = rows;
    Ok(out)
}

fn selftest_cmd(cfg: &SelftestConfig) -> Result<(Output, bool), CliError> {
    let report = selftest::run(cfg)?;
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "passed": c.passed, "cases": c.cases, "detail": c.detail }))
        .collect();
    let mut out = Output::new(
        json!({ "command": "selftest", "rank": cfg.rank.get(), "depth": cfg.depth, "passed": report.passed(), "checks": checks }),
        vec!["check", "passed", "cases", "detail"],
    );
    for c in &report.checks {
        let mut line = format!("{}: {} ({} cases)", c.name, if c.passed { "PASS" } else { "FAIL" }, c.cases);
        if !c.detail.is_empty() {
            let _ = write!(line, " {}", c.detail);
        }
        out.line(line);
        out.rows.push(vec![c.name.to_string(), c.passed.to_string(), c.cases.to_string(), c.detail.clone()]);
    }
    out.line(format!("all passed: {}", report.passed()));
    Ok((out, report.passed()))
}
