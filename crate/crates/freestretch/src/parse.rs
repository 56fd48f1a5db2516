//! Text forms of words, automorphisms, generator expressions and measures.

use std::fs;
use std::path::Path;

use freestretch_core::automorphisms::{Generator, WhType, WhiteheadSecondKind};
use freestretch_core::measures::{markov_measure, rational_measure, uniform_measure, FrequencyMeasure, MarkovSpec};
use freestretch_core::rational;
use freestretch_core::{Automorphism, BigRational, Letter, Rank, Word};
use serde_json::{json, Map, Value};

use crate::error::CliError;

/// A word, with `1` or the empty string for the identity.
pub fn parse_word(text: &str, rank: Rank) -> Result<Word, CliError> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(Word::empty());
    }
    Ok(Word::parse(text, rank)?)
}

pub fn word_text(w: &Word) -> String {
    if w.is_empty() {
        String::from("1")
    } else {
        w.to_string()
    }
}

fn parse_letter(text: &str, rank: Rank) -> Result<Letter, CliError> {
    let mut chars = text.trim().chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(Letter::from_char(c, rank)?),
        _ => Err(CliError::Parse(format!("expected a single letter, got {text:?}"))),
    }
}

/// `a->w1,b->w2,…`: one image per basis letter, in any order.
pub fn parse_map(text: &str, rank: Rank) -> Result<Vec<Word>, CliError> {
    let mut images: Vec<Option<Word>> = vec![None; rank.get()];
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (lhs, rhs) =
            item.split_once("->").ok_or_else(|| CliError::Parse(format!("expected x->word, got {item:?}")))?;
        let x = parse_letter(lhs, rank)?;
        if x.is_inverse() {
            return Err(CliError::Parse(format!("images are given for basis letters, not {x}")));
        }
        let slot = &mut images[x.generator()];
        if slot.is_some() {
            return Err(CliError::Parse(format!("image of {x} given twice")));
        }
        *slot = Some(Word::parse_reducing(rhs, rank)?);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(g, w)| w.ok_or_else(|| CliError::Parse(format!("missing image of {}", Letter::basis(g as u8)))))
        .collect()
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn bracketed<'a>(term: &'a str, head: &str) -> Option<&'a str> {
    term.strip_prefix(head)?.strip_prefix('[')?.strip_suffix(']')
}

/// Whether the text is a generator expression rather than a bare map.
pub fn is_expression(text: &str) -> bool {
    let first = split_top_level(text, '*')[0].trim();
    first == "id" || ["W2[", "perm[", "inner["].iter().any(|h| first.starts_with(h))
}

/// `W2[a; b:RIGHT, c:CONJ]`.
pub fn parse_second_kind(text: &str, rank: Rank) -> Result<WhiteheadSecondKind, CliError> {
    let body = bracketed(text.trim(), "W2").ok_or_else(|| CliError::Parse(format!("not a W2[...] term: {text:?}")))?;
    let (mult, rest) = body.split_once(';').unwrap_or((body, ""));
    let multiplier = parse_letter(mult, rank)?;
    let mut types = vec![WhType::Fix; rank.get()];
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, t) = item.split_once(':').ok_or_else(|| CliError::Parse(format!("expected x:TYPE, got {item:?}")))?;
        let x = parse_letter(x, rank)?;
        if x.is_inverse() {
            return Err(CliError::Parse(format!("types are given for basis letters, not {x}")));
        }
        types[x.generator()] = WhType::from_name(t).ok_or_else(|| CliError::Parse(format!("unknown type {t:?}")))?;
    }
    Ok(WhiteheadSecondKind::new(rank, multiplier, types)?)
}

fn parse_term(term: &str, rank: Rank) -> Result<Automorphism, CliError> {
    let term = term.trim();
    if term == "id" {
        return Ok(Automorphism::identity(rank));
    }
    if term.starts_with("W2[") {
        return Ok(parse_second_kind(term, rank)?.automorphism());
    }
    if let Some(body) = bracketed(term, "perm") {
        let images = parse_map(body, rank)?;
        let letters = images
            .iter()
            .map(|w| match w.letters() {
                [x] => Ok(*x),
                _ => Err(CliError::Core(freestretch_core::Error::NotPermutation)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Generator::Permutation(letters).automorphism(rank)?);
    }
    if let Some(body) = bracketed(term, "inner") {
        return Ok(Automorphism::inner(rank, &parse_word(body, rank)?)?);
    }
    Err(CliError::Parse(format!("unknown generator expression {term:?}")))
}

/// `t₁ * t₂ * …` meaning `t₁ ∘ t₂ ∘ …`.
pub fn parse_expression(text: &str, rank: Rank) -> Result<Automorphism, CliError> {
    let mut acc = Automorphism::identity(rank);
    for term in split_top_level(text, '*') {
        acc = acc.compose(&parse_term(term, rank)?);
    }
    Ok(acc)
}

/// A generator expression, or a bare map which then needs its inverse.
pub fn parse_automorphism(rank: Rank, map: &str, inverse: Option<&str>) -> Result<Automorphism, CliError> {
    if is_expression(map) {
        let aut = parse_expression(map, rank)?;
        if let Some(inv) = inverse {
            if Automorphism::new(rank, aut.basis_images(), parse_map(inv, rank)?)? != aut {
                return Err(CliError::Parse(String::from("--inverse disagrees with the expression")));
            }
        }
        return Ok(aut);
    }
    let inv = inverse.ok_or(CliError::MissingInverse)?;
    Ok(Automorphism::new(rank, parse_map(map, rank)?, parse_map(inv, rank)?)?)
}

/// `uniform`, `markov:<file>` or `rational:<word>`.
pub fn parse_measure(text: &str, rank: Rank) -> Result<FrequencyMeasure, CliError> {
    let text = text.trim();
    if text == "uniform" {
        return Ok(uniform_measure(rank));
    }
    if let Some(path) = text.strip_prefix("markov:") {
        let spec = read_markov(Path::new(path))?;
        if spec.rank != rank {
            return Err(freestretch_core::Error::RankMismatch(rank.get(), spec.rank.get()).into());
        }
        return Ok(markov_measure(spec)?);
    }
    if let Some(w) = text.strip_prefix("rational:") {
        return Ok(rational_measure(rank, &parse_word(w, rank)?)?);
    }
    Err(CliError::Parse(format!("unknown measure {text:?}; use uniform, markov:<file> or rational:<word>")))
}

pub fn read_markov(path: &Path) -> Result<MarkovSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    parse_markov_json(&text)
}

fn rational_value(v: &Value, what: &str) -> Result<BigRational, CliError> {
    let parsed = match v {
        Value::String(s) => rational::parse(s),
        Value::Number(n) => n.as_i64().map(rational::int),
        _ => None,
    };
    parsed.ok_or_else(|| CliError::Parse(format!("{what}: expected a rational \"p/q\", got {v}")))
}

/// `{rank, mass, p: {x: "p/q"}, P: {x: {y: "p/q"}}}`; absent transitions are 0.
pub fn parse_markov_json(text: &str) -> Result<MarkovSpec, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("Markov spec: {e}")))?;
    let rank = doc
        .get("rank")
        .and_then(Value::as_u64)
        .ok_or_else(|| CliError::Parse(String::from("Markov spec: missing integer rank")))?;
    let rank = Rank::new(rank as usize)?;
    let mass = match doc.get("mass") {
        Some(v) => rational_value(v, "mass")?,
        None => rational::one(),
    };
    let n = rank.alphabet_size();
    let mut initial = vec![rational::zero(); n];
    let p = doc
        .get("p")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Parse(String::from("Markov spec: missing p")))?;
    for (k, v) in p {
        initial[parse_letter(k, rank)?.code()] = rational_value(v, &format!("p[{k}]"))?;
    }
    let mut transitions = vec![vec![rational::zero(); n]; n];
    let rows = doc
        .get("P")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Parse(String::from("Markov spec: missing P")))?;
    for (k, row) in rows {
        let x = parse_letter(k, rank)?;
        let row = row.as_object().ok_or_else(|| CliError::Parse(format!("Markov spec: P[{k}] must be an object")))?;
        for (j, v) in row {
            transitions[x.code()][parse_letter(j, rank)?.code()] = rational_value(v, &format!("P[{k}][{j}]"))?;
        }
    }
    Ok(MarkovSpec { rank, mass, initial, transitions })
}

pub fn markov_to_json(spec: &MarkovSpec) -> Value {
    let mut p = Map::new();
    let mut rows = Map::new();
    for x in spec.rank.letters() {
        p.insert(x.to_string(), json!(rational::format(spec.p(x))));
        let mut row = Map::new();
        for y in spec.rank.letters() {
            let t = spec.transition(x, y);
            if *t != rational::zero() {
                row.insert(y.to_string(), json!(rational::format(t)));
            }
        }
        rows.insert(x.to_string(), Value::Object(row));
    }
    json!({ "rank": spec.rank.get(), "mass": rational::format(&spec.mass), "p": p, "P": rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    #[test]
    fn maps_and_expressions() {
        let k = r2();
        let nielsen = parse_automorphism(k, "a->a,b->ba", Some("a->a,b->bA")).unwrap();
        assert_eq!(nielsen.to_string(), "a->a,b->ba");
        assert_eq!(parse_automorphism(k, "W2[a; b:RIGHT]", None).unwrap(), nielsen);
        assert!(matches!(parse_automorphism(k, "a->a,b->ab", None), Err(CliError::MissingInverse)));
        assert!(matches!(
            parse_automorphism(k, "a->a,b->ba", Some("a->a,b->ba")),
            Err(CliError::Core(freestretch_core::Error::NotInverse(_)))
        ));
        let swap = parse_expression("perm[a->b,b->a]", k).unwrap();
        assert_eq!(swap.to_string(), "a->b,b->a");
        let inner = parse_expression("inner[ab]", k).unwrap();
        assert_eq!(inner.to_string(), "a->abaBA,b->abA");
        let composite = parse_expression("W2[a; b:RIGHT] * perm[a->b,b->a]", k).unwrap();
        assert_eq!(composite, nielsen.compose(&swap));
        assert!(parse_expression("id", k).unwrap().is_identity());
        assert!(parse_expression("W2[a; a:RIGHT]", k).is_err());
    }

    #[test]
    fn round_trips() {
        let k = r2();
        let phi = parse_expression("W2[B; a:CONJ] * inner[ab] * W2[a; b:LEFT]", k).unwrap();
        let again = parse_automorphism(k, &phi.to_string(), Some(&phi.inverse_to_string())).unwrap();
        assert_eq!(again, phi);
        let tau = parse_second_kind("W2[A; b:CONJ]", k).unwrap();
        assert_eq!(parse_second_kind(&tau.to_string(), k).unwrap(), tau);
        assert_eq!(parse_word(&word_text(&Word::empty()), k).unwrap(), Word::empty());
    }

    #[test]
    fn markov_round_trip() {
        let spec = MarkovSpec::uniform(r2());
        let text = markov_to_json(&spec).to_string();
        assert_eq!(parse_markov_json(&text).unwrap(), spec);
        assert!(parse_markov_json("{\"rank\": 2}").is_err());
    }
}
