//! Reference sequences in OEIS b-file form, fetched or embedded.

use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SequenceId {
    /// Kings (offset 0).
    #[value(name = "A002464")]
    A002464,
    /// Cylindrical kings (offset 1).
    #[value(name = "A002493")]
    A002493,
}

impl SequenceId {
    pub fn name(self) -> &'static str {
        match self {
            SequenceId::A002464 => "A002464",
            SequenceId::A002493 => "A002493",
        }
    }

    fn bfile_name(self) -> String {
        format!("b{}.txt", &self.name()[1..])
    }

    pub fn url(self) -> String {
        format!("https://oeis.org/{}/{}", self.name(), self.bfile_name())
    }

    fn fixture(self) -> &'static str {
        match self {
            SequenceId::A002464 => include_str!("../fixtures/b002464.txt"),
            SequenceId::A002493 => include_str!("../fixtures/b002493.txt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Fetched,
    Cached,
    EmbeddedFixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub n: usize,
    #[serde(with = "dec")]
    pub value: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OeisSequence {
    pub id: SequenceId,
    pub source: Source,
    pub terms: Vec<Term>,
}

impl OeisSequence {
    pub fn term(&self, n: usize) -> Option<&BigUint> {
        self.terms.iter().find(|t| t.n == n).map(|t| &t.value)
    }
}

mod dec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses "index value" lines. Blank lines and `#` comments are skipped.
pub fn parse_bfile(text: &str) -> Result<Vec<Term>> {
    let mut terms: Vec<Term> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(n), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            bail!("line {}: expected \"index value\", got {line:?}", i + 1);
        };
        let n: usize = n.parse().with_context(|| format!("line {}: bad index {n:?}", i + 1))?;
        let value: BigUint = value.parse().with_context(|| format!("line {}: bad value {value:?}", i + 1))?;
        if terms.last().is_some_and(|t| t.n >= n) {
            bail!("line {}: index {n} is out of order", i + 1);
        }
        terms.push(Term { n, value });
    }
    if terms.is_empty() {
        bail!("no terms found");
    }
    Ok(terms)
}

pub fn embedded(id: SequenceId) -> OeisSequence {
    let terms = parse_bfile(id.fixture()).expect("embedded fixtures parse");
    OeisSequence { id, source: Source::EmbeddedFixture, terms }
}

fn fetch(id: SequenceId) -> Result<String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(15)))
        .build()
        .into();
    let text = agent.get(&id.url()).call()?.body_mut().read_to_string()?;
    Ok(text)
}

/// Cache first, then the network, then the embedded fixture (with a warning).
pub fn load(id: SequenceId, offline: bool, cache_dir: &Path) -> OeisSequence {
    if offline {
        return embedded(id);
    }
    let cached = cache_dir.join(id.bfile_name());
    if let Ok(text) = fs::read_to_string(&cached) {
        match parse_bfile(&text) {
            Ok(terms) => return OeisSequence { id, source: Source::Cached, terms },
            Err(e) => eprintln!("warning: ignoring unreadable cache {}: {e:#}", cached.display()),
        }
    }
    let fetched = fetch(id).and_then(|text| Ok((parse_bfile(&text)?, text)));
    match fetched {
        Ok((terms, text)) => {
            if let Err(e) = fs::create_dir_all(cache_dir).and_then(|_| fs::write(&cached, text)) {
                eprintln!("warning: could not write cache {}: {e}", cached.display());
            }
            OeisSequence { id, source: Source::Fetched, terms }
        }
        Err(e) => {
            eprintln!("warning: fetching {} failed ({e:#}); using the embedded fixture", id.url());
            embedded(id)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_cover_thirteen_terms() {
        let k = embedded(SequenceId::A002464);
        assert_eq!(k.terms[0].n, 0);
        let firsts: Vec<String> = k.terms.iter().take(6).map(|t| t.value.to_string()).collect();
        assert_eq!(firsts, ["1", "1", "0", "0", "2", "14"]);
        assert!(k.term(13).is_some());

        let ck = embedded(SequenceId::A002493);
        let nine: Vec<String> = (1..=9).map(|n| ck.term(n).unwrap().to_string()).collect();
        assert_eq!(nine, ["1", "0", "0", "0", "10", "60", "462", "3920", "36954"]);
        assert!(ck.term(13).is_some());
    }

    #[test]
    fn bfile_parsing() {
        let t = parse_bfile("# comment\n\n1 1\n2 0\n3 123456789012345678901234567890\n").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[2].value.to_string(), "123456789012345678901234567890");
        assert!(parse_bfile("1 2 3").is_err());
        assert!(parse_bfile("x 1").is_err());
        assert!(parse_bfile("2 1\n1 1").is_err());
        assert!(parse_bfile("# only comments").is_err());
    }

    #[test]
    fn urls() {
        assert_eq!(SequenceId::A002493.url(), "https://oeis.org/A002493/b002493.txt");
    }

    #[test]
    fn cache_is_used_before_network() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b002464.txt"), "0 1\n1 1\n").unwrap();
        let s = load(SequenceId::A002464, false, dir.path());
        assert_eq!(s.source, Source::Cached);
        assert_eq!(s.terms.len(), 2);
        assert_eq!(load(SequenceId::A002464, true, dir.path()).source, Source::EmbeddedFixture);
    }
}
