//! Known-answer tests: the text format, a loader and a runner.
//!
//! ```text
//! # comment
//! id = fips197-appendix-c1
//! variant = single
//! strategy = all
//! key1 = 000102030405060708090a0b0c0d0e0f
//! pt = 00112233445566778899aabbccddeeff
//! ct = 69c4e0d86a7b0430d8cdb78070b4c55a
//! provenance = external-standard
//! ```
//!
//! Records are separated by blank lines. Hex is accepted in either case and
//! written lowercase. Unknown or repeated fields are errors.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

use crate::aes::{Block, Key, MixStrategy};
use crate::variants::{VariantContext, VariantId, VariantKeySet};
use crate::UnknownName;

/// The corpus shipped with the crate.
pub const SHIPPED_CORPUS: &str = include_str!("../kat/aes128.kat");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategySel {
    One(MixStrategy),
    All,
}

impl StrategySel {
    pub fn strategies(self) -> Vec<MixStrategy> {
        match self {
            StrategySel::One(s) => vec![s],
            StrategySel::All => MixStrategy::ALL.to_vec(),
        }
    }
}

impl fmt::Display for StrategySel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySel::One(s) => s.fmt(f),
            StrategySel::All => f.write_str("all"),
        }
    }
}

impl FromStr for StrategySel {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(StrategySel::All)
        } else {
            s.parse().map(StrategySel::One)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ExternalStandard,
    DerivedOracle,
    /// Executed and reported, but never counted as a failure.
    PaperInformational,
}

impl Provenance {
    pub const ALL: [Provenance; 3] = [
        Provenance::ExternalStandard,
        Provenance::DerivedOracle,
        Provenance::PaperInformational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Provenance::ExternalStandard => "external-standard",
            Provenance::DerivedOracle => "derived-oracle",
            Provenance::PaperInformational => "paper-informational",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Provenance {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Provenance::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName::new("provenance", s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatRecord {
    pub id: String,
    pub variant: VariantId,
    pub strategy: StrategySel,
    pub keys: VariantKeySet,
    pub plaintext: Block,
    pub ciphertext: Block,
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        line,
        message: message.into(),
    }
}

const FIELDS: [&str; 9] = [
    "id",
    "variant",
    "strategy",
    "key1",
    "key2",
    "key3",
    "pt",
    "ct",
    "provenance",
];

#[derive(Default)]
struct Pending {
    first_line: usize,
    values: [Option<(usize, String)>; FIELDS.len()],
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    fn set(&mut self, line: usize, field: &str, value: &str) -> Result<(), LoadError> {
        let idx = FIELDS
            .iter()
            .position(|f| *f == field)
            .ok_or_else(|| parse_err(line, format!("unknown field `{field}`")))?;
        if self.is_empty() {
            self.first_line = line;
        }
        if self.values[idx].is_some() {
            return Err(parse_err(line, format!("field `{field}` repeated")));
        }
        self.values[idx] = Some((line, value.to_string()));
        Ok(())
    }

    fn take(&mut self, field: &str) -> Option<(usize, String)> {
        let idx = FIELDS
            .iter()
            .position(|f| *f == field)
            .expect("known field");
        self.values[idx].take()
    }

    fn require(&mut self, field: &str) -> Result<(usize, String), LoadError> {
        let first = self.first_line;
        self.take(field)
            .ok_or_else(|| parse_err(first, format!("record is missing `{field}`")))
    }

    fn finish(mut self) -> Result<KatRecord, LoadError> {
        let (_, id) = self.require("id")?;
        let (line, variant) = self.require("variant")?;
        let variant: VariantId = variant
            .parse()
            .map_err(|e: UnknownName| parse_err(line, e.to_string()))?;
        let (line, strategy) = self.require("strategy")?;
        let strategy: StrategySel = strategy
            .parse()
            .map_err(|e: UnknownName| parse_err(line, e.to_string()))?;
        let (line, provenance) = self.require("provenance")?;
        let provenance: Provenance = provenance
            .parse()
            .map_err(|e: UnknownName| parse_err(line, e.to_string()))?;

        let mut keys: Vec<Key> = Vec::with_capacity(3);
        let mut gap = false;
        for field in ["key1", "key2", "key3"] {
            match self.take(field) {
                Some(_) if gap => {
                    return Err(parse_err(
                        self.first_line,
                        format!("`{field}` given without the keys before it"),
                    ));
                }
                Some((line, hex)) => keys.push(decode_block(line, field, &hex)?),
                None => gap = true,
            }
        }
        if keys.len() != variant.arity() {
            return Err(parse_err(
                self.first_line,
                format!(
                    "variant `{variant}` takes {} key(s), record has {}",
                    variant.arity(),
                    keys.len()
                ),
            ));
        }
        let (line, pt) = self.require("pt")?;
        let plaintext = decode_block(line, "pt", &pt)?;
        let (line, ct) = self.require("ct")?;
        let ciphertext = decode_block(line, "ct", &ct)?;

        Ok(KatRecord {
            id,
            variant,
            strategy,
            keys: VariantKeySet::from_slice(&keys).expect("one to three keys"),
            plaintext,
            ciphertext,
            provenance,
        })
    }
}

fn decode_block(line: usize, field: &str, value: &str) -> Result<Block, LoadError> {
    if value.len() != 32 {
        return Err(parse_err(
            line,
            format!("`{field}` must be 32 hex characters, got {}", value.len()),
        ));
    }
    let mut out = [0u8; 16];
    hex::decode_to_slice(value, &mut out)
        .map_err(|e| parse_err(line, format!("`{field}` is not valid hex: {e}")))?;
    Ok(out)
}

/// Parses a whole corpus, preserving record order.
pub fn load_kat<R: BufRead>(source: R) -> Result<Vec<KatRecord>, LoadError> {
    let mut records = Vec::new();
    let mut pending = Pending::default();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.starts_with('#') {
            continue;
        }
        if text.is_empty() {
            if !pending.is_empty() {
                records.push(std::mem::take(&mut pending).finish()?);
            }
            continue;
        }
        let (field, value) = text
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected `field = value`"))?;
        pending.set(line_no, field.trim(), value.trim())?;
    }
    if !pending.is_empty() {
        records.push(pending.finish()?);
    }
    Ok(records)
}

pub fn load_kat_str(source: &str) -> Result<Vec<KatRecord>, LoadError> {
    load_kat(source.as_bytes())
}

pub fn shipped_corpus() -> Vec<KatRecord> {
    load_kat_str(SHIPPED_CORPUS).expect("shipped corpus parses")
}

/// Writes records in the same format [`load_kat`] reads.
pub fn serialize(records: &[KatRecord]) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("id = {}\n", r.id));
        out.push_str(&format!("variant = {}\n", r.variant));
        out.push_str(&format!("strategy = {}\n", r.strategy));
        for (k, key) in r.keys.to_vec().iter().enumerate() {
            out.push_str(&format!("key{} = {}\n", k + 1, hex::encode(key)));
        }
        out.push_str(&format!("pt = {}\n", hex::encode(r.plaintext)));
        out.push_str(&format!("ct = {}\n", hex::encode(r.ciphertext)));
        out.push_str(&format!("provenance = {}\n", r.provenance));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Encrypt => "encrypt",
            Direction::Decrypt => "decrypt",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatFailure {
    pub id: String,
    pub strategy: MixStrategy,
    pub direction: Direction,
    pub expected: String,
    pub actual: String,
}

/// Outcome of a record that is run but not allowed to fail the suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationalResult {
    pub id: String,
    pub matched: bool,
    pub actual_ciphertext: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KatReport {
    pub total: usize,
    pub passed: usize,
    /// Sorted by record id.
    pub failed: Vec<KatFailure>,
    pub skipped_informational: usize,
    pub informational: Vec<InformationalResult>,
}

impl KatReport {
    pub fn is_success(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "total {} passed {} failed {} informational {}\n",
            self.total,
            self.passed,
            self.failed.len(),
            self.skipped_informational
        );
        for f in &self.failed {
            out.push_str(&format!(
                "FAIL {} [{} {}] expected {} got {}\n",
                f.id, f.strategy, f.direction, f.expected, f.actual
            ));
        }
        for i in &self.informational {
            let verdict = if i.matched { "match" } else { "mismatch" };
            out.push_str(&format!(
                "INFO {} {} (computed ct {})\n",
                i.id, verdict, i.actual_ciphertext
            ));
        }
        out
    }
}

/// Checks one record under every strategy it names, both directions.
/// Returns the first mismatch.
fn check(record: &KatRecord) -> Option<KatFailure> {
    let ctx = VariantContext::new(record.variant, &record.keys).expect("arity validated at load");
    for strategy in record.strategy.strategies() {
        let ct = ctx.encrypt(&record.plaintext, strategy);
        if ct != record.ciphertext {
            return Some(KatFailure {
                id: record.id.clone(),
                strategy,
                direction: Direction::Encrypt,
                expected: hex::encode(record.ciphertext),
                actual: hex::encode(ct),
            });
        }
        let pt = ctx.decrypt(&record.ciphertext, strategy);
        if pt != record.plaintext {
            return Some(KatFailure {
                id: record.id.clone(),
                strategy,
                direction: Direction::Decrypt,
                expected: hex::encode(record.plaintext),
                actual: hex::encode(pt),
            });
        }
    }
    None
}

pub fn run_kat(records: &[KatRecord]) -> KatReport {
    let mut report = KatReport {
        total: records.len(),
        ..Default::default()
    };
    for record in records {
        let failure = check(record);
        if record.provenance == Provenance::PaperInformational {
            let ctx =
                VariantContext::new(record.variant, &record.keys).expect("arity validated at load");
            let strategy = record.strategy.strategies()[0];
            report.skipped_informational += 1;
            report.informational.push(InformationalResult {
                id: record.id.clone(),
                matched: failure.is_none(),
                actual_ciphertext: hex::encode(ctx.encrypt(&record.plaintext, strategy)),
            });
            continue;
        }
        match failure {
            Some(f) => report.failed.push(f),
            None => report.passed += 1,
        }
    }
    report.failed.sort_by(|a, b| a.id.cmp(&b.id));
    report
}
