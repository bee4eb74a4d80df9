//! Throughput and operation-count comparison across variants and MixColumns
//! strategies.
//!
//! Every (variant, strategy) pair encrypts the same seeded block stream.
//! Within a repetition the stream is cut into batches and every pair runs
//! each batch in turn, so slow drift in machine speed hits all pairs alike.
//! `ns_per_block` is the median over repetitions of the full-stream time.
//! `latency_ratio_vs_single` is the median, over all (repetition, batch)
//! cells, of the pair's batch time divided by single AES's time on the same
//! batch with the same strategy. Operation counts come from a separate pass
//! through the instrumented path.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aes::{Block, Key, MixStrategy};
use crate::count::OpCounts;
use crate::variants::{VariantContext, VariantId, VariantKeySet};

pub const MIN_REPETITIONS: usize = 5;

/// Blocks per timed batch.
pub const BATCH_BLOCKS: usize = 1024;

/// Printed under the table by the command-line front end.
pub const REPORT_FOOTER: &str =
    "note: hardware area metrics (slices, pins, memory bits) have no software \
equivalent; field-operation counts per block and ns/block stand in for them.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub n_blocks: usize,
    pub seed: u64,
    pub variants: Vec<VariantId>,
    pub strategies: Vec<MixStrategy>,
    pub warmup_blocks: usize,
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_blocks: 100_000,
            seed: 0x5EED,
            variants: VariantId::ALL.to_vec(),
            strategies: MixStrategy::ALL.to_vec(),
            warmup_blocks: 10_000,
            repetitions: MIN_REPETITIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("no variants selected")]
    NoVariants,
    #[error("no strategies selected")]
    NoStrategies,
    #[error("need at least {MIN_REPETITIONS} repetitions, got {0}")]
    TooFewRepetitions(usize),
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_blocks == 0 {
            return Err(ConfigError::ZeroBlocks);
        }
        if self.variants.is_empty() {
            return Err(ConfigError::NoVariants);
        }
        if self.strategies.is_empty() {
            return Err(ConfigError::NoStrategies);
        }
        if self.repetitions < MIN_REPETITIONS {
            return Err(ConfigError::TooFewRepetitions(self.repetitions));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub variant: VariantId,
    pub strategy: MixStrategy,
    pub blocks_per_second: f64,
    pub ns_per_block: f64,
    pub gf_mul_calls_per_block: f64,
    pub xtime_calls_per_block: f64,
    pub table_lookups_per_block: f64,
    pub latency_ratio_vs_single: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

struct Subject {
    variant: VariantId,
    strategy: MixStrategy,
    ctx: VariantContext,
    /// `samples[rep][batch]`
    samples: Vec<Vec<Duration>>,
    counts: OpCounts,
    checksum: Block,
}

fn fold(acc: &mut Block, b: &Block) {
    for (a, x) in acc.iter_mut().zip(b) {
        *a ^= x;
    }
}

fn timed_pass(ctx: &VariantContext, strategy: MixStrategy, blocks: &[Block]) -> (Duration, Block) {
    let mut acc = [0u8; 16];
    let start = Instant::now();
    for b in blocks {
        fold(&mut acc, &ctx.encrypt(black_box(b), strategy));
    }
    (start.elapsed(), black_box(acc))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    }
}

/// Keys and input blocks for a run, all derived from `seed`.
fn inputs(seed: u64, n_blocks: usize) -> (Vec<Key>, Vec<Block>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = (0..3).map(|_| rng.gen()).collect();
    let blocks = (0..n_blocks).map(|_| rng.gen()).collect();
    (keys, blocks)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, ConfigError> {
    cfg.validate()?;
    let (keys, blocks) = inputs(cfg.seed, cfg.n_blocks);

    let mut variants = cfg.variants.clone();
    // Single is always measured: it is the denominator of every ratio.
    variants.push(VariantId::Single);
    variants.sort_unstable();
    variants.dedup();
    let mut strategies = cfg.strategies.clone();
    strategies.sort_unstable();
    strategies.dedup();

    let mut subjects = Vec::with_capacity(variants.len() * strategies.len());
    for &variant in &variants {
        let key_set = VariantKeySet::from_slice(&keys[..variant.arity()]).expect("1..=3 keys");
        let ctx = VariantContext::new(variant, &key_set).expect("arity matches by construction");
        for &strategy in &strategies {
            let mut counts = OpCounts::default();
            let mut checksum = [0u8; 16];
            for b in &blocks {
                fold(
                    &mut checksum,
                    &ctx.encrypt_counted(b, strategy, &mut counts),
                );
            }
            subjects.push(Subject {
                variant,
                strategy,
                ctx: ctx.clone(),
                samples: Vec::with_capacity(cfg.repetitions),
                counts,
                checksum,
            });
        }
    }

    let warmup = &blocks[..cfg.warmup_blocks.min(blocks.len())];
    for s in &subjects {
        timed_pass(&s.ctx, s.strategy, warmup);
    }
    for _ in 0..cfg.repetitions {
        let mut sums = vec![[0u8; 16]; subjects.len()];
        for s in subjects.iter_mut() {
            s.samples
                .push(Vec::with_capacity(blocks.len().div_ceil(BATCH_BLOCKS)));
        }
        for batch in blocks.chunks(BATCH_BLOCKS) {
            for (s, sum) in subjects.iter_mut().zip(sums.iter_mut()) {
                let (elapsed, checksum) = timed_pass(&s.ctx, s.strategy, batch);
                fold(sum, &checksum);
                s.samples.last_mut().expect("pushed above").push(elapsed);
            }
        }
        for (s, sum) in subjects.iter().zip(&sums) {
            assert_eq!(
                *sum, s.checksum,
                "counting path diverged for {} / {}",
                s.variant, s.strategy
            );
        }
    }

    let n = cfg.n_blocks as f64;
    let mut rows = Vec::new();
    for s in subjects
        .iter()
        .filter(|s| cfg.variants.contains(&s.variant))
    {
        let single = subjects
            .iter()
            .find(|b| b.variant == VariantId::Single && b.strategy == s.strategy)
            .expect("single measured for every strategy");
        let mut totals: Vec<f64> = s
            .samples
            .iter()
            .map(|rep| rep.iter().map(Duration::as_nanos).sum::<u128>() as f64)
            .collect();
        let ns = median(&mut totals) / n;
        let mut ratios: Vec<f64> = s
            .samples
            .iter()
            .flatten()
            .zip(single.samples.iter().flatten())
            .map(|(t, base)| t.as_nanos() as f64 / base.as_nanos().max(1) as f64)
            .collect();
        rows.push(BenchRow {
            variant: s.variant,
            strategy: s.strategy,
            blocks_per_second: if ns > 0.0 { 1e9 / ns } else { f64::INFINITY },
            ns_per_block: ns,
            gf_mul_calls_per_block: s.counts.gf_mul as f64 / n,
            xtime_calls_per_block: s.counts.xtime as f64 / n,
            table_lookups_per_block: s.counts.table_lookups as f64 / n,
            latency_ratio_vs_single: median(&mut ratios),
        });
    }
    Ok(BenchReport { rows })
}

pub const COLUMNS: [&str; 8] = [
    "variant",
    "strategy",
    "blocks/s",
    "ns/block",
    "gf_mul/block",
    "xtime/block",
    "lookups/block",
    "ratio_vs_single",
];
const WIDTHS: [usize; 8] = [8, 8, 12, 10, 12, 11, 13, 15];

fn row_cells(r: &BenchRow) -> [String; 8] {
    [
        r.variant.to_string(),
        r.strategy.to_string(),
        format!("{:.0}", r.blocks_per_second),
        format!("{:.1}", r.ns_per_block),
        format!("{:.2}", r.gf_mul_calls_per_block),
        format!("{:.2}", r.xtime_calls_per_block),
        format!("{:.2}", r.table_lookups_per_block),
        format!("{:.3}", r.latency_ratio_vs_single),
    ]
}

fn line(cells: &[String]) -> String {
    let mut out = String::new();
    for (i, (cell, width)) in cells.iter().zip(WIDTHS).enumerate() {
        if i < 2 {
            out.push_str(&format!("{cell:<width$}"));
        } else {
            out.push_str(&format!("{cell:>width$}"));
        }
        out.push_str("  ");
    }
    out.truncate(out.trim_end().len());
    out
}

/// Aligned text table: a header, then one line per row ordered by variant
/// and strategy.
pub fn format_report(report: &BenchReport) -> String {
    let mut rows: Vec<&BenchRow> = report.rows.iter().collect();
    rows.sort_by_key(|r| (r.variant, r.strategy));
    let header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
    let mut out = line(&header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(&row_cells(r)));
        out.push('\n');
    }
    out
}

/// `key=value` lines per row, rows separated by a blank line.
pub fn format_machine(report: &BenchReport) -> String {
    let mut rows: Vec<&BenchRow> = report.rows.iter().collect();
    rows.sort_by_key(|r| (r.variant, r.strategy));
    let mut out = String::new();
    for (i, r) in rows.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("variant={}\n", r.variant));
        out.push_str(&format!("strategy={}\n", r.strategy));
        out.push_str(&format!("blocks_per_second={}\n", r.blocks_per_second));
        out.push_str(&format!("ns_per_block={}\n", r.ns_per_block));
        out.push_str(&format!(
            "gf_mul_calls_per_block={}\n",
            r.gf_mul_calls_per_block
        ));
        out.push_str(&format!(
            "xtime_calls_per_block={}\n",
            r.xtime_calls_per_block
        ));
        out.push_str(&format!(
            "table_lookups_per_block={}\n",
            r.table_lookups_per_block
        ));
        out.push_str(&format!(
            "latency_ratio_vs_single={}\n",
            r.latency_ratio_vs_single
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(variants: Vec<VariantId>) -> BenchConfig {
        BenchConfig {
            n_blocks: 256,
            seed: 11,
            variants,
            strategies: MixStrategy::ALL.to_vec(),
            warmup_blocks: 16,
            repetitions: MIN_REPETITIONS,
        }
    }

    fn row(variant: VariantId, strategy: MixStrategy, ns: f64) -> BenchRow {
        BenchRow {
            variant,
            strategy,
            blocks_per_second: 1e9 / ns,
            ns_per_block: ns,
            gf_mul_calls_per_block: 576.0,
            xtime_calls_per_block: 0.0,
            table_lookups_per_block: 0.0,
            latency_ratio_vs_single: ns / 250.0,
        }
    }

    /// Splits a formatted data line back into typed values.
    fn parse_line(line: &str) -> (String, String, Vec<f64>) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cells.len(), COLUMNS.len());
        let nums = cells[2..].iter().map(|c| c.parse().unwrap()).collect();
        (cells[0].to_string(), cells[1].to_string(), nums)
    }

    #[test]
    fn config_validation() {
        let ok = small(vec![VariantId::Single]);
        assert_eq!(ok.validate(), Ok(()));
        assert_eq!(
            BenchConfig {
                n_blocks: 0,
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::ZeroBlocks)
        );
        assert_eq!(
            BenchConfig {
                variants: vec![],
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::NoVariants)
        );
        assert_eq!(
            BenchConfig {
                strategies: vec![],
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::NoStrategies)
        );
        assert_eq!(
            BenchConfig {
                repetitions: 3,
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::TooFewRepetitions(3))
        );
        assert!(run_bench(&BenchConfig { n_blocks: 0, ..ok }).is_err());
    }

    #[test]
    fn rows_cover_every_pair_in_order() {
        let report = run_bench(&small(vec![VariantId::Aesx, VariantId::Double])).unwrap();
        let pairs: Vec<_> = report
            .rows
            .iter()
            .map(|r| (r.variant, r.strategy))
            .collect();
        let mut expected = Vec::new();
        for v in [VariantId::Double, VariantId::Aesx] {
            for s in MixStrategy::ALL {
                expected.push((v, s));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn op_counts_follow_strategy_definitions() {
        let report = run_bench(&small(VariantId::ALL.to_vec())).unwrap();
        for r in &report.rows {
            let passes = match r.variant {
                VariantId::Single | VariantId::Aesx => 1.0,
                VariantId::Double | VariantId::AesExe => 2.0,
                VariantId::Triple2 => 3.0,
            };
            match r.strategy {
                MixStrategy::Math => {
                    assert_eq!(r.gf_mul_calls_per_block, passes * 576.0);
                    assert_eq!(r.xtime_calls_per_block, 0.0);
                    assert_eq!(r.table_lookups_per_block, 0.0);
                }
                MixStrategy::Table => {
                    assert_eq!(r.gf_mul_calls_per_block, 0.0);
                    assert_eq!(r.xtime_calls_per_block, 0.0);
                    assert!(r.table_lookups_per_block > 0.0);
                }
                MixStrategy::Xtime => {
                    assert_eq!(r.gf_mul_calls_per_block, 0.0);
                    assert_eq!(r.table_lookups_per_block, 0.0);
                    assert!(r.xtime_calls_per_block > 0.0);
                }
            }
        }
        // Triple is E, D, E: two forward passes (288 lookups) and one inverse (576).
        let triple_table = report
            .rows
            .iter()
            .find(|r| r.variant == VariantId::Triple2 && r.strategy == MixStrategy::Table)
            .unwrap();
        assert_eq!(triple_table.table_lookups_per_block, 2.0 * 288.0 + 576.0);
    }

    #[test]
    fn counts_are_deterministic_for_a_seed() {
        let cfg = small(vec![VariantId::Single, VariantId::Triple2]);
        let counts = |r: &BenchReport| -> Vec<(f64, f64, f64)> {
            r.rows
                .iter()
                .map(|r| {
                    (
                        r.gf_mul_calls_per_block,
                        r.xtime_calls_per_block,
                        r.table_lookups_per_block,
                    )
                })
                .collect()
        };
        assert_eq!(
            counts(&run_bench(&cfg).unwrap()),
            counts(&run_bench(&cfg).unwrap())
        );
    }

    #[test]
    fn single_ratio_is_exactly_one() {
        let report = run_bench(&small(vec![VariantId::Single])).unwrap();
        for r in &report.rows {
            assert_eq!(r.latency_ratio_vs_single, 1.0);
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = format_report(&BenchReport::default());
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("variant"));
    }

    #[test]
    fn formatted_rows_parse_back() {
        let report = BenchReport {
            rows: vec![
                row(VariantId::Double, MixStrategy::Xtime, 512.25),
                row(VariantId::Single, MixStrategy::Math, 250.0),
            ],
        };
        let text = format_report(&report);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        // Sorted: single before double.
        let (v, s, nums) = parse_line(lines[1]);
        assert_eq!((v.as_str(), s.as_str()), ("single", "math"));
        assert_eq!(nums, vec![4_000_000.0, 250.0, 576.0, 0.0, 0.0, 1.0]);
        let (v, _, nums) = parse_line(lines[2]);
        assert_eq!(v, "double");
        let r = &report.rows[0];
        let expected = [
            r.blocks_per_second,
            r.ns_per_block,
            r.gf_mul_calls_per_block,
            r.xtime_calls_per_block,
            r.table_lookups_per_block,
            r.latency_ratio_vs_single,
        ];
        let precision = [0.5, 0.05, 0.005, 0.005, 0.005, 0.0005];
        for ((got, want), tol) in nums.iter().zip(expected).zip(precision) {
            assert!((got - want).abs() <= tol, "{got} vs {want}");
        }
        // Columns line up.
        let widths: Vec<usize> = lines.iter().map(|l| l.len()).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{widths:?}");
    }

    #[test]
    fn machine_format_has_one_record_per_row() {
        let report = BenchReport {
            rows: vec![
                row(VariantId::Aesx, MixStrategy::Table, 300.0),
                row(VariantId::Single, MixStrategy::Table, 250.0),
            ],
        };
        let text = format_machine(&report);
        let records: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(records.len(), 2);
        assert!(records[0].starts_with("variant=single\nstrategy=table\n"));
        assert!(records[1].contains("latency_ratio_vs_single=1.2\n"));
        assert!(text
            .lines()
            .filter(|l| !l.is_empty())
            .all(|l| l.contains('=')));
    }
}
