//! Command-line front end.
//!
//! Exit codes: 0 success, 1 KAT failure, 2 usage or validation error,
//! 3 I/O error. Diagnostics go to standard error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Cursor, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::aes::{Block, Key, MixStrategy, BLOCK_LEN, KEY_LEN};
use crate::bench::{self, BenchConfig};
use crate::gf256;
use crate::variants::{VariantContext, VariantId, VariantKeySet};
use crate::vectors::{self, LoadError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_KAT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const CHUNK: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} known-answer test(s) failed")]
    KatFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::KatFailed(_) => EXIT_KAT_FAILURE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(context: impl std::fmt::Display, e: io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "aesvar",
    version,
    about = "AES-128 and its multiple-encryption variants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encrypt a file or a hex string (ECB framing).
    Encrypt(CryptArgs),
    /// Decrypt a file or a hex string (ECB framing).
    Decrypt(CryptArgs),
    /// Run a known-answer-test corpus.
    Kat(KatArgs),
    /// Compare throughput and field-operation counts.
    Bench(BenchArgs),
    /// Print the generated S-box as a 16x16 hex grid.
    SboxDump(SboxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Padding {
    None,
    Pkcs7,
}

#[derive(Debug, Args)]
struct CryptArgs {
    /// single, double, triple2, aesx or aes-exe
    #[arg(long, default_value = "single")]
    variant: VariantId,
    /// MixColumns strategy: math, table or xtime
    #[arg(long, default_value = "xtime")]
    strategy: MixStrategy,
    /// Key in K1, K2, K3 order; repeat once per key
    #[arg(short = 'k', long = "key", required = true)]
    keys: Vec<String>,
    /// Read keys as raw ASCII (right-padded with zero bytes to 16)
    #[arg(long)]
    ascii_keys: bool,
    /// Input given as hex on the command line; output is printed as hex
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    hex: Option<String>,
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Defaults to standard output
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    padding: Padding,
}

#[derive(Debug, Args)]
struct KatArgs {
    /// Corpus file; the built-in corpus when omitted
    #[arg(short, long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    blocks: usize,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    warmup: usize,
    #[arg(long, default_value_t = bench::MIN_REPETITIONS)]
    repetitions: usize,
    /// Comma-separated; all variants when omitted
    #[arg(long, value_delimiter = ',')]
    variants: Vec<VariantId>,
    /// Comma-separated; all strategies when omitted
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<MixStrategy>,
    /// Emit key=value records instead of the table
    #[arg(long)]
    machine: bool,
}

#[derive(Debug, Args)]
struct SboxArgs {
    #[arg(long)]
    inverse: bool,
}

/// Runs the tool with the given arguments (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Encrypt(a) => cmd_crypt(&a, Mode::Encrypt, out, err),
        Command::Decrypt(a) => cmd_crypt(&a, Mode::Decrypt, out, err),
        Command::Kat(a) => cmd_kat(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::SboxDump(a) => cmd_sbox_dump(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Encrypt,
    Decrypt,
}

/// Parses one key: 32 hex characters, or up to 16 ASCII bytes padded with
/// zeros when `ascii` is set.
pub fn parse_key(text: &str, ascii: bool) -> Result<Key, CliError> {
    let mut key = [0u8; KEY_LEN];
    if ascii {
        let bytes = text.as_bytes();
        if bytes.is_empty() || bytes.len() > KEY_LEN {
            return Err(usage(format!(
                "ASCII key must be 1 to {KEY_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        key[..bytes.len()].copy_from_slice(bytes);
    } else {
        if text.len() != 2 * KEY_LEN {
            return Err(usage(format!(
                "hex key must be {} characters, got {}",
                2 * KEY_LEN,
                text.len()
            )));
        }
        hex::decode_to_slice(text, &mut key).map_err(|e| usage(format!("invalid hex key: {e}")))?;
    }
    Ok(key)
}

fn pkcs7_pad(tail: &[u8]) -> Block {
    debug_assert!(tail.len() < BLOCK_LEN);
    let pad = (BLOCK_LEN - tail.len()) as u8;
    let mut block = [pad; BLOCK_LEN];
    block[..tail.len()].copy_from_slice(tail);
    block
}

/// Length of the message inside a decrypted final block.
fn pkcs7_unpad(block: &Block) -> Result<usize, CliError> {
    let pad = block[BLOCK_LEN - 1] as usize;
    if pad == 0 || pad > BLOCK_LEN || block[BLOCK_LEN - pad..].iter().any(|&b| b as usize != pad) {
        return Err(usage("invalid PKCS#7 padding after decryption"));
    }
    Ok(BLOCK_LEN - pad)
}

/// Streams `reader` through the cipher block by block into `writer`.
/// Returns the number of input blocks processed.
pub fn process_stream<R: Read, W: Write>(
    ctx: &VariantContext,
    strategy: MixStrategy,
    mode: Mode,
    padding: Padding,
    mut reader: R,
    writer: &mut W,
) -> Result<u64, CliError> {
    let apply = |b: &Block| match mode {
        Mode::Encrypt => ctx.encrypt(b, strategy),
        Mode::Decrypt => ctx.decrypt(b, strategy),
    };
    // The final decrypted block has to be seen before its padding can be stripped.
    let hold_last = mode == Mode::Decrypt && padding == Padding::Pkcs7;
    let mut buf = vec![0u8; CHUNK];
    let mut carry: Vec<u8> = Vec::with_capacity(CHUNK + 2 * BLOCK_LEN);
    let mut out = Vec::with_capacity(CHUNK + BLOCK_LEN);
    let mut blocks = 0u64;
    let mut total_in = 0u64;

    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(io_err("read failed", e)),
        };
        total_in += n as u64;
        carry.extend_from_slice(&buf[..n]);
        let keep =
            (carry.len() % BLOCK_LEN + if hold_last { BLOCK_LEN } else { 0 }).min(carry.len());
        let ready = carry.len() - keep;
        out.clear();
        for chunk in carry[..ready].chunks_exact(BLOCK_LEN) {
            out.extend_from_slice(&apply(chunk.try_into().expect("exact chunk")));
        }
        blocks += (ready / BLOCK_LEN) as u64;
        writer
            .write_all(&out)
            .map_err(|e| io_err("write failed", e))?;
        carry.drain(..ready);
    }

    match (mode, padding) {
        (Mode::Encrypt, Padding::None) | (Mode::Decrypt, Padding::None) => {
            if !carry.is_empty() {
                return Err(usage(format!(
                    "input length {total_in} is not a multiple of {BLOCK_LEN} bytes (use --padding pkcs7)"
                )));
            }
        }
        (Mode::Encrypt, Padding::Pkcs7) => {
            let block = apply(&pkcs7_pad(&carry));
            writer
                .write_all(&block)
                .map_err(|e| io_err("write failed", e))?;
            blocks += 1;
        }
        (Mode::Decrypt, Padding::Pkcs7) => {
            if carry.len() != BLOCK_LEN {
                return Err(usage(format!(
                    "ciphertext length {total_in} is not a positive multiple of {BLOCK_LEN} bytes"
                )));
            }
            let block = apply(carry[..].try_into().expect("one block"));
            let len = pkcs7_unpad(&block)?;
            writer
                .write_all(&block[..len])
                .map_err(|e| io_err("write failed", e))?;
            blocks += 1;
        }
    }
    writer.flush().map_err(|e| io_err("write failed", e))?;
    Ok(blocks)
}

/// Writes through a temporary file in the target directory and renames it
/// into place only if `body` succeeds.
fn write_atomically<F>(path: &Path, body: F) -> Result<u64, CliError>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<u64, CliError>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_err(dir.display(), e))?;
    let blocks = {
        let mut w = BufWriter::new(tmp.as_file_mut());
        let blocks = body(&mut w)?;
        w.flush().map_err(|e| io_err("write failed", e))?;
        blocks
    };
    tmp.persist(path)
        .map_err(|e| io_err(path.display(), e.error))?;
    Ok(blocks)
}

fn cmd_crypt(
    a: &CryptArgs,
    mode: Mode,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let keys = a
        .keys
        .iter()
        .map(|k| parse_key(k, a.ascii_keys))
        .collect::<Result<Vec<_>, _>>()?;
    let key_set = VariantKeySet::from_slice(&keys)
        .ok_or_else(|| usage(format!("expected 1 to 3 keys, got {}", keys.len())))?;
    let ctx = VariantContext::new(a.variant, &key_set).map_err(|e| usage(e.to_string()))?;

    let blocks = if let Some(text) = &a.hex {
        let data =
            hex::decode(text.trim()).map_err(|e| usage(format!("invalid hex input: {e}")))?;
        let mut result = Vec::with_capacity(data.len() + BLOCK_LEN);
        let blocks = process_stream(
            &ctx,
            a.strategy,
            mode,
            a.padding,
            Cursor::new(data),
            &mut result,
        )?;
        let line = format!("{}\n", hex::encode(result));
        match &a.output {
            Some(path) => write_atomically(path, |w| {
                w.write_all(line.as_bytes())
                    .map_err(|e| io_err("write failed", e))?;
                Ok(blocks)
            })?,
            None => {
                out.write_all(line.as_bytes())
                    .map_err(|e| io_err("write failed", e))?;
                blocks
            }
        }
    } else {
        let path = a.input.as_ref().expect("clap requires --hex or --input");
        let file = File::open(path).map_err(|e| io_err(path.display(), e))?;
        if mode == Mode::Encrypt && a.padding == Padding::None {
            let len = file
                .metadata()
                .map_err(|e| io_err(path.display(), e))?
                .len();
            if len % BLOCK_LEN as u64 != 0 {
                return Err(usage(format!(
                    "{}: length {len} is not a multiple of {BLOCK_LEN} bytes (use --padding pkcs7)",
                    path.display()
                )));
            }
        }
        let reader = BufReader::new(file);
        match &a.output {
            Some(target) => write_atomically(target, |w| {
                process_stream(&ctx, a.strategy, mode, a.padding, reader, w)
            })?,
            None => {
                let mut w = BufWriter::new(out);
                process_stream(&ctx, a.strategy, mode, a.padding, reader, &mut w)?
            }
        }
    };

    if mode == Mode::Encrypt && blocks > 1 {
        let _ = writeln!(
            err,
            "warning: {blocks} blocks encrypted independently (ECB); identical plaintext blocks give identical ciphertext"
        );
    }
    Ok(())
}

fn cmd_kat(a: &KatArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = match &a.file {
        Some(path) => {
            let file = File::open(path).map_err(|e| io_err(path.display(), e))?;
            vectors::load_kat(BufReader::new(file))
        }
        None => vectors::load_kat_str(vectors::SHIPPED_CORPUS),
    };
    let records = loaded.map_err(|e| match e {
        LoadError::Io(e) => io_err("read failed", e),
        parse @ LoadError::Parse { .. } => usage(parse.to_string()),
    })?;
    let report = vectors::run_kat(&records);
    out.write_all(report.summary().as_bytes())
        .map_err(|e| io_err("write failed", e))?;
    if report.is_success() {
        Ok(())
    } else {
        Err(CliError::KatFailed(report.failed.len()))
    }
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let defaults = BenchConfig::default();
    let cfg = BenchConfig {
        n_blocks: a.blocks,
        seed: a.seed,
        variants: if a.variants.is_empty() {
            defaults.variants
        } else {
            a.variants.clone()
        },
        strategies: if a.strategies.is_empty() {
            defaults.strategies
        } else {
            a.strategies.clone()
        },
        warmup_blocks: a.warmup,
        repetitions: a.repetitions,
    };
    let report = bench::run_bench(&cfg).map_err(|e| usage(e.to_string()))?;
    let text = if a.machine {
        bench::format_machine(&report)
    } else {
        format!(
            "{}{}\n",
            bench::format_report(&report),
            bench::REPORT_FOOTER
        )
    };
    out.write_all(text.as_bytes())
        .map_err(|e| io_err("write failed", e))
}

fn cmd_sbox_dump(a: &SboxArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sbox = &gf256::tables().sbox;
    let table = if a.inverse {
        sbox.inv_sbox()
    } else {
        sbox.sbox()
    };
    out.write_all(gf256::format_grid(table).as_bytes())
        .map_err(|e| io_err("write failed", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEY: &str = "000102030405060708090a0b0c0d0e0f";

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["aesvar"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn hex_encrypt_and_decrypt() {
        let (code, out, _) = run_capture(&[
            "encrypt",
            "-k",
            KEY,
            "--hex",
            "00112233445566778899AABBCCDDEEFF",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "69c4e0d86a7b0430d8cdb78070b4c55a\n");
        let (code, out, _) = run_capture(&[
            "decrypt",
            "-k",
            KEY,
            "--strategy",
            "math",
            "--hex",
            "69c4e0d86a7b0430d8cdb78070b4c55a",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "00112233445566778899aabbccddeeff\n");
    }

    #[test]
    fn ascii_keys_are_zero_padded() {
        assert_eq!(
            &parse_key("sixteen_byte_key", true).unwrap(),
            b"sixteen_byte_key"
        );
        let k = parse_key("fifteen_byte_ky", true).unwrap();
        assert_eq!(&k[..15], b"fifteen_byte_ky");
        assert_eq!(k[15], 0);
        assert!(parse_key("seventeen_bytes!!", true).is_err());
        assert!(parse_key("", true).is_err());
        assert!(parse_key("00", false).is_err());
        assert!(parse_key(&"g".repeat(32), false).is_err());
    }

    #[test]
    fn validation_errors_exit_2() {
        let cases: &[&[&str]] = &[
            &["encrypt", "-k", KEY, "--hex", "0011"],
            &["encrypt", "-k", "abcd", "--hex", KEY],
            &["encrypt", "--variant", "aesx", "-k", KEY, "--hex", KEY],
            &["encrypt", "--variant", "nope", "-k", KEY, "--hex", KEY],
            &["decrypt", "-k", KEY, "--padding", "pkcs7", "--hex", KEY],
            &["encrypt", "-k", KEY],
            &["bench", "--blocks", "0"],
        ];
        for args in cases {
            let (code, _, err) = run_capture(args);
            assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
            assert!(!err.is_empty());
        }
    }

    #[test]
    fn pkcs7_padding() {
        assert_eq!(pkcs7_pad(&[]), [16; 16]);
        let p = pkcs7_pad(b"abc");
        assert_eq!(&p[..3], b"abc");
        assert!(p[3..].iter().all(|&b| b == 13));
        assert_eq!(pkcs7_unpad(&p).unwrap(), 3);
        let mut bad = p;
        bad[5] = 12;
        assert!(pkcs7_unpad(&bad).is_err());
        assert!(pkcs7_unpad(&[0; 16]).is_err());
        assert!(pkcs7_unpad(&[17; 16]).is_err());
    }

    #[test]
    fn stream_round_trip_at_awkward_lengths() {
        let keys = VariantKeySet::three([1; 16], [2; 16], [3; 16]);
        let ctx = VariantContext::new(VariantId::AesExe, &keys).unwrap();
        for len in [
            0usize,
            1,
            15,
            16,
            17,
            31,
            32,
            33,
            CHUNK - 1,
            CHUNK,
            CHUNK + 16,
            3 * CHUNK + 5,
        ] {
            let data: Vec<u8> = (0..len).map(|i| (i * 31 % 251) as u8).collect();
            let mut ct = Vec::new();
            process_stream(
                &ctx,
                MixStrategy::Table,
                Mode::Encrypt,
                Padding::Pkcs7,
                &data[..],
                &mut ct,
            )
            .unwrap();
            assert_eq!(ct.len(), (len / 16 + 1) * 16);
            let mut pt = Vec::new();
            process_stream(
                &ctx,
                MixStrategy::Xtime,
                Mode::Decrypt,
                Padding::Pkcs7,
                &ct[..],
                &mut pt,
            )
            .unwrap();
            assert_eq!(pt, data, "len {len}");
        }
    }

    #[test]
    fn multi_block_encrypt_warns() {
        let two = format!("{KEY}{KEY}");
        let (code, out, err) = run_capture(&["encrypt", "-k", KEY, "--hex", &two]);
        assert_eq!(code, 0);
        assert_eq!(out.trim().len(), 64);
        assert!(err.contains("ECB"));
    }

    #[test]
    fn sbox_dump() {
        let (code, out, _) = run_capture(&["sbox-dump"]);
        assert_eq!(code, 0);
        assert!(out.contains("00 |63 7C 77 7B"));
        let (_, out, _) = run_capture(&["sbox-dump", "--inverse"]);
        assert!(out.contains("00 |52 09 6A D5"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("encrypt"));
    }
}
