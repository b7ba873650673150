//! `barn` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 refusal
//! (key space too large to enumerate).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use barn::analysis::{
    self, bit_balance, brute_force, monobit_test, runs_test, AttackConfig, Execution, KnownPlaintext, MessageTest,
    PrintableAscii, TableKind,
};
use barn::cipher::{self, CipherEnvelope, CONTAINER_MAGIC};
use barn::entropy::{file_source, os_source, seeded_source, EntropySource};
use barn::keygen::{derive_key, derive_key_exact};
use barn::{Base, BitString, Error, Key};
use clap::{ArgGroup, Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "barn", version, about = "Hide message bits in a random bit stream")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive a key from entropy and write a key file.
    Keygen(KeygenArgs),
    /// Embed a message into random bits.
    Encrypt(EncryptArgs),
    /// Extract a message with a key.
    Decrypt(DecryptArgs),
    /// Print key-size tables for all bases.
    Tables(TablesArgs),
    /// Exhaustive key search against a cipher.
    Attack(AttackArgs),
    /// Frequency and runs statistics of a bit file.
    Stats(StatsArgs),
    /// Entropy rate needed for a message rate.
    Plan(PlanArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("length").required(true).args(["kappa", "bits"])))]
struct KeygenArgs {
    #[arg(long, value_parser = parse_base)]
    base: Base,
    /// Exact number of key digits.
    #[arg(long)]
    kappa: Option<usize>,
    /// Number of entropy bits to chunk into digits.
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long, value_parser = parse_source)]
    source: SourceSpec,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_source)]
    source: SourceSpec,
    #[arg(long)]
    out: PathBuf,
    /// Write bare cipher bits without the length header.
    #[arg(long)]
    raw: bool,
    /// Encrypt only the first N bits of the input.
    #[arg(long)]
    bit_length: Option<usize>,
    /// Append N extra random bits after the last insertion.
    #[arg(long, default_value_t = 0)]
    tail: usize,
}

#[derive(Debug, Args)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Input is bare cipher bits; requires --length.
    #[arg(long, requires = "length")]
    raw: bool,
    /// Message length in bits for raw input.
    #[arg(long, requires = "raw")]
    length: Option<u64>,
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: TableKind,
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("test").required(true).args(["known", "printable"])))]
struct AttackArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_base)]
    base: Base,
    #[arg(long)]
    kappa: usize,
    /// File whose bits the message must start with.
    #[arg(long)]
    known: Option<PathBuf>,
    /// Accept messages that are printable ASCII.
    #[arg(long)]
    printable: bool,
    /// Refuse key spaces larger than this.
    #[arg(long, default_value_t = analysis::DEFAULT_MAX_KEYS)]
    max_keys: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Treat the input as bare cipher bits even if it looks like a container.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Analyse only the first N bits.
    #[arg(long)]
    bits: Option<usize>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Message rate in bits per second.
    #[arg(long)]
    rate: u64,
    #[arg(long, value_parser = parse_base)]
    base: Base,
}

#[derive(Debug, Clone)]
enum SourceSpec {
    Os,
    Seed(u64),
    File(PathBuf),
}

impl SourceSpec {
    fn open(&self) -> barn::Result<Box<dyn EntropySource>> {
        Ok(match self {
            SourceSpec::Os => Box::new(os_source()),
            SourceSpec::Seed(s) => Box::new(seeded_source(*s)),
            SourceSpec::File(p) => Box::new(file_source(p)?),
        })
    }
}

fn parse_source(s: &str) -> Result<SourceSpec, String> {
    if s == "os" {
        Ok(SourceSpec::Os)
    } else if let Some(seed) = s.strip_prefix("seed:") {
        seed.parse().map(SourceSpec::Seed).map_err(|e| format!("bad seed: {e}"))
    } else if let Some(path) = s.strip_prefix("file:") {
        Ok(SourceSpec::File(PathBuf::from(path)))
    } else {
        Err("expected os, seed:<u64> or file:<path>".into())
    }
}

fn parse_base(s: &str) -> Result<Base, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<TableKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Data(String),
    Refused(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::KeySpaceTooLarge { .. } => Failure::Refused(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> Result<(), Failure> {
    fs::write(path, data).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_key(path: &Path) -> Result<Key, Failure> {
    let text = String::from_utf8(read(path)?).map_err(|_| Failure::Data("key file is not UTF-8".into()))?;
    Ok(Key::from_key_file(&text)?)
}

fn looks_like_container(data: &[u8]) -> bool {
    data.len() >= 13 && &data[..4] == CONTAINER_MAGIC
}

/// Runs the CLI on `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
        Err(Failure::Refused(msg)) => {
            let _ = writeln!(err, "refused: {msg}");
            EXIT_REFUSED
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Keygen(a) => keygen(a, out),
        Command::Encrypt(a) => encrypt(a, out),
        Command::Decrypt(a) => decrypt(a, out),
        Command::Tables(a) => {
            let t = analysis::tables(a.kind);
            let text = if a.csv { t.render_csv() } else { t.render_text() };
            out.write_all(text.as_bytes())?;
            Ok(())
        }
        Command::Attack(a) => attack(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Plan(a) => {
            let need = analysis::throughput_requirement(a.rate, a.base)?;
            if need.is_integer() {
                writeln!(out, "{}", need.to_integer())?;
            } else {
                writeln!(out, "{:.1}", *need.numer() as f64 / *need.denom() as f64)?;
            }
            Ok(())
        }
    }
}

fn keygen(a: KeygenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut src = a.source.open()?;
    let key = match (a.kappa, a.bits) {
        (Some(kappa), _) => {
            if kappa == 0 {
                return Err(Failure::Data("--kappa must be at least 1".into()));
            }
            derive_key_exact(&mut src, a.base, kappa)?
        }
        (None, Some(bits)) => derive_key(&src.next_bits(bits)?, a.base)?,
        (None, None) => unreachable!("clap enforces one of --kappa/--bits"),
    };
    write(&a.out, key.to_key_file().as_bytes())?;
    writeln!(out, "{} key, {} digits", key.base(), key.kappa())?;
    Ok(())
}

fn encrypt(a: EncryptArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let key = read_key(&a.key)?;
    let data = read(&a.input)?;
    let bit_length = a.bit_length.unwrap_or(data.len() * 8);
    let message = BitString::from_bytes(&data, bit_length)?;
    let mut src = a.source.open()?;
    let env = cipher::encode_with_tail(&message, &key, &mut src, a.tail)?;
    let bytes = if a.raw {
        env.to_raw_bytes()
    } else {
        env.to_container_bytes()
    };
    write(&a.out, &bytes)?;
    writeln!(out, "{} message bits -> {} cipher bits", message.len(), env.cipher.len())?;
    Ok(())
}

fn decrypt(a: DecryptArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let key = read_key(&a.key)?;
    let data = read(&a.input)?;
    let env = if a.raw {
        CipherEnvelope::raw(BitString::from_byte_slice(&data))
    } else {
        CipherEnvelope::from_container_bytes(&data)?
    };
    let message = cipher::decode(&env, &key, a.length)?;
    write(&a.out, message.as_bytes())?;
    writeln!(out, "{} message bits", message.len())?;
    Ok(())
}

fn attack(a: AttackArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let data = read(&a.input)?;
    let env = if !a.raw && looks_like_container(&data) {
        CipherEnvelope::from_container_bytes(&data)?
    } else {
        CipherEnvelope::raw(BitString::from_byte_slice(&data))
    };
    let test: Box<dyn MessageTest> = match &a.known {
        Some(path) => Box::new(KnownPlaintext(BitString::from_byte_slice(&read(path)?))),
        None => Box::new(PrintableAscii::default()),
    };
    if a.workers == Some(0) {
        return Err(Failure::Data("--workers must be at least 1".into()));
    }
    let cfg = AttackConfig {
        max_keys: a.max_keys,
        workers: a.workers,
        execution: Execution::Parallel,
    };
    let res = brute_force(&env, a.base, a.kappa, test.as_ref(), &cfg)?;
    if a.csv {
        writeln!(out, "key,message_bits,message_hex")?;
        for (k, m) in &res.matches {
            writeln!(out, "{},{},{}", k, m.len(), hex(m.as_bytes()))?;
        }
    } else {
        writeln!(out, "keys tested  {}", res.keys_tested)?;
        writeln!(out, "matches      {}", res.matches.len())?;
        writeln!(out, "elapsed      {:.3} s", res.elapsed.as_secs_f64())?;
        for (k, m) in &res.matches {
            writeln!(out, "{k}  {}", hex(m.as_bytes()))?;
        }
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let data = read(&a.input)?;
    let mut bits = if looks_like_container(&data) {
        CipherEnvelope::from_container_bytes(&data)?.cipher
    } else {
        BitString::from_byte_slice(&data)
    };
    if let Some(n) = a.bits {
        if n > bits.len() {
            return Err(Error::Length {
                requested: n as u64,
                available: bits.len() as u64,
            }
            .into());
        }
        bits.truncate(n);
    }
    let balance = bit_balance(&bits);
    let mono = monobit_test(&bits)?;
    let runs = runs_test(&bits)?;
    writeln!(out, "bits       {}", bits.len())?;
    writeln!(out, "ones       {}", balance.ones)?;
    writeln!(out, "zeros      {}", balance.zeros)?;
    writeln!(out, "monobit p  {mono:.4}")?;
    writeln!(out, "runs p     {runs:.4}")?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
