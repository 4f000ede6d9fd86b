//! The `qumark` command line: `keygen → embed → observe → verify`, plus
//! `attack` and `analyze`.
//!
//! Exit codes: 0 accept (or success), 1 reject, 2 usage or format error.
//! Seeds fall back to the `QUMARK_SEED` environment variable, then to
//! system entropy.

pub mod formats;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::attacks::{averaging_attack, noise_attack, run_attack_report, shift_attack};
use crate::carrier::{ingest_pgm, ingest_raw, CarrierFormat, CarrierPayload};
use crate::keys::{generate_secret, DerivationParams, SecretKey};
use crate::qstate::{expected_error_probability, Basis, RandomSource};
use crate::stats::{recommended_sample_size, DecisionRule};
use crate::watermark::{
    build_message, embed_with, observe, verify, EmbedPolicy, ObservedMessage, VerificationReport,
};
use formats::{FormatError, ObservationFile, QuantumMessageFile, SecretFile};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "QUMARK_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error(transparent)]
    Lib(#[from] crate::Error),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qumark", version, about = "Fuzzy quantum watermarking simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key and derive the watermark positions from it.
    Keygen(KeygenArgs),
    /// Write a payload as qubits and embed the watermark.
    Embed(EmbedArgs),
    /// Measure a quantum message in its writing basis.
    Observe(ObserveArgs),
    /// Decide whether a suspect observation carries the watermark.
    Verify(VerifyArgs),
    /// Run an attack on an observation and report verification before and after.
    Attack(AttackArgs),
    /// Tabulate the watermark size needed to separate a flip rate from a null rate.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayloadFormat {
    Raw,
    Pgm,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    /// Message length in bits (taken from --mask-from when omitted).
    #[arg(long)]
    pub message_len: Option<usize>,
    /// Number of watermark positions.
    #[arg(long)]
    pub count: usize,
    /// PGM image whose LSB plane restricts the eligible positions.
    #[arg(long)]
    pub mask_from: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Mark basis k, in degrees.
    #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
    pub mark_basis: f64,
    /// Writing basis j the secret will be used with, in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub writing_basis: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Payload file, or `-` for stdin.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = PayloadFormat::Raw)]
    pub format: PayloadFormat,
    #[arg(long)]
    pub secret: PathBuf,
    /// Quantum message output.
    #[arg(long)]
    pub out: PathBuf,
    /// Reference observation output (defaults to `<out>.reference.json`).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub writing_basis: f64,
    /// Refuse secrets too small for a 99%/99% exact test.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ObserveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suspect: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub secret: PathBuf,
    /// fixed:EPS, wilson:CONF or binom:CONF
    #[arg(long, default_value = "wilson:0.99")]
    pub rule: DecisionRule,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(subcommand)]
    pub kind: AttackKind,
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
    #[arg(long, global = true)]
    pub secret: Option<PathBuf>,
    #[arg(long, global = true, default_value = "wilson:0.99")]
    pub rule: DecisionRule,
    /// Attacked observation output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AttackKind {
    /// Majority vote over several released copies.
    Averaging {
        #[arg(long, num_args = 2.., required = true)]
        copies: Vec<PathBuf>,
    },
    /// Flip every bit independently with probability RATE.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
    },
    /// Shift bits up by OFFSET positions, padding with PAD.
    Shift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        offset: usize,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        pad: u8,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Expected flip rate(s) of a genuine watermark.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    pub pe: Vec<f64>,
    /// Disagreement rate(s) of an unwatermarked copy.
    #[arg(long = "null", num_args = 1.., value_delimiter = ',', default_value = "0")]
    pub null_rate: Vec<f64>,
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "0.99")]
    pub confidence: Vec<f64>,
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "0.99")]
    pub power: Vec<f64>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_ACCEPT };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Keygen(a) => keygen(a, stdout),
        Command::Embed(a) => embed_cmd(a, stdout),
        Command::Observe(a) => observe_cmd(a, stdout),
        Command::Verify(a) => verify_cmd(a, stdout),
        Command::Attack(a) => attack_cmd(a, stdout),
        Command::Analyze(a) => analyze_cmd(a, stdout),
    }
}

fn rng_for(seed: Option<u64>) -> RandomSource {
    match seed {
        Some(s) => RandomSource::seeded(s),
        None => RandomSource::from_entropy(),
    }
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| io_err(path, e))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| io_err(path, e))
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_bytes(path)?).map_err(|_| CliError::Format {
        path: path.display().to_string(),
        source: FormatError::Invalid("not UTF-8".into()),
    })
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format {
        path: path.display().to_string(),
        source,
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text).map_err(|e| io_err(p, e)),
        _ => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn load_secret(path: &Path) -> CliResult<(SecretFile, crate::watermark::WatermarkSecret)> {
    let file = SecretFile::decode(&read_text(path)?).map_err(format_err(path))?;
    let secret = file.to_secret().map_err(format_err(path))?;
    Ok((file, secret))
}

fn load_observation(path: &Path) -> CliResult<ObservedMessage> {
    ObservationFile::decode(&read_text(path)?)
        .and_then(|f| f.to_observation())
        .map_err(format_err(path))
}

fn load_payload(path: &Path, format: PayloadFormat) -> CliResult<CarrierPayload> {
    let bytes = read_bytes(path)?;
    let payload = match format {
        PayloadFormat::Raw => ingest_raw(&bytes)?,
        PayloadFormat::Pgm => ingest_pgm(&bytes)?.0,
    };
    Ok(payload)
}

/// `<out>.reference.json`
pub fn default_reference_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".reference.json");
    PathBuf::from(s)
}

fn keygen(a: KeygenArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let mask = match &a.mask_from {
        Some(path) => Some(ingest_pgm(&read_bytes(path)?)?.0.eligibility_mask),
        None => None,
    };
    let message_len = match (a.message_len, &mask) {
        (Some(n), Some(m)) if n != m.len() => {
            return Err(CliError::Usage(format!(
                "--message-len {n} does not match the {}-bit mask",
                m.len()
            )))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m.len(),
        (None, None) => {
            return Err(CliError::Usage(
                "--message-len is required without --mask-from".into(),
            ))
        }
    };
    let writing = Basis::new(a.writing_basis)?;
    let mark = Basis::new(a.mark_basis)?;
    if !mark.is_dissimilar(&writing) {
        return Err(crate::Error::BasisNotDissimilar {
            mark: mark.theta(),
            writing: writing.theta(),
        }
        .into());
    }
    let key = SecretKey::generate(&mut rng_for(a.seed));
    let params = DerivationParams::new(message_len, a.count, mask)?;
    let secret = generate_secret(&key, &params, mark)?;
    let pe = expected_error_probability(mark, writing);
    let text = SecretFile::new(&secret, message_len, pe).encode();
    write_output(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_ACCEPT)
}

fn embed_cmd(a: EmbedArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let payload = load_payload(&a.input, a.format)?;
    let (file, secret) = load_secret(&a.secret)?;
    if file.message_len != payload.bits.len() {
        return Err(CliError::Usage(format!(
            "secret was generated for {} bits but the payload has {}",
            file.message_len,
            payload.bits.len()
        )));
    }
    let writing = Basis::new(a.writing_basis)?;
    let pe = secret.expected_pe(writing);
    if (pe - file.expected_pe).abs() > 1e-9 {
        return Err(CliError::Usage(format!(
            "secret records p_e = {} but embedding in basis {} gives {pe}",
            file.expected_pe, writing
        )));
    }
    if payload.format == CarrierFormat::PgmLsb {
        if let Some(&i) = secret.indices().iter().find(|&&i| !payload.eligibility_mask[i]) {
            return Err(CliError::Usage(format!(
                "secret position {i} is not a pixel LSB; generate it with --mask-from"
            )));
        }
    }

    let message = build_message(&payload.bits, writing)?;
    let policy = EmbedPolicy { strict: a.strict };
    let marked = embed_with(&message, &secret, &mut rng_for(a.seed), policy)?;
    let reference = ObservedMessage::new(payload.bits, writing);

    let reference_path = a
        .reference
        .clone()
        .unwrap_or_else(|| default_reference_path(&a.out));
    write_output(Some(&a.out), &QuantumMessageFile::new(&marked).encode(), stdout)?;
    write_output(
        Some(&reference_path),
        &ObservationFile::new(&reference).encode(),
        stdout,
    )?;
    Ok(EXIT_ACCEPT)
}

fn observe_cmd(a: ObserveArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let message = QuantumMessageFile::decode(&read_text(&a.input)?)
        .and_then(|f| f.to_message())
        .map_err(format_err(&a.input))?;
    let obs = observe(&message, message.writing_basis(), &mut rng_for(a.seed));
    write_output(a.out.as_deref(), &ObservationFile::new(&obs).encode(), stdout)?;
    Ok(EXIT_ACCEPT)
}

/// Human-readable verification report, one `key: value` per line.
pub fn render_report(report: &VerificationReport, rule: DecisionRule) -> String {
    let d = &report.decision_detail;
    let mut s = String::new();
    let _ = writeln!(s, "error_count: {}", report.error_count);
    let _ = writeln!(s, "sample_size: {}", report.sample_size);
    let _ = writeln!(s, "observed_frequency: {}", report.observed_frequency);
    let _ = writeln!(s, "expected_pe: {}", report.expected_pe);
    let _ = writeln!(s, "rule: {rule}");
    let _ = writeln!(s, "bounds: [{}, {}]", d.bound_low, d.bound_high);
    if let Some(p) = d.p_value {
        let _ = writeln!(s, "p_value: {p}");
    }
    let _ = writeln!(s, "decision: {}", report.decision);
    s
}

fn verify_cmd(a: VerifyArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let suspect = load_observation(&a.suspect)?;
    let reference = load_observation(&a.reference)?;
    let (_, secret) = load_secret(&a.secret)?;
    let report = verify(&suspect, &reference, &secret, a.rule)?;
    write_output(None, &render_report(&report, a.rule), stdout)?;
    Ok(if report.decision.is_accept() {
        EXIT_ACCEPT
    } else {
        EXIT_REJECT
    })
}

fn attack_cmd(a: AttackArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let reference_path = a
        .reference
        .as_deref()
        .ok_or_else(|| CliError::Usage("--reference is required".into()))?;
    let secret_path = a
        .secret
        .as_deref()
        .ok_or_else(|| CliError::Usage("--secret is required".into()))?;
    let reference = load_observation(reference_path)?;
    let (_, secret) = load_secret(secret_path)?;

    let mut extra = String::new();
    let outcome = match &a.kind {
        AttackKind::Averaging { copies } => {
            let copies = copies
                .iter()
                .map(|p| load_observation(p))
                .collect::<CliResult<Vec<_>>>()?;
            let result = averaging_attack(&copies)?;
            let found = secret
                .indices()
                .iter()
                .filter(|i| result.suspected_indices.binary_search(i).is_ok())
                .count();
            let _ = writeln!(extra, "copies: {}", copies.len());
            let _ = writeln!(extra, "suspected_positions: {}", result.suspected_indices.len());
            let _ = writeln!(
                extra,
                "identified_marks: {found} of {} ({})",
                secret.len(),
                found as f64 / secret.len() as f64
            );
            let recovered = result.recovered;
            run_attack_report(&reference, &copies[0], |_| Ok(recovered), &secret, a.rule)?
        }
        AttackKind::Noise { input, rate, seed } => {
            let suspect = load_observation(input)?;
            let mut rng = rng_for(*seed);
            run_attack_report(&reference, &suspect, |m| noise_attack(m, *rate, &mut rng), &secret, a.rule)?
        }
        AttackKind::Shift { input, offset, pad } => {
            let suspect = load_observation(input)?;
            run_attack_report(&reference, &suspect, |m| shift_attack(m, *offset, *pad == 1), &secret, a.rule)?
        }
    };

    if let Some(out) = &a.out {
        write_output(Some(out), &ObservationFile::new(&outcome.attacked).encode(), stdout)?;
    }
    let mut text = extra;
    text.push_str("[before]\n");
    text.push_str(&render_report(&outcome.verification_before, a.rule));
    text.push_str("[after]\n");
    text.push_str(&render_report(&outcome.verification_after, a.rule));
    write_output(None, &text, stdout)?;
    Ok(EXIT_ACCEPT)
}

fn analyze_cmd(a: AnalyzeArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let mut text = String::from("pe\tnull\tconfidence\tpower\trecommended_n\n");
    for &pe in &a.pe {
        for &null in &a.null_rate {
            for &confidence in &a.confidence {
                for &power in &a.power {
                    let n = recommended_sample_size(pe, null, confidence, power)?;
                    let _ = writeln!(text, "{pe}\t{null}\t{confidence}\t{power}\t{n}");
                }
            }
        }
    }
    write_output(None, &text, stdout)?;
    Ok(EXIT_ACCEPT)
}
