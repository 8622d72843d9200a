//! Command-line front end: key handling, the single-signature attack, and
//! the Monte Carlo / closed-form experiment drivers.
//!
//! Exit codes: 0 success/accept, 1 reject or attack/analysis failure,
//! 2 malformed input or I/O trouble.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qcots::analysis::select_threshold;
use qcots::attack::{recover_key, AttackConfig};
use qcots::envelope::{
    seal_signature, seal_signing_key, seal_verification_key, open_signature, open_signing_key,
    open_verification_key, Envelope,
};
use qcots::experiment::{
    analyze_sets, bundled_requests, preset, records_csv, reports_csv, simulate, summary_csv,
    AnalyzeRequest, SimulationSpec,
};
use qcots::isd::IsdConfig;
use qcots::scheme::{keygen, sign, verify, ParameterSet, SigningKey};
use qcots::Error;

#[derive(Parser)]
#[command(
    name = "qcots",
    version,
    about = "Quasi-cyclic one-time signatures, a single-signature key-recovery \
             attack, and the closed-form cost model behind it"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct MessageArg {
    /// Message as a UTF-8 string.
    #[arg(long, conflicts_with = "message_file", required_unless_present = "message_file")]
    message: Option<String>,
    /// Read the message bytes from a file instead.
    #[arg(long)]
    message_file: Option<PathBuf>,
}

impl MessageArg {
    fn bytes(&self) -> Result<Vec<u8>, Error> {
        match (&self.message, &self.message_file) {
            (Some(s), None) => Ok(s.clone().into_bytes()),
            (None, Some(path)) => Ok(std::fs::read(path)?),
            _ => unreachable!("clap enforces exactly one message source"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a key pair; writes <out>.sk.json and <out>.vk.json.
    Keygen {
        /// Preset name (table1-row1..4, table2-row1..5) or a JSON file
        /// with fields p, w_e, w_y, w_c, h_seed.
        #[arg(long)]
        params: String,
        #[arg(long)]
        seed: u64,
        /// Output path prefix.
        #[arg(long)]
        out: String,
    },
    /// Sign a message under a signing-key file. One signature per key:
    /// releasing two signatures leaks the key twice over.
    Sign {
        /// Signing-key envelope from keygen.
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        message: MessageArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a signature; exits 0 on accept, 1 on reject.
    Verify {
        /// Verification-key envelope.
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        message: MessageArg,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Recover the signing key from one signature and the verification
    /// key; exits 0 iff the recovered key validates.
    Attack {
        #[arg(long)]
        vk: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        /// Planted signing key to cross-check the recovery against.
        #[arg(long)]
        sk: Option<PathBuf>,
        /// Count threshold, or "auto" to minimize expected cost.
        #[arg(long, default_value = "auto")]
        b: String,
        /// Lee-Brickell enumeration depth.
        #[arg(long, default_value_t = 2)]
        j: usize,
        /// Residual-weight cap handed to the solver.
        #[arg(long, default_value_t = 40)]
        w_bar: usize,
        #[arg(long, default_value_t = 100_000)]
        max_iterations: u64,
        #[arg(long)]
        seed: u64,
        /// Write the outcome record as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimator trials: per-trial residual weights plus the
    /// empirical histogram next to the closed-form prediction.
    Simulate {
        /// Preset name or parameter-set JSON file.
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Count threshold, "auto" picks the preset's value or minimizes
        /// expected cost. w_c + 1 is accepted as the vacuous threshold.
        #[arg(long, default_value = "auto")]
        b: String,
        #[arg(long, default_value_t = 2)]
        j: usize,
        #[arg(long, default_value_t = 40)]
        w_bar: usize,
        #[arg(long)]
        seed: u64,
        /// Per-trial records CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram CSV (delta, empirical, theoretical).
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// Worker threads; 0 uses every core. The records are identical
        /// either way.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Closed-form security reports as CSV; defaults to the nine bundled
    /// instances.
    Analyze {
        /// Preset name or a JSON array of rows {p, w_e, w_y, w_c, h_seed,
        /// b?}; omit for the bundled instances.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 2)]
        j: usize,
        #[arg(long, default_value_t = 40)]
        w_bar: usize,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Resolves --params to a parameter set, plus the preset's tabulated
/// threshold when one exists.
fn load_params(spec: &str) -> Result<(ParameterSet, Option<usize>), Error> {
    if let Some(pre) = preset(spec) {
        return Ok((pre.params, Some(pre.b)));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| {
        Error::Format(format!("--params {spec}: not a preset name and unreadable as a file: {e}"))
    })?;
    let params: ParameterSet =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{spec}: {e}")))?;
    params.validate()?;
    Ok((params, None))
}

fn resolve_b(
    spec: &str,
    params: &ParameterSet,
    preset_b: Option<usize>,
    j: usize,
    w_bar: usize,
) -> Result<usize, Error> {
    if spec == "auto" {
        if let Some(b) = preset_b {
            return Ok(b);
        }
        return Ok(select_threshold(params, j, w_bar).0);
    }
    spec.parse::<usize>()
        .map_err(|_| Error::Parameter(format!("--b takes an integer or \"auto\", got {spec:?}")))
}

/// Two envelopes must describe the same code for an operation across them
/// to mean anything.
fn check_same_params(a: &Envelope, b: &Envelope) -> Result<(), Error> {
    if a.params()? != b.params()? {
        return Err(Error::Format("input files carry different parameter sets".into()));
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct OutcomeRecord {
    success: bool,
    b: usize,
    j: usize,
    w_bar: usize,
    max_iterations: u64,
    seed: u64,
    estimate_weight: usize,
    residual_weight: Option<usize>,
    used_isd: bool,
    isd_iterations: u64,
    isd_singular_resamples: u64,
    isd_patterns_tested: u64,
    wall_clock_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_planted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered_key: Option<Envelope>,
}

fn cmd_keygen(params: &str, seed: u64, out: &str) -> Result<ExitCode, Error> {
    let (params, _) = load_params(params)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (sk, vk) = keygen(&params, &mut rng);
    let sk_path = PathBuf::from(format!("{out}.sk.json"));
    let vk_path = PathBuf::from(format!("{out}.vk.json"));
    seal_signing_key(&params, &sk).write(&sk_path)?;
    seal_verification_key(&params, &vk).write(&vk_path)?;
    println!("wrote {} and {}", sk_path.display(), vk_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sign(key: &PathBuf, message: &MessageArg, seed: u64, out: &PathBuf) -> Result<ExitCode, Error> {
    let (params, sk) = open_signing_key(&Envelope::read(key)?)?;
    let m = message.bytes()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sig = sign(&m, &sk, &params, &mut rng);
    seal_signature(&params, &sig).write(out)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(key: &PathBuf, message: &MessageArg, sig: &PathBuf) -> Result<ExitCode, Error> {
    let vk_env = Envelope::read(key)?;
    let sig_env = Envelope::read(sig)?;
    check_same_params(&vk_env, &sig_env)?;
    let (params, vk) = open_verification_key(&vk_env)?;
    let (_, sig) = open_signature(&sig_env)?;
    let m = message.bytes()?;
    if verify(&m, &vk, &sig, &params) {
        println!("accept");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("reject");
        Ok(ExitCode::FAILURE)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack(
    vk: &PathBuf,
    sig: &PathBuf,
    sk: &Option<PathBuf>,
    b: &str,
    j: usize,
    w_bar: usize,
    max_iterations: u64,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let vk_env = Envelope::read(vk)?;
    let sig_env = Envelope::read(sig)?;
    check_same_params(&vk_env, &sig_env)?;
    let (params, vk) = open_verification_key(&vk_env)?;
    let (_, sig) = open_signature(&sig_env)?;
    let b = resolve_b(b, &params, None, j, w_bar)?;

    let cfg = AttackConfig { b, w_bar, isd: IsdConfig { j, max_iterations, rng_seed: seed } };
    let start = Instant::now();
    let outcome = recover_key(&sig, &vk, &params, &cfg)?;
    let wall_clock_ms = start.elapsed().as_millis();

    let matches_planted = match sk {
        Some(path) => {
            let (sk_params, planted) = open_signing_key(&Envelope::read(path)?)?;
            if sk_params != params {
                return Err(Error::Format("planted key carries a different parameter set".into()));
            }
            Some(outcome.recovered_key.as_ref() == Some(&planted.e))
        }
        None => None,
    };

    let record = OutcomeRecord {
        success: outcome.success,
        b,
        j,
        w_bar,
        max_iterations,
        seed,
        estimate_weight: outcome.estimate.weight(),
        residual_weight: outcome.residual_weight,
        used_isd: outcome.used_isd,
        isd_iterations: outcome.isd_iterations,
        isd_singular_resamples: outcome.isd_singular_resamples,
        isd_patterns_tested: outcome.isd_patterns_tested,
        wall_clock_ms,
        matches_planted,
        recovered_key: outcome
            .recovered_key
            .map(|e| seal_signing_key(&params, &SigningKey { e })),
    };
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| Error::Format(format!("outcome serialization: {e}")))?;
    if let Some(path) = out {
        std::fs::write(path, json + "\n")?;
        println!("wrote {}", path.display());
    } else {
        println!("{json}");
    }

    if record.success {
        eprintln!(
            "recovered and validated the key in {} ISD iterations ({} ms)",
            record.isd_iterations, wall_clock_ms
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "attack failed: b = {b}, estimate weight {}, {} of {max_iterations} ISD iterations used",
            record.estimate_weight, record.isd_iterations
        );
        Ok(ExitCode::FAILURE)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    params: &str,
    trials: u64,
    b: &str,
    j: usize,
    w_bar: usize,
    seed: u64,
    out: &Option<PathBuf>,
    summary_out: &Option<PathBuf>,
    threads: usize,
) -> Result<ExitCode, Error> {
    let (params, preset_b) = load_params(params)?;
    let b = resolve_b(b, &params, preset_b, j, w_bar)?;
    let spec = SimulationSpec { params, trials, b, seed, threads };
    let (records, summary) = simulate(&spec)?;

    if let Some(path) = out {
        std::fs::write(path, records_csv(&records))?;
    }
    if let Some(path) = summary_out {
        std::fs::write(path, summary_csv(&summary))?;
    }
    let p_zero_emp = summary.histogram.first().map_or(0.0, |row| row.1);
    let p_zero_theo = summary.histogram.first().map_or(0.0, |row| row.2);
    println!(
        "trials={} b={} total_variation={:.6} p_zero_empirical={:.6} p_zero_theoretical={:.6}",
        trials, b, summary.total_variation, p_zero_emp, p_zero_theo
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(
    params: &Option<String>,
    j: usize,
    w_bar: usize,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let requests: Vec<AnalyzeRequest> = match params {
        None => bundled_requests(),
        Some(spec) => match preset(spec) {
            Some(pre) => vec![AnalyzeRequest::pinned(pre.params, pre.b)],
            None => {
                let text = std::fs::read_to_string(spec).map_err(|e| {
                    Error::Format(format!(
                        "--params {spec}: not a preset name and unreadable as a file: {e}"
                    ))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Format(format!("{spec}: {e}")))?
            }
        },
    };
    let rows = analyze_sets(&requests, j, w_bar);
    let failed = rows.iter().filter(|r| r.is_err()).count();
    let csv = reports_csv(&rows);
    match out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!("wrote {} ({} rows, {} failed)", path.display(), rows.len(), failed);
        }
        None => print!("{csv}"),
    }
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.cmd {
        Cmd::Keygen { params, seed, out } => cmd_keygen(params, *seed, out),
        Cmd::Sign { key, message, seed, out } => cmd_sign(key, message, *seed, out),
        Cmd::Verify { key, message, sig } => cmd_verify(key, message, sig),
        Cmd::Attack { vk, sig, sk, b, j, w_bar, max_iterations, seed, out } => {
            cmd_attack(vk, sig, sk, b, *j, *w_bar, *max_iterations, *seed, out)
        }
        Cmd::Simulate { params, trials, b, j, w_bar, seed, out, summary_out, threads } => {
            cmd_simulate(params, *trials, b, *j, *w_bar, *seed, out, summary_out, *threads)
        }
        Cmd::Analyze { params, j, w_bar, out } => cmd_analyze(params, *j, *w_bar, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
