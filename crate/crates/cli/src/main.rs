//! `avoider`: construct large avoider sets, verify their largeness,
//! search for escape witnesses, and probe fractional-part orbits.
//!
//! Rationals are written `p/q`; named irrational approximants are
//! written `name@precision` (e.g. `golden@1e-12`, `sqrt2@1e-12`) and
//! expand to continued-fraction convergents at the stated precision.
//! Every command prints a JSON report carrying the hash of its full
//! configuration; CSV artifacts repeat that hash in a comment line.
//! Exit codes: 0 pass, 1 verification failure, 2 usage error,
//! 3 precision shortfall.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use avoider_core as core;
use avoider_core::{
    format_rat, ApproxRat, AvoiderSet, CongruenceCase, GridSpec, IntervalSet, PeriodicSet, Rat,
    SequenceSpec, Window,
};

// ---------------------------------------------------------------------
// Argument / config types (clap and serde share the structs so that a
// config file is exactly the flag set; round-trips are lossless)
// ---------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "avoider",
    about = "Exact avoider-set construction and verification toolkit",
    version
)]
struct Cli {
    /// JSON config file holding {"command": "...", ...flags...},
    /// usable instead of a subcommand
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Serialize, Deserialize, Clone)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Build an avoider set and optionally emit its interval picture
    Construct(ConstructConfig),
    /// Certify the minimum unit-window measure against the target
    VerifyLarge(VerifyLargeConfig),
    /// Search one (x, t) cell for an escape witness
    Witness(WitnessConfig),
    /// Witness search over a dilation/translation grid
    Scan(ScanConfig),
    /// Fractional-part orbit statistics for one dilation
    Orbit(OrbitConfig),
    /// Grid probe for orbits leaving a gap of at least delta
    Probe(ProbeConfig),
    /// Box-counting slope over the hits of a probe
    DimEst(DimEstConfig),
    /// Exact congruence-strip overlap vs the asymptotic prediction
    Lemma41(Lemma41Config),
    /// Union lower bound check for congruence-strip events
    ChungErdos(ChungErdosConfig),
    /// Best-window density of the integer parts of a sequence
    Density(DensityConfig),
    /// Preperiod and period of b^n modulo an integer
    Period(PeriodConfig),
    /// Run any command from a JSON config file
    #[serde(skip)]
    Run(RunConfig),
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct RunConfig {
    /// JSON file holding {"command": "...", ...flags...}
    #[arg(long)]
    config: PathBuf,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, PartialEq)]
enum KindArg {
    #[value(name = "lemma2")]
    #[serde(rename = "lemma2")]
    Lemma2,
    #[value(name = "power_strip", alias = "power-strip")]
    #[serde(rename = "power_strip")]
    PowerStrip,
    #[value(name = "integer_power", alias = "integer-power")]
    #[serde(rename = "integer_power")]
    IntegerPower,
    #[value(name = "enumeration")]
    #[serde(rename = "enumeration")]
    Enumeration,
}

/// Parameters selecting and building one avoider set.
#[derive(Args, Serialize, Deserialize, Clone)]
struct AvoiderArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// largeness parameter epsilon as an exact rational
    #[arg(long = "epsilon", alias = "eps")]
    epsilon: String,
    /// lemma2: dilation y > 1 ("p/q" or name@precision)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    y: Option<String>,
    /// power_strip / integer_power: base b > 1
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b: Option<String>,
    /// enumeration: base sequence spec as JSON
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    avoider_sequence: Option<String>,
    /// enumeration: comma-separated nonzero dilations
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    dilations: Option<String>,
    /// enumeration: pairing depth to materialize
    #[arg(long = "avoider-depth")]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    avoider_depth: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct ConstructConfig {
    #[command(flatten)]
    #[serde(flatten)]
    avoider: AvoiderArgs,
    /// write the interval picture of the set on --window to this file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    emit: Option<PathBuf>,
    /// window "lo:hi" for --emit
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    window: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct VerifyLargeConfig {
    #[command(flatten)]
    #[serde(flatten)]
    avoider: AvoiderArgs,
    /// window "lo:hi" to sweep
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    /// override the recorded largeness target
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    target: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct WitnessConfig {
    #[command(flatten)]
    #[serde(flatten)]
    avoider: AvoiderArgs,
    /// sequence spec as JSON
    #[arg(long)]
    sequence: String,
    /// dilation x ("p/q" or name@precision)
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// translation t
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    #[serde(default = "zero_string")]
    t: String,
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_depth")]
    depth: u64,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct ScanConfig {
    #[command(flatten)]
    #[serde(flatten)]
    avoider: AvoiderArgs,
    /// sequence spec as JSON
    #[arg(long)]
    sequence: String,
    /// dilation grid "start:step:count"
    #[arg(long, allow_hyphen_values = true)]
    x_grid: String,
    /// translation grid "start:step:count"
    #[arg(long, allow_hyphen_values = true)]
    t_grid: String,
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_depth")]
    depth: u64,
    /// write the (x, t, witness_index) matrix to this CSV file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct OrbitConfig {
    #[arg(long)]
    sequence: String,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_n")]
    n: u64,
    #[arg(long, default_value_t = 16)]
    #[serde(default = "default_bins")]
    bins: u64,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct ProbeConfig {
    #[arg(long)]
    sequence: String,
    /// gap threshold delta
    #[arg(long)]
    delta: String,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_n")]
    n: u64,
    /// dilation grid "start:step:count"
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// write (x, max_gap, star_discrepancy) rows to this CSV file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct DimEstConfig {
    #[command(flatten)]
    #[serde(flatten)]
    probe: ProbeConfig,
    /// comma-separated descending box sizes, multiples of the grid step
    #[arg(long)]
    scales: String,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct Lemma41Config {
    /// first strip period ("p/q" or name@precision)
    #[arg(long)]
    alpha: String,
    /// second strip period
    #[arg(long)]
    beta: String,
    /// strip width epsilon
    #[arg(long = "eps", alias = "epsilon")]
    eps: String,
    /// window "lo:hi"
    #[arg(long, allow_hyphen_values = true)]
    window: String,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct ChungErdosConfig {
    /// comma-separated strip periods mu_i ("p/q" or name@precision)
    #[arg(long, conflicts_with = "events")]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mus: Option<String>,
    /// strip width epsilon for --mus
    #[arg(long = "eps", alias = "epsilon")]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    eps: Option<String>,
    /// JSON file: a list of {"period": "p/q", "pattern": quadruples}
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    events: Option<PathBuf>,
    /// window "lo:hi"
    #[arg(long, allow_hyphen_values = true)]
    window: String,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct DensityConfig {
    #[arg(long)]
    sequence: String,
    /// window length
    #[arg(long)]
    n: u64,
    /// offset range "lo:hi" (integers)
    #[arg(long, allow_hyphen_values = true)]
    h_range: String,
    #[arg(long, default_value_t = 64)]
    #[serde(default = "default_max_terms")]
    max_terms: u64,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct PeriodConfig {
    #[arg(long)]
    b: u64,
    #[arg(long)]
    modulus: u64,
}

fn zero_string() -> String {
    "0".into()
}

fn default_depth() -> u64 {
    10_000
}

fn default_n() -> u64 {
    1000
}

fn default_bins() -> u64 {
    16
}

fn default_max_terms() -> u64 {
    64
}

// ---------------------------------------------------------------------
// Outcome plumbing
// ---------------------------------------------------------------------

enum Failure {
    /// verification ran and did not pass
    Verification,
    /// bad arguments, schema violations, io problems
    Usage(String),
    /// results not certifiable at the supplied precision
    Precision(String),
}

type CmdResult = Result<(), Failure>;

impl From<core::Error> for Failure {
    fn from(e: core::Error) -> Failure {
        match e {
            core::Error::PrecisionShortfall(_) | core::Error::SieveExhausted { .. } => {
                Failure::Precision(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return report_failure(Failure::Usage(
                "give either --config or a subcommand, not both".into(),
            ))
        }
        (None, None) => {
            return report_failure(Failure::Usage(
                "give a subcommand or --config FILE (see --help)".into(),
            ))
        }
        (Some(path), None) => match load_config(&path) {
            Ok(c) => c,
            Err(f) => return report_failure(f),
        },
        (None, Some(Command::Run(run))) => match load_config(&run.config) {
            Ok(c) => c,
            Err(f) => return report_failure(f),
        },
        (None, Some(other)) => other,
    };
    match dispatch(&command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    match f {
        Failure::Verification => ExitCode::from(1),
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Failure::Precision(msg) => {
            eprintln!("precision shortfall: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(path: &Path) -> Result<Command, Failure> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Failure::Usage(format!("config {}: {} (at {})", path.display(), e, e.path())))
}

fn dispatch(command: &Command) -> CmdResult {
    let hash = config_hash(command)?;
    match command {
        Command::Construct(c) => cmd_construct(c, &hash),
        Command::VerifyLarge(c) => cmd_verify_large(c, &hash),
        Command::Witness(c) => cmd_witness(c, &hash),
        Command::Scan(c) => cmd_scan(c, &hash),
        Command::Orbit(c) => cmd_orbit(c, &hash),
        Command::Probe(c) => cmd_probe(c, &hash),
        Command::DimEst(c) => cmd_dim_est(c, &hash),
        Command::Lemma41(c) => cmd_lemma41(c, &hash),
        Command::ChungErdos(c) => cmd_chung_erdos(c, &hash),
        Command::Density(c) => cmd_density(c, &hash),
        Command::Period(c) => cmd_period(c, &hash),
        Command::Run(_) => unreachable!("run is resolved in main"),
    }
}

// ---------------------------------------------------------------------
// Shared parsing and output helpers
// ---------------------------------------------------------------------

fn config_hash(command: &Command) -> Result<String, Failure> {
    let canonical = serde_json::to_string(command)
        .map_err(|e| Failure::Usage(format!("config serialization: {e}")))?;
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

fn parse_exact(label: &str, s: &str) -> Result<Rat, Failure> {
    core::parse_rat(s).map_err(|e| Failure::Usage(format!("--{label}: {e}")))
}

fn parse_approx(label: &str, s: &str) -> Result<ApproxRat, Failure> {
    core::parse_value(s).map_err(|e| Failure::Usage(format!("--{label}: {e}")))
}

fn parse_window(s: &str) -> Result<Window, Failure> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("window {s:?} must be \"lo:hi\"")))?;
    let w = Window::new(parse_exact("window", lo)?, parse_exact("window", hi)?)?;
    Ok(w)
}

fn parse_grid(label: &str, s: &str) -> Result<GridSpec, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "--{label}: {s:?} must be \"start:step:count\""
        )));
    }
    let count: u64 = parts[2]
        .parse()
        .map_err(|_| Failure::Usage(format!("--{label}: bad count {:?}", parts[2])))?;
    Ok(GridSpec::new(
        parse_exact(label, parts[0])?,
        parse_exact(label, parts[1])?,
        count,
    )?)
}

fn parse_rat_list(label: &str, s: &str) -> Result<Vec<Rat>, Failure> {
    s.split(',')
        .map(|item| parse_exact(label, item.trim()))
        .collect()
}

fn parse_sequence(label: &str, s: &str) -> Result<SequenceSpec, Failure> {
    let de = &mut serde_json::Deserializer::from_str(s);
    let spec: SequenceSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Failure::Usage(format!("--{label}: {} (at {})", e, e.path())))?;
    spec.validate()?;
    Ok(spec)
}

fn build_avoider(args: &AvoiderArgs) -> Result<(AvoiderSet, Vec<ApproxInput>), Failure> {
    let epsilon = parse_exact("epsilon", &args.epsilon)?;
    let mut approx = Vec::new();
    let require = |field: &Option<String>, name: &str| -> Result<String, Failure> {
        field
            .clone()
            .ok_or_else(|| Failure::Usage(format!("--{name} is required for this kind")))
    };
    let set = match args.kind {
        KindArg::Lemma2 => {
            let y = parse_approx("y", &require(&args.y, "y")?)?;
            push_approx(&mut approx, "y", &y);
            AvoiderSet::lemma2(epsilon, y.value, y.provenance)?
        }
        KindArg::PowerStrip => {
            let b = parse_exact("b", &require(&args.b, "b")?)?;
            AvoiderSet::power_strip(b, epsilon)?
        }
        KindArg::IntegerPower => {
            let b_rat = parse_exact("b", &require(&args.b, "b")?)?;
            if !b_rat.is_integer() {
                return Err(Failure::Usage("integer_power needs an integer base".into()));
            }
            let b = b_rat
                .to_integer()
                .try_into()
                .map_err(|_| Failure::Usage("base out of range".into()))?;
            AvoiderSet::integer_power(b, epsilon)?
        }
        KindArg::Enumeration => {
            let seq = parse_sequence(
                "avoider-sequence",
                &require(&args.avoider_sequence, "avoider-sequence")?,
            )?;
            let dil = parse_rat_list("dilations", &require(&args.dilations, "dilations")?)?;
            let depth = args.avoider_depth.ok_or_else(|| {
                Failure::Usage("--avoider-depth is required for enumeration".into())
            })?;
            AvoiderSet::enumeration(seq, &dil, epsilon, depth)?
        }
    };
    Ok((set, approx))
}

/// Provenance record for a named-approximant input.
#[derive(Serialize)]
struct ApproxInput {
    field: String,
    provenance: String,
    value: String,
    error_bound: String,
}

fn push_approx(list: &mut Vec<ApproxInput>, field: &str, v: &ApproxRat) {
    if let Some(p) = &v.provenance {
        list.push(ApproxInput {
            field: field.to_string(),
            provenance: p.clone(),
            value: format_rat(&v.value),
            error_bound: format_rat(&v.error),
        });
    }
}

/// Merge a serializable report with the command name and config hash
/// and print it. Keys come out sorted, so output is deterministic.
fn print_report<T: Serialize>(command: &str, hash: &str, report: &T) -> CmdResult {
    let mut value = serde_json::to_value(report)
        .map_err(|e| Failure::Usage(format!("report serialization: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Failure::Usage("report is not an object".into()))?;
    obj.insert("command".into(), command.into());
    obj.insert("config_hash".into(), hash.into());
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| Failure::Usage(format!("report serialization: {e}")))?;
    println!("{text}");
    Ok(())
}

/// Write an artifact atomically: temp file in the same directory, then
/// rename over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_with_hash(hash: &str, body: &str) -> String {
    format!("# config_hash={hash}\n{body}")
}

// ---------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------

fn cmd_construct(c: &ConstructConfig, hash: &str) -> CmdResult {
    let (avoider, approx) = build_avoider(&c.avoider)?;
    let mut emitted: Option<String> = None;
    if let Some(path) = &c.emit {
        let window = c.window.as_ref().ok_or_else(|| {
            Failure::Usage("--emit needs --window lo:hi to materialize".into())
        })?;
        let w = parse_window(window)?;
        let set = avoider.materialize(&w)?;
        let json = serde_json::to_string_pretty(&set)
            .map_err(|e| Failure::Usage(format!("interval serialization: {e}")))?;
        write_atomic(path, json.as_bytes())?;
        emitted = Some(path.display().to_string());
    }

    #[derive(Serialize)]
    struct ConstructReport {
        descriptor: core::AvoiderDescriptor,
        approximate_inputs: Vec<ApproxInput>,
        #[serde(skip_serializing_if = "Option::is_none")]
        emitted: Option<String>,
    }
    print_report(
        "construct",
        hash,
        &ConstructReport {
            descriptor: avoider.descriptor(),
            approximate_inputs: approx,
            emitted,
        },
    )
}

fn cmd_verify_large(c: &VerifyLargeConfig, hash: &str) -> CmdResult {
    let (avoider, approx) = build_avoider(&c.avoider)?;
    let w = parse_window(&c.window)?;
    let mut report = core::verify_largeness(&avoider, &w)?;
    if let Some(t) = &c.target {
        let target = parse_exact("target", t)?;
        report.pass = report.min_measure >= target;
        report.target = target;
    }

    #[derive(Serialize)]
    struct VerifyReport {
        #[serde(flatten)]
        inner: core::LargenessReport,
        approximate_inputs: Vec<ApproxInput>,
    }
    let pass = report.pass;
    print_report(
        "verify-large",
        hash,
        &VerifyReport {
            inner: report,
            approximate_inputs: approx,
        },
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_witness(c: &WitnessConfig, hash: &str) -> CmdResult {
    let (avoider, mut approx) = build_avoider(&c.avoider)?;
    let seq = parse_sequence("sequence", &c.sequence)?;
    let x = parse_approx("x", &c.x)?;
    let t = parse_approx("t", &c.t)?;
    push_approx(&mut approx, "x", &x);
    push_approx(&mut approx, "t", &t);
    if x.value.is_zero() {
        return Err(Failure::Usage("dilation x must be nonzero".into()));
    }
    let witness = core::find_escape_witness(&avoider, &seq, &x.value, &t.value, c.depth)?;

    // certification against input approximation: the witness margin
    // must beat the propagated error err_x·|a_n| + err_t
    let mut certified = true;
    let mut propagated = Rat::zero();
    if let Some(n) = witness.witness_index {
        if !x.error.is_zero() || !t.error.is_zero() {
            let a_n = seq.term(n)?.value.abs();
            propagated = &x.error * a_n + &t.error;
            certified = witness
                .margin
                .as_ref()
                .is_some_and(|m| m > &propagated);
        }
    }

    #[derive(Serialize)]
    struct WitnessReport {
        #[serde(flatten)]
        inner: core::EscapeWitness,
        certified: bool,
        propagated_error_bound: String,
        approximate_inputs: Vec<ApproxInput>,
    }
    print_report(
        "witness",
        hash,
        &WitnessReport {
            inner: witness,
            certified,
            propagated_error_bound: format_rat(&propagated),
            approximate_inputs: approx,
        },
    )?;
    if certified {
        Ok(())
    } else {
        Err(Failure::Precision(format!(
            "witness margin does not exceed the propagated input error {}",
            format_rat(&propagated)
        )))
    }
}

fn cmd_scan(c: &ScanConfig, hash: &str) -> CmdResult {
    let (avoider, _) = build_avoider(&c.avoider)?;
    let seq = parse_sequence("sequence", &c.sequence)?;
    let xs = parse_grid("x-grid", &c.x_grid)?.points();
    let ts = parse_grid("t-grid", &c.t_grid)?.points();
    if xs.iter().any(|x| x.is_zero()) {
        return Err(Failure::Usage(
            "dilation grid must not contain zero; shift the start".into(),
        ));
    }
    let report = core::grid_escape_scan(&avoider, &seq, &xs, &ts, c.depth)?;
    if let Some(path) = &c.csv {
        let body = core::scan_csv(&report);
        write_atomic(path, csv_with_hash(hash, &body).as_bytes())?;
    }

    #[derive(Serialize)]
    struct ScanSummary {
        cells: usize,
        max_witness_index: Option<u64>,
        inconclusive: u64,
        certified_no_witness: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    }
    let certified = report
        .cells
        .iter()
        .filter(|c| {
            c.upgrade
                .as_ref()
                .is_some_and(|u| u.verdict == core::AllDepthVerdict::NoWitnessAtAnyDepth)
        })
        .count();
    print_report(
        "scan",
        hash,
        &ScanSummary {
            cells: report.cells.len(),
            max_witness_index: report.max_witness_index,
            inconclusive: report.inconclusive,
            certified_no_witness: certified,
            csv: c.csv.as_ref().map(|p| p.display().to_string()),
        },
    )
}

fn cmd_orbit(c: &OrbitConfig, hash: &str) -> CmdResult {
    let seq = parse_sequence("sequence", &c.sequence)?;
    let x = parse_approx("x", &c.x)?;
    let stats = core::orbit_stats(&seq, &x.value, c.n, c.bins)?;
    print_report("orbit", hash, &stats)
}

fn cmd_probe(c: &ProbeConfig, hash: &str) -> CmdResult {
    let (probe, _) = run_probe(c)?;
    if let Some(path) = &c.csv {
        let body = core::probe_csv(&probe);
        write_atomic(path, csv_with_hash(hash, &body).as_bytes())?;
    }

    #[derive(Serialize)]
    struct ProbeSummary {
        delta: String,
        n_terms: u64,
        grid: GridSpec,
        hit_count: usize,
        hits: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    }
    print_report(
        "probe",
        hash,
        &ProbeSummary {
            delta: format_rat(&probe.delta),
            n_terms: probe.n_terms,
            grid: probe.grid.clone(),
            hit_count: probe.hits.len(),
            hits: probe.hits.iter().map(format_rat).collect(),
            csv: c.csv.as_ref().map(|p| p.display().to_string()),
        },
    )
}

fn run_probe(c: &ProbeConfig) -> Result<(core::ExceptionalProbe, SequenceSpec), Failure> {
    let seq = parse_sequence("sequence", &c.sequence)?;
    let delta = parse_exact("delta", &c.delta)?;
    let grid = parse_grid("grid", &c.grid)?;
    let probe = core::exceptional_probe(&seq, &delta, c.n, &grid)?;
    Ok((probe, seq))
}

fn cmd_dim_est(c: &DimEstConfig, hash: &str) -> CmdResult {
    let (probe, _) = run_probe(&c.probe)?;
    let scales = parse_rat_list("scales", &c.scales)?;
    let est = core::box_dimension_estimate(&probe, &scales)?;
    if let Some(path) = &c.probe.csv {
        let body = core::dimension_csv(&est);
        write_atomic(path, csv_with_hash(hash, &body).as_bytes())?;
    }

    #[derive(Serialize)]
    struct DimReport {
        #[serde(flatten)]
        inner: core::DimensionEstimate,
        hit_count: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    }
    print_report(
        "dim-est",
        hash,
        &DimReport {
            inner: est,
            hit_count: probe.hits.len(),
            csv: c.probe.csv.as_ref().map(|p| p.display().to_string()),
        },
    )
}

fn cmd_lemma41(c: &Lemma41Config, hash: &str) -> CmdResult {
    let alpha = parse_approx("alpha", &c.alpha)?;
    let beta = parse_approx("beta", &c.beta)?;
    let eps = parse_exact("eps", &c.eps)?;
    let w = parse_window(&c.window)?;
    let mut approx = Vec::new();
    push_approx(&mut approx, "alpha", &alpha);
    push_approx(&mut approx, "beta", &beta);
    let case = CongruenceCase::new(alpha.value, beta.value, eps, w)?;
    let report = core::lemma41_exact_measure(&case)?;

    #[derive(Serialize)]
    struct OverlapOut {
        #[serde(flatten)]
        inner: core::OverlapReport,
        approximate_inputs: Vec<ApproxInput>,
    }
    print_report(
        "lemma41",
        hash,
        &OverlapOut {
            inner: report,
            approximate_inputs: approx,
        },
    )
}

#[derive(Deserialize)]
struct EventFileEntry {
    period: String,
    pattern: IntervalSet,
}

fn cmd_chung_erdos(c: &ChungErdosConfig, hash: &str) -> CmdResult {
    let w = parse_window(&c.window)?;
    let mut approx = Vec::new();
    let events: Vec<PeriodicSet> = if let Some(path) = &c.events {
        let text = std::fs::read_to_string(path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let entries: Vec<EventFileEntry> = serde_path_to_error::deserialize(de)
            .map_err(|e| Failure::Usage(format!("events file: {} (at {})", e, e.path())))?;
        entries
            .into_iter()
            .map(|e| {
                let period = core::parse_rat(&e.period)?;
                PeriodicSet::new(period, e.pattern)
            })
            .collect::<core::Result<_>>()?
    } else {
        let mus = c
            .mus
            .as_ref()
            .ok_or_else(|| Failure::Usage("need --mus or --events".into()))?;
        let eps = parse_exact(
            "eps",
            c.eps
                .as_ref()
                .ok_or_else(|| Failure::Usage("--eps is required with --mus".into()))?,
        )?;
        let mut events = Vec::new();
        for (i, item) in mus.split(',').enumerate() {
            let mu = parse_approx("mus", item.trim())?;
            push_approx(&mut approx, &format!("mus[{i}]"), &mu);
            events.push(PeriodicSet::strip(mu.value, eps.clone())?);
        }
        events
    };
    let report = core::chung_erdos_check(&events, &w)?;

    #[derive(Serialize)]
    struct ChungErdosOut {
        #[serde(flatten)]
        inner: core::ChungErdosReport,
        approximate_inputs: Vec<ApproxInput>,
    }
    print_report(
        "chung-erdos",
        hash,
        &ChungErdosOut {
            inner: report,
            approximate_inputs: approx,
        },
    )
}

fn cmd_density(c: &DensityConfig, hash: &str) -> CmdResult {
    let seq = parse_sequence("sequence", &c.sequence)?;
    let (lo, hi) = c
        .h_range
        .split_once(':')
        .ok_or_else(|| Failure::Usage("--h-range must be \"lo:hi\"".into()))?;
    let lo: BigInt = lo
        .parse()
        .map_err(|_| Failure::Usage(format!("--h-range: bad integer {lo:?}")))?;
    let hi: BigInt = hi
        .parse()
        .map_err(|_| Failure::Usage(format!("--h-range: bad integer {hi:?}")))?;
    let estimate = core::banach_density_estimate(&seq, c.n, &lo, &hi, c.max_terms)?;
    print_report("density", hash, &estimate)
}

fn cmd_period(c: &PeriodConfig, hash: &str) -> CmdResult {
    let cert = core::eventual_period(&BigInt::from(c.b), &BigInt::from(c.modulus))?;
    print_report("period", hash, &cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_round_trip_losslessly() {
        let samples = [
            r#"{"command":"lemma41","alpha":"sqrt2@1e-12","beta":"1","eps":"1/10","window":"0:10000"}"#,
            r#"{"command":"verify-large","kind":"power_strip","epsilon":"1/4","b":"2","window":"0:50","target":"1/5"}"#,
            r#"{"command":"scan","kind":"enumeration","epsilon":"1/2","avoider_sequence":"{\"kind\":\"polynomial\",\"coeffs\":[\"0\",\"0\",\"1\"]}","dilations":"1,1/2","avoider_depth":3,"sequence":"{\"kind\":\"polynomial\",\"coeffs\":[\"0\",\"1\"]}","x_grid":"1/4:1/4:4","t_grid":"0:1/2:2","depth":50,"csv":"out.csv"}"#,
            r#"{"command":"period","b":2,"modulus":9}"#,
        ];
        for json in samples {
            let cmd: Command = serde_json::from_str(json).unwrap();
            let again = serde_json::to_string(&cmd).unwrap();
            let v1: serde_json::Value = serde_json::from_str(json).unwrap();
            let v2: serde_json::Value = serde_json::from_str(&again).unwrap();
            assert_eq!(v1, v2, "config {json} does not round-trip");
        }
    }
}
