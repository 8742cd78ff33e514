// `!(x > 0.0)` is deliberate: NaN must fail every range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellcert::report::{
    format_csv, format_scatter_csv, format_text, parse_report, scatter_from_records, DEFAULT_K_THRESHOLD,
};
use bellcert::synth::drift_demo_config;
use bellcert::{
    analyze_paths, battery, complexity, complexity_profile, gen_bell_run, write_run, AnalysisConfig, BinarySequence,
    CodeMap, DelaySpec, EncoderChoice, ScanGrid, SignMode, SynthConfig, TimeReference,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bellcert",
    version,
    about = "Randomness certification for Bell-test time-tag data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match, score and tabulate one or more runs.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic two-station run.
    Synth(SynthArgs),
    /// Lempel-Ziv complexity of a bit sequence.
    Complexity(SequenceArgs),
    /// Statistical battery on a bit sequence.
    Nist(NistArgs),
    /// Turn an analysis CSV into K versus S plot data.
    Scatter(ScatterArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Codes,
    Joint,
    Dt,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeRefArg {
    Alice,
    Bob,
    Midpoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Auto,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    DriftOn,
    DriftOff,
}

#[derive(Clone, Copy)]
enum DelayArg {
    Fixed(f64),
    Scan,
}

fn parse_delay(s: &str) -> Result<DelayArg, String> {
    if s == "scan" {
        return Ok(DelayArg::Scan);
    }
    s.parse::<f64>()
        .ok()
        .filter(|d| d.is_finite())
        .map(DelayArg::Fixed)
        .ok_or_else(|| format!("expected seconds or `scan`, got `{s}`"))
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    match (a.trim().parse(), b.trim().parse()) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => Err(format!("cannot parse `{s}`")),
    }
}

fn parse_f64_pair(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s)
}

fn parse_code_pair(s: &str) -> Result<(u8, u8), String> {
    let (a, b) = parse_pair::<u8>(s)?;
    if a > 3 || b > 3 {
        return Err(format!("codes must be 0..=3, got `{s}`"));
    }
    Ok((a, b))
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Run directories or `<dir>/<name>` prefixes.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Coincidence half-window, seconds.
    #[arg(long = "tw")]
    t_w: f64,
    /// Delay added to Bob's times in seconds, or `scan`.
    #[arg(long, default_value = "0", value_parser = parse_delay, allow_hyphen_values = true)]
    delay: DelayArg,
    /// Delay scan bounds `min,max`, seconds.
    #[arg(long, default_value = "-1e-6,1e-6", value_parser = parse_f64_pair, allow_hyphen_values = true)]
    scan_range: (f64, f64),
    /// Delay scan step, seconds.
    #[arg(long, default_value = "1e-9")]
    scan_step: f64,
    #[arg(long, value_enum, default_value_t = EncodingArg::Joint)]
    encoding: EncodingArg,
    /// Significance level of each battery test.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Minimum K for a run to be called random.
    #[arg(long, default_value_t = DEFAULT_K_THRESHOLD)]
    k_threshold: f64,
    /// Also analyse the coincidences with codes `a,b`.
    #[arg(long, value_parser = parse_code_pair)]
    subset: Option<(u8, u8)>,
    /// Also analyse each station's singles.
    #[arg(long)]
    singles: bool,
    /// Which station's clock timestamps a coincidence.
    #[arg(long, value_enum, default_value_t = TimeRefArg::Alice)]
    time_ref: TimeRefArg,
    /// CHSH sign placement.
    #[arg(long, value_enum, default_value_t = SignArg::Auto)]
    sign: SignArg,
    /// Code bit holding the setting; the other holds the outcome.
    #[arg(long, default_value_t = 1)]
    setting_bit: u8,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SynthArgs {
    /// Start from a shipped configuration; other flags override it.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    name: Option<String>,
    /// Pairs per second.
    #[arg(long)]
    pair_rate: Option<f64>,
    /// Seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    visibility: Option<f64>,
    /// Alice's angles `a0,a1` in degrees.
    #[arg(long, value_parser = parse_f64_pair, allow_hyphen_values = true)]
    angles_a: Option<(f64, f64)>,
    /// Bob's angles `b0,b1` in degrees.
    #[arg(long, value_parser = parse_f64_pair, allow_hyphen_values = true)]
    angles_b: Option<(f64, f64)>,
    #[arg(long)]
    efficiency: Option<f64>,
    /// Timing jitter, seconds.
    #[arg(long)]
    jitter: Option<f64>,
    /// Relative rate error of Bob's clock.
    #[arg(long, allow_hyphen_values = true)]
    drift_rate: Option<f64>,
    /// Offset of Bob's clock, seconds.
    #[arg(long, allow_hyphen_values = true)]
    drift_offset: Option<f64>,
    /// Uncorrelated singles per second at each station.
    #[arg(long)]
    background_rate: Option<f64>,
    #[arg(long)]
    setting_bit: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SequenceArgs {
    /// A bit string, or a file of 0/1 characters.
    input: String,
    /// Prefix lengths at which to report K as well.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
}

#[derive(Args)]
struct NistArgs {
    /// A bit string, or a file of 0/1 characters.
    input: String,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
}

#[derive(Args)]
struct ScatterArgs {
    /// CSV written by `analyze --format csv`.
    report: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K_THRESHOLD)]
    k_threshold: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure(u8, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn runtime(msg: impl ToString) -> Failure {
    Failure(1, msg.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_bits(input: &str) -> Result<BinarySequence, Failure> {
    let path = Path::new(input);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| runtime(format!("{input}: {e}")))?
    } else {
        input.to_string()
    };
    BinarySequence::parse(&text).map_err(|e| usage(format!("{input}: {e}")))
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    if !(args.t_w > 0.0) {
        return Err(usage("--tw must be positive"));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1)"));
    }
    let delay = match args.delay {
        DelayArg::Fixed(d) => DelaySpec::Fixed(d),
        DelayArg::Scan => {
            let grid = ScanGrid {
                min: args.scan_range.0,
                max: args.scan_range.1,
                step: args.scan_step,
            };
            grid.points().map_err(|e| usage(e.to_string()))?;
            DelaySpec::Scan(grid)
        }
    };
    let code_map = CodeMap::new(args.setting_bit, 1 - args.setting_bit.min(1))
        .map_err(|e| usage(format!("--setting-bit: {e}")))?;
    let mut config = AnalysisConfig::new(args.t_w, delay);
    config.encoding = match args.encoding {
        EncodingArg::Codes => EncoderChoice::Codes,
        EncodingArg::Joint => EncoderChoice::Joint,
        EncodingArg::Dt => EncoderChoice::Dt,
    };
    config.time_ref = match args.time_ref {
        TimeRefArg::Alice => TimeReference::Alice,
        TimeRefArg::Bob => TimeReference::Bob,
        TimeRefArg::Midpoint => TimeReference::Midpoint,
    };
    config.sign_mode = match args.sign {
        SignArg::Auto => SignMode::Auto,
        SignArg::Fixed => SignMode::Fixed,
    };
    config.alpha = args.alpha;
    config.k_threshold = args.k_threshold;
    config.subset = args.subset;
    config.singles = args.singles;
    config.code_map = code_map;

    let rows = analyze_paths(&args.runs, &config);
    let text = match args.format {
        Format::Text => format_text(&rows),
        Format::Csv => format_csv(&rows),
    };
    emit(&text, args.out.as_deref())?;
    for r in rows.iter().filter(|r| r.is_failed()) {
        eprintln!("warning: run {} failed: {}", r.name, r.note);
    }
    if rows.iter().all(|r| r.is_failed()) {
        return Err(runtime("every run failed"));
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let mut cfg = match args.preset {
        Some(Preset::DriftOn) => drift_demo_config(true),
        Some(Preset::DriftOff) => drift_demo_config(false),
        None => SynthConfig::default(),
    };
    macro_rules! set {
        ($($field:ident <- $arg:expr),* $(,)?) => {
            $(if let Some(v) = $arg { cfg.$field = v; })*
        };
    }
    set! {
        name <- args.name,
        pair_rate <- args.pair_rate,
        duration <- args.duration,
        visibility <- args.visibility,
        angles_a <- args.angles_a,
        angles_b <- args.angles_b,
        efficiency <- args.efficiency,
        jitter_sigma <- args.jitter,
        drift_rate <- args.drift_rate,
        drift_offset <- args.drift_offset,
        background_rate <- args.background_rate,
        seed <- args.seed,
    }
    if let Some(bit) = args.setting_bit {
        cfg.code_map = CodeMap::new(bit, 1 - bit.min(1)).map_err(|e| usage(format!("--setting-bit: {e}")))?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let bundle = gen_bell_run(&cfg).map_err(runtime)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| runtime(format!("{}: {e}", args.out_dir.display())))?;
    for path in write_run(&bundle, &args.out_dir).map_err(runtime)? {
        println!("{}", path.display());
    }
    eprintln!(
        "{}: {} Alice and {} Bob events",
        bundle.name,
        bundle.alice.len(),
        bundle.bob.len()
    );
    Ok(())
}

fn complexity_cmd(args: SequenceArgs) -> Result<(), Failure> {
    let bits = read_bits(&args.input)?;
    let r = complexity(&bits).map_err(|e| usage(e.to_string()))?;
    println!("n\tc\tK");
    if !args.checkpoints.is_empty() {
        let profile = complexity_profile(&bits, &args.checkpoints).map_err(|e| usage(e.to_string()))?;
        for p in profile.iter().filter(|p| p.n != r.n) {
            println!("{}\t{}\t{:.4}", p.n, p.c, p.k);
        }
    }
    println!("{}\t{}\t{:.4}", r.n, r.c, r.k);
    Ok(())
}

fn nist_cmd(args: NistArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1)"));
    }
    let bits = read_bits(&args.input)?;
    let verdict = battery(&bits, args.alpha);
    println!("{:<16} {:>12} {:>5}  note", "test", "p-value", "pass");
    for r in &verdict.results {
        let p = r.p_value.map_or("short".to_string(), |p| format!("{p:.6}"));
        let note = match r.status {
            bellcert::Status::Ok => r.warnings.join("; "),
            bellcert::Status::TooShort { min } => format!("needs {min} bits"),
            bellcert::Status::PrerequisiteFailed => "prerequisite failed".to_string(),
        };
        println!(
            "{:<16} {:>12} {:>5}  {}",
            r.name(),
            p,
            if r.pass { "yes" } else { "no" },
            note
        );
    }
    println!("overall: {}", if verdict.overall { "yes" } else { "no" });
    Ok(())
}

fn scatter_cmd(args: ScatterArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.report).map_err(|e| runtime(format!("{}: {e}", args.report.display())))?;
    let records = parse_report(&text).map_err(runtime)?;
    let points = scatter_from_records(&records).map_err(runtime)?;
    emit(&format_scatter_csv(&points, args.k_threshold), args.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Complexity(a) => complexity_cmd(a),
        Command::Nist(a) => nist_cmd(a),
        Command::Scatter(a) => scatter_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
