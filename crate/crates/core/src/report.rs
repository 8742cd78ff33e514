//! Run-level analysis pipeline and its tabular output.
//!
//! One run yields a coincidence row plus, on request, a per-setting subset
//! row and one singles row per station. Each row carries the normalized
//! complexity, the six battery p-values, the CHSH value where it applies and
//! the encoding the bits came from.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::chsh::{chsh, tally, CodeMap, SignMode};
use crate::coincidence::{
    match_streams, scan_delay, subset, CoincidenceConfig, CoincidenceSequence, ScanGrid, TimeReference,
};
use crate::complexity::complexity;
use crate::encode::{binarize_times, encode_codes, encode_joint, BinarySequence};
use crate::ingest::{discover_runs, load_run, RunBundle, Station};
use crate::nist::{battery, Status, TestKind, DEFAULT_ALPHA};
use crate::Error;

/// Bell's limit drawn on the scatter plot.
pub const BELL_LIMIT: f64 = 2.0;
/// Complexity threshold separating non-random runs.
pub const DEFAULT_K_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelaySpec {
    Fixed(f64),
    Scan(ScanGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderChoice {
    /// Alice's two-bit codes of each coincidence.
    Codes,
    /// Both codes, four bits per coincidence.
    Joint,
    /// Median-thresholded inter-arrival times.
    Dt,
}

impl EncoderChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderChoice::Codes => "codes",
            EncoderChoice::Joint => "joint",
            EncoderChoice::Dt => "dt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub t_w: f64,
    pub delay: DelaySpec,
    pub time_ref: TimeReference,
    pub encoding: EncoderChoice,
    pub alpha: f64,
    pub k_threshold: f64,
    pub subset: Option<(u8, u8)>,
    pub singles: bool,
    pub code_map: CodeMap,
    pub sign_mode: SignMode,
}

impl AnalysisConfig {
    pub fn new(t_w: f64, delay: DelaySpec) -> Self {
        Self {
            t_w,
            delay,
            time_ref: TimeReference::Alice,
            encoding: EncoderChoice::Joint,
            alpha: DEFAULT_ALPHA,
            k_threshold: DEFAULT_K_THRESHOLD,
            subset: None,
            singles: false,
            code_map: CodeMap::default(),
            sign_mode: SignMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    Coincidences,
    Subset(u8, u8),
    Singles(Station),
    Failed,
}

impl RowKind {
    pub fn label(&self) -> String {
        match self {
            RowKind::Coincidences => "coincidences".to_string(),
            RowKind::Subset(a, b) => format!("subset{{{a};{b}}}"),
            RowKind::Singles(s) => format!("singles-{s}"),
            RowKind::Failed => "failed".to_string(),
        }
    }
}

/// One table row. Numeric fields are `None` where not applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub condition: Option<String>,
    pub kind: RowKind,
    pub k: Option<f64>,
    pub c: Option<usize>,
    pub nist_overall: Option<bool>,
    /// In battery order; `None` for tests the sequence was too short for.
    pub p_values: [Option<f64>; 6],
    pub s_chsh: Option<f64>,
    /// Events in the analysed stream (coincidences or singles).
    pub n: usize,
    pub bits: usize,
    pub encoding: String,
    pub t_w: f64,
    pub delay: Option<f64>,
    pub random: bool,
    pub note: String,
}

impl RunReport {
    fn failed(name: &str, t_w: f64, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            condition: None,
            kind: RowKind::Failed,
            k: None,
            c: None,
            nist_overall: None,
            p_values: [None; 6],
            s_chsh: None,
            n: 0,
            bits: 0,
            encoding: "-".to_string(),
            t_w,
            delay: None,
            random: false,
            note: err.to_string(),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.kind == RowKind::Failed
    }
}

fn evaluate(
    bundle: &RunBundle,
    kind: RowKind,
    bits: BinarySequence,
    n: usize,
    s_chsh: Option<f64>,
    delay: Option<f64>,
    config: &AnalysisConfig,
) -> Result<RunReport, Error> {
    let cx = complexity(&bits)?;
    let verdict = battery(&bits, config.alpha);
    let mut p_values = [None; 6];
    let mut notes = Vec::new();
    for (slot, kind) in p_values.iter_mut().zip(TestKind::ALL) {
        let r = verdict.get(kind);
        *slot = r.p_value;
        match r.status {
            Status::TooShort { min } => notes.push(format!("{} needs {min} bits", kind.name())),
            Status::PrerequisiteFailed => notes.push(format!("{} prerequisite failed", kind.name())),
            Status::Ok => {}
        }
    }
    Ok(RunReport {
        name: bundle.name.clone(),
        condition: bundle.condition.map(|c| c.to_string()),
        kind,
        k: Some(cx.k),
        c: Some(cx.c),
        nist_overall: Some(verdict.overall),
        p_values,
        s_chsh,
        n,
        bits: bits.len(),
        encoding: bits.encoding().to_string(),
        t_w: config.t_w,
        delay,
        random: cx.k >= config.k_threshold && verdict.overall,
        note: notes.join("; "),
    })
}

fn encode_coincidences(seq: &CoincidenceSequence, choice: EncoderChoice) -> Result<BinarySequence, Error> {
    Ok(match choice {
        EncoderChoice::Codes => {
            let codes: Vec<u8> = seq.events.iter().map(|e| e.code_a).collect();
            encode_codes(&codes)?
        }
        EncoderChoice::Joint => encode_joint(seq)?,
        EncoderChoice::Dt => binarize_times(&seq.times())?,
    })
}

/// Resolves the delay, matching once when it is fixed.
pub fn resolve_delay(bundle: &RunBundle, config: &AnalysisConfig) -> Result<f64, Error> {
    Ok(match config.delay {
        DelaySpec::Fixed(d) => d,
        DelaySpec::Scan(grid) => scan_delay(&bundle.alice, &bundle.bob, config.t_w, grid)?.best_delay,
    })
}

/// Full pipeline for one loaded run.
pub fn analyze_run(bundle: &RunBundle, config: &AnalysisConfig) -> Result<Vec<RunReport>, Error> {
    let delay = resolve_delay(bundle, config)?;
    let mut cc = CoincidenceConfig::new(config.t_w, delay);
    cc.time_ref = config.time_ref;
    let seq = match_streams(&bundle.alice, &bundle.bob, cc)?;
    let s = chsh(&tally(&seq, config.code_map)?, config.sign_mode)?;
    let s_value = match config.sign_mode {
        SignMode::Auto => s.magnitude(),
        SignMode::Fixed => s.s,
    };

    let mut rows = vec![evaluate(
        bundle,
        RowKind::Coincidences,
        encode_coincidences(&seq, config.encoding)?,
        seq.len(),
        Some(s_value),
        Some(delay),
        config,
    )?];

    if let Some((a, b)) = config.subset {
        let sub = subset(&seq, a, b)?;
        let row = encode_coincidences(&sub, config.encoding).and_then(|bits| {
            evaluate(
                bundle,
                RowKind::Subset(a, b),
                bits,
                sub.len(),
                None,
                Some(delay),
                config,
            )
        });
        rows.push(row.unwrap_or_else(|e| RunReport {
            kind: RowKind::Subset(a, b),
            ..RunReport::failed(&bundle.name, config.t_w, &e)
        }));
    }

    if config.singles {
        for stream in [&bundle.alice, &bundle.bob] {
            let bits = match config.encoding {
                EncoderChoice::Dt => binarize_times(&stream.times())?,
                _ => encode_codes(&stream.codes())?,
            };
            rows.push(evaluate(
                bundle,
                RowKind::Singles(stream.station()),
                bits,
                stream.len(),
                None,
                None,
                config,
            )?);
        }
    }
    Ok(rows)
}

/// Expands a path into `(directory, run name)` pairs. A directory stands for
/// every run in it; anything else is a `<dir>/<name>` prefix.
pub fn expand_run_path(path: &Path) -> Vec<(PathBuf, String)> {
    if path.is_dir() {
        if let Ok(names) = discover_runs(path) {
            if !names.is_empty() {
                return names.into_iter().map(|n| (path.to_path_buf(), n)).collect();
            }
        }
    }
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    vec![(dir, name)]
}

/// Loads and analyses every run; failures become `failed` rows.
pub fn analyze_paths(paths: &[PathBuf], config: &AnalysisConfig) -> Vec<RunReport> {
    let mut rows = Vec::new();
    for path in paths {
        for (dir, name) in expand_run_path(path) {
            let label = if name.is_empty() {
                path.display().to_string()
            } else {
                name.clone()
            };
            let outcome = load_run(&dir, &name)
                .map_err(Error::from)
                .and_then(|bundle| analyze_run(&bundle, config));
            match outcome {
                Ok(mut r) => rows.append(&mut r),
                Err(e) => rows.push(RunReport::failed(&label, config.t_w, &e)),
            }
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// Formatting

pub const REPORT_COLUMNS: [&str; 20] = [
    "name",
    "condition",
    "row",
    "k",
    "c",
    "nist",
    "p_monobit",
    "p_block_frequency",
    "p_runs",
    "p_longest_run",
    "p_matrix_rank",
    "p_dft_spectral",
    "s_chsh",
    "n",
    "bits",
    "encoding",
    "t_w",
    "delay",
    "random",
    "note",
];

const NA: &str = "n/a";

fn fmt_p(p: Option<f64>) -> String {
    match p {
        None => "short".to_string(),
        Some(p) if p != 0.0 && p < 1e-4 => format!("{p:.3e}"),
        Some(p) => format!("{p:.6}"),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Keeps a cell free of separators in both output formats.
fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// The printed fields of a row, shared by both output formats.
pub fn report_fields(r: &RunReport) -> Vec<String> {
    let failed = r.is_failed();
    let mut f = vec![
        clean(&r.name),
        r.condition.clone().unwrap_or_else(|| "-".to_string()),
        r.kind.label(),
        r.k.map_or(NA.to_string(), |k| format!("{k:.4}")),
        r.c.map_or(NA.to_string(), |c| c.to_string()),
        r.nist_overall.map_or(NA.to_string(), |b| yes_no(b).to_string()),
    ];
    for p in r.p_values {
        f.push(if failed { NA.to_string() } else { fmt_p(p) });
    }
    f.push(r.s_chsh.map_or(NA.to_string(), |s| format!("{s:.4}")));
    f.push(r.n.to_string());
    f.push(r.bits.to_string());
    f.push(clean(&r.encoding));
    f.push(format!("{:e}", r.t_w));
    f.push(r.delay.map_or(NA.to_string(), |d| format!("{d:e}")));
    f.push(yes_no(r.random).to_string());
    f.push(if r.note.is_empty() {
        "-".to_string()
    } else {
        clean(&r.note)
    });
    f
}

fn write_csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

pub fn format_csv(reports: &[RunReport]) -> String {
    write_csv(&REPORT_COLUMNS, reports.iter().map(report_fields))
}

pub fn format_text(reports: &[RunReport]) -> String {
    let rows: Vec<Vec<String>> = std::iter::once(REPORT_COLUMNS.iter().map(|s| s.to_string()).collect())
        .chain(reports.iter().map(report_fields))
        .collect();
    let widths: Vec<usize> = (0..REPORT_COLUMNS.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// Splits a report (either format) into header-keyed records.
pub fn parse_report(text: &str) -> Result<Vec<Vec<(String, String)>>, Error> {
    let body: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect();
    let header_line = body.first().ok_or_else(|| Error::Report("report is empty".into()))?;
    let rows: Vec<Vec<String>> = if header_line.contains(',') {
        let joined = body.join("\n");
        csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(joined.as_bytes())
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(|f| f.trim().to_string()).collect())
                    .map_err(|e| Error::Report(e.to_string()))
            })
            .collect::<Result<_, _>>()?
    } else {
        body.iter()
            .map(|l| {
                l.split("  ")
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .collect()
    };
    let header = &rows[0];
    rows[1..]
        .iter()
        .enumerate()
        .map(|(i, cells)| {
            if cells.len() != header.len() {
                return Err(Error::Report(format!(
                    "row {} has {} fields, header has {}",
                    i + 1,
                    cells.len(),
                    header.len()
                )));
            }
            Ok(header.iter().cloned().zip(cells.iter().cloned()).collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub name: String,
    pub k: f64,
    pub s_chsh: f64,
    pub nist_overall: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScatterError {
    #[error("no run has both a complexity and a CHSH value")]
    NoApplicableRuns,
}

/// K versus S points for every row where S applies.
pub fn scatter(reports: &[RunReport]) -> Result<Vec<ScatterPoint>, ScatterError> {
    let points: Vec<ScatterPoint> = reports
        .iter()
        .filter_map(|r| {
            Some(ScatterPoint {
                name: r.name.clone(),
                k: r.k?,
                s_chsh: r.s_chsh?,
                nist_overall: r.nist_overall?,
            })
        })
        .collect();
    if points.is_empty() {
        return Err(ScatterError::NoApplicableRuns);
    }
    Ok(points)
}

/// Scatter points from parsed report records; rows with `n/a` fields are skipped.
pub fn scatter_from_records(records: &[Vec<(String, String)>]) -> Result<Vec<ScatterPoint>, ScatterError> {
    let get = |rec: &[(String, String)], key: &str| rec.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    let points: Vec<ScatterPoint> = records
        .iter()
        .filter_map(|rec| {
            Some(ScatterPoint {
                name: get(rec, "name")?,
                k: get(rec, "k")?.parse().ok()?,
                s_chsh: get(rec, "s_chsh")?.parse().ok()?,
                nist_overall: match get(rec, "nist")?.as_str() {
                    "yes" => true,
                    "no" => false,
                    _ => return None,
                },
            })
        })
        .collect();
    if points.is_empty() {
        return Err(ScatterError::NoApplicableRuns);
    }
    Ok(points)
}

pub fn format_scatter_csv(points: &[ScatterPoint], k_threshold: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# bell_limit_s={BELL_LIMIT}");
    let _ = writeln!(out, "# k_threshold={k_threshold}");
    out.push_str(&write_csv(
        &["name", "k", "s_chsh", "nist"],
        points.iter().map(|p| {
            [
                p.name.clone(),
                format!("{:.4}", p.k),
                format!("{:.4}", p.s_chsh),
                yes_no(p.nist_overall).to_string(),
            ]
        }),
    ));
    out
}
