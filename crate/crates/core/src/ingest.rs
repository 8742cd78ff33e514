//! Parsing of per-station time-tag files.
//!
//! A station is recorded as two plain-text files with one value per line:
//! `*_V.dat` holds detection times in seconds (strictly increasing) and
//! `*_C.dat` holds the two-bit setting/detector code (0..=3) of each event.
//! Both files of a station have the same number of lines.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {0}: malformed value")]
    MalformedLine(usize),
    #[error("line {0}: time does not increase")]
    NonMonotonicTime(usize),
    #[error("line {line}: code {value} is outside 0..=3")]
    CodeOutOfRange { line: usize, value: i64 },
    #[error("file holds no events")]
    EmptyFile,
    #[error("time file has {0} lines but code file has {1}")]
    LengthMismatch(usize, usize),
    #[error("line {0}: negative time")]
    NegativeTime(usize),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Single-photon detection: a time tag plus its two-bit code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub t: f64,
    pub code: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Station {
    Alice,
    Bob,
}

impl Station {
    pub fn label(self) -> &'static str {
        match self {
            Station::Alice => "alice",
            Station::Bob => "bob",
        }
    }
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The singles recorded at one station, ordered by time.
#[derive(Debug, Clone, PartialEq)]
pub struct StationStream {
    station: Station,
    events: Vec<DetectionEvent>,
}

impl StationStream {
    /// Builds a stream after checking code range and strict time order.
    pub fn new(station: Station, events: Vec<DetectionEvent>) -> Result<Self, IngestError> {
        if events.is_empty() {
            return Err(IngestError::EmptyFile);
        }
        for (i, ev) in events.iter().enumerate() {
            if ev.code > 3 {
                return Err(IngestError::CodeOutOfRange {
                    line: i + 1,
                    value: ev.code as i64,
                });
            }
            if !(ev.t >= 0.0) || !ev.t.is_finite() {
                return Err(IngestError::NegativeTime(i + 1));
            }
            if i > 0 && ev.t <= events[i - 1].t {
                return Err(IngestError::NonMonotonicTime(i + 1));
            }
        }
        Ok(Self { station, events })
    }

    pub fn station(&self) -> Station {
        self.station
    }

    pub fn events(&self) -> &[DetectionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }

    pub fn codes(&self) -> Vec<u8> {
        self.events.iter().map(|e| e.code).collect()
    }

    /// Renders the `*_V.dat` contents: 17 significant digits, scientific notation.
    pub fn time_file_contents(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 24);
        for ev in &self.events {
            out.push_str(&format!("{:.16e}\n", ev.t));
        }
        out
    }

    /// Renders the `*_C.dat` contents.
    pub fn code_file_contents(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 2);
        for ev in &self.events {
            out.push(char::from(b'0' + ev.code));
            out.push('\n');
        }
        out
    }
}

/// Experimental condition of a run, as labeled in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    RemoteSwitched,
    LocalSwitched,
    LocalStatic,
    Uncorrelated,
    Synthetic,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::RemoteSwitched => "remote-switched",
            Condition::LocalSwitched => "local-switched",
            Condition::LocalStatic => "local-static",
            Condition::Uncorrelated => "uncorrelated",
            Condition::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote-switched" => Ok(Condition::RemoteSwitched),
            "local-switched" => Ok(Condition::LocalSwitched),
            "local-static" => Ok(Condition::LocalStatic),
            "uncorrelated" => Ok(Condition::Uncorrelated),
            "synthetic" => Ok(Condition::Synthetic),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

/// The four files of a run: two stations, possibly with different lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunBundle {
    pub name: String,
    pub alice: StationStream,
    pub bob: StationStream,
    pub condition: Option<Condition>,
}

/// Yields `(line_number, trimmed_text)` for each non-blank line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses a `*_V.dat` file into strictly increasing times.
pub fn parse_time_file(text: &str) -> Result<Vec<f64>, IngestError> {
    let mut times: Vec<f64> = Vec::new();
    for (line, s) in content_lines(text) {
        let t: f64 = s.parse().map_err(|_| IngestError::MalformedLine(line))?;
        if !t.is_finite() {
            return Err(IngestError::MalformedLine(line));
        }
        if t < 0.0 {
            return Err(IngestError::NegativeTime(line));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(IngestError::NonMonotonicTime(line));
            }
        }
        times.push(t);
    }
    if times.is_empty() {
        return Err(IngestError::EmptyFile);
    }
    Ok(times)
}

/// Parses a `*_C.dat` file into codes in 0..=3.
pub fn parse_code_file(text: &str) -> Result<Vec<u8>, IngestError> {
    let mut codes = Vec::new();
    for (line, s) in content_lines(text) {
        let v: i64 = s.parse().map_err(|_| IngestError::MalformedLine(line))?;
        if !(0..=3).contains(&v) {
            return Err(IngestError::CodeOutOfRange { line, value: v });
        }
        codes.push(v as u8);
    }
    if codes.is_empty() {
        return Err(IngestError::EmptyFile);
    }
    Ok(codes)
}

/// Zips the contents of a station's time and code files.
pub fn load_station(time_text: &str, code_text: &str, station: Station) -> Result<StationStream, IngestError> {
    let times = parse_time_file(time_text)?;
    let codes = parse_code_file(code_text)?;
    if times.len() != codes.len() {
        return Err(IngestError::LengthMismatch(times.len(), codes.len()));
    }
    let events = times
        .into_iter()
        .zip(codes)
        .map(|(t, code)| DetectionEvent { t, code })
        .collect();
    Ok(StationStream { station, events })
}

/// File names of a run's four files, in the order alice V, alice C, bob V, bob C.
pub fn run_file_names(name: &str) -> [String; 4] {
    [
        format!("{name}_alice_V.dat"),
        format!("{name}_alice_C.dat"),
        format!("{name}_bob_V.dat"),
        format!("{name}_bob_C.dat"),
    ]
}

fn read_text(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads the run `name` from `dir`, expecting the four files named by [`run_file_names`].
pub fn load_run(dir: &Path, name: &str) -> Result<RunBundle, IngestError> {
    let [av, ac, bv, bc] = run_file_names(name);
    let alice = load_station(&read_text(&dir.join(av))?, &read_text(&dir.join(ac))?, Station::Alice)?;
    let bob = load_station(&read_text(&dir.join(bv))?, &read_text(&dir.join(bc))?, Station::Bob)?;
    Ok(RunBundle {
        name: name.to_string(),
        alice,
        bob,
        condition: None,
    })
}

/// Names of all runs in `dir`, found via their `*_alice_V.dat` files, sorted.
pub fn discover_runs(dir: &Path) -> Result<Vec<String>, IngestError> {
    let entries = std::fs::read_dir(dir).map_err(|e| IngestError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|f| f.strip_suffix("_alice_V.dat"))
                .map(str::to_string)
        })
        .collect();
    names.sort();
    Ok(names)
}
