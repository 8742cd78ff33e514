//! Acceptance suite. Runs every criterion in order and prints one line each;
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use bellcert::complexity::lz76_count_quadratic;
use bellcert::nist::{monobit, runs};
use bellcert::synth::{drift_demo_config, ReferenceKind, DRIFT_DEMO_GRID, DRIFT_DEMO_WINDOW};
use bellcert::{
    battery, binarize_times, chsh, complexity, count_matches, gen_bell_run, gen_reference, load_run, lz76_count,
    match_indices, match_streams, scan_delay, tally, write_run, BinarySequence, CodeMap, CoincidenceConfig,
    DetectionEvent, Encoding, RunBundle, ScanGrid, SignMode, Station, StationStream, SynthConfig, TestKind,
};
use common::{naive_lz76, pi_bits, prng_bits};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn raw(bits: Vec<u8>) -> BinarySequence {
    BinarySequence::new(bits, Encoding::Raw).unwrap()
}

fn lz_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<Vec<u8>> = (0..1000u64)
        .map(|seed| prng_bits(seed, 1 + (seed as usize * 7919) % 512))
        .collect();
    cases.push(vec![0; 512]);
    cases.push((0..512).map(|i| (i % 2) as u8).collect());
    // binary de Bruijn sequence of order 9 (prefer-one), truncated to 512
    let mut db = vec![0u8; 9];
    let mut seen = std::collections::HashSet::from([0u16]);
    while db.len() < 512 {
        let tail = db[db.len() - 8..].iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
        let Some(b) = [1u16, 0].into_iter().find(|&b| !seen.contains(&((tail << 1) | b))) else {
            break;
        };
        seen.insert((tail << 1) | b);
        db.push(b as u8);
    }
    cases.push(db);
    let mut mismatches = 0;
    for s in &cases {
        let fast = lz76_count(&raw(s.clone()));
        if fast != naive_lz76(s) || fast != lz76_count_quadratic(s) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && elapsed < Duration::from_secs(60),
        format!("{} strings, {mismatches} mismatches, {elapsed:.2?}", cases.len()),
    )
}

fn regimes() -> Outcome {
    let start = Instant::now();
    let k_prng = complexity(&gen_reference(&ReferenceKind::Prng { seed: 1 }, 1_000_000).unwrap())
        .unwrap()
        .k;
    let k_periodic = complexity(&gen_reference(&ReferenceKind::Periodic(vec![0, 1, 1]), 10_000).unwrap())
        .unwrap()
        .k;
    let k_quasi = complexity(&gen_reference(&ReferenceKind::default_quasiperiodic(), 1_000_000).unwrap())
        .unwrap()
        .k;
    let elapsed = start.elapsed();
    check(
        (0.95..=1.10).contains(&k_prng) && k_periodic < 0.1 && k_quasi < 0.05 && elapsed < Duration::from_secs(30),
        format!("PRNG K(1e6) = {k_prng:.4}, periodic K(1e4) = {k_periodic:.4}, two-tone K(1e6) = {k_quasi:.4}, {elapsed:.2?}"),
    )
}

fn pi_reference() -> Outcome {
    let k = complexity(&raw(pi_bits(27_000))).unwrap().k;
    check(
        (0.85..=1.05).contains(&k),
        format!(
            "K(27000) = {k:.4} on the plain binary expansion (leading 11 included); \
             the published 0.95 used an unstated encoding, so only the band is checked"
        ),
    )
}

fn nist_hand() -> Outcome {
    // erfc(2 / sqrt(20)) and erfc(2.2 / (2 sqrt(20) 0.24)), evaluated independently
    let p_mono = monobit(&BinarySequence::parse("1011010101").unwrap())
        .unwrap()
        .p_value
        .unwrap();
    let p_runs = runs(&BinarySequence::parse("1001101011").unwrap())
        .unwrap()
        .p_value
        .unwrap();
    check(
        (p_mono - 0.5271).abs() <= 1e-4 && (p_runs - 0.1472).abs() <= 1e-4,
        format!("monobit p = {p_mono:.6}, runs p = {p_runs:.6}"),
    )
}

fn battery_sanity() -> Outcome {
    let start = Instant::now();
    let seeds = 200u64;
    let mut fails = [0usize; 6];
    let mut all_pass = 0;
    for seed in 0..seeds {
        let bits = gen_reference(&ReferenceKind::Prng { seed: 10_000 + seed }, 100_000).unwrap();
        let v = battery(&bits, 0.01);
        for (i, kind) in TestKind::ALL.into_iter().enumerate() {
            fails[i] += usize::from(!v.get(kind).pass);
        }
        all_pass += usize::from(v.overall);
    }
    let rates: Vec<f64> = fails.iter().map(|&f| f as f64 / seeds as f64).collect();
    let pass_rate = all_pass as f64 / seeds as f64;
    let elapsed = start.elapsed();
    let detail = TestKind::ALL
        .iter()
        .zip(&rates)
        .map(|(k, r)| format!("{} {:.3}", k.name(), r))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        rates.iter().all(|&r| r <= 0.05) && pass_rate >= 0.85 && elapsed < Duration::from_secs(300),
        format!("failure rates [{detail}], battery pass rate {pass_rate:.3}, {elapsed:.2?}"),
    )
}

fn chsh_pipeline() -> Outcome {
    let run = |visibility: f64| {
        let cfg = SynthConfig {
            pair_rate: 100_000.0,
            duration: 1.0,
            visibility,
            seed: 6,
            ..SynthConfig::default()
        };
        let bundle = gen_bell_run(&cfg).unwrap();
        let seq = match_streams(&bundle.alice, &bundle.bob, CoincidenceConfig::new(1e-9, 0.0)).unwrap();
        let r = chsh(&tally(&seq, CodeMap::default()).unwrap(), SignMode::Auto).unwrap();
        let var: f64 = (0..4)
            .map(|i| {
                let (a, b) = (i / 2, i % 2);
                (1.0 - r.e[a][b].powi(2)) / r.pair_counts[a][b] as f64
            })
            .sum();
        (r.magnitude(), var.sqrt(), seq.len())
    };
    let (s1, _, n1) = run(1.0);
    let (s0, sigma0, _) = run(0.0);
    check(
        (s1 - 2.0 * 2f64.sqrt()).abs() < 0.05 && s0 <= 2.0 + 5.0 * sigma0,
        format!("V=1: S = {s1:.4} from {n1} coincidences; V=0: |S| = {s0:.4} (sigma {sigma0:.4})"),
    )
}

fn drift_k(drift: bool) -> (f64, f64, usize) {
    let run = gen_bell_run(&drift_demo_config(drift)).unwrap();
    let scan = scan_delay(&run.alice, &run.bob, DRIFT_DEMO_WINDOW, DRIFT_DEMO_GRID).unwrap();
    let seq = match_streams(
        &run.alice,
        &run.bob,
        CoincidenceConfig::new(DRIFT_DEMO_WINDOW, scan.best_delay),
    )
    .unwrap();
    let k = complexity(&binarize_times(&seq.times()).unwrap()).unwrap().k;
    (k, scan.best_delay, seq.len())
}

fn drift_demo() -> Outcome {
    let (k_on, d_on, n_on) = drift_k(true);
    let (k_off, d_off, n_off) = drift_k(false);
    check(
        k_on < 0.9 && k_off >= 0.95,
        format!(
            "drift on: K = {k_on:.4} (n = {n_on}, delay {d_on:.2e} s); drift off: K = {k_off:.4} (n = {n_off}, delay {d_off:.2e} s)"
        ),
    )
}

fn random_ticks(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(0..max_len);
    let mut t = 0u32;
    (0..len)
        .map(|_| {
            t += rng.random_range(1..12);
            t as f64 * 0.25
        })
        .collect()
}

fn stream(station: Station, times: &[f64]) -> StationStream {
    let events = times.iter().map(|&t| DetectionEvent { t, code: 0 }).collect();
    StationStream::new(station, events).unwrap()
}

fn coincidence_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let instances = 200;
    let mut violations = Vec::new();
    for i in 0..instances {
        let a = random_ticks(&mut rng, 80);
        let b = random_ticks(&mut rng, 80);
        let w1 = rng.random_range(0..8) as f64 * 0.25;
        let w2 = w1 + rng.random_range(0..8) as f64 * 0.25;
        let d = rng.random_range(-20..20) as f64 * 0.25;
        if count_matches(&a, &b, w1, d) > count_matches(&a, &b, w2, d) {
            violations.push(format!("monotonicity #{i}"));
        }
        if count_matches(&a, &b, w1, d) != count_matches(&b, &a, w1, -d) {
            violations.push(format!("swap #{i}"));
        }
        if match_indices(&a, &b, w2, d).len() > a.len().min(b.len()) {
            violations.push(format!("bound #{i}"));
        }

        let gaps: Vec<f64> = (0..rng.random_range(20..80))
            .map(|_| rng.random_range(1.0..10.0))
            .collect();
        let ta: Vec<f64> = gaps
            .iter()
            .scan(10.0, |t, g| {
                *t += g;
                Some(*t)
            })
            .collect();
        let offset = rng.random_range(-16..=16) as f64 * 0.25;
        let tb: Vec<f64> = ta.iter().map(|t| t + offset).collect();
        let grid = ScanGrid {
            min: -5.0,
            max: 5.0,
            step: 0.25,
        };
        let scan = scan_delay(&stream(Station::Alice, &ta), &stream(Station::Bob, &tb), 0.2, grid).unwrap();
        if (scan.best_delay + offset).abs() > grid.step + 1e-12 {
            violations.push(format!("scan #{i}"));
        }
    }
    check(
        violations.is_empty(),
        format!("{instances} instances per property, violations: {violations:?}"),
    )
}

fn performance() -> Outcome {
    let cfg = SynthConfig {
        pair_rate: 1_000_000.0,
        duration: 1.01,
        jitter_sigma: 1e-10,
        seed: 9,
        ..SynthConfig::default()
    };
    let bundle = gen_bell_run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(&bundle, dir.path()).unwrap();

    let start = Instant::now();
    let loaded = load_run(dir.path(), &bundle.name).unwrap();
    let seq = match_streams(&loaded.alice, &loaded.bob, CoincidenceConfig::new(1e-9, 0.0)).unwrap();
    let t_match = start.elapsed();

    let bits = gen_reference(&ReferenceKind::Prng { seed: 4 }, 1_000_000).unwrap();
    let start = Instant::now();
    let c = lz76_count(&bits);
    let t_lz = start.elapsed();
    check(
        t_match < Duration::from_secs(5) && t_lz < Duration::from_secs(10),
        format!(
            "parse+match {}+{} events -> {} coincidences in {t_match:.2?}; LZ76 on 1e6 bits (c = {c}) in {t_lz:.2?}",
            loaded.alice.len(),
            loaded.bob.len(),
            seq.len()
        ),
    )
}

/// Needs user-supplied data: BELLCERT_TABLE_DIR holding `longdist35_*`
/// files plus BELLCERT_TW and BELLCERT_DELAY in seconds.
fn table_reproduction() -> Option<Outcome> {
    let dir = std::env::var("BELLCERT_TABLE_DIR").ok()?;
    let parse = |key: &str| std::env::var(key).ok().and_then(|v| v.parse::<f64>().ok());
    let (Some(t_w), Some(delay)) = (parse("BELLCERT_TW"), parse("BELLCERT_DELAY")) else {
        return Some(Err("BELLCERT_TW and BELLCERT_DELAY must be set".into()));
    };
    let run: RunBundle = match load_run(Path::new(&dir), "longdist35") {
        Ok(r) => r,
        Err(e) => return Some(Err(e.to_string())),
    };
    let seq = match_streams(&run.alice, &run.bob, CoincidenceConfig::new(t_w, delay)).unwrap();
    let s = chsh(&tally(&seq, CodeMap::default()).unwrap(), SignMode::Auto).unwrap();
    let singles_k = complexity(&bellcert::encode_codes(&run.alice.codes()).unwrap())
        .unwrap()
        .k;
    Some(check(
        seq.len() == 14_562 && (s.magnitude() - 2.73).abs() < 0.05,
        format!(
            "N = {} (expect 14562), S = {:.4} via {} (expect 2.73), Alice singles K = {singles_k:.4}",
            seq.len(),
            s.magnitude(),
            s.sign_combination()
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("LZ76 oracle equivalence", lz_oracle),
        ("complexity regimes", regimes),
        ("pi reference band", pi_reference),
        ("NIST hand values", nist_hand),
        ("battery statistical sanity", battery_sanity),
        ("CHSH pipeline", chsh_pipeline),
        ("clock drift lowers K", drift_demo),
        ("coincidence properties", coincidence_properties),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("PASS  {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {d}", i + 1);
            }
        }
    }
    match table_reproduction() {
        None => println!("SKIP  10 table reproduction: set BELLCERT_TABLE_DIR, BELLCERT_TW, BELLCERT_DELAY to run"),
        Some(Ok(d)) => println!("PASS  10 table reproduction: {d}"),
        Some(Err(d)) => {
            failed += 1;
            println!("FAIL  10 table reproduction: {d}");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
