use bellcert::ingest::{parse_time_file, run_file_names};
use bellcert::{load_run, load_station, DetectionEvent, IngestError, Station, StationStream};
use proptest::prelude::*;

fn render<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn accepted_iff_well_formed(
        times in prop::collection::vec(0u32..40, 1..30),
        codes in prop::collection::vec(0u8..5, 1..30),
    ) {
        let monotone = times.windows(2).all(|w| w[0] < w[1]);
        let in_range = codes.iter().all(|&c| c <= 3);
        let equal = times.len() == codes.len();
        let t: Vec<f64> = times.iter().map(|&v| v as f64 * 1e-6).collect();
        let result = load_station(&render(&t), &render(&codes), Station::Alice);
        prop_assert_eq!(result.is_ok(), monotone && in_range && equal);
        if let Ok(s) = result {
            prop_assert!(s.times().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn round_trip(
        gaps in prop::collection::vec(1e-12f64..1e-3, 1..200),
        codes in prop::collection::vec(0u8..4, 200),
        crlf in any::<bool>(),
    ) {
        let mut t = 0.0;
        let events: Vec<DetectionEvent> = gaps
            .iter()
            .zip(&codes)
            .map(|(g, &code)| {
                t += g;
                DetectionEvent { t, code }
            })
            .collect();
        let original = StationStream::new(Station::Bob, events).unwrap();
        let (mut v, mut c) = (original.time_file_contents(), original.code_file_contents());
        if crlf {
            v = v.replace('\n', "\r\n");
            c = c.replace('\n', "\r\n");
        }
        let reloaded = load_station(&v, &c, Station::Bob).unwrap();
        prop_assert_eq!(reloaded, original);
    }
}

#[test]
fn whitespace_tolerance() {
    assert_eq!(parse_time_file("  1e-6 \n\n2e-6\t\n\n\n").unwrap(), vec![1e-6, 2e-6]);
}

#[test]
fn run_from_directory() {
    let dir = tempfile::tempdir().unwrap();
    let names = run_file_names("r1");
    let contents = ["1.0\n2.0\n", "0\n1\n", "1.0\n2.5\n3.0\n", "2\n3\n0\n"];
    for (n, c) in names.iter().zip(contents) {
        std::fs::write(dir.path().join(n), c).unwrap();
    }
    let run = load_run(dir.path(), "r1").unwrap();
    assert_eq!((run.alice.len(), run.bob.len()), (2, 3));
    assert_eq!(run.bob.codes(), vec![2, 3, 0]);

    std::fs::write(dir.path().join(&names[3]), "2\n3\n").unwrap();
    assert!(matches!(
        load_run(dir.path(), "r1"),
        Err(IngestError::LengthMismatch(3, 2))
    ));
    assert!(matches!(load_run(dir.path(), "missing"), Err(IngestError::Io { .. })));
}
