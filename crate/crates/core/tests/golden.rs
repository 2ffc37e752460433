//! Frozen examples of every file format. Set `UPDATE_GOLDEN=1` to rewrite
//! them after an intentional format change.

use amoebot::engine::Erosion;
use amoebot::files::{read_trace, trace_to_string, Configuration, RunMetrics};
use amoebot::generate::{generate, Shape};
use amoebot::geometry::Dim;
use amoebot::replay::{replay, ReplayMode};
use amoebot::scheduler::{run, AdversaryPolicy, Limits, Mode, PolicyKind, Trace};
use amoebot::stats::summarize;
use std::path::PathBuf;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from the golden file");
}

fn config() -> Configuration {
    generate(Shape::SquareGadget, 6, 1, Dim::Three).unwrap()
}

fn trace(mode: Mode) -> Trace {
    run(config().to_system().unwrap(), mode, &AdversaryPolicy::new(PolicyKind::FixedPriority, 0), Limits::default())
        .unwrap()
}

#[test]
fn config_golden() {
    check("config.json", &config().to_json());
    let text = std::fs::read_to_string(golden("config.json")).unwrap();
    assert_eq!(Configuration::from_json(&text, false).unwrap(), config());
}

#[test]
fn trace_goldens() {
    for (mode, name) in [(Mode::Sequential, "trace.jsonl"), (Mode::Async, "trace-async.jsonl")] {
        let t = trace(mode);
        assert!(t.succeeded());
        check(name, &trace_to_string(&t));
        let text = std::fs::read_to_string(golden(name)).unwrap();
        let back = read_trace(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        let (r, _) = replay(&Erosion, config().to_system().unwrap(), &back.events, ReplayMode::CheckTopology, mode == Mode::Sequential);
        assert!(r.passed(), "{:?}", r.divergence);
    }
}

#[test]
fn metrics_and_stats_goldens() {
    let m = RunMetrics::from_trace(&trace(Mode::Sequential), 0.0);
    check("metrics.json", &m.to_json());
    let text = std::fs::read_to_string(golden("metrics.json")).unwrap();
    assert_eq!(RunMetrics::from_json(text.trim()).unwrap(), m);
    let ma = RunMetrics::from_trace(&trace(Mode::Async), 0.0);
    check("stats.csv", &summarize(&[m, ma]));
}
