//! Every emitted report validates against `docs/report.schema.json`.

use dirwalk::catalog::{default_model, Job, Kind, Plan, Settings};
use dirwalk::parallel::Runner;

fn validator() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

/// Small settings for every catalog entry.
fn small(kind: Kind) -> Settings {
    let mut s = Settings::default();
    match kind {
        Kind::CycleReversal => s.max_cycle_len = Some(4),
        Kind::PathLaw => s.walks = Some(500),
        Kind::Identity | Kind::Transience => {
            s.ladder = Some(vec![2, 4]);
            s.walks = Some(300);
        }
        Kind::SlabRatio | Kind::ReturnTime => {
            s.l = Some(3);
            s.walks = Some(300);
        }
        Kind::StartShift => s.walks = Some(300),
        Kind::Beta => {
            s.l = Some(10);
            s.envs = Some(50);
            s.doubling = Some(2);
        }
        Kind::Reversal => {
            s.envs = Some(30);
            s.cycle_len = Some(3);
        }
        Kind::Direction => {
            s.steps = Some(2000);
            s.walks = Some(5);
        }
        Kind::Oscillation => {
            s.steps = Some(500);
            s.walks = Some(3);
        }
        Kind::Calibration => s.repetitions = Some(20),
        Kind::CylinderWeights | Kind::GamblersRuin => {}
    }
    s
}

#[test]
fn every_experiment_emits_a_valid_report() {
    let v = validator();
    let runner = Runner::new(2, 2).unwrap();
    for kind in Kind::ALL {
        let plan = Plan::build(kind, &small(kind)).unwrap();
        let job = Job { plan, model: default_model(), u: vec![1, 0] };
        let report = job.run(&runner).unwrap_or_else(|e| panic!("{}: {e}", kind.name())).report;
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let errors: Vec<String> = v.iter_errors(&json).map(|e| format!("{} at {}", e, e.instance_path())).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", kind.name());
        let back: dirwalk::report::ExperimentReport = serde_json::from_value(json).unwrap();
        assert_eq!(back.without_runtime(), report.without_runtime(), "{}", kind.name());
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let mut report = dirwalk::report::ExperimentReport::new("x", "y");
    report.conclude();
    let good: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert!(v.is_valid(&good));
    let mut bad = good.clone();
    bad["verdict"] = "maybe".into();
    assert!(!v.is_valid(&bad));
    let mut bad = good.clone();
    bad["extra"] = 1.into();
    assert!(!v.is_valid(&bad));
    let mut bad = good;
    bad.as_object_mut().unwrap().remove("anchor");
    assert!(!v.is_valid(&bad));
}
