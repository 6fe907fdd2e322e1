mod common;

use proptest::prelude::*;

use ffexpand::experiment::{
    emit, report_from_json, report_json, run, ExhaustiveParams, ExperimentConfig, ExpanderParams,
    ExtractorParams, Format, IncidenceParams, IntervalParams, Kind, LineFamilyParams,
    MultTableParams, OutputConfig, PrimeRange, PrimeSelection, SarkozyParams, WeilParams,
    WellSpacedParams,
};

const PRIMES: [u64; 8] = [3, 5, 7, 11, 13, 101, 499, 1009];

fn arb_primes() -> impl Strategy<Value = PrimeSelection> {
    prop_oneof![
        prop::sample::subsequence(PRIMES.to_vec(), 1..5).prop_map(PrimeSelection::List),
        (3u64..50, 0u64..200).prop_map(|(from, w)| PrimeSelection::Range(PrimeRange { from, to: from + w + 50 })),
    ]
}

fn arb_alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), 0.01f64..=1.0]
}

fn arb_block(kind: Kind) -> BoxedStrategy<ExperimentConfig> {
    let base = (any::<u64>(), 1u64..50, arb_primes(), prop::collection::vec(arb_alpha(), 1..4), any::<bool>(), 0usize..3);
    base.prop_flat_map(move |(seed, trials, primes, alphas, override_budget, fmt)| {
        let mut cfg = ExperimentConfig::default_for(kind);
        cfg.seed = seed;
        cfg.trials = trials;
        cfg.primes = primes;
        cfg.override_budget = override_budget;
        cfg.output = OutputConfig {
            dir: format!("out/{seed:x}"),
            format: [Format::Csv, Format::Json, Format::Both][fmt],
        };
        cfg.alphas = if kind == Kind::Expander { alphas[..1].to_vec() } else { alphas };
        let maps = prop::sample::select(vec!["x^2 + x*y", "x + y", "x*y + 3", "g^x + y^2"]);
        match kind {
            Kind::Expander => (maps, any::<bool>(), any::<bool>())
                .prop_map(move |(m, samples, ex)| {
                    let mut c = cfg.clone();
                    c.expander = Some(ExpanderParams {
                        map: m.to_string(),
                        samples,
                        compare_with: samples.then(|| "x + y".to_string()),
                        exhaustive: ex.then(|| ExhaustiveParams {
                            sumset_prime: Some(5),
                            chain_primes: vec![5, 7],
                            chain_max_size: 2,
                            chain_maps: vec![m.to_string()],
                        }),
                        witnesses: None,
                    });
                    c
                })
                .boxed(),
            Kind::Incidence => (0u64..100, any::<bool>())
                .prop_map(move |(instances, lf)| {
                    let mut c = cfg.clone();
                    c.incidence = Some(IncidenceParams {
                        instances,
                        line_family: lf.then(|| LineFamilyParams { primes: vec![11], max_size: 5, sets_per_size: 3 }),
                        ..Default::default()
                    });
                    c
                })
                .boxed(),
            Kind::Extractor => prop::sample::select(vec!["y^2", "y^3 + y", "2*y^2 - 1"])
                .prop_map(move |g| {
                    let mut c = cfg.clone();
                    c.primes = PrimeSelection::List(vec![101]);
                    c.extractor = Some(ExtractorParams { g: g.to_string(), ..Default::default() });
                    c
                })
                .boxed(),
            Kind::Sarkozy => (0u64..20, 0u64..20)
                .prop_map(move |(r, s)| {
                    let mut c = cfg.clone();
                    c.sarkozy = Some(SarkozyParams { random_instances: r, sweep_trials: s, ..Default::default() });
                    c
                })
                .boxed(),
            Kind::Multtable => (1u64..5000, any::<bool>())
                .prop_map(move |(n, direct)| {
                    let mut c = cfg.clone();
                    c.multtable = Some(MultTableParams { n_max: n, direct: direct && n <= 4096 });
                    c
                })
                .boxed(),
            Kind::Weil => any::<bool>()
                .prop_map(move |iv| {
                    let mut c = cfg.clone();
                    c.weil = Some(WeilParams {
                        pool: vec!["x^3".into()],
                        interval: iv.then(|| IntervalParams { primes: vec![11], polys: vec!["x^2".into()] }),
                    });
                    c
                })
                .boxed(),
            Kind::Wellspaced => (0u64..50)
                .prop_map(move |n| {
                    let mut c = cfg.clone();
                    c.wellspaced = Some(WellSpacedParams { instances: n, ..Default::default() });
                    c
                })
                .boxed(),
        }
    })
    .boxed()
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    prop::sample::select(Kind::ALL.to_vec()).prop_flat_map(arb_block)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn config_round_trips(cfg in arb_config()) {
        cfg.validate().unwrap();
        let text = cfg.to_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text.clone());
        prop_assert_eq!(schema_errors(&schema(), &text), Vec::<String>::new());
    }
}

#[test]
fn shipped_configs_round_trip() {
    let dir = common::repo_path("configs");
    let mut n = 0;
    for sub in ["", "smoke"] {
        for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap())
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
                n += 1;
            }
        }
    }
    assert!(n >= 20);
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(common::repo_path("docs/config.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn schema_errors(v: &jsonschema::Validator, text: &str) -> Vec<String> {
    let value: serde_json::Value = serde_json::from_str(text).unwrap();
    v.iter_errors(&value).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

#[test]
fn documented_schema_accepts_configs() {
    let v = schema();
    for sub in ["", "smoke"] {
        for entry in std::fs::read_dir(common::repo_path("configs").join(sub)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = std::fs::read_to_string(&path).unwrap();
                assert_eq!(schema_errors(&v, &text), Vec::<String>::new(), "{}", path.display());
                let canonical = ExperimentConfig::from_json(&text).unwrap().to_json();
                assert_eq!(schema_errors(&v, &canonical), Vec::<String>::new(), "{} re-serialized", path.display());
            }
        }
    }
    for kind in Kind::ALL {
        let text = ExperimentConfig::default_for(kind).to_json();
        assert_eq!(schema_errors(&v, &text), Vec::<String>::new(), "{}", kind.name());
    }
}

#[test]
fn documented_schema_rejects_what_the_parser_rejects() {
    let v = schema();
    for bad in [
        r#"{"kind": "expander"}"#,
        r#"{"kind": "teleport", "primes": [5]}"#,
        r#"{"kind": "weil", "primes": [5], "colour": 1}"#,
        r#"{"kind": "weil", "primes": [5], "alphas": [1.5]}"#,
        r#"{"kind": "incidence", "primes": [5], "incidence": {"dims": [7]}}"#,
        r#"{"kind": "multtable", "primes": [], "multtable": {"n_max": 0}}"#,
    ] {
        assert!(!schema_errors(&v, bad).is_empty(), "schema accepted {bad}");
        assert!(ExperimentConfig::from_json(bad).is_err(), "parser accepted {bad}");
    }
}

#[test]
fn reports_round_trip_through_json() {
    for (kind, path) in common::smoke_configs() {
        let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
        let report = run(&cfg).unwrap();
        let text = report_json(&report);
        assert_eq!(report_from_json(&text).unwrap(), report, "{}", kind.name());

        let dir = tempfile::tempdir().unwrap();
        let written = emit(&report, dir.path(), Format::Json).unwrap();
        let reloaded = report_from_json(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
        assert_eq!(reloaded, report, "{}", kind.name());
    }
}
