use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slim_core::binarizer::{FeatureSpec, RawColumn, RawTable};
use slim_core::dataset::f1_score;
use slim_core::evaluation::{best_single_swap, brute_force_best_ruleset, planted_generator};
use slim_core::localization::{FaultModel, TrainingConfig, TrainingInput};
use slim_core::logs::{LogFeatureFrame, TemplateBase, TimestampFormat};
use slim_core::selection::{select_rule_set_traced, StepNote};
use slim_core::{par, BinaryDataset, GenerationConfig, ObjectiveContext, Rule, SelectionConfig};

fn sorted(mut rules: Vec<Rule>) -> Vec<Rule> {
    rules.sort();
    rules
}

#[test]
fn noiseless_planted_dnf_is_recovered_exactly() {
    for seed in 0..5 {
        let planted = planted_generator(seed, 4000, 30, 30.0, 0.0).unwrap();
        let sel = SelectionConfig { max_rules: 4, ..Default::default() };
        let out = select_rule_set_traced(&planted.dataset, &sel, &GenerationConfig::default()).unwrap();
        assert_eq!(sorted(out.rule_set.rules().to_vec()), sorted(planted.dnf.clone()), "seed {seed}");
        assert_eq!(f1_score(&planted.dataset, &out.rule_set).unwrap(), 1.0);
    }
}

#[test]
fn selection_is_identical_for_any_worker_count() {
    let planted = planted_generator(7, 3000, 40, 20.0, 0.1).unwrap();
    let sel = SelectionConfig::default();
    let gen = GenerationConfig { max_len: 4, ..Default::default() };
    let run = |w| par::with_workers(Some(w), || select_rule_set_traced(&planted.dataset, &sel, &gen).unwrap());
    let one = run(1);
    for w in [2, 3, 8] {
        let other = run(w);
        assert_eq!(one.rule_set, other.rule_set);
        assert_eq!(one.steps, other.steps);
    }
}

fn small_instance(seed: u64) -> BinaryDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(20..=120);
        let d = rng.gen_range(3..=8);
        let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..d).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let labels: Vec<bool> = rows.iter().map(|r| (r[0] && r[1]) ^ rng.gen_bool(0.1)).collect();
        if labels.iter().any(|&b| b) {
            return BinaryDataset::from_rows(&rows, &labels).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn never_beats_the_optimum_and_admits_no_improving_swap(seed in 0u64..1_000_000, k in 1usize..=2, l in 1usize..=3) {
        let data = small_instance(seed);
        let sel = SelectionConfig { max_rules: k, ..Default::default() };
        let gen = GenerationConfig { max_len: l, ..Default::default() };
        let set = select_rule_set_traced(&data, &sel, &gen).unwrap().rule_set;
        let f1 = f1_score(&data, &set).unwrap();
        let (_, opt) = brute_force_best_ruleset(&data, k, l).unwrap();
        prop_assert!(f1 <= opt + 1e-12);
        let swap = best_single_swap(&data, set.rules(), l).unwrap();
        prop_assert!(swap.is_none_or(|s| s.2 <= f1 + 1e-12));
    }

    #[test]
    fn accepted_rules_raise_the_distorted_objective(seed in 0u64..1_000_000) {
        let data = small_instance(seed);
        let sel = SelectionConfig { max_rules: 4, refine_swaps: false, ..Default::default() };
        let out = select_rule_set_traced(&data, &sel, &GenerationConfig { max_len: 3, ..Default::default() }).unwrap();
        let mut accepted = Vec::new();
        for step in &out.steps {
            if !step.accepted {
                continue;
            }
            let rule = step.candidate.clone().unwrap();
            let ctx = ObjectiveContext::with_rules(&data, &accepted, step.alpha).unwrap();
            let gain = ctx.distorted_gain(&rule).unwrap();
            prop_assert!((gain - step.distorted_gain).abs() < 1e-9);
            match step.note {
                StepNote::AcceptedFirstCover => prop_assert!(accepted.is_empty()),
                _ => prop_assert!(gain > 0.0),
            }
            accepted.push(rule);
        }
        prop_assert_eq!(accepted, out.rule_set.rules().to_vec());
    }
}

#[test]
fn raw_metrics_to_ranked_services() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 2000;
    let mut cpu = Vec::new();
    let mut latency = Vec::new();
    let mut zone = Vec::new();
    let mut services = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let fault = i % 40 == 0;
        cpu.push(Some(if fault { rng.gen_range(90.0..100.0) } else { rng.gen_range(0.0..80.0) }));
        latency.push(if i % 97 == 5 { None } else { Some(rng.gen_range(1.0..50.0)) });
        zone.push(Some(["east", "west"][i % 2].to_string()));
        services.push(format!("svc{}", i % 3));
        labels.push(fault.then(|| "cpu_hog".to_string()));
    }
    let table = RawTable::new(vec![
        RawColumn::numeric("cpu", cpu),
        RawColumn::numeric("latency", latency),
        RawColumn::categorical("zone", zone),
    ])
    .unwrap();
    let specs = [FeatureSpec::numeric("cpu", 100), FeatureSpec::numeric("latency", 100), FeatureSpec::categorical("zone")];
    let config = TrainingConfig { bins: 100, selection: SelectionConfig::default(), generation: GenerationConfig::default() };
    let input =
        TrainingInput { table: &table, specs: &specs, services: &services, fault_labels: &labels, fault_types: None };
    let model = FaultModel::train(input, &config, "hash".into()).unwrap();
    // Small early distortion weights favour several precise rules over one
    // broad one, so only the union is pinned down.
    let rules = &model.fault_types["cpu_hog"];
    assert!(rules.iter().all(|r| r.precision == 1.0 && r.description.starts_with("cpu > ")));
    let data = model.binarization.transform(&table).unwrap();
    let positives = slim_core::SampleSet::from_indices(n, (0..n).filter(|i| i % 40 == 0));
    let f1 = f1_score(&data.relabel(positives).unwrap(), &model.rule_set("cpu_hog").unwrap()).unwrap();
    assert_eq!(f1, 1.0);

    let restored = FaultModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(restored, model);

    let window = RawTable::new(vec![
        RawColumn::numeric("cpu", vec![Some(10.0), Some(99.0), Some(20.0)]),
        RawColumn::numeric("latency", vec![Some(3.0); 3]),
        RawColumn::categorical("zone", vec![Some("east".into()); 3]),
    ])
    .unwrap();
    let q = restored.window(&window, vec!["svc0".into(), "svc2".into(), "svc1".into()]).unwrap();
    let report = restored.localize(&q).unwrap();
    assert!(!report.no_signal);
    assert_eq!(report.service_ranking.names()[0], "svc2");
    assert_eq!(report.explanations[0].services.keys().collect::<Vec<_>>(), ["svc2"]);
}

#[test]
fn novel_log_lines_become_interval_counts() {
    let normal = ["connected to db 10.0.0.1", "connected to db 10.0.0.2", "served page 12 in 4 ms"];
    let base = TemplateBase::build(normal.iter().copied(), 4, 0.5).unwrap();
    assert_eq!(base.len(), 2);
    let online = [
        "2024-03-01T10:00:01Z connected to db 10.0.0.9",
        "2024-03-01T10:00:30Z out of memory in worker 7",
        "2024-03-01T10:01:10Z out of memory in worker 8",
        "2024-03-01T10:01:20Z segfault at address 0x10",
    ];
    let frame = LogFeatureFrame::aggregate(&base, &online, 60, &TimestampFormat::Iso8601).unwrap();
    let rows: Vec<(usize, usize, usize)> =
        frame.intervals.iter().map(|c| (c.total, c.unmatched, c.distinct_new)).collect();
    assert_eq!(rows, [(2, 1, 1), (2, 2, 2)]);
    assert_eq!(frame.skipped, 0);
}
