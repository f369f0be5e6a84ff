use std::collections::{BTreeSet, HashMap};

use thermopad::data::{generate_synthetic_dataset, Authenticity, Dataset, HandSide, Modality, Sample, SyntheticParams};
use thermopad::models::Family;
use thermopad::nn::{Hyperparams, InputShape, LayerSpec, Network};
use thermopad::protocol::{
    balance_real_pairs, closed_set_plans, make_closed_set_splits, make_open_set_splits, make_plans, run_experiment,
    train, EarlyStopping, ExperimentSettings, LabelMap, Mode, Prepared, Progress, Ratios, SplitMode, SplitPlan,
};
use thermopad::{Error, Tensor};

fn dataset(subjects: usize, images: usize) -> Dataset {
    generate_synthetic_dataset(&SyntheticParams {
        num_subjects: subjects,
        images_per_class_per_modality: images,
        image_size: (32, 32),
        ..SyntheticParams::default()
    })
    .unwrap()
}

fn subjects_of(d: &Dataset, ids: &[String]) -> BTreeSet<u32> {
    ids.iter().map(|id| d.get(id).unwrap().subject_id).collect()
}

#[test]
fn open_set_subsets_follow_ratio_arithmetic() {
    let d = dataset(10, 1);
    for plan in make_open_set_splits(&d, 10, Ratios::default(), 3).unwrap() {
        let sizes: Vec<usize> = plan
            .subsets()
            .iter()
            .map(|(_, ids)| subjects_of(&d, ids).len())
            .collect();
        assert_eq!(sizes, vec![6, 2, 2]);
    }
}

#[test]
fn open_set_plans_are_subject_disjoint_and_complete() {
    let d = dataset(20, 2);
    let plans = make_open_set_splits(&d, 10, Ratios::default(), 11).unwrap();
    assert_eq!(plans.len(), 10);
    let mut distinct_tests = BTreeSet::new();
    for plan in &plans {
        let [tr, va, te] = plan.subsets().map(|(_, ids)| subjects_of(&d, ids));
        assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
        let total = plan.train.len() + plan.val.len() + plan.test.len();
        assert_eq!(total, d.len());
        // a fake always travels with its subject
        for (name, ids) in plan.subsets() {
            let home = subjects_of(&d, ids);
            for id in ids
                .iter()
                .filter(|id| d.get(id).unwrap().authenticity == Authenticity::Fake)
            {
                assert!(
                    home.contains(&d.get(id).unwrap().subject_id),
                    "{id} leaked out of {name}"
                );
            }
        }
        distinct_tests.insert(te);
    }
    // independent resampling per plan
    assert!(distinct_tests.len() > 1);
}

#[test]
fn open_set_needs_five_subjects() {
    let d = dataset(4, 1);
    assert!(matches!(
        make_open_set_splits(&d, 1, Ratios::default(), 0),
        Err(Error::Protocol(_))
    ));
}

#[test]
fn splits_are_reproducible() {
    let d = dataset(8, 3);
    assert_eq!(
        make_open_set_splits(&d, 5, Ratios::default(), 9).unwrap(),
        make_open_set_splits(&d, 5, Ratios::default(), 9).unwrap()
    );
    assert_ne!(
        make_open_set_splits(&d, 5, Ratios::default(), 9).unwrap(),
        make_open_set_splits(&d, 5, Ratios::default(), 10).unwrap()
    );
    assert_eq!(
        closed_set_plans(&d, 3, Ratios::default(), 1).unwrap(),
        closed_set_plans(&d, 3, Ratios::default(), 1).unwrap()
    );
}

#[test]
fn split_plan_json_round_trip() {
    let d = dataset(6, 3);
    let plan = make_closed_set_splits(&d, Ratios::default(), 4).unwrap();
    assert_eq!(SplitPlan::from_json(&plan.to_json().unwrap()).unwrap(), plan);
    let v: serde_json::Value = serde_json::from_str(&plan.to_json().unwrap()).unwrap();
    for key in ["split_id", "mode", "seed", "train", "val", "test"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

fn class_counts(d: &Dataset, plan: &SplitPlan, ids: &[String]) -> HashMap<usize, usize> {
    let labels = LabelMap::new(plan.mode, d);
    let mut out = HashMap::new();
    for id in ids {
        let s = d.get(id).unwrap();
        if s.modality == Modality::Th {
            *out.entry(labels.label(s)).or_default() += 1;
        }
    }
    out
}

#[test]
fn closed_set_covers_every_class_in_every_subset() {
    let d = dataset(6, 5);
    for plan in closed_set_plans(&d, 4, Ratios::default(), 2).unwrap() {
        assert_eq!(plan.mode, SplitMode::ClosedSet);
        let mut seen = BTreeSet::new();
        for (name, ids) in plan.subsets() {
            let counts = class_counts(&d, &plan, ids);
            assert_eq!(counts.len(), d.num_classes() + 1, "{name}");
            for id in ids {
                assert!(seen.insert(id.clone()), "{id} is in two subsets");
            }
        }
        assert_eq!(seen.len(), d.len());
        // 5 images per class split 3/1/1
        for c in 0..d.num_classes() {
            let per: Vec<usize> = plan
                .subsets()
                .iter()
                .map(|(_, ids)| class_counts(&d, &plan, ids)[&c])
                .collect();
            assert_eq!(per, vec![3, 1, 1]);
        }
    }
}

#[test]
fn forty_five_images_split_27_9_9() {
    let d = generate_synthetic_dataset(&SyntheticParams {
        num_subjects: 2,
        images_per_class_per_modality: 45,
        image_size: (32, 32),
        both_hands: false,
        ..SyntheticParams::default()
    })
    .unwrap();
    let plan = make_closed_set_splits(&d, Ratios::default(), 0).unwrap();
    for c in 0..2 {
        let per: Vec<usize> = plan
            .subsets()
            .iter()
            .map(|(_, ids)| class_counts(&d, &plan, ids)[&c])
            .collect();
        assert_eq!(per, vec![27, 9, 9]);
    }
}

#[test]
fn small_class_is_named_in_the_error() {
    let d = dataset(3, 2);
    match make_closed_set_splits(&d, Ratios::default(), 0) {
        Err(Error::Protocol(msg)) => assert!(msg.contains("class 0"), "{msg}"),
        other => panic!("expected a protocol error, got {other:?}"),
    }
}

#[test]
fn plateau_at_three_stops_at_thirteen() {
    let mut s = EarlyStopping::new(10);
    let accs = [0.5, 0.6, 0.7];
    let mut stopped = None;
    for epoch in 1..=100 {
        let acc = accs.get(epoch - 1).copied().unwrap_or(0.7);
        if s.update(acc) == Progress::Stop {
            stopped = Some(epoch);
            break;
        }
    }
    assert_eq!(stopped, Some(13));
    assert_eq!(s.best_epoch(), 3);
}

/// Eight 4x4 thermal images: real ones are bright on the left, fakes on the
/// right.
fn toy_dataset() -> Dataset {
    let mut samples = Vec::new();
    for i in 0..8u32 {
        let fake = i >= 4;
        let data: Vec<f64> = (0..16)
            .map(|p| {
                let left = p % 4 < 2;
                let bright = left != fake;
                (if bright { 50_000.0 } else { 10_000.0 }) + 300.0 * (i * 16 + p) as f64 % 1_000.0
            })
            .collect();
        samples.push(Sample {
            sample_id: format!("t{i}"),
            subject_id: i % 4,
            hand_side: HandSide::Right,
            modality: Modality::Th,
            authenticity: if fake { Authenticity::Fake } else { Authenticity::Real },
            session: 0,
            class_id: (!fake).then_some(i as usize),
            pair_id: format!("p{i}"),
            image: Tensor::new(vec![4, 4, 1], data).unwrap(),
        });
    }
    Dataset::new(samples).unwrap()
}

fn toy_plan() -> SplitPlan {
    let ids: Vec<String> = (0..8).map(|i| format!("t{i}")).collect();
    SplitPlan {
        split_id: 0,
        mode: SplitMode::OpenSet,
        seed: 0,
        train: ids.clone(),
        val: ids.clone(),
        test: ids,
    }
}

fn toy_net(seed: u64) -> Network {
    Network::new(
        InputShape::new(4, 4, 1),
        vec![
            LayerSpec::Flatten,
            LayerSpec::FullyConnected { inputs: 16, outputs: 8 },
            LayerSpec::Relu,
            LayerSpec::FullyConnected { inputs: 8, outputs: 2 },
            LayerSpec::Softmax,
        ],
        seed,
    )
    .unwrap()
}

#[test]
fn training_fits_a_separable_toy_set() {
    let d = toy_dataset();
    let hp = Hyperparams {
        learning_rate: 0.05,
        batch_size: 3,
        patience: 20,
        max_epochs: 100,
        rng_seed: 1,
        ..Hyperparams::default()
    };
    let (net, history) = train(toy_net(4), &toy_plan(), &d, Modality::Th, &hp).unwrap();
    let prepared = Prepared::new(&d, Modality::Th, LabelMap::new(SplitMode::OpenSet, &d), (4, 4));
    assert_eq!(prepared.accuracy(&net, &(0..8).collect::<Vec<_>>()).unwrap(), 1.0);
    assert_eq!(history.best_val_acc(), 1.0);
    let best = history.best_val_acc();
    assert!(history.epochs.iter().all(|e| e.val_acc <= best));
    assert!(history.stopped_epoch - history.best_epoch <= hp.patience);
    assert_eq!(history.epochs.len(), history.stopped_epoch);

    let (net2, history2) = train(toy_net(4), &toy_plan(), &d, Modality::Th, &hp).unwrap();
    assert_eq!(history, history2);
    assert_eq!(net, net2);
}

#[test]
fn empty_subset_is_a_protocol_error() {
    let d = toy_dataset();
    let mut plan = toy_plan();
    plan.val.clear();
    let err = train(toy_net(0), &plan, &d, Modality::Th, &Hyperparams::default()).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)));
    // RGB has no samples at all in the toy set
    let err = train(toy_net(0), &toy_plan(), &d, Modality::Rgb, &Hyperparams::default()).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)));
}

fn quick_settings(mode: Mode, n_splits: usize) -> ExperimentSettings {
    let mut s = ExperimentSettings::new(mode, Family::VggMicro);
    s.input_size = (32, 32);
    s.channel_scale = 0.03;
    s.n_splits = n_splits;
    s.hp.max_epochs = 2;
    s.hp.patience = 1;
    s
}

#[test]
fn experiment_trains_one_model_per_split_and_modality() {
    let d = dataset(5, 3);
    let runs = run_experiment(&d, &quick_settings(Mode::Authenticity, 2)).unwrap();
    assert_eq!(runs.len(), 2);
    for run in &runs {
        assert_eq!(run.rgb.net.num_outputs(), 2);
        assert_eq!(run.th.net.num_outputs(), 2);
        assert_eq!(run.rgb.net.input_shape().channels, 3);
        assert_eq!(run.th.net.input_shape().channels, 1);
    }
    let runs = run_experiment(&d, &quick_settings(Mode::Identity, 1)).unwrap();
    assert_eq!(runs[0].th.net.num_outputs(), d.num_classes() + 1);
}

#[test]
fn experiment_is_deterministic() {
    let d = dataset(5, 3);
    let s = quick_settings(Mode::Authenticity, 2);
    let a = run_experiment(&d, &s).unwrap();
    let b = run_experiment(&d, &s).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.plan, y.plan);
        assert_eq!(x.rgb.history, y.rgb.history);
        assert_eq!(x.th.net, y.th.net);
    }
}

#[test]
fn experiment_needs_fakes() {
    let d = generate_synthetic_dataset(&SyntheticParams {
        num_subjects: 5,
        images_per_class_per_modality: 3,
        fake_images_per_class: 0,
        image_size: (32, 32),
        ..SyntheticParams::default()
    })
    .unwrap();
    let err = run_experiment(&d, &quick_settings(Mode::Authenticity, 1)).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)));
}

#[test]
fn balanced_plans_match_real_and_fake_counts_per_subset() {
    let d = dataset(10, 6);
    let plans = make_open_set_splits(&d, 4, Ratios::default(), 5).unwrap();
    let mut kept_sets = BTreeSet::new();
    for plan in &plans {
        let b = balance_real_pairs(plan, &d);
        assert_eq!(b, balance_real_pairs(plan, &d));
        for ((name, ids), (_, full)) in b.subsets().iter().zip(plan.subsets()) {
            let count = |a: Authenticity| ids.iter().filter(|id| d.get(id).unwrap().authenticity == a).count();
            assert_eq!(count(Authenticity::Real), count(Authenticity::Fake), "{name}");
            assert!(ids.iter().all(|id| full.contains(id)));
            let fakes = full
                .iter()
                .filter(|id| d.get(id).unwrap().authenticity == Authenticity::Fake)
                .count();
            assert_eq!(count(Authenticity::Fake), fakes);
            // both images of a kept pair stay together
            let pairs: BTreeSet<&str> = ids.iter().map(|id| d.get(id).unwrap().pair_id.as_str()).collect();
            assert_eq!(pairs.len() * 2, ids.len());
        }
        kept_sets.insert(b.train.clone());
    }
    assert!(kept_sets.len() > 1);
}

#[test]
fn authenticity_plans_are_balanced_only_on_request() {
    let d = dataset(6, 5);
    let mut settings = ExperimentSettings::new(Mode::Authenticity, Family::AlexMicro);
    settings.n_splits = 2;
    let full = make_plans(&d, &settings).unwrap();
    assert_eq!(full[0].train.len() + full[0].val.len() + full[0].test.len(), d.len());
    settings.balance = true;
    let balanced = make_plans(&d, &settings).unwrap();
    assert_eq!(
        balanced[0].train.len() + balanced[0].val.len() + balanced[0].test.len(),
        6 * 2 * 2 * 2 * 2
    );
}
