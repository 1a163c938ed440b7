use stressgraph::ablation::{run_ablation, AblationConfig, Protocol};
use stressgraph::data::{load_dataset, write_dataset, ElectrodeLayout};
use stressgraph::graph::{fused_adjacency, structural_adjacency, GraphConfig};
use stressgraph::models::{run_experiment, train, Checkpoint, ModelConfig, TrainConfig};
use stressgraph::synth::{generate, SynthSpec};
use stressgraph::Execution;

fn small(n: usize, channels: usize, samples: usize) -> SynthSpec {
    SynthSpec {
        n_relaxed: n,
        n_stressed: n,
        channels,
        samples,
        ..SynthSpec::default()
    }
}

#[test]
fn dataset_round_trips_through_files() {
    let ds = generate(&small(3, 6, 50)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), &ds).unwrap();
    let layout_path = dir.path().join("layout.csv");
    std::fs::write(&layout_path, ds.layout.to_csv()).unwrap();
    let layout = ElectrodeLayout::load(&layout_path).unwrap();
    assert_eq!(layout, ds.layout);
    let back = load_dataset(&manifest, &layout).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn planted_pair_is_linked_far_more_often_in_stressed_trials() {
    let ds = generate(&small(100, 8, 640)).unwrap();
    let cfg = GraphConfig::default();
    let structural = structural_adjacency(&ds.layout, &cfg).unwrap();
    let mut linked = [0usize; 2];
    let mut background = [0usize; 2];
    for t in &ds.trials {
        let a = fused_adjacency(t, &structural, &cfg).unwrap();
        let planted = a.get(2, 5) - structural.get(2, 5) / 2.0;
        linked[t.label.index()] += usize::from(planted > 0.0);
        let other = a.get(0, 7) - structural.get(0, 7) / 2.0;
        background[t.label.index()] += usize::from(other > 0.0);
    }
    assert!(linked[1] >= 95, "stressed link rate {}/100", linked[1]);
    assert!(linked[0] <= 10, "relaxed link rate {}/100", linked[0]);
    assert!(
        background[1] <= 10 && background[0] <= 10,
        "background links {background:?}"
    );
}

#[test]
fn strong_signature_is_fitted_within_ten_epochs() {
    let spec = SynthSpec {
        samples: 640,
        signature_channels: vec![2, 5, 8, 11, 14, 17, 20, 23],
        signature_amplitude: 5.0,
        ..SynthSpec::default()
    };
    let ds = generate(&spec).unwrap();
    let outcome = train(
        &ModelConfig::stgcn().with_seed(1),
        &ds,
        &TrainConfig {
            seed: 1,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    assert_eq!(outcome.history.len(), 10);
    let last = outcome.history.last().unwrap();
    assert!(
        last.train_accuracy >= 0.9,
        "final train accuracy {}",
        last.train_accuracy
    );
    assert!(last.train_loss < outcome.history[0].train_loss);
}

#[test]
fn experiment_is_reproducible_and_checkpoint_restores_predictions() {
    let ds = generate(&small(10, 6, 160)).unwrap();
    let model = ModelConfig::stgcn().with_seed(4);
    let cfg = TrainConfig {
        epochs: 2,
        seed: 4,
        ..TrainConfig::default()
    };
    let a = run_experiment(&model, &ds, &cfg).unwrap();
    let b = run_experiment(
        &model,
        &ds,
        &TrainConfig {
            execution: Execution::Sequential,
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(a.test.scores, b.test.scores);
    assert_eq!(a.outcome.step_losses, b.outcome.step_losses);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    Checkpoint::new(&a.outcome.network, 6, 160).save(&path).unwrap();
    let restored = Checkpoint::load(&path).unwrap().into_network().unwrap();
    assert_eq!(restored.params(), a.outcome.network.params());
}

#[test]
fn region_ablation_covers_every_present_region() {
    let ds = generate(&small(8, 8, 160)).unwrap();
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let report = run_ablation(
        Protocol::RegionOnly,
        &ds,
        &ModelConfig::mlp(),
        &cfg,
        &[0, 1],
        &AblationConfig::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), ds.layout.regions().len());
    assert_eq!(report.seeds, vec![0, 1]);
    for row in &report.rows {
        let m = row.metrics.expect("every region trains");
        assert!((0.0..=1.0).contains(&m.accuracy));
        let delta = row.delta.unwrap();
        assert!((delta - (m.accuracy - report.baseline.accuracy)).abs() < 1e-12);
    }
}
