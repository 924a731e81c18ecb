//! Training-behaviour invariants on the synthetic sets: first-epoch descent,
//! stream-wiring isolation, and reproducibility of training runs.

use graph_sim::config::RunConfig;
use graph_sim::graph::NormalizationManifest;
use graph_sim::model::{
    class_weights_from_windows, epoch_order, GraphSimModel, ModelConfig,
};
use graph_sim::nn::{bce_with_logit, AdamState};
use graph_sim::pipeline::{prepare_inputs, train_and_evaluate};
use graph_sim::scene::{ObservationWindow, SpeedDefinition};
use graph_sim::synthetic::separable_dataset;

fn synthetic_config() -> RunConfig {
    let mut config = RunConfig::default();
    config.speed_definition = SpeedDefinition::Physical;
    config.model = ModelConfig::compact();
    config.train.learning_rate = 1e-3;
    config.train.epochs = 10;
    config.train.seed = 7;
    config.split.seed = 7;
    config
}

#[test]
fn first_epoch_training_loss_mostly_decreases() {
    let windows = separable_dataset(60, 7).unwrap();
    let config = synthetic_config();
    let manifest = NormalizationManifest::fit(&windows, config.speed_definition, 20.0);
    let refs: Vec<&ObservationWindow> = windows.iter().collect();
    let inputs = prepare_inputs(&refs, &manifest, &config).unwrap();
    let weights = class_weights_from_windows(&inputs).unwrap();

    let mut model = GraphSimModel::new(config.model, config.train.seed).unwrap();
    let mut adam = AdamState::new(config.train.learning_rate);
    let full_loss = |model: &GraphSimModel| -> f64 {
        inputs
            .iter()
            .map(|w| {
                let (_, cache) = model.forward(w).unwrap();
                bce_with_logit(cache.logit, w.label, weights).0
            })
            .sum::<f64>()
            / inputs.len() as f64
    };

    let order = epoch_order(config.train.seed, 0, inputs.len());
    let mut losses = vec![full_loss(&model)];
    for batch in order.chunks(config.train.batch_size) {
        model.zero_grad();
        for &idx in batch {
            let (_, cache) = model.forward(&inputs[idx]).unwrap();
            let (_, d_logit) = bce_with_logit(cache.logit, inputs[idx].label, weights);
            model.backward(&cache, d_logit / batch.len() as f64);
        }
        adam.step(&mut model.params_mut()).unwrap();
        losses.push(full_loss(&model));
    }

    let decreasing = losses.windows(2).filter(|w| w[1] < w[0]).count();
    let fraction = decreasing as f64 / (losses.len() - 1) as f64;
    assert!(
        fraction >= 0.8,
        "training loss decreased in only {:.0}% of first-epoch steps",
        fraction * 100.0
    );
}

#[test]
fn disabled_ego_stream_ignores_permuted_ego_dynamics() {
    let windows = separable_dataset(8, 3).unwrap();
    let mut config = synthetic_config();
    config.model.use_ego_dynamics = false;
    let manifest = NormalizationManifest::fit(&windows, config.speed_definition, 20.0);
    let refs: Vec<&ObservationWindow> = windows.iter().collect();
    let inputs = prepare_inputs(&refs, &manifest, &config).unwrap();
    let model = GraphSimModel::new(config.model, 5).unwrap();

    for input in &inputs {
        let (p_before, _) = model.forward(input).unwrap();
        let mut permuted = input.clone();
        if let Some(ego) = permuted.ego_dynamics.as_mut() {
            ego.reverse();
            for v in ego.iter_mut() {
                v.swap(0, 3);
            }
        }
        let (p_after, _) = model.forward(&permuted).unwrap();
        assert_eq!(p_before.to_bits(), p_after.to_bits());
    }
}

#[test]
fn identical_seeds_reproduce_training_exactly() {
    let windows = separable_dataset(24, 13).unwrap();
    let config = {
        let mut c = synthetic_config();
        c.train.epochs = 2;
        c
    };
    let a = train_and_evaluate(&windows, &config).unwrap();
    let b = train_and_evaluate(&windows, &config).unwrap();
    assert_eq!(a.test_metrics.accuracy, b.test_metrics.accuracy);
    for ((_, pa), (_, pb)) in a
        .test_metrics
        .pairs
        .iter()
        .zip(&b.test_metrics.pairs)
        .map(|(x, y)| ((x.0, x.1), (y.0, y.1)))
    {
        assert_eq!(pa, pb);
    }
    for (x, y) in a.model.params().iter().zip(b.model.params()) {
        assert_eq!(x.value, y.value);
    }
}
