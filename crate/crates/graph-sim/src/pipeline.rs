//! End-to-end glue: windows -> pedestrian-level split -> normalization
//! manifest -> graph/dynamics inputs -> training -> metrics. The CLI and
//! the ablation harness are thin wrappers over these functions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::RunConfig;
use crate::eval::{
    compute_metrics, metrics_table_csv, stratified_split, AblationSpec, DynamicsVariant, EvalError,
    GraphVariant, MetricsReport, Split,
};
use crate::graph::NormalizationManifest;
use crate::model::{
    prepare_window, train, GraphSimModel, ModelError, TrainingLog, WindowInput,
    DECISION_THRESHOLD,
};
use crate::scene::ObservationWindow;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("no observation windows to work with")]
    NoWindows,
}

/// Labels per pedestrian (a pedestrian's windows all share its label).
pub fn pedestrian_labels(windows: &[ObservationWindow]) -> Vec<(String, bool)> {
    let mut labels: BTreeMap<String, bool> = BTreeMap::new();
    for w in windows {
        labels.entry(w.target_id.clone()).or_insert(w.label == 1);
    }
    labels.into_iter().collect()
}

/// Convert observation windows to model inputs under one configuration.
pub fn prepare_inputs(
    windows: &[&ObservationWindow],
    manifest: &NormalizationManifest,
    config: &RunConfig,
) -> Result<Vec<WindowInput>, PipelineError> {
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        out.push(prepare_window(
            w,
            manifest,
            &config.clustering,
            config.clustering_mode,
            config.speed_definition,
            &config.graph,
        )?);
    }
    Ok(out)
}

/// Score a model over prepared inputs at the standard decision threshold.
pub fn evaluate_model(
    model: &GraphSimModel,
    inputs: &[WindowInput],
) -> Result<MetricsReport, PipelineError> {
    let mut pairs = Vec::with_capacity(inputs.len());
    for input in inputs {
        let (p, _) = model.predict(input)?;
        pairs.push((p, input.label));
    }
    Ok(compute_metrics(&pairs, DECISION_THRESHOLD)?)
}

/// Everything a training run produces.
pub struct TrainedArtifacts {
    pub model: GraphSimModel,
    pub manifest: NormalizationManifest,
    pub log: TrainingLog,
    pub split: Split,
    pub train_metrics: MetricsReport,
    pub test_metrics: MetricsReport,
    pub config_hash: u64,
}

/// Pedestrian-level split, manifest fit on the training side only, then
/// train and score both sides.
pub fn train_and_evaluate(
    windows: &[ObservationWindow],
    config: &RunConfig,
) -> Result<TrainedArtifacts, PipelineError> {
    if windows.is_empty() {
        return Err(PipelineError::NoWindows);
    }
    let labels = pedestrian_labels(windows);
    let split = stratified_split(&labels, config.split.train_ratio, config.split.seed)?;

    let train_windows: Vec<&ObservationWindow> = windows
        .iter()
        .filter(|w| split.train.contains(&w.target_id))
        .collect();
    let test_windows: Vec<&ObservationWindow> = windows
        .iter()
        .filter(|w| split.test.contains(&w.target_id))
        .collect();

    let owned_train: Vec<ObservationWindow> =
        train_windows.iter().map(|w| (*w).clone()).collect();
    let manifest = NormalizationManifest::fit(
        &owned_train,
        config.speed_definition,
        config.graph.d_thresh,
    );

    let train_inputs = prepare_inputs(&train_windows, &manifest, config)?;
    let test_inputs = prepare_inputs(&test_windows, &manifest, config)?;

    let (model, log) = train(&train_inputs, config.model, &config.train)?;
    let train_metrics = evaluate_model(&model, &train_inputs)?;
    let test_metrics = evaluate_model(&model, &test_inputs)?;

    Ok(TrainedArtifacts {
        model,
        manifest,
        log,
        split,
        train_metrics,
        test_metrics,
        config_hash: config.hash(),
    })
}

/// Overlay a graph-modelling variant onto a configuration.
pub fn apply_graph_variant(config: &RunConfig, variant: GraphVariant) -> RunConfig {
    let mut out = config.clone();
    out.graph.edge_mode = variant.edge_mode();
    out.graph.node_features = variant.node_features();
    out.clustering_mode = variant.clustering_mode();
    out
}

/// Overlay a dynamics-subset variant onto a configuration.
pub fn apply_dynamics_variant(config: &RunConfig, variant: DynamicsVariant) -> RunConfig {
    let mut out = config.clone();
    let (use_ped, ped_fields, use_ego, ego_fields) = variant.streams();
    out.model.use_ped_dynamics = use_ped;
    out.model.ped_fields = ped_fields;
    out.model.use_ego_dynamics = use_ego;
    out.model.ego_fields = ego_fields;
    out
}

pub fn apply_ablation_spec(config: &RunConfig, spec: &AblationSpec) -> RunConfig {
    apply_dynamics_variant(&apply_graph_variant(config, spec.graph), spec.dynamics)
}

/// Which experiment matrix `ablate` reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationTable {
    /// Model comparison: the plain-graph baseline and the dynamics
    /// combinations of the full model.
    Models,
    /// Graph-modelling variants.
    GraphVariants,
    /// Dynamics-subset variants on the complete graph.
    Dynamics,
}

impl AblationTable {
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            2 => Some(AblationTable::Models),
            3 => Some(AblationTable::GraphVariants),
            4 => Some(AblationTable::Dynamics),
            _ => None,
        }
    }

    /// Row name plus the configuration overlay of each run in the table.
    pub fn rows(&self, base: &RunConfig) -> Vec<(String, RunConfig)> {
        match self {
            AblationTable::Models => {
                let both = DynamicsVariant::PedLocVelVehLocVel;
                let mut ped_only = apply_dynamics_variant(base, DynamicsVariant::PedLocVel);
                ped_only = apply_graph_variant(&ped_only, GraphVariant::Complete);
                let mut veh_only = apply_graph_variant(base, GraphVariant::Complete);
                veh_only.model.use_ped_dynamics = false;
                veh_only.model.use_ego_dynamics = true;
                vec![
                    (
                        "Social-STGCNN".to_string(),
                        apply_dynamics_variant(
                            &apply_graph_variant(base, GraphVariant::SocialStgcnnStyle),
                            both,
                        ),
                    ),
                    ("Graph+Ped.".to_string(), ped_only),
                    ("Graph+Veh.".to_string(), veh_only),
                    (
                        "Complete".to_string(),
                        apply_dynamics_variant(
                            &apply_graph_variant(base, GraphVariant::Complete),
                            both,
                        ),
                    ),
                ]
            }
            AblationTable::GraphVariants => GraphVariant::all()
                .into_iter()
                .map(|v| {
                    (
                        v.row_name().to_string(),
                        apply_dynamics_variant(
                            &apply_graph_variant(base, v),
                            DynamicsVariant::PedLocVelVehLocVel,
                        ),
                    )
                })
                .collect(),
            AblationTable::Dynamics => DynamicsVariant::all()
                .into_iter()
                .map(|v| {
                    (
                        v.row_name().to_string(),
                        apply_dynamics_variant(&apply_graph_variant(base, GraphVariant::Complete), v),
                    )
                })
                .collect(),
        }
    }
}

pub struct AblationRun {
    pub row_name: String,
    pub config_hash: u64,
    pub metrics: MetricsReport,
}

/// Train and score every variant of a table on the same window set.
pub fn run_ablation(
    table: AblationTable,
    windows: &[ObservationWindow],
    base: &RunConfig,
) -> Result<Vec<AblationRun>, PipelineError> {
    let mut runs = Vec::new();
    for (row_name, config) in table.rows(base) {
        let artifacts = train_and_evaluate(windows, &config)?;
        runs.push(AblationRun {
            row_name,
            config_hash: config.hash(),
            metrics: artifacts.test_metrics,
        });
    }
    Ok(runs)
}

pub fn ablation_csv(runs: &[AblationRun]) -> String {
    let rows: Vec<(String, MetricsReport)> = runs
        .iter()
        .map(|r| (r.row_name.clone(), r.metrics.clone()))
        .collect();
    metrics_table_csv(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ConfusionCounts;

    #[test]
    fn model_table_rows_toggle_the_right_knobs() {
        let base = RunConfig::default();
        let rows = AblationTable::Models.rows(&base);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].0, "Social-STGCNN");
        assert_eq!(
            rows[0].1.graph.edge_mode,
            crate::graph::EdgeMode::InverseDistance
        );
        assert_eq!(
            rows[0].1.graph.node_features,
            crate::graph::NodeFeatureMode::LocationsOnly
        );

        // Graph+Ped. keeps the pedestrian stream only; Graph+Veh. the ego
        // stream only; Complete keeps both.
        assert!(rows[1].1.model.use_ped_dynamics && !rows[1].1.model.use_ego_dynamics);
        assert!(!rows[2].1.model.use_ped_dynamics && rows[2].1.model.use_ego_dynamics);
        assert!(rows[3].1.model.use_ped_dynamics && rows[3].1.model.use_ego_dynamics);
        for (_, config) in &rows[1..] {
            assert_eq!(config.graph.edge_mode, crate::graph::EdgeMode::GraphSim);
            assert_eq!(
                config.clustering_mode,
                crate::clustering::ClusteringMode::Full
            );
        }
    }

    #[test]
    fn ablation_spec_overlays_both_axes() {
        let base = RunConfig::default();
        let spec = AblationSpec {
            graph: GraphVariant::SGraphRiClustNoOrient,
            dynamics: DynamicsVariant::PedVel,
        };
        assert_eq!(spec.id(), "s-graph+RI+clust-no-orient|ped-vel");
        let config = apply_ablation_spec(&base, &spec);
        assert_eq!(
            config.clustering_mode,
            crate::clustering::ClusteringMode::SkipOrientation
        );
        assert!(config.model.use_ped_dynamics);
        assert!(!config.model.ped_fields.location);
        assert!(config.model.ped_fields.velocity);
        assert!(!config.model.use_ego_dynamics);
    }

    #[test]
    fn ablation_csv_layout() {
        let report = MetricsReport {
            accuracy: 0.9,
            auc: Some(0.8),
            f1: 0.75,
            precision: 0.7,
            precision_undefined: false,
            confusion: ConfusionCounts::default(),
            pairs: vec![],
        };
        let runs = vec![AblationRun {
            row_name: "Complete".into(),
            config_hash: 1,
            metrics: report,
        }];
        let csv = ablation_csv(&runs);
        assert_eq!(
            csv,
            "variant,acc,auc,f1,prec\nComplete,0.9000,0.8000,0.7500,0.7000\n"
        );
    }
}
