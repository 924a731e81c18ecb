//! Pedestrian-level data splitting, binary classification metrics, and the
//! ablation variant matrix.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ClusteringMode;
use crate::graph::{EdgeMode, NodeFeatureMode};
use crate::model::DynamicsFields;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class with fewer than 2 members cannot be split (positives {positives}, negatives {negatives})")]
    TooFewMembers { positives: usize, negatives: usize },
    #[error("both classes must be present for a stratified split")]
    SingleClass,
    #[error("no (probability, label) pairs to score")]
    Empty,
    #[error("unknown ablation variant id: {0}")]
    UnknownVariant(String),
}

/// Pedestrian-level train/test split; windows never straddle the boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Per-class seeded shuffle then a ratio split. The train share is rounded
/// half-up, so exact ties favour the training side.
pub fn stratified_split(
    labelled_ids: &[(String, bool)],
    train_ratio: f64,
    seed: u64,
) -> Result<Split, EvalError> {
    let mut positives: Vec<String> = labelled_ids
        .iter()
        .filter(|(_, y)| *y)
        .map(|(id, _)| id.clone())
        .collect();
    let mut negatives: Vec<String> = labelled_ids
        .iter()
        .filter(|(_, y)| !*y)
        .map(|(id, _)| id.clone())
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::SingleClass);
    }
    if positives.len() < 2 || negatives.len() < 2 {
        return Err(EvalError::TooFewMembers {
            positives: positives.len(),
            negatives: negatives.len(),
        });
    }
    positives.sort();
    negatives.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let take = |n: usize| -> usize { (train_ratio * n as f64 + 0.5).floor() as usize };
    let (pos_train, pos_test) = positives.split_at(take(positives.len()));
    let (neg_train, neg_test) = negatives.split_at(take(negatives.len()));

    let mut train: Vec<String> = pos_train.to_vec();
    train.extend_from_slice(neg_train);
    let mut test: Vec<String> = pos_test.to_vec();
    test.extend_from_slice(neg_test);
    train.sort();
    test.sort();
    Ok(Split { train, test })
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

/// Scores plus confusion counts; the raw pairs are kept so every metric can
/// be recomputed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Undefined (None) when only one class is present.
    pub auc: Option<f64>,
    pub f1: f64,
    pub precision: f64,
    /// Precision had zero predicted positives and was reported as 0.
    pub precision_undefined: bool,
    pub confusion: ConfusionCounts,
    pub pairs: Vec<(f64, u8)>,
}

/// Accuracy, precision, F1 at the given threshold (inclusive on the
/// positive side) plus trapezoidal ROC AUC over all distinct score cuts.
pub fn compute_metrics(pairs: &[(f64, u8)], threshold: f64) -> Result<MetricsReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut confusion = ConfusionCounts::default();
    for (p, y) in pairs {
        let predicted = *p >= threshold;
        match (predicted, *y == 1) {
            (true, true) => confusion.tp += 1,
            (true, false) => confusion.fp += 1,
            (false, true) => confusion.fn_ += 1,
            (false, false) => confusion.tn += 1,
        }
    }
    let total = pairs.len() as f64;
    let accuracy = (confusion.tp + confusion.tn) as f64 / total;
    let predicted_pos = confusion.tp + confusion.fp;
    let precision_undefined = predicted_pos == 0;
    let precision = if precision_undefined {
        0.0
    } else {
        confusion.tp as f64 / predicted_pos as f64
    };
    let actual_pos = confusion.tp + confusion.fn_;
    let recall = if actual_pos == 0 {
        0.0
    } else {
        confusion.tp as f64 / actual_pos as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let auc = roc_auc(pairs);
    Ok(MetricsReport {
        accuracy,
        auc,
        f1,
        precision,
        precision_undefined,
        confusion,
        pairs: pairs.to_vec(),
    })
}

/// Trapezoidal area under the ROC curve built from every distinct score.
/// Ties contribute half concordance, matching the Mann-Whitney convention.
/// None when a class is missing.
pub fn roc_auc(pairs: &[(f64, u8)]) -> Option<f64> {
    let n_pos = pairs.iter().filter(|(_, y)| *y == 1).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut sorted: Vec<(f64, u8)> = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let mut auc = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tp, mut prev_fp) = (0usize, 0usize);
    let mut prev_score = f64::INFINITY;
    for (score, label) in sorted {
        if score != prev_score {
            auc += trapezoid(prev_fp, fp, prev_tp, tp, n_pos, n_neg);
            prev_tp = tp;
            prev_fp = fp;
            prev_score = score;
        }
        if label == 1 {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    auc += trapezoid(prev_fp, fp, prev_tp, tp, n_pos, n_neg);
    Some(auc)
}

fn trapezoid(fp0: usize, fp1: usize, tp0: usize, tp1: usize, n_pos: usize, n_neg: usize) -> f64 {
    let x0 = fp0 as f64 / n_neg as f64;
    let x1 = fp1 as f64 / n_neg as f64;
    let y0 = tp0 as f64 / n_pos as f64;
    let y1 = tp1 as f64 / n_pos as f64;
    (x1 - x0) * (y0 + y1) / 2.0
}

/// Graph-side ablation variants (the rows of the graph-modelling table).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphVariant {
    SocialStgcnnStyle,
    SGraphRi,
    SGraphRiClustNoOrient,
    Complete,
}

impl GraphVariant {
    pub fn id(&self) -> &'static str {
        match self {
            GraphVariant::SocialStgcnnStyle => "social-stgcnn-style",
            GraphVariant::SGraphRi => "s-graph+RI",
            GraphVariant::SGraphRiClustNoOrient => "s-graph+RI+clust-no-orient",
            GraphVariant::Complete => "complete",
        }
    }

    pub fn from_id(id: &str) -> Result<Self, EvalError> {
        match id {
            "social-stgcnn-style" => Ok(GraphVariant::SocialStgcnnStyle),
            "s-graph+RI" => Ok(GraphVariant::SGraphRi),
            "s-graph+RI+clust-no-orient" => Ok(GraphVariant::SGraphRiClustNoOrient),
            "complete" => Ok(GraphVariant::Complete),
            other => Err(EvalError::UnknownVariant(other.to_string())),
        }
    }

    /// Table row label in the published layout.
    pub fn row_name(&self) -> &'static str {
        match self {
            GraphVariant::SocialStgcnnStyle => "Social-STGCNN",
            GraphVariant::SGraphRi => "S-Graph+RI",
            GraphVariant::SGraphRiClustNoOrient => "S-Graph+RI+Clust. w/o Ped. Orient.",
            GraphVariant::Complete => "S-Graph+RI+Clust.",
        }
    }

    pub fn edge_mode(&self) -> EdgeMode {
        match self {
            GraphVariant::SocialStgcnnStyle => EdgeMode::InverseDistance,
            _ => EdgeMode::GraphSim,
        }
    }

    pub fn clustering_mode(&self) -> ClusteringMode {
        match self {
            GraphVariant::SocialStgcnnStyle | GraphVariant::SGraphRi => ClusteringMode::Disabled,
            GraphVariant::SGraphRiClustNoOrient => ClusteringMode::SkipOrientation,
            GraphVariant::Complete => ClusteringMode::Full,
        }
    }

    pub fn node_features(&self) -> NodeFeatureMode {
        match self {
            GraphVariant::SocialStgcnnStyle => NodeFeatureMode::LocationsOnly,
            _ => NodeFeatureMode::Full,
        }
    }

    pub fn all() -> [GraphVariant; 4] {
        [
            GraphVariant::SocialStgcnnStyle,
            GraphVariant::SGraphRi,
            GraphVariant::SGraphRiClustNoOrient,
            GraphVariant::Complete,
        ]
    }
}

/// Dynamics-side ablation variants (the rows of the dynamics table). All
/// run on the complete graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsVariant {
    PedLoc,
    PedVel,
    PedLocVel,
    PedLocVelVehLoc,
    PedLocVelVehVel,
    PedLocVelVehLocVel,
}

impl DynamicsVariant {
    pub fn id(&self) -> &'static str {
        match self {
            DynamicsVariant::PedLoc => "ped-loc",
            DynamicsVariant::PedVel => "ped-vel",
            DynamicsVariant::PedLocVel => "ped-loc/vel",
            DynamicsVariant::PedLocVelVehLoc => "+veh-loc",
            DynamicsVariant::PedLocVelVehVel => "+veh-vel",
            DynamicsVariant::PedLocVelVehLocVel => "+veh-loc/vel",
        }
    }

    pub fn from_id(id: &str) -> Result<Self, EvalError> {
        match id {
            "ped-loc" => Ok(DynamicsVariant::PedLoc),
            "ped-vel" => Ok(DynamicsVariant::PedVel),
            "ped-loc/vel" => Ok(DynamicsVariant::PedLocVel),
            "+veh-loc" => Ok(DynamicsVariant::PedLocVelVehLoc),
            "+veh-vel" => Ok(DynamicsVariant::PedLocVelVehVel),
            "+veh-loc/vel" => Ok(DynamicsVariant::PedLocVelVehLocVel),
            other => Err(EvalError::UnknownVariant(other.to_string())),
        }
    }

    pub fn row_name(&self) -> &'static str {
        match self {
            DynamicsVariant::PedLoc => "Ped. loc.",
            DynamicsVariant::PedVel => "Ped. vel.",
            DynamicsVariant::PedLocVel => "Ped. loc./vel.",
            DynamicsVariant::PedLocVelVehLoc => "Ped. loc./vel. + Veh. loc.",
            DynamicsVariant::PedLocVelVehVel => "Ped. loc./vel. + Veh. vel.",
            DynamicsVariant::PedLocVelVehLocVel => "Ped. loc./vel. + Veh. loc./vel.",
        }
    }

    /// (use_ped, ped_fields, use_ego, ego_fields)
    pub fn streams(&self) -> (bool, DynamicsFields, bool, DynamicsFields) {
        let loc = DynamicsFields {
            location: true,
            velocity: false,
        };
        let vel = DynamicsFields {
            location: false,
            velocity: true,
        };
        let both = DynamicsFields {
            location: true,
            velocity: true,
        };
        match self {
            DynamicsVariant::PedLoc => (true, loc, false, both),
            DynamicsVariant::PedVel => (true, vel, false, both),
            DynamicsVariant::PedLocVel => (true, both, false, both),
            DynamicsVariant::PedLocVelVehLoc => (true, both, true, loc),
            DynamicsVariant::PedLocVelVehVel => (true, both, true, vel),
            DynamicsVariant::PedLocVelVehLocVel => (true, both, true, both),
        }
    }

    pub fn all() -> [DynamicsVariant; 6] {
        [
            DynamicsVariant::PedLoc,
            DynamicsVariant::PedVel,
            DynamicsVariant::PedLocVel,
            DynamicsVariant::PedLocVelVehLoc,
            DynamicsVariant::PedLocVelVehVel,
            DynamicsVariant::PedLocVelVehLocVel,
        ]
    }
}

/// One ablation run: a graph variant paired with a dynamics subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub graph: GraphVariant,
    pub dynamics: DynamicsVariant,
}

impl AblationSpec {
    pub fn id(&self) -> String {
        format!("{}|{}", self.graph.id(), self.dynamics.id())
    }
}

/// CSV rendering of metric rows in the published table layout.
pub fn metrics_table_csv(rows: &[(String, MetricsReport)]) -> String {
    let mut out = String::from("variant,acc,auc,f1,prec\n");
    for (name, report) in rows {
        let auc = report
            .auc
            .map(|a| format!("{a:.4}"))
            .unwrap_or_else(|| "undefined".into());
        out.push_str(&format!(
            "{},{:.4},{},{:.4},{:.4}\n",
            name, report.accuracy, auc, report.f1, report.precision
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_arithmetic() {
        let ids: Vec<(String, bool)> = (0..10)
            .map(|i| (format!("p{i}"), true))
            .chain((0..20).map(|i| (format!("n{i}"), false)))
            .collect();
        let split = stratified_split(&ids, 0.7, 1).unwrap();
        let pos_train = split.train.iter().filter(|i| i.starts_with('p')).count();
        let neg_train = split.train.iter().filter(|i| i.starts_with('n')).count();
        assert_eq!(pos_train, 7);
        assert_eq!(neg_train, 14);
        assert_eq!(split.test.len(), 9);
    }

    #[test]
    fn split_matches_published_counts() {
        let ids: Vec<(String, bool)> = (0..149)
            .map(|i| (format!("c{i:03}"), true))
            .chain((0..570).map(|i| (format!("n{i:03}"), false)))
            .collect();
        let split = stratified_split(&ids, 0.7, 7).unwrap();
        let pos_train = split.train.iter().filter(|i| i.starts_with('c')).count();
        let neg_train = split.train.iter().filter(|i| i.starts_with('n')).count();
        assert_eq!((pos_train, 149 - pos_train), (104, 45));
        assert_eq!((neg_train, 570 - neg_train), (399, 171));
    }

    #[test]
    fn split_is_deterministic_and_leak_free() {
        let ids: Vec<(String, bool)> = (0..30)
            .map(|i| (format!("id{i}"), i % 3 == 0))
            .collect();
        let a = stratified_split(&ids, 0.7, 99).unwrap();
        let b = stratified_split(&ids, 0.7, 99).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        for id in &a.train {
            assert!(!a.test.contains(id));
        }
        assert_eq!(a.train.len() + a.test.len(), 30);
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let ids = vec![
            ("a".to_string(), true),
            ("b".to_string(), false),
            ("c".to_string(), false),
        ];
        assert!(matches!(
            stratified_split(&ids, 0.7, 1),
            Err(EvalError::TooFewMembers { .. })
        ));
    }

    #[test]
    fn perfect_separation_scores_one() {
        let pairs = vec![(0.9, 1), (0.8, 1), (0.2, 0), (0.1, 0)];
        let m = compute_metrics(&pairs, 0.5).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.precision, 1.0);
    }

    #[test]
    fn all_negative_predictor_on_imbalance() {
        // 1:3 imbalance, predictor always says negative.
        let pairs = vec![(0.1, 1), (0.1, 0), (0.1, 0), (0.1, 0)];
        let m = compute_metrics(&pairs, 0.5).unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.precision, 0.0);
        assert!(m.precision_undefined);
    }

    #[test]
    fn confusion_arithmetic() {
        // TP=3, FP=1, FN=2, TN=4.
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n((0.9, 1u8), 3));
        pairs.push((0.9, 0));
        pairs.extend(std::iter::repeat_n((0.1, 1u8), 2));
        pairs.extend(std::iter::repeat_n((0.1, 0u8), 4));
        let m = compute_metrics(&pairs, 0.5).unwrap();
        assert_eq!(m.confusion.tp, 3);
        assert_eq!(m.confusion.fp, 1);
        assert_eq!(m.confusion.fn_, 2);
        assert_eq!(m.confusion.tn, 4);
        assert!((m.precision - 0.75).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.accuracy - 0.7).abs() < 1e-12);
    }

    #[test]
    fn auc_single_class_is_undefined() {
        let pairs = vec![(0.3, 1), (0.9, 1)];
        let m = compute_metrics(&pairs, 0.5).unwrap();
        assert!(m.auc.is_none());
        assert_eq!(m.accuracy, 0.5);
    }

    #[test]
    fn report_is_recomputable_from_stored_pairs() {
        let pairs = vec![(0.9, 1), (0.4, 0), (0.6, 0), (0.7, 1), (0.2, 0)];
        let first = compute_metrics(&pairs, 0.5).unwrap();
        let second = compute_metrics(&first.pairs, 0.5).unwrap();
        assert_eq!(first.accuracy, second.accuracy);
        assert_eq!(first.auc, second.auc);
        assert_eq!(first.f1, second.f1);
        assert_eq!(first.precision, second.precision);
    }

    /// Exhaustive pairwise-concordance oracle.
    fn auc_oracle(pairs: &[(f64, u8)]) -> f64 {
        let pos: Vec<f64> = pairs.iter().filter(|(_, y)| *y == 1).map(|(p, _)| *p).collect();
        let neg: Vec<f64> = pairs.iter().filter(|(_, y)| *y == 0).map(|(p, _)| *p).collect();
        let mut total = 0.0;
        for p in &pos {
            for n in &neg {
                total += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        total / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for round in 0..30 {
            let n = rng.random_range(5..200);
            let pairs: Vec<(f64, u8)> = (0..n)
                .map(|_| {
                    // Coarse scores force plenty of ties.
                    let score = (rng.random_range(0.0f64..1.0) * 10.0).round() / 10.0;
                    (score, rng.random_range(0..2) as u8)
                })
                .collect();
            let n_pos = pairs.iter().filter(|(_, y)| *y == 1).count();
            if n_pos == 0 || n_pos == pairs.len() {
                continue;
            }
            let fast = roc_auc(&pairs).unwrap();
            let slow = auc_oracle(&pairs);
            assert!((fast - slow).abs() < 1e-9, "round {round}: {fast} vs {slow}");
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<(f64, u8)> = (0..100)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0..2) as u8))
            .collect();
        let base = roc_auc(&pairs).unwrap();
        let squashed: Vec<(f64, u8)> = pairs
            .iter()
            .map(|(p, y)| (1.0 / (1.0 + (-5.0 * p).exp()), *y))
            .collect();
        assert!((roc_auc(&squashed).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn random_predictor_aucs_near_half() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<(f64, u8)> = (0..10_000)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0..2) as u8))
            .collect();
        let auc = roc_auc(&pairs).unwrap();
        assert!((auc - 0.5).abs() < 0.05, "auc {auc}");
    }

    #[test]
    fn variant_mappings() {
        let social = GraphVariant::SocialStgcnnStyle;
        assert_eq!(social.edge_mode(), EdgeMode::InverseDistance);
        assert_eq!(social.clustering_mode(), ClusteringMode::Disabled);
        assert_eq!(social.node_features(), NodeFeatureMode::LocationsOnly);

        let complete = GraphVariant::Complete;
        assert_eq!(complete.edge_mode(), EdgeMode::GraphSim);
        assert_eq!(complete.clustering_mode(), ClusteringMode::Full);

        let (use_ped, ped_fields, use_ego, _) = DynamicsVariant::PedLoc.streams();
        assert!(use_ped && !use_ego);
        assert!(ped_fields.location && !ped_fields.velocity);

        for v in GraphVariant::all() {
            assert_eq!(GraphVariant::from_id(v.id()).unwrap(), v);
        }
        for v in DynamicsVariant::all() {
            assert_eq!(DynamicsVariant::from_id(v.id()).unwrap(), v);
        }
        assert!(GraphVariant::from_id("bogus").is_err());
    }
}
