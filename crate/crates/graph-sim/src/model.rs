//! The crossing-action predictor: two spatial graph convolutions per frame,
//! a temporal convolution over the window, PReLU activations, three LSTMs
//! (graph embeddings, pedestrian dynamics, ego dynamics), additive temporal
//! attention over the concatenated hidden states, and a logistic head.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{cluster_frame, ClusteringError, ClusteringMode, ClusteringParams};
use crate::graph::{assemble_sequence, GraphConfig, GraphError, GraphTensors};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::layers::{
    Attention, AttentionCache, Dense, DenseCache, GraphConv, GraphConvCache, Lstm, LstmSeqCache,
    PRelu, PReluCache, Parameter, TemporalConv, TemporalConvCache,
};
use crate::nn::loss::{bce_with_logit, ClassWeights};
use crate::nn::tensor::Tensor;
use crate::nn::{sigmoid, AdamState};
use crate::scene::{compute_velocity, ObservationWindow, RoadUser, SceneError, SpeedDefinition};

/// Velocity components are scaled by this factor so they sit in the same
/// order of magnitude as global coordinates.
pub const VELOCITY_SCALE: f64 = 1000.0;

/// Probability at or above this maps to the positive class.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("clustering error: {0}")]
    Clustering(#[from] ClusteringError),
    #[error("scene error: {0}")]
    Scene(#[from] SceneError),
    #[error("dynamics undefined: {0}")]
    Dynamics(String),
    #[error("target pedestrian is not at node index 0 (found {0})")]
    TargetNotFirst(String),
    #[error("model input missing the {0} dynamics stream")]
    MissingStream(&'static str),
    #[error(
        "training set must contain both classes: {positive} positive, {negative} negative windows"
    )]
    SingleClass { positive: usize, negative: usize },
    #[error("checkpoint is missing parameter {0}")]
    MissingParameter(String),
    #[error("checkpoint parameter {name} has shape {got:?}, expected {want:?}")]
    ParameterShape {
        name: String,
        got: Vec<usize>,
        want: Vec<usize>,
    },
    #[error("checkpoint manifest does not match the builder manifest")]
    ManifestMismatch,
    #[error("optimizer error: {0}")]
    Optimizer(#[from] crate::nn::AdamError),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Per-frame dynamics sample: [x, y, 1000 vx, 1000 vy].
pub type DynamicsVector = [f64; 4];

/// Which components of a dynamics stream stay active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsFields {
    pub location: bool,
    pub velocity: bool,
}

impl Default for DynamicsFields {
    fn default() -> Self {
        DynamicsFields {
            location: true,
            velocity: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Width after the first spatial convolution.
    pub spatial_hidden: usize,
    /// Graph output dimension (the target pedestrian embedding width).
    pub graph_output: usize,
    pub graph_lstm_hidden: usize,
    pub ped_lstm_hidden: usize,
    pub ego_lstm_hidden: usize,
    pub attention_dim: usize,
    pub use_ped_dynamics: bool,
    pub use_ego_dynamics: bool,
    pub ped_fields: DynamicsFields,
    pub ego_fields: DynamicsFields,
    /// Subtract each stream's first-frame position so dynamics become
    /// window-relative (positions are global by default).
    pub recenter_dynamics: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            spatial_hidden: 128,
            graph_output: 512,
            graph_lstm_hidden: 256,
            ped_lstm_hidden: 64,
            ego_lstm_hidden: 64,
            attention_dim: 64,
            use_ped_dynamics: true,
            use_ego_dynamics: true,
            ped_fields: DynamicsFields::default(),
            ego_fields: DynamicsFields::default(),
            recenter_dynamics: false,
        }
    }
}

impl ModelConfig {
    /// A small configuration for synthetic-scale runs and tests.
    pub fn compact() -> Self {
        ModelConfig {
            spatial_hidden: 16,
            graph_output: 32,
            graph_lstm_hidden: 24,
            ped_lstm_hidden: 12,
            ego_lstm_hidden: 12,
            attention_dim: 12,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.graph_output == 0
            || self.spatial_hidden == 0
            || self.graph_lstm_hidden == 0
            || self.attention_dim == 0
        {
            return Err(ModelError::InvalidConfig(
                "layer widths must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn concat_dim(&self) -> usize {
        let mut dim = self.graph_lstm_hidden;
        if self.use_ped_dynamics {
            dim += self.ped_lstm_hidden;
        }
        if self.use_ego_dynamics {
            dim += self.ego_lstm_hidden;
        }
        dim
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Weight the positive class by the negative-to-positive window ratio.
    pub class_weighting: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-6,
            batch_size: 16,
            epochs: 10,
            seed: 42,
            class_weighting: true,
        }
    }
}

/// Everything the model consumes for one window.
#[derive(Debug, Clone)]
pub struct WindowInput {
    pub target_id: String,
    pub graph: GraphTensors,
    pub ped_dynamics: Vec<DynamicsVector>,
    /// Absent when the ego vehicle is not observed across the window.
    pub ego_dynamics: Option<Vec<DynamicsVector>>,
    pub label: u8,
}

/// Per-frame [x, y, 1000 vx, 1000 vy] for a road user across a window. The
/// velocity at the very first scene frame is zero by definition; a frame
/// without presence history also contributes zero velocity.
pub fn encode_dynamics(
    user: &RoadUser,
    window: &ObservationWindow,
) -> Result<Vec<DynamicsVector>, ModelError> {
    let mut out = Vec::with_capacity(window.length);
    for t in window.frames() {
        let state = user.state(t).ok_or_else(|| {
            ModelError::Dynamics(format!("{} absent at frame {t}", user.id))
        })?;
        let velocity = compute_velocity(user, t).unwrap_or(crate::scene::Vec2::ZERO);
        out.push([
            state.location.x,
            state.location.y,
            VELOCITY_SCALE * velocity.x,
            VELOCITY_SCALE * velocity.y,
        ]);
    }
    Ok(out)
}

/// Cluster every window frame and assemble graph tensors plus dynamics.
pub fn prepare_window(
    window: &ObservationWindow,
    manifest: &crate::graph::NormalizationManifest,
    cluster_params: &ClusteringParams,
    clustering_mode: ClusteringMode,
    speed_def: SpeedDefinition,
    graph_config: &GraphConfig,
) -> Result<WindowInput, ModelError> {
    let scene = &window.scene;
    let clusters: Vec<_> = window
        .frames()
        .map(|t| cluster_frame(scene, t, cluster_params, clustering_mode, speed_def))
        .collect::<Result<_, _>>()?;
    let graph = assemble_sequence(
        window,
        &clusters,
        manifest,
        cluster_params,
        speed_def,
        graph_config,
    )?;
    let ped_dynamics = encode_dynamics(window.target(), window)?;
    let ego_present = window.frames().all(|t| scene.ego.present_at(t));
    let ego_dynamics = if ego_present {
        Some(encode_dynamics(&scene.ego, window)?)
    } else {
        None
    };
    Ok(WindowInput {
        target_id: window.target_id.clone(),
        graph,
        ped_dynamics,
        ego_dynamics,
        label: window.label,
    })
}

#[derive(Debug)]
pub struct GraphSimModel {
    pub config: ModelConfig,
    spatial1: GraphConv,
    act1: PRelu,
    spatial2: GraphConv,
    act2: PRelu,
    temporal: TemporalConv,
    act3: PRelu,
    lstm_graph: Lstm,
    lstm_ped: Option<Lstm>,
    lstm_ego: Option<Lstm>,
    attention: Attention,
    head: Dense,
}

pub struct ForwardCache {
    sp1: Vec<GraphConvCache>,
    act1: PReluCache,
    sp2: Vec<GraphConvCache>,
    act2: PReluCache,
    temporal: TemporalConvCache,
    act3: PReluCache,
    node_count: usize,
    lstm_graph: LstmSeqCache,
    lstm_ped: Option<LstmSeqCache>,
    lstm_ego: Option<LstmSeqCache>,
    attention: AttentionCache,
    head: DenseCache,
    pub logit: f64,
}

impl GraphSimModel {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = &mut rng;
        let spatial1 = GraphConv::new("spatial1", r, crate::graph::FEATURE_DIM, config.spatial_hidden);
        let act1 = PRelu::new("act1");
        let spatial2 = GraphConv::new("spatial2", r, config.spatial_hidden, config.graph_output);
        let act2 = PRelu::new("act2");
        let temporal = TemporalConv::new("temporal");
        let act3 = PRelu::new("act3");
        let lstm_graph = Lstm::new("lstm_graph", r, config.graph_output, config.graph_lstm_hidden);
        let lstm_ped = config
            .use_ped_dynamics
            .then(|| Lstm::new("lstm_ped", r, 4, config.ped_lstm_hidden));
        let lstm_ego = config
            .use_ego_dynamics
            .then(|| Lstm::new("lstm_ego", r, 4, config.ego_lstm_hidden));
        let attention = Attention::new("attention", r, config.concat_dim(), config.attention_dim);
        let head = Dense::new("head", r, config.concat_dim());
        Ok(GraphSimModel {
            config,
            spatial1,
            act1,
            spatial2,
            act2,
            temporal,
            act3,
            lstm_graph,
            lstm_ped,
            lstm_ego,
            attention,
            head,
        })
    }

    pub fn params(&self) -> Vec<&Parameter> {
        let mut out = vec![
            &self.spatial1.weight,
            &self.act1.slope,
            &self.spatial2.weight,
            &self.act2.slope,
            &self.temporal.kernel,
            &self.act3.slope,
            &self.lstm_graph.w_ih,
            &self.lstm_graph.w_hh,
            &self.lstm_graph.bias,
        ];
        if let Some(l) = &self.lstm_ped {
            out.extend([&l.w_ih, &l.w_hh, &l.bias]);
        }
        if let Some(l) = &self.lstm_ego {
            out.extend([&l.w_ih, &l.w_hh, &l.bias]);
        }
        out.extend([
            &self.attention.w1,
            &self.attention.v,
            &self.head.weight,
            &self.head.bias,
        ]);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out: Vec<&mut Parameter> = vec![
            &mut self.spatial1.weight,
            &mut self.act1.slope,
            &mut self.spatial2.weight,
            &mut self.act2.slope,
            &mut self.temporal.kernel,
            &mut self.act3.slope,
            &mut self.lstm_graph.w_ih,
            &mut self.lstm_graph.w_hh,
            &mut self.lstm_graph.bias,
        ];
        if let Some(l) = &mut self.lstm_ped {
            out.push(&mut l.w_ih);
            out.push(&mut l.w_hh);
            out.push(&mut l.bias);
        }
        if let Some(l) = &mut self.lstm_ego {
            out.push(&mut l.w_ih);
            out.push(&mut l.w_hh);
            out.push(&mut l.bias);
        }
        out.push(&mut self.attention.w1);
        out.push(&mut self.attention.v);
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn masked_dynamics(
        xs: &[DynamicsVector],
        fields: DynamicsFields,
        recenter: bool,
    ) -> Vec<Vec<f64>> {
        let origin = if recenter {
            xs.first().map(|x| (x[0], x[1])).unwrap_or((0.0, 0.0))
        } else {
            (0.0, 0.0)
        };
        xs.iter()
            .map(|x| {
                vec![
                    if fields.location { x[0] - origin.0 } else { 0.0 },
                    if fields.location { x[1] - origin.1 } else { 0.0 },
                    if fields.velocity { x[2] } else { 0.0 },
                    if fields.velocity { x[3] } else { 0.0 },
                ]
            })
            .collect()
    }

    /// Probability that the target pedestrian will cross.
    pub fn forward(&self, input: &WindowInput) -> Result<(f64, ForwardCache), ModelError> {
        if input.graph.node_ids.is_empty() || input.graph.node_ids[0] != input.target_id {
            return Err(ModelError::TargetNotFirst(
                input.graph.node_ids.first().cloned().unwrap_or_default(),
            ));
        }
        let t_len = input.graph.frame_count();
        let n = input.graph.node_count();

        // Spatial stage, frame by frame.
        let mut sp1_caches = Vec::with_capacity(t_len);
        let mut h1 = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let (z, cache) = self
                .spatial1
                .forward(&input.graph.adjacency[t], &input.graph.features[t])
                .map_err(|e| GraphError::ShapeMismatch(e.to_string()))?;
            sp1_caches.push(cache);
            h1.push(z);
        }
        let (h1a, act1_cache) = self.act1.forward(&h1);

        let mut sp2_caches = Vec::with_capacity(t_len);
        let mut h2 = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let (z, cache) = self
                .spatial2
                .forward(&input.graph.adjacency[t], &h1a[t])
                .map_err(|e| GraphError::ShapeMismatch(e.to_string()))?;
            sp2_caches.push(cache);
            h2.push(z);
        }
        let (h2a, act2_cache) = self.act2.forward(&h2);

        // Temporal stage.
        let (tc, temporal_cache) = self.temporal.forward(&h2a);
        let (y, act3_cache) = self.act3.forward(&tc);

        // Target pedestrian embedding per frame (node 0).
        let p_seq: Vec<Vec<f64>> = y.iter().map(|frame| frame.row(0).to_vec()).collect();

        let (hs_graph, lstm_graph_cache) = self.lstm_graph.forward_seq(&p_seq);

        let (hs_ped, lstm_ped_cache) = match &self.lstm_ped {
            Some(l) => {
                let xs = Self::masked_dynamics(
                    &input.ped_dynamics,
                    self.config.ped_fields,
                    self.config.recenter_dynamics,
                );
                let (hs, cache) = l.forward_seq(&xs);
                (Some(hs), Some(cache))
            }
            None => (None, None),
        };
        let (hs_ego, lstm_ego_cache) = match &self.lstm_ego {
            Some(l) => {
                let ego = input
                    .ego_dynamics
                    .as_ref()
                    .ok_or(ModelError::MissingStream("ego"))?;
                let xs = Self::masked_dynamics(
                    ego,
                    self.config.ego_fields,
                    self.config.recenter_dynamics,
                );
                let (hs, cache) = l.forward_seq(&xs);
                (Some(hs), Some(cache))
            }
            None => (None, None),
        };

        // Concatenate per-timestep hidden states.
        let mut concat = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut row = hs_graph[t].clone();
            if let Some(hp) = &hs_ped {
                row.extend_from_slice(&hp[t]);
            }
            if let Some(he) = &hs_ego {
                row.extend_from_slice(&he[t]);
            }
            concat.push(row);
        }

        let (context, attention_cache) = self.attention.forward(&concat);
        let (logit, head_cache) = self.head.forward(&context);
        let p = sigmoid(logit);

        Ok((
            p,
            ForwardCache {
                sp1: sp1_caches,
                act1: act1_cache,
                sp2: sp2_caches,
                act2: act2_cache,
                temporal: temporal_cache,
                act3: act3_cache,
                node_count: n,
                lstm_graph: lstm_graph_cache,
                lstm_ped: lstm_ped_cache,
                lstm_ego: lstm_ego_cache,
                attention: attention_cache,
                head: head_cache,
                logit,
            },
        ))
    }

    /// Accumulate gradients for a scalar gradient flowing into the logit.
    pub fn backward(&mut self, cache: &ForwardCache, d_logit: f64) {
        let d_context = self.head.backward(&cache.head, d_logit);
        let d_concat = self.attention.backward(&cache.attention, &d_context);

        // Split the concatenated gradient back into streams.
        let t_len = d_concat.len();
        let hg = self.config.graph_lstm_hidden;
        let mut d_hs_graph = Vec::with_capacity(t_len);
        let mut d_hs_ped = Vec::with_capacity(t_len);
        let mut d_hs_ego = Vec::with_capacity(t_len);
        for row in &d_concat {
            let mut offset = hg;
            d_hs_graph.push(row[0..hg].to_vec());
            if self.lstm_ped.is_some() {
                let hp = self.config.ped_lstm_hidden;
                d_hs_ped.push(row[offset..offset + hp].to_vec());
                offset += hp;
            }
            if self.lstm_ego.is_some() {
                let he = self.config.ego_lstm_hidden;
                d_hs_ego.push(row[offset..offset + he].to_vec());
            }
        }

        if let (Some(l), Some(c)) = (&mut self.lstm_ped, &cache.lstm_ped) {
            l.backward_seq(c, &d_hs_ped);
        }
        if let (Some(l), Some(c)) = (&mut self.lstm_ego, &cache.lstm_ego) {
            l.backward_seq(c, &d_hs_ego);
        }
        let d_p_seq = self.lstm_graph.backward_seq(&cache.lstm_graph, &d_hs_graph);

        // Route the embedding gradient into node 0 of each frame.
        let d_y: Vec<Tensor> = d_p_seq
            .iter()
            .map(|dp| {
                let mut frame = Tensor::zeros(&[cache.node_count, self.config.graph_output]);
                frame.row_mut(0).copy_from_slice(dp);
                frame
            })
            .collect();

        let d_tc = self.act3.backward(&cache.act3, &d_y);
        let d_h2a = self.temporal.backward(&cache.temporal, &d_tc);
        let d_h2 = self.act2.backward(&cache.act2, &d_h2a);
        let mut d_h1a = Vec::with_capacity(t_len);
        for (t, d) in d_h2.iter().enumerate() {
            d_h1a.push(self.spatial2.backward(&cache.sp2[t], d));
        }
        let d_h1 = self.act1.backward(&cache.act1, &d_h1a);
        for (t, d) in d_h1.iter().enumerate() {
            self.spatial1.backward(&cache.sp1[t], d);
        }
    }

    /// Deterministic inference with the fixed decision threshold.
    pub fn predict(&self, input: &WindowInput) -> Result<(f64, u8), ModelError> {
        let (p, _) = self.forward(input)?;
        Ok((p, if p >= DECISION_THRESHOLD { 1 } else { 0 }))
    }

    pub fn to_checkpoint(
        &self,
        config_hash: u64,
        manifest: crate::graph::NormalizationManifest,
    ) -> Checkpoint {
        Checkpoint::from_params(config_hash, manifest, &self.params())
    }

    /// Rebuild a model from checkpoint parameters; shapes must match the
    /// architecture the config describes.
    pub fn from_checkpoint(config: ModelConfig, ck: &Checkpoint) -> Result<Self, ModelError> {
        let mut model = GraphSimModel::new(config, 0)?;
        for param in model.params_mut() {
            let stored = ck
                .parameters
                .iter()
                .find(|(name, _)| name == &param.name)
                .ok_or_else(|| ModelError::MissingParameter(param.name.clone()))?;
            if stored.1.shape() != param.value.shape() {
                return Err(ModelError::ParameterShape {
                    name: param.name.clone(),
                    got: stored.1.shape().to_vec(),
                    want: param.value.shape().to_vec(),
                });
            }
            param.value = stored.1.clone();
        }
        Ok(model)
    }
}

/// One training-log record (mean weighted loss of the batch).
#[derive(Debug, Clone, Serialize)]
pub struct TrainLogEntry {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub entries: Vec<TrainLogEntry>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,step,loss\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.epoch, e.step, e.loss));
        }
        out
    }
}

/// Deterministic shuffled index order for one epoch.
pub fn epoch_order(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15 ^ epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Class weights from window labels: w_pos = N_neg / N_pos, w_neg = 1.
pub fn class_weights_from_windows(windows: &[WindowInput]) -> Result<ClassWeights, ModelError> {
    let positive = windows.iter().filter(|w| w.label == 1).count();
    let negative = windows.len() - positive;
    if positive == 0 || negative == 0 {
        return Err(ModelError::SingleClass { positive, negative });
    }
    Ok(ClassWeights::from_counts(positive, negative))
}

/// Mini-batch Adam over the whole training set. Windows are processed one
/// at a time inside each batch in shuffled order, so batches of unequal
/// node counts need no padding; gradients accumulate in a fixed order and
/// are averaged over the batch.
pub fn train(
    windows: &[WindowInput],
    model_config: ModelConfig,
    train_config: &TrainConfig,
) -> Result<(GraphSimModel, TrainingLog), ModelError> {
    let weights = if train_config.class_weighting {
        class_weights_from_windows(windows)?
    } else {
        let positive = windows.iter().filter(|w| w.label == 1).count();
        let negative = windows.len() - positive;
        if positive == 0 || negative == 0 {
            return Err(ModelError::SingleClass { positive, negative });
        }
        ClassWeights::default()
    };

    let mut model = GraphSimModel::new(model_config, train_config.seed)?;
    let mut adam = AdamState::new(train_config.learning_rate);
    let mut log = TrainingLog::default();

    for epoch in 0..train_config.epochs {
        let order = epoch_order(train_config.seed, epoch, windows.len());
        let mut step = 0usize;
        for batch in order.chunks(train_config.batch_size) {
            model.zero_grad();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let window = &windows[idx];
                let (_, cache) = model.forward(window)?;
                let (loss, d_logit) = bce_with_logit(cache.logit, window.label, weights);
                batch_loss += loss;
                model.backward(&cache, d_logit / batch.len() as f64);
            }
            adam.step(&mut model.params_mut())?;
            log.entries.push(TrainLogEntry {
                epoch,
                step,
                loss: batch_loss / batch.len() as f64,
            });
            step += 1;
        }
    }
    Ok((model, log))
}
