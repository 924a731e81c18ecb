//! Per-frame graph construction: 35-value node features, the relative
//! importance matrix B, the distance matrix D, the adjacency A = (1-B) o (1-D),
//! and stacking into sequence tensors for the spatiotemporal convolution.
//!
//! The target pedestrian always sits at node index 0. For an object absent
//! in a frame, its adjacency row and column are zero apart from a diagonal 1
//! and its feature row is zero, so it cannot influence that frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{classify_motion, ClusteringParams, ClusterSet, MotionFlag};
use crate::nn::Tensor;
use crate::scene::{
    compute_speed, LaneGraph, ObservationWindow, RoadUser, RoadUserClass, SpeedDefinition, Vec2,
};

pub const FEATURE_DIM: usize = 35;
pub const SECTION_SIZE: usize = 7;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("normalization manifest not fitted")]
    UnfittedManifest,
    #[error("lane graph has no lanes but object is on the drivable area")]
    EmptyLaneGraph,
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("target pedestrian absent at frame {0}")]
    TargetAbsent(usize),
}

/// Frozen training-set maxima used to scale speed and size features, plus
/// the distance threshold shared by Eq-style normalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationManifest {
    pub max_speed: f64,
    pub max_length: f64,
    pub max_width: f64,
    pub d_thresh: f64,
}

impl NormalizationManifest {
    /// Maxima over every present object in every frame of the given
    /// windows. Degenerate zero maxima fall back to 1 so scaling stays
    /// well defined.
    pub fn fit(
        windows: &[ObservationWindow],
        speed_def: SpeedDefinition,
        d_thresh: f64,
    ) -> Self {
        let mut max_speed: f64 = 0.0;
        let mut max_length: f64 = 0.0;
        let mut max_width: f64 = 0.0;
        for window in windows {
            let scene = &window.scene;
            for t in window.frames() {
                for user in scene
                    .present_users(t)
                    .into_iter()
                    .chain(scene.ego.present_at(t).then_some(&scene.ego))
                {
                    let speed =
                        compute_speed(user, t, scene.frame_rate, speed_def).unwrap_or(0.0);
                    max_speed = max_speed.max(speed);
                    if let Some(state) = user.state(t) {
                        max_length = max_length.max(state.length);
                        max_width = max_width.max(state.width);
                    }
                }
            }
        }
        NormalizationManifest {
            max_speed: if max_speed > 0.0 { max_speed } else { 1.0 },
            max_length: if max_length > 0.0 { max_length } else { 1.0 },
            max_width: if max_width > 0.0 { max_width } else { 1.0 },
            d_thresh,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.max_speed <= 0.0
            || self.max_length <= 0.0
            || self.max_width <= 0.0
            || self.d_thresh <= 0.0
        {
            return Err(GraphError::UnfittedManifest);
        }
        Ok(())
    }
}

/// Distance-to-threshold normalization: min(d, d_thresh) / d_thresh.
pub fn normalize_distance(d: f64, d_thresh: f64) -> f64 {
    d.min(d_thresh) / d_thresh
}

/// Which node the feature section describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    TargetPedestrian,
    Ego,
    OtherPedestrian,
    OtherVehicle,
    Bicycle,
}

impl NodeRole {
    pub fn section(self) -> usize {
        match self {
            NodeRole::TargetPedestrian => 0,
            NodeRole::Ego => 1,
            NodeRole::OtherPedestrian => 2,
            NodeRole::OtherVehicle => 3,
            NodeRole::Bicycle => 4,
        }
    }

    pub fn of(user: &RoadUser, target_id: &str) -> Self {
        if user.id == target_id {
            return NodeRole::TargetPedestrian;
        }
        match user.class {
            RoadUserClass::EgoVehicle => NodeRole::Ego,
            RoadUserClass::Pedestrian => NodeRole::OtherPedestrian,
            RoadUserClass::Vehicle => NodeRole::OtherVehicle,
            RoadUserClass::Bicycle => NodeRole::Bicycle,
        }
    }
}

/// How much of the 35-value layout is populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFeatureMode {
    #[default]
    Full,
    /// Only the relative-coordinate entries, for the plain-location graph
    /// baseline.
    LocationsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMode {
    #[default]
    GraphSim,
    /// Star graph with 1/d pedestrian-object weights and no cluster edges.
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AdjacencyNormalization {
    #[default]
    None,
    Symmetric,
}

/// Graph construction knobs; defaults follow the reference configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub d_thresh: f64,
    pub edge_mode: EdgeMode,
    pub node_features: NodeFeatureMode,
    /// Keep the sign of per-axis offsets instead of their absolute value.
    pub signed_rel_coords: bool,
    pub adjacency_normalization: AdjacencyNormalization,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            d_thresh: 20.0,
            edge_mode: EdgeMode::GraphSim,
            node_features: NodeFeatureMode::Full,
            signed_rel_coords: false,
            adjacency_normalization: AdjacencyNormalization::None,
        }
    }
}

/// 35-value node encoding: five sections of seven, one populated per node,
/// laid out as [stationary, moving, rel-x, rel-y, speed, length, width].
#[allow(clippy::too_many_arguments)]
pub fn encode_node(
    user: &RoadUser,
    frame: usize,
    target: &RoadUser,
    frame_rate: f64,
    manifest: &NormalizationManifest,
    cluster_params: &ClusteringParams,
    speed_def: SpeedDefinition,
    config: &GraphConfig,
) -> Result<[f64; FEATURE_DIM], GraphError> {
    manifest.validate()?;
    let mut features = [0.0; FEATURE_DIM];
    let state = match user.state(frame) {
        Some(s) => s,
        None => return Ok(features), // absent objects stay zero
    };
    let role = NodeRole::of(user, &target.id);
    let base = role.section() * SECTION_SIZE;

    let speed = compute_speed(user, frame, frame_rate, speed_def).unwrap_or(0.0);
    let motion = classify_motion(speed, user.class, cluster_params);

    let (rel_x, rel_y) = if role == NodeRole::TargetPedestrian {
        (0.0, 0.0)
    } else {
        let target_loc = target
            .location(frame)
            .ok_or(GraphError::TargetAbsent(frame))?;
        let offset = state.location.sub(target_loc);
        if config.signed_rel_coords {
            (
                offset.x.signum() * normalize_distance(offset.x.abs(), config.d_thresh),
                offset.y.signum() * normalize_distance(offset.y.abs(), config.d_thresh),
            )
        } else {
            (
                normalize_distance(offset.x.abs(), config.d_thresh),
                normalize_distance(offset.y.abs(), config.d_thresh),
            )
        }
    };

    match config.node_features {
        NodeFeatureMode::Full => {
            features[base] = if motion == MotionFlag::Stationary { 1.0 } else { 0.0 };
            features[base + 1] = if motion == MotionFlag::Moving { 1.0 } else { 0.0 };
            features[base + 2] = rel_x;
            features[base + 3] = rel_y;
            features[base + 4] = speed / manifest.max_speed;
            features[base + 5] = state.length / manifest.max_length;
            features[base + 6] = state.width / manifest.max_width;
        }
        NodeFeatureMode::LocationsOnly => {
            features[base + 2] = rel_x;
            features[base + 3] = rel_y;
        }
    }
    Ok(features)
}

/// Signed lane-aligned distance, or the non-drivable marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaneDistance {
    /// Positive when the object is upstream of the pedestrian (approaching
    /// along the travel direction), negative once it has passed.
    Signed(f64),
    NonDrivable,
}

/// Arc-length position of the closest point of `p` on the polyline.
fn arc_length_position(p: Vec2, polyline: &[Vec2]) -> (f64, f64) {
    let mut best_dist = f64::INFINITY;
    let mut best_s = 0.0;
    let mut s_offset = 0.0;
    for seg in polyline.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ab = b.sub(a);
        let len = ab.norm();
        let t = if len > 0.0 {
            (p.sub(a).dot(ab) / (len * len)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let proj = a.add(ab.scale(t));
        let dist = p.distance(proj);
        if dist < best_dist {
            best_dist = dist;
            best_s = s_offset + t * len;
        }
        s_offset += len;
    }
    (best_s, best_dist)
}

/// Lane-aligned signed distance of an object from the pedestrian, measured
/// on the lane nearest to the pedestrian (ties to the lowest lane index).
pub fn lane_signed_distance(
    object_loc: Vec2,
    pedestrian_loc: Vec2,
    lanes: &LaneGraph,
) -> Result<LaneDistance, GraphError> {
    if !lanes.is_drivable(object_loc) {
        return Ok(LaneDistance::NonDrivable);
    }
    if lanes.lanes.is_empty() {
        return Err(GraphError::EmptyLaneGraph);
    }
    let mut best_lane = 0usize;
    let mut best_dist = f64::INFINITY;
    for (idx, lane) in lanes.lanes.iter().enumerate() {
        let (_, dist) = arc_length_position(pedestrian_loc, lane);
        if dist < best_dist {
            best_dist = dist;
            best_lane = idx;
        }
    }
    let lane = &lanes.lanes[best_lane];
    let (s_ped, _) = arc_length_position(pedestrian_loc, lane);
    let (s_obj, _) = arc_length_position(object_loc, lane);
    // Upstream objects sit earlier along the travel direction.
    Ok(LaneDistance::Signed(s_ped - s_obj))
}

/// Relative-importance factor of Eq-style form for one lane distance.
pub fn importance_from_lane_distance(d: f64, d_thresh: f64) -> f64 {
    (d.clamp(-d_thresh, d_thresh) + d_thresh) / (2.0 * d_thresh)
}

/// Node-index assignment for a window: target pedestrian at 0, the ego and
/// the other users present in at least one window frame after it, by id.
#[derive(Debug, Clone)]
pub struct NodeMap {
    pub ids: Vec<String>,
}

impl NodeMap {
    pub fn for_window(window: &ObservationWindow) -> Self {
        let scene = &window.scene;
        let mut ids = vec![window.target_id.clone()];
        if window.frames().any(|t| scene.ego.present_at(t)) {
            ids.push(scene.ego.id.clone());
        }
        let mut others: Vec<String> = scene
            .users
            .iter()
            .filter(|u| u.id != window.target_id)
            .filter(|u| window.frames().any(|t| u.present_at(t)))
            .map(|u| u.id.clone())
            .collect();
        others.sort();
        ids.extend(others);
        NodeMap { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Relative-importance matrix for one frame. Entries default to 1, the
/// diagonal is 0, pedestrian rows use the lane-aligned importance (0.5 off
/// the drivable area), and same-cluster pairs are zeroed.
pub fn build_b(
    nodes: &NodeMap,
    locations: &[Option<Vec2>],
    clusters: &ClusterSet,
    lanes: &LaneGraph,
    d_thresh: f64,
) -> Result<Tensor, GraphError> {
    let n = nodes.len();
    let mut b = Tensor::zeros(&[n, n]);
    b.fill(1.0);
    let ped_loc = locations[0].ok_or(GraphError::TargetAbsent(clusters.frame))?;
    for i in 1..n {
        if let Some(loc) = locations[i] {
            let value = match lane_signed_distance(loc, ped_loc, lanes)? {
                LaneDistance::Signed(d) => importance_from_lane_distance(d, d_thresh),
                LaneDistance::NonDrivable => 0.5,
            };
            b.set(0, i, value);
            b.set(i, 0, value);
        }
    }
    zero_same_cluster_and_diagonal(&mut b, nodes, locations, clusters);
    Ok(b)
}

/// Euclidean-distance matrix for one frame under the same fill rules as B.
pub fn build_d(
    nodes: &NodeMap,
    locations: &[Option<Vec2>],
    clusters: &ClusterSet,
    d_thresh: f64,
) -> Result<Tensor, GraphError> {
    let n = nodes.len();
    let mut d = Tensor::zeros(&[n, n]);
    d.fill(1.0);
    let ped_loc = locations[0].ok_or(GraphError::TargetAbsent(clusters.frame))?;
    for i in 1..n {
        if let Some(loc) = locations[i] {
            let value = normalize_distance(ped_loc.distance(loc), d_thresh);
            d.set(0, i, value);
            d.set(i, 0, value);
        }
    }
    zero_same_cluster_and_diagonal(&mut d, nodes, locations, clusters);
    Ok(d)
}

fn zero_same_cluster_and_diagonal(
    m: &mut Tensor,
    nodes: &NodeMap,
    locations: &[Option<Vec2>],
    clusters: &ClusterSet,
) {
    let n = nodes.len();
    for i in 0..n {
        m.set(i, i, 0.0);
        for j in (i + 1)..n {
            if locations[i].is_some()
                && locations[j].is_some()
                && clusters.same_cluster(&nodes.ids[i], &nodes.ids[j])
            {
                m.set(i, j, 0.0);
                m.set(j, i, 0.0);
            }
        }
    }
}

/// A = (1 - B) elementwise-times (1 - D).
pub fn build_a(b: &Tensor, d: &Tensor) -> Result<Tensor, GraphError> {
    if b.shape() != d.shape() {
        return Err(GraphError::ShapeMismatch(format!(
            "B {:?} vs D {:?}",
            b.shape(),
            d.shape()
        )));
    }
    let data: Vec<f64> = b
        .data()
        .iter()
        .zip(d.data())
        .map(|(bv, dv)| (1.0 - bv) * (1.0 - dv))
        .collect();
    Ok(Tensor::from_vec(b.shape(), data).expect("finite"))
}

/// Star-graph adjacency with 1/d pedestrian weights (capped at 1 below one
/// meter) and no off-star edges.
fn build_inverse_distance(
    nodes: &NodeMap,
    locations: &[Option<Vec2>],
    frame: usize,
) -> Result<Tensor, GraphError> {
    let n = nodes.len();
    let mut a = Tensor::zeros(&[n, n]);
    let ped_loc = locations[0].ok_or(GraphError::TargetAbsent(frame))?;
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    for i in 1..n {
        if let Some(loc) = locations[i] {
            let dist = ped_loc.distance(loc);
            let w = if dist < 1.0 { 1.0 } else { 1.0 / dist };
            a.set(0, i, w);
            a.set(i, 0, w);
        }
    }
    Ok(a)
}

/// The per-window stack: features V, adjacency A, and (in graph-sim mode)
/// the B and D factors retained for inspection.
#[derive(Debug, Clone)]
pub struct GraphTensors {
    pub node_ids: Vec<String>,
    pub features: Vec<Tensor>,
    pub adjacency: Vec<Tensor>,
    pub b: Vec<Tensor>,
    pub d: Vec<Tensor>,
}

impl GraphTensors {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn frame_count(&self) -> usize {
        self.features.len()
    }

    /// Features as one row-major tensor of shape [N, Q, T].
    pub fn stacked_features(&self) -> Tensor {
        let (n, t) = (self.node_count(), self.frame_count());
        let mut data = vec![0.0; n * FEATURE_DIM * t];
        for (ti, frame) in self.features.iter().enumerate() {
            for i in 0..n {
                for q in 0..FEATURE_DIM {
                    data[(i * FEATURE_DIM + q) * t + ti] = frame.at(i, q);
                }
            }
        }
        Tensor::from_vec(&[n, FEATURE_DIM, t], data).expect("finite")
    }

    /// Adjacency as one row-major tensor of shape [N, N, T].
    pub fn stacked_adjacency(&self) -> Tensor {
        let (n, t) = (self.node_count(), self.frame_count());
        let mut data = vec![0.0; n * n * t];
        for (ti, frame) in self.adjacency.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    data[(i * n + j) * t + ti] = frame.at(i, j);
                }
            }
        }
        Tensor::from_vec(&[n, n, t], data).expect("finite")
    }
}

/// Build V, A (and B, D) for every frame of a window from precomputed
/// per-frame clusters.
#[allow(clippy::too_many_arguments)]
pub fn assemble_sequence(
    window: &ObservationWindow,
    clusters_per_frame: &[ClusterSet],
    manifest: &NormalizationManifest,
    cluster_params: &ClusteringParams,
    speed_def: SpeedDefinition,
    config: &GraphConfig,
) -> Result<GraphTensors, GraphError> {
    manifest.validate()?;
    let scene = &window.scene;
    let target = window.target();
    let nodes = NodeMap::for_window(window);
    let n = nodes.len();

    let mut features = Vec::with_capacity(window.length);
    let mut adjacency = Vec::with_capacity(window.length);
    let mut bs = Vec::new();
    let mut ds = Vec::new();

    for (k, t) in window.frames().enumerate() {
        if !target.present_at(t) {
            return Err(GraphError::TargetAbsent(t));
        }
        let locations: Vec<Option<Vec2>> = nodes
            .ids
            .iter()
            .map(|id| scene.user(id).and_then(|u| u.location(t)))
            .collect();

        let mut v = Tensor::zeros(&[n, FEATURE_DIM]);
        for (i, id) in nodes.ids.iter().enumerate() {
            let user = scene.user(id).expect("node ids come from the scene");
            let row = encode_node(
                user,
                t,
                target,
                scene.frame_rate,
                manifest,
                cluster_params,
                speed_def,
                config,
            )?;
            v.row_mut(i).copy_from_slice(&row);
        }

        let clusters = &clusters_per_frame[k];
        let mut a = match config.edge_mode {
            EdgeMode::GraphSim => {
                let b = build_b(&nodes, &locations, clusters, &scene.lanes, config.d_thresh)?;
                let d = build_d(&nodes, &locations, clusters, config.d_thresh)?;
                let a = build_a(&b, &d)?;
                bs.push(b);
                ds.push(d);
                a
            }
            EdgeMode::InverseDistance => build_inverse_distance(&nodes, &locations, t)?,
        };

        if config.adjacency_normalization == AdjacencyNormalization::Symmetric {
            a = symmetric_normalize(&a);
        }
        features.push(v);
        adjacency.push(a);
    }

    Ok(GraphTensors {
        node_ids: nodes.ids,
        features,
        adjacency,
        b: bs,
        d: ds,
    })
}

fn symmetric_normalize(a: &Tensor) -> Tensor {
    let n = a.rows();
    let mut inv_sqrt_deg = vec![0.0; n];
    for i in 0..n {
        let deg: f64 = (0..n).map(|j| a.at(i, j)).sum();
        inv_sqrt_deg[i] = if deg > 0.0 { deg.powf(-0.5) } else { 0.0 };
    }
    let mut out = Tensor::zeros(&[n, n]);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, inv_sqrt_deg[i] * a.at(i, j) * inv_sqrt_deg[j]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Cluster;
    use crate::scene::{FrameState, Scene};
    use std::sync::Arc;

    fn manifest() -> NormalizationManifest {
        NormalizationManifest {
            max_speed: 1.0,
            max_length: 5.0,
            max_width: 2.5,
            d_thresh: 20.0,
        }
    }

    #[test]
    fn normalize_distance_examples() {
        assert_eq!(normalize_distance(0.0, 20.0), 0.0);
        assert_eq!(normalize_distance(10.0, 20.0), 0.5);
        assert_eq!(normalize_distance(30.0, 20.0), 1.0);
    }

    #[test]
    fn importance_examples() {
        assert_eq!(importance_from_lane_distance(20.0, 20.0), 1.0);
        assert_eq!(importance_from_lane_distance(-20.0, 20.0), 0.0);
        assert_eq!(importance_from_lane_distance(0.0, 20.0), 0.5);
        // Clamped beyond the threshold.
        assert_eq!(importance_from_lane_distance(35.0, 20.0), 1.0);
    }

    fn road_lanes() -> LaneGraph {
        LaneGraph {
            // One lane travelling +x along y = 0.
            lanes: vec![vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]],
            drivable_polygons: vec![vec![
                Vec2::new(0.0, -3.5),
                Vec2::new(100.0, -3.5),
                Vec2::new(100.0, 3.5),
                Vec2::new(0.0, 3.5),
            ]],
        }
    }

    fn assert_signed(d: LaneDistance, want: f64) {
        match d {
            LaneDistance::Signed(got) => assert!((got - want).abs() < 1e-9, "{got} vs {want}"),
            LaneDistance::NonDrivable => panic!("expected signed distance"),
        }
    }

    #[test]
    fn lane_distance_upstream_downstream_sidewalk() {
        let lanes = road_lanes();
        let ped = Vec2::new(50.0, 5.0); // on the sidewalk, projects to x = 50

        // Object 5 m upstream (behind the pedestrian along travel): +5.
        let up = lane_signed_distance(Vec2::new(45.0, 0.0), ped, &lanes).unwrap();
        assert_signed(up, 5.0);

        // Object 5 m downstream (already passed): -5.
        let down = lane_signed_distance(Vec2::new(55.0, 0.0), ped, &lanes).unwrap();
        assert_signed(down, -5.0);

        // Object on the sidewalk: non-drivable marker.
        let side = lane_signed_distance(Vec2::new(45.0, 6.0), ped, &lanes).unwrap();
        assert_eq!(side, LaneDistance::NonDrivable);
    }

    #[test]
    fn lane_distance_uses_lane_nearest_to_pedestrian() {
        // Two parallel lanes with opposite travel directions; the pedestrian
        // sits just above the north lane, so that lane (index 1, westbound)
        // defines the sign convention.
        let lanes = LaneGraph {
            lanes: vec![
                vec![Vec2::new(0.0, -1.75), Vec2::new(100.0, -1.75)],
                vec![Vec2::new(100.0, 1.75), Vec2::new(0.0, 1.75)],
            ],
            drivable_polygons: vec![vec![
                Vec2::new(0.0, -3.5),
                Vec2::new(100.0, -3.5),
                Vec2::new(100.0, 3.5),
                Vec2::new(0.0, 3.5),
            ]],
        };
        let ped = Vec2::new(50.0, 4.0);
        // Westbound traffic approaches from larger x: an object east of the
        // pedestrian is upstream (+), west of it has passed (-).
        let east = lane_signed_distance(Vec2::new(58.0, 1.75), ped, &lanes).unwrap();
        assert_signed(east, 8.0);
        let west = lane_signed_distance(Vec2::new(44.0, 1.75), ped, &lanes).unwrap();
        assert_signed(west, -6.0);

        // Equidistant lanes break ties toward the lowest lane index: move
        // the pedestrian onto y = 0, exactly between the two centerlines.
        let centered = Vec2::new(50.0, 0.0);
        let d = lane_signed_distance(Vec2::new(58.0, 0.0), centered, &lanes).unwrap();
        // Lane 0 travels east: an object east of the pedestrian has passed.
        assert_signed(d, -8.0);
    }

    #[test]
    fn lane_distance_errors_without_lanes() {
        let lanes = LaneGraph {
            lanes: vec![],
            drivable_polygons: vec![vec![
                Vec2::new(-10.0, -10.0),
                Vec2::new(10.0, -10.0),
                Vec2::new(10.0, 10.0),
                Vec2::new(-10.0, 10.0),
            ]],
        };
        assert!(lane_signed_distance(Vec2::ZERO, Vec2::new(0.0, 5.0), &lanes).is_err());
    }

    fn user_with_states(
        id: &str,
        class: RoadUserClass,
        positions: &[Option<Vec2>],
        frame_rate: f64,
    ) -> RoadUser {
        let states = positions
            .iter()
            .enumerate()
            .map(|(t, p)| match p {
                Some(loc) => FrameState {
                    location: *loc,
                    orientation: Vec2::new(1.0, 0.0),
                    length: 4.0,
                    width: 2.0,
                    timestamp: t as f64 / frame_rate,
                    present: true,
                },
                None => FrameState::absent(t as f64 / frame_rate),
            })
            .collect();
        RoadUser {
            id: id.to_string(),
            class,
            states,
        }
    }

    fn window_scene(
        users: Vec<RoadUser>,
        ego: RoadUser,
        frames: usize,
        lanes: LaneGraph,
    ) -> Arc<Scene> {
        Arc::new(Scene::new(10.0, frames, users, ego, lanes).unwrap())
    }

    fn singleton_clusters(scene: &Scene, frames: std::ops::Range<usize>) -> Vec<ClusterSet> {
        frames
            .map(|t| {
                let entries: Vec<(String, RoadUserClass, MotionFlag)> = scene
                    .present_users(t)
                    .iter()
                    .map(|u| (u.id.clone(), u.class, MotionFlag::Stationary))
                    .collect();
                ClusterSet::singletons(t, &entries)
            })
            .collect()
    }

    #[test]
    fn encode_node_target_and_vehicle() {
        let frame_rate = 10.0;
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &[Some(Vec2::new(0.0, 0.0)), Some(Vec2::new(0.0, 0.0))],
            frame_rate,
        );
        // Vehicle at offset (10, -5), displacement 1 m/frame.
        let veh = user_with_states(
            "veh",
            RoadUserClass::Vehicle,
            &[Some(Vec2::new(9.0, -5.0)), Some(Vec2::new(10.0, -5.0))],
            frame_rate,
        );
        let params = ClusteringParams::default();
        let config = GraphConfig::default();
        let m = manifest();

        let target_row = encode_node(
            &ped,
            1,
            &ped,
            frame_rate,
            &m,
            &params,
            SpeedDefinition::Physical,
            &config,
        )
        .unwrap();
        // Section 1 (offset 0) populated, rel coords zero.
        assert_eq!(target_row[2], 0.0);
        assert_eq!(target_row[3], 0.0);
        assert_eq!(target_row[0], 1.0); // stationary flag
        assert!(target_row[7..].iter().all(|v| *v == 0.0));

        let veh_row = encode_node(
            &veh,
            1,
            &ped,
            frame_rate,
            &m,
            &params,
            SpeedDefinition::Physical,
            &config,
        )
        .unwrap();
        let base = 3 * SECTION_SIZE;
        // Moving at 10 m/s (threshold 2): flags (0, 1).
        assert_eq!(veh_row[base], 0.0);
        assert_eq!(veh_row[base + 1], 1.0);
        assert!((veh_row[base + 2] - 0.5).abs() < 1e-12);
        assert!((veh_row[base + 3] - 0.25).abs() < 1e-12);
        // Exactly one section non-zero.
        for (k, v) in veh_row.iter().enumerate() {
            if !(base..base + SECTION_SIZE).contains(&k) {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn encode_node_does_not_clamp_oversized_objects() {
        let frame_rate = 10.0;
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &[Some(Vec2::ZERO)],
            frame_rate,
        );
        let mut truck = user_with_states(
            "truck",
            RoadUserClass::Vehicle,
            &[Some(Vec2::new(3.0, 0.0))],
            frame_rate,
        );
        truck.states[0].length = 12.0; // longer than the manifest max of 5
        let row = encode_node(
            &truck,
            0,
            &ped,
            frame_rate,
            &manifest(),
            &ClusteringParams::default(),
            SpeedDefinition::Physical,
            &GraphConfig::default(),
        )
        .unwrap();
        assert!(row[3 * SECTION_SIZE + 5] > 1.0);
    }

    #[test]
    fn b_matrix_rules() {
        let lanes = road_lanes();
        let nodes = NodeMap {
            ids: vec!["ped".into(), "up".into(), "down".into(), "side".into()],
        };
        let locations = vec![
            Some(Vec2::new(50.0, 5.0)),
            Some(Vec2::new(30.0, 0.0)),  // 20 m upstream -> B = 1
            Some(Vec2::new(70.0, 0.0)),  // 20 m downstream -> B = 0
            Some(Vec2::new(45.0, 6.0)),  // sidewalk -> 0.5
        ];
        let clusters = ClusterSet { frame: 0, clusters: vec![] };
        let b = build_b(&nodes, &locations, &clusters, &lanes, 20.0).unwrap();
        assert_eq!(b.at(0, 1), 1.0);
        assert_eq!(b.at(0, 2), 0.0);
        assert_eq!(b.at(0, 3), 0.5);
        // Diagonal zero, symmetric, rest ones.
        for i in 0..4 {
            assert_eq!(b.at(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(b.at(i, j), b.at(j, i));
            }
        }
        assert_eq!(b.at(1, 2), 1.0);
    }

    #[test]
    fn d_matrix_rules() {
        let nodes = NodeMap {
            ids: vec!["ped".into(), "near".into(), "far".into(), "buddy".into()],
        };
        let locations = vec![
            Some(Vec2::new(0.0, 0.0)),
            Some(Vec2::new(10.0, 0.0)),
            Some(Vec2::new(25.0, 0.0)),
            Some(Vec2::new(10.0, 1.0)),
        ];
        let clusters = ClusterSet {
            frame: 0,
            clusters: vec![Cluster {
                members: vec!["buddy".into(), "near".into()],
                class: RoadUserClass::Pedestrian,
                motion: MotionFlag::Stationary,
            }],
        };
        let d = build_d(&nodes, &locations, &clusters, 20.0).unwrap();
        assert_eq!(d.at(0, 1), 0.5);
        assert_eq!(d.at(0, 2), 1.0);
        // Same-cluster pair zeroed.
        assert_eq!(d.at(1, 3), 0.0);
        assert_eq!(d.at(3, 1), 0.0);
        // Unrelated pair stays 1.
        assert_eq!(d.at(1, 2), 1.0);
    }

    #[test]
    fn a_matrix_rules() {
        let b = Tensor::from_vec(&[2, 2], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let d = Tensor::from_vec(&[2, 2], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let a = build_a(&b, &d).unwrap();
        assert_eq!(a.at(0, 0), 1.0);
        assert_eq!(a.at(0, 1), 0.25);

        // Same-cluster pair (B = D = 0) gives 1; unrelated (B = 1) gives 0.
        let b2 = Tensor::from_vec(&[2, 2], vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        let d2 = Tensor::from_vec(&[2, 2], vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(build_a(&b2, &d2).unwrap().at(0, 1), 1.0);
        let b3 = Tensor::from_vec(&[2, 2], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(build_a(&b3, &d).unwrap().at(0, 1), 0.0);

        assert!(build_a(&b, &Tensor::zeros(&[3, 3])).is_err());
    }

    #[test]
    fn assemble_handles_absent_objects() {
        let frames = 5;
        let lanes = road_lanes();
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &vec![Some(Vec2::new(50.0, 5.0)); frames],
            10.0,
        );
        // Vehicle present only in frames 1 and 2.
        let veh = user_with_states(
            "veh",
            RoadUserClass::Vehicle,
            &[
                None,
                Some(Vec2::new(40.0, 0.0)),
                Some(Vec2::new(42.0, 0.0)),
                None,
                None,
            ],
            10.0,
        );
        let ego = user_with_states(
            "ego",
            RoadUserClass::EgoVehicle,
            &vec![Some(Vec2::new(20.0, -1.0)); frames],
            10.0,
        );
        let scene = window_scene(vec![ped, veh], ego, frames, lanes);
        let window =
            ObservationWindow::new(Arc::clone(&scene), "ped", 0, frames, 0).unwrap();
        let clusters = singleton_clusters(&scene, 0..frames);
        let tensors = assemble_sequence(
            &window,
            &clusters,
            &manifest(),
            &ClusteringParams::default(),
            SpeedDefinition::Physical,
            &GraphConfig::default(),
        )
        .unwrap();

        assert_eq!(tensors.node_ids[0], "ped");
        let veh_idx = tensors.node_ids.iter().position(|i| i == "veh").unwrap();
        for t in [0usize, 3, 4] {
            let a = &tensors.adjacency[t];
            for j in 0..tensors.node_count() {
                if j == veh_idx {
                    assert_eq!(a.at(veh_idx, j), 1.0, "diag at frame {t}");
                } else {
                    assert_eq!(a.at(veh_idx, j), 0.0, "row at frame {t}");
                    assert_eq!(a.at(j, veh_idx), 0.0, "col at frame {t}");
                }
            }
            assert!(tensors.features[t].row(veh_idx).iter().all(|v| *v == 0.0));
        }
        // Present frames connect the vehicle to the pedestrian.
        assert!(tensors.adjacency[1].at(0, veh_idx) > 0.0);

        // Stacked shapes.
        assert_eq!(tensors.stacked_features().shape(), &[3, FEATURE_DIM, 5]);
        assert_eq!(tensors.stacked_adjacency().shape(), &[3, 3, 5]);
    }

    #[test]
    fn assemble_single_pedestrian_gives_identity() {
        let frames = 3;
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &vec![Some(Vec2::new(0.0, 5.0)); frames],
            10.0,
        );
        let ego = user_with_states("ego", RoadUserClass::EgoVehicle, &[None, None, None], 10.0);
        let scene = window_scene(vec![ped], ego, frames, road_lanes());
        let window = ObservationWindow::new(Arc::clone(&scene), "ped", 0, frames, 1).unwrap();
        let clusters = singleton_clusters(&scene, 0..frames);
        let tensors = assemble_sequence(
            &window,
            &clusters,
            &manifest(),
            &ClusteringParams::default(),
            SpeedDefinition::Physical,
            &GraphConfig::default(),
        )
        .unwrap();
        assert_eq!(tensors.node_count(), 1);
        for a in &tensors.adjacency {
            assert_eq!(a.shape(), &[1, 1]);
            assert_eq!(a.at(0, 0), 1.0);
        }
    }

    #[test]
    fn inverse_distance_mode() {
        let frames = 2;
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &vec![Some(Vec2::new(0.0, 0.0)); frames],
            10.0,
        );
        let near = user_with_states(
            "near",
            RoadUserClass::Vehicle,
            &vec![Some(Vec2::new(4.0, 0.0)); frames],
            10.0,
        );
        let close = user_with_states(
            "close",
            RoadUserClass::Vehicle,
            &vec![Some(Vec2::new(0.5, 0.0)); frames],
            10.0,
        );
        let ego = user_with_states(
            "ego",
            RoadUserClass::EgoVehicle,
            &vec![Some(Vec2::new(10.0, 0.0)); frames],
            10.0,
        );
        let scene = window_scene(vec![near, close], ego, frames, LaneGraph::default());
        let window = ObservationWindow::new(Arc::clone(&scene), "ped", 0, frames, 0);
        // "ped" is not a user of this scene; rebuild with it included.
        assert!(window.is_err());

        let ped_scene = window_scene(
            vec![
                ped,
                user_with_states(
                    "near",
                    RoadUserClass::Vehicle,
                    &vec![Some(Vec2::new(4.0, 0.0)); frames],
                    10.0,
                ),
                user_with_states(
                    "close",
                    RoadUserClass::Vehicle,
                    &vec![Some(Vec2::new(0.5, 0.0)); frames],
                    10.0,
                ),
            ],
            user_with_states(
                "ego",
                RoadUserClass::EgoVehicle,
                &vec![Some(Vec2::new(10.0, 0.0)); frames],
                10.0,
            ),
            frames,
            LaneGraph::default(),
        );
        let window = ObservationWindow::new(Arc::clone(&ped_scene), "ped", 0, frames, 0).unwrap();
        let clusters = singleton_clusters(&ped_scene, 0..frames);
        let config = GraphConfig {
            edge_mode: EdgeMode::InverseDistance,
            ..GraphConfig::default()
        };
        let tensors = assemble_sequence(
            &window,
            &clusters,
            &manifest(),
            &ClusteringParams::default(),
            SpeedDefinition::Physical,
            &config,
        )
        .unwrap();
        let a = &tensors.adjacency[0];
        let near_idx = tensors.node_ids.iter().position(|i| i == "near").unwrap();
        let close_idx = tensors.node_ids.iter().position(|i| i == "close").unwrap();
        assert!((a.at(0, near_idx) - 0.25).abs() < 1e-12);
        assert_eq!(a.at(0, close_idx), 1.0); // capped below 1 m
        // No off-star edges, B/D not retained.
        assert_eq!(a.at(near_idx, close_idx), 0.0);
        assert!(tensors.b.is_empty());
    }

    #[test]
    fn signed_rel_coords_keep_offset_signs() {
        let frame_rate = 10.0;
        let ped = user_with_states(
            "ped",
            RoadUserClass::Pedestrian,
            &[Some(Vec2::ZERO)],
            frame_rate,
        );
        let veh = user_with_states(
            "veh",
            RoadUserClass::Vehicle,
            &[Some(Vec2::new(10.0, -5.0))],
            frame_rate,
        );
        let config = GraphConfig {
            signed_rel_coords: true,
            ..GraphConfig::default()
        };
        let row = encode_node(
            &veh,
            0,
            &ped,
            frame_rate,
            &manifest(),
            &ClusteringParams::default(),
            SpeedDefinition::Physical,
            &config,
        )
        .unwrap();
        let base = 3 * SECTION_SIZE;
        assert!((row[base + 2] - 0.5).abs() < 1e-12);
        assert!((row[base + 3] - (-0.25)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_normalization_scales_by_degree() {
        let a = Tensor::from_vec(&[2, 2], vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let normalized = symmetric_normalize(&a);
        for i in 0..2 {
            for j in 0..2 {
                assert!((normalized.at(i, j) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn b_and_d_are_translation_invariant() {
        let lanes = road_lanes();
        let shift = Vec2::new(13.0, -7.5);
        let shifted_lanes = LaneGraph {
            lanes: lanes
                .lanes
                .iter()
                .map(|l| l.iter().map(|p| p.add(shift)).collect())
                .collect(),
            drivable_polygons: lanes
                .drivable_polygons
                .iter()
                .map(|poly| poly.iter().map(|p| p.add(shift)).collect())
                .collect(),
        };
        let nodes = NodeMap {
            ids: vec!["ped".into(), "a".into(), "b".into()],
        };
        let locations = vec![
            Some(Vec2::new(50.0, 5.0)),
            Some(Vec2::new(42.0, 0.5)),
            Some(Vec2::new(61.0, -1.0)),
        ];
        let shifted: Vec<Option<Vec2>> =
            locations.iter().map(|l| l.map(|p| p.add(shift))).collect();
        let clusters = ClusterSet { frame: 0, clusters: vec![] };

        let b1 = build_b(&nodes, &locations, &clusters, &lanes, 20.0).unwrap();
        let b2 = build_b(&nodes, &shifted, &clusters, &shifted_lanes, 20.0).unwrap();
        let d1 = build_d(&nodes, &locations, &clusters, 20.0).unwrap();
        let d2 = build_d(&nodes, &shifted, &clusters, 20.0).unwrap();
        for (x, y) in b1.data().iter().zip(b2.data()) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in d1.data().iter().zip(d2.data()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
