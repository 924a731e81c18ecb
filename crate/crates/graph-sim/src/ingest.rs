//! Scene ingestion: a documented JSON export schema for annotations, maps,
//! and 2-D detections, densification of sparse keyframe boxes to the
//! working frame rate, behavioural-label materialization, dataset
//! statistics, and IoU-based verification of interpolated boxes against
//! externally supplied detections.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{FrameState, LaneGraph, RoadUser, RoadUserClass, Scene, SceneError, Vec2};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("validation failed for {field} of {record}: {reason}")]
    Validation {
        field: String,
        record: String,
        reason: String,
    },
    #[error("scene error: {0}")]
    Scene(#[from] SceneError),
    #[error("track for {0} has non-monotone timestamps")]
    NonMonotoneTimestamps(String),
    #[error("crossing start frame {start} outside the visible frames of {id}")]
    StartOutsideVisibility { start: usize, id: String },
    #[error("behaviour record for {0} marks crossing but has no start frame")]
    MissingStartFrame(String),
    #[error("no detection frame matches timestamp {0}")]
    FrameMismatch(f64),
}

// ── File schemas ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Original,
    Interpolated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: String,
    pub class: RoadUserClass,
    /// [x, y, z] meters.
    pub translation: [f64; 3],
    /// Unit quaternion [w, x, y, z].
    pub rotation: [f64; 4],
    /// [length, width, height] meters.
    pub size: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub timestamp: f64,
    pub objects: Vec<ObjectRecord>,
}

/// Summary behavioural annotation for one pedestrian. Per-frame states are
/// derived by [`materialize_frame_labels`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviourRecord {
    pub pedestrian_id: String,
    pub will_cross: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing_start_frame: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing_end_frame: Option<usize>,
}

impl BehaviourRecord {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.will_cross && self.crossing_start_frame.is_none() {
            return Err(IngestError::MissingStartFrame(self.pedestrian_id.clone()));
        }
        if let (Some(start), Some(end)) = (self.crossing_start_frame, self.crossing_end_frame) {
            if end < start {
                return Err(IngestError::Validation {
                    field: "crossing_end_frame".into(),
                    record: self.pedestrian_id.clone(),
                    reason: format!("end {end} before start {start}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub frame_rate: f64,
    pub frames: Vec<FrameRecord>,
    #[serde(default)]
    pub behaviours: Vec<BehaviourRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub lanes: Vec<Vec<[f64; 2]>>,
    pub drivable_polygons: Vec<Vec<[f64; 2]>>,
}

impl MapFile {
    pub fn into_lane_graph(self) -> LaneGraph {
        LaneGraph {
            lanes: self
                .lanes
                .into_iter()
                .map(|l| l.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
                .collect(),
            drivable_polygons: self
                .drivable_polygons
                .into_iter()
                .map(|p| p.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionBox {
    pub class: RoadUserClass,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionFrame {
    pub timestamp: f64,
    pub boxes: Vec<DetectionBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub frames: Vec<DetectionFrame>,
}

/// Externally projected 2-D footprints of (densified) annotations; the
/// projection itself happens outside this crate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedBox {
    pub object_id: String,
    pub class: RoadUserClass,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedFrame {
    pub timestamp: f64,
    pub boxes: Vec<ProjectedBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionsFile {
    pub frames: Vec<ProjectedFrame>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IngestError::Parse {
        path: path.display().to_string(),
        source,
    })
}

// ── Quaternion helpers ───────────────────────────────────────────────────

/// Yaw (rotation about +z) of a [w, x, y, z] quaternion.
pub fn quaternion_yaw(q: [f64; 4]) -> f64 {
    let [w, x, y, z] = q;
    (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z))
}

pub fn quaternion_norm(q: [f64; 4]) -> f64 {
    q.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spherical linear interpolation with the shortest-path convention (one
/// endpoint is negated when the dot product is negative).
pub fn slerp(a: [f64; 4], b: [f64; 4], t: f64) -> [f64; 4] {
    let mut b = b;
    let mut dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    if dot < 0.0 {
        for v in b.iter_mut() {
            *v = -*v;
        }
        dot = -dot;
    }
    let out = if dot > 0.9995 {
        // Nearly parallel: linear blend, renormalized below.
        let mut o = [0.0; 4];
        for k in 0..4 {
            o[k] = a[k] + t * (b[k] - a[k]);
        }
        o
    } else {
        let theta = dot.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        let wa = ((1.0 - t) * theta).sin() / sin_theta;
        let wb = (t * theta).sin() / sin_theta;
        let mut o = [0.0; 4];
        for k in 0..4 {
            o[k] = wa * a[k] + wb * b[k];
        }
        o
    };
    let norm = quaternion_norm(out);
    [out[0] / norm, out[1] / norm, out[2] / norm, out[3] / norm]
}

// ── Densification ────────────────────────────────────────────────────────

/// One keyframe or interpolated box of a track.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub object_id: String,
    pub class: RoadUserClass,
    pub translation: [f64; 3],
    pub rotation: [f64; 4],
    pub size: [f64; 3],
    pub timestamp: f64,
}

impl RawAnnotation {
    pub fn validate(&self) -> Result<(), IngestError> {
        if (quaternion_norm(self.rotation) - 1.0).abs() > 1e-3 {
            return Err(IngestError::Validation {
                field: "rotation".into(),
                record: self.object_id.clone(),
                reason: "quaternion norm deviates from 1 by more than 1e-3".into(),
            });
        }
        if self.size.iter().any(|s| *s <= 0.0) {
            return Err(IngestError::Validation {
                field: "size".into(),
                record: self.object_id.clone(),
                reason: "sizes must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DensifiedTrack {
    pub object_id: String,
    pub annotations: Vec<(RawAnnotation, Provenance)>,
    /// Set when the input had a single keyframe and was passed through.
    pub single_keyframe: bool,
}

/// Interpolate a keyframe track up to `target_rate`. Keyframes are
/// reproduced exactly; in-between annotations are placed uniformly, with
/// translation and size interpolated linearly and rotation by slerp.
pub fn densify(track: &[RawAnnotation], target_rate: f64) -> Result<DensifiedTrack, IngestError> {
    if track.is_empty() {
        return Err(IngestError::Validation {
            field: "track".into(),
            record: "<empty>".into(),
            reason: "no annotations".into(),
        });
    }
    let object_id = track[0].object_id.clone();
    for ann in track {
        ann.validate()?;
    }
    if track.len() == 1 {
        return Ok(DensifiedTrack {
            object_id,
            annotations: vec![(track[0].clone(), Provenance::Original)],
            single_keyframe: true,
        });
    }
    for pair in track.windows(2) {
        if pair[1].timestamp <= pair[0].timestamp {
            return Err(IngestError::NonMonotoneTimestamps(object_id));
        }
    }

    let mut annotations = Vec::new();
    for pair in track.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        annotations.push((a.clone(), Provenance::Original));
        let steps = ((b.timestamp - a.timestamp) * target_rate).round() as usize;
        for k in 1..steps {
            let t = k as f64 / steps as f64;
            let lerp3 = |x: [f64; 3], y: [f64; 3]| -> [f64; 3] {
                [
                    x[0] + t * (y[0] - x[0]),
                    x[1] + t * (y[1] - x[1]),
                    x[2] + t * (y[2] - x[2]),
                ]
            };
            annotations.push((
                RawAnnotation {
                    object_id: a.object_id.clone(),
                    class: a.class,
                    translation: lerp3(a.translation, b.translation),
                    rotation: slerp(a.rotation, b.rotation, t),
                    size: lerp3(a.size, b.size),
                    timestamp: a.timestamp + t * (b.timestamp - a.timestamp),
                },
                Provenance::Interpolated,
            ));
        }
    }
    annotations.push((track.last().unwrap().clone(), Provenance::Original));
    Ok(DensifiedTrack {
        object_id,
        annotations,
        single_keyframe: false,
    })
}

/// Densify every object track of a scene file and reassemble the frames.
/// Behavioural frame indices are remapped to the new frame grid by the
/// rate ratio so they keep pointing at the same instant.
pub fn densify_scene_file(file: &SceneFile, target_rate: f64) -> Result<SceneFile, IngestError> {
    use std::collections::BTreeMap;
    let mut tracks: BTreeMap<String, Vec<RawAnnotation>> = BTreeMap::new();
    for frame in &file.frames {
        for obj in &frame.objects {
            tracks.entry(obj.id.clone()).or_default().push(RawAnnotation {
                object_id: obj.id.clone(),
                class: obj.class,
                translation: obj.translation,
                rotation: obj.rotation,
                size: obj.size,
                timestamp: frame.timestamp,
            });
        }
    }

    // Bucket densified annotations by (quantized) timestamp.
    let mut frames: BTreeMap<i64, FrameRecord> = BTreeMap::new();
    let quantize = |ts: f64| -> i64 { (ts * target_rate).round() as i64 };
    for track in tracks.values() {
        let densified = densify(track, target_rate)?;
        for (ann, provenance) in densified.annotations {
            let key = quantize(ann.timestamp);
            let frame = frames.entry(key).or_insert_with(|| FrameRecord {
                timestamp: key as f64 / target_rate,
                objects: Vec::new(),
            });
            frame.objects.push(ObjectRecord {
                id: ann.object_id.clone(),
                class: ann.class,
                translation: ann.translation,
                rotation: ann.rotation,
                size: ann.size,
                provenance: Some(provenance),
            });
        }
    }
    for frame in frames.values_mut() {
        frame.objects.sort_by(|a, b| a.id.cmp(&b.id));
    }

    let remap = |idx: usize| -> usize {
        (idx as f64 * target_rate / file.frame_rate).round() as usize
    };
    let behaviours = file
        .behaviours
        .iter()
        .map(|b| BehaviourRecord {
            pedestrian_id: b.pedestrian_id.clone(),
            will_cross: b.will_cross,
            crossing_start_frame: b.crossing_start_frame.map(remap),
            crossing_end_frame: b.crossing_end_frame.map(remap),
        })
        .collect();

    Ok(SceneFile {
        frame_rate: target_rate,
        frames: frames.into_values().collect(),
        behaviours,
    })
}

// ── Scene loading ────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub scene: Arc<Scene>,
    pub behaviours: Vec<BehaviourRecord>,
}

/// Build the in-memory world model from an annotation file and a map file.
/// Boxes are projected to the bird's-eye view (height dropped) and the
/// orientation comes from the quaternion yaw.
pub fn load_scene(annotation_path: &Path, map_path: &Path) -> Result<LoadedScene, IngestError> {
    let file: SceneFile = read_json(annotation_path)?;
    let map: MapFile = read_json(map_path)?;
    load_scene_from_parts(&file, map.into_lane_graph())
}

pub fn load_scene_from_parts(
    file: &SceneFile,
    lanes: LaneGraph,
) -> Result<LoadedScene, IngestError> {
    let n_frames = file.frames.len();
    if n_frames == 0 {
        return Err(IngestError::Validation {
            field: "frames".into(),
            record: "scene".into(),
            reason: "scene file has no frames".into(),
        });
    }

    use std::collections::BTreeMap;
    let mut users: BTreeMap<String, (RoadUserClass, Vec<FrameState>)> = BTreeMap::new();
    for (t, frame) in file.frames.iter().enumerate() {
        for obj in &frame.objects {
            if (quaternion_norm(obj.rotation) - 1.0).abs() > 1e-3 {
                return Err(IngestError::Validation {
                    field: "rotation".into(),
                    record: format!("{} at frame {t}", obj.id),
                    reason: "quaternion norm deviates from 1 by more than 1e-3".into(),
                });
            }
            if obj.size[0] <= 0.0 || obj.size[1] <= 0.0 {
                return Err(IngestError::Validation {
                    field: "size".into(),
                    record: format!("{} at frame {t}", obj.id),
                    reason: "length and width must be positive".into(),
                });
            }
            let entry = users.entry(obj.id.clone()).or_insert_with(|| {
                (
                    obj.class,
                    file.frames
                        .iter()
                        .map(|f| FrameState::absent(f.timestamp))
                        .collect(),
                )
            });
            if entry.0 != obj.class {
                return Err(IngestError::Validation {
                    field: "class".into(),
                    record: obj.id.clone(),
                    reason: "class changes over time".into(),
                });
            }
            if entry.1[t].present {
                return Err(IngestError::Validation {
                    field: "id".into(),
                    record: format!("{} at frame {t}", obj.id),
                    reason: "object listed twice in one frame".into(),
                });
            }
            let yaw = quaternion_yaw(obj.rotation);
            entry.1[t] = FrameState {
                location: Vec2::new(obj.translation[0], obj.translation[1]),
                orientation: Vec2::from_yaw(yaw),
                length: obj.size[0],
                width: obj.size[1],
                timestamp: frame.timestamp,
                present: true,
            };
        }
    }

    let mut ego = None;
    let mut others = Vec::new();
    for (id, (class, states)) in users {
        let user = RoadUser { id, class, states };
        if class == RoadUserClass::EgoVehicle {
            if ego.is_some() {
                return Err(IngestError::Validation {
                    field: "class".into(),
                    record: user.id,
                    reason: "more than one ego-vehicle".into(),
                });
            }
            ego = Some(user);
        } else {
            others.push(user);
        }
    }
    let ego = ego.ok_or_else(|| IngestError::Validation {
        field: "class".into(),
        record: "scene".into(),
        reason: "no ego-vehicle object".into(),
    })?;

    for behaviour in &file.behaviours {
        behaviour.validate()?;
    }

    let scene = Scene::new(file.frame_rate, n_frames, others, ego, lanes)?;
    Ok(LoadedScene {
        scene: Arc::new(scene),
        behaviours: file.behaviours.clone(),
    })
}

// ── Behaviour labels ─────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossState {
    NotCrossing,
    Crossing,
}

/// Expand a behaviour record into per-frame states over the pedestrian's
/// visible frames. Crossing spans [start, end], or [start, last visible]
/// when no end is annotated.
pub fn materialize_frame_labels(
    record: &BehaviourRecord,
    visible_frames: &[usize],
) -> Result<Vec<(usize, CrossState)>, IngestError> {
    record.validate()?;
    if !record.will_cross {
        return Ok(visible_frames
            .iter()
            .map(|t| (*t, CrossState::NotCrossing))
            .collect());
    }
    let start = record
        .crossing_start_frame
        .ok_or_else(|| IngestError::MissingStartFrame(record.pedestrian_id.clone()))?;
    if !visible_frames.contains(&start) {
        return Err(IngestError::StartOutsideVisibility {
            start,
            id: record.pedestrian_id.clone(),
        });
    }
    let end = record
        .crossing_end_frame
        .unwrap_or_else(|| *visible_frames.iter().max().unwrap());
    Ok(visible_frames
        .iter()
        .map(|t| {
            let state = if *t >= start && *t <= end {
                CrossState::Crossing
            } else {
                CrossState::NotCrossing
            };
            (*t, state)
        })
        .collect())
}

// ── Dataset statistics ───────────────────────────────────────────────────

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub behavioural_pedestrians: usize,
    pub crossing: usize,
    pub non_crossing: usize,
    pub frame_behaviour_annotations: usize,
    pub pedestrian_box_new: usize,
    pub pedestrian_box_original: usize,
    pub other_box_new: usize,
    pub other_box_original: usize,
    pub frame_rate: f64,
}

impl DatasetStats {
    pub fn pedestrian_boxes(&self) -> usize {
        self.pedestrian_box_new + self.pedestrian_box_original
    }

    pub fn other_boxes(&self) -> usize {
        self.other_box_new + self.other_box_original
    }

    /// CSV report in the published table layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Annt.,New,Original,Total\n");
        out.push_str(&format!(
            "# Ped. with Beh.,{},-,{}\n",
            self.behavioural_pedestrians, self.behavioural_pedestrians
        ));
        out.push_str(&format!("# Cross. Peds.,{},-,{}\n", self.crossing, self.crossing));
        out.push_str(&format!(
            "# Non-cross Peds.,{},-,{}\n",
            self.non_crossing, self.non_crossing
        ));
        out.push_str(&format!(
            "# Per-frame beh. annt.,{},-,{}\n",
            self.frame_behaviour_annotations, self.frame_behaviour_annotations
        ));
        out.push_str(&format!(
            "# Ped. box annt.,{},{},{}\n",
            self.pedestrian_box_new,
            self.pedestrian_box_original,
            self.pedestrian_boxes()
        ));
        out.push_str(&format!(
            "# Other box annt.,{},{},{}\n",
            self.other_box_new,
            self.other_box_original,
            self.other_boxes()
        ));
        out.push_str(&format!("Annt. frame rate,{}Hz,2Hz,{}Hz\n", self.frame_rate, self.frame_rate));
        out
    }
}

/// Exact counts over a set of annotation files. Boxes without a provenance
/// tag count as original.
pub fn compute_stats(files: &[SceneFile]) -> DatasetStats {
    let mut stats = DatasetStats::default();
    for file in files {
        stats.frame_rate = file.frame_rate;
        stats.behavioural_pedestrians += file.behaviours.len();
        stats.crossing += file.behaviours.iter().filter(|b| b.will_cross).count();
        stats.non_crossing += file.behaviours.iter().filter(|b| !b.will_cross).count();

        let behavioural_ids: std::collections::HashSet<&str> = file
            .behaviours
            .iter()
            .map(|b| b.pedestrian_id.as_str())
            .collect();
        for frame in &file.frames {
            for obj in &frame.objects {
                let new = obj.provenance == Some(Provenance::Interpolated);
                if obj.class == RoadUserClass::Pedestrian {
                    if new {
                        stats.pedestrian_box_new += 1;
                    } else {
                        stats.pedestrian_box_original += 1;
                    }
                    if behavioural_ids.contains(obj.id.as_str()) {
                        stats.frame_behaviour_annotations += 1;
                    }
                } else if new {
                    stats.other_box_new += 1;
                } else {
                    stats.other_box_original += 1;
                }
            }
        }
    }
    stats
}

// ── Interpolation verification ───────────────────────────────────────────

/// Intersection-over-union of two axis-aligned boxes.
pub fn iou(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let ix = (a.2.min(b.2) - a.0.max(b.0)).max(0.0);
    let iy = (a.3.min(b.3) - a.1.max(b.1)).max(0.0);
    let inter = ix * iy;
    let area_a = (a.2 - a.0).max(0.0) * (a.3 - a.1).max(0.0);
    let area_b = (b.2 - b.0).max(0.0) * (b.3 - b.1).max(0.0);
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectVerification {
    pub object_id: String,
    pub boxes: usize,
    pub mean_best_iou: f64,
    pub min_best_iou: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnmatchedBox {
    pub object_id: String,
    pub timestamp: f64,
    pub best_iou: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub iou_threshold: f64,
    pub per_object: Vec<ObjectVerification>,
    /// Interpolated boxes whose footprint matches no same-class detection
    /// at or above the threshold.
    pub unmatched_interpolated: Vec<UnmatchedBox>,
}

/// Compare projected 2-D footprints against per-frame detections. Frames
/// are matched by timestamp; a projection frame without a detection frame
/// is an error.
pub fn verify_interpolation(
    projections: &ProjectionsFile,
    detections: &DetectionsFile,
    iou_threshold: f64,
) -> Result<VerificationReport, IngestError> {
    use std::collections::BTreeMap;
    let mut best_ious: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut unmatched = Vec::new();

    for frame in &projections.frames {
        let detection_frame = detections
            .frames
            .iter()
            .find(|d| (d.timestamp - frame.timestamp).abs() < 1e-6)
            .ok_or(IngestError::FrameMismatch(frame.timestamp))?;
        for projected in &frame.boxes {
            let best = detection_frame
                .boxes
                .iter()
                .filter(|d| d.class == projected.class)
                .map(|d| {
                    iou(
                        (projected.x1, projected.y1, projected.x2, projected.y2),
                        (d.x1, d.y1, d.x2, d.y2),
                    )
                })
                .fold(0.0f64, f64::max);
            best_ious
                .entry(projected.object_id.clone())
                .or_default()
                .push(best);
            if projected.provenance == Some(Provenance::Interpolated) && best < iou_threshold {
                unmatched.push(UnmatchedBox {
                    object_id: projected.object_id.clone(),
                    timestamp: frame.timestamp,
                    best_iou: best,
                });
            }
        }
    }

    let per_object = best_ious
        .into_iter()
        .map(|(object_id, ious)| ObjectVerification {
            object_id,
            boxes: ious.len(),
            mean_best_iou: ious.iter().sum::<f64>() / ious.len() as f64,
            min_best_iou: ious.iter().copied().fold(f64::INFINITY, f64::min),
        })
        .collect();

    Ok(VerificationReport {
        iou_threshold,
        per_object,
        unmatched_interpolated: unmatched,
    })
}
