//! Bird's-eye-view world model: road users, their per-frame states, lane
//! geometry, and observation windows.
//!
//! Frames are indexed from 0. The first frame of a scene has speed and
//! velocity 0 by definition; from the second frame on they are computed
//! from the displacement since the previous frame.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for unit-norm and timestamp-spacing checks.
pub const GEOM_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("speed undefined for object {id} at frame {frame}: {reason}")]
    SpeedUndefined {
        id: String,
        frame: usize,
        reason: String,
    },
    #[error("velocity undefined for object {id} at frame {frame}: {reason}")]
    VelocityUndefined {
        id: String,
        frame: usize,
        reason: String,
    },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("unknown road user id {0}")]
    UnknownUser(String),
}

/// 2-D point or direction in global bird's-eye-view coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        self.sub(other).norm()
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n < GEOM_EPS {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector for a yaw angle (radians, counter-clockwise from +x).
    pub fn from_yaw(yaw: f64) -> Vec2 {
        Vec2::new(yaw.cos(), yaw.sin())
    }
}

/// State of one road user in one frame. `present == false` means the object
/// was not observed in this frame; the remaining fields are then meaningless.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameState {
    pub location: Vec2,
    /// Unit heading vector.
    pub orientation: Vec2,
    pub length: f64,
    pub width: f64,
    pub timestamp: f64,
    pub present: bool,
}

impl FrameState {
    pub fn absent(timestamp: f64) -> Self {
        FrameState {
            location: Vec2::ZERO,
            orientation: Vec2::new(1.0, 0.0),
            length: 1.0,
            width: 1.0,
            timestamp,
            present: false,
        }
    }

    fn validate(&self, id: &str, frame: usize) -> Result<(), SceneError> {
        if !self.present {
            return Ok(());
        }
        if !self.location.is_finite() || !self.orientation.is_finite() {
            return Err(SceneError::InvalidScene(format!(
                "non-finite state for {id} at frame {frame}"
            )));
        }
        if (self.orientation.norm() - 1.0).abs() > GEOM_EPS {
            return Err(SceneError::InvalidScene(format!(
                "orientation of {id} at frame {frame} is not unit length"
            )));
        }
        if self.length <= 0.0 || self.width <= 0.0 {
            return Err(SceneError::InvalidScene(format!(
                "non-positive size for {id} at frame {frame}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoadUserClass {
    Pedestrian,
    Vehicle,
    Bicycle,
    EgoVehicle,
}

impl RoadUserClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoadUserClass::Pedestrian => "pedestrian",
            RoadUserClass::Vehicle => "vehicle",
            RoadUserClass::Bicycle => "bicycle",
            RoadUserClass::EgoVehicle => "ego-vehicle",
        }
    }
}

/// One tracked object with a state per scene frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadUser {
    pub id: String,
    pub class: RoadUserClass,
    pub states: Vec<FrameState>,
}

impl RoadUser {
    pub fn present_at(&self, frame: usize) -> bool {
        self.states.get(frame).map(|s| s.present).unwrap_or(false)
    }

    pub fn state(&self, frame: usize) -> Option<&FrameState> {
        self.states.get(frame).filter(|s| s.present)
    }

    pub fn location(&self, frame: usize) -> Option<Vec2> {
        self.state(frame).map(|s| s.location)
    }

    /// Frames in which the object is present.
    pub fn present_frames(&self) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.present)
            .map(|(t, _)| t)
            .collect()
    }
}

/// Directed lane centerlines plus a drivable-area test. Travel direction is
/// the vertex order of each polyline.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LaneGraph {
    pub lanes: Vec<Vec<Vec2>>,
    pub drivable_polygons: Vec<Vec<Vec2>>,
}

impl LaneGraph {
    pub fn validate(&self) -> Result<(), SceneError> {
        for (i, lane) in self.lanes.iter().enumerate() {
            if lane.len() < 2 {
                return Err(SceneError::InvalidScene(format!(
                    "lane {i} has fewer than 2 vertices"
                )));
            }
            for w in lane.windows(2) {
                if w[0].distance(w[1]) < GEOM_EPS {
                    return Err(SceneError::InvalidScene(format!(
                        "lane {i} has coincident consecutive vertices"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point-in-polygon test against the drivable polygons. Points on a
    /// polygon boundary count as inside.
    pub fn is_drivable(&self, p: Vec2) -> bool {
        self.drivable_polygons
            .iter()
            .any(|poly| point_in_polygon(p, poly))
    }
}

/// Even-odd rule with an explicit on-edge check so boundaries count as inside.
fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let n = poly.len();
    for i in 0..n {
        if point_on_segment(p, poly[i], poly[(i + 1) % n]) {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> bool {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let cross = ab.x * ap.y - ab.y * ap.x;
    if cross.abs() > GEOM_EPS {
        return false;
    }
    let dot = ap.dot(ab);
    dot >= -GEOM_EPS && dot <= ab.dot(ab) + GEOM_EPS
}

/// A complete observed scene: all road users (ego separated out), lane
/// geometry, and the frame clock.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    pub frame_rate: f64,
    pub frames: usize,
    pub users: Vec<RoadUser>,
    pub ego: RoadUser,
    pub lanes: LaneGraph,
}

impl Scene {
    pub fn new(
        frame_rate: f64,
        frames: usize,
        users: Vec<RoadUser>,
        ego: RoadUser,
        lanes: LaneGraph,
    ) -> Result<Self, SceneError> {
        let scene = Scene {
            frame_rate,
            frames,
            users,
            ego,
            lanes,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.frame_rate <= 0.0 {
            return Err(SceneError::InvalidScene("frame rate must be > 0".into()));
        }
        if self.frames == 0 {
            return Err(SceneError::InvalidScene("scene has no frames".into()));
        }
        self.lanes.validate()?;
        let mut ids = std::collections::HashSet::new();
        for user in self.users.iter().chain(std::iter::once(&self.ego)) {
            if !ids.insert(user.id.clone()) {
                return Err(SceneError::InvalidScene(format!(
                    "duplicate road user id {}",
                    user.id
                )));
            }
            if user.states.len() != self.frames {
                return Err(SceneError::InvalidScene(format!(
                    "user {} has {} states, scene has {} frames",
                    user.id,
                    user.states.len(),
                    self.frames
                )));
            }
            let spacing = 1.0 / self.frame_rate;
            for (t, state) in user.states.iter().enumerate() {
                state.validate(&user.id, t)?;
                if t > 0 {
                    let dt = state.timestamp - user.states[t - 1].timestamp;
                    if (dt - spacing).abs() > GEOM_EPS {
                        return Err(SceneError::InvalidScene(format!(
                            "user {} timestamps not spaced 1/frame_rate at frame {t}",
                            user.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn user(&self, id: &str) -> Option<&RoadUser> {
        if self.ego.id == id {
            return Some(&self.ego);
        }
        self.users.iter().find(|u| u.id == id)
    }

    /// Non-ego users present in the given frame, ordered by id.
    pub fn present_users(&self, frame: usize) -> Vec<&RoadUser> {
        let mut out: Vec<&RoadUser> = self
            .users
            .iter()
            .filter(|u| u.present_at(frame))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

/// Which unit convention speed values use. The thresholds that consume
/// speeds are interpreted in the same unit system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedDefinition {
    /// Per-frame displacement divided by the frame rate in Hz.
    #[default]
    PaperLiteral,
    /// Meters per second (per-frame displacement times the frame rate).
    Physical,
}

/// Speed of a road user at a frame. Frame 0 has speed 0 by definition.
pub fn compute_speed(
    user: &RoadUser,
    frame: usize,
    frame_rate: f64,
    definition: SpeedDefinition,
) -> Result<f64, SceneError> {
    if frame == 0 {
        return Ok(0.0);
    }
    let here = user.location(frame).ok_or_else(|| SceneError::SpeedUndefined {
        id: user.id.clone(),
        frame,
        reason: "object absent at frame".into(),
    })?;
    let prev = user
        .location(frame - 1)
        .ok_or_else(|| SceneError::SpeedUndefined {
            id: user.id.clone(),
            frame,
            reason: "object absent at previous frame".into(),
        })?;
    let displacement = here.distance(prev);
    Ok(match definition {
        SpeedDefinition::PaperLiteral => displacement / frame_rate,
        SpeedDefinition::Physical => displacement * frame_rate,
    })
}

/// Per-frame displacement vector. Frame 0 is (0, 0) by definition.
pub fn compute_velocity(user: &RoadUser, frame: usize) -> Result<Vec2, SceneError> {
    if frame == 0 {
        return Ok(Vec2::ZERO);
    }
    let here = user
        .location(frame)
        .ok_or_else(|| SceneError::VelocityUndefined {
            id: user.id.clone(),
            frame,
            reason: "object absent at frame".into(),
        })?;
    let prev = user
        .location(frame - 1)
        .ok_or_else(|| SceneError::VelocityUndefined {
            id: user.id.clone(),
            frame,
            reason: "object absent at previous frame".into(),
        })?;
    Ok(here.sub(prev))
}

/// A labelled observation of one target pedestrian over `length` consecutive
/// frames ending at `end_frame`.
#[derive(Debug, Clone)]
pub struct ObservationWindow {
    pub scene: Arc<Scene>,
    pub target_id: String,
    pub start_frame: usize,
    pub length: usize,
    /// 1 = the pedestrian will cross, 0 = it will not.
    pub label: u8,
}

impl ObservationWindow {
    pub fn new(
        scene: Arc<Scene>,
        target_id: &str,
        start_frame: usize,
        length: usize,
        label: u8,
    ) -> Result<Self, SceneError> {
        if length < 2 {
            return Err(SceneError::InvalidWindow(
                "window length must be at least 2".into(),
            ));
        }
        let target = scene
            .user(target_id)
            .ok_or_else(|| SceneError::UnknownUser(target_id.to_string()))?;
        if start_frame + length > scene.frames {
            return Err(SceneError::InvalidWindow(format!(
                "window [{start_frame}, {}) exceeds scene length {}",
                start_frame + length,
                scene.frames
            )));
        }
        for t in start_frame..start_frame + length {
            if !target.present_at(t) {
                return Err(SceneError::InvalidWindow(format!(
                    "target {target_id} absent at frame {t}"
                )));
            }
        }
        Ok(ObservationWindow {
            scene,
            target_id: target_id.to_string(),
            start_frame,
            length,
            label,
        })
    }

    pub fn end_frame(&self) -> usize {
        self.start_frame + self.length - 1
    }

    pub fn frames(&self) -> impl Iterator<Item = usize> {
        self.start_frame..self.start_frame + self.length
    }

    pub fn target(&self) -> &RoadUser {
        self.scene.user(&self.target_id).expect("validated at construction")
    }
}

/// Label-source information: how the window sampler should treat the target.
#[derive(Debug, Clone, Copy)]
pub enum WindowLabelSource {
    /// Crossing pedestrian with the frame at which crossing starts.
    Crossing { start_frame: usize },
    /// Non-crossing pedestrian; windows may end at any frame where it is
    /// still observed.
    NonCrossing,
}

/// Sampling bounds (seconds before the crossing-start frame) for windows of
/// crossing pedestrians. Both boundaries are inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PreEventRange {
    pub min_seconds: f64,
    pub max_seconds: f64,
}

impl Default for PreEventRange {
    fn default() -> Self {
        PreEventRange {
            min_seconds: 1.0,
            max_seconds: 2.0,
        }
    }
}

/// Enumerate observation windows for one target pedestrian.
///
/// Candidate end frames start at the earliest frame where a full window of
/// `length` present frames exists (inside the pre-event band for crossing
/// pedestrians) and advance by `stride`; candidates whose window is
/// interrupted by an absent frame are dropped without re-anchoring.
pub fn extract_windows(
    scene: &Arc<Scene>,
    target_id: &str,
    label_source: WindowLabelSource,
    length: usize,
    stride: usize,
    pre_event: PreEventRange,
) -> Result<Vec<ObservationWindow>, SceneError> {
    if stride == 0 {
        return Err(SceneError::InvalidWindow("stride must be >= 1".into()));
    }
    if length < 2 {
        return Err(SceneError::InvalidWindow(
            "window length must be at least 2".into(),
        ));
    }
    let target = scene
        .user(target_id)
        .ok_or_else(|| SceneError::UnknownUser(target_id.to_string()))?;
    if length > scene.frames {
        return Ok(Vec::new());
    }

    let window_ok = |end: usize| -> bool {
        if end + 1 < length {
            return false;
        }
        (end + 1 - length..=end).all(|t| target.present_at(t))
    };

    let (lo, hi, label) = match label_source {
        WindowLabelSource::Crossing { start_frame } => {
            let lo_offset = (pre_event.max_seconds * scene.frame_rate).round() as i64;
            let hi_offset = (pre_event.min_seconds * scene.frame_rate).round() as i64;
            let lo = start_frame as i64 - lo_offset;
            let hi = (start_frame as i64 - hi_offset).min(start_frame as i64 - 1);
            (lo.max(0), hi.min(scene.frames as i64 - 1), 1u8)
        }
        WindowLabelSource::NonCrossing => (0, scene.frames as i64 - 1, 0u8),
    };

    let mut windows = Vec::new();
    let mut anchored = false;
    let mut end = lo.max(length as i64 - 1);
    while end <= hi {
        let e = end as usize;
        if window_ok(e) {
            anchored = true;
            windows.push(ObservationWindow::new(
                Arc::clone(scene),
                target_id,
                e + 1 - length,
                length,
                label,
            )?);
            end += stride as i64;
        } else {
            // Scan frame by frame until the first valid window anchors the
            // stride grid; afterwards interrupted candidates are dropped.
            end += if anchored { stride as i64 } else { 1 };
        }
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn straight_user(
        id: &str,
        class: RoadUserClass,
        start: Vec2,
        step: Vec2,
        frames: usize,
        frame_rate: f64,
    ) -> RoadUser {
        let states = (0..frames)
            .map(|t| FrameState {
                location: start.add(step.scale(t as f64)),
                orientation: step.normalized().unwrap_or(Vec2::new(1.0, 0.0)),
                length: 0.8,
                width: 0.6,
                timestamp: t as f64 / frame_rate,
                present: true,
            })
            .collect();
        RoadUser {
            id: id.to_string(),
            class,
            states,
        }
    }

    fn test_scene(frames: usize) -> Arc<Scene> {
        let rate = 10.0;
        let ped = straight_user(
            "ped",
            RoadUserClass::Pedestrian,
            Vec2::new(0.0, 5.0),
            Vec2::new(0.1, 0.0),
            frames,
            rate,
        );
        let ego = straight_user(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::new(-20.0, 0.0),
            Vec2::new(0.5, 0.0),
            frames,
            rate,
        );
        Arc::new(Scene::new(rate, frames, vec![ped], ego, LaneGraph::default()).unwrap())
    }

    #[test]
    fn speed_is_zero_at_first_frame() {
        let scene = test_scene(5);
        let ped = scene.user("ped").unwrap();
        let s = compute_speed(ped, 0, 10.0, SpeedDefinition::PaperLiteral).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn speed_matches_displacement_over_rate() {
        // displacement (3, 4) -> norm 5, frame rate 10 -> 0.5
        let mut ped = straight_user(
            "p",
            RoadUserClass::Pedestrian,
            Vec2::ZERO,
            Vec2::ZERO,
            2,
            10.0,
        );
        ped.states[1].location = Vec2::new(3.0, 4.0);
        let s = compute_speed(&ped, 1, 10.0, SpeedDefinition::PaperLiteral).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        let phys = compute_speed(&ped, 1, 10.0, SpeedDefinition::Physical).unwrap();
        assert!((phys - 50.0).abs() < 1e-12);
    }

    #[test]
    fn speed_zero_for_stationary() {
        let ped = straight_user(
            "p",
            RoadUserClass::Pedestrian,
            Vec2::new(2.0, 2.0),
            Vec2::ZERO,
            3,
            10.0,
        );
        assert_eq!(
            compute_speed(&ped, 2, 10.0, SpeedDefinition::PaperLiteral).unwrap(),
            0.0
        );
    }

    #[test]
    fn speed_error_when_absent() {
        let mut ped = straight_user(
            "p",
            RoadUserClass::Pedestrian,
            Vec2::ZERO,
            Vec2::new(0.1, 0.0),
            4,
            10.0,
        );
        ped.states[1].present = false;
        assert!(compute_speed(&ped, 2, 10.0, SpeedDefinition::PaperLiteral).is_err());
        assert!(compute_speed(&ped, 1, 10.0, SpeedDefinition::PaperLiteral).is_err());
    }

    #[test]
    fn velocity_examples() {
        let mut ped = straight_user(
            "p",
            RoadUserClass::Pedestrian,
            Vec2::ZERO,
            Vec2::ZERO,
            2,
            10.0,
        );
        ped.states[0].location = Vec2::new(4.0, 3.0);
        ped.states[1].location = Vec2::new(5.0, 1.0);
        assert_eq!(compute_velocity(&ped, 0).unwrap(), Vec2::ZERO);
        let v = compute_velocity(&ped, 1).unwrap();
        assert_eq!(v, Vec2::new(1.0, -2.0));
    }

    #[test]
    fn velocity_telescopes_to_total_displacement() {
        let ped = straight_user(
            "p",
            RoadUserClass::Pedestrian,
            Vec2::new(1.0, -2.0),
            Vec2::new(0.3, 0.7),
            12,
            10.0,
        );
        let mut sum = Vec2::ZERO;
        for t in 1..12 {
            sum = sum.add(compute_velocity(&ped, t).unwrap());
        }
        let total = ped.location(11).unwrap().sub(ped.location(0).unwrap());
        assert!((sum.x - total.x).abs() < 1e-12);
        assert!((sum.y - total.y).abs() < 1e-12);
    }

    #[test]
    fn crossing_windows_end_one_to_two_seconds_before_start() {
        let scene = test_scene(60);
        let windows = extract_windows(
            &scene,
            "ped",
            WindowLabelSource::Crossing { start_frame: 40 },
            5,
            2,
            PreEventRange::default(),
        )
        .unwrap();
        let ends: Vec<usize> = windows.iter().map(|w| w.end_frame()).collect();
        assert_eq!(ends, vec![20, 22, 24, 26, 28, 30]);
        assert!(windows.iter().all(|w| w.label == 1));
    }

    #[test]
    fn window_longer_than_observation_yields_empty() {
        let scene = test_scene(4);
        let windows = extract_windows(
            &scene,
            "ped",
            WindowLabelSource::NonCrossing,
            5,
            2,
            PreEventRange::default(),
        )
        .unwrap();
        assert!(windows.is_empty());
    }

    #[test]
    fn non_crossing_window_count() {
        // Pedestrian visible for frames 0..30 (30 frames), T=5, stride=2.
        let scene = test_scene(30);
        let windows = extract_windows(
            &scene,
            "ped",
            WindowLabelSource::NonCrossing,
            5,
            2,
            PreEventRange::default(),
        )
        .unwrap();
        assert_eq!(windows.len(), 13);
        assert_eq!(windows[0].end_frame(), 4);
        assert_eq!(windows.last().unwrap().end_frame(), 28);
        assert!(windows.iter().all(|w| w.label == 0));
    }

    #[test]
    fn windows_respect_target_presence() {
        let rate = 10.0;
        let mut ped = straight_user(
            "ped",
            RoadUserClass::Pedestrian,
            Vec2::ZERO,
            Vec2::new(0.1, 0.0),
            30,
            rate,
        );
        for t in 10..14 {
            ped.states[t].present = false;
        }
        let ego = straight_user(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::new(-20.0, 0.0),
            Vec2::new(0.5, 0.0),
            30,
            rate,
        );
        let scene =
            Arc::new(Scene::new(rate, 30, vec![ped], ego, LaneGraph::default()).unwrap());
        let windows = extract_windows(
            &scene,
            "ped",
            WindowLabelSource::NonCrossing,
            5,
            2,
            PreEventRange::default(),
        )
        .unwrap();
        for w in &windows {
            for t in w.frames() {
                assert!(w.target().present_at(t));
            }
        }
    }

    #[test]
    fn scene_rejects_mismatched_state_lengths() {
        let rate = 10.0;
        let ped = straight_user(
            "ped",
            RoadUserClass::Pedestrian,
            Vec2::ZERO,
            Vec2::ZERO,
            3,
            rate,
        );
        let ego = straight_user(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::ZERO,
            Vec2::ZERO,
            4,
            rate,
        );
        assert!(Scene::new(rate, 4, vec![ped], ego, LaneGraph::default()).is_err());
    }

    #[test]
    fn point_in_polygon_boundary_counts_inside() {
        let square = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(0.0, 4.0),
        ];
        let lanes = LaneGraph {
            lanes: vec![],
            drivable_polygons: vec![square],
        };
        assert!(lanes.is_drivable(Vec2::new(2.0, 2.0)));
        assert!(lanes.is_drivable(Vec2::new(0.0, 2.0)));
        assert!(lanes.is_drivable(Vec2::new(4.0, 4.0)));
        assert!(!lanes.is_drivable(Vec2::new(5.0, 2.0)));
    }
}
