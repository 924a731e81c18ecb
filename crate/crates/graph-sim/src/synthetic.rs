//! Deterministic synthetic traffic scenes and the naive re-implementations
//! used as test oracles. Scenes are kinematically consistent (positions
//! integrate per-frame velocities), crossing labels fall out of the
//! geometry, and everything is reproducible from a single seed.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{ClusteringParams, MotionFlag};
use crate::ingest::{BehaviourRecord, FrameRecord, MapFile, ObjectRecord, SceneFile};
use crate::scene::{
    extract_windows, FrameState, LaneGraph, ObservationWindow, PreEventRange, RoadUser,
    RoadUserClass, Scene, SpeedDefinition, Vec2, WindowLabelSource,
};

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("scenario must have at least one frame")]
    ZeroFrames,
    #[error("scene error: {0}")]
    Scene(#[from] crate::scene::SceneError),
}

pub const ROAD_LENGTH: f64 = 100.0;
pub const LANE_WIDTH: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LaneLayout {
    #[default]
    StraightRoad,
    TJunction,
}

impl LaneLayout {
    /// Lane centerlines (travel direction = vertex order) plus the drivable
    /// polygons of the template.
    pub fn lane_graph(&self) -> LaneGraph {
        let half = LANE_WIDTH; // two-lane road: full width 2 * LANE_WIDTH
        let main = LaneGraph {
            lanes: vec![
                // Eastbound lane on the south side.
                vec![Vec2::new(0.0, -half / 2.0), Vec2::new(ROAD_LENGTH, -half / 2.0)],
                // Westbound lane on the north side.
                vec![Vec2::new(ROAD_LENGTH, half / 2.0), Vec2::new(0.0, half / 2.0)],
            ],
            drivable_polygons: vec![vec![
                Vec2::new(0.0, -half),
                Vec2::new(ROAD_LENGTH, -half),
                Vec2::new(ROAD_LENGTH, half),
                Vec2::new(0.0, half),
            ]],
        };
        match self {
            LaneLayout::StraightRoad => main,
            LaneLayout::TJunction => {
                let mut graph = main;
                let stem_x = ROAD_LENGTH / 2.0;
                graph.lanes.push(vec![
                    Vec2::new(stem_x - half / 2.0, -40.0),
                    Vec2::new(stem_x - half / 2.0, -half),
                ]);
                graph.lanes.push(vec![
                    Vec2::new(stem_x + half / 2.0, -half),
                    Vec2::new(stem_x + half / 2.0, -40.0),
                ]);
                graph.drivable_polygons.push(vec![
                    Vec2::new(stem_x - half, -40.0),
                    Vec2::new(stem_x + half, -40.0),
                    Vec2::new(stem_x + half, -LANE_WIDTH),
                    Vec2::new(stem_x - half, -LANE_WIDTH),
                ]);
                graph
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub frames: usize,
    pub frame_rate: f64,
    pub lane_layout: LaneLayout,
    pub crossers: usize,
    pub walkers: usize,
    pub standers: usize,
    pub vehicles: usize,
    pub bicycles: usize,
    /// Scale of the uniform position jitter applied to start locations.
    pub noise_scale: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 0,
            frames: 60,
            frame_rate: 10.0,
            lane_layout: LaneLayout::StraightRoad,
            crossers: 1,
            walkers: 1,
            standers: 1,
            vehicles: 2,
            bicycles: 0,
            noise_scale: 1.0,
        }
    }
}

/// Build a road user by integrating per-frame velocities (meters/second).
/// Orientation follows the motion direction; `fallback_heading` covers
/// standing objects.
fn integrate_user(
    id: &str,
    class: RoadUserClass,
    start: Vec2,
    velocities: &[Vec2],
    frame_rate: f64,
    fallback_heading: Vec2,
    size: (f64, f64),
) -> RoadUser {
    let dt = 1.0 / frame_rate;
    let mut states = Vec::with_capacity(velocities.len());
    let mut pos = start;
    for (t, v) in velocities.iter().enumerate() {
        if t > 0 {
            pos = pos.add(velocities[t - 1].scale(dt));
        }
        let orientation = v
            .normalized()
            .or_else(|| fallback_heading.normalized())
            .unwrap_or(Vec2::new(1.0, 0.0));
        states.push(FrameState {
            location: pos,
            orientation,
            length: size.0,
            width: size.1,
            timestamp: t as f64 * dt,
            present: true,
        });
    }
    RoadUser {
        id: id.to_string(),
        class,
        states,
    }
}

/// Kinematically consistent scene plus behaviour records derived from the
/// geometry (a crosser's start frame is the first frame inside a drivable
/// polygon).
pub fn generate_scene(
    spec: &ScenarioSpec,
) -> Result<(Arc<Scene>, Vec<BehaviourRecord>), SyntheticError> {
    if spec.frames == 0 {
        return Err(SyntheticError::ZeroFrames);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lanes = spec.lane_layout.lane_graph();
    let frames = spec.frames;
    let rate = spec.frame_rate;
    let jitter = |rng: &mut ChaCha8Rng, scale: f64| rng.random_range(-scale..scale);

    let mut users = Vec::new();
    let mut behaviours = Vec::new();

    for k in 0..spec.crossers {
        let x0 = 30.0 + rng.random_range(0.0..30.0) + jitter(&mut rng, spec.noise_scale);
        let y0 = 5.5 + rng.random_range(0.0..1.5);
        let parallel_frames = rng.random_range(10..20usize);
        let walk_dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let walk_speed = rng.random_range(1.0..1.4);
        let approach_vy = -rng.random_range(0.8..1.3);
        let velocities: Vec<Vec2> = (0..frames)
            .map(|t| {
                if t < parallel_frames {
                    Vec2::new(walk_dir * walk_speed, 0.0)
                } else {
                    Vec2::new(walk_dir * 0.2, approach_vy)
                }
            })
            .collect();
        let user = integrate_user(
            &format!("crosser{k:03}"),
            RoadUserClass::Pedestrian,
            Vec2::new(x0, y0),
            &velocities,
            rate,
            Vec2::new(walk_dir, 0.0),
            (0.7, 0.6),
        );
        let start_frame = user
            .states
            .iter()
            .position(|s| lanes.is_drivable(s.location));
        behaviours.push(BehaviourRecord {
            pedestrian_id: user.id.clone(),
            will_cross: true,
            crossing_start_frame: start_frame,
            crossing_end_frame: None,
        });
        users.push(user);
    }

    for k in 0..spec.walkers {
        let x0 = 10.0 + rng.random_range(0.0..60.0) + jitter(&mut rng, spec.noise_scale);
        let y0 = 5.0 + rng.random_range(0.0..2.0);
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let speed = rng.random_range(1.0..1.5);
        let velocities = vec![Vec2::new(dir * speed, 0.0); frames];
        let user = integrate_user(
            &format!("walker{k:03}"),
            RoadUserClass::Pedestrian,
            Vec2::new(x0, y0),
            &velocities,
            rate,
            Vec2::new(dir, 0.0),
            (0.7, 0.6),
        );
        behaviours.push(BehaviourRecord {
            pedestrian_id: user.id.clone(),
            will_cross: false,
            crossing_start_frame: None,
            crossing_end_frame: None,
        });
        users.push(user);
    }

    for k in 0..spec.standers {
        let x0 = 10.0 + rng.random_range(0.0..80.0);
        let y0 = 4.5 + rng.random_range(0.0..3.0);
        let heading = Vec2::from_yaw(rng.random_range(0.0..std::f64::consts::TAU));
        // Sub-threshold shuffle.
        let velocities: Vec<Vec2> = (0..frames)
            .map(|_| Vec2::new(jitter(&mut rng, 0.05), jitter(&mut rng, 0.05)))
            .collect();
        let user = integrate_user(
            &format!("stander{k:03}"),
            RoadUserClass::Pedestrian,
            Vec2::new(x0, y0),
            &velocities,
            rate,
            heading,
            (0.7, 0.6),
        );
        behaviours.push(BehaviourRecord {
            pedestrian_id: user.id.clone(),
            will_cross: false,
            crossing_start_frame: None,
            crossing_end_frame: None,
        });
        users.push(user);
    }

    for k in 0..spec.vehicles {
        let parked = rng.random_bool(0.4);
        if parked {
            let x0 = 5.0 + rng.random_range(0.0..90.0);
            let heading = if rng.random_bool(0.5) {
                Vec2::new(1.0, 0.0)
            } else {
                Vec2::new(-1.0, 0.0)
            };
            let y = if heading.x > 0.0 { -LANE_WIDTH / 2.0 } else { LANE_WIDTH / 2.0 };
            users.push(integrate_user(
                &format!("vehicle{k:03}"),
                RoadUserClass::Vehicle,
                Vec2::new(x0, y),
                &vec![Vec2::ZERO; frames],
                rate,
                heading,
                (4.5, 2.0),
            ));
        } else {
            let eastbound = rng.random_bool(0.5);
            let speed = rng.random_range(4.0..9.0);
            let (x0, v) = if eastbound {
                (rng.random_range(0.0..30.0), Vec2::new(speed, 0.0))
            } else {
                (rng.random_range(70.0..100.0), Vec2::new(-speed, 0.0))
            };
            let y = if eastbound { -LANE_WIDTH / 2.0 } else { LANE_WIDTH / 2.0 };
            users.push(integrate_user(
                &format!("vehicle{k:03}"),
                RoadUserClass::Vehicle,
                Vec2::new(x0, y),
                &vec![v; frames],
                rate,
                v,
                (4.5, 2.0),
            ));
        }
    }

    for k in 0..spec.bicycles {
        let eastbound = rng.random_bool(0.5);
        let speed = rng.random_range(3.0..6.0);
        let (x0, v) = if eastbound {
            (rng.random_range(0.0..40.0), Vec2::new(speed, 0.0))
        } else {
            (rng.random_range(60.0..100.0), Vec2::new(-speed, 0.0))
        };
        let y = if eastbound { -LANE_WIDTH + 0.8 } else { LANE_WIDTH - 0.8 };
        users.push(integrate_user(
            &format!("bicycle{k:03}"),
            RoadUserClass::Bicycle,
            Vec2::new(x0, y),
            &vec![v; frames],
            rate,
            v,
            (1.8, 0.6),
        ));
    }

    let ego_speed = rng.random_range(4.0..7.0);
    let ego = integrate_user(
        "ego",
        RoadUserClass::EgoVehicle,
        Vec2::new(2.0, -LANE_WIDTH / 2.0),
        &vec![Vec2::new(ego_speed, 0.0); frames],
        rate,
        Vec2::new(1.0, 0.0),
        (4.5, 2.0),
    );

    let scene = Scene::new(rate, frames, users, ego, lanes)?;
    Ok((Arc::new(scene), behaviours))
}

/// Extract labelled observation windows for every behavioural pedestrian of
/// a scene.
pub fn windows_from_scene(
    scene: &Arc<Scene>,
    behaviours: &[BehaviourRecord],
    length: usize,
    stride: usize,
    pre_event: PreEventRange,
) -> Result<Vec<ObservationWindow>, crate::scene::SceneError> {
    let mut out = Vec::new();
    for record in behaviours {
        let source = match (record.will_cross, record.crossing_start_frame) {
            (true, Some(start)) => WindowLabelSource::Crossing { start_frame: start },
            _ => WindowLabelSource::NonCrossing,
        };
        out.extend(extract_windows(
            scene,
            &record.pedestrian_id,
            source,
            length,
            stride,
            pre_event,
        )?);
    }
    Ok(out)
}

/// A scene together with the behavioural annotations of its pedestrians.
pub type AnnotatedScene = (Arc<Scene>, Vec<BehaviourRecord>);

/// By-construction linearly separable single-pedestrian scenes: crossers
/// approach the road at 0.35..0.6 m/s facing it, non-crossers walk
/// parallel. Labels alternate so the pedestrian balance is within one of
/// 50/50.
pub fn separable_scenes(n_ped: usize, seed: u64) -> Result<Vec<AnnotatedScene>, SyntheticError> {
    let mut out = Vec::with_capacity(n_ped);
    let rate = 10.0;
    for k in 0..n_ped {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (0xC0FFEE + k as u64).wrapping_mul(0x9E3779B97F4A7C15),
        );
        let crossing = k % 2 == 0;
        let lanes = LaneLayout::StraightRoad.lane_graph();
        let frames = if crossing { 60 } else { 40 };
        let ego_speed = rng.random_range(4.0..7.0);
        let ego = integrate_user(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::new(rng.random_range(0.0..6.0), -LANE_WIDTH / 2.0),
            &vec![Vec2::new(ego_speed, 0.0); frames],
            rate,
            Vec2::new(1.0, 0.0),
            (4.5, 2.0),
        );
        let ped_id = format!("ped{k:04}");
        let (user, record) = if crossing {
            let approach = rng.random_range(0.35..0.6);
            let drift = rng.random_range(-0.1..0.1);
            let y0 = 5.2 + rng.random_range(0.0..0.8);
            let x0 = 40.0 + rng.random_range(0.0..20.0);
            let velocities = vec![Vec2::new(drift, -approach); frames];
            let user = integrate_user(
                &ped_id,
                RoadUserClass::Pedestrian,
                Vec2::new(x0, y0),
                &velocities,
                rate,
                Vec2::new(0.0, -1.0),
                (0.7, 0.6),
            );
            let start = user
                .states
                .iter()
                .position(|s| lanes.is_drivable(s.location))
                .unwrap_or(frames - 1);
            let record = BehaviourRecord {
                pedestrian_id: ped_id.clone(),
                will_cross: true,
                crossing_start_frame: Some(start),
                crossing_end_frame: None,
            };
            (user, record)
        } else {
            let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let speed = rng.random_range(1.0..1.4);
            let y0 = 5.2 + rng.random_range(0.0..0.8);
            let x0 = 30.0 + rng.random_range(0.0..30.0);
            let velocities = vec![Vec2::new(dir * speed, 0.0); frames];
            let user = integrate_user(
                &ped_id,
                RoadUserClass::Pedestrian,
                Vec2::new(x0, y0),
                &velocities,
                rate,
                Vec2::new(dir, 0.0),
                (0.7, 0.6),
            );
            let record = BehaviourRecord {
                pedestrian_id: ped_id.clone(),
                will_cross: false,
                crossing_start_frame: None,
                crossing_end_frame: None,
            };
            (user, record)
        };
        let scene = Arc::new(Scene::new(rate, frames, vec![user], ego, lanes)?);
        out.push((scene, vec![record]));
    }
    Ok(out)
}

/// Windows for a set of annotated scenes under the standard sampling rule.
pub fn dataset_windows(
    scenes: &[AnnotatedScene],
    length: usize,
    stride: usize,
    pre_event: PreEventRange,
) -> Result<Vec<ObservationWindow>, crate::scene::SceneError> {
    let mut windows = Vec::new();
    for (scene, behaviours) in scenes {
        windows.extend(windows_from_scene(scene, behaviours, length, stride, pre_event)?);
    }
    Ok(windows)
}

/// Separable windows with the default 5-frame / stride-2 sampling.
pub fn separable_dataset(
    n_ped: usize,
    seed: u64,
) -> Result<Vec<ObservationWindow>, SyntheticError> {
    let scenes = separable_scenes(n_ped, seed)?;
    Ok(dataset_windows(&scenes, 5, 2, PreEventRange::default())?)
}

/// Number of frames in every directional-group scene.
const DIRECTIONAL_FRAMES: usize = 12;
/// Nominal crossing-start frame of positive directional-group pedestrians;
/// it lies just past the observed segment so the standard pre-event window
/// rule samples the same window grid as the negative class.
const DIRECTIONAL_START: usize = 22;

/// Scenes where only the cluster structure carries the label: two parked
/// vehicles flank a standing pedestrian at fixed distances; the label says
/// whether they face the same direction (one orientation cluster) or
/// opposite directions (split clusters). Node features and star edges are
/// identical across classes by construction.
pub fn directional_group_scenes(
    n_ped: usize,
    seed: u64,
) -> Result<Vec<AnnotatedScene>, SyntheticError> {
    let mut out = Vec::with_capacity(n_ped);
    let rate = 10.0;
    let frames = DIRECTIONAL_FRAMES;
    for k in 0..n_ped {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (0xD1CE + k as u64).wrapping_mul(0x9E3779B97F4A7C15),
        );
        let label_same = k % 2 == 0;
        let lanes = LaneLayout::StraightRoad.lane_graph();
        let ped_id = format!("ped{k:04}");

        // Shared per-scene jitter keeps the two classes identically
        // distributed in everything except the mutual orientation.
        let cx = 50.0 + rng.random_range(-5.0..5.0);
        let ped = integrate_user(
            &ped_id,
            RoadUserClass::Pedestrian,
            Vec2::new(cx, 4.4 + rng.random_range(0.0..0.4)),
            &vec![Vec2::ZERO; frames],
            rate,
            Vec2::new(0.0, -1.0),
            (0.7, 0.6),
        );

        let heading = if rng.random_bool(0.5) {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(-1.0, 0.0)
        };
        let offset = rng.random_range(3.5..4.5);
        let v1 = integrate_user(
            "vehicleA",
            RoadUserClass::Vehicle,
            Vec2::new(cx - offset, -LANE_WIDTH / 2.0),
            &vec![Vec2::ZERO; frames],
            rate,
            heading,
            (4.5, 2.0),
        );
        let second_heading = if label_same { heading } else { heading.scale(-1.0) };
        let v2 = integrate_user(
            "vehicleB",
            RoadUserClass::Vehicle,
            Vec2::new(cx + offset, -LANE_WIDTH / 2.0),
            &vec![Vec2::ZERO; frames],
            rate,
            second_heading,
            (4.5, 2.0),
        );

        let ego = integrate_user(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::new(2.0, -LANE_WIDTH / 2.0),
            &vec![Vec2::new(0.5, 0.0); frames],
            rate,
            Vec2::new(1.0, 0.0),
            (4.5, 2.0),
        );

        let scene = Arc::new(Scene::new(rate, frames, vec![ped, v1, v2], ego, lanes)?);
        let record = BehaviourRecord {
            pedestrian_id: ped_id,
            will_cross: label_same,
            crossing_start_frame: label_same.then_some(DIRECTIONAL_START),
            crossing_end_frame: None,
        };
        out.push((scene, vec![record]));
    }
    Ok(out)
}

/// Directional-group windows with the default sampling.
pub fn directional_group_dataset(
    n_ped: usize,
    seed: u64,
) -> Result<Vec<ObservationWindow>, SyntheticError> {
    let scenes = directional_group_scenes(n_ped, seed)?;
    Ok(dataset_windows(&scenes, 5, 2, PreEventRange::default())?)
}

// ── Brute-force clustering oracle ────────────────────────────────────────

/// Naive re-execution of the hierarchical clustering rules with exhaustive
/// pairwise checks and explicit component search. Test oracle only.
pub fn brute_force_cluster_oracle(
    scene: &Scene,
    frame: usize,
    params: &ClusteringParams,
    speed_def: SpeedDefinition,
) -> Vec<Vec<String>> {
    #[derive(Clone)]
    struct Obj {
        id: String,
        class: RoadUserClass,
        loc: Vec2,
        prev_loc: Option<Vec2>,
        orientation: Vec2,
        motion: MotionFlag,
    }

    let rate = scene.frame_rate;
    let objects: Vec<Obj> = scene
        .users
        .iter()
        .filter(|u| u.present_at(frame))
        .map(|u| {
            let loc = u.location(frame).unwrap();
            let prev_loc = if frame > 0 { u.location(frame - 1) } else { None };
            let speed = match prev_loc {
                Some(p) if frame > 0 => {
                    let displacement = loc.distance(p);
                    match speed_def {
                        SpeedDefinition::PaperLiteral => displacement / rate,
                        SpeedDefinition::Physical => displacement * rate,
                    }
                }
                _ => 0.0,
            };
            let threshold = match u.class {
                RoadUserClass::Pedestrian => params.pedestrian_speed_threshold,
                RoadUserClass::Bicycle => params.bicycle_speed_threshold,
                _ => params.vehicle_speed_threshold,
            };
            Obj {
                id: u.id.clone(),
                class: u.class,
                loc,
                prev_loc,
                orientation: u.state(frame).unwrap().orientation,
                motion: if speed >= threshold {
                    MotionFlag::Moving
                } else {
                    MotionFlag::Stationary
                },
            }
        })
        .collect();

    // Naive connected components over an explicit keep matrix.
    fn components(n: usize, keep: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if assigned[start] {
                continue;
            }
            let mut group = vec![start];
            assigned[start] = true;
            loop {
                let mut grew = false;
                for cand in 0..n {
                    if assigned[cand] {
                        continue;
                    }
                    if group.iter().any(|&g| keep(g, cand)) {
                        group.push(cand);
                        assigned[cand] = true;
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            group.sort();
            out.push(group);
        }
        out
    }

    let mut partition: Vec<Vec<String>> = Vec::new();
    for class in [
        RoadUserClass::Pedestrian,
        RoadUserClass::Vehicle,
        RoadUserClass::Bicycle,
    ] {
        for motion in [MotionFlag::Stationary, MotionFlag::Moving] {
            let group: Vec<&Obj> = objects
                .iter()
                .filter(|o| o.class == class && o.motion == motion)
                .collect();
            if group.is_empty() {
                continue;
            }
            let eps = match class {
                RoadUserClass::Pedestrian => params.pedestrian_eps,
                RoadUserClass::Bicycle => params.bicycle_eps,
                _ => params.vehicle_eps,
            };
            let near = |i: usize, j: usize| group[i].loc.distance(group[j].loc) <= eps;
            for distance_cluster in components(group.len(), &near) {
                let members: Vec<&Obj> = distance_cluster.iter().map(|&i| group[i]).collect();
                let refined: Vec<Vec<String>> = match (class, motion) {
                    (RoadUserClass::Pedestrian, MotionFlag::Stationary) => {
                        vec![members.iter().map(|m| m.id.clone()).collect()]
                    }
                    (RoadUserClass::Pedestrian, MotionFlag::Moving) => {
                        let keep = |i: usize, j: usize| -> bool {
                            let (a, b) = (members[i], members[j]);
                            let cos = (a.orientation.dot(b.orientation)
                                / (a.orientation.norm() * b.orientation.norm()))
                            .clamp(-1.0, 1.0);
                            let opposite =
                                cos.acos().to_degrees() >= params.opposite_angle_deg;
                            if !opposite {
                                return true;
                            }
                            match (a.prev_loc, b.prev_loc) {
                                (Some(pa), Some(pb)) => {
                                    // Keep unless strictly diverging.
                                    a.loc.distance(b.loc) <= pa.distance(pb)
                                }
                                _ => true,
                            }
                        };
                        components(members.len(), &keep)
                            .into_iter()
                            .map(|c| c.into_iter().map(|i| members[i].id.clone()).collect())
                            .collect()
                    }
                    _ => oracle_kmeans_split(&members.iter().map(|m| (m.id.clone(), m.orientation)).collect::<Vec<_>>()),
                };
                partition.extend(refined);
            }
        }
    }
    for group in partition.iter_mut() {
        group.sort();
    }
    partition.sort();
    partition
}

/// Independent two-way k-means on orientations: farthest-pair start (first
/// pair in index order on ties), plain Lloyd iterations.
fn oracle_kmeans_split(members: &[(String, Vec2)]) -> Vec<Vec<String>> {
    let n = members.len();
    if n <= 1 {
        return vec![members.iter().map(|(id, _)| id.clone()).collect()];
    }
    if members
        .iter()
        .all(|(_, o)| o.distance(members[0].1) <= 1e-6)
    {
        return vec![members.iter().map(|(id, _)| id.clone()).collect()];
    }
    let mut best = (-1.0, 0usize, 1usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = members[i].1.distance(members[j].1);
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    let mut centers = [members[best.1].1, members[best.2].1];
    let mut assign = vec![0usize; n];
    for _ in 0..100 {
        let mut moved = false;
        for (i, (_, o)) in members.iter().enumerate() {
            let pick = if o.distance(centers[1]) < o.distance(centers[0]) { 1 } else { 0 };
            if assign[i] != pick {
                assign[i] = pick;
                moved = true;
            }
        }
        let mut sums = [Vec2::ZERO, Vec2::ZERO];
        let mut counts = [0usize; 2];
        for (i, (_, o)) in members.iter().enumerate() {
            sums[assign[i]] = sums[assign[i]].add(*o);
            counts[assign[i]] += 1;
        }
        if counts[0] == 0 || counts[1] == 0 {
            return vec![members.iter().map(|(id, _)| id.clone()).collect()];
        }
        centers = [
            sums[0].scale(1.0 / counts[0] as f64),
            sums[1].scale(1.0 / counts[1] as f64),
        ];
        if !moved {
            break;
        }
    }
    let mut groups = [Vec::new(), Vec::new()];
    for (i, (id, _)) in members.iter().enumerate() {
        groups[assign[i]].push(id.clone());
    }
    groups.into_iter().filter(|g: &Vec<String>| !g.is_empty()).collect()
}

/// Random frame fixture for the oracle equivalence suite: up to `max_objects`
/// road users with random classes, positions, headings, and one-frame
/// histories; a few objects flicker (absent previous frame).
pub fn random_frame_scene(seed: u64, max_objects: usize) -> Arc<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=max_objects);
    let rate = 10.0;
    let mut users = Vec::new();
    for k in 0..n {
        let class = match rng.random_range(0..3) {
            0 => RoadUserClass::Pedestrian,
            1 => RoadUserClass::Vehicle,
            _ => RoadUserClass::Bicycle,
        };
        let pos = Vec2::new(rng.random_range(0.0..60.0), rng.random_range(-10.0..10.0));
        let heading = Vec2::from_yaw(rng.random_range(0.0..std::f64::consts::TAU));
        let speed = rng.random_range(0.0..4.0);
        let velocity = heading.scale(speed);
        let absent_first = rng.random_bool(0.15);
        let dt = 1.0 / rate;
        let states = vec![
            if absent_first {
                FrameState::absent(0.0)
            } else {
                FrameState {
                    location: pos.sub(velocity.scale(dt)),
                    orientation: heading,
                    length: 1.0,
                    width: 0.8,
                    timestamp: 0.0,
                    present: true,
                }
            },
            FrameState {
                location: pos,
                orientation: heading,
                length: 1.0,
                width: 0.8,
                timestamp: dt,
                present: true,
            },
        ];
        users.push(RoadUser {
            id: format!("u{k:03}"),
            class,
            states,
        });
    }
    let ego = integrate_user(
        "ego",
        RoadUserClass::EgoVehicle,
        Vec2::new(-20.0, 0.0),
        &[Vec2::new(5.0, 0.0), Vec2::new(5.0, 0.0)],
        rate,
        Vec2::new(1.0, 0.0),
        (4.5, 2.0),
    );
    Arc::new(Scene::new(rate, 2, users, ego, LaneGraph::default()).unwrap())
}

// ── Export in the ingest schema ──────────────────────────────────────────

fn yaw_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

/// Serialize a scene (plus behaviours) into the annotation file schema.
pub fn scene_to_file(scene: &Scene, behaviours: &[BehaviourRecord]) -> SceneFile {
    let frames = (0..scene.frames)
        .map(|t| {
            let mut objects = Vec::new();
            for user in scene.users.iter().chain(std::iter::once(&scene.ego)) {
                if let Some(state) = user.state(t) {
                    let yaw = yaw_of(state.orientation);
                    objects.push(ObjectRecord {
                        id: user.id.clone(),
                        class: user.class,
                        translation: [state.location.x, state.location.y, 0.0],
                        rotation: [(yaw / 2.0).cos(), 0.0, 0.0, (yaw / 2.0).sin()],
                        size: [state.length, state.width, 1.7],
                        provenance: None,
                    });
                }
            }
            objects.sort_by(|a, b| a.id.cmp(&b.id));
            FrameRecord {
                timestamp: t as f64 / scene.frame_rate,
                objects,
            }
        })
        .collect();
    SceneFile {
        frame_rate: scene.frame_rate,
        frames,
        behaviours: behaviours.to_vec(),
    }
}

/// Serialize lane geometry into the map file schema.
pub fn lanes_to_file(lanes: &LaneGraph) -> MapFile {
    MapFile {
        lanes: lanes
            .lanes
            .iter()
            .map(|l| l.iter().map(|p| [p.x, p.y]).collect())
            .collect(),
        drivable_polygons: lanes
            .drivable_polygons
            .iter()
            .map(|poly| poly.iter().map(|p| [p.x, p.y]).collect())
            .collect(),
    }
}
