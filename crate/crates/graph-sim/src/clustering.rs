//! Frame-wise hierarchical clustering of road users: class split,
//! moving/stationary split, DBSCAN distance clusters, then orientation
//! refinement (keep-together components for pedestrians, a two-way k-means
//! orientation split for vehicles and bicycles).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{compute_speed, RoadUserClass, Scene, SpeedDefinition, Vec2, GEOM_EPS};

#[derive(Debug, Error)]
pub enum ClusteringError {
    #[error("no motion threshold for class {0}")]
    UnknownClass(String),
    #[error("zero-length orientation vector")]
    ZeroOrientation,
    #[error("invalid clustering parameter: {0}")]
    InvalidParams(String),
}

/// Thresholds controlling every clustering stage. Speed thresholds are read
/// in the same unit system as the configured speed definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringParams {
    pub pedestrian_speed_threshold: f64,
    pub vehicle_speed_threshold: f64,
    pub bicycle_speed_threshold: f64,
    pub pedestrian_eps: f64,
    pub vehicle_eps: f64,
    pub bicycle_eps: f64,
    pub min_pts: usize,
    /// Orientation pairs at or beyond this angle (degrees) count as opposite.
    pub opposite_angle_deg: f64,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        ClusteringParams {
            pedestrian_speed_threshold: 0.2,
            vehicle_speed_threshold: 2.0,
            bicycle_speed_threshold: 2.0,
            pedestrian_eps: 1.5,
            vehicle_eps: 10.0,
            bicycle_eps: 5.0,
            min_pts: 1,
            opposite_angle_deg: 90.0,
        }
    }
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<(), ClusteringError> {
        let all = [
            self.pedestrian_speed_threshold,
            self.vehicle_speed_threshold,
            self.bicycle_speed_threshold,
            self.pedestrian_eps,
            self.vehicle_eps,
            self.bicycle_eps,
            self.opposite_angle_deg,
        ];
        if all.iter().any(|v| *v <= 0.0) || self.min_pts == 0 {
            return Err(ClusteringError::InvalidParams(
                "all thresholds must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn speed_threshold(&self, class: RoadUserClass) -> f64 {
        match class {
            RoadUserClass::Pedestrian => self.pedestrian_speed_threshold,
            RoadUserClass::Vehicle | RoadUserClass::EgoVehicle => self.vehicle_speed_threshold,
            RoadUserClass::Bicycle => self.bicycle_speed_threshold,
        }
    }

    pub fn eps(&self, class: RoadUserClass) -> f64 {
        match class {
            RoadUserClass::Pedestrian => self.pedestrian_eps,
            RoadUserClass::Vehicle | RoadUserClass::EgoVehicle => self.vehicle_eps,
            RoadUserClass::Bicycle => self.bicycle_eps,
        }
    }
}

/// Which stages of the hierarchy run. `Disabled` places every road user in
/// its own singleton cluster (used by the star-graph-only ablations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClusteringMode {
    #[default]
    Full,
    /// Class, motion, and distance stages only; no orientation refinement.
    SkipOrientation,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionFlag {
    Moving,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Member ids, sorted.
    pub members: Vec<String>,
    pub class: RoadUserClass,
    pub motion: MotionFlag,
}

/// The clusters of one frame. Together they partition the present non-ego
/// road users.
#[derive(Debug, Clone, Default)]
pub struct ClusterSet {
    pub frame: usize,
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn singletons(frame: usize, users: &[(String, RoadUserClass, MotionFlag)]) -> Self {
        let clusters = users
            .iter()
            .map(|(id, class, motion)| Cluster {
                members: vec![id.clone()],
                class: *class,
                motion: *motion,
            })
            .collect();
        ClusterSet { frame, clusters }
    }

    /// True when `a` and `b` are members of the same cluster.
    pub fn same_cluster(&self, a: &str, b: &str) -> bool {
        self.clusters
            .iter()
            .any(|c| c.members.iter().any(|m| m == a) && c.members.iter().any(|m| m == b))
    }
}

pub fn classify_motion(speed: f64, class: RoadUserClass, params: &ClusteringParams) -> MotionFlag {
    if speed >= params.speed_threshold(class) {
        MotionFlag::Moving
    } else {
        MotionFlag::Stationary
    }
}

/// DBSCAN over 2-D points. With `min_pts = 1` every point is a core point,
/// so the partition equals the connected components of the <= eps proximity
/// graph and nothing is labelled noise. Returns per-point cluster indices;
/// `None` marks noise (only possible for `min_pts > 1`).
pub fn dbscan(points: &[Vec2], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_cluster = 0usize;

    let neighbours = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| points[i].distance(points[j]) <= eps)
            .collect()
    };

    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbours(i);
        if seeds.len() < min_pts {
            continue; // noise unless later reached from a core point
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Some(cluster);
        let mut queue: Vec<usize> = seeds;
        let mut k = 0;
        while k < queue.len() {
            let j = queue[k];
            k += 1;
            if !visited[j] {
                visited[j] = true;
                let j_neighbours = neighbours(j);
                if j_neighbours.len() >= min_pts {
                    queue.extend(j_neighbours);
                }
            }
            if labels[j].is_none() {
                labels[j] = Some(cluster);
            }
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationRelation {
    Same,
    Opposite,
}

/// Eq-style opposite test: opposite iff the angle between the orientation
/// vectors is at least the configured threshold (90 degrees by default,
/// boundary inclusive).
pub fn orientation_relation(
    a: Vec2,
    b: Vec2,
    opposite_angle_deg: f64,
) -> Result<OrientationRelation, ClusteringError> {
    let (na, nb) = (a.norm(), b.norm());
    if na < GEOM_EPS || nb < GEOM_EPS {
        return Err(ClusteringError::ZeroOrientation);
    }
    let cos = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
    let angle = cos.acos().to_degrees();
    if angle >= opposite_angle_deg {
        Ok(OrientationRelation::Opposite)
    } else {
        Ok(OrientationRelation::Same)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceRelation {
    Toward,
    Away,
}

/// Away iff the pair distance strictly increased from the previous frame.
pub fn divergence_relation(
    loc_i: Vec2,
    loc_j: Vec2,
    prev_loc_i: Vec2,
    prev_loc_j: Vec2,
) -> DivergenceRelation {
    if loc_i.distance(loc_j) > prev_loc_i.distance(prev_loc_j) {
        DivergenceRelation::Away
    } else {
        DivergenceRelation::Toward
    }
}

/// A cluster member snapshot used by the refinement stages.
#[derive(Debug, Clone)]
pub struct MemberState {
    pub id: String,
    pub location: Vec2,
    pub orientation: Vec2,
    /// Location in the previous frame, when the object was present there.
    pub prev_location: Option<Vec2>,
}

/// Keep-together refinement for a cluster of moving pedestrians: a pair is
/// kept when facing the same direction, or facing opposite directions while
/// moving toward each other. The result is the connected components of the
/// kept-pair relation. Pairs without motion history default to toward.
pub fn refine_pedestrian_cluster(
    members: &[MemberState],
    opposite_angle_deg: f64,
) -> Result<Vec<Vec<String>>, ClusteringError> {
    let n = members.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let rel = orientation_relation(
                members[i].orientation,
                members[j].orientation,
                opposite_angle_deg,
            )?;
            let keep = match rel {
                OrientationRelation::Same => true,
                OrientationRelation::Opposite => {
                    let div = match (members[i].prev_location, members[j].prev_location) {
                        (Some(pi), Some(pj)) => divergence_relation(
                            members[i].location,
                            members[j].location,
                            pi,
                            pj,
                        ),
                        _ => DivergenceRelation::Toward,
                    };
                    div == DivergenceRelation::Toward
                }
            };
            if keep {
                uf.union(i, j);
            }
        }
    }
    Ok(uf.groups(|i| members[i].id.clone()))
}

/// Two-way k-means on orientation vectors with deterministic farthest-pair
/// initialization (ties broken toward the pair with the smallest ids in the
/// sorted member order). Clusters whose orientations all agree within 1e-6,
/// and singletons, are returned unsplit.
pub fn kmeans_orientation_split(
    members: &[MemberState],
    max_iterations: usize,
) -> Vec<Vec<String>> {
    let n = members.len();
    if n <= 1 {
        return vec![members.iter().map(|m| m.id.clone()).collect()];
    }
    let all_same = members.iter().all(|m| {
        m.orientation.distance(members[0].orientation) <= 1e-6
    });
    if all_same {
        return vec![members.iter().map(|m| m.id.clone()).collect()];
    }

    // Farthest pair, first in lexicographic (i, j) order on ties.
    let (mut init_a, mut init_b, mut best) = (0usize, 1usize, -1.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = members[i].orientation.distance(members[j].orientation);
            if d > best {
                best = d;
                init_a = i;
                init_b = j;
            }
        }
    }

    let mut centroids = [members[init_a].orientation, members[init_b].orientation];
    let mut assignment = vec![0usize; n];
    for _ in 0..max_iterations {
        let mut changed = false;
        for (i, m) in members.iter().enumerate() {
            let d0 = m.orientation.distance(centroids[0]);
            let d1 = m.orientation.distance(centroids[1]);
            let a = if d1 < d0 { 1 } else { 0 };
            if assignment[i] != a {
                assignment[i] = a;
                changed = true;
            }
        }
        let mut sums = [Vec2::ZERO, Vec2::ZERO];
        let mut counts = [0usize, 0usize];
        for (i, m) in members.iter().enumerate() {
            sums[assignment[i]] = sums[assignment[i]].add(m.orientation);
            counts[assignment[i]] += 1;
        }
        if counts[0] == 0 || counts[1] == 0 {
            return vec![members.iter().map(|m| m.id.clone()).collect()];
        }
        centroids = [
            sums[0].scale(1.0 / counts[0] as f64),
            sums[1].scale(1.0 / counts[1] as f64),
        ];
        if !changed {
            break;
        }
    }

    let mut groups: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for (i, m) in members.iter().enumerate() {
        groups[assignment[i]].push(m.id.clone());
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// Run the full hierarchy on one frame: class split, motion split via speed
/// thresholds, DBSCAN per group, then orientation refinement. The ego
/// vehicle never participates; objects absent in the frame are skipped.
pub fn cluster_frame(
    scene: &Scene,
    frame: usize,
    params: &ClusteringParams,
    mode: ClusteringMode,
    speed_def: SpeedDefinition,
) -> Result<ClusterSet, ClusteringError> {
    params.validate()?;
    let users = scene.present_users(frame);

    // Speed is 0 by definition at the first frame; an object with no
    // presence in the previous frame gets the same treatment.
    let speed_of = |user: &crate::scene::RoadUser| -> f64 {
        compute_speed(user, frame, scene.frame_rate, speed_def).unwrap_or(0.0)
    };

    if mode == ClusteringMode::Disabled {
        let entries: Vec<(String, RoadUserClass, MotionFlag)> = users
            .iter()
            .map(|u| {
                (
                    u.id.clone(),
                    u.class,
                    classify_motion(speed_of(u), u.class, params),
                )
            })
            .collect();
        return Ok(ClusterSet::singletons(frame, &entries));
    }

    let mut clusters = Vec::new();
    for class in [
        RoadUserClass::Pedestrian,
        RoadUserClass::Vehicle,
        RoadUserClass::Bicycle,
    ] {
        for motion in [MotionFlag::Stationary, MotionFlag::Moving] {
            let group: Vec<&crate::scene::RoadUser> = users
                .iter()
                .filter(|u| u.class == class)
                .filter(|u| classify_motion(speed_of(u), u.class, params) == motion)
                .copied()
                .collect();
            if group.is_empty() {
                continue;
            }
            let points: Vec<Vec2> = group
                .iter()
                .map(|u| u.location(frame).expect("present"))
                .collect();
            let labels = dbscan(&points, params.eps(class), params.min_pts);
            let n_distance_clusters = labels.iter().flatten().max().map(|m| m + 1).unwrap_or(0);

            for cluster_idx in 0..n_distance_clusters {
                let members: Vec<MemberState> = group
                    .iter()
                    .zip(labels.iter())
                    .filter(|(_, l)| **l == Some(cluster_idx))
                    .map(|(u, _)| MemberState {
                        id: u.id.clone(),
                        location: u.location(frame).expect("present"),
                        orientation: u.state(frame).expect("present").orientation,
                        prev_location: if frame > 0 { u.location(frame - 1) } else { None },
                    })
                    .collect();

                let refined: Vec<Vec<String>> = if mode == ClusteringMode::SkipOrientation {
                    vec![members.iter().map(|m| m.id.clone()).collect()]
                } else {
                    match (class, motion) {
                        (RoadUserClass::Pedestrian, MotionFlag::Stationary) => {
                            vec![members.iter().map(|m| m.id.clone()).collect()]
                        }
                        (RoadUserClass::Pedestrian, MotionFlag::Moving) => {
                            refine_pedestrian_cluster(&members, params.opposite_angle_deg)?
                        }
                        _ => kmeans_orientation_split(&members, 100),
                    }
                };
                for mut ids in refined {
                    ids.sort();
                    clusters.push(Cluster {
                        members: ids,
                        class,
                        motion,
                    });
                }
            }
        }
    }
    clusters.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    Ok(ClusterSet { frame, clusters })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn groups<F: Fn(usize) -> String>(&mut self, name: F) -> Vec<Vec<String>> {
        let n = self.parent.len();
        let mut by_root: std::collections::BTreeMap<usize, Vec<String>> =
            std::collections::BTreeMap::new();
        for i in 0..n {
            let r = self.find(i);
            by_root.entry(r).or_default().push(name(i));
        }
        by_root.into_values().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{FrameState, LaneGraph, RoadUser};

    fn params() -> ClusteringParams {
        ClusteringParams::default()
    }

    #[test]
    fn motion_threshold_is_inclusive() {
        let p = params();
        assert_eq!(
            classify_motion(0.2, RoadUserClass::Pedestrian, &p),
            MotionFlag::Moving
        );
        assert_eq!(
            classify_motion(1.9, RoadUserClass::Vehicle, &p),
            MotionFlag::Stationary
        );
        for class in [
            RoadUserClass::Pedestrian,
            RoadUserClass::Vehicle,
            RoadUserClass::Bicycle,
        ] {
            assert_eq!(classify_motion(0.0, class, &p), MotionFlag::Stationary);
        }
    }

    #[test]
    fn dbscan_pairs_and_singletons() {
        let one = dbscan(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)], 1.5, 1);
        assert_eq!(one, vec![Some(0), Some(0)]);

        let two = dbscan(&[Vec2::new(0.0, 0.0), Vec2::new(12.0, 0.0)], 10.0, 1);
        assert_eq!(two, vec![Some(0), Some(1)]);

        let single = dbscan(&[Vec2::new(3.0, 4.0)], 1.5, 1);
        assert_eq!(single, vec![Some(0)]);
    }

    #[test]
    fn dbscan_chains_transitively() {
        // 0 -- 1 -- 2 each 1.0 apart with eps 1.5: one chain cluster even
        // though 0 and 2 are 2.0 apart.
        let labels = dbscan(
            &[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)],
            1.5,
            1,
        );
        assert_eq!(labels, vec![Some(0), Some(0), Some(0)]);
    }

    #[test]
    fn orientation_relation_examples() {
        let same = orientation_relation(
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0001).normalized().unwrap(),
            90.0,
        )
        .unwrap();
        assert_eq!(same, OrientationRelation::Same);

        let opposite =
            orientation_relation(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), 90.0).unwrap();
        assert_eq!(opposite, OrientationRelation::Opposite);

        // Exactly 90 degrees is opposite (boundary inclusive).
        let boundary =
            orientation_relation(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), 90.0).unwrap();
        assert_eq!(boundary, OrientationRelation::Opposite);

        assert!(orientation_relation(Vec2::ZERO, Vec2::new(1.0, 0.0), 90.0).is_err());
    }

    #[test]
    fn orientation_relation_is_symmetric() {
        let dirs = [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-0.6, 0.8),
            Vec2::from_yaw(2.3),
        ];
        for a in dirs {
            for b in dirs {
                assert_eq!(
                    orientation_relation(a, b, 90.0).unwrap(),
                    orientation_relation(b, a, 90.0).unwrap()
                );
            }
        }
    }

    #[test]
    fn divergence_relation_examples() {
        // distance 5 -> 6: away
        let away = divergence_relation(
            Vec2::new(0.0, 0.0),
            Vec2::new(6.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(5.0, 0.0),
        );
        assert_eq!(away, DivergenceRelation::Away);
        // distance 5 -> 4: toward
        let toward = divergence_relation(
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(5.0, 0.0),
        );
        assert_eq!(toward, DivergenceRelation::Toward);
        // unchanged distance: toward (strict inequality)
        let unchanged = divergence_relation(
            Vec2::new(0.0, 0.0),
            Vec2::new(5.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(5.0, 0.0),
        );
        assert_eq!(unchanged, DivergenceRelation::Toward);
    }

    fn member(id: &str, loc: Vec2, orient: Vec2, prev: Option<Vec2>) -> MemberState {
        MemberState {
            id: id.to_string(),
            location: loc,
            orientation: orient,
            prev_location: prev,
        }
    }

    #[test]
    fn pedestrians_opposite_and_away_split() {
        let members = vec![
            member(
                "a",
                Vec2::new(0.0, 0.0),
                Vec2::new(-1.0, 0.0),
                Some(Vec2::new(0.5, 0.0)),
            ),
            member(
                "b",
                Vec2::new(2.0, 0.0),
                Vec2::new(1.0, 0.0),
                Some(Vec2::new(1.5, 0.0)),
            ),
        ];
        let groups = refine_pedestrian_cluster(&members, 90.0).unwrap();
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn pedestrians_opposite_but_toward_stay_together() {
        let members = vec![
            member(
                "a",
                Vec2::new(0.5, 0.0),
                Vec2::new(1.0, 0.0),
                Some(Vec2::new(0.0, 0.0)),
            ),
            member(
                "b",
                Vec2::new(1.5, 0.0),
                Vec2::new(-1.0, 0.0),
                Some(Vec2::new(2.0, 0.0)),
            ),
        ];
        let groups = refine_pedestrian_cluster(&members, 90.0).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 2);
    }

    #[test]
    fn keep_relation_closes_over_components() {
        // a-b kept (same direction), b-c kept (same direction), a-c would
        // separate on its own: connected components keep all three together.
        let e = 1e-3;
        let members = vec![
            member(
                "a",
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Some(Vec2::new(0.1, 0.0)),
            ),
            member(
                "b",
                Vec2::new(1.0, 0.0),
                Vec2::from_yaw(std::f64::consts::FRAC_PI_2 - e),
                Some(Vec2::new(1.0, -0.2)),
            ),
            member(
                "c",
                Vec2::new(2.0, 0.0),
                Vec2::from_yaw(std::f64::consts::PI - 2.0 * e),
                Some(Vec2::new(1.9, 0.0)),
            ),
        ];
        // a vs c: angle ~ 180deg, moving apart -> separated pairwise.
        let rel = orientation_relation(members[0].orientation, members[2].orientation, 90.0)
            .unwrap();
        assert_eq!(rel, OrientationRelation::Opposite);
        let groups = refine_pedestrian_cluster(&members, 90.0).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0], vec!["a", "b", "c"]);
    }

    #[test]
    fn kmeans_splits_by_orientation() {
        let members = vec![
            member("a", Vec2::ZERO, Vec2::new(1.0, 0.0), None),
            member("b", Vec2::ZERO, Vec2::new(1.0, 0.0), None),
            member("c", Vec2::ZERO, Vec2::new(-1.0, 0.0), None),
        ];
        let mut groups = kmeans_orientation_split(&members, 100);
        groups.sort_by_key(|g| g.len());
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0], vec!["c"]);
        assert_eq!(groups[1], vec!["a", "b"]);
    }

    #[test]
    fn kmeans_keeps_identical_orientations_together() {
        let members = vec![
            member("a", Vec2::ZERO, Vec2::new(0.0, 1.0), None),
            member("b", Vec2::ZERO, Vec2::new(0.0, 1.0), None),
        ];
        let groups = kmeans_orientation_split(&members, 100);
        assert_eq!(groups.len(), 1);

        let single = vec![member("z", Vec2::ZERO, Vec2::new(0.0, 1.0), None)];
        assert_eq!(kmeans_orientation_split(&single, 100).len(), 1);
    }

    fn user_at(
        id: &str,
        class: RoadUserClass,
        loc: Vec2,
        step: Vec2,
        orient: Vec2,
        frames: usize,
    ) -> RoadUser {
        let states = (0..frames)
            .map(|t| FrameState {
                location: loc.add(step.scale(t as f64)),
                orientation: orient,
                length: 1.0,
                width: 1.0,
                timestamp: t as f64 / 10.0,
                present: true,
            })
            .collect();
        RoadUser {
            id: id.to_string(),
            class,
            states,
        }
    }

    fn scene_of(users: Vec<RoadUser>, frames: usize) -> Scene {
        let ego = user_at(
            "ego",
            RoadUserClass::EgoVehicle,
            Vec2::new(-50.0, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            frames,
        );
        Scene::new(10.0, frames, users, ego, LaneGraph::default()).unwrap()
    }

    #[test]
    fn cluster_frame_moving_ped_and_parked_vehicles() {
        // One moving pedestrian plus two co-located parked vehicles with
        // identical orientations: two clusters.
        let ped = user_at(
            "p1",
            RoadUserClass::Pedestrian,
            Vec2::new(0.0, 6.0),
            Vec2::new(0.15, 0.0),
            Vec2::new(1.0, 0.0),
            3,
        );
        let v1 = user_at(
            "v1",
            RoadUserClass::Vehicle,
            Vec2::new(10.0, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            3,
        );
        let v2 = user_at(
            "v2",
            RoadUserClass::Vehicle,
            Vec2::new(12.0, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            3,
        );
        let scene = scene_of(vec![ped, v1, v2], 3);
        let set = cluster_frame(
            &scene,
            2,
            &params(),
            ClusteringMode::Full,
            SpeedDefinition::Physical,
        )
        .unwrap();
        assert_eq!(set.clusters.len(), 2);
        assert!(set.same_cluster("v1", "v2"));
        assert!(!set.same_cluster("p1", "v1"));
    }

    #[test]
    fn cluster_frame_empty_frame() {
        let scene = scene_of(vec![], 2);
        let set = cluster_frame(
            &scene,
            1,
            &params(),
            ClusteringMode::Full,
            SpeedDefinition::Physical,
        )
        .unwrap();
        assert!(set.clusters.is_empty());
    }

    #[test]
    fn stationary_pedestrians_not_orientation_split() {
        // Standing pedestrians facing opposite ways within eps: one cluster.
        let a = user_at(
            "a",
            RoadUserClass::Pedestrian,
            Vec2::new(0.0, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            2,
        );
        let b = user_at(
            "b",
            RoadUserClass::Pedestrian,
            Vec2::new(1.0, 0.0),
            Vec2::ZERO,
            Vec2::new(-1.0, 0.0),
            2,
        );
        let scene = scene_of(vec![a, b], 2);
        let set = cluster_frame(
            &scene,
            1,
            &params(),
            ClusteringMode::Full,
            SpeedDefinition::Physical,
        )
        .unwrap();
        assert_eq!(set.clusters.len(), 1);
        assert_eq!(set.clusters[0].motion, MotionFlag::Stationary);
    }

    #[test]
    fn disabled_mode_yields_singletons() {
        let a = user_at(
            "a",
            RoadUserClass::Pedestrian,
            Vec2::new(0.0, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            2,
        );
        let b = user_at(
            "b",
            RoadUserClass::Pedestrian,
            Vec2::new(0.5, 0.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            2,
        );
        let scene = scene_of(vec![a, b], 2);
        let set = cluster_frame(
            &scene,
            1,
            &params(),
            ClusteringMode::Disabled,
            SpeedDefinition::Physical,
        )
        .unwrap();
        assert_eq!(set.clusters.len(), 2);
    }

    #[test]
    fn clusters_partition_present_users() {
        let a = user_at(
            "a",
            RoadUserClass::Pedestrian,
            Vec2::new(0.0, 0.0),
            Vec2::new(0.2, 0.0),
            Vec2::new(1.0, 0.0),
            4,
        );
        let mut b = user_at(
            "b",
            RoadUserClass::Vehicle,
            Vec2::new(5.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            4,
        );
        b.states[2].present = false;
        let c = user_at(
            "c",
            RoadUserClass::Bicycle,
            Vec2::new(-5.0, 0.0),
            Vec2::ZERO,
            Vec2::new(0.0, 1.0),
            4,
        );
        let scene = scene_of(vec![a, b, c], 4);
        for t in 0..4 {
            let set = cluster_frame(
                &scene,
                t,
                &params(),
                ClusteringMode::Full,
                SpeedDefinition::Physical,
            )
            .unwrap();
            let mut seen: Vec<String> = set
                .clusters
                .iter()
                .flat_map(|c| c.members.iter().cloned())
                .collect();
            seen.sort();
            let mut expected: Vec<String> = scene
                .present_users(t)
                .iter()
                .map(|u| u.id.clone())
                .collect();
            expected.sort();
            assert_eq!(seen, expected, "frame {t}");
            let unique: std::collections::HashSet<&String> = seen.iter().collect();
            assert_eq!(unique.len(), seen.len());
        }
    }
}
