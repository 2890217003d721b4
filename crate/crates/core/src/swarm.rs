//! Multi-robot coordination: waypoint assignment, leader-follower targets,
//! the stop-and-go proximity gate and formation presets.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, TAU};

use num_traits::Float;

use crate::geom::{wrap_angle, Point2};
use crate::kinematics::RobotPose;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SwarmError {
    #[error("robot {0} is not in the swarm")]
    UnknownRobot(usize),
    #[error("robot {0} follows itself")]
    SelfFollow(usize),
    #[error("follow chain through robot {0} loops back on itself")]
    FollowCycle(usize),
    #[error("invalid swarm parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Robot → waypoint pairs plus whatever was left over.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    /// `(robot, waypoint)` in ascending robot order.
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_robots: Vec<usize>,
    pub unassigned_waypoints: Vec<usize>,
}

impl Assignment {
    pub fn waypoint_for(&self, robot: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == robot).map(|p| p.1)
    }

    /// Σ robot-to-waypoint distance.
    pub fn total_distance(&self, robots: &[Point2], waypoints: &[Point2]) -> f64 {
        self.pairs.iter().map(|&(r, w)| robots[r].dist(waypoints[w])).sum()
    }
}

/// Greedy global matching: repeatedly pairs the closest unmatched robot and
/// waypoint, ties going to the lower robot id and then the lower waypoint.
pub fn assign_nearest(robots: &[Point2], waypoints: &[Point2]) -> Assignment {
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(robots.len() * waypoints.len());
    for (r, rp) in robots.iter().enumerate() {
        for (w, wp) in waypoints.iter().enumerate() {
            edges.push((rp.dist(*wp), r, w));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut robot_used = vec![false; robots.len()];
    let mut wp_used = vec![false; waypoints.len()];
    let mut pairs = Vec::new();
    let target = robots.len().min(waypoints.len());
    for (_, r, w) in edges {
        if pairs.len() == target {
            break;
        }
        if !robot_used[r] && !wp_used[w] {
            robot_used[r] = true;
            wp_used[w] = true;
            pairs.push((r, w));
        }
    }
    pairs.sort_unstable();
    Assignment {
        pairs,
        unassigned_robots: (0..robots.len()).filter(|&r| !robot_used[r]).collect(),
        unassigned_waypoints: (0..waypoints.len()).filter(|&w| !wp_used[w]).collect(),
    }
}

/// Follower → leader links and the distance followers keep from their leader.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FollowSpec {
    /// Serialised as `[follower, leader]` pairs.
    #[cfg_attr(feature = "serde", serde(with = "leader_pairs"))]
    pub leaders: BTreeMap<usize, usize>,
    /// m
    pub standoff_distance: f64,
}

impl FollowSpec {
    /// A single chain: `ids[k + 1]` follows `ids[k]`.
    pub fn chain(ids: &[usize], standoff_distance: f64) -> Self {
        Self {
            leaders: ids.windows(2).map(|w| (w[1], w[0])).collect(),
            standoff_distance,
        }
    }

    pub fn validate(&self, robots: usize) -> Result<(), SwarmError> {
        if !(self.standoff_distance.is_finite() && self.standoff_distance >= 0.0) {
            return Err(SwarmError::InvalidParameter("standoff distance must be non-negative"));
        }
        for (&f, &l) in &self.leaders {
            if f >= robots {
                return Err(SwarmError::UnknownRobot(f));
            }
            if l >= robots {
                return Err(SwarmError::UnknownRobot(l));
            }
            if f == l {
                return Err(SwarmError::SelfFollow(f));
            }
        }
        for &start in self.leaders.keys() {
            let mut at = start;
            for _ in 0..=self.leaders.len() {
                match self.leaders.get(&at) {
                    Some(&next) if next == start => return Err(SwarmError::FollowCycle(start)),
                    Some(&next) => at = next,
                    None => break,
                }
            }
        }
        Ok(())
    }

    pub fn leader_of(&self, robot: usize) -> Option<usize> {
        self.leaders.get(&robot).copied()
    }

    /// Whether `robot` is downstream of `leader` in some chain.
    pub fn is_behind(&self, robot: usize, leader: usize) -> bool {
        let mut at = robot;
        for _ in 0..=self.leaders.len() {
            match self.leaders.get(&at) {
                Some(&l) if l == leader => return true,
                Some(&l) => at = l,
                None => return false,
            }
        }
        false
    }
}

#[cfg(feature = "serde")]
mod leader_pairs {
    use alloc::collections::BTreeMap;
    use alloc::vec::Vec;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, usize>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(f, l)| [*f, *l]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, usize>, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for [f, l] in pairs {
            if map.insert(f, l).is_some() {
                return Err(D::Error::custom("a robot can follow only one leader"));
            }
        }
        Ok(map)
    }
}

/// This frame's dynamic waypoint for every follower (`None` for robots
/// without a leader): the leader's position pulled back towards the follower
/// by the standoff distance.
pub fn follow_targets(poses: &[RobotPose], spec: &FollowSpec) -> Vec<Option<Point2>> {
    (0..poses.len())
        .map(|i| {
            let leader = &poses[spec.leader_of(i)?];
            let lp = leader.position();
            let away = poses[i].position() - lp;
            let n = away.norm();
            let dir = if n > 0.0 { away * (1.0 / n) } else { -leader.direction() };
            Some(lp + dir * spec.standoff_distance)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GateParams {
    /// Halt below this range (m).
    pub d_min: f64,
    /// Resume above this range (m).
    pub d_resume: f64,
    /// Half-width of the forward cone that can halt a robot (rad).
    pub cone_half_angle: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        Self {
            d_min: 150e-6,
            d_resume: 200e-6,
            cone_half_angle: FRAC_PI_4,
        }
    }
}

impl GateParams {
    pub fn validate(&self) -> Result<(), SwarmError> {
        if !(self.d_min > 0.0 && self.d_resume > self.d_min && self.d_resume.is_finite()) {
            return Err(SwarmError::InvalidParameter("need 0 < d_min < d_resume"));
        }
        if !(self.cone_half_angle > 0.0 && self.cone_half_angle <= PI) {
            return Err(SwarmError::InvalidParameter("cone half-angle must lie in (0, π]"));
        }
        Ok(())
    }
}

/// Stop-and-go halt flags for this frame.
///
/// Robot `i` is blocked by `j` when `j` is its leader or sits inside its
/// forward cone, unless `j` follows `i`. When two robots block each other the
/// lower id keeps going. A running robot halts when a blocker is nearer than
/// `d_min`; a halted one resumes once every blocker is beyond `d_resume`.
pub fn proximity_gate(
    poses: &[RobotPose],
    params: &GateParams,
    follow: Option<&FollowSpec>,
    halted_before: &[bool],
) -> Vec<bool> {
    let n = poses.len();
    let was = |i: usize| halted_before.get(i).copied().unwrap_or(false);
    let range = |i: usize| if was(i) { params.d_resume } else { params.d_min };
    let blocks = |i: usize, j: usize| -> bool {
        if i == j {
            return false;
        }
        if let Some(f) = follow {
            if f.is_behind(j, i) {
                return false;
            }
            if f.leader_of(i) == Some(j) {
                return true;
            }
        }
        let d = poses[j].position() - poses[i].position();
        d.norm() > 0.0 && wrap_angle(d.y.atan2(d.x) - poses[i].heading).abs() <= params.cone_half_angle
    };
    (0..n)
        .map(|i| {
            (0..n).any(|j| {
                if poses[i].position().dist(poses[j].position()) >= range(i) || !blocks(i, j) {
                    return false;
                }
                // mutual blocking: the lower id keeps moving
                let mutual = blocks(j, i) && poses[j].position().dist(poses[i].position()) < range(j);
                !(mutual && i < j)
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields))]
pub enum ShapePreset {
    Rectangle { center: Point2, width: f64, height: f64, count: usize },
    /// Equilateral, one vertex pointing along +y.
    Triangle { center: Point2, side: f64, count: usize },
    Line { center: Point2, length: f64, angle: f64, count: usize },
}

impl ShapePreset {
    /// `count` waypoints spaced evenly along the outline.
    pub fn waypoints(&self) -> Vec<Point2> {
        match *self {
            Self::Rectangle { center, width, height, count } => {
                let (hw, hh) = (width / 2.0, height / 2.0);
                let corners = [
                    center + Point2::new(-hw, -hh),
                    center + Point2::new(hw, -hh),
                    center + Point2::new(hw, hh),
                    center + Point2::new(-hw, hh),
                ];
                along_closed(&corners, count)
            }
            Self::Triangle { center, side, count } => {
                let r = side / 3f64.sqrt();
                let corners: Vec<Point2> = (0..3)
                    .map(|k| center + Point2::from_angle(PI / 2.0 + TAU * k as f64 / 3.0) * r)
                    .collect();
                along_closed(&corners, count)
            }
            Self::Line { center, length, angle, count } => {
                let dir = Point2::from_angle(angle);
                if count == 1 {
                    return vec![center];
                }
                (0..count)
                    .map(|k| center + dir * (length * (k as f64 / (count - 1) as f64 - 0.5)))
                    .collect()
            }
        }
    }
}

fn along_closed(corners: &[Point2], count: usize) -> Vec<Point2> {
    let m = corners.len();
    let sides: Vec<f64> = (0..m).map(|k| corners[k].dist(corners[(k + 1) % m])).collect();
    let perimeter: f64 = sides.iter().sum();
    (0..count)
        .map(|i| {
            let mut s = perimeter * i as f64 / count as f64;
            let mut k = 0;
            while k + 1 < m && s > sides[k] {
                s -= sides[k];
                k += 1;
            }
            let (a, b) = (corners[k], corners[(k + 1) % m]);
            a + (b - a) * (s / sides[k])
        })
        .collect()
}
