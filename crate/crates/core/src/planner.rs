//! Inverse kinematics and piecewise-constant rate profiles.
//!
//! Profiles are expressed in actuator space: tape extension rate `q1`,
//! node traverse rate `q2`, and the two cable rates. Each segment moves all
//! four actuators linearly between two admissible joint states, so the link
//! lengths stay inside their (convex) bounds and the cable differential
//! moves monotonically between its endpoint values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{cable_lengths, validate_state, ControlState, JointState, ManipulatorParams, Pose, Violations};
use crate::workspace::{feasible_theta_interval, ik_at_theta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("waypoint {index} is infeasible: {reason}")]
    InfeasibleWaypoint { index: usize, reason: String },
    #[error("start state is invalid: {0}")]
    InvalidStart(Violations),
    #[error("command exceeds speed limits: {0}")]
    SpeedLimit(String),
    #[error("{0}")]
    Range(String),
}

/// Actuator speed limits, m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedLimits {
    pub q1: f64,
    pub q2: f64,
    pub cable: f64,
}

impl Default for SpeedLimits {
    fn default() -> Self {
        SpeedLimits {
            q1: 0.1,
            q2: 0.1,
            cable: 0.1,
        }
    }
}

impl SpeedLimits {
    pub fn uniform(speed: f64) -> Self {
        SpeedLimits {
            q1: speed,
            q2: speed,
            cable: speed,
        }
    }
}

/// Simultaneous actuator rates, m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCommand {
    #[serde(rename = "q1")]
    pub q1_rate: f64,
    #[serde(rename = "q2")]
    pub q2_rate: f64,
    #[serde(rename = "cL")]
    pub cl_rate: f64,
    #[serde(rename = "cR")]
    pub cr_rate: f64,
}

impl RateCommand {
    pub fn validate(&self, limits: &SpeedLimits) -> Result<(), PlanError> {
        let checks = [
            ("q1", self.q1_rate, limits.q1),
            ("q2", self.q2_rate, limits.q2),
            ("cL", self.cl_rate, limits.cable),
            ("cR", self.cr_rate, limits.cable),
        ];
        for (name, rate, limit) in checks {
            if !rate.is_finite() {
                return Err(PlanError::SpeedLimit(format!("{name} rate is not finite")));
            }
            // one ulp of slack for rates computed as delta / duration
            if rate.abs() > limit * (1.0 + 4.0 * f64::EPSILON) {
                return Err(PlanError::SpeedLimit(format!(
                    "|{name}| = {} m/s exceeds {limit} m/s",
                    rate.abs()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "rates")]
    pub command: RateCommand,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlProfile {
    pub segments: Vec<Segment>,
}

impl ControlProfile {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn extend(&mut self, other: ControlProfile) {
        self.segments.extend(other.segments);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanOptions {
    pub limits: SpeedLimits,
    /// When set, segment durations are rounded up to whole steps.
    pub dt: Option<f64>,
}

/// Joint state realizing `target` exactly, bend angle `target.phi`.
pub fn ik_solve(target: &Pose, params: &ManipulatorParams) -> Option<JointState> {
    ik_at_theta(target.x, target.y, target.phi, params)
}

/// Up to `count` configurations reaching `(x, y)` with pairwise distinct
/// bend angles, spread uniformly across the feasible interval starting at
/// the smallest-magnitude angle.
pub fn ik_enumerate(x: f64, y: f64, params: &ManipulatorParams, count: usize) -> Vec<JointState> {
    let Some(interval) = feasible_theta_interval(x, y, params).into_iter().next() else {
        return Vec::new();
    };
    let start = interval.closest_to_zero();
    let end = if start == interval.lo { interval.hi } else { interval.lo };
    if count <= 1 || start == end {
        return ik_at_theta(x, y, start, params).into_iter().collect();
    }
    let mut out: Vec<JointState> = Vec::with_capacity(count);
    for k in 0..count {
        let theta = if k == count - 1 {
            end
        } else {
            start + (end - start) * k as f64 / (count - 1) as f64
        };
        if out.last().is_some_and(|s| s.theta == theta) {
            continue;
        }
        if let Some(s) = ik_at_theta(x, y, theta, params) {
            out.push(s);
        }
    }
    out
}

/// Bend angle a fraction of the way across the feasible interval, measured
/// from the smallest-magnitude end.
pub fn interior_theta(x: f64, y: f64, params: &ManipulatorParams, fraction: f64) -> Option<f64> {
    let interval = feasible_theta_interval(x, y, params).into_iter().next()?;
    let start = interval.closest_to_zero();
    let end = if start == interval.lo { interval.hi } else { interval.lo };
    Some(start + fraction.clamp(0.0, 1.0) * (end - start))
}

/// Actuator increments `(Δq1, Δq2)` taking `from` to `to`.
pub fn controls_between(from: &JointState, to: &JointState) -> (f64, f64) {
    let dq2 = from.l2 - to.l2;
    let dq1 = (to.l1 - from.l1) - dq2;
    (dq1, dq2)
}

/// Adds actuator increments to a control state.
pub fn apply_controls(control: &ControlState, dq1: f64, dq2: f64) -> ControlState {
    ControlState {
        q1: control.q1 + dq1,
        q2: control.q2 + dq2,
        ..*control
    }
}

/// Node rate that cancels tape growth so link 1, and with it the bend
/// point, stays fixed in the world. Cables follow the total length so the
/// bend angle is held as well.
pub fn stationary_bend_rates(q1_rate: f64) -> RateCommand {
    let (cl_rate, cr_rate) = constant_theta_cable_rates(q1_rate, -q1_rate, 0.0);
    RateCommand {
        q1_rate,
        q2_rate: -q1_rate,
        cl_rate,
        cr_rate,
    }
}

/// Cable rates holding the bend angle while the actuators move. Node
/// motion leaves `l1 + l2` unchanged and a fixed angle leaves the cable
/// differential unchanged, so both cables simply track the tape extension.
pub fn constant_theta_cable_rates(q1_rate: f64, _q2_rate: f64, _theta: f64) -> (f64, f64) {
    (q1_rate, q1_rate)
}

fn segment_between(
    from: &JointState,
    to: &JointState,
    params: &ManipulatorParams,
    opts: &PlanOptions,
) -> Option<Segment> {
    let (dq1, dq2) = controls_between(from, to);
    let same_theta = from.theta == to.theta;
    let (dcl, dcr) = if same_theta {
        (dq1, dq1)
    } else {
        let (a, b) = (
            cable_lengths(from, params.cable_offset),
            cable_lengths(to, params.cable_offset),
        );
        (b.c_l - a.c_l, b.c_r - a.c_r)
    };
    let lim = &opts.limits;
    let mut duration = (dq1.abs() / lim.q1)
        .max(dq2.abs() / lim.q2)
        .max(dcl.abs() / lim.cable)
        .max(dcr.abs() / lim.cable);
    if duration == 0.0 {
        return None;
    }
    if let Some(dt) = opts.dt {
        let steps = (duration / dt - 1e-9).ceil().max(1.0);
        duration = steps * dt;
    }
    let q1_rate = dq1 / duration;
    let q2_rate = dq2 / duration;
    let (cl_rate, cr_rate) = if same_theta {
        constant_theta_cable_rates(q1_rate, q2_rate, from.theta)
    } else {
        (dcl / duration, dcr / duration)
    };
    Some(Segment {
        duration,
        command: RateCommand {
            q1_rate,
            q2_rate,
            cl_rate,
            cr_rate,
        },
    })
}

fn check_options(opts: &PlanOptions) -> Result<(), PlanError> {
    let l = &opts.limits;
    if !(l.q1 > 0.0 && l.q2 > 0.0 && l.cable > 0.0) {
        return Err(PlanError::Range("speed limits must be positive".into()));
    }
    if let Some(dt) = opts.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PlanError::Range(format!("dt must be positive, got {dt}")));
        }
    }
    Ok(())
}

/// One segment per consecutive pair of joint states.
pub fn plan_joint_path(
    start: &JointState,
    waypoints: &[JointState],
    params: &ManipulatorParams,
    opts: &PlanOptions,
) -> Result<ControlProfile, PlanError> {
    check_options(opts)?;
    let v = validate_state(start, params);
    if !v.is_empty() {
        return Err(PlanError::InvalidStart(Violations(v)));
    }
    let mut profile = ControlProfile::default();
    let mut current = *start;
    for (index, wp) in waypoints.iter().enumerate() {
        let v = validate_state(wp, params);
        if !v.is_empty() {
            return Err(PlanError::InfeasibleWaypoint {
                index,
                reason: Violations(v).to_string(),
            });
        }
        if let Some(seg) = segment_between(&current, wp, params, opts) {
            profile.segments.push(seg);
        }
        current = *wp;
    }
    Ok(profile)
}

/// Visits each pose in turn, solving IK at the pose's own orientation.
/// A straight pose leaves the link split free; the previous `l1` is kept
/// when it remains admissible.
pub fn plan_trajectory(
    start: &JointState,
    waypoints: &[Pose],
    params: &ManipulatorParams,
    opts: &PlanOptions,
) -> Result<ControlProfile, PlanError> {
    let mut states = Vec::with_capacity(waypoints.len());
    let mut previous = *start;
    for (index, p) in waypoints.iter().enumerate() {
        let keep = JointState::new(previous.l1, p.y - previous.l1, 0.0);
        let state = if p.phi == 0.0 && p.x == 0.0 && validate_state(&keep, params).is_empty() {
            keep
        } else {
            ik_solve(p, params).ok_or_else(|| PlanError::InfeasibleWaypoint {
                index,
                reason: format!(
                    "no admissible configuration reaches ({}, {}) at {:.4} deg",
                    p.x,
                    p.y,
                    p.phi.to_degrees()
                ),
            })?
        };
        states.push(state);
        previous = state;
    }
    plan_joint_path(start, &states, params, opts)
}

/// Re-orients the arm through `thetas` while keeping the tip on the
/// point `start` currently reaches. The path is split into chords no wider
/// than `max_step` in bend angle, each realized by one segment.
pub fn plan_hold_point(
    start: &JointState,
    thetas: &[f64],
    params: &ManipulatorParams,
    opts: &PlanOptions,
    max_step: f64,
) -> Result<ControlProfile, PlanError> {
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(PlanError::Range(format!("max_step must be positive, got {max_step}")));
    }
    let tip = start.pose();
    let mut path = Vec::new();
    let mut theta = start.theta;
    for (index, &target) in thetas.iter().enumerate() {
        if ik_at_theta(tip.x, tip.y, target, params).is_none() {
            return Err(PlanError::InfeasibleWaypoint {
                index,
                reason: format!("({}, {}) not reachable at {:.4} deg", tip.x, tip.y, target.to_degrees()),
            });
        }
        let n = ((target - theta).abs() / max_step).ceil().max(1.0) as usize;
        for k in 1..=n {
            let t = if k == n {
                target
            } else {
                theta + (target - theta) * k as f64 / n as f64
            };
            let s = ik_at_theta(tip.x, tip.y, t, params).ok_or_else(|| PlanError::InfeasibleWaypoint {
                index,
                reason: format!("path leaves the workspace at {:.4} deg", t.to_degrees()),
            })?;
            path.push(s);
        }
        theta = target;
    }
    plan_joint_path(start, &path, params, opts)
}
