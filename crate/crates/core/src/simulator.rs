//! Quasi-static execution of actuator rate profiles.
//!
//! The simulated state is the actuator configuration: `(q1, q2)` and the
//! two cable lengths. Link lengths follow from the controls, the bend angle
//! from the cable differential. Because every segment holds its rates
//! constant, the state inside a segment is evaluated in closed form from
//! the segment start, which makes segment-boundary states independent of
//! the step size.
//!
//! Bound violations are logged and the run continues; only a cable
//! differential that no bend can produce stops the run.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    cable_lengths, theta_from_cables, validate_state, CablePair, ControlState, JointState, ManipulatorParams,
    ModelError, Pose, Violation,
};
use crate::planner::{
    constant_theta_cable_rates, ik_enumerate, ik_solve, interior_theta, plan_hold_point, plan_joint_path,
    stationary_bend_rates, ControlProfile, PlanError, PlanOptions, RateCommand, Segment, SpeedLimits,
};
use crate::units::{parse_angle, AngleUnit};

/// Cable/link agreement required of a scenario's initial state, m.
pub const INITIAL_CONSISTENCY_TOLERANCE: f64 = 1e-9;
pub const POSITION_TOLERANCE: f64 = 1e-3;
pub const HOLD_TOLERANCE: f64 = 1e-6;
pub const THETA_TOLERANCE: f64 = 1e-6;
pub const CABLE_TOLERANCE: f64 = 1e-9;
/// How close a logged bend angle must come to count as a visit, rad.
pub const VISIT_THETA_TOLERANCE: f64 = 0.05 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cables inconsistent with any bend at t = {time} s: {source}")]
    CableInconsistent { time: f64, source: ModelError },
    #[error("initial state inconsistent: {0}")]
    InconsistentInitial(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time: f64,
    pub control: ControlState,
    pub cables: CablePair,
    pub joint: JointState,
    pub pose: Pose,
}

impl SimState {
    /// Consistent state at rest in the given joint configuration.
    pub fn from_joint(joint: JointState, cable_offset: f64, time: f64) -> Self {
        SimState {
            time,
            control: ControlState::at_rest(joint.l1, joint.l2),
            cables: cable_lengths(&joint, cable_offset),
            joint,
            pose: joint.pose(),
        }
    }

    /// Derives joint and pose from actuator coordinates.
    pub fn from_actuators(
        time: f64,
        control: ControlState,
        cables: CablePair,
        cable_offset: f64,
    ) -> Result<Self, SimError> {
        let theta =
            theta_from_cables(&cables, cable_offset).map_err(|source| SimError::CableInconsistent { time, source })?;
        let joint = control.joint(theta);
        Ok(SimState {
            time,
            control,
            cables,
            joint,
            pose: joint.pose(),
        })
    }
}

/// Applies constant rates for `elapsed` seconds, starting from `base`.
pub fn advance(base: &SimState, command: &RateCommand, elapsed: f64, cable_offset: f64) -> Result<SimState, SimError> {
    let control = ControlState {
        q1: base.control.q1 + command.q1_rate * elapsed,
        q2: base.control.q2 + command.q2_rate * elapsed,
        ..base.control
    };
    let cables = CablePair {
        c_l: base.cables.c_l + command.cl_rate * elapsed,
        c_r: base.cables.c_r + command.cr_rate * elapsed,
    };
    SimState::from_actuators(base.time + elapsed, control, cables, cable_offset)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: SimState,
    pub violations: Vec<Violation>,
}

/// One explicit step. Bound violations are reported alongside the new
/// state rather than clamped.
pub fn step(
    state: &SimState,
    command: &RateCommand,
    dt: f64,
    params: &ManipulatorParams,
) -> Result<StepResult, SimError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::InvalidScenario(format!("dt must be positive, got {dt}")));
    }
    let next = advance(state, command, dt, params.cable_offset)?;
    Ok(StepResult {
        violations: validate_state(&next.joint, params),
        state: next,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// `|c_L - (l1 + l2 + 2d sin(θ/2))|`, m.
    pub left_residual: f64,
    /// `|c_R - (l1 + l2 - 2d sin(θ/2))|`, m.
    pub right_residual: f64,
    /// Disagreement between stored link lengths and the controls, m.
    pub link_residual: f64,
    /// `theta_limit - |θ|`, rad; negative when violated.
    pub joint_limit_margin: f64,
    pub l1_margin: f64,
    pub l2_margin: f64,
    /// `max_total_length - (l1 + l2)`, m.
    pub total_length_margin: f64,
    /// `tape.total_length - (l1 + l2)`, m.
    pub tape_budget_margin: f64,
}

impl ConsistencyReport {
    pub fn cable_residual(&self) -> f64 {
        self.left_residual.max(self.right_residual)
    }
}

/// Audits a state's stored joint values against its cables and controls,
/// and reports the margin to every bound.
pub fn check_consistency(state: &SimState, params: &ManipulatorParams) -> ConsistencyReport {
    let j = &state.joint;
    let expected = cable_lengths(j, params.cable_offset);
    let (l1, l2) = state.control.lengths();
    let total = j.total_length();
    ConsistencyReport {
        left_residual: (state.cables.c_l - expected.c_l).abs(),
        right_residual: (state.cables.c_r - expected.c_r).abs(),
        link_residual: (j.l1 - l1).abs().max((j.l2 - l2).abs()),
        joint_limit_margin: params.theta_limit - j.theta.abs(),
        l1_margin: j.l1 - params.l1_min,
        l2_margin: j.l2 - params.l2_min,
        total_length_margin: params.max_total_length - total,
        tape_budget_margin: params.tape.total_length - total,
    }
}

/// Named assertion evaluated over a whole run.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// `l1` never moves from its initial value.
    L1Constant,
    /// The bend point stays put in the world frame.
    BendPointFixed,
    ThetaConstant(f64),
    /// Final tip position.
    Target(f64, f64),
    /// Some row passes through the position.
    Visit(f64, f64),
    /// Every row keeps the tip on the position.
    TargetHeld(f64, f64),
    VisitTheta(f64),
    /// Final `l1` minus initial `l1`, m.
    L1Growth(f64),
    CablesConsistent,
    WithinLimits,
    /// Passes when the inner check fails.
    ExpectFail(Box<Check>),
}

fn parse_pair(text: &str) -> Option<(f64, f64)> {
    let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a.is_finite() && b.is_finite()).then_some((a, b))
}

fn parse_number(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

impl FromStr for Check {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || SimError::UnknownCheck(s.to_string());
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let angle = |a: &str| parse_angle(a, AngleUnit::Deg).map_err(|_| unknown());
        let check = match (name, arg) {
            ("l1_constant", None) => Check::L1Constant,
            ("bend_point_fixed", None) => Check::BendPointFixed,
            ("cables_consistent", None) => Check::CablesConsistent,
            ("within_limits", None) => Check::WithinLimits,
            ("theta_constant", Some(a)) => Check::ThetaConstant(angle(a)?),
            ("visit_theta", Some(a)) => Check::VisitTheta(angle(a)?),
            ("target", Some(a)) => parse_pair(a).map(|(x, y)| Check::Target(x, y)).ok_or_else(unknown)?,
            ("visit", Some(a)) => parse_pair(a).map(|(x, y)| Check::Visit(x, y)).ok_or_else(unknown)?,
            ("target_held", Some(a)) => parse_pair(a)
                .map(|(x, y)| Check::TargetHeld(x, y))
                .ok_or_else(unknown)?,
            ("l1_growth", Some(a)) => Check::L1Growth(parse_number(a).ok_or_else(unknown)?),
            ("expect_fail", Some(a)) => {
                let inner: Check = a.parse().map_err(|_| unknown())?;
                Check::ExpectFail(Box::new(inner))
            }
            _ => return Err(unknown()),
        };
        Ok(check)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::L1Constant => f.write_str("l1_constant"),
            Check::BendPointFixed => f.write_str("bend_point_fixed"),
            Check::ThetaConstant(t) => write!(f, "theta_constant:{t}rad"),
            Check::Target(x, y) => write!(f, "target:({x},{y})"),
            Check::Visit(x, y) => write!(f, "visit:({x},{y})"),
            Check::TargetHeld(x, y) => write!(f, "target_held:({x},{y})"),
            Check::VisitTheta(t) => write!(f, "visit_theta:{t}rad"),
            Check::L1Growth(v) => write!(f, "l1_growth:{v}"),
            Check::CablesConsistent => f.write_str("cables_consistent"),
            Check::WithinLimits => f.write_str("within_limits"),
            Check::ExpectFail(inner) => write!(f, "expect_fail:{inner}"),
        }
    }
}

impl Serialize for Check {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Check {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    /// Worst deviation seen (meaning depends on the check).
    pub worst: f64,
}

impl Check {
    pub fn evaluate(&self, rows: &[LogRow]) -> CheckOutcome {
        let (passed, worst) = self.measure(rows);
        CheckOutcome {
            check: self.to_string(),
            passed,
            worst,
        }
    }

    fn measure(&self, rows: &[LogRow]) -> (bool, f64) {
        let Some(first) = rows.first() else {
            return (false, f64::INFINITY);
        };
        let last = rows.last().unwrap_or(first);
        let max_over = |f: &dyn Fn(&LogRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let min_over = |f: &dyn Fn(&LogRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
        match self {
            Check::L1Constant => {
                let w = max_over(&|r| (r.state.joint.l1 - first.state.joint.l1).abs());
                (w <= HOLD_TOLERANCE, w)
            }
            Check::BendPointFixed => {
                let (bx, by) = first.state.joint.bend_point();
                let w = max_over(&|r| {
                    let (x, y) = r.state.joint.bend_point();
                    (x - bx).hypot(y - by)
                });
                (w <= HOLD_TOLERANCE, w)
            }
            Check::ThetaConstant(t) => {
                let w = max_over(&|r| (r.state.joint.theta - t).abs());
                (w <= THETA_TOLERANCE, w)
            }
            Check::Target(x, y) => {
                let w = last.state.pose.distance_to(*x, *y);
                (w <= POSITION_TOLERANCE, w)
            }
            Check::Visit(x, y) => {
                let w = min_over(&|r| r.state.pose.distance_to(*x, *y));
                (w <= POSITION_TOLERANCE, w)
            }
            Check::TargetHeld(x, y) => {
                let w = max_over(&|r| r.state.pose.distance_to(*x, *y));
                (w <= POSITION_TOLERANCE, w)
            }
            Check::VisitTheta(t) => {
                let w = min_over(&|r| (r.state.joint.theta - t).abs());
                (w <= VISIT_THETA_TOLERANCE, w)
            }
            Check::L1Growth(expected) => {
                let w = (last.state.joint.l1 - first.state.joint.l1 - expected).abs();
                (w <= HOLD_TOLERANCE, w)
            }
            Check::CablesConsistent => {
                let w = max_over(&|r| r.cable_residual);
                (w <= CABLE_TOLERANCE, w)
            }
            Check::WithinLimits => {
                let n = rows.iter().filter(|r| !r.violations.is_empty()).count();
                (n == 0, n as f64)
            }
            Check::ExpectFail(inner) => {
                let (passed, worst) = inner.measure(rows);
                (!passed, worst)
            }
        }
    }
}

/// Where a scenario starts. Cable lengths default to the values consistent
/// with the joint state; giving them explicitly allows testing rejection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(rename = "l1_m")]
    pub l1: f64,
    #[serde(rename = "l2_m")]
    pub l2: f64,
    #[serde(rename = "theta_rad")]
    pub theta: f64,
    #[serde(rename = "cL_m", default, skip_serializing_if = "Option::is_none")]
    pub c_l: Option<f64>,
    #[serde(rename = "cR_m", default, skip_serializing_if = "Option::is_none")]
    pub c_r: Option<f64>,
}

impl InitialState {
    pub fn from_joint(joint: &JointState) -> Self {
        InitialState {
            l1: joint.l1,
            l2: joint.l2,
            theta: joint.theta,
            c_l: None,
            c_r: None,
        }
    }

    pub fn joint(&self) -> JointState {
        JointState::new(self.l1, self.l2, self.theta)
    }

    /// Builds the starting state, rejecting cables that disagree with the
    /// joint values.
    pub fn to_sim_state(&self, params: &ManipulatorParams) -> Result<SimState, SimError> {
        let joint = self.joint();
        if !(joint.l1.is_finite() && joint.l2.is_finite() && joint.theta.is_finite()) {
            return Err(SimError::InconsistentInitial("non-finite joint values".into()));
        }
        let mut state = SimState::from_joint(joint, params.cable_offset, 0.0);
        if let Some(c) = self.c_l {
            state.cables.c_l = c;
        }
        if let Some(c) = self.c_r {
            state.cables.c_r = c;
        }
        let residual = check_consistency(&state, params).cable_residual();
        if !(residual <= INITIAL_CONSISTENCY_TOLERANCE) {
            return Err(SimError::InconsistentInitial(format!(
                "cable lengths disagree with the joint state by {residual} m"
            )));
        }
        Ok(state)
    }
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default)]
    name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    #[serde(default)]
    params: ManipulatorParams,
    #[serde(default)]
    speed_limits: SpeedLimits,
    initial: InitialState,
    #[serde(default)]
    segments: Vec<Segment>,
    dt_s: f64,
    #[serde(default)]
    checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub params: ManipulatorParams,
    pub speed_limits: SpeedLimits,
    pub initial: InitialState,
    pub profile: ControlProfile,
    pub dt: f64,
    pub checks: Vec<Check>,
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, SimError> {
        let doc: ScenarioDoc =
            serde_json::from_str(text).map_err(|e| SimError::InvalidScenario(format!("scenario JSON: {e}")))?;
        let scenario = Scenario {
            name: doc.name,
            description: doc.description,
            params: doc.params,
            speed_limits: doc.speed_limits,
            initial: doc.initial,
            profile: ControlProfile { segments: doc.segments },
            dt: doc.dt_s,
            checks: doc.checks,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        let doc = ScenarioDoc {
            name: self.name.clone(),
            description: self.description.clone(),
            params: self.params,
            speed_limits: self.speed_limits,
            initial: self.initial,
            segments: self.profile.segments.clone(),
            dt_s: self.dt,
            checks: self.checks.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }

    /// Step counts per segment, after checking that each duration is a
    /// whole number of steps.
    pub fn step_counts(&self) -> Result<Vec<u64>, SimError> {
        self.profile
            .segments
            .iter()
            .enumerate()
            .map(|(i, seg)| {
                let ratio = seg.duration / self.dt;
                let steps = ratio.round();
                let ok = seg.duration.is_finite()
                    && seg.duration > 0.0
                    && (1.0..1e9).contains(&steps)
                    && (ratio - steps).abs() <= 1e-9 * steps;
                if ok {
                    Ok(steps as u64)
                } else {
                    Err(SimError::InvalidScenario(format!(
                        "segment {i}: duration {} s is not a positive whole number of {} s steps",
                        seg.duration, self.dt
                    )))
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params
            .validate()
            .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidScenario(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let l = &self.speed_limits;
        if !(l.q1 > 0.0 && l.q2 > 0.0 && l.cable > 0.0) {
            return Err(SimError::InvalidScenario("speed limits must be positive".into()));
        }
        self.step_counts()?;
        for (i, seg) in self.profile.segments.iter().enumerate() {
            seg.command
                .validate(&self.speed_limits)
                .map_err(|e| SimError::InvalidScenario(format!("segment {i}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRow {
    pub state: SimState,
    pub cable_residual: f64,
    pub violations: Vec<Violation>,
}

impl LogRow {
    fn new(state: SimState, params: &ManipulatorParams) -> Self {
        LogRow {
            cable_residual: check_consistency(&state, params).cable_residual(),
            violations: validate_state(&state.joint, params),
            state,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub rows: Vec<LogRow>,
    pub checks: Vec<CheckOutcome>,
}

impl TrajectoryLog {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn final_state(&self) -> Option<&SimState> {
        self.rows.last().map(|r| &r.state)
    }

    /// Rows that close a segment (the initial row is included).
    pub fn boundary_rows(&self, scenario: &Scenario) -> Result<Vec<&LogRow>, SimError> {
        let mut out = vec![&self.rows[0]];
        let mut idx = 0usize;
        for steps in scenario.step_counts()? {
            idx += steps as usize;
            out.push(&self.rows[idx]);
        }
        Ok(out)
    }
}

/// Runs every segment of the profile, logging one row per step plus the
/// initial row, then evaluates the scenario checks over the full log.
pub fn run_scenario(scenario: &Scenario) -> Result<TrajectoryLog, SimError> {
    scenario.validate()?;
    let params = &scenario.params;
    let d = params.cable_offset;
    let initial = scenario.initial.to_sim_state(params)?;
    let counts = scenario.step_counts()?;
    let mut rows = vec![LogRow::new(initial, params)];
    let mut segment_start = initial;
    for (seg, steps) in scenario.profile.segments.iter().zip(counts) {
        for k in 1..=steps {
            let elapsed = if k == steps {
                seg.duration
            } else {
                k as f64 * scenario.dt
            };
            let state = advance(&segment_start, &seg.command, elapsed, d)?;
            rows.push(LogRow::new(state, params));
        }
        segment_start = rows.last().map(|r| r.state).unwrap_or(segment_start);
    }
    let checks = scenario.checks.iter().map(|c| c.evaluate(&rows)).collect();
    Ok(TrajectoryLog {
        scenario: scenario.name.clone(),
        rows,
        checks,
    })
}

pub const DEMO_DT: f64 = 0.01;

fn deg(v: f64) -> f64 {
    v.to_radians()
}

fn demo_options() -> PlanOptions {
    PlanOptions {
        limits: SpeedLimits::default(),
        dt: Some(DEMO_DT),
    }
}

fn scenario(name: &str, description: &str, start: JointState, profile: ControlProfile, checks: Vec<Check>) -> Scenario {
    Scenario {
        name: name.to_string(),
        description: description.to_string(),
        params: ManipulatorParams::default(),
        speed_limits: SpeedLimits::default(),
        initial: InitialState::from_joint(&start),
        profile,
        dt: DEMO_DT,
        checks,
    }
}

fn constant_segment(command: RateCommand, duration: f64) -> ControlProfile {
    ControlProfile {
        segments: vec![Segment { duration, command }],
    }
}

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "deploy-and-bend",
    "reach-two-targets",
    "multi-config-same-target",
    "constant-angle-retraction",
    "stationary-bend",
    "stationary-bend-uncoordinated",
];

/// The five demonstrations, with the stationary-bend demonstration also in
/// its uncoordinated form (node driven alone).
pub fn builtin_scenarios() -> Vec<Scenario> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin_scenario(n).expect("built-in scenarios plan"))
        .collect()
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    let p = ManipulatorParams::default();
    let opts = demo_options();
    let s = match name {
        "deploy-and-bend" => {
            let start = JointState::new(p.l1_min, 0.05, 0.0);
            let path = [
                JointState::new(0.726, 0.05, 0.0),
                JointState::new(0.4, 0.376, 0.0),
                JointState::new(0.4, 0.376, deg(30.0)),
            ];
            let profile = plan_joint_path(&start, &path, &p, &opts).ok()?;
            let tip = path[2].pose();
            scenario(
                name,
                "extend the tapes, move the node toward the base, then bend",
                start,
                profile,
                vec![
                    Check::Target(tip.x, tip.y),
                    Check::VisitTheta(deg(30.0)),
                    Check::WithinLimits,
                    Check::CablesConsistent,
                ],
            )
        }
        "reach-two-targets" => {
            let start = JointState::new(p.l1_min, 0.6, 0.0);
            let targets = [(0.229, 0.838), (0.076, 0.838)];
            let path = targets
                .iter()
                .map(|&(x, y)| {
                    let theta = interior_theta(x, y, &p, 0.25)?;
                    ik_solve(&Pose::new(x, y, theta), &p)
                })
                .collect::<Option<Vec<_>>>()?;
            let profile = plan_joint_path(&start, &path, &p, &opts).ok()?;
            scenario(
                name,
                "reach (22.9 cm, 83.8 cm) then (7.6 cm, 83.8 cm)",
                start,
                profile,
                vec![
                    Check::Visit(0.229, 0.838),
                    Check::Target(0.076, 0.838),
                    Check::WithinLimits,
                    Check::CablesConsistent,
                ],
            )
        }
        "multi-config-same-target" => {
            let start = *ik_enumerate(0.076, 0.686, &p, 1).first()?;
            let profile = plan_hold_point(&start, &[deg(10.0), deg(16.7)], &p, &opts, deg(0.1)).ok()?;
            scenario(
                name,
                "hold the tip at (7.6 cm, 68.6 cm) while re-orienting from the minimum angle to 10 and 16.7 deg",
                start,
                profile,
                vec![
                    Check::TargetHeld(0.076, 0.686),
                    Check::VisitTheta(deg(7.1)),
                    Check::VisitTheta(deg(10.0)),
                    Check::VisitTheta(deg(16.7)),
                    Check::WithinLimits,
                    Check::CablesConsistent,
                ],
            )
        }
        "constant-angle-retraction" => {
            let theta = deg(22.0);
            let start = JointState::new(0.5, 0.3, theta);
            let q1_rate = -0.02;
            let (cl_rate, cr_rate) = constant_theta_cable_rates(q1_rate, 0.0, theta);
            let command = RateCommand {
                q1_rate,
                q2_rate: 0.0,
                cl_rate,
                cr_rate,
            };
            scenario(
                name,
                "retract 0.4 m of tape while the cables hold the bend at 22 deg",
                start,
                constant_segment(command, 20.0),
                vec![
                    Check::ThetaConstant(theta),
                    Check::CablesConsistent,
                    Check::WithinLimits,
                ],
            )
        }
        "stationary-bend" => {
            let start = JointState::new(0.3, 0.6, deg(20.0));
            scenario(
                name,
                "retract while driving the node toward the tip at the same speed; the bend point stays put",
                start,
                constant_segment(stationary_bend_rates(-0.05), 10.0),
                vec![
                    Check::L1Constant,
                    Check::BendPointFixed,
                    Check::ThetaConstant(deg(20.0)),
                    Check::CablesConsistent,
                    Check::WithinLimits,
                ],
            )
        }
        "stationary-bend-uncoordinated" => {
            let start = JointState::new(0.3, 0.6, deg(20.0));
            let command = RateCommand {
                q2_rate: 0.05,
                ..RateCommand::default()
            };
            scenario(
                name,
                "shorten link 2 by driving the node alone; link 1 grows by the node travel",
                start,
                constant_segment(command, 10.0),
                vec![
                    Check::ExpectFail(Box::new(Check::L1Constant)),
                    Check::L1Growth(0.5),
                    Check::CablesConsistent,
                ],
            )
        }
        _ => return None,
    };
    Some(s)
}
