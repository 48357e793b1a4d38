//! Domain types and closed-form kinematics of the pinched-tape arm.
//!
//! Three coordinate systems describe the same configuration:
//!
//! * **joint space** [`JointState`]: link lengths `l1` (base to node),
//!   `l2` (node to tip) and bend angle `theta` at the node;
//! * **actuator space** [`ControlState`]: cumulative tape extension `q1`
//!   and node displacement `q2` relative to the lengths at `t = 0`;
//! * **cable space** [`CablePair`]: the left/right steering cable lengths.
//!
//! Link 1 always points along the base midline (`+y`), so the node sits at
//! `(0, l1)` and the tip at `(l2 sin θ, l1 + l2 cos θ)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of tapes in the back-to-back stack.
pub const TAPE_COUNT: usize = 2;

/// Default half-width of the node at which the steering cables run.
pub const DEFAULT_CABLE_OFFSET: f64 = 0.015;

/// Stowed envelope used for the extension-ratio check.
pub const DEFAULT_STOWED_LENGTH: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("constraint violation: {0}")]
    Constraint(Violations),
    #[error("cable differential {differential} m exceeds 4d = {limit} m")]
    CableOutOfRange { differential: f64, limit: f64 },
    #[error("{name} = {value} is out of range: {reason}")]
    Range {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Material and geometry of one bistable tape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TapeProperties {
    /// Young's modulus, Pa.
    pub elastic_modulus: f64,
    /// Wall thickness, m.
    pub thickness: f64,
    /// Unstressed transverse radius of curvature, m.
    pub transverse_radius: f64,
    /// Angle subtended by the cross-section arc, rad.
    pub subtended_angle: f64,
    /// Mass per unit length, kg/m.
    pub linear_density: f64,
    /// Length of tape on one reel, m.
    pub total_length: f64,
}

impl Default for TapeProperties {
    /// Steel tape-measure blade: 0.2 mm wall, 7.62 m (25 ft) reel,
    /// 76 g per 3 m. Radius and subtended angle approximate a 25 mm blade.
    fn default() -> Self {
        TapeProperties {
            elastic_modulus: 200e9,
            thickness: 0.2e-3,
            transverse_radius: 0.014,
            subtended_angle: 1.75,
            linear_density: 0.076 / 3.0,
            total_length: 7.62,
        }
    }
}

impl TapeProperties {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("elastic_modulus", self.elastic_modulus),
            ("thickness", self.thickness),
            ("transverse_radius", self.transverse_radius),
            ("subtended_angle", self.subtended_angle),
            ("linear_density", self.linear_density),
            ("total_length", self.total_length),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParams(format!(
                    "tape.{name} must be finite and positive, got {value}"
                )));
            }
        }
        if self.thickness >= self.transverse_radius {
            return Err(ModelError::InvalidParams(format!(
                "tape thickness {} must be below transverse radius {}",
                self.thickness, self.transverse_radius
            )));
        }
        Ok(())
    }

    /// Width of the flattened cross-section, `R0 * alpha`.
    pub fn flat_width(&self) -> f64 {
        self.transverse_radius * self.subtended_angle
    }
}

/// Geometry, limits and mass figures of one manipulator build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManipulatorParams {
    pub tape: TapeProperties,
    /// Lateral offset `d` of each steering cable from the tape midline, m.
    pub cable_offset: f64,
    /// Symmetric hinge limit on `|theta|`, rad.
    pub theta_limit: f64,
    /// Shortest link 1; the tape must clear the node housing, m.
    pub l1_min: f64,
    pub l2_min: f64,
    /// Upper bound on `l1 + l2` for planning and workspace analysis, m.
    pub max_total_length: f64,
    /// Housing, reel mounts and spools, without tapes or node, kg.
    pub base_mass: f64,
    pub node_mass: f64,
}

impl Default for ManipulatorParams {
    fn default() -> Self {
        ManipulatorParams {
            tape: TapeProperties::default(),
            cable_offset: DEFAULT_CABLE_OFFSET,
            theta_limit: 55f64.to_radians(),
            l1_min: 0.076,
            l2_min: 0.0,
            max_total_length: 2.0,
            base_mass: 0.372,
            node_mass: 0.163,
        }
    }
}

impl ManipulatorParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.tape.validate()?;
        let bad = |msg: String| Err(ModelError::InvalidParams(msg));
        if !(self.cable_offset.is_finite() && self.cable_offset > 0.0) {
            return bad(format!("cable_offset must be positive, got {}", self.cable_offset));
        }
        if !(self.theta_limit > 0.0 && self.theta_limit <= PI / 2.0) {
            return bad(format!("theta_limit must lie in (0, pi/2], got {}", self.theta_limit));
        }
        if !(self.l1_min.is_finite() && self.l1_min >= 0.0) {
            return bad(format!("l1_min must be >= 0, got {}", self.l1_min));
        }
        if !(self.l2_min.is_finite() && self.l2_min >= 0.0) {
            return bad(format!("l2_min must be >= 0, got {}", self.l2_min));
        }
        if !(self.max_total_length.is_finite() && self.max_total_length > 0.0) {
            return bad(format!(
                "max_total_length must be positive, got {}",
                self.max_total_length
            ));
        }
        if self.max_total_length > self.tape.total_length {
            return bad(format!(
                "max_total_length {} exceeds tape length {}",
                self.max_total_length, self.tape.total_length
            ));
        }
        if self.l1_min + self.l2_min > self.max_total_length {
            return bad("l1_min + l2_min exceeds max_total_length".to_string());
        }
        if !(self.base_mass.is_finite() && self.base_mass >= 0.0)
            || !(self.node_mass.is_finite() && self.node_mass >= 0.0)
        {
            return bad("masses must be finite and non-negative".to_string());
        }
        Ok(())
    }

    /// Reads a params document; omitted fields take their defaults.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let params: ManipulatorParams =
            serde_json::from_str(text).map_err(|e| ModelError::InvalidParams(format!("params JSON: {e}")))?;
        params.validate()?;
        Ok(params)
    }
}

/// Joint-space configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointState {
    pub l1: f64,
    pub l2: f64,
    pub theta: f64,
}

impl JointState {
    pub fn new(l1: f64, l2: f64, theta: f64) -> Self {
        JointState { l1, l2, theta }
    }

    pub fn total_length(&self) -> f64 {
        self.l1 + self.l2
    }

    /// Unchecked forward map. See [`forward_kinematics`] for the validated
    /// version.
    pub fn pose(&self) -> Pose {
        let (s, c) = self.theta.sin_cos();
        let m = Matrix2::new(0.0, s, 1.0, c);
        let p = m * Vector2::new(self.l1, self.l2);
        Pose {
            x: p.x,
            y: p.y,
            phi: self.theta,
        }
    }

    /// World position of the bend (the pinch point inside the node).
    pub fn bend_point(&self) -> (f64, f64) {
        (0.0, self.l1)
    }
}

/// Actuator-space configuration relative to the lengths at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlState {
    /// Cumulative tape extension from the base, m.
    pub q1: f64,
    /// Cumulative node displacement toward the tip, m.
    pub q2: f64,
    pub l1_0: f64,
    pub l2_0: f64,
}

impl ControlState {
    /// Control state at `t = 0` for the given link lengths.
    pub fn at_rest(l1: f64, l2: f64) -> Self {
        ControlState {
            q1: 0.0,
            q2: 0.0,
            l1_0: l1,
            l2_0: l2,
        }
    }

    /// Unchecked link lengths: `l1 = q1 + q2 + l1(0)`, `l2 = -q2 + l2(0)`.
    pub fn lengths(&self) -> (f64, f64) {
        (self.q1 + self.q2 + self.l1_0, -self.q2 + self.l2_0)
    }

    pub fn joint(&self, theta: f64) -> JointState {
        let (l1, l2) = self.lengths();
        JointState { l1, l2, theta }
    }
}

/// End-effector position and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Pose { x, y, phi }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Left/right steering cable lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CablePair {
    #[serde(rename = "cL")]
    pub c_l: f64,
    #[serde(rename = "cR")]
    pub c_r: f64,
}

impl CablePair {
    pub fn new(c_l: f64, c_r: f64) -> Self {
        CablePair { c_l, c_r }
    }

    pub fn differential(&self) -> f64 {
        self.c_l - self.c_r
    }
}

/// One violated bound, carrying the offending value and the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    L1BelowMin { l1: f64, min: f64 },
    L2BelowMin { l2: f64, min: f64 },
    TotalLengthExceeded { total: f64, max: f64 },
    JointLimit { theta: f64, limit: f64 },
}

impl Violation {
    /// Short identifier used in logs.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NonFinite => "non_finite",
            Violation::L1BelowMin { .. } => "l1_min",
            Violation::L2BelowMin { .. } => "l2_min",
            Violation::TotalLengthExceeded { .. } => "total_length",
            Violation::JointLimit { .. } => "joint_limit",
        }
    }

    /// Amount by which the bound is exceeded (positive).
    pub fn excess(&self) -> f64 {
        match *self {
            Violation::NonFinite => f64::INFINITY,
            Violation::L1BelowMin { l1, min } => min - l1,
            Violation::L2BelowMin { l2, min } => min - l2,
            Violation::TotalLengthExceeded { total, max } => total - max,
            Violation::JointLimit { theta, limit } => theta.abs() - limit,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonFinite => write!(f, "non-finite state component"),
            Violation::L1BelowMin { l1, min } => {
                write!(f, "l1 = {l1} m below minimum {min} m (short by {} m)", min - l1)
            }
            Violation::L2BelowMin { l2, min } => {
                write!(f, "l2 = {l2} m below minimum {min} m (short by {} m)", min - l2)
            }
            Violation::TotalLengthExceeded { total, max } => write!(
                f,
                "l1 + l2 = {total} m exceeds maximum {max} m (over by {} m)",
                total - max
            ),
            Violation::JointLimit { theta, limit } => write!(
                f,
                "|theta| = {:.4} deg exceeds joint limit {:.4} deg (over by {:.4} deg)",
                theta.abs().to_degrees(),
                limit.to_degrees(),
                (theta.abs() - limit).to_degrees()
            ),
        }
    }
}

/// Non-empty list of violations carried by [`ModelError::Constraint`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a joint state against every length and angle bound. An empty
/// result means the state is admissible.
///
/// The node-position bound `0 <= n <= l1 + l2` is implied by
/// `l1 >= l1_min >= 0` and `l2 >= l2_min >= 0`, and the tape budget by
/// `max_total_length <= tape.total_length`.
pub fn validate_state(state: &JointState, params: &ManipulatorParams) -> Vec<Violation> {
    if !(state.l1.is_finite() && state.l2.is_finite() && state.theta.is_finite()) {
        return vec![Violation::NonFinite];
    }
    let mut out = Vec::new();
    if state.l1 < params.l1_min {
        out.push(Violation::L1BelowMin {
            l1: state.l1,
            min: params.l1_min,
        });
    }
    if state.l2 < params.l2_min {
        out.push(Violation::L2BelowMin {
            l2: state.l2,
            min: params.l2_min,
        });
    }
    let total = state.total_length();
    if total > params.max_total_length {
        out.push(Violation::TotalLengthExceeded {
            total,
            max: params.max_total_length,
        });
    }
    if state.theta.abs() > params.theta_limit {
        out.push(Violation::JointLimit {
            theta: state.theta,
            limit: params.theta_limit,
        });
    }
    out
}

fn ensure_valid(state: &JointState, params: &ManipulatorParams) -> Result<(), ModelError> {
    let v = validate_state(state, params);
    if v.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Constraint(Violations(v)))
    }
}

/// End-effector pose of a validated joint state:
/// `x = l2 sin θ`, `y = l1 + l2 cos θ`, `phi = θ`.
pub fn forward_kinematics(state: &JointState, params: &ManipulatorParams) -> Result<Pose, ModelError> {
    ensure_valid(state, params)?;
    Ok(state.pose())
}

/// Link lengths produced by an actuator state, validated against `params`
/// (the bend angle plays no part in the length bounds).
pub fn link_lengths(control: &ControlState, params: &ManipulatorParams) -> Result<(f64, f64), ModelError> {
    let joint = control.joint(0.0);
    ensure_valid(&joint, params)?;
    Ok((joint.l1, joint.l2))
}

/// Pose straight from actuator coordinates, evaluated in the combined
/// matrix form `p = A(θ) q + B(θ) l(0)` with
/// `A = [[0, -sin θ], [1, 1 - cos θ]]` and `B = [[0, sin θ], [1, cos θ]]`.
pub fn fk_from_controls(control: &ControlState, theta: f64, params: &ManipulatorParams) -> Result<Pose, ModelError> {
    ensure_valid(&control.joint(theta), params)?;
    let (s, c) = theta.sin_cos();
    let a = Matrix2::new(0.0, -s, 1.0, 1.0 - c);
    let b = Matrix2::new(0.0, s, 1.0, c);
    let p = a * Vector2::new(control.q1, control.q2) + b * Vector2::new(control.l1_0, control.l2_0);
    Ok(Pose {
        x: p.x,
        y: p.y,
        phi: theta,
    })
}

/// Cable lengths for a joint state:
/// `c_L = l1 + l2 + 2d sin(θ/2)`, `c_R = l1 + l2 - 2d sin(θ/2)`.
pub fn cable_lengths(state: &JointState, d: f64) -> CablePair {
    let total = state.total_length();
    let half = 2.0 * d * (state.theta / 2.0).sin();
    CablePair {
        c_l: total + half,
        c_r: total - half,
    }
}

/// Bend angle implied by a cable pair, `θ = 2 asin((c_L - c_R) / 4d)`.
/// Differentials beyond `4d` cannot be produced by any bend; excess
/// within the subtraction roundoff is clamped.
pub fn theta_from_cables(cables: &CablePair, d: f64) -> Result<f64, ModelError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(ModelError::Range {
            name: "cable_offset",
            value: d,
            reason: "must be positive",
        });
    }
    let limit = 4.0 * d;
    let diff = cables.differential();
    let roundoff = 4.0 * f64::EPSILON * (cables.c_l.abs() + cables.c_r.abs());
    if !diff.is_finite() || diff.abs() > limit + roundoff {
        return Err(ModelError::CableOutOfRange {
            differential: diff,
            limit,
        });
    }
    let ratio = (diff / limit).clamp(-1.0, 1.0);
    Ok(2.0 * ratio.asin())
}

/// Mass breakdown of the arm with a given length of tape on each reel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBudget {
    pub base: f64,
    pub node: f64,
    /// Mass of one tape of the requested length.
    pub per_tape: f64,
    pub tape_count: usize,
    pub total: f64,
}

pub fn mass_budget(params: &ManipulatorParams, tape_length: f64) -> Result<MassBudget, ModelError> {
    if !(tape_length >= 0.0 && tape_length <= params.tape.total_length) {
        return Err(ModelError::Range {
            name: "tape_length",
            value: tape_length,
            reason: "must lie in [0, tape.total_length]",
        });
    }
    let per_tape = params.tape.linear_density * tape_length;
    Ok(MassBudget {
        base: params.base_mass,
        node: params.node_mass,
        per_tape,
        tape_count: TAPE_COUNT,
        total: params.base_mass + params.node_mass + TAPE_COUNT as f64 * per_tape,
    })
}

/// Fully deployed tape length over the stowed envelope length.
pub fn extension_ratio(params: &ManipulatorParams, stowed_length: f64) -> Result<f64, ModelError> {
    if !(stowed_length.is_finite() && stowed_length > 0.0) {
        return Err(ModelError::Range {
            name: "stowed_length",
            value: stowed_length,
            reason: "must be positive",
        });
    }
    Ok(params.tape.total_length / stowed_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    #[test]
    fn fk_matches_reported_configurations() {
        let p = ManipulatorParams::default();
        let pose = forward_kinematics(&JointState::new(0.432, 0.265, deg(16.7)), &p).unwrap();
        assert_abs_diff_eq!(pose.x, 0.0762, epsilon = 0.002);
        assert_abs_diff_eq!(pose.y, 0.6858, epsilon = 0.002);
        assert_eq!(pose.phi, deg(16.7));

        let pose = forward_kinematics(&JointState::new(0.254, 0.438, deg(10.0)), &p).unwrap();
        assert_abs_diff_eq!(pose.x, 0.0760, epsilon = 0.002);
        assert_abs_diff_eq!(pose.y, 0.6854, epsilon = 0.002);
    }

    #[test]
    fn fk_straight_arm() {
        let p = ManipulatorParams::default();
        let pose = forward_kinematics(&JointState::new(0.3, 0.45, 0.0), &p).unwrap();
        assert_eq!((pose.x, pose.y, pose.phi), (0.0, 0.75, 0.0));
    }

    #[test]
    fn fk_rejects_invalid_state_with_every_violation() {
        let p = ManipulatorParams::default();
        let err = forward_kinematics(&JointState::new(0.05, 2.5, deg(60.0)), &p).unwrap_err();
        match err {
            ModelError::Constraint(Violations(v)) => {
                let codes: Vec<_> = v.iter().map(Violation::code).collect();
                assert_eq!(codes, ["l1_min", "total_length", "joint_limit"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn link_lengths_examples() {
        let p = ManipulatorParams::default();
        let c = ControlState {
            q1: 0.0,
            q2: 0.0,
            l1_0: 0.1,
            l2_0: 0.5,
        };
        assert_eq!(link_lengths(&c, &p).unwrap(), (0.1, 0.5));
        let c = ControlState { q1: 0.2, ..c };
        let (l1, l2) = link_lengths(&c, &p).unwrap();
        assert_abs_diff_eq!(l1, 0.3, epsilon = 1e-15);
        assert_eq!(l2, 0.5);
        let c = ControlState {
            q1: 0.0,
            q2: 0.15,
            l1_0: 0.1,
            l2_0: 0.5,
        };
        let (l1, l2) = link_lengths(&c, &p).unwrap();
        assert_abs_diff_eq!(l1, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(l2, 0.35, epsilon = 1e-15);
        // node moves conserve the total
        assert_abs_diff_eq!(l1 + l2, c.q1 + c.l1_0 + c.l2_0, epsilon = 1e-15);
    }

    #[test]
    fn link_lengths_out_of_bounds() {
        let p = ManipulatorParams::default();
        let c = ControlState {
            q1: 0.0,
            q2: -0.05,
            l1_0: 0.1,
            l2_0: 0.5,
        };
        assert!(matches!(link_lengths(&c, &p), Err(ModelError::Constraint(_))));
        let c = ControlState {
            q1: 0.0,
            q2: 0.6,
            l1_0: 0.1,
            l2_0: 0.5,
        };
        assert!(matches!(link_lengths(&c, &p), Err(ModelError::Constraint(_))));
    }

    #[test]
    fn fk_from_controls_examples() {
        let p = ManipulatorParams::default();
        let c = ControlState::at_rest(0.2, 0.4);
        let direct = JointState::new(0.2, 0.4, deg(12.0)).pose();
        let via = fk_from_controls(&c, deg(12.0), &p).unwrap();
        assert_abs_diff_eq!(direct.x, via.x, epsilon = 1e-15);
        assert_abs_diff_eq!(direct.y, via.y, epsilon = 1e-15);

        let c = ControlState {
            q1: 0.1,
            q2: 0.0,
            l1_0: 0.1,
            l2_0: 0.3,
        };
        let pose = fk_from_controls(&c, 0.0, &p).unwrap();
        assert_eq!(pose.x, 0.0);
        assert_abs_diff_eq!(pose.y, 0.5, epsilon = 1e-15);

        let c = ControlState {
            q1: 0.0,
            q2: 0.1,
            l1_0: 0.1,
            l2_0: 0.3,
        };
        let via = fk_from_controls(&c, deg(30.0), &p).unwrap();
        let (l1, l2) = link_lengths(&c, &p).unwrap();
        let composed = forward_kinematics(&JointState::new(l1, l2, deg(30.0)), &p).unwrap();
        assert_abs_diff_eq!(via.x, composed.x, epsilon = 1e-12);
        assert_abs_diff_eq!(via.y, composed.y, epsilon = 1e-12);
        // l1 = l2 = 0.2 at 30 deg
        assert_abs_diff_eq!(via.x, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(via.y, 0.2 + 0.2 * deg(30.0).cos(), epsilon = 1e-12);
    }

    #[test]
    fn cable_examples() {
        let s = JointState::new(0.3, 0.4, 0.0);
        let c = cable_lengths(&s, 0.015);
        assert_eq!(c.c_l, 0.7);
        assert_eq!(c.c_r, 0.7);

        let s = JointState::new(0.5, 0.5, deg(30.0));
        let c = cable_lengths(&s, 0.02);
        assert_abs_diff_eq!(c.c_l, 1.010353, epsilon = 5e-7);
        assert_abs_diff_eq!(c.c_r, 0.989647, epsilon = 5e-7);
        assert_abs_diff_eq!(c.c_l + c.c_r, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_from_cables_examples() {
        assert_eq!(theta_from_cables(&CablePair::new(0.8, 0.8), 0.02).unwrap(), 0.0);
        let t = theta_from_cables(&CablePair::new(1.010353, 0.989647), 0.02).unwrap();
        // 6-digit inputs: 2 asin(0.020706/0.08) = 30.0007 deg
        assert_abs_diff_eq!(t, deg(30.0), epsilon = 2e-5);
        let exact = cable_lengths(&JointState::new(0.5, 0.5, deg(30.0)), 0.02);
        assert_abs_diff_eq!(theta_from_cables(&exact, 0.02).unwrap(), deg(30.0), epsilon = 1e-9);

        let t = theta_from_cables(&CablePair::new(1.08, 1.0), 0.02).unwrap();
        assert_abs_diff_eq!(t, PI, epsilon = 1e-12);
        assert!(!validate_state(&JointState::new(0.5, 0.5, t), &ManipulatorParams::default()).is_empty());

        assert!(matches!(
            theta_from_cables(&CablePair::new(1.1, 1.0), 0.02),
            Err(ModelError::CableOutOfRange { .. })
        ));
        assert!(theta_from_cables(&CablePair::new(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn validate_examples() {
        let p = ManipulatorParams::default();
        assert!(validate_state(&JointState::new(0.5, 0.5, 0.0), &p).is_empty());
        let v = validate_state(&JointState::new(0.5, 0.5, deg(60.0)), &p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "joint_limit");
        assert_abs_diff_eq!(v[0].excess(), deg(5.0), epsilon = 1e-12);
        let v = validate_state(&JointState::new(0.05, 0.5, 0.0), &p);
        assert_eq!(v, vec![Violation::L1BelowMin { l1: 0.05, min: 0.076 }]);
        assert_eq!(
            validate_state(&JointState::new(f64::NAN, 0.5, 0.0), &p),
            vec![Violation::NonFinite]
        );
    }

    #[test]
    fn mass_examples() {
        let p = ManipulatorParams::default();
        let m = mass_budget(&p, 3.0).unwrap();
        assert_abs_diff_eq!(m.per_tape, 0.076, epsilon = 0.001);
        assert_eq!(m.node, 0.163);
        let m = mass_budget(&p, 0.0).unwrap();
        assert_eq!(m.total, p.base_mass + p.node_mass);
        assert_abs_diff_eq!(m.total, 0.535, epsilon = 1e-12);
        assert!(mass_budget(&p, -0.1).is_err());
        assert!(mass_budget(&p, 8.0).is_err());
    }

    #[test]
    fn extension_examples() {
        let p = ManipulatorParams::default();
        assert_abs_diff_eq!(extension_ratio(&p, 0.35).unwrap(), 7.62 / 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(extension_ratio(&p, 0.35).unwrap(), 21.77, epsilon = 0.005);
        assert_eq!(extension_ratio(&p, p.tape.total_length).unwrap(), 1.0);
        assert!(extension_ratio(&p, DEFAULT_STOWED_LENGTH).unwrap() > 20.0);
        assert!(extension_ratio(&p, 0.0).is_err());
        assert!(extension_ratio(&p, -1.0).is_err());
    }

    #[test]
    fn params_json() {
        let p = ManipulatorParams::from_json_str(r#"{"cable_offset": 0.02, "tape": {"thickness": 0.0003}}"#).unwrap();
        assert_eq!(p.cable_offset, 0.02);
        assert_eq!(p.tape.thickness, 0.0003);
        assert_eq!(p.tape.total_length, 7.62);
        assert!(ManipulatorParams::from_json_str(r#"{"cable_ofset": 0.02}"#).is_err());
        assert!(ManipulatorParams::from_json_str(r#"{"theta_limit": 2.0}"#).is_err());
        assert!(ManipulatorParams::from_json_str(r#"{"max_total_length": 9.0}"#).is_err());
        assert!(ManipulatorParams::from_json_str(r#"{"tape": {"thickness": 0.02}}"#).is_err());
        let text = serde_json::to_string(&ManipulatorParams::default()).unwrap();
        assert_eq!(
            ManipulatorParams::from_json_str(&text).unwrap(),
            ManipulatorParams::default()
        );
    }

    fn valid_joint() -> impl Strategy<Value = JointState> {
        let p = ManipulatorParams::default();
        (p.l1_min..1.0f64, 0.0..0.99f64, -p.theta_limit..=p.theta_limit)
            .prop_map(|(l1, l2, theta)| JointState::new(l1, l2, theta))
    }

    proptest! {
        #[test]
        fn total_length_conserved(q1 in -0.5..0.5f64, q2 in -0.5..0.5f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let c = ControlState { q1, q2, l1_0: a, l2_0: b };
            let (l1, l2) = c.lengths();
            prop_assert!((l1 + l2 - (q1 + a + b)).abs() <= 1e-15);
        }

        #[test]
        fn cable_roundtrip(s in valid_joint(), d in 0.005..0.05f64) {
            let c = cable_lengths(&s, d);
            let t = theta_from_cables(&c, d).unwrap();
            prop_assert!((t - s.theta).abs() <= 1e-9);
            prop_assert!((c.c_l + c.c_r - 2.0 * s.total_length()).abs() <= 1e-15);
        }

        #[test]
        fn mirror_symmetry(s in valid_joint(), d in 0.005..0.05f64) {
            let m = JointState { theta: -s.theta, ..s };
            let (a, b) = (cable_lengths(&s, d), cable_lengths(&m, d));
            prop_assert_eq!(a.c_l, b.c_r);
            prop_assert_eq!(a.c_r, b.c_l);
            let (pa, pb) = (s.pose(), m.pose());
            prop_assert_eq!(pa.x, -pb.x);
            prop_assert_eq!(pa.y, pb.y);
        }
    }
}
