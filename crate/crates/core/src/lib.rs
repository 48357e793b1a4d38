//! Modeling, planning and quasi-static simulation for a planar 3-DOF
//! manipulator built from two back-to-back bistable tapes pinched together
//! by a movable roller node.
//!
//! The arm is a prismatic-revolute-prismatic chain whose two prismatic
//! lengths are coupled: extending tape from the base grows link 1, while
//! driving the node along the tape trades length between link 1 and link 2.
//! The bend at the node is steered by a left/right cable pair.
//!
//! Modules:
//!
//! * [`model`] - domain types and the closed-form kinematic maps
//!   (joint space, actuator space, cable space).
//! * [`stiffness`] - bending moment of pinched and unpinched tape pairs,
//!   with a least-squares calibration routine.
//! * [`workspace`] - feasible bend-angle intervals, minimum end-effector
//!   angle and reachability grids.
//! * [`planner`] - inverse kinematics, configuration enumeration and
//!   piecewise-constant rate profiles.
//! * [`simulator`] - time-stepped execution of rate profiles with
//!   constraint logging and named checks, plus built-in demonstrations.
//! * [`export`] - CSV / SVG writers and readers shared by the CLI.
//! * [`units`] - angle parsing and number formatting at the I/O boundary.
//!
//! All quantities are SI (meters, radians, kilograms, seconds) internally.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod export;
pub mod model;
pub mod planner;
pub mod simulator;
pub mod stiffness;
pub mod units;
pub mod workspace;

pub use model::{CablePair, ControlState, JointState, ManipulatorParams, ModelError, Pose, TapeProperties, Violation};
pub use planner::{ControlProfile, PlanError, RateCommand, Segment, SpeedLimits};
pub use simulator::{Scenario, SimError, SimState, TrajectoryLog};
pub use stiffness::{PinchJointModel, UnpinchedPairModel};
pub use workspace::{AngleInterval, WorkspaceGrid};
