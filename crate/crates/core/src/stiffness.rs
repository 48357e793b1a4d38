//! Bending moment of the tape stack with and without a pinch.
//!
//! A pinched tape is a flat strip, so its bending follows plain beam
//! theory with the flattened section. Spread over the short bend region
//! inside the node that gives a linear torsional spring.
//!
//! Unpinched back-to-back tapes show a stiff ramp up to a peak (one tape is
//! in opposite-sense bending), then snap through to a fold that is carried
//! at a much lower propagation moment. This is modeled phenomenologically
//! per branch: a linear ramp to `(peak_angle, peak_moment)` followed by an
//! exponential relaxation onto `propagation_moment`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{TapeProperties, TAPE_COUNT};

/// Peak moment of the unpinched back-to-back pair, N·m.
pub const MEASURED_UNPINCHED_PEAK: f64 = 0.654;
/// Moment of the pinched pair at the unpinched peak angle, N·m.
pub const MEASURED_PINCHED_AT_PEAK: f64 = 0.055;

pub const DEFAULT_PEAK_ANGLE_DEG: f64 = 10.0;
pub const DEFAULT_PROPAGATION_FRACTION: f64 = 0.1;
/// Post-peak relaxation rate, 1/rad.
pub const DEFAULT_DECAY_RATE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StiffnessError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("calibration failed: {0}")]
    FitFailure(String),
    #[error("{0}")]
    Range(String),
}

/// Anything that maps a bend angle to a restoring moment.
pub trait MomentCurve {
    fn moment(&self, theta: f64) -> f64;
}

/// Rectangular cross-section of a flattened tape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlattenedSection {
    pub width: f64,
    pub thickness: f64,
    pub elastic_modulus: f64,
    /// `width * thickness^3 / 12`
    pub second_moment: f64,
}

impl FlattenedSection {
    pub fn new(elastic_modulus: f64, transverse_radius: f64, subtended_angle: f64, thickness: f64) -> Self {
        let width = transverse_radius * subtended_angle;
        FlattenedSection {
            width,
            thickness,
            elastic_modulus,
            second_moment: width * thickness.powi(3) / 12.0,
        }
    }

    pub fn from_tape(tape: &TapeProperties) -> Self {
        Self::new(
            tape.elastic_modulus,
            tape.transverse_radius,
            tape.subtended_angle,
            tape.thickness,
        )
    }

    /// Flexural rigidity `E I`, N·m².
    pub fn rigidity(&self) -> f64 {
        self.elastic_modulus * self.second_moment
    }
}

/// `M = E I κ` for one flattened tape.
pub fn flattened_moment(section: &FlattenedSection, kappa: f64) -> f64 {
    section.rigidity() * kappa
}

/// The pinch as a torsional spring: `tape_count` flat strips bent over a
/// region of length `bend_region_length`, so `κ = θ / Lp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchJointModel {
    pub section: FlattenedSection,
    pub bend_region_length: f64,
    pub tape_count: usize,
}

impl PinchJointModel {
    pub fn new(section: FlattenedSection, bend_region_length: f64, tape_count: usize) -> Result<Self, StiffnessError> {
        if !(bend_region_length.is_finite() && bend_region_length > 0.0) {
            return Err(StiffnessError::InvalidModel(format!(
                "bend region length must be positive, got {bend_region_length}"
            )));
        }
        if tape_count == 0 || !(section.rigidity() > 0.0) {
            return Err(StiffnessError::InvalidModel("stiffness must be positive".into()));
        }
        Ok(PinchJointModel {
            section,
            bend_region_length,
            tape_count,
        })
    }

    /// Chooses the bend-region length so that the joint carries
    /// `moment_ref` at `theta_ref`.
    pub fn calibrated(
        section: FlattenedSection,
        tape_count: usize,
        theta_ref: f64,
        moment_ref: f64,
    ) -> Result<Self, StiffnessError> {
        if !(theta_ref > 0.0 && moment_ref > 0.0) {
            return Err(StiffnessError::InvalidModel(
                "calibration angle and moment must be positive".into(),
            ));
        }
        let length = tape_count as f64 * section.rigidity() * theta_ref / moment_ref;
        Self::new(section, length, tape_count)
    }

    /// Default tape section, anchored to the measured pinched moment at
    /// the default unpinched peak angle.
    pub fn measured_default(tape: &TapeProperties) -> Self {
        Self::calibrated(
            FlattenedSection::from_tape(tape),
            TAPE_COUNT,
            DEFAULT_PEAK_ANGLE_DEG.to_radians(),
            MEASURED_PINCHED_AT_PEAK,
        )
        .expect("default tape section is valid")
    }

    /// `k = n E I / Lp`, N·m/rad.
    pub fn torsional_stiffness(&self) -> f64 {
        self.tape_count as f64 * self.section.rigidity() / self.bend_region_length
    }
}

impl MomentCurve for PinchJointModel {
    fn moment(&self, theta: f64) -> f64 {
        pinched_joint_moment(self, theta)
    }
}

pub fn pinched_joint_moment(model: &PinchJointModel, theta: f64) -> f64 {
    model.torsional_stiffness() * theta
}

/// One side (θ > 0 or θ < 0) of a snap-through moment curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapBranch {
    pub peak_moment: f64,
    pub peak_angle: f64,
    pub propagation_moment: f64,
    /// Rate of the post-peak relaxation, 1/rad.
    pub decay_rate: f64,
}

impl SnapBranch {
    pub fn validate(&self) -> Result<(), StiffnessError> {
        let ok = self.peak_angle.is_finite()
            && self.peak_angle > 0.0
            && self.peak_moment.is_finite()
            && self.propagation_moment > 0.0
            && self.propagation_moment < self.peak_moment
            && self.decay_rate.is_finite()
            && self.decay_rate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(StiffnessError::InvalidModel(format!(
                "need 0 < propagation < peak, peak_angle > 0, decay_rate > 0: {self:?}"
            )))
        }
    }

    /// Moment magnitude at a non-negative angle.
    pub fn magnitude(&self, angle: f64) -> f64 {
        if angle <= self.peak_angle {
            self.peak_moment * angle / self.peak_angle
        } else {
            let e = (-self.decay_rate * (angle - self.peak_angle)).exp();
            self.propagation_moment + (self.peak_moment - self.propagation_moment) * e
        }
    }

    pub fn pre_peak_stiffness(&self) -> f64 {
        self.peak_moment / self.peak_angle
    }
}

/// Symmetric moment curve of the unpinched back-to-back pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnpinchedPairModel {
    pub peak_moment: f64,
    pub peak_angle: f64,
    pub propagation_moment: f64,
    pub decay_rate: f64,
}

impl Default for UnpinchedPairModel {
    fn default() -> Self {
        UnpinchedPairModel {
            peak_moment: MEASURED_UNPINCHED_PEAK,
            peak_angle: DEFAULT_PEAK_ANGLE_DEG.to_radians(),
            propagation_moment: DEFAULT_PROPAGATION_FRACTION * MEASURED_UNPINCHED_PEAK,
            decay_rate: DEFAULT_DECAY_RATE,
        }
    }
}

impl UnpinchedPairModel {
    pub fn new(
        peak_moment: f64,
        peak_angle: f64,
        propagation_moment: f64,
        decay_rate: f64,
    ) -> Result<Self, StiffnessError> {
        let m = UnpinchedPairModel {
            peak_moment,
            peak_angle,
            propagation_moment,
            decay_rate,
        };
        m.branch().validate()?;
        Ok(m)
    }

    pub fn branch(&self) -> SnapBranch {
        SnapBranch {
            peak_moment: self.peak_moment,
            peak_angle: self.peak_angle,
            propagation_moment: self.propagation_moment,
            decay_rate: self.decay_rate,
        }
    }

    /// Slope of the initial ramp, N·m/rad.
    pub fn pre_peak_stiffness(&self) -> f64 {
        self.branch().pre_peak_stiffness()
    }

    /// Largest moment over all angles (attained at `±peak_angle`).
    pub fn max_moment(&self) -> f64 {
        self.peak_moment
    }
}

impl MomentCurve for UnpinchedPairModel {
    fn moment(&self, theta: f64) -> f64 {
        unpinched_pair_moment(self, theta)
    }
}

/// Odd moment curve: ramp to the peak, then relax toward the plateau.
pub fn unpinched_pair_moment(model: &UnpinchedPairModel, theta: f64) -> f64 {
    let m = model.branch().magnitude(theta.abs());
    if theta < 0.0 {
        -m
    } else {
        m
    }
}

/// Single tape with independent branches for the two bending senses.
/// Positive angles load `positive`, negative angles load `negative`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleTapeModel {
    pub positive: SnapBranch,
    pub negative: SnapBranch,
}

impl From<UnpinchedPairModel> for SingleTapeModel {
    fn from(pair: UnpinchedPairModel) -> Self {
        SingleTapeModel {
            positive: pair.branch(),
            negative: pair.branch(),
        }
    }
}

impl MomentCurve for SingleTapeModel {
    fn moment(&self, theta: f64) -> f64 {
        if theta < 0.0 {
            -self.negative.magnitude(-theta)
        } else {
            self.positive.magnitude(theta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub theta: f64,
    pub moment: f64,
}

impl MomentSample {
    pub fn new(theta: f64, moment: f64) -> Self {
        MomentSample { theta, moment }
    }
}

/// `n` evenly spaced samples of a curve over `[theta_min, theta_max]`,
/// endpoints included.
pub fn moment_angle_curve(
    curve: &dyn MomentCurve,
    theta_min: f64,
    theta_max: f64,
    n: usize,
) -> Result<Vec<MomentSample>, StiffnessError> {
    if n < 2 {
        return Err(StiffnessError::Range(format!("need at least 2 samples, got {n}")));
    }
    if !(theta_min.is_finite() && theta_max.is_finite()) {
        return Err(StiffnessError::Range("angle range must be finite".into()));
    }
    let span = theta_max - theta_min;
    Ok((0..n)
        .map(|i| {
            let theta = if i == n - 1 {
                theta_max
            } else {
                theta_min + span * i as f64 / (n - 1) as f64
            };
            MomentSample::new(theta, curve.moment(theta))
        })
        .collect())
}

/// Pinched moment at `theta_ref` over the unpinched peak moment.
pub fn peak_ratio(
    pinched: &PinchJointModel,
    unpinched: &UnpinchedPairModel,
    theta_ref: f64,
) -> Result<f64, StiffnessError> {
    if !(theta_ref > 0.0) {
        return Err(StiffnessError::Range(format!(
            "reference angle must be positive, got {theta_ref}"
        )));
    }
    Ok(pinched_joint_moment(pinched, theta_ref) / unpinched.max_moment())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: UnpinchedPairModel,
    /// Root of the sum of squared torque residuals, N·m.
    pub residual_norm: f64,
}

/// Least-squares fit of an [`UnpinchedPairModel`] to measured samples.
///
/// Samples from both sides are folded onto `θ >= 0` using odd symmetry.
/// The two moments enter linearly, so the search runs over
/// `(peak_angle, decay_rate)` with the moments solved in closed form at
/// each trial; the result is then polished by Levenberg-Marquardt on all
/// four parameters.
pub fn calibrate_unpinched(samples: &[MomentSample]) -> Result<Calibration, StiffnessError> {
    if samples.len() < 4 {
        return Err(StiffnessError::FitFailure(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|s| !(s.theta.is_finite() && s.moment.is_finite())) {
        return Err(StiffnessError::FitFailure("non-finite sample".into()));
    }
    let data: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            if s.theta < 0.0 {
                (-s.theta, -s.moment)
            } else {
                (s.theta, s.moment)
            }
        })
        .collect();

    let (peak_at, _) = data
        .iter()
        .filter(|(a, _)| *a > 0.0)
        .fold((f64::NAN, f64::NEG_INFINITY), |best, &(a, m)| {
            if m > best.1 || (m == best.1 && a < best.0) {
                (a, m)
            } else {
                best
            }
        });
    if !peak_at.is_finite() {
        return Err(StiffnessError::FitFailure("no sample away from zero angle".into()));
    }
    let has_ramp = data.iter().any(|&(a, _)| a > 0.0 && a < peak_at);
    let post: Vec<f64> = data.iter().filter(|(a, _)| *a > peak_at).map(|(a, _)| *a).collect();
    if !has_ramp {
        return Err(StiffnessError::FitFailure("no sample before the peak".into()));
    }
    if post.is_empty() {
        return Err(StiffnessError::FitFailure("no sample after the peak".into()));
    }
    let max_angle = data.iter().map(|(a, _)| *a).fold(0.0, f64::max);

    // coarse grid over (peak_angle, ln decay_rate)
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut angles: Vec<f64> = (1..=200).map(|i| max_angle * i as f64 / 201.0).collect();
    angles.extend(data.iter().map(|(a, _)| *a).filter(|a| *a > 0.0 && *a < max_angle));
    for &pa in &angles {
        for j in 0..=60 {
            let log_rate = -2.0 + 11.0 * j as f64 / 60.0;
            if let Some((sse, _, _)) = profile(&data, pa, log_rate) {
                if sse < best.0 {
                    best = (sse, pa, log_rate);
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Err(StiffnessError::FitFailure("no admissible starting point".into()));
    }

    let objective = |x: [f64; 2]| {
        if !(x[0] > 0.0 && x[0] < max_angle) {
            return f64::INFINITY;
        }
        profile(&data, x[0], x[1]).map_or(f64::INFINITY, |r| r.0)
    };
    let refined = nelder_mead(objective, [best.1, best.2], [max_angle / 201.0, 11.0 / 60.0]);
    let (_, peak, prop) = profile(&data, refined[0], refined[1])
        .ok_or_else(|| StiffnessError::FitFailure("degenerate design at optimum".into()))?;

    let start = Vector4::new(peak, refined[0], prop, refined[1].exp());
    let params = levenberg_marquardt(&data, start);
    let model = UnpinchedPairModel {
        peak_moment: params[0],
        peak_angle: params[1],
        propagation_moment: params[2],
        decay_rate: params[3],
    };
    model
        .branch()
        .validate()
        .map_err(|e| StiffnessError::FitFailure(format!("fitted parameters inadmissible: {e}")))?;
    let residual_norm = sse(&data, &model.branch()).sqrt();
    Ok(Calibration { model, residual_norm })
}

fn sse(data: &[(f64, f64)], branch: &SnapBranch) -> f64 {
    data.iter().map(|&(a, m)| (branch.magnitude(a) - m).powi(2)).sum()
}

/// Best moments for a fixed `(peak_angle, ln decay_rate)`, with the
/// resulting sum of squares.
fn profile(data: &[(f64, f64)], peak_angle: f64, log_rate: f64) -> Option<(f64, f64, f64)> {
    let rate = log_rate.exp();
    let basis = |a: f64| {
        if a <= peak_angle {
            (a / peak_angle, 0.0)
        } else {
            let e = (-rate * (a - peak_angle)).exp();
            (e, 1.0 - e)
        }
    };
    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for &(a, m) in data {
        let (g1, g2) = basis(a);
        normal += Matrix2::new(g1 * g1, g1 * g2, g1 * g2, g2 * g2);
        rhs += Vector2::new(g1 * m, g2 * m);
    }
    let coef = normal.try_inverse()? * rhs;
    if !(coef.x.is_finite() && coef.y.is_finite()) {
        return None;
    }
    let branch = SnapBranch {
        peak_moment: coef.x,
        peak_angle,
        propagation_moment: coef.y,
        decay_rate: rate,
    };
    Some((sse(data, &branch), coef.x, coef.y))
}

fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2]) -> [f64; 2] {
    let mut pts = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = pts.map(&f);
    for _ in 0..4000 {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (pts[2][0] - pts[0][0]).abs().max((pts[1][0] - pts[0][0]).abs()) / start[0].abs().max(1e-12)
            + (pts[2][1] - pts[0][1]).abs().max((pts[1][1] - pts[0][1]).abs());
        if spread < 1e-15 {
            break;
        }
        let centroid = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| {
            [
                centroid[0] + t * (pts[2][0] - centroid[0]),
                centroid[1] + t * (pts[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < vals[2].min(fr) {
                pts[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = [
                        pts[0][0] + 0.5 * (pts[k][0] - pts[0][0]),
                        pts[0][1] + 0.5 * (pts[k][1] - pts[0][1]),
                    ];
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    pts[best]
}

/// Parameters are `(peak_moment, peak_angle, propagation_moment, decay_rate)`.
fn levenberg_marquardt(data: &[(f64, f64)], start: Vector4<f64>) -> Vector4<f64> {
    let branch = |p: &Vector4<f64>| SnapBranch {
        peak_moment: p[0],
        peak_angle: p[1],
        propagation_moment: p[2],
        decay_rate: p[3],
    };
    let admissible = |p: &Vector4<f64>| p[1] > 0.0 && p[3] > 0.0 && p.iter().all(|v| v.is_finite());
    let mut p = start;
    let mut cost = sse(data, &branch(&p));
    let mut damping = 1e-3;
    for _ in 0..200 {
        if cost == 0.0 {
            break;
        }
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for &(a, m) in data {
            let (value, grad) = if a <= p[1] {
                let v = p[0] * a / p[1];
                (v, Vector4::new(a / p[1], -p[0] * a / (p[1] * p[1]), 0.0, 0.0))
            } else {
                let e = (-p[3] * (a - p[1])).exp();
                let drop = p[0] - p[2];
                (
                    p[2] + drop * e,
                    Vector4::new(e, drop * p[3] * e, 1.0 - e, -drop * (a - p[1]) * e),
                )
            };
            jtj += grad * grad.transpose();
            jtr += grad * (value - m);
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj;
            for k in 0..4 {
                lhs[(k, k)] += damping * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = lhs.lu().solve(&(-jtr)) else {
                damping *= 10.0;
                continue;
            };
            let trial = p + step;
            if admissible(&trial) {
                let c = sse(data, &branch(&trial));
                if c < cost {
                    let small = step
                        .iter()
                        .zip(p.iter())
                        .all(|(s, v)| s.abs() <= 1e-15 * v.abs().max(1e-300));
                    p = trial;
                    cost = c;
                    damping = (damping * 0.3).max(1e-12);
                    improved = !small;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}
