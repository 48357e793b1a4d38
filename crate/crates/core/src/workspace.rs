//! Reachability and minimum end-effector angle.
//!
//! For a point `(x, y)` with `x > 0` and bend `θ ∈ (0, θ_max]`, inverting the
//! forward map gives `l2 = x / sin θ` and `l1 = y - x cot θ`, so every bound
//! turns into a bound on `θ`:
//!
//! * `l1 >= l1_min`            ⇔ `θ >= atan2(x, y - l1_min)`
//! * `l1 + l2 <= L_max`        ⇔ `θ <= 2 atan((L_max - y) / x)` (since `l1 + l2 = y + x tan(θ/2)`)
//! * `l2 >= l2_min`            ⇔ `θ <= asin(x / l2_min)`
//! * `|θ| <= θ_max`
//!
//! Each map is monotone on `(0, π/2]`, so the feasible set is a single
//! interval. Negative `x` mirrors it; on `x = 0` only the straight arm is
//! admissible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_state, JointState, ManipulatorParams};

/// `|x|` below this counts as lying on the midline.
pub const MIDLINE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("{0}")]
    Range(String),
}

/// Closed set of bend angles `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AngleInterval {
    pub fn point(theta: f64) -> Self {
        AngleInterval { lo: theta, hi: theta }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Member of the interval closest to zero.
    pub fn closest_to_zero(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            self.hi
        } else {
            0.0
        }
    }

    fn mirrored(&self) -> Self {
        AngleInterval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

/// Joint state placing the tip at `(x, y)` with bend `theta`, or `None`
/// when no admissible state exists.
///
/// At `θ = 0` the arm is straight and the length split is free; link 1 is
/// kept as short as the bounds allow. For `θ != 0` the tip must lie
/// strictly on the side the arm bends toward (`x sin θ > 0`); a zero-length
/// link 2 has no orientation of its own.
pub fn ik_at_theta(x: f64, y: f64, theta: f64, params: &ManipulatorParams) -> Option<JointState> {
    if !(x.is_finite() && y.is_finite() && theta.is_finite()) || theta.abs() > params.theta_limit {
        return None;
    }
    let state = if theta == 0.0 {
        if x.abs() > MIDLINE_TOLERANCE {
            return None;
        }
        let l1 = params.l1_min.max(y - params.max_total_length + params.l1_min);
        JointState::new(l1, y - l1, 0.0)
    } else {
        let (s, c) = theta.sin_cos();
        if x * s <= 0.0 {
            return None;
        }
        let l2 = x / s;
        JointState::new(y - l2 * c, l2, theta)
    };
    validate_state(&state, params).is_empty().then_some(state)
}

/// Maximal intervals of bend angles at which `(x, y)` can be reached.
/// The result has at most one entry.
pub fn feasible_theta_interval(x: f64, y: f64, params: &ManipulatorParams) -> Vec<AngleInterval> {
    if !(x.is_finite() && y.is_finite()) {
        return Vec::new();
    }
    if x.abs() <= MIDLINE_TOLERANCE {
        return match ik_at_theta(x, y, 0.0, params) {
            Some(_) => vec![AngleInterval::point(0.0)],
            None => Vec::new(),
        };
    }
    let a = x.abs();
    let Some(right) = positive_side_interval(a, y, params) else {
        return Vec::new();
    };
    if x > 0.0 {
        vec![right]
    } else {
        vec![right.mirrored()]
    }
}

fn positive_side_interval(a: f64, y: f64, params: &ManipulatorParams) -> Option<AngleInterval> {
    if y > params.max_total_length {
        return None;
    }
    let lo = a.atan2(y - params.l1_min);
    let mut hi = params.theta_limit.min(2.0 * ((params.max_total_length - y) / a).atan());
    if params.l2_min > 0.0 && a < params.l2_min {
        hi = hi.min((a / params.l2_min).asin());
    }
    if !(lo <= hi) {
        return None;
    }
    // closed-form endpoints can land an ulp outside a bound
    let feasible = |t: f64| ik_at_theta(a, y, t, params).is_some();
    let lo = settle(lo, hi, &feasible)?;
    let hi = settle(hi, lo, &feasible)?;
    Some(AngleInterval { lo, hi })
}

/// Moves `from` toward `toward` in growing steps until it is feasible.
fn settle(from: f64, toward: f64, feasible: &impl Fn(f64) -> bool) -> Option<f64> {
    if feasible(from) {
        return Some(from);
    }
    let dir = if toward >= from { 1.0 } else { -1.0 };
    let mut step = from.abs().max(f64::MIN_POSITIVE) * f64::EPSILON;
    for _ in 0..64 {
        let t = from + dir * step;
        if (toward - t) * dir < 0.0 {
            break;
        }
        if feasible(t) {
            return Some(t);
        }
        step *= 2.0;
    }
    if feasible(toward) {
        Some(toward)
    } else {
        None
    }
}

/// Signed bend angle of smallest magnitude that reaches `(x, y)`.
pub fn min_end_effector_angle(x: f64, y: f64, params: &ManipulatorParams) -> Option<f64> {
    feasible_theta_interval(x, y, params)
        .first()
        .map(AngleInterval::closest_to_zero)
}

pub fn reachable(x: f64, y: f64, params: &ManipulatorParams) -> bool {
    !feasible_theta_interval(x, y, params).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Bounds {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub reachable: bool,
    pub min_angle: Option<f64>,
}

/// Cell-centered samples of reachability, stored row by row from `y_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceGrid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub cells: Vec<GridCell>,
}

impl WorkspaceGrid {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[j * self.nx + i]
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn reachable_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|c| c.reachable).count() as f64 / self.cells.len() as f64
    }
}

fn cells_along(span: f64, resolution: f64) -> usize {
    if !(span > 0.0) {
        return 0;
    }
    let n = span / resolution;
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded as usize
    } else {
        n.floor() as usize
    }
}

/// Grid with square cells of side `resolution`.
pub fn compute_grid(
    params: &ManipulatorParams,
    bounds: Bounds,
    resolution: f64,
) -> Result<WorkspaceGrid, WorkspaceError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(WorkspaceError::Range(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let nx = cells_along(bounds.width(), resolution);
    let ny = cells_along(bounds.height(), resolution);
    compute_grid_cells(params, bounds, nx, ny)
}

/// Grid with `nx × ny` cells spanning `bounds`. Cell centers are placed
/// symmetrically about the middle of the bounds, so a grid over bounds
/// centered on `x = 0` mirrors exactly.
pub fn compute_grid_cells(
    params: &ManipulatorParams,
    bounds: Bounds,
    nx: usize,
    ny: usize,
) -> Result<WorkspaceGrid, WorkspaceError> {
    let finite = [bounds.x_min, bounds.x_max, bounds.y_min, bounds.y_max]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(WorkspaceError::Range("bounds must be finite".into()));
    }
    let (nx, ny) = if bounds.width() > 0.0 && bounds.height() > 0.0 {
        (nx, ny)
    } else {
        (0, 0)
    };
    if nx == 0 || ny == 0 {
        return Ok(WorkspaceGrid {
            bounds,
            nx: 0,
            ny: 0,
            dx: 0.0,
            dy: 0.0,
            cells: Vec::new(),
        });
    }
    let dx = bounds.width() / nx as f64;
    let dy = bounds.height() / ny as f64;
    let cx = 0.5 * (bounds.x_min + bounds.x_max);
    let cy = 0.5 * (bounds.y_min + bounds.y_max);
    let half_x = (nx as f64 - 1.0) / 2.0;
    let half_y = (ny as f64 - 1.0) / 2.0;
    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let x = cx + (i as f64 - half_x) * dx;
            let y = cy + (j as f64 - half_y) * dy;
            let min_angle = min_end_effector_angle(x, y, params);
            GridCell {
                x,
                y,
                reachable: min_angle.is_some(),
                min_angle,
            }
        })
        .collect();
    Ok(WorkspaceGrid {
        bounds,
        nx,
        ny,
        dx,
        dy,
        cells,
    })
}

/// Line segments of the `|min_angle| = level` contour, by marching squares
/// over cell centers. Squares touching an unreachable cell are skipped.
pub fn contour_segments(grid: &WorkspaceGrid, level: f64) -> Vec<[(f64, f64); 2]> {
    let mut out = Vec::new();
    if grid.nx < 2 || grid.ny < 2 {
        return out;
    }
    let value = |i: usize, j: usize| grid.cell(i, j).min_angle.map(f64::abs);
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            // corners counter-clockwise from bottom-left
            let idx = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let vals: Option<Vec<f64>> = idx.iter().map(|&(a, b)| value(a, b)).collect();
            let Some(v) = vals else { continue };
            let pts: Vec<(f64, f64)> = idx
                .iter()
                .map(|&(a, b)| {
                    let c = grid.cell(a, b);
                    (c.x, c.y)
                })
                .collect();
            let mut crossings = Vec::with_capacity(4);
            for e in 0..4 {
                let (p, q) = (e, (e + 1) % 4);
                let (vp, vq) = (v[p] - level, v[q] - level);
                if (vp < 0.0) != (vq < 0.0) {
                    let t = vp / (vp - vq);
                    crossings.push((
                        pts[p].0 + t * (pts[q].0 - pts[p].0),
                        pts[p].1 + t * (pts[q].1 - pts[p].1),
                    ));
                }
            }
            match crossings.len() {
                2 => out.push([crossings[0], crossings[1]]),
                4 => {
                    out.push([crossings[0], crossings[1]]);
                    out.push([crossings[2], crossings[3]]);
                }
                _ => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    /// Independent check: sweep θ on a fixed grid and keep the feasible ones.
    fn sweep(x: f64, y: f64, p: &ManipulatorParams, step_deg: f64) -> Vec<f64> {
        let n = (p.theta_limit.to_degrees() / step_deg).floor() as i64;
        (-n..=n)
            .map(|k| deg(k as f64 * step_deg))
            .filter(|&t| ik_at_theta(x, y, t, p).is_some())
            .collect()
    }

    #[test]
    fn ik_at_theta_examples() {
        let p = ManipulatorParams::default();
        let s = ik_at_theta(0.076, 0.686, deg(10.0), &p).unwrap();
        assert_abs_diff_eq!(s.l1, 0.254, epsilon = 0.005);
        assert_abs_diff_eq!(s.l2, 0.438, epsilon = 0.005);

        let s = ik_at_theta(0.0, 1.0, 0.0, &p).unwrap();
        assert_abs_diff_eq!(s.l1 + s.l2, 1.0, epsilon = 1e-15);
        assert_eq!(s.l1, p.l1_min);

        // l1 = 0.1 - 0.5 cot 5° is far below zero
        assert!(ik_at_theta(0.5, 0.1, deg(5.0), &p).is_none());
        assert!(sweep(0.5, 0.1, &p, 0.01).iter().all(|t| t.abs() > deg(5.0)));

        assert!(ik_at_theta(0.1, 0.5, deg(60.0), &p).is_none());
        assert!(ik_at_theta(0.1, 0.5, deg(-20.0), &p).is_none());
        assert!(ik_at_theta(0.0, 0.5, deg(20.0), &p).is_none());
    }

    #[test]
    fn midline_only_straight() {
        let p = ManipulatorParams::default();
        assert_eq!(feasible_theta_interval(0.0, 1.0, &p), vec![AngleInterval::point(0.0)]);
        assert_eq!(min_end_effector_angle(0.0, 1.0, &p), Some(0.0));
        assert_eq!(sweep(0.0, 1.0, &p, 0.01), vec![0.0]);
        assert!(feasible_theta_interval(0.0, 0.05, &p).is_empty());
        assert!(feasible_theta_interval(0.0, 2.5, &p).is_empty());
    }

    #[test]
    fn sector_limit() {
        let p = ManipulatorParams::default();
        let at = |polar_deg: f64, r: f64| (r * deg(polar_deg).sin(), r * deg(polar_deg).cos());
        let (x, y) = at(60.0, 1.0);
        assert!(feasible_theta_interval(x, y, &p).is_empty());
        let (x, y) = at(56.0, 1.0);
        assert!(!reachable(x, y, &p));
        assert!(reachable(0.5, 1.0, &p));
        assert!(!sweep(0.5, 1.0, &p, 0.01).is_empty());
        assert!(!reachable(0.0, 2.1, &p));
    }

    #[test]
    fn interval_matches_sweep_on_examples() {
        let p = ManipulatorParams::default();
        for &(x, y) in &[(0.076, 0.686), (0.229, 0.838), (-0.4, 1.2), (0.9, 0.8), (1.2, 1.4)] {
            let iv = feasible_theta_interval(x, y, &p);
            let sw = sweep(x, y, &p, 0.01);
            assert_eq!(iv.len(), 1, "({x}, {y})");
            let (lo, hi) = (sw[0], sw[sw.len() - 1]);
            assert!(
                (iv[0].lo - lo).abs() <= deg(0.05),
                "lo ({x},{y}) {} vs {}",
                iv[0].lo.to_degrees(),
                lo.to_degrees()
            );
            assert!((iv[0].hi - hi).abs() <= deg(0.05), "hi ({x},{y})");
        }
    }

    #[test]
    fn min_angle_is_attained_and_signed() {
        let p = ManipulatorParams::default();
        let a = min_end_effector_angle(0.3, 0.9, &p).unwrap();
        let b = min_end_effector_angle(-0.3, 0.9, &p).unwrap();
        assert!(a > 0.0);
        assert_eq!(a, -b);
        assert!(ik_at_theta(0.3, 0.9, a, &p).is_some());
        assert!(ik_at_theta(-0.3, 0.9, b, &p).is_some());
        // 7.1° configuration sits on the l1 = l1_min edge
        let m = min_end_effector_angle(0.076, 0.686, &p).unwrap();
        assert_abs_diff_eq!(m.to_degrees(), 7.1, epsilon = 0.05);
        let s = ik_at_theta(0.076, 0.686, m, &p).unwrap();
        assert_abs_diff_eq!(s.l1, p.l1_min, epsilon = 1e-12);
    }

    #[test]
    fn grid_shape_and_symmetry() {
        let p = ManipulatorParams::default();
        let g = compute_grid(&p, Bounds::new(-2.0, 2.0, 0.0, 2.0), 0.05).unwrap();
        assert_eq!((g.nx, g.ny), (80, 40));
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (a, b) = (g.cell(i, j), g.cell(g.nx - 1 - i, j));
                assert_eq!(a.x, -b.x);
                assert_eq!(a.reachable, b.reachable);
                assert_eq!(a.min_angle, b.min_angle.map(|t| -t));
                if a.reachable {
                    let r = a.x.hypot(a.y);
                    assert!(r <= 2.0 + 1e-12);
                    assert!(a.x.atan2(a.y).abs() <= p.theta_limit + 1e-12);
                }
            }
        }
        let f = g.reachable_fraction();
        // sector area 110/360 π r² over an 8 m² box, minus the small near-base region
        assert!(f > 0.3 && f < 0.48, "{f}");
    }

    #[test]
    fn grid_edge_cases() {
        let p = ManipulatorParams::default();
        assert!(compute_grid(&p, Bounds::new(-1.0, 1.0, 0.0, 1.0), 0.0).is_err());
        assert!(compute_grid(&p, Bounds::new(-1.0, 1.0, 0.0, 1.0), -0.1).is_err());
        let g = compute_grid(&p, Bounds::new(0.5, 0.5, 0.0, 1.0), 0.05).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.reachable_fraction(), 0.0);
    }

    #[test]
    fn contours_lie_on_level() {
        let p = ManipulatorParams::default();
        let g = compute_grid(&p, Bounds::new(-2.0, 2.0, 0.0, 2.0), 0.05).unwrap();
        let segs = contour_segments(&g, deg(20.0));
        assert!(!segs.is_empty());
        for s in &segs {
            for &(x, y) in s {
                if let Some(m) = min_end_effector_angle(x, y, &p) {
                    assert!((m.abs() - deg(20.0)).abs() < deg(3.0));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bend_at_least_polar_angle(x in -1.5..1.5f64, y in 0.0..2.0f64) {
            let p = ManipulatorParams::default();
            if x.abs() > 1e-9 {
                for iv in feasible_theta_interval(x, y, &p) {
                    let polar = x.atan2(y).abs();
                    prop_assert!(iv.lo.abs().min(iv.hi.abs()) >= polar);
                    prop_assert!(ik_at_theta(x, y, iv.lo, &p).is_some());
                    prop_assert!(ik_at_theta(x, y, iv.hi, &p).is_some());
                }
            }
        }

        #[test]
        fn nesting(x in -2.0..2.0f64, y in 0.0..2.0f64, extra_len in 0.0..1.0f64, extra_angle in 0.0..30.0f64) {
            let p = ManipulatorParams { max_total_length: 1.5, theta_limit: deg(45.0), ..ManipulatorParams::default() };
            let bigger = ManipulatorParams {
                max_total_length: 1.5 + extra_len,
                theta_limit: deg(45.0 + extra_angle),
                ..p
            };
            if reachable(x, y, &p) {
                prop_assert!(reachable(x, y, &bigger));
            }
        }
    }
}
