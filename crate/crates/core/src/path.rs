//! Bézier camera translation paths.

use log::warn;

use crate::error::{LfError, Result};

/// Camera translation over the exposure as a Bézier curve in R³.
///
/// `p_x, p_y` are in angular-sample units, `p_z` in slope units (angular
/// samples per spatial sample). The first control point is pinned to the
/// origin: a constant offset is indistinguishable from translating or
/// refocusing the sharp light field.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionPath {
    control_points: Vec<[f64; 3]>,
}

impl MotionPath {
    pub fn new(control_points: Vec<[f64; 3]>) -> Result<MotionPath> {
        if control_points.len() < 2 {
            return Err(LfError::InvalidArgument(format!(
                "a path needs at least 2 control points, got {}",
                control_points.len()
            )));
        }
        if let Some(p) = control_points.iter().find(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(LfError::NonFinite(format!("control point {p:?}")));
        }
        if control_points[0] != [0.0; 3] {
            return Err(LfError::InvalidArgument(format!(
                "first control point must be the origin, got {:?}",
                control_points[0]
            )));
        }
        Ok(MotionPath { control_points })
    }

    /// The no-motion path with `n` control points.
    pub fn zero(n: usize) -> Result<MotionPath> {
        MotionPath::new(vec![[0.0; 3]; n])
    }

    /// Straight segment from the origin to `end`.
    pub fn linear(end: [f64; 3]) -> Result<MotionPath> {
        MotionPath::new(vec![[0.0; 3], end])
    }

    pub fn control_points(&self) -> &[[f64; 3]] {
        &self.control_points
    }

    pub fn n(&self) -> usize {
        self.control_points.len()
    }

    /// True when every control point has `p_z == 0`.
    pub fn is_in_plane(&self) -> bool {
        self.control_points.iter().all(|p| p[2] == 0.0)
    }

    /// Logs a warning when the path exceeds the sanity bounds for an
    /// angular window of `nu x nv` samples. Returns whether it is within.
    pub fn check_bounds(&self, nu: usize, nv: usize) -> bool {
        let lim = nu.max(nv) as f64;
        let ok = self
            .control_points
            .iter()
            .all(|p| p[0].abs() <= lim && p[1].abs() <= lim && p[2].abs() <= 2.0);
        if !ok {
            warn!("motion path exceeds sanity bounds (|p_x|,|p_y| <= {lim}, |p_z| <= 2)");
        }
        ok
    }

    /// Bernstein basis weights `B_{i,n-1}(t)`.
    pub fn basis(&self, t: f64) -> Vec<f64> {
        bernstein(self.n() - 1, t)
    }

    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        if !(0.0..=1.0).contains(&t) {
            return Err(LfError::InvalidArgument(format!("t = {t} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> [f64; 3] {
        let w = self.basis(t);
        let mut p = [0.0; 3];
        for (wi, c) in w.iter().zip(&self.control_points) {
            for a in 0..3 {
                p[a] += wi * c[a];
            }
        }
        p
    }
}

/// Point on the Bézier curve at `t` in `[0, 1]`.
pub fn bezier_eval(path: &MotionPath, t: f64) -> Result<[f64; 3]> {
    path.eval(t)
}

/// Bernstein polynomials of degree `deg` at `t`.
pub fn bernstein(deg: usize, t: f64) -> Vec<f64> {
    let s = 1.0 - t;
    (0..=deg)
        .map(|i| binomial(deg, i) * t.powi(i as i32) * s.powi((deg - i) as i32))
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let p = MotionPath::new(vec![[0.0; 3], [1.0, -2.0, 0.1], [3.0, 0.5, -0.2]]).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), [0.0; 3]);
        let end = p.eval(1.0).unwrap();
        for a in 0..3 {
            assert!((end[a] - [3.0, 0.5, -0.2][a]).abs() < 1e-15);
        }
    }

    #[test]
    fn collinear_quadratic_midpoint() {
        let p = MotionPath::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn basis_partitions_unity() {
        for deg in 1..6 {
            for k in 0..=10 {
                let s: f64 = bernstein(deg, k as f64 / 10.0).iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn validation() {
        let p = MotionPath::zero(3).unwrap();
        assert!(p.eval(1.5).is_err());
        assert!(p.eval(-0.1).is_err());
        assert!(MotionPath::new(vec![[0.0; 3]]).is_err());
        assert!(MotionPath::new(vec![[0.1, 0.0, 0.0], [0.0; 3]]).is_err());
        assert!(MotionPath::new(vec![[0.0; 3], [f64::NAN, 0.0, 0.0]]).is_err());
        assert!(!MotionPath::linear([0.0, 0.0, 3.0]).unwrap().check_bounds(4, 4));
        assert!(MotionPath::linear([1.0, 0.0, 0.1]).unwrap().check_bounds(4, 4));
    }
}
