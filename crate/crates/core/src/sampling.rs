//! Clamp-to-edge linear interpolation taps shared by every resampling
//! operator (forward blur, adjoint, refocus, synthesis, kernel rasterization).
//!
//! Keeping a single tap routine guarantees that an operator and its
//! transpose use bit-identical weights.

/// Two interpolation taps along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taps {
    pub i0: usize,
    pub i1: usize,
    pub w0: f64,
    pub w1: f64,
}

impl Taps {
    /// Taps for fractional index `q` on an axis of `n` samples.
    ///
    /// Out-of-window positions collapse onto the edge sample, so the
    /// interpolant is constant (and its derivative zero) outside `[0, n-1]`.
    #[inline]
    pub fn new(q: f64, n: usize) -> Taps {
        debug_assert!(n > 0);
        let fl = q.floor();
        let a = q - fl;
        let last = (n - 1) as f64;
        let i0 = fl.clamp(0.0, last) as usize;
        let i1 = (fl + 1.0).clamp(0.0, last) as usize;
        Taps {
            i0,
            i1,
            w0: 1.0 - a,
            w1: a,
        }
    }

    #[inline]
    pub fn sample(&self, line: impl Fn(usize) -> f64) -> f64 {
        self.w0 * line(self.i0) + self.w1 * line(self.i1)
    }

    /// d(sample)/dq, zero where both taps hit the same clamped sample.
    #[inline]
    pub fn slope(&self, line: impl Fn(usize) -> f64) -> f64 {
        if self.i0 == self.i1 {
            0.0
        } else {
            line(self.i1) - line(self.i0)
        }
    }
}

/// Centered coordinate of grid index `i` on an axis of `n` samples.
#[inline]
pub fn centered(i: usize, n: usize) -> f64 {
    i as f64 - (n as f64 - 1.0) / 2.0
}

/// Grid index (fractional) of centered coordinate `c`.
#[inline]
pub fn uncentered(c: f64, n: usize) -> f64 {
    c + (n as f64 - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_taps() {
        let t = Taps::new(1.25, 4);
        assert_eq!((t.i0, t.i1), (1, 2));
        assert!((t.w0 - 0.75).abs() < 1e-15 && (t.w1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn clamped_taps_are_constant() {
        let line = |i: usize| [1.0, 2.0, 3.0][i];
        assert_eq!(Taps::new(-3.7, 3).sample(line), 1.0);
        assert_eq!(Taps::new(7.2, 3).sample(line), 3.0);
        assert_eq!(Taps::new(7.2, 3).slope(line), 0.0);
        assert_eq!(Taps::new(2.0, 3).sample(line), 3.0);
    }

    #[test]
    fn integer_position_is_exact() {
        let t = Taps::new(2.0, 5);
        assert_eq!((t.i0, t.w0, t.w1), (2, 1.0, 0.0));
    }

    #[test]
    fn coordinate_round_trip() {
        for n in 1..9 {
            for i in 0..n {
                assert_eq!(uncentered(centered(i, n), n), i as f64);
            }
        }
    }
}
