//! Floating-point building blocks shared by the exponential-sum code.
//!
//! [`ExactSum`] keeps a list of non-overlapping partials (Shewchuk's
//! expansion arithmetic), so the rounded result is the correctly rounded
//! value of the exact sum of its inputs. Merging two accumulators is exact
//! as well, which makes block-parallel sums independent of how the range
//! was split and of the worker count.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Length of a phase-resynchronization block.
pub const RESYNC_BLOCK: u64 = 1 << 16;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        debug_assert!(value.is_finite());
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Correctly rounded value of the accumulated sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction when the tail pushes past a tie
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Exact accumulation of both components of a complex sum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexSum {
    re: ExactSum,
    im: ExactSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn add_scaled(&mut self, c: f64, z: Complex64) {
        self.re.add(c * z.re);
        self.im.add(c * z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Neumaier's compensated summation, for hot loops where the full
/// expansion would be too slow. Deterministic for a fixed input order.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Maps any real to `[0, 1)`.
pub fn canonical_alpha(alpha: f64) -> f64 {
    assert!(alpha.is_finite(), "alpha must be finite");
    let r = alpha - alpha.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `n·α mod 1`, with the product formed exactly through an FMA two-product.
#[inline]
pub fn frac_mul(n: u64, alpha: f64) -> f64 {
    debug_assert!(n < 1 << 53);
    let nf = n as f64;
    let p = nf * alpha;
    let err = nf.mul_add(alpha, -p);
    let fp = p - p.floor();
    let r = fp + err;
    let r = r - r.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `e(x) = exp(2πix)` for `x` already reduced mod 1.
#[inline]
pub fn e_reduced(x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    } else if x == 0.25 {
        return Complex64::new(0.0, 1.0);
    } else if x == 0.5 {
        return Complex64::new(-1.0, 0.0);
    } else if x == 0.75 {
        return Complex64::new(0.0, -1.0);
    }
    let centered = if x > 0.5 { x - 1.0 } else { x };
    let (s, c) = (TAU * centered).sin_cos();
    Complex64::new(c, s)
}

/// `e(x)` for arbitrary real `x`.
pub fn e(x: f64) -> Complex64 {
    e_reduced(canonical_alpha(x))
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Phase iterator yielding `e(nα)` for consecutive `n`. Every multiple of
/// [`RESYNC_BLOCK`] is recomputed from the exactly reduced argument and the
/// values in between come from complex rotation. Phases are a function of
/// `n` alone: a walk that starts mid-block first rotates from the block's
/// anchor.
pub struct PhaseWalk {
    alpha: f64,
    step: Complex64,
    n: u64,
    z: Complex64,
}

impl PhaseWalk {
    pub fn starting_at(alpha: f64, start: u64) -> Self {
        let alpha = canonical_alpha(alpha);
        let step = e_reduced(alpha);
        let anchor = start - start % RESYNC_BLOCK;
        let mut walk = PhaseWalk {
            alpha,
            step,
            n: anchor,
            z: e_reduced(frac_mul(anchor, alpha)),
        };
        while walk.n < start {
            walk.advance();
        }
        walk
    }

    #[inline]
    fn advance(&mut self) {
        self.n += 1;
        if self.n % RESYNC_BLOCK == 0 {
            self.z = e_reduced(frac_mul(self.n, self.alpha));
        } else {
            self.z *= self.step;
        }
    }

    /// Current index `n`.
    pub fn index(&self) -> u64 {
        self.n
    }

    /// `e(nα)` for the current index, then moves to `n + 1`.
    #[inline]
    pub fn next_phase(&mut self) -> Complex64 {
        let z = self.z;
        self.advance();
        z
    }
}

/// `e(nα)` for `n = 0..=x`, produced by [`PhaseWalk`].
pub fn phase_table(alpha: f64, x: u64) -> Vec<Complex64> {
    let mut walk = PhaseWalk::starting_at(alpha, 0);
    (0..=x).map(|_| walk.next_phase()).collect()
}
