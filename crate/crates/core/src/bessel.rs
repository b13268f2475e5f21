//! Bessel functions of the first kind and their positive zeros.
//!
//! Values come from Miller's backward recurrence, which is stable for every
//! order and argument needed here (orders and arguments up to a few hundred).
//! Zeros are bracketed by scanning with a step below the minimum zero spacing
//! and refined by bisection.

/// Zeros are refined until the bracket is below this width.
pub const ZERO_TOL: f64 = 1e-12;

const SCAN_STEP: f64 = 0.5;
const BIG: f64 = 1e250;

fn start_index(n: usize, x: f64) -> usize {
    let m = (n as f64).max(x);
    let start = m + 20.0 + (40.0 * m).sqrt();
    let s = start.ceil() as usize;
    s + (s % 2)
}

/// Cylindrical Bessel function `J_n(x)`, `x >= 0`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let top = start_index(n, x);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut at_n = 0.0;
    for k in (1..=top).rev() {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        if k == n {
            at_n = cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > BIG {
            cur /= BIG;
            next /= BIG;
            norm /= BIG;
            at_n /= BIG;
        }
    }
    // cur is now J_0
    norm += cur;
    if n == 0 {
        at_n = cur;
    }
    at_n / norm
}

/// Spherical Bessel function `j_n(x)`, `x > 0`.
pub fn spherical_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let top = start_index(n, x);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0; // Σ (2k+1) j_k²
    let mut at_n = 0.0;
    let mut j1 = 0.0;
    for k in (1..=top).rev() {
        norm += (2 * k + 1) as f64 * cur * cur;
        if k == n {
            at_n = cur;
        }
        if k == 1 {
            j1 = cur;
        }
        let prev = (2 * k + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e120 {
            cur /= 1e120;
            next /= 1e120;
            norm /= 1e240;
            at_n /= 1e120;
            j1 /= 1e120;
        }
    }
    let j0 = cur;
    norm += j0 * j0;
    if n == 0 {
        at_n = j0;
    }
    let scale = 1.0 / norm.sqrt();
    // fix the sign against whichever of j_0, j_1 is larger in magnitude
    let (s, c) = x.sin_cos();
    let exact0 = s / x;
    let exact1 = s / (x * x) - c / x;
    let sign = if exact0.abs() >= exact1.abs() {
        (exact0 * j0).signum()
    } else {
        (exact1 * j1).signum()
    };
    sign * at_n * scale
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= ZERO_TOL * hi.max(1.0) * 0.5 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn zeros_below<F: Fn(f64) -> f64>(f: F, start: f64, limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x0 = start.max(1e-3);
    let mut f0 = f(x0);
    while x0 < limit {
        let x1 = (x0 + SCAN_STEP).min(limit);
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push(x1);
        } else if (f0 > 0.0) != (f1 > 0.0) && f0 != 0.0 {
            out.push(bisect(&f, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Positive zeros of `J_n` not exceeding `limit`, increasing.
pub fn bessel_j_zeros(n: usize, limit: f64) -> Vec<f64> {
    zeros_below(|x| bessel_j(n, x), n as f64, limit)
}

/// Positive zeros of `j_n` not exceeding `limit`, increasing.
pub fn spherical_j_zeros(n: usize, limit: f64) -> Vec<f64> {
    zeros_below(|x| spherical_j(n, x), n as f64, limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Power series, accurate for moderate x; independent of the recurrence.
    fn series_j(n: usize, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -half * half / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for n in 0..6 {
            for i in 1..=40 {
                let x = i as f64 * 0.25;
                assert!(
                    (bessel_j(n, x) - series_j(n, x)).abs() < 1e-12,
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn first_zeros() {
        let z0 = bessel_j_zeros(0, 10.0);
        assert_relative_eq!(z0[0], 2.404_825_557_695_773, epsilon = 1e-11);
        assert_relative_eq!(z0[1], 5.520_078_110_286_311, epsilon = 1e-11);
        let z1 = bessel_j_zeros(1, 10.0);
        assert_relative_eq!(z1[0], 3.831_705_970_207_512, epsilon = 1e-11);
        // series-based oracle for a higher order
        let z5 = bessel_j_zeros(5, 12.0)[0];
        let (mut lo, mut hi) = (8.0, 9.5);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if series_j(5, mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert_relative_eq!(z5, 0.5 * (lo + hi), epsilon = 1e-10);
    }

    #[test]
    fn spherical_zeros() {
        // j_0 = sin x / x
        let z = spherical_j_zeros(0, 20.0);
        for (s, zz) in z.iter().enumerate() {
            assert_relative_eq!(*zz, (s + 1) as f64 * std::f64::consts::PI, epsilon = 1e-11);
        }
        // j_1 zero: tan x = x
        let z1 = spherical_j_zeros(1, 6.0)[0];
        assert_relative_eq!(z1.tan(), z1, epsilon = 1e-9);
        assert_relative_eq!(z1, 4.493_409_457_909_064, epsilon = 1e-11);
    }

    #[test]
    fn large_order_values_are_finite() {
        let v = bessel_j(150, 180.0);
        assert!(v.is_finite() && v.abs() < 1.0);
        let v = spherical_j(150, 180.0);
        assert!(v.is_finite() && v.abs() < 1.0);
    }
}
