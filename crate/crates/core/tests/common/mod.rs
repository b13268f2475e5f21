//! Oracles shared by the integration tests, independent of the library.

/// `J_n` from its power series; fine for the small arguments used here.
pub fn bessel_series(n: i32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..80 {
        term *= -(x * x / 4.0) / (m as f64 * (m + n) as f64);
        sum += term;
    }
    sum
}

/// `i`-th positive zero of `J_n` by sign scan and bisection.
pub fn bessel_zero(n: i32, i: usize) -> f64 {
    let mut found = 0;
    let mut a = 0.5;
    loop {
        let b = a + 0.01;
        if bessel_series(n, a).signum() != bessel_series(n, b).signum() {
            found += 1;
            if found == i {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_series(n, lo).signum() == bessel_series(n, mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
    }
}
