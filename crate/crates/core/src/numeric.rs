//! Numerically stable special functions used by the arrival and
//! reliability models.
//!
//! Everything here works in the log domain where overflow is possible:
//! binomial coefficients appear with populations up to tens of thousands
//! and must stay finite.

/// ln(Gamma(x)) for x > 0 via the Lanczos approximation (g = 7, 9 terms).
///
/// Relative accuracy is around 1e-15 over the range used by this crate.
#[allow(clippy::excessive_precision)] // published coefficient table, kept verbatim
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7 coefficients, Godfrey's table.
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    const SQRT_TWO_PI: f64 = 2.5066282746310002;

    debug_assert!(x > 0.0, "ln_gamma requires x > 0");
    // Reflection is not needed for x > 0; shift once so the series is
    // evaluated at x >= 1.
    if x < 0.5 {
        // ln Gamma(x) = ln Gamma(x+1) - ln x
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    (z + 0.5) * t.ln() - t + (SQRT_TWO_PI * acc).ln()
}

/// ln C(n, k). Exact (via 128-bit integer arithmetic) for n <= 62, the
/// log-gamma route above that.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    if n <= 62 {
        return (binomial_exact(n, k) as f64).ln();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// C(n, k) as an exact integer; valid without overflow for n <= 62.
pub fn binomial_exact(n: u64, k: u64) -> u128 {
    debug_assert!(n <= 62);
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// log(sum(exp(xs))) without overflow; ignores -inf entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Regularized incomplete beta function I_x(a, b) by continued fraction
/// (Lentz's algorithm). Absolute accuracy well below 1e-12 for the shape
/// parameters used here.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
            + b * (1.0 - x).ln()
            + a * (-(1.0 - x)).ln_1p())
        .exp()
            * beta_cont_frac(b, a, 1.0 - x)
            / b
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..=20u32 {
            fact *= n as f64;
            let got = ln_gamma(n as f64 + 1.0);
            assert!(
                (got - fact.ln()).abs() < 1e-12,
                "ln_gamma({}) = {got}, want {}",
                n + 1,
                fact.ln()
            );
        }
    }

    #[test]
    fn ln_gamma_half_integer() {
        // Gamma(1/2) = sqrt(pi)
        let want = std::f64::consts::PI.sqrt().ln();
        assert!((ln_gamma(0.5) - want).abs() < 1e-14);
    }

    #[test]
    fn binomial_exact_small_table() {
        assert_eq!(binomial_exact(5, 2), 10);
        assert_eq!(binomial_exact(10, 5), 252);
        assert_eq!(binomial_exact(50, 25), 126410606437752);
        assert_eq!(binomial_exact(62, 31), 465428353255261088);
    }

    #[test]
    fn ln_binomial_consistent_across_routes() {
        // Exact route vs log-gamma route on both sides of the switch.
        for &(n, k) in &[(60u64, 17u64), (62, 31), (100, 3), (200, 57), (15000, 9)] {
            let via_gamma =
                ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
            let got = ln_binomial(n, k);
            assert!(
                (got - via_gamma).abs() < 1e-9 * via_gamma.abs().max(1.0),
                "ln_binomial({n},{k})"
            );
        }
    }

    #[test]
    fn reg_inc_beta_integer_shapes_closed_form() {
        // For integer shapes, I_x(a,b) = sum_{j=a}^{a+b-1} C(a+b-1,j) x^j (1-x)^(a+b-1-j).
        let closed = |a: u64, b: u64, x: f64| -> f64 {
            let n = a + b - 1;
            (a..=n)
                .map(|j| {
                    binomial_exact(n, j) as f64
                        * x.powi(j as i32)
                        * (1.0 - x).powi((n - j) as i32)
                })
                .sum()
        };
        for &(a, b) in &[(3u64, 4u64), (1, 1), (2, 5), (6, 2)] {
            for &x in &[0.001, 0.1, 0.25, 0.5, 0.65, 0.9, 0.999] {
                let got = reg_inc_beta(a as f64, b as f64, x);
                let want = closed(a, b, x);
                assert!(
                    (got - want).abs() < 1e-12,
                    "I_{x}({a},{b}) = {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn reg_inc_beta_bounds() {
        assert_eq!(reg_inc_beta(3.0, 4.0, 0.0), 0.0);
        assert_eq!(reg_inc_beta(3.0, 4.0, 1.0), 1.0);
        let mid = reg_inc_beta(2.5, 3.7, 0.42);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn log_sum_exp_basic() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        // Huge offsets must not overflow.
        let v = log_sum_exp(&[1000.0, 1000.0 + 2.0f64.ln()]);
        assert!((v - (1000.0 + 3.0f64.ln())).abs() < 1e-12);
    }
}
