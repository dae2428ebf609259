//! Special functions: gamma family, erfc, incomplete beta, Kummer U.

use crate::error::NumericError;
use crate::quad::{integrate_to_infinity, QuadConfig};

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Exact binomial coefficient; `None` when it exceeds `u128`.
pub fn binomial_exact(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after multiplication
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    match binomial_exact(n, k) {
        Some(v) => v as f64,
        None => (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
            .exp(),
    }
}

/// `n!!` for `n >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    assert!(n >= -1, "double_factorial({n})");
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64, NumericError> {
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
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
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
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(NumericError::QuadratureNonConvergence {
        estimate: h,
        error: f64::NAN,
        evaluations: 10_000,
    })
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> Result<f64, NumericError> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(NumericError::InvalidParameter(format!(
            "beta_reg requires a, b > 0 and x in [0, 1], got a={a}, b={b}, x={x}"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(b, a, 1.0 - x)? / b)
    }
}

/// `1 - I_x(a, b)`, evaluated as `I_{1-x}(b, a)`.
pub fn beta_reg_complement(a: f64, b: f64, x: f64) -> Result<f64, NumericError> {
    beta_reg(b, a, 1.0 - x)
}

fn kummer_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_intervals: 4000,
    }
}

/// `Γ(a)·U(a, b, z)` for `a > 0`, `z >= 0`, from the Laplace integral.
///
/// At `z = 0` the integral converges only for `b < 1`.
pub fn gamma_times_kummer_u(a: f64, b: f64, z: f64) -> Result<f64, NumericError> {
    if !(a > 0.0) || !(z >= 0.0) || (z == 0.0 && b >= 1.0) {
        return Err(NumericError::InvalidParameter(format!(
            "kummer U integral needs a > 0, z >= 0 (b < 1 at z = 0), got a={a}, b={b}, z={z}"
        )));
    }
    if z == 0.0 {
        // Γ(a)·Γ(1-b)/Γ(a-b+1); the integral tail decays too slowly here
        return Ok((ln_gamma(a) + ln_gamma(1.0 - b) - ln_gamma(a - b + 1.0)).exp());
    }
    let scale = 1.0 + a / (1.0 + z);
    if a >= 1.0 {
        let r = integrate_to_infinity(
            |w| {
                if w == 0.0 {
                    return if a == 1.0 { 1.0 } else { 0.0 };
                }
                (-z * w + (a - 1.0) * w.ln() + (b - a - 1.0) * w.ln_1p()).exp()
            },
            0.0,
            scale,
            kummer_cfg(),
        )?;
        Ok(r.value)
    } else {
        // w = y^(1/a) removes the w^(a-1) singularity
        let inv = 1.0 / a;
        let r = integrate_to_infinity(
            |y| {
                let w = y.powf(inv);
                (-z * w + (b - a - 1.0) * w.ln_1p()).exp()
            },
            0.0,
            scale,
            kummer_cfg(),
        )?;
        Ok(r.value / a)
    }
}

/// Tricomi's confluent hypergeometric function `U(a, b, z)` for `a >= 0`.
pub fn kummer_u(a: f64, b: f64, z: f64) -> Result<f64, NumericError> {
    if a == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_times_kummer_u(a, b, z)? / gamma(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_family() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((ln_gamma(101.0) - 363.739_375_555_563_5).abs() < 1e-10);
        assert_eq!(binomial_exact(10, 3), Some(120));
        assert_eq!(binomial_exact(3, 5), Some(0));
        assert_eq!(double_factorial(-1), 1.0);
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(7), 105.0);
        assert_eq!(double_factorial(8), 384.0);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, b) = 1 - (1-x)^b and I_x(a, 1) = x^a
        for &x in &[0.01, 0.3, 0.5, 0.9, 0.999] {
            let v = beta_reg(1.0, 3.5, x).unwrap();
            assert!((v - (1.0 - (1.0f64 - x).powf(3.5))).abs() < 1e-14);
            let v = beta_reg(2.5, 1.0, x).unwrap();
            assert!((v - x.powf(2.5)).abs() < 1e-14);
            let c = beta_reg_complement(2.5, 1.0, x).unwrap();
            assert!((c + v - 1.0).abs() < 1e-14);
        }
        // symmetric case at the midpoint
        assert!((beta_reg(4.0, 4.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
        // complement keeps relative accuracy deep in the tail
        let c = beta_reg_complement(1.0, 30.0, 0.9).unwrap();
        assert!((c / 0.1f64.powi(30) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kummer_u_closed_forms() {
        // U(a, a+1, z) = z^-a
        for &(a, z) in &[(0.3, 0.7), (1.0, 2.0), (2.5, 1.3), (7.0, 4.0)] {
            let u = kummer_u(a, a + 1.0, z).unwrap();
            assert!((u * z.powf(a) - 1.0).abs() < 1e-10, "a={a} z={z} u={u}");
        }
        // U(1/2, 1/2, z) = sqrt(pi) e^z erfc(sqrt z)
        for &z in &[0.1, 1.0, 5.0] {
            let u = kummer_u(0.5, 0.5, z).unwrap();
            let exact = std::f64::consts::PI.sqrt() * z.exp() * erfc(z.sqrt());
            assert!((u / exact - 1.0).abs() < 1e-10, "z={z}");
        }
        // U(a, 1/2, 0) = sqrt(pi) / Gamma(a + 1/2)
        for &a in &[0.25, 1.0, 3.0] {
            let u = kummer_u(a, 0.5, 0.0).unwrap();
            assert!((u * gamma(a + 0.5) / std::f64::consts::PI.sqrt() - 1.0).abs() < 1e-9);
        }
        assert_eq!(kummer_u(0.0, 0.5, 3.0).unwrap(), 1.0);
        assert!(kummer_u(-1.0, 0.5, 1.0).is_err());
    }
}
