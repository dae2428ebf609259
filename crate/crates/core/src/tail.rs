//! Exact and asymptotic tail probabilities of subset-sum limits and of the
//! scaled maximum degree.

use crate::error::NumericError;
use crate::quad::{integrate_to_infinity, QuadConfig};
use crate::special::{beta_reg_complement, binomial, binomial_exact, double_factorial, erfc, ln_gamma};
use crate::tree::Tree;

/// Cancellation ratio `max|term| / |sum|` above which the alternating sum is
/// abandoned for quadrature.
pub const CANCELLATION_LIMIT: f64 = 1e8;

fn invalid(msg: String) -> NumericError {
    NumericError::InvalidParameter(msg)
}

/// Tail of the scaled degree sum over a subset of seed vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub tree_size: usize,
    pub d: u32,
    pub t: f64,
}

impl TailQuery {
    pub fn new(tree_size: usize, d: u32, t: f64) -> Result<Self, NumericError> {
        if tree_size < 2 {
            return Err(invalid(format!("tree size {tree_size} < 2")));
        }
        let total = 2 * (tree_size as u32 - 1);
        if d == 0 || d > total {
            return Err(invalid(format!("subset degree {d} outside 1..={total}")));
        }
        if !(t > 0.0) {
            return Err(invalid(format!("threshold {t} must be positive")));
        }
        Ok(TailQuery { tree_size, d, t })
    }

    /// Beta parameters `(d, 2|T|-2-d)`; the second is zero for the whole seed.
    pub fn beta_parameters(&self) -> (u32, u32) {
        (self.d, 2 * (self.tree_size as u32 - 1) - self.d)
    }
}

/// Tail of the scaled maximum degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTailQuery {
    pub tree_size: usize,
    pub max_degree: u32,
    pub multiplicity: usize,
    pub t: f64,
}

impl MaxTailQuery {
    pub fn new(tree_size: usize, max_degree: u32, multiplicity: usize, t: f64) -> Result<Self, NumericError> {
        if tree_size < 2 {
            return Err(invalid(format!("tree size {tree_size} < 2")));
        }
        if max_degree == 0 || max_degree as usize > tree_size - 1 {
            return Err(invalid(format!("max degree {max_degree} outside 1..={}", tree_size - 1)));
        }
        if multiplicity == 0 || multiplicity > tree_size {
            return Err(invalid(format!("multiplicity {multiplicity} outside 1..={tree_size}")));
        }
        if !(t > 0.0) {
            return Err(invalid(format!("threshold {t} must be positive")));
        }
        Ok(MaxTailQuery {
            tree_size,
            max_degree,
            multiplicity,
            t,
        })
    }

    pub fn from_tree(tree: &Tree, t: f64) -> Result<Self, NumericError> {
        if !tree.is_loop_free() {
            return Err(invalid("max-degree tails are defined for loop-free seeds".into()));
        }
        Self::new(tree.vertex_count(), tree.max_degree(), tree.max_degree_multiplicity(), t)
    }
}

/// How a tail probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    ClosedForm,
    QuadratureFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValue {
    pub value: f64,
    pub method: TailMethod,
    /// `max|term| / |sum|` of the alternating sum (1 for single-term forms).
    pub cancellation_ratio: f64,
}

/// `Γ(2a-2) / (2^(b-1) Γ(a-1/2) Γ(b))`.
pub fn const_c(a: f64, b: f64) -> Result<f64, NumericError> {
    if !(2.0 * a - 2.0 > 0.0) || !(a - 0.5 > 0.0) {
        return Err(NumericError::GammaPole(2.0 * a - 2.0));
    }
    if !(b > 0.0) {
        return Err(NumericError::GammaPole(b));
    }
    Ok((ln_gamma(2.0 * a - 2.0) - (b - 1.0) * std::f64::consts::LN_2 - ln_gamma(a - 0.5) - ln_gamma(b)).exp())
}

/// `∫_t^∞ y^m e^(-y²/4) dy` for `m = 0..=max_m`, by forward recursion.
pub fn a_sequence(max_m: usize, t: f64) -> Vec<f64> {
    let g = (-t * t / 4.0).exp();
    let mut a = Vec::with_capacity(max_m + 1);
    a.push(std::f64::consts::PI.sqrt() * erfc(t / 2.0));
    if max_m >= 1 {
        a.push(2.0 * g);
    }
    for m in 2..=max_m {
        let next = 2.0 * t.powi(m as i32 - 1) * g + 2.0 * (m as f64 - 1.0) * a[m - 2];
        a.push(next);
    }
    a
}

pub fn a_m(m: usize, t: f64) -> f64 {
    a_sequence(m, t)[m]
}

/// `A_m` from its unrolled closed form; used to cross-check the recursion.
pub fn a_m_closed_form(m: usize, t: f64) -> f64 {
    let g = (-t * t / 4.0).exp();
    let mi = m as i64;
    let terms = if m % 2 == 1 { (m - 1) / 2 + 1 } else { m / 2 };
    let mut sum = 0.0;
    for l in 0..terms as i64 {
        sum += double_factorial(mi - 1) / double_factorial(mi - 2 * l - 1) * (2.0 / (t * t)).powi(l as i32);
    }
    let mut value = 2.0 * t.powi(mi as i32 - 1) * g * sum;
    if m.is_multiple_of(2) {
        value += 2f64.powi(mi as i32 / 2) * double_factorial(mi - 1) * std::f64::consts::PI.sqrt() * erfc(t / 2.0);
    }
    value
}

fn check_ab(a: u32, b: u32, t: f64) -> Result<(), NumericError> {
    if a == 0 || b == 0 {
        return Err(invalid(format!("Beta parameters must be positive, got ({a}, {b})")));
    }
    if a + b > 64 {
        return Err(invalid(format!("a + b = {} exceeds the supported 64", a + b)));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("threshold {t} must be positive")));
    }
    Ok(())
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `P(2BZ > t)` with `B ~ Beta(a, b)`, `Z ~ GGa(a+b+1, 2)`, from the
/// alternating double sum over `A_m` integrals.
///
/// Falls back to [`tail_v_quadrature`] when the cancellation ratio exceeds
/// [`CANCELLATION_LIMIT`].
pub fn tail_v_exact(a: u32, b: u32, t: f64) -> Result<TailValue, NumericError> {
    check_ab(a, b, t)?;
    let n = a + b - 1;
    let seq = a_sequence(n as usize + 1, t);
    let mut terms = Vec::new();
    for j in 0..a {
        let outer = binomial(n, j);
        for k in 0..=(n - j) {
            let sign = if (n - j - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            terms.push(sign * outer * binomial(n - j, k) * t.powi((n - k) as i32) * seq[k as usize + 1]);
        }
    }
    let sum = compensated_sum(terms.iter().copied());
    let largest = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ratio = if sum != 0.0 { largest / sum.abs() } else { f64::INFINITY };
    if !(ratio <= CANCELLATION_LIMIT) || !(sum > 0.0) {
        let q = tail_v_quadrature(a, b, t)?;
        return Ok(TailValue {
            value: q,
            method: TailMethod::QuadratureFallback,
            cancellation_ratio: ratio,
        });
    }
    let front = (-(f64::from(a + b)) * std::f64::consts::LN_2 - ln_gamma(f64::from(a + b + 1) / 2.0)).exp();
    Ok(TailValue {
        value: (front * sum).min(1.0),
        method: TailMethod::ClosedForm,
        cancellation_ratio: ratio,
    })
}

/// `P(2BZ > t)` by adaptive quadrature of the conditional Beta tail against
/// the density of `Z`.
pub fn tail_v_quadrature(a: u32, b: u32, t: f64) -> Result<f64, NumericError> {
    check_ab(a, b, t)?;
    let (af, bf) = (f64::from(a), f64::from(b));
    let ln_norm = std::f64::consts::LN_2 - ln_gamma((af + bf + 1.0) / 2.0);
    let mut failure = None;
    let r = integrate_to_infinity(
        |z| {
            let x = (t / (2.0 * z)).min(1.0);
            let upper = match beta_reg_complement(af, bf, x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            upper * (ln_norm + (af + bf) * z.ln() - z * z).exp()
        },
        t / 2.0,
        1.0,
        QuadConfig::rel(1e-10),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

/// `P(2Z > t)` with `Z ~ GGa(2|T|-1, 2)`: the tail of the whole-seed degree sum.
pub fn tail_whole_seed(tree_size: usize, t: f64) -> Result<f64, NumericError> {
    if tree_size < 2 || !(t > 0.0) {
        return Err(invalid(format!("whole-seed tail needs |T| >= 2, t > 0; got ({tree_size}, {t})")));
    }
    let m = 2 * tree_size - 2;
    let front = (-(m as f64) * std::f64::consts::LN_2 - ln_gamma(tree_size as f64 - 0.5)).exp();
    Ok((front * a_m(m, t)).min(1.0))
}

/// Exact tail for any subset query, whole seed included.
pub fn tail_subset(q: &TailQuery) -> Result<TailValue, NumericError> {
    match q.beta_parameters() {
        (_, 0) => Ok(TailValue {
            value: tail_whole_seed(q.tree_size, q.t)?,
            method: TailMethod::ClosedForm,
            cancellation_ratio: 1.0,
        }),
        (a, b) => tail_v_exact(a, b, q.t),
    }
}

/// Truncated asymptotic series of `√π erfc(t/2)` through index `order`, with
/// the magnitude of the first omitted term as remainder bound.
pub fn erfc_asymptotic(t: f64, order: u32) -> (f64, f64) {
    let g = (-t * t / 4.0).exp();
    let mut sum = 0.0;
    for n in 0..=order as i64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * 2f64.powi(n as i32) * double_factorial(2 * n - 1) * t.powi(-(2 * n as i32) - 1);
    }
    let n = i64::from(order);
    let bound = 2f64.powi(n as i32 + 2) * double_factorial(2 * n + 1) * t.powi(-(2 * n as i32) - 3) * g;
    (2.0 * g * sum, bound)
}

/// `Σ_k (-1)^k C(n,k) P(k)` in exact integer arithmetic, where `P` has the
/// given coefficients (constant term first). `None` on overflow.
pub fn alt_sum(n: u32, coefficients: &[i64]) -> Option<i128> {
    let mut total: i128 = 0;
    for k in 0..=n {
        let mut p: i128 = 0;
        for &c in coefficients.iter().rev() {
            p = p.checked_mul(i128::from(k))?.checked_add(i128::from(c))?;
        }
        let c = i128::try_from(binomial_exact(n, k)?).ok()?;
        let term = c.checked_mul(p)?;
        total = if k % 2 == 0 { total.checked_add(term)? } else { total.checked_sub(term)? };
    }
    Some(total)
}

/// Whether the alternating binomial sum annihilates a polynomial of degree
/// below `n`.
pub fn alt_sum_identity_check(n: u32, coefficients: &[i64]) -> Result<bool, NumericError> {
    let degree = coefficients.iter().rposition(|&c| c != 0).unwrap_or(0);
    if n == 0 || degree as u32 >= n {
        return Err(invalid(format!("need n >= 1 and degree < n, got n={n}, degree={degree}")));
    }
    alt_sum(n, coefficients)
        .map(|s| s == 0)
        .ok_or_else(|| invalid("alternating sum overflowed 128-bit arithmetic".into()))
}

/// `c(|T|, d)·t^(1-2|T|+2d)·e^(-t²/4)`.
pub fn tail_asymptotic_subset(q: &TailQuery) -> Result<f64, NumericError> {
    let n = q.tree_size as f64;
    let d = f64::from(q.d);
    let c = const_c(n, d)?;
    Ok(c * ((1.0 - 2.0 * n + 2.0 * d) * q.t.ln() - q.t * q.t / 4.0).exp())
}

/// `m·c(|T|, Δ)·t^(1-2|T|+2Δ)·e^(-t²/4)`.
pub fn tail_asymptotic_max(q: &MaxTailQuery) -> Result<f64, NumericError> {
    let sub = TailQuery::new(q.tree_size, q.max_degree, q.t)?;
    Ok(q.multiplicity as f64 * tail_asymptotic_subset(&sub)?)
}

/// Explicit upper bound on `Σ_{i >= L} P(D_i > t)` over vertices born after
/// the seed.
pub fn tail_bound_late_vertices(tree_size: usize, first: usize, t: f64) -> Result<f64, NumericError> {
    if first <= tree_size || first < 3 || !(t >= 1.0) {
        return Err(invalid(format!(
            "late-vertex bound needs L > |T|, L >= 3, t >= 1; got (|T|={tree_size}, L={first}, t={t})"
        )));
    }
    let front = 2.0 / (std::f64::consts::PI.sqrt() * t) * (-t * t / 4.0).exp();
    let series = if first == 3 {
        4.0 / (t * t) + 16.0 / t.powi(4)
    } else {
        let l = first as f64;
        ((l - 2.0) * 4f64.ln() + ln_gamma(l - 1.0) - (2.0 * l - 4.0) * t.ln()).exp()
    };
    Ok(front * series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn const_c_values() {
        assert!((const_c(2.0, 1.0).unwrap() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((const_c(2.0, 2.0).unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((const_c(2.0, 1.0).unwrap() - 1.128_379).abs() < 1e-6);
        assert!(const_c(1.0, 1.0).is_err());
        assert!(const_c(2.0, 0.0).is_err());
        for a in 2..20 {
            for b in 1..(2 * a - 1) {
                assert!(const_c(a as f64, b as f64).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn a_m_base_cases_and_closed_forms() {
        assert!((a_m(1, 2.0) - 0.735_758_882_342_884_6).abs() < 1e-12);
        assert!((a_m(0, 2.0) - 0.278_805_585_280_933_8).abs() < 1e-12);
        for &t in &[0.5f64, 1.0, 3.0, 7.0] {
            let a3 = 2.0 * (t * t + 4.0) * (-t * t / 4.0).exp();
            assert!(rel(a_m(3, t), a3) < 1e-14);
            for m in 0..=20 {
                assert!(rel(a_m(m, t), a_m_closed_form(m, t)) < 1e-12, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn a_m_matches_quadrature() {
        for &t in &[1.0, 2.0, 4.0] {
            for m in 0..=12 {
                let q = integrate_to_infinity(
                    |y| y.powi(m as i32) * (-y * y / 4.0).exp(),
                    t,
                    2.0,
                    QuadConfig::rel(1e-12),
                )
                .unwrap()
                .value;
                assert!(rel(a_m(m, t), q) < 1e-10, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn uniform_beta_reduces_to_erfc() {
        let v = tail_v_exact(1, 1, 2.0).unwrap();
        assert_eq!(v.method, TailMethod::ClosedForm);
        assert!((v.value - 0.157_299_207_050_285_1).abs() < 1e-12);
        let q = tail_v_quadrature(1, 1, 2.0).unwrap();
        assert!((q - 0.157_299_207_050_285_1).abs() < 1e-10);
        for i in 1..=100 {
            let t = 0.1 * i as f64;
            let e = erfc(t / 2.0);
            assert!(rel(tail_v_exact(1, 1, t).unwrap().value, e) < 1e-10, "t={t}");
        }
        assert!((tail_v_exact(3, 2, 1e-6).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        for a in 1..=5 {
            for b in 1..=5 {
                for &t in &[0.5, 1.0, 2.0, 4.0, 6.0, 8.0] {
                    let e = tail_v_exact(a, b, t).unwrap();
                    let q = tail_v_quadrature(a, b, t).unwrap();
                    assert!(rel(e.value, q) < 1e-8, "a={a} b={b} t={t}: {} vs {q}", e.value);
                }
            }
        }
        assert!((tail_v_exact(2, 1, 4.0).unwrap().value - tail_v_quadrature(2, 1, 4.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn heavy_cancellation_falls_back() {
        let v = tail_v_exact(30, 30, 20.0).unwrap();
        assert_eq!(v.method, TailMethod::QuadratureFallback);
        assert!(v.cancellation_ratio > CANCELLATION_LIMIT);
        assert!(v.value > 0.0 && v.value < 1.0);
    }

    #[test]
    fn quadrature_is_monotone() {
        let mut prev = 1.0;
        for i in 1..40 {
            let q = tail_v_quadrature(2, 3, 0.25 * i as f64).unwrap();
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn whole_seed_tail_matches_density_integral() {
        for size in 2..6usize {
            for &t in &[0.5, 2.0, 5.0] {
                let shape = (2 * size - 1) as f64;
                let ln_norm = std::f64::consts::LN_2 - ln_gamma(shape / 2.0);
                let q = integrate_to_infinity(
                    |z| (ln_norm + (shape - 1.0) * z.ln() - z * z).exp(),
                    t / 2.0,
                    1.0,
                    QuadConfig::rel(1e-12),
                )
                .unwrap()
                .value;
                assert!(rel(tail_whole_seed(size, t).unwrap(), q) < 1e-10);
            }
        }
        let q = TailQuery::new(3, 4, 2.0).unwrap();
        assert_eq!(tail_subset(&q).unwrap().value, tail_whole_seed(3, 2.0).unwrap());
    }

    #[test]
    fn erfc_series_bounds() {
        let (v, bound) = erfc_asymptotic(6.0, 0);
        assert!((v - 2.0 * (-9f64).exp() / 6.0).abs() < 1e-18);
        assert!((v - 4.1137e-5).abs() < 1e-8);
        let truth = std::f64::consts::PI.sqrt() * erfc(3.0);
        assert!((v - truth).abs() <= bound);
        for &t in &[4.0, 6.0, 8.0] {
            let truth = std::f64::consts::PI.sqrt() * erfc(t / 2.0);
            let mut prev = f64::INFINITY;
            for order in 0..=4 {
                let (v, bound) = erfc_asymptotic(t, order);
                assert!((v - truth).abs() <= bound, "t={t} order={order}");
                if t == 8.0 {
                    assert!(bound < prev);
                    prev = bound;
                }
            }
        }
        assert!(erfc_asymptotic(50.0, 2).1 < 1e-200);
    }

    #[test]
    fn alternating_identity_examples() {
        assert!(alt_sum_identity_check(3, &[0, 0, 1]).unwrap());
        // k(k-2)(k-4) = k^3 - 6k^2 + 8k
        assert!(alt_sum_identity_check(5, &[0, 8, -6, 1]).unwrap());
        assert!(alt_sum_identity_check(2, &[0, 1]).unwrap());
        // degree n is not annihilated: Σ(-1)^k C(n,k) k^n = (-1)^n n!
        assert_eq!(alt_sum(3, &[0, 0, 0, 1]), Some(-6));
        assert!(alt_sum_identity_check(3, &[0, 0, 0, 1]).is_err());
    }

    #[test]
    fn asymptotic_forms() {
        let q = TailQuery::new(2, 1, 4.0).unwrap();
        assert!((tail_asymptotic_subset(&q).unwrap() - 0.005_166_8).abs() < 1e-7);
        let m = MaxTailQuery::from_tree(&Tree::star(2), 4.0).unwrap();
        assert_eq!(m.multiplicity, 2);
        let expected = 2.0 * const_c(2.0, 1.0).unwrap() / 4.0 * (-4f64).exp();
        assert!(rel(tail_asymptotic_max(&m).unwrap(), expected) < 1e-14);
        assert!((expected - 0.010_333_7).abs() < 5e-7);
        for k in 3..8 {
            let m = MaxTailQuery::from_tree(&Tree::star(k), 3.0).unwrap();
            assert_eq!(m.multiplicity, 1);
            let expected = const_c(k as f64, (k - 1) as f64).unwrap() / 3.0 * (-9.0f64 / 4.0).exp();
            assert!(rel(tail_asymptotic_max(&m).unwrap(), expected) < 1e-12);
        }
        // whole seed exponent is 2|T|-3
        let q = TailQuery::new(4, 6, 3.0).unwrap();
        let expected = const_c(4.0, 6.0).unwrap() * 3f64.powi(5) * (-9.0f64 / 4.0).exp();
        assert!(rel(tail_asymptotic_subset(&q).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn asymptotic_ratio_tends_to_one() {
        for &(size, d) in &[(2usize, 1u32), (3, 1), (3, 2), (4, 3), (3, 4)] {
            let gaps: Vec<f64> = [6.0, 8.0, 10.0]
                .iter()
                .map(|&t| {
                    let q = TailQuery::new(size, d, t).unwrap();
                    (tail_asymptotic_subset(&q).unwrap().ln() - tail_subset(&q).unwrap().value.ln()).abs()
                })
                .collect();
            assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "size={size} d={d} {gaps:?}");
            assert!(gaps[2] < 0.5, "size={size} d={d} {gaps:?}");
        }
    }

    #[test]
    fn late_vertex_bound_values() {
        let t: f64 = 2.5;
        let expected = 2.0 / (std::f64::consts::PI.sqrt() * t) * (-t * t / 4.0).exp() * (4.0 / (t * t) + 16.0 / t.powi(4));
        assert!(rel(tail_bound_late_vertices(2, 3, t).unwrap(), expected) < 1e-14);
        assert!((tail_bound_late_vertices(3, 4, 4.0).unwrap() - 6.458e-4).abs() < 1e-6);
        assert!(tail_bound_late_vertices(3, 3, 2.0).is_err());
        assert!(tail_bound_late_vertices(2, 3, 0.5).is_err());
    }

    #[test]
    fn late_vertex_tail_below_bound_by_quadrature() {
        // P(D_i > t) = P(2·Beta(1, 2i-3)·GGa(2i-1, 2) > t) is the a=1, b=2i-3 tail
        for &t in &[2.0, 4.0] {
            for first in 3..6usize {
                let sum: f64 = (first..first + 25)
                    .map(|i| tail_v_exact(1, 2 * i as u32 - 3, t).unwrap().value)
                    .sum();
                assert!(sum <= tail_bound_late_vertices(2, first, t).unwrap(), "t={t} L={first}");
            }
        }
    }
}
