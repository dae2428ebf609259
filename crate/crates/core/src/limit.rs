//! Limiting laws of normalized degrees: samplers, moments and the κ_s density.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::NumericError;
use crate::special::{gamma_times_kummer_u, ln_gamma};
use crate::tree::Tree;

fn invalid(msg: String) -> NumericError {
    NumericError::InvalidParameter(msg)
}

/// Parameters of the joint limit of the seed-vertex degrees.
///
/// Invariant: `seed_degrees` sum to `2(tree_size - 1)` and each is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLawSpec {
    seed_degrees: Vec<u32>,
}

impl LimitLawSpec {
    pub fn new(seed_degrees: Vec<u32>) -> Result<Self, NumericError> {
        let n = seed_degrees.len();
        if n < 2 {
            return Err(invalid(format!("seed needs at least 2 vertices, got {n}")));
        }
        if seed_degrees.contains(&0) {
            return Err(invalid("seed degrees must be positive".into()));
        }
        let sum: u64 = seed_degrees.iter().map(|&d| u64::from(d)).sum();
        if sum != 2 * (n as u64 - 1) {
            return Err(invalid(format!(
                "seed degrees sum to {sum}, a tree on {n} vertices needs {}",
                2 * (n - 1)
            )));
        }
        Ok(LimitLawSpec { seed_degrees })
    }

    pub fn from_tree(tree: &Tree) -> Result<Self, NumericError> {
        if !tree.is_loop_free() {
            return Err(invalid("limit laws are defined for loop-free seeds".into()));
        }
        Self::new(tree.degrees())
    }

    pub fn tree_size(&self) -> usize {
        self.seed_degrees.len()
    }

    pub fn seed_degrees(&self) -> &[u32] {
        &self.seed_degrees
    }

    /// Shape of the generalized gamma factor, `2|T| - 1`.
    pub fn gga_shape(&self) -> f64 {
        (2 * self.tree_size() - 1) as f64
    }
}

/// Draws from the generalized gamma law with density ∝ `x^(a-1) e^(-x^b)`.
pub fn sample_gga<R: Rng + ?Sized>(shape: f64, power: f64, rng: &mut R) -> Result<f64, NumericError> {
    if !(shape > 0.0 && power > 0.0) {
        return Err(invalid(format!("GGa needs positive parameters, got ({shape}, {power})")));
    }
    let g = Gamma::new(shape / power, 1.0).map_err(|e| invalid(e.to_string()))?;
    Ok(g.sample(rng).powf(power.recip()))
}

/// Draws from the Dirichlet law with the given positive weights.
pub fn sample_dirichlet<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<f64>, NumericError> {
    let mut draws = weights
        .iter()
        .map(|&w| {
            Gamma::new(w, 1.0)
                .map(|g| g.sample(rng))
                .map_err(|e| invalid(format!("Dirichlet weight {w}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total: f64 = draws.iter().sum();
    draws.iter_mut().for_each(|x| *x /= total);
    Ok(draws)
}

/// Joint limit of the seed degrees: `2·Z·X` with `X ~ Dir(seed degrees)` and
/// `Z ~ GGa(2|T|-1, 2)` independent.
pub fn sample_joint_limit_degrees<R: Rng + ?Sized>(spec: &LimitLawSpec, rng: &mut R) -> Vec<f64> {
    let weights: Vec<f64> = spec.seed_degrees.iter().map(|&d| f64::from(d)).collect();
    let x = sample_dirichlet(&weights, rng).expect("validated weights are positive");
    let z = sample_gga(spec.gga_shape(), 2.0, rng).expect("shape is positive");
    x.into_iter().map(|xi| 2.0 * z * xi).collect()
}

/// Limit of the scaled degree sum over a vertex subset of total seed degree `d`.
pub fn sample_subset_sum_limit<R: Rng + ?Sized>(
    tree_size: usize,
    d: u32,
    rng: &mut R,
) -> Result<f64, NumericError> {
    if tree_size < 2 {
        return Err(invalid(format!("tree size {tree_size} < 2")));
    }
    let total = 2 * (tree_size as u32 - 1);
    if d == 0 || d > total {
        return Err(invalid(format!("subset degree {d} outside 1..={total}")));
    }
    let z = sample_gga((2 * tree_size - 1) as f64, 2.0, rng)?;
    if d == total {
        return Ok(2.0 * z);
    }
    let b = Beta::new(f64::from(d), f64::from(total - d)).map_err(|e| invalid(e.to_string()))?;
    Ok(2.0 * b.sample(rng) * z)
}

/// Limit of the scaled degree of vertex `i`, born after the seed.
pub fn sample_late_vertex_limit<R: Rng + ?Sized>(i: usize, rng: &mut R) -> Result<f64, NumericError> {
    if i < 2 {
        return Err(invalid(format!("late vertex index {i} < 2")));
    }
    // at birth vertex i is a leaf of a tree on i vertices
    sample_subset_sum_limit(i, 1, rng)
}

/// `E D_i^r` for a seed vertex of degree `di` in a seed of size `tree_size`.
pub fn moment_seed_vertex(tree_size: usize, di: u32, r: f64) -> Result<f64, NumericError> {
    if tree_size < 2 || di == 0 || !(r > 0.0) {
        return Err(invalid(format!(
            "moment needs |T| >= 2, degree >= 1, r > 0; got ({tree_size}, {di}, {r})"
        )));
    }
    let m = tree_size as f64 - 1.0;
    let d = f64::from(di);
    Ok((ln_gamma(m) + ln_gamma(d + r) - ln_gamma(d) - ln_gamma(m + r / 2.0)).exp())
}

/// `E D_i^r` for a vertex `i` added after the seed.
pub fn moment_late_vertex(i: usize, r: f64) -> Result<f64, NumericError> {
    if i < 2 || !(r > 0.0) {
        return Err(invalid(format!("late-vertex moment needs i >= 2, r > 0; got ({i}, {r})")));
    }
    let m = i as f64 - 1.0;
    Ok((ln_gamma(m) + ln_gamma(1.0 + r) - ln_gamma(m + r / 2.0)).exp())
}

/// `E W_s^r`.
pub fn moment_ws(s: f64, r: f64) -> Result<f64, NumericError> {
    if !(s >= 0.5) || !(r > 0.0) {
        return Err(invalid(format!("W_s moment needs s >= 1/2, r > 0; got ({s}, {r})")));
    }
    Ok((0.5 * r * (s / 2.0).ln() + ln_gamma(s) + ln_gamma(1.0 + r) - ln_gamma(s + r / 2.0)).exp())
}

/// The law of `W_s`, whose density is built from Tricomi's `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaLaw {
    s: f64,
}

impl KappaLaw {
    pub fn new(s: f64) -> Result<Self, NumericError> {
        if !(s >= 0.5) || !s.is_finite() {
            return Err(invalid(format!("κ_s needs finite s >= 1/2, got {s}")));
        }
        Ok(KappaLaw { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn density(&self, x: f64) -> Result<f64, NumericError> {
        kappa_density(self.s, x)
    }

    pub fn moment(&self, r: f64) -> Result<f64, NumericError> {
        moment_ws(self.s, r)
    }

    pub fn tail_bound(&self, x: f64) -> Result<f64, NumericError> {
        tail_bound_ws(self.s, x)
    }
}

/// `Γ(s)·U(s-1, 1/2, z)`, kept out of the gamma function's overflow range.
fn gamma_s_times_u(s: f64, z: f64) -> Result<f64, NumericError> {
    let a = s - 1.0;
    if a == 0.0 {
        Ok(1.0)
    } else if a > 0.0 {
        // Γ(s)/Γ(s-1) = s-1
        Ok(a * gamma_times_kummer_u(a, 0.5, z)?)
    } else {
        // U(a, 1/2, z) = z^(1/2) U(a + 1/2, 3/2, z) for a in [-1/2, 0)
        let a2 = a + 0.5;
        let g = ln_gamma(s).exp();
        if a2 == 0.0 {
            return Ok(g * z.sqrt());
        }
        if z == 0.0 {
            // z^(1/2) U(a2, 3/2, z) → Γ(1/2)/Γ(a2) as z → 0
            return Ok(g * std::f64::consts::PI.sqrt() / ln_gamma(a2).exp());
        }
        Ok(g * z.sqrt() * gamma_times_kummer_u(a2, 1.5, z)? / ln_gamma(a2).exp())
    }
}

/// Density of `W_s` at `x`; zero for `x <= 0`.
pub fn kappa_density(s: f64, x: f64) -> Result<f64, NumericError> {
    if !(s >= 0.5) || !s.is_finite() {
        return Err(invalid(format!("κ_s needs finite s >= 1/2, got {s}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let z = x * x / (2.0 * s);
    let front = (2.0 / (s * std::f64::consts::PI)).sqrt() * (-z).exp();
    if front == 0.0 {
        return Ok(0.0);
    }
    Ok(front * gamma_s_times_u(s, z)?)
}

/// Upper bound `(s/x)·κ_s(x)` on `P(W_s > x)`.
pub fn tail_bound_ws(s: f64, x: f64) -> Result<f64, NumericError> {
    if !(s >= 1.0) || !(x > 0.0) {
        return Err(invalid(format!("tail bound needs s >= 1, x > 0; got ({s}, {x})")));
    }
    Ok(s / x * kappa_density(s, x)?)
}
