//! Fast invariant suite behind `paseed validate`.

use paseed::ahu::{trees_isomorphic, unlabeled_trees};
use paseed::growth::{read_parent_array, tree_from_parent_array, write_parent_array};
use paseed::harness::{leaf_attachment_probability, Ratio};
use paseed::limit::kappa_density;
use paseed::quad::{integrate_to_infinity, QuadConfig};
use paseed::rng::{family, stream};
use paseed::special::erfc;
use paseed::tail::{a_m, a_m_closed_form, alt_sum_identity_check, tail_v_exact, tail_v_quadrature};
use paseed::umax::{umax_bruteforce, umax_dp, UMaxQuery};
use paseed::{grow, Tree};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::ValidateConfig;
use crate::error::CliResult;
use crate::output::{real, Outputs};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("worst {} (tolerance {})", real(worst), real(tol)),
    }
}

fn run_checks(cases: usize, master: u64) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0, 4.0] {
        worst = worst.max((tail_v_exact(1, 1, t)?.value - erfc(t / 2.0)).abs());
    }
    checks.push(check("tail_erfc_closed_form", worst, 1e-10));

    let mut worst = 0.0f64;
    for a in 1..=3 {
        for b in 1..=3 {
            for t in [1.0, 4.0] {
                let q = tail_v_quadrature(a, b, t)?;
                worst = worst.max((tail_v_exact(a, b, t)?.value - q).abs() / q);
            }
        }
    }
    checks.push(check("tail_exact_vs_quadrature", worst, 1e-8));

    let worst = (0..=12)
        .map(|m| (a_m(m, 3.0) - a_m_closed_form(m, 3.0)).abs() / a_m_closed_form(m, 3.0))
        .fold(0.0, f64::max);
    checks.push(check("a_m_recursion", worst, 1e-10));

    let mut worst = 0.0f64;
    for s in [1.0, 2.0] {
        let total = integrate_to_infinity(|x| kappa_density(s, x).unwrap_or(f64::NAN), 0.0, 1.0, QuadConfig::rel(1e-9))?;
        worst = worst.max((total.value - 1.0).abs());
    }
    checks.push(check("kappa_normalization", worst, 1e-6));

    let mut rng = stream(master, family::MISC, 0);
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.random_range(1..=20u32);
        let coefficients: Vec<i64> = (0..n).map(|_| rng.random_range(-50..=50)).collect();
        if !alt_sum_identity_check(n, &coefficients)? {
            failures += 1;
        }
    }
    checks.push(check("alternating_sum_identity", failures as f64, 0.0));

    let catalog = unlabeled_trees(7);
    let mut mismatches = 0;
    for u in catalog.iter().filter(|u| u.vertex_count() <= 3) {
        for t in &catalog {
            let q = UMaxQuery::new(u, t);
            if umax_dp(q) != umax_bruteforce(q) {
                mismatches += 1;
            }
        }
    }
    checks.push(check("umax_dp_vs_bruteforce", mismatches as f64, 0.0));

    let mut broken = 0;
    for r in 0..cases as u64 {
        let state = grow(&Tree::spur_near_end(), 300, &mut stream(master, family::GROWTH_FIRST, r))?;
        let parents = state.parent_array();
        let mut bytes = Vec::new();
        write_parent_array(&parents, &mut bytes)?;
        let back = tree_from_parent_array(&read_parent_array(bytes.as_slice())?)?;
        if !state.check_invariants() || !trees_isomorphic(&back, &state.to_tree()) {
            broken += 1;
        }
    }
    checks.push(check("growth_invariants_and_parent_round_trip", broken as f64, 0.0));

    let mut broken = 0;
    for _ in 0..cases {
        let n = rng.random_range(2..=12usize);
        let t = Tree::random_labeled(n, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        if !trees_isomorphic(&t, &t.relabel(&perm)) {
            broken += 1;
        }
    }
    checks.push(check("isomorphism_under_relabeling", broken as f64, 0.0));

    let p = leaf_attachment_probability(&Tree::path(3))?;
    checks.push(Check {
        name: "star_from_edge_probability",
        passed: p == Ratio::new(1, 2),
        detail: format!("P(PA(4, S_2) is a star) = {p}"),
    });
    Ok(checks)
}

/// Runs the suite and writes `validate.csv`; returns whether all checks passed.
pub fn validate(cfg: &ValidateConfig, master: u64, out: &mut Outputs) -> CliResult<bool> {
    let checks = run_checks(cfg.cases.unwrap_or(200), master)?;
    let all = checks.iter().all(|c| c.passed);
    let rows = checks
        .into_iter()
        .map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail]);
    out.csv("validate.csv", &["check", "passed", "detail"], rows)?;
    Ok(all)
}
