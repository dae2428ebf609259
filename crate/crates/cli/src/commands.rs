//! Subcommand bodies. Each reads its parsed config and writes tables
//! through [`Outputs`]; replicas run on the global rayon pool and are
//! collected in index order, so outputs do not depend on the thread count.

use std::collections::BTreeMap;

use paseed::ahu::{unrooted_code, RootedBallCode};
use paseed::growth::{watch_degrees, write_parent_array};
use paseed::harness::{
    compare_to_limit_law, estimate_tv_lower_bound, ExperimentConfig, Ordering,
};
use paseed::local::{empirical_ball_distribution, polya_point_distribution, tv_between, BallDistribution};
use paseed::quad::{integrate_to_infinity, QuadConfig};
use paseed::rng::{family, stream};
use paseed::special::ln_gamma;
use paseed::tail::{tail_asymptotic_subset, tail_subset, tail_v_quadrature, TailMethod, TailQuery};
use paseed::umax::{umax_bruteforce, umax_dp, umax_statistic_trajectory, UMaxQuery};
use paseed::{GrowthState, Tree};
use rayon::prelude::*;

use crate::config::{
    BallDistConfig, GrowConfig, LocalLimitConfig, MomentsConfig, TailConfig, TreeResolver, TvConfig,
    UmaxConfig, UmaxSweepConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{real, Outputs};

pub struct Context {
    pub master_seed: u64,
    pub resolver: TreeResolver,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, value: usize) -> CliResult<()> {
    if value == 0 {
        return Err(config_error(format!("`{name}` must be positive")));
    }
    Ok(())
}

struct GrowRun {
    shape: Option<(String, String)>,
    rows: Vec<(usize, String, f64)>,
    parents: Option<Vec<u32>>,
}

pub fn grow(cfg: &GrowConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    positive("replicas", cfg.replicas)?;
    let seed = ctx.resolver.resolve(&cfg.seed)?.canonical_relabel();
    if cfg.n < seed.vertex_count() {
        return Err(config_error(format!("n = {} is below the seed size {}", cfg.n, seed.vertex_count())));
    }
    let watched: Vec<usize> = cfg
        .watch
        .iter()
        .map(|&v| match v {
            v if (1..=seed.vertex_count()).contains(&v) => Ok(v - 1),
            _ => Err(config_error(format!("watched vertex {v} is not a seed label"))),
        })
        .collect::<CliResult<_>>()?;
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.push(cfg.n);
    if let Some(&c) = checkpoints.iter().find(|&&c| c < seed.vertex_count() || c > cfg.n) {
        return Err(config_error(format!("checkpoint {c} outside {}..={}", seed.vertex_count(), cfg.n)));
    }
    let with_shapes = cfg.n <= cfg.shape_histogram_max_n;

    let runs: Vec<GrowRun> = (0..cfg.replicas)
        .into_par_iter()
        .map_init(
            || GrowthState::new(&seed).expect("seed validated"),
            |state, r| -> CliResult<GrowRun> {
                state.reset();
                let mut rng = stream(ctx.master_seed, family::GROWTH_FIRST, r as u64);
                let traj = watch_degrees(state, &watched, &checkpoints, &mut rng)?;
                let shape = with_shapes.then(|| {
                    let tree = state.to_tree();
                    let code = String::from_utf8(unrooted_code(&tree)).expect("ascii code");
                    (code, tree.degree_profile().to_string())
                });
                Ok(GrowRun {
                    shape,
                    rows: traj.rows(),
                    parents: (r < cfg.save_parents).then(|| state.parent_array()),
                })
            },
        )
        .collect::<CliResult<_>>()?;

    let rows = runs.iter().enumerate().flat_map(|(r, run)| {
        run.rows
            .iter()
            .map(move |(n, stat, v)| vec![r.to_string(), n.to_string(), stat.clone(), real(*v)])
    });
    out.csv("trajectories.csv", &["replica", "n", "statistic", "value"], rows)?;

    if with_shapes {
        let mut hist: BTreeMap<(String, String), u64> = BTreeMap::new();
        for run in &runs {
            *hist.entry(run.shape.clone().expect("shape recorded")).or_default() += 1;
        }
        let total = cfg.replicas as f64;
        let rows = hist.into_iter().map(|((code, profile), count)| {
            let p = count as f64 / total;
            vec![code, profile, count.to_string(), real(p), real((p * (1.0 - p) / total).sqrt())]
        });
        out.csv("shapes.csv", &["shape", "degree_profile", "count", "fraction", "standard_error"], rows)?;
    }

    for (r, run) in runs.iter().enumerate() {
        if let Some(parents) = &run.parents {
            let mut bytes = Vec::new();
            write_parent_array(parents, &mut bytes)?;
            out.bytes(&format!("parents_{r}.patr"), &bytes)?;
        }
    }
    Ok(())
}

/// `P(2Z > t)` for `Z ~ GGa(2|T|-1, 2)` by direct quadrature of its density.
fn whole_seed_quadrature(tree_size: usize, t: f64) -> CliResult<f64> {
    let m = (2 * tree_size - 2) as f64;
    let ln_norm = std::f64::consts::LN_2 - ln_gamma(tree_size as f64 - 0.5);
    let r = integrate_to_infinity(|z| (ln_norm + m * z.ln() - z * z).exp(), t / 2.0, 1.0, QuadConfig::rel(1e-10))?;
    Ok(r.value)
}

pub fn tail(cfg: &TailConfig, out: &mut Outputs) -> CliResult<()> {
    if cfg.tree_size < 2 {
        return Err(config_error("tree_size must be at least 2"));
    }
    let d = cfg.d.unwrap_or(2 * (cfg.tree_size as u32 - 1));
    let mut rows = Vec::new();
    for t in cfg.grid()? {
        let q = TailQuery::new(cfg.tree_size, d, t).map_err(|e| config_error(e.to_string()))?;
        let exact = tail_subset(&q)?;
        let quadrature = match q.beta_parameters() {
            (_, 0) => whole_seed_quadrature(cfg.tree_size, t)?,
            (a, b) => tail_v_quadrature(a, b, t)?,
        };
        let asymptotic = tail_asymptotic_subset(&q)?;
        let method = match exact.method {
            TailMethod::ClosedForm => "closed_form",
            TailMethod::QuadratureFallback => "quadrature_fallback",
        };
        rows.push(vec![
            real(t),
            real(exact.value),
            real(quadrature),
            real(asymptotic),
            real(exact.value / asymptotic),
            method.to_string(),
        ]);
    }
    out.csv("tail.csv", &["t", "exact", "quadrature", "asymptotic", "ratio", "method"], rows)
}

pub fn moments(cfg: &MomentsConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    positive("replicas", cfg.replicas)?;
    let seed = ctx.resolver.resolve(&cfg.seed)?;
    let statistic = ctx.resolver.statistic(&cfg.statistic)?;
    let limit_samples = cfg.limit_samples.unwrap_or(cfg.replicas);
    let cmp = compare_to_limit_law(&seed, cfg.n, &statistic, cfg.replicas, limit_samples, ctx.master_seed)?;

    let rows = cmp.moments.iter().map(|m| {
        vec![real(m.r), real(m.empirical), real(m.standard_error), real(m.limit), real(m.empirical / m.limit - 1.0)]
    });
    out.csv("moments.csv", &["r", "empirical", "standard_error", "limit", "relative_error"], rows)?;
    if !cmp.tail.is_empty() {
        let rows = cmp.tail.iter().map(|t| vec![real(t.t), real(t.empirical), real(t.asymptotic)]);
        out.csv("max_degree_tail.csv", &["t", "empirical", "asymptotic"], rows)?;
    }
    let mut summary = vec![
        vec!["statistic".to_string(), statistic.to_string()],
        vec!["n".to_string(), cfg.n.to_string()],
        vec!["replicas".to_string(), cfg.replicas.to_string()],
        vec!["mean".to_string(), real(cmp.sample.mean())],
    ];
    if let Some(ks) = cmp.ks_distance {
        summary.push(vec!["limit_samples".to_string(), limit_samples.to_string()]);
        summary.push(vec!["ks_distance".to_string(), real(ks)]);
    }
    out.csv("summary.csv", &["quantity", "value"], summary)?;
    let rows = cmp.sample.values.iter().enumerate().map(|(r, v)| vec![r.to_string(), real(*v)]);
    out.csv("samples.csv", &["replica", "value"], rows)
}

pub fn umax(cfg: &UmaxConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    let pattern = ctx.resolver.resolve(&cfg.pattern)?;
    if !pattern.is_loop_free() {
        return Err(config_error("pattern must be a tree without loops"));
    }
    let mut rows = Vec::new();
    for spec in &cfg.hosts {
        let host = ctx.resolver.resolve(spec)?;
        let q = UMaxQuery::new(&pattern, &host);
        let dp = umax_dp(q);
        let brute = if cfg.bruteforce {
            let b = umax_bruteforce(q);
            if b != dp {
                return Err(CliError::Numeric(format!("dynamic program {dp} disagrees with exhaustive search {b} on {spec}")));
            }
            b.to_string()
        } else {
            String::new()
        };
        rows.push(vec![
            cfg.pattern.clone(),
            spec.clone(),
            host.vertex_count().to_string(),
            dp.to_string(),
            brute,
        ]);
    }
    out.csv("umax.csv", &["pattern", "host", "host_size", "umax", "umax_bruteforce"], rows)
}

pub fn umax_sweep(cfg: &UmaxSweepConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    positive("replicas", cfg.replicas)?;
    let pattern = ctx.resolver.resolve(&cfg.pattern)?;
    let seed = ctx.resolver.resolve(&cfg.seed)?.canonical_relabel();
    if cfg.checkpoints.is_empty() {
        return Err(config_error("umax-sweep needs at least one checkpoint"));
    }
    let runs = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(ctx.master_seed, family::GROWTH_FIRST, r as u64);
            umax_statistic_trajectory(&pattern, &seed, &cfg.checkpoints, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (r, traj) in runs.iter().enumerate() {
        for ((n, v), s) in traj.checkpoints.iter().zip(&traj.values).zip(traj.scaled()) {
            rows.push(vec![r.to_string(), n.to_string(), v.to_string(), s.map(real).unwrap_or_default()]);
        }
    }
    out.csv("umax_sweep.csv", &["replica", "n", "umax", "umax_scaled"], rows)?;

    let checkpoints = &runs[0].checkpoints;
    let mut summary = Vec::new();
    for (c, n) in checkpoints.iter().enumerate() {
        // a pattern without an embedding scores 0
        let values: Vec<f64> = runs.iter().map(|t| t.scaled()[c].unwrap_or(0.0)).collect();
        let embedded = runs.iter().filter(|t| t.values[c].value().is_some()).count();
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        summary.push(vec![
            n.to_string(),
            real(mean),
            real((var / k).sqrt()),
            real(embedded as f64 / k),
        ]);
    }
    out.csv("umax_sweep_summary.csv", &["n", "mean_scaled", "standard_error", "embedded_fraction"], summary)
}

fn ball_columns(code: &str, radius: u32) -> (String, String) {
    let c = RootedBallCode {
        code: code.as_bytes().to_vec(),
        radius: Some(radius),
    };
    (c.vertex_count().to_string(), c.root_degree().to_string())
}

fn grown_balls(seed: &Tree, n: usize, radius: u32, roots: usize, replicas: usize, master: u64, index: u64) -> CliResult<BallDistribution> {
    positive("roots", roots)?;
    positive("replicas", replicas)?;
    let mut rng = stream(master, family::ROOTS, index);
    Ok(empirical_ball_distribution(seed, n, radius, roots, replicas, &mut rng)?)
}

pub fn local_limit(cfg: &LocalLimitConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    positive("polya_samples", cfg.polya_samples)?;
    let seed = ctx.resolver.resolve(&cfg.seed)?;
    let empirical = grown_balls(&seed, cfg.n, cfg.radius, cfg.roots, cfg.replicas, ctx.master_seed, 0)?;
    let polya = polya_point_distribution(cfg.radius, cfg.polya_samples, &mut stream(ctx.master_seed, family::POLYA_POINT, 0))?;

    let mut codes: Vec<&str> = empirical.iter().map(|(c, _)| c).chain(polya.iter().map(|(c, _)| c)).collect();
    codes.sort_unstable();
    codes.dedup();
    let rows = codes.into_iter().map(|code| {
        let (vertices, degree) = ball_columns(code, cfg.radius);
        vec![code.to_string(), vertices, degree, real(empirical.mass(code)), real(polya.mass(code))]
    });
    out.csv("local_limit.csv", &["ball", "vertices", "root_degree", "empirical_mass", "polya_mass"], rows)?;
    let summary = vec![
        vec!["radius".to_string(), cfg.radius.to_string()],
        vec!["empirical_roots".to_string(), empirical.total().to_string()],
        vec!["polya_samples".to_string(), polya.total().to_string()],
        vec!["tv_distance".to_string(), real(tv_between(&empirical, &polya))],
    ];
    out.csv("summary.csv", &["quantity", "value"], summary)
}

pub fn ball_dist(cfg: &BallDistConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    if cfg.seeds.is_empty() {
        return Err(config_error("ball-dist needs at least one seed"));
    }
    let mut dists = Vec::new();
    for (i, spec) in cfg.seeds.iter().enumerate() {
        let seed = ctx.resolver.resolve(spec)?;
        dists.push(grown_balls(&seed, cfg.n, cfg.radius, cfg.roots, cfg.replicas, ctx.master_seed, i as u64)?);
    }
    let mut rows = Vec::new();
    for (spec, dist) in cfg.seeds.iter().zip(&dists) {
        for (code, count) in dist.iter() {
            let (vertices, degree) = ball_columns(code, cfg.radius);
            rows.push(vec![spec.clone(), code.to_string(), vertices, degree, count.to_string(), real(dist.mass(code))]);
        }
    }
    out.csv("ball_dist.csv", &["seed", "ball", "vertices", "root_degree", "count", "mass"], rows)?;
    let mut summary = Vec::new();
    for (i, a) in dists.iter().enumerate() {
        for (j, b) in dists.iter().enumerate().skip(i + 1) {
            summary.push(vec![cfg.seeds[i].clone(), cfg.seeds[j].clone(), real(tv_between(a, b))]);
        }
    }
    if !summary.is_empty() {
        out.csv("ball_tv.csv", &["first", "second", "tv_distance"], summary)?;
    }
    Ok(())
}

pub fn tv_lower_bound(cfg: &TvConfig, ctx: &Context, out: &mut Outputs) -> CliResult<()> {
    let seed_trees = cfg
        .seeds
        .iter()
        .map(|s| ctx.resolver.resolve(s))
        .collect::<paseed::Result<Vec<_>>>()?;
    let experiment = ExperimentConfig {
        seed_trees,
        n: cfg.n,
        replicas: cfg.replicas,
        statistic: ctx.resolver.statistic(&cfg.statistic)?,
        threshold_grid: cfg.thresholds.to_grid()?,
        master_seed: ctx.master_seed,
        bootstrap_rounds: cfg.bootstrap_rounds,
    };
    let res = estimate_tv_lower_bound(&experiment)?;

    let rows = res.table.iter().map(|row| {
        vec![real(row.t), real(row.survival_first), real(row.survival_second), real(row.difference())]
    });
    out.csv("tv_thresholds.csv", &["t", "survival_first", "survival_second", "difference"], rows)?;
    let ordering = match res.ordering {
        Ordering::FirstAbove => "first_above",
        Ordering::SecondAbove => "second_above",
    };
    let mut summary = vec![
        vec!["statistic".to_string(), experiment.statistic.to_string()],
        vec!["best_t".to_string(), real(res.best_t)],
        vec!["ordering".to_string(), ordering.to_string()],
        vec!["estimate".to_string(), real(res.estimate)],
        vec!["clamped".to_string(), real(res.clamped)],
        vec!["bootstrap_se".to_string(), real(res.bootstrap_se)],
        vec!["ci_low".to_string(), real(res.bootstrap_ci.0)],
        vec!["ci_high".to_string(), real(res.bootstrap_ci.1)],
        vec!["binned_tv".to_string(), real(res.binned_tv)],
    ];
    summary.extend(res.diagnostics.iter().map(|d| vec!["diagnostic".to_string(), d.clone()]));
    out.csv("tv_summary.csv", &["quantity", "value"], summary)?;
    let rows = [&res.first, &res.second].into_iter().enumerate().flat_map(|(s, sample)| {
        sample.values.iter().enumerate().map(move |(r, v)| vec![s.to_string(), r.to_string(), real(*v)])
    });
    out.csv("tv_samples.csv", &["seed_index", "replica", "value"], rows)
}
