//! Named presets and custom sweeps. Each returns its tables; writing is done by the caller.

use rand::RngCore;
use rayon::prelude::*;
use serde_json::json;

use super::table::CsvTable;
use super::{apply_param, ExperimentSpec, Preset};
use crate::distributions::{
    cdf_y_ppp, derive, f_x_bpp, f_x_ppp, linear_grid, CurveKind, NetworkConfig,
};
use crate::error::Result;
use crate::geometry::p_x_ratio;
use crate::montecarlo::{
    chunk_rng, empirical_curve, estimate_hit_or_miss_p_x, ks_distance, simulate_outcomes,
    simulate_outcomes_with_copilots, OutcomeSummary, PointModel, DEFAULT_CONFIDENCE,
};
use crate::tin::{p_tin_analytic, Method};

/// Tables keyed by file name, plus preset-specific manifest entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<(String, CsvTable)>,
    pub extra: serde_json::Value,
}

/// `fig4` user counts crossed with the `r` sweep.
pub const FIG4_USER_COUNTS: [usize; 2] = [100, 400];

/// `(kappa, mu)` curves of the r sweep.
pub const FIG5A_CURVES: [(f64, f64); 4] = [(1.0, 1.0), (10.0, 1.0), (1.0, 2.0), (10.0, 2.0)];

/// `(L, alpha)` curves of the K sweep.
pub const FIG5B_CURVES: [(usize, f64); 4] = [(1000, 3.76), (2000, 3.76), (1000, 3.0), (2000, 3.0)];

/// Independent run seeds for `n` tasks, drawn from a stream no trial chunk uses.
fn task_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = chunk_rng(seed, u64::MAX);
    (0..n).map(|_| rng.next_u64()).collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn base_table(spec: &ExperimentSpec, names: &[&str]) -> CsvTable {
    let c = &spec.base_config;
    let float = |v: f64| format!("{v:?}");
    CsvTable::new(header(names))
        .with_meta("preset", spec.preset.name())
        .with_meta("seed", spec.seed)
        .with_meta("trials", spec.n_trials)
        .with_meta("R", float(c.radius))
        .with_meta("L", c.num_aps)
        .with_meta("K", c.num_ues)
        .with_meta("tau_p", c.num_pilots)
        .with_meta("alpha", float(c.pathloss_exponent))
        .with_meta("rho", float(c.tx_power))
        .with_meta("sigma2", float(c.noise_power))
        .with_meta("kappa", float(c.kappa))
        .with_meta("mu", float(c.mu))
        .with_meta("r", float(c.influence_radius))
}

fn radius_configs(spec: &ExperimentSpec) -> Result<Vec<NetworkConfig>> {
    spec.sweep_values
        .iter()
        .map(|&r| apply_param(&spec.base_config, "r", r))
        .collect()
}

/// `p_X` analytic vs hit-or-miss, and `f_X` (binomial, Poisson, histogram) for each `r`.
pub fn run_preset_fig3(spec: &ExperimentSpec) -> Result<RunOutput> {
    let configs = radius_configs(spec)?;
    let n_points = spec.grid_points;
    let seeds = task_seeds(spec.seed, configs.len() * (n_points + 1));

    let mut fig3a = base_table(spec, &["x", "r", "p_x_analytic", "p_x_hit_or_miss"])
        .with_meta("hit_or_miss_samples", spec.n_trials);
    let tasks: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|i| (0..n_points).map(move |j| (i, j)))
        .collect();
    let rows: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let c = &configs[i];
            let (r, big_r) = (c.influence_radius, c.radius);
            let x = linear_grid(0.0, big_r + r, n_points)[j];
            let analytic = p_x_ratio(x, r, big_r)?;
            let sim = estimate_hit_or_miss_p_x(
                x,
                r,
                big_r,
                spec.n_trials,
                seeds[i * (n_points + 1) + j],
            )?;
            Ok(vec![x, r, analytic, sim])
        })
        .collect::<Result<_>>()?;
    let mut max_gap = vec![0.0f64; configs.len()];
    for (&(i, _), row) in tasks.iter().zip(&rows) {
        max_gap[i] = max_gap[i].max((row[2] - row[3]).abs());
    }
    for row in rows {
        fig3a.push_row(row)?;
    }

    let k_prime = spec.base_config.nominal_copilots();
    let mut fig3b = base_table(spec, &["x", "r", "f_x_bpp", "f_x_ppp", "f_x_histogram"])
        .with_meta("k_prime", k_prime);
    let blocks: Vec<Vec<Vec<f64>>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let d = derive(c)?;
            let x_max = 5.0 / (2.0 * std::f64::consts::PI * d.lambda_0).sqrt();
            let edges = linear_grid(0.0, x_max.min(c.radius + c.influence_radius), n_points + 1);
            let outcomes = simulate_outcomes_with_copilots(
                c,
                k_prime,
                spec.n_trials,
                seeds[i * (n_points + 1) + n_points],
            )?;
            let samples: Vec<f64> = outcomes.iter().filter_map(|o| o.x_min).collect();
            let hist = empirical_curve(&samples, CurveKind::Pdf, &edges)?;
            hist.abscissa()
                .iter()
                .zip(hist.values())
                .map(|(&x, &h)| {
                    Ok(vec![
                        x,
                        c.influence_radius,
                        f_x_bpp(x, k_prime, c)?,
                        f_x_ppp(x, d.lambda_0)?,
                        h,
                    ])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    for row in blocks.into_iter().flatten() {
        fig3b.push_row(row)?;
    }

    let gaps: Vec<_> = configs
        .iter()
        .zip(&max_gap)
        .map(|(c, g)| json!({"r": c.influence_radius, "max_abs_gap_p_x": g}))
        .collect();
    Ok(RunOutput {
        tables: vec![("fig3a.csv".into(), fig3a), ("fig3b.csv".into(), fig3b)],
        extra: json!({"k_prime": k_prime, "hit_or_miss": gaps, "user_count": spec.base_config.num_ues}),
    })
}

/// Binomial-model ECDF of `Y` against the thinned-Poisson CDF over `r` x `K`.
pub fn run_preset_fig4(spec: &ExperimentSpec) -> Result<RunOutput> {
    let mut pairs = Vec::new();
    for c in radius_configs(spec)? {
        for k in FIG4_USER_COUNTS {
            pairs.push(NetworkConfig { num_ues: k, ..c });
        }
    }
    let seeds = task_seeds(spec.seed, pairs.len());
    let grid = linear_grid(0.0, spec.base_config.radius, spec.grid_points);

    let results: Vec<(Vec<Vec<f64>>, serde_json::Value)> = pairs
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(c, &seed)| {
            let d = derive(c)?;
            let outcomes = simulate_outcomes(c, PointModel::Bpp, spec.n_trials, seed)?;
            let summary = OutcomeSummary::from_outcomes(&outcomes);
            let samples: Vec<f64> = outcomes.iter().filter_map(|o| o.y_min).collect();
            let cdf = |y: f64| cdf_y_ppp(y, c, &d);
            let (ecdf, ks) = if samples.is_empty() {
                (vec![f64::NAN; grid.len()], None)
            } else {
                let table = empirical_curve(&samples, CurveKind::Cdf, &grid)?;
                (table.values().to_vec(), Some(ks_distance(&samples, cdf)?))
            };
            let rows = grid
                .iter()
                .zip(ecdf)
                .map(|(&y, e)| vec![y, c.influence_radius, c.num_ues as f64, e, cdf(y)])
                .collect();
            let stats = json!({
                "r": c.influence_radius,
                "K": c.num_ues,
                "ks": ks,
                "y_samples": samples.len(),
                "no_copilot": summary.no_copilot_count,
                "no_interferer": summary.no_interferer_count,
            });
            Ok((rows, stats))
        })
        .collect::<Result<_>>()?;

    let mut table = base_table(spec, &["y", "r", "K", "ecdf_bpp", "cdf_ppp"]);
    let mut stats = Vec::new();
    for (rows, s) in results {
        for row in rows {
            table.push_row(row)?;
        }
        stats.push(s);
    }
    Ok(RunOutput {
        tables: vec![("fig4.csv".into(), table)],
        extra: json!({"user_counts": FIG4_USER_COUNTS, "ks": stats}),
    })
}

struct SweepTask {
    coords: Vec<f64>,
    config: NetworkConfig,
}

fn sweep_table(
    spec: &ExperimentSpec,
    coord_names: &[&str],
    tasks: Vec<SweepTask>,
    file: &str,
) -> Result<RunOutput> {
    let models = spec.model.models();
    let mut names: Vec<String> = coord_names.iter().map(|s| s.to_string()).collect();
    names.extend(header(&[
        "p_tin_quadrature",
        "p_tin_closed_form",
        "p_xy_closed_form",
        "p_serving",
    ]));
    for m in &models {
        for col in ["mean", "half_width", "censored"] {
            names.push(format!("mc_{}_{col}", m.name()));
        }
    }
    let seeds = task_seeds(spec.seed, tasks.len() * models.len());
    let rows: Vec<Vec<f64>> = tasks
        .par_iter()
        .enumerate()
        .map(|(i, task)| {
            let quad = p_tin_analytic(&task.config, Method::Quadrature)?;
            let closed = p_tin_analytic(&task.config, Method::ClosedForm)?;
            let mut row = task.coords.clone();
            row.extend([quad.p_tin, closed.p_tin, closed.p_xy, closed.p_serving]);
            for (j, &model) in models.iter().enumerate() {
                let outcomes = simulate_outcomes(
                    &task.config,
                    model,
                    spec.n_trials,
                    seeds[i * models.len() + j],
                )?;
                let summary = OutcomeSummary::from_outcomes(&outcomes);
                let est = summary.p_tin(DEFAULT_CONFIDENCE)?;
                row.extend([est.mean, est.half_width, summary.censored_count() as f64]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable {
        header: names,
        ..base_table(spec, &[])
    }
    .with_meta("sweep", &spec.sweep_variable)
    .with_meta("confidence", DEFAULT_CONFIDENCE);
    for row in rows {
        table.push_row(row)?;
    }
    Ok(RunOutput {
        tables: vec![(file.to_string(), table)],
        extra: json!({"models": models.iter().map(PointModel::name).collect::<Vec<_>>()}),
    })
}

/// `p_tin` sweeps: over `r` for several `(kappa, mu)`, or over `K` for several `(L, alpha)`.
pub fn run_preset_fig5(spec: &ExperimentSpec) -> Result<RunOutput> {
    let var = spec.sweep_variable.as_str();
    let mut tasks = Vec::new();
    let (coord_names, file, curves_meta) = if spec.preset == Preset::Fig5b {
        for (l, alpha) in FIG5B_CURVES {
            for &v in &spec.sweep_values {
                let c = NetworkConfig {
                    num_aps: l,
                    pathloss_exponent: alpha,
                    ..apply_param(&spec.base_config, var, v)?
                };
                tasks.push(SweepTask {
                    coords: vec![v, l as f64, alpha],
                    config: c,
                });
            }
        }
        (
            [var, "L", "alpha"],
            "fig5b.csv",
            json!({"L_alpha": FIG5B_CURVES}),
        )
    } else {
        for (kappa, mu) in FIG5A_CURVES {
            for &v in &spec.sweep_values {
                let c = NetworkConfig {
                    kappa,
                    mu,
                    ..apply_param(&spec.base_config, var, v)?
                };
                tasks.push(SweepTask {
                    coords: vec![v, kappa, mu],
                    config: c,
                });
            }
        }
        (
            [var, "kappa", "mu"],
            "fig5a.csv",
            json!({"kappa_mu": FIG5A_CURVES}),
        )
    };
    for t in &tasks {
        t.config.validate()?;
    }
    let mut out = sweep_table(spec, &coord_names, tasks, file)?;
    out.extra["curves"] = curves_meta;
    Ok(out)
}

/// Analytic and simulated `p_tin` over a user-chosen sweep (or the base point alone).
pub fn run_preset_custom(spec: &ExperimentSpec) -> Result<RunOutput> {
    let var = spec.sweep_variable.as_str();
    let tasks = spec
        .sweep_values
        .iter()
        .map(|&v| {
            Ok(SweepTask {
                coords: vec![v],
                config: apply_param(&spec.base_config, var, v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let coord = if var == "none" { "point" } else { var };
    sweep_table(spec, &[coord], tasks, "custom.csv")
}
