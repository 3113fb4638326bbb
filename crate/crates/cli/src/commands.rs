use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use ordstat::bounds::terrell_discrete_bound_exact;
use ordstat::optimize::{minimize_quartic_with, parse_rational};
use ordstat::populations::{order_stat_joint_with, rho_order_stats_with, DEFAULT_ENUM_BUDGET};
use ordstat::{
    default_quartic_params, maximal_correlation, order_stat_joint, rational_p_reduction_bound,
    search_same_g, terrell_discrete_bound, tsm_bound, JointOptions, Population, QuarticProblem,
    SearchOptions,
};

use crate::report::{fmt12, RunReport};
use crate::{CliError, PairArgs, PopArgs};

pub const BUDGET_ENV: &str = "ORDSTAT_ENUM_BUDGET";

pub fn joint_options() -> Result<JointOptions, CliError> {
    let budget = match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{BUDGET_ENV} must be a nonnegative integer, got {s:?}")))?,
        Err(_) => DEFAULT_ENUM_BUDGET,
    };
    Ok(JointOptions { budget, ..Default::default() })
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            let r = parse_rational(t).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(*r.numer() as f64 / *r.denom() as f64)
        })
        .collect()
}

fn load_population(args: &PopArgs, report: &mut RunReport) -> Result<Population, CliError> {
    let given = [args.big_n.is_some(), args.pop.is_some(), args.p.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(CliError::Usage("give exactly one of --N, --pop, --p".into()));
    }
    if let Some(n) = args.big_n {
        report.input("N", n);
        return Ok(Population::uniform_grid(n)?);
    }
    if let Some(path) = &args.pop {
        report.input("pop", path.display().to_string());
        return Ok(Population::load(path)?);
    }
    let p = args.p.as_deref().expect("checked above");
    report.input("p", p);
    Ok(Population::weighted_grid(&parse_list(p)?)?)
}

fn pair_inputs(report: &mut RunReport, pair: PairArgs) {
    report.input("i", pair.i).input("j", pair.j).input("n", pair.n);
}

pub fn bound(
    big_n: Option<usize>,
    i: Option<usize>,
    j: Option<usize>,
    n: Option<usize>,
    p: Option<&str>,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("bound");
    let pair = match (i, j, n) {
        (None, None, None) => None,
        (Some(i), Some(j), Some(n)) => Some((i, j, n)),
        _ => return Err(CliError::Usage("--i, --j and --n go together".into())),
    };
    if big_n.is_none() && pair.is_none() && p.is_none() {
        return Err(CliError::Usage("give --N, --i/--j/--n, or --p".into()));
    }
    if let Some(n) = big_n {
        report.input("N", n);
        report.output("rho_bound", terrell_discrete_bound(n)?);
        report.output("rho_bound_exact", terrell_discrete_bound_exact(n)?.to_string());
    }
    if let Some((i, j, n)) = pair {
        report.input("i", i).input("j", j).input("n", n);
        report.output("tsm_bound", tsm_bound(i, j, n)?);
    }
    if let Some(p) = p {
        report.input("p", p);
        let q = p
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let b = rational_p_reduction_bound(&q)?;
        report.output("rational_denominator", b.m);
        report.output("rational_bound", b.value());
        report.output("rational_bound_exact", b.bound.to_string());
    }
    Ok(report)
}

pub fn rho(pop: &PopArgs, pair: PairArgs, opts: &JointOptions) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("rho");
    let population = load_population(pop, &mut report)?;
    pair_inputs(&mut report, pair);
    let rho = rho_order_stats_with(&population, pair.i, pair.j, pair.n, opts)?;
    report.output("rho", rho);
    report.output("lattice", population.is_lattice());
    if let (Some(size), true) = (population.raw_size(), (pair.i, pair.j, pair.n) == (1, 2, 2)) {
        let bound = terrell_discrete_bound(size)?;
        report.output("rho_bound", bound);
        report.check("rho_le_bound", rho <= bound + 1e-12, rho, bound);
    }
    Ok(report)
}

pub fn maxcorr(pop: &PopArgs, pair: PairArgs, opts: &JointOptions) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("maxcorr");
    let population = load_population(pop, &mut report)?;
    pair_inputs(&mut report, pair);
    let joint = order_stat_joint_with(&population, pair.i, pair.j, pair.n, opts)?;
    let res = maximal_correlation(&joint)?;
    let rho = joint.moments().correlation()?;
    report.output("R", res.r);
    report.output("rho", rho);
    report.output("f_opt", json!({ "points": res.f_opt.points, "values": res.f_opt.values }));
    report.output("g_opt", json!({ "points": res.g_opt.points, "values": res.g_opt.values }));
    report.output("singular_values", &res.singular_values);
    report.output("non_unique", res.non_unique);
    report.check("maxcorr_ge_abs_rho", res.r + 1e-12 >= rho.abs(), res.r, rho.abs());
    Ok(report)
}

pub fn search(
    pop: &PopArgs,
    pair: PairArgs,
    monotone: bool,
    restarts: usize,
    seed: u64,
    opts: &JointOptions,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("search");
    let population = load_population(pop, &mut report)?;
    pair_inputs(&mut report, pair);
    report.input("monotone", monotone).input("restarts", restarts).input("seed", seed);
    let search_opts = SearchOptions { monotone, restarts, seed, joint: *opts };
    let res = search_same_g(&population, pair.i, pair.j, pair.n, &search_opts)?;
    report.output("value", res.value);
    report.output("identity_value", res.identity_value);
    report.output("support", &res.support);
    report.output("g_star", &res.g_star);
    report.output("starts", res.restarts);
    report.output("converged", res.converged);
    report.output("monotone_constraint", res.monotone_constraint);
    report.check("value_ge_identity", res.value >= res.identity_value - 1e-12, res.value, res.identity_value);
    Ok(report)
}

pub fn quartic(
    lambda: Option<f64>,
    gamma: Option<&str>,
    from_n: Option<usize>,
    restarts: usize,
    seed: u64,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("quartic");
    let problem = match (lambda, gamma, from_n) {
        (Some(l), Some(g), None) => QuarticProblem::new(l, parse_list(g)?)?,
        (None, None, Some(n)) => {
            report.input("from_N", n);
            default_quartic_params(n)?
        }
        _ => return Err(CliError::Usage("give --lambda with --gamma, or --from-N".into())),
    };
    report.input("lambda", problem.lambda).input("gamma", &problem.gamma);
    report.input("restarts", restarts).input("seed", seed);
    let out = minimize_quartic_with(&problem, restarts, seed);
    report.output("kind", out.kind.as_str());
    report.output("minimizers", &out.minimizers);
    report.output("min_value", out.min_value);
    report.output("ray", &out.ray);
    report.output("deficit", out.deficit);
    report.output("starts", out.restarts);
    report.output("converged", out.converged);
    let worst = out
        .minimizers
        .iter()
        .map(|m| problem.gradient(m).map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    report.check("minimizers_stationary", worst < 1e-8, worst, "< 1e-8");
    Ok(report)
}

struct SweepRow {
    n: usize,
    rho: f64,
    bound: f64,
    maxcorr: f64,
}

pub fn sweep(from_n: usize, to_n: usize, csv: Option<&Path>) -> Result<RunReport, CliError> {
    if from_n < 2 || to_n < from_n {
        return Err(CliError::Usage(format!("need 2 <= from-N <= to-N, got {from_n}..{to_n}")));
    }
    let mut report = RunReport::new("sweep");
    report.input("from_N", from_n).input("to_N", to_n);
    let rows = (from_n..=to_n)
        .into_par_iter()
        .map(|n| -> Result<SweepRow, ordstat::Error> {
            let joint = order_stat_joint(&Population::uniform_grid(n)?, 1, 2, 2)?;
            Ok(SweepRow {
                n,
                rho: joint.moments().correlation()?,
                bound: terrell_discrete_bound(n)?,
                maxcorr: maximal_correlation(&joint)?.r,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let worst_gap = rows.iter().map(|r| (r.rho - r.bound).abs()).fold(0.0, f64::max);
    report.check_close("rho_attains_bound", worst_gap, 0.0, 1e-10);
    let strict: Vec<&SweepRow> = rows.iter().filter(|r| r.n >= 3).collect();
    let min_margin = strict.iter().map(|r| r.maxcorr - r.rho).fold(f64::INFINITY, f64::min);
    let max_r = strict.iter().map(|r| r.maxcorr).fold(f64::NEG_INFINITY, f64::max);
    if !strict.is_empty() {
        report.check("rho_below_maxcorr", min_margin > 0.0, min_margin, "> 0");
        report.check("maxcorr_below_half", max_r < 0.5, max_r, "< 0.5");
    }
    report.output(
        "rows",
        rows.iter()
            .map(|r| {
                json!({
                    "N": r.n, "rho_lattice": r.rho, "bound": r.bound,
                    "maxcorr": r.maxcorr, "margin": r.maxcorr - r.rho,
                })
            })
            .collect::<Vec<_>>(),
    );
    if let Some(path) = csv {
        let mut text = String::from("N,rho_lattice,bound,maxcorr,margin\n");
        for r in &rows {
            text += &format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt12(r.rho),
                fmt12(r.bound),
                fmt12(r.maxcorr),
                fmt12(r.maxcorr - r.rho)
            );
        }
        std::fs::write(path, text).map_err(ordstat::Error::from)?;
        report.input("csv", path.display().to_string());
    }
    Ok(report)
}
