//! Fixture suite behind `ordstat verify`. Each fixture becomes one check;
//! errors from the library count as failed checks rather than aborting.

use ordstat::bounds::{alpha_beta, rational_r};
use ordstat::maxcorr::{perturbation_check, renyi_functional, w_polynomial_exact};
use ordstat::optimize::{inverse_rho_squared, minimize_quartic_with, parse_rational};
use ordstat::{
    build_basis, conditional_expectation, default_quartic_params, hdg_discrete_bound,
    leading_coefficients, make_population, maximal_correlation, order_stat_joint,
    rational_p_reduction_bound, rho_order_stats, search_same_g, terrell_discrete_bound, tsm_bound,
    Population, QuarticKind, QuarticProblem, SearchOptions,
};

use crate::report::RunReport;

type Res<T> = Result<T, ordstat::Error>;

/// Runs `f`, turning a library error into a failed check named `name`.
fn guarded(report: &mut RunReport, name: &str, f: impl FnOnce(&mut RunReport) -> Res<()>) {
    if let Err(e) = f(report) {
        report.check(name, false, e.to_string(), "no error");
    }
}

pub fn run(conjecture: bool, restarts: usize, seed: u64) -> RunReport {
    let mut r = RunReport::new("verify");
    r.input("conjecture", conjecture).input("restarts", restarts).input("seed", seed);
    let search_opts = SearchOptions { restarts, seed, ..Default::default() };

    guarded(&mut r, "leading_ratio", |r| {
        let mut worst: f64 = 0.0;
        for n in 2..=40 {
            let (a, b) = leading_coefficients(n, 1)?;
            worst = worst.max((b / a + (n as f64 + 1.0) / 2.0).abs());
        }
        r.check_close("leading_ratio_k1", worst, 0.0, 1e-9);
        Ok(())
    });

    guarded(&mut r, "population_as_given", |r| {
        let pop = make_population(&[1.0, 2.0, 3.0], Some(&[0.25, 0.5, 0.25]))?;
        let err = pop.probs().iter().zip([0.25, 0.5, 0.25]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.check_close("population_weights_kept", err, 0.0, 1e-15);
        Ok(())
    });

    guarded(&mut r, "max_of_two", |r| {
        let mut worst_marg: f64 = 0.0;
        let mut worst_cond: f64 = 0.0;
        let mut worst_reg: f64 = 0.0;
        for n in 2..=12 {
            let nf = n as f64;
            let joint = order_stat_joint(&Population::uniform_grid(n)?, 1, 2, 2)?;
            let py = joint.marginal_y();
            for y in 1..=n {
                let yf = y as f64;
                worst_marg = worst_marg.max((py[y - 1] - (2.0 * yf - 1.0) / (nf * nf)).abs());
                for x in 1..=y {
                    let want = if x < y { 2.0 } else { 1.0 } / (2.0 * yf - 1.0);
                    worst_cond = worst_cond.max((joint.pmf[(x - 1, y - 1)] / py[y - 1] - want).abs());
                }
            }
            let ident: Vec<f64> = (1..=n).map(|x| x as f64).collect();
            let h = conditional_expectation(&joint, &ident)?;
            for (y, v) in h.points.iter().zip(&h.values) {
                worst_reg = worst_reg.max((v - y * y / (2.0 * y - 1.0)).abs());
            }
        }
        r.check_close("max_marginal_2y_minus_1", worst_marg, 0.0, 1e-14);
        r.check_close("conditional_of_min_given_max", worst_cond, 0.0, 1e-13);
        r.check_close("regression_y2_over_2y_minus_1", worst_reg, 0.0, 1e-12);
        Ok(())
    });

    guarded(&mut r, "bound_fixtures", |r| {
        r.check_close("bound_N2", terrell_discrete_bound(2)?, 1.0 / 3.0, 1e-14);
        r.check_close("bound_N3", terrell_discrete_bound(3)?, 8.0 / 19.0, 1e-14);
        r.check_close("bound_limit", terrell_discrete_bound(1_000_000)?, 0.5, 1e-11);
        r.check_close("tsm_1_2_2", tsm_bound(1, 2, 2)?, 0.5, 1e-15);
        r.check_close("rho_uniform_3", rho_order_stats(&Population::uniform_grid(3)?, 1, 2, 2)?, 8.0 / 19.0, 1e-12);
        let mut worst: f64 = 0.0;
        for (a, b) in [(0.0, 1.0), (-3.0, 7.5), (2.0, 2.1), (1e3, -4.0)] {
            let pop = make_population(&[a, b], None)?;
            worst = worst.max((rho_order_stats(&pop, 1, 2, 2)? - 1.0 / 3.0).abs());
        }
        r.check_close("two_point_one_third", worst, 0.0, 1e-12);
        Ok(())
    });

    guarded(&mut r, "recurrences", |r| {
        let mut worst: f64 = 0.0;
        for x in [1.0, 1.5, 4.0, 100.0, 1e6] {
            worst = worst.max((rational_r(1, x)? - (2.0 + 1.0 / x) / 3.0).abs());
        }
        r.check_close("r1_closed_form", worst, 0.0, 1e-15);
        r.check_close("r1_at_1", rational_r(1, 1.0)?, 1.0, 0.0);
        let mut worst: f64 = 0.0;
        for n in 2..=60 {
            let nf = n as f64;
            worst = worst.max((alpha_beta(n)?.alpha(1) - (2.0 + 1.0 / (nf * nf)) / 3.0).abs());
        }
        r.check_close("alpha1", worst, 0.0, 1e-14);
        let ab = alpha_beta(3)?;
        r.check_close("alpha1_beta1_N3", ab.alpha(1) * ab.beta(1), 4.0 / 27.0, 1e-14);
        Ok(())
    });

    guarded(&mut r, "hdg", |r| {
        let (_, attained) = hdg_discrete_bound(&Population::lattice(1.5, 2.0, 7)?)?;
        r.check("hdg_lattice_attained", attained, attained, true);
        let (mu, sigma) = (0.7, 1.9);
        let (b, _) = hdg_discrete_bound(&Population::lattice(mu, sigma, 500)?)?;
        r.check_close("hdg_limit", b, mu + sigma / 3f64.sqrt(), 1e-5);
        Ok(())
    });

    guarded(&mut r, "maxcorr_three", |r| {
        let joint = order_stat_joint(&Population::uniform_grid(3)?, 1, 2, 2)?;
        let res = maximal_correlation(&joint)?;
        let s19 = 19f64.sqrt();
        let want = (2.0 + s19) / 15.0;
        r.check_close("maxcorr_N3", res.r, want, 1e-9);
        let x_star = [-(0.4 + 1.3 / s19).sqrt(), (1.0 - 2.0 / s19).sqrt(), (4.0 - 0.5 / s19).sqrt()];
        let sign = res.f_opt.values[2].signum();
        let err = (0..3).map(|k| (sign * res.f_opt.values[k] - x_star[k]).abs()).fold(0.0, f64::max);
        r.check_close("maxcorr_N3_extremizer", err, 0.0, 1e-8);
        r.check_close("renyi_at_extremizer", renyi_functional(&joint, &res.f_opt.values)?, want * want, 1e-9);
        Ok(())
    });

    guarded(&mut r, "perturbation", |r| {
        for n in [3, 10] {
            let p = perturbation_check(n)?;
            r.check(&format!("perturbation_N{n}"), p.passes, p.rho0, format!("> {}", p.rho_n));
        }
        let w0 = w_polynomial_exact(0);
        r.check("w_constant_term", w0 == 7_010_100.into(), w0.to_string(), "7010100");
        Ok(())
    });

    guarded(&mut r, "quartic", |r| {
        // lambda at N=4 is (2 + 1/16)/3 = 11/16.
        let lambda0 = default_quartic_params(4)?.lambda;
        r.check_close("lambda_N4", lambda0, 11.0 / 16.0, 1e-15);
        let mut worst: f64 = 0.0;
        for n in 2..=30 {
            worst = worst.max((default_quartic_params(n)?.lambda - alpha_beta(n)?.alpha(1)).abs());
        }
        r.check_close("lambda_is_alpha1", worst, 0.0, 1e-14);

        let interior = QuarticProblem::new(lambda0, vec![4.0 / 3.0, 2.0 / 3.0])?;
        let s6 = 6f64.sqrt();
        let x = [(66.0 * s6 - 81.0).sqrt() / 16.0, (3.0 * s6 - 5.0) / 16.0];
        let gn = interior.gradient(&x)?.iter().map(|v| v * v).sum::<f64>().sqrt();
        r.check_close("quartic_closed_form_stationary", gn, 0.0, 1e-12);
        let v = ordstat::quartic_value(&interior, &x)?;
        r.check("quartic_closed_form_value", v > 0.0 && v < lambda0 * lambda0, v, format!("in (0, {})", lambda0 * lambda0));

        let unbounded = QuarticProblem::new(lambda0, vec![1.0, 2.0])?;
        let along: Vec<f64> = (1..=6)
            .map(|e| ordstat::quartic_value(&unbounded, &[10f64.powi(e), 10f64.powi(e)]))
            .collect::<Res<_>>()?;
        let falling = along.windows(2).all(|w| w[1] < w[0]) && along[5] < -1e18;
        r.check("quartic_ray_to_minus_infinity", falling, along[5], "-> -inf");

        let cases = [
            ("quartic_1_1", vec![1.0, 1.0], QuarticKind::MinAtZero),
            ("quartic_4/3_2/3", vec![4.0 / 3.0, 2.0 / 3.0], QuarticKind::InteriorMinPositive),
            ("quartic_1_8/5", vec![1.0, 1.6], QuarticKind::MinNegative),
            ("quartic_1_2", vec![1.0, 2.0], QuarticKind::UnboundedBelow),
        ];
        for (name, g, kind) in cases {
            let out = minimize_quartic_with(&QuarticProblem::new(lambda0, g)?, restarts, seed);
            r.check(name, out.kind == kind, out.kind.as_str(), kind.as_str());
        }
        let out = minimize_quartic_with(&interior, restarts, seed);
        let err = out
            .minimizers
            .iter()
            .map(|m| (m[0].abs() - x[0]).abs().max((m[1] - x[1]).abs()))
            .fold(if out.minimizers.len() == 2 { 0.0 } else { f64::INFINITY }, f64::max);
        r.check_close("quartic_interior_minimizers", err, 0.0, 1e-6);
        let bad: Vec<usize> = (2..=12)
            .filter(|&n| {
                default_quartic_params(n)
                    .map(|p| minimize_quartic_with(&p, restarts, seed).kind != QuarticKind::MinAtZero)
                    .unwrap_or(true)
            })
            .collect();
        r.check("quartic_default_params_min_at_zero", bad.is_empty(), &bad, "no N in 2..=12");
        let mut worst: f64 = 0.0;
        for n in 3..=12 {
            let mut d = vec![0.0; n - 1];
            d[0] = 1.0;
            let nf = n as f64;
            let inv = inverse_rho_squared(n, &d)?;
            let b = (nf * nf - 1.0) / (2.0 * nf * nf + 1.0);
            worst = worst.max((inv * b * b - 1.0).abs());
        }
        r.check_close("quartic_ratio_at_axis", worst, 0.0, 1e-12);
        Ok(())
    });

    guarded(&mut r, "same_transform", |r| {
        for n in 3..=6 {
            let nf = n as f64;
            let want = (1.0 - nf.powi(-2)) / (2.0 + nf.powi(-2));
            for monotone in [false, true] {
                let opts = SearchOptions { monotone, ..search_opts };
                let s = search_same_g(&Population::uniform_grid(n)?, 1, 2, 2, &opts)?;
                let tag = if monotone { "monotone" } else { "free" };
                r.check_close(&format!("search_1_2_2_N{n}_{tag}"), s.value, want, 1e-8);
            }
        }
        for n in 3..=8 {
            let nf = n as f64;
            let want = (3.0 - 7.0 / (nf * nf)) / (9.0 - 1.0 / (nf * nf));
            let pop = Population::uniform_grid(n)?;
            r.check_close(&format!("rho_1_3_3_N{n}"), rho_order_stats(&pop, 1, 3, 3)?, want, 1e-12);
            if conjecture {
                let s = search_same_g(&pop, 1, 3, 3, &search_opts)?;
                r.check_close(&format!("search_1_3_3_N{n}"), s.value, want, 1e-6);
            }
        }
        Ok(())
    });

    guarded(&mut r, "weighted", |r| {
        let pop = Population::weighted_grid(&[0.25, 0.5, 0.25])?;
        r.check_close("rho_weighted_9/23", rho_order_stats(&pop, 1, 2, 2)?, 9.0 / 23.0, 1e-12);
        r.check_close("search_weighted_9/23", search_same_g(&pop, 1, 2, 2, &search_opts)?.value, 9.0 / 23.0, 1e-6);
        let pop = Population::weighted_grid(&[1.0 / 16.0, 6.0 / 16.0, 9.0 / 16.0])?;
        let want = 169.0 * 3f64.sqrt() / 655027f64.sqrt();
        r.check_close("rho_weighted_second", rho_order_stats(&pop, 1, 2, 2)?, want, 1e-9);
        for monotone in [false, true] {
            let s = search_same_g(&pop, 1, 2, 2, &SearchOptions { monotone, ..search_opts })?;
            let tag = if monotone { "monotone" } else { "free" };
            r.check(&format!("search_weighted_second_{tag}"), s.value >= 0.362354 - 1e-4, s.value, ">= 0.362254");
        }
        let q = |v: &[&str]| v.iter().map(|s| parse_rational(s)).collect::<Res<Vec<_>>>();
        let b = rational_p_reduction_bound(&q(&["1/4", "1/2", "1/4"])?)?;
        r.check("rational_bound_5/11", b.bound.to_string() == "5/11", b.bound.to_string(), "5/11");
        let b = rational_p_reduction_bound(&q(&["1/16", "3/8", "9/16"])?)?;
        r.check("rational_bound_85/171", b.bound.to_string() == "85/171", b.bound.to_string(), "85/171");
        Ok(())
    });

    guarded(&mut r, "basis", |r| {
        let err = build_basis(200)?.orthonormality_error();
        r.check_close("orthonormality_N200", err, 0.0, 1e-10);
        Ok(())
    });

    let failed = r.checks.iter().filter(|c| !c.pass).count();
    r.output("checks_run", r.checks.len());
    r.output("checks_failed", failed);
    r
}
