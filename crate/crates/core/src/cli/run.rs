//! Experiment orchestration: one function per experiment kind, each writing
//! its CSVs and returning results and verdicts for the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Kind};
use super::output::{line_plot, Line, OutputDir, ResultManifest, Verdict, MANIFEST_FILE, TIMINGS_FILE};
use crate::correlate::{
    direct_series, exact_series, lf_bound_check, rate_fit, spectral_series, CorrelationSeries, Estimator,
    SpectralParams, DEFAULT_EXACT_BUDGET,
};
use crate::error::{Error, Result};
use crate::gibbs::{gibbs_ball_fit, spectral_gap_fit};
use crate::numerics::derive_seed;
use crate::observables::{GlobalObservable, LocalObservable};
use crate::skewprod::{collapsed_access_coverage, non_arithmeticity_probe, AccessParams};
use crate::symbolic::RealTable;
use crate::systems::System;
use crate::twisted::{
    calibrate_c0, cancellation_pair_check, find_us_cycle, sample_nice, spectral_curve, standard_probes,
    worst_decay_profile, CurveParams, CycleParams, TwistedOperator,
};

/// Results of one experiment before they are written to the manifest.
struct Outcome {
    results: Value,
    verdicts: Vec<Verdict>,
    warnings: Vec<String>,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    system: System,
    out: OutputDir,
    seeds: BTreeMap<String, u64>,
    timings: Vec<(String, f64)>,
    plots: bool,
}

impl Context<'_> {
    fn seed(&mut self, label: &str, stream: u64) -> u64 {
        let s = derive_seed(self.config.experiment.seed, stream);
        self.seeds.insert(label.to_string(), s);
        s
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let r = f(self);
        self.timings.push((stage.to_string(), start.elapsed().as_secs_f64()));
        r
    }

    fn plot(&mut self, name: &str, title: &str, x: &str, y: &str, lines: &[Line], log_y: bool) -> Result<()> {
        if self.plots {
            self.out.write(name, &line_plot(title, x, y, lines, log_y))?;
        }
        Ok(())
    }

    fn phi(&self) -> Result<GlobalObservable> {
        self.config.build_phi(&self.system.sft)
    }

    fn psi(&self) -> Result<LocalObservable> {
        self.config.build_psi(&self.system.sft)
    }
}

/// Runs the configured experiment into its output directory and writes the
/// manifest. The manifest is returned whether or not its verdicts pass.
pub fn run(config: &ExperimentConfig) -> Result<ResultManifest> {
    let start = Instant::now();
    let system = config.build_system()?;
    let out = OutputDir::create(Path::new(&config.output.dir))?;
    let mut ctx =
        Context { config, system, out, seeds: BTreeMap::new(), timings: Vec::new(), plots: config.output.plots };
    ctx.seeds.insert("experiment".into(), config.experiment.seed);
    let kind = config.experiment.kind;
    let outcome = match kind {
        Kind::Gibbs => ctx.timed("gibbs", run_gibbs)?,
        Kind::Spectrum => ctx.timed("spectrum", run_spectrum)?,
        Kind::Correlate => ctx.timed("correlate", run_correlate)?,
        Kind::Cancel => ctx.timed("cancel", run_cancel)?,
        Kind::Access => ctx.timed("access", run_access)?,
        Kind::Rates => ctx.timed("rates", run_rates)?,
    };
    let manifest = ResultManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.name().to_string(),
        config: serde_json::to_value(config)?,
        seeds: ctx.seeds.clone(),
        outputs: ctx.out.listing(),
        results: outcome.results,
        warnings: outcome.warnings,
        verdicts: outcome.verdicts,
    };
    ctx.out.write_json(MANIFEST_FILE, &manifest)?;
    ctx.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    let timings: BTreeMap<String, f64> = ctx.timings.into_iter().collect();
    ctx.out.write_json(TIMINGS_FILE, &timings)?;
    Ok(manifest)
}

fn table_json(t: &RealTable) -> Value {
    let map: serde_json::Map<String, Value> =
        t.space().words().iter().zip(t.values()).map(|(w, v)| (w.to_string(), json!(v))).collect();
    Value::Object(map)
}

fn run_gibbs(ctx: &mut Context) -> Result<Outcome> {
    let rpf = ctx.system.rpf.clone();
    let seed = ctx.seed("probes", 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<RealTable> = (0..8)
        .map(|_| RealTable::from_fn(rpf.space().clone(), |_| rand::Rng::gen_range(&mut rng, -1.0..1.0)))
        .collect();
    let gap = spectral_gap_fit(&rpf, &probes, ctx.config.experiment.n_max.min(60))?;
    let theta = rpf.theta();
    let radii: Vec<f64> = (0..8).map(|j| theta.powi(j)).collect();
    let ball = gibbs_ball_fit(&rpf, &radii)?;
    let gibbs = json!({
        "lambda": rpf.lambda(),
        "h": table_json(rpf.h()),
        "nu": table_json(rpf.nu()),
        "g": table_json(rpf.g()),
        "mu": table_json(rpf.mu()),
    });
    ctx.out.write_json("gibbs.json", &gibbs)?;
    let mut csv = String::from("n,error\n");
    for (n, e) in gap.errors.iter().enumerate() {
        let _ = writeln!(csv, "{n},{e:e}");
    }
    ctx.out.write("gap.csv", &csv)?;
    let pts: Vec<(f64, f64)> = gap.errors.iter().enumerate().map(|(n, e)| (n as f64, *e)).collect();
    ctx.plot("gap.svg", "distance to the mean", "n", "sup error", &[Line { label: "probes", points: pts }], true)?;
    let defect = rpf.normalization_defect();
    let mu_total: f64 = rpf.mu().values().iter().sum();
    let verdicts = vec![
        Verdict::check("normalization", defect <= 1e-10, format!("max |sum g - 1| = {defect:e}")),
        Verdict::check("probability", (mu_total - 1.0).abs() <= 1e-10, format!("mu total = {mu_total}")),
        Verdict::check("spectral_gap", gap.delta < 1.0, format!("fitted rate {}", gap.delta)),
    ];
    Ok(Outcome {
        results: json!({
            "lambda": rpf.lambda(),
            "residual": rpf.residual(),
            "normalization_defect": defect,
            "gap": { "c": gap.c, "delta": gap.delta },
            "ball": ball,
        }),
        verdicts,
        warnings: vec![],
    })
}

fn default_xi_grid(kappa: f64) -> Vec<f64> {
    (-25..=25).map(|k| k as f64 / 100.0).filter(|x: &f64| x.abs() < kappa).collect()
}

fn calibrated_h(ctx: &mut Context, xis: &[f64]) -> Result<(f64, f64)> {
    let seed = ctx.seed("calibration", 2);
    let m = ctx.system.depth();
    let cal = calibrate_c0(&ctx.system.rpf, &ctx.system.cocycle, xis, &[m, m + 1], 100, seed)?;
    let h = xis
        .iter()
        .map(|&xi| TwistedOperator::new(&ctx.system.rpf, &ctx.system.cocycle, xi, m).map(|op| op.constants(cal.c0).h))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0, f64::max);
    Ok((cal.c0, h))
}

fn run_spectrum(ctx: &mut Context) -> Result<Outcome> {
    let e = &ctx.config.experiment;
    let kappa = e.kappa;
    let grid = e.xi.clone().unwrap_or_else(|| default_xi_grid(kappa));
    let decay_xi = e.decay_xi.clone();
    let n_max = e.n_max;
    let params = CurveParams { kappa, ..CurveParams::default() };
    let (rpf, f) = (ctx.system.rpf.clone(), ctx.system.cocycle.clone());
    let curve = spectral_curve(&rpf, &f, &grid, params)?;
    let mut csv = String::from("xi,re_lambda,im_lambda,abs_lambda\n");
    for (xi, l) in curve.xi.iter().zip(&curve.lambda) {
        let _ = writeln!(csv, "{xi},{:e},{:e},{:e}", l.re, l.im, l.norm());
    }
    ctx.out.write("spectrum.csv", &csv)?;
    let pts = curve.xi.iter().zip(&curve.lambda).map(|(x, l)| (*x, l.re)).collect();
    ctx.plot(
        "spectrum.svg",
        "leading eigenvalue",
        "xi",
        "Re lambda",
        &[Line { label: "Re lambda", points: pts }],
        false,
    )?;

    let sigma2 = curve.sigma2;
    let rel = (-curve.curvature - sigma2).abs() / sigma2.abs().max(f64::MIN_POSITIVE);
    let mut verdicts = vec![
        Verdict::check(
            "curvature",
            rel <= 0.02,
            format!("-lambda''(0) = {}, sigma^2 = {sigma2}, rel {rel:e}", -curve.curvature),
        ),
        Verdict::check("cubic_residual", curve.b_kappa.is_finite(), format!("B = {:e}", curve.b_kappa)),
    ];
    let mut warnings = Vec::new();
    if let Some(x) = curve.crossing {
        warnings.push(format!("leading eigenvalue loses dominance near xi = {x}"));
    }
    let a_kappa = curve.a_kappa();
    let (c0, h) = calibrated_h(ctx, &decay_xi)?;
    let m = ctx.system.depth();
    let mut decay = Vec::new();
    let mut lines = Vec::new();
    for (k, &xi) in decay_xi.iter().enumerate() {
        let op = TwistedOperator::new(&rpf, &f, xi, m)?;
        let seed = ctx.seed(&format!("probes_{k}"), 100 + k as u64);
        let probes = standard_probes(op.space(), op.theta(), 8, seed);
        let profile = worst_decay_profile(&op, &probes, h, n_max)?;
        let mut csv = String::from("n,w_n\n");
        for (n, w) in profile.w.iter().enumerate() {
            let _ = writeln!(csv, "{n},{w:e}");
        }
        ctx.out.write(&format!("decay_{k}.csv"), &csv)?;
        if xi.abs() < kappa {
            let ratio = profile.envelope_ratio(a_kappa);
            verdicts.push(Verdict::check(
                &format!("low_frequency_envelope[{xi}]"),
                ratio <= 1.0,
                format!("max w_n / 4(1 - A xi^2)^n = {ratio:.4}"),
            ));
        } else {
            let first = profile.first_below(1e-8);
            verdicts.push(Verdict::check(
                &format!("high_frequency_decay[{xi}]"),
                first.is_some(),
                format!("w_n < 1e-8 from n = {first:?}"),
            ));
        }
        lines.push((
            format!("xi = {xi}"),
            profile.w.iter().enumerate().map(|(n, w)| (n as f64, *w)).collect::<Vec<_>>(),
        ));
        decay.push(
            json!({ "xi": xi, "file": format!("decay_{k}.csv"), "rate": profile.rate, "monotone": profile.monotone }),
        );
    }
    let lines: Vec<Line> = lines.iter().map(|(l, p)| Line { label: l, points: p.clone() }).collect();
    ctx.plot("decay.svg", "twisted operator decay", "n", "w_n", &lines, true)?;
    Ok(Outcome {
        results: json!({
            "sigma2": sigma2,
            "curvature": curve.curvature,
            "two_a_kappa": curve.two_a_kappa,
            "b_kappa": curve.b_kappa,
            "b_sigma": curve.b_sigma,
            "crossing": curve.crossing,
            "c0": c0,
            "h": h,
            "decay": decay,
        }),
        verdicts,
        warnings,
    })
}

fn parse_estimator(name: &str) -> Estimator {
    match name {
        "exact" => Estimator::Exact,
        "direct" => Estimator::Direct,
        _ => Estimator::Spectral,
    }
}

/// Computes one series; a budget overrun of the exact estimator becomes a
/// warning instead of an error.
fn series_for(
    ctx: &mut Context,
    est: Estimator,
    phi: &GlobalObservable,
    psi: &LocalObservable,
) -> Result<Option<(CorrelationSeries, Vec<String>)>> {
    let e = &ctx.config.experiment;
    let (rpf, f) = (&ctx.system.rpf, &ctx.system.cocycle);
    let ns = e.n.clone();
    match est {
        Estimator::Exact => match exact_series(rpf, f, phi, psi, &ns, e.budget.unwrap_or(DEFAULT_EXACT_BUDGET)) {
            Ok(s) => Ok(Some((s, vec![]))),
            Err(Error::BudgetExceeded { .. }) => Ok(None),
            Err(err) => Err(err),
        },
        Estimator::Direct => {
            let samples = e.samples;
            let seed = ctx.seed("direct", 3);
            let (rpf, f) = (&ctx.system.rpf, &ctx.system.cocycle);
            Ok(Some((direct_series(rpf, f, phi, psi, &ns, samples, seed)?, vec![])))
        }
        Estimator::Spectral => {
            let params = SpectralParams { alpha: e.alpha, ..SpectralParams::default() };
            Ok(Some(spectral_series(rpf, f, phi, psi, &ns, params)?))
        }
    }
}

fn series_json(s: &CorrelationSeries) -> Value {
    json!({
        "estimator": s.estimator,
        "n": s.n,
        "re_cov": s.cov.iter().map(|c| c.re).collect::<Vec<_>>(),
        "im_cov": s.cov.iter().map(|c| c.im).collect::<Vec<_>>(),
        "err": s.err,
    })
}

/// Agreement up to the reported errors plus `1e-10` absolute or `1e-6` relative.
fn close(a: Complex64, b: Complex64, err: f64) -> bool {
    let d = (a - b).norm() - err;
    d <= 1e-10 || d <= 1e-6 * a.norm().max(b.norm())
}

fn run_correlate(ctx: &mut Context) -> Result<Outcome> {
    let phi = ctx.phi()?;
    let psi = ctx.psi()?;
    let mut all: Vec<CorrelationSeries> = Vec::new();
    let mut warnings = Vec::new();
    let mut verdicts = Vec::new();
    for name in ctx.config.experiment.estimators.clone() {
        let est = parse_estimator(&name);
        match series_for(ctx, est, &phi, &psi)? {
            Some((s, w)) => {
                ctx.out.write(&format!("cov_{est}.csv"), &s.to_csv())?;
                warnings.extend(w);
                all.push(s);
            }
            None => {
                warnings.push("exact enumeration exceeds the budget; estimator skipped".into());
                verdicts.push(Verdict::skipped("exact_agreement", "exact estimator over budget"));
            }
        }
    }
    let find = |e: Estimator| all.iter().find(|s| s.estimator == e);
    if let Some(s) = find(Estimator::Spectral) {
        let worst = s
            .bands
            .iter()
            .zip(&s.cov)
            .map(|(b, c)| b.map_or(0.0, |b| (b.total() - c).norm() / c.norm().max(1.0)))
            .fold(0.0, f64::max);
        verdicts.push(Verdict::check("band_accounting", worst <= 1e-12, format!("max band residual {worst:e}")));
    }
    if let (Some(x), Some(s)) = (find(Estimator::Exact), find(Estimator::Spectral)) {
        let bad: Vec<usize> =
            (0..x.len()).filter(|&i| !close(x.cov[i], s.cov[i], x.err[i] + s.err[i])).map(|i| x.n[i]).collect();
        verdicts.push(Verdict::check("exact_vs_spectral", bad.is_empty(), format!("disagreeing n: {bad:?}")));
    }
    if let Some(d) = find(Estimator::Direct) {
        if let Some(r) = find(Estimator::Exact).or(find(Estimator::Spectral)) {
            let worst = (0..d.len())
                .map(|i| (d.cov[i] - r.cov[i]).norm() / d.err[i].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            verdicts.push(Verdict::check(
                &format!("direct_vs_{}", r.estimator),
                worst <= 3.0,
                format!("max deviation {worst:.3} standard errors"),
            ));
        }
    }
    if ctx.config.observables.phi.preset.as_deref() == Some("constant_one") {
        let worst = all.iter().flat_map(|s| s.cov.iter().zip(&s.err).map(|(c, e)| c.norm() - e)).fold(0.0, f64::max);
        verdicts.push(Verdict::check("constant_phi_zero", worst <= 1e-10, format!("max |cov| beyond error {worst:e}")));
    }
    let lines: Vec<(String, Vec<(f64, f64)>)> = all
        .iter()
        .map(|s| (s.estimator.to_string(), s.n.iter().zip(&s.cov).map(|(n, c)| (*n as f64, c.norm())).collect()))
        .collect();
    let lines: Vec<Line> = lines.iter().map(|(l, p)| Line { label: l, points: p.clone() }).collect();
    ctx.plot("cov.svg", "correlations", "n", "|cov|", &lines, true)?;
    Ok(Outcome { results: json!({ "series": all.iter().map(series_json).collect::<Vec<_>>() }), verdicts, warnings })
}

fn run_cancel(ctx: &mut Context) -> Result<Outcome> {
    let e = ctx.config.experiment.clone();
    let (rpf, f) = (ctx.system.rpf.clone(), ctx.system.cocycle.clone());
    let xi = e.cancel_xi;
    let (c0, h) = match e.h {
        Some(h) => (f64::NAN, h),
        None => calibrated_h(ctx, &[xi])?,
    };
    let n = e.n[0];
    let op = TwistedOperator::new(&rpf, &f, xi, n + ctx.system.depth())?;
    let params = CycleParams {
        n,
        max_pairs: e.max_pairs,
        prefix_slack: e.prefix_slack,
        epsilon: None,
        budget: e.budget.unwrap_or(CycleParams::default().budget),
    };
    let mut verdicts = Vec::new();
    let c0_json = if c0.is_nan() { Value::Null } else { json!(c0) };
    let cycle = match find_us_cycle(&op, h, params) {
        Ok(c) => c,
        Err(Error::NotFound(msg)) => {
            verdicts.push(Verdict::check("us_cycle", false, msg));
            verdicts.push(Verdict::skipped("cancellation", "no cycle"));
            return Ok(Outcome { results: json!({ "xi": xi, "h": h, "c0": c0_json }), verdicts, warnings: vec![] });
        }
        Err(err) => return Err(err),
    };
    cycle.verify(&op)?;
    verdicts.push(Verdict::check("us_cycle", cycle.margin > 0.0, format!("margin {:.6}", cycle.margin)));
    let mut csv = String::from("pair,x,y,phase,stable_tol,unstable_tol\n");
    for (i, p) in cycle.pairs.iter().enumerate() {
        let _ =
            writeln!(csv, "{i},{},{},{:e},{:e},{:e}", p.x, p.y, p.phase, cycle.stable_tols[i], cycle.unstable_tols[i]);
    }
    ctx.out.write("cycle.csv", &csv)?;
    let seed = ctx.seed("nice", 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    let mut worst_transfer = 0.0f64;
    for _ in 0..e.draws {
        let v = sample_nice(&op, cycle.epsilon, h, &mut rng)?;
        let mut found = false;
        for p in &cycle.pairs {
            if let Some(t) = cancellation_pair_check(p, &v, &op, cycle.epsilon, h)?.transfer_modulus {
                found = true;
                worst_transfer = worst_transfer.max(t);
            }
        }
        hits += found as usize;
    }
    verdicts.push(Verdict::check(
        "cancellation",
        hits == e.draws && worst_transfer <= 1.0 - cycle.epsilon + 1e-12,
        format!("{hits}/{} draws hit a cancellation pair; largest |L^n v| there {worst_transfer:.6}", e.draws),
    ));
    Ok(Outcome {
        results: json!({
            "xi": xi,
            "c0": c0_json,
            "h": h,
            "epsilon": cycle.epsilon,
            "phase": cycle.phase,
            "tolerance": cycle.tolerance,
            "margin": cycle.margin,
            "pairs": cycle.pairs.len(),
            "draws": e.draws,
            "hits": hits,
        }),
        verdicts,
        warnings: vec![],
    })
}

fn run_access(ctx: &mut Context) -> Result<Outcome> {
    let e = &ctx.config.experiment;
    let n = e.n[0];
    let defaults = AccessParams::default();
    let params = AccessParams {
        n,
        max_pairs: e.max_pairs,
        prefix_slack: e.prefix_slack.unwrap_or(n.saturating_sub(1)),
        budget: e.budget.unwrap_or(defaults.budget),
    };
    let (max_radius, max_period) = (e.max_radius, e.max_period);
    let report = collapsed_access_coverage(&ctx.system.sft, &ctx.system.cocycle, params)?;
    let mut csv = String::from("t,cycle_length,n\n");
    for (t, l) in report.achieved.iter().zip(&report.cycle_lengths) {
        let _ = writeln!(csv, "{t:e},{l},{n}");
    }
    ctx.out.write("access.csv", &csv)?;
    let probe = non_arithmeticity_probe(&ctx.system.sft, &ctx.system.cocycle, max_period)?;
    let mut csv = String::from("period,word,sum\n");
    for p in &probe.orbit_sums {
        let _ = writeln!(csv, "{},{},{:e}", p.period, p.word, p.sum);
    }
    ctx.out.write("periodic.csv", &csv)?;
    let mut warnings = Vec::new();
    if report.budget_exhausted {
        warnings.push(format!("access search stopped at the budget of {}", report.budget));
    }
    let verdicts = vec![
        Verdict::check(
            "covering_radius",
            report.covering_radius <= max_radius,
            format!("radius {} against {max_radius}", report.covering_radius),
        ),
        Verdict::check(
            "non_arithmetic",
            probe.lattice.is_none() && !probe.cohomologous_to_constant,
            match probe.lattice {
                Some(l) => format!("periodic sums lie on offset {} + {}Z", l.offset, l.r),
                None => format!("spread of f_p/p {:e}", probe.spread),
            },
        ),
    ];
    Ok(Outcome { results: json!({ "access": report, "arithmeticity": probe }), verdicts, warnings })
}

fn run_rates(ctx: &mut Context) -> Result<Outcome> {
    let phi = ctx.phi()?;
    let psi = ctx.psi()?;
    let e = ctx.config.experiment.clone();
    let est = parse_estimator(&e.estimators[0]);
    let (series, warnings) = series_for(ctx, est, &phi, &psi)?
        .ok_or_else(|| Error::BudgetExceeded { budget: e.budget.unwrap_or(DEFAULT_EXACT_BUDGET) })?;
    ctx.out.write(&format!("cov_{est}.csv"), &series.to_csv())?;
    let positive: Vec<usize> = series.n.iter().copied().filter(|&n| n > 0).collect();
    let window =
        e.window.map(|[a, b]| (a, b)).unwrap_or((positive.first().copied().unwrap_or(1), *series.n.last().unwrap()));
    let mut verdicts = Vec::new();
    let fit = match rate_fit(&series, window, &e.rapid_levels) {
        Ok(fit) => {
            if let Some([lo, hi]) = e.exponent_range {
                verdicts.push(Verdict::check(
                    "exponent",
                    fit.exponent >= lo && fit.exponent <= hi,
                    format!("{:.4} (95% CI {:.4} .. {:.4}) against [{lo}, {hi}]", fit.exponent, fit.ci.0, fit.ci.1),
                ));
            }
            if !e.rapid_levels.is_empty() {
                let failing: Vec<u32> = fit.rapid.iter().filter(|(_, ok)| !ok).map(|(l, _)| *l).collect();
                verdicts.push(Verdict::check("rapid_decay", failing.is_empty(), format!("failing levels {failing:?}")));
            }
            serde_json::to_value(&fit)?
        }
        Err(Error::DegenerateWindow(msg)) => {
            if e.exponent_range.is_some() {
                verdicts.push(Verdict::skipped("exponent", msg.clone()));
            }
            if !e.rapid_levels.is_empty() {
                // Nothing measurable above the error floor is rapid decay.
                verdicts.push(Verdict::check("rapid_decay", true, format!("no points above the error floor: {msg}")));
            }
            Value::Null
        }
        Err(err) => return Err(err),
    };
    let lf = lf_bound_check(&series, &phi, &ctx.system.rpf, e.lf_k, e.lf_eps)?;
    verdicts.push(Verdict::check("lf_envelope", lf.pass, format!("C = {:e}", lf.c)));
    let scaled_inf = series
        .n
        .iter()
        .zip(&series.cov)
        .filter(|(n, _)| **n >= window.0 && **n <= window.1 && **n > 0)
        .map(|(n, c)| c.re * (*n as f64).sqrt())
        .fold(f64::INFINITY, f64::min);
    let pts = series.n.iter().zip(&series.cov).map(|(n, c)| (*n as f64, c.norm())).collect();
    let env = lf.n.iter().zip(&lf.envelope).map(|(n, v)| (*n as f64, lf.c * v)).collect();
    ctx.plot(
        "rates.svg",
        "correlation decay",
        "n",
        "|cov|",
        &[Line { label: "|cov|", points: pts }, Line { label: "C (LF + n^-k)", points: env }],
        true,
    )?;
    Ok(Outcome {
        results: json!({
            "series": series_json(&series),
            "fit": fit,
            "lf_bound": lf,
            "inf_cov_sqrt_n": if scaled_inf.is_finite() { json!(scaled_inf) } else { Value::Null },
        }),
        verdicts,
        warnings,
    })
}
