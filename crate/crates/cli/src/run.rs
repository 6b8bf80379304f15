use std::path::Path;

use anyhow::{bail, Context, Result};
use hdirac_core::estimates::{
    bilinear_ratio, fit_exponent, localized_strichartz_ratio, null_form_sweep, strichartz_ratio, trial_rng,
    PacketLayout,
};
use hdirac_core::evolution::{edge_charge_fraction, gaussian_packet, picard_orbit, scattering_profile, solve};
use hdirac_core::grid::io::{load_field, save_field};
use hdirac_core::illposed::{
    kernel_bounds, kernel_entry_check, sample_annulus, supercritical_verdict, third_iterate_lower, witness_report,
    AnnulusSpec, Verdict, WitnessConfig,
};
use hdirac_core::suites::{algebra_suite, decomposition_suite};
use hdirac_core::{Check, Sign, SweepPoint};
use rand::Rng;
use serde_json::json;

use crate::config::{parse_sign, RunConfig};
use crate::report::{write_csv, write_sweep_csv, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    VerifyAlgebra,
    SweepStrichartz,
    SweepLocal,
    SweepBilinear,
    Solve,
    Illposed,
    Report,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::VerifyAlgebra,
        Suite::SweepStrichartz,
        Suite::SweepLocal,
        Suite::SweepBilinear,
        Suite::Solve,
        Suite::Illposed,
        Suite::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::VerifyAlgebra => "verify-algebra",
            Suite::SweepStrichartz => "sweep-strichartz",
            Suite::SweepLocal => "sweep-local",
            Suite::SweepBilinear => "sweep-bilinear",
            Suite::Solve => "solve",
            Suite::Illposed => "illposed",
            Suite::Report => "report",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Runs `suite`, writes its artifacts under `output.dir` and returns the report.
pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<Report> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut report = Report::new(suite.name(), cfg);
    match suite {
        Suite::VerifyAlgebra => verify_algebra(cfg, &mut report),
        Suite::SweepStrichartz => sweep_strichartz(cfg, dir, &mut report),
        Suite::SweepLocal => sweep_local(cfg, dir, &mut report),
        Suite::SweepBilinear => sweep_bilinear(cfg, dir, &mut report),
        Suite::Solve => run_solve(cfg, dir, &mut report),
        Suite::Illposed => illposed(cfg, dir, &mut report),
        Suite::Report => summarize(dir, &mut report),
    }
    .with_context(|| format!("suite {}", suite.name()))?;
    report.write(dir)?;
    Ok(report)
}

fn verify_algebra(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    for c in algebra_suite(cfg.sweep.samples, cfg.sweep.seed)? {
        r.check(c);
    }
    let levels: Vec<i32> = (1..=8).collect();
    let pts = null_form_sweep(&levels, Sign::Plus, 0.0, 4, 200, cfg.sweep.seed)?;
    let fit = fit_exponent(&pts.iter().map(|p| (p.l as f64, p.max_norm)).collect::<Vec<_>>())?;
    r.check(Check::new("null_form_slope_dev_from_-1", (fit.slope + 1.0).abs(), 0.15));
    let aligned = pts.iter().map(|p| p.aligned).fold(0.0, f64::max);
    r.check(Check::new("null_form_aligned_zero", aligned, 1e-14));
    r.fit("null_form_max_norm_vs_l", fit);
    for c in decomposition_suite(&cfg.grid()?, &cfg.sweep.cap_levels, &cfg.sweep.cube_scales)? {
        r.check(c);
    }
    r.data = json!({ "null_form": pts });
    Ok(())
}

fn slope_fit(rows: &[SweepPoint], x: impl Fn(&SweepPoint) -> i32) -> Result<hdirac_core::ExponentFit> {
    Ok(fit_exponent(&rows.iter().map(|p| (x(p) as f64, p.measured)).collect::<Vec<_>>())?)
}

fn sweep_strichartz(cfg: &RunConfig, dir: &Path, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let (p, q) = cfg.exponents()?;
    let s = &cfg.sweep;
    let rows = s
        .k
        .iter()
        .map(|&k| strichartz_ratio(&grid, k, p, q, cfg.mass, s.trials, s.seed))
        .collect::<hdirac_core::Result<Vec<_>>>()?;
    write_sweep_csv(&dir.join("sweep-strichartz.csv"), &rows)?;
    r.artifacts.push("sweep-strichartz.csv".into());
    let target = 1.25 * (0.5 - q.reciprocal());
    if rows.len() >= 3 {
        let fit = slope_fit(&rows, |p| p.k)?;
        r.check(Check::new("strichartz_slope_minus_loss", fit.slope - target, 0.1));
        r.fit("measured_vs_k", fit);
    }
    r.data = json!({ "loss_exponent": target });
    Ok(())
}

fn sweep_local(cfg: &RunConfig, dir: &Path, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let (p, _) = cfg.exponents()?;
    let s = &cfg.sweep;
    let mut rows = Vec::new();
    for &k in &s.k {
        for &kp in s.kprime.iter().filter(|&&kp| kp <= k) {
            rows.push(localized_strichartz_ratio(&grid, k, kp, p, cfg.mass, s.trials, s.seed)?);
        }
    }
    write_sweep_csv(&dir.join("sweep-local.csv"), &rows)?;
    r.artifacts.push("sweep-local.csv".into());
    let bad = rows.iter().filter(|p| !(p.ratio > 0.0 && p.ratio.is_finite())).count();
    r.check(Check::new("ratios_finite_positive", bad as f64, 0.0));
    let max = rows.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let min = rows.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    r.data = json!({ "max_ratio": max, "min_ratio": min });
    Ok(())
}

fn sweep_bilinear(cfg: &RunConfig, dir: &Path, r: &mut Report) -> Result<()> {
    let s = &cfg.sweep;
    let theta2 = if s.kind == "same" { Sign::Plus } else { Sign::Minus };
    let layout = PacketLayout { n: cfg.grid.n, ..PacketLayout::default() };
    let pairs: Vec<(i32, i32)> =
        s.k1.iter().enumerate().map(|(i, &k1)| (k1, s.k2.get(i).copied().unwrap_or(k1))).collect();
    let mut rows = Vec::new();
    for &k in &s.k {
        for &(k1, k2) in &pairs {
            rows.push(bilinear_ratio(&layout, k, k1, k2, Sign::Plus, theta2, cfg.mass, s.trials, s.seed)?);
        }
    }
    write_sweep_csv(&dir.join("sweep-bilinear.csv"), &rows)?;
    r.artifacts.push("sweep-bilinear.csv".into());
    if s.kind == "opposite" {
        for &(k1, k2) in &pairs {
            let group: Vec<SweepPoint> = rows.iter().filter(|p| p.k1 == Some(k1) && p.k2 == Some(k2)).cloned().collect();
            if group.len() >= 3 {
                let fit = slope_fit(&group, |p| p.k)?;
                r.check(Check::new(format!("opposite_slope_in_k_at_k1_{k1}"), fit.slope, 1.15));
                r.fit(&format!("measured_vs_k_at_k1_{k1}"), fit);
            }
        }
    } else {
        for &k in &s.k {
            let group: Vec<SweepPoint> = rows.iter().filter(|p| p.k == k).cloned().collect();
            if group.len() >= 3 {
                let fit = slope_fit(&group, |p| p.k1.unwrap_or(0))?;
                r.check(Check::new(format!("same_slope_in_k1_at_k_{k}"), fit.slope, -0.35));
                r.fit(&format!("measured_vs_k1_at_k_{k}"), fit);
            }
        }
    }
    r.data = json!({ "layout": layout, "regime": s.kind });
    Ok(())
}

fn run_solve(cfg: &RunConfig, dir: &Path, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let ev = cfg.evolution();
    let psi0 = match &cfg.initial.file {
        Some(p) => {
            let f = load_field(p).with_context(|| format!("loading {}", p.display()))?;
            if *f.grid() != grid {
                bail!("initial field grid does not match grid.n / grid.length");
            }
            f
        }
        None => gaussian_packet(&grid, cfg.mass, cfg.initial.width, parse_sign(&cfg.initial.branch)?, cfg.initial.amplitude, cfg.solver.s)?,
    };
    save_field(&dir.join("initial.field"), &psi0)?;
    let sol = solve(&psi0, &ev)?;
    let scat = scattering_profile(&sol.trajectory, &ev)?;
    let last = sol.trajectory.fields().last().expect("nonempty trajectory");
    save_field(&dir.join("final.field"), last)?;
    let rows: Vec<Vec<String>> = sol
        .trajectory
        .times()
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let gap = if j == 0 { String::new() } else { scat.gaps[j - 1].to_string() };
            vec![t.to_string(), sol.charge[j].to_string(), sol.sobolev[j].to_string(), gap]
        })
        .collect();
    write_csv(&dir.join("solve.csv"), &["t", "charge", "sobolev_s", "scatter_gap"], &rows)?;
    r.artifacts.extend(["initial.field", "final.field", "solve.csv"].map(String::from));
    r.check(Check::new("charge_drift_relative", sol.max_charge_drift(), 1e-8));
    let edge = edge_charge_fraction(last);
    if edge > 1e-6 {
        eprintln!("warning: {edge:.2e} of the charge sits near the box faces; enlarge grid.length");
    }
    let picard = if cfg.solver.picard_horizon > 0.0 {
        let pc = hdirac_core::EvolutionConfig { horizon: cfg.solver.picard_horizon, ..ev };
        let orbit = picard_orbit(&psi0, &pc)?;
        json!({ "horizon": pc.horizon, "increments": orbit.increments, "factors": orbit.factors, "diverged": orbit.diverged })
    } else {
        serde_json::Value::Null
    };
    r.data = json!({
        "scatter_verdict": scat.verdict,
        "gaps": scat.gaps,
        "edge_charge_fraction": edge,
        "picard": picard,
    });
    Ok(())
}

fn illposed(cfg: &RunConfig, dir: &Path, r: &mut Report) -> Result<()> {
    let s = &cfg.sweep;
    let m = cfg.mass;
    let spec = cfg.potential_spec();
    let mut rng = trial_rng(s.seed, 99);
    let (mut gap, mut re_excess, mut im_excess) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for &lam in &s.lams {
        let a = AnnulusSpec::new(lam, 0.1);
        let (lo, hi) = kernel_bounds(lam, a.eps, m);
        for _ in 0..s.samples.div_ceil(s.lams.len().max(1)) {
            let xi = sample_annulus(lam, &mut rng);
            let eta = sample_annulus(lam, &mut rng);
            let tau = a.time() * rng.random_range(-1.0..=1.0);
            let t = a.time() * rng.random_range(-1.0..=1.0);
            let k = kernel_entry_check(&a, tau, xi, t, eta, m)?;
            gap = gap.max(k.matrix_gap);
            for z in [k.direct, k.transposed] {
                re_excess = re_excess.min(z.re - lo);
                im_excess = im_excess.min(hi - z.im.abs());
            }
        }
    }
    r.check(Check::new("kernel_closed_form_vs_matrix", gap, 1e-12));
    r.check(Check::new("kernel_real_part_below_bound", (-re_excess).max(0.0), 0.0));
    r.check(Check::new("kernel_imag_part_above_bound", (-im_excess).max(0.0), 0.0));

    let wc = WitnessConfig {
        freq_scales: s.lams.clone(),
        eps: s.eps,
        mass: m,
        potential: spec,
        samples: s.mc_samples,
        targets: s.targets,
        kernel_samples: s.samples,
        seed: s.seed,
    };
    let w = witness_report(&wc)?;
    let rel_se = w.points.iter().map(|p| p.convolution.relative_error()).fold(0.0, f64::max);
    r.check(Check::new("convolution_relative_se", rel_se, 0.05));
    let nonpos = w.points.iter().flat_map(|p| &p.targets).filter(|t| !(t.n_abs.value > 0.0)).count();
    r.check(Check::new("third_iterate_nonpositive_count", nonpos as f64, 0.0));
    if let Some(f) = &w.convolution_fit {
        r.check(Check::new("convolution_exponent_dev_from_4", (f.slope - 4.0).abs(), 0.3));
        r.fit("convolution_vs_lambda", f.clone());
    }
    if let Some(f) = &w.n_fit {
        r.check(Check::new("third_iterate_exponent_dev_from_3", (f.slope - 3.0).abs(), 0.3));
        r.fit("third_iterate_vs_lambda", f.clone());
    }
    let mut eps_rows = Vec::new();
    if s.eps_list.len() >= 3 && !s.lams.is_empty() {
        let mut lams = s.lams.clone();
        lams.sort_by(f64::total_cmp);
        let lam = lams[lams.len() / 2];
        let mut pts = Vec::new();
        for (i, &e) in s.eps_list.iter().enumerate() {
            let est = third_iterate_lower(&AnnulusSpec::new(lam, e), &spec, m, s.mc_samples, s.seed + 500 + i as u64)?;
            pts.push((e.log2(), est.modulus.value));
            eps_rows.push(json!({ "freq_scale": lam, "eps": e, "n_abs": est.modulus }));
        }
        let f = fit_exponent(&pts)?;
        r.check(Check::new("eps_linearity_dev_from_1", (f.slope - 1.0).abs(), 0.1));
        r.fit("third_iterate_vs_eps", f);
    }
    let verdict = if w.points.len() >= 3 {
        let v = supercritical_verdict(&w, s.s)?;
        if s.s < 0.0 {
            let ok = v.verdict == Verdict::Fails;
            r.check(Check::new(format!("verdict_fails_at_s_{}", s.s), if ok { 0.0 } else { 1.0 }, 0.0));
        }
        serde_json::to_value(&v)?
    } else {
        serde_json::Value::Null
    };
    let rows: Vec<Vec<String>> = w
        .points
        .iter()
        .map(|p| {
            let se = p.targets.iter().map(|t| t.n_abs.std_error).fold(0.0, f64::max);
            vec![
                p.freq_scale.to_string(),
                p.time.to_string(),
                p.n_mean.to_string(),
                se.to_string(),
                p.convolution.value.to_string(),
                p.convolution.std_error.to_string(),
                p.kernel_min_real.to_string(),
                p.kernel_max_imag.to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join("illposed.csv"),
        &["lam", "t", "n_mean", "n_max_se", "convolution", "convolution_se", "kernel_min_real", "kernel_max_imag"],
        &rows,
    )?;
    let mut text = serde_json::to_string_pretty(&w)?;
    text.push('\n');
    std::fs::write(dir.join("witness.json"), text)?;
    r.artifacts.extend(["illposed.csv", "witness.json"].map(String::from));
    r.data = json!({ "verdict": verdict, "eps_sweep": eps_rows });
    Ok(())
}

fn summarize(dir: &Path, r: &mut Report) -> Result<()> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut suites = Vec::new();
    for p in files {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if stem == "report" || stem.parse::<Suite>().is_err() {
            continue;
        }
        let rep: Report = serde_json::from_str(&std::fs::read_to_string(&p)?)
            .with_context(|| format!("parsing {}", p.display()))?;
        let failed = rep.checks.iter().filter(|c| !c.passed).count();
        r.check(Check::new(format!("{}_failed_checks", rep.suite), failed as f64, 0.0));
        suites.push(json!({ "suite": rep.suite, "config_hash": rep.config_hash, "seed": rep.seed, "passed": rep.passed }));
    }
    if suites.is_empty() {
        bail!("no suite reports in {}", dir.display());
    }
    r.data = json!({ "suites": suites });
    Ok(())
}

