//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use hdirac_cli::{parse_config, run_suite, Report, RunConfig, Suite};
use hdirac_core::algebra::{propagator_symbol, FrequencyPoint};
use hdirac_core::estimates::{fit_exponent, trial_rng};
use hdirac_core::evolution::{
    gaussian_packet, linear_evolve, picard_orbit, solve, EvolutionConfig, ScatterVerdict,
};
use hdirac_core::grid::make_grid;
use hdirac_core::Sign;
use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn config(dir: &Path, body: &str) -> RunConfig {
    let out = dir.to_str().unwrap().replace('\\', "/");
    let path = dir.join("config.toml");
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(&path, format!("{body}\noutput.dir = \"{out}\"\n")).unwrap();
    parse_config(Some(&path), std::iter::empty()).unwrap()
}

fn failed_checks(r: &Report) -> Vec<String> {
    r.checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.3e} (tol {:.1e})", c.name, c.residual, c.tolerance))
        .collect()
}

fn check_named(r: &Report, prefix: &str) -> Vec<String> {
    r.checks
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .map(|c| format!("{}={:.3e}", c.name, c.residual))
        .collect()
}

fn within(t: Duration, limit: f64) -> bool {
    t.as_secs_f64() < limit
}

/// `exp(−it(α·ξ + mβ))` with the Dirac-representation Hamiltonian written out.
fn expm_oracle(t: f64, xi: [f64; 3], m: f64) -> Matrix4<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let [x, y, z] = xi;
    #[rustfmt::skip]
    let h = Matrix4::new(
        c(m, 0.0),  c(0.0, 0.0), c(z, 0.0),  c(x, -y),
        c(0.0, 0.0), c(m, 0.0),  c(x, y),    c(-z, 0.0),
        c(z, 0.0),  c(x, -y),    c(-m, 0.0), c(0.0, 0.0),
        c(x, y),    c(-z, 0.0),  c(0.0, 0.0), c(-m, 0.0),
    );
    (h * c(0.0, -t)).exp()
}

fn criterion_1(tmp: &Path) -> Outcome {
    let cfg = config(&tmp.join("c1"), "grid.n = 8\ngrid.length = 8.0\nsweep.samples = 10000\nsweep.seed = 1");
    let t0 = Instant::now();
    let r = run_suite(&cfg, Suite::VerifyAlgebra).unwrap();
    let mut rng = trial_rng(11, 0);
    let mut gap = 0.0f64;
    for _ in 0..10_000 {
        let xi = [0; 3].map(|_| rng.random_range(-50.0..50.0));
        let m = rng.random_range(0.0..5.0);
        let t = rng.random_range(-3.0..3.0);
        let u = propagator_symbol(t, &FrequencyPoint::new(xi, m)).entries;
        let o = expm_oracle(t, xi, m);
        for a in 0..4 {
            for b in 0..4 {
                gap = gap.max((u[(a, b)] - o[(a, b)]).norm());
            }
        }
    }
    let el = t0.elapsed();
    let bad = failed_checks(&r);
    let ok = bad.is_empty() && gap <= 1e-10 && within(el, 10.0);
    outcome(ok, format!("{} checks, expm oracle gap {gap:.2e}, {:.1}s {}", r.checks.len(), el.as_secs_f64(), bad.join("; ")))
}

fn criterion_2(tmp: &Path) -> Outcome {
    let cfg = config(&tmp.join("c2"), "grid.n = 8\ngrid.length = 8.0\nsweep.samples = 200");
    let r = run_suite(&cfg, Suite::VerifyAlgebra).unwrap();
    let slope = r.fits.iter().find(|f| f.name == "null_form_max_norm_vs_l").map(|f| f.fit.slope).unwrap();
    let zero = r.checks.iter().find(|c| c.name == "null_form_aligned_zero").unwrap();
    let ok = (slope + 1.0).abs() <= 0.15 && zero.residual <= 1e-14;
    outcome(ok, format!("slope {slope:.4}, aligned {:.2e}", zero.residual))
}

fn criterion_3(tmp: &Path) -> Outcome {
    let cfg = config(&tmp.join("c3"), "grid.n = 64\ngrid.length = 32.0\nsweep.samples = 10");
    let t0 = Instant::now();
    let r = run_suite(&cfg, Suite::VerifyAlgebra).unwrap();
    let el = t0.elapsed();
    let part: Vec<_> = r.checks.iter().filter(|c| c.name.contains("partition")).collect();
    let worst = part.iter().map(|c| c.residual).fold(0.0, f64::max);
    let ok = part.len() >= 3 && part.iter().all(|c| c.passed) && within(el, 30.0);
    outcome(ok, format!("{} partitions, worst {worst:.2e}, {:.1}s", part.len(), el.as_secs_f64()))
}

fn criterion_4(tmp: &Path) -> Outcome {
    let cfg = config(
        &tmp.join("c4"),
        "mass = 1.0\ngrid.n = 64\ngrid.length = 3.0\nsweep.p = \"4\"\nsweep.q = \"3\"\nsweep.k = [0, 1, 2, 3, 4, 5]\nsweep.trials = 16",
    );
    let t0 = Instant::now();
    let r = run_suite(&cfg, Suite::SweepStrichartz).unwrap();
    let el = t0.elapsed();
    let slope = r.fits[0].fit.slope;
    let ok = slope <= 5.0 / 24.0 + 0.1 && within(el, 600.0);
    outcome(ok, format!("slope {slope:.4} (bound {:.4}), {:.0}s", 5.0 / 24.0 + 0.1, el.as_secs_f64()))
}

fn criterion_5(tmp: &Path) -> Outcome {
    let t0 = Instant::now();
    let opp = config(
        &tmp.join("c5o"),
        "grid.n = 64\nsweep.kind = \"opposite\"\nsweep.k = [0, 1, 2, 3, 4]\nsweep.k1 = [7]\nsweep.k2 = [7]\nsweep.trials = 4",
    );
    let ro = run_suite(&opp, Suite::SweepBilinear).unwrap();
    let same = config(
        &tmp.join("c5s"),
        "grid.n = 64\nsweep.kind = \"same\"\nsweep.k = [2]\nsweep.k1 = [5, 6, 7, 8, 9]\nsweep.trials = 4",
    );
    let rs = run_suite(&same, Suite::SweepBilinear).unwrap();
    let el = t0.elapsed();
    let so = ro.fits[0].fit.slope;
    let ss = rs.fits[0].fit.slope;
    let ok = so <= 1.15 && ss <= -0.35 && within(el, 1800.0);
    outcome(ok, format!("opposite slope {so:.4}, same slope {ss:.4}, {:.0}s", el.as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let g = make_grid(16, 8.0).unwrap();
    let f = gaussian_packet(&g, 1.0, 1.0, None, 1.0, 0.0).unwrap();
    let free = EvolutionConfig { coupling: 0.0, dt: 1.0 / 16.0, horizon: 2.0, save_every: 1 << 20, ..Default::default() };
    let end = solve(&f, &free).unwrap().trajectory.fields().last().unwrap().to_physical();
    let exact = linear_evolve(&f, 2.0, 1.0).to_physical();
    let red = end.sub(&exact).l2_norm() / exact.l2_norm();
    ok &= red <= 1e-10;
    notes.push(format!("linear reduction {red:.2e}"));

    let f = gaussian_packet(&g, 1.0, 1.0, Some(Sign::Plus), 1.0, 0.0).unwrap();
    let nl = |dt: f64| EvolutionConfig { coupling: 5.0, dt, horizon: 1.0, save_every: 1 << 20, ..Default::default() };
    let strang = |dt: f64| solve(&f, &nl(dt)).unwrap().trajectory.fields().last().unwrap().clone();
    let dts = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let ends: Vec<_> = dts.iter().map(|&dt| strang(dt)).collect();
    let order = (ends[0].sub(&ends[1]).l2_norm() / ends[1].sub(&ends[2]).l2_norm()).log2();
    ok &= (order - 2.0).abs() <= 0.2;
    notes.push(format!("Richardson order {order:.3}"));

    let mut pts = Vec::new();
    for (&dt, st) in dts.iter().zip(&ends) {
        let cfg = EvolutionConfig { picard_iters: 12, ..nl(dt) };
        let orbit = picard_orbit(&f, &cfg).unwrap();
        let pic = orbit.iterates.last().unwrap().fields().last().unwrap().clone();
        pts.push((dt.log2(), pic.sub(st).l2_norm()));
    }
    let cross = fit_exponent(&pts).unwrap().slope;
    ok &= (cross - 2.0).abs() <= 0.2;
    notes.push(format!("Picard-vs-Strang order {cross:.3}"));

    let g = make_grid(32, 32.0).unwrap();
    let f = gaussian_packet(&g, 1.0, 1.0, Some(Sign::Plus), 1e-2, 0.25).unwrap();
    let cfg = EvolutionConfig { dt: 1.0 / 64.0, horizon: 8.0, save_every: 64, ..Default::default() };
    let drift = solve(&f, &cfg).unwrap().max_charge_drift();
    ok &= drift <= 1e-8;
    notes.push(format!("charge drift {drift:.2e}"));
    outcome(ok, notes.join(", "))
}

fn criterion_7(tmp: &Path) -> Outcome {
    let cfg = config(
        &tmp.join("c7"),
        "mass = 1.0\ngrid.n = 32\ngrid.length = 32.0\npotential.kind = \"yukawa\"\npotential.mu0 = 1.0\nsolver.s = 0.25\nsolver.T = 8.0\nsolver.dt = 0.015625\nsolver.save_every = 64\nsolver.picard_horizon = 0.0\ninitial.amplitude = 0.01",
    );
    let r = run_suite(&cfg, Suite::Solve).unwrap();
    let gaps: Vec<f64> = serde_json::from_value(r.data["gaps"].clone()).unwrap();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let verdict: ScatterVerdict = serde_json::from_value(r.data["scatter_verdict"].clone()).unwrap();

    let g = make_grid(16, 16.0).unwrap();
    let mut pts = Vec::new();
    for amp in [1e-2, 2e-2, 4e-2, 8e-2] {
        let f = gaussian_packet(&g, 1.0, 1.0, Some(Sign::Plus), amp, 0.25).unwrap();
        let pc = EvolutionConfig { horizon: 1.0, dt: 1.0 / 16.0, picard_iters: 3, ..Default::default() };
        let orbit = picard_orbit(&f, &pc).unwrap();
        pts.push((f64::log2(amp), orbit.factors[0]));
    }
    let slope = fit_exponent(&pts).unwrap().slope;
    let ok = decreasing && verdict == ScatterVerdict::Decaying && (slope - 2.0).abs() <= 0.3;
    outcome(ok, format!("{} gaps strictly decreasing: {decreasing}, contraction slope {slope:.3}", gaps.len()))
}

fn criterion_8(tmp: &Path) -> Outcome {
    let cfg = config(&tmp.join("c8"), "mass = 0.0\nsweep.s = -0.25");
    let t0 = Instant::now();
    let r = run_suite(&cfg, Suite::Illposed).unwrap();
    let el = t0.elapsed();
    let bad = failed_checks(&r);
    let ok = bad.is_empty() && within(el, 600.0);
    let mut shown = check_named(&r, "kernel_closed");
    shown.extend(check_named(&r, "convolution"));
    shown.extend(check_named(&r, "eps_"));
    shown.extend(check_named(&r, "verdict"));
    outcome(ok, format!("{}, {:.0}s {}", shown.join(", "), el.as_secs_f64(), bad.join("; ")))
}

fn run_binary(cfg: &Path, out: &Path, suite: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_hdirac"))
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), suite])
        .env_clear()
        .stdout(Stdio::null())
        .status()
        .unwrap();
    assert!(status.code().is_some_and(|c| c <= 1), "{suite} exited with {status}");
}

fn criterion_9(tmp: &Path) -> Outcome {
    let dir = tmp.join("c9");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.toml");
    std::fs::write(
        &cfg,
        "grid.n = 16\ngrid.length = 8.0\nsolver.T = 0.5\nsolver.save_every = 8\nsolver.picard_horizon = 0.25\nsweep.k = [0, 1]\nsweep.kprime = [0]\nsweep.trials = 1\nsweep.samples = 500\nsweep.mc_samples = 2000\nsweep.targets = 2\nsweep.seed = 7\n",
    )
    .unwrap();
    let suites = ["verify-algebra", "sweep-strichartz", "sweep-local", "solve", "illposed", "report"];
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        for s in suites {
            run_binary(&cfg, out, s);
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut differ = Vec::new();
    for n in &names {
        if std::fs::read(a.join(n)).unwrap() != std::fs::read(b.join(n)).unwrap() {
            differ.push(n.to_string_lossy().into_owned());
        }
    }
    let ok = differ.is_empty() && names.len() >= 10;
    outcome(ok, format!("{} artifacts compared, differing: {:?}", names.len(), differ))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("algebra suite", Box::new(|| criterion_1(t))),
        ("null-form gain", Box::new(|| criterion_2(t))),
        ("decomposition suite", Box::new(|| criterion_3(t))),
        ("Strichartz sweep", Box::new(|| criterion_4(t))),
        ("bilinear sweep", Box::new(|| criterion_5(t))),
        ("solver", Box::new(criterion_6)),
        ("scattering", Box::new(|| criterion_7(t))),
        ("ill-posedness engine", Box::new(|| criterion_8(t))),
        ("reproducibility", Box::new(|| criterion_9(t))),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if res.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, res.detail);
        failures += usize::from(!res.passed);
    }
    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
