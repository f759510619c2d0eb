//! The ten acceptance criteria, run in order at their stated tolerances and
//! time budgets. One PASS/FAIL line per criterion goes straight to stdout so
//! it shows even when the harness captures test output.

#![allow(clippy::field_reassign_with_default)]

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavesearch::catalysis::{
    default_mass_ratios, detuning_sweep, single_tap_gain_curve, single_tap_gain_formula,
};
use wavesearch::classical::{
    default_step, evolve_damped, evolve_exact, half_well_trajectory, initial_uniform,
    max_gain_predicted, measure_damped_oscillator, run_search, run_search_from, RunOptions,
    SystemState,
};
use wavesearch::grover::{
    average_success_over_random_stop, optimal_queries, reflect_mean, reflect_target, success_after,
    uniform_state,
};
use wavesearch::oscillator::{solve_family, Family, Spectrum};
use wavesearch::quantum::{
    evolve_coherent, evolve_in_half_well, sample_wavefunction, tap_coherent, CoherentState,
    WavefunctionGrid,
};
use wavesearch_cli::{run_experiment, ExperimentConfig, ExperimentKind};

type Check = Result<String, String>;

/// Name, check, and time budget in seconds.
type Criterion = (&'static str, fn() -> Check, Option<u64>);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within_budget(elapsed: Duration, budget: Option<Duration>) -> Result<(), String> {
    match budget {
        Some(limit) if elapsed > limit => Err(format!(
            "took {:.2} s, budget {:.0} s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        )),
        _ => Ok(()),
    }
}

fn query_law() -> Check {
    let plan = optimal_queries(4).map_err(|e| e.to_string())?;
    ensure(plan.q_int == 1, || format!("N=4 gives Q={}", plan.q_int))?;
    ensure((plan.success_prob - 1.0).abs() <= 1e-12, || {
        format!("N=4 success {}", plan.success_prob)
    })?;
    let mut worst = 0.0f64;
    for n in 2..=4096usize {
        let q = optimal_queries(n).map_err(|e| e.to_string())?.q_int;
        let mut state = uniform_state(n, n / 2).map_err(|e| e.to_string())?;
        for it in 0..=q {
            if it > 0 {
                state = reflect_mean(&reflect_target(&state));
            }
            let diff = (state.success_probability() - success_after(n, it)).abs();
            worst = worst.max(diff);
        }
    }
    ensure(worst <= 1e-10, || {
        format!("closed form vs iteration differs by {worst:e}")
    })?;
    Ok(format!("N=4 Q=1 p=1; N in 2..=4096 max diff {worst:.1e}"))
}

fn n_fold_amplification() -> Check {
    let p4 = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).map_err(|e| e.to_string())?;
    let g4 = run_search(&p4, 0, 1.0, 1)
        .map_err(|e| e.to_string())?
        .gain_achieved;
    ensure((g4 - 4.0).abs() <= 1e-8, || format!("N=4 gain {g4}"))?;
    let p16 = solve_family(Family::CaseTwo, 1, 16, 1.0, 1.0).map_err(|e| e.to_string())?;
    let g16 = run_search(&p16, 0, 1.0, 3)
        .map_err(|e| e.to_string())?
        .gain_achieved;
    let expected = 16.0 * success_after(16, 3);
    ensure((g16 - expected).abs() <= 1e-8, || {
        format!("N=16 gain {g16} vs {expected}")
    })?;
    Ok(format!(
        "N=4 gain {g4:?}; N=16 Q=3 gain {g16:.10} vs {expected:.10}"
    ))
}

fn single_reflection_gain() -> Check {
    let ns: Vec<usize> = (2..=256).collect();
    let gains = single_tap_gain_curve(&ns).map_err(|e| e.to_string())?;
    let worst = ns
        .iter()
        .zip(&gains)
        .map(|(&n, g)| (g - single_tap_gain_formula(n)).abs())
        .fold(0.0f64, f64::max);
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    let big = single_tap_gain_curve(&[10_000]).map_err(|e| e.to_string())?[0];
    let formula = single_tap_gain_formula(10_000);
    ensure((big - formula).abs() <= 1e-8 && (9.0 - big) < 3e-3, || {
        format!("N=1e4 gain {big}")
    })?;
    Ok(format!(
        "N in 2..=256 max diff {worst:.1e}; N=1e4 gain {big:.8}"
    ))
}

fn frequency_families() -> Check {
    for p in 1..=6u32 {
        for n in 4..=1024usize {
            let one = solve_family(Family::CaseOne, p, n, 1.0, 1.0).map_err(|e| e.to_string())?;
            let s = Spectrum::compute(n, 1.0, 1.0, one.big_mass, one.big_spring)
                .map_err(|e| e.to_string())?;
            let want = (f64::from(2 * p + 1) / 2.0, 0.5);
            ensure(
                (s.omega_plus - want.0).abs() <= 1e-10 && (s.omega_minus - want.1).abs() <= 1e-10,
                || format!("CaseOne p={p} N={n}: {} {}", s.omega_plus, s.omega_minus),
            )?;
            let two = solve_family(Family::CaseTwo, p, n, 1.0, 1.0).map_err(|e| e.to_string())?;
            let s = Spectrum::compute(n, 1.0, 1.0, two.big_mass, two.big_spring)
                .map_err(|e| e.to_string())?;
            ensure(
                (s.omega_plus - f64::from(2 * p)).abs() <= 1e-10 && s.omega_minus.abs() <= 1e-10,
                || format!("CaseTwo p={p} N={n}: {} {}", s.omega_plus, s.omega_minus),
            )?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let big_mass = rng.random_range(0.05..50.0);
        let big_spring = rng.random_range(0.0..50.0);
        let n = rng.random_range(2..2000usize);
        let s = Spectrum::compute(n, 1.0, 1.0, big_mass, big_spring).map_err(|e| e.to_string())?;
        let sum = 1.0 + (big_spring + n as f64) / big_mass;
        let product = big_spring / big_mass;
        let (p2, m2) = (s.omega_plus.powi(2), s.omega_minus.powi(2));
        ensure(
            (p2 + m2 - sum).abs() <= 1e-10 * sum.max(1.0)
                && (p2 * m2 - product).abs() <= 1e-10 * product.max(1.0),
            || format!("identities fail for M={big_mass} K={big_spring} N={n}"),
        )?;
    }
    Ok("p in 1..=6, N in 4..=1024 both families; 1000 random triples".into())
}

fn max_gain_formula() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tightest = f64::INFINITY;
    for trial in 0..100 {
        let n = [4, 8, 16][trial % 3];
        let params = solve_family(Family::CaseTwo, 1, n, 1.0, 1.0).map_err(|e| e.to_string())?;
        let mut start = SystemState::at_rest(n);
        start.vel = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        start.vel[0] = rng.random_range(0.2..1.0);
        let bound = max_gain_predicted(&params, &start, 0).map_err(|e| e.to_string())?;
        let taps = (4.0 * PI / (1.0 / n as f64).sqrt().asin()).ceil() as u64;
        let observed = run_search_from(&params, &start, 0, taps, &RunOptions::default())
            .map_err(|e| e.to_string())?
            .gain_achieved;
        let lower = bound * (1.0 - 1.0 / n as f64) * (1.0 - 1e-6);
        ensure(
            observed <= bound * (1.0 + 1e-12) && observed >= lower,
            || format!("trial {trial}: observed {observed}, formula {bound}"),
        )?;
        tightest = tightest.min(observed / bound);
    }
    Ok(format!(
        "100 random sets; min observed/formula {tightest:.6}"
    ))
}

fn random_stop_average() -> Check {
    let mut report = Vec::new();
    for n in [4usize, 100, 1024] {
        let avg = average_success_over_random_stop(n, 1_000_000, 20).map_err(|e| e.to_string())?;
        ensure((avg - 0.5).abs() <= 0.01, || format!("N={n} average {avg}"))?;
        report.push(format!("N={n} {avg:.4}"));
    }
    Ok(report.join(", "))
}

fn damping_laws() -> Check {
    let mut report = Vec::new();
    for gamma in [1e-3, 1e-2] {
        let m =
            measure_damped_oscillator(1.0, gamma, 10, 2.0 * PI / 1e4).map_err(|e| e.to_string())?;
        let freq_err = (m.frequency - (1.0 - gamma * gamma).sqrt()).abs();
        ensure(m.envelope_max_error <= 1e-4 && freq_err <= 1e-6, || {
            format!(
                "gamma={gamma}: envelope {:e}, frequency {freq_err:e}",
                m.envelope_max_error
            )
        })?;
        report.push(format!(
            "gamma={gamma} env {:.1e} freq {freq_err:.1e}",
            m.envelope_max_error
        ));
    }
    let params = solve_family(Family::CaseOne, 1, 4, 1.0, 1.0).map_err(|e| e.to_string())?;
    let mut start = initial_uniform(&params, 1.0).map_err(|e| e.to_string())?;
    start.vel[2] = -0.4;
    let dt = 20.0 * PI;
    let numeric = evolve_damped(&params, &start, 0.0, dt, default_step(&params))
        .map_err(|e| e.to_string())?;
    let exact = evolve_exact(&params, &start, dt).map_err(|e| e.to_string())?;
    let worst = numeric
        .vel
        .iter()
        .zip(&exact.vel)
        .chain(numeric.pos.iter().zip(&exact.pos))
        .map(|(a, b)| (a - b).abs())
        .chain([
            (numeric.big_pos - exact.big_pos).abs(),
            (numeric.big_vel - exact.big_vel).abs(),
        ])
        .fold(0.0f64, f64::max);
    ensure(worst <= 1e-6, || format!("integrator vs exact {worst:e}"))?;
    report.push(format!("integrator vs exact {worst:.1e}"));
    Ok(report.join("; "))
}

/// Spacing Δx/40, reaching 10Δx beyond the packet.
fn fine_grid(state: &CoherentState) -> Result<WavefunctionGrid, String> {
    let dx = state.delta_x();
    let reach = state.center_x().abs() + 10.0 * dx;
    let (lo, hi) = if state.tapped {
        (-reach, 0.0)
    } else {
        (state.center_x() - 10.0 * dx, state.center_x() + 10.0 * dx)
    };
    let points = ((hi - lo) / (dx / 40.0)).ceil() as usize + 1;
    sample_wavefunction(state, lo, hi, points).map_err(|e| e.to_string())
}

fn quantum_layer() -> Check {
    for a in [0.5, 1.0, 2.0, 3.5] {
        let s = tap_coherent(
            &CoherentState::natural(Complex64::new(-a, 0.0)).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let norm = fine_grid(&s)?.norm();
        ensure((norm - 1.0).abs() <= 1e-8, || {
            format!("tapped norm a={a}: {norm}")
        })?;
    }

    let tapped = tap_coherent(
        &CoherentState::new(Complex64::new(-1.4, 0.6), 1.7, 0.8, 1.0).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    for j in 0..100 {
        let s = evolve_coherent(&tapped, j as f64 * 0.091);
        let grid = fine_grid(&s)?;
        let node = s.psi_at(0.0).norm();
        ensure(node <= 1e-10 * grid.max_abs(), || {
            format!("node at sample {j}: {node:e}")
        })?;
    }

    let free = CoherentState::new(Complex64::from_polar(2.5, 0.7), 1.3, 0.9, 1.0)
        .map_err(|e| e.to_string())?;
    for j in 0..50 {
        let t = j as f64 * 0.21;
        let s = evolve_coherent(&free, t);
        let grid = fine_grid(&s)?;
        let ex = 2.0 * s.delta_x() * s.alpha.re;
        let ep = 2.0 * s.delta_p() * s.alpha.im;
        ensure(
            (grid.mean_x() - ex).abs() <= 1e-6 && (grid.mean_p(s.hbar) - ep).abs() <= 1e-6,
            || format!("expectations at t={t}"),
        )?;
    }

    let start = tap_coherent(
        &CoherentState::natural(Complex64::new(-5.0, 0.3)).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let (x0, p0) = start.classical_track();
    let times: Vec<f64> = (0..400).map(|j| j as f64 * 0.05).collect();
    let classical = half_well_trajectory(x0, p0, 1.0, &times).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (t, (x, _)) in times.iter().zip(classical) {
        let (s, _) = evolve_in_half_well(&start, *t).map_err(|e| e.to_string())?;
        // Only instants where the packet is clear of the wall.
        if s.alpha.re.abs() < 4.0 {
            continue;
        }
        let diff = (fine_grid(&s)?.mean_x() - x).abs();
        worst = worst.max(diff);
        checked += 1;
    }
    ensure(worst <= 1e-8 && checked > 100, || {
        format!("tapped track vs classical {worst:e} over {checked} instants")
    })?;
    Ok(format!(
        "norm, node, expectations; tapped track {worst:.1e} over {checked} instants"
    ))
}

fn resonance() -> Check {
    let params = solve_family(Family::CaseTwo, 1, 16, 1.0, 1.0).map_err(|e| e.to_string())?;
    let taps = optimal_queries(16).map_err(|e| e.to_string())?.q_int;
    let ratios = default_mass_ratios();
    let sweep = detuning_sweep(&params, &ratios, taps, 0).map_err(|e| e.to_string())?;
    let at = |mu: f64| {
        let i = ratios
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - mu).abs().total_cmp(&(b.1 - mu).abs()))
            .map(|(i, _)| i)
            .expect("non-empty grid");
        ensure((ratios[i] - mu).abs() < 1e-12, || {
            format!("grid lacks mu={mu}")
        })?;
        Ok::<f64, String>(sweep.gains[i])
    };
    let (half, one, two) = (at(0.5)?, at(1.0)?, at(2.0)?);
    let summary = sweep.summary().ok_or("empty sweep")?;
    ensure(summary.peak_mass_ratio == 1.0, || {
        format!("peak at mu={}", summary.peak_mass_ratio)
    })?;
    ensure(half < one && two < one, || {
        format!("gain(1/2)={half}, gain(1)={one}, gain(2)={two}")
    })?;
    Ok(format!(
        "peak mu=1 gain {one:.4}; gain(1/2) {half:.4}, gain(2) {two:.4}"
    ))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir exists")
        .map(|e| {
            let path = e.expect("dir entry").path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(&path).expect("readable artifact"))
        })
        .collect();
    files.sort();
    files
}

fn run_into(config: &ExperimentConfig, dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(|e| e.to_string())?;
    }
    let mut config = config.clone();
    config.output.dir = Some(dir.to_path_buf());
    run_experiment(&config).map_err(|e| e.to_string())?;
    Ok(read_all(dir))
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let kinds = [
        ExperimentKind::Grover,
        ExperimentKind::Classical,
        ExperimentKind::Quantum,
        ExperimentKind::Sweep,
        ExperimentKind::Catalysis,
    ];
    let mut files = 0;
    for kind in kinds {
        let mut config = ExperimentConfig::default();
        config.kind = Some(kind);
        config.seed = 42;
        config.grover.n = 64;
        config.classical.include_positions = true;
        config.quantum.tapped = true;
        config.quantum.alpha_re = -3.0;
        let dir = root.path().join(kind.to_string());
        let first = run_into(&config, &dir)?;
        let second = run_into(&config, &dir)?;
        ensure(first == second, || format!("{kind}: reruns differ"))?;
        // A different thread count changes only the config echo.
        config.jobs = Some(2);
        let scheduled = run_into(&config, &dir)?;
        let tables = |v: &[(String, Vec<u8>)]| {
            v.iter()
                .filter(|f| f.0.ends_with(".csv"))
                .cloned()
                .collect::<Vec<_>>()
        };
        ensure(tables(&scheduled) == tables(&first), || {
            format!("{kind}: tables depend on the thread count")
        })?;
        files += first.len();
    }
    Ok(format!(
        "5 experiment kinds, {files} files byte-identical on rerun"
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("1 query law", query_law, Some(1)),
        ("2 N-fold amplification", n_fold_amplification, Some(1)),
        ("3 single-reflection gain", single_reflection_gain, Some(10)),
        ("4 frequency families", frequency_families, None),
        ("5 max-gain formula", max_gain_formula, Some(30)),
        ("6 random-stop average", random_stop_average, Some(5)),
        ("7 damping laws", damping_laws, None),
        ("8 quantum layer", quantum_layer, None),
        ("9 resonance non-monotonicity", resonance, Some(60)),
        ("10 determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    let stdout = std::io::stdout();
    for (name, check, budget) in criteria {
        let started = Instant::now();
        let result = check();
        let elapsed = started.elapsed();
        let result = result.and_then(|detail| {
            within_budget(elapsed, budget.map(Duration::from_secs)).map(|_| detail)
        });
        let line = match &result {
            Ok(detail) => format!(
                "PASS criterion {name} ({:.2} s): {detail}",
                elapsed.as_secs_f64()
            ),
            Err(reason) => {
                failed.push(name);
                format!(
                    "FAIL criterion {name} ({:.2} s): {reason}",
                    elapsed.as_secs_f64()
                )
            }
        };
        let mut handle = stdout.lock();
        writeln!(handle, "{line}").unwrap();
        handle.flush().unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
