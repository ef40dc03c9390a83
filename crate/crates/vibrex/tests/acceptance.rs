//! Quantitative exit gate of the transfer model. Each test checks one block
//! of published-figure landmarks or closed-form identities and prints a
//! one-line verdict with the measured values; the tolerances are pinned here
//! and nowhere else.
//!
//! Expected runtime is dominated by criterion 5 (an exact-engine sweep over
//! 132 anchoring/temperature points, tens of minutes on one core).

use vibrex::cli::{self, arith_grid, geometric_grid, RunConfig, Subcommand};
use vibrex::exact::Engine;
use vibrex::harness::{
    compute_series, find_max, shift_scan, spectrum_compare, sweep_epsilon, sweep_temperature,
    time_grid, validate, MaxReport, SeriesOptions, SweepRow,
};
use vibrex::exciton::MuLabel;
use vibrex::params::ModelParams;
use vibrex::pt::delta_matrices;
use vibrex::threepath::transfer_ceiling;

fn within(what: &str, value: f64, target: f64, tol: f64) {
    assert!(
        (value - target).abs() <= tol,
        "{what}: measured {value}, expected {target} +- {tol}"
    );
}

fn inside(what: &str, value: f64, lo: f64, hi: f64) {
    assert!(
        value >= lo && value <= hi,
        "{what}: measured {value}, expected within [{lo}, {hi}]"
    );
}

fn unwrap_row(row: &SweepRow) -> &MaxReport {
    row.outcome.as_ref().unwrap_or_else(|e| {
        panic!(
            "sweep row (eps = {}, T = {}) failed: {e}",
            row.epsilon, row.temperature
        )
    })
}

#[test]
fn criterion_1_derived_constants() {
    let base = ModelParams::reference();
    let d10 = base.derive().unwrap();
    let strong = ModelParams {
        chi: 2.0e-11,
        ..base
    };
    let d20 = strong.derive().unwrap();

    println!(
        "criterion 1: eta(20 pN) = {:.5} cm^-1, E_B(10 pN) = {:.5} cm^-1, Omega = {:.4} cm^-1",
        d20.eta, d10.binding_energy, d10.omega
    );
    within("band-centre coupling eta at 20 pN", d20.eta, 1.41, 0.01);
    within("binding energy at 10 pN", d10.binding_energy, 0.336, 0.002);
    within("lowest-mode frequency", d10.omega, 15.15, 0.02);
}

#[test]
fn criterion_2_dressed_ladder_tracks_the_exact_spectrum() {
    let p = ModelParams {
        epsilon: 0.01,
        ..ModelParams::reference()
    };
    let phi = p.phi;
    let table = spectrum_compare(&p, &SeriesOptions::default()).unwrap();

    let band_max = |lo: f64, hi: f64| {
        let mut n = 0usize;
        let mut worst = 0.0f64;
        for r in &table.rows {
            let e = r.e_rel / phi;
            if e >= lo && e <= hi {
                n += 1;
                worst = worst.max(r.delta.abs() / phi);
            }
        }
        assert!(n > 0, "no levels between {lo} and {hi} hopping units");
        worst
    };
    let low = band_max(95.0, 105.0);
    let high = band_max(195.0, 205.0);

    // Pairing defect against the spacing of the exact spectrum, everywhere
    // below 200 hopping units.
    let mut violations = 0usize;
    for (i, r) in table.rows.iter().enumerate() {
        if r.e_rel / phi >= 200.0 {
            continue;
        }
        let left = if i > 0 {
            r.e_rel - table.rows[i - 1].e_rel
        } else {
            f64::INFINITY
        };
        let right = if i + 1 < table.rows.len() {
            table.rows[i + 1].e_rel - r.e_rel
        } else {
            f64::INFINITY
        };
        if r.delta.abs() >= left.min(right) {
            violations += 1;
        }
    }

    println!(
        "criterion 2: n_max = {}, max|dE|/Phi = {:.3e} near 100 Phi, {:.3e} near 200 Phi, \
         {violations} spacing violations below 200 Phi",
        table.n_max, low, high
    );
    inside("ladder defect near 100 hopping units", low, 3e-4, 3e-3);
    inside("ladder defect near 200 hopping units", high, 1.5e-3, 1.5e-2);
    assert_eq!(violations, 0, "pairing broke below 200 hopping units");
}

#[test]
fn criterion_3_static_shift_constants() {
    let p = ModelParams::reference();
    let d = p.derive().unwrap();
    let rows = shift_scan(&p, &[0.0], &SeriesOptions::default()).unwrap();
    let entries = &rows[0].entries;
    let n = p.n_sites();

    let in_eb = |x: f64| x / d.binding_energy;
    let split_pair: Vec<f64> = entries
        .iter()
        .filter(|e| matches!(e.label, MuLabel::Plus | MuLabel::Minus))
        .map(|e| in_eb(e.delta_omega))
        .collect();
    let wave = |keep: &dyn Fn(usize) -> bool| {
        let vals: Vec<f64> = entries
            .iter()
            .filter_map(|e| match e.label {
                MuLabel::Wave(k) if keep(k) => Some(in_eb(e.delta_omega)),
                _ => None,
            })
            .collect();
        assert!(!vals.is_empty());
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let interior = wave(&|k| k != 1 && k != n);
    let edge = wave(&|k| k == 1 || k == n);

    println!(
        "criterion 3: split-pair shift {:.4} E_B, interior-wave mean {:.4} E_B, \
         edge-wave mean {:.4} E_B",
        split_pair[0], interior, edge
    );
    assert_eq!(split_pair.len(), 2);
    for v in &split_pair {
        within("split-pair diagonal shift / E_B", *v, -0.1085, 0.001085);
    }
    within("interior-wave mean shift / E_B", interior, -0.2, 0.01);
    within("edge-wave mean shift / E_B", edge, -0.1, 0.005);
}

#[test]
fn criterion_4_transfer_landmarks_and_perturbative_match() {
    let opts = SeriesOptions::default();
    let times = time_grid(1000.0, 10001);
    let gap = |a: &[num_complex::Complex64], b: &[num_complex::Complex64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x.norm() - y.norm()).abs())
            .fold(0.0f64, f64::max)
    };

    let strong = ModelParams {
        epsilon: 0.020,
        ..ModelParams::reference()
    };
    let exact_s = compute_series(&strong, Engine::Exact, &times, &opts).unwrap();
    let peak_s = find_max(&exact_s).unwrap();
    let early = peak_s
        .local_maxima
        .iter()
        .find(|(t, _)| (t - 248.5).abs() <= 2.0)
        .copied()
        .unwrap_or_else(|| panic!("no early maximum near 248.5: {:?}", peak_s.local_maxima));
    let pt_s = compute_series(&strong, Engine::PtFull, &times, &opts).unwrap();
    let gap_s = gap(&exact_s.values, &pt_s.values);

    let tuned = ModelParams {
        epsilon: 0.013,
        ..ModelParams::reference()
    };
    let exact_t = compute_series(&tuned, Engine::Exact, &times, &opts).unwrap();
    let peak_t = find_max(&exact_t).unwrap();
    let pt_t = compute_series(&tuned, Engine::PtFull, &times, &opts).unwrap();
    let gap_t = gap(&exact_t.values, &pt_t.values);

    println!(
        "criterion 4: eps 0.020 -> local {:.4}@{:.1}, absolute {:.4}@{:.1}, pt gap {:.4}; \
         eps 0.013 -> {:.4}@{:.1}, pt gap {:.4}",
        early.1, early.0, peak_s.g_m, peak_s.t_m, gap_s, peak_t.g_m, peak_t.t_m, gap_t
    );

    assert!(peak_s.double_maximum, "expected a split transfer pulse");
    within("early maximum at eps 0.020", early.1, 0.83, 0.01);
    within("early maximum time", early.0, 248.5, 2.0);
    within("absolute maximum at eps 0.020", peak_s.g_m, 0.88, 0.01);
    within("absolute maximum time", peak_s.t_m, 495.5, 3.0);
    within("maximum at eps 0.013", peak_t.g_m, 0.97, 0.01);
    within("maximum time at eps 0.013", peak_t.t_m, 699.9, 4.0);
    assert!(gap_s <= 0.02, "perturbative gap {gap_s} at eps 0.020");
    assert!(gap_t <= 0.02, "perturbative gap {gap_t} at eps 0.013");
}

#[test]
fn criterion_5_transmission_extrema_and_cross_rows() {
    let base = ModelParams::reference();
    let opts = SeriesOptions::default();

    // Coarse grid plus a finer band across the destructive dip, where a
    // 0.001 step is too wide to pin the minimum.
    let mut grid = arith_grid(0.005, 0.05, 0.001);
    grid.extend(arith_grid(0.019, 0.024, 0.0002));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let table = sweep_epsilon(&base, &grid, &[100.0, 300.0], Engine::Exact, &opts);
    let block = |t: f64| -> Vec<(f64, f64)> {
        table
            .rows
            .iter()
            .filter(|r| r.temperature == t)
            .map(|r| (r.epsilon, unwrap_row(r).g_m))
            .collect()
    };
    let extrema = |rows: &[(f64, f64)]| {
        let min = rows
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let max = rows
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        (min, max)
    };
    let warm = block(300.0);
    let cold = block(100.0);
    let ((eps_min, g_min), (eps_max, g_max)) = extrema(&warm);
    let ((_, g_min_cold), (_, g_max_cold)) = extrema(&cold);

    // Longer chain and stronger lattice force at the same anchoring. The
    // longer chain halves the lowest mode, so the thermal ladder is pinned at
    // the reference depth to keep the matrix at desk scale; the discarded
    // tail (3e-3) is far below the row tolerance.
    let long = ModelParams {
        l_sites: 20,
        ..base.clone()
    };
    let deep = SeriesOptions {
        n_max: Some(158),
        ..SeriesOptions::default()
    };
    let long_row = sweep_epsilon(&long, &[0.01], &[300.0], Engine::Exact, &deep);
    let g_long = unwrap_row(&long_row.rows[0]).g_m;

    let stiff = ModelParams {
        chi: 2.0e-11,
        ..base.clone()
    };
    let stiff_row = sweep_epsilon(&stiff, &[0.01], &[300.0], Engine::Exact, &opts);
    let g_stiff = unwrap_row(&stiff_row.rows[0]).g_m;

    let g_base = warm
        .iter()
        .find(|(e, _)| (e - 0.01).abs() < 1e-9)
        .expect("eps = 0.01 row")
        .1;

    println!(
        "criterion 5: T=300 min {g_min:.4}@{eps_min:.4}, max {g_max:.4}@{eps_max:.4}; \
         T=100 min {g_min_cold:.4}, max {g_max_cold:.4}; \
         eps=0.01 rows: base {g_base:.4}, L=20 {g_long:.4}, chi=20 pN {g_stiff:.4}"
    );

    within("destructive dip at 300 K", g_min, 0.84, 0.01);
    within("dip anchoring at 300 K", eps_min, 0.021, 0.002);
    within("constructive peak at 300 K", g_max, 0.97, 0.01);
    within("peak anchoring at 300 K", eps_max, 0.013, 0.002);
    within("destructive dip at 100 K", g_min_cold, 0.86, 0.01);
    within("constructive peak at 100 K", g_max_cold, 0.99, 0.01);
    within("reference row at eps 0.01", g_base, 0.93, 0.01);
    within("doubled chain length", g_long, 0.89, 0.02);
    within("doubled lattice force", g_stiff, 0.73, 0.02);
    assert!(
        g_base > g_long && g_long > g_stiff,
        "degradation order broke: {g_base} / {g_long} / {g_stiff}"
    );
}

#[test]
fn criterion_6_optimal_anchoring_and_temperature_scales() {
    let base = ModelParams::reference();

    let mut stars = Vec::new();
    for t in [100.0, 150.0, 200.0, 250.0, 300.0] {
        let q = ModelParams {
            temperature: t,
            ..base.clone()
        };
        let d = q.derive().unwrap();
        let c = transfer_ceiling(&q, &d).unwrap();
        inside(
            &format!("optimal anchoring at {t} K"),
            c.epsilon_star,
            0.0107,
            0.0115,
        );
        stars.push((t, c));
    }
    let t0_cold = stars[0].1.t_zero_kelvin;
    let t0_warm = stars[4].1.t_zero_kelvin;
    within("ceiling temperature scale at 100 K", t0_cold, 1600.0, 160.0);
    within("ceiling temperature scale at 300 K", t0_warm, 1600.0, 160.0);

    let t_grid = geometric_grid(10.0, 300.0, 31);
    let table = sweep_temperature(
        &base,
        &[0.01, 0.013, 0.02],
        &t_grid,
        Engine::PtFull,
        &SeriesOptions::default(),
    );
    let fitted = table
        .t0_fits
        .iter()
        .find(|(e, _)| (e - 0.013).abs() < 1e-9)
        .expect("fit at eps = 0.013")
        .1;
    let knee = |eps: f64| {
        table
            .knees
            .iter()
            .find(|(e, _)| (e - eps).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no knee at eps = {eps}"))
            .1
    };
    let knee_low = knee(0.01);
    let knee_high = knee(0.02);

    println!(
        "criterion 6: epsilon* {:.5}..{:.5}, formula T0 {t0_cold:.0}/{t0_warm:.0} K, \
         fitted T0 {fitted:.0} K, knees {knee_low:.1} K (eps 0.01) / {knee_high:.1} K (eps 0.02)",
        stars[0].1.epsilon_star, stars[4].1.epsilon_star
    );
    within("fitted decay scale", fitted, 1510.0, 151.0);
    within("knee at weak anchoring", knee_low, 40.0, 12.0);
    within("knee at strong anchoring", knee_high, 130.0, 39.0);
}

#[test]
fn criterion_7_invariants_and_determinism() {
    let p = ModelParams::reference();
    let opts = SeriesOptions::default();

    let report = validate(&p, &opts);
    for c in &report.checks {
        println!(
            "criterion 7 [{}] {}: {}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    assert_eq!(report.checks.len(), 15);
    assert!(report.passed(), "invariant checks failed");

    // The anchoring-insensitive combination is an exact eigenvector of the
    // resonant block, independent of the full validation path.
    let d = p.derive().unwrap();
    let c_o = [d.delta_n / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt()];
    let b = [
        [0.0, d.g, 0.0],
        [d.g, 0.0, d.g_prime],
        [0.0, d.g_prime, 0.0],
    ];
    let mut residual = 0.0f64;
    for row in &b {
        let dot: f64 = row.iter().zip(&c_o).map(|(x, y)| x * y).sum();
        residual = residual.max(dot.abs());
    }
    assert!(residual <= 1e-12, "dark-state residual {residual}");

    // The generator algebra and the explicit second-order sums must build
    // the same dressing operators.
    let exc = vibrex::harness::exciton_system(&p, &d, opts.basis).unwrap();
    let m = vibrex::fockspace::m_operator(&exc, &p, &d);
    let ops = vibrex::pt::build_pt_operators(&exc, &m, &d).unwrap();
    let (dh, dw) = delta_matrices(&exc, &m, &d);
    let mut gap_a = 0.0f64;
    let mut gap_w = 0.0f64;
    for i in 0..exc.dim() {
        for j in 0..exc.dim() {
            gap_a = gap_a.max((ops.a[(i, j)] - dh[(i, j)]).abs());
            gap_w = gap_w.max((ops.delta_omega[(i, j)] - dw[(i, j)]).abs());
        }
    }
    assert!(gap_a <= 1e-12, "exciton dressing routes disagree: {gap_a}");
    assert!(gap_w <= 1e-12, "phonon shift routes disagree: {gap_w}");

    // Byte-level determinism of a full subcommand, not just of in-process
    // series values: same configuration, same directory, snapshotted bytes.
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    cli::dispatch(Subcommand::Analytic, &cfg).unwrap();
    let names = ["analytic_optimum.csv", "analytic_interference.csv"];
    let snapshot: Vec<Vec<u8>> = names
        .iter()
        .map(|n| std::fs::read(dir.path().join(n)).unwrap())
        .collect();
    cli::dispatch(Subcommand::Analytic, &cfg).unwrap();
    for (name, before) in names.iter().zip(&snapshot) {
        let after = std::fs::read(dir.path().join(name)).unwrap();
        assert_eq!(before, &after, "{name} differs between reruns");
    }

    println!(
        "criterion 7: 15/15 checks passed, dark residual {residual:.1e}, \
         operator-route gaps {gap_a:.1e} / {gap_w:.1e}, reruns byte-identical"
    );
}
