//! Transfer ceiling against temperature at three anchorings, with the
//! quadratic-decay fit G_M ~ 1 - (T/T0)^2 and the knee where the global
//! maximum jumps between interference branches.
//!
//! Uses the dressed-state engine over a 31-point geometric grid; about a
//! minute.

use vibrex::cli::geometric_grid;
use vibrex::exact::Engine;
use vibrex::harness::{sweep_temperature, SeriesOptions};
use vibrex::params::ModelParams;

fn main() {
    let base = ModelParams::reference();
    let t_grid = geometric_grid(10.0, 300.0, 31);
    let table = sweep_temperature(
        &base,
        &[0.01, 0.013, 0.02],
        &t_grid,
        Engine::PtFull,
        &SeriesOptions::default(),
    );

    for eps in [0.01, 0.013, 0.02] {
        println!("eps = {eps}:");
        for r in table.rows.iter().filter(|r| r.epsilon == eps) {
            if r.temperature == 10.0
                || (r.temperature - 100.0).abs() < 6.0
                || (r.temperature - 300.0).abs() < 1e-6
            {
                let m = r.outcome.as_ref().unwrap();
                println!(
                    "  T = {:5.1} K: G_M = {:.4} at t = {:6.1} Phi^-1",
                    r.temperature, m.g_m, m.t_m
                );
            }
        }
        if let Some((_, t0)) = table.t0_fits.iter().find(|(e, _)| *e == eps) {
            println!("  quadratic-decay fit: T0 = {t0:.0} K");
        }
        if let Some((_, knee)) = table.knees.iter().find(|(e, _)| *e == eps) {
            println!("  branch-switch knee:  T* = {knee:.1} K");
        }
    }
}
