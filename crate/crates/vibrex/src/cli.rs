//! Configuration ingestion, subcommand dispatch, and bit-stable CSV output.
//!
//! Configuration is plain `key = value` text with `#` comments. Every output
//! file opens with a commented header carrying the tool version, the full
//! resolved configuration, and per-column descriptions, so a table can be
//! traced back to its run without external notes. Numbers are written with
//! 12 significant digits and no timestamps; identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::exact::Engine;
use crate::exciton::Basis;
use crate::harness::{
    self, compute_series, crossing_scan, find_max, qubit_coherence, shift_scan, spectrum_compare,
    sweep_epsilon, sweep_temperature, time_grid, HarnessError, SeriesOptions, SweepRow,
};
use crate::params::{ModelParams, ParamError};
use crate::threepath::{hybridize, resonance_condition, transfer_ceiling, ResonanceClass};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Phonon truncation policy: resolved from a tail tolerance or pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NMaxMode {
    Auto(f64),
    Fixed(usize),
}

/// Fully resolved run configuration. Scalar physics inputs mirror
/// [`ModelParams`], with the coupling force kept in pN as entered so the
/// rendered echo reparses to the identical configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0: f64,
    pub phi: f64,
    pub epsilon: f64,
    pub l_sites: usize,
    pub chi_pn: f64,
    pub w_force: f64,
    pub mass: f64,
    pub temperature: f64,
    /// Phonon cutoff override in cm^-1; `None` derives it from `W` and `M`.
    pub omega_c: Option<f64>,
    pub engine: Engine,
    pub basis: Basis,
    pub decoherence: crate::threepath::DecoherenceForm,
    pub t_max_phi: f64,
    pub n_points: usize,
    pub n_max: NMaxMode,
    /// `start:stop:step` anchoring grid for sweeps and shift scans.
    pub eps_grid: (f64, f64, f64),
    /// Temperatures (K) paired with the anchoring sweep.
    pub temp_list: Vec<f64>,
    /// Anchorings paired with the temperature sweep.
    pub eps_list: Vec<f64>,
    /// `start:stop:count` geometric temperature grid.
    pub temp_grid: (f64, f64, usize),
    /// `start:stop:step` coupling-force grid in pN.
    pub chi_grid_pn: (f64, f64, f64),
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ModelParams::reference();
        RunConfig {
            omega0: p.omega0,
            phi: p.phi,
            epsilon: p.epsilon,
            l_sites: p.l_sites,
            chi_pn: 10.0,
            w_force: p.w_force,
            mass: p.mass,
            temperature: p.temperature,
            omega_c: p.omega_c_override,
            engine: Engine::Exact,
            basis: Basis::Analytic,
            decoherence: crate::threepath::DecoherenceForm::Exact,
            t_max_phi: 2000.0,
            n_points: 20001,
            n_max: NMaxMode::Auto(1e-5),
            eps_grid: (0.005, 0.05, 0.001),
            temp_list: vec![100.0, 300.0],
            eps_list: vec![0.010, 0.013, 0.020],
            temp_grid: (10.0, 300.0, 31),
            chi_grid_pn: (0.0, 20.0, 0.5),
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            omega0: self.omega0,
            phi: self.phi,
            epsilon: self.epsilon,
            l_sites: self.l_sites,
            chi: self.chi_pn * 1e-12,
            w_force: self.w_force,
            mass: self.mass,
            temperature: self.temperature,
            omega_c_override: self.omega_c,
        }
    }

    pub fn series_options(&self) -> SeriesOptions {
        let (trunc_tol, n_max) = match self.n_max {
            NMaxMode::Auto(tol) => (tol, None),
            NMaxMode::Fixed(n) => (1e-5, Some(n)),
        };
        SeriesOptions {
            basis: self.basis,
            trunc_tol,
            n_max,
            decoherence: self.decoherence,
        }
    }

    /// Check that the configuration resolves to valid model parameters.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params().validate()?;
        if self.n_points < 2 {
            return Err(ConfigError::BadValue {
                line: 0,
                key: "n_points".into(),
                msg: "time grid needs at least 2 points".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: key `{key}`: {msg}")]
    BadValue { line: usize, key: String, msg: String },
    #[error("config line {line}: expected `key = value`")]
    BadSyntax { line: usize },
    #[error("config file {path}: {msg}")]
    Unreadable { path: String, msg: String },
    #[error(transparent)]
    Param(#[from] ParamError),
}

fn parse_num<T: std::str::FromStr>(
    value: &str,
    key: &str,
    line: usize,
) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        msg: format!("cannot parse `{}`", value.trim()),
    })
}

fn parse_list(value: &str, key: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|v| parse_num::<f64>(v, key, line))
        .collect()
}

fn parse_triple<T: std::str::FromStr + Copy>(
    value: &str,
    key: &str,
    line: usize,
) -> Result<(f64, f64, T), ConfigError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err(ConfigError::BadValue {
            line,
            key: key.to_string(),
            msg: "expected `start:stop:step`".into(),
        });
    }
    Ok((
        parse_num(parts[0], key, line)?,
        parse_num(parts[1], key, line)?,
        parse_num(parts[2], key, line)?,
    ))
}

/// Apply one `key = value` assignment. Flag overrides reuse this path with
/// `line = 0`.
pub fn apply_kv(
    cfg: &mut RunConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    let value = value.trim();
    match key {
        "omega0" => cfg.omega0 = parse_num(value, key, line)?,
        "phi" => cfg.phi = parse_num(value, key, line)?,
        "epsilon" => cfg.epsilon = parse_num(value, key, line)?,
        "L" => cfg.l_sites = parse_num(value, key, line)?,
        "chi_pN" => cfg.chi_pn = parse_num(value, key, line)?,
        "W" => cfg.w_force = parse_num(value, key, line)?,
        "M" => cfg.mass = parse_num(value, key, line)?,
        "temperature_K" => cfg.temperature = parse_num(value, key, line)?,
        "omega_c" => {
            cfg.omega_c = if value == "derived" {
                None
            } else {
                Some(parse_num(value, key, line)?)
            }
        }
        "engine" => {
            cfg.engine = match value {
                "exact" => Engine::Exact,
                "pt" => Engine::PtFull,
                "pt-diagonal" => Engine::PtDiagonal,
                "three-path" => Engine::ThreePath,
                _ => {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        msg: format!(
                            "`{value}` is not one of exact, pt, pt-diagonal, three-path"
                        ),
                    })
                }
            }
        }
        "basis" => {
            cfg.basis = match value {
                "analytic" => Basis::Analytic,
                "numeric" => Basis::Numeric,
                _ => {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        msg: format!("`{value}` is not one of analytic, numeric"),
                    })
                }
            }
        }
        "decoherence" => {
            cfg.decoherence = match value {
                "exact" => crate::threepath::DecoherenceForm::Exact,
                "simplified" => crate::threepath::DecoherenceForm::Simplified,
                _ => {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        msg: format!("`{value}` is not one of exact, simplified"),
                    })
                }
            }
        }
        "t_max_phi" => cfg.t_max_phi = parse_num(value, key, line)?,
        "n_points" => cfg.n_points = parse_num(value, key, line)?,
        "n_max" => {
            cfg.n_max = if value == "auto" {
                NMaxMode::Auto(1e-5)
            } else if let Some(tol) = value.strip_prefix("auto:") {
                NMaxMode::Auto(parse_num(tol, key, line)?)
            } else {
                NMaxMode::Fixed(parse_num(value, key, line)?)
            }
        }
        "eps_grid" => cfg.eps_grid = parse_triple(value, key, line)?,
        "temp_list" => cfg.temp_list = parse_list(value, key, line)?,
        "eps_list" => cfg.eps_list = parse_list(value, key, line)?,
        "temp_grid" => cfg.temp_grid = parse_triple(value, key, line)?,
        "chi_grid_pN" => cfg.chi_grid_pn = parse_triple(value, key, line)?,
        "out_dir" => cfg.out_dir = PathBuf::from(value),
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

/// Parse `key = value` text into a configuration, starting from defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::BadSyntax { line: line_no })?;
        apply_kv(&mut cfg, key.trim(), value, line_no)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn render_f64(x: f64) -> String {
    // Both forms print the shortest digits that reparse to the same bits;
    // scientific notation keeps extreme magnitudes legible.
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn render_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|&x| render_f64(x))
        .collect::<Vec<_>>()
        .join(",")
}

/// Render the configuration as canonical `key = value` text; reparsing the
/// result yields an identical configuration.
pub fn render_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "omega0 = {}", render_f64(cfg.omega0));
    let _ = writeln!(s, "phi = {}", render_f64(cfg.phi));
    let _ = writeln!(s, "epsilon = {}", render_f64(cfg.epsilon));
    let _ = writeln!(s, "L = {}", cfg.l_sites);
    let _ = writeln!(s, "chi_pN = {}", render_f64(cfg.chi_pn));
    let _ = writeln!(s, "W = {}", render_f64(cfg.w_force));
    let _ = writeln!(s, "M = {}", render_f64(cfg.mass));
    let _ = writeln!(s, "temperature_K = {}", render_f64(cfg.temperature));
    match cfg.omega_c {
        Some(w) => {
            let _ = writeln!(s, "omega_c = {}", render_f64(w));
        }
        None => {
            let _ = writeln!(s, "omega_c = derived");
        }
    }
    let _ = writeln!(s, "engine = {}", cfg.engine);
    let _ = writeln!(
        s,
        "basis = {}",
        match cfg.basis {
            Basis::Analytic => "analytic",
            Basis::Numeric => "numeric",
        }
    );
    let _ = writeln!(
        s,
        "decoherence = {}",
        match cfg.decoherence {
            crate::threepath::DecoherenceForm::Exact => "exact",
            crate::threepath::DecoherenceForm::Simplified => "simplified",
        }
    );
    let _ = writeln!(s, "t_max_phi = {}", render_f64(cfg.t_max_phi));
    let _ = writeln!(s, "n_points = {}", cfg.n_points);
    match cfg.n_max {
        NMaxMode::Auto(tol) => {
            let _ = writeln!(s, "n_max = auto:{}", render_f64(tol));
        }
        NMaxMode::Fixed(n) => {
            let _ = writeln!(s, "n_max = {n}");
        }
    }
    let _ = writeln!(
        s,
        "eps_grid = {}:{}:{}",
        render_f64(cfg.eps_grid.0),
        render_f64(cfg.eps_grid.1),
        render_f64(cfg.eps_grid.2)
    );
    let _ = writeln!(s, "temp_list = {}", render_list(&cfg.temp_list));
    let _ = writeln!(s, "eps_list = {}", render_list(&cfg.eps_list));
    let _ = writeln!(
        s,
        "temp_grid = {}:{}:{}",
        render_f64(cfg.temp_grid.0),
        render_f64(cfg.temp_grid.1),
        cfg.temp_grid.2
    );
    let _ = writeln!(
        s,
        "chi_grid_pN = {}:{}:{}",
        render_f64(cfg.chi_grid_pn.0),
        render_f64(cfg.chi_grid_pn.1),
        render_f64(cfg.chi_grid_pn.2)
    );
    let _ = writeln!(s, "out_dir = {}", cfg.out_dir.display());
    s
}

/// Arithmetic grid `start, start+step, ...` up to `stop` inclusive within
/// half a step of rounding slack.
pub fn arith_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop >= start);
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Geometric grid of `count` points from `start` to `stop` inclusive.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    assert!(start > 0.0 && stop > start && count >= 2);
    let ratio = (stop / start).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| start * (i as f64 * ratio).exp())
        .collect()
}

/// Fixed-width scientific format, 12 significant digits. Negative zero is
/// folded onto plain zero so reruns cannot differ in sign bits alone.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Spectrum,
    Crossing,
    Shifts,
    Propagate,
    SweepEps,
    SweepTemp,
    Analytic,
    Validate,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Crossing => "crossing",
            Subcommand::Shifts => "shifts",
            Subcommand::Propagate => "propagate",
            Subcommand::SweepEps => "sweep-eps",
            Subcommand::SweepTemp => "sweep-temp",
            Subcommand::Analytic => "analytic",
            Subcommand::Validate => "validate",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(String),
    #[error("validation failed: {failed} of {total} checks")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Validation { .. } => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o failure: {e}"))
    }
}

/// Commented header block shared by every output file.
fn header(
    cmd: Subcommand,
    cfg: &RunConfig,
    columns: &[(&str, &str)],
    extra: &[String],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vibrex {TOOL_VERSION}");
    let _ = writeln!(s, "# subcommand: {}", cmd.name());
    let _ = writeln!(s, "# config:");
    for line in render_config(cfg).lines() {
        let _ = writeln!(s, "#   {line}");
    }
    let _ = writeln!(s, "# columns:");
    for (name, desc) in columns {
        let _ = writeln!(s, "#   {name}: {desc}");
    }
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(
        s,
        "{}",
        columns.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",")
    );
    s
}

/// CSV cells must stay comma- and newline-free.
fn sanitize(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

fn write_file(cfg: &RunConfig, name: &str, content: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

fn run_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let table = spectrum_compare(&cfg.params(), &cfg.series_options())?;
    let columns = [
        ("e_rel_cm1", "exact level minus omega0, cm^-1"),
        ("delta_cm1", "exact minus dressed-ladder energy, cm^-1"),
        ("e_fold_cm1", "exact level folded into one phonon period"),
        ("parent", "exciton state of the paired ladder level"),
        ("n_phonon", "phonon quantum number of the paired level"),
        ("flagged", "defect exceeds half the local level spacing"),
    ];
    let extra = vec![
        format!("n_max = {}", table.n_max),
        format!(
            "abs-delta quantiles: median = {}, p90 = {}, max = {}",
            fmt_sig(table.abs_delta_median),
            fmt_sig(table.abs_delta_p90),
            fmt_sig(table.abs_delta_max)
        ),
    ];
    let mut s = header(Subcommand::Spectrum, cfg, &columns, &extra);
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_sig(r.e_rel),
            fmt_sig(r.delta),
            fmt_sig(r.e_fold),
            r.label,
            r.n,
            r.flagged
        );
    }
    let path = write_file(cfg, "spectrum.csv", &s)?;
    println!(
        "spectrum: {} levels paired, median |delta| = {}, max = {} -> {}",
        table.rows.len(),
        fmt_sig(table.abs_delta_median),
        fmt_sig(table.abs_delta_max),
        path.display()
    );
    Ok(vec![path])
}

fn run_crossing(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let grid = arith_grid(cfg.chi_grid_pn.0, cfg.chi_grid_pn.1, cfg.chi_grid_pn.2);
    let rows = crossing_scan(&cfg.params(), &grid, &cfg.series_options())?;
    let columns = [
        ("chi_pN", "coupling force, pN"),
        ("eta_cm1", "band-centre coupling eta, cm^-1"),
        ("engine", "exact or dressed ladder"),
        ("idx", "level index within the window, ascending"),
        ("e_rel_cm1", "level energy minus omega0, cm^-1"),
    ];
    let extra = vec![format!(
        "window |E - omega0| <= 3 Omega, n_max = {}",
        harness::CROSSING_N_MAX
    )];
    let mut s = header(Subcommand::Crossing, cfg, &columns, &extra);
    for r in &rows {
        for (i, &e) in r.exact_levels.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},exact,{},{}",
                fmt_sig(r.chi_pn),
                fmt_sig(r.eta),
                i,
                fmt_sig(e)
            );
        }
        for (i, &e) in r.pt_levels.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},dressed,{},{}",
                fmt_sig(r.chi_pn),
                fmt_sig(r.eta),
                i,
                fmt_sig(e)
            );
        }
    }
    let path = write_file(cfg, "crossing.csv", &s)?;
    println!(
        "crossing: {} force points scanned -> {}",
        rows.len(),
        path.display()
    );
    Ok(vec![path])
}

fn run_shifts(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let grid = arith_grid(cfg.eps_grid.0, cfg.eps_grid.1, cfg.eps_grid.2);
    let rows = shift_scan(&cfg.params(), &grid, &cfg.series_options())?;
    let columns = [
        ("epsilon", "anchoring bond ratio"),
        ("state", "parent exciton state"),
        ("delta_omega_cm1", "diagonal exciton shift, cm^-1"),
        (
            "dress_defect_cm1",
            "dressed energy minus bare minus diagonal shift, cm^-1",
        ),
        ("delta_Omega_cm1", "phonon frequency shift, cm^-1"),
        ("omega_hat_plus_cm1", "dressed + energy minus omega0, cm^-1"),
        (
            "omega_hat_minus_cm1",
            "dressed - energy minus omega0, cm^-1",
        ),
    ];
    let mut s = header(Subcommand::Shifts, cfg, &columns, &[]);
    for r in &rows {
        for e in &r.entries {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                fmt_sig(r.epsilon),
                e.label,
                fmt_sig(e.delta_omega),
                fmt_sig(e.dress_defect),
                fmt_sig(e.delta_omega_nu),
                fmt_sig(r.omega_hat_plus_rel),
                fmt_sig(r.omega_hat_minus_rel)
            );
        }
    }
    let path = write_file(cfg, "shifts.csv", &s)?;
    println!(
        "shifts: {} anchoring points scanned -> {}",
        rows.len(),
        path.display()
    );
    Ok(vec![path])
}

fn run_propagate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let times = time_grid(cfg.t_max_phi, cfg.n_points);
    let series = compute_series(&cfg.params(), cfg.engine, &times, &cfg.series_options())?;
    let report = find_max(&series)?;
    let columns = [
        ("t_phi", "time in units of Phi^-1"),
        ("re_G", "real part of the transfer amplitude"),
        ("im_G", "imaginary part of the transfer amplitude"),
        ("abs_G", "modulus of the transfer amplitude"),
    ];
    let mut extra = vec![format!("engine = {}", series.engine)];
    if let (Some(n), Some(tail)) = (series.n_max, series.tail_mass) {
        extra.push(format!("n_max = {n}, thermal tail mass = {}", fmt_sig(tail)));
    }
    if series.dropped_weight > 0.0 {
        extra.push(format!(
            "pruned phasor weight = {}",
            fmt_sig(series.dropped_weight)
        ));
    }
    for w in &series.warnings {
        extra.push(format!("warning: {}", sanitize(w)));
    }
    extra.push(format!(
        "max |G| = {} at t = {} Phi^-1",
        fmt_sig(report.g_m),
        fmt_sig(report.t_m)
    ));
    let mut s = header(Subcommand::Propagate, cfg, &columns, &extra);
    for (i, &t) in series.times_phi.iter().enumerate() {
        let v = series.values[i];
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_sig(t),
            fmt_sig(v.re),
            fmt_sig(v.im),
            fmt_sig(v.norm())
        );
    }
    let name = format!("propagate_{}.csv", series.engine);
    let path = write_file(cfg, &name, &s)?;
    println!(
        "propagate [{}]: max |G| = {} at t = {} Phi^-1 -> {}",
        series.engine,
        fmt_sig(report.g_m),
        fmt_sig(report.t_m),
        path.display()
    );
    Ok(vec![path])
}

fn sweep_row_cells(r: &SweepRow) -> String {
    match &r.outcome {
        Ok(m) => format!(
            "{},{},{},{},{},{},{},{},",
            fmt_sig(m.g_m),
            fmt_sig(m.t_m),
            fmt_sig(r.window_phi),
            fmt_sig(r.alpha),
            fmt_sig(r.t_f_phi),
            fmt_sig(r.t_m_over_t_f.unwrap_or(f64::NAN)),
            m.double_maximum,
            m.local_maxima.len()
        ),
        Err(e) => format!(",,{},,,,,,{}", fmt_sig(r.window_phi), sanitize(e)),
    }
}

const SWEEP_COLUMNS: [(&str, &str); 11] = [
    ("temperature_K", "temperature, K"),
    ("epsilon", "anchoring bond ratio"),
    ("g_m", "maximum of |G| over the search window"),
    ("t_m_phi", "time of the maximum, Phi^-1"),
    ("window_phi", "search window length, Phi^-1"),
    ("alpha", "beat ratio W_s / W_f of the closed-form pair"),
    ("t_f_phi", "fast-beat period, Phi^-1"),
    ("t_m_over_t_f", "transfer time in fast-beat periods"),
    ("double_max", "two leading maxima within 0.05"),
    ("n_local_max", "interior local maxima above 0.5"),
    ("error", "per-row failure, empty when the row succeeded"),
];

fn run_sweep_eps(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let grid = arith_grid(cfg.eps_grid.0, cfg.eps_grid.1, cfg.eps_grid.2);
    let table = sweep_epsilon(
        &cfg.params(),
        &grid,
        &cfg.temp_list,
        cfg.engine,
        &cfg.series_options(),
    );
    let mut s = header(Subcommand::SweepEps, cfg, &SWEEP_COLUMNS, &[]);
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_sig(r.temperature),
            fmt_sig(r.epsilon),
            sweep_row_cells(r)
        );
    }
    let path = write_file(cfg, "sweep_eps.csv", &s)?;
    for &t in &cfg.temp_list {
        let block: Vec<&SweepRow> = table
            .rows
            .iter()
            .filter(|r| r.temperature == t && r.outcome.is_ok())
            .collect();
        if let (Some(lo), Some(hi)) = (
            block.iter().min_by(|a, b| {
                let (x, y) = (
                    a.outcome.as_ref().unwrap().g_m,
                    b.outcome.as_ref().unwrap().g_m,
                );
                x.partial_cmp(&y).unwrap()
            }),
            block.iter().max_by(|a, b| {
                let (x, y) = (
                    a.outcome.as_ref().unwrap().g_m,
                    b.outcome.as_ref().unwrap().g_m,
                );
                x.partial_cmp(&y).unwrap()
            }),
        ) {
            println!(
                "sweep-eps [{} K]: min G_M = {} at eps = {}, max G_M = {} at eps = {}",
                t,
                fmt_sig(lo.outcome.as_ref().unwrap().g_m),
                lo.epsilon,
                fmt_sig(hi.outcome.as_ref().unwrap().g_m),
                hi.epsilon
            );
        }
    }
    println!("sweep-eps: {} rows -> {}", table.rows.len(), path.display());
    Ok(vec![path])
}

fn run_sweep_temp(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let grid = geometric_grid(cfg.temp_grid.0, cfg.temp_grid.1, cfg.temp_grid.2);
    let table = sweep_temperature(
        &cfg.params(),
        &cfg.eps_list,
        &grid,
        cfg.engine,
        &cfg.series_options(),
    );
    let mut extra = Vec::new();
    for &(eps, t0) in &table.t0_fits {
        extra.push(format!(
            "quadratic-decay fit: epsilon = {eps}, T0 = {} K",
            fmt_sig(t0)
        ));
    }
    for &(eps, knee) in &table.knees {
        extra.push(format!(
            "knee estimate: epsilon = {eps}, T* = {} K",
            fmt_sig(knee)
        ));
    }
    let mut s = header(Subcommand::SweepTemp, cfg, &SWEEP_COLUMNS, &extra);
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_sig(r.temperature),
            fmt_sig(r.epsilon),
            sweep_row_cells(r)
        );
    }
    let path = write_file(cfg, "sweep_temp.csv", &s)?;
    for line in &extra {
        println!("sweep-temp: {line}");
    }
    println!("sweep-temp: {} rows -> {}", table.rows.len(), path.display());
    Ok(vec![path])
}

fn run_analytic(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.params();

    let optimum_columns = [
        ("temperature_K", "temperature, K"),
        ("epsilon_star", "anchoring that balances splitting and damping"),
        ("n_match", "occupation scale of the optimum"),
        ("g_m_star", "predicted transfer ceiling at epsilon_star"),
        ("t_zero_K", "temperature scale of the quadratic decay, K"),
    ];
    let mut s = header(Subcommand::Analytic, cfg, &optimum_columns, &[]);
    let mut summary = Vec::new();
    for &t in &cfg.temp_list {
        let q = ModelParams {
            temperature: t,
            ..p.clone()
        };
        let d = q.derive().map_err(HarnessError::from)?;
        let ceiling = transfer_ceiling(&q, &d).map_err(HarnessError::from)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_sig(t),
            fmt_sig(ceiling.epsilon_star),
            fmt_sig(ceiling.n_match),
            fmt_sig(ceiling.g_m_star),
            fmt_sig(ceiling.t_zero_kelvin)
        );
        summary.push(format!(
            "analytic [{t} K]: epsilon* = {}, G_M* = {}, T0 = {} K",
            fmt_sig(ceiling.epsilon_star),
            fmt_sig(ceiling.g_m_star),
            fmt_sig(ceiling.t_zero_kelvin)
        ));
    }
    let optimum_path = write_file(cfg, "analytic_optimum.csv", &s)?;

    let interference_columns = [
        ("epsilon", "anchoring bond ratio"),
        ("alpha", "beat ratio W_s / W_f"),
        ("w_slow_cm1", "slow beat frequency, cm^-1"),
        ("w_fast_cm1", "fast beat frequency, cm^-1"),
        ("omega_hat_plus_cm1", "dressed + energy minus omega0"),
        ("omega_hat_minus_cm1", "dressed - energy minus omega0"),
        ("dOmega_plus_cm1", "phonon shift of the + path"),
        ("dOmega_minus_cm1", "phonon shift of the - path"),
        ("resonance", "interference class of alpha, window 0.01"),
        ("res_q", "resonance order q, empty when none"),
        ("res_p", "resonance order p, empty when none"),
    ];
    let mut s2 = header(Subcommand::Analytic, cfg, &interference_columns, &[]);
    let d = p.derive().map_err(HarnessError::from)?;
    for &eps in arith_grid(cfg.eps_grid.0, cfg.eps_grid.1, cfg.eps_grid.2).iter() {
        let q = ModelParams {
            epsilon: eps,
            ..p.clone()
        };
        let model = hybridize(&q, &d);
        let (class, qq, pp) = match resonance_condition(model.alpha, 0.01) {
            ResonanceClass::Destructive { q } => ("destructive", q.to_string(), String::new()),
            ResonanceClass::Constructive { q, p } => {
                ("constructive", q.to_string(), p.to_string())
            }
            ResonanceClass::None => ("none", String::new(), String::new()),
        };
        let _ = writeln!(
            s2,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(eps),
            fmt_sig(model.alpha),
            fmt_sig(model.w_slow),
            fmt_sig(model.w_fast),
            fmt_sig(model.omega_hat_plus_rel),
            fmt_sig(model.omega_hat_minus_rel),
            fmt_sig(model.phonon_shift_plus),
            fmt_sig(model.phonon_shift_minus),
            class,
            qq,
            pp
        );
    }
    let interference_path = write_file(cfg, "analytic_interference.csv", &s2)?;

    for line in summary {
        println!("{line}");
    }
    println!(
        "analytic: tables -> {}, {}",
        optimum_path.display(),
        interference_path.display()
    );
    Ok(vec![optimum_path, interference_path])
}

fn run_validate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let report = harness::validate(&cfg.params(), &cfg.series_options());
    let columns = [
        ("check", "name of the invariant check"),
        ("passed", "true when the check held"),
        ("detail", "measured values behind the verdict"),
    ];
    let mut s = header(Subcommand::Validate, cfg, &columns, &[]);
    for c in &report.checks {
        let _ = writeln!(s, "{},{},{}", c.name, c.passed, sanitize(&c.detail));
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let path = write_file(cfg, "validate.csv", &s)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!(
        "validate: {} of {} checks passed -> {}",
        report.checks.len() - failed,
        report.checks.len(),
        path.display()
    );
    if failed > 0 {
        return Err(CliError::Validation {
            failed,
            total: report.checks.len(),
        });
    }
    Ok(vec![path])
}

/// Run one subcommand against a resolved configuration, writing its output
/// files under `out_dir` and echoing a short summary to stdout.
pub fn dispatch(cmd: Subcommand, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    match cmd {
        Subcommand::Spectrum => run_spectrum(cfg),
        Subcommand::Crossing => run_crossing(cfg),
        Subcommand::Shifts => run_shifts(cfg),
        Subcommand::Propagate => run_propagate(cfg),
        Subcommand::SweepEps => run_sweep_eps(cfg),
        Subcommand::SweepTemp => run_sweep_temp(cfg),
        Subcommand::Analytic => run_analytic(cfg),
        Subcommand::Validate => run_validate(cfg),
    }
}

/// Propagate a donor coherence through a computed amplitude; kept here so
/// the qubit-layer relation is reachable from scripting over CSV output.
pub fn coherence_at(g_re: f64, g_im: f64, sigma_re: f64, sigma_im: f64) -> Result<(f64, f64), CliError> {
    let out = qubit_coherence(
        Complex64::new(g_re, g_im),
        Complex64::new(sigma_re, sigma_im),
    )?;
    Ok((out.re, out.im))
}
