//! Run manifest and the plain-text artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use selfsim_core::ConnectingOrbit;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::Solution;

pub const MANIFEST_FILE: &str = "profiles.json";
pub const TABLE_FILE: &str = "table.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const GAUGE_FILE: &str = "gauge.csv";
pub const GNUPLOT_FILE: &str = "profiles.gp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub m: u32,
    pub l: u32,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub n: usize,
    pub a: f64,
    pub b_rho: f64,
    /// Bisected light-cone coefficient (unnormalized, positive).
    pub beta: f64,
    pub beta_x: f64,
    pub energy: Option<f64>,
    pub energy_error: Option<f64>,
    /// `E_n / E_{n+1}`.
    pub energy_ratio: Option<f64>,
    pub lambda2: Option<Vec<f64>>,
    pub crossings: usize,
    pub mismatch: f64,
    pub newton_iterations: usize,
    /// Relative deviation from the endpoint expansions, `[origin, light cone]`.
    pub boundary_residuals: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub asymptotic_energy_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub params: ParamsRecord,
    pub n_max: usize,
    pub config: RunConfig,
    pub orbits: Vec<OrbitRecord>,
    pub diagnostics: Diagnostics,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, solution: &Solution, elapsed_seconds: f64) -> Self {
        let p = solution.params;
        let orbits = solution
            .orbits
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let (origin, cone) = o.boundary_residuals();
                OrbitRecord {
                    n: o.n,
                    a: o.a,
                    b_rho: o.b_rho,
                    beta: o.beta_n,
                    beta_x: o.beta_x,
                    energy: solution.energies.get(i).map(|e| e.energy),
                    energy_error: solution.energies.get(i).map(|e| e.quadrature_error),
                    energy_ratio: solution.ratios.get(i).copied(),
                    lambda2: solution.spectra.iter().find(|s| s.n == o.n).map(|s| s.eigenvalues.clone()),
                    crossings: o.crossing_count(),
                    mismatch: o.mismatch,
                    newton_iterations: o.newton_iterations,
                    boundary_residuals: [origin, cone],
                }
            })
            .collect();
        Self {
            tool: "selfsim".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
            params: ParamsRecord { m: p.m(), l: p.l(), k: p.k() },
            n_max: config.shooter.n_max,
            config: *config,
            orbits,
            diagnostics: Diagnostics {
                threads: rayon::current_num_threads(),
                elapsed_seconds,
                asymptotic_energy_ratio: (p.m() == 3 && p.l() == 1)
                    .then(selfsim_core::observables::asymptotic_energy_ratio),
            },
        }
    }
}

/// Nine significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn table_csv(solution: &Solution) -> String {
    let mut s = String::from("n,a,b,E,ratio\n");
    for (i, o) in solution.orbits.iter().enumerate() {
        let e = solution.energies.get(i).map(|r| r.energy);
        let ratio = solution.ratios.get(i).copied();
        let _ = writeln!(s, "{},{},{},{},{}", o.n, sci(o.a), sci(o.b_rho), opt(e), opt(ratio));
    }
    s
}

pub fn energy_csv(solution: &Solution) -> String {
    let mut s = String::from("n,E,quadrature_error,ratio\n");
    for (i, r) in solution.energies.iter().enumerate() {
        let ratio = solution.ratios.get(i).copied();
        let _ = writeln!(s, "{},{},{},{}", r.n, sci(r.energy), sci(r.quadrature_error), opt(ratio));
    }
    s
}

pub fn spectrum_csv(solution: &Solution) -> String {
    let mut s = String::from("n,k,lambda2\n");
    for sp in &solution.spectra {
        for (k, l2) in sp.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", sp.n, k + 1, sci(*l2));
        }
    }
    s
}

pub fn gauge_csv(solution: &Solution) -> String {
    let mut s = String::from("n,gauge_residual,gauge_zero_count,scan_max\n");
    for sp in &solution.spectra {
        let _ = writeln!(s, "{},{},{},{}", sp.n, sci(sp.gauge_residual), sp.gauge_zero_count, sci(sp.scan_max));
    }
    s
}

/// Sample abscissae for the profile files: logarithmic near both ends,
/// uniform in between.
fn profile_grid() -> Vec<f64> {
    let ends: Vec<f64> = (0..=30).map(|i| 10f64.powf(-6.0 + 0.1 * f64::from(i))).collect();
    let mut grid: Vec<f64> = ends.iter().copied().filter(|&r| r < 1e-3).collect();
    grid.extend((1..1000).map(|i| f64::from(i) / 1000.0));
    grid.extend(ends.iter().rev().filter(|&&d| d < 1e-3).map(|d| 1.0 - d));
    grid
}

pub fn profile_dat(orbit: &ConnectingOrbit) -> CliResult<String> {
    let p = orbit.params;
    let mut s = format!("# m = {}, l = {}, n = {}, a = {}, b = {}\n# rho f df/drho\n", p.m(), p.l(), orbit.n, sci(orbit.a), sci(orbit.b_rho));
    for rho in profile_grid() {
        let st = orbit.state_rho(rho)?;
        let _ = writeln!(s, "{rho:.12e} {:.12e} {:.12e}", st.u, st.du);
    }
    Ok(s)
}

pub fn profile_file(n: usize) -> String {
    format!("profile_{n}.dat")
}

pub fn gnuplot_script(solution: &Solution) -> String {
    let p = solution.params;
    let mut s = format!(
        "set title 'm = {}, l = {}'\nset xlabel 'rho'\nset ylabel 'f'\nset key left top\nset xrange [0:1]\nplot pi/2 with lines dashtype 2 title 'pi/2'",
        p.m(),
        p.l()
    );
    for o in &solution.orbits {
        let _ = write!(s, ", \\\n     '{}' using 1:2 with lines title 'f_{}'", profile_file(o.n), o.n);
    }
    s.push('\n');
    s
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
