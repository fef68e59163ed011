use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use selfsim_core::observables::check_condition;

use crate::args::{CommonArgs, Format};
use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, OutDir, RunManifest};
use crate::pipeline::{self, Solution};

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

fn solve_single(resolved: &Resolved) -> CliResult<(Solution, f64)> {
    let (m, l) = resolved.single()?;
    let params = pipeline::admissible_params(m, l)?;
    let start = Instant::now();
    let solution = pipeline::solve(params, &resolved.config)?;
    Ok((solution, start.elapsed().as_secs_f64()))
}

fn write_profiles(out: &OutDir, solution: &Solution) -> CliResult<()> {
    for o in &solution.orbits {
        out.write(&output::profile_file(o.n), &output::profile_dat(o)?)?;
    }
    Ok(())
}

pub fn solve(args: &CommonArgs, resolved: &Resolved) -> CliResult<String> {
    let (solution, elapsed) = solve_single(resolved)?;
    let manifest = RunManifest::new("solve", &resolved.config, &solution, elapsed);
    let out = OutDir::create(&args.out_dir)?;
    out.write(output::MANIFEST_FILE, &json(&manifest))?;
    let table = output::table_csv(&solution);
    out.write(output::TABLE_FILE, &table)?;
    write_profiles(&out, &solution)?;
    Ok(match args.format {
        Format::Csv => table,
        Format::Json => json(&manifest),
    })
}

pub fn energy(args: &CommonArgs, resolved: &Resolved) -> CliResult<String> {
    let (m, _) = resolved.single()?;
    if m != 3 {
        return Err(CliError::Solver(selfsim_core::Error::EnergyUnavailable(m)));
    }
    let (solution, _) = solve_single(resolved)?;
    Ok(match args.format {
        Format::Csv => output::energy_csv(&solution),
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                energy: f64,
                quadrature_error: f64,
                ratio: Option<f64>,
            }
            let rows: Vec<Row> = solution
                .energies
                .iter()
                .enumerate()
                .map(|(i, e)| Row {
                    n: e.n,
                    energy: e.energy,
                    quadrature_error: e.quadrature_error,
                    ratio: solution.ratios.get(i).copied(),
                })
                .collect();
            json(&rows)
        }
    })
}

pub fn spectrum(args: &CommonArgs, resolved: &Resolved, n: Option<usize>) -> CliResult<String> {
    if resolved.single()? != (3, 1) {
        return Err(CliError::Usage("the spectrum is only implemented for m = 3, l = 1".into()));
    }
    let mut resolved = resolved.clone();
    if let Some(n) = n {
        resolved.config.shooter.n_max = n;
        resolved.config.validate()?;
    }
    let (mut solution, _) = solve_single(&resolved)?;
    pipeline::spectra(&mut solution, n, &resolved.config)?;
    let out = OutDir::create(&args.out_dir)?;
    let table = output::spectrum_csv(&solution);
    out.write(output::SPECTRUM_FILE, &table)?;
    out.write(output::GAUGE_FILE, &output::gauge_csv(&solution))?;
    Ok(match args.format {
        Format::Csv => table,
        Format::Json => json(&solution.spectra),
    })
}

pub fn export(args: &CommonArgs, resolved: &Resolved) -> CliResult<String> {
    let (solution, _) = solve_single(resolved)?;
    let out = OutDir::create(&args.out_dir)?;
    write_profiles(&out, &solution)?;
    let script = out.write(output::GNUPLOT_FILE, &output::gnuplot_script(&solution))?;
    Ok(format!(
        "wrote {} profiles and {}\n",
        solution.orbits.len(),
        script.display()
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub m: u32,
    pub l: u32,
    pub threshold: Option<f64>,
    pub admissible: bool,
    pub zeros_short: Option<usize>,
    pub zeros_long: Option<usize>,
    pub oscillation_check: Option<bool>,
    pub note: String,
}

pub fn check_rows(resolved: &Resolved) -> CliResult<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for &m in &resolved.m {
        for &l in &resolved.l {
            if m % 2 == 0 || m < 3 {
                let note = if m % 2 == 0 { "m must be odd" } else { "m must be at least 3" };
                rows.push(CheckRow {
                    m,
                    l,
                    threshold: None,
                    admissible: false,
                    zeros_short: None,
                    zeros_long: None,
                    oscillation_check: None,
                    note: note.into(),
                });
                continue;
            }
            let r = check_condition(m, l)?;
            let note = if r.admissible == r.oscillation_check { "" } else { "condition and oscillation disagree" };
            rows.push(CheckRow {
                m,
                l,
                threshold: Some(r.threshold),
                admissible: r.admissible,
                zeros_short: Some(r.zeros_short),
                zeros_long: Some(r.zeros_long),
                oscillation_check: Some(r.oscillation_check),
                note: note.into(),
            });
        }
    }
    Ok(rows)
}

pub fn check(args: &CommonArgs, resolved: &Resolved) -> CliResult<String> {
    let rows = check_rows(resolved)?;
    Ok(match args.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let show = |x: Option<String>| x.unwrap_or_default();
            let mut s = String::from("m,l,threshold,admissible,zeros_30,zeros_60,oscillates,note\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.m,
                    r.l,
                    show(r.threshold.map(|t| format!("{t:.4}"))),
                    r.admissible,
                    show(r.zeros_short.map(|z| z.to_string())),
                    show(r.zeros_long.map(|z| z.to_string())),
                    show(r.oscillation_check.map(|b| b.to_string())),
                    r.note
                );
            }
            s
        }
    })
}

pub fn show_config(args: &CommonArgs, resolved: &Resolved) -> CliResult<String> {
    #[derive(Serialize)]
    struct Shown<'a> {
        m: &'a [u32],
        l: &'a [u32],
        #[serde(flatten)]
        config: &'a RunConfig,
    }
    let shown = Shown { m: &resolved.m, l: &resolved.l, config: &resolved.config };
    Ok(match args.format {
        Format::Json => json(&shown),
        Format::Csv => toml::to_string(&shown).map_err(|e| CliError::Usage(e.to_string()))?,
    })
}
