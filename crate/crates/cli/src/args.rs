use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "selfsim", version, about = "Self-similar equivariant wave-map profiles")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Dimension m. `check` also takes ranges (`3..9`) and lists (`3,5,7`).
    #[arg(long, global = true)]
    pub m: Option<String>,

    /// Equivariance degree l, same syntax as `--m`.
    #[arg(long, global = true)]
    pub l: Option<String>,

    /// Highest excitation index to solve for.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,

    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,

    #[arg(long = "abs-tol", global = true)]
    pub abs_tol: Option<f64>,

    /// End of the integration range in the light-cone variable.
    #[arg(long, global = true)]
    pub xmax: Option<f64>,

    /// Matching point of the two-sided shooting, in (0, 1).
    #[arg(long = "fit-point", global = true)]
    pub fit_point: Option<f64>,

    #[arg(long = "out-dir", global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// JSON or TOML configuration, or a manifest written by `solve`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long = "show-config", global = true)]
    pub show_config: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve for f_0 ... f_nmax and write profiles.json, table.csv and profile_n.dat.
    Solve,
    /// Unstable modes of f_n (m = 3, l = 1 only); writes spectrum.csv.
    Spectrum {
        /// Single profile index; all of 0..=nmax when omitted.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Admissibility of (m, l) pairs.
    Check,
    /// Energies and successive ratios (m = 3 only).
    Energy,
    /// Plot data and a gnuplot script.
    Export,
}

/// Parses `7`, `3,5,9`, `3..9` or `3..=9`. Ranges are inclusive.
pub fn parse_values(text: &str) -> Result<Vec<u32>, String> {
    let bad = |part: &str| format!("cannot read `{part}` as a non-negative integer");
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u32 = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad(part))?;
            if hi < lo {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(format!("no values in `{text}`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("3..9").unwrap(), vec![3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(parse_values("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_values("3, 5,9").unwrap(), vec![3, 5, 9]);
        assert_eq!(parse_values("4").unwrap(), vec![4]);
        assert!(parse_values("9..3").is_err());
        assert!(parse_values("x").is_err());
        assert!(parse_values("").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
