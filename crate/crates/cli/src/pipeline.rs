use rayon::prelude::*;

use selfsim_core::observables::{self, energy_ratios, EnergyReport};
use selfsim_core::shooting::solve_family;
use selfsim_core::stability::{find_spectrum, SpectrumResult};
use selfsim_core::{ConnectingOrbit, EquationParams};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Profiles of one `(m, l)` with whatever observables were requested.
#[derive(Debug, Clone)]
pub struct Solution {
    pub params: EquationParams,
    pub orbits: Vec<ConnectingOrbit>,
    /// Empty unless `m = 3`.
    pub energies: Vec<EnergyReport>,
    pub ratios: Vec<f64>,
    pub spectra: Vec<selfsim_core::stability::SpectrumResult>,
}

pub fn admissible_params(m: u32, l: u32) -> CliResult<EquationParams> {
    if m % 2 == 0 {
        return Err(CliError::Inadmissible(format!("m = {m}: m must be odd")));
    }
    let params = EquationParams::new(m, l)?;
    if !observables::is_admissible(&params) {
        return Err(CliError::Inadmissible(format!(
            "(m, l) = ({m}, {l}) is not admissible: the oscillation condition requires \
             l > (sqrt(2) - 1)(m - 2)/2 = {:.4}",
            observables::condition_threshold(m)
        )));
    }
    Ok(params)
}

pub fn solve(params: EquationParams, config: &RunConfig) -> CliResult<Solution> {
    let orbits = solve_family(&params, &config.shooter, &config.integrator)?;
    let mut solution = Solution { params, orbits, energies: Vec::new(), ratios: Vec::new(), spectra: Vec::new() };
    if params.m() == 3 {
        solution.energies = solution
            .orbits
            .par_iter()
            .map(|o| observables::energy(o, &config.quadrature))
            .collect::<Result<_, _>>()?;
        if solution.energies.len() > 1 {
            solution.ratios = energy_ratios(&solution.energies)?;
        }
        for (o, e) in solution.orbits.iter_mut().zip(&solution.energies) {
            o.energy = Some(e.energy);
        }
    }
    Ok(solution)
}

/// Spectra of the selected orbits, in order of `n`.
pub fn spectra(solution: &mut Solution, only: Option<usize>, config: &RunConfig) -> CliResult<()> {
    let selected: Vec<&ConnectingOrbit> = solution.orbits.iter().filter(|o| only.map_or(true, |n| o.n == n)).collect();
    solution.spectra = selected
        .par_iter()
        .map(|o| find_spectrum(o, &config.eigen))
        .collect::<Result<Vec<SpectrumResult>, _>>()?;
    Ok(())
}
