//! Grid evaluations over particle number: the deviation of the deformed
//! amplitude from the linear one, and the spectrum surface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use super::spectrum::{Spectrum, SpectrumVariant};
use super::steady::{solve_deformed_steady_state_with, undeformed_steady_state, SolverOptions};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n_atoms: f64,
    pub abs_beta: f64,
    pub abs_beta_inf: f64,
    /// `||beta| - |beta_inf||`
    pub deviation: f64,
    /// Solver failure for this row; numeric fields are NaN when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub n_atoms: f64,
    pub omega: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRowError {
    pub n_atoms: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSurface {
    pub variant: SpectrumVariant,
    /// Points in `n_list`-major, `omega_grid`-minor order; failed rows omitted.
    pub points: Vec<SurfacePoint>,
    pub failed: Vec<SurfaceRowError>,
}

pub fn deviation_curve(p_base: &ModelParams, n_list: &[f64]) -> Vec<DeviationRow> {
    let opts = SolverOptions::default();
    n_list
        .par_iter()
        .map(|&n| {
            let row = p_base.with_n_atoms(n).and_then(|p| {
                let s = solve_deformed_steady_state_with(&p, &opts)?;
                Ok((s.beta.norm(), undeformed_steady_state(&p).norm()))
            });
            match row {
                Ok((abs_beta, abs_beta_inf)) => DeviationRow {
                    n_atoms: n,
                    abs_beta,
                    abs_beta_inf,
                    deviation: (abs_beta - abs_beta_inf).abs(),
                    error: None,
                },
                Err(e) => DeviationRow {
                    n_atoms: n,
                    abs_beta: f64::NAN,
                    abs_beta_inf: f64::NAN,
                    deviation: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

pub fn spectrum_surface(
    p_base: &ModelParams,
    n_list: &[f64],
    omega_grid: &[f64],
    variant: SpectrumVariant,
) -> SpectrumSurface {
    let rows: Vec<_> = n_list
        .par_iter()
        .map(|&n| {
            let spec = p_base.with_n_atoms(n).and_then(|p| Spectrum::new(&p));
            (n, spec)
        })
        .collect();

    let mut points = Vec::with_capacity(n_list.len() * omega_grid.len());
    let mut failed = Vec::new();
    for (n, spec) in rows {
        match spec {
            Ok(spec) => points.extend(omega_grid.iter().map(|&w| SurfacePoint {
                n_atoms: n,
                omega: w,
                value: spec.eval(w, variant),
            })),
            Err(error) => failed.push(SurfaceRowError { n_atoms: n, error }),
        }
    }
    SpectrumSurface { variant, points, failed }
}
