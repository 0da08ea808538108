use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fluctuation::{fluctuation_coeffs, xi, FluctuationCoeffs};
use super::params::ModelParams;
use super::steady::{solve_deformed_steady_state_with, SolverOptions, SteadyState};
use crate::error::{Error, Result};

/// Normalization of the fluctuation spectrum.
///
/// `Paper` is `|B|^2 / |Xi(w)|^2`. `Physical` restores the `2 Gamma`
/// strength of the vacuum input noise, `2 Gamma |B|^2 / |Xi(w)|^2`, whose
/// integral over `w / 2 pi` is the stationary fluctuation occupation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumVariant {
    #[default]
    Paper,
    Physical,
}

impl fmt::Display for SpectrumVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumVariant::Paper => "paper",
            SpectrumVariant::Physical => "physical",
        })
    }
}

impl FromStr for SpectrumVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SpectrumVariant::Paper),
            "physical" => Ok(SpectrumVariant::Physical),
            other => Err(Error::InvalidParams(format!("unknown spectrum variant `{other}` (expected paper|physical)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub variant: SpectrumVariant,
}

/// Linearized spectrum around a solved, stable steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub params: ModelParams,
    pub steady: SteadyState,
    pub coeffs: FluctuationCoeffs,
}

impl Spectrum {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Self::with_options(p, &SolverOptions::default())
    }

    pub fn with_options(p: &ModelParams, opts: &SolverOptions) -> Result<Self> {
        let steady = solve_deformed_steady_state_with(p, opts)?.require_stable()?;
        let coeffs = fluctuation_coeffs(p, steady.beta);
        Ok(Spectrum { params: *p, steady, coeffs })
    }

    pub fn xi(&self, omega: f64) -> Complex64 {
        xi(&self.coeffs, omega)
    }

    pub fn eval(&self, omega: f64, variant: SpectrumVariant) -> f64 {
        let s = self.coeffs.b_coef.norm_sqr() / self.xi(omega).norm_sqr();
        match variant {
            SpectrumVariant::Paper => s,
            SpectrumVariant::Physical => 2.0 * self.params.big_gamma() * s,
        }
    }

    pub fn table(&self, omega_grid: &[f64], variant: SpectrumVariant) -> SpectrumTable {
        SpectrumTable {
            omega_grid: omega_grid.to_vec(),
            values: omega_grid.iter().map(|&w| self.eval(w, variant)).collect(),
            variant,
        }
    }
}

pub fn spectrum_at(p: &ModelParams, omega: f64, variant: SpectrumVariant) -> Result<f64> {
    Ok(Spectrum::new(p)?.eval(omega, variant))
}
