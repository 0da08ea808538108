use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One condensate/laser configuration. All rates are in units of the
/// one-atom linewidth `gamma`, which is 1 unless a test checks scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    delta: f64,
    g: f64,
    gamma: f64,
    n_atoms: f64,
    eta_override: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    delta: f64,
    g: f64,
    #[serde(default = "one")]
    gamma: f64,
    n_atoms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_override: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let p = ModelParams::new(raw.delta, raw.g, raw.gamma, raw.n_atoms)?;
        match raw.eta_override {
            Some(eta) => p.with_eta(eta),
            None => Ok(p),
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            delta: p.delta,
            g: p.g,
            gamma: p.gamma,
            n_atoms: p.n_atoms,
            eta_override: p.eta_override,
        }
    }
}

/// Quantities fixed by [`ModelParams`]: the collective damping rate and the
/// deformation strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub big_gamma: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(delta: f64, g: f64, gamma: f64, n_atoms: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("delta must be finite, got {delta}")));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParams(format!("g must be finite and >= 0, got {g}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be finite and > 0, got {gamma}")));
        }
        if !(n_atoms.is_finite() && n_atoms >= 2.0) {
            return Err(Error::InvalidParams(format!("n_atoms must be finite and >= 2, got {n_atoms}")));
        }
        Ok(ModelParams { delta, g, gamma, n_atoms, eta_override: None })
    }

    /// Same configuration with `gamma = 1`.
    pub fn unit(delta: f64, g: f64, n_atoms: f64) -> Result<Self> {
        Self::new(delta, g, 1.0, n_atoms)
    }

    /// Forces the deformation parameter, decoupling it from `1/N`.
    ///
    /// `eta = 0` gives the Bogolubov (undeformed) limit at finite `N`; the
    /// continuation solver also walks through intermediate values.
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && (0.0..=0.5).contains(&eta)) {
            return Err(Error::InvalidParams(format!("eta must lie in [0, 0.5], got {eta}")));
        }
        self.eta_override = Some(eta);
        Ok(self)
    }

    pub fn with_n_atoms(self, n_atoms: f64) -> Result<Self> {
        let p = Self::new(self.delta, self.g, self.gamma, n_atoms)?;
        match self.eta_override {
            Some(eta) => p.with_eta(eta),
            None => Ok(p),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_atoms(&self) -> f64 {
        self.n_atoms
    }

    pub fn eta_override(&self) -> Option<f64> {
        self.eta_override
    }

    /// Effective deformation parameter: `1/N` unless overridden.
    pub fn eta(&self) -> f64 {
        self.eta_override.unwrap_or(1.0 / self.n_atoms)
    }

    pub fn big_gamma(&self) -> f64 {
        self.gamma * self.n_atoms.sqrt()
    }

    /// Coupling of the nonlinear term, `sqrt(N) g eta` (equal to `g/sqrt(N)`
    /// on the physical branch `eta = 1/N`).
    pub(crate) fn nonlinear_rate(&self, eta: f64) -> f64 {
        self.n_atoms.sqrt() * self.g * eta
    }

    /// Drive amplitude `g sqrt(N)`.
    pub(crate) fn drive(&self) -> f64 {
        self.g * self.n_atoms.sqrt()
    }
}

pub fn derive_params(p: &ModelParams) -> DerivedParams {
    DerivedParams { big_gamma: p.big_gamma(), eta: p.eta() }
}
