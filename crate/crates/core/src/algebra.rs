//! Matrix representations of the boson and deformed-boson ladder operators
//! on the truncated Fock space `|0>, ..., |n_cut>`.
//!
//! The deformed annihilator is `B = b f(b^dag b)` with
//! `f(n) = sqrt(1 - eta (n - 1))`, so `<n-1|B|n> = sqrt(n) f(n)`. It closes
//! the space at level `N + 1 = 1/eta + 1`, where `f` vanishes, and obeys
//! `[B, B^dag] = 1 - 2 eta b^dag b` away from the truncation edge.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for `1 - eta (n - 1)` rounding slightly below zero at closure.
const CLOSURE_SLACK: f64 = 1e-12;

/// Dense operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator(DMatrix<Complex64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionOrder {
    /// `f(n) = sqrt(1 - eta (n - 1))`
    Exact,
    /// `f(n) ~ 1 - eta (n - 1) / 2`
    First,
}

impl FockOperator {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "Fock operators are square");
        FockOperator(m)
    }

    pub fn zeros(dim: usize) -> Self {
        FockOperator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        FockOperator(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Highest retained level.
    pub fn n_cut(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        FockOperator(self.0.adjoint())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        FockOperator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        FockOperator(&self.0 * z)
    }

    /// Largest absolute entry of `self - self^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl<'a> Mul<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator(&self.0 - &rhs.0)
    }
}

fn check_cut(n_cut: usize) -> Result<()> {
    if n_cut < 1 {
        return Err(Error::InvalidParams("Fock truncation needs n_cut >= 1".into()));
    }
    Ok(())
}

fn ladder(n_cut: usize, element: impl Fn(usize) -> f64) -> FockOperator {
    let dim = n_cut + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new(element(n), 0.0);
    }
    FockOperator(m)
}

/// Boson annihilator with `<n-1|b|n> = sqrt(n)`.
pub fn annihilator_matrix(n_cut: usize) -> Result<FockOperator> {
    check_cut(n_cut)?;
    Ok(ladder(n_cut, |n| (n as f64).sqrt()))
}

pub fn number_matrix(n_cut: usize) -> Result<FockOperator> {
    check_cut(n_cut)?;
    let dim = n_cut + 1;
    Ok(FockOperator(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })))
}

/// `f(n)^2 = 1 - eta (n - 1)`, clamped to 0 at closure.
fn deformation_squared(n: usize, eta: f64) -> Result<f64> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::InvalidParams(format!("eta must be finite and >= 0, got {eta}")));
    }
    let arg = 1.0 - eta * (n as f64 - 1.0);
    if arg < -CLOSURE_SLACK {
        return Err(Error::Domain { n, eta });
    }
    Ok(if arg <= CLOSURE_SLACK { 0.0 } else { arg })
}

/// `f(n) = sqrt(1 - eta (n - 1))`; fails past level `1/eta + 1`.
pub fn deformation_function(n: usize, eta: f64) -> Result<f64> {
    deformation_squared(n, eta).map(f64::sqrt)
}

pub fn deformed_annihilator(n_cut: usize, eta: f64, order: ExpansionOrder) -> Result<FockOperator> {
    check_cut(n_cut)?;
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::InvalidParams(format!("eta must be finite and >= 0, got {eta}")));
    }
    match order {
        ExpansionOrder::Exact => {
            let f2: Vec<f64> = (0..=n_cut).map(|n| deformation_squared(n, eta)).collect::<Result<_>>()?;
            Ok(ladder(n_cut, |n| (n as f64 * f2[n]).sqrt()))
        }
        ExpansionOrder::First => Ok(ladder(n_cut, |n| {
            (n as f64).sqrt() * (1.0 - 0.5 * eta * (n as f64 - 1.0))
        })),
    }
}

pub fn deformed_creator(n_cut: usize, eta: f64, order: ExpansionOrder) -> Result<FockOperator> {
    Ok(deformed_annihilator(n_cut, eta, order)?.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorDefect {
    pub n: usize,
    /// `<n|[B, B^dag]|n>`
    pub diagonal: f64,
    /// `1 - 2 eta n`
    pub expected: f64,
    pub defect: f64,
    /// Row affected by the truncation; excluded from exactness claims.
    pub boundary: bool,
}

/// Diagonal of `[B, B^dag] - (1 - 2 eta b^dag b)` for the exact deformed
/// annihilator, computed by dense matrix products.
pub fn commutator_defect(n_cut: usize, eta: f64) -> Result<Vec<CommutatorDefect>> {
    let b = deformed_annihilator(n_cut, eta, ExpansionOrder::Exact)?;
    let comm = b.commutator(&b.adjoint());
    Ok((0..=n_cut)
        .map(|n| {
            let diagonal = comm.get(n, n).re;
            let expected = 1.0 - 2.0 * eta * n as f64;
            CommutatorDefect { n, diagonal, expected, defect: diagonal - expected, boundary: n + 2 > n_cut }
        })
        .collect())
}

/// Largest off-diagonal magnitude of `[B, B^dag]`.
pub fn commutator_off_diagonal(n_cut: usize, eta: f64) -> Result<f64> {
    let b = deformed_annihilator(n_cut, eta, ExpansionOrder::Exact)?;
    let comm = b.commutator(&b.adjoint());
    let mut worst: f64 = 0.0;
    for i in 0..comm.dim() {
        for j in 0..comm.dim() {
            if i != j {
                worst = worst.max(comm.get(i, j).norm());
            }
        }
    }
    Ok(worst)
}

/// Largest element-wise difference between the exact and first-order
/// deformed annihilators.
pub fn expansion_error(n_cut: usize, eta: f64) -> Result<f64> {
    let exact = deformed_annihilator(n_cut, eta, ExpansionOrder::Exact)?;
    let first = deformed_annihilator(n_cut, eta, ExpansionOrder::First)?;
    Ok(exact.max_abs_diff(&first))
}

/// Default truncation for a mean amplitude `beta`, capped at the closure level.
pub fn default_truncation(abs_beta: f64, n_atoms: f64) -> usize {
    let occ = abs_beta * abs_beta;
    let cut = (occ + 8.0 * (occ + 1.0).sqrt() + 10.0).ceil() as usize;
    cut.min((n_atoms + 1.0).floor() as usize)
}
