//! Linearized fluctuations around a mean-field steady state.
//!
//! Writing `b = beta + db`, the fluctuation obeys
//! `d/dt db = A db + B db^dag + sqrt(2 Gamma) b_in` with the vacuum input of
//! the damped mode. The drift matrix of the pair `(db, db^dag)` is
//! `[[A, B], [B*, A*]]`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use super::params::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationCoeffs {
    pub a_coef: Complex64,
    pub b_coef: Complex64,
}

/// Stationary normally-ordered second moments of the linearized fluctuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationMoments {
    /// `<db^dag db>`
    pub occupation: f64,
    /// `<db db>`
    pub anomalous: Complex64,
}

pub fn fluctuation_coeffs(p: &ModelParams, beta: Complex64) -> FluctuationCoeffs {
    fluctuation_coeffs_at(p, p.eta(), beta)
}

pub(crate) fn fluctuation_coeffs_at(p: &ModelParams, eta: f64, beta: Complex64) -> FluctuationCoeffs {
    let i = Complex64::i();
    let k = p.nonlinear_rate(eta);
    let a_coef = -i * p.delta() - p.big_gamma() + i * k * (beta + beta.conj());
    let b_coef = i * k * beta;
    FluctuationCoeffs { a_coef, b_coef }
}

impl FluctuationCoeffs {
    pub fn drift_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.a_coef, self.b_coef, self.b_coef.conj(), self.a_coef.conj())
    }
}

/// Eigenvalues of the drift matrix, `Re A ± sqrt(|B|^2 - (Im A)^2)` with the
/// principal square root. The `+` root comes first.
pub fn drift_eigenvalues(c: &FluctuationCoeffs) -> (Complex64, Complex64) {
    let re_a = c.a_coef.re;
    let disc = Complex64::new(c.b_coef.norm_sqr() - c.a_coef.im * c.a_coef.im, 0.0).sqrt();
    (re_a + disc, re_a - disc)
}

/// Spectral denominator `|A|^2 - |B|^2 - w^2 - i w (A + A*)`.
pub fn xi(c: &FluctuationCoeffs, omega: f64) -> Complex64 {
    let real = c.a_coef.norm_sqr() - c.b_coef.norm_sqr() - omega * omega;
    let a_plus_conj = 2.0 * c.a_coef.re;
    Complex64::new(real, -omega * a_plus_conj)
}

/// Stationary moments from the 2x2 Lyapunov equation
/// `M V + V M^dag + Gamma I = 0`, where `V` is the symmetrically ordered
/// covariance of `(db, db^dag)` and `Gamma I` the vacuum diffusion.
pub fn stationary_moments(c: &FluctuationCoeffs, big_gamma: f64) -> Result<FluctuationMoments> {
    let m = c.drift_matrix();
    let id = Matrix2::<Complex64>::identity();
    // Column-major vec: vec(M V) = (I kron M) vec V, vec(V M^dag) = (conj(M) kron I) vec V.
    let op: Matrix4<Complex64> = id.kronecker(&m) + m.map(|z| z.conj()).kronecker(&id);
    let rhs = -Vector4::new(
        Complex64::new(big_gamma, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(big_gamma, 0.0),
    );
    let v = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSolve("Lyapunov operator of the drift matrix".into()))?;
    Ok(FluctuationMoments { occupation: v[0].re - 0.5, anomalous: v[1] })
}
