//! Lindblad master-equation reference for the effective Hamiltonian of the
//! deformed mode with vacuum damping, on a truncated Fock space.
//!
//! `L[rho] = -i [H, rho] + Gamma (2 b rho b^dag - b^dag b rho - rho b^dag b)`
//! with
//! `H = Delta b^dag b + sqrt(N) g (b^dag + b) - (sqrt(N) g eta / 2)(b^dag b^2 + b^dag^2 b)`.
//!
//! Density matrices are vectorized column-major, so
//! `vec(X rho Y) = (Y^T kron X) vec(rho)`.

mod shifted;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{annihilator_matrix, FockOperator};
use crate::error::{Error, Result};
use crate::model::{solve_deformed_steady_state_with, ModelParams, SolverOptions, SpectrumTable, SpectrumVariant};

pub use shifted::ShiftedSolver;

const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;
const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Successive-truncation agreement required for convergence.
pub const CONVERGENCE_TOL: f64 = 1e-8;

pub fn effective_hamiltonian(p: &ModelParams, n_cut: usize) -> Result<FockOperator> {
    if n_cut < 2 {
        return Err(Error::InvalidParams("effective Hamiltonian needs n_cut >= 2".into()));
    }
    let b = annihilator_matrix(n_cut)?;
    let bd = b.adjoint();
    let num = &bd * &b;
    let drive = &bd + &b;
    let b2 = &b * &b;
    let cubic = &(&bd * &b2) + &(&(&bd * &bd) * &b);
    let k = p.nonlinear_rate(p.eta());
    let h = &(&num.scale(p.delta().into()) + &drive.scale(p.drive().into())) - &cubic.scale((0.5 * k).into());
    Ok(h)
}

/// Superoperator of the master equation acting on `vec(rho)`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_cut: usize,
    matrix: DMatrix<Complex64>,
}

impl Liouvillian {
    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    /// Hilbert-space dimension `n_cut + 1`.
    pub fn hilbert_dim(&self) -> usize {
        self.n_cut + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.hilbert_dim();
        let v = &self.matrix * vectorize(rho);
        DMatrix::from_column_slice(d, d, v.as_slice())
    }

    /// Largest `|sum_n L[(n,n), k]|`, zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim();
        let trace_row = trace_covector(d);
        (trace_row.transpose() * &self.matrix).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

pub fn liouvillian(p: &ModelParams, n_cut: usize) -> Result<Liouvillian> {
    let h = effective_hamiltonian(p, n_cut)?.into_matrix();
    let d = n_cut + 1;
    let b = annihilator_matrix(n_cut)?.into_matrix();
    let bd_b = b.adjoint() * &b;
    let id = DMatrix::<Complex64>::identity(d, d);
    let minus_i = -Complex64::i();
    let rate: Complex64 = p.big_gamma().into();

    let hamiltonian = (id.kronecker(&h) - h.transpose().kronecker(&id)) * minus_i;
    let jump = b.map(|z| z.conj()).kronecker(&b) * (rate * 2.0);
    let decay = (id.kronecker(&bd_b) + bd_b.transpose().kronecker(&id)) * rate;
    Ok(Liouvillian { n_cut, matrix: hamiltonian + jump - decay })
}

fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

/// `vec(I)`, so that `vec(I)^T vec(X) = tr X`.
fn trace_covector(d: usize) -> DVector<Complex64> {
    vectorize(&DMatrix::identity(d, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<Complex64>);

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::InvalidParams("density matrix must be square with dim >= 2".into()));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidParams(format!("density matrix trace {tr} differs from 1")));
        }
        let herm = (&m - m.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let rho = DensityMatrix(m);
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidParams(format!("density matrix has eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    /// Pure state `|psi><psi|` from a normalized amplitude vector.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    /// Coherent state of amplitude `alpha`, renormalized on the truncated space.
    pub fn coherent(alpha: Complex64, n_cut: usize) -> Result<Self> {
        let mut psi = DVector::zeros(n_cut + 1);
        let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..=n_cut {
            psi[n] = amp;
            amp *= alpha / ((n + 1) as f64).sqrt();
        }
        let norm = psi.norm();
        Self::pure(&(psi / Complex64::new(norm, 0.0)))
    }

    pub fn vacuum(n_cut: usize) -> Result<Self> {
        Self::coherent(Complex64::new(0.0, 0.0), n_cut)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `tr(op rho)`
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        (op * &self.0).trace()
    }

    pub fn occupation(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|k| k as f64 * self.0[(k, k)].re).sum()
    }
}

pub fn mean_amplitude(rho: &DensityMatrix) -> Complex64 {
    let b = annihilator_matrix(rho.dim() - 1).expect("density matrix has dim >= 2");
    rho.expectation(b.matrix())
}

/// Steady state of a Liouvillian: its null vector normalized to unit trace.
///
/// The first diagonal equation is redundant with the others (trace
/// preservation) and is replaced by the trace constraint.
pub fn steady_density_of(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.hilbert_dim();
    let mut system = l.matrix().clone();
    let trace_row = trace_covector(d);
    system.set_row(0, &trace_row.transpose());
    let mut rhs = DVector::zeros(d * d);
    rhs[0] = Complex64::new(1.0, 0.0);
    let v = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSolve("Liouvillian null space is degenerate".into()))?;

    let residual = (l.matrix() * &v).norm();
    if !(residual <= STEADY_RESIDUAL_TOL) {
        return Err(Error::SingularSolve(format!("steady-state residual {residual:e} exceeds {STEADY_RESIDUAL_TOL:e}")));
    }
    let raw = DMatrix::from_column_slice(d, d, v.as_slice());
    let mut rho = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace();
    rho /= tr;
    DensityMatrix::new(rho).map_err(|e| Error::SingularSolve(format!("steady state is not a valid density matrix: {e}")))
}

/// Steady density matrix, after confirming with the semiclassical model
/// that the configuration is stable.
pub fn steady_density(p: &ModelParams, n_cut: usize) -> Result<DensityMatrix> {
    solve_deformed_steady_state_with(p, &SolverOptions::default())?.require_stable()?;
    steady_density_of(&liouvillian(p, n_cut)?)
}

/// `tr(b L[rho])`, the exact rate of change of `<b>`.
pub fn amplitude_drift(l: &Liouvillian, rho: &DMatrix<Complex64>) -> Complex64 {
    let b = annihilator_matrix(l.n_cut()).expect("n_cut >= 2");
    (b.matrix() * l.apply(rho)).trace()
}

/// Mean-field drift evaluated on operator expectations (no factorization):
/// `-i Delta <b> - i g sqrt(N) + i (sqrt(N) g eta / 2)(<b^2> + 2 <b^dag b>) - Gamma <b>`.
pub fn langevin_drift(p: &ModelParams, rho: &DMatrix<Complex64>) -> Complex64 {
    let n_cut = rho.nrows() - 1;
    let b = annihilator_matrix(n_cut).expect("dim >= 2").into_matrix();
    let ev = |op: &DMatrix<Complex64>| (op * rho).trace();
    let mean_b = ev(&b);
    let mean_b2 = ev(&(&b * &b));
    let mean_n = ev(&(b.adjoint() * &b));
    let i = Complex64::i();
    let k = p.nonlinear_rate(p.eta());
    i * (0.5 * k) * (mean_b2 + 2.0 * mean_n) - i * p.delta() * mean_b - i * p.drive() - p.big_gamma() * mean_b
}

/// Two-time correlation `C(tau) = <db^dag(tau) db(0)>` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub tau_grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Quantum-regression machinery around one steady state.
///
/// With `r = vec(db rho_ss)` (`db = b - <b>`) and `w = vec(b)`,
/// `C(tau) = w^dag exp(L tau) r`. Because `tr r = 0`, the resolvent can use
/// the nonsingular `L + vec(rho_ss) vec(I)^T` in place of `L`.
#[derive(Debug, Clone)]
pub struct RegressionOracle {
    liouvillian: Liouvillian,
    rho: DensityMatrix,
    source: DVector<Complex64>,
    probe: DVector<Complex64>,
    solver: ShiftedSolver,
    probe_basis: DVector<Complex64>,
    source_basis: DVector<Complex64>,
}

impl RegressionOracle {
    pub fn new(p: &ModelParams, n_cut: usize) -> Result<Self> {
        solve_deformed_steady_state_with(p, &SolverOptions::default())?.require_stable()?;
        Self::from_liouvillian(liouvillian(p, n_cut)?)
    }

    pub fn from_liouvillian(l: Liouvillian) -> Result<Self> {
        let rho = steady_density_of(&l)?;
        let d = l.hilbert_dim();
        let b = annihilator_matrix(l.n_cut())?.into_matrix();
        let mean = rho.expectation(&b);
        let db = &b - DMatrix::<Complex64>::identity(d, d) * mean;
        let source = vectorize(&(db * rho.matrix()));
        let probe = vectorize(&b);

        let deflated = l.matrix() + vectorize(rho.matrix()) * trace_covector(d).transpose();
        let solver = ShiftedSolver::new(deflated);
        let probe_basis = solver.to_basis(&probe);
        let source_basis = solver.to_basis(&source);
        Ok(RegressionOracle { liouvillian: l, rho, source, probe, solver, probe_basis, source_basis })
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    pub fn mean_amplitude(&self) -> Complex64 {
        mean_amplitude(&self.rho)
    }

    /// `C(0) = <db^dag db>`.
    pub fn fluctuation_occupation(&self) -> f64 {
        self.probe.dotc(&self.source).re
    }

    /// `S(w) = (1/pi) Re int_0^inf exp(i w tau) C(tau)^* dtau`, evaluated as
    /// `(1/pi) Re w^dag x` with `(L - i w) x = -r`.
    pub fn spectrum_at(&self, omega: f64) -> Result<f64> {
        let y = self.solver.solve_in_basis(Complex64::new(0.0, omega), &(-&self.source_basis))?;
        Ok(self.probe_basis.dotc(&y).re / std::f64::consts::PI)
    }

    pub fn spectrum(&self, omega_grid: &[f64]) -> Result<Vec<f64>> {
        omega_grid.par_iter().map(|&w| self.spectrum_at(w)).collect()
    }

    /// `C(k dtau)` for `k = 0..=steps`, propagating with `exp(L dtau)`.
    pub fn correlation(&self, dtau: f64, steps: usize) -> CorrelationSeries {
        let prop = (self.liouvillian.matrix() * Complex64::new(dtau, 0.0)).exp();
        let mut state = self.source.clone();
        let mut tau_grid = Vec::with_capacity(steps + 1);
        let mut values = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            tau_grid.push(k as f64 * dtau);
            values.push(self.probe.dotc(&state));
            state = &prop * state;
        }
        CorrelationSeries { tau_grid, values }
    }
}

/// Normally-ordered fluctuation spectrum from quantum regression.
pub fn regression_spectrum(p: &ModelParams, n_cut: usize, omega_grid: &[f64]) -> Result<SpectrumTable> {
    let oracle = RegressionOracle::new(p, n_cut)?;
    Ok(SpectrumTable {
        omega_grid: omega_grid.to_vec(),
        values: oracle.spectrum(omega_grid)?,
        // Same normalization class as the physical semiclassical variant:
        // both carry the vacuum-noise strength.
        variant: SpectrumVariant::Physical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub n_cut: usize,
    pub mean_amplitude: Complex64,
    pub occupation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    /// First truncation whose `<b>` and `<b^dag b>` agree with the next one
    /// to within [`CONVERGENCE_TOL`].
    pub converged_at: Option<usize>,
}

impl TruncationReport {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }
}

pub fn truncation_convergence(p: &ModelParams, n_cuts: &[usize]) -> Result<TruncationReport> {
    if n_cuts.len() < 2 {
        return Err(Error::InvalidParams("truncation study needs at least two n_cut values".into()));
    }
    solve_deformed_steady_state_with(p, &SolverOptions::default())?.require_stable()?;
    let rows = n_cuts
        .par_iter()
        .map(|&n_cut| {
            let rho = steady_density_of(&liouvillian(p, n_cut)?)?;
            Ok(TruncationRow { n_cut, mean_amplitude: mean_amplitude(&rho), occupation: rho.occupation() })
        })
        .collect::<Result<Vec<_>>>()?;
    let converged_at = rows.windows(2).find_map(|w| {
        let db = (w[0].mean_amplitude - w[1].mean_amplitude).norm();
        let dn = (w[0].occupation - w[1].occupation).abs();
        (db < CONVERGENCE_TOL && dn < CONVERGENCE_TOL).then_some(w[0].n_cut)
    });
    Ok(TruncationReport { rows, converged_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn undriven_hamiltonian_is_diagonal() {
        let p = ModelParams::unit(1.7, 0.0, 25.0).unwrap();
        let h = effective_hamiltonian(&p, 6).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 1.7 * i as f64 } else { 0.0 };
                assert_abs_diff_eq!(h.get(i, j).re, expect, epsilon = 1e-14);
                assert_abs_diff_eq!(h.get(i, j).im, 0.0);
            }
        }
        assert!(effective_hamiltonian(&p, 1).is_err());
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let p = ModelParams::unit(-0.4, 2.2, 13.0).unwrap();
        assert!(effective_hamiltonian(&p, 25).unwrap().hermiticity_defect() < 1e-14);
    }

    #[test]
    fn linear_hamiltonian_without_deformation() {
        let p = ModelParams::unit(0.5, 1.0, 16.0).unwrap().with_eta(0.0).unwrap();
        let h = effective_hamiltonian(&p, 5).unwrap();
        assert_abs_diff_eq!(h.get(1, 2).re, 4.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(h.get(0, 2).norm(), 0.0);
        assert_abs_diff_eq!(h.get(2, 2).re, 1.0);
    }

    #[test]
    fn vacuum_is_steady_without_drive() {
        let p = ModelParams::unit(0.9, 0.0, 25.0).unwrap();
        let l = liouvillian(&p, 6).unwrap();
        assert!(l.trace_defect() < 1e-12);
        let vac = DensityMatrix::vacuum(6).unwrap();
        assert!(l.apply(vac.matrix()).norm() < 1e-14);
        let rho = steady_density(&p, 6).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert!(mean_amplitude(&rho).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn coherent_state_amplitude() {
        let alpha = Complex64::new(0.3, -0.7);
        let rho = DensityMatrix::coherent(alpha, 30).unwrap();
        let b = mean_amplitude(&rho);
        assert!((b - alpha).norm() < 1e-14);
        let bd = rho.expectation(&annihilator_matrix(30).unwrap().adjoint().into_matrix());
        assert!((bd - b.conj()).norm() < 1e-14);
        assert!(mean_amplitude(&DensityMatrix::vacuum(4).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn linear_steady_state_is_coherent() {
        let p = ModelParams::unit(0.0, 0.5, 25.0).unwrap().with_eta(0.0).unwrap();
        let rho = steady_density(&p, 15).unwrap();
        let b = mean_amplitude(&rho);
        assert!((b - Complex64::new(0.0, -0.5)).norm() < 1e-6);
        let target = DensityMatrix::coherent(Complex64::new(0.0, -0.5), 15).unwrap();
        assert!((rho.matrix() - target.matrix()).norm() < 1e-8);
    }

    #[test]
    fn deformed_steady_state_near_semiclassical() {
        let p = ModelParams::unit(0.0, 0.5, 25.0).unwrap();
        let rho = steady_density(&p, 15).unwrap();
        let b = mean_amplitude(&rho);
        let y = 50.0 - 2550f64.sqrt();
        assert!((b - Complex64::new(0.0, y)).norm() / y.abs() < 0.05);
    }

    #[test]
    fn drift_on_coherent_states() {
        let p = ModelParams::unit(0.6, 1.1, 9.0).unwrap();
        let l = liouvillian(&p, 40).unwrap();
        for alpha in [Complex64::new(0.2, 0.5), Complex64::new(-0.7, 0.1), Complex64::new(0.0, -1.0)] {
            let rho = DensityMatrix::coherent(alpha, 40).unwrap();
            let exact = amplitude_drift(&l, rho.matrix());
            let mean_field = crate::model::deformed_residual(&p, alpha);
            assert!((exact - mean_field).norm() < 1e-10, "alpha={alpha}: {exact} vs {mean_field}");
        }
    }

    #[test]
    fn regression_with_coherent_steady_state_vanishes() {
        let p = ModelParams::unit(0.0, 0.5, 25.0).unwrap().with_eta(0.0).unwrap();
        let oracle = RegressionOracle::new(&p, 15).unwrap();
        for w in [-20.0, -3.0, 0.0, 1.0, 12.0] {
            assert!(oracle.spectrum_at(w).unwrap().abs() < 1e-10);
        }
        assert!(oracle.fluctuation_occupation().abs() < 1e-10);
    }

    #[test]
    fn truncation_needs_two_cuts() {
        let p = ModelParams::unit(0.0, 0.5, 25.0).unwrap();
        assert!(truncation_convergence(&p, &[10]).is_err());
    }

    #[test]
    fn truncation_undriven_converges() {
        let p = ModelParams::unit(0.0, 0.0, 25.0).unwrap();
        let rep = truncation_convergence(&p, &[3, 5]).unwrap();
        assert_eq!(rep.converged_at, Some(3));
    }
}
