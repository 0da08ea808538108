//! Repeated solves of `(M - s I) x = r` for many shifts `s`.
//!
//! `M` is reduced once to upper Hessenberg form `M = Q H Q^dag`; each shift
//! then costs one O(d^2) elimination on `H - s I`, pivoting between the two
//! rows that can hold the sub-diagonal entry.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    q: DMatrix<Complex64>,
    h: DMatrix<Complex64>,
    scale: f64,
}

impl ShiftedSolver {
    pub fn new(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square());
        let scale = m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())).max(1.0);
        let (q, h) = m.hessenberg().unpack();
        ShiftedSolver { q, h, scale }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Maps a vector into the Hessenberg basis, `Q^dag v`.
    pub fn to_basis(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.q.ad_mul(v)
    }

    pub fn from_basis(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        &self.q * y
    }

    /// Solves `(H - s I) y = c` for `c` already in the Hessenberg basis.
    pub fn solve_in_basis(&self, shift: Complex64, c: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let d = self.dim();
        let mut a = self.h.clone();
        for k in 0..d {
            a[(k, k)] -= shift;
        }
        let mut y = c.clone();
        let tiny = f64::EPSILON * self.scale * d as f64;

        for k in 0..d.saturating_sub(1) {
            if a[(k + 1, k)].norm() > a[(k, k)].norm() {
                for j in k..d {
                    a.swap((k, j), (k + 1, j));
                }
                y.swap_rows(k, k + 1);
            }
            let pivot = a[(k, k)];
            if pivot.norm() <= tiny {
                return Err(Error::SingularSolve(format!("zero pivot at row {k} for shift {shift}")));
            }
            let factor = a[(k + 1, k)] / pivot;
            if factor != Complex64::new(0.0, 0.0) {
                for j in k..d {
                    let v = a[(k, j)];
                    a[(k + 1, j)] -= factor * v;
                }
                let v = y[k];
                y[k + 1] -= factor * v;
            }
        }

        for k in (0..d).rev() {
            let pivot = a[(k, k)];
            if pivot.norm() <= tiny {
                return Err(Error::SingularSolve(format!("zero pivot at row {k} for shift {shift}")));
            }
            let mut acc = y[k];
            for j in k + 1..d {
                acc -= a[(k, j)] * y[j];
            }
            y[k] = acc / pivot;
        }
        Ok(y)
    }

    pub fn solve(&self, shift: Complex64, r: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let y = self.solve_in_basis(shift, &self.to_basis(r))?;
        Ok(self.from_basis(&y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random_matrix(d: usize, seed: u64) -> DMatrix<Complex64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(d, d, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn matches_dense_lu() {
        let d = 23;
        let m = pseudo_random_matrix(d, 7);
        let r = DVector::from_fn(d, |i, _| Complex64::new(i as f64, 1.0 - i as f64 * 0.3));
        let solver = ShiftedSolver::new(m.clone());
        for s in [Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.5), Complex64::new(-1.0, -4.0)] {
            let x = solver.solve(s, &r).unwrap();
            let shifted = &m - DMatrix::identity(d, d) * s;
            let reference = shifted.clone().lu().solve(&r).unwrap();
            assert!((&x - &reference).norm() < 1e-10 * reference.norm());
            assert!((shifted * &x - &r).norm() < 1e-10 * r.norm());
        }
    }

    #[test]
    fn singular_shift_detected() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        let solver = ShiftedSolver::new(m);
        let r = DVector::from_element(3, Complex64::new(1.0, 0.0));
        assert!(matches!(solver.solve(Complex64::new(2.0, 0.0), &r), Err(Error::SingularSolve(_))));
    }
}
