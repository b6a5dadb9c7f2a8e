//! Dense LU with partial pivoting for the small square systems of the solver.

use crate::error::{Error, Result};

/// Relative pivot threshold below which the diagonal is shifted.
pub const PIVOT_REL_FLOOR: f64 = 1e-13;
pub const TIKHONOV_SHIFT: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::arg(format!("row {i} has length {}, expected {n}", row.len())));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Outcome of [`solve`]; `shifted` records whether the Tikhonov shift fired.
#[derive(Debug, Clone)]
pub struct LuSolution {
    pub x: Vec<f64>,
    pub shifted: bool,
}

/// Solves `A x = b`. A pivot smaller than `1e-13 · ‖A‖∞` restarts the
/// factorisation on `A + 1e-12 I`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<LuSolution> {
    if b.len() != a.dim() {
        return Err(Error::arg(format!("rhs length {} for a {}x{} matrix", b.len(), a.dim(), a.dim())));
    }
    let floor = PIVOT_REL_FLOOR * a.norm_inf();
    match factor_and_solve(a.clone(), b, floor) {
        Some(x) => Ok(LuSolution { x, shifted: false }),
        None => {
            let mut shifted = a.clone();
            for i in 0..a.dim() {
                shifted.set(i, i, shifted.get(i, i) + TIKHONOV_SHIFT);
            }
            factor_and_solve(shifted, b, 0.0)
                .map(|x| LuSolution { x, shifted: true })
                .ok_or_else(|| Error::Solver("singular Jacobian even after diagonal shift".into()))
        }
    }
}

fn factor_and_solve(mut a: Matrix, b: &[f64], floor: f64) -> Option<Vec<f64>> {
    let n = a.dim();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, big) = (col..n)
            .map(|r| (r, a.get(r, col).abs()))
            .fold((col, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if big <= floor || big == 0.0 || !big.is_finite() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(piv, j));
                a.set(piv, j, tmp);
            }
            x.swap(col, piv);
        }
        let d = a.get(col, col);
        for r in col + 1..n {
            let factor = a.get(r, col) / d;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a.set(r, j, a.get(r, j) - factor * a.get(col, j));
            }
            x[r] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= a.get(i, j) * x[j];
        }
        x[i] = s / a.get(i, i);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_well_conditioned_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=12 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 }).collect())
                .collect();
            let a = Matrix::from_rows(&rows).unwrap();
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b = a.mul_vec(&x_true);
            let sol = solve(&a, &b).unwrap();
            assert!(!sol.shifted);
            for (g, w) in sol.x.iter().zip(&x_true) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sol = solve(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(sol.x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_gets_shifted() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let sol = solve(&a, &[1.0, 1.0]).unwrap();
        assert!(sol.shifted);
        assert!(sol.x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(solve(&Matrix::zeros(2), &[1.0]).is_err());
    }
}
