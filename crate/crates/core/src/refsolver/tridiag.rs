//! Thomas algorithm for the constant-coefficient matrix `tridiag(-r, 1 + 2r, -r)`.

use alloc::vec::Vec;

/// Forward-sweep coefficients for a fixed `r`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    r: f64,
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn new(size: usize, r: f64) -> Self {
        let (diag, off) = (1.0 + 2.0 * r, -r);
        let mut upper = Vec::with_capacity(size);
        let mut inv_pivot = Vec::with_capacity(size);
        let mut prev = 0.0;
        for _ in 0..size {
            let pivot = diag - off * prev;
            let inv = 1.0 / pivot;
            prev = off * inv;
            upper.push(prev);
            inv_pivot.push(inv);
        }
        Self { r, upper, inv_pivot }
    }

    pub(crate) fn r(&self) -> f64 {
        self.r
    }

    /// Overwrites `rhs` with the solution.
    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.upper.len());
        // (x - off prev) / pivot, written so the loop-carried dependency is a
        // single multiply-add
        let mut prev = 0.0;
        for ((x, inv), c) in rhs.iter_mut().zip(&self.inv_pivot).zip(&self.upper) {
            *x = *x * inv - c * prev;
            prev = *x;
        }
        let mut next = 0.0;
        for (x, c) in rhs.iter_mut().zip(&self.upper).rev() {
            *x -= c * next;
            next = *x;
        }
    }

    /// Solve for a right-hand side that vanishes outside `first..=last`.
    ///
    /// The solution decays geometrically away from the sources; both sweeps
    /// stop once the running value drops below `CUTOFF` times the largest
    /// magnitude seen, and everything beyond is left at zero. Returns the
    /// half-open index range that may hold nonzeros.
    pub(crate) fn solve_local(&self, rhs: &mut [f64], first: usize, last: usize) -> (usize, usize) {
        debug_assert_eq!(rhs.len(), self.upper.len());
        debug_assert!(rhs[..first].iter().chain(&rhs[last + 1..]).all(|&v| v == 0.0));
        let n = rhs.len();
        let mut prev = 0.0;
        let mut peak: f64 = 0.0;
        let mut end = n;
        for i in first..n {
            let v = rhs[i] * self.inv_pivot[i] - self.upper[i] * prev;
            rhs[i] = v;
            prev = v;
            peak = peak.max(v.abs());
            if i > last && v.abs() <= CUTOFF * peak {
                rhs[i] = 0.0;
                end = i;
                break;
            }
        }
        let mut next = 0.0;
        let mut start = 0;
        for i in (0..end).rev() {
            let v = rhs[i] - self.upper[i] * next;
            rhs[i] = v;
            next = v;
            peak = peak.max(v.abs());
            if i < first && v.abs() <= CUTOFF * peak {
                rhs[i] = 0.0;
                start = i + 1;
                break;
            }
        }
        (start, end)
    }
}

/// Relative magnitude below which [`Tridiagonal::solve_local`] truncates.
const CUTOFF: f64 = 1e-40;
