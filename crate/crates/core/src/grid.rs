//! Periodic sampling grids and the d-dimensional FFT.
//!
//! A grid samples the torus [0, L)^d at N points per axis, row-major with
//! axis 0 slowest. Integer DFT index m ∈ [−N/2, N/2) corresponds to the
//! continuum frequency m / L. The default L = 1 is the unit torus.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    /// Side length L of the torus; a power of two.
    pub period: usize,
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Grid::with_period(d, n, 1)
    }

    pub fn with_period(d: usize, n: usize, period: usize) -> Result<Self> {
        if d == 0 || d > 4 {
            return invalid(format!("dimension must be in 1..=4, got {d}"));
        }
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("N must be a power of two >= 2, got {n}"));
        }
        if period == 0 || !period.is_power_of_two() {
            return invalid(format!("period must be a power of two, got {period}"));
        }
        if n.checked_pow(d as u32).map_or(true, |v| v > 1 << 28) {
            return invalid(format!("grid {n}^{d} is too large"));
        }
        Ok(Grid { d, n, period })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight (L/N)^d of one node.
    pub fn cell_weight(&self) -> f64 {
        (self.period as f64 / self.n as f64).powi(self.d as i32)
    }

    /// Torus volume L^d.
    pub fn volume(&self) -> f64 {
        (self.period as f64).powi(self.d as i32)
    }

    /// Highest continuum frequency on an axis, N / (2L).
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.period as f64)
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
    }

    pub fn ravel(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    /// Signed DFT index per axis, in [−N/2, N/2).
    pub fn signed_index(&self, idx: usize, out: &mut [i64]) {
        let n = self.n as i64;
        let mut rest = idx;
        for a in (0..self.d).rev() {
            let c = (rest % self.n) as i64;
            rest /= self.n;
            out[a] = if c >= n / 2 { c - n } else { c };
        }
    }

    /// Flat index of a signed (possibly out-of-range) integer vector, reduced mod N.
    pub fn wrap_index(&self, m: &[i64]) -> usize {
        let n = self.n as i64;
        m.iter()
            .fold(0, |acc, &v| acc * self.n + v.rem_euclid(n) as usize)
    }

    /// Continuum frequency of a flat index.
    pub fn frequency(&self, idx: usize, out: &mut [f64]) {
        let mut m = [0i64; 4];
        self.signed_index(idx, &mut m[..self.d]);
        let l = self.period as f64;
        for a in 0..self.d {
            out[a] = m[a] as f64 / l;
        }
    }

    /// Node position in [0, L)^d.
    pub fn node(&self, idx: usize, out: &mut [f64]) {
        let mut c = [0usize; 4];
        self.unravel(idx, &mut c[..self.d]);
        let h = self.period as f64 / self.n as f64;
        for a in 0..self.d {
            out[a] = c[a] as f64 * h;
        }
    }

    /// Displacement of a node from the origin, reduced to [−L/2, L/2)^d.
    pub fn offset(&self, idx: usize, out: &mut [f64]) {
        let mut m = [0i64; 4];
        self.signed_index(idx, &mut m[..self.d]);
        let h = self.period as f64 / self.n as f64;
        for a in 0..self.d {
            out[a] = m[a] as f64 * h;
        }
    }

    /// Flat index of the node nearest to x (mod L).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let s = self.n as f64 / self.period as f64;
        let m: Vec<i64> = x.iter().map(|v| (v * s).round() as i64).collect();
        self.wrap_index(&m)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Separable d-dimensional FFT over a [`Grid`].
#[derive(Clone)]
pub struct GridFft {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFft").field("grid", &self.grid).finish()
    }
}

impl GridFft {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        GridFft {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unnormalised DFT, F[m] = Σ_n f[n] e^{−2πi m·n/N}.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse DFT including the 1/N^d factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let s = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        let d = self.grid.d;
        assert_eq!(data.len(), self.grid.len(), "buffer does not match grid");
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        if d == 1 {
            return;
        }
        let mut block = Vec::new();
        for axis in (0..d - 1).rev() {
            let stride = n.pow((d - 1 - axis) as u32);
            let span = n * stride;
            block.resize(span, Complex64::default());
            for chunk in data.chunks_mut(span) {
                // transpose (n, stride) -> (stride, n), transform rows, transpose back
                for r in 0..n {
                    for c in 0..stride {
                        block[c * n + r] = chunk[r * stride + c];
                    }
                }
                fft.process_with_scratch(&mut block, &mut scratch);
                for r in 0..n {
                    for c in 0..stride {
                        chunk[r * stride + c] = block[c * n + r];
                    }
                }
            }
        }
    }
}
