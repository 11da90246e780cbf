//! Shared numerical kernels: adaptive Runge–Kutta, monotone interpolation,
//! tridiagonal solves, stencils, quadrature and fitting.

pub mod fd;
pub mod fit;
pub mod pchip;
pub mod quad;
pub mod rk45;
pub mod tridiag;

/// Dense row-major (nt x nx) table of space-time samples.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Grid2 {
    pub nt: usize,
    pub nx: usize,
    data: Vec<f64>,
}

impl Grid2 {
    pub fn zeros(nt: usize, nx: usize) -> Self {
        Self { nt, nx, data: vec![0.0; nt * nx] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let nt = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == nx));
        Self { nt, nx, data: rows.into_iter().flatten().collect() }
    }

    #[inline]
    pub fn at(&self, k: usize, i: usize) -> f64 {
        debug_assert!(k < self.nt && i < self.nx);
        self.data[k * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, v: f64) {
        debug_assert!(k < self.nt && i < self.nx);
        self.data[k * self.nx + i] = v;
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.nx..(k + 1) * self.nx]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.nx..(k + 1) * self.nx]
    }
}
