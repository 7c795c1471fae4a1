//! Continuous reconstructions of the dG solution and of the numerical flux,
//! and the splitting of the resulting residual into a hyperbolic and a
//! parabolic part.

mod one_d;
mod residual;
mod two_d;

pub use one_d::{reconstruct_flux_1d, reconstruct_solution_1d, FluxReconstruction1D, SolutionReconstruction1D};
pub use residual::{split_residual_1d, split_residual_2d, Level1D, Level2D, ResidualSplit};
pub use two_d::{reconstruct_flux_2d, reconstruct_solution_2d, FluxReconstruction2D, SolutionReconstruction2D};

use crate::dg::basis::{legendre, LegendrePoly};

/// Values and derivatives of `P_0, ..., P_deg` at fixed reference points.
#[derive(Clone, Debug)]
pub(crate) struct LegendreTable {
    stride: usize,
    val: Vec<f64>,
    der: Vec<f64>,
}

impl LegendreTable {
    pub(crate) fn new(deg: usize, points: &[f64]) -> Self {
        let stride = deg + 1;
        let mut val = Vec::with_capacity(points.len() * stride);
        let mut der = Vec::with_capacity(points.len() * stride);
        for &x in points {
            for i in 0..stride {
                let (v, d) = legendre(i, x);
                val.push(v);
                der.push(d);
            }
        }
        Self { stride, val, der }
    }

    /// Value and reference derivative of `poly` at point `p`.
    pub(crate) fn eval(&self, poly: &LegendrePoly, p: usize) -> (f64, f64) {
        let row = p * self.stride;
        let mut v = 0.0;
        let mut d = 0.0;
        for (i, c) in poly.coeffs.iter().enumerate() {
            v += c * self.val[row + i];
            d += c * self.der[row + i];
        }
        (v, d)
    }
}

/// Nodes `{-1, xi_0, ..., xi_q, 1}` of the continuous reconstruction.
pub fn extended_nodes(gauss: &[f64]) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(gauss.len() + 2);
    nodes.push(-1.0);
    nodes.extend_from_slice(gauss);
    nodes.push(1.0);
    nodes
}
