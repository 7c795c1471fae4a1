use crate::dg::{DgField, LegendrePoly, Space1D};
use crate::mesh::Mesh1D;
use crate::{Error, Result};

/// Continuous piecewise `P_{q+2}` reconstruction `v_hat` of a 1D dG field.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionReconstruction1D {
    pub cells: Vec<LegendrePoly>,
}

impl SolutionReconstruction1D {
    /// Value and physical derivative in cell `k` at reference point `xi`.
    pub fn eval(&self, mesh: &Mesh1D, k: usize, xi: f64) -> (f64, f64) {
        let (v, d) = self.cells[k].eval(xi);
        (v, d * 2.0 / mesh.width(k))
    }

    pub fn eval_at(&self, mesh: &Mesh1D, x: f64) -> Option<f64> {
        mesh.locate(x).map(|(k, xi)| self.cells[k].eval(xi).0)
    }
}

/// Piecewise `P_{q+1}` flux reconstruction `f_hat` of a 1D scheme, continuous
/// across edges where it takes the numerical flux values.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxReconstruction1D {
    pub cells: Vec<LegendrePoly>,
}

impl FluxReconstruction1D {
    /// Value and physical derivative in cell `k` at reference point `xi`.
    pub fn eval(&self, mesh: &Mesh1D, k: usize, xi: f64) -> (f64, f64) {
        let (v, d) = self.cells[k].eval(xi);
        (v, d * 2.0 / mesh.width(k))
    }
}

fn check_edge_data(space: &Space1D, len: usize, what: &str) -> Result<()> {
    let n = space.mesh().edges().len();
    if len != n {
        return Err(Error::InvalidParameter(format!("{what} has {len} entries, mesh has {n} edges")));
    }
    Ok(())
}

fn to_legendre(space: &Space1D, values: &[f64]) -> LegendrePoly {
    let rule = &space.reference().rule;
    LegendrePoly::from_gauss_values(values, &rule.nodes, &rule.weights)
}

/// `v_hat = v_h + a P_q + b P_{q+1}` on each cell, with `a`, `b` chosen so that
/// `v_hat` equals the intermediate state `w[e]` at every edge.
pub fn reconstruct_solution_1d(space: &Space1D, v: &DgField, w: &[f64]) -> Result<SolutionReconstruction1D> {
    check_edge_data(space, w.len(), "edge state array")?;
    let q = space.degree();
    let mesh = space.mesh();
    let parity = if q % 2 == 0 { 1.0 } else { -1.0 };
    let cells = (0..space.n_cells())
        .map(|k| {
            let mut p = to_legendre(space, v.cell(k));
            p.coeffs.resize(q + 3, 0.0);
            let d_l = w[mesh.cell_edge(k, 0)] - space.trace(v, k, 0);
            let d_r = w[mesh.cell_edge(k, 1)] - space.trace(v, k, 1);
            p.coeffs[q] += 0.5 * (d_r + parity * d_l);
            p.coeffs[q + 1] += 0.5 * (d_r - parity * d_l);
            p
        })
        .collect();
    Ok(SolutionReconstruction1D { cells })
}

/// `f_hat` with `f_hat = F` at the edges and `d_x f_hat = -H` in each cell,
/// where `H` is the hyperbolic right-hand side built from the fluxes `flux`.
pub fn reconstruct_flux_1d(space: &Space1D, rhs: &DgField, flux: &[f64]) -> Result<FluxReconstruction1D> {
    check_edge_data(space, flux.len(), "numerical flux array")?;
    let mesh = space.mesh();
    let cells = (0..space.n_cells())
        .map(|k| {
            let mut p = to_legendre(space, rhs.cell(k)).antiderivative();
            p.scale(-0.5 * mesh.width(k));
            p.add_constant(flux[mesh.cell_edge(k, 0)]);
            p
        })
        .collect();
    Ok(FluxReconstruction1D { cells })
}
