use super::extended_nodes;
use crate::dg::{DgField, LagrangeBasis, LegendrePoly, Space2D};
use crate::mesh::Mesh2D;
use crate::solver::EdgeData2D;
use crate::{Error, Result};

/// Continuous piecewise `Q_{q+2}` reconstruction on a Cartesian mesh, nodal on
/// the tensor grid `{-1, xi_0, ..., xi_q, 1}^2`. Node `r + (q + 3) * s` sits
/// at `(t_r, t_s)`.
#[derive(Clone, Debug)]
pub struct SolutionReconstruction2D {
    basis: LagrangeBasis,
    values: Vec<f64>,
}

impl SolutionReconstruction2D {
    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn nodes_per_line(&self) -> usize {
        self.basis.len()
    }

    pub fn cell(&self, k: usize) -> &[f64] {
        let m = self.basis.len() * self.basis.len();
        &self.values[k * m..(k + 1) * m]
    }

    /// Value and physical gradient in cell `k` at `(xi, eta)`.
    pub fn eval(&self, mesh: &Mesh2D, k: usize, xi: f64, eta: f64) -> (f64, f64, f64) {
        let (hx, hy) = mesh.cell_size(k);
        let (px, dx) = (self.basis.values(xi), self.basis.derivatives(xi));
        let (py, dy) = (self.basis.values(eta), self.basis.derivatives(eta));
        let n = self.basis.len();
        let c = self.cell(k);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for s in 0..n {
            for r in 0..n {
                let a = c[r + n * s];
                v += a * px[r] * py[s];
                gx += a * dx[r] * py[s];
                gy += a * px[r] * dy[s];
            }
        }
        (v, gx * 2.0 / hx, gy * 2.0 / hy)
    }

    pub fn eval_at(&self, mesh: &Mesh2D, x: f64, y: f64) -> Option<f64> {
        mesh.locate(x, y).map(|(k, xi, eta)| self.eval(mesh, k, xi, eta).0)
    }
}

/// Flux reconstruction `(f_hat_1, f_hat_2)` on a Cartesian mesh.
///
/// `f_hat_1` is a `P_{q+1}` polynomial in `x` on each row of Gauss nodes,
/// interpolated in `y` by the degree `q` Gauss basis; `f_hat_2` likewise
/// with the roles of `x` and `y` exchanged.
#[derive(Clone, Debug)]
pub struct FluxReconstruction2D {
    transverse: LagrangeBasis,
    lines: [Vec<LegendrePoly>; 2],
}

impl FluxReconstruction2D {
    pub fn transverse_basis(&self) -> &LagrangeBasis {
        &self.transverse
    }

    /// Line polynomial of `f_hat_dir` in cell `k` at transverse node `m`.
    pub fn line(&self, dir: usize, k: usize, m: usize) -> &LegendrePoly {
        &self.lines[dir][k * self.transverse.len() + m]
    }

    /// Value of `f_hat_dir` and its physical derivative in direction `dir`.
    pub fn eval(&self, mesh: &Mesh2D, k: usize, dir: usize, xi: f64, eta: f64) -> (f64, f64) {
        let (along, across) = if dir == 0 { (xi, eta) } else { (eta, xi) };
        let l = self.transverse.values(across);
        let (mut v, mut d) = (0.0, 0.0);
        for (m, lm) in l.iter().enumerate() {
            let (pv, pd) = self.line(dir, k, m).eval(along);
            v += lm * pv;
            d += lm * pd;
        }
        let (hx, hy) = mesh.cell_size(k);
        let h = if dir == 0 { hx } else { hy };
        (v, d * 2.0 / h)
    }
}

fn check_edges(space: &Space2D, e: &EdgeData2D) -> Result<()> {
    let n = space.reference().n();
    let mesh = space.mesh();
    let nv = mesh.vertical_edges().len() * n;
    let nh = mesh.horizontal_edges().len() * n;
    if e.v_w.len() != nv || e.v_flux.len() != nv || e.h_w.len() != nh || e.h_flux.len() != nh {
        return Err(Error::InvalidParameter("edge data does not match the mesh".into()));
    }
    Ok(())
}

/// `v_hat` with the Gauss node values of `v` in the interior, the Richtmyer
/// states on the edges and, at vertices, the mean of the four cell limits
/// (zero outside the domain).
pub fn reconstruct_solution_2d(space: &Space2D, v: &DgField, edges: &EdgeData2D) -> Result<SolutionReconstruction2D> {
    check_edges(space, edges)?;
    let re = space.reference();
    let n = re.n();
    let nn = n + 2;
    let mesh = space.mesh();
    let basis = LagrangeBasis::new(&extended_nodes(&re.rule.nodes));
    let mut values = Vec::with_capacity(space.n_cells() * nn * nn);
    let end = |side: usize| if side == 0 { 0 } else { nn - 1 };
    for k in 0..space.n_cells() {
        let mut cell = vec![0.0; nn * nn];
        let c = v.cell(k);
        for b in 0..n {
            for a in 0..n {
                cell[(a + 1) + nn * (b + 1)] = c[a + n * b];
            }
        }
        for side in 0..2 {
            let ev = mesh.cell_edge(k, 0, side);
            let eh = mesh.cell_edge(k, 1, side);
            for m in 0..n {
                cell[end(side) + nn * (m + 1)] = edges.v_w[ev * n + m];
                cell[(m + 1) + nn * end(side)] = edges.h_w[eh * n + m];
            }
        }
        for sy in 0..2 {
            for sx in 0..2 {
                let nbx = mesh.neighbor(k, 0, sx);
                let nby = mesh.neighbor(k, 1, sy);
                let diag = nbx.and_then(|c| mesh.neighbor(c, 1, sy));
                let mut s = space.corner_value(v, k, sx, sy);
                s += nbx.map_or(0.0, |c| space.corner_value(v, c, 1 - sx, sy));
                s += nby.map_or(0.0, |c| space.corner_value(v, c, sx, 1 - sy));
                s += diag.map_or(0.0, |c| space.corner_value(v, c, 1 - sx, 1 - sy));
                cell[end(sx) + nn * end(sy)] = 0.25 * s;
            }
        }
        values.extend_from_slice(&cell);
    }
    Ok(SolutionReconstruction2D { basis, values })
}

/// Line-wise flux reconstruction with `f_hat_i = F` on edges normal to `e_i`
/// and `d_x f_hat_1 = -H_1`, `d_y f_hat_2 = -H_2` at the Gauss nodes.
pub fn reconstruct_flux_2d(space: &Space2D, edges: &EdgeData2D) -> Result<FluxReconstruction2D> {
    check_edges(space, edges)?;
    let re = space.reference();
    let n = re.n();
    let mesh = space.mesh();
    let (nodes, weights) = (&re.rule.nodes, &re.rule.weights);
    let mut lines = [Vec::new(), Vec::new()];
    let mut line = vec![0.0; n];
    for k in 0..space.n_cells() {
        let (hx, hy) = mesh.cell_size(k);
        for (dir, out) in lines.iter_mut().enumerate() {
            let h = if dir == 0 { hx } else { hy };
            let flux = if dir == 0 { &edges.v_flux } else { &edges.h_flux };
            let lo = mesh.cell_edge(k, dir, 0);
            let rhs = edges.rhs_dir[dir].cell(k);
            for m in 0..n {
                for (a, l) in line.iter_mut().enumerate() {
                    *l = if dir == 0 { rhs[a + n * m] } else { rhs[m + n * a] };
                }
                let mut p = LegendrePoly::from_gauss_values(&line, nodes, weights).antiderivative();
                p.scale(-0.5 * h);
                p.add_constant(flux[lo * n + m]);
                out.push(p);
            }
        }
    }
    Ok(FluxReconstruction2D {
        transverse: re.basis.clone(),
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::QuadratureRule;
    use crate::flux::burgers_2d;
    use crate::mesh::Boundary;
    use crate::solver::{InitialCondition, Scheme, Scheme2D, SolverConfig};
    use std::sync::Arc;

    fn scheme(q: usize, b: Boundary) -> Scheme2D {
        let mesh = Mesh2D::uniform((-1.0, 1.0), (-0.5, 1.0), 5, 4, b).unwrap();
        let cfg = SolverConfig::new(Arc::new(burgers_2d()), q, 1e-3, 1.0, 0.01, b, InitialCondition::Sine);
        Scheme2D::new(mesh, cfg).unwrap()
    }

    fn field(s: &Scheme2D) -> DgField {
        s.space().project(|x, y| 0.7 * (2.0 * x + y).sin() + 0.2 * y).unwrap()
    }

    #[test]
    fn solution_is_continuous_across_edges() {
        for b in [Boundary::Periodic, Boundary::Dirichlet] {
            for q in 0..3 {
                let s = scheme(q, b);
                let v = field(&s);
                let hyp = s.hyperbolic(&v).unwrap();
                let r = reconstruct_solution_2d(s.space(), &v, &hyp.edges).unwrap();
                let mesh = s.space().mesh();
                for k in 0..mesh.n_cells() {
                    if let Some(c) = mesh.neighbor(k, 0, 1) {
                        for t in [-1.0, -0.3, 0.55, 1.0] {
                            let a = r.eval(mesh, k, 1.0, t).0;
                            let b = r.eval(mesh, c, -1.0, t).0;
                            assert!((a - b).abs() < 1e-12, "q={q} k={k}");
                        }
                    }
                    if let Some(c) = mesh.neighbor(k, 1, 1) {
                        for t in [-1.0, 0.1, 0.8, 1.0] {
                            let a = r.eval(mesh, k, t, 1.0).0;
                            let b = r.eval(mesh, c, t, -1.0).0;
                            assert!((a - b).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn solution_keeps_gauss_values_and_cell_means() {
        let rule = QuadratureRule::gauss(8);
        for q in 1..3 {
            let s = scheme(q, Boundary::Dirichlet);
            let v = field(&s);
            let hyp = s.hyperbolic(&v).unwrap();
            let r = reconstruct_solution_2d(s.space(), &v, &hyp.edges).unwrap();
            let mesh = s.space().mesh();
            let nodes = &s.space().reference().rule.nodes;
            for k in 0..mesh.n_cells() {
                for (b, &eta) in nodes.iter().enumerate() {
                    for (a, &xi) in nodes.iter().enumerate() {
                        let node = s.space().node(a, b);
                        assert!((r.eval(mesh, k, xi, eta).0 - v.get(k, node, 0)).abs() < 1e-13);
                    }
                }
                let mut mean = 0.0;
                let mut mean_h = 0.0;
                for (x, wx) in rule.iter() {
                    for (y, wy) in rule.iter() {
                        mean += wx * wy * r.eval(mesh, k, x, y).0;
                        mean_h += wx * wy * s.space().eval(&v, k, x, y);
                    }
                }
                assert!((mean - mean_h).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn flux_normal_components_match_numerical_flux() {
        let s = scheme(2, Boundary::Periodic);
        let v = field(&s);
        let hyp = s.hyperbolic(&v).unwrap();
        let f = reconstruct_flux_2d(s.space(), &hyp.edges).unwrap();
        let mesh = s.space().mesh();
        let nodes = &s.space().reference().rule.nodes;
        let n = nodes.len();
        for k in 0..mesh.n_cells() {
            for side in 0..2 {
                let t = if side == 0 { -1.0 } else { 1.0 };
                let ev = mesh.cell_edge(k, 0, side);
                let eh = mesh.cell_edge(k, 1, side);
                for (m, &x) in nodes.iter().enumerate() {
                    assert!((f.eval(mesh, k, 0, t, x).0 - hyp.edges.v_flux[ev * n + m]).abs() < 1e-12);
                    assert!((f.eval(mesh, k, 1, x, t).0 - hyp.edges.h_flux[eh * n + m]).abs() < 1e-12);
                }
            }
            let c = mesh.neighbor(k, 0, 1).unwrap();
            for t in [-0.7, 0.2] {
                assert!((f.eval(mesh, k, 0, 1.0, t).0 - f.eval(mesh, c, 0, -1.0, t).0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flux_divergence_equals_minus_rhs_at_nodes() {
        let s = scheme(1, Boundary::Dirichlet);
        let v = field(&s);
        let hyp = s.hyperbolic(&v).unwrap();
        let f = reconstruct_flux_2d(s.space(), &hyp.edges).unwrap();
        let mesh = s.space().mesh();
        let nodes = &s.space().reference().rule.nodes;
        for k in 0..mesh.n_cells() {
            for (b, &eta) in nodes.iter().enumerate() {
                for (a, &xi) in nodes.iter().enumerate() {
                    let div = f.eval(mesh, k, 0, xi, eta).1 + f.eval(mesh, k, 1, xi, eta).1;
                    let h = hyp.rhs.get(k, s.space().node(a, b), 0);
                    assert!((div + h).abs() < 1e-11, "{div} {h}");
                }
            }
        }
    }
}
