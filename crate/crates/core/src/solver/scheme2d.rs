use nalgebra_sparse::CsrMatrix;

use super::scheme1d::locate;
use super::{Hyperbolic, ImexCache, Scheme, SolverConfig};
use crate::dg::{DgField, QuadratureRule, Space2D};
use crate::mesh::Mesh2D;
use crate::Result;

/// Numerical flux data at the Gauss nodes of every edge of a Cartesian mesh.
///
/// Entry `e * (q + 1) + m` belongs to transverse node `m` of edge `e`, with
/// edges numbered as in [`Mesh2D::vertical_edges`] and
/// [`Mesh2D::horizontal_edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeData2D {
    pub v_minus: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub v_flux: Vec<f64>,
    pub v_w: Vec<f64>,
    pub h_minus: Vec<f64>,
    pub h_plus: Vec<f64>,
    pub h_flux: Vec<f64>,
    pub h_w: Vec<f64>,
    /// Directional parts `H_1`, `H_2` of the right-hand side.
    pub rhs_dir: [DgField; 2],
}

/// Quadrature-based nodal dG scheme on a Cartesian mesh.
#[derive(Debug)]
pub struct Scheme2D {
    space: Space2D,
    cfg: SolverConfig,
    vol: QuadratureRule,
    vol_phi: Vec<Vec<f64>>,
    vol_dphi: Vec<Vec<f64>>,
    mass: Vec<f64>,
    cache: ImexCache,
}

impl Scheme2D {
    pub fn new(mesh: Mesh2D, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let space = Space2D::new(mesh, cfg.degree);
        let q = cfg.degree;
        let vol = QuadratureRule::gauss((3 * q + 2).div_ceil(2));
        let vol_phi = space.reference().basis.value_table(&vol.nodes);
        let vol_dphi = space.reference().basis.derivative_table(&vol.nodes);
        let mut mass = Vec::with_capacity(space.n_dofs());
        for k in 0..space.n_cells() {
            for node in 0..space.nodes_per_cell() {
                mass.push(space.mass(k, node));
            }
        }
        Ok(Self {
            space,
            cfg,
            vol,
            vol_phi,
            vol_dphi,
            mass,
            cache: ImexCache::default(),
        })
    }

    pub fn space(&self) -> &Space2D {
        &self.space
    }

    fn edge_width(&self, dir: usize, minus: Option<usize>, plus: Option<usize>) -> f64 {
        let m = self.space.mesh();
        let w = |k: usize| {
            let (hx, hy) = m.cell_size(k);
            if dir == 0 {
                hx
            } else {
                hy
            }
        };
        match (minus, plus) {
            (Some(a), Some(b)) => 0.5 * (w(a) + w(b)),
            (Some(c), None) | (None, Some(c)) => w(c),
            (None, None) => unreachable!("edge without cells"),
        }
    }

    #[allow(clippy::type_complexity)]
    fn direction_edges(&self, v: &DgField, dir: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.space.reference().n();
        let edges = if dir == 0 {
            self.space.mesh().vertical_edges()
        } else {
            self.space.mesh().horizontal_edges()
        };
        let f = self.cfg.flux.as_ref();
        let len = edges.len() * n;
        let (mut um, mut up, mut fl, mut ww) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for (e, edge) in edges.iter().enumerate() {
            let r = self.cfg.tau / self.edge_width(dir, edge.minus, edge.plus);
            for m in 0..n {
                let a = edge.minus.map_or(0.0, |k| self.space.face_trace(v, k, dir, 1, m));
                let b = edge.plus.map_or(0.0, |k| self.space.face_trace(v, k, dir, 0, m));
                let ef = self
                    .cfg
                    .numflux
                    .evaluate(f, dir, a, b, r)
                    .map_err(|err| locate(err, format!("edge {e} (direction {dir})")))?;
                um.push(a);
                up.push(b);
                fl.push(ef.flux);
                ww.push(ef.w);
            }
        }
        Ok((um, up, fl, ww))
    }
}

impl Scheme for Scheme2D {
    type Edges = EdgeData2D;

    fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn n_cells(&self) -> usize {
        self.space.n_cells()
    }

    fn cell_measures(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|k| self.space.mesh().area(k)).collect()
    }

    fn initial_field(&self) -> Result<DgField> {
        let u0 = &self.cfg.initial;
        self.space.project(|x, y| u0.eval(&[x, y]))
    }

    fn hyperbolic(&self, v: &DgField) -> Result<Hyperbolic<EdgeData2D>> {
        let (v_minus, v_plus, v_flux, v_w) = self.direction_edges(v, 0)?;
        let (h_minus, h_plus, h_flux, h_w) = self.direction_edges(v, 1)?;
        let set = *self.cfg.numflux.state_set();
        let f = self.cfg.flux.as_ref();
        let re = self.space.reference();
        let n = re.n();
        let mut parts = [self.space.zeros(), self.space.zeros()];
        let mut line = vec![0.0; n];
        let mut fv = vec![0.0; self.vol.len()];
        for k in 0..self.n_cells() {
            let (hx, hy) = self.space.mesh().cell_size(k);
            for dir in 0..2 {
                let h = if dir == 0 { hx } else { hy };
                let mesh = self.space.mesh();
                let (lo, hi) = (mesh.cell_edge(k, dir, 0), mesh.cell_edge(k, dir, 1));
                let flux = if dir == 0 { &v_flux } else { &h_flux };
                let idx = |a: usize, m: usize| if dir == 0 { a + n * m } else { m + n * a };
                for m in 0..n {
                    let c = v.cell(k);
                    for (a, l) in line.iter_mut().enumerate() {
                        *l = c[idx(a, m)];
                    }
                    for (p, row) in self.vol_phi.iter().enumerate() {
                        let u: f64 = line.iter().zip(row).map(|(a, b)| a * b).sum();
                        set.check(u, || format!("cell {k}"))?;
                        fv[p] = f.flux(u, dir);
                    }
                    let fl = flux[lo * n + m];
                    let fr = flux[hi * n + m];
                    let out = parts[dir].cell_mut(k);
                    for a in 0..n {
                        let vol: f64 = (0..self.vol.len())
                            .map(|p| self.vol.weights[p] * fv[p] * self.vol_dphi[p][a])
                            .sum();
                        let b = vol - fr * re.ends[1][a] + fl * re.ends[0][a];
                        out[idx(a, m)] = b / (0.5 * h * re.rule.weights[a]);
                    }
                }
            }
        }
        let rhs = parts[0].axpy(1.0, &parts[1]);
        Ok(Hyperbolic {
            rhs,
            edges: EdgeData2D {
                v_minus,
                v_plus,
                v_flux,
                v_w,
                h_minus,
                h_plus,
                h_flux,
                h_w,
                rhs_dir: parts,
            },
        })
    }

    fn mass_diagonal(&self) -> &[f64] {
        &self.mass
    }

    fn ip_matrix(&self, eps: &[f64]) -> Result<CsrMatrix<f64>> {
        self.space.ip_matrix(eps, self.cfg.sigma)
    }

    fn stepper(&self) -> &ImexCache {
        &self.cache
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptivity::ModelField;
    use crate::flux::{burgers_2d, linear};
    use crate::mesh::Boundary;
    use crate::solver::InitialCondition;
    use std::sync::Arc;

    fn scheme(nx: usize, b: Boundary) -> Scheme2D {
        let mesh = Mesh2D::uniform((-1.0, 1.0), (-1.0, 1.0), nx, nx, b).unwrap();
        let cfg = SolverConfig::new(
            Arc::new(burgers_2d()),
            1,
            1e-3,
            1.0,
            0.01,
            b,
            InitialCondition::Gaussian { a: 10.0 },
        );
        Scheme2D::new(mesh, cfg).unwrap()
    }

    #[test]
    fn constant_state_is_steady() {
        let s = scheme(5, Boundary::Periodic);
        let c = s.space().project(|_, _| -0.4).unwrap();
        let hyp = s.hyperbolic(&c).unwrap();
        assert!(hyp.rhs.max_abs() < 1e-13);
        let next = s.imex_step(&c, &hyp, &ModelField::full(25, 0.01)).unwrap();
        assert!(next.values().iter().all(|v| (v + 0.4).abs() < 1e-13));
    }

    #[test]
    fn field_constant_in_y_reduces_to_one_dimension() {
        use crate::mesh::Mesh1D;
        use crate::solver::Scheme1D;
        let s2 = scheme(6, Boundary::Periodic);
        let mesh1 = Mesh1D::uniform(-1.0, 1.0, 6, Boundary::Periodic).unwrap();
        let cfg1 = SolverConfig::new(Arc::new(crate::flux::burgers_1d()), 1, 1e-3, 1.0, 0.01, Boundary::Periodic, InitialCondition::Sine);
        let s1 = Scheme1D::new(mesh1, cfg1).unwrap();
        let f = |x: f64| 0.5 * (3.0 * x).sin();
        let v1 = s1.space().project(f).unwrap();
        let v2 = s2.space().project(|x, _| f(x)).unwrap();
        let h1 = s1.hyperbolic(&v1).unwrap().rhs;
        let h2 = s2.hyperbolic(&v2).unwrap().rhs;
        for k in 0..36 {
            let (i, _) = s2.space().mesh().cell_ij(k);
            for node in 0..4 {
                assert!((h2.get(k, node, 0) - h1.get(i, node % 2, 0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn periodic_simple_model_conserves_mass() {
        let s = scheme(10, Boundary::Periodic);
        let mut v = s.initial_field().unwrap();
        let m0 = s.integral(&v);
        let zero = ModelField::zeros(100, 0.01);
        for _ in 0..100 {
            let hyp = s.hyperbolic(&v).unwrap();
            v = s.imex_step(&v, &hyp, &zero).unwrap();
        }
        assert!((s.integral(&v) - m0).abs() < 1e-10 * 0.1);
    }

    #[test]
    fn linear_step_is_superposable() {
        let mesh = Mesh2D::uniform((0.0, 1.0), (0.0, 1.0), 4, 3, Boundary::Dirichlet).unwrap();
        let cfg = SolverConfig::new(Arc::new(linear(&[0.5, -0.3])), 1, 1e-3, 1.0, 0.05, Boundary::Dirichlet, InitialCondition::Sine);
        let s = Scheme2D::new(mesh, cfg).unwrap();
        let mut eh = ModelField::zeros(12, 0.05);
        eh.set_active(5, true);
        eh.set_active(6, true);
        let a = s.space().interpolate(|x, y| (x * 3.0).sin() * y);
        let b = s.space().interpolate(|x, y| x - y * y);
        let step = |v: &DgField| s.imex_step(v, &s.hyperbolic(v).unwrap(), &eh).unwrap();
        let lhs = step(&a.axpy(1.0, &b));
        let rhs = step(&a).axpy(1.0, &step(&b));
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
