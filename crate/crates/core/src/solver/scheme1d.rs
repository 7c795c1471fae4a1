use nalgebra_sparse::CsrMatrix;

use super::{Hyperbolic, ImexCache, Scheme, SolverConfig};
use crate::dg::{DgField, QuadratureRule, Space1D};
use crate::mesh::Mesh1D;
use crate::Result;

/// Numerical flux data on every edge of a 1D mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeData1D {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    /// `F(v-, v+)`.
    pub flux: Vec<f64>,
    /// Intermediate states `w(v-, v+)`.
    pub w: Vec<f64>,
}

/// Nodal dG scheme for a scalar conservation law on a 1D mesh.
#[derive(Debug)]
pub struct Scheme1D {
    space: Space1D,
    cfg: SolverConfig,
    vol: QuadratureRule,
    vol_phi: Vec<Vec<f64>>,
    vol_dphi: Vec<Vec<f64>>,
    mass: Vec<f64>,
    cache: ImexCache,
}

impl Scheme1D {
    pub fn new(mesh: Mesh1D, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let space = Space1D::new(mesh, cfg.degree);
        let q = cfg.degree;
        let vol = QuadratureRule::gauss((3 * q + 2).div_ceil(2));
        let vol_phi = space.reference().basis.value_table(&vol.nodes);
        let vol_dphi = space.reference().basis.derivative_table(&vol.nodes);
        let mut mass = Vec::with_capacity(space.n_dofs());
        for k in 0..space.n_cells() {
            for p in 0..=q {
                mass.push(space.mass(k, p));
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

    pub fn space(&self) -> &Space1D {
        &self.space
    }

    /// Edge length used in `tau / h`: mean width of the adjacent cells.
    pub fn edge_width(&self, e: usize) -> f64 {
        let edge = &self.space.mesh().edges()[e];
        let m = self.space.mesh();
        match (edge.left, edge.right) {
            (Some(l), Some(r)) => 0.5 * (m.width(l) + m.width(r)),
            (Some(c), None) | (None, Some(c)) => m.width(c),
            (None, None) => unreachable!("edge without cells"),
        }
    }

    pub fn edge_data(&self, v: &DgField) -> Result<EdgeData1D> {
        let tr = self.space.traces(v);
        let f = self.cfg.flux.as_ref();
        let mut flux = Vec::with_capacity(tr.len());
        let mut w = Vec::with_capacity(tr.len());
        for e in 0..tr.len() {
            let r = self.cfg.tau / self.edge_width(e);
            let ef = self
                .cfg
                .numflux
                .evaluate(f, 0, tr.minus[e], tr.plus[e], r)
                .map_err(|err| locate(err, format!("edge {e}")))?;
            flux.push(ef.flux);
            w.push(ef.w);
        }
        Ok(EdgeData1D {
            minus: tr.minus,
            plus: tr.plus,
            flux,
            w,
        })
    }
}

pub(super) fn locate(err: crate::Error, at: String) -> crate::Error {
    match err {
        crate::Error::StateSpaceViolation { value, lo, hi, location } => crate::Error::StateSpaceViolation {
            value,
            lo,
            hi,
            location: format!("{location} at {at}"),
        },
        other => other,
    }
}

impl Scheme for Scheme1D {
    type Edges = EdgeData1D;

    fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn n_cells(&self) -> usize {
        self.space.n_cells()
    }

    fn cell_measures(&self) -> Vec<f64> {
        self.space.mesh().widths()
    }

    fn initial_field(&self) -> Result<DgField> {
        let u0 = &self.cfg.initial;
        self.space.project(|x| u0.eval(&[x]))
    }

    fn hyperbolic(&self, v: &DgField) -> Result<Hyperbolic<EdgeData1D>> {
        let edges = self.edge_data(v)?;
        let set = *self.cfg.numflux.state_set();
        let f = self.cfg.flux.as_ref();
        let re = self.space.reference();
        let n = re.n();
        let mesh = self.space.mesh();
        let mut rhs = self.space.zeros();
        let mut fv = vec![0.0; self.vol.len()];
        for k in 0..self.n_cells() {
            let c = v.cell(k);
            for (p, row) in self.vol_phi.iter().enumerate() {
                let u: f64 = c.iter().zip(row).map(|(a, b)| a * b).sum();
                set.check(u, || format!("cell {k}"))?;
                fv[p] = f.flux(u, 0);
            }
            let fl = edges.flux[mesh.cell_edge(k, 0)];
            let fr = edges.flux[mesh.cell_edge(k, 1)];
            let h = mesh.width(k);
            let out = rhs.cell_mut(k);
            for j in 0..n {
                let vol: f64 = (0..self.vol.len())
                    .map(|p| self.vol.weights[p] * fv[p] * self.vol_dphi[p][j])
                    .sum();
                let b = vol - fr * re.ends[1][j] + fl * re.ends[0][j];
                out[j] = b / (0.5 * h * re.rule.weights[j]);
            }
        }
        Ok(Hyperbolic { rhs, edges })
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
