//! Discontinuous Galerkin building blocks: Gauss quadrature, nodal Lagrange
//! bases, field storage and the one and two dimensional broken spaces.

pub mod basis;
pub mod field;
pub mod quadrature;
pub mod space1d;
pub mod space2d;

pub use basis::{legendre, LagrangeBasis, LegendrePoly};
pub use field::{DgField, FieldShape};
pub use quadrature::{gauss_exact_for, gauss_rule, QuadratureRule};
pub use space1d::{Space1D, TraceData};
pub use space2d::Space2D;

/// Which one-sided trace a discrete gradient uses on each edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceSide {
    Minus,
    Plus,
}

/// Tables of the degree `q` nodal basis on `[-1, 1]` at its own Gauss points.
#[derive(Clone, Debug)]
pub struct RefElement {
    pub q: usize,
    pub rule: QuadratureRule,
    pub basis: LagrangeBasis,
    /// `dphi[p][j] = phi_j'(xi_p)`.
    pub dphi: Vec<Vec<f64>>,
    /// Basis values at `-1` and `+1`.
    pub ends: [Vec<f64>; 2],
    /// Basis derivatives at `-1` and `+1`.
    pub end_ders: [Vec<f64>; 2],
    /// `sum_p w_p phi_i'(xi_p) phi_j'(xi_p)`.
    pub stiffness: Vec<Vec<f64>>,
}

impl RefElement {
    pub fn new(q: usize) -> Self {
        let rule = gauss_rule(q);
        let basis = LagrangeBasis::new(&rule.nodes);
        let dphi = basis.derivative_table(&rule.nodes);
        let ends = [basis.values(-1.0), basis.values(1.0)];
        let end_ders = [basis.derivatives(-1.0), basis.derivatives(1.0)];
        let n = q + 1;
        let stiffness = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|p| rule.weights[p] * dphi[p][i] * dphi[p][j]).sum())
                    .collect()
            })
            .collect();
        Self {
            q,
            rule,
            basis,
            dphi,
            ends,
            end_ders,
            stiffness,
        }
    }

    pub fn n(&self) -> usize {
        self.q + 1
    }

    /// Value at `xi` of the polynomial with nodal values `c`.
    pub fn eval(&self, c: &[f64], xi: f64) -> f64 {
        self.basis.interpolate(c, xi)
    }

    /// Reference derivative at `xi` of the polynomial with nodal values `c`.
    pub fn eval_deriv(&self, c: &[f64], xi: f64) -> f64 {
        self.basis.interpolate_derivative(c, xi)
    }

    pub fn end_value(&self, c: &[f64], side: usize) -> f64 {
        c.iter().zip(&self.ends[side]).map(|(a, b)| a * b).sum()
    }

    pub fn end_derivative(&self, c: &[f64], side: usize) -> f64 {
        c.iter().zip(&self.end_ders[side]).map(|(a, b)| a * b).sum()
    }
}

/// Interior-penalty couplings along one line of cells, pushed into `out` as
/// `(row, col, value)` triplets.
///
/// `widths[c]` and `eps[c]` describe the cells of the line in order, `dof(c, j)`
/// maps local node `j` of cell `c` to a global unknown and every entry is
/// multiplied by `scale` (the transverse quadrature weight in 2D).
#[allow(clippy::too_many_arguments)]
pub(crate) fn line_ip_triplets(
    re: &RefElement,
    widths: &[f64],
    eps: &[f64],
    periodic: bool,
    sigma: f64,
    scale: f64,
    dof: impl Fn(usize, usize) -> usize,
    out: &mut Vec<(usize, usize, f64)>,
) {
    let n = re.n();
    let cells = widths.len();
    for c in 0..cells {
        if eps[c] == 0.0 {
            continue;
        }
        let s = scale * eps[c] * 2.0 / widths[c];
        for i in 0..n {
            for j in 0..n {
                out.push((dof(c, i), dof(c, j), s * re.stiffness[i][j]));
            }
        }
    }
    let n_edges = if periodic { cells } else { cells + 1 };
    // (dof, jump coefficient, average-of-flux coefficient)
    let mut terms: Vec<(usize, f64, f64)> = Vec::with_capacity(2 * n);
    for e in 0..n_edges {
        let left = if periodic {
            Some((e + cells - 1) % cells)
        } else if e > 0 {
            Some(e - 1)
        } else {
            None
        };
        let right = if e < cells { Some(e) } else { None };
        let el = left.map_or(0.0, |c| eps[c]);
        let er = right.map_or(0.0, |c| eps[c]);
        let pen_eps = el.max(er);
        if pen_eps == 0.0 {
            continue;
        }
        let both = left.is_some() && right.is_some();
        let half = if both { 0.5 } else { 1.0 };
        let h_e = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (widths[l] + widths[r]),
            (Some(l), None) => widths[l],
            (None, Some(r)) => widths[r],
            (None, None) => unreachable!(),
        };
        terms.clear();
        if let Some(l) = left {
            let g = half * el * 2.0 / widths[l];
            for j in 0..n {
                terms.push((dof(l, j), re.ends[1][j], g * re.end_ders[1][j]));
            }
        }
        if let Some(r) = right {
            let g = half * er * 2.0 / widths[r];
            for j in 0..n {
                terms.push((dof(r, j), -re.ends[0][j], g * re.end_ders[0][j]));
            }
        }
        let pen = sigma * pen_eps / h_e;
        for &(a, ja, da) in &terms {
            for &(b, jb, db) in &terms {
                let v = -(ja * db + da * jb) + pen * ja * jb;
                if v != 0.0 {
                    out.push((a, b, scale * v));
                }
            }
        }
    }
}
