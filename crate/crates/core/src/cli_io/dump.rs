use std::fs;
use std::path::Path;

use crate::dg::{DgField, Space1D, Space2D};
use crate::{Error, Result};

/// Contents of a `fields_t<time>.dat` file: one row per Gauss node.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub t: f64,
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
    pub v_h: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub eps_hat: Vec<f64>,
}

pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    let text = fs::read_to_string(path)?;
    let mut t = f64::NAN;
    let mut dump = FieldDump {
        t,
        dim: 0,
        coords: Vec::new(),
        v_h: Vec::new(),
        v_hat: Vec::new(),
        eps_hat: Vec::new(),
    };
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(c) = line.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("t =") {
                t = v.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
        let dim = match cols.len() {
            4 => 1,
            5 => 2,
            n => return Err(Error::Parse(format!("line {}: expected 4 or 5 columns, got {n}", line_no + 1))),
        };
        if dump.dim != 0 && dump.dim != dim {
            return Err(Error::Parse(format!("line {}: column count changed", line_no + 1)));
        }
        dump.dim = dim;
        dump.coords.push(cols[..dim].to_vec());
        dump.v_h.push(cols[dim]);
        dump.v_hat.push(cols[dim + 1]);
        dump.eps_hat.push(cols[dim + 2]);
    }
    dump.t = t;
    Ok(dump)
}

const NODE_TOL: f64 = 1e-9;

impl FieldDump {
    /// Nodal field on `space` whose value at each Gauss node is the dumped
    /// `v_h` at that node.
    pub fn to_field_1d(&self, space: &Space1D) -> Result<DgField> {
        let mesh = space.mesh();
        let mut field = space.zeros();
        let mut seen = vec![false; field.values().len()];
        for (x, &v) in self.coords.iter().zip(&self.v_h) {
            let (k, _) = mesh
                .locate(x[0])
                .ok_or_else(|| Error::Parse(format!("point {} outside the mesh", x[0])))?;
            let p = (0..=space.degree())
                .find(|&p| (space.node_x(k, p) - x[0]).abs() <= NODE_TOL * mesh.width(k))
                .ok_or_else(|| Error::Parse(format!("point {} is not a Gauss node", x[0])))?;
            let i = space.dof(k, p);
            field.values_mut()[i] = v;
            seen[i] = true;
        }
        check_complete(&seen)?;
        Ok(field)
    }

    pub fn to_field_2d(&self, space: &Space2D) -> Result<DgField> {
        let mesh = space.mesh();
        let npc = space.nodes_per_cell();
        let mut field = space.zeros();
        let mut seen = vec![false; field.values().len()];
        for (x, &v) in self.coords.iter().zip(&self.v_h) {
            let (i, _) = mesh
                .x_axis()
                .locate(x[0])
                .ok_or_else(|| Error::Parse(format!("x = {} outside the mesh", x[0])))?;
            let (j, _) = mesh
                .y_axis()
                .locate(x[1])
                .ok_or_else(|| Error::Parse(format!("y = {} outside the mesh", x[1])))?;
            let k = mesh.cell_index(i, j);
            let (hx, hy) = mesh.cell_size(k);
            let n = (0..npc)
                .find(|&n| {
                    let (a, b) = space.node_xy(k, n);
                    (a - x[0]).abs() <= NODE_TOL * hx && (b - x[1]).abs() <= NODE_TOL * hy
                })
                .ok_or_else(|| Error::Parse(format!("({}, {}) is not a Gauss node", x[0], x[1])))?;
            field.set(k, n, 0, v);
            seen[k * npc + n] = true;
        }
        check_complete(&seen)?;
        Ok(field)
    }
}

fn check_complete(seen: &[bool]) -> Result<()> {
    match seen.iter().position(|s| !s) {
        Some(i) => Err(Error::Parse(format!("dump has no value for node {i}"))),
        None => Ok(()),
    }
}
