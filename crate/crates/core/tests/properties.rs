use std::sync::Arc;

use modadapt::dg::{DgField, Space1D, TraceSide};
use modadapt::flux::burgers_1d;
use modadapt::mesh::{Boundary, Mesh1D};
use modadapt::reconstruction::{reconstruct_flux_1d, reconstruct_solution_1d};
use modadapt::solver::{InitialCondition, Scheme, Scheme1D, SolverConfig};
use modadapt::systems::{ins_model, PressureLaw, StateBox};
use proptest::prelude::*;

const CELLS: usize = 6;

fn scheme(q: usize) -> Scheme1D {
    let mesh = Mesh1D::uniform(0.0, 1.0, CELLS, Boundary::Periodic).unwrap();
    let cfg = SolverConfig::new(Arc::new(burgers_1d()), q, 1e-3, 1.0, 0.0, Boundary::Periodic, InitialCondition::Sine);
    Scheme1D::new(mesh, cfg).unwrap()
}

fn field(space: &Space1D, vals: &[f64]) -> DgField {
    let z = space.zeros();
    DgField::from_values(z.shape(), vals[..z.values().len()].to_vec())
}

proptest! {
    #[test]
    fn reconstruction_is_continuous_and_conservative(
        q in 1usize..3,
        vals in proptest::collection::vec(-0.5f64..0.5, 3 * CELLS),
    ) {
        let s = scheme(q);
        let space = s.space();
        let mesh = space.mesh();
        let v = field(space, &vals);
        let hyp = s.hyperbolic(&v).unwrap();
        let vhat = reconstruct_solution_1d(space, &v, &hyp.edges.w).unwrap();
        let fhat = reconstruct_flux_1d(space, &hyp.rhs, &hyp.edges.flux).unwrap();
        for k in 0..CELLS {
            let r = mesh.neighbor(k, 1).unwrap();
            prop_assert!((vhat.eval(mesh, k, 1.0).0 - vhat.eval(mesh, r, -1.0).0).abs() < 1e-12);
            prop_assert!((fhat.eval(mesh, k, 1.0).0 - fhat.eval(mesh, r, -1.0).0).abs() < 1e-12);
            let rule = &space.reference().rule;
            let mean: f64 = rule
                .iter()
                .map(|(xi, w)| 0.5 * mesh.width(k) * w * (vhat.eval(mesh, k, xi).0 - space.eval(&v, k, xi)))
                .sum();
            prop_assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_gradients_are_adjoint(
        q in 0usize..3,
        a in proptest::collection::vec(-1.0f64..1.0, 3 * CELLS),
        b in proptest::collection::vec(-1.0f64..1.0, 3 * CELLS),
    ) {
        let s = scheme(q.max(1));
        let space = Space1D::new(s.space().mesh().clone(), q);
        let (phi, psi) = (field(&space, &a), field(&space, &b));
        let lhs = space.inner(&phi, &space.discrete_gradient(&psi, TraceSide::Minus));
        let rhs = -space.inner(&psi, &space.discrete_gradient(&phi, TraceSide::Plus));
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ins_relative_entropy_is_nonnegative(
        r1 in 0.5f64..2.0, m1 in -1.0f64..1.0,
        r2 in 0.5f64..2.0, m2 in -1.0f64..1.0,
    ) {
        let m = ins_model(1, 0.01, PressureLaw::Polytropic { kappa: 1.0, gamma: 1.4 }, StateBox::ins(1, (0.5, 2.0), 1.0)).unwrap();
        let u = m.conserved(&[r1, m1]);
        let v = m.conserved(&[r2, m2]);
        prop_assert!(m.relative_entropy_density(&u, &v) >= -1e-14);
    }
}
