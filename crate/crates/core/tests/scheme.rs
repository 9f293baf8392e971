use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use richards_core::hydro::{BrooksCorey, EtaMode, Formulation, Parametrization};
use richards_core::mesh::{build_line_mesh, build_rect_mesh, discrete_h1_inner, BoundingBox, CellEdgeValues, EdgeKind};
use richards_core::scheme::{discretize_boundary, edge_flux, jacobian, residual, StepProblem};

mod common;
use common::{fd_jacobian, mixed_mesh, smooth_state};

fn param(kind: Formulation, beta: f64) -> Parametrization {
    Parametrization::new(kind, BrooksCorey::new(-0.01, beta, EtaMode::Derived).unwrap())
}

#[test]
fn jacobian_matches_finite_differences() {
    let mesh = mixed_mesh(3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in [Formulation::Tau, Formulation::Kirchhoff] {
        for beta in [1.0, 4.0, 16.0] {
            let p = param(kind, beta);
            let bd = discretize_boundary(&mesh, &p, 1.0);
            for _ in 0..20 {
                let prev: Vec<f64> = (0..9).map(|_| rng.gen_range(0.0..1.0)).collect();
                let prob = StepProblem::new(&mesh, &p, [0.0, -1.0], 0.01, &prev, &bd).unwrap();
                let tau = smooth_state(&mut rng, &p, 9);
                let j = jacobian(&prob, &tau).unwrap().to_dense();
                let (fd, noise) = fd_jacobian(&prob, &tau);
                for l in 0..9 {
                    for k in 0..9 {
                        let tol = 1e-5 * j[l][k].abs() + noise[l][k];
                        assert!((j[l][k] - fd[l][k]).abs() <= tol, "{kind} beta {beta} [{l}][{k}]: {} vs {}", j[l][k], fd[l][k]);
                    }
                }
            }
        }
    }
}

#[test]
fn column_sums_are_nonnegative() {
    let mesh = mixed_mesh(5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = param(Formulation::Tau, 4.0);
    let bd = discretize_boundary(&mesh, &p, 1.0);
    let touches_dirichlet: Vec<bool> = mesh.cells.iter().map(|c| c.edges.iter().any(|&e| mesh.edges[e].is_dirichlet())).collect();
    for _ in 0..20 {
        let prev = vec![0.1; 25];
        let prob = StepProblem::new(&mesh, &p, [0.0, -1.0], 0.01, &prev, &bd).unwrap();
        let tau: Vec<f64> = (0..25).map(|_| rng.gen_range(-0.1..2.5)).collect();
        let sums = jacobian(&prob, &tau).unwrap().column_sums();
        for (k, s) in sums.iter().enumerate() {
            assert!(*s >= -1e-12, "column {k}: {s}");
            if touches_dirichlet[k] {
                assert!(*s > 0.0);
            }
        }
    }
}

/// Without gravity `m_L j_LK = -dt A_sigma u'(tau_K)`, so dividing column K by
/// `u'(tau_K)` leaves a symmetric off-diagonal part.
#[test]
fn scaled_jacobian_is_symmetric_without_gravity() {
    let mesh = mixed_mesh(4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = param(Formulation::Tau, 2.0);
    let bd = discretize_boundary(&mesh, &p, 1.0);
    let prev = vec![0.3; 16];
    let prob = StepProblem::new(&mesh, &p, [0.0, 0.0], 0.05, &prev, &bd).unwrap();
    let tau = smooth_state(&mut rng, &p, 16);
    let j = jacobian(&prob, &tau).unwrap().to_dense();
    let scaled = |l: usize, k: usize| mesh.cells[l].volume * j[l][k] / p.eval(tau[k]).du;
    for l in 0..16 {
        for k in 0..l {
            assert!((scaled(l, k) - scaled(k, l)).abs() <= 1e-13 * scaled(l, k).abs().max(1e-300));
        }
    }
}

proptest! {
    #[test]
    fn fluxes_are_antisymmetric(seed in any::<u64>(), beta in prop::sample::select(vec![1.0, 4.0, 16.0])) {
        let mesh = mixed_mesh(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = param(Formulation::Tau, beta);
        let bd = discretize_boundary(&mesh, &p, 1.0);
        let prev = vec![0.0; 9];
        let g = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let prob = StepProblem::new(&mesh, &p, g, 0.01, &prev, &bd).unwrap();
        let tau: Vec<f64> = (0..9).map(|_| rng.gen_range(-0.1..2.5)).collect();
        for e in mesh.interior_edges() {
            let EdgeKind::Interior { cells: [k, l], .. } = e.kind else { unreachable!() };
            let fk = edge_flux(&prob, tau[k], tau[l], e, k);
            let fl = edge_flux(&prob, tau[l], tau[k], e, l);
            prop_assert!((fk + fl).abs() <= 1e-14 * fk.abs().max(fl.abs()).max(1e-300));
        }
    }

    #[test]
    fn mass_identity_without_dirichlet(seed in any::<u64>()) {
        let mesh = build_rect_mesh(4, 3, BoundingBox::new([0.0, 0.0], [2.0, 1.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = param(Formulation::Tau, 4.0);
        let bd = vec![0.0; mesh.num_edges()];
        let prev: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..1.0)).collect();
        let prob = StepProblem::new(&mesh, &p, [0.3, -1.0], 0.1, &prev, &bd).unwrap();
        let tau: Vec<f64> = (0..12).map(|_| rng.gen_range(-0.1..2.5)).collect();
        let f = residual(&prob, &tau).unwrap();
        let lhs: f64 = mesh.cells.iter().map(|c| c.volume * f[c.id]).sum();
        let rhs: f64 = mesh.cells.iter().map(|c| c.volume * (p.saturation(tau[c.id]) - prev[c.id])).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-13);
    }

    #[test]
    fn h1_form_is_nonnegative(seed in any::<u64>()) {
        let mesh = mixed_mesh(4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<f64> = (0..mesh.num_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let edges: Vec<f64> = (0..mesh.num_edges()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = CellEdgeValues { cells, edges };
        prop_assert!(discrete_h1_inner(&mesh, &v, &v).unwrap() >= 0.0);
    }
}

#[test]
fn h1_form_vanishes_on_matching_constants() {
    let mesh = mixed_mesh(4);
    let v = CellEdgeValues::sample(&mesh, |_| 0.7);
    assert_eq!(discrete_h1_inner(&mesh, &v, &v).unwrap(), 0.0);
    let mut w = v.clone();
    let d = mesh.dirichlet_edges().next().unwrap().id;
    w.edges[d] = 0.2;
    assert!(discrete_h1_inner(&mesh, &w, &w).unwrap() > 0.0);
}

/// The sum of `m_sigma n_{K,sigma}` over the edges of a cell vanishes, so a
/// constant gravity field is divergence free cell by cell.
#[test]
fn constant_gravity_is_divergence_free() {
    for mesh in [build_rect_mesh(5, 3, BoundingBox::new([0.0, 0.0], [1.0, 3.0])).unwrap(), mixed_mesh(4)] {
        for c in &mesh.cells {
            let mut acc = [0.0, 0.0];
            for &e in &c.edges {
                let edge = &mesh.edges[e];
                let n = edge.normal_from(c.id);
                acc[0] += edge.measure * n[0];
                acc[1] += edge.measure * n[1];
            }
            let per = c.edges.iter().map(|&e| mesh.edges[e].measure).sum::<f64>();
            assert!(acc[0].abs() <= 1e-12 * per && acc[1].abs() <= 1e-12 * per);
        }
    }
    let line = build_line_mesh(4, 0.0, 2.0).unwrap();
    for c in &line.cells {
        let s: f64 = c.edges.iter().map(|&e| line.edges[e].normal_from(c.id)[0]).sum();
        assert_eq!(s, 0.0);
    }
}

/// Transmissibilities recomputed from end points and centres.
#[test]
fn transmissibilities_from_raw_geometry() {
    let mesh = build_rect_mesh(3, 5, BoundingBox::new([-1.0, 0.0], [2.0, 0.5])).unwrap();
    let dist_to_line = |x: [f64; 2], [a, b]: [[f64; 2]; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        ((x[0] - a[0]) * dy - (x[1] - a[1]) * dx).abs() / dx.hypot(dy)
    };
    for e in &mesh.edges {
        let ends = e.endpoints.unwrap();
        let len = (ends[1][0] - ends[0][0]).hypot(ends[1][1] - ends[0][1]);
        let d = match e.kind {
            EdgeKind::Interior { cells: [k, l], .. } => {
                dist_to_line(mesh.cells[k].center, ends) + dist_to_line(mesh.cells[l].center, ends)
            }
            EdgeKind::Boundary { cell, .. } => dist_to_line(mesh.cells[cell].center, ends),
        };
        assert!((e.transmissibility - len / d).abs() <= 1e-12 * e.transmissibility);
    }
}
