//! Helpers shared by the integration tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use richards_core::hydro::Parametrization;
use richards_core::mesh::{build_rect_mesh, BoundaryTag, BoundingBox, Mesh};
use richards_core::scheme::{residual, StepProblem};

/// Top-left third of the upper side is Dirichlet, the rest no-flux.
pub fn mixed_mesh(n: usize) -> Mesh {
    let mut m = build_rect_mesh(n, n, BoundingBox::unit_square()).unwrap();
    m.retag_boundary(|p, _| if p[1] == 1.0 && p[0] < 0.4 { BoundaryTag::Dirichlet } else { BoundaryTag::NoFlux });
    assert!(m.has_dirichlet());
    m
}

/// A state whose cells avoid the kinks of both parametrizations.
pub fn smooth_state(rng: &mut ChaCha8Rng, p: &Parametrization, n: usize) -> Vec<f64> {
    let d = p.params;
    let kinks = [0.0, d.tau_star, d.u_b, p.sat_inverse(1.0).unwrap()];
    (0..n)
        .map(|_| loop {
            let t: f64 = rng.gen_range(1e-3..2.5);
            if kinks.iter().all(|k| (t - k).abs() > 1e-3) {
                break t;
            }
        })
        .collect()
}

/// Central differences with one Richardson step (fourth order), and the
/// rounding noise of each difference quotient. The step stays below the 1e-3
/// gap kept around the kinks.
pub fn fd_jacobian(problem: &StepProblem<'_>, tau: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = tau.len();
    let central = |k: usize, h: f64| {
        let mut plus = tau.to_vec();
        let mut minus = tau.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let fp = residual(problem, &plus).unwrap();
        let fm = residual(problem, &minus).unwrap();
        let quot: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let size: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| a.abs().max(b.abs())).collect();
        (quot, size)
    };
    let mut rows = vec![vec![0.0; n]; n];
    let mut noise = vec![vec![0.0; n]; n];
    for k in 0..n {
        let h = 1e-4 * tau[k].abs().max(1e-2);
        let ((coarse, size), (fine, _)) = (central(k, h), central(k, 0.5 * h));
        for l in 0..n {
            rows[l][k] = (4.0 * fine[l] - coarse[l]) / 3.0;
            noise[l][k] = 10.0 * f64::EPSILON * size[l] / h;
        }
    }
    (rows, noise)
}
