//! The two benchmark cases on the unit square.
//!
//! Test 1: water injected at pressure 1 through the top boundary segment
//! `x1 < 0.3` into a dry soil, with gravity. Test 2: redistribution of a wet
//! quadrant in a closed box without gravity.

use super::config::{Case, DirichletSpec, MeshSpec, RunConfig};
use crate::hydro::{EtaMode, Formulation};
use crate::mesh::BoundingBox;
use crate::newton::DEFAULT_MAX_ITER;
use crate::scheme::{InitialSaturation, SaturationRegion};

pub const ENTRY_PRESSURE: f64 = -0.01;
pub const DRY_SATURATION: f64 = 1e-6;
/// Reference tolerances: the tightest the residuals of each case reach
/// reliably in double precision. Saturated cells carry `tau` near 1 to 2, whose
/// rounding alone leaves a residual of order 1e-13 on the 20x20 grid.
pub const TEST1_REFERENCE_EPS: f64 = 1e-10;
pub const TEST2_REFERENCE_EPS: f64 = 1e-14;

fn common(case: Case) -> RunConfig {
    RunConfig {
        case,
        formulation: Formulation::Tau,
        beta: 4.0,
        p_b: ENTRY_PRESSURE,
        eta_mode: EtaMode::Derived,
        mesh: MeshSpec::Rect { nx: 20, ny: 20 },
        domain: BoundingBox::unit_square(),
        dt: 0.01,
        t_end: 0.7,
        eps: 1e-6,
        max_iter: DEFAULT_MAX_ITER,
        gravity: false,
        dirichlet: None,
        initial: InitialSaturation::uniform(DRY_SATURATION),
        adaptive_dt: false,
        reference_eps: None,
        snapshot_times: Vec::new(),
        output: None,
    }
}

pub fn preset_test1(beta: f64, eps: f64, formulation: Formulation, (nx, ny): (usize, usize)) -> RunConfig {
    RunConfig {
        formulation,
        beta,
        eps,
        mesh: MeshSpec::Rect { nx, ny },
        gravity: true,
        dirichlet: Some(DirichletSpec { region: BoundingBox::new([0.0, 1.0], [0.3, 1.0]), pressure: 1.0 }),
        reference_eps: Some(TEST1_REFERENCE_EPS),
        snapshot_times: vec![0.1, 0.5, 0.7],
        ..common(Case::Test1)
    }
}

pub fn preset_test2(eps: f64, formulation: Formulation, (nx, ny): (usize, usize)) -> RunConfig {
    RunConfig {
        formulation,
        eps,
        mesh: MeshSpec::Rect { nx, ny },
        dt: 1e3,
        t_end: 1e5,
        initial: InitialSaturation {
            default: DRY_SATURATION,
            regions: vec![SaturationRegion { bounds: BoundingBox::new([0.0, 0.5], [0.5, 1.0]), value: 0.5 }],
        },
        reference_eps: Some(TEST2_REFERENCE_EPS),
        ..common(Case::Test2)
    }
}

/// Starting point for configuration files of the given case.
pub fn base_for(case: Case) -> RunConfig {
    match case {
        Case::Test1 => preset_test1(4.0, 1e-6, Formulation::Tau, (20, 20)),
        Case::Test2 => preset_test2(1e-6, Formulation::Tau, (20, 20)),
        Case::Custom => common(Case::Custom),
    }
}
