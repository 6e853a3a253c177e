//! Shared fixtures for the operator benchmarks.

use coalkin_core::{
    BoundaryRegime, Coalescence, CoalescenceForm, DensityField, Grid, Jumps, Kernel, ModelConfig, Placement,
};

fn kernel(s: &str) -> Kernel {
    s.parse().expect("fixture kernel strings are valid")
}

/// A periodic bumpy profile on `[-20, 20)` with spacing `dx`.
pub fn periodic_field(dx: f64) -> DensityField {
    let grid = Grid::periodic(-20.0, 40.0, dx).expect("valid grid");
    let values = grid
        .nodes()
        .map(|x| 1.0 + 0.5 * (std::f64::consts::PI * x / 5.0).sin())
        .collect();
    DensityField::new(grid, values, BoundaryRegime::periodic()).expect("valid field")
}

pub fn midpoint_model() -> ModelConfig {
    ModelConfig {
        coalescence: Some(Coalescence {
            form: CoalescenceForm::Midpoint,
            kernel: kernel("G:1,1"),
        }),
        jump: None,
    }
}

pub fn log_mass_model() -> ModelConfig {
    ModelConfig {
        coalescence: Some(Coalescence {
            form: CoalescenceForm::LogMass,
            kernel: kernel("G:1,0.5"),
        }),
        jump: None,
    }
}

pub fn repulsive_jump_model() -> ModelConfig {
    ModelConfig {
        coalescence: None,
        jump: Some(Jumps {
            kernel: kernel("G:1,1,2"),
            repulsion: Some(kernel("G:10,1,4")),
            placement: Placement::Target,
        }),
    }
}

pub fn combined_model() -> ModelConfig {
    ModelConfig {
        coalescence: Some(Coalescence {
            form: CoalescenceForm::Midpoint,
            kernel: kernel("G:0.05,1,2"),
        }),
        ..repulsive_jump_model()
    }
}
