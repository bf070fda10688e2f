//! Measures shared by the integration tests.

#![allow(dead_code)]

use brownkit::measures::{Atom, Piece, PositiveMeasure, SymmetricMeasure};

pub fn triangle_bump() -> PositiveMeasure {
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let values = grid.iter().map(|u| u * (2.0 - u)).collect();
    PositiveMeasure::normalized(vec![], vec![Piece { grid, values }]).unwrap()
}

pub fn atom_and_plateau() -> PositiveMeasure {
    PositiveMeasure::new(
        vec![Atom { x: 0.5, mass: 0.3 }],
        vec![Piece {
            grid: vec![1.0, 2.0],
            values: vec![0.7, 0.7],
        }],
    )
    .unwrap()
}

pub fn kernel_quarter() -> PositiveMeasure {
    PositiveMeasure::from_atoms(&[(0.0, 0.25), (1.5, 0.75)]).unwrap()
}

pub fn tabulated_quarter_circle(variance: f64) -> PositiveMeasure {
    let r = 2.0 * variance.sqrt();
    let grid: Vec<f64> = (0..=400).map(|i| r * i as f64 / 400.0).collect();
    let values = grid
        .iter()
        .map(|u| (r * r - u * u).max(0.0).sqrt() / (std::f64::consts::PI * variance))
        .collect();
    PositiveMeasure::normalized(vec![], vec![Piece { grid, values }]).unwrap()
}

/// Named symmetric measures covering closed forms, atoms, densities,
/// heavy tails and a kernel.
pub fn stored_measures() -> Vec<(&'static str, SymmetricMeasure)> {
    let sym = |m: PositiveMeasure| brownkit::measures::symmetrize(&m).unwrap();
    vec![
        ("semicircle(1)", SymmetricMeasure::semicircle(1.0).unwrap()),
        (
            "semicircle(0.3)",
            SymmetricMeasure::semicircle(0.3).unwrap(),
        ),
        ("bernoulli(0.8)", SymmetricMeasure::bernoulli(0.8).unwrap()),
        ("cauchy(1)", SymmetricMeasure::cauchy(1.0).unwrap()),
        (
            "cauchy-power(2)",
            SymmetricMeasure::cauchy_power(2).unwrap(),
        ),
        ("triangle-bump", sym(triangle_bump())),
        ("atom-and-plateau", sym(atom_and_plateau())),
        ("kernel-quarter", sym(kernel_quarter())),
        (
            "tabulated-semicircle(2)",
            sym(tabulated_quarter_circle(2.0)),
        ),
    ]
}

/// Stored measures with a finite second moment.
pub fn light_tailed() -> Vec<(&'static str, SymmetricMeasure)> {
    stored_measures()
        .into_iter()
        .filter(|(n, _)| !n.starts_with("cauchy"))
        .collect()
}
