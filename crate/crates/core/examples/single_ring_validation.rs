//! Random-matrix check of a deformed single ring: x0 with spectrum
//! 0.25δ₋₁ + 0.5δ₀ + 0.25δ₁ plus a Haar unitary.
//!
//! Usage: `single_ring_validation [n] [samples] [nx] [ny] [supersample]`

use brownkit::brown::{density_grid, GridOptions, GridSpec};
use brownkit::operator_models::{OperatorModel, RDiagonalSpec};
use brownkit::rmt_oracle::{compare_report, empirical_brown_density, EnsembleSpec};
use std::time::Instant;

fn arg(k: usize, default: usize) -> usize {
    std::env::args()
        .nth(k)
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

fn main() -> brownkit::Result<()> {
    let (n, samples, nx, ny, ss) = (arg(1, 300), arg(2, 20), arg(3, 25), arg(4, 17), arg(5, 4));
    let x0 = OperatorModel::selfadjoint_atoms(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)])?;
    let t = RDiagonalSpec::HaarUnitary { gamma: 1.0 };
    let grid = GridSpec {
        x_min: -2.0,
        x_max: 2.0,
        nx,
        y_min: -1.3,
        y_max: 1.3,
        ny,
    };

    let clock = Instant::now();
    let theory = density_grid(&t, &x0, &grid, GridOptions { supersample: ss })?;
    println!(
        "theory mass {:.4} in {:.1?}",
        theory.total_mass_estimate,
        clock.elapsed()
    );

    let clock = Instant::now();
    let spec = EnsembleSpec::new(t, x0, n, samples, 7);
    let empirical = empirical_brown_density(&spec, &grid)?;
    println!(
        "empirical mass {:.4} (clamped {:.4}) in {:.1?}",
        empirical.grid.total_mass_estimate,
        empirical.clamped_mass,
        clock.elapsed()
    );

    let report = compare_report(&theory, &empirical.grid)?;
    println!(
        "L1 = {:.4}, max |diff| = {:.4}",
        report.l1_distance, report.max_abs
    );
    Ok(())
}
