//! Brown density of a circular element on a grid, written as CSV.
//!
//! Usage: `circular_law [variance] [n] > density.csv`

use brownkit::brown::{density_grid, GridOptions, GridSpec};
use brownkit::operator_models::{OperatorModel, RDiagonalSpec};

fn main() -> brownkit::Result<()> {
    let mut args = std::env::args().skip(1);
    let variance: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(101);
    let edge = 1.5 * variance.sqrt();
    let grid = GridSpec::square(-edge, edge, n);
    let g = density_grid(
        &RDiagonalSpec::Circular { variance },
        &OperatorModel::zero(),
        &grid,
        GridOptions::default(),
    )?;
    eprintln!(
        "mass {:.4}, peak {:.6} (1/(π·ε) = {:.6})",
        g.total_mass_estimate,
        g.values.iter().cloned().fold(0.0, f64::max),
        1.0 / (std::f64::consts::PI * variance)
    );
    print!("{}", g.to_csv());
    Ok(())
}
