//! Circular element plus a selfadjoint x0: the dedicated formula against
//! the general density path.

use brownkit::brown::{circular_selfadjoint_density, BrownProblem};
use brownkit::operator_models::{OperatorModel, RDiagonalSpec, RealMeasure};
use num_complex::Complex64;

fn main() -> brownkit::Result<()> {
    let eps = 1.0;
    let x0s = [
        (
            "bernoulli(±1)",
            RealMeasure::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)])?,
        ),
        ("semicircle(0.5)", RealMeasure::semicircle(0.5)?),
    ];
    for (name, m) in x0s {
        let p = BrownProblem::new(
            &RDiagonalSpec::Circular { variance: eps },
            &OperatorModel::SelfAdjoint(m.clone()),
        )?;
        println!("x0 = {name}");
        for z in [
            Complex64::new(0.0, 0.3),
            Complex64::new(0.8, 0.4),
            Complex64::new(1.2, 0.1),
        ] {
            println!(
                "  λ={z:<10} dedicated {:.10}  general {:.10}",
                circular_selfadjoint_density(&m, eps, z)?,
                p.density(z)?
            );
        }
    }
    Ok(())
}
