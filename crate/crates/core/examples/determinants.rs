//! Fuglede-Kadison determinants of x0 + T - λ across the boundary cases.

use brownkit::brown::fk_log_determinant;
use brownkit::operator_models::{OperatorModel, RDiagonalSpec};
use num_complex::Complex64;

fn main() -> brownkit::Result<()> {
    let x0 = OperatorModel::selfadjoint_atoms(&[(-1.0, 0.5), (1.0, 0.5)])?;
    let specs = [
        ("haar(1)", RDiagonalSpec::HaarUnitary { gamma: 1.0 }),
        ("circular(1)", RDiagonalSpec::Circular { variance: 1.0 }),
        ("cauchy(1)", RDiagonalSpec::CircularCauchy { scale: 1.0 }),
    ];
    println!(
        "{:<12} {:>10} {:>12} {:>12} {:>14}",
        "T", "lambda", "det", "t=1e-3", "case"
    );
    for (name, t) in &specs {
        for lambda in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.5),
            Complex64::new(3.0, 0.0),
        ] {
            let d0 = fk_log_determinant(t, &x0, lambda, 0.0)?;
            let dt = fk_log_determinant(t, &x0, lambda, 1e-3)?;
            let case = d0
                .case
                .map(|c| format!("{c:?}"))
                .unwrap_or_else(|| "-".into());
            println!(
                "{name:<12} {:>10} {:>12.8} {:>12.8} {case:>14}",
                format!("{lambda}"),
                d0.value(),
                dt.value()
            );
        }
    }
    Ok(())
}
