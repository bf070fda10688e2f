//! Boundary of the support domain for x0 = 0.25δ₋₁ + 0.5δ₀ + 0.25δ₁ plus a
//! Haar unitary or a circular element; the Haar case has a hole of radius √½.

use brownkit::brown::{domain_boundary, BrownProblem, GridSpec, Margin};
use brownkit::operator_models::{OperatorModel, RDiagonalSpec};
use num_complex::Complex64;

fn main() -> brownkit::Result<()> {
    let x0 = OperatorModel::selfadjoint_atoms(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)])?;
    for (name, t) in [
        ("haar(1)", RDiagonalSpec::HaarUnitary { gamma: 1.0 }),
        ("circular(1)", RDiagonalSpec::Circular { variance: 1.0 }),
    ] {
        let p = BrownProblem::new(&t, &x0)?;
        let hole = p.boundary_along_ray(Complex64::new(0.0, 0.0), 0.4, 2.0, 200, Margin::Outer)?;
        match hole {
            Some(r) => println!("{name}: hole radius {r:.10} (r² = {:.10})", r * r),
            None => println!("{name}: no hole"),
        }
        let pts = domain_boundary(&p, &GridSpec::square(-2.5, 2.5, 51))?;
        let inner = pts.iter().filter(|(_, m)| *m == Margin::Inner).count();
        println!(
            "  {} boundary points ({inner} on the outer edge, {} on the hole)",
            pts.len(),
            pts.len() - inner
        );
        println!("  candidates for atoms: {:?}", p.atom_candidates());
    }
    Ok(())
}
