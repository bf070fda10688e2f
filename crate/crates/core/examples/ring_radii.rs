//! Inner and outer radii of the single ring of T1 + T2 for free R-diagonal
//! summands.

use brownkit::brown::ring_radii;
use brownkit::operator_models::RDiagonalSpec;

fn main() -> brownkit::Result<()> {
    let cases = [
        (
            RDiagonalSpec::HaarUnitary { gamma: 2.0 },
            RDiagonalSpec::HaarUnitary { gamma: 1.0 },
        ),
        (
            RDiagonalSpec::HaarUnitary { gamma: 3.0 },
            RDiagonalSpec::Circular { variance: 1.0 },
        ),
        (
            RDiagonalSpec::Circular { variance: 1.0 },
            RDiagonalSpec::Circular { variance: 2.0 },
        ),
    ];
    for (t1, t2) in &cases {
        let r = ring_radii(t1, t2)?;
        println!(
            "{t1:?} + {t2:?}: inner {:.6} (squared gap {:.6}), outer {:.6}",
            r.r_inner, r.inner_squared, r.r_outer
        );
    }
    Ok(())
}
