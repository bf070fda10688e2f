//! Radial distribution of R-diagonal Brown measures, closed form against
//! the S-transform route.

use brownkit::measures::PositiveMeasure;
use brownkit::operator_models::{radial_cdf, radial_cdf_via_s_transform, RDiagonalSpec};

fn main() -> brownkit::Result<()> {
    let specs = [
        ("circular(1)", RDiagonalSpec::Circular { variance: 1.0 }),
        ("cauchy(1)", RDiagonalSpec::CircularCauchy { scale: 1.0 }),
        (
            "cauchy-power(3)",
            RDiagonalSpec::CircularCauchyPower { n: 3 },
        ),
        (
            "moduli 0.5|1|2",
            RDiagonalSpec::General {
                measure: PositiveMeasure::from_atoms(&[(0.5, 0.3), (1.0, 0.3), (2.0, 0.4)])?,
            },
        ),
    ];
    for (name, t) in &specs {
        println!("{name}");
        for r in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
            println!(
                "  r={r:<5} F={:.12}  via S={:.12}",
                radial_cdf(t, r)?,
                radial_cdf_via_s_transform(t, r)?
            );
        }
    }
    Ok(())
}
