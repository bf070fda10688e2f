//! Semicircular x0 of variance t plus a circular element of variance s: the
//! outer boundary is an ellipse with semi-axes (2t+s)/√(t+s) and s/√(t+s).

use brownkit::brown::ellipse_boundary_check;
use brownkit::operator_models::RDiagonalSpec;
use num_complex::Complex64;

fn main() -> brownkit::Result<()> {
    let (t, s) = (0.5, 1.0);
    let spec = RDiagonalSpec::Circular { variance: s };
    let (a, b) = ((2.0 * t + s) / (t + s).sqrt(), s / (t + s).sqrt());
    println!("predicted semi-axes {a:.6}, {b:.6}");
    for theta in [0.0, 0.4, 0.8, 1.2, std::f64::consts::FRAC_PI_2] {
        // Bisect for the boundary along the ray.
        let dir = Complex64::from_polar(1.0, theta);
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ellipse_boundary_check(&spec, t, dir * mid)? {
                lo = mid
            } else {
                hi = mid
            }
        }
        let z = dir * lo;
        let on_ellipse = (z.re / a).powi(2) + (z.im / b).powi(2);
        println!("θ={theta:.3}: boundary at r={lo:.6}, (x/a)²+(y/b)² = {on_ellipse:.6}");
    }
    Ok(())
}
