//! Subordination functions of a free additive convolution on the imaginary
//! axis, and their limits at t = 0.

use brownkit::measures::{density_at_zero_of_convolution, SymmetricMeasure, Transform};
use brownkit::subordination::{classify_boundary, solve_subordination};

fn main() -> brownkit::Result<()> {
    let pairs = [
        (
            "semicircle(1)",
            SymmetricMeasure::semicircle(1.0)?,
            "semicircle(1)",
            SymmetricMeasure::semicircle(1.0)?,
        ),
        (
            "bernoulli(2)",
            SymmetricMeasure::bernoulli(2.0)?,
            "semicircle(1)",
            SymmetricMeasure::semicircle(1.0)?,
        ),
        (
            "bernoulli(0.8)",
            SymmetricMeasure::bernoulli(0.8)?,
            "cauchy(1)",
            SymmetricMeasure::cauchy(1.0)?,
        ),
    ];
    for (n1, m1, n2, m2) in &pairs {
        println!("{n1} ⊞ {n2}");
        for t in [10.0, 1.0, 0.1, 1e-3, 1e-6] {
            let p = solve_subordination(m1, m2, t)?;
            println!(
                "  t={t:<8e} s1={:<14.8} s2={:<14.8} h={:.8} (h1(s1)={:.8})",
                p.s1,
                p.s2,
                p.h_conv,
                m1.h(p.s1)
            );
        }
        let b = classify_boundary(m1, m2)?;
        println!("  t=0: {:?}, s1={}, s2={}", b.case, b.s1_0, b.s2_0);
        if let Ok(rho) = density_at_zero_of_convolution(b.s1_0, b.s2_0) {
            println!("  density of the convolution at 0: {rho:.10}");
        }
    }
    Ok(())
}
