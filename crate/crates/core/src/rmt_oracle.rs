//! Random-matrix checks: finite-`n` models of `x₀ + T`, hermitized
//! log-determinants and empirical Brown densities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::brown::{BrownDensityGrid, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{householder_qr, inverse, jacobi_eigh, CMatrix, CholeskyWorkspace};
use crate::measures::Atom;
use crate::operator_models::{OperatorModel, RDiagonalSpec, RealMeasure};

/// Default regularization for empirical log-determinants.
pub const DEFAULT_T_REG: f64 = 1e-3;

/// A finite-`n` ensemble for `x₀ + T`.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub t_reg: f64,
    pub t: RDiagonalSpec,
    pub x0: OperatorModel,
    /// Draw the singular values of general `T` at random instead of at the
    /// deterministic quantiles `(i−½)/n`.
    pub stochastic_sigma: bool,
}

impl EnsembleSpec {
    pub fn new(t: RDiagonalSpec, x0: OperatorModel, n: usize, samples: usize, seed: u64) -> Self {
        EnsembleSpec {
            n,
            samples,
            seed,
            t_reg: DEFAULT_T_REG,
            t,
            x0,
            stochastic_sigma: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.samples == 0 {
            return Err(Error::Config(format!(
                "ensemble needs n >= 2 and samples >= 1, got n={} samples={}",
                self.n, self.samples
            )));
        }
        if !(self.t_reg > 0.0 && self.t_reg.is_finite()) {
            return Err(Error::Config(format!(
                "t_reg = {} must be positive",
                self.t_reg
            )));
        }
        self.t.validate()?;
        self.x0.validate()
    }
}

/// ChaCha8 stream `index` of `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n×n` matrix of i.i.d. standard complex Gaussians (`E|g|² = 1`).
pub fn ginibre<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..n * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    CMatrix::from_rows(n, n, data).expect("square data")
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn sample_haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Result<CMatrix> {
    let (mut q, r) = householder_qr(&ginibre(n, rng))?;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// A realized matrix with the rounding error of its atom proportions.
#[derive(Debug, Clone)]
pub struct Realization {
    pub x: CMatrix,
    /// `max |count/n − mass|` over the atoms of `x₀`.
    pub imbalance: f64,
}

/// Largest-remainder counts of `n` slots for the given masses.
pub fn proportional_counts(masses: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = masses.iter().sum();
    let exact: Vec<f64> = masses.iter().map(|m| m / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &k in order.iter().take(missing) {
        counts[k] += 1;
    }
    counts
}

fn atomic_diagonal(atoms: &[(Complex64, f64)], n: usize) -> (Vec<Complex64>, f64) {
    let masses: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    let counts = proportional_counts(&masses, n);
    let imbalance = counts
        .iter()
        .zip(&masses)
        .map(|(&c, &m)| (c as f64 / n as f64 - m).abs())
        .fold(0.0, f64::max);
    let diag = atoms
        .iter()
        .zip(&counts)
        .flat_map(|(a, &c)| std::iter::repeat_n(a.0, c))
        .collect();
    (diag, imbalance)
}

/// `x₀` at size `n`.
pub fn realize_operator(x0: &OperatorModel, n: usize) -> Result<Realization> {
    let quantiles = |m: &RealMeasure| -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new(m.quantile((i as f64 + 0.5) / n as f64), 0.0))
            .collect()
    };
    match x0 {
        OperatorModel::SelfAdjoint(m) if m.is_atomic() => {
            let atoms: Vec<(Complex64, f64)> = m
                .atoms()
                .iter()
                .map(|a: &Atom| (Complex64::new(a.x, 0.0), a.mass))
                .collect();
            let (d, imbalance) = atomic_diagonal(&atoms, n);
            Ok(Realization {
                x: CMatrix::from_diag(&d),
                imbalance,
            })
        }
        OperatorModel::SelfAdjoint(m) => Ok(Realization {
            x: CMatrix::from_diag(&quantiles(m)),
            imbalance: 0.0,
        }),
        OperatorModel::NormalAtomic(atoms) => {
            let (d, imbalance) = atomic_diagonal(atoms, n);
            Ok(Realization {
                x: CMatrix::from_diag(&d),
                imbalance,
            })
        }
        OperatorModel::Matrix(m) => {
            let k = m.rows();
            if !n.is_multiple_of(k) {
                return Err(Error::Shape(format!(
                    "n = {n} is not a multiple of the x0 size {k}"
                )));
            }
            let mut x = CMatrix::zeros(n, n);
            for b in 0..n / k {
                for i in 0..k {
                    for j in 0..k {
                        x[(b * k + i, b * k + j)] = m[(i, j)];
                    }
                }
            }
            Ok(Realization { x, imbalance: 0.0 })
        }
    }
}

/// `T` at size `n` from the given stream.
pub fn realize_rdiagonal<R: Rng>(
    t: &RDiagonalSpec,
    n: usize,
    stochastic: bool,
    rng: &mut R,
) -> Result<CMatrix> {
    let nf = n as f64;
    match t {
        RDiagonalSpec::HaarUnitary { gamma } => {
            Ok(sample_haar_unitary(n, rng)?.scale(Complex64::new(*gamma, 0.0)))
        }
        RDiagonalSpec::Circular { variance } => {
            Ok(ginibre(n, rng).scale(Complex64::new((variance / nf).sqrt(), 0.0)))
        }
        RDiagonalSpec::CircularCauchy { scale } => {
            let g1 = ginibre(n, rng);
            let g2 = ginibre(n, rng);
            Ok(g1
                .matmul(&inverse(&g2)?)?
                .scale(Complex64::new(*scale, 0.0)))
        }
        RDiagonalSpec::CircularCauchyPower { n: power } => {
            let g1 = ginibre(n, rng);
            let g2 = ginibre(n, rng);
            let z = g1.matmul(&inverse(&g2)?)?;
            let mut out = z.clone();
            for _ in 1..*power {
                out = out.matmul(&z)?;
            }
            Ok(out)
        }
        RDiagonalSpec::General { measure } => {
            let u = sample_haar_unitary(n, rng)?;
            let v = sample_haar_unitary(n, rng)?;
            let mut sigma = Vec::with_capacity(n);
            for i in 0..n {
                let q = if stochastic {
                    rng.gen::<f64>()
                } else {
                    (i as f64 + 0.5) / nf
                };
                sigma.push(Complex64::new(measure.quantile(q)?, 0.0));
            }
            u.matmul(&CMatrix::from_diag(&sigma))?.matmul(&v)
        }
    }
}

/// Sample `index` of the ensemble: `X = X₀ + T_n`.
pub fn realize_model(spec: &EnsembleSpec, index: u64) -> Result<Realization> {
    let mut rng = sample_rng(spec.seed, index);
    let x0 = realize_operator(&spec.x0, spec.n)?;
    let t = realize_rdiagonal(&spec.t, spec.n, spec.stochastic_sigma, &mut rng)?;
    Ok(Realization {
        x: x0.x.add(&t)?,
        imbalance: x0.imbalance,
    })
}

/// `(1/2n)·Σ log(σᵢ² + t²)` over the singular values of `X − λ`, from the
/// Jacobi eigenvalues of `(X−λ)*(X−λ)`.
pub fn hermitized_logdet(x: &CMatrix, lambda: Complex64, t: f64) -> Result<f64> {
    Ok(hermitized_logdet_checked(x, lambda, t)?.0)
}

/// [`hermitized_logdet`] together with the eigensolver residual relative to `‖A‖_F`.
pub fn hermitized_logdet_checked(x: &CMatrix, lambda: Complex64, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "regularization t = {t} must be positive"
        )));
    }
    let a = x.shift(lambda).gram();
    let e = jacobi_eigh(&a)?;
    let n = x.rows() as f64;
    let sum: f64 = e.values.iter().map(|mu| (mu.max(0.0) + t * t).ln()).sum();
    let rel = e.residual(&a) / a.frobenius().max(f64::MIN_POSITIVE);
    Ok((sum / (2.0 * n), rel))
}

/// Same quantity as [`hermitized_logdet`] for many `λ` on one sample:
/// `(X−λ)*(X−λ) + t² = X*X − λ̄X − λX* + (|λ|²+t²)` is assembled from a
/// precomputed `X*X` and factored by Cholesky.
pub struct HermitizedSampler {
    x: CMatrix,
    gram: CMatrix,
}

impl HermitizedSampler {
    pub fn new(x: CMatrix) -> Self {
        let gram = x.gram();
        HermitizedSampler { x, gram }
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn logdet(&self, lambda: Complex64, t: f64, ws: &mut CholeskyWorkspace) -> Result<f64> {
        let n = self.n();
        if ws.n() != n {
            *ws = CholeskyWorkspace::new(n);
        }
        let lc = lambda.conj();
        let diag = lambda.norm_sqr() + t * t;
        for i in 0..n {
            let gi = self.gram.row(i);
            let xi = self.x.row(i);
            for j in 0..=i {
                let mut v = gi[j] - lc * xi[j] - lambda * self.x[(j, i)].conj();
                if i == j {
                    v += diag;
                }
                ws.set(i, j, v);
            }
        }
        Ok(ws.logdet()? / (2.0 * n as f64))
    }
}

fn samplers(spec: &EnsembleSpec) -> Result<Vec<HermitizedSampler>> {
    (0..spec.samples as u64)
        .into_par_iter()
        .map(|k| Ok(HermitizedSampler::new(realize_model(spec, k)?.x)))
        .collect()
}

/// Sample mean of the hermitized log-determinant at each `λ`.
pub fn mean_logdet(spec: &EnsembleSpec, lambdas: &[Complex64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let samples = samplers(spec)?;
    lambdas
        .par_iter()
        .map_init(
            || CholeskyWorkspace::new(spec.n),
            |ws, &z| {
                let mut acc = 0.0;
                for s in &samples {
                    acc += s.logdet(z, spec.t_reg, ws)?;
                }
                Ok(acc / samples.len() as f64)
            },
        )
        .collect()
}

/// Empirical density grid with its clamping bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalDensity {
    pub grid: BrownDensityGrid,
    /// Mass removed by clamping negative Laplacian values to 0.
    pub clamped_mass: f64,
    /// Mass before clamping.
    pub raw_mass: f64,
}

/// `(1/2π)·(five-point Laplacian)/h²` of the sample-mean hermitized
/// log-determinant; the lattice is padded by one node on every side so each
/// grid node has all four neighbours.
pub fn empirical_brown_density(spec: &EnsembleSpec, grid: &GridSpec) -> Result<EmpiricalDensity> {
    grid.validate()?;
    let (dx, dy) = (grid.dx(), grid.dy());
    let (px, py) = (grid.nx + 2, grid.ny + 2);
    let lambdas: Vec<Complex64> = (0..px * py)
        .map(|k| {
            let (i, j) = ((k % px) as f64 - 1.0, (k / px) as f64 - 1.0);
            Complex64::new(grid.x_min + i * dx, grid.y_min + j * dy)
        })
        .collect();
    let ld = mean_logdet(spec, &lambdas)?;
    let at = |i: usize, j: usize| ld[j * px + i];
    let mut values = Vec::with_capacity(grid.len());
    let (mut raw, mut clamped) = (0.0, 0.0);
    let cell = dx * dy;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (pi, pj) = (i + 1, j + 1);
            let c = at(pi, pj);
            let lap = (at(pi + 1, pj) + at(pi - 1, pj) - 2.0 * c) / (dx * dx)
                + (at(pi, pj + 1) + at(pi, pj - 1) - 2.0 * c) / (dy * dy);
            let rho = lap / (2.0 * std::f64::consts::PI);
            raw += rho * cell;
            if rho < 0.0 {
                clamped += -rho * cell;
            }
            values.push(rho.max(0.0));
        }
    }
    Ok(EmpiricalDensity {
        grid: BrownDensityGrid::from_values(*grid, values)?,
        clamped_mass: clamped,
        raw_mass: raw,
    })
}

/// Cellwise comparison of two density grids on the same lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `Σ |theory − empirical|·dx·dy`.
    pub l1_distance: f64,
    pub max_abs: f64,
    pub mass_theory: f64,
    pub mass_empirical: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major `empirical − theory`.
    pub residuals: Vec<f64>,
}

pub fn compare_report(
    theory: &BrownDensityGrid,
    empirical: &BrownDensityGrid,
) -> Result<ComparisonReport> {
    if theory.grid != empirical.grid || theory.values.len() != empirical.values.len() {
        return Err(Error::Shape("theory and empirical grids differ".into()));
    }
    let cell = theory.grid.dx() * theory.grid.dy();
    let residuals: Vec<f64> = theory
        .values
        .iter()
        .zip(&empirical.values)
        .map(|(t, e)| e - t)
        .collect();
    Ok(ComparisonReport {
        l1_distance: residuals.iter().map(|r| r.abs()).sum::<f64>() * cell,
        max_abs: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        mass_theory: theory.values.iter().sum::<f64>() * cell,
        mass_empirical: empirical.values.iter().sum::<f64>() * cell,
        nx: theory.grid.nx,
        ny: theory.grid.ny,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = sample_rng(3, 0);
        for n in [1, 2, 7, 20] {
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            assert!(u.unitarity_defect() < 1e-12);
        }
        let u = sample_haar_unitary(1, &mut rng).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_trace_moment() {
        let mut rng = sample_rng(11, 0);
        let m: f64 = (0..200)
            .map(|_| sample_haar_unitary(8, &mut rng).unwrap().trace().norm_sqr())
            .sum::<f64>()
            / 200.0;
        assert!((m - 1.0).abs() < 0.25, "{m}");
    }

    #[test]
    fn proportional_rounding() {
        let x0 = OperatorModel::normal_atoms(&[
            (c(-1.0, 0.0), 0.25),
            (c(0.0, 0.0), 0.5),
            (c(1.0, 0.0), 0.25),
        ])
        .unwrap();
        let r = realize_operator(&x0, 8).unwrap();
        let d: Vec<f64> = (0..8).map(|i| r.x[(i, i)].re).collect();
        assert_eq!(d, vec![-1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(r.imbalance, 0.0);
        assert_eq!(proportional_counts(&[1.0, 1.0, 1.0], 8), vec![3, 3, 2]);
    }

    #[test]
    fn logdet_trivial_cases() {
        let z = CMatrix::zeros(4, 4);
        let (v, res) = hermitized_logdet_checked(&z, c(0.3, 0.4), 0.1).unwrap();
        assert!((v - 0.5 * (0.25f64 + 0.01).ln()).abs() < 1e-14);
        assert!(res <= 1e-10);
        let spec = EnsembleSpec::new(
            RDiagonalSpec::HaarUnitary { gamma: 2.0 },
            OperatorModel::zero(),
            6,
            1,
            1,
        );
        let x = realize_model(&spec, 0).unwrap().x;
        let (v, res) = hermitized_logdet_checked(&x, c(0.0, 0.0), 0.5).unwrap();
        assert!((v - 0.5 * (4.25f64).ln()).abs() < 1e-12);
        assert!(res <= 1e-10);
    }

    #[test]
    fn fast_path_matches_jacobi() {
        let spec = EnsembleSpec::new(
            RDiagonalSpec::Circular { variance: 1.0 },
            OperatorModel::selfadjoint_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            24,
            1,
            5,
        );
        let x = realize_model(&spec, 0).unwrap().x;
        let s = HermitizedSampler::new(x.clone());
        let mut ws = CholeskyWorkspace::new(24);
        for z in [c(0.0, 0.0), c(0.7, -0.4), c(1.5, 1.2)] {
            for t in [1e-3, 0.3] {
                let a = hermitized_logdet(&x, z, t).unwrap();
                let b = s.logdet(z, t, &mut ws).unwrap();
                assert!((a - b).abs() < 1e-10, "{a} {b}");
            }
        }
    }

    #[test]
    fn circular_second_moment() {
        let spec = EnsembleSpec::new(
            RDiagonalSpec::Circular { variance: 2.0 },
            OperatorModel::zero(),
            200,
            1,
            9,
        );
        let x = realize_model(&spec, 0).unwrap().x;
        let m = x.frobenius().powi(2) / 200.0;
        assert!((m - 2.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn streams_are_reproducible() {
        let spec = EnsembleSpec::new(
            RDiagonalSpec::CircularCauchy { scale: 1.0 },
            OperatorModel::zero(),
            5,
            2,
            42,
        );
        assert_eq!(
            realize_model(&spec, 1).unwrap().x,
            realize_model(&spec, 1).unwrap().x
        );
        assert_ne!(
            realize_model(&spec, 0).unwrap().x,
            realize_model(&spec, 1).unwrap().x
        );
    }

    #[test]
    fn identical_grids_compare_to_zero() {
        let g =
            BrownDensityGrid::from_values(GridSpec::square(-1.0, 1.0, 3), vec![0.1; 9]).unwrap();
        let r = compare_report(&g, &g).unwrap();
        assert_eq!(r.l1_distance, 0.0);
        assert_eq!(r.max_abs, 0.0);
        let other =
            BrownDensityGrid::from_values(GridSpec::square(-1.0, 1.0, 4), vec![0.1; 16]).unwrap();
        assert!(matches!(compare_report(&g, &other), Err(Error::Shape(_))));
    }
}
