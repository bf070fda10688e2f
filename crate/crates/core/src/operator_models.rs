//! Models of the deterministic part `x₀` and of the R-diagonal part `T`, the
//! modulus laws `μ_{|x₀−λ|}`, resolvent trace functionals and the radial
//! distribution function of the Brown measure of `T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, singular_values, CMatrix};
use crate::measures::{
    symmetrize, Atom, AxisValues, LambdaBounds, Piece, PositiveMeasure, SymmetricMeasure,
    Tabulated, Transform, MASS_TOL,
};
use crate::quadrature::{integrate, Tolerance};
use crate::roots::brent;

/// Spectral measure of a selfadjoint `x₀`: tabulated, or the centered
/// semicircle law of the given variance.
#[derive(Debug, Clone, PartialEq)]
pub enum RealMeasure {
    Tabulated(Tabulated),
    Semicircle { variance: f64 },
}

impl RealMeasure {
    pub fn new(atoms: Vec<Atom>, pieces: Vec<Piece>) -> Result<Self> {
        let t = Tabulated { atoms, pieces };
        t.validate()?;
        Ok(RealMeasure::Tabulated(t))
    }

    /// Atoms given as `(location, mass)` pairs.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms.iter().map(|&(x, mass)| Atom { x, mass }).collect(),
            vec![],
        )
    }

    pub fn semicircle(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::MalformedMeasure(format!(
                "semicircle variance {variance} must be positive"
            )));
        }
        Ok(RealMeasure::Semicircle { variance })
    }

    pub fn atoms(&self) -> &[Atom] {
        match self {
            RealMeasure::Tabulated(t) => &t.atoms,
            RealMeasure::Semicircle { .. } => &[],
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, RealMeasure::Tabulated(t) if t.pieces.is_empty())
    }

    /// `∫ f dμ`; continuous parts are split at `split` to resolve peaks there.
    pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
        &self,
        f: F,
        split: Option<f64>,
    ) -> [f64; N] {
        match self {
            RealMeasure::Tabulated(t) => t.integrate(f, split),
            RealMeasure::Semicircle { variance } => {
                // u = R sin θ turns (1/(2πε))√(R²−u²) du into (2/π) cos²θ dθ.
                let r = 2.0 * variance.sqrt();
                let half_pi = 0.5 * std::f64::consts::PI;
                let g = |th: f64| {
                    let w = (2.0 / std::f64::consts::PI) * th.cos().powi(2);
                    let v = f(r * th.sin());
                    let mut out = [0.0; N];
                    for i in 0..N {
                        out[i] = w * v[i];
                    }
                    out
                };
                let mut cuts = vec![-half_pi];
                if let Some(c) = split {
                    if c.abs() < r {
                        cuts.push((c / r).asin());
                    }
                }
                cuts.push(half_pi);
                let mut out = [0.0; N];
                for w in cuts.windows(2) {
                    let v = integrate(g, w[0], w[1], Tolerance::TIGHT);
                    for i in 0..N {
                        out[i] += v[i];
                    }
                }
                out
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|u| [u], None)[0]
    }

    pub fn variance(&self) -> f64 {
        let m = self.integrate(|u| [u, u * u], None);
        m[1] - m[0] * m[0]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            RealMeasure::Tabulated(t) => t.cdf(x),
            RealMeasure::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                if x <= -r {
                    0.0
                } else if x >= r {
                    1.0
                } else {
                    let th = (x / r).asin();
                    0.5 + (th + th.sin() * th.cos()) / std::f64::consts::PI
                }
            }
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        match self {
            RealMeasure::Tabulated(t) => t.quantile(q),
            RealMeasure::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                let (mut lo, mut hi) = (-r, r);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// True when `∫ |u−a|⁻² dμ` diverges because continuous mass touches `a`.
    fn continuous_touches(&self, a: f64) -> bool {
        match self {
            RealMeasure::Semicircle { variance } => a.abs() <= 2.0 * variance.sqrt(),
            RealMeasure::Tabulated(t) => t.pieces.iter().any(|p| {
                (0..p.grid.len() - 1).any(|i| {
                    let (lo, hi) = (p.grid[i], p.grid[i + 1]);
                    lo <= a && a <= hi && (p.values[i] > 0.0 || p.values[i + 1] > 0.0)
                })
            }),
        }
    }
}

/// A normal atom of `x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalAtom {
    pub re: f64,
    pub im: f64,
    pub mass: f64,
}

/// The operator `x₀`, free from `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorDoc", into = "OperatorDoc")]
pub enum OperatorModel {
    /// Selfadjoint with the given spectral measure.
    SelfAdjoint(RealMeasure),
    /// Normal with finitely many eigenvalues.
    NormalAtomic(Vec<(Complex64, f64)>),
    /// An explicit `N×N` matrix with the normalized trace.
    Matrix(CMatrix),
}

impl OperatorModel {
    pub fn zero() -> Self {
        OperatorModel::NormalAtomic(vec![(Complex64::new(0.0, 0.0), 1.0)])
    }

    /// Selfadjoint with atoms `(location, mass)`.
    pub fn selfadjoint_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Ok(OperatorModel::SelfAdjoint(RealMeasure::from_atoms(atoms)?))
    }

    pub fn normal_atoms(atoms: &[(Complex64, f64)]) -> Result<Self> {
        let m = OperatorModel::NormalAtomic(atoms.to_vec());
        m.validate()?;
        Ok(m)
    }

    pub fn matrix(m: CMatrix) -> Result<Self> {
        let m = OperatorModel::Matrix(m);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorModel::SelfAdjoint(RealMeasure::Tabulated(t)) => t.validate(),
            OperatorModel::SelfAdjoint(RealMeasure::Semicircle { .. }) => Ok(()),
            OperatorModel::NormalAtomic(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if atoms
                    .iter()
                    .any(|a| !(a.1 > 0.0) || !a.0.re.is_finite() || !a.0.im.is_finite())
                {
                    return Err(Error::MalformedMeasure(
                        "normal atoms need finite locations and positive masses".into(),
                    ));
                }
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::MalformedMeasure(format!(
                        "atom masses sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            OperatorModel::Matrix(m) => {
                if !m.is_square() || m.rows() == 0 {
                    return Err(Error::Shape("x0 matrix must be square with N >= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// True when the model is selfadjoint (spectral measure on the real line).
    pub fn is_selfadjoint(&self) -> bool {
        match self {
            OperatorModel::SelfAdjoint(_) => true,
            OperatorModel::NormalAtomic(a) => a.iter().all(|(z, _)| z.im == 0.0),
            OperatorModel::Matrix(_) => false,
        }
    }

    /// True when `x₀` is normal, so that `φ(h⁻¹k⁻¹) = φ(h⁻²)`.
    pub fn is_normal(&self) -> bool {
        !matches!(self, OperatorModel::Matrix(_))
    }

    /// Eigenvalue atoms `(z, mass)` for the atomic variants.
    pub fn point_spectrum(&self) -> Vec<(Complex64, f64)> {
        match self {
            OperatorModel::SelfAdjoint(m) => m
                .atoms()
                .iter()
                .map(|a| (Complex64::new(a.x, 0.0), a.mass))
                .collect(),
            OperatorModel::NormalAtomic(a) => a.clone(),
            OperatorModel::Matrix(_) => vec![],
        }
    }
}

/// The symmetrized modulus law `μ̃_{|x₀−λ|}` at a fixed `λ`.
#[derive(Debug, Clone)]
pub enum ModulusLaw<'a> {
    /// Finitely many moduli (atomic models and matrices).
    Discrete(SymmetricMeasure),
    /// A selfadjoint `x₀` with continuous spectrum, integrated directly.
    Integral {
        measure: &'a RealMeasure,
        lambda: Complex64,
    },
}

fn merge_moduli(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (x, m) in v {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= 1e-13 * x.abs().max(1.0) => last.1 += m,
            _ => out.push((x, m)),
        }
    }
    out
}

impl<'a> ModulusLaw<'a> {
    pub fn new(x0: &'a OperatorModel, lambda: Complex64) -> Result<Self> {
        let atoms: Vec<(f64, f64)> = match x0 {
            OperatorModel::SelfAdjoint(m) if !m.is_atomic() => {
                return Ok(ModulusLaw::Integral { measure: m, lambda });
            }
            OperatorModel::SelfAdjoint(m) => m
                .atoms()
                .iter()
                .map(|a| ((Complex64::new(a.x, 0.0) - lambda).norm(), a.mass))
                .collect(),
            OperatorModel::NormalAtomic(a) => {
                a.iter().map(|(z, m)| ((z - lambda).norm(), *m)).collect()
            }
            OperatorModel::Matrix(x) => {
                let n = x.rows();
                let sv = singular_values(&x.shift(lambda))?;
                let top = sv.last().copied().unwrap_or(0.0);
                let w = 1.0 / n as f64;
                sv.into_iter()
                    .map(|s| (if s <= 1e-7 * top.max(1e-300) { 0.0 } else { s }, w))
                    .collect()
            }
        };
        let mut merged = merge_moduli(atoms);
        let total: f64 = merged.iter().map(|a| a.1).sum();
        for a in &mut merged {
            a.1 /= total;
        }
        Ok(ModulusLaw::Discrete(SymmetricMeasure::from_moduli(
            &merged,
        )?))
    }
}

impl Transform for ModulusLaw<'_> {
    fn axis_values(&self, s: f64) -> AxisValues {
        match self {
            ModulusLaw::Discrete(m) => m.axis_values(s),
            ModulusLaw::Integral { measure, lambda } => {
                let (a, b2, s2) = (lambda.re, lambda.im * lambda.im, s * s);
                let v = measure.integrate(
                    |u| {
                        let r2 = (u - a) * (u - a) + b2;
                        let q = 1.0 / (s2 + r2);
                        [q, r2 * q, q * q, r2 * q * q]
                    },
                    Some(a),
                );
                AxisValues {
                    d: v[0],
                    n: v[1],
                    d_prime: -2.0 * s * v[2],
                    n_prime: -2.0 * s * v[3],
                }
            }
        }
    }

    fn log_moment(&self, s: f64) -> f64 {
        match self {
            ModulusLaw::Discrete(m) => m.log_moment(s),
            ModulusLaw::Integral { measure, lambda } => {
                let (a, b2, s2) = (lambda.re, lambda.im * lambda.im, s * s);
                let mut total = 0.0;
                for at in measure.atoms() {
                    let r2 = (at.x - a) * (at.x - a) + b2;
                    total += at.mass
                        * if r2 == 0.0 {
                            2.0 * s.ln()
                        } else {
                            (s2 + r2).ln()
                        };
                }
                let cont = match measure {
                    RealMeasure::Tabulated(t) => RealMeasure::Tabulated(Tabulated {
                        atoms: vec![],
                        pieces: t.pieces.clone(),
                    }),
                    other => (*other).clone(),
                };
                total + cont.integrate(|u| [(s2 + (u - a) * (u - a) + b2).ln()], Some(a))[0]
            }
        }
    }

    fn lambda_bounds(&self) -> LambdaBounds {
        match self {
            ModulusLaw::Discrete(m) => m.lambda_bounds(),
            ModulusLaw::Integral { measure, lambda } => {
                let (a, b2) = (lambda.re, lambda.im * lambda.im);
                let second = measure.integrate(|u| [(u - a) * (u - a) + b2], None)[0];
                let divergent = b2 == 0.0
                    && (measure.atoms().iter().any(|at| at.x == a)
                        || measure.continuous_touches(a));
                let lambda1 = if divergent {
                    0.0
                } else {
                    let inv = measure.integrate(|u| [1.0 / ((u - a) * (u - a) + b2)], Some(a))[0];
                    if inv.is_finite() && inv > 0.0 {
                        inv.powf(-0.5)
                    } else {
                        0.0
                    }
                };
                LambdaBounds {
                    lambda1,
                    lambda2: second.sqrt(),
                }
            }
        }
    }

    fn atom_at_zero(&self) -> f64 {
        match self {
            ModulusLaw::Discrete(m) => m.atom_at_zero(),
            ModulusLaw::Integral { measure, lambda } => {
                if lambda.im != 0.0 {
                    return 0.0;
                }
                measure
                    .atoms()
                    .iter()
                    .filter(|at| at.x == lambda.re)
                    .map(|at| at.mass)
                    .sum()
            }
        }
    }
}

/// `μ_{|x₀−λ|}` as a half-line measure.
///
/// Atomic models and matrices give exact atoms. A continuous selfadjoint
/// spectrum is pushed forward into 512 equal-width bins of constant density,
/// which preserves the mass of every bin exactly.
pub fn modulus_distribution(x0: &OperatorModel, lambda: Complex64) -> Result<PositiveMeasure> {
    match ModulusLaw::new(x0, lambda)? {
        ModulusLaw::Discrete(m) => Ok(m.modulus().clone()),
        ModulusLaw::Integral { measure, lambda } => {
            let (a, b) = (lambda.re, lambda.im.abs());
            // Mass of {u : |u − λ| ≤ r} for the continuous part.
            let cont = match measure {
                RealMeasure::Tabulated(t) => RealMeasure::Tabulated(Tabulated {
                    atoms: vec![],
                    pieces: t.pieces.clone(),
                }),
                other => other.clone(),
            };
            let within = |r: f64| {
                if r <= b {
                    0.0
                } else {
                    let w = (r * r - b * b).sqrt();
                    cont.cdf(a + w) - cont.cdf(a - w)
                }
            };
            let (lo_sup, hi_sup) = match measure {
                RealMeasure::Semicircle { variance } => {
                    (-2.0 * variance.sqrt(), 2.0 * variance.sqrt())
                }
                RealMeasure::Tabulated(t) => {
                    let lo = t
                        .pieces
                        .iter()
                        .map(|p| p.grid[0])
                        .fold(f64::INFINITY, f64::min);
                    let hi = t
                        .pieces
                        .iter()
                        .map(|p| *p.grid.last().unwrap())
                        .fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                }
            };
            let r_max = Complex64::new((lo_sup - a).abs().max((hi_sup - a).abs()), b).norm();
            let bins = 512;
            let mut pieces = Vec::with_capacity(bins);
            let mut prev = within(b);
            for k in 0..bins {
                let r0 = b + (r_max - b) * k as f64 / bins as f64;
                let r1 = b + (r_max - b) * (k + 1) as f64 / bins as f64;
                let cur = within(r1);
                let mass = (cur - prev).max(0.0);
                prev = cur;
                if mass > 0.0 && r1 > r0 {
                    let v = mass / (r1 - r0);
                    pieces.push(Piece {
                        grid: vec![r0, r1],
                        values: vec![v, v],
                    });
                }
            }
            let atoms = merge_moduli(
                measure
                    .atoms()
                    .iter()
                    .map(|at| ((Complex64::new(at.x, 0.0) - lambda).norm(), at.mass))
                    .collect(),
            )
            .into_iter()
            .map(|(x, mass)| Atom { x, mass })
            .collect();
            PositiveMeasure::normalized(atoms, pieces)
        }
    }
}

/// Trace functionals of `h = (λ−x₀)*(λ−x₀) + s²` and `k = (λ−x₀)(λ−x₀)* + s²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventFunctionals {
    /// `φ(h⁻¹)`.
    pub phi_hinv: f64,
    /// `φ(h⁻²)`.
    pub phi_hinv2: f64,
    /// `φ(h⁻¹k⁻¹)`.
    pub phi_hk: f64,
    /// `φ((λ−x₀)* h⁻¹)`.
    pub phi_x_hinv: Complex64,
    /// `φ((λ−x₀) h⁻²)`.
    pub phi_x_hinv2: Complex64,
}

impl ResolventFunctionals {
    pub fn abs_x_hinv(&self) -> f64 {
        self.phi_x_hinv.norm()
    }

    pub fn abs_x_hinv2(&self) -> f64 {
        self.phi_x_hinv2.norm()
    }
}

/// Evaluates [`ResolventFunctionals`] at `(λ, s)`.
pub fn resolvent_functionals(
    x0: &OperatorModel,
    lambda: Complex64,
    s: f64,
) -> Result<ResolventFunctionals> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("s = {s} must be nonnegative")));
    }
    let s2 = s * s;
    let normal = |atoms: &[(Complex64, f64)]| -> Result<ResolventFunctionals> {
        let mut r = [0.0; 2];
        let mut x1 = Complex64::new(0.0, 0.0);
        let mut x2 = Complex64::new(0.0, 0.0);
        for (z, m) in atoms {
            let w = lambda - z;
            let h = w.norm_sqr() + s2;
            if h == 0.0 {
                return Err(Error::Singular(format!(
                    "h is singular at lambda = {lambda}, s = 0"
                )));
            }
            r[0] += m / h;
            r[1] += m / (h * h);
            x1 += w.conj() * (m / h);
            x2 += w * (m / (h * h));
        }
        Ok(ResolventFunctionals {
            phi_hinv: r[0],
            phi_hinv2: r[1],
            phi_hk: r[1],
            phi_x_hinv: x1,
            phi_x_hinv2: x2,
        })
    };
    match x0 {
        OperatorModel::NormalAtomic(a) => normal(a),
        OperatorModel::SelfAdjoint(m) if m.is_atomic() => normal(&x0.point_spectrum()),
        OperatorModel::SelfAdjoint(m) => {
            let (a, b) = (lambda.re, lambda.im);
            if s == 0.0
                && b == 0.0
                && (m.continuous_touches(a) || m.atoms().iter().any(|at| at.x == a))
            {
                return Err(Error::Singular(format!(
                    "h is singular at lambda = {lambda}, s = 0"
                )));
            }
            // w = λ − u = (a − u) + ib
            let v = m.integrate(
                |u| {
                    let wr = a - u;
                    let h = wr * wr + b * b + s2;
                    let q = 1.0 / h;
                    let q2 = q * q;
                    [q, q2, wr * q, -b * q, wr * q2, b * q2]
                },
                Some(a),
            );
            Ok(ResolventFunctionals {
                phi_hinv: v[0],
                phi_hinv2: v[1],
                phi_hk: v[1],
                phi_x_hinv: Complex64::new(v[2], v[3]),
                phi_x_hinv2: Complex64::new(v[4], v[5]),
            })
        }
        OperatorModel::Matrix(x) => {
            let n = x.rows();
            let a = x.scale(Complex64::new(-1.0, 0.0)).shift(-lambda);
            let shift = Complex64::new(-s2, 0.0);
            let h = a.gram().shift(shift);
            let k = a.adjoint().gram().shift(shift);
            let hinv = inverse(&h)?;
            let kinv = inverse(&k)?;
            let nf = n as f64;
            let hinv2 = hinv.matmul(&hinv)?;
            Ok(ResolventFunctionals {
                phi_hinv: hinv.trace().re / nf,
                phi_hinv2: hinv2.trace().re / nf,
                phi_hk: hinv.matmul(&kinv)?.trace().re / nf,
                phi_x_hinv: a.adjoint().matmul(&hinv)?.trace() / nf,
                phi_x_hinv2: a.matmul(&hinv2)?.trace() / nf,
            })
        }
    }
}

/// The R-diagonal operator `T`, through `μ_{|T|}` or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RDiagonalSpec {
    /// Any `μ_{|T|}`.
    General { measure: PositiveMeasure },
    /// `γ·u` with `u` Haar unitary.
    HaarUnitary { gamma: f64 },
    /// Circular element of the given variance.
    Circular { variance: f64 },
    /// `a·z` with `z` the circular Cauchy element.
    CircularCauchy { scale: f64 },
    /// `zⁿ`.
    CircularCauchyPower { n: u32 },
}

impl RDiagonalSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RDiagonalSpec::General { measure } => return symmetrize(measure).map(|_| ()),
            RDiagonalSpec::HaarUnitary { gamma } => *gamma > 0.0 && gamma.is_finite(),
            RDiagonalSpec::Circular { variance } => *variance > 0.0 && variance.is_finite(),
            RDiagonalSpec::CircularCauchy { scale } => *scale > 0.0 && scale.is_finite(),
            RDiagonalSpec::CircularCauchyPower { n } => *n >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedMeasure(format!(
                "invalid parameter in {self:?}"
            )))
        }
    }

    /// `μ_{|T|}`.
    pub fn modulus(&self) -> Result<PositiveMeasure> {
        self.validate()?;
        match self {
            RDiagonalSpec::General { measure } => Ok(measure.clone()),
            RDiagonalSpec::HaarUnitary { gamma } => PositiveMeasure::dirac(*gamma),
            RDiagonalSpec::Circular { variance } => PositiveMeasure::quarter_circle(*variance),
            RDiagonalSpec::CircularCauchy { scale } => PositiveMeasure::cauchy_modulus(*scale),
            RDiagonalSpec::CircularCauchyPower { n } => PositiveMeasure::cauchy_power_modulus(*n),
        }
    }

    pub fn lambda_bounds(&self) -> Result<LambdaBounds> {
        Ok(rdiag_symmetrized_modulus(self)?.lambda_bounds())
    }

    /// `μ_{|T|}({0})`.
    pub fn atom_at_zero(&self) -> Result<f64> {
        Ok(self.modulus()?.atom_at_zero())
    }
}

/// `μ̃_{|T|}`.
pub fn rdiag_symmetrized_modulus(t: &RDiagonalSpec) -> Result<SymmetricMeasure> {
    symmetrize(&t.modulus()?)
}

/// `ψ_μ(z) = ∫ zu/(1−zu) dμ(u)` for `μ = μ_{T*T}` and `z < 0`, via
/// `ψ(−1/s²) = −n(s)`.
pub fn psi<M: Transform + ?Sized>(mu_tilde: &M, z: f64) -> Result<f64> {
    if !(z < 0.0) {
        return Err(Error::Domain(format!(
            "psi is evaluated on the negative axis, got {z}"
        )));
    }
    let s = (-z).powf(-0.5);
    Ok(-mu_tilde.axis_values(s).n)
}

/// Inverse of [`psi`] on `(−(1 − μ({0})), 0)`.
pub fn chi<M: Transform + ?Sized>(mu_tilde: &M, w: f64) -> Result<f64> {
    let floor = -(1.0 - mu_tilde.atom_at_zero());
    if !(w < 0.0 && w > floor) {
        return Err(Error::Domain(format!(
            "chi is defined on ({floor}, 0), got {w}"
        )));
    }
    // ψ(−e^y) decreases in y; bracket in y = log(−z).
    let g = |y: f64| psi(mu_tilde, -y.exp()).unwrap_or(f64::NAN) - w;
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut it = 0;
    while g(lo) <= 0.0 {
        lo *= 2.0;
        it += 1;
        if it > 60 {
            return Err(Error::SolverFailure {
                iterations: it,
                lo,
                hi,
            });
        }
    }
    while g(hi) >= 0.0 {
        hi *= 2.0;
        it += 1;
        if it > 120 {
            return Err(Error::SolverFailure {
                iterations: it,
                lo,
                hi,
            });
        }
    }
    let root = brent(g, lo, hi, g(lo), g(hi), 1e-14, 0.0, 300)?;
    Ok(-root.x.exp())
}

/// `S_μ(w) = (w+1)/w · χ_μ(w)`.
pub fn s_transform<M: Transform + ?Sized>(mu_tilde: &M, w: f64) -> Result<f64> {
    Ok((w + 1.0) / w * chi(mu_tilde, w)?)
}

fn radial_cdf_generic<M: Transform + ?Sized>(mu: &M, r: f64) -> Result<f64> {
    // S decreases from 1/λ₁² to 1/λ₂² on (−(1−μ({0})), 0); solve S(w) = r⁻².
    let floor = -(1.0 - mu.atom_at_zero());
    let target = 1.0 / (r * r);
    let g = |w: f64| s_transform(mu, w).map(|v| v - target).unwrap_or(f64::NAN);
    let mut lo = floor * (1.0 - 1e-3);
    let mut hi = floor * 1e-3;
    let mut it = 0;
    while !(g(lo) > 0.0) {
        lo = floor + (lo - floor) * 1e-3;
        it += 1;
        if it > 8 {
            return Ok(mu.atom_at_zero());
        }
    }
    while !(g(hi) < 0.0) {
        hi *= 1e-3;
        it += 1;
        if it > 16 {
            return Ok(1.0);
        }
    }
    let root = brent(g, lo, hi, g(lo), g(hi), 1e-15, 0.0, 300)?;
    Ok(1.0 + root.x)
}

/// `μ_T(B(0, r))` for the rotation-invariant Brown measure of `T`:
/// 0 below `λ₁`, 1 from `λ₂` on, `1 + S⁻¹_{μ_{T*T}}(r⁻²)` in between.
pub fn radial_cdf(t: &RDiagonalSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let mu = rdiag_symmetrized_modulus(t)?;
    let b = mu.lambda_bounds();
    if r < b.lambda1 {
        return Ok(0.0);
    }
    if r >= b.lambda2 {
        return Ok(1.0);
    }
    match t {
        RDiagonalSpec::Circular { variance } => Ok(r * r / variance),
        RDiagonalSpec::CircularCauchy { scale } => Ok(r * r / (r * r + scale * scale)),
        RDiagonalSpec::CircularCauchyPower { n } => {
            // p(s) = s^(1+q) = r² and F = s·h(s) = 1/(1 + s^(q−1)).
            let q = (*n as f64 - 1.0) / (*n as f64 + 1.0);
            let s = (r * r).powf(1.0 / (1.0 + q));
            Ok(1.0 / (1.0 + s.powf(q - 1.0)))
        }
        _ => radial_cdf_generic(&mu, r),
    }
}

/// The ψ/χ/S route of [`radial_cdf`] without closed-form shortcuts.
pub fn radial_cdf_via_s_transform(t: &RDiagonalSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let mu = rdiag_symmetrized_modulus(t)?;
    let b = mu.lambda_bounds();
    if r < b.lambda1 {
        return Ok(0.0);
    }
    if r >= b.lambda2 {
        return Ok(1.0);
    }
    radial_cdf_generic(&mu, r)
}

/// JSON form of an [`OperatorModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OperatorDoc {
    #[serde(rename = "selfadjoint")]
    SelfAdjoint {
        #[serde(default)]
        atoms: Vec<Atom>,
        #[serde(default)]
        pieces: Vec<Piece>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semicircle_variance: Option<f64>,
    },
    Normal {
        atoms: Vec<NormalAtom>,
    },
    /// Row-major `[re, im]` pairs.
    Matrix {
        n: usize,
        entries: Vec<[f64; 2]>,
    },
}

impl TryFrom<OperatorDoc> for OperatorModel {
    type Error = Error;

    fn try_from(doc: OperatorDoc) -> Result<Self> {
        match doc {
            OperatorDoc::SelfAdjoint {
                atoms,
                pieces,
                semicircle_variance,
            } => match semicircle_variance {
                Some(v) => {
                    if !atoms.is_empty() || !pieces.is_empty() {
                        return Err(Error::MalformedMeasure(
                            "semicircle spectra cannot carry atoms or pieces".into(),
                        ));
                    }
                    Ok(OperatorModel::SelfAdjoint(RealMeasure::semicircle(v)?))
                }
                None => Ok(OperatorModel::SelfAdjoint(RealMeasure::new(atoms, pieces)?)),
            },
            OperatorDoc::Normal { atoms } => OperatorModel::normal_atoms(
                &atoms
                    .iter()
                    .map(|a| (Complex64::new(a.re, a.im), a.mass))
                    .collect::<Vec<_>>(),
            ),
            OperatorDoc::Matrix { n, entries } => OperatorModel::matrix(CMatrix::from_rows(
                n,
                n,
                entries.iter().map(|e| Complex64::new(e[0], e[1])).collect(),
            )?),
        }
    }
}

impl From<OperatorModel> for OperatorDoc {
    fn from(m: OperatorModel) -> Self {
        OperatorDoc::from(&m)
    }
}

impl From<&OperatorModel> for OperatorDoc {
    fn from(m: &OperatorModel) -> Self {
        match m {
            OperatorModel::SelfAdjoint(RealMeasure::Tabulated(t)) => OperatorDoc::SelfAdjoint {
                atoms: t.atoms.clone(),
                pieces: t.pieces.clone(),
                semicircle_variance: None,
            },
            OperatorModel::SelfAdjoint(RealMeasure::Semicircle { variance }) => {
                OperatorDoc::SelfAdjoint {
                    atoms: vec![],
                    pieces: vec![],
                    semicircle_variance: Some(*variance),
                }
            }
            OperatorModel::NormalAtomic(a) => OperatorDoc::Normal {
                atoms: a
                    .iter()
                    .map(|(z, m)| NormalAtom {
                        re: z.re,
                        im: z.im,
                        mass: *m,
                    })
                    .collect(),
            },
            OperatorModel::Matrix(x) => OperatorDoc::Matrix {
                n: x.rows(),
                entries: x.data().iter().map(|z| [z.re, z.im]).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn modulus_examples() {
        let m = modulus_distribution(&OperatorModel::zero(), c(3.0, 4.0)).unwrap();
        assert_eq!(m.atoms(), &[Atom { x: 5.0, mass: 1.0 }]);
        let x0 =
            OperatorModel::selfadjoint_atoms(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        let m = modulus_distribution(&x0, c(0.0, 0.0)).unwrap();
        assert_eq!(
            m.atoms(),
            &[Atom { x: 0.0, mass: 0.5 }, Atom { x: 1.0, mass: 0.5 }]
        );
        let d = OperatorModel::matrix(CMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        let m = modulus_distribution(&d, c(0.0, 0.0)).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!((m.atoms()[0].x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn functionals_scalar_and_matrix_agree() {
        let lam = c(0.3, -0.7);
        let s = 0.4;
        let f = resolvent_functionals(&OperatorModel::zero(), lam, s).unwrap();
        let h = lam.norm_sqr() + s * s;
        assert!((f.phi_hinv - 1.0 / h).abs() < 1e-15);
        assert!((f.phi_x_hinv2 - lam / (h * h)).norm() < 1e-15);

        let sa = OperatorModel::selfadjoint_atoms(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        let f0 = resolvent_functionals(&sa, c(0.0, 0.0), 1.0).unwrap();
        assert!((f0.phi_hinv - 0.5).abs() < 1e-15);

        let mx = OperatorModel::matrix(CMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        for (lam, s) in [(c(0.2, 0.1), 0.3), (c(-1.5, 0.6), 1.1), (c(0.0, 0.0), 1.0)] {
            let a = resolvent_functionals(&sa, lam, s).unwrap();
            let b = resolvent_functionals(&mx, lam, s).unwrap();
            assert!((a.phi_hinv - b.phi_hinv).abs() < 1e-14);
            assert!((a.phi_hinv2 - b.phi_hinv2).abs() < 1e-14);
            assert!((a.phi_hk - b.phi_hk).abs() < 1e-14);
            assert!((a.phi_x_hinv - b.phi_x_hinv).norm() < 1e-14);
            assert!((a.phi_x_hinv2 - b.phi_x_hinv2).norm() < 1e-14);
        }
    }

    #[test]
    fn cauchy_schwarz_on_functionals() {
        let x0 = OperatorModel::SelfAdjoint(RealMeasure::semicircle(1.0).unwrap());
        let f = resolvent_functionals(&x0, c(0.5, 0.2), 0.3).unwrap();
        assert!(f.phi_hinv2 >= f.phi_hinv * f.phi_hinv);
    }

    #[test]
    fn semicircle_spectrum_integrals() {
        let m = RealMeasure::semicircle(2.0).unwrap();
        assert!(m.mean().abs() < 1e-14);
        assert!((m.variance() - 2.0).abs() < 1e-12);
        assert!((m.cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn integral_law_matches_discrete_law() {
        // A tabulated density against a dense atomic approximation of it.
        let grid: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let values = vec![0.5; grid.len()];
        let cont = OperatorModel::SelfAdjoint(
            RealMeasure::new(vec![], vec![Piece { grid, values }]).unwrap(),
        );
        let lam = c(0.3, 0.4);
        let law = ModulusLaw::new(&cont, lam).unwrap();
        let n = 4000;
        let atoms: Vec<(f64, f64)> = (0..n)
            .map(|i| (-1.0 + (i as f64 + 0.5) * 2.0 / n as f64, 1.0 / n as f64))
            .collect();
        let disc = OperatorModel::selfadjoint_atoms(&atoms).unwrap();
        let dlaw = ModulusLaw::new(&disc, lam).unwrap();
        for s in [0.2, 1.0] {
            assert!((law.h(s) - dlaw.h(s)).abs() < 1e-6);
            assert!((law.log_moment(s) - dlaw.log_moment(s)).abs() < 1e-6);
        }
        let pushed = modulus_distribution(&cont, lam).unwrap();
        assert!((pushed.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_moduli_of_families() {
        let h = rdiag_symmetrized_modulus(&RDiagonalSpec::HaarUnitary { gamma: 1.0 }).unwrap();
        assert_eq!(h.modulus().atoms(), &[Atom { x: 1.0, mass: 1.0 }]);
        let cp = rdiag_symmetrized_modulus(&RDiagonalSpec::CircularCauchyPower { n: 1 }).unwrap();
        assert!((cp.h(2.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn radial_cdf_closed_forms_and_generic_route() {
        let circ = RDiagonalSpec::Circular { variance: 1.0 };
        let cau = RDiagonalSpec::CircularCauchy { scale: 1.0 };
        for r in [0.1, 0.5, 0.9] {
            assert!((radial_cdf(&circ, r).unwrap() - r * r).abs() < 1e-15);
            assert!((radial_cdf_via_s_transform(&circ, r).unwrap() - r * r).abs() < 1e-9);
        }
        for r in [0.2, 1.0, 3.0] {
            let exact = r * r / (1.0 + r * r);
            assert!((radial_cdf(&cau, r).unwrap() - exact).abs() < 1e-15);
            assert!((radial_cdf_via_s_transform(&cau, r).unwrap() - exact).abs() < 1e-9);
        }
        let haar = RDiagonalSpec::HaarUnitary { gamma: 1.0 };
        assert_eq!(radial_cdf(&haar, 0.9).unwrap(), 0.0);
        assert_eq!(radial_cdf(&haar, 1.1).unwrap(), 1.0);
        assert!(radial_cdf(&haar, 0.0).is_err());
    }

    #[test]
    fn operator_json_round_trip() {
        let m = OperatorModel::normal_atoms(&[(c(1.0, 1.0), 0.5), (c(-1.0, 0.0), 0.5)]).unwrap();
        let s = serde_json::to_string(&OperatorDoc::from(&m)).unwrap();
        let back =
            OperatorModel::try_from(serde_json::from_str::<OperatorDoc>(&s).unwrap()).unwrap();
        assert_eq!(back, m);
        let mx: OperatorDoc =
            serde_json::from_str(r#"{"type":"matrix","n":2,"entries":[[1,0],[0,0],[0,0],[-1,0]]}"#)
                .unwrap();
        assert!(matches!(
            OperatorModel::try_from(mx).unwrap(),
            OperatorModel::Matrix(_)
        ));
    }
}
