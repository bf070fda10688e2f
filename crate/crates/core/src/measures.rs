//! Probability measures on the half-line and their symmetrizations, with the
//! imaginary-axis transforms `h`, `f`, `p = s·f` and the radii `λ₁`, `λ₂`.
//!
//! A symmetric measure `μ` is stored through its nonnegative half `ν` (the
//! law of `|X|` for `X ~ μ`). All kernels used here are even in `u`, so every
//! integral against `μ` is the same integral against `ν`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Total mass must equal 1 within this tolerance.
pub const MASS_TOL: f64 = 1e-6;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// A density sampled on a grid and linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Piece {
    fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 || self.grid.len() != self.values.len() {
            return Err(Error::MalformedMeasure(
                "a piece needs at least two grid points and one value per point".into(),
            ));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) || self.grid.iter().any(|g| !g.is_finite())
        {
            return Err(Error::MalformedMeasure(
                "piece grid must be finite and strictly increasing".into(),
            ));
        }
        if self.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::MalformedMeasure(
                "densities must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn mass(&self) -> f64 {
        self.segments()
            .map(|(a, b, va, vb)| 0.5 * (va + vb) * (b - a))
            .sum()
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.grid.len() - 1).map(move |i| {
            (
                self.grid[i],
                self.grid[i + 1],
                self.values[i],
                self.values[i + 1],
            )
        })
    }
}

/// Atoms plus piecewise-linear densities; the shared backing store of the
/// half-line and real-line measures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tabulated {
    pub atoms: Vec<Atom>,
    pub pieces: Vec<Piece>,
}

impl Tabulated {
    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !a.x.is_finite() || !(a.mass > 0.0) || a.mass > 1.0 + MASS_TOL {
                return Err(Error::MalformedMeasure(format!(
                    "bad atom at {} with mass {}",
                    a.x, a.mass
                )));
            }
        }
        let mut xs: Vec<f64> = self.atoms.iter().map(|a| a.x).collect();
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedMeasure(
                "atom locations must be distinct".into(),
            ));
        }
        for p in &self.pieces {
            p.validate()?;
        }
        let m = self.mass();
        if (m - 1.0).abs() > MASS_TOL {
            return Err(Error::MalformedMeasure(format!(
                "total mass {m} differs from 1"
            )));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.pieces.iter().map(Piece::mass).sum::<f64>()
    }

    /// Rescales atoms and densities so the total mass is exactly 1.
    pub fn normalize(&mut self) {
        let m = self.mass();
        if m > 0.0 {
            for a in &mut self.atoms {
                a.mass /= m;
            }
            for p in &mut self.pieces {
                for v in &mut p.values {
                    *v /= m;
                }
            }
        }
    }

    /// `∫ f dν`, with every segment split at `split` when it lies inside.
    pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
        &self,
        f: F,
        split: Option<f64>,
    ) -> [f64; N] {
        let mut out = [0.0; N];
        for a in &self.atoms {
            let v = f(a.x);
            for i in 0..N {
                out[i] += a.mass * v[i];
            }
        }
        for p in &self.pieces {
            for (a, b, va, vb) in p.segments() {
                if va == 0.0 && vb == 0.0 {
                    continue;
                }
                let slope = (vb - va) / (b - a);
                let g = |u: f64| {
                    let w = va + slope * (u - a);
                    let v = f(u);
                    let mut r = [0.0; N];
                    for i in 0..N {
                        r[i] = w * v[i];
                    }
                    r
                };
                let parts: Vec<(f64, f64)> = match split {
                    Some(c) if c > a && c < b => vec![(a, c), (c, b)],
                    _ => vec![(a, b)],
                };
                for (lo, hi) in parts {
                    let v = integrate(g, lo, hi, Tolerance::TIGHT);
                    for i in 0..N {
                        out[i] += v[i];
                    }
                }
            }
        }
        out
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let mut c: f64 = self.atoms.iter().filter(|a| a.x <= x).map(|a| a.mass).sum();
        for p in &self.pieces {
            for (a, b, va, vb) in p.segments() {
                if x >= b {
                    c += 0.5 * (va + vb) * (b - a);
                } else if x > a {
                    let vx = va + (vb - va) * (x - a) / (b - a);
                    c += 0.5 * (va + vx) * (x - a);
                }
            }
        }
        c
    }

    fn support_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        for p in &self.pieces {
            lo = lo.min(p.grid[0]);
            hi = hi.max(*p.grid.last().unwrap());
        }
        (lo, hi)
    }

    /// Smallest `x` with `cdf(x) ≥ q`, by bisection on the exact CDF.
    pub fn quantile(&self, q: f64) -> f64 {
        let (mut lo, mut hi) = self.support_range();
        if q <= 0.0 {
            return lo;
        }
        let target = q.min(1.0) * self.mass();
        if self.cdf(lo) >= target {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Closed-form laws on the half-line whose transforms are known exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// Law of the modulus of a circular element of the given variance;
    /// symmetrizes to the semicircle law of that variance.
    QuarterCircle { variance: f64 },
    /// Law of `|z|` for the circular Cauchy element scaled by `scale`;
    /// symmetrizes to the Cauchy law `scale / (π (u² + scale²))`.
    CauchyModulus { scale: f64 },
    /// Law of `|zⁿ|`, with `h(s) = (s + s^((n-1)/(n+1)))⁻¹`.
    CauchyPowerModulus { power: u32 },
}

impl ClosedForm {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ClosedForm::QuarterCircle { variance } => variance > 0.0 && variance.is_finite(),
            ClosedForm::CauchyModulus { scale } => scale > 0.0 && scale.is_finite(),
            ClosedForm::CauchyPowerModulus { power } => power >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedMeasure(format!(
                "invalid closed-form parameter in {self:?}"
            )))
        }
    }
}

/// A probability measure on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct PositiveMeasure {
    table: Tabulated,
    closed: Option<ClosedForm>,
}

impl PositiveMeasure {
    /// Builds a tabulated measure; fails unless it is a probability measure on `[0, ∞)`.
    pub fn new(atoms: Vec<Atom>, pieces: Vec<Piece>) -> Result<Self> {
        let table = Tabulated { atoms, pieces };
        table.validate()?;
        if table.atoms.iter().any(|a| a.x < 0.0) || table.pieces.iter().any(|p| p.grid[0] < 0.0) {
            return Err(Error::MalformedMeasure(
                "support must lie in [0, inf)".into(),
            ));
        }
        Ok(PositiveMeasure {
            table,
            closed: None,
        })
    }

    /// Like [`PositiveMeasure::new`] but rescales to unit mass first.
    pub fn normalized(atoms: Vec<Atom>, pieces: Vec<Piece>) -> Result<Self> {
        let mut table = Tabulated { atoms, pieces };
        table.normalize();
        Self::new(table.atoms, table.pieces)
    }

    pub fn closed_form(c: ClosedForm) -> Result<Self> {
        c.validate()?;
        Ok(PositiveMeasure {
            table: Tabulated::default(),
            closed: Some(c),
        })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![Atom { x, mass: 1.0 }], vec![])
    }

    /// Atoms given as `(location, mass)` pairs.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms.iter().map(|&(x, mass)| Atom { x, mass }).collect(),
            vec![],
        )
    }

    pub fn quarter_circle(variance: f64) -> Result<Self> {
        Self::closed_form(ClosedForm::QuarterCircle { variance })
    }

    pub fn cauchy_modulus(scale: f64) -> Result<Self> {
        Self::closed_form(ClosedForm::CauchyModulus { scale })
    }

    pub fn cauchy_power_modulus(power: u32) -> Result<Self> {
        Self::closed_form(ClosedForm::CauchyPowerModulus { power })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.table.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.table.pieces
    }

    pub fn closed(&self) -> Option<ClosedForm> {
        self.closed
    }

    pub fn table(&self) -> &Tabulated {
        &self.table
    }

    pub fn total_mass(&self) -> f64 {
        match self.closed {
            Some(_) => 1.0,
            None => self.table.mass(),
        }
    }

    /// Mass of the atom at the origin.
    pub fn atom_at_zero(&self) -> f64 {
        self.table
            .atoms
            .iter()
            .filter(|a| a.x == 0.0)
            .map(|a| a.mass)
            .sum()
    }

    /// Inverse CDF. Not available for the Cauchy power family, whose
    /// distribution function has no closed form.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
        }
        match self.closed {
            None => Ok(self.table.quantile(q)),
            Some(ClosedForm::CauchyModulus { scale }) => {
                Ok(scale * (0.5 * std::f64::consts::PI * q).tan())
            }
            Some(ClosedForm::QuarterCircle { variance }) => {
                // F(u) = (u√(R²-u²) + R² asin(u/R)) / (π R²/2) with R = 2√ε;
                // in the angle θ = asin(u/R) this is (θ + sinθ cosθ)/(π/2).
                let r = 2.0 * variance.sqrt();
                if q >= 1.0 {
                    return Ok(r);
                }
                let target = 0.5 * std::f64::consts::PI * q;
                let (mut lo, mut hi) = (0.0, 0.5 * std::f64::consts::PI);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid + mid.sin() * mid.cos() < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(r * (0.5 * (lo + hi)).sin())
            }
            Some(ClosedForm::CauchyPowerModulus { .. }) => Err(Error::UnsupportedMeasure(
                "the Cauchy power modulus law has no closed-form quantile".into(),
            )),
        }
    }
}

/// A symmetric probability measure on the real line, stored through its
/// nonnegative half. Constructed only by [`symmetrize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMeasure {
    half: PositiveMeasure,
}

/// `μ̃(B) = ½(ν(B) + ν(−B))`.
pub fn symmetrize(nu: &PositiveMeasure) -> Result<SymmetricMeasure> {
    let m = nu.total_mass();
    if (m - 1.0).abs() > MASS_TOL {
        return Err(Error::MalformedMeasure(format!(
            "total mass {m} differs from 1"
        )));
    }
    Ok(SymmetricMeasure { half: nu.clone() })
}

impl SymmetricMeasure {
    /// `½(δ_γ + δ_{−γ})`.
    pub fn bernoulli(gamma: f64) -> Result<Self> {
        symmetrize(&PositiveMeasure::dirac(gamma.abs())?)
    }

    pub fn semicircle(variance: f64) -> Result<Self> {
        symmetrize(&PositiveMeasure::quarter_circle(variance)?)
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        symmetrize(&PositiveMeasure::cauchy_modulus(scale)?)
    }

    pub fn cauchy_power(power: u32) -> Result<Self> {
        symmetrize(&PositiveMeasure::cauchy_power_modulus(power)?)
    }

    /// Symmetrization of the atomic measure with the given `(|x|, mass)` pairs.
    pub fn from_moduli(atoms: &[(f64, f64)]) -> Result<Self> {
        symmetrize(&PositiveMeasure::from_atoms(atoms)?)
    }

    /// Pushforward under `|·|`.
    pub fn modulus(&self) -> &PositiveMeasure {
        &self.half
    }
}

/// `λ₁ = (∫u⁻²dμ)^(−1/2)` and `λ₂ = (∫u²dμ)^(1/2)`, with `∞^(−1/2) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// The four integrals behind every imaginary-axis transform at `s`:
/// `d = ∫(s²+u²)⁻¹`, `n = ∫u²(s²+u²)⁻¹` and their `s`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisValues {
    pub d: f64,
    pub n: f64,
    pub d_prime: f64,
    pub n_prime: f64,
}

/// Imaginary-axis transforms of a symmetric measure.
///
/// Implementors provide [`AxisValues`] and the log-moment; closed forms
/// override the derived quantities where a cancellation-free formula exists.
pub trait Transform {
    fn axis_values(&self, s: f64) -> AxisValues;

    /// `∫ log(s² + u²) dμ`; `s = 0` is allowed and may return `−∞`.
    fn log_moment(&self, s: f64) -> f64;

    fn lambda_bounds(&self) -> LambdaBounds;

    fn atom_at_zero(&self) -> f64;

    /// `h(s) = ∫ s/(s²+u²) dμ`.
    fn h(&self, s: f64) -> f64 {
        s * self.axis_values(s).d
    }

    /// `f(s) = 1/h(s) − s`, evaluated as `n/(s·d)` to avoid cancellation.
    fn f(&self, s: f64) -> f64 {
        let v = self.axis_values(s);
        v.n / (s * v.d)
    }

    /// `p(s) = s·f(s) = n/d`.
    fn p(&self, s: f64) -> f64 {
        let v = self.axis_values(s);
        v.n / v.d
    }

    fn p_deriv(&self, s: f64) -> f64 {
        let v = self.axis_values(s);
        (v.n_prime * v.d - v.n * v.d_prime) / (v.d * v.d)
    }

    fn is_delta_zero(&self) -> bool {
        self.atom_at_zero() >= 1.0 - 1e-12
    }
}

fn tabulated_axis_values(t: &Tabulated, s: f64) -> AxisValues {
    let s2 = s * s;
    let v = t.integrate(
        |u| {
            let u2 = u * u;
            let r = 1.0 / (s2 + u2);
            [r, u2 * r, r * r, u2 * r * r]
        },
        None,
    );
    AxisValues {
        d: v[0],
        n: v[1],
        d_prime: -2.0 * s * v[2],
        n_prime: -2.0 * s * v[3],
    }
}

fn tabulated_log_moment(t: &Tabulated, s: f64) -> f64 {
    let s2 = s * s;
    let mut total = 0.0;
    for a in &t.atoms {
        // The atom at the origin contributes 2·log s exactly.
        total += a.mass
            * if a.x == 0.0 {
                2.0 * s.ln()
            } else {
                (s2 + a.x * a.x).ln()
            };
    }
    let cont = Tabulated {
        atoms: vec![],
        pieces: t.pieces.clone(),
    };
    total + cont.integrate(|u| [(s2 + u * u).ln()], None)[0]
}

fn tabulated_bounds(t: &Tabulated) -> LambdaBounds {
    let second = t.integrate(|u| [u * u], None)[0];
    // ∫u⁻² diverges with an atom at 0, or with a piece starting at 0 whose
    // first segment is not identically zero (even a linear ramp diverges).
    let divergent = t.atoms.iter().any(|a| a.x == 0.0)
        || t.pieces
            .iter()
            .any(|p| p.grid[0] == 0.0 && (p.values[0] > 0.0 || p.values[1] > 0.0));
    let lambda1 = if divergent {
        0.0
    } else {
        let mut inv = 0.0;
        for a in &t.atoms {
            inv += a.mass / (a.x * a.x);
        }
        for p in &t.pieces {
            for (a, b, va, vb) in p.segments() {
                if va == 0.0 && vb == 0.0 {
                    continue;
                }
                // Exact: ∫(α+βu)/u² = α(1/a − 1/b) + β log(b/a).
                let beta = (vb - va) / (b - a);
                let alpha = va - beta * a;
                inv += alpha * (1.0 / a - 1.0 / b) + beta * (b / a).ln();
            }
        }
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

impl Transform for SymmetricMeasure {
    fn axis_values(&self, s: f64) -> AxisValues {
        match self.half.closed {
            None => tabulated_axis_values(&self.half.table, s),
            Some(ClosedForm::QuarterCircle { variance: e }) => {
                let r = (s * s + 4.0 * e).sqrt();
                let rs = r + s;
                AxisValues {
                    d: 2.0 / (s * rs),
                    n: 4.0 * e / (rs * rs),
                    d_prime: -2.0 / (r * s * s),
                    n_prime: -8.0 * e / (r * rs * rs),
                }
            }
            Some(ClosedForm::CauchyModulus { scale: a }) => {
                let sa = s + a;
                AxisValues {
                    d: 1.0 / (s * sa),
                    n: a / sa,
                    d_prime: -(2.0 * s + a) / (s * s * sa * sa),
                    n_prime: -a / (sa * sa),
                }
            }
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                // h = 1/(s + s^q); d = h/s; n = 1 − s·h = s^q/(s + s^q).
                let q = (power as f64 - 1.0) / (power as f64 + 1.0);
                let sq = s.powf(q);
                let den = s + sq;
                let den_prime = 1.0 + q * sq / s;
                AxisValues {
                    d: 1.0 / (s * den),
                    n: sq / den,
                    d_prime: -(den + s * den_prime) / (s * s * den * den),
                    n_prime: (q * sq / s * den - sq * den_prime) / (den * den),
                }
            }
        }
    }

    fn h(&self, s: f64) -> f64 {
        match self.half.closed {
            Some(ClosedForm::QuarterCircle { variance: e }) => 2.0 / ((s * s + 4.0 * e).sqrt() + s),
            Some(ClosedForm::CauchyModulus { scale: a }) => 1.0 / (s + a),
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                let q = (power as f64 - 1.0) / (power as f64 + 1.0);
                1.0 / (s + s.powf(q))
            }
            None => s * self.axis_values(s).d,
        }
    }

    fn f(&self, s: f64) -> f64 {
        match self.half.closed {
            Some(ClosedForm::QuarterCircle { variance: e }) => e * self.h(s),
            Some(ClosedForm::CauchyModulus { scale: a }) => a,
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                let q = (power as f64 - 1.0) / (power as f64 + 1.0);
                s.powf(q)
            }
            None => {
                let v = self.axis_values(s);
                v.n / (s * v.d)
            }
        }
    }

    fn p(&self, s: f64) -> f64 {
        match self.half.closed {
            Some(_) => s * self.f(s),
            None => {
                let v = self.axis_values(s);
                v.n / v.d
            }
        }
    }

    fn p_deriv(&self, s: f64) -> f64 {
        match self.half.closed {
            Some(ClosedForm::QuarterCircle { variance: e }) => {
                let r = (s * s + 4.0 * e).sqrt();
                let rs = r + s;
                8.0 * e * e / (r * rs * rs)
            }
            Some(ClosedForm::CauchyModulus { scale: a }) => a,
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                let q = (power as f64 - 1.0) / (power as f64 + 1.0);
                (1.0 + q) * s.powf(q)
            }
            None => {
                let v = self.axis_values(s);
                (v.n_prime * v.d - v.n * v.d_prime) / (v.d * v.d)
            }
        }
    }

    fn log_moment(&self, s: f64) -> f64 {
        match self.half.closed {
            None => tabulated_log_moment(&self.half.table, s),
            Some(ClosedForm::QuarterCircle { variance: e }) => {
                let r = (s * s + 4.0 * e).sqrt();
                2.0 * (0.5 * (s + r)).ln() - 1.0 + 2.0 * s / (r + s)
            }
            Some(ClosedForm::CauchyModulus { scale: a }) => 2.0 * (s + a).ln(),
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                let n = power as f64;
                2.0 * s.ln() + (n + 1.0) * (s.powf(-2.0 / (n + 1.0))).ln_1p()
            }
        }
    }

    fn lambda_bounds(&self) -> LambdaBounds {
        match self.half.closed {
            None => tabulated_bounds(&self.half.table),
            Some(ClosedForm::QuarterCircle { variance }) => LambdaBounds {
                lambda1: 0.0,
                lambda2: variance.sqrt(),
            },
            Some(ClosedForm::CauchyModulus { .. })
            | Some(ClosedForm::CauchyPowerModulus { .. }) => LambdaBounds {
                lambda1: 0.0,
                lambda2: f64::INFINITY,
            },
        }
    }

    fn atom_at_zero(&self) -> f64 {
        self.half.atom_at_zero()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "transform argument s = {s} must be positive and finite"
        )))
    }
}

/// `h_μ(s)`, in `(0, 1/s]`.
pub fn h_transform<M: Transform + ?Sized>(mu: &M, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(mu.h(s))
}

/// `f_μ(s) = 1/h_μ(s) − s`.
pub fn f_transform<M: Transform + ?Sized>(mu: &M, s: f64) -> Result<f64> {
    check_s(s)?;
    let h = mu.h(s);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Degenerate(format!("h({s}) = {h}")));
    }
    Ok(mu.f(s))
}

/// `p_μ(s) = s·f_μ(s) = n_μ(s)/d_μ(s)`.
pub fn p_ratio<M: Transform + ?Sized>(mu: &M, s: f64) -> Result<f64> {
    f_transform(mu, s)?;
    Ok(mu.p(s))
}

/// Analytic `s`-derivative of [`p_ratio`].
pub fn p_ratio_deriv<M: Transform + ?Sized>(mu: &M, s: f64) -> Result<f64> {
    f_transform(mu, s)?;
    Ok(mu.p_deriv(s))
}

pub fn lambda_bounds<M: Transform + ?Sized>(mu: &M) -> LambdaBounds {
    mu.lambda_bounds()
}

/// Density at 0 of `μ₁ ⊞ μ₂` from the boundary values `s₁(0), s₂(0)`:
/// `1/(π(s₁(0)+s₂(0)))`.
pub fn density_at_zero_of_convolution(s1_0: f64, s2_0: f64) -> Result<f64> {
    if !(s1_0.is_finite() && s2_0.is_finite()) || s1_0 < 0.0 || s2_0 < 0.0 || s1_0 + s2_0 <= 0.0 {
        return Err(Error::Degenerate(format!(
            "boundary values ({s1_0}, {s2_0}) do not give a finite density at 0"
        )));
    }
    Ok(1.0 / (std::f64::consts::PI * (s1_0 + s2_0)))
}

/// JSON form of a [`PositiveMeasure`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub pieces: Vec<Piece>,
    #[serde(default = "default_tail")]
    pub tail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

fn default_tail() -> String {
    "none".into()
}

impl TryFrom<MeasureDoc> for PositiveMeasure {
    type Error = Error;

    fn try_from(doc: MeasureDoc) -> Result<Self> {
        let param = |default: Option<f64>| {
            doc.param.or(default).ok_or_else(|| {
                Error::MalformedMeasure(format!("tail '{}' needs a param", doc.tail))
            })
        };
        let closed = match doc.tail.as_str() {
            "none" => None,
            "cauchy-modulus" => Some(ClosedForm::CauchyModulus {
                scale: param(Some(1.0))?,
            }),
            "quarter-circle" => Some(ClosedForm::QuarterCircle {
                variance: param(Some(1.0))?,
            }),
            "cauchy-power-modulus" => {
                let p = param(None)?;
                if p < 1.0 || p.fract() != 0.0 {
                    return Err(Error::MalformedMeasure(format!(
                        "power {p} must be a positive integer"
                    )));
                }
                Some(ClosedForm::CauchyPowerModulus { power: p as u32 })
            }
            other => {
                return Err(Error::MalformedMeasure(format!(
                    "unknown tail tag '{other}'"
                )))
            }
        };
        match closed {
            Some(c) => {
                if !doc.atoms.is_empty() || !doc.pieces.is_empty() {
                    return Err(Error::MalformedMeasure(
                        "closed-form tails cannot be combined with atoms or pieces".into(),
                    ));
                }
                PositiveMeasure::closed_form(c)
            }
            None => PositiveMeasure::new(doc.atoms, doc.pieces),
        }
    }
}

impl From<PositiveMeasure> for MeasureDoc {
    fn from(m: PositiveMeasure) -> Self {
        let (tail, param) = match m.closed {
            None => ("none", None),
            Some(ClosedForm::CauchyModulus { scale }) => ("cauchy-modulus", Some(scale)),
            Some(ClosedForm::QuarterCircle { variance }) => ("quarter-circle", Some(variance)),
            Some(ClosedForm::CauchyPowerModulus { power }) => {
                ("cauchy-power-modulus", Some(power as f64))
            }
        };
        MeasureDoc {
            atoms: m.table.atoms,
            pieces: m.table.pieces,
            tail: tail.into(),
            param,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tabulated_semicircle(variance: f64, nodes: usize) -> SymmetricMeasure {
        let r = 2.0 * variance.sqrt();
        let grid: Vec<f64> = (0..nodes)
            .map(|i| r * i as f64 / (nodes - 1) as f64)
            .collect();
        let values = grid
            .iter()
            .map(|u| (4.0 * variance - u * u).max(0.0).sqrt() / (std::f64::consts::PI * variance))
            .collect();
        symmetrize(&PositiveMeasure::normalized(vec![], vec![Piece { grid, values }]).unwrap())
            .unwrap()
    }

    #[test]
    fn bernoulli_transforms() {
        let b = SymmetricMeasure::bernoulli(1.0).unwrap();
        assert!((h_transform(&b, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let b2 = SymmetricMeasure::bernoulli(2.0).unwrap();
        assert!((p_ratio(&b2, 0.3).unwrap() - 4.0).abs() < 1e-12);
        assert!(p_ratio_deriv(&b2, 0.3).unwrap().abs() < 1e-12);
        for s in [0.1, 1.0, 7.0] {
            assert!((f_transform(&b2, s).unwrap() - 4.0 / s).abs() < 1e-12);
        }
        assert_eq!(
            b.lambda_bounds(),
            LambdaBounds {
                lambda1: 1.0,
                lambda2: 1.0
            }
        );
    }

    #[test]
    fn cauchy_transforms() {
        let c = SymmetricMeasure::cauchy(1.0).unwrap();
        assert!((h_transform(&c, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for s in [0.01, 1.0, 30.0] {
            assert_eq!(f_transform(&c, s).unwrap(), 1.0);
            assert!((p_ratio(&c, s).unwrap() - s).abs() < 1e-14);
            assert_eq!(p_ratio_deriv(&c, s).unwrap(), 1.0);
        }
        let lb = c.lambda_bounds();
        assert_eq!(lb.lambda1, 0.0);
        assert!(lb.lambda2.is_infinite());
    }

    #[test]
    fn cauchy_power_one_is_cauchy() {
        let a = SymmetricMeasure::cauchy_power(1).unwrap();
        let b = SymmetricMeasure::cauchy(1.0).unwrap();
        for s in [0.05, 0.7, 3.0, 40.0] {
            assert!((a.h(s) - b.h(s)).abs() < 1e-15);
            assert!((a.log_moment(s) - b.log_moment(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn semicircle_transforms() {
        let sc = SymmetricMeasure::semicircle(1.0).unwrap();
        assert!((h_transform(&sc, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        for e in [0.5, 1.0, 3.0] {
            let m = SymmetricMeasure::semicircle(e).unwrap();
            for s in [0.1, 1.0, 5.0] {
                assert!((m.f(s) - e * m.h(s)).abs() < 1e-14);
                let v = m.axis_values(s);
                assert!((v.n / (s * v.d) - m.f(s)).abs() < 1e-13);
            }
            let lb = m.lambda_bounds();
            assert_eq!(lb.lambda1, 0.0);
            assert!((lb.lambda2 - e.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn tabulated_semicircle_matches_closed_form() {
        let tab = tabulated_semicircle(1.0, 4001);
        let cf = SymmetricMeasure::semicircle(1.0).unwrap();
        for s in [0.2, 1.0, 4.0] {
            assert!((tab.h(s) - cf.h(s)).abs() < 1e-4, "s={s}");
            assert!((tab.log_moment(s) - cf.log_moment(s)).abs() < 1e-4);
        }
        assert!((tab.lambda_bounds().lambda2 - 1.0).abs() < 1e-4);
        assert_eq!(tab.lambda_bounds().lambda1, 0.0);
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let ms = [
            SymmetricMeasure::semicircle(0.7).unwrap(),
            SymmetricMeasure::cauchy(2.0).unwrap(),
            SymmetricMeasure::cauchy_power(3).unwrap(),
        ];
        for m in &ms {
            for s in [0.3, 1.0, 2.5] {
                let step = 1e-6;
                let fd = |g: &dyn Fn(f64) -> f64| (g(s + step) - g(s - step)) / (2.0 * step);
                let v = m.axis_values(s);
                let dd = fd(&|x| m.axis_values(x).d);
                let dn = fd(&|x| m.axis_values(x).n);
                assert!(
                    (v.d_prime - dd).abs() < 1e-6 * dd.abs().max(1.0),
                    "{m:?} d' at {s}"
                );
                assert!(
                    (v.n_prime - dn).abs() < 1e-6 * dn.abs().max(1.0),
                    "{m:?} n' at {s}"
                );
                let dp = fd(&|x| m.p(x));
                assert!((m.p_deriv(s) - dp).abs() < 1e-6 * dp.abs().max(1.0));
                let dl = fd(&|x| m.log_moment(x));
                assert!(
                    (dl - 2.0 * m.h(s)).abs() < 1e-6,
                    "log-moment derivative is 2h"
                );
            }
        }
    }

    #[test]
    fn atom_at_zero_survives_symmetrization() {
        let nu = PositiveMeasure::from_atoms(&[(0.0, 0.3), (1.5, 0.7)]).unwrap();
        let mu = symmetrize(&nu).unwrap();
        assert!((mu.atom_at_zero() - 0.3).abs() < 1e-15);
        assert_eq!(mu.lambda_bounds().lambda1, 0.0);
        assert_eq!(mu.modulus(), &nu);
    }

    #[test]
    fn malformed_measures_are_rejected() {
        assert!(PositiveMeasure::from_atoms(&[(1.0, 0.5)]).is_err());
        assert!(PositiveMeasure::from_atoms(&[(-1.0, 1.0)]).is_err());
        assert!(PositiveMeasure::from_atoms(&[(1.0, 0.5), (1.0, 0.5)]).is_err());
        assert!(PositiveMeasure::new(
            vec![],
            vec![Piece {
                grid: vec![0.0, 1.0],
                values: vec![1.0, -1.0]
            }]
        )
        .is_err());
        assert!(h_transform(&SymmetricMeasure::bernoulli(1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = PositiveMeasure::new(
            vec![Atom { x: 0.0, mass: 0.25 }],
            vec![Piece {
                grid: vec![1.0, 2.0],
                values: vec![0.75, 0.75],
            }],
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: PositiveMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let c: PositiveMeasure = serde_json::from_str(r#"{"tail":"cauchy-modulus"}"#).unwrap();
        assert_eq!(c.closed(), Some(ClosedForm::CauchyModulus { scale: 1.0 }));
        assert!(
            serde_json::from_str::<PositiveMeasure>(r#"{"atoms":[{"x":1,"mass":0.4}]}"#).is_err()
        );
    }

    #[test]
    fn quantiles() {
        let q = PositiveMeasure::quarter_circle(1.0).unwrap();
        assert!((q.quantile(1.0).unwrap() - 2.0).abs() < 1e-12);
        let c = PositiveMeasure::cauchy_modulus(1.0).unwrap();
        assert!((c.quantile(0.5).unwrap() - 1.0).abs() < 1e-12);
        let a = PositiveMeasure::from_atoms(&[(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(a.quantile(0.25).unwrap(), 1.0);
        assert_eq!(a.quantile(0.75).unwrap(), 3.0);
        let u = PositiveMeasure::new(
            vec![],
            vec![Piece {
                grid: vec![0.0, 2.0],
                values: vec![0.5, 0.5],
            }],
        )
        .unwrap();
        assert!((u.quantile(0.3).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn density_at_zero() {
        let v = density_at_zero_of_convolution(0.5, 1.5).unwrap();
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
        assert!(density_at_zero_of_convolution(f64::INFINITY, 1.0).is_err());
    }
}
