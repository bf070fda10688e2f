//! Brown measure of `x₀ + T`: the domain `Ω(T, x₀)`, atom candidates,
//! Fuglede–Kadison determinants, the density and density grids.
//!
//! Throughout, `μ₁ = μ̃_{|x₀−λ|}` and `μ₂ = μ̃_{|T|}`, so that `s₁` belongs to
//! the `x₀` side of the subordination pair.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::measures::{LambdaBounds, SymmetricMeasure, Transform};
use crate::operator_models::{
    rdiag_symmetrized_modulus, resolvent_functionals, ModulusLaw, OperatorModel, RDiagonalSpec,
    RealMeasure, ResolventFunctionals,
};
use crate::roots::brent;
use crate::subordination::{
    classify_boundary, solve_subordination, BoundaryCase, BoundaryClassification,
};

/// Margins within this distance of 0 count as outside `Ω`.
pub const MARGIN_TOL: f64 = 1e-6;

/// `Ω(T, x₀)` membership at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainVerdict {
    pub in_omega: bool,
    /// `‖(x₀−λ)⁻¹‖₂·‖T‖₂ − 1`, possibly `+∞`.
    pub margin_inner: f64,
    /// `‖x₀−λ‖₂·‖T⁻¹‖₂ − 1`, possibly `+∞`.
    pub margin_outer: f64,
    pub atom_candidate: bool,
}

/// Which margin a boundary search follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Margin {
    Inner,
    Outer,
}

/// `log Δ` of `x₀ + T − λ`, regularized by `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Determinant {
    /// `log Δ`; `−∞` when the determinant vanishes.
    pub log_det: f64,
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    /// Boundary case used at `t = 0`.
    pub case: Option<BoundaryCase>,
    /// Set when both boundary values vanish and the determinant is reported as 0.
    pub zero_flag: bool,
}

impl Determinant {
    pub fn value(&self) -> f64 {
        self.log_det.exp()
    }
}

/// Inner and outer radius of the single ring of `T₁ + T₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingRadii {
    pub r_inner: f64,
    pub r_outer: f64,
    /// `r_inner²`, i.e. the gap `λ₁² − λ₂²` before the square root.
    pub inner_squared: f64,
}

/// Precomputed data for repeated evaluations at many `λ`.
#[derive(Debug, Clone)]
pub struct BrownProblem {
    t: RDiagonalSpec,
    x0: OperatorModel,
    mu_t: SymmetricMeasure,
    t_bounds: LambdaBounds,
    t_atom: f64,
    candidates: Vec<Complex64>,
}

fn ratio_margin(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den - 1.0
    }
}

impl BrownProblem {
    pub fn new(t: &RDiagonalSpec, x0: &OperatorModel) -> Result<Self> {
        t.validate()?;
        x0.validate()?;
        let mu_t = rdiag_symmetrized_modulus(t)?;
        let t_bounds = mu_t.lambda_bounds();
        let t_atom = mu_t.atom_at_zero();
        let mut p = BrownProblem {
            t: t.clone(),
            x0: x0.clone(),
            mu_t,
            t_bounds,
            t_atom,
            candidates: vec![],
        };
        p.candidates = p.find_atom_candidates()?;
        Ok(p)
    }

    pub fn t_spec(&self) -> &RDiagonalSpec {
        &self.t
    }

    pub fn x0(&self) -> &OperatorModel {
        &self.x0
    }

    pub fn t_modulus(&self) -> &SymmetricMeasure {
        &self.mu_t
    }

    pub fn t_bounds(&self) -> LambdaBounds {
        self.t_bounds
    }

    pub fn atom_candidates(&self) -> &[Complex64] {
        &self.candidates
    }

    fn find_atom_candidates(&self) -> Result<Vec<Complex64>> {
        // With no kernel in T the sum reaches 1 only when x₀ − λ = 0, where
        // the Brown measure is that of T translated and carries no atom.
        if self.t_atom <= 0.0 {
            return Ok(vec![]);
        }
        let mut spots: Vec<Complex64> = match &self.x0 {
            OperatorModel::Matrix(m) => eigenvalues(m)?,
            other => other.point_spectrum().into_iter().map(|(z, _)| z).collect(),
        };
        spots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let scale = spots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        spots.dedup_by(|a, b| (*a - *b).norm() <= 1e-9 * scale);
        let mut out = vec![];
        for z in spots {
            let kernel = ModulusLaw::new(&self.x0, z)?.atom_at_zero();
            if self.t_atom + kernel >= 1.0 - 1e-12 {
                out.push(z);
            }
        }
        Ok(out)
    }

    fn verdict_with(&self, law: &ModulusLaw<'_>, lambda: Complex64) -> DomainVerdict {
        let b = law.lambda_bounds();
        let margin_inner = ratio_margin(self.t_bounds.lambda2, b.lambda1);
        let margin_outer = if self.t_bounds.lambda1 == 0.0 {
            f64::INFINITY
        } else {
            b.lambda2 / self.t_bounds.lambda1 - 1.0
        };
        let in_omega = margin_inner > MARGIN_TOL && margin_outer > MARGIN_TOL;
        let atom_candidate = self.candidates.contains(&lambda)
            || (self.t_atom > 0.0 && self.t_atom + law.atom_at_zero() >= 1.0 - 1e-12);
        DomainVerdict {
            in_omega,
            margin_inner,
            margin_outer,
            atom_candidate,
        }
    }

    pub fn omega_membership(&self, lambda: Complex64) -> Result<DomainVerdict> {
        let law = ModulusLaw::new(&self.x0, lambda)?;
        Ok(self.verdict_with(&law, lambda))
    }

    /// `(s₁(0), s₂(0))` for `λ ∈ Ω`, where both are finite.
    pub fn boundary_values(&self, lambda: Complex64) -> Result<BoundaryClassification> {
        let law = ModulusLaw::new(&self.x0, lambda)?;
        classify_boundary(&law, &self.mu_t)
    }

    /// `log Δ(x₀ + T − λ)` for `t = 0`, and `log Δ(|x₀+T−λ|² + t²)^{1/2}` for `t > 0`.
    pub fn log_determinant(&self, lambda: Complex64, t: f64) -> Result<Determinant> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!(
                "regularization t = {t} must be nonnegative"
            )));
        }
        let law = ModulusLaw::new(&self.x0, lambda)?;
        let base = Determinant {
            log_det: 0.0,
            t,
            s1: f64::NAN,
            s2: f64::NAN,
            case: None,
            zero_flag: false,
        };
        // x₀ − λ = 0: only T is left.
        if law.is_delta_zero() {
            return Ok(Determinant {
                log_det: 0.5 * self.mu_t.log_moment(t),
                s2: t,
                ..base
            });
        }
        if t > 0.0 {
            let pair = solve_subordination(&law, &self.mu_t, t)?;
            let log_det = 0.5 * (law.log_moment(pair.s1) + self.mu_t.log_moment(pair.s2))
                - (pair.excess1 + pair.excess2 + t).ln();
            return Ok(Determinant {
                log_det,
                s1: pair.s1,
                s2: pair.s2,
                ..base
            });
        }
        let c = classify_boundary(&law, &self.mu_t)?;
        let det = Determinant {
            s1: c.s1_0,
            s2: c.s2_0,
            case: Some(c.case),
            ..base
        };
        Ok(match c.case {
            BoundaryCase::FiniteFinite => Determinant {
                log_det: 0.5 * (law.log_moment(c.s1_0) + self.mu_t.log_moment(c.s2_0))
                    - (c.s1_0 + c.s2_0).ln(),
                ..det
            },
            BoundaryCase::ZeroInf => Determinant {
                log_det: 0.5 * law.log_moment(0.0),
                ..det
            },
            BoundaryCase::InfZero => Determinant {
                log_det: 0.5 * self.mu_t.log_moment(0.0),
                ..det
            },
            BoundaryCase::ZeroZero => Determinant {
                log_det: f64::NEG_INFINITY,
                zero_flag: true,
                ..det
            },
        })
    }

    /// Shifts `λ` off a point where `x₀ − λ = 0`; the density is smooth there.
    fn regular_point(&self, lambda: Complex64) -> Result<(Complex64, ModulusLaw<'_>)> {
        let law = ModulusLaw::new(&self.x0, lambda)?;
        if !law.is_delta_zero() {
            return Ok((lambda, law));
        }
        let moved = lambda + Complex64::new(1e-6 * lambda.norm().max(1.0), 0.0);
        Ok((moved, ModulusLaw::new(&self.x0, moved)?))
    }

    fn density_inputs(
        &self,
        lambda: Complex64,
    ) -> Result<Option<(f64, f64, ResolventFunctionals)>> {
        let law = ModulusLaw::new(&self.x0, lambda)?;
        let v = self.verdict_with(&law, lambda);
        if v.atom_candidate {
            return Err(Error::AtomCandidate(lambda));
        }
        if !v.in_omega {
            return Ok(None);
        }
        let (at, law) = self.regular_point(lambda)?;
        let c = classify_boundary(&law, &self.mu_t)?;
        match c.case {
            BoundaryCase::FiniteFinite => {}
            BoundaryCase::ZeroZero => return Err(Error::AtomDominated),
            _ => return Ok(None),
        }
        let f = resolvent_functionals(&self.x0, at, c.s1_0)?;
        Ok(Some((c.s1_0, c.s2_0, f)))
    }

    /// Density through the general formula, for any `T`.
    pub fn density_general(&self, lambda: Complex64) -> Result<f64> {
        let Some((s1, s2, f)) = self.density_inputs(lambda)? else {
            return Ok(0.0);
        };
        let p1 = 1.0 / f.phi_hinv - s1 * s1;
        let p1d = 2.0 * s1 * f.phi_hinv2 / (f.phi_hinv * f.phi_hinv) - 2.0 * s1;
        let p2d = self.mu_t.p_deriv(s2);
        let num = 2.0 * s1 * (s1 - p2d) * f.phi_x_hinv2.norm_sqr() / (f.phi_hinv * f.phi_hinv);
        let den = p1 * p2d / s1 + (s1 - p2d) * p1d;
        Ok(((s1 * s1 * f.phi_hk + num / den) / std::f64::consts::PI).max(0.0))
    }

    /// Density through the family-specific formula, when `T` has one.
    pub fn density_closed_form(&self, lambda: Complex64) -> Option<Result<f64>> {
        let pi = std::f64::consts::PI;
        match self.t {
            RDiagonalSpec::CircularCauchy { scale } => Some((|| {
                let v = self.omega_membership(lambda)?;
                if v.atom_candidate {
                    return Err(Error::AtomCandidate(lambda));
                }
                if !v.in_omega {
                    return Ok(0.0);
                }
                let f = resolvent_functionals(&self.x0, lambda, scale)?;
                Ok(scale * scale / pi * f.phi_hk)
            })()),
            RDiagonalSpec::HaarUnitary { .. } => Some((|| {
                let Some((s1, _, f)) = self.density_inputs(lambda)? else {
                    return Ok(0.0);
                };
                let gap = f.phi_hinv2 - f.phi_hinv * f.phi_hinv;
                Ok((s1 * s1 * f.phi_hk + f.phi_x_hinv2.norm_sqr() / gap) / pi)
            })()),
            RDiagonalSpec::Circular { .. } => Some((|| {
                let Some((s1, _, f)) = self.density_inputs(lambda)? else {
                    return Ok(0.0);
                };
                Ok((f.phi_x_hinv2.norm_sqr() / f.phi_hinv2 + s1 * s1 * f.phi_hk) / pi)
            })()),
            _ => None,
        }
    }

    /// Density of the Brown measure at `λ`; closed forms where available.
    ///
    /// Returns 0 outside `Ω` and [`Error::AtomCandidate`] on `S(T, x₀)`.
    pub fn density(&self, lambda: Complex64) -> Result<f64> {
        match self.density_closed_form(lambda) {
            Some(r) => r,
            None => self.density_general(lambda),
        }
    }

    /// Density recovered from determinants: `(1/2π)·Δ_h log Δ_t` with the
    /// five-point Laplacian of step `h`.
    pub fn determinant_laplacian(&self, lambda: Complex64, t: f64, h: f64) -> Result<f64> {
        let ld = |z: Complex64| self.log_determinant(z, t).map(|d| d.log_det);
        let c = ld(lambda)?;
        let e = ld(lambda + h)? + ld(lambda - h)?;
        let n = ld(lambda + Complex64::new(0.0, h))? + ld(lambda - Complex64::new(0.0, h))?;
        Ok((e + n - 4.0 * c) / (h * h) / (2.0 * std::f64::consts::PI))
    }

    fn margin_at(&self, lambda: Complex64, which: Margin) -> Result<f64> {
        let v = self.omega_membership(lambda)?;
        Ok(match which {
            Margin::Inner => v.margin_inner,
            Margin::Outer => v.margin_outer,
        })
    }

    /// Refines a sign change of one margin between `a` and `b` by bisection
    /// until the margin is below `tol` in absolute value.
    pub fn refine_boundary(
        &self,
        a: Complex64,
        b: Complex64,
        which: Margin,
        tol: f64,
    ) -> Result<Complex64> {
        let (ma, mb) = (self.margin_at(a, which)?, self.margin_at(b, which)?);
        if ma.signum() == mb.signum() {
            return Err(Error::Domain(format!(
                "no {which:?} margin sign change between {a} and {b}"
            )));
        }
        let at = |u: f64| a + (b - a) * u;
        let g = |u: f64| {
            let m = self.margin_at(at(u), which).unwrap_or(f64::NAN);
            if m.is_infinite() {
                m.signum() * 1e300
            } else {
                m
            }
        };
        let clip = |m: f64| {
            if m.is_infinite() {
                m.signum() * 1e300
            } else {
                m
            }
        };
        let root = brent(g, 0.0, 1.0, clip(ma), clip(mb), 1e-16, tol, 400)?;
        if root.fx.abs() > tol {
            return Err(Error::SolverFailure {
                iterations: root.iterations,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(at(root.x))
    }

    /// First crossing of a margin along the ray `center + r·e^{iθ}`,
    /// `0 < r ≤ r_max`, found by scanning `steps` points then refining.
    pub fn boundary_along_ray(
        &self,
        center: Complex64,
        theta: f64,
        r_max: f64,
        steps: usize,
        which: Margin,
    ) -> Result<Option<f64>> {
        let dir = Complex64::from_polar(1.0, theta);
        let mut prev = center + dir * (r_max * 1e-9);
        let mut m_prev = self.margin_at(prev, which)?;
        for k in 1..=steps {
            let r = r_max * k as f64 / steps as f64;
            let cur = center + dir * r;
            let m = self.margin_at(cur, which)?;
            if m.signum() != m_prev.signum() {
                let z = self.refine_boundary(prev, cur, which, 1e-12)?;
                return Ok(Some((z - center).norm()));
            }
            prev = cur;
            m_prev = m;
        }
        Ok(None)
    }
}

/// `Ω(T, x₀)` membership at `λ`.
pub fn omega_membership(
    t: &RDiagonalSpec,
    x0: &OperatorModel,
    lambda: Complex64,
) -> Result<DomainVerdict> {
    BrownProblem::new(t, x0)?.omega_membership(lambda)
}

/// Points of `S(T, x₀)`: eigenvalues `λ` of `x₀` with
/// `μ_{|T|}({0}) + μ_{|x₀−λ|}({0}) ≥ 1`.
pub fn atom_candidates(t: &RDiagonalSpec, x0: &OperatorModel) -> Result<Vec<Complex64>> {
    Ok(BrownProblem::new(t, x0)?.candidates)
}

pub fn fk_log_determinant(
    t: &RDiagonalSpec,
    x0: &OperatorModel,
    lambda: Complex64,
    treg: f64,
) -> Result<Determinant> {
    BrownProblem::new(t, x0)?.log_determinant(lambda, treg)
}

/// `Δ(x₀ + T − λ)` at `treg = 0`, `Δ(|x₀+T−λ|² + treg²)^{1/2}` otherwise.
pub fn fk_determinant(
    t: &RDiagonalSpec,
    x0: &OperatorModel,
    lambda: Complex64,
    treg: f64,
) -> Result<f64> {
    Ok(fk_log_determinant(t, x0, lambda, treg)?.value())
}

pub fn brown_density(t: &RDiagonalSpec, x0: &OperatorModel, lambda: Complex64) -> Result<f64> {
    BrownProblem::new(t, x0)?.density(lambda)
}

/// Density of `x₀ + c_ε` for selfadjoint `x₀` as a function of `a = Re λ`
/// alone, using the width `v(a)` with `∫ dμ(u)/((u−a)² + v²) = 1/ε`.
pub fn circular_selfadjoint_density(
    x0: &RealMeasure,
    epsilon: f64,
    lambda: Complex64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "variance {epsilon} must be positive"
        )));
    }
    let (a, b) = (lambda.re, lambda.im);
    let inv = |a: f64, v: f64| x0.integrate(|u| [1.0 / ((u - a) * (u - a) + v * v)], Some(a))[0];
    if b != 0.0 && inv(a, b) <= 1.0 / epsilon {
        return Ok(0.0);
    }
    if b == 0.0 {
        let probe = inv(a, 1e-300_f64.sqrt());
        if probe.is_finite() && probe <= 1.0 / epsilon {
            return Ok(0.0);
        }
    }
    let width = |a: f64| -> Result<f64> {
        let g = |lv: f64| inv(a, lv.exp()) - 1.0 / epsilon;
        let scale = epsilon.sqrt();
        let mut lo = (b.abs().max(1e-8 * scale)).ln();
        let mut hi = (scale * 2.0 + 1.0).ln();
        let mut it = 0;
        while !(g(lo) > 0.0) {
            lo -= 2.0;
            it += 1;
            if it > 40 {
                return Err(Error::SolverFailure {
                    iterations: it,
                    lo: lo.exp(),
                    hi: hi.exp(),
                });
            }
        }
        while !(g(hi) < 0.0) {
            hi += 1.0;
            it += 1;
            if it > 80 {
                return Err(Error::SolverFailure {
                    iterations: it,
                    lo: lo.exp(),
                    hi: hi.exp(),
                });
            }
        }
        Ok(brent(g, lo, hi, g(lo), g(hi), 1e-15, 0.0, 300)?.x.exp())
    };
    let moment = |a: f64| -> Result<f64> {
        let v = width(a)?;
        Ok(x0.integrate(|u| [u / ((u - a) * (u - a) + v * v)], Some(a))[0])
    };
    let h = 1e-3 * epsilon.sqrt();
    let deriv = (-moment(a + 2.0 * h)? + 8.0 * moment(a + h)? - 8.0 * moment(a - h)?
        + moment(a - 2.0 * h)?)
        / (12.0 * h);
    Ok(((1.0 - 0.5 * epsilon * deriv) / (std::f64::consts::PI * epsilon)).max(0.0))
}

/// Radii of the single ring carrying the Brown measure of `T₁ + T₂` (both
/// R-diagonal and free).
pub fn ring_radii(t1: &RDiagonalSpec, t2: &RDiagonalSpec) -> Result<RingRadii> {
    let b1 = t1.lambda_bounds()?;
    let b2 = t2.lambda_bounds()?;
    let gap = if b1.lambda1 >= b2.lambda2 {
        b1.lambda1 * b1.lambda1 - b2.lambda2 * b2.lambda2
    } else if b2.lambda1 >= b1.lambda2 {
        b2.lambda1 * b2.lambda1 - b1.lambda2 * b1.lambda2
    } else {
        0.0
    };
    let inner_squared = gap.max(0.0);
    Ok(RingRadii {
        r_inner: inner_squared.sqrt(),
        r_outer: b1.lambda2.hypot(b2.lambda2),
        inner_squared,
    })
}

/// `Ω` membership for `x₀` semicircular of variance `t`.
pub fn ellipse_boundary_check(spec: &RDiagonalSpec, t: f64, lambda: Complex64) -> Result<bool> {
    let x0 = OperatorModel::SelfAdjoint(RealMeasure::semicircle(t)?);
    Ok(omega_membership(spec, &x0, lambda)?.in_omega)
}

/// Rectangular lattice of `λ` nodes, endpoints included; each node stands
/// for the cell of size `dx × dy` around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec {
            x_min: lo,
            x_max: hi,
            nx: n,
            y_min: lo,
            y_max: hi,
            ny: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = self.x_min < self.x_max && self.y_min < self.y_max;
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if self.nx < 2 || self.ny < 2 || !ordered || !finite {
            return Err(Error::Config(format!(
                "grid needs resolution >= 2x2 and ordered finite bounds: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `(i, j)` with `i` along x and `j` along y.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.x_min + i as f64 * self.dx(),
            self.y_min + j as f64 * self.dy(),
        )
    }

    /// Row-major index, rows running along y.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// An atom candidate listed with a grid; its mass is not computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAtom {
    pub re: f64,
    pub im: f64,
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridOptions {
    /// Each cell value averages `supersample²` evaluations inside the cell.
    pub supersample: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { supersample: 1 }
    }
}

/// Density values on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownDensityGrid {
    pub grid: GridSpec,
    /// Row-major (rows along y) density values.
    pub values: Vec<f64>,
    pub in_omega: Vec<bool>,
    pub atom_candidate: Vec<bool>,
    /// Cells whose evaluation failed; their value is 0.
    pub failed: Vec<bool>,
    pub atoms: Vec<GridAtom>,
    pub total_mass_estimate: f64,
}

impl BrownDensityGrid {
    /// Grid from raw values; used for empirical densities as well.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        let total_mass_estimate = values.iter().sum::<f64>() * grid.dx() * grid.dy();
        Ok(BrownDensityGrid {
            grid,
            in_omega: values.iter().map(|v| *v > 0.0).collect(),
            atom_candidate: vec![false; values.len()],
            failed: vec![false; values.len()],
            values,
            atoms: vec![],
            total_mass_estimate,
        })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,density,in_omega,atom_candidate\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let z = self.grid.node(i, j);
                let k = self.grid.index(i, j);
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    z.re,
                    z.im,
                    self.values[k],
                    self.in_omega[k] as u8,
                    self.atom_candidate[k] as u8
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    /// Binary PGM (P5), top row at `y_max`, intensity
    /// `255·log(1 + 255·ρ/ρ_max)/log 256`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let rho_max = self.values.iter().cloned().fold(0.0, f64::max);
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for j in (0..ny).rev() {
            for i in 0..nx {
                let rho = self.value(i, j);
                let v = if rho_max > 0.0 {
                    255.0 * (1.0 + rho / rho_max * 255.0).ln() / 256f64.ln()
                } else {
                    0.0
                };
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }
}

/// Evaluates the density on every node (or supersampled cell) in parallel.
pub fn density_grid(
    t: &RDiagonalSpec,
    x0: &OperatorModel,
    grid: &GridSpec,
    options: GridOptions,
) -> Result<BrownDensityGrid> {
    density_grid_for(&BrownProblem::new(t, x0)?, grid, options)
}

pub fn density_grid_for(
    problem: &BrownProblem,
    grid: &GridSpec,
    options: GridOptions,
) -> Result<BrownDensityGrid> {
    grid.validate()?;
    let ss = options.supersample.max(1);
    let (dx, dy) = (grid.dx(), grid.dy());
    let cells: Vec<(f64, bool, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % grid.nx, k / grid.nx);
            let c = grid.node(i, j);
            let inside = problem
                .omega_membership(c)
                .map(|v| v.in_omega)
                .unwrap_or(false);
            let mut sum = 0.0;
            let mut failed = false;
            for a in 0..ss {
                for b in 0..ss {
                    let off = Complex64::new(
                        ((a as f64 + 0.5) / ss as f64 - 0.5) * dx,
                        ((b as f64 + 0.5) / ss as f64 - 0.5) * dy,
                    );
                    let z = if ss == 1 { c } else { c + off };
                    match problem.density(z) {
                        Ok(v) if v.is_finite() => sum += v,
                        _ => failed = true,
                    }
                }
            }
            (sum / (ss * ss) as f64, inside, failed)
        })
        .collect();
    let values: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut g = BrownDensityGrid::from_values(*grid, values)?;
    g.in_omega = cells.iter().map(|c| c.1).collect();
    g.failed = cells.iter().map(|c| c.2).collect();
    for z in problem.atom_candidates() {
        g.atoms.push(GridAtom {
            re: z.re,
            im: z.im,
            mass: None,
        });
        let i = ((z.re - grid.x_min) / dx).round();
        let j = ((z.im - grid.y_min) / dy).round();
        if i >= 0.0 && j >= 0.0 && (i as usize) < grid.nx && (j as usize) < grid.ny {
            let k = grid.index(i as usize, j as usize);
            g.atom_candidate[k] = true;
        }
    }
    Ok(g)
}

/// Points where a margin changes sign between neighbouring grid nodes,
/// refined by bisection along the grid line.
pub fn domain_boundary(
    problem: &BrownProblem,
    grid: &GridSpec,
) -> Result<Vec<(Complex64, Margin)>> {
    grid.validate()?;
    let margins: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let v = problem.omega_membership(grid.node(k % grid.nx, k / grid.nx));
            v.map(|v| (v.margin_inner, v.margin_outer))
                .unwrap_or((f64::NAN, f64::NAN))
        })
        .collect();
    let mut pairs = vec![];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.index(i, j);
            if i + 1 < grid.nx {
                pairs.push((
                    k,
                    grid.index(i + 1, j),
                    grid.node(i, j),
                    grid.node(i + 1, j),
                ));
            }
            if j + 1 < grid.ny {
                pairs.push((
                    k,
                    grid.index(i, j + 1),
                    grid.node(i, j),
                    grid.node(i, j + 1),
                ));
            }
        }
    }
    let found: Vec<Vec<(Complex64, Margin)>> = pairs
        .par_iter()
        .map(|&(ka, kb, a, b)| {
            let mut out = vec![];
            for (which, ma, mb) in [
                (Margin::Inner, margins[ka].0, margins[kb].0),
                (Margin::Outer, margins[ka].1, margins[kb].1),
            ] {
                if ma.is_nan() || mb.is_nan() || ma.signum() == mb.signum() {
                    continue;
                }
                if let Ok(z) = problem.refine_boundary(a, b, which, 1e-9) {
                    out.push((z, which));
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}
