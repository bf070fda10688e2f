//! Subordination on the imaginary axis for `μ₁ ⊞ μ₂` (symmetric measures).
//!
//! For `t > 0` the pair `s₁(t), s₂(t) > t` solves
//! `s₁ = t + f₂(s₂)`, `s₂ = t + f₁(s₁)`, and `h_{μ₁⊞μ₂}(t) = 1/(s₁+s₂−t)`.
//! At `t = 0` the boundary values are classified by comparing the radii
//! `λ₁`, `λ₂` of the two measures.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Transform;
use crate::roots::brent;

/// Residual target for the fixed-point equation, relative to `max(1, s₁)`.
pub const RESIDUAL_TOL: f64 = 1e-12;

const MAX_DOUBLINGS: usize = 60;
const MAX_HALVINGS: usize = 2000;
const MAX_BRENT: usize = 300;

/// Solution of the fixed-point system at one `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubordinationPair {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    /// `s₁ − t`, kept separately because it can be far below `t`'s resolution.
    pub excess1: f64,
    /// `s₂ − t`.
    pub excess2: f64,
    /// `h_{μ₁⊞μ₂}(t)`.
    pub h_conv: f64,
    pub iterations: usize,
    /// `|s₁ − t − f₂(t + f₁(s₁))|` at the returned `s₁`.
    pub residual: f64,
}

impl SubordinationPair {
    /// `p_{μ₁⊞μ₂}(t) = t·f_{μ₁⊞μ₂}(t) = t·((s₁−t) + (s₂−t))`.
    pub fn p_conv(&self) -> f64 {
        self.t * (self.excess1 + self.excess2)
    }

    fn swapped(self) -> Self {
        SubordinationPair {
            s1: self.s2,
            s2: self.s1,
            excess1: self.excess2,
            excess2: self.excess1,
            ..self
        }
    }
}

/// The four possible limits of `(s₁(t), s₂(t))` as `t ↓ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryCase {
    FiniteFinite,
    ZeroInf,
    InfZero,
    ZeroZero,
}

/// Boundary values at `t = 0` with the blow-up rates where one side diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryClassification {
    pub case: BoundaryCase,
    pub s1_0: f64,
    pub s2_0: f64,
    /// `lim t/s₁(t)` (ZERO_INF).
    pub ratio_t_over_s1: Option<f64>,
    /// `lim t·s₂(t)` (ZERO_INF).
    pub limit_t_times_s2: Option<f64>,
    /// `lim t/s₂(t)` (INF_ZERO).
    pub ratio_t_over_s2: Option<f64>,
    /// `lim t·s₁(t)` (INF_ZERO).
    pub limit_t_times_s1: Option<f64>,
    pub iterations: usize,
    /// Balance-equation residual for FINITE_FINITE, 0 otherwise.
    pub residual: f64,
}

fn fingerprint<M: Transform + ?Sized>(m: &M) -> [f64; 3] {
    [m.h(0.37), m.h(1.3), m.h(4.1)]
}

fn canonical_order<A: Transform + ?Sized, B: Transform + ?Sized>(a: &A, b: &B) -> Ordering {
    let fa = fingerprint(a);
    let fb = fingerprint(b);
    for i in 0..3 {
        match fa[i].total_cmp(&fb[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn reject_delta_zero<A: Transform + ?Sized, B: Transform + ?Sized>(a: &A, b: &B) -> Result<()> {
    if a.is_delta_zero() || b.is_delta_zero() {
        return Err(Error::UnsupportedMeasure(
            "the point mass at 0 has no subordination functions".into(),
        ));
    }
    Ok(())
}

/// Solves `s = t + f₂(t + f₁(s))` for `s > t`, working in `x = s − t` on a
/// logarithmic scale.
fn solve_ordered<A: Transform + ?Sized, B: Transform + ?Sized>(
    m1: &A,
    m2: &B,
    t: f64,
) -> Result<SubordinationPair> {
    let g = |x: f64| x - m2.f(t + m1.f(t + x));
    let mut iterations = 0;

    let mut hi = m2.f(t) + 1.0;
    let mut g_hi = g(hi);
    while g_hi <= 0.0 {
        if g_hi == 0.0 {
            return finish(m1, t, hi, 0.0, iterations);
        }
        iterations += 1;
        if iterations > MAX_DOUBLINGS || !g_hi.is_finite() {
            return Err(Error::SolverFailure {
                iterations,
                lo: t,
                hi: t + hi,
            });
        }
        hi *= 2.0;
        g_hi = g(hi);
    }
    let mut lo = 0.5 * hi;
    let mut g_lo = g(lo);
    let mut halvings = 0;
    while g_lo >= 0.0 {
        if g_lo == 0.0 {
            return finish(m1, t, lo, 0.0, iterations);
        }
        halvings += 1;
        if halvings > MAX_HALVINGS || lo < f64::MIN_POSITIVE {
            return Err(Error::SolverFailure {
                iterations: iterations + halvings,
                lo: t,
                hi: t + hi,
            });
        }
        hi = lo;
        g_hi = g_lo;
        lo *= 0.5;
        g_lo = g(lo);
    }
    iterations += halvings;

    let ftol = 1e-15 * t.max(1.0);
    let root = brent(
        |y| g(y.exp()),
        lo.ln(),
        hi.ln(),
        g_lo,
        g_hi,
        1e-15,
        ftol,
        MAX_BRENT,
    )?;
    let x1 = root.x.exp();
    finish(m1, t, x1, root.fx.abs(), iterations + root.iterations)
}

fn finish<A: Transform + ?Sized>(
    m1: &A,
    t: f64,
    x1: f64,
    residual: f64,
    iterations: usize,
) -> Result<SubordinationPair> {
    let s1 = t + x1;
    if residual > RESIDUAL_TOL * s1.max(1.0) {
        return Err(Error::SolverFailure {
            iterations,
            lo: s1,
            hi: s1,
        });
    }
    let x2 = m1.f(s1);
    Ok(SubordinationPair {
        t,
        s1,
        s2: t + x2,
        excess1: x1,
        excess2: x2,
        h_conv: m1.h(s1),
        iterations,
        residual,
    })
}

/// Solves the fixed-point system at `t > 0`.
///
/// The pair is always solved in a canonical order of the two measures, so
/// swapping the arguments swaps `(s₁, s₂)` exactly.
pub fn solve_subordination<A: Transform + ?Sized, B: Transform + ?Sized>(
    mu1: &A,
    mu2: &B,
    t: f64,
) -> Result<SubordinationPair> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "t = {t} must be positive and finite"
        )));
    }
    reject_delta_zero(mu1, mu2)?;
    match canonical_order(mu1, mu2) {
        Ordering::Less => solve_ordered(mu1, mu2, t),
        Ordering::Greater => Ok(solve_ordered(mu2, mu1, t)?.swapped()),
        Ordering::Equal => {
            let a = solve_ordered(mu1, mu2, t)?;
            let b = solve_ordered(mu2, mu1, t)?.swapped();
            let excess1 = 0.5 * (a.excess1 + b.excess1);
            let excess2 = 0.5 * (a.excess2 + b.excess2);
            Ok(SubordinationPair {
                t,
                s1: t + excess1,
                s2: t + excess2,
                excess1,
                excess2,
                h_conv: 0.5 * (a.h_conv + b.h_conv),
                iterations: a.iterations + b.iterations,
                residual: a.residual.max(b.residual),
            })
        }
    }
}

/// `h_{μ₁⊞μ₂}(t)` for `t > 0`.
pub fn free_convolution_h<A: Transform + ?Sized, B: Transform + ?Sized>(
    mu1: &A,
    mu2: &B,
    t: f64,
) -> Result<f64> {
    Ok(solve_subordination(mu1, mu2, t)?.h_conv)
}

/// Root of `p₁(s) = p₂(f₁(s))` on `(0, ∞)`, by log-scale bracketing.
fn balance_ordered<A: Transform + ?Sized, B: Transform + ?Sized>(
    m1: &A,
    m2: &B,
) -> Result<(f64, f64, usize, f64)> {
    let b = |s: f64| m1.p(s) - m2.p(m1.f(s));
    let mut iterations = 0;
    let mut lo = 1.0;
    let mut b_lo = b(lo);
    while !(b_lo < 0.0) {
        if b_lo == 0.0 {
            return Ok((lo, m1.f(lo), iterations, 0.0));
        }
        iterations += 1;
        lo *= 0.25;
        if lo < 1e-150 || iterations > 1000 {
            return Err(Error::NoBalanceRoot);
        }
        b_lo = b(lo);
    }
    let mut hi = lo.max(1.0);
    let mut b_hi = if hi == lo { b_lo } else { b(hi) };
    while !(b_hi > 0.0) {
        if b_hi == 0.0 {
            return Ok((hi, m1.f(hi), iterations, 0.0));
        }
        iterations += 1;
        lo = hi;
        b_lo = b_hi;
        hi *= 4.0;
        if hi > 1e150 || iterations > 1000 {
            return Err(Error::NoBalanceRoot);
        }
        b_hi = b(hi);
    }
    let ftol = 1e-16;
    let root = brent(
        |y| b(y.exp()),
        lo.ln(),
        hi.ln(),
        b_lo,
        b_hi,
        1e-15,
        ftol,
        MAX_BRENT,
    )?;
    let s = root.x.exp();
    Ok((s, m1.f(s), iterations + root.iterations, root.fx.abs()))
}

fn finite_finite<A: Transform + ?Sized, B: Transform + ?Sized>(
    m1: &A,
    m2: &B,
) -> Result<BoundaryClassification> {
    let (s1_0, s2_0, iterations, residual) = match canonical_order(m1, m2) {
        Ordering::Less => balance_ordered(m1, m2)?,
        Ordering::Greater => {
            let (a, b, it, r) = balance_ordered(m2, m1)?;
            (b, a, it, r)
        }
        Ordering::Equal => {
            let (a1, a2, ia, ra) = balance_ordered(m1, m2)?;
            let (b2, b1, ib, rb) = balance_ordered(m2, m1)?;
            (0.5 * (a1 + b1), 0.5 * (a2 + b2), ia + ib, ra.max(rb))
        }
    };
    Ok(BoundaryClassification {
        case: BoundaryCase::FiniteFinite,
        s1_0,
        s2_0,
        ratio_t_over_s1: None,
        limit_t_times_s2: None,
        ratio_t_over_s2: None,
        limit_t_times_s1: None,
        iterations,
        residual,
    })
}

/// Classifies and computes `(s₁(0), s₂(0))`.
///
/// * `λ₁(μ₁) ≥ λ₂(μ₂)`: `s₁ → 0`, `s₂ → ∞` with `t/s₁ → (λ₁(μ₁)²−λ₂(μ₂)²)/λ₁(μ₁)²`
///   and `t·s₂ → λ₁(μ₁)²−λ₂(μ₂)²`; mirrored when `λ₁(μ₂) ≥ λ₂(μ₁)`.
/// * overlapping ranges with a positive `λ₁`: both finite, from the balance
///   equation `p₁(s) = p₂(f₁(s))`.
/// * both `λ₁ = 0`: both zero when the atoms at 0 carry total mass ≥ 1,
///   otherwise the balance equation is tried.
pub fn classify_boundary<A: Transform + ?Sized, B: Transform + ?Sized>(
    mu1: &A,
    mu2: &B,
) -> Result<BoundaryClassification> {
    reject_delta_zero(mu1, mu2)?;
    let b1 = mu1.lambda_bounds();
    let b2 = mu2.lambda_bounds();
    let empty = BoundaryClassification {
        case: BoundaryCase::ZeroZero,
        s1_0: 0.0,
        s2_0: 0.0,
        ratio_t_over_s1: None,
        limit_t_times_s2: None,
        ratio_t_over_s2: None,
        limit_t_times_s1: None,
        iterations: 0,
        residual: 0.0,
    };
    if b1.lambda1 > 0.0 && b1.lambda1 >= b2.lambda2 {
        let l1 = b1.lambda1 * b1.lambda1;
        let gap = l1 - b2.lambda2 * b2.lambda2;
        return Ok(BoundaryClassification {
            case: BoundaryCase::ZeroInf,
            s2_0: f64::INFINITY,
            ratio_t_over_s1: Some(gap / l1),
            limit_t_times_s2: Some(gap),
            ..empty
        });
    }
    if b2.lambda1 > 0.0 && b2.lambda1 >= b1.lambda2 {
        let l1 = b2.lambda1 * b2.lambda1;
        let gap = l1 - b1.lambda2 * b1.lambda2;
        return Ok(BoundaryClassification {
            case: BoundaryCase::InfZero,
            s1_0: f64::INFINITY,
            ratio_t_over_s2: Some(gap / l1),
            limit_t_times_s1: Some(gap),
            ..empty
        });
    }
    if b1.lambda1 > 0.0 || b2.lambda1 > 0.0 {
        return finite_finite(mu1, mu2);
    }
    if mu1.atom_at_zero() + mu2.atom_at_zero() >= 1.0 - 1e-12 {
        return Ok(empty);
    }
    finite_finite(mu1, mu2)
}
