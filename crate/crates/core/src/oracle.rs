//! Reference propagators.
//!
//! [`integrate_schrodinger`] solves `i U̇ = H(t) U` with an embedded
//! Dormand–Prince 5(4) pair and never re-unitarizes, so the reported defects
//! are genuine. The Dyson and low-order Magnus truncations are assembled from
//! exact scalar time integrals of the exponentials in a [`TrigPoly`].

use crate::error::{Error, Result};
use crate::linalg::{c, re, unitarity_defect, Operator, C64};
use crate::trigpoly::{exp_integral, TrigPoly};

/// A Hamiltonian that can be sampled at any time.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> Operator;
}

impl Hamiltonian for Operator {
    fn dim(&self) -> usize {
        Operator::dim(self)
    }

    fn at(&self, _t: f64) -> Operator {
        self.clone()
    }
}

impl Hamiltonian for TrigPoly {
    fn dim(&self) -> usize {
        TrigPoly::dim(self)
    }

    fn at(&self, t: f64) -> Operator {
        self.evaluate(t)
    }
}

/// Adapter for closures `t -> H(t)`.
pub struct FnHamiltonian<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64) -> Operator + Sync> Hamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> Operator {
        (self.f)(t)
    }
}

/// Propagator samples from the reference integrator.
#[derive(Debug, Clone)]
pub struct PropagatorTrace {
    pub times: Vec<f64>,
    pub u_values: Vec<Operator>,
    pub tolerance: f64,
    pub unitarity_defects: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
}

impl PropagatorTrace {
    pub fn last(&self) -> &Operator {
        self.u_values.last().expect("trace always holds t = 0")
    }
}

pub const MIN_REL_TOL: f64 = 1e-13;
pub const MAX_REL_TOL: f64 = 1e-6;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn rhs(h: &dyn Hamiltonian, t: f64, u: &Operator) -> Operator {
    (&h.at(t) * u).scale(c(0.0, -1.0))
}

fn lincomb(base: &Operator, step: f64, parts: &[(f64, &Operator)]) -> Operator {
    let mut out = base.clone();
    for (w, k) in parts {
        if *w != 0.0 {
            out.axpy(re(step * w), k);
        }
    }
    out
}

/// `U(t_end)` from `U(0) = I`.
pub fn integrate_schrodinger(h: &dyn Hamiltonian, t_end: f64, rel_tol: f64) -> Result<PropagatorTrace> {
    integrate_at(h, &[t_end], rel_tol)
}

/// Propagator at each of the (non-decreasing, non-negative) `times`.
pub fn integrate_at(h: &dyn Hamiltonian, times: &[f64], rel_tol: f64) -> Result<PropagatorTrace> {
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol {rel_tol} outside [{MIN_REL_TOL}, {MAX_REL_TOL}]"
        )));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be finite, non-negative and sorted".into()));
    }
    let dim = h.dim();
    let atol = rel_tol;
    let mut u = Operator::identity(dim);
    let mut t = 0.0;
    let mut trace = PropagatorTrace {
        times: vec![0.0],
        u_values: vec![u.clone()],
        tolerance: rel_tol,
        unitarity_defects: vec![0.0],
        steps: 0,
        rejected: 0,
    };

    let scale_h = h.at(0.0).norm().max(1e-12);
    let mut step = (0.01 / scale_h).min(times.last().copied().unwrap_or(0.0).max(1e-12));
    let mut k1 = rhs(h, t, &u);
    for &target in times {
        while t < target {
            let last = target - t <= step * (1.0 + 1e-12);
            let hstep = if last { target - t } else { step };
            if hstep <= f64::EPSILON * t.abs().max(1.0) {
                if last {
                    t = target;
                    break;
                }
                return Err(Error::StepUnderflow { t });
            }
            let k2 = rhs(h, t + C2 * hstep, &lincomb(&u, hstep, &[(A21, &k1)]));
            let k3 = rhs(h, t + C3 * hstep, &lincomb(&u, hstep, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(h, t + C4 * hstep, &lincomb(&u, hstep, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                h,
                t + C5 * hstep,
                &lincomb(&u, hstep, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                h,
                t + hstep,
                &lincomb(&u, hstep, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let u_new = lincomb(&u, hstep, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = rhs(h, t + hstep, &u_new);
            let err_op = lincomb(
                &Operator::zeros(dim),
                hstep,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );

            let mut acc = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let sc = atol + rel_tol * u.get(i, j).norm().max(u_new.get(i, j).norm());
                    acc += (err_op.get(i, j).norm() / sc).powi(2);
                }
            }
            let err = (acc / (dim * dim) as f64).sqrt();

            if err <= 1.0 {
                t = if last { target } else { t + hstep };
                u = u_new;
                k1 = k7;
                trace.steps += 1;
            } else {
                trace.rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                step = hstep * factor;
            }
        }
        trace.times.push(target);
        trace.unitarity_defects.push(unitarity_defect(&u));
        trace.u_values.push(u.clone());
    }
    Ok(trace)
}

/// `∫₀ᵗ dt₁ ∫₀^{t₁} dt₂ e^{iω₁t₁} e^{iω₂t₂}`
pub fn double_exp_integral(w1: f64, w2: f64, t: f64) -> C64 {
    if w2 == 0.0 {
        // ∫₀ᵗ s e^{iω₁s} ds
        if w1 == 0.0 {
            return re(0.5 * t * t);
        }
        let iw = c(0.0, w1);
        return (C64::from_polar(t, w1 * t) - exp_integral(w1, t)) / iw;
    }
    (exp_integral(w1 + w2, t) - exp_integral(w1, t)) / c(0.0, w2)
}

/// `∫₀ᵗ F`
pub fn time_integral(f: &TrigPoly, t: f64) -> Operator {
    let mut out = Operator::zeros(f.dim());
    for (k, a) in f.terms() {
        out.axpy(exp_integral(f.basis().value(k), t), a);
    }
    out
}

/// `∫₀ᵗ dt₁ ∫₀^{t₁} dt₂ F(t₁) G(t₂)`
pub fn ordered_double_integral(f: &TrigPoly, g: &TrigPoly, t: f64) -> Result<Operator> {
    f.basis().check_same(g.basis())?;
    let mut out = Operator::zeros(f.dim());
    for (k1, a) in f.terms() {
        for (k2, b) in g.terms() {
            let w = double_exp_integral(f.basis().value(k1), g.basis().value(k2), t);
            out.axpy(w, &(a * b));
        }
    }
    Ok(out)
}

/// Interaction-picture Dyson series truncated at order 1 or 2.
///
/// `h_chain` holds `H̃₁, H̃₂, …`; orders beyond the chain are zero.
pub fn dyson_truncation(h_chain: &[TrigPoly], lambda: f64, order: usize, t: f64) -> Result<Operator> {
    if order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if order > 2 {
        return Err(Error::OrderTooHigh { order, max: 2 });
    }
    let first = h_chain.first().ok_or(Error::ChainLength { needed: 1, got: 0 })?;
    let dim = first.dim();
    let mi = c(0.0, -1.0);
    let mut u = Operator::identity(dim);
    u.axpy(mi * lambda, &time_integral(first, t));
    if order == 2 {
        if let Some(h2) = h_chain.get(1) {
            u.axpy(mi * lambda * lambda, &time_integral(h2, t));
        }
        u.axpy(re(-lambda * lambda), &ordered_double_integral(first, first, t)?);
    }
    Ok(u)
}

/// First two Magnus exponents `(Ω₁, Ω₂)` of `H̃` (per unit `λ` and `λ²`), with
/// `U ≈ exp(λΩ₁ + λ²Ω₂)`.
pub fn magnus_analytic_low(h: &TrigPoly, t: f64) -> Result<(Operator, Operator)> {
    let omega1 = time_integral(h, t).scale(c(0.0, -1.0));
    let mut omega2 = Operator::zeros(h.dim());
    for (k1, a) in h.terms() {
        for (k2, b) in h.terms() {
            let w = double_exp_integral(h.basis().value(k1), h.basis().value(k2), t);
            omega2.axpy(w * -0.5, &a.commutator(b)?);
        }
    }
    Ok((omega1, omega2))
}

/// Least-squares slope and coefficient of determination of `log(error)` against `log(λ)`.
pub fn error_scaling_fit(lambdas: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if lambdas.len() != errors.len() {
        return Err(Error::DimensionMismatch { left: lambdas.len(), right: errors.len() });
    }
    if lambdas.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 grid points, got {}", lambdas.len())));
    }
    if let Some((index, &value)) = errors.iter().enumerate().find(|(_, e)| **e <= 0.0 || !e.is_finite()) {
        return Err(Error::NonPositiveError { index, value });
    }
    if let Some(l) = lambdas.iter().find(|l| l.is_nan() || **l <= 0.0) {
        return Err(Error::InvalidParameter(format!("grid value {l} must be positive")));
    }
    let x: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("grid values must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2))
}
