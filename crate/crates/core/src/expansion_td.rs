//! Time-dependent perturbations in the interaction picture.
//!
//! For `H̃(λ; t) = Σ λⁿ H̃ₙ(t)` with trigonometric coefficients the propagator
//! is written as `T = e^{-iZ(λ;t)} e^{-i∫₀ᵗC} e^{iZ(λ;0)}`. The operator
//! `𝔠 = e^{iZ} H̃ e^{-iZ} + i (∂ₜe^{iZ}) e^{-iZ}` generates the middle factor;
//! order by order `Żₙ = Ğₙ - 𝔠ₙ`, where `Ğₙ` depends on lower orders only.
//!
//! Supported choices:
//! - [`Mode::MeanConstants`]: constant `Cₙ = <Ğₙ>` and zero-mean `Zₙ`.
//! - [`Mode::Gauged`] / [`Mode::FloquetMagnus`]: same constants, `Zₙ(0)` prescribed
//!   (zero for Floquet–Magnus).
//! - [`Mode::General`]: user-supplied trigonometric `Cₙ(t)`.
//! - [`Mode::Magnus`]: `Z ≡ 0`, so `𝔠 = H̃` and `∫C` is the Magnus exponent.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_exponential, re, Operator, C64};
use crate::nested::{composition_sums, i_pow_over_factorial};
use crate::secular::SecularPoly;
use crate::trigpoly::{FrequencyBasis, TrigPoly, ZERO_MEAN_TOL};

/// Highest order accepted by the trigonometric solvers.
pub const MAX_TD_ORDER: usize = 4;

/// Highest order accepted in Magnus mode (bounded by the secular degree cap).
pub const MAX_MAGNUS_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    MeanConstants,
    Gauged,
    FloquetMagnus,
    General,
    Magnus,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::MeanConstants => "mean-constants",
            Mode::Gauged => "gauged",
            Mode::FloquetMagnus => "floquet-magnus",
            Mode::General => "general",
            Mode::Magnus => "magnus",
        }
    }
}

/// How the constants `Cₙ` are chosen in [`solve_td_gauged`].
#[derive(Debug, Clone)]
pub enum ConstantChoice {
    Mean,
    /// Explicit `C₁..C_N`; each must be compatible with the mean of `Ğₙ`.
    Explicit(Vec<TrigPoly>),
}

/// Per-order generators of a time-dependent expansion.
#[derive(Debug, Clone)]
pub struct TDSolution {
    pub order: usize,
    pub mode: Mode,
    pub basis: FrequencyBasis,
    pub dim: usize,
    /// `Cₙ(t)`
    pub c_list: Vec<SecularPoly>,
    /// `∫₀ᵗ Cₙ`
    pub c_integrals: Vec<SecularPoly>,
    /// `Zₙ(t)`; empty in Magnus mode.
    pub z_list: Vec<TrigPoly>,
    /// `Zₙ(0)`
    pub z0_list: Vec<Operator>,
    /// `𝔠ₙ(t)`
    pub frak_list: Vec<SecularPoly>,
}

fn check_chain(h_chain: &[TrigPoly], order: usize, max: usize) -> Result<(FrequencyBasis, usize)> {
    if order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if order > max {
        return Err(Error::OrderTooHigh { order, max });
    }
    let first = h_chain.first().ok_or(Error::ChainLength { needed: 1, got: 0 })?;
    for h in h_chain {
        first.basis().check_same(h.basis())?;
        if h.dim() != first.dim() {
            return Err(Error::DimensionMismatch { left: first.dim(), right: h.dim() });
        }
        if !h.is_hermitian_valued() {
            return Err(Error::NotHermitian { defect: h.hermiticity_defect() });
        }
    }
    Ok((first.basis().clone(), first.dim()))
}

fn padded(h_chain: &[TrigPoly], order: usize, basis: &FrequencyBasis, dim: usize) -> Vec<TrigPoly> {
    let mut out: Vec<TrigPoly> = h_chain.iter().take(order).cloned().collect();
    out.resize(order, TrigPoly::zero(basis.clone(), dim));
    out
}

/// `𝒢̆ₖ(X, Y; Z₁..Zₖ) = Σ_{p≥1} (i^p/p!) Σ_{k₁+…+k_p=k} ad_{Z_{k₁}} ⋯ ad_{Z_{k_p}} (X - Y/(p+1))`.
pub fn g_breve_script(x: &TrigPoly, y: &TrigPoly, z_chain: &[TrigPoly], k: usize) -> Result<TrigPoly> {
    if k == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let sx = composition_sums(x, z_chain, k, 1)?;
    let sy = composition_sums(y, z_chain, k, 1)?;
    let mut out = TrigPoly::zero(x.basis().clone(), x.dim());
    for p in 1..=k {
        let w = i_pow_over_factorial(p);
        if let Some(a) = &sx[p] {
            out = TrigPoly::combine(re(1.0), &out, w, a)?;
        }
        if let Some(b) = &sy[p] {
            out = TrigPoly::combine(re(1.0), &out, -w / (p as f64 + 1.0), b)?;
        }
    }
    Ok(out)
}

/// `Ğₙ = Σ_{m=1}^{n-1} 𝒢̆_{n-m}(H̃ₘ, Żₘ; Z₁..) + H̃ₙ`.
///
/// `h_chain` holds `H̃₁..H̃ₙ` and `z_chain` holds `Z₁..Z_{n-1}`.
pub fn g_breve(h_chain: &[TrigPoly], z_chain: &[TrigPoly], n: usize) -> Result<TrigPoly> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if h_chain.len() < n {
        return Err(Error::ChainLength { needed: n, got: h_chain.len() });
    }
    if z_chain.len() < n - 1 {
        return Err(Error::ChainLength { needed: n - 1, got: z_chain.len() });
    }
    let mut out = h_chain[n - 1].clone();
    for m in 1..n {
        let zdot = z_chain[m - 1].derivative();
        let term = g_breve_script(&h_chain[m - 1], &zdot, &z_chain[..n - m], n - m)?;
        out = out.add(&term)?;
    }
    Ok(out)
}

/// `Σ_{m<n} Σ_p ((-i)^p/(p+1)!) Σ_{compositions of n-m} ad_{∫C} ⋯ ad_{∫C} Cₘ`, so that `𝔠ₙ = Cₙ + correction`.
fn frak_correction(c_chain: &[SecularPoly], int_chain: &[SecularPoly], n: usize) -> Result<SecularPoly> {
    let mut out = SecularPoly::zero(c_chain[0].basis().clone(), c_chain[0].dim());
    for m in 1..n {
        let sums = composition_sums(&c_chain[m - 1], &int_chain[..n - m], n - m, 1)?;
        let mut w = re(1.0);
        for (p, s) in sums.iter().enumerate().skip(1) {
            w *= C64::new(0.0, -1.0) / (p as f64 + 1.0);
            if let Some(s) = s {
                out = SecularPoly::combine(re(1.0), &out, w, s)?;
            }
        }
    }
    Ok(out)
}

/// `𝔠₁..𝔠ₙ` from `C₁..Cₙ`, using `𝔠 = Σ_k ((-i)^k/(k+1)!) ad_{∫C}^k C`.
pub fn c_to_frak(c_chain: &[SecularPoly]) -> Result<Vec<SecularPoly>> {
    if c_chain.is_empty() {
        return Err(Error::ChainLength { needed: 1, got: 0 });
    }
    let ints = c_chain.iter().map(SecularPoly::primitive).collect::<Result<Vec<_>>>()?;
    (1..=c_chain.len())
        .map(|n| c_chain[n - 1].add(&frak_correction(c_chain, &ints, n)?))
        .collect()
}

/// `C₁..Cₙ` from `𝔠₁..𝔠ₙ`; inverse of [`c_to_frak`].
pub fn frak_to_c(frak_chain: &[SecularPoly]) -> Result<Vec<SecularPoly>> {
    if frak_chain.is_empty() {
        return Err(Error::ChainLength { needed: 1, got: 0 });
    }
    let mut c_chain: Vec<SecularPoly> = Vec::with_capacity(frak_chain.len());
    let mut ints: Vec<SecularPoly> = Vec::with_capacity(frak_chain.len());
    for n in 1..=frak_chain.len() {
        let cn = if n == 1 {
            frak_chain[0].clone()
        } else {
            frak_chain[n - 1].sub(&frak_correction(&c_chain, &ints, n)?)?
        };
        ints.push(cn.primitive()?);
        c_chain.push(cn);
    }
    Ok(c_chain)
}

fn constant_poly(basis: &FrequencyBasis, a: Operator) -> SecularPoly {
    SecularPoly::from(&TrigPoly::constant(basis.clone(), a))
}

/// Builds `Cₙ = <Ğₙ>` and `Zₙ = esp(Ğₙ) + offset(n, esp)` order by order.
fn solve_constant_class(
    h_chain: &[TrigPoly],
    order: usize,
    mode: Mode,
    offset: impl Fn(usize, &TrigPoly) -> Result<Operator>,
) -> Result<TDSolution> {
    let (basis, dim) = check_chain(h_chain, order, MAX_TD_ORDER)?;
    let h = padded(h_chain, order, &basis, dim);
    let mut z_list: Vec<TrigPoly> = Vec::with_capacity(order);
    let mut c_ops = Vec::with_capacity(order);
    for n in 1..=order {
        let g = g_breve(&h, &z_list, n)?;
        let (mean, esp) = g.mean_and_essential_primitive();
        let z0 = offset(n, &esp)?;
        let z = esp.add_constant(&z0)?.hermitian_part();
        c_ops.push(mean.hermitian_part());
        z_list.push(z);
    }
    let c_list: Vec<SecularPoly> = c_ops.iter().map(|a| constant_poly(&basis, a.clone())).collect();
    let c_integrals = c_list.iter().map(SecularPoly::primitive).collect::<Result<Vec<_>>>()?;
    let z0_list = z_list.iter().map(|z| z.evaluate(0.0)).collect();
    // Constant generators commute with their own integrals order by order, so 𝔠 = C.
    let frak_list = c_list.clone();
    Ok(TDSolution { order, mode, basis, dim, c_list, c_integrals, z_list, z0_list, frak_list })
}

/// Constants `Cₙ = <Ğₙ>` with zero-mean `Zₙ(t) = esp(Ğₙ)(t) - <esp(Ğₙ)>`.
pub fn solve_td_mean(h_chain: &[TrigPoly], order: usize) -> Result<TDSolution> {
    solve_constant_class(h_chain, order, Mode::MeanConstants, |_, esp| Ok(esp.mean().scale_real(-1.0)))
}

/// `Zₙ(t) = esp(Ğₙ)(t) + gaugeₙ`; an all-zero gauge is the Floquet–Magnus choice.
pub fn solve_td_gauged(
    h_chain: &[TrigPoly],
    order: usize,
    gauge: &[Operator],
    choice: &ConstantChoice,
) -> Result<TDSolution> {
    let (basis, dim) = check_chain(h_chain, order, MAX_TD_ORDER)?;
    let mut gauges = Vec::with_capacity(order);
    for n in 0..order {
        let g = gauge.get(n).cloned().unwrap_or_else(|| Operator::zeros(dim));
        if g.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: g.dim() });
        }
        g.ensure_hermitian()?;
        gauges.push(g);
    }
    let floquet = gauges.iter().all(|g| g.norm() == 0.0);

    match choice {
        ConstantChoice::Mean => {
            let mode = if floquet { Mode::FloquetMagnus } else { Mode::Gauged };
            solve_constant_class(h_chain, order, mode, |n, _| Ok(gauges[n - 1].clone()))
        }
        ConstantChoice::Explicit(c_given) => {
            if c_given.len() < order {
                return Err(Error::ChainLength { needed: order, got: c_given.len() });
            }
            let h = padded(h_chain, order, &basis, dim);
            let c_list: Vec<SecularPoly> = c_given[..order].iter().map(SecularPoly::from).collect();
            for c in &c_given[..order] {
                basis.check_same(c.basis())?;
            }
            let frak_list = c_to_frak(&c_list)?;
            let mut z_list: Vec<TrigPoly> = Vec::with_capacity(order);
            for n in 1..=order {
                let g = g_breve(&h, &z_list, n)?;
                let frak = frak_list[n - 1].to_trig().ok_or_else(|| {
                    Error::Unsupported(format!("generator at order {n} grows secularly for the given constants"))
                })?;
                let zdot = g.sub(&frak)?;
                let mismatch = zdot.mean().norm();
                if mismatch > ZERO_MEAN_TOL * zdot.largest_coefficient().max(1.0) {
                    return Err(Error::ConstantMismatch { order: n, mismatch });
                }
                let z = zdot.essential_primitive().add_constant(&gauges[n - 1])?.hermitian_part();
                z_list.push(z);
            }
            let c_integrals = c_list.iter().map(SecularPoly::primitive).collect::<Result<Vec<_>>>()?;
            let z0_list = z_list.iter().map(|z| z.evaluate(0.0)).collect();
            Ok(TDSolution {
                order,
                mode: Mode::General,
                basis,
                dim,
                c_list,
                c_integrals,
                z_list,
                z0_list,
                frak_list,
            })
        }
    }
}

/// `Z ≡ 0`: then `𝔠ₙ = H̃ₙ` and `-i Σ λⁿ ∫₀ᵗCₙ` is the order-`N` Magnus exponent.
pub fn magnus_mode(h_chain: &[TrigPoly], order: usize) -> Result<TDSolution> {
    let (basis, dim) = check_chain(h_chain, order, MAX_MAGNUS_ORDER)?;
    let h = padded(h_chain, order, &basis, dim);
    let frak_list: Vec<SecularPoly> = h.iter().map(SecularPoly::from).collect();
    let c_list = frak_to_c(&frak_list)?;
    let c_integrals = c_list.iter().map(SecularPoly::primitive).collect::<Result<Vec<_>>>()?;
    Ok(TDSolution {
        order,
        mode: Mode::Magnus,
        basis,
        dim,
        c_list,
        c_integrals,
        z_list: Vec::new(),
        z0_list: vec![Operator::zeros(dim); order],
        frak_list,
    })
}

fn power_sum(ops: impl Iterator<Item = Operator>, lambda: f64, dim: usize) -> Operator {
    let mut out = Operator::zeros(dim);
    let mut lp = 1.0;
    for x in ops {
        lp *= lambda;
        out.axpy(re(lp), &x);
    }
    out
}

impl TDSolution {
    /// `Z_[N](λ; t)`
    pub fn z_at(&self, lambda: f64, t: f64) -> Operator {
        power_sum(self.z_list.iter().map(|z| z.evaluate(t)), lambda, self.dim)
    }

    /// `Z_[N](λ; 0)`
    pub fn z0(&self, lambda: f64) -> Operator {
        power_sum(self.z0_list.iter().cloned(), lambda, self.dim)
    }

    /// `C_[N](λ; t)`
    pub fn c_at(&self, lambda: f64, t: f64) -> Operator {
        power_sum(self.c_list.iter().map(|c| c.evaluate(t)), lambda, self.dim)
    }

    /// `∫₀ᵗ C_[N](λ; s) ds`
    pub fn c_integral_at(&self, lambda: f64, t: f64) -> Operator {
        power_sum(self.c_integrals.iter().map(|c| c.evaluate(t)), lambda, self.dim)
    }

    /// Constants `Cₙ` when the solution is in the constant class.
    pub fn constants(&self) -> Option<Vec<Operator>> {
        self.c_list
            .iter()
            .map(|c| c.to_trig().filter(|p| p.terms().all(|(k, _)| k.is_zero())).map(|p| p.mean()))
            .collect()
    }

    /// Pointwise `|Żₙ + 𝔠ₙ - Ğₙ|_F` maximised over `times`, per order.
    pub fn recursion_residuals(&self, h_chain: &[TrigPoly], times: &[f64]) -> Result<Vec<f64>> {
        if self.mode == Mode::Magnus {
            return Ok(vec![0.0; self.order]);
        }
        let h = padded(h_chain, self.order, &self.basis, self.dim);
        (1..=self.order)
            .map(|n| {
                let g = g_breve(&h, &self.z_list, n)?;
                let zdot = self.z_list[n - 1].derivative();
                Ok(times
                    .iter()
                    .map(|&t| {
                        let lhs = &zdot.evaluate(t) + &self.frak_list[n - 1].evaluate(t);
                        lhs.distance(&g.evaluate(t))
                    })
                    .fold(0.0, f64::max))
            })
            .collect()
    }
}

/// `e^{-iZ_[N](λ;t)} e^{-i∫₀ᵗC_[N]} e^{iZ_[N](λ;0)}`: the interaction-picture factor.
pub fn interaction_factor(sol: &TDSolution, lambda: f64, t: f64) -> Result<Operator> {
    let middle = hermitian_exponential(&sol.c_integral_at(lambda, t).hermitian_part(), 1.0)?;
    if sol.z_list.is_empty() {
        return Ok(middle);
    }
    let left = hermitian_exponential(&sol.z_at(lambda, t), 1.0)?;
    let right = hermitian_exponential(&sol.z0(lambda), -1.0)?;
    Ok(&(&left * &middle) * &right)
}

/// `U₀(t) e^{-iZ_[N](λ;t)} e^{-i∫₀ᵗC_[N]} e^{iZ_[N](λ;0)}`
pub fn evolution_td(sol: &TDSolution, lambda: f64, t: f64, u0_of_t: &Operator) -> Result<Operator> {
    if u0_of_t.dim() != sol.dim {
        return Err(Error::DimensionMismatch { left: sol.dim, right: u0_of_t.dim() });
    }
    Ok(u0_of_t * &interaction_factor(sol, lambda, t)?)
}

/// Order-`N` residual of `𝔠 = e^{iZ}H̃e^{-iZ} + i(∂ₜe^{iZ})e^{-iZ}`.
///
/// The right-hand side is expanded in nested commutators evaluated
/// pointwise from `Zₙ(t)`, `Żₙ(t)` and `H̃ₙ(t)`, keeping powers up to `λ^N`.
/// Returns the largest `|Σ λⁿ (𝔠ₙ - rhsₙ)|_F / max(1, |𝔠_[N]|_F)` over `times`.
pub fn verify_effective_hamiltonian(sol: &TDSolution, lambda: f64, h_chain: &[TrigPoly], times: &[f64]) -> Result<f64> {
    let h = padded(h_chain, sol.order, &sol.basis, sol.dim);
    let zdots: Vec<TrigPoly> = sol.z_list.iter().map(TrigPoly::derivative).collect();
    let mut worst: f64 = 0.0;
    for &t in times {
        let hz: Vec<Operator> = h.iter().map(|x| x.evaluate(t)).collect();
        let z: Vec<Operator> = sol.z_list.iter().map(|x| x.evaluate(t)).collect();
        let zd: Vec<Operator> = zdots.iter().map(|x| x.evaluate(t)).collect();
        let mut diff = Operator::zeros(sol.dim);
        let mut total = Operator::zeros(sol.dim);
        let mut lp = 1.0;
        for n in 1..=sol.order {
            lp *= lambda;
            let frak = sol.frak_list[n - 1].evaluate(t);
            let mut rhs = hz[n - 1].clone();
            if !z.is_empty() {
                rhs -= &zd[n - 1];
                for m in 1..n {
                    let sh = composition_sums(&hz[m - 1], &z, n - m, 1)?;
                    let sd = composition_sums(&zd[m - 1], &z, n - m, 1)?;
                    for p in 1..=(n - m) {
                        let w = i_pow_over_factorial(p);
                        if let Some(a) = &sh[p] {
                            rhs.axpy(w, a);
                        }
                        if let Some(b) = &sd[p] {
                            rhs.axpy(-w / (p as f64 + 1.0), b);
                        }
                    }
                }
            }
            diff.axpy(re(lp), &(&frak - &rhs));
            total.axpy(re(lp), &frak);
        }
        worst = worst.max(diff.norm() / total.norm().max(1.0));
    }
    Ok(worst)
}
