//! Analytic results for the symmetric double-XPM scheme in dimensionless
//! form (`τ = γt`, `Γ = χ/γ`). All angles are radians.
//!
//! Everything reduces to the decoherence exponent
//!
//! ```text
//! g(Γ, τ) = ∫₀^τ e^{-s}(1 - cos Γs) ds
//!         = Γ²/(1+Γ²) - e^{-τ} + e^{-τ}cos(Γτ)/(1+Γ²) - Γe^{-τ}sin(Γτ)/(1+Γ²)
//! ```
//!
//! with `C = exp(-2|α|²g)`, `|β|² = 2e^{-τ}sin²(Γτ/2)|α|²` and
//! `G = -e^τ g / sin²(Γτ/2)`, so that `ln C = |β|²G` exactly. The expanded
//! form above loses every significant digit for small `τ` (the O(1) terms
//! cancel down to `Γ²τ³/6`), so `g` is evaluated from its Taylor series
//! when `|1 - iΓ|τ` is small and from a cancellation-reduced rearrangement
//! otherwise.

use crate::error::{non_negative, positive, Error, Result};
use crate::scalar::{cis, Complex, Real};

/// Argument below which the Taylor series of `g` is used.
const SERIES_RADIUS: f64 = 0.5;

/// The decoherence exponent `g(Γ, τ) ≥ 0`.
pub fn decay_exponent<T: Real>(big_gamma: T, tau: T) -> T {
    if tau == T::zero() {
        return T::zero();
    }
    let gg = big_gamma * big_gamma;
    if (T::one() + gg).sqrt() * tau < T::lit(SERIES_RADIUS) {
        decay_exponent_series(big_gamma, tau)
    } else {
        let half = (big_gamma * tau * T::lit(0.5)).sin();
        let e = (-tau).exp();
        let two = T::lit(2.0);
        (gg * -(-tau).exp_m1() - e * (two * half * half + big_gamma * (big_gamma * tau).sin()))
            / (T::one() + gg)
    }
}

/// `g = Re Σ_{n≥2} (-1)^n τ^{n+1}/(n+1)! · (1 - z^n)`, `z = 1 - iΓ`.
fn decay_exponent_series<T: Real>(big_gamma: T, tau: T) -> T {
    // d = z^n - 1, advanced by d <- z·d - iΓ
    let (mut d_re, mut d_im) = (T::zero(), T::zero());
    let mut coef = tau;
    let mut sum = T::zero();
    let mut sign = T::one();
    for n in 1..200usize {
        let re = d_re + big_gamma * d_im;
        let im = d_im - big_gamma * d_re - big_gamma;
        d_re = re;
        d_im = im;
        coef = coef * tau / T::from_count(n + 1);
        sign = -sign;
        let term = sign * coef * -d_re;
        sum = sum + term;
        if n >= 2 && term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn check(alpha_sq: impl Real, big_gamma: impl Real, tau: impl Real) -> Result<()> {
    non_negative("alpha_sq", alpha_sq)?;
    non_negative("big_gamma", big_gamma)?;
    non_negative("tau", tau)
}

/// `ln C = -2|α|²·g(Γ, τ)`; finite even where `C` underflows.
pub fn log_coherence_c<T: Real>(alpha_sq: T, big_gamma: T, tau: T) -> Result<T> {
    check(alpha_sq, big_gamma, tau)?;
    Ok(-T::lit(2.0) * alpha_sq * decay_exponent(big_gamma, tau))
}

/// Coherence parameter `C(τ) ∈ (0, 1]`.
pub fn coherence_c<T: Real>(alpha_sq: T, big_gamma: T, tau: T) -> Result<T> {
    log_coherence_c(alpha_sq, big_gamma, tau).map(T::exp)
}

/// Cat size `|β|² = 2e^{-τ}sin²(Γτ/2)|α|²`.
pub fn cat_size<T: Real>(alpha_sq: T, big_gamma: T, tau: T) -> Result<T> {
    check(alpha_sq, big_gamma, tau)?;
    let s = (big_gamma * tau * T::lit(0.5)).sin();
    Ok(T::lit(2.0) * (-tau).exp() * s * s * alpha_sq)
}

/// Below this `τ` the series for `G` replaces the direct quotient.
pub fn tau_switch<T: Real>(big_gamma: T) -> T {
    T::lit(1e-4) / big_gamma.max(T::one())
}

/// `G(τ) = -(2/3)τ[1 + τ/4 + (3 + 2Γ²)τ²/60] + O(τ⁴)`.
pub fn big_g_series<T: Real>(big_gamma: T, tau: T) -> T {
    let q = (T::lit(3.0) + T::lit(2.0) * big_gamma * big_gamma) / T::lit(60.0);
    -T::lit(2.0 / 3.0) * tau * (T::one() + tau * (T::lit(0.25) + q * tau))
}

/// `G(τ) = ln C / |β|²`, independent of `|α|`. Negative for `τ > 0`, with
/// poles where the cat size vanishes (`Γτ = 2πk`, `k ≥ 1`).
pub fn big_g<T: Real>(big_gamma: T, tau: T) -> Result<T> {
    non_negative("tau", tau)?;
    non_negative("big_gamma", big_gamma)?;
    let pole = || Error::Pole {
        tau: tau.as_f64(),
        big_gamma: big_gamma.as_f64(),
    };
    if big_gamma == T::zero() {
        return Err(pole());
    }
    if tau < tau_switch(big_gamma) {
        return Ok(big_g_series(big_gamma, tau));
    }
    let x = big_gamma * tau * T::lit(0.5);
    let s = x.sin();
    if s.abs() <= T::lit(4.0) * T::epsilon() * x.max(T::one()) {
        return Err(pole());
    }
    Ok(-tau.exp() * decay_exponent(big_gamma, tau) / (s * s))
}

/// Amplitude of the coherent state leaving the sum port,
/// `(e^{-τ/2+iΓτ} + e^{-τ/2})·α/√2`.
pub fn pure_port<T: Real>(alpha: Complex<T>, big_gamma: T, tau: T) -> Complex<T> {
    let a = (-tau * T::lit(0.5)).exp();
    (cis(big_gamma * tau) + Complex::new(T::one(), T::zero())) * alpha * (a * T::FRAC_1_SQRT_2())
}

/// Efficiency `1 - exp(-|γ - γ'|²/2)` of telling two coherent states apart.
pub fn discrimination_efficiency<T: Real>(gamma_a: Complex<T>, gamma_b: Complex<T>) -> T {
    -(-(gamma_a - gamma_b).norm_sqr() * T::lit(0.5)).exp_m1()
}

/// All closed-form quantities at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormPoint<T> {
    pub big_gamma: T,
    pub tau: T,
    pub alpha_sq: T,
    pub c: T,
    pub beta_sq: T,
    pub f: T,
    /// `None` at a pole of `G`.
    pub g: Option<T>,
    pub gamma_out: Complex<T>,
}

impl<T: Real> ClosedFormPoint<T> {
    pub fn evaluate(alpha: Complex<T>, big_gamma: T, tau: T) -> Result<Self> {
        positive("|alpha| (finite)", alpha.norm() + T::one())?;
        let alpha_sq = alpha.norm_sqr();
        let c = coherence_c(alpha_sq, big_gamma, tau)?;
        let g = match big_g(big_gamma, tau) {
            Ok(g) => Some(g),
            Err(Error::Pole { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            big_gamma,
            tau,
            alpha_sq,
            c,
            beta_sq: cat_size(alpha_sq, big_gamma, tau)?,
            f: (T::one() + c) * T::lit(0.5),
            g,
            gamma_out: pure_port(alpha, big_gamma, tau),
        })
    }
}
