//! Design solver: given a target fidelity `F`, cat amplitude `|β|` and
//! `Γ`, find the interaction time `τ_int` with `|β|²·G(τ_int) = ln(2F - 1)`
//! and the input intensity that produces `|β|` at that time.

use rayon::prelude::*;

use crate::closed_form::{big_g, coherence_c, log_coherence_c};
use crate::error::{positive, Error, Result};
use crate::scalar::Real;

/// `Γ` values of the standard design table.
pub const TABLE_GAMMA_RATIOS: [f64; 5] = [0.01, 1.0, 25.0, 50.0, 100.0];
pub const TABLE_FIDELITY: f64 = 0.99;
pub const TABLE_BETA: f64 = 1.6;

/// Relative bracket width at which bisection stops.
const BISECTION_RTOL: f64 = 1e-13;
const SCAN_POINTS: usize = 4096;

/// How the sine in the intensity formula interprets `Γτ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitMode {
    #[default]
    Radians,
    /// Degrees; only useful for reproducing tables computed that way.
    CompatDegrees,
}

impl UnitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitMode::Radians => "radians",
            UnitMode::CompatDegrees => "compat-degrees",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec<T> {
    pub fidelity: T,
    pub beta_abs: T,
    pub big_gamma: T,
    pub unit_mode: UnitMode,
    /// Photon damping rate in 1/s, when a dimensional time is wanted.
    pub damping_rate: Option<T>,
}

impl<T: Real> DesignSpec<T> {
    pub fn new(fidelity: T, beta_abs: T, big_gamma: T) -> Result<Self> {
        let spec = Self {
            fidelity,
            beta_abs,
            big_gamma,
            unit_mode: UnitMode::Radians,
            damping_rate: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_unit_mode(mut self, unit_mode: UnitMode) -> Self {
        self.unit_mode = unit_mode;
        self
    }

    pub fn with_damping_rate(mut self, rate: T) -> Result<Self> {
        positive("damping_rate", rate)?;
        self.damping_rate = Some(rate);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.fidelity > half && self.fidelity < T::one()) {
            return Err(Error::InvalidDesign(format!(
                "fidelity must lie in (0.5, 1), got {}",
                self.fidelity
            )));
        }
        positive("beta", self.beta_abs)?;
        positive("gamma_ratio", self.big_gamma)?;
        if let Some(r) = self.damping_rate {
            positive("damping_rate", r)?;
        }
        Ok(())
    }

    /// `ln(2F - 1) / |β|²`, the value `G(τ_int)` must take.
    pub fn target_g(&self) -> T {
        let two = T::lit(2.0);
        (two * self.fidelity - T::one()).ln() / (self.beta_abs * self.beta_abs)
    }

    /// High-fidelity shortcut target `-2x/|β|²` with `x = 1 - F`.
    pub fn shortcut_target_g(&self) -> T {
        -T::lit(2.0) * (T::one() - self.fidelity) / (self.beta_abs * self.beta_abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult<T> {
    pub big_gamma: T,
    pub tau_int: T,
    pub alpha_sq: T,
    pub achieved_c: T,
    pub achieved_f: T,
    pub unit_mode: UnitMode,
    pub t_int_seconds: Option<T>,
    /// `|ln(2F-1) - |β|²G(τ_int)| / |ln(2F-1)|`.
    pub identity_residual: T,
}

/// First pole of `G`, `τ = 2π/Γ`.
pub fn first_pole<T: Real>(big_gamma: T) -> T {
    T::TAU() / big_gamma
}

/// Bisection on a bracket where `f(lo) > 0 >= f(hi)`.
fn bisect<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> Result<T>) -> Result<T> {
    let rtol = T::lit(BISECTION_RTOL).max(T::epsilon() * T::lit(4.0));
    for _ in 0..400 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi || hi - lo <= rtol * hi {
            break;
        }
        if f(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Smallest `τ > 0` with `G(τ) = target` (`target < 0`), searched before
/// the first pole of `G`.
pub fn solve_tau_for<T: Real>(big_gamma: T, target: T) -> Result<T> {
    positive("gamma_ratio", big_gamma)?;
    if !(target < T::zero()) {
        return Err(Error::InvalidDesign(format!(
            "target G must be negative, got {target}"
        )));
    }
    let pole = first_pole(big_gamma);
    let h = |tau: T| big_g(big_gamma, tau).map(|g| g - target);

    // geometric points resolve roots close to the origin, where G ≈ -2τ/3;
    // the uniform points cover the rest of the branch
    let mut grid: Vec<T> = (12..=48)
        .rev()
        .map(|k| pole * T::lit(0.5).powi(k))
        .collect();
    let step = pole / T::from_count(SCAN_POINTS);
    grid.extend(
        (1..SCAN_POINTS)
            .map(|j| step * T::from_count(j))
            .filter(|&t| t > pole * T::lit(0.5).powi(12)),
    );

    let mut prev = T::zero();
    for &tau in &grid {
        let v = match h(tau) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => break,
            Err(e) => return Err(e),
        };
        if v <= T::zero() {
            return bisect(prev, tau, h);
        }
        prev = tau;
    }
    Err(Error::NoSolution {
        pole: pole.as_f64(),
    })
}

pub fn solve_tau<T: Real>(spec: &DesignSpec<T>) -> Result<T> {
    spec.validate()?;
    solve_tau_for(spec.big_gamma, spec.target_g())
}

/// Root of the shortcut relation `G(τ) = -2(1-F)/|β|²`.
pub fn solve_tau_shortcut<T: Real>(spec: &DesignSpec<T>) -> Result<T> {
    spec.validate()?;
    solve_tau_for(spec.big_gamma, spec.shortcut_target_g())
}

/// `|α|² = |β|² / (2e^{-τ}sin²(Γτ/2))`.
pub fn input_intensity<T: Real>(spec: &DesignSpec<T>, tau: T) -> Result<T> {
    let half_angle = spec.big_gamma * tau * T::lit(0.5);
    let arg = match spec.unit_mode {
        UnitMode::Radians => half_angle,
        UnitMode::CompatDegrees => half_angle.to_radians(),
    };
    let s = arg.sin();
    if s.abs() <= T::lit(4.0) * T::epsilon() * arg.abs().max(T::one()) {
        return Err(Error::Pole {
            tau: tau.as_f64(),
            big_gamma: spec.big_gamma.as_f64(),
        });
    }
    Ok(spec.beta_abs * spec.beta_abs / (T::lit(2.0) * (-tau).exp() * s * s))
}

pub fn design<T: Real>(spec: &DesignSpec<T>) -> Result<DesignResult<T>> {
    let tau_int = solve_tau(spec)?;
    let alpha_sq = input_intensity(spec, tau_int)?;
    let achieved_c = coherence_c(alpha_sq, spec.big_gamma, tau_int)?;
    let ln_target = (T::lit(2.0) * spec.fidelity - T::one()).ln();
    let beta_sq = spec.beta_abs * spec.beta_abs;
    let identity_residual =
        ((ln_target - beta_sq * big_g(spec.big_gamma, tau_int)?) / ln_target).abs();
    Ok(DesignResult {
        big_gamma: spec.big_gamma,
        tau_int,
        alpha_sq,
        achieved_c,
        achieved_f: (T::one() + achieved_c) * T::lit(0.5),
        unit_mode: spec.unit_mode,
        t_int_seconds: spec.damping_rate.map(|g| tau_int / g),
        identity_residual,
    })
}

/// Designs for every `Γ` in [`TABLE_GAMMA_RATIOS`], in that order.
pub fn design_table<T: Real>(fidelity: T, beta_abs: T, unit_mode: UnitMode) -> Result<Vec<DesignResult<T>>> {
    TABLE_GAMMA_RATIOS
        .par_iter()
        .map(|&g| design(&DesignSpec::new(fidelity, beta_abs, T::lit(g))?.with_unit_mode(unit_mode)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind<T> {
    /// `C(τ)` at fixed input intensity.
    CoherenceC { alpha_sq: T },
    BigG,
}

/// Uniform grid `tau_min + k·(tau_max - tau_min)/steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid<T> {
    pub tau_min: T,
    pub tau_max: T,
    pub steps: usize,
}

impl<T: Real> TauGrid<T> {
    pub fn new(tau_min: T, tau_max: T, steps: usize) -> Result<Self> {
        crate::error::non_negative("tau_min", tau_min)?;
        if !(tau_max > tau_min) || !tau_max.is_finite() || steps == 0 {
            return Err(Error::InvalidDesign(format!(
                "grid needs tau_max > tau_min and steps >= 1, got [{tau_min}, {tau_max}] with {steps} steps"
            )));
        }
        Ok(Self {
            tau_min,
            tau_max,
            steps,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let span = self.tau_max - self.tau_min;
        let n = T::from_count(self.steps);
        (0..=self.steps).map(move |k| self.tau_min + span * T::from_count(k) / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow<T> {
    pub tau: T,
    /// `None` at a pole.
    pub value: Option<T>,
    pub big_gamma: T,
}

/// Curve samples for every `Γ`, grouped by `Γ` in input order and by
/// ascending `τ` within a group. Evaluated in parallel; the order does not
/// depend on scheduling.
pub fn sweep_curves<T: Real>(
    kind: CurveKind<T>,
    gammas: &[T],
    grid: &TauGrid<T>,
) -> Result<Vec<CurveRow<T>>> {
    if gammas.is_empty() {
        return Err(Error::InvalidDesign("no gamma ratios given".into()));
    }
    let taus: Vec<T> = grid.points().collect();
    let jobs: Vec<(T, T)> = gammas
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect();
    jobs.par_iter()
        .map(|&(big_gamma, tau)| {
            let value = match kind {
                CurveKind::CoherenceC { alpha_sq } => Some(coherence_c(alpha_sq, big_gamma, tau)?),
                CurveKind::BigG => match big_g(big_gamma, tau) {
                    Ok(v) => Some(v),
                    Err(Error::Pole { .. }) => None,
                    Err(e) => return Err(e),
                },
            };
            Ok(CurveRow {
                tau,
                value,
                big_gamma,
            })
        })
        .collect()
}

/// `ln C` at the design point, from the exponent rather than `ln(exp(..))`.
pub fn design_log_c<T: Real>(result: &DesignResult<T>) -> Result<T> {
    log_coherence_c(result.alpha_sq, result.big_gamma, result.tau_int)
}
