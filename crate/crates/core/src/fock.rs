//! Brute-force Lindblad integration on a truncated Fock space.
//!
//! The state lives on `mode₁ ⊗ mode₂ ⊗ qubit`, with the qubit as a plain
//! two-level system (`H`, `V`). Basis index of `|n₁, n₂, q⟩` is
//! `(n₁·c₂ + n₂)·2 + q`. The generator is
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_m γ_m (a_m ρ a_m† - ½{n_m, ρ}),   H = -Σ_m χ_m n_m ⊗ |q_m⟩⟨q_m|
//! ```
//!
//! where the sign of `H` makes the coupled amplitude rotate as `α·e^{iχt}`.
//! Qubit loss is not modelled.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coherent::{Branch, DyadState, Qubit};
use crate::engine::ChannelConfig;
use crate::error::{non_negative, positive, Error, Result};
use crate::scalar::{Complex, Real};

/// Largest allowed population in the top Fock level of either mode.
pub const TRAILING_POPULATION_LIMIT: f64 = 1e-6;
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
pub const HERMITICITY_LIMIT: f64 = 1e-10;
const MAX_HALVINGS: usize = 12;

fn deficit_tolerance<T: Real>() -> T {
    T::lit(1e-8).max(T::lit(10.0) * T::epsilon())
}

/// Truncated coherent state `e^{-|α|²/2} Σ αⁿ/√n! |n⟩`, renormalized.
///
/// `cutoff` is the number of levels kept. Fails when the discarded
/// probability exceeds `1e-8`; `cutoff ≥ 4|α|² + 10` is always enough.
pub fn coherent_vector<T: Real>(alpha: Complex<T>, cutoff: usize) -> Result<Vec<Complex<T>>> {
    if cutoff == 0 {
        return Err(Error::CutoffInadequate {
            mode: 0,
            cutoff,
            detail: "at least one level is needed".into(),
        });
    }
    let mut v = Vec::with_capacity(cutoff);
    let mut c = Complex::new((-alpha.norm_sqr() * T::lit(0.5)).exp(), T::zero());
    let mut kept = T::zero();
    for n in 0..cutoff {
        if n > 0 {
            c = c * alpha / T::from_count(n).sqrt();
        }
        kept = kept + c.norm_sqr();
        v.push(c);
    }
    let deficit = T::one() - kept;
    if deficit > deficit_tolerance() {
        return Err(Error::CutoffInadequate {
            mode: 0,
            cutoff,
            detail: format!("norm deficit {deficit} for |alpha|^2 = {}", alpha.norm_sqr()),
        });
    }
    let scale = kept.sqrt().recip();
    Ok(v.into_iter().map(|x| x * scale).collect())
}

fn qubit_index(q: Qubit) -> usize {
    match q {
        Qubit::H => 0,
        Qubit::V => 1,
    }
}

/// Dense density matrix over two truncated modes and a qubit. A single
/// mode uses cutoff 1 for the second.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity<T> {
    cutoffs: [usize; 2],
    data: Vec<Complex<T>>,
}

impl<T: Real> FockDensity<T> {
    pub fn zeros(cutoffs: [usize; 2]) -> Result<Self> {
        for (mode, &c) in cutoffs.iter().enumerate() {
            if c == 0 {
                return Err(Error::CutoffInadequate {
                    mode,
                    cutoff: c,
                    detail: "at least one level is needed".into(),
                });
            }
        }
        let d = cutoffs[0] * cutoffs[1] * 2;
        Ok(Self {
            cutoffs,
            data: vec![Complex::new(T::zero(), T::zero()); d * d],
        })
    }

    pub fn cutoffs(&self) -> [usize; 2] {
        self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs[0] * self.cutoffs[1] * 2
    }

    pub fn index(&self, n1: usize, n2: usize, q: Qubit) -> usize {
        (n1 * self.cutoffs[1] + n2) * 2 + qubit_index(q)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    /// State vector of `Σ coefficient·|q⟩ ⊗ |amps⟩` (one or two modes).
    pub fn state_vector(branches: &[Branch<T>], cutoffs: [usize; 2]) -> Result<Vec<Complex<T>>> {
        let shell = Self::zeros(cutoffs)?;
        let mut psi = vec![Complex::new(T::zero(), T::zero()); shell.dim()];
        for b in branches {
            let kron = product_vector(&b.amps, cutoffs)?;
            let q = qubit_index(b.qubit);
            for (k, x) in kron.iter().enumerate() {
                psi[k * 2 + q] = psi[k * 2 + q] + b.coefficient * *x;
            }
        }
        Ok(psi)
    }

    pub fn from_pure(branches: &[Branch<T>], cutoffs: [usize; 2]) -> Result<Self> {
        let psi = Self::state_vector(branches, cutoffs)?;
        let mut rho = Self::zeros(cutoffs)?;
        let d = rho.dim();
        for (k, row) in rho.data.chunks_mut(d).enumerate() {
            for (l, x) in row.iter_mut().enumerate() {
                *x = psi[k] * psi[l].conj();
            }
        }
        Ok(rho)
    }

    /// Expands a one- or two-mode dyad state in the truncated basis.
    pub fn from_dyads(state: &DyadState<T>, cutoffs: [usize; 2]) -> Result<Self> {
        if state.n_modes() == 0 || state.n_modes() > 2 {
            return Err(Error::ModeCount {
                expected: 2,
                found: state.n_modes(),
            });
        }
        let mut rho = Self::zeros(cutoffs)?;
        let d = rho.dim();
        for term in state.terms() {
            let ket = product_vector(&term.ket_amps, cutoffs)?;
            let bra = product_vector(&term.bra_amps, cutoffs)?;
            let (qr, qc) = (qubit_index(term.qubit_row), qubit_index(term.qubit_col));
            for (k, x) in ket.iter().enumerate() {
                let row = (k * 2 + qr) * d;
                let wx = term.weight * *x;
                for (l, y) in bra.iter().enumerate() {
                    let e = &mut rho.data[row + l * 2 + qc];
                    *e = *e + wx * y.conj();
                }
            }
        }
        Ok(rho)
    }

    pub fn trace(&self) -> Complex<T> {
        let d = self.dim();
        (0..d).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
            acc + self.data[k * d + k]
        })
    }

    /// `max |ρ - ρ†|`
    pub fn hermiticity_error(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for k in 0..d {
            for l in k..d {
                worst = worst.max((self.data[k * d + l] - self.data[l * d + k].conj()).norm());
            }
        }
        worst
    }

    /// Population in the top kept level of each mode.
    pub fn trailing_population(&self) -> [T; 2] {
        let d = self.dim();
        let [c1, c2] = self.cutoffs;
        let mut pop = [T::zero(); 2];
        for k in 0..d {
            let p = self.data[k * d + k].re;
            let n1 = k / 2 / c2;
            let n2 = k / 2 % c2;
            if c1 > 1 && n1 == c1 - 1 {
                pop[0] = pop[0] + p;
            }
            if c2 > 1 && n2 == c2 - 1 {
                pop[1] = pop[1] + p;
            }
        }
        pop
    }

    /// Fails when either mode has more than `1e-6` in its top level.
    pub fn check_cutoff(&self) -> Result<()> {
        let limit = T::lit(TRAILING_POPULATION_LIMIT);
        for (mode, p) in self.trailing_population().into_iter().enumerate() {
            if p.abs() > limit {
                return Err(Error::CutoffInadequate {
                    mode,
                    cutoff: self.cutoffs[mode],
                    detail: format!("top-level population {p} exceeds {limit}"),
                });
            }
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩` for a state vector in this basis.
    pub fn fidelity_pure(&self, psi: &[Complex<T>]) -> Result<T> {
        let d = self.dim();
        if psi.len() != d {
            return Err(Error::InvalidDesign(format!(
                "state vector has length {}, expected {d}",
                psi.len()
            )));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, row) in self.data.chunks(d).enumerate() {
            let mut r = Complex::new(T::zero(), T::zero());
            for (x, p) in row.iter().zip(psi) {
                r = r + *x * *p;
            }
            acc = acc + psi[k].conj() * r;
        }
        Ok(acc.re)
    }

    fn to_matrix(&self) -> DMatrix<Complex<f64>> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, l| {
            let x = self.data[k * d + l];
            Complex::new(x.re.as_f64(), x.im.as_f64())
        })
    }
}

fn product_vector<T: Real>(amps: &[Complex<T>], cutoffs: [usize; 2]) -> Result<Vec<Complex<T>>> {
    let tag = |e: Error, mode: usize| match e {
        Error::CutoffInadequate { cutoff, detail, .. } => Error::CutoffInadequate {
            mode,
            cutoff,
            detail,
        },
        e => e,
    };
    let (first, second) = match amps {
        [a] => (coherent_vector(*a, cutoffs[0]).map_err(|e| tag(e, 0))?, vec![Complex::new(T::one(), T::zero())]),
        [a, b] => (
            coherent_vector(*a, cutoffs[0]).map_err(|e| tag(e, 0))?,
            coherent_vector(*b, cutoffs[1]).map_err(|e| tag(e, 1))?,
        ),
        _ => {
            return Err(Error::ModeCount {
                expected: 2,
                found: amps.len(),
            })
        }
    };
    if second.len() != cutoffs[1] {
        return Err(Error::ModeCount {
            expected: 1,
            found: 2,
        });
    }
    Ok(first
        .iter()
        .flat_map(|x| second.iter().map(move |y| *x * *y))
        .collect())
}

/// Per-basis-state coefficients of the generator for one time segment.
struct Generator<T> {
    dim: usize,
    /// `χ·n` on the coupled rail, summed over channels.
    kerr: Vec<T>,
    /// `½ Σ γ n`
    damping: Vec<T>,
    /// `(index shift of a†, √(γ(n+1)) or 0 at the top level)` per channel.
    jumps: Vec<(usize, Vec<T>)>,
}

impl<T: Real> Generator<T> {
    fn new(cutoffs: [usize; 2], channels: &[(usize, Qubit, T, T)]) -> Self {
        let [_, c2] = cutoffs;
        let dim = cutoffs[0] * c2 * 2;
        let number = |k: usize, mode: usize| if mode == 0 { k / 2 / c2 } else { k / 2 % c2 };
        let mut kerr = vec![T::zero(); dim];
        let mut damping = vec![T::zero(); dim];
        let mut jumps = Vec::new();
        for &(mode, qubit, chi, gamma) in channels {
            let shift = if mode == 0 { 2 * c2 } else { 2 };
            let mut amp = vec![T::zero(); dim];
            for k in 0..dim {
                let n = number(k, mode);
                if k % 2 == qubit_index(qubit) {
                    kerr[k] = kerr[k] + chi * T::from_count(n);
                }
                damping[k] = damping[k] + T::lit(0.5) * gamma * T::from_count(n);
                if n + 1 < cutoffs[mode] {
                    amp[k] = (gamma * T::from_count(n + 1)).sqrt();
                }
            }
            if gamma > T::zero() {
                jumps.push((shift, amp));
            }
        }
        Self {
            dim,
            kerr,
            damping,
            jumps,
        }
    }

    fn apply(&self, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        let d = self.dim;
        out.par_chunks_mut(d).enumerate().for_each(|(k, row)| {
            let src = &rho[k * d..(k + 1) * d];
            for (l, o) in row.iter_mut().enumerate() {
                let phase = self.kerr[k] - self.kerr[l];
                let decay = self.damping[k] + self.damping[l];
                let x = src[l];
                let mut v = Complex::new(-decay * x.re - phase * x.im, phase * x.re - decay * x.im);
                for (shift, amp) in &self.jumps {
                    let w = amp[k] * amp[l];
                    if w != T::zero() {
                        v = v + rho[(k + shift) * d + l + shift] * w;
                    }
                }
                *o = v;
            }
        });
    }
}

/// `0.1 / (largest diagonal rate of the generator)` for the channels in
/// `cfg` at these cutoffs.
pub fn default_step<T: Real>(cfg: &ChannelConfig<T>, cutoffs: [usize; 2]) -> T {
    let rate = cfg
        .channels()
        .iter()
        .map(|c| {
            let top = T::from_count(cutoffs.get(c.mode).copied().unwrap_or(1).saturating_sub(1));
            (c.chi + c.gamma) * top
        })
        .fold(T::zero(), T::max);
    if rate > T::zero() {
        T::lit(0.1) / rate
    } else {
        T::infinity()
    }
}

fn rk4_segment<T: Real>(rho: &mut [Complex<T>], gen: &Generator<T>, length: T, dt: T) {
    if length <= T::zero() {
        return;
    }
    let steps = (length / dt).ceil().to_usize().unwrap_or(1).max(1);
    let h = length / T::from_count(steps);
    let n = rho.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut k = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut acc = vec![zero; n];
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let third = h / T::lit(3.0);
    for _ in 0..steps {
        gen.apply(rho, &mut k);
        for i in 0..n {
            acc[i] = rho[i] + k[i] * sixth;
            tmp[i] = rho[i] + k[i] * half;
        }
        gen.apply(&tmp, &mut k);
        for i in 0..n {
            acc[i] = acc[i] + k[i] * third;
            tmp[i] = rho[i] + k[i] * half;
        }
        gen.apply(&tmp, &mut k);
        for i in 0..n {
            acc[i] = acc[i] + k[i] * third;
            tmp[i] = rho[i] + k[i] * h;
        }
        gen.apply(&tmp, &mut k);
        for i in 0..n {
            rho[i] = acc[i] + k[i] * sixth;
        }
    }
}

/// Evolves `rho` for time `t`. Each channel acts for `min(duration, t)`.
///
/// Fixed-step RK4 with step `dt` (shrunk to divide each segment evenly),
/// halved until the trace drifts by less than `1e-8` and the result is
/// Hermitian to `1e-10`. Fails if either mode's top level holds more than
/// `1e-6` at any segment boundary.
pub fn integrate<T: Real>(
    rho: &FockDensity<T>,
    cfg: &ChannelConfig<T>,
    t: T,
    dt: T,
) -> Result<FockDensity<T>> {
    non_negative("t", t)?;
    positive("dt", dt)?;
    for c in cfg.channels() {
        if c.mode >= 2 {
            return Err(Error::UnknownMode {
                mode: c.mode,
                n_modes: 2,
            });
        }
    }
    rho.check_cutoff()?;

    let mut stops: Vec<T> = cfg
        .channels()
        .iter()
        .map(|c| c.duration.min(t))
        .chain(std::iter::once(t))
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite durations"));
    stops.dedup();

    let trace0 = rho.trace();
    let drift_limit = T::lit(TRACE_DRIFT_LIMIT).max(T::lit(1e3) * T::epsilon());
    let herm_limit = T::lit(HERMITICITY_LIMIT).max(T::lit(1e2) * T::epsilon());
    for halving in 0..=MAX_HALVINGS {
        let step = dt / T::lit(2.0).powi(halving as i32);
        let mut out = rho.clone();
        let mut start = T::zero();
        for &stop in &stops {
            let active: Vec<_> = cfg
                .channels()
                .iter()
                .filter(|c| c.duration > start)
                .map(|c| (c.mode, c.qubit, c.chi, c.gamma))
                .collect();
            let gen = Generator::new(rho.cutoffs, &active);
            rk4_segment(&mut out.data, &gen, stop - start, step);
            out.check_cutoff()?;
            start = stop;
        }
        let drift = (out.trace() - trace0).norm();
        let herm = out.hermiticity_error();
        if drift < drift_limit && herm < herm_limit {
            return Ok(out);
        }
    }
    Err(Error::StepHalvingExhausted(MAX_HALVINGS))
}

/// Dominant eigenpair of a Hermitian PSD block by power iteration, with the
/// eigenvector's vacuum component made real and positive.
fn dominant<T: Real>(block: &[Complex<T>], d: usize) -> (T, Vec<Complex<T>>) {
    let zero = Complex::new(T::zero(), T::zero());
    let start = (0..d)
        .max_by(|&a, &b| {
            block[a * d + a]
                .re
                .partial_cmp(&block[b * d + b].re)
                .expect("finite diagonal")
        })
        .unwrap_or(0);
    let mut v: Vec<Complex<T>> = (0..d).map(|k| block[k * d + start]).collect();
    let mut lambda = T::zero();
    for _ in 0..500 {
        let norm = v.iter().map(|x| x.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if norm == T::zero() {
            return (T::zero(), v);
        }
        v.iter_mut().for_each(|x| *x = *x / norm);
        let w: Vec<Complex<T>> = (0..d)
            .map(|k| {
                block[k * d..(k + 1) * d]
                    .iter()
                    .zip(&v)
                    .fold(zero, |acc, (a, x)| acc + *a * *x)
            })
            .collect();
        let next = v
            .iter()
            .zip(&w)
            .fold(zero, |acc, (x, y)| acc + x.conj() * *y)
            .re;
        let converged = (next - lambda).abs() <= T::lit(4.0) * T::epsilon() * next.abs();
        lambda = next;
        v = w;
        if converged {
            break;
        }
    }
    let norm = v.iter().map(|x| x.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    let phase = if v[0].norm() > T::zero() {
        v[0].conj() / v[0].norm()
    } else {
        Complex::new(T::one(), T::zero())
    };
    v.iter_mut().for_each(|x| *x = *x * phase / norm);
    (lambda, v)
}

/// Normalized qubit coherence `ψ_H† ρ_HV ψ_V / √(λ_H λ_V)`, with `ψ, λ` the
/// dominant eigenpairs of the diagonal blocks. For the symmetric scheme
/// the blocks are pure and this is the coherence parameter `C`.
pub fn extract_coherence<T: Real>(rho: &FockDensity<T>) -> Result<Complex<T>> {
    let d = rho.dim();
    let m = d / 2;
    let block = |qr: usize, qc: usize| -> Vec<Complex<T>> {
        let mut b = Vec::with_capacity(m * m);
        for k in 0..m {
            for l in 0..m {
                b.push(rho.data[(k * 2 + qr) * d + l * 2 + qc]);
            }
        }
        b
    };
    let scale = rho.trace().norm();
    let floor = T::lit(1e-12) * scale.max(T::min_positive_value());
    let (lh, vh) = dominant(&block(0, 0), m);
    if !(lh > floor) {
        return Err(Error::VanishingBlock("HH"));
    }
    let (lv, vv) = dominant(&block(1, 1), m);
    if !(lv > floor) {
        return Err(Error::VanishingBlock("VV"));
    }
    let hv = block(0, 1);
    let zero = Complex::new(T::zero(), T::zero());
    let mut acc = zero;
    for k in 0..m {
        let r = hv[k * m..(k + 1) * m]
            .iter()
            .zip(&vv)
            .fold(zero, |a, (x, y)| a + *x * *y);
        acc = acc + vh[k].conj() * r;
    }
    Ok(acc / (lh * lv).sqrt())
}

/// `½ Σ|λ(a - b)|`, computed in `f64`.
pub fn trace_distance<T: Real>(a: &FockDensity<T>, b: &FockDensity<T>) -> Result<f64> {
    if a.cutoffs != b.cutoffs {
        return Err(Error::InvalidDesign(format!(
            "cutoffs differ: {:?} vs {:?}",
            a.cutoffs, b.cutoffs
        )));
    }
    let diff = a.to_matrix() - b.to_matrix();
    let diff = (&diff + diff.adjoint()) * Complex::new(0.5, 0.0);
    Ok(0.5 * diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
}

/// Smallest eigenvalue of the Hermitian part, in `f64`.
pub fn min_eigenvalue<T: Real>(rho: &FockDensity<T>) -> f64 {
    let m = rho.to_matrix();
    let m = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
