//! Exact algebra of coherent states and of density operators written as
//! finite sums of (qubit dyad) ⊗ (multimode coherent dyad) terms.
//!
//! Nothing here is truncated to a Fock basis: every inner product goes
//! through the Gaussian overlap `⟨a|b⟩ = exp(-|a|²/2 - |b|²/2 + a*·b)`, so
//! the algebra is exact at any amplitude.

use crate::error::{Error, Result};
use crate::scalar::{cis, Complex, Real};

/// Complex label of a single-mode coherent state.
pub type ComplexAmplitude<T> = Complex<T>;

/// `⟨a|b⟩` for coherent states `|a⟩`, `|b⟩`.
///
/// Evaluated as `exp(-|a-b|²/2 + i·Im(a*·b))`, which avoids cancelling the
/// large `|a|²` and `|b|²` terms against each other.
pub fn overlap<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let re = -(a - b).norm_sqr() * half;
    let im = (a.conj() * b).im;
    cis(im) * re.exp()
}

/// Balanced beam splitter acting on two coherent amplitudes:
/// `(a, b) -> ((a+b)/√2, (a-b)/√2)`.
pub fn beamsplitter_5050<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let r = T::FRAC_1_SQRT_2();
    ((a + b) * r, (a - b) * r)
}

/// Displacement of a coherent state, `D(x)|a⟩ = e^{iφ}|a+x⟩` with
/// `φ = Im(x·a*)`. Returns the new amplitude and `φ`.
pub fn displace<T: Real>(a: Complex<T>, x: Complex<T>) -> (Complex<T>, T) {
    (a + x, (x * a.conj()).im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Relative sign between the `|β⟩` and `|-β⟩` branches.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Parity::Even => T::one(),
            Parity::Odd => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// `N±(|β⟩ ± |-β⟩)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatTarget<T> {
    pub beta: Complex<T>,
    pub parity: Parity,
}

impl<T: Real> CatTarget<T> {
    pub fn new(beta: Complex<T>, parity: Parity) -> Result<Self> {
        if parity == Parity::Odd && beta.norm_sqr() == T::zero() {
            return Err(Error::DegenerateCat);
        }
        Ok(Self { beta, parity })
    }

    pub fn even(beta: Complex<T>) -> Self {
        Self {
            beta,
            parity: Parity::Even,
        }
    }

    pub fn odd(beta: Complex<T>) -> Result<Self> {
        Self::new(beta, Parity::Odd)
    }

    /// The cat as a superposition of coherent branches, normalized.
    pub fn branches(&self) -> Result<[(Complex<T>, Complex<T>); 2]> {
        let n = cat_norm(self)?;
        let s = self.parity.sign::<T>();
        Ok([
            (Complex::new(n, T::zero()), self.beta),
            (Complex::new(n * s, T::zero()), -self.beta),
        ])
    }
}

/// Normalization `N± = (2 ± 2·exp(-2|β|²))^{-1/2}`.
pub fn cat_norm<T: Real>(target: &CatTarget<T>) -> Result<T> {
    let two = T::lit(2.0);
    let x = -two * target.beta.norm_sqr();
    let inner = match target.parity {
        Parity::Even => two + two * x.exp(),
        Parity::Odd => {
            if x == T::zero() {
                return Err(Error::DegenerateCat);
            }
            -two * x.exp_m1()
        }
    };
    Ok(inner.sqrt().recip())
}

/// Component of the dual-rail single-photon qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    H,
    V,
}

/// `weight · |row⟩⟨col| ⊗ |ket_1, …, ket_n⟩⟨bra_1, …, bra_n|`
#[derive(Debug, Clone, PartialEq)]
pub struct DyadTerm<T> {
    pub qubit_row: Qubit,
    pub qubit_col: Qubit,
    pub ket_amps: Vec<Complex<T>>,
    pub bra_amps: Vec<Complex<T>>,
    pub weight: Complex<T>,
}

impl<T: Real> DyadTerm<T> {
    pub fn adjoint(&self) -> Self {
        Self {
            qubit_row: self.qubit_col,
            qubit_col: self.qubit_row,
            ket_amps: self.bra_amps.clone(),
            bra_amps: self.ket_amps.clone(),
            weight: self.weight.conj(),
        }
    }

    /// `∏_k ⟨bra_k|ket_k⟩`, the trace of the coherent part.
    pub fn coherent_trace(&self) -> Complex<T> {
        self.ket_amps
            .iter()
            .zip(&self.bra_amps)
            .fold(Complex::new(T::one(), T::zero()), |acc, (&k, &b)| {
                acc * overlap(b, k)
            })
    }

    pub fn trace(&self) -> Complex<T> {
        if self.qubit_row == self.qubit_col {
            self.weight * self.coherent_trace()
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    fn same_operator(&self, other: &Self) -> bool {
        self.qubit_row == other.qubit_row
            && self.qubit_col == other.qubit_col
            && self.ket_amps == other.ket_amps
            && self.bra_amps == other.bra_amps
    }
}

/// One branch `coefficient · |qubit⟩ ⊗ |amps⟩` of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub qubit: Qubit,
    pub coefficient: Complex<T>,
    pub amps: Vec<Complex<T>>,
}

impl<T: Real> Branch<T> {
    pub fn new(qubit: Qubit, coefficient: Complex<T>, amps: Vec<Complex<T>>) -> Self {
        Self {
            qubit,
            coefficient,
            amps,
        }
    }
}

/// A density operator as a weighted sum of dyads. Value semantics; every
/// operation returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadState<T> {
    terms: Vec<DyadTerm<T>>,
    n_modes: usize,
}

impl<T: Real> DyadState<T> {
    pub fn empty(n_modes: usize) -> Self {
        Self {
            terms: Vec::new(),
            n_modes,
        }
    }

    pub fn from_terms(n_modes: usize, terms: Vec<DyadTerm<T>>) -> Result<Self> {
        for t in &terms {
            if t.ket_amps.len() != n_modes {
                return Err(Error::ModeCount {
                    expected: n_modes,
                    found: t.ket_amps.len(),
                });
            }
            if t.bra_amps.len() != n_modes {
                return Err(Error::ModeCount {
                    expected: n_modes,
                    found: t.bra_amps.len(),
                });
            }
        }
        Ok(Self { terms, n_modes })
    }

    /// `|ψ⟩⟨ψ|` for `|ψ⟩ = Σ_i c_i |q_i⟩|amps_i⟩`. Not normalized.
    pub fn from_pure(branches: &[Branch<T>]) -> Result<Self> {
        let n_modes = branches.first().map_or(0, |b| b.amps.len());
        let mut terms = Vec::with_capacity(branches.len() * branches.len());
        for bi in branches {
            for bj in branches {
                terms.push(DyadTerm {
                    qubit_row: bi.qubit,
                    qubit_col: bj.qubit,
                    ket_amps: bi.amps.clone(),
                    bra_amps: bj.amps.clone(),
                    weight: bi.coefficient * bj.coefficient.conj(),
                });
            }
        }
        Self::from_terms(n_modes, terms)
    }

    pub fn terms(&self) -> &[DyadTerm<T>] {
        &self.terms
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn trace(&self) -> Complex<T> {
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, t| acc + t.trace())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(DyadTerm::adjoint).collect(),
            n_modes: self.n_modes,
        }
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight = t.weight * factor;
        }
        out
    }

    /// Divides by the (real part of the) trace.
    pub fn normalized(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyState);
        }
        let tr = self.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::NonPositiveTrace(tr.as_f64()));
        }
        Ok(self.scaled(Complex::new(tr.recip(), T::zero())))
    }

    /// Sums the weights of terms that represent the same operator.
    pub fn merged(&self) -> Self {
        let mut out: Vec<DyadTerm<T>> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match out.iter_mut().find(|o| o.same_operator(t)) {
                Some(o) => o.weight = o.weight + t.weight,
                None => out.push(t.clone()),
            }
        }
        Self {
            terms: out,
            n_modes: self.n_modes,
        }
    }

    /// `(ρ + ρ†)/2`, merged.
    pub fn hermitize(&self) -> Self {
        let half = Complex::new(T::lit(0.5), T::zero());
        let mut terms = self.scaled(half).terms;
        terms.extend(self.adjoint().scaled(half).terms);
        Self {
            terms,
            n_modes: self.n_modes,
        }
        .merged()
    }

    /// True when every term has its conjugate-transpose partner.
    pub fn is_hermitian(&self, tol: T) -> bool {
        let merged = self.merged();
        merged.terms.iter().all(|t| {
            let adj = t.adjoint();
            merged
                .terms
                .iter()
                .any(|o| o.same_operator(&adj) && (o.weight - adj.weight).norm() <= tol)
        })
    }

    /// Drops terms whose weight is below `rel` times the current trace.
    /// The trace norm of a single normalized dyad is 1, so `|weight|` bounds
    /// its contribution to any expectation value.
    pub fn pruned(&self, rel: T) -> Self {
        let scale = self.trace().norm();
        let cut = rel * scale;
        Self {
            terms: self
                .terms
                .iter()
                .filter(|t| t.weight.norm() >= cut)
                .cloned()
                .collect(),
            n_modes: self.n_modes,
        }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            Err(Error::UnknownMode {
                mode,
                n_modes: self.n_modes,
            })
        } else {
            Ok(())
        }
    }

    /// Applies a map to each term in place. The closure receives the term
    /// and may rewrite amplitudes and weight.
    pub(crate) fn map_terms(&self, mut f: impl FnMut(&mut DyadTerm<T>)) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(&mut f);
        out
    }

    /// Balanced beam splitter between modes `i` and `j`; mode `i` receives
    /// the sum port and mode `j` the difference port.
    pub fn beamsplitter(&self, i: usize, j: usize) -> Result<Self> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        Ok(self.map_terms(|t| {
            let (a, b) = beamsplitter_5050(t.ket_amps[i], t.ket_amps[j]);
            t.ket_amps[i] = a;
            t.ket_amps[j] = b;
            let (a, b) = beamsplitter_5050(t.bra_amps[i], t.bra_amps[j]);
            t.bra_amps[i] = a;
            t.bra_amps[j] = b;
        }))
    }

    /// Multiplies the `component` branch of the qubit by `e^{i·phase}`.
    pub fn qubit_phase(&self, component: Qubit, phase: T) -> Self {
        let u = cis(phase);
        self.map_terms(|t| {
            if t.qubit_row == component {
                t.weight = t.weight * u;
            }
            if t.qubit_col == component {
                t.weight = t.weight * u.conj();
            }
        })
    }

    /// `⟨d|ρ|d⟩` over the qubit for `|d⟩ = c_h|H⟩ + c_v|V⟩`. The unnormalized
    /// conditional state keeps a trivial qubit label `H`.
    pub fn project_qubit(&self, c_h: Complex<T>, c_v: Complex<T>) -> Self {
        let amp = |q: Qubit| match q {
            Qubit::H => c_h,
            Qubit::V => c_v,
        };
        let mut out = self.map_terms(|t| {
            t.weight = t.weight * amp(t.qubit_row).conj() * amp(t.qubit_col);
            t.qubit_row = Qubit::H;
            t.qubit_col = Qubit::H;
        });
        out.terms.retain(|t| t.weight.norm_sqr() > T::zero());
        out.merged()
    }

    /// Traces out one coherent mode.
    pub fn partial_trace_mode(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let mut out = self.map_terms(|t| {
            let k = t.ket_amps.remove(mode);
            let b = t.bra_amps.remove(mode);
            t.weight = t.weight * overlap(b, k);
        });
        out.n_modes -= 1;
        Ok(out.merged())
    }

    /// Projects one coherent mode on the vacuum and removes it. Unnormalized.
    pub fn project_mode_vacuum(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let half = T::lit(0.5);
        let mut out = self.map_terms(|t| {
            let k = t.ket_amps.remove(mode);
            let b = t.bra_amps.remove(mode);
            let w = (-(k.norm_sqr() + b.norm_sqr()) * half).exp();
            t.weight = t.weight * w;
        });
        out.n_modes -= 1;
        Ok(out.merged())
    }

    /// `Σ ⟨ψ|ρ|ψ⟩` with the qubit traced out, for `|ψ⟩ = Σ c_i |amps_i⟩`.
    pub fn expectation_pure(&self, psi: &[(Complex<T>, Vec<Complex<T>>)]) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = zero;
        for t in self.terms.iter().filter(|t| t.qubit_row == t.qubit_col) {
            // ⟨ψ|ket⟩
            let left = psi.iter().fold(zero, |s, (c, amps)| {
                s + c.conj()
                    * amps
                        .iter()
                        .zip(&t.ket_amps)
                        .fold(Complex::new(T::one(), T::zero()), |p, (&x, &k)| {
                            p * overlap(x, k)
                        })
            });
            // ⟨bra|ψ⟩
            let right = psi.iter().fold(zero, |s, (c, amps)| {
                s + *c
                    * t.bra_amps
                        .iter()
                        .zip(amps)
                        .fold(Complex::new(T::one(), T::zero()), |p, (&b, &x)| {
                            p * overlap(b, x)
                        })
            });
            acc = acc + t.weight * left * right;
        }
        acc
    }

    /// Qubit coherence `w_HV / sqrt(w_HH·w_VV)` of a state with exactly one
    /// term per qubit block, relative to its own coherent dyads.
    pub fn qubit_coherence(&self) -> Result<Complex<T>> {
        let block = |r: Qubit, c: Qubit, name: &'static str| -> Result<&DyadTerm<T>> {
            let mut it = self
                .terms
                .iter()
                .filter(|t| t.qubit_row == r && t.qubit_col == c);
            match (it.next(), it.next()) {
                (Some(t), None) => Ok(t),
                _ => Err(Error::VanishingBlock(name)),
            }
        };
        let hh = block(Qubit::H, Qubit::H, "HH")?.trace().re;
        let vv = block(Qubit::V, Qubit::V, "VV")?.trace().re;
        // an HV block pruned away after underflow means full decoherence
        let hv = match self
            .terms
            .iter()
            .filter(|t| t.qubit_row == Qubit::H && t.qubit_col == Qubit::V)
            .count()
        {
            0 => Complex::new(T::zero(), T::zero()),
            _ => block(Qubit::H, Qubit::V, "HV")?.weight,
        };
        if !(hh > T::zero() && vv > T::zero()) {
            return Err(Error::VanishingBlock("diagonal"));
        }
        Ok(hv / (hh * vv).sqrt())
    }
}

/// `⟨CSS±|ρ|CSS±⟩ / Tr ρ` for a single-mode state; the qubit is traced out.
pub fn fidelity_to_cat<T: Real>(state: &DyadState<T>, target: &CatTarget<T>) -> Result<T> {
    if state.is_empty() {
        return Err(Error::EmptyState);
    }
    if state.n_modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            found: state.n_modes(),
        });
    }
    let tr = state.trace();
    if !(tr.norm() > T::zero()) {
        return Err(Error::NonPositiveTrace(tr.re.as_f64()));
    }
    let psi: Vec<_> = target
        .branches()?
        .iter()
        .map(|&(c, a)| (c, vec![a]))
        .collect();
    Ok((state.expectation_pure(&psi) / tr).re)
}

/// Mixes `|β⟩ + e^{iφ₁}|-β⟩` and `|β⟩ + e^{iφ₂}|-β⟩` on a balanced beam
/// splitter and keeps the difference port conditioned on vacuum in the sum
/// port. The result is a normalized single-mode state.
///
/// The branches that leave the difference port empty carry
/// `1 + e^{i(φ₁+φ₂)}`, so `φ₁ + φ₂ = π` removes them and leaves
/// `e^{iφ₂}|√2β⟩ + e^{iφ₁}|-√2β⟩`.
pub fn combine_cgs<T: Real>(phi1: T, phi2: T, beta: Complex<T>) -> Result<DyadState<T>> {
    let one = Complex::new(T::one(), T::zero());
    let (p1, p2) = (cis(phi1), cis(phi2));
    let branches: Vec<Branch<T>> = [
        (one, beta, beta),
        (p2, beta, -beta),
        (p1, -beta, beta),
        (p1 * p2, -beta, -beta),
    ]
    .into_iter()
    .map(|(c, a, b)| Branch::new(Qubit::H, c, vec![a, b]))
    .collect();
    DyadState::from_pure(&branches)?
        .beamsplitter(0, 1)?
        .project_mode_vacuum(0)?
        .pruned(T::lit(1e-15))
        .normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn missing_off_diagonal_block_is_zero_coherence() {
        let diag = |q: Qubit, a: f64| DyadTerm {
            qubit_row: q,
            qubit_col: q,
            ket_amps: vec![c(a, 0.0)],
            bra_amps: vec![c(a, 0.0)],
            weight: c(0.5, 0.0),
        };
        let s = DyadState::from_terms(1, vec![diag(Qubit::H, 1.0), diag(Qubit::V, -1.0)]).unwrap();
        assert_eq!(s.qubit_coherence().unwrap(), c(0.0, 0.0));
        let lone = DyadState::from_terms(1, vec![diag(Qubit::H, 1.0)]).unwrap();
        assert!(lone.qubit_coherence().is_err());
    }

    fn cat_state(target: &CatTarget<f64>) -> DyadState<f64> {
        let br: Vec<_> = target
            .branches()
            .unwrap()
            .iter()
            .map(|&(w, a)| Branch::new(Qubit::H, w, vec![a]))
            .collect();
        DyadState::from_pure(&br).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let a = c(0.7, -1.3);
        assert!((overlap(a, a) - c(1.0, 0.0)).norm() < 1e-15);
        let m = overlap(c(1.0, 0.0), c(-1.0, 0.0)).norm();
        assert!((m - (-2.0f64).exp()).abs() < 1e-15);
        assert!((m - 0.135335).abs() < 1e-6);
        let b = c(0.4, 0.9);
        let v = overlap(c(0.0, 0.0), b);
        assert!((v - c((-b.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overlap_matches_textbook_form() {
        let a = c(0.3, 0.5);
        let b = c(-0.2, 1.1);
        let direct = (-a.norm_sqr() / 2.0 - b.norm_sqr() / 2.0 + a.conj() * b).exp();
        assert!((overlap(a, b) - direct).norm() < 1e-14);
    }

    #[test]
    fn beamsplitter_examples() {
        let a = c(0.8, -0.1);
        let s2 = 2f64.sqrt();
        let (o1, o2) = beamsplitter_5050(a, a);
        assert!((o1 - a * s2).norm() < 1e-15 && o2.norm() < 1e-15);
        let (o1, o2) = beamsplitter_5050(a, -a);
        assert!(o1.norm() < 1e-15 && (o2 - a * s2).norm() < 1e-15);
    }

    #[test]
    fn displace_examples() {
        let a = c(1.2, 0.4);
        assert_eq!(displace(a, c(0.0, 0.0)), (a, 0.0));
        let x = c(-0.3, 2.0);
        assert_eq!(displace(c(0.0, 0.0), x), (x, 0.0));
        let (out, phase) = displace(c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!(out, c(1.0, 1.0));
        assert_eq!(phase, 1.0);
    }

    #[test]
    fn cat_norm_examples() {
        let n = cat_norm(&CatTarget::even(c(0.0, 0.0))).unwrap();
        assert!((n - 0.5).abs() < 1e-15);
        let n = cat_norm(&CatTarget::even(c(6.0, 0.0))).unwrap();
        assert!((n - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(
            CatTarget::odd(c(0.0, 0.0)).unwrap_err(),
            Error::DegenerateCat
        );
        let bogus = CatTarget {
            beta: c(0.0, 0.0),
            parity: Parity::Odd,
        };
        assert_eq!(cat_norm(&bogus).unwrap_err(), Error::DegenerateCat);
    }

    #[test]
    fn odd_cat_norm_small_amplitude() {
        // 2 - 2exp(-2x) = 4x(1 - x + ...) for x = |β|²
        let beta = 1e-5;
        let n = cat_norm(&CatTarget::odd(c(beta, 0.0)).unwrap()).unwrap();
        let x = beta * beta;
        let expect = (4.0 * x * (1.0 - x)).sqrt().recip();
        assert!((n - expect).abs() / expect < 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let beta = c(1.1, 0.3);
        let even = CatTarget::even(beta);
        let odd = CatTarget::odd(beta).unwrap();
        let rho_e = cat_state(&even);
        let rho_o = cat_state(&odd);
        assert!((fidelity_to_cat(&rho_e, &even).unwrap() - 1.0).abs() < 1e-13);
        assert!(fidelity_to_cat(&rho_o, &even).unwrap().abs() < 1e-13);

        let w = 0.37;
        let mut terms = rho_e.scaled(c(w, 0.0)).terms().to_vec();
        terms.extend_from_slice(rho_o.scaled(c(1.0 - w, 0.0)).terms());
        let mix = DyadState::from_terms(1, terms).unwrap();
        assert!((fidelity_to_cat(&mix, &even).unwrap() - w).abs() < 1e-13);
    }

    #[test]
    fn fidelity_errors() {
        let t = CatTarget::even(c(1.0, 0.0));
        assert_eq!(
            fidelity_to_cat(&DyadState::<f64>::empty(1), &t).unwrap_err(),
            Error::EmptyState
        );
        let two = DyadState::from_pure(&[Branch::new(
            Qubit::H,
            c(1.0, 0.0),
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        )])
        .unwrap();
        assert!(matches!(
            fidelity_to_cat(&two, &t),
            Err(Error::ModeCount { .. })
        ));
    }

    #[test]
    fn qubit_ops_and_partial_trace() {
        let st = DyadState::from_pure(&[
            Branch::new(Qubit::H, c(0.6, 0.0), vec![c(1.0, 0.0), c(0.5, 0.0)]),
            Branch::new(Qubit::V, c(0.0, 0.8), vec![c(-1.0, 0.0), c(0.5, 0.0)]),
        ])
        .unwrap();
        assert!((st.trace() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(st.is_hermitian(1e-15));
        let red = st.partial_trace_mode(1).unwrap();
        assert_eq!(red.n_modes(), 1);
        assert!((red.trace() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(st.partial_trace_mode(2).is_err());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d1 = st.project_qubit(c(s, 0.0), c(s, 0.0));
        let d2 = st.project_qubit(c(s, 0.0), c(-s, 0.0));
        assert!((d1.trace() + d2.trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn combine_cgs_symmetric_split_gives_even_cat() {
        let beta = c(1.0, 0.0);
        let half_pi = std::f64::consts::FRAC_PI_2;
        let out = combine_cgs(half_pi, half_pi, beta).unwrap();
        let target = CatTarget::even(beta * 2f64.sqrt());
        assert!((fidelity_to_cat(&out, &target).unwrap() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn overlap_magnitude(ar in -4.0..4.0f64, ai in -4.0..4.0f64, br in -4.0..4.0f64, bi in -4.0..4.0f64) {
            let (a, b) = (c(ar, ai), c(br, bi));
            let expect = (-(a - b).norm_sqr() / 2.0).exp();
            let got = overlap(a, b).norm();
            prop_assert!((got - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn beamsplitter_twice_scales_inputs(ar in -5.0..5.0f64, ai in -5.0..5.0f64, br in -5.0..5.0f64, bi in -5.0..5.0f64) {
            let (a, b) = (c(ar, ai), c(br, bi));
            let (p, q) = beamsplitter_5050(a, b);
            prop_assert!(((p.norm_sqr() + q.norm_sqr()) - (a.norm_sqr() + b.norm_sqr())).abs() < 1e-12);
            // the balanced splitter is its own inverse
            let (pp, qq) = beamsplitter_5050(p, q);
            prop_assert!((pp - a).norm() < 1e-12 && (qq - b).norm() < 1e-12);
        }

        #[test]
        fn fidelity_global_phase_invariant(br in -2.0..2.0f64, bi in -2.0..2.0f64, phase in -3.0..3.0f64, w in 0.0..1.0f64) {
            prop_assume!(br.abs() + bi.abs() > 0.1);
            let beta = c(br, bi);
            let even = CatTarget::even(beta);
            let mut terms = cat_state(&even).scaled(c(w, 0.0)).terms().to_vec();
            terms.extend_from_slice(cat_state(&CatTarget::odd(beta).unwrap()).scaled(c(1.0 - w, 0.0)).terms());
            let rho = DyadState::from_terms(1, terms).unwrap();
            let f0 = fidelity_to_cat(&rho, &even).unwrap();
            let f1 = fidelity_to_cat(&rho.scaled(cis(phase)), &even).unwrap();
            prop_assert!((f0 - f1).abs() < 1e-12);
        }

        #[test]
        fn hermitized_trace_is_real(ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, wr in -1.0..1.0f64, wi in -1.0..1.0f64) {
            let term = DyadTerm {
                qubit_row: Qubit::H,
                qubit_col: Qubit::H,
                ket_amps: vec![c(ar, ai)],
                bra_amps: vec![c(br, 0.3)],
                weight: c(wr, wi),
            };
            let st = DyadState::from_terms(1, vec![term]).unwrap().hermitize();
            prop_assert!(st.trace().im.abs() < 1e-12);
            prop_assert!(st.is_hermitian(1e-15));
        }
    }
}
