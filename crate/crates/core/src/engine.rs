//! Time-sliced evolution of dyad states under cross-Kerr coupling and photon
//! loss, plus the single- and double-XPM pipelines built on it.
//!
//! Each slice applies two exact maps per channel: the conditional Kerr
//! rotation `|a⟩ -> |a·e^{iχΔt}⟩` on the branch where the coupled qubit
//! component is occupied, then the finite-step loss channel
//!
//! ```text
//! |a⟩⟨b| -> exp{(1 - e^{-γΔt})(b*·a - |a|²/2 - |b|²/2)} · |a·s⟩⟨b·s|,   s = e^{-γΔt/2}
//! ```
//!
//! Both maps are exact, so the only error in the product is the operator
//! splitting between them, which is first order in `Δt`.

use crate::coherent::{
    beamsplitter_5050, displace, fidelity_to_cat, Branch, CatTarget, DyadState, DyadTerm, Qubit,
};
use crate::error::{non_negative, Error, Result};
use crate::scalar::{cis, Complex, Real};

/// Relative weight below which dyad terms are dropped between slices.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Kerr strength `chi`, damping rate `gamma` and interaction time `t`.
///
/// Dimensionless views: `tau = gamma·t`, `big_gamma = chi/gamma`,
/// `theta = chi·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XpmParams<T> {
    chi: T,
    gamma: T,
    t: T,
}

impl<T: Real> XpmParams<T> {
    pub fn new(chi: T, gamma: T, t: T) -> Result<Self> {
        non_negative("chi", chi)?;
        non_negative("gamma", gamma)?;
        non_negative("t", t)?;
        Ok(Self { chi, gamma, t })
    }

    /// Units where `gamma = 1`, so `t = tau` and `chi = big_gamma`.
    pub fn dimensionless(big_gamma: T, tau: T) -> Result<Self> {
        Self::new(big_gamma, T::one(), tau)
    }

    /// No photon loss; the Kerr phase accumulated over the run is `theta`.
    pub fn lossless(theta: T) -> Result<Self> {
        Self::new(theta, T::zero(), T::one())
    }

    pub fn chi(&self) -> T {
        self.chi
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn tau(&self) -> T {
        self.gamma * self.t
    }

    /// `chi / gamma`; infinite when lossless.
    pub fn big_gamma(&self) -> T {
        self.chi / self.gamma
    }

    pub fn theta(&self) -> T {
        self.chi * self.t
    }

    /// Copy with a different interaction time.
    pub fn with_time(&self, t: T) -> Result<Self> {
        Self::new(self.chi, self.gamma, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QubitLossMode {
    /// Drop the decay factor common to all qubit terms.
    #[default]
    Neglect,
    /// Keep it as a factor `e^{-γt}` on the herald probability.
    CommonDecay,
}

/// One XPM process: coherent `mode` coupled to the `qubit` rail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub mode: usize,
    pub qubit: Qubit,
    pub chi: T,
    pub gamma: T,
    pub duration: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig<T> {
    channels: Vec<Channel<T>>,
    pub qubit_loss: QubitLossMode,
}

impl<T: Real> ChannelConfig<T> {
    pub fn new(channels: Vec<Channel<T>>, qubit_loss: QubitLossMode) -> Result<Self> {
        for (i, c) in channels.iter().enumerate() {
            non_negative("chi", c.chi)?;
            non_negative("gamma", c.gamma)?;
            non_negative("duration", c.duration)?;
            if channels[..i].iter().any(|o| o.mode == c.mode) {
                return Err(Error::DuplicateCoupling(c.mode));
            }
        }
        Ok(Self {
            channels,
            qubit_loss,
        })
    }

    /// Mode 0 on the `H` rail and mode 1 on the `V` rail, for `t1` and `t2`.
    pub fn double_xpm(params: &XpmParams<T>, t1: T, t2: T) -> Result<Self> {
        Self::new(
            vec![
                Channel {
                    mode: 0,
                    qubit: Qubit::H,
                    chi: params.chi,
                    gamma: params.gamma,
                    duration: t1,
                },
                Channel {
                    mode: 1,
                    qubit: Qubit::V,
                    chi: params.chi,
                    gamma: params.gamma,
                    duration: t2,
                },
            ],
            QubitLossMode::Neglect,
        )
    }

    /// Mode 0 on the `H` rail only.
    pub fn single_xpm(params: &XpmParams<T>) -> Result<Self> {
        Self::new(
            vec![Channel {
                mode: 0,
                qubit: Qubit::H,
                chi: params.chi,
                gamma: params.gamma,
                duration: params.t,
            }],
            QubitLossMode::Neglect,
        )
    }

    pub fn with_qubit_loss(mut self, mode: QubitLossMode) -> Self {
        self.qubit_loss = mode;
        self
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }
}

/// Conditional Kerr rotation by `phase` of `mode` on the `qubit` branch.
pub fn slice_kerr<T: Real>(
    state: &DyadState<T>,
    mode: usize,
    qubit: Qubit,
    phase: T,
) -> Result<DyadState<T>> {
    if mode >= state.n_modes() {
        return Err(Error::UnknownMode {
            mode,
            n_modes: state.n_modes(),
        });
    }
    let u = cis(phase);
    Ok(state.map_terms(|t| {
        if t.qubit_row == qubit {
            t.ket_amps[mode] = t.ket_amps[mode] * u;
        }
        if t.qubit_col == qubit {
            t.bra_amps[mode] = t.bra_amps[mode] * u;
        }
    }))
}

/// Exact loss channel of strength `gamma_dt = γΔt` on `mode`.
pub fn slice_loss<T: Real>(state: &DyadState<T>, mode: usize, gamma_dt: T) -> Result<DyadState<T>> {
    non_negative("gamma_dt", gamma_dt)?;
    if mode >= state.n_modes() {
        return Err(Error::UnknownMode {
            mode,
            n_modes: state.n_modes(),
        });
    }
    let lost = -(-gamma_dt).exp_m1();
    let s = (-gamma_dt * T::lit(0.5)).exp();
    let half = T::lit(0.5);
    Ok(state.map_terms(|t| {
        let a = t.ket_amps[mode];
        let b = t.bra_amps[mode];
        let re = -(a - b).norm_sqr() * half * lost;
        let im = (b.conj() * a).im * lost;
        t.weight = t.weight * cis(im) * re.exp();
        t.ket_amps[mode] = a * s;
        t.bra_amps[mode] = b * s;
    }))
}

/// Applies `n_slices` rounds of (Kerr, then loss) for every channel. Each
/// channel's slice width is its own `duration / n_slices`.
pub fn evolve_sliced<T: Real>(
    state: &DyadState<T>,
    cfg: &ChannelConfig<T>,
    n_slices: usize,
) -> Result<DyadState<T>> {
    if n_slices == 0 {
        return Err(Error::NoSlices);
    }
    let n = T::from_count(n_slices);
    let steps: Vec<(usize, Qubit, T, T)> = cfg
        .channels
        .iter()
        .map(|c| {
            let dt = c.duration / n;
            (c.mode, c.qubit, c.chi * dt, c.gamma * dt)
        })
        .collect();
    for &(mode, _, _, _) in &steps {
        if mode >= state.n_modes() {
            return Err(Error::UnknownMode {
                mode,
                n_modes: state.n_modes(),
            });
        }
    }
    let prune = T::lit(PRUNE_THRESHOLD);
    let mut rho = state.clone();
    for _ in 0..n_slices {
        for &(mode, qubit, phase, gamma_dt) in &steps {
            rho = slice_kerr(&rho, mode, qubit, phase)?;
            rho = slice_loss(&rho, mode, gamma_dt)?;
        }
        rho = rho.pruned(prune);
    }
    Ok(rho)
}

/// Weights of the heralded state on the even and odd cats of `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatMixture<T> {
    pub even: T,
    pub odd: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutput<T> {
    pub cat_mixture: CatMixture<T>,
    /// Cat amplitude: the difference-port amplitude of the `H` branch.
    pub beta: Complex<T>,
    /// Sum-port amplitude of the `H` branch.
    pub gamma_out: Complex<T>,
    /// Sum-port amplitude of the `V` branch; equals `gamma_out` when the two
    /// channels are symmetric.
    pub gamma_out_v: Complex<T>,
    pub coherence_c: Complex<T>,
    /// Probability of a `D₁` click, including `success_decay_factor`.
    pub herald_probability: T,
    pub herald_probability_d2: T,
    pub success_decay_factor: T,
    /// Normalized difference-port state after a `D₁` click.
    pub heralded_state: DyadState<T>,
}

/// `|ψ⟩ = (|H⟩ + |V⟩)/√2 ⊗ |α⟩₁|α⟩₂`
pub fn double_xpm_input<T: Real>(alpha: Complex<T>) -> Result<DyadState<T>> {
    let r = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    DyadState::from_pure(&[
        Branch::new(Qubit::H, r, vec![alpha, alpha]),
        Branch::new(Qubit::V, r, vec![alpha, alpha]),
    ])
}

/// Ideal (sum, difference) port amplitudes of the symmetric scheme,
/// `α·e^{-γt/2}(e^{iχt} ± 1)/√2`.
pub fn ideal_ports<T: Real>(alpha: Complex<T>, params: &XpmParams<T>) -> (Complex<T>, Complex<T>) {
    let a = (-params.tau() * T::lit(0.5)).exp();
    let rotated = alpha * cis(params.theta()) * a;
    beamsplitter_5050(rotated, alpha * a)
}

fn check_amplitude<T: Real>(alpha: Complex<T>) -> Result<()> {
    if alpha.re.is_finite() && alpha.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput {
            name: "alpha (finite)",
            value: alpha.norm().as_f64(),
        })
    }
}

fn diagonal_amps<T: Real>(state: &DyadState<T>, q: Qubit) -> Result<Vec<Complex<T>>> {
    state
        .terms()
        .iter()
        .find(|t| t.qubit_row == q && t.qubit_col == q)
        .map(|t| t.ket_amps.clone())
        .ok_or(Error::VanishingBlock(match q {
            Qubit::H => "HH",
            Qubit::V => "VV",
        }))
}

fn herald<T: Real>(
    evolved: &DyadState<T>,
    beta: Complex<T>,
    qubit_loss: QubitLossMode,
    decay_time: T,
    gamma: T,
) -> Result<SchemeOutput<T>> {
    let coherence_c = evolved.qubit_coherence()?;
    let ports = evolved.beamsplitter(0, 1)?;
    let gamma_out = diagonal_amps(&ports, Qubit::H)?[0];
    let gamma_out_v = diagonal_amps(&ports, Qubit::V)?[0];

    let r = T::FRAC_1_SQRT_2();
    let d1 = ports.project_qubit(Complex::new(r, T::zero()), Complex::new(r, T::zero()));
    let d2 = ports.project_qubit(Complex::new(r, T::zero()), Complex::new(-r, T::zero()));
    let p1 = d1.trace().re;
    let p2 = d2.trace().re;
    if !(p1 > T::zero()) {
        return Err(Error::ZeroHeraldProbability);
    }

    let heralded_state = d1.partial_trace_mode(0)?.normalized()?;
    let even = fidelity_to_cat(&heralded_state, &CatTarget::even(beta))?;
    let odd = match CatTarget::odd(beta) {
        Ok(t) => fidelity_to_cat(&heralded_state, &t)?,
        Err(_) => T::zero(),
    };

    let success_decay_factor = match qubit_loss {
        QubitLossMode::Neglect => T::one(),
        QubitLossMode::CommonDecay => (-gamma * decay_time).exp(),
    };

    Ok(SchemeOutput {
        cat_mixture: CatMixture { even, odd },
        beta,
        gamma_out,
        gamma_out_v,
        coherence_c,
        herald_probability: p1 * success_decay_factor,
        herald_probability_d2: p2 * success_decay_factor,
        success_decay_factor,
        heralded_state,
    })
}

/// Double-XPM pipeline: symmetric evolution of both channels, the
/// coherent-mode beam splitter, the qubit beam splitter and a `D₁` click,
/// with `D₁ ≡ (|H⟩+|V⟩)/√2`.
pub fn run_double_xpm<T: Real>(
    alpha: Complex<T>,
    params: &XpmParams<T>,
    n_slices: usize,
) -> Result<SchemeOutput<T>> {
    run_double_xpm_with(alpha, params, n_slices, QubitLossMode::Neglect)
}

pub fn run_double_xpm_with<T: Real>(
    alpha: Complex<T>,
    params: &XpmParams<T>,
    n_slices: usize,
    qubit_loss: QubitLossMode,
) -> Result<SchemeOutput<T>> {
    check_amplitude(alpha)?;
    let cfg = ChannelConfig::double_xpm(params, params.t, params.t)?.with_qubit_loss(qubit_loss);
    let evolved = evolve_sliced(&double_xpm_input(alpha)?, &cfg, n_slices)?;
    let (_, beta) = ideal_ports(alpha, params);
    herald(&evolved, beta, qubit_loss, params.t, params.gamma)
}

/// `arg⟨cat|ρ_HV|cat⟩` of the difference-port state once the sum port is
/// traced out: the relative phase unequal channels leave between the `H`
/// and `V` branches, as seen by `target`.
pub fn branch_phase<T: Real>(evolved: &DyadState<T>, target: &CatTarget<T>) -> Result<T> {
    let port = evolved.beamsplitter(0, 1)?.partial_trace_mode(0)?;
    let cross: Vec<DyadTerm<T>> = port
        .terms()
        .iter()
        .filter(|t| t.qubit_row == Qubit::H && t.qubit_col == Qubit::V)
        .map(|t| DyadTerm {
            qubit_col: Qubit::H,
            ..t.clone()
        })
        .collect();
    let psi: Vec<_> = target
        .branches()?
        .iter()
        .map(|&(c, a)| (c, vec![a]))
        .collect();
    let z = DyadState::from_terms(1, cross)?.expectation_pure(&psi);
    Ok(z.im.atan2(z.re))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricOutput<T> {
    pub output: SchemeOutput<T>,
    /// Even-cat fidelity against the cat of the symmetric design.
    pub fidelity: T,
    /// Phase applied to the `V` branch to cancel the asymmetry-induced
    /// relative phase; zero for equal times.
    pub compensation: T,
    /// Even-cat fidelity without that correction (`phi_e` still applied).
    pub uncompensated_fidelity: T,
}

/// Double-XPM pipeline with channel 1 running for `t1` and channel 2 for
/// `t2`. Unequal times leave a deterministic relative phase between the
/// qubit branches (mostly from the entangled sum port); it is cancelled
/// with a phase on `V`, after which `phi_e` is applied as the residual
/// relative phase. Fidelities refer to the even cat of the symmetric
/// design `params`.
pub fn run_asymmetric_detailed<T: Real>(
    alpha: Complex<T>,
    params: &XpmParams<T>,
    t1: T,
    t2: T,
    phi_e: T,
    n_slices: usize,
) -> Result<AsymmetricOutput<T>> {
    check_amplitude(alpha)?;
    non_negative("t1", t1)?;
    non_negative("t2", t2)?;
    let cfg = ChannelConfig::double_xpm(params, t1, t2)?;
    let evolved = evolve_sliced(&double_xpm_input(alpha)?, &cfg, n_slices)?;
    let (_, beta) = ideal_ports(alpha, params);
    let target = CatTarget::even(beta);
    let compensation = if t1 == t2 {
        T::zero()
    } else {
        branch_phase(&evolved, &target)?
    };
    let with_phase = |phase: T| {
        if phase == T::zero() {
            evolved.clone()
        } else {
            evolved.qubit_phase(Qubit::V, phase)
        }
    };
    let herald_at = |phase: T| herald(&with_phase(phase), beta, QubitLossMode::Neglect, params.t, params.gamma);
    let output = herald_at(compensation + phi_e)?;
    let uncompensated_fidelity = if compensation == T::zero() {
        output.cat_mixture.even
    } else {
        herald_at(phi_e)?.cat_mixture.even
    };
    Ok(AsymmetricOutput {
        fidelity: output.cat_mixture.even,
        output,
        compensation,
        uncompensated_fidelity,
    })
}

/// [`run_asymmetric_detailed`] reduced to the scheme output and fidelity.
pub fn run_asymmetric<T: Real>(
    alpha: Complex<T>,
    params: &XpmParams<T>,
    t1: T,
    t2: T,
    phi_e: T,
    n_slices: usize,
) -> Result<(SchemeOutput<T>, T)> {
    let r = run_asymmetric_detailed(alpha, params, t1, t2, phi_e, n_slices)?;
    Ok((r.output, r.fidelity))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleXpmOutput<T> {
    pub coherence_c: Complex<T>,
    /// `A·α`, the branch without the photon.
    pub branch_uncoupled: Complex<T>,
    /// `A·α·e^{iθ}`, the branch with the photon.
    pub branch_coupled: Complex<T>,
    /// `x = -(branch_uncoupled + branch_coupled)/2`.
    pub displacement: Complex<T>,
    /// `branch_uncoupled + x`; the coupled branch lands on `-beta`.
    pub beta: Complex<T>,
    /// Relative phase the displacement imprints between the two branches.
    pub displacement_phase: T,
}

/// Single-XPM pipeline: one coherent mode coupled to the `H` rail.
pub fn run_single_xpm<T: Real>(
    alpha: Complex<T>,
    params: &XpmParams<T>,
    n_slices: usize,
) -> Result<SingleXpmOutput<T>> {
    check_amplitude(alpha)?;
    let r = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let input = DyadState::from_pure(&[
        Branch::new(Qubit::H, r, vec![alpha]),
        Branch::new(Qubit::V, r, vec![alpha]),
    ])?;
    let cfg = ChannelConfig::single_xpm(params)?;
    let evolved = evolve_sliced(&input, &cfg, n_slices)?;
    let coherence_c = evolved.qubit_coherence()?;
    let branch_coupled = diagonal_amps(&evolved, Qubit::H)?[0];
    let branch_uncoupled = diagonal_amps(&evolved, Qubit::V)?[0];
    let displacement = -(branch_uncoupled + branch_coupled) * T::lit(0.5);
    let (beta, phase_u) = displace(branch_uncoupled, displacement);
    let (_, phase_c) = displace(branch_coupled, displacement);
    Ok(SingleXpmOutput {
        coherence_c,
        branch_uncoupled,
        branch_coupled,
        displacement,
        beta,
        displacement_phase: phase_c - phase_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::DyadTerm;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// `exp{-2|α|²·∫₀^τ e^{-s}(1 - cos Γs) ds}` by composite Simpson.
    fn c_by_quadrature(alpha_sq: f64, big_gamma: f64, tau: f64) -> f64 {
        let n = 20_000;
        let h = tau / n as f64;
        let f = |s: f64| (-s).exp() * (1.0 - (big_gamma * s).cos());
        let mut acc = f(0.0) + f(tau);
        for k in 1..n {
            acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        (-2.0 * alpha_sq * acc * h / 3.0).exp()
    }

    fn single_mode(q: Qubit, a: Complex<f64>) -> DyadState<f64> {
        DyadState::from_pure(&[Branch::new(q, c(1.0, 0.0), vec![a])]).unwrap()
    }

    #[test]
    fn kerr_identity_and_rotation() {
        let a = c(1.3, 0.2);
        let st = single_mode(Qubit::H, a);
        assert_eq!(slice_kerr(&st, 0, Qubit::H, 0.0).unwrap(), st);
        let th = 0.37;
        let out = slice_kerr(&st, 0, Qubit::H, th).unwrap();
        let t = &out.terms()[0];
        assert!((t.ket_amps[0] - a * cis(th)).norm() < 1e-15);
        assert!((t.bra_amps[0] - a * cis(th)).norm() < 1e-15);
        assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-15);
        // V branch is untouched by an H-coupled rotation
        let other = slice_kerr(&single_mode(Qubit::V, a), 0, Qubit::H, th).unwrap();
        assert_eq!(other.terms()[0].ket_amps[0], a);
        assert!(matches!(
            slice_kerr(&st, 3, Qubit::H, th),
            Err(Error::UnknownMode { .. })
        ));
    }

    #[test]
    fn kerr_cross_dyad_rotates_coupled_side_only() {
        let a = c(0.9, 0.0);
        let st = double_xpm_input(a).unwrap();
        let th = 0.25;
        let out = slice_kerr(&st, 0, Qubit::H, th).unwrap();
        let hv = out
            .terms()
            .iter()
            .find(|t| t.qubit_row == Qubit::H && t.qubit_col == Qubit::V)
            .unwrap();
        assert!((hv.ket_amps[0] - a * cis(th)).norm() < 1e-15);
        assert_eq!(hv.bra_amps[0], a);
        assert_eq!(hv.ket_amps[1], a);
    }

    #[test]
    fn loss_examples() {
        let a = c(1.1, -0.4);
        let st = single_mode(Qubit::H, a);
        assert_eq!(slice_loss(&st, 0, 0.0).unwrap(), st);
        let out = slice_loss(&st, 0, 0.3).unwrap();
        let s = (-0.15f64).exp();
        let t = &out.terms()[0];
        assert!((t.ket_amps[0] - a * s).norm() < 1e-15);
        assert!((t.weight - c(1.0, 0.0)).norm() < 1e-15);
        assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-14);
        assert!(matches!(
            slice_loss(&st, 0, -0.1),
            Err(Error::NegativeInput { .. })
        ));
    }

    #[test]
    fn first_slice_gives_real_c1() {
        let alpha = c(1.7, 0.6);
        let (chi_dt, gamma_dt) = (0.31, 0.12);
        let st = double_xpm_input(alpha).unwrap();
        let st = slice_kerr(&st, 0, Qubit::H, chi_dt).unwrap();
        let st = slice_kerr(&st, 1, Qubit::V, chi_dt).unwrap();
        let st = slice_loss(&st, 0, gamma_dt).unwrap();
        let st = slice_loss(&st, 1, gamma_dt).unwrap();
        let c1 = st.qubit_coherence().unwrap();
        let expect = (-(1.0 - (-gamma_dt).exp()) * (alpha * cis(chi_dt) - alpha).norm_sqr()).exp();
        assert!((c1.re - expect).abs() < 1e-14);
        assert!(c1.im.abs() < 1e-15);
    }

    #[test]
    fn single_slice_weight_matches_loss_formula() {
        // |a⟩⟨b| under loss picks up ⟨b'|a'⟩ for the lost amplitudes
        let (a, b) = (c(0.8, 0.3), c(-0.2, 0.5));
        let term = DyadTerm {
            qubit_row: Qubit::H,
            qubit_col: Qubit::H,
            ket_amps: vec![a],
            bra_amps: vec![b],
            weight: c(1.0, 0.0),
        };
        let st = DyadState::from_terms(1, vec![term]).unwrap();
        let g = 0.4;
        let out = slice_loss(&st, 0, g).unwrap();
        let l = 1.0 - (-g).exp();
        let expect = (l * (b.conj() * a - a.norm_sqr() / 2.0 - b.norm_sqr() / 2.0)).exp();
        assert!((out.terms()[0].weight - expect).norm() < 1e-15);
        // trace of the whole dyad is preserved: ⟨b|a⟩ before = w·⟨bs|as⟩ after
        assert!((out.trace() - st.trace()).norm() < 1e-15);
    }

    #[test]
    fn zero_width_slices_are_identity() {
        let st = double_xpm_input(c(1.0, 0.5)).unwrap();
        let p = XpmParams::new(0.0, 0.0, 1.0).unwrap();
        let cfg = ChannelConfig::double_xpm(&p, 1.0, 1.0).unwrap();
        assert_eq!(evolve_sliced(&st, &cfg, 1).unwrap(), st);
        assert_eq!(evolve_sliced(&st, &cfg, 0).unwrap_err(), Error::NoSlices);
    }

    #[test]
    fn duplicate_coupling_rejected() {
        let p = XpmParams::dimensionless(1.0, 0.1).unwrap();
        let ch = ChannelConfig::double_xpm(&p, 0.1, 0.1).unwrap().channels()[0];
        assert_eq!(
            ChannelConfig::new(vec![ch, ch], QubitLossMode::Neglect).unwrap_err(),
            Error::DuplicateCoupling(0)
        );
    }

    #[test]
    fn engine_c_matches_quadrature() {
        let p = XpmParams::dimensionless(1.0, 0.2).unwrap();
        let out = run_double_xpm(c(1.5, 0.0), &p, 2000).unwrap();
        let expect = c_by_quadrature(2.25, 1.0, 0.2);
        assert!((expect - 0.99485).abs() < 1e-5);
        assert!((out.coherence_c.re - expect).abs() < 1e-3);
        assert!(out.coherence_c.im.abs() <= 1e-10 * out.coherence_c.re);
    }

    #[test]
    fn halving_slice_width_halves_error() {
        let p = XpmParams::dimensionless(1.0, 0.2).unwrap();
        let exact = c_by_quadrature(2.25, 1.0, 0.2);
        let err = |n| (run_double_xpm(c(1.5, 0.0), &p, n).unwrap().coherence_c.re - exact).abs();
        let ratio = err(500) / err(1000);
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn lossless_run_is_pure_even_cat() {
        let p = XpmParams::lossless(0.9).unwrap();
        let out = run_double_xpm(c(2.0, 0.0), &p, 50).unwrap();
        assert_eq!(out.coherence_c, c(1.0, 0.0));
        assert!((out.cat_mixture.even - 1.0).abs() < 1e-12);
        assert!(out.cat_mixture.odd.abs() < 1e-12);
    }

    #[test]
    fn symmetric_run_ports_and_weights() {
        let alpha = c(1.5, 0.0);
        let p = XpmParams::dimensionless(1.0, 0.2).unwrap();
        let out = run_double_xpm(alpha, &p, 2000).unwrap();
        let beta_sq = 2.0 * (-0.2f64).exp() * 0.1f64.sin().powi(2) * 2.25;
        assert!((out.beta.norm_sqr() - beta_sq).abs() < 1e-13);
        let g = (cis(1.0 * 0.2) * (-0.1f64).exp() + (-0.1f64).exp()) * alpha / 2f64.sqrt();
        assert!((out.gamma_out - g).norm() < 1e-12);
        assert_eq!(out.gamma_out, out.gamma_out_v);

        // exact weights: (1±C)/2 reweighted by the unnormalized cat norms
        let cc = out.coherence_c.re;
        let ov = (-2.0 * beta_sq).exp();
        let (we, wo) = ((1.0 + cc) * (1.0 + ov), (1.0 - cc) * (1.0 - ov));
        assert!((out.cat_mixture.even - we / (we + wo)).abs() < 1e-12);
        assert!((out.cat_mixture.even + out.cat_mixture.odd - 1.0).abs() < 1e-12);
        assert!((out.herald_probability + out.herald_probability_d2 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn common_decay_scales_herald_only() {
        let alpha = c(1.2, 0.0);
        let p = XpmParams::dimensionless(2.0, 0.3).unwrap();
        let a = run_double_xpm(alpha, &p, 200).unwrap();
        let b = run_double_xpm_with(alpha, &p, 200, QubitLossMode::CommonDecay).unwrap();
        assert!((b.success_decay_factor - (-0.3f64).exp()).abs() < 1e-15);
        assert!(
            (b.herald_probability + b.herald_probability_d2 - b.success_decay_factor).abs() < 1e-13
        );
        assert_eq!(a.cat_mixture, b.cat_mixture);
        assert_eq!(a.heralded_state, b.heralded_state);
    }

    #[test]
    fn asymmetric_zero_deviation_is_bitwise_symmetric() {
        let alpha = c(1.4, 0.1);
        let p = XpmParams::dimensionless(1.5, 0.25).unwrap();
        let sym = run_double_xpm(alpha, &p, 300).unwrap();
        let (asym, fid) = run_asymmetric(alpha, &p, 0.25, 0.25, 0.0, 300).unwrap();
        assert_eq!(sym, asym);
        assert_eq!(fid, sym.cat_mixture.even);
    }

    #[test]
    fn compensation_maximizes_fidelity_at_design_point() {
        // F = 0.99, |β| = 1.6, Γ = 25 design, second channel 10% longer
        let (alpha_sq, tau) = (60.2817940, 0.0117686037);
        let alpha = c(f64::sqrt(alpha_sq), 0.0);
        let p = XpmParams::dimensionless(25.0, tau).unwrap();
        let r = run_asymmetric_detailed(alpha, &p, tau, 1.1 * tau, 0.0, 2000).unwrap();
        assert!(r.fidelity > 0.95, "{}", r.fidelity);
        assert!(r.uncompensated_fidelity < r.fidelity);
        assert!(r.compensation.abs() > 1.0);
        // brute-force scan of the residual phase
        let best = (-40..=40)
            .map(|k| {
                run_asymmetric(alpha, &p, tau, 1.1 * tau, k as f64 * 0.02, 2000)
                    .unwrap()
                    .1
            })
            .fold(0.0, f64::max);
        assert!(r.fidelity > best - 2e-3, "{} vs {best}", r.fidelity);
    }

    #[test]
    fn phase_pi_swaps_heralded_parity() {
        let alpha = c(1.4, 0.0);
        let p = XpmParams::dimensionless(1.5, 0.25).unwrap();
        let sym = run_double_xpm(alpha, &p, 300).unwrap();
        let (out, fid) = run_asymmetric(alpha, &p, 0.25, 0.25, std::f64::consts::PI, 300).unwrap();
        // D₁ now heralds what D₂ heralds in the symmetric run
        let cc = sym.coherence_c.re;
        let ov = (-2.0 * sym.beta.norm_sqr()).exp();
        let (we, wo) = ((1.0 - cc) * (1.0 + ov), (1.0 + cc) * (1.0 - ov));
        assert!((fid - we / (we + wo)).abs() < 1e-12);
        assert!(out.cat_mixture.odd > out.cat_mixture.even);
        assert!((out.herald_probability - sym.herald_probability_d2).abs() < 1e-12);
    }

    #[test]
    fn single_xpm_lossless_and_branches() {
        let alpha = c(3.0, 0.0);
        let p = XpmParams::lossless(0.4).unwrap();
        let out = run_single_xpm(alpha, &p, 100).unwrap();
        assert_eq!(out.coherence_c, c(1.0, 0.0));

        let p = XpmParams::dimensionless(1.0, 0.2).unwrap();
        let out = run_single_xpm(alpha, &p, 400).unwrap();
        let a = (-0.1f64).exp();
        assert!((out.branch_uncoupled - alpha * a).norm() < 1e-12);
        assert!((out.branch_coupled - alpha * a * cis(0.2)).norm() < 1e-12);
        let (minus_beta, _) = displace(out.branch_coupled, out.displacement);
        assert!((minus_beta + out.beta).norm() < 1e-12);
        // |β|² = A²|α|²sin²(θ/2), half of the double-XPM cat size
        let expect = a * a * 9.0 * 0.1f64.sin().powi(2);
        assert!((out.beta.norm_sqr() - expect).abs() < 1e-12);
    }

    #[test]
    fn single_xpm_magnitude_is_half_the_double_exponent() {
        let alpha = c(1.5, 0.0);
        let p = XpmParams::dimensionless(1.0, 0.2).unwrap();
        let single = run_single_xpm(alpha, &p, 1000).unwrap();
        let double = run_double_xpm(alpha, &p, 1000).unwrap();
        assert!((single.coherence_c.norm_sqr() - double.coherence_c.re).abs() < 1e-13);
        assert!(single.coherence_c.im.abs() > 1e-6);
    }
}
