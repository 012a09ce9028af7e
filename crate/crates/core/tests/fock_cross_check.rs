use catforge::closed_form::coherence_c;
use catforge::coherent::{Branch, Qubit};
use catforge::engine::{double_xpm_input, evolve_sliced, ChannelConfig, XpmParams};
use catforge::fock::{default_step, extract_coherence, integrate, min_eigenvalue, trace_distance};
use catforge::{Complex, FockDensity64};

fn input(alpha: f64, cut: usize) -> FockDensity64 {
    let r = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let a = Complex::new(alpha, 0.0);
    FockDensity64::from_pure(
        &[
            Branch::new(Qubit::H, r, vec![a, a]),
            Branch::new(Qubit::V, r, vec![a, a]),
        ],
        [cut, cut],
    )
    .unwrap()
}

fn oracle(alpha: f64, big_gamma: f64, tau: f64, cut: usize) -> FockDensity64 {
    let p = XpmParams::dimensionless(big_gamma, tau).unwrap();
    let cfg = ChannelConfig::double_xpm(&p, tau, tau).unwrap();
    integrate(&input(alpha, cut), &cfg, tau, default_step(&cfg, [cut, cut])).unwrap()
}

fn engine_density(alpha: f64, big_gamma: f64, tau: f64, slices: usize, cut: usize) -> FockDensity64 {
    let p = XpmParams::dimensionless(big_gamma, tau).unwrap();
    let cfg = ChannelConfig::double_xpm(&p, tau, tau).unwrap();
    let state = double_xpm_input(Complex::new(alpha, 0.0)).unwrap();
    let out = evolve_sliced(&state, &cfg, slices).unwrap();
    FockDensity64::from_dyads(&out, [cut, cut]).unwrap()
}

#[test]
fn engine_and_oracle_coherence_agree_at_unit_amplitude() {
    for &(g, tau) in &[(0.5, 0.3), (1.0, 0.2), (2.0, 0.5), (1.0, 1.0)] {
        let rho = oracle(1.0, g, tau, 16);
        let c_oracle = extract_coherence(&rho).unwrap();
        let p = XpmParams::dimensionless(g, tau).unwrap();
        let cfg = ChannelConfig::double_xpm(&p, tau, tau).unwrap();
        let dy = evolve_sliced(&double_xpm_input(Complex::new(1.0, 0.0)).unwrap(), &cfg, 1_000_000).unwrap();
        let c_engine = dy.qubit_coherence().unwrap();
        assert!((c_oracle - c_engine).norm() < 1e-6, "Γ={g} τ={tau}: {c_oracle} vs {c_engine}");
        assert!(c_oracle.im.abs() < 1e-8);
        let exact = coherence_c(1.0, g, tau).unwrap();
        assert!((c_oracle.re - exact).abs() < 1e-6);
    }
}

#[test]
fn doubling_cutoff_leaves_coherence_unchanged() {
    let a = extract_coherence(&oracle(1.0, 1.0, 0.3, 12)).unwrap();
    let b = extract_coherence(&oracle(1.0, 1.0, 0.3, 24)).unwrap();
    assert!((a - b).norm() < 1e-8, "{a} vs {b}");
}

#[test]
fn engine_state_is_close_in_trace_distance() {
    for &g in &[0.5, 1.0, 2.0] {
        for &tau in &[0.2, 0.5] {
            let rho = oracle(1.5, g, tau, 20);
            let dy = engine_density(1.5, g, tau, 100_000, 20);
            let d = trace_distance(&rho, &dy).unwrap();
            assert!(d < 1e-5, "Γ={g} τ={tau}: {d}");
        }
    }
}

#[test]
fn oracle_output_is_positive_and_trace_preserving() {
    let rho = oracle(1.0, 2.0, 0.5, 14);
    assert!(min_eigenvalue(&rho) >= -1e-8);
    assert!((rho.trace() - Complex::new(1.0, 0.0)).norm() < 1e-8);
    assert!(rho.hermiticity_error() < 1e-10);
}
