use std::fmt;

use catforge::closed_form::{coherence_c, discrimination_efficiency};
use catforge::coherent::{Branch, Qubit};
use catforge::design::{
    design, sweep_curves, CurveKind, DesignResult, DesignSpec, TauGrid, UnitMode, TABLE_BETA,
    TABLE_FIDELITY, TABLE_GAMMA_RATIOS,
};
use catforge::engine::{
    double_xpm_input, evolve_sliced, run_asymmetric_detailed, run_double_xpm_with, ChannelConfig,
    QubitLossMode, SchemeOutput, XpmParams,
};
use catforge::fock::{default_step, extract_coherence, integrate, trace_distance, FockDensity};
use catforge::Error;
use num_complex::Complex64;
use serde_json::Value;

use crate::args::*;
use crate::plot::{line_chart, Series};
use crate::report::{complex, emit, emit_json, num, object, parse_complex, sci};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_SOLUTION: i32 = 3;
pub const EXIT_ENGINE: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

pub const VERIFY_C_TOL: f64 = 1e-3;
pub const VERIFY_TRACE_DISTANCE_TOL: f64 = 1e-5;
pub const VERIFY_MAX_ALPHA: f64 = 2.0;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn engine(e: impl fmt::Display) -> Self {
        Self {
            code: EXIT_ENGINE,
            message: e.to_string(),
        }
    }

    fn io(e: std::io::Error) -> Self {
        Self {
            code: EXIT_ENGINE,
            message: format!("cannot write output: {e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn finite(name: &str, x: f64) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::usage(format!("--{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, Failure> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<f64, Failure> {
    if finite(name, x)? >= 0.0 {
        Ok(x)
    } else {
        Err(Failure::usage(format!("--{name} must be non-negative, got {x}")))
    }
}

fn amplitude(name: &str, s: &str) -> Result<Complex64, Failure> {
    parse_complex(s).map_err(|e| Failure::usage(format!("--{name}: {e}")))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Design(a) => cmd_design(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Discriminate(a) => cmd_discriminate(a),
    }
}

fn design_failure(e: Error) -> Failure {
    match e {
        Error::NoSolution { .. } | Error::Pole { .. } => Failure {
            code: EXIT_NO_SOLUTION,
            message: e.to_string(),
        },
        Error::InvalidDesign(_) | Error::NonPositiveInput { .. } | Error::NegativeInput { .. } => {
            Failure::usage(e.to_string())
        }
        e => Failure::engine(e),
    }
}

fn design_json(spec: &DesignSpec<f64>, r: &DesignResult<f64>) -> Value {
    let mut fields = vec![
        ("gamma_ratio", num(r.big_gamma)),
        ("tau_int", num(r.tau_int)),
        ("alpha_sq", num(r.alpha_sq)),
        ("achieved_C", num(r.achieved_c)),
        ("achieved_F", num(r.achieved_f)),
        ("unit_mode", Value::from(r.unit_mode.as_str())),
        ("fidelity", num(spec.fidelity)),
        ("beta", num(spec.beta_abs)),
        ("identity_residual", num(r.identity_residual)),
    ];
    if let Some(t) = r.t_int_seconds {
        fields.push(("t_int_seconds", num(t)));
    }
    object(fields)
}

fn cmd_design(a: DesignArgs) -> Outcome {
    let unit_mode = match a.unit_mode {
        UnitModeArg::Radians => UnitMode::Radians,
        UnitModeArg::CompatDegrees => UnitMode::CompatDegrees,
    };
    let build = |f: f64, b: f64, g: f64| -> Result<DesignSpec<f64>, Failure> {
        let mut spec = DesignSpec::new(f, b, g)
            .map_err(design_failure)?
            .with_unit_mode(unit_mode);
        if let Some(rate) = a.damping_rate {
            spec = spec
                .with_damping_rate(positive("damping-rate", rate)?)
                .map_err(design_failure)?;
        }
        Ok(spec)
    };
    let value = if a.table {
        if a.gamma_ratio.is_some() {
            return Err(Failure::usage("--table solves its own Γ values; drop --gamma-ratio"));
        }
        let f = a.fidelity.unwrap_or(TABLE_FIDELITY);
        let b = a.beta.unwrap_or(TABLE_BETA);
        let mut rows = Vec::new();
        for g in TABLE_GAMMA_RATIOS {
            let spec = build(f, b, g)?;
            let r = design(&spec).map_err(design_failure)?;
            rows.push(design_json(&spec, &r));
        }
        object(vec![
            ("fidelity", num(f)),
            ("beta", num(b)),
            ("unit_mode", Value::from(unit_mode.as_str())),
            ("rows", Value::Array(rows)),
        ])
    } else {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Failure::usage(format!("--{name} is required (or use --table)")))
        };
        let spec = build(
            need(a.fidelity, "fidelity")?,
            need(a.beta, "beta")?,
            need(a.gamma_ratio, "gamma-ratio")?,
        )?;
        let r = design(&spec).map_err(design_failure)?;
        design_json(&spec, &r)
    };
    emit_json(&value, a.output.as_deref()).map_err(Failure::io)
}

fn cmd_curve(a: CurveArgs) -> Outcome {
    let (default_gammas, default_max) = match a.kind {
        CurveKindArg::C => (vec![0.5, 1.0, 1.5], 0.1),
        CurveKindArg::G => (vec![0.01, 5.0, 10.0], 1.0),
    };
    let gammas = a.gamma_ratios.clone().unwrap_or(default_gammas);
    if gammas.is_empty() {
        return Err(Failure::usage("--gamma-ratios is empty"));
    }
    for &g in &gammas {
        match a.kind {
            CurveKindArg::C => non_negative("gamma-ratios", g)?,
            CurveKindArg::G => positive("gamma-ratios", g)?,
        };
    }
    let tau_min = non_negative("tau-min", a.tau_min)?;
    let tau_max = finite("tau-max", a.tau_max.unwrap_or(default_max))?;
    let grid = TauGrid::new(tau_min, tau_max, a.steps).map_err(|e| Failure::usage(e.to_string()))?;
    let kind = match a.kind {
        CurveKindArg::C => CurveKind::CoherenceC {
            alpha_sq: non_negative("alpha", a.alpha)?.powi(2),
        },
        CurveKindArg::G => CurveKind::BigG,
    };
    let rows = sweep_curves(kind, &gammas, &grid).map_err(Failure::engine)?;

    let text = match a.format {
        CurveFormat::Csv => {
            let mut s = String::from("tau,value,gamma_ratio\n");
            for r in &rows {
                let v = r.value.map(sci).unwrap_or_default();
                s.push_str(&format!("{},{},{}\n", sci(r.tau), v, sci(r.big_gamma)));
            }
            s
        }
        CurveFormat::Svg => {
            let per = grid.steps + 1;
            let series: Vec<Series> = rows
                .chunks(per)
                .map(|chunk| Series {
                    label: format!("Γ = {}", chunk[0].big_gamma),
                    points: chunk.iter().map(|r| (r.tau, r.value)).collect(),
                })
                .collect();
            match a.kind {
                CurveKindArg::C => line_chart(
                    &format!("C(τ), |α| = {}", a.alpha),
                    "τ",
                    "C",
                    &series,
                    None,
                ),
                CurveKindArg::G => line_chart("G(τ)", "τ", "G", &series, Some(-10.0)),
            }
        }
    };
    emit(&text, a.output.as_deref()).map_err(Failure::io)
}

fn output_fields(out: &SchemeOutput<f64>) -> Vec<(&'static str, Value)> {
    vec![
        ("beta", complex(out.beta)),
        ("gamma_out", complex(out.gamma_out)),
        ("gamma_out_v", complex(out.gamma_out_v)),
        ("coherence_C", complex(out.coherence_c)),
        (
            "weights",
            object(vec![
                ("even", num(out.cat_mixture.even)),
                ("odd", num(out.cat_mixture.odd)),
            ]),
        ),
        ("herald_probability", num(out.herald_probability)),
        ("herald_probability_d2", num(out.herald_probability_d2)),
        ("success_decay_factor", num(out.success_decay_factor)),
    ]
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let alpha = amplitude("alpha", &a.alpha)?;
    if a.slices == 0 {
        return Err(Failure::usage("--slices must be at least 1"));
    }
    let params = match a.lossless_theta {
        Some(theta) => XpmParams::lossless(non_negative("lossless-theta", theta)?),
        None => {
            let g = a
                .gamma_ratio
                .ok_or_else(|| Failure::usage("--gamma-ratio is required (or use --lossless-theta)"))?;
            let tau = a
                .tau
                .ok_or_else(|| Failure::usage("--tau is required (or use --lossless-theta)"))?;
            XpmParams::dimensionless(non_negative("gamma-ratio", g)?, non_negative("tau", tau)?)
        }
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let qubit_loss = match a.qubit_loss {
        QubitLossArg::Neglect => QubitLossMode::Neglect,
        QubitLossArg::CommonDecay => QubitLossMode::CommonDecay,
    };

    let mut fields = vec![
        ("alpha", complex(alpha)),
        (
            "gamma_ratio",
            if a.lossless_theta.is_some() {
                Value::Null
            } else {
                num(params.big_gamma())
            },
        ),
        ("tau", num(params.tau())),
        ("theta", num(params.theta())),
        ("slices", Value::from(a.slices)),
    ];
    match &a.asymmetry {
        Some(spec) => {
            if qubit_loss != QubitLossMode::Neglect {
                return Err(Failure::usage("--qubit-loss applies to symmetric runs only"));
            }
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            let [ratio, phi] = parts.as_slice() else {
                return Err(Failure::usage(format!("--asymmetry expects \"t2/t1,phi\", got {spec:?}")));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Failure::usage(format!("--asymmetry: not a number: {s:?}")))
            };
            let ratio = positive("asymmetry", parse(ratio)?)?;
            let phi = finite("asymmetry", parse(phi)?)?;
            let t1 = params.t();
            let r = run_asymmetric_detailed(alpha, &params, t1, ratio * t1, phi, a.slices)
                .map_err(Failure::engine)?;
            fields.extend(output_fields(&r.output));
            fields.push((
                "asymmetry",
                object(vec![
                    ("t2_over_t1", num(ratio)),
                    ("phi", num(phi)),
                    ("compensation", num(r.compensation)),
                    ("uncompensated_fidelity", num(r.uncompensated_fidelity)),
                ]),
            ));
            fields.push(("fidelity", num(r.fidelity)));
        }
        None => {
            let out = run_double_xpm_with(alpha, &params, a.slices, qubit_loss).map_err(Failure::engine)?;
            fields.extend(output_fields(&out));
            let closed = if a.lossless_theta.is_some() {
                1.0
            } else {
                coherence_c(alpha.norm_sqr(), params.big_gamma(), params.tau()).map_err(Failure::engine)?
            };
            fields.push(("closed_form_C", num(closed)));
        }
    }
    emit_json(&object(fields), a.output.as_deref()).map_err(Failure::io)
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn oracle_failure(e: Error) -> Failure {
    match e {
        Error::CutoffInadequate { .. } | Error::StepHalvingExhausted(_) => Failure {
            code: EXIT_VERIFY,
            message: format!("oracle failed: {e}"),
        },
        e => Failure::engine(e),
    }
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let alpha = amplitude("alpha", &a.alpha)?;
    if alpha.norm() > VERIFY_MAX_ALPHA {
        return Err(Failure::usage(format!(
            "--alpha: |alpha| = {} exceeds {VERIFY_MAX_ALPHA}; the Fock integrator is limited to small amplitudes",
            alpha.norm()
        )));
    }
    let g = non_negative("gamma-ratio", a.gamma_ratio)?;
    let tau = non_negative("tau", a.tau)?;
    if a.cutoff == 0 || a.slices == 0 {
        return Err(Failure::usage("--cutoff and --slices must be at least 1"));
    }
    let params = XpmParams::dimensionless(g, tau).map_err(|e| Failure::usage(e.to_string()))?;
    let cfg = ChannelConfig::double_xpm(&params, tau, tau).map_err(Failure::engine)?;
    let cut = [a.cutoff, a.cutoff];

    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho = FockDensity::from_pure(
        &[
            Branch::new(Qubit::H, r, vec![alpha, alpha]),
            Branch::new(Qubit::V, r, vec![alpha, alpha]),
        ],
        cut,
    )
    .map_err(oracle_failure)?;
    let dt = default_step(&cfg, cut);
    let dt = if dt.is_finite() { dt } else { tau.max(1e-3) };
    let oracle = integrate(&rho, &cfg, tau, dt)
        .map_err(oracle_failure)?;
    let c_oracle = extract_coherence(&oracle).map_err(oracle_failure)?;

    let evolved = evolve_sliced(&double_xpm_input(alpha).map_err(Failure::engine)?, &cfg, a.slices)
        .map_err(Failure::engine)?;
    let c_engine = evolved.qubit_coherence().map_err(Failure::engine)?;
    let c_closed = coherence_c(alpha.norm_sqr(), g, tau).map_err(Failure::engine)?;
    let engine_rho = FockDensity::from_dyads(&evolved, cut).map_err(oracle_failure)?;
    let distance = trace_distance(&oracle, &engine_rho).map_err(Failure::engine)?;

    let closed = Complex64::new(c_closed, 0.0);
    let checks = [
        Check {
            name: "oracle_vs_closed_form_C",
            value: (c_oracle - closed).norm(),
            tolerance: VERIFY_C_TOL,
        },
        Check {
            name: "engine_vs_closed_form_C",
            value: (c_engine - closed).norm(),
            tolerance: VERIFY_C_TOL,
        },
        Check {
            name: "oracle_vs_engine_C",
            value: (c_oracle - c_engine).norm(),
            tolerance: VERIFY_C_TOL,
        },
        Check {
            name: "engine_vs_oracle_trace_distance",
            value: distance,
            tolerance: VERIFY_TRACE_DISTANCE_TOL,
        },
    ];
    let pass = checks.iter().all(Check::pass);
    let report = object(vec![
        ("alpha", complex(alpha)),
        ("gamma_ratio", num(g)),
        ("tau", num(tau)),
        ("cutoff", Value::from(a.cutoff)),
        ("slices", Value::from(a.slices)),
        ("C_oracle", complex(c_oracle)),
        ("C_engine", complex(c_engine)),
        ("C_closed_form", num(c_closed)),
        (
            "checks",
            Value::Array(
                checks
                    .iter()
                    .map(|c| {
                        object(vec![
                            ("name", Value::from(c.name)),
                            ("value", num(c.value)),
                            ("tolerance", num(c.tolerance)),
                            ("pass", Value::from(c.pass())),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("pass", Value::from(pass)),
    ]);
    emit_json(&report, a.output.as_deref()).map_err(Failure::io)?;
    if pass {
        return Ok(());
    }
    let worst = checks
        .iter()
        .max_by(|x, y| (x.value / x.tolerance).total_cmp(&(y.value / y.tolerance)))
        .expect("non-empty check list");
    Err(Failure {
        code: EXIT_VERIFY,
        message: format!(
            "verification failed; worst case {} = {} (tolerance {})",
            worst.name,
            sci(worst.value),
            sci(worst.tolerance)
        ),
    })
}

fn cmd_discriminate(a: DiscriminateArgs) -> Outcome {
    let ga = amplitude("gamma-a", &a.gamma_a)?;
    let gb = amplitude("gamma-b", &a.gamma_b)?;
    let value = object(vec![
        ("gamma_a", complex(ga)),
        ("gamma_b", complex(gb)),
        ("distance_sq", num((ga - gb).norm_sqr())),
        ("efficiency", num(discrimination_efficiency(ga, gb))),
    ]);
    emit_json(&value, a.output.as_deref()).map_err(Failure::io)
}
