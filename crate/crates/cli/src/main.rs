//! `sdiv`: divergences, one-shot error probabilities and figure data for
//! binary quantum hypothesis testing.

mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sdiv_core::asymptotics::{fig1_data, fig2_data, parse_grid, quantum_exponent_trace_with, QUANTUM_N_MAX};
use sdiv_core::divergences::RenyiProfile;
use sdiv_core::io::{channel_from_json, state_to_json};
use sdiv_core::oneshot::{Frontier, Optimum};
use sdiv_core::{DensityMatrix, Error, ExtendedReal, NumericPolicy};

use output::{emit, num, round_record};
use spec::generate_state;

#[derive(Parser)]
#[command(name = "sdiv", version, about = "Quantum hypothesis testing: divergences, one-shot optima and exponent data")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a state as JSON.
    Generate {
        /// diag:p1,p2,..  pure:theta[,phi]  random:dim[:rank]
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scalar divergences of (rho, sigma).
    Divergence {
        #[arg(long)]
        kind: DivergenceKind,
        #[command(flatten)]
        states: StatePair,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// Lower end of the s range for the Lipschitz constant.
        #[arg(long = "c")]
        c: Option<f64>,
    },
    /// Exact one-shot error probabilities.
    Oneshot {
        #[arg(long)]
        kind: OneshotKind,
        #[command(flatten)]
        states: StatePair,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Neyman-Pearson boundary as CSV (mu, alpha, beta).
    Boundary {
        #[command(flatten)]
        states: StatePair,
    },
    /// Exponent trace -log Q_C^(s)(rho^n || sigma^n) / n as CSV.
    Trace {
        #[command(flatten)]
        states: StatePair,
        #[arg(long)]
        s: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Hoeffding bound B(r) against the lines r and s r, as CSV.
    Fig1 {
        #[command(flatten)]
        states: StatePair,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value = "0.01:1:0.01")]
        r_grid: String,
    },
    /// xi_s over a grid of s, as CSV.
    Fig2 {
        #[command(flatten)]
        states: StatePair,
        #[arg(long, default_value = "0.05:1:0.05")]
        s_grid: String,
    },
    /// Check state specs or files (and optionally a channel file).
    Validate {
        states: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        channel: Option<PathBuf>,
    },
}

/// `rho` is generated with `seed`, `sigma` with `seed + 1`.
#[derive(Args)]
struct StatePair {
    #[arg(long, default_value = "random:2")]
    rho: String,
    #[arg(long, default_value = "random:2")]
    sigma: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum DivergenceKind {
    Q,
    Petz,
    Umegaki,
    DMin,
    Chernoff,
    XiS,
    Hoeffding,
    FixedPoint,
    Lipschitz,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum OneshotKind {
    BetaEps,
    #[value(name = "q_s")]
    QS,
    QMin,
    PErr,
    PErrS,
}

/// Error surfaced to the user with the module it came from.
#[derive(Debug)]
struct Failure {
    module: &'static str,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            module: "cli",
            kind: "usage",
            message: message.into(),
        }
    }

    fn record(&self) -> Value {
        json!({"error": {"module": self.module, "kind": self.kind, "message": self.message}})
    }
}

trait Provenance<T> {
    fn within(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> Provenance<T> for sdiv_core::Result<T> {
    fn within(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e: Error| Failure {
            module,
            kind: e.kind(),
            message: e.to_string(),
        })
    }
}

fn required(value: Option<f64>, flag: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required for this kind")))
}

fn ext(x: ExtendedReal) -> Value {
    num(x.to_f64())
}

impl StatePair {
    fn load(&self, policy: &NumericPolicy) -> Result<(DensityMatrix, DensityMatrix), Failure> {
        let rho = generate_state(&self.rho, self.seed, policy).within("states")?;
        let sigma = generate_state(&self.sigma, self.seed.wrapping_add(1), policy).within("states")?;
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found: sigma.dim(),
            })
            .within("states");
        }
        Ok((rho, sigma))
    }

    fn echo(&self) -> Value {
        json!({"rho": self.rho, "sigma": self.sigma, "seed": self.seed})
    }
}

/// Output of a command: a JSON record or raw text (CSV, state JSON).
enum Artifact {
    Record(Value),
    Text(String),
}

fn run(cli: &Cli, policy: &NumericPolicy) -> Result<Artifact, Failure> {
    match &cli.command {
        Command::Generate { spec, seed } => {
            let rho = generate_state(spec, *seed, policy).within("states")?;
            Ok(Artifact::Text(state_to_json(&rho) + "\n"))
        }
        Command::Divergence { kind, states, s, alpha, r, c } => {
            let (rho, sigma) = states.load(policy)?;
            let profile = RenyiProfile::with_policy(&rho, &sigma, policy.clone()).within("divergences")?;
            divergence(*kind, &profile, *s, *alpha, *r, *c).map(|(name, value, certificate, params)| {
                Artifact::Record(json!({
                    "command": "divergence",
                    "kind": name,
                    "inputs": merge(states.echo(), params),
                    "dim": rho.dim(),
                    "value": value,
                    "certificate": certificate,
                }))
            })
        }
        Command::Oneshot { kind, states, s, c, eps, p } => {
            let (rho, sigma) = states.load(policy)?;
            let frontier = Frontier::with_policy(&rho, &sigma, policy.clone()).within("oneshot")?;
            let (name, params, opt) = match kind {
                OneshotKind::BetaEps => {
                    let eps = required(*eps, "eps")?;
                    ("beta_eps", json!({"eps": eps}), frontier.beta_epsilon(eps))
                }
                OneshotKind::QS => {
                    let s = required(*s, "s")?;
                    ("q_s", json!({"s": s, "C": c}), frontier.q_s_c(s, *c))
                }
                OneshotKind::QMin => ("q_min", json!({"s": 1.0, "C": 1.0}), frontier.q_s_c(1.0, 1.0)),
                OneshotKind::PErr => {
                    let p = required(*p, "p")?;
                    ("p_err", json!({"p": p}), frontier.p_err_bayes(p))
                }
                OneshotKind::PErrS => {
                    let s = required(*s, "s")?;
                    ("p_err_s", json!({"s": s, "C": c}), frontier.p_err_s_c(s, *c))
                }
            };
            let Optimum { value, point } = opt.within("oneshot")?;
            let gap = point.certificate_gap(&rho, &sigma).within("oneshot")?;
            Ok(Artifact::Record(json!({
                "command": "oneshot",
                "kind": name,
                "inputs": merge(states.echo(), params),
                "dim": rho.dim(),
                "value": value,
                "certificate": {
                    "alpha": point.alpha,
                    "beta": point.beta,
                    "mu": point.mu.map(ext),
                    "mix": point.mix,
                    "lagrangian_gap": gap,
                },
            })))
        }
        Command::Boundary { states } => {
            let (rho, sigma) = states.load(policy)?;
            let boundary = Frontier::with_policy(&rho, &sigma, policy.clone())
                .and_then(|f| f.trace())
                .within("oneshot")?;
            Ok(Artifact::Text(boundary.to_csv()))
        }
        Command::Trace { states, s, c, n_max } => {
            if *n_max > QUANTUM_N_MAX {
                return Err(Failure::usage(format!("--n-max is at most {QUANTUM_N_MAX}")));
            }
            let (rho, sigma) = states.load(policy)?;
            let trace = quantum_exponent_trace_with(&rho, &sigma, *s, *c, *n_max, policy).within("asymptotics")?;
            Ok(Artifact::Text(trace.to_csv()))
        }
        Command::Fig1 { states, s, r_grid } => {
            let grid = parse_grid(r_grid).within("asymptotics")?;
            let (rho, sigma) = states.load(policy)?;
            let table = fig1_data(&rho, &sigma, *s, &grid).within("asymptotics")?;
            Ok(Artifact::Text(table.to_csv()))
        }
        Command::Fig2 { states, s_grid } => {
            let grid = parse_grid(s_grid).within("asymptotics")?;
            let (rho, sigma) = states.load(policy)?;
            let table = fig2_data(&rho, &sigma, &grid).within("asymptotics")?;
            Ok(Artifact::Text(table.to_csv()))
        }
        Command::Validate { states, seed, channel } => validate(states, *seed, channel.as_deref(), policy),
    }
}

type DivergenceResult = (&'static str, Value, Value, Value);

fn divergence(
    kind: DivergenceKind,
    profile: &RenyiProfile,
    s: Option<f64>,
    alpha: Option<f64>,
    r: Option<f64>,
    c: Option<f64>,
) -> Result<DivergenceResult, Failure> {
    let m = "divergences";
    Ok(match kind {
        DivergenceKind::Q => {
            let a = required(alpha, "alpha")?;
            ("q", num(profile.q_alpha(a).within(m)?), Value::Null, json!({"alpha": a}))
        }
        DivergenceKind::Petz => {
            let a = required(alpha, "alpha")?;
            ("petz", ext(profile.petz_renyi(a).within(m)?), Value::Null, json!({"alpha": a}))
        }
        DivergenceKind::Umegaki => ("umegaki", ext(profile.umegaki()), Value::Null, json!({})),
        DivergenceKind::DMin => ("d_min", ext(profile.d_min()), Value::Null, json!({})),
        DivergenceKind::Chernoff => {
            let value = profile.chernoff();
            let certificate = value.is_finite().then(|| json!({"argmin_alpha": profile.chernoff_argmin()}));
            ("chernoff", ext(value), json!(certificate), json!({}))
        }
        DivergenceKind::XiS => {
            let s = required(s, "s")?;
            let value = profile.xi_s(s).within(m)?;
            let certificate = if s > 0.0 && value.is_finite() {
                json!({"argmax_alpha": profile.xi_s_argmax(s).within(m)?})
            } else {
                Value::Null
            };
            ("xi_s", ext(value), certificate, json!({"s": s}))
        }
        DivergenceKind::Hoeffding => {
            let r = required(r, "r")?;
            ("hoeffding", ext(profile.hoeffding_b(r).within(m)?), Value::Null, json!({"r": r}))
        }
        DivergenceKind::FixedPoint => {
            let s = required(s, "s")?;
            let root = profile.solve_fixed_point(s).within(m)?;
            let residual = match root.finite() {
                Some(x) => profile.hoeffding_b(x).within(m)?.finite().map(|b| b - s * x),
                None => None,
            };
            ("fixed_point", ext(root), json!({"residual": residual}), json!({"s": s}))
        }
        DivergenceKind::Lipschitz => {
            let c = required(c, "c")?;
            ("lipschitz", ext(profile.lipschitz_constant(c).within(m)?), Value::Null, json!({"c": c}))
        }
    })
}

fn validate(
    specs: &[String],
    seed: u64,
    channel: Option<&std::path::Path>,
    policy: &NumericPolicy,
) -> Result<Artifact, Failure> {
    if specs.is_empty() && channel.is_none() {
        return Err(Failure::usage("nothing to validate"));
    }
    let mut states = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let rho = generate_state(spec, seed.wrapping_add(k as u64), policy).within("states")?;
        let eig = rho.eigensystem().within("matrix")?;
        let rank = eig.eigenvalues.iter().filter(|&&l| l > policy.support_threshold).count();
        states.push(json!({
            "source": spec,
            "dim": rho.dim(),
            "trace": rho.matrix().trace().re,
            "min_eigenvalue": eig.eigenvalues[0],
            "rank": rank,
        }));
    }
    let channel = match channel {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure {
                module: "io",
                kind: "io",
                message: format!("{}: {e}", path.display()),
            })?;
            let ch = channel_from_json(&text, policy).within("channels")?;
            json!({
                "source": path.display().to_string(),
                "d_in": ch.d_in(),
                "d_out": ch.d_out(),
                "kraus": ch.kraus().len(),
                "completeness_residual": ch.completeness_residual(),
            })
        }
        None => Value::Null,
    };
    Ok(Artifact::Record(json!({
        "command": "validate",
        "valid": true,
        "states": states,
        "channel": channel,
    })))
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn fail(failure: &Failure) -> ExitCode {
    eprintln!("{}", failure.record());
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("{}", Failure::usage(e.to_string().trim_end()).record());
            return ExitCode::from(2);
        }
    };
    let policy = match NumericPolicy::default().with_overrides("SDIV_", std::env::vars()).within("policy") {
        Ok(p) => p,
        Err(f) => return fail(&f),
    };
    let text = match run(&cli, &policy) {
        Ok(Artifact::Record(v)) => {
            serde_json::to_string_pretty(&round_record(v)).expect("records serialize") + "\n"
        }
        Ok(Artifact::Text(t)) => t,
        Err(f) => return fail(&f),
    };
    match emit(&text, cli.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&Failure {
            module: "io",
            kind: "io",
            message: e.to_string(),
        }),
    }
}
