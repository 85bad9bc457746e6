//! Command-line front end: closed-form quantities, simulation, Monte Carlo
//! estimates and figure data.

mod figures;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use benchtrack::model::ValidityReport;
use benchtrack::primal::Primal;
use benchtrack::sim::{self, PolicySource, Reflection, SimConfig};
use benchtrack::{presets, Model, ModelParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use output::{write_text, Csv};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] benchtrack::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "benchtrack", version, about = "Optimal consumption and investment under benchmark tracking with capital injection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived coefficients, validity conditions and growth envelopes as JSON.
    Validate(ModelArgs),
    /// Dual optimizer, value and controls at one state.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Feedback controls over an x-grid as CSV.
    Policy {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid as start:end:count.
        #[arg(long, default_value = "0:10:101")]
        x_grid: String,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Large-wealth limits of theta*/x and c*/x.
    Asymptotics {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        z: Option<f64>,
        /// Wealth at which the finite ratios are reported next to the limits.
        #[arg(long, default_value_t = 1e6)]
        x: f64,
    },
    /// Convexity regimes of the controls in x.
    Regimes {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        z: Option<f64>,
    },
    /// Growth envelopes, Lipschitz constants and the injection floor.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Simulated paths of (X, Z, V, L, A) and the applied controls as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Monte Carlo estimate as JSON {mean, se, ci95, tail_bound}.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum, default_value_t = Target::Objective)]
        target: Target,
        /// Reflected coordinate for the dual check.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Benchmark coordinate for the dual check.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Report the raw estimate at step dt instead of the extrapolated one.
        #[arg(long)]
        no_extrapolate: bool,
    },
    /// Data behind the published figures, one CSV per panel.
    Figures {
        /// Figure or panel id; all figures when absent.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Paths per Monte Carlo point.
        #[arg(long, default_value_t = 2000)]
        paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Named figure preset.
    #[arg(long, conflicts_with = "params", required_unless_present = "params")]
    preset: Option<String>,
    /// JSON parameter document.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct StateArgs {
    /// Auxiliary wealth x = (v - z)^+; defaults to the document's initial state.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Truncation horizon; by default chosen from rho and mu_Z.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Optimal)]
    policy: PolicyArg,
    /// Reflection scheme; simulate defaults to projection, estimate to bridge.
    #[arg(long, value_enum)]
    reflection: Option<ReflectionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Objective,
    Injection,
    DualCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Optimal,
    Merton,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReflectionArg {
    Projection,
    Bridge,
}

impl ModelArgs {
    fn load(&self) -> CliResult<Model> {
        let params = match (&self.preset, &self.params) {
            (Some(id), _) => presets::preset(id)?,
            (None, Some(path)) => ModelParams::from_json(&read(path)?)?,
            (None, None) => return Err(CliError::Usage("one of --preset or --params is required".into())),
        };
        Ok(Model::new(params)?)
    }
}

impl McArgs {
    fn config(&self, model: &Model, fallback: Reflection) -> CliResult<SimConfig> {
        // the default horizon is rounded up to an even number of steps so the
        // coupled 2 dt path fits
        let horizon = match self.horizon {
            Some(h) => h,
            None => (sim::default_horizon(model) / (2.0 * self.dt)).ceil() * 2.0 * self.dt,
        };
        let policy = match self.policy {
            PolicyArg::Optimal => PolicySource::OptimalFeedback,
            PolicyArg::Merton => PolicySource::Merton,
        };
        let reflection = match self.reflection {
            Some(ReflectionArg::Projection) => Reflection::Projection,
            Some(ReflectionArg::Bridge) => Reflection::BridgeMinimum,
            None => fallback,
        };
        Ok(SimConfig::new(horizon, self.dt, self.paths, self.seed)?.with_policy(policy).with_reflection(reflection))
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Parses `start:end:count` into an inclusive uniform grid.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("grid '{spec}' must look like start:end:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

#[derive(Serialize)]
struct Report<'a> {
    params: &'a ModelParams,
    derived: &'a benchtrack::DerivedCoefficients,
    validity: ValidityReport,
    envelopes: benchtrack::primal::Envelopes,
}

pub fn report(model: &Model) -> String {
    let pr = Primal::new(model);
    let pf = &model.params.preferences;
    to_json(&Report {
        params: &model.params,
        derived: &model.derived,
        validity: model.validity(),
        envelopes: pr.growth_envelopes(model.params.x0(), pf.z0),
    })
}

fn state(model: &Model, s: &StateArgs) -> (f64, f64) {
    (s.x.unwrap_or_else(|| model.params.x0()), s.z.unwrap_or(model.params.preferences.z0))
}

/// Runs one command and returns the model it used, for the exit status.
fn run(cli: Cli) -> CliResult<Option<Model>> {
    match cli.command {
        Command::Validate(args) => {
            let model = args.load()?;
            println!("{}", report(&model));
            Ok(Some(model))
        }
        Command::Solve { model, state: s } => {
            let model = model.load()?;
            let (x, z) = state(&model, &s);
            let point = Primal::new(&model).policy(x, z)?;
            println!("{}", to_json(&point));
            Ok(Some(model))
        }
        Command::Policy { model, x_grid, z, out } => {
            let model = model.load()?;
            let z = z.unwrap_or(model.params.preferences.z0);
            let pr = Primal::new(&model);
            let d = model.d();
            let mut header = vec!["x".to_string(), "z".into(), "f".into(), "value".into()];
            header.extend(if d == 1 { vec!["theta".to_string()] } else { (1..=d).map(|i| format!("theta_{i}")).collect() });
            header.push("c".into());
            let mut csv = Csv::new(&header);
            let mut hint = None;
            for x in parse_grid(&x_grid)? {
                let pt = pr.policy_hint(x, z, hint)?;
                hint = Some(pt.f);
                let mut row = vec![pt.x, pt.z, pt.f, pt.value];
                row.extend(&pt.theta);
                row.push(pt.c);
                csv.row(&row);
            }
            emit(out.as_deref(), &csv.finish())?;
            Ok(Some(model))
        }
        Command::Asymptotics { model, z, x } => {
            let model = model.load()?;
            let z = z.unwrap_or(model.params.preferences.z0);
            let pr = Primal::new(&model);
            let lim = pr.asymptotic_ratios(z)?;
            let pt = pr.policy(x, z)?;
            let out = json!({
                "z": z,
                "p": model.p,
                "p1": model.derived.p1,
                "cra": model.derived.cra,
                "regime": lim.regime,
                "theta_ratio": lim.theta_ratio,
                "c_ratio": lim.c_ratio,
                "at_x": { "x": x, "theta_over_x": pt.theta[0] / x, "c_over_x": pt.c / x },
            });
            println!("{}", to_json(&out));
            Ok(Some(model))
        }
        Command::Regimes { model, z } => {
            let model = model.load()?;
            let z = z.unwrap_or(model.params.preferences.z0);
            println!("{}", to_json(&Primal::new(&model).regime_diagnostics(z)?));
            Ok(Some(model))
        }
        Command::Bounds { model, state: s } => {
            let model = model.load()?;
            let (x, z) = state(&model, &s);
            let pr = Primal::new(&model);
            let pf = &model.params.preferences;
            let floor = if model.kappa() < 1.0 { Some(pr.injection_lower_bound(pf.v0, pf.z0)?) } else { None };
            let dc = &model.derived;
            let out = json!({
                "x": x,
                "z": z,
                "envelopes": pr.growth_envelopes(x, z),
                "m_theta": dc.m_theta,
                "m_c": dc.m_c,
                "rho0": dc.rho0,
                "rho0_appendix": dc.rho0_appendix,
                "injection_lower_bound": floor,
            });
            println!("{}", to_json(&out));
            Ok(Some(model))
        }
        Command::Simulate { model, mc, emit: target } => {
            let model = model.load()?;
            let cfg = mc.config(&model, Reflection::Projection)?;
            let bundle = sim::simulate_paths(&model, &cfg)?;
            emit(target.as_deref(), &output::paths_csv(&bundle))?;
            Ok(Some(model))
        }
        Command::Estimate { model, mc, target, r, h, no_extrapolate } => {
            let model = model.load()?;
            let cfg = mc.config(&model, Reflection::BridgeMinimum)?;
            let (horizon, dt) = (cfg.horizon, cfg.dt);
            let pr = Primal::new(&model);
            let pf = &model.params.preferences;
            let (est, reference) = match target {
                Target::Objective => {
                    let cfg = cfg.with_extrapolation(!no_extrapolate)?;
                    (sim::estimate_objective(&model, &cfg)?, Some(pr.w_value(pf.v0, pf.z0)?))
                }
                Target::Injection => {
                    let cfg = cfg.with_extrapolation(!no_extrapolate)?;
                    let floor = if model.kappa() < 1.0 { Some(pr.injection_lower_bound(pf.v0, pf.z0)?) } else { None };
                    (sim::estimate_injection(&model, &cfg)?, floor)
                }
                Target::DualCheck => {
                    (sim::dual_probabilistic_check(&model, r, h, &cfg)?, Some(pr.dual.u_log_coords(r, h)?))
                }
            };
            let mut out = serde_json::to_value(est).expect("estimate serializes");
            out["reference"] = json!(reference);
            out["horizon"] = json!(horizon);
            out["dt"] = json!(dt);
            println!("{}", to_json(&out));
            Ok(Some(model))
        }
        Command::Figures { id, out, seed, paths, dt } => {
            let opts = figures::McOptions { seed, paths, dt };
            let ids: Vec<String> = match id {
                Some(id) => vec![id],
                None => presets::PRESET_IDS.iter().map(|s| s.to_string()).collect(),
            };
            std::fs::create_dir_all(&out).map_err(|source| CliError::Io { path: out.display().to_string(), source })?;
            for id in ids {
                for file in figures::run_figure(&id, &out, &opts)? {
                    eprintln!("wrote {}", file.display());
                }
            }
            Ok(None)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Some(model)) if model.validity().has_warnings() => {
            for c in model.validity().conditions.iter().filter(|c| !c.passed) {
                eprintln!("warning: {} fails ({})", c.name, c.detail);
            }
            ExitCode::from(2)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
