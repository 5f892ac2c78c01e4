use std::io::Write;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medpath::abtest::{ab_test, classical_bootstrap_test, sobel_report, AbConfig, LambdaRule, SingularTerm};
use medpath::data::{ColumnRoles, Dataset, Table, VineDataset};
use medpath::gcopula::{fit_full_mle, fit_ifm, SemConfig, SemTemplate};
use medpath::regression::Family;
use medpath::simlab::{generate_scenario_data, reproduce, write_reproduction, ReproduceOptions, Scenario};
use medpath::vine::{pathway_independence_test, DagVineConfig, Pathway};

const EXIT_INPUT: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "medpath", version, about = "Mediation analysis with copula SEMs and bootstrap tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Gaussian copula SEM to a CSV dataset.
    Fit(FitArgs),
    /// Test the indirect, direct and total effects.
    Test(TestArgs),
    /// Simulate a dataset.
    Simulate(SimulateArgs),
    /// Bootstrap independence tests along a pathway of the four-node vine.
    VineTest(VineTestArgs),
    /// Run the type-I error and power studies.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct Roles {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    exposure: String,
    #[arg(long)]
    mediator: String,
    #[arg(long)]
    outcome: String,
    /// Comma-separated confounder columns.
    #[arg(long, value_delimiter = ',')]
    confounders: Vec<String>,
}

impl Roles {
    fn load(&self) -> Result<Dataset<f64>, CliError> {
        let table = Table::from_path(&self.input).map_err(|e| input_err(format!("{}: {e}", self.input.display())))?;
        let roles = ColumnRoles {
            exposure: self.exposure.clone(),
            mediator: self.mediator.clone(),
            outcome: self.outcome.clone(),
            confounders: self.confounders.clone(),
        };
        Ok(Dataset::from_table(&table, &roles)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Bernoulli,
    Poisson,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Bernoulli => Family::Bernoulli,
            FamilyArg::Poisson => Family::Poisson,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    roles: Roles,
    /// Exposure family; mediator and outcome are gaussian.
    #[arg(long, value_enum, default_value = "gaussian")]
    family: FamilyArg,
    /// Full maximum likelihood instead of the two-stage IFM fit.
    #[arg(long)]
    mle: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sobel,
    Boot,
    Ab,
}

#[derive(Clone, Copy, ValueEnum)]
enum LambdaRuleArg {
    Fixed,
    RootNOverLogN,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingularArg {
    Product,
    Centered,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    roles: Roles,
    #[arg(long, value_enum, default_value = "ab")]
    method: MethodArg,
    #[arg(long = "B", default_value_t = 199)]
    b: usize,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    lambda_rule: LambdaRuleArg,
    /// Term used when both indicators are on.
    #[arg(long, value_enum, default_value = "product")]
    singular_term: SingularArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outcome family.
    #[arg(long, value_enum, default_value = "gaussian")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long = "s-star", default_value_t = 0.0)]
    s_star: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML copula SEM config; without it the linear mediation scenario is used.
    #[arg(long, conflicts_with = "vine_config")]
    config: Option<PathBuf>,
    /// TOML four-node vine config.
    #[arg(long)]
    vine_config: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the resolved configuration; defaults to
    /// `<output>.manifest.json` when `--output` is given.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VineTestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    exposure: String,
    /// Column of the intermediate node `Z`.
    #[arg(long)]
    node2: String,
    #[arg(long)]
    mediator: String,
    #[arg(long)]
    outcome: String,
    /// direct_SY, mediated_SMY or composite_SZY.
    #[arg(long, default_value = "mediated_SMY")]
    pathway: String,
    #[arg(long = "B", default_value_t = 199)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value = "reproduce-out")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Fraction of the default replications and bootstrap size.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Worker threads; defaults to MEDPATH_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "fixed")]
    lambda_rule: LambdaRuleArg,
    #[arg(long, value_enum, default_value = "product")]
    singular_term: SingularArg,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

fn input_err(message: String) -> CliError {
    CliError { code: EXIT_INPUT, message }
}

impl From<medpath::Error> for CliError {
    fn from(e: medpath::Error) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_ESTIMATION };
        CliError { code, message: e.to_string() }
    }
}

fn ab_config(b: usize, lambda: f64, rule: LambdaRuleArg, term: SingularArg, seed: u64) -> AbConfig {
    AbConfig {
        b,
        lambda,
        lambda_rule: match rule {
            LambdaRuleArg::Fixed => LambdaRule::Fixed,
            LambdaRuleArg::RootNOverLogN => LambdaRule::RootNOverLogN,
        },
        singular_term: match term {
            SingularArg::Product => SingularTerm::Product,
            SingularArg::Centered => SingularTerm::CenteredProduct,
        },
        seed,
        ..AbConfig::default()
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| input_err(format!("cannot write output: {e}"));
    match output {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn cmd_fit(a: FitArgs) -> Result<(), CliError> {
    let data = a.roles.load()?;
    let template = SemTemplate::with_exposure(a.family.into());
    let fit = if a.mle { fit_full_mle(&data, &template)? } else { fit_ifm(&data, &template)? };
    emit(a.output.as_deref(), &to_json(&fit))
}

fn cmd_test(a: TestArgs) -> Result<(), CliError> {
    let data = a.roles.load()?;
    let family: Family = a.family.into();
    let mut config = ab_config(a.b, a.lambda, a.lambda_rule, a.singular_term, a.seed);
    config.s = a.s;
    config.s_star = a.s_star;
    let report = match a.method {
        MethodArg::Sobel => sobel_report(&data, family, a.s, a.s_star)?,
        MethodArg::Boot => classical_bootstrap_test(&data, family, &config)?,
        MethodArg::Ab => ab_test(&data, family, &config)?,
    };
    emit(a.output.as_deref(), &report.to_json())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut csv = Vec::new();
    let resolved = if let Some(path) = &a.config {
        let cfg = SemConfig::from_toml(&read_text(path)?)?;
        cfg.simulate()?.write_csv(&mut csv)?;
        serde_json::to_value(&cfg)
    } else if let Some(path) = &a.vine_config {
        let cfg = DagVineConfig::from_toml(&read_text(path)?)?;
        cfg.spec.simulate(cfg.n, cfg.seed)?.write_csv(&mut csv)?;
        serde_json::to_value(&cfg)
    } else {
        let d = Scenario::default();
        let s = Scenario {
            n: a.n,
            alpha: a.alpha.unwrap_or(d.alpha),
            beta: a.beta.unwrap_or(d.beta),
            gamma: a.gamma.unwrap_or(d.gamma),
            ..d
        };
        generate_scenario_data(&s, a.seed)?.write_csv(&mut csv)?;
        serde_json::to_value(serde_json::json!({ "scenario": s, "seed": a.seed }))
    }
    .expect("serialisable");
    let manifest = a
        .manifest
        .clone()
        .or_else(|| a.output.as_ref().map(|o| o.with_extension("manifest.json")));
    emit(a.output.as_deref(), std::str::from_utf8(&csv).expect("CSV output is UTF-8"))?;
    if let Some(m) = manifest {
        emit(Some(&m), &to_json(&resolved))?;
    }
    Ok(())
}

fn cmd_vine_test(a: VineTestArgs) -> Result<(), CliError> {
    let table = Table::from_path(&a.input).map_err(|e| input_err(format!("{}: {e}", a.input.display())))?;
    let data = VineDataset::<f64>::from_table(&table, &a.exposure, &a.node2, &a.mediator, &a.outcome)?;
    let pathway: Pathway = a.pathway.parse()?;
    let report = pathway_independence_test(&data, pathway, a.b, a.seed)?;
    emit(a.output.as_deref(), &to_json(&report))
}

fn cmd_reproduce(a: ReproduceArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::default();
    scenario.ab = ab_config(scenario.ab.b, scenario.ab.lambda, a.lambda_rule, a.singular_term, 0);
    let opts = ReproduceOptions {
        scenario,
        master_seed: a.seed,
        scale: a.scale,
        threads: a.threads,
    };
    let rep = reproduce(&opts)?;
    let paths = write_reproduction(&rep, &a.output_dir)?;
    let level = rep.manifest.scenario.level;
    for (h, r) in &rep.nulls {
        eprintln!(
            "{}: size classical {:.3}, adaptive {:.3}",
            h.label(),
            r.classical_size(level),
            r.adaptive_size(level)
        );
    }
    eprintln!(
        "wrote {}, {}, {} in {:.1}s",
        paths.type1_qq.display(),
        paths.power.display(),
        paths.manifest.display(),
        rep.manifest.wall_secs
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::VineTest(a) => cmd_vine_test(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

