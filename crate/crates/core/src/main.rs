use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fairdiv::checks::{check_property_with, utilities, EqxVariant, Property};
use fairdiv::experiment::{default_combos, run_experiment, Algorithm, ExperimentConfig, InstanceSource};
use fairdiv::instio::{fixture, fixture_names, generate, load_instance, write_instance, Format, GeneratorConfig, GeneratorKind};
use fairdiv::market::{solve_eq1_po, SolveOptions};
use fairdiv::model::{Allocation, Instance};
use fairdiv::oracle::{is_fpo_lp, BruteForce, ComboQuery, DEFAULT_CAP};
use fairdiv::rational::{format_rational, parse_rational, Rational};
use fairdiv::{Error, Result};

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "Fair allocation of indivisible goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an allocation algorithm on an instance.
    Solve(SolveArgs),
    /// Check properties of an allocation.
    Check(CheckArgs),
    /// Decide by enumeration whether a property combination is satisfiable.
    Verify(VerifyArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Print or verify a named fixture.
    Fixture(FixtureArgs),
    /// Tabulate property satisfaction over a batch of instances.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct EpsArgs {
    /// Run the market algorithm with the ε that guarantees exact EQ1 (default).
    #[arg(long, conflicts_with = "approx")]
    exact: bool,
    /// Run the market algorithm with this ε, e.g. 1/100.
    #[arg(long, value_name = "RAT")]
    approx: Option<String>,
    #[arg(long)]
    max_steps: Option<u64>,
}

impl EpsArgs {
    fn options(&self) -> Result<SolveOptions> {
        let eps = match &self.approx {
            Some(text) => Some(rational_arg(text)?),
            None => None,
        };
        Ok(SolveOptions {
            eps,
            max_steps: self.max_steps,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_name = "NAME")]
    alg: String,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the market trace here (alg_eq1_po only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Allocation file as written by `solve`.
    #[arg(long)]
    allocation: PathBuf,
    /// Separated by `,` or `+`, e.g. `EQX+EF1,PO` or `EPS_EQ1:3/100`; PO and FPO are accepted.
    #[arg(long, value_delimiter = ',', required = true)]
    props: Vec<String>,
    /// Let EQX/EFX removals range over every good, not only positively valued ones.
    #[arg(long)]
    all_goods: bool,
    /// Enumeration cap for the PO check.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// e.g. `EQ1,EF1,PO` or `EQX+FPO`.
    #[arg(long)]
    combo: String,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Dirichlet,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "dirichlet")]
    kind: Kind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dirichlet concentration.
    #[arg(long, default_value = "10")]
    concentration: String,
    /// Dirichlet row total.
    #[arg(long, default_value_t = 1000)]
    total: u64,
    /// Approval probability for binary instances.
    #[arg(long, default_value = "1/2")]
    p: String,
}

impl GeneratorArgs {
    fn config(&self) -> Result<GeneratorConfig> {
        let concentration = rational_arg(&self.concentration)?;
        let kind = match self.kind {
            Kind::Dirichlet => GeneratorKind::DirichletPositive,
            Kind::Binary => GeneratorKind::Binary { p: rational_arg(&self.p)? },
        };
        Ok(GeneratorConfig {
            n_agents: self.n,
            n_goods: self.m,
            concentration: rational_to_f64(&concentration),
            total: self.total,
            seed: self.seed,
            kind,
        })
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Defaults to the extension of --out, then JSON.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture name; omit with --list.
    name: Option<String>,
    #[arg(long)]
    list: bool,
    /// Re-check the fixture's documented facts by enumeration.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Directory of instance files; otherwise instances are generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', default_value = "leximin_bf,mnw_bf,alg_eq1_po")]
    alg: Vec<String>,
    /// Repeatable; defaults to the standard table.
    #[arg(long)]
    combo: Vec<String>,
    #[command(flatten)]
    eps: EpsArgs,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Summary CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-instance long-format CSV.
    #[arg(long)]
    details: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct AllocationOutput {
    algorithm: String,
    parameters: serde_json::Map<String, serde_json::Value>,
    bundles: Vec<Vec<usize>>,
    utilities: Vec<u64>,
}

fn rational_arg(text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| Error::Usage(format!("`{text}` is not a rational number")))
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.input)?;
    let algorithm: Algorithm = args.alg.parse()?;
    let mut parameters = serde_json::Map::new();
    let allocation = if algorithm == Algorithm::AlgEq1Po {
        let outcome = solve_eq1_po(&instance, &args.eps.options()?)?;
        parameters.insert("eps".into(), format_rational(&outcome.eps).into());
        if let Some(path) = &args.trace {
            fs::write(path, outcome.trace.to_text())?;
        }
        Some(outcome.allocation)
    } else {
        if algorithm.is_brute_force() {
            parameters.insert("cap".into(), args.cap.into());
        }
        algorithm.run(&instance, &BruteForce::new(args.cap), &SolveOptions::exact())?
    };
    let Some(allocation) = allocation else {
        eprintln!("no allocation exists");
        return Ok(ExitCode::from(2));
    };
    let output = AllocationOutput {
        algorithm: algorithm.name().to_string(),
        parameters,
        utilities: utilities(&instance, &allocation),
        bundles: allocation.bundles().to_vec(),
    };
    let mut text = serde_json::to_string(&output).expect("plain data serialises");
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn read_allocation(path: &Path, instance: &Instance) -> Result<Allocation> {
    let text = fs::read_to_string(path)?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidAllocation(format!("{}: {e}", path.display())))?;
    let bundles: Vec<Vec<usize>> = serde_json::from_value(doc.get("bundles").cloned().unwrap_or(doc))
        .map_err(|e| Error::InvalidAllocation(format!("{}: {e}", path.display())))?;
    let allocation = Allocation::new(instance.n_goods(), bundles)?;
    allocation.validate_for(instance)?;
    Ok(allocation)
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.input)?;
    let allocation = read_allocation(&args.allocation, &instance)?;
    let variant = if args.all_goods {
        EqxVariant::AllGoods
    } else {
        EqxVariant::PositiveOnly
    };
    for name in args.props.iter().flat_map(|p| p.split('+')).map(str::trim) {
        match name.to_ascii_uppercase().as_str() {
            "PO" => {
                let verdict = BruteForce::new(args.cap).is_po(&instance, &allocation)?;
                match verdict.dominator {
                    None => println!("PO: holds"),
                    Some(d) => println!("PO: fails (dominated by {:?})", d.bundles()),
                }
            }
            "FPO" => {
                let holds = is_fpo_lp(&instance, &allocation)?;
                println!("FPO: {}", if holds { "holds" } else { "fails" });
            }
            _ => {
                let property: Property = name.parse()?;
                println!("{}", check_property_with(&instance, &allocation, &property, variant)?);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.input)?;
    let query: ComboQuery = args.combo.parse()?;
    let result = BruteForce::new(args.cap).exists_combo(&instance, &query)?;
    println!(
        "{query}: {} (examined {} of {} allocations)",
        if result.found { "exists" } else { "does not exist" },
        result.examined,
        result.search_space_size
    );
    if let Some(w) = &result.witness {
        println!("witness: {:?}", w.bundles());
    }
    Ok(if result.found { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn output_format(explicit: Option<FormatArg>, out: Option<&Path>) -> Format {
    explicit
        .map(Format::from)
        .or_else(|| out.and_then(Format::from_path))
        .unwrap_or(Format::Json)
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let instance = generate(&args.generator.config()?)?;
    let format = output_format(args.format, args.out.as_deref());
    emit(args.out.as_deref(), &write_instance(&instance, format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fixture(args: &FixtureArgs) -> Result<ExitCode> {
    if args.list {
        for name in fixture_names() {
            let f = fixture(name)?;
            println!("{name}\t{}", f.description);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let name = args
        .name
        .as_deref()
        .ok_or_else(|| Error::Usage("give a fixture name or --list".into()))?;
    let f = fixture(name)?;
    if args.verify {
        let mut all = true;
        for fact in &f.facts {
            let ok = fact.verify(&f.instance)?;
            all &= ok;
            println!("{} {fact}", if ok { "ok  " } else { "FAIL" });
        }
        return Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let format = output_format(args.format, args.out.as_deref());
    emit(args.out.as_deref(), &write_instance(&f.instance, format))?;
    Ok(ExitCode::SUCCESS)
}

fn load_directory(dir: &Path) -> Result<Vec<Instance>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| Format::from_path(p).is_some());
    paths.sort();
    paths.iter().map(|p| load_instance(p)).collect()
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let source = match &args.input {
        Some(dir) => InstanceSource::Given(load_directory(dir)?),
        None => InstanceSource::Generated {
            config: args.generator.config()?,
            count: args.count,
        },
    };
    let mut config = ExperimentConfig::new(source);
    config.algorithms = args.alg.iter().map(|a| a.parse()).collect::<Result<_>>()?;
    config.combos = if args.combo.is_empty() {
        default_combos()
    } else {
        args.combo.iter().map(|c| c.parse()).collect::<Result<_>>()?
    };
    config.market = args.eps.options()?;
    config.jobs = args.jobs;
    config.cap = args.cap;
    let summary = run_experiment(&config)?;
    if let Some(path) = &args.details {
        fs::write(path, summary.detail_csv())?;
    }
    emit(args.out.as_deref(), &summary.summary_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Argument errors exit with 1; 2 is reserved for "no such allocation".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Fixture(a) => cmd_fixture(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
