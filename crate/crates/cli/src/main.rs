use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parkalloc::allocate::{check_plan, solve_min_cost_flow, AllocateError};
use parkalloc::ingest::{read_instance, IngestError};
use parkalloc::model::{validate_instance, ProblemInstance, ValidationReport};
use parkalloc::permits::{compute_permits, PermitError, PermitIssuance, RootChoice};
use parkalloc::{
    brute_force_optimum, build_network, write_plan, EnumerationBudget, OracleError, OverflowReport,
    PlanFormat,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Parking permit issuance and allocation under a reserved-space policy.
#[derive(Debug, Parser)]
#[command(name = "parkalloc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance file and print every problem found.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Compute the service level and permits per lot.
    Permits {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Issue permits and assign users to lots at minimum walking distance.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        allocation: AllocationArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate daily arrivals against the issued permits.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        /// JSON permit issuance to use instead of computing one.
        #[arg(long)]
        permits_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive reference solve for small instances.
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        allocation: AllocationArgs,
        #[arg(long, default_value_t = EnumerationBudget::default().max_states)]
        max_states: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Instance file.
    instance: PathBuf,
    /// Override the arrival probability in the file.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct AllocationArgs {
    /// Drop the reserved lower bounds.
    #[arg(long)]
    no_reserved: bool,
    /// JSON permit issuance to use instead of computing one.
    #[arg(long)]
    permits_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

/// Reads the instance and applies `--p` without validating.
fn load_unchecked(input: &InputArgs) -> Result<ProblemInstance> {
    let text = read_text(&input.instance)?;
    let mut instance = read_instance(&text).map_err(|e| match e {
        IngestError::Invalid(report) => Failure::new(EXIT_VALIDATION, report.to_string()),
        other => Failure::new(EXIT_INPUT, format!("{}: {other}", input.instance.display())),
    })?;
    if let Some(p) = input.p {
        instance.arrival_probability = p;
    }
    Ok(instance)
}

fn load(input: &InputArgs) -> Result<ProblemInstance> {
    let instance = load_unchecked(input)?;
    let report = validate_instance(&instance);
    for issue in &report.issues {
        eprintln!("{issue}");
    }
    if report.has_errors() {
        return Err(Failure::new(
            EXIT_VALIDATION,
            format!("{} is not a valid instance", input.instance.display()),
        ));
    }
    Ok(instance)
}

fn permit_failure(e: PermitError) -> Failure {
    match e {
        PermitError::InvalidInstance => Failure::new(EXIT_VALIDATION, e.to_string()),
        _ => Failure::new(EXIT_INFEASIBLE, e.to_string()),
    }
}

fn permits_for(instance: &ProblemInstance, file: Option<&Path>) -> Result<PermitIssuance> {
    let Some(path) = file else {
        return compute_permits(instance).map_err(permit_failure);
    };
    let issued: PermitIssuance = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    if issued.per_lot.len() != instance.lots.len() {
        return Err(Failure::new(
            EXIT_INPUT,
            format!(
                "{}: {} permit counts for {} lots",
                path.display(),
                issued.per_lot.len(),
                instance.lots.len()
            ),
        ));
    }
    Ok(issued)
}

fn allocate_failure(e: AllocateError) -> Failure {
    match e {
        AllocateError::Infeasible { .. } => Failure::new(EXIT_INFEASIBLE, e.to_string()),
        AllocateError::PermitMismatch { .. } | AllocateError::DimensionMismatch(_) => {
            Failure::new(EXIT_INPUT, e.to_string())
        }
        AllocateError::Solver(_) | AllocateError::Certificate(_) => {
            Failure::new(EXIT_INTERNAL, e.to_string())
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn plan_format(format: Format) -> PlanFormat {
    match format {
        Format::Table => PlanFormat::Table,
        Format::Json => PlanFormat::Json,
        Format::Csv => PlanFormat::Csv,
    }
}

fn render_validation(report: &ValidationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => report.to_string(),
        ReportFormat::Json => to_json(report),
    }
}

fn render_permits(instance: &ProblemInstance, issued: &PermitIssuance, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => return to_json(issued),
        Format::Csv => {
            out.push_str("lot,label,spaces,permits\n");
            for (k, lot) in instance.lots.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    lot.id,
                    lot.label,
                    lot.total_capacity(),
                    issued.per_lot[k]
                );
            }
            return out;
        }
        Format::Table => {}
    }
    match &issued.service_level {
        Some(sl) => {
            let q = &sl.quadratic;
            let _ = writeln!(
                out,
                "service-level quadratic: {}x^2 + ({:.4})x + ({:.4}) = 0",
                q.a, q.b, q.c
            );
            let _ = writeln!(out, "roots: {:.4}, {:.4}", sl.roots.0, sl.roots.1);
            let _ = writeln!(
                out,
                "psi = {:.4} ({} root), {} participating lots, {} users",
                sl.psi,
                match sl.chosen_root {
                    RootChoice::Low => "smaller",
                    RootChoice::High => "larger",
                },
                q.effective_lot_count,
                q.effective_users
            );
        }
        None => out.push_str("no service-level quadratic solved\n"),
    }
    let _ = writeln!(out, "p = {}\n", instance.arrival_probability);
    let _ = writeln!(
        out,
        "{:>4}  {:<16} {:>9} {:>11} {:>7} {:>10} {:>7}",
        "lot", "label", "reserved", "unreserved", "total", "exact", "permits"
    );
    let reserved: Vec<usize> = instance.reserved_types().collect();
    for (k, lot) in instance.lots.iter().enumerate() {
        let rv: i64 = reserved.iter().map(|&i| lot.capacity[i]).sum();
        let _ = writeln!(
            out,
            "{:>4}  {:<16} {:>9} {:>11} {:>7} {:>10.3} {:>7}",
            lot.id,
            lot.label,
            rv,
            lot.total_capacity() - rv,
            lot.total_capacity(),
            issued.unrounded[k],
            issued.per_lot[k]
        );
    }
    let spaces: i64 = instance.lots.iter().map(|l| l.total_capacity()).sum();
    let _ = writeln!(
        out,
        "{:>4}  {:<16} {:>9} {:>11} {:>7} {:>10} {:>7}",
        "",
        "total",
        "",
        "",
        spaces,
        "",
        issued.total()
    );
    out
}

fn render_simulation(report: &OverflowReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => return to_json(report),
        Format::Csv => {
            out.push_str(
                "lot,permits,spaces,trials,mean_arrivals,std_arrivals,overflow_probability,\
                 expected_mean,expected_std,exact_overflow,normal_deviate\n",
            );
            for l in &report.lots {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    l.lot + 1,
                    l.permits,
                    l.spaces,
                    l.trials,
                    l.mean_arrivals,
                    l.std_arrivals,
                    l.overflow_probability,
                    l.expected_mean,
                    l.expected_std,
                    l.exact_overflow,
                    l.normal_deviate
                );
            }
            return out;
        }
        Format::Table => {}
    }
    let _ = writeln!(
        out,
        "{} trials, seed {}, p = {}\n",
        report.trials, report.seed, report.arrival_probability
    );
    let _ = writeln!(
        out,
        "{:>4} {:>7} {:>6}  {:>9} {:>9}  {:>8} {:>8}  {:>9} {:>9}  {:>7}",
        "lot", "permits", "spaces", "mean", "expected", "std", "expected", "overflow", "exact", "z"
    );
    for l in &report.lots {
        let _ = writeln!(
            out,
            "{:>4} {:>7} {:>6}  {:>9.3} {:>9.3}  {:>8.4} {:>8.4}  {:>9.5} {:>9.5}  {:>7.3}",
            l.lot + 1,
            l.permits,
            l.spaces,
            l.mean_arrivals,
            l.expected_mean,
            l.std_arrivals,
            l.expected_std,
            l.overflow_probability,
            l.exact_overflow,
            l.normal_deviate
        );
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { input, format } => {
            let instance = load_unchecked(&input)?;
            let report = validate_instance(&instance);
            print!("{}", render_validation(&report, format));
            if report.has_errors() {
                return Err(Failure::new(
                    EXIT_VALIDATION,
                    format!("{} has errors", input.instance.display()),
                ));
            }
            Ok(())
        }
        Command::Permits { input, output } => {
            let instance = load(&input)?;
            let issued = compute_permits(&instance).map_err(permit_failure)?;
            emit(
                output.output.as_deref(),
                &render_permits(&instance, &issued, output.format),
            )
        }
        Command::Solve {
            input,
            allocation,
            output,
        } => {
            let instance = load(&input)?;
            let permits = permits_for(&instance, allocation.permits_file.as_deref())?;
            let network = build_network(&instance, &permits, !allocation.no_reserved)
                .map_err(allocate_failure)?;
            let outcome = solve_min_cost_flow(&network).map_err(allocate_failure)?;
            let report = check_plan(&instance, &permits, &outcome.plan);
            if !report.is_satisfied() {
                let lines: Vec<String> =
                    report.violations.iter().map(ToString::to_string).collect();
                return Err(Failure::new(
                    EXIT_INTERNAL,
                    format!(
                        "solver returned a plan that fails the checker:\n{}",
                        lines.join("\n")
                    ),
                ));
            }
            eprintln!(
                "solved in {:.1?}, {} augmentations, certificate verified",
                outcome.wall_time, outcome.iterations
            );
            emit(
                output.output.as_deref(),
                &write_plan(&instance, &outcome.plan, plan_format(output.format)),
            )
        }
        Command::Simulate {
            input,
            permits_file,
            trials,
            seed,
            output,
        } => {
            let instance = load(&input)?;
            let permits = permits_for(&instance, permits_file.as_deref())?;
            let report = parkalloc::simulate_arrivals(&permits, &instance, trials, seed);
            emit(
                output.output.as_deref(),
                &render_simulation(&report, output.format),
            )
        }
        Command::Oracle {
            input,
            allocation,
            max_states,
            output,
        } => {
            let instance = load(&input)?;
            let permits = permits_for(&instance, allocation.permits_file.as_deref())?;
            let plan = brute_force_optimum(
                &instance,
                &permits,
                !allocation.no_reserved,
                EnumerationBudget { max_states },
            )
            .map_err(|e| match e {
                OracleError::Infeasible => Failure::new(EXIT_INFEASIBLE, e.to_string()),
                OracleError::DimensionMismatch(_) => Failure::new(EXIT_INPUT, e.to_string()),
                OracleError::BudgetExceeded(_) => Failure::new(EXIT_INTERNAL, e.to_string()),
            })?;
            emit(
                output.output.as_deref(),
                &write_plan(&instance, &plan, plan_format(output.format)),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
