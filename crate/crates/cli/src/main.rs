use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use childcare_core::fuzz::{run_fuzz, Check, FuzzConfig};
use childcare_core::io::{builtin_text, BUILTIN_NAMES};
use childcare_core::trace::{render_events, render_table};
use childcare_core::{
    aspda, builtin_instance, builtin_matching, compare_mechanisms, derive_order, ir_certificates, is_stable,
    parse_instance, parse_matching, serialize_matching, AuditError, EntryOrder, ExtendedPreference, Instance, Matching,
    MechanismError, ParseMode, Provenance, StudentId,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_UNSTABLE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_NON_TERMINATION: u8 = 4;
const EXIT_TOO_LARGE: u8 = 5;

#[derive(Parser)]
#[command(name = "childcare", version, about = "Two-period childcare matching and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mechanism and print the matching document.
    Run(RunArgs),
    /// Check a matching for individual rationality and blocking coalitions.
    Audit(AuditArgs),
    /// List every individually rational matching with its blocking coalitions.
    Enumerate(EnumerateArgs),
    /// Check the mechanism on seeded random instances.
    Fuzz(FuzzArgs),
    /// Run the mechanism and the per-period baseline side by side.
    Compare(CompareArgs),
    /// Print a bundled fixture, or list them.
    Builtin { name: Option<String> },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Instance document to load.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Bundled instance to load.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args)]
#[group(multiple = false)]
struct OrderArgs {
    /// Entry order of the willingness-to-remain students, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// Seed from which the entry order is derived.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceMode {
    Off,
    Events,
    Table,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long, value_enum, default_value = "off")]
    trace: TraceMode,
    /// Write the matching document here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    source: Source,
    /// Matching document to audit.
    #[arg(long, conflicts_with = "builtin_matching", required_unless_present = "builtin_matching")]
    matching: Option<PathBuf>,
    /// Bundled matching to audit.
    #[arg(long)]
    builtin_matching: Option<String>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    source: Source,
    /// Refuse instances with more candidate matchings than this.
    #[arg(long, default_value_t = childcare_core::DEFAULT_ENUMERATION_BOUND)]
    bound: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Stability,
    Oracle,
    Strategyproofness,
    RhoSensitivity,
}

impl From<CheckArg> for Check {
    fn from(c: CheckArg) -> Self {
        match c {
            CheckArg::Stability => Check::Stability,
            CheckArg::Oracle => Check::Oracle,
            CheckArg::Strategyproofness => Check::StrategyProofness,
            CheckArg::RhoSensitivity => Check::RhoSensitivity,
        }
    }
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = lo.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<u32>().map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("{lo} is above {hi}"));
    }
    Ok((lo, hi))
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    count: u64,
    /// First instance seed; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_students: usize,
    #[arg(long, default_value_t = 3)]
    max_schools: usize,
    #[arg(long, default_value_t = 0.5)]
    wtr_fraction: f64,
    #[arg(long, default_value_t = 3)]
    max_list_length: usize,
    /// Period-1 capacity range, LO,HI.
    #[arg(long, value_parser = parse_range, default_value = "0,2")]
    capacity_first: (u32, u32),
    /// Period-2 capacity range, LO,HI.
    #[arg(long, value_parser = parse_range, default_value = "0,2")]
    capacity_second: (u32, u32),
    #[arg(long, value_enum, value_delimiter = ',', default_value = "stability")]
    check: Vec<CheckArg>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    order: OrderArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn mechanism_failure(e: MechanismError) -> Failure {
    let code = match e {
        MechanismError::OutOfDomain(_) => EXIT_DOMAIN,
        MechanismError::NonTermination { .. } => EXIT_NON_TERMINATION,
        _ => EXIT_INVALID,
    };
    Failure::new(code, e.to_string())
}

fn audit_failure(e: AuditError) -> Failure {
    match e {
        AuditError::TooLarge { .. } => Failure::new(EXIT_TOO_LARGE, e.to_string()),
        AuditError::Mechanism(m) => mechanism_failure(m),
        _ => Failure::new(EXIT_INVALID, e.to_string()),
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

/// Out-of-domain reports are accepted here so the mechanism can refuse
/// them with its own exit code, and the auditors can examine them.
fn load(source: &Source) -> Result<Instance, Failure> {
    let loaded = match (&source.instance, &source.builtin) {
        (Some(path), _) => parse_instance(&read(path)?, ParseMode::Audit),
        (None, Some(name)) => builtin_instance(name),
        (None, None) => unreachable!("clap requires a source"),
    };
    loaded.map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))
}

fn has_wtr(inst: &Instance) -> bool {
    inst.students().iter().any(|s| matches!(s.preference, ExtendedPreference::WillingnessToRemain(_)))
}

fn resolve_order(inst: &Instance, args: &OrderArgs) -> Result<(EntryOrder, Provenance), Failure> {
    let mut prov = Provenance { mechanism: "aspda".into(), order: None, seed: None };
    let order = match (&args.order, args.seed) {
        (Some(ids), _) => ids.iter().map(|s| StudentId::from(s.as_str())).collect(),
        (None, Some(seed)) => {
            prov.seed = Some(seed);
            derive_order(inst, seed)
        }
        (None, None) if has_wtr(inst) => {
            return Err(Failure::new(EXIT_INVALID, "willingness-to-remain students present: pass --order or --seed"))
        }
        (None, None) => EntryOrder::default(),
    };
    prov.order = Some(order.as_slice().iter().map(|s| s.to_string()).collect());
    Ok((order, prov))
}

fn cmd_run(args: &RunArgs) -> Result<(String, u8), Failure> {
    let inst = load(&args.source)?;
    let (order, prov) = resolve_order(&inst, &args.order)?;
    let (m, events) = aspda(&inst, &order).map_err(mechanism_failure)?;
    let mut out = match args.trace {
        TraceMode::Off => String::new(),
        TraceMode::Events => render_events(&events),
        TraceMode::Table => render_table(&events),
    };
    let doc = serialize_matching(&m, Some(&prov));
    match &args.output {
        Some(path) => {
            fs::write(path, doc).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))?
        }
        None => out.push_str(&doc),
    }
    Ok((out, 0))
}

fn cmd_audit(args: &AuditArgs) -> Result<(String, u8), Failure> {
    let inst = load(&args.source)?;
    let m = match (&args.matching, &args.builtin_matching) {
        (Some(path), _) => parse_matching(&read(path)?).map(|(m, _)| m),
        (None, Some(name)) => builtin_matching(name),
        (None, None) => unreachable!("clap requires a matching"),
    }
    .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let report = is_stable(&inst, &m).map_err(audit_failure)?;
    let code = if report.stable { 0 } else { EXIT_UNSTABLE };
    Ok((report.to_string(), code))
}

fn matching_line(m: &Matching) -> String {
    m.iter().map(|(id, a)| format!("{id}{a}")).collect::<Vec<_>>().join(" ")
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<(String, u8), Failure> {
    let inst = load(&args.source)?;
    let certs = ir_certificates(&inst, args.bound).map_err(audit_failure)?;
    let stable = certs.iter().filter(|(_, blocks)| blocks.is_empty()).count();
    let mut out = String::new();
    writeln!(out, "{stable} stable matchings").unwrap();
    writeln!(out, "{} individually rational matchings", certs.len()).unwrap();
    for (m, blocks) in &certs {
        writeln!(out, "{}", matching_line(m)).unwrap();
        if blocks.is_empty() {
            writeln!(out, "  stable").unwrap();
        }
        for b in blocks {
            writeln!(out, "  blocked by {b}").unwrap();
        }
    }
    Ok((out, 0))
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<(String, u8), Failure> {
    let config = FuzzConfig {
        base_seed: args.seed,
        count: args.count,
        max_students: args.max_students,
        max_schools: args.max_schools,
        wtr_fraction: args.wtr_fraction,
        max_list_length: args.max_list_length,
        capacity_first: args.capacity_first,
        capacity_second: args.capacity_second,
    };
    let mut checks: Vec<Check> = Vec::new();
    for c in &args.check {
        let c = Check::from(*c);
        if !checks.contains(&c) {
            checks.push(c);
        }
    }
    let summary = run_fuzz(&config, &checks).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let mut out = summary.to_string();
    let check_list: Vec<String> =
        args.check.iter().filter_map(|c| c.to_possible_value().map(|v| v.get_name().to_owned())).collect();
    for seed in summary.violating_seeds() {
        writeln!(
            out,
            "reproduce: childcare fuzz --seed {seed} --count 1 --max-students {} --max-schools {} --wtr-fraction {} \
             --max-list-length {} --capacity-first {},{} --capacity-second {},{} --check {}",
            args.max_students,
            args.max_schools,
            args.wtr_fraction,
            args.max_list_length,
            args.capacity_first.0,
            args.capacity_first.1,
            args.capacity_second.0,
            args.capacity_second.1,
            check_list.join(",")
        )
        .unwrap();
    }
    let code = if summary.passed() { 0 } else { EXIT_UNSTABLE };
    Ok((out, code))
}

fn cmd_compare(args: &CompareArgs) -> Result<(String, u8), Failure> {
    let inst = load(&args.source)?;
    let (order, _) = resolve_order(&inst, &args.order)?;
    let c = compare_mechanisms(&inst, &order).map_err(audit_failure)?;
    let rows: Vec<(String, String, String)> = c
        .aspda
        .iter()
        .map(|(id, a)| {
            let naive = c.naive.get(id).map(ToString::to_string).unwrap_or_default();
            (id.to_string(), a.to_string(), naive)
        })
        .collect();
    let w0 = rows.iter().map(|r| r.0.len()).chain(["student".len()]).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.1.len()).chain(["aspda".len()]).max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{:<w0$}  {:<w1$}  naive", "student", "aspda").unwrap();
    for (id, a, n) in &rows {
        writeln!(out, "{id:<w0$}  {a:<w1$}  {n}").unwrap();
    }
    writeln!(out, "\naspda audit:").unwrap();
    out.push_str(&c.aspda_audit.to_string());
    writeln!(out, "\nnaive audit:").unwrap();
    out.push_str(&c.naive_audit.to_string());
    Ok((out, 0))
}

fn cmd_builtin(name: &Option<String>) -> Result<(String, u8), Failure> {
    match name {
        Some(name) => {
            let text = builtin_text(name).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
            Ok((text.to_owned(), 0))
        }
        None => Ok((BUILTIN_NAMES.iter().map(|n| format!("{n}\n")).collect(), 0)),
    }
}

fn dispatch(command: &Command) -> Result<(String, u8), Failure> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Builtin { name } => cmd_builtin(name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
