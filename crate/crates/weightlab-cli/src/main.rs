//! `weightlab`: condition sweeps, figure validation and the disc oracle
//! from the command line.
//!
//! Exit codes: 0 done, 1 malformed input, 2 non-integrable weight, 3 tail
//! error, 4 inconclusive figure cells, 5 violations or failed oracle checks.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;
use weightlab::conditions::{ConditionId, SweepConfig, SweepReport, Sweeper};
use weightlab::disc::{run_oracle, QuadratureSpec};
use weightlab::families::{expected_behavior, FamilyId, FamilySpec, NamedFamily};
use weightlab::implication::{build_graph, validate_figures};
use weightlab::profile::json::ProfileSpec;
use weightlab::profile::Profile;
use weightlab::Error;

/// Version of every JSON document this binary writes or reads.
const SCHEMA_VERSION: u32 = 1;

/// Blocks a sweep needs below its deepest scale.
const DEPTH_MARGIN: u64 = 24;

#[derive(Parser)]
#[command(name = "weightlab", version, about = "Condition sweeps for radial weights on the unit disc")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep conditions over dyadic scales and report a verdict for each.
    Classify(ClassifyArgs),
    /// Check every cell of the implication charts against the named families.
    ValidateFigures(SweepArgs),
    /// Compare 2D quadrature on Carleson squares with the 1D reduction.
    Oracle(OracleArgs),
    /// Print a family's parameters, pieces and expected verdicts.
    ShowFamily(ShowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Family name (`Ex6_3`, `constant`, `ExCentre(0.5)`) or inline family JSON.
    #[arg(long, conflicts_with = "profile_file")]
    family: Option<String>,
    /// Step profile or family spec as JSON.
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Blocks to materialize for a family.
    #[arg(long)]
    depth: Option<u64>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    divergence_factor: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run configuration as JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated conditions, e.g. `P1,P8(0.5),P4(0.5,0.9)`, or `all`.
    #[arg(long)]
    conditions: Option<String>,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Arc length `|I|` of the square.
    #[arg(long, default_value_t = 1.0)]
    arc: f64,
    /// Seed for the sampled median cross-check.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2048)]
    radial: usize,
    #[arg(long, default_value_t = 64)]
    angular: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ShowArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `--config` file; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    schema_version: u32,
    family: Option<String>,
    profile_file: Option<PathBuf>,
    conditions: Option<String>,
    n_max: Option<usize>,
    divergence_factor: Option<f64>,
    format: Option<Format>,
    seed: Option<u64>,
    depth: Option<u64>,
}

/// What went wrong, mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::NonIntegrable => 2,
            Error::BelowCoverage | Error::Tail(_) => 3,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

type Out<T> = std::result::Result<T, Failure>;

fn load_config(path: &Option<PathBuf>) -> Out<RunConfig> {
    let Some(p) = path else { return Ok(RunConfig { schema_version: SCHEMA_VERSION, ..Default::default() }) };
    let text = std::fs::read_to_string(p).map_err(|e| malformed(format!("{}: {e}", p.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| malformed(format!("config: {e}")))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(malformed(format!("config schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version)));
    }
    Ok(cfg)
}

/// The weight to work on, its label, and the family if it is one.
fn load_input(input: &InputArgs, cfg: &RunConfig, n_max: Option<usize>) -> Out<(Profile, String, Option<FamilyId>)> {
    let depth = input.depth.or(cfg.depth);
    let family = input.family.clone().or_else(|| cfg.family.clone());
    let file = input.profile_file.clone().or_else(|| cfg.profile_file.clone());
    let named = match (family, file) {
        (Some(f), _) if f.trim_start().starts_with('{') => FamilySpec::from_json(&f)?.family()?,
        (Some(f), _) => NamedFamily::new(FamilyId::parse(&f)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
            if let Ok(spec) = ProfileSpec::from_json(&text) {
                let label = path.file_stem().map_or("profile".into(), |s| s.to_string_lossy().into_owned());
                return Ok((Profile::Step(spec.build()?), label, None));
            }
            FamilySpec::from_json(&text).map_err(|_| malformed(format!("{}: neither a profile nor a family spec", path.display())))?.family()?
        }
        (None, None) => return Err(malformed("need --family or --profile-file")),
    };
    let named = match depth {
        Some(d) => named.with_depth(d),
        None => named,
    };
    if let Some(n) = n_max {
        if named.id.uses_b_rule() && n as u64 + DEPTH_MARGIN > named.depth {
            return Err(malformed(format!("n_max {n} needs depth at least {} (have {})", n as u64 + DEPTH_MARGIN, named.depth)));
        }
    }
    named.validate()?;
    Ok((named.instantiate()?, named.id.to_string(), Some(named.id)))
}

fn sweep_config(args: &SweepArgs, cfg: &RunConfig) -> Out<SweepConfig> {
    let mut sc = SweepConfig::default();
    if let Some(n) = args.n_max.or(cfg.n_max) {
        sc.n_max = n;
    }
    if let Some(f) = args.divergence_factor.or(cfg.divergence_factor) {
        if !(f > 1.0 && f.is_finite()) {
            return Err(malformed(format!("divergence factor {f} must exceed 1")));
        }
        sc.factor = f;
    }
    Ok(sc)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Out<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| malformed(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ClassifyDoc<'a> {
    schema_version: u32,
    weight: &'a str,
    n_max: usize,
    divergence_factor: f64,
    reports: Vec<Entry>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Entry {
    Report(Box<SweepReport>),
    Error { condition: String, error: String },
}

fn cmd_classify(a: ClassifyArgs) -> Out<u8> {
    let cfg = load_config(&a.sweep.config)?;
    let sc = sweep_config(&a.sweep, &cfg)?;
    let (profile, label, _) = load_input(&a.input, &cfg, Some(sc.n_max))?;
    let conds = ConditionId::parse_list(a.conditions.as_deref().or(cfg.conditions.as_deref()).unwrap_or("all"))?;
    let format = a.sweep.format.or(cfg.format).unwrap_or(Format::Json);

    let mut code = 0u8;
    let results: Vec<std::result::Result<SweepReport, Error>> = if profile.integrable() {
        let sw = Sweeper::new(&profile, sc)?;
        conds.par_iter().map(|c| sw.run(c)).collect()
    } else {
        eprintln!("{label}: non-integrable");
        code = 2;
        let ac: Vec<_> = conds.iter().filter(|c| **c == ConditionId::AC).collect();
        let sw = if ac.is_empty() { None } else { Some(Sweeper::new(&profile, sc)?) };
        conds.iter().map(|c| if *c == ConditionId::AC { sw.as_ref().unwrap().run(c) } else { Err(Error::NonIntegrable) }).collect()
    };
    let mut entries = Vec::with_capacity(results.len());
    for (c, r) in conds.iter().zip(results) {
        match r {
            Ok(rep) => {
                if rep.error.as_deref().is_some_and(|e| e.starts_with("tail error")) {
                    code = code.max(3);
                }
                entries.push(Entry::Report(Box::new(rep)));
            }
            Err(e) => {
                code = code.max(Failure::from(e.clone()).code);
                entries.push(Entry::Error { condition: c.to_string(), error: e.to_string() });
            }
        }
    }
    for e in &entries {
        match e {
            Entry::Report(r) => eprintln!("{:<6} {}", r.condition, r.verdict.label()),
            Entry::Error { condition, error } => eprintln!("{condition:<6} error: {error}"),
        }
    }
    let text = match format {
        Format::Json => {
            let doc = ClassifyDoc { schema_version: SCHEMA_VERSION, weight: &label, n_max: sc.n_max, divergence_factor: sc.factor, reports: entries };
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
        Format::Csv => plot_csv(&entries)?,
    };
    emit(&a.sweep.out, &text)?;
    Ok(code)
}

/// Plot data: one row per sample of the series that decided each verdict.
fn plot_csv(entries: &[Entry]) -> Out<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| malformed(e.to_string());
    w.write_record(["condition", "n", "lo", "hi", "verdict"]).map_err(fail)?;
    for e in entries {
        if let Entry::Report(r) = e {
            for s in &r.samples {
                let (lo, hi) = s.value.render();
                w.write_record([r.condition.as_str(), &s.n.to_string(), &lo, &hi, r.verdict.label()]).map_err(fail)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| malformed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn cmd_validate(a: SweepArgs) -> Out<u8> {
    let cfg = load_config(&a.config)?;
    let sc = sweep_config(&a, &cfg)?;
    let report = validate_figures(&build_graph(), sc)?;
    let text = match a.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["schema_version"] = SCHEMA_VERSION.into();
            serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
        }
        Format::Csv => report.to_csv(),
    };
    emit(&a.out, &text)?;
    let bad = report.cells.iter().filter(|c| c.validated.name() != "yes").count();
    eprintln!("{} cells, {} not validated, {} violations", report.cells.len(), bad, report.violations.len());
    Ok(report.exit_code() as u8)
}

fn cmd_oracle(a: OracleArgs) -> Out<u8> {
    let cfg = load_config(&a.config)?;
    let (profile, label, _) = load_input(&a.input, &cfg, None)?;
    let spec = QuadratureSpec { radial: a.radial, angular: a.angular, split: true };
    let report = run_oracle(&profile, &label, a.arc, a.seed.or(cfg.seed).unwrap_or(0), &spec)?;
    let text = match a.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["schema_version"] = SCHEMA_VERSION.into();
            serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for c in &report.checks {
                w.serialize(c).map_err(|e| malformed(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| malformed(e.to_string()))?).expect("csv is utf-8")
        }
    };
    emit(&a.out, &text)?;
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| format!("({}) {}", c.part, c.name)).collect();
    if failed.is_empty() {
        eprintln!("{label}: {} checks pass", report.checks.len());
        Ok(0)
    } else {
        eprintln!("{label}: failed {}", failed.join(", "));
        Ok(5)
    }
}

fn cmd_show(a: ShowArgs) -> Out<u8> {
    let cfg = RunConfig::default();
    let (profile, label, id) = load_input(&a.input, &cfg, None)?;
    let mut doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "weight": label });
    if let Some(id) = id {
        let nf = NamedFamily::new(id).with_depth(a.input.depth.unwrap_or(NamedFamily::new(id).depth));
        doc["describe"] = nf.describe().into();
        doc["expected"] = serde_json::to_value(expected_behavior(id)).expect("claims serialize");
    }
    match &profile {
        Profile::Step(sp) => {
            let pieces: Vec<_> = sp
                .pieces()
                .iter()
                .map(|q| serde_json::json!({ "hi": q.hi.to_string(), "len": q.len.to_string(), "value": q.val.to_string() }))
                .collect();
            doc["coordinate"] = sp.coord.tag().into();
            doc["floor"] = sp.floor().to_string().into();
            doc["pieces"] = pieces.into();
            doc["integrable"] = sp.integrable.into();
        }
        Profile::Power(pp) => doc["power"] = pp.describe().into(),
    }
    emit(&a.out, &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("WEIGHTLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let r = match cli.cmd {
        Cmd::Classify(a) => cmd_classify(a),
        Cmd::ValidateFigures(a) => cmd_validate(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::ShowFamily(a) => cmd_show(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
