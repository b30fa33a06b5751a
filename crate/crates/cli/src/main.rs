//! Command-line workflows: generate the nine measurement cases, solve
//! precoders, run Monte-Carlo campaigns, and aggregate the three-way
//! comparison.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 solver
//! non-convergence, 4 i/o error.

use clap::{Args, Parser, Subcommand};
use mgm_core::allocation::{mbps, mcs_table_export};
use mgm_core::exec;
use mgm_core::experiment::{
    compare_schemes, emit_report, load_case_result, save_case_result, solve_campaign_precoders,
    summary_table, verify_recomputable, CampaignSpec, CaseResult, McsSearchSpace,
};
use mgm_core::scenario::file::{load_scenario, save_scenario};
use mgm_core::scenario::{
    build_nine_cases, generate_channels, ideal_csit, pathloss_difference_db, reference_base,
    spatial_correlation, Multipath, ScenarioConfig,
};
use mgm_core::Scheme;
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
    SolverFlagged,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::SolverFlagged => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::SolverFlagged => write!(f, "solver did not converge (best iterate kept)"),
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

/// Scenario-file errors split into i/o (missing/unreadable) and config
/// (unparsable or invalid) classes.
fn map_file_err(e: mgm_core::scenario::file::FileError) -> CliError {
    match e {
        mgm_core::scenario::file::FileError::Io { .. } => io_err(e),
        other => config_err(other),
    }
}

#[derive(Parser)]
#[command(
    name = "mgm",
    about = "Link-level simulator for two-group multicast under RSMA, SDMA and NOMA",
    version
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the nine measurement-case scenario files plus a channel
    /// metric preview.
    GenCases(GenCasesArgs),
    /// Solve the max-min precoders for one scenario and scheme.
    Solve(SolveArgs),
    /// Run one campaign file: per-scheme MCS search on one scenario.
    Run(RunArgs),
    /// Full pipeline: nine cases, all schemes, comparison outputs.
    Sweep(SweepArgs),
    /// Aggregate stored case results into the comparison summary and
    /// plot data.
    Compare(CompareArgs),
    /// Re-render the human summary from stored results, verifying that
    /// every throughput is reproducible from its raw counts.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenCasesArgs {
    /// Base scenario file; a built-in reference base is used if omitted.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    scheme: Scheme,
    /// Precoder report destination (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Campaign spec file (TOML).
    #[arg(long)]
    campaign: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Base scenario file; built-in reference base if omitted.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    runs: u64,
    /// Schemes to compare.
    #[arg(long, value_delimiter = ',', default_values_t = vec![Scheme::Rsma, Scheme::Sdma, Scheme::Noma])]
    schemes: Vec<Scheme>,
    /// Restrict the MCS candidate indices (all ten when omitted).
    #[arg(long, value_delimiter = ',')]
    mcs: Option<Vec<u8>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory holding case_*.json results.
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding case_*.json results.
    #[arg(long)]
    results: PathBuf,
}

/// Campaign spec file: scenario by path plus search parameters.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignFile {
    schema_version: u32,
    scenario_path: PathBuf,
    schemes: Vec<Scheme>,
    runs: u64,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    resolve_per_run: bool,
    #[serde(default)]
    mcs_candidates: Option<McsSearchSpace>,
}

fn load_campaign(path: &Path) -> Result<CampaignSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    let file: CampaignFile =
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if file.schema_version != 1 {
        return Err(config_err(format!(
            "{}: unsupported schema_version {}",
            path.display(),
            file.schema_version
        )));
    }
    let scenario_path = if file.scenario_path.is_relative() {
        path.parent().unwrap_or(Path::new(".")).join(&file.scenario_path)
    } else {
        file.scenario_path.clone()
    };
    let scenario = load_scenario(&scenario_path).map_err(map_file_err)?;
    let mut spec = CampaignSpec::new(scenario);
    spec.schemes = file.schemes;
    spec.runs = file.runs;
    spec.seed = file.seed;
    spec.resolve_per_run = file.resolve_per_run;
    if let Some(mcs) = file.mcs_candidates {
        spec.mcs_candidates = mcs;
    }
    spec.validate().map_err(config_err)?;
    Ok(spec)
}

fn load_base(path: &Option<PathBuf>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut base = match path {
        Some(p) => load_scenario(p).map_err(map_file_err)?,
        None => reference_base(),
    };
    if let Some(s) = seed {
        base.seed = s;
    }
    base.validate().map_err(config_err)?;
    Ok(base)
}

/// LOS-only mean channel metrics of a case, for the preview table.
fn los_metrics(cfg: &ScenarioConfig) -> Result<(f64, f64), CliError> {
    let mut los = cfg.clone();
    los.multipath = Multipath::NONE;
    let chans = generate_channels(&los, 0).map_err(config_err)?;
    let occupied: Vec<usize> = (0..los.n_subcarriers).collect();
    let csit = ideal_csit(&chans, &occupied);
    let mut alphas = Vec::new();
    let mut rhos = Vec::new();
    for i in 0..2 {
        for j in 2..4 {
            alphas.push(pathloss_difference_db(&csit[i], &csit[j]).map_err(config_err)?);
            rhos.push(spatial_correlation(&csit[i], &csit[j]).map_err(config_err)?);
        }
    }
    Ok((alphas.iter().sum::<f64>() / 4.0, rhos.iter().sum::<f64>() / 4.0))
}

fn write_cases(base: &ScenarioConfig, out: &Path, verbose: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(io_err)?;
    let cases = build_nine_cases(base).map_err(config_err)?;
    let mut preview = String::from("case\tlos_alpha_db\tlos_rho\tseed\n");
    let mut paths = Vec::new();
    for (idx, case) in cases.iter().enumerate() {
        let path = out.join(format!("case_{}.toml", idx + 1));
        save_scenario(&path, case).map_err(io_err)?;
        let (alpha, rho) = los_metrics(case)?;
        preview.push_str(&format!("{}\t{alpha:.3}\t{rho:.4}\t{}\n", idx + 1, case.seed));
        if verbose {
            eprintln!("case {}: alpha {alpha:.2} dB, rho {rho:.3} -> {}", idx + 1, path.display());
        }
        paths.push(path);
    }
    std::fs::write(out.join("preview.tsv"), preview).map_err(io_err)?;
    // The MCS table ships next to the cases for downstream tooling.
    std::fs::write(out.join("mcs_table.json"), mcs_table_export()).map_err(io_err)?;
    Ok(paths)
}

fn cmd_gen_cases(args: &GenCasesArgs, verbose: bool) -> Result<(), CliError> {
    let base = load_base(&args.base, args.seed)?;
    write_cases(&base, &args.out, verbose)?;
    println!("wrote 9 case files and preview.tsv to {}", args.out.display());
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.scenario).map_err(map_file_err)?;
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let mut spec = CampaignSpec::new(scenario);
    spec.runs = 1;
    let solution = solve_campaign_precoders(&spec, args.scheme).map_err(config_err)?;
    let report = &solution.rates;
    println!("scheme: {} (mode {:?})", args.scheme, solution.precoders.mode);
    println!(
        "net rates (bits/s/Hz): group1 {:.4}, group2 {:.4} (min {:.4})",
        report.r_net[0],
        report.r_net[1],
        report.min_net()
    );
    println!(
        "stream rates: common {:.4}, private1 {:.4}, private2 {:.4}",
        report.r_c, report.r_p[0], report.r_p[1]
    );
    let p = &solution.precoders;
    println!(
        "power: common {:.4}, private1 {:.4}, private2 {:.4} (total {:.4})",
        mgm_core::util::norm2(&p.p_c),
        mgm_core::util::norm2(&p.p_1),
        mgm_core::util::norm2(&p.p_2),
        p.total_power()
    );
    println!(
        "objective trace: {} iterations, {:.6} -> {:.6}, converged: {}",
        solution.objective_trace.len(),
        solution.objective_trace.first().unwrap(),
        solution.objective_trace.last().unwrap(),
        solution.converged
    );
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&solution).map_err(io_err)?;
        text.push('\n');
        std::fs::write(out, text).map_err(io_err)?;
        println!("precoder report written to {}", out.display());
    }
    if !solution.converged {
        return Err(CliError::SolverFlagged);
    }
    Ok(())
}

fn case_label_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "case".into(), |s| s.to_string_lossy().into_owned())
}

fn cmd_run(args: &RunArgs, verbose: bool) -> Result<(), CliError> {
    let spec = load_campaign(&args.campaign)?;
    let label = case_label_of(&args.campaign);
    if verbose {
        eprintln!("running campaign {label}: {} runs", spec.runs);
    }
    let result = compare_schemes(&spec, &label).map_err(config_err)?;
    std::fs::create_dir_all(&args.out).map_err(io_err)?;
    let path = args.out.join(format!("{label}.json"));
    save_case_result(&path, &result).map_err(io_err)?;
    print!("{}", summary_table(std::slice::from_ref(&result)));
    println!("result written to {}", path.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, verbose: bool) -> Result<(), CliError> {
    let base = load_base(&args.base, args.seed)?;
    let cases_dir = args.out.join("cases");
    let case_paths = write_cases(&base, &cases_dir, verbose)?;
    let results_dir = args.out.join("results");
    std::fs::create_dir_all(&results_dir).map_err(io_err)?;
    let mut results = Vec::new();
    for (idx, case_path) in case_paths.iter().enumerate() {
        let scenario = load_scenario(case_path).map_err(map_file_err)?;
        let mut spec = CampaignSpec::new(scenario);
        spec.schemes = args.schemes.clone();
        spec.runs = args.runs;
        spec.seed = args.seed;
        if let Some(mcs) = &args.mcs {
            spec.mcs_candidates = McsSearchSpace::restricted(mcs);
        }
        spec.validate().map_err(config_err)?;
        let label = format!("case_{}", idx + 1);
        if verbose {
            eprintln!("campaign {label} ({} runs, {} schemes)", spec.runs, spec.schemes.len());
        }
        let result = compare_schemes(&spec, &label).map_err(config_err)?;
        save_case_result(&results_dir.join(format!("{label}.json")), &result).map_err(io_err)?;
        results.push(result);
    }
    emit_report(&results, &args.out).map_err(io_err)?;
    print!("{}", summary_table(&results));
    println!("sweep outputs in {}", args.out.display());
    Ok(())
}

fn collect_results(dir: &Path) -> Result<Vec<CaseResult>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Io(format!("no case result files in {}", dir.display())));
    }
    paths.iter().map(|p| load_case_result(p).map_err(io_err)).collect()
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let results = collect_results(&args.results)?;
    let written = emit_report(&results, &args.out).map_err(io_err)?;
    print!("{}", summary_table(&results));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let results = collect_results(&args.results)?;
    for case in &results {
        if !verify_recomputable(case) {
            return Err(config_err(format!(
                "case `{}`: stored throughputs do not match their decode counts",
                case.label
            )));
        }
    }
    print!("{}", summary_table(&results));
    println!(
        "{} case results verified: throughputs reproduce from raw counts (min throughputs {})",
        results.len(),
        results
            .iter()
            .flat_map(|c| c.outcomes.iter())
            .map(|o| mbps(o.min_throughput))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_err("--threads must be at least 1"));
        }
        exec::limit_threads(n).map_err(config_err)?;
    }
    match &cli.command {
        Command::GenCases(args) => cmd_gen_cases(args, cli.verbose),
        Command::Solve(args) => cmd_solve(args),
        Command::Run(args) => cmd_run(args, cli.verbose),
        Command::Sweep(args) => cmd_sweep(args, cli.verbose),
        Command::Compare(args) => cmd_compare(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn main() {
    match real_main() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}
