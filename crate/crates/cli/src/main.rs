//! Command-line front end: instance ingestion, protocol runs with trace and
//! CSV emission, cover-free family construction, synthetic-instance
//! generation, and lemma-verification suites.
//!
//! Exit status: 0 when every validation passed, 1 on a validation or
//! protocol failure, 2 on a usage error.

mod instance;
mod lemmas;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use localcolor_core::combinatorics::{binomial, enumerate_k_subsets, greedy_cover_free, CoverFreeFamily};
use localcolor_core::framework::{
    derive_parameters, Budget, Mode, Overrides, P2Cache, ParameterSet,
};
use localcolor_core::gen;
use localcolor_core::graph::{validate_coloring, ListAssignment, VertexColoring};
use localcolor_core::protocols::defective::{defective_color, defective_list_color};
use localcolor_core::protocols::linial::linial_reduce;
use localcolor_core::protocols::lists::linial_for_lists;
use localcolor_core::protocols::pipeline::{deg_plus_one_list_color, PipelineConfig};
use localcolor_core::protocols::AccountingMode;
use localcolor_core::simulator::RoundTrace;
use localcolor_core::Graph;

use instance::InstanceDoc;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: unknown files, inconsistent flags. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The run failed: protocol error or validation failure. Exit code 1.
    #[error("{0}")]
    Failure(String),
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Distributed coloring protocols under a deterministic round simulator.
#[derive(Parser)]
#[command(name = "localcolor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a greedy cover-free family and verify it.
    CoverFree(CoverFreeArgs),
    /// Run a protocol on an instance file; write coloring, trace, and CSV.
    Run(RunArgs),
    /// Brute-force the combinatorial lemmas and write a witness report.
    VerifyLemmas(LemmasArgs),
    /// Generate a seeded random instance with (deg+1) lists.
    Gen(GenArgs),
}

#[derive(Args)]
struct CoverFreeArgs {
    /// Number of sets in the family.
    #[arg(long)]
    m: u32,
    /// No set may be covered by the union of any `delta` others.
    #[arg(long)]
    delta: u32,
    /// Candidate budget for the greedy selection.
    #[arg(long, default_value_t = 2_000_000)]
    budget: u64,
    /// Seed for sampled verification (only used above the exhaustive cutoff).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for family.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Paper,
    Desk,
}

impl From<ModeArg> for Mode {
    fn from(value: ModeArg) -> Mode {
        match value {
            ModeArg::Paper => Mode::Paper,
            ModeArg::Desk => Mode::Desk,
        }
    }
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Paper => "paper",
            ModeArg::Desk => "desk",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AccountingArg {
    Formula,
    Literal,
}

impl From<AccountingArg> for AccountingMode {
    fn from(value: AccountingArg) -> AccountingMode {
        match value {
            AccountingArg::Formula => AccountingMode::Formula,
            AccountingArg::Literal => AccountingMode::Literal,
        }
    }
}

impl AccountingArg {
    fn name(self) -> &'static str {
        match self {
            AccountingArg::Formula => "formula",
            AccountingArg::Literal => "literal",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Protocol {
    LinialReduce,
    LinialLists,
    Defective,
    DefectiveList,
    DegPlusOne,
}

impl Protocol {
    fn name(self) -> &'static str {
        match self {
            Protocol::LinialReduce => "linial-reduce",
            Protocol::LinialLists => "linial-lists",
            Protocol::Defective => "defective",
            Protocol::DefectiveList => "defective-list",
            Protocol::DegPlusOne => "deg-plus-one",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Protocol to run.
    #[arg(value_enum)]
    protocol: Protocol,
    /// Instance file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Parameter regime: paper derives everything from (β, m, |C|); desk
    /// takes the core overrides below.
    #[arg(long, value_enum, default_value_t = ModeArg::Desk)]
    mode: ModeArg,
    /// Message-size accounting.
    #[arg(long, value_enum, default_value_t = AccountingArg::Formula)]
    accounting: AccountingArg,
    /// Enumeration budget (families, candidate streams).
    #[arg(long, default_value_t = 2_000_000)]
    budget: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Out-degree bound β; defaults to the instance's own bound.
    #[arg(long)]
    beta: Option<u64>,
    /// Defect bound d (defective protocols).
    #[arg(long)]
    defect: Option<usize>,
    /// Core parameter overrides (desk mode): all five together.
    #[arg(long)]
    tau: Option<u64>,
    #[arg(long)]
    tau_prime: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    k_prime: Option<u64>,
    #[arg(long)]
    l0: Option<u64>,
    /// Override for the pipeline's X quantity (deg-plus-one, desk mode).
    #[arg(long)]
    x_override: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LemmaScope {
    All,
    D1,
    L2Size,
    LdRatio,
    TauTau,
}

impl LemmaScope {
    fn name(self) -> &'static str {
        match self {
            LemmaScope::All => "all",
            LemmaScope::D1 => "d1",
            LemmaScope::L2Size => "l2-size",
            LemmaScope::LdRatio => "ld-ratio",
            LemmaScope::TauTau => "tau-tau",
        }
    }
}

#[derive(Args)]
struct LemmasArgs {
    /// Which suites to run.
    #[arg(long, value_enum, default_value_t = LemmaScope::All)]
    scope: LemmaScope,
    /// Enumeration budget; must be positive.
    #[arg(long, default_value_t = 2_000_000)]
    budget: u64,
    /// Output directory for lemmas.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Vertex count.
    #[arg(long)]
    n: usize,
    /// Degree cap for the random graph.
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// Seed; together with the other flags it fully determines the instance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Color space size |C| (default 4·(max_degree+1)).
    #[arg(long)]
    colorspace: Option<u64>,
    /// Output file.
    #[arg(long, default_value = "instance.json")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CoverFree(args) => cmd_cover_free(args),
        Command::Run(args) => cmd_run(args),
        Command::VerifyLemmas(args) => cmd_verify_lemmas(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::Failure(format!("writing {}: {e}", path.display())))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))
}

// ---------------------------------------------------------------------------
// cover-free

#[derive(Serialize)]
struct FamilyVerification {
    method: &'static str,
    checks: u64,
    pass: bool,
    /// (covered set, covering sets) on failure.
    witness: Option<(usize, Vec<usize>)>,
}

/// True when `sets[target]` is contained in the union of the `others`.
fn is_covered(family: &CoverFreeFamily, target: usize, others: &[usize]) -> bool {
    let mut marked = vec![false; family.universe as usize];
    for &j in others {
        for &p in &family.sets[j] {
            marked[p as usize] = true;
        }
    }
    family.sets[target].iter().all(|&p| marked[p as usize])
}

/// Exhaustive when `C(m, delta) * m <= 10^6`, otherwise 10^4 sampled trials.
fn verify_family(family: &CoverFreeFamily, seed: u64) -> Result<FamilyVerification, CliError> {
    let m = family.sets.len();
    let delta = family.delta as usize;
    let exhaustive = binomial(m as u64, delta as u64)
        .and_then(|c| c.checked_mul(m as u128))
        .is_some_and(|total| total <= 1_000_000);
    let mut checks = 0u64;
    let mut witness = None;
    if exhaustive {
        for target in 0..m {
            let others: Vec<u32> =
                (0..m as u32).filter(|&j| j != target as u32).collect();
            let unions = enumerate_k_subsets(&others, delta as u32, u64::MAX)
                .map_err(failure)?;
            for subset in &unions {
                checks += 1;
                let ids: Vec<usize> = subset.iter().map(|&j| j as usize).collect();
                if is_covered(family, target, &ids) {
                    witness = Some((target, ids));
                    break;
                }
            }
            if witness.is_some() {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let target = rng.gen_range(0..m);
            let others: Vec<usize> = rand::seq::index::sample(&mut rng, m - 1, delta)
                .iter()
                .map(|j| if j >= target { j + 1 } else { j })
                .collect();
            checks += 1;
            if is_covered(family, target, &others) {
                witness = Some((target, others));
                break;
            }
        }
    }
    Ok(FamilyVerification {
        method: if exhaustive { "exhaustive" } else { "sampled" },
        checks,
        pass: witness.is_none(),
        witness,
    })
}

fn cmd_cover_free(args: CoverFreeArgs) -> Result<(), CliError> {
    if args.m < 3 || args.delta < 2 {
        return Err(CliError::Usage(format!(
            "cover-free needs --m >= 3 and --delta >= 2, got m = {}, delta = {}",
            args.m, args.delta
        )));
    }
    let family = greedy_cover_free(args.m, args.delta, args.budget).map_err(failure)?;
    let bound =
        5.2 * f64::from(args.delta).powi(2) * (std::f64::consts::E * f64::from(args.m)).log2();
    let verification = verify_family(&family, args.seed)?;

    ensure_out_dir(&args.out)?;
    #[derive(Serialize)]
    struct FamilyDoc<'a> {
        config: Value,
        universe_bound: f64,
        verification: &'a FamilyVerification,
        family: &'a CoverFreeFamily,
    }
    write_json(
        &args.out.join("family.json"),
        &FamilyDoc {
            config: json!({ "m": args.m, "delta": args.delta, "budget": args.budget, "seed": args.seed }),
            universe_bound: bound,
            verification: &verification,
            family: &family,
        },
    )?;

    println!("universe: {}", family.universe);
    println!("bound: {}", bound.floor() as u64);
    println!(
        "verification: {} ({} checks): {}",
        verification.method,
        verification.checks,
        if verification.pass { "PASS" } else { "FAIL" }
    );
    if verification.pass {
        Ok(())
    } else {
        Err(CliError::Failure("cover-freeness verification failed".into()))
    }
}

// ---------------------------------------------------------------------------
// run

struct RunCtx {
    mode: Mode,
    overrides: Option<Overrides>,
    budget: Budget,
    accounting: AccountingMode,
    beta: Option<u64>,
    defect: Option<usize>,
    x_override: Option<f64>,
}

struct RunOutput {
    colors: Vec<Option<u32>>,
    /// Output palette, for protocols that recolor into a fixed new palette.
    palette: Option<u64>,
    trace: RoundTrace,
    params: Option<ParameterSet>,
    details: Value,
    /// Validation failures; empty means the verdict is PASS.
    failures: Vec<String>,
}

fn collect_overrides(args: &RunArgs) -> Result<Option<Overrides>, CliError> {
    match (args.tau, args.tau_prime, args.k, args.k_prime, args.l0) {
        (None, None, None, None, None) => Ok(None),
        (Some(tau), Some(tau_prime), Some(k), Some(k_prime), Some(l0)) => {
            Ok(Some(Overrides { tau, tau_prime, k, k_prime, l0 }))
        }
        _ => Err(CliError::Usage(
            "core overrides must be given together: --tau --tau-prime --k --k-prime --l0".into(),
        )),
    }
}

fn check_coloring(
    graph: &Graph,
    lists: Option<&ListAssignment>,
    coloring: &VertexColoring,
    d: usize,
    require_complete: bool,
) -> Vec<String> {
    let mut failures: Vec<String> = validate_coloring(graph, lists, coloring, d)
        .violations
        .iter()
        .map(|v| format!("{v:?}"))
        .collect();
    if require_complete && !coloring.is_complete() {
        failures.push(format!(
            "coloring is incomplete: {} of {} vertices colored",
            coloring.colored_count(),
            graph.n()
        ));
    }
    failures
}

fn run_linial_reduce(
    doc: &InstanceDoc,
    graph: &Graph,
    ctx: &RunCtx,
) -> Result<RunOutput, CliError> {
    let degree_bound =
        if doc.directed { graph.max_out_degree() } else { graph.max_degree() };
    let family = greedy_cover_free(
        graph.m().max(3),
        (degree_bound as u32).max(2),
        ctx.budget.max_family,
    )
    .map_err(failure)?;
    let outcome = linial_reduce(graph, &family, doc.directed, ctx.accounting).map_err(failure)?;
    let coloring =
        VertexColoring::from_colors(outcome.psi.iter().map(|&c| Some(c)).collect());
    let failures = check_coloring(graph, None, &coloring, 0, true);
    Ok(RunOutput {
        colors: coloring.colors().to_vec(),
        palette: Some(u64::from(outcome.m)),
        trace: outcome.trace,
        params: None,
        details: json!({
            "family": {
                "delta": family.delta,
                "m": family.m,
                "z": family.z,
                "x": family.x,
                "l": family.l,
                "universe": family.universe,
            },
            "palette_in": graph.m(),
            "palette_out": outcome.m,
        }),
        failures,
    })
}

fn run_linial_lists(
    doc: &InstanceDoc,
    graph: &Graph,
    ctx: &RunCtx,
) -> Result<RunOutput, CliError> {
    let raw = doc.lists_for("linial-lists")?.to_vec();
    let beta = ctx.beta.unwrap_or_else(|| (graph.max_out_degree() as u64).max(1));
    let params = derive_parameters(
        ctx.mode,
        beta,
        u64::from(graph.m()),
        doc.colorspace,
        ctx.overrides.as_ref(),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let lists = ListAssignment::normalize(raw, params.l0 as usize, doc.colorspace, graph.n())
        .map_err(failure)?;
    let mut cache = P2Cache::new();
    let outcome = linial_for_lists(graph, &lists, &params, &ctx.budget, &mut cache, ctx.accounting)
        .map_err(failure)?;
    let failures = check_coloring(graph, Some(&lists), &outcome.coloring, 0, true);
    Ok(RunOutput {
        colors: outcome.coloring.colors().to_vec(),
        palette: None,
        trace: outcome.trace,
        params: Some(params),
        details: json!({
            "min_list_len": outcome.min_list_len,
            "degree_exact": outcome.degree_exact,
        }),
        failures,
    })
}

fn run_defective(graph: &Graph, ctx: &RunCtx) -> Result<RunOutput, CliError> {
    let d = ctx
        .defect
        .ok_or_else(|| CliError::Usage("defective needs --defect".into()))?;
    let outcome = defective_color(graph, d, &ctx.budget, ctx.accounting).map_err(failure)?;
    let coloring =
        VertexColoring::from_colors(outcome.psi.iter().map(|&c| Some(c)).collect());
    let failures = check_coloring(graph, None, &coloring, d, true);
    Ok(RunOutput {
        colors: coloring.colors().to_vec(),
        palette: Some(u64::from(outcome.m)),
        trace: outcome.trace,
        params: None,
        details: json!({ "params": outcome.params }),
        failures,
    })
}

fn run_defective_list(
    doc: &InstanceDoc,
    graph: &Graph,
    ctx: &RunCtx,
) -> Result<RunOutput, CliError> {
    let d = ctx
        .defect
        .ok_or_else(|| CliError::Usage("defective-list needs --defect".into()))?;
    let raw = doc.lists_for("defective-list")?.to_vec();
    let beta = ctx.beta.unwrap_or_else(|| (graph.max_degree() as u64).max(1));
    let params = derive_parameters(
        ctx.mode,
        beta,
        u64::from(graph.m()),
        doc.colorspace,
        ctx.overrides.as_ref(),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let lists = ListAssignment::normalize(raw, params.l0 as usize, doc.colorspace, graph.n())
        .map_err(failure)?;
    let mut cache = P2Cache::new();
    let outcome =
        defective_list_color(graph, &lists, d, &params, &ctx.budget, &mut cache, ctx.accounting)
            .map_err(failure)?;
    let failures = check_coloring(graph, Some(&lists), &outcome.coloring, d, true);
    Ok(RunOutput {
        colors: outcome.coloring.colors().to_vec(),
        palette: None,
        trace: outcome.trace,
        params: Some(params),
        details: json!({
            "min_list_len": outcome.min_list_len,
            "degree_exact": outcome.degree_exact,
        }),
        failures,
    })
}

fn run_deg_plus_one(
    doc: &InstanceDoc,
    graph: &Graph,
    ctx: &RunCtx,
) -> Result<RunOutput, CliError> {
    let raw = doc.lists_for("deg-plus-one")?;
    let config = PipelineConfig {
        mode: ctx.mode,
        x_override: ctx.x_override,
        core: ctx.overrides,
        budget: ctx.budget,
        accounting: ctx.accounting,
    };
    let outcome =
        deg_plus_one_list_color(graph, raw, doc.colorspace, &config).map_err(failure)?;
    let mut failures = check_coloring(graph, None, &outcome.coloring, 0, true);
    for v in 0..graph.n() {
        if let Some(c) = outcome.coloring.get(v) {
            if !raw[v].contains(&c) {
                failures.push(format!("vertex {v} picked color {c}, which is not on its list"));
            }
        }
    }
    let details = serde_json::to_value(&outcome.report).map_err(failure)?;
    Ok(RunOutput {
        colors: outcome.coloring.colors().to_vec(),
        palette: None,
        trace: outcome.trace,
        params: None,
        details,
        failures,
    })
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let doc = InstanceDoc::load(&args.input)?;
    let graph = doc.graph()?;
    let overrides = collect_overrides(&args)?;
    let mode = Mode::from(args.mode);
    if mode == Mode::Paper && overrides.is_some() {
        return Err(CliError::Usage("core overrides only apply to --mode desk".into()));
    }
    let ctx = RunCtx {
        mode,
        overrides,
        budget: Budget::with_max_family(args.budget),
        accounting: AccountingMode::from(args.accounting),
        beta: args.beta,
        defect: args.defect,
        x_override: args.x_override,
    };
    let output = match args.protocol {
        Protocol::LinialReduce => run_linial_reduce(&doc, &graph, &ctx)?,
        Protocol::LinialLists => run_linial_lists(&doc, &graph, &ctx)?,
        Protocol::Defective => run_defective(&graph, &ctx)?,
        Protocol::DefectiveList => run_defective_list(&doc, &graph, &ctx)?,
        Protocol::DegPlusOne => run_deg_plus_one(&doc, &graph, &ctx)?,
    };
    write_run_outputs(&args, &doc, &graph, output)
}

fn write_run_outputs(
    args: &RunArgs,
    doc: &InstanceDoc,
    graph: &Graph,
    output: RunOutput,
) -> Result<(), CliError> {
    let verdict = if output.failures.is_empty() { "PASS" } else { "FAIL" };
    let max_bits: Vec<u64> =
        output.trace.rounds.iter().map(|r| r.max_bits_per_node).collect();

    ensure_out_dir(&args.out)?;
    write_json(
        &args.out.join("coloring.json"),
        &json!({
            "protocol": args.protocol.name(),
            "verdict": verdict,
            "palette": output.palette,
            "colors": output.colors,
        }),
    )?;
    write_json(&args.out.join("trace.json"), &output.trace)?;
    fs::write(&args.out.join("summary.csv"), output.trace.to_csv())
        .map_err(|e| CliError::Failure(format!("writing summary.csv: {e}")))?;
    write_json(
        &args.out.join("report.json"),
        &json!({
            "protocol": args.protocol.name(),
            "verdict": verdict,
            "rounds": output.trace.round_count(),
            "max_bits_per_round": max_bits,
            "palette": output.palette,
            "failures": output.failures,
            "config": {
                "mode": args.mode.name(),
                "accounting": args.accounting.name(),
                "budget": args.budget,
                "beta": args.beta,
                "defect": args.defect,
                "overrides": collect_overrides(args)?,
                "x_override": args.x_override,
            },
            "instance": {
                "n": doc.n,
                "m": doc.m,
                "colorspace": doc.colorspace,
                "directed": doc.directed,
                "edges": doc.edges.len(),
                "max_degree": graph.max_degree(),
                "max_out_degree": graph.max_out_degree(),
            },
            "params": output.params,
            "details": output.details,
        }),
    )?;

    println!("verdict: {verdict}");
    println!("rounds: {}", output.trace.round_count());
    println!(
        "max-bits-per-round: {}",
        max_bits.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    );
    if let Some(palette) = output.palette {
        println!("palette: {palette}");
    }
    if output.failures.is_empty() {
        Ok(())
    } else {
        for f in &output.failures {
            eprintln!("violation: {f}");
        }
        Err(CliError::Failure(format!("{} validation failure(s)", output.failures.len())))
    }
}

// ---------------------------------------------------------------------------
// verify-lemmas

fn cmd_verify_lemmas(args: LemmasArgs) -> Result<(), CliError> {
    if args.budget == 0 {
        return Err(CliError::Usage("--budget must be positive".into()));
    }
    let budget = Budget::with_max_family(args.budget);
    let mut suites = Vec::new();
    if matches!(args.scope, LemmaScope::All | LemmaScope::D1) {
        suites.push(lemmas::d1_suite(&budget)?);
    }
    if matches!(args.scope, LemmaScope::All | LemmaScope::L2Size) {
        suites.push(lemmas::l2_size_suite(&budget)?);
    }
    if matches!(args.scope, LemmaScope::All | LemmaScope::LdRatio) {
        suites.push(lemmas::ld_ratio_suite()?);
    }
    if matches!(args.scope, LemmaScope::All | LemmaScope::TauTau) {
        suites.push(lemmas::tau_tau_suite()?);
    }
    let pass = suites.iter().all(|s| s.pass);

    ensure_out_dir(&args.out)?;
    write_json(
        &args.out.join("lemmas.json"),
        &json!({
            "scope": args.scope.name(),
            "budget": args.budget,
            "pass": pass,
            "lemmas": suites,
        }),
    )?;

    for suite in &suites {
        println!(
            "[lemma] {}: {} ({} cases)",
            suite.name,
            if suite.pass { "PASS" } else { "FAIL" },
            suite.cases
        );
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure("lemma verification failed".into()))
    }
}

// ---------------------------------------------------------------------------
// gen

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let colorspace = args.colorspace.unwrap_or(4 * (args.max_degree as u64 + 1));
    if colorspace < args.max_degree as u64 + 1 {
        return Err(CliError::Usage(format!(
            "--colorspace {colorspace} cannot hold lists of size up to {}",
            args.max_degree + 1
        )));
    }
    let edges = gen::random_capped_edges(args.n, args.max_degree, args.seed);
    let (psi, m) = gen::psi_ids(args.n);
    let graph = Graph::from_edges(args.n, &edges, psi.clone(), m).map_err(failure)?;
    let lists = gen::deg_plus_one_lists(&graph, colorspace, args.seed.wrapping_add(1));
    let doc = InstanceDoc {
        n: args.n,
        m,
        colorspace,
        directed: false,
        edges,
        psi,
        lists: Some(lists),
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_out_dir(parent)?;
        }
    }
    write_json(&args.out, &doc)?;
    println!(
        "wrote {}: n={} edges={} max-degree={} colorspace={}",
        args.out.display(),
        doc.n,
        doc.edges.len(),
        doc.edges.iter().fold(vec![0usize; doc.n], |mut d, &(u, v)| {
            d[u] += 1;
            d[v] += 1;
            d
        })
        .into_iter()
        .max()
        .unwrap_or(0),
        colorspace
    );
    Ok(())
}
