//! Command-line front end: box diagnostics, random-access-code runs, Bell
//! functional values and monogamy sweeps, channel lemma probes, and the
//! tree Ising scans.
//!
//! Exit codes: 0 on success, 1 when a checked bound or invariant is found
//! violated, 2 on invalid input.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;

use ic_lab::bell::{
    self, functional, ic_bounds, local_max, monogamy_sweep, relation, tradeoff_ic, RelationId,
    SweepSource,
};
use ic_lab::infotheory::{bb84_split, es_ratio_probe};
use ic_lab::ising::{build_tree, temperature_scan, xi_report, ReferenceConfig};
use ic_lab::manifest::RunManifest;
use ic_lab::nsbox::{
    bias_xi, broadcast_pr_box, isotropic_box, no_signaling_check, perfect_sb_box, pr_box,
    quantum_box, shared_coin_box, BoxTable, PartySettings,
};
use ic_lab::quantum::{bloch_observable, named_state, NamedState, Observable};
use ic_lab::rac::{run_additive, run_nested, run_sb_variant, classical_strategy_search, RacConfig, RacVariant};
use ic_lab::{IcError, Result};

#[derive(Parser)]
#[command(name = "ic-lab", version, about = "Information-causality laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random-access-code protocols.
    Rac {
        #[command(subcommand)]
        command: RacCommand,
    },
    /// Bell functionals and monogamy relations.
    Bell {
        #[command(subcommand)]
        command: BellCommand,
    },
    /// Channel-reduction ratio probe.
    Es {
        #[command(subcommand)]
        command: EsCommand,
    },
    /// Key-rate split of a qubit channel at a given error rate.
    Bb84(Bb84Args),
    /// Tree Ising model scans.
    Ising {
        #[command(subcommand)]
        command: IsingCommand,
    },
    /// Box table diagnostics.
    Box {
        #[command(subcommand)]
        command: BoxCommand,
    },
}

#[derive(Subcommand)]
enum RacCommand {
    /// Evaluate the information quantity of a protocol over a box.
    Run(RacRunArgs),
    /// Concatenated protocol on a binary tree of bipartite boxes.
    Nested(RacNestedArgs),
    /// Exhaustive search over deterministic classical strategies.
    ClassicalSearch(ClassicalSearchArgs),
}

#[derive(Args)]
struct RacRunArgs {
    /// Box spec: pr | iso:E | coin:N | bpr:N | sb:N | quantum:FILE | table:FILE.
    #[arg(long = "box")]
    box_spec: String,
    /// Use the parity-offset decoding variant (requires a 3-party box).
    #[arg(long)]
    sb_variant: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RacNestedArgs {
    /// Bipartite edge box spec.
    #[arg(long = "box")]
    box_spec: String,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassicalSearchArgs {
    /// Number of receivers.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Shared random bits available to all parties.
    #[arg(long, default_value_t = 0)]
    shared_bits: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BellCommand {
    /// Evaluate a functional on a box.
    Value(BellValueArgs),
    /// Algebraic, quantum, and enumerated local bounds of a functional.
    Bounds(BellBoundsArgs),
    /// Quadratic monogamy sweep over states or a box.
    Monogamy(MonogamyArgs),
    /// Quadratic trade-off for a list of bipartite boxes.
    Tradeoff(TradeoffArgs),
}

#[derive(Args)]
struct BellValueArgs {
    /// chsh | sb | mermin | ic.
    #[arg(long)]
    functional: String,
    /// Receiver count for the ic family.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "box")]
    box_spec: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BellBoundsArgs {
    #[arg(long)]
    functional: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MonogamyArgs {
    /// chsh8 | sb32 | sb64 | mermin16 | ick.
    #[arg(long)]
    relation: String,
    #[arg(long)]
    receivers: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// state:NAME | random:TRIALS | box:SPEC.
    #[arg(long)]
    source: String,
    /// Optimize measurement settings (quantum sources).
    #[arg(long)]
    optimize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 40)]
    iterations: usize,
    /// Per-sample CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long)]
    k: usize,
    /// One or more box specs.
    #[arg(long = "box", required = true)]
    box_specs: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EsCommand {
    /// Randomized check of the channel-reduction ratio bound.
    Verify(EsArgs),
}

#[derive(Args)]
struct EsArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    q_size: usize,
    #[arg(long, default_value_t = 2)]
    x_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Bb84Args {
    /// Channel error rate in [0, 1/2].
    #[arg(long)]
    qber: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IsingCommand {
    /// Magnetization and energy across a temperature grid.
    Scan(IsingScanArgs),
    /// Root-to-leaf correlation versus the cascaded single-link law.
    Xi(IsingScanArgs),
}

#[derive(Args)]
struct IsingScanArgs {
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 0.5)]
    t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// all-plus | random.
    #[arg(long, default_value = "all-plus")]
    reference: String,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 10_000)]
    measure: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BoxCommand {
    /// Validate normalization and the no-signaling marginals.
    Check(BoxCheckArgs),
    /// Print biases for each receiver and data bit.
    Bias(BoxCheckArgs),
}

#[derive(Args)]
struct BoxCheckArgs {
    #[arg(long = "box")]
    box_spec: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Quantum box description loaded from `quantum:FILE`.
#[derive(Deserialize)]
struct QuantumBoxSpec {
    state: String,
    /// Per party: measurement angles (theta, phi) per input.
    settings: Vec<Vec<(f64, f64)>>,
}

fn load_box(spec: &str) -> Result<BoxTable> {
    let (head, rest) = spec.split_once(':').map_or((spec, None), |(h, r)| (h, Some(r)));
    let parse_n = |r: Option<&str>| -> Result<usize> {
        r.ok_or_else(|| IcError::InvalidArgument(format!("{head} needs an argument")))?
            .parse()
            .map_err(|e| IcError::Parse(format!("{e}")))
    };
    match head {
        "pr" => Ok(pr_box()),
        "iso" => {
            let e: f64 = rest
                .ok_or_else(|| IcError::InvalidArgument("iso needs a correlation".into()))?
                .parse()
                .map_err(|e| IcError::Parse(format!("{e}")))?;
            isotropic_box(e)
        }
        "coin" => shared_coin_box(parse_n(rest)?),
        "bpr" => broadcast_pr_box(parse_n(rest)?),
        "sb" => perfect_sb_box(parse_n(rest)?),
        "quantum" => {
            let path = rest
                .ok_or_else(|| IcError::InvalidArgument("quantum needs a file".into()))?;
            let text = std::fs::read_to_string(path)?;
            let spec: QuantumBoxSpec = serde_json::from_str(&text)?;
            let rho = named_state(&NamedState::parse(&spec.state)?)?;
            let settings: Vec<PartySettings> = spec
                .settings
                .iter()
                .map(|angles| PartySettings {
                    qubits: 1,
                    observables: angles
                        .iter()
                        .map(|&(t, p)| bloch_observable(t, p))
                        .collect::<Vec<Observable>>(),
                })
                .collect();
            quantum_box(&rho, &settings)
        }
        "table" => {
            let path = rest
                .ok_or_else(|| IcError::InvalidArgument("table needs a file".into()))?;
            BoxTable::from_json(&std::fs::read_to_string(path)?)
        }
        other => Err(IcError::UnknownName(format!("box spec {other}"))),
    }
}

/// Infer the protocol shape from a box signature: Alice holds 2^(k-1)
/// inputs, each receiver holds k.
fn infer_rac_config(table: &BoxTable, variant: RacVariant) -> Result<RacConfig> {
    let parties = table.parties();
    if parties.len() < 2 {
        return Err(IcError::InvalidArgument("need at least 2 parties".into()));
    }
    let n = parties.len() - 1;
    let k = parties[1].0;
    for &(i, o) in &parties[1..] {
        if i != k || o != 2 {
            return Err(IcError::DimensionMismatch("receiver signature".into()));
        }
    }
    if parties[0].0 != 1usize << (k - 1) || parties[0].1 != 2 {
        return Err(IcError::DimensionMismatch(format!(
            "sender needs {} inputs for k = {k}",
            1usize << (k - 1)
        )));
    }
    RacConfig::new(n, k, variant)
}

fn fmt12(v: f64) -> String {
    // 12 significant digits.
    format!("{v:.11e}")
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    manifest: RunManifest,
    report: T,
}

fn emit<T: Serialize>(out: Option<&PathBuf>, manifest: RunManifest, report: &T) -> Result<()> {
    if let Some(path) = out {
        let manifest = manifest.output(path.display());
        let env = Envelope { manifest, report };
        std::fs::write(path, serde_json::to_string_pretty(&env)?)?;
    }
    Ok(())
}

fn manifest_from_argv() -> RunManifest {
    RunManifest::new(std::env::args().collect())
}

/// Whether a checked bound was found violated (exit code 1).
type Violation = bool;

fn main() -> ExitCode {
    // IC_LAB_THREADS caps parallelism; execution is currently
    // single-threaded, so any cap other than 1 is simply noted.
    if let Ok(v) = std::env::var("IC_LAB_THREADS") {
        if v.trim() != "1" {
            eprintln!("note: IC_LAB_THREADS={v} requested; running single-threaded");
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<Violation> {
    match cli.command {
        Command::Rac { command } => match command {
            RacCommand::Run(args) => rac_run(args),
            RacCommand::Nested(args) => rac_nested(args),
            RacCommand::ClassicalSearch(args) => rac_classical(args),
        },
        Command::Bell { command } => match command {
            BellCommand::Value(args) => bell_value(args),
            BellCommand::Bounds(args) => bell_bounds(args),
            BellCommand::Monogamy(args) => bell_monogamy(args),
            BellCommand::Tradeoff(args) => bell_tradeoff(args),
        },
        Command::Es { command } => match command {
            EsCommand::Verify(args) => es_verify(args),
        },
        Command::Bb84(args) => bb84(args),
        Command::Ising { command } => match command {
            IsingCommand::Scan(args) => ising_scan(args, false),
            IsingCommand::Xi(args) => ising_scan(args, true),
        },
        Command::Box { command } => match command {
            BoxCommand::Check(args) => box_check(args),
            BoxCommand::Bias(args) => box_bias(args),
        },
    }
}

fn rac_run(args: RacRunArgs) -> Result<Violation> {
    let table = load_box(&args.box_spec)?;
    let report = if args.sb_variant {
        let receivers = table
            .num_parties()
            .checked_sub(2)
            .filter(|&n| n >= 1)
            .ok_or_else(|| IcError::InvalidArgument("variant needs 2 senders".into()))?;
        run_sb_variant(&table, receivers)?
    } else {
        let config = infer_rac_config(&table, RacVariant::Additive)?;
        run_additive(&table, &config)?
    };
    println!(
        "I = {}  (bound 1: {})",
        fmt12(report.i_total),
        if report.flags.ic_satisfied { "satisfied" } else { "EXCEEDED" }
    );
    for (j, i_j) in report.i_j.iter().enumerate() {
        println!("  receiver {}: I_{} = {}", j + 1, j + 1, fmt12(*i_j));
    }
    let worst_leak = report.leakage.iter().cloned().fold(0.0, f64::max);
    println!("leakage = {}", fmt12(worst_leak));
    let manifest = manifest_from_argv()
        .param("box", &args.box_spec)
        .param("variant", if args.sb_variant { "sb" } else { "additive" });
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(!report.flags.leak_free)
}

fn rac_nested(args: RacNestedArgs) -> Result<Violation> {
    let table = load_box(&args.box_spec)?;
    let report = run_nested(&table, args.depth)?;
    println!(
        "I = {}  (bound 1: {})",
        fmt12(report.i_total),
        if report.flags.ic_satisfied { "satisfied" } else { "EXCEEDED" }
    );
    for (key, xi) in &report.xi {
        println!("  xi[{key}] = {}", fmt12(*xi));
    }
    let manifest = manifest_from_argv()
        .param("box", &args.box_spec)
        .param("depth", args.depth);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(!report.flags.leak_free)
}

fn rac_classical(args: ClassicalSearchArgs) -> Result<Violation> {
    let result = classical_strategy_search(args.n, 2, args.shared_bits)?;
    println!(
        "best I = {} over {} strategies ({} receivers, {} shared bits)",
        fmt12(result.best_i),
        result.strategies_scanned,
        result.receivers,
        result.shared_randomness_bits
    );
    let manifest = manifest_from_argv()
        .param("n", args.n)
        .param("shared_bits", args.shared_bits);
    emit(args.out.as_ref(), manifest, &result)?;
    Ok(false)
}

fn bell_value(args: BellValueArgs) -> Result<Violation> {
    let f = functional(&args.functional, args.k)?;
    let table = load_box(&args.box_spec)?;
    let value = bell::evaluate(&f, &table)?;
    println!("{} = {}", f.name, fmt12(value));
    #[derive(Serialize)]
    struct ValueReport {
        functional: String,
        value: f64,
        algebraic_max: f64,
    }
    let report = ValueReport {
        functional: f.name.clone(),
        value,
        algebraic_max: f.algebraic_max,
    };
    let manifest = manifest_from_argv()
        .param("functional", &args.functional)
        .param("box", &args.box_spec);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(false)
}

fn bell_bounds(args: BellBoundsArgs) -> Result<Violation> {
    let f = functional(&args.functional, args.k)?;
    let witness = local_max(&f)?;
    #[derive(Serialize)]
    struct BoundsReport {
        functional: String,
        local_max: f64,
        algebraic_max: f64,
        quantum_max: Option<f64>,
        window: Option<(f64, f64)>,
        witness: bell::LocalWitness,
    }
    let window = if args.functional == "ic" {
        Some(ic_bounds(args.k.unwrap_or(2))?)
    } else {
        None
    };
    println!(
        "{}: local {} algebraic {} quantum {}",
        f.name,
        fmt12(witness.value),
        fmt12(f.algebraic_max),
        f.quantum_max.map_or("n/a".into(), fmt12)
    );
    let report = BoundsReport {
        functional: f.name.clone(),
        local_max: witness.value,
        algebraic_max: f.algebraic_max,
        quantum_max: f.quantum_max,
        window,
        witness,
    };
    let manifest = manifest_from_argv().param("functional", &args.functional);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(false)
}

fn parse_relation(name: &str) -> Result<RelationId> {
    match name {
        "chsh8" => Ok(RelationId::Chsh8),
        "sb32" => Ok(RelationId::Sb32),
        "sb64" => Ok(RelationId::Sb64),
        "mermin16" => Ok(RelationId::Mermin16),
        "ick" => Ok(RelationId::IcK),
        other => Err(IcError::UnknownName(format!("relation {other}"))),
    }
}

fn bell_monogamy(args: MonogamyArgs) -> Result<Violation> {
    let rel = relation(parse_relation(&args.relation)?, args.receivers, args.k)?;
    let (head, rest) = args
        .source
        .split_once(':')
        .map_or((args.source.as_str(), ""), |(h, r)| (h, r));
    let source = match head {
        "state" => SweepSource::State(named_state(&NamedState::parse(rest)?)?),
        "random" => SweepSource::Random {
            trials: rest
                .parse()
                .map_err(|e| IcError::Parse(format!("trials: {e}")))?,
            seed: args.seed,
        },
        "box" => SweepSource::Boxes(load_box(rest)?),
        other => return Err(IcError::UnknownName(format!("source {other}"))),
    };
    let report = monogamy_sweep(
        &rel,
        &source,
        args.optimize,
        args.seed,
        args.restarts,
        args.iterations,
    )?;
    println!(
        "{}: max LHS {} bound {} violations {}",
        args.relation,
        fmt12(report.max_lhs),
        fmt12(report.bound),
        report.violations
    );
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["sample_id", "seed", "lhs", "bound", "violated"])?;
        for s in &report.samples {
            w.write_record([
                s.sample_id.to_string(),
                s.seed.to_string(),
                format!("{:.17e}", s.lhs),
                format!("{:.17e}", s.bound),
                s.violated.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let mut manifest = manifest_from_argv()
        .param("relation", &args.relation)
        .param("source", &args.source)
        .param("optimize", args.optimize)
        .param("restarts", args.restarts)
        .param("iterations", args.iterations)
        .seed(args.seed);
    if let Some(path) = &args.csv {
        manifest = manifest.output(path.display());
    }
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(report.violations > 0)
}

fn bell_tradeoff(args: TradeoffArgs) -> Result<Violation> {
    let boxes: Vec<BoxTable> = args
        .box_specs
        .iter()
        .map(|s| load_box(s))
        .collect::<Result<_>>()?;
    let report = tradeoff_ic(&boxes, args.k)?;
    println!(
        "sum of squares {} bound {} ({})",
        fmt12(report.sum_sq),
        fmt12(report.bound),
        if report.respected { "respected" } else { "EXCEEDED" }
    );
    let manifest = manifest_from_argv().param("k", args.k);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(!report.respected)
}

fn es_verify(args: EsArgs) -> Result<Violation> {
    let xi_grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let report = es_ratio_probe(args.trials, args.seed, args.q_size, args.x_size, &xi_grid)?;
    println!(
        "max ratio / xi^2 = {} over {} trials ({} vacuous)",
        fmt12(report.max_ratio_over_xi2),
        report.trials,
        report.skipped_vacuous
    );
    let manifest = manifest_from_argv()
        .param("trials", args.trials)
        .seed(args.seed);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(report.max_ratio_over_xi2 > 1.0 + 1e-9)
}

fn bb84(args: Bb84Args) -> Result<Violation> {
    let (i1, i2) = bb84_split(args.qber)?;
    println!("I1 = {}  I2 = {}", fmt12(i1), fmt12(i2));
    #[derive(Serialize)]
    struct Bb84Report {
        qber: f64,
        i1: f64,
        i2: f64,
    }
    let report = Bb84Report { qber: args.qber, i1, i2 };
    let manifest = manifest_from_argv().param("qber", args.qber);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(false)
}

fn parse_reference(name: &str, seed: u64) -> Result<ReferenceConfig> {
    match name {
        "all-plus" => Ok(ReferenceConfig::AllPlus),
        "random" => Ok(ReferenceConfig::Random { seed }),
        other => Err(IcError::UnknownName(format!("reference {other}"))),
    }
}

fn ising_scan(args: IsingScanArgs, xi_mode: bool) -> Result<Violation> {
    if args.steps < 1 || !(args.t_max >= args.t_min) {
        return Err(IcError::InvalidArgument("bad temperature grid".into()));
    }
    let tree = build_tree(args.depth, parse_reference(&args.reference, args.seed)?, args.coupling)?;
    let temps: Vec<f64> = (0..args.steps)
        .map(|i| {
            if args.steps == 1 {
                args.t_min
            } else {
                args.t_min + (args.t_max - args.t_min) * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect();
    let manifest = manifest_from_argv()
        .param("depth", args.depth)
        .param("reference", &args.reference)
        .param("coupling", args.coupling)
        .param("burn_in", args.burn_in)
        .param("measure", args.measure)
        .seed(args.seed);
    if xi_mode {
        let rows = xi_report(&tree, &temps, args.burn_in, args.measure, args.seed)?;
        for r in &rows {
            println!(
                "T = {}  xi_mc = {}  cascade = {}",
                fmt12(r.temperature),
                fmt12(r.xi_mc),
                fmt12(r.cascade_prediction)
            );
        }
        write_csv(
            args.csv.as_ref(),
            &["temperature", "xi_mc", "edge_correlation", "cascade_prediction"],
            rows.iter().map(|r| {
                vec![
                    format!("{:.17e}", r.temperature),
                    format!("{:.17e}", r.xi_mc),
                    format!("{:.17e}", r.edge_correlation),
                    format!("{:.17e}", r.cascade_prediction),
                ]
            }),
        )?;
        emit(args.out.as_ref(), manifest, &rows)?;
    } else {
        let rows = temperature_scan(&tree, &temps, args.burn_in, args.measure, args.seed)?;
        for r in &rows {
            println!(
                "T = {}  |m| = {}  gauge m = {}  E = {}",
                fmt12(r.temperature),
                fmt12(r.mean_abs_mag),
                fmt12(r.gauge_mag),
                fmt12(r.energy_mean)
            );
        }
        write_csv(
            args.csv.as_ref(),
            &["temperature", "mean_abs_mag", "gauge_mag", "mag_stderr", "energy_mean"],
            rows.iter().map(|r| {
                vec![
                    format!("{:.17e}", r.temperature),
                    format!("{:.17e}", r.mean_abs_mag),
                    format!("{:.17e}", r.gauge_mag),
                    format!("{:.17e}", r.mag_stderr),
                    format!("{:.17e}", r.energy_mean),
                ]
            }),
        )?;
        emit(args.out.as_ref(), manifest, &rows)?;
    }
    Ok(false)
}

fn write_csv(
    path: Option<&PathBuf>,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    if let Some(path) = path {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn box_check(args: BoxCheckArgs) -> Result<Violation> {
    let table = load_box(&args.box_spec)?;
    let report = no_signaling_check(&table, args.tol);
    println!(
        "no-signaling: {} (worst marginal spread {})",
        if report.passed { "pass" } else { "FAIL" },
        fmt12(report.worst_violation)
    );
    let manifest = manifest_from_argv()
        .param("box", &args.box_spec)
        .param("tol", args.tol);
    emit(args.out.as_ref(), manifest, &report)?;
    Ok(!report.passed)
}

fn box_bias(args: BoxCheckArgs) -> Result<Violation> {
    let table = load_box(&args.box_spec)?;
    let parties = table.parties();
    let n = parties.len() - 1;
    let k = parties[1].0;
    #[derive(Serialize)]
    struct BiasRow {
        receiver: usize,
        bit: usize,
        xi: f64,
    }
    let mut rows = Vec::new();
    for j in 1..=n {
        for l in 0..k {
            let b = ic_lab::nsbox::one_hot(k, l);
            let xi = bias_xi(&table, j, &b)?;
            println!("xi[{j},{l}] = {}", fmt12(xi));
            rows.push(BiasRow { receiver: j, bit: l, xi });
        }
    }
    let manifest = manifest_from_argv().param("box", &args.box_spec);
    emit(args.out.as_ref(), manifest, &rows)?;
    Ok(false)
}
