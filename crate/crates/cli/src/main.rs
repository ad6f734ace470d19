//! `mram` — command-line front end for the MRAM workbench.
//!
//! Every subcommand is a thin wrapper over the library; no logic lives
//! only here. Exit codes: 0 on success, 1 on verdict disagreement or any
//! fault, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mram_core::asm;
use mram_core::bench::{
    fit_report, run_scaling, write_report, ScalingOptions, ScalingProblem, SidecarConfig,
};
use mram_core::ndtm::{oracle_accepts, validate_spec, Bounds, ConfigSetCodec, Machine, NdtmSpec};
use mram_core::problems::{cnf_to_ndtm, direct_sort_program, parse_dimacs, sat_oracle};
use mram_core::transpile::emit;
use mram_core::vm::{run, trace, Memory, RunLimits, DEFAULT_BIT_BUDGET, DEFAULT_FUEL};
use mram_core::word::Word;

#[derive(Parser)]
#[command(name = "mram", version, about = "MRAM machine-model workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an MRAM assembly program
    Run(RunArgs),
    /// Reprint a program in canonical form
    Fmt { file: PathBuf },
    /// Nondeterministic Turing machine tools
    #[command(subcommand)]
    Ndtm(NdtmCommand),
    /// CNF satisfiability front end
    #[command(subcommand)]
    Sat(SatCommand),
    /// Direct-address sorting programs
    #[command(subcommand)]
    Sort(SortCommand),
    /// Experiment runner
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Input items, comma separated; placed per the memory convention
    /// (cell 1 = count, cells 2.. = items)
    #[arg(long, value_delimiter = ',')]
    input: Vec<String>,
    /// Which cost column(s) to print
    #[arg(long, default_value = "both")]
    cost: CostChoice,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long, default_value_t = DEFAULT_BIT_BUDGET)]
    bit_budget: u64,
    /// Print one record per executed instruction
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CostChoice {
    Unit,
    Log,
    Both,
}

#[derive(Subcommand)]
enum NdtmCommand {
    /// Check a machine description
    Validate { spec: PathBuf },
    /// Brute-force breadth-first acceptance
    Oracle(NdtmRunArgs),
    /// Host-level configuration-set simulation
    Simulate(NdtmRunArgs),
    /// Compile to an MRAM program
    Compile(CompileArgs),
}

#[derive(Args)]
struct NdtmRunArgs {
    spec: PathBuf,
    #[arg(long, default_value = "")]
    input: String,
    #[arg(long)]
    space: u32,
    #[arg(long)]
    time: u32,
}

#[derive(Args)]
struct CompileArgs {
    spec: PathBuf,
    #[arg(long)]
    space: u32,
    #[arg(long)]
    time: u32,
    /// Output `.masm` path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Layout JSON path
    #[arg(long)]
    layout: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BIT_BUDGET)]
    bit_budget: u64,
}

#[derive(Subcommand)]
enum SatCommand {
    /// Exhaustive assignment search
    Oracle { file: PathBuf },
    /// Generate the guess-and-verify machine
    Compile {
        file: PathBuf,
        /// Machine JSON path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SortCommand {
    /// Emit a counting-sort program for n items with keys up to max-key
    Emit {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max_key: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Scaling run through oracle, simulation and transpiled program
    Scaling {
        #[arg(long, default_value = "sat")]
        problem: String,
        /// Sizes as `lo..hi` (inclusive) or a comma-separated list
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// CSV output path; a JSON sidecar goes next to it
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long, default_value_t = DEFAULT_BIT_BUDGET)]
        bit_budget: u64,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_program(path: &Path) -> Result<mram_core::isa::Program> {
    let text = read_to_string(path)?;
    asm::parse(&text).map_err(|diags| {
        let mut msg = format!("{} does not parse:", path.display());
        for d in diags {
            msg.push_str(&format!("\n  {d}"));
        }
        anyhow!(msg)
    })
}

fn load_machine(path: &Path) -> Result<Machine> {
    let text = read_to_string(path)?;
    let spec: NdtmSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    validate_spec(&spec).map_err(|defects| {
        let mut msg = format!("{} is not a valid machine:", path.display());
        for d in defects {
            msg.push_str(&format!("\n  {d}"));
        }
        anyhow!(msg)
    })
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let program = load_program(&args.file)?;
    let items: Vec<Word> = args
        .input
        .iter()
        .map(|s| Word::from_str(s).map_err(|e| anyhow!("bad input item `{s}`: {e}")))
        .collect::<Result<_>>()?;
    let image = Memory::input_image(&items);
    let limits = RunLimits {
        fuel: args.fuel,
        bit_budget: Some(args.bit_budget),
    };

    if args.trace {
        let result = trace(&program, image, limits);
        for r in &result.records {
            let addrs = r
                .addresses
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let written = r
                .written_bits
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into());
            println!(
                "{:>6}  {:<5} addrs=[{}] written_bits={}",
                r.pc,
                r.opcode.to_string(),
                addrs,
                written
            );
        }
        let (state, report) = result.outcome?;
        print_run_result(&state, &report, args.cost);
    } else {
        let (state, report) = run(&program, image, limits)?;
        print_run_result(&state, &report, args.cost);
    }
    Ok(())
}

fn print_run_result(
    state: &mram_core::vm::MachineState,
    report: &mram_core::vm::CostReport,
    cost: CostChoice,
) {
    println!("output (cell 0): {}", state.memory.get(&Word::from(0u64)));
    println!("executed: {}", report.executed);
    if matches!(cost, CostChoice::Unit | CostChoice::Both) {
        println!("unit_cost: {}", report.unit_cost);
    }
    if matches!(cost, CostChoice::Log | CostChoice::Both) {
        println!("log_cost: {}", report.log_cost);
    }
    println!(
        "max_cell_bits: {}  cells_touched: {}",
        report.max_cell_bits, report.cells_touched
    );
}

fn cmd_fmt(file: &Path) -> Result<()> {
    let program = load_program(file)?;
    let text = asm::print(&program).map_err(|defects| {
        anyhow!(
            "program is invalid: {}",
            defects
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        )
    })?;
    print!("{text}");
    Ok(())
}

fn cmd_ndtm(command: &NdtmCommand) -> Result<()> {
    match command {
        NdtmCommand::Validate { spec } => {
            load_machine(spec)?;
            println!("ok");
            Ok(())
        }
        NdtmCommand::Oracle(args) => {
            let machine = load_machine(&args.spec)?;
            let input = machine.parse_input(&args.input)?;
            let bounds = Bounds {
                space: args.space,
                time: args.time,
            };
            let out = oracle_accepts(&machine, &input, bounds)?;
            println!("{}", if out.accepted { "accepted" } else { "rejected" });
            println!("explored: {}", out.explored);
            if let Some(witness) = out.witness {
                println!("witness ({} configurations):", witness.len());
                for c in witness {
                    println!("  {c}");
                }
            }
            Ok(())
        }
        NdtmCommand::Simulate(args) => {
            let machine = load_machine(&args.spec)?;
            let input = machine.parse_input(&args.input)?;
            let bounds = Bounds {
                space: args.space,
                time: args.time,
            };
            let codec = ConfigSetCodec::new(&machine, bounds.space)?;
            let out = mram_core::confset::reachable_accepts(&codec, &machine, &input, bounds)?;
            println!("{}", if out.accepted { "accepted" } else { "rejected" });
            println!("iterations: {}", out.iterations);
            println!("universe_bits: {}", codec.universe_bits());
            Ok(())
        }
        NdtmCommand::Compile(args) => {
            let machine = load_machine(&args.spec)?;
            let bounds = Bounds {
                space: args.space,
                time: args.time,
            };
            let codec = ConfigSetCodec::new(&machine, bounds.space)?;
            let artifact = emit(&codec, &machine, &bounds, args.bit_budget)?;
            let text = asm::print(&artifact.program).expect("emitted programs are valid");
            write_or_print(&args.output, &text)?;
            if let Some(layout_path) = &args.layout {
                let json = serde_json::to_string_pretty(&artifact.layout)?;
                std::fs::write(layout_path, json + "\n")
                    .with_context(|| format!("writing {}", layout_path.display()))?;
            }
            eprintln!(
                "rules: {}  instructions: {}  universe_bits: {}",
                artifact.stats.rules,
                artifact.stats.emitted_instructions,
                codec.universe_bits()
            );
            eprintln!(
                "seed cell {} with the initial configuration index before running",
                artifact.layout.input_index
            );
            Ok(())
        }
    }
}

fn cmd_sat(command: &SatCommand) -> Result<()> {
    match command {
        SatCommand::Oracle { file } => {
            let text = read_to_string(file)?;
            let formula = parse_dimacs(&text).map_err(|diags| {
                let mut msg = format!("{} does not parse:", file.display());
                for d in diags {
                    msg.push_str(&format!("\n  {d}"));
                }
                anyhow!(msg)
            })?;
            let out = sat_oracle(&formula)?;
            match out.assignment {
                Some(assignment) => {
                    let rendered: Vec<String> = assignment
                        .iter()
                        .enumerate()
                        .map(|(i, v)| format!("x{}={}", i + 1, if *v { 1 } else { 0 }))
                        .collect();
                    println!("SAT {}", rendered.join(" "));
                }
                None => println!("UNSAT"),
            }
            println!("tested: {}", out.tested);
            Ok(())
        }
        SatCommand::Compile { file, output } => {
            let text = read_to_string(file)?;
            let formula = parse_dimacs(&text).map_err(|diags| {
                let mut msg = format!("{} does not parse:", file.display());
                for d in diags {
                    msg.push_str(&format!("\n  {d}"));
                }
                anyhow!(msg)
            })?;
            let (spec, bounds) = cnf_to_ndtm(&formula)?;
            let json = serde_json::to_string_pretty(&spec)? + "\n";
            write_or_print(output, &json)?;
            eprintln!(
                "states: {}  transitions: {}  bounds: S={} T={}",
                spec.states.len(),
                spec.transitions.len(),
                bounds.space,
                bounds.time
            );
            Ok(())
        }
    }
}

fn cmd_sort(command: &SortCommand) -> Result<()> {
    match command {
        SortCommand::Emit { n, max_key, output } => {
            let program = direct_sort_program(*n, *max_key);
            let layout = mram_core::problems::sort_layout(*n, *max_key);
            let text = asm::print(&program).expect("sort programs are valid");
            write_or_print(output, &text)?;
            eprintln!(
                "table_base: {}  out_base: {}  instructions: {}",
                layout.table_base,
                layout.out_base,
                program.len()
            );
            Ok(())
        }
    }
}

fn parse_sizes(text: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().context("bad size range")?;
        let hi: u32 = hi.trim().parse().context("bad size range")?;
        if lo > hi {
            bail!("empty size range `{text}`");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u32>().context("bad size list"))
        .collect()
}

fn cmd_bench(command: &BenchCommand) -> Result<()> {
    match command {
        BenchCommand::Scaling {
            problem,
            sizes,
            seed,
            report,
            fuel,
            bit_budget,
        } => {
            let problem = ScalingProblem::parse(problem)
                .ok_or_else(|| anyhow!("unknown problem `{problem}` (try `sat`, `guess-bit`, `always-reject`, `parity`)"))?;
            let sizes = parse_sizes(sizes)?;
            let options = ScalingOptions {
                seed: *seed,
                limits: RunLimits {
                    fuel: *fuel,
                    bit_budget: Some(*bit_budget),
                },
            };
            let outcome = run_scaling(&problem, &sizes, &options)?;
            let fit = fit_report(&outcome.rows);
            match &fit {
                Ok(fit) => {
                    for metric in &fit.metrics {
                        println!(
                            "{}: {:?} slopes={:?} values={:?}",
                            metric.name, metric.classification, metric.slopes, metric.values
                        );
                    }
                }
                Err(e) => println!("no fit: {e}"),
            }
            for (row, audit) in outcome.rows.iter().zip(&outcome.audits) {
                println!(
                    "n={} S={} T={} N_bits={} rules={} executed={} bound={:.0} oracle_nodes={} log_cost={}",
                    row.n,
                    row.s,
                    row.t,
                    row.n_bits,
                    audit.stats.rules,
                    row.executed,
                    audit.executed_bound,
                    row.oracle_nodes,
                    row.log_cost
                );
            }
            if let Ok(fit) = &fit {
                let config = SidecarConfig {
                    problem: problem.name().to_string(),
                    seed: *seed,
                    sizes: sizes.clone(),
                    fuel: *fuel,
                    bit_budget: Some(*bit_budget),
                    bound_c: mram_core::transpile::BOUND_C,
                    bound_k_per_rule: mram_core::transpile::BOUND_K_PER_RULE,
                    bounds: outcome.audits.iter().map(|a| a.bounds).collect(),
                };
                write_report(&outcome.rows, fit, &config, report)?;
                println!("report: {}", report.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Fmt { file } => cmd_fmt(file),
        Command::Ndtm(c) => cmd_ndtm(c),
        Command::Sat(c) => cmd_sat(c),
        Command::Sort(c) => cmd_sort(c),
        Command::Bench(c) => cmd_bench(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
