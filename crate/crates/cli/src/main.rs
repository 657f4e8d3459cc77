//! `cimsim`: compile automata into processor images, run input streams with
//! cost accounting, and print model benches.
//!
//! Reports are CSV on stdout (or `--output`); human-readable notes go to
//! stderr. `run` exits 0 on accept, 1 on reject and 2 on any error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cimsim::automata::{
    homogenize, merge_equivalent_states, parse_regex_with, AutomatonFile, AutomatonSource, StartMode,
    Symbol, SymbolEncoding,
};
use cimsim::config::Profile;
use cimsim::crossbar::Backend;
use cimsim::engine::{compile_with, run, ApProgram, CompileOptions};
use cimsim::perfmodel::{ap_run_cost, sweep, sweep_csv, RunStats};
use cimsim::scouting::gate_truth_tables;

mod format;

use format::{bit_string, eng};

#[derive(Parser)]
#[command(name = "cimsim", version, about = "Memristive computation-in-memory simulation suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a regex or automaton file into a program image.
    Compile(CompileArgs),
    /// Print a program image as a homogeneous automaton file.
    Dump(DumpArgs),
    /// Run an input stream through a program image.
    Run(RunArgs),
    /// Print gate truth tables, cost constants, efficiency sweeps or the
    /// fitted profile.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Pattern to compile.
    #[arg(long, conflicts_with = "automaton", required_unless_present = "automaton")]
    regex: Option<String>,
    /// `nfa` or `hom` automaton file.
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Symbol width W; defaults to 8 for regexes, taken from the header for
    /// automaton files.
    #[arg(long)]
    symbol_bits: Option<u32>,
    /// Map regex letters a..z to symbols 0..25 instead of their code points.
    #[arg(long)]
    letters: bool,
    /// Keep start states active on every symbol (unanchored search).
    #[arg(long)]
    all_input: bool,
    /// Skip merging of equivalent states.
    #[arg(long)]
    no_merge: bool,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct DumpArgs {
    image: PathBuf,
    /// Also print the V, R, c and initial matrices.
    #[arg(long)]
    matrices: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Functional,
    Rram,
    Sram,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// Bytes for W <= 8, symbol list otherwise.
    Auto,
    Bytes,
    /// Whitespace-separated decimal symbols.
    Symbols,
}

#[derive(Args)]
struct RunArgs {
    image: PathBuf,
    input: PathBuf,
    #[arg(long, value_enum, default_value = "functional")]
    backend: BackendArg,
    /// Append one CSV row per step with the active vector.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "auto")]
    input_format: InputFormat,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchMode {
    Gates,
    Costs,
    Sweep,
    Calibrate,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    mode: BenchMode,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(args) => cmd_compile(&args).map(|_| ExitCode::SUCCESS),
        Command::Dump(args) => cmd_dump(&args).map(|_| ExitCode::SUCCESS),
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_profile(path: Option<&Path>) -> Result<Profile> {
    match path {
        Some(path) => Profile::parse(&read_text(path)?).with_context(|| format!("in {}", path.display())),
        None => Ok(Profile::default()),
    }
}

fn load_image(path: &Path) -> Result<ApProgram> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    ApProgram::from_image(&bytes).with_context(|| format!("loading image {}", path.display()))
}

fn cmd_compile(args: &CompileArgs) -> Result<()> {
    let merge = |h| if args.no_merge { h } else { merge_equivalent_states(&h) };
    let (automaton, bits, file_mode) = if let Some(pattern) = &args.regex {
        let bits = args.symbol_bits.unwrap_or(8);
        let encoding = if args.letters {
            SymbolEncoding::Letters
        } else {
            SymbolEncoding::Code
        };
        let nfa = parse_regex_with(pattern, bits, encoding).context("invalid regex")?;
        (merge(homogenize(&nfa)), bits, StartMode::StartOfData)
    } else {
        let path = args.automaton.as_ref().expect("clap enforces one source");
        if args.letters {
            bail!("--letters only applies to --regex");
        }
        let file = AutomatonFile::parse(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
        let (h, bits) = match file.source {
            AutomatonSource::Nfa(nfa) => (merge(homogenize(&nfa)), nfa.alphabet_bits()),
            // already homogeneous; compiled as written so dumps round-trip
            AutomatonSource::Homogeneous {
                automaton,
                symbol_bits,
            } => (automaton, symbol_bits),
        };
        if let Some(w) = args.symbol_bits {
            if w != bits {
                bail!("--symbol-bits {w} conflicts with W={bits} in {}", path.display());
            }
        }
        (h, bits, file.start_mode)
    };
    let start_mode = if args.all_input {
        StartMode::AllInput
    } else {
        file_mode
    };
    let options = CompileOptions {
        start_mode,
        ..CompileOptions::default()
    };
    let program = compile_with(&automaton, bits, &options)?;
    let image = program.to_image();
    fs::write(&args.output, &image).with_context(|| format!("writing {}", args.output.display()))?;
    println!("states,symbol_bits,routing_density,image_bytes");
    println!(
        "{},{},{:.6},{}",
        program.num_states(),
        program.symbol_bits(),
        program.routing_density(),
        image.len()
    );
    eprintln!("wrote {}", args.output.display());
    Ok(())
}

fn cmd_dump(args: &DumpArgs) -> Result<()> {
    let program = load_image(&args.image)?;
    let file = AutomatonFile {
        source: AutomatonSource::Homogeneous {
            automaton: program.decompile(),
            symbol_bits: program.symbol_bits(),
        },
        start_mode: program.start_mode(),
    };
    let mut text = file.to_text();
    if args.matrices {
        // comment lines keep the dump loadable as an automaton file
        for sym in 0..program.num_symbols() {
            text.push_str(&format!("# V[{sym}] {}\n", bit_string(&program.ste_row(sym))));
        }
        for src in 0..program.num_states() {
            text.push_str(&format!("# R[{src}] {}\n", bit_string(&program.routing_row(src))));
        }
        text.push_str(&format!("# c {}\n", bit_string(program.accept_vector())));
        text.push_str(&format!("# initial {}\n", bit_string(program.initial_active())));
    }
    emit(args.output.as_deref(), &text)
}

fn read_input(path: &Path, format: InputFormat, bits: u32) -> Result<Vec<Symbol>> {
    let format = match format {
        InputFormat::Auto if bits <= 8 => InputFormat::Bytes,
        InputFormat::Auto => InputFormat::Symbols,
        other => other,
    };
    match format {
        InputFormat::Bytes => {
            if bits > 8 {
                bail!("byte input cannot drive a {bits}-bit program; use --input-format symbols");
            }
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(bytes.into_iter().map(Symbol::from).collect())
        }
        _ => read_text(path)?
            .split_whitespace()
            .enumerate()
            .map(|(i, tok)| {
                tok.parse::<Symbol>()
                    .map_err(|_| anyhow!("symbol {i} ('{tok}') is not a decimal number"))
            })
            .collect(),
    }
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode> {
    let profile = load_profile(args.config.as_deref())?;
    let program = load_image(&args.image)?;
    let input = read_input(&args.input, args.input_format, program.symbol_bits())?;
    let result = run(&program, &input, args.trace)?;

    let (backend, cost) = match args.backend {
        BackendArg::Functional => ("functional", None),
        BackendArg::Rram | BackendArg::Sram => {
            let b = if args.backend == BackendArg::Rram {
                Backend::Rram
            } else {
                Backend::Sram
            };
            let cost = ap_run_cost(
                &RunStats::from(&result),
                &profile.costs.column_cost(b),
                program.num_states(),
            )?;
            (if b == Backend::Rram { "rram" } else { "sram" }, Some(cost))
        }
    };
    // searches report any match, anchored runs the end state
    let accepted = match program.start_mode() {
        StartMode::StartOfData => result.accepted,
        StartMode::AllInput => result.accepted_ever,
    };

    let mut csv = String::from(
        "accepted,final_accepting,first_accept,steps,backend,latency_s,energy_j,column_evaluations\n",
    );
    let (latency, energy) = cost.map_or((String::new(), String::new()), |c| (eng(c.latency), eng(c.energy)));
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        accepted,
        result.accepted,
        result.first_accept.map_or(String::new(), |s| s.to_string()),
        result.steps,
        backend,
        latency,
        energy,
        result.column_evaluations
    ));
    if let Some(trace) = &result.trace {
        csv.push_str("step,symbol,active,accepting\n");
        for (step, active) in trace.iter().enumerate() {
            let symbol = if step == 0 {
                String::new()
            } else {
                input[step - 1].to_string()
            };
            csv.push_str(&format!(
                "{step},{symbol},{},{}\n",
                bit_string(active),
                active.intersects(program.accept_vector())
            ));
        }
    }
    emit(args.output.as_deref(), &csv)?;
    eprintln!(
        "{} after {} symbols",
        if accepted { "accepted" } else { "rejected" },
        result.steps
    );
    Ok(if accepted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let profile = load_profile(args.config.as_deref())?;
    let text = match args.mode {
        BenchMode::Gates => {
            let mut out = String::from("gate,row_bits,current,output\n");
            for row in gate_truth_tables(&profile.costs.device, profile.read_voltage)? {
                out.push_str(&format!(
                    "{},{}{},{},{}\n",
                    row.gate,
                    u8::from(row.bits.0),
                    u8::from(row.bits.1),
                    eng(row.current),
                    u8::from(row.output)
                ));
            }
            out
        }
        BenchMode::Costs => {
            let (r, s) = (profile.costs.rram, profile.costs.sram);
            let mut out = String::from("backend,discharge_time_s,energy_per_eval_j\n");
            out.push_str(&format!("rram,{},{}\n", eng(r.discharge_time), eng(r.energy_per_eval)));
            out.push_str(&format!("sram,{},{}\n", eng(s.discharge_time), eng(s.energy_per_eval)));
            let (t, e) = (r.discharge_time / s.discharge_time, r.energy_per_eval / s.energy_per_eval);
            out.push_str(&format!("rram/sram,{t:.6},{e:.6}\n"));
            out.push_str(&format!("rram_saving,{:.6},{:.6}\n", 1.0 - t, 1.0 - e));
            for b in Backend::ALL {
                let cells = profile.costs.calibration_cells;
                eprintln!(
                    "{b}: modeled slowest discharge {}s, {}F per cell, {}F per {cells}-cell column",
                    eng(profile.costs.modeled_slowest_discharge(b)?),
                    eng(profile.costs.rc.c_cell(b)),
                    eng(profile.costs.rc.c_cell(b) * cells as f64)
                );
            }
            out
        }
        BenchMode::Sweep => sweep_csv(&sweep(&profile.arch, &profile.workload, &profile.sweep)?),
        BenchMode::Calibrate => profile.to_text(),
    };
    emit(args.output.as_deref(), &text)
}
