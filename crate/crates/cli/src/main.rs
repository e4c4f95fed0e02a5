// SPDX-License-Identifier: Apache-2.0

//! `oobleck`: compile and run Viscosity modules, evaluate fault-tolerant
//! accelerator pipelines and simulate accelerator fleets.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on an input error
//! (diagnostics, never-valid modules, infeasible calibrations).

mod inputs;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use oobleck_core::fleet::{run_seeds, AcceleratorKind, DcScenario, FleetResult};
use oobleck_core::pipeline::{
    calibrate_transmission, sweep, total_cycles, CalibrationPoint, Fallback, FpgaRouting, GridSpec, ScenarioFile,
    SweepRow, DEFAULT_RESIDUAL_BOUND,
};
use oobleck_core::{emit_hdl, emit_interface_descriptor, emit_software, lower_to_ir, Observation, TypedModule};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "oobleck", version, about = "Viscosity compiler and Oobleck fault/fleet models")]
struct Cli {
    /// Worker threads for sweeps and seed batches (0 = one per core).
    #[arg(long, env = "OOBLECK_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit C, Verilog, the interface descriptor or the IR for a module.
    Compile(CompileArgs),
    /// Run a module on held inputs until valid asserts.
    Run(RunArgs),
    /// Cycle model of a staged accelerator with faulted stages.
    Pipeline(PipelineArgs),
    /// Monte Carlo fleet replacement and purchase models.
    Fleet {
        #[command(subcommand)]
        regime: FleetRegime,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EmitKind {
    /// C11 software fallback
    Sw,
    /// Verilog-2001 with a valid/ready handshake
    Hdl,
    /// JSON interface descriptor
    Iface,
    /// Per-cycle dataflow IR
    Ir,
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Viscosity source file.
    file: PathBuf,
    #[arg(long, value_enum)]
    emit: EmitKind,
    /// Output path; `-` or absent writes to standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Viscosity source file.
    file: PathBuf,
    /// Input values, e.g. `a=0x10,flag=true,v=[1,2,3]`.
    #[arg(long, default_value = "")]
    inputs: String,
    /// Give up if valid has not asserted after this many cycles.
    #[arg(long, default_value_t = 1_000)]
    max_cycles: u64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FallbackArg {
    Sw,
    Fpga,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RoutingArg {
    ThroughSw,
    Direct,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct PipelineArgs {
    #[command(subcommand)]
    action: Option<PipelineAction>,
    /// Total software cycles C of the unsplit operation.
    #[arg(long, required_unless_present_any = ["sweep", "scenario"])]
    sw_cycles: Option<u64>,
    /// Number of stages n.
    #[arg(long, required_unless_present_any = ["sweep", "scenario"])]
    stages: Option<usize>,
    /// Hardware speedup S of each stage over software.
    #[arg(long, default_value_t = 100.0)]
    speedup: f64,
    /// Cycles T per software/hardware crossing.
    #[arg(long, default_value_t = 0)]
    transmission: u64,
    /// Faulted stage indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    faults: Vec<usize>,
    /// Where faulted stages run.
    #[arg(long, value_enum, default_value = "sw")]
    fallback: FallbackArg,
    /// FPGA speedup over software, 35 to 200.
    #[arg(long, default_value_t = 35.0)]
    fpga_speedup: f64,
    #[arg(long, value_enum, default_value = "through-sw")]
    fpga_routing: RoutingArg,
    /// Fixed hardware cycles per stage instead of C/(n·S).
    #[arg(long)]
    hw_per_stage: Option<u64>,
    /// Grid of configurations, e.g. `C=30000..240000:30000;n=6,12;T=2160;faults=0..3`.
    /// Keys: C, n, S, T, faults, placement, fallback, s, routing, hw.
    #[arg(long, conflicts_with_all = ["sw_cycles", "stages", "scenario"])]
    sweep: Option<String>,
    /// JSON scenario file with the same fields as the flags.
    #[arg(long, conflicts_with_all = ["sw_cycles", "stages"])]
    scenario: Option<PathBuf>,
    /// Write rows as CSV here (`-` for standard output).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum PipelineAction {
    /// Fit the transmission latency T to observed speedups.
    Calibrate {
        /// JSON array of `{sw_cycles, stages, faults, target, [speedup, placement, hw_per_stage]}`.
        #[arg(long)]
        points: PathBuf,
        /// Largest accepted relative error per point.
        #[arg(long, default_value_t = DEFAULT_RESIDUAL_BOUND)]
        bound: f64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Sfa,
    Vfa,
}

#[derive(Subcommand, Debug)]
enum FleetRegime {
    /// Fixed chip count; count replacements.
    FixedTime(FleetArgs),
    /// Hold aggregate capacity; count purchases.
    FixedThroughput {
        #[command(flatten)]
        args: FleetArgs,
        /// Capacity to maintain in chip-equivalents (default: --chips).
        #[arg(long)]
        target: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct FleetArgs {
    #[arg(long)]
    chips: u64,
    #[arg(long)]
    ticks: u64,
    /// Per-chip, per-tick fault probability.
    #[arg(long)]
    fault_prob: f64,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Faults that kill a VFA chip.
    #[arg(long, default_value_t = 3)]
    max_faults: usize,
    /// VFA throughput after 0, 1, ... faults (default: 1, 1/2, 1/3, ...).
    #[arg(long, value_delimiter = ',')]
    degradation: Option<Vec<f64>>,
    /// Number of seeds, run as 0..k offset by --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-seed rows as CSV here (`-` for standard output).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Compile(a) => compile(&a),
        Command::Run(a) => run(&a),
        Command::Pipeline(a) => match &a.action {
            Some(PipelineAction::Calibrate { points, bound }) => calibrate(points, *bound),
            None => pipeline(&a),
        },
        Command::Fleet { regime } => fleet(regime),
    }
}

fn load(file: &Path) -> Result<TypedModule> {
    let src = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    oobleck_core::check_source(&src).map_err(|diag| {
        let lines: Vec<String> = diag.lines().map(|l| format!("{}:{l}", file.display())).collect();
        anyhow::anyhow!(lines.join("\n"))
    })
}

/// Writes to `path`, or to standard output for `None` and `-`.
fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        _ => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn compile(a: &CompileArgs) -> Result<()> {
    let tm = load(&a.file)?;
    let text = match a.emit {
        EmitKind::Sw => emit_software(&tm),
        EmitKind::Hdl => emit_hdl(&tm).map_err(|e| anyhow::anyhow!("{}:{e}", a.file.display()))?,
        EmitKind::Iface => emit_interface_descriptor(&tm),
        EmitKind::Ir => lower_to_ir(&tm).to_string(),
    };
    write_out(a.output.as_deref(), &text)
}

fn run(a: &RunArgs) -> Result<()> {
    let tm = load(&a.file)?;
    let ir = lower_to_ir(&tm);
    let values = inputs::parse_inputs(&a.inputs, &ir.inputs)?;
    let r = oobleck_core::run_until_valid(&ir, &values, a.max_cycles)?;
    let mut parts: Vec<String> = ir.outputs.iter().map(|o| format!("{}={}", o.name, r.outputs[&o.name])).collect();
    parts.push(format!("cycles={}", r.cycles));
    parts.push("valid=true".into());
    println!("{}", parts.join(" "));
    Ok(())
}

const SWEEP_HEADER: [&str; 14] = [
    "C",
    "n",
    "S",
    "T",
    "faults",
    "placement",
    "fallback",
    "fpga_speedup",
    "routing",
    "hw_cycles",
    "fallback_cycles",
    "crossing_cycles",
    "total_cycles",
    "speedup",
];

fn pipeline(a: &PipelineArgs) -> Result<()> {
    if let Some(spec) = &a.sweep {
        let grid: GridSpec = spec.parse()?;
        let rows: Vec<SweepRow> = sweep(&grid)?;
        let text = to_csv(&rows, &SWEEP_HEADER)?;
        return write_out(a.csv.as_deref(), &text);
    }
    let scenario = match &a.scenario {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ScenarioFile {
            sw_cycles: a.sw_cycles.expect("required by clap"),
            stages: a.stages.expect("required by clap"),
            speedup: a.speedup,
            transmission: a.transmission,
            faults: a.faults.clone(),
            fallback: match a.fallback {
                FallbackArg::Sw => Fallback::Software,
                FallbackArg::Fpga => Fallback::Fpga,
            },
            fpga_speedup: a.fpga_speedup,
            routing: match a.fpga_routing {
                RoutingArg::ThroughSw => FpgaRouting::ThroughSoftware,
                RoutingArg::Direct => FpgaRouting::Direct,
            },
            hw_per_stage: a.hw_per_stage,
        },
    };
    let (p, f, l) = scenario.build()?;
    let b = total_cycles(&p, &f, &l)?;
    let achieved = p.sw_total_cycles() as f64 / b.total_cycles as f64;
    match &a.csv {
        Some(path) => {
            let row = SweepRow {
                sw_cycles: scenario.sw_cycles,
                stages: scenario.stages,
                speedup: scenario.speedup,
                transmission: scenario.transmission,
                faults: f.len(),
                placement: format!("at:{}", f.mask().map(|i| i.to_string()).collect::<Vec<_>>().join(":")),
                fallback: scenario.fallback.to_string(),
                fpga_speedup: scenario.fpga_speedup,
                routing: scenario.routing.to_string(),
                hw_cycles: b.hw_cycles,
                fallback_cycles: b.fallback_cycles,
                crossing_cycles: b.crossing_cycles,
                total_cycles: b.total_cycles,
                achieved,
            };
            write_out(Some(path), &to_csv(&[row], &SWEEP_HEADER)?)
        }
        None => {
            println!(
                "hw_cycles={} fallback_cycles={} crossing_cycles={} healthy_segments={} total_cycles={}",
                b.hw_cycles, b.fallback_cycles, b.crossing_cycles, b.healthy_segments, b.total_cycles
            );
            println!("speedup={achieved:.4}");
            Ok(())
        }
    }
}

fn calibrate(points: &Path, bound: f64) -> Result<()> {
    let text = fs::read_to_string(points).with_context(|| format!("reading {}", points.display()))?;
    let pts: Vec<CalibrationPoint> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", points.display()))?;
    let obs = pts.iter().map(CalibrationPoint::observation).collect::<Result<Vec<Observation>, _>>()?;
    let cal = calibrate_transmission(&obs, bound)?;
    println!(
        "T={:.3} T_cycles={} max_abs_residual={:.4}",
        cal.transmission,
        cal.transmission_cycles,
        cal.max_abs_residual()
    );
    for (i, p) in pts.iter().enumerate() {
        println!(
            "point={i} sw_cycles={} stages={} faults={} target={} predicted={:.4} residual={:+.4}",
            p.sw_cycles, p.stages, p.faults, p.target, cal.predicted[i], cal.residuals[i]
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct FleetRow {
    mode: AcceleratorKind,
    regime: &'static str,
    p: f64,
    chips: u64,
    ticks: u64,
    max_faults: usize,
    seed: u64,
    replacements_or_purchases: u64,
    aggregate_throughput: f64,
}

fn fleet(regime: FleetRegime) -> Result<()> {
    let (a, target) = match regime {
        FleetRegime::FixedTime(a) => (a, None),
        FleetRegime::FixedThroughput { args, target } => {
            let t = target.unwrap_or(args.chips as f64);
            (args, Some(t))
        }
    };
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let degradation = match (&a.degradation, a.mode) {
        (Some(d), Mode::Vfa) => {
            if d.len() != a.max_faults {
                bail!("--degradation has {} entries but --max-faults is {}", d.len(), a.max_faults);
            }
            d.clone()
        }
        (None, Mode::Vfa) => (0..a.max_faults).map(|i| 1.0 / (i + 1) as f64).collect(),
        (_, Mode::Sfa) => vec![1.0],
    };
    let kind = match a.mode {
        Mode::Sfa => AcceleratorKind::Sfa,
        Mode::Vfa => AcceleratorKind::Vfa,
    };
    let mut s = DcScenario::new(a.chips, a.ticks, a.fault_prob, kind, degradation, a.seed)?;
    if let Some(t) = target {
        s = s.fixed_throughput(t)?;
    }
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    let results: Vec<FleetResult> = run_seeds(&s, &seeds);
    let rows: Vec<FleetRow> = results
        .iter()
        .zip(&seeds)
        .map(|(r, &seed)| FleetRow {
            mode: kind,
            regime: s.regime.name(),
            p: a.fault_prob,
            chips: a.chips,
            ticks: a.ticks,
            max_faults: s.max_faults(),
            seed,
            replacements_or_purchases: r.replacements_or_purchases,
            aggregate_throughput: r.aggregate_throughput,
        })
        .collect();
    if let Some(path) = &a.csv {
        let header = [
            "mode",
            "regime",
            "p",
            "chips",
            "ticks",
            "max_faults",
            "seed",
            "replacements_or_purchases",
            "aggregate_throughput",
        ];
        write_out(Some(path), &to_csv(&rows, &header)?)?;
        if path == Path::new("-") {
            return Ok(());
        }
    }
    let k = results.len() as f64;
    let mean_count = results.iter().map(|r| r.replacements_or_purchases as f64).sum::<f64>() / k;
    let mean_throughput = results.iter().map(|r| r.aggregate_throughput).sum::<f64>() / k;
    let label = if target.is_some() { "purchases" } else { "replacements" };
    println!(
        "mode={kind} regime={} seeds={} mean_{label}={mean_count} mean_aggregate_throughput={mean_throughput}",
        s.regime.name(),
        seeds.len()
    );
    Ok(())
}
