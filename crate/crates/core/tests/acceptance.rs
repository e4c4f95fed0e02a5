// SPDX-License-Identifier: Apache-2.0

//! Acceptance report: one `criterion N: PASS|FAIL` line per criterion.
//! Exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use oobleck_core::fleet::{run_seeds, simulate, DcScenario, FleetResult, DEFAULT_VFA_DEGRADATION};
use oobleck_core::ir::{run_until_valid, InterpError, Value, Values};
use oobleck_core::pipeline::{
    calibrate_transmission, healthy_segments, run_functional, speedup, sweep, total_cycles, CalibrationPoint,
    CompiledStage, Fallback, FaultScenario, GridSpec, LatencyParams, PipelineSpec, Placement, StageSpec,
};
use oobleck_core::{corpus, emit_hdl, emit_interface_descriptor, emit_software, lang, lower_to_ir, sema, Observation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let e = start.elapsed();
    ensure(e < limit, || format!("took {e:.2?}, limit {limit:?}"))?;
    Ok(e)
}

// ---- pipeline helpers ----

/// (C, n, faults, observed speedup) for the four reference measurements.
const POINTS: [(u64, usize, usize, f64); 4] =
    [(30_000, 6, 1, 2.17), (30_000, 6, 2, 1.3), (240_000, 12, 2, 4.30), (200_000, 10, 2, 3.65)];
const RESIDUAL_BOUND: f64 = 0.10;

fn observations() -> Vec<Observation> {
    POINTS
        .iter()
        .map(|&(c, n, k, target)| {
            CalibrationPoint {
                sw_cycles: c,
                stages: n,
                speedup: 100.0,
                faults: k,
                placement: Placement::Interior,
                target,
                hw_per_stage: None,
            }
            .observation()
            .unwrap()
        })
        .collect()
}

fn fitted_t() -> u64 {
    calibrate_transmission(&observations(), RESIDUAL_BOUND).expect("calibration").transmission_cycles
}

fn uniform_speedup(c: u64, n: usize, faults: Vec<usize>, t: u64) -> f64 {
    let p = PipelineSpec::uniform(c, n, 100.0).unwrap();
    speedup(&p, &FaultScenario::software(faults), &LatencyParams::software(t)).unwrap()
}

/// Largest relative error over the reference points at transmission `t`.
fn worst_residual(t: u64) -> f64 {
    POINTS
        .iter()
        .map(|&(c, n, k, target)| {
            let s = uniform_speedup(c, n, Placement::Interior.positions(n, k).unwrap(), t);
            (s / target - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn stage(src: &str) -> StageSpec {
    StageSpec::ModuleBacked {
        module: CompiledStage::new(sema::typecheck(&lang::parse_module(src).unwrap()).unwrap()),
        hw_cycles: 10,
        sw_cycles: 1_000,
    }
}

// ---- criteria ----

fn c1_checksum_oracle() -> Outcome {
    let start = Instant::now();
    let tm = sema::typecheck(&lang::parse_module(corpus::PIPELINED_CHECKSUM).unwrap()).unwrap();
    let ir = lower_to_ir(&tm);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let singles = (0..64).map(|b| 1u64 << b);
    let randoms: Vec<u64> = (0..10_000).map(|_| rng.random::<u64>() | 1 << rng.random_range(0..64)).collect();
    let mut checked = 0;
    for v in singles.chain(randoms) {
        let inputs = Values::from([("input".to_string(), Value::Word(v))]);
        let r = run_until_valid(&ir, &inputs, 16).map_err(|e| format!("input {v:#x}: {e}"))?;
        ensure(r.outputs["out"] == Value::Word(common::popcount(v)), || {
            format!("input {v:#x}: {:?}", r.outputs["out"])
        })?;
        ensure(r.cycles == 2, || format!("input {v:#x}: {} cycles", r.cycles))?;
        checked += 1;
    }
    let zero = Values::from([("input".to_string(), Value::Word(0))]);
    ensure(matches!(run_until_valid(&ir, &zero, 16), Err(InterpError::NeverValid { .. })), || {
        "input 0 did not report NeverValid".into()
    })?;
    let e = within(start, Duration::from_secs(5))?;
    Ok(format!("{checked} inputs match popcount in 2 cycles; 0 never valid; {e:.2?}"))
}

fn c2_dual_backend() -> Outcome {
    let Some(cc) = common::cc::compiler() else {
        return Ok("skipped: no host C compiler".into());
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut total = 0;
    for (i, (_, src)) in corpus::ALL.iter().enumerate() {
        total += common::cc::differential(&cc, dir.path(), src, i as u64);
    }
    Ok(format!(
        "{} modules × {} inputs agree with the interpreter ({total} runs, {cc})",
        corpus::ALL.len(),
        common::cc::INPUTS_PER_MODULE
    ))
}

fn c3_golden() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut files = 0;
    for (name, src) in corpus::ALL {
        let tm = sema::typecheck(&lang::parse_module(src).unwrap()).unwrap();
        let mut outputs = vec![
            (format!("{name}.c"), emit_software(&tm)),
            (format!("{name}.iface.json"), emit_interface_descriptor(&tm)),
        ];
        if let Ok(v) = emit_hdl(&tm) {
            outputs.push((format!("{name}.v"), v));
        }
        for (file, actual) in outputs {
            let expected = std::fs::read_to_string(dir.join(&file)).map_err(|e| format!("{file}: {e}"))?;
            ensure(expected == actual, || format!("{file} differs from golden"))?;
            files += 1;
        }
        let json: serde_json::Value = serde_json::from_str(&emit_interface_descriptor(&tm)).unwrap();
        let mut want = vec![format!("I_{name}"), format!("O_{name}")];
        if tm.is_sequential {
            want.push(format!("State_{name}"));
        }
        let got: Vec<String> = json["records"].as_object().unwrap().keys().cloned().collect();
        ensure(got == want, || format!("{name}: records {got:?}"))?;
    }
    Ok(format!("{files} golden files byte-identical; I_/O_/State_ records exact"))
}

fn c4_calibration() -> Outcome {
    let start = Instant::now();
    let cal = calibrate_transmission(&observations(), RESIDUAL_BOUND).map_err(|e| e.to_string())?;
    let t = cal.transmission;
    ensure((1_900.0..=2_500.0).contains(&t), || format!("T = {t:.1} outside [1900, 2500]"))?;
    let worst = cal.max_abs_residual();
    ensure(worst <= RESIDUAL_BOUND, || format!("max residual {worst:.3}"))?;
    let e = within(start, Duration::from_secs(1))?;
    let preds: Vec<String> = cal.predicted.iter().map(|p| format!("{p:.2}")).collect();
    Ok(format!(
        "T = {t:.1} (cycles {}), predicted [{}], max |residual| {:.1}%; {e:.2?}",
        cal.transmission_cycles,
        preds.join(", "),
        worst * 100.0
    ))
}

fn c5_endurance() -> Outcome {
    let t = fitted_t();
    let mut lowest = f64::INFINITY;
    for k in 1..=8 {
        let s = uniform_speedup(240_000, 12, Placement::Worst.positions(12, k).unwrap(), t);
        ensure(s > 1.0, || format!("240k/12 with {k} worst-placed faults: {s:.3}"))?;
        lowest = lowest.min(s);
    }

    // 30k/6 with three worst-placed faults: where does it cross 1.0?
    let three = Placement::Worst.positions(6, 3).unwrap();
    let at_fit = uniform_speedup(30_000, 6, three.clone(), t);
    let crossover = (0..=30_000u64)
        .find(|&x| uniform_speedup(30_000, 6, three.clone(), x) <= 1.0)
        .ok_or("30k/6 never drops to 1.0")?;
    let band: Vec<u64> = (0..=30_000).filter(|&x| worst_residual(x) <= RESIDUAL_BOUND).collect();
    let (lo, hi) = (*band.first().ok_or("empty feasible band")?, *band.last().unwrap());
    ensure((lo..=hi).contains(&crossover), || {
        format!("30k/6 3-fault crossover T = {crossover} outside feasible band [{lo}, {hi}]")
    })?;
    Ok(format!(
        "240k/12 worst placement k=1..8 min speedup {lowest:.2} at T = {t}; \
         30k/6 with 3 faults: {at_fit:.3} at T = {t}, ≤ 1.0 from T = {crossover}, \
         within the ±10% band [{lo}, {hi}]"
    ))
}

fn c6_monotonicity() -> Outcome {
    let start = Instant::now();
    let t = fitted_t();
    let cs = [30_000, 60_000, 120_000, 240_000, 480_000];
    let ns = [4, 6, 8, 12, 16];
    let one = |c, n| uniform_speedup(c, n, Placement::Interior.positions(n, 1).unwrap(), t);
    for &c in &cs {
        for w in ns.windows(2) {
            ensure(one(c, w[1]) > one(c, w[0]), || format!("not increasing in n at C={c}, n={w:?}"))?;
        }
    }
    for &n in &ns {
        for w in cs.windows(2) {
            ensure(one(w[1], n) > one(w[0], n), || format!("not increasing in C at n={n}, C={w:?}"))?;
        }
    }

    // every mask, every single added fault, on the reference configurations
    let mut pairs = 0u64;
    let l = LatencyParams::software(t);
    for (c, n) in [(30_000, 6), (240_000, 12), (200_000, 10)] {
        let p = PipelineSpec::uniform(c, n, 100.0).unwrap();
        let totals: Vec<u64> = (0u32..1 << n)
            .map(|m| {
                let f = FaultScenario::software((0..n).filter(|i| m >> i & 1 == 1));
                total_cycles(&p, &f, &l).unwrap().total_cycles
            })
            .collect();
        for m in 0..1usize << n {
            for i in (0..n).filter(|i| m >> i & 1 == 0) {
                ensure(totals[m | 1 << i] >= totals[m], || format!("C={c} n={n}: mask {m:b} + stage {i}"))?;
                pairs += 1;
            }
        }
    }

    // two adjacent faults cost one fewer segment than two separated ones
    for n in 4..=16usize {
        for i in 1..n - 2 {
            let adj = healthy_segments([i, i + 1], n);
            let apart = healthy_segments([i - 1, i + 1], n);
            ensure(adj < apart || i == 1, || format!("n={n} i={i}: {adj} vs {apart}"))?;
            let p = PipelineSpec::uniform(240_000, n, 100.0).unwrap();
            let cross = |f: FaultScenario| total_cycles(&p, &f, &l).unwrap().crossing_cycles;
            ensure(
                cross(FaultScenario::software([i, i + 1])) <= cross(FaultScenario::software([i - 1, i + 1])),
                || format!("n={n} i={i}: adjacency did not reduce crossings"),
            )?;
        }
    }
    let e = within(start, Duration::from_secs(5))?;
    Ok(format!(
        "5×5 grid strictly increasing; {pairs} fault additions non-decreasing; adjacency merges segments; {e:.2?}"
    ))
}

fn c7_fpga_insensitivity() -> Outcome {
    let t = fitted_t();
    let g: GridSpec = format!("C=60000;n=6;T={t};faults=1;fallback=fpga;s=35,200;routing=through-sw")
        .parse()
        .map_err(|e| format!("{e}"))?;
    let rows = sweep(&g).map_err(|e| e.to_string())?;
    let (slow, fast) = (rows[0].achieved, rows[1].achieved);
    let change = (fast - slow).abs() / slow;
    ensure(change < 0.05, || format!("{slow:.3} vs {fast:.3}: {:.1}%", change * 100.0))?;
    Ok(format!("s=35: {slow:.3}, s=200: {fast:.3}, change {:.2}%", change * 100.0))
}

fn mean(rs: &[FleetResult]) -> f64 {
    rs.iter().map(|r| r.replacements_or_purchases as f64).sum::<f64>() / rs.len() as f64
}

fn c8_fleet_fixed_time() -> Outcome {
    let start = Instant::now();
    let (chips, ticks, p) = (10_000, 1_460, 3.5e-6);
    let seeds: Vec<u64> = (0..20).collect();
    let sfa = mean(&run_seeds(&DcScenario::sfa(chips, ticks, p, 0).unwrap(), &seeds));
    let vfa = mean(&run_seeds(&DcScenario::vfa(chips, ticks, p, DEFAULT_VFA_DEGRADATION.to_vec(), 0).unwrap(), &seeds));
    ensure((40.0..=60.0).contains(&sfa), || format!("SFA mean {sfa}"))?;
    ensure(vfa < 1.0, || format!("VFA mean {vfa}"))?;
    for s in [
        DcScenario::sfa(chips, ticks, 0.0, 0).unwrap(),
        DcScenario::vfa(chips, ticks, 0.0, DEFAULT_VFA_DEGRADATION.to_vec(), 0).unwrap(),
    ] {
        let r = simulate(&s);
        ensure(r.replacements_or_purchases == 0, || format!("p=0: {r:?}"))?;
        ensure(r.aggregate_throughput == (chips * ticks) as f64, || format!("p=0: {r:?}"))?;
    }
    let e = within(start, Duration::from_secs(60))?;
    Ok(format!("SFA mean {sfa:.2}, VFA(3) mean {vfa:.2} over 20 seeds; p=0 exact; {e:.2?}"))
}

fn c9_coupled_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
    let mut runs = 0;
    for _ in 0..100 {
        let chips = rng.random_range(1..500);
        let ticks = rng.random_range(1..1_000);
        let p = 10f64.powf(rng.random_range(-6.0..-0.5));
        let seed = rng.random();
        let sfa = simulate(&DcScenario::sfa(chips, ticks, p, seed).unwrap());
        let vfa = simulate(&DcScenario::vfa(chips, ticks, p, DEFAULT_VFA_DEGRADATION.to_vec(), seed).unwrap());
        ensure(vfa.replacements_or_purchases <= sfa.replacements_or_purchases, || {
            format!(
                "N={chips} ticks={ticks} p={p:e} seed={seed}: {} > {}",
                vfa.replacements_or_purchases, sfa.replacements_or_purchases
            )
        })?;
        runs += 1;
    }
    Ok(format!("VFA ≤ SFA on all {runs} shared-seed scenarios"))
}

fn c10_fixed_throughput() -> Outcome {
    let (chips, ticks, p) = (1_000, 200, 1e-3);
    let seeds: Vec<u64> = (0..20).collect();
    let purchases = |deg: Vec<f64>, sfa: bool| {
        let s = if sfa { DcScenario::sfa(chips, ticks, p, 0) } else { DcScenario::vfa(chips, ticks, p, deg, 0) };
        let s = s.unwrap().fixed_throughput(chips as f64).unwrap();
        run_seeds(&s, &seeds).iter().map(|r| r.replacements_or_purchases).sum::<u64>() as f64
    };
    let base = purchases(vec![1.0], true);
    let half = purchases(vec![1.0, 0.5], false) / base;
    let third = purchases(vec![1.0, 2.0 / 3.0, 1.0 / 3.0], false) / base;
    ensure((half / 0.5 - 1.0).abs() <= 0.1, || format!("retain-1/2 ratio {half:.3}"))?;
    ensure((third * 3.0 - 1.0).abs() <= 0.1, || format!("retain-2/3 ratio {third:.3}"))?;
    Ok(format!("N={chips}, ticks={ticks}, p={p}, 20 seeds: retain-1/2 ratio {half:.3}, retain-2/3 ratio {third:.3}"))
}

fn c11_fault_transparency() -> Outcome {
    const BACK: &str = "module [] back (result : int) -> (a : int) { a = result; } <true; true>";
    let pipelines: Vec<(&str, PipelineSpec, &str, &str)> = vec![
        (
            "checksum→relay",
            PipelineSpec::new(vec![stage(corpus::PIPELINED_CHECKSUM), stage(corpus::RELAY)]).unwrap(),
            "input",
            "result",
        ),
        (
            "arithmetic chain",
            PipelineSpec::new(corpus::ARITHMETIC_CHAIN.iter().map(|s| stage(s)).collect()).unwrap(),
            "a",
            "d",
        ),
        (
            "identity ring",
            PipelineSpec::new((0..6).map(|i| stage([corpus::ID, corpus::RELAY, BACK][i % 3])).collect()).unwrap(),
            "a",
            "a",
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut runs = 0u64;
    for (label, p, input, output) in &pipelines {
        let n = p.len();
        let scenarios: Vec<FaultScenario> = (0u32..1 << n)
            .flat_map(|m| {
                [Fallback::Software, Fallback::Fpga]
                    .map(|fb| FaultScenario::with((0..n).filter(|i| m >> i & 1 == 1), fb))
            })
            .collect();
        for _ in 0..1_000 {
            let v = common::word(&mut rng) | 1;
            let inputs = Values::from([(input.to_string(), Value::Word(v))]);
            let healthy = run_functional(p, &FaultScenario::healthy(), &inputs, 16).map_err(|e| e.to_string())?;
            for f in &scenarios {
                let r = run_functional(p, f, &inputs, 16).map_err(|e| format!("{label}: {e}"))?;
                ensure(r.outputs == healthy.outputs, || format!("{label}: input {v:#x} differs under {f:?}"))?;
                runs += 1;
            }
            if *label == "identity ring" {
                ensure(healthy.outputs[*output] == Value::Word(v), || format!("{label}: identity broken"))?;
            }
        }
    }
    Ok(format!("{} pipelines × 1000 inputs × all masks: {runs} runs, outputs invariant", pipelines.len()))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, c1_checksum_oracle),
        (2, c2_dual_backend),
        (3, c3_golden),
        (4, c4_calibration),
        (5, c5_endurance),
        (6, c6_monotonicity),
        (7, c7_fpga_insensitivity),
        (8, c8_fleet_fixed_time),
        (9, c9_coupled_dominance),
        (10, c10_fixed_throughput),
        (11, c11_fault_transparency),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS — {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL — {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
