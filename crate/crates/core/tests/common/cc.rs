// SPDX-License-Identifier: Apache-2.0

//! Compiles emitted C with a host compiler and diffs it against the
//! interpreter, one process per module.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::{Command, Stdio};

use super::random_inputs;
use oobleck_core::ir::{self, Value, Values};
use oobleck_core::lang::{ModuleAst, VType};
use oobleck_core::{emit_software, lang, lower_to_ir, sema};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_CYCLES: u64 = 16;
pub const INPUTS_PER_MODULE: usize = 1_000;

pub fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let ok = Command::new(&cc)
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok_and(|s| s.success());
    ok.then_some(cc)
}

/// A `main` that reads flattened inputs per line and prints
/// `1 cycles outputs...` or `0`.
fn harness(ast: &ModuleAst) -> String {
    let name = &ast.name.name;
    let mut h = String::from(
        "\n#include <inttypes.h>\n#include <stdio.h>\n\nint main(void) {\n    for (;;) {\n        uint64_t w__;\n",
    );
    let mut args = Vec::new();
    for p in &ast.inputs {
        let local = format!("in__{}", p.name.name);
        match p.ty {
            VType::Int => {
                writeln!(h, "        if (scanf(\"%\" SCNu64, &w__) != 1) return 0;").unwrap();
                writeln!(h, "        uint64_t {local} = w__;").unwrap();
            }
            VType::Bool => {
                writeln!(h, "        if (scanf(\"%\" SCNu64, &w__) != 1) return 0;").unwrap();
                writeln!(h, "        bool {local} = w__ != 0;").unwrap();
            }
            VType::IntArray(n) => {
                writeln!(h, "        uint64_t {local}[{n}];").unwrap();
                writeln!(
                    h,
                    "        for (int i = 0; i < {n}; ++i) {{ if (scanf(\"%\" SCNu64, &{local}[i]) != 1) return 0; }}"
                )
                .unwrap();
            }
        }
        args.push(local);
    }
    writeln!(h, "        {name}_output o__;\n        uint64_t cycles__ = 0;").unwrap();
    writeln!(
        h,
        "        if (!{name}_run({}{MAX_CYCLES}, &o__, &cycles__)) {{ puts(\"0\"); continue; }}",
        args.iter().map(|a| format!("{a}, ")).collect::<String>()
    )
    .unwrap();
    writeln!(h, "        printf(\"1 %\" PRIu64, cycles__);").unwrap();
    for p in &ast.outputs {
        let field = &p.name.name;
        match p.ty {
            VType::Int => writeln!(h, "        printf(\" %\" PRIu64, o__.{field});").unwrap(),
            VType::Bool => writeln!(h, "        printf(\" %d\", o__.{field} ? 1 : 0);").unwrap(),
            VType::IntArray(n) => {
                writeln!(h, "        for (int i = 0; i < {n}; ++i) printf(\" %\" PRIu64, o__.{field}[i]);").unwrap()
            }
        }
    }
    h.push_str("        putchar('\\n');\n    }\n}\n");
    h
}

fn flatten(v: &Value, out: &mut Vec<u64>) {
    match v {
        Value::Word(w) => out.push(*w),
        Value::Flag(b) => out.push(*b as u64),
        Value::WordArray(ws) => out.extend(ws),
    }
}

fn expected_line(ast: &ModuleAst, ir: &oobleck_core::CycleIr, inputs: &Values) -> String {
    match ir::run_until_valid(ir, inputs, MAX_CYCLES) {
        Ok(run) => {
            let mut words = vec![1, run.cycles];
            for p in &ast.outputs {
                flatten(&run.outputs[&p.name.name], &mut words);
            }
            words.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
        }
        Err(ir::InterpError::NeverValid { .. } | ir::InterpError::IndexOutOfRange { .. }) => "0".into(),
        Err(e) => panic!("interpreter error: {e}"),
    }
}

/// Returns the number of inputs compared.
pub fn differential(cc: &str, dir: &Path, src: &str, seed: u64) -> usize {
    let ast = lang::parse_module(src).unwrap();
    let tm = sema::typecheck(&ast).unwrap();
    let ir = lower_to_ir(&tm);
    let name = &ast.name.name;
    let c_path = dir.join(format!("{name}.c"));
    let exe = dir.join(name);
    std::fs::write(&c_path, emit_software(&tm) + &harness(&ast)).unwrap();
    let out = Command::new(cc)
        .args(["-std=c11", "-O1", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&exe)
        .arg(&c_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{name}: C compilation failed\n{}\n{src}", String::from_utf8_lossy(&out.stderr));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<Values> = (0..INPUTS_PER_MODULE).map(|_| random_inputs(&ast, &mut rng)).collect();
    let mut stdin_text = String::new();
    for inputs in &cases {
        let mut words = Vec::new();
        for p in &ast.inputs {
            flatten(&inputs[&p.name.name], &mut words);
        }
        let line: Vec<String> = words.iter().map(u64::to_string).collect();
        stdin_text.push_str(&line.join(" "));
        stdin_text.push('\n');
    }
    let mut child = Command::new(&exe).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || stdin.write_all(stdin_text.as_bytes()).unwrap());
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let got: Vec<&str> = text.lines().collect();
    assert_eq!(got.len(), cases.len(), "{name}");
    for (inputs, line) in cases.iter().zip(got) {
        assert_eq!(line, expected_line(&ast, &ir, inputs), "{name} on {inputs:?}");
    }
    cases.len()
}
