// SPDX-License-Identifier: Apache-2.0

//! `name=value,...` input lists for `run`.

use anyhow::{anyhow, bail, Context, Result};
use oobleck_core::ir::{Port, Value, Values};
use oobleck_core::lang::VType;

/// Splits on commas outside brackets.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0usize, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn parse_word(s: &str) -> Result<u64> {
    let s = s.trim().replace('_', "");
    let r = if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(h, 16)
    } else if let Some(b) = s.strip_prefix("0b") {
        u64::from_str_radix(b, 2)
    } else {
        s.parse()
    };
    r.with_context(|| format!("`{s}` is not a 64-bit unsigned integer"))
}

fn parse_value(ty: VType, s: &str) -> Result<Value> {
    Ok(match ty {
        VType::Int => Value::Word(parse_word(s)?),
        VType::Bool => match s {
            "true" | "1" => Value::Flag(true),
            "false" | "0" => Value::Flag(false),
            _ => bail!("`{s}` is not a bool"),
        },
        VType::IntArray(n) => {
            let body = s
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| anyhow!("expected `[v1,...]` for {ty}, got `{s}`"))?;
            let words = split_top(body).into_iter().map(parse_word).collect::<Result<Vec<_>>>()?;
            if words.len() != n {
                bail!("{ty} needs {n} elements, got {}", words.len());
            }
            Value::WordArray(words)
        }
    })
}

/// Parses `spec` against the module's input ports. Every port must be
/// given exactly once.
pub fn parse_inputs(spec: &str, ports: &[Port]) -> Result<Values> {
    let mut values = Values::new();
    for item in split_top(spec) {
        let (name, raw) = item.split_once('=').ok_or_else(|| anyhow!("expected name=value, got `{item}`"))?;
        let name = name.trim();
        let port = ports.iter().find(|p| p.name == name).ok_or_else(|| anyhow!("module has no input `{name}`"))?;
        let v = parse_value(port.ty, raw.trim()).with_context(|| format!("input `{name}`"))?;
        if values.insert(name.to_string(), v).is_some() {
            bail!("input `{name}` given twice");
        }
    }
    if let Some(p) = ports.iter().find(|p| !values.contains_key(&p.name)) {
        bail!("missing input `{}`", p.name);
    }
    Ok(values)
}
