// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Map, Value};

use crate::lang::{print_trailer_expr, Param, VType};
use crate::sema::TypedModule;

fn field(name: &str, ty: VType) -> Value {
    let mut f = Map::new();
    f.insert("name".into(), json!(name));
    match ty {
        VType::Int => {
            f.insert("kind".into(), json!("int"));
        }
        VType::Bool => {
            f.insert("kind".into(), json!("bool"));
        }
        VType::IntArray(n) => {
            f.insert("kind".into(), json!("int_array"));
            f.insert("length".into(), json!(n));
        }
    }
    f.insert("width".into(), json!(ty.bit_width()));
    Value::Object(f)
}

fn record(params: &[Param]) -> Value {
    Value::Array(params.iter().map(|p| field(&p.name.name, p.ty)).collect())
}

/// JSON descriptor of the module's interface records.
///
/// Records are named `I_<name>`, `O_<name>` and, for sequential modules,
/// `State_<name>`; fields appear in declaration order with their bit widths.
pub fn emit_interface_descriptor(tm: &TypedModule) -> String {
    let ast = &tm.ast;
    let name = tm.name();
    let mut records = Map::new();
    records.insert(format!("I_{name}"), record(&ast.inputs));
    records.insert(format!("O_{name}"), record(&ast.outputs));
    if tm.is_sequential {
        let state = ast.state.iter().map(|s| field(&s.name.name, s.ty)).collect();
        records.insert(format!("State_{name}"), Value::Array(state));
    }
    let doc = json!({
        "module": name,
        "records": records,
        "valid": print_trailer_expr(&ast.valid),
        "ready": print_trailer_expr(&ast.ready),
        "array_layout": "flattened; element 0 occupies the least significant 64 bits",
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("descriptor serializes");
    text.push('\n');
    text
}
