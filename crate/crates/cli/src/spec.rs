//! Input-spec documents.
//!
//! ```json
//! {"modes": 3, "cutoff": "auto", "tolerance": 1e-10,
//!  "input": {"type": "hybrid",
//!            "number": {"coefficients": [[0, 0], [1, 0]]},
//!            "cat": {"terms": [{"c": [1, 0], "alpha": [0.5, 0]}]}}}
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Unknown keys are rejected.

use mbs_slocc::fock::DEFAULT_CUTOFF_EPS;
use mbs_slocc::{CatTerm, Cutoff, InputFamily, InputSpec, C64};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

type Object = Map<String, Value>;

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Object> {
    v.as_object().ok_or_else(|| CliError::schema(ptr, "expected an object"))
}

fn only_keys(obj: &Object, allowed: &[&str], ptr: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::schema(format!("{ptr}/{k}"), format!("unknown key; expected one of {allowed:?}"))),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Object, key: &str, ptr: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| CliError::schema(format!("{ptr}/{key}"), "missing required key"))
}

fn positive_int(v: &Value, ptr: &str) -> Result<usize> {
    v.as_u64()
        .filter(|&n| n > 0)
        .map(|n| n as usize)
        .ok_or_else(|| CliError::schema(ptr, "expected a positive integer"))
}

pub(crate) fn complex(v: &Value, ptr: &str) -> Result<C64> {
    let pair = v.as_array().filter(|a| a.len() == 2);
    let parts: Option<Vec<f64>> = pair.map(|a| a.iter().filter_map(Value::as_f64).filter(|x| x.is_finite()).collect());
    match parts {
        Some(p) if p.len() == 2 => Ok(C64::new(p[0], p[1])),
        _ => Err(CliError::schema(ptr, "expected a complex number [re, im]")),
    }
}

fn coefficients(obj: &Object, ptr: &str) -> Result<Vec<C64>> {
    let ptr = format!("{ptr}/coefficients");
    let arr = obj
        .get("coefficients")
        .ok_or_else(|| CliError::schema(&ptr, "missing required key"))?
        .as_array()
        .ok_or_else(|| CliError::schema(&ptr, "expected an array"))?;
    arr.iter().enumerate().map(|(i, v)| complex(v, &format!("{ptr}/{i}"))).collect()
}

fn terms(obj: &Object, ptr: &str) -> Result<Vec<CatTerm>> {
    let ptr = format!("{ptr}/terms");
    let arr = obj
        .get("terms")
        .ok_or_else(|| CliError::schema(&ptr, "missing required key"))?
        .as_array()
        .ok_or_else(|| CliError::schema(&ptr, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{ptr}/{i}");
            let t = object(v, &p)?;
            only_keys(t, &["c", "alpha"], &p)?;
            let c = complex(required(t, "c", &p)?, &format!("{p}/c"))?;
            let alpha = complex(required(t, "alpha", &p)?, &format!("{p}/alpha"))?;
            Ok(CatTerm::new(c, alpha))
        })
        .collect()
}

fn family(input: &Object) -> Result<InputFamily> {
    let ty = required(input, "type", "/input")?
        .as_str()
        .ok_or_else(|| CliError::schema("/input/type", "expected a string"))?;
    match ty {
        "number" => {
            only_keys(input, &["type", "coefficients"], "/input")?;
            Ok(InputFamily::NumberSuperposition { coefficients: coefficients(input, "/input")? })
        }
        "cat" => {
            only_keys(input, &["type", "terms"], "/input")?;
            Ok(InputFamily::CatState { terms: terms(input, "/input")? })
        }
        "hybrid" => {
            only_keys(input, &["type", "number", "cat"], "/input")?;
            let number = object(required(input, "number", "/input")?, "/input/number")?;
            only_keys(number, &["coefficients"], "/input/number")?;
            let cat = object(required(input, "cat", "/input")?, "/input/cat")?;
            only_keys(cat, &["terms"], "/input/cat")?;
            Ok(InputFamily::Hybrid { number: coefficients(number, "/input/number")?, cat: terms(cat, "/input/cat")? })
        }
        other => Err(CliError::schema("/input/type", format!("unknown input type '{other}'; expected number, cat or hybrid"))),
    }
}

/// Parses and validates an input-spec document.
pub fn parse_input_spec(document: &str) -> Result<InputSpec> {
    let root: Value = serde_json::from_str(document).map_err(|e| CliError::schema("", e.to_string()))?;
    let obj = object(&root, "")?;
    only_keys(obj, &["modes", "cutoff", "tolerance", "input"], "")?;
    let modes = positive_int(required(obj, "modes", "")?, "/modes")?;
    let cutoff = match obj.get("cutoff") {
        None => Cutoff::Auto,
        Some(Value::String(s)) if s == "auto" => Cutoff::Auto,
        Some(v @ Value::Number(_)) => Cutoff::Fixed(positive_int(v, "/cutoff")?),
        Some(_) => return Err(CliError::schema("/cutoff", "expected a positive integer or \"auto\"")),
    };
    let tolerance = match obj.get("tolerance") {
        None => DEFAULT_CUTOFF_EPS,
        Some(v) => v
            .as_f64()
            .filter(|t| *t > 0.0 && t.is_finite())
            .ok_or_else(|| CliError::schema("/tolerance", "expected a positive number"))?,
    };
    let input = object(required(obj, "input", "")?, "/input")?;
    InputSpec::new(family(input)?, modes, cutoff, tolerance).map_err(CliError::invariant)
}
