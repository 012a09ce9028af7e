//! Number formatting and output plumbing shared by the subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::{Map, Number, Value};

/// Nine significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    let s = format!("{x:.8e}");
    match s.split_once('e') {
        Some((m, e)) => {
            let (sign, digits) = e.strip_prefix('-').map_or(("+", e), |d| ("-", d));
            format!("{m}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(sci(x).parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

pub fn complex(z: Complex64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), num(z.re));
    m.insert("im".into(), num(z.im));
    Value::Object(m)
}

pub fn object(fields: Vec<(&str, Value)>) -> Value {
    Value::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

pub fn emit_json(value: &Value, path: Option<&Path>) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    emit(&text, path)
}

/// `"re"` or `"re,im"`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let p = |t: &str| -> Result<f64, String> {
        let v: f64 = t.parse().map_err(|_| format!("not a number: {t:?} in {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not finite: {s:?}"))
        }
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(p(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(p(re)?, p(im)?)),
        _ => Err(format!("expected \"re\" or \"re,im\", got {s:?}")),
    }
}
