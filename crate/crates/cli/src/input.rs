use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thetanull::{Characteristic, Error, PeriodMatrix};

/// Inline JSON when the argument starts with `{` or `[`, otherwise a path.
pub fn json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, Error> {
    let text = arg.trim();
    let body = if text.starts_with('{') || text.starts_with('[') {
        text.to_string()
    } else {
        fs::read_to_string(Path::new(text)).map_err(|e| Error::Schema(format!("cannot read {what} file {text:?}: {e}")))?
    };
    serde_json::from_str(&body).map_err(|e| Error::Schema(format!("invalid {what}: {e}")))
}

pub fn period(arg: &str) -> Result<PeriodMatrix, Error> {
    json_arg(arg, "period matrix")
}

pub fn characteristic(arg: &str) -> Result<Characteristic, Error> {
    arg.parse()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexInput {
    Pair([f64; 2]),
    Object { re: f64, im: f64 },
    Real(f64),
}

/// `[[re, im], …]`, `[{"re":…, "im":…}, …]` or `[re, …]`.
pub fn point(arg: &str) -> Result<Vec<Complex64>, Error> {
    let raw: Vec<ComplexInput> = json_arg(arg, "point")?;
    Ok(raw
        .into_iter()
        .map(|c| match c {
            ComplexInput::Pair([re, im]) | ComplexInput::Object { re, im } => Complex64::new(re, im),
            ComplexInput::Real(re) => Complex64::new(re, 0.0),
        })
        .collect())
}
