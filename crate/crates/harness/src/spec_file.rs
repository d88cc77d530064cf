//! Flat `key = value` instance files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ncsc_core::instances::{HardInstanceSpec, InstanceMode};

use crate::error::{HarnessError, HarnessResult};

const KEYS: [&str; 12] = [
    "mode", "L", "mu", "Delta", "epsilon", "n", "lambda1", "lambda2", "alpha", "eta", "d", "theta",
];

pub fn render_spec(spec: &HardInstanceSpec) -> String {
    let mut s = String::from("# hard NC-SC instance\n");
    let mut line = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    line("mode", spec.mode.as_str().to_string());
    line("L", format!("{:e}", spec.l));
    line("mu", format!("{:e}", spec.mu));
    line("Delta", format!("{:e}", spec.delta));
    line("epsilon", format!("{:e}", spec.epsilon));
    line("n", spec.n.to_string());
    line("lambda1", format!("{:e}", spec.lambda1));
    line("lambda2", format!("{:e}", spec.lambda2));
    line("alpha", format!("{:e}", spec.alpha));
    line("eta", format!("{:e}", spec.eta));
    line("d", spec.d.to_string());
    line("theta", format!("{:e}", spec.theta));
    s
}

pub fn parse_spec(text: &str) -> HarnessResult<HardInstanceSpec> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(HarnessError::Config(format!("line {}: unknown key `{k}`", i + 1)));
        }
        if map.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(HarnessError::Config(format!("line {}: duplicate key `{k}`", i + 1)));
        }
    }
    let get = |k: &str| {
        map.get(k)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::Config(format!("missing key `{k}`")))
    };
    let real = |k: &str| -> HarnessResult<f64> {
        get(k)?
            .parse()
            .map_err(|_| HarnessError::Config(format!("`{k}` is not a number")))
    };
    let int = |k: &str| -> HarnessResult<usize> {
        get(k)?
            .parse()
            .map_err(|_| HarnessError::Config(format!("`{k}` is not a nonnegative integer")))
    };
    let mode: InstanceMode = get("mode")?.parse()?;
    let spec = HardInstanceSpec {
        mode,
        l: real("L")?,
        mu: real("mu")?,
        delta: real("Delta")?,
        epsilon: real("epsilon")?,
        n: int("n")?,
        lambda1: real("lambda1")?,
        lambda2: real("lambda2")?,
        alpha: real("alpha")?,
        eta: real("eta")?,
        d: int("d")?,
        theta: real("theta")?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn write_spec(spec: &HardInstanceSpec, path: &Path) -> HarnessResult<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, render_spec(spec)).map_err(|e| HarnessError::io(path, e))
}

pub fn read_spec(path: &Path) -> HarnessResult<HardInstanceSpec> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_spec(&text).map_err(|e| match e {
        HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Short identifier used in CSV rows.
pub fn instance_id(spec: &HardInstanceSpec) -> String {
    format!("{}-k{}-n{}-d{}", spec.mode.as_str(), spec.kappa(), spec.n, spec.d)
}
