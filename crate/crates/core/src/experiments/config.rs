//! Experiment configuration from a flat `key = value` file plus overrides.
//!
//! ```text
//! # comment
//! h = 0.02
//! dt = 0.005
//! rho = 1, 0.0000589
//! ```
//!
//! Later sources win: file values are applied first, then each override in
//! order. A repeated `rho` override replaces the file's list on its first
//! occurrence and appends afterwards.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fitting::Grid;
use crate::solver::ProblemSpec;
use crate::spline_basis::EvalPath;

pub const KEYS: &[&str] = &[
    "a",
    "b",
    "nodes",
    "h",
    "dt",
    "rho",
    "speed",
    "t_final",
    "observe_every",
    "out",
    "kind",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Single,
    Table1,
    Table2,
    RhoSweep,
    Limits,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "run" => Ok(ExperimentKind::Single),
            "table1" => Ok(ExperimentKind::Table1),
            "table2" => Ok(ExperimentKind::Table2),
            "rho-sweep" | "rho_sweep" => Ok(ExperimentKind::RhoSweep),
            "limits" => Ok(ExperimentKind::Limits),
            other => Err(config_err("kind", format!("unknown experiment kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub a: f64,
    pub b: f64,
    pub elements: usize,
    pub h: f64,
    pub dt: f64,
    pub rho: Vec<f64>,
    pub speed: f64,
    pub t_final: f64,
    pub observe_every: usize,
    pub out: PathBuf,
    pub kind: ExperimentKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            a: -30.0,
            b: 30.0,
            elements: 3000,
            h: 0.02,
            dt: 0.005,
            rho: vec![1.0],
            speed: 0.5,
            t_final: 30.0,
            observe_every: 100,
            out: PathBuf::from("out"),
            kind: ExperimentKind::Single,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.a, self.b, self.elements)
    }

    pub fn spec_for(&self, rho: f64) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            grid: self.grid()?,
            dt: self.dt,
            rho,
            wave_speed: self.speed,
            t_final: self.t_final,
        })
    }

    /// Evaluation branch each tension in the config will use.
    pub fn eval_paths(&self) -> Vec<EvalPath> {
        self.rho
            .iter()
            .map(|&r| EvalPath::for_tension(r * self.h))
            .collect()
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(
                line,
                format!("line {}: expected `key = value`", lineno + 1),
            ));
        };
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(&key, "unknown key"));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(key, format!("cannot parse `{value}` as a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| config_err(key, format!("cannot parse `{value}` as a count")))
}

#[derive(Default)]
struct Partial {
    a: Option<f64>,
    b: Option<f64>,
    nodes: Option<usize>,
    h: Option<f64>,
    dt: Option<f64>,
    rho: Option<Vec<f64>>,
    speed: Option<f64>,
    t_final: Option<f64>,
    observe_every: Option<usize>,
    out: Option<PathBuf>,
    kind: Option<ExperimentKind>,
}

impl Partial {
    fn apply(&mut self, key: &str, value: &str, append_rho: bool) -> Result<()> {
        match key {
            "a" => self.a = Some(parse_f64(key, value)?),
            "b" => self.b = Some(parse_f64(key, value)?),
            "nodes" => self.nodes = Some(parse_usize(key, value)?),
            "h" => self.h = Some(parse_f64(key, value)?),
            "dt" => self.dt = Some(parse_f64(key, value)?),
            "rho" => {
                let mut list = Vec::new();
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    list.push(parse_f64(key, item)?);
                }
                if list.is_empty() {
                    return Err(config_err(key, "empty tension list"));
                }
                match (&mut self.rho, append_rho) {
                    (Some(existing), true) => existing.extend(list),
                    _ => self.rho = Some(list),
                }
            }
            "speed" => self.speed = Some(parse_f64(key, value)?),
            "t_final" => self.t_final = Some(parse_f64(key, value)?),
            "observe_every" => self.observe_every = Some(parse_usize(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "kind" => self.kind = Some(value.parse()?),
            other => return Err(config_err(other, "unknown key")),
        }
        Ok(())
    }
}

/// Builds a config from optional file text and ordered overrides.
pub fn parse_config(file: Option<&str>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut p = Partial::default();
    if let Some(text) = file {
        for (k, v) in parse_pairs(text)? {
            p.apply(&k, &v, false)?;
        }
    }
    let mut rho_overridden = false;
    for (k, v) in overrides {
        let key = k.trim_start_matches('-').replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(&key, "unknown key"));
        }
        let append = key == "rho" && rho_overridden;
        p.apply(&key, v, append)?;
        rho_overridden |= key == "rho";
    }
    finish(p)
}

const MAX_ELEMENTS: usize = 100_000_000;

fn finish(p: Partial) -> Result<ExperimentConfig> {
    let d = ExperimentConfig::default();
    let a = p.a.unwrap_or(d.a);
    let b = p.b.unwrap_or(d.b);
    if !a.is_finite() || !b.is_finite() || b <= a {
        return Err(config_err("b", format!("domain [{a}, {b}] is empty or not finite")));
    }
    let len = b - a;
    let (elements, h) = match (p.nodes, p.h) {
        (Some(n), Some(h)) => {
            if !(h > 0.0) || ((len / n.max(1) as f64) - h).abs() > 1e-9 * h {
                return Err(config_err(
                    "h",
                    format!("h = {h} is inconsistent with nodes = {n} on [{a}, {b}]"),
                ));
            }
            (n, h)
        }
        (Some(n), None) => (n, len / n.max(1) as f64),
        (None, h) => {
            let h = h.unwrap_or(d.h);
            if !h.is_finite() || h <= 0.0 {
                return Err(config_err("h", format!("must be finite and positive, got {h}")));
            }
            let count = len / h;
            let rounded = count.round();
            if !(rounded >= 1.0) || (count - rounded).abs() > 1e-9 * rounded || rounded > MAX_ELEMENTS as f64 {
                return Err(config_err("h", format!("{h} does not divide [{a}, {b}] evenly")));
            }
            (rounded as usize, len / rounded)
        }
    };
    if elements > MAX_ELEMENTS {
        return Err(config_err("nodes", format!("at most {MAX_ELEMENTS} elements, got {elements}")));
    }
    if elements < Grid::MIN_ELEMENTS {
        return Err(config_err(
            "nodes",
            format!("need at least {} elements, got {elements}", Grid::MIN_ELEMENTS),
        ));
    }
    let dt = p.dt.unwrap_or(d.dt);
    if !dt.is_finite() || dt <= 0.0 {
        return Err(config_err("dt", format!("must be finite and positive, got {dt}")));
    }
    let rho = p.rho.unwrap_or(d.rho);
    if let Some(bad) = rho.iter().find(|r| !r.is_finite() || **r <= 0.0) {
        return Err(config_err("rho", format!("must be finite and positive, got {bad}")));
    }
    let speed = p.speed.unwrap_or(d.speed);
    if !speed.is_finite() || speed.abs() >= 1.0 {
        return Err(config_err("speed", format!("need |c| < 1, got {speed}")));
    }
    let t_final = p.t_final.unwrap_or(d.t_final);
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(config_err("t_final", format!("must be non-negative, got {t_final}")));
    }
    let steps = t_final / dt;
    if (steps - steps.round()).abs() > 1e-9 * steps.round().max(1.0) {
        return Err(config_err(
            "t_final",
            format!("{t_final} is not a whole number of steps of {dt}"),
        ));
    }
    let observe_every = p.observe_every.unwrap_or(d.observe_every);
    if observe_every == 0 {
        return Err(config_err("observe_every", "must be at least 1"));
    }
    Ok(ExperimentConfig {
        a,
        b,
        elements,
        h,
        dt,
        rho,
        speed,
        t_final,
        observe_every,
        out: p.out.unwrap_or(d.out),
        kind: p.kind.unwrap_or(d.kind),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn empty_input_gives_headline_run() {
        let c = parse_config(None, &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.h, c.dt, c.speed, c.rho.clone()), (0.02, 0.005, 0.5, vec![1.0]));
        assert_eq!((c.a, c.b, c.t_final, c.elements), (-30.0, 30.0, 30.0, 3000));
    }

    #[test]
    fn zero_dt_names_the_key() {
        match parse_config(None, &ov(&[("dt", "0")])) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tiny_tension_selects_series() {
        let c = parse_config(None, &ov(&[("rho", "1e-6"), ("h", "0.02")])).unwrap();
        assert_eq!(c.eval_paths(), vec![EvalPath::Series]);
    }

    #[test]
    fn flags_override_file() {
        let file = "# headline\nh = 0.1\ndt = 0.02 # inline\nrho = 1, 2\nt-final = 10\n";
        let c = parse_config(Some(file), &ov(&[("--dt", "0.01"), ("rho", "3"), ("rho", "4")]))
            .unwrap();
        assert_eq!(c.h, 0.1);
        assert_eq!(c.elements, 600);
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.rho, vec![3.0, 4.0]);
        let c = parse_config(Some(file), &[]).unwrap();
        assert_eq!(c.rho, vec![1.0, 2.0]);
    }

    #[test]
    fn error_keys() {
        let key_of = |file: Option<&str>, o: &[(&str, &str)]| match parse_config(file, &ov(o)) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key_of(Some("bogus = 1"), &[]), "bogus");
        assert_eq!(key_of(Some("h 0.1"), &[]), "h 0.1");
        assert_eq!(key_of(None, &[("speed", "fast")]), "speed");
        assert_eq!(key_of(None, &[("speed", "1.0")]), "speed");
        assert_eq!(key_of(None, &[("h", "0.07")]), "h");
        assert_eq!(key_of(None, &[("nodes", "100"), ("h", "0.5")]), "h");
        assert_eq!(key_of(None, &[("t_final", "0.0013")]), "t_final");
        assert_eq!(key_of(None, &[("rho", "-1")]), "rho");
        assert_eq!(key_of(None, &[("rho", " , ")]), "rho");
        assert_eq!(key_of(None, &[("kind", "movie")]), "kind");
        assert_eq!(key_of(None, &[("observe_every", "0")]), "observe_every");
        assert_eq!(key_of(None, &[("nodes", "2")]), "nodes");
        assert_eq!(key_of(None, &[("a", "40")]), "b");
    }

    #[test]
    fn nodes_and_h_together() {
        let c = parse_config(None, &ov(&[("nodes", "600"), ("h", "0.1")])).unwrap();
        assert_eq!(c.elements, 600);
        let c = parse_config(None, &ov(&[("nodes", "300")])).unwrap();
        assert_eq!(c.h, 0.2);
    }
}
