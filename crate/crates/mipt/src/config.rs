// Copyright 2026 The mipt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Run configuration: defaults, key-value config files, and command-line
//! overrides, with precedence CLI > file > defaults. All numeric ranges are
//! validated before any work starts.

use std::path::PathBuf;

use crate::error::{Error, Result};

/// Simulation backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Stabilizer,
    Statevector,
}

impl Backend {
    pub fn parse(s: &str) -> Result<Backend> {
        match s {
            "stabilizer" => Ok(Backend::Stabilizer),
            "statevector" => Ok(Backend::Statevector),
            other => Err(Error::InvalidConfig(format!(
                "unknown backend '{other}' (expected stabilizer or statevector)"
            ))),
        }
    }
}

/// Partially specified configuration; later layers overlay earlier ones.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub l: Option<Vec<usize>>,
    pub p: Option<f64>,
    pub px: Option<Vec<f64>>,
    pub circuits: Option<usize>,
    pub seed: Option<u64>,
    pub backend: Option<Backend>,
    pub noise_epsilon: Option<f64>,
    pub dephasing: Option<f64>,
    pub shots: Option<usize>,
    pub horizon_mult: Option<usize>,
    pub threshold: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    /// Overlays `over` on top of `self` (fields set in `over` win).
    pub fn overlay(mut self, over: PartialConfig) -> PartialConfig {
        macro_rules! take {
            ($f:ident) => {
                if over.$f.is_some() {
                    self.$f = over.$f;
                }
            };
        }
        take!(l);
        take!(p);
        take!(px);
        take!(circuits);
        take!(seed);
        take!(backend);
        take!(noise_epsilon);
        take!(dephasing);
        take!(shots);
        take!(horizon_mult);
        take!(threshold);
        take!(threads);
        take!(out);
        self
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, what: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} value '{t}'")))
        })
        .collect()
}

/// Parses the simple key-value config file format: one `key value` or
/// `key = value` per line, `#` comments. Keys match the long CLI flags.
pub fn parse_config_file(text: &str) -> Result<PartialConfig> {
    let mut cfg = PartialConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => line
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("config line {}: missing value", lineno + 1))
                })?,
        };
        let bad = |what: &str| Error::InvalidConfig(format!("config line {}: bad {what}", lineno + 1));
        match key {
            "L" | "l" => cfg.l = Some(parse_list(value, "L")?),
            "p" => cfg.p = Some(value.parse().map_err(|_| bad("p"))?),
            "px" => cfg.px = Some(parse_list(value, "px")?),
            "circuits" => cfg.circuits = Some(value.parse().map_err(|_| bad("circuits"))?),
            "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "backend" => cfg.backend = Some(Backend::parse(value)?),
            "noise-epsilon" | "noise_epsilon" => {
                cfg.noise_epsilon = Some(value.parse().map_err(|_| bad("noise-epsilon"))?)
            }
            "dephasing" => cfg.dephasing = Some(value.parse().map_err(|_| bad("dephasing"))?),
            "shots" => cfg.shots = Some(value.parse().map_err(|_| bad("shots"))?),
            "horizon-mult" | "horizon_mult" => {
                cfg.horizon_mult = Some(value.parse().map_err(|_| bad("horizon-mult"))?)
            }
            "threshold" => cfg.threshold = Some(value.parse().map_err(|_| bad("threshold"))?),
            "threads" => cfg.threads = Some(value.parse().map_err(|_| bad("threads"))?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "config line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(cfg)
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub l_list: Vec<usize>,
    pub p: f64,
    pub px_list: Vec<f64>,
    pub circuits: usize,
    pub seed: u64,
    pub backend: Option<Backend>,
    pub noise_epsilon: f64,
    pub dephasing: f64,
    pub shots: usize,
    pub horizon_mult: usize,
    pub threshold: f64,
    /// 0 = library default thread count.
    pub threads: usize,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_partial(p: PartialConfig) -> Result<RunConfig> {
        let cfg = RunConfig {
            l_list: p.l.unwrap_or_else(|| vec![8]),
            p: p.p.unwrap_or(0.15),
            px_list: p.px.unwrap_or_else(|| vec![0.5]),
            circuits: p.circuits.unwrap_or(300),
            seed: p.seed.unwrap_or(1),
            backend: p.backend,
            noise_epsilon: p.noise_epsilon.unwrap_or(0.03),
            dephasing: p.dephasing.unwrap_or(0.0),
            shots: p.shots.unwrap_or(1000),
            horizon_mult: p.horizon_mult.unwrap_or(1),
            threshold: p.threshold.unwrap_or(0.93),
            threads: p.threads.unwrap_or(0),
            out: p.out.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_list.is_empty() {
            return Err(Error::InvalidConfig("L list is empty".into()));
        }
        for &l in &self.l_list {
            if l < 2 {
                return Err(Error::InvalidConfig(format!("L = {l} must be at least 2")));
            }
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("p = {} outside [0, 1]", self.p)));
        }
        if self.px_list.is_empty() {
            return Err(Error::InvalidConfig("px list is empty".into()));
        }
        for &px in &self.px_list {
            if !(0.0..=1.0).contains(&px) {
                return Err(Error::InvalidConfig(format!("px = {px} outside [0, 1]")));
            }
        }
        if self.noise_epsilon < 0.0 {
            return Err(Error::InvalidConfig(
                "noise-epsilon must be non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dephasing) {
            return Err(Error::InvalidConfig("dephasing outside [0, 1]".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.horizon_mult == 0 {
            return Err(Error::InvalidConfig("horizon-mult must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig("threshold outside [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing_and_precedence() {
        let file = parse_config_file(
            "L = 4,6\np 0.2\nseed = 9\nout runs/demo # trailing comment\n# full comment\n",
        )
        .unwrap();
        assert_eq!(file.l, Some(vec![4, 6]));
        assert_eq!(file.p, Some(0.2));
        assert_eq!(file.out, Some(PathBuf::from("runs/demo")));

        let cli = PartialConfig {
            p: Some(0.15),
            ..Default::default()
        };
        let merged = file.overlay(cli);
        let cfg = RunConfig::from_partial(merged).unwrap();
        assert_eq!(cfg.p, 0.15, "CLI wins over file");
        assert_eq!(cfg.l_list, vec![4, 6], "file wins over defaults");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.threshold, 0.93, "default");
    }

    #[test]
    fn config_round_trip_defaults() {
        let cfg = RunConfig::from_partial(PartialConfig::default()).unwrap();
        assert_eq!(cfg.l_list, vec![8]);
        assert_eq!(cfg.p, 0.15);
        assert_eq!(cfg.shots, 1000);
        assert_eq!(cfg.noise_epsilon, 0.03);
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mk = |f: &dyn Fn(&mut PartialConfig)| {
            let mut p = PartialConfig::default();
            f(&mut p);
            RunConfig::from_partial(p)
        };
        assert!(mk(&|p| p.p = Some(1.5)).is_err());
        assert!(mk(&|p| p.l = Some(vec![1])).is_err());
        assert!(mk(&|p| p.px = Some(vec![0.5, -0.1])).is_err());
        assert!(mk(&|p| p.shots = Some(0)).is_err());
        assert!(mk(&|p| p.dephasing = Some(2.0)).is_err());
        assert!(mk(&|p| p.threshold = Some(1.5)).is_err());
        assert!(mk(&|p| p.horizon_mult = Some(0)).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config_file("bogus = 1\n").is_err());
        assert!(parse_config_file("backend = quantum\n").is_err());
    }
}
