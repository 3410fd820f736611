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

//! File formats: aggregate CSV tables with `#` comment headers carrying the
//! full configuration and master seed, plus line-delimited JSON records.
//! Floats are printed in shortest round-trip form, so outputs are
//! byte-stable and parse back exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::ensemble::EnsembleCurve;
use crate::error::{Error, Result};
use crate::scaling::{TauCell, TauTable};

fn parse_headers(text: &str) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            continue;
        };
        if let Some((k, v)) = rest.split_once(' ') {
            map.insert(k.to_string(), v.trim().to_string());
        }
    }
    map
}

fn header_field<T: std::str::FromStr>(
    headers: &BTreeMap<String, String>,
    key: &str,
) -> Result<T> {
    headers
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing header '# {key}'")))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("malformed header '# {key}'")))
}

// ------------------------------------------------------------ curve tables

/// Writes an ensemble curve as `t,mean,stderr` with a config header.
pub fn curve_to_csv(curve: &EnsembleCurve) -> String {
    let mut s = String::new();
    s.push_str("# format ensemble-curve v1\n");
    s.push_str(&format!("# L {}\n", curve.l));
    s.push_str(&format!("# p {}\n", curve.p));
    s.push_str(&format!("# px {}\n", curve.p_x));
    s.push_str(&format!("# circuits {}\n", curve.n_circuits));
    s.push_str(&format!("# horizon_mult {}\n", curve.horizon_mult));
    s.push_str(&format!("# seed {}\n", curve.master_seed));
    s.push_str("t,mean,stderr\n");
    for (t, (m, e)) in curve.mean.iter().zip(&curve.stderr).enumerate() {
        s.push_str(&format!("{t},{m},{e}\n"));
    }
    s
}

pub fn curve_from_csv(text: &str) -> Result<EnsembleCurve> {
    let headers = parse_headers(text);
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('t') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("bad curve row '{line}'")));
        }
        mean.push(
            cols[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad mean in '{line}'")))?,
        );
        stderr.push(
            cols[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad stderr in '{line}'")))?,
        );
    }
    if mean.is_empty() {
        return Err(Error::Parse("curve has no data rows".into()));
    }
    Ok(EnsembleCurve {
        l: header_field(&headers, "L")?,
        p: header_field(&headers, "p")?,
        p_x: header_field(&headers, "px")?,
        n_circuits: header_field(&headers, "circuits")?,
        horizon_mult: header_field(&headers, "horizon_mult")?,
        master_seed: header_field(&headers, "seed")?,
        mean,
        stderr,
    })
}

// -------------------------------------------------------------- tau tables

/// τ-table CSV: `L,px,tau,tau_err,r2,n_circuits,window_start,window_end`,
/// failed cells recorded as trailing comments.
pub fn tau_table_to_csv(table: &TauTable) -> String {
    let mut s = String::new();
    s.push_str("# format tau-table v1\n");
    s.push_str(&format!("# p {}\n", table.p));
    s.push_str(&format!("# seed {}\n", table.master_seed));
    s.push_str(&format!("# circuits_per_cell {}\n", table.circuits_per_cell));
    s.push_str(&format!("# horizon_mult {}\n", table.horizon_mult));
    s.push_str(&format!("# bootstrap {}\n", table.bootstrap_resamples));
    s.push_str("L,px,tau,tau_err,r2,n_circuits,window_start,window_end\n");
    for cell in &table.cells {
        if let (Some(tau), Some(r2), Some((w0, w1))) = (cell.tau, cell.r2, cell.window) {
            let err = cell
                .tau_err
                .map_or_else(|| "nan".to_string(), |e| format!("{e}"));
            s.push_str(&format!(
                "{},{},{tau},{err},{r2},{},{w0},{w1}\n",
                cell.l, cell.p_x, cell.n_circuits
            ));
        }
    }
    for cell in &table.cells {
        if let Some(err) = &cell.error {
            s.push_str(&format!("# failed L {} px {} : {err}\n", cell.l, cell.p_x));
        }
    }
    s
}

pub fn tau_table_from_csv(text: &str) -> Result<TauTable> {
    let headers = parse_headers(text);
    let mut cells = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('L') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(Error::Parse(format!("bad tau row '{line}'")));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad float '{s}'")))
        };
        let tau_err = parse_f(cols[3])?;
        cells.push(TauCell {
            l: cols[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad L '{}'", cols[0])))?,
            p_x: parse_f(cols[1])?,
            tau: Some(parse_f(cols[2])?),
            tau_err: if tau_err.is_nan() { None } else { Some(tau_err) },
            r2: Some(parse_f(cols[4])?),
            n_circuits: cols[5]
                .parse()
                .map_err(|_| Error::Parse(format!("bad count '{}'", cols[5])))?,
            window: Some((
                cols[6]
                    .parse()
                    .map_err(|_| Error::Parse("bad window".into()))?,
                cols[7]
                    .parse()
                    .map_err(|_| Error::Parse("bad window".into()))?,
            )),
            error: None,
        });
    }
    if cells.is_empty() {
        return Err(Error::Parse("tau table has no data rows".into()));
    }
    Ok(TauTable {
        p: header_field(&headers, "p")?,
        master_seed: header_field(&headers, "seed")?,
        circuits_per_cell: header_field(&headers, "circuits_per_cell")?,
        horizon_mult: header_field(&headers, "horizon_mult")?,
        bootstrap_resamples: header_field(&headers, "bootstrap")?,
        cells,
    })
}

// ---------------------------------------------------------------- collapse

/// Collapse CSV: rescaled `x,y,L` points plus the parameters used.
pub fn collapse_to_csv(
    points: &[(f64, f64, usize)],
    p_xc: f64,
    z: f64,
    nu: f64,
    cost: f64,
) -> String {
    let mut s = String::new();
    s.push_str("# format collapse v1\n");
    s.push_str(&format!("# pxc {p_xc}\n"));
    s.push_str(&format!("# z {z}\n"));
    s.push_str(&format!("# nu {nu}\n"));
    s.push_str(&format!("# cost {cost}\n"));
    s.push_str("x,y,L\n");
    for &(x, y, l) in points {
        s.push_str(&format!("{x},{y},{l}\n"));
    }
    s
}

// ------------------------------------------------------------------- files

/// Writes a file atomically-ish (truncate + write + flush).
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Serializes records as line-delimited JSON.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(
            &serde_json::to_string(r)
                .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?,
        );
        s.push('\n');
    }
    Ok(s)
}
