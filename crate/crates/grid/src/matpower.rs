//! Reader for the numeric subset of MATPOWER version-2 case files.
//!
//! Only `mpc.baseMVA` and the `bus`, `gen`, `branch` and `gencost` matrices
//! are read; everything else (cell arrays, extra fields) is skipped.
//! Columns used (1-based, as in the MATPOWER manual):
//!
//! | matrix  | columns                                             |
//! |---------|-----------------------------------------------------|
//! | bus     | 1 id, 2 type (4 = isolated, dropped), 3 Pd          |
//! | gen     | 1 bus, 8 status, 9 Pmax, 10 Pmin                    |
//! | branch  | 1 from, 2 to, 4 x, 6 rateA (0 = unlimited), 11 status |
//! | gencost | 1 model (2 = polynomial), 4 n, 5.. coefficients     |
//!
//! Rows with status 0 are dropped, along with the cost rows of dropped
//! generators. Loads and limits stay in MW; susceptances are `1/x` per unit.

use std::collections::HashMap;

use crate::network::{Branch, Bus, Generator, Network, PolynomialCost};
use crate::{GridError, Result};

type Matrix = Vec<Vec<f64>>;

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Scalar assignment `mpc.<name> = <value>;`.
fn scalar(text: &str, name: &str) -> Result<f64> {
    let key = format!("mpc.{name}");
    for line in text.lines().map(strip_comment) {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix(&key) {
            let rest = rest.trim_start();
            if let Some(v) = rest.strip_prefix('=') {
                let v = v.trim().trim_end_matches(';').trim();
                return v
                    .parse()
                    .map_err(|_| GridError::Malformed(format!("{key} = {v}")));
            }
        }
    }
    Err(GridError::Malformed(format!("missing {key}")))
}

/// Matrix assignment `mpc.<name> = [ ... ];`.
fn matrix(text: &str, name: &str) -> Result<Option<Matrix>> {
    let key = format!("mpc.{name}");
    let mut lines = text.lines().map(strip_comment);
    let mut body = String::new();
    let mut found = false;
    for line in lines.by_ref() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix(&key) {
            let rest = rest.trim_start();
            if let Some(rest) = rest.strip_prefix('=') {
                let rest = rest.trim_start();
                let Some(rest) = rest.strip_prefix('[') else {
                    return Err(GridError::Malformed(format!("{key} is not a matrix")));
                };
                found = true;
                if let Some(end) = rest.find(']') {
                    body.push_str(&rest[..end]);
                    return parse_rows(&body, &key).map(Some);
                }
                body.push_str(rest);
                body.push('\n');
                break;
            }
        }
    }
    if !found {
        return Ok(None);
    }
    for line in lines {
        if let Some(end) = line.find(']') {
            body.push_str(&line[..end]);
            return parse_rows(&body, &key).map(Some);
        }
        body.push_str(line);
        body.push('\n');
    }
    Err(GridError::Malformed(format!("{key}: missing closing bracket")))
}

fn parse_rows(body: &str, key: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for chunk in body.split(['\n', ';']) {
        let fields: Vec<&str> = chunk
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        let row = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| GridError::Malformed(format!("{key}: bad number {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if let Some(first) = rows.first() {
        let w = first.len();
        if let Some(i) = rows.iter().position(|r| r.len() != w) {
            return Err(GridError::Malformed(format!(
                "{key}: row {} has {} columns, expected {w}",
                i + 1,
                rows[i].len()
            )));
        }
    }
    Ok(rows)
}

fn col(row: &[f64], c: usize, key: &str) -> Result<f64> {
    row.get(c - 1)
        .copied()
        .ok_or_else(|| GridError::Malformed(format!("{key}: missing column {c}")))
}

fn required(text: &str, name: &str) -> Result<Matrix> {
    matrix(text, name)?.ok_or_else(|| GridError::Malformed(format!("missing mpc.{name}")))
}

/// Parses the case text into a validated [`Network`].
pub fn parse_case(text: &str) -> Result<Network> {
    let base_mva = scalar(text, "baseMVA")?;
    let bus_m = required(text, "bus")?;
    let gen_m = required(text, "gen")?;
    let branch_m = required(text, "branch")?;
    let cost_m = required(text, "gencost")?;

    let mut buses = Vec::new();
    let mut index: HashMap<i64, usize> = HashMap::new();
    for row in &bus_m {
        let id = col(row, 1, "bus")? as i64;
        if col(row, 2, "bus")? as i64 == 4 {
            continue;
        }
        if index.insert(id, buses.len()).is_some() {
            return Err(GridError::Malformed(format!("duplicate bus id {id}")));
        }
        buses.push(Bus {
            id,
            load_mw: col(row, 3, "bus")?,
        });
    }
    let lookup = |id: i64, what: &str| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| GridError::Malformed(format!("{what} references unknown bus {id}")))
    };

    if cost_m.len() < gen_m.len() {
        return Err(GridError::Malformed(format!(
            "gencost has {} rows for {} generators",
            cost_m.len(),
            gen_m.len()
        )));
    }
    let mut generators = Vec::new();
    for (k, (row, cost)) in gen_m.iter().zip(&cost_m).enumerate() {
        if col(row, 8, "gen")? <= 0.0 {
            continue;
        }
        let bus_id = col(row, 1, "gen")? as i64;
        generators.push(Generator {
            bus: lookup(bus_id, "gen")?,
            pmax_mw: col(row, 9, "gen")?,
            pmin_mw: col(row, 10, "gen")?,
            cost: polynomial(cost, k)?,
        });
    }

    let mut branches = Vec::new();
    for (k, row) in branch_m.iter().enumerate() {
        if col(row, 11, "branch")? <= 0.0 {
            continue;
        }
        let (f, t) = (col(row, 1, "branch")? as i64, col(row, 2, "branch")? as i64);
        let x = col(row, 4, "branch")?;
        if x == 0.0 {
            return Err(GridError::ZeroReactance {
                index: k,
                from: f,
                to: t,
            });
        }
        let rate = col(row, 6, "branch")?;
        branches.push(Branch {
            from: lookup(f, "branch")?,
            to: lookup(t, "branch")?,
            susceptance: 1.0 / x,
            rate_mw: (rate > 0.0).then_some(rate),
        });
    }

    let net = Network {
        base_mva,
        buses,
        branches,
        generators,
    };
    net.validate()?;
    Ok(net)
}

fn polynomial(row: &[f64], index: usize) -> Result<PolynomialCost> {
    let model = col(row, 1, "gencost")? as i64;
    let n = col(row, 4, "gencost")? as usize;
    if model != 2 || n > 3 {
        return Err(GridError::UnknownCostModel { index, model });
    }
    let mut c = [0.0; 3]; // c2, c1, c0
    for k in 0..n {
        c[3 - n + k] = col(row, 5 + k, "gencost")?;
    }
    Ok(PolynomialCost {
        c2: c[0],
        c1: c[1],
        c0: c[2],
    })
}
