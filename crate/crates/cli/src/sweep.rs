//! Parameter lists for `bounds`: `1,2,4`, inclusive ranges `1:10` and
//! stepped ranges `0.9:0.99:0.01`, freely mixed.

use atfe::bounds::{BoundKind, BoundParams, BoundQuery};
use atfe::harness::Table;

use crate::error::CliError;

pub fn parse_values(name: &str, list: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("--{}: {what} in '{list}'", name.replace('_', "-")));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{}' is not a number", s.trim())));
    let mut out = Vec::new();
    for item in list.split(',') {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b] | [a, b, _] => {
                let (a, b) = (num(a)?, num(b)?);
                let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
                if !(step > 0.0) || b < a {
                    return Err(bad("empty range"));
                }
                let count = ((b - a) / step + 1e-9).floor() as u64;
                if count > 1_000_000 {
                    return Err(bad("range too long"));
                }
                out.extend((0..=count).map(|k| a + k as f64 * step));
            }
            _ => return Err(bad("malformed range")),
        }
    }
    Ok(out)
}

fn set(params: &mut BoundParams, name: &str, v: f64) {
    let slot = match name {
        "nu" => &mut params.nu,
        "n" => &mut params.n,
        "t" => &mut params.t,
        "total_time" => &mut params.total_time,
        "delta_omega" => &mut params.delta_omega,
        "confidence" => &mut params.confidence,
        "s" => &mut params.s,
        _ => unreachable!("unknown bound parameter {name}"),
    };
    *slot = Some(v);
}

/// Evaluates `kind` on the Cartesian product of the given value lists.
///
/// The CSV has one column per supplied parameter, in the kind's own order
/// with `delta_omega` last when it is an optional scale, then `value` and
/// the companion figure if the formula has one.
pub fn sweep(kind: BoundKind, supplied: &[(&'static str, Vec<f64>)]) -> Result<Table, CliError> {
    let wanted = kind.parameters();
    for name in wanted {
        if !supplied.iter().any(|(n, _)| n == name) {
            return Err(CliError::Usage(format!("{name} required")));
        }
    }
    let mut columns: Vec<&(&'static str, Vec<f64>)> =
        wanted.iter().map(|w| supplied.iter().find(|(n, _)| n == w).expect("checked")).collect();
    if let Some(d) = supplied.iter().find(|(n, _)| *n == "delta_omega") {
        if !wanted.contains(&"delta_omega") {
            columns.push(d);
        }
    }
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for (_, values) in &columns {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect();
    }
    let mut header: Vec<String> = columns.iter().map(|(n, _)| n.to_string()).collect();
    header.push("value".into());
    let mut rows = Vec::with_capacity(combos.len());
    let mut companion = None;
    for combo in combos {
        let mut params = BoundParams::default();
        for ((name, _), &v) in columns.iter().zip(&combo) {
            set(&mut params, name, v);
        }
        let result = BoundQuery::new(kind, params).evaluate()?;
        let mut row = combo;
        row.push(result.value);
        if let Some((name, v)) = result.companion {
            companion = Some(name);
            row.push(v);
        }
        rows.push(row);
    }
    if let Some(name) = companion {
        header.push(name.into());
    }
    let mut table = Table::new(header);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}
