//! Free-format MPS problem files and plain-text solution files.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MilpError, MilpProblem, MilpSolution};

const OBJ_ROW: &str = "OBJ";

fn clean(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("_")
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `p` in free MPS format. Every column gets explicit bounds and
/// integer columns are wrapped in `INTORG`/`INTEND` markers.
pub fn write_mps(p: &MilpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", clean(if p.name.is_empty() { "problem" } else { &p.name }));
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    let row_names: Vec<String> = p.rows.iter().map(|r| clean(&r.name)).collect();
    for (r, name) in p.rows.iter().zip(&row_names) {
        let kind = match (r.lower.is_finite(), r.upper.is_finite()) {
            (true, true) if r.lower == r.upper => "E",
            (true, _) => "G",
            (false, true) => "L",
            (false, false) => "N",
        };
        let _ = writeln!(out, " {kind}  {name}");
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_cols()];
    for (i, r) in p.rows.iter().enumerate() {
        for &(j, a) in &r.coefs {
            by_col[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for j in 0..p.num_cols() {
        if p.integer[j] != in_int {
            let tag = if p.integer[j] { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{markers} 'MARKER' '{tag}'");
            markers += 1;
            in_int = p.integer[j];
        }
        let name = clean(&p.col_names[j]);
        if p.cost[j] != 0.0 || by_col[j].is_empty() {
            let _ = writeln!(out, "    {name} {OBJ_ROW} {}", num(p.cost[j]));
        }
        for &(i, a) in &by_col[j] {
            let _ = writeln!(out, "    {name} {} {}", row_names[i], num(a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{markers} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    if p.obj_offset != 0.0 {
        let _ = writeln!(out, "    RHS {OBJ_ROW} {}", num(-p.obj_offset));
    }
    for (r, name) in p.rows.iter().zip(&row_names) {
        let rhs = if r.lower.is_finite() { r.lower } else { r.upper };
        if rhs.is_finite() && rhs != 0.0 {
            let _ = writeln!(out, "    RHS {name} {}", num(rhs));
        }
    }
    let ranged: Vec<usize> = (0..p.num_rows())
        .filter(|&i| {
            let r = &p.rows[i];
            r.lower.is_finite() && r.upper.is_finite() && r.lower != r.upper
        })
        .collect();
    if !ranged.is_empty() {
        out.push_str("RANGES\n");
        for i in ranged {
            let r = &p.rows[i];
            let _ = writeln!(out, "    RNG {} {}", row_names[i], num(r.upper - r.lower));
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..p.num_cols() {
        let name = clean(&p.col_names[j]);
        let (l, u) = (p.col_lower[j], p.col_upper[j]);
        if l == u {
            let _ = writeln!(out, " FX BND {name} {}", num(l));
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(out, " FR BND {name}");
            continue;
        }
        if l == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI BND {name}");
        } else {
            let _ = writeln!(out, " LO BND {name} {}", num(l));
        }
        if u.is_finite() {
            let _ = writeln!(out, " UP BND {name} {}", num(u));
        } else {
            let _ = writeln!(out, " PL BND {name}");
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn parse_err(message: String) -> MilpError {
    MilpError::Parse { what: "MPS", message }
}

fn parse_num(tok: &str, line: usize) -> Result<f64, MilpError> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(format!("line {line}: bad number {tok:?}")))
}

/// Reads a free-format MPS file. Row families are not stored in MPS, so every
/// row of the result has family 0.
pub fn read_mps(text: &str) -> Result<MilpProblem, MilpError> {
    let mut p = MilpProblem::new("");
    let mut section = "";
    let mut obj_name = String::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_kind: Vec<char> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut explicit_bounds = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match toks[0] {
                "NAME" => {
                    p.name = toks.get(1).unwrap_or(&"").to_string();
                    "NAME"
                }
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "RANGES" => "RANGES",
                "BOUNDS" => "BOUNDS",
                "ENDATA" => break,
                other => return Err(parse_err(format!("line {line}: unsupported section {other}"))),
            };
            continue;
        }
        match section {
            "ROWS" => {
                let [kind, name] = toks[..] else {
                    return Err(parse_err(format!("line {line}: expected row type and name")));
                };
                let kind = kind.chars().next().unwrap_or(' ');
                if kind == 'N' && obj_name.is_empty() {
                    obj_name = name.to_string();
                    continue;
                }
                let (lo, hi) = match kind {
                    'E' => (0.0, 0.0),
                    'L' => (f64::NEG_INFINITY, 0.0),
                    'G' => (0.0, f64::INFINITY),
                    'N' => (f64::NEG_INFINITY, f64::INFINITY),
                    _ => return Err(parse_err(format!("line {line}: bad row type {kind}"))),
                };
                row_index.insert(name.to_string(), p.rows.len());
                row_kind.push(kind);
                p.add_row(name, 0, Vec::new(), lo, hi);
            }
            "COLUMNS" => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    in_int = match toks[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        t => return Err(parse_err(format!("line {line}: bad marker {t}"))),
                    };
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(parse_err(format!("line {line}: expected name and 1 or 2 entries")));
                }
                let j = match col_index.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        let (lo, hi) = (0.0, f64::INFINITY);
                        let j = p.add_col(toks[0], lo, hi, 0.0, in_int, 0);
                        col_index.insert(toks[0].to_string(), j);
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = parse_num(pair[1], line)?;
                    if pair[0] == obj_name {
                        p.cost[j] = v;
                    } else {
                        let &i = row_index
                            .get(pair[0])
                            .ok_or_else(|| parse_err(format!("line {line}: unknown row {}", pair[0])))?;
                        p.rows[i].coefs.push((j, v));
                    }
                }
            }
            "RHS" => {
                let entries = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in entries.chunks(2) {
                    if pair.len() != 2 {
                        return Err(parse_err(format!("line {line}: dangling RHS entry")));
                    }
                    let v = parse_num(pair[1], line)?;
                    if pair[0] == obj_name {
                        p.obj_offset = -v;
                        continue;
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| parse_err(format!("line {line}: unknown row {}", pair[0])))?;
                    let r = &mut p.rows[i];
                    match row_kind[i] {
                        'E' => {
                            r.lower = v;
                            r.upper = v;
                        }
                        'L' => r.upper = v,
                        'G' => r.lower = v,
                        _ => {}
                    }
                }
            }
            "RANGES" => {
                let entries = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in entries.chunks(2) {
                    let v = parse_num(pair[1], line)?;
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| parse_err(format!("line {line}: unknown row {}", pair[0])))?;
                    let r = &mut p.rows[i];
                    match row_kind[i] {
                        'L' => r.lower = r.upper - v.abs(),
                        'G' => r.upper = r.lower + v.abs(),
                        'E' if v >= 0.0 => r.upper = r.lower + v,
                        'E' => r.lower = r.upper + v,
                        _ => {}
                    }
                }
            }
            "BOUNDS" => {
                if toks.len() < 3 {
                    return Err(parse_err(format!("line {line}: short bound")));
                }
                let kind = toks[0];
                let &j = col_index
                    .get(toks[2])
                    .ok_or_else(|| parse_err(format!("line {line}: unknown column {}", toks[2])))?;
                let value = match toks.get(3) {
                    Some(t) => Some(parse_num(t, line)?),
                    None => None,
                };
                let need = |v: Option<f64>| v.ok_or_else(|| parse_err(format!("line {line}: bound needs a value")));
                explicit_bounds.push(j);
                match kind {
                    "UP" => p.col_upper[j] = need(value)?,
                    "LO" => p.col_lower[j] = need(value)?,
                    "FX" => {
                        let v = need(value)?;
                        p.col_lower[j] = v;
                        p.col_upper[j] = v;
                    }
                    "FR" => {
                        p.col_lower[j] = f64::NEG_INFINITY;
                        p.col_upper[j] = f64::INFINITY;
                    }
                    "MI" => p.col_lower[j] = f64::NEG_INFINITY,
                    "PL" => p.col_upper[j] = f64::INFINITY,
                    "BV" => {
                        p.col_lower[j] = 0.0;
                        p.col_upper[j] = 1.0;
                        p.integer[j] = true;
                    }
                    other => return Err(parse_err(format!("line {line}: unsupported bound type {other}"))),
                }
            }
            _ => return Err(parse_err(format!("line {line}: data outside a section"))),
        }
    }
    // integer columns without explicit bounds are binary
    explicit_bounds.sort_unstable();
    for j in 0..p.num_cols() {
        if p.integer[j] && explicit_bounds.binary_search(&j).is_err() {
            p.col_upper[j] = 1.0;
        }
    }
    p.col_family = vec![0; p.num_cols()];
    p.validate()?;
    Ok(p)
}

/// Solution file: comment lines with status and objective, then one
/// `name value` pair per column.
pub fn write_solution(p: &MilpProblem, sol: &MilpSolution) -> String {
    let mut out = String::new();
    let status = serde_json::to_value(sol.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let _ = writeln!(out, "# status {status}");
    let _ = writeln!(out, "# objective {}", num(sol.objective));
    if let Some(x) = &sol.x {
        for (name, v) in p.col_names.iter().zip(x) {
            let _ = writeln!(out, "{} {}", clean(name), num(*v));
        }
    }
    out
}

/// Reads `name value` pairs into a column vector for `p`. Lines starting
/// with `#` are ignored; every column must appear exactly once.
pub fn read_solution(p: &MilpProblem, text: &str) -> Result<Vec<f64>, MilpError> {
    let err = |message: String| MilpError::Parse { what: "solution", message };
    let index: HashMap<String, usize> = p
        .col_names
        .iter()
        .enumerate()
        .map(|(j, n)| (clean(n), j))
        .collect();
    let mut x = vec![f64::NAN; p.num_cols()];
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = toks[..] else {
            return Err(err(format!("line {}: expected name and value", ln + 1)));
        };
        let &j = index
            .get(name)
            .ok_or_else(|| err(format!("line {}: unknown column {name}", ln + 1)))?;
        if !x[j].is_nan() {
            return Err(err(format!("line {}: duplicate column {name}", ln + 1)));
        }
        x[j] = value
            .parse()
            .map_err(|_| err(format!("line {}: bad value {value:?}", ln + 1)))?;
    }
    if let Some(j) = x.iter().position(|v| v.is_nan()) {
        return Err(err(format!("missing column {}", p.col_names[j])));
    }
    Ok(x)
}
