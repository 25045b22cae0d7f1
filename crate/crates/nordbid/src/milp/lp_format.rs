//! CPLEX-style LP text format: writer and parser.
//!
//! The writer is canonical (deterministic term order, shortest-roundtrip
//! number formatting), so export -> parse -> export is a byte-identical
//! fixpoint. A `\ vars:` comment lists every variable in column order;
//! external solvers ignore it while our parser uses it to reconstruct the
//! exact column ordering.

use thiserror::Error;

use super::lp::{LinearProgram, RowSense};

#[derive(Debug, Error)]
pub enum LpFormatError {
    #[error("variable name {0:?} is not LP-format safe")]
    BadName(String),
    #[error("problem failed validation: {0}")]
    BadProblem(#[from] super::lp::LpError),
    #[error("cannot parse number from {0:?}")]
    BadNumber(String),
    #[error("unexpected token {0:?} in section {1}")]
    UnexpectedToken(String, &'static str),
    #[error("missing {0} section")]
    MissingSection(&'static str),
    #[error("constraint {0:?} has no sense/right-hand side")]
    RowWithoutSense(String),
}

const WRAP_COLUMN: usize = 200;

fn check_name(name: &str) -> Result<(), LpFormatError> {
    let ok = !name.is_empty()
        && !name.chars().next().unwrap().is_ascii_digit()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "_.-[]".contains(c))
        && !matches!(name.chars().next().unwrap(), '.' | '-');
    if ok {
        Ok(())
    } else {
        Err(LpFormatError::BadName(name.to_string()))
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn push_terms(out: &mut String, indent: &str, terms: &[(usize, f64)], names: &[String]) {
    let mut line_len = out.len() - out.rfind('\n').map(|p| p + 1).unwrap_or(0);
    for (k, &(j, c)) in terms.iter().enumerate() {
        let piece = if k == 0 {
            format!(" {} {}", fmt_num(c), names[j])
        } else if c < 0.0 {
            format!(" - {} {}", fmt_num(-c), names[j])
        } else {
            format!(" + {} {}", fmt_num(c), names[j])
        };
        if line_len + piece.len() > WRAP_COLUMN {
            out.push('\n');
            out.push_str(indent);
            line_len = indent.len();
        }
        out.push_str(&piece);
        line_len += piece.len();
    }
}

/// Serializes a maximization problem to LP-format text.
pub fn export_lp_text(lp: &LinearProgram) -> Result<String, LpFormatError> {
    lp.validate()?;
    for name in &lp.var_names {
        check_name(name)?;
    }
    for row in &lp.rows {
        check_name(&row.name)?;
    }

    let mut out = String::new();
    // Column-order manifest, ignored by external readers.
    let mut line = String::from("\\ vars:");
    for name in &lp.var_names {
        if line.len() + name.len() + 1 > WRAP_COLUMN {
            out.push_str(&line);
            out.push('\n');
            line = String::from("\\ vars:");
        }
        line.push(' ');
        line.push_str(name);
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Maximize\n obj:");
    let obj_terms: Vec<(usize, f64)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    push_terms(&mut out, "   ", &obj_terms, &lp.var_names);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &lp.rows {
        out.push(' ');
        out.push_str(&row.name);
        out.push(':');
        push_terms(&mut out, "   ", &row.coeffs, &lp.var_names);
        let sense = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        out.push_str(&format!(" {} {}\n", sense, fmt_num(row.rhs)));
    }

    out.push_str("Bounds\n");
    for j in 0..lp.n_vars() {
        let (lo, up) = (lp.lower[j], lp.upper[j]);
        let name = &lp.var_names[j];
        let default = if lp.integer[j] {
            lo == 0.0 && up == 1.0
        } else {
            lo == 0.0 && up == f64::INFINITY
        };
        if default {
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            out.push_str(&format!(" {name} free\n"));
        } else if lo == up {
            out.push_str(&format!(" {name} = {}\n", fmt_num(lo)));
        } else if up == f64::INFINITY {
            out.push_str(&format!(" {name} >= {}\n", fmt_num(lo)));
        } else if lo == f64::NEG_INFINITY {
            out.push_str(&format!(" -inf <= {name} <= {}\n", fmt_num(up)));
        } else {
            out.push_str(&format!(" {} <= {name} <= {}\n", fmt_num(lo), fmt_num(up)));
        }
    }

    let binaries: Vec<&str> = (0..lp.n_vars())
        .filter(|&j| lp.integer[j])
        .map(|j| lp.var_names[j].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        let mut line = String::from("");
        for name in binaries {
            if line.len() + name.len() + 1 > WRAP_COLUMN {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(name);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    Ok(out)
}

fn parse_bound_token(tok: &str) -> Result<f64, LpFormatError> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| LpFormatError::BadNumber(tok.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

/// Parses LP-format text back into a [`LinearProgram`]. Minimization
/// objectives are negated into the internal maximization convention.
pub fn parse_lp_text(text: &str) -> Result<LinearProgram, LpFormatError> {
    let mut lp = LinearProgram::new();
    let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();

    let mut intern = |lp: &mut LinearProgram, name: &str| -> usize {
        if let Some(&j) = index.get(name) {
            j
        } else {
            let j = lp.add_var(name.to_string(), 0.0, f64::INFINITY, 0.0);
            index.insert(name.to_string(), j);
            j
        }
    };

    let mut section = Section::Preamble;
    let mut minimize = false;
    let mut saw_objective = false;
    // Pending row accumulation (terms may wrap across lines).
    let mut row_name: Option<String> = None;
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut in_objective_terms = false;

    let finish_row = |_lp: &mut LinearProgram,
                      row_name: &mut Option<String>,
                      terms: &mut Vec<(usize, f64)>|
     -> Result<(), LpFormatError> {
        if let Some(name) = row_name.take() {
            Err(LpFormatError::RowWithoutSense(name))?;
        }
        terms.clear();
        Ok(())
    };

    for raw_line in text.lines() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            // Column-order manifest comment; other comments are skipped.
            if let Some(vars) = rest.trim_start().strip_prefix("vars:") {
                for name in vars.split_whitespace() {
                    intern(&mut lp, name);
                }
            }
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let keyword = lower.split_whitespace().collect::<Vec<_>>().join(" ");
        let new_section = match keyword.as_str() {
            "maximize" | "max" => Some((Section::Objective, false)),
            "minimize" | "min" => Some((Section::Objective, true)),
            "subject to" | "st" | "s.t." | "such that" => Some((Section::Rows, minimize)),
            "bounds" => Some((Section::Bounds, minimize)),
            "binaries" | "binary" | "bin" => Some((Section::Binaries, minimize)),
            "general" | "generals" | "gen" => Some((Section::Binaries, minimize)),
            "end" => Some((Section::Done, minimize)),
            _ => None,
        };
        if let Some((next, is_min)) = new_section {
            if section == Section::Rows {
                finish_row(&mut lp, &mut row_name, &mut terms)?;
            }
            if section == Section::Objective && in_objective_terms {
                // Flush objective terms.
                for (j, c) in terms.drain(..) {
                    lp.objective[j] += if minimize { -c } else { c };
                }
                in_objective_terms = false;
            }
            section = next;
            minimize = is_min;
            if next == Section::Objective {
                saw_objective = true;
            }
            continue;
        }

        match section {
            Section::Preamble | Section::Done => {
                return Err(LpFormatError::UnexpectedToken(line.to_string(), "preamble"));
            }
            Section::Objective | Section::Rows => {
                let mut body = line;
                // Optional "name:" prefix.
                if let Some(pos) = body.find(':') {
                    let head = &body[..pos];
                    if !head.contains(|c: char| c.is_whitespace()) {
                        if section == Section::Rows {
                            finish_row(&mut lp, &mut row_name, &mut terms)?;
                            row_name = Some(head.trim().to_string());
                        } else {
                            in_objective_terms = true;
                        }
                        body = body[pos + 1..].trim();
                    }
                } else if section == Section::Objective {
                    in_objective_terms = true;
                }
                // Token scan: signs, coefficients, names, sense, rhs.
                let mut sign = 1.0;
                let mut coef: Option<f64> = None;
                let mut pending_sense: Option<RowSense> = None;
                for tok in body.split_whitespace() {
                    if let Some(sense) = pending_sense {
                        let rhs = tok
                            .parse::<f64>()
                            .map_err(|_| LpFormatError::BadNumber(tok.to_string()))?;
                        let name = row_name.take().unwrap_or_else(|| {
                            format!("c{}", lp.n_rows())
                        });
                        lp.add_row(name, std::mem::take(&mut terms), sense, rhs);
                        pending_sense = None;
                        sign = 1.0;
                        coef = None;
                        continue;
                    }
                    match tok {
                        "+" => {}
                        "-" => sign = -sign,
                        "<=" | "<" => pending_sense = Some(RowSense::Le),
                        ">=" | ">" => pending_sense = Some(RowSense::Ge),
                        "=" => pending_sense = Some(RowSense::Eq),
                        _ => {
                            if let Ok(v) = tok.parse::<f64>() {
                                coef = Some(coef.unwrap_or(1.0) * v);
                            } else {
                                let j = intern(&mut lp, tok);
                                let c = sign * coef.take().unwrap_or(1.0);
                                if section == Section::Objective {
                                    terms.push((j, c));
                                } else {
                                    terms.push((j, c));
                                }
                                sign = 1.0;
                            }
                        }
                    }
                }
                if pending_sense.is_some() {
                    return Err(LpFormatError::RowWithoutSense(
                        row_name.take().unwrap_or_default(),
                    ));
                }
                if section == Section::Objective {
                    for (j, c) in terms.drain(..) {
                        lp.objective[j] += if minimize { -c } else { c };
                    }
                }
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    [name, kw] if kw.eq_ignore_ascii_case("free") => {
                        let j = intern(&mut lp, name);
                        lp.lower[j] = f64::NEG_INFINITY;
                        lp.upper[j] = f64::INFINITY;
                    }
                    [name, op, val] => {
                        let j = intern(&mut lp, name);
                        let v = parse_bound_token(val)?;
                        match *op {
                            ">=" => lp.lower[j] = v,
                            "<=" => lp.upper[j] = v,
                            "=" => {
                                lp.lower[j] = v;
                                lp.upper[j] = v;
                            }
                            _ => {
                                return Err(LpFormatError::UnexpectedToken(
                                    op.to_string(),
                                    "bounds",
                                ))
                            }
                        }
                    }
                    [lo, "<=", name, "<=", up] => {
                        let j = intern(&mut lp, name);
                        lp.lower[j] = parse_bound_token(lo)?;
                        lp.upper[j] = parse_bound_token(up)?;
                    }
                    _ => {
                        return Err(LpFormatError::UnexpectedToken(
                            line.to_string(),
                            "bounds",
                        ))
                    }
                }
            }
            Section::Binaries => {
                for name in line.split_whitespace() {
                    let j = intern(&mut lp, name);
                    lp.integer[j] = true;
                    lp.lower[j] = lp.lower[j].max(0.0);
                    if lp.upper[j] == f64::INFINITY {
                        lp.upper[j] = 1.0;
                    }
                }
            }
        }
    }
    if !saw_objective {
        return Err(LpFormatError::MissingSection("objective"));
    }
    if section == Section::Rows {
        finish_row(&mut lp, &mut row_name, &mut terms)?;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::lp::{LinearProgram, RowSense};

    fn toy() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let a = lp.add_var("a", 0.0, 4.0, 3.0);
        let b = lp.add_binary("pick_b", 5.5);
        let c = lp.add_var("c.flow", -2.5, f64::INFINITY, -1.0);
        lp.add_row("cap", vec![(a, 1.0), (b, 2.0)], RowSense::Le, 4.0);
        lp.add_row("link", vec![(b, -1.5), (c, 1.0)], RowSense::Ge, -0.25);
        lp.add_row("fix", vec![(a, 1.0), (c, 1.0)], RowSense::Eq, 2.0);
        lp
    }

    #[test]
    fn one_variable_document_is_five_lines() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 3.0, 1.0);
        lp.add_row("cap", vec![(x, 1.0)], RowSense::Le, 3.0);
        let text = export_lp_text(&lp).unwrap();
        // vars comment, Maximize, obj, Subject To, row, Bounds, bound, End.
        assert!(text.starts_with("\\ vars: x\n"));
        assert!(text.ends_with("End\n"));
        assert!(text.contains("Maximize\n obj: 1 x\n"));
        assert!(text.contains("Subject To\n cap: 1 x <= 3\n"));
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let lp = toy();
        let text = export_lp_text(&lp).unwrap();
        let back = parse_lp_text(&text).unwrap();
        assert_eq!(back.var_names, lp.var_names);
        assert_eq!(back.objective, lp.objective);
        assert_eq!(back.lower, lp.lower);
        assert_eq!(back.upper, lp.upper);
        assert_eq!(back.integer, lp.integer);
        assert_eq!(back.n_rows(), lp.n_rows());
        for (r1, r2) in lp.rows.iter().zip(&back.rows) {
            assert_eq!(r1.name, r2.name);
            assert_eq!(r1.coeffs, r2.coeffs);
            assert_eq!(r1.sense, r2.sense);
            assert_eq!(r1.rhs, r2.rhs);
        }
    }

    #[test]
    fn export_parse_export_fixpoint() {
        let lp = toy();
        let first = export_lp_text(&lp).unwrap();
        let second = export_lp_text(&parse_lp_text(&first).unwrap()).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn parses_minimization_by_negating() {
        let text = "Minimize\n obj: 2 x\nSubject To\n r: 1 x >= 1\nEnd\n";
        let lp = parse_lp_text(text).unwrap();
        assert_eq!(lp.objective, vec![-2.0]);
    }

    #[test]
    fn rejects_unsafe_names() {
        let mut lp = LinearProgram::new();
        lp.add_var("2bad", 0.0, 1.0, 1.0);
        assert!(matches!(
            export_lp_text(&lp),
            Err(LpFormatError::BadName(_))
        ));
    }

    #[test]
    fn fractional_coefficients_roundtrip_exactly() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, 0.1 + 0.2);
        lp.add_row("r", vec![(x, 1.0 / 3.0)], RowSense::Le, 2.0_f64.sqrt());
        let text = export_lp_text(&lp).unwrap();
        let back = parse_lp_text(&text).unwrap();
        assert_eq!(back.objective[0], 0.1 + 0.2);
        assert_eq!(back.rows[0].coeffs[0].1, 1.0 / 3.0);
        assert_eq!(back.rows[0].rhs, 2.0_f64.sqrt());
    }
}
