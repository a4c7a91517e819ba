//! Writer for the CPLEX-style LP text format.
//!
//! Sections are always emitted in the order `Minimize`, `Subject To`,
//! `Bounds`, `Generals`, `Binaries`, `End`, even when empty. Names are reduced
//! to `[A-Za-z0-9_]`; collisions after sanitizing get a numeric suffix.

use std::collections::HashSet;
use std::fmt::Write;

use super::model::{ConstraintSense, MilpInstance};
use super::scalar::Scalar;

const MAX_LINE: usize = 200;

pub fn sanitize_name(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn unique_names<'a>(raw: impl Iterator<Item = &'a str>, taken: &mut HashSet<String>) -> Vec<String> {
    raw.map(|r| {
        let base = sanitize_name(r);
        let mut name = base.clone();
        let mut k = 1;
        while !taken.insert(name.clone()) {
            name = format!("{base}_{k}");
            k += 1;
        }
        name
    })
    .collect()
}

fn fmt_num<S: Scalar>(v: &S) -> String {
    format!("{}", v.to_f64_lossy())
}

/// Appends `terms` as a linear expression, wrapping long lines.
fn write_expr(out: &mut String, prefix: &str, terms: &[(String, String, bool)]) {
    let mut line = String::from(prefix);
    if terms.is_empty() {
        line.push_str(" 0");
    }
    for (i, (coef, name, negative)) in terms.iter().enumerate() {
        let piece = match (i, negative) {
            (0, false) => format!(" {coef} {name}"),
            (0, true) => format!(" - {coef} {name}"),
            (_, false) => format!(" + {coef} {name}"),
            (_, true) => format!(" - {coef} {name}"),
        };
        if line.len() + piece.len() > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
}

fn terms_of<S: Scalar>(pairs: impl Iterator<Item = (usize, S)>, names: &[String]) -> Vec<(String, String, bool)> {
    pairs
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (fmt_num(&c.abs()), names[j].clone(), c < S::zero()))
        .collect()
}

/// Renders the instance as LP text.
pub fn export_lp<S: Scalar>(milp: &MilpInstance<S>) -> String {
    let mut taken = HashSet::new();
    let var_names = unique_names(milp.variables().iter().map(|v| v.name.as_str()), &mut taken);
    let mut row_taken = HashSet::from(["obj".to_string()]);
    let row_names = unique_names(milp.constraints().iter().map(|c| c.name.as_str()), &mut row_taken);

    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", sanitize_name(&milp.name));
    out.push_str("Minimize\n");
    let mut obj = terms_of(milp.objective().iter().cloned().enumerate(), &var_names);
    let constant = milp.objective_constant();
    if !constant.is_zero() {
        obj.push((fmt_num(&constant.abs()), String::new(), constant < &S::zero()));
    }
    write_expr(&mut out, " obj:", &obj);
    out.push('\n');

    out.push_str("Subject To\n");
    for (c, name) in milp.constraints().iter().zip(&row_names) {
        let terms = terms_of(c.terms.iter().map(|(id, a)| (id.0, a.clone())), &var_names);
        write_expr(&mut out, &format!(" {name}:"), &terms);
        let op = match c.sense {
            ConstraintSense::Le => "<=",
            ConstraintSense::Eq => "=",
            ConstraintSense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(&c.rhs));
    }

    out.push_str("Bounds\n");
    for (v, name) in milp.variables().iter().zip(&var_names) {
        let line = match (&v.lower, &v.upper) {
            (Some(l), Some(u)) => format!(" {} <= {name} <= {}", fmt_num(l), fmt_num(u)),
            (Some(l), None) => format!(" {name} >= {}", fmt_num(l)),
            (None, Some(u)) => format!(" -inf <= {name} <= {}", fmt_num(u)),
            (None, None) => format!(" {name} free"),
        };
        out.push_str(&line);
        out.push('\n');
    }

    let is_binary = |v: &super::model::Variable<S>| {
        v.integral && v.lower.as_ref().is_some_and(|l| l.is_zero()) && v.upper.as_ref().is_some_and(|u| u.is_one())
    };
    out.push_str("Generals\n");
    for (v, name) in milp.variables().iter().zip(&var_names) {
        if v.integral && !is_binary(v) {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("Binaries\n");
    for (v, name) in milp.variables().iter().zip(&var_names) {
        if is_binary(v) {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}
