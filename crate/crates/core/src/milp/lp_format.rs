//! CPLEX-style LP text export, for cross-checking models with external
//! solvers.

use std::collections::HashSet;
use std::fmt::Write;

use super::{ConstraintSense, MilpModel, ObjectiveSense, VarId, VarKind};

const TERMS_PER_LINE: usize = 6;

/// Renders `model` in LP format: objective, `Subject To`, `Bounds`,
/// `Binaries`, `End`. Names are rewritten to the LP character set where
/// needed, keeping them unique.
pub fn export_lp(model: &MilpModel) -> String {
    let var_names = sanitize_all(model.variables().iter().map(|v| v.name.as_str()), "x");
    let con_names = sanitize_all(model.constraints().iter().map(|c| c.name.as_str()), "c");

    let mut out = String::new();
    out.push_str("\\ exported by fcnf-failure\n");
    let obj = model.objective();
    out.push_str(match obj.sense {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, &obj.terms, &var_names);
    out.push('\n');

    if model.variables().is_empty() && model.constraints().is_empty() {
        out.push_str("End\n");
        return out;
    }

    out.push_str("Subject To\n");
    for (c, name) in model.constraints().iter().zip(&con_names) {
        let _ = write!(out, " {name}:");
        if c.terms.is_empty() {
            // LP readers reject empty rows; a zero coefficient keeps the row.
            let _ = write!(out, " 0 {}", var_names.first().map_or("x", String::as_str));
        } else {
            write_terms(&mut out, &c.terms, &var_names);
        }
        let op = match c.sense {
            ConstraintSense::Le => "<=",
            ConstraintSense::Ge => ">=",
            ConstraintSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }

    out.push_str("Bounds\n");
    for (v, name) in model.variables().iter().zip(&var_names) {
        let (lo, hi) = (v.lower, v.upper);
        if v.kind == VarKind::Binary && lo <= 0.0 && hi >= 1.0 {
            continue;
        }
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if lo == hi {
            let _ = writeln!(out, " {name} = {}", num(lo));
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", bound(lo), bound(hi));
        }
    }

    let binaries: Vec<&String> = model
        .variables()
        .iter()
        .zip(&var_names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE * 2) {
            out.push(' ');
            out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, terms: &[(VarId, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {}", num(c.abs()), names[v.index()]);
        } else {
            let _ = write!(out, " {sign} {} {}", num(c.abs()), names[v.index()]);
        }
    }
}

fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        num(x)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c)
}

fn sanitize(name: &str, fallback: &str) -> String {
    let mut s: String = name.chars().map(|c| if is_name_char(c) { c } else { '_' }).collect();
    if s.is_empty() {
        s = fallback.to_string();
    }
    let first = s.chars().next().unwrap();
    let bad_start = first.is_ascii_digit()
        || first == '.'
        || ((first == 'e' || first == 'E') && s[1..].starts_with(|c: char| c.is_ascii_digit()));
    if bad_start {
        s.insert(0, '_');
    }
    s
}

fn sanitize_all<'a>(names: impl Iterator<Item = &'a str>, fallback: &str) -> Vec<String> {
    let names: Vec<&str> = names.collect();
    let mut used: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        let mut s = sanitize(n, fallback);
        if used.contains(&s) {
            let mut k = i;
            loop {
                let cand = format!("{s}_{k}");
                if !used.contains(&cand) {
                    s = cand;
                    break;
                }
                k += 1;
            }
        }
        used.insert(s.clone());
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpModel, ObjectiveSense};

    #[test]
    fn empty_model_is_header_and_end() {
        let text = export_lp(&MilpModel::new());
        assert_eq!(text, "\\ exported by fcnf-failure\nMinimize\n obj: 0\nEnd\n");
    }

    #[test]
    fn single_bound_model() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 2.0, f64::INFINITY).unwrap();
        m.set_objective(ObjectiveSense::Minimize, vec![(x, 1.0)]).unwrap();
        let text = export_lp(&m);
        assert!(text.contains("Minimize\n obj: 1 x\n"));
        assert!(text.contains("Bounds\n 2 <= x <= +inf\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn sections_and_names() {
        let mut m = MilpModel::new();
        let y = m.add_binary("y[e 1]").unwrap();
        let f = m.add_continuous("f[e 1]", 0.0, f64::INFINITY).unwrap();
        let g = m.add_continuous("1g", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint("cap", vec![(f, 1.0), (y, -2.5)], ConstraintSense::Le, 0.0).unwrap();
        m.add_constraint("bal", vec![(g, 1.0), (f, -1.0)], ConstraintSense::Eq, 0.0).unwrap();
        m.set_objective(ObjectiveSense::Maximize, vec![(y, 3.0), (f, 0.5)]).unwrap();
        let text = export_lp(&m);
        assert!(text.contains("Maximize\n obj: 3 y_e_1_ + 0.5 f_e_1_\n"));
        assert!(text.contains(" cap: - 2.5 y_e_1_ + 1 f_e_1_ <= 0\n"));
        assert!(text.contains(" _1g free\n"));
        assert!(text.contains("Binaries\n y_e_1_\n"));
    }

    #[test]
    fn colliding_names_get_suffixes() {
        let names = sanitize_all(["a b", "a_b", "a:b"].into_iter(), "x");
        assert_eq!(names, vec!["a_b", "a_b_1", "a_b_2"]);
    }
}
