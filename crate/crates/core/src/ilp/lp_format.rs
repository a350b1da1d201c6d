//! CPLEX-style LP text format: `Minimize`/`Maximize`, `Subject To`,
//! `Lazy Constraints`, `Binary`, `End`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{Constraint, IlpModel, Relation, Sense};

const LINE_WIDTH: usize = 240;

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.[]{}!#$%&()/,;?@`'|~".contains(c)
}

/// Names usable in the LP file: invalid characters replaced, numeric-looking
/// names prefixed, duplicates suffixed.
fn file_names(m: &IlpModel) -> Vec<String> {
    let mut used = HashSet::new();
    (0..m.num_vars)
        .map(|i| {
            let raw = m.var_names.get(i).map(String::as_str).unwrap_or("");
            let mut name: String = raw.chars().map(|c| if is_name_char(c) { c } else { '_' }).collect();
            let first = name.chars().next();
            if name.is_empty()
                || first.is_some_and(|c| c.is_ascii_digit() || c == '.')
                || name.to_ascii_lowercase().starts_with('e') && name[1..].chars().all(|c| c.is_ascii_digit())
            {
                name = format!("x_{name}");
            }
            let mut candidate = name.clone();
            let mut k = 1;
            while !used.insert(candidate.clone()) {
                candidate = format!("{name}_{k}");
                k += 1;
            }
            candidate
        })
        .collect()
}

struct Wrapped {
    out: String,
    line: usize,
}

impl Wrapped {
    fn push(&mut self, tok: &str) {
        if self.line + tok.len() + 1 > LINE_WIDTH {
            self.out.push_str("\n ");
            self.line = 1;
        }
        self.out.push(' ');
        self.out.push_str(tok);
        self.line += tok.len() + 1;
    }

    fn terms(&mut self, terms: impl IntoIterator<Item = (String, f64)>) -> bool {
        let mut any = false;
        for (name, a) in terms {
            if any {
                self.push(if a < 0.0 { "-" } else { "+" });
                self.push(&format!("{}", a.abs()));
            } else {
                self.push(&format!("{a}"));
            }
            self.push(&name);
            any = true;
        }
        any
    }
}

/// Writes `m` in LP format.
pub fn export_standard_lp(m: &IlpModel) -> String {
    export_with_comments(m, &[])
}

/// [`export_standard_lp`] preceded by `\`-comment lines.
pub fn export_with_comments(m: &IlpModel, comments: &[&str]) -> String {
    let names = file_names(m);
    let mut s = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "\\ {line}");
        }
    }
    s.push_str(match m.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let mut w = Wrapped { out: String::from(" obj:"), line: 5 };
    let any = w.terms(m.objective.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(v, &c)| (names[v].clone(), c)));
    if m.objective_constant != 0.0 || !any {
        let c = m.objective_constant;
        if any {
            w.push(if c < 0.0 { "-" } else { "+" });
            w.push(&format!("{}", c.abs()));
        } else {
            w.push(&format!("{c}"));
        }
    }
    s.push_str(&w.out);
    s.push('\n');

    for (title, lazy) in [("Subject To", false), ("Lazy Constraints", true)] {
        let group: Vec<(usize, &Constraint)> = m.constraints.iter().enumerate().filter(|(_, c)| c.lazy == lazy).collect();
        if lazy && group.is_empty() {
            continue;
        }
        let _ = writeln!(s, "{title}");
        for (ci, c) in group {
            let mut w = Wrapped { out: String::new(), line: 0 };
            w.push(&format!("c{ci}:"));
            if !w.terms(c.terms.iter().map(|&(v, a)| (names[v].clone(), a))) {
                w.push("0");
            }
            w.push(match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            });
            w.push(&format!("{}", c.rhs));
            s.push_str(&w.out);
            s.push('\n');
        }
    }

    s.push_str("Binary\n");
    let mut w = Wrapped { out: String::new(), line: 0 };
    for n in &names {
        w.push(n);
    }
    if !names.is_empty() {
        s.push_str(&w.out);
        s.push('\n');
    }
    s.push_str("End\n");
    s
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints { lazy: bool },
    Binary,
    Other,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimise" | "min" | "maximize" | "maximise" | "max" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints { lazy: false },
        "lazy constraints" => Section::Constraints { lazy: true },
        "binary" | "binaries" | "bin" => Section::Binary,
        "bounds" | "general" | "generals" | "gen" | "end" => Section::Other,
        _ => return None,
    })
}

struct Parser {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Parser {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    /// Parses `[sign] [coef] name | [sign] number` runs until a relation
    /// token or the end; returns terms, constant and the stop position.
    fn linear(&mut self, toks: &[&str], mut i: usize) -> Result<(Vec<(usize, f64)>, f64, usize), String> {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        while i < toks.len() && relation(toks[i]).is_none() {
            let mut sign = 1.0;
            while i < toks.len() && (toks[i] == "+" || toks[i] == "-") {
                if toks[i] == "-" {
                    sign = -sign;
                }
                i += 1;
            }
            let mut coef = None;
            if let Some(Ok(x)) = toks.get(i).map(|t| t.parse::<f64>()) {
                coef = Some(x);
                i += 1;
            }
            match toks.get(i) {
                Some(t) if relation(t).is_none() && *t != "+" && *t != "-" && t.parse::<f64>().is_err() => {
                    let v = self.var(t);
                    terms.push((v, sign * coef.unwrap_or(1.0)));
                    i += 1;
                }
                _ => match coef {
                    Some(x) => constant += sign * x,
                    None => return Err(format!("dangling sign near token {i}")),
                },
            }
        }
        Ok((terms, constant, i))
    }
}

fn relation(t: &str) -> Option<Relation> {
    match t {
        "<=" | "=<" | "<" => Some(Relation::Le),
        ">=" | "=>" | ">" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

/// Parses the subset of the LP format written by [`export_standard_lp`].
/// Variable indices follow the `Binary` section. Constraints named `c<k>`
/// are restored to position `k`.
pub fn parse_lp(text: &str) -> Result<IlpModel, String> {
    let mut section = Section::None;
    let mut sense = None;
    let mut obj_toks: Vec<String> = Vec::new();
    let mut con_toks: Vec<(bool, String)> = Vec::new();
    let mut bin_toks: Vec<String> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('\\') || trimmed.is_empty() {
            continue;
        }
        if let Some(sec) = section_of(trimmed) {
            if sec == Section::Objective {
                sense = Some(if trimmed.to_ascii_lowercase().starts_with("min") { Sense::Minimize } else { Sense::Maximize });
            }
            section = sec;
            continue;
        }
        match section {
            Section::Objective => obj_toks.extend(trimmed.split_whitespace().map(String::from)),
            Section::Constraints { lazy } => con_toks.extend(trimmed.split_whitespace().map(|t| (lazy, t.to_string()))),
            Section::Binary => bin_toks.extend(trimmed.split_whitespace().map(String::from)),
            Section::Other => {}
            Section::None => return Err(format!("content before objective section: {trimmed}")),
        }
    }
    let sense = sense.ok_or("missing objective section")?;
    let mut p = Parser { index: HashMap::new(), names: Vec::new() };
    for b in &bin_toks {
        p.var(b);
    }

    let toks: Vec<&str> = obj_toks.iter().map(String::as_str).collect();
    let start = usize::from(toks.first().is_some_and(|t| t.ends_with(':')));
    let (obj_terms, constant, end) = p.linear(&toks, start)?;
    if end != toks.len() {
        return Err("relation in objective".into());
    }

    let mut named: Vec<(Option<usize>, Constraint)> = Vec::new();
    let mut i = 0;
    while i < con_toks.len() {
        let lazy = con_toks[i].0;
        let mut name = None;
        if con_toks[i].1.ends_with(':') {
            name = Some(con_toks[i].1.trim_end_matches(':').to_string());
            i += 1;
        }
        let toks: Vec<&str> = con_toks[i..].iter().map(|(_, t)| t.as_str()).collect();
        let (terms, constant, stop) = p.linear(&toks, 0)?;
        let rel = toks.get(stop).and_then(|t| relation(t)).ok_or("constraint without relation")?;
        let mut j = stop + 1;
        let mut sign = 1.0;
        if toks.get(j) == Some(&"-") {
            sign = -1.0;
            j += 1;
        } else if toks.get(j) == Some(&"+") {
            j += 1;
        }
        let rhs: f64 = toks.get(j).ok_or("missing right-hand side")?.parse().map_err(|e| format!("bad rhs: {e}"))?;
        i += j + 1;
        let slot = name.as_deref().and_then(|n| n.strip_prefix('c')).and_then(|k| k.parse::<usize>().ok());
        named.push((slot, Constraint { terms, relation: rel, rhs: sign * rhs - constant, lazy }));
    }
    let by_slot = named.iter().all(|(s, _)| s.is_some())
        && named.iter().map(|(s, _)| s.unwrap()).collect::<HashSet<_>>().len() == named.len()
        && named.iter().all(|(s, _)| s.unwrap() < named.len());
    if by_slot {
        named.sort_by_key(|(s, _)| s.unwrap());
    }

    let mut objective = vec![0.0; p.names.len()];
    for (v, a) in obj_terms {
        objective[v] += a;
    }
    Ok(IlpModel {
        sense,
        num_vars: p.names.len(),
        objective,
        objective_constant: constant,
        constraints: named.into_iter().map(|(_, c)| c).collect(),
        var_names: p.names,
    })
}
