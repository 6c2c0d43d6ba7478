//! Text formats for instances, solutions and search traces.
//!
//! Instance files look like
//!
//! ```text
//! mchap-instance v1
//! units_per_mhz 100
//! holes 2
//! 47000 47350
//! 47400 48100
//! users 1
//! 1500 3900
//! ```
//!
//! `#` starts a comment and blank lines are ignored. The writer emits the
//! canonical form: single spaces, no comments, newline-terminated.

use mchap_core::instance::InstanceError;
use mchap_core::{Hole, Instance, NodeEvent, Pattern, Solution, User};
use std::fmt::Write as _;

pub const INSTANCE_HEADER: &str = "mchap-instance v1";
pub const SOLUTION_HEADER: &str = "mchap-solution v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; the line after the last one for a truncated file.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Non-empty lines with comments stripped, paired with their line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    total: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let total = text.lines().count();
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self { inner: it.peekable(), total }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.inner.next().ok_or_else(|| err(self.total + 1, format!("unexpected end of file, expected {what}")))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.inner.next() {
            Some((n, l)) => Err(err(n, format!("unexpected trailing content `{l}`"))),
            None => Ok(()),
        }
    }

    /// A `keyword value` line.
    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T), ParseError> {
        let (n, l) = self.next(key)?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(n, format!("expected `{key} <value>`, found `{l}`")));
        }
        let value = parts.next().ok_or_else(|| err(n, format!("missing value after `{key}`")))?;
        if parts.next().is_some() {
            return Err(err(n, format!("extra fields after `{key} {value}`")));
        }
        let v = value.parse().map_err(|_| err(n, format!("invalid value `{value}` for `{key}`")))?;
        Ok((n, v))
    }

    fn pair(&mut self, what: &str) -> Result<(usize, i64, i64), ParseError> {
        let (n, l) = self.next(what)?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = fields[..] else {
            return Err(err(n, format!("expected two integers ({what}), found `{l}`")));
        };
        let parse = |s: &str| s.parse::<i64>().map_err(|_| err(n, format!("`{s}` is not an integer")));
        Ok((n, parse(a)?, parse(b)?))
    }
}

pub fn read_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.next("header")?;
    if header != INSTANCE_HEADER {
        return Err(err(n, format!("expected header `{INSTANCE_HEADER}`")));
    }
    let (n, units) = lines.keyed::<u32>("units_per_mhz")?;
    if units == 0 {
        return Err(err(n, "units_per_mhz must be positive"));
    }
    let (_, m) = lines.keyed::<usize>("holes")?;
    let mut holes: Vec<Hole> = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        let (n, alpha, beta) = lines.pair("alpha beta")?;
        let hole = Hole::new(alpha, beta).map_err(|e| err(n, e.to_string()))?;
        if let Some(prev) = holes.last() {
            if prev.beta >= hole.alpha {
                return Err(err(n, "holes overlap or unsorted"));
            }
        }
        holes.push(hole);
    }
    let (_, count) = lines.keyed::<usize>("users")?;
    let mut users = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let (n, demand, mar) = lines.pair("demand mar")?;
        if demand < 1 {
            return Err(err(n, format!("demand must be at least 1, found {demand}")));
        }
        if mar < 0 {
            return Err(err(n, format!("MAR must be non-negative, found {mar}")));
        }
        users.push(User::new(demand, mar));
    }
    lines.finish()?;
    Instance::new(holes, users, units).map_err(|e: InstanceError| err(1, e.to_string()))
}

pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{INSTANCE_HEADER}");
    let _ = writeln!(out, "units_per_mhz {}", instance.units_per_mhz());
    let _ = writeln!(out, "holes {}", instance.num_holes());
    for h in instance.holes() {
        let _ = writeln!(out, "{} {}", h.alpha, h.beta);
    }
    let _ = writeln!(out, "users {}", instance.num_users());
    for u in instance.users() {
        let _ = writeln!(out, "{} {}", u.demand, u.mar);
    }
    out
}

/// The parts of a solution file that are read back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFile {
    pub method: String,
    pub status: String,
    pub objective: i64,
    pub assignment: Vec<Option<Pattern>>,
}

/// One line per user: its 0-based index, then its 0-based hole indices or
/// `-` when unserved.
pub fn write_solution(method: &str, solution: &Solution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SOLUTION_HEADER}");
    let _ = writeln!(out, "method {method}");
    let _ = writeln!(out, "status {}", solution.status);
    let _ = writeln!(out, "objective {}", solution.objective);
    let _ = writeln!(out, "users {}", solution.assignment.len());
    for (j, p) in solution.assignment.iter().enumerate() {
        match p {
            Some(p) => {
                let holes: Vec<String> = p.iter().map(|h| h.to_string()).collect();
                let _ = writeln!(out, "{j} {}", holes.join(" "));
            }
            None => {
                let _ = writeln!(out, "{j} -");
            }
        }
    }
    out
}

pub fn read_solution(text: &str) -> Result<SolutionFile, ParseError> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.next("header")?;
    if header != SOLUTION_HEADER {
        return Err(err(n, format!("expected header `{SOLUTION_HEADER}`")));
    }
    let (_, method) = lines.keyed::<String>("method")?;
    let (_, status) = lines.keyed::<String>("status")?;
    let (_, objective) = lines.keyed::<i64>("objective")?;
    let (_, count) = lines.keyed::<usize>("users")?;
    let mut assignment = Vec::with_capacity(count.min(1 << 16));
    for j in 0..count {
        let (n, l) = lines.next("assignment line")?;
        let mut fields = l.split_whitespace();
        if fields.next() != Some(j.to_string().as_str()) {
            return Err(err(n, format!("expected the line for user {j}")));
        }
        let rest: Vec<&str> = fields.collect();
        if rest == ["-"] {
            assignment.push(None);
            continue;
        }
        let holes = rest
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| err(n, format!("`{s}` is not a hole index"))))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Pattern::new(holes).map_err(|e| err(n, e.to_string()))?;
        if p.is_empty() {
            return Err(err(n, "empty pattern; write `-` for an unserved user"));
        }
        assignment.push(Some(p));
    }
    lines.finish()?;
    Ok(SolutionFile { method, status, objective, assignment })
}

/// Tab-separated search log: node, parent (`-` at the root), bound (`-`
/// when the node LP was infeasible) and action, under a header line.
pub fn write_trace(trace: &[NodeEvent]) -> String {
    let mut out = String::from("node\tparent\tbound\taction\n");
    for e in trace {
        let parent = e.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
        let bound = e.bound.map_or_else(|| "-".to_string(), |b| format!("{b:.6}"));
        let _ = writeln!(out, "{}\t{parent}\t{bound}\t{}", e.id, e.action);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "mchap-instance v1\nunits_per_mhz 1\nholes 4\n5 10\n14 19\n21 25\n28 33\nusers 6\n3 5\n12 28\n6 11\n4 6\n2 4\n9 12\n";

    #[test]
    fn example_round_trips() {
        let inst = read_instance(EXAMPLE).unwrap();
        assert_eq!(inst.num_holes(), 4);
        assert_eq!(inst.user(5), User::new(9, 12));
        assert_eq!(write_instance(&inst), EXAMPLE);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a comment\nmchap-instance v1   \n\nunits_per_mhz 1 # scale\nholes 1\n  0 4\nusers 0\n";
        let inst = read_instance(text).unwrap();
        assert_eq!(inst.num_holes(), 1);
        assert_eq!(inst.num_users(), 0);
    }

    #[test]
    fn errors_name_the_line() {
        let overlap = EXAMPLE.replace("14 19", "9 19");
        assert_eq!(read_instance(&overlap).unwrap_err(), err(5, "holes overlap or unsorted"));
        let negative = EXAMPLE.replace("2 4\n", "2 -4\n");
        assert_eq!(read_instance(&negative).unwrap_err().line, 13);
        let truncated = "mchap-instance v1\nunits_per_mhz 1\nholes 2\n0 1\n";
        assert_eq!(read_instance(truncated).unwrap_err().line, 5);
        assert_eq!(read_instance("mchap-instance v2\n").unwrap_err().line, 1);
        let trailing = format!("{EXAMPLE}7 7\n");
        assert_eq!(read_instance(&trailing).unwrap_err().line, 15);
        let reversed = EXAMPLE.replace("5 10", "10 5");
        assert_eq!(read_instance(&reversed).unwrap_err().line, 4);
        let words = EXAMPLE.replace("holes 4", "holes four");
        assert_eq!(read_instance(&words).unwrap_err().line, 3);
    }

    #[test]
    fn trace_lines() {
        use mchap_core::NodeAction;
        let ev = [
            NodeEvent { id: 0, parent: None, bound: Some(17.0), action: NodeAction::Branch, label: String::new() },
            NodeEvent { id: 1, parent: Some(0), bound: None, action: NodeAction::PruneInfeasibility, label: "x".into() },
        ];
        assert_eq!(write_trace(&ev), "node\tparent\tbound\taction\n0\t-\t17.000000\tbranch\n1\t0\t-\tprune_infeasibility\n");
    }
}
