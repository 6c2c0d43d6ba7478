//! CSV reports and their `--pretty` rendering.

use mchap_core::Solution;

/// `x` with six significant digits, trailing zeros dropped; exponent
/// notation outside `[1e-4, 1e6)` like C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // round first: the exponent can change (999999.5 -> 1e6)
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Differences of LP values below this are round-off.
const GAP_EPS: f64 = 1e-6;

fn gap(bound: f64, objective: i64) -> f64 {
    let g = bound - objective as f64;
    if g.abs() < GAP_EPS {
        0.0
    } else {
        g
    }
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

/// A header plus data rows, all as text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Space-aligned columns; numbers flush right.
    pub fn to_pretty(&self) -> String {
        let cols = self.header.len();
        let mut width = vec![0; cols];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let numeric: Vec<bool> =
            (0..cols).map(|k| self.rows.iter().all(|r| r[k].is_empty() || r[k].parse::<f64>().is_ok())).collect();
        let mut out = String::new();
        let line = |r: &[String], out: &mut String| {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(k, c)| if numeric[k] { format!("{c:>w$}", w = width[k]) } else { format!("{c:<w$}", w = width[k]) })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        };
        line(&self.header, &mut out);
        let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for r in &self.rows {
            line(r, &mut out);
        }
        out
    }

    pub fn render(&self, pretty: bool) -> String {
        if pretty {
            self.to_pretty()
        } else {
            self.to_csv()
        }
    }
}

/// One solver run on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub instance: String,
    pub method: String,
    pub objective: i64,
    pub status: String,
    pub root_bound: Option<f64>,
    pub nodes: usize,
    pub cg_iterations: usize,
    pub columns: usize,
    pub elapsed: f64,
}

impl RunRow {
    pub fn new(instance: &str, method: &str, solution: &Solution) -> Self {
        Self {
            instance: instance.into(),
            method: method.into(),
            objective: solution.objective,
            status: solution.status.to_string(),
            root_bound: solution.stats.root_bound,
            nodes: solution.stats.nodes,
            cg_iterations: solution.stats.cg_iterations,
            columns: solution.stats.columns,
            elapsed: solution.stats.elapsed,
        }
    }

    /// Root bound minus objective.
    pub fn gap(&self) -> Option<f64> {
        self.root_bound.map(|b| gap(b, self.objective))
    }

    pub fn timed_out(&self) -> bool {
        self.status == mchap_core::Status::FeasibleTimeLimit.as_str()
    }
}

/// Per-run rows; wall-clock time only with `timing`, so that the default
/// report is reproducible byte for byte.
pub fn runs_table(rows: &[RunRow], timing: bool) -> Table {
    let mut header =
        vec!["instance", "method", "objective", "status", "root_bound", "gap", "nodes", "cg_iterations", "columns"];
    if timing {
        header.push("elapsed");
    }
    let mut t = Table::new(header);
    for r in rows {
        let mut row = vec![
            r.instance.clone(),
            r.method.clone(),
            r.objective.to_string(),
            r.status.clone(),
            opt_sig6(r.root_bound),
            opt_sig6(r.gap()),
            r.nodes.to_string(),
            r.cg_iterations.to_string(),
            r.columns.to_string(),
        ];
        if timing {
            row.push(sig6(r.elapsed));
        }
        t.push(row);
    }
    t
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One row over all instances: per method the means of the run metrics and
/// the number of runs stopped by the time limit (`tl`).
pub fn summary_table(rows: &[RunRow], methods: &[&str], timing: bool) -> Table {
    let mut header = vec!["instances".to_string()];
    let mut row = Vec::new();
    let mut instances: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).collect();
    instances.sort_unstable();
    instances.dedup();
    row.push(instances.len().to_string());
    for m in methods {
        let mine: Vec<&RunRow> = rows.iter().filter(|r| r.method == *m).collect();
        let mut metrics: Vec<(&str, Option<f64>)> = vec![
            ("objective", mean(mine.iter().map(|r| r.objective as f64))),
            ("gap", mean(mine.iter().filter_map(|r| r.gap()))),
            ("nodes", mean(mine.iter().map(|r| r.nodes as f64))),
            ("cg_iterations", mean(mine.iter().map(|r| r.cg_iterations as f64))),
            ("columns", mean(mine.iter().map(|r| r.columns as f64))),
        ];
        if timing {
            metrics.push(("elapsed", mean(mine.iter().map(|r| r.elapsed))));
        }
        for (name, v) in metrics {
            header.push(format!("{m}_{name}"));
            row.push(opt_sig6(v));
        }
        header.push(format!("{m}_tl"));
        row.push(mine.iter().filter(|r| r.timed_out()).count().to_string());
    }
    let mut t = Table::new(header);
    t.push(row);
    t
}

/// Root relaxation bounds of both models against the best known objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub instance: String,
    pub objective: i64,
    pub status: String,
    pub bilp: f64,
    pub lamt2: f64,
}

impl BoundRow {
    pub fn bilp_gap(&self) -> f64 {
        gap(self.bilp, self.objective)
    }

    pub fn lamt2_gap(&self) -> f64 {
        gap(self.lamt2, self.objective)
    }
}

pub fn bounds_table(rows: &[BoundRow]) -> Table {
    let mut t = Table::new(["instance", "objective", "status", "bilp_bound", "lamt2_bound", "bilp_gap", "lamt2_gap"]);
    for r in rows {
        t.push(vec![
            r.instance.clone(),
            r.objective.to_string(),
            r.status.clone(),
            sig6(r.bilp),
            sig6(r.lamt2),
            sig6(r.bilp_gap()),
            sig6(r.lamt2_gap()),
        ]);
    }
    t
}

/// Mean gaps and the number of instances where the BILP gap is not larger.
pub fn bounds_summary(rows: &[BoundRow]) -> Table {
    let mut t = Table::new(["instances", "bilp_gap_mean", "lamt2_gap_mean", "bilp_not_worse"]);
    let not_worse = rows.iter().filter(|r| r.bilp_gap() <= r.lamt2_gap() + GAP_EPS).count();
    t.push(vec![
        rows.len().to_string(),
        opt_sig6(mean(rows.iter().map(BoundRow::bilp_gap))),
        opt_sig6(mean(rows.iter().map(BoundRow::lamt2_gap))),
        not_worse.to_string(),
    ]);
    t
}
