//! Aggregation of sweep results into report tables, plus the results CSV
//! format shared by the `sweep` and `report` subcommands.

use super::{HarnessError, ResultRow};
use crate::adversaries::AdversaryKind;
use crate::harness::stats::{wilson_interval, Z_95};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Map,
    Strategy,
    NAgents,
    Horizon,
    Tau,
}

impl GroupBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupBy::Map => "map",
            GroupBy::Strategy => "strategy",
            GroupBy::NAgents => "n_agents",
            GroupBy::Horizon => "horizon",
            GroupBy::Tau => "tau",
        }
    }
}

impl std::str::FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "map" => Ok(GroupBy::Map),
            "strategy" => Ok(GroupBy::Strategy),
            "n_agents" | "agents" => Ok(GroupBy::NAgents),
            "horizon" => Ok(GroupBy::Horizon),
            "tau" => Ok(GroupBy::Tau),
            other => Err(format!(
                "unknown group-by '{other}' (expected map, strategy, n_agents, horizon, or tau)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group: String,
    pub adversary: AdversaryKind,
    pub runs: u64,
    pub successes: u64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone)]
pub struct ReportTable {
    pub group_by: GroupBy,
    pub rows: Vec<ReportRow>,
}

/// Pools counts per (group value, adversary) and recomputes the success
/// probability with a Wilson 95% interval on the pooled totals. Groups sort
/// numerically where the variable is numeric.
pub fn aggregate(rows: &[ResultRow], group_by: GroupBy) -> Result<ReportTable, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::BadSpec("no result rows to aggregate".into()));
    }
    let key_of = |row: &ResultRow| -> (String, f64) {
        match group_by {
            GroupBy::Map => (row.map.clone(), f64::NAN),
            GroupBy::Strategy => (row.strategy.to_string(), f64::NAN),
            GroupBy::NAgents => (row.agents.to_string(), row.agents as f64),
            GroupBy::Horizon => (format!("{}", row.horizon), row.horizon),
            GroupBy::Tau => (format!("{}", row.tau), row.tau),
        }
    };

    let mut groups: Vec<(String, f64)> = Vec::new();
    let mut pooled: std::collections::HashMap<(String, AdversaryKind), (u64, u64)> =
        std::collections::HashMap::new();
    for row in rows {
        let (key, sort) = key_of(row);
        if !groups.iter().any(|(k, _)| *k == key) {
            groups.push((key.clone(), sort));
        }
        let cell = pooled.entry((key, row.adversary)).or_insert((0, 0));
        cell.0 += row.successes;
        cell.1 += row.runs;
    }
    groups.sort_by(|a, b| {
        if a.1.is_nan() || b.1.is_nan() {
            a.0.cmp(&b.0)
        } else {
            a.1.total_cmp(&b.1)
        }
    });

    let mut out = Vec::new();
    for (group, _) in &groups {
        for adversary in AdversaryKind::ALL {
            if let Some(&(successes, runs)) = pooled.get(&(group.clone(), adversary)) {
                let p = successes as f64 / runs as f64;
                let (ci_lo, ci_hi) = wilson_interval(successes, runs, Z_95);
                out.push(ReportRow {
                    group: group.clone(),
                    adversary,
                    runs,
                    successes,
                    p,
                    ci_lo,
                    ci_hi,
                });
            }
        }
    }
    Ok(ReportTable {
        group_by,
        rows: out,
    })
}

impl ReportTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},adversary,runs,successes,p,ci_lo,ci_hi\n", self.group_by.as_str());
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6}",
                row.group, row.adversary, row.runs, row.successes, row.p, row.ci_lo, row.ci_hi
            );
        }
        out
    }

    /// Plain-text table with aligned columns.
    pub fn to_text(&self) -> String {
        let header = [
            self.group_by.as_str().to_string(),
            "adversary".into(),
            "runs".into(),
            "successes".into(),
            "p".into(),
            "95% CI".into(),
        ];
        let mut body: Vec<[String; 6]> = Vec::new();
        for row in &self.rows {
            body.push([
                row.group.clone(),
                row.adversary.to_string(),
                row.runs.to_string(),
                row.successes.to_string(),
                format!("{:.3}", row.p),
                format!("[{:.3}, {:.3}]", row.ci_lo, row.ci_hi),
            ]);
        }
        let mut widths = [0usize; 6];
        for col in 0..6 {
            widths[col] = std::iter::once(&header[col])
                .chain(body.iter().map(|r| &r[col]))
                .map(|s| s.len())
                .max()
                .unwrap_or(0);
        }
        let render = |cells: &[String; 6]| -> String {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{:<width$}", c, width = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = render(&header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 10));
        out.push('\n');
        let mut last_group = None;
        for (row, cells) in self.rows.iter().zip(&body) {
            if last_group.is_some() && last_group != Some(&row.group) {
                out.push('\n');
            }
            last_group = Some(&row.group);
            out.push_str(&render(cells));
            out.push('\n');
        }
        out
    }
}

pub const RESULTS_HEADER: &str =
    "map,strategy,agents,horizon,tau,adversary,runs,successes,failures,not_launched,p,ci_lo,ci_hi";

/// Serializes result rows with a fixed header and field formatting, so that
/// identical sweeps produce byte-identical files.
pub fn write_results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.map,
            r.strategy,
            r.agents,
            r.horizon,
            r.tau,
            r.adversary,
            r.runs,
            r.successes,
            r.failures,
            r.not_launched,
            r.p,
            r.ci_lo,
            r.ci_hi
        );
    }
    out
}

pub fn read_results_csv(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::Csv(e.to_string()))?
        .clone();
    let expected: Vec<&str> = RESULTS_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(HarnessError::Csv(format!(
            "unexpected header {got:?}, expected {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| HarnessError::Csv(e.to_string()))?;
        let field = |idx: usize| -> &str { record.get(idx).unwrap_or("") };
        let parse_err = |what: &str, val: &str| {
            HarnessError::Csv(format!("row {}: bad {what} '{val}'", i + 2))
        };
        rows.push(ResultRow {
            map: field(0).to_string(),
            strategy: field(1)
                .parse()
                .map_err(|_| parse_err("strategy", field(1)))?,
            agents: field(2).parse().map_err(|_| parse_err("agents", field(2)))?,
            horizon: field(3)
                .parse()
                .map_err(|_| parse_err("horizon", field(3)))?,
            tau: field(4).parse().map_err(|_| parse_err("tau", field(4)))?,
            adversary: field(5)
                .parse()
                .map_err(|_| parse_err("adversary", field(5)))?,
            runs: field(6).parse().map_err(|_| parse_err("runs", field(6)))?,
            successes: field(7)
                .parse()
                .map_err(|_| parse_err("successes", field(7)))?,
            failures: field(8)
                .parse()
                .map_err(|_| parse_err("failures", field(8)))?,
            not_launched: field(9)
                .parse()
                .map_err(|_| parse_err("not_launched", field(9)))?,
            p: field(10).parse().map_err(|_| parse_err("p", field(10)))?,
            ci_lo: field(11)
                .parse()
                .map_err(|_| parse_err("ci_lo", field(11)))?,
            ci_hi: field(12)
                .parse()
                .map_err(|_| parse_err("ci_hi", field(12)))?,
        });
    }
    Ok(rows)
}
