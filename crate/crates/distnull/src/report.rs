//! Output documents and their json, csv and human renderings.
//!
//! Every document carries `schema_version` and `command`. Human output
//! prints numbers with six significant digits; json keeps full precision and
//! contains every number shown in human form.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::RejectedRow;
use crate::error::CliError;
use crate::mc::{DrawMode, ReplicationVariant, Tail};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn verdict(significant: bool) -> &'static str {
    if significant {
        "significant"
    } else {
        "not significant"
    }
}

pub trait Report: Serialize + DeserializeOwned {
    fn human(&self) -> String;
    fn csv(&self) -> Result<String, CliError>;

    fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => Ok(self.json()),
            OutputFormat::Csv => self.csv(),
            OutputFormat::Human => Ok(self.human()),
        }
    }
}

fn csv_rows<S: Serialize>(rows: &[S]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSection {
    pub p_value: f64,
    pub z_crit: f64,
    pub t_crit: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSection {
    pub p_value: f64,
    pub z_crit: f64,
    pub t_crit: f64,
    pub asymptotic_bound_z: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: String,
    pub design: Option<String>,
    pub t_stat: f64,
    pub nu: f64,
    pub n: u64,
    pub alpha: f64,
    pub q: f64,
    pub point: PointSection,
    pub distributional: DistSection,
}

#[derive(Serialize)]
struct TestCsvRow<'a> {
    design: Option<&'a str>,
    t_stat: f64,
    nu: f64,
    n: u64,
    alpha: f64,
    q: f64,
    point_p_value: f64,
    point_z_crit: f64,
    point_t_crit: f64,
    point_significant: bool,
    dist_p_value: f64,
    dist_z_crit: f64,
    dist_t_crit: f64,
    dist_asymptotic_bound_z: f64,
    dist_significant: bool,
}

impl Report for TestReport {
    fn human(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.design {
            let _ = writeln!(s, "design: {d}");
        }
        let _ = writeln!(
            s,
            "t = {}, nu = {}, n = {}, alpha = {}, q = {}",
            fmt_g(self.t_stat),
            fmt_g(self.nu),
            self.n,
            fmt_g(self.alpha),
            fmt_g(self.q)
        );
        let p = &self.point;
        let _ = writeln!(
            s,
            "point-form null:     p = {}, t_crit = {}, z_crit = {}: {}",
            fmt_g(p.p_value),
            fmt_g(p.t_crit),
            fmt_g(p.z_crit),
            verdict(p.significant)
        );
        let d = &self.distributional;
        let _ = writeln!(
            s,
            "distributional null: p = {}, t_crit = {}, z_crit = {}: {}",
            fmt_g(d.p_value),
            fmt_g(d.t_crit),
            fmt_g(d.z_crit),
            verdict(d.significant)
        );
        let _ = writeln!(s, "large-n bound on |z| for significance: {}", fmt_g(d.asymptotic_bound_z));
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        csv_rows(&[TestCsvRow {
            design: self.design.as_deref(),
            t_stat: self.t_stat,
            nu: self.nu,
            n: self.n,
            alpha: self.alpha,
            q: self.q,
            point_p_value: self.point.p_value,
            point_z_crit: self.point.z_crit,
            point_t_crit: self.point.t_crit,
            point_significant: self.point.significant,
            dist_p_value: self.distributional.p_value,
            dist_z_crit: self.distributional.z_crit,
            dist_t_crit: self.distributional.t_crit,
            dist_asymptotic_bound_z: self.distributional.asymptotic_bound_z,
            dist_significant: self.distributional.significant,
        }])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateReport {
    pub schema_version: u32,
    pub command: String,
    pub t1: f64,
    pub nu: f64,
    pub n: u64,
    pub alpha: f64,
    pub q: f64,
    /// Probability that a repeat is significant in the same direction.
    pub replication_probability: f64,
    /// Power-based point-form estimate, for comparison.
    pub power_estimate: f64,
    pub power_quantile: String,
}

impl Report for ReplicateReport {
    fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "t1 = {}, nu = {}, n = {}, alpha = {}, q = {}",
            fmt_g(self.t1),
            fmt_g(self.nu),
            self.n,
            fmt_g(self.alpha),
            fmt_g(self.q)
        );
        let _ = writeln!(s, "replication probability (distributional): {}", fmt_g(self.replication_probability));
        let _ = writeln!(
            s,
            "power-based estimate (point-form, {}): {}",
            self.power_quantile,
            fmt_g(self.power_estimate)
        );
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Row<'a> {
            t1: f64,
            nu: f64,
            n: u64,
            alpha: f64,
            q: f64,
            replication_probability: f64,
            power_estimate: f64,
            power_quantile: &'a str,
        }
        csv_rows(&[Row {
            t1: self.t1,
            nu: self.nu,
            n: self.n,
            alpha: self.alpha,
            q: self.q,
            replication_probability: self.replication_probability,
            power_estimate: self.power_estimate,
            power_quantile: &self.power_quantile,
        }])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSection {
    pub q1: f64,
    pub q2: f64,
    pub gamma: f64,
    pub q1_censored: bool,
    pub q2_censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThumbSection {
    pub t_bound: f64,
    pub p_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub schema_version: u32,
    pub command: String,
    /// `interval` or `no-solution`.
    pub status: String,
    pub t1: f64,
    pub nu: f64,
    pub n: u64,
    pub alpha: f64,
    pub beta: f64,
    pub q_ceiling: f64,
    pub r_min: f64,
    pub q_at_min: f64,
    pub interval: Option<IntervalSection>,
    pub rule_of_thumb: ThumbSection,
}

impl Report for RangeReport {
    fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "t1 = {}, nu = {}, n = {}, alpha = {}, beta = {}",
            fmt_g(self.t1),
            fmt_g(self.nu),
            self.n,
            fmt_g(self.alpha),
            fmt_g(self.beta)
        );
        let _ = writeln!(s, "minimum criterion r_min = {} at q = {}", fmt_g(self.r_min), fmt_g(self.q_at_min));
        match &self.interval {
            Some(iv) => {
                let flag = |c: bool| if c { " (censored)" } else { "" };
                let _ = writeln!(s, "q1 = {}{}", fmt_g(iv.q1), flag(iv.q1_censored));
                let _ = writeln!(
                    s,
                    "q2 = {}{}",
                    fmt_g(iv.q2),
                    if iv.q2_censored { " (censored at the q ceiling)" } else { "" }
                );
                let _ = writeln!(s, "generalisability gamma = {}", fmt_g(iv.gamma));
            }
            None => {
                let _ = writeln!(s, "no solution: |t1| is below r_min for every q");
            }
        }
        let _ = writeln!(
            s,
            "rule-of-thumb bound: |t| >= {}, p <= {}",
            fmt_g(self.rule_of_thumb.t_bound),
            fmt_g(self.rule_of_thumb.p_threshold)
        );
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Row<'a> {
            status: &'a str,
            t1: f64,
            nu: f64,
            n: u64,
            alpha: f64,
            beta: f64,
            q_ceiling: f64,
            r_min: f64,
            q_at_min: f64,
            q1: Option<f64>,
            q2: Option<f64>,
            gamma: Option<f64>,
            q1_censored: Option<bool>,
            q2_censored: Option<bool>,
            thumb_t_bound: f64,
            thumb_p_threshold: f64,
        }
        let iv = self.interval.as_ref();
        csv_rows(&[Row {
            status: &self.status,
            t1: self.t1,
            nu: self.nu,
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            q_ceiling: self.q_ceiling,
            r_min: self.r_min,
            q_at_min: self.q_at_min,
            q1: iv.map(|i| i.q1),
            q2: iv.map(|i| i.q2),
            gamma: iv.map(|i| i.gamma),
            q1_censored: iv.map(|i| i.q1_censored),
            q2_censored: iv.map(|i| i.q2_censored),
            thumb_t_bound: self.rule_of_thumb.t_bound,
            thumb_p_threshold: self.rule_of_thumb.p_threshold,
        }])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThumbReport {
    pub schema_version: u32,
    pub command: String,
    pub alpha: f64,
    pub nu: f64,
    pub upper_quantile: f64,
    /// `t_bound / upper_quantile`, always `3√3/2`.
    pub ratio: f64,
    pub t_bound: f64,
    pub p_threshold: f64,
}

impl Report for ThumbReport {
    fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alpha = {}, nu = {}", fmt_g(self.alpha), fmt_g(self.nu));
        let _ = writeln!(
            s,
            "|t| >= {} = {} x {}",
            fmt_g(self.t_bound),
            fmt_g(self.ratio),
            fmt_g(self.upper_quantile)
        );
        let _ = writeln!(s, "equivalent p-value threshold: {}", fmt_g(self.p_threshold));
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Row {
            alpha: f64,
            nu: f64,
            upper_quantile: f64,
            ratio: f64,
            t_bound: f64,
            p_threshold: f64,
        }
        csv_rows(&[Row {
            alpha: self.alpha,
            nu: self.nu,
            upper_quantile: self.upper_quantile,
            ratio: self.ratio,
            t_bound: self.t_bound,
            p_threshold: self.p_threshold,
        }])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRowOut {
    pub group: String,
    pub set: Option<String>,
    pub datapoints: usize,
    pub mean_q: f64,
    pub q025: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedCellOut {
    pub measure: String,
    pub site: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QestReport {
    pub schema_version: u32,
    pub command: String,
    pub records: usize,
    pub cells: usize,
    pub rejected_rows: Vec<RejectedRow>,
    pub excluded_cells: Vec<ExcludedCellOut>,
    pub groups: Vec<GroupRowOut>,
    pub warnings: Vec<String>,
}

impl Report for QestReport {
    fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "records: {}, cells: {}", self.records, self.cells);
        let width = self.groups.iter().map(|g| g.group.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(s, "{:<width$}  {:>10}  {:>10}  {:>10}  {:>10}", "group", "datapoints", "mean_q", "q025", "q975");
        for g in &self.groups {
            let _ = writeln!(
                s,
                "{:<width$}  {:>10}  {:>10}  {:>10}  {:>10}",
                g.group,
                g.datapoints,
                fmt_g(g.mean_q),
                fmt_g(g.q025),
                fmt_g(g.q975)
            );
        }
        for r in &self.rejected_rows {
            let _ = writeln!(s, "rejected line {}: {}", r.line, r.reason);
        }
        for c in &self.excluded_cells {
            let _ = writeln!(s, "excluded cell {} / {} ({} values)", c.measure, c.site, c.count);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Row<'a> {
            group: &'a str,
            datapoints: usize,
            mean_q: f64,
            q025: f64,
            q975: f64,
        }
        let rows: Vec<Row> = self
            .groups
            .iter()
            .map(|g| Row { group: &g.group, datapoints: g.datapoints, mean_q: g.mean_q, q025: g.q025, q975: g.q975 })
            .collect();
        if rows.is_empty() {
            return Ok("group,datapoints,mean_q,q025,q975\n".into());
        }
        csv_rows(&rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub design: String,
    pub n: u64,
    pub q_true: f64,
    pub q_test: Option<f64>,
    pub t1: Option<f64>,
    pub variant: Option<ReplicationVariant>,
    pub tail: Option<Tail>,
    pub draw: DrawMode,
    pub sigma: f64,
    pub alpha: f64,
    /// Closed-form value the rate estimates, when one exists.
    pub expected: Option<f64>,
    pub rate: f64,
    pub mc_se: f64,
    pub trials: u64,
    pub hits: u64,
    pub wrong_sign: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: String,
    /// `fpr` or `replication`.
    pub kind: String,
    pub seed: u64,
    pub rows: Vec<SimRow>,
}

impl Report for SimulateReport {
    fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} simulation, seed {}", self.kind, self.seed);
        for r in &self.rows {
            let mut line = format!("{} n = {}, q = {}", r.design, r.n, fmt_g(r.q_true));
            if let Some(q) = r.q_test {
                let _ = write!(line, ", q_test = {}", fmt_g(q));
            }
            if let Some(t) = r.t1 {
                let _ = write!(line, ", t1 = {}", fmt_g(t));
            }
            let _ = write!(line, ": rate = {} ± {}", fmt_g(r.rate), fmt_g(r.mc_se));
            if let Some(e) = r.expected {
                let _ = write!(line, " (formula {})", fmt_g(e));
            }
            let _ = write!(line, " over {} trials", r.trials);
            let _ = writeln!(s, "{line}");
        }
        s
    }

    fn csv(&self) -> Result<String, CliError> {
        csv_rows(&self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.05), "0.05");
        assert_eq!(fmt_g(2.683_281_572_999_748), "2.68328");
        assert_eq!(fmt_g(19.0), "19");
        assert_eq!(fmt_g(4.151_28e-4), "0.000415128");
        assert_eq!(fmt_g(4.230_7e-6), "4.2307e-06");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(999_999.7), "1e+06");
        assert_eq!(fmt_g(-0.5), "-0.5");
        assert_eq!(fmt_g(1000.0), "1000");
    }
}
