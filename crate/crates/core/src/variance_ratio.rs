//! Variance ratios `q` from multi-site data.
//!
//! For one measure run at several sites, the variance ratio at a site is the
//! variance of the per-site means across sites divided by the variance of
//! the raw values within that site. Pooling these ratios over measures and
//! sites gives an empirical picture of plausible `q`.
//!
//! Conventions:
//! * variances use the `n − 1` denominator unless
//!   [`VarianceDenominator::Population`] is selected, for both the within-site
//!   and the between-site-means variance;
//! * the between-site variance weights every qualifying site equally and
//!   includes the site whose ratio is being computed;
//! * quantiles interpolate linearly between order statistics at
//!   `h = (n − 1)p` (zero-based), the common "type 7" rule.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiSiteRecord {
    pub site: String,
    pub measure: String,
    pub value: f64,
}

impl MultiSiteRecord {
    pub fn new(site: impl Into<String>, measure: impl Into<String>, value: f64) -> Self {
        MultiSiteRecord { site: site.into(), measure: measure.into(), value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceDenominator {
    /// `n − 1`
    #[default]
    Unbiased,
    /// `n`
    Population,
}

impl VarianceDenominator {
    fn divisor(self, n: usize) -> f64 {
        match self {
            VarianceDenominator::Unbiased => (n - 1) as f64,
            VarianceDenominator::Population => n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    /// Cells with fewer observations are excluded.
    pub min_cell_n: usize,
    pub denominator: VarianceDenominator,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { min_cell_n: 2, denominator: VarianceDenominator::Unbiased }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    EmptyDataset,
    InvalidRecord { index: usize, reason: &'static str },
    InvalidOptions { reason: &'static str },
    /// A measure needs at least two qualifying sites.
    InsufficientSites { measure: String, sites: usize },
    UnknownCell { measure: String, site: String },
    UnknownMeasure { group: String, measure: String },
    /// Zero within-site variance, so `q` is undefined.
    DegenerateCell { measure: String, site: String },
    OverlappingGroups { measure: String },
    EmptyGroupSpec { group: String },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::EmptyDataset => f.write_str("dataset has no records"),
            DataError::InvalidRecord { index, reason } => {
                write!(f, "record {index}: {reason}")
            }
            DataError::InvalidOptions { reason } => write!(f, "invalid options: {reason}"),
            DataError::InsufficientSites { measure, sites } => write!(
                f,
                "measure '{measure}' has {sites} qualifying site(s); at least 2 are needed"
            ),
            DataError::UnknownCell { measure, site } => {
                write!(f, "no qualifying cell for measure '{measure}' at site '{site}'")
            }
            DataError::UnknownMeasure { group, measure } => {
                write!(f, "group '{group}' references unknown measure '{measure}'")
            }
            DataError::DegenerateCell { measure, site } => write!(
                f,
                "measure '{measure}' has zero variance at site '{site}'; q is undefined"
            ),
            DataError::OverlappingGroups { measure } => {
                write!(f, "measure '{measure}' appears in more than one group")
            }
            DataError::EmptyGroupSpec { group } => write!(f, "group '{group}' lists no measures"),
        }
    }
}

impl core::error::Error for DataError {}

#[derive(Debug, Clone, PartialEq)]
struct CellStats {
    n: usize,
    mean: f64,
    var: f64,
}

fn mean_and_var(values: &[f64], denominator: VarianceDenominator) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / denominator.divisor(n))
}

/// A cell dropped at ingest for having too few observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedCell {
    pub measure: String,
    pub site: String,
    pub count: usize,
}

/// Validated long-format multi-site data, indexed by measure then site.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSiteDataset {
    options: IngestOptions,
    cells: BTreeMap<String, BTreeMap<String, CellStats>>,
    excluded: Vec<ExcludedCell>,
    records: usize,
}

impl MultiSiteDataset {
    pub fn from_records<I>(records: I, options: IngestOptions) -> Result<Self, DataError>
    where
        I: IntoIterator<Item = MultiSiteRecord>,
    {
        if options.min_cell_n < 2 {
            return Err(DataError::InvalidOptions { reason: "min_cell_n must be at least 2" });
        }
        let mut raw: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        let mut count = 0;
        for (index, rec) in records.into_iter().enumerate() {
            if rec.site.is_empty() {
                return Err(DataError::InvalidRecord { index, reason: "empty site identifier" });
            }
            if rec.measure.is_empty() {
                return Err(DataError::InvalidRecord { index, reason: "empty measure identifier" });
            }
            if !rec.value.is_finite() {
                return Err(DataError::InvalidRecord { index, reason: "non-finite value" });
            }
            raw.entry(rec.measure).or_default().entry(rec.site).or_default().push(rec.value);
            count += 1;
        }
        if count == 0 {
            return Err(DataError::EmptyDataset);
        }

        let mut cells = BTreeMap::new();
        let mut excluded = Vec::new();
        for (measure, sites) in raw {
            let mut kept = BTreeMap::new();
            for (site, values) in sites {
                if values.len() < options.min_cell_n {
                    excluded.push(ExcludedCell {
                        measure: measure.clone(),
                        site,
                        count: values.len(),
                    });
                    continue;
                }
                let (mean, var) = mean_and_var(&values, options.denominator);
                kept.insert(site, CellStats { n: values.len(), mean, var });
            }
            if kept.len() < 2 {
                return Err(DataError::InsufficientSites { measure, sites: kept.len() });
            }
            cells.insert(measure, kept);
        }
        Ok(MultiSiteDataset { options, cells, excluded, records: count })
    }

    pub fn options(&self) -> IngestOptions {
        self.options
    }

    /// Number of records ingested, including those in excluded cells.
    pub fn record_count(&self) -> usize {
        self.records
    }

    pub fn excluded_cells(&self) -> &[ExcludedCell] {
        &self.excluded
    }

    pub fn measures(&self) -> impl Iterator<Item = &str> {
        self.cells.keys().map(String::as_str)
    }

    pub fn sites(&self, measure: &str) -> impl Iterator<Item = &str> {
        self.cells.get(measure).into_iter().flat_map(|s| s.keys().map(String::as_str))
    }

    /// Number of qualifying (measure, site) cells.
    pub fn cell_count(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    pub fn contains_measure(&self, measure: &str) -> bool {
        self.cells.contains_key(measure)
    }

    fn between_var<'a>(&self, means: impl Iterator<Item = &'a CellStats>) -> f64 {
        let means: Vec<f64> = means.map(|c| c.mean).collect();
        mean_and_var(&means, self.options.denominator).1
    }

    pub fn cell_q(&self, measure: &str, site: &str) -> Result<VarianceRatioCell, DataError> {
        let unknown = || DataError::UnknownCell { measure: measure.into(), site: site.into() };
        let sites = self.cells.get(measure).ok_or_else(unknown)?;
        let cell = sites.get(site).ok_or_else(unknown)?;
        make_cell(measure, site, cell, self.between_var(sites.values()))
    }

    /// Every cell's ratio, restricted to sites accepted by `site_filter`.
    ///
    /// The filter also restricts the between-site variance to the accepted
    /// sites. Measures left with fewer than two sites are listed in
    /// `dropped_measures`; zero-variance cells in `degenerate`.
    pub fn cells(&self, site_filter: Option<&dyn Fn(&str) -> bool>) -> CellTable {
        let mut table = CellTable::default();
        for (measure, sites) in &self.cells {
            let kept: Vec<(&String, &CellStats)> = sites
                .iter()
                .filter(|(site, _)| site_filter.is_none_or(|f| f(site)))
                .collect();
            if kept.len() < 2 {
                table.dropped_measures.push((measure.clone(), kept.len()));
                continue;
            }
            let between = self.between_var(kept.iter().map(|(_, c)| *c));
            for (site, cell) in kept {
                match make_cell(measure, site, cell, between) {
                    Ok(c) => table.cells.push(c),
                    Err(_) => table.degenerate.push((measure.clone(), site.clone())),
                }
            }
        }
        table
    }
}

fn make_cell(
    measure: &str,
    site: &str,
    cell: &CellStats,
    between_var: f64,
) -> Result<VarianceRatioCell, DataError> {
    if cell.var <= 0.0 {
        return Err(DataError::DegenerateCell { measure: measure.into(), site: site.into() });
    }
    Ok(VarianceRatioCell {
        measure: measure.into(),
        site: site.into(),
        n: cell.n,
        within_var: cell.var,
        between_var,
        q: between_var / cell.var,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRatioCell {
    pub measure: String,
    pub site: String,
    pub n: usize,
    pub within_var: f64,
    pub between_var: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellTable {
    pub cells: Vec<VarianceRatioCell>,
    pub degenerate: Vec<(String, String)>,
    pub dropped_measures: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureGroupSpec {
    pub group: String,
    pub measures: Vec<String>,
    pub set_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: String,
    pub set_label: Option<String>,
    pub datapoints: usize,
    pub mean_q: f64,
    /// 2.5% quantile.
    pub q_lo: f64,
    /// 97.5% quantile.
    pub q_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryWarning {
    EmptyGroup { group: String },
    DegenerateCell { measure: String, site: String },
    MeasureDropped { measure: String, sites: usize },
}

impl fmt::Display for SummaryWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummaryWarning::EmptyGroup { group } => {
                write!(f, "group '{group}' has no variance ratios; row omitted")
            }
            SummaryWarning::DegenerateCell { measure, site } => {
                write!(f, "skipping '{measure}' at '{site}': zero within-site variance")
            }
            SummaryWarning::MeasureDropped { measure, sites } => {
                write!(f, "skipping measure '{measure}': only {sites} site(s) after filtering")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<GroupSummary>,
    pub warnings: Vec<SummaryWarning>,
}

/// Label of the row pooling every group.
pub const OVERALL_LABEL: &str = "all";

/// Per-group rows, then one `all <set>` row per set label in order of first
/// appearance, then an overall `all` row.
pub fn summarize(
    dataset: &MultiSiteDataset,
    groups: &[MeasureGroupSpec],
    site_filter: Option<&dyn Fn(&str) -> bool>,
) -> Result<Summary, DataError> {
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    for g in groups {
        if g.measures.is_empty() {
            return Err(DataError::EmptyGroupSpec { group: g.group.clone() });
        }
        for m in &g.measures {
            if !dataset.contains_measure(m) {
                return Err(DataError::UnknownMeasure {
                    group: g.group.clone(),
                    measure: m.clone(),
                });
            }
            if seen.insert(m.as_str(), ()).is_some() {
                return Err(DataError::OverlappingGroups { measure: m.clone() });
            }
        }
    }

    let table = dataset.cells(site_filter);
    let mut summary = Summary::default();
    for (measure, sites) in &table.dropped_measures {
        if seen.contains_key(measure.as_str()) {
            summary
                .warnings
                .push(SummaryWarning::MeasureDropped { measure: measure.clone(), sites: *sites });
        }
    }
    for (measure, site) in &table.degenerate {
        if seen.contains_key(measure.as_str()) {
            summary.warnings.push(SummaryWarning::DegenerateCell {
                measure: measure.clone(),
                site: site.clone(),
            });
        }
    }
    let mut by_measure: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in &table.cells {
        by_measure.entry(c.measure.as_str()).or_default().push(c.q);
    }

    let pooled: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            g.measures
                .iter()
                .filter_map(|m| by_measure.get(m.as_str()))
                .flatten()
                .copied()
                .collect()
        })
        .collect();

    let push = |summary: &mut Summary, label: String, set: Option<String>, qs: Vec<f64>| {
        match summarize_values(label.clone(), set, qs) {
            Some(row) => summary.rows.push(row),
            None => summary.warnings.push(SummaryWarning::EmptyGroup { group: label }),
        }
    };

    for (g, qs) in groups.iter().zip(&pooled) {
        push(&mut summary, g.group.clone(), g.set_label.clone(), qs.clone());
    }
    let mut labels: Vec<&str> = Vec::new();
    for g in groups {
        if let Some(l) = g.set_label.as_deref() {
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
    }
    for label in &labels {
        let qs: Vec<f64> = groups
            .iter()
            .zip(&pooled)
            .filter(|(g, _)| g.set_label.as_deref() == Some(*label))
            .flat_map(|(_, qs)| qs.iter().copied())
            .collect();
        push(&mut summary, alloc::format!("{OVERALL_LABEL} {label}"), Some((*label).into()), qs);
    }
    let all: Vec<f64> = pooled.into_iter().flatten().collect();
    push(&mut summary, OVERALL_LABEL.into(), None, all);
    Ok(summary)
}

fn summarize_values(group: String, set_label: Option<String>, mut qs: Vec<f64>) -> Option<GroupSummary> {
    if qs.is_empty() {
        return None;
    }
    qs.sort_by(f64::total_cmp);
    Some(GroupSummary {
        group,
        set_label,
        datapoints: qs.len(),
        mean_q: qs.iter().sum::<f64>() / qs.len() as f64,
        q_lo: quantile_sorted(&qs, 0.025),
        q_hi: quantile_sorted(&qs, 0.975),
    })
}

/// Type-7 quantile of ascending `sorted` data. Panics on empty input.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Counts of non-negative values in bins `[k·w, (k+1)·w)`, from zero up to
/// the bin holding the largest value.
pub fn histogram(values: &[f64], bin_width: f64) -> Vec<HistogramBin> {
    assert!(bin_width > 0.0, "bin width must be positive");
    let index = |v: f64| libm::floor(v / bin_width).max(0.0) as usize;
    let Some(top) = values.iter().copied().map(index).max() else {
        return Vec::new();
    };
    let mut counts = alloc::vec![0usize; top + 1];
    for &v in values {
        counts[index(v)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lower: k as f64 * bin_width,
            upper: (k + 1) as f64 * bin_width,
            count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(site: &str, measure: &str, value: f64) -> MultiSiteRecord {
        MultiSiteRecord::new(site, measure, value)
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            MultiSiteDataset::from_records(Vec::new(), IngestOptions::default()),
            Err(DataError::EmptyDataset)
        );
    }

    #[test]
    fn two_sites_one_measure() {
        let rows = vec![
            rec("a", "m", 1.0),
            rec("a", "m", 2.0),
            rec("a", "m", 3.0),
            rec("b", "m", 2.0),
            rec("b", "m", 4.0),
            rec("b", "m", 6.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        assert_eq!(ds.cell_count(), 2);
        assert_eq!(ds.record_count(), 6);
        // site means 2 and 4 → between 2; within a = 1, within b = 4
        assert_eq!(ds.cell_q("m", "a").unwrap().q, 2.0);
        assert_eq!(ds.cell_q("m", "b").unwrap().q, 0.5);
    }

    #[test]
    fn single_site_measure_is_rejected() {
        let rows = vec![rec("a", "m", 1.0), rec("a", "m", 2.0)];
        assert!(matches!(
            MultiSiteDataset::from_records(rows, IngestOptions::default()),
            Err(DataError::InsufficientSites { sites: 1, .. })
        ));
    }

    #[test]
    fn sparse_cells_are_excluded() {
        let rows = vec![
            rec("a", "m", 1.0),
            rec("a", "m", 2.0),
            rec("b", "m", 2.0),
            rec("b", "m", 5.0),
            rec("c", "m", 7.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        assert_eq!(ds.cell_count(), 2);
        assert_eq!(
            ds.excluded_cells(),
            &[ExcludedCell { measure: "m".into(), site: "c".into(), count: 1 }]
        );
        assert!(matches!(ds.cell_q("m", "c"), Err(DataError::UnknownCell { .. })));
    }

    #[test]
    fn equal_site_means_give_zero_q() {
        let rows = vec![
            rec("a", "m", 1.0),
            rec("a", "m", 3.0),
            rec("b", "m", 0.0),
            rec("b", "m", 4.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        assert_eq!(ds.cell_q("m", "a").unwrap().q, 0.0);
        assert_eq!(ds.cell_q("m", "b").unwrap().q, 0.0);
    }

    #[test]
    fn hand_computed_quarter() {
        // site means 0, 1, 2 → between-site variance 1; site c within var 4
        let rows = vec![
            rec("a", "m", -1.0),
            rec("a", "m", 1.0),
            rec("b", "m", 0.0),
            rec("b", "m", 2.0),
            rec("c", "m", 0.0),
            rec("c", "m", 2.0),
            rec("c", "m", 4.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        let cell = ds.cell_q("m", "c").unwrap();
        assert_eq!(cell.between_var, 1.0);
        assert_eq!(cell.within_var, 4.0);
        assert_eq!(cell.q, 0.25);
    }

    #[test]
    fn degenerate_cell() {
        let rows = vec![
            rec("a", "m", 1.0),
            rec("a", "m", 1.0),
            rec("b", "m", 0.0),
            rec("b", "m", 4.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        assert!(matches!(ds.cell_q("m", "a"), Err(DataError::DegenerateCell { .. })));
        let table = ds.cells(None);
        assert_eq!(table.cells.len(), 1);
        assert_eq!(table.degenerate, vec![("m".into(), "a".into())]);
    }

    #[test]
    fn invalid_records() {
        let opts = IngestOptions::default();
        let bad = vec![rec("a", "m", 1.0), rec("", "m", 1.0)];
        assert_eq!(
            MultiSiteDataset::from_records(bad, opts),
            Err(DataError::InvalidRecord { index: 1, reason: "empty site identifier" })
        );
        let bad = vec![rec("a", "m", f64::NAN)];
        assert!(matches!(
            MultiSiteDataset::from_records(bad, opts),
            Err(DataError::InvalidRecord { index: 0, .. })
        ));
        let opts = IngestOptions { min_cell_n: 1, ..opts };
        assert!(matches!(
            MultiSiteDataset::from_records(vec![rec("a", "m", 1.0)], opts),
            Err(DataError::InvalidOptions { .. })
        ));
    }

    #[test]
    fn quantile_rule() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 5.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.1), 1.4);
        assert_eq!(quantile_sorted(&[7.0], 0.975), 7.0);
    }

    #[test]
    fn single_value_group() {
        let s = summarize_values("g".into(), None, vec![0.3]).unwrap();
        assert_eq!((s.mean_q, s.q_lo, s.q_hi, s.datapoints), (0.3, 0.3, 0.3, 1));
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.0, 0.005, 0.015, 0.031], 0.01);
        let counts: Vec<usize> = h.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![2, 1, 0, 1]);
        assert!(histogram(&[], 0.01).is_empty());
    }

    #[test]
    fn group_validation() {
        let rows = vec![
            rec("a", "m", 1.0),
            rec("a", "m", 3.0),
            rec("b", "m", 0.0),
            rec("b", "m", 5.0),
        ];
        let ds = MultiSiteDataset::from_records(rows, IngestOptions::default()).unwrap();
        let g = |name: &str, ms: &[&str]| MeasureGroupSpec {
            group: name.into(),
            measures: ms.iter().map(|s| (*s).into()).collect(),
            set_label: None,
        };
        assert!(matches!(
            summarize(&ds, &[g("x", &["nope"])], None),
            Err(DataError::UnknownMeasure { .. })
        ));
        assert!(matches!(
            summarize(&ds, &[g("x", &["m"]), g("y", &["m"])], None),
            Err(DataError::OverlappingGroups { .. })
        ));
        assert!(matches!(summarize(&ds, &[g("x", &[])], None), Err(DataError::EmptyGroupSpec { .. })));

        let only_a = |s: &str| s == "a";
        let out = summarize(&ds, &[g("x", &["m"])], Some(&only_a)).unwrap();
        assert!(out.rows.is_empty());
        assert!(out.warnings.contains(&SummaryWarning::EmptyGroup { group: "x".into() }));
        assert!(out
            .warnings
            .contains(&SummaryWarning::MeasureDropped { measure: "m".into(), sites: 1 }));
    }
}
