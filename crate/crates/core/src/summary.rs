//! Sufficient statistics of a single experiment.

use core::fmt;
use core::str::FromStr;

use crate::special::DegreesOfFreedom;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentDesign {
    OneSample,
    /// Paired measurements, summarised by their differences.
    Paired,
    /// Two independent groups of the same size, pooled variance.
    TwoSampleEqualN,
}

impl ExperimentDesign {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentDesign::OneSample => "one-sample",
            ExperimentDesign::Paired => "paired",
            ExperimentDesign::TwoSampleEqualN => "two-sample",
        }
    }

    /// Degrees of freedom for per-group sample size `n`.
    pub fn degrees_of_freedom(self, n: u64) -> Result<DegreesOfFreedom> {
        check_n(n)?;
        let nu = match self {
            ExperimentDesign::OneSample | ExperimentDesign::Paired => n - 1,
            ExperimentDesign::TwoSampleEqualN => 2 * n - 2,
        };
        DegreesOfFreedom::new(nu as f64)
    }

    /// Factor `f` such that `t = mean / (sd · f)`.
    fn standard_error_factor(self, n: u64) -> f64 {
        match self {
            ExperimentDesign::OneSample | ExperimentDesign::Paired => libm::sqrt(1.0 / n as f64),
            ExperimentDesign::TwoSampleEqualN => libm::sqrt(2.0 / n as f64),
        }
    }
}

impl fmt::Display for ExperimentDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDesign;

impl fmt::Display for UnknownDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of: one-sample, paired, two-sample")
    }
}

impl FromStr for ExperimentDesign {
    type Err = UnknownDesign;

    fn from_str(s: &str) -> core::result::Result<Self, UnknownDesign> {
        match s {
            "one-sample" | "one_sample" => Ok(ExperimentDesign::OneSample),
            "paired" => Ok(ExperimentDesign::Paired),
            "two-sample" | "two_sample" | "two_sample_equal_n" => {
                Ok(ExperimentDesign::TwoSampleEqualN)
            }
            _ => Err(UnknownDesign),
        }
    }
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        Err(Error::domain("n", n as f64, "a sample size of at least 2"))
    } else {
        Ok(())
    }
}

/// Summary of one experiment in measurement units.
///
/// `mean` is `x̄` (one-sample), `d̄` (paired) or `x̄ − ȳ` (two-sample); `sd`
/// is `s`, `s_d` or the pooled `s_p` respectively. `n` is the per-group
/// sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSummary {
    design: ExperimentDesign,
    n: u64,
    mean: f64,
    sd: f64,
}

impl ExperimentSummary {
    pub fn new(design: ExperimentDesign, n: u64, mean: f64, sd: f64) -> Result<Self> {
        check_n(n)?;
        if !mean.is_finite() {
            return Err(Error::domain("mean", mean, "a finite value"));
        }
        if !sd.is_finite() || sd < 0.0 {
            return Err(Error::domain("sd", sd, "a finite value > 0"));
        }
        if sd == 0.0 {
            return Err(Error::DegenerateSample);
        }
        Ok(ExperimentSummary { design, n, mean, sd })
    }

    pub fn one_sample(n: u64, mean: f64, sd: f64) -> Result<Self> {
        Self::new(ExperimentDesign::OneSample, n, mean, sd)
    }

    pub fn paired(n: u64, mean_diff: f64, sd_diff: f64) -> Result<Self> {
        Self::new(ExperimentDesign::Paired, n, mean_diff, sd_diff)
    }

    /// Two-sample summary from per-group statistics; the pooled variance is
    /// `(s_x² + s_y²) / 2`. Unequal group sizes are rejected.
    pub fn two_sample(
        n_x: u64,
        mean_x: f64,
        sd_x: f64,
        n_y: u64,
        mean_y: f64,
        sd_y: f64,
    ) -> Result<Self> {
        if n_x != n_y {
            return Err(Error::UnequalGroups { n1: n_x, n2: n_y });
        }
        for sd in [sd_x, sd_y] {
            if !sd.is_finite() || sd < 0.0 {
                return Err(Error::domain("sd", sd, "a finite value > 0"));
            }
        }
        let pooled = libm::sqrt(0.5 * (sd_x * sd_x + sd_y * sd_y));
        Self::new(ExperimentDesign::TwoSampleEqualN, n_x, mean_x - mean_y, pooled)
    }

    pub fn design(&self) -> ExperimentDesign {
        self.design
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn degrees_of_freedom(&self) -> DegreesOfFreedom {
        // n >= 2 is a construction invariant
        self.design.degrees_of_freedom(self.n).expect("validated sample size")
    }

    /// The design's t statistic and degrees of freedom.
    pub fn t_statistic(&self) -> (f64, DegreesOfFreedom) {
        let t = self.mean / (self.sd * self.design.standard_error_factor(self.n));
        (t, self.degrees_of_freedom())
    }
}

/// Free-function form of [`ExperimentSummary::t_statistic`].
pub fn t_statistic(summary: &ExperimentSummary) -> (f64, DegreesOfFreedom) {
    summary.t_statistic()
}
