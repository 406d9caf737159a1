//! Sample set with cached order statistics.

use super::RiskError;

/// A batch of cost samples with cached ascending order statistics and an
/// optional declared support bound `Z <= b`. Immutable after construction,
/// so estimators can share it across threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    sorted: Vec<f64>,
    support_bound: Option<f64>,
}

impl SampleSet {
    /// Builds a sample set, rejecting empty input and NaN samples.
    pub fn new(values: Vec<f64>) -> Result<Self, RiskError> {
        Self::build(values, None)
    }

    /// Builds a sample set whose samples are known to satisfy `Z <= bound`.
    pub fn with_support_bound(values: Vec<f64>, bound: f64) -> Result<Self, RiskError> {
        Self::build(values, Some(bound))
    }

    fn build(values: Vec<f64>, support_bound: Option<f64>) -> Result<Self, RiskError> {
        if values.is_empty() {
            return Err(RiskError::Empty);
        }
        for (index, v) in values.iter().enumerate() {
            if v.is_nan() {
                return Err(RiskError::NanSample { index });
            }
            if let Some(b) = support_bound {
                if *v > b {
                    return Err(RiskError::ExceedsSupportBound {
                        index,
                        value: *v,
                        bound: b,
                    });
                }
            }
        }
        let mut sorted = values.clone();
        // Total order is safe: NaNs were rejected above. Stable sort keeps
        // tied values in input order, which keeps re-runs bit-identical.
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN after validation"));
        Ok(Self {
            values,
            sorted,
            support_bound,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    /// Samples in insertion order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ascending order statistics `O_1..O_N`.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn support_bound(&self) -> Option<f64> {
        self.support_bound
    }

    /// Re-declares the support bound, revalidating the samples against it.
    pub fn bind_support(self, bound: f64) -> Result<Self, RiskError> {
        Self::build(self.values, Some(bound))
    }

    /// Parses the sample file format: one cost per line, optional `z` header,
    /// blank lines ignored.
    pub fn from_csv_str(text: &str) -> Result<Self, RiskError> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line == "z") {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|e| RiskError::Parse(format!("line {}: {e}", lineno + 1)))?;
            values.push(v);
        }
        Self::new(values)
    }

    /// Serializes in the sample file format with a `z` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z\n");
        for v in &self.values {
            out.push_str(&format!("{v:?}\n"));
        }
        out
    }
}
