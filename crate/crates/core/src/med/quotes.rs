use std::fmt;

use serde::Serialize;

use crate::error::{MedError, Result};
use crate::partition::StrikeGrid;

/// Undiscounted forward, call and (optionally) digital quotes on one grid.
///
/// The forward is the call struck at `K_0 = 0`. Construction only checks
/// shapes and finiteness; [`MarketQuotes::validate`] reports arbitrage.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketQuotes {
    grid: StrikeGrid,
    forward: f64,
    calls: Vec<f64>,
    digitals: Option<Vec<f64>>,
}

impl MarketQuotes {
    pub fn new(
        grid: StrikeGrid,
        forward: f64,
        calls: Vec<f64>,
        digitals: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = grid.n();
        if calls.len() != n {
            return Err(MedError::InvalidArgument(format!(
                "{} call quotes for {n} strikes",
                calls.len()
            )));
        }
        if let Some(d) = &digitals {
            if d.len() != n {
                return Err(MedError::InvalidArgument(format!(
                    "{} digital quotes for {n} strikes",
                    d.len()
                )));
            }
        }
        let all_finite = std::iter::once(&forward)
            .chain(&calls)
            .chain(digitals.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(MedError::InvalidArgument("quotes must be finite".into()));
        }
        Ok(Self {
            grid,
            forward,
            calls,
            digitals,
        })
    }

    pub fn grid(&self) -> &StrikeGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn forward(&self) -> f64 {
        self.forward
    }

    pub fn calls(&self) -> &[f64] {
        &self.calls
    }

    pub fn digitals(&self) -> Option<&[f64]> {
        self.digitals.as_deref()
    }

    /// `C_i` for `i = 0..=n`, with `C_0` the forward.
    pub fn call(&self, i: usize) -> f64 {
        if i == 0 {
            self.forward
        } else {
            self.calls[i - 1]
        }
    }

    /// Same quotes with the digitals replaced (or dropped).
    pub fn with_digitals(&self, digitals: Option<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.forward,
            self.calls.clone(),
            digitals,
        )
    }

    /// Call-curve slopes `s_i = (C_{i+1} - C_i) / (K_{i+1} - K_i)`, `i = 0..n`.
    pub fn slopes(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                (self.call(i + 1) - self.call(i)) / (self.grid.strike(i + 1) - self.grid.strike(i))
            })
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_quotes(self)
    }
}

/// One violated no-arbitrage condition. Strike indices are 1-based
/// (`K_1..K_n`, the forward is index 0); buckets are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonPositiveForward { forward: f64 },
    NonPositiveCall { index: usize, value: f64 },
    CallsNotDecreasing { index: usize },
    SlopeOutOfRange { bucket: usize, slope: f64 },
    NotConvex { index: usize },
    DigitalOutOfRange { index: usize, value: f64 },
    DigitalsNotDecreasing { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveForward { forward } => {
                write!(f, "forward {forward} is not positive")
            }
            Violation::NonPositiveCall { index, value } => {
                write!(f, "call {index} is {value}, not positive")
            }
            Violation::CallsNotDecreasing { index } => {
                write!(f, "call {index} is not strictly below call {}", index - 1)
            }
            Violation::SlopeOutOfRange { bucket, slope } => write!(
                f,
                "call slope {slope} over bucket {bucket} is outside (-1, 0)"
            ),
            Violation::NotConvex { index } => {
                write!(f, "call curve is not convex at strike {index}")
            }
            Violation::DigitalOutOfRange { index, value } => {
                write!(f, "digital {index} is {value}, outside (0, 1)")
            }
            Violation::DigitalsNotDecreasing { index } => write!(
                f,
                "digital {index} is not strictly below digital {}",
                index - 1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(MedError::Arbitrage(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks positivity, strict monotonicity and convexity of the calls
/// (slopes in `(-1, 0)` and non-decreasing, the forward included), and
/// strict monotonicity of any digitals inside `(0, 1)`.
pub fn validate_quotes(q: &MarketQuotes) -> ValidationReport {
    let mut violations = Vec::new();
    if !(q.forward > 0.0) {
        violations.push(Violation::NonPositiveForward { forward: q.forward });
    }
    for (k, &c) in q.calls.iter().enumerate() {
        if !(c > 0.0) {
            violations.push(Violation::NonPositiveCall {
                index: k + 1,
                value: c,
            });
        }
    }
    for i in 1..=q.n() {
        if !(q.call(i) < q.call(i - 1)) {
            violations.push(Violation::CallsNotDecreasing { index: i });
        }
    }
    let slopes = q.slopes();
    for (bucket, &slope) in slopes.iter().enumerate() {
        if !(slope > -1.0 && slope < 0.0) {
            violations.push(Violation::SlopeOutOfRange { bucket, slope });
        }
    }
    for (k, w) in slopes.windows(2).enumerate() {
        if w[1] < w[0] {
            violations.push(Violation::NotConvex { index: k + 1 });
        }
    }
    if let Some(d) = &q.digitals {
        for (k, &v) in d.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                violations.push(Violation::DigitalOutOfRange {
                    index: k + 1,
                    value: v,
                });
            }
        }
        for (k, w) in d.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                violations.push(Violation::DigitalsNotDecreasing { index: k + 2 });
            }
        }
    }
    ValidationReport { violations }
}
