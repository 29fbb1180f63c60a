//! Quote files.
//!
//! JSON:
//!
//! ```json
//! { "forward": 100.0, "strikes": [90, 100], "calls": [12.1, 5.3],
//!   "digitals": [0.81, 0.47], "meta": { "asof": "2024-01-02" } }
//! ```
//!
//! CSV, with a header `strike,call[,digital]`. The row with strike `0`
//! carries the forward in its `call` column; its digital cell, if any, is
//! ignored.

use std::path::Path;

use serde::Deserialize;

use crate::med::MarketQuotes;
use crate::partition::StrikeGrid;

/// Problem with a quote file, anchored to a line or field where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<u64>,
    pub field: Option<String>,
    pub message: String,
}

impl ParseError {
    fn at_line(line: u64, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            field: None,
            message: message.into(),
        }
    }

    fn at_field(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuoteFile {
    pub forward: f64,
    pub strikes: Vec<f64>,
    pub calls: Vec<f64>,
    #[serde(default)]
    pub digitals: Option<Vec<f64>>,
    #[serde(default)]
    pub meta: Option<serde_json::Value>,
}

impl QuoteFile {
    pub fn into_quotes(self) -> Result<MarketQuotes, ParseError> {
        let n = self.strikes.len();
        if self.calls.len() != n {
            return Err(ParseError::at_field(
                "calls",
                format!("{} entries for {n} strikes", self.calls.len()),
            ));
        }
        if let Some(d) = &self.digitals {
            if d.len() != n {
                return Err(ParseError::at_field(
                    "digitals",
                    format!("{} entries for {n} strikes", d.len()),
                ));
            }
        }
        let grid = StrikeGrid::new(self.strikes)
            .map_err(|e| ParseError::at_field("strikes", e.to_string()))?;
        MarketQuotes::new(grid, self.forward, self.calls, self.digitals)
            .map_err(|e| ParseError::at_field("calls", e.to_string()))
    }
}

pub fn parse_json(text: &str) -> Result<QuoteFile, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        line: Some(e.line() as u64),
        field: None,
        message: e.to_string(),
    })
}

pub fn parse_csv(text: &str) -> Result<QuoteFile, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ParseError::at_line(1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let strike_col =
        column("strike").ok_or_else(|| ParseError::at_line(1, "missing `strike` column"))?;
    let call_col = column("call").ok_or_else(|| ParseError::at_line(1, "missing `call` column"))?;
    let digital_col = column("digital");

    let mut forward = None;
    let mut strikes = Vec::new();
    let mut calls = Vec::new();
    let mut digitals = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            ParseError::at_line(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |col: usize, name: &str| -> Result<f64, ParseError> {
            let cell = record.get(col).unwrap_or("");
            cell.parse::<f64>().map_err(|_| ParseError {
                line: Some(line),
                field: Some(name.to_string()),
                message: format!("`{cell}` is not a number"),
            })
        };
        let strike = number(strike_col, "strike")?;
        let call = number(call_col, "call")?;
        if strike == 0.0 {
            if forward.replace(call).is_some() {
                return Err(ParseError::at_line(line, "second forward row (strike 0)"));
            }
            continue;
        }
        strikes.push(strike);
        calls.push(call);
        if let Some(col) = digital_col {
            if record.get(col).is_some_and(|c| !c.is_empty()) {
                digitals.push(number(col, "digital")?);
            } else if !digitals.is_empty() {
                return Err(ParseError {
                    line: Some(line),
                    field: Some("digital".into()),
                    message: "missing digital price".into(),
                });
            }
        }
    }
    let forward =
        forward.ok_or_else(|| ParseError::at_field("strike", "no forward row (strike 0)"))?;
    let digitals = if digitals.is_empty() {
        None
    } else if digitals.len() != strikes.len() {
        return Err(ParseError::at_field(
            "digital",
            format!(
                "{} digital prices for {} strikes",
                digitals.len(),
                strikes.len()
            ),
        ));
    } else {
        Some(digitals)
    };
    Ok(QuoteFile {
        forward,
        strikes,
        calls,
        digitals,
        meta: None,
    })
}

/// Parses by extension (`.csv`), otherwise by content.
pub fn parse_quote_text(path: &Path, text: &str) -> Result<QuoteFile, ParseError> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv || !text.trim_start().starts_with('{') {
        parse_csv(text)
    } else {
        parse_json(text)
    }
}
