//! The common pass/fail record emitted by every check, plus its JSON-lines
//! and CSV encodings.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numkernel::json::complex;

/// Version tag written into every serialized report line.
pub const REPORT_SCHEMA: u32 = 1;

/// One compared quantity.
///
/// Scalar identities carry both sides in `lhs`/`rhs`. Gap checks (matrix or
/// coefficient comparisons) carry the measured gap in `lhs` and zero in `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(with = "complex")]
    pub lhs: Complex64,
    #[serde(with = "complex")]
    pub rhs: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub context: serde_json::Value,
}

impl CheckReport {
    /// Compares `lhs` with `rhs`; the relative error divides by `scale`.
    pub fn compare(
        name: impl Into<String>,
        lhs: Complex64,
        rhs: Complex64,
        scale: f64,
        tolerance: f64,
        context: serde_json::Value,
    ) -> Self {
        let abs_err = (lhs - rhs).norm();
        Self::from_errors(name, lhs, rhs, abs_err, abs_err / scale.max(f64::MIN_POSITIVE), tolerance, context)
    }

    /// A gap check: `gap` is already a nonnegative discrepancy.
    pub fn gap(
        name: impl Into<String>,
        gap: f64,
        scale: f64,
        tolerance: f64,
        context: serde_json::Value,
    ) -> Self {
        Self::from_errors(
            name,
            Complex64::new(gap, 0.0),
            Complex64::new(0.0, 0.0),
            gap,
            gap / scale.max(f64::MIN_POSITIVE),
            tolerance,
            context,
        )
    }

    /// A boolean precondition or structural check.
    pub fn condition(name: impl Into<String>, holds: bool, context: serde_json::Value) -> Self {
        let err = if holds { 0.0 } else { 1.0 };
        Self::from_errors(
            name,
            Complex64::new(err, 0.0),
            Complex64::new(0.0, 0.0),
            err,
            err,
            0.0,
            context,
        )
    }

    fn from_errors(
        name: impl Into<String>,
        lhs: Complex64,
        rhs: Complex64,
        abs_err: f64,
        rel_err: f64,
        tolerance: f64,
        context: serde_json::Value,
    ) -> Self {
        // NaN errors never pass.
        let pass = abs_err <= tolerance || rel_err <= tolerance;
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            tolerance,
            pass,
            context,
        }
    }

    pub fn with_context(mut self, key: &str, value: serde_json::Value) -> Self {
        match &mut self.context {
            serde_json::Value::Object(map) => {
                map.insert(key.to_string(), value);
            }
            other => {
                let previous = std::mem::take(other);
                let mut map = serde_json::Map::new();
                if !previous.is_null() {
                    map.insert("detail".into(), previous);
                }
                map.insert(key.to_string(), value);
                *other = serde_json::Value::Object(map);
            }
        }
        self
    }
}

/// Worst absolute error and overall verdict of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub checks: usize,
    pub failures: usize,
    pub max_abs_err: f64,
}

impl Summary {
    pub fn of(reports: &[CheckReport]) -> Self {
        Summary {
            checks: reports.len(),
            failures: reports.iter().filter(|r| !r.pass).count(),
            max_abs_err: reports.iter().map(|r| r.abs_err).fold(0.0, f64::max),
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Writes one JSON object per line, each tagged with the schema version and
/// the suite name.
pub fn write_jsonl<W: Write>(out: &mut W, suite: &str, reports: &[CheckReport]) -> std::io::Result<()> {
    for r in reports {
        let mut value = serde_json::to_value(r).map_err(std::io::Error::other)?;
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("schema".into(), REPORT_SCHEMA.into());
            map.insert("suite".into(), suite.into());
        }
        serde_json::to_writer(&mut *out, &value).map_err(std::io::Error::other)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
