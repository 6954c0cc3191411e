//! Rows recording each checked inequality: which one, at which parameters,
//! the computed value, the bound, and the verdict.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported but not asserted.
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub anchor: String,
    pub params: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    /// Distance to the bound on the allowed side; negative when violated.
    pub margin: Option<f64>,
}

impl LedgerRow {
    /// Checks `value ≤ bound` up to `slack`.
    pub fn at_most(anchor: &str, params: String, value: f64, bound: f64, slack: f64) -> Self {
        let margin = bound - value;
        Self {
            anchor: anchor.into(),
            params,
            value,
            bound: Some(bound),
            verdict: Verdict::of(margin >= -slack),
            margin: Some(margin),
        }
    }

    /// Checks `value < bound` strictly.
    pub fn below(anchor: &str, params: String, value: f64, bound: f64) -> Self {
        let margin = bound - value;
        Self {
            anchor: anchor.into(),
            params,
            value,
            bound: Some(bound),
            verdict: Verdict::of(margin > 0.0),
            margin: Some(margin),
        }
    }

    /// Checks `value ≥ bound` up to `slack`.
    pub fn at_least(anchor: &str, params: String, value: f64, bound: f64, slack: f64) -> Self {
        let margin = value - bound;
        Self {
            anchor: anchor.into(),
            params,
            value,
            bound: Some(bound),
            verdict: Verdict::of(margin >= -slack),
            margin: Some(margin),
        }
    }

    /// Checks `lo ≤ value ≤ hi`; `bound` records the violated (or nearer)
    /// endpoint.
    pub fn within(anchor: &str, params: String, value: f64, lo: f64, hi: f64) -> Self {
        let (bound, margin) = if value - lo < hi - value { (lo, value - lo) } else { (hi, hi - value) };
        Self {
            anchor: anchor.into(),
            params,
            value,
            bound: Some(bound),
            verdict: Verdict::of(lo <= value && value <= hi),
            margin: Some(margin),
        }
    }

    pub fn info(anchor: &str, params: String, value: f64) -> Self {
        Self {
            anchor: anchor.into(),
            params,
            value,
            bound: None,
            verdict: Verdict::Info,
            margin: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

pub fn any_failed(rows: &[LedgerRow]) -> bool {
    rows.iter().any(LedgerRow::failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_margins() {
        let r = LedgerRow::at_most("x", String::new(), 1.0, 2.0, 0.0);
        assert_eq!((r.verdict, r.margin), (Verdict::Pass, Some(1.0)));
        let r = LedgerRow::at_least("x", String::new(), 1.0, 2.0, 0.0);
        assert_eq!((r.verdict, r.margin), (Verdict::Fail, Some(-1.0)));
        let r = LedgerRow::at_least("x", String::new(), 1.0 - 1e-12, 1.0, 1e-8);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = LedgerRow::within("x", String::new(), -0.5, -0.35, -0.15);
        assert_eq!((r.verdict, r.bound), (Verdict::Fail, Some(-0.35)));
        assert!(r.margin.unwrap() < 0.0);
        assert!(any_failed(&[r]));
    }
}
