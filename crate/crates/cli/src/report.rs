//! Run reports and their JSON and CSV renderings.

use std::io::Write;

use anyhow::Result;
use bidder_select::capacity::SelectionOutcome;
use bidder_select::io::instance_to_json;
use bidder_select::Instance64;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Absolute slack below which a claimed factor counts as violated.
pub const FACTOR_TOLERANCE: f64 = 1e-9;

pub const CSV_COLUMNS: [&str; 10] = [
    "instance_hash",
    "algorithm",
    "n",
    "m_or_deltastar",
    "revenue",
    "cost",
    "profit",
    "claimed_factor",
    "observed_factor",
    "millis",
];

/// SHA-256 of the canonical instance JSON, hex encoded.
pub fn instance_digest(instance: &Instance64) -> String {
    hex::encode(Sha256::digest(instance_to_json(instance).as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub instance_hash: String,
    pub algorithm: String,
    pub n: usize,
    pub m_or_deltastar: Option<f64>,
    pub selected_ids: Vec<String>,
    pub mechanism: String,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
    pub claimed_factor: Option<f64>,
    pub oracle_value: Option<f64>,
    pub observed_factor: Option<f64>,
    pub millis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn from_outcome(
        algorithm: impl Into<String>,
        instance: &Instance64,
        hash: &str,
        outcome: &SelectionOutcome<f64>,
        param: Option<f64>,
    ) -> Self {
        Self {
            instance_hash: hash.to_string(),
            algorithm: algorithm.into(),
            n: instance.len(),
            m_or_deltastar: param,
            selected_ids: instance.ids(&outcome.selected),
            mechanism: outcome.mechanism.describe(instance),
            revenue: outcome.revenue,
            cost: outcome.cost,
            profit: outcome.profit,
            claimed_factor: outcome.guarantee,
            oracle_value: None,
            observed_factor: None,
            millis: 0.0,
            slack: None,
            pass: None,
        }
    }

    /// Attaches an oracle optimum and checks `claimed * profit >= oracle`.
    /// Profit equals revenue on instances without costs.
    pub fn with_oracle(mut self, oracle: f64) -> Self {
        let value = self.profit;
        self.oracle_value = Some(oracle);
        self.observed_factor = Some(oracle / value.max(f64::MIN_POSITIVE));
        if let Some(claimed) = self.claimed_factor {
            let slack = claimed * value - oracle;
            self.slack = Some(slack);
            self.pass = Some(slack >= -FACTOR_TOLERANCE);
        }
        self
    }

    pub fn with_millis(mut self, millis: f64) -> Self {
        self.millis = millis;
        self
    }

    pub fn violates(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub instance_digest: Option<String>,
    pub seed: u64,
    pub generator: &'static str,
    pub rows: Vec<ReportRow>,
    pub violations: usize,
}

impl RunReport {
    pub fn new(command: String, instance_digest: Option<String>, seed: u64, rows: Vec<ReportRow>) -> Self {
        let violations = rows.iter().filter(|r| r.violates()).count();
        Self { command, instance_digest, seed, generator: bidder_select::generate::GENERATOR_NAME, rows, violations }
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// One line per row; `checks` appends the slack and pass columns.
    pub fn write_csv(&self, out: &mut dyn Write, checks: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
        if checks {
            header.extend(["slack", "pass"]);
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![
                row.instance_hash.clone(),
                row.algorithm.clone(),
                row.n.to_string(),
                opt(row.m_or_deltastar),
                row.revenue.to_string(),
                row.cost.to_string(),
                row.profit.to_string(),
                opt(row.claimed_factor),
                opt(row.observed_factor),
                row.millis.to_string(),
            ];
            if checks {
                record.push(opt(row.slack));
                record.push(row.pass.map_or(String::new(), |p| p.to_string()));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bidder_select::capacity::Mechanism;
    use bidder_select::{Bidder, ValueDistribution};

    fn instance() -> Instance64 {
        let d = ValueDistribution::point_mass(2.0).unwrap();
        Instance64::new(vec![Bidder::new("a", d)], None).unwrap()
    }

    #[test]
    fn digest_is_stable_hex() {
        let inst = instance();
        let h = instance_digest(&inst);
        assert_eq!(h.len(), 64);
        assert_eq!(h, instance_digest(&inst.clone()));
    }

    #[test]
    fn observed_factor_and_violation() {
        let inst = instance();
        let out = SelectionOutcome::revenue_only(vec![0], Mechanism::AnonymousPrice(2.0), 1.0, Some(2.0));
        let ok = ReportRow::from_outcome("x", &inst, "h", &out, None).with_oracle(2.0);
        assert_eq!(ok.observed_factor, Some(2.0));
        assert!(!ok.violates());
        let bad = ReportRow::from_outcome("x", &inst, "h", &out, None).with_oracle(2.5);
        assert!(bad.violates());
    }

    #[test]
    fn csv_has_fixed_columns() {
        let inst = instance();
        let out = SelectionOutcome::revenue_only(vec![0], Mechanism::Reserve(2.0), 2.0, None);
        let report = RunReport::new("t".into(), None, 0, vec![ReportRow::from_outcome("ar", &inst, "h", &out, None)]);
        let mut buf = Vec::new();
        report.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "h,ar,1,,2,0,2,,,0");
    }
}
