//! The result-row schema shared by every harness output.

use anyhow::{bail, Context};

/// Format tag written as the first line of every result file.
pub const FORMAT_VERSION: &str = "# mp-bench result rows v1";

/// Column header; the field order is part of the file format.
pub const CSV_HEADER: &str = "planner,scenario,d,mu,m,n_free,n_sampled,seed,strategy,nn_kind,\
res_fraction,t_nn_ns,t_cd_ns,chi,nn,rnn,knn,ap,cd,lp,lp_a,lp_b,cd_in_lp,cost,success";

/// One trial's outcome: identification columns, wall times, the NN-to-CD
/// ratio, the primitive counts, and the solution cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub planner: String,
    pub scenario: String,
    pub d: usize,
    pub mu: f64,
    pub m: usize,
    pub n_free: usize,
    pub n_sampled: usize,
    pub seed: u64,
    pub strategy: String,
    pub nn_kind: String,
    pub res_fraction: f64,
    pub t_nn_ns: u64,
    pub t_cd_ns: u64,
    pub chi: f64,
    pub nn: u64,
    pub rnn: u64,
    pub knn: u64,
    pub ap: u64,
    pub cd: u64,
    pub lp: u64,
    pub lp_a: u64,
    pub lp_b: u64,
    pub cd_in_lp: u64,
    pub cost: f64,
    pub success: bool,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.planner,
            self.scenario,
            self.d,
            self.mu,
            self.m,
            self.n_free,
            self.n_sampled,
            self.seed,
            self.strategy,
            self.nn_kind,
            self.res_fraction,
            self.t_nn_ns,
            self.t_cd_ns,
            self.chi,
            self.nn,
            self.rnn,
            self.knn,
            self.ap,
            self.cd,
            self.lp,
            self.lp_a,
            self.lp_b,
            self.cd_in_lp,
            self.cost,
            self.success
        )
    }

    pub fn from_csv(line: &str) -> anyhow::Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 25 {
            bail!("expected 25 columns, got {}", f.len());
        }
        let ctx = |i: usize| format!("column {i}");
        Ok(ResultRow {
            planner: f[0].to_string(),
            scenario: f[1].to_string(),
            d: f[2].parse().with_context(|| ctx(2))?,
            mu: f[3].parse().with_context(|| ctx(3))?,
            m: f[4].parse().with_context(|| ctx(4))?,
            n_free: f[5].parse().with_context(|| ctx(5))?,
            n_sampled: f[6].parse().with_context(|| ctx(6))?,
            seed: f[7].parse().with_context(|| ctx(7))?,
            strategy: f[8].to_string(),
            nn_kind: f[9].to_string(),
            res_fraction: f[10].parse().with_context(|| ctx(10))?,
            t_nn_ns: f[11].parse().with_context(|| ctx(11))?,
            t_cd_ns: f[12].parse().with_context(|| ctx(12))?,
            chi: f[13].parse().with_context(|| ctx(13))?,
            nn: f[14].parse().with_context(|| ctx(14))?,
            rnn: f[15].parse().with_context(|| ctx(15))?,
            knn: f[16].parse().with_context(|| ctx(16))?,
            ap: f[17].parse().with_context(|| ctx(17))?,
            cd: f[18].parse().with_context(|| ctx(18))?,
            lp: f[19].parse().with_context(|| ctx(19))?,
            lp_a: f[20].parse().with_context(|| ctx(20))?,
            lp_b: f[21].parse().with_context(|| ctx(21))?,
            cd_in_lp: f[22].parse().with_context(|| ctx(22))?,
            cost: f[23].parse().with_context(|| ctx(23))?,
            success: f[24].parse().with_context(|| ctx(24))?,
        })
    }

    /// The exact count columns, used by determinism checks.
    pub fn count_columns(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n_free,
            self.n_sampled,
            self.nn,
            self.rnn,
            self.knn,
            self.ap,
            self.cd,
            self.lp,
            self.lp_a,
            self.lp_b,
            self.cd_in_lp
        )
    }
}

/// Parses a result file produced by the harness (version line, header,
/// then rows).
pub fn parse_rows(text: &str) -> anyhow::Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line == CSV_HEADER || line.trim().is_empty() {
            continue;
        }
        rows.push(ResultRow::from_csv(line)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRow {
        ResultRow {
            planner: "sprm".into(),
            scenario: "hypercube".into(),
            d: 4,
            mu: 0.25,
            m: 0,
            n_free: 1602,
            n_sampled: 2131,
            seed: 3,
            strategy: "radial".into(),
            nn_kind: "linear".into(),
            res_fraction: 0.01,
            t_nn_ns: 123456,
            t_cd_ns: 654321,
            chi: 0.18867,
            nn: 0,
            rnn: 1602,
            knn: 0,
            ap: 0,
            cd: 2131,
            lp: 17000,
            lp_a: 0,
            lp_b: 0,
            cd_in_lp: 98000,
            cost: 1.7320508,
            success: true,
        }
    }

    #[test]
    fn csv_round_trip() {
        let row = sample();
        let back = ResultRow::from_csv(&row.to_csv()).unwrap();
        assert_eq!(row, back);
    }

    #[test]
    fn infinite_cost_round_trips() {
        let mut row = sample();
        row.cost = f64::INFINITY;
        row.success = false;
        let back = ResultRow::from_csv(&row.to_csv()).unwrap();
        assert!(back.cost.is_infinite());
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(CSV_HEADER.split(',').count(), 25);
        assert!(CSV_HEADER.starts_with("planner,scenario,d,mu,m,"));
        assert!(CSV_HEADER.ends_with("cd_in_lp,cost,success"));
    }

    #[test]
    fn parse_skips_version_and_header() {
        let text = format!("{FORMAT_VERSION}\n{CSV_HEADER}\n{}\n", sample().to_csv());
        let rows = parse_rows(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0], sample());
    }
}
