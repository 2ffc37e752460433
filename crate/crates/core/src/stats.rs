//! Batch summaries of run metrics as CSV.

use crate::files::RunMetrics;
use std::collections::BTreeMap;
use std::fmt::Write;

pub const CSV_HEADER: &str = "dim,mode,policy,n,runs,successes,rounds_min,rounds_max,rounds_mean,\
max_rounds_minus_n,rounds_within_n_plus_1,erosions_min,erosions_max,erosions_n_minus_1,rule1,rule2,rule3";

/// One CSV row per (dim, mode, policy, n), sorted by that key.
pub fn summarize(metrics: &[RunMetrics]) -> String {
    let mut groups: BTreeMap<(String, String, String, usize), Vec<&RunMetrics>> = BTreeMap::new();
    for m in metrics {
        let key = (m.dim.to_string(), m.mode.to_string(), m.policy.to_string(), m.n);
        groups.entry(key).or_default().push(m);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for ((dim, mode, policy, n), runs) in groups {
        let rounds: Vec<u64> = runs.iter().map(|m| m.rounds).collect();
        let erosions: Vec<u64> = runs.iter().map(|m| m.erosions).collect();
        let rmin = *rounds.iter().min().expect("group is nonempty");
        let rmax = *rounds.iter().max().expect("group is nonempty");
        let mean = rounds.iter().sum::<u64>() as f64 / rounds.len() as f64;
        let emin = *erosions.iter().min().expect("group is nonempty");
        let emax = *erosions.iter().max().expect("group is nonempty");
        let rule = |k: usize| runs.iter().map(|m| m.rule_counts[k]).sum::<u64>();
        let _ = writeln!(
            out,
            "{dim},{mode},{policy},{n},{},{},{rmin},{rmax},{mean:.3},{},{},{emin},{emax},{},{},{},{}",
            runs.len(),
            runs.iter().filter(|m| m.success).count(),
            rmax as i64 - n as i64,
            rmax <= n as u64 + 1,
            emin == emax && emin + 1 == n as u64,
            rule(0),
            rule(1),
            rule(2),
        );
    }
    out
}
