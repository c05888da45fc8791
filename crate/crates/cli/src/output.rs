//! Stable text, CSV, and JSON rendering. Identical invocations must
//! produce byte-identical output, so everything routes through fixed
//! formats: rationals as reduced fractions, floats at six decimals, sets
//! in `{1,3}` notation.

use std::fmt::Write as _;

use serde_json::{json, Value};
use sunflower_core::audit::AuditReport;
use sunflower_core::experiments::{ExperimentRecord, StatValue};
use sunflower_core::numeric::{format_ratio, ratio_to_f64};
use sunflower_core::set::ElemSet;
use sunflower_core::BigRational;

pub fn f6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn ratio_with_approx(r: &BigRational) -> String {
    let exact = format_ratio(r);
    if exact.contains('/') {
        format!("{exact} (~{})", f6(ratio_to_f64(r)))
    } else {
        exact
    }
}

pub fn elems_csv(s: ElemSet) -> String {
    let mut out = String::new();
    for (i, e) in s.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{e}");
    }
    out
}

pub fn experiment_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("statistic,m_or_w,value,ci_halfwidth,trials,seed\n");
    for r in records {
        let (value, ci) = match &r.value {
            StatValue::Exact(v) => (format_ratio(v), String::new()),
            StatValue::Estimate { mean, half_width } => (f6(*mean), f6(*half_width)),
        };
        let trials = r.trials.map(|t| t.to_string()).unwrap_or_default();
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{}", r.statistic, r.param, value, ci, trials, seed);
    }
    out
}

pub fn experiment_json(records: &[ExperimentRecord]) -> Value {
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            let value = match &r.value {
                StatValue::Exact(v) => json!({
                    "exact": format_ratio(v),
                    "approx": ratio_to_f64(v),
                }),
                StatValue::Estimate { mean, half_width } => json!({
                    "mean": mean,
                    "ci_halfwidth": half_width,
                }),
            };
            json!({
                "family": r.family_hash,
                "statistic": r.statistic,
                "m_or_w": r.param,
                "value": value,
                "trials": r.trials,
                "seed": r.seed,
            })
        })
        .collect();
    json!({ "records": rows })
}

pub fn audit_csv(report: &AuditReport) -> String {
    let mut out = String::from("x,V,case,total_bits,f1,f2,f3,f4,f5,f6,chi_u,chi_w\n");
    for r in &report.records {
        let mut fields = [0usize; 6];
        for (i, &b) in r.field_bits.iter().enumerate().take(6) {
            fields[i] = b;
        }
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{},{},{},{},{}",
            r.x,
            elems_csv(r.v_set),
            r.case1 as u8,
            r.total_bits,
            fields[0],
            fields[1],
            fields[2],
            fields[3],
            fields[4],
            fields[5],
            r.chi_u_size,
            r.chi_w_size
        );
    }
    out
}

pub fn audit_json(report: &AuditReport) -> Value {
    json!({
        "pairs": report.pair_count,
        "prefix_free": report.prefix_free,
        "first_violation": report.first_violation,
        "mean_length": format_ratio(&report.mean_length),
        "mean_length_approx": ratio_to_f64(&report.mean_length),
        "log2_pairs": report.log2_pairs,
        "lemma4_holds": report.lemma4_holds,
        "mean_chi_u": format_ratio(&report.mean_chi_u),
        "mean_chi_w": format_ratio(&report.mean_chi_w),
        "regression": report.regression.map(|r| json!({
            "per_chi_u": r.per_chi_u,
            "per_chi_w": r.per_chi_w,
        })),
        "warnings": report.warnings,
    })
}
