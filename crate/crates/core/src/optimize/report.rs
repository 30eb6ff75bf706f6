//! CSV and JSON renderings of a search.

use serde_json::{json, Value};

use super::{EvalStatus, SearchResult};

/// Twelve significant digits; `inf`, `-inf` and `nan` for non-finite values.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

fn status_str(s: EvalStatus) -> &'static str {
    match s {
        EvalStatus::Ok => "ok",
        EvalStatus::Degenerate => "degenerate",
        EvalStatus::NonConvergence => "nonconvergence",
    }
}

/// Evaluation log, one row per point, sorted by `C` ascending.
pub fn log_csv(result: &SearchResult) -> String {
    let mut out = String::from("stage,status");
    for name in &result.param_names {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",C,err\n");
    let mut rows: Vec<_> = result.log.iter().collect();
    rows.sort_by(|a, b| a.c.total_cmp(&b.c));
    for r in rows {
        out.push_str(&format!("{},{}", r.stage, status_str(r.status)));
        for p in &r.params {
            out.push(',');
            out.push_str(&fmt_sig(*p));
        }
        out.push_str(&format!(",{},{}\n", fmt_sig(r.c), fmt_sig(r.err)));
    }
    out
}

/// Best point and per-stage progress. Parameters are copied from the log
/// unchanged.
pub fn summary_json(result: &SearchResult) -> Value {
    let params: serde_json::Map<String, Value> = result
        .param_names
        .iter()
        .cloned()
        .zip(result.best_params.iter().map(|&v| json!(v)))
        .collect();
    json!({
        "family": result.family,
        "best_params": params,
        "best_C": result.best_c,
        "best_err": result.best_err,
        "stage_best": result.stage_best,
        "evaluations": result.log.len(),
        "degenerate_skipped": result.log.iter().filter(|r| r.status == EvalStatus::Degenerate).count(),
        "nonconvergent_skipped": result.log.iter().filter(|r| r.status == EvalStatus::NonConvergence).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{EvalRecord, Family};
    use super::*;

    fn result_with(log: Vec<EvalRecord>) -> SearchResult {
        SearchResult {
            family: Family::New,
            param_names: vec!["b".into(), "phi".into()],
            best_params: vec![0.1 + 0.2, 1.0 / 3.0],
            best_c: 2.0,
            best_err: 1e-12,
            stage_best: vec![2.0],
            log,
        }
    }

    #[test]
    fn empty_log_gives_header_only() {
        assert_eq!(log_csv(&result_with(vec![])), "stage,status,b,phi,C,err\n");
    }

    #[test]
    fn rows_are_sorted_by_c() {
        let log: Vec<EvalRecord> = (0..100)
            .map(|i| EvalRecord {
                stage: 1,
                params: vec![i as f64, 0.0],
                c: ((i * 37) % 100) as f64 + 1.5,
                err: 0.0,
                status: EvalStatus::Ok,
            })
            .collect();
        let csv = log_csv(&result_with(log));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 101);
        let cs: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
            .collect();
        assert!(cs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn summary_echoes_best_params_bit_for_bit() {
        let r = result_with(vec![]);
        let text = serde_json::to_string(&summary_json(&r)).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["best_params"]["b"].as_f64().unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(back["best_params"]["phi"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(2.00713840238890), "2.00713840239e0");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(-0.000123456789012345), "-1.23456789012e-4");
    }
}
