//! Plain `key=value` reports, one entry per line, keys in emission order.

use std::fmt::Display;

use vlawe_core::experiment::CoverageStats;
use vlawe_core::EvalReport;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        let value = value.to_string();
        debug_assert!(!value.contains('\n'));
        self.entries.push((key.into(), value));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Reads back the output of [`Report::render`]. Lines without `=` are
    /// ignored.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }
}

pub fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn push_coverage(r: &mut Report, c: &CoverageStats) {
    r.push("coverage.documents", c.documents);
    r.push("coverage.known_tokens", c.known_tokens);
    r.push("coverage.oov_tokens", c.oov_tokens);
    let total = c.known_tokens + c.oov_tokens;
    let rate = if total == 0 {
        0.0
    } else {
        c.oov_tokens as f64 / total as f64
    };
    r.push("coverage.oov_rate", rate);
    r.push("coverage.zero_documents", c.empty_documents);
}

pub fn push_eval(r: &mut Report, e: &EvalReport) {
    r.push("result.metric", e.metric.name());
    r.push("result.value", e.value);
    r.push(
        "result.protocol",
        if e.per_fold.is_some() {
            "cross-validation"
        } else {
            "predefined-split"
        },
    );
    r.push("result.stratified", e.stratified);
    r.push("result.fold_seed", opt(e.fold_seed));
    match &e.per_fold {
        Some(v) => {
            let joined: Vec<String> = v.iter().map(ToString::to_string).collect();
            r.push("result.per_fold", joined.join(","));
            r.push("result.stddev", e.fold_stddev());
        }
        None => r.push("result.per_fold", "none"),
    }
    r.push("result.feature_dim", e.feature_dim);
    r.push("result.documents", e.documents);
    for f in &e.folds {
        let p = format!("fold.{}", f.index);
        r.push(format!("{p}.train"), f.train_size);
        r.push(format!("{p}.test"), f.test_size);
        r.push(format!("{p}.value"), f.value);
        r.push(format!("{p}.kmeans_seed"), opt(f.kmeans_seed));
        r.push(format!("{p}.codebook_inertia"), opt(f.codebook_inertia));
        r.push(
            format!("{p}.codebook_iterations"),
            opt(f.codebook_iterations),
        );
        r.push(format!("{p}.solver_seed"), f.solver_seed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut r = Report::new();
        r.push("a", 1);
        r.push("b.c", "x=y");
        r.push("d", 0.1 + 0.2);
        let back = Report::parse(&r.render());
        assert_eq!(back, r);
        assert_eq!(back.get("b.c"), Some("x=y"));
        assert_eq!(back.get("d").unwrap().parse::<f64>().unwrap(), 0.1 + 0.2);
    }
}
