use std::collections::BTreeMap;
use std::fmt::Write;

use hcr::dataset::format_value;
use hcr::{EvidenceFlag, Model64, Term};

use crate::error::CliError;
use crate::{io, ReportArgs};

pub fn run(args: ReportArgs) -> Result<(), CliError> {
    let model = io::read_model(&args.model)?;
    print!("{}", coefficient_report(&model));
    Ok(())
}

/// Coefficients grouped by correlation level.
pub fn coefficient_report(model: &Model64) -> String {
    let mut s = String::new();
    if model.is_uniform() {
        s.push_str("a(constant) = 1  uniform model\n");
        return s;
    }
    let _ = writeln!(s, "coordinates: {}", model.names().join(", "));
    let mut levels: BTreeMap<usize, Vec<&Term<f64>>> = BTreeMap::new();
    for t in model.terms() {
        levels.entry(t.index.support_len()).or_default().push(t);
    }
    for (level, terms) in levels {
        let _ = writeln!(s, "\nlevel {level} ({} coefficients)", terms.len());
        for t in terms {
            if t.index.is_constant() {
                let _ = writeln!(s, "  {}  a = {}", t.index, format_value(t.coefficient));
                continue;
            }
            let flag = model.flag(t);
            let sigma = t.uncertainty.map_or_else(|| "-".to_string(), format_value);
            let ratio = match t.uncertainty {
                Some(u) if u > 0.0 => format!("{:.2}", t.coefficient.abs() / u),
                _ => "-".to_string(),
            };
            let marker = match flag {
                EvidenceFlag::Ok => String::new(),
                EvidenceFlag::NoEvidence => "  [NO EVIDENCE]".to_string(),
                EvidenceFlag::SingleRecord => "  [single record]".to_string(),
            };
            let _ = writeln!(
                s,
                "  {}  a = {}  sigma = {}  |a|/sigma = {}  |K| = {}  {}{}",
                t.index,
                format_value(t.coefficient),
                sigma,
                ratio,
                model.evidence_for(&t.index.support()),
                label(t),
                marker
            );
        }
    }
    s
}

/// Plain-language reading of a coefficient's order pattern and sign.
pub fn label(t: &Term<f64>) -> String {
    let support = t.index.support();
    let coords = support
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",");
    let positive = t.coefficient > 0.0;
    if support.len() == 1 {
        let feature = match t.index.order(support[0]) {
            1 if positive => "trend: density increases",
            1 => "trend: density decreases",
            2 if positive => "spread: mass toward the edges",
            2 => "focus: mass toward the middle",
            3 => "skew-like",
            4 => "kurtosis-like",
            _ => "higher-order shape",
        };
        return format!("coordinate {coords}: {feature}");
    }
    if support.iter().all(|&i| t.index.order(i) == 1) {
        let pattern = match (support.len(), positive) {
            (2, true) => "co-increase",
            (2, false) => "one increases as the other decreases",
            (_, true) => "joint trend, positive",
            (_, false) => "joint trend, negative",
        };
        return format!("coordinates {coords}: {pattern}");
    }
    let parts: Vec<String> = support
        .iter()
        .map(|&i| {
            let name = match t.index.order(i) {
                1 => "trend",
                2 => "spread",
                3 => "skew",
                4 => "kurtosis",
                _ => "shape",
            };
            format!("{name}({})", i + 1)
        })
        .collect();
    format!("coordinates {coords}: {}", parts.join(" x "))
}

/// Printed after fitting: per-level counts, evidence histogram, strongest terms.
pub fn summary(model: &Model64, records: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "records: {records}");
    let _ = writeln!(
        s,
        "coefficients: {} ({} free)",
        model.terms().len(),
        model.terms().len() - 1
    );
    let mut per_level: BTreeMap<usize, usize> = BTreeMap::new();
    for t in model.terms().iter().filter(|t| !t.index.is_constant()) {
        *per_level.entry(t.index.support_len()).or_default() += 1;
    }
    for (level, count) in &per_level {
        let _ = writeln!(s, "  level {level}: {count}");
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for (subset, &count) in model.evidence() {
        if !subset.is_empty() {
            *histogram.entry(count).or_default() += 1;
        }
    }
    let _ = writeln!(s, "evidence |K_C| (records: subsets)");
    for (count, subsets) in histogram.iter().rev() {
        let _ = writeln!(s, "  {count}: {subsets}");
    }
    let mut ranked: Vec<(&Term<f64>, f64)> = model
        .terms()
        .iter()
        .filter_map(|t| match t.uncertainty {
            Some(u) if u > 0.0 && !t.index.is_constant() => Some((t, t.coefficient.abs() / u)),
            _ => None,
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.index.cmp(&b.0.index)));
    if !ranked.is_empty() {
        let _ = writeln!(s, "strongest coefficients (|a|/sigma)");
        for (t, r) in ranked.iter().take(10) {
            let _ = writeln!(
                s,
                "  {}  a = {:+.4}  {:.2}  {}",
                t.index,
                t.coefficient,
                r,
                label(t)
            );
        }
    }
    s
}
