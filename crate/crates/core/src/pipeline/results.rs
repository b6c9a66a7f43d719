use std::fmt::Write as _;

pub const CSV_HEADER: &str = "experiment_id,config_hash,metric,value,ci95";

/// 64-bit FNV-1a of the `key=value` lines, as 16 hex digits.
pub fn config_hash<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (k, v) in pairs {
        for b in k.bytes().chain([b'=']).chain(v.bytes()).chain([b'\n']) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Seventeen significant digits: enough to recover the exact double.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub config_hash: String,
    pub metric: String,
    pub value: f64,
    pub ci95: Option<f64>,
}

/// CSV with the standard header; `comments` go first as `#` lines.
pub fn format_results(rows: &[ResultRow], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.experiment,
            r.config_hash,
            r.metric,
            fmt_num(r.value),
            r.ci95.map(fmt_num).unwrap_or_default()
        );
    }
    out
}
