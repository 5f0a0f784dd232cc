use serde::Serialize;
use serde_json::Value;

/// Significant digits of every printed probability.
pub const SIG_DIGITS: usize = 12;

/// `v` with 12 significant digits, trailing zeros removed.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..=15).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", SIG_DIGITS - 1, v)
    }
}

/// `v` rounded to 12 significant digits.
pub fn round_num(v: f64) -> f64 {
    fmt_num(v).parse().unwrap_or(v)
}

/// Rounds every non-integer number of a JSON tree.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_num(n.as_f64().expect("f64 number"));
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Report envelope: tool version, schema, seed and config echo.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: String,
    pub seed: Option<u64>,
    pub config: Value,
}

impl Header {
    pub fn new(schema: &str, seed: Option<u64>, config: Value) -> Self {
        Self {
            tool: "couplage",
            version: env!("CARGO_PKG_VERSION"),
            schema: schema.to_string(),
            seed,
            config,
        }
    }

    /// The `#`-prefixed first line of a CSV report.
    pub fn csv_line(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# {} {} schema={} seed={} config={}\n",
            self.tool, self.version, self.schema, seed, self.config
        )
    }

    /// A JSON report with the header fields followed by `body`.
    pub fn json(&self, body: Value) -> String {
        let mut out = serde_json::to_value(self).expect("header serializes");
        let map = out.as_object_mut().expect("header is an object");
        if let Value::Object(b) = body {
            map.extend(b);
        } else {
            map.insert("body".into(), body);
        }
        round_json(&mut out);
        let mut s = serde_json::to_string_pretty(&out).expect("json serializes");
        s.push('\n');
        s
    }
}

/// CSV table with a fixed header row.
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(header: &Header, columns: &[&str]) -> Self {
        let mut out = header.csv_line();
        out.push_str(&columns.join(","));
        out.push('\n');
        Self { out }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Empty cell for a missing value.
pub fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 1.01), "1.9801980198");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(160.0), "160");
        assert_eq!(fmt_num(1e-9), "1.00000000000e-9");
        assert_eq!(fmt_num(-0.25), "-0.25");
    }

    #[test]
    fn json_numbers_are_rounded() {
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":{"c":0.3}}"#);
    }
}
