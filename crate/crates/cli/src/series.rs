//! Plain one-column numeric input.

use std::path::Path;

/// Parse one number per line. Blank lines and `#` comments are skipped, and a
/// single non-numeric first line is taken as a header.
pub fn parse_column(text: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    let mut seen_line = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.trim_end_matches(',').trim();
        if field.contains(',') || field.contains(char::is_whitespace) {
            return Err(format!("line {}: expected a single column, got {line:?}", lineno + 1));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(format!("line {}: non-finite value {field:?}", lineno + 1)),
            Err(_) if !seen_line => {}
            Err(_) => return Err(format!("line {}: not a number: {field:?}", lineno + 1)),
        }
        seen_line = true;
    }
    if values.is_empty() {
        return Err("input contains no values".into());
    }
    Ok(values)
}

pub fn read_column(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_column(&text).map_err(|e| format!("{}: {e}", path.display()))
}
