//! Flat `key = value` configuration files (`#` starts a comment).

use std::collections::BTreeMap;

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {k}", no + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_separators() {
        let kv = parse_kv("# trap\nB0_T = 1e-3\nBp_T_per_m: 1e4  # gradient\n\n").unwrap();
        assert_eq!(kv["B0_T"], "1e-3");
        assert_eq!(kv["Bp_T_per_m"], "1e4");
        assert!(parse_kv("a = 1\na = 2").is_err());
        assert!(parse_kv("novalue").is_err());
    }
}
