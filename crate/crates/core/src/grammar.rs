//! Tokenizing helpers shared by the norm, function and grid mini-grammars.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Splits `s` on `sep` at bracket depth zero.
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::parse(s, "expected a number"))?;
    if !v.is_finite() {
        return Err(Error::parse(s, "number must be finite"));
    }
    Ok(v)
}

fn strip_brackets(s: &str) -> &str {
    let t = s.trim();
    if (t.starts_with('(') && t.ends_with(')')) || (t.starts_with('[') && t.ends_with(']')) {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

/// `(a,b,c)`, `[a,b,c]` or bare `a,b,c`.
pub(crate) fn parse_tuple(s: &str) -> Result<Vec<f64>> {
    let inner = strip_brackets(s);
    if inner.trim().is_empty() {
        return Err(Error::parse(s, "empty tuple"));
    }
    split_top(inner, ',').into_iter().map(parse_f64).collect()
}

/// `[[a,b],[c,d]]` (rows) or a flat row-major list whose length is a perfect square.
pub(crate) fn parse_matrix(s: &str) -> Result<DMatrix<f64>> {
    let t = s.trim();
    let inner = strip_brackets(t);
    let rows: Vec<&str> = split_top(inner, ',');
    let nested = rows.iter().all(|r| {
        let r = r.trim();
        r.starts_with('[') || r.starts_with('(')
    });
    if nested && t.starts_with('[') {
        let parsed: Vec<Vec<f64>> = rows.iter().map(|r| parse_tuple(r)).collect::<Result<_>>()?;
        let n = parsed.len();
        if parsed.iter().any(|r| r.len() != n) {
            return Err(Error::parse(s, "matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| parsed[i][j]))
    } else {
        let flat = parse_tuple(t)?;
        let n = (flat.len() as f64).sqrt().round() as usize;
        if n * n != flat.len() {
            return Err(Error::parse(s, "flat matrix length must be a perfect square"));
        }
        Ok(DMatrix::from_row_slice(n, n, &flat))
    }
}

/// Parses `key=value` pairs separated by `;`.
pub(crate) fn parse_options<'a>(s: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(s, ';')
        .into_iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(kv, "expected key=value"))?;
            Ok((k.trim(), v.trim()))
        })
        .collect()
}

pub(crate) fn fmt_tuple(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", items.join(","))
}

pub(crate) fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let items: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            format!("[{}]", items.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_and_flat_matrices_agree() {
        let a = parse_matrix("[[1,2],[3,4]]").unwrap();
        let b = parse_matrix("1,2,3,4").unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(0, 1)], 2.0);
        assert!(parse_matrix("[[1,2],[3]]").is_err());
        assert!(parse_matrix("1,2,3").is_err());
    }

    #[test]
    fn options_respect_brackets() {
        let opts = parse_options("A=[[1,0],[0,1]];b=(1,2);c=3").unwrap();
        assert_eq!(opts.len(), 3);
        assert_eq!(opts[1], ("b", "(1,2)"));
        assert!(parse_options("justtext").is_err());
    }
}
