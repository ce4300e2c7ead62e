//! Parsing of the `family:key=value,...` descriptors that name weights and
//! measures in run configurations, and of two-column text tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::param(format!("missing parameter '{key}'")))?;
        raw.parse::<f64>()
            .map_err(|_| Error::param(format!("parameter '{key}' is not a number: '{raw}'")))
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.get(key).is_some() {
            self.number(key)
        } else {
            Ok(default)
        }
    }
}

/// Splits `family:k1=v1,k2=v2` into the family id and its parameters.
pub fn parse_family(spec: &str) -> Result<(String, Params)> {
    let spec = spec.trim();
    let (family, rest) = match spec.split_once(':') {
        Some((f, r)) => (f.trim(), r.trim()),
        None => (spec, ""),
    };
    if family.is_empty() {
        return Err(Error::param(format!("empty family in '{spec}'")));
    }
    let mut params = BTreeMap::new();
    if !rest.is_empty() {
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value in '{item}'")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok((family.to_string(), Params(params)))
}

/// Reads whitespace- or comma-separated `(x, y)` rows; `#` starts a comment.
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    parse_two_columns(&text)
}

pub fn parse_two_columns(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                column: 1,
                message: format!("expected two columns, found {}", fields.len()),
            });
        }
        let mut vals = [0.0; 2];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                column: line.find(f).map_or(1, |c| c + 1),
                message: format!("not a number: '{f}'"),
            })?;
        }
        xs.push(vals[0]);
        ys.push(vals[1]);
    }
    Ok((xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_and_params() {
        let (f, p) = parse_family("omega_p:p=2").unwrap();
        assert_eq!(f, "omega_p");
        assert_eq!(p.number("p").unwrap(), 2.0);
        let (f, p) = parse_family("identity").unwrap();
        assert_eq!(f, "identity");
        assert!(p.get("p").is_none());
        assert!(parse_family("nu_p:p").is_err());
    }

    #[test]
    fn two_columns() {
        let (x, y) = parse_two_columns("# u T\n0 0\n0.5, 0.25\n1 1\n").unwrap();
        assert_eq!(x, vec![0.0, 0.5, 1.0]);
        assert_eq!(y, vec![0.0, 0.25, 1.0]);
        match parse_two_columns("0 0\n1 x\n") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
