//! Run configuration: `[job.<name>]` sections of `key = value` lines.
//! `#` and `;` start comments.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSection {
    pub name: String,
    pub line: usize,
    pub entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(k) => &line[..k],
        None => line,
    }
}

fn column_of(line: &str, part: &str) -> usize {
    let offset = part.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

pub fn parse(text: &str) -> Result<Vec<JobSection>, ConfigError> {
    let mut jobs: Vec<JobSection> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = column_of(raw, trimmed);
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(lineno, col + trimmed.len(), "expected ']' to close the section header"))?;
            let name = inner
                .trim()
                .strip_prefix("job.")
                .ok_or_else(|| ConfigError::at(lineno, col + 1, "section headers must have the form [job.<name>]"))?;
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(ConfigError::at(
                    lineno,
                    col + 5,
                    format!("job name '{name}' must be non-empty and use letters, digits, '_' or '-'"),
                ));
            }
            if jobs.iter().any(|j| j.name == name) {
                return Err(ConfigError::at(lineno, col + 5, format!("duplicate job '{name}'")));
            }
            jobs.push(JobSection { name: name.to_string(), line: lineno, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::at(lineno, col, "expected 'key = value' or a [job.<name>] header"))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::at(lineno, col, format!("invalid key '{key}'")));
        }
        let value = value.trim();
        let vcol = if value.is_empty() { col + trimmed.len() } else { column_of(raw, value) };
        let job = jobs
            .last_mut()
            .ok_or_else(|| ConfigError::at(lineno, col, "key outside of any [job.<name>] section"))?;
        if job.entries.contains_key(key) {
            return Err(ConfigError::at(lineno, col, format!("duplicate key '{key}'")));
        }
        job.entries.insert(key.to_string(), Entry { value: value.to_string(), line: lineno, column: vcol });
    }
    Ok(jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_keys() {
        let text = "# header\n[job.a]\nkind = muckenhoupt\nmeasure = nu_p:p=1.5 ; trailing\n\n[job.b]\nkind=tci\n";
        let jobs = parse(text).unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].entries["measure"].value, "nu_p:p=1.5");
        assert_eq!(jobs[0].entries["measure"].line, 4);
        assert_eq!(jobs[0].entries["measure"].column, 11);
        assert_eq!(jobs[1].entries["kind"].value, "tci");
    }

    #[test]
    fn empty_config() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn diagnostics() {
        let e = parse("kind = x\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse("[job.a]\n  what\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("[job.a\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse("[jobs.a]\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse("[job.a]\nk=1\nk=2\n").unwrap_err();
        assert_eq!(e.line, 3);
    }
}
