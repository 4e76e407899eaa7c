//! Flat `key = value` configuration files.
//!
//! One pair per line, `#` starts a comment line, blank lines are ignored and
//! keys keep their file order. A repeated key is an error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};

pub type KeyValues = IndexMap<String, String>;

pub fn parse_kv(text: &str, origin: &Path) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(origin, i + 1, "expected `key = value`"));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::parse(origin, i + 1, "empty key"));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::parse(origin, i + 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

pub fn read_kv(path: impl AsRef<Path>) -> Result<KeyValues> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kv(&text, path)
}

pub fn format_kv(kv: &KeyValues) -> String {
    let mut out = String::new();
    for (k, v) in kv {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats() {
        let kv = parse_kv("# run\nhub = en\n\nlang.es=/data/es.vec\n", Path::new("mem")).unwrap();
        assert_eq!(kv.keys().collect::<Vec<_>>(), ["hub", "lang.es"]);
        assert_eq!(kv["lang.es"], "/data/es.vec");
        assert_eq!(format_kv(&kv), "hub = en\nlang.es = /data/es.vec\n");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse_kv("hub en", Path::new("m")), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_kv("a=1\na=2", Path::new("m")), Err(Error::Parse { line: 2, .. })));
        assert!(parse_kv(" = 3", Path::new("m")).is_err());
    }
}
