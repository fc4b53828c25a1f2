//! Flat `key = value` config files with `[section]` headers.
//!
//! Keys are addressed as `section.key`; keys before the first header live in
//! the empty section and are addressed by their bare name. `#` starts a
//! comment. Command-line flags take precedence over file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use pseudovem::Error;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::InvalidArgument(format!("config line {}: unterminated section header", k + 1)))?;
                section = name.trim().to_ascii_lowercase();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key = value", k + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::InvalidArgument(format!("config line {}: empty key", k + 1)));
            }
            let full = if section.is_empty() { key } else { format!("{section}.{key}") };
            values.insert(full, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidArgument(format!("config key {key}: cannot parse '{v}'"))),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|_| Error::InvalidArgument(format!("config key {key}: cannot parse '{v}'"))),
        }
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Error> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_list<T: FromStr>(&self, flag: Option<Vec<T>>, key: &str, default: Vec<T>) -> Result<Vec<T>, Error> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.list(key)?.unwrap_or(default)),
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, T::Err> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_precedence() {
        let c = ConfigFile::parse("top = 1\n[material]\nnu = 0.49 # comment\n\n[study]\nrefinements = 4, 8,16\n").unwrap();
        assert_eq!(c.get::<u32>("top").unwrap(), Some(1));
        assert_eq!(c.pick(None, "material.nu", 0.3).unwrap(), 0.49);
        assert_eq!(c.pick(Some(0.2), "material.nu", 0.3).unwrap(), 0.2);
        assert_eq!(c.list::<usize>("study.refinements").unwrap(), Some(vec![4, 8, 16]));
        assert!(c.get::<f64>("material.e").unwrap().is_none());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("[mesh\n").is_err());
        assert!(ConfigFile::parse("just words\n").is_err());
        assert!(ConfigFile::parse("[m]\nn = x\n").unwrap().get::<usize>("m.n").is_err());
    }
}
