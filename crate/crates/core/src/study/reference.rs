//! Published reference frequencies, bundled as a text asset.
//!
//! Format: `[table <id>] key=value ...` headers followed by rows
//! `<nu> <gamma> <index> : <ω per N> : <alpha> <extrapolated> <fem>`,
//! where `-` marks a value that was not reported.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymesh::{Domain, FamilyTag};

const BUNDLED: &str = include_str!("../../assets/reference_tables.txt");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub nu: f64,
    pub gamma: f64,
    /// 1-based eigenvalue index.
    pub index: usize,
    pub omega: Vec<f64>,
    pub alpha: Option<f64>,
    pub extrapolated: Option<f64>,
    pub fem: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub id: u32,
    pub test: u32,
    pub family: FamilyTag,
    pub domain: Domain,
    pub refinements: Vec<usize>,
    pub rows: Vec<ReferenceRow>,
}

impl ReferenceTable {
    /// Rows for one `(ν, γ)` pair, ordered by index.
    pub fn rows_for(&self, nu: f64, gamma: f64) -> Vec<&ReferenceRow> {
        let mut rows: Vec<&ReferenceRow> =
            self.rows.iter().filter(|r| same(r.nu, nu) && same(r.gamma, gamma)).collect();
        rows.sort_by_key(|r| r.index);
        rows
    }

    pub fn row(&self, nu: f64, gamma: f64, index: usize) -> Option<&ReferenceRow> {
        self.rows.iter().find(|r| same(r.nu, nu) && same(r.gamma, gamma) && r.index == index)
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub tables: BTreeMap<u32, ReferenceTable>,
}

impl ReferenceData {
    pub fn bundled() -> &'static ReferenceData {
        static DATA: OnceLock<ReferenceData> = OnceLock::new();
        DATA.get_or_init(|| ReferenceData::parse(BUNDLED).expect("bundled reference data is well formed"))
    }

    pub fn table(&self, id: u32) -> Option<&ReferenceTable> {
        self.tables.get(&id)
    }

    /// Table matching a study setup, if one was published.
    pub fn find(&self, family: FamilyTag, domain: Domain, refinements: &[usize]) -> Option<&ReferenceTable> {
        self.tables
            .values()
            .find(|t| t.family == family && t.domain == domain && t.refinements == refinements)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tables = BTreeMap::new();
        let mut current: Option<ReferenceTable> = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |m: String| Error::Reference(format!("line {line_no}: {m}"));
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("[table ") {
                if let Some(t) = current.take() {
                    tables.insert(t.id, t);
                }
                let (id, attrs) = rest.split_once(']').ok_or_else(|| err("unterminated header".into()))?;
                let id: u32 = id.trim().parse().map_err(|_| err(format!("bad table id '{id}'")))?;
                let mut t = ReferenceTable {
                    id,
                    test: 0,
                    family: FamilyTag::T1Triangles,
                    domain: Domain::UnitSquare,
                    refinements: Vec::new(),
                    rows: Vec::new(),
                };
                for kv in attrs.split_whitespace() {
                    let (key, value) = kv.split_once('=').ok_or_else(|| err(format!("expected key=value, got '{kv}'")))?;
                    match key {
                        "test" => t.test = value.parse().map_err(|_| err(format!("bad test '{value}'")))?,
                        "family" => t.family = value.parse().map_err(|e| err(format!("{e}")))?,
                        "domain" => t.domain = value.parse().map_err(|e| err(format!("{e}")))?,
                        "n" => {
                            t.refinements = value
                                .split(',')
                                .map(|v| v.parse::<usize>())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| err(format!("bad refinement list '{value}'")))?
                        }
                        _ => return Err(err(format!("unknown key '{key}'"))),
                    }
                }
                current = Some(t);
                continue;
            }
            let table = current.as_mut().ok_or_else(|| err("row before any table header".into()))?;
            let parts: Vec<&str> = line.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(err("expected three ':'-separated groups".into()));
            }
            let head: Vec<&str> = parts[0].split_whitespace().collect();
            if head.len() != 3 {
                return Err(err("expected '<nu> <gamma> <index>'".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
            let opt = |s: &str| if s == "-" { Ok(None) } else { num(s).map(Some) };
            let omega = parts[1].split_whitespace().map(num).collect::<Result<Vec<f64>>>()?;
            if omega.len() != table.refinements.len() {
                return Err(err(format!("{} values for {} refinements", omega.len(), table.refinements.len())));
            }
            let tail: Vec<&str> = parts[2].split_whitespace().collect();
            if tail.len() != 3 {
                return Err(err("expected '<alpha> <extrapolated> <fem>'".into()));
            }
            table.rows.push(ReferenceRow {
                nu: num(head[0])?,
                gamma: num(head[1])?,
                index: head[2].parse().map_err(|_| err(format!("bad index '{}'", head[2])))?,
                omega,
                alpha: opt(tail[0])?,
                extrapolated: opt(tail[1])?,
                fem: opt(tail[2])?,
            });
        }
        if let Some(t) = current.take() {
            tables.insert(t.id, t);
        }
        Ok(Self { tables })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_parse() {
        let data = ReferenceData::bundled();
        assert_eq!(data.tables.len(), 10);
        let t1 = data.table(1).unwrap();
        assert_eq!(t1.refinements, vec![16, 32, 64]);
        let r = t1.row(0.35, 1.0, 1).unwrap();
        assert_eq!(r.omega, vec![4.1220, 4.1747, 4.1884]);
        assert_eq!(r.extrapolated, Some(4.1933));
        let t10 = data.table(10).unwrap();
        assert_eq!(t10.rows_for(0.49, 64.0).len(), 4);
        assert_eq!(t10.row(0.49, 0.0, 2).unwrap().extrapolated, None);
        let t9 = data.find(FamilyTag::T6Disk, Domain::UnitDisk, &[115, 243, 357, 457]).unwrap();
        assert_eq!(t9.row(0.5, 1.0, 1).unwrap().fem, Some(2.21223));
    }

    #[test]
    fn malformed_rows_report_line() {
        let e = ReferenceData::parse("[table 1] n=1,2\n0.3 1 1 : 1.0 : - - -\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(ReferenceData::parse("0.3 1 1 : 1 : - - -").is_err());
    }
}
