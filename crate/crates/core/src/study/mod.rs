//! Refinement studies: solve on a sequence of meshes, fit the convergence
//! rate per eigenvalue branch and compare against published values.

mod fit;
mod reference;

pub use fit::{fit_rate, FitResult, ALPHA_MAX, ALPHA_MIN};
pub use reference::{ReferenceData, ReferenceRow, ReferenceTable};

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::assemble_system;
use crate::eigensolve::{solve_smallest, EigenOptions};
use crate::error::{Error, Result};
use crate::parallel;
use crate::polymesh::{generate_mesh, Domain, FamilyTag, MeshFamily, PolygonMesh};
use crate::vemlocal::Material;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub name: String,
    pub domain: Domain,
    pub family: MeshFamily,
    /// Strictly increasing refinement parameters.
    pub refinements: Vec<usize>,
    pub young: f64,
    pub poisson: Vec<f64>,
    pub gammas: Vec<f64>,
    pub count: usize,
    pub cluster_tol: f64,
    pub eigen: EigenOptions,
    /// Published table to compare against, if any.
    pub reference_table: Option<u32>,
}

impl StudyConfig {
    pub fn new(name: impl Into<String>, family: FamilyTag, domain: Domain, refinements: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            domain,
            family: MeshFamily::new(family),
            refinements,
            young: 1.0,
            poisson: vec![0.35, 0.49, 0.5],
            gammas: vec![1.0],
            count: 4,
            cluster_tol: 1e-3,
            eigen: EigenOptions::default(),
            reference_table: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.refinements.is_empty() {
            return Err(Error::InvalidArgument("empty refinement list".into()));
        }
        if self.refinements.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("refinement list must be strictly increasing".into()));
        }
        if self.poisson.is_empty() || self.gammas.is_empty() {
            return Err(Error::InvalidArgument("need at least one Poisson ratio and one gamma".into()));
        }
        if self.count == 0 {
            return Err(Error::InvalidArgument("eigenpair count must be at least 1".into()));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidArgument("gamma must be finite and non-negative".into()));
        }
        if self.family.tag == FamilyTag::T6Disk && self.domain != Domain::UnitDisk {
            return Err(Error::InvalidArgument("t6 requires disk".into()));
        }
        for &nu in &self.poisson {
            Material::new(self.young, nu)?;
        }
        Ok(())
    }
}

/// Study setups for the four numerical tests, optionally restricted to some
/// mesh families.
pub fn reference_study(test: u32, families: Option<&[FamilyTag]>) -> Result<Vec<StudyConfig>> {
    use FamilyTag::*;
    let mut configs = Vec::new();
    let mut add = |id: u32, tag: FamilyTag, domain: Domain, ns: &[usize], count: usize| {
        let mut c = StudyConfig::new(format!("table{id}_{tag}_{domain}"), tag, domain, ns.to_vec());
        c.count = count;
        c.reference_table = Some(id);
        configs.push(c);
    };
    match test {
        1 => {
            add(1, T1Triangles, Domain::UnitSquare, &[16, 32, 64], 4);
            add(2, T2Hexagons, Domain::UnitSquare, &[16, 32, 64], 4);
            add(3, T3DistortedSquares, Domain::UnitSquare, &[16, 32, 64], 4);
            add(4, T4Voronoi, Domain::UnitSquare, &[9, 35, 61], 4);
            add(5, T5DistortedHexagons, Domain::UnitSquare, &[9, 35, 61], 4);
        }
        2 => {
            add(6, T2Hexagons, Domain::LShape, &[8, 16, 32, 64], 5);
            add(7, T4Voronoi, Domain::LShape, &[9, 19, 35, 45], 5);
            add(8, T5DistortedHexagons, Domain::LShape, &[9, 19, 35, 45], 5);
        }
        3 => add(9, T6Disk, Domain::UnitDisk, &[115, 243, 357, 457], 5),
        4 => {
            add(10, T2Hexagons, Domain::UnitSquare, &[20, 60, 100, 140, 180], 4);
            let c = configs.last_mut().expect("just added");
            c.poisson = vec![0.49];
            c.gammas = vec![0.0, 2f64.powi(-6), 2f64.powi(-3), 1.0, 8.0, 64.0];
        }
        _ => return Err(Error::InvalidArgument(format!("unknown test {test} (expected 1-4)"))),
    }
    if let Some(keep) = families {
        configs.retain(|c| keep.contains(&c.family.tag));
    }
    Ok(configs)
}

/// Mesh size used in the fits: `sqrt(|Ω| / #cells)`.
pub fn mesh_size(mesh: &PolygonMesh<f64>) -> f64 {
    (mesh.total_area() / mesh.num_cells() as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub n: usize,
    pub h: f64,
    pub cells: usize,
    pub dofs: usize,
    pub frequencies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// 1-based eigenvalue index.
    pub index: usize,
    /// One entry per refinement; `None` where that solve failed.
    pub omega: Vec<Option<f64>>,
    pub fit: Option<FitResult>,
    /// Independent reference value, when published.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub n: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub name: String,
    pub family: FamilyTag,
    pub domain: Domain,
    pub nu: f64,
    pub gamma: f64,
    pub refinements: Vec<usize>,
    pub points: Vec<Option<StudyPoint>>,
    pub rows: Vec<TableRow>,
    pub failures: Vec<PointFailure>,
    pub reference_table: Option<u32>,
}

impl ConvergenceTable {
    /// Builds the table a study would produce from published values.
    pub fn from_reference(table: &ReferenceTable, nu: f64, gamma: f64) -> Result<Self> {
        let rows = table.rows_for(nu, gamma);
        if rows.is_empty() {
            return Err(Error::Reference(format!("table {} has no rows for nu={nu}, gamma={gamma}", table.id)));
        }
        Ok(Self {
            name: format!("table{}", table.id),
            family: table.family,
            domain: table.domain,
            nu,
            gamma,
            refinements: table.refinements.clone(),
            points: vec![None; table.refinements.len()],
            rows: rows
                .iter()
                .map(|r| TableRow {
                    index: r.index,
                    omega: r.omega.iter().copied().map(Some).collect(),
                    fit: r.extrapolated.map(|e| FitResult {
                        omega_extr: e,
                        c: f64::NAN,
                        alpha: r.alpha.unwrap_or(f64::NAN),
                        residuals: Vec::new(),
                        rms: f64::NAN,
                        degenerate: false,
                    }),
                    reference: r.fem,
                })
                .collect(),
            failures: Vec::new(),
            reference_table: Some(table.id),
        })
    }

    pub fn row(&self, index: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.index == index)
    }

    pub fn extrapolated(&self, index: usize) -> Option<f64> {
        self.row(index).and_then(|r| r.fit.as_ref()).map(|f| f.omega_extr)
    }

    pub fn alpha(&self, index: usize) -> Option<f64> {
        self.row(index).and_then(|r| r.fit.as_ref()).map(|f| f.alpha)
    }

    /// Computed ω for `index` on every refinement, if all solves succeeded.
    pub fn omegas(&self, index: usize) -> Option<Vec<f64>> {
        self.row(index)?.omega.iter().copied().collect()
    }
}

fn solve_point(config: &StudyConfig, nu: f64, gamma: f64, n: usize) -> Result<StudyPoint> {
    let start = Instant::now();
    let mesh: PolygonMesh<f64> = generate_mesh(&config.family, n, config.domain)?;
    let material = Material::new(config.young, nu)?;
    let system = assemble_system(&mesh, &material, gamma)?;
    let mut opts = config.eigen.clone();
    opts.cluster_tol = config.cluster_tol;
    let result = solve_smallest(&system, config.count, &opts)?;
    Ok(StudyPoint {
        n,
        h: mesh_size(&mesh),
        cells: mesh.num_cells(),
        dofs: system.dim(),
        frequencies: result.frequencies,
        residuals: result.residuals,
        clusters: result.clusters,
        elapsed: start.elapsed(),
    })
}

/// Runs every `(ν, γ, N)` solve of the study and fits each eigenvalue branch.
/// Solver and mesh failures are recorded in the affected table instead of
/// aborting the study.
pub fn run_refinement_study(config: &StudyConfig) -> Result<Vec<ConvergenceTable>> {
    config.validate()?;
    let reference = config.reference_table.and_then(|id| ReferenceData::bundled().table(id));
    let mut jobs = Vec::new();
    for &nu in &config.poisson {
        for &gamma in &config.gammas {
            for &n in &config.refinements {
                jobs.push((nu, gamma, n));
            }
        }
    }
    let solved: Vec<Result<StudyPoint>> = parallel::install(|| {
        jobs.par_iter().map(|&(nu, gamma, n)| solve_point(config, nu, gamma, n)).collect()
    });

    let per_table = config.refinements.len();
    let mut solved = solved.into_iter();
    let mut tables = Vec::new();
    for &nu in &config.poisson {
        for &gamma in &config.gammas {
            let mut points = Vec::with_capacity(per_table);
            let mut failures = Vec::new();
            for &n in &config.refinements {
                match solved.next().expect("one result per job") {
                    Ok(p) => points.push(Some(p)),
                    Err(e) => {
                        failures.push(PointFailure { n, message: e.to_string() });
                        points.push(None);
                    }
                }
            }
            let rows = (1..=config.count)
                .map(|index| {
                    // branches are matched by sorted position; inside a cluster any pairing fits identically
                    let omega: Vec<Option<f64>> =
                        points.iter().map(|p| p.as_ref().and_then(|p| p.frequencies.get(index - 1).copied())).collect();
                    let fit = if per_table >= 3 && omega.iter().all(Option::is_some) {
                        let h: Vec<f64> = points.iter().map(|p| p.as_ref().expect("checked").h).collect();
                        let w: Vec<f64> = omega.iter().map(|w| w.expect("checked")).collect();
                        fit_rate(&h, &w).ok()
                    } else {
                        None
                    };
                    let reference = reference.and_then(|t| t.row(nu, gamma, index)).and_then(|r| r.fem);
                    TableRow { index, omega, fit, reference }
                })
                .collect();
            tables.push(ConvergenceTable {
                name: config.name.clone(),
                family: config.family.tag,
                domain: config.domain,
                nu,
                gamma,
                refinements: config.refinements.clone(),
                points,
                rows,
                failures,
                reference_table: config.reference_table,
            });
        }
    }
    Ok(tables)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub index: usize,
    pub extrapolated: Option<f64>,
    pub published_extrapolated: Option<f64>,
    pub reference: Option<f64>,
    /// Relative deviation from the published extrapolated value.
    pub deviation_extrapolated: Option<f64>,
    /// Relative deviation from the independent reference value.
    pub deviation_reference: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub table: u32,
    pub nu: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub entries: Vec<EntryComparison>,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Relative deviations of the extrapolated values against the published
/// extrapolated column and the reference column. An entry passes when its
/// deviation from the reference (or, lacking one, from the published
/// extrapolation) is within `tolerance`.
pub fn compare_reference(table: &ConvergenceTable, reference: &ReferenceTable, tolerance: f64) -> Result<ComparisonReport> {
    if table.refinements != reference.refinements || table.family != reference.family || table.domain != reference.domain {
        return Err(Error::Reference(format!(
            "shape mismatch: study {}/{} N={:?} vs table {} {}/{} N={:?}",
            table.family, table.domain, table.refinements, reference.id, reference.family, reference.domain, reference.refinements
        )));
    }
    let mut entries = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let published = reference.row(table.nu, table.gamma, row.index).ok_or_else(|| {
            Error::Reference(format!(
                "shape mismatch: table {} has no row nu={} gamma={} index={}",
                reference.id, table.nu, table.gamma, row.index
            ))
        })?;
        let extrapolated = row.fit.as_ref().map(|f| f.omega_extr);
        let deviation_extrapolated = extrapolated.zip(published.extrapolated).map(|(a, b)| rel(a, b));
        let deviation_reference = extrapolated.zip(published.fem).map(|(a, b)| rel(a, b));
        let decisive = deviation_reference.or(deviation_extrapolated);
        entries.push(EntryComparison {
            index: row.index,
            extrapolated,
            published_extrapolated: published.extrapolated,
            reference: published.fem,
            deviation_extrapolated,
            deviation_reference,
            pass: decisive.is_some_and(|d| d <= tolerance),
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(ComparisonReport { table: reference.id, nu: table.nu, gamma: table.gamma, tolerance, entries, pass })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.digits$}"),
        _ => String::new(),
    }
}

/// One CSV for all `(ν, γ)` tables of a study: `nu,gamma,index,N=..,alpha,extrapolated,reference`.
pub fn tables_to_csv(tables: &[ConvergenceTable]) -> String {
    let mut out = String::new();
    let Some(first) = tables.first() else {
        return out;
    };
    out.push_str("nu,gamma,index");
    for n in &first.refinements {
        let _ = write!(out, ",N={n}");
    }
    out.push_str(",alpha,extrapolated,reference\n");
    for t in tables {
        for row in &t.rows {
            let _ = write!(out, "{},{},{}", t.nu, t.gamma, row.index);
            for w in &row.omega {
                let _ = write!(out, ",{}", fmt_opt(*w, 6));
            }
            let fit = row.fit.as_ref();
            let _ = writeln!(
                out,
                ",{},{},{}",
                fmt_opt(fit.map(|f| f.alpha), 4),
                fmt_opt(fit.map(|f| f.omega_extr), 6),
                fmt_opt(row.reference, 5)
            );
        }
    }
    out
}
