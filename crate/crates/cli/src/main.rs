//! `pseudovem` command-line front end.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use pseudovem::assembly::assemble_system;
use pseudovem::eigensolve::{solve_smallest, EigenOptions, SolverPath, SpectralResult};
use pseudovem::polymesh::{
    audit_regularity, generate_mesh, read_mesh, write_mesh_string, Domain, FamilyTag, MeshFamily, PolygonMesh,
};
use pseudovem::study::{
    compare_reference, mesh_size, reference_study, run_refinement_study, tables_to_csv, ComparisonReport, ConvergenceTable,
    ReferenceData, StudyConfig,
};
use pseudovem::vemlocal::Material;
use pseudovem::vtk::{solution_fields, write_vtu, CellField};
use pseudovem::{parallel, Error};

use config::{parse_list, ConfigFile};
use manifest::RunManifest;

const CONFIG_HELP: &str = "\
Config files hold `key = value` lines grouped under `[section]` headers; `#` starts
a comment and lists are comma separated. Flags given on the command line override
values from the file.

  [mesh]      family = t1..t6, n, domain = square|lshape|disk, amplitude, seed, file
  [material]  e, nu                      (nu = 0.5 selects the incompressible limit)
  [solver]    gamma, count, path = auto|krylov|dense, tol, krylov_dim, max_restarts, shift
  [study]     test, families, domain, refinements, nu, gamma, count, tolerance
  [output]    dir

Exit status: 0 success, 2 invalid arguments, 3 mesh generation or reading failed,
4 eigensolver failure. PSEUDOVEM_THREADS caps the worker threads.";

#[derive(Parser)]
#[command(name = "pseudovem", version, about = "Mixed virtual element eigensolver for 2D linear elasticity", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and write it with a quality report
    Mesh(MeshArgs),
    /// Compute the lowest eigenfrequencies on one mesh
    Solve(SolveArgs),
    /// Reproduce a convergence study (tests 1-4) or run a study from a config file
    Study(StudyArgs),
    /// Sweep Poisson ratios and stabilization constants on fixed meshes
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct MeshOpts {
    /// Mesh family t1..t6
    #[arg(long)]
    family: Option<String>,
    /// Refinement: elements per unit length, or the element count on the disk
    #[arg(long)]
    n: Option<usize>,
    /// square, lshape or disk
    #[arg(long)]
    domain: Option<String>,
    /// Distortion amplitude relative to the element size
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone, Default)]
struct SolverOpts {
    /// Stabilization constant
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of eigenpairs
    #[arg(long)]
    count: Option<usize>,
    /// auto, krylov or dense
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    mesh: MeshOpts,
    /// Output mesh file (default <out-dir>/mesh.poly)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Read the mesh from a file instead of generating it
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[command(flatten)]
    gen: MeshOpts,
    /// Young's modulus
    #[arg(long = "e")]
    young: Option<f64>,
    /// Poisson ratio; 0.5 selects the incompressible limit
    #[arg(long)]
    nu: Option<f64>,
    #[command(flatten)]
    solver: SolverOpts,
    /// Write per-cell fields of every computed mode
    #[arg(long)]
    vtk: Option<PathBuf>,
    /// Write the mesh that was solved on
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Directory for K.mtx and M.mtx
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Numerical test 1-4
    #[arg(long)]
    test: Option<u32>,
    /// Restrict to these families (comma separated)
    #[arg(long)]
    families: Option<String>,
    /// Relative tolerance for the comparison against reference values
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: Option<String>,
    /// Refinements (comma separated)
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long = "e")]
    young: Option<f64>,
    /// Poisson ratios (comma separated)
    #[arg(long)]
    nu: Option<String>,
    /// Stabilization constants (comma separated)
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Unsupported(_) | Error::InvalidMaterial(_) | Error::Reference(_) | Error::Fit(_) => 2,
            Error::InvalidMesh(_) | Error::DegenerateCell { .. } | Error::Parse { .. } | Error::Orientation { .. } | Error::Io(_) => 3,
            Error::Factorization(_) | Error::NotConverged { .. } => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(a) => cmd_mesh(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Study(a) => cmd_study(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> CliResult<ConfigFile> {
    match path {
        Some(p) => Ok(ConfigFile::load(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn echo_config(manifest: &mut RunManifest, file: &ConfigFile, path: &Option<PathBuf>) {
    if let Some(p) = path {
        manifest.set("config_file", p.display());
    }
    for (k, v) in file.entries() {
        manifest.set(&format!("file.{k}"), v);
    }
}

fn out_dir(flag: &Option<PathBuf>, file: &ConfigFile) -> CliResult<PathBuf> {
    Ok(file.pick(flag.clone(), "output.dir", PathBuf::from("pseudovem-out"))?)
}

struct MeshSpec {
    family: MeshFamily,
    domain: Domain,
    n: usize,
}

/// Resolves mesh flags against the config file. The family and domain are
/// checked together before the refinement is required.
fn mesh_spec(opts: &MeshOpts, file: &ConfigFile, default_n: Option<usize>) -> CliResult<MeshSpec> {
    let tag: FamilyTag = file.pick(opts.family.clone(), "mesh.family", "t1".to_string())?.parse()?;
    let default_domain = if tag == FamilyTag::T6Disk { "disk" } else { "square" };
    let domain: Domain = file.pick(opts.domain.clone(), "mesh.domain", default_domain.to_string())?.parse()?;
    if tag == FamilyTag::T6Disk && domain != Domain::UnitDisk {
        return Err(invalid("t6 requires disk"));
    }
    if tag != FamilyTag::T6Disk && domain == Domain::UnitDisk {
        return Err(invalid(format!("{tag} requires square or lshape")));
    }
    let n = file
        .pick_opt(opts.n, "mesh.n")?
        .or(default_n)
        .ok_or_else(|| invalid("missing --n"))?;
    let mut family = MeshFamily::new(tag);
    if let Some(a) = file.pick_opt(opts.amplitude, "mesh.amplitude")? {
        family = family.with_amplitude(a);
    }
    if let Some(s) = file.pick_opt(opts.seed, "mesh.seed")? {
        family = family.with_seed(s);
    }
    Ok(MeshSpec { family, domain, n })
}

fn record_mesh_spec(m: &mut RunManifest, spec: &MeshSpec) {
    m.set("mesh.family", spec.family.tag);
    m.set("mesh.domain", spec.domain);
    m.set("mesh.n", spec.n);
    m.set("mesh.amplitude", spec.family.distortion_amplitude);
    m.set("mesh.seed", spec.family.distortion_seed);
}

fn build_mesh(spec: &MeshSpec) -> CliResult<PolygonMesh<f64>> {
    generate_mesh(&spec.family, spec.n, spec.domain).map_err(|e| match e {
        Error::InvalidArgument(_) | Error::Unsupported(_) => Failure::from(e),
        other => Failure { code: 3, message: format!("mesh generation failed: {other}") },
    })
}

fn parse_path(s: &str) -> CliResult<SolverPath> {
    match s.to_ascii_lowercase().as_str() {
        "auto" => Ok(SolverPath::Auto),
        "krylov" => Ok(SolverPath::Krylov),
        "dense" => Ok(SolverPath::Dense),
        _ => Err(invalid(format!("unknown solver path '{s}' (expected auto, krylov or dense)"))),
    }
}

fn eigen_options(opts: &SolverOpts, file: &ConfigFile, m: &mut RunManifest) -> CliResult<EigenOptions> {
    let mut o = EigenOptions::default();
    o.path = parse_path(&file.pick(opts.path.clone(), "solver.path", "auto".to_string())?)?;
    o.tol = file.pick(opts.tol, "solver.tol", o.tol)?;
    o.krylov_dim = file.get("solver.krylov_dim")?;
    o.max_restarts = file.pick(None, "solver.max_restarts", o.max_restarts)?;
    o.shift = file.pick(None, "solver.shift", o.shift)?;
    if !(o.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    m.set("solver.path", format!("{:?}", o.path).to_lowercase());
    m.set("solver.tol", o.tol);
    m.set("solver.max_restarts", o.max_restarts);
    m.set("solver.shift", o.shift);
    if let Some(k) = o.krylov_dim {
        m.set("solver.krylov_dim", k);
    }
    Ok(o)
}

fn check_count(count: usize) -> CliResult<()> {
    if count == 0 {
        return Err(invalid("--count must be at least 1"));
    }
    Ok(())
}

fn check_gamma(g: f64) -> CliResult<()> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(invalid(format!("gamma must be finite and non-negative, got {g}")));
    }
    Ok(())
}

fn cmd_mesh(a: MeshArgs) -> CliResult<()> {
    let file = load_config(&a.config)?;
    let mut m = RunManifest::new("mesh");
    echo_config(&mut m, &file, &a.config);
    let spec = mesh_spec(&a.mesh, &file, None)?;
    record_mesh_spec(&mut m, &spec);
    let dir = out_dir(&a.out_dir, &file)?;
    let mesh = build_mesh(&spec)?;
    m.lap("mesh");
    let text = write_mesh_string(&mesh);
    m.mesh("mesh", &text);
    let out = a.out.clone().unwrap_or_else(|| dir.join("mesh.poly"));
    m.write_output(&out, text.as_bytes())?;
    let report = audit_regularity(&mesh);
    let report_path = out.with_extension("quality.json");
    m.write_output(&report_path, to_json(&report).as_bytes())?;
    m.lap("output");
    println!(
        "{} cells, {} edges, {} vertices, h_max {:.4e}, min edge ratio {:.3}, star-shaped {}",
        report.cell_count,
        report.edge_count,
        report.vertex_count,
        report.h_max,
        report.min_edge_ratio,
        report.all_star_shaped()
    );
    println!("wrote {}", out.display());
    m.save(&dir.join("mesh.manifest.json"))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    cells: usize,
    edges: usize,
    vertices: usize,
    h: f64,
    dofs: usize,
    young: f64,
    nu: f64,
    incompressible_limit: bool,
    gamma: f64,
    result: &'a SpectralResult,
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let file = load_config(&a.config)?;
    let mut m = RunManifest::new("solve");
    echo_config(&mut m, &file, &a.config);
    let young = file.pick(a.young, "material.e", 1.0)?;
    let nu = file.pick(a.nu, "material.nu", 0.35)?;
    let gamma = file.pick(a.solver.gamma, "solver.gamma", 1.0)?;
    let count = file.pick(a.solver.count, "solver.count", 4)?;
    check_count(count)?;
    check_gamma(gamma)?;
    let material = Material::new(young, nu)?;
    let opts = eigen_options(&a.solver, &file, &mut m)?;
    let dir = out_dir(&a.out_dir, &file)?;
    m.set("material.e", young);
    m.set("material.nu", nu);
    m.set("solver.gamma", gamma);
    m.set("solver.count", count);

    let mesh_file: Option<PathBuf> = file.pick_opt(a.mesh.clone(), "mesh.file")?;
    let mesh = match &mesh_file {
        Some(path) => {
            m.set("mesh.file", path.display());
            let (mesh, warnings) = read_mesh::<f64>(path)?;
            for w in warnings {
                eprintln!("warning: {w:?}");
            }
            mesh
        }
        None => {
            let spec = mesh_spec(&a.gen, &file, Some(16))?;
            record_mesh_spec(&mut m, &spec);
            build_mesh(&spec)?
        }
    };
    let text = write_mesh_string(&mesh);
    m.mesh("mesh", &text);
    if let Some(p) = &a.mesh_out {
        m.write_output(p, text.as_bytes())?;
    }
    m.lap("mesh");

    let system = parallel::install(|| assemble_system(&mesh, &material, gamma))?;
    m.lap("assemble");
    if let Some(d) = &a.dump_matrices {
        system.write_matrices(d)?;
        for name in ["K.mtx", "M.mtx"] {
            let p = d.join(name);
            let bytes = std::fs::read(&p)?;
            m.outputs.insert(p.display().to_string(), manifest::sha256_hex(&bytes));
        }
    }
    let result = parallel::install(|| solve_smallest(&system, count, &opts))?;
    m.lap("solve");

    println!("# {} cells, {} unknowns, path {:?}", mesh.num_cells(), system.dim(), result.path);
    println!("{:>3}  {:>18}  {:>12}", "i", "omega", "residual");
    for (i, (w, r)) in result.frequencies.iter().zip(&result.residuals).enumerate() {
        println!("{:>3}  {:>18.12}  {:>12.3e}", i + 1, w, r);
    }

    let summary = SolveSummary {
        cells: mesh.num_cells(),
        edges: mesh.num_edges(),
        vertices: mesh.num_vertices(),
        h: mesh_size(&mesh),
        dofs: system.dim(),
        young,
        nu,
        incompressible_limit: material.is_incompressible_limit(),
        gamma,
        result: &result,
    };
    m.write_output(&dir.join("frequencies.json"), to_json(&summary).as_bytes())?;
    let mut csv = String::from("index,omega,kappa,residual\n");
    for i in 0..result.frequencies.len() {
        csv.push_str(&format!("{},{:.15e},{:.15e},{:.3e}\n", i + 1, result.frequencies[i], result.kappas[i], result.residuals[i]));
    }
    m.write_output(&dir.join("frequencies.csv"), csv.as_bytes())?;

    if let Some(p) = &a.vtk {
        let mut fields: Vec<CellField> = Vec::new();
        for (i, x) in result.eigenvectors.iter().enumerate() {
            for mut f in solution_fields(&system, x) {
                f.name = format!("{}_{}", f.name, i + 1);
                fields.push(f);
            }
        }
        write_vtu(p, &mesh, &fields)?;
        let bytes = std::fs::read(p)?;
        m.outputs.insert(p.display().to_string(), manifest::sha256_hex(&bytes));
    }
    m.lap("output");
    m.save(&dir.join("solve.manifest.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct StudySummary {
    tables: Vec<TableSummary>,
    pass: bool,
}

#[derive(Serialize)]
struct TableSummary {
    csv: String,
    table: ConvergenceTable,
    comparison: Option<ComparisonReport>,
    comparison_error: Option<String>,
    pass: bool,
}

fn study_configs(a: &StudyArgs, file: &ConfigFile) -> CliResult<Vec<StudyConfig>> {
    let families: Option<Vec<FamilyTag>> = match file.pick_opt(a.families.clone(), "study.families")? {
        Some(s) => Some(parse_list(&s)?),
        None => None,
    };
    if let Some(test) = file.pick_opt(a.test, "study.test")? {
        let configs = reference_study(test, families.as_deref())?;
        if configs.is_empty() {
            return Err(invalid(format!("no family of test {test} matches the --families filter")));
        }
        return Ok(configs);
    }
    // explicit study from the config file
    let Some(refinements) = file.list::<usize>("study.refinements")? else {
        return Err(invalid("study needs --test or a config file with [study] refinements"));
    };
    let tag: FamilyTag = file.pick(None, "study.family", "t1".to_string())?.parse()?;
    let domain: Domain = file
        .pick(None, "study.domain", if tag == FamilyTag::T6Disk { "disk".to_string() } else { "square".to_string() })?
        .parse()?;
    let mut c = StudyConfig::new(format!("study_{tag}_{domain}"), tag, domain, refinements);
    c.young = file.pick(None, "material.e", 1.0)?;
    c.poisson = file.pick_list(None, "study.nu", c.poisson.clone())?;
    c.gammas = file.pick_list(None, "study.gamma", c.gammas.clone())?;
    c.count = file.pick(None, "study.count", c.count)?;
    if let Some(a) = file.get("mesh.amplitude")? {
        c.family = c.family.with_amplitude(a);
    }
    if let Some(s) = file.get("mesh.seed")? {
        c.family = c.family.with_seed(s);
    }
    c.reference_table = ReferenceData::bundled().find(tag, domain, &c.refinements).map(|t| t.id);
    c.validate()?;
    Ok(vec![c])
}

fn cmd_study(a: StudyArgs) -> CliResult<()> {
    let file = load_config(&a.config)?;
    let mut m = RunManifest::new("study");
    echo_config(&mut m, &file, &a.config);
    let configs = study_configs(&a, &file)?;
    let tolerance = file.pick(a.tolerance, "study.tolerance", 0.01)?;
    let dir = out_dir(&a.out_dir, &file)?;
    m.set("study.tolerance", tolerance);
    let reference = ReferenceData::bundled();
    let mut summary = StudySummary { tables: Vec::new(), pass: true };
    for c in &configs {
        m.set(&format!("study.{}", c.name), serde_json::to_string(c).expect("serializable"));
        let tables = run_refinement_study(c)?;
        for t in &tables {
            for p in t.points.iter().flatten() {
                m.add_timing(&format!("{} nu={} gamma={} n={}", c.name, t.nu, t.gamma, p.n), p.elapsed.as_secs_f64());
            }
        }
        let csv_name = format!("{}.csv", c.name);
        m.write_output(&dir.join(&csv_name), tables_to_csv(&tables).as_bytes())?;
        for t in tables {
            let (comparison, comparison_error) = match c.reference_table.and_then(|id| reference.table(id)) {
                Some(r) => match compare_reference(&t, r, tolerance) {
                    Ok(rep) => (Some(rep), None),
                    Err(e) => (None, Some(e.to_string())),
                },
                None => (None, None),
            };
            let pass = t.failures.is_empty() && comparison.as_ref().is_none_or(|r| r.pass);
            summary.pass &= pass;
            println!(
                "{:<24} nu={:<6} gamma={:<9} {}",
                t.name,
                t.nu,
                t.gamma,
                if pass { "PASS" } else { "FAIL" }
            );
            for f in &t.failures {
                println!("    N={} failed: {}", f.n, f.message);
            }
            summary.tables.push(TableSummary { csv: csv_name.clone(), table: t, comparison, comparison_error, pass });
        }
    }
    m.lap("total");
    m.write_output(&dir.join("summary.json"), to_json(&summary).as_bytes())?;
    m.save(&dir.join("study.manifest.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct SweepPoint {
    n: usize,
    nu: f64,
    gamma: f64,
    h: f64,
    frequencies: Vec<f64>,
    residuals: Vec<f64>,
    error: Option<String>,
}

fn cmd_sweep(a: SweepArgs) -> CliResult<()> {
    let file = load_config(&a.config)?;
    let mut m = RunManifest::new("sweep");
    echo_config(&mut m, &file, &a.config);
    let list = |flag: &Option<String>, key: &str, default: &str| -> CliResult<Vec<f64>> {
        let raw = file.pick(flag.clone(), key, default.to_string())?;
        parse_list(&raw).map_err(|_| invalid(format!("cannot parse list '{raw}'")))
    };
    let nus = list(&a.nu, "study.nu", "0.35,0.49,0.5")?;
    let gammas = list(&a.gamma, "study.gamma", "1")?;
    let n_raw = file.pick(a.n.clone(), "study.refinements", file.raw("mesh.n").unwrap_or("16").to_string())?;
    let ns: Vec<usize> = parse_list(&n_raw).map_err(|_| invalid(format!("cannot parse list '{n_raw}'")))?;
    let young = file.pick(a.young, "material.e", 1.0)?;
    let count = file.pick(a.count, "solver.count", 4)?;
    check_count(count)?;
    if ns.is_empty() || nus.is_empty() || gammas.is_empty() {
        return Err(invalid("empty sweep"));
    }
    for &g in &gammas {
        check_gamma(g)?;
    }
    for &nu in &nus {
        Material::new(young, nu)?;
    }
    let opts = EigenOptions::default();
    let dir = out_dir(&a.out_dir, &file)?;
    let base = MeshOpts { family: a.family.clone(), n: ns.first().copied(), domain: a.domain.clone(), ..Default::default() };
    let spec0 = mesh_spec(&base, &file, None)?;
    m.set("mesh.family", spec0.family.tag);
    m.set("mesh.domain", spec0.domain);
    m.set("sweep.n", &n_raw);
    m.set("sweep.nu", format!("{nus:?}"));
    m.set("sweep.gamma", format!("{gammas:?}"));
    m.set("material.e", young);
    m.set("solver.count", count);

    let mut meshes = BTreeMap::new();
    for &n in &ns {
        let spec = MeshSpec { n, ..spec0 };
        let mesh = build_mesh(&spec)?;
        m.mesh(&format!("n={n}"), &write_mesh_string(&mesh));
        meshes.insert(n, mesh);
    }
    m.lap("mesh");
    let mut jobs = Vec::new();
    for &n in &ns {
        for &nu in &nus {
            for &g in &gammas {
                jobs.push((n, nu, g));
            }
        }
    }
    let points: Vec<SweepPoint> = parallel::install(|| {
        jobs.par_iter()
            .map(|&(n, nu, gamma)| {
                let mesh = &meshes[&n];
                let run = || -> pseudovem::Result<SpectralResult> {
                    let material = Material::new(young, nu)?;
                    let system = assemble_system(mesh, &material, gamma)?;
                    solve_smallest(&system, count, &opts)
                };
                let (frequencies, residuals, error) = match run() {
                    Ok(r) => (r.frequencies, r.residuals, None),
                    Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
                };
                SweepPoint { n, nu, gamma, h: mesh_size(mesh), frequencies, residuals, error }
            })
            .collect()
    });
    m.lap("solve");

    let mut csv = String::from("n,nu,gamma,h");
    for i in 1..=count {
        csv.push_str(&format!(",omega_{i}"));
    }
    csv.push('\n');
    for p in &points {
        csv.push_str(&format!("{},{},{},{:.6e}", p.n, p.nu, p.gamma, p.h));
        for i in 0..count {
            match p.frequencies.get(i) {
                Some(w) => csv.push_str(&format!(",{w:.6}")),
                None => csv.push(','),
            }
        }
        csv.push('\n');
        match &p.error {
            None => println!("n={:<5} nu={:<8} gamma={:<9} {:?}", p.n, p.nu, p.gamma, p.frequencies.iter().map(|w| format!("{w:.5}")).collect::<Vec<_>>()),
            Some(e) => println!("n={:<5} nu={:<8} gamma={:<9} failed: {e}", p.n, p.nu, p.gamma),
        }
    }
    m.write_output(&dir.join("sweep.csv"), csv.as_bytes())?;
    m.write_output(&dir.join("sweep.json"), to_json(&points).as_bytes())?;
    m.lap("output");
    m.save(&dir.join("sweep.manifest.json"))?;
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    if failed == points.len() {
        return Err(Failure { code: 4, message: "every sweep point failed".into() });
    }
    Ok(())
}
