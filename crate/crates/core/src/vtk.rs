//! VTK unstructured-grid (`.vtu`) output with per-cell data.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::GlobalSystem;
use crate::error::{Error, Result};
use crate::polymesh::PolygonMesh;

const VTK_POLYGON: u8 = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    pub name: String,
    pub components: usize,
    /// Cell-major, `components` values per cell.
    pub values: Vec<f64>,
}

impl CellField {
    pub fn scalar(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), components: 1, values }
    }
}

/// Displacement, its magnitude and the projected pseudostress of a solution
/// vector, one constant per cell.
pub fn solution_fields(system: &GlobalSystem<f64>, x: &[f64]) -> Vec<CellField> {
    let cells = system.cell_fields(x);
    let mut u = Vec::with_capacity(3 * cells.len());
    let mut mag = Vec::with_capacity(cells.len());
    let mut rho = Vec::with_capacity(4 * cells.len());
    for (t, d) in &cells {
        u.extend_from_slice(&[d[0], d[1], 0.0]);
        mag.push(d[0].hypot(d[1]));
        rho.extend_from_slice(&t.components());
    }
    vec![
        CellField::scalar("u_magnitude", mag),
        CellField { name: "u".into(), components: 3, values: u },
        CellField { name: "pseudostress".into(), components: 4, values: rho },
    ]
}

pub fn vtu_string(mesh: &PolygonMesh<f64>, fields: &[CellField]) -> Result<String> {
    let nc = mesh.num_cells();
    for f in fields {
        if f.components == 0 || f.values.len() != f.components * nc {
            return Err(Error::InvalidArgument(format!(
                "field '{}' has {} values, expected {} x {nc}",
                f.name,
                f.values.len(),
                f.components
            )));
        }
    }
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(s, "    <Piece NumberOfPoints=\"{}\" NumberOfCells=\"{nc}\">", mesh.num_vertices());

    s.push_str("      <Points>\n        <DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n");
    for p in mesh.vertices() {
        let _ = writeln!(s, "          {:e} {:e} 0", p.x, p.y);
    }
    s.push_str("        </DataArray>\n      </Points>\n");

    s.push_str("      <Cells>\n        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    for c in mesh.cells() {
        let ids: Vec<String> = c.vertex_ids.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "          {}", ids.join(" "));
    }
    s.push_str("        </DataArray>\n        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n");
    let mut offset = 0;
    for c in mesh.cells() {
        offset += c.vertex_ids.len();
        let _ = writeln!(s, "          {offset}");
    }
    s.push_str("        </DataArray>\n        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    for _ in 0..nc {
        let _ = writeln!(s, "          {VTK_POLYGON}");
    }
    s.push_str("        </DataArray>\n      </Cells>\n");

    s.push_str("      <CellData>\n");
    for f in fields {
        let _ = writeln!(
            s,
            "        <DataArray type=\"Float64\" Name=\"{}\" NumberOfComponents=\"{}\" format=\"ascii\">",
            f.name, f.components
        );
        for chunk in f.values.chunks(f.components) {
            let vals: Vec<String> = chunk.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "          {}", vals.join(" "));
        }
        s.push_str("        </DataArray>\n");
    }
    s.push_str("      </CellData>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");
    Ok(s)
}

pub fn write_vtu(path: impl AsRef<Path>, mesh: &PolygonMesh<f64>, fields: &[CellField]) -> Result<()> {
    std::fs::write(path, vtu_string(mesh, fields)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymesh::{generate_mesh, Domain, FamilyTag, MeshFamily};

    #[test]
    fn cell_counts_and_offsets() {
        let m: PolygonMesh<f64> = generate_mesh(&MeshFamily::new(FamilyTag::T3DistortedSquares), 2, Domain::UnitSquare).unwrap();
        let f = CellField::scalar("id", (0..4).map(f64::from).collect());
        let s = vtu_string(&m, &[f]).unwrap();
        assert!(s.contains("NumberOfCells=\"4\""));
        assert!(s.contains("Name=\"id\""));
        assert!(s.trim_end().ends_with("</VTKFile>"));
        assert!(vtu_string(&m, &[CellField::scalar("bad", vec![1.0])]).is_err());
    }
}
