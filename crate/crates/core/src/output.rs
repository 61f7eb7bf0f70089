//! Result files: legacy-VTK meshes with nodal fields and CSV interface profiles.

use std::io::Write;

use crate::elasticity::StressField;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{ElementKind, Mesh};
use crate::model::TractionRecord;

fn vtk_cell_type(kind: ElementKind) -> u8 {
    match kind {
        ElementKind::Line2 => 3,
        ElementKind::T3 => 5,
        ElementKind::Q4 => 9,
    }
}

/// Unstructured-grid dump with displacement, averaged nodal stress and an
/// `active` flag (0 where no active element touches the node).
pub fn write_solution_vtk(
    mut w: impl Write,
    title: &str,
    mesh: &Mesh,
    u: &[Vec2],
    stress: &StressField,
) -> Result<()> {
    if u.len() != mesh.n_nodes() || stress.nodal.len() != mesh.n_nodes() {
        return Err(Error::InvalidArgument(
            "field sizes do not match the mesh".into(),
        ));
    }
    writeln!(
        w,
        "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID",
        title.replace('\n', " ")
    )?;
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for n in &mesh.nodes {
        writeln!(w, "{:.12e} {:.12e} 0", n.x.x, n.x.y)?;
    }
    let size: usize = mesh.elements.iter().map(|e| e.nodes.len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.n_elements(), size)?;
    for e in &mesh.elements {
        let ids: Vec<String> = e.nodes.iter().map(|n| n.to_string()).collect();
        writeln!(w, "{} {}", e.nodes.len(), ids.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_elements())?;
    for e in &mesh.elements {
        writeln!(w, "{}", vtk_cell_type(e.kind))?;
    }
    writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
    writeln!(w, "VECTORS displacement double")?;
    for d in u {
        writeln!(w, "{:.12e} {:.12e} 0", d.x, d.y)?;
    }
    for (c, name) in ["sigma_xx", "sigma_yy", "sigma_xy"].iter().enumerate() {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for s in &stress.nodal {
            writeln!(w, "{:.12e}", s.map_or(0.0, |s| s[c]))?;
        }
    }
    writeln!(w, "SCALARS active int 1\nLOOKUP_TABLE default")?;
    for s in &stress.nodal {
        writeln!(w, "{}", u8::from(s.is_some()))?;
    }
    Ok(())
}

pub const TRACTION_HEADER: [&str; 10] = [
    "node",
    "x",
    "y",
    "s",
    "lambda_x",
    "lambda_y",
    "lambda_rr",
    "sxx",
    "syy",
    "sxy",
];

pub fn fmt_float(v: f64) -> String {
    format!("{v:.12e}")
}

/// Interface profile as CSV; `extra` columns (name, one value per record)
/// are appended after the fixed ones.
pub fn write_traction_csv(
    w: impl Write,
    records: &[TractionRecord],
    extra: &[(String, Vec<f64>)],
) -> Result<()> {
    if extra.iter().any(|(_, v)| v.len() != records.len()) {
        return Err(Error::InvalidArgument(
            "extra profile column length differs from the record count".into(),
        ));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = TRACTION_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend(extra.iter().map(|(n, _)| n.clone()));
    out.write_record(&header).map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        let mut row = vec![r.node.to_string()];
        row.extend(
            [
                r.x.x,
                r.x.y,
                r.arc_length,
                r.traction.x,
                r.traction.y,
                r.radial,
                r.sigma[0],
                r.sigma[1],
                r.sigma[2],
            ]
            .into_iter()
            .map(fmt_float),
        );
        row.extend(extra.iter().map(|(_, v)| fmt_float(v[i])));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::InvalidArgument(format!("csv: {k:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_mesh, Rect};
    use nalgebra::Vector3;

    #[test]
    fn vtk_layout() {
        let m = generate_structured_mesh(Rect::new(0., 0., 2., 1.), 2, 1, ElementKind::Q4, None)
            .unwrap();
        let u = vec![Vec2::new(1.0, 0.0); m.n_nodes()];
        let mut nodal = vec![Some(Vector3::new(1.0, 2.0, 3.0)); m.n_nodes()];
        nodal[0] = None;
        let s = StressField {
            gauss: vec![Vec::new(); 2],
            nodal,
        };
        let mut buf = Vec::new();
        write_solution_vtk(&mut buf, "t", &m, &u, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 6 double"));
        assert!(text.contains("CELLS 2 10"));
        assert!(text.contains("CELL_TYPES 2\n9\n9\n"));
        assert!(text.contains("SCALARS active int 1\nLOOKUP_TABLE default\n0\n1\n"));
        assert!(write_solution_vtk(Vec::new(), "t", &m, &u[..3], &s).is_err());
    }

    #[test]
    fn traction_csv_roundtrip() {
        let r = TractionRecord {
            node: 4,
            x: Vec2::new(0.5, 1.0),
            arc_length: 0.25,
            traction: Vec2::new(0.0, -1.0),
            radial: 0.125,
            sigma: Vector3::new(0.0, -1.0, 1e-17),
        };
        let mut buf = Vec::new();
        write_traction_csv(&mut buf, &[r], &[("ref".into(), vec![-1.0])]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "node,x,y,s,lambda_x,lambda_y,lambda_rr,sxx,syy,sxy,ref"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "4");
        assert_eq!(row[1], "5.000000000000e-1");
        assert_eq!(row[9].parse::<f64>().unwrap(), 1e-17);
        assert_eq!(row[10].parse::<f64>().unwrap(), -1.0);
        assert!(write_traction_csv(Vec::new(), &[r], &[("bad".into(), vec![])]).is_err());
    }
}
