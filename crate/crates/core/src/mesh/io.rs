//! Mesh export/import.
//!
//! The document holds five blocks in order: control points (as a patch
//! document, duplicated points included), continuum connectivity, interface
//! connectivity, continuum Bezier extractors and interface face extractors.
//! Extractors are stored sparsely as `row col value` triplets.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::connectivity::{Element, IgaMesh};
use super::extraction::BezierExtractionSet;
use super::interface::{InterfaceElement, InterfaceKind, InterfaceMesh};
use super::MeshError;
use crate::spline::io::{fmt_real, parse_num, read_patch_from, write_patch, Lines};
use crate::spline::SplineError;

#[derive(Debug, Clone)]
pub struct MeshDocument {
    pub mesh: IgaMesh,
    pub interfaces: InterfaceMesh,
    pub element_extractors: Vec<DMatrix<f64>>,
    pub interface_extractors: Vec<DMatrix<f64>>,
}

impl MeshDocument {
    pub fn new(mesh: IgaMesh, interfaces: InterfaceMesh, ext: &BezierExtractionSet) -> Self {
        let element_extractors = ext.element_operators(&mesh);
        let interface_extractors = interfaces.elements.iter().map(|e| ext.face_operator(e)).collect();
        Self { mesh, interfaces, element_extractors, interface_extractors }
    }
}

fn write_sparse(s: &mut String, id: usize, m: &DMatrix<f64>) {
    let nz: Vec<(usize, usize, f64)> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .filter_map(|(i, j)| (m[(i, j)] != 0.0).then(|| (i, j, m[(i, j)])))
        .collect();
    writeln!(s, "extractor {id} {} {} {}", m.nrows(), m.ncols(), nz.len()).unwrap();
    for (i, j, v) in nz {
        writeln!(s, "{i} {j} {}", fmt_real(v)).unwrap();
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_mesh(doc: &MeshDocument) -> String {
    let mut s = String::new();
    writeln!(s, "iga-mesh 1").unwrap();
    writeln!(s, "block control-points").unwrap();
    s.push_str(&write_patch(&doc.mesh.patch));
    writeln!(s, "block elements {}", doc.mesh.elements.len()).unwrap();
    for e in &doc.mesh.elements {
        writeln!(s, "{} {} {} {} {}", e.id, fmt_real(e.ply_angle), e.material, join(&e.spans), join(&e.conn)).unwrap();
    }
    writeln!(s, "block interfaces {}", doc.interfaces.elements.len()).unwrap();
    for e in &doc.interfaces.elements {
        writeln!(
            s,
            "{} {} {} {} {} {} {}",
            e.id,
            e.kind.as_str(),
            e.normal_dir,
            fmt_real(e.location),
            e.group,
            join(&e.face_spans),
            join(&e.conn)
        )
        .unwrap();
    }
    writeln!(s, "block element-extractors {}", doc.element_extractors.len()).unwrap();
    for (i, m) in doc.element_extractors.iter().enumerate() {
        write_sparse(&mut s, i, m);
    }
    writeln!(s, "block interface-extractors {}", doc.interface_extractors.len()).unwrap();
    for (i, m) in doc.interface_extractors.iter().enumerate() {
        write_sparse(&mut s, i, m);
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Spline(SplineError::Parse { line, message: msg.into() })
}

fn expect_block(lines: &mut Lines<'_>, name: &str) -> Result<usize, MeshError> {
    let (n, t) = lines.expect("block")?;
    if t.get(1) != Some(&name) {
        return Err(perr(n, format!("expected block '{name}'")));
    }
    match t.get(2) {
        Some(c) => Ok(parse_num(n, c)?),
        None => Ok(0),
    }
}

fn read_sparse(lines: &mut Lines<'_>) -> Result<DMatrix<f64>, MeshError> {
    let (n, t) = lines.expect("extractor")?;
    if t.len() != 5 {
        return Err(perr(n, "extractor header needs id rows cols nnz"));
    }
    let rows: usize = parse_num(n, t[2])?;
    let cols: usize = parse_num(n, t[3])?;
    let nnz: usize = parse_num(n, t[4])?;
    let mut m = DMatrix::zeros(rows, cols);
    for _ in 0..nnz {
        let (n, t) = lines.next_tokens().ok_or_else(|| perr(0, "truncated extractor"))?;
        if t.len() != 3 {
            return Err(perr(n, "extractor entries need row col value"));
        }
        let i: usize = parse_num(n, t[0])?;
        let j: usize = parse_num(n, t[1])?;
        if i >= rows || j >= cols {
            return Err(perr(n, "extractor entry out of range"));
        }
        m[(i, j)] = parse_num(n, t[2])?;
    }
    Ok(m)
}

pub fn read_mesh(text: &str) -> Result<MeshDocument, MeshError> {
    let mut lines = Lines::new(text);
    let (n, t) = lines.expect("iga-mesh")?;
    if t.get(1) != Some(&"1") {
        return Err(perr(n, "unsupported mesh format version"));
    }
    expect_block(&mut lines, "control-points")?;
    let patch = read_patch_from(&mut lines)?;
    let dim = patch.param_dim();
    let npe: usize = patch.degrees().iter().map(|p| p + 1).product();

    let ne = expect_block(&mut lines, "elements")?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, t) = lines.next_tokens().ok_or_else(|| perr(0, "truncated element block"))?;
        if t.len() != 3 + dim + npe {
            return Err(perr(n, "wrong element record length"));
        }
        let spans = t[3..3 + dim].iter().map(|s| parse_num::<usize>(n, s)).collect::<Result<Vec<_>, _>>()?;
        let conn = t[3 + dim..].iter().map(|s| parse_num::<usize>(n, s)).collect::<Result<Vec<_>, _>>()?;
        if conn.iter().any(|&c| c >= patch.num_points()) {
            return Err(perr(n, "connectivity index out of range"));
        }
        let bounds = spans
            .iter()
            .enumerate()
            .map(|(d, &s)| {
                let v = patch.knot(d).values();
                if s + 1 >= v.len() {
                    Err(perr(n, "span index out of range"))
                } else {
                    Ok([v[s], v[s + 1]])
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        elements.push(Element {
            id: parse_num(n, t[0])?,
            spans,
            bounds,
            conn,
            ply_angle: parse_num(n, t[1])?,
            material: parse_num(n, t[2])?,
        });
    }

    let ni = expect_block(&mut lines, "interfaces")?;
    let mut ielems = Vec::with_capacity(ni);
    for _ in 0..ni {
        let (n, t) = lines.next_tokens().ok_or_else(|| perr(0, "truncated interface block"))?;
        if t.len() < 5 {
            return Err(perr(n, "wrong interface record length"));
        }
        let kind = InterfaceKind::parse(t[1]).ok_or_else(|| perr(n, format!("unknown element kind '{}'", t[1])))?;
        let normal_dir: usize = parse_num(n, t[2])?;
        if normal_dir >= dim {
            return Err(perr(n, "normal direction out of range"));
        }
        let face_dirs: Vec<usize> = (0..dim).filter(|&d| d != normal_dir).collect();
        let nf = face_dirs.len();
        let npf: usize = face_dirs.iter().map(|&d| patch.knot(d).degree() + 1).product();
        if t.len() != 5 + nf + 2 * npf {
            return Err(perr(n, "wrong interface record length"));
        }
        let face_spans = t[5..5 + nf].iter().map(|s| parse_num::<usize>(n, s)).collect::<Result<Vec<_>, _>>()?;
        let conn = t[5 + nf..].iter().map(|s| parse_num::<usize>(n, s)).collect::<Result<Vec<_>, _>>()?;
        let bounds = face_dirs
            .iter()
            .zip(&face_spans)
            .map(|(&d, &s)| {
                let v = patch.knot(d).values();
                [v[s.min(v.len() - 2)], v[(s + 1).min(v.len() - 1)]]
            })
            .collect();
        ielems.push(InterfaceElement {
            id: parse_num(n, t[0])?,
            conn,
            kind,
            normal_dir,
            location: parse_num(n, t[3])?,
            face_dirs,
            face_spans,
            bounds,
            group: parse_num(n, t[4])?,
        });
    }

    let nx = expect_block(&mut lines, "element-extractors")?;
    let element_extractors = (0..nx).map(|_| read_sparse(&mut lines)).collect::<Result<Vec<_>, _>>()?;
    let nix = expect_block(&mut lines, "interface-extractors")?;
    let interface_extractors = (0..nix).map(|_| read_sparse(&mut lines)).collect::<Result<Vec<_>, _>>()?;

    Ok(MeshDocument {
        mesh: IgaMesh { patch, elements },
        interfaces: InterfaceMesh { elements: ielems },
        element_extractors,
        interface_extractors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{
        bezier_extraction, build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec,
        InterfaceRequest, KindRange,
    };
    use crate::spline::{elevate_degrees, subdivide, KnotVector, NurbsPatch};

    #[test]
    fn round_trip() {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let sq = NurbsPatch::new(
            vec![kv.clone(), kv],
            vec![[0., 0., 0.], [4., 0., 0.], [0., 1., 0.], [4., 1., 0.]],
            vec![1.0; 4],
            2,
        )
        .unwrap();
        let q = subdivide(&elevate_degrees(&sq, &[1, 1]).unwrap(), 0, 3).unwrap();
        let r = insert_discontinuity(&q, &DiscontinuitySpec { direction: 1, cohesive_at: vec![0.5], c0_at: vec![] }).unwrap();
        let mut mesh = build_connectivity(&r);
        mesh.assign_layers(1, &[0.0, 0.5, 1.0], &[0.0, 90.0], &[0, 1]);
        let req = InterfaceRequest {
            normal_dir: 1,
            location: 0.5,
            plane: None,
            partition: vec![KindRange { kind: InterfaceKind::Contact, face_box: vec![[0.6, 1.0]] }],
            group: 0,
        };
        let im = build_interface_connectivity(&mesh, &req).unwrap();
        let ext = bezier_extraction(&mesh);
        let doc = MeshDocument::new(mesh, im, &ext);
        let text = write_mesh(&doc);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back.mesh.patch, doc.mesh.patch);
        assert_eq!(back.mesh.elements, doc.mesh.elements);
        assert_eq!(back.interfaces.elements, doc.interfaces.elements);
        assert_eq!(back.element_extractors, doc.element_extractors);
        assert_eq!(back.interface_extractors, doc.interface_extractors);
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn truncated_document_fails() {
        assert!(read_mesh("iga-mesh 1\nblock control-points\n").is_err());
    }
}
