use std::fmt::Write as _;
use std::path::Path;

use super::vis::{extrapolate_fields, VisMesh};
use super::PostError;
use crate::fem::Model;
use crate::material::CohesiveState;

pub const VTK_VERTEX: u8 = 1;
pub const VTK_LINE: u8 = 3;
pub const VTK_QUAD: u8 = 9;
pub const VTK_HEXAHEDRON: u8 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attribute {
    Scalars,
    Vectors,
    Tensors,
}

impl Attribute {
    pub fn width(self) -> usize {
        match self {
            Attribute::Scalars => 1,
            Attribute::Vectors => 3,
            Attribute::Tensors => 9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            Attribute::Scalars => "SCALARS",
            Attribute::Vectors => "VECTORS",
            Attribute::Tensors => "TENSORS",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub kind: Attribute,
    /// Flattened, `kind.width()` values per entity.
    pub values: Vec<f64>,
}

/// Legacy ASCII unstructured grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkDocument {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_data: Vec<Field>,
    pub cell_data: Vec<Field>,
}

fn write_fields(out: &mut String, fields: &[Field]) {
    for f in fields {
        match f.kind {
            Attribute::Scalars => {
                let _ = writeln!(out, "SCALARS {} double 1\nLOOKUP_TABLE default", f.name);
            }
            k => {
                let _ = writeln!(out, "{} {} double", k.keyword(), f.name);
            }
        }
        for row in f.values.chunks(f.kind.width()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
}

impl VtkDocument {
    pub fn check(&self) -> Result<(), PostError> {
        if self.cells.len() != self.cell_types.len() {
            return Err(PostError::Consistency("cell and cell-type counts differ".into()));
        }
        if self.cells.iter().flatten().any(|&i| i >= self.points.len()) {
            return Err(PostError::Consistency("cell references a missing point".into()));
        }
        for (fields, n, what) in [(&self.point_data, self.points.len(), "point"), (&self.cell_data, self.cells.len(), "cell")] {
            for f in fields {
                if f.values.len() != n * f.kind.width() {
                    return Err(PostError::Consistency(format!("{what} field '{}' has the wrong length", f.name)));
                }
                if f.name.is_empty() || f.name.contains(char::is_whitespace) {
                    return Err(PostError::Consistency(format!("invalid field name '{}'", f.name)));
                }
            }
        }
        Ok(())
    }

    pub fn render(&self) -> Result<String, PostError> {
        self.check()?;
        let mut out = String::new();
        let title = self.title.replace('\n', " ");
        let _ = writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(out, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2]);
        }
        let size: usize = self.cells.iter().map(|c| c.len() + 1).sum();
        let _ = writeln!(out, "CELLS {} {size}", self.cells.len());
        for c in &self.cells {
            let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{} {}", c.len(), ids.join(" "));
        }
        let _ = writeln!(out, "CELL_TYPES {}", self.cells.len());
        for t in &self.cell_types {
            let _ = writeln!(out, "{t}");
        }
        if !self.point_data.is_empty() {
            let _ = writeln!(out, "POINT_DATA {}", self.points.len());
            write_fields(&mut out, &self.point_data);
        }
        if !self.cell_data.is_empty() {
            let _ = writeln!(out, "CELL_DATA {}", self.cells.len());
            write_fields(&mut out, &self.cell_data);
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), PostError> {
        let text = self.render()?;
        std::fs::write(path, text).map_err(|e| PostError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    /// Parses the subset of the legacy format produced by [`render`](Self::render).
    pub fn parse(text: &str) -> Result<Self, PostError> {
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| PostError::Parse(format!("unexpected end before {what}")));
        if !next("header")?.starts_with("# vtk DataFile") {
            return Err(PostError::Parse("missing vtk header".into()));
        }
        let title = next("title")?.to_string();
        if next("format")?.trim() != "ASCII" {
            return Err(PostError::Parse("only ASCII files are supported".into()));
        }
        if next("dataset")?.trim() != "DATASET UNSTRUCTURED_GRID" {
            return Err(PostError::Parse("only unstructured grids are supported".into()));
        }
        let rest: Vec<&str> = text.lines().skip(4).collect();
        let mut tok = rest.iter().flat_map(|l| l.split_whitespace());
        let mut word = |what: &str| tok.next().ok_or_else(|| PostError::Parse(format!("unexpected end in {what}")));
        macro_rules! num {
            ($t:ty, $what:expr) => {
                word($what)?.parse::<$t>().map_err(|_| PostError::Parse(format!("bad number in {}", $what)))?
            };
        }
        let mut doc = VtkDocument { title, ..Default::default() };
        if word("points")? != "POINTS" {
            return Err(PostError::Parse("expected POINTS".into()));
        }
        let np = num!(usize, "POINTS");
        word("points")?;
        for _ in 0..np {
            doc.points.push([num!(f64, "POINTS"), num!(f64, "POINTS"), num!(f64, "POINTS")]);
        }
        if word("cells")? != "CELLS" {
            return Err(PostError::Parse("expected CELLS".into()));
        }
        let nc = num!(usize, "CELLS");
        num!(usize, "CELLS");
        for _ in 0..nc {
            let k = num!(usize, "CELLS");
            let mut c = Vec::with_capacity(k);
            for _ in 0..k {
                c.push(num!(usize, "CELLS"));
            }
            doc.cells.push(c);
        }
        if word("cell types")? != "CELL_TYPES" {
            return Err(PostError::Parse("expected CELL_TYPES".into()));
        }
        num!(usize, "CELL_TYPES");
        for _ in 0..nc {
            doc.cell_types.push(num!(u8, "CELL_TYPES"));
        }
        let mut target: Option<(bool, usize)> = None;
        while let Ok(w) = word("data") {
            match w {
                "POINT_DATA" => target = Some((true, num!(usize, "POINT_DATA"))),
                "CELL_DATA" => target = Some((false, num!(usize, "CELL_DATA"))),
                "SCALARS" | "VECTORS" | "TENSORS" => {
                    let (is_point, n) = target.ok_or_else(|| PostError::Parse("field outside a data section".into()))?;
                    let kind = match w {
                        "SCALARS" => Attribute::Scalars,
                        "VECTORS" => Attribute::Vectors,
                        _ => Attribute::Tensors,
                    };
                    let name = word("field name")?.to_string();
                    word("field type")?;
                    if kind == Attribute::Scalars {
                        num!(usize, "SCALARS");
                        word("lookup table")?;
                        word("lookup table")?;
                    }
                    let mut values = Vec::with_capacity(n * kind.width());
                    for _ in 0..n * kind.width() {
                        values.push(num!(f64, "field values"));
                    }
                    let f = Field { name, kind, values };
                    if is_point {
                        doc.point_data.push(f);
                    } else {
                        doc.cell_data.push(f);
                    }
                }
                other => return Err(PostError::Parse(format!("unexpected keyword '{other}'"))),
            }
        }
        doc.check().map_err(|e| PostError::Parse(e.to_string()))?;
        Ok(doc)
    }
}

/// File name of step `step` in a field sequence, zero-padded so that the
/// files sort by step.
pub fn field_file_name(prefix: &str, step: usize) -> String {
    format!("{prefix}_{step:05}.vtk")
}

/// Voigt stress (`xx, yy, xy` in 2D; `xx, yy, zz, yz, xz, xy` in 3D) as a
/// row-major 3x3 tensor.
fn stress_tensor(v: &[f64]) -> [f64; 9] {
    if v.len() == 3 {
        [v[0], v[2], 0.0, v[2], v[1], 0.0, 0.0, 0.0, 0.0]
    } else {
        [v[0], v[5], v[4], v[5], v[1], v[3], v[4], v[3], v[2]]
    }
}

/// Continuum fields on the visualization mesh: displacement and nodal
/// averaged stress as point data, element id and ply material as cell data.
pub fn continuum_document(model: &Model, vis: &VisMesh, u: &[f64], title: &str) -> VtkDocument {
    let mesh = &model.spec.mesh;
    let disp = vis.displacement(mesh, u, model.dim);
    let stress = extrapolate_fields(mesh, vis, &model.stresses(u));
    let cell_type = if vis.dim == 2 { VTK_QUAD } else { VTK_HEXAHEDRON };
    VtkDocument {
        title: title.to_string(),
        points: vis.nodes.clone(),
        cells: vis.cells.clone(),
        cell_types: vec![cell_type; vis.cells.len()],
        point_data: vec![
            Field { name: "displacement".into(), kind: Attribute::Vectors, values: disp.iter().flatten().copied().collect() },
            Field { name: "stress".into(), kind: Attribute::Tensors, values: stress.iter().flat_map(|s| stress_tensor(s)).collect() },
        ],
        cell_data: vec![
            Field { name: "element".into(), kind: Attribute::Scalars, values: vis.cell_element.iter().map(|&e| e as f64).collect() },
            Field {
                name: "material".into(),
                kind: Attribute::Scalars,
                values: vis.cell_element.iter().map(|&e| mesh.elements[e].material as f64).collect(),
            },
        ],
    }
}

/// Interface damage: one line/quad cell per interface element on the
/// reference mid-surface (cell value = area-weighted mean damage) followed by
/// one vertex cell per integration point (cell value = point damage). Point
/// data carries the displacement jump at the cell corners.
pub fn interface_document(model: &Model, u: &[f64], states: &[Vec<CohesiveState>], title: &str) -> VtkDocument {
    let mesh = &model.spec.mesh;
    let patch = &mesh.patch;
    let pts = patch.points();
    let nc = model.dim;
    let mut doc = VtkDocument { title: title.to_string(), ..Default::default() };
    let mut jump = Vec::new();
    let mut damage = Vec::new();
    let mut kind = Vec::new();
    for (k, ie) in model.spec.interfaces.elements.iter().enumerate() {
        let nf = ie.face_dirs.len();
        let corners: Vec<Vec<f64>> = if nf == 1 {
            vec![vec![ie.bounds[0][0]], vec![ie.bounds[0][1]]]
        } else {
            let b = &ie.bounds;
            vec![vec![b[0][0], b[1][0]], vec![b[0][1], b[1][0]], vec![b[0][1], b[1][1]], vec![b[0][0], b[1][1]]]
        };
        let (lower, upper) = (ie.lower(), ie.upper());
        let mut cell = Vec::new();
        for s in &corners {
            let (n, _) = ie.face_basis(patch, s);
            let mut x = [0.0; 3];
            let mut j = [0.0; 3];
            for a in 0..n.len() {
                for c in 0..3 {
                    x[c] += 0.5 * n[a] * (pts[lower[a]][c] + pts[upper[a]][c]);
                }
                for c in 0..nc {
                    j[c] += n[a] * (u[upper[a] * nc + c] - u[lower[a] * nc + c]);
                }
            }
            cell.push(doc.points.len());
            doc.points.push(x);
            jump.extend(j);
        }
        doc.cells.push(cell);
        doc.cell_types.push(if nf == 1 { VTK_LINE } else { VTK_QUAD });
        let geom = &model.interface_geometry[k];
        let area = geom.area();
        let mean = geom.gps.iter().zip(&states[k]).map(|(g, s)| g.da * s.d).sum::<f64>() / area;
        damage.push(mean);
        kind.push(0.0);
    }
    for (k, geom) in model.interface_geometry.iter().enumerate() {
        for (gp, s) in geom.gps.iter().zip(&states[k]) {
            doc.cells.push(vec![doc.points.len()]);
            doc.cell_types.push(VTK_VERTEX);
            doc.points.push(gp.x);
            jump.extend([0.0; 3]);
            damage.push(s.d);
            kind.push(1.0);
        }
    }
    doc.point_data.push(Field { name: "jump".into(), kind: Attribute::Vectors, values: jump });
    doc.cell_data.push(Field { name: "damage".into(), kind: Attribute::Scalars, values: damage });
    doc.cell_data.push(Field { name: "integration_point".into(), kind: Attribute::Scalars, values: kind });
    doc
}
