use super::connectivity::{active, tensor_conn, IgaMesh};
use super::MeshError;
use crate::spline::{NurbsPatch, KNOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfaceKind {
    Cohesive,
    Contact,
}

impl InterfaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterfaceKind::Cohesive => "cohesive",
            InterfaceKind::Contact => "contact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cohesive" => Some(InterfaceKind::Cohesive),
            "contact" => Some(InterfaceKind::Contact),
            _ => None,
        }
    }
}

/// Zero-thickness element joining the two faces of a C^-1 discontinuity.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceElement {
    pub id: usize,
    /// Lower-face control points then the mirrored upper-face ones.
    pub conn: Vec<usize>,
    pub kind: InterfaceKind,
    /// Parametric direction crossing the interface.
    pub normal_dir: usize,
    /// Knot value of the discontinuity.
    pub location: f64,
    /// Directions spanning the face, increasing order.
    pub face_dirs: Vec<usize>,
    /// Knot span per face direction.
    pub face_spans: Vec<usize>,
    /// Parametric box per face direction.
    pub bounds: Vec<[f64; 2]>,
    /// Which interface (discontinuity line/surface) the element belongs to.
    pub group: usize,
}

impl InterfaceElement {
    pub fn nodes_per_face(&self) -> usize {
        self.conn.len() / 2
    }

    pub fn lower(&self) -> &[usize] {
        &self.conn[..self.nodes_per_face()]
    }

    pub fn upper(&self) -> &[usize] {
        &self.conn[self.nodes_per_face()..]
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect()
    }

    /// Rational face basis (the trace of the continuum basis on the
    /// discontinuity) and its derivatives along the face directions, at
    /// face parameters `s` (one per face direction).
    pub fn face_basis(&self, patch: &NurbsPatch, s: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let nf = self.face_dirs.len();
        let uni: Vec<Vec<Vec<f64>>> = (0..nf)
            .map(|k| patch.knot(self.face_dirs[k]).ders_on_span(self.face_spans[k], s[k], 1))
            .collect();
        let sizes: Vec<usize> = self.face_dirs.iter().map(|&d| patch.knot(d).degree() + 1).collect();
        let n = self.nodes_per_face();
        let lower = self.lower();
        let mut nw = Vec::with_capacity(n);
        let mut dnw = Vec::with_capacity(n);
        for a in 0..n {
            let (i0, i1) = if nf == 2 { (a % sizes[0], a / sizes[0]) } else { (a, 0) };
            let w = patch.weights()[lower[a]];
            let (v, dv) = if nf == 2 {
                (
                    uni[0][0][i0] * uni[1][0][i1],
                    [uni[0][1][i0] * uni[1][0][i1], uni[0][0][i0] * uni[1][1][i1]],
                )
            } else {
                (uni[0][0][i0], [uni[0][1][i0], 0.0])
            };
            nw.push(v * w);
            dnw.push([dv[0] * w, dv[1] * w]);
        }
        let ws: f64 = nw.iter().sum();
        let dws = dnw.iter().fold([0.0; 2], |acc, d| [acc[0] + d[0], acc[1] + d[1]]);
        let values = nw.iter().map(|v| v / ws).collect();
        let derivs = nw
            .iter()
            .zip(&dnw)
            .map(|(v, d)| [(d[0] * ws - v * dws[0]) / (ws * ws), (d[1] * ws - v * dws[1]) / (ws * ws)])
            .collect();
        (values, derivs)
    }
}

#[derive(Debug, Clone, Default)]
pub struct InterfaceMesh {
    pub elements: Vec<InterfaceElement>,
}

impl InterfaceMesh {
    pub fn count(&self, kind: InterfaceKind) -> usize {
        self.elements.iter().filter(|e| e.kind == kind).count()
    }

    pub fn extend(&mut self, other: InterfaceMesh) {
        let offset = self.elements.len();
        for mut e in other.elements {
            e.id += offset;
            self.elements.push(e);
        }
    }
}

/// Physical plane used to cross-check the collected duplicate points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub axis: usize,
    pub coord: f64,
}

/// Parametric face box assigned a given element kind.
#[derive(Debug, Clone, PartialEq)]
pub struct KindRange {
    pub kind: InterfaceKind,
    /// `[lo, hi]` per face direction.
    pub face_box: Vec<[f64; 2]>,
}

/// Request for one interface along a C^-1 knot.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceRequest {
    pub normal_dir: usize,
    pub location: f64,
    pub plane: Option<Plane>,
    /// Elements whose face centre lies inside a range take its kind;
    /// everything else is cohesive.
    pub partition: Vec<KindRange>,
    pub group: usize,
}

const PLANE_TOL: f64 = 1e-10;

/// Builds interface elements along the C^-1 knot `request.location`.
///
/// Lower/upper faces are the two control-point layers adjacent to the
/// repeated knot along the normal direction; the optional physical plane is
/// used as a cross-check.
pub fn build_interface_connectivity(mesh: &IgaMesh, request: &InterfaceRequest) -> Result<InterfaceMesh, MeshError> {
    let patch = &mesh.patch;
    let nd = request.normal_dir;
    if nd >= patch.param_dim() {
        return Err(MeshError::Consistency(format!("normal direction {nd} out of range")));
    }
    let kv = patch.knot(nd);
    let p = kv.degree();
    let first_pos = kv
        .values()
        .iter()
        .position(|&k| (k - request.location).abs() <= KNOT_TOL)
        .ok_or_else(|| MeshError::Consistency(format!("no knot at {}", request.location)))?;
    let mult = kv.multiplicity(request.location);
    if mult != p + 1 {
        return Err(MeshError::Consistency(format!(
            "knot {} has multiplicity {mult}, need {} for a discontinuity",
            request.location,
            p + 1
        )));
    }
    let lower_layer = first_pos - 1;
    let upper_layer = first_pos;

    let counts = patch.counts();
    let dim = patch.param_dim();
    let mut strides = vec![1usize; dim];
    for d in 1..dim {
        strides[d] = strides[d - 1] * counts[d - 1];
    }
    let face_dirs: Vec<usize> = (0..dim).filter(|&d| d != nd).collect();

    // duplicated layers must coincide geometrically
    let layer = |l: usize| -> Vec<usize> {
        let lists: Vec<Vec<usize>> = (0..dim).map(|d| if d == nd { vec![l] } else { (0..counts[d]).collect() }).collect();
        tensor_conn(&lists, &strides)
    };
    let lower_pts = layer(lower_layer);
    let upper_pts = layer(upper_layer);
    for (&a, &b) in lower_pts.iter().zip(&upper_pts) {
        let d = crate::spline::dist(&patch.points()[a], &patch.points()[b]);
        if d > PLANE_TOL * (1.0 + patch.diameter()) {
            return Err(MeshError::Consistency(format!(
                "duplicated control points {a} and {b} are {d:e} apart"
            )));
        }
    }
    if let Some(plane) = request.plane {
        let on_plane: Vec<usize> = (0..patch.num_points())
            .filter(|&i| (patch.points()[i][plane.axis] - plane.coord).abs() < PLANE_TOL)
            .collect();
        if on_plane.len() % 2 != 0 {
            return Err(MeshError::Consistency(format!(
                "odd number ({}) of control points on the interface plane",
                on_plane.len()
            )));
        }
        let mut expected: Vec<usize> = lower_pts.iter().chain(&upper_pts).copied().collect();
        expected.sort_unstable();
        if expected != on_plane {
            return Err(MeshError::Consistency(
                "control points on the physical plane do not match the duplicated layers".into(),
            ));
        }
    }

    let face_spans: Vec<Vec<usize>> = face_dirs.iter().map(|&d| patch.knot(d).nonzero_spans()).collect();
    let total: usize = face_spans.iter().map(|s| s.len()).product();
    let mut elements = Vec::with_capacity(total);
    let mut counter = vec![0usize; face_dirs.len()];
    for id in 0..total {
        let sp: Vec<usize> = (0..face_dirs.len()).map(|k| face_spans[k][counter[k]]).collect();
        let bounds: Vec<[f64; 2]> = face_dirs
            .iter()
            .zip(&sp)
            .map(|(&d, &s)| {
                let v = patch.knot(d).values();
                [v[s], v[s + 1]]
            })
            .collect();
        let mut conn = Vec::new();
        for l in [lower_layer, upper_layer] {
            let lists: Vec<Vec<usize>> = (0..dim)
                .map(|d| {
                    if d == nd {
                        vec![l]
                    } else {
                        let k = face_dirs.iter().position(|&f| f == d).expect("face dir");
                        active(patch.knot(d), sp[k]).collect()
                    }
                })
                .collect();
            conn.extend(tensor_conn(&lists, &strides));
        }
        let center: Vec<f64> = bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect();
        let kind = request
            .partition
            .iter()
            .find(|r| r.face_box.iter().zip(&center).all(|(b, &c)| c >= b[0] && c <= b[1]))
            .map(|r| r.kind)
            .unwrap_or(InterfaceKind::Cohesive);
        elements.push(InterfaceElement {
            id,
            conn,
            kind,
            normal_dir: nd,
            location: kv.values()[first_pos],
            face_dirs: face_dirs.clone(),
            face_spans: sp,
            bounds,
            group: request.group,
        });
        for k in 0..face_dirs.len() {
            counter[k] += 1;
            if counter[k] < face_spans[k].len() {
                break;
            }
            counter[k] = 0;
        }
    }
    Ok(InterfaceMesh { elements })
}
