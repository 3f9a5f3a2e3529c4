use serde::{Deserialize, Serialize};

use super::{boundary_points, refine_spans, Benchmark, CaseError};
use crate::fem::{DofMap, FaceSide, FaceTraction, LoadSpec};
use crate::mesh::{
    build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec, InterfaceMesh,
    InterfaceRequest,
};
use crate::solver::{Monitor, MonitorKind};
use crate::spline::{elevate_degree, KnotVector, NurbsPatch};

/// Singly curved laminate: straight ends of length `l`, a curved middle part
/// of span `L` and rise `h`, constant wall thickness `t` and width `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvedLaminateParams {
    pub straight_length_mm: f64,
    pub curved_length_mm: f64,
    pub thickness_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub plies: usize,
    /// Ply interfaces with interface elements (`i` between plies `i` and
    /// `i + 1`, counted from the base curve); all of them when absent.
    #[serde(default)]
    pub interfaces: Option<Vec<usize>>,
    /// Drop the straight ends (the clamped parts of a test specimen).
    #[serde(default)]
    pub trim_straight_ends: bool,
    /// Extrude the section to a solid of width `w`; otherwise plane strain.
    #[serde(default)]
    pub solid: bool,
}

impl Default for CurvedLaminateParams {
    fn default() -> Self {
        Self {
            straight_length_mm: 80.0,
            curved_length_mm: 100.0,
            thickness_mm: 10.0,
            width_mm: 40.0,
            height_mm: 30.0,
            plies: 4,
            interfaces: None,
            trim_straight_ends: false,
            solid: false,
        }
    }
}

impl CurvedLaminateParams {
    pub fn validate(&self) -> Result<(), CaseError> {
        let pos = [
            ("straight_length_mm", self.straight_length_mm),
            ("curved_length_mm", self.curved_length_mm),
            ("thickness_mm", self.thickness_mm),
            ("width_mm", self.width_mm),
            ("height_mm", self.height_mm),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CaseError::Config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        // the shoulder points sit 10 and 8 mm from the curved part's ends and middle
        if self.curved_length_mm <= 36.0 {
            return Err(CaseError::Config(format!(
                "geometry.curved_length_mm = {} must exceed 36 mm for the shoulder control points",
                self.curved_length_mm
            )));
        }
        if self.height_mm <= 3.0 {
            return Err(CaseError::Config(format!("geometry.height_mm = {} must exceed 3 mm", self.height_mm)));
        }
        if self.plies < 1 {
            return Err(CaseError::Config("geometry.plies must be at least 1".into()));
        }
        if let Some(list) = &self.interfaces {
            let mut seen = std::collections::BTreeSet::new();
            for &i in list {
                if i == 0 || i >= self.plies || !seen.insert(i) {
                    return Err(CaseError::Config(format!(
                        "geometry.interfaces: {i} is repeated or not an interface of {} plies",
                        self.plies
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn selected_interfaces(&self) -> Vec<usize> {
        match &self.interfaces {
            Some(list) => list.clone(),
            None => (1..self.plies).collect(),
        }
    }
}

/// Quality of the control-point offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetReport {
    /// Largest distance between the offset curve and the exact offset
    /// `C(u) + t n(u)` at equal parameter (mm).
    pub max_error_mm: f64,
    /// Smallest radius of curvature of the base curve on the offset side
    /// (infinite when it never bends towards that side).
    pub min_radius_offset_side_mm: f64,
    pub samples: usize,
}

/// Base curve of the cross-section: quadratic B-spline with 11 control
/// points; with `trim` only the part between the straight ends is kept
/// (reparametrized to `[0, 1]`).
pub fn curved_base_curve(params: &CurvedLaminateParams, trim: bool) -> Result<NurbsPatch, CaseError> {
    let (l, cl, h) = (params.straight_length_mm, params.curved_length_mm, params.height_mm);
    let pts = [
        [0.0, 0.0],
        [0.5 * l, 0.0],
        [l, 0.0],
        [l + 10.0, 0.0],
        [l + 0.5 * cl - 8.0, h - 3.0],
        [l + 0.5 * cl, h],
        [l + 0.5 * cl + 8.0, h - 3.0],
        [l + cl - 10.0, 0.0],
        [l + cl, 0.0],
        [1.5 * l + cl, 0.0],
        [2.0 * l + cl, 0.0],
    ];
    let (knots, range): (Vec<f64>, std::ops::RangeInclusive<usize>) = if trim {
        ([1., 1., 1., 2., 3., 4., 5., 6., 6., 6.].iter().map(|k| (k - 1.0) / 5.0).collect(), 2..=8)
    } else {
        ([0., 0., 0., 1., 1., 2., 3., 4., 5., 6., 6., 7., 7., 7.].iter().map(|k| k / 7.0).collect(), 0..=10)
    };
    let cps: Vec<[f64; 3]> = pts[range].iter().map(|p| [p[0], p[1], 0.0]).collect();
    let n = cps.len();
    Ok(NurbsPatch::new(vec![KnotVector::new(knots, 2)?], cps, vec![1.0; n], 2)?)
}

fn left_normal(t: [f64; 3]) -> [f64; 2] {
    let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
    [-t[1] / len, t[0] / len]
}

/// Offsets `curve` by `distance` to its left (the normal `(-y', x')`) by
/// moving each control point along the averaged normal of its adjacent
/// control-polygon legs, scaled so that both legs move by `distance`
/// (same knots and weights, hence the same parametrization).
///
/// Fails with a geometry error when the base curve bends towards the offset
/// side with a radius of curvature not larger than `distance`.
pub fn offset_curve(curve: &NurbsPatch, distance: f64) -> Result<(NurbsPatch, OffsetReport), CaseError> {
    if curve.param_dim() != 1 {
        return Err(CaseError::Geometry("offset needs a curve".into()));
    }
    let pts = curve.points();
    let n = pts.len();
    let legs: Vec<[f64; 2]> = pts
        .windows(2)
        .map(|w| left_normal([w[1][0] - w[0][0], w[1][1] - w[0][1], 0.0]))
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (legs[i.saturating_sub(1)], legs[i.min(n - 2)]);
        let m = [a[0] + b[0], a[1] + b[1]];
        let ml = (m[0] * m[0] + m[1] * m[1]).sqrt();
        if ml < 1e-12 {
            return Err(CaseError::Geometry(format!("control polygon folds back at point {i}")));
        }
        let m = [m[0] / ml, m[1] / ml];
        // miter: the offset legs stay parallel to the original ones
        let scale = distance / (m[0] * a[0] + m[1] * a[1]);
        out.push([pts[i][0] + scale * m[0], pts[i][1] + scale * m[1], 0.0]);
    }
    let offset = NurbsPatch::new(curve.knots().to_vec(), out, curve.weights().to_vec(), 2)?;

    let samples = 64 * curve.knot(0).unique().len();
    let (lo, hi) = (curve.knot(0).first(), curve.knot(0).last());
    let mut max_error: f64 = 0.0;
    let mut min_radius = f64::INFINITY;
    for k in 0..=samples {
        let u = lo + (hi - lo) * k as f64 / samples as f64;
        let (x, d1) = curve.eval_with_tangents(&[u])?;
        let nrm = left_normal(d1[0]);
        let exact = [x[0] + distance * nrm[0], x[1] + distance * nrm[1]];
        let y = offset.eval_point(&[u])?;
        max_error = max_error.max(((y[0] - exact[0]).powi(2) + (y[1] - exact[1]).powi(2)).sqrt());
        let kappa = signed_curvature(curve, u)?;
        if kappa > 0.0 {
            min_radius = min_radius.min(1.0 / kappa);
        }
    }
    if min_radius <= distance {
        return Err(CaseError::Geometry(format!(
            "offset by {distance} mm self-intersects: radius of curvature {min_radius:.4} mm on the offset side"
        )));
    }
    Ok((offset, OffsetReport { max_error_mm: max_error, min_radius_offset_side_mm: min_radius, samples: samples + 1 }))
}

/// Signed curvature (positive when turning left) by central differences of
/// the tangent; one-sided at the ends and at kinks.
fn signed_curvature(curve: &NurbsPatch, u: f64) -> Result<f64, CaseError> {
    let (lo, hi) = (curve.knot(0).first(), curve.knot(0).last());
    let h = 1e-6 * (hi - lo);
    let (a, b) = ((u - h).max(lo), (u + h).min(hi));
    let ta = curve.eval_with_tangents(&[a])?.1[0];
    let tb = curve.eval_with_tangents(&[b])?.1[0];
    let t = curve.eval_with_tangents(&[u])?.1[0];
    let dd = [(tb[0] - ta[0]) / (b - a), (tb[1] - ta[1]) / (b - a)];
    let speed = (t[0] * t[0] + t[1] * t[1]).sqrt();
    Ok((t[0] * dd[1] - t[1] * dd[0]) / speed.powi(3))
}

/// Builds the curved laminate: ruled section between the base curve and
/// its offset, thickness degree raised to `degrees[1]`, C0 lines at every ply boundary
/// and C^-1 lines at the selected interfaces, optionally extruded along `z`.
///
/// `degrees` are `[along the section (at least 2), through the thickness]`;
/// a solid is quadratic across the width. `elements` are `[along the section, per ply, across the width]`.
/// The left end is clamped; the right end carries a unit compressive
/// resultant along `-x` and is held in `y`.
pub fn build_curved_laminate(
    params: &CurvedLaminateParams,
    degrees: [usize; 2],
    elements: [usize; 3],
) -> Result<(Benchmark, OffsetReport), CaseError> {
    params.validate()?;
    let [p, q] = degrees;
    if p < 2 || q < 1 {
        return Err(CaseError::Config("mesh.degrees must be at least [2, 1]".into()));
    }
    if elements[1] < 1 || (params.solid && elements[2] < 1) {
        return Err(CaseError::Config("mesh.elements per ply and across the width must be positive".into()));
    }
    let base = curved_base_curve(params, params.trim_straight_ends)?;
    let base = elevate_degree(&base, 0, p - 2)?;
    // offsetting the refined control polygon keeps the miter error small
    let base = refine_spans(&base, 0, elements[0])?;
    let t = params.thickness_mm;
    let (offset, report) = offset_curve(&base, t)?;

    let mut pts = base.points().to_vec();
    pts.extend_from_slice(offset.points());
    let mut w = base.weights().to_vec();
    w.extend_from_slice(offset.weights());
    let v = KnotVector::new(vec![0., 0., 1., 1.], 1)?;
    let mut patch = NurbsPatch::new(vec![base.knot(0).clone(), v], pts, w, 2)?;
    patch = elevate_degree(&patch, 1, q - 1)?;

    let plies = params.plies;
    let loc = |i: usize| i as f64 / plies as f64;
    let selected = params.selected_interfaces();
    let c0: Vec<f64> = (1..plies).filter(|i| !selected.contains(i)).map(loc).collect();
    let cohesive: Vec<f64> = selected.iter().map(|&i| loc(i)).collect();
    patch = insert_discontinuity(&patch, &DiscontinuitySpec { direction: 1, cohesive_at: cohesive, c0_at: c0 })?;
    patch = refine_spans(&patch, 1, plies * elements[1])?;
    let area = t * params.width_mm;
    let (patch, dim, thickness) = if params.solid {
        let s = patch.extrude([0.0, 0.0, params.width_mm])?;
        let s = elevate_degree(&s, 2, 1)?;
        (refine_spans(&s, 2, elements[2])?, 3, 1.0)
    } else {
        (patch, 2, params.width_mm)
    };

    let mesh = build_connectivity(&patch);
    let mut interfaces = InterfaceMesh::default();
    for (group, &i) in selected.iter().enumerate() {
        interfaces.extend(build_interface_connectivity(
            &mesh,
            &InterfaceRequest { normal_dir: 1, location: loc(i), plane: None, partition: vec![], group },
        )?);
    }

    let mut dofs = DofMap::new(patch.num_points(), dim);
    for pt in boundary_points(&patch, 0, false) {
        for c in 0..dim {
            dofs.fix(pt, c, 0.0)?;
        }
    }
    let right = boundary_points(&patch, 0, true);
    for &pt in &right {
        dofs.fix(pt, 1, 0.0)?;
    }
    let loads = LoadSpec {
        tractions: vec![FaceTraction { dir: 0, side: FaceSide::Upper, traction: [-1.0 / area, 0.0, 0.0], range: vec![] }],
        ..Default::default()
    };
    let monitors = vec![Monitor { name: "end_ux_mm".into(), kind: MonitorKind::Displacement, points: right, comp: 0 }];
    let layer_bounds = (0..=plies).map(loc).collect();
    Ok((
        Benchmark { mesh, interfaces, dofs, loads, monitors, thickness, frame_dir: Some(0), layer_dir: 1, layer_bounds },
        report,
    ))
}
