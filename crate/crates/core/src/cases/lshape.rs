use serde::{Deserialize, Serialize};

use super::{boundary_points, has_knot, refine_spans, Benchmark, CaseError};
use crate::fem::{DofMap, LoadSpec};
use crate::mesh::{
    build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec, InterfaceKind,
    InterfaceMesh, InterfaceRequest, KindRange,
};
use crate::solver::{Monitor, MonitorKind};
use crate::spline::{elevate_degrees, insert_knot, point_inversion, KnotVector, NurbsPatch, SplineError, KNOT_TOL};

/// L-shaped laminate: two straight arms of length `H` joined by a quarter
/// circle whose inner radius is `R`; the laminate thickness is `R0`, split
/// into equal plies stacked from the inner surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LShapeParams {
    pub arm_length_mm: f64,
    pub inner_radius_mm: f64,
    pub thickness_mm: f64,
    pub plies: usize,
    /// Out-of-plane width of the plane-strain section.
    #[serde(default = "unit_width")]
    pub width_mm: f64,
    /// Ply interfaces carrying interface elements, numbered `i` for the
    /// interface between plies `i` and `i + 1` (counted from the inner side).
    pub interfaces: Vec<usize>,
    #[serde(default)]
    pub crack: Option<CrackTips>,
    #[serde(default)]
    pub support: LShapeSupport,
}

fn unit_width() -> f64 {
    1.0
}

/// Initial crack on one interface between two physical tip points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackTips {
    pub interface: usize,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

/// Boundary conditions: the end of the horizontal arm is clamped and the
/// end face of the vertical arm is driven with this displacement pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LShapeSupport {
    pub drive: [f64; 2],
}

impl Default for LShapeSupport {
    fn default() -> Self {
        Self { drive: [-1.0, 0.0] }
    }
}

impl Default for LShapeParams {
    fn default() -> Self {
        Self {
            arm_length_mm: 6.4,
            inner_radius_mm: 2.55,
            thickness_mm: 2.25,
            plies: 15,
            width_mm: 1.0,
            interfaces: vec![5],
            crack: None,
            support: LShapeSupport::default(),
        }
    }
}

impl LShapeParams {
    pub fn ply_thickness(&self) -> f64 {
        self.thickness_mm / self.plies as f64
    }

    /// Parametric thickness coordinate of ply interface `i`.
    pub fn interface_location(&self, i: usize) -> f64 {
        i as f64 / self.plies as f64
    }

    /// Radius of ply interface `i` in the bend.
    pub fn interface_radius(&self, i: usize) -> f64 {
        self.inner_radius_mm + i as f64 * self.ply_thickness()
    }

    /// Point of ply interface `i` in the bend at angle `phi` (degrees),
    /// measured from the horizontal arm (0) to the vertical arm (90).
    pub fn bend_point(&self, i: usize, phi_deg: f64) -> [f64; 2] {
        let (r, c) = (self.interface_radius(i), self.inner_radius_mm);
        let phi = phi_deg.to_radians();
        [c - r * phi.sin(), c - r * phi.cos()]
    }

    pub fn validate(&self) -> Result<(), CaseError> {
        let pos = [
            ("arm_length_mm", self.arm_length_mm),
            ("inner_radius_mm", self.inner_radius_mm),
            ("thickness_mm", self.thickness_mm),
            ("width_mm", self.width_mm),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CaseError::Config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        if self.thickness_mm >= self.inner_radius_mm {
            return Err(CaseError::Config(format!(
                "geometry.thickness_mm = {} must be smaller than inner_radius_mm = {}",
                self.thickness_mm, self.inner_radius_mm
            )));
        }
        if self.plies < 1 {
            return Err(CaseError::Config("geometry.plies must be at least 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &i in &self.interfaces {
            if i == 0 || i >= self.plies {
                return Err(CaseError::Config(format!(
                    "geometry.interfaces: {i} is not an interface of {} plies (valid 1..={})",
                    self.plies,
                    self.plies - 1
                )));
            }
            if !seen.insert(i) {
                return Err(CaseError::Config(format!("geometry.interfaces lists {i} twice")));
            }
        }
        if let Some(c) = &self.crack {
            if !self.interfaces.contains(&c.interface) {
                return Err(CaseError::Config(format!(
                    "geometry.crack.interface = {} is not among the selected interfaces",
                    c.interface
                )));
            }
        }
        if self.support.drive.iter().all(|&d| d == 0.0) || self.support.drive.iter().any(|d| !d.is_finite()) {
            return Err(CaseError::Config("geometry.support.drive must be a finite non-zero pattern".into()));
        }
        Ok(())
    }
}

/// The exact quadratic-linear NURBS of the section: 7 x 2 control points,
/// inner arc of radius `R` and outer arc of radius `R + R0` centred at
/// `(R, R)`, corner weights `1/sqrt(2)`. `xi` runs from the end of the
/// horizontal arm to the end of the vertical arm; `eta = 0` is the inner
/// surface.
pub fn lshape_patch(params: &LShapeParams) -> Result<NurbsPatch, CaseError> {
    let (h, r, r0) = (params.arm_length_mm, params.inner_radius_mm, params.thickness_mm);
    let u = KnotVector::new([0., 0., 0., 1., 1., 2., 2., 3., 3., 3.].iter().map(|k| k / 3.0).collect(), 2)?;
    let v = KnotVector::new(vec![0., 0., 1., 1.], 1)?;
    let inner = [[h + r, 0.], [(h + r) / 2., 0.], [r, 0.], [0., 0.], [0., r], [0., (h + r) / 2.], [0., h + r]];
    let outer =
        [[h + r, -r0], [(h + r) / 2., -r0], [r, -r0], [-r0, -r0], [-r0, r], [-r0, (h + r) / 2.], [-r0, h + r]];
    let fac = 1.0 / 2f64.sqrt();
    let mut pts = Vec::with_capacity(14);
    let mut w = Vec::with_capacity(14);
    for row in [inner, outer] {
        for (k, p) in row.iter().enumerate() {
            pts.push([p[0], p[1], 0.0]);
            w.push(if k == 3 { fac } else { 1.0 });
        }
    }
    Ok(NurbsPatch::new(vec![u, v], pts, w, 2)?)
}

/// Curve `patch(., eta)` for an `eta` at which the thickness basis is
/// interpolatory (multiplicity at least the degree).
fn iso_curve(patch: &NurbsPatch, eta: f64) -> Result<NurbsPatch, CaseError> {
    let kv = patch.knot(1);
    let q = kv.degree();
    let eval = kv.basis_functions(eta, 0)?;
    let vals = &eval.ders[0];
    let (k, &one) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite basis"))
        .expect("non-empty basis");
    if (one - 1.0).abs() > 1e-12 {
        return Err(CaseError::Geometry(format!("thickness basis is not interpolatory at {eta}")));
    }
    let row = eval.span - q + k;
    let n = patch.counts()[0];
    let idx: Vec<usize> = (0..n).map(|i| patch.linear_index(&[i, row])).collect();
    let pts = idx.iter().map(|&i| patch.points()[i]).collect();
    let w = idx.iter().map(|&i| patch.weights()[i]).collect();
    Ok(NurbsPatch::new(vec![patch.knot(0).clone()], pts, w, 2)?)
}

/// Raises the multiplicity of `x` in direction `dir` to at least `target`.
fn raise_multiplicity(patch: &NurbsPatch, dir: usize, x: f64, target: usize) -> Result<NurbsPatch, SplineError> {
    let m = patch.knot(dir).multiplicity(x);
    if m >= target {
        Ok(patch.clone())
    } else {
        insert_knot(patch, dir, x, target - m)
    }
}

/// Builds the L-shape discretization: `degrees` and `elements` are
/// `[along the section, through one ply]`, so the thickness direction gets
/// `plies * elements[1]` elements.
pub fn build_lshape(params: &LShapeParams, degrees: [usize; 2], elements: [usize; 2]) -> Result<Benchmark, CaseError> {
    params.validate()?;
    let [p, q] = degrees;
    if p < 2 || q < 1 {
        return Err(CaseError::Config("mesh.degrees must be at least [2, 1] for the exact arcs".into()));
    }
    if elements[1] < 1 {
        return Err(CaseError::Config("mesh.elements[1] (elements per ply) must be positive".into()));
    }
    let plies = params.plies;
    let mut patch = elevate_degrees(&lshape_patch(params)?, &[p - 2, q - 1])?;
    // C0 ply boundaries first: every ply interface is then an exact iso-curve
    let c0: Vec<f64> = (1..plies).map(|i| params.interface_location(i)).collect();
    patch = insert_discontinuity(&patch, &DiscontinuitySpec { direction: 1, cohesive_at: vec![], c0_at: c0 })?;

    let mut crack_range = None;
    if let Some(c) = &params.crack {
        let curve = iso_curve(&patch, params.interface_location(c.interface))?;
        let tol = 1e-8 * patch.diameter();
        let invert = |x: [f64; 2], name: &str| {
            point_inversion(&curve, [x[0], x[1], 0.0], tol, 50).map_err(|e| {
                CaseError::Config(format!(
                    "geometry.crack.{name} = ({}, {}) does not lie on interface {}: {e}",
                    x[0], x[1], c.interface
                ))
            })
        };
        let (a, b) = (invert(c.x1, "x1")?, invert(c.x2, "x2")?);
        let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
        if hi - lo <= KNOT_TOL {
            return Err(CaseError::Config("geometry.crack tips coincide".into()));
        }
        // snap to existing knots so arc/arm junctions are not split twice
        for x in [&mut lo, &mut hi] {
            if let Some(&k) = patch.knot(0).values().iter().find(|&&k| (k - *x).abs() <= 1e-9) {
                *x = k;
            }
        }
        for x in [lo, hi] {
            if x > KNOT_TOL && x < 1.0 - KNOT_TOL {
                patch = raise_multiplicity(&patch, 0, x, p)?;
            }
        }
        crack_range = Some((c.interface, lo, hi));
    }
    let cohesive: Vec<f64> = params.interfaces.iter().map(|&i| params.interface_location(i)).collect();
    patch = insert_discontinuity(&patch, &DiscontinuitySpec { direction: 1, cohesive_at: cohesive, c0_at: vec![] })?;
    patch = refine_spans(&patch, 0, elements[0])?;
    patch = refine_spans(&patch, 1, plies * elements[1])?;
    debug_assert!(params.interfaces.iter().all(|&i| has_knot(&patch, 1, params.interface_location(i))));

    let mesh = build_connectivity(&patch);
    let mut interfaces = InterfaceMesh::default();
    for (group, &i) in params.interfaces.iter().enumerate() {
        let partition = match crack_range {
            Some((ci, lo, hi)) if ci == i => vec![KindRange { kind: InterfaceKind::Contact, face_box: vec![[lo, hi]] }],
            _ => vec![],
        };
        interfaces.extend(build_interface_connectivity(
            &mesh,
            &InterfaceRequest { normal_dir: 1, location: params.interface_location(i), plane: None, partition, group },
        )?);
    }

    let mut dofs = DofMap::new(patch.num_points(), 2);
    for pt in boundary_points(&patch, 0, false) {
        dofs.fix(pt, 0, 0.0)?;
        dofs.fix(pt, 1, 0.0)?;
    }
    let driven = boundary_points(&patch, 0, true);
    for &pt in &driven {
        // a zero pattern component leaves that direction free
        for (c, &d) in params.support.drive.iter().enumerate().filter(|(_, d)| **d != 0.0) {
            dofs.drive(pt, c, d)?;
        }
    }
    let monitors = vec![
        Monitor { name: "end_ux_mm".into(), kind: MonitorKind::Displacement, points: driven.clone(), comp: 0 },
        Monitor { name: "end_uy_mm".into(), kind: MonitorKind::Displacement, points: driven.clone(), comp: 1 },
        Monitor { name: "end_reaction_x_N".into(), kind: MonitorKind::Reaction, points: driven, comp: 0 },
    ];
    let layer_bounds = (0..=plies).map(|i| params.interface_location(i)).collect();
    Ok(Benchmark {
        mesh,
        interfaces,
        dofs,
        loads: LoadSpec::default(),
        monitors,
        thickness: params.width_mm,
        frame_dir: Some(0),
        layer_dir: 1,
        layer_bounds,
    })
}
