use serde::{Deserialize, Serialize};

use super::{boundary_points, refine_spans, Benchmark, CaseError};
use crate::fem::{DofMap, LoadSpec};
use crate::mesh::{
    build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec, InterfaceKind,
    InterfaceRequest, KindRange, Plane,
};
use crate::solver::{Monitor, MonitorKind};
use crate::spline::{elevate_degrees, insert_knot, KnotVector, NurbsPatch};

/// Double cantilever beam: length along `x`, width along `y`, thickness
/// along `z`; the crack runs from the loaded end `x = 0` to `x = a0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcbParams {
    pub length_mm: f64,
    pub width_mm: f64,
    pub thickness_mm: f64,
    pub crack_length_mm: f64,
}

impl Default for DcbParams {
    fn default() -> Self {
        Self { length_mm: 100.0, width_mm: 20.0, thickness_mm: 3.0, crack_length_mm: 30.0 }
    }
}

impl DcbParams {
    pub fn validate(&self) -> Result<(), CaseError> {
        let pos = [
            ("length_mm", self.length_mm),
            ("width_mm", self.width_mm),
            ("thickness_mm", self.thickness_mm),
            ("crack_length_mm", self.crack_length_mm),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CaseError::Config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        if self.crack_length_mm >= self.length_mm {
            return Err(CaseError::Config(format!(
                "geometry.crack_length_mm = {} must be shorter than the beam ({})",
                self.crack_length_mm, self.length_mm
            )));
        }
        Ok(())
    }
}

/// Builds the 3D DCB discretization.
///
/// `degrees` and `elements` are `[length, width, thickness]`; the thickness
/// element count must be even. The loaded end faces of the two arms are
/// driven apart with the pattern `-1/2` (lower) and `+1/2` (upper) in `z`,
/// so the load factor is the opening and its conjugate is the arm force.
/// The far end `x = L` is clamped.
pub fn build_dcb3d(params: &DcbParams, degrees: [usize; 3], elements: [usize; 3]) -> Result<Benchmark, CaseError> {
    params.validate()?;
    if degrees.iter().any(|&p| p < 1) {
        return Err(CaseError::Config("mesh.degrees must be at least 1".into()));
    }
    if elements[2] < 2 || elements[2] % 2 != 0 {
        return Err(CaseError::Config(format!("mesh.elements[2] = {} must be even and at least 2", elements[2])));
    }
    let (l, w, b) = (params.length_mm, params.width_mm, params.thickness_mm);
    let kv = KnotVector::new(vec![0., 0., 1., 1.], 1)?;
    let mut pts = Vec::with_capacity(8);
    for z in [0.0, b] {
        for y in [0.0, w] {
            for x in [0.0, l] {
                pts.push([x, y, z]);
            }
        }
    }
    let mut patch = NurbsPatch::new(vec![kv.clone(), kv.clone(), kv], pts, vec![1.0; 8], 3)?;
    patch = elevate_degrees(&patch, &[degrees[0] - 1, degrees[1] - 1, degrees[2] - 1])?;
    patch = insert_discontinuity(&patch, &DiscontinuitySpec { direction: 2, cohesive_at: vec![0.5], c0_at: vec![] })?;
    let tip = params.crack_length_mm / l;
    patch = insert_knot(&patch, 0, tip, 1)?;
    for (dir, &n) in elements.iter().enumerate() {
        patch = refine_spans(&patch, dir, n)?;
    }

    let mesh = build_connectivity(&patch);
    let interfaces = build_interface_connectivity(
        &mesh,
        &InterfaceRequest {
            normal_dir: 2,
            location: 0.5,
            plane: Some(Plane { axis: 2, coord: 0.5 * b }),
            partition: vec![KindRange { kind: InterfaceKind::Contact, face_box: vec![[0.0, tip], [0.0, 1.0]] }],
            group: 0,
        },
    )?;

    let counts = patch.counts();
    let half = counts[2] / 2;
    let mut dofs = DofMap::new(patch.num_points(), 3);
    for p in boundary_points(&patch, 0, true) {
        for c in 0..3 {
            dofs.fix(p, c, 0.0)?;
        }
    }
    let loaded = boundary_points(&patch, 0, false);
    let (lower, upper): (Vec<usize>, Vec<usize>) = loaded.into_iter().partition(|&p| patch.tensor_index(p)[2] < half);
    for &p in &lower {
        dofs.drive(p, 2, -0.5)?;
    }
    for &p in &upper {
        dofs.drive(p, 2, 0.5)?;
    }
    let monitors = vec![
        Monitor { name: "upper_arm_force_N".into(), kind: MonitorKind::Reaction, points: upper.clone(), comp: 2 },
        Monitor { name: "upper_arm_uz_mm".into(), kind: MonitorKind::Displacement, points: upper, comp: 2 },
    ];
    Ok(Benchmark {
        mesh,
        interfaces,
        dofs,
        loads: LoadSpec::default(),
        monitors,
        thickness: 1.0,
        frame_dir: None,
        layer_dir: 2,
        layer_bounds: vec![0.0, 0.5, 1.0],
    })
}
