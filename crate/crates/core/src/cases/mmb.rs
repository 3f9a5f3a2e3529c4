use serde::{Deserialize, Serialize};

use super::{refine_spans, Benchmark, CaseError};
use crate::fem::{DofMap, LoadSpec, PointLoad};
use crate::mesh::{
    build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec, InterfaceKind,
    InterfaceRequest, KindRange, Plane,
};
use crate::solver::{Monitor, MonitorKind};
use crate::spline::{elevate_degrees, insert_knot, KnotVector, NurbsPatch, KNOT_TOL};

/// Mixed-mode bending specimen: two arms of thickness `h` over the span
/// `L`, crack of length `a0` from the loaded end at `x = L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmbParams {
    pub length_mm: f64,
    pub arm_thickness_mm: f64,
    pub width_mm: f64,
    pub crack_length_mm: f64,
    pub lever_mm: f64,
}

impl Default for MmbParams {
    fn default() -> Self {
        Self { length_mm: 100.0, arm_thickness_mm: 3.0, width_mm: 10.0, crack_length_mm: 20.0, lever_mm: 43.72 }
    }
}

impl MmbParams {
    pub fn validate(&self) -> Result<(), CaseError> {
        let pos = [
            ("length_mm", self.length_mm),
            ("arm_thickness_mm", self.arm_thickness_mm),
            ("width_mm", self.width_mm),
            ("crack_length_mm", self.crack_length_mm),
            ("lever_mm", self.lever_mm),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CaseError::Config(format!("geometry.{name} must be positive, got {v}")));
            }
        }
        if self.crack_length_mm >= 0.5 * self.length_mm {
            return Err(CaseError::Config(format!(
                "geometry.crack_length_mm = {} must end before mid-span ({})",
                self.crack_length_mm,
                0.5 * self.length_mm
            )));
        }
        Ok(())
    }
}

/// Ratio `P2/P1` of the mid-span load to the end load for lever length `c`:
/// with `P1 = 2Pc/L` and `P2 = P(2c+L)/L` it is `(2c+L)/(2c)`.
pub fn mmb_load_ratio(lever: f64, length: f64) -> f64 {
    (2.0 * lever + length) / (2.0 * lever)
}

/// Builds the MMB discretization.
///
/// `degrees` and `elements` are given as `[length, thickness]`; the
/// thickness element count must be even (the delamination plane splits it).
/// Loads: `+1` (up) at the cracked-end top corner and `-P2/P1` at the top
/// mid-span control point; simple supports under both ends.
pub fn build_mmb(params: &MmbParams, degrees: [usize; 2], elements: [usize; 2]) -> Result<Benchmark, CaseError> {
    params.validate()?;
    let [p, q] = degrees;
    if p < 1 || q < 1 {
        return Err(CaseError::Config("mesh.degrees must be at least 1".into()));
    }
    if elements[1] < 2 || elements[1] % 2 != 0 {
        return Err(CaseError::Config(format!("mesh.elements[1] = {} must be even and at least 2", elements[1])));
    }
    let l = params.length_mm;
    let h = params.arm_thickness_mm;
    let kv = KnotVector::new(vec![0., 0., 1., 1.], 1)?;
    let pts = vec![[0., 0., 0.], [l, 0., 0.], [0., 2.0 * h, 0.], [l, 2.0 * h, 0.]];
    let mut patch = NurbsPatch::new(vec![kv.clone(), kv], pts, vec![1.0; 4], 2)?;
    patch = elevate_degrees(&patch, &[p - 1, q - 1])?;
    patch = insert_discontinuity(&patch, &DiscontinuitySpec { direction: 1, cohesive_at: vec![0.5], c0_at: vec![] })?;
    // control point under the mid-span load, then the crack-tip line
    patch = insert_knot(&patch, 0, 0.5, p)?;
    let tip = 1.0 - params.crack_length_mm / l;
    patch = insert_knot(&patch, 0, tip, p)?;
    patch = refine_spans(&patch, 0, elements[0])?;
    patch = refine_spans(&patch, 1, elements[1])?;

    let mesh = build_connectivity(&patch);
    let interfaces = build_interface_connectivity(
        &mesh,
        &InterfaceRequest {
            normal_dir: 1,
            location: 0.5,
            plane: Some(Plane { axis: 1, coord: h }),
            partition: vec![KindRange { kind: InterfaceKind::Contact, face_box: vec![[tip, 1.0]] }],
            group: 0,
        },
    )?;

    let counts = patch.counts();
    let (nx, ny) = (counts[0], counts[1]);
    let kx = patch.knot(0).values();
    let mid = kx.iter().position(|&k| (k - 0.5).abs() <= KNOT_TOL).expect("inserted mid-span knot") - 1;
    let top_end = patch.linear_index(&[nx - 1, ny - 1]);
    let top_mid = patch.linear_index(&[mid, ny - 1]);
    let bottom_left = patch.linear_index(&[0, 0]);
    let bottom_right = patch.linear_index(&[nx - 1, 0]);

    let mut dofs = DofMap::new(patch.num_points(), 2);
    dofs.fix(bottom_left, 0, 0.0)?;
    dofs.fix(bottom_left, 1, 0.0)?;
    dofs.fix(bottom_right, 1, 0.0)?;
    let ratio = mmb_load_ratio(params.lever_mm, l);
    let loads = LoadSpec {
        point_loads: vec![
            PointLoad { point: top_end, comp: 1, value: 1.0 },
            PointLoad { point: top_mid, comp: 1, value: -ratio },
        ],
        ..Default::default()
    };
    let monitors = vec![
        Monitor { name: "u1_mm".into(), kind: MonitorKind::Displacement, points: vec![top_end], comp: 1 },
        Monitor { name: "u2_mm".into(), kind: MonitorKind::Displacement, points: vec![top_mid], comp: 1 },
    ];
    Ok(Benchmark {
        mesh,
        interfaces,
        dofs,
        loads,
        monitors,
        thickness: params.width_mm,
        frame_dir: Some(0),
        layer_dir: 1,
        layer_bounds: vec![0.0, 0.5, 1.0],
    })
}
