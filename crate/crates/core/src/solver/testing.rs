//! Small models shared by the solver tests.

use crate::fem::{BasisPath, DofMap, LoadSpec, Model, ModelSpec, PointLoad};
use crate::material::{CohesiveParams, ContactParams, PlyElasticity, Regime};
use crate::mesh::{build_connectivity, build_interface_connectivity, insert_discontinuity, DiscontinuitySpec, InterfaceRequest};
use crate::spline::{subdivide, KnotVector, NurbsPatch};

/// Bilinear strip of `nx` elements with a mid-height interface; the
/// bottom is clamped, the top row either pulled by forces or driven.
pub(crate) fn strip(nx: usize, driven: bool, e: f64) -> Model {
    let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
    let w = 2.0;
    let pts = vec![[0., 0., 0.], [w, 0., 0.], [0., 2., 0.], [w, 2., 0.]];
    let mut q = NurbsPatch::new(vec![kv.clone(), kv], pts, vec![1.0; 4], 2).unwrap();
    q = subdivide(&q, 0, nx).unwrap();
    q = insert_discontinuity(&q, &DiscontinuitySpec { direction: 1, cohesive_at: vec![0.5], c0_at: vec![] }).unwrap();
    let mesh = build_connectivity(&q);
    let im = build_interface_connectivity(
        &mesh,
        &InterfaceRequest { normal_dir: 1, location: 0.5, plane: None, partition: vec![], group: 0 },
    )
    .unwrap();
    let n = mesh.num_points();
    let mut dofs = DofMap::new(n, 2);
    let mut loads = LoadSpec::default();
    for i in 0..n {
        let t = q.tensor_index(i);
        dofs.fix(i, 0, 0.0).unwrap();
        if t[1] == 0 {
            dofs.fix(i, 1, 0.0).unwrap();
        } else if t[1] == 3 {
            // slightly uneven pull so the opening is not uniform
            let s = 1.0 + 0.05 * t[0] as f64;
            if driven {
                dofs.drive(i, 1, s).unwrap();
            } else {
                loads.point_loads.push(PointLoad { point: i, comp: 1, value: s });
            }
        }
    }
    Model::new(ModelSpec {
        mesh,
        interfaces: im,
        regime: Regime::PlaneStrain,
        thickness: 1.0,
        plies: vec![PlyElasticity::isotropic(e, 0.3)],
        cohesive: vec![CohesiveParams { stiffness: 1e4, tau_n: 10.0, tau_s: 12.0, g_ic: 0.5, g_iic: 1.0, eta: 2.0 }],
        contact: ContactParams { penalty: 1e4 },
        dofs,
        loads,
        frame_dir: None,
        basis: BasisPath::Direct,
    })
    .unwrap()
}
