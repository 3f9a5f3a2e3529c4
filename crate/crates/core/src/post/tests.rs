use super::*;
use crate::solver::testing::strip;

#[test]
fn interface_jump_of_a_rigid_opening() {
    let m = strip(3, true, 1e3);
    let mut u = vec![0.0; m.ndofs()];
    let upper: std::collections::BTreeSet<usize> =
        m.spec.interfaces.elements.iter().flat_map(|e| e.upper().iter().copied()).collect();
    // everything above the interface translated by (0.002, 0.01)
    let pts = m.spec.mesh.patch.points();
    for (p, x) in pts.iter().enumerate() {
        if upper.contains(&p) || x[1] > 1.0 + 1e-12 {
            u[2 * p] = 0.002;
            u[2 * p + 1] = 0.01;
        }
    }
    let doc = interface_document(&m, &u, &m.initial_states(), "interface");
    doc.check().unwrap();
    let ne = m.spec.interfaces.elements.len();
    let ngp: usize = m.interface_geometry.iter().map(|g| g.gps.len()).sum();
    assert_eq!(ne, 3);
    assert_eq!(doc.cells.len(), ne + ngp);
    assert!(doc.cell_types[..ne].iter().all(|&t| t == VTK_LINE));
    assert!(doc.cell_types[ne..].iter().all(|&t| t == VTK_VERTEX));
    let jump = &doc.point_data[0].values;
    for c in &doc.cells[..ne] {
        for &p in c {
            assert!((jump[3 * p] - 0.002).abs() < 1e-10);
            assert!((jump[3 * p + 1] - 0.01).abs() < 1e-10);
            assert!((doc.points[p][1] - 1.0).abs() < 1e-10);
        }
    }
    assert!(doc.cell_data[0].values.iter().all(|&d| d == 0.0));
}

#[test]
fn continuum_fields_round_trip_through_text() {
    let m = strip(2, true, 1e3);
    let vis = build_vis_mesh(&m.spec.mesh, 2);
    let u: Vec<f64> = (0..m.ndofs()).map(|i| 1e-3 * i as f64).collect();
    let doc = continuum_document(&m, &vis, &u, "strip");
    let back = VtkDocument::parse(&doc.render().unwrap()).unwrap();
    assert_eq!(back.points.len(), vis.nodes.len());
    assert_eq!(back.cells.len(), vis.cells.len());
    assert_eq!(back.point_data.len(), 2);
    assert_eq!(back.point_data[1].kind, Attribute::Tensors);
    for (a, b) in doc.point_data[1].values.iter().zip(&back.point_data[1].values) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn uniform_strain_gives_uniform_nodal_stress() {
    let m = strip(2, false, 1e3);
    let vis = build_vis_mesh(&m.spec.mesh, 3);
    let pts = m.spec.mesh.patch.points();
    // u_x = 1e-3 x: no interface traction, so the stress is exact
    let mut u = vec![0.0; m.ndofs()];
    for (p, x) in pts.iter().enumerate() {
        u[2 * p] = 1e-3 * x[0];
    }
    let doc = continuum_document(&m, &vis, &u, "uniform");
    let s = &doc.point_data[1].values;
    let sxx = s[0];
    assert!(sxx > 0.0);
    for t in s.chunks(9) {
        assert!((t[0] - sxx).abs() < 1e-9 * sxx);
        assert!(t[1].abs() < 1e-9 * sxx && t[3].abs() < 1e-9 * sxx);
    }
}
