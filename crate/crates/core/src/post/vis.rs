use std::collections::HashMap;

use crate::fem::gauss_legendre;
use crate::mesh::IgaMesh;
use crate::spline::Side;

/// Linear visualization mesh over the knot-line grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VisMesh {
    pub dim: usize,
    pub subdivisions: usize,
    pub nodes: Vec<[f64; 3]>,
    /// Parameter of each node.
    pub node_params: Vec<Vec<f64>>,
    /// One-sided evaluation per direction (matters on discontinuity lines).
    pub node_sides: Vec<Vec<Side>>,
    /// Element used to evaluate fields at each node.
    pub node_owner: Vec<usize>,
    /// Quads (2D) or hexahedra (3D) in VTK corner order.
    pub cells: Vec<Vec<usize>>,
    pub cell_element: Vec<usize>,
    /// Parent coordinates in `[-1, 1]^d` of each cell corner.
    pub cell_parent: Vec<Vec<[f64; 3]>>,
}

/// Corner offsets in VTK order.
fn corner_offsets(dim: usize) -> Vec<[usize; 3]> {
    let quad = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]];
    if dim == 2 {
        quad.to_vec()
    } else {
        let mut v = quad.to_vec();
        v.extend(quad.iter().map(|c| [c[0], c[1], 1]));
        v
    }
}

/// Interior knot values where the patch is split (multiplicity p+1).
fn split_knots(mesh: &IgaMesh) -> Vec<Vec<f64>> {
    mesh.patch
        .knots()
        .iter()
        .map(|kv| {
            let (a, b) = (kv.first(), kv.last());
            kv.unique().into_iter().filter(|&x| x > a && x < b && kv.multiplicity(x) > kv.degree()).collect()
        })
        .collect()
}

/// Visualization mesh with nodes at (subdivided) knot-line intersections.
/// Nodes are shared by parametric identity; on a discontinuity line the two
/// sides get separate nodes.
pub fn build_vis_mesh(mesh: &IgaMesh, subdivisions: usize) -> VisMesh {
    let s = subdivisions.max(1);
    let dim = mesh.param_dim();
    let patch = &mesh.patch;
    let splits = split_knots(mesh);
    let pts = patch.points();
    let mut index: HashMap<Vec<(u64, u8)>, usize> = HashMap::new();
    let mut vis = VisMesh {
        dim,
        subdivisions: s,
        nodes: Vec::new(),
        node_params: Vec::new(),
        node_sides: Vec::new(),
        node_owner: Vec::new(),
        cells: Vec::new(),
        cell_element: Vec::new(),
        cell_parent: Vec::new(),
    };
    let grid = |e: &crate::mesh::Element, d: usize, i: usize| -> (f64, f64) {
        let [lo, hi] = e.bounds[d];
        let t = -1.0 + 2.0 * i as f64 / s as f64;
        let x = if i == 0 {
            lo
        } else if i == s {
            hi
        } else {
            lo + (hi - lo) * i as f64 / s as f64
        };
        (x, t)
    };
    let offsets = corner_offsets(dim);
    for e in &mesh.elements {
        let nsub = s.pow(dim as u32);
        for sub in 0..nsub {
            let base = [sub % s, (sub / s) % s, sub / (s * s)];
            let mut cell = Vec::with_capacity(offsets.len());
            let mut parent = Vec::with_capacity(offsets.len());
            for off in &offsets {
                let mut param = vec![0.0; dim];
                let mut t = [0.0; 3];
                let mut key = Vec::with_capacity(dim);
                let mut sides = Vec::with_capacity(dim);
                for d in 0..dim {
                    let i = base[d] + off[d];
                    let (x, td) = grid(e, d, i);
                    param[d] = x;
                    t[d] = td;
                    let on_split = splits[d].contains(&x);
                    let side = if on_split && i == s { Side::Left } else { Side::Right };
                    key.push((x.to_bits(), if on_split { 1 + (i == s) as u8 } else { 0 }));
                    sides.push(side);
                }
                let id = *index.entry(key).or_insert_with(|| {
                    let rb = patch.rational_basis_on_spans(&param, &e.spans, 0);
                    let mut x = [0.0; 3];
                    for (&g, &n) in e.conn.iter().zip(&rb.values) {
                        for c in 0..3 {
                            x[c] += n * pts[g][c];
                        }
                    }
                    vis.nodes.push(x);
                    vis.node_params.push(param.clone());
                    vis.node_sides.push(sides.clone());
                    vis.node_owner.push(e.id);
                    vis.nodes.len() - 1
                });
                cell.push(id);
                parent.push(t);
            }
            vis.cells.push(cell);
            vis.cell_element.push(e.id);
            vis.cell_parent.push(parent);
        }
    }
    vis
}

impl VisMesh {
    /// Displacement field (`ncomp` per control point) at the nodes.
    pub fn displacement(&self, mesh: &IgaMesh, u: &[f64], ncomp: usize) -> Vec<[f64; 3]> {
        (0..self.nodes.len())
            .map(|k| {
                let e = &mesh.elements[self.node_owner[k]];
                let rb = mesh.patch.rational_basis_on_spans(&self.node_params[k], &e.spans, 0);
                let mut v = [0.0; 3];
                for (&g, &n) in e.conn.iter().zip(&rb.values) {
                    for c in 0..ncomp {
                        v[c] += n * u[g * ncomp + c];
                    }
                }
                v
            })
            .collect()
    }
}

/// Lagrange polynomials through `nodes`, evaluated at `t`.
fn lagrange(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (t - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

/// Extrapolates values given at the continuum Gauss points (`(p+1)` per
/// direction, first direction fastest) to the vis nodes with a tensor
/// polynomial fitted in the parent domain, then averages arithmetically over
/// the cells sharing each node. Returns one vector of components per node.
pub fn extrapolate_fields(mesh: &IgaMesh, vis: &VisMesh, gauss_values: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let dim = vis.dim;
    let rules: Vec<Vec<f64>> = mesh.patch.degrees().iter().map(|p| gauss_legendre(p + 1).0).collect();
    let ncomp = gauss_values.first().and_then(|e| e.first()).map_or(0, |v| v.len());
    let mut sum = vec![vec![0.0; ncomp]; vis.nodes.len()];
    let mut count = vec![0usize; vis.nodes.len()];
    let sizes: Vec<usize> = rules.iter().map(|r| r.len()).collect();
    for ((cell, parent), &el) in vis.cells.iter().zip(&vis.cell_parent).zip(&vis.cell_element) {
        let gv = &gauss_values[el];
        for (&node, t) in cell.iter().zip(parent) {
            let l: Vec<Vec<f64>> = (0..dim).map(|d| lagrange(&rules[d], t[d])).collect();
            for (q, vals) in gv.iter().enumerate() {
                let mut w = 1.0;
                let mut rest = q;
                for d in 0..dim {
                    w *= l[d][rest % sizes[d]];
                    rest /= sizes[d];
                }
                for (acc, v) in sum[node].iter_mut().zip(vals) {
                    *acc += w * v;
                }
            }
            count[node] += 1;
        }
    }
    sum.into_iter().zip(count).map(|(v, c)| v.into_iter().map(|x| x / c.max(1) as f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::QuadratureRule;
    use crate::mesh::{build_connectivity, insert_discontinuity, DiscontinuitySpec};
    use crate::spline::{elevate_degrees, subdivide, KnotVector, NurbsPatch};

    fn square(p: usize, nx: usize, ny: usize) -> IgaMesh {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let pts = vec![[0., 0., 0.], [2., 0., 0.], [0., 1., 0.], [2.5, 1.5, 0.]];
        let mut q = NurbsPatch::new(vec![kv.clone(), kv], pts, vec![1.0; 4], 2).unwrap();
        q = elevate_degrees(&q, &[p - 1, p - 1]).unwrap();
        q = subdivide(&q, 0, nx).unwrap();
        q = subdivide(&q, 1, ny).unwrap();
        build_connectivity(&q)
    }

    #[test]
    fn grid_counts() {
        let v = build_vis_mesh(&square(2, 1, 1), 1);
        assert_eq!((v.nodes.len(), v.cells.len()), (4, 1));
        let v = build_vis_mesh(&square(2, 2, 2), 1);
        assert_eq!((v.nodes.len(), v.cells.len()), (9, 4));
        let v = build_vis_mesh(&square(2, 2, 2), 3);
        assert_eq!((v.nodes.len(), v.cells.len()), (49, 36));
    }

    #[test]
    fn nodes_lie_on_the_geometry() {
        let mesh = square(3, 3, 2);
        let v = build_vis_mesh(&mesh, 2);
        for (x, (p, s)) in v.nodes.iter().zip(v.node_params.iter().zip(&v.node_sides)) {
            let y = mesh.patch.eval_point_sided(p, s).unwrap();
            for c in 0..3 {
                assert!((x[c] - y[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn discontinuity_duplicates_nodes() {
        let mesh = square(2, 2, 2);
        let q = insert_discontinuity(&mesh.patch, &DiscontinuitySpec { direction: 1, cohesive_at: vec![0.5], c0_at: vec![] })
            .unwrap();
        let split = build_connectivity(&q);
        let v = build_vis_mesh(&split, 1);
        // 3 columns of knot lines, 3 rows plus a duplicated middle row
        assert_eq!(v.nodes.len(), 12);
        let mid: Vec<usize> = (0..v.nodes.len()).filter(|&k| v.node_params[k][1] == 0.5).collect();
        assert_eq!(mid.len(), 6);
        for &a in &mid {
            let twin = mid.iter().filter(|&&b| b != a && v.nodes[b] == v.nodes[a]).count();
            assert_eq!(twin, 1);
        }
        // every node lies on the geometry from its own side
        for (x, (p, s)) in v.nodes.iter().zip(v.node_params.iter().zip(&v.node_sides)) {
            let y = split.patch.eval_point_sided(p, s).unwrap();
            assert!((0..3).all(|c| (x[c] - y[c]).abs() < 1e-12));
        }
    }

    fn gauss_samples(mesh: &IgaMesh, f: impl Fn(f64, f64) -> f64) -> Vec<Vec<Vec<f64>>> {
        let counts: Vec<usize> = mesh.patch.degrees().iter().map(|p| p + 1).collect();
        let rule = QuadratureRule::tensor(&counts);
        mesh.elements
            .iter()
            .map(|e| {
                rule.points
                    .iter()
                    .map(|t| {
                        let x: Vec<f64> = (0..2).map(|d| e.bounds[d][0] + 0.5 * (t[d] + 1.0) * (e.bounds[d][1] - e.bounds[d][0])).collect();
                        vec![f(x[0], x[1])]
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_and_linear_fields_are_reproduced() {
        let mesh = square(2, 3, 2);
        let v = build_vis_mesh(&mesh, 2);
        let c = extrapolate_fields(&mesh, &v, &gauss_samples(&mesh, |_, _| 7.5));
        assert!(c.iter().all(|x| (x[0] - 7.5).abs() < 1e-12));
        // linear in the parameters: element-wise exact, hence continuous
        let f = |a: f64, b: f64| 3.0 * a - 2.0 * b + 0.25 * a * b;
        let l = extrapolate_fields(&mesh, &v, &gauss_samples(&mesh, f));
        for (x, p) in l.iter().zip(&v.node_params) {
            assert!((x[0] - f(p[0], p[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn shared_edge_value_is_the_mean() {
        let mesh = square(1, 2, 1);
        let v = build_vis_mesh(&mesh, 1);
        let g: Vec<Vec<Vec<f64>>> = vec![vec![vec![1.0]; 4], vec![vec![3.0]; 4]];
        let out = extrapolate_fields(&mesh, &v, &g);
        for (x, p) in out.iter().zip(&v.node_params) {
            let expect = if p[0] == 0.5 { 2.0 } else if p[0] < 0.5 { 1.0 } else { 3.0 };
            assert!((x[0] - expect).abs() < 1e-12);
        }
    }
}
