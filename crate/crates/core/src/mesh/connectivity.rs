use crate::spline::{KnotVector, NurbsPatch};

/// A continuum element: one non-zero knot-span box of the patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    /// Knot span index per parametric direction.
    pub spans: Vec<usize>,
    /// Parametric box `[lo, hi]` per direction.
    pub bounds: Vec<[f64; 2]>,
    /// Control points of the non-zero basis functions, first direction fastest.
    pub conn: Vec<usize>,
    /// Ply orientation about the through-thickness axis, degrees.
    pub ply_angle: f64,
    /// Index of the ply material in the case material table.
    pub material: usize,
}

impl Element {
    pub fn param_volume(&self) -> f64 {
        self.bounds.iter().map(|b| b[1] - b[0]).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect()
    }
}

/// Analysis mesh of a single NURBS patch.
#[derive(Debug, Clone)]
pub struct IgaMesh {
    pub patch: NurbsPatch,
    pub elements: Vec<Element>,
}

impl IgaMesh {
    pub fn param_dim(&self) -> usize {
        self.patch.param_dim()
    }

    pub fn spatial_dim(&self) -> usize {
        self.patch.spatial_dim()
    }

    pub fn num_points(&self) -> usize {
        self.patch.num_points()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.patch.degrees().iter().map(|p| p + 1).product()
    }

    /// Assigns ply angle and material by the element centre coordinate along
    /// `dir`: layer `k` covers `[bounds[k], bounds[k+1])`.
    pub fn assign_layers(&mut self, dir: usize, bounds: &[f64], angles: &[f64], materials: &[usize]) {
        for e in self.elements.iter_mut() {
            let c = 0.5 * (e.bounds[dir][0] + e.bounds[dir][1]);
            let k = bounds.windows(2).position(|w| c >= w[0] && c < w[1]).unwrap_or(bounds.len().saturating_sub(2));
            if let Some(&a) = angles.get(k) {
                e.ply_angle = a;
            }
            if let Some(&m) = materials.get(k) {
                e.material = m;
            }
        }
    }
}

/// Global basis indices active on span `span` of `kv`.
pub(crate) fn active(kv: &KnotVector, span: usize) -> std::ops::RangeInclusive<usize> {
    span - kv.degree()..=span
}

/// Tensor product of per-direction index lists into linear indices (first
/// direction fastest) with the given per-direction strides.
pub(crate) fn tensor_conn(lists: &[Vec<usize>], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (d, list) in lists.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for &i in list {
            for &base in &out {
                next.push(base + i * strides[d]);
            }
        }
        out = next;
    }
    out
}

/// One element per non-zero knot-span box; connectivity is the tensor
/// product of the `p+1` basis indices active on each directional span.
pub fn build_connectivity(patch: &NurbsPatch) -> IgaMesh {
    let dim = patch.param_dim();
    let counts = patch.counts();
    let mut strides = vec![1usize; dim];
    for d in 1..dim {
        strides[d] = strides[d - 1] * counts[d - 1];
    }
    let spans: Vec<Vec<usize>> = patch.knots().iter().map(|k| k.nonzero_spans()).collect();
    let total: usize = spans.iter().map(|s| s.len()).product();
    let mut elements = Vec::with_capacity(total);
    let mut counter = vec![0usize; dim];
    for id in 0..total {
        let sp: Vec<usize> = (0..dim).map(|d| spans[d][counter[d]]).collect();
        let bounds = (0..dim)
            .map(|d| {
                let v = patch.knot(d).values();
                [v[sp[d]], v[sp[d] + 1]]
            })
            .collect();
        let lists: Vec<Vec<usize>> = (0..dim).map(|d| active(patch.knot(d), sp[d]).collect()).collect();
        let conn = tensor_conn(&lists, &strides);
        elements.push(Element { id, spans: sp, bounds, conn, ply_angle: 0.0, material: 0 });
        for d in 0..dim {
            counter[d] += 1;
            if counter[d] < spans[d].len() {
                break;
            }
            counter[d] = 0;
        }
    }
    IgaMesh { patch: patch.clone(), elements }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_with_repeated_knot_has_five_elements() {
        let kv = KnotVector::new(vec![0., 0., 0., 1., 2., 3., 4., 4., 5., 5., 5.], 2).unwrap();
        let n = kv.num_basis();
        let pts = (0..n).map(|i| [i as f64, 0., 0.]).collect();
        let patch = NurbsPatch::new(vec![kv], pts, vec![1.0; n], 2).unwrap();
        let mesh = build_connectivity(&patch);
        assert_eq!(mesh.elements.len(), 5);
        let b: Vec<[f64; 2]> = mesh.elements.iter().map(|e| e.bounds[0]).collect();
        assert_eq!(b, vec![[0., 1.], [1., 2.], [2., 3.], [3., 4.], [4., 5.]]);
        // last element spans [4,5] with functions 5,6,7
        assert_eq!(mesh.elements[4].conn, vec![5, 6, 7]);
    }

    #[test]
    fn bilinear_square_single_element() {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let patch = NurbsPatch::new(
            vec![kv.clone(), kv],
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [1., 1., 0.]],
            vec![1.0; 4],
            2,
        )
        .unwrap();
        let mesh = build_connectivity(&patch);
        assert_eq!(mesh.elements.len(), 1);
        // 1-based [1,2,3,4]
        assert_eq!(mesh.elements[0].conn, vec![0, 1, 2, 3]);
    }
}
