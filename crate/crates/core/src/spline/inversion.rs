use super::patch::{dist, NurbsPatch};
use super::SplineError;

const SEED_SAMPLES: usize = 64;
const SEED_STARTS: usize = 3;

/// Parameter of the point on a curve closest to `target`, by Newton
/// iteration on `(C(u) - x) . C'(u) = 0` started from the best coarse samples.
pub fn point_inversion(curve: &NurbsPatch, target: [f64; 3], tol: f64, max_iter: usize) -> Result<f64, SplineError> {
    if curve.param_dim() != 1 {
        return Err(SplineError::InvalidPatch("point inversion needs a curve".into()));
    }
    let (lo, hi) = (curve.knot(0).first(), curve.knot(0).last());
    let mut seeds: Vec<(f64, f64)> = (0..SEED_SAMPLES)
        .map(|k| {
            let u = lo + (hi - lo) * k as f64 / (SEED_SAMPLES - 1) as f64;
            let x = curve.eval_point(&[u]).expect("seed inside domain");
            (dist(&x, &target), u)
        })
        .collect();
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distance"));

    let mut best = (f64::INFINITY, lo);
    for &(_, u0) in seeds.iter().take(SEED_STARTS) {
        let (res, u) = newton_from(curve, target, u0, lo, hi, tol, max_iter);
        if res < best.0 {
            best = (res, u);
        }
    }
    if best.0 < tol {
        Ok(best.1)
    } else {
        Err(SplineError::Inversion { residual: best.0, parameter: best.1 })
    }
}

fn newton_from(curve: &NurbsPatch, target: [f64; 3], u0: f64, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut u = u0;
    let h = 1e-7 * (hi - lo);
    for _ in 0..max_iter {
        let (x, d1) = curve.eval_with_tangents(&[u]).expect("clamped parameter");
        let diff = [x[0] - target[0], x[1] - target[1], x[2] - target[2]];
        let t = d1[0];
        let f = diff[0] * t[0] + diff[1] * t[1] + diff[2] * t[2];
        // second derivative by central differences of the tangent
        let up = (u + h).min(hi);
        let um = (u - h).max(lo);
        let tp = curve.eval_with_tangents(&[up]).expect("in domain").1[0];
        let tm = curve.eval_with_tangents(&[um]).expect("in domain").1[0];
        let d2: Vec<f64> = (0..3).map(|c| (tp[c] - tm[c]) / (up - um)).collect();
        let fp = t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + diff.iter().zip(&d2).map(|(a, b)| a * b).sum::<f64>();
        if fp.abs() < f64::MIN_POSITIVE {
            break;
        }
        let step = f / fp;
        let next = (u - step).clamp(lo, hi);
        let moved = (next - u).abs();
        u = next;
        let res = dist(&curve.eval_point(&[u]).expect("in domain"), &target);
        if res < 1e-3 * tol || moved < 1e-15 * (hi - lo) {
            break;
        }
    }
    (dist(&curve.eval_point(&[u]).expect("in domain"), &target), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;

    #[test]
    fn straight_segment() {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let c = NurbsPatch::new(vec![kv], vec![[0., 0., 0.], [1., 0., 0.]], vec![1., 1.], 2).unwrap();
        let u = point_inversion(&c, [0.3, 0.0, 0.0], 1e-10, 50).unwrap();
        assert!((u - 0.3).abs() < 1e-10);
        // slightly off the curve still projects
        let u = point_inversion(&c, [0.3, 1e-12, 0.0], 1e-10, 50).unwrap();
        assert!((u - 0.3).abs() < 1e-10);
    }

    #[test]
    fn far_point_is_inversion_error() {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let c = NurbsPatch::new(vec![kv], vec![[0., 0., 0.], [1., 0., 0.]], vec![1., 1.], 2).unwrap();
        match point_inversion(&c, [0.5, 1.0, 0.0], 1e-8, 20) {
            Err(SplineError::Inversion { residual, .. }) => assert!((residual - 1.0).abs() < 1e-8),
            other => panic!("unexpected {other:?}"),
        }
    }
}
