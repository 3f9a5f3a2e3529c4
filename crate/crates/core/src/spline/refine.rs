//! Geometry-preserving refinement: knot insertion and degree elevation.
//!
//! Both operate on homogeneous coordinates so rational patches keep their
//! exact shape.

use super::knots::{KnotVector, KNOT_TOL};
use super::patch::{Homogeneous, NurbsPatch};
use super::SplineError;

fn lerp(a: &Homogeneous, b: &Homogeneous, alpha: f64) -> Homogeneous {
    // alpha * a + (1 - alpha) * b
    let mut out = [0.0; 4];
    for c in 0..4 {
        out[c] = alpha * a[c] + (1.0 - alpha) * b[c];
    }
    out
}

/// Single knot insertion (Boehm): `new_i = alpha_i P_i + (1 - alpha_i) P_{i-1}`.
pub fn insert_knot_curve(knots: &[f64], degree: usize, pts: &[Homogeneous], x: f64) -> (Vec<f64>, Vec<Homogeneous>) {
    let p = degree;
    let n = pts.len();
    // span k with knots[k] <= x < knots[k+1]
    let mut k = p;
    while k + 1 < knots.len() && knots[k + 1] <= x {
        k += 1;
    }
    let k = k.min(n - 1);
    let mut new_pts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let pt = if i + p <= k {
            pts[i]
        } else if i > k {
            pts[i - 1]
        } else {
            let alpha = (x - knots[i]) / (knots[i + p] - knots[i]);
            lerp(&pts[i], &pts[i - 1], alpha)
        };
        new_pts.push(pt);
    }
    let mut new_knots = knots.to_vec();
    new_knots.insert(k + 1, x);
    (new_knots, new_pts)
}

/// Inserts `xbar` `times` times in direction `dir`.
pub fn insert_knot(patch: &NurbsPatch, dir: usize, xbar: f64, times: usize) -> Result<NurbsPatch, SplineError> {
    check_dir(patch, dir)?;
    if times == 0 {
        return Ok(patch.clone());
    }
    let kv = patch.knot(dir);
    let p = kv.degree();
    if xbar <= kv.first() + KNOT_TOL || xbar >= kv.last() - KNOT_TOL {
        return Err(SplineError::Refinement(format!(
            "knot {xbar} is not strictly inside ({}, {})",
            kv.first(),
            kv.last()
        )));
    }
    // snap to an existing knot value within tolerance
    let xbar = kv.values().iter().copied().find(|k| (k - xbar).abs() <= KNOT_TOL).unwrap_or(xbar);
    let mult = kv.multiplicity(xbar);
    if mult + times > p + 1 {
        return Err(SplineError::Refinement(format!(
            "inserting {xbar} {times} time(s) would give multiplicity {} > p+1 = {}",
            mult + times,
            p + 1
        )));
    }
    let mut values = kv.values().to_vec();
    for _ in 0..times {
        let mut t = values.clone();
        t.insert(
            values.iter().position(|&k| k > xbar).unwrap_or(values.len()),
            xbar,
        );
        values = t;
    }
    let new_kv = KnotVector::new(values, p)?;
    patch.map_lines(dir, new_kv, |line| {
        let mut k = kv.values().to_vec();
        let mut pts = line.to_vec();
        for _ in 0..times {
            let (nk, np) = insert_knot_curve(&k, p, &pts, xbar);
            k = nk;
            pts = np;
        }
        pts
    })
}

/// Inserts a list of knots (repeats allowed) in one direction.
pub fn insert_knots(patch: &NurbsPatch, dir: usize, knots: &[f64]) -> Result<NurbsPatch, SplineError> {
    let mut sorted = knots.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    let mut out = patch.clone();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && (sorted[j] - x).abs() <= KNOT_TOL {
            j += 1;
        }
        out = insert_knot(&out, dir, x, j - i)?;
        i = j;
    }
    Ok(out)
}

/// Uniform h-refinement: splits every non-zero span of `dir` into `parts`.
pub fn subdivide(patch: &NurbsPatch, dir: usize, parts: usize) -> Result<NurbsPatch, SplineError> {
    check_dir(patch, dir)?;
    if parts <= 1 {
        return Ok(patch.clone());
    }
    let u = patch.knot(dir).unique();
    let mut new = Vec::new();
    for w in u.windows(2) {
        for k in 1..parts {
            new.push(w[0] + (w[1] - w[0]) * k as f64 / parts as f64);
        }
    }
    insert_knots(patch, dir, &new)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Degree elevation of one curve by `t` via Bezier decomposition, Bezier
/// elevation and removal of the superfluous knots (one pass over the spans).
pub fn elevate_curve(knots: &[f64], p: usize, pts: &[Homogeneous], t: usize) -> (Vec<f64>, Vec<Homogeneous>) {
    if t == 0 {
        return (knots.to_vec(), pts.to_vec());
    }
    let n = pts.len() - 1;
    let m = n + p + 1;
    let ph = p + t;
    let ph2 = ph / 2;
    let zero = [0.0; 4];
    let add = |acc: &mut Homogeneous, s: f64, v: &Homogeneous| {
        for c in 0..4 {
            acc[c] += s * v[c];
        }
    };

    let mut bezalfs = vec![vec![0.0; p + 1]; ph + 1];
    bezalfs[0][0] = 1.0;
    bezalfs[ph][p] = 1.0;
    for i in 1..=ph2 {
        let inv = 1.0 / binomial(ph, i);
        let mpi = p.min(i);
        for j in i.saturating_sub(t)..=mpi {
            bezalfs[i][j] = inv * binomial(p, j) * binomial(t, i - j);
        }
    }
    for i in ph2 + 1..ph {
        let mpi = p.min(i);
        for j in i.saturating_sub(t)..=mpi {
            bezalfs[i][j] = bezalfs[ph - i][p - j];
        }
    }

    let segs = knots.windows(2).filter(|w| w[1] - w[0] > KNOT_TOL).count();
    let cap = pts.len() + segs * t + t + 1;
    let mut qw: Vec<Homogeneous> = vec![zero; cap];
    let mut uh: Vec<f64> = vec![0.0; cap + ph + 1];
    let mut bpts = vec![zero; p + 1];
    let mut ebpts = vec![zero; ph + 1];
    let mut next_bpts = vec![zero; p.saturating_sub(1).max(1)];
    let mut alfs = vec![0.0; p.saturating_sub(1).max(1)];

    let mut mh = ph;
    let mut kind = ph + 1;
    let mut r: isize = -1;
    let mut a = p;
    let mut b = p + 1;
    let mut cind = 1usize;
    let mut ua = knots[0];
    qw[0] = pts[0];
    for v in uh.iter_mut().take(ph + 1) {
        *v = ua;
    }
    bpts[..=p].copy_from_slice(&pts[..=p]);

    while b < m {
        let i0 = b;
        while b < m && (knots[b + 1] - knots[b]).abs() <= KNOT_TOL {
            b += 1;
        }
        let mul = b - i0 + 1;
        mh += mul + t;
        let ub = knots[b];
        let oldr = r;
        r = p as isize - mul as isize;
        let lbz = if oldr > 0 { ((oldr + 2) / 2) as usize } else { 1 };
        let rbz = if r > 0 { ph - ((r + 1) / 2) as usize } else { ph };
        if r > 0 {
            let numer = ub - ua;
            let mut k = p;
            while k > mul {
                alfs[k - mul - 1] = numer / (knots[a + k] - ua);
                k -= 1;
            }
            for j in 1..=(r as usize) {
                let save = r as usize - j;
                let s = mul + j;
                let mut k = p;
                while k >= s {
                    bpts[k] = lerp(&bpts[k], &bpts[k - 1], alfs[k - s]);
                    k -= 1;
                }
                next_bpts[save] = bpts[p];
            }
        }
        for i in lbz..=ph {
            let mut acc = zero;
            let mpi = p.min(i);
            for j in i.saturating_sub(t)..=mpi {
                add(&mut acc, bezalfs[i][j], &bpts[j]);
            }
            ebpts[i] = acc;
        }
        if oldr > 1 {
            let mut first = kind as isize - 2;
            let mut last = kind as isize;
            let den = ub - ua;
            let bet = (ub - uh[kind - 1]) / den;
            for tr in 1..oldr {
                let mut i = first;
                let mut j = last;
                let mut kj = j - kind as isize + 1;
                while j - i > tr {
                    if i < cind as isize {
                        let iu = i as usize;
                        let alf = (ub - uh[iu]) / (ua - uh[iu]);
                        qw[iu] = lerp(&qw[iu], &qw[iu - 1], alf);
                    }
                    if j >= lbz as isize {
                        let kju = kj as usize;
                        if j - tr <= kind as isize - ph as isize + oldr {
                            let gam = (ub - uh[(j - tr) as usize]) / den;
                            ebpts[kju] = lerp(&ebpts[kju], &ebpts[kju + 1], gam);
                        } else {
                            ebpts[kju] = lerp(&ebpts[kju], &ebpts[kju + 1], bet);
                        }
                    }
                    i += 1;
                    j -= 1;
                    kj -= 1;
                }
                first -= 1;
                last += 1;
            }
        }
        if a != p {
            for _ in 0..(ph as isize - oldr) {
                uh[kind] = ua;
                kind += 1;
            }
        }
        for j in lbz..=rbz {
            qw[cind] = ebpts[j];
            cind += 1;
        }
        if b < m {
            for j in 0..(r.max(0) as usize) {
                bpts[j] = next_bpts[j];
            }
            for j in (r.max(0) as usize)..=p {
                bpts[j] = pts[b - p + j];
            }
            a = b;
            b += 1;
            ua = ub;
        } else {
            for i in 0..=ph {
                uh[kind + i] = ub;
            }
        }
    }
    let nh = mh - ph - 1;
    qw.truncate(nh + 1);
    uh.truncate(mh + 1);
    (uh, qw)
}

/// Raises the degree of direction `dir` by `t`, keeping geometry and
/// parametrization.
pub fn elevate_degree(patch: &NurbsPatch, dir: usize, t: usize) -> Result<NurbsPatch, SplineError> {
    check_dir(patch, dir)?;
    if t == 0 {
        return Ok(patch.clone());
    }
    let kv = patch.knot(dir);
    let p = kv.degree();
    // knot vector of the elevated curve is independent of the control net
    let probe = vec![[0.0, 0.0, 0.0, 1.0]; kv.num_basis()];
    let (new_knots, _) = elevate_curve(kv.values(), p, &probe, t);
    let new_kv = KnotVector::new(new_knots, p + t)?;
    patch.map_lines(dir, new_kv, |line| elevate_curve(kv.values(), p, line, t).1)
}

/// Elevates several directions at once (`t[d]` per direction).
pub fn elevate_degrees(patch: &NurbsPatch, t: &[usize]) -> Result<NurbsPatch, SplineError> {
    let mut out = patch.clone();
    for (d, &td) in t.iter().enumerate() {
        out = elevate_degree(&out, d, td)?;
    }
    Ok(out)
}

fn check_dir(patch: &NurbsPatch, dir: usize) -> Result<(), SplineError> {
    if dir >= patch.param_dim() {
        return Err(SplineError::InvalidPatch(format!(
            "direction {dir} out of range for a {}-variate patch",
            patch.param_dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(knots: Vec<f64>, p: usize, pts: &[[f64; 2]]) -> NurbsPatch {
        let kv = KnotVector::new(knots, p).unwrap();
        NurbsPatch::new(
            vec![kv],
            pts.iter().map(|q| [q[0], q[1], 0.0]).collect(),
            vec![1.0; pts.len()],
            2,
        )
        .unwrap()
    }

    fn max_dev(a: &NurbsPatch, b: &NurbsPatch, samples: usize) -> f64 {
        let (lo, hi) = (a.knot(0).first(), a.knot(0).last());
        (0..=samples)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / samples as f64;
                let pa = a.eval_point(&[x]).unwrap();
                let pb = b.eval_point(&[x]).unwrap();
                super::super::patch::dist(&pa, &pb)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn discontinuity_net_reproduced_exactly() {
        let c = curve(vec![0., 0., 0., 1., 1., 1.], 2, &[[0., 0.], [0.5, 0.5], [1., 0.]]);
        let r = insert_knot(&c, 0, 0.5, 3).unwrap();
        let expected = [[0.0, 0.0], [0.25, 0.25], [0.5, 0.25], [0.5, 0.25], [0.75, 0.25], [1.0, 0.0]];
        assert_eq!(r.num_points(), 6);
        for (p, e) in r.points().iter().zip(&expected) {
            assert!((p[0] - e[0]).abs() <= 1e-14 && (p[1] - e[1]).abs() <= 1e-14);
        }
        assert_eq!(r.knot(0).values(), &[0., 0., 0., 0.5, 0.5, 0.5, 1., 1., 1.]);
        assert!(max_dev(&c, &r, 200) < 1e-12);
    }

    #[test]
    fn multiplicity_overflow_is_error() {
        let c = curve(vec![0., 0., 0., 1., 1., 1.], 2, &[[0., 0.], [0.5, 0.5], [1., 0.]]);
        assert!(matches!(insert_knot(&c, 0, 0.5, 4), Err(SplineError::Refinement(_))));
        let r = insert_knot(&c, 0, 0.5, 2).unwrap();
        assert!(insert_knot(&r, 0, 0.5, 2).is_err());
        assert!(insert_knot(&c, 0, 1.0, 1).is_err());
    }

    #[test]
    fn two_knots_add_two_points() {
        let c = curve(
            vec![0., 0., 0., 0.5, 1., 1., 1.],
            2,
            &[[0., 0.], [1., 2.], [2., -1.], [3., 1.]],
        );
        let r = insert_knots(&c, 0, &[0.25, 0.75]).unwrap();
        assert_eq!(r.num_points(), c.num_points() + 2);
        assert!(max_dev(&c, &r, 200) < 1e-12);
    }

    #[test]
    fn elevate_line_segment() {
        let c = curve(vec![0., 0., 1., 1.], 1, &[[0., 0.], [2., 4.]]);
        let e = elevate_degree(&c, 0, 1).unwrap();
        assert_eq!(e.knot(0).values(), &[0., 0., 0., 1., 1., 1.]);
        let mid = e.points()[1];
        assert!((mid[0] - 1.0).abs() < 1e-15 && (mid[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn elevate_preserves_multiplicity_structure() {
        let c = curve(
            vec![0., 0., 0., 0.3, 0.6, 0.6, 1., 1., 1.],
            2,
            &[[0., 0.], [1., 2.], [2., -1.], [3., 1.], [4., 0.5], [5., 0.]],
        );
        for t in 1..=3 {
            let e = elevate_degree(&c, 0, t).unwrap();
            assert_eq!(e.knot(0).degree(), 2 + t);
            assert_eq!(e.knot(0).multiplicity(0.3), 1 + t);
            assert_eq!(e.knot(0).multiplicity(0.6), 2 + t);
            assert!(max_dev(&c, &e, 200) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn elevate_rational_arc() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let kv = KnotVector::new(vec![0., 0., 0., 1., 1., 1.], 2).unwrap();
        let arc = NurbsPatch::new(vec![kv], vec![[1., 0., 0.], [1., 1., 0.], [0., 1., 0.]], vec![1., s, 1.], 2).unwrap();
        let e = elevate_degree(&arc, 0, 2).unwrap();
        for k in 0..=100 {
            let x = e.eval_point(&[k as f64 / 100.0]).unwrap();
            assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-12);
        }
        assert!(max_dev(&arc, &e, 200) < 1e-12);
    }
}
