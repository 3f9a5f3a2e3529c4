//! Plain-text patch documents.
//!
//! ```text
//! nurbs-patch 1
//! param_dim 2
//! spatial_dim 2
//! degree 2 1
//! knots 0 <values...>
//! knots 1 <values...>
//! points <count>
//! <x> <y> <z> <w>
//! ...
//! ```
//! Reals are written with 17 significant digits.

use super::knots::KnotVector;
use super::patch::NurbsPatch;
use super::SplineError;
use std::fmt::Write as _;

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_patch(patch: &NurbsPatch) -> String {
    let mut s = String::new();
    writeln!(s, "nurbs-patch 1").unwrap();
    writeln!(s, "param_dim {}", patch.param_dim()).unwrap();
    writeln!(s, "spatial_dim {}", patch.spatial_dim()).unwrap();
    let degs: Vec<String> = patch.degrees().iter().map(|d| d.to_string()).collect();
    writeln!(s, "degree {}", degs.join(" ")).unwrap();
    for (d, kv) in patch.knots().iter().enumerate() {
        let vals: Vec<String> = kv.values().iter().map(|&v| fmt_real(v)).collect();
        writeln!(s, "knots {d} {}", vals.join(" ")).unwrap();
    }
    writeln!(s, "points {}", patch.num_points()).unwrap();
    for (p, w) in patch.points().iter().zip(patch.weights()) {
        writeln!(s, "{} {} {} {}", fmt_real(p[0]), fmt_real(p[1]), fmt_real(p[2]), fmt_real(*w)).unwrap();
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> SplineError {
    SplineError::Parse { line, message: msg.into() }
}

/// Line-oriented cursor shared with the mesh reader.
pub(crate) struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate().peekable() }
    }

    /// Next non-empty line as (1-based line number, tokens).
    pub(crate) fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.inner.by_ref() {
            let t: Vec<&str> = l.split_whitespace().collect();
            if !t.is_empty() && !t[0].starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }

    pub(crate) fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), SplineError> {
        match self.next_tokens() {
            Some((n, t)) if t[0] == key => Ok((n, t)),
            Some((n, t)) => Err(perr(n, format!("expected '{key}', found '{}'", t[0]))),
            None => Err(perr(0, format!("unexpected end of document, expected '{key}'"))),
        }
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T, SplineError> {
    tok.parse::<T>().map_err(|_| perr(line, format!("cannot parse '{tok}'")))
}

pub(crate) fn read_patch_from(lines: &mut Lines<'_>) -> Result<NurbsPatch, SplineError> {
    let (n, t) = lines.expect("nurbs-patch")?;
    if t.get(1) != Some(&"1") {
        return Err(perr(n, "unsupported patch format version"));
    }
    let (n, t) = lines.expect("param_dim")?;
    let pd: usize = parse_num(n, t.get(1).ok_or_else(|| perr(n, "missing value"))?)?;
    let (n, t) = lines.expect("spatial_dim")?;
    let sd: usize = parse_num(n, t.get(1).ok_or_else(|| perr(n, "missing value"))?)?;
    let (n, t) = lines.expect("degree")?;
    if t.len() != pd + 1 {
        return Err(perr(n, "degree count does not match param_dim"));
    }
    let degs = t[1..].iter().map(|s| parse_num::<usize>(n, s)).collect::<Result<Vec<_>, _>>()?;
    let mut knots = Vec::with_capacity(pd);
    for (d, &p) in degs.iter().enumerate() {
        let (n, t) = lines.expect("knots")?;
        if t.get(1).map(|s| parse_num::<usize>(n, s)).transpose()? != Some(d) {
            return Err(perr(n, format!("expected knots for direction {d}")));
        }
        let vals = t[2..].iter().map(|s| parse_num::<f64>(n, s)).collect::<Result<Vec<_>, _>>()?;
        knots.push(KnotVector::new(vals, p).map_err(|e| perr(n, e.to_string()))?);
    }
    let (n, t) = lines.expect("points")?;
    let count: usize = parse_num(n, t.get(1).ok_or_else(|| perr(n, "missing count"))?)?;
    let mut pts = Vec::with_capacity(count);
    let mut ws = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, t) = lines.next_tokens().ok_or_else(|| perr(0, "truncated control points"))?;
        if t.len() != 4 {
            return Err(perr(n, "control point lines need x y z w"));
        }
        let v = t.iter().map(|s| parse_num::<f64>(n, s)).collect::<Result<Vec<_>, _>>()?;
        pts.push([v[0], v[1], v[2]]);
        ws.push(v[3]);
    }
    NurbsPatch::new(knots, pts, ws, sd)
}

pub fn read_patch(text: &str) -> Result<NurbsPatch, SplineError> {
    read_patch_from(&mut Lines::new(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::refine::{elevate_degree, insert_knot};

    #[test]
    fn round_trip_is_bit_exact() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let kv = KnotVector::new(vec![0., 0., 0., 1., 1., 1.], 2).unwrap();
        let kv2 = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        let mut pts = vec![];
        let mut ws = vec![];
        for j in 0..2 {
            let r = 1.0 + j as f64 / 3.0;
            pts.extend([[r, 0., 0.], [r, r, 0.], [0., r, 0.]]);
            ws.extend([1.0, s, 1.0]);
        }
        let p = NurbsPatch::new(vec![kv, kv2], pts, ws, 2).unwrap();
        let p = elevate_degree(&insert_knot(&p, 0, 0.37, 1).unwrap(), 1, 1).unwrap();
        let text = write_patch(&p);
        let q = read_patch(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "nurbs-patch 1\nparam_dim 1\nspatial_dim 2\ndegree 1\nknots 0 0 0 x 1\n";
        match read_patch(text) {
            Err(SplineError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
