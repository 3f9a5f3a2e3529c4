use super::linear::{BandOrdering, BandedLu};
use super::settings::ConvergenceSettings;
use super::SolverError;
use crate::fem::CsrMatrix;

/// Residual and tangent at a trial point.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub residual: Vec<f64>,
    pub tangent: CsrMatrix,
    /// Force scale the residual norm is measured against.
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Residual norms, one per evaluation.
    pub residuals: Vec<f64>,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Whether a trial merit `trial` sufficiently improves on `current` for a
/// step of relative length `alpha`.
pub(crate) fn sufficient_decrease(trial: f64, current: f64, alpha: f64) -> bool {
    trial <= (1.0 - 1e-4 * alpha) * current
}

/// Whether the last two iterations failed to halve the residual, the mark
/// of iterates bouncing across a kink of the interface laws.
pub(crate) fn stagnating(residuals: &[f64], iterations: usize, settings: &ConvergenceSettings) -> bool {
    let n = residuals.len();
    iterations >= settings.line_search_after && n >= 3 && residuals[n - 1] > 0.5 * residuals[n - 3]
}

/// Newton-Raphson from `x0`. `eval` linearizes at the current iterate; the
/// tangent is refactored every iteration.
///
/// Safeguards against the kinks of the interface laws (loading/unloading
/// switches, contact closing), active after `line_search_after`
/// iterations: an update that does not reduce the residual is halved up to
/// `line_search_cuts` times, and when the iterates bounce between two sides
/// of a kink the mean of the last two tangents (a secant across the kink)
/// is used.
pub fn newton_solve<F>(
    mut eval: F,
    x0: Vec<f64>,
    settings: &ConvergenceSettings,
    ordering: &BandOrdering,
) -> Result<NewtonOutcome, SolverError>
where
    F: FnMut(&[f64]) -> Result<Linearization, SolverError>,
{
    let mut x = x0;
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut lin = eval(&x)?;
    let mut previous: Option<CsrMatrix> = None;
    loop {
        let r = norm(&lin.residual);
        residuals.push(r);
        if !r.is_finite() {
            return Err(SolverError::NonConvergence("non-finite residual".into()));
        }
        if r <= settings.tolerance * lin.scale.max(settings.absolute_floor) {
            return Ok(NewtonOutcome { x, iterations, residuals });
        }
        if iterations >= settings.max_iterations {
            return Err(SolverError::NonConvergence(format!("no convergence in {iterations} iterations (residual {r:e})")));
        }
        if r > settings.divergence_factor * residuals[0] {
            return Err(SolverError::NonConvergence(format!("residual diverged to {r:e}")));
        }
        let mean = match &previous {
            Some(p) if stagnating(&residuals, iterations, settings) => lin.tangent.average(p),
            _ => None,
        };
        let lu = BandedLu::factor(mean.as_ref().unwrap_or(&lin.tangent), ordering)?;
        let neg: Vec<f64> = lin.residual.iter().map(|v| -v).collect();
        let dx = lu.solve(&neg);
        let cuts = if iterations >= settings.line_search_after { settings.line_search_cuts } else { 0 };
        let mut alpha = 1.0;
        let mut trial: Vec<f64>;
        let mut cut = 0;
        loop {
            trial = x.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
            let next = eval(&trial)?;
            let rt = norm(&next.residual);
            if cut >= cuts || (rt.is_finite() && sufficient_decrease(rt, r, alpha)) {
                previous = Some(std::mem::replace(&mut lin, next).tangent);
                break;
            }
            alpha *= 0.5;
            cut += 1;
        }
        x = trial;
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(vals: [[f64; 2]; 2]) -> CsrMatrix {
        CsrMatrix { n: 2, row_ptr: vec![0, 2, 4], col_idx: vec![0, 1, 0, 1], values: vals.concat() }
    }

    #[test]
    fn linear_problem_in_one_iteration() {
        let a = [[4.0, 1.0], [1.0, 3.0]];
        let f = [1.0, 2.0];
        let ord = BandOrdering::identity(&csr(a));
        let out = newton_solve(
            |x| {
                let r = vec![a[0][0] * x[0] + a[0][1] * x[1] - f[0], a[1][0] * x[0] + a[1][1] * x[1] - f[1]];
                Ok(Linearization { residual: r, tangent: csr(a), scale: norm(&f) })
            },
            vec![0.0, 0.0],
            &ConvergenceSettings::default(),
            &ord,
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.x[0] - 1.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn converged_start_takes_no_iteration() {
        let a = [[2.0, 0.0], [0.0, 2.0]];
        let ord = BandOrdering::identity(&csr(a));
        let out = newton_solve(
            |x| Ok(Linearization { residual: vec![2.0 * x[0] - 2.0, 2.0 * x[1]], tangent: csr(a), scale: 1.0 }),
            vec![1.0, 0.0],
            &ConvergenceSettings::default(),
            &ord,
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![1.0, 0.0]);
    }

    #[test]
    fn quadratic_rate_on_smooth_system() {
        // symmetric root x = y with x^3 + x = 9
        let eval = |x: &[f64]| {
            let r = vec![x[0].powi(3) + x[1] - 9.0, x[0] + x[1].powi(3) - 9.0];
            let t = csr([[3.0 * x[0] * x[0], 1.0], [1.0, 3.0 * x[1] * x[1]]]);
            Ok(Linearization { residual: r, tangent: t, scale: 9.0 })
        };
        let ord = BandOrdering::identity(&csr([[1.0, 1.0], [1.0, 1.0]]));
        let s = ConvergenceSettings { tolerance: 1e-14, ..Default::default() };
        let out = newton_solve(eval, vec![2.5, 2.5], &s, &ord).unwrap();
        let r = &out.residuals;
        let k = r.len();
        assert!(k >= 4);
        assert!(r[k - 2] / r[k - 3].powi(2) < 10.0);
    }

    #[test]
    fn divergence_is_reported() {
        let s = ConvergenceSettings { max_iterations: 3, ..Default::default() };
        let ord = BandOrdering::identity(&csr([[1.0, 0.0], [0.0, 1.0]]));
        // atan has a divergent Newton iteration from far away
        let out = newton_solve(
            |x| {
                let t = csr([[1.0 / (1.0 + x[0] * x[0]), 0.0], [0.0, 1.0]]);
                Ok(Linearization { residual: vec![x[0].atan(), 0.0], tangent: t, scale: 1.0 })
            },
            vec![3.0, 0.0],
            &s,
            &ord,
        );
        assert!(matches!(out, Err(SolverError::NonConvergence(_))));
    }
}
