use super::linear::{BandOrdering, BandedLu};
use super::newton::{newton_solve, norm, stagnating, sufficient_decrease, Linearization};
use super::settings::ConvergenceSettings;
use super::SolverError;
use crate::fem::{CsrMatrix, GlobalSystem, Model};
use crate::material::CohesiveState;

/// Converged point on the equilibrium path.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: Vec<f64>,
    pub lambda: f64,
    /// Committed cohesive states per interface element and Gauss point.
    pub states: Vec<Vec<CohesiveState>>,
    /// Cumulative dissipated energy (N mm).
    pub dissipated: f64,
}

impl SolverState {
    pub fn initial(model: &Model) -> Self {
        let mut u = vec![0.0; model.ndofs()];
        model.dofs().impose(&mut u, 0.0);
        Self { u, lambda: 0.0, states: model.initial_states(), dissipated: 0.0 }
    }
}

/// How the load factor enters the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    /// `lambda` scales the external force pattern.
    Force,
    /// `lambda` scales the driven displacement pattern.
    Displacement,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SolverState,
    pub iterations: usize,
    /// Residual norms per evaluation.
    pub residuals: Vec<f64>,
    /// Final dissipation-constraint value (zero for load-factor steps).
    pub constraint: f64,
    /// `f_int - lambda f_hat` over all unknowns.
    pub reactions: Vec<f64>,
    /// Generalized load and its work-conjugate displacement.
    pub load: f64,
    pub displacement: f64,
}

/// Equilibrium-path stepping on a fixed model.
#[derive(Debug, Clone)]
pub struct PathFollower<'a> {
    model: &'a Model,
    settings: ConvergenceSettings,
    drive: Drive,
    free: Vec<usize>,
    map: Vec<usize>,
    ordering: BandOrdering,
    pattern: Vec<f64>,
}

impl<'a> PathFollower<'a> {
    pub fn new(model: &'a Model, settings: ConvergenceSettings) -> Result<Self, SolverError> {
        settings.validate()?;
        let dofs = model.dofs();
        let free = dofs.free_dofs();
        let mut map = vec![usize::MAX; dofs.len()];
        for (i, &d) in free.iter().enumerate() {
            map[d] = i;
        }
        let forced = free.iter().any(|&d| model.f_hat[d] != 0.0);
        let drive = if dofs.has_drivers() {
            if forced {
                return Err(SolverError::Config("force pattern and driven displacements cannot be combined".into()));
            }
            Drive::Displacement
        } else {
            Drive::Force
        };
        let pattern = model.continuum_stiffness().restrict(&map, free.len());
        let ordering = BandOrdering::best(&pattern, tensor_orders(model, &free));
        Ok(Self { model, settings, drive, free, map, ordering, pattern: dofs.driver_pattern() })
    }

    pub fn drive(&self) -> Drive {
        self.drive
    }

    pub fn ordering(&self) -> &BandOrdering {
        &self.ordering
    }

    pub fn settings(&self) -> &ConvergenceSettings {
        &self.settings
    }

    fn reactions(&self, sys: &GlobalSystem, lambda: f64) -> Vec<f64> {
        sys.f_int.iter().zip(&self.model.f_hat).map(|(f, p)| f - lambda * p).collect()
    }

    /// Residual on the free unknowns and the force scale.
    fn residual(&self, sys: &GlobalSystem, lambda: f64) -> (Vec<f64>, f64) {
        let r: Vec<f64> = self.free.iter().map(|&d| sys.f_int[d] - lambda * self.model.f_hat[d]).collect();
        let ext: f64 = self.model.f_hat.iter().map(|p| (lambda * p).powi(2)).sum::<f64>().sqrt();
        let react: f64 = (0..sys.f_int.len())
            .filter(|&d| self.map[d] == usize::MAX)
            .map(|d| (sys.f_int[d] - lambda * self.model.f_hat[d]).powi(2))
            .sum::<f64>()
            .sqrt();
        (r, ext.max(react))
    }

    /// Generalized load `P` and displacement `v` with `dW = P dv`.
    pub fn conjugates(&self, u: &[f64], f_int: &[f64], lambda: f64) -> (f64, f64) {
        match self.drive {
            Drive::Force => (lambda, self.model.f_hat.iter().zip(u).map(|(a, b)| a * b).sum()),
            Drive::Displacement => (self.pattern.iter().zip(f_int).map(|(a, b)| a * b).sum(), lambda),
        }
    }

    fn outcome(&self, u: Vec<f64>, lambda: f64, sys: GlobalSystem, iterations: usize, residuals: Vec<f64>, g: f64) -> StepOutcome {
        let (load, displacement) = self.conjugates(&u, &sys.f_int, lambda);
        let reactions = self.reactions(&sys, lambda);
        StepOutcome {
            state: SolverState { u, lambda, dissipated: sys.dissipated, states: sys.states },
            iterations,
            residuals,
            constraint: g,
            reactions,
            load,
            displacement,
        }
    }

    /// Re-evaluates a converged state (reactions and conjugates).
    pub fn evaluate(&self, state: &SolverState) -> StepOutcome {
        let sys = self.model.assemble(&state.u, &state.states);
        let mut out = self.outcome(state.u.clone(), state.lambda, sys, 0, Vec::new(), 0.0);
        out.state.states = state.states.clone();
        out.state.dissipated = state.dissipated;
        out
    }

    /// Advances the load factor by `increment` and restores equilibrium on
    /// the free unknowns.
    pub fn displacement_control_step(&self, state: &SolverState, increment: f64) -> Result<StepOutcome, SolverError> {
        let lambda = state.lambda + increment;
        let mut u = state.u.clone();
        self.model.dofs().impose(&mut u, lambda);
        let x0: Vec<f64> = self.free.iter().map(|&d| u[d]).collect();
        let mut last = None;
        let out = newton_solve(
            |x| {
                for (&d, &v) in self.free.iter().zip(x) {
                    u[d] = v;
                }
                let sys = self.model.assemble(&u, &state.states);
                let (residual, scale) = self.residual(&sys, lambda);
                let tangent = sys.tangent.restrict(&self.map, self.free.len());
                last = Some(sys);
                Ok(Linearization { residual, tangent, scale })
            },
            x0,
            &self.settings,
            &self.ordering,
        )?;
        for (&d, &v) in self.free.iter().zip(&out.x) {
            u[d] = v;
        }
        Ok(self.outcome(u, lambda, last.expect("at least one evaluation"), out.iterations, out.residuals, 0.0))
    }

    /// Bordered Newton on equilibrium plus the forward-Euler dissipation
    /// constraint `1/2 (P0 dv - dP v0) = dtau`.
    pub fn dissipation_control_step(&self, state: &SolverState, dtau: f64) -> Result<StepOutcome, SolverError> {
        if !(dtau > 0.0) {
            return Err(SolverError::Config("dissipation increment must be positive".into()));
        }
        let model = self.model;
        let nf = self.free.len();
        let sys0 = model.assemble(&state.u, &state.states);
        let (p0, v0) = self.conjugates(&state.u, &sys0.f_int, state.lambda);
        let mut u = state.u.clone();
        let mut lambda = state.lambda;
        let mut sys = sys0;
        let mut residuals = Vec::new();
        let mut iterations = 0;
        let mut previous: Option<CsrMatrix> = None;
        loop {
            let (r, scale) = self.residual(&sys, lambda);
            let (p, v) = self.conjugates(&u, &sys.f_int, lambda);
            let g = 0.5 * (p0 * (v - v0) - (p - p0) * v0) - dtau;
            let rn = norm(&r);
            residuals.push(rn);
            if !rn.is_finite() || !g.is_finite() {
                return Err(SolverError::NonConvergence("non-finite residual".into()));
            }
            let tol = self.settings.tolerance;
            if iterations > 0 && rn <= tol * scale.max(self.settings.absolute_floor) && g.abs() <= tol * dtau {
                return Ok(self.outcome(u, lambda, sys, iterations, residuals, g));
            }
            if iterations >= self.settings.max_iterations {
                return Err(SolverError::NonConvergence(format!(
                    "dissipation step: no convergence in {iterations} iterations (residual {rn:e}, constraint {g:e})"
                )));
            }
            // the start is converged, so divergence is judged from the first update
            if iterations >= 2 && rn > self.settings.divergence_factor * residuals[1] {
                return Err(SolverError::NonConvergence(format!("dissipation step: residual diverged to {rn:e}")));
            }
            let mean = match &previous {
                Some(p) if stagnating(&residuals, iterations, &self.settings) => sys.tangent.average(p),
                _ => None,
            };
            let tangent = mean.as_ref().unwrap_or(&sys.tangent);
            let k_ff = tangent.restrict(&self.map, nf);
            let (c, h, h_lambda) = match self.drive {
                Drive::Force => {
                    let c: Vec<f64> = self.free.iter().map(|&d| -model.f_hat[d]).collect();
                    let h: Vec<f64> = self.free.iter().map(|&d| 0.5 * p0 * model.f_hat[d]).collect();
                    (c, h, -0.5 * v0)
                }
                Drive::Displacement => {
                    let kp = tangent.mul_vec(&self.pattern);
                    let ktp = tangent.mul_vec_transpose(&self.pattern);
                    let pkp: f64 = self.pattern.iter().zip(&kp).map(|(a, b)| a * b).sum();
                    let c: Vec<f64> = self.free.iter().map(|&d| kp[d]).collect();
                    let h: Vec<f64> = self.free.iter().map(|&d| -0.5 * v0 * ktp[d]).collect();
                    (c, h, 0.5 * p0 - 0.5 * v0 * pkp)
                }
            };
            let lu = BandedLu::factor(&k_ff, &self.ordering)?;
            let a = lu.solve(&r.iter().map(|x| -x).collect::<Vec<_>>());
            let b = lu.solve(&c);
            let hb: f64 = h.iter().zip(&b).map(|(x, y)| x * y).sum();
            let ha: f64 = h.iter().zip(&a).map(|(x, y)| x * y).sum();
            let denom = h_lambda - hb;
            let size = h_lambda.abs() + norm(&h) * norm(&b);
            if !(denom.abs() > 1e-9 * size) {
                return Err(SolverError::NoDissipation);
            }
            let dl = (-g - ha) / denom;
            // merit: equilibrium and constraint residuals in their own scales
            let merit = |rn: f64, g: f64, scale: f64| {
                (rn / scale.max(self.settings.absolute_floor)).hypot(g / dtau)
            };
            let current = merit(rn, g, scale);
            let cuts = if iterations >= self.settings.line_search_after { self.settings.line_search_cuts } else { 0 };
            let (u_start, lambda_start) = (u.clone(), lambda);
            previous = Some(sys.tangent.clone());
            let mut alpha = 1.0;
            let mut cut = 0;
            loop {
                u.clone_from(&u_start);
                for (i, &d) in self.free.iter().enumerate() {
                    u[d] += alpha * (a[i] - b[i] * dl);
                }
                lambda = lambda_start + alpha * dl;
                model.dofs().impose(&mut u, lambda);
                sys = model.assemble(&u, &state.states);
                if cut >= cuts {
                    break;
                }
                let (rt, st) = self.residual(&sys, lambda);
                let (pt, vt) = self.conjugates(&u, &sys.f_int, lambda);
                let gt = 0.5 * (p0 * (vt - v0) - (pt - p0) * v0) - dtau;
                let trial = merit(norm(&rt), gt, st);
                if trial.is_finite() && sufficient_decrease(trial, current, alpha) {
                    break;
                }
                alpha *= 0.5;
                cut += 1;
            }
            iterations += 1;
        }
    }
}

/// Free unknowns sorted lexicographically by tensor index, once with each
/// parametric direction slowest (the others by decreasing point count).
/// For slender patches these beat level-set orderings.
fn tensor_orders(model: &Model, free: &[usize]) -> Vec<Vec<usize>> {
    let patch = &model.spec.mesh.patch;
    let counts = patch.counts();
    let ncomp = model.dofs().ncomp;
    let index: Vec<Vec<usize>> = (0..patch.num_points()).map(|p| patch.tensor_index(p).to_vec()).collect();
    (0..counts.len())
        .map(|slow| {
            let mut dirs: Vec<usize> = (0..counts.len()).filter(|&d| d != slow).collect();
            dirs.sort_by_key(|&d| (std::cmp::Reverse(counts[d]), d));
            dirs.insert(0, slow);
            let mut local: Vec<usize> = (0..free.len()).collect();
            local.sort_by_key(|&i| {
                let (pt, c) = (free[i] / ncomp, free[i] % ncomp);
                (dirs.iter().map(|&d| index[pt][d]).collect::<Vec<_>>(), c)
            });
            local
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::testing::strip;

    #[test]
    fn elastic_step_converges_in_one_iteration() {
        for driven in [false, true] {
            let m = strip(2, driven, 1e4);
            let pf = PathFollower::new(&m, ConvergenceSettings::default()).unwrap();
            let s0 = SolverState::initial(&m);
            let out = pf.displacement_control_step(&s0, if driven { 1e-4 } else { 1.0 }).unwrap();
            assert_eq!(out.iterations, 1);
            assert_eq!(out.state.dissipated, 0.0);
        }
    }

    #[test]
    fn zero_increment_leaves_state_unchanged() {
        let m = strip(2, true, 1e4);
        let pf = PathFollower::new(&m, ConvergenceSettings::default()).unwrap();
        let s1 = pf.displacement_control_step(&SolverState::initial(&m), 5e-4).unwrap().state;
        let s2 = pf.displacement_control_step(&s1, 0.0).unwrap();
        assert_eq!(s2.iterations, 0);
        assert_eq!(s2.state, s1);
    }

    #[test]
    fn newton_is_quadratic_while_softening() {
        let m = strip(2, true, 1e4);
        let s = ConvergenceSettings { tolerance: 1e-12, ..Default::default() };
        let pf = PathFollower::new(&m, s).unwrap();
        // onset near 2.5e-3 of total opening; second step well into softening
        let s1 = pf.displacement_control_step(&SolverState::initial(&m), 2e-3).unwrap().state;
        let out = pf.displacement_control_step(&s1, 2e-3).unwrap();
        assert!(out.state.dissipated > 0.0);
        let r = &out.residuals;
        let k = r.len();
        assert!(k >= 3, "{r:?}");
        assert!(r[k - 1] / r[k - 2] < 0.1, "{r:?}");
        let q = r[k - 2] / r[k - 3].powi(2);
        assert!(q * r[0] < 1e3, "{r:?}");
    }

    #[test]
    fn elastic_state_admits_no_dissipation_step() {
        for driven in [false, true] {
            let m = strip(2, driven, 1e4);
            let pf = PathFollower::new(&m, ConvergenceSettings::default()).unwrap();
            let s1 = pf.displacement_control_step(&SolverState::initial(&m), if driven { 2e-4 } else { 1.0 }).unwrap().state;
            assert!(matches!(pf.dissipation_control_step(&s1, 1e-3), Err(SolverError::NoDissipation)));
        }
    }

    fn softening_start(m: &Model, pf: &PathFollower) -> SolverState {
        // force control cannot pass the peak: bisect the step onto the
        // damaging part of the rising branch
        let mut s = SolverState::initial(m);
        let mut step = match pf.drive() {
            Drive::Force => 1.0,
            Drive::Displacement => 4e-4,
        };
        while s.dissipated == 0.0 {
            match pf.displacement_control_step(&s, step) {
                Ok(o) => s = o.state,
                Err(_) => {
                    step *= 0.5;
                    assert!(step > 1e-9);
                }
            }
        }
        s
    }

    #[test]
    fn dissipation_steps_satisfy_constraint_and_release_energy() {
        for driven in [false, true] {
            let m = strip(3, driven, 1e4);
            let pf = PathFollower::new(&m, ConvergenceSettings::default()).unwrap();
            let s = softening_start(&m, &pf);
            let mut per_step = Vec::new();
            for dtau in [4e-3, 2e-3] {
                let out = pf.dissipation_control_step(&s, dtau).unwrap();
                assert!(out.constraint.abs() <= 1e-6 * dtau);
                assert!(out.state.dissipated >= s.dissipated);
                per_step.push(out.state.dissipated - s.dissipated);
            }
            // halving the increment roughly halves the dissipated energy
            let ratio = per_step[1] / per_step[0];
            assert!((ratio - 0.5).abs() < 0.1, "driven={driven}: {per_step:?}");
        }
    }

    #[test]
    fn mixed_drivers_are_rejected() {
        let mut m = strip(2, true, 1e4);
        let d = m.dofs().free_dofs()[0];
        m.f_hat[d] = 1.0;
        assert!(matches!(PathFollower::new(&m, ConvergenceSettings::default()), Err(SolverError::Config(_))));
    }
}
