use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::MaterialError;

/// Bilinear mixed-mode cohesive law parameters (N, mm, MPa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohesiveParams {
    /// Dummy (penalty) stiffness, N/mm^3.
    pub stiffness: f64,
    /// Normal strength.
    pub tau_n: f64,
    /// Shear strength.
    pub tau_s: f64,
    pub g_ic: f64,
    pub g_iic: f64,
    /// Benzeggagh-Kenane exponent.
    pub eta: f64,
}

impl CohesiveParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let vals = [self.stiffness, self.tau_n, self.tau_s, self.g_ic, self.g_iic, self.eta];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MaterialError::Parameter(format!("cohesive parameters must be positive: {self:?}")));
        }
        for (tau, g) in [(self.tau_n, self.g_ic), (self.tau_s, self.g_iic)] {
            let d0 = tau / self.stiffness;
            if 2.0 * g / tau <= d0 {
                return Err(MaterialError::Parameter(format!(
                    "failure jump {} does not exceed onset jump {d0}; increase K",
                    2.0 * g / tau
                )));
            }
        }
        Ok(())
    }

    /// Non-fatal parameter concerns.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.g_iic < self.g_ic {
            w.push(format!("G_IIc ({}) is below G_Ic ({})", self.g_iic, self.g_ic));
        }
        for (name, tau) in [("normal", self.tau_n), ("shear", self.tau_s)] {
            if tau / self.stiffness > 1e-3 {
                w.push(format!("{name} onset jump {:e} mm exceeds 1e-3 mm; penalty stiffness is low", tau / self.stiffness));
            }
        }
        w
    }

    pub fn onset_normal(&self) -> f64 {
        self.tau_n / self.stiffness
    }

    pub fn onset_shear(&self) -> f64 {
        self.tau_s / self.stiffness
    }

    /// Mixed-mode toughness for mixity `b = G_shear / G_total`.
    pub fn toughness(&self, b: f64) -> f64 {
        self.g_ic + (self.g_iic - self.g_ic) * b.powf(self.eta)
    }

    fn toughness_slope(&self, b: f64) -> f64 {
        if b <= 0.0 {
            if self.eta > 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.g_iic - self.g_ic) * self.eta * b.powf(self.eta - 1.0)
        }
    }

    /// Onset and failure equivalent jumps with their mixity derivatives.
    pub fn jumps(&self, b: f64) -> (f64, f64, f64, f64) {
        let (dn, ds) = (self.onset_normal(), self.onset_shear());
        let d0 = (dn * dn * (1.0 - b) + ds * ds * b).sqrt();
        let d0_b = (ds * ds - dn * dn) / (2.0 * d0);
        let g = self.toughness(b);
        let df = 2.0 * g / (self.stiffness * d0);
        let gb = self.toughness_slope(b);
        let df_b = if gb.is_finite() { 2.0 * gb / (self.stiffness * d0) - df / d0 * d0_b } else { 0.0 };
        (d0, df, d0_b, df_b)
    }
}

/// History at one integration point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CohesiveState {
    pub d: f64,
    /// Largest equivalent jump reached.
    pub kappa: f64,
    /// Energy dissipated per unit area.
    pub dissipated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohesiveResponse {
    /// Local traction `(t_s1, t_s2, t_n)`.
    pub traction: Vector3<f64>,
    pub tangent: Matrix3<f64>,
    pub state: CohesiveState,
    /// Whether the jump lies on the damage surface (damage may grow).
    pub loading: bool,
}

fn damage(kappa: f64, d0: f64, df: f64) -> f64 {
    if kappa <= d0 {
        0.0
    } else if kappa >= df {
        1.0
    } else {
        df * (kappa - d0) / (kappa * (df - d0))
    }
}

/// Evaluates the cohesive law at local jump `(s1, s2, n)`; in 2D pass
/// `s2 = 0` and ignore the middle row/column.
pub fn cohesive_update(params: &CohesiveParams, state: &CohesiveState, jump: &Vector3<f64>) -> CohesiveResponse {
    let k = params.stiffness;
    let (s1, s2, n) = (jump[0], jump[1], jump[2]);
    let np = n.max(0.0);
    let shear2 = s1 * s1 + s2 * s2;
    let lam2 = np * np + shear2;
    let lam = lam2.sqrt();
    let b = if lam2 > 0.0 { shear2 / lam2 } else { 0.0 };
    let (d0, df, d0_b, df_b) = params.jumps(b);
    let kappa_eff = state.kappa.max(lam);
    let d_trial = damage(kappa_eff, d0, df);
    // on the damage surface (including a converged state) the loading
    // tangent is used, so path following sees the softening direction
    let loading = kappa_eff > d0 && (d_trial > state.d || (d_trial == state.d && lam >= state.kappa));
    let d = if loading { d_trial } else { state.d };

    let mut traction = Vector3::new((1.0 - d) * k * s1, (1.0 - d) * k * s2, 0.0);
    let mut tangent = Matrix3::from_diagonal(&Vector3::new((1.0 - d) * k, (1.0 - d) * k, (1.0 - d) * k));
    if n < 0.0 {
        traction[2] = k * n;
        tangent[(2, 2)] = k;
    } else {
        traction[2] = (1.0 - d) * k * n;
    }

    if loading && d < 1.0 && lam > 0.0 {
        // dd/djump through the equivalent jump (when it drives kappa) and the mixity
        let denom = df - d0;
        let dd_dkappa = df * d0 / (kappa_eff * kappa_eff * denom);
        let dd_dd0 = df * (kappa_eff - df) / (kappa_eff * denom * denom);
        let dd_ddf = -(kappa_eff - d0) * d0 / (kappa_eff * denom * denom);
        let dd_db = dd_dd0 * d0_b + dd_ddf * df_b;
        let lam4 = lam2 * lam2;
        let db = Vector3::new(2.0 * s1 * np * np / lam4, 2.0 * s2 * np * np / lam4, -2.0 * shear2 * np / lam4);
        let mut grad = db * dd_db;
        if lam >= state.kappa {
            grad += Vector3::new(s1, s2, np) * (dd_dkappa / lam);
        }
        let damaged = Vector3::new(s1, s2, if n < 0.0 { 0.0 } else { n });
        tangent -= (damaged * k) * grad.transpose();
    }

    let energy = 0.5 * k * d0 * kappa_eff.min(df) * d;
    let new_state = CohesiveState { d, kappa: kappa_eff, dissipated: state.dissipated.max(energy) };
    CohesiveResponse { traction, tangent, state: new_state, loading }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dcb() -> CohesiveParams {
        CohesiveParams { stiffness: 1e5, tau_n: 27.0, tau_s: 30.0, g_ic: 0.28, g_iic: 0.63, eta: 1.45 }
    }

    /// Trapezoid integral of traction along a radial path to failure.
    fn path_energy(p: &CohesiveParams, dir: Vector3<f64>, steps: usize) -> (f64, f64, CohesiveState) {
        let dir = dir.normalize();
        let (_, df, _, _) = {
            let np = dir[2].max(0.0);
            let sh = dir[0] * dir[0] + dir[1] * dir[1];
            p.jumps(sh / (np * np + sh))
        };
        let end = 1.01 * df;
        let h = end / steps as f64;
        let mut state = CohesiveState::default();
        let mut prev = 0.0;
        let mut work = 0.0;
        let mut peak: f64 = 0.0;
        for i in 1..=steps {
            let j = dir * (h * i as f64);
            let r = cohesive_update(p, &state, &j);
            state = r.state;
            let t = r.traction.dot(&dir);
            peak = peak.max(t);
            work += 0.5 * (t + prev) * h;
            prev = t;
        }
        (work, peak, state)
    }

    #[test]
    fn origin_response() {
        let p = dcb();
        let r = cohesive_update(&p, &CohesiveState::default(), &Vector3::zeros());
        assert_eq!(r.traction, Vector3::zeros());
        assert_eq!(r.tangent, Matrix3::identity() * p.stiffness);
        assert_eq!(r.state.d, 0.0);
    }

    #[test]
    fn pure_mode_one_energy_and_peak() {
        let p = dcb();
        let (w, peak, st) = path_energy(&p, Vector3::new(0.0, 0.0, 1.0), 100_000);
        assert!((w - 0.28).abs() < 1e-6 * 0.28, "{w}");
        // sampled peak is within one step (K h) of the strength, attained at the onset jump
        let (d0, df, _, _) = p.jumps(0.0);
        assert!(peak <= 27.0 + 1e-9 && peak > 27.0 - p.stiffness * 1.01 * df / 1e5);
        let at_onset = cohesive_update(&p, &CohesiveState::default(), &Vector3::new(0.0, 0.0, d0));
        assert!((at_onset.traction[2] - 27.0).abs() < 1e-9);
        assert_eq!(st.d, 1.0);
        assert!((st.dissipated - 0.28).abs() < 1e-12);
    }

    #[test]
    fn pure_mode_two_energy() {
        let p = dcb();
        let (w, peak, _) = path_energy(&p, Vector3::new(1.0, 0.0, 0.0), 100_000);
        assert!((w - p.g_iic).abs() < 1e-6 * p.g_iic, "{w}");
        assert!(peak <= p.tau_s + 1e-9 && peak > 0.99 * p.tau_s);
        let (w3, _, _) = path_energy(&p, Vector3::new(0.6, 0.8, 0.0), 100_000);
        assert!((w3 - p.g_iic).abs() < 1e-6 * p.g_iic);
    }

    #[test]
    fn mixed_mode_energy_follows_bk() {
        let p = dcb();
        for &(s, n) in &[(1.0, 1.0), (0.3, 1.0), (1.0, 0.2)] {
            let dir = Vector3::new(s, 0.0, n);
            let b = s * s / (s * s + n * n);
            let (w, _, _) = path_energy(&p, dir, 100_000);
            let g = p.toughness(b);
            assert!((w - g).abs() < 1e-4 * g, "b={b}: {w} vs {g}");
        }
    }

    #[test]
    fn unload_reload_follows_secant() {
        let p = dcb();
        let (d0, df, _, _) = p.jumps(0.0);
        let mut st = CohesiveState::default();
        let mut x = 0.0;
        while x < 0.5 * (d0 + df) {
            x += 1e-5;
            st = cohesive_update(&p, &st, &Vector3::new(0.0, 0.0, x)).state;
        }
        let d_loaded = st.d;
        assert!(d_loaded > 0.0 && d_loaded < 1.0);
        for &y in &[0.5 * x, 0.1 * x, 0.0, 0.7 * x, x] {
            let r = cohesive_update(&p, &st, &Vector3::new(0.0, 0.0, y));
            assert!((r.traction[2] - (1.0 - d_loaded) * p.stiffness * y).abs() < 1e-9);
            if y < x {
                assert!(!r.loading);
                assert!((r.tangent[(2, 2)] - (1.0 - d_loaded) * p.stiffness).abs() < 1e-9);
            } else {
                // back on the envelope: softening tangent
                assert!(r.loading);
                assert!(r.tangent[(2, 2)] < 0.0);
            }
            assert!(r.state.d >= d_loaded);
            st = r.state;
        }
    }

    #[test]
    fn compression_is_undamaged() {
        let p = dcb();
        let st = CohesiveState { d: 0.9, kappa: 0.01, dissipated: 0.1 };
        let r = cohesive_update(&p, &st, &Vector3::new(0.0, 0.0, -1e-4));
        assert!((r.traction[2] + p.stiffness * 1e-4).abs() < 1e-12);
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let p = dcb();
        let mut seed = 99u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 100 {
            let scale = 2e-2 * rnd();
            let j = Vector3::new(scale * (2.0 * rnd() - 1.0), scale * (2.0 * rnd() - 1.0), scale * (2.0 * rnd() - 0.5));
            let kappa = if rnd() < 0.5 { 0.0 } else { 0.02 * rnd() };
            let st0 = CohesiveState { d: 0.0, kappa, dissipated: 0.0 };
            let st = CohesiveState { d: cohesive_update(&p, &st0, &Vector3::zeros()).state.d, ..st0 };
            let r = cohesive_update(&p, &st, &j);
            // stay clear of kinks: onset, failure, kappa switch, n = 0
            let np = j[2].max(0.0);
            let lam = (np * np + j[0] * j[0] + j[1] * j[1]).sqrt();
            let b = (j[0] * j[0] + j[1] * j[1]) / (lam * lam);
            let (d0, df, _, _) = p.jumps(b);
            let h = 1e-8;
            let near = |a: f64, c: f64| (a - c).abs() < 1e3 * h;
            if near(lam, d0) || near(lam, df) || near(lam, st.kappa) || j[2].abs() < 1e3 * h {
                continue;
            }
            let dd_trial = damage(st.kappa.max(lam), d0, df);
            if (dd_trial - st.d).abs() < 1e-6 && dd_trial > 0.0 {
                continue;
            }
            for c in 0..3 {
                let mut jp = j;
                let mut jm = j;
                jp[c] += h;
                jm[c] -= h;
                let tp = cohesive_update(&p, &st, &jp).traction;
                let tm = cohesive_update(&p, &st, &jm).traction;
                let fd = (tp - tm) / (2.0 * h);
                for row in 0..3 {
                    let an = r.tangent[(row, c)];
                    let scale = r.tangent.amax().max(1.0);
                    assert!((an - fd[row]).abs() < 1e-5 * scale, "row {row} col {c}: {an} vs {} at {j:?}", fd[row]);
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn damage_never_decreases() {
        let p = dcb();
        let mut st = CohesiveState::default();
        let mut seed = 3u64;
        let mut last = 0.0;
        for _ in 0..2000 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = (seed >> 11) as f64 / (1u64 << 53) as f64;
            let j = Vector3::new(0.01 * (r - 0.5), 0.0, 0.012 * (r * 7.0).sin());
            st = cohesive_update(&p, &st, &j).state;
            assert!(st.d >= last);
            last = st.d;
        }
    }

    #[test]
    fn warnings_and_validation() {
        let mut p = dcb();
        assert!(p.validate().is_ok());
        p.stiffness = 1e3;
        assert!(!p.warnings().is_empty());
        p.g_ic = -1.0;
        assert!(p.validate().is_err());
    }
}
