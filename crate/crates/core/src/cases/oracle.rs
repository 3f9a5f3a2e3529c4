//! Beam-theory load-displacement curves for the delamination benchmarks.
//!
//! Both oracles are linear-elastic fracture mechanics on Euler-Bernoulli
//! beams: the cracked arms act as separate beams, the intact part as one
//! beam of twice the arm thickness, and the crack grows when the energy
//! release rate reaches the (mixed-mode) toughness.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Elastic,
    Propagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OraclePoint {
    pub displacement: f64,
    pub load: f64,
    pub crack_length: f64,
    pub regime: Regime,
}

/// Analytic load-displacement samples (N, mm).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCurve {
    pub points: Vec<OraclePoint>,
}

impl OracleCurve {
    pub fn peak_load(&self) -> f64 {
        self.points.iter().map(|p| p.load).fold(0.0, f64::max)
    }

    /// Slope of the elastic branch.
    pub fn elastic_stiffness(&self) -> f64 {
        let e: Vec<&OraclePoint> = self.points.iter().filter(|p| p.regime == Regime::Elastic).collect();
        let last = e.last().expect("elastic branch");
        last.load / last.displacement
    }

    pub fn propagation(&self) -> impl Iterator<Item = &OraclePoint> {
        self.points.iter().filter(|p| p.regime == Regime::Propagation)
    }

    /// Load of the propagation branch at crack length `a` (linear
    /// interpolation between samples).
    pub fn load_at_crack_length(&self, a: f64) -> Option<f64> {
        let prop: Vec<&OraclePoint> = self.propagation().collect();
        prop.windows(2).find(|w| a >= w[0].crack_length && a <= w[1].crack_length).map(|w| {
            let t = (a - w[0].crack_length) / (w[1].crack_length - w[0].crack_length);
            w[0].load + t * (w[1].load - w[0].load)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("displacement_mm,load_N,crack_length_mm,regime\n");
        for p in &self.points {
            let r = match p.regime {
                Regime::Elastic => "elastic",
                Regime::Propagation => "propagation",
            };
            s.push_str(&format!("{:e},{:e},{:e},{r}\n", p.displacement, p.load, p.crack_length));
        }
        s
    }
}

const ELASTIC_SAMPLES: usize = 20;
const PROPAGATION_SAMPLES: usize = 200;

/// Double cantilever beam: two arms of thickness `h` and width `b`, load
/// `P` per arm at the cracked end, opening `delta` between the load points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcbOracleParams {
    pub length: f64,
    pub width: f64,
    pub arm_thickness: f64,
    pub crack_length: f64,
    pub modulus: f64,
    pub g_ic: f64,
    /// Opening at which the curve ends.
    pub max_opening: f64,
}

impl DcbOracleParams {
    fn inertia(&self) -> f64 {
        self.width * self.arm_thickness.powi(3) / 12.0
    }

    /// Opening compliance `delta / P = 2 a^3 / (3 E I)` of two clamped arms.
    pub fn compliance(&self, a: f64) -> f64 {
        2.0 * a.powi(3) / (3.0 * self.modulus * self.inertia())
    }

    /// Critical load `sqrt(G_Ic b E I) / a` from `G = P^2 a^2 / (b E I)`.
    pub fn critical_load(&self, a: f64) -> f64 {
        (self.g_ic * self.width * self.modulus * self.inertia()).sqrt() / a
    }
}

pub fn oracle_dcb(p: &DcbOracleParams) -> OracleCurve {
    let a0 = p.crack_length;
    let pc = p.critical_load(a0);
    let dc = p.compliance(a0) * pc;
    let mut points: Vec<OraclePoint> = (0..=ELASTIC_SAMPLES)
        .map(|k| {
            let t = k as f64 / ELASTIC_SAMPLES as f64;
            OraclePoint { displacement: t * dc, load: t * pc, crack_length: a0, regime: Regime::Elastic }
        })
        .collect();
    // opening along the propagation branch grows like a^2
    let a_open = (p.max_opening / (p.compliance(1.0) * p.critical_load(1.0))).sqrt();
    let a_end = a_open.min(p.length);
    if a_end > a0 {
        for k in 1..=PROPAGATION_SAMPLES {
            let a = a0 + (a_end - a0) * k as f64 / PROPAGATION_SAMPLES as f64;
            let load = p.critical_load(a);
            points.push(OraclePoint { displacement: p.compliance(a) * load, load, crack_length: a, regime: Regime::Propagation });
        }
    }
    OracleCurve { points }
}

/// Mixed-mode bending: simply supported span `L` of two arms, end load
/// `P1` (up) on the cracked arm and mid-span load `P2 = r P1` (down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmbOracleParams {
    pub length: f64,
    pub width: f64,
    pub arm_thickness: f64,
    pub crack_length: f64,
    pub lever: f64,
    pub modulus: f64,
    pub g_ic: f64,
    pub g_iic: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmbOracle {
    /// `P2 / P1`.
    pub load_ratio: f64,
    /// Mode-I and mode-II parts of the energy release rate per unit `P1^2 a^2`.
    pub g_i_coefficient: f64,
    pub g_ii_coefficient: f64,
    pub mode_ratio: f64,
    /// Mixed-mode toughness at the oracle's mode mix.
    pub toughness: f64,
    /// `P1` against the work-conjugate displacement `u1 - r u2` (both
    /// positive upward).
    pub curve: OracleCurve,
}

impl MmbOracleParams {
    fn arm_inertia(&self) -> f64 {
        self.width * self.arm_thickness.powi(3) / 12.0
    }

    pub fn load_ratio(&self) -> f64 {
        super::mmb_load_ratio(self.lever, self.length)
    }

    /// Compliance `v / P1` from the bending energy of the beam model, for a
    /// crack no longer than half the span.
    pub fn compliance(&self, a: f64) -> f64 {
        let r = self.load_ratio();
        let half = 0.5 * self.length;
        let ia = self.arm_inertia();
        let ifull = 8.0 * ia;
        // cracked part: upper arm carries P1, lower arm the end support reaction
        let arms = (1.0 + (1.0 - 0.5 * r).powi(2)) * a.powi(3) / (3.0 * ia);
        let intact_near = 0.25 * r * r * (half.powi(3) - a.powi(3)) / (3.0 * ifull);
        let intact_far = r * r * half.powi(3) / (12.0 * ifull);
        (arms + intact_near + intact_far) / self.modulus
    }

    /// `dC/da`.
    pub fn compliance_rate(&self, a: f64) -> f64 {
        let r = self.load_ratio();
        let ia = self.arm_inertia();
        a * a * ((1.0 + (1.0 - 0.5 * r).powi(2)) / ia - 0.25 * r * r / (8.0 * ia)) / self.modulus
    }
}

/// Mode partition of the MMB by superposing a DCB load `P_I = P1 - P2/4`
/// and an end-notched-flexure load `P_II = P2`:
/// `G_I = 12 P_I^2 a^2 / (b^2 h^3 E)`, `G_II = 9 P_II^2 a^2 / (16 b^2 h^3 E)`.
pub fn oracle_mmb(p: &MmbOracleParams) -> MmbOracle {
    let r = p.load_ratio();
    let denom = p.width * p.width * p.arm_thickness.powi(3) * p.modulus;
    let pi = 1.0 - 0.25 * r;
    let pii = r;
    let gi = 12.0 * pi * pi / denom;
    let gii = 9.0 * pii * pii / (16.0 * denom);
    let beta = gii / (gi + gii);
    let toughness = p.g_ic + (p.g_iic - p.g_ic) * beta.powf(p.eta);
    // G = P1^2 a^2 (gi + gii) = P1^2 C'(a) / (2 b)
    let critical = |a: f64| (2.0 * p.width * toughness / p.compliance_rate(a)).sqrt();
    let a0 = p.crack_length;
    let pc = critical(a0);
    let c0 = p.compliance(a0);
    let mut points: Vec<OraclePoint> = (0..=ELASTIC_SAMPLES)
        .map(|k| {
            let t = k as f64 / ELASTIC_SAMPLES as f64;
            OraclePoint { displacement: t * pc * c0, load: t * pc, crack_length: a0, regime: Regime::Elastic }
        })
        .collect();
    let a_end = 0.5 * p.length;
    for k in 1..=PROPAGATION_SAMPLES {
        let a = a0 + (a_end - a0) * k as f64 / PROPAGATION_SAMPLES as f64;
        let load = critical(a);
        points.push(OraclePoint { displacement: p.compliance(a) * load, load, crack_length: a, regime: Regime::Propagation });
    }
    MmbOracle {
        load_ratio: r,
        g_i_coefficient: gi,
        g_ii_coefficient: gii,
        mode_ratio: gi / gii,
        toughness,
        curve: OracleCurve { points },
    }
}
