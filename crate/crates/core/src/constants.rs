//! Explicit constants of the stability inequalities, the expected cell-count
//! family `h_m`, the sign-vector region count `N(k)`, and the inequality
//! verifiers that combine the constants with the functionals.
//!
//! Every constant is evaluated exactly as displayed in its source inequality,
//! including the conservative lower-bound variants; where a formula and a
//! simplified bound both exist, both are exposed and the ordering between
//! them is a test.

use serde::{Deserialize, Serialize};

use crate::convex::{cell_area_s2, cell_u1_exact_s2, vertices, HPolytope};
use crate::error::{Result, SphError};
use crate::functionals::{
    self, centred_circumradius, centred_inradius, delta2, theta_r, DeviationOpts, Estimate,
};
use crate::sphere::{cap_u1, cap_volume, omega, radius_from_volume, sine_integral_d, UnitVec};

fn binom(n: u64, k: u64) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Stability constant of the volume/mean-width inequality
/// `U1(K) >= (1 + beta Delta_2(K)^2) U1(C)`:
///
/// `beta = 2 min{ binom(d+1,2) sin^{d+1}(a0) tan^{-2d}(aC) /
///               (d + d binom(d+1,2) (pi/2)^2 tan^{-d}(aC)),
///               (2/pi)^2 D(pi/2 - aC) }`
///
/// for `0 < a0 <= aC < pi/2`.
pub fn beta_stability(alpha0: f64, alpha_c: f64, d: usize) -> Result<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    if !(0.0 < alpha0 && alpha0 <= alpha_c && alpha_c < half) {
        return Err(SphError::Domain(format!(
            "need 0 < alpha0 <= alphaC < pi/2, got ({alpha0}, {alpha_c})"
        )));
    }
    let b = binom(d as u64 + 1, 2);
    let t = alpha_c.tan();
    let first = b * alpha0.sin().powi(d as i32 + 1) * t.powi(-2 * d as i32)
        / (d as f64 + d as f64 * b * half * half * t.powi(-(d as i32)));
    let second = (2.0 / std::f64::consts::PI).powi(2) * sine_integral_d(d, half - alpha_c)?;
    Ok(2.0 * first.min(second))
}

/// Elementary lower bound for [`beta_stability`]:
/// `min{ sin^{d+1}(a0) / (tan^{2d}(aC) + 2 d tan^d(aC)), 0.4^d (pi/2 - aC)^d }`.
pub fn beta_stability_lower_bound(alpha0: f64, alpha_c: f64, d: usize) -> f64 {
    let t = alpha_c.tan();
    let first = alpha0.sin().powi(d as i32 + 1)
        / (t.powi(2 * d as i32) + 2.0 * d as f64 * t.powi(d as i32));
    let second = 0.4f64.powi(d as i32) * (std::f64::consts::FRAC_PI_2 - alpha_c).powi(d as i32);
    first.min(second)
}

/// Explicit factor of the inradius stability inequality
/// `U1(K) >= [1 + c_inradius(a,d) eps^{(d+1)/2}] U1(B(e,a))`:
/// the displayed safe value `(1/8)(3 pi^-4)^{d-1} a^{d-2} (pi/2 - a)^{d-1}`.
pub fn c_inradius(a: f64, d: usize) -> Result<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    if !(a > 0.0 && a < half) {
        return Err(SphError::Domain(format!("a = {a} outside (0, pi/2)")));
    }
    let pi = std::f64::consts::PI;
    Ok(0.125
        * (3.0 / pi.powi(4)).powi(d as i32 - 1)
        * a.powi(d as i32 - 2)
        * (half - a).powi(d as i32 - 1))
}

/// Simplified bound `4 * 0.03^d a^{d-2} (pi/2 - a)^{d-1} <= c_inradius(a,d)`.
pub fn c_inradius_simple(a: f64, d: usize) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    4.0 * 0.03f64.powi(d as i32) * a.powi(d as i32 - 2) * (half - a).powi(d as i32 - 1)
}

/// Explicit factor of the Voronoi (bisector) stability inequality
/// `U~(K) >= [1 + c_voronoi(a,d) eps^{(d+1)/2}] U~(B(e,a))`:
/// `(2 pi)^{-2d} a^{-1} (min{a, pi/2 - a})^{d-1}`.
pub fn c_voronoi(a: f64, d: usize) -> Result<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    if !(a > 0.0 && a < half) {
        return Err(SphError::Domain(format!("a = {a} outside (0, pi/2)")));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(two_pi.powi(-2 * d as i32) / a * a.min(half - a).powi(d as i32 - 1))
}

/// Exponent constant of the volume-threshold deviation bound: the factor
/// `beta_bar` with `beta >= beta_bar eps^{2d}`, where `alpha_0` is the radius
/// of the cap of volume `a`:
///
/// `beta_bar = 2 min{ binom(d+1,2) sin^{d+1}(a0) (w_{d+1} / (2 pi w_d))^{2d} /
///                    (d + d binom(d+1,2) (pi/2)^2 tan^{-d}(a0)),
///                    (2/pi)^{d+1} w_{d+1}^d / (d (2 pi w_d)^d) }`.
pub fn beta_bar(a: f64, d: usize) -> Result<f64> {
    let max_vol = omega(d + 1) / 2.0;
    if !(a > 0.0 && a < max_vol) {
        return Err(SphError::Domain(format!("volume {a} outside (0, {max_vol})")));
    }
    let alpha0 = radius_from_volume(d, a)?;
    let pi = std::f64::consts::PI;
    let b = binom(d as u64 + 1, 2);
    let ratio = omega(d + 1) / (2.0 * pi * omega(d));
    let first = b * alpha0.sin().powi(d as i32 + 1) * ratio.powi(2 * d as i32)
        / (d as f64 + d as f64 * b * (pi / 2.0) * (pi / 2.0) * alpha0.tan().powi(-(d as i32)));
    let second = (2.0 / pi).powi(d as i32 + 1) * omega(d + 1).powi(d as i32)
        / (d as f64 * (2.0 * pi * omega(d)).powi(d as i32));
    Ok(2.0 * first.min(second))
}

/// Expected-cell-count family
/// `h_m(t) = (-1)^{m+1} e^{-t} + 2 sum_{i<=m/2} t^{m-2i} / (m-2i)!`.
pub fn h_m(m: usize, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(SphError::Domain(format!("t = {t} < 0")));
    }
    let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut sum = 0.0f64;
    for i in 0..=m / 2 {
        let k = m - 2 * i;
        let mut term = 1.0;
        for j in 1..=k {
            term *= t / j as f64;
        }
        sum += term;
    }
    Ok(sign * (-t).exp() + 2.0 * sum)
}

/// Region count of `k` generic great subspheres in S^d:
/// `N(0) = 1`, else `N(k) = 2 sum_{i=0}^{d} binom(k-1, i)`.
pub fn schlafli_count(d: usize, k: usize) -> u64 {
    if k == 0 {
        return 1;
    }
    let mut total = 0u64;
    for i in 0..=d {
        total += binom_u64(k as u64 - 1, i as u64);
    }
    2 * total
}

fn binom_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Verdict of an inequality check. `Holds` is conclusive (the required side
/// exceeds the other by more than the 3-sigma slack), `HoldsWithinError`
/// marks agreement inside the error band, `InconclusiveUpperBoundDeviation`
/// is the outcome reserved for comparisons built on an upper approximation
/// of the deviation (never a hard failure), and `Violated` is a conclusive
/// failure at 3 sigma.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    InconclusiveUpperBoundDeviation,
    Violated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinError => "holds-within-error",
            Verdict::InconclusiveUpperBoundDeviation => "inconclusive-upper-bound-deviation",
            Verdict::Violated => "violated",
        }
    }
}

/// Outcome of one stability comparison `lhs >= rhs`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub body_id: String,
    pub kind: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// The inequality constant that entered the right-hand side.
    pub constant: f64,
    /// The deviation value that entered the right-hand side.
    pub deviation: f64,
    pub verdict: Verdict,
}

impl StabilityReport {
    pub fn csv_header() -> Vec<&'static str> {
        vec!["body_id", "kind", "lhs", "lhs_se", "rhs", "rhs_se", "verdict"]
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.body_id.clone(),
            self.kind.clone(),
            crate::report::fmt_f64(self.lhs.value),
            crate::report::fmt_f64(self.lhs.stderr),
            crate::report::fmt_f64(self.rhs.value),
            crate::report::fmt_f64(self.rhs.stderr),
            self.verdict.as_str().to_string(),
        ]
    }
}

fn conclude(lhs: &Estimate, rhs: &Estimate, upper_bound_deviation: bool) -> Verdict {
    let slack = 3.0 * lhs.combined_stderr(rhs);
    if lhs.value >= rhs.value + slack {
        Verdict::Holds
    } else if lhs.value + slack >= rhs.value {
        Verdict::HoldsWithinError
    } else if upper_bound_deviation {
        Verdict::InconclusiveUpperBoundDeviation
    } else {
        Verdict::Violated
    }
}

/// Verify the Urysohn-type inequality `U1(K) >= U1(C)` against the
/// equal-volume cap `C`. On S^2 both sides are exact (perimeter and
/// spherical-excess formulas); elsewhere `n` Monte Carlo samples are used
/// per side and the cap-radius error is propagated by the delta method.
pub fn verify_urysohn(body_id: &str, p: &HPolytope, n: u64, seed: u64) -> Result<StabilityReport> {
    let d = p.dim();
    let (lhs, vol) = if d == 2 {
        (
            Estimate::exact(cell_u1_exact_s2(p)?),
            Estimate::exact(cell_area_s2(p)?),
        )
    } else {
        let scan = vertices(p)?.polytope;
        if scan.is_empty() {
            return Err(SphError::Precondition("body without vertices".into()));
        }
        (
            functionals::u1(&scan, n, seed)?,
            functionals::volume(p, n, seed.wrapping_add(1)),
        )
    };
    let alpha_c = radius_from_volume(d, vol.value.clamp(0.0, omega(d + 1)))?;
    let half = std::f64::consts::FRAC_PI_2;
    let (rhs_value, dv) = if alpha_c < half {
        // d(U1(C))/d(vol) = cot^{d-1}(alpha_C) / omega_{d+1}
        (
            cap_u1(d, alpha_c)?,
            (alpha_c.cos() / alpha_c.sin()).powi(d as i32 - 1) / omega(d + 1),
        )
    } else {
        (0.5, 0.0)
    };
    let rhs = Estimate {
        value: rhs_value,
        stderr: dv.abs() * vol.stderr,
        n: vol.n,
        seed: vol.seed,
    };
    Ok(StabilityReport {
        body_id: body_id.to_string(),
        kind: "urysohn".into(),
        constant: 0.0,
        deviation: 0.0,
        verdict: conclude(&lhs, &rhs, false),
        lhs,
        rhs,
    })
}

/// The three specialised stability inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityKind {
    /// `U1(K) >= (1 + beta Delta2(K)^2) U1(C)`, `C` the equal-volume cap.
    /// The computed deviation is an upper bound of `Delta_2`, so failed
    /// comparisons are inconclusive by contract.
    VolumeDelta2,
    /// `U1(K) >= (1 + c_inradius(a,d) eps^{(d+1)/2}) U1(B(e,a))` under
    /// `Sigma_r(K) >= a`, `theta_r(K) >= eps` (exact radii; conclusive).
    InradiusThetaR,
    /// `U~(K) >= (1 + c_voronoi(a,d) eps^{(d+1)/2}) U~(B(o,a))` under
    /// `o in K subset hemisphere(o)`, `r_o >= a`, `theta_o >= eps`
    /// (exact radii; conclusive up to the Monte Carlo error of `U~`).
    VoronoiThetaO,
}

impl StabilityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityKind::VolumeDelta2 => "volume-delta2",
            StabilityKind::InradiusThetaR => "inradius-theta-r",
            StabilityKind::VoronoiThetaO => "voronoi-theta-o",
        }
    }
}

/// Parameters of a stability verification: the size threshold `a`, the
/// deviation threshold `epsilon` (0 checks the plain isoperimetric
/// inequality), and the Monte Carlo budget for sides without exact routes.
#[derive(Clone, Debug)]
pub struct StabilityParams {
    pub a: f64,
    pub epsilon: f64,
    pub n: u64,
    pub seed: u64,
    pub deviation_opts: DeviationOpts,
}

/// Run one stability check on one body. Preconditions (size threshold met,
/// deviation threshold met, centring, hemisphere containment) are validated
/// with exact radii and reported as errors when violated.
pub fn verify_stability(
    kind: StabilityKind,
    body_id: &str,
    p: &HPolytope,
    params: &StabilityParams,
) -> Result<StabilityReport> {
    let d = p.dim();
    let eps = params.epsilon;
    if !(0.0..=1.0).contains(&eps) {
        return Err(SphError::Domain(format!("epsilon = {eps} outside [0, 1]")));
    }
    match kind {
        StabilityKind::VolumeDelta2 => {
            if d != 2 {
                return Err(SphError::Domain(
                    "VolumeDelta2 verification uses exact volume (d = 2)".into(),
                ));
            }
            let vol = cell_area_s2(p)?;
            if vol <= 0.0 {
                return Err(SphError::Precondition("zero volume".into()));
            }
            if vol < params.a - 1e-9 {
                return Err(SphError::Precondition(format!(
                    "volume {vol} below threshold {}",
                    params.a
                )));
            }
            let alpha_c = radius_from_volume(d, vol)?;
            let alpha0 = radius_from_volume(d, params.a)?;
            let dev = delta2(p, &params.deviation_opts)?;
            let beta = beta_stability(
                alpha0.min(alpha_c),
                alpha_c.min(std::f64::consts::FRAC_PI_2 - 1e-9),
                d,
            )?;
            let lhs = Estimate::exact(cell_u1_exact_s2(p)?);
            let rhs = Estimate::exact((1.0 + beta * dev * dev) * cap_u1(d, alpha_c)?);
            Ok(StabilityReport {
                body_id: body_id.to_string(),
                kind: kind.as_str().into(),
                constant: beta,
                deviation: dev,
                verdict: conclude(&lhs, &rhs, true),
                lhs,
                rhs,
            })
        }
        StabilityKind::InradiusThetaR => {
            let (r, _) = functionals::inradius_free(p)?;
            if r < params.a - 1e-9 {
                return Err(SphError::Precondition(format!(
                    "inradius {r} below threshold {}",
                    params.a
                )));
            }
            let dev = theta_r(p)?;
            if dev < eps - 1e-9 {
                return Err(SphError::Precondition(format!(
                    "theta_r {dev} below epsilon {eps}"
                )));
            }
            let c = c_inradius(params.a, d)?;
            let lhs = if d == 2 {
                Estimate::exact(cell_u1_exact_s2(p)?)
            } else {
                let scan = vertices(p)?.polytope;
                functionals::u1(&scan, params.n, params.seed)?
            };
            let rhs = Estimate::exact(
                (1.0 + c * eps.powf((d as f64 + 1.0) / 2.0)) * cap_u1(d, params.a)?,
            );
            Ok(StabilityReport {
                body_id: body_id.to_string(),
                kind: kind.as_str().into(),
                constant: c,
                deviation: dev,
                verdict: conclude(&lhs, &rhs, false),
                lhs,
                rhs,
            })
        }
        StabilityKind::VoronoiThetaO => {
            let o = UnitVec::origin(d);
            if !p.contains(&o) {
                return Err(SphError::Precondition("origin outside the body".into()));
            }
            let scan = vertices(p)?.polytope;
            if scan.is_empty() {
                return Err(SphError::Precondition("body without vertices".into()));
            }
            if scan.vertices().iter().any(|v| v.dot(&o) < -crate::convex::FEAS_TOL) {
                return Err(SphError::Precondition(
                    "body leaves the closed hemisphere of the origin".into(),
                ));
            }
            let r = centred_inradius(p, &o)?;
            if r < params.a - 1e-9 {
                return Err(SphError::Precondition(format!(
                    "centred inradius {r} below threshold {}",
                    params.a
                )));
            }
            let big_r = centred_circumradius(&scan, &o)?;
            let dev = (big_r - r).max(0.0);
            if dev < eps - 1e-9 {
                return Err(SphError::Precondition(format!(
                    "theta_o {dev} below epsilon {eps}"
                )));
            }
            let c = c_voronoi(params.a, d)?;
            let lhs = functionals::u_tilde(&scan, &o, params.n, params.seed)?;
            let rhs = Estimate::exact(
                (1.0 + c * eps.powf((d as f64 + 1.0) / 2.0)) * cap_volume(d, 2.0 * params.a)?,
            );
            Ok(StabilityReport {
                body_id: body_id.to_string(),
                kind: kind.as_str().into(),
                constant: c,
                deviation: dev,
                verdict: conclude(&lhs, &rhs, false),
                lhs,
                rhs,
            })
        }
    }
}

/// The abstract stability guarantee `Phi(K) >= (1 + f_a(eps)) tau(a)` as a
/// plug-in record: the floor is exposed for report annotation with an
/// externally supplied `f` (the stability function itself is
/// non-constructive; `f_a <= 1` by construction, so `f` is clamped).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityFloor {
    pub a: f64,
    pub epsilon: f64,
    pub f: f64,
    pub floor: f64,
}

pub fn stability_floor(tau_value: f64, a: f64, epsilon: f64, f: f64) -> StabilityFloor {
    let f = f.clamp(0.0, 1.0);
    StabilityFloor { a, epsilon, f, floor: (1.0 + f) * tau_value }
}
