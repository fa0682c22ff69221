//! Monte Carlo experiment harness: conditional deviation probabilities, the
//! exact zero-cell lower bound, intensity-rate curves, the expected
//! cell-count identity, the Crofton/typical-cell identity, and the Voronoi
//! inradius tail. Every experiment is a deterministic function of its
//! configuration and seed; probability estimates carry Wilson intervals and
//! closed-form targets always come from `functionals` / `constants`.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::constants::h_m;
use crate::convex::{cell_area_s2, cell_u1_exact_s2, vertices, HPolytope, VPolytope};
use crate::error::{Result, SphError};
use crate::functionals::{
    self, centred_circumradius, centred_inradius, delta2, theta_r, tau, DeviationOpts, Estimate,
    SizeKind, SizeSpec, TauModel,
};
use crate::mc;
use crate::processes::{
    crofton_cell, sample_poisson, tessellation_cells, voronoi_typical_cell,
};
use crate::report::fmt_f64;
use crate::sphere::{cap_volume, omega, UnitVec};

/// The random cell models the estimators can condition on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellModel {
    /// Crofton cell of the isotropic great-subsphere process.
    HyperplaneCrofton,
    /// Typical cell of the hyperplane tessellation (every enumerated cell
    /// contributes; counts are merged as cluster totals). d = 2 only.
    HyperplaneTypical,
    /// Typical Voronoi cell via the add-a-point construction.
    VoronoiTypical,
}

/// Deviation functionals available for conditioning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DevKind {
    Delta2,
    ThetaR,
    ThetaO,
    Canonical,
}

/// Inner Monte Carlo budgets used when a per-body functional has no exact
/// route.
#[derive(Clone, Debug, Serialize)]
pub struct McParams {
    pub volume_samples: u64,
    pub u1_samples: u64,
    pub delta2_grid: usize,
}

impl Default for McParams {
    fn default() -> Self {
        McParams { volume_samples: 20_000, u1_samples: 20_000, delta2_grid: 512 }
    }
}

/// Outcome of a conditional deviation estimate
/// `P(dev >= eps | Sigma >= a)` by rejection.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalReport {
    pub model: CellModel,
    pub dev: DevKind,
    pub a: f64,
    pub epsilon: f64,
    pub gamma_s: f64,
    pub n: u64,
    pub seed: u64,
    /// Realisations (or cells) meeting the size condition.
    pub conditioning_successes: u64,
    /// Of those, how many met the deviation condition too.
    pub joint_successes: u64,
    /// Bodies where the deviation functional was not evaluable (improper
    /// cells); they count as deviating, and are reported here.
    pub degenerate_bodies: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fewer than 10 conditioning successes: interval widened to [0, 1].
    pub starved: bool,
}

#[allow(clippy::too_many_arguments)]
fn dev_exceeds(
    dev: DevKind,
    cell: &HPolytope,
    size: &SizeSpec,
    a: f64,
    eps: f64,
    model: CellModel,
    mc_params: &McParams,
    rng: &mut ChaCha12Rng,
) -> Result<bool> {
    match dev {
        DevKind::ThetaR => Ok(theta_r(cell)? >= eps),
        DevKind::ThetaO => {
            let o = UnitVec::origin(cell.dim());
            let r = centred_inradius(cell, &o)?;
            if cell.is_whole_sphere() {
                return Ok(0.0 >= eps);
            }
            let scan = vertices(cell)?.polytope;
            let big_r = if scan.is_empty() {
                std::f64::consts::FRAC_PI_2
            } else {
                centred_circumradius(&scan, &o)?
            };
            Ok((big_r - r).max(0.0) >= eps)
        }
        DevKind::Delta2 => {
            let opts = DeviationOpts { grid: mc_params.delta2_grid, ..DeviationOpts::default() };
            Ok(delta2(cell, &opts)? >= eps)
        }
        DevKind::Canonical => {
            let d = cell.dim();
            let (phi, tau_value) = match model {
                CellModel::VoronoiTypical => {
                    let scan = vertices(cell)?.polytope;
                    if scan.is_empty() {
                        return Err(SphError::Degenerate("no vertices for U~".into()));
                    }
                    let o = UnitVec::origin(d);
                    let seed = rng.gen::<u64>();
                    let est = functionals::u_tilde(&scan, &o, mc_params.u1_samples, seed)?;
                    (est.value / omega(d + 1), tau(TauModel::VoronoiInradius, d, a)?)
                }
                _ => {
                    let phi = if d == 2 {
                        2.0 * cell_u1_exact_s2(cell)?
                    } else {
                        let scan = vertices(cell)?.polytope;
                        let seed = rng.gen::<u64>();
                        2.0 * functionals::u1(&scan, mc_params.u1_samples, seed)?.value
                    };
                    let model_tau = match size.kind {
                        SizeKind::Volume => tau(TauModel::VolumeU1, d, a)?,
                        _ => tau(TauModel::InradiusU1, d, a)?,
                    };
                    (phi, model_tau)
                }
            };
            Ok(functionals::canonical_deviation(phi, tau_value)? >= eps)
        }
    }
}

/// One Crofton-cell realisation at intensity `gamma_s`, resampling the
/// configuration on (probability-zero) orthogonality degeneracies.
pub fn sample_crofton_realization(
    gamma_s: f64,
    d: usize,
    rng: &mut ChaCha12Rng,
) -> Result<HPolytope> {
    let o = UnitVec::origin(d);
    for _ in 0..64 {
        let pts = sample_poisson(gamma_s, d, rng)?;
        match crofton_cell(&pts, &o) {
            Ok(cell) => return Ok(cell),
            Err(SphError::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SphError::Degenerate("persistent orthogonality degeneracy".into()))
}

/// Rejection estimator of `P(dev >= eps | Sigma >= a)` for the chosen model.
/// Reports joint and conditioning counts; with fewer than 10 conditioning
/// successes the interval is flagged starved and widened to [0, 1].
#[allow(clippy::too_many_arguments)]
pub fn estimate_conditional_deviation(
    model: CellModel,
    size: &SizeSpec,
    dev: DevKind,
    a: f64,
    eps: f64,
    gamma_s: f64,
    n: u64,
    seed: u64,
    mc_params: &McParams,
) -> Result<ConditionalReport> {
    if n == 0 {
        return Err(SphError::Domain("n must be positive".into()));
    }
    if matches!(model, CellModel::HyperplaneTypical) {
        if matches!(dev, DevKind::ThetaO) {
            return Err(SphError::Domain(
                "theta_o is origin-anchored; not defined for the recentred typical cell".into(),
            ));
        }
        if matches!(size.kind, SizeKind::CentredInradius) {
            return Err(SphError::Domain(
                "centred inradius is origin-anchored; use Volume or Inradius for typical cells"
                    .into(),
            ));
        }
    }
    let d = match size.kind {
        SizeKind::CentredInradius => {
            size.origin
                .as_ref()
                .ok_or_else(|| SphError::Config("CentredInradius needs an origin".into()))?
                .dim()
        }
        _ => 2,
    };

    // per replication: (conditioning count, joint count, degenerate count)
    let outcomes: Vec<Result<(u64, u64, u64)>> = mc::replicate(seed, n, |_, rng| {
        let eval_cell = |cell: &HPolytope, rng: &mut ChaCha12Rng| -> (u64, u64, u64) {
            let size_value = match size.evaluate(cell) {
                Ok(v) => v,
                Err(_) => return (0, 0, 1),
            };
            if size_value < a {
                return (0, 0, 0);
            }
            match dev_exceeds(dev, cell, size, a, eps, model, mc_params, rng) {
                Ok(true) => (1, 1, 0),
                Ok(false) => (1, 0, 0),
                // not evaluable (improper body): certainly not a cap, so it
                // counts as deviating, and is reported
                Err(_) => (1, 1, 1),
            }
        };
        match model {
            CellModel::HyperplaneCrofton => {
                let cell = sample_crofton_realization(gamma_s, d, rng)?;
                Ok(eval_cell(&cell, rng))
            }
            CellModel::VoronoiTypical => {
                let pts = sample_poisson(gamma_s, d, rng)?;
                let cell = voronoi_typical_cell(&pts, d)?;
                Ok(eval_cell(&cell, rng))
            }
            CellModel::HyperplaneTypical => {
                let mut acc = (0u64, 0u64, 0u64);
                for attempt in 0..16 {
                    let pts = sample_poisson(gamma_s, 2, rng)?;
                    match tessellation_cells(&pts, rng.gen::<u64>()) {
                        Ok(tess) => {
                            for cell in &tess.cells {
                                let (c, j, g) = eval_cell(cell, rng);
                                acc.0 += c;
                                acc.1 += j;
                                acc.2 += g;
                            }
                            return Ok(acc);
                        }
                        Err(SphError::Degenerate(_)) if attempt < 15 => continue,
                        Err(e) => return Err(e),
                    }
                }
                Ok(acc)
            }
        }
    });

    let mut cond = 0u64;
    let mut joint = 0u64;
    let mut degenerate = 0u64;
    let mut clusters: Vec<(u64, u64)> = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (c, j, g) = o?;
        cond += c;
        joint += j;
        degenerate += g;
        clusters.push((c, j));
    }

    let starved = cond < 10;
    let p_hat = if cond > 0 { joint as f64 / cond as f64 } else { 0.0 };
    let (ci_low, ci_high) = if starved {
        (0.0, 1.0)
    } else if matches!(model, CellModel::HyperplaneTypical) {
        // cluster ratio estimator: se^2 = sum (j_i - p m_i)^2 / M^2
        let m_total = cond as f64;
        let ss: f64 = clusters
            .iter()
            .map(|&(m, j)| {
                let r = j as f64 - p_hat * m as f64;
                r * r
            })
            .sum();
        let k = clusters.len() as f64;
        let se = (ss * k / (k - 1.0)).sqrt() / m_total;
        (
            (p_hat - 1.96 * se).max(0.0),
            (p_hat + 1.96 * se).min(1.0),
        )
    } else {
        mc::wilson_interval(joint, cond, 1.96)
    };

    Ok(ConditionalReport {
        model,
        dev,
        a,
        epsilon: eps,
        gamma_s,
        n,
        seed,
        conditioning_successes: cond,
        joint_successes: joint,
        degenerate_bodies: degenerate,
        p_hat,
        ci_low,
        ci_high,
        starved,
    })
}

/// The isoperimetric model matching a size functional under the hyperplane
/// hitting functional.
pub fn tau_model_for(size: &SizeSpec) -> TauModel {
    match size.kind {
        SizeKind::Volume => TauModel::VolumeU1,
        SizeKind::Inradius | SizeKind::CentredInradius => TauModel::InradiusU1,
    }
}

/// Exact-bound check `P(Sigma(Z0) >= a) >= exp(-gamma_s omega_{d+1} tau(a))`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub a: f64,
    pub gamma_s: f64,
    pub tau: f64,
    pub rhs_exact: f64,
    pub n: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub pass: bool,
}

pub fn check_zero_cell_lower_bound(
    size: &SizeSpec,
    a: f64,
    gamma_s: f64,
    n: u64,
    seed: u64,
) -> Result<LowerBoundReport> {
    let d = 2usize;
    let tau_value = tau(tau_model_for(size), d, a)?;
    let rhs = (-gamma_s * omega(d + 1) * tau_value).exp();
    let successes_vec: Vec<Result<bool>> = mc::replicate(seed, n, |_, rng| {
        let cell = sample_crofton_realization(gamma_s, d, rng)?;
        Ok(size.evaluate(&cell)? >= a)
    });
    let mut successes = 0u64;
    for s in successes_vec {
        successes += u64::from(s?);
    }
    let est = Estimate::from_indicator(successes, n, 1.0, seed);
    Ok(LowerBoundReport {
        a,
        gamma_s,
        tau: tau_value,
        rhs_exact: rhs,
        n,
        successes,
        p_hat: est.value,
        stderr: est.stderr,
        pass: est.value + 3.0 * est.stderr >= rhs,
    })
}

/// One grid point of an intensity-rate curve.
#[derive(Clone, Debug, Serialize)]
pub struct RatePoint {
    pub gamma_s: f64,
    pub n: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// `ln(p_hat) / gamma_s`; absent when starved.
    pub ln_p_over_gamma: Option<f64>,
    /// Exact lower bound `exp(-gamma omega tau)` and whether
    /// `p_hat + 3 se >= bound` holds.
    pub lower_bound_rhs: f64,
    pub lower_bound_ok: bool,
    /// Fewer than 10 successes: excluded from rate fitting.
    pub starved: bool,
}

/// Rate diagnostic for `gamma^{-1} ln P(Sigma(Z0) >= a) -> -omega tau(a)`.
#[derive(Clone, Debug, Serialize)]
pub struct RateCurve {
    pub a: f64,
    pub tau: f64,
    /// `-omega_{d+1} tau(a)`.
    pub target: f64,
    pub points: Vec<RatePoint>,
}

pub fn estimate_rate(
    size: &SizeSpec,
    a: f64,
    gamma_grid: &[f64],
    n_per_point: u64,
    seed: u64,
) -> Result<RateCurve> {
    if gamma_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SphError::Domain("gamma grid must be strictly increasing".into()));
    }
    let d = 2usize;
    let tau_value = tau(tau_model_for(size), d, a)?;
    let target = -omega(d + 1) * tau_value;
    let mut points = Vec::with_capacity(gamma_grid.len());
    for (idx, &gamma_s) in gamma_grid.iter().enumerate() {
        let point_seed = mc::derive_seed(seed, 0xa7e + idx as u64);
        let lb = check_zero_cell_lower_bound(size, a, gamma_s, n_per_point, point_seed)?;
        let (wl, wh) = mc::wilson_interval(lb.successes, lb.n, 1.96);
        let starved = lb.successes < 10;
        points.push(RatePoint {
            gamma_s,
            n: lb.n,
            successes: lb.successes,
            p_hat: lb.p_hat,
            wilson_low: wl,
            wilson_high: wh,
            ln_p_over_gamma: if starved { None } else { Some(lb.p_hat.ln() / gamma_s) },
            lower_bound_rhs: lb.rhs_exact,
            lower_bound_ok: lb.pass,
            starved,
        });
    }
    Ok(RateCurve { a, tau: tau_value, target, points })
}

/// Expected cell count against `h_d(gamma_s omega_{d+1})` (d = 2).
#[derive(Clone, Debug, Serialize)]
pub struct CellCountReport {
    pub gamma_s: f64,
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
    pub pass: bool,
    /// Enumeration retries due to non-generic configurations.
    pub rejections: u64,
    /// Rejections exceeded 1% of realisations.
    pub rejection_budget_exceeded: bool,
}

pub fn check_cell_count(gamma_s: f64, n: u64, seed: u64) -> Result<CellCountReport> {
    let d = 2usize;
    let target = h_m(d, gamma_s * omega(d + 1))?;
    let outcomes: Vec<Result<(u64, u64)>> = mc::replicate(seed, n, |_, rng| {
        let mut rejections = 0u64;
        for _ in 0..32 {
            let pts = sample_poisson(gamma_s, 2, rng)?;
            match tessellation_cells(&pts, rng.gen::<u64>()) {
                Ok(tess) => return Ok((tess.cells.len() as u64, rejections)),
                Err(SphError::Degenerate(_)) => rejections += 1,
                Err(e) => return Err(e),
            }
        }
        Err(SphError::Degenerate("cell enumeration kept failing".into()))
    });
    let mut counts = Vec::with_capacity(outcomes.len());
    let mut rejections = 0u64;
    for o in outcomes {
        let (c, r) = o?;
        counts.push(c as f64);
        rejections += r;
    }
    let est = Estimate::from_values(&counts, 1.0, seed);
    Ok(CellCountReport {
        gamma_s,
        n,
        mean: est.value,
        stderr: est.stderr,
        target,
        pass: (est.value - target).abs() <= 3.0 * est.stderr,
        rejections,
        rejection_budget_exceeded: rejections as f64 > 0.01 * n as f64,
    })
}

/// Rotation invariant test functionals for the Crofton/typical identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum TypicalFunctional {
    One,
    Volume,
    /// Indicator of `volume >= a`.
    VolumeAtLeast(f64),
}

impl TypicalFunctional {
    fn apply(&self, cell: &HPolytope) -> Result<f64> {
        match self {
            TypicalFunctional::One => Ok(1.0),
            TypicalFunctional::Volume => cell_area_s2(cell),
            TypicalFunctional::VolumeAtLeast(a) => {
                Ok(if cell_area_s2(cell)? >= *a { 1.0 } else { 0.0 })
            }
        }
    }
}

/// Two-estimator check of `E[f(Z0)] = gamma_X' E[f(Z) sigma_d(Z)]`, with the
/// right side realised as `omega^{-1} E[sum_cells f(K) sigma_d(K)]` over
/// enumerated tessellations.
#[derive(Clone, Debug, Serialize)]
pub struct TypicalIdentityReport {
    pub f: String,
    pub gamma_s: f64,
    pub n: u64,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub pass: bool,
    pub rejections: u64,
}

pub fn check_typical_identity(
    f: TypicalFunctional,
    gamma_s: f64,
    n: u64,
    seed: u64,
) -> Result<TypicalIdentityReport> {
    let d = 2usize;
    // left side: Crofton cell realisations
    let lhs_vals: Vec<Result<f64>> = mc::replicate(seed, n, |_, rng| {
        let cell = sample_crofton_realization(gamma_s, d, rng)?;
        f.apply(&cell)
    });
    let mut lv = Vec::with_capacity(lhs_vals.len());
    for v in lhs_vals {
        lv.push(v?);
    }
    let lhs = Estimate::from_values(&lv, 1.0, seed);

    // right side: independent stream of full tessellations
    let rhs_seed = mc::derive_seed(seed, 0x717);
    let rhs_vals: Vec<Result<(f64, u64)>> = mc::replicate(rhs_seed, n, |_, rng| {
        let mut rejections = 0u64;
        for _ in 0..32 {
            let pts = sample_poisson(gamma_s, 2, rng)?;
            match tessellation_cells(&pts, rng.gen::<u64>()) {
                Ok(tess) => {
                    let mut acc = 0.0;
                    for cell in &tess.cells {
                        acc += f.apply(cell)? * cell_area_s2(cell)?;
                    }
                    return Ok((acc / omega(d + 1), rejections));
                }
                Err(SphError::Degenerate(_)) => rejections += 1,
                Err(e) => return Err(e),
            }
        }
        Err(SphError::Degenerate("cell enumeration kept failing".into()))
    });
    let mut rv = Vec::with_capacity(rhs_vals.len());
    let mut rejections = 0u64;
    for v in rhs_vals {
        let (x, r) = v?;
        rv.push(x);
        rejections += r;
    }
    let rhs = Estimate::from_values(&rv, 1.0, rhs_seed);

    let name = match f {
        TypicalFunctional::One => "one".to_string(),
        TypicalFunctional::Volume => "volume".to_string(),
        TypicalFunctional::VolumeAtLeast(a) => format!("indicator(volume >= {})", fmt_f64(a)),
    };
    let pass = (lhs.value - rhs.value).abs() <= 3.0 * lhs.combined_stderr(&rhs);
    Ok(TypicalIdentityReport { f: name, gamma_s, n, lhs, rhs, pass, rejections })
}

/// Exact Voronoi inradius tail
/// `P(r_o(Z) >= a) = exp(-gamma_s sigma_d(B(o, 2a)))`.
#[derive(Clone, Debug, Serialize)]
pub struct VoronoiTailReport {
    pub a: f64,
    pub gamma_s: f64,
    pub d: usize,
    pub n: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub wilson3_low: f64,
    pub wilson3_high: f64,
    pub target: f64,
    pub pass: bool,
}

pub fn check_voronoi_tail(
    a: f64,
    gamma_s: f64,
    d: usize,
    n: u64,
    seed: u64,
) -> Result<VoronoiTailReport> {
    if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
        return Err(SphError::Domain(format!("a = {a} outside (0, pi/2)")));
    }
    let target = (-gamma_s * cap_volume(d, 2.0 * a)?).exp();
    let o = UnitVec::origin(d);
    let outcomes: Vec<Result<bool>> = mc::replicate(seed, n, |_, rng| {
        let pts = sample_poisson(gamma_s, d, rng)?;
        let cell = voronoi_typical_cell(&pts, d)?;
        Ok(centred_inradius(&cell, &o)? >= a)
    });
    let mut successes = 0u64;
    for s in outcomes {
        successes += u64::from(s?);
    }
    let p_hat = successes as f64 / n as f64;
    let (lo, hi) = mc::wilson_interval(successes, n, 3.0);
    Ok(VoronoiTailReport {
        a,
        gamma_s,
        d,
        n,
        successes,
        p_hat,
        wilson3_low: lo,
        wilson3_high: hi,
        target,
        pass: lo <= target && target <= hi,
    })
}

/// Per-realisation equality check between the two typical-Voronoi-cell
/// constructions: identical normal multisets within `tol`.
pub fn slivnyak_mismatch_count(gamma_s: f64, d: usize, n: u64, seed: u64, tol: f64) -> Result<u64> {
    let outcomes: Vec<Result<bool>> = mc::replicate(seed, n, |_, rng| {
        let pts = sample_poisson(gamma_s, d, rng)?;
        let v = voronoi_typical_cell(&pts, d)?;
        let b = crate::processes::bisector_crofton_cell(&pts, d)?;
        if v.normals().len() != b.normals().len() {
            return Ok(true);
        }
        let mut used = vec![false; b.normals().len()];
        for nv in v.normals() {
            let mut matched = false;
            for (i, nb) in b.normals().iter().enumerate() {
                if !used[i] && nv.chord_distance(nb) <= tol {
                    used[i] = true;
                    matched = true;
                    break;
                }
            }
            if !matched {
                return Ok(true);
            }
        }
        Ok(false)
    });
    let mut mismatches = 0u64;
    for o in outcomes {
        mismatches += u64::from(o?);
    }
    Ok(mismatches)
}

/// Hitting fraction of great subspheres against a body, used by invariant
/// tests: the normalised measure of hitting subspheres equals `2 U1`.
pub fn hitting_fraction(k: &VPolytope, n: u64, seed: u64) -> Estimate {
    let d = k.dim();
    let hits = mc::count(seed, n, |_, rng| {
        crate::convex::hits_great_subsphere(k, &crate::sphere::sample_uniform(rng, d))
    });
    Estimate::from_indicator(hits, n, 1.0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_trivial_cases() {
        let size = SizeSpec::centred(UnitVec::origin(2));
        // eps = 0: every conditioning success is a joint success
        let rep = estimate_conditional_deviation(
            CellModel::VoronoiTypical,
            &size,
            DevKind::ThetaO,
            0.2,
            0.0,
            0.8,
            400,
            7,
            &McParams::default(),
        )
        .unwrap();
        assert!(rep.conditioning_successes > 0);
        assert_eq!(rep.joint_successes, rep.conditioning_successes);
        assert!((rep.p_hat - 1.0).abs() < 1e-15);
        // a cell with r_o >= a has every nucleus at distance >= 2a, which
        // caps the circumradius at pi - a and hence theta_o at pi - 2a;
        // beyond that the joint count must vanish
        let eps = std::f64::consts::PI - 2.0 * 0.2 + 0.05;
        let rep = estimate_conditional_deviation(
            CellModel::VoronoiTypical,
            &size,
            DevKind::ThetaO,
            0.2,
            eps,
            0.8,
            400,
            8,
            &McParams::default(),
        )
        .unwrap();
        assert_eq!(rep.joint_successes, 0);
        assert_eq!(rep.p_hat, 0.0);
    }

    #[test]
    fn conditional_counts_are_consistent() {
        let size = SizeSpec::volume();
        let rep = estimate_conditional_deviation(
            CellModel::HyperplaneCrofton,
            &size,
            DevKind::ThetaR,
            0.5,
            0.2,
            0.5,
            500,
            9,
            &McParams::default(),
        )
        .unwrap();
        assert!(rep.joint_successes <= rep.conditioning_successes);
        assert!(rep.conditioning_successes <= 500 + rep.degenerate_bodies);
        assert!(rep.ci_low <= rep.p_hat && rep.p_hat <= rep.ci_high);
    }

    #[test]
    fn conditional_typical_model_pools_cells() {
        let size = SizeSpec::volume();
        let rep = estimate_conditional_deviation(
            CellModel::HyperplaneTypical,
            &size,
            DevKind::ThetaR,
            0.1,
            0.3,
            2.0 / omega(3),
            60,
            10,
            &McParams::default(),
        )
        .unwrap();
        // many cells per tessellation: conditioning count exceeds n
        assert!(rep.conditioning_successes > 60);
        assert!(rep.joint_successes <= rep.conditioning_successes);
        // origin-anchored deviations are rejected for the recentred model
        assert!(estimate_conditional_deviation(
            CellModel::HyperplaneTypical,
            &size,
            DevKind::ThetaO,
            0.1,
            0.3,
            0.5,
            10,
            0,
            &McParams::default(),
        )
        .is_err());
    }

    #[test]
    fn lower_bound_holds_at_small_intensity() {
        let size = SizeSpec::centred(UnitVec::origin(2));
        let rep = check_zero_cell_lower_bound(&size, 0.3, 0.5, 4000, 11).unwrap();
        // exact equality model: p_hat should be close to the bound
        assert!(rep.pass, "p_hat {} vs rhs {}", rep.p_hat, rep.rhs_exact);
        assert!((rep.p_hat - rep.rhs_exact).abs() < 6.0 * rep.stderr.max(1e-3));
        let expect = (-0.5 * omega(3) * 0.3f64.sin()).exp();
        assert!((rep.rhs_exact - expect).abs() < 1e-12);
        assert!((expect - 0.1561).abs() < 5e-4);
    }

    #[test]
    fn rate_curve_shape() {
        let size = SizeSpec::centred(UnitVec::origin(2));
        let curve = estimate_rate(&size, 0.3, &[0.4, 0.8], 3000, 12).unwrap();
        assert_eq!(curve.points.len(), 2);
        for p in &curve.points {
            assert!(p.lower_bound_ok);
            assert!(p.wilson_low <= p.p_hat && p.p_hat <= p.wilson_high);
        }
        // centred inradius: the tail is exactly exp(gamma target'); the
        // normalised log should sit near the target already
        let last = curve.points.last().unwrap();
        let lp = last.ln_p_over_gamma.unwrap();
        assert!(
            (lp - curve.target).abs() < 0.35,
            "ln p / gamma {lp} vs target {}",
            curve.target
        );
        assert!(estimate_rate(&size, 0.3, &[0.8, 0.4], 10, 0).is_err());
    }

    #[test]
    fn cell_count_matches_h2() {
        let rep = check_cell_count(4.0 / omega(3), 1500, 13).unwrap();
        assert!(rep.pass, "mean {} target {} se {}", rep.mean, rep.target, rep.stderr);
        assert!(!rep.rejection_budget_exceeded);
    }

    #[test]
    fn typical_identity_for_constant_f() {
        let rep = check_typical_identity(TypicalFunctional::One, 4.0 / omega(3), 400, 14).unwrap();
        // f = 1: lhs is exactly 1, rhs is exactly 1 (partition volumes)
        assert!((rep.lhs.value - 1.0).abs() < 1e-12);
        assert!((rep.rhs.value - 1.0).abs() < 1e-9);
        assert!(rep.pass);
    }

    #[test]
    fn voronoi_tail_matches_closed_form() {
        let rep = check_voronoi_tail(0.3, 20.0 / omega(3), 2, 4000, 15).unwrap();
        assert!(rep.pass, "p {} target {}", rep.p_hat, rep.target);
        let expect = (-(20.0 / omega(3)) * cap_volume(2, 0.6).unwrap()).exp();
        assert!((rep.target - expect).abs() < 1e-12);
        // monotone in gamma and a
        let rep2 = check_voronoi_tail(0.3, 30.0 / omega(3), 2, 10, 0).unwrap();
        assert!(rep2.target < rep.target);
        let rep3 = check_voronoi_tail(0.4, 20.0 / omega(3), 2, 10, 0).unwrap();
        assert!(rep3.target < rep.target);
        // a -> 0 sends the target to 1
        let rep4 = check_voronoi_tail(1e-6, 20.0 / omega(3), 2, 10, 0).unwrap();
        assert!(rep4.target > 0.999_999);
    }

    #[test]
    fn slivnyak_zero_mismatches() {
        let m = slivnyak_mismatch_count(1.0, 2, 500, 16, 1e-10).unwrap();
        assert_eq!(m, 0);
    }

    #[test]
    fn determinism_across_runs() {
        let size = SizeSpec::volume();
        let a = estimate_conditional_deviation(
            CellModel::HyperplaneCrofton,
            &size,
            DevKind::ThetaR,
            0.4,
            0.2,
            0.6,
            300,
            77,
            &McParams::default(),
        )
        .unwrap();
        let b = estimate_conditional_deviation(
            CellModel::HyperplaneCrofton,
            &size,
            DevKind::ThetaR,
            0.4,
            0.2,
            0.6,
            300,
            77,
            &McParams::default(),
        )
        .unwrap();
        assert_eq!(a.joint_successes, b.joint_successes);
        assert_eq!(a.conditioning_successes, b.conditioning_successes);
        assert_eq!(a.p_hat, b.p_hat);
    }
}
