//! Size, hitting and deviation functionals on spherically convex bodies:
//! volume, the mean-width functional U1, the bisector hitting functional,
//! centred and free inradii, circumradii, the L^2 and range deviations from
//! cap shape, the canonical deviation, and the isoperimetric constant tau.

use serde::{Deserialize, Serialize};

use crate::convex::{
    self, cell_area_s2, hits_great_subsphere, polar_of_v, radial_function, vertices, HPolytope,
    VPolytope,
};
use crate::error::{Result, SphError};
use crate::linalg;
use crate::mc;
pub use crate::mc::Estimate;
use crate::sphere::{self, cap_u1, cap_volume, omega, sample_uniform, UnitVec};

/// Size functionals: each is continuous and increasing under set inclusion;
/// volume and the free inradius are rotation invariant and vanish on bodies
/// that are not full-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeKind {
    Volume,
    Inradius,
    CentredInradius,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeSpec {
    pub kind: SizeKind,
    /// Required for `CentredInradius`.
    pub origin: Option<UnitVec>,
}

impl SizeSpec {
    pub fn volume() -> Self {
        SizeSpec { kind: SizeKind::Volume, origin: None }
    }

    pub fn inradius() -> Self {
        SizeSpec { kind: SizeKind::Inradius, origin: None }
    }

    pub fn centred(origin: UnitVec) -> Self {
        SizeSpec { kind: SizeKind::CentredInradius, origin: Some(origin) }
    }

    /// Evaluate the size of a cell. Volume is exact on S^2 (spherical
    /// excess); conditioning on volume in higher dimension is unsupported
    /// here (use the Monte Carlo `volume` estimator instead).
    pub fn evaluate(&self, p: &HPolytope) -> Result<f64> {
        match self.kind {
            SizeKind::Volume => {
                if p.dim() != 2 {
                    return Err(SphError::Domain(
                        "exact volume evaluation requires d = 2".into(),
                    ));
                }
                cell_area_s2(p)
            }
            SizeKind::Inradius => inradius_free(p).map(|(r, _)| r),
            SizeKind::CentredInradius => {
                let e = self
                    .origin
                    .as_ref()
                    .ok_or_else(|| SphError::Config("CentredInradius needs an origin".into()))?;
                centred_inradius(p, e)
            }
        }
    }
}

/// Monte Carlo spherical volume: `omega_{d+1}` times the hit fraction of
/// uniform samples. Exact for the whole-sphere sentinel; caps have the
/// closed form [`sphere::cap_volume`].
pub fn volume(p: &HPolytope, n: u64, seed: u64) -> Estimate {
    let total = omega(p.dim() + 1);
    if p.is_whole_sphere() {
        return Estimate::exact(total);
    }
    let d = p.dim();
    let hits = mc::count(seed, n, |_, rng| p.contains(&sample_uniform(rng, d)));
    Estimate::from_indicator(hits, n, total, seed)
}

/// Monte Carlo `U_1`: half the fraction of uniform normals whose great
/// subsphere meets the body. Values lie in [0, 1/2].
pub fn u1(k: &VPolytope, n: u64, seed: u64) -> Result<Estimate> {
    if k.is_empty() {
        return Err(SphError::Infeasible("U1 of empty body".into()));
    }
    let d = k.dim();
    let hits = mc::count(seed, n, |_, rng| {
        hits_great_subsphere(k, &sample_uniform(rng, d))
    });
    Ok(Estimate::from_indicator(hits, n, 0.5, seed))
}

/// `U_1` via the polar identity `U_1(K) = 1/2 - sigma_d(K*) / omega_{d+1}`;
/// cross-validates the direct hitting estimator.
pub fn u1_exact_via_polar(k: &VPolytope, n: u64, seed: u64) -> Result<Estimate> {
    let polar = polar_of_v(k)?;
    let vol = volume(&polar, n, seed);
    let w = omega(k.dim() + 1);
    Ok(Estimate {
        value: 0.5 - vol.value / w,
        stderr: vol.stderr / w,
        n: vol.n,
        seed,
    })
}

/// Hitting functional of the bisector process anchored at `e`:
/// `omega_{d+1}` times the fraction of uniform `x` whose bisector subsphere
/// `(x - e)^perp` meets the body. Requires `e in K` and `K` inside the
/// closed hemisphere around `e`.
pub fn u_tilde(k: &VPolytope, e: &UnitVec, n: u64, seed: u64) -> Result<Estimate> {
    if k.is_empty() {
        return Err(SphError::Infeasible("U~ of empty body".into()));
    }
    if k.vertices().iter().any(|v| v.dot(e) < -convex::FEAS_TOL) {
        return Err(SphError::Precondition(
            "body not contained in the closed hemisphere of e".into(),
        ));
    }
    if k.distance_to(e)? > 1e-7 {
        return Err(SphError::Precondition("e not contained in the body".into()));
    }
    let d = k.dim();
    let hits = mc::count(seed, n, |_, rng| loop {
        let x = sample_uniform(rng, d);
        match x.sub_normalized(e) {
            Some(normal) => return hits_great_subsphere(k, &normal),
            None => continue, // x = e has measure zero; resample
        }
    });
    Ok(Estimate::from_indicator(hits, n, omega(d + 1), seed))
}

/// Centred inradius `r_e(P) = max { r : B(e, r) subset P }`, in closed form
/// `min_j arcsin <e, n_j>` (pi/2 for the whole-sphere sentinel).
pub fn centred_inradius(p: &HPolytope, e: &UnitVec) -> Result<f64> {
    if !p.contains(e) {
        return Err(SphError::Precondition("centre outside the body".into()));
    }
    let mut r = std::f64::consts::FRAC_PI_2;
    for n in p.normals() {
        r = r.min(n.dot(e).clamp(0.0, 1.0).asin());
    }
    Ok(r)
}

/// Centred circumradius `R_e(K) = max_v d_s(e, v)` over the extreme points.
pub fn centred_circumradius(k: &VPolytope, e: &UnitVec) -> Result<f64> {
    if k.is_empty() {
        return Err(SphError::Infeasible("circumradius of empty body".into()));
    }
    let mut r: f64 = 0.0;
    for v in k.vertices() {
        r = r.max(sphere::geodesic_distance(e, v)?);
    }
    Ok(r)
}

/// Free inradius `Sigma_r(P) = max { r_e(P) : e in P }` and its maximiser
/// (the spherical Chebyshev centre).
///
/// The maximal slack `s* = max_{|e| <= 1} min_j <e, n_j>` equals, by minimax
/// duality, the norm of the minimum-norm point of the convex hull of the
/// normals; the maximiser is that point normalised and the inradius is
/// `arcsin(s*)`. A vanishing `s*` means the normals positively span the
/// space, i.e. the body has empty interior.
pub fn inradius_free(p: &HPolytope) -> Result<(f64, UnitVec)> {
    if p.is_whole_sphere() {
        return Ok((std::f64::consts::FRAC_PI_2, UnitVec::origin(p.dim())));
    }
    let pts: Vec<Vec<f64>> = p.normals().iter().map(|n| n.coords().to_vec()).collect();
    let (x, _) = linalg::min_norm_point(&pts, 1e-22);
    let s = linalg::norm(&x);
    if s < 1e-10 {
        return Err(SphError::Infeasible("body has empty interior".into()));
    }
    let e = UnitVec::new(x)?;
    Ok((s.min(1.0).asin(), e))
}

/// Deviation `theta_r(P) = R_e(P) - r_e(P)` at the Chebyshev centre. The
/// maximiser of the inradius is unique in the generic case (the dual
/// minimum-norm point is unique), so no tie handling is needed beyond the
/// solver tolerance.
pub fn theta_r(p: &HPolytope) -> Result<f64> {
    let (r, e) = inradius_free(p)?;
    if p.is_whole_sphere() {
        return Ok(0.0);
    }
    let scan = vertices(p)?;
    if scan.polytope.is_empty() {
        // a hemisphere is the cap B(pole, pi/2)
        return Ok(std::f64::consts::FRAC_PI_2 - r);
    }
    let big_r = centred_circumradius(&scan.polytope, &e)?;
    Ok((big_r - r).max(0.0))
}

/// Options for the deviation functionals `delta2` / `delta0`.
#[derive(Clone, Debug)]
pub struct DeviationOpts {
    /// Angular grid size on the unit circle of tangent directions (d = 2);
    /// number of quasi-uniform directions for d = 3.
    pub grid: usize,
    /// Nelder-Mead iterations per candidate centre refinement.
    pub descent_iters: usize,
}

impl Default for DeviationOpts {
    fn default() -> Self {
        DeviationOpts { grid: 512, descent_iters: 80 }
    }
}

/// Orthonormal tangent basis at `e`, Gram-Schmidt over the anchor points
/// first (so the basis co-rotates with the body and grid quadrature is
/// rotation covariant), completed by coordinate axes if needed.
fn tangent_basis(e: &UnitVec, anchors: &[UnitVec]) -> Vec<Vec<f64>> {
    let n = e.dim() + 1;
    let ec = e.coords();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(e.dim());
    let push = |raw: &[f64], basis: &mut Vec<Vec<f64>>| {
        let mut v = raw.to_vec();
        let proj = linalg::dot(&v, ec);
        for (a, b) in v.iter_mut().zip(ec) {
            *a -= proj * b;
        }
        for b in basis.iter() {
            let p = linalg::dot(&v, b);
            for (a, c) in v.iter_mut().zip(b) {
                *a -= p * c;
            }
        }
        let nn = linalg::norm(&v);
        if nn > 1e-8 {
            for a in v.iter_mut() {
                *a /= nn;
            }
            basis.push(v);
        }
    };
    for a in anchors {
        if basis.len() == e.dim() {
            return basis;
        }
        push(a.coords(), &mut basis);
    }
    for i in 0..n {
        if basis.len() == e.dim() {
            break;
        }
        let mut axis = vec![0.0; n];
        axis[i] = 1.0;
        push(&axis, &mut basis);
    }
    basis
}

/// Directions of the quadrature grid on the unit subsphere of the tangent
/// space at `e`: uniform angles on the circle for d = 2, a Fibonacci lattice
/// for d = 3.
fn direction_grid(e: &UnitVec, anchors: &[UnitVec], grid: usize) -> Result<Vec<UnitVec>> {
    let d = e.dim();
    let basis = tangent_basis(e, anchors);
    let combine = |coef: &[f64]| -> UnitVec {
        let mut v = vec![0.0; d + 1];
        for (c, b) in coef.iter().zip(&basis) {
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj += c * bj;
            }
        }
        UnitVec::new(v).expect("unit tangent direction")
    };
    match d {
        2 => Ok((0..grid)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
                combine(&[th.cos(), th.sin()])
            })
            .collect()),
        3 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            Ok((0..grid)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / grid as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let th = 2.0 * std::f64::consts::PI * i as f64 / golden;
                    combine(&[r * th.cos(), r * th.sin(), z])
                })
                .collect())
        }
        _ => Err(SphError::Domain(
            "deviation quadrature implemented for d in {2, 3}".into(),
        )),
    }
}

/// Radial profile `alpha_{P,e}` on the grid, or `None` when `e` is not an
/// admissible centre (not strictly interior, or the body leaves its open
/// hemisphere).
fn radial_profile(p: &HPolytope, scan: &VPolytope, e: &UnitVec, grid: usize) -> Option<Vec<f64>> {
    if p.min_slack(e) <= 1e-12 {
        return None;
    }
    if scan.vertices().iter().any(|v| v.dot(e) <= 1e-9) {
        return None;
    }
    let dirs = direction_grid(e, scan.vertices(), grid).ok()?;
    let mut alphas = Vec::with_capacity(dirs.len());
    for u in &dirs {
        alphas.push(radial_function(p, e, u).ok()?);
    }
    Some(alphas)
}

fn l2_deviation(d: usize, alphas: &[f64]) -> f64 {
    let vals: Vec<f64> = alphas
        .iter()
        .map(|&a| sphere::sine_integral_d(d, a).expect("alpha within domain"))
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64).sqrt()
}

fn range_deviation(alphas: &[f64]) -> f64 {
    let max = alphas.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = alphas.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    max - min
}

/// Candidate centres for the deviation infima: the incentre, the
/// circumcentre, and the minimiser of the radial-projection volume
/// `F_P(e) = int_P <e,u>^{-(d+1)} sigma_d(du)`, each refined by
/// derivative-free descent of the L^2 objective.
///
/// `F_P(e)` equals the volume of the radial projection of `P` to the tangent
/// plane at `e`; per tangent direction the integrand has the exact
/// antiderivative `tan^d(alpha) / d`, so `F_P` is evaluated by the same
/// covariant grid quadrature as the deviations (no sampling involved).
fn deviation_centers(p: &HPolytope, scan: &VPolytope, opts: &DeviationOpts) -> Result<Vec<UnitVec>> {
    if scan.is_empty() || !scan.is_proper() {
        return Err(SphError::Precondition(
            "deviation functionals need a proper body with vertices".into(),
        ));
    }
    let d = p.dim();
    let mut centers: Vec<UnitVec> = Vec::new();
    let (_, incenter) = inradius_free(p)?;
    centers.push(incenter.clone());
    if let Ok(c) = scan.circumcenter() {
        centers.push(c);
    }

    let perturbed = |base: &UnitVec, basis: &[Vec<f64>], z: &[f64]| -> UnitVec {
        let mut v = base.coords().to_vec();
        for (zc, b) in z.iter().zip(basis) {
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj += zc * bj;
            }
        }
        UnitVec::new(v).expect("perturbed centre")
    };

    // F_P minimiser, descended from the incentre
    {
        let basis = tangent_basis(&incenter, scan.vertices());
        let mut obj = |z: &[f64]| -> f64 {
            let e = perturbed(&incenter, &basis, z);
            match radial_profile(p, scan, &e, opts.grid.min(128)) {
                Some(alphas) => {
                    alphas.iter().map(|a| a.tan().powi(d as i32)).sum::<f64>() / d as f64
                }
                None => f64::INFINITY,
            }
        };
        let z = linalg::nelder_mead(&mut obj, &vec![0.0; d], 0.1, opts.descent_iters);
        centers.push(perturbed(&incenter, &basis, &z));
    }

    // refine every candidate by descending the L2 objective
    let mut refined: Vec<UnitVec> = Vec::new();
    for c in &centers {
        let basis = tangent_basis(c, scan.vertices());
        let mut obj = |z: &[f64]| -> f64 {
            let e = perturbed(c, &basis, z);
            match radial_profile(p, scan, &e, opts.grid.min(128)) {
                Some(alphas) => l2_deviation(d, &alphas),
                None => f64::INFINITY,
            }
        };
        let z = linalg::nelder_mead(&mut obj, &vec![0.0; d], 0.05, opts.descent_iters);
        refined.push(perturbed(c, &basis, &z));
    }
    centers.extend(refined);
    Ok(centers)
}

/// Upper approximation of the L^2 cap-shape deviation: the minimum over the
/// optimised candidate centres of `|| D o alpha_{P,e} - mean ||_{L^2}` on the
/// angular grid. An upper bound of the true infimum; always <= pi/2, and
/// <= the value of [`delta0`] at the same centres. Zero exactly on caps.
pub fn delta2(p: &HPolytope, opts: &DeviationOpts) -> Result<f64> {
    let scan = vertices(p)?.polytope;
    let centers = deviation_centers(p, &scan, opts)?;
    let d = p.dim();
    let mut best = f64::INFINITY;
    for e in &centers {
        if let Some(alphas) = radial_profile(p, &scan, e, opts.grid) {
            best = best.min(l2_deviation(d, &alphas));
        }
    }
    if !best.is_finite() {
        return Err(SphError::Infeasible("no admissible centre found".into()));
    }
    Ok(best)
}

/// Upper approximation of the radial range deviation
/// `max alpha - min alpha`, minimised over the same candidate centres as
/// [`delta2`].
pub fn delta0(p: &HPolytope, opts: &DeviationOpts) -> Result<f64> {
    let scan = vertices(p)?.polytope;
    let centers = deviation_centers(p, &scan, opts)?;
    let mut best = f64::INFINITY;
    for e in &centers {
        if let Some(alphas) = radial_profile(p, &scan, e, opts.grid) {
            best = best.min(range_deviation(&alphas));
        }
    }
    if !best.is_finite() {
        return Err(SphError::Infeasible("no admissible centre found".into()));
    }
    Ok(best)
}

/// Canonical deviation `phi / tau - 1`; negative values signal that the
/// size condition behind `tau` was not met.
pub fn canonical_deviation(phi_value: f64, tau_value: f64) -> Result<f64> {
    if tau_value <= 0.0 {
        return Err(SphError::Domain("tau must be positive".into()));
    }
    Ok(phi_value / tau_value - 1.0)
}

/// The three isoperimetric models with extremal caps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauModel {
    /// Phi = 2 U1, Sigma = volume. Threshold is a volume in
    /// (0, omega_{d+1}/2] (spherically convex bodies cannot exceed half the
    /// total measure).
    VolumeU1,
    /// Phi = 2 U1, Sigma = inradius (free or centred). Threshold in (0, pi/2).
    InradiusU1,
    /// Bisector model: Phi~ = U~ / omega_{d+1}, Sigma = centred inradius.
    /// Threshold in (0, pi/2).
    VoronoiInradius,
}

/// Isoperimetric constant `tau = min { Phi(K) : Sigma(K) >= a }`, attained
/// by caps in all three models.
pub fn tau(model: TauModel, d: usize, a: f64) -> Result<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    match model {
        TauModel::VolumeU1 => {
            let max_vol = omega(d + 1) / 2.0;
            if !(a > 0.0 && a <= max_vol + 1e-12) {
                return Err(SphError::Domain(format!(
                    "volume threshold {a} outside (0, {max_vol}]"
                )));
            }
            let alpha_c = sphere::radius_from_volume(d, a.min(max_vol))?;
            Ok(2.0 * cap_u1(d, alpha_c.min(half))?)
        }
        TauModel::InradiusU1 => {
            if !(a > 0.0 && a < half) {
                return Err(SphError::Domain(format!("inradius threshold {a} outside (0, pi/2)")));
            }
            Ok(2.0 * cap_u1(d, a)?)
        }
        TauModel::VoronoiInradius => {
            if !(a > 0.0 && a < half) {
                return Err(SphError::Domain(format!("inradius threshold {a} outside (0, pi/2)")));
            }
            Ok(cap_volume(d, 2.0 * a)? / omega(d + 1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{cap_circumscribed_hpoly, cap_inscribed_vpoly};
    use crate::sphere::geodesic_distance;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn octant() -> HPolytope {
        let normals = (0..3).map(|i| UnitVec::basis(2, i)).collect();
        let w = UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap();
        HPolytope::new(2, normals, Some(w)).unwrap()
    }

    fn octant_v() -> VPolytope {
        vertices(&octant()).unwrap().polytope
    }

    fn random_crofton(rng: &mut ChaCha12Rng, k: usize) -> HPolytope {
        let o = UnitVec::origin(2);
        loop {
            let normals: Vec<UnitVec> = (0..k)
                .map(|_| {
                    let x = sample_uniform(rng, 2);
                    if x.dot(&o) >= 0.0 {
                        x
                    } else {
                        x.neg()
                    }
                })
                .collect();
            if normals.iter().all(|n| n.dot(&o).abs() > 1e-6) {
                return HPolytope::new(2, normals, Some(o)).unwrap();
            }
        }
    }

    #[test]
    fn volume_estimates() {
        let hemi = HPolytope::new(2, vec![UnitVec::origin(2)], None).unwrap();
        let est = volume(&hemi, 100_000, 1);
        assert!((est.value - 2.0 * PI).abs() < 3.0 * est.stderr);
        let oct = volume(&octant(), 100_000, 2);
        assert!((oct.value - PI / 2.0).abs() < 3.0 * oct.stderr);
        let whole = volume(&HPolytope::whole_sphere(2), 10, 3);
        assert_eq!(whole.value, 4.0 * PI);
        assert_eq!(whole.n, 0);
        assert_eq!(whole.stderr, 0.0);
    }

    #[test]
    fn u1_estimates() {
        // single point: the estimator is almost surely zero
        let point = VPolytope::new(2, vec![UnitVec::origin(2)]).unwrap();
        let est = u1(&point, 20_000, 4).unwrap();
        assert_eq!(est.value, 0.0);
        // cap of radius a: closed form sin(a)/2 on S^2
        let a = 0.9;
        let cap = cap_inscribed_vpoly(&UnitVec::origin(2), a, 96).unwrap();
        let est = u1(&cap, 200_000, 5).unwrap();
        assert!(
            (est.value - a.sin() / 2.0).abs() < 3.0 * est.stderr + 1e-3,
            "{} vs {}",
            est.value,
            a.sin() / 2.0
        );
    }

    #[test]
    fn u1_polar_cross_check() {
        let k = octant_v();
        let direct = u1(&k, 150_000, 6).unwrap();
        let polar = u1_exact_via_polar(&k, 150_000, 7).unwrap();
        // exact value for the octant: 3/8
        assert!((direct.value - 0.375).abs() < 3.0 * direct.stderr);
        assert!((polar.value - 0.375).abs() < 3.0 * polar.stderr);
        assert!((direct.value - polar.value).abs() < 3.0 * direct.combined_stderr(&polar));
        // random proper bodies
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for i in 0..5 {
            let p = random_crofton(&mut rng, 7);
            let k = vertices(&p).unwrap().polytope;
            if !k.is_proper() {
                continue;
            }
            let a = u1(&k, 60_000, 100 + i).unwrap();
            let b = u1_exact_via_polar(&k, 60_000, 200 + i).unwrap();
            assert!(
                (a.value - b.value).abs() < 3.5 * a.combined_stderr(&b),
                "{} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn u_tilde_cap_identity_and_bound() {
        let o = UnitVec::origin(2);
        for &a in &[0.3f64, 0.6] {
            let cap = cap_inscribed_vpoly(&o, a, 128).unwrap();
            let est = u_tilde(&cap, &o, 150_000, 9).unwrap();
            let target = cap_volume(2, 2.0 * a).unwrap();
            assert!(
                (est.value - target).abs() < 3.0 * est.stderr + 0.02,
                "a={a}: {} vs {target}",
                est.value
            );
        }
        // U~ <= 2^{d+1} omega_{d+1} U1
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for i in 0..5 {
            let p = random_crofton(&mut rng, 6);
            let k = vertices(&p).unwrap().polytope;
            if k.is_empty() || k.vertices().iter().any(|v| v.dot(&o) < 1e-6) {
                continue;
            }
            let ut = u_tilde(&k, &o, 40_000, 300 + i).unwrap();
            let u = u1(&k, 40_000, 400 + i).unwrap();
            let bound = 8.0 * omega(3) * u.value;
            assert!(
                ut.value <= bound + 3.0 * (ut.stderr + 8.0 * omega(3) * u.stderr),
                "{} vs {}",
                ut.value,
                bound
            );
        }
    }

    #[test]
    fn u_tilde_rejects_bad_centre() {
        let cap = cap_inscribed_vpoly(&UnitVec::origin(2), 0.4, 32).unwrap();
        let far = UnitVec::basis(2, 2);
        assert!(u_tilde(&cap, &far, 100, 0).is_err());
    }

    #[test]
    fn centred_radii() {
        let o = UnitVec::origin(2);
        let hemi = HPolytope::new(2, vec![o.clone()], None).unwrap();
        assert!((centred_inradius(&hemi, &o).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let e = UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap();
        let r = centred_inradius(&octant(), &e).unwrap();
        assert!((r - (1.0 / 3.0f64.sqrt()).asin()).abs() < 1e-12);
        assert!((r - 0.61548).abs() < 1e-5);
        // point on a facet has zero clearance
        let facet_pt = UnitVec::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(centred_inradius(&octant(), &facet_pt).unwrap() < 1e-12);
        // circumradius of the octant from its symmetric centre
        let big_r = centred_circumradius(&octant_v(), &e).unwrap();
        assert!((big_r - (1.0 / 3.0f64.sqrt()).acos()).abs() < 1e-12);
        assert!((big_r - 0.95532).abs() < 1e-5);
        let single = VPolytope::new(2, vec![e.clone()]).unwrap();
        assert_eq!(centred_circumradius(&single, &e).unwrap(), 0.0);
        // ball B(e, r - eps) really is inside the octant
        let p = octant();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let x = sample_uniform(&mut rng, 2);
            if geodesic_distance(&x, &e).unwrap() <= r - 1e-9 {
                assert!(p.contains(&x));
            }
        }
    }

    #[test]
    fn inradius_free_cases() {
        // cap: its own inball
        let a = 0.8;
        let cap = cap_circumscribed_hpoly(&UnitVec::origin(2), a, 64).unwrap();
        let (r, e) = inradius_free(&cap).unwrap();
        assert!((r - a).abs() < 1e-6, "r={r}");
        assert!(geodesic_distance(&e, &UnitVec::origin(2)).unwrap() < 1e-5);
        // octant: symmetric centre
        let (r, e) = inradius_free(&octant()).unwrap();
        assert!((r - (1.0 / 3.0f64.sqrt()).asin()).abs() < 1e-9);
        let sym = UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(geodesic_distance(&e, &sym).unwrap() < 1e-6);
        // hemisphere
        let hemi = HPolytope::new(2, vec![UnitVec::origin(2)], None).unwrap();
        let (r, e) = inradius_free(&hemi).unwrap();
        assert!((r - FRAC_PI_2).abs() < 1e-9);
        assert!(geodesic_distance(&e, &UnitVec::origin(2)).unwrap() < 1e-9);
        // grid-search oracle on the octant
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let p = octant();
        let mut best = 0.0f64;
        for _ in 0..20_000 {
            let x = sample_uniform(&mut rng, 2);
            if p.contains(&x) {
                best = best.max(centred_inradius(&p, &x).unwrap());
            }
        }
        let (r, _) = inradius_free(&p).unwrap();
        assert!(best <= r + 1e-9);
        assert!(r - best < 0.02);
    }

    #[test]
    fn inradius_maximiser_satisfies_hemisphere_lemma() {
        // at the Chebyshev centre, the body lies in the closed hemisphere
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..30 {
            let p = random_crofton(&mut rng, 8);
            let (_, e) = inradius_free(&p).unwrap();
            let scan = vertices(&p).unwrap().polytope;
            for v in scan.vertices() {
                assert!(v.dot(&e) >= -1e-9, "vertex outside hemisphere of the centre");
            }
        }
    }

    #[test]
    fn theta_r_cases() {
        let cap = cap_circumscribed_hpoly(&UnitVec::origin(2), 0.7, 256).unwrap();
        assert!(theta_r(&cap).unwrap() < 2e-4);
        let t = theta_r(&octant()).unwrap();
        let expect = (1.0 / 3.0f64.sqrt()).acos() - (1.0 / 3.0f64.sqrt()).asin();
        assert!((t - expect).abs() < 1e-6);
        assert!((expect - 0.33984).abs() < 1e-5);
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        for _ in 0..20 {
            let p = random_crofton(&mut rng, 7);
            let t = theta_r(&p).unwrap();
            assert!(t.is_finite() && t >= 0.0);
        }
    }

    #[test]
    fn delta2_and_delta0() {
        let opts = DeviationOpts::default();
        // cap: both deviations vanish up to quadrature/discretisation error
        let cap = cap_circumscribed_hpoly(&UnitVec::origin(2), 0.6, 128).unwrap();
        let d2 = delta2(&cap, &opts).unwrap();
        assert!(d2 < 1e-3, "delta2 on cap: {d2}");
        let d0 = delta0(&cap, &opts).unwrap();
        assert!(d0 < 5e-3, "delta0 on cap: {d0}");
        // octant: positive, stable under grid refinement, delta2 <= delta0
        let d2 = delta2(&octant(), &opts).unwrap();
        let d0 = delta0(&octant(), &opts).unwrap();
        assert!(d2 > 0.01 && d0 > 0.05);
        assert!(d2 <= d0 + 1e-12);
        assert!(d2 <= FRAC_PI_2 && d0 <= FRAC_PI_2);
        let fine = DeviationOpts { grid: 2048, ..DeviationOpts::default() };
        let d0f = delta0(&octant(), &fine).unwrap();
        assert!((d0f - d0).abs() / d0 < 0.01, "grid refinement moved delta0: {d0} -> {d0f}");
    }

    #[test]
    fn delta_rotation_invariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let opts = DeviationOpts::default();
        let p = octant();
        let rot = crate::sphere::rotation_to(&sample_uniform(&mut rng, 2), &mut rng);
        let rotated = HPolytope::new(
            2,
            p.normals().iter().map(|n| rot.apply(n)).collect(),
            None,
        )
        .unwrap();
        let a = delta0(&p, &opts).unwrap();
        let b = delta0(&rotated, &opts).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        let a2 = delta2(&p, &opts).unwrap();
        let b2 = delta2(&rotated, &opts).unwrap();
        assert!((a2 - b2).abs() < 1e-4, "{a2} vs {b2}");
    }

    #[test]
    fn canonical_deviation_cases() {
        assert!(canonical_deviation(1.0, 0.0).is_err());
        assert!((canonical_deviation(2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(canonical_deviation(0.5, 1.0).unwrap() < 0.0);
    }

    #[test]
    fn tau_values() {
        // hemisphere volume threshold gives tau = 1
        let t = tau(TauModel::VolumeU1, 2, 2.0 * PI).unwrap();
        assert!((t - 1.0).abs() < 1e-9);
        let t = tau(TauModel::InradiusU1, 2, 0.3).unwrap();
        assert!((t - 0.3f64.sin()).abs() < 1e-12);
        assert!((t - 0.29552).abs() < 1e-5);
        let t = tau(TauModel::VoronoiInradius, 2, 0.3).unwrap();
        let expect = 2.0 * PI * (1.0 - 0.6f64.cos()) / (4.0 * PI);
        assert!((t - expect).abs() < 1e-12);
        assert!((t - 0.087332).abs() < 1e-5);
        // positivity across the domains
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let d = rng.gen_range(2..5);
            let a = rng.gen_range(1e-3..FRAC_PI_2 - 1e-3);
            assert!(tau(TauModel::InradiusU1, d, a).unwrap() > 0.0);
            assert!(tau(TauModel::VoronoiInradius, d, a).unwrap() > 0.0);
            let vol = rng.gen_range(1e-3..omega(d + 1) / 2.0);
            assert!(tau(TauModel::VolumeU1, d, vol).unwrap() > 0.0);
        }
        assert!(tau(TauModel::VolumeU1, 2, 13.0).is_err());
        assert!(tau(TauModel::InradiusU1, 2, 2.0).is_err());
    }

    #[test]
    fn urysohn_on_random_bodies() {
        // U1(K) >= U1(equal-volume cap), exact route on S^2
        let mut rng = ChaCha12Rng::seed_from_u64(18);
        for _ in 0..40 {
            let p = random_crofton(&mut rng, 8);
            let area = cell_area_s2(&p).unwrap();
            let u1k = crate::convex::cell_u1_exact_s2(&p).unwrap();
            let alpha = sphere::radius_from_volume(2, area).unwrap();
            if alpha >= FRAC_PI_2 {
                continue;
            }
            let u1c = cap_u1(2, alpha).unwrap();
            assert!(u1k >= u1c - 1e-10, "Urysohn violated: {u1k} < {u1c}");
        }
    }

    #[test]
    fn monotone_under_inclusion() {
        // adding constraints shrinks every size functional
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..20 {
            let big = random_crofton(&mut rng, 5);
            let mut normals = big.normals().to_vec();
            let o = UnitVec::origin(2);
            let extra = {
                let x = sample_uniform(&mut rng, 2);
                if x.dot(&o) >= 0.0 {
                    x
                } else {
                    x.neg()
                }
            };
            normals.push(extra);
            let small = HPolytope::new(2, normals, Some(o.clone())).unwrap();
            assert!(cell_area_s2(&small).unwrap() <= cell_area_s2(&big).unwrap() + 1e-12);
            assert!(
                centred_inradius(&small, &o).unwrap() <= centred_inradius(&big, &o).unwrap() + 1e-12
            );
            let (rs, _) = inradius_free(&small).unwrap();
            let (rb, _) = inradius_free(&big).unwrap();
            assert!(rs <= rb + 1e-9);
        }
    }
}
