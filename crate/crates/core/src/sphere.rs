//! Primitives on the unit sphere S^d in R^{d+1}.
//!
//! Points are unit vectors; a great subsphere is encoded by its (unoriented)
//! unit normal. The spherical origin is the first standard basis vector.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SphError};
use crate::linalg;

pub const UNIT_TOL: f64 = 1e-12;

/// A point of S^d, stored as a (d+1)-vector of unit Euclidean norm.
///
/// Renormalised on construction; requires d >= 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVec(Vec<f64>);

impl UnitVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(SphError::Domain(format!(
                "ambient dimension {} < 3 (need d >= 2)",
                coords.len()
            )));
        }
        let n = linalg::norm(&coords);
        if !(n.is_finite() && n > 1e-300) {
            return Err(SphError::Degenerate("cannot normalise zero vector".into()));
        }
        let coords = coords.into_iter().map(|c| c / n).collect();
        Ok(UnitVec(coords))
    }

    /// The spherical origin of S^d: the first standard basis vector.
    pub fn origin(d: usize) -> Self {
        let mut v = vec![0.0; d + 1];
        v[0] = 1.0;
        UnitVec(v)
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d + 1];
        v[i] = 1.0;
        UnitVec(v)
    }

    /// Spherical dimension d (ambient dimension minus one).
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &UnitVec) -> f64 {
        linalg::dot(&self.0, &other.0)
    }

    pub fn neg(&self) -> UnitVec {
        UnitVec(self.0.iter().map(|c| -c).collect())
    }

    /// Euclidean (chord) distance; resolves near-coincident points far below
    /// the arccos noise floor of the geodesic metric.
    pub fn chord_distance(&self, other: &UnitVec) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Renormalised difference `self - other`; `None` when the points
    /// coincide to within `1e-12`.
    pub fn sub_normalized(&self, other: &UnitVec) -> Option<UnitVec> {
        let diff: Vec<f64> = self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect();
        let n = linalg::norm(&diff);
        if n < UNIT_TOL {
            return None;
        }
        Some(UnitVec(diff.into_iter().map(|c| c / n).collect()))
    }
}

/// A spherical ball `B(center, radius)`; a cap when the radius is <= pi/2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cap {
    pub center: UnitVec,
    pub radius: f64,
}

impl Cap {
    pub fn new(center: UnitVec, radius: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&radius) {
            return Err(SphError::Domain(format!("cap radius {radius} not in [0, pi]")));
        }
        Ok(Cap { center, radius })
    }

    pub fn is_proper(&self) -> bool {
        self.radius <= std::f64::consts::FRAC_PI_2
    }

    pub fn contains(&self, y: &UnitVec) -> bool {
        geodesic_distance(&self.center, y).expect("dim checked") <= self.radius + 1e-12
    }
}

/// Geodesic distance `arccos(<x,y>)`, with the inner product clamped to
/// [-1, 1] so that roundoff near identical or antipodal points cannot
/// produce NaN.
pub fn geodesic_distance(x: &UnitVec, y: &UnitVec) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(SphError::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(x.dot(y).clamp(-1.0, 1.0).acos())
}

/// Surface area of S^{n-1}: `2 pi^{n/2} / Gamma(n/2)`, via the two-step
/// recurrence `omega_n = 2 pi omega_{n-2} / (n - 2)` (keeps omega_3 = 4 pi
/// and omega_4 = 2 pi^2 exact to the last ulp).
pub fn omega(n: usize) -> f64 {
    assert!(n >= 1, "omega requires n >= 1");
    let pi = std::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => 2.0 * pi,
        _ => 2.0 * pi * omega(n - 2) / (n - 2) as f64,
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for j in 0..7 {
        let x = h * XGK[j];
        let fv = f(c - x) + f(c + x);
        kron += WGK[j] * fv;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fv;
        }
    }
    (kron * h, (kron - gauss).abs() * h)
}

/// Adaptive Gauss–Kronrod quadrature of `f` on `[a, b]` to absolute
/// tolerance `tol`.
pub fn adaptive_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth >= 32 {
            return v;
        }
        let c = 0.5 * (a + b);
        rec(f, a, c, tol / 2.0, depth + 1) + rec(f, c, b, tol / 2.0, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Incomplete sine integral `D_d(x) = int_0^x sin^{d-1}(t) dt` for
/// `x` in `[0, pi]`, absolute error <= 1e-12 (closed forms for d = 2, 3).
pub fn sine_integral_d(d: usize, x: f64) -> Result<f64> {
    if d < 2 {
        return Err(SphError::Domain(format!("d = {d} < 2")));
    }
    if !(-1e-12..=std::f64::consts::PI + 1e-12).contains(&x) {
        return Err(SphError::Domain(format!("x = {x} outside [0, pi]")));
    }
    let x = x.clamp(0.0, std::f64::consts::PI);
    Ok(match d {
        2 => 1.0 - x.cos(),
        3 => 0.5 * (x - x.sin() * x.cos()),
        _ => adaptive_quad(&|t: f64| t.sin().powi(d as i32 - 1), 0.0, x, 1e-13),
    })
}

/// `int_0^a cos^{d-1}(t) dt` for `a` in `[0, pi/2]` (closed forms d = 2, 3).
pub fn cosine_integral_d(d: usize, a: f64) -> Result<f64> {
    if d < 2 {
        return Err(SphError::Domain(format!("d = {d} < 2")));
    }
    if !(-1e-12..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&a) {
        return Err(SphError::Domain(format!("a = {a} outside [0, pi/2]")));
    }
    let a = a.clamp(0.0, std::f64::consts::FRAC_PI_2);
    Ok(match d {
        2 => a.sin(),
        3 => 0.5 * (a + a.sin() * a.cos()),
        _ => adaptive_quad(&|t: f64| t.cos().powi(d as i32 - 1), 0.0, a, 1e-13),
    })
}

/// Volume of a spherical ball of radius `r` in S^d:
/// `sigma_d(B(e, r)) = omega_d * D_d(r)`.
pub fn cap_volume(d: usize, r: f64) -> Result<f64> {
    Ok(omega(d) * sine_integral_d(d, r)?)
}

/// `U_1` of a cap of radius `a <= pi/2`:
/// `(omega_d / omega_{d+1}) int_0^a cos^{d-1}(t) dt`, a value in [0, 1/2].
pub fn cap_u1(d: usize, a: f64) -> Result<f64> {
    Ok(omega(d) / omega(d + 1) * cosine_integral_d(d, a)?)
}

/// Radius of the ball with volume `v` in S^d (monotone bisection on
/// `cap_volume`, absolute tolerance 1e-12 on the radius).
pub fn radius_from_volume(d: usize, v: f64) -> Result<f64> {
    let total = omega(d + 1);
    if !(0.0..=total).contains(&v) {
        return Err(SphError::Domain(format!("volume {v} outside [0, {total}]")));
    }
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::PI);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cap_volume(d, mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A point drawn from the rotation invariant distribution on S^d
/// (normalised Gaussian construction).
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, d: usize) -> UnitVec {
    loop {
        let coords: Vec<f64> = (0..d + 1).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(v) = UnitVec::new(coords) {
            return v;
        }
    }
}

/// A proper rotation of R^{d+1}, stored row-major.
#[derive(Clone, Debug)]
pub struct Rotation {
    n: usize,
    m: Vec<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Rotation { n, m }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }

    #[allow(clippy::needless_range_loop)]
    pub fn apply(&self, v: &UnitVec) -> UnitVec {
        let n = self.n;
        let x = v.coords();
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = (0..n).map(|j| self.m[i * n + j] * x[j]).sum();
        }
        UnitVec::new(out).expect("rotation preserves norm")
    }

    /// Apply the inverse rotation (the transpose).
    #[allow(clippy::needless_range_loop)]
    pub fn apply_inverse(&self, v: &UnitVec) -> UnitVec {
        let n = self.n;
        let x = v.coords();
        let mut out = vec![0.0; n];
        for j in 0..n {
            out[j] = (0..n).map(|i| self.m[i * n + j] * x[i]).sum();
        }
        UnitVec::new(out).expect("rotation preserves norm")
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = (0..n).map(|k| self.m[i * n + k] * other.m[k * n + j]).sum();
            }
        }
        Rotation { n, m }
    }

    pub fn det(&self) -> f64 {
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| self.m[i * self.n..(i + 1) * self.n].to_vec())
            .collect();
        linalg::det(&rows)
    }

    /// max |R^T R - I| entry, for orthogonality checks.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| self.m[k * n + i] * self.m[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// The fixed transporter mapping the origin to `x`: the rotation in the
/// plane spanned by origin and `x`, acting as the identity on its orthogonal
/// complement. At `x = -origin` the map rotates by pi in the plane spanned by
/// the origin and the second basis vector (fixed tie-break).
pub fn transporter(x: &UnitVec) -> Rotation {
    let n = x.dim() + 1;
    let o = UnitVec::origin(x.dim());
    let c = o.dot(x);
    let mut rot = Rotation::identity(n);
    if 1.0 + c < 1e-12 {
        // antipodal: rotate by pi in the (origin, e_2) plane
        rot.m[0] = -1.0;
        rot.m[n + 1] = -1.0;
        return rot;
    }
    // R = I - (a+b)(a+b)^T / (1 + <a,b>) + 2 b a^T  with a = origin, b = x
    let a = o.coords();
    let b = x.coords();
    for i in 0..n {
        for j in 0..n {
            let s = (a[i] + b[i]) * (a[j] + b[j]) / (1.0 + c);
            rot.m[i * n + j] += -s + 2.0 * b[i] * a[j];
        }
    }
    rot
}

/// A uniform (Haar) rotation fixing the origin: a Haar element of SO(d)
/// acting on the orthogonal complement of the origin.
#[allow(clippy::needless_range_loop)]
pub fn random_stabilizer_rotation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Rotation {
    let n = d + 1;
    // Gram-Schmidt on Gaussian columns is the unique QR with positive
    // R-diagonal, hence Haar on O(d); a fixed reflection folds the det -1
    // part onto SO(d).
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for i in 0..d {
        for j in 0..i {
            let proj = linalg::dot(&cols[i], &cols[j]);
            for k in 0..d {
                let tmp = cols[j][k];
                cols[i][k] -= proj * tmp;
            }
        }
        let nn = linalg::norm(&cols[i]);
        if nn < 1e-12 {
            // astronomically unlikely; retry
            return random_stabilizer_rotation(rng, d);
        }
        for k in 0..d {
            cols[i][k] /= nn;
        }
    }
    let rows: Vec<Vec<f64>> = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
    let mut q = rows;
    if linalg::det(&q) < 0.0 {
        for v in q[0].iter_mut() {
            *v = -*v;
        }
    }
    let mut rot = Rotation::identity(n);
    for i in 0..d {
        for j in 0..d {
            rot.m[(i + 1) * n + (j + 1)] = q[i][j];
        }
    }
    rot
}

/// A rotation `R` with `R * origin = x`, composed of the fixed transporter
/// to `x` and a uniform random rotation fixing the origin. Repeated draws
/// realise the invariant kernel over `{R : R origin = x}`.
pub fn rotation_to<R: Rng + ?Sized>(x: &UnitVec, rng: &mut R) -> Rotation {
    transporter(x).compose(&random_stabilizer_rotation(rng, x.dim()))
}
