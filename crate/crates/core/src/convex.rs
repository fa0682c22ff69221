//! Spherically convex polytopes in H- and V-representation.
//!
//! An `HPolytope` is `{y in S^d : <y, n_j> >= 0 for all j}` with oriented
//! unit normals (the empty normal list encodes the whole sphere). A
//! `VPolytope` is the spherical hull of its extreme unit vectors. Membership,
//! polarity, vertex enumeration, radial functions, Hausdorff distance and
//! vertex-subset simplification live here, together with exact area,
//! perimeter and mean-width routines for cells on S^2.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SphError};
use crate::linalg;
use crate::sphere::{geodesic_distance, UnitVec};

pub const MEMBER_TOL: f64 = 1e-12;
pub const FEAS_TOL: f64 = 1e-9;

/// Intersection of halfspaces through the origin, as a subset of S^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<UnitVec>,
    witness: Option<UnitVec>,
}

/// Spherical hull of extreme unit vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<UnitVec>,
}

impl HPolytope {
    /// Build from oriented normals. A witness, when given, must be strictly
    /// interior (all inner products positive).
    pub fn new(dim: usize, normals: Vec<UnitVec>, witness: Option<UnitVec>) -> Result<Self> {
        for n in &normals {
            if n.dim() != dim {
                return Err(SphError::DimensionMismatch(n.dim(), dim));
            }
        }
        if let Some(w) = &witness {
            if w.dim() != dim {
                return Err(SphError::DimensionMismatch(w.dim(), dim));
            }
            for n in &normals {
                if w.dot(n) <= 0.0 {
                    return Err(SphError::Precondition(
                        "witness not strictly interior".into(),
                    ));
                }
            }
        }
        Ok(HPolytope { dim, normals, witness })
    }

    /// The whole sphere S^d (the trivial tessellation cell).
    pub fn whole_sphere(dim: usize) -> Self {
        HPolytope { dim, normals: Vec::new(), witness: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[UnitVec] {
        &self.normals
    }

    pub fn witness(&self) -> Option<&UnitVec> {
        self.witness.as_ref()
    }

    pub fn is_whole_sphere(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn contains(&self, y: &UnitVec) -> bool {
        self.normals.iter().all(|n| n.dot(y) >= -MEMBER_TOL)
    }

    /// Smallest constraint slack at `y` (`+inf` for the whole sphere).
    pub fn min_slack(&self, y: &UnitVec) -> f64 {
        self.normals
            .iter()
            .map(|n| n.dot(y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of the d-subset vertex scan: the extreme vectors plus the number
/// of degenerate subsets that had to be skipped.
#[derive(Clone, Debug)]
pub struct VertexScan {
    pub polytope: VPolytope,
    pub skipped_subsets: usize,
}

impl VPolytope {
    /// Build from candidate vertices; deduplicates, and for d <= 3 removes
    /// points that are nonnegative combinations of the others.
    pub fn new(dim: usize, vertices: Vec<UnitVec>) -> Result<Self> {
        for v in &vertices {
            if v.dim() != dim {
                return Err(SphError::DimensionMismatch(v.dim(), dim));
            }
        }
        let mut dedup: Vec<UnitVec> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !dedup.iter().any(|w| w.chord_distance(&v) < FEAS_TOL) {
                dedup.push(v);
            }
        }
        let vertices = if dim <= 3 && dedup.len() > 2 {
            extreme_filter(&dedup)
        } else {
            dedup
        };
        Ok(VPolytope { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[UnitVec] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Proper (contained in some open hemisphere) iff the convex hull of the
    /// vertices stays away from the Euclidean origin.
    pub fn is_proper(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let pts: Vec<Vec<f64>> = self.vertices.iter().map(|v| v.coords().to_vec()).collect();
        let (x, _) = linalg::min_norm_point(&pts, 1e-14);
        linalg::norm(&x) > 1e-7
    }

    /// Spherical circumcenter: minimiser of the maximal geodesic distance to
    /// the vertices, when the circumradius is below pi/2. Falls back to the
    /// normalised vertex sum and then to the first vertex for improper
    /// inputs (degenerate cells keep a deterministic, rotation covariant
    /// centre this way).
    pub fn circumcenter(&self) -> Result<UnitVec> {
        if self.vertices.is_empty() {
            return Err(SphError::Infeasible("no vertices".into()));
        }
        let pts: Vec<Vec<f64>> = self.vertices.iter().map(|v| v.coords().to_vec()).collect();
        let (x, _) = linalg::min_norm_point(&pts, 1e-14);
        if linalg::norm(&x) > 1e-7 {
            return UnitVec::new(x);
        }
        let mut sum = vec![0.0; self.dim + 1];
        for v in &self.vertices {
            for (s, c) in sum.iter_mut().zip(v.coords()) {
                *s += c;
            }
        }
        if linalg::norm(&sum) > 1e-9 {
            return UnitVec::new(sum);
        }
        Ok(self.vertices[0].clone())
    }

    /// Geodesic distance from `x` to the body, via projection onto the
    /// spanned cone (exact for the hull of the stored vertices).
    pub fn distance_to(&self, x: &UnitVec) -> Result<f64> {
        if self.vertices.is_empty() {
            return Err(SphError::Infeasible("no vertices".into()));
        }
        let gens: Vec<Vec<f64>> = self.vertices.iter().map(|v| v.coords().to_vec()).collect();
        let p = linalg::project_to_cone(&gens, x.coords());
        let np = linalg::norm(&p);
        if np > 1e-12 {
            // the residual is orthogonal to the projection, so the angle is
            // atan2(||x - p||, ||p||); stable near zero distance
            let resid: f64 = x
                .coords()
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            return Ok(resid.atan2(np));
        }
        let cosine = self
            .vertices
            .iter()
            .map(|v| v.dot(x))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(cosine.clamp(-1.0, 1.0).acos())
    }
}

fn extreme_filter(vertices: &[UnitVec]) -> Vec<UnitVec> {
    let mut keep = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let others: Vec<Vec<f64>> = vertices
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, w)| w.coords().to_vec())
            .collect();
        let p = linalg::project_to_cone(&others, v.coords());
        let resid: f64 = v
            .coords()
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if resid > 1e-9 {
            keep.push(v.clone());
        }
    }
    keep
}

/// Enumerate the extreme vectors of an H-polytope by scanning all d-subsets
/// of normals: each subset spans d hyperplanes whose common line is a vertex
/// candidate, oriented to satisfy the remaining constraints. Exact for
/// generic position; subsets with a degenerate null space or with constraint
/// residuals inside `(-1e-9, 0)` are skipped and counted.
pub fn vertices(p: &HPolytope) -> Result<VertexScan> {
    let d = p.dim();
    let m = p.normals.len();
    let mut skipped = 0usize;
    let mut found: Vec<UnitVec> = Vec::new();
    if m >= d {
        let mut subset: Vec<usize> = (0..d).collect();
        loop {
            let rows: Vec<Vec<f64>> = subset
                .iter()
                .map(|&j| p.normals[j].coords().to_vec())
                .collect();
            let z = linalg::null_vector(&rows);
            if linalg::norm(&z) < 1e-10 {
                skipped += 1;
            } else if let Ok(cand) = UnitVec::new(z) {
                for c in [cand.clone(), cand.neg()] {
                    let mut min_slack = f64::INFINITY;
                    for (j, n) in p.normals.iter().enumerate() {
                        if subset.contains(&j) {
                            continue;
                        }
                        min_slack = min_slack.min(n.dot(&c));
                    }
                    if min_slack >= 0.0 {
                        found.push(c);
                    } else if min_slack > -FEAS_TOL {
                        skipped += 1;
                    }
                }
            }
            // advance to the next d-subset in lexicographic order
            let mut i = d as isize - 1;
            while i >= 0 && subset[i as usize] == i as usize + m - d {
                i -= 1;
            }
            if i < 0 {
                break;
            }
            let i = i as usize;
            subset[i] += 1;
            for k in i + 1..d {
                subset[k] = subset[k - 1] + 1;
            }
        }
    }
    let poly = VPolytope::new(d, found)?;
    Ok(VertexScan { polytope: poly, skipped_subsets: skipped })
}

/// Polar of a V-polytope: `K* = {u : <u, x> <= 0 for all x in K}`, an
/// H-polytope with normals `-v_i`.
pub fn polar_of_v(k: &VPolytope) -> Result<HPolytope> {
    if k.is_empty() {
        return Err(SphError::Infeasible("polar of empty body".into()));
    }
    if !k.is_proper() {
        return Err(SphError::Precondition(
            "polar requires a proper body (open hemisphere)".into(),
        ));
    }
    let normals: Vec<UnitVec> = k.vertices().iter().map(UnitVec::neg).collect();
    let witness = k.circumcenter().ok().map(|c| c.neg()).filter(|w| {
        normals.iter().all(|n| n.dot(w) > 0.0)
    });
    HPolytope::new(k.dim(), normals, witness)
}

/// Polar of an H-polytope: the spherical hull of the negated normals.
pub fn polar_of_h(p: &HPolytope) -> Result<VPolytope> {
    if p.is_whole_sphere() {
        return Err(SphError::Precondition("polar of the whole sphere is empty".into()));
    }
    VPolytope::new(p.dim(), p.normals().iter().map(UnitVec::neg).collect())
}

/// Does the great subsphere with normal `x` meet the body? True iff the
/// vertices do not lie strictly on one side of `x^perp`.
pub fn hits_great_subsphere(k: &VPolytope, x: &UnitVec) -> bool {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in k.vertices() {
        let t = v.dot(x);
        min = min.min(t);
        max = max.max(t);
    }
    min <= MEMBER_TOL && max >= -MEMBER_TOL
}

/// Spherical radial function of `p` at centre `e` in tangent direction `u`:
/// the largest `t` in `[0, pi/2]` with `cos(t) e + sin(t) u` inside `p`.
/// Closed form per constraint.
pub fn radial_function(p: &HPolytope, e: &UnitVec, u: &UnitVec) -> Result<f64> {
    if p.min_slack(e) <= 0.0 {
        return Err(SphError::Precondition("centre not strictly interior".into()));
    }
    let mut alpha = std::f64::consts::FRAC_PI_2;
    for n in p.normals() {
        let a = n.dot(e);
        let b = n.dot(u);
        if b < 0.0 {
            // a cos t + b sin t = 0 at t = atan(a / -b)
            alpha = alpha.min((a / -b).atan());
        }
    }
    Ok(alpha)
}

/// Radial function by bisection on membership; test oracle for the closed
/// form.
pub fn radial_function_bisect(p: &HPolytope, e: &UnitVec, u: &UnitVec) -> f64 {
    let point_at = |t: f64| {
        let c = t.cos();
        let s = t.sin();
        let coords: Vec<f64> = e
            .coords()
            .iter()
            .zip(u.coords())
            .map(|(a, b)| c * a + s * b)
            .collect();
        UnitVec::new(coords).expect("unit by construction")
    };
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    if p.contains(&point_at(hi)) {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if p.contains(&point_at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of the sampled two-sided Hausdorff distance: the value and the
/// boundary mesh size it was computed at (`None` when no arc mesh was
/// available, i.e. d >= 3 where only vertices are sampled).
#[derive(Clone, Debug)]
pub struct HausdorffEstimate {
    pub value: f64,
    pub mesh: Option<f64>,
}

fn boundary_samples(k: &VPolytope, n_samples: usize) -> (Vec<UnitVec>, Option<f64>) {
    let verts = k.vertices();
    if k.dim() != 2 || verts.len() < 3 {
        return (verts.to_vec(), None);
    }
    let center = match k.circumcenter() {
        Ok(c) => c,
        Err(_) => return (verts.to_vec(), None),
    };
    let ordered = order_around(verts, &center);
    let m = ordered.len();
    let per_edge = (n_samples / m).max(1);
    let mut out = Vec::with_capacity(m * (per_edge + 1));
    let mut mesh = 0.0f64;
    for i in 0..m {
        let a = &ordered[i];
        let b = &ordered[(i + 1) % m];
        let ang = geodesic_distance(a, b).expect("same dim");
        mesh = mesh.max(ang / (per_edge as f64 + 1.0));
        out.push(a.clone());
        // slerp interior points of the arc
        if ang > 1e-12 {
            for s in 1..=per_edge {
                let t = s as f64 / (per_edge as f64 + 1.0);
                let w1 = ((1.0 - t) * ang).sin() / ang.sin();
                let w2 = (t * ang).sin() / ang.sin();
                let coords: Vec<f64> = a
                    .coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(x, y)| w1 * x + w2 * y)
                    .collect();
                if let Ok(v) = UnitVec::new(coords) {
                    out.push(v);
                }
            }
        }
    }
    (out, Some(mesh))
}

/// Two-sided sampled spherical Hausdorff distance between V-polytopes.
/// Boundary arcs are meshed on S^2; in higher dimension only the vertices
/// are sampled. Distances to a body use the exact cone projection.
pub fn hausdorff_distance(k: &VPolytope, q: &VPolytope, n_samples: usize) -> Result<HausdorffEstimate> {
    if k.is_empty() || q.is_empty() {
        return Err(SphError::Infeasible("hausdorff on empty body".into()));
    }
    let (ks, mk) = boundary_samples(k, n_samples);
    let (qs, mq) = boundary_samples(q, n_samples);
    let mut value = 0.0f64;
    for x in &ks {
        value = value.max(q.distance_to(x)?);
    }
    for x in &qs {
        value = value.max(k.distance_to(x)?);
    }
    let mesh = match (mk, mq) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    Ok(HausdorffEstimate { value, mesh })
}

/// Order vertices by angle around `center` in a fixed tangent basis
/// (d = 2 only).
pub fn order_around(verts: &[UnitVec], center: &UnitVec) -> Vec<UnitVec> {
    let c = center.coords();
    // tangent basis at center
    let pick = if c[0].abs() < 0.9 { 0 } else { 1 };
    let mut t1 = vec![0.0; 3];
    t1[pick] = 1.0;
    let proj = linalg::dot(&t1, c);
    for (a, b) in t1.iter_mut().zip(c) {
        *a -= proj * b;
    }
    let n1 = linalg::norm(&t1);
    for a in t1.iter_mut() {
        *a /= n1;
    }
    let t2 = vec![
        c[1] * t1[2] - c[2] * t1[1],
        c[2] * t1[0] - c[0] * t1[2],
        c[0] * t1[1] - c[1] * t1[0],
    ];
    let mut withang: Vec<(f64, UnitVec)> = verts
        .iter()
        .map(|v| {
            let x = linalg::dot(v.coords(), &t1);
            let y = linalg::dot(v.coords(), &t2);
            (y.atan2(x), v.clone())
        })
        .collect();
    withang.sort_by(|a, b| a.0.total_cmp(&b.0));
    withang.into_iter().map(|(_, v)| v).collect()
}

/// Vertex-subset simplification: greedy farthest-point insertion on geodesic
/// distance keeps at most `k` of the extreme points, so the result is a
/// sub-polytope of `p`.
pub fn simplify_vertices(p: &VPolytope, k: usize) -> Result<VPolytope> {
    let d = p.dim();
    if k < d + 1 {
        return Err(SphError::Domain(format!("k = {k} < d+1 = {}", d + 1)));
    }
    let verts = p.vertices();
    if verts.len() <= k {
        return Ok(p.clone());
    }
    let mut chosen: Vec<usize> = vec![0];
    let mut mindist: Vec<f64> = verts
        .iter()
        .map(|v| geodesic_distance(v, &verts[0]).expect("same dim"))
        .collect();
    while chosen.len() < k {
        let next = (0..verts.len())
            .max_by(|&a, &b| mindist[a].total_cmp(&mindist[b]))
            .expect("nonempty");
        if mindist[next] <= 0.0 {
            break;
        }
        chosen.push(next);
        for (i, v) in verts.iter().enumerate() {
            let dnew = geodesic_distance(v, &verts[next]).expect("same dim");
            if dnew < mindist[i] {
                mindist[i] = dnew;
            }
        }
    }
    chosen.sort_unstable();
    VPolytope::new(d, chosen.into_iter().map(|i| verts[i].clone()).collect())
}

/// Inscribed polytopal discretisation of the cap `B(center, radius)` on S^2:
/// `m` vertices on the boundary circle.
pub fn cap_inscribed_vpoly(center: &UnitVec, radius: f64, m: usize) -> Result<VPolytope> {
    if center.dim() != 2 {
        return Err(SphError::Domain("cap discretisations are d = 2 only".into()));
    }
    let ring = cap_ring(center, radius, m);
    VPolytope::new(2, ring)
}

/// Circumscribed polytopal discretisation of the cap `B(center, radius)` on
/// S^2: `m` facets tangent to the boundary circle, so the centred inradius
/// is exactly `radius`.
pub fn cap_circumscribed_hpoly(center: &UnitVec, radius: f64, m: usize) -> Result<HPolytope> {
    if center.dim() != 2 {
        return Err(SphError::Domain("cap discretisations are d = 2 only".into()));
    }
    // normal at angle theta: sin(r) * center - cos(r) * u(theta)
    let ring = cap_ring(center, radius + std::f64::consts::FRAC_PI_2, m);
    let normals: Vec<UnitVec> = ring.into_iter().map(|v| v.neg()).collect();
    HPolytope::new(2, normals, Some(center.clone()))
}

fn cap_ring(center: &UnitVec, radius: f64, m: usize) -> Vec<UnitVec> {
    let c = center.coords();
    let pick = if c[0].abs() < 0.9 { 0 } else { 1 };
    let mut t1 = vec![0.0; 3];
    t1[pick] = 1.0;
    let proj = linalg::dot(&t1, c);
    for (a, b) in t1.iter_mut().zip(c) {
        *a -= proj * b;
    }
    let n1 = linalg::norm(&t1);
    for a in t1.iter_mut() {
        *a /= n1;
    }
    let t2 = [
        c[1] * t1[2] - c[2] * t1[1],
        c[2] * t1[0] - c[0] * t1[2],
        c[0] * t1[1] - c[1] * t1[0],
    ];
    (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let coords: Vec<f64> = (0..3)
                .map(|j| {
                    radius.cos() * c[j]
                        + radius.sin() * (th.cos() * t1[j] + th.sin() * t2[j])
                })
                .collect();
            UnitVec::new(coords).expect("unit by construction")
        })
        .collect()
}

/// Exact area of a cell on S^2 by the spherical-excess fan from an interior
/// direction. Handles the whole-sphere sentinel, hemispheres and lunes;
/// errors on flat (lower-dimensional) inputs.
pub fn cell_area_s2(p: &HPolytope) -> Result<f64> {
    cell_area_perimeter_s2(p).map(|(a, _)| a)
}

/// Exact perimeter of a cell on S^2 (boundary length).
pub fn cell_perimeter_s2(p: &HPolytope) -> Result<f64> {
    cell_area_perimeter_s2(p).map(|(_, l)| l)
}

/// Exact (area, perimeter) of a cell on S^2.
pub fn cell_area_perimeter_s2(p: &HPolytope) -> Result<(f64, f64)> {
    if p.dim() != 2 {
        return Err(SphError::Domain("cell_area_s2 requires d = 2".into()));
    }
    let pi = std::f64::consts::PI;
    if p.is_whole_sphere() {
        return Ok((4.0 * pi, 0.0));
    }
    if p.normals().len() == 1 {
        return Ok((2.0 * pi, 2.0 * pi));
    }
    let scan = vertices(p)?;
    let verts = scan.polytope.vertices();
    if verts.len() == 2 {
        // a lune: two antipodal vertices, opening angle pi - angle(normals)
        if verts[0].dot(&verts[1]) > -1.0 + 1e-9 {
            return Err(SphError::Degenerate("flat two-vertex cell".into()));
        }
        // find the two active (non-redundant) normals
        let active: Vec<&UnitVec> = p
            .normals()
            .iter()
            .filter(|n| verts.iter().all(|v| n.dot(v).abs() < FEAS_TOL))
            .collect();
        if active.len() < 2 {
            return Err(SphError::Degenerate("lune without two active normals".into()));
        }
        let phi = pi - active[0].dot(active[1]).clamp(-1.0, 1.0).acos();
        return Ok((2.0 * phi, 2.0 * pi));
    }
    if verts.len() < 3 {
        return Err(SphError::Degenerate(format!(
            "cell with {} vertices has no area",
            verts.len()
        )));
    }
    // interior direction: normalized vertex sum (interior for a pointed cone)
    let mut sum = vec![0.0; 3];
    for v in verts {
        for (s, c) in sum.iter_mut().zip(v.coords()) {
            *s += c;
        }
    }
    let center = UnitVec::new(sum)
        .map_err(|_| SphError::Degenerate("vertex sum vanished".into()))?;
    let ordered = order_around(verts, &center);
    let m = ordered.len();
    let mut area = 0.0f64;
    let mut perim = 0.0f64;
    let a = center.coords();
    for i in 0..m {
        let b = ordered[i].coords();
        let c = ordered[(i + 1) % m].coords();
        // signed spherical triangle excess (Oosterom-Strackee)
        let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
        let den = 1.0
            + linalg::dot(a, b)
            + linalg::dot(b, c)
            + linalg::dot(c, a);
        area += 2.0 * triple.atan2(den);
        perim += geodesic_distance(&ordered[i], &ordered[(i + 1) % m]).expect("dim 2");
    }
    if area < 0.0 {
        area = -area;
    }
    Ok((area, perim))
}

/// Exact `U_1` of a cell on S^2: half the normalised measure of great
/// circles meeting the cell, which by the spherical Cauchy formula is
/// `perimeter / (4 pi)` for proper cells and `1/2` for cells containing
/// antipodal points (sentinel, hemispheres, lunes).
pub fn cell_u1_exact_s2(p: &HPolytope) -> Result<f64> {
    if p.dim() != 2 {
        return Err(SphError::Domain("cell_u1_exact_s2 requires d = 2".into()));
    }
    if p.is_whole_sphere() || p.normals().len() == 1 {
        return Ok(0.5);
    }
    let (_, perim) = cell_area_perimeter_s2(p)?;
    let scan = vertices(p)?;
    if scan.polytope.vertices().len() == 2 {
        return Ok(0.5);
    }
    Ok(perim / (4.0 * std::f64::consts::PI))
}

/// Wire format for polytopes: both representations side by side, floats
/// written with 17 significant digits by the crate's JSON writer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    pub vertices: Vec<Vec<f64>>,
}

impl PolytopeJson {
    pub fn from_h(p: &HPolytope) -> Self {
        let verts = vertices(p)
            .map(|s| {
                s.polytope
                    .vertices()
                    .iter()
                    .map(|v| v.coords().to_vec())
                    .collect()
            })
            .unwrap_or_default();
        PolytopeJson {
            dim: p.dim(),
            normals: p.normals().iter().map(|n| n.coords().to_vec()).collect(),
            vertices: verts,
        }
    }

    pub fn from_v(k: &VPolytope) -> Self {
        PolytopeJson {
            dim: k.dim(),
            normals: Vec::new(),
            vertices: k.vertices().iter().map(|v| v.coords().to_vec()).collect(),
        }
    }

    /// Rebuild the H-representation (preferred) or fall back to the hull of
    /// the vertices.
    pub fn to_h(&self) -> Result<HPolytope> {
        if self.normals.is_empty() && !self.vertices.is_empty() {
            return Err(SphError::Config(
                "polytope json has only vertices; no H-representation".into(),
            ));
        }
        let normals = self
            .normals
            .iter()
            .map(|c| UnitVec::new(c.clone()))
            .collect::<Result<Vec<_>>>()?;
        HPolytope::new(self.dim, normals, None)
    }

    pub fn to_v(&self) -> Result<VPolytope> {
        let verts = self
            .vertices
            .iter()
            .map(|c| UnitVec::new(c.clone()))
            .collect::<Result<Vec<_>>>()?;
        VPolytope::new(self.dim, verts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{cap_u1, cap_volume, rotation_to, sample_uniform};
    
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn octant() -> HPolytope {
        let normals = (0..3).map(|i| UnitVec::basis(2, i)).collect();
        let w = UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap();
        HPolytope::new(2, normals, Some(w)).unwrap()
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
    fn contains_cases() {
        let p = octant();
        assert!(HPolytope::whole_sphere(2).contains(&UnitVec::basis(2, 1).neg()));
        assert!(p.contains(&UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap()));
        assert!(!p.contains(&UnitVec::origin(2).neg()));
    }

    #[test]
    fn vertices_of_octant() {
        let scan = vertices(&octant()).unwrap();
        let vs = scan.polytope;
        assert_eq!(vs.vertices().len(), 3);
        for i in 0..3 {
            let e = UnitVec::basis(2, i);
            assert!(vs.vertices().iter().any(|v| v.dot(&e) > 1.0 - 1e-12));
        }
        assert_eq!(scan.skipped_subsets, 0);
    }

    #[test]
    fn vertices_of_hemisphere_empty() {
        let p = HPolytope::new(2, vec![UnitVec::origin(2)], None).unwrap();
        let scan = vertices(&p).unwrap();
        assert!(scan.polytope.is_empty());
        assert!(!scan.polytope.is_proper());
    }

    #[test]
    fn vertices_of_random_cells_activate_two_constraints() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..30 {
            let p = random_crofton(&mut rng, 8);
            let scan = vertices(&p).unwrap();
            for v in scan.polytope.vertices() {
                assert!(p.contains(v), "vertex outside body");
                let active = p
                    .normals()
                    .iter()
                    .filter(|n| n.dot(v).abs() < 1e-9)
                    .count();
                assert_eq!(active, 2, "vertex must activate exactly 2 constraints");
            }
        }
    }

    #[test]
    fn rotation_equivariance_of_vertices() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..10 {
            let p = random_crofton(&mut rng, 6);
            let rot = rotation_to(&sample_uniform(&mut rng, 2), &mut rng);
            let rotated = HPolytope::new(
                2,
                p.normals().iter().map(|n| rot.apply(n)).collect(),
                None,
            )
            .unwrap();
            let v1: Vec<UnitVec> = vertices(&p)
                .unwrap()
                .polytope
                .vertices()
                .iter()
                .map(|v| rot.apply(v))
                .collect();
            let v2 = vertices(&rotated).unwrap();
            assert_eq!(v1.len(), v2.polytope.vertices().len());
            for v in &v1 {
                assert!(
                    v2.polytope.vertices().iter().any(|w| v.chord_distance(w) < 1e-9),
                    "rotated vertex missing"
                );
            }
        }
    }

    #[test]
    fn polar_octant() {
        let scan = vertices(&octant()).unwrap();
        let polar = polar_of_v(&scan.polytope).unwrap();
        // polar of the positive octant is the negative octant
        let y = UnitVec::new(vec![-1.0, -1.0, -1.0]).unwrap();
        assert!(polar.contains(&y));
        assert!(!polar.contains(&UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap()));
        for n in polar.normals() {
            assert!(n.coords().iter().sum::<f64>() < 0.0);
        }
    }

    #[test]
    fn polar_involution() {
        let mut rng = ChaCha12Rng::seed_from_u64(35);
        for _ in 0..20 {
            let p = random_crofton(&mut rng, 7);
            let k = vertices(&p).unwrap().polytope;
            if !k.is_proper() || k.vertices().len() < 3 {
                continue;
            }
            let back = polar_of_h(&polar_of_v(&k).unwrap()).unwrap();
            assert_eq!(back.vertices().len(), k.vertices().len());
            for v in k.vertices() {
                assert!(back.vertices().iter().any(|w| v.chord_distance(w) < 1e-9));
            }
        }
    }

    #[test]
    fn hits_subsphere_cases() {
        let o = UnitVec::origin(2);
        let k = VPolytope::new(2, vec![o.clone()]).unwrap();
        assert!(hits_great_subsphere(&k, &UnitVec::basis(2, 1)));
        assert!(!hits_great_subsphere(&k, &o));
        let oct = vertices(&octant()).unwrap().polytope;
        let x = UnitVec::new(vec![1.0, -1.0, 0.0]).unwrap();
        assert!(hits_great_subsphere(&oct, &x));
        // unoriented: symmetric in x -> -x
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = sample_uniform(&mut rng, 2);
            assert_eq!(
                hits_great_subsphere(&oct, &x),
                hits_great_subsphere(&oct, &x.neg())
            );
        }
    }

    #[test]
    fn hits_fraction_matches_cap_u1() {
        // for a cap discretisation, the fraction of hitting subspheres is
        // 2 U1(cap) = sin(a) on S^2
        let a = 0.8f64;
        let k = cap_vpoly(a, 64);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let n = 40_000;
        let mut hits = 0;
        for _ in 0..n {
            if hits_great_subsphere(&k, &sample_uniform(&mut rng, 2)) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let expect = 2.0 * cap_u1(2, a).unwrap();
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((p - expect).abs() < 3.5 * se, "p={p} expect={expect}");
    }

    fn cap_vpoly(radius: f64, m: usize) -> VPolytope {
        cap_inscribed_vpoly(&UnitVec::origin(2), radius, m).unwrap()
    }

    fn cap_hpoly(radius: f64, m: usize) -> HPolytope {
        cap_circumscribed_hpoly(&UnitVec::origin(2), radius, m).unwrap()
    }

    #[test]
    fn radial_function_on_caps_and_octant() {
        // circumscribed cap polytope: radial function at the facet touch
        // points equals the cap radius; everywhere it is >= radius
        let a = 0.7;
        let p = cap_hpoly(a, 48);
        let e = UnitVec::origin(2);
        for k in 0..32 {
            let th = 2.0 * PI * k as f64 / 32.0;
            let u = UnitVec::new(vec![0.0, th.cos(), th.sin()]).unwrap();
            let alpha = radial_function(&p, &e, &u).unwrap();
            assert!(alpha >= a - 1e-9);
            let oracle = radial_function_bisect(&p, &e, &u);
            assert!((alpha - oracle).abs() < 1e-9, "{alpha} vs {oracle}");
        }
        // hemisphere: radial function pi/2
        let hemi = HPolytope::new(2, vec![e.clone()], None).unwrap();
        let u = UnitVec::basis(2, 1);
        assert!((radial_function(&hemi, &e, &u).unwrap() - FRAC_PI_2).abs() < 1e-12);
        // octant from the symmetric interior point
        let p = octant();
        let e = UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..40 {
            let raw = sample_uniform(&mut rng, 2);
            let proj = raw.dot(&e);
            let coords: Vec<f64> = raw
                .coords()
                .iter()
                .zip(e.coords())
                .map(|(a, b)| a - proj * b)
                .collect();
            if let Ok(u) = UnitVec::new(coords) {
                let alpha = radial_function(&p, &e, &u).unwrap();
                let oracle = radial_function_bisect(&p, &e, &u);
                assert!((alpha - oracle).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hausdorff_cases() {
        let k = cap_vpoly(0.5, 40);
        let same = hausdorff_distance(&k, &k, 200).unwrap();
        assert!(same.value < 1e-9, "self distance {}", same.value);
        let q = cap_vpoly(0.8, 40);
        let est = hausdorff_distance(&k, &q, 400).unwrap();
        assert!((est.value - 0.3).abs() < 0.01, "value {}", est.value);
        // nested pair: equals the one-sided distance from the bigger body
        let mut one_sided = 0.0f64;
        let (samples, _) = boundary_samples(&q, 400);
        for x in &samples {
            one_sided = one_sided.max(k.distance_to(x).unwrap());
        }
        assert!((est.value - one_sided).abs() < 1e-12);
    }

    #[test]
    fn simplify_keeps_subset_and_quality() {
        let p = cap_vpoly(0.6, 200);
        let q = simplify_vertices(&p, 16).unwrap();
        assert!(q.vertices().len() <= 16);
        for v in q.vertices() {
            assert!(p.vertices().iter().any(|w| v.chord_distance(w) < 1e-12));
        }
        // small polytope unchanged
        let small = cap_vpoly(0.6, 5);
        let same = simplify_vertices(&small, 8).unwrap();
        assert_eq!(same.vertices().len(), 5);
        assert!(simplify_vertices(&small, 2).is_err());
    }

    #[test]
    fn hausdorff_decay_under_simplification() {
        let p = cap_vpoly(0.6, 200);
        let mut logs = Vec::new();
        for &k in &[8usize, 16, 32] {
            let q = simplify_vertices(&p, k).unwrap();
            let h = hausdorff_distance(&p, &q, 600).unwrap();
            logs.push(((k as f64).ln(), h.value.ln()));
        }
        let slope = (logs[2].1 - logs[0].1) / (logs[2].0 - logs[0].0);
        assert!(slope <= -1.5, "slope {slope}");
    }

    #[test]
    fn exact_area_and_u1() {
        // octant: area pi/2, perimeter 3 pi/2, U1 = 3/8
        let (area, perim) = cell_area_perimeter_s2(&octant()).unwrap();
        assert!((area - PI / 2.0).abs() < 1e-12);
        assert!((perim - 1.5 * PI).abs() < 1e-12);
        assert!((cell_u1_exact_s2(&octant()).unwrap() - 0.375).abs() < 1e-12);
        // whole sphere and hemisphere
        assert!((cell_area_s2(&HPolytope::whole_sphere(2)).unwrap() - 4.0 * PI).abs() < 1e-12);
        let hemi = HPolytope::new(2, vec![UnitVec::origin(2)], None).unwrap();
        assert!((cell_area_s2(&hemi).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((cell_u1_exact_s2(&hemi).unwrap() - 0.5).abs() < 1e-12);
        // circumscribed cap polygon: area slightly above the cap volume
        let a = 0.7;
        let p = cap_hpoly(a, 256);
        let area = cell_area_s2(&p).unwrap();
        let capv = cap_volume(2, a).unwrap();
        assert!(area >= capv - 1e-12 && area < capv + 0.01, "{area} vs {capv}");
    }

    #[test]
    fn exact_u1_matches_monte_carlo() {
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for _ in 0..5 {
            let p = random_crofton(&mut rng, 7);
            let exact = cell_u1_exact_s2(&p).unwrap();
            let k = vertices(&p).unwrap().polytope;
            if k.vertices().len() < 3 {
                continue;
            }
            let n = 30_000;
            let mut hits = 0;
            for _ in 0..n {
                if hits_great_subsphere(&k, &sample_uniform(&mut rng, 2)) {
                    hits += 1;
                }
            }
            let mc = 0.5 * hits as f64 / n as f64;
            let se = 0.5 * (2.0 * exact * (1.0 - 2.0 * exact) / n as f64).sqrt();
            assert!((mc - exact).abs() < 4.0 * se.max(1e-4), "mc={mc} exact={exact}");
        }
    }

    #[test]
    fn area_fan_matches_lune_and_partition() {
        let mut rng = ChaCha12Rng::seed_from_u64(321);
        // two random circles: four lunes partition the sphere
        let n1 = sample_uniform(&mut rng, 2);
        let n2 = sample_uniform(&mut rng, 2);
        let mut total = 0.0;
        for s1 in [1.0f64, -1.0] {
            for s2 in [1.0f64, -1.0] {
                let normals = vec![
                    if s1 > 0.0 { n1.clone() } else { n1.neg() },
                    if s2 > 0.0 { n2.clone() } else { n2.neg() },
                ];
                let p = HPolytope::new(2, normals, None).unwrap();
                total += cell_area_s2(&p).unwrap();
            }
        }
        assert!((total - 4.0 * PI).abs() < 1e-9, "lunes sum to {total}");
    }
}
