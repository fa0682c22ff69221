//! Random model samplers: isotropic Poisson points on the sphere, the
//! induced great-subsphere process and its Crofton cell, full arrangement
//! enumeration on S^2, typical-cell resampling, and spherical Voronoi cells
//! including the typical Voronoi cell via the add-a-point-at-the-origin
//! construction and its bisector-process twin.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::constants::schlafli_count;
use crate::convex::{vertices, HPolytope};
use crate::error::{Result, SphError};
use crate::sphere::{omega, rotation_to, sample_uniform, UnitVec};

pub const ORTHO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TessellationKind {
    Hyperplane,
    Voronoi,
}

/// A tessellation realisation: the generating point process and the cells,
/// which cover the sphere with pairwise disjoint interiors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tessellation {
    pub dim: usize,
    pub generators: Vec<UnitVec>,
    pub cells: Vec<HPolytope>,
    pub kind: TessellationKind,
}

/// Sample an isotropic Poisson process of intensity `gamma_s` on S^d:
/// `N ~ Poisson(gamma_s * omega_{d+1})` iid uniform points (`N = 0` is a
/// legitimate outcome and yields the empty configuration).
pub fn sample_poisson<R: Rng + ?Sized>(gamma_s: f64, d: usize, rng: &mut R) -> Result<Vec<UnitVec>> {
    if !(gamma_s > 0.0 && gamma_s.is_finite()) {
        return Err(SphError::Domain(format!("intensity {gamma_s} not in (0, inf)")));
    }
    let lambda = gamma_s * omega(d + 1);
    let n = Poisson::new(lambda)
        .map_err(|e| SphError::Domain(format!("poisson: {e}")))?
        .sample(rng) as u64;
    Ok((0..n).map(|_| sample_uniform(rng, d)).collect())
}

/// Crofton cell of the great-subsphere process `{x^perp : x in points}` at
/// `origin`: the H-polytope with normals oriented toward the origin. A point
/// within `1e-12` of orthogonality to the origin is a degeneracy (callers
/// resample; the event has probability zero). The empty configuration gives
/// the whole-sphere sentinel.
pub fn crofton_cell(points: &[UnitVec], origin: &UnitVec) -> Result<HPolytope> {
    let d = origin.dim();
    let mut normals = Vec::with_capacity(points.len());
    for x in points {
        let t = x.dot(origin);
        if t.abs() < ORTHO_TOL {
            return Err(SphError::Degenerate(
                "generator orthogonal to the origin".into(),
            ));
        }
        normals.push(if t > 0.0 { x.clone() } else { x.neg() });
    }
    if normals.is_empty() {
        return Ok(HPolytope::whole_sphere(d));
    }
    HPolytope::new(d, normals, Some(origin.clone()))
}

/// Enumerate all cells of the arrangement of `k` great circles on S^2 by
/// sign vectors. Candidate cells are seeded from every pairwise-intersection
/// vertex perturbed into its four incident regions (two perturbation scales)
/// plus uniform random seeds; every found sign vector carries its interior
/// witness, and the enumeration is accepted only when the count matches the
/// region count `N(k)` of a generic arrangement. A mismatch after the seed
/// budget (or a near-parallel circle pair) is reported as a degeneracy and
/// the caller resamples.
pub fn tessellation_cells(normals: &[UnitVec], seed: u64) -> Result<Tessellation> {
    for n in normals {
        if n.dim() != 2 {
            return Err(SphError::Domain("cell enumeration requires d = 2".into()));
        }
    }
    let k = normals.len();
    let target = schlafli_count(2, k);
    let mut cells: Vec<HPolytope> = Vec::with_capacity(target as usize);

    if k == 0 {
        cells.push(HPolytope::whole_sphere(2));
        return Ok(Tessellation {
            dim: 2,
            generators: normals.to_vec(),
            cells,
            kind: TessellationKind::Hyperplane,
        });
    }

    let clean_tol = 1e-9;
    let sign_vector = |y: &UnitVec| -> Option<Vec<i8>> {
        let mut sv = Vec::with_capacity(k);
        for n in normals {
            let t = n.dot(y);
            if t.abs() <= clean_tol {
                return None;
            }
            sv.push(if t > 0.0 { 1 } else { -1 });
        }
        Some(sv)
    };

    let mut found: std::collections::BTreeMap<Vec<i8>, UnitVec> = std::collections::BTreeMap::new();
    let push_seed = |y: UnitVec, found: &mut std::collections::BTreeMap<Vec<i8>, UnitVec>| {
        if let Some(sv) = sign_vector(&y) {
            found.entry(sv).or_insert(y);
        }
    };

    if k == 1 {
        push_seed(normals[0].clone(), &mut found);
        push_seed(normals[0].neg(), &mut found);
    }

    // vertex seeds
    for i in 0..k {
        for j in i + 1..k {
            let a = normals[i].coords();
            let b = normals[j].coords();
            let cross = vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let nn = crate::linalg::norm(&cross);
            if nn < 1e-9 {
                return Err(SphError::Degenerate(format!(
                    "circles {i} and {j} nearly coincide"
                )));
            }
            let v = UnitVec::new(cross).expect("nonzero cross product");
            for vert in [v.clone(), v.neg()] {
                for eps in [1e-3f64, 1e-5] {
                    for si in [-1.0f64, 1.0] {
                        for sj in [-1.0f64, 1.0] {
                            let coords: Vec<f64> = vert
                                .coords()
                                .iter()
                                .zip(normals[i].coords())
                                .zip(normals[j].coords())
                                .map(|((vc, ni), nj)| vc + eps * (si * ni + sj * nj))
                                .collect();
                            if let Ok(y) = UnitVec::new(coords) {
                                push_seed(y, &mut found);
                            }
                        }
                    }
                }
            }
        }
    }

    // random fallback seeds until the Schlafli certificate is met
    let mut rng = crate::mc::rng_for(seed, 0x7e55);
    let budget = 4000 + 200 * k as u64;
    let mut used = 0u64;
    while (found.len() as u64) < target && used < budget {
        push_seed(sample_uniform(&mut rng, 2), &mut found);
        used += 1;
    }

    if found.len() as u64 != target {
        return Err(SphError::Degenerate(format!(
            "enumerated {} cells, Schlafli count is {target}",
            found.len()
        )));
    }

    for (sv, witness) in found {
        let oriented: Vec<UnitVec> = normals
            .iter()
            .zip(&sv)
            .map(|(n, &s)| if s > 0 { n.clone() } else { n.neg() })
            .collect();
        cells.push(HPolytope::new(2, oriented, Some(witness))?);
    }
    Ok(Tessellation {
        dim: 2,
        generators: normals.to_vec(),
        cells,
        kind: TessellationKind::Hyperplane,
    })
}

/// Hyperplane tessellation of S^2 induced by a Poisson point sample.
pub fn sample_hyperplane_tessellation<R: Rng + ?Sized>(
    gamma_s: f64,
    rng: &mut R,
    seed: u64,
) -> Result<Tessellation> {
    let points = sample_poisson(gamma_s, 2, rng)?;
    let mut t = tessellation_cells(&points, seed)?;
    t.generators = points;
    Ok(t)
}

/// Draw a cell uniformly and recentre it: apply the inverse of a random
/// rotation mapping the origin to the cell's circumcentre. For
/// rotation-invariant statistics, averaging over draws realises the
/// typical-cell distribution. Degenerate cells (sentinel; no vertices) fall
/// back to deterministic centres inside [`crate::convex::VPolytope::circumcenter`].
pub fn typical_cell<R: Rng + ?Sized>(tess: &Tessellation, rng: &mut R) -> Result<HPolytope> {
    if tess.cells.is_empty() {
        return Err(SphError::Precondition("tessellation without cells".into()));
    }
    let cell = &tess.cells[rng.gen_range(0..tess.cells.len())];
    if cell.is_whole_sphere() {
        return Ok(cell.clone());
    }
    let scan = vertices(cell)?.polytope;
    let center = if scan.is_empty() {
        // hemisphere: centre at the pole
        cell.normals()[0].clone()
    } else {
        scan.circumcenter()?
    };
    let rot = rotation_to(&center, rng);
    let normals = cell.normals().iter().map(|n| rot.apply_inverse(n)).collect();
    let witness = cell.witness().map(|w| rot.apply_inverse(w));
    HPolytope::new(cell.dim(), normals, witness)
}

/// Voronoi cell of the nucleus `x` within the point set `a`: the
/// intersection of the bisector halfspaces `<y, x - z> >= 0`. Points
/// coinciding with `x` are skipped; a singleton gives the whole sphere.
pub fn voronoi_cell(x: &UnitVec, a: &[UnitVec]) -> Result<HPolytope> {
    let d = x.dim();
    let mut normals = Vec::with_capacity(a.len());
    for z in a {
        match x.sub_normalized(z) {
            Some(n) => normals.push(n),
            None => continue, // duplicate of the nucleus
        }
    }
    if normals.is_empty() {
        return Ok(HPolytope::whole_sphere(d));
    }
    HPolytope::new(d, normals, Some(x.clone()))
}

/// Voronoi tessellation generated by a finite point set.
pub fn voronoi_tessellation(points: &[UnitVec], d: usize) -> Result<Tessellation> {
    if points.is_empty() {
        return Err(SphError::Precondition("voronoi needs at least one point".into()));
    }
    let mut cells = Vec::with_capacity(points.len());
    for x in points {
        cells.push(voronoi_cell(x, points)?);
    }
    Ok(Tessellation { dim: d, generators: points.to_vec(), cells, kind: TessellationKind::Voronoi })
}

/// Typical Voronoi cell: the cell of the origin in `X + delta_origin` (the
/// Palm/add-a-point construction). Realisation-wise identical to the Crofton
/// cell of the bisector process, see [`bisector_crofton_cell`].
pub fn voronoi_typical_cell(points: &[UnitVec], d: usize) -> Result<HPolytope> {
    let o = UnitVec::origin(d);
    let mut all = points.to_vec();
    all.push(o.clone());
    voronoi_cell(&o, &all)
}

/// Crofton cell at the origin of the bisector great-subsphere process
/// `{(x - origin)^perp : x in X}`. Equals [`voronoi_typical_cell`] exactly,
/// per realisation.
pub fn bisector_crofton_cell(points: &[UnitVec], d: usize) -> Result<HPolytope> {
    let o = UnitVec::origin(d);
    let mut normals = Vec::with_capacity(points.len());
    for x in points {
        match x.sub_normalized(&o) {
            // orient the bisector normal toward the origin:
            // <o, x - o> = cos(theta) - 1 < 0
            Some(w) => normals.push(w.neg()),
            None => continue,
        }
    }
    if normals.is_empty() {
        return Ok(HPolytope::whole_sphere(d));
    }
    HPolytope::new(d, normals, Some(o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::cell_area_s2;
    use crate::sphere::geodesic_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    #[test]
    fn poisson_count_mean() {
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        let gamma = 4.0 / omega(3);
        let n = 10_000;
        let mut total = 0usize;
        let mut saw_zero = false;
        for _ in 0..n {
            let pts = sample_poisson(gamma, 2, &mut rng).unwrap();
            total += pts.len();
            saw_zero |= pts.is_empty();
        }
        let mean = total as f64 / n as f64;
        let bound = 3.0 * (4.0f64 / n as f64).sqrt();
        assert!((mean - 4.0).abs() < bound, "mean {mean}");
        assert!(saw_zero, "N = 0 must occur at this intensity");
        assert!(sample_poisson(0.0, 2, &mut rng).is_err());
    }

    #[test]
    fn crofton_cell_cases() {
        let o = UnitVec::origin(2);
        assert!(crofton_cell(&[], &o).unwrap().is_whole_sphere());
        let p = UnitVec::new(vec![0.9, 0.1, 0.2]).unwrap();
        let cell = crofton_cell(std::slice::from_ref(&p), &o).unwrap();
        assert_eq!(cell.normals().len(), 1);
        assert!(cell.contains(&o));
        let mut rng = ChaCha12Rng::seed_from_u64(52);
        for _ in 0..50 {
            let pts = sample_poisson(1.0, 2, &mut rng).unwrap();
            match crofton_cell(&pts, &o) {
                Ok(cell) => assert!(cell.min_slack(&o) > 0.0),
                Err(SphError::Degenerate(_)) => {} // resample path
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        // adding a point can only shrink the cell
        for _ in 0..20 {
            let mut pts = sample_poisson(0.5, 2, &mut rng).unwrap();
            let big = crofton_cell(&pts, &o);
            pts.push(sample_uniform(&mut rng, 2));
            let small = crofton_cell(&pts, &o);
            if let (Ok(big), Ok(small)) = (big, small) {
                for _ in 0..200 {
                    let y = sample_uniform(&mut rng, 2);
                    if small.contains(&y) {
                        assert!(big.contains(&y));
                    }
                }
            }
        }
    }

    #[test]
    fn tessellation_counts_match_schlafli() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        for k in 0..=8usize {
            let normals: Vec<UnitVec> = (0..k).map(|_| sample_uniform(&mut rng, 2)).collect();
            let t = tessellation_cells(&normals, 99).unwrap();
            assert_eq!(t.cells.len() as u64, schlafli_count(2, k), "k = {k}");
        }
    }

    #[test]
    fn tessellation_partitions_the_sphere() {
        let mut rng = ChaCha12Rng::seed_from_u64(54);
        for k in [1usize, 2, 3, 5, 7] {
            let normals: Vec<UnitVec> = (0..k).map(|_| sample_uniform(&mut rng, 2)).collect();
            let t = tessellation_cells(&normals, 1).unwrap();
            let total: f64 = t.cells.iter().map(|c| cell_area_s2(c).unwrap()).sum();
            assert!((total - 4.0 * PI).abs() < 1e-8, "k={k}: total {total}");
            // disjoint interiors: a uniform point lands in exactly one cell
            for _ in 0..200 {
                let y = sample_uniform(&mut rng, 2);
                let inside = t
                    .cells
                    .iter()
                    .filter(|c| c.min_slack(&y) > 1e-9)
                    .count();
                assert!(inside <= 1);
            }
        }
    }

    #[test]
    fn degenerate_configuration_is_reported() {
        let n = UnitVec::new(vec![0.3, -0.4, 0.86]).unwrap();
        let out = tessellation_cells(&[n.clone(), n], 0);
        assert!(matches!(out, Err(SphError::Degenerate(_))));
    }

    #[test]
    fn typical_cell_recentres_to_origin() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let normals: Vec<UnitVec> = (0..6).map(|_| sample_uniform(&mut rng, 2)).collect();
        let t = tessellation_cells(&normals, 2).unwrap();
        let o = UnitVec::origin(2);
        for _ in 0..20 {
            let cell = typical_cell(&t, &mut rng).unwrap();
            let scan = vertices(&cell).unwrap().polytope;
            if scan.vertices().len() >= 3 && scan.is_proper() {
                let c = scan.circumcenter().unwrap();
                assert!(
                    c.chord_distance(&o) < 1e-8,
                    "recentred circumcentre off origin by {}",
                    c.chord_distance(&o)
                );
            }
        }
    }

    #[test]
    fn voronoi_cell_cases() {
        let d = 2;
        let o = UnitVec::origin(d);
        // singleton: whole sphere
        assert!(voronoi_cell(&o, std::slice::from_ref(&o)).unwrap().is_whole_sphere());
        // antipodal pair: hemispheres
        let cell = voronoi_cell(&o, &[o.clone(), o.neg()]).unwrap();
        assert_eq!(cell.normals().len(), 1);
        assert!(cell.contains(&o));
        assert!(!cell.contains(&UnitVec::new(vec![-1.0, 0.2, 0.0]).unwrap()));
        // membership means closest nucleus
        let mut rng = ChaCha12Rng::seed_from_u64(56);
        let pts: Vec<UnitVec> = (0..8).map(|_| sample_uniform(&mut rng, d)).collect();
        let cell = voronoi_cell(&pts[0], &pts).unwrap();
        for _ in 0..500 {
            let y = sample_uniform(&mut rng, d);
            if cell.contains(&y) {
                let d0 = geodesic_distance(&y, &pts[0]).unwrap();
                for z in &pts[1..] {
                    assert!(d0 <= geodesic_distance(&y, z).unwrap() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn voronoi_tetrahedron_symmetry() {
        let s = 1.0 / 3.0f64;
        let pts = vec![
            UnitVec::new(vec![1.0, 1.0, 1.0]).unwrap(),
            UnitVec::new(vec![1.0, -1.0, -1.0]).unwrap(),
            UnitVec::new(vec![-1.0, 1.0, -1.0]).unwrap(),
            UnitVec::new(vec![-1.0, -1.0, 1.0]).unwrap(),
        ];
        let t = voronoi_tessellation(&pts, 2).unwrap();
        let mut total = 0.0;
        for c in &t.cells {
            let area = cell_area_s2(c).unwrap();
            assert!((area - PI).abs() < 1e-9, "tetrahedral cell area {area}");
            total += area;
        }
        assert!((total - 4.0 * PI).abs() < 1e-9);
        let _ = s;
    }

    #[test]
    fn voronoi_rotation_equivariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(57);
        let pts: Vec<UnitVec> = (0..6).map(|_| sample_uniform(&mut rng, 2)).collect();
        let rot = rotation_to(&sample_uniform(&mut rng, 2), &mut rng);
        let rotated: Vec<UnitVec> = pts.iter().map(|p| rot.apply(p)).collect();
        let a = voronoi_cell(&pts[0], &pts).unwrap();
        let b = voronoi_cell(&rotated[0], &rotated).unwrap();
        for (na, nb) in a.normals().iter().zip(b.normals()) {
            assert!(rot.apply(na).chord_distance(nb) < 1e-12);
        }
    }

    #[test]
    fn slivnyak_bisector_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(58);
        for _ in 0..200 {
            let pts = sample_poisson(1.0, 2, &mut rng).unwrap();
            let v = voronoi_typical_cell(&pts, 2).unwrap();
            let b = bisector_crofton_cell(&pts, 2).unwrap();
            assert_eq!(v.normals().len(), b.normals().len());
            for (nv, nb) in v.normals().iter().zip(b.normals()) {
                assert!(nv.chord_distance(nb) < 1e-10);
            }
        }
        // empty configuration: whole sphere by both constructions
        assert!(voronoi_typical_cell(&[], 2).unwrap().is_whole_sphere());
        assert!(bisector_crofton_cell(&[], 2).unwrap().is_whole_sphere());
    }
}
