use sphertess::sphere::*;
use sphertess::convex::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for t in 0..50 {
        let d = rand::Rng::gen_range(&mut rng, 2..5);
        let x = sample_uniform(&mut rng, d);
        let tr = transporter(&x);
        let im = tr.apply(&UnitVec::origin(d));
        let dist = geodesic_distance(&im, &x).unwrap();
        if dist > 1e-10 {
            println!("trial {t} d={d}: transporter dist {dist:e} det {} orth {:e}", tr.det(), tr.orthogonality_defect());
        }
        let st = random_stabilizer_rotation(&mut rng, d);
        let fixed = st.apply(&UnitVec::origin(d));
        let dist2 = geodesic_distance(&fixed, &UnitVec::origin(d)).unwrap();
        if dist2 > 1e-12 { println!("trial {t} d={d}: stabilizer moved origin {dist2:e}"); }
        let r = rotation_to(&x, &mut rng);
        let dist3 = geodesic_distance(&r.apply(&UnitVec::origin(d)), &x).unwrap();
        if dist3 > 1e-10 { println!("trial {t} d={d}: rotation_to dist {dist3:e} orth {:e} det {}", r.orthogonality_defect(), r.det()); }
    }
    // vertex equivariance repro
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let o = UnitVec::origin(2);
    for t in 0..10 {
        let normals: Vec<UnitVec> = (0..6).map(|_| {
            let x = sample_uniform(&mut rng, 2);
            if x.dot(&o) >= 0.0 { x } else { x.neg() }
        }).collect();
        let p = HPolytope::new(2, normals, None).unwrap();
        let rot = rotation_to(&sample_uniform(&mut rng, 2), &mut rng);
        let rotated = HPolytope::new(2, p.normals().iter().map(|n| rot.apply(n)).collect(), None).unwrap();
        let v1: Vec<UnitVec> = vertices(&p).unwrap().polytope.vertices().iter().map(|v| rot.apply(v)).collect();
        let v2 = vertices(&rotated).unwrap();
        if v1.len() != v2.polytope.vertices().len() {
            println!("trial {t}: {} vs {} vertices (skipped {} / {})", v1.len(), v2.polytope.vertices().len(), vertices(&p).unwrap().skipped_subsets, v2.skipped_subsets);
            // raw scan without filter
        }
    }
}
