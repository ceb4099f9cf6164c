use std::sync::Arc;

use conetime::cone::{ConeSpec, Vec3};
use conetime::convex::BoundaryData;
use conetime::deform::bending::{dual_projective_action, normalize_projective};
use conetime::deform::domain::affine_trace;
use conetime::deform::{
    act_on_support, bend_translation, bulge, estimate_boundary_function, genus_two, limit_set_samples,
    maximal_domain, orbit_points, projective_embed, AffineMap, Cocycle, GroupRep, Mat3,
};
use conetime::{GridDomain, GridFunction, Shape, Vec2};
use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 200_000;

fn boost(t: f64) -> Mat3 {
    let (c, s) = (t.cosh(), t.sinh());
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c)
}

fn fixture() -> Arc<GroupRep> {
    Arc::new(genus_two().rep)
}

fn dual(n: usize) -> Arc<GridDomain> {
    Arc::new(GridDomain::new(Shape::unit_disk(), n).unwrap())
}

#[test]
fn extension_of_cocycles() {
    let rep = fixture();
    let bent = bend_translation(rep.clone(), &genus_two().splitting, 0.3).unwrap();
    assert_eq!(bent.extend(&[]), Vec3::zeros());
    assert!(bent.extend(&rep.parse_word("cC").unwrap()).norm() < 1e-12);
    assert!(bent.extend(&rep.parse_word("Dd").unwrap()).norm() < 1e-12);

    let v = Vec3::new(0.2, -0.4, 1.1);
    let cob = Cocycle::coboundary(rep.clone(), &v);
    for word in ["a", "bC", "abAd", "dcBAcd"] {
        let w = rep.parse_word(word).unwrap();
        let expected = v - rep.word_matrix(&w) * v;
        assert!((cob.extend(&w) - expected).norm() <= 1e-9 * (1.0 + expected.norm()), "{word}");
    }
}

#[test]
fn coboundaries() {
    let rep = fixture();
    let zero = Cocycle::coboundary(rep.clone(), &Vec3::zeros());
    assert!(zero.values().iter().all(|t| *t == Vec3::zeros()));

    let b = boost(0.7);
    let rep = Arc::new(GroupRep::new(vec!["e".into(), "g".into()], vec![Mat3::identity(), b], &[]).unwrap());
    let v = Vec3::new(0.0, 0.0, 1.0);
    let c = Cocycle::coboundary(rep, &v);
    assert_eq!(c.values()[0], Vec3::zeros());
    let expected = v - b * v;
    assert!((c.values()[1] - expected).norm() < 1e-15);
    assert!((c.values()[1] - Vec3::new(-0.7_f64.sinh(), 0.0, 1.0 - 0.7_f64.cosh())).norm() < 1e-15);
}

#[test]
fn actions_on_support_functions() {
    let d = dual(65);
    let s = GridFunction::from_fn(d.clone(), |y| 0.2 * y.norm_squared() - 0.1 * y.y + 0.3).unwrap();
    let same = act_on_support(&s, &AffineMap::identity()).unwrap();
    for (a, b) in s.values().iter().zip(same.values()) {
        assert!((a - b).abs() < 1e-14);
    }

    let w = Vec3::new(0.3, 0.1, -0.2);
    let moved = act_on_support(&s, &AffineMap { linear: Mat3::identity(), translation: w }).unwrap();
    for (k, y) in d.nodes().iter().enumerate() {
        assert!((moved.value(k) - s.value(k) - affine_trace(&w, y)).abs() < 1e-14);
    }

    // the Minkowski gauge is invariant under boosts away from the boundary layer
    let gauge = GridFunction::from_fn(d.clone(), |y| -(1.0 - y.norm_squared()).max(0.0).sqrt()).unwrap();
    let boosted = act_on_support(&gauge, &AffineMap { linear: boost(0.4), translation: Vec3::zeros() }).unwrap();
    let h = d.spacing();
    for (k, y) in d.nodes().iter().enumerate() {
        if y.norm() < 0.6 {
            assert!((boosted.value(k) - gauge.value(k)).abs() <= 2.0 * h * h, "{y:?}");
        }
    }
}

#[test]
fn orbits() {
    let rep = fixture();
    let bent = bend_translation(rep.clone(), &genus_two().splitting, 0.2).unwrap();
    let x0 = Vec3::new(0.1, 0.0, 1.0);
    assert_eq!(orbit_points(&bent, &x0, 0, CAP).unwrap().points, vec![x0]);

    let zero = Cocycle::zero(rep.clone());
    for l in 0..4 {
        assert_eq!(orbit_points(&zero, &Vec3::zeros(), l, CAP).unwrap().points, vec![Vec3::zeros()]);
    }

    let v = Vec3::new(0.3, -0.2, 0.8);
    let cob = Cocycle::coboundary(rep, &v);
    let orbit = orbit_points(&cob, &v, 4, CAP).unwrap();
    assert_eq!(orbit.points.len(), 1);
    assert!((orbit.points[0] - v).norm() < 1e-15);
}

#[test]
fn boundary_functions_from_orbits() {
    let d = dual(33);
    let rep = fixture();
    let x0 = Vec3::new(0.2, 0.1, 0.7);
    let single = orbit_points(&Cocycle::zero(rep.clone()), &x0, 0, CAP).unwrap();
    let est = estimate_boundary_function(&single, &d).unwrap();
    for (b, g) in est.g.points.iter().zip(&est.g.values) {
        assert!((g - affine_trace(&x0, b)).abs() < 1e-14);
    }

    let origin = orbit_points(&Cocycle::zero(rep.clone()), &Vec3::zeros(), 3, CAP).unwrap();
    let est = estimate_boundary_function(&origin, &d).unwrap();
    assert!(est.g.values.iter().all(|v| *v == 0.0));
    let md = maximal_domain(d.clone(), &est.g).unwrap();
    assert!(md.s_minus.values().iter().chain(md.s_plus.values()).all(|v| v.abs() < 1e-12));

    let v = Vec3::new(-0.1, 0.25, 0.6);
    let orbit = orbit_points(&Cocycle::coboundary(rep, &v), &v, 3, CAP).unwrap();
    let est = estimate_boundary_function(&orbit, &d).unwrap();
    for (b, g) in est.g.points.iter().zip(&est.g.values) {
        assert!((g - affine_trace(&v, b)).abs() < 1e-12);
    }
    let md = maximal_domain(d.clone(), &est.g).unwrap();
    for (k, y) in d.nodes().iter().enumerate() {
        assert!((md.s_minus.value(k) - affine_trace(&v, y)).abs() < 1e-9);
        assert!((md.s_plus.value(k) - affine_trace(&v, y)).abs() < 1e-9);
    }
    assert!(md.halfspaces.contains(&(v + Vec3::new(0.0, 0.0, 0.5))));
    assert!(!md.halfspaces.contains(&(v - Vec3::new(0.0, 0.0, 0.5))));
}

#[test]
fn bent_cocycle_has_a_thick_convex_core() {
    let d = dual(33);
    let rep = fixture();
    let bent = bend_translation(rep, &genus_two().splitting, 0.2).unwrap();
    let orbit = orbit_points(&bent, &Vec3::new(0.0, 0.0, 1.0), 6, CAP).unwrap();
    let est = estimate_boundary_function(&orbit, &d).unwrap();
    let md = maximal_domain(d, &est.g).unwrap();
    assert!(md.min_gap() >= -1e-9);
    assert!(md.max_gap() > 1e-3, "gap {}", md.max_gap());
}

#[test]
fn bulging() {
    let g = genus_two();
    let same = bulge(&g.rep, &g.splitting, 0.0).unwrap();
    for (a, b) in same.generators().iter().zip(g.rep.generators()) {
        assert!((a - b).abs().max() < 1e-15);
    }

    let a = g.splitting.bulge_matrix(1.0);
    assert!((a.determinant() - 1.0).abs() < 1e-12);
    // e^-2 on the fixed vector, e on the invariant complement
    let (x, l) = (g.splitting.x, g.splitting.complement.unwrap());
    let e = 1f64.exp();
    assert!((a * x - x * e.powi(-2)).norm() < 1e-12);
    for v in [Vec3::new(l.y, -l.x, 0.0), Vec3::new(l.z, 0.0, -l.x)] {
        assert!(l.dot(&v).abs() < 1e-15);
        assert!((a * v - v * e).norm() < 1e-12 * (1.0 + v.norm()));
    }

    let ainv = a.try_inverse().unwrap();
    for w in &g.splitting.lambda {
        let lam = g.rep.word_matrix(w);
        assert!((a * lam * ainv - lam).abs().max() < 1e-9);
    }
    let bulged = bulge(&g.rep, &g.splitting, 0.3).unwrap();
    for m in bulged.generators() {
        assert!((m.determinant() - 1.0).abs() < 1e-9);
    }
    // only the deformed side moves
    for &k in &g.splitting.gens_a {
        assert_eq!(bulged.generators()[k], g.rep.generators()[k]);
    }
    for &k in &g.splitting.gens_b {
        assert!((bulged.generators()[k] - g.rep.generators()[k]).abs().max() > 1e-3);
    }
    assert!(g.rep.preserves_cone(&ConeSpec::minkowski(33).unwrap(), 64, 1e-9));
}

#[test]
fn bending_translations() {
    let g = genus_two();
    let rep = Arc::new(g.rep.clone());
    let flat = bend_translation(rep.clone(), &g.splitting, 0.0).unwrap();
    assert!(flat.values().iter().all(|t| *t == Vec3::zeros()));

    let s = 0.4;
    let bent = bend_translation(rep.clone(), &g.splitting, s).unwrap();
    for w in &g.splitting.lambda {
        assert!(bent.extend(w).norm() < 1e-9);
    }
    let x = g.splitting.x;
    for &k in &g.splitting.gens_b {
        let gx = rep.generators()[k] * x;
        let expected = s * (x - gx);
        assert!((bent.values()[k] - expected).norm() < 1e-15);
        assert!(expected.norm() > 1e-3);
    }
    for &k in &g.splitting.gens_a {
        assert_eq!(bent.values()[k], Vec3::zeros());
    }
}

#[test]
fn projective_embeddings() {
    assert_eq!(projective_embed(&Mat3::identity(), &Vec3::zeros()), nalgebra::Matrix4::identity());
    let t = Vec3::new(1.0, -2.0, 0.5);
    let m = projective_embed(&Mat3::identity(), &t);
    for i in 0..4 {
        assert_eq!(m[(i, i)], 1.0);
    }
    assert_eq!(m.fixed_view::<3, 1>(0, 3).into_owned(), t);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut random_map = || AffineMap {
        linear: Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
        translation: Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    };
    for _ in 0..100 {
        let (f, g) = (random_map(), random_map());
        let fg = f.compose(&g);
        let lhs = projective_embed(&fg.linear, &fg.translation);
        let rhs = projective_embed(&f.linear, &f.translation) * projective_embed(&g.linear, &g.translation);
        assert!((lhs - rhs).abs().max() <= 1e-12 * (1.0 + rhs.abs().max()));
    }
}

#[test]
fn limit_sets() {
    let d = dual(33);
    let zero = BoundaryData::sample(&d, |_| 0.0);
    let ls = limit_set_samples(&zero);
    for (p, b) in ls.points.iter().zip(&zero.points) {
        let q = normalize_projective(&Vector4::new(b.x, b.y, -1.0, 0.0));
        assert!((Vector4::from(*p) - q).norm() < 1e-15);
        assert_eq!(p[3], 0.0);
    }

    // the coboundary limit set is the translate of the zero one
    let v = Vec3::new(0.3, -0.1, 0.9);
    let shifted = BoundaryData::sample(&d, |b| affine_trace(&v, b));
    let act = dual_projective_action(&Mat3::identity(), &v).unwrap();
    for (p, q) in limit_set_samples(&zero).points.iter().zip(&limit_set_samples(&shifted).points) {
        let image = normalize_projective(&(act * Vector4::from(*p)));
        assert!((image - Vector4::from(*q)).norm() < 1e-12);
    }

    // group elements map the coboundary limit set into itself
    let rep = fixture();
    let cob = Cocycle::coboundary(rep.clone(), &v);
    for word in ["a", "Bc", "dA"] {
        let m = cob.word_map(&rep.parse_word(word).unwrap());
        let act = dual_projective_action(&m.linear, &m.translation).unwrap();
        // rounding grows with the size of the matrix entries
        let tol = 1e-12 * act.norm().powi(2);
        for p in &limit_set_samples(&shifted).points {
            let z = act * Vector4::from(*p);
            // back in the chart (y : -1 : -g)
            let z = z / -z[2];
            let y = Vec2::new(z[0], z[1]);
            assert!((y.norm() - 1.0).abs() < tol, "{word}");
            let err = (-z[3] - affine_trace(&v, &y)).abs();
            assert!(err < tol, "{word}: {err}");
        }
    }
}
