use limitlab::{busemann, hyp_distance, BoundaryPoint, InteriorPoint, Isometry};
use proptest::prelude::*;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// Ball-model distance `arccosh(1 + 2|u - v|^2 / ((1 - |u|^2)(1 - |v|^2)))`.
fn ball_distance(u: &[f64], v: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    (1.0 + 2.0 * norm2(&d) / ((1.0 - norm2(u)) * (1.0 - norm2(v)))).acosh()
}

/// `log` of the ball-model Poisson kernel ratio.
fn ball_busemann(u: &[f64], v: &[f64], xi: &[f64]) -> f64 {
    let p = |w: &[f64]| {
        let d: Vec<f64> = w.iter().zip(xi).map(|(a, b)| a - b).collect();
        (1.0 - norm2(w)) / norm2(&d)
    };
    (p(v) / p(u)).ln()
}

fn ball_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.0f64..1.0, n + 1), 0.0f64..0.9).prop_filter_map("nonzero", |(d, r)| {
        let len = norm2(&d).sqrt();
        (len > 1e-3).then(|| d.iter().map(|c| c / len * r).collect())
    })
}

fn sphere_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n + 1).prop_filter_map("nonzero", |d| {
        let len = norm2(&d).sqrt();
        (len > 1e-2).then(|| d.iter().map(|c| c / len).collect())
    })
}

fn isometry(n: usize) -> impl Strategy<Value = Isometry> {
    (0.0f64..6.3, -1.5f64..1.5, 0.0f64..6.3, -1.0f64..1.0).prop_map(move |(a, r, b, s)| {
        Isometry::rotation(n, 0, 1, a)
            .unwrap()
            .product(&Isometry::boost(n, n.min(1), r).unwrap())
            .product(&Isometry::rotation(n, n, 0, b).unwrap())
            .product(&Isometry::boost(n, 0, s).unwrap())
    })
}

proptest! {
    #[test]
    fn distance_matches_ball_model(u in ball_vec(2), v in ball_vec(2)) {
        let d = hyp_distance(&InteriorPoint::from_ball(&u).unwrap(), &InteriorPoint::from_ball(&v).unwrap()).unwrap();
        let oracle = ball_distance(&u, &v);
        prop_assert!((d - oracle).abs() < 1e-7 * (1.0 + oracle), "{d} vs {oracle}");
    }

    #[test]
    fn busemann_matches_poisson_ratio(u in ball_vec(3), v in ball_vec(3), xi in sphere_vec(3)) {
        let x = InteriorPoint::from_ball(&u).unwrap();
        let y = InteriorPoint::from_ball(&v).unwrap();
        let d = busemann(&x, &y, &BoundaryPoint::new(&xi).unwrap()).unwrap();
        prop_assert!((d - ball_busemann(&u, &v, &xi)).abs() < 1e-9);
    }

    #[test]
    fn isometries_preserve_distance_and_busemann(
        u in ball_vec(2), v in ball_vec(2), xi in sphere_vec(2), g in isometry(2)
    ) {
        let x = InteriorPoint::from_ball(&u).unwrap();
        let y = InteriorPoint::from_ball(&v).unwrap();
        let xi = BoundaryPoint::new(&xi).unwrap();
        let (gx, gy) = (g.apply(&x).unwrap(), g.apply(&y).unwrap());
        let d0 = hyp_distance(&x, &y).unwrap();
        prop_assert!((hyp_distance(&gx, &gy).unwrap() - d0).abs() < 1e-9 * (1.0 + d0));
        let b0 = busemann(&x, &y, &xi).unwrap();
        let b1 = busemann(&gx, &gy, &g.apply(&xi).unwrap()).unwrap();
        prop_assert!((b0 - b1).abs() < 1e-9);
    }

    #[test]
    fn busemann_is_a_limit_of_distance_differences(u in ball_vec(1), v in ball_vec(1), xi in sphere_vec(1)) {
        let x = InteriorPoint::from_ball(&u).unwrap();
        let y = InteriorPoint::from_ball(&v).unwrap();
        // Ball point at distance 18 from the center towards xi.
        let r = (18.0f64 / 2.0).tanh();
        let far: Vec<f64> = xi.iter().map(|c| c * r).collect();
        let oracle = ball_distance(&u, &far) - ball_distance(&v, &far);
        let d = busemann(&x, &y, &BoundaryPoint::new(&xi).unwrap()).unwrap();
        prop_assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
    }
}

#[test]
fn boundary_points_stay_on_the_sphere() {
    let g = Isometry::boost(2, 1, 2.0).unwrap().product(&Isometry::rotation(2, 0, 2, 0.3).unwrap());
    for k in 0..50 {
        let t = k as f64 * 0.37;
        let xi = BoundaryPoint::new(&[t.cos() * 0.6, t.sin() * 0.6, 0.8]).unwrap();
        let im = g.apply(&xi).unwrap();
        assert!((norm2(im.coords()) - 1.0).abs() < 1e-13);
    }
}
