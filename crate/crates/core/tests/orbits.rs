use nalgebra::DMatrix;

use limitlab::groups::{enumerate_ball, estimate_delta, limit_set_sample, box_dimension};
use limitlab::patterson_sullivan::ps_measure;
use limitlab::{GroupSpec, InteriorPoint, Word};

/// All reduced words over letters `0..2 * rank` up to `depth`, by brute force.
fn reduced_words(rank: u8, depth: usize) -> Vec<Vec<u8>> {
    let mut all = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..2 * rank {
                if w.last().map(|&p: &u8| p ^ 1) != Some(l) {
                    let mut v: Vec<u8> = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

fn ball_distance(u: &[f64], v: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    (1.0 + 2.0 * norm2(&d) / ((1.0 - norm2(u)) * (1.0 - norm2(v)))).acosh()
}

#[test]
fn ball_holds_every_reduced_word_once() {
    let g = GroupSpec::demo_schottky().build().unwrap();
    let ball = enumerate_ball(&g, 4, &InteriorPoint::origin(2)).unwrap();
    let brute = reduced_words(2, 4);
    assert_eq!(ball.len(), brute.len());
    for w in &brute {
        assert!(ball.contains(&Word::from_letters(w)), "{w:?} missing");
    }
}

#[test]
fn ball_elements_are_matrix_products() {
    let g = GroupSpec::demo_schottky().build().unwrap();
    let ball = enumerate_ball(&g, 3, &InteriorPoint::origin(2)).unwrap();
    let gens: Vec<DMatrix<f64>> = (0..4u8).map(|l| g.letter(l).matrix().clone()).collect();
    for (w, m) in ball.words().iter().zip(ball.elements()) {
        // Right action: the matrix of `w1 w2 ... wk` is `M_wk ... M_w1`.
        let mut acc = DMatrix::identity(4, 4);
        for &l in w.letters() {
            acc = &gens[l as usize] * acc;
        }
        assert!((&acc - m.matrix()).amax() < 1e-9 * acc.amax(), "{w}");
    }
}

#[test]
fn generator_inverses_cancel() {
    let g = GroupSpec::demo_schottky().build().unwrap();
    for l in 0..4u8 {
        let prod = g.letter(l).matrix() * g.letter(l ^ 1).matrix();
        assert!((prod - DMatrix::identity(4, 4)).amax() < 1e-12);
    }
}

#[test]
fn ps_weights_match_direct_sum() {
    let g = GroupSpec::demo_schottky().build().unwrap();
    let u0 = [0.1, 0.05, 0.0];
    let ux = [-0.2, 0.1, 0.3];
    let x0 = InteriorPoint::from_ball(&u0).unwrap();
    let x = InteriorPoint::from_ball(&ux).unwrap();
    let (s, depth) = (0.6, 3);
    let mu = ps_measure(&g, &x, &x0, s, depth, 0.41).unwrap();
    let images: Vec<Vec<f64>> =
        mu.words.iter().map(|w| g.element(w).unwrap().apply(&x0).unwrap().to_ball()).collect();
    let z: f64 = images.iter().map(|y| (-s * ball_distance(&u0, y)).exp()).sum();
    for ((y, w), a) in images.iter().zip(&mu.weights).zip(&mu.atoms) {
        let expected = (-s * ball_distance(&ux, y)).exp() / z;
        assert!((w - expected).abs() < 1e-12 * expected.max(1e-300) + 1e-15);
        let len = norm2(y).sqrt();
        for (c, yc) in a.coords().iter().zip(y) {
            assert!((c - yc / len).abs() < 1e-12);
        }
    }
    assert_eq!(mu.len(), reduced_words(2, depth).len());
}

#[test]
fn fuchsian_schottky_exponent_matches_box_dimension() {
    let g = GroupSpec::demo_fuchsian_schottky().build().unwrap();
    let delta = estimate_delta(&g, 11, &InteriorPoint::origin(1)).unwrap().value;
    let cloud = limit_set_sample(&g, 10, &InteriorPoint::origin(1)).unwrap();
    let scales: Vec<f64> = (0..6).map(|i| 0.1 / 2f64.powi(i)).collect();
    let bd = box_dimension(&cloud, &scales).unwrap();
    assert!((delta - bd).abs() < 0.1, "delta {delta}, box {bd}");
    assert!(delta > 0.3 && delta < 0.6);
}
