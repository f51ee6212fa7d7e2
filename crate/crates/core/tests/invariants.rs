use proptest::prelude::*;
use std::collections::HashSet;
use surfest::configcount::{
    count_configurations, count_configurations_naive, count_runs, decode_config, ConfigHistogram,
    Symmetry,
};
use surfest::estimator::{estimate_value, WeightTable};
use surfest::experiments::{sweep_values, CurvePoint, ShiftSampler};
use surfest::geometry::Solid;
use surfest::lattice::{digitize, digitize_runs, LatticeImage};

fn random_image(dims: Vec<usize>, margin: usize, bits: &[bool]) -> LatticeImage {
    let dims2 = dims.clone();
    LatticeImage::from_fn(dims, margin, |z| {
        if z.iter()
            .zip(&dims2)
            .any(|(&zk, &nk)| zk < margin || zk + margin >= nk)
        {
            return false;
        }
        let mut idx = 0;
        for k in (0..z.len()).rev() {
            idx = idx * dims2[k] + z[k];
        }
        bits[idx % bits.len()]
    })
    .unwrap()
}

fn image_strategy(d: usize, n: usize) -> impl Strategy<Value = LatticeImage> {
    let margin = n - 1;
    let side = margin * 2 + 1..margin * 2 + if d == 2 { 80 } else { 14 };
    (
        proptest::collection::vec(side, d),
        proptest::collection::vec(any::<bool>(), 1..300),
    )
        .prop_map(move |(dims, bits)| random_image(dims, margin, &bits))
}

fn unit_box(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        proptest::collection::vec(-1.0..1.0f64, d),
        proptest::collection::vec(0.2..2.0f64, d),
    )
}

fn black_set(img: &LatticeImage) -> HashSet<Vec<i64>> {
    img.black_indices().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_counter_matches_naive_2d(img in image_strategy(2, 2)) {
        prop_assert_eq!(count_configurations(&img, 2).unwrap(), count_configurations_naive(&img, 2).unwrap());
    }

    #[test]
    fn fast_counter_matches_naive_2d_n3(img in image_strategy(2, 3)) {
        prop_assert_eq!(count_configurations(&img, 3).unwrap(), count_configurations_naive(&img, 3).unwrap());
    }

    #[test]
    fn fast_counter_matches_naive_3d(img in image_strategy(3, 2)) {
        prop_assert_eq!(count_configurations(&img, 2).unwrap(), count_configurations_naive(&img, 2).unwrap());
    }

    #[test]
    fn every_black_pixel_is_seen_by_every_window_position(img in image_strategy(2, 3)) {
        let hist = count_configurations(&img, 3).unwrap();
        let seen: u64 = hist.nonzero().iter().map(|&(j, c)| c * j.count_ones() as u64).sum();
        prop_assert_eq!(seen, 9 * img.black_count());
    }

    #[test]
    fn histogram_follows_lattice_symmetries(img in image_strategy(2, 2), which in 0usize..8) {
        let sym = &Symmetry::all(2)[which];
        let dims = img.dims().to_vec();
        let black: HashSet<Vec<usize>> = {
            let mut s = HashSet::new();
            for z0 in 0..dims[0] {
                for z1 in 0..dims[1] {
                    if img.get(&[z0 as i64, z1 as i64]) {
                        s.insert(sym.map_index(&[z0, z1], &dims));
                    }
                }
            }
            s
        };
        let new_dims: Vec<usize> = sym.perm.iter().map(|&src| dims[src]).collect();
        let mapped = LatticeImage::from_fn(new_dims, img.margin(), |z| black.contains(z)).unwrap();
        let expected = count_configurations(&img, 2).unwrap().mapped(sym);
        prop_assert_eq!(count_configurations(&mapped, 2).unwrap(), expected);
    }

    #[test]
    fn lattice_translation_preserves_histogram(
        (min, sides) in unit_box(2),
        z in proptest::collection::vec(-5i64..5, 2),
        s in proptest::collection::vec(0.0..1.0f64, 2),
    ) {
        let t = 0.125;
        let a = Solid::axis_box(min.clone(), sides.clone()).unwrap();
        let moved: Vec<f64> = min.iter().zip(&z).map(|(m, &k)| m + t * k as f64).collect();
        let b = Solid::axis_box(moved, sides).unwrap();
        let ha = count_configurations(&digitize(&a, t, &s, 1).unwrap(), 2).unwrap();
        let hb = count_configurations(&digitize(&b, t, &s, 1).unwrap(), 2).unwrap();
        prop_assert_eq!(ha, hb);
    }

    #[test]
    fn dyadic_scaling_preserves_image(r in 0.3..1.5f64, s in proptest::collection::vec(0.0..1.0f64, 3), t in 0.05..0.3f64) {
        let ball = Solid::ball(vec![0.1, -0.2, 0.05], r).unwrap();
        let big = ball.scaled(4.0).unwrap();
        let a = digitize(&ball, t, &s, 1).unwrap();
        let b = digitize(&big, 4.0 * t, &s, 1).unwrap();
        prop_assert_eq!(black_set(&a), black_set(&b));
    }

    #[test]
    fn digitization_is_monotone((min, sides) in unit_box(3), grow in proptest::collection::vec(0.0..0.3f64, 3),
                                s in proptest::collection::vec(0.0..1.0f64, 3)) {
        let inner = Solid::axis_box(min.clone(), sides.clone()).unwrap();
        let outer_min: Vec<f64> = min.iter().zip(&grow).map(|(m, g)| m - g).collect();
        let outer_sides: Vec<f64> = sides.iter().zip(&grow).map(|(x, g)| x + 2.0 * g).collect();
        let outer = Solid::axis_box(outer_min, outer_sides).unwrap();
        let a = black_set(&digitize(&inner, 0.1, &s, 1).unwrap());
        let b = black_set(&digitize(&outer, 0.1, &s, 1).unwrap());
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn estimator_is_linear_in_weights(img in image_strategy(2, 2), w1 in proptest::collection::vec(-2.0..2.0f64, 14),
                                      w2 in proptest::collection::vec(-2.0..2.0f64, 14), c in -3.0..3.0f64) {
        let hist = count_configurations(&img, 2).unwrap();
        let table = |w: &[f64]| WeightTable::from_pairs(2, 2, (1u64..15).zip(w.iter().copied())).unwrap();
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = w1.iter().map(|a| c * a).collect();
        let e = |w: &[f64]| estimate_value(&hist, &table(w), 0.1).unwrap();
        let tol = 1e-9 * (1.0 + hist.total() as f64);
        prop_assert!((e(&sum) - e(&w1) - e(&w2)).abs() <= tol);
        prop_assert!((e(&scaled) - c * e(&w1)).abs() <= tol * (1.0 + c.abs()));
    }

    #[test]
    fn variance_within_range_bound(values in proptest::collection::vec(-1e3..1e3f64, 1..200)) {
        let p = CurvePoint::from_values(0.1, &values);
        prop_assert!(p.range_bound_holds);
        prop_assert!(p.inf <= p.mean && p.mean <= p.sup);
        prop_assert!(p.variance <= (p.sup - p.inf).powi(2) / 4.0 * (1.0 + 1e-12));
    }

    #[test]
    fn histogram_csv_round_trip(img in image_strategy(3, 2)) {
        let hist = count_configurations(&img, 2).unwrap();
        prop_assert_eq!(ConfigHistogram::from_csv(&hist.to_csv(), 2, 3).unwrap(), hist);
    }
}

#[test]
fn grid_range_widens_on_refinement() {
    let ball = Solid::ball(vec![0.0, 0.0], 1.0).unwrap();
    let w = WeightTable::default_for(2, 2).unwrap();
    let mut last = -1.0;
    for m in [1, 3, 9] {
        let v = sweep_values(&ball, 0.07, &w, &ShiftSampler::Grid { m }).unwrap();
        let range = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - v.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(range >= last, "m={m}: {range} < {last}");
        last = range;
    }
    assert!(last > 0.0);
}

#[test]
fn decoded_codes_have_matching_popcount() {
    for code in 0..(1u64 << 8) {
        assert_eq!(decode_config(code, 2, 3).len(), code.count_ones() as usize);
    }
}

fn interval_solid() -> impl Strategy<Value = Solid> {
    prop_oneof![
        (proptest::collection::vec(-0.5..0.5f64, 2), 0.2..1.0f64)
            .prop_map(|(c, r)| Solid::ball(c, r).unwrap()),
        (proptest::collection::vec(-0.5..0.5f64, 3), 0.2..1.0f64)
            .prop_map(|(c, r)| Solid::ball(c, r).unwrap()),
        unit_box(2).prop_map(|(m, s)| Solid::axis_box(m, s).unwrap()),
        unit_box(3).prop_map(|(m, s)| Solid::axis_box(m, s).unwrap()),
        (2u32..5).prop_map(|k| Solid::cusp(k).unwrap()),
        Just(Solid::parallelepiped()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_counter_matches_bitmap_counter(solid in interval_solid(), n in 1usize..4, t in 0.04..0.3f64,
                                          s in proptest::collection::vec(0.0..1.0f64, 3)) {
        let d = solid.dim();
        let s = &s[..d];
        let runs = digitize_runs(&solid, t, s, n.max(2) - 1).unwrap().expect("interval rows");
        let img = digitize(&solid, t, s, n.max(2) - 1).unwrap();
        prop_assert_eq!(count_runs(&runs, n).unwrap(), count_configurations(&img, n).unwrap());
    }
}
