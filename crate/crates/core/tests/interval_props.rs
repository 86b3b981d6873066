use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use setmem::sim::SimRng;
use setmem::{tightest_image, Intersection, IntervalVector};

fn boxes(dim: usize) -> impl Strategy<Value = IntervalVector> {
    (
        prop::collection::vec(-10.0..10.0f64, dim),
        prop::collection::vec(0.0..5.0f64, dim),
    )
        .prop_map(|(c, r)| {
            IntervalVector::from_center_radius(&DVector::from_vec(c), &DVector::from_vec(r)).unwrap()
        })
}

fn image_case() -> impl Strategy<Value = (DMatrix<f64>, IntervalVector)> {
    (1usize..=4, 1usize..=12).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(-3.0..3.0f64, rows * cols)
                .prop_map(move |v| DMatrix::from_vec(rows, cols, v)),
            boxes(cols),
        )
    })
}

/// Componentwise min / max of `M z` over every vertex of `z`.
fn enumerate_image(m: &DMatrix<f64>, z: &IntervalVector) -> (DVector<f64>, DVector<f64>) {
    let d = z.dim();
    let mut lo = DVector::from_element(m.nrows(), f64::INFINITY);
    let mut hi = DVector::from_element(m.nrows(), f64::NEG_INFINITY);
    for mask in 0u32..(1 << d) {
        let v = DVector::from_fn(d, |j, _| if mask >> j & 1 == 1 { z.upper()[j] } else { z.lower()[j] });
        let img = m * v;
        lo = lo.zip_map(&img, f64::min);
        hi = hi.zip_map(&img, f64::max);
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn image_equals_vertex_hull((m, z) in image_case()) {
        let img = tightest_image(&m, &z).unwrap();
        let (lo, hi) = enumerate_image(&m, &z);
        let scale = 1.0 + m.abs().sum() * 15.0;
        prop_assert!((img.lower() - &lo).amax() <= 1e-12 * scale);
        prop_assert!((img.upper() - &hi).amax() <= 1e-12 * scale);
    }

    #[test]
    fn image_contains_sampled_points((m, z) in image_case(), seed in any::<u64>()) {
        let img = tightest_image(&m, &z).unwrap();
        let mut rng = SimRng::new(seed);
        for _ in 0..1000 {
            let p = DVector::from_fn(z.dim(), |j, _| rng.uniform_in(z.lower()[j], z.upper()[j]));
            prop_assert!(img.contains(&(&m * p), 1e-9).unwrap());
        }
    }

    #[test]
    fn center_radius_round_trip(b in boxes(5)) {
        let back = IntervalVector::from_center_radius(&b.center(), &b.radius()).unwrap();
        let tol = 4.0 * f64::EPSILON * (1.0 + b.lower().amax().max(b.upper().amax()));
        prop_assert!((back.lower() - b.lower()).amax() <= tol);
        prop_assert!((back.upper() - b.upper()).amax() <= tol);
        prop_assert!(b.radius().iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn intersection_algebra(a in boxes(3), b in boxes(3)) {
        prop_assert_eq!(a.intersect(&a).unwrap(), Intersection::Consistent(a.clone()));
        let ab = a.intersect(&b).unwrap();
        let ba = b.intersect(&a).unwrap();
        prop_assert_eq!(&ab, &ba);
        match ab {
            Intersection::Consistent(c) => {
                prop_assert!(c.is_subset_of(&a, 0.0).unwrap());
                prop_assert!(c.is_subset_of(&b, 0.0).unwrap());
            }
            Intersection::Empty { components } => {
                prop_assert!(!components.is_empty());
                for i in components {
                    prop_assert!(a.upper()[i] < b.lower()[i] || b.upper()[i] < a.lower()[i]);
                }
            }
        }
    }

    #[test]
    fn translation_adds_bounds(a in boxes(4), d in boxes(4)) {
        let t = a.translate(&d).unwrap();
        prop_assert_eq!(t.lower(), &(a.lower() + d.lower()));
        prop_assert_eq!(t.upper(), &(a.upper() + d.upper()));
        let zero = IntervalVector::point(DVector::zeros(4));
        prop_assert_eq!(a.translate(&zero).unwrap(), a);
    }
}

#[test]
fn worked_images() {
    let z = IntervalVector::from_bounds(DVector::from_vec(vec![-1.0, 0.0]), DVector::from_vec(vec![1.0, 2.0])).unwrap();
    assert_eq!(tightest_image(&DMatrix::identity(2, 2), &z).unwrap(), z);
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
    let img = tightest_image(&m, &z).unwrap();
    assert_eq!((img.lower().as_slice(), img.upper().as_slice()), (&[-2.0, -6.0][..], &[2.0, 0.0][..]));
    let (lo, hi) = enumerate_image(&m, &z);
    assert_eq!((&lo, &hi), (img.lower(), img.upper()));

    let sq = IntervalVector::symmetric(2, 1.0).unwrap();
    let row = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
    let img = tightest_image(&row, &sq).unwrap();
    assert_eq!((img.center()[0], img.radius()[0]), (0.0, 2.0));
    assert!(tightest_image(&DMatrix::identity(3, 3), &z).is_err());
}
