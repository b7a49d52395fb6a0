mod common;

use common::{blob, disc_mask, star_mask, winding_number};
use proptest::prelude::*;
use shapefilter::geometry::Vec2;
use shapefilter::ingest::{canonical_seed, resample_contour, trace_boundary};
use shapefilter::metrics::{dice, rasterize};
use shapefilter::{Mask, MaskStack};

fn harmonics() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 0..4)
}

fn single(m: Mask) -> MaskStack {
    MaskStack::new(vec![m]).unwrap()
}

fn enclosed_fraction(mask: &Mask) -> f64 {
    let comp = mask.largest_component().unwrap();
    let poly = trace_boundary(mask).unwrap();
    let (mut inside, mut total) = (0usize, 0usize);
    for y in 0..comp.height() {
        for x in 0..comp.width() {
            if !comp.get(x, y) {
                continue;
            }
            total += 1;
            match winding_number(poly.points(), Vec2::new(x as f64, y as f64), 1e-9) {
                None => inside += 1,
                Some(w) if w != 0 => inside += 1,
                Some(_) => {}
            }
        }
    }
    inside as f64 / total as f64
}

#[test]
fn convex_blob_survives_trace_and_fill() {
    for (r, extra) in [(20.0, vec![]), (24.0, vec![(2.0, 0.0)]), (30.0, vec![(0.0, 3.0)])] {
        let m = star_mask(80, 80, 40.3, 39.6, r, &extra);
        let back = rasterize(&trace_boundary(&m).unwrap(), 80, 80);
        let d = dice(&single(m), &single(back)).unwrap();
        assert!(d > 0.95, "r={r}: dice {d}");
    }
}

#[test]
fn traced_chain_is_counterclockwise_in_the_shoelace_sense() {
    let c = trace_boundary(&disc_mask(30, 30, 14.0, 15.0, 8.0)).unwrap();
    assert!(c.signed_area() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_encloses_the_component(
        h in harmonics(),
        cx in 25.0f64..35.0,
        cy in 25.0f64..35.0,
        r in 6.0f64..14.0,
    ) {
        let m = star_mask(60, 60, cx, cy, r, &h);
        prop_assert!(enclosed_fraction(&m) >= 0.99);
    }

    #[test]
    fn resampling_is_idempotent(
        h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4),
        n in 8usize..200,
        raw in 40usize..400,
    ) {
        let c = blob(Vec2::new(3.0, -1.0), 8.0, &h, raw);
        let once = resample_contour(&c, n).unwrap();
        let twice = resample_contour(&once, n).unwrap();
        for (p, q) in once.points().iter().zip(twice.points()) {
            prop_assert!((*p - *q).norm() <= 1e-9);
        }
    }

    #[test]
    fn resampled_chords_are_equal(
        h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4),
        n in 8usize..200,
    ) {
        let c = resample_contour(&blob(Vec2::new(0.0, 0.0), 8.0, &h, 333), n).unwrap();
        let chords = c.chord_lengths();
        let mean = chords.iter().sum::<f64>() / n as f64;
        for l in chords {
            prop_assert!((l - mean).abs() <= 1e-9 * mean);
        }
    }

    #[test]
    fn reseeding_is_idempotent(
        h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4),
        shift in 0usize..100,
    ) {
        let c = resample_contour(&blob(Vec2::new(0.0, 0.0), 8.0, &h, 500), 100).unwrap().cyclic_shift(shift);
        let once = canonical_seed(&c);
        prop_assert_eq!(canonical_seed(&once), once);
    }

    #[test]
    fn seed_does_not_depend_on_starting_index(
        h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4),
        shift in 0usize..100,
    ) {
        let c = resample_contour(&blob(Vec2::new(0.0, 0.0), 8.0, &h, 500), 100).unwrap();
        prop_assert_eq!(canonical_seed(&c.cyclic_shift(shift)), canonical_seed(&c));
    }
}
