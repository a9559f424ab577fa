use proptest::prelude::*;

use pcbfeat::color::{extract_color_features, ColorFeatureSpec};
use pcbfeat::imaging::{build_region_grid, label_regions};
use pcbfeat::selection::FeatureMatrix;
use pcbfeat::{ImageRaster, SemanticMask};

fn mask_strategy() -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
    (4usize..40, 4usize..40).prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(0u8..=1, w * h)))
}

/// Decile closest to `10 c / a`, halves going up, by exact integer comparison.
fn nearest_decile(count: usize, area: usize) -> u8 {
    (0..=10u8)
        .min_by_key(|&d| {
            let diff = (10 * count) as i64 - (d as usize * area) as i64;
            (diff.abs(), std::cmp::Reverse(d))
        })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tiling_and_labels((w, h, data) in mask_strategy(), k in 1usize..12) {
        let mask = SemanticMask::from_raw(w, h, &data).unwrap();
        match build_region_grid(w, h, k) {
            Err(_) => prop_assert!(k > w || k > h),
            Ok(grid) => {
                prop_assert_eq!(grid.len(), (w / k) * (h / k));
                let labels = label_regions(&grid, &mask).unwrap();
                for (label, &(x0, y0)) in labels.iter().zip(&grid.regions) {
                    let count = (y0..y0 + k)
                        .flat_map(|y| (x0..x0 + k).map(move |x| (x, y)))
                        .filter(|&(x, y)| data[y * w + x] != 0)
                        .count();
                    prop_assert_eq!(label.decile, nearest_decile(count, k * k));
                }
            }
        }
    }

    #[test]
    fn flat_regions_have_equal_mean_and_median(r in any::<u8>(), g in any::<u8>(), b in any::<u8>(), k in 2usize..9) {
        let img = ImageRaster::new(18, 18, 3, [r, g, b].repeat(18 * 18)).unwrap();
        let grid = build_region_grid(18, 18, k).unwrap();
        let slice = extract_color_features(&img, &grid, &ColorFeatureSpec::default()).unwrap();
        prop_assert_eq!(slice.n_features(), 78);
        for row in slice.rows() {
            prop_assert_eq!(row, &slice.rows()[0]);
            for pair in row.chunks(2) {
                prop_assert!((pair[0] - pair[1]).abs() <= 1e-6 * (1.0 + pair[0].abs()), "{:?}", pair);
            }
        }
    }

    #[test]
    fn feature_csv_round_trips_exactly(
        rows in proptest::collection::vec(proptest::collection::vec(-1e12f64..1e12, 3), 1..20),
        seed in any::<u64>(),
    ) {
        let labels: Vec<u8> = (0..rows.len()).map(|i| ((seed >> (i % 60)) % 11) as u8).collect();
        let names = vec!["a".to_string(), "b_1".into(), "LAB_1_mean".into()];
        let m = FeatureMatrix::new(names, rows, labels, "img", 10).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMatrix::read_csv(buf.as_slice(), "img", 10).unwrap();
        prop_assert_eq!(back, m);
    }
}
