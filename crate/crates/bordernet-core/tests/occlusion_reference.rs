//! Occlusion masks against a closed-form diagonal-population count.
//!
//! The reference counts pixels per occluded diagonal instead of scanning the
//! grid, so the two implementations share no code path.

use bordernet_core::occlusion::{
    apply_occlusion, occlusion_grid, occlusion_mask, Direction, OcclusionSpec,
};
use bordernet_core::Tensor;
use bordernet_testkit::occref::occluded_count_by_diagonals;

fn mask_count(spec: &OcclusionSpec, h: usize, w: usize) -> usize {
    occlusion_mask(spec, h, w)
        .unwrap()
        .iter()
        .filter(|&&m| m)
        .count()
}

#[test]
fn mask_counts_match_diagonal_populations_across_the_whole_grid() {
    for cell in occlusion_grid(1..=10, 1..=10) {
        for direction in [Direction::Anti, Direction::Main] {
            let spec = OcclusionSpec { direction, ..cell };
            let got = mask_count(&spec, 28, 28);
            let want = occluded_count_by_diagonals(&spec, 28, 28);
            assert_eq!(got, want, "{}", spec.tag());
        }
    }
}

#[test]
fn phase_shifts_agree_with_the_reference() {
    for phase in [-7, -1, 1, 5, 12] {
        for (w, s) in [(1, 1), (2, 3), (4, 2), (10, 10)] {
            let spec = OcclusionSpec {
                width: w,
                spacing: s,
                direction: Direction::Anti,
                phase,
            };
            assert_eq!(
                mask_count(&spec, 28, 28),
                occluded_count_by_diagonals(&spec, 28, 28),
                "w={w} s={s} phase={phase}"
            );
        }
    }
}

#[test]
fn non_square_images_agree_with_the_reference() {
    for (h, w) in [(5, 9), (1, 4), (17, 3)] {
        for spec in [OcclusionSpec::new(2, 2), OcclusionSpec::new(3, 1)] {
            assert_eq!(
                mask_count(&spec, h, w),
                occluded_count_by_diagonals(&spec, h, w),
                "{h}x{w} {}",
                spec.tag()
            );
        }
    }
}

#[test]
fn equal_width_and_spacing_two_masks_exactly_half_of_28x28() {
    let spec = OcclusionSpec::new(2, 2);
    assert_eq!(mask_count(&spec, 28, 28), 392);
    assert_eq!(occluded_count_by_diagonals(&spec, 28, 28), 392);
}

#[test]
fn applied_occlusion_zeroes_exactly_the_reference_count() {
    use bordernet_core::mnist::{Dataset, Provenance, Split};

    let n = 3;
    let mut images = Tensor::zeros(&[n, 1, 28, 28]);
    for v in images.data_mut() {
        *v = 0.5;
    }
    let dataset = Dataset {
        images,
        labels: vec![1, 2, 3],
        split: Split::Test,
        provenance: Provenance::Clean,
        content_hash: "synthetic".into(),
    };
    let spec = OcclusionSpec::new(3, 4);
    let occluded = apply_occlusion(&dataset, &spec).unwrap();
    let zeros = occluded.images.iter().filter(|&&v| v == 0.0).count();
    assert_eq!(zeros, n * occluded_count_by_diagonals(&spec, 28, 28));
}
