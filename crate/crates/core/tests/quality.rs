use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmad::model::Rect;
use vmad::quality::*;

fn random_image(rng: &mut ChaCha8Rng, max_level: u8) -> GrayImage {
    let w = rng.random_range(3..40);
    let h = rng.random_range(3..40);
    let data = (0..w * h).map(|_| rng.random_range(0..=max_level)).collect();
    GrayImage::new(w, h, data).unwrap()
}

#[test]
fn constant_images() {
    for level in [0u8, 77, 255] {
        let img = GrayImage::from_fn(16, 9, |_, _| level);
        assert_eq!(illumination_uniformity(&img, img.full_rect()).unwrap(), 100.0);
        assert_eq!(defocus(&img, img.full_rect()).unwrap(), 0.0);
    }
}

#[test]
fn disjoint_halves() {
    let img = GrayImage::from_fn(10, 6, |x, _| if x < 5 { 20 } else { 220 });
    assert_eq!(illumination_uniformity(&img, img.full_rect()).unwrap(), 0.0);
}

#[test]
fn mirror_symmetry_on_random_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let img = random_image(&mut rng, 255);
        let m = img.mirrored();
        let r = img.full_rect();
        assert_eq!(
            illumination_uniformity(&img, r).unwrap(),
            illumination_uniformity(&m, r).unwrap()
        );
        assert_eq!(defocus(&img, r).unwrap(), defocus(&m, r).unwrap());
    }
}

#[test]
fn defocus_shift_invariance_on_random_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let img = random_image(&mut rng, 200);
        let c = rng.random_range(1..=55u8);
        let shifted = GrayImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y) + c);
        let r = img.full_rect();
        assert_eq!(defocus(&img, r).unwrap(), defocus(&shifted, r).unwrap());
    }
}

#[test]
fn scores_stay_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let img = random_image(&mut rng, 255);
        let r = img.full_rect();
        assert!((0.0..=100.0).contains(&illumination_uniformity(&img, r).unwrap()));
        assert!((0.0..=100.0).contains(&defocus(&img, r).unwrap()));
    }
}

#[test]
fn blur_lowers_defocus() {
    let sharp = GrayImage::from_fn(32, 32, |x, y| if (x / 2 + y / 2) % 2 == 0 { 30 } else { 220 });
    let blurred = GrayImage::from_fn(32, 32, |x, y| {
        let mut s = 0u32;
        let mut n = 0u32;
        for dy in -2i32..=2 {
            for dx in -2i32..=2 {
                let (xx, yy) = (x as i32 + dx, y as i32 + dy);
                if (0..32).contains(&xx) && (0..32).contains(&yy) {
                    s += u32::from(sharp.get(xx as u32, yy as u32));
                    n += 1;
                }
            }
        }
        (s / n) as u8
    });
    let r = sharp.full_rect();
    assert!(defocus(&blurred, r).unwrap() < defocus(&sharp, r).unwrap());
}

#[test]
fn box_outside_image() {
    let img = GrayImage::from_fn(10, 10, |_, _| 1);
    assert!(matches!(
        defocus(&img, Rect::new(5, 5, 10, 10)),
        Err(vmad::Error::BoxOutOfBounds(..))
    ));
}
