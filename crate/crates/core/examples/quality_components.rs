//! Illumination uniformity and defocus on generated face crops.
//!
//! Pass a PNG or PGM path to score a real 8-bit grayscale image instead.

use vmad::quality::*;

fn main() -> vmad::Result<()> {
    if let Some(path) = std::env::args().nth(1) {
        let img = load_gray_image(path.as_ref())?;
        let r = img.full_rect();
        println!("illumination uniformity {:.2}", illumination_uniformity(&img, r)?);
        println!("defocus                 {:.2}", defocus(&img, r)?);
        return Ok(());
    }

    let texture = |x: u32, y: u32| ((x * 37 + y * 91) % 64) as u8;
    let even = GrayImage::from_fn(64, 64, |x, y| 96 + texture(x, y));
    let side_lit = GrayImage::from_fn(64, 64, |x, y| (x * 3) as u8 + texture(x, y) / 2);
    let soft = GrayImage::from_fn(64, 64, |x, y| 96 + ((x / 8 + y / 8) % 2) as u8 * 20);

    println!("{:<10} {:>12} {:>9}", "image", "uniformity", "defocus");
    for (name, img) in [("even", &even), ("side-lit", &side_lit), ("soft", &soft)] {
        let r = img.full_rect();
        println!(
            "{name:<10} {:>12.2} {:>9.2}",
            illumination_uniformity(img, r)?,
            defocus(img, r)?
        );
    }

    // Raw scores are mapped into [0, 1] before weighting.
    let raw = [18.0, 25.77, 40.0];
    let norm = QualityNormalization::DivideByDatasetMedian(None).resolved(&raw)?;
    for v in raw {
        println!("{v:>6} -> {:.3} ({norm})", normalize_quality(v, norm)?);
    }
    Ok(())
}
