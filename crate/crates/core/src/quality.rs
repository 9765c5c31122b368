//! Classical per-frame face image quality components and the rules that map
//! raw quality tracks to weights in `[0, 1]`.
//!
//! Both components are computed on the face region only. Scores are on a
//! 0..100 scale where higher means better quality.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Rect;
use crate::stats;

/// 8-bit luminance image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::DimensionMismatch {
                expected: width as usize * height as usize,
                actual: data.len(),
            });
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn mirrored(&self) -> Self {
        GrayImage::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Binary PGM (P5) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() + 20);
        let _ = write!(out, "P5\n{} {}\n255\n", self.width, self.height);
        out.extend_from_slice(&self.data);
        out
    }
}

/// Reads an 8-bit grayscale PGM or PNG. Color images are rejected.
pub fn load_gray_image(path: &Path) -> Result<GrayImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let fail = |reason: String| Error::Image {
        path: path.to_path_buf(),
        reason,
    };
    match reader.format() {
        Some(image::ImageFormat::Png | image::ImageFormat::Pnm) => {}
        other => return Err(fail(format!("unsupported format {other:?}"))),
    }
    let img = reader.decode().map_err(|e| fail(e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            GrayImage::new(w, h, buf.into_raw())
        }
        other => Err(fail(format!("expected 8-bit grayscale, got {:?}", other.color()))),
    }
}

/// Tunables for the quality components.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityConfig {
    /// Luminance histogram bins for illumination uniformity.
    pub histogram_bins: usize,
    /// Side of the square mean filter used by defocus; must be odd.
    pub filter_size: usize,
    /// Output scale; scores lie in `[0, scale]`.
    pub scale: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            histogram_bins: 256,
            filter_size: 3,
            scale: 100.0,
        }
    }
}

fn check_box(image: &GrayImage, face_box: Rect) -> Result<()> {
    if !face_box.fits_within(image.width, image.height) {
        return Err(Error::BoxOutOfBounds(face_box.to_string(), image.width, image.height));
    }
    Ok(())
}

pub fn illumination_uniformity(image: &GrayImage, face_box: Rect) -> Result<f64> {
    illumination_uniformity_with(image, face_box, &QualityConfig::default())
}

/// Histogram intersection of the left and right halves of the face box.
///
/// Left half is columns `[x, x + w/2)`, right half `[x + ceil(w/2), x + w)`;
/// the middle column of an odd-width box belongs to neither.
pub fn illumination_uniformity_with(image: &GrayImage, face_box: Rect, cfg: &QualityConfig) -> Result<f64> {
    check_box(image, face_box)?;
    if face_box.width < 2 || face_box.height < 1 || cfg.histogram_bins == 0 {
        return Err(Error::DegenerateBox(face_box.to_string()));
    }
    let half = face_box.width / 2;
    let right_start = face_box.x + face_box.width.div_ceil(2);
    let bins = cfg.histogram_bins;
    let mut left = vec![0u64; bins];
    let mut right = vec![0u64; bins];
    for y in face_box.y..face_box.y + face_box.height {
        for dx in 0..half {
            left[image.get(face_box.x + dx, y) as usize * bins / 256] += 1;
            right[image.get(right_start + dx, y) as usize * bins / 256] += 1;
        }
    }
    // Both halves hold the same number of pixels, so intersecting the raw
    // counts and dividing once equals intersecting normalized histograms.
    let total = u64::from(half) * u64::from(face_box.height);
    let common: u64 = left.iter().zip(&right).map(|(l, r)| *l.min(r)).sum();
    Ok(cfg.scale * common as f64 / total as f64)
}

pub fn defocus(image: &GrayImage, face_box: Rect) -> Result<f64> {
    defocus_with(image, face_box, &QualityConfig::default())
}

/// Mean absolute residual between the face region and its mean-filtered
/// version, with edge replication at the box border. Higher is sharper.
pub fn defocus_with(image: &GrayImage, face_box: Rect, cfg: &QualityConfig) -> Result<f64> {
    check_box(image, face_box)?;
    let k = cfg.filter_size;
    if k.is_multiple_of(2) || face_box.width < k as u32 || face_box.height < k as u32 {
        return Err(Error::DegenerateBox(face_box.to_string()));
    }
    let r = (k / 2) as i64;
    let (w, h) = (i64::from(face_box.width), i64::from(face_box.height));
    let at = |x: i64, y: i64| -> i64 {
        let cx = x.clamp(0, w - 1) as u32 + face_box.x;
        let cy = y.clamp(0, h - 1) as u32 + face_box.y;
        i64::from(image.get(cx, cy))
    };
    let taps = (k * k) as i64;
    // Residuals are accumulated as |taps * I - window_sum| in integers.
    let mut residual: u64 = 0;
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0;
            for dy in -r..=r {
                for dx in -r..=r {
                    sum += at(x + dx, y + dy);
                }
            }
            residual += (taps * at(x, y) - sum).unsigned_abs();
        }
    }
    let pixels = (w * h) as f64;
    Ok(cfg.scale * residual as f64 / (taps as f64 * pixels * 255.0))
}

/// How a raw quality track is mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QualityNormalization {
    Identity,
    DivideBy100,
    /// Divide by a dataset-wide median. `None` until the statistic is computed.
    DivideByDatasetMedian(Option<f64>),
}

impl QualityNormalization {
    /// Fills in a missing median from `values`.
    pub fn resolved(self, values: &[f64]) -> Result<Self> {
        match self {
            QualityNormalization::DivideByDatasetMedian(None) => Ok(QualityNormalization::DivideByDatasetMedian(Some(
                dataset_median(values)?,
            ))),
            other => Ok(other),
        }
    }
}

impl fmt::Display for QualityNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualityNormalization::Identity => f.write_str("id"),
            QualityNormalization::DivideBy100 => f.write_str("100"),
            QualityNormalization::DivideByDatasetMedian(None) => f.write_str("median"),
            QualityNormalization::DivideByDatasetMedian(Some(s)) => write!(f, "median={s}"),
        }
    }
}

impl FromStr for QualityNormalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "id" | "identity" => Ok(QualityNormalization::Identity),
            "100" => Ok(QualityNormalization::DivideBy100),
            "median" => Ok(QualityNormalization::DivideByDatasetMedian(None)),
            other => match other.strip_prefix("median=") {
                Some(v) => v
                    .parse()
                    .map(|v| QualityNormalization::DivideByDatasetMedian(Some(v)))
                    .map_err(|e| format!("bad median statistic `{v}`: {e}")),
                None => Err(format!("unknown normalization `{other}`")),
            },
        }
    }
}

pub fn normalize_quality(raw: f64, norm: QualityNormalization) -> Result<f64> {
    let v = match norm {
        QualityNormalization::Identity => raw,
        QualityNormalization::DivideBy100 => raw / 100.0,
        QualityNormalization::DivideByDatasetMedian(Some(s)) if s.is_finite() && s > 0.0 => raw / s,
        QualityNormalization::DivideByDatasetMedian(s) => return Err(Error::InvalidStatistic(s.unwrap_or(f64::NAN))),
    };
    Ok(v.clamp(0.0, 1.0))
}

pub fn dataset_median(values: &[f64]) -> Result<f64> {
    stats::median(values).ok_or(Error::EmptySet("quality values"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(w: u32, h: u32, v: u8) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| v)
    }

    #[test]
    fn uniformity_identity_and_disjoint() {
        let img = constant(8, 6, 117);
        assert_eq!(illumination_uniformity(&img, img.full_rect()).unwrap(), 100.0);

        let split = GrayImage::from_fn(8, 6, |x, _| if x < 4 { 0 } else { 255 });
        assert_eq!(illumination_uniformity(&split, split.full_rect()).unwrap(), 0.0);
    }

    #[test]
    fn uniformity_half_overlap() {
        // Left half alternates 0/255, right half is all 0.
        let img = GrayImage::from_fn(4, 4, |x, y| if x < 2 && (x + y) % 2 == 0 { 255 } else { 0 });
        let v = illumination_uniformity(&img, img.full_rect()).unwrap();
        assert_eq!(v, 100.0 * (f64::min(0.5, 1.0) + f64::min(0.5, 0.0)));
    }

    #[test]
    fn uniformity_drops_middle_column() {
        // Odd width: the middle column is bright, halves are equal.
        let img = GrayImage::from_fn(5, 3, |x, _| if x == 2 { 255 } else { 10 });
        assert_eq!(illumination_uniformity(&img, img.full_rect()).unwrap(), 100.0);
    }

    #[test]
    fn uniformity_uses_face_box_only() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 5 { 0 } else { 200 });
        let inner = Rect::new(6, 2, 4, 4);
        assert_eq!(illumination_uniformity(&img, inner).unwrap(), 100.0);
    }

    #[test]
    fn box_errors() {
        let img = constant(10, 10, 0);
        assert!(matches!(
            illumination_uniformity(&img, Rect::new(5, 5, 6, 2)),
            Err(Error::BoxOutOfBounds(..))
        ));
        assert!(matches!(
            illumination_uniformity(&img, Rect::new(0, 0, 1, 5)),
            Err(Error::DegenerateBox(_))
        ));
        assert!(matches!(
            defocus(&img, Rect::new(0, 0, 2, 5)),
            Err(Error::DegenerateBox(_))
        ));
    }

    #[test]
    fn defocus_constant_is_zero() {
        let img = constant(7, 5, 90);
        assert_eq!(defocus(&img, img.full_rect()).unwrap(), 0.0);
    }

    #[test]
    fn defocus_checkerboard_by_hand() {
        let img = GrayImage::from_fn(3, 3, |x, y| if (x + y) % 2 == 0 { 255 } else { 0 });
        // With edge replication every 255 pixel (4 corners and center) sees a
        // window sum of 5 * 255, as does every 0 pixel (the 4 edges).
        let window_mean = 5.0 * 255.0 / 9.0;
        let residuals = 5.0 * (255.0 - window_mean) + 4.0 * window_mean;
        let expected = 100.0 * residuals / 9.0 / 255.0;
        let got = defocus(&img, img.full_rect()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got - 4000.0 / 81.0).abs() < 1e-12);
    }

    #[test]
    fn defocus_mirror_symmetric() {
        let img = GrayImage::from_fn(9, 7, |x, y| ((x * 31 + y * 17 + x * y) % 256) as u8);
        let a = defocus(&img, img.full_rect()).unwrap();
        let b = defocus(&img.mirrored(), img.full_rect()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalization_rules() {
        let magface = QualityNormalization::DivideByDatasetMedian(Some(25.77));
        assert_eq!(normalize_quality(25.77, magface).unwrap(), 1.0);
        assert_eq!(normalize_quality(60.0, magface).unwrap(), 1.0);
        assert_eq!(normalize_quality(50.0, QualityNormalization::DivideBy100).unwrap(), 0.5);
        assert_eq!(normalize_quality(-0.2, QualityNormalization::Identity).unwrap(), 0.0);
        assert!(matches!(
            normalize_quality(1.0, QualityNormalization::DivideByDatasetMedian(Some(0.0))),
            Err(Error::InvalidStatistic(_))
        ));
        assert!(normalize_quality(1.0, QualityNormalization::DivideByDatasetMedian(None)).is_err());
    }

    #[test]
    fn normalization_parse_roundtrip() {
        for s in ["id", "100", "median", "median=25.77"] {
            let n: QualityNormalization = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("median=x".parse::<QualityNormalization>().is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(dataset_median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(dataset_median(&[1.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(dataset_median(&[]), Err(Error::EmptySet(_))));
    }

    #[test]
    fn pgm_roundtrip_through_loader() {
        let img = GrayImage::from_fn(6, 4, |x, y| (x * 40 + y) as u8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        std::fs::write(&path, img.to_pgm()).unwrap();
        assert_eq!(load_gray_image(&path).unwrap(), img);
    }

    #[test]
    fn color_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.png");
        image::RgbImage::new(4, 4).save(&path).unwrap();
        assert!(matches!(load_gray_image(&path), Err(Error::Image { .. })));
        let gray = dir.path().join("g.png");
        image::GrayImage::from_pixel(3, 2, image::Luma([9]))
            .save(&gray)
            .unwrap();
        assert_eq!(load_gray_image(&gray).unwrap().data(), &[9; 6]);
    }
}
