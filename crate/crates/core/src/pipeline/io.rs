//! Image and mask files.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::color::{PixelImage, RgbPixel};
use crate::error::{Error, Result};
use crate::segstat::ClassMask;

pub const MASK_SUFFIX: &str = ".mask.png";

/// PNG or JPEG, judged by extension.
pub fn image_format(path: &Path) -> Option<ImageFormat> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "png" => Some(ImageFormat::Png),
        "jpg" | "jpeg" => Some(ImageFormat::Jpeg),
        _ => None,
    }
}

pub fn is_mask_file(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.to_ascii_lowercase().ends_with(MASK_SUFFIX))
}

/// File stem a mask pairs with: `IMG_01.mask.png` pairs with `IMG_01.*`.
pub fn mask_stem(path: &Path) -> Option<&str> {
    let name = path.file_name()?.to_str()?;
    let cut = name.len().checked_sub(MASK_SUFFIX.len())?;
    name.get(..cut)
        .filter(|_| name[cut..].eq_ignore_ascii_case(MASK_SUFFIX))
}

fn open(path: &Path, format: ImageFormat) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    image::load_from_memory_with_format(&bytes, format).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_image(path: &Path) -> Result<PixelImage> {
    let format = image_format(path).ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    let rgb = open(path, format)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| RgbPixel::from(p.0)).collect();
    PixelImage::new(w, h, pixels)
}

/// Read a single-channel 8-bit index raster.
pub fn load_mask(path: &Path) -> Result<ClassMask> {
    let img = open(path, ImageFormat::Png)?;
    let DynamicImage::ImageLuma8(gray) = img else {
        return Err(Error::Config(format!(
            "{}: mask must be a single-channel 8-bit PNG, found {:?}",
            path.display(),
            img.color()
        )));
    };
    let (w, h) = gray.dimensions();
    ClassMask::new(w, h, gray.into_raw())
}

/// Width and height from the file header, without decoding pixels.
pub fn dimensions(path: &Path) -> Result<(u32, u32)> {
    image::image_dimensions(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

/// Write an image as PNG or JPEG, chosen by extension. Missing parent
/// directories are created.
pub fn save_image(img: &PixelImage, path: &Path) -> Result<()> {
    let format = image_format(path).ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    create_parent(path)?;
    let raw: Vec<u8> = img.pixels().iter().flat_map(|p| p.channels()).collect();
    let buf = RgbImage::from_raw(img.width(), img.height(), raw).expect("buffer matches dimensions");
    buf.save_with_format(path, format)?;
    Ok(())
}

/// Write a class mask as an 8-bit grayscale PNG. Missing parent directories
/// are created.
pub fn save_mask(mask: &ClassMask, path: &Path) -> Result<()> {
    create_parent(path)?;
    let buf = GrayImage::from_raw(mask.width(), mask.height(), mask.indices().to_vec())
        .expect("buffer matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

/// PNG bytes of an RGB image.
pub fn encode_png(img: &PixelImage) -> Result<Vec<u8>> {
    let raw: Vec<u8> = img.pixels().iter().flat_map(|p| p.channels()).collect();
    let buf = RgbImage::from_raw(img.width(), img.height(), raw).expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_names() {
        assert_eq!(mask_stem(Path::new("a/IMG_1.mask.png")), Some("IMG_1"));
        assert_eq!(mask_stem(Path::new("IMG_1.MASK.PNG")), Some("IMG_1"));
        assert_eq!(mask_stem(Path::new("IMG_1.png")), None);
        assert!(is_mask_file(Path::new("x.mask.png")));
        assert!(!is_mask_file(Path::new("x.png")));
    }

    #[test]
    fn formats() {
        assert_eq!(image_format(Path::new("a.JPG")), Some(ImageFormat::Jpeg));
        assert_eq!(image_format(Path::new("a.png")), Some(ImageFormat::Png));
        assert_eq!(image_format(Path::new("a.webp")), None);
        assert!(matches!(
            load_image(Path::new("a.gif")),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = PixelImage::new(
            2,
            1,
            vec![RgbPixel::new(1, 2, 3), RgbPixel::new(250, 128, 0)],
        )
        .unwrap();
        let p = dir.path().join("x.png");
        save_image(&img, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), img);
        assert_eq!(dimensions(&p).unwrap(), (2, 1));

        let mask = ClassMask::new(2, 1, vec![4, 22]).unwrap();
        let m = dir.path().join("x.mask.png");
        save_mask(&mask, &m).unwrap();
        assert_eq!(load_mask(&m).unwrap(), mask);

        // An RGB file is not a valid mask.
        assert!(load_mask(&p).is_err());
    }
}
