use std::path::Path;
use std::sync::Arc;

use super::Region;
use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// 8-bit grayscale bitmap, rows stored top to bottom as read from file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain("image is empty"));
        }
        if pixels.len() != width * height {
            return Err(Error::domain(format!(
                "{} pixels given for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    /// Read a PGM (P2 or P5) file.
    pub fn open(path: &Path) -> Result<Self> {
        let img = image::ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })?
            .into_luma8();
        let (w, h) = img.dimensions();
        GrayImage::new(w as usize, h as usize, img.into_raw())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Pixel whose cell `[col/W, (col+1)/W] × [row/H, (row+1)/H]` holds `(x, y)`.
    pub fn pixel_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return None;
        }
        let col = ((x * self.width as f64) as usize).min(self.width - 1);
        let row = ((y * self.height as f64) as usize).min(self.height - 1);
        Some((col, row))
    }

    /// Center of pixel `(col, row)` in unit-square coordinates.
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            (col as f64 + 0.5) / self.width as f64,
            (row as f64 + 0.5) / self.height as f64,
        )
    }
}

/// Split the unit square extruded over `z_range` into the dark pixels
/// (value below `threshold`) and the light ones.
pub fn image_region(image: &GrayImage, threshold: u8, z_range: (f64, f64)) -> Result<(Region, Region)> {
    if !(z_range.0 <= z_range.1) {
        return Err(Error::domain(format!("empty extrusion range {z_range:?}")));
    }
    let bbox = Aabb::new([0.0, 0.0, z_range.0], [1.0, 1.0, z_range.1]);
    let img = Arc::new(image.clone());
    let region = |dark: bool| {
        let img = img.clone();
        Region::from_fn(bbox, move |p| {
            if p[2] < z_range.0 || p[2] > z_range.1 {
                return 1.0;
            }
            match img.pixel_at(p[0], p[1]) {
                Some((c, r)) if (img.get(c, r) < threshold) == dark => -1.0,
                _ => 1.0,
            }
        })
    };
    Ok((region(true), region(false)))
}
