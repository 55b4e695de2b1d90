//! RGB float image buffer and 8-bit PNG conversion.

use std::path::Path;

use image::{ImageBuffer as RawImage, Rgb};

use crate::error::{invalid, Result};

/// Row-major RGB image with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if pixels.len() != height * width * 3 {
            return Err(invalid(format!(
                "expected {} channel values for a {height}x{width} image, got {}",
                height * width * 3,
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { height, width, pixels })
    }

    /// Solid-colour image.
    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        let pixels = (0..height * width).flat_map(|_| rgb).collect();
        Self::new(height, width, pixels)
    }

    pub(crate) fn from_raw_unchecked(height: usize, width: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), height * width * 3);
        Self { height, width, pixels }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Flat `height * width * 3` channel values.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn rgb_iter(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// 8-bit quantization with round-half-to-even.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| (v * 255.0).round_ties_even().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_rgb8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        let pixels = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Self::new(height, width, pixels)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let raw: RawImage<Rgb<u8>, Vec<u8>> = RawImage::from_raw(self.width as u32, self.height as u32, self.to_rgb8())
            .expect("buffer length matches dimensions");
        raw.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// Load any image the `image` crate can decode as 8-bit RGB.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = img.dimensions();
        Self::from_rgb8(h as usize, w as usize, img.as_raw())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ImageBuffer::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(ImageBuffer::new(1, 1, vec![0.0, 0.5]).is_err());
        assert!(ImageBuffer::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn quantization_rounds_half_to_even() {
        // 0.5 * 255 = 127.5 -> 128 (even); 1.5/255 * 255 = 1.5 -> 2; 2.5/255 -> 2
        let img = ImageBuffer::new(1, 1, vec![0.5, 1.5 / 255.0, 2.5 / 255.0]).unwrap();
        assert_eq!(img.to_rgb8(), vec![128, 2, 2]);
        let img = ImageBuffer::new(1, 1, vec![0.0, 1.0, 0.5 / 255.0]).unwrap();
        assert_eq!(img.to_rgb8(), vec![0, 255, 0]);
    }

    #[test]
    fn png_roundtrip_is_lossless_on_8bit_values() {
        let bytes: Vec<u8> = (0..4 * 3 * 3).map(|i| (i * 7) as u8).collect();
        let img = ImageBuffer::from_rgb8(4, 3, &bytes).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        img.save_png(&path).unwrap();
        let back = ImageBuffer::load(&path).unwrap();
        assert_eq!(back.to_rgb8(), bytes);
        assert_eq!((back.height(), back.width()), (4, 3));
    }
}
