//! 8-bit RGB rasters with floating-point bilinear sampling.
//!
//! Values are blended directly in the stored (sRGB-encoded) space; there is no
//! gamma handling.

use std::path::Path;

use ::image::{ImageFormat, RgbImage};
use thiserror::Error;

/// Colour with channels on `[0, 1]`.
pub type Rgb = [f64; 3];

/// Largest accepted pixel count (`width * height`).
pub const MAX_PIXELS: u64 = 1 << 28;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid image dimensions {0}x{1}")]
    BadDimensions(u64, u64),
    #[error("failed to decode {path}: {message}")]
    Decode { path: String, message: String },
    #[error("failed to encode {path}: {message}")]
    Encode { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<[u8; 3]>,
}

#[inline]
pub fn to_unit(v: u8) -> f64 {
    v as f64 / 255.0
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn check_dims(width: u64, height: u64) -> Result<(), ImageError> {
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_PIXELS {
        return Err(ImageError::BadDimensions(width, height));
    }
    Ok(())
}

impl Image {
    pub fn new(width: u32, height: u32, fill: [u8; 3]) -> Result<Self, ImageError> {
        check_dims(width as u64, height as u64)?;
        Ok(Self {
            width,
            height,
            data: vec![fill; width as usize * height as usize],
        })
    }

    pub fn from_pixels(width: u32, height: u32, data: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        check_dims(width as u64, height as u64)?;
        if data.len() != width as usize * height as usize {
            return Err(ImageError::BadDimensions(width as u64, height as u64));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from a function returning unit-range colours.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> Rgb,
    ) -> Result<Self, ImageError> {
        check_dims(width as u64, height as u64)?;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                let c = f(x, y);
                data.push([quantize(c[0]), quantize(c[1]), quantize(c[2])]);
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: [u8; 3]) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn get_unit(&self, x: u32, y: u32) -> Rgb {
        self.get(x, y).map(to_unit)
    }

    /// Bilinear sample at subpixel `(x, y)`; pixel centres sit at `i + 0.5`
    /// and coordinates beyond the outer centres clamp to the edge pixels.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Rgb {
        let fx = (x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let fx = if fx.is_nan() { 0.0 } else { fx };
        let fy = if fy.is_nan() { 0.0 } else { fy };
        let x0 = fx.floor() as u32;
        let y0 = fy.floor() as u32;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let (p00, p10) = (self.get(x0, y0), self.get(x1, y0));
        let (p01, p11) = (self.get(x0, y1), self.get(x1, y1));
        let mut out = [0.0; 3];
        for ch in 0..3 {
            let top = mix(to_unit(p00[ch]), to_unit(p10[ch]), tx);
            let bottom = mix(to_unit(p01[ch]), to_unit(p11[ch]), tx);
            out[ch] = mix(top, bottom, ty);
        }
        out
    }

    /// Bilinear resize, sampling the source at mapped pixel centres.
    pub fn resized(&self, width: u32, height: u32) -> Result<Image, ImageError> {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        Image::from_fn(width, height, |x, y| {
            self.sample_bilinear((x as f64 + 0.5) * sx, (y as f64 + 0.5) * sy)
        })
    }

    fn to_rgb_image(&self) -> RgbImage {
        let raw: Vec<u8> = self.data.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width, self.height, raw).expect("buffer matches dimensions")
    }
}

// exact when a == b, so constant regions sample back bitwise
#[inline]
fn mix(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

fn format_for_path(path: &Path) -> Result<ImageFormat, ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(ImageFormat::Png),
        "ppm" | "pnm" => Ok(ImageFormat::Pnm),
        _ => Err(ImageError::UnsupportedFormat(path.display().to_string())),
    }
}

/// Loads a PNG or binary PPM (P6), detected from the file's magic bytes.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    decode_image(&bytes, &path.display().to_string())
}

pub fn decode_image(bytes: &[u8], name: &str) -> Result<Image, ImageError> {
    let format = if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        ImageFormat::Png
    } else if bytes.starts_with(b"P6") {
        ImageFormat::Pnm
    } else {
        return Err(ImageError::UnsupportedFormat(format!(
            "{name}: unrecognised magic bytes"
        )));
    };
    let decoded =
        ::image::load_from_memory_with_format(bytes, format).map_err(|e| ImageError::Decode {
            path: name.to_string(),
            message: e.to_string(),
        })?;
    let rgb = decoded.into_rgb8();
    let (w, h) = rgb.dimensions();
    check_dims(w as u64, h as u64)?;
    let data = rgb.pixels().map(|p| p.0).collect();
    Ok(Image {
        width: w,
        height: h,
        data,
    })
}

/// Saves as PNG or binary PPM depending on the extension.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let format = format_for_path(path)?;
    let bytes = encode_image(img, format).map_err(|message| ImageError::Encode {
        path: path.display().to_string(),
        message,
    })?;
    std::fs::write(path, bytes)?;
    Ok(())
}

fn encode_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>, String> {
    use ::image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use ::image::{ExtendedColorType, ImageEncoder};

    let mut out = Vec::new();
    let raw: Vec<u8> = img.data.iter().flatten().copied().collect();
    match format {
        ImageFormat::Png => img
            .to_rgb_image()
            .write_to(&mut std::io::Cursor::new(&mut out), ImageFormat::Png)
            .map_err(|e| e.to_string())?,
        _ => PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&raw, img.width, img.height, ExtendedColorType::Rgb8)
            .map_err(|e| e.to_string())?,
    }
    Ok(out)
}
