//! RGB rasters as `height × width × 3` tensors with values in `[0, 1]`.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::tensor::{Shape, Tensor3};

/// Channel `c` becomes frontal slice `c`; pixel `(x, y)` maps to entry `(y, x)`.
pub fn image_to_tensor(img: &RgbImage) -> Tensor3 {
    let (w, h) = img.dimensions();
    Tensor3::from_fn(Shape::new(h as usize, w as usize, 3), |i, j, k| {
        img.get_pixel(j as u32, i as u32)[k] as f64 / 255.0
    })
}

/// Clamps to `[0, 1]` and rounds to 8 bits.
pub fn tensor_to_image(t: &Tensor3) -> Result<RgbImage> {
    let s = t.shape();
    if s.n3 != 3 {
        return Err(Error::DimensionMismatch(format!(
            "an RGB image needs n3 = 3, got {s}"
        )));
    }
    let to_u8 = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    Ok(RgbImage::from_fn(s.n2 as u32, s.n1 as u32, |x, y| {
        let (i, j) = (y as usize, x as usize);
        Rgb([
            to_u8(t[(i, j, 0)]),
            to_u8(t[(i, j, 1)]),
            to_u8(t[(i, j, 2)]),
        ])
    }))
}

/// Decodes any supported raster and converts it to 8-bit RGB.
pub fn load_png(path: impl AsRef<Path>) -> Result<Tensor3> {
    let img = image::open(path)?.to_rgb8();
    Ok(image_to_tensor(&img))
}

pub fn save_png(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    tensor_to_image(t)?.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mid_gray_is_constant() {
        let img = RgbImage::from_pixel(5, 4, Rgb([128, 128, 128]));
        let t = image_to_tensor(&img);
        assert_eq!(t.dims(), (4, 5, 3));
        assert!(t.as_slice().iter().all(|&v| v == 128.0 / 255.0));
    }

    #[test]
    fn round_trip_preserves_pixels() {
        let img = RgbImage::from_fn(7, 3, |x, y| {
            Rgb([(x * 30) as u8, (y * 80) as u8, (x * y * 11) as u8])
        });
        assert_eq!(tensor_to_image(&image_to_tensor(&img)).unwrap(), img);
    }

    #[test]
    fn out_of_range_values_are_clamped() {
        let t = Tensor3::from_fn(
            Shape::new(1, 2, 3),
            |_, j, _| if j == 0 { -0.5 } else { 1.7 },
        );
        let img = tensor_to_image(&t).unwrap();
        assert_eq!(img.get_pixel(0, 0), &Rgb([0, 0, 0]));
        assert_eq!(img.get_pixel(1, 0), &Rgb([255, 255, 255]));
        assert!(tensor_to_image(&Tensor3::zeros(Shape::new(2, 2, 2))).is_err());
    }

    #[test]
    fn png_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        let t = Tensor3::from_fn(Shape::new(6, 5, 3), |i, j, k| {
            ((i * 40 + j * 9 + k * 70) % 256) as f64 / 255.0
        });
        save_png(&p, &t).unwrap();
        assert_eq!(load_png(&p).unwrap(), t);
    }
}
