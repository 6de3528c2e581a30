//! 8-bit planar images, PNG/JPEG I/O and overlap cropping.

use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of representable intensity levels.
pub const LEVELS: usize = 256;

/// One colour channel as a row-major grid of intensities, origin top-left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelPlane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ChannelPlane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "plane data has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn crop(&self, r: RegionRect) -> Result<Self> {
        r.check_inside(self.width, self.height)?;
        let mut data = Vec::with_capacity(r.width * r.height);
        for y in r.y0..r.y0 + r.height {
            data.extend_from_slice(&self.row(y)[r.x0..r.x0 + r.width]);
        }
        Ok(Self { width: r.width, height: r.height, data })
    }
}

/// Axis-aligned rectangle in pixel coordinates. Serialized as `[x0, y0, width, height]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 4]", into = "[usize; 4]")]
pub struct RegionRect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl RegionRect {
    pub const fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    pub const fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, width, height }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn check_inside(&self, width: usize, height: usize) -> Result<()> {
        let fits_x = self.x0.checked_add(self.width).is_some_and(|e| e <= width);
        let fits_y = self.y0.checked_add(self.height).is_some_and(|e| e <= height);
        if fits_x && fits_y {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                width: self.width,
                height: self.height,
                image_width: width,
                image_height: height,
            })
        }
    }
}

impl From<[usize; 4]> for RegionRect {
    fn from([x0, y0, width, height]: [usize; 4]) -> Self {
        Self { x0, y0, width, height }
    }
}

impl From<RegionRect> for [usize; 4] {
    fn from(r: RegionRect) -> Self {
        [r.x0, r.y0, r.width, r.height]
    }
}

/// An 8-bit image with one (grey) or three (RGB) channel planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: Vec<ChannelPlane>,
}

impl Image {
    pub fn from_planes(channels: Vec<ChannelPlane>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::InvalidImage("an image needs at least one channel".into()));
        };
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::InvalidImage(format!(
                "{} channels; only 1 or 3 are supported",
                channels.len()
            )));
        }
        let (width, height) = (first.width, first.height);
        if channels.iter().any(|c| c.width != width || c.height != height) {
            return Err(Error::InvalidImage("channel planes differ in size".into()));
        }
        Ok(Self { width, height, channels })
    }

    pub fn gray(plane: ChannelPlane) -> Self {
        Self { width: plane.width, height: plane.height, channels: vec![plane] }
    }

    /// Builds an image from interleaved samples (`channels` values per pixel).
    pub fn from_interleaved(width: usize, height: usize, channels: usize, samples: &[u8]) -> Result<Self> {
        if samples.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height}x{channels} image",
                samples.len()
            )));
        }
        let planes = (0..channels)
            .map(|c| ChannelPlane {
                width,
                height,
                data: samples.iter().skip(c).step_by(channels).copied().collect(),
            })
            .collect();
        Self::from_planes(planes)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[ChannelPlane] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &ChannelPlane {
        &self.channels[c]
    }

    pub fn into_channels(self) -> Vec<ChannelPlane> {
        self.channels
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channel_count() == other.channel_count()
    }

    pub fn interleaved(&self) -> Vec<u8> {
        let n = self.width * self.height;
        let mut out = Vec::with_capacity(n * self.channel_count());
        for i in 0..n {
            for plane in &self.channels {
                out.push(plane.data[i]);
            }
        }
        out
    }

    pub fn crop(&self, r: RegionRect) -> Result<Image> {
        r.check_inside(self.width, self.height)?;
        let channels = self.channels.iter().map(|c| c.crop(r)).collect::<Result<Vec<_>>>()?;
        Ok(Image { width: r.width, height: r.height, channels })
    }

    /// Mean intensity over every sample of every channel.
    pub fn mean(&self) -> f64 {
        let n = (self.width * self.height * self.channel_count()) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let sum: u64 = self.channels.iter().flat_map(|c| c.data.iter()).map(|&v| u64::from(v)).sum();
        sum as f64 / n
    }
}

/// Reads a PNG or JPEG file into an 8-bit image. Alpha is discarded.
pub fn decode_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        other => {
            return Err(Error::Decode {
                path: path.to_owned(),
                message: format!("unsupported container {other:?}, expected PNG or JPEG"),
            })
        }
    }
    let decoded = reader
        .decode()
        .map_err(|e| Error::Decode { path: path.to_owned(), message: e.to_string() })?;
    from_dynamic(decoded, path)
}

fn from_dynamic(img: DynamicImage, path: &Path) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Image::from_interleaved(w, h, 1, buf.as_raw()),
        DynamicImage::ImageLumaA8(buf) => {
            let luma: Vec<u8> = buf.as_raw().chunks_exact(2).map(|p| p[0]).collect();
            Image::from_interleaved(w, h, 1, &luma)
        }
        DynamicImage::ImageRgb8(buf) => Image::from_interleaved(w, h, 3, buf.as_raw()),
        DynamicImage::ImageRgba8(buf) => {
            let rgb: Vec<u8> = buf.as_raw().chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
            Image::from_interleaved(w, h, 3, &rgb)
        }
        other => {
            let bits = other.color().bits_per_pixel() / u16::from(other.color().channel_count());
            Err(Error::UnsupportedDepth { path: path.to_owned(), bits })
        }
    }
}

/// Writes the image as PNG. Intermediates are never re-encoded as JPEG.
pub fn encode_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let color = match img.channel_count() {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    image::save_buffer_with_format(
        path,
        &img.interleaved(),
        img.width() as u32,
        img.height() as u32,
        color,
        ImageFormat::Png,
    )
    .map_err(|e| Error::Encode { path: path.to_owned(), message: e.to_string() })
}

/// Crops two same-sized images so that their remaining areas are shifted
/// against each other by `n_c` pixels in both axes.
///
/// `a` loses its `n_c` leftmost columns and `n_c` bottom rows, `b` loses
/// its `n_c` rightmost columns and `n_c` top rows. `n_c = 0` returns both
/// images unchanged.
pub fn simulate_overlap(a: &Image, b: &Image, n_c: usize) -> Result<(Image, Image)> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (w, h) = (a.width(), a.height());
    if 2 * n_c >= w.min(h) {
        return Err(Error::MisalignmentTooLarge { n_c, width: w, height: h });
    }
    let (cw, ch) = (w - n_c, h - n_c);
    let ca = a.crop(RegionRect::new(n_c, 0, cw, ch))?;
    let cb = b.crop(RegionRect::new(0, n_c, cw, ch))?;
    Ok((ca, cb))
}
