//! PNG/JPEG persistence for images, masks and parse maps.
//!
//! Masks are stored as 8-bit grayscale PNG with 0/255 samples. Parse maps
//! are 8-bit grayscale or palette PNG whose raw sample value is the label id.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::{binarize, BinaryMask, ImageBuffer, LabelScheme, ParseMap};
use crate::error::{Error, Result};

pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path).map_err(|e| Error::decode(path, e))?;
    let (w, h) = (img.width(), img.height());
    match img {
        DynamicImage::ImageLuma8(g) => ImageBuffer::new(w, h, 1, g.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            ImageBuffer::new(w, h, 1, img.to_luma8().into_raw())
        }
        other => ImageBuffer::new(w, h, 3, other.to_rgb8().into_raw()),
    }
}

/// Writes a PNG (format chosen from the data, not the extension).
pub fn save_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let color = match img.channels() {
        1 => image::ExtendedColorType::L8,
        _ => image::ExtendedColorType::Rgb8,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    image::write_buffer_with_format(
        &mut writer,
        img.data(),
        img.width(),
        img.height(),
        color,
        ImageFormat::Png,
    )
    .map_err(|e| Error::decode(path, e))
}

/// Loads a mask image; any sample above 127 counts as set.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = load_image(path)?;
    let gray = if img.channels() == 1 {
        img
    } else {
        let luma = img.luma().into_iter().map(|v| v.round() as u8).collect();
        ImageBuffer::new(img.width(), img.height(), 1, luma)?
    };
    binarize(&gray, 127)
}

pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    save_image(path, &mask.to_image())
}

pub fn load_parse_map(path: &Path, scheme: LabelScheme) -> Result<ParseMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| Error::decode(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::decode(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::decode(path, e))?;

    match info.color_type {
        png::ColorType::Grayscale | png::ColorType::Indexed => {}
        other => {
            return Err(Error::decode(
                path,
                format!("parse map must be grayscale or palette PNG, found {other:?}"),
            ))
        }
    }
    let bits = match info.bit_depth {
        png::BitDepth::One => 1,
        png::BitDepth::Two => 2,
        png::BitDepth::Four => 4,
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => {
            return Err(Error::decode(path, "16-bit parse maps are not supported"))
        }
    };

    let (w, h) = (info.width as usize, info.height as usize);
    let mut labels = Vec::with_capacity(w * h);
    for row in buf[..info.line_size * h].chunks_exact(info.line_size) {
        if bits == 8 {
            labels.extend_from_slice(&row[..w]);
            continue;
        }
        let per_byte = 8 / bits;
        let mask = (1u8 << bits) - 1;
        for x in 0..w {
            let byte = row[x / per_byte];
            let shift = 8 - bits * (x % per_byte + 1);
            labels.push((byte >> shift) & mask);
        }
    }
    ParseMap::new(info.width, info.height, labels, scheme)
}

pub fn save_parse_map(path: &Path, parse: &ParseMap) -> Result<()> {
    let img = ImageBuffer::new(parse.width(), parse.height(), 1, parse.labels().to_vec())?;
    save_image(path, &img)
}
