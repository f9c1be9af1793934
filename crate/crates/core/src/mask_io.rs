//! PNG encoding of label maps and intensity rasters.
//!
//! The canonical mask is an 8-bit single-channel image whose values are the
//! class ids. Colour masks use the display palette of [`ClassId::color`].

use std::io::Cursor;

use png::{BitDepth, ColorType, Decoder, Encoder, Transformations};
use serde::{Deserialize, Serialize};

use crate::error::MaskError;
use crate::labelmap::{ClassId, LabelMap};

/// On-disk representation of a mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskFormat {
    /// 8-bit grayscale or palette-indexed image, pixel value = class id.
    #[default]
    Indexed,
    /// RGB image coloured with the display palette.
    PaletteRgb,
}

fn malformed(e: impl std::fmt::Display) -> MaskError {
    MaskError::MalformedImage(e.to_string())
}

struct Decoded {
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    buf: Vec<u8>,
}

fn decode_png(bytes: &[u8], transform: Transformations) -> Result<Decoded, MaskError> {
    let mut decoder = Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(transform);
    let mut reader = decoder.read_info().map_err(malformed)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| malformed("image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(malformed)?;
    buf.truncate(info.buffer_size());
    if info.width == 0 || info.height == 0 {
        return Err(malformed("zero-sized image"));
    }
    Ok(Decoded {
        width: info.width as usize,
        height: info.height as usize,
        color: info.color_type,
        depth: info.bit_depth,
        buf,
    })
}

pub fn decode_mask(bytes: &[u8], format: MaskFormat) -> Result<LabelMap, MaskError> {
    match format {
        MaskFormat::Indexed => {
            let img = decode_png(bytes, Transformations::IDENTITY)?;
            if img.depth != BitDepth::Eight
                || !matches!(img.color, ColorType::Grayscale | ColorType::Indexed)
            {
                return Err(malformed(format!(
                    "expected 8-bit single-channel image, got {:?} at {:?}",
                    img.color, img.depth
                )));
            }
            LabelMap::from_raw(img.width, img.height, &img.buf)
        }
        MaskFormat::PaletteRgb => {
            let img = decode_png(bytes, Transformations::EXPAND | Transformations::STRIP_16)?;
            let channels = match img.color {
                ColorType::Rgb => 3,
                ColorType::Rgba => 4,
                other => return Err(malformed(format!("expected colour image, got {other:?}"))),
            };
            let data = img
                .buf
                .chunks_exact(channels)
                .enumerate()
                .map(|(i, px)| {
                    let rgb = [px[0], px[1], px[2]];
                    ClassId::from_color(rgb).ok_or(MaskError::UnknownPixelValue {
                        value: u32::from_be_bytes([0, rgb[0], rgb[1], rgb[2]]),
                        row: i / img.width,
                        col: i % img.width,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            LabelMap::from_classes(img.width, img.height, data)
        }
    }
}

fn encode_png(
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    data: &[u8],
) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(depth);
        enc.set_compression(png::Compression::Balanced);
        let mut writer = enc.write_header().expect("writing PNG header to memory");
        writer
            .write_image_data(data)
            .expect("writing PNG data to memory");
    }
    out
}

pub fn encode_mask(map: &LabelMap, format: MaskFormat) -> Vec<u8> {
    match format {
        MaskFormat::Indexed => encode_png(
            map.width(),
            map.height(),
            ColorType::Grayscale,
            BitDepth::Eight,
            &map.to_raw(),
        ),
        MaskFormat::PaletteRgb => {
            let rgb: Vec<u8> = map.classes().iter().flat_map(|c| c.color()).collect();
            encode_png(
                map.width(),
                map.height(),
                ColorType::Rgb,
                BitDepth::Eight,
                &rgb,
            )
        }
    }
}

/// Writes `values` (expected in `[0, 1]`) as a 16-bit grayscale PNG.
pub fn encode_intensity16(width: usize, height: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(values.len(), width * height);
    let data: Vec<u8> = values
        .iter()
        .flat_map(|v| ((v.clamp(0.0, 1.0) * 65535.0).round() as u16).to_be_bytes())
        .collect();
    encode_png(
        width,
        height,
        ColorType::Grayscale,
        BitDepth::Sixteen,
        &data,
    )
}

/// Reads an 8- or 16-bit grayscale PNG as raw sample values.
pub fn decode_intensity(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), MaskError> {
    let img = decode_png(bytes, Transformations::IDENTITY)?;
    if img.color != ColorType::Grayscale {
        return Err(malformed(format!(
            "expected grayscale intensity, got {:?}",
            img.color
        )));
    }
    let values = match img.depth {
        BitDepth::Eight => img.buf.iter().map(|&v| v as f64).collect(),
        BitDepth::Sixteen => img
            .buf
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64)
            .collect(),
        other => return Err(malformed(format!("unsupported intensity depth {other:?}"))),
    };
    Ok((img.width, img.height, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labelmap::class_histogram;

    fn indexed_png(width: u32, height: u32, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        let mut enc = Encoder::new(&mut out, width, height);
        enc.set_color(ColorType::Indexed);
        enc.set_depth(BitDepth::Eight);
        let palette: Vec<u8> = ClassId::ALL.iter().flat_map(|c| c.color()).collect();
        enc.set_palette(palette);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(data).unwrap();
        drop(w);
        out
    }

    #[test]
    fn decodes_indexed_identity() {
        let png = indexed_png(2, 2, &[0, 1, 2, 4]);
        let m = decode_mask(&png, MaskFormat::Indexed).unwrap();
        assert_eq!(m.to_raw(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn rejects_value_seven() {
        let png = encode_png(2, 1, ColorType::Grayscale, BitDepth::Eight, &[0, 7]);
        let err = decode_mask(&png, MaskFormat::Indexed).unwrap_err();
        assert!(matches!(err, MaskError::UnknownPixelValue { value: 7, .. }));
    }

    #[test]
    fn cyan_is_oil() {
        let png = encode_png(1, 1, ColorType::Rgb, BitDepth::Eight, &[0, 255, 255]);
        let m = decode_mask(&png, MaskFormat::PaletteRgb).unwrap();
        assert_eq!(m.get(0, 0), ClassId::Oil);
        let png = encode_png(1, 1, ColorType::Rgb, BitDepth::Eight, &[255, 0, 0]);
        assert_eq!(
            decode_mask(&png, MaskFormat::PaletteRgb).unwrap().get(0, 0),
            ClassId::LookAlike
        );
    }

    #[test]
    fn all_sea_encodes_uniform_zero() {
        let m = LabelMap::filled(4, 4, ClassId::Sea);
        let png = encode_mask(&m, MaskFormat::Indexed);
        let img = decode_png(&png, Transformations::IDENTITY).unwrap();
        assert!(img.buf.iter().all(|&v| v == 0));
    }

    #[test]
    fn five_classes_five_values() {
        let m = LabelMap::from_raw(5, 1, &[4, 3, 2, 1, 0]).unwrap();
        for format in [MaskFormat::Indexed, MaskFormat::PaletteRgb] {
            let png = encode_mask(&m, format);
            let img = decode_png(&png, Transformations::IDENTITY).unwrap();
            let channels = if format == MaskFormat::Indexed { 1 } else { 3 };
            let mut distinct: Vec<&[u8]> = img.buf.chunks(channels).collect();
            distinct.sort();
            distinct.dedup();
            assert_eq!(distinct.len(), 5);
            assert_eq!(class_histogram(&decode_mask(&png, format).unwrap()), [1; 5]);
        }
    }

    #[test]
    fn canonical_bytes_are_stable() {
        let m = LabelMap::from_raw(3, 2, &[0, 1, 2, 3, 4, 0]).unwrap();
        let png = encode_mask(&m, MaskFormat::Indexed);
        let again = encode_mask(
            &decode_mask(&png, MaskFormat::Indexed).unwrap(),
            MaskFormat::Indexed,
        );
        assert_eq!(png, again);
    }

    #[test]
    fn intensity16_roundtrip() {
        let vals = vec![0.0, 0.5, 1.0, 0.25];
        let png = encode_intensity16(2, 2, &vals);
        let (w, h, back) = decode_intensity(&png).unwrap();
        assert_eq!((w, h), (2, 2));
        assert_eq!(back, vec![0.0, 32768.0, 65535.0, 16384.0]);
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(
            decode_mask(b"not a png", MaskFormat::Indexed),
            Err(MaskError::MalformedImage(_))
        ));
    }
}
