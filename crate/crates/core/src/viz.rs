//! Debug overlays: landmark dots, the predicted watch center, mask outlines.

use crate::imaging::{BinaryMask, ImageBuffer};

pub const RED: [u8; 3] = [255, 0, 0];
pub const GREEN: [u8; 3] = [0, 255, 0];
pub const BLUE: [u8; 3] = [0, 0, 255];

/// Filled disk of `color`, clipped to the image. Expects RGB.
pub fn draw_dot(img: &mut ImageBuffer, center: (f64, f64), radius: f64, color: [u8; 3]) {
    debug_assert_eq!(img.channels(), 3);
    let (cx, cy) = center;
    if !cx.is_finite() || !cy.is_finite() {
        return;
    }
    let x0 = (cx - radius).floor().max(0.0) as i64;
    let y0 = (cy - radius).floor().max(0.0) as i64;
    let x1 = ((cx + radius).ceil() as i64).min(img.width() as i64 - 1);
    let y1 = ((cy + radius).ceil() as i64).min(img.height() as i64 - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= radius * radius {
                img.pixel_mut(x as u32, y as u32).copy_from_slice(&color);
            }
        }
    }
}

/// Colors mask pixels that have an unset 4-neighbour (or touch the border).
pub fn draw_outline(img: &mut ImageBuffer, mask: &BinaryMask, color: [u8; 3]) {
    let (w, h) = mask.dims();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x == w - 1
                || y == h - 1
                || !mask.get(x - 1, y)
                || !mask.get(x + 1, y)
                || !mask.get(x, y - 1)
                || !mask.get(x, y + 1);
            if edge {
                img.pixel_mut(x, y).copy_from_slice(&color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_is_clipped() {
        let mut img = ImageBuffer::filled(5, 5, 3, 0).unwrap();
        draw_dot(&mut img, (0.0, 0.0), 1.0, RED);
        assert_eq!(img.pixel(0, 0), &RED);
        assert_eq!(img.pixel(1, 0), &RED);
        assert_eq!(img.pixel(1, 1), &[0, 0, 0]);
    }

    #[test]
    fn outline_of_block() {
        let mut mask = BinaryMask::empty(5, 5);
        for y in 1..4 {
            for x in 1..4 {
                mask.set(x, y, true);
            }
        }
        let mut img = ImageBuffer::filled(5, 5, 3, 0).unwrap();
        draw_outline(&mut img, &mask, BLUE);
        assert_eq!(img.pixel(1, 1), &BLUE);
        assert_eq!(img.pixel(2, 2), &[0, 0, 0]);
    }
}
