//! Binary morphology with a disc structuring element.

use super::BinaryImage;
use crate::error::CoreError;
use crate::Result;

fn disc_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let r2 = (radius * radius) as isize;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r2 {
                offsets.push((dx, dy));
            }
        }
    }
    offsets
}

/// Erosion: a pixel stays foreground only if the whole disc fits inside the
/// foreground (out-of-bounds counts as background).
pub fn erode(img: &BinaryImage, radius: usize) -> Result<BinaryImage> {
    if radius == 0 {
        return Err(CoreError::InvalidParameter("radius must be >= 1".into()));
    }
    let offsets = disc_offsets(radius);
    let mut out = BinaryImage::empty(img.width(), img.height())?;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !img.get(x, y) {
                continue;
            }
            let keep = offsets
                .iter()
                .all(|&(dx, dy)| img.get_or_bg(x as isize + dx, y as isize + dy));
            if keep {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

/// Dilation: a pixel becomes foreground if any disc neighbor is foreground.
pub fn dilate(img: &BinaryImage, radius: usize) -> Result<BinaryImage> {
    if radius == 0 {
        return Err(CoreError::InvalidParameter("radius must be >= 1".into()));
    }
    let offsets = disc_offsets(radius);
    let mut out = BinaryImage::empty(img.width(), img.height())?;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let hit = offsets
                .iter()
                .any(|&(dx, dy)| img.get_or_bg(x as isize + dx, y as isize + dy));
            if hit {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

/// Opening: erosion followed by dilation. Removes connected components that
/// cannot contain the structuring element.
pub fn morphological_open(img: &BinaryImage, radius: usize) -> Result<BinaryImage> {
    dilate(&erode(img, radius)?, radius)
}
