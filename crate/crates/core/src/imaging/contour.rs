//! Connected components and closed boundary tracing.

use super::{BinaryImage, CellContour, Rect};

/// 8-neighborhood in clockwise order starting from west.
const DIRS: [(isize, isize); 8] =
    [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

struct Component {
    pixels: Vec<(usize, usize)>,
    bbox: Rect,
    touches_border: bool,
    start: (usize, usize),
}

/// Labels 8-connected foreground components in scanline first-encounter order.
fn components(mask: &BinaryImage) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let mut label = vec![usize::MAX; w * h];
    let mut out: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || label[y * w + x] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut pixels = Vec::new();
            let mut stack = vec![(x, y)];
            label[y * w + x] = id;
            let (mut x0, mut y0, mut x1, mut y1) = (x, y, x, y);
            let mut touches = false;
            while let Some((cx, cy)) = stack.pop() {
                pixels.push((cx, cy));
                x0 = x0.min(cx);
                y0 = y0.min(cy);
                x1 = x1.max(cx);
                y1 = y1.max(cy);
                if cx == 0 || cy == 0 || cx == w - 1 || cy == h - 1 {
                    touches = true;
                }
                for (dx, dy) in DIRS {
                    let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if mask.get(nx, ny) && label[ny * w + nx] == usize::MAX {
                        label[ny * w + nx] = id;
                        stack.push((nx, ny));
                    }
                }
            }
            out.push(Component {
                pixels,
                bbox: Rect { x: x0, y: y0, w: x1 - x0 + 1, h: y1 - y0 + 1 },
                touches_border: touches,
                start: (x, y),
            });
        }
    }
    out
}

/// Moore-neighbor boundary trace. The sweep restarts clockwise after the
/// backtrack direction; the walk stops on the first return to the start
/// pixel, with an iteration cap as a backstop for pathological masks.
fn moore_trace<F: Fn(isize, isize) -> bool>(
    start: (usize, usize),
    fg: F,
    max_len: usize,
) -> Vec<(usize, usize)> {
    let mut contour = vec![start];
    let mut cur = (start.0 as isize, start.1 as isize);
    // The scanline start pixel was entered from the west (background).
    let mut backtrack = 0usize;
    loop {
        let mut moved = false;
        for i in 0..8 {
            let d = (backtrack + 1 + i) % 8;
            let (nx, ny) = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if fg(nx, ny) {
                let next = (nx as usize, ny as usize);
                if next == start && contour.len() >= 3 {
                    return contour;
                }
                if next != start {
                    contour.push(next);
                }
                backtrack = (d + 5) % 8;
                cur = (nx, ny);
                moved = true;
                break;
            }
        }
        if !moved {
            return contour; // isolated pixel
        }
        if contour.len() > max_len {
            log::warn!("boundary trace exceeded {max_len} points; truncated");
            return contour;
        }
    }
}

/// Extracts one closed boundary per connected foreground component with area
/// at least `min_area`, in deterministic scanline first-encounter order.
/// Components touching the image border are kept and flagged. Components
/// whose traced boundary has fewer than 8 points are discarded as specks.
///
/// ROIs are rendered from the mask; callers with the source image attach the
/// real crop afterwards.
pub fn extract_contours(mask: &BinaryImage, min_area: usize) -> Vec<CellContour> {
    let mut out = Vec::new();
    for comp in components(mask) {
        if comp.pixels.len() < min_area.max(1) {
            continue;
        }
        let bbox = comp.bbox;
        let mut local = BinaryImage::empty(bbox.w, bbox.h).expect("bbox is non-empty");
        for &(px, py) in &comp.pixels {
            local.set(px - bbox.x, py - bbox.y, true);
        }
        let in_comp = |x: isize, y: isize| -> bool {
            let (lx, ly) = (x - bbox.x as isize, y - bbox.y as isize);
            lx >= 0 && ly >= 0 && local.get_or_bg(lx, ly)
        };
        let trace = moore_trace(comp.start, in_comp, 8 * comp.pixels.len() + 16);
        if trace.len() < 8 {
            log::debug!(
                "component at ({}, {}) has a {}-point boundary; discarded",
                comp.start.0,
                comp.start.1,
                trace.len()
            );
            continue;
        }
        let points: Vec<[f64; 2]> =
            trace.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
        let mut cell = CellContour {
            points,
            mask: local,
            bbox,
            roi: super::RgbImage::filled(bbox.w, bbox.h, [255, 255, 255])
                .expect("bbox is non-empty"),
            is_split_from_cluster: false,
            touches_border: comp.touches_border,
        };
        cell.render_mask_roi();
        out.push(cell);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryImage {
        let mut m = BinaryImage::empty(w, h).unwrap();
        for y in 0..h {
            for x in 0..w {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    #[test]
    fn empty_mask_no_contours() {
        let mask = BinaryImage::empty(16, 16).unwrap();
        assert!(extract_contours(&mask, 1).is_empty());
    }

    #[test]
    fn filled_square_area_and_boundary() {
        let mut mask = BinaryImage::empty(20, 20).unwrap();
        for y in 5..15 {
            for x in 5..15 {
                mask.set(x, y, true);
            }
        }
        let contours = extract_contours(&mask, 1);
        assert_eq!(contours.len(), 1);
        let c = &contours[0];
        assert_eq!(c.area(), 100);
        assert_eq!(c.bbox, Rect { x: 5, y: 5, w: 10, h: 10 });
        assert_eq!(c.points.len(), 36, "10x10 square has a 36-pixel boundary ring");
        assert!(!c.touches_border);
    }

    #[test]
    fn two_discs_match_flood_fill_oracle() {
        let mut mask = disc_mask(80, 40, 18.0, 20.0, 9.0);
        let right = disc_mask(80, 40, 58.0, 20.0, 12.0);
        for y in 0..40 {
            for x in 0..80 {
                if right.get(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        let contours = extract_contours(&mask, 1);
        assert_eq!(contours.len(), 2);

        // flood-fill oracle for per-component pixel counts
        let mut seen = vec![false; 80 * 40];
        let mut oracle_areas = Vec::new();
        for y in 0..40usize {
            for x in 0..80usize {
                if mask.get(x, y) && !seen[y * 80 + x] {
                    let mut stack = vec![(x, y)];
                    seen[y * 80 + x] = true;
                    let mut count = 0;
                    while let Some((cx, cy)) = stack.pop() {
                        count += 1;
                        for dy in -1isize..=1 {
                            for dx in -1isize..=1 {
                                let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                                if nx >= 0
                                    && ny >= 0
                                    && nx < 80
                                    && ny < 40
                                    && mask.get(nx as usize, ny as usize)
                                    && !seen[ny as usize * 80 + nx as usize]
                                {
                                    seen[ny as usize * 80 + nx as usize] = true;
                                    stack.push((nx as usize, ny as usize));
                                }
                            }
                        }
                    }
                    oracle_areas.push(count);
                }
            }
        }
        let areas: Vec<usize> = contours.iter().map(|c| c.area()).collect();
        assert_eq!(areas, oracle_areas);
    }

    #[test]
    fn min_area_filters_small_components() {
        let mut mask = BinaryImage::empty(32, 32).unwrap();
        for y in 2..6 {
            for x in 2..6 {
                mask.set(x, y, true); // 16 px blob
            }
        }
        for y in 12..28 {
            for x in 12..28 {
                mask.set(x, y, true); // 256 px blob
            }
        }
        let contours = extract_contours(&mask, 100);
        assert_eq!(contours.len(), 1);
        assert_eq!(contours[0].area(), 256);
    }

    #[test]
    fn border_component_kept_and_flagged() {
        let mask = disc_mask(30, 30, 0.0, 15.0, 8.0);
        let contours = extract_contours(&mask, 1);
        assert_eq!(contours.len(), 1);
        assert!(contours[0].touches_border);
    }

    #[test]
    fn mask_area_equals_polygon_enclosed_count() {
        // point-in-polygon oracle on small instances
        let shapes: Vec<BinaryImage> = vec![
            disc_mask(26, 26, 12.0, 12.0, 7.0),
            {
                let mut m = BinaryImage::empty(20, 14).unwrap();
                for y in 3..11 {
                    for x in 4..17 {
                        m.set(x, y, true);
                    }
                }
                m
            },
        ];
        for mask in shapes {
            let contours = extract_contours(&mask, 1);
            assert_eq!(contours.len(), 1);
            let c = &contours[0];
            let poly = &c.points;
            // count lattice points strictly inside or on the polygon
            let on_polygon = |px: f64, py: f64| -> bool {
                poly.iter().any(|p| p[0] == px && p[1] == py)
            };
            let inside = |px: f64, py: f64| -> bool {
                let mut winding = false;
                for i in 0..poly.len() {
                    let a = poly[i];
                    let b = poly[(i + 1) % poly.len()];
                    if (a[1] > py) != (b[1] > py) {
                        let t = (py - a[1]) / (b[1] - a[1]);
                        let xi = a[0] + t * (b[0] - a[0]);
                        if px < xi {
                            winding = !winding;
                        }
                    }
                }
                winding
            };
            let mut count = 0;
            for y in 0..mask.height() {
                for x in 0..mask.width() {
                    let (px, py) = (x as f64, y as f64);
                    if on_polygon(px, py) || inside(px, py) {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, c.area(), "polygon-enclosed count vs mask area");
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let mask = disc_mask(40, 40, 20.0, 20.0, 11.0);
        let a = extract_contours(&mask, 1);
        let b = extract_contours(&mask, 1);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.points, y.points);
            assert_eq!(x.bbox, y.bbox);
        }
    }
}
