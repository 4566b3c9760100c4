//! Overlapping-cell cluster splitting: concavity (notable point) detection,
//! per-arc ellipse completion and child mask assignment.

use serde::{Deserialize, Serialize};

use super::ellipse::{fit_ellipse, Ellipse};
use super::geometry::{convex_hull, solidity};
use super::{BinaryImage, CellContour, Rect};

/// Tunable cluster-splitting heuristics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitParams {
    /// A region is a cluster when its area exceeds this multiple of the
    /// image's median single-cell area (when known).
    pub area_gate_ratio: f64,
    /// ... or when its solidity falls below this value.
    pub solidity_gate: f64,
    /// ... or when it has at least two convexity defects deeper than this
    /// (pixels). Deep defects are also the notable points where the boundary
    /// is cut.
    pub defect_depth: f64,
    /// Minimum number of boundary points per arc for an ellipse fit.
    pub min_arc_points: usize,
    /// Median single-cell area of the image, filled in by the pipeline.
    pub median_cell_area: Option<f64>,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            area_gate_ratio: 1.8,
            solidity_gate: 0.85,
            defect_depth: 3.0,
            min_arc_points: 6,
            median_cell_area: None,
        }
    }
}

/// A convexity defect: the boundary point deepest below its hull chord.
#[derive(Debug, Clone, Copy)]
struct Defect {
    /// Index into the contour's point list.
    index: usize,
    depth: f64,
}

/// Finds the deepest boundary point between each pair of consecutive hull
/// vertices; keeps those deeper than `min_depth`.
fn convexity_defects(points: &[[f64; 2]], min_depth: f64) -> Vec<Defect> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Vec::new();
    }
    // Map hull vertices back to contour indices, in contour order.
    let mut hull_idx: Vec<usize> = hull
        .iter()
        .filter_map(|hp| points.iter().position(|p| p == hp))
        .collect();
    hull_idx.sort_unstable();
    hull_idx.dedup();
    if hull_idx.len() < 3 {
        return Vec::new();
    }

    let n = points.len();
    let mut defects = Vec::new();
    for w in 0..hull_idx.len() {
        let i = hull_idx[w];
        let j = hull_idx[(w + 1) % hull_idx.len()];
        let a = points[i];
        let b = points[j];
        let chord = (b[0] - a[0]).hypot(b[1] - a[1]);
        if chord == 0.0 {
            continue;
        }
        let mut deepest: Option<Defect> = None;
        let mut k = (i + 1) % n;
        while k != j {
            let p = points[k];
            let depth =
                ((p[0] - a[0]) * (b[1] - a[1]) - (p[1] - a[1]) * (b[0] - a[0])).abs() / chord;
            if deepest.map_or(true, |d| depth > d.depth) {
                deepest = Some(Defect { index: k, depth });
            }
            k = (k + 1) % n;
        }
        if let Some(d) = deepest {
            if d.depth > min_depth {
                defects.push(d);
            }
        }
    }
    defects.sort_by_key(|d| d.index);
    defects
}

/// Splits a cluster of overlapping cells at its notable (concavity) points,
/// completing each piece's boundary with a direct least-squares ellipse fit
/// through its arc. Non-cluster regions come back unchanged as a single
/// element. Total child mask area stays within 1.2x the parent area.
pub fn split_overlapping(contour: &CellContour, params: &SplitParams) -> Vec<CellContour> {
    let defects = convexity_defects(&contour.points, params.defect_depth);

    let area = contour.area() as f64;
    let sol = solidity(area, &contour.points);
    let area_gated = params
        .median_cell_area
        .map(|m| m > 0.0 && area > params.area_gate_ratio * m)
        .unwrap_or(false);
    let is_cluster = area_gated || sol < params.solidity_gate || defects.len() >= 2;
    if !is_cluster || defects.len() < 2 {
        return vec![contour.clone()];
    }

    // Arcs between consecutive notable points, in contour order.
    let n = contour.points.len();
    let cuts: Vec<usize> = defects.iter().map(|d| d.index).collect();
    let mut ellipses: Vec<Ellipse> = Vec::new();
    for w in 0..cuts.len() {
        let start = cuts[w];
        let end = cuts[(w + 1) % cuts.len()];
        let mut arc = Vec::new();
        let mut k = start;
        loop {
            arc.push(contour.points[k]);
            if k == end {
                break;
            }
            k = (k + 1) % n;
        }
        if arc.len() < params.min_arc_points {
            continue;
        }
        match fit_ellipse(&arc) {
            Ok(e) => ellipses.push(e),
            Err(err) => {
                log::warn!("arc of {} points discarded: {err}", arc.len());
            }
        }
    }
    if ellipses.len() < 2 {
        return vec![contour.clone()];
    }

    // Child masks: fitted ellipse interiors restricted to the slightly
    // dilated parent, inside the parent bbox.
    let bbox = contour.bbox;
    let dilated = super::morphology::dilate(&contour.mask, 1)
        .expect("radius 1 dilation of a non-empty mask");
    let parent_area = contour.area();
    let mut child_masks: Vec<BinaryImage> = ellipses
        .iter()
        .map(|e| {
            let mut m = BinaryImage::empty(bbox.w, bbox.h).expect("parent bbox is non-empty");
            for y in 0..bbox.h {
                for x in 0..bbox.w {
                    let (ax, ay) = ((bbox.x + x) as f64, (bbox.y + y) as f64);
                    if dilated.get(x, y) && e.contains(ax, ay) {
                        m.set(x, y, true);
                    }
                }
            }
            m
        })
        .collect();

    // Cap each child at the parent and the total at 1.2x the parent; when the
    // cap would be exceeded, assign every parent pixel to its nearest ellipse
    // instead, so the children partition the parent exactly.
    for m in &mut child_masks {
        if m.count() > parent_area {
            let clipped: Vec<bool> =
                m.pixels().iter().zip(contour.mask.pixels()).map(|(a, b)| *a && *b).collect();
            *m = BinaryImage::new(bbox.w, bbox.h, clipped).expect("same dimensions");
        }
    }
    let total: usize = child_masks.iter().map(|m| m.count()).sum();
    if total as f64 > 1.2 * parent_area as f64 {
        for m in &mut child_masks {
            *m = BinaryImage::empty(bbox.w, bbox.h).expect("parent bbox is non-empty");
        }
        for y in 0..bbox.h {
            for x in 0..bbox.w {
                if !contour.mask.get(x, y) {
                    continue;
                }
                let (ax, ay) = ((bbox.x + x) as f64, (bbox.y + y) as f64);
                let nearest = ellipses
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        a.normalized_distance(ax, ay)
                            .partial_cmp(&b.normalized_distance(ax, ay))
                            .unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                child_masks[nearest].set(x, y, true);
            }
        }
    }

    let mut children = Vec::new();
    for (e, mask) in ellipses.iter().zip(child_masks) {
        let count = mask.count();
        if count == 0 {
            continue;
        }
        // Tight bbox of the child inside the parent window.
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
        for y in 0..bbox.h {
            for x in 0..bbox.w {
                if mask.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        let child_bbox = Rect {
            x: bbox.x + x0,
            y: bbox.y + y0,
            w: x1 - x0 + 1,
            h: y1 - y0 + 1,
        };
        let mut local = BinaryImage::empty(child_bbox.w, child_bbox.h)
            .expect("child bbox is non-empty");
        for y in 0..child_bbox.h {
            for x in 0..child_bbox.w {
                if mask.get(x + x0, y + y0) {
                    local.set(x, y, true);
                }
            }
        }
        let mut child = CellContour {
            points: e.polygon(64),
            mask: local,
            bbox: child_bbox,
            roi: super::RgbImage::filled(child_bbox.w, child_bbox.h, [255, 255, 255])
                .expect("child bbox is non-empty"),
            is_split_from_cluster: true,
            touches_border: contour.touches_border,
        };
        child.render_mask_roi();
        children.push(child);
    }
    if children.len() < 2 {
        return vec![contour.clone()];
    }
    children
}
