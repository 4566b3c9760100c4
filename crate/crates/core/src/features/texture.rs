//! Texture descriptors: first-order histogram statistics plus gray-level
//! co-occurrence matrices and their five derived features.
//!
//! Co-occurrence matrices are symmetric and normalized; both pixels of a
//! pair must lie under the cell mask. Configurations cover distances
//! {1, 2, 3} and angles {0, 45, 90, 135} degrees, enumerated distance-major,
//! so configuration 1 is (d=1, 0 deg) and configuration 12 is (d=3, 135 deg).

use crate::error::CoreError;
use crate::imaging::{BinaryImage, CellContour, GrayImage};
use crate::Result;

/// 2 histogram features + 5 co-occurrence features x 12 configurations.
pub const TEXTURE_FEATURE_COUNT: usize = 62;

/// The 12 (distance, angle) configurations in canonical order.
pub const GLCM_CONFIGS: [GlcmConfig; 12] = [
    GlcmConfig { distance: 1, angle_deg: 0 },
    GlcmConfig { distance: 1, angle_deg: 45 },
    GlcmConfig { distance: 1, angle_deg: 90 },
    GlcmConfig { distance: 1, angle_deg: 135 },
    GlcmConfig { distance: 2, angle_deg: 0 },
    GlcmConfig { distance: 2, angle_deg: 45 },
    GlcmConfig { distance: 2, angle_deg: 90 },
    GlcmConfig { distance: 2, angle_deg: 135 },
    GlcmConfig { distance: 3, angle_deg: 0 },
    GlcmConfig { distance: 3, angle_deg: 45 },
    GlcmConfig { distance: 3, angle_deg: 90 },
    GlcmConfig { distance: 3, angle_deg: 135 },
];

/// One co-occurrence configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmConfig {
    pub distance: usize,
    pub angle_deg: u16,
}

impl GlcmConfig {
    /// Pixel offset of the configuration; 45 degrees points up-right
    /// (y decreases upward in image coordinates).
    pub fn offset(&self) -> (isize, isize) {
        let d = self.distance as isize;
        match self.angle_deg % 180 {
            0 => (d, 0),
            45 => (d, -d),
            90 => (0, -d),
            135 => (-d, -d),
            other => panic!("unsupported angle {other}"),
        }
    }
}

/// Normalized symmetric co-occurrence matrix.
#[derive(Debug, Clone)]
pub struct Glcm {
    pub levels: usize,
    pub config: GlcmConfig,
    /// Row-major `levels x levels` probabilities, summing to 1.
    pub p: Vec<f64>,
}

impl Glcm {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels + j]
    }
}

/// Uniform quantization of [0, 255] into `levels` gray tones:
/// `level = pixel * levels / 256`.
pub fn quantize_gray(roi: &GrayImage, levels: usize) -> Result<Vec<u8>> {
    if levels < 2 || levels > 256 {
        return Err(CoreError::InvalidParameter(format!(
            "levels must be in [2, 256], got {levels}"
        )));
    }
    Ok(roi.pixels().iter().map(|&p| ((p as usize * levels) / 256) as u8).collect())
}

/// Builds the symmetric normalized co-occurrence matrix of the masked,
/// quantized region. Pairs are counted in both directions; a pair counts
/// only when both pixels are under the mask.
pub fn glcm(
    roi: &GrayImage,
    mask: &BinaryImage,
    distance: usize,
    angle: f64,
    levels: usize,
) -> Result<Glcm> {
    if !(1..=3).contains(&distance) {
        return Err(CoreError::InvalidParameter(format!(
            "distance must be 1, 2 or 3, got {distance}"
        )));
    }
    let deg = angle.to_degrees().rem_euclid(180.0);
    let angle_deg = [0u16, 45, 90, 135]
        .into_iter()
        .find(|&a| (deg - a as f64).abs() < 1e-6 || (deg - a as f64 - 180.0).abs() < 1e-6)
        .ok_or_else(|| {
            CoreError::InvalidParameter(format!("angle {angle} not a multiple of pi/4"))
        })?;
    let config = GlcmConfig { distance, angle_deg };
    glcm_with_config(roi, mask, config, levels)
}

fn glcm_with_config(
    roi: &GrayImage,
    mask: &BinaryImage,
    config: GlcmConfig,
    levels: usize,
) -> Result<Glcm> {
    if roi.width() != mask.width() || roi.height() != mask.height() {
        return Err(CoreError::Image("ROI and mask dimensions differ".into()));
    }
    let q = quantize_gray(roi, levels)?;
    let (dx, dy) = config.offset();
    let (w, h) = (roi.width() as isize, roi.height() as isize);
    let mut counts = vec![0u64; levels * levels];
    let mut total = 0u64;
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as usize, y as usize) {
                continue;
            }
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            if !mask.get(nx as usize, ny as usize) {
                continue;
            }
            let a = q[(y * w + x) as usize] as usize;
            let b = q[(ny * w + nx) as usize] as usize;
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
            total += 2;
        }
    }
    if total == 0 {
        return Err(CoreError::Image(format!(
            "no valid pixel pairs for distance {} angle {}",
            config.distance, config.angle_deg
        )));
    }
    let p = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Glcm { levels, config, p })
}

/// The five co-occurrence features: contrast, dissimilarity, homogeneity,
/// energy and correlation. Constant texture (zero marginal deviation) has
/// correlation defined as 1.
pub fn glcm_features(g: &Glcm) -> (f64, f64, f64, f64, f64) {
    let n = g.levels;
    let mut contrast = 0.0;
    let mut dissimilarity = 0.0;
    let mut homogeneity = 0.0;
    let mut energy_sq = 0.0;
    // marginal means and deviations
    let mut mu_i = 0.0;
    let mut mu_j = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.get(i, j);
            mu_i += i as f64 * p;
            mu_j += j as f64 * p;
        }
    }
    let mut var_i = 0.0;
    let mut var_j = 0.0;
    let mut cov = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.get(i, j);
            let d = i as f64 - j as f64;
            contrast += p * d * d;
            dissimilarity += p * d.abs();
            homogeneity += p / (1.0 + d * d);
            energy_sq += p * p;
            var_i += p * (i as f64 - mu_i).powi(2);
            var_j += p * (j as f64 - mu_j).powi(2);
            cov += p * (i as f64 - mu_i) * (j as f64 - mu_j);
        }
    }
    let energy = energy_sq.sqrt();
    let (si, sj) = (var_i.sqrt(), var_j.sqrt());
    let correlation = if si > 0.0 && sj > 0.0 { cov / (si * sj) } else { 1.0 };
    (contrast, dissimilarity, homogeneity, energy, correlation)
}

/// Skewness and excess kurtosis of the masked gray values, standardized with
/// the sample standard deviation (N-1 divisor). Zero deviation maps both to 0.
pub fn histogram_features(roi: &GrayImage, mask: &BinaryImage) -> Result<(f64, f64)> {
    if roi.width() != mask.width() || roi.height() != mask.height() {
        return Err(CoreError::Image("ROI and mask dimensions differ".into()));
    }
    let values: Vec<f64> = roi
        .pixels()
        .iter()
        .zip(mask.pixels())
        .filter(|(_, &m)| m)
        .map(|(&p, _)| p as f64)
        .collect();
    if values.is_empty() {
        return Err(CoreError::Image("empty region under mask".into()));
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok((0.0, 0.0));
    }
    let sigma = (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sigma == 0.0 {
        return Ok((0.0, 0.0));
    }
    let skew = values.iter().map(|v| ((v - mu) / sigma).powi(3)).sum::<f64>() / n;
    let kurt = values.iter().map(|v| ((v - mu) / sigma).powi(4)).sum::<f64>() / n - 3.0;
    Ok((skew, kurt))
}

/// The 62 texture values: skewness, kurtosis, then each co-occurrence
/// feature across the 12 configurations.
pub fn texture_features(cell: &CellContour, levels: usize) -> Result<[f64; TEXTURE_FEATURE_COUNT]> {
    let gray = cell.roi.to_gray();
    let (skew, kurt) = histogram_features(&gray, &cell.mask)?;
    let mut glcms = Vec::with_capacity(GLCM_CONFIGS.len());
    for config in GLCM_CONFIGS {
        glcms.push(glcm_with_config(&gray, &cell.mask, config, levels)?);
    }
    let mut out = [0.0f64; TEXTURE_FEATURE_COUNT];
    out[0] = skew;
    out[1] = kurt;
    for (k, g) in glcms.iter().enumerate() {
        let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(g);
        out[2 + k] = contrast;
        out[2 + 12 + k] = dissimilarity;
        out[2 + 24 + k] = homogeneity;
        out[2 + 36 + k] = energy;
        out[2 + 48 + k] = correlation;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_mask(w: usize, h: usize) -> BinaryImage {
        BinaryImage::new(w, h, vec![true; w * h]).unwrap()
    }

    #[test]
    fn quantize_identity_and_bins() {
        let img = GrayImage::new(4, 1, vec![0, 96, 128, 255]).unwrap();
        let q256 = quantize_gray(&img, 256).unwrap();
        assert_eq!(q256, vec![0, 96, 128, 255]);
        let q8 = quantize_gray(&img, 8).unwrap();
        assert_eq!(q8, vec![0, 3, 4, 7]);
        assert!(quantize_gray(&img, 1).is_err());
    }

    #[test]
    fn constant_roi_single_entry() {
        let img = GrayImage::filled(6, 6, 200).unwrap();
        let g = glcm(&img, &full_mask(6, 6), 1, 0.0, 8).unwrap();
        let level = (200usize * 8 / 256) as usize;
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == level && j == level { 1.0 } else { 0.0 };
                assert_eq!(g.get(i, j), expect);
            }
        }
    }

    #[test]
    fn two_by_two_hand_case() {
        // [[0,1],[0,1]] at 2 levels, distance 1, angle 0:
        // directed pairs (0,1) twice; symmetric P = [[0,.5],[.5,0]]
        let img = GrayImage::new(2, 2, vec![0, 255, 0, 255]).unwrap();
        let g = glcm(&img, &full_mask(2, 2), 1, 0.0, 2).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(g.get(0, 1), 0.5);
        assert_eq!(g.get(1, 0), 0.5);
        assert_eq!(g.get(1, 1), 0.0);
    }

    #[test]
    fn hand_case_feature_values() {
        let img = GrayImage::new(2, 2, vec![0, 255, 0, 255]).unwrap();
        let g = glcm(&img, &full_mask(2, 2), 1, 0.0, 2).unwrap();
        let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(&g);
        assert!((contrast - 1.0).abs() < 1e-12);
        assert!((dissimilarity - 1.0).abs() < 1e-12);
        assert!((homogeneity - 0.5).abs() < 1e-12);
        assert!((energy - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_glcm_collapses_features() {
        let img = GrayImage::filled(4, 4, 10).unwrap();
        let g = glcm(&img, &full_mask(4, 4), 1, 0.0, 8).unwrap();
        let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(&g);
        assert_eq!(contrast, 0.0);
        assert_eq!(dissimilarity, 0.0);
        assert_eq!(homogeneity, 1.0);
        assert_eq!(energy, 1.0);
        assert_eq!(correlation, 1.0);
    }

    /// Brute-force pair enumeration oracle, written independently of the
    /// implementation's counting loop.
    fn oracle_glcm(
        img: &GrayImage,
        mask: &BinaryImage,
        dx: isize,
        dy: isize,
        levels: usize,
    ) -> Vec<f64> {
        let q: Vec<usize> =
            img.pixels().iter().map(|&p| (p as usize * levels) / 256).collect();
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mut counts = vec![0u64; levels * levels];
        for y in 0..h {
            for x in 0..w {
                for (ox, oy) in [(dx, dy), (-dx, -dy)] {
                    let (nx, ny) = (x + ox, y + oy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    if mask.get(x as usize, y as usize) && mask.get(nx as usize, ny as usize) {
                        let a = q[(y * w + x) as usize];
                        let b = q[(ny * w + nx) as usize];
                        counts[a * levels + b] += 1;
                    }
                }
            }
        }
        let total: u64 = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    #[test]
    fn random_roi_matches_pair_enumeration_oracle_all_configs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for trial in 0..50 {
            let pixels: Vec<u8> = (0..64).map(|_| rng.random_range(0..=255) as u8).collect();
            let img = GrayImage::new(8, 8, pixels).unwrap();
            let mask_bits: Vec<bool> = (0..64).map(|_| rng.random_range(0..5) != 0).collect();
            let mask = BinaryImage::new(8, 8, mask_bits).unwrap();
            for config in GLCM_CONFIGS {
                let (dx, dy) = config.offset();
                let got = match glcm(
                    &img,
                    &mask,
                    config.distance,
                    (config.angle_deg as f64).to_radians(),
                    8,
                ) {
                    Ok(g) => g,
                    Err(_) => continue, // mask left no valid pairs
                };
                let expect = oracle_glcm(&img, &mask, dx, dy, 8);
                for (a, b) in got.p.iter().zip(&expect) {
                    assert!((a - b).abs() < 1e-12, "trial {trial} config {config:?}");
                }
            }
        }
    }

    #[test]
    fn glcm_feature_bounds_and_sum() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let pixels: Vec<u8> = (0..144).map(|_| rng.random_range(0..=255) as u8).collect();
            let img = GrayImage::new(12, 12, pixels).unwrap();
            let g = glcm(&img, &full_mask(12, 12), 2, std::f64::consts::FRAC_PI_4, 8).unwrap();
            assert!((g.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(&g);
            assert!(contrast >= 0.0);
            assert!(dissimilarity >= 0.0);
            assert!(homogeneity > 0.0 && homogeneity <= 1.0);
            assert!(energy > 0.0 && energy <= 1.0);
            assert!((-1.0..=1.0).contains(&correlation));
        }
    }

    #[test]
    fn glcm_matches_double_sum_oracle_exactly() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        // random valid symmetric normalized P over 8 levels
        let mut p = vec![0.0f64; 64];
        for i in 0..8 {
            for j in i..8 {
                let v = rng.random_range(0.0..1.0);
                p[i * 8 + j] = v;
                p[j * 8 + i] = v;
            }
        }
        let sum: f64 = p.iter().sum();
        for v in &mut p {
            *v /= sum;
        }
        let g = Glcm { levels: 8, config: GLCM_CONFIGS[0], p: p.clone() };
        let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(&g);

        // independent double-sum oracle
        let mut oc = 0.0;
        let mut od = 0.0;
        let mut oh = 0.0;
        let mut oe = 0.0;
        let mut mu_i = 0.0;
        let mut mu_j = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                mu_i += i as f64 * p[i * 8 + j];
                mu_j += j as f64 * p[i * 8 + j];
            }
        }
        let mut si = 0.0;
        let mut sj = 0.0;
        let mut num = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let pij = p[i * 8 + j];
                oc += pij * ((i as f64 - j as f64).powi(2));
                od += pij * (i as f64 - j as f64).abs();
                oh += pij / (1.0 + (i as f64 - j as f64).powi(2));
                oe += pij * pij;
                si += pij * (i as f64 - mu_i).powi(2);
                sj += pij * (j as f64 - mu_j).powi(2);
                num += pij * (i as f64 - mu_i) * (j as f64 - mu_j);
            }
        }
        assert!((contrast - oc).abs() < 1e-12);
        assert!((dissimilarity - od).abs() < 1e-12);
        assert!((homogeneity - oh).abs() < 1e-12);
        assert!((energy - oe.sqrt()).abs() < 1e-12);
        assert!((correlation - num / (si.sqrt() * sj.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn glcm_angle_theta_equals_theta_plus_pi() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pixels: Vec<u8> = (0..100).map(|_| rng.random_range(0..=255) as u8).collect();
        let img = GrayImage::new(10, 10, pixels).unwrap();
        let mask = full_mask(10, 10);
        for deg in [0.0f64, 45.0, 90.0, 135.0] {
            let a = glcm(&img, &mask, 1, deg.to_radians(), 8).unwrap();
            let b = glcm(&img, &mask, 1, (deg + 180.0).to_radians(), 8).unwrap();
            for (x, y) in a.p.iter().zip(&b.p) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mask_too_small_for_pairs_is_error() {
        let img = GrayImage::filled(5, 5, 9).unwrap();
        let mut mask = BinaryImage::empty(5, 5).unwrap();
        mask.set(2, 2, true); // single pixel: no pairs at any offset
        assert!(glcm(&img, &mask, 1, 0.0, 8).is_err());
    }

    #[test]
    fn histogram_symmetric_values_zero_skew() {
        let img = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        let (skew, _) = histogram_features(&img, &full_mask(3, 1)).unwrap();
        assert!(skew.abs() < 1e-12);
    }

    #[test]
    fn histogram_matches_direct_formula_oracle() {
        let img = GrayImage::new(4, 1, vec![0, 0, 0, 255]).unwrap();
        let (skew, kurt) = histogram_features(&img, &full_mask(4, 1)).unwrap();
        // oracle from the displayed formulas with N-1 sigma
        let vals = [0.0f64, 0.0, 0.0, 255.0];
        let mu = vals.iter().sum::<f64>() / 4.0;
        let sigma = (vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 3.0).sqrt();
        let s = vals.iter().map(|v| ((v - mu) / sigma).powi(3)).sum::<f64>() / 4.0;
        let k = vals.iter().map(|v| ((v - mu) / sigma).powi(4)).sum::<f64>() / 4.0 - 3.0;
        assert!((skew - s).abs() < 1e-12);
        assert!((kurt - k).abs() < 1e-12);
    }

    #[test]
    fn histogram_gaussian_sample_near_zero() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        // sum of uniforms approximates a normal distribution well enough here
        let values: Vec<u8> = (0..10_000)
            .map(|_| {
                let s: f64 = (0..12).map(|_| rng.random_range(0.0..1.0)).sum();
                (128.0 + 12.0 * (s - 6.0)).clamp(0.0, 255.0) as u8
            })
            .collect();
        let img = GrayImage::new(100, 100, values).unwrap();
        let (skew, kurt) = histogram_features(&img, &full_mask(100, 100)).unwrap();
        assert!(skew.abs() < 0.1, "skew {skew}");
        assert!(kurt.abs() < 0.2, "kurt {kurt}");
    }

    #[test]
    fn constant_region_zero_statistics() {
        let img = GrayImage::filled(4, 4, 99).unwrap();
        let (skew, kurt) = histogram_features(&img, &full_mask(4, 4)).unwrap();
        assert_eq!((skew, kurt), (0.0, 0.0));
    }
}
