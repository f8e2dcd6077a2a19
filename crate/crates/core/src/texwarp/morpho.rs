//! Exact Euclidean distance transforms and the morphology built on them:
//! disc erosion of mask segments and nearest-pixel color extrapolation.

use image::RgbaImage;

use crate::annotation::SegmentationMask;

/// Squared distance to the nearest site pixel plus the site index, for every
/// pixel. Exact Euclidean metric via the two-pass lower-envelope transform.
pub struct NearestSiteField {
    pub width: usize,
    pub height: usize,
    /// Squared distance in pixels; `f64::INFINITY` when there is no site.
    pub dist_sq: Vec<f64>,
    /// Row-major index of the nearest site; `u32::MAX` when none.
    pub site: Vec<u32>,
}

/// Computes the nearest-site field for `sites[idx] == true` pixels, measuring
/// center-to-center distances.
pub fn nearest_site_transform(width: usize, height: usize, sites: &[bool]) -> NearestSiteField {
    assert_eq!(sites.len(), width * height);
    // Pass 1: per column, nearest site row (two sweeps).
    let mut col_dist = vec![f64::INFINITY; width * height];
    let mut col_site_row = vec![u32::MAX; width * height];
    for x in 0..width {
        let mut last: Option<usize> = None;
        for y in 0..height {
            if sites[y * width + x] {
                last = Some(y);
            }
            if let Some(sy) = last {
                col_dist[y * width + x] = ((y - sy) * (y - sy)) as f64;
                col_site_row[y * width + x] = sy as u32;
            }
        }
        last = None;
        for y in (0..height).rev() {
            if sites[y * width + x] {
                last = Some(y);
            }
            if let Some(sy) = last {
                let d = ((sy - y) * (sy - y)) as f64;
                if d < col_dist[y * width + x] {
                    col_dist[y * width + x] = d;
                    col_site_row[y * width + x] = sy as u32;
                }
            }
        }
    }

    // Pass 2: per row, lower envelope of parabolas rooted at (x', col_dist).
    let mut dist_sq = vec![f64::INFINITY; width * height];
    let mut site = vec![u32::MAX; width * height];
    let mut v = vec![0usize; width]; // parabola roots (x' values)
    let mut z = vec![0.0f64; width + 1]; // envelope breakpoints
    for y in 0..height {
        let f = |x: usize| col_dist[y * width + x];
        let mut k = 0usize;
        let mut any = false;
        for q in 0..width {
            if !f(q).is_finite() {
                continue;
            }
            if !any {
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                any = true;
                k = 0;
                continue;
            }
            loop {
                let p = v[k];
                let s = ((f(q) + (q * q) as f64) - (f(p) + (p * p) as f64))
                    / (2.0 * q as f64 - 2.0 * p as f64);
                if s <= z[k] {
                    if k == 0 {
                        v[0] = q;
                        z[0] = f64::NEG_INFINITY;
                        z[1] = f64::INFINITY;
                        break;
                    }
                    k -= 1;
                    continue;
                }
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
        if !any {
            continue;
        }
        let mut k2 = 0usize;
        for x in 0..width {
            while z[k2 + 1] < x as f64 {
                k2 += 1;
            }
            let p = v[k2];
            let dx = x as f64 - p as f64;
            dist_sq[y * width + x] = dx * dx + f(p);
            let sy = col_site_row[y * width + p];
            site[y * width + x] = sy * width as u32 + p as u32;
        }
    }
    NearestSiteField {
        width,
        height,
        dist_sq,
        site,
    }
}

/// Distance from each labeled pixel to the nearest non-`label` pixel, with
/// everything outside the raster counting as background.
fn distance_to_complement(mask: &SegmentationMask, label: u8) -> Vec<f64> {
    let w = mask.width as usize;
    let h = mask.height as usize;
    let sites: Vec<bool> = mask.data.iter().map(|&v| v != label).collect();
    let field = nearest_site_transform(w, h, &sites);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if mask.data[idx] != label {
                continue;
            }
            let interior = field.dist_sq[idx].sqrt();
            let border = (x + 1).min(y + 1).min(w - x).min(h - y) as f64;
            out[idx] = interior.min(border);
        }
    }
    out
}

/// Morphological erosion of one label's region by a disc of `radius` pixels;
/// other labels are untouched. Eroded pixels become background. Returns the
/// eroded mask and whether the region vanished entirely.
pub fn erode_segment(mask: &SegmentationMask, label: u8, radius: f64) -> (SegmentationMask, bool) {
    assert!(radius >= 0.0);
    if radius == 0.0 {
        let emptied = mask.count_label(label) == 0;
        return (mask.clone(), emptied);
    }
    let dist = distance_to_complement(mask, label);
    let mut out = mask.clone();
    let mut survived = 0usize;
    for (idx, d) in dist.iter().enumerate() {
        if mask.data[idx] == label {
            if *d > radius {
                survived += 1;
            } else {
                out.data[idx] = 0;
            }
        }
    }
    (out, survived == 0)
}

/// Nearest-site color extrapolation: every non-region pixel within `band`
/// pixels of the region takes the color of its nearest region pixel.
pub fn extrapolate_colors(image: &RgbaImage, region: &[bool], band: f64) -> RgbaImage {
    assert!(band >= 0.0);
    let (w, h) = image.dimensions();
    assert_eq!(region.len(), (w * h) as usize);
    let mut out = image.clone();
    if band == 0.0 {
        return out;
    }
    let field = nearest_site_transform(w as usize, h as usize, region);
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if region[idx] {
                continue;
            }
            let d2 = field.dist_sq[idx];
            if d2.is_finite() && d2.sqrt() <= band {
                let s = field.site[idx];
                let sx = s % w;
                let sy = s / w;
                out.put_pixel(x, y, *image.get_pixel(sx, sy));
            }
        }
    }
    out
}
