//! Hand segmentation on grayscale frame sequences.
//!
//! The hand is assumed to be the brightest object in the scene (a white
//! glove on a darker background). The first frame that differs from the
//! opening frame over a large enough area marks the hand's entry; from
//! there the hand is followed frame to frame by region growing seeded at
//! the previous frame's centroid.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Second-moment contribution of a unit pixel treated as a uniform square.
const PIXEL_SELF_MOMENT: f64 = 1.0 / 12.0;

/// An 8-bit grayscale frame stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A frame with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    fn same_size(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Boolean membership per pixel, same layout as the frame it was grown in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    width: usize,
    height: usize,
    member: Vec<bool>,
}

impl RegionMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            member: vec![false; width * height],
        }
    }

    /// Builds a mask from a membership predicate over pixel coordinates.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut member = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                member.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            member,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.member[y * self.width + x]
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.member[y * self.width + x] = true;
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    /// Member pixel coordinates in row-major order.
    pub fn members(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    /// Inclusive bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        self.members().fold(None, |acc, (x, y)| match acc {
            None => Some((x, y, x, y)),
            Some((x0, y0, x1, y1)) => Some((x0.min(x), y0.min(y), x1.max(x), y1.max(y))),
        })
    }
}

/// Per-frame hand descriptor derived from the equivalent ellipse of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub centroid_x: f64,
    pub centroid_y: f64,
    /// Member pixel count.
    pub area: f64,
    /// Angle between the x axis and the major axis, in `[-pi/2, pi/2]`.
    pub orientation: f64,
    /// `sqrt(1 - (minor/major)^2)`, in `[0, 1)`.
    pub eccentricity: f64,
}

/// Thresholds for start-frame detection and tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig {
    /// Per-pixel absolute difference that counts as "changed".
    pub diff_threshold: u8,
    /// Changed-pixel count a frame must exceed to be the start frame.
    /// `None` means 0.1% of the frame's pixels.
    pub area_threshold: Option<usize>,
    /// Maximum intensity distance from the seed for region membership.
    pub tolerance: u8,
    /// Consecutive frames the hand may go missing before tracking fails.
    pub max_gap: usize,
    /// Minimum seed intensity for the seed to be considered on the glove.
    pub glove_floor: u8,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            diff_threshold: 40,
            area_threshold: None,
            tolerance: 60,
            max_gap: 3,
            glove_floor: 180,
        }
    }
}

impl TrackConfig {
    pub fn area_threshold_for(&self, frame: &Frame) -> usize {
        self.area_threshold
            .unwrap_or_else(|| (frame.width * frame.height) / 1000)
    }
}

/// Pixels whose absolute difference from `reference` exceeds `diff_threshold`.
pub fn difference_mask(reference: &Frame, frame: &Frame, diff_threshold: u8) -> Result<RegionMask> {
    if !reference.same_size(frame) {
        return Err(Error::FrameSizeMismatch {
            index: 0,
            width: reference.width,
            height: reference.height,
            found_width: frame.width,
            found_height: frame.height,
        });
    }
    let member = reference
        .pixels
        .iter()
        .zip(&frame.pixels)
        .map(|(&a, &b)| a.abs_diff(b) > diff_threshold)
        .collect();
    Ok(RegionMask {
        width: frame.width,
        height: frame.height,
        member,
    })
}

fn check_sizes(frames: &[Frame]) -> Result<()> {
    let first = &frames[0];
    for (index, f) in frames.iter().enumerate().skip(1) {
        if !f.same_size(first) {
            return Err(Error::FrameSizeMismatch {
                index,
                width: first.width,
                height: first.height,
                found_width: f.width,
                found_height: f.height,
            });
        }
    }
    Ok(())
}

/// Index of the first frame (after frame 0) whose difference from frame 0
/// covers more than `area_threshold` pixels.
pub fn detect_start_frame(
    frames: &[Frame],
    diff_threshold: u8,
    area_threshold: usize,
) -> Result<usize> {
    if frames.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "start-frame detection needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    check_sizes(frames)?;
    let reference = &frames[0];
    for (i, frame) in frames.iter().enumerate().skip(1) {
        let changed = reference
            .pixels
            .iter()
            .zip(&frame.pixels)
            .filter(|(&a, &b)| a.abs_diff(b) > diff_threshold)
            .count();
        if changed > area_threshold {
            return Ok(i);
        }
    }
    Err(Error::NoHandDetected)
}

/// Grows the maximal 8-connected region around `seed` whose intensities lie
/// within `tolerance` of the seed intensity.
///
/// The seed itself must be at least `glove_floor` bright; pass 0 to accept
/// any seed.
pub fn region_grow(
    frame: &Frame,
    seed: (usize, usize),
    tolerance: u8,
    glove_floor: u8,
) -> Result<RegionMask> {
    let (sx, sy) = seed;
    if sx >= frame.width || sy >= frame.height {
        return Err(Error::SeedOutOfBounds { x: sx, y: sy });
    }
    let seed_value = frame.get(sx, sy);
    if seed_value < glove_floor {
        return Err(Error::SeedMismatch {
            x: sx,
            y: sy,
            intensity: seed_value,
            floor: glove_floor,
        });
    }

    let (w, h) = (frame.width, frame.height);
    let mut mask = RegionMask::empty(w, h);
    let mut queue = VecDeque::new();
    mask.insert(sx, sy);
    queue.push_back((sx, sy));

    while let Some((x, y)) = queue.pop_front() {
        let x0 = x.saturating_sub(1);
        let y0 = y.saturating_sub(1);
        let x1 = (x + 1).min(w - 1);
        let y1 = (y + 1).min(h - 1);
        for ny in y0..=y1 {
            for nx in x0..=x1 {
                let idx = ny * w + nx;
                if mask.member[idx] {
                    continue;
                }
                if frame.pixels[idx].abs_diff(seed_value) <= tolerance {
                    mask.member[idx] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    Ok(mask)
}

/// Centroid, area, orientation and eccentricity of the region's
/// equivalent ellipse.
///
/// Each pixel is treated as a unit square, so its own `1/12` variance is
/// added to both normalized second moments. This keeps one-pixel-wide
/// regions at an eccentricity strictly below one.
pub fn region_stats(mask: &RegionMask) -> Result<RegionStats> {
    let mut n = 0usize;
    let (mut sum_x, mut sum_y) = (0.0, 0.0);
    for (x, y) in mask.members() {
        n += 1;
        sum_x += x as f64;
        sum_y += y as f64;
    }
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    let area = n as f64;
    let cx = sum_x / area;
    let cy = sum_y / area;

    let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
    for (x, y) in mask.members() {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        mu20 += dx * dx;
        mu02 += dy * dy;
        mu11 += dx * dy;
    }
    mu20 = mu20 / area + PIXEL_SELF_MOMENT;
    mu02 = mu02 / area + PIXEL_SELF_MOMENT;
    mu11 /= area;

    let orientation = (0.5 * (2.0 * mu11).atan2(mu20 - mu02)).clamp(-FRAC_PI_2, FRAC_PI_2);
    let half_sum = 0.5 * (mu20 + mu02);
    let root = (0.25 * (mu20 - mu02).powi(2) + mu11 * mu11).sqrt();
    let major = half_sum + root;
    let minor = (half_sum - root).max(0.0);
    let eccentricity = (1.0 - minor / major).max(0.0).sqrt();

    Ok(RegionStats {
        centroid_x: cx,
        centroid_y: cy,
        area,
        orientation,
        eccentricity,
    })
}

fn round_into(frame: &Frame, x: f64, y: f64) -> (usize, usize) {
    let rx = x.round().clamp(0.0, (frame.width - 1) as f64) as usize;
    let ry = y.round().clamp(0.0, (frame.height - 1) as f64) as usize;
    (rx, ry)
}

/// Picks a seed near `(x, y)`: the rounded point itself when it is bright
/// enough, otherwise the closest pixel of `candidates` that is.
fn choose_seed(
    frame: &Frame,
    x: f64,
    y: f64,
    candidates: &RegionMask,
    glove_floor: u8,
) -> Option<(usize, usize)> {
    let rounded = round_into(frame, x, y);
    if frame.get(rounded.0, rounded.1) >= glove_floor {
        return Some(rounded);
    }
    candidates
        .members()
        .filter(|&(px, py)| frame.get(px, py) >= glove_floor)
        .min_by(|a, b| {
            let da = (a.0 as f64 - x).powi(2) + (a.1 as f64 - y).powi(2);
            let db = (b.0 as f64 - x).powi(2) + (b.1 as f64 - y).powi(2);
            da.total_cmp(&db)
        })
}

/// Follows the hand from `start_index` to the last frame.
///
/// The start-frame region is grown from the centroid of its difference mask
/// against frame 0; every later frame is seeded at the previous centroid.
/// Frames where the seed misses the glove repeat the previous statistics,
/// up to `max_gap` in a row.
pub fn track_hand(
    frames: &[Frame],
    start_index: usize,
    config: &TrackConfig,
) -> Result<Vec<RegionStats>> {
    if start_index == 0 || start_index >= frames.len() {
        return Err(Error::InvalidConfig(format!(
            "start index {start_index} outside 1..{}",
            frames.len()
        )));
    }
    check_sizes(frames)?;

    let start = &frames[start_index];
    let diff = difference_mask(&frames[0], start, config.diff_threshold)?;
    let diff_stats = region_stats(&diff).map_err(|_| Error::NoHandDetected)?;
    let seed = choose_seed(
        start,
        diff_stats.centroid_x,
        diff_stats.centroid_y,
        &diff,
        config.glove_floor,
    )
    .ok_or(Error::NoHandDetected)?;
    let mut mask = region_grow(start, seed, config.tolerance, config.glove_floor)?;
    let mut stats = region_stats(&mask)?;

    let mut out = Vec::with_capacity(frames.len() - start_index);
    out.push(stats);
    let mut gap = 0usize;
    for (n, frame) in frames.iter().enumerate().skip(start_index + 1) {
        let grown = choose_seed(
            frame,
            stats.centroid_x,
            stats.centroid_y,
            &mask,
            config.glove_floor,
        )
        .map(|s| region_grow(frame, s, config.tolerance, config.glove_floor));
        match grown {
            Some(Ok(m)) => {
                stats = region_stats(&m)?;
                mask = m;
                gap = 0;
            }
            Some(Err(e @ Error::SeedOutOfBounds { .. })) => return Err(e),
            Some(Err(_)) | None => {
                gap += 1;
                if gap > config.max_gap {
                    return Err(Error::TrackingLost { frame: n, gap });
                }
            }
        }
        out.push(stats);
    }
    Ok(out)
}
