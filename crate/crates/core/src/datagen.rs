//! Synthetic sign corpora.
//!
//! Every sign class has a fixed planar prototype path. A sample is that
//! path under a per-subject similarity transform, followed at a random
//! speed profile (monotone piecewise-linear time warp) for a random number
//! of frames, with Gaussian jitter on every channel. Area, orientation and
//! eccentricity are derived from the path's local geometry so the shape
//! channels carry class information too.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classify::{mix_seed, write_manifest, Sample, SampleRecord};
use crate::error::{Error, Result};
use crate::features::{assemble, interpolate, write_features, FeatureSet, DEFAULT_LENGTH};
use crate::frames::write_pgm;
use crate::imaging::{Frame, RegionStats};

/// Number of prototype paths shipped with the generator.
pub const NUM_PROTOTYPES: usize = 20;

/// Hand-free frames written before the hand enters.
pub const LEAD_IN_FRAMES: usize = 12;

const BACKGROUND: u8 = 30;
const BODY: u8 = 90;
const GLOVE: u8 = 235;

#[derive(Debug, Clone, PartialEq)]
enum Path2 {
    Polyline(&'static [(f64, f64)]),
    /// Ellipse arc: center, radii, start angle, signed sweep.
    Arc {
        center: (f64, f64),
        radius: (f64, f64),
        start: f64,
        sweep: f64,
    },
    /// Straight segment with a triangular lateral oscillation.
    Zigzag {
        from: (f64, f64),
        to: (f64, f64),
        teeth: f64,
        amp: f64,
    },
    /// Straight segment with a sinusoidal lateral oscillation.
    Wave {
        from: (f64, f64),
        to: (f64, f64),
        cycles: f64,
        amp: f64,
    },
    Lemniscate {
        center: (f64, f64),
        size: f64,
        angle: f64,
    },
    Spiral {
        center: (f64, f64),
        r0: f64,
        r1: f64,
        turns: f64,
    },
}

/// A class prototype: a path in normalized frame coordinates plus the
/// resting hand shape for the sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    path: Path2,
    /// Hand area as a fraction of the frame.
    pub area: f64,
    pub orientation: f64,
    pub eccentricity: f64,
}

fn lerp(a: (f64, f64), b: (f64, f64), s: f64) -> (f64, f64) {
    (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1))
}

fn offset_along_normal(from: (f64, f64), to: (f64, f64), s: f64, lateral: f64) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let len = dx.hypot(dy);
    let p = lerp(from, to, s);
    (p.0 - dy / len * lateral, p.1 + dx / len * lateral)
}

impl Path2 {
    fn point(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        match *self {
            Path2::Polyline(pts) => {
                let lengths: Vec<f64> = pts
                    .windows(2)
                    .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
                    .collect();
                let total: f64 = lengths.iter().sum();
                let mut target = s * total;
                for (w, len) in pts.windows(2).zip(&lengths) {
                    if target <= *len {
                        return lerp(w[0], w[1], target / len);
                    }
                    target -= len;
                }
                *pts.last().unwrap()
            }
            Path2::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let a = start + s * sweep;
                (center.0 + radius.0 * a.cos(), center.1 + radius.1 * a.sin())
            }
            Path2::Zigzag {
                from,
                to,
                teeth,
                amp,
            } => {
                let phase = (s * teeth * 2.0).fract();
                let tri = if phase < 0.5 {
                    4.0 * phase - 1.0
                } else {
                    3.0 - 4.0 * phase
                };
                // starts and ends on the center line
                let envelope = (PI * s).sin();
                offset_along_normal(from, to, s, amp * tri * envelope)
            }
            Path2::Wave {
                from,
                to,
                cycles,
                amp,
            } => offset_along_normal(from, to, s, amp * (TAU * cycles * s).sin()),
            Path2::Lemniscate {
                center,
                size,
                angle,
            } => {
                let a = TAU * s;
                let den = 1.0 + a.sin().powi(2);
                let (x, y) = (size * a.cos() / den, size * a.sin() * a.cos() / den);
                let (c, sn) = (angle.cos(), angle.sin());
                (center.0 + c * x - sn * y, center.1 + sn * x + c * y)
            }
            Path2::Spiral {
                center,
                r0,
                r1,
                turns,
            } => {
                let a = TAU * turns * s;
                let r = r0 + (r1 - r0) * s;
                (center.0 + r * a.cos(), center.1 + r * a.sin())
            }
        }
    }
}

impl Prototype {
    /// Prototype of sign `code` (1-based, cycling through the fixed set).
    pub fn for_class(code: u32) -> Self {
        let k = ((code.max(1) - 1) as usize) % NUM_PROTOTYPES;
        let path = match k {
            0 => Path2::Polyline(&[(0.30, 0.30), (0.70, 0.70)]),
            1 => Path2::Polyline(&[(0.70, 0.30), (0.30, 0.70)]),
            2 => Path2::Polyline(&[(0.50, 0.25), (0.50, 0.75)]),
            3 => Path2::Polyline(&[(0.25, 0.50), (0.75, 0.50)]),
            4 => Path2::Arc {
                center: (0.5, 0.5),
                radius: (0.2, 0.2),
                start: PI,
                sweep: PI,
            },
            5 => Path2::Arc {
                center: (0.5, 0.5),
                radius: (0.2, 0.2),
                start: 0.0,
                sweep: PI,
            },
            6 => Path2::Arc {
                center: (0.5, 0.4),
                radius: (0.15, 0.15),
                start: FRAC_PI_2,
                sweep: -1.5 * PI,
            },
            7 => Path2::Arc {
                center: (0.5, 0.5),
                radius: (0.18, 0.18),
                start: 0.0,
                sweep: TAU,
            },
            8 => Path2::Arc {
                center: (0.5, 0.5),
                radius: (0.18, 0.18),
                start: 0.0,
                sweep: -TAU,
            },
            9 => Path2::Arc {
                center: (0.5, 0.5),
                radius: (0.25, 0.12),
                start: FRAC_PI_2,
                sweep: TAU,
            },
            10 => Path2::Zigzag {
                from: (0.25, 0.40),
                to: (0.75, 0.40),
                teeth: 3.0,
                amp: 0.08,
            },
            11 => Path2::Zigzag {
                from: (0.40, 0.25),
                to: (0.40, 0.75),
                teeth: 3.0,
                amp: 0.08,
            },
            12 => Path2::Lemniscate {
                center: (0.5, 0.5),
                size: 0.22,
                angle: 0.0,
            },
            13 => Path2::Lemniscate {
                center: (0.5, 0.5),
                size: 0.22,
                angle: FRAC_PI_2,
            },
            14 => Path2::Spiral {
                center: (0.5, 0.5),
                r0: 0.04,
                r1: 0.22,
                turns: 1.5,
            },
            15 => Path2::Wave {
                from: (0.25, 0.60),
                to: (0.75, 0.60),
                cycles: 1.5,
                amp: 0.10,
            },
            16 => Path2::Wave {
                from: (0.60, 0.25),
                to: (0.60, 0.75),
                cycles: 2.0,
                amp: 0.07,
            },
            17 => Path2::Polyline(&[(0.30, 0.30), (0.30, 0.70), (0.70, 0.70)]),
            18 => Path2::Polyline(&[(0.50, 0.30), (0.70, 0.65), (0.30, 0.65), (0.50, 0.30)]),
            _ => Path2::Polyline(&[(0.30, 0.70), (0.50, 0.30), (0.70, 0.70)]),
        };
        let k = k as f64;
        Self {
            path,
            area: 0.012 + 0.0009 * ((k * 7.0) % 11.0),
            orientation: -0.9 + 1.8 * ((k * 5.0) % 19.0) / 18.0,
            eccentricity: 0.45 + 0.4 * ((k * 3.0) % 13.0) / 12.0,
        }
    }

    /// Path position at progress `s` in `[0, 1]`, in normalized coordinates.
    pub fn point(&self, s: f64) -> (f64, f64) {
        self.path.point(s)
    }

    /// Direction of travel at `s`, by central differences.
    pub fn heading(&self, s: f64) -> f64 {
        let h = 1e-4;
        let a = self.point((s - h).max(0.0));
        let b = self.point((s + h).min(1.0));
        (b.1 - a.1).atan2(b.0 - a.0)
    }

    /// Noise-free shape channels at `s`: `(area fraction, orientation, eccentricity)`.
    pub fn shape(&self, s: f64) -> (f64, f64, f64) {
        let heading = self.heading(s);
        let (_, y) = self.point(s);
        // hand appears larger lower in the frame (closer to the camera)
        let area = self.area * (1.0 + 0.6 * (y - 0.5));
        let orientation = self.orientation + 0.35 * heading.sin();
        let eccentricity = self.eccentricity + 0.08 * heading.cos();
        (area, orientation, eccentricity)
    }
}

/// Generator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub num_classes: u32,
    pub num_subjects: u32,
    pub reps_per_subject: u32,
    /// Inclusive range of raw frame counts per sample.
    pub frames: (usize, usize),
    /// Per-frame position jitter, in normalized units.
    pub noise_sigma: f64,
    /// Per-subject translation spread, in normalized units.
    pub subject_offset_sigma: f64,
    /// Per-subject path scale range.
    pub subject_scale_range: (f64, f64),
    /// Knot amplitude of each subject's characteristic speed profile; 0
    /// gives constant speed.
    pub time_warp: f64,
    /// Knot amplitude of the extra per-repetition speed variation.
    pub rep_time_warp: f64,
    /// Upper bound on the fraction of a sign each subject spends holding
    /// still at its start and at its end.
    pub subject_pause: f64,
    /// Nominal frame size used to express region statistics in pixels.
    pub frame_width: usize,
    pub frame_height: usize,
    /// Channels written to the feature files.
    pub feature_set: FeatureSet,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            num_classes: 20,
            num_subjects: 12,
            reps_per_subject: 5,
            frames: (40, 80),
            noise_sigma: 0.01,
            subject_offset_sigma: 0.02,
            subject_scale_range: (0.9, 1.1),
            time_warp: 0.08,
            rep_time_warp: 0.02,
            subject_pause: 0.0,
            frame_width: 1800,
            frame_height: 2000,
            feature_set: FeatureSet::TrajectoryShape,
            seed: 2020,
        }
    }
}

impl GenSpec {
    /// Settings with every random effect switched off.
    pub fn noiseless(num_classes: u32, num_subjects: u32, reps_per_subject: u32) -> Self {
        Self {
            num_classes,
            num_subjects,
            reps_per_subject,
            frames: (40, 40),
            noise_sigma: 0.0,
            subject_offset_sigma: 0.0,
            subject_scale_range: (1.0, 1.0),
            time_warp: 0.0,
            rep_time_warp: 0.0,
            subject_pause: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.num_subjects == 0 || self.reps_per_subject == 0 {
            return Err(Error::InvalidConfig(
                "class, subject and repetition counts must be positive".into(),
            ));
        }
        if self.frames.0 < 2 || self.frames.1 < self.frames.0 {
            return Err(Error::InvalidConfig(format!(
                "bad frame range {:?}",
                self.frames
            )));
        }
        let levels = [
            self.noise_sigma,
            self.subject_offset_sigma,
            self.time_warp,
            self.rep_time_warp,
            self.subject_pause,
        ];
        if !levels.iter().all(|&v| v >= 0.0) {
            return Err(Error::InvalidConfig(
                "noise levels must be non-negative".into(),
            ));
        }
        let (lo, hi) = self.subject_scale_range;
        if !(lo > 0.0 && hi <= 2.0 && lo <= hi) {
            return Err(Error::InvalidConfig(format!(
                "subject scale range ({lo}, {hi}) must lie in (0, 2]"
            )));
        }
        if self.time_warp >= 0.125 || self.rep_time_warp >= 0.125 {
            return Err(Error::InvalidConfig(
                "time warps must be below 0.125 to stay monotone".into(),
            ));
        }
        if self.subject_pause >= 0.4 {
            return Err(Error::InvalidConfig(
                "subject pause must be below 0.4".into(),
            ));
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            return Err(Error::InvalidConfig("frame size must be positive".into()));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.num_classes * self.num_subjects * self.reps_per_subject) as usize
    }
}

/// Per-subject similarity transform and hand characteristics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectStyle {
    pub offset: (f64, f64),
    pub scale: f64,
    pub hand_size: f64,
    pub orientation_bias: f64,
    pub speed: TimeWarp,
    /// Fractions of the duration held still before and after the motion.
    pub pause: (f64, f64),
}

impl SubjectStyle {
    pub fn identity() -> Self {
        Self {
            offset: (0.0, 0.0),
            scale: 1.0,
            hand_size: 1.0,
            orientation_bias: 0.0,
            speed: TimeWarp::identity(),
            pause: (0.0, 0.0),
        }
    }

    pub fn draw(spec: &GenSpec, subject: u32) -> Self {
        let mut rng =
            ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, 0x5_0000_0000 + u64::from(subject)));
        let offset_dist = Normal::new(0.0, spec.subject_offset_sigma).unwrap();
        let (lo, hi) = spec.subject_scale_range;
        let scale = if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        let offset = (offset_dist.sample(&mut rng), offset_dist.sample(&mut rng));
        let spread = (scale - 1.0).abs().max(spec.subject_offset_sigma);
        let hand_size = if spread > 0.0 {
            1.0 + rng.random_range(-1.0..=1.0) * spread
        } else {
            1.0
        };
        let orientation_bias = if spread > 0.0 {
            rng.random_range(-1.0..=1.0) * 0.05
        } else {
            0.0
        };
        let speed = TimeWarp::draw(spec.time_warp, &mut rng);
        let pause = if spec.subject_pause > 0.0 {
            (
                rng.random_range(0.0..spec.subject_pause),
                rng.random_range(0.0..spec.subject_pause),
            )
        } else {
            (0.0, 0.0)
        };
        Self {
            offset,
            scale,
            hand_size,
            orientation_bias,
            speed,
            pause,
        }
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            0.5 + self.scale * (p.0 - 0.5) + self.offset.0,
            0.5 + self.scale * (p.1 - 0.5) + self.offset.1,
        )
    }

    /// Path progress at normalized time `u`: the subject's pauses, then its
    /// speed profile.
    pub fn progress(&self, u: f64) -> f64 {
        let (a, b) = self.pause;
        let moving = ((u - a) / (1.0 - a - b)).clamp(0.0, 1.0);
        self.speed.apply(moving)
    }
}

/// Monotone piecewise-linear map of `[0, 1]` with knots at 1/4, 1/2, 3/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWarp {
    knots: [f64; 3],
}

impl TimeWarp {
    pub fn identity() -> Self {
        Self {
            knots: [0.25, 0.5, 0.75],
        }
    }

    pub fn draw<R: Rng + ?Sized>(amplitude: f64, rng: &mut R) -> Self {
        let mut knots = [0.25, 0.5, 0.75];
        if amplitude > 0.0 {
            for k in knots.iter_mut() {
                *k += rng.random_range(-amplitude..=amplitude);
            }
        }
        Self { knots }
    }

    pub fn apply(&self, u: f64) -> f64 {
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ys = [0.0, self.knots[0], self.knots[1], self.knots[2], 1.0];
        let u = u.clamp(0.0, 1.0);
        let i = ((u * 4.0).floor() as usize).min(3);
        let f = (u - xs[i]) / 0.25;
        ys[i] + f * (ys[i + 1] - ys[i])
    }
}

fn sample_id(code: u32, subject: u32, rep: u32) -> String {
    format!("s{code:02}_p{subject:02}_r{rep:02}")
}

/// Raw per-frame statistics (in pixels of the nominal frame) of one sample.
pub fn sample_stats(spec: &GenSpec, code: u32, subject: u32, rep: u32) -> Vec<RegionStats> {
    let proto = Prototype::for_class(code);
    let style = SubjectStyle::draw(spec, subject);
    let salt = (u64::from(code) << 40) | (u64::from(subject) << 20) | u64::from(rep);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, salt));
    let len = rng.random_range(spec.frames.0..=spec.frames.1);
    let warp = TimeWarp::draw(spec.rep_time_warp, &mut rng);
    let sigma = spec.noise_sigma;
    let mut jitter = |scale: f64| {
        if sigma > 0.0 {
            rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma * scale
        } else {
            0.0
        }
    };

    let (w, h) = (spec.frame_width as f64, spec.frame_height as f64);
    (0..len)
        .map(|t| {
            let s = style.progress(warp.apply(t as f64 / (len - 1) as f64));
            let (x, y) = style.apply(proto.point(s));
            let (area, orientation, eccentricity) = proto.shape(s);
            let x = (x + jitter(1.0)).clamp(0.0, 1.0);
            let y = (y + jitter(1.0)).clamp(0.0, 1.0);
            let area = area * style.hand_size * style.scale * style.scale * (1.0 + jitter(2.0));
            let orientation =
                (orientation + style.orientation_bias + jitter(3.0)).clamp(-FRAC_PI_2, FRAC_PI_2);
            let eccentricity = (eccentricity + jitter(1.0)).clamp(0.0, 0.99);
            RegionStats {
                centroid_x: x * (w - 1.0),
                centroid_y: y * (h - 1.0),
                area: (area * w * h).max(1.0),
                orientation,
                eccentricity,
            }
        })
        .collect()
}

/// All samples of the corpus, in (class, subject, repetition) order, with
/// feature paths of the form `features/<sample_id>.csv`.
pub fn generate_samples(spec: &GenSpec) -> Result<Vec<Sample>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.num_samples());
    for code in 1..=spec.num_classes {
        for subject in 1..=spec.num_subjects {
            for rep in 1..=spec.reps_per_subject {
                let stats = sample_stats(spec, code, subject, rep);
                let raw = assemble(
                    &stats,
                    spec.frame_width,
                    spec.frame_height,
                    FeatureSet::TrajectoryShape,
                )?;
                let features =
                    interpolate(&raw, DEFAULT_LENGTH)?.truncate_dims(spec.feature_set.dims())?;
                let id = sample_id(code, subject, rep);
                out.push(Sample {
                    record: SampleRecord {
                        feature_path: PathBuf::from("features").join(format!("{id}.csv")),
                        sample_id: id,
                        sign_code: code,
                        subject_id: subject,
                        repetition: rep,
                    },
                    features,
                });
            }
        }
    }
    Ok(out)
}

/// Writes the corpus under `output_dir` (`features/*.csv` plus
/// `manifest.csv`) and returns its records.
pub fn generate_dataset(
    spec: &GenSpec,
    output_dir: &Path,
    comments: &[String],
) -> Result<Vec<SampleRecord>> {
    let samples = generate_samples(spec)?;
    fs::create_dir_all(output_dir.join("features"))?;
    let mut records = Vec::with_capacity(samples.len());
    for s in samples {
        let path = output_dir.join(&s.record.feature_path);
        write_features(&path, &s.features)?;
        records.push(SampleRecord {
            feature_path: path,
            ..s.record
        });
    }
    write_manifest(&output_dir.join("manifest.csv"), &records, comments)?;
    Ok(records)
}

/// Frame geometry for rendered sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLayout {
    pub width: usize,
    pub height: usize,
    pub radius: f64,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            radius: 8.0,
        }
    }
}

/// Pixel centers of a path, one per frame.
pub fn path_in_pixels(points: &[(f64, f64)], layout: &FrameLayout) -> Result<Vec<(f64, f64)>> {
    let (w, h, r) = (layout.width as f64, layout.height as f64, layout.radius);
    points
        .iter()
        .map(|&(x, y)| {
            let p = (x * (w - 1.0), y * (h - 1.0));
            if p.0 - r < 0.0 || p.1 - r < 0.0 || p.0 + r > w - 1.0 || p.1 + r > h - 1.0 {
                return Err(Error::CurveOutOfBounds {
                    x: p.0,
                    y: p.1,
                    margin: r,
                    width: layout.width,
                    height: layout.height,
                });
            }
            Ok(p)
        })
        .collect()
}

/// The static scene: dark background with a mid-gray torso block.
pub fn background(layout: &FrameLayout) -> Frame {
    let mut f = Frame::filled(layout.width, layout.height, BACKGROUND);
    let (w, h) = (layout.width, layout.height);
    for y in h * 2 / 3..h {
        for x in w / 4..w * 3 / 4 {
            f.set(x, y, BODY);
        }
    }
    f
}

/// Renders a bright disk at `center` over the background.
pub fn render_disk(layout: &FrameLayout, center: (f64, f64)) -> Frame {
    let mut f = background(layout);
    let r2 = layout.radius * layout.radius;
    let x0 = (center.0 - layout.radius).floor().max(0.0) as usize;
    let y0 = (center.1 - layout.radius).floor().max(0.0) as usize;
    let x1 = ((center.0 + layout.radius).ceil() as usize).min(layout.width - 1);
    let y1 = ((center.1 + layout.radius).ceil() as usize).min(layout.height - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - center.0, y as f64 - center.1);
            if dx * dx + dy * dy <= r2 {
                f.set(x, y, GLOVE);
            }
        }
    }
    f
}

/// Frames for a hand following `points` (normalized coordinates), preceded
/// by [`LEAD_IN_FRAMES`] hand-free frames.
pub fn render_sequence(points: &[(f64, f64)], layout: &FrameLayout) -> Result<Vec<Frame>> {
    let centers = path_in_pixels(points, layout)?;
    let mut frames = vec![background(layout); LEAD_IN_FRAMES];
    frames.extend(centers.iter().map(|&c| render_disk(layout, c)));
    Ok(frames)
}

/// Writes [`render_sequence`] as `frame_0001.pgm`, ... into `output_dir`
/// and returns the generating pixel centers.
pub fn generate_frame_sequence(
    points: &[(f64, f64)],
    layout: &FrameLayout,
    output_dir: &Path,
) -> Result<Vec<(f64, f64)>> {
    let centers = path_in_pixels(points, layout)?;
    let frames = render_sequence(points, layout)?;
    fs::create_dir_all(output_dir)?;
    for (i, f) in frames.iter().enumerate() {
        write_pgm(&output_dir.join(format!("frame_{:04}.pgm", i + 1)), f)?;
    }
    Ok(centers)
}

/// Normalized path positions of one corpus sample, frame by frame.
pub fn sample_path(spec: &GenSpec, code: u32, subject: u32, rep: u32) -> Vec<(f64, f64)> {
    let (w, h) = (
        spec.frame_width as f64 - 1.0,
        spec.frame_height as f64 - 1.0,
    );
    sample_stats(spec, code, subject, rep)
        .iter()
        .map(|s| (s.centroid_x / w, s.centroid_y / h))
        .collect()
}
