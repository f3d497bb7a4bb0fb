//! Limit points of infinite reduced words and finite-horizon diagnostics
//! along geodesic rays toward them.
//!
//! Everything in this module is a heuristic with explicit horizon, step and
//! word-ball radius: conicality is a statement about all time and cannot be
//! decided from finitely many samples.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{OrbitBall, DimensionError};
use crate::hyperbolic::{cosh_distance, BoundaryPoint, GeometryError, HPoint};
use crate::scalar::rational::rational_from_f64;
use crate::scalar::{format_rational, Ball, Mag, Scalar};
use crate::schottky::{word_disk, GeneratorSchedule, Provenance, ReducedWord, ScheduleError};

/// `2 arccosh(sqrt 2)`.
pub fn delta0() -> f64 {
    2.0 * std::f64::consts::SQRT_2.acosh()
}

#[derive(Debug, thiserror::Error)]
pub enum LimitError {
    #[error("empty profile")]
    EmptyProfile,
    #[error("{0}")]
    Path(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

/// How a finite seed word continues to an infinite word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    /// The seed repeated forever.
    Periodic,
    /// The seed followed by `last + 1, last + 2, ...`.
    Escalating,
    /// The seed alone.
    Finite,
}

/// Lazily generated reduced word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordPath {
    seed: Vec<usize>,
    kind: PathKind,
}

impl WordPath {
    pub fn new(seed: Vec<usize>, kind: PathKind) -> Result<Self, LimitError> {
        ReducedWord::new(seed.clone())?;
        match kind {
            PathKind::Periodic if seed.len() < 2 || seed.first() == seed.last() => {
                return Err(LimitError::Path(format!("{seed:?} does not repeat to a reduced word")));
            }
            PathKind::Escalating if seed.windows(2).any(|w| w[0] >= w[1]) => {
                return Err(LimitError::Path(format!("{seed:?} is not strictly increasing")));
            }
            _ => {}
        }
        Ok(WordPath { seed, kind })
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn seed(&self) -> &[usize] {
        &self.seed
    }

    /// Letter at position `j` (0-based), if the word is that long.
    pub fn letter(&self, j: usize) -> Option<usize> {
        match self.kind {
            PathKind::Periodic => Some(self.seed[j % self.seed.len()]),
            PathKind::Finite => self.seed.get(j).copied(),
            PathKind::Escalating => Some(match self.seed.get(j) {
                Some(&i) => i,
                None => self.seed.last().unwrap() + 1 + j - self.seed.len(),
            }),
        }
    }

    /// First `n` letters, if available.
    pub fn prefix(&self, n: usize) -> Option<ReducedWord> {
        let v: Option<Vec<usize>> = (0..n).map(|j| self.letter(j)).collect();
        ReducedWord::new(v?).ok()
    }

    /// Largest letter among the first `n`.
    pub fn max_letter(&self, n: usize) -> usize {
        (0..n).filter_map(|j| self.letter(j)).max().unwrap_or(0)
    }
}

/// Center of a depth-`n` disk with that disk's radius as error bound.
#[derive(Clone, Debug)]
pub struct LimitPoint<S> {
    pub word: ReducedWord,
    pub center: S,
    pub radius: S,
}

/// Every point of the nested intersection lies within `radius` of `center`.
pub fn limit_point<S: Scalar>(s: &GeneratorSchedule, path: &WordPath, n: usize, bits: usize) -> Result<LimitPoint<S>, LimitError> {
    let word = path.prefix(n).ok_or_else(|| LimitError::Path(format!("word is shorter than {n}")))?;
    let ext;
    let s = if s.provenance() == Provenance::Standard && s.max_index() < path.max_letter(n) {
        ext = GeneratorSchedule::standard(path.max_letter(n));
        &ext
    } else {
        s
    };
    let disk = word_disk::<S>(s, &word, bits)?;
    Ok(LimitPoint { word, center: disk.center().clone(), radius: disk.radius().clone() })
}

/// Point at distance `t` from `p` on the geodesic ray toward `lambda`.
///
/// The isometry `z -> -1/(z - lambda)` sends `lambda` to `∞`, where the ray
/// is vertical.
pub fn geodesic_ray_point(p: &HPoint<Ball>, lambda: &BoundaryPoint<Ball>, t: &Ball) -> HPoint<Ball> {
    let et = t.exp();
    match lambda {
        BoundaryPoint::Infinity => HPoint::new(p.x().clone(), p.y().clone() * et).expect("positive height"),
        BoundaryPoint::Finite(l) => {
            let dx = p.x().clone() - l.clone();
            let n = dx.square() + p.y().square();
            let a = -(dx / n.clone());
            let b = p.y().clone() / n;
            let be = b * et;
            let nn = a.square() + be.square();
            let x = l.clone() - a / nn.clone();
            let y = be / nn;
            HPoint::new(x, y).expect("positive height")
        }
    }
}

fn ball_min(values: Vec<Ball>, bits: usize) -> Ball {
    // Only balls whose midpoint is near the smallest can hold the minimum;
    // the rest are skipped before the exact endpoint comparison.
    let best = values.iter().map(Ball::mid_f64).fold(f64::INFINITY, f64::min);
    let cut = best * (1.0 + 1e-9) + 1e-300;
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for v in values.iter().filter(|v| !(v.mid_f64() - 2.0 * v.rad().to_f64() > cut)) {
        let (l, h) = (v.lower(), v.upper());
        if lo.as_ref().is_none_or(|x| &l < x) {
            lo = Some(l);
        }
        if hi.as_ref().is_none_or(|x| &h < x) {
            hi = Some(h);
        }
    }
    let (lo, hi) = (lo.expect("nonempty"), hi.expect("nonempty"));
    // A skipped ball has lower end above `cut`, hence above `hi`.
    let two = BigRational::from_integer(2.into());
    let mid = (&lo + &hi) / &two;
    Ball::from_rational(&mid, bits).inflate(Mag::from_rational_up(&((hi - lo) / two)))
}

/// `min d(z, gamma p)` over the ball, an upper proxy for the distance from
/// `z` to the orbit.
pub fn orbit_distance<S: Scalar>(z: &HPoint<S>, ball: &OrbitBall<S>) -> Ball {
    let bits = z.y().bits();
    let cosh = ball_min(ball.points().map(|op| cosh_distance(z, &op.point).to_ball(bits)).collect(), bits);
    // Rounding can push the enclosure below 1.
    let one = BigRational::from_integer(1.into());
    if cosh.upper() <= one {
        return Ball::zero(bits);
    }
    let cosh = if cosh.lower() < one {
        let hi = cosh.upper();
        let two = BigRational::from_integer(2.into());
        Ball::from_rational(&((&one + &hi) / &two), bits).inflate(Mag::from_rational_up(&((hi - one) / two)))
    } else {
        cosh
    };
    cosh.acosh()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub t: f64,
    pub d: f64,
    pub ball_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayProfile {
    pub horizon: f64,
    pub step: f64,
    pub samples: Vec<RaySample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "recurrent (conical-consistent)")]
    Recurrent,
    #[serde(rename = "escaping (nonconical-consistent)")]
    Escaping,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl RayProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,D_t,ball_n\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{:.12},{}", s.t, s.d, s.ball_n);
        }
        out
    }

    pub fn min_distance(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.d).min_by(f64::total_cmp)
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.samples.last().map(|s| s.d)
    }

    /// Recurrent when `D < 2 delta0` somewhere in the second half of the
    /// horizon; otherwise escaping when `D > 2 delta0` throughout the last
    /// quarter.
    pub fn classify(&self) -> Classification {
        let Some(last) = self.samples.last() else {
            return Classification::Indeterminate;
        };
        let threshold = 2.0 * delta0();
        if self.samples.iter().any(|s| s.t >= 0.5 * last.t && s.d < threshold) {
            return Classification::Recurrent;
        }
        if self.samples.iter().filter(|s| s.t >= 0.75 * last.t).all(|s| s.d > threshold) {
            return Classification::Escaping;
        }
        Classification::Indeterminate
    }
}

/// Sample times `step, 2 step, ...` up to `horizon`; empty when `horizon < step`.
pub fn sample_times(horizon: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let count = (horizon / step + 1e-9).floor() as usize;
    (1..=count).map(|j| j as f64 * step).collect()
}

/// `D(t) = orbit_distance(ray(t))` along the ray from the ball's basepoint.
pub fn conicality_profile(lambda: &BoundaryPoint<Ball>, ball: &OrbitBall<Ball>, horizon: f64, step: f64, jobs: usize) -> RayProfile {
    let p = ball.base();
    let bits = p.y().bits();
    let times = sample_times(horizon, step);
    let samples = crate::dimension::with_jobs(jobs, || {
        times
            .par_iter()
            .map(|&t| {
                let tb = Ball::from_rational(&rational_from_f64(t).expect("finite time"), bits);
                let z = geodesic_ray_point(p, lambda, &tb);
                RaySample { t, d: orbit_distance(&z, ball).to_f64(), ball_n: ball.radius() }
            })
            .collect()
    });
    RayProfile { horizon, step, samples }
}

/// `min D(t)/t` over the last `tail_fraction` of the horizon, clamped to
/// `[0, 1]`.
pub fn beta_depth(profile: &RayProfile, tail_fraction: f64) -> Result<f64, LimitError> {
    let last = profile.samples.last().ok_or(LimitError::EmptyProfile)?;
    let start = (1.0 - tail_fraction) * last.t;
    let m = profile
        .samples
        .iter()
        .filter(|s| s.t >= start && s.t > 0.0)
        .map(|s| s.d / s.t)
        .min_by(f64::total_cmp)
        .ok_or(LimitError::EmptyProfile)?;
    Ok(m.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Membership {
    /// No ball element is certainly closer to `x` than `p` is.
    pub member: bool,
    /// Some element is at the same distance, or the comparison was not
    /// decided at this precision.
    pub on_boundary: bool,
}

/// Window test for `d(x, p) <= d(x, gamma p)`; `false` is conclusive, `true`
/// only places `x` in the finite intersection of half-planes.
pub fn dirichlet_membership<S: Scalar>(x: &HPoint<S>, ball: &OrbitBall<S>) -> Membership {
    let base = cosh_distance(x, ball.base());
    let mut out = Membership { member: true, on_boundary: false };
    for op in ball.points().filter(|op| !op.word.is_empty()) {
        match (cosh_distance(x, &op.point) - base.clone()).sign() {
            Some(Ordering::Less) => return Membership { member: false, on_boundary: false },
            Some(Ordering::Equal) | None => out.on_boundary = true,
            Some(Ordering::Greater) => {}
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JorgensenReport {
    pub holds: bool,
    pub samples: usize,
    /// Set when there were no samples, so `holds` is vacuous.
    pub vacuous: bool,
    pub first_exit: Option<f64>,
}

/// Whether every sampled ray point passes [`dirichlet_membership`].
pub fn jorgensen_check(lambda: &BoundaryPoint<Ball>, ball: &OrbitBall<Ball>, horizon: f64, step: f64) -> JorgensenReport {
    let p = ball.base();
    let bits = p.y().bits();
    let times = sample_times(horizon, step);
    let first_exit = times.iter().copied().find(|&t| {
        let tb = Ball::from_rational(&rational_from_f64(t).expect("finite time"), bits);
        !dirichlet_membership(&geodesic_ray_point(p, lambda, &tb), ball).member
    });
    JorgensenReport { holds: first_exit.is_none(), samples: times.len(), vacuous: times.is_empty(), first_exit }
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    /// Word length of the disk used as the limit-point estimate.
    pub depth: usize,
    pub horizon: f64,
    pub step: f64,
    /// Word radius of the orbit ball.
    pub ball_n: usize,
    /// Orbit-ball letters are `1..=ball_m`.
    pub ball_m: usize,
    pub basepoint: (BigRational, BigRational),
    pub tail_fraction: f64,
    pub bits: usize,
    pub jobs: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            depth: 16,
            horizon: 50.0,
            step: 0.25,
            ball_n: 4,
            ball_m: 6,
            basepoint: (BigRational::from_integer(0.into()), BigRational::from_integer(1.into())),
            tail_fraction: 0.5,
            bits: crate::scalar::DEFAULT_BITS,
            jobs: 1,
        }
    }
}

/// Summary of one exploration run; every field needed to reproduce it is
/// recorded alongside the heuristic outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub word: Vec<usize>,
    pub kind: PathKind,
    pub depth: usize,
    pub limit_point: f64,
    /// `log2` of the error radius of `limit_point`.
    pub limit_radius_log2: f64,
    pub basepoint: [String; 2],
    pub horizon: f64,
    pub step: f64,
    pub ball_radius: usize,
    pub ball_letters: usize,
    pub threshold: f64,
    pub classification: Classification,
    pub beta_proxy: Option<f64>,
    pub min_distance: Option<f64>,
    pub final_distance: Option<f64>,
    pub heuristic: bool,
}

impl Exploration {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Limit point of `path`, the ray profile toward it and its classification.
pub fn explore(s: &GeneratorSchedule, path: &WordPath, cfg: &ExploreConfig) -> Result<(Exploration, RayProfile), LimitError> {
    let bits = cfg.bits;
    let lp = limit_point::<crate::scalar::Exact>(s, path, cfg.depth, bits)?;
    let lambda = BoundaryPoint::Finite(lp.center.to_ball(bits));
    let p = HPoint::<Ball>::from_rationals(&cfg.basepoint.0, &cfg.basepoint.1, bits)?;
    let sched = if s.provenance() == Provenance::Standard && s.max_index() < cfg.ball_m {
        GeneratorSchedule::standard(cfg.ball_m)
    } else {
        s.clone()
    };
    let ball = OrbitBall::build(&sched, 0, cfg.ball_m, &p, cfg.ball_n, bits)?;
    let profile = conicality_profile(&lambda, &ball, cfg.horizon, cfg.step, cfg.jobs);
    let summary = Exploration {
        word: path.seed().to_vec(),
        kind: path.kind().clone(),
        depth: cfg.depth,
        limit_point: lp.center.to_f64(),
        limit_radius_log2: crate::scalar::rational::ln_f64(&lp.radius.midpoint()) / std::f64::consts::LN_2,
        basepoint: [format_rational(&cfg.basepoint.0), format_rational(&cfg.basepoint.1)],
        horizon: cfg.horizon,
        step: cfg.step,
        ball_radius: cfg.ball_n,
        ball_letters: cfg.ball_m,
        threshold: 2.0 * delta0(),
        classification: profile.classify(),
        beta_proxy: beta_depth(&profile, cfg.tail_fraction).ok(),
        min_distance: profile.min_distance(),
        final_distance: profile.final_distance(),
        heuristic: true,
    };
    Ok((summary, profile))
}
