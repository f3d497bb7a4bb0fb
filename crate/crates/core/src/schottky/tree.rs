use std::cmp::Ordering;

use num_rational::BigRational;
use rayon::prelude::*;

use super::{contraction_factor, GeneratorSchedule, ReducedWord, ScheduleError};
use crate::hyperbolic::{Circle, GeometryError};
use crate::scalar::{Exact, Scalar, DEFAULT_BITS};

/// Disk stored as an offset from the exact center of its first
/// generator. Deep disks are tiny next to their absolute centers, so this
/// keeps full relative precision on the ball backend.
#[derive(Clone, Debug)]
struct Anchored<S> {
    anchor: usize,
    offset: S,
    radius: S,
}

impl<S: Scalar> Anchored<S> {
    fn generator(s: &GeneratorSchedule, i: usize, bits: usize) -> Result<Self, ScheduleError> {
        let g = s.generator(i)?;
        Ok(Anchored { anchor: i, offset: S::from_i64(0, bits), radius: S::from_rational(&g.radius, bits) })
    }

    /// Image under inversion in generator `a`, which must differ from the anchor.
    fn invert(&self, s: &GeneratorSchedule, a: usize, word: impl Fn() -> String) -> Result<Self, ScheduleError> {
        let ga = s.generator(a)?;
        let gb = s.generator(self.anchor)?;
        let u = self.offset.lift(&(&gb.center - &ga.center)) + self.offset.clone();
        let den = u.square() - self.radius.square();
        match den.sign() {
            Some(Ordering::Greater) => {}
            Some(Ordering::Equal) => return Err(GeometryError::DegenerateImage.into()),
            Some(Ordering::Less) => return Err(ScheduleError::UnboundedImage(word())),
            None => return Err(GeometryError::Indeterminate("whether an image disk is bounded").into()),
        }
        let r2 = self.radius.lift(&ga.radius).square();
        Ok(Anchored { anchor: a, offset: r2.clone() * u / den.clone(), radius: r2 * self.radius.clone() / den })
    }

    fn circle(&self, s: &GeneratorSchedule) -> Result<Circle<S>, ScheduleError> {
        let c = self.offset.lift(&s.generator(self.anchor)?.center) + self.offset.clone();
        Ok(Circle::new(c, self.radius.clone())?)
    }
}

/// Disk bounded by `C_w = h_(i1) ... h_(i(n-1)) (C_(in))`.
pub fn word_disk<S: Scalar>(s: &GeneratorSchedule, w: &ReducedWord, bits: usize) -> Result<Circle<S>, ScheduleError> {
    let letters = w.letters();
    let mut disk = Anchored::<S>::generator(s, *letters.last().unwrap(), bits)?;
    for (pos, &i) in letters[..letters.len() - 1].iter().enumerate().rev() {
        disk = disk.invert(s, i, || ReducedWord::from_vec_unchecked(letters[pos..].to_vec()).to_string())?;
    }
    disk.circle(s)
}

/// Both sides of `r_w <= r_suffix / (|c_(i1) - c_(i2)| - 1)^2`, plus the
/// weaker `r_w <= mu^2 r_suffix`.
#[derive(Clone, Debug)]
pub struct BeardonReport {
    pub word: ReducedWord,
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
    /// `lhs / rhs`.
    pub ratio: BigRational,
    pub mu_bound: BigRational,
    pub mu_holds: bool,
}

fn beardon_from_radii(
    s: &GeneratorSchedule,
    word: &ReducedWord,
    r_word: BigRational,
    r_suffix: &BigRational,
    mu: &BigRational,
) -> Result<BeardonReport, ScheduleError> {
    let l = word.letters();
    let f = contraction_factor(s, l[0], l[1])?;
    let rhs = r_suffix * &f * &f;
    let mu_bound = r_suffix * mu * mu;
    Ok(BeardonReport {
        word: word.clone(),
        holds: r_word <= rhs,
        mu_holds: r_word <= mu_bound,
        ratio: &r_word / &rhs,
        lhs: r_word,
        rhs,
        mu_bound,
    })
}

fn schedule_mu(s: &GeneratorSchedule) -> Result<BigRational, ScheduleError> {
    let all: Vec<usize> = s.entries().iter().map(|g| g.index).collect();
    s.mu(&all)
}

/// Exact check of the radius recursion for one word of length at least 2.
pub fn beardon_check(s: &GeneratorSchedule, w: &ReducedWord) -> Result<BeardonReport, ScheduleError> {
    let suffix = w
        .suffix()
        .ok_or_else(|| ScheduleError::Window("the radius recursion needs a word of length at least 2".into()))?;
    let l = w.letters();
    contraction_factor(s, l[0], l[1])?;
    let r_word = word_disk::<Exact>(s, w, DEFAULT_BITS)?.radius().clone();
    let r_suffix = word_disk::<Exact>(s, &suffix, DEFAULT_BITS)?.radius().clone();
    beardon_from_radii(s, w, r_word, &r_suffix, &schedule_mu(s)?)
}

/// Checks every word of length `2..=n_max` over `{k+1, ..., k+m}` exactly.
pub fn beardon_sweep(
    s: &GeneratorSchedule,
    k: usize,
    m: usize,
    n_max: usize,
    jobs: usize,
) -> Result<Vec<BeardonReport>, ScheduleError> {
    let opts = TreeOptions { jobs, verify: false, ..TreeOptions::default() };
    let tree = DiskTree::<Exact>::build(s, k, m, n_max, &opts)?;
    let mu = schedule_mu(s)?;
    let mut out = Vec::new();
    for depth in 2..=tree.depth() {
        for node in tree.level(depth) {
            let suffix = tree.suffix_node(depth, &node.word).expect("suffixes are never pruned without pruning");
            out.push(beardon_from_radii(s, &node.word, node.disk.radius().clone(), suffix.disk.radius(), &mu)?);
        }
    }
    Ok(out)
}

/// One disk of the nested family.
#[derive(Clone, Debug)]
pub struct DiskNode<S> {
    pub word: ReducedWord,
    pub disk: Circle<S>,
    /// Center of `disk` minus the center of the first letter's generator.
    pub offset: S,
    /// Index of the prefix word in the previous level.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TreeOptions {
    pub bits: usize,
    /// Worker threads; results do not depend on this.
    pub jobs: usize,
    /// Drop nodes whose radius is certainly below this value.
    pub radius_floor: Option<BigRational>,
    /// Check nesting and same-depth disjointness while building.
    pub verify: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { bits: DEFAULT_BITS, jobs: 1, radius_floor: None, verify: true }
    }
}

/// Disks of all reduced words of length `1..=n` over `{k+1, ..., k+m}`,
/// level by level in lexicographic order.
#[derive(Clone, Debug)]
pub struct DiskTree<S> {
    k: usize,
    m: usize,
    levels: Vec<Vec<DiskNode<S>>>,
    pruned: Vec<u64>,
}

impl<S: Scalar> DiskTree<S> {
    pub fn build(s: &GeneratorSchedule, k: usize, m: usize, n: usize, opts: &TreeOptions) -> Result<Self, ScheduleError> {
        if m == 0 || n == 0 {
            return Err(ScheduleError::Window(format!("need m >= 1 and n >= 1, got m={m}, n={n}")));
        }
        let alphabet: Vec<usize> = (k + 1..=k + m).collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs.max(1))
            .build()
            .map_err(|e| ScheduleError::Window(format!("thread pool: {e}")))?;

        let mut tree = DiskTree { k, m, levels: Vec::with_capacity(n), pruned: Vec::with_capacity(n) };
        let mut first = Vec::with_capacity(m);
        for &i in &alphabet {
            let a = Anchored::<S>::generator(s, i, opts.bits)?;
            first.push(DiskNode { word: ReducedWord::from_vec_unchecked(vec![i]), disk: a.circle(s)?, offset: a.offset, parent: None });
        }
        tree.push_level(s, first, m as u64, opts)?;

        for depth in 2..=n {
            let prev = tree.levels.last().unwrap();
            let chunks: Vec<Result<Vec<DiskNode<S>>, ScheduleError>> = pool.install(|| {
                alphabet
                    .par_iter()
                    .map(|&a| {
                        let mut out = Vec::new();
                        for node in prev.iter().filter(|nd| nd.word.first() != a) {
                            let word = node.word.prepend(a).unwrap();
                            let prefix = word.prefix().unwrap();
                            let Ok(parent) = prev.binary_search_by(|p| p.word.cmp(&prefix)) else {
                                continue;
                            };
                            let src = Anchored { anchor: node.word.first(), offset: node.offset.clone(), radius: node.disk.radius().clone() };
                            let img = src.invert(s, a, || word.to_string())?;
                            out.push(DiskNode { disk: img.circle(s)?, offset: img.offset, word, parent: Some(parent) });
                        }
                        Ok(out)
                    })
                    .collect()
            });
            let mut level = Vec::new();
            for c in chunks {
                level.extend(c?);
            }
            let expected = super::word_count(m, depth);
            tree.push_level(s, level, expected, opts)?;
        }
        Ok(tree)
    }

    fn push_level(&mut self, s: &GeneratorSchedule, mut level: Vec<DiskNode<S>>, expected: u64, opts: &TreeOptions) -> Result<(), ScheduleError> {
        if let Some(floor) = &opts.radius_floor {
            level.retain(|nd| {
                let below = nd.disk.radius().clone() - nd.disk.radius().lift(floor);
                below.sign() != Some(Ordering::Less)
            });
        }
        if opts.verify {
            self.verify_level(s, &level)?;
        }
        self.pruned.push(expected - level.len() as u64);
        self.levels.push(level);
        Ok(())
    }

    fn verify_level(&self, s: &GeneratorSchedule, level: &[DiskNode<S>]) -> Result<(), ScheduleError> {
        // Compare offsets so that nearby tiny disks are resolved without
        // cancellation against their large absolute centers.
        let gap = |a: &DiskNode<S>, b: &DiskNode<S>| -> Result<S, ScheduleError> {
            let shift = &s.generator(b.word.first())?.center - &s.generator(a.word.first())?.center;
            Ok(a.offset.lift(&shift) + b.offset.clone() - a.offset.clone())
        };
        if let Some(prev) = self.levels.last() {
            for node in level {
                let parent = &prev[node.parent.expect("linked")];
                let slack = parent.disk.radius().clone() - node.disk.radius().clone() - gap(parent, node)?.abs();
                if slack.sign().is_none() {
                    return Err(GeometryError::Indeterminate("nesting of the disk tree").into());
                }
                if slack.sign() != Some(Ordering::Greater) {
                    return Err(ScheduleError::Nesting { parent: parent.word.to_string(), child: node.word.to_string() });
                }
            }
        }
        let mut order: Vec<(usize, BigRational, usize)> =
            level.iter().enumerate().map(|(i, nd)| (nd.word.first(), nd.offset.midpoint(), i)).collect();
        order.sort();
        for w in order.windows(2) {
            let (a, b) = (&level[w[0].2], &level[w[1].2]);
            let clear = gap(a, b)?.abs() - a.disk.radius().clone() - b.disk.radius().clone();
            if clear.sign().is_none() {
                return Err(GeometryError::Indeterminate("disjointness of the disk tree").into());
            }
            if clear.sign() != Some(Ordering::Greater) {
                return Err(ScheduleError::Overlap { a: a.word.to_string(), b: b.word.to_string() });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Deepest level built.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Nodes of word length `depth` (1-based).
    pub fn level(&self, depth: usize) -> &[DiskNode<S>] {
        &self.levels[depth - 1]
    }

    /// Nodes missing from level `depth` because of the radius floor.
    pub fn pruned(&self, depth: usize) -> u64 {
        self.pruned[depth - 1]
    }

    pub fn node(&self, depth: usize, word: &ReducedWord) -> Option<&DiskNode<S>> {
        let level = self.levels.get(depth.checked_sub(1)?)?;
        level.binary_search_by(|p| p.word.cmp(word)).ok().map(|i| &level[i])
    }

    /// Node of the word with its first letter removed.
    pub fn suffix_node(&self, depth: usize, word: &ReducedWord) -> Option<&DiskNode<S>> {
        self.node(depth - 1, &word.suffix()?)
    }
}
