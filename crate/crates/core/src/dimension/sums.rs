use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::DimensionError;
use crate::scalar::rational::{format_rational, mul_pow2, rational_to_f64};
use crate::scalar::{nth_root, Enclosure, Scalar};
use crate::schottky::{contraction_factor, DiskTree, GeneratorSchedule, Provenance};

/// Significant bits kept when long sums are rounded outward.
pub(crate) const SUM_BITS: u32 = 160;

/// Encloses `2^e` for rational `e`.
pub fn pow2_rational(e: &BigRational, bits: u32) -> Enclosure {
    let b = e.denom().clone();
    let (int, rem) = e.numer().div_mod_floor(&b);
    let int: i64 = i64::try_from(&int).expect("exponent fits in i64");
    let frac = if rem.is_zero() {
        Enclosure::point(BigRational::one())
    } else {
        let r = usize::try_from(&rem).expect("small remainder");
        let q = u32::try_from(&b).expect("root index fits in u32");
        nth_root(&BigRational::from_integer(BigInt::one() << r), q, bits)
    };
    Enclosure::new(mul_pow2(frac.lo(), int), mul_pow2(frac.hi(), int))
}

/// `r_i^alpha = 2^(-2 i^2 alpha)` for the standard schedule.
pub fn standard_radius_pow(i: usize, alpha: &BigRational, bits: u32) -> Enclosure {
    pow2_rational(&(-alpha * BigRational::from_integer(BigInt::from(2 * i * i))), bits)
}

fn sum_rounded(terms: impl Iterator<Item = Enclosure>) -> Enclosure {
    terms.fold(Enclosure::zero(), |acc, t| (acc + t).rounded_outward(SUM_BITS))
}

/// Level sums `S_n = sum r_w^alpha` over one window, with pruning counts.
#[derive(Clone, Debug)]
pub struct AlphaSumTable {
    pub k: usize,
    pub m: usize,
    pub n_max: usize,
    pub alpha: BigRational,
    /// `sums[n - 1]` encloses `S_n`.
    pub sums: Vec<Enclosure>,
    pub pruned: Vec<u64>,
}

impl AlphaSumTable {
    pub fn from_tree<S: Scalar>(tree: &DiskTree<S>, alpha: &BigRational, bits: usize, jobs: usize) -> Self {
        let sums = (1..=tree.depth()).map(|n| level_sum(tree, n, alpha, bits, jobs)).collect();
        AlphaSumTable {
            k: tree.k(),
            m: tree.m(),
            n_max: tree.depth(),
            alpha: alpha.clone(),
            sums,
            pruned: (1..=tree.depth()).map(|n| tree.pruned(n)).collect(),
        }
    }

    pub fn sum(&self, n: usize) -> &Enclosure {
        &self.sums[n - 1]
    }

    /// CSV with columns `n,alpha,S_n,pruned_count`; `S_n` is the upper end
    /// of its enclosure.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha,S_n,pruned_count\n");
        for (i, s) in self.sums.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{:.17e},{}",
                i + 1,
                format_rational(&self.alpha),
                rational_to_f64(s.hi()),
                self.pruned[i]
            );
        }
        out
    }
}

/// Encloses `S_n(alpha)` over the nodes present at depth `n`.
pub fn level_sum<S: Scalar>(tree: &DiskTree<S>, n: usize, alpha: &BigRational, bits: usize, jobs: usize) -> Enclosure {
    let level = tree.level(n);
    let terms: Vec<Enclosure> = with_jobs(jobs, || {
        level.par_iter().map(|node| node.disk.radius().pow_enclosure(alpha, bits)).collect()
    });
    sum_rounded(terms.into_iter())
}

/// Runs `f` on a pool of `jobs` worker threads.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Certified upper bound for `sum_{i > i0} r_i^alpha` on the standard schedule.
#[derive(Clone, Debug)]
pub struct RadiiTail {
    pub i0: usize,
    /// Encloses `2 r_(i0+1)^alpha`, which bounds the tail.
    pub bound: Enclosure,
}

/// Geometric tail bound: for `i >= i0` consecutive terms shrink by
/// `2^(-2 alpha (2i + 1)) <= 2^(-(2 i0 + 1) alpha) <= 1/2`, so the tail is at
/// most twice its first term.
pub fn radii_tail_bound(
    s: &GeneratorSchedule,
    k: usize,
    alpha: &BigRational,
    i0: usize,
    bits: u32,
) -> Result<RadiiTail, DimensionError> {
    if s.provenance() != Provenance::Standard {
        return Err(DimensionError::Precondition("closed-form radii tails need the standard schedule".into()));
    }
    check_alpha(alpha)?;
    if i0 <= k {
        return Err(DimensionError::Precondition(format!("i0 = {i0} must exceed k = {k}")));
    }
    if alpha * BigRational::from_integer(BigInt::from(2 * i0 + 1)) < BigRational::one() {
        return Err(DimensionError::Precondition(format!(
            "ratio condition (2 i0 + 1) alpha >= 1 fails at i0 = {i0}; use i0 >= {}",
            min_tail_start(alpha)
        )));
    }
    let first = standard_radius_pow(i0 + 1, alpha, bits);
    Ok(RadiiTail { i0, bound: first.scale(&BigRational::from_integer(2.into())) })
}

/// Smallest `i0` with `(2 i0 + 1) alpha >= 1`.
pub fn min_tail_start(alpha: &BigRational) -> usize {
    let need = (alpha.recip() - BigRational::one()) / BigRational::from_integer(2.into());
    let c = need.ceil().to_integer();
    usize::try_from(&c).unwrap_or(0)
}

/// Window sum `sum_{i=k+1}^{i0} r_i^alpha` plus the analytic tail.
#[derive(Clone, Debug)]
pub struct RadiiSum {
    pub window: Enclosure,
    pub tail: RadiiTail,
    pub total: Enclosure,
}

pub fn radii_sum<S: Scalar>(
    s: &GeneratorSchedule,
    k: usize,
    alpha: &BigRational,
    i0: usize,
    bits: usize,
) -> Result<RadiiSum, DimensionError> {
    let tail = radii_tail_bound(s, k, alpha, i0, bits as u32)?;
    let ext = extended(s, i0);
    let mut terms = Vec::with_capacity(i0 - k);
    for i in k + 1..=i0 {
        let r = &ext.generator(i)?.radius;
        terms.push(S::from_rational(r, bits).pow_enclosure(alpha, bits));
    }
    let window = sum_rounded(terms.into_iter());
    // The tail itself lies anywhere in [0, bound].
    let tail_range = Enclosure::new(BigRational::zero(), tail.bound.hi().clone());
    let total = (&window + &tail_range).rounded_outward(SUM_BITS);
    Ok(RadiiSum { window, tail, total })
}

/// Standard schedules are extended on demand; other schedules are used as given.
pub(crate) fn extended(s: &GeneratorSchedule, upto: usize) -> GeneratorSchedule {
    if s.provenance() == Provenance::Standard && s.max_index() < upto {
        GeneratorSchedule::standard(upto)
    } else {
        s.clone()
    }
}

/// Double sum `sum_{i != j} (1/(|c_i - c_j| - 1))^(2 alpha)` over the window
/// `k+1..=window_end`, with an analytic tail on the standard schedule.
#[derive(Clone, Debug)]
pub struct CenterControl {
    pub window_end: usize,
    pub window: Enclosure,
    /// Bound on all pairs with an index beyond the window; `None` when the
    /// schedule has no closed form.
    pub tail: Option<Enclosure>,
    pub total: Enclosure,
    pub holds: bool,
}

impl CenterControl {
    /// Whether the infinite sum is covered (window plus tail).
    pub fn complete(&self) -> bool {
        self.tail.is_some()
    }
}

/// Pairs with larger index `j` satisfy `|c_i - c_j| - 1 >= 2^(j^2 + 2)`, so
/// the pairs with larger index `j` contribute at most
/// `a_j = 2 (j - k - 1) 2^(-2 alpha (j^2 + 2))`. The ratio `a_(j+1)/a_j` is
/// decreasing in `j`, giving `tail <= a_(J+1) / (1 - rho)` once
/// `rho = (J + 1 - k)/(J - k) 2^(-2 alpha (2J + 3)) < 1`.
fn center_tail(k: usize, window_end: usize, alpha: &BigRational, bits: u32) -> Option<Enclosure> {
    let j = window_end;
    let two_alpha = alpha * BigRational::from_integer(2.into());
    let jj = j + 1;
    let count = BigRational::from_integer(BigInt::from(2 * (jj - k - 1)));
    let a_first = pow2_rational(&(-&two_alpha * BigRational::from_integer(BigInt::from(jj * jj + 2))), bits).scale(&count);
    let growth = BigRational::new(BigInt::from(jj - k), BigInt::from(jj - k - 1));
    let rho = pow2_rational(&(-&two_alpha * BigRational::from_integer(BigInt::from(2 * jj + 1))), bits).scale(&growth);
    if rho.hi() >= &BigRational::one() {
        return None;
    }
    let hi = a_first.hi() / (BigRational::one() - rho.hi());
    Some(Enclosure::new(BigRational::zero(), hi))
}

pub fn center_control<S: Scalar>(
    s: &GeneratorSchedule,
    k: usize,
    m: usize,
    alpha: &BigRational,
    bits: usize,
) -> Result<CenterControl, DimensionError> {
    check_alpha(alpha)?;
    if m < 2 {
        return Err(DimensionError::Precondition("center control needs a window of at least two indices".into()));
    }
    let standard = s.provenance() == Provenance::Standard;
    let mut window_end = k + m;
    let mut tail = None;
    if standard {
        loop {
            tail = center_tail(k, window_end, alpha, bits as u32);
            if tail.is_some() {
                break;
            }
            window_end += 1;
        }
    }
    let ext = extended(s, window_end);
    let two_alpha = alpha * BigRational::from_integer(2.into());
    let mut terms = Vec::new();
    for i in k + 1..=window_end {
        for j in i + 1..=window_end {
            let f = contraction_factor(&ext, i, j)?;
            let t = S::from_rational(&f, bits).pow_enclosure(&two_alpha, bits);
            // Both orders of the pair.
            terms.push(t.scale(&BigRational::from_integer(2.into())));
        }
    }
    let window = sum_rounded(terms.into_iter());
    let total = match &tail {
        Some(t) => (&window + t).rounded_outward(SUM_BITS),
        None => window.clone(),
    };
    let holds = total.hi() <= &BigRational::one();
    Ok(CenterControl { window_end, window, tail, total, holds })
}

pub(crate) fn check_alpha(alpha: &BigRational) -> Result<(), DimensionError> {
    if !alpha.is_positive() || alpha > &BigRational::one() {
        return Err(DimensionError::Alpha(format!("alpha must lie in (0, 1], got {}", format_rational(alpha))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational::pow2;
    use crate::scalar::{Ball, Exact};
    use crate::schottky::{Generator, TreeOptions};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    // Oracle: f64 evaluation of sum_i 2^(-2 i^2 alpha).
    fn float_radii_sum(from: usize, to: usize, alpha: f64) -> f64 {
        (from..=to).map(|i| (-2.0 * (i * i) as f64 * alpha).exp2()).sum()
    }

    #[test]
    fn pow2_rational_matches_floats() {
        let e = pow2_rational(&q(-49, 2), 128);
        assert!((e.midpoint_f64() - (-24.5f64).exp2()).abs() < 1e-22);
        assert_eq!(pow2_rational(&q(-9, 1), 64), Enclosure::point(pow2(-9)));
        let e = pow2_rational(&q(7, 3), 64);
        assert!((e.midpoint_f64() - (7.0f64 / 3.0).exp2()).abs() < 1e-14);
    }

    #[test]
    fn first_level_sum() {
        let s = GeneratorSchedule::standard(6);
        let tree = DiskTree::<Exact>::build(&s, 2, 4, 2, &TreeOptions::default()).unwrap();
        let t = AlphaSumTable::from_tree(&tree, &q(1, 4), 256, 2);
        let expected = float_radii_sum(3, 6, 0.25);
        assert!((t.sum(1).midpoint_f64() - expected).abs() < 1e-15);
        assert!((expected - 0.0482769).abs() < 1e-6);
        assert!(t.sum(2).hi() <= t.sum(1).lo());
        let zero = AlphaSumTable::from_tree(&tree, &q(0, 1), 256, 1);
        assert_eq!(zero.sum(1), &Enclosure::point(q(4, 1)));
        assert_eq!(zero.sum(2), &Enclosure::point(q(12, 1)));
        let csv = t.to_csv();
        assert!(csv.starts_with("n,alpha,S_n,pruned_count\n1,1/4,"));
    }

    #[test]
    fn ball_and_exact_sums_agree() {
        let s = GeneratorSchedule::standard(6);
        let e = DiskTree::<Exact>::build(&s, 2, 3, 3, &TreeOptions::default()).unwrap();
        let b = DiskTree::<Ball>::build(&s, 2, 3, 3, &TreeOptions::default()).unwrap();
        let se = level_sum(&e, 3, &q(1, 4), 256, 1);
        let sb = level_sum(&b, 3, &q(1, 4), 256, 1);
        assert!(sb.lo() <= se.hi() && se.lo() <= sb.hi());
    }

    #[test]
    fn radii_tail_examples() {
        let s = GeneratorSchedule::standard(6);
        let t = radii_tail_bound(&s, 2, &q(1, 4), 6, 128).unwrap();
        // 2 r_7^(1/4) = 2 * 2^(-49/2).
        assert!((t.bound.midpoint_f64() - 2.0 * (-24.5f64).exp2()).abs() < 1e-20);
        assert!(t.bound.hi() <= &(pow2_rational(&q(-49, 4), 128).hi() * q(2, 1)));
        let full = radii_sum::<Exact>(&s, 2, &q(1, 4), 6, 256).unwrap();
        assert!(full.total.hi() <= &q(1, 12));
        // Oracle: direct float sum of the first 40 terms.
        let direct = float_radii_sum(3, 40, 0.25);
        assert!(full.total.lo() <= &BigRational::from_float(direct).unwrap());
        assert!(full.total.hi() >= &BigRational::from_float(direct * (1.0 - 1e-12)).unwrap());
        let later = radii_tail_bound(&s, 2, &q(1, 4), 7, 128).unwrap();
        assert!(later.bound.hi() < t.bound.lo());
        assert!(radii_tail_bound(&s, 2, &q(1, 100), 6, 128).is_err());
        assert!(radii_tail_bound(&s, 2, &q(1, 4), 2, 128).is_err());
        assert_eq!(min_tail_start(&q(1, 100)), 50);
    }

    #[test]
    fn center_control_examples() {
        let s = GeneratorSchedule::standard(8);
        let two = center_control::<Exact>(&GeneratorSchedule::from_entries(s.entries()[..4].to_vec(), Provenance::User), 2, 2, &q(1, 4), 256)
            .unwrap();
        assert_eq!(two.window, Enclosure::point(pow2(-8)));
        assert!(!two.complete());
        let full = center_control::<Exact>(&s, 2, 6, &q(1, 4), 256).unwrap();
        assert!(full.complete() && full.holds);
        assert!(full.total.hi() <= &q(1, 6));
        let close = GeneratorSchedule::from_entries(
            vec![
                Generator { index: 1, center: q(0, 1), radius: q(1, 4) },
                Generator { index: 2, center: q(2, 1), radius: q(1, 4) },
            ],
            Provenance::User,
        );
        let c = center_control::<Exact>(&close, 0, 2, &q(1, 4), 256).unwrap();
        assert_eq!(c.total, Enclosure::point(q(2, 1)));
        assert!(!c.holds);
        assert!(center_control::<Exact>(&s, 2, 6, &q(0, 1), 256).is_err());
    }
}
