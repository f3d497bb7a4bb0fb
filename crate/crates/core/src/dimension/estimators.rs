use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::sums::SUM_BITS;
use super::DimensionError;
use crate::hyperbolic::Circle;
use crate::scalar::rational::ln_f64;
use crate::scalar::{Enclosure, Scalar};
use crate::schottky::DiskTree;

pub const DEFAULT_BISECT_TOL: f64 = 1e-9;

/// `sum r_j^s` over a cover; an upper bound for the `s`-dimensional content
/// of anything the cover covers.
pub fn hausdorff_content<S: Scalar>(cover: &[Circle<S>], s: &BigRational, bits: usize) -> Result<Enclosure, DimensionError> {
    if !s.is_positive() {
        return Err(DimensionError::Precondition("content exponent must be positive".into()));
    }
    Ok(cover
        .iter()
        .map(|c| c.radius().pow_enclosure(s, bits))
        .fold(Enclosure::zero(), |acc, t| (acc + t).rounded_outward(SUM_BITS)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BisectResult {
    pub alpha: f64,
    /// `S(alpha) - 1` at the returned value.
    pub residual: f64,
    pub iterations: u32,
}

fn level_sum_f64(ln_radii: &[f64], alpha: f64) -> f64 {
    ln_radii.iter().map(|l| (alpha * l).exp()).sum()
}

/// Solves `sum exp(alpha * ln r) = 1` for `alpha > 0` by bisection.
pub fn bisect_level_sum(ln_radii: &[f64], tol: f64) -> Result<BisectResult, DimensionError> {
    if ln_radii.iter().any(|l| !(*l < 0.0)) {
        return Err(DimensionError::NoRoot("every radius must be below 1".into()));
    }
    if ln_radii.len() < 2 {
        // S(0) = count <= 1 and S decreases, so S < 1 for every alpha > 0.
        return Err(DimensionError::NoRoot(format!("S(0) = {} leaves no sign change for alpha > 0", ln_radii.len())));
    }
    let mut hi = 1.0;
    while level_sum_f64(ln_radii, hi) > 1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(DimensionError::NoRoot("bracket doubling did not terminate".into()));
        }
    }
    let mut lo = 0.0;
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if level_sum_f64(ln_radii, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let alpha = 0.5 * (lo + hi);
    Ok(BisectResult { alpha, residual: level_sum_f64(ln_radii, alpha) - 1.0, iterations })
}

/// Exponent at which the depth-`n` level sum equals 1.
pub fn level_dimension_bisect<S: Scalar>(tree: &DiskTree<S>, n: usize, tol: f64) -> Result<BisectResult, DimensionError> {
    let ln: Vec<f64> = tree.level(n).iter().map(|nd| ln_f64(&nd.disk.radius().midpoint())).collect();
    bisect_level_sum(&ln, tol)
}

/// Centers of the depth-`n` disks, as exact rationals.
pub fn limit_sample<S: Scalar>(tree: &DiskTree<S>, n: usize) -> Vec<BigRational> {
    tree.level(n).iter().map(|nd| nd.disk.center().midpoint()).collect()
}

#[derive(Clone, Debug)]
pub struct BoxCount {
    pub scales: Vec<BigRational>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln N` against `ln(1/scale)` over the three
    /// finest scales.
    pub slope: f64,
}

/// Occupied cells `[j s, (j+1) s)` of a grid anchored at 0, per scale.
pub fn box_count(points: &[BigRational], scales: &[BigRational]) -> Result<BoxCount, DimensionError> {
    if scales.iter().any(|s| !s.is_positive()) {
        return Err(DimensionError::Slope("scales must be positive".into()));
    }
    let distinct: BTreeSet<&BigRational> = scales.iter().collect();
    if distinct.len() < 2 {
        return Err(DimensionError::Slope("need at least two distinct scales".into()));
    }
    if points.is_empty() {
        return Err(DimensionError::Slope("no points".into()));
    }
    let counts: Vec<usize> = scales
        .iter()
        .map(|s| points.iter().map(|p| (p / s).floor().to_integer()).collect::<BTreeSet<BigInt>>().len())
        .collect();
    let mut order: Vec<usize> = (0..scales.len()).collect();
    order.sort_by(|&a, &b| scales[a].cmp(&scales[b]));
    order.dedup_by(|a, b| scales[*a] == scales[*b]);
    let fine = &order[..order.len().min(3)];
    let xs: Vec<f64> = fine.iter().map(|&i| -ln_f64(&scales[i])).collect();
    let ys: Vec<f64> = fine.iter().map(|&i| (counts[i] as f64).ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    Ok(BoxCount { scales: scales.to_vec(), counts, slope })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational::pow2;
    use crate::scalar::Exact;
    use crate::schottky::{GeneratorSchedule, TreeOptions};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn content_examples() {
        assert_eq!(hausdorff_content::<Exact>(&[], &q(1, 2), 64).unwrap(), Enclosure::zero());
        let c = Circle::<Exact>::from_rationals(&q(0, 1), &q(1, 2), 64).unwrap();
        assert_eq!(hausdorff_content(&[c.clone()], &q(1, 1), 64).unwrap(), Enclosure::point(q(1, 2)));
        assert!(hausdorff_content(&[c], &q(0, 1), 64).is_err());
    }

    #[test]
    fn content_of_deeper_covers_shrinks() {
        let s = GeneratorSchedule::standard(6);
        let tree = crate::schottky::DiskTree::<Exact>::build(&s, 2, 4, 3, &TreeOptions::default()).unwrap();
        let alpha = q(1, 4);
        let mut prev: Option<Enclosure> = None;
        for n in 1..=3 {
            let cover: Vec<_> = tree.level(n).iter().map(|nd| nd.disk.clone()).collect();
            let h = hausdorff_content(&cover, &alpha, 256).unwrap();
            if let Some(p) = &prev {
                assert!(h.hi() <= p.lo());
            }
            prev = Some(h);
        }
    }

    #[test]
    fn bisection_examples() {
        let quarter = (0.25f64).ln();
        let r = bisect_level_sum(&[quarter, quarter], DEFAULT_BISECT_TOL).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-9);
        assert!(r.residual.abs() < 1e-8);
        assert!(bisect_level_sum(&[quarter], DEFAULT_BISECT_TOL).is_err());
        assert!(bisect_level_sum(&[quarter, 0.0], DEFAULT_BISECT_TOL).is_err());
        // Three words of radius 1/8 need alpha = ln 3 / ln 8.
        let r = bisect_level_sum(&[(0.125f64).ln(); 3], 1e-12).unwrap();
        assert!((r.alpha - 3f64.ln() / 8f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn level_exponents_decrease() {
        let s = GeneratorSchedule::standard(6);
        let tree = crate::schottky::DiskTree::<Exact>::build(&s, 2, 4, 3, &TreeOptions::default()).unwrap();
        let a: Vec<f64> = (1..=3).map(|n| level_dimension_bisect(&tree, n, DEFAULT_BISECT_TOL).unwrap().alpha).collect();
        assert!(a[0] >= a[1] && a[1] >= a[2], "{a:?}");
        assert!(a[0] < 1.0);
    }

    #[test]
    fn box_count_examples() {
        let scales: Vec<BigRational> = (1..=8).map(|j| pow2(-j)).collect();
        let single = box_count(&[q(1, 3)], &scales).unwrap();
        assert_eq!(single.slope, 0.0);
        let grid: Vec<BigRational> = (0..256).map(|i| q(i, 256)).collect();
        let g = box_count(&grid, &scales).unwrap();
        assert_eq!(g.counts, (1..=8).map(|j| 1usize << j).collect::<Vec<_>>());
        assert!((g.slope - 1.0).abs() < 1e-12);
        assert!(box_count(&grid, &[q(1, 2), q(1, 2)]).is_err());
        assert!(box_count(&grid, &[q(1, 2), q(0, 1)]).is_err());
    }
}
