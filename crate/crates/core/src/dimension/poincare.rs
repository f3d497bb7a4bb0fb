use num_rational::BigRational;
use num_traits::Zero;

use super::DimensionError;
use crate::hyperbolic::{hyp_distance, Circle, HPoint};
use crate::scalar::{Ball, Scalar};
use crate::schottky::{word_count, GeneratorSchedule};

/// Orbit image `gamma p` labelled by the word of `gamma`; the empty word is
/// the identity.
#[derive(Clone, Debug)]
pub struct OrbitPoint<S> {
    pub word: Vec<usize>,
    pub point: HPoint<S>,
}

/// Images of a basepoint under every reduced word of length at most `n` over
/// `{k+1, ..., k+m}`, shell by shell in lexicographic order.
#[derive(Clone, Debug)]
pub struct OrbitBall<S> {
    base: HPoint<S>,
    k: usize,
    m: usize,
    shells: Vec<Vec<OrbitPoint<S>>>,
}

impl<S: Scalar> OrbitBall<S> {
    pub fn build(s: &GeneratorSchedule, k: usize, m: usize, p: &HPoint<S>, n: usize, bits: usize) -> Result<Self, DimensionError> {
        let circles: Vec<(usize, Circle<S>)> =
            (k + 1..=k + m).map(|i| Ok((i, s.circle::<S>(i, bits)?))).collect::<Result<_, DimensionError>>()?;
        let mut shells = vec![vec![OrbitPoint { word: Vec::new(), point: p.clone() }]];
        for _ in 1..=n {
            let prev = shells.last().unwrap();
            let mut next = Vec::new();
            for (a, c) in &circles {
                for op in prev.iter().filter(|op| op.word.first() != Some(a)) {
                    let mut word = Vec::with_capacity(op.word.len() + 1);
                    word.push(*a);
                    word.extend_from_slice(&op.word);
                    next.push(OrbitPoint { word, point: c.invert_point(&op.point) });
                }
            }
            shells.push(next);
        }
        Ok(OrbitBall { base: p.clone(), k, m, shells })
    }

    pub fn base(&self) -> &HPoint<S> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Word radius.
    pub fn radius(&self) -> usize {
        self.shells.len() - 1
    }

    /// Points whose word has length exactly `j`.
    pub fn shell(&self, j: usize) -> &[OrbitPoint<S>] {
        &self.shells[j]
    }

    pub fn points(&self) -> impl Iterator<Item = &OrbitPoint<S>> {
        self.shells.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.shells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `1 + sum_j m (m-1)^(j-1)`.
    pub fn expected_len(m: usize, n: usize) -> u64 {
        1 + (1..=n).map(|j| word_count(m, j)).sum::<u64>()
    }
}

/// Shell sums `sum_{|gamma| = j} exp(-s d(p, gamma p))` of the orbital series.
#[derive(Clone, Debug)]
pub struct PoincareSeries {
    pub exponent: BigRational,
    pub shells: Vec<Ball>,
    pub partial: Vec<Ball>,
}

impl PoincareSeries {
    /// `shell_j / shell_(j-1)` for `j >= 1`; ratios below 1 suggest
    /// convergence at this exponent.
    pub fn decay_ratios(&self) -> Vec<f64> {
        self.shells.windows(2).map(|w| (w[1].clone() / w[0].clone()).to_f64()).collect()
    }

    pub fn total(&self) -> &Ball {
        self.partial.last().expect("identity shell")
    }
}

pub fn poincare_partial<S: Scalar>(ball: &OrbitBall<S>, exponent: &BigRational, bits: usize) -> PoincareSeries {
    let p = ball.base();
    let e = Ball::from_rational(&-exponent, bits);
    let shells: Vec<Ball> = (0..=ball.radius())
        .map(|j| {
            let pts = ball.shell(j);
            if exponent.is_zero() {
                return Ball::from_i64(pts.len() as i64, bits);
            }
            pts.iter()
                .map(|op| (e.clone() * hyp_distance(p, &op.point).to_ball(bits)).exp())
                .fold(Ball::zero(bits), |a, b| a + b)
        })
        .collect();
    let mut partial = Vec::with_capacity(shells.len());
    let mut acc = Ball::zero(bits);
    for sh in &shells {
        acc = acc + sh.clone();
        partial.push(acc.clone());
    }
    PoincareSeries { exponent: exponent.clone(), shells, partial }
}
