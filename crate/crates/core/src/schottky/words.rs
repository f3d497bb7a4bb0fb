use std::fmt;

use super::ScheduleError;

/// Non-empty index sequence with no two equal neighbours.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedWord(Vec<usize>);

impl ReducedWord {
    pub fn new(indices: Vec<usize>) -> Result<Self, ScheduleError> {
        if indices.is_empty() {
            return Err(ScheduleError::NotReduced { word: indices, reason: "empty word" });
        }
        if indices.contains(&0) {
            return Err(ScheduleError::NotReduced { word: indices, reason: "indices start at 1" });
        }
        if indices.windows(2).any(|p| p[0] == p[1]) {
            return Err(ScheduleError::NotReduced { word: indices, reason: "repeated adjacent letter" });
        }
        Ok(ReducedWord(indices))
    }

    pub(crate) fn from_vec_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(!indices.is_empty() && indices.windows(2).all(|p| p[0] != p[1]));
        ReducedWord(indices)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    /// Word with the first letter removed, if anything remains.
    pub fn suffix(&self) -> Option<ReducedWord> {
        (self.0.len() > 1).then(|| ReducedWord(self.0[1..].to_vec()))
    }

    /// Word with the last letter removed, if anything remains.
    pub fn prefix(&self) -> Option<ReducedWord> {
        (self.0.len() > 1).then(|| ReducedWord(self.0[..self.0.len() - 1].to_vec()))
    }

    /// `letter` followed by `self`, if the result is reduced.
    pub fn prepend(&self, letter: usize) -> Option<ReducedWord> {
        if letter == self.0[0] || letter == 0 {
            return None;
        }
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Some(ReducedWord(v))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str(")")
    }
}

/// Reduced words of one length over `{k+1, ..., k+m}` in lexicographic order.
#[derive(Clone, Debug)]
pub struct WordStream {
    lo: usize,
    hi: usize,
    current: Option<Vec<usize>>,
}

/// Stream of the `m (m-1)^(n-1)` reduced words of length `n` over the
/// window `{k+1, ..., k+m}`.
pub fn enumerate_words(k: usize, m: usize, n: usize) -> WordStream {
    let (lo, hi) = (k + 1, k + m);
    let current = if n == 0 || m == 0 || (m == 1 && n >= 2) {
        None
    } else {
        let mut w = vec![lo; n];
        for j in 1..n {
            w[j] = smallest_after(lo, w[j - 1]);
        }
        Some(w)
    };
    WordStream { lo, hi, current }
}

fn smallest_after(lo: usize, prev: usize) -> usize {
    if prev == lo {
        lo + 1
    } else {
        lo
    }
}

impl WordStream {
    fn advance(&mut self, w: &mut [usize]) -> bool {
        for j in (0..w.len()).rev() {
            let mut next = w[j] + 1;
            if j > 0 && next == w[j - 1] {
                next += 1;
            }
            if next <= self.hi {
                w[j] = next;
                for t in j + 1..w.len() {
                    w[t] = smallest_after(self.lo, w[t - 1]);
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for WordStream {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        let mut w = self.current.take()?;
        let out = ReducedWord(w.clone());
        if self.advance(&mut w) {
            self.current = Some(w);
        }
        Some(out)
    }
}

/// `m (m-1)^(n-1)`, the number of reduced words of length `n >= 1`.
pub fn word_count(m: usize, n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    (m as u64) * (m.saturating_sub(1) as u64).pow(n as u32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        assert_eq!(enumerate_words(0, 2, 1).count(), 2);
        assert_eq!(enumerate_words(0, 3, 2).count(), 6);
        let words: Vec<_> = enumerate_words(2, 4, 3).collect();
        assert_eq!(words.len(), 36);
        assert_eq!(words[0].letters(), &[3, 4, 3]);
        assert_eq!(words.last().unwrap().letters(), &[6, 5, 6]);
        assert!(words.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(enumerate_words(5, 1, 2).count(), 0);
        assert_eq!(enumerate_words(5, 1, 1).count(), 1);
        for (m, n) in [(2, 5), (3, 4), (5, 3), (6, 4)] {
            assert_eq!(enumerate_words(1, m, n).count() as u64, word_count(m, n));
        }
    }

    #[test]
    fn brute_force_agreement() {
        let (k, m, n) = (2usize, 4usize, 3usize);
        let mut brute = Vec::new();
        for a in k + 1..=k + m {
            for b in k + 1..=k + m {
                for c in k + 1..=k + m {
                    if a != b && b != c {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        let got: Vec<Vec<usize>> = enumerate_words(k, m, n).map(|w| w.letters().to_vec()).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn word_validation() {
        assert!(ReducedWord::new(vec![1, 1]).is_err());
        assert!(ReducedWord::new(vec![]).is_err());
        assert!(ReducedWord::new(vec![0, 2]).is_err());
        let w = ReducedWord::new(vec![1, 2, 3]).unwrap();
        assert_eq!(w.suffix().unwrap().letters(), &[2, 3]);
        assert_eq!(w.prefix().unwrap().letters(), &[1, 2]);
        assert!(w.prepend(1).is_none());
        assert_eq!(w.prepend(4).unwrap().to_string(), "(4,1,2,3)");
    }
}
