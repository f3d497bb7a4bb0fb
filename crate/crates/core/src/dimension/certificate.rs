use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::sums::{center_control, check_alpha, extended, min_tail_start, radii_sum, AlphaSumTable, SUM_BITS};
use super::DimensionError;
use crate::scalar::rational::{format_rational, parse_rational, pow2};
use crate::scalar::{Enclosure, Scalar};
use crate::schottky::{DiskTree, GeneratorSchedule, Provenance, TreeOptions};

#[derive(Clone, Debug)]
pub struct CertifyConfig {
    pub k: usize,
    pub m: usize,
    pub n_max: usize,
    pub alpha: BigRational,
    pub bits: usize,
    pub jobs: usize,
}

impl CertifyConfig {
    /// Window `m = 6`, depth 4, `alpha = 1/(2k)`.
    pub fn standard(k: usize) -> Self {
        CertifyConfig {
            k,
            m: 6,
            n_max: 4,
            alpha: BigRational::new(1.into(), (2 * k.max(1)).into()),
            bits: crate::scalar::DEFAULT_BITS,
            jobs: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "certified")]
    Certified,
    #[serde(rename = "not certified")]
    NotCertified,
    /// Every window check holds but the schedule has no closed-form tails.
    #[serde(rename = "window-only")]
    WindowOnly,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Certified => "certified (window + analytic tails)",
            Verdict::NotCertified => "not certified",
            Verdict::WindowOnly => "window-only (no analytic tails for this schedule)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub m: usize,
    pub n_max: usize,
}

/// One inequality `lhs <= rhs`; `lhs` is an upper bound of the left side and
/// `rhs` a lower bound of the right side, both exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    /// Upper bound used for the part of the sum beyond the window.
    pub tail: Option<String>,
    /// Index range the window terms were taken from.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub alpha: String,
    pub window: WindowSpec,
    pub backend: String,
    pub schedule: Provenance,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DimensionError> {
        serde_json::from_str(text).map_err(|e| DimensionError::Certificate(e.to_string()))
    }

    /// First failing check, if any.
    pub fn failing(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.holds)
    }

    fn strict(&self) -> bool {
        self.backend != "exact"
    }

    /// Re-parses every recorded bound and re-decides each check and the
    /// verdict.
    pub fn verify(&self) -> Result<(), DimensionError> {
        for c in &self.checks {
            let parse = |s: &str| parse_rational(s).map_err(|e| DimensionError::Certificate(format!("{}: {e}", c.name)));
            let (l, r) = (parse(&c.lhs)?, parse(&c.rhs)?);
            if decide(&l, &r, self.strict()) != c.holds {
                return Err(DimensionError::Certificate(format!("check {} records the wrong outcome", c.name)));
            }
        }
        let expected = verdict_for(&self.checks, self.schedule);
        if expected != self.verdict {
            return Err(DimensionError::Certificate(format!("verdict should be {:?}", expected)));
        }
        Ok(())
    }
}

fn decide(lhs: &BigRational, rhs: &BigRational, strict: bool) -> bool {
    if strict {
        lhs < rhs
    } else {
        lhs <= rhs
    }
}

fn verdict_for(checks: &[Check], schedule: Provenance) -> Verdict {
    if checks.iter().any(|c| !c.holds) {
        Verdict::NotCertified
    } else if schedule == Provenance::Standard {
        Verdict::Certified
    } else {
        Verdict::WindowOnly
    }
}

fn make_check(name: String, lhs: &BigRational, rhs: &BigRational, tail: Option<&Enclosure>, detail: String, strict: bool) -> Check {
    Check {
        holds: decide(lhs, rhs, strict),
        name,
        lhs: format_rational(lhs),
        rhs: format_rational(rhs),
        tail: tail.map(|t| format_rational(t.hi())),
        detail,
    }
}

/// Runs the radii-sum, center-control and level-monotonicity checks for
/// `dim <= alpha` on the window `{k+1, ..., k+m}`.
///
/// The radii sum is compared with `1/(3 * 2^k)` and the center-control
/// double sum with 1. On the exact backend a check holds when `lhs <= rhs`;
/// on ball backends the enclosures must be strictly separated.
pub fn certify_dimension_upper<S: Scalar>(
    s: &GeneratorSchedule,
    cfg: &CertifyConfig,
    backend: &str,
) -> Result<Certificate, DimensionError> {
    check_alpha(&cfg.alpha)?;
    if cfg.m < 2 {
        return Err(DimensionError::Precondition(format!("window needs m >= 2, got {}", cfg.m)));
    }
    if cfg.n_max < 1 {
        return Err(DimensionError::Precondition("n_max must be at least 1".into()));
    }
    let strict = !S::from_i64(1, cfg.bits).is_exact();
    let standard = s.provenance() == Provenance::Standard;
    let (k, m) = (cfg.k, cfg.m);
    let mut checks = Vec::new();

    let radii_rhs = pow2(-(k as i64)) / BigRational::from_integer(3.into());
    if standard {
        let i0 = (k + m).max(min_tail_start(&cfg.alpha));
        let r = radii_sum::<S>(s, k, &cfg.alpha, i0, cfg.bits)?;
        checks.push(make_check(
            "radii_tail".into(),
            r.total.hi(),
            &radii_rhs,
            Some(&r.tail.bound),
            format!("indices {}..={i0}, tail from {}", k + 1, i0 + 1),
            strict,
        ));
    } else {
        let mut total = Enclosure::zero();
        for i in k + 1..=k + m {
            let r = &s.generator(i)?.radius;
            total = (total + S::from_rational(r, cfg.bits).pow_enclosure(&cfg.alpha, cfg.bits)).rounded_outward(SUM_BITS);
        }
        checks.push(make_check("radii_tail".into(), total.hi(), &radii_rhs, None, format!("indices {}..={}, no tail", k + 1, k + m), strict));
    }

    let cc = center_control::<S>(s, k, m, &cfg.alpha, cfg.bits)?;
    checks.push(make_check(
        "center_control".into(),
        cc.total.hi(),
        &BigRational::one(),
        cc.tail.as_ref(),
        match cc.tail {
            Some(_) => format!("pairs in {}..={}, tail beyond", k + 1, cc.window_end),
            None => format!("pairs in {}..={}, no tail", k + 1, cc.window_end),
        },
        strict,
    ));

    let sched = extended(s, k + m);
    let opts = TreeOptions { bits: cfg.bits, jobs: cfg.jobs, radius_floor: None, verify: true };
    let tree = DiskTree::<S>::build(&sched, k, m, cfg.n_max, &opts)?;
    let table = AlphaSumTable::from_tree(&tree, &cfg.alpha, cfg.bits, cfg.jobs);
    for n in 2..=cfg.n_max {
        checks.push(make_check(
            format!("level_monotonicity_n{n}"),
            table.sum(n).hi(),
            table.sum(n - 1).lo(),
            None,
            format!("words of length {n} vs {} over {}..={}", n - 1, k + 1, k + m),
            strict,
        ));
    }

    let verdict = verdict_for(&checks, s.provenance());
    Ok(Certificate {
        k,
        alpha: format_rational(&cfg.alpha),
        window: WindowSpec { m, n_max: cfg.n_max },
        backend: backend.to_string(),
        schedule: s.provenance(),
        checks,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Ball, Exact};
    use crate::schottky::Generator;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn standard_runs_certify() {
        for k in [2usize, 3] {
            let cfg = CertifyConfig { n_max: 3, ..CertifyConfig::standard(k) };
            let c = certify_dimension_upper::<Exact>(&GeneratorSchedule::standard(k + 6), &cfg, "exact").unwrap();
            assert_eq!(c.verdict, Verdict::Certified, "{c:?}");
            assert_eq!(c.checks[0].name, "radii_tail");
            assert_eq!(c.checks[0].rhs, if k == 2 { "1/12" } else { "1/24" });
            c.verify().unwrap();
            let back = Certificate::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn tiny_alpha_fails_center_control() {
        let cfg = CertifyConfig { alpha: q(1, 100), n_max: 2, ..CertifyConfig::standard(2) };
        let c = certify_dimension_upper::<Exact>(&GeneratorSchedule::standard(8), &cfg, "exact").unwrap();
        assert_eq!(c.verdict, Verdict::NotCertified);
        assert!(!c.checks.iter().find(|c| c.name == "center_control").unwrap().holds);
        c.verify().unwrap();
    }

    #[test]
    fn ball_backend_matches_exact_verdict() {
        let cfg = CertifyConfig { n_max: 2, ..CertifyConfig::standard(2) };
        let c = certify_dimension_upper::<Ball>(&GeneratorSchedule::standard(8), &cfg, "hiprec:256").unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        c.verify().unwrap();
    }

    #[test]
    fn tampering_is_detected_and_bad_alpha_rejected() {
        let cfg = CertifyConfig { n_max: 2, ..CertifyConfig::standard(2) };
        let mut c = certify_dimension_upper::<Exact>(&GeneratorSchedule::standard(8), &cfg, "exact").unwrap();
        c.checks[0].lhs = "1".into();
        assert!(c.verify().is_err());
        for a in [q(0, 1), q(3, 2), q(-1, 4)] {
            let cfg = CertifyConfig { alpha: a, ..CertifyConfig::standard(2) };
            assert!(matches!(
                certify_dimension_upper::<Exact>(&GeneratorSchedule::standard(8), &cfg, "exact"),
                Err(DimensionError::Alpha(_))
            ));
        }
    }

    #[test]
    fn user_schedules_are_window_only() {
        let entries: Vec<Generator> = GeneratorSchedule::standard(8).entries().to_vec();
        let s = GeneratorSchedule::from_entries(entries, Provenance::User);
        let cfg = CertifyConfig { n_max: 2, ..CertifyConfig::standard(2) };
        let c = certify_dimension_upper::<Exact>(&s, &cfg, "exact").unwrap();
        assert_eq!(c.verdict, Verdict::WindowOnly);
        assert!(c.checks.iter().all(|c| c.tail.is_none()));
    }
}
