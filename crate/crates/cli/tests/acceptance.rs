//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run alone with `cargo test -p nonconical-cli --test acceptance`.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonconical::dimension::{
    box_count, center_control, level_dimension_bisect, limit_sample, radii_sum, AlphaSumTable, Certificate, Verdict,
};
use nonconical::hyperbolic::{boundary_gromov_product, cosh_distance, visual_angle, BoundaryPoint, Circle, HPoint};
use nonconical::limit::{explore, Classification, ExploreConfig, PathKind, WordPath};
use nonconical::scalar::rational::{pow2, rational_from_f64};
use nonconical::scalar::{Ball, Exact};
use nonconical::schottky::{beardon_sweep, word_disk, DiskTree, GeneratorSchedule, ReducedWord, TreeOptions};

const BITS: usize = 256;
const SEED: u64 = 0x5eed_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn alpha_for(k: usize) -> BigRational {
    q(1, 2 * k as i64)
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonconical")).current_dir(dir).args(args).output().expect("binary runs")
}

fn radius_recursion() -> Outcome {
    let t = Instant::now();
    let s = GeneratorSchedule::standard(7);
    let reports = beardon_sweep(&s, 2, 5, 4, 1).expect("sweep");
    let elapsed = t.elapsed();
    let leaves = reports.iter().filter(|r| r.word.len() == 4).count();
    let failures = reports.iter().filter(|r| !r.holds).count();
    let worst = reports.iter().map(|r| r.ratio.clone()).max().expect("nonempty");
    outcome(
        leaves == 320 && failures == 0 && within(elapsed, 10.0),
        format!(
            "{} words ({leaves} of length 4), {failures} failures, max lhs/rhs {:.3e}, {:.2?}",
            reports.len(),
            nonconical::scalar::rational::rational_to_f64(&worst),
            elapsed
        ),
    )
}

fn radii_tail() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [2usize, 3, 4] {
        let s = GeneratorSchedule::standard(k + 6);
        let rhs = pow2(-(k as i64)) / q(3, 1);
        let exact = radii_sum::<Exact>(&s, k, &alpha_for(k), k + 6, BITS).expect("exact radii sum");
        let ball = radii_sum::<Ball>(&s, k, &alpha_for(k), k + 6, BITS).expect("ball radii sum");
        let sep = exact.total.hi() < &rhs && ball.total.hi() < &rhs;
        ok &= sep;
        parts.push(format!("k={k} total <= {:.4e} vs {:.4e}", ball.total.hi().to_f64_lossy(), rhs.to_f64_lossy()));
    }
    let elapsed = t.elapsed();
    outcome(ok && within(elapsed, 1.0), format!("{}, {:.2?}", parts.join("; "), elapsed))
}

fn center_sum() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [2usize, 3, 4] {
        let s = GeneratorSchedule::standard(k + 6);
        let rhs = pow2(1 - k as i64) / q(3, 1);
        let exact = center_control::<Exact>(&s, k, 6, &alpha_for(k), BITS).expect("exact center sum");
        let ball = center_control::<Ball>(&s, k, 6, &alpha_for(k), BITS).expect("ball center sum");
        ok &= [&exact, &ball].iter().all(|c| c.complete() && c.total.hi() < &rhs);
        parts.push(format!("k={k} total <= {:.4e} vs {:.4e}", ball.total.hi().to_f64_lossy(), rhs.to_f64_lossy()));
    }
    let elapsed = t.elapsed();
    outcome(ok && within(elapsed, 1.0), format!("{}, {:.2?}", parts.join("; "), elapsed))
}

fn level_monotonicity() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [2usize, 3] {
        let s = GeneratorSchedule::standard(k + 6);
        let tree = DiskTree::<Exact>::build(&s, k, 6, 4, &TreeOptions::default()).expect("tree");
        let table = AlphaSumTable::from_tree(&tree, &alpha_for(k), BITS, 1);
        let sums: Vec<f64> = (1..=4).map(|n| table.sum(n).hi().to_f64_lossy()).collect();
        ok &= (2..=4).all(|n| table.sum(n).hi() <= table.sum(n - 1).lo());
        parts.push(format!("k={k} S_1..S_4 = {}", sums.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", ")));
    }
    let elapsed = t.elapsed();
    outcome(ok && within(elapsed, 30.0), format!("{}, {:.2?}", parts.join("; "), elapsed))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, alpha, code, verdict) in
        [("2", "1/4", 0, Verdict::Certified), ("3", "1/6", 0, Verdict::Certified), ("2", "1/100", 1, Verdict::NotCertified)]
    {
        let file = format!("cert-{k}-{}.json", alpha.replace('/', "_"));
        let o = cli(dir.path(), &["certify", "--k", k, "--alpha", alpha, "--out", &file]);
        let got = o.status.code().unwrap_or(-1);
        let cert = std::fs::read_to_string(dir.path().join(&file)).ok().and_then(|t| Certificate::from_json(&t).ok());
        let seen = cert.as_ref().map(|c| c.verdict.label()).unwrap_or("missing");
        let label_printed = String::from_utf8_lossy(&o.stdout).contains(&format!("verdict: {}", verdict.label()));
        ok &= got == code && cert.map(|c| c.verdict) == Some(verdict) && label_printed;
        parts.push(format!("k={k} alpha={alpha}: exit {got}, {seen}"));
    }
    outcome(ok, parts.join("; "))
}

fn dimension_trend() -> Outcome {
    let s = GeneratorSchedule::standard(6);
    let tree = DiskTree::<Exact>::build(&s, 2, 4, 4, &TreeOptions::default()).expect("tree");
    let alphas: Vec<f64> = (1..=3).map(|n| level_dimension_bisect(&tree, n, 1e-9).expect("bisection").alpha).collect();
    let grid: Vec<BigRational> = (1..=32).map(|j| pow2(-j)).collect();
    let slope = box_count(&limit_sample(&tree, 4), &grid).expect("box count").slope;
    let monotone = alphas.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        monotone && slope <= 0.25 + 0.1,
        format!(
            "alpha_1..3 = {}; depth-4 box slope {slope:.4} (limit 0.35)",
            alphas.iter().map(|a| format!("{a:.5}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// Half-plane boundary point seen from `i` at disk angle `phi`.
fn from_disk_angle(phi: f64) -> BoundaryPoint<Ball> {
    match rational_from_f64(-1.0 / (phi / 2.0).tan()) {
        Some(x) => BoundaryPoint::Finite(Ball::from_rational(&x, BITS)),
        None => BoundaryPoint::Infinity,
    }
}

fn visual_metric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let o = HPoint::<Ball>::i(BITS);
    let half = Ball::from_rational(&q(1, 2), BITS);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let (pa, pb): (f64, f64) = (rng.gen_range(0.01..6.27), rng.gen_range(0.01..6.27));
        if (pa - pb).abs() < 1e-6 {
            continue;
        }
        let (a, b) = (from_disk_angle(pa), from_disk_angle(pb));
        let g = boundary_gromov_product(&a, &b, &o).expect("distinct points");
        let lhs = (-g.finite().expect("finite").clone()).exp().to_f64();
        let direct = ((pa - pb) / 2.0).sin().abs();
        let via_angle = (visual_angle(&a, &b, &o) * half.clone()).sin().to_f64();
        worst = worst.max((lhs - direct).abs()).max((lhs - via_angle).abs());
        pairs += 1;
    }
    let pi = Ball::pi(BITS);
    let mut sandwich_failures = 0;
    for j in 0..=10_000i64 {
        let theta = pi.clone() * Ball::from_rational(&q(j, 10_000), BITS);
        let h = theta * half.clone();
        let s = h.sin();
        let lower_gap = (h.clone() - s.clone()).lower();
        let upper_gap = (pi.clone() * s - h).lower();
        if lower_gap < q(0, 1) || upper_gap < q(0, 1) {
            sandwich_failures += 1;
        }
    }
    outcome(
        worst <= 1e-9 && sandwich_failures == 0,
        format!("{pairs} pairs, max |e^-(a|b) - sin(theta/2)| = {worst:.2e}; sandwich failures on 10001 angles: {sandwich_failures}"),
    )
}

fn random_rational(rng: &mut ChaCha8Rng, range: i64) -> BigRational {
    q(rng.gen_range(-range..=range), rng.gen_range(1..=997))
}

fn random_positive(rng: &mut ChaCha8Rng, range: i64) -> BigRational {
    q(rng.gen_range(1..=range), rng.gen_range(1..=997))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut involution_failures = 0;
    for _ in 0..1000 {
        let c = Circle::<Exact>::new(random_rational(&mut rng, 50_000), random_positive(&mut rng, 5_000)).expect("circle");
        let z = HPoint::<Exact>::new(random_rational(&mut rng, 50_000), random_positive(&mut rng, 50_000)).expect("point");
        let x = random_rational(&mut rng, 50_000);
        let back = c.invert_point(&c.invert_point(&z));
        let xb = c.invert_boundary(&c.invert_boundary(&BoundaryPoint::Finite(x.clone())));
        if back.x() != z.x() || back.y() != z.y() || xb.finite() != Some(&x) {
            involution_failures += 1;
        }
    }
    let s = GeneratorSchedule::standard(6);
    let mut agreement_failures = 0;
    for case in 0..1000 {
        let ok = if case % 2 == 0 {
            let (cq, rq) = (random_rational(&mut rng, 50_000), random_positive(&mut rng, 5_000));
            let (zx, zy) = (random_rational(&mut rng, 50_000), random_positive(&mut rng, 50_000));
            let (wx, wy) = (random_rational(&mut rng, 50_000), random_positive(&mut rng, 50_000));
            let exact = Circle::<Exact>::new(cq.clone(), rq.clone()).expect("circle");
            let ball = Circle::<Ball>::from_rationals(&cq, &rq, BITS).expect("circle");
            let z = HPoint::<Exact>::new(zx, zy).expect("point");
            let w = HPoint::<Exact>::new(wx, wy).expect("point");
            let ze = exact.invert_point(&z);
            let zb = ball.invert_point(&z.to_ball(BITS));
            zb.x().contains(ze.x()) && zb.y().contains(ze.y()) && cosh_distance(&zb, &w.to_ball(BITS)).contains(&cosh_distance(&ze, &w))
        } else {
            let len = rng.gen_range(1..=5);
            let mut letters = vec![rng.gen_range(1..=6)];
            while letters.len() < len {
                let l = rng.gen_range(1..=6);
                if l != *letters.last().expect("nonempty") {
                    letters.push(l);
                }
            }
            let w = ReducedWord::new(letters).expect("reduced");
            let e = word_disk::<Exact>(&s, &w, BITS).expect("exact disk");
            let b = word_disk::<Ball>(&s, &w, BITS).expect("ball disk");
            b.center().contains(e.center()) && b.radius().contains(e.radius())
        };
        if !ok {
            agreement_failures += 1;
        }
    }
    outcome(
        involution_failures == 0 && agreement_failures == 0,
        format!("involution 1000 cases, {involution_failures} failures; backend agreement 1000 cases, {agreement_failures} failures"),
    )
}

fn diagnostics() -> Outcome {
    let s = GeneratorSchedule::standard(6);
    let periodic = WordPath::new(vec![1, 2], PathKind::Periodic).expect("word");
    let escalating = WordPath::new(vec![3], PathKind::Escalating).expect("word");
    let mut ok = true;
    let mut parts = Vec::new();
    for step in [0.25, 0.125] {
        let cfg = ExploreConfig { horizon: 50.0, step, ball_n: 4, ..ExploreConfig::default() };
        let (p, _) = explore(&s, &periodic, &cfg).expect("periodic explore");
        let (e, _) = explore(&s, &escalating, &cfg).expect("escalating explore");
        let (pb, eb) = (p.beta_proxy.unwrap_or(f64::NAN), e.beta_proxy.unwrap_or(f64::NAN));
        ok &= p.classification == Classification::Recurrent && pb < 0.1;
        ok &= e.classification == Classification::Escaping && eb > 0.5;
        parts.push(format!(
            "step {step}: periodic {:?} beta {pb:.3}, escalating {:?} beta {eb:.3}",
            p.classification, e.classification
        ));
    }
    outcome(ok, format!("{} (heuristic; needs escalating beta > 0.5)", parts.join("; ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = |args: &[&str], file: &str| {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", file]);
        let o = cli(dir.path(), &full);
        (o.status.code(), std::fs::read(dir.path().join(file)).unwrap_or_default())
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, args) in [("certify", &["certify", "--k", "2", "--alpha", "1/4"][..]), ("render", &["render", "--m", "4", "--n", "4"][..])] {
        let mut outputs = Vec::new();
        for jobs in ["1", "1", "1", "4"] {
            let mut a = args.to_vec();
            a.extend(["--jobs", jobs]);
            outputs.push(run(&a, &format!("{name}.out")));
        }
        let same = outputs.iter().all(|o| o == &outputs[0]) && !outputs[0].1.is_empty();
        ok &= same;
        parts.push(format!("{name}: {} bytes, {}", outputs[0].1.len(), if same { "identical" } else { "DIFFERENT" }));
    }
    outcome(ok, format!("3 runs with --jobs 1 and 1 with --jobs 4; {}", parts.join("; ")))
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        nonconical::scalar::rational::rational_to_f64(self)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("radius recursion over every window word", radius_recursion),
        ("radii sum with analytic tail", radii_tail),
        ("center-control double sum with tail", center_sum),
        ("level-sum monotonicity", level_monotonicity),
        ("end-to-end certify verdicts and exit codes", end_to_end),
        ("dimension trend and box-count slope", dimension_trend),
        ("visual-metric identity and angle sandwich", visual_metric),
        ("involution and backend-agreement suites", property_suites),
        ("ray diagnostics for periodic and escalating words", diagnostics),
        ("determinism of certify and render", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {status} {name}: {} [{:.2?}]", i + 1, r.detail, t.elapsed());
        if !r.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
