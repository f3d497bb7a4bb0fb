use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_rational::BigRational;

use nonconical::dimension::{
    box_count, certify_dimension_upper, level_dimension_bisect, limit_sample, CertifyConfig, Certificate, DimensionError, Verdict,
};
use nonconical::limit::{explore as run_explore, ExploreConfig, PathKind, WordPath};
use nonconical::scalar::rational::{pow2, rational_to_f64};
use nonconical::scalar::{parse_rational, Backend, Ball, Exact, Scalar};
use nonconical::schottky::{DiskTree, GeneratorSchedule, TreeOptions};

use crate::config::{bad, RunConfig};
use crate::render::render_svg;

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn schedule(cfg: &RunConfig) -> anyhow::Result<u8> {
    let count = cfg.count.unwrap_or(6);
    if count < 1 {
        return Err(bad("--count must be at least 1"));
    }
    let s = cfg.schedule(count)?;
    emit(cfg.out.as_deref(), &(s.to_json() + "\n"))?;
    Ok(0)
}

fn dimension_error(e: DimensionError) -> anyhow::Error {
    bad(e.to_string())
}

fn certify_with<S: Scalar>(s: &GeneratorSchedule, cc: &CertifyConfig, backend: &Backend) -> anyhow::Result<Certificate> {
    certify_dimension_upper::<S>(s, cc, &backend.to_string()).map_err(dimension_error)
}

fn approx(text: &str) -> f64 {
    parse_rational(text).map(|q| rational_to_f64(&q)).unwrap_or(f64::NAN)
}

pub fn certify(cfg: &RunConfig) -> anyhow::Result<u8> {
    let k = cfg.k();
    let alpha = cfg.alpha()?;
    let m = cfg.m(6)?;
    let n_max = cfg.n_max(4)?;
    let backend = cfg.backend()?;
    let s = cfg.schedule(k + m)?;
    let cc = CertifyConfig { k, m, n_max, alpha, bits: backend.bits(), jobs: cfg.jobs()? };
    let cert = match backend {
        Backend::Exact => certify_with::<Exact>(&s, &cc, &backend)?,
        Backend::HiPrec { .. } => certify_with::<Ball>(&s, &cc, &backend)?,
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("certificate.json"));
    emit(Some(&out), &(cert.to_json() + "\n"))?;

    println!("k = {k}, alpha = {}, window m = {m}, n_max = {n_max}, backend {}", cert.alpha, cert.backend);
    for c in &cert.checks {
        println!(
            "  {:<24} {:<6} lhs ~ {:.6e}  rhs ~ {:.6e}  ({})",
            c.name,
            if c.holds { "holds" } else { "FAILS" },
            approx(&c.lhs),
            approx(&c.rhs),
            c.detail
        );
    }
    println!("verdict: {}", cert.verdict.label());
    if let Some(f) = cert.failing() {
        println!("failing check: {}", f.name);
    }
    println!("certificate written to {}", out.display());
    Ok(if cert.verdict == Verdict::Certified { 0 } else { 1 })
}

fn estimate_with<S: Scalar>(s: &GeneratorSchedule, cfg: &RunConfig, k: usize, m: usize) -> anyhow::Result<String> {
    let n = cfg.n_max(3)?;
    let box_depth = cfg.box_depth.unwrap_or(4);
    let scales = cfg.scales.unwrap_or(32);
    let tol = cfg.tol.unwrap_or(nonconical::dimension::DEFAULT_BISECT_TOL);
    if box_depth < 1 || scales < 2 || !(tol > 0.0) {
        return Err(bad("need --box-depth >= 1, --scales >= 2 and --tol > 0"));
    }
    let backend = cfg.backend()?;
    let opts = TreeOptions { bits: backend.bits(), jobs: cfg.jobs()?, ..Default::default() };
    let tree = DiskTree::<S>::build(s, k, m, n.max(box_depth), &opts).map_err(|e| bad(e.to_string()))?;
    let mut csv = String::from("n,alpha_n,residual\n");
    for level in 1..=n {
        match level_dimension_bisect(&tree, level, tol) {
            Ok(r) => writeln!(csv, "{level},{:.12},{:.3e}", r.alpha, r.residual)?,
            Err(e) => writeln!(csv, "{level},error,{}", e.to_string().replace(',', ";"))?,
        }
    }
    let grid: Vec<BigRational> = (1..=i64::from(scales)).map(|j| pow2(-j)).collect();
    let bc = box_count(&limit_sample(&tree, box_depth), &grid).map_err(|e| bad(e.to_string()))?;
    writeln!(csv, "box_count_depth_{box_depth},{:.12},", bc.slope)?;
    Ok(csv)
}

pub fn estimate(cfg: &RunConfig) -> anyhow::Result<u8> {
    let k = cfg.k();
    let m = cfg.m(4)?;
    let s = cfg.schedule(k + m)?;
    let csv = match cfg.backend()? {
        Backend::Exact => estimate_with::<Exact>(&s, cfg, k, m)?,
        Backend::HiPrec { .. } => estimate_with::<Ball>(&s, cfg, k, m)?,
    };
    emit(cfg.out.as_deref(), &csv)?;
    Ok(0)
}

pub fn render(cfg: &RunConfig) -> anyhow::Result<u8> {
    let k = cfg.k.unwrap_or(0);
    let m = cfg.m(3)?;
    let depth = cfg.depth.or(cfg.n_max).unwrap_or(3);
    let max_depth = cfg.max_depth.unwrap_or(5);
    if depth < 1 || depth > max_depth {
        return Err(bad(format!("render depth must lie in 1..={max_depth}, got {depth}")));
    }
    let width = cfg.width.unwrap_or(1200);
    if width < 16 {
        return Err(bad("--width must be at least 16"));
    }
    let s = cfg.schedule(k + m)?;
    let backend = cfg.backend()?;
    let opts = TreeOptions { bits: backend.bits(), jobs: cfg.jobs()?, ..Default::default() };
    let svg = match backend {
        Backend::Exact => render_svg(&DiskTree::<Exact>::build(&s, k, m, depth, &opts).map_err(|e| bad(e.to_string()))?, &s, width)?,
        Backend::HiPrec { .. } => render_svg(&DiskTree::<Ball>::build(&s, k, m, depth, &opts).map_err(|e| bad(e.to_string()))?, &s, width)?,
    };
    emit(cfg.out.as_deref(), &svg)?;
    Ok(0)
}

fn parse_word(text: &str) -> anyhow::Result<Vec<usize>> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    inner
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| bad(format!("bad letter {t:?} in word {text:?}"))))
        .collect()
}

pub fn explore(cfg: &RunConfig, periodic: bool, escalate: bool, summary: Option<&Path>) -> anyhow::Result<u8> {
    let word = parse_word(cfg.word.as_deref().ok_or_else(|| bad("--word is required"))?)?;
    let kind = match (periodic, escalate) {
        (true, _) => PathKind::Periodic,
        (_, true) => PathKind::Escalating,
        _ => PathKind::Finite,
    };
    let path = WordPath::new(word.clone(), kind).map_err(|e| bad(e.to_string()))?;
    let defaults = ExploreConfig::default();
    let ec = ExploreConfig {
        depth: cfg.depth.unwrap_or(if path.kind() == &PathKind::Finite { word.len() } else { defaults.depth }),
        horizon: cfg.horizon.unwrap_or(defaults.horizon),
        step: cfg.step.unwrap_or(defaults.step),
        ball_n: cfg.ball.unwrap_or(defaults.ball_n),
        ball_m: cfg.letters.unwrap_or(defaults.ball_m),
        bits: cfg.backend()?.bits(),
        jobs: cfg.jobs()?,
        ..defaults
    };
    if !(ec.step > 0.0) || !(ec.horizon >= 0.0) || ec.ball_m < 2 || ec.depth < 1 {
        return Err(bad("need --step > 0, --horizon >= 0, --letters >= 2 and --depth >= 1"));
    }
    let s = cfg.schedule(ec.ball_m.max(path.max_letter(ec.depth)))?;
    let (result, profile) = run_explore(&s, &path, &ec).map_err(|e| bad(e.to_string()))?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("profile.csv"));
    let summary = summary.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("json"));
    emit(Some(&out), &profile.to_csv())?;
    emit(Some(&summary), &(result.to_json() + "\n"))?;
    println!(
        "word {:?} ({:?}), limit point ~ {:.12e} +- 2^{:.1}",
        result.word, result.kind, result.limit_point, result.limit_radius_log2
    );
    println!(
        "classification (heuristic, T = {}, step = {}, ball {}): {}",
        ec.horizon,
        ec.step,
        ec.ball_n,
        serde_json::to_value(result.classification)?.as_str().unwrap_or("")
    );
    match result.beta_proxy {
        Some(b) => println!("beta proxy: {b:.4}"),
        None => println!("beta proxy: undefined (empty profile)"),
    }
    Ok(0)
}
