//! The named experiments. Each returns a report; thresholds from the config
//! become checks and decide the exit code.

use anyhow::{bail, Context};
use fraclab_core::cover::{cover_at_depth, sample_cloud_at_depth};
use fraclab_core::dimension::{
    box_count, direction_sweep, estimate_cloud_dimension, estimate_ifs_dimension, fibonacci_directions, ltech1_certificate,
    BoxCountResult,
};
use fraclab_core::geometry::{separation_spectrum_levels, witness_direction};
use fraclab_core::maps::{
    algebraic_product, cartesian_cloud, distance_set, geodesic_project, plane_basis, plane_project_ifs, radial_project,
    tmain_condition_check, TmainOptions,
};
use fraclab_core::math::{self, Point};
use fraclab_core::subsystem::detect_exact_overlaps;
use fraclab_core::{check_ssc, Direction, Ifs, SmoothMap, WeightedCloud, Word};
use serde_json::json;

use crate::config::{direction, nums, LoadedConfig};
use crate::report::{Check, Report, Table};
use crate::sampling::{self, product_depth};
use crate::RunContext;

const DEFAULT_DECADES: usize = 3;

fn decades(cfg: &LoadedConfig) -> usize {
    cfg.config.decades.unwrap_or(DEFAULT_DECADES)
}

/// Box count of a derived cloud on the configured scales, or on powers of
/// the base ratio ending at four times the resolution.
fn estimate_cloud(
    cfg: &LoadedConfig,
    cloud: &WeightedCloud,
    default_base: f64,
) -> anyhow::Result<(BoxCountResult, serde_json::Value)> {
    if let Some(scales) = &cfg.config.scales {
        let r = box_count(cloud, &nums(scales))?;
        return Ok((r, json!({ "points": cloud.len(), "resolution": cloud.resolution() })));
    }
    let base = cfg.config.base.map(|b| b.0).unwrap_or(default_base);
    let e = estimate_cloud_dimension(cloud, base, decades(cfg))?;
    let info = json!({
        "points": e.points,
        "resolution": e.resolution,
        "base": e.base,
        "k_min": e.k_min,
        "k_max": e.k_max,
    });
    Ok((e.result, info))
}

fn require_dim(ifs: &Ifs, dims: &[usize], what: &str) -> anyhow::Result<()> {
    if !dims.contains(&ifs.dim()) {
        bail!("{what} needs an IFS of dimension {dims:?}, got {}", ifs.dim());
    }
    Ok(())
}

/// Targets use the similarity dimension, which is the Hausdorff dimension
/// only under strong separation.
fn flag_unseparated(ifs: &Ifs, report: &mut Report) {
    if !check_ssc(ifs, 10).is_proved() {
        report.hypothesis_holds = false;
        report
            .notes
            .push("strong separation not certified: the similarity dimension may exceed dim_H".into());
    }
}

fn tuple_cap(cfg: &LoadedConfig, ctx: &RunContext) -> usize {
    cfg.config.max_tuples.unwrap_or(ctx.max_cells)
}

fn product_estimate(
    cfg: &LoadedConfig,
    ctx: &RunContext,
    ifs: &Ifs,
    factors: usize,
) -> anyhow::Result<(BoxCountResult, serde_json::Value)> {
    let cap = tuple_cap(cfg, ctx);
    let depth = cfg
        .config
        .sampling
        .depth
        .unwrap_or_else(|| product_depth(ifs, factors, cap, 1));
    let line = sample_cloud_at_depth(ifs, depth, ctx.max_cells)?;
    let total = (line.len() as u128).pow(factors as u32);
    if total > cap as u128 {
        ctx.cap(format!("product tuples thinned from {total} to at most {cap}"));
    }
    let product = algebraic_product(&vec![&line; factors], cap)?;
    let (r, mut info) = estimate_cloud(cfg, &product, ifs.max_ratio())?;
    info["factor_depth"] = json!(depth);
    info["factor_points"] = json!(line.len());
    info["tuples"] = json!(total.min(cap as u128) as u64);
    Ok((r, info))
}

pub fn cprod2(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[1], "cprod2")?;
    let s = ifs.similarity_dimension();
    let target = (2.0 * s).min(1.0);
    let mut report = Report::new("cprod2", "dim_H Λ·Λ = min{2 dim_H Λ, 1}", ctx);
    flag_unseparated(&ifs, &mut report);
    let (r, info) = product_estimate(cfg, ctx, &ifs, 2)?;
    report.set_estimate(target, &r);
    report.details = json!({ "s": s, "two_s": 2.0 * s, "target": target, "sampling": info });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

pub fn tprod(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[1], "tprod")?;
    let s = ifs.similarity_dimension();
    let mut report = Report::new("tprod", "dim_H Λ > 1/3 implies dim_H Λ·Λ·Λ = 1", ctx);
    flag_unseparated(&ifs, &mut report);
    if s <= 1.0 / 3.0 {
        report.hypothesis_holds = false;
        report.notes.push("outside theorem hypothesis: dim_H Λ ≤ 1/3".into());
    }
    let (r, info) = product_estimate(cfg, ctx, &ifs, 3)?;
    report.set_estimate(1.0, &r);

    let p = &cfg.config.tprod;
    let line = sample_cloud_at_depth(&ifs, p.check_depth, ctx.max_cells)?;
    let positive = line.coords().iter().all(|&x| x > line.resolution());
    if !positive {
        report
            .notes
            .push("the attractor is not bounded away from 0; the gradient conditions are checked anyway".into());
    }
    let cube = cartesian_cloud(&[&line, &line, &line])?;
    let n = cube.len() as u128;
    if n * (n - 1) / 2 > p.check_pairs as u128 {
        ctx.cap(format!(
            "bi-Lipschitz pairs thinned from {} to at most {}",
            n * (n - 1) / 2,
            p.check_pairs
        ));
    }
    let opts = TmainOptions {
        domain: Some(([0.0; 3], [f64::INFINITY; 3])),
        max_pairs: p.check_pairs,
        ..TmainOptions::default()
    };
    let tm = tmain_condition_check(&SmoothMap::Product3, &cube, &opts)?;
    report.checks.push(Check::holds("tmain_gradient_nonzero", tm.gradient_pass));
    report.checks.push(Check::at_most(
        "tmain_max_normalized_cross",
        tm.max_normalized_cross,
        opts.cross_tol,
    ));
    report
        .checks
        .push(Check::holds("tmain_lipschitz_min_positive", tm.lipschitz_min > 0.0));
    report.details = json!({
        "s": s,
        "target": 1.0,
        "sampling": info,
        "condition_cloud_points": cube.len(),
        "tmain": tm,
    });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

/// First cylinder, in order of depth then word, whose enclosing ball stays
/// away from the pin.
fn cylinder_avoiding(ifs: &Ifs, pin: &Point, max_depth: usize, max_cells: usize) -> anyhow::Result<(Word, f64)> {
    let root = ifs.bounding_ball();
    for depth in 1..=max_depth {
        let cover = cover_at_depth(ifs, &root, depth, max_cells)?;
        if let Some(c) = cover.cells.iter().find(|c| math::dist(&c.center, pin) > c.radius) {
            return Ok((c.word.clone(), math::dist(&c.center, pin) - c.radius));
        }
    }
    bail!("no cylinder up to depth {max_depth} is separated from the pin {pin:?}")
}

pub fn tdistance(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[2, 3], "tdistance")?;
    let s = ifs.similarity_dimension();
    let p = &cfg.config.tdistance;
    let mut report = Report::new("tdistance", "dim_H Λ > 1 implies dim_H D_x(Λ) = 1", ctx);
    flag_unseparated(&ifs, &mut report);
    if s <= 1.0 {
        report.hypothesis_holds = false;
        report.notes.push("outside theorem hypothesis: dim_H Λ ≤ 1".into());
    }
    let pin = match &p.pin {
        Some(v) => {
            if v.len() != ifs.dim() {
                bail!("pin has {} coordinates for a {}-dimensional IFS", v.len(), ifs.dim());
            }
            math::pad(&nums(v))
        }
        None => ifs
            .maps()
            .get(p.pin_map)
            .with_context(|| format!("pin_map {} out of range", p.pin_map))?
            .fixed_point(),
    };
    let (word, gap) = match &p.cylinder {
        Some(w) => {
            let word = Word(w.clone());
            let f = ifs.compose(&word)?;
            let ball = ifs.bounding_ball().image(&f);
            let gap = math::dist(&ball.center, &pin) - ball.radius;
            if gap > 0.0 {
                (word, gap)
            } else {
                report
                    .notes
                    .push(format!("configured cylinder {word} meets the pin; refining"));
                let sub = ifs.cylinder_ifs(&word)?;
                let (w, g) = cylinder_avoiding(&sub, &pin, p.max_refine, ctx.max_cells)?;
                (word.concat(&w), g)
            }
        }
        None => cylinder_avoiding(&ifs, &pin, p.max_refine, ctx.max_cells)?,
    };
    report.notes.push(format!(
        "restricted to cylinder {word}, certified distance from the pin ≥ {gap}"
    ));
    let cylinder = ifs.cylinder_ifs(&word)?;
    let cloud = sampling::sample(&cylinder, &cfg.config.sampling, ctx)?;
    let distances = distance_set(&cloud, Some(&pin[..ifs.dim()]), usize::MAX)?;
    let (r, info) = estimate_cloud(cfg, &distances, ifs.max_ratio())?;
    report.set_estimate(1.0, &r);
    report.details = json!({
        "s": s,
        "target": 1.0,
        "pin": &pin[..ifs.dim()],
        "cylinder": word,
        "pin_gap": gap,
        "cloud_points": cloud.len(),
        "cloud_resolution": cloud.resolution(),
        "estimate": info,
    });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

pub fn cradproj(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[2], "cradproj")?;
    let s = ifs.similarity_dimension();
    let target = s.min(1.0);
    let mut report = Report::new("cradproj", "0 ∉ spt μ implies dim_H (P₂)_*μ = min{1, dim_H μ}", ctx);
    flag_unseparated(&ifs, &mut report);
    let ball = ifs.bounding_ball();
    if math::norm(&ball.center) <= ball.radius {
        report.hypothesis_holds = false;
        report
            .notes
            .push("the enclosing ball of the attractor contains the origin".into());
    }
    let cloud = sampling::sample(&ifs, &cfg.config.sampling, ctx)?;
    let radial = radial_project(&cloud, 0.0)?;
    let angles = geodesic_project(&radial.cloud, 0.0)?;
    let (r, info) = estimate_cloud(cfg, &angles, ifs.max_ratio())?;
    report.set_estimate(target, &r);
    report.details = json!({
        "s": s,
        "target": target,
        "r_min": radial.r_min,
        "cloud_points": cloud.len(),
        "estimate": info,
    });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

pub fn ltech1(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[2], "ltech1")?;
    let p = &cfg.config.ltech1;
    let angles: Vec<f64> = match &p.angles {
        Some(a) => a.clone(),
        None => (0..p.direction_grid)
            .map(|k| k as f64 * std::f64::consts::PI / p.direction_grid as f64)
            .collect(),
    };
    let dirs: Vec<Direction> = angles.iter().map(|&t| Direction::planar(t)).collect();
    let points: Vec<Point> = match (&p.test_points, &p.test_words) {
        (Some(pts), _) => pts.iter().map(|v| math::pad(&nums(v))).collect(),
        (None, Some(words)) => words
            .iter()
            .map(|w| Ok(ifs.compose(&Word(w.clone()))?.fixed_point()))
            .collect::<anyhow::Result<_>>()?,
        (None, None) => {
            let q = ifs.len() as u32;
            [vec![0, 1], vec![1, 2 % q], vec![2 % q, 0, 1]]
                .into_iter()
                .map(|w| Ok(ifs.compose(&Word(w))?.fixed_point()))
                .collect::<anyhow::Result<_>>()?
        }
    };
    let cert = ltech1_certificate(&ifs, &points, &dirs, p.n_max, ctx.max_cells)?;
    if cert.n_max < p.n_max {
        ctx.cap(format!(
            "n limited to {} (q^(nN) within the cell cap {}; N = {})",
            cert.n_max, ctx.max_cells, cert.block
        ));
    }
    let mut report = Report::new(
        "ltech1",
        "z_n(x) ≤ (1 − p_min^N)^n, hence dim_H πμ ≥ log(1 − p_min^N) / (N log λ) > 0",
        ctx,
    );
    let mut table = Table::new("records", &["n", "angle", "nx", "ny", "x", "y", "z_n", "bound", "holds"]);
    let mut worst = f64::NEG_INFINITY;
    for r in &cert.records {
        let k = dirs.iter().position(|d| *d == r.direction).expect("record direction");
        worst = worst.max(r.z - r.bound);
        table.push([
            r.n.to_string(),
            angles[k].to_string(),
            r.direction.vector()[0].to_string(),
            r.direction.vector()[1].to_string(),
            r.point[0].to_string(),
            r.point[1].to_string(),
            r.z.to_string(),
            r.bound.to_string(),
            r.holds(p.tolerance).to_string(),
        ]);
    }
    report.tables.push(table);
    report.checks.push(Check::at_least("records", cert.records.len() as f64, 1.0));
    report
        .checks
        .push(Check::holds("all_z_n_within_bound", cert.all_hold(p.tolerance)));
    report.checks.push(Check::at_most("max_z_minus_bound", worst, p.tolerance));
    report.checks.push(Check::holds("bound_c_positive", cert.bound_c > 0.0));
    report.checks.push(Check::holds("kappa_positive", cert.kappa > 0.0));
    report.estimate = Some(cert.bound_c);
    report.details = serde_json::to_value(&cert)?;
    Ok(report)
}

pub fn overlap_demo(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[3], "overlap-demo")?;
    let p = cfg
        .config
        .overlap
        .as_ref()
        .context("overlap-demo needs an [overlap] section")?;
    let n = direction(&p.normal)?;
    let levels = separation_spectrum_levels(&ifs, &n, p.depth, ctx.max_cells)?;
    let rep = levels.last().expect("at least one level");
    if rep.depth < p.depth {
        ctx.cap(format!(
            "separation refinement stopped at depth {} by the pair cap",
            rep.depth
        ));
    }
    let pi2 = match &p.along {
        Some(v) => direction(v)?,
        None => witness_direction(rep)?,
    };
    let (u, v) = plane_basis(&pi2)?;
    let d = math::sub(&rep.witness_points.0, &rep.witness_points.1);
    let witness_gap = math::dot(&d, &u).hypot(math::dot(&d, &v));
    let projected = plane_project_ifs(&ifs, &pi2)?;
    let overlaps = detect_exact_overlaps(&projected, p.overlap_depth, p.tolerance, ctx.max_cells)?;
    let full = estimate_ifs_dimension(&ifs, decades(cfg), ctx.max_cells)?;
    let flat = estimate_ifs_dimension(&projected, decades(cfg), ctx.max_cells)?;

    let mut report = Report::new(
        "overlap-demo",
        "projecting along the extremal difference is 2 to 1 and creates exact overlaps",
        ctx,
    );
    let mut table = Table::new("overlaps", &["word_a", "word_b"]);
    for (a, b) in &overlaps {
        table.push([a.to_string(), b.to_string()]);
    }
    report.tables.push(table);
    let mut brackets = Table::new("separation", &["depth", "sin_eps_lower", "sin_eps_upper", "active_pairs"]);
    for l in &levels {
        brackets.push([
            l.depth.to_string(),
            l.sin_eps_lower.to_string(),
            l.sin_eps_upper.to_string(),
            l.active_pairs.to_string(),
        ]);
    }
    report.tables.push(brackets);
    report
        .checks
        .push(Check::at_least("overlaps", overlaps.len() as f64, p.min_overlaps as f64));
    if let Some(max) = p.max_overlaps {
        report
            .checks
            .push(Check::at_most("overlaps_max", overlaps.len() as f64, max as f64));
    }
    report.estimate = Some(flat.result.slope);
    report.details = json!({
        "normal": n,
        "separation": rep,
        "projection_normal": pi2,
        "witness_gap_after_projection": witness_gap,
        "overlap_count": overlaps.len(),
        "dimension_unprojected": { "similarity": ifs.similarity_dimension(), "box": full.result.slope },
        "dimension_projected": { "similarity": projected.similarity_dimension(), "box": flat.result.slope },
    });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

pub fn sweep(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    require_dim(&ifs, &[3], "sweep")?;
    let p = &cfg.config.sweep;
    let dirs = fibonacci_directions(p.directions);
    let rows = direction_sweep(&ifs, &dirs, decades(cfg), ctx.max_cells)?;
    let s = ifs.similarity_dimension();
    let target = s.min(1.0);
    let mut table = Table::new("directions", &["nx", "ny", "nz", "slope", "r_squared"]);
    for r in &rows {
        let v = r.direction.vector();
        table.push([v[0], v[1], v[2], r.slope, r.r_squared]);
    }
    let low = rows.iter().filter(|r| r.slope < p.low_slope).count();
    let fraction = low as f64 / rows.len().max(1) as f64;
    let mut slopes: Vec<f64> = rows.iter().map(|r| r.slope).collect();
    slopes.sort_by(f64::total_cmp);
    let median = slopes.get(slopes.len() / 2).copied().unwrap_or(f64::NAN);
    let top = (slopes.last().copied().unwrap_or(1.0).max(target) * 10.0).ceil() / 10.0;
    let bins = p.bins.max(1);
    let mut hist = vec![0usize; bins];
    for &v in &slopes {
        let k = ((v.max(0.0) / top) * bins as f64) as usize;
        hist[k.min(bins - 1)] += 1;
    }
    let mut dat = String::from("# slope_bin_center count\n");
    for (k, c) in hist.iter().enumerate() {
        dat.push_str(&format!("{} {}\n", (k as f64 + 0.5) * top / bins as f64, c));
    }
    let mut report = Report::new(
        "sweep",
        "dim_P{n ∈ S² : dim_H π_n μ < min{1, dim_H μ}} ≤ 1 (exploratory)",
        ctx,
    );
    report.tables.push(table);
    report.plots.push(("histogram".into(), dat));
    report.target = Some(target);
    report.estimate = Some(median);
    report.abs_error = Some((median - target).abs());
    if let Some(max) = cfg.config.thresholds.max_low_fraction {
        report.checks.push(Check::at_most("low_slope_fraction", fraction, max));
    }
    report.details = json!({
        "s": s,
        "target": target,
        "directions": rows.len(),
        "low_slope": p.low_slope,
        "low_count": low,
        "low_fraction": fraction,
        "median_slope": median,
        "min_slope": slopes.first(),
        "max_slope": slopes.last(),
    });
    report.apply_thresholds(&cfg.config.thresholds);
    Ok(report)
}

pub fn estimate(cfg: &LoadedConfig, ctx: &RunContext) -> anyhow::Result<Report> {
    let ifs = cfg.ifs()?;
    let c = &cfg.config;
    let s = ifs.similarity_dimension();
    let mut report = Report::new("estimate", "box-counting estimate", ctx);
    let direct =
        c.pipeline.is_empty() && c.scales.is_none() && c.sampling.depth.is_none() && c.sampling.method == Default::default();
    let (r, info) = if direct {
        let e = estimate_ifs_dimension(&ifs, decades(cfg), ctx.max_cells)?;
        let info = json!({
            "points": e.points,
            "resolution": e.resolution,
            "base": e.base,
            "k_min": e.k_min,
            "k_max": e.k_max,
        });
        (e.result, info)
    } else {
        let cloud = sampling::sample(&ifs, &c.sampling, ctx)?;
        let out = sampling::run_pipeline(cloud, &c.pipeline, tuple_cap(cfg, ctx), ctx)?;
        estimate_cloud(cfg, &out, ifs.max_ratio())?
    };
    let target = c.target.unwrap_or(if c.pipeline.is_empty() { s } else { f64::NAN });
    report.claim = if c.pipeline.is_empty() {
        "box dimension of a strongly separated attractor equals its similarity dimension".into()
    } else {
        format!(
            "box-counting estimate after {}",
            c.pipeline.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" → ")
        )
    };
    if target.is_nan() {
        report.estimate = Some(r.slope);
        report.reliable = Some(r.is_reliable());
        report.tables.push(Table::box_counts("boxcount", &r));
        report.plots.push(("loglog".into(), crate::report::loglog_dat(&r)));
    } else {
        report.set_estimate(target, &r);
    }
    report.details = json!({ "similarity_dimension": s, "estimate": info });
    report.apply_thresholds(&c.thresholds);
    Ok(report)
}
