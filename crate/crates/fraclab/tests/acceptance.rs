//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! `cargo test -p fraclab --test acceptance`

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fraclab::{run, Experiment, LoadedConfig, Report};
use fraclab_core::cover::sample_cloud_at_depth;
use fraclab_core::dimension::estimate_ifs_dimension;
use fraclab_core::geometry::{cone_intersect_test, separation_spectrum_levels, ConeTest, DoubleCone};
use fraclab_core::maps::{geodesic_project, radial_project};
use fraclab_core::math::{self, Point};
use fraclab_core::subsystem::detect_exact_overlaps;
use fraclab_core::{check_ssc, Direction, Ifs, SmoothMap, WeightedCloud, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_config(experiment: Experiment, file: &str) -> Result<Report, String> {
    let cfg = LoadedConfig::from_path(&configs().join(file)).map_err(|e| format!("{file}: {e:#}"))?;
    run(experiment, &cfg, None, None).map_err(|e| format!("{file}: {e:#}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn homogeneous(ratio: f64, t: &[&[f64]]) -> Ifs {
    Ifs::homogeneous(ratio, t).expect("fixture")
}

fn grid(ratio: f64, t: &[[f64; 3]], dim: usize) -> Ifs {
    let refs: Vec<&[f64]> = t.iter().map(|p| &p[..dim]).collect();
    homogeneous(ratio, &refs)
}

fn five_in_space() -> Ifs {
    let a = 2.0 / 3.0;
    grid(
        1.0 / 3.0,
        &[[0.0, 0.0, 0.0], [a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a], [a, a, a]],
        3,
    )
}

fn moran_oracle() -> Outcome {
    let (a, b) = (2.0 / 5.0, 4.0 / 5.0);
    let mut fifth_square = Vec::new();
    for x in [0.0, a, b] {
        for y in [0.0, a, b] {
            fifth_square.push([x, y, 0.0]);
        }
    }
    let corners = |s: f64| -> Vec<[f64; 3]> {
        (0..8u32)
            .map(|i| [(i >> 2 & 1) as f64 * s, (i >> 1 & 1) as f64 * s, (i & 1) as f64 * s])
            .collect()
    };
    let cases: Vec<(&str, Ifs)> = vec![
        ("d1 q2 1/3", homogeneous(1.0 / 3.0, &[&[0.0], &[2.0 / 3.0]])),
        ("d1 q2 1/4", homogeneous(0.25, &[&[0.0], &[0.75]])),
        ("d1 q3 1/5", homogeneous(0.2, &[&[0.0], &[a], &[b]])),
        (
            "d2 q3 1/3",
            grid(1.0 / 3.0, &[[0.0; 3], [2.0 / 3.0, 0.0, 0.0], [0.0, 2.0 / 3.0, 0.0]], 2),
        ),
        (
            "d2 q4 1/4",
            grid(0.25, &[[0.0; 3], [0.75, 0.0, 0.0], [0.0, 0.75, 0.0], [0.75, 0.75, 0.0]], 2),
        ),
        (
            "d2 q5 1/5",
            grid(0.2, &[[0.0; 3], [b, 0.0, 0.0], [0.0, b, 0.0], [b, b, 0.0], [a, a, 0.0]], 2),
        ),
        ("d2 q8 1/5", grid(0.2, &fifth_square[..8], 2)),
        ("d3 q5 1/3", five_in_space()),
        ("d3 q6 1/5", grid(0.2, &corners(b)[..6], 3)),
        ("d3 q8 1/4", grid(0.25, &corners(0.75), 3)),
    ];
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for (name, ifs) in &cases {
        ensure(check_ssc(ifs, 10).is_proved(), || format!("{name} is not certified SSC"))?;
        let s = ifs.similarity_dimension();
        let e = estimate_ifs_dimension(ifs, 3, fraclab_core::DEFAULT_MAX_CELLS).map_err(|e| format!("{name}: {e}"))?;
        ensure(e.k_max - e.k_min >= 3, || {
            format!("{name}: only {} decades", e.k_max - e.k_min)
        })?;
        let err = (e.result.slope - s).abs();
        ensure(err <= 0.03, || format!("{name}: slope {} vs {s}", e.result.slope))?;
        worst = worst.max(err);
        names.push(*name);
    }
    Ok(format!("{} systems, worst |slope - s| = {worst:.2e}", names.len()))
}

fn cprod2() -> Outcome {
    let a = run_config(Experiment::Cprod2, "cprod2_cantor.toml")?;
    let ea = a.estimate.unwrap_or(f64::NAN);
    ensure(ea >= 0.92, || format!("Cantor estimate {ea} < 0.92"))?;
    let b = run_config(Experiment::Cprod2, "cprod2_fifth.toml")?;
    let eb = b.estimate.unwrap_or(f64::NAN);
    let target = 2.0 * 2f64.ln() / 5f64.ln();
    ensure((eb - target).abs() <= 0.08, || format!("λ=1/5 estimate {eb} vs {target}"))?;
    ensure(a.pass && b.pass, || "declared thresholds failed".into())?;
    Ok(format!("Cantor {ea:.4} (target 1), λ=1/5 {eb:.4} (target {target:.4})"))
}

fn tprod() -> Outcome {
    let r = run_config(Experiment::Tprod, "tprod.toml")?;
    let e = r.estimate.unwrap_or(f64::NAN);
    ensure(r.hypothesis_holds, || "hypothesis flag unset".into())?;
    ensure(e >= 0.85, || format!("estimate {e} < 0.85"))?;
    let tm = &r.details["tmain"];
    let cross = tm["max_normalized_cross"].as_f64().unwrap_or(f64::NAN);
    let lmin = tm["lipschitz_min"].as_f64().unwrap_or(f64::NAN);
    ensure(tm["gradient_pass"] == true, || "gradient condition failed".into())?;
    ensure(cross <= 1e-10, || format!("normalized cross term {cross}"))?;
    ensure(lmin > 0.0, || format!("L_min = {lmin}"))?;
    ensure(r.pass, || "declared thresholds failed".into())?;
    Ok(format!("estimate {e:.4}, cross {cross:.1e}, L_min {lmin:.4}"))
}

fn tdistance() -> Outcome {
    let r = run_config(Experiment::Tdistance, "tdistance.toml")?;
    let e = r.estimate.unwrap_or(f64::NAN);
    ensure(e >= 0.90, || format!("estimate {e} < 0.90"))?;
    ensure(r.pass, || "declared thresholds failed".into())?;
    Ok(format!(
        "estimate {e:.4} (target 1, s = {:.4})",
        five_in_space().similarity_dimension()
    ))
}

fn cradproj() -> Outcome {
    let mut out = Vec::new();
    for (file, target) in [("cradproj_corner.toml", 1.0), ("cradproj_pair.toml", 2f64.ln() / 3f64.ln())] {
        let r = run_config(Experiment::Cradproj, file)?;
        let e = r.estimate.unwrap_or(f64::NAN);
        ensure((e - target).abs() <= 0.08, || format!("{file}: {e} vs {target}"))?;
        ensure(r.hypothesis_holds && r.pass, || {
            format!("{file}: hypothesis or thresholds failed")
        })?;
        out.push(format!("{e:.4} vs {target:.4}"));
    }
    Ok(out.join(", "))
}

fn ltech1() -> Outcome {
    let r = run_config(Experiment::Ltech1, "ltech1.toml")?;
    let d = &r.details;
    let block = d["block"].as_u64().ok_or("no block")? as i32;
    let n_max = d["n_max"].as_u64().ok_or("no n_max")? as usize;
    let expected = (1..).take_while(|&n| 3f64.powi(n * block) <= 1e7).count();
    ensure(n_max == expected, || {
        format!("n_max {n_max}, expected {expected} for N = {block}")
    })?;
    let records = d["records"].as_array().ok_or("no records")?;
    ensure(records.len() == 8 * 3 * n_max, || format!("{} records", records.len()))?;
    let mut worst = f64::NEG_INFINITY;
    for rec in records {
        let z = rec["z"].as_f64().ok_or("record z")?;
        let bound = rec["bound"].as_f64().ok_or("record bound")?;
        worst = worst.max(z - bound);
    }
    ensure(worst <= 1e-12, || format!("z_n exceeds the bound by {worst}"))?;
    let c = d["bound_c"].as_f64().unwrap_or(f64::NAN);
    ensure(c > 0.0, || format!("bound_c = {c}"))?;
    ensure(r.pass, || "report checks failed".into())?;
    Ok(format!(
        "{} records, n ≤ {n_max}, max(z - bound) = {worst:.3e}, bound_c = {c:.5}",
        records.len()
    ))
}

fn geometry() -> Outcome {
    let n = Direction::new(&[-0.6825, 0.5779, -0.4475]).map_err(|e| e.to_string())?;
    let levels = separation_spectrum_levels(&five_in_space(), &n, 5, 8_000_000).map_err(|e| e.to_string())?;
    let from2: Vec<_> = levels.iter().filter(|l| l.depth >= 2).collect();
    ensure(from2.last().map(|l| l.depth) == Some(5), || {
        "refinement stopped before depth 5".into()
    })?;
    for l in &from2 {
        let w = l.witness_value();
        ensure(l.sin_eps_lower <= w + 1e-9 && w <= l.sin_eps_upper + 1e-9, || {
            format!(
                "depth {}: witness {w} outside [{}, {}]",
                l.depth, l.sin_eps_lower, l.sin_eps_upper
            )
        })?;
    }
    for w in from2.windows(2) {
        ensure(
            w[1].sin_eps_lower >= w[0].sin_eps_lower && w[1].sin_eps_upper <= w[0].sin_eps_upper,
            || format!("bracket widened between depths {} and {}", w[0].depth, w[1].depth),
        )?;
    }
    let a = 2.0 / 3.0;
    let flat = grid(1.0 / 3.0, &[[0.0; 3], [0.0, a, 0.0], [a, 0.0, 0.0], [a, a, 0.0]], 3);
    let ez = Direction::axis(3, 2).map_err(|e| e.to_string())?;
    let empty = DoubleCone::new(&[0.5, 0.5, 0.5], ez, PI / 12.0).map_err(|e| e.to_string())?;
    let t = cone_intersect_test(&flat, &empty, 1.0, 6, 1 << 22).map_err(|e| e.to_string())?;
    ensure(matches!(t, ConeTest::EmptyCertified { .. }), || {
        format!("empty fixture gave {t:?}")
    })?;
    let corners: Vec<[f64; 3]> = (0..8u32)
        .map(|i| [(i >> 2 & 1) as f64 * 0.5, (i >> 1 & 1) as f64 * 0.5, (i & 1) as f64 * 0.5])
        .collect();
    let cube = grid(0.5, &corners, 3);
    let axis = Direction::new(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    let cone = DoubleCone::new(&[0.5, 0.5, 0.5], axis, PI / 6.0).map_err(|e| e.to_string())?;
    let t = cone_intersect_test(&cube, &cone, 0.5, 6, 1 << 22).map_err(|e| e.to_string())?;
    ensure(matches!(t, ConeTest::NonemptyWitness { .. }), || {
        format!("cube fixture gave {t:?}")
    })?;
    let last = from2.last().expect("levels");
    Ok(format!(
        "depth 5 bracket [{:.5}, {:.5}], EmptyCertified and NonemptyWitness as expected",
        last.sin_eps_lower, last.sin_eps_upper
    ))
}

fn random_word(rng: &mut ChaCha8Rng, q: usize, max_len: usize) -> Word {
    let len = rng.random_range(1..=max_len);
    Word((0..len).map(|_| rng.random_range(0..q as u32)).collect())
}

fn suite_composition(rng: &mut ChaCha8Rng) -> Outcome {
    let systems = [five_in_space(), homogeneous(1.0 / 3.0, &[&[0.0], &[2.0 / 3.0]])];
    let mut cases = 0;
    for ifs in &systems {
        for _ in 0..200 {
            let u = random_word(rng, ifs.len(), 6);
            let v = random_word(rng, ifs.len(), 6);
            let uv = ifs.compose(&u.concat(&v)).map_err(|e| e.to_string())?;
            let split = ifs
                .compose(&u)
                .map_err(|e| e.to_string())?
                .compose(&ifs.compose(&v).map_err(|e| e.to_string())?);
            let mut x = [0.0; 3];
            for v in x.iter_mut().take(ifs.dim()) {
                *v = rng.random_range(-1.0..1.0);
            }
            let d = math::dist(&uv.apply(&x), &split.apply(&x));
            ensure(d <= 1e-12 && (uv.ratio() - split.ratio()).abs() <= 1e-15, || {
                format!("f_{u}{v} differs by {d}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} word pairs"))
}

fn suite_fixed_points(rng: &mut ChaCha8Rng) -> Outcome {
    let ifs = five_in_space();
    let root = ifs.bounding_ball();
    for _ in 0..300 {
        let w = random_word(rng, ifs.len(), 7);
        let f = ifs.compose(&w).map_err(|e| e.to_string())?;
        let p = f.fixed_point();
        ensure(math::dist(&f.apply(&p), &p) <= 1e-12, || {
            format!("f_{w} moves its fixed point")
        })?;
        let ball = root.image(&f);
        ensure(math::dist(&p, &ball.center) <= ball.radius + 1e-12, || {
            format!("fixed point of {w} outside its ball")
        })?;
        let direct = ifs
            .natural_projection_point(&Word(w.0.repeat(40 / w.len() + 1)))
            .map_err(|e| e.to_string())?;
        ensure(math::dist(&direct, &p) <= 1e-12, || {
            format!("π(w^∞) differs from the fixed point of {w}")
        })?;
    }
    Ok("300 words".into())
}

fn suite_geodesic(_: &mut ChaCha8Rng) -> Outcome {
    let shift = [0.5, 0.2, 0.1];
    let a = 2.0 / 3.0;
    let t: Vec<[f64; 3]> = [[0.0, 0.0, 0.0], [a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a], [a, a, a]]
        .iter()
        .map(|p| math::add(p, &shift))
        .collect();
    let cloud = sample_cloud_at_depth(&grid(1.0 / 3.0, &t, 3), 5, 1 << 22).map_err(|e| e.to_string())?;
    let lhs =
        geodesic_project(&radial_project(&cloud, 0.0).map_err(|e| e.to_string())?.cloud, 1e-9).map_err(|e| e.to_string())?;
    let planar: Vec<Point> = cloud.points().map(|p| [p[0], p[1], 0.0]).collect();
    let plane =
        WeightedCloud::from_points(2, &planar, cloud.weights().to_vec(), cloud.resolution()).map_err(|e| e.to_string())?;
    let rhs = geodesic_project(&radial_project(&plane, 0.0).map_err(|e| e.to_string())?.cloud, 0.0).map_err(|e| e.to_string())?;
    ensure(lhs.len() == rhs.len(), || "lengths differ".into())?;
    let worst = lhs
        .coords()
        .iter()
        .zip(rhs.coords())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("max deviation {worst}"))?;
    Ok(format!("{} points, max deviation {worst:.1e}", lhs.len()))
}

fn catalog() -> Vec<SmoothMap> {
    vec![
        SmoothMap::distance(&[0.0, 0.0, 0.0]),
        SmoothMap::distance(&[-0.3, 0.2]),
        SmoothMap::Product2,
        SmoothMap::Product3,
        SmoothMap::Poly {
            dim: 3,
            coeffs: vec![(0.7, [1, 1, 1]), (2.0, [0, 0, 2]), (-1.0, [3, 0, 0])],
        },
    ]
}

fn suite_derivatives(rng: &mut ChaCha8Rng) -> Outcome {
    const H: f64 = 1e-5;
    let mut probes = 0;
    for map in catalog() {
        let d = map.dim();
        for _ in 0..100 {
            let mut x = [0.0; 3];
            for v in x.iter_mut().take(d) {
                *v = rng.random_range(0.1..2.0);
            }
            let g = map.gradient(&x);
            let h = map.hessian(&x);
            let hs = h.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
            for k in 0..d {
                let (mut a, mut b) = (x, x);
                a[k] += H;
                b[k] -= H;
                let fd = (map.value(&a) - map.value(&b)) / (2.0 * H);
                ensure((fd - g[k]).abs() <= 1e-6 * math::norm(&g).max(1.0), || {
                    format!("{} ∂{k} at {x:?}", map.name())
                })?;
                let (ga, gb) = (map.gradient(&a), map.gradient(&b));
                for i in 0..d {
                    let fd = (ga[i] - gb[i]) / (2.0 * H);
                    ensure((fd - h[i][k]).abs() <= 1e-5 * hs, || {
                        format!("{} H[{i}][{k}] at {x:?}", map.name())
                    })?;
                    ensure(h[i][k] == h[k][i], || format!("{} Hessian not symmetric", map.name()))?;
                }
            }
            probes += 1;
        }
    }
    Ok(format!("{probes} probes"))
}

fn suite_radial_scaling(rng: &mut ChaCha8Rng) -> Outcome {
    let cloud = sample_cloud_at_depth(&five_in_space(), 4, 1 << 20).map_err(|e| e.to_string())?;
    let shifted: Vec<Point> = cloud.points().map(|p| math::add(&p, &[0.3, 0.4, 0.5])).collect();
    let cloud =
        WeightedCloud::from_points(3, &shifted, cloud.weights().to_vec(), cloud.resolution()).map_err(|e| e.to_string())?;
    let base = radial_project(&cloud, 0.0).map_err(|e| e.to_string())?.cloud;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = rng.random_range(0.01..100.0);
        let pts: Vec<Point> = cloud.points().map(|p| math::scale(&p, c)).collect();
        let scaled =
            WeightedCloud::from_points(3, &pts, cloud.weights().to_vec(), cloud.resolution() * c).map_err(|e| e.to_string())?;
        let img = radial_project(&scaled, 0.0).map_err(|e| e.to_string())?.cloud;
        let dev = img
            .coords()
            .iter()
            .zip(base.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    ensure(worst <= 4.0 * f64::EPSILON, || {
        format!("P₃(cx) deviates from P₃(x) by {worst}")
    })?;
    Ok(format!("20 scalings, max deviation {worst:.1e}"))
}

fn suite_ssc(_: &mut ChaCha8Rng) -> Outcome {
    for (name, ifs) in [
        ("Cantor", homogeneous(1.0 / 3.0, &[&[0.0], &[2.0 / 3.0]])),
        ("five maps in R³", five_in_space()),
    ] {
        ensure(check_ssc(&ifs, 10).is_proved(), || format!("{name} not proved"))?;
        for i in 0..ifs.len() {
            for j in i + 1..ifs.len() {
                let pa = sample_cloud_at_depth(
                    &ifs.cylinder_ifs(&Word(vec![i as u32])).map_err(|e| e.to_string())?,
                    4,
                    1 << 20,
                )
                .map_err(|e| e.to_string())?;
                let pb = sample_cloud_at_depth(
                    &ifs.cylinder_ifs(&Word(vec![j as u32])).map_err(|e| e.to_string())?,
                    4,
                    1 << 20,
                )
                .map_err(|e| e.to_string())?;
                let gap = pa
                    .points()
                    .flat_map(|x| pb.points().map(move |y| math::dist(&x, &y)))
                    .fold(f64::INFINITY, f64::min);
                ensure(gap > 0.0, || format!("{name}: cylinders {i} and {j} touch"))?;
            }
        }
    }
    let overlapping = homogeneous(0.6, &[&[0.0], &[0.4]]);
    for depth in 1..=8 {
        ensure(!check_ssc(&overlapping, depth).is_proved(), || {
            format!("overlapping system proved at depth {depth}")
        })?;
    }
    let dup = homogeneous(0.5, &[&[0.0], &[0.0], &[0.5]]);
    let overlaps = detect_exact_overlaps(&dup, 1, 1e-12, 1 << 20).map_err(|e| e.to_string())?;
    ensure(!overlaps.is_empty(), || "duplicate maps not detected".into())?;
    ensure(!check_ssc(&dup, 4).is_proved(), || "duplicate maps proved separated".into())?;
    Ok("2 proved, 2 never proved".into())
}

fn property_suites() -> Outcome {
    type Suite = fn(&mut ChaCha8Rng) -> Outcome;
    let suites: [(&str, Suite); 6] = [
        ("composition homomorphism", suite_composition),
        ("fixed-point consistency", suite_fixed_points),
        ("γ∘P₃ = P₂∘π", suite_geodesic),
        ("gradient/Hessian finite differences", suite_derivatives),
        ("P₃ scale invariance", suite_radial_scaling),
        ("SSC soundness", suite_ssc),
    ];
    let mut lines = Vec::new();
    for (k, (name, suite)) in suites.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        let start = Instant::now();
        let detail = suite(&mut rng).map_err(|e| format!("{name}: {e}"))?;
        let t = start.elapsed();
        ensure(t < Duration::from_secs(30), || format!("{name} took {t:?}"))?;
        lines.push(format!("{name} ({detail}, {:.2}s)", t.as_secs_f64()));
    }
    Ok(lines.join("; "))
}

const RUNS: [(&str, &str); 12] = [
    ("cprod2", "cprod2_cantor.toml"),
    ("cprod2", "cprod2_fifth.toml"),
    ("tprod", "tprod.toml"),
    ("tdistance", "tdistance.toml"),
    ("cradproj", "cradproj_corner.toml"),
    ("cradproj", "cradproj_pair.toml"),
    ("ltech1", "ltech1.toml"),
    ("overlap-demo", "overlap_demo.toml"),
    ("overlap-demo", "overlap_generic.toml"),
    ("sweep", "sweep.toml"),
    ("estimate", "estimate_gasket.toml"),
    ("estimate", "estimate_pipeline.toml"),
];

fn cli(experiment: &str, config: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .arg(experiment)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.code() == Some(0), || {
        format!(
            "{experiment} {} exited with {:?}: {}",
            config.display(),
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        )
    })
}

fn listing(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.push((entry.file_name().to_string_lossy().into_owned(), bytes));
    }
    files.sort();
    Ok(files)
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (k, (experiment, file)) in RUNS.iter().enumerate() {
        let config = configs().join(file);
        let dirs: Vec<PathBuf> = (0..3).map(|i| tmp.path().join(format!("{k}_{i}"))).collect();
        for (dir, threads) in dirs.iter().zip([1, 4, 4]) {
            cli(experiment, &config, dir, threads)?;
        }
        let first = listing(&dirs[0])?;
        ensure(!first.is_empty(), || format!("{file}: no outputs"))?;
        for other in &dirs[1..] {
            let files = listing(other)?;
            ensure(files == first, || format!("{file}: outputs differ between runs"))?;
        }
        compared += first.len();
    }
    Ok(format!(
        "{} experiments, {compared} files identical across --threads 1/4/4",
        RUNS.len()
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("1 Moran oracle equivalence", 60, moran_oracle),
        ("2 cprod2 products of Cantor sets", 120, cprod2),
        ("3 tprod triple product and conditions", 300, tprod),
        ("4 tdistance pinned distance set", 300, tdistance),
        ("5 cradproj radial projections", 120, cradproj),
        ("6 ltech1 counting certificate", 120, ltech1),
        ("7 geometry certificates", 600, geometry),
        ("8 property suites", 180, property_suites),
        ("9 reproducibility across --threads", 1800, reproducibility),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|d| {
            if secs <= limit as f64 {
                Ok(d)
            } else {
                Err(format!("{d}; runtime over {limit}s"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.1}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s]: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
