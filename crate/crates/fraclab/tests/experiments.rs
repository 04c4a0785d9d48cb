use std::path::Path;

use fraclab::{run, Experiment, LoadedConfig, Report};

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn run_str(experiment: Experiment, source: &str) -> anyhow::Result<Report> {
    let cfg = LoadedConfig::from_str_in(source, configs())?;
    run(experiment, &cfg, None, None)
}

#[test]
fn ifs_files_accept_inline_powers() {
    let cfg = LoadedConfig::from_str_in("[ifs]\npath = \"cantor.toml\"\npower = 3\n", configs()).unwrap();
    let ifs = cfg.ifs().unwrap();
    assert_eq!((ifs.len(), ifs.dim()), (8, 3));
    let bad = LoadedConfig::from_str_in("[ifs]\npath = \"cantor.toml\"\nratio = 0.5\n", configs()).unwrap();
    assert!(bad.ifs().is_err());
}

#[test]
fn single_point_product_has_dimension_zero() {
    // two copies of one map: the attractor is the point {1}
    let r = run_str(
        Experiment::Cprod2,
        "scales = [0.1, 0.01, 0.001]\n[ifs]\nratio = 0.5\ntranslations = [0.5, 0.5]\n",
    )
    .unwrap();
    assert_eq!(r.estimate, Some(0.0));
    assert!(!r.hypothesis_holds);
}

#[test]
fn thin_triple_products_are_flagged() {
    let r = run_str(
        Experiment::Tprod,
        "[ifs]\nratio = \"1/16\"\ntranslations = [\"1/16\", \"14/16\"]\n[tprod]\ncheck_depth = 2\n",
    )
    .unwrap();
    assert!(!r.hypothesis_holds);
    assert!(r.notes.iter().any(|n| n.contains("outside theorem hypothesis")));
    assert!(r.estimate.is_some());
}

#[test]
fn distances_along_a_segment_fill_an_interval() {
    let r = run_str(
        Experiment::Tdistance,
        "[ifs]\nratio = 0.5\ntranslations = [[0, 0], [0.5, 0]]\n[sampling]\ndepth = 14\n",
    )
    .unwrap();
    let e = r.estimate.unwrap();
    assert!((e - 1.0).abs() < 0.02, "{e}");
}

#[test]
fn pins_inside_a_cylinder_trigger_refinement() {
    let r = run_str(
        Experiment::Tdistance,
        "[ifs]\npath = \"five_in_space.toml\"\n[sampling]\ndepth = 7\n[tdistance]\ncylinder = [0]\n",
    )
    .unwrap();
    assert!(r.notes.iter().any(|n| n.contains("meets the pin")));
    let word = r.details["cylinder"].as_array().unwrap();
    assert!(word.len() >= 2 && word[0] == 0);
    assert!(r.details["pin_gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn radial_projection_rejects_the_origin() {
    let err = run_str(
        Experiment::Cradproj,
        "[ifs]\nratio = \"1/3\"\ntranslations = [[0, 0], [\"2/3\", 0], [0, \"2/3\"]]\n",
    )
    .unwrap_err();
    assert!(format!("{err:#}").contains("origin"), "{err:#}");
}

#[test]
fn duplicate_maps_overlap_at_depth_one() {
    let r = run_str(
        Experiment::OverlapDemo,
        "[ifs]\nratio = 0.5\ntranslations = [[0, 0, 0], [0, 0, 0], [0.5, 0.5, 0.5]]\n[overlap]\nnormal = [0, 0, 1]\noverlap_depth = 1\nmin_overlaps = 1\n",
    )
    .unwrap();
    assert!(r.pass);
    assert_eq!(r.tables[0].rows[0], vec!["(0)".to_string(), "(1)".to_string()]);
}

#[test]
fn extremal_projection_merges_one_symbol_maps() {
    let cfg = LoadedConfig::from_path(&configs().join("overlap_demo.toml")).unwrap();
    let r = run(Experiment::OverlapDemo, &cfg, None, None).unwrap();
    assert!(r.pass);
    let one_symbol: Vec<_> = r.tables[0].rows.iter().filter(|row| !row[0].contains(',')).collect();
    assert!(!one_symbol.is_empty());
    let gap = r.details["witness_gap_after_projection"].as_f64().unwrap();
    assert!(gap < 1e-12);
    let flat = r.details["dimension_projected"]["box"].as_f64().unwrap();
    let full = r.details["dimension_unprojected"]["box"].as_f64().unwrap();
    assert!(flat < full);

    let cfg = LoadedConfig::from_path(&configs().join("overlap_generic.toml")).unwrap();
    let r = run(Experiment::OverlapDemo, &cfg, None, None).unwrap();
    assert!(r.pass);
    assert!(r.tables[0].rows.is_empty());
}

#[test]
fn ltech1_reports_every_record() {
    let r = run_str(
        Experiment::Ltech1,
        "[ifs]\nratio = \"1/3\"\ntranslations = [[0, 0], [\"2/3\", 0], [0, \"2/3\"]]\n[ltech1]\ndirection_grid = 4\nn_max = 3\n",
    )
    .unwrap();
    assert!(r.pass);
    assert_eq!(r.tables[0].rows.len(), 4 * 3 * 3);
    assert!(r.details["bound_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn thresholds_decide_the_verdict() {
    let src = "decades = 4\n[ifs]\npath = \"cantor.toml\"\n[thresholds]\nmin_estimate = 0.99\n";
    let r = run_str(Experiment::Estimate, src).unwrap();
    assert!(!r.pass);
    assert_eq!(r.checks.len(), 1);
    let r = run_str(Experiment::Estimate, &src.replace("0.99", "0.6")).unwrap();
    assert!(r.pass);
}

#[test]
fn reports_record_caps_and_provenance() {
    let src = "[ifs]\npath = \"cantor.toml\"\n[sampling]\ndepth = 8\n";
    let cfg = LoadedConfig::from_str_in(src, configs()).unwrap();
    let r = run(Experiment::Cprod2, &cfg, Some(5), Some(1 << 12)).unwrap();
    assert_eq!(r.seed, 5);
    assert_eq!(r.max_cells, 1 << 12);
    assert_eq!(
        r.caps_hit,
        vec!["product tuples thinned from 65536 to at most 4096".to_string()]
    );
    assert_eq!(r.config_sha256, fraclab::report::sha256_hex(src.as_bytes()));
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["experiment"], "cprod2");
    assert!(json["claim"].as_str().unwrap().contains("min{2 dim_H Λ, 1}"));
}

#[test]
fn chaos_runs_follow_the_seed() {
    let src = "target = 1.0\n[ifs]\npath = \"five_in_space.toml\"\n[sampling]\nmethod = \"chaos\"\npoints = 100000\n[[pipeline]]\nop = \"project\"\ndirection = [0.3, 0.5, 0.8]\n";
    let cfg = LoadedConfig::from_str_in(src, configs()).unwrap();
    let a = run(Experiment::Estimate, &cfg, Some(1), None).unwrap();
    let b = run(Experiment::Estimate, &cfg, Some(1), None).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let ifs = cfg.ifs().unwrap();
    let x = fraclab::sampling::chaos_game(&ifs, 1000, 1).unwrap();
    let y = fraclab::sampling::chaos_game(&ifs, 1000, 2).unwrap();
    assert_ne!(x, y);
}
