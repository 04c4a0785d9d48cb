use fraclab_core::math;
use fraclab_core::ssc::check_ssc;
use fraclab_core::subsystem::{homogenize, iterate, remove_words};
use fraclab_core::{FracError, Ifs, Word};
use proptest::prelude::*;

fn assert_provenance(parent: &Ifs, words: &[Word], maps: &[fraclab_core::Similitude]) {
    assert_eq!(words.len(), maps.len());
    for (w, m) in words.iter().zip(maps) {
        let f = parent.compose(w).unwrap();
        assert!((f.ratio() - m.ratio()).abs() < 1e-12);
        assert!(math::dist(f.translation_point(), m.translation_point()) < 1e-12);
    }
}

#[test]
fn homogenized_systems_descend_from_the_parent() {
    let parents = [
        Ifs::from_pairs(&[
            (1.0 / 3.0, &[0.0][..]),
            (1.0 / 9.0, &[0.5][..]),
            (1.0 / 3.0, &[2.0 / 3.0][..]),
        ])
        .unwrap(),
        Ifs::from_pairs(&[(0.25, &[0.0, 0.0][..]), (0.5, &[0.5, 0.5][..]), (0.25, &[0.75, 0.0][..])]).unwrap(),
    ];
    for parent in parents {
        let h = homogenize(&parent, 0.1, 8, 1 << 20).unwrap();
        assert_provenance(&parent, &h.subsystem.words, &h.subsystem.maps);
        assert!(h.certificate.is_proved());
        assert!(check_ssc(&h.subsystem.ifs().unwrap(), 10).is_proved());
        assert!(h.dimension > h.target);
        let r = h.ratio();
        assert!(h.subsystem.maps.iter().all(|m| (m.ratio() - r).abs() < 1e-12));
    }
}

#[test]
fn overlapping_family_improves_with_depth() {
    let o = Ifs::homogeneous(0.6, &[&[0.0], &[0.4]]).unwrap();
    let mut last = 0.0;
    for depth in [2, 4, 6, 8] {
        let best = match homogenize(&o, 0.01, depth, 1 << 22) {
            Ok(h) => h.dimension,
            Err(FracError::HomogenizeFailed { best_dimension, .. }) => best_dimension,
            Err(e) => panic!("{e}"),
        };
        assert!(best >= last);
        last = best;
    }
    assert!(last > 0.9);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn homogeneous_separated_input_is_a_fixed_point(q in 2usize..5, eps in 0.01f64..0.5) {
        let ts: Vec<Vec<f64>> = (0..q).map(|i| vec![i as f64 / q as f64]).collect();
        let refs: Vec<&[f64]> = ts.iter().map(|t| &t[..]).collect();
        let ifs = Ifs::homogeneous(0.5 / q as f64, &refs).unwrap();
        let h = homogenize(&ifs, eps, 4, 1 << 16).unwrap();
        prop_assert_eq!(h.exponent, 1);
        prop_assert_eq!(h.subsystem.maps, ifs.maps().to_vec());
    }

    #[test]
    fn iteration_preserves_dimension_and_provenance(n in 1usize..4) {
        let ifs = Ifs::from_pairs(&[(0.3, &[0.0][..]), (0.2, &[0.5][..]), (0.25, &[0.75][..])]).unwrap();
        let it = iterate(&ifs, n, 1 << 16).unwrap();
        prop_assert!((it.similarity_dimension() - ifs.similarity_dimension()).abs() < 1e-9);
        assert_provenance(&ifs, &it.words, it.ifs.maps());
        let fewer = remove_words(&it, &it.words[..1]).unwrap();
        prop_assert!(fewer.similarity_dimension() < it.similarity_dimension());
    }
}
