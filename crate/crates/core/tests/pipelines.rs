use mbs_slocc::coeff::{coefficient_matrix_view, state_from_matrix};
use mbs_slocc::ilo::{apply_certificate, hybrid_representative, verify_equivalence};
use mbs_slocc::{
    class_hierarchy, classify, cross_scenario_compare, CatTerm, ClassLabel, ClassifyOptions, Cutoff, Error, InputFamily,
    InputSpec, Scenario, Status, Verdict, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn certificates_replay_from_the_built_state() {
    let specs = [
        InputSpec::number(vec![c(0.2, 0.1), c(-0.5, 0.0), c(0.0, 0.3), c(0.7, 0.0)], 3).unwrap(),
        InputSpec::cat(vec![CatTerm::new(c(1.0, 0.0), c(0.7, 0.2)), CatTerm::new(c(0.0, 1.0), c(-0.4, 0.9))], 2).unwrap(),
        InputSpec::hybrid(vec![c(0.3, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![CatTerm::new(c(0.5, 0.5), c(1.3, 0.0))], 3)
            .unwrap(),
    ];
    for spec in &specs {
        let report = classify(spec, &ClassifyOptions::default()).unwrap();
        assert_eq!(report.status, Status::Success, "{}: {:?}", report.label, report.failure);
        let image = apply_certificate(&spec.build_output().unwrap().state, &report.certificate).unwrap();
        let eq = verify_equivalence(&image, &report.representative, report.tol_fid).unwrap();
        assert!(eq.ok);
        assert!((eq.fidelity - report.fidelity).abs() < 1e-14);
        assert_eq!(report.schmidt_rank(), Some(report.label.expected_rank()));
    }
}

#[test]
fn hybrid_at_fixed_cutoff() {
    let spec = InputSpec::new(
        InputFamily::Hybrid { number: vec![c(1.0, 0.0), c(1.0, 0.0)], cat: vec![CatTerm::new(c(1.0, 0.0), c(0.8, 0.0))] },
        2,
        Cutoff::Fixed(12),
        1e-10,
    )
    .unwrap();
    let report = classify(&spec, &ClassifyOptions::default()).unwrap();
    assert_eq!(report.dim, 12);
    assert_eq!(report.label, ClassLabel::Hybrid { top: 1, r: 1 });
    assert_eq!(report.representative, hybrid_representative(1, 1, 2, 12).unwrap());
    assert!(report.warnings.iter().any(|w| w.contains("truncation deficit")));
}

#[test]
fn nearly_coincident_alphas_are_rejected() {
    let spec = InputSpec::cat(vec![CatTerm::new(c(1.0, 0.0), c(0.5, 0.0)), CatTerm::new(c(1.0, 0.0), c(0.5 + 1e-9, 0.0))], 2)
        .unwrap();
    assert!(matches!(classify(&spec, &ClassifyOptions::default()), Err(Error::IllConditionedGram { .. })));
}

#[test]
fn comparisons_follow_the_discriminants() {
    let opts = ClassifyOptions::default();
    let w = classify(&InputSpec::number(vec![c(0.0, 0.0), c(1.0, 0.0)], 3).unwrap(), &opts).unwrap();
    let c2 = classify(&InputSpec::number(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 3).unwrap(), &opts).unwrap();
    let other_w = classify(&InputSpec::number(vec![c(0.4, 0.0), c(1.0, 0.0)], 3).unwrap(), &opts).unwrap();
    let ghz = classify(&InputSpec::cat(vec![CatTerm::new(c(1.0, 0.0), c(1.0, 0.0)), CatTerm::new(c(1.0, 0.0), c(-1.0, 0.0))], 3).unwrap(), &opts)
        .unwrap();
    assert_eq!(cross_scenario_compare(&w, &other_w).unwrap(), Verdict::Equivalent);
    assert_eq!(cross_scenario_compare(&w, &c2).unwrap(), Verdict::Inequivalent);
    // Equal rank, no a-values computed, representatives not proportional.
    assert_eq!(cross_scenario_compare(&w, &ghz).unwrap(), Verdict::Undecided);
}

#[test]
fn coefficient_matrix_round_trip() {
    let spec = InputSpec::number(vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, -0.4)], 3).unwrap();
    let state = spec.build_output().unwrap().state;
    let view = coefficient_matrix_view(&state).unwrap();
    assert_eq!((view.rows(), view.cols()), (3, 9));
    let back = state_from_matrix(&view.to_matrix(), 3).unwrap();
    assert_eq!(back, state);
}

#[test]
fn hierarchies() {
    assert_eq!(class_hierarchy(Scenario::Number, 3).to_string(), "C0 ⊂ C1 ⊂ C2 ⊂ C3");
    assert_eq!(class_hierarchy(Scenario::Cat, 2).to_string(), "R1 ⊂ R2");
}
