mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::{manifest_fixture, synthetic_cohort, CohortParams};
use voxrisk::features::{Feature, FeatureConfig};
use voxrisk::pipeline::{build_cohort, load_manifest, render, run_screening, ReportFormat, ScreeningConfig, INTENSITY_COLUMNS};
use voxrisk::splice::SpliceConfig;
use voxrisk::stats::Priors;

#[test]
fn manifest_to_report_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let records = load_manifest(manifest_fixture(dir.path())).unwrap();
    assert_eq!(records.len(), 14);
    let cohort = build_cohort(&records, &FeatureConfig::default(), None).unwrap();
    assert_eq!(cohort.len(), 14);
    assert!(cohort.warnings.is_empty(), "{:?}", cohort.warnings);
    assert_eq!(cohort.rows.iter().map(|r| r.n_recordings).sum::<usize>(), 21);

    let report = run_screening(&cohort, &ScreeningConfig::default()).unwrap();
    assert_eq!(report.ancova.len(), 13);
    for row in &report.ancova {
        assert!((0.0..=1.0).contains(&row.result.p));
        assert!((0.0..1.0).contains(&row.result.partial_eta_sq));
    }
    let stepwise = report.stepwise.as_ref().unwrap();
    assert_eq!(stepwise.candidates.len(), 6);
    assert_eq!(stepwise.n_complete_cases, 14);
}

#[test]
fn spliced_cohort_stays_close_to_original() {
    let dir = tempfile::tempdir().unwrap();
    let records = load_manifest(manifest_fixture(dir.path())).unwrap();
    let cfg = FeatureConfig::default();
    let plain = build_cohort(&records, &cfg, None).unwrap();
    let spliced = build_cohort(&records, &cfg, Some(&SpliceConfig::default().with_seed(8))).unwrap();
    for (a, b) in plain.rows.iter().zip(&spliced.rows) {
        assert_eq!(a.participant_id, b.participant_id);
        let (x, y) = (a.features.get(Feature::F0HzMean).unwrap(), b.features.get(Feature::F0HzMean).unwrap());
        assert!((x - y).abs() < 0.03 * x, "{x} vs {y}");
    }
}

#[test]
fn anxiety_intensity_enters_stepwise_first() {
    let mut cohort = synthetic_cohort(&CohortParams::reference_cohort(100, 0.65, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = Normal::new(0.0, 1.0).unwrap();
    for row in &mut cohort.rows {
        let shift = if row.label.is_high() { 1.2 } else { 0.0 };
        for (k, v) in row.intensities.iter_mut().take(6).enumerate() {
            let base: f64 = 3.0 + if k == 0 { shift } else { 0.1 * shift };
            *v = Some((base + 1.3 * z.sample(&mut rng)).clamp(0.0, 7.0));
        }
    }
    let report = run_screening(&cohort, &ScreeningConfig::default()).unwrap();
    let trace = &report.stepwise.as_ref().unwrap().trace;
    assert_eq!(trace.events.first().map(|e| e.variable.as_str()), Some(INTENSITY_COLUMNS[0]));
    assert!(trace.final_set.contains(&INTENSITY_COLUMNS[0].to_string()));
    assert!(trace.wilks_lambda < 1.0);
}

#[test]
fn priors_change_classification_but_not_the_test() {
    let cohort = synthetic_cohort(&CohortParams::reference_cohort(100, 0.65, 2));
    let equal = run_screening(&cohort, &ScreeningConfig::default()).unwrap();
    let cfg = ScreeningConfig { priors: Priors::Proportional, ..Default::default() };
    let prop = run_screening(&cohort, &cfg).unwrap();
    let (a, b) = (&equal.discriminant.as_ref().unwrap().result, &prop.discriminant.as_ref().unwrap().result);
    assert_eq!(a.wilks_lambda, b.wilks_lambda);
    assert_eq!(a.p_value, b.p_value);
    let high_calls = |r: &voxrisk::DiscriminantResult| r.resubstitution_predictions.iter().filter(|&&h| h).count();
    assert!(high_calls(b) < high_calls(a));
}

#[test]
fn report_formats_render() {
    let cohort = synthetic_cohort(&CohortParams::reference_cohort(100, 0.65, 0));
    let report = run_screening(&cohort, &ScreeningConfig { mancova: true, ..Default::default() }).unwrap();
    let text = render(&report, ReportFormat::Text).unwrap();
    assert!(text.starts_with(&report.disclaimer));
    assert!(text.contains("f0_semitone_mean"));
    let csv = render(&report, ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 14);
    let json: serde_json::Value = serde_json::from_str(&render(&report, ReportFormat::Json).unwrap()).unwrap();
    assert!(json["mancova"]["p"].as_f64().is_some());
    assert_eq!(json["cohort"]["n_participants"], 363);
}
