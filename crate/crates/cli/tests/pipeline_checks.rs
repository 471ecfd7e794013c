mod common;

use common::*;
use monetif_cli::config::{AltRate, DataMode, PipelineConfig};
use monetif_cli::pipeline::{load_data, run_pipeline};
use monetif_core::ingest::DataSource;
use monetif_core::series::Year;

#[test]
fn default_run_shapes() {
    let (r, data) = run_pipeline(&PipelineConfig::default()).unwrap();
    assert_eq!(data.dataset.len(), 52);
    for f in &r.full_sample {
        assert_eq!(f.n, 52);
    }
    let ns: Vec<usize> = r.periods.iter().flat_map(|p| [p.model1.n, p.model2.n]).collect();
    assert_eq!(ns, vec![26, 26, 20, 20, 6, 6]);
    let o = r.robustness.outlier_removed.as_ref().unwrap();
    assert_eq!(o.fit.n, 51);
    assert!(!o.fit.years.contains(&Year(2021)));
    assert_eq!(r.extensions.quantiles.len(), 3);
    assert_eq!(r.diagnostics.model, "model2");
    assert_eq!(r.chow.df, vec![3.0, 46.0]);
    assert_eq!(r.descriptives.len(), 4);
    assert_eq!(data.log.count("real_rate", DataSource::Synthetic), 52);
}

#[test]
fn deterministic_per_seed() {
    let cfg = PipelineConfig {
        seed: 17,
        ..PipelineConfig::default()
    };
    let (a, _) = run_pipeline(&cfg).unwrap();
    let (b, _) = run_pipeline(&cfg).unwrap();
    assert_eq!(a, b);
    let (c, _) = run_pipeline(&PipelineConfig { seed: 18, ..cfg }).unwrap();
    assert_ne!(a.full_sample[1].coefficients, c.full_sample[1].coefficients);
}

#[test]
fn files_mode_merges_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        mode: DataMode::Files,
        files: monetif_cli::config::FileInputs {
            fred: Some(write_fred(dir.path())),
            worldbank: Some(write_worldbank(dir.path())),
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    let data = load_data(&cfg, 3).unwrap();
    assert_eq!(data.dataset.len(), 52);
    assert_eq!(data.log.count("real_rate", DataSource::Fred), 44);
    assert_eq!(data.log.count("real_rate", DataSource::WorldBank), 7);
    assert_eq!(data.log.count("real_rate", DataSource::Imputed), 1);
    assert_eq!(data.log.count("impact_factor", DataSource::Synthetic), 52);
    let i1990 = data.dataset.index_of(Year(1990)).unwrap();
    // annual mean of months 1..12
    let mean: f64 = (1..=12).map(|m| fred_value(1990, m)).sum::<f64>() / 12.0;
    assert!((data.dataset.real_rate()[i1990] - mean).abs() < 1e-12);
    assert_eq!(data.dataset.source()[0], "WorldBank");
    let (r, _) = run_pipeline(&cfg).unwrap();
    assert_eq!(r.full_sample[1].n, 52);
}

#[test]
fn alternative_variable_has_same_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        robustness: monetif_cli::config::Robustness {
            alt_rates: vec![AltRate::from_path(&write_alt(dir.path(), "fed_funds"))],
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    let (r, _) = run_pipeline(&cfg).unwrap();
    let alt = &r.robustness.alternatives[0];
    let base = r.model("model2").unwrap();
    assert_eq!(alt.name, "fed_funds");
    assert_eq!(alt.fit.terms, base.terms);
    assert_eq!(alt.fit.n, base.n);
    assert_ne!(alt.fit.coefficients, base.coefficients);
    // same JSON shape
    let keys = |v: serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(
        keys(serde_json::to_value(&alt.fit).unwrap()),
        keys(serde_json::to_value(base).unwrap())
    );
}

#[test]
fn stage_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = PipelineConfig {
        mode: DataMode::Files,
        files: monetif_cli::config::FileInputs {
            fred: Some(dir.path().join("nope.csv")),
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    assert_eq!(run_pipeline(&missing).unwrap_err().exit_code(), 2);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "observation_date,X\n1990-01-01,1,2\n").unwrap();
    let malformed = PipelineConfig {
        mode: DataMode::Files,
        files: monetif_cli::config::FileInputs {
            fred: Some(bad),
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    let e = run_pipeline(&malformed).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
    assert!(e.to_string().contains("ingest"));

    let bad_break = PipelineConfig {
        breakpoint: Year(1975),
        ..PipelineConfig::default()
    };
    assert_eq!(run_pipeline(&bad_break).unwrap_err().exit_code(), 2);
}

#[test]
fn no_drop_years_means_no_variant() {
    let mut cfg = PipelineConfig::default();
    cfg.robustness.drop_years.clear();
    let (r, _) = run_pipeline(&cfg).unwrap();
    assert!(r.robustness.outlier_removed.is_none());
    assert!(r.all_fits().iter().all(|(k, _)| k != "outlier_removed.model2"));
}
