//! Runs the pipeline over many seeds and aggregates sign and significance counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use monetif_core::ols::FitResult;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::pipeline::{analyse, load_data, RunReport};

/// Correlation pairs tracked by the sweep, with the sign each is expected to have.
pub const CORRELATION_PAIRS: [(&str, &str, f64); 3] = [
    ("real_rate", "log_if", -1.0),
    ("time_trend", "log_if", 1.0),
    ("real_rate", "time_trend", -1.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

/// Counts across seeds for one coefficient of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientAggregate {
    pub fit: String,
    pub term: String,
    pub count: usize,
    pub negative: usize,
    pub significant_01: usize,
    pub significant_05: usize,
    pub significant_10: usize,
    pub negative_significant_01: usize,
    pub negative_significant_05: usize,
    pub negative_significant_10: usize,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            min: v[0],
            q05: q(0.05),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q95: q(0.95),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitAggregate {
    pub fit: String,
    pub count: usize,
    pub adj_r2: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChowAggregate {
    pub count: usize,
    pub significant_01: usize,
    pub significant_05: usize,
    pub significant_10: usize,
    pub median_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSigns {
    pub a: String,
    pub b: String,
    pub positive: usize,
    pub negative: usize,
    pub median: f64,
}

/// How far the outlier-removed rate coefficient moves from the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropYearsAggregate {
    pub count: usize,
    /// Seeds where `|β_dropped − β_full| < se(β_dropped)`.
    pub within_one_se: usize,
    pub median_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seeds: Vec<u64>,
    pub completed: usize,
    pub failures: Vec<SeedFailure>,
    pub coefficients: Vec<CoefficientAggregate>,
    pub fits: Vec<FitAggregate>,
    pub chow: Option<ChowAggregate>,
    pub correlations: Vec<CorrelationSigns>,
    /// Seeds where every tracked correlation has its expected sign.
    pub correlation_signs_expected: usize,
    pub drop_years: Option<DropYearsAggregate>,
}

impl SweepSummary {
    pub fn coefficient(&self, fit: &str, term: &str) -> Option<&CoefficientAggregate> {
        self.coefficients.iter().find(|c| c.fit == fit && c.term == term)
    }

    pub fn fit(&self, fit: &str) -> Option<&FitAggregate> {
        self.fits.iter().find(|f| f.fit == fit)
    }

    pub fn correlation(&self, a: &str, b: &str) -> Option<&CorrelationSigns> {
        self.correlations.iter().find(|c| c.a == a && c.b == b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

/// What a single seed contributes to the aggregate.
#[derive(Debug, Clone)]
struct Digest {
    fits: Vec<(String, FitDigest)>,
    chow: (f64, Option<f64>),
    correlations: Vec<f64>,
    drop_shift: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct FitDigest {
    terms: Vec<String>,
    coefficients: Vec<f64>,
    p_values: Vec<f64>,
    adj_r2: f64,
}

impl FitDigest {
    fn of(f: &FitResult) -> Self {
        Self {
            terms: f.terms.clone(),
            coefficients: f.coefficients.clone(),
            p_values: f.p_values.clone(),
            adj_r2: f.adj_r2,
        }
    }
}

fn digest(report: &RunReport) -> Digest {
    let fits = report.all_fits().into_iter().map(|(k, f)| (k, FitDigest::of(f))).collect();
    let correlations = CORRELATION_PAIRS
        .iter()
        .map(|(a, b, _)| report.correlations.get(a, b).unwrap_or(f64::NAN))
        .collect();
    let drop_shift = report.robustness.outlier_removed.as_ref().and_then(|o| {
        let base = report.model("model2")?.coef("real_rate")?;
        Some(((o.fit.coef("real_rate")? - base).abs(), o.fit.se("real_rate")?))
    });
    Digest {
        fits,
        chow: (report.chow.statistic, report.chow.p_value),
        correlations,
        drop_shift,
    }
}

fn median(values: &[f64]) -> f64 {
    Quantiles::of(values).map_or(f64::NAN, |q| q.median)
}

fn run_one(config: &PipelineConfig, seed: u64) -> Result<RunReport, CliError> {
    let mut cfg = config.clone();
    cfg.seed = seed;
    let data = load_data(&cfg, seed)?;
    analyse(&cfg, &data.dataset, seed)
}

/// Runs every seed (in parallel) and aggregates in seed order.
pub fn run_seed_sweep(config: &PipelineConfig, seeds: &[u64]) -> Result<SweepSummary, CliError> {
    if seeds.len() < 2 {
        return Err(CliError::Config(format!("a sweep needs at least 2 seeds, got {}", seeds.len())));
    }
    config.validate()?;
    let results: Vec<Result<Digest, CliError>> = seeds
        .par_iter()
        .map(|&s| run_one(config, s).map(|r| digest(&r)))
        .collect();

    let mut failures = Vec::new();
    let mut digests = Vec::new();
    for (&seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(d) => digests.push(d),
            Err(e) => failures.push(SeedFailure {
                seed,
                message: e.to_string(),
            }),
        }
    }
    Ok(aggregate(seeds, digests, failures))
}

fn aggregate(seeds: &[u64], digests: Vec<Digest>, failures: Vec<SeedFailure>) -> SweepSummary {
    // fit keys in first-seen order
    let mut keys: Vec<String> = Vec::new();
    for d in &digests {
        for (k, _) in &d.fits {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    let mut coefficients = Vec::new();
    let mut fits = Vec::new();
    for key in &keys {
        let per_seed: Vec<&FitDigest> = digests
            .iter()
            .filter_map(|d| d.fits.iter().find(|(k, _)| k == key).map(|(_, f)| f))
            .collect();
        let r2: Vec<f64> = per_seed.iter().map(|f| f.adj_r2).collect();
        if let Some(adj_r2) = Quantiles::of(&r2) {
            fits.push(FitAggregate {
                fit: key.clone(),
                count: per_seed.len(),
                adj_r2,
            });
        }
        let mut terms: Vec<&String> = Vec::new();
        for f in &per_seed {
            for t in &f.terms {
                if !terms.contains(&t) {
                    terms.push(t);
                }
            }
        }
        for term in terms {
            let pairs: Vec<(f64, f64)> = per_seed
                .iter()
                .filter_map(|f| {
                    let i = f.terms.iter().position(|t| t == term)?;
                    Some((f.coefficients[i], f.p_values[i]))
                })
                .collect();
            let count_where = |pred: &dyn Fn(f64, f64) -> bool| pairs.iter().filter(|(b, p)| pred(*b, *p)).count();
            let betas: Vec<f64> = pairs.iter().map(|(b, _)| *b).collect();
            coefficients.push(CoefficientAggregate {
                fit: key.clone(),
                term: term.clone(),
                count: pairs.len(),
                negative: count_where(&|b, _| b < 0.0),
                significant_01: count_where(&|_, p| p < 0.01),
                significant_05: count_where(&|_, p| p < 0.05),
                significant_10: count_where(&|_, p| p < 0.10),
                negative_significant_01: count_where(&|b, p| b < 0.0 && p < 0.01),
                negative_significant_05: count_where(&|b, p| b < 0.0 && p < 0.05),
                negative_significant_10: count_where(&|b, p| b < 0.0 && p < 0.10),
                median: median(&betas),
            });
        }
    }

    let chow = if digests.is_empty() {
        None
    } else {
        let ps: Vec<f64> = digests.iter().filter_map(|d| d.chow.1).collect();
        let fs: Vec<f64> = digests.iter().map(|d| d.chow.0).collect();
        Some(ChowAggregate {
            count: digests.len(),
            significant_01: ps.iter().filter(|p| **p < 0.01).count(),
            significant_05: ps.iter().filter(|p| **p < 0.05).count(),
            significant_10: ps.iter().filter(|p| **p < 0.10).count(),
            median_f: median(&fs),
        })
    };

    let correlations = CORRELATION_PAIRS
        .iter()
        .enumerate()
        .map(|(i, (a, b, _))| {
            let r: Vec<f64> = digests.iter().map(|d| d.correlations[i]).collect();
            CorrelationSigns {
                a: a.to_string(),
                b: b.to_string(),
                positive: r.iter().filter(|v| **v > 0.0).count(),
                negative: r.iter().filter(|v| **v < 0.0).count(),
                median: median(&r),
            }
        })
        .collect();

    let correlation_signs_expected = digests
        .iter()
        .filter(|d| {
            d.correlations
                .iter()
                .zip(CORRELATION_PAIRS)
                .all(|(r, (_, _, sign))| r * sign > 0.0)
        })
        .count();

    let shifts: Vec<(f64, f64)> = digests.iter().filter_map(|d| d.drop_shift).collect();
    let drop_years = (!shifts.is_empty()).then(|| DropYearsAggregate {
        count: shifts.len(),
        within_one_se: shifts.iter().filter(|(d, se)| d < se).count(),
        median_shift: median(&shifts.iter().map(|(d, _)| *d).collect::<Vec<_>>()),
    });

    SweepSummary {
        seeds: seeds.to_vec(),
        completed: digests.len(),
        failures,
        coefficients,
        fits,
        chow,
        correlations,
        correlation_signs_expected,
        drop_years,
    }
}
