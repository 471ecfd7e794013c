//! Seeded generators for the impact-factor and real-rate paths.
//!
//! Noise is drawn from ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`,
//! one stream per generator, so runs are reproducible per seed. Every year in
//! the full sample window draws its noise whether or not it is requested, which
//! makes the value for a given year independent of the requested range.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{AnnualSeries, Dataset, Point, Provenance, SeriesError, Year, YearBounds, SAMPLE_END, SAMPLE_START};

pub const IF_STREAM: u64 = 1;
pub const RATE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("requested years {min}..={max} fall outside {SAMPLE_START}..={SAMPLE_END}")]
    OutOfRange { min: i32, max: i32 },
    #[error("rate and impact series cover different years; missing from rate: [{missing_rate}], missing from impact: [{missing_impact}]")]
    CoverageMismatch { missing_rate: String, missing_impact: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Piecewise growth model for the impact factor.
///
/// Deterministic skeleton:
/// - 1975–2000: `if_base · (1+g1)^(t−1975)`
/// - 2001–2010: `L2000 · (1+g2)^(t−2000)`
/// - 2011–2020: `L2010 · (1+g3)^(t−2010)`
/// - 2021–2026: `peak_2021 · (1−post_peak_decline)^(t−2021)`
///
/// where the anchors `L2000`, `L2010` are noise-free skeleton levels. Each
/// point gets additive `N(0, (sigma · level)²)` noise, with `sigma` taken from
/// `sigma_schedule` for the point's period, then is clamped at `clamp_floor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IfGenConfig {
    pub if_base: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub peak_2021: f64,
    pub post_peak_decline: f64,
    /// Noise sd as a fraction of the skeleton level, one entry per period.
    pub sigma_schedule: [f64; 4],
    pub seed: u64,
    pub clamp_floor: f64,
}

impl Default for IfGenConfig {
    fn default() -> Self {
        Self {
            if_base: 2.0,
            g1: 0.03,
            g2: 0.08,
            g3: 0.12,
            peak_2021: 68.6,
            post_peak_decline: 0.08,
            sigma_schedule: [0.05; 4],
            seed: 0,
            clamp_floor: 0.5,
        }
    }
}

impl IfGenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, g) in [("g1", self.g1), ("g2", self.g2), ("g3", self.g3)] {
            if !(g > -1.0 && g.is_finite()) {
                return bad(format!("{name} = {g} must exceed -1"));
            }
        }
        if !(self.post_peak_decline < 1.0 && self.post_peak_decline > -1.0) {
            return bad(format!("post_peak_decline = {} must lie in (-1, 1)", self.post_peak_decline));
        }
        if !(self.if_base > 0.0 && self.peak_2021 > 0.0) {
            return bad("if_base and peak_2021 must be positive".into());
        }
        if self.sigma_schedule.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad(format!("sigma_schedule {:?} must be non-negative", self.sigma_schedule));
        }
        if !(self.clamp_floor > 0.0) {
            return bad(format!("clamp_floor = {} must be positive", self.clamp_floor));
        }
        Ok(())
    }

    fn period_of(year: i32) -> usize {
        match year {
            ..=2000 => 0,
            2001..=2010 => 1,
            2011..=2020 => 2,
            _ => 3,
        }
    }

    /// Noise-free level.
    pub fn skeleton(&self, year: Year) -> f64 {
        let y = year.0;
        let level_2000 = self.if_base * (1.0 + self.g1).powi(2000 - 1975);
        let level_2010 = level_2000 * (1.0 + self.g2).powi(10);
        match Self::period_of(y) {
            0 => self.if_base * (1.0 + self.g1).powi(y - 1975),
            1 => level_2000 * (1.0 + self.g2).powi(y - 2000),
            2 => level_2010 * (1.0 + self.g3).powi(y - 2010),
            _ => self.peak_2021 * (1.0 - self.post_peak_decline).powi(y - 2021),
        }
    }

    pub fn noise_sd(&self, year: Year) -> f64 {
        self.sigma_schedule[Self::period_of(year.0)] * self.skeleton(year)
    }
}

fn check_range(years: YearBounds) -> Result<(), SynthError> {
    if years.is_empty() || years.min < SAMPLE_START || years.max > SAMPLE_END {
        Err(SynthError::OutOfRange {
            min: years.min,
            max: years.max,
        })
    } else {
        Ok(())
    }
}

fn standard_normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn generate_if(config: &IfGenConfig, years: YearBounds) -> Result<AnnualSeries, SynthError> {
    config.validate()?;
    check_range(years)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(IF_STREAM);
    let z = standard_normal();
    let mut points = Vec::with_capacity(years.len());
    for y in SAMPLE_START..=SAMPLE_END {
        let year = Year(y);
        let draw = z.sample(&mut rng);
        if !years.contains(year) {
            continue;
        }
        let value = (config.skeleton(year) + config.noise_sd(year) * draw).max(config.clamp_floor);
        points.push(Point {
            year,
            value,
            provenance: Provenance::Synthetic,
        });
    }
    Ok(AnnualSeries::new("impact_factor", points)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSegment {
    pub start: Year,
    pub end: Year,
    /// Value at `start`.
    pub level: f64,
    /// Change per year.
    pub slope: f64,
    pub noise_sd: f64,
}

/// Piecewise-linear real-rate path plus Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateGenConfig {
    pub segments: Vec<RateSegment>,
    pub seed: u64,
}

impl Default for RateGenConfig {
    /// Stylised US 10-year real-rate path: low or negative mid-1970s rates, a
    /// 1979–1984 tightening plateau above 8%, a long decline with a
    /// steepening drop through the 2010s, and negative post-pandemic rates
    /// drifting back up.
    fn default() -> Self {
        let seg = |start, end, level, slope, noise_sd| RateSegment {
            start: Year(start),
            end: Year(end),
            level,
            slope,
            noise_sd,
        };
        Self {
            segments: vec![
                seg(1975, 1978, -1.0, 0.3, 0.25),
                seg(1979, 1984, 8.3, 0.05, 0.25),
                seg(1985, 2000, 6.0, -0.17, 0.25),
                seg(2001, 2010, 3.0, -0.02, 0.15),
                seg(2011, 2020, 2.8, -0.28, 0.15),
                seg(2021, 2026, -1.2, 0.25, 0.15),
            ],
            seed: 0,
        }
    }
}

impl RateGenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        let first = match self.segments.first() {
            Some(s) => s,
            None => return bad("rate config has no segments".into()),
        };
        if first.start.0 != SAMPLE_START {
            return bad(format!("first segment starts at {}, expected {SAMPLE_START}", first.start));
        }
        for s in &self.segments {
            if s.start > s.end {
                return bad(format!("segment {}..={} is reversed", s.start, s.end));
            }
            if !(s.noise_sd >= 0.0 && s.noise_sd.is_finite()) {
                return bad(format!("segment {}..={} has invalid noise sd {}", s.start, s.end, s.noise_sd));
            }
        }
        for w in self.segments.windows(2) {
            if w[1].start.0 != w[0].end.0 + 1 {
                return bad(format!("segments {}..={} and {}..={} overlap or leave a gap", w[0].start, w[0].end, w[1].start, w[1].end));
            }
        }
        let last = self.segments.last().expect("non-empty");
        if last.end.0 != SAMPLE_END {
            return bad(format!("last segment ends at {}, expected {SAMPLE_END}", last.end));
        }
        Ok(())
    }

    fn segment(&self, year: Year) -> &RateSegment {
        self.segments
            .iter()
            .find(|s| s.start <= year && year <= s.end)
            .expect("validated coverage")
    }

    pub fn skeleton(&self, year: Year) -> f64 {
        let s = self.segment(year);
        s.level + s.slope * (year.0 - s.start.0) as f64
    }
}

pub fn generate_rate(config: &RateGenConfig, years: YearBounds) -> Result<AnnualSeries, SynthError> {
    config.validate()?;
    check_range(years)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(RATE_STREAM);
    let z = standard_normal();
    let mut points = Vec::with_capacity(years.len());
    for y in SAMPLE_START..=SAMPLE_END {
        let year = Year(y);
        let draw = z.sample(&mut rng);
        if !years.contains(year) {
            continue;
        }
        let value = config.skeleton(year) + config.segment(year).noise_sd * draw;
        points.push(Point {
            year,
            value,
            provenance: Provenance::Synthetic,
        });
    }
    Ok(AnnualSeries::new("real_rate", points)?)
}

/// Joins a rate and an impact-factor series into a [`Dataset`]; both must
/// cover the same contiguous years. The `source` column records the rate's provenance.
pub fn build_dataset(rate: &AnnualSeries, impact: &AnnualSeries) -> Result<Dataset, SynthError> {
    let ry = rate.years();
    let iy = impact.years();
    if ry != iy || !rate.is_contiguous() || ry.is_empty() {
        let fmt = |v: Vec<Year>| v.iter().map(Year::to_string).collect::<Vec<_>>().join(", ");
        let lo = ry.first().min(iy.first()).copied().unwrap_or(Year(SAMPLE_START));
        let hi = ry.last().max(iy.last()).copied().unwrap_or(Year(SAMPLE_END));
        let b = YearBounds { min: lo.0, max: hi.0 };
        return Err(SynthError::CoverageMismatch {
            missing_rate: fmt(rate.missing_years(b)),
            missing_impact: fmt(impact.missing_years(b)),
        });
    }
    let source = rate.points().iter().map(|p| p.provenance.to_string()).collect();
    Ok(Dataset::new(ry, rate.values(), impact.values(), source)?)
}

/// Generates both series over the full sample window with a shared `seed`
/// (overriding the configs' own seeds) and joins them.
pub fn synthetic_dataset(impact: &IfGenConfig, rate: &RateGenConfig, seed: u64) -> Result<Dataset, SynthError> {
    let years = YearBounds::default();
    let i = generate_if(&IfGenConfig { seed, ..impact.clone() }, years)?;
    let r = generate_rate(&RateGenConfig { seed, ..rate.clone() }, years)?;
    build_dataset(&r, &i)
}
