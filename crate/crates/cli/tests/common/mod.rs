#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fred_value(y: i32, m: u32) -> f64 {
    4.0 - 0.1 * (y - 1982) as f64 + (y as f64).sin() + 0.01 * m as f64
}

/// Monthly FRED-style file: `observation_date,VALUE`, 1982-01 to 2025-12.
pub fn write_fred(dir: &Path) -> PathBuf {
    let mut s = String::from("observation_date,REAINTRATREARAT10Y\n");
    for y in 1982..=2025 {
        for m in 1..=12 {
            let v = fred_value(y, m);
            s.push_str(&format!("{y}-{m:02}-01,{v}\n"));
        }
    }
    let p = dir.join("fred.csv");
    std::fs::write(&p, s).unwrap();
    p
}

/// Annual World Bank-style file: `year,value`, 1975 to 1981.
pub fn write_worldbank(dir: &Path) -> PathBuf {
    let mut s = String::from("year,value\n");
    for y in 1975..=1981 {
        s.push_str(&format!("{y},{}\n", 2.0 + 0.3 * (y - 1975) as f64));
    }
    let p = dir.join("worldbank.csv");
    std::fs::write(&p, s).unwrap();
    p
}

/// Annual alternative rate covering the whole sample.
pub fn write_alt(dir: &Path, name: &str) -> PathBuf {
    let mut s = String::from("year,value\n");
    for y in 1975..=2026 {
        s.push_str(&format!("{y},{}\n", 5.0 - 0.08 * (y - 1975) as f64 + ((y * 7) % 5) as f64 * 0.2));
    }
    let p = dir.join(format!("{name}.csv"));
    std::fs::write(&p, s).unwrap();
    p
}
