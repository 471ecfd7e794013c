//! Acceptance battery: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use monetif_cli::config::PipelineConfig;
use monetif_cli::sweep::run_seed_sweep;
use monetif_core::diagnostics::{breusch_godfrey, breusch_pagan, chow_test_design, jarque_bera};
use monetif_core::dist::{chi2_cdf, chi2_sf, f_cdf, normal_cdf, t_cdf};
use monetif_core::extend::{fit_quantile, quantile_objective};
use monetif_core::ols::{covariance_hc, fit, newey_west_auto_lag, CovarianceKind, DesignMatrix, FitResult, HcFlavor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

fn design(cols: Vec<Vec<f64>>) -> DesignMatrix {
    let labels: Vec<String> = (0..cols.len()).map(|j| if j == 0 { "const".into() } else { format!("x{j}") }).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    DesignMatrix::from_columns(&refs, &cols)
}

fn random_design(r: &mut ChaCha8Rng, n: usize, k: usize) -> DesignMatrix {
    let mut cols = vec![vec![1.0; n]];
    for _ in 1..k {
        cols.push(normals(r, n));
    }
    design(cols)
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn normal_equations(d: &DesignMatrix, y: &[f64]) -> Vec<f64> {
    let k = d.k();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..d.n() {
        let row = d.x.row(i);
        for a in 0..k {
            xty[a] += row[a] * y[i];
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    gauss_solve(xtx, xty)
}

fn oracle_ssr(d: &DesignMatrix, y: &[f64]) -> f64 {
    let b = normal_equations(d, y);
    d.x.mul_vec(&b).iter().zip(y).map(|(f, v)| (v - f).powi(2)).sum()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_ols_oracle() -> Outcome {
    let mut r = rng(101);
    let (mut worst_rel, mut worst_orth) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let k = r.random_range(1..=4);
        let n = r.random_range(k + 2..=20);
        let d = random_design(&mut r, n, k);
        let y = normals(&mut r, n);
        let f = fit(&d, &y, CovarianceKind::Hc1).expect("full-rank design");
        let oracle = normal_equations(&d, &y);
        for (a, b) in f.coefficients.iter().zip(&oracle) {
            worst_rel = worst_rel.max((a - b).abs() / b.abs().max(1.0));
        }
        for j in 0..k {
            let xe: f64 = (0..n).map(|i| d.x[(i, j)] * f.residuals[i]).sum();
            worst_orth = worst_orth.max(xe.abs());
        }
    }
    outcome(
        worst_rel <= 1e-8 && worst_orth <= 1e-8,
        format!("1000 datasets, max rel err {worst_rel:.2e}, max |X'e| {worst_orth:.2e}"),
    )
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn c2_distributions() -> Outcome {
    let grid = |lo: f64, hi: f64| (0..100).map(move |i| lo + (hi - lo) * i as f64 / 99.0);
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    for x in grid(-8.0, 8.0) {
        // ∫ from the far tail, where the remaining mass is below 1e-15
        track(normal_cdf(x), simpson(phi, -12.0, x, 4000));
    }
    for x in grid(-50.0, 50.0) {
        track(t_cdf(x, 1.0).unwrap(), 0.5 + x.atan() / PI);
    }
    for x in grid(0.0, 40.0) {
        track(chi2_cdf(x, 2.0).unwrap(), 1.0 - (-x / 2.0).exp());
    }
    for (i, x) in grid(0.0, 12.0).enumerate() {
        let nu = [1.0, 2.5, 5.0, 10.0, 30.0][i % 5];
        track(f_cdf(x * x, 1.0, nu).unwrap(), 2.0 * t_cdf(x, nu).unwrap() - 1.0);
    }
    for (i, x) in grid(0.0, 30.0).enumerate() {
        let d2 = [1.0, 3.0, 7.5, 20.0][i % 4];
        track(f_cdf(x, 2.0, d2).unwrap(), 1.0 - (1.0 + 2.0 * x / d2).powf(-d2 / 2.0));
    }
    let p = chi2_sf(3.24, 2.0).unwrap();
    outcome(
        worst <= 1e-8 && (p - 0.198).abs() <= 1e-3,
        format!("max abs err {worst:.2e} over 5 grids; chi2_sf(3.24, 2) = {p:.4}"),
    )
}

fn c3_hac_collapse() -> Outcome {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = r.random_range(1..=4);
        let n = r.random_range(k + 3..=60);
        let d = random_design(&mut r, n, k);
        let y = normals(&mut r, n);
        let nw = fit(&d, &y, CovarianceKind::NeweyWest { lags: Some(0) }).unwrap();
        let hc0 = fit(&d, &y, CovarianceKind::Hc0).unwrap();
        for (a, b) in nw.covariance.iter().flatten().zip(hc0.covariance.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        // and against the sandwich computed directly
        let direct = covariance_hc(&d.x, &ols_inverse(&d), &hc0.residuals, HcFlavor::Hc0);
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((direct[(i, j)] - nw.covariance[i][j]).abs());
            }
        }
    }
    let lag = newey_west_auto_lag(52);
    outcome(
        worst <= 1e-12 && lag == 3,
        format!("100 fits, max |NW(0) - HC0| {worst:.2e}; auto lag at n = 52 is {lag}"),
    )
}

/// `(XᵀX)⁻¹` column by column from the normal-equation solver.
fn ols_inverse(d: &DesignMatrix) -> monetif_core::linalg::Matrix {
    let k = d.k();
    let mut xtx = vec![vec![0.0; k]; k];
    for i in 0..d.n() {
        let row = d.x.row(i);
        for a in 0..k {
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| gauss_solve(xtx.clone(), (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect()))
        .collect();
    monetif_core::linalg::Matrix::from_columns(&cols)
}

fn c4_chow() -> Outcome {
    let mut r = rng(404);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = r.random_range(1..=3);
        let n = r.random_range(4 * k + 6..=60);
        let d = random_design(&mut r, n, k);
        let shift = r.random_range(0.0..2.0);
        let z = normals(&mut r, n);
        let cut = r.random_range(k + 2..n - k - 1);
        let post: Vec<bool> = (0..n).map(|i| i >= cut).collect();
        let y: Vec<f64> = (0..n).map(|i| z[i] + if post[i] { shift } else { 0.0 }).collect();
        let c = chow_test_design(&d, &y, &post).unwrap();
        let mut cols: Vec<Vec<f64>> = (0..k).map(|j| d.x.column(j)).collect();
        for j in 0..k {
            cols.push((0..n).map(|i| if post[i] { d.x[(i, j)] } else { 0.0 }).collect());
        }
        let full = design(cols);
        let (ssr_r, ssr_u) = (oracle_ssr(&d, &y), oracle_ssr(&full, &y));
        let oracle = ((ssr_r - ssr_u) / k as f64) / (ssr_u / (n - 2 * k) as f64);
        worst = worst.max((c.statistic - oracle).abs() / oracle.abs().max(1.0));
    }
    outcome(worst <= 1e-6, format!("200 datasets, max rel |F_chow - F_interacted| {worst:.2e}"))
}

fn c5_quantile() -> Outcome {
    let mut r = rng(505);
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for case in 0..500 {
        let n = r.random_range(3..=12);
        let tau = [0.1, 0.25, 0.5, 0.75, 0.9][case % 5];
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 0.5 * v + r.random_range(-1.0..1.0)).collect();
        let d = design(vec![vec![1.0; n], x.clone()]);
        let q = fit_quantile(&d, &y, tau).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                if x[i] != x[j] {
                    let s = (y[j] - y[i]) / (x[j] - x[i]);
                    best = best.min(quantile_objective(&d, &y, &[y[i] - s * x[i], s], tau));
                }
            }
        }
        worst = worst.max(q.objective - best);
        cases += 1;
    }
    let mut medians_exact = 0;
    for _ in 0..200 {
        let n = 2 * r.random_range(1..40) + 1;
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
        let q = fit_quantile(&design(vec![vec![1.0; n]]), &y, 0.5).unwrap();
        let mut s = y.clone();
        s.sort_by(f64::total_cmp);
        if q.coefficients[0] == s[n / 2] {
            medians_exact += 1;
        }
    }
    outcome(
        worst <= 1e-6 && medians_exact == 200,
        format!("{cases} instances, max (irls - enumeration) {worst:.2e}; exact odd medians {medians_exact}/200"),
    )
}

fn ols_xy(x: &[f64], y: &[f64]) -> FitResult {
    fit(&design(vec![vec![1.0; x.len()], x.to_vec()]), y, CovarianceKind::Classical).unwrap()
}

fn c6_size_power() -> Outcome {
    let n = 1000;
    let reps = 200;
    let mut r = rng(606);
    let (mut jb0, mut jb1, mut bp0, mut bp1, mut bg0, mut bg1) = (0, 0, 0, 0, 0, 0);
    let rej = |p: Option<f64>| usize::from(p.expect("p-value") < 0.05);
    for _ in 0..reps {
        let x = normals(&mut r, n);
        let z = normals(&mut r, n);
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 1.0 + 0.5 * a + b).collect();
        let null = ols_xy(&x, &y);
        jb0 += rej(jarque_bera(&null.residuals).unwrap().p_value);
        bp0 += rej(breusch_pagan(&null).unwrap().p_value);
        bg0 += rej(breusch_godfrey(&null, 1).unwrap().p_value);

        // 5% of errors drawn with ten times the scale
        let contaminated: Vec<f64> = (0..n)
            .map(|i| {
                let e = if r.random::<f64>() < 0.05 { 10.0 * z[i] } else { z[i] };
                1.0 + 0.5 * x[i] + e
            })
            .collect();
        jb1 += rej(jarque_bera(&ols_xy(&x, &contaminated).residuals).unwrap().p_value);

        let xu: Vec<f64> = (0..n).map(|_| r.random_range(0.5..3.0)).collect();
        let het: Vec<f64> = (0..n).map(|i| 1.0 + xu[i] + xu[i] * z[i]).collect();
        bp1 += rej(breusch_pagan(&ols_xy(&xu, &het)).unwrap().p_value);

        let w = normals(&mut r, n);
        let mut e = vec![w[0] / (1.0f64 - 0.64).sqrt()];
        for t in 1..n {
            e.push(0.8 * e[t - 1] + w[t]);
        }
        let ar: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * x[i] + e[i]).collect();
        bg1 += rej(breusch_godfrey(&ols_xy(&x, &ar), 1).unwrap().p_value);
    }
    let rate = |c: usize| c as f64 / reps as f64;
    let size_ok = [jb0, bp0, bg0].iter().all(|&c| (0.02..=0.10).contains(&rate(c)));
    let power_ok = [jb1, bp1, bg1].iter().all(|&c| rate(c) >= 0.95);
    outcome(
        size_ok && power_ok,
        format!(
            "size JB {:.3} BP {:.3} BG {:.3}; power JB {:.3} BP {:.3} BG {:.3}",
            rate(jb0),
            rate(bp0),
            rate(bg0),
            rate(jb1),
            rate(bp1),
            rate(bg1)
        ),
    )
}

fn c7_c8_sweep() -> (Outcome, Outcome, Duration) {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..100).collect();
    let s = run_seed_sweep(&PipelineConfig::default(), &seeds).expect("sweep runs");
    let elapsed = start.elapsed();
    let get = |fit: &str| s.coefficient(fit, "real_rate").expect("fit present");
    let m2 = get("full.model2");
    let a = m2.negative_significant_01;
    let b = s.fit("full.model2").unwrap().adj_r2.median;
    let p1m1 = get("Period 1.model1");
    let p1m2 = get("Period 1.model2");
    let c1 = (p1m1.count - p1m1.significant_10).min(p1m2.count - p1m2.significant_10);
    let c2 = get("Period 2.model2").negative_significant_05;
    let d = s.chow.as_ref().unwrap().significant_01;
    let e = s.correlation_signs_expected;
    let drop = s.drop_years.as_ref().unwrap();
    let pass7 = s.failures.is_empty() && a >= 90 && b > 0.85 && c1 >= 70 && c2 >= 90 && d >= 90 && e >= 95;
    let c7 = outcome(
        pass7 && elapsed < Duration::from_secs(120),
        format!(
            "(a) {a}/100 (b) median adj R² {b:.3} (c) P1 insignificant {c1}/100, P2 neg sig {c2}/100 (d) {d}/100 (e) {e}/100; failures {}",
            s.failures.len()
        ),
    );
    let c8 = outcome(
        drop.within_one_se >= 90 && drop.count == 100,
        format!("shift < 1 se in {}/{} seeds", drop.within_one_se, drop.count),
    );
    (c7, c8, elapsed)
}

fn read_outputs(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut text = std::fs::read_to_string(&p).unwrap();
            if name == "manifest.txt" {
                text = text.split_once('\n').map_or(String::new(), |(_, rest)| rest.to_string());
            }
            (name, text)
        })
        .collect();
    files.sort();
    files
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // identical config, output directory included; the first run is moved aside
    let run = || {
        let status = Command::new(env!("CARGO_BIN_EXE_monetif"))
            .args(["report", "--seed", "11", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        read_outputs(&out)
    };
    let a = run();
    std::fs::rename(&out, tmp.path().join("first")).unwrap();
    let b = run();
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    outcome(
        a.len() == b.len() && differing.is_empty() && a.len() >= 19,
        format!("{} files compared, {} differ {:?}", a.len(), differing.len(), differing),
    )
}

fn line(id: &str, pass: bool, timing: String, detail: &str) -> bool {
    println!("criterion {id}: {} ({timing}) {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn timed(id: &str, limit: Duration, f: fn() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let timing = format!("{:.2}s, limit {}s", el.as_secs_f64(), limit.as_secs());
    line(id, o.pass && el < limit, timing, &o.detail)
}

fn main() {
    let mut all = true;
    all &= timed("1", Duration::from_secs(5), c1_ols_oracle);
    all &= timed("2", Duration::from_secs(1), c2_distributions);
    all &= timed("3", Duration::from_secs(2), c3_hac_collapse);
    all &= timed("4", Duration::from_secs(5), c4_chow);
    all &= timed("5", Duration::from_secs(10), c5_quantile);
    all &= timed("6", Duration::from_secs(60), c6_size_power);
    let (c7, c8, el) = c7_c8_sweep();
    let timing = || format!("sweep {:.2}s, limit 120s", el.as_secs_f64());
    let in_time = el < Duration::from_secs(120);
    all &= line("7", c7.pass && in_time, timing(), &c7.detail);
    all &= line("8", c8.pass && in_time, timing(), &c8.detail);
    all &= timed("9", Duration::from_secs(5), c9_determinism);
    if !all {
        std::process::exit(1);
    }
}
