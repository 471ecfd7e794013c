//! Table and figure-data output.
//!
//! Tables are built once as [`Table`] values and rendered to text, long-format
//! CSV or JSON. Figure data is always CSV.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use monetif_core::diagnostics::{DiagnosticsReport, TestOutcome};
use monetif_core::dist::stars;
use monetif_core::ingest::SourceLog;
use monetif_core::ols::{CovarianceKind, FitResult};
use monetif_core::serde_f64;
use monetif_core::series::{Dataset, Year};

use crate::config::OutputFormat;
use crate::error::CliError;
use crate::pipeline::RunReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cell {
    Empty,
    Count {
        value: usize,
    },
    Value {
        #[serde(with = "serde_f64")]
        value: f64,
    },
    Coef {
        estimate: f64,
        se: f64,
        #[serde(with = "serde_f64")]
        t: f64,
        p: f64,
        ci: [f64; 2],
    },
    /// A statistic, starred by its p-value when one exists.
    Stat {
        #[serde(with = "serde_f64")]
        value: f64,
        p: Option<f64>,
    },
    Text {
        value: String,
    },
}

impl Cell {
    fn value(v: f64) -> Self {
        Self::Value { value: v }
    }

    fn text(s: impl Into<String>) -> Self {
        Self::Text { value: s.into() }
    }

    fn opt(v: Option<f64>) -> Self {
        v.map_or(Self::text("-"), Self::value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Print confidence intervals under coefficients in text output.
    #[serde(default)]
    pub show_ci: bool,
}

impl Section {
    fn new(title: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            title: title.into(),
            columns,
            rows: Vec::new(),
            show_ci: false,
        }
    }

    fn row(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        self.rows.push(Row {
            label: label.into(),
            cells,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
    pub notes: Vec<String>,
}

const STAR_NOTE: &str = "***, **, * indicate significance at p<0.01, p<0.05, p<0.1.";

/// Display name for a regression term.
pub fn term_label(term: &str) -> String {
    match term {
        "const" => "Constant".into(),
        "real_rate" => "Real interest rate".into(),
        "time_trend" => "Time trend".into(),
        "qe_dummy" => "QE dummy".into(),
        "real_rate_x_qe" => "Real rate × QE".into(),
        "real_rate_sq" => "Real rate squared".into(),
        t => match t.strip_prefix("real_rate_lag") {
            Some(k) => format!("Real rate (t-{k})"),
            None => t.to_string(),
        },
    }
}

fn coef_cell(f: &FitResult, term: &str) -> Cell {
    match f.index(term) {
        Some(i) => Cell::Coef {
            estimate: f.coefficients[i],
            se: f.std_errors[i],
            t: f.t_stats[i],
            p: f.p_values[i],
            ci: f.conf_intervals[i],
        },
        None => Cell::Empty,
    }
}

fn union_terms<'a>(fits: impl IntoIterator<Item = &'a FitResult>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in fits {
        for t in &f.terms {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
    }
    out
}

#[derive(Clone, Copy, Default)]
struct Extras {
    t_columns: bool,
    f_stat: bool,
    info: bool,
}

/// One column per fit (two with `t_columns`), term rows then fit statistics.
fn regression_section(title: &str, columns: &[String], fits: &[&FitResult], extras: Extras) -> Section {
    let cols = if extras.t_columns {
        columns
            .iter()
            .flat_map(|c| [format!("{c} coefficient"), format!("{c} t-value")])
            .collect()
    } else {
        columns.to_vec()
    };
    let mut s = Section::new(title, cols);
    let spread = |cells: Vec<(Cell, Cell)>| -> Vec<Cell> {
        if extras.t_columns {
            cells.into_iter().flat_map(|(a, b)| [a, b]).collect()
        } else {
            cells.into_iter().map(|(a, _)| a).collect()
        }
    };
    for term in union_terms(fits.iter().copied()) {
        let cells = fits
            .iter()
            .map(|f| {
                let c = coef_cell(f, &term);
                let t = match &c {
                    Cell::Coef { t, .. } => Cell::value(*t),
                    _ => Cell::Empty,
                };
                (c, t)
            })
            .collect();
        s.row(term_label(&term), spread(cells));
    }
    let stat_row = |s: &mut Section, label: &str, f: &dyn Fn(&FitResult) -> Cell| {
        let cells = fits.iter().map(|fit| (f(fit), Cell::Empty)).collect();
        s.row(label, spread(cells));
    };
    stat_row(&mut s, "R²", &|f| Cell::value(f.r2));
    stat_row(&mut s, "Adjusted R²", &|f| Cell::value(f.adj_r2));
    if extras.f_stat {
        stat_row(&mut s, "F statistic", &|f| match f.f_stat {
            Some(v) => Cell::Stat { value: v, p: f.f_p_value },
            None => Cell::text("-"),
        });
    }
    if extras.info {
        stat_row(&mut s, "AIC", &|f| Cell::value(f.aic));
        stat_row(&mut s, "BIC", &|f| Cell::value(f.bic));
    }
    stat_row(&mut s, "Observations", &|f| Cell::Count { value: f.n });
    s
}

fn covariance_label(c: CovarianceKind) -> String {
    match c {
        CovarianceKind::Classical => "Classical".into(),
        CovarianceKind::Hc0 => "Robust (HC0)".into(),
        CovarianceKind::Hc1 => "Robust (HC1)".into(),
        CovarianceKind::NeweyWest { lags: None } => "Newey-West (automatic lag)".into(),
        CovarianceKind::NeweyWest { lags: Some(l) } => format!("Newey-West (L = {l})"),
    }
}

fn se_note(report: &RunReport) -> String {
    format!("{} standard errors in parentheses.", covariance_label(report.config.covariance))
}

fn model_columns() -> Vec<String> {
    ["Model 1 (baseline)", "Model 2 (time trend)", "Model 3 (QE interaction)"]
        .map(String::from)
        .to_vec()
}

fn period_columns(report: &RunReport) -> Vec<String> {
    report
        .periods
        .iter()
        .flat_map(|p| {
            let span = format!("{} ({}-{})", p.segment.label, p.segment.start, p.segment.end);
            [format!("{span} Model 1"), format!("{span} Model 2")]
        })
        .collect()
}

fn period_fits(report: &RunReport) -> Vec<&FitResult> {
    report.periods.iter().flat_map(|p| [&p.model1, &p.model2]).collect()
}

fn flag_notes(fits: &[(&str, &FitResult)]) -> Vec<String> {
    fits.iter()
        .filter(|(_, f)| !f.flags.is_empty())
        .map(|(name, f)| format!("{name}: {}.", f.flags.join(", ")))
        .collect()
}

fn t02(report: &RunReport) -> Table {
    let mut d = Section::new(
        "Descriptive statistics",
        ["Mean", "Std. Dev.", "Min", "Max", "Skewness", "Kurtosis"].map(String::from).to_vec(),
    );
    for v in &report.descriptives {
        let s = &v.summary;
        d.row(
            variable_label(&v.variable),
            vec![
                Cell::value(s.mean),
                Cell::value(s.std_dev),
                Cell::value(s.min),
                Cell::value(s.max),
                Cell::opt(s.skewness),
                Cell::opt(s.excess_kurtosis),
            ],
        );
    }
    let cm = &report.correlations;
    let mut c = Section::new(
        "Correlation matrix",
        cm.variables.iter().map(|v| variable_label(v)).collect(),
    );
    for (i, a) in cm.variables.iter().enumerate() {
        let cells = (0..cm.variables.len())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Less => Cell::Stat {
                    value: cm.r[i][j],
                    p: Some(cm.p[i][j]),
                },
                std::cmp::Ordering::Equal => Cell::value(1.0),
                std::cmp::Ordering::Greater => Cell::Empty,
            })
            .collect();
        c.row(variable_label(a), cells);
    }
    Table {
        id: "t02_descriptives".into(),
        title: format!(
            "Descriptive statistics ({}-{}, N={})",
            report.prediction.years.first().map_or(0, |y| y.0),
            report.prediction.years.last().map_or(0, |y| y.0),
            report.n
        ),
        sections: vec![d, c],
        notes: vec![
            "Std. Dev. uses the n-1 denominator; skewness and kurtosis are moment estimates, kurtosis in excess of 3."
                .into(),
            format!("Correlation p-values from t = r√((n-2)/(1-r²)). {STAR_NOTE}"),
        ],
    }
}

fn variable_label(v: &str) -> String {
    match v {
        "real_rate" => "Real interest rate (%)".into(),
        "impact_factor" => "IF".into(),
        "log_if" => "log(IF)".into(),
        "time_trend" => "Time trend".into(),
        other => other.into(),
    }
}

fn t03(report: &RunReport) -> Table {
    let fits: Vec<&FitResult> = report.full_sample.iter().collect();
    let mut s = regression_section(
        "Full sample",
        &model_columns(),
        &fits,
        Extras {
            f_stat: true,
            ..Extras::default()
        },
    );
    if let Some(m3) = report.model("model3") {
        if let Some(v) = m3.post_qe_rate_effect {
            let mut cells = vec![Cell::Empty; 3];
            cells[2] = Cell::value(v);
            s.row("Post-QE rate effect", cells);
        }
    }
    let mut notes = vec![format!("{} {STAR_NOTE}", se_note(report))];
    notes.extend(flag_notes(&[("Model 1", fits[0]), ("Model 2", fits[1]), ("Model 3", fits[2])]));
    Table {
        id: "t03_full_sample".into(),
        title: format!("Full sample regression results (N={})", report.n),
        sections: vec![s],
        notes,
    }
}

fn t04(report: &RunReport) -> Table {
    let s = regression_section(
        "Sub-period estimates",
        &period_columns(report),
        &period_fits(report),
        Extras {
            f_stat: true,
            ..Extras::default()
        },
    );
    Table {
        id: "t04_periods".into(),
        title: "Period-based regression results".into(),
        sections: vec![s],
        notes: vec![format!("{} {STAR_NOTE}", se_note(report))],
    }
}

pub fn chow_table(c: &TestOutcome, breakpoint: Year) -> Table {
    let mut s = Section::new("Chow test", vec!["Value".into(), "p-value".into()]);
    s.row("F statistic", vec![Cell::value(c.statistic), Cell::opt(c.p_value)]);
    let df = c.df.iter().map(|d| format!("{d}")).collect::<Vec<_>>().join(", ");
    s.row("Degrees of freedom", vec![Cell::text(df), Cell::Empty]);
    let mut notes = vec![
        format!("Null hypothesis: no change in the regression coefficients at {breakpoint}."),
        format!("{}.", c.note),
    ];
    if !c.flags.is_empty() {
        notes.push(format!("Flags: {}.", c.flags.join(", ")));
    }
    Table {
        id: "t05_chow".into(),
        title: format!("Chow structural break test (breakpoint {breakpoint})"),
        sections: vec![s],
        notes,
    }
}

fn t05(report: &RunReport) -> Table {
    chow_table(&report.chow, report.config.breakpoint)
}

/// Standalone table for one regression.
pub fn fit_table(fit: &FitResult) -> Table {
    let s = regression_section(
        &fit.model,
        std::slice::from_ref(&fit.model),
        &[fit],
        Extras {
            t_columns: true,
            f_stat: true,
            info: true,
        },
    );
    let mut notes = vec![format!(
        "{} standard errors in parentheses. {STAR_NOTE}",
        covariance_label(fit.covariance_kind)
    )];
    notes.extend(flag_notes(&[(fit.model.as_str(), fit)]));
    Table {
        id: format!("fit_{}", fit.model),
        title: format!("Regression results: {} (N={})", fit.model, fit.n),
        sections: vec![s],
        notes,
    }
}

/// Every diagnostic outcome in one table.
pub fn diagnostics_table(d: &DiagnosticsReport) -> Table {
    let list: Vec<&TestOutcome> = d.outcomes.iter().collect();
    Table {
        id: format!("diagnostics_{}", d.model),
        title: format!("Residual diagnostics ({}, N={})", d.model, d.n),
        sections: vec![test_section("Tests", &list), acf_section(d)],
        notes: outcome_notes(&list),
    }
}

fn t06(report: &RunReport) -> Table {
    let fits: Vec<&FitResult> = report.full_sample.iter().collect();
    let all = Extras {
        t_columns: true,
        f_stat: true,
        info: true,
    };
    let main = regression_section("Full sample", &model_columns(), &fits, all);
    let hac = &report.full_sample_hac;
    let lags = hac.newey_west_lags.map_or_else(String::new, |l| format!(" (L = {l})"));
    let hac_section = regression_section(
        &format!("Model 2 with Newey-West standard errors{lags}"),
        &["Model 2".to_string()],
        &[hac],
        all,
    );
    Table {
        id: "t06_full_detailed".into(),
        title: format!("Full sample regression detailed results (N={})", report.n),
        sections: vec![main, hac_section],
        notes: vec![
            format!("{} {STAR_NOTE}", se_note(report)),
            "AIC and BIC use the Gaussian log-likelihood including its constant.".into(),
        ],
    }
}

fn t07(report: &RunReport) -> Table {
    let mut s = regression_section(
        "Sub-period estimates",
        &period_columns(report),
        &period_fits(report),
        Extras {
            t_columns: false,
            f_stat: true,
            info: true,
        },
    );
    s.show_ci = true;
    Table {
        id: "t07_period_detailed".into(),
        title: "Period-based regression detailed results".into(),
        sections: vec![s],
        notes: vec![format!(
            "{} 95% confidence intervals in square brackets. {STAR_NOTE}",
            se_note(report)
        )],
    }
}

fn t08(report: &RunReport) -> Table {
    let base = report.model("model2").expect("model2 is always fitted");
    let mut sections = Vec::new();

    let mut cols = vec!["Baseline".to_string()];
    let mut fits = vec![base];
    for a in &report.robustness.alternatives {
        cols.push(a.name.clone());
        fits.push(&a.fit);
    }
    let mut alt = regression_section("Alternative rate variables", &cols, &fits, Extras::default());
    if let Some(r) = alt.rows.iter_mut().find(|r| r.label == term_label("real_rate")) {
        r.label = "Monetary policy variable".into();
    }
    sections.push(alt);

    if let Some(o) = &report.robustness.outlier_removed {
        let years = o.drop_years.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(", ");
        sections.push(regression_section(
            &format!("Outlier removal (dropping {years})"),
            &["Full sample".to_string(), "Outlier removed".to_string()],
            &[base, &o.fit],
            Extras::default(),
        ));
    }

    let ext = &report.extensions;
    sections.push(regression_section(
        "Extended specifications",
        &[format!("Distributed lag ({})", report.config.extensions.max_lag), "Quadratic".to_string()],
        &[&ext.lag_model, &ext.quadratic],
        Extras {
            f_stat: true,
            ..Extras::default()
        },
    ));

    if !ext.quantiles.is_empty() {
        let mut q = Section::new(
            "Quantile regressions (Model 2 regressors)",
            ext.quantiles.iter().map(|f| format!("tau = {}", f.tau)).collect(),
        );
        for (i, label) in ext.quantiles[0].labels.iter().enumerate() {
            q.row(
                term_label(label),
                ext.quantiles.iter().map(|f| Cell::value(f.coefficients[i])).collect(),
            );
        }
        q.row("Check-loss objective", ext.quantiles.iter().map(|f| Cell::value(f.objective)).collect());
        q.row(
            "Iterations",
            ext.quantiles.iter().map(|f| Cell::Count { value: f.iterations }).collect(),
        );
        sections.push(q);
    }

    Table {
        id: "t08_robustness".into(),
        title: "Robustness tests".into(),
        sections,
        notes: vec![
            format!("{} {STAR_NOTE}", se_note(report)),
            "Quantile regression reports point estimates only.".into(),
        ],
    }
}

fn outcome_label(o: &TestOutcome) -> String {
    let p = o.df.first().copied().unwrap_or(0.0);
    match o.name.as_str() {
        "jarque_bera" => "Jarque-Bera".into(),
        "kolmogorov_smirnov" => "Kolmogorov-Smirnov".into(),
        "durbin_watson" => "Durbin-Watson".into(),
        "ljung_box" => format!("Ljung-Box ({p} lags)"),
        "breusch_godfrey" => format!("Breusch-Godfrey ({p} lag{})", if p == 1.0 { "" } else { "s" }),
        "white" => "White".into(),
        "breusch_pagan" => "Breusch-Pagan".into(),
        "goldfeld_quandt" => "Goldfeld-Quandt".into(),
        other => other.into(),
    }
}

fn test_section(title: &str, outcomes: &[&TestOutcome]) -> Section {
    let mut s = Section::new(title, vec!["Statistic".into(), "p-value".into(), "df".into()]);
    for o in outcomes {
        let df = if o.df.is_empty() {
            Cell::text("-")
        } else {
            Cell::text(o.df.iter().map(|d| format!("{d}")).collect::<Vec<_>>().join(", "))
        };
        s.row(outcome_label(o), vec![Cell::value(o.statistic), Cell::opt(o.p_value), df]);
    }
    s
}

fn outcomes<'a>(report: &'a RunReport, names: &[&str]) -> Vec<&'a TestOutcome> {
    names
        .iter()
        .flat_map(|n| report.diagnostics.outcomes.iter().filter(move |o| o.name == *n))
        .collect()
}

fn outcome_notes(list: &[&TestOutcome]) -> Vec<String> {
    list.iter()
        .filter(|o| !o.note.is_empty())
        .map(|o| format!("{}: {}.", outcome_label(o), o.note))
        .collect()
}

fn t09(report: &RunReport) -> Table {
    let list = outcomes(report, &["jarque_bera", "kolmogorov_smirnov"]);
    let mut notes = vec!["Null hypothesis: residuals are normally distributed.".to_string()];
    notes.extend(outcome_notes(&list));
    Table {
        id: "t09_normality".into(),
        title: format!("Residual normality tests ({})", report.diagnostics.model),
        sections: vec![test_section("Normality", &list)],
        notes,
    }
}

fn acf_section(d: &DiagnosticsReport) -> Section {
    let mut acf = Section::new(
        "Residual ACF and PACF",
        vec!["ACF".into(), "PACF".into(), "p-value".into()],
    );
    for lag in 1..d.acf.len() {
        acf.row(
            format!("Lag {lag}"),
            vec![
                Cell::value(d.acf[lag]),
                Cell::value(d.pacf[lag]),
                Cell::opt(d.acf_p_values.get(lag).copied()),
            ],
        );
    }
    acf
}

fn t10(report: &RunReport) -> Table {
    let list = outcomes(report, &["durbin_watson", "ljung_box", "breusch_godfrey"]);
    let d = &report.diagnostics;
    let acf = acf_section(d);
    let mut notes = Vec::new();
    notes.extend(outcome_notes(&list));
    notes.push("ACF p-values are two-sided, from Bartlett's standard errors.".into());
    Table {
        id: "t10_autocorrelation".into(),
        title: format!("Residual autocorrelation tests ({})", d.model),
        sections: vec![test_section("Autocorrelation", &list), acf],
        notes,
    }
}

fn t11(report: &RunReport) -> Table {
    let list = outcomes(report, &["white", "breusch_pagan", "goldfeld_quandt"]);
    let mut notes = vec!["Null hypothesis: homoskedastic errors.".to_string()];
    notes.extend(outcome_notes(&list));
    Table {
        id: "t11_heteroskedasticity".into(),
        title: format!("Heteroskedasticity tests ({})", report.diagnostics.model),
        sections: vec![test_section("Heteroskedasticity", &list)],
        notes,
    }
}

/// All ten tables in order.
pub fn build_tables(report: &RunReport) -> Vec<Table> {
    vec![
        t02(report),
        t03(report),
        t04(report),
        t05(report),
        t06(report),
        t07(report),
        t08(report),
        t09(report),
        t10(report),
        t11(report),
    ]
}

/// Shortest round-trip form; non-finite values as `inf`, `-inf`, `nan`.
pub fn raw(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn fixed(v: f64, digits: usize) -> String {
    if v.is_finite() {
        let s = format!("{v:.digits$}");
        // avoid "-0.000"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    } else {
        raw(v)
    }
}

fn cell_lines(cell: &Cell, show_ci: bool) -> Vec<String> {
    match cell {
        Cell::Empty => vec![String::new()],
        Cell::Count { value } => vec![value.to_string()],
        Cell::Value { value } => vec![fixed(*value, 3)],
        Cell::Coef { estimate, se, p, ci, .. } => {
            let mut v = vec![format!("{}{}", fixed(*estimate, 3), stars(*p)), format!("({})", fixed(*se, 3))];
            if show_ci {
                v.push(format!("[{}, {}]", fixed(ci[0], 3), fixed(ci[1], 3)));
            }
            v
        }
        Cell::Stat { value, p } => vec![format!("{}{}", fixed(*value, 3), p.map(stars).map_or(String::new(), |s| s.to_string()))],
        Cell::Text { value } => vec![value.clone()],
    }
}

pub fn render_text(table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "{}", table.title).unwrap();
    writeln!(out, "{}", "=".repeat(table.title.chars().count())).unwrap();
    for s in &table.sections {
        writeln!(out).unwrap();
        writeln!(out, "{}", s.title).unwrap();
        let body: Vec<Vec<Vec<String>>> = s
            .rows
            .iter()
            .map(|r| r.cells.iter().map(|c| cell_lines(c, s.show_ci)).collect())
            .collect();
        let label_w = s.rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..s.columns.len())
            .map(|j| {
                let cells = body.iter().flat_map(|r| r.get(j)).flatten().map(|l| l.chars().count());
                cells.chain([s.columns[j].chars().count()]).max().unwrap_or(0)
            })
            .collect();
        let line = |label: &str, cols: &[String]| {
            let mut l = format!("{label:<label_w$}");
            for (c, w) in cols.iter().zip(&widths) {
                write!(l, "  {c:>w$}").unwrap();
            }
            l.trim_end().to_string()
        };
        let header = line("", &s.columns);
        let rule = "-".repeat(header.chars().count().max(label_w));
        writeln!(out, "{rule}").unwrap();
        writeln!(out, "{header}").unwrap();
        writeln!(out, "{rule}").unwrap();
        for (row, cells) in s.rows.iter().zip(&body) {
            let depth = cells.iter().map(Vec::len).max().unwrap_or(1);
            for d in 0..depth {
                let cols: Vec<String> = (0..s.columns.len())
                    .map(|j| cells.get(j).and_then(|c| c.get(d)).cloned().unwrap_or_default())
                    .collect();
                writeln!(out, "{}", line(if d == 0 { &row.label } else { "" }, &cols)).unwrap();
            }
        }
        writeln!(out, "{rule}").unwrap();
    }
    for n in &table.notes {
        writeln!(out, "Note: {n}").unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long format: one line per numeric field.
pub fn render_csv(table: &Table) -> String {
    let mut out = String::from("section,row,column,field,value\n");
    for s in &table.sections {
        for r in &s.rows {
            for (c, cell) in s.columns.iter().zip(&r.cells) {
                let fields: Vec<(&str, String)> = match cell {
                    Cell::Empty => Vec::new(),
                    Cell::Count { value } => vec![("value", value.to_string())],
                    Cell::Value { value } => vec![("value", raw(*value))],
                    Cell::Coef { estimate, se, t, p, ci } => vec![
                        ("estimate", raw(*estimate)),
                        ("se", raw(*se)),
                        ("t", raw(*t)),
                        ("p", raw(*p)),
                        ("ci_low", raw(ci[0])),
                        ("ci_high", raw(ci[1])),
                    ],
                    Cell::Stat { value, p } => {
                        let mut v = vec![("value", raw(*value))];
                        if let Some(p) = p {
                            v.push(("p", raw(*p)));
                        }
                        v
                    }
                    Cell::Text { value } => vec![("text", value.clone())],
                };
                for (f, v) in fields {
                    writeln!(
                        out,
                        "{},{},{},{f},{}",
                        csv_field(&s.title),
                        csv_field(&r.label),
                        csv_field(c),
                        csv_field(&v)
                    )
                    .unwrap();
                }
            }
        }
    }
    out
}

pub fn render_json(table: &Table) -> String {
    serde_json::to_string_pretty(table).expect("table serialises") + "\n"
}

pub fn render(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_text(table),
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => render_json(table),
    }
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
    written.push(path);
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))
}

/// Writes the ten table files; returns their paths.
pub fn emit_tables(report: &RunReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for t in build_tables(report) {
        write(dir, &format!("{}.{}", t.id, format.extension()), &render(&t, format), &mut written)?;
    }
    Ok(written)
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Writes the five figure-data CSVs; returns their paths.
pub fn emit_figure_data(report: &RunReport, dataset: &Dataset, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let years = dataset.years();

    let trend = csv_rows(
        "year,real_rate,impact_factor",
        (0..dataset.len()).map(|i| {
            format!("{},{},{}", years[i], raw(dataset.real_rate()[i]), raw(dataset.impact_factor()[i]))
        }),
    );
    write(dir, "fig_trend.csv", &trend, &mut written)?;

    let m2 = report.model("model2").expect("model2 is always fitted");
    let resid = csv_rows(
        "year,residual,fitted",
        (0..m2.n).map(|i| format!("{},{},{}", m2.years[i], raw(m2.residuals[i]), raw(m2.fitted[i]))),
    );
    write(dir, "fig_residuals.csv", &resid, &mut written)?;

    let d = &report.diagnostics;
    let acf = csv_rows(
        "lag,acf,pacf",
        (0..d.acf.len()).map(|l| format!("{l},{},{}", raw(d.acf[l]), raw(d.pacf[l]))),
    );
    write(dir, "fig_acf.csv", &acf, &mut written)?;

    let p = &report.prediction;
    let pred = csv_rows(
        "year,actual,predicted",
        (0..p.years.len()).map(|i| format!("{},{},{}", p.years[i], raw(p.actual[i]), raw(p.predicted[i]))),
    );
    write(dir, "fig_prediction.csv", &pred, &mut written)?;

    let partition = &report.config.partition;
    let scatter = csv_rows(
        "year,real_rate,log_if,period",
        (0..dataset.len()).map(|i| {
            format!(
                "{},{},{},{}",
                years[i],
                raw(dataset.real_rate()[i]),
                raw(dataset.log_if()[i]),
                csv_field(partition.label_of(years[i]).unwrap_or(""))
            )
        }),
    );
    write(dir, "fig_period_scatter.csv", &scatter, &mut written)?;
    Ok(written)
}

pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialises") + "\n"
}

pub fn parse_report(text: &str) -> Result<RunReport, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Data(format!("report.json: {e}")))
}

/// First line of the manifest; the only place a timestamp appears.
pub fn timestamp_header() -> String {
    format!("# generated {}", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

/// Lists the written files with byte counts below a timestamp header.
pub fn write_manifest(dir: &Path, seed: u64, files: &[PathBuf]) -> Result<PathBuf, CliError> {
    let mut s = timestamp_header();
    s.push('\n');
    writeln!(s, "seed {seed}").unwrap();
    let mut names: Vec<(String, u64)> = files
        .iter()
        .map(|p| {
            let len = std::fs::metadata(p).map(|m| m.len()).unwrap_or(0);
            let name = p.strip_prefix(dir).unwrap_or(p).display().to_string();
            (name, len)
        })
        .collect();
    names.sort();
    for (n, len) in names {
        writeln!(s, "{n} {len}").unwrap();
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, s).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
    Ok(path)
}

/// Everything `report` writes: tables, figure data, report.json, the
/// dataset, the source log and the manifest.
pub fn emit_all(
    report: &RunReport,
    dataset: &Dataset,
    log: &SourceLog,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let mut files = emit_tables(report, format, dir)?;
    files.extend(emit_figure_data(report, dataset, dir)?);
    write(dir, "report.json", &report_json(report), &mut files)?;
    write(dir, "dataset.csv", &dataset.to_csv(), &mut files)?;
    write(dir, "data_source_log.txt", &log.to_text(), &mut files)?;
    let manifest = write_manifest(dir, report.seed, &files)?;
    files.push(manifest);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_formats() {
        assert_eq!(raw(0.1), "0.1");
        assert_eq!(raw(f64::INFINITY), "inf");
        assert_eq!(raw(f64::NEG_INFINITY), "-inf");
        assert_eq!(raw(f64::NAN), "nan");
        assert_eq!(fixed(-0.0001, 3), "0.000");
        assert_eq!(fixed(-0.069, 3), "-0.069");
    }

    #[test]
    fn coefficient_cells_carry_stars() {
        let c = Cell::Coef {
            estimate: -0.069,
            se: 0.01,
            t: -6.9,
            p: 0.003,
            ci: [-0.09, -0.05],
        };
        assert_eq!(cell_lines(&c, false), vec!["-0.069***", "(0.010)"]);
        assert_eq!(cell_lines(&c, true)[2], "[-0.090, -0.050]");
        assert_eq!(cell_lines(&Cell::Stat { value: 8.92, p: Some(0.04) }, false), vec!["8.920**"]);
    }

    #[test]
    fn csv_quotes_and_long_rows() {
        let t = Table {
            id: "x".into(),
            title: "X".into(),
            sections: vec![Section {
                title: "a, b".into(),
                columns: vec!["c".into()],
                rows: vec![Row {
                    label: "r".into(),
                    cells: vec![Cell::Stat { value: 1.5, p: Some(0.2) }],
                }],
                show_ci: false,
            }],
            notes: vec![],
        };
        assert_eq!(render_csv(&t), "section,row,column,field,value\n\"a, b\",r,c,value,1.5\n\"a, b\",r,c,p,0.2\n");
        let back: Table = serde_json::from_str(&render_json(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn term_labels() {
        assert_eq!(term_label("real_rate_lag2"), "Real rate (t-2)");
        assert_eq!(term_label("const"), "Constant");
        assert_eq!(term_label("m2_growth"), "m2_growth");
    }
}
