use std::fmt::Write as _;

use chrono::NaiveDate;

use super::model::{run_model, RegressionResult};
use super::ols::significance_stars;
use super::suites::{DeltaMap, RiskMeasure, Suite};
use super::{EconError, NumericPanel};

/// Two-decimal table cell; negative zero prints as `0.00`.
pub fn format_cell(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct RiskPanel {
    pub risk: RiskMeasure,
    pub fits: Vec<RegressionResult>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub standardize: bool,
    pub panels: Vec<RiskPanel>,
}

/// Fits all 24 models of a suite. The first failing fit aborts the run and
/// names its cell.
pub fn run_suite(
    suite: &Suite,
    panel: &NumericPanel,
    delta: &DeltaMap,
    standardize: bool,
    hack_dates: &[NaiveDate],
) -> Result<SuiteReport, EconError> {
    let mut panels = Vec::with_capacity(4);
    for (risk, specs) in suite.specs(delta, standardize) {
        let mut fits = Vec::with_capacity(specs.len());
        for spec in &specs {
            let fit = run_model(panel, spec, hack_dates).map_err(|e| EconError::Fit {
                suite: suite.id.to_string(),
                risk: risk.label().to_string(),
                dependent: spec.dependent.label.clone(),
                error: Box::new(e),
            })?;
            fits.push(fit);
        }
        panels.push(RiskPanel { risk, fits });
    }
    Ok(SuiteReport {
        suite: suite.clone(),
        standardize,
        panels,
    })
}

const PANEL_LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

impl RiskPanel {
    /// Table body: a dependent-name row, coefficient and t-statistic rows per
    /// regressor, then N and adjusted R².
    fn rows(&self) -> Vec<(String, Vec<String>)> {
        let mut rows = vec![(
            String::new(),
            self.fits.iter().map(|f| f.dependent.label.clone()).collect(),
        )];
        let Some(first) = self.fits.first() else {
            return rows;
        };
        for (j, term) in first.terms.iter().enumerate() {
            let coefs = self
                .fits
                .iter()
                .map(|f| {
                    let t = &f.terms[j];
                    format!("{}{}", format_cell(t.coefficient), significance_stars(t.t_statistic))
                })
                .collect();
            let ts = self
                .fits
                .iter()
                .map(|f| format!("({})", format_cell(f.terms[j].t_statistic)))
                .collect();
            rows.push((term.label.clone(), coefs));
            rows.push((String::new(), ts));
        }
        rows.push(("N".into(), self.fits.iter().map(|f| f.n_obs.to_string()).collect()));
        rows.push((
            "Adj R-sq".into(),
            self.fits.iter().map(|f| format_cell(f.adj_r_squared)).collect(),
        ));
        rows
    }
}

impl SuiteReport {
    pub fn fit_count(&self) -> usize {
        self.panels.iter().map(|p| p.fits.len()).sum()
    }

    pub fn to_markdown(&self, footer: Option<&str>) -> String {
        let mut out = String::new();
        writeln!(out, "# {}\n", self.suite).unwrap();
        for (letter, panel) in PANEL_LETTERS.iter().zip(&self.panels) {
            writeln!(out, "## Panel {letter}: {}\n", panel.risk.label()).unwrap();
            let width = panel.fits.len();
            let header: Vec<String> = (1..=width).map(|i| format!("({i})")).collect();
            writeln!(out, "| | {} |", header.join(" | ")).unwrap();
            writeln!(out, "|---|{}", "---:|".repeat(width)).unwrap();
            for (label, cells) in panel.rows() {
                writeln!(out, "| {label} | {} |", cells.join(" | ")).unwrap();
            }
            out.push('\n');
        }
        let scaling = if self.standardize {
            "Dependent and non-dummy variables are z-scored over each estimation sample."
        } else {
            "Variables enter unstandardized."
        };
        writeln!(
            out,
            "t-statistics in parentheses. *, ** and *** mark significance at 10%, 5% and 1%. {scaling}"
        )
        .unwrap();
        if let Some(footer) = footer {
            writeln!(out, "\n{footer}").unwrap();
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let width = self.panels.first().map_or(0, |p| p.fits.len());
        let header: Vec<String> = (1..=width).map(|i| format!("({i})")).collect();
        writeln!(out, "suite\tpanel\tvariable\t{}", header.join("\t")).unwrap();
        for panel in &self.panels {
            for (label, cells) in panel.rows() {
                writeln!(out, "{}\t{}\t{label}\t{}", self.suite.id, panel.risk.label(), cells.join("\t")).unwrap();
            }
        }
        out
    }

    /// One line per (model, variable) with its missing count after transforms.
    pub fn audit_tsv(&self) -> String {
        let mut out = String::from("suite\tpanel\tdependent\trows_total\trows_kept\tvariable\tmissing\n");
        for panel in &self.panels {
            for fit in &panel.fits {
                for (var, missing) in &fit.audit.missing_by_variable {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{var}\t{missing}",
                        self.suite.id,
                        panel.risk.label(),
                        fit.dependent.label,
                        fit.audit.rows_total,
                        fit.audit.rows_kept
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}
