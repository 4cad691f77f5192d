use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::screening::AnalysisReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Text,
    Csv,
}

impl ReportFormat {
    /// Guess from a file extension; JSON when unknown.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("txt") => ReportFormat::Text,
            Some("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

pub fn render(report: &AnalysisReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Text => Ok(render_text(report)),
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn emit_report(report: &AnalysisReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(report, format)?).map_err(|e| Error::io(path, e))
}

/// p-values below the printable resolution show as `<.001`.
fn fmt_p(p: f64) -> String {
    if p < 0.0005 { "<.001".to_string() } else { format!("{p:.3}") }
}

fn render_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let c = &r.cohort;
    let _ = writeln!(s, "{}\n", r.disclaimer);
    let _ = writeln!(s, "Cohort: {} participants (low risk {}, high risk {}), {} recordings", c.n_participants, c.n_low, c.n_high, c.n_recordings);
    let counts = |m: &std::collections::BTreeMap<String, usize>| m.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "Gender: {}", counts(&c.gender));
    let _ = writeln!(s, "Country: {}\n", counts(&c.country));

    let _ = writeln!(s, "Group differences adjusted for {}", r.covariates.join(", "));
    let _ = writeln!(
        s,
        "{:<24} {:>10} {:>10} {:>10} {:>10} {:>8} {:>7} {:>6} {:>7}  sig",
        "feature", "low", "high", "low adj", "high adj", "F", "p", "eta2", "BH q*"
    );
    for row in &r.ancova {
        let a = &row.result;
        let _ = writeln!(
            s,
            "{:<24} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>8.2} {:>7} {:>6.3} {:>7}  {}",
            a.feature,
            a.raw_mean_low,
            a.raw_mean_high,
            a.adjusted_mean_low,
            a.adjusted_mean_high,
            a.f,
            fmt_p(a.p),
            a.partial_eta_sq,
            fmt_p(row.bh_q_supplementary),
            if row.significant { "*" } else { "" }
        );
    }
    let _ = writeln!(s, "* BH q: Benjamini-Hochberg adjusted p, supplementary only; selection uses raw p.");
    if let Some(m) = &r.mancova {
        let _ = writeln!(s, "Omnibus: Wilks lambda {:.3}, F({}, {}) = {:.2}, p {}", m.wilks_lambda, m.df1, m.df2, m.f, fmt_p(m.p));
    }

    if let Some(d) = &r.discriminant {
        let x = &d.result;
        let _ = writeln!(s, "\nDiscriminant analysis ({} cases, {:?} priors)", d.n_cases, x.priors);
        let _ = writeln!(s, "{:<24} {:>10}", "structure matrix", "function 1");
        for (name, v) in &d.structure_matrix {
            let _ = writeln!(s, "{name:<24} {v:>10.3}");
        }
        let _ = writeln!(
            s,
            "Wilks lambda {:.3}, chi2({}) = {:.2}, p {}; canonical correlation {:.3}",
            x.wilks_lambda,
            x.df,
            x.chi_square,
            fmt_p(x.p_value),
            x.canonical_correlation
        );
        let _ = writeln!(
            s,
            "Correctly classified {:.1}% (cross-validated {:.1}%); centroids low {:.3}, high {:.3}",
            100.0 * x.resubstitution_accuracy,
            100.0 * x.loo_accuracy,
            x.centroid_low,
            x.centroid_high
        );
        if let Some(eps) = x.ridge {
            let _ = writeln!(s, "Ridge {eps:e} added to the pooled covariance.");
        }
    }

    if let Some(sw) = &r.stepwise {
        let t = &sw.trace;
        let _ = writeln!(s, "\nStepwise selection over emotion intensities ({} complete cases)", sw.n_complete_cases);
        for e in &t.events {
            let _ = writeln!(s, "step {}: {:?} {} F({}, {}) = {:.2}, p {}", e.step, e.action, e.variable, e.df1, e.df2, e.f, fmt_p(e.p));
        }
        if t.retained.is_empty() {
            let _ = writeln!(s, "No variable entered.");
        }
        for v in &t.retained {
            let _ = writeln!(s, "retained {}: sig. of F to remove {}", v.variable, fmt_p(v.sig_f_to_remove));
        }
    }

    if !r.warnings.is_empty() {
        let _ = writeln!(s, "\nWarnings:");
        for w in &r.warnings {
            let _ = writeln!(s, "- {w}");
        }
    }
    s
}

fn render_csv(r: &AnalysisReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "feature",
        "n_low",
        "n_high",
        "mean_low",
        "mean_high",
        "adjusted_mean_low",
        "adjusted_mean_high",
        "F",
        "df1",
        "df2",
        "p",
        "partial_eta_sq",
        "bh_q_supplementary",
        "significant",
    ])?;
    for row in &r.ancova {
        let a = &row.result;
        w.write_record([
            a.feature.clone(),
            a.n_low.to_string(),
            a.n_high.to_string(),
            format!("{:.2}", a.raw_mean_low),
            format!("{:.2}", a.raw_mean_high),
            format!("{:.2}", a.adjusted_mean_low),
            format!("{:.2}", a.adjusted_mean_high),
            format!("{:.2}", a.f),
            a.df1.to_string(),
            a.df2.to_string(),
            format!("{:.3}", a.p),
            format!("{:.3}", a.partial_eta_sq),
            format!("{:.3}", row.bh_q_supplementary),
            row.significant.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}
