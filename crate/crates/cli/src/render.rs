//! Text, JSON and CSV renderings of the command results.

use std::fmt::Write;

use serde::Serialize;

use cvdist::mcoracle::{ComparisonReport, McValidation};
use cvdist::protocols::{ProtocolReport, RecoveryReport, SweepRow, SweepTable};
use cvdist::symcore::{SeparabilityVerdict, VerdictStatus, WitnessKind};
use cvdist::{CovarianceMatrix, GainMatrix, ProtocolParams};

/// Six significant digits.
pub fn sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

pub fn csv_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize to CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
}

fn status(s: VerdictStatus) -> &'static str {
    match s {
        VerdictStatus::Separable => "separable",
        VerdictStatus::Entangled => "entangled",
        VerdictStatus::Boundary => "boundary",
    }
}

fn verdict_line(v: &SeparabilityVerdict) -> String {
    let kind = match v.kind {
        WitnessKind::LowestPtEigenvalue => "lowest PT eigenvalue",
        WitnessKind::Sigma => "Sigma",
    };
    format!(
        "{:<7} {:<21} {:>12}  {}",
        v.bipartition,
        kind,
        sig(v.witness),
        status(v.status)
    )
}

fn cm_block(out: &mut String, cm: &CovarianceMatrix) {
    for row in cm.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>12}", sig(*v))).collect();
        let _ = writeln!(out, "    {}", cells.join(" "));
    }
}

fn params_line(p: &ProtocolParams) -> String {
    format!(
        "e2t = {}  t = {}  squeezing = {} dB  x = {} ({}, x_sep = {})  excess = {}",
        sig(p.squeezing.e2t()),
        sig(p.squeezing.t()),
        sig(p.squeezing.db()),
        sig(p.x()),
        p.noise,
        sig(p.x_sep()),
        sig(p.excess)
    )
}

fn gain_text(g: &GainMatrix) -> String {
    let m = g.matrix();
    format!(
        "[[{}, {}], [{}, {}]]",
        sig(m[(0, 0)]),
        sig(m[(0, 1)]),
        sig(m[(1, 0)]),
        sig(m[(1, 1)])
    )
}

pub fn improved_text(r: &ProtocolReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "three-step protocol  {}", params_line(&r.params));
    let c = &r.certificate;
    let _ = writeln!(
        out,
        "construction: product input {}, noise PSD {} (min eigenvalue {})",
        c.product_input,
        c.noise_psd,
        sig(c.noise_min_eigenvalue)
    );
    for step in &r.steps {
        let _ = writeln!(out, "\nstep {}: {}", step.step, step.name);
        cm_block(&mut out, &step.cm);
        for v in r.verdicts.iter().filter(|v| v.step == step.step) {
            let _ = writeln!(out, "  {}", verdict_line(&v.verdict));
        }
    }
    let e = &r.entanglement;
    let _ = writeln!(out, "\nentanglement");
    let closed = |v: Option<f64>| {
        v.map(|c| format!(" (closed form {})", sig(c)))
            .unwrap_or_default()
    };
    let _ = writeln!(
        out,
        "  tau3            {}{}",
        sig(e.tau3),
        closed(e.tau3_closed)
    );
    let _ = writeln!(
        out,
        "  omega3          {}{}",
        sig(e.omega3),
        closed(e.omega3_closed)
    );
    let _ = writeln!(out, "  sigma           {}", sig(e.sigma));
    let _ = writeln!(out, "  kappa           {}", sig(e.kappa));
    let _ = writeln!(out, "  det(AB)         {}", sig(e.det_ab));
    let _ = writeln!(out, "  nu              {}", sig(e.nu));
    let _ = writeln!(out, "  log_negativity  {} ebits", sig(e.log_negativity));
    let _ = writeln!(out, "  {}", verdict_line(&e.verdict));
    let _ = writeln!(out, "  carrier separable: {}", r.carrier_separable);
    for f in &r.flags {
        let _ = writeln!(out, "  flag: {f}");
    }
    if let Some(rec) = &r.recovery {
        let _ = writeln!(out);
        out.push_str(&recovery_text(rec));
    }
    out
}

pub fn recovery_text(r: &RecoveryReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gain recovery  {}", params_line(&r.params));
    let _ = writeln!(out, "  gain            {}", gain_text(&r.gain));
    let _ = writeln!(out, "  recovered CM (A'', C'')");
    cm_block(&mut out, &r.cm);
    let _ = writeln!(out, "  nu_ac           {}", sig(r.nu_ac));
    let _ = writeln!(out, "  log_negativity  {} ebits", sig(r.log_negativity));
    let _ = writeln!(out, "  purity det      {}", sig(r.purity_det));
    let _ = writeln!(out, "  {}", verdict_line(&r.verdict));
    out
}

#[derive(Serialize)]
pub struct RecoveryRow {
    pub e2t: f64,
    pub x: f64,
    pub excess: f64,
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
    pub nu_ac: f64,
    pub log_negativity: f64,
    pub purity_det: f64,
}

impl From<&RecoveryReport> for RecoveryRow {
    fn from(r: &RecoveryReport) -> Self {
        let g = r.gain.matrix();
        Self {
            e2t: r.params.squeezing.e2t(),
            x: r.params.x(),
            excess: r.params.excess,
            g11: g[(0, 0)],
            g12: g[(0, 1)],
            g21: g[(1, 0)],
            g22: g[(1, 1)],
            nu_ac: r.nu_ac,
            log_negativity: r.log_negativity,
            purity_det: r.purity_det,
        }
    }
}

pub fn sweep_row(r: &ProtocolReport) -> SweepRow {
    SweepRow {
        e2t: r.params.squeezing.e2t(),
        x: r.params.x(),
        tau3: r.entanglement.tau3,
        omega3: r.entanglement.omega3,
        sigma: r.entanglement.sigma,
        nu: r.entanglement.nu,
        log_negativity: r.entanglement.log_negativity,
    }
}

pub fn sweep_text(t: &SweepTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "e2t", "x", "tau3", "omega3", "sigma", "nu", "E_N"
    );
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
            sig(r.e2t),
            sig(r.x),
            sig(r.tau3),
            sig(r.omega3),
            sig(r.sigma),
            sig(r.nu),
            sig(r.log_negativity)
        );
    }
    let _ = writeln!(
        out,
        "nu strictly decreasing: {}  |nu_last - 1/3| = {}",
        t.nu_strictly_decreasing,
        sig(t.asymptote_gap)
    );
    out
}

#[derive(Serialize)]
pub struct McEntryRow {
    pub matrix: &'static str,
    pub row: usize,
    pub col: usize,
    pub estimate: f64,
    pub reference: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

pub fn mc_rows(v: &McValidation) -> Vec<McEntryRow> {
    let mut rows = Vec::new();
    for (name, report) in [("gamma3", &v.gamma3_check), ("recovery", &v.recovery_check)] {
        for e in &report.entries {
            rows.push(McEntryRow {
                matrix: name,
                row: e.row,
                col: e.col,
                estimate: e.estimate,
                reference: e.reference,
                std_error: e.std_error,
                z: e.z,
                pass: e.pass,
            });
        }
    }
    rows
}

fn comparison_text(out: &mut String, name: &str, c: &ComparisonReport) {
    let _ = writeln!(
        out,
        "{name}: {} entries, {} flagged, max z = {}  {}",
        c.entries.len(),
        c.flagged,
        sig(c.max_z),
        if c.pass { "PASS" } else { "FAIL" }
    );
    for e in c.flagged_entries() {
        let _ = writeln!(
            out,
            "  ({}, {}) estimate {} reference {} se {} z {}",
            e.row,
            e.col,
            sig(e.estimate),
            sig(e.reference),
            sig(e.std_error),
            sig(e.z)
        );
    }
}

pub fn mc_text(v: &McValidation, criterion: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Monte Carlo validation  {}", params_line(&v.params));
    let _ = writeln!(
        out,
        "samples = {}  seed = {}  gain = {}",
        v.samples,
        v.estimate.seed,
        gain_text(&v.estimate.gain)
    );
    let _ = writeln!(out, "criterion: {criterion}");
    comparison_text(&mut out, "gamma3", &v.gamma3_check);
    comparison_text(&mut out, "recovery", &v.recovery_check);
    let _ = writeln!(
        out,
        "nu_ab estimate {}  analytic {}",
        sig(v.estimate.nu_ab),
        sig(v.nu_ab_reference)
    );
    let _ = writeln!(
        out,
        "nu_ac estimate {}  analytic {}",
        sig(v.estimate.nu_ac),
        sig(v.nu_ac_reference)
    );
    let _ = writeln!(out, "{}", if v.pass { "PASS" } else { "FAIL" });
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub row: &'static str,
    pub quantity: &'static str,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn table_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<16} {:>12} {:>12} {:>10}  result",
        "row", "quantity", "expected", "computed", "tolerance"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:>12} {:>12} {:>10}  {}",
            r.row,
            r.quantity,
            sig(r.expected),
            sig(r.computed),
            format!("{:.0e}", r.tolerance),
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}
