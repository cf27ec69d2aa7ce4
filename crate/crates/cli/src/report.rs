//! Deterministic artifact serialization: CSV and JSON writers.
//!
//! Floats print as the shortest decimal that round-trips (std formatting),
//! so identical runs produce byte-identical files. Field orders are fixed by
//! struct definitions and by the construction order of audit entries; no
//! hash maps are serialized. JSON uses serde_json, which encodes non-finite
//! floats as null (only the margins of vacuous bounds are affected).

use serde::Serialize;
use zs_core::audit::AuditReport;
use zs_core::bands::SpectralSummary;
use zs_core::profile::GapProfile;
use zs_core::quasimomentum::MomentSummary;

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

pub fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-gap spectral summary rows.
pub fn summary_csv(s: &SpectralSummary) -> String {
    let mut out = String::from(
        "n,z_minus,z_plus,z_crit,h,gap_len,a,j,mu_plus,mu_minus,e_charge,d_moment\n",
    );
    for gap in &s.gaps {
        let rec = s.actions.iter().find(|r| r.n == gap.n);
        let (a, j, mp, mm, e, d) = match rec {
            Some(r) => (r.action, r.j, r.mu_plus, r.mu_minus, r.e_charge, r.d_moment),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            gap.n,
            fmt_float(gap.z_minus),
            fmt_float(gap.z_plus),
            fmt_float(gap.z_crit),
            fmt_float(gap.h),
            fmt_float(gap.gap_len()),
            fmt_float(a),
            fmt_float(j),
            fmt_float(mp),
            fmt_float(mm),
            fmt_float(e),
            fmt_float(d),
        ));
    }
    out
}

#[derive(Serialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub input_kind: &'static str,
    pub spec_hash: String,
    pub mode: &'static str,
    pub n_window: u32,
    pub tol: f64,
}

#[derive(Serialize)]
pub struct SummaryJson<'a> {
    pub provenance: &'a Provenance,
    pub n0_asymptotic: Option<u32>,
    pub tail_height: f64,
    pub u_star: f64,
    pub s_min_band: Option<f64>,
    pub moments: Option<&'a MomentSummary>,
    pub mass_fits_reliable: bool,
}

pub fn summary_json(prov: &Provenance, s: &SpectralSummary) -> String {
    let doc = SummaryJson {
        provenance: prov,
        n0_asymptotic: s.n0_asymptotic,
        tail_height: s.tail_height,
        u_star: std::f64::consts::PI,
        s_min_band: s.min_band_len(),
        moments: s.moments.as_ref(),
        mass_fits_reliable: s.actions.iter().all(|r| r.mu_reliable),
    };
    serde_json::to_string_pretty(&doc).expect("summary serialization") + "\n"
}

#[derive(Serialize)]
struct AuditJson<'a> {
    provenance: &'a Provenance,
    all_pass: bool,
    report: &'a AuditReport,
}

pub fn audit_json(prov: &Provenance, report: &AuditReport) -> String {
    let doc = AuditJson {
        provenance: prov,
        all_pass: report.all_pass,
        report,
    };
    serde_json::to_string_pretty(&doc).expect("audit serialization") + "\n"
}

/// One row per link; not-applicable entries keep a single row with the
/// reason in the desc column.
pub fn audit_csv(report: &AuditReport) -> String {
    let mut out = String::from(
        "id,p,weight,applicable,pass,link,desc,lhs,rhs,margin,n_window,tail_height\n",
    );
    for e in &report.entries {
        let p = e.p.clone().unwrap_or_else(|| "-".into());
        let w = e.weight.unwrap_or("-");
        let window = e
            .window
            .map(|n| n.to_string())
            .unwrap_or_else(|| "-".into());
        if !e.applicable {
            out.push_str(&format!(
                "{},{},{},false,-,-,{},-,-,-,{},{}\n",
                csv_escape(&e.id),
                p,
                csv_escape(w),
                csv_escape(e.reason.as_deref().unwrap_or("")),
                window,
                fmt_float(e.tail_height),
            ));
            continue;
        }
        for (i, link) in e.links.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},true,{},{},{},{},{},{},{},{}\n",
                csv_escape(&e.id),
                p,
                csv_escape(w),
                link.pass,
                i,
                csv_escape(&link.desc),
                fmt_float(link.lhs),
                fmt_float(link.rhs),
                fmt_float(link.margin),
                window,
                fmt_float(e.tail_height),
            ));
        }
    }
    out
}

/// Profile summary rows (per gap).
pub fn profile_summary_csv(p: &GapProfile) -> String {
    let mut out = String::from(
        "n,z_minus,z_plus,z_crit,h,gap_len,a,j,mu_plus,mu_minus,y_minus,y_plus,y_max\n",
    );
    for g in &p.gaps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            g.label,
            fmt_float(g.z_minus),
            fmt_float(g.z_plus),
            fmt_float(g.z_crit),
            fmt_float(g.h),
            fmt_float(g.z_plus - g.z_minus),
            fmt_float(g.action),
            fmt_float(g.action.max(0.0).sqrt()),
            fmt_float(g.mu_plus),
            fmt_float(g.mu_minus),
            fmt_float(g.ratio_minus - 1.0),
            fmt_float(g.ratio_plus - 1.0),
            fmt_float(g.y_max),
        ));
    }
    out
}

#[derive(Serialize)]
pub struct ProfileJson<'a> {
    pub provenance: &'a Provenance,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub q0: f64,
    pub i_d: f64,
    pub s_min_band: Option<f64>,
    pub u_star: Option<f64>,
}

/// Plot-ready (x, v(x)) rows for one gap: endpoints plus Chebyshev nodes in
/// ascending x.
pub fn profile_gap_csv(p: &GapProfile, idx: usize) -> String {
    let g = &p.gaps[idx];
    let mut xs: Vec<f64> = g.nodes.clone();
    xs.push(g.z_minus);
    xs.push(g.z_plus);
    xs.sort_by(f64::total_cmp);
    let mut out = String::from("x,v\n");
    for x in xs {
        let v = if x <= g.z_minus || x >= g.z_plus {
            0.0
        } else {
            p.v_at(idx, x)
        };
        out.push_str(&format!("{},{}\n", fmt_float(x), fmt_float(v)));
    }
    out
}

/// Comb rows with the greedy selection.
pub fn comb_csv(u: &[f64], h: &[f64], h_selected: &[f64]) -> String {
    let mut out = String::from("index,u,h,h_selected\n");
    for (i, ((uu, hh), sel)) in u.iter().zip(h.iter()).zip(h_selected.iter()).enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            fmt_float(*uu),
            fmt_float(*hh),
            fmt_float(*sel)
        ));
    }
    out
}

#[derive(Serialize)]
pub struct CombJson<'a> {
    pub provenance: &'a Provenance,
    pub u_star: Option<f64>,
    pub l2_sq: f64,
    pub greedy_l2_sq: f64,
    pub single_slit_q0: Option<f64>,
}

/// Aggregate sweep table.
pub fn sweep_csv(rows: &[(f64, bool, f64, String)]) -> String {
    let mut out = String::from("value,all_pass,worst_margin,worst_id\n");
    for (v, pass, margin, id) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(*v),
            pass,
            fmt_float(*margin),
            csv_escape(id)
        ));
    }
    out
}
