//! Pipeline execution and artifact writing for each run mode.

use std::fs;
use std::path::Path;

use thiserror::Error;

use zs_core::audit::{audit_comb, audit_zs, AuditInput, AuditReport};
use zs_core::bands::{compute_heights, find_band_edges, BandError, BandOptions, SpectralSummary};
use zs_core::comb::{greedy_select, Comb, CombError, CombSlit};
use zs_core::potential::PotentialSpec;
use zs_core::profile::{solve_gap_profile, GapConfiguration, GapProfile, ProfileError, ProfileOptions};
use zs_core::quasimomentum::{compute_actions, QuasiError};

use crate::config::{InputSpec, Mode, ProfileCfg, RunConfig, SweepKind};
use crate::report;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("band structure: {0}")]
    Band(#[from] BandError),
    #[error("quasimomentum: {0}")]
    Quasi(#[from] QuasiError),
    #[error("gap profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("comb input: {0}")]
    Comb(#[from] CombError),
    #[error("configuration: {0}")]
    Config(String),
}

/// Exit-status outcome: all requested audits pass, or at least one failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    AuditFailed,
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn pipeline_potential(
    pot: &PotentialSpec,
    n_window: u32,
    tol: f64,
    scan_step: f64,
) -> Result<SpectralSummary, RunError> {
    let opts = BandOptions {
        scan_step,
        ..BandOptions::default()
    };
    let s = find_band_edges(pot, n_window, tol, &opts)?;
    let s = compute_heights(s, pot, tol)?;
    Ok(compute_actions(s, pot, tol)?)
}

fn profile_of_summary(
    s: &SpectralSummary,
    cfg: &ProfileCfg,
    tol: f64,
) -> Result<Option<GapProfile>, RunError> {
    let gaps: Vec<(i64, f64, f64)> = s
        .gaps
        .iter()
        .filter(|g| !g.is_closed)
        .map(|g| (g.n, g.z_minus, g.z_plus))
        .collect();
    if gaps.is_empty() {
        return Ok(None);
    }
    let config = GapConfiguration::new(gaps)?;
    let profile = solve_gap_profile(
        &config,
        &ProfileOptions {
            nodes: cfg.nodes,
            tol,
            max_iter: cfg.max_iter,
        },
    )?;
    Ok(Some(profile))
}

/// Align per-open-gap profile data with the full summary window.
fn enrich_with_profile(input: &mut AuditInput, s: &SpectralSummary, profile: &GapProfile) {
    let mut y_max = vec![0.0; s.gaps.len()];
    for pg in &profile.gaps {
        if let Some(pos) = s.gaps.iter().position(|g| g.n == pg.label) {
            y_max[pos] = pg.y_max;
        }
    }
    input.y_max = Some(y_max);
}

fn run_audits(input: &AuditInput, cfg: &RunConfig) -> AuditReport {
    audit_zs(input, &cfg.p_list, &cfg.weights).merged(audit_comb(input, &cfg.p_list, &cfg.weights))
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cfg.mode {
        Mode::AnalyzePotential => analyze_potential(cfg),
        Mode::AnalyzeComb => analyze_comb(cfg),
        Mode::Audit => audit(cfg),
        Mode::Sweep => sweep(cfg),
    }
}

fn provenance(cfg: &RunConfig, kind: &'static str) -> report::Provenance {
    report::Provenance {
        schema_version: crate::config::SCHEMA_VERSION,
        input_kind: kind,
        spec_hash: cfg.spec_hash.clone(),
        mode: cfg.mode.label(),
        n_window: cfg.n_window,
        tol: cfg.tol,
    }
}

fn analyze_potential(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let pot = match &cfg.input {
        InputSpec::Potential(p) => p,
        _ => return Err(RunError::Config("analyze-potential needs a [potential] input".into())),
    };
    let summary = pipeline_potential(pot, cfg.n_window, cfg.tol, cfg.scan_step)?;
    let prov = provenance(cfg, "potential");
    write(&cfg.out_dir.join("summary.csv"), &report::summary_csv(&summary))?;
    write(&cfg.out_dir.join("summary.json"), &report::summary_json(&prov, &summary))?;
    Ok(Outcome::Pass)
}

fn analyze_comb(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match &cfg.input {
        InputSpec::Comb { u, h } => {
            let (_, artifacts) = comb_artifacts(cfg, u, h)?;
            let _ = artifacts;
            Ok(Outcome::Pass)
        }
        InputSpec::Gaps { gaps, u_star } => {
            let profile = gaps_profile(cfg, gaps)?;
            write_profile_artifacts(cfg, &profile, *u_star)?;
            Ok(Outcome::Pass)
        }
        InputSpec::Potential(_) => {
            Err(RunError::Config("analyze-comb needs a [comb] or [gaps] input".into()))
        }
    }
}

fn comb_artifacts(cfg: &RunConfig, u: &[f64], h: &[f64]) -> Result<(Comb, AuditInput), RunError> {
    let comb = Comb::new(
        u.iter()
            .zip(h.iter())
            .map(|(&u, &h)| CombSlit { u, h })
            .collect(),
    )?;
    let selected = greedy_select(&comb);
    let prov = provenance(cfg, "comb");
    write(
        &cfg.out_dir.join("comb.csv"),
        &report::comb_csv(u, h, &selected.heights()),
    )?;
    let doc = report::CombJson {
        provenance: &prov,
        u_star: comb.u_star(),
        l2_sq: comb.l2_sq(),
        greedy_l2_sq: selected.l2_sq(),
        single_slit_q0: comb.single_slit_q0(),
    };
    write(
        &cfg.out_dir.join("comb.json"),
        &(serde_json::to_string_pretty(&doc).expect("comb json") + "\n"),
    )?;
    let input = AuditInput::from_comb(&comb);
    Ok((comb, input))
}

fn gaps_profile(cfg: &RunConfig, gaps: &[(i64, f64, f64)]) -> Result<GapProfile, RunError> {
    let config = GapConfiguration::new(gaps.to_vec())?;
    Ok(solve_gap_profile(
        &config,
        &ProfileOptions {
            nodes: cfg.profile.nodes,
            tol: cfg.tol,
            max_iter: cfg.profile.max_iter,
        },
    )?)
}

fn write_profile_artifacts(
    cfg: &RunConfig,
    profile: &GapProfile,
    u_star: Option<f64>,
) -> Result<(), RunError> {
    let prov = provenance(cfg, "gaps");
    write(
        &cfg.out_dir.join("profile_summary.csv"),
        &report::profile_summary_csv(profile),
    )?;
    let doc = report::ProfileJson {
        provenance: &prov,
        iterations: profile.iterations,
        residual: profile.residual,
        converged: profile.converged,
        q0: profile.q0,
        i_d: profile.i_d,
        s_min_band: profile.s_min_band,
        u_star,
    };
    write(
        &cfg.out_dir.join("profile.json"),
        &(serde_json::to_string_pretty(&doc).expect("profile json") + "\n"),
    )?;
    if cfg.profile.export {
        for (idx, g) in profile.gaps.iter().enumerate() {
            write(
                &cfg.out_dir.join(format!("profile_gap_{}.csv", g.label)),
                &report::profile_gap_csv(profile, idx),
            )?;
        }
    }
    Ok(())
}

fn audit(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let (kind, report_doc) = match &cfg.input {
        InputSpec::Potential(pot) => {
            let summary = pipeline_potential(pot, cfg.n_window, cfg.tol, cfg.scan_step)?;
            let prov = provenance(cfg, "potential");
            write(&cfg.out_dir.join("summary.csv"), &report::summary_csv(&summary))?;
            write(&cfg.out_dir.join("summary.json"), &report::summary_json(&prov, &summary))?;
            let mut input = AuditInput::from_summary(&summary);
            if cfg.profile.enable {
                if let Some(profile) = profile_of_summary(&summary, &cfg.profile, cfg.tol)? {
                    enrich_with_profile(&mut input, &summary, &profile);
                    write_profile_artifacts(cfg, &profile, Some(std::f64::consts::PI))?;
                }
            }
            ("potential", run_audits(&input, cfg))
        }
        InputSpec::Gaps { gaps, u_star } => {
            let profile = gaps_profile(cfg, gaps)?;
            write_profile_artifacts(cfg, &profile, *u_star)?;
            let input = AuditInput::from_profile(&profile, *u_star);
            ("gaps", run_audits(&input, cfg))
        }
        InputSpec::Comb { u, h } => {
            let (_, input) = comb_artifacts(cfg, u, h)?;
            ("comb", run_audits(&input, cfg))
        }
    };
    let prov = provenance(cfg, kind);
    write(&cfg.out_dir.join("audit.json"), &report::audit_json(&prov, &report_doc))?;
    write(&cfg.out_dir.join("audit.csv"), &report::audit_csv(&report_doc))?;
    Ok(if report_doc.all_pass {
        Outcome::Pass
    } else {
        Outcome::AuditFailed
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Config("sweep mode needs a [sweep] section".into()))?;
    let mut rows: Vec<(f64, bool, f64, String)> = Vec::new();
    let mut all_pass = true;
    for (i, &value) in sweep.values.iter().enumerate() {
        let pot = match sweep.kind {
            SweepKind::Constant => PotentialSpec::ConstantOffDiagonal { a: value },
            SweepKind::FourierCos => PotentialSpec::Fourier {
                v1_cos: vec![],
                v1_sin: vec![],
                v2_cos: vec![0.0, value],
                v2_sin: vec![],
            },
        };
        let input = InputSpec::Potential(pot);
        let sub = RunConfig {
            mode: Mode::Audit,
            out_dir: cfg.out_dir.join(format!("sweep_{i:03}")),
            spec_hash: crate::config::hash_input(&input, &None, cfg.n_window, cfg.tol),
            input,
            sweep: None,
            ..cfg.clone()
        };
        let outcome = audit(&sub)?;
        // Re-read the worst margin from the sub-run for the aggregate table.
        let report_text = fs::read_to_string(sub.out_dir.join("audit.json")).map_err(|source| {
            RunError::Io {
                path: sub.out_dir.join("audit.json").display().to_string(),
                source,
            }
        })?;
        let parsed: serde_json::Value = serde_json::from_str(&report_text).unwrap_or_default();
        let (worst_margin, worst_id) = worst_entry(&parsed);
        let pass = outcome == Outcome::Pass;
        all_pass &= pass;
        rows.push((value, pass, worst_margin, worst_id));
    }
    write(&cfg.out_dir.join("sweep_summary.csv"), &report::sweep_csv(&rows))?;
    Ok(if all_pass {
        Outcome::Pass
    } else {
        Outcome::AuditFailed
    })
}

fn worst_entry(doc: &serde_json::Value) -> (f64, String) {
    let mut worst = f64::INFINITY;
    let mut worst_id = String::from("-");
    if let Some(entries) = doc
        .get("report")
        .and_then(|r| r.get("entries"))
        .and_then(|e| e.as_array())
    {
        for e in entries {
            let applicable = e.get("applicable").and_then(|v| v.as_bool()).unwrap_or(false);
            if !applicable {
                continue;
            }
            let margin = e.get("margin").and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY);
            if margin < worst {
                worst = margin;
                worst_id = e
                    .get("id")
                    .and_then(|v| v.as_str())
                    .unwrap_or("-")
                    .to_string();
            }
        }
    }
    (worst, worst_id)
}
