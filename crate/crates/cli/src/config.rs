//! Run configuration: TOML schema, validation diagnostics and resolution.
//!
//! The file format is plain nested key-value TOML with a `schema_version`
//! key. Exactly one input section ([potential], [comb], [gaps] or [sweep])
//! per run; everything else has defaults. Command-line flags override the
//! file.

use std::path::PathBuf;

use serde::Deserialize;
use zs_core::norms::{PExp, Weight};
use zs_core::potential::PotentialSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: Option<u32>,
    pub mode: Option<String>,
    pub n_window: Option<u32>,
    pub tol: Option<f64>,
    pub scan_step: Option<f64>,
    pub p_list: Option<Vec<PItem>>,
    pub weights: Option<Vec<String>>,
    pub out_dir: Option<String>,
    pub potential: Option<PotentialSection>,
    pub comb: Option<CombSection>,
    pub gaps: Option<GapsSection>,
    pub sweep: Option<SweepSection>,
    pub profile: Option<ProfileSection>,
}

/// p_list entries: TOML floats (including `inf`) or the string "inf".
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PItem {
    Num(f64),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: String,
    pub a: Option<f64>,
    pub v1_cos: Option<Vec<f64>>,
    pub v1_sin: Option<Vec<f64>>,
    pub v2_cos: Option<Vec<f64>>,
    pub v2_sin: Option<Vec<f64>>,
    pub v1: Option<Vec<f64>>,
    pub v2: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    pub u: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsSection {
    pub intervals: Vec<[f64; 2]>,
    pub labels: Option<Vec<i64>>,
    pub u_star: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub nodes: Option<usize>,
    pub max_iter: Option<usize>,
    pub export: Option<bool>,
    pub enable: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    AnalyzePotential,
    AnalyzeComb,
    Audit,
    Sweep,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "analyze-potential" => Some(Mode::AnalyzePotential),
            "analyze-comb" => Some(Mode::AnalyzeComb),
            "audit" => Some(Mode::Audit),
            "sweep" => Some(Mode::Sweep),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::AnalyzePotential => "analyze-potential",
            Mode::AnalyzeComb => "analyze-comb",
            Mode::Audit => "audit",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub enum InputSpec {
    Potential(PotentialSpec),
    Comb { u: Vec<f64>, h: Vec<f64> },
    Gaps {
        gaps: Vec<(i64, f64, f64)>,
        u_star: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum SweepKind {
    Constant,
    FourierCos,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileCfg {
    pub nodes: usize,
    pub max_iter: usize,
    pub export: bool,
    pub enable: bool,
}

impl Default for ProfileCfg {
    fn default() -> Self {
        ProfileCfg {
            nodes: 64,
            max_iter: 200,
            export: true,
            enable: false,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_window: u32,
    pub tol: f64,
    pub scan_step: f64,
    pub p_list: Vec<PExp>,
    pub weights: Vec<Weight>,
    pub out_dir: PathBuf,
    pub input: InputSpec,
    pub sweep: Option<SweepSpec>,
    pub profile: ProfileCfg,
    pub spec_hash: String,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<String>,
    pub n_window: Option<u32>,
    pub tol: Option<f64>,
    pub p_list: Option<String>,
    pub weights: Option<String>,
    pub out: Option<PathBuf>,
}

/// Schema check without computation; returns one diagnostic per offense.
pub fn validate(raw: &RawConfig) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut push = |key: &str, message: String| {
        diags.push(Diagnostic {
            key: key.to_string(),
            message,
        })
    };

    match raw.schema_version {
        None => push("schema_version", "missing (expected 1)".into()),
        Some(v) if v != SCHEMA_VERSION => {
            push("schema_version", format!("unsupported version {v} (expected 1)"))
        }
        _ => {}
    }
    let mode = match &raw.mode {
        None => {
            push("mode", "missing (analyze-potential | analyze-comb | audit | sweep)".into());
            None
        }
        Some(m) => match Mode::parse(m) {
            None => {
                push("mode", format!("unknown mode {m:?}"));
                None
            }
            some => some,
        },
    };
    if let Some(n) = raw.n_window {
        if n < 1 {
            push("n_window", format!("must satisfy N ≥ 1, got {n}"));
        }
    }
    if let Some(t) = raw.tol {
        if !(t > 0.0 && t.is_finite()) {
            push("tol", format!("must be a positive finite number, got {t}"));
        }
    }
    if let Some(s) = raw.scan_step {
        if !(s > 0.0) || s > std::f64::consts::PI / 8.0 + 1e-12 {
            push("scan_step", format!("must lie in (0, π/8], got {s}"));
        }
    }
    if let Some(items) = &raw.p_list {
        if items.is_empty() {
            push("p_list", "must not be empty".into());
        }
        let mut seen = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match parse_p_item(item) {
                None => push(
                    &format!("p_list[{i}]"),
                    "expected a number ≥ 1 or \"inf\"".into(),
                ),
                Some(p) => {
                    if seen.contains(&p.label()) {
                        push(&format!("p_list[{i}]"), format!("duplicate exponent {}", p.label()));
                    }
                    seen.push(p.label());
                }
            }
        }
    }
    if let Some(ws) = &raw.weights {
        if ws.is_empty() {
            push("weights", "must not be empty".into());
        }
        let mut seen = Vec::new();
        for (i, w) in ws.iter().enumerate() {
            match Weight::parse(w) {
                None => push(
                    &format!("weights[{i}]"),
                    format!("unknown weight {w:?} (use \"1\" or \"1+|n|\")"),
                ),
                Some(parsed) => {
                    if seen.contains(&parsed) {
                        push(&format!("weights[{i}]"), format!("duplicate weight {w:?}"));
                    }
                    seen.push(parsed);
                }
            }
        }
    }

    let inputs = [
        raw.potential.is_some(),
        raw.comb.is_some(),
        raw.gaps.is_some(),
        raw.sweep.is_some(),
    ];
    let n_inputs = inputs.iter().filter(|&&b| b).count();
    if n_inputs != 1 {
        push(
            "input",
            format!("exactly one of [potential], [comb], [gaps], [sweep] is required, found {n_inputs}"),
        );
    }
    if let Some(m) = mode {
        match m {
            Mode::AnalyzePotential if raw.potential.is_none() => {
                push("potential", "required for mode analyze-potential".into())
            }
            Mode::AnalyzeComb if raw.comb.is_none() && raw.gaps.is_none() => {
                push("mode", "analyze-comb needs a [comb] or [gaps] section".into())
            }
            Mode::Sweep if raw.sweep.is_none() => push("sweep", "required for mode sweep".into()),
            Mode::Audit if raw.sweep.is_some() => {
                push("mode", "audit mode takes [potential], [comb] or [gaps], not [sweep]".into())
            }
            _ => {}
        }
    }

    if let Some(p) = &raw.potential {
        match p.kind.as_str() {
            "zero" => {}
            "constant" => {
                if p.a.is_none() {
                    push("potential.a", "required for kind = \"constant\"".into());
                }
            }
            "fourier" => {
                let any = p.v1_cos.is_some()
                    || p.v1_sin.is_some()
                    || p.v2_cos.is_some()
                    || p.v2_sin.is_some();
                if !any {
                    push(
                        "potential",
                        "fourier kind needs at least one of v1_cos/v1_sin/v2_cos/v2_sin".into(),
                    );
                }
            }
            "sampled" => {
                match (&p.v1, &p.v2) {
                    (Some(v1), Some(v2)) => {
                        if v1.len() < 2 {
                            push("potential.v1", "sampled grids need ≥ 2 nodes".into());
                        }
                        if v2.len() < 2 {
                            push("potential.v2", "sampled grids need ≥ 2 nodes".into());
                        }
                    }
                    _ => push("potential", "sampled kind needs v1 and v2 arrays".into()),
                }
            }
            other => push("potential.kind", format!("unknown kind {other:?}")),
        }
    }
    if let Some(c) = &raw.comb {
        if c.u.len() != c.h.len() {
            push("comb", format!("u has {} entries, h has {}", c.u.len(), c.h.len()));
        }
        for i in 1..c.u.len() {
            if c.u[i - 1] >= c.u[i] {
                push(&format!("comb.u[{i}]"), "abscissas must be strictly increasing".into());
            }
        }
        for (i, h) in c.h.iter().enumerate() {
            if !(*h >= 0.0) || !h.is_finite() {
                push(&format!("comb.h[{i}]"), "heights must be finite and ≥ 0".into());
            }
        }
    }
    if let Some(g) = &raw.gaps {
        if g.intervals.is_empty() {
            push("gaps.intervals", "must not be empty".into());
        }
        for (i, iv) in g.intervals.iter().enumerate() {
            if !(iv[0] < iv[1]) {
                push(&format!("gaps.intervals[{i}]"), "interval must satisfy a < b".into());
            }
            if i > 0 && g.intervals[i - 1][1] >= iv[0] {
                push(
                    &format!("gaps.intervals[{i}]"),
                    "intervals must be disjoint and ordered".into(),
                );
            }
        }
        if let Some(labels) = &g.labels {
            if labels.len() != g.intervals.len() {
                push("gaps.labels", "length must match intervals".into());
            }
        }
        if let Some(u) = g.u_star {
            if !(u > 0.0) {
                push("gaps.u_star", format!("must be positive, got {u}"));
            }
        }
    }
    if let Some(s) = &raw.sweep {
        if !matches!(s.kind.as_str(), "constant" | "fourier-cos") {
            push("sweep.kind", format!("unknown kind {:?} (use constant | fourier-cos)", s.kind));
        }
        if s.values.is_empty() {
            push("sweep.values", "must not be empty".into());
        }
        for (i, v) in s.values.iter().enumerate() {
            if !v.is_finite() {
                push(&format!("sweep.values[{i}]"), "must be finite".into());
            }
        }
    }
    if let Some(pr) = &raw.profile {
        if let Some(n) = pr.nodes {
            if n < 8 {
                push("profile.nodes", format!("needs ≥ 8 nodes, got {n}"));
            }
        }
        if let Some(m) = pr.max_iter {
            if m == 0 {
                push("profile.max_iter", "must be ≥ 1".into());
            }
        }
    }
    diags
}

fn parse_p_item(item: &PItem) -> Option<PExp> {
    match item {
        PItem::Num(v) if v.is_infinite() && *v > 0.0 => Some(PExp::Infinity),
        PItem::Num(v) if *v >= 1.0 && v.is_finite() => Some(PExp::Finite(*v)),
        PItem::Num(_) => None,
        PItem::Name(s) => PExp::parse(s),
    }
}

/// Apply overrides and produce the resolved configuration. Call only after
/// `validate` returned no diagnostics; override errors are reported the same
/// way.
pub fn resolve(raw: &RawConfig, over: &Overrides) -> Result<RunConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    let mode_str = over.mode.clone().or_else(|| raw.mode.clone()).unwrap_or_default();
    let mode = Mode::parse(&mode_str).unwrap_or(Mode::Audit);
    if Mode::parse(&mode_str).is_none() {
        diags.push(Diagnostic {
            key: "mode".into(),
            message: format!("unknown mode {mode_str:?}"),
        });
    }
    let n_window = over.n_window.or(raw.n_window).unwrap_or(8);
    let tol = over.tol.or(raw.tol).unwrap_or(1e-10);
    let scan_step = raw.scan_step.unwrap_or(std::f64::consts::PI / 8.0);

    let p_list: Vec<PExp> = match &over.p_list {
        Some(s) => {
            let mut out = Vec::new();
            for tok in s.split(',') {
                match PExp::parse(tok) {
                    Some(p) => out.push(p),
                    None => diags.push(Diagnostic {
                        key: "--p-list".into(),
                        message: format!("bad token {tok:?}"),
                    }),
                }
            }
            out
        }
        None => match &raw.p_list {
            Some(items) => items.iter().filter_map(parse_p_item).collect(),
            None => zs_core::audit::default_p_list(),
        },
    };
    let weights: Vec<Weight> = match &over.weights {
        Some(s) => {
            let mut out = Vec::new();
            for tok in s.split(',') {
                match Weight::parse(tok) {
                    Some(w) => out.push(w),
                    None => diags.push(Diagnostic {
                        key: "--weights".into(),
                        message: format!("bad token {tok:?}"),
                    }),
                }
            }
            out
        }
        None => match &raw.weights {
            Some(ws) => ws.iter().filter_map(|w| Weight::parse(w)).collect(),
            None => zs_core::audit::default_weights(),
        },
    };

    let out_dir = over
        .out
        .clone()
        .or_else(|| raw.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("ZS_AUDIT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("zs-audit-out"));

    let input = if let Some(p) = &raw.potential {
        match potential_spec(p) {
            Ok(spec) => InputSpec::Potential(spec),
            Err(d) => {
                diags.push(d);
                InputSpec::Potential(PotentialSpec::Zero)
            }
        }
    } else if let Some(c) = &raw.comb {
        InputSpec::Comb {
            u: c.u.clone(),
            h: c.h.clone(),
        }
    } else if let Some(g) = &raw.gaps {
        let labels: Vec<i64> = g
            .labels
            .clone()
            .unwrap_or_else(|| (0..g.intervals.len() as i64).collect());
        InputSpec::Gaps {
            gaps: labels
                .iter()
                .zip(g.intervals.iter())
                .map(|(&l, iv)| (l, iv[0], iv[1]))
                .collect(),
            u_star: g.u_star,
        }
    } else if let Some(s) = &raw.sweep {
        // The sweep instantiates potentials per value; carry a placeholder.
        let _ = s;
        InputSpec::Potential(PotentialSpec::Zero)
    } else {
        diags.push(Diagnostic {
            key: "input".into(),
            message: "no input section".into(),
        });
        InputSpec::Potential(PotentialSpec::Zero)
    };

    let sweep = raw.sweep.as_ref().map(|s| SweepSpec {
        kind: match s.kind.as_str() {
            "fourier-cos" => SweepKind::FourierCos,
            _ => SweepKind::Constant,
        },
        values: s.values.clone(),
    });

    let dp = ProfileCfg::default();
    let profile = raw
        .profile
        .map(|p| ProfileCfg {
            nodes: p.nodes.unwrap_or(dp.nodes),
            max_iter: p.max_iter.unwrap_or(dp.max_iter),
            export: p.export.unwrap_or(dp.export),
            enable: p.enable.unwrap_or(dp.enable),
        })
        .unwrap_or(dp);

    if !diags.is_empty() {
        return Err(diags);
    }
    let spec_hash = hash_input(&input, &sweep, n_window, tol);
    Ok(RunConfig {
        mode,
        n_window,
        tol,
        scan_step,
        p_list,
        weights,
        out_dir,
        input,
        sweep,
        profile,
        spec_hash,
    })
}

fn potential_spec(p: &PotentialSection) -> Result<PotentialSpec, Diagnostic> {
    let spec = match p.kind.as_str() {
        "zero" => PotentialSpec::Zero,
        "constant" => PotentialSpec::ConstantOffDiagonal {
            a: p.a.ok_or(Diagnostic {
                key: "potential.a".into(),
                message: "required for kind = \"constant\"".into(),
            })?,
        },
        "fourier" => PotentialSpec::Fourier {
            v1_cos: p.v1_cos.clone().unwrap_or_default(),
            v1_sin: p.v1_sin.clone().unwrap_or_default(),
            v2_cos: p.v2_cos.clone().unwrap_or_default(),
            v2_sin: p.v2_sin.clone().unwrap_or_default(),
        },
        "sampled" => PotentialSpec::Sampled {
            v1: p.v1.clone().unwrap_or_default(),
            v2: p.v2.clone().unwrap_or_default(),
        },
        other => {
            return Err(Diagnostic {
                key: "potential.kind".into(),
                message: format!("unknown kind {other:?}"),
            })
        }
    };
    spec.validate().map_err(|e| Diagnostic {
        key: "potential".into(),
        message: e.to_string(),
    })?;
    Ok(spec)
}

/// FNV-1a fingerprint of the canonical input description; provenance only.
pub fn hash_input(input: &InputSpec, sweep: &Option<SweepSpec>, n_window: u32, tol: f64) -> String {
    let canonical = match input {
        InputSpec::Potential(p) => format!("potential:{}", serde_json::to_string(p).unwrap()),
        InputSpec::Comb { u, h } => format!("comb:{u:?}:{h:?}"),
        InputSpec::Gaps { gaps, u_star } => format!("gaps:{gaps:?}:{u_star:?}"),
    };
    let sweep_part = match sweep {
        Some(s) => format!(
            "sweep:{}:{:?}",
            match s.kind {
                SweepKind::Constant => "constant",
                SweepKind::FourierCos => "fourier-cos",
            },
            s.values
        ),
        None => String::new(),
    };
    let text = format!("{canonical}|{sweep_part}|N={n_window}|tol={tol}");
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
