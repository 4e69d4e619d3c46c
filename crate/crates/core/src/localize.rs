//! Detection and localization driver, and the report it produces.

use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faultmodel::{enumerate_candidates, instrument, Candidate, SiteKind};
use crate::frontend::{load, FrontendError, FunctionDef};
use crate::logic::{build_query, Formula, UnknownReason, Valuation, Verdict, Var};
use crate::normalizer::{normalize, NormProgram, SourceMap, SourceMapError};
use crate::solvers::{decide_with_hints, SolverConfig, SolverError};
use crate::span::SourceFile;
use crate::vcgen::{gen_obligations, Obligation, VcError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    PerObligation,
    Conjunction,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::PerObligation => "per-obligation",
            Mode::Conjunction => "conjunction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizeConfig {
    pub solver: SolverConfig,
    pub mode: Mode,
    /// Candidate checks running at once; 0 means one per core.
    pub workers: usize,
    /// Record wall-clock times; off makes reports reproducible byte for byte.
    pub timings: bool,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig {
            solver: SolverConfig::default(),
            mode: Mode::PerObligation,
            workers: 0,
            timings: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("no function named `{0}`")]
    UnknownFunction(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    SourceMap(#[from] SourceMapError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// A parsed, typechecked and normalized source file.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub program: NormProgram,
    pub map: SourceMap,
}

impl Analysis {
    pub fn new(source: &SourceFile) -> Result<Self, FrontendError> {
        let typed = load(source)?;
        let (program, map) = normalize(&typed, source);
        Ok(Analysis { program, map })
    }

    /// Copy with the function of the same name replaced by `f`, which must
    /// be normalized and keep the statement structure of the original.
    pub fn with_function(&self, f: FunctionDef) -> Result<Self, LocalizeError> {
        let mut out = self.clone();
        let slot = out
            .program
            .program
            .functions
            .iter_mut()
            .find(|g| g.name == f.name)
            .ok_or_else(|| LocalizeError::UnknownFunction(f.name.clone()))?;
        *slot = f;
        Ok(out)
    }

    pub fn function(&self, name: &str) -> Result<&FunctionDef, LocalizeError> {
        self.program
            .function(name)
            .ok_or_else(|| LocalizeError::UnknownFunction(name.to_string()))
    }

    pub fn function_names(&self) -> Vec<String> {
        self.program
            .program
            .functions
            .iter()
            .map(|f| f.name.clone())
            .collect()
    }

    pub fn candidates(&self, name: &str) -> Result<Vec<Candidate>, LocalizeError> {
        let f = self.function(name)?;
        Ok(enumerate_candidates(&self.program.program, f, &self.map)?)
    }

    pub fn obligations(&self, name: &str) -> Result<Vec<Obligation>, LocalizeError> {
        let f = self.function(name)?;
        Ok(gen_obligations(&self.program.program, f, None)?)
    }

    /// Obligations of `name` with candidate `cand` replaced by a placeholder.
    pub fn instrumented_obligations(
        &self,
        name: &str,
        cand: &Candidate,
    ) -> Result<(Vec<Obligation>, Var), LocalizeError> {
        let f = self.function(name)?;
        let (g, c) = instrument(&self.program.program, f, cand);
        Ok((gen_obligations(&self.program.program, &g, Some(&c))?, c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictTag {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObligationReport {
    pub id: String,
    pub verdict: VerdictTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    pub time_sec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetectionReport {
    pub verdict: VerdictTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Valuation>,
    pub obligations: Vec<ObligationReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Overall {
    Reported,
    NotRepairable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateReport {
    pub id: usize,
    pub kind: SiteKind,
    /// Path of the normalized statement, e.g. `1.then.0`.
    pub site: String,
    pub normalized_text: String,
    pub original_line: u32,
    pub original_text: String,
    pub overall: Overall,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    pub loop_scoped: bool,
    pub obligations: Vec<ObligationReport>,
    pub time_sec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportedLocation {
    pub original_line: u32,
    pub original_text: String,
    pub normalized_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    pub detect_sec: Option<f64>,
    pub total_sec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationReport {
    pub function: String,
    pub detection: DetectionReport,
    pub candidates: Vec<CandidateReport>,
    pub reported: Vec<ReportedLocation>,
    pub mode: Mode,
    pub semantics: String,
    #[serde(rename = "boundB")]
    pub bound_b: i64,
    pub timings: Timings,
}

impl LocalizationReport {
    pub fn reported_lines(&self) -> Vec<u32> {
        self.reported.iter().map(|r| r.original_line).collect()
    }

    pub fn reported_candidates(&self) -> impl Iterator<Item = &CandidateReport> {
        self.candidates
            .iter()
            .filter(|c| c.overall == Overall::Reported)
    }
}

fn tag(v: &Verdict) -> (VerdictTag, Option<UnknownReason>) {
    match v {
        Verdict::Valid => (VerdictTag::Valid, None),
        Verdict::Invalid { .. } => (VerdictTag::Invalid, None),
        Verdict::Unknown(r) => (VerdictTag::Unknown, Some(*r)),
    }
}

fn secs(start: Instant, on: bool) -> Option<f64> {
    on.then(|| start.elapsed().as_secs_f64())
}

fn decide_all(
    obligations: &[(String, crate::logic::QuantifiedQuery)],
    cfg: &LocalizeConfig,
    hints: &[Valuation],
) -> Result<(Vec<ObligationReport>, Vec<Verdict>), SolverError> {
    let mut reports = Vec::with_capacity(obligations.len());
    let mut verdicts = Vec::with_capacity(obligations.len());
    for (id, q) in obligations {
        let t = Instant::now();
        let v = decide_with_hints(q, &cfg.solver, hints)?;
        let (verdict, reason) = tag(&v);
        reports.push(ObligationReport {
            id: id.clone(),
            verdict,
            reason,
            time_sec: secs(t, cfg.timings),
        });
        verdicts.push(v);
    }
    Ok((reports, verdicts))
}

/// Check the function against its contract.
pub fn verify(
    analysis: &Analysis,
    function: &str,
    cfg: &LocalizeConfig,
) -> Result<DetectionReport, LocalizeError> {
    let obligations = analysis.obligations(function)?;
    let queries: Vec<_> = obligations
        .iter()
        .map(|o| (o.id.clone(), o.query.clone()))
        .collect();
    let (reports, verdicts) = decide_all(&queries, cfg, &[])?;
    let mut witness = None;
    for (o, v) in obligations.iter().zip(&verdicts) {
        if let Verdict::Invalid { witness: Some(w) } = v {
            let inputs: Valuation = w
                .iter()
                .filter(|(k, _)| o.query.inputs.iter().any(|i| &&i.name == k))
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            witness = Some(inputs);
            break;
        }
    }
    let (verdict, reason) = tag(&Verdict::combine(verdicts));
    Ok(DetectionReport {
        verdict,
        reason,
        witness,
        obligations: reports,
    })
}

fn check_candidate(
    analysis: &Analysis,
    function: &str,
    cand: &Candidate,
    cfg: &LocalizeConfig,
    hints: &[Valuation],
) -> Result<CandidateReport, LocalizeError> {
    let start = Instant::now();
    let (obligations, c) = analysis.instrumented_obligations(function, cand)?;
    let queries: Vec<_> = match cfg.mode {
        Mode::PerObligation => obligations
            .iter()
            .map(|o| (o.id.clone(), o.query.clone()))
            .collect(),
        Mode::Conjunction => {
            let mut inputs: Vec<Var> = Vec::new();
            let mut aux: Vec<Var> = Vec::new();
            for o in &obligations {
                for v in &o.query.inputs {
                    if !inputs.contains(v) {
                        inputs.push(v.clone());
                    }
                }
                for v in &o.query.auxiliaries {
                    if !aux.contains(v) {
                        aux.push(v.clone());
                    }
                }
            }
            let body = Formula::and(obligations.iter().map(|o| o.body().clone()).collect());
            let q = build_query(body, &inputs, Some(&c), &aux).map_err(VcError::from)?;
            vec![(format!("{function}:conjunction:0"), q)]
        }
    };
    let (reports, verdicts) = decide_all(&queries, cfg, hints)?;
    let combined = Verdict::combine(verdicts);
    let (overall, reason) = match combined {
        Verdict::Valid => (Overall::Reported, None),
        Verdict::Invalid { .. } => (Overall::NotRepairable, None),
        Verdict::Unknown(r) => (Overall::Inconclusive, Some(r)),
    };
    Ok(CandidateReport {
        id: cand.id,
        kind: cand.kind,
        site: cand.path().to_string(),
        normalized_text: cand.expr.clone(),
        original_line: cand.location.original_line,
        original_text: cand.location.original_text.clone(),
        overall,
        reason,
        loop_scoped: cand.loop_scoped,
        obligations: reports,
        time_sec: secs(start, cfg.timings),
    })
}

/// Verify `function` and, if the contract may be violated, check every
/// candidate for repairability.
pub fn localize(
    analysis: &Analysis,
    function: &str,
    cfg: &LocalizeConfig,
) -> Result<LocalizationReport, LocalizeError> {
    let start = Instant::now();
    let detection = verify(analysis, function, cfg)?;
    let detect_sec = secs(start, cfg.timings);
    let candidates = if detection.verdict == VerdictTag::Valid {
        Vec::new()
    } else {
        let cands = analysis.candidates(function)?;
        // The detection counterexample is the first input each candidate
        // check tries.
        let hints: Vec<Valuation> = detection.witness.iter().cloned().collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| LocalizeError::Pool(e.to_string()))?;
        pool.install(|| {
            cands
                .par_iter()
                .map(|c| check_candidate(analysis, function, c, cfg, &hints))
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    let reported = candidates
        .iter()
        .filter(|c| c.overall == Overall::Reported)
        .map(|c| ReportedLocation {
            original_line: c.original_line,
            original_text: c.original_text.clone(),
            normalized_text: c.normalized_text.clone(),
        })
        .collect();
    Ok(LocalizationReport {
        function: function.to_string(),
        detection,
        candidates,
        reported,
        mode: cfg.mode,
        semantics: cfg.solver.semantics(),
        bound_b: cfg.solver.bound,
        timings: Timings {
            detect_sec,
            total_sec: secs(start, cfg.timings),
        },
    })
}

fn verdict_word(v: VerdictTag) -> &'static str {
    match v {
        VerdictTag::Valid => "Valid",
        VerdictTag::Invalid => "Invalid",
        VerdictTag::Unknown => "Unknown",
    }
}

pub fn render_witness(w: &Valuation) -> String {
    w.iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One line per function: `name: Valid` or `name: Invalid (witness ...)`.
pub fn render_detection(function: &str, d: &DetectionReport) -> String {
    let mut s = format!("{function}: {}", verdict_word(d.verdict));
    if let Some(r) = d.reason {
        let _ = write!(s, " ({r})");
    }
    if let Some(w) = &d.witness {
        let _ = write!(s, " (witness: {})", render_witness(w));
    }
    s
}

/// Human-readable report.
pub fn render_text(r: &LocalizationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", render_detection(&r.function, &r.detection));
    if r.detection.verdict == VerdictTag::Valid {
        let _ = writeln!(out, "contract holds; nothing to localize");
        return out;
    }
    let _ = writeln!(
        out,
        "{} candidates checked (mode {}, semantics {})",
        r.candidates.len(),
        r.mode,
        r.semantics
    );
    for c in &r.candidates {
        let status = match c.overall {
            Overall::Reported => "reported".to_string(),
            Overall::NotRepairable => "not repairable".to_string(),
            Overall::Inconclusive => format!(
                "inconclusive ({})",
                c.reason.map(|x| x.to_string()).unwrap_or_default()
            ),
        };
        let scoped = if c.loop_scoped { " [loop-scoped]" } else { "" };
        let _ = writeln!(
            out,
            "  C{:<3} {:<10} line {:<4} {:<24} {status}{scoped}",
            c.id,
            c.kind.to_string(),
            c.original_line,
            c.normalized_text,
        );
    }
    let n = r.reported.len();
    let locs: Vec<String> = r
        .reported
        .iter()
        .map(|l| format!("{} in line {}", l.original_text, l.original_line))
        .collect();
    match n {
        0 => out.push_str("reports no potential error locations\n"),
        1 => {
            let _ = writeln!(out, "reports 1 potential error location: {}", locs[0]);
        }
        _ => {
            let _ = writeln!(out, "reports {n} potential error locations: {}", locs.join(", "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAX: &str = "/*@ensures \\result >= b;@*/
int max(int a, int b) {
  int r = a;
  if(b > a)
    r = a; //correct: r = b
  return r; }
";

    fn analysis(src: &str) -> Analysis {
        Analysis::new(&SourceFile::new("max.mcl", src)).unwrap()
    }

    #[test]
    fn max_reports_lines_five_and_six() {
        let r = localize(&analysis(MAX), "max", &LocalizeConfig::default()).unwrap();
        assert_eq!(r.detection.verdict, VerdictTag::Invalid);
        assert_eq!(r.reported_lines(), vec![5, 6]);
        let overall: Vec<Overall> = r.candidates.iter().map(|c| c.overall).collect();
        assert_eq!(
            overall,
            vec![
                Overall::NotRepairable,
                Overall::NotRepairable,
                Overall::Reported,
                Overall::Reported
            ]
        );
        let text = render_text(&r);
        assert!(text.contains("reports 2 potential error locations: a in line 5, r in line 6"));
    }

    #[test]
    fn fixed_max_is_valid() {
        let src = MAX.replace("r = a; //", "r = b; //");
        let r = localize(&analysis(&src), "max", &LocalizeConfig::default()).unwrap();
        assert_eq!(r.detection.verdict, VerdictTag::Valid);
        assert!(r.candidates.is_empty());
        assert!(r.reported.is_empty());
    }

    #[test]
    fn unknown_function() {
        assert!(matches!(
            localize(&analysis(MAX), "min", &LocalizeConfig::default()),
            Err(LocalizeError::UnknownFunction(_))
        ));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let cfg = LocalizeConfig {
            timings: false,
            ..Default::default()
        };
        let r = localize(&analysis(MAX), "max", &cfg).unwrap();
        let s = serde_json::to_string_pretty(&r).unwrap();
        let back: LocalizationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), s);
        assert!(s.contains("\"boundB\": 8"));
        assert!(s.contains("\"normalizedText\""));
    }
}
