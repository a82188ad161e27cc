//! The analysis pipeline behind `posmap analyze`.
//!
//! Each analysis produces a verdict string, numeric evidence and an optional
//! witness, all as JSON values, plus a one-line human summary. The order of
//! analyses is fixed, and every random choice derives from the report seed, so
//! the same input, seed and version give byte-identical output.

use serde_json::{json, Value};

use super::mapfile::{encode_ket, encode_matrix, FloatFormat, MapFile};
use crate::decomp::{self, DecompResult};
use crate::error::{Error, Result};
use crate::linalg::{self, ToleranceConfig};
use crate::mapcore::{LinearMap, MapClass};
use crate::minorant::{self, DominationMethod, FalsifierVerdict, MinorantKind, SearchBudget};
use crate::{faces, positivity, rank1};

const DEC: FloatFormat = FloatFormat::Decimal;

/// Which analyses to run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub positivity: bool,
    /// Schmidt rank for the k-positivity test.
    pub k_pos: Option<usize>,
    pub cp: bool,
    pub cocp: bool,
    pub schwarz: bool,
    pub rank1: bool,
    pub faces: bool,
    pub minorant: bool,
    pub decomp: bool,
}

impl Selection {
    pub fn all(phi: &LinearMap) -> Selection {
        let s = phi.dim_in().min(phi.dim_out());
        Selection {
            positivity: true,
            k_pos: (s >= 2).then_some(2),
            cp: true,
            cocp: true,
            schwarz: true,
            rank1: true,
            faces: true,
            minorant: true,
            decomp: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Selection::default()
    }
}

/// Search effort shared by the analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct Effort {
    pub restarts: usize,
    pub samples: usize,
    pub decomp_iters: usize,
    pub witness_restarts: usize,
}

impl Default for Effort {
    fn default() -> Self {
        Effort { restarts: 50, samples: 200, decomp_iters: 5000, witness_restarts: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub analysis: &'static str,
    pub verdict: String,
    pub evidence: Value,
    pub witness: Option<Value>,
    pub summary: String,
}

impl Analysis {
    fn new(analysis: &'static str, verdict: &str, evidence: Value, witness: Option<Value>, summary: String) -> Analysis {
        Analysis { analysis, verdict: verdict.to_string(), evidence, witness, summary }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "analysis": self.analysis, "verdict": self.verdict, "evidence": self.evidence });
        if let Some(w) = &self.witness {
            v["witness"] = w.clone();
        }
        v
    }
}

fn pairs_json(pairs: &[(crate::Ket, crate::Ket)]) -> Value {
    Value::Array(pairs.iter().map(|(a, b)| json!({ "xi": encode_ket(a, DEC), "y": encode_ket(b, DEC) })).collect())
}

fn short_ket(v: &crate::Ket) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|c| format!("{:.4}{:+.4}i", c.re, c.im)).collect();
    format!("[{}]", parts.join(", "))
}

/// Runs the selected analyses in the fixed order positivity, k-positivity,
/// CP, co-CP, Schwarz, rank-one classification, faces, minorants,
/// decomposability.
pub fn run_analyses(file: &MapFile, sel: &Selection, effort: &Effort, tol: &ToleranceConfig, seed: u64) -> Result<Vec<Analysis>> {
    let phi = &file.map;
    let scale = phi.norm().max(1.0);
    let threshold = tol.eps_psd * scale;
    let mut out = Vec::new();

    if sel.positivity {
        let r = positivity::min_product_value(phi, tol, effort.restarts, seed)?;
        let positive = r.best_value >= -threshold;
        let ev = json!({ "min_product_value": r.best_value, "threshold": threshold, "restarts": r.restarts_used, "converged": r.converged, "certificate": !positive });
        let summary = if positive {
            format!("positive (evidence: see-saw minimum {:.3e} over {} restarts)", r.best_value, r.restarts_used)
        } else {
            format!("not positive (certificate: product value {:.6e})", r.best_value)
        };
        out.push(Analysis::new("positivity", if positive { "positive" } else { "not_positive" }, ev, Some(pairs_json(&r.witness)), summary));
    }

    if let Some(s) = sel.k_pos {
        let r = positivity::min_schmidt_k_value(phi, s, tol, effort.restarts, seed)?;
        let holds = r.best_value >= -threshold;
        let ev = json!({ "schmidt_rank": s, "min_value": r.best_value, "threshold": threshold, "restarts": r.restarts_used, "certificate": !holds });
        let summary = if holds {
            format!("{s}-positive (evidence: minimum {:.3e})", r.best_value)
        } else {
            format!("not {s}-positive (certificate: Schmidt-{s} value {:.6e})", r.best_value)
        };
        out.push(Analysis::new("k_positivity", if holds { "k_positive" } else { "not_k_positive" }, ev, Some(pairs_json(&r.witness)), summary));
    }

    if sel.cp {
        let (cp, m) = positivity::is_completely_positive(phi, tol);
        let summary = format!("{} (min eigenvalue of the Choi matrix {:.6e})", if cp { "CP" } else { "not CP" }, m);
        out.push(Analysis::new("cp", if cp { "cp" } else { "not_cp" }, json!({ "min_eigenvalue": m }), None, summary));
    }

    if sel.cocp {
        let (cp, m) = positivity::is_completely_copositive(phi, tol);
        let summary = format!("{} (min eigenvalue of the partial transpose {:.6e})", if cp { "co-CP" } else { "not co-CP" }, m);
        out.push(Analysis::new("cocp", if cp { "cocp" } else { "not_cocp" }, json!({ "min_eigenvalue": m }), None, summary));
    }

    if sel.schwarz {
        let cfg = positivity::SchwarzConfig { sample_count: effort.samples, seed, ..Default::default() };
        let d = positivity::schwarz_defect(phi, &cfg, tol)?;
        let c = positivity::schwarz_co_defect(phi, &cfg, tol)?;
        let ev = json!({
            "best_gamma": d.best_gamma,
            "best_gamma_co": c.best_gamma,
            "per_gamma": d.per_gamma,
            "per_gamma_co": c.per_gamma,
            "sample_count": cfg.sample_count,
        });
        let summary = match d.best_gamma {
            Some(g) => format!("Schwarz inequality holds on all samples for gamma = {g}"),
            None => "no gamma on the grid satisfies the Schwarz inequality on all samples".to_string(),
        };
        out.push(Analysis::new("schwarz", if d.best_gamma.is_some() { "gamma_found" } else { "no_gamma_found" }, ev, None, summary));
    }

    if sel.rank1 {
        out.push(rank1_analysis(file, tol, seed)?);
    }

    if sel.faces {
        let a = match faces::find_g_membership(phi, tol, effort.restarts, seed) {
            Ok(r) => {
                let ev = json!({ "best_second_eigenvalue": r.best_second_eigenvalue, "restarts": r.restarts_used });
                match r.found {
                    Some((xi, x, lam)) => {
                        let w = json!({ "xi": encode_ket(&xi, DEC), "x": encode_ket(&x, DEC), "lambda": lam });
                        Analysis::new("faces", "in_g_face", ev, Some(w), format!("lies in a face G (lambda = {lam:.6e})"))
                    }
                    None => Analysis::new(
                        "faces",
                        "no_g_face_found",
                        ev,
                        None,
                        format!("no face G found (smallest second eigenvalue {:.6e})", r.best_second_eigenvalue),
                    ),
                }
            }
            Err(Error::ZeroMap) => Analysis::new("faces", "zero_map", json!({}), None, "zero map lies in every face".into()),
            Err(e) => return Err(e),
        };
        out.push(a);
    }

    if sel.minorant {
        out.push(minorant_analysis(phi, effort, tol, seed)?);
    }

    if sel.decomp {
        out.push(decomp_analysis(phi, effort, tol, seed)?);
    }
    Ok(out)
}

fn rank1_analysis(file: &MapFile, tol: &ToleranceConfig, seed: u64) -> Result<Analysis> {
    let phi = &file.map;
    let class = rank1::classify_rank1(phi, tol, seed)?;
    let verdict = class.kind();
    let (ev, witness, summary) = match &class {
        MapClass::NotRankOne { witness, observed_rank, residuals } => (
            json!({ "observed_rank": observed_rank, "residuals": residuals }),
            Some(json!({ "xi": encode_ket(witness, DEC) })),
            format!("not rank-one nonincreasing (rank {observed_rank} at xi = {})", short_ket(witness)),
        ),
        _ => {
            let rebuilt = class.rebuild(tol).ok_or_else(|| Error::BadParams("classifier returned an invalid generator".into()))?;
            let residual = rebuilt.max_diff(phi);
            let mut ev = json!({ "reconstruction_residual": residual });
            let (generator, name) = match &class {
                MapClass::Kraus { b } => (b.clone(), "B"),
                MapClass::CoKraus { c } => (c.clone(), "C"),
                MapClass::Functional { m, q } => {
                    ev["q"] = encode_matrix(q, DEC);
                    (m.clone(), "M")
                }
                MapClass::NotRankOne { .. } => unreachable!("handled above"),
            };
            ev["generator"] = encode_matrix(&generator, DEC);
            let mut summary = format!("{verdict} form, generator {name}, reconstruction residual {residual:.3e}");
            if let Some((kind, g)) = &file.generator {
                if kind == verdict && g.rows() == generator.rows() && g.cols() == generator.cols() {
                    let err = rank1::phase_aligned_distance(&generator, g);
                    ev["recovery_error"] = json!(err);
                    summary.push_str(&format!(", phase-aligned recovery error {err:.3e}"));
                }
            }
            (ev, None, summary)
        }
    };
    Ok(Analysis::new("rank1", verdict, ev, witness, summary))
}

fn minorant_analysis(phi: &LinearMap, effort: &Effort, tol: &ToleranceConfig, seed: u64) -> Result<Analysis> {
    if phi.is_zero() {
        return Ok(Analysis::new("minorant", "zero_map", json!({}), None, "zero map has no eigen-seed".into()));
    }
    let s = minorant::find_seed(phi, tol, seed)?;
    let budget = SearchBudget { restarts: effort.restarts.min(20), samples: effort.samples, seed };
    let mut ev = json!({ "lambda": s.lambda });
    for kind in [MinorantKind::Psi, MinorantKind::Chi] {
        let rho = minorant::build_minorant(phi, &s, kind, tol)?;
        let rep = minorant::dominates(phi, &rho, &DominationMethod::MapDifferenceSeesaw, tol, &budget)?;
        let key = match kind {
            MinorantKind::Psi => "psi",
            MinorantKind::Chi => "chi",
        };
        ev[key] = json!({ "dominated": rep.holds, "worst_margin": rep.worst_violation });
    }
    let witness = json!({ "xi": encode_ket(&s.xi, DEC), "x": encode_ket(&s.x, DEC), "lambda": s.lambda });
    let (verdict, summary) = match minorant::extremality_falsifier(phi, tol, &budget)? {
        FalsifierVerdict::Falsified { kind, proportionality_residual, .. } => {
            ev["falsifier"] = json!({ "kind": kind, "proportionality_residual": proportionality_residual });
            ("falsified", format!("not extremal: a dominated {kind:?} minorant is not proportional (residual {proportionality_residual:.3e})"))
        }
        FalsifierVerdict::NotFalsified => ("not_falsified", "no non-proportional dominated minorant found".to_string()),
    };
    Ok(Analysis::new("minorant", verdict, ev, Some(witness), summary))
}

fn decomp_analysis(phi: &LinearMap, effort: &Effort, tol: &ToleranceConfig, seed: u64) -> Result<Analysis> {
    let feas = decomp::decompose_search(phi, tol, effort.decomp_iters)?;
    let wit = decomp::ppt_witness_search(phi, tol, effort.witness_restarts, tol.max_iters.max(1), seed)?;
    let mut ev = json!({ "decompose_search": feas.verdict(), "witness_search": wit.verdict() });
    match &feas {
        DecompResult::Decomposed { s1, s2, residual } => {
            ev["residual"] = json!(residual);
            ev["s1_min_eigenvalue"] = json!(linalg::min_eigenvalue(s1)?);
            ev["s2_min_eigenvalue"] = json!(linalg::min_eigenvalue(s2)?);
        }
        DecompResult::Inconclusive { best_residual, best_witness_value, .. } => {
            ev["best_residual"] = json!(best_residual);
            ev["margin_bound"] = json!(best_witness_value);
        }
        DecompResult::WitnessFound { .. } => {}
    }
    let mut witness = None;
    match &wit {
        DecompResult::WitnessFound { w, value } => {
            ev["witness_value"] = json!(value);
            witness = Some(json!({ "w": encode_matrix(w, DEC) }));
        }
        DecompResult::Inconclusive { best_witness_value, .. } => ev["best_witness_value"] = json!(best_witness_value),
        DecompResult::Decomposed { .. } => {}
    }
    let (verdict, summary) = match (&feas, &wit) {
        (DecompResult::Decomposed { .. }, DecompResult::WitnessFound { .. }) => ("conflicting", "decomposition and witness both found".to_string()),
        (DecompResult::Decomposed { residual, .. }, _) => ("decomposable", format!("decomposable (residual {residual:.3e})")),
        (_, DecompResult::WitnessFound { value, .. }) => ("nondecomposable", format!("nondecomposable (PPT witness with Tr(JW) = {value:.6e})")),
        _ => ("inconclusive", "neither a decomposition nor a witness was found".to_string()),
    };
    Ok(Analysis::new("decomp", verdict, ev, witness, summary))
}
