//! Fidelities, success probabilities and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{state_inner, state_norm, CsState};
use crate::engine::{run, RunResult};
use crate::error::{Error, Result};
use crate::optics::SelectionMode;
use crate::protocol::{build_cghz_circuit, ideal_cghz_state, output_modes, ProtocolParams};

const FIDELITY_SLACK: f64 = 1e-10;

/// `|⟨ψ|φ⟩|²` for two normalized states on the same modes.
pub fn fidelity(psi: &CsState, phi: &CsState) -> Result<f64> {
    for s in [psi, phi] {
        let n = state_norm(s)?;
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(n * n));
        }
    }
    let f = state_inner(psi, phi)?.norm_sqr();
    if f > 1.0 + FIDELITY_SLACK {
        return Err(Error::Domain(format!("fidelity {f} exceeds 1")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Large-α success probability of the preparation: each of the `Nm − 1`
/// selections keeps half the norm.
pub fn theoretical_p(n: usize, m: usize) -> f64 {
    0.5f64.powi((n * m).saturating_sub(1) as i32)
}

/// Run the preparation circuit for `p` and compare it with the ideal target.
pub fn evaluate(p: &ProtocolParams, mode: SelectionMode) -> Result<(RunResult, f64)> {
    let circuit = build_cghz_circuit(p)?;
    let result = run(&circuit, mode).map_err(|e| Error::Domain(e.to_string()))?;
    let out = result.state_in_order(&output_modes(p.n_logical, p.m_physical))?;
    let f = fidelity(&out, &ideal_cghz_state(p)?)?;
    Ok((result, f))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub alpha: Vec<f64>,
    pub mode: SelectionMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    #[serde(rename = "n")]
    pub n_logical: usize,
    #[serde(rename = "m")]
    pub m_physical: usize,
    #[serde(rename = "mode")]
    pub selection_mode: String,
    pub fidelity: f64,
    pub p_success_sim: f64,
    pub p_success_theory: f64,
    pub false_vacuum_total: f64,
    pub term_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepDiagnostic {
    pub alpha: f64,
    pub n: usize,
    pub m: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub diagnostics: Vec<SweepDiagnostic>,
}

/// Evaluate every `(n, m, α)` combination, in parallel. Points come back in
/// grid order (n outermost, α innermost); failing points are reported as
/// diagnostics instead.
pub fn sweep(grid: &SweepGrid) -> SweepOutcome {
    let combos: Vec<(usize, usize, f64)> = grid
        .n
        .iter()
        .flat_map(|&n| {
            grid.m
                .iter()
                .flat_map(move |&m| grid.alpha.iter().map(move |&a| (n, m, a)))
        })
        .collect();
    let results: Vec<std::result::Result<SweepPoint, SweepDiagnostic>> = combos
        .par_iter()
        .map(|&(n, m, alpha)| {
            sweep_point(n, m, alpha, grid.mode).map_err(|e| SweepDiagnostic {
                alpha,
                n,
                m,
                message: e.to_string(),
            })
        })
        .collect();
    let mut out = SweepOutcome::default();
    for r in results {
        match r {
            Ok(p) => out.points.push(p),
            Err(d) => out.diagnostics.push(d),
        }
    }
    out
}

fn sweep_point(n: usize, m: usize, alpha: f64, mode: SelectionMode) -> Result<SweepPoint> {
    let p = ProtocolParams::new(n, m, alpha)?;
    let (r, f) = evaluate(&p, mode)?;
    Ok(SweepPoint {
        alpha,
        n_logical: n,
        m_physical: m,
        selection_mode: mode.tag().to_string(),
        fidelity: f,
        p_success_sim: r.p_success,
        p_success_theory: theoretical_p(n, m),
        false_vacuum_total: r.total_false_vacuum,
        term_count: r.final_state.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub selections: usize,
    pub total_false_vacuum: f64,
    pub total_incoherent: f64,
    pub max_single: f64,
    /// `e^{−2α²}`, the scale of a single false-vacuum event.
    pub reference_scale: f64,
}

pub fn error_report(r: &RunResult) -> ErrorReport {
    let recs = r.selections.iter().map(|s| &s.record);
    ErrorReport {
        selections: r.selections.len(),
        total_false_vacuum: r.total_false_vacuum,
        total_incoherent: recs.clone().map(|x| x.false_vacuum_incoherent).sum(),
        max_single: recs.map(|x| x.false_vacuum_prob).fold(0.0, f64::max),
        reference_scale: (-2.0 * r.alpha * r.alpha).exp(),
    }
}
