//! Circuit representation and the sequential executor.
//!
//! Instructions address modes by name. The executor keeps a name -> position
//! table, so removing a measured mode never shifts the meaning of later
//! instructions.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::coherent::{merge_terms, normalize, CsState, DEFAULT_MERGE_TOL};
use crate::error::Error;
use crate::optics::{
    apply_bs, apply_hadamard_with, select_vacuum, split_mode, HadamardDomain, SelectionMode,
    SelectionRecord,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    /// Bring a fresh mode into the coherent state `|amplitude⟩`.
    Prep {
        mode: String,
        amplitude: Complex64,
    },
    Hadamard {
        mode: String,
        alpha_ref: f64,
    },
    Bs {
        first: String,
        second: String,
    },
    /// Mix `source` with a fresh vacuum port named `new_mode`.
    Split {
        source: String,
        new_mode: String,
    },
    /// Post-select vacuum on `mode` and discard it.
    Select0 {
        mode: String,
    },
}

impl Instruction {
    pub fn keyword(&self) -> &'static str {
        match self {
            Instruction::Prep { .. } => "prep",
            Instruction::Hadamard { .. } => "h",
            Instruction::Bs { .. } => "bs",
            Instruction::Split { .. } => "split",
            Instruction::Select0 { .. } => "select0",
        }
    }
}

/// An ordered list of instructions plus the coherent amplitude they assume.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub instructions: Vec<Instruction>,
    pub declared_alpha: f64,
}

/// Instruction counts by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub prep: usize,
    pub hadamard: usize,
    pub bs: usize,
    pub split: usize,
    pub select0: usize,
}

impl Circuit {
    pub fn new(declared_alpha: f64) -> Self {
        Circuit {
            instructions: Vec::new(),
            declared_alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, instruction: Instruction) -> &mut Self {
        self.instructions.push(instruction);
        self
    }

    pub fn extend(&mut self, other: Circuit) -> &mut Self {
        self.instructions.extend(other.instructions);
        self
    }

    /// Prepare `|+declared_alpha⟩`.
    pub fn prep(&mut self, mode: impl Into<String>) -> &mut Self {
        let amplitude = Complex64::new(self.declared_alpha, 0.0);
        self.push(Instruction::Prep {
            mode: mode.into(),
            amplitude,
        })
    }

    pub fn prep_amp(&mut self, mode: impl Into<String>, amplitude: Complex64) -> &mut Self {
        self.push(Instruction::Prep {
            mode: mode.into(),
            amplitude,
        })
    }

    /// Hadamard with the declared alpha as reference.
    pub fn h(&mut self, mode: impl Into<String>) -> &mut Self {
        let alpha_ref = self.declared_alpha;
        self.push(Instruction::Hadamard {
            mode: mode.into(),
            alpha_ref,
        })
    }

    pub fn bs(&mut self, first: impl Into<String>, second: impl Into<String>) -> &mut Self {
        self.push(Instruction::Bs {
            first: first.into(),
            second: second.into(),
        })
    }

    pub fn split(&mut self, source: impl Into<String>, new_mode: impl Into<String>) -> &mut Self {
        self.push(Instruction::Split {
            source: source.into(),
            new_mode: new_mode.into(),
        })
    }

    pub fn select0(&mut self, mode: impl Into<String>) -> &mut Self {
        self.push(Instruction::Select0 { mode: mode.into() })
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for ins in &self.instructions {
            match ins {
                Instruction::Prep { .. } => c.prep += 1,
                Instruction::Hadamard { .. } => c.hadamard += 1,
                Instruction::Bs { .. } => c.bs += 1,
                Instruction::Split { .. } => c.split += 1,
                Instruction::Select0 { .. } => c.select0 += 1,
            }
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagnosticKind {
    InvalidAlpha(f64),
    InvalidName(String),
    UnboundMode(String),
    /// `prep` or `split` target that was bound before.
    AlreadyBound(String),
    /// Use of a mode after `select0` consumed it.
    ConsumedMode(String),
    DuplicateOperand(String),
    NonFiniteValue,
    InvalidReference(f64),
}

/// A static problem with a circuit. `index` is the offending instruction, or
/// `None` for circuit-level problems.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub index: Option<usize>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticKind::InvalidAlpha(a) => {
                write!(f, "declared alpha {a} must be positive and finite")
            }
            DiagnosticKind::InvalidName(n) => write!(f, "invalid mode name `{n}`"),
            DiagnosticKind::UnboundMode(n) => write!(f, "unbound mode `{n}`"),
            DiagnosticKind::AlreadyBound(n) => write!(f, "mode `{n}` is already bound"),
            DiagnosticKind::ConsumedMode(n) => write!(f, "mode `{n}` was consumed by select0"),
            DiagnosticKind::DuplicateOperand(n) => {
                write!(f, "mode `{n}` used twice in one instruction")
            }
            DiagnosticKind::NonFiniteValue => write!(f, "non-finite numeric value"),
            DiagnosticKind::InvalidReference(r) => {
                write!(f, "hadamard reference {r} must be positive and finite")
            }
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "instruction {i}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Mode names are identifiers: a letter or `_`, then letters, digits or `_`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn live_problem(
    name: &str,
    live: &HashSet<&str>,
    consumed: &HashSet<&str>,
) -> Option<DiagnosticKind> {
    if !is_valid_name(name) {
        Some(DiagnosticKind::InvalidName(name.to_string()))
    } else if live.contains(name) {
        None
    } else if consumed.contains(name) {
        Some(DiagnosticKind::ConsumedMode(name.to_string()))
    } else {
        Some(DiagnosticKind::UnboundMode(name.to_string()))
    }
}

/// Check name binding discipline and numeric sanity. Empty result means the
/// circuit can be run.
pub fn validate(c: &Circuit) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if !(c.declared_alpha.is_finite() && c.declared_alpha > 0.0) {
        diags.push(Diagnostic {
            index: None,
            kind: DiagnosticKind::InvalidAlpha(c.declared_alpha),
        });
    }
    let mut live: HashSet<&str> = HashSet::new();
    let mut consumed: HashSet<&str> = HashSet::new();
    for (idx, ins) in c.instructions.iter().enumerate() {
        let mut push = |kind| {
            diags.push(Diagnostic {
                index: Some(idx),
                kind,
            })
        };
        match ins {
            Instruction::Prep { mode, amplitude } => {
                if !amplitude.is_finite() {
                    push(DiagnosticKind::NonFiniteValue);
                }
                if !is_valid_name(mode) {
                    push(DiagnosticKind::InvalidName(mode.clone()));
                } else if live.contains(mode.as_str()) || consumed.contains(mode.as_str()) {
                    push(DiagnosticKind::AlreadyBound(mode.clone()));
                } else {
                    live.insert(mode);
                }
            }
            Instruction::Hadamard { mode, alpha_ref } => {
                if !(alpha_ref.is_finite() && *alpha_ref > 0.0) {
                    push(DiagnosticKind::InvalidReference(*alpha_ref));
                }
                if let Some(k) = live_problem(mode, &live, &consumed) {
                    push(k);
                }
            }
            Instruction::Bs { first, second } => {
                for name in [first, second] {
                    if let Some(k) = live_problem(name, &live, &consumed) {
                        push(k);
                    }
                }
                if first == second {
                    push(DiagnosticKind::DuplicateOperand(first.clone()));
                }
            }
            Instruction::Split { source, new_mode } => {
                if let Some(k) = live_problem(source, &live, &consumed) {
                    push(k);
                }
                if !is_valid_name(new_mode) {
                    push(DiagnosticKind::InvalidName(new_mode.clone()));
                } else if live.contains(new_mode.as_str()) || consumed.contains(new_mode.as_str()) {
                    push(DiagnosticKind::AlreadyBound(new_mode.clone()));
                } else {
                    live.insert(new_mode);
                }
            }
            Instruction::Select0 { mode } => {
                if let Some(k) = live_problem(mode, &live, &consumed) {
                    push(k);
                }
                if live.remove(mode.as_str()) {
                    consumed.insert(mode);
                }
            }
        }
    }
    diags
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub selection: SelectionMode,
    /// Tolerance for the term merge applied after every instruction.
    pub merge_tol: f64,
}

impl RunOptions {
    pub fn new(selection: SelectionMode) -> Self {
        RunOptions {
            selection,
            merge_tol: DEFAULT_MERGE_TOL,
        }
    }
}

/// One executed `select0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionStep {
    pub instruction: usize,
    pub mode_name: String,
    #[serde(flatten)]
    pub record: SelectionRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// Normalized output state; mode `k` is `mode_order[k]`.
    pub final_state: CsState,
    pub mode_order: Vec<String>,
    pub selections: Vec<SelectionStep>,
    /// Product of the per-selection `kept_prob`.
    pub p_success: f64,
    pub total_false_vacuum: f64,
    /// Largest term count seen after any instruction (after merging).
    pub peak_terms: usize,
    pub alpha: f64,
}

impl RunResult {
    /// The final state with its modes rearranged to follow `names`.
    pub fn state_in_order<S: AsRef<str>>(&self, names: &[S]) -> crate::Result<CsState> {
        let order = names
            .iter()
            .map(|n| {
                self.mode_order
                    .iter()
                    .position(|m| m == n.as_ref())
                    .ok_or_else(|| {
                        Error::Shape(format!("no surviving mode named `{}`", n.as_ref()))
                    })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        self.final_state.permute_modes(&order)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunError {
    Invalid(Vec<Diagnostic>),
    Step { index: usize, source: Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(d) => {
                write!(f, "circuit failed validation")?;
                for x in d {
                    write!(f, "; {x}")?;
                }
                Ok(())
            }
            RunError::Step { index, source } => write!(f, "instruction {index}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Run with default options for `sel`.
pub fn run(c: &Circuit, sel: SelectionMode) -> Result<RunResult, RunError> {
    run_with(c, &RunOptions::new(sel))
}

/// Execute `c` instruction by instruction.
///
/// The state is kept normalized throughout: the Hadamard is not norm
/// preserving on nonorthogonal inputs, so its output is rescaled, and every
/// selection renormalizes the conditional state. Only selections contribute
/// to `p_success`. In exact mode the Hadamard uses the projected extension
/// because false-vacuum branches leave off-basis amplitudes behind.
pub fn run_with(c: &Circuit, opts: &RunOptions) -> Result<RunResult, RunError> {
    let diags = validate(c);
    if !diags.is_empty() {
        return Err(RunError::Invalid(diags));
    }
    let domain = match opts.selection {
        SelectionMode::Exact => HadamardDomain::Projected,
        SelectionMode::Branch { .. } => HadamardDomain::Strict,
    };

    let mut state = CsState::vacuum(0);
    let mut names: Vec<String> = Vec::new();
    let mut positions: HashMap<String, usize> = HashMap::new();
    let mut selections = Vec::new();
    let mut p_success = 1.0;
    let mut total_false_vacuum = 0.0;
    let mut peak_terms = state.len();

    for (index, ins) in c.instructions.iter().enumerate() {
        let step = |e: Error| RunError::Step { index, source: e };
        let pos = |name: &str| positions[name];
        let next = match ins {
            Instruction::Prep { mode, amplitude } => {
                positions.insert(mode.clone(), names.len());
                names.push(mode.clone());
                state.append_mode(*amplitude).map_err(step)?
            }
            Instruction::Hadamard { mode, alpha_ref } => {
                let out =
                    apply_hadamard_with(&state, pos(mode), *alpha_ref, domain).map_err(step)?;
                normalize(&out).map_err(step)?
            }
            Instruction::Bs { first, second } => {
                apply_bs(&state, pos(first), pos(second)).map_err(step)?
            }
            Instruction::Split { source, new_mode } => {
                let src = pos(source);
                positions.insert(new_mode.clone(), names.len());
                names.push(new_mode.clone());
                split_mode(&state, src).map_err(step)?
            }
            Instruction::Select0 { mode } => {
                let i = pos(mode);
                let (out, record) = select_vacuum(&state, i, opts.selection).map_err(step)?;
                names.remove(i);
                positions.remove(mode);
                for p in positions.values_mut() {
                    if *p > i {
                        *p -= 1;
                    }
                }
                p_success *= record.kept_prob;
                total_false_vacuum += record.false_vacuum_prob;
                selections.push(SelectionStep {
                    instruction: index,
                    mode_name: mode.clone(),
                    record,
                });
                out
            }
        };
        let flag = next.is_normalized();
        state = merge_terms(&next, opts.merge_tol).mark_normalized(flag);
        peak_terms = peak_terms.max(state.len());
    }

    let final_state = normalize(&state).map_err(|e| RunError::Step {
        index: c.instructions.len().saturating_sub(1),
        source: e,
    })?;
    Ok(RunResult {
        final_state,
        mode_order: names,
        selections,
        p_success,
        total_false_vacuum,
        peak_terms,
        alpha: c.declared_alpha,
    })
}
