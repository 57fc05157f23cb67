//! Circuits that prepare concatenated GHZ-type entangled coherent states, and
//! the ideal finite-amplitude targets they approximate.
//!
//! Construction runs in two stages. The chain stage builds the `N`-mode
//! GHZ-type state `|α⟩^⊗N + |−α⟩^⊗N`: each new cat state is mixed with the
//! last chain mode on a beam splitter and the cat port is post-selected on
//! vacuum, which keeps only the sign-matched branches; splitting the
//! surviving `|±√2α⟩` restores two `|±α⟩` modes. The expansion stage applies a
//! Hadamard to every chain mode and then fans each one out to `m` physical
//! modes by the same mix/select/split step.
//!
//! Mode naming: `q{i}_{j}` is physical mode `j` of logical qubit `i`
//! (both 1-based); `c{k}` are chain ancillas and `f{i}_{j}` expansion
//! ancillas, all consumed by `select0`.

use num_complex::Complex64;

use crate::coherent::{norm_const, normalize, CoherentTerm, CsState, NormKind};
use crate::engine::Circuit;
use crate::error::{Error, Result};

/// Default bound on `N·m`; overridden by the `CGHZ_MAX_NM` environment variable.
pub const DEFAULT_MAX_NM: usize = 16;
pub const MAX_NM_ENV: &str = "CGHZ_MAX_NM";

/// The `N·m` cap currently in force.
pub fn nm_cap() -> usize {
    std::env::var(MAX_NM_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_NM)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams {
    pub n_logical: usize,
    pub m_physical: usize,
    pub alpha: f64,
}

impl ProtocolParams {
    /// Validate against the cap from [`nm_cap`].
    pub fn new(n_logical: usize, m_physical: usize, alpha: f64) -> Result<Self> {
        Self::with_cap(n_logical, m_physical, alpha, nm_cap())
    }

    pub fn with_cap(n_logical: usize, m_physical: usize, alpha: f64, cap: usize) -> Result<Self> {
        if n_logical == 0 || m_physical == 0 {
            return Err(Error::Parameter(format!(
                "N and m must be >= 1, got N={n_logical}, m={m_physical}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Parameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let nm = n_logical.saturating_mul(m_physical);
        if nm > cap {
            return Err(Error::Parameter(format!(
                "N·m = {nm} exceeds the cap of {cap} (set {MAX_NM_ENV} to raise it)"
            )));
        }
        Ok(ProtocolParams {
            n_logical,
            m_physical,
            alpha,
        })
    }

    pub fn total_modes(&self) -> usize {
        self.n_logical * self.m_physical
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Name of physical mode `j` of logical qubit `i`.
pub fn physical_mode(i: usize, j: usize) -> String {
    format!("q{i}_{j}")
}

/// Output modes of [`build_cghz_circuit`] in block order: `q1_1 … q1_m, q2_1 …`.
pub fn output_modes(n: usize, m: usize) -> Vec<String> {
    (1..=n)
        .flat_map(|i| (1..=m).map(move |j| physical_mode(i, j)))
        .collect()
}

/// `N_k^± (|α⟩^⊗k ± |−α⟩^⊗k)`.
pub fn ideal_ghz_state(k: usize, alpha: f64, sign: Sign) -> Result<CsState> {
    if k == 0 {
        return Err(Error::Parameter("GHZ-type state needs k >= 1".into()));
    }
    let kind = match sign {
        Sign::Plus => NormKind::NkPlus(k as u32),
        Sign::Minus => NormKind::NkMinus(k as u32),
    };
    let norm = norm_const(kind, alpha)?;
    let a = Complex64::new(alpha, 0.0);
    let terms = vec![
        CoherentTerm::new(Complex64::new(norm, 0.0), vec![a; k]),
        CoherentTerm::new(Complex64::new(sign.value() * norm, 0.0), vec![-a; k]),
    ];
    Ok(CsState::from_terms(k, terms)?.mark_normalized(true))
}

fn tensor_power(s: &CsState, n: usize) -> CsState {
    let mut out = CsState::vacuum(0);
    for _ in 0..n {
        out = out.tensor(s);
    }
    out
}

/// `(|GHZ⁺_m⟩^⊗N + |GHZ⁻_m⟩^⊗N)` with the GHZ-type blocks normalized at finite
/// α, renormalized as a whole through the Gram sum. Modes are in block order.
pub fn ideal_cghz_state(p: &ProtocolParams) -> Result<CsState> {
    let plus = tensor_power(
        &ideal_ghz_state(p.m_physical, p.alpha, Sign::Plus)?,
        p.n_logical,
    );
    let minus = tensor_power(
        &ideal_ghz_state(p.m_physical, p.alpha, Sign::Minus)?,
        p.n_logical,
    );
    normalize(&plus.superpose(&minus)?)
}

/// Chain stage: `n >= 2` modes `q1_1 … qn_1` in the GHZ-type state
/// `|α⟩^⊗n + |−α⟩^⊗n` (in branch mode), using `n − 1` selections.
pub fn build_ghz_chain(n: usize, alpha: f64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Parameter(format!("GHZ chain needs n >= 2, got {n}")));
    }
    let mut c = Circuit::new(alpha);
    c.prep(physical_mode(1, 1)).h(physical_mode(1, 1));
    for k in 2..=n {
        let last = physical_mode(k - 1, 1);
        let anc = format!("c{k}");
        c.prep(&anc)
            .h(&anc)
            .bs(&last, &anc)
            .select0(&anc)
            .split(&last, physical_mode(k, 1));
    }
    Ok(c)
}

/// Expansion stage for chain modes `q1_1 … qn_1`: a Hadamard on each, then
/// `m − 1` fan-outs producing `q{i}_2 … q{i}_m`.
pub fn expand_logical(n: usize, m: usize, alpha: f64) -> Result<Circuit> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter(format!(
            "expansion needs n, m >= 1, got n={n}, m={m}"
        )));
    }
    let mut c = Circuit::new(alpha);
    for i in 1..=n {
        let root = physical_mode(i, 1);
        c.h(&root);
        fan_out(&mut c, i, m);
    }
    Ok(c)
}

fn fan_out(c: &mut Circuit, i: usize, m: usize) {
    let root = physical_mode(i, 1);
    for j in 2..=m {
        let anc = format!("f{i}_{j}");
        c.prep(&anc)
            .h(&anc)
            .bs(&root, &anc)
            .select0(&anc)
            .split(&root, physical_mode(i, j));
    }
}

/// Full preparation circuit for `p`: chain stage, then expansion.
///
/// With a single logical qubit the chain degenerates to the one-mode cat
/// state `H|α⟩`.
pub fn build_cghz_circuit(p: &ProtocolParams) -> Result<Circuit> {
    let mut c = if p.n_logical == 1 {
        let mut c = Circuit::new(p.alpha);
        c.prep(physical_mode(1, 1)).h(physical_mode(1, 1));
        c
    } else {
        build_ghz_chain(p.n_logical, p.alpha)?
    };
    c.extend(expand_logical(p.n_logical, p.m_physical, p.alpha)?);
    Ok(c)
}
