//! Coherent-state algebra: overlaps, Gram inner products, term merging and
//! the closed-form normalization constants of cat and GHZ-type states.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexNum = Complex64;

/// Default tolerance for [`merge_terms`].
pub const DEFAULT_MERGE_TOL: f64 = 1e-12;

/// Overlaps whose magnitude falls below this are flushed to exactly zero.
const UNDERFLOW_FLUSH: f64 = 1e-300;

/// Squared norms down to `-ROUNDOFF_CLAMP` are treated as zero.
const ROUNDOFF_CLAMP: f64 = 1e-12;

/// Tolerance on the squared norm of a state flagged normalized.
pub const NORMALIZED_TOL: f64 = 1e-10;

/// One branch of a superposition: a weight times a product of coherent states,
/// one amplitude per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentTerm {
    pub coeff: Complex64,
    pub amps: Vec<Complex64>,
}

impl CoherentTerm {
    pub fn new(coeff: Complex64, amps: Vec<Complex64>) -> Self {
        CoherentTerm { coeff, amps }
    }

    fn is_finite(&self) -> bool {
        self.coeff.is_finite() && self.amps.iter().all(|a| a.is_finite())
    }
}

/// A finite, possibly unnormalized, superposition of product coherent states
/// over a fixed number of modes.
///
/// A state with zero modes is a scalar; a state with zero terms is the zero
/// vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CsState {
    mode_count: usize,
    terms: Vec<CoherentTerm>,
    normalized: bool,
}

impl CsState {
    /// The zero vector on `mode_count` modes.
    pub fn zero(mode_count: usize) -> Self {
        CsState {
            mode_count,
            terms: Vec::new(),
            normalized: false,
        }
    }

    /// The product coherent state `|a_0⟩|a_1⟩…` with unit weight.
    pub fn coherent(amps: &[Complex64]) -> Result<Self> {
        Self::from_terms(
            amps.len(),
            vec![CoherentTerm::new(Complex64::new(1.0, 0.0), amps.to_vec())],
        )
        .map(|mut s| {
            s.normalized = true;
            s
        })
    }

    /// Multimode vacuum. With zero modes this is the scalar 1.
    pub fn vacuum(mode_count: usize) -> Self {
        CsState {
            mode_count,
            terms: vec![CoherentTerm::new(
                Complex64::new(1.0, 0.0),
                vec![Complex64::new(0.0, 0.0); mode_count],
            )],
            normalized: true,
        }
    }

    pub fn from_terms(mode_count: usize, terms: Vec<CoherentTerm>) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if t.amps.len() != mode_count {
                return Err(Error::Shape(format!(
                    "term {k} has {} amplitudes, state has {mode_count} modes",
                    t.amps.len()
                )));
            }
            if !t.is_finite() {
                return Err(Error::Domain(format!("term {k} has a non-finite entry")));
            }
        }
        Ok(CsState {
            mode_count,
            terms,
            normalized: false,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if the state was produced by [`normalize`] (or an operation known
    /// to preserve the norm of a normalized input).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn mark_normalized(mut self, flag: bool) -> Self {
        self.normalized = flag;
        self
    }

    pub(crate) fn with_terms(&self, mode_count: usize, terms: Vec<CoherentTerm>) -> Self {
        CsState {
            mode_count,
            terms,
            normalized: false,
        }
    }

    /// Multiply every coefficient by `factor`.
    pub fn scale(&self, factor: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| CoherentTerm::new(t.coeff * factor, t.amps.clone()))
            .collect();
        self.with_terms(self.mode_count, terms)
    }

    /// Unmerged sum of two states on the same modes.
    pub fn superpose(&self, other: &CsState) -> Result<Self> {
        check_modes(self, other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(self.with_terms(self.mode_count, terms))
    }

    /// Tensor product `self ⊗ other`; modes of `other` follow those of `self`.
    pub fn tensor(&self, other: &CsState) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut amps = a.amps.clone();
                amps.extend_from_slice(&b.amps);
                terms.push(CoherentTerm::new(a.coeff * b.coeff, amps));
            }
        }
        CsState {
            mode_count: self.mode_count + other.mode_count,
            terms,
            normalized: self.normalized && other.normalized,
        }
    }

    /// `self ⊗ |amp⟩`.
    pub fn append_mode(&self, amp: Complex64) -> Result<Self> {
        if !amp.is_finite() {
            return Err(Error::Domain(format!("non-finite amplitude {amp}")));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut amps = t.amps.clone();
                amps.push(amp);
                CoherentTerm::new(t.coeff, amps)
            })
            .collect();
        Ok(CsState {
            mode_count: self.mode_count + 1,
            terms,
            normalized: self.normalized,
        })
    }

    /// Reorder modes: mode `k` of the result is mode `order[k]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.mode_count];
        if order.len() != self.mode_count {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} modes",
                order.len(),
                self.mode_count
            )));
        }
        for &o in order {
            if o >= self.mode_count || seen[o] {
                return Err(Error::Shape(format!("{order:?} is not a permutation")));
            }
            seen[o] = true;
        }
        let terms = self
            .terms
            .iter()
            .map(|t| CoherentTerm::new(t.coeff, order.iter().map(|&o| t.amps[o]).collect()))
            .collect();
        Ok(CsState {
            mode_count: self.mode_count,
            terms,
            normalized: self.normalized,
        })
    }
}

impl fmt::Display for CsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "({:+.6e}{:+.6e}i)", t.coeff.re, t.coeff.im)?;
            for a in &t.amps {
                write!(f, " |{:.6}{:+.6}i⟩", a.re, a.im)?;
            }
        }
        Ok(())
    }
}

fn check_modes(a: &CsState, b: &CsState) -> Result<()> {
    if a.mode_count != b.mode_count {
        return Err(Error::Shape(format!(
            "mode count mismatch: {} vs {}",
            a.mode_count, b.mode_count
        )));
    }
    Ok(())
}

/// `⟨a|b⟩` without input validation.
#[inline]
pub(crate) fn overlap(a: Complex64, b: Complex64) -> Complex64 {
    let exponent = -(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b;
    // ln(1e-300) ≈ -690.8
    if exponent.re < UNDERFLOW_FLUSH.ln() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(exponent.re.exp(), exponent.im)
}

/// Single-mode coherent overlap `⟨a|b⟩ = exp(-(|a|²+|b|²)/2 + a*·b)`.
pub fn coherent_overlap(a: Complex64, b: Complex64) -> Result<Complex64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "overlap of non-finite amplitudes {a}, {b}"
        )));
    }
    Ok(overlap(a, b))
}

#[inline]
pub(crate) fn product_overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc *= overlap(*x, *y);
        if acc.re == 0.0 && acc.im == 0.0 {
            break;
        }
    }
    acc
}

pub(crate) fn inner_unchecked(s1: &CsState, s2: &CsState) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for a in &s1.terms {
        for b in &s2.terms {
            sum += a.coeff.conj() * b.coeff * product_overlap(&a.amps, &b.amps);
        }
    }
    sum
}

/// `⟨s1|s2⟩` as the full pairwise Gram sum.
pub fn state_inner(s1: &CsState, s2: &CsState) -> Result<Complex64> {
    check_modes(s1, s2)?;
    Ok(inner_unchecked(s1, s2))
}

pub(crate) fn norm_sqr(s: &CsState) -> Result<f64> {
    let n2 = inner_unchecked(s, s).re;
    if n2 < -ROUNDOFF_CLAMP {
        return Err(Error::NegativeNorm(n2));
    }
    Ok(n2.max(0.0))
}

pub fn state_norm(s: &CsState) -> Result<f64> {
    norm_sqr(s).map(f64::sqrt)
}

/// Rescale to unit norm. Fails on (numerically) zero states.
pub fn normalize(s: &CsState) -> Result<CsState> {
    let norm = state_norm(s)?;
    if norm <= 1e-12 {
        return Err(Error::ZeroState(norm));
    }
    Ok(s.scale(Complex64::new(1.0 / norm, 0.0))
        .mark_normalized(true))
}

fn amp_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Combine terms whose amplitudes agree within `tol` on every mode and drop
/// terms with `|coeff| <= tol * max|coeff|`.
///
/// Terms are combined into the first term (in input order) they match, so the
/// result is deterministic.
pub fn merge_terms(s: &CsState, tol: f64) -> CsState {
    let tol = tol.max(0.0);
    let mut merged: Vec<CoherentTerm> = Vec::with_capacity(s.terms.len());
    for t in &s.terms {
        match merged
            .iter_mut()
            .find(|m| amp_distance(&m.amps, &t.amps) <= tol)
        {
            Some(m) => m.coeff += t.coeff,
            None => merged.push(t.clone()),
        }
    }
    let max_coeff = merged.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    let cutoff = tol * max_coeff;
    merged.retain(|t| t.coeff.norm() > cutoff);
    CsState {
        mode_count: s.mode_count,
        terms: merged,
        normalized: false,
    }
}

/// Contract the modes at `positions` against `probe`, leaving a state on the
/// remaining modes (in their original order).
pub fn partial_inner(s: &CsState, positions: &[usize], probe: &CsState) -> Result<CsState> {
    if probe.mode_count != positions.len() {
        return Err(Error::Shape(format!(
            "probe has {} modes, {} positions given",
            probe.mode_count,
            positions.len()
        )));
    }
    let mut is_probed = vec![false; s.mode_count];
    for &p in positions {
        if p >= s.mode_count || is_probed[p] {
            return Err(Error::Shape(format!("bad probe position {p}")));
        }
        is_probed[p] = true;
    }
    let mut terms = Vec::with_capacity(s.terms.len() * probe.terms.len());
    for t in &s.terms {
        let picked: Vec<Complex64> = positions.iter().map(|&p| t.amps[p]).collect();
        let rest: Vec<Complex64> = t
            .amps
            .iter()
            .enumerate()
            .filter(|(k, _)| !is_probed[*k])
            .map(|(_, a)| *a)
            .collect();
        for p in &probe.terms {
            let w = p.coeff.conj() * t.coeff * product_overlap(&p.amps, &picked);
            terms.push(CoherentTerm::new(w, rest.clone()));
        }
    }
    let out = CsState {
        mode_count: s.mode_count - positions.len(),
        terms,
        normalized: false,
    };
    Ok(merge_terms(&out, DEFAULT_MERGE_TOL))
}

/// Normalization constants of the cat and GHZ-type coherent states.
///
/// `k` is the number of modes of the GHZ-type state `|α⟩^⊗k ± |−α⟩^⊗k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `(1 + e^{-2|α|²})^{-1/2}`, the even cat weight.
    N0,
    /// `(1 - e^{-2|α|²})^{-1/2}`, the odd cat weight.
    N0p,
    /// `[2(1 + e^{-2k|α|²})]^{-1/2}`.
    NkPlus(u32),
    /// `[2(1 - e^{-2k|α|²})]^{-1/2}`.
    NkMinus(u32),
}

/// Closed-form normalization constant for `kind` at real amplitude `alpha`.
pub fn norm_const(kind: NormKind, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    let a2 = alpha * alpha;
    let (scale, exponent, plus) = match kind {
        NormKind::N0 => (1.0, 2.0 * a2, true),
        NormKind::N0p => (1.0, 2.0 * a2, false),
        NormKind::NkPlus(k) | NormKind::NkMinus(k) => {
            if k == 0 {
                return Err(Error::Domain("GHZ-type state needs k >= 1 modes".into()));
            }
            (
                2.0,
                2.0 * k as f64 * a2,
                matches!(kind, NormKind::NkPlus(_)),
            )
        }
    };
    let bracket = if plus {
        1.0 + (-exponent).exp()
    } else {
        // 1 - e^{-x} without cancellation
        -(-exponent).exp_m1()
    };
    if bracket <= 1e-15 {
        return Err(Error::Domain(format!(
            "{kind:?} at alpha={alpha}: 1 - e^(-{exponent}) underflows"
        )));
    }
    Ok((scale * bracket).powf(-0.5))
}
