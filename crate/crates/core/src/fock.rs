//! Truncated photon-number simulator for small circuits.
//!
//! Everything here works on dense amplitude arrays in the number basis with a
//! per-mode cutoff, independently of the coherent-label representation used by
//! the engine. It is slow and limited to four modes, and exists to cross-check
//! the analytic simulator.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::coherent::CsState;
use crate::engine::{validate, Circuit, Instruction, RunError};
use crate::error::{Error, Result};

pub const DEFAULT_NMAX: usize = 40;
pub const MAX_FOCK_MODES: usize = 4;
/// Largest norm a truncated coherent expansion may lose.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense state on `mode_count` modes, row-major with mode 0 most significant.
/// A tensor with zero modes is a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct FockTensor {
    n_max: usize,
    mode_count: usize,
    amps: Vec<Complex64>,
}

/// `e^{−|α|²/2} αⁿ/√(n!)` for `n = 0..=n_max`.
pub fn coherent_fock(alpha: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be >= 1".into()));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite amplitude {alpha}")));
    }
    let mut v = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        v.push(c);
    }
    let lost = 1.0 - v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    if lost > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            lost,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(v)
}

impl FockTensor {
    pub fn scalar(n_max: usize, value: Complex64) -> Self {
        FockTensor {
            n_max,
            mode_count: 0,
            amps: vec![value],
        }
    }

    pub fn vacuum(n_max: usize, mode_count: usize) -> Result<Self> {
        let mut t = FockTensor::scalar(n_max, Complex64::new(1.0, 0.0));
        for _ in 0..mode_count {
            t = t.append_mode(&unit(n_max, 0))?;
        }
        Ok(t)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    fn dim(&self) -> usize {
        self.n_max + 1
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim().pow((self.mode_count - 1 - mode) as u32)
    }

    fn digit(&self, flat: usize, mode: usize) -> usize {
        (flat / self.stride(mode)) % self.dim()
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.mode_count {
            return Err(Error::Shape(format!(
                "mode index {i} out of range for {} modes",
                self.mode_count
            )));
        }
        Ok(())
    }

    /// Amplitude of the number state `|n_0, n_1, …⟩`.
    pub fn get(&self, occupation: &[usize]) -> Complex64 {
        let flat = occupation.iter().fold(0, |acc, &n| acc * self.dim() + n);
        self.amps[flat]
    }

    /// Tensor a new last mode in state `v` onto this one.
    pub fn append_mode(&self, v: &[Complex64]) -> Result<Self> {
        if self.mode_count >= MAX_FOCK_MODES {
            return Err(Error::ModeCap {
                cap: MAX_FOCK_MODES,
                requested: self.mode_count + 1,
            });
        }
        if v.len() != self.dim() {
            return Err(Error::Shape(format!(
                "mode vector has {} entries, expected {}",
                v.len(),
                self.dim()
            )));
        }
        let mut amps = Vec::with_capacity(self.amps.len() * v.len());
        for a in &self.amps {
            amps.extend(v.iter().map(|x| a * x));
        }
        Ok(FockTensor {
            n_max: self.n_max,
            mode_count: self.mode_count + 1,
            amps,
        })
    }

    pub fn scale(&self, f: Complex64) -> Self {
        FockTensor {
            amps: self.amps.iter().map(|a| a * f).collect(),
            ..self.clone()
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= 1e-12 {
            return Err(Error::ZeroState(n));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Rearrange modes so that new mode `k` is old mode `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.mode_count];
        if order.len() != self.mode_count
            || order
                .iter()
                .any(|&k| k >= self.mode_count || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::Shape(format!(
                "{order:?} is not a permutation of {} modes",
                self.mode_count
            )));
        }
        let strides: Vec<usize> = order.iter().map(|&k| self.stride(k)).collect();
        let mut amps = vec![ZERO; self.amps.len()];
        for (flat, slot) in amps.iter_mut().enumerate() {
            let mut old = 0;
            let mut rest = flat;
            for s in strides.iter().rev() {
                old += (rest % self.dim()) * s;
                rest /= self.dim();
            }
            *slot = self.amps[old];
        }
        Ok(FockTensor {
            amps,
            ..self.clone()
        })
    }

    /// Flat offsets with zero photons in every mode of `modes`.
    fn bases(&self, modes: &[usize]) -> Vec<usize> {
        (0..self.amps.len())
            .filter(|&f| modes.iter().all(|&m| self.digit(f, m) == 0))
            .collect()
    }
}

fn unit(n_max: usize, n: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; n_max + 1];
    v[n] = Complex64::new(1.0, 0.0);
    v
}

/// `⟨a|b⟩`.
pub fn fock_inner(a: &FockTensor, b: &FockTensor) -> Result<Complex64> {
    if a.n_max != b.n_max || a.mode_count != b.mode_count {
        return Err(Error::Shape("Fock tensors have different shapes".into()));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Beam-splitter matrices per total photon number `N = 0..=2·n_max`.
///
/// `blocks[N][n1][k]` is the amplitude of `|k, N−k⟩` in the image of
/// `|n1, N−n1⟩`, built by applying `(a†±b†)/√2` one photon at a time.
fn bs_blocks(n_max: usize) -> Vec<Vec<Vec<f64>>> {
    let top = 2 * n_max;
    let mut blocks: Vec<Vec<Vec<f64>>> = vec![vec![vec![1.0]]];
    for n in 1..=top {
        let prev = &blocks[n - 1];
        // raise the first or second mode of a block-(n−1) vector
        let raise = |v: &[f64], sign: f64| {
            let mut out = vec![0.0; n + 1];
            for (k, &x) in v.iter().enumerate() {
                let l = n - 1 - k;
                out[k + 1] += ((k + 1) as f64).sqrt() * x;
                out[k] += sign * ((l + 1) as f64).sqrt() * x;
            }
            out
        };
        let mut block = Vec::with_capacity(n + 1);
        let mut col = raise(&prev[0], -1.0);
        let s = (2.0 * n as f64).sqrt();
        col.iter_mut().for_each(|x| *x /= s);
        block.push(col);
        for n1 in 1..=n {
            let mut col = raise(&prev[n1 - 1], 1.0);
            let s = (2.0 * n1 as f64).sqrt();
            col.iter_mut().for_each(|x| *x /= s);
            block.push(col);
        }
        blocks.push(block);
    }
    blocks
}

/// 50:50 beam splitter on modes `i`, `j`, mapping coherent labels
/// `(α, β) -> ((α+β)/√2, (α−β)/√2)`. Output components beyond the cutoff
/// are dropped.
pub fn bs_fock(t: &FockTensor, i: usize, j: usize) -> Result<FockTensor> {
    t.check_mode(i)?;
    t.check_mode(j)?;
    if i == j {
        return Err(Error::Shape(format!(
            "beam splitter needs two distinct modes, got {i} twice"
        )));
    }
    let nm = t.n_max;
    let (si, sj) = (t.stride(i), t.stride(j));
    let blocks = bs_blocks(nm);
    let mut amps = vec![ZERO; t.amps.len()];
    let mut input = Vec::with_capacity(nm + 1);
    for base in t.bases(&[i, j]) {
        for (total, block) in blocks.iter().enumerate() {
            let lo = total.saturating_sub(nm);
            let hi = total.min(nm);
            input.clear();
            input.extend((lo..=hi).map(|n1| t.amps[base + n1 * si + (total - n1) * sj]));
            if input.iter().all(|x| *x == ZERO) {
                continue;
            }
            for k in lo..=hi {
                let mut acc = ZERO;
                for (x, col) in input.iter().zip(&block[lo..=hi]) {
                    acc += x * col[k];
                }
                amps[base + k * si + (total - k) * sj] = acc;
            }
        }
    }
    Ok(FockTensor { amps, ..t.clone() })
}

/// Coherent-qubit Hadamard on mode `i` as the rank-2 operator
/// `Σ_s |H u_s⟩⟨d_s|`, with `u_± = |±α⟩` and `d_s` their dual basis computed
/// from the truncated vectors. The result is renormalized.
pub fn hadamard_fock(t: &FockTensor, i: usize, alpha_ref: f64) -> Result<FockTensor> {
    t.check_mode(i)?;
    let nm = t.n_max;
    let up = coherent_fock(Complex64::new(alpha_ref, 0.0), nm)?;
    let um = coherent_fock(Complex64::new(-alpha_ref, 0.0), nm)?;
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let (g00, g01, g11) = (dot(&up, &up), dot(&up, &um), dot(&um, &um));
    let det = g00 * g11 - g01 * g01.conj();
    if det.norm() <= 1e-15 {
        return Err(Error::Domain(format!(
            "|±{alpha_ref}⟩ are numerically parallel"
        )));
    }
    // G⁻¹ = [[g11, −g01], [−g10, g00]] / det
    let inv = [[g11 / det, -g01 / det], [-g01.conj() / det, g00 / det]];
    let combine = |a: Complex64, b: Complex64| -> Vec<Complex64> {
        up.iter().zip(&um).map(|(x, y)| x * a + y * b).collect()
    };
    let duals = [combine(inv[0][0], inv[1][0]), combine(inv[0][1], inv[1][1])];

    // images H|α⟩ and H|−α⟩ use the analytic cat normalizations
    let e = (-2.0 * alpha_ref * alpha_ref).exp();
    let n0 = (1.0 + e).powf(-0.5);
    let n0p = (-(-2.0 * alpha_ref * alpha_ref).exp_m1()).powf(-0.5);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let images = [
        combine(Complex64::new(n0 * r, 0.0), Complex64::new(n0 * r, 0.0)),
        combine(Complex64::new(n0p * r, 0.0), Complex64::new(-n0p * r, 0.0)),
    ];

    let si = t.stride(i);
    let mut amps = vec![ZERO; t.amps.len()];
    for base in t.bases(&[i]) {
        let fiber: Vec<Complex64> = (0..=nm).map(|n| t.amps[base + n * si]).collect();
        let w = [dot(&duals[0], &fiber), dot(&duals[1], &fiber)];
        for n in 0..=nm {
            amps[base + n * si] = w[0] * images[0][n] + w[1] * images[1][n];
        }
    }
    FockTensor { amps, ..t.clone() }.normalized()
}

/// Keep the zero-photon slice of mode `i`, drop that mode and renormalize.
/// Returns the slice's squared norm as the outcome probability.
pub fn vacuum_project_fock(t: &FockTensor, i: usize) -> Result<(FockTensor, f64)> {
    t.check_mode(i)?;
    let amps: Vec<Complex64> = t.bases(&[i]).into_iter().map(|f| t.amps[f]).collect();
    let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if prob <= 1e-14 {
        return Err(Error::ZeroProbability { mode: i, prob });
    }
    let out = FockTensor {
        n_max: t.n_max,
        mode_count: t.mode_count - 1,
        amps,
    };
    Ok((out.normalized()?, prob))
}

/// Expand a coherent superposition in the truncated number basis.
pub fn csstate_to_fock(s: &CsState, n_max: usize) -> Result<FockTensor> {
    if s.mode_count() > MAX_FOCK_MODES {
        return Err(Error::ModeCap {
            cap: MAX_FOCK_MODES,
            requested: s.mode_count(),
        });
    }
    let mut acc: Option<FockTensor> = None;
    for term in s.terms() {
        let mut t = FockTensor::scalar(n_max, term.coeff);
        for &a in &term.amps {
            t = t.append_mode(&coherent_fock(a, n_max)?)?;
        }
        acc = Some(match acc {
            None => t,
            Some(mut sum) => {
                sum.amps.iter_mut().zip(&t.amps).for_each(|(x, y)| *x += y);
                sum
            }
        });
    }
    match acc {
        Some(t) => Ok(t),
        None => {
            let v = FockTensor::vacuum(n_max, s.mode_count())?;
            Ok(v.scale(ZERO))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockRun {
    pub state: FockTensor,
    pub mode_order: Vec<String>,
    pub p_success: f64,
    pub selection_probs: Vec<f64>,
    pub peak_modes: usize,
}

impl FockRun {
    /// The final tensor with its modes rearranged to follow `names`.
    pub fn state_in_order<S: AsRef<str>>(&self, names: &[S]) -> Result<FockTensor> {
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
            .collect::<Result<Vec<_>>>()?;
        self.state.permute(&order)
    }
}

/// Run `c` in the number basis, selecting exactly (every selection projects
/// onto zero photons). Mirrors the engine's bookkeeping of mode names.
pub fn run_fock(c: &Circuit, n_max: usize) -> std::result::Result<FockRun, RunError> {
    let diags = validate(c);
    if !diags.is_empty() {
        return Err(RunError::Invalid(diags));
    }
    let mut state = FockTensor::scalar(n_max, Complex64::new(1.0, 0.0));
    let mut names: Vec<String> = Vec::new();
    let mut positions: HashMap<String, usize> = HashMap::new();
    let mut probs = Vec::new();
    let mut peak_modes = 0;
    for (index, ins) in c.instructions.iter().enumerate() {
        let step = |e: Error| RunError::Step { index, source: e };
        state = match ins {
            Instruction::Prep { mode, amplitude } => {
                let v = coherent_fock(*amplitude, n_max).map_err(step)?;
                let next = state.append_mode(&v).map_err(step)?;
                positions.insert(mode.clone(), names.len());
                names.push(mode.clone());
                next
            }
            Instruction::Hadamard { mode, alpha_ref } => {
                hadamard_fock(&state, positions[mode], *alpha_ref).map_err(step)?
            }
            Instruction::Bs { first, second } => {
                bs_fock(&state, positions[first], positions[second]).map_err(step)?
            }
            Instruction::Split { source, new_mode } => {
                let src = positions[source];
                let widened = state.append_mode(&unit(n_max, 0)).map_err(step)?;
                positions.insert(new_mode.clone(), names.len());
                names.push(new_mode.clone());
                bs_fock(&widened, src, widened.mode_count() - 1).map_err(step)?
            }
            Instruction::Select0 { mode } => {
                let i = positions[mode];
                let (next, p) = vacuum_project_fock(&state, i).map_err(step)?;
                names.remove(i);
                positions.remove(mode);
                for p in positions.values_mut() {
                    if *p > i {
                        *p -= 1;
                    }
                }
                probs.push(p);
                next
            }
        };
        peak_modes = peak_modes.max(state.mode_count());
    }
    Ok(FockRun {
        state,
        mode_order: names,
        p_success: probs.iter().product(),
        selection_probs: probs,
        peak_modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single(n_max: usize, v: Vec<Complex64>) -> FockTensor {
        FockTensor::scalar(n_max, c(1.0)).append_mode(&v).unwrap()
    }

    fn product(n_max: usize, vs: &[Vec<Complex64>]) -> FockTensor {
        vs.iter().fold(FockTensor::scalar(n_max, c(1.0)), |t, v| {
            t.append_mode(v).unwrap()
        })
    }

    #[test]
    fn coherent_examples() {
        let v = coherent_fock(c(0.0), 40).unwrap();
        assert_eq!(v[0], c(1.0));
        assert!(v[1..].iter().all(|x| *x == ZERO));

        let v = coherent_fock(c(1.0), 40).unwrap();
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);

        let v = coherent_fock(c(2.0), 40).unwrap();
        let lost = 1.0 - v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!(lost <= 1e-10);

        let a = coherent_fock(c(1.0), 40).unwrap();
        let b = coherent_fock(c(-1.0), 40).unwrap();
        let o: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        assert!((o - c((-2.0f64).exp())).norm() < 1e-10);

        assert!(matches!(
            coherent_fock(c(6.0), 20),
            Err(Error::Truncation { .. })
        ));
        assert!(coherent_fock(c(1.0), 0).is_err());
    }

    #[test]
    fn blocks_are_orthogonal() {
        let blocks = bs_blocks(12);
        for block in &blocks {
            for (a, ca) in block.iter().enumerate() {
                for (b, cb) in block.iter().enumerate() {
                    let d: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (d - want).abs() < 1e-12,
                        "N={} ({a},{b}) {d}",
                        block.len() - 1
                    );
                }
            }
        }
    }

    #[test]
    fn bs_examples() {
        let nm = 10;
        let vac = FockTensor::vacuum(nm, 2).unwrap();
        assert_eq!(bs_fock(&vac, 0, 1).unwrap(), vac);

        let one = product(nm, &[unit(nm, 1), unit(nm, 0)]);
        let out = bs_fock(&one, 0, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.get(&[1, 0]) - c(r)).norm() < 1e-12);
        assert!((out.get(&[0, 1]) - c(r)).norm() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);

        // second mode picks up the sign
        let one = product(nm, &[unit(nm, 0), unit(nm, 1)]);
        let out = bs_fock(&one, 0, 1).unwrap();
        assert!((out.get(&[1, 0]) - c(r)).norm() < 1e-12);
        assert!((out.get(&[0, 1]) + c(r)).norm() < 1e-12);

        // Hong–Ou–Mandel: |1,1⟩ -> (|2,0⟩ − |0,2⟩)/√2
        let both = product(nm, &[unit(nm, 1), unit(nm, 1)]);
        let out = bs_fock(&both, 0, 1).unwrap();
        assert!(out.get(&[1, 1]).norm() < 1e-12);
        assert!((out.get(&[2, 0]) - c(r)).norm() < 1e-12);
        assert!((out.get(&[0, 2]) + c(r)).norm() < 1e-12);
    }

    #[test]
    fn bs_on_coherent_pair() {
        let nm = 40;
        let a = coherent_fock(c(1.0), nm).unwrap();
        let t = product(nm, &[a.clone(), a]);
        let out = bs_fock(&t, 0, 1).unwrap();
        let want = product(
            nm,
            &[
                coherent_fock(c(2f64.sqrt()), nm).unwrap(),
                coherent_fock(c(0.0), nm).unwrap(),
            ],
        );
        let diff = out
            .amps()
            .iter()
            .zip(want.amps())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");

        // complex labels, reversed mode order
        let x = Complex64::new(0.3, -0.7);
        let y = Complex64::new(-0.5, 0.2);
        let t = product(
            nm,
            &[coherent_fock(x, nm).unwrap(), coherent_fock(y, nm).unwrap()],
        );
        let out = bs_fock(&t, 1, 0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = product(
            nm,
            &[
                coherent_fock((y - x) * r, nm).unwrap(),
                coherent_fock((x + y) * r, nm).unwrap(),
            ],
        );
        let f = fock_inner(&out, &want).unwrap().norm();
        assert!((f - 1.0).abs() < 1e-10, "{f}");
    }

    #[test]
    fn vacuum_projection_examples() {
        let nm = 40;
        let (out, p) = vacuum_project_fock(&FockTensor::vacuum(nm, 1).unwrap(), 0).unwrap();
        assert_eq!(out.mode_count(), 0);
        assert!((p - 1.0).abs() < 1e-15);

        let t = single(nm, coherent_fock(c(1.0), nm).unwrap());
        let (_, p) = vacuum_project_fock(&t, 0).unwrap();
        assert!((p - (-1.0f64).exp()).abs() < 1e-10);

        let t = single(nm, unit(nm, 3));
        assert!(matches!(
            vacuum_project_fock(&t, 0),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn hadamard_on_basis_states() {
        let nm = 40;
        let alpha = 1.0;
        let e = (-2.0f64).exp();
        let plus = single(nm, coherent_fock(c(alpha), nm).unwrap());
        let minus = single(nm, coherent_fock(c(-alpha), nm).unwrap());
        let hp = hadamard_fock(&plus, 0, alpha).unwrap();
        // H|α⟩ ∝ |α⟩+|−α⟩ has overlap (1+e)/√(2(1+e)) with |α⟩
        let o = fock_inner(&plus, &hp).unwrap();
        assert!((o.re - ((1.0 + e) / 2.0).sqrt()).abs() < 1e-10);
        let hm = hadamard_fock(&minus, 0, alpha).unwrap();
        assert!(fock_inner(&hp, &hm).unwrap().norm() < 1e-10);
        // vacuum lies outside span{|±α⟩}; only its projection survives
        let v = hadamard_fock(&FockTensor::vacuum(nm, 1).unwrap(), 0, alpha).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permute_round_trip() {
        let nm = 5;
        let t = product(nm, &[unit(nm, 1), unit(nm, 2), unit(nm, 3)]);
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.get(&[3, 1, 2]), c(1.0));
        assert!(t.permute(&[0, 0, 1]).is_err());
    }

    #[test]
    fn mode_cap() {
        let t = FockTensor::vacuum(3, 4).unwrap();
        assert!(matches!(
            t.append_mode(&unit(3, 0)),
            Err(Error::ModeCap { .. })
        ));
    }
}
