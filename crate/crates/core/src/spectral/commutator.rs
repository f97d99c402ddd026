//! Commutators of multiplication operators with Fourier projectors,
//! `∂_x^p [a, P] ∂_x^q v`, evaluated by the Fourier double sum.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Error, Result};

/// Largest derivative order accepted on either side of the commutator.
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// Mode set `𝒩 ⊆ ℤ` selected by a projector.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProjectorSpec {
    /// `𝒩 = {k ≥ 1}`.
    PositiveModes,
    /// A finite set of modes.
    FiniteSet { modes: BTreeSet<i64> },
    /// `ℤ` minus a finite set.
    Cofinite { excluded: BTreeSet<i64> },
    /// `offset + stride·ℤ`.
    ArithmeticProgression { offset: i64, stride: i64 },
}

impl ProjectorSpec {
    pub fn contains(&self, k: i64) -> bool {
        match self {
            ProjectorSpec::PositiveModes => k >= 1,
            ProjectorSpec::FiniteSet { modes } => modes.contains(&k),
            ProjectorSpec::Cofinite { excluded } => !excluded.contains(&k),
            ProjectorSpec::ArithmeticProgression { offset, stride } => {
                if *stride == 0 {
                    k == *offset
                } else {
                    (k - offset).rem_euclid(*stride) == 0
                }
            }
        }
    }

    /// Whether the set satisfies the separation condition
    /// `⟨n⟩ + ⟨k⟩ ≤ C⟨n − k⟩` for `n ∉ 𝒩, k ∈ 𝒩`.
    pub fn is_separated(&self) -> bool {
        match self {
            ProjectorSpec::PositiveModes | ProjectorSpec::FiniteSet { .. } | ProjectorSpec::Cofinite { .. } => true,
            ProjectorSpec::ArithmeticProgression { stride, .. } => stride.abs() <= 1,
        }
    }
}

/// Complex trigonometric polynomial `Σ_{k=lo}^{hi} c_k e^{ikx}`, not
/// necessarily real-valued.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    lowest: i64,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn new(lowest: i64, coeffs: Vec<Complex64>) -> Self {
        FourierSeries { lowest, coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        FourierSeries::new(0, vec![c])
    }

    /// `amplitude · e^{imx}`.
    pub fn exponential(m: i64, amplitude: Complex64) -> Self {
        FourierSeries::new(m, vec![amplitude])
    }

    /// Full signed spectrum `−K..=K` of a real field.
    pub fn from_field(u: &SpectralField) -> Self {
        let k = u.modes() as i64;
        FourierSeries::new(-k, (-k..=k).map(|m| u.coeff(m)).collect())
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    pub fn highest(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k - self.lowest;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.lowest + i as i64, *c))
    }

    /// `‖f‖_{L²(𝕋)} = (2π Σ |c_k|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// `∂_x^p [a, P] ∂_x^q v` with `[a, P]v = a·Pv − P(a·v)`:
///
/// `Σ_n (in)^p Σ_k â_{n−k} (ik)^q v̂_k (1_𝒩(k) − 1_𝒩(n)) e^{inx}`.
pub fn commutator_projector(
    symbol: &FourierSeries,
    projector: &ProjectorSpec,
    p: u32,
    q: u32,
    v: &FourierSeries,
) -> Result<FourierSeries> {
    if p > MAX_DERIVATIVE_ORDER || q > MAX_DERIVATIVE_ORDER {
        return Err(Error::Domain(format!(
            "derivative orders p={p}, q={q} exceed the supported maximum {MAX_DERIVATIVE_ORDER}"
        )));
    }
    let lowest = symbol.lowest() + v.lowest();
    let highest = symbol.highest() + v.highest();
    let mut out = vec![Complex64::new(0.0, 0.0); (highest - lowest + 1) as usize];
    for (k, vk) in v.iter() {
        if vk == Complex64::new(0.0, 0.0) {
            continue;
        }
        let in_k = projector.contains(k);
        let vq = vk * Complex64::new(0.0, k as f64).powu(q);
        for (l, al) in symbol.iter() {
            let n = k + l;
            let jump = in_k as i32 - projector.contains(n) as i32;
            if jump != 0 {
                out[(n - lowest) as usize] += al * vq * jump as f64;
            }
        }
    }
    for (i, c) in out.iter_mut().enumerate() {
        let n = lowest + i as i64;
        *c *= Complex64::new(0.0, n as f64).powu(p);
    }
    Ok(FourierSeries::new(lowest, out))
}
