use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{commutator_projector, FourierSeries, ProjectorSpec};

/// Largest `‖∂^p [a, P] ∂^q v‖ / ‖v‖` over random `v` at several band limits.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorStudy {
    pub modes: Vec<usize>,
    pub max_ratios: Vec<f64>,
    /// `max_ratios[i + 1] / max_ratios[i]`.
    pub growth: Vec<f64>,
}

impl CommutatorStudy {
    pub fn max_growth(&self) -> f64 {
        self.growth.iter().copied().fold(0.0, f64::max)
    }
}

/// Random complex `v` with i.i.d. Gaussian coefficients on `−K..=K`.
fn random_series(rng: &mut ChaCha8Rng, k: usize) -> FourierSeries {
    let k = k as i64;
    let coeffs = (-k..=k)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    FourierSeries::new(-k, coeffs)
}

pub fn admissible_ratio_study(
    symbol: &FourierSeries,
    projector: &ProjectorSpec,
    p: u32,
    q: u32,
    modes: &[usize],
    samples: usize,
    seed: u64,
) -> Result<CommutatorStudy> {
    if modes.is_empty() || samples == 0 {
        return Err(Error::config("commutator", "need at least one band limit and one sample"));
    }
    let mut max_ratios = Vec::with_capacity(modes.len());
    for &k in modes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let v = random_series(&mut rng, k);
            let c = commutator_projector(symbol, projector, p, q, &v)?;
            worst = worst.max(c.norm() / v.norm());
        }
        max_ratios.push(worst);
    }
    let growth = max_ratios.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(CommutatorStudy {
        modes: modes.to_vec(),
        max_ratios,
        growth,
    })
}

/// `‖[e^{ix}, P_{1+2ℤ}] ∂_x e^{2imx}‖ / ‖e^{2imx}‖` for each probe index `m`.
pub fn odd_progression_ratios(probes: &[i64]) -> Result<Vec<f64>> {
    let a = FourierSeries::exponential(1, Complex64::new(1.0, 0.0));
    let odd = ProjectorSpec::ArithmeticProgression { offset: 1, stride: 2 };
    probes
        .iter()
        .map(|&m| {
            let v = FourierSeries::exponential(2 * m, Complex64::new(1.0, 0.0));
            Ok(commutator_projector(&a, &odd, 0, 1, &v)?.norm() / v.norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_projector_ratio_stays_bounded() {
        let a = FourierSeries::new(
            -2,
            vec![
                Complex64::new(0.1, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.1, 0.0),
            ],
        );
        let study = admissible_ratio_study(&a, &ProjectorSpec::PositiveModes, 1, 1, &[32, 64, 128], 20, 1).unwrap();
        assert!(study.max_growth() < 1.1, "{:?}", study.max_ratios);
    }

    #[test]
    fn odd_progression_grows_linearly() {
        let r = odd_progression_ratios(&[1, 2, 4, 8]).unwrap();
        for (m, v) in [1.0, 2.0, 4.0, 8.0].iter().zip(&r) {
            assert!((v - 2.0 * m).abs() < 1e-12);
        }
    }
}
