use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzFamily, AnsatzSpec, Circuit};
use super::run::energy;
use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::parallel;

/// Central-difference step for the sampled derivative.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientStats {
    pub mean: f64,
    /// Unbiased sample variance of the derivative.
    pub variance: f64,
    /// Standard error of `variance` from the sample fourth moment.
    pub variance_stderr: f64,
    pub num_samples: usize,
}

/// Samples parameters uniformly in `[-pi, pi]` and returns statistics of
/// the central-difference derivative with respect to parameter 0. Sample
/// `i` draws from its own stream so the result is independent of
/// scheduling.
pub fn gradient_variance(h: &PauliHamiltonian, ansatz: &AnsatzSpec, num_samples: usize, seed: u64) -> Result<GradientStats> {
    if num_samples < 2 {
        return Err(Error::invalid("gradient variance needs at least 2 samples"));
    }
    let circuit = Circuit::compile(ansatz)?;
    let p = circuit.num_params();
    if p == 0 {
        return Err(Error::invalid("ansatz has no parameters"));
    }
    let samples: Vec<Result<f64>> = parallel::map_indexed(num_samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut x: Vec<f64> = (0..p).map(|_| rng.random_range(-PI..PI)).collect();
        let x0 = x[0];
        x[0] = x0 + FD_STEP;
        let up = energy(h, &circuit.prepare(&x)?)?;
        x[0] = x0 - FD_STEP;
        let down = energy(h, &circuit.prepare(&x)?)?;
        Ok((up - down) / (2.0 * FD_STEP))
    });
    let d: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let m2 = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = d.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    let variance_stderr = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    Ok(GradientStats { mean, variance, variance_stderr, num_samples })
}

/// Analytic derivative of the energy with respect to parameter `index`.
///
/// Pool generators must square to the identity, which holds for every
/// Pauli string. A pool rotation `exp(-i a P)` has period pi in `a`, so the
/// shift is pi/4; the hardware-efficient `Ry`/`Rz` gates use half angles
/// and take the familiar pi/2 shift.
pub fn parameter_shift_derivative(h: &PauliHamiltonian, ansatz: &AnsatzSpec, params: &[f64], index: usize) -> Result<f64> {
    let circuit = Circuit::compile(ansatz)?;
    if index >= circuit.num_params() {
        return Err(Error::invalid(format!("parameter index {index} out of range")));
    }
    let e = |x: &[f64], off: Option<(usize, f64)>| -> Result<f64> { energy(h, &circuit.prepare_with_offset(x, off)?) };
    match ansatz.family {
        AnsatzFamily::HeaRyrzRing { .. } => {
            let mut x = params.to_vec();
            x[index] = params[index] + FRAC_PI_2;
            let up = e(&x, None)?;
            x[index] = params[index] - FRAC_PI_2;
            let down = e(&x, None)?;
            Ok(0.5 * (up - down))
        }
        AnsatzFamily::PauliPool { .. } => {
            let mut total = 0.0;
            for k in 0..circuit.num_generators() {
                let (tie, coef) = circuit.generator_tie(k).expect("pool generator");
                if tie != index {
                    continue;
                }
                let up = e(params, Some((k, FRAC_PI_4)))?;
                let down = e(params, Some((k, -FRAC_PI_4)))?;
                total += coef * (up - down);
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_spin_chain, PauliString, PauliTerm, SpinChainSpec};
    use crate::vqe::{exchange_pool, InitPolicy, PoolSource};

    fn z1() -> PauliHamiltonian {
        PauliHamiltonian::new(1, [PauliTerm { coefficient: 1.0, letters: "Z".parse::<PauliString>().unwrap() }]).unwrap()
    }

    fn hea1() -> AnsatzSpec {
        AnsatzSpec { family: AnsatzFamily::HeaRyrzRing { layers: 1 }, reference: "0".into(), init: InitPolicy::Zeros, seed: 0 }
    }

    #[test]
    fn ry_derivative_variance_is_one_half() {
        let s = gradient_variance(&z1(), &hea1(), 4000, 11).unwrap();
        assert!((s.variance - 0.5).abs() < 3.0 * s.variance_stderr, "{s:?}");
    }

    #[test]
    fn commuting_generator_has_zero_variance() {
        let pool = vec![crate::vqe::PoolGenerator { tie: 0, coefficient: 1.0, letters: "Z".parse().unwrap() }];
        let a = AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Generators(pool) },
            reference: "0".into(),
            init: InitPolicy::Zeros,
            seed: 0,
        };
        let s = gradient_variance(&z1(), &a, 50, 2).unwrap();
        assert!(s.variance.abs() < 1e-10);
    }

    #[test]
    fn needs_two_samples_and_parameters() {
        assert!(gradient_variance(&z1(), &hea1(), 1, 0).is_err());
        let empty = AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Generators(vec![]) },
            reference: "0".into(),
            init: InitPolicy::Zeros,
            seed: 0,
        };
        assert!(gradient_variance(&z1(), &empty, 10, 0).is_err());
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        let h = build_spin_chain(&SpinChainSpec::heisenberg_xxx(4)).unwrap();
        let pool = AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Generators(exchange_pool(4, 2)) },
            reference: "0101".into(),
            init: InitPolicy::Zeros,
            seed: 0,
        };
        let hea = AnsatzSpec { family: AnsatzFamily::HeaRyrzRing { layers: 2 }, reference: "0101".into(), init: InitPolicy::Zeros, seed: 0 };
        for a in [pool, hea] {
            let c = Circuit::compile(&a).unwrap();
            let x: Vec<f64> = (0..c.num_params()).map(|i| 0.37 * i as f64 - 0.8).collect();
            for idx in 0..c.num_params() {
                let ps = parameter_shift_derivative(&h, &a, &x, idx).unwrap();
                let mut xp = x.clone();
                xp[idx] += 1e-5;
                let mut xm = x.clone();
                xm[idx] -= 1e-5;
                let fd = (energy(&h, &c.prepare(&xp).unwrap()).unwrap() - energy(&h, &c.prepare(&xm).unwrap()).unwrap()) / 2e-5;
                assert!((ps - fd).abs() < 1e-6, "idx {idx}: {ps} vs {fd}");
            }
        }
    }
}
