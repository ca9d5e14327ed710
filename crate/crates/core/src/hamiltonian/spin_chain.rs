use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliHamiltonian, PauliString, PauliTerm};
use crate::error::{Error, Result};

/// Open spin-1/2 chain
/// `H = sum_i sum_a J_a S_i^a S_{i+1}^a - sum_i (h_x S_i^x + h_z S_i^z)`
/// with `S = sigma / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainSpec {
    #[serde(rename = "L")]
    pub l: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub hx: f64,
    pub hz: f64,
}

impl SpinChainSpec {
    pub fn new(l: usize, [jx, jy, jz, hx, hz]: [f64; 5]) -> Self {
        Self { l, jx, jy, jz, hx, hz }
    }

    pub fn heisenberg_xxx(l: usize) -> Self {
        Self::new(l, [1.0, 1.0, 1.0, 0.0, 0.0])
    }

    pub fn gapless_xxz(l: usize) -> Self {
        Self::new(l, [1.0, 1.0, 0.5, 0.0, 0.0])
    }

    pub fn critical_tfim(l: usize) -> Self {
        Self::new(l, [0.0, 0.0, 1.0, 0.5, 0.0])
    }

    pub fn critical_xx(l: usize) -> Self {
        Self::new(l, [1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn couplings(&self) -> [f64; 5] {
        [self.jx, self.jy, self.jz, self.hx, self.hz]
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::invalid(format!("spin chain needs L >= 2, got {}", self.l)));
        }
        if self.couplings().iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("spin chain couplings must be finite"));
        }
        Ok(())
    }
}

pub fn build_spin_chain(spec: &SpinChainSpec) -> Result<PauliHamiltonian> {
    spec.validate()?;
    let l = spec.l;
    let mut terms = Vec::new();
    let bonds = [(Pauli::X, spec.jx), (Pauli::Y, spec.jy), (Pauli::Z, spec.jz)];
    for i in 0..l - 1 {
        for &(p, j) in &bonds {
            if j != 0.0 {
                terms.push(PauliTerm { coefficient: j / 4.0, letters: PauliString::with_ops(l, &[(i, p), (i + 1, p)]) });
            }
        }
    }
    for i in 0..l {
        for &(p, h) in &[(Pauli::X, spec.hx), (Pauli::Z, spec.hz)] {
            if h != 0.0 {
                terms.push(PauliTerm { coefficient: -h / 2.0, letters: PauliString::with_ops(l, &[(i, p)]) });
            }
        }
    }
    PauliHamiltonian::new(l, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_heisenberg_terms() {
        let h = build_spin_chain(&SpinChainSpec::heisenberg_xxx(2)).unwrap();
        let got: Vec<(String, f64)> = h.terms().iter().map(|t| (t.letters.to_string(), t.coefficient)).collect();
        assert_eq!(got, vec![("XX".into(), 0.25), ("YY".into(), 0.25), ("ZZ".into(), 0.25)]);
    }

    #[test]
    fn term_counts() {
        for l in 2..9 {
            let xxx = build_spin_chain(&SpinChainSpec::heisenberg_xxx(l)).unwrap();
            assert_eq!(xxx.terms().len(), 3 * (l - 1));
            let tfim = build_spin_chain(&SpinChainSpec::critical_tfim(l)).unwrap();
            assert_eq!(tfim.terms().len(), (l - 1) + l);
            let both = build_spin_chain(&SpinChainSpec::new(l, [1.0, 0.0, 0.0, 0.3, 0.2])).unwrap();
            assert_eq!(both.terms().len(), (l - 1) + 2 * l);
        }
    }

    #[test]
    fn field_sign() {
        let h = build_spin_chain(&SpinChainSpec::new(2, [0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(h.terms().iter().all(|t| t.coefficient == -0.5));
    }

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(build_spin_chain(&SpinChainSpec::heisenberg_xxx(1)).is_err());
        assert!(build_spin_chain(&SpinChainSpec::new(4, [f64::NAN, 0.0, 0.0, 0.0, 0.0])).is_err());
    }
}
