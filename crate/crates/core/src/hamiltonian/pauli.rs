use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One Pauli letter per site; site 0 is the leftmost letter and the most
/// significant bit of a basis-state index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString(letters)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// String with `ops` placed at the given sites and identity elsewhere.
    pub fn with_ops(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut v = vec![Pauli::I; n];
        for &(site, p) in ops {
            v[site] = p;
        }
        PauliString(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn action(&self) -> PauliAction {
        PauliAction::new(self)
    }

    /// Whether the two strings commute as operators.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("empty Pauli string"));
        }
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::invalid(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bit-mask form of a Pauli string: `P|b> = i^ny (-1)^popcount(b & z) |b ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub phase: C64,
}

impl PauliAction {
    fn new(p: &PauliString) -> Self {
        let n = p.len();
        let (mut x_mask, mut z_mask, mut ny) = (0usize, 0usize, 0u32);
        for (site, &l) in p.letters().iter().enumerate() {
            let bit = 1usize << (n - 1 - site);
            match l {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    ny += 1;
                }
            }
        }
        let phase = match ny % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        PauliAction { x_mask, z_mask, phase }
    }

    /// Amplitude of `P|b>` on `|b ^ x_mask>`.
    #[inline]
    pub fn factor(&self, b: usize) -> C64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }

    /// `out = P v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (b, &a) in v.iter().enumerate() {
            out[b ^ self.x_mask] = self.factor(b) * a;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub letters: PauliString,
}

/// Weighted sum of Pauli strings with merged, non-zero, lexicographically
/// sorted terms. Real coefficients make it Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    num_sites: usize,
    terms: Vec<PauliTerm>,
    actions: Vec<PauliAction>,
}

impl PauliHamiltonian {
    pub fn new(num_sites: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::invalid("Hamiltonian needs at least one site"));
        }
        if num_sites > 30 {
            return Err(Error::SizeOverCap { what: "Pauli Hamiltonian", got: num_sites, cap: 30 });
        }
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for t in terms {
            if t.letters.len() != num_sites {
                return Err(Error::invalid(format!(
                    "term {} has {} letters, expected {num_sites}",
                    t.letters,
                    t.letters.len()
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::invalid(format!("non-finite coefficient on {}", t.letters)));
            }
            *merged.entry(t.letters).or_insert(0.0) += t.coefficient;
        }
        let terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(letters, coefficient)| PauliTerm { coefficient, letters })
            .collect();
        let actions = terms.iter().map(|t| t.letters.action()).collect();
        Ok(Self { num_sites, terms, actions })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Sum of absolute coefficients, an upper bound on the spectral radius.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// `H v`, term by term, without forming the matrix.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(v.len())?;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        let terms = &self.terms;
        let actions = &self.actions;
        // gather form: out[b] = sum_t c_t * factor_t(b ^ x_t) * v[b ^ x_t]
        let kernel = |b: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for (t, a) in terms.iter().zip(actions) {
                let src = b ^ a.x_mask;
                acc += a.factor(src) * v[src] * t.coefficient;
            }
            acc
        };
        if out.len() >= 1 << 12 {
            crate::parallel::fill_indexed(out, kernel);
        } else {
            for (b, o) in out.iter_mut().enumerate() {
                *o = kernel(b);
            }
        }
    }

    /// `<v|H|v>` without normalization.
    pub fn quadratic_form(&self, v: &[C64]) -> Result<f64> {
        let hv = self.apply(v)?;
        Ok(v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Dense matrix in the computational basis.
    pub fn to_dense(&self) -> Array2<C64> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (t, a) in self.terms.iter().zip(&self.actions) {
            for b in 0..d {
                m[[b ^ a.x_mask, b]] += a.factor(b) * t.coefficient;
            }
        }
        m
    }

    /// The diagonal of the matrix, i.e. the contribution of I/Z-only terms.
    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        let mut diag = vec![0.0; d];
        for (t, a) in self.terms.iter().zip(&self.actions) {
            if a.x_mask == 0 {
                for (b, x) in diag.iter_mut().enumerate() {
                    *x += (a.factor(b) * t.coefficient).re;
                }
            }
        }
        diag
    }
}
