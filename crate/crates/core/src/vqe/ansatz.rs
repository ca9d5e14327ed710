use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliAction, PauliString};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolGenerator {
    /// Parameter index this generator's angle is tied to.
    pub tie: usize,
    #[serde(default = "one")]
    pub coefficient: f64,
    pub letters: PauliString,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    /// Nearest-neighbour `XY - YX` rotations.
    Hopping,
    /// Nearest and next-nearest neighbour `XY - YX` rotations.
    Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSource {
    Generators(Vec<PoolGenerator>),
    Builtin { kind: PoolKind, layers: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzFamily {
    /// Layers of per-site `Ry` then `Rz`, followed by a CNOT ring.
    HeaRyrzRing { layers: usize },
    /// Ordered product of `exp(-i c_k theta_t(k) P_k)`.
    PauliPool { pool: PoolSource },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    Gaussian { scale: f64 },
    Zeros,
    WarmStart(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    /// Computational-basis reference, site 0 first, e.g. `"0101"`.
    pub reference: String,
    pub init: InitPolicy,
    #[serde(default)]
    pub seed: u64,
}

fn hopping_pairs(n: usize, reach: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if reach >= 2 {
        pairs.extend((0..n.saturating_sub(2)).map(|i| (i, i + 2)));
    }
    pairs
}

fn pair_pool(n: usize, layers: usize, reach: usize) -> Vec<PoolGenerator> {
    let mut out = Vec::new();
    let mut tie = 0;
    for _ in 0..layers {
        for (i, j) in hopping_pairs(n, reach) {
            out.push(PoolGenerator { tie, coefficient: 1.0, letters: PauliString::with_ops(n, &[(i, Pauli::X), (j, Pauli::Y)]) });
            out.push(PoolGenerator { tie, coefficient: -1.0, letters: PauliString::with_ops(n, &[(i, Pauli::Y), (j, Pauli::X)]) });
            tie += 1;
        }
    }
    out
}

/// Nearest-neighbour particle-conserving rotations, one parameter per bond
/// and layer.
pub fn hopping_pool(n: usize, layers: usize) -> Vec<PoolGenerator> {
    pair_pool(n, layers, 1)
}

/// Hopping plus next-nearest-neighbour rotations. The extra range breaks
/// the free-fermion structure of the nearest-neighbour pool, so interacting
/// chain ground states become reachable.
pub fn exchange_pool(n: usize, layers: usize) -> Vec<PoolGenerator> {
    pair_pool(n, layers, 2)
}

/// Pool file: `<tie_index> [<coefficient>] <letters>` per line.
pub fn parse_pool_file(text: &str) -> Result<Vec<PoolGenerator>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Parse { line: line_no, msg };
        let (tie, coef, letters) = match fields.as_slice() {
            [t, l] => (*t, "1", *l),
            [t, c, l] => (*t, *c, *l),
            _ => return Err(bad("expected `<tie_index> [<coefficient>] <letters>`".into())),
        };
        let tie: usize = tie.parse().map_err(|_| bad(format!("bad tie index {tie:?}")))?;
        let coefficient: f64 = coef.parse().map_err(|_| bad(format!("bad coefficient {coef:?}")))?;
        let letters: PauliString = letters.parse().map_err(|e: Error| bad(e.to_string()))?;
        out.push(PoolGenerator { tie, coefficient, letters });
    }
    Ok(out)
}

impl AnsatzSpec {
    pub fn num_sites(&self) -> usize {
        self.reference.len()
    }

    pub fn generators(&self) -> Option<Vec<PoolGenerator>> {
        match &self.family {
            AnsatzFamily::HeaRyrzRing { .. } => None,
            AnsatzFamily::PauliPool { pool: PoolSource::Generators(g) } => Some(g.clone()),
            AnsatzFamily::PauliPool { pool: PoolSource::Builtin { kind, layers } } => Some(match kind {
                PoolKind::Hopping => hopping_pool(self.num_sites(), *layers),
                PoolKind::Exchange => exchange_pool(self.num_sites(), *layers),
            }),
        }
    }

    pub fn num_params(&self) -> usize {
        match &self.family {
            AnsatzFamily::HeaRyrzRing { layers } => 2 * self.num_sites() * layers,
            AnsatzFamily::PauliPool { .. } => {
                self.generators().unwrap_or_default().iter().map(|g| g.tie + 1).max().unwrap_or(0)
            }
        }
    }

    pub fn reference_index(&self) -> Result<usize> {
        let mut idx = 0usize;
        for c in self.reference.chars() {
            idx = (idx << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::invalid(format!("reference bitstring has {c:?}"))),
                };
        }
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_sites();
        if n == 0 || n > 24 {
            return Err(Error::invalid(format!("reference must have 1..=24 sites, got {n}")));
        }
        self.reference_index()?;
        match &self.family {
            AnsatzFamily::HeaRyrzRing { layers } if *layers == 0 => {
                return Err(Error::invalid("hardware-efficient ansatz needs layers >= 1"))
            }
            AnsatzFamily::HeaRyrzRing { .. } => {}
            AnsatzFamily::PauliPool { .. } => {
                let gens = self.generators().unwrap_or_default();
                let p = self.num_params();
                let mut seen = vec![false; p];
                for g in &gens {
                    if g.letters.len() != n {
                        return Err(Error::invalid(format!("pool generator {} does not span {n} sites", g.letters)));
                    }
                    if !g.coefficient.is_finite() {
                        return Err(Error::invalid("pool coefficient must be finite"));
                    }
                    seen[g.tie] = true;
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(Error::invalid(format!("tie map skips parameter {missing}")));
                }
            }
        }
        match &self.init {
            InitPolicy::Gaussian { scale } if !(scale.is_finite() && *scale >= 0.0) => {
                Err(Error::invalid("gaussian init scale must be finite and >= 0"))
            }
            InitPolicy::WarmStart(v) if v.len() != self.num_params() => Err(Error::invalid(format!(
                "warm start has {} parameters, ansatz has {}",
                v.len(),
                self.num_params()
            ))),
            _ => Ok(()),
        }
    }
}

/// Ansatz resolved against its generators, ready for repeated evaluation.
pub(crate) struct Circuit {
    n: usize,
    reference: usize,
    num_params: usize,
    kind: CircuitKind,
}

enum CircuitKind {
    Hea { layers: usize },
    Pool(Vec<(usize, f64, PauliAction)>),
}

impl Circuit {
    pub(crate) fn compile(spec: &AnsatzSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match &spec.family {
            AnsatzFamily::HeaRyrzRing { layers } => CircuitKind::Hea { layers: *layers },
            AnsatzFamily::PauliPool { .. } => CircuitKind::Pool(
                spec.generators()
                    .unwrap_or_default()
                    .iter()
                    .map(|g| (g.tie, g.coefficient, g.letters.action()))
                    .collect(),
            ),
        };
        Ok(Self { n: spec.num_sites(), reference: spec.reference_index()?, num_params: spec.num_params(), kind })
    }

    pub(crate) fn num_params(&self) -> usize {
        self.num_params
    }

    pub(crate) fn num_generators(&self) -> usize {
        match &self.kind {
            CircuitKind::Hea { .. } => 0,
            CircuitKind::Pool(g) => g.len(),
        }
    }

    pub(crate) fn generator_tie(&self, k: usize) -> Option<(usize, f64)> {
        match &self.kind {
            CircuitKind::Pool(g) => g.get(k).map(|&(t, c, _)| (t, c)),
            CircuitKind::Hea { .. } => None,
        }
    }

    pub(crate) fn prepare(&self, params: &[f64]) -> Result<Vec<C64>> {
        self.prepare_with_offset(params, None)
    }

    /// Prepares the state with generator `k`'s rotation angle shifted by
    /// `delta`, used by the parameter-shift rule.
    pub(crate) fn prepare_with_offset(&self, params: &[f64], offset: Option<(usize, f64)>) -> Result<Vec<C64>> {
        if params.len() != self.num_params {
            return Err(Error::DimensionMismatch { expected: self.num_params, got: params.len() });
        }
        let dim = 1usize << self.n;
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[self.reference] = C64::new(1.0, 0.0);
        match &self.kind {
            CircuitKind::Hea { layers } => {
                let n = self.n;
                for layer in 0..*layers {
                    let base = layer * 2 * n;
                    for q in 0..n {
                        apply_ry(&mut psi, n, q, params[base + q]);
                        apply_rz(&mut psi, n, q, params[base + n + q]);
                    }
                    for (c, t) in ring(n) {
                        apply_cnot(&mut psi, n, c, t);
                    }
                }
            }
            CircuitKind::Pool(gens) => {
                let mut scratch = vec![C64::new(0.0, 0.0); dim];
                for (k, &(tie, coef, action)) in gens.iter().enumerate() {
                    let mut angle = coef * params[tie];
                    if let Some((ok, delta)) = offset {
                        if ok == k {
                            angle += delta;
                        }
                    }
                    apply_pauli_rotation(&mut psi, &mut scratch, &action, angle);
                }
            }
        }
        Ok(psi)
    }
}

/// CNOT pairs of the entangling ring: `i -> i+1`, closed by `n-1 -> 0`
/// only when the ring has at least three sites.
fn ring(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => vec![],
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

#[inline]
fn bit(n: usize, site: usize) -> usize {
    1usize << (n - 1 - site)
}

fn apply_ry(psi: &mut [C64], n: usize, site: usize, theta: f64) {
    let m = bit(n, site);
    let (s, c) = (theta / 2.0).sin_cos();
    for b in 0..psi.len() {
        if b & m == 0 {
            let (a0, a1) = (psi[b], psi[b | m]);
            psi[b] = a0 * c - a1 * s;
            psi[b | m] = a0 * s + a1 * c;
        }
    }
}

fn apply_rz(psi: &mut [C64], n: usize, site: usize, phi: f64) {
    let m = bit(n, site);
    let lo = C64::from_polar(1.0, -phi / 2.0);
    let hi = C64::from_polar(1.0, phi / 2.0);
    for (b, a) in psi.iter_mut().enumerate() {
        *a *= if b & m == 0 { lo } else { hi };
    }
}

fn apply_cnot(psi: &mut [C64], n: usize, control: usize, target: usize) {
    let cm = bit(n, control);
    let tm = bit(n, target);
    for b in 0..psi.len() {
        if b & cm != 0 && b & tm == 0 {
            psi.swap(b, b | tm);
        }
    }
}

/// `psi <- exp(-i angle P) psi = cos(angle) psi - i sin(angle) P psi`.
fn apply_pauli_rotation(psi: &mut [C64], scratch: &mut [C64], p: &PauliAction, angle: f64) {
    let (s, c) = angle.sin_cos();
    let minus_i_s = C64::new(0.0, -s);
    p.apply(psi, scratch);
    for (a, &pa) in psi.iter_mut().zip(scratch.iter()) {
        *a = *a * c + minus_i_s * pa;
    }
}

/// Runs the ansatz circuit on its reference state.
pub fn prepare_state(ansatz: &AnsatzSpec, params: &[f64]) -> Result<Vec<C64>> {
    Circuit::compile(ansatz)?.prepare(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hea(reference: &str, layers: usize) -> AnsatzSpec {
        AnsatzSpec {
            family: AnsatzFamily::HeaRyrzRing { layers },
            reference: reference.into(),
            init: InitPolicy::Zeros,
            seed: 0,
        }
    }

    fn pool(reference: &str, gens: Vec<PoolGenerator>) -> AnsatzSpec {
        AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Generators(gens) },
            reference: reference.into(),
            init: InitPolicy::Zeros,
            seed: 0,
        }
    }

    #[test]
    fn empty_pool_is_identity() {
        let psi = prepare_state(&pool("0110", vec![]), &[]).unwrap();
        assert_eq!(psi[0b0110], C64::new(1.0, 0.0));
        assert_eq!(psi.iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn ry_pi_flips() {
        let psi = prepare_state(&hea("0", 1), &[std::f64::consts::PI, 0.0]).unwrap();
        assert!(psi[0].norm() < 1e-15);
        assert!((psi[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_ring_on_two_sites() {
        // Ry(pi) on site 0 then CNOT 0 -> 1 gives |11>
        let psi = prepare_state(&hea("00", 1), &[std::f64::consts::PI, 0.0, 0.0, 0.0]).unwrap();
        assert!((psi[0b11].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(hea("0000", 2).num_params(), 16);
        let spec = AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Builtin { kind: PoolKind::Exchange, layers: 3 } },
            reference: "010101".into(),
            init: InitPolicy::Zeros,
            seed: 0,
        };
        assert_eq!(spec.num_params(), 27);
        assert_eq!(spec.generators().unwrap().len(), 54);
        spec.validate().unwrap();
    }

    #[test]
    fn tie_map_must_be_surjective() {
        let g = PoolGenerator { tie: 1, coefficient: 1.0, letters: "XY".parse().unwrap() };
        assert!(pool("01", vec![g]).validate().is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(prepare_state(&hea("00", 1), &[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pool_file() {
        let g = parse_pool_file("# pool
0 XY
0 -1 YX
1 ZZ
").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[1].coefficient, -1.0);
        assert!(parse_pool_file("x XY").is_err());
    }

    proptest! {
        #[test]
        fn circuits_preserve_norm(params in proptest::collection::vec(-6.3f64..6.3, 18), layers in 1usize..3) {
            let spec = hea("101", layers);
            let p = &params[..spec.num_params()];
            let psi = prepare_state(&spec, p).unwrap();
            let nrm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((nrm - 1.0).abs() < 1e-12);

            let pspec = AnsatzSpec {
                family: AnsatzFamily::PauliPool { pool: PoolSource::Builtin { kind: PoolKind::Exchange, layers: 2 } },
                reference: "0101".into(), init: InitPolicy::Zeros, seed: 0,
            };
            let q = &params[..pspec.num_params()];
            let psi = prepare_state(&pspec, q).unwrap();
            let nrm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((nrm - 1.0).abs() < 1e-12);
        }
    }
}
