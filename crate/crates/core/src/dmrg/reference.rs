use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mi::mutual_information;
use super::sweep::{run_dmrg, DmrgMethod, DmrgProtocol};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::hamiltonian::SpinChainSpec;
use crate::io::{matrix_from_csv, matrix_to_csv, write_file};

pub const META_FILE: &str = "meta.json";
pub const MI_FILE: &str = "mi.csv";

/// Frozen high-accuracy solution of one chain instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBundle {
    pub energy: f64,
    pub mi_matrix: Array2<f64>,
    pub fingerprint: String,
    pub spec: SpinChainSpec,
    pub protocol: DmrgProtocol,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    energy: f64,
    fingerprint: String,
    spec: SpinChainSpec,
    protocol: DmrgProtocol,
}

/// Hex SHA-256 of the canonical JSON of `{protocol, spec}`.
pub fn fingerprint(spec: &SpinChainSpec, protocol: &DmrgProtocol) -> Result<String> {
    let value = serde_json::json!({
        "spec": serde_json::to_value(spec)?,
        "protocol": serde_json::to_value(protocol)?,
    });
    let canonical = serde_json::to_string(&value)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn make_reference(spec: &SpinChainSpec, protocol: &DmrgProtocol, budget: Budget) -> Result<ReferenceBundle> {
    protocol.validate()?;
    if protocol.stages.last().map(|s| s.method) != Some(DmrgMethod::Dmrg2) {
        return Err(Error::invalid("reference protocol must end with a dmrg2 stage"));
    }
    let out = run_dmrg(spec, protocol, budget)?;
    if out.completed_sweeps == 0 {
        return Err(Error::BudgetTooSmall("no sweep finished within the reference budget".into()));
    }
    Ok(ReferenceBundle {
        energy: out.energy,
        mi_matrix: mutual_information(&out.state)?,
        fingerprint: fingerprint(spec, protocol)?,
        spec: *spec,
        protocol: protocol.clone(),
    })
}

impl ReferenceBundle {
    /// Writes `meta.json` and `mi.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let meta = Meta {
            energy: self.energy,
            fingerprint: self.fingerprint.clone(),
            spec: self.spec,
            protocol: self.protocol.clone(),
        };
        write_file(&dir.join(META_FILE), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
        write_file(&dir.join(MI_FILE), &matrix_to_csv(&self.mi_matrix))
    }

    /// Saves under `root/<fingerprint>`. An existing bundle there must be
    /// identical; bundles are never overwritten.
    pub fn store(&self, root: &Path) -> Result<PathBuf> {
        let dir = root.join(&self.fingerprint);
        if dir.join(META_FILE).exists() {
            let existing = Self::load(&dir)?;
            if existing != *self && !same_with_nan(&existing, self) {
                return Err(Error::invalid(format!("reference {} already exists with different content", dir.display())));
            }
            return Ok(dir);
        }
        self.save(&dir)?;
        Ok(dir)
    }

    /// Loads and checks the fingerprint against the stored inputs.
    pub fn load(dir: &Path) -> Result<Self> {
        let meta: Meta = serde_json::from_str(&std::fs::read_to_string(dir.join(META_FILE))?)?;
        let mi_matrix = matrix_from_csv(&std::fs::read_to_string(dir.join(MI_FILE))?)?;
        let expected = fingerprint(&meta.spec, &meta.protocol)?;
        if expected != meta.fingerprint {
            return Err(Error::invalid(format!("fingerprint mismatch: stored {}, computed {expected}", meta.fingerprint)));
        }
        if mi_matrix.nrows() != meta.spec.l {
            return Err(Error::DimensionMismatch { expected: meta.spec.l, got: mi_matrix.nrows() });
        }
        Ok(Self { energy: meta.energy, mi_matrix, fingerprint: meta.fingerprint, spec: meta.spec, protocol: meta.protocol })
    }
}

/// Equality treating the NaN diagonal as equal.
fn same_with_nan(a: &ReferenceBundle, b: &ReferenceBundle) -> bool {
    a.energy == b.energy
        && a.fingerprint == b.fingerprint
        && a.spec == b.spec
        && a.protocol == b.protocol
        && a.mi_matrix.dim() == b.mi_matrix.dim()
        && a.mi_matrix.iter().zip(b.mi_matrix.iter()).all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmrg::{DmrgStage, InitKind};

    fn protocol() -> DmrgProtocol {
        DmrgProtocol {
            stages: vec![DmrgStage {
                method: DmrgMethod::Dmrg2,
                bond_schedule: vec![8, 16],
                cutoff: 1e-12,
                eig_tol: 1e-10,
                max_sweeps: 4,
                ncv: 8,
                init: InitKind::Neel,
                init_bond: 1,
            }],
        }
    }

    #[test]
    fn bundle_round_trip_and_determinism() {
        let spec = SpinChainSpec::heisenberg_xxx(6);
        let a = make_reference(&spec, &protocol(), Budget::quanta(10_000)).unwrap();
        let b = make_reference(&spec, &protocol(), Budget::quanta(10_000)).unwrap();
        assert!(same_with_nan(&a, &b));
        let dir = tempfile::tempdir().unwrap();
        let path = a.store(dir.path()).unwrap();
        assert!(path.ends_with(&a.fingerprint));
        let back = ReferenceBundle::load(&path).unwrap();
        assert!(same_with_nan(&a, &back));
        assert!(b.store(dir.path()).is_ok());
    }

    #[test]
    fn rejects_tiny_budget_and_dmrg1_final() {
        let spec = SpinChainSpec::heisenberg_xxx(6);
        assert!(matches!(make_reference(&spec, &protocol(), Budget::quanta(3)), Err(Error::BudgetTooSmall(_))));
        let mut p = protocol();
        p.stages[0].method = DmrgMethod::Dmrg1;
        assert!(make_reference(&spec, &p, Budget::quanta(100)).is_err());
    }

    #[test]
    fn fingerprint_depends_on_inputs() {
        let a = fingerprint(&SpinChainSpec::heisenberg_xxx(6), &protocol()).unwrap();
        let b = fingerprint(&SpinChainSpec::heisenberg_xxx(8), &protocol()).unwrap();
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }
}
