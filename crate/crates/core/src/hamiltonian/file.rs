//! Line format: `<coefficient> <letters>`, `#` starts a comment, blank lines
//! are skipped.

use std::fmt::Write as _;

use super::pauli::{PauliHamiltonian, PauliString, PauliTerm};
use crate::error::{Error, Result};

pub fn parse_hamiltonian_file(text: &str) -> Result<PauliHamiltonian> {
    let mut terms = Vec::new();
    let mut num_sites: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (coef, letters) = match (fields.next(), fields.next(), fields.next()) {
            (Some(c), Some(l), None) => (c, l),
            _ => return Err(Error::Parse { line: line_no, msg: "expected `<coefficient> <letters>`".into() }),
        };
        let coefficient: f64 = coef
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("coefficient {coef:?} is not a real number") })?;
        if !coefficient.is_finite() {
            return Err(Error::Parse { line: line_no, msg: format!("coefficient {coef:?} is not finite") });
        }
        let letters: PauliString =
            letters.parse().map_err(|e: Error| Error::Parse { line: line_no, msg: e.to_string() })?;
        match num_sites {
            None => num_sites = Some(letters.len()),
            Some(n) if n != letters.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("{} letters where earlier terms have {n}", letters.len()),
                })
            }
            _ => {}
        }
        terms.push(PauliTerm { coefficient, letters });
    }
    let n = num_sites.ok_or_else(|| Error::invalid("Hamiltonian file has no terms"))?;
    PauliHamiltonian::new(n, terms)
}

/// Canonical text: merged terms in lexicographic order, shortest round-trip
/// coefficients.
pub fn write_hamiltonian_file(h: &PauliHamiltonian) -> String {
    let mut out = String::new();
    for t in h.terms() {
        let _ = writeln!(out, "{:?} {}", t.coefficient, t.letters);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_term_file() {
        let h = parse_hamiltonian_file("0.5 XX\n0.5 YY").unwrap();
        assert_eq!(h.num_sites(), 2);
        assert_eq!(h.terms().len(), 2);
    }

    #[test]
    fn duplicate_terms_merge() {
        let h = parse_hamiltonian_file("1.0 Z\n1.0 Z").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient, 2.0);
    }

    #[test]
    fn comments_and_blanks() {
        let h = parse_hamiltonian_file("# header\n\n  -1.5 ZI  # trailing\n2 IX\n").unwrap();
        assert_eq!(write_hamiltonian_file(&h), "2.0 IX\n-1.5 ZI\n");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_hamiltonian_file("1.0 XX\n1.0 X"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_hamiltonian_file("1+2j XX"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_hamiltonian_file("1.0 XQ"), Err(Error::Parse { .. })));
        assert!(matches!(parse_hamiltonian_file("nan XX"), Err(Error::Parse { .. })));
        assert!(matches!(parse_hamiltonian_file("1.0"), Err(Error::Parse { .. })));
        assert!(parse_hamiltonian_file("# nothing\n").is_err());
    }

    fn arb_line(n: usize) -> impl Strategy<Value = String> {
        (
            prop_oneof![(-5i32..=5).prop_map(|k| k as f64 * 0.25), -10.0f64..10.0],
            proptest::collection::vec(prop_oneof![Just('I'), Just('X'), Just('Y'), Just('Z')], n),
        )
            .prop_map(|(c, ls)| format!("{c} {}", ls.into_iter().collect::<String>()))
    }

    fn arb_file() -> impl Strategy<Value = String> {
        (1usize..5)
            .prop_flat_map(|n| proptest::collection::vec(arb_line(n), 1..12))
            .prop_map(|v| v.join("\n"))
    }

    proptest! {
        #[test]
        fn writer_is_canonical(text in arb_file()) {
            let h = parse_hamiltonian_file(&text).unwrap();
            let canon = write_hamiltonian_file(&h);
            if h.terms().is_empty() {
                prop_assert!(canon.is_empty());
            } else {
                let again = parse_hamiltonian_file(&canon).unwrap();
                prop_assert_eq!(&again, &h);
                prop_assert_eq!(write_hamiltonian_file(&again), canon);
            }
        }
    }
}
