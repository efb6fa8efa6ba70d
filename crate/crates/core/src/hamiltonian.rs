//! Second-quantized molecular Hamiltonians: FCIDUMP input/output and
//! frozen-core active-space reduction.
//!
//! Two-electron integrals are kept in chemists' notation `(pq|rs)` with all
//! eight permutation images materialized, so lookups never canonicalize.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Integrals closer than this to an already stored symmetry image are
/// considered the same record when a file lists both.
const DUPLICATE_TOLERANCE: f64 = 1e-10;

/// Electronic Hamiltonian over `n_orbitals` spatial orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularHamiltonian {
    n_orbitals: usize,
    n_alpha: usize,
    n_beta: usize,
    core_energy: f64,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

/// Orbitals held doubly occupied and folded into the core.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSpaceSpec {
    pub frozen_orbitals: Vec<usize>,
}

impl ActiveSpaceSpec {
    pub fn new(frozen_orbitals: Vec<usize>) -> Self {
        Self { frozen_orbitals }
    }

    /// Freeze the `count` lowest-index orbitals.
    pub fn lowest(count: usize) -> Self {
        Self::new((0..count).collect())
    }
}

impl MolecularHamiltonian {
    /// Builds a Hamiltonian from dense tensors, checking the permutation
    /// symmetries to `1e-10`.
    pub fn from_parts(
        n_orbitals: usize,
        n_alpha: usize,
        n_beta: usize,
        core_energy: f64,
        one_body: Vec<f64>,
        two_body: Vec<f64>,
    ) -> Result<Self> {
        let n = n_orbitals;
        if one_body.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: one_body.len() });
        }
        if two_body.len() != n * n * n * n {
            return Err(Error::DimensionMismatch { expected: n.pow(4), found: two_body.len() });
        }
        if n_alpha > n || n_beta > n {
            return Err(Error::InvalidHamiltonian(format!(
                "electron counts ({n_alpha}, {n_beta}) exceed {n} orbitals"
            )));
        }
        let h = Self { n_orbitals, n_alpha, n_beta, core_energy, one_body, two_body };
        for p in 0..n {
            for r in 0..n {
                if (h.one(p, r) - h.one(r, p)).abs() > 1e-10 {
                    return Err(Error::InvalidHamiltonian(format!("h[{p},{r}] is not symmetric")));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = h.two(p, q, r, s);
                        let images = [h.two(q, p, r, s), h.two(p, q, s, r), h.two(r, s, p, q)];
                        if images.iter().any(|w| (v - w).abs() > 1e-10) {
                            return Err(Error::InvalidHamiltonian(format!(
                                "({p}{q}|{r}{s}) breaks 8-fold symmetry"
                            )));
                        }
                    }
                }
            }
        }
        Ok(h)
    }

    pub fn from_fcidump_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        parse_fcidump(&text)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orbitals
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    #[inline]
    pub fn one(&self, p: usize, r: usize) -> f64 {
        self.one_body[p * self.n_orbitals + r]
    }

    /// `(pq|rs)` in chemists' notation.
    #[inline]
    pub fn two(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orbitals;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    pub fn one_body(&self) -> &[f64] {
        &self.one_body
    }

    pub fn two_body(&self) -> &[f64] {
        &self.two_body
    }

    /// Frozen-core reduction onto the orbitals not listed in `spec`.
    pub fn apply_frozen_orbitals(&self, spec: &ActiveSpaceSpec) -> Result<Self> {
        let n = self.n_orbitals;
        let frozen = &spec.frozen_orbitals;
        let mut seen = vec![false; n];
        for &f in frozen {
            if f >= n {
                return Err(Error::InvalidActiveSpace(format!("orbital {f} out of range (norb = {n})")));
            }
            if seen[f] {
                return Err(Error::InvalidActiveSpace(format!("orbital {f} listed twice")));
            }
            seen[f] = true;
        }
        if frozen.len() > self.n_alpha.min(self.n_beta) {
            return Err(Error::InvalidActiveSpace(format!(
                "cannot freeze {} orbitals with ({}, {}) electrons",
                frozen.len(),
                self.n_alpha,
                self.n_beta
            )));
        }
        let active: Vec<usize> = (0..n).filter(|&p| !seen[p]).collect();
        let m = active.len();

        let mut core = self.core_energy;
        for &f in frozen {
            core += 2.0 * self.one(f, f);
            for &g in frozen {
                core += 2.0 * self.two(f, f, g, g) - self.two(f, g, g, f);
            }
        }

        let mut one_body = vec![0.0; m * m];
        for (i, &p) in active.iter().enumerate() {
            for (j, &r) in active.iter().enumerate() {
                let mut v = self.one(p, r);
                for &f in frozen {
                    v += 2.0 * self.two(p, r, f, f) - self.two(p, f, f, r);
                }
                one_body[i * m + j] = v;
            }
        }

        let mut two_body = vec![0.0; m.pow(4)];
        for (i, &p) in active.iter().enumerate() {
            for (j, &q) in active.iter().enumerate() {
                for (k, &r) in active.iter().enumerate() {
                    for (l, &s) in active.iter().enumerate() {
                        two_body[((i * m + j) * m + k) * m + l] = self.two(p, q, r, s);
                    }
                }
            }
        }

        Ok(Self {
            n_orbitals: m,
            n_alpha: self.n_alpha - frozen.len(),
            n_beta: self.n_beta - frozen.len(),
            core_energy: core,
            one_body,
            two_body,
        })
    }

    /// Serializes to FCIDUMP, one record per symmetry-unique integral.
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orbitals;
        let mut out = String::new();
        let nelec = self.n_alpha + self.n_beta;
        let ms2 = self.n_alpha as i64 - self.n_beta as i64;
        let _ = writeln!(out, " &FCI NORB={n},NELEC={nelec},MS2={ms2},");
        let orbsym: Vec<String> = (0..n).map(|_| "1".to_string()).collect();
        let _ = writeln!(out, "  ORBSYM={},", orbsym.join(","));
        let _ = writeln!(out, "  ISYM=1,");
        let _ = writeln!(out, " &END");
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                            continue;
                        }
                        let v = self.two(p, q, r, s);
                        if v != 0.0 {
                            let _ = writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for r in 0..=p {
                let v = self.one(p, r);
                if v != 0.0 {
                    let _ = writeln!(out, "{v:e} {} {} 0 0", p + 1, r + 1);
                }
            }
        }
        let _ = writeln!(out, "{:e} 0 0 0 0", self.core_energy);
        out
    }
}

#[derive(Debug, Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: Option<i64>,
}

fn parse_header(text: &str, first_line: usize) -> std::result::Result<Header, Error> {
    let normalized = text.replace(',', " ").replace('=', " = ");
    let tokens: Vec<&str> = normalized.split_whitespace().collect();
    let mut values: HashMap<String, Vec<&str>> = HashMap::new();
    let mut key: Option<String> = None;
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        let upper = tok.to_ascii_uppercase();
        if upper == "&FCI" || upper == "$FCI" || upper == "&END" || upper == "$END" || tok == "/" {
            i += 1;
            continue;
        }
        if i + 1 < tokens.len() && tokens[i + 1] == "=" {
            key = Some(upper);
            values.entry(key.clone().unwrap()).or_default();
            i += 2;
            continue;
        }
        if let Some(k) = &key {
            values.get_mut(k).unwrap().push(tok);
        }
        i += 1;
    }
    let scalar = |name: &str| -> std::result::Result<Option<i64>, Error> {
        match values.get(name) {
            None => Ok(None),
            Some(v) if v.is_empty() => Err(Error::Parse {
                line: first_line,
                message: format!("header key {name} has no value"),
            }),
            Some(v) => v[0].parse::<i64>().map(Some).map_err(|_| Error::Parse {
                line: first_line,
                message: format!("header key {name} has non-integer value '{}'", v[0]),
            }),
        }
    };
    let non_negative = |name: &str, v: Option<i64>| -> std::result::Result<Option<usize>, Error> {
        match v {
            Some(x) if x < 0 => Err(Error::Parse {
                line: first_line,
                message: format!("header key {name} is negative"),
            }),
            Some(x) => Ok(Some(x as usize)),
            None => Ok(None),
        }
    };
    Ok(Header {
        norb: non_negative("NORB", scalar("NORB")?)?,
        nelec: non_negative("NELEC", scalar("NELEC")?)?,
        ms2: scalar("MS2")?,
    })
}

fn parse_value(tok: &str) -> Option<f64> {
    // Fortran writers may use D exponents.
    tok.replace(['D', 'd'], "E").parse::<f64>().ok()
}

/// Parses FCIDUMP text. Header keys are case-insensitive and may be comma or
/// whitespace separated; unknown keys are ignored.
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| {
            let t = l.trim_start().to_ascii_uppercase();
            t.starts_with("&FCI") || t.starts_with("$FCI")
        })
        .ok_or(Error::Parse { line: 1, message: "missing &FCI header".into() })?;
    let mut end = None;
    for (i, line) in lines.iter().enumerate().skip(start) {
        let upper = line.to_ascii_uppercase();
        if upper.contains("&END") || upper.contains("$END") || line.trim() == "/" {
            end = Some(i);
            break;
        }
    }
    let end = end.ok_or(Error::Parse { line: start + 1, message: "unterminated header".into() })?;
    let header = parse_header(&lines[start..=end].join("\n"), start + 1)?;

    let norb = header.norb.ok_or(Error::Parse { line: start + 1, message: "NORB missing".into() })?;
    let nelec = header.nelec.ok_or(Error::Parse { line: start + 1, message: "NELEC missing".into() })?;
    let ms2 = header.ms2.unwrap_or(0);
    if (nelec as i64 + ms2) % 2 != 0 || (nelec as i64) < ms2.abs() {
        return Err(Error::Parse {
            line: start + 1,
            message: format!("NELEC={nelec} and MS2={ms2} have inconsistent parity or magnitude"),
        });
    }
    let n_alpha = ((nelec as i64 + ms2) / 2) as usize;
    let n_beta = ((nelec as i64 - ms2) / 2) as usize;
    if n_alpha > norb || n_beta > norb {
        return Err(Error::Parse {
            line: start + 1,
            message: format!("({n_alpha}, {n_beta}) electrons do not fit in {norb} orbitals"),
        });
    }

    let n = norb;
    let mut core = None::<f64>;
    let mut one: HashMap<(usize, usize), f64> = HashMap::new();
    let mut two: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();

    fn insert<K: std::hash::Hash + Eq>(
        map: &mut HashMap<K, f64>,
        key: K,
        value: f64,
        line: usize,
    ) -> Result<()> {
        if let Some(old) = map.insert(key, value) {
            if (old - value).abs() > DUPLICATE_TOLERANCE {
                return Err(Error::Parse {
                    line,
                    message: format!("conflicting duplicate record ({old} vs {value})"),
                });
            }
        }
        Ok(())
    }

    for (offset, raw) in lines[end + 1..].iter().enumerate() {
        let line_no = end + 2 + offset;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let value = parse_value(fields[0]).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("non-numeric value '{}'", fields[0]),
        })?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&fields[1..]) {
            *slot = tok.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-integer index '{tok}'"),
            })?;
            if *slot > n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("index {} out of range (NORB = {n})", *slot),
                });
            }
        }
        let [i, j, k, l] = idx;
        match (i > 0, j > 0, k > 0, l > 0) {
            (false, false, false, false) => {
                if let Some(old) = core {
                    if (old - value).abs() > DUPLICATE_TOLERANCE {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "conflicting core energy records".into(),
                        });
                    }
                }
                core = Some(value);
            }
            // Orbital energies carry no Hamiltonian information.
            (true, false, false, false) => {}
            (true, true, false, false) => {
                let (a, b) = (i - 1, j - 1);
                insert(&mut one, (a.max(b), a.min(b)), value, line_no)?;
            }
            (true, true, true, true) => {
                let key = canonical_pair_key(i - 1, j - 1, k - 1, l - 1);
                insert(&mut two, key, value, line_no)?;
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("index pattern {i} {j} {k} {l} is not a valid record"),
                })
            }
        }
    }

    let mut one_body = vec![0.0; n * n];
    for (&(a, b), &v) in &one {
        one_body[a * n + b] = v;
        one_body[b * n + a] = v;
    }
    let mut two_body = vec![0.0; n.pow(4)];
    for (&(p, q, r, s), &v) in &two {
        for (a, b, c, d) in symmetry_images(p, q, r, s) {
            two_body[((a * n + b) * n + c) * n + d] = v;
        }
    }

    Ok(MolecularHamiltonian {
        n_orbitals: n,
        n_alpha,
        n_beta,
        core_energy: core.unwrap_or(0.0),
        one_body,
        two_body,
    })
}

fn canonical_pair_key(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let (p, q) = (p.max(q), p.min(q));
    let (r, s) = (r.max(s), r.min(s));
    if (p, q) >= (r, s) {
        (p, q, r, s)
    } else {
        (r, s, p, q)
    }
}

fn symmetry_images(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = " &FCI NORB=2,NELEC=2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n\
        0.5 1 1 1 1\n0.25 2 2 1 1\n0.125 2 1 2 1\n0.4 2 2 2 2\n-1.25 1 1 0 0\n-0.1 2 1 0 0\n\
        -0.5 2 2 0 0\n0.70556961 0 0 0 0\n";

    #[test]
    fn core_energy_record() {
        let h = parse_fcidump(TINY).unwrap();
        assert_eq!(h.core_energy(), 0.70556961);
        assert_eq!((h.n_alpha(), h.n_beta()), (1, 1));
    }

    #[test]
    fn symmetry_images_populated() {
        let h = parse_fcidump(TINY).unwrap();
        // Stored only as (22|11).
        assert_eq!(h.two(0, 0, 1, 1), 0.25);
        assert_eq!(h.two(1, 1, 0, 0), 0.25);
        for (a, b, c, d) in symmetry_images(1, 0, 1, 0) {
            assert_eq!(h.two(a, b, c, d), 0.125);
        }
        assert_eq!(h.one(0, 1), -0.1);
        assert_eq!(h.one(1, 0), -0.1);
    }

    #[test]
    fn header_variants() {
        let text = "&fci norb = 1 nelec = 1 ms2 = 1 orbsym = 1 unknownkey = 7\n/\n-0.5 1 1 0 0\n";
        let h = parse_fcidump(text).unwrap();
        assert_eq!((h.n_orbitals(), h.n_alpha(), h.n_beta()), (1, 1, 0));
        let one_line = "&FCI NORB=1, NELEC=2, MS2=0 &END\n1.0D-01 1 1 1 1\n";
        let h = parse_fcidump(one_line).unwrap();
        assert!((h.two(0, 0, 0, 0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        let bad_fields = "&FCI NORB=1,NELEC=2,MS2=0 &END\n1.0 1 1 0\n";
        assert!(matches!(parse_fcidump(bad_fields), Err(Error::Parse { line: 2, .. })));
        let bad_value = "&FCI NORB=1,NELEC=2,MS2=0 &END\nabc 1 1 0 0\n";
        assert!(matches!(parse_fcidump(bad_value), Err(Error::Parse { .. })));
        let range = "&FCI NORB=1,NELEC=2,MS2=0 &END\n1.0 2 1 0 0\n";
        assert!(matches!(parse_fcidump(range), Err(Error::Parse { .. })));
        let parity = "&FCI NORB=2,NELEC=2,MS2=1 &END\n";
        assert!(matches!(parse_fcidump(parity), Err(Error::Parse { .. })));
        let conflict = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 2 2 1 1\n0.6 1 1 2 2\n";
        assert!(matches!(parse_fcidump(conflict), Err(Error::Parse { line: 3, .. })));
        let agreeing = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.5 2 2 1 1\n0.5 1 1 2 2\n";
        assert!(parse_fcidump(agreeing).is_ok());
        assert!(parse_fcidump("no header here").is_err());
    }

    #[test]
    fn empty_freeze_is_identity() {
        let h = parse_fcidump(TINY).unwrap();
        let reduced = h.apply_frozen_orbitals(&ActiveSpaceSpec::default()).unwrap();
        assert_eq!(reduced, h);
    }

    #[test]
    fn freeze_validation() {
        let h = parse_fcidump(TINY).unwrap();
        assert!(h.apply_frozen_orbitals(&ActiveSpaceSpec::new(vec![2])).is_err());
        assert!(h.apply_frozen_orbitals(&ActiveSpaceSpec::new(vec![0, 0])).is_err());
        assert!(h.apply_frozen_orbitals(&ActiveSpaceSpec::new(vec![0, 1])).is_err());
    }

    #[test]
    fn frozen_core_energy_of_single_orbital() {
        let h = parse_fcidump(TINY).unwrap();
        let reduced = h.apply_frozen_orbitals(&ActiveSpaceSpec::new(vec![0])).unwrap();
        let expected_core = 0.70556961 + 2.0 * -1.25 + 2.0 * 0.5 - 0.5;
        assert!((reduced.core_energy() - expected_core).abs() < 1e-14);
        let expected_h = -0.5 + 2.0 * 0.25 - 0.125;
        assert!((reduced.one(0, 0) - expected_h).abs() < 1e-14);
        assert_eq!((reduced.n_alpha(), reduced.n_beta()), (0, 0));
    }

    #[test]
    fn from_parts_rejects_asymmetry() {
        let err = MolecularHamiltonian::from_parts(2, 1, 1, 0.0, vec![0.0, 1.0, 0.0, 0.0], vec![0.0; 16]);
        assert!(err.is_err());
    }
}
