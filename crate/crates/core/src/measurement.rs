//! Measurement planning: qubit-wise compatible grouping of Pauli terms by
//! greedy graph coloring, basis ranking, and budget analytics.

use num_complex::Complex64;

use crate::basis::{Axis, MeasurementBasis};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Conflict graph over the non-identity terms of a sum: an edge joins two
/// strings that are not qubit-wise compatible.
#[derive(Debug, Clone)]
pub struct CommutationGraph {
    pub terms: Vec<(PauliString, Complex64)>,
    pub adjacency: Vec<Vec<usize>>,
}

impl CommutationGraph {
    pub fn n_vertices(&self) -> usize {
        self.terms.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

pub fn build_commutation_graph(p: &PauliSum) -> CommutationGraph {
    let terms: Vec<(PauliString, Complex64)> =
        p.iter().filter(|(s, _)| !s.is_identity()).map(|(s, c)| (*s, *c)).collect();
    let n = terms.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if !terms[i].0.qubitwise_compatible(&terms[j].0) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    CommutationGraph { terms, adjacency }
}

/// Terms measurable together in one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    pub basis: MeasurementBasis,
    pub terms: PauliSum,
    pub weight: f64,
}

impl MeasurementGroup {
    fn from_terms(n_qubits: usize, terms: Vec<(PauliString, Complex64)>) -> Self {
        let mut axes = vec![Axis::Z; n_qubits];
        for (s, _) in &terms {
            for (q, axis) in axes.iter_mut().enumerate() {
                match s.get(q) {
                    Pauli::X => *axis = Axis::X,
                    Pauli::Y => *axis = Axis::Y,
                    _ => {}
                }
            }
        }
        let weight = terms.iter().map(|(_, c)| c.norm()).sum();
        let mut sum = PauliSum::new(n_qubits);
        for (s, c) in terms {
            sum.add_term(s, c);
        }
        Self { basis: MeasurementBasis::new(axes), terms: sum, weight }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }
}

/// Measurable in `basis`: every non-identity letter matches the axis.
pub fn diagonal_in(s: &PauliString, basis: &MeasurementBasis) -> bool {
    (0..basis.n_qubits()).all(|q| match (s.get(q), basis.axis(q)) {
        (Pauli::I, _) => true,
        (Pauli::X, Axis::X) | (Pauli::Y, Axis::Y) | (Pauli::Z, Axis::Z) => true,
        _ => false,
    })
}

/// Greedy coloring of the conflict graph, visiting vertices by descending
/// degree (ties: descending |λ|, then string order) and giving each the
/// smallest color unused by its neighbours. Each color class becomes one
/// group; groups are returned by descending weight.
pub fn greedy_group(p: &PauliSum) -> Vec<MeasurementGroup> {
    let graph = build_commutation_graph(p);
    let n = graph.n_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        graph
            .degree(b)
            .cmp(&graph.degree(a))
            .then(graph.terms[b].1.norm().total_cmp(&graph.terms[a].1.norm()))
            .then(graph.terms[a].0.cmp(&graph.terms[b].0))
    });
    let mut color = vec![usize::MAX; n];
    let mut n_colors = 0;
    let mut used = Vec::new();
    for &v in &order {
        used.clear();
        used.resize(n_colors + 1, false);
        for &u in &graph.adjacency[v] {
            if color[u] != usize::MAX {
                used[color[u]] = true;
            }
        }
        let c = used.iter().position(|&taken| !taken).unwrap();
        color[v] = c;
        n_colors = n_colors.max(c + 1);
    }
    let mut classes: Vec<Vec<(PauliString, Complex64)>> = vec![Vec::new(); n_colors];
    for v in 0..n {
        classes[color[v]].push(graph.terms[v]);
    }
    let mut groups: Vec<MeasurementGroup> =
        classes.into_iter().map(|t| MeasurementGroup::from_terms(p.n_qubits(), t)).collect();
    sort_groups(&mut groups);
    groups
}

fn sort_groups(groups: &mut [MeasurementGroup]) {
    groups.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.basis.cmp(&b.basis)));
}

/// The `k` heaviest distinct bases, with the all-Z basis forced in (it
/// replaces the lightest selection when absent). Asking for more bases
/// than exist returns them all.
pub fn select_bases(groups: &[MeasurementGroup], k: usize) -> Result<Vec<MeasurementBasis>> {
    if k == 0 {
        return Err(Error::InvalidArgument("basis budget k must be at least 1".into()));
    }
    let Some(first) = groups.first() else {
        return Err(Error::Degenerate("no measurement groups".into()));
    };
    let mut ranked: Vec<&MeasurementGroup> = groups.iter().collect();
    ranked.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.basis.cmp(&b.basis)));
    let mut chosen: Vec<MeasurementBasis> = Vec::new();
    for g in ranked {
        if chosen.len() == k {
            break;
        }
        if !chosen.contains(&g.basis) {
            chosen.push(g.basis.clone());
        }
    }
    let z = MeasurementBasis::all_z(first.basis.n_qubits());
    if !chosen.contains(&z) {
        if chosen.len() == k {
            chosen.pop();
        }
        chosen.push(z);
    }
    Ok(chosen)
}

/// Terms of `p` measurable in at least one of `bases`, plus the identity.
pub fn measurable_terms(p: &PauliSum, bases: &[MeasurementBasis]) -> PauliSum {
    let kept = p
        .iter()
        .filter(|(s, _)| s.is_identity() || bases.iter().any(|b| diagonal_in(s, b)))
        .map(|(s, c)| (*s, *c));
    PauliSum::from_terms(p.n_qubits(), kept)
}

/// Fraction of non-identity coefficient magnitude carried by strings with an
/// X or Y.
pub fn offdiagonal_ratio(p: &PauliSum) -> Result<f64> {
    let mut total = 0.0;
    let mut off = 0.0;
    for (s, c) in p.iter() {
        if s.is_identity() {
            continue;
        }
        total += c.norm();
        if !s.is_diagonal() {
            off += c.norm();
        }
    }
    if total == 0.0 {
        return Err(Error::Degenerate("Hamiltonian has no non-identity terms".into()));
    }
    Ok(off / total)
}

/// One row of the measurement plan table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRow {
    pub basis: MeasurementBasis,
    pub n_terms: usize,
    pub weight: f64,
    pub cumulative_fraction: f64,
}

pub fn plan_table(groups: &[MeasurementGroup]) -> Vec<PlanRow> {
    let total: f64 = groups.iter().map(|g| g.weight).sum();
    let mut acc = 0.0;
    groups
        .iter()
        .map(|g| {
            acc += g.weight;
            PlanRow {
                basis: g.basis.clone(),
                n_terms: g.n_terms(),
                weight: g.weight,
                cumulative_fraction: if total > 0.0 { acc / total } else { 0.0 },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum(terms: &[(&str, f64)]) -> PauliSum {
        let n = terms[0].0.len();
        PauliSum::from_terms(n, terms.iter().map(|(s, c)| (s.parse().unwrap(), Complex64::new(*c, 0.0))))
    }

    #[test]
    fn diagonal_terms_have_no_edges() {
        let g = build_commutation_graph(&sum(&[("ZI", 1.0), ("IZ", 0.5), ("ZZ", 0.25)]));
        assert_eq!(g.n_edges(), 0);
        let g = build_commutation_graph(&sum(&[("X", 1.0), ("Z", 0.5)]));
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn identity_excluded_from_graph() {
        let g = build_commutation_graph(&sum(&[("II", 3.0), ("XZ", 1.0)]));
        assert_eq!(g.n_vertices(), 1);
    }

    #[test]
    fn all_diagonal_is_one_group() {
        let groups = greedy_group(&sum(&[("II", 1.0), ("ZI", 1.0), ("IZ", 0.5), ("ZZ", 0.25)]));
        assert_eq!(groups.len(), 1);
        assert!(groups[0].basis.is_all_z());
    }

    #[test]
    fn z_basis_forced_into_selection() {
        let p = sum(&[("XX", 2.0), ("YY", 1.5), ("ZI", 0.1)]);
        let groups = greedy_group(&p);
        let one = select_bases(&groups, 1).unwrap();
        assert_eq!(one, vec![MeasurementBasis::all_z(2)]);
        let all = select_bases(&groups, 10).unwrap();
        assert_eq!(all.len(), groups.len());
        assert!(select_bases(&groups, 0).is_err());
    }

    #[test]
    fn offdiagonal_ratio_edges() {
        assert_eq!(offdiagonal_ratio(&sum(&[("ZZ", 1.0), ("IZ", -2.0)])).unwrap(), 0.0);
        assert_eq!(offdiagonal_ratio(&sum(&[("X", 1.0)])).unwrap(), 1.0);
        assert!(offdiagonal_ratio(&sum(&[("II", 1.0)])).is_err());
    }

    #[test]
    fn measurable_terms_covers_groups() {
        let p = sum(&[("II", 1.0), ("XX", 2.0), ("YY", 1.5), ("ZI", 0.1)]);
        let bases: Vec<MeasurementBasis> = vec!["XX".parse().unwrap()];
        let m = measurable_terms(&p, &bases);
        assert_eq!(m.len(), 2);
    }
}
