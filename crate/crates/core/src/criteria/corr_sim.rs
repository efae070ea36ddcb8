use super::lts::Lts;
use super::systems::QEdge;
use super::Verdict;
use crate::qccs::{Label, QccsConfig};
use std::collections::VecDeque;

/// How the first clause (moves of the left system) is matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matching {
    /// A single step with the same label, as the definition is written.
    #[default]
    Literal,
    /// Any weak step: internal moves around the label, and zero or more
    /// internal moves for an internal label.
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorrSimMode {
    pub matching: Matching,
    /// Only relate configurations over registers of equal size.
    pub size_sensitive: bool,
}

type QLts = Lts<QccsConfig, QEdge>;

/// Per-state views needed by the fixpoints.
struct View<'a> {
    lts: &'a QLts,
    /// Reflexive-transitive closure of internal steps.
    tau_star: Vec<Vec<usize>>,
    /// Success reachable through internal steps.
    may_succeed: Vec<bool>,
}

impl<'a> View<'a> {
    fn new(lts: &'a QLts) -> Self {
        let n = lts.states.len();
        let tau_star: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                seen[s] = true;
                let mut out = vec![s];
                let mut queue = VecDeque::from([s]);
                while let Some(i) = queue.pop_front() {
                    for &e in &lts.succ[i] {
                        let edge = &lts.edges[e];
                        if edge.label.label.is_tau() && !seen[edge.to] {
                            seen[edge.to] = true;
                            out.push(edge.to);
                            queue.push_back(edge.to);
                        }
                    }
                }
                out
            })
            .collect();
        let may_succeed = tau_star.iter().map(|r| r.iter().any(|&k| lts.barbs[k])).collect();
        View { lts, tau_star, may_succeed }
    }

    fn moves(&self, i: usize) -> impl Iterator<Item = (&Label, usize)> + '_ {
        self.lts.succ[i].iter().map(|&e| (&self.lts.edges[e].label.label, self.lts.edges[e].to))
    }

    /// States reached by internal steps followed by one `label` step.
    fn tau_then(&self, i: usize, label: &Label) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.tau_star[i].iter().flat_map(|&k| self.moves(k).filter(|(l, _)| *l == label).map(|(_, t)| t)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Weak answers to a `label` step: internal steps only for an internal
    /// label, otherwise internal steps around the label.
    fn weak(&self, i: usize, label: &Label) -> Vec<usize> {
        if label.is_tau() {
            return self.tau_star[i].clone();
        }
        let mut out: Vec<usize> = self.tau_then(i, label).into_iter().flat_map(|k| self.tau_star[k].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn size(&self, i: usize) -> usize {
        self.lts.states[i].rho.qubit_count()
    }
}

struct Relation {
    n2: usize,
    bits: Vec<bool>,
}

impl Relation {
    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n2 + j]
    }
}

fn truncated(a: &QLts, b: &QLts) -> Option<Verdict> {
    (a.is_truncated() || b.is_truncated()).then(|| Verdict::inconclusive("a transition system was cut by the budget"))
}

fn header(a: &View, b: &View, i: usize, j: usize) -> Vec<String> {
    vec![format!("left: {}", a.lts.states[i]), format!("right: {}", b.lts.states[j])]
}

/// Largest correspondence simulation between two explored systems; the
/// verdict says whether it relates their initial states. Left moves are
/// matched per `mode`; right moves are matched by the left doing internal
/// steps then the label while the right catches up with internal steps;
/// related states agree on reachable success.
pub fn corr_sim_check(left: &QLts, right: &QLts, mode: CorrSimMode) -> Verdict {
    if let Some(v) = truncated(left, right) {
        return v;
    }
    let (a, b) = (View::new(left), View::new(right));
    let (n1, n2) = (left.states.len(), right.states.len());
    let mut r = Relation { n2, bits: vec![false; n1 * n2] };
    for i in 0..n1 {
        for j in 0..n2 {
            r.bits[i * n2 + j] = a.may_succeed[i] == b.may_succeed[j] && (!mode.size_sensitive || a.size(i) == b.size(j));
        }
    }
    let mut why: Option<String> = None;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n1 {
            for j in 0..n2 {
                if !r.get(i, j) {
                    continue;
                }
                let clause1 = a.moves(i).find(|(l, i2)| {
                    let answers = match mode.matching {
                        Matching::Literal => b.moves(j).filter(|(m, _)| m == l).map(|(_, t)| t).collect(),
                        Matching::Weak => b.weak(j, l),
                    };
                    !answers.into_iter().any(|j2| r.get(*i2, j2))
                });
                let clause2 = || {
                    b.moves(j).find(|(l, j2)| {
                        let lefts = a.tau_then(i, l);
                        !lefts.iter().any(|&i3| b.tau_star[*j2].iter().any(|&j3| r.get(i3, j3)))
                    })
                };
                let reason = if let Some((l, i2)) = clause1 {
                    Some(format!("left move --{l}--> {} has no related answer", left.states[i2]))
                } else {
                    clause2().map(|(l, j2)| format!("right move --{l}--> {} cannot be caught up with", right.states[j2]))
                };
                if let Some(reason) = reason {
                    r.bits[i * n2 + j] = false;
                    changed = true;
                    if i == 0 && j == 0 {
                        why = Some(reason);
                    }
                }
            }
        }
    }
    if r.get(0, 0) {
        return Verdict::Holds;
    }
    let mut w = header(&a, &b, 0, 0);
    w.push(why.unwrap_or_else(|| {
        format!(
            "reachable success differs (left {}, right {}) or register sizes differ",
            a.may_succeed[0], b.may_succeed[0]
        )
    }));
    Verdict::Fails { witness: w }
}

/// Strong bisimulation with agreement on reachable success. Diagnostic
/// only: it distinguishes systems that resolve a choice at different
/// points.
pub fn bisimilar(left: &QLts, right: &QLts) -> Verdict {
    if let Some(v) = truncated(left, right) {
        return v;
    }
    let (a, b) = (View::new(left), View::new(right));
    let (n1, n2) = (left.states.len(), right.states.len());
    let mut r = Relation { n2, bits: vec![false; n1 * n2] };
    for i in 0..n1 {
        for j in 0..n2 {
            r.bits[i * n2 + j] = a.may_succeed[i] == b.may_succeed[j];
        }
    }
    let mut why: Option<String> = None;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n1 {
            for j in 0..n2 {
                if !r.get(i, j) {
                    continue;
                }
                let fwd = a.moves(i).find(|(l, i2)| !b.moves(j).any(|(m, j2)| m == *l && r.get(*i2, j2)));
                let reason = if let Some((l, i2)) = fwd {
                    Some(format!("left move --{l}--> {} is not matched", left.states[i2]))
                } else {
                    b.moves(j)
                        .find(|(l, j2)| !a.moves(i).any(|(m, i2)| m == *l && r.get(i2, *j2)))
                        .map(|(l, j2)| format!("right move --{l}--> {} is not matched", right.states[j2]))
                };
                if let Some(reason) = reason {
                    r.bits[i * n2 + j] = false;
                    changed = true;
                    if i == 0 && j == 0 {
                        why = Some(reason);
                    }
                }
            }
        }
    }
    if r.get(0, 0) {
        return Verdict::Holds;
    }
    let mut w = header(&a, &b, 0, 0);
    w.push(why.unwrap_or_else(|| "reachable success differs".into()));
    Verdict::Fails { witness: w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{build_lts, Budget, QccsSystem};
    use crate::qccs::{parse_qccs, Program};

    fn lts(src: &str) -> (Program, QLts) {
        let p = parse_qccs(src).unwrap();
        let sys = QccsSystem { defs: &p.defs, tolerance: 1e-9, labelled: true };
        let l = build_lts(&sys, p.config.clone(), Budget::default()).unwrap();
        (p, l)
    }

    #[test]
    fn identical_systems_are_related() {
        let (_, l) = lts("state qubits q; rho = outer(|0>); process tau.c!q.ok + tau.nil");
        assert!(corr_sim_check(&l, &l, CorrSimMode::default()).holds());
        assert!(bisimilar(&l, &l).holds());
    }

    #[test]
    fn success_disagreement_fails() {
        let (_, a) = lts("state qubits q; rho = outer(|0>); process tau.ok");
        let (_, b) = lts("state qubits q; rho = outer(|0>); process tau.nil");
        assert!(corr_sim_check(&a, &b, CorrSimMode::default()).is_fails());
    }

    #[test]
    fn late_choice_is_simulated_but_not_bisimilar() {
        // The left must resolve the choice before the independent step; the
        // right can postpone it.
        let (_, early) = lts("state qubits q; rho = outer(|0>); process tau.(a!q.nil | tau.nil) + tau.(b!q.nil | tau.nil)");
        let (_, late) = lts("state qubits q; rho = outer(|0>); process (tau.a!q.nil + tau.b!q.nil) | tau.nil");
        assert!(corr_sim_check(&early, &late, CorrSimMode::default()).holds());
        assert!(bisimilar(&early, &late).is_fails());
    }

    #[test]
    fn size_sensitivity_separates_registers() {
        let (_, a) = lts("state qubits q; rho = outer(|0>); process nil");
        let (_, b) = lts("state qubits q, r; rho = outer(|00>); process nil");
        assert!(corr_sim_check(&a, &b, CorrSimMode::default()).holds());
        let sized = CorrSimMode { size_sensitive: true, ..Default::default() };
        assert!(corr_sim_check(&a, &b, sized).is_fails());
    }
}
