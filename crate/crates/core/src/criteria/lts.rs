use super::Verdict;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::fmt::Display;

/// Exploration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_depth: usize,
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 64, max_states: 100_000 }
    }
}

/// Labelled successors of a state, or the system's error.
pub type Successors<S> = Result<Vec<(<S as System>::Label, <S as System>::State)>, <S as System>::Error>;

/// A transition system to explore: successors, a hash key that is equal
/// for states meant to be identified (modulo rounding), an exact
/// confirmation of that identification, and the success barb.
pub trait System {
    type State: Clone + Display;
    type Label: Clone + Display;
    type Error;

    fn steps(&self, s: &Self::State) -> Successors<Self>;
    fn key(&self, s: &Self::State) -> String;
    fn same(&self, a: &Self::State, b: &Self::State) -> bool;
    fn barb(&self, s: &Self::State) -> bool;
}

/// Outcome of a divergence search.
#[derive(Debug, Clone, PartialEq)]
pub enum Divergence {
    /// A path reaching a cycle, with the closing edge last.
    Divergent { lasso: Vec<String> },
    Convergent,
    /// No cycle found, but exploration was cut.
    Unknown,
}

impl Divergence {
    /// As a verdict on the claim "this system diverges".
    pub fn verdict(&self) -> Verdict {
        match self {
            Divergence::Divergent { .. } => Verdict::Holds,
            Divergence::Convergent => Verdict::fails(vec!["every explored path ends; no cycle is reachable".into()]),
            Divergence::Unknown => Verdict::inconclusive("no cycle within the explored fragment"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<L> {
    pub from: usize,
    pub label: L,
    pub to: usize,
}

/// Explored fragment of a transition system. State 0 is the initial state;
/// `parent[i]` is the edge through which state `i` was first reached.
#[derive(Debug, Clone)]
pub struct Lts<S, L> {
    pub states: Vec<S>,
    pub edges: Vec<Edge<L>>,
    pub succ: Vec<Vec<usize>>,
    pub barbs: Vec<bool>,
    pub depth: Vec<usize>,
    /// States whose successors were not (all) explored.
    pub truncated: Vec<bool>,
    pub parent: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct Stats {
    pub states: usize,
    pub edges: usize,
    pub depth: usize,
    pub truncated: bool,
}

impl Stats {
    /// Component-wise sum, keeping the larger depth.
    pub fn merge(self, o: Stats) -> Stats {
        Stats {
            states: self.states + o.states,
            edges: self.edges + o.edges,
            depth: self.depth.max(o.depth),
            truncated: self.truncated || o.truncated,
        }
    }
}

/// Breadth-first exploration within `budget`. Identified states are merged.
pub fn build_lts<Y: System>(sys: &Y, init: Y::State, budget: Budget) -> Result<Lts<Y::State, Y::Label>, Y::Error> {
    let mut lts = Lts {
        barbs: vec![sys.barb(&init)],
        states: vec![init],
        edges: Vec::new(),
        succ: vec![Vec::new()],
        depth: vec![0],
        truncated: vec![false],
        parent: vec![None],
    };
    let mut index: HashMap<String, Vec<usize>> = HashMap::new();
    index.entry(sys.key(&lts.states[0])).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if lts.depth[i] >= budget.max_depth {
            let has_steps = !sys.steps(&lts.states[i])?.is_empty();
            lts.truncated[i] = has_steps;
            continue;
        }
        for (label, next) in sys.steps(&lts.states[i])? {
            let key = sys.key(&next);
            let found = index.get(&key).and_then(|b| b.iter().copied().find(|&j| sys.same(&lts.states[j], &next)));
            let j = match found {
                Some(j) => j,
                None if lts.states.len() >= budget.max_states => {
                    lts.truncated[i] = true;
                    continue;
                }
                None => {
                    let j = lts.states.len();
                    lts.barbs.push(sys.barb(&next));
                    lts.states.push(next);
                    lts.succ.push(Vec::new());
                    lts.depth.push(lts.depth[i] + 1);
                    lts.truncated.push(false);
                    lts.parent.push(Some(lts.edges.len()));
                    index.entry(key).or_default().push(j);
                    queue.push_back(j);
                    j
                }
            };
            lts.succ[i].push(lts.edges.len());
            lts.edges.push(Edge { from: i, label, to: j });
        }
    }
    Ok(lts)
}

impl<S: Display, L: Display> Lts<S, L> {
    pub fn stats(&self) -> Stats {
        Stats {
            states: self.states.len(),
            edges: self.edges.len(),
            depth: self.depth.iter().copied().max().unwrap_or(0),
            truncated: self.is_truncated(),
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated.iter().any(|&t| t)
    }

    /// Edge indices of the discovery path from the initial state.
    pub fn path_to(&self, mut i: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while let Some(e) = self.parent[i] {
            path.push(e);
            i = self.edges[e].from;
        }
        path.reverse();
        path
    }

    /// A replayable trace: the initial state, then each label followed by
    /// the state it leads to.
    pub fn render_path(&self, edges: &[usize]) -> Vec<String> {
        let mut out = vec![self.states[0].to_string()];
        for &e in edges {
            out.push(format!("--{}--> {}", self.edges[e].label, self.states[self.edges[e].to]));
        }
        out
    }

    pub fn witness_to(&self, i: usize) -> Vec<String> {
        self.render_path(&self.path_to(i))
    }

    /// Some success state is reachable.
    pub fn may_reach_success(&self) -> Verdict {
        if self.barbs.iter().any(|&b| b) {
            Verdict::Holds
        } else if self.is_truncated() {
            Verdict::inconclusive("budget exhausted before success was found")
        } else {
            let end = (0..self.states.len()).find(|&i| self.succ[i].is_empty()).unwrap_or(0);
            Verdict::Fails { witness: self.witness_to(end) }
        }
    }

    /// Every maximal finite path meets a success state. Infinite paths are
    /// not constrained; a path cut by the budget makes the answer unknown.
    pub fn must_reach_success(&self) -> Verdict {
        let mut seen = vec![false; self.states.len()];
        let mut parent: Vec<Option<usize>> = vec![None; self.states.len()];
        let mut queue = VecDeque::new();
        let mut cut = false;
        if !self.barbs[0] {
            seen[0] = true;
            queue.push_back(0);
        }
        while let Some(i) = queue.pop_front() {
            if self.truncated[i] {
                cut = true;
            }
            if self.succ[i].is_empty() && !self.truncated[i] {
                let mut path = Vec::new();
                let mut k = i;
                while let Some(e) = parent[k] {
                    path.push(e);
                    k = self.edges[e].from;
                }
                path.reverse();
                return Verdict::Fails { witness: self.render_path(&path) };
            }
            for &e in &self.succ[i] {
                let j = self.edges[e].to;
                if !self.barbs[j] && !seen[j] {
                    seen[j] = true;
                    parent[j] = Some(e);
                    queue.push_back(j);
                }
            }
        }
        if cut {
            Verdict::inconclusive("a path avoiding success was cut by the budget")
        } else {
            Verdict::Holds
        }
    }

    /// Looks for a reachable cycle containing an edge accepted by `counts`.
    /// Cycles made only of other edges are ignored.
    pub fn divergence(&self, counts: impl Fn(&L) -> bool) -> Divergence {
        let comp = self.sccs();
        for edge in &self.edges {
            if comp[edge.from] == comp[edge.to] && counts(&edge.label) {
                let mut lasso = self.witness_to(edge.from);
                lasso.push(format!("--{}--> {} (closes a cycle)", edge.label, self.states[edge.to]));
                return Divergence::Divergent { lasso };
            }
        }
        if self.is_truncated() {
            Divergence::Unknown
        } else {
            Divergence::Convergent
        }
    }

    /// Strongly connected component id of each state (iterative Tarjan).
    pub fn sccs(&self) -> Vec<usize> {
        let n = self.states.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp = vec![usize::MAX; n];
        let mut next_index = 0;
        let mut next_comp = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut k)) = call.last_mut() {
                if *k < self.succ[v].len() {
                    let w = self.edges[self.succ[v][*k]].to;
                    *k += 1;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(u, _)) = call.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
        comp
    }
}
