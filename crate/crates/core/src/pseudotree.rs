//! BFS pseudo-tree and the priority order it induces.
//!
//! The root is the agent with the smallest id. Neighbours are enqueued in id
//! order. Priority is lexicographic on `(depth, ordinal)`: shallower first,
//! then by id. Every constraint is owned by its lower-priority endpoint, which
//! computes the edge cost and reports it upward.

use std::fmt;

use thiserror::Error;

use crate::model::Problem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("constraint graph is disconnected: {0:?} unreachable from the root")]
    Disconnected(Vec<String>),
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoTree {
    root: usize,
    depth: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    higher: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    max_depth: usize,
    ids: Vec<String>,
}

pub fn build_bfs_pseudotree(problem: &Problem) -> Result<PseudoTree, TreeError> {
    let n = problem.len();
    let root = 0;
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut queue = std::collections::VecDeque::from([root]);
    depth[root] = 0;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in problem.neighbors(u) {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some(u);
                children[u].push(v);
                queue.push_back(v);
            }
        }
    }
    let unreached: Vec<String> =
        (0..n).filter(|&v| depth[v] == usize::MAX).map(|v| problem.agent(v).id.clone()).collect();
    if !unreached.is_empty() {
        return Err(TreeError::Disconnected(unreached));
    }

    let key = |v: usize| (depth[v], v);
    let mut higher = vec![Vec::new(); n];
    let mut lower = vec![Vec::new(); n];
    for u in 0..n {
        for &(v, _) in problem.neighbors(u) {
            if key(v) < key(u) {
                higher[u].push(v);
            } else {
                lower[u].push(v);
            }
        }
    }
    Ok(PseudoTree {
        root,
        max_depth: depth.iter().copied().max().unwrap_or(0),
        depth,
        parent,
        children,
        higher,
        lower,
        ids: problem.agents().iter().map(|a| a.id.clone()).collect(),
    })
}

impl PseudoTree {
    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_root(&self, v: usize) -> bool {
        v == self.root
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Longest root-to-node path.
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Higher-priority neighbours, ascending ordinal.
    pub fn higher(&self, v: usize) -> &[usize] {
        &self.higher[v]
    }

    /// Lower-priority neighbours, ascending ordinal.
    pub fn lower(&self, v: usize) -> &[usize] {
        &self.lower[v]
    }

    /// Number of fitness envelopes `v` collects per iteration: one edge cost
    /// from every lower neighbour plus one aggregate from every child that
    /// itself has lower neighbours.
    pub fn expected_fitness_msgs(&self, v: usize) -> usize {
        self.lower[v].len() + self.children[v].iter().filter(|&&c| !self.lower[c].is_empty()).count()
    }

    /// Whether `v` forwards an aggregate to its parent each iteration.
    pub fn sends_aggregate(&self, v: usize) -> bool {
        !self.is_root(v) && !self.lower[v].is_empty()
    }

    /// Strict priority order on ordinals: true when `i` ranks below `j`.
    pub fn ranks_below(&self, i: usize, j: usize) -> bool {
        (self.depth[i], i) > (self.depth[j], j)
    }

    pub fn priority_less(&self, i: &str, j: &str) -> Result<bool, TreeError> {
        let (a, b) = (self.lookup(i)?, self.lookup(j)?);
        Ok(self.ranks_below(a, b))
    }

    pub fn lookup(&self, id: &str) -> Result<usize, TreeError> {
        self.ids.iter().position(|x| x == id).ok_or_else(|| TreeError::UnknownAgent(id.to_string()))
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }
}

impl fmt::Display for PseudoTree {
    /// One line per agent in priority order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |vs: &[usize]| vs.iter().map(|&v| self.ids[v].as_str()).collect::<Vec<_>>().join(",");
        writeln!(f, "root={} d={}", self.ids[self.root], self.max_depth)?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| (self.depth[v], v));
        for v in order {
            writeln!(
                f,
                "{} depth={} parent={} children=[{}] H=[{}] L=[{}] expect={}",
                self.ids[v],
                self.depth[v],
                self.parent[v].map_or("-", |p| self.ids[p].as_str()),
                names(&self.children[v]),
                names(&self.higher[v]),
                names(&self.lower[v]),
                self.expected_fitness_msgs(v),
            )?;
        }
        Ok(())
    }
}
