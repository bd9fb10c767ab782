use super::ModelId;
use crate::error::{Error, Result};

/// Default cap on the number of free groups for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 25;

/// Model-space constraints: a size cap, "child requires parent" rules,
/// groups forced into every model and groups held out of every model.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    n_groups: usize,
    max_groups: usize,
    requires: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    forced: Vec<bool>,
    excluded: Vec<bool>,
}

impl ConstraintSet {
    /// No constraints, `J̄ = J`.
    pub fn unconstrained(n_groups: usize) -> Self {
        Self {
            n_groups,
            max_groups: n_groups,
            requires: Vec::new(),
            parents: vec![Vec::new(); n_groups],
            children: vec![Vec::new(); n_groups],
            forced: vec![false; n_groups],
            excluded: vec![false; n_groups],
        }
    }

    /// Builds and validates a constraint set; `requires` holds `(child, parent)` pairs.
    pub fn new(n_groups: usize, max_groups: usize, requires: &[(usize, usize)]) -> Result<Self> {
        let mut c = Self::unconstrained(n_groups);
        c.max_groups = max_groups.min(n_groups);
        for &(child, parent) in requires {
            if child >= n_groups || parent >= n_groups {
                return Err(Error::Dimension(format!(
                    "constraint ({}, {}) refers to a group outside 1..={n_groups}",
                    child + 1,
                    parent + 1
                )));
            }
            if child == parent {
                return Err(Error::CyclicConstraints { cycle: vec![child, child] });
            }
            if !c.parents[child].contains(&parent) {
                c.requires.push((child, parent));
                c.parents[child].push(parent);
                c.children[parent].push(child);
            }
        }
        if let Some(cycle) = c.find_cycle() {
            return Err(Error::CyclicConstraints { cycle });
        }
        Ok(c)
    }

    pub fn with_max_groups(mut self, max_groups: usize) -> Self {
        self.max_groups = max_groups.min(self.n_groups);
        self
    }

    /// Forces group `j` into every model. Forced groups do not count toward `J̄`.
    pub fn force(mut self, j: usize) -> Self {
        self.forced[j] = true;
        self
    }

    /// Holds group `j` out of every model.
    pub fn exclude(mut self, j: usize) -> Self {
        self.excluded[j] = true;
        self
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn max_groups(&self) -> usize {
        self.max_groups
    }

    pub fn requirements(&self) -> &[(usize, usize)] {
        &self.requires
    }

    pub fn parents(&self, j: usize) -> &[usize] {
        &self.parents[j]
    }

    pub fn children(&self, j: usize) -> &[usize] {
        &self.children[j]
    }

    pub fn is_forced(&self, j: usize) -> bool {
        self.forced[j]
    }

    pub fn is_excluded(&self, j: usize) -> bool {
        self.excluded[j]
    }

    /// Groups that may be switched on or off.
    pub fn free_groups(&self) -> Vec<usize> {
        (0..self.n_groups).filter(|&j| !self.forced[j] && !self.excluded[j]).collect()
    }

    /// Number of active groups that count toward the size cap and the model-size prior.
    pub fn free_size(&self, model: &ModelId) -> usize {
        model.active().filter(|&j| !self.forced[j]).count()
    }

    /// Number of groups that are neither forced nor excluded (the `J` of the size prior).
    pub fn n_countable(&self) -> usize {
        (0..self.n_groups).filter(|&j| !self.forced[j] && !self.excluded[j]).count()
    }

    /// Whether `model` lies in the constrained model space.
    pub fn allows(&self, model: &ModelId) -> bool {
        if model.n_groups() != self.n_groups {
            return false;
        }
        for j in 0..self.n_groups {
            let on = model.contains(j);
            if (self.forced[j] && !on) || (self.excluded[j] && on) {
                return false;
            }
        }
        if self.free_size(model) > self.max_groups {
            return false;
        }
        self.requires.iter().all(|&(c, p)| !model.contains(c) || model.contains(p))
    }

    /// All groups that transitively require `j`.
    pub fn descendants(&self, j: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n_groups];
        let mut stack = self.children[j].clone();
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            if !seen[c] {
                seen[c] = true;
                out.push(c);
                stack.extend(self.children[c].iter().copied());
            }
        }
        out.sort_unstable();
        out
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.n_groups];
        let mut path = Vec::new();
        for start in 0..self.n_groups {
            if state[start] == 0 {
                if let Some(c) = self.dfs_cycle(start, &mut state, &mut path) {
                    return Some(c);
                }
            }
        }
        None
    }

    fn dfs_cycle(&self, v: usize, state: &mut [u8], path: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[v] = 1;
        path.push(v);
        for &p in &self.parents[v] {
            if state[p] == 1 {
                let pos = path.iter().position(|&x| x == p).unwrap();
                let mut cycle = path[pos..].to_vec();
                cycle.push(p);
                return Some(cycle);
            }
            if state[p] == 0 {
                if let Some(c) = self.dfs_cycle(p, state, path) {
                    return Some(c);
                }
            }
        }
        path.pop();
        state[v] = 2;
        None
    }
}

/// All models allowed by `constraints`, lexicographic by bits.
pub fn enumerate_models(
    group_sizes: &[usize],
    constraints: &ConstraintSet,
    limit: usize,
) -> Result<Vec<ModelId>> {
    let j_total = group_sizes.len();
    if constraints.n_groups() != j_total {
        return Err(Error::Dimension("constraint set and design disagree on J".into()));
    }
    let free = constraints.free_groups().len();
    if free > limit {
        return Err(Error::RefuseEnumeration { groups: free, limit });
    }
    let mut out = Vec::new();
    let mut current = ModelId::empty(j_total);
    descend(0, &mut current, 0, group_sizes, constraints, &mut out);
    Ok(out)
}

fn descend(
    j: usize,
    current: &mut ModelId,
    free_on: usize,
    sizes: &[usize],
    c: &ConstraintSet,
    out: &mut Vec<ModelId>,
) {
    if j == sizes.len() {
        debug_assert!(c.allows(current));
        out.push(current.clone());
        return;
    }
    for on in [false, true] {
        if (on && c.is_excluded(j)) || (!on && c.is_forced(j)) {
            continue;
        }
        let counts = on && !c.is_forced(j);
        if counts && free_on + 1 > c.max_groups() {
            continue;
        }
        // every rule whose later endpoint is j can be decided now
        let ok_parents = !on || c.parents(j).iter().all(|&p| p > j || current.contains(p));
        let ok_children = on || c.children(j).iter().all(|&ch| ch > j || !current.contains(ch));
        if !(ok_parents && ok_children) {
            continue;
        }
        current.set(j, on, sizes);
        descend(j + 1, current, free_on + counts as usize, sizes, c, out);
        current.set(j, false, sizes);
    }
}
