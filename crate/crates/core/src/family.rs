//! Laminar set systems over the vertex set `0..n`, stored as a rooted tree.
//!
//! Sets are indexed canonically: index `i < n` is the singleton `{i}`, the
//! root (the whole vertex set) is the last index, and any other sets keep
//! the relative order in which they were supplied.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("set #{0} is empty")]
    EmptySet(usize),
    #[error("set #{set} contains vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { set: usize, vertex: usize, n: usize },
    #[error("set #{0} lists a vertex twice")]
    RepeatedMember(usize),
    #[error("sets #{0} and #{1} are identical")]
    DuplicateSet(usize, usize),
    #[error("sets #{0} and #{1} properly intersect")]
    Overlap(usize, usize),
    #[error("singleton {{{0}}} is missing")]
    MissingSingleton(usize),
    #[error("root set (all vertices) is missing")]
    MissingRoot,
    #[error("family over zero vertices")]
    NoVertices,
}

/// A validated laminar family together with its containment tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarFamily {
    n: usize,
    members: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    postorder: Vec<usize>,
}

/// Where a canonical set came from: an input position, or inserted as a default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOrigin {
    Input(usize),
    Inserted,
}

/// Validates `sets` as a laminar family over `0..n` and builds its tree.
///
/// With `fill_defaults`, missing singletons and a missing root are inserted;
/// otherwise their absence is an error. The second return value maps each
/// canonical set index back to the input set it came from.
pub fn validate_family(
    n: usize,
    sets: &[Vec<usize>],
    fill_defaults: bool,
) -> Result<(LaminarFamily, Vec<SetOrigin>), FamilyError> {
    if n == 0 {
        return Err(FamilyError::NoVertices);
    }
    let mut normalized = Vec::with_capacity(sets.len());
    for (idx, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(FamilyError::EmptySet(idx));
        }
        let mut s = set.clone();
        s.sort_unstable();
        if let Some(&v) = s.iter().find(|&&v| v >= n) {
            return Err(FamilyError::VertexOutOfRange { set: idx, vertex: v, n });
        }
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(FamilyError::RepeatedMember(idx));
        }
        normalized.push(s);
    }

    // Laminarity check. Sets are visited from largest to smallest; `owner[v]`
    // is the smallest set seen so far containing v. In a laminar family every
    // member of the current set must share the same owner.
    let mut order: Vec<usize> = (0..normalized.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(normalized[i].len()), i));
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for &i in &order {
        let set = &normalized[i];
        let first = owner[set[0]];
        for &v in &set[1..] {
            if owner[v] != first {
                let other = match (first, owner[v]) {
                    (Some(a), _) if !normalized[a].contains(&v) => a,
                    (_, Some(b)) => b,
                    (Some(a), None) => a,
                    (None, None) => unreachable!(),
                };
                return Err(FamilyError::Overlap(other.min(i), other.max(i)));
            }
        }
        if let Some(p) = first {
            if normalized[p].len() == set.len() {
                return Err(FamilyError::DuplicateSet(p.min(i), p.max(i)));
            }
        }
        for &v in set {
            owner[v] = Some(i);
        }
    }

    let mut singleton_of: Vec<Option<usize>> = vec![None; n];
    let mut root_input = None;
    let mut middle = Vec::new();
    for (i, s) in normalized.iter().enumerate() {
        if s.len() == n {
            root_input = Some(i);
        }
        if s.len() == 1 {
            singleton_of[s[0]] = Some(i);
        }
        if s.len() != 1 && s.len() != n {
            middle.push(i);
        }
    }
    if !fill_defaults {
        if let Some(v) = singleton_of.iter().position(Option::is_none) {
            return Err(FamilyError::MissingSingleton(v));
        }
        if root_input.is_none() {
            return Err(FamilyError::MissingRoot);
        }
    }

    let mut members = Vec::new();
    let mut origin = Vec::new();
    for (v, input) in singleton_of.iter().enumerate() {
        members.push(vec![v]);
        origin.push(input.map_or(SetOrigin::Inserted, SetOrigin::Input));
    }
    for &i in &middle {
        members.push(normalized[i].clone());
        origin.push(SetOrigin::Input(i));
    }
    if n > 1 {
        members.push((0..n).collect());
        origin.push(root_input.map_or(SetOrigin::Inserted, SetOrigin::Input));
    } else if let Some(i) = root_input {
        // n == 1: the singleton is the root.
        origin[0] = SetOrigin::Input(i);
    }

    Ok((LaminarFamily::from_canonical(n, members), origin))
}

impl LaminarFamily {
    /// Builds the tree for sets already known to be laminar, distinct and in
    /// canonical order.
    fn from_canonical(n: usize, members: Vec<Vec<usize>>) -> Self {
        let m = members.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (std::cmp::Reverse(members[k].len()), k));
        let mut owner: Vec<Option<usize>> = vec![None; n];
        let mut parent = vec![None; m];
        for &k in &order {
            parent[k] = owner[members[k][0]];
            for &v in &members[k] {
                owner[v] = Some(k);
            }
        }
        let mut children = vec![Vec::new(); m];
        for k in 0..m {
            if let Some(p) = parent[k] {
                children[p].push(k);
            }
        }
        let root = m - 1;
        let mut preorder = Vec::with_capacity(m);
        let mut stack = vec![root];
        while let Some(k) = stack.pop() {
            preorder.push(k);
            stack.extend(children[k].iter().rev());
        }
        let mut postorder = Vec::with_capacity(m);
        let mut stack = vec![(root, false)];
        while let Some((k, expanded)) = stack.pop() {
            if expanded {
                postorder.push(k);
            } else {
                stack.push((k, true));
                stack.extend(children[k].iter().rev().map(|&c| (c, false)));
            }
        }
        LaminarFamily {
            n,
            members,
            parent,
            children,
            preorder,
            postorder,
        }
    }

    /// Family consisting of the singletons and the root only.
    pub fn flat(n: usize) -> Self {
        let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        if n > 1 {
            members.push((0..n).collect());
        }
        Self::from_canonical(n, members)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn root(&self) -> usize {
        self.members.len() - 1
    }

    pub fn is_root(&self, k: usize) -> bool {
        k == self.root()
    }

    pub fn members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent[k]
    }

    /// Children in ascending index order.
    pub fn children(&self, k: usize) -> &[usize] {
        &self.children[k]
    }

    /// Root first, children visited in ascending index order.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Leaves first, root last, children visited in ascending index order.
    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    /// Sets containing vertex `v`, from its singleton up to the root.
    pub fn chain(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(v), move |&k| self.parent[k])
    }

    /// Sets in canonical order, each as a sorted member list.
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.members
    }
}
