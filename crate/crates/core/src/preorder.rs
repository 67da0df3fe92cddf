//! Finite pre-ordered sets and the combinatorics built on them.
//!
//! Vertices are dense indices `0..size`. Besides closure and connectivity this
//! module computes the cycle equivalence on strict edges: two strict edges are
//! equivalent when a cycle of the comparability graph passes through both,
//! where a pair `x ≃ y` counts as a 2-cycle. The classes coincide with the
//! blocks (biconnected components) of the simple comparability graph, which is
//! how they are computed here.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreorderError {
    #[error("vertex {vertex} out of range for a pre-order on {size} points")]
    OutOfRange { vertex: usize, size: usize },
    #[error("relation is not reflexive at {0}")]
    NotReflexive(usize),
    #[error("relation is not transitive: {0} <= {1} <= {2} but not {0} <= {2}")]
    NotTransitive(usize, usize, usize),
    #[error("component {component} does not exist ({count} components)")]
    NoSuchComponent { component: usize, count: usize },
    #[error("class {class} does not exist ({count} classes)")]
    NoSuchClass { class: usize, count: usize },
    #[error("vertex {vertex} is not incident to class {class}")]
    NotIncident { vertex: usize, class: usize },
}

/// A reflexive, transitive relation on `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preorder {
    size: usize,
    leq: Vec<bool>,
}

impl Preorder {
    /// Reflexive-transitive closure of the generating pairs.
    pub fn from_generators(
        size: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PreorderError> {
        let mut leq = vec![false; size * size];
        for x in 0..size {
            leq[x * size + x] = true;
        }
        for (x, y) in pairs {
            check_vertex(x, size)?;
            check_vertex(y, size)?;
            leq[x * size + y] = true;
        }
        // Warshall
        for k in 0..size {
            for i in 0..size {
                if !leq[i * size + k] {
                    continue;
                }
                for j in 0..size {
                    if leq[k * size + j] {
                        leq[i * size + j] = true;
                    }
                }
            }
        }
        Ok(Preorder { size, leq })
    }

    /// Takes the relation as given and rejects it unless it is already a pre-order.
    pub fn from_relation(
        size: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PreorderError> {
        let mut leq = vec![false; size * size];
        for (x, y) in pairs {
            check_vertex(x, size)?;
            check_vertex(y, size)?;
            leq[x * size + y] = true;
        }
        let p = Preorder { size, leq };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), PreorderError> {
        for x in 0..self.size {
            if !self.leq(x, x) {
                return Err(PreorderError::NotReflexive(x));
            }
        }
        for x in 0..self.size {
            for y in 0..self.size {
                if !self.leq(x, y) {
                    continue;
                }
                for z in 0..self.size {
                    if self.leq(y, z) && !self.leq(x, z) {
                        return Err(PreorderError::NotTransitive(x, y, z));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.size
    }

    /// `x <= y`; false for out-of-range vertices.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        x < self.size && y < self.size && self.leq[x * self.size + y]
    }

    /// `x < y`, i.e. `x <= y` and `x != y`.
    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// `x ≃ y`: both `x <= y` and `y <= x`.
    pub fn equivalent(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) && self.leq(y, x)
    }

    /// `x ~ y`: `x <= y` or `y <= x`.
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// All pairs `x <= y`, lexicographic.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size;
        (0..n)
            .flat_map(move |x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| self.leq(x, y))
    }

    /// All strict pairs `x < y`, lexicographic.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs().filter(|(x, y)| x != y)
    }

    /// Neighbours of `x` in the comparability graph, ascending.
    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        (0..self.size)
            .filter(|&y| y != x && self.comparable(x, y))
            .collect()
    }

    pub fn is_poset(&self) -> bool {
        self.strict_pairs().all(|(x, y)| !self.leq(y, x))
    }

    pub fn connected_components(&self) -> Components {
        let mut labels = vec![usize::MAX; self.size];
        let mut members = Vec::new();
        for start in 0..self.size {
            if labels[start] != usize::MAX {
                continue;
            }
            let id = members.len();
            let mut group = Vec::new();
            let mut queue = VecDeque::from([start]);
            labels[start] = id;
            while let Some(u) = queue.pop_front() {
                group.push(u);
                for v in self.neighbors(u) {
                    if labels[v] == usize::MAX {
                        labels[v] = id;
                        queue.push_back(v);
                    }
                }
            }
            group.sort_unstable();
            members.push(group);
        }
        Components { labels, members }
    }

    /// True iff every two points of the component are `≃`.
    pub fn is_full_component(&self, component: usize) -> Result<bool, PreorderError> {
        let comps = self.connected_components();
        let members = comps.members(component)?;
        Ok(members
            .iter()
            .all(|&x| members.iter().all(|&y| self.equivalent(x, y))))
    }

    pub fn edge_classes(&self) -> EdgeClassification {
        EdgeClassification::new(self)
    }
}

fn check_vertex(x: usize, size: usize) -> Result<(), PreorderError> {
    if x < size {
        Ok(())
    } else {
        Err(PreorderError::OutOfRange { vertex: x, size })
    }
}

/// Connected components of the comparability graph, labelled in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn members(&self, component: usize) -> Result<&[usize], PreorderError> {
        self.members
            .get(component)
            .map(Vec::as_slice)
            .ok_or(PreorderError::NoSuchComponent {
                component,
                count: self.members.len(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }
}

/// One cycle-equivalence class of strict edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClass {
    /// Strict edges `(x, y)`, `x < y`, lexicographic.
    pub edges: Vec<(usize, usize)>,
    /// Endpoints of the edges.
    pub vertices: BTreeSet<usize>,
    pub component: usize,
}

/// Strict edges grouped into cycle-equivalence classes, with the vertex sets
/// derived from them.
///
/// Classes are numbered by their lexicographically least edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClassification {
    edges: Vec<(usize, usize)>,
    edge_class: BTreeMap<(usize, usize), usize>,
    classes: Vec<EdgeClass>,
    components: Components,
    classes_at: Vec<BTreeSet<usize>>,
    adjacency: Vec<Vec<usize>>,
}

impl EdgeClassification {
    fn new(p: &Preorder) -> Self {
        let n = p.size();
        let adjacency: Vec<Vec<usize>> = (0..n).map(|x| p.neighbors(x)).collect();
        let components = p.connected_components();

        let mut blocks = Blocks::new(&adjacency).run();
        // each block, as a set of unordered pairs, becomes one class
        let mut raw: Vec<EdgeClass> = blocks
            .drain(..)
            .map(|block| {
                let mut edges = Vec::new();
                let mut vertices = BTreeSet::new();
                for (a, b) in block {
                    vertices.insert(a);
                    vertices.insert(b);
                    if p.leq(a, b) {
                        edges.push((a, b));
                    }
                    if p.leq(b, a) {
                        edges.push((b, a));
                    }
                }
                edges.sort_unstable();
                let component = components.label(edges[0].0);
                EdgeClass {
                    edges,
                    vertices,
                    component,
                }
            })
            .collect();
        raw.sort_by_key(|c| c.edges[0]);

        let mut edge_class = BTreeMap::new();
        let mut classes_at = vec![BTreeSet::new(); n];
        for (i, class) in raw.iter().enumerate() {
            for &e in &class.edges {
                edge_class.insert(e, i);
            }
            for &v in &class.vertices {
                classes_at[v].insert(i);
            }
        }
        let edges = edge_class.keys().copied().collect();
        EdgeClassification {
            edges,
            edge_class,
            classes: raw,
            components,
            classes_at,
            adjacency,
        }
    }

    pub fn size(&self) -> usize {
        self.adjacency.len()
    }

    /// All strict edges, lexicographic.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[EdgeClass] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> Result<&EdgeClass, PreorderError> {
        self.classes.get(i).ok_or(PreorderError::NoSuchClass {
            class: i,
            count: self.classes.len(),
        })
    }

    /// Class of the strict edge `(x, y)`; `None` unless `x < y`.
    pub fn class_of(&self, x: usize, y: usize) -> Option<usize> {
        self.edge_class.get(&(x, y)).copied()
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    pub fn component_of(&self, x: usize) -> usize {
        self.components.label(x)
    }

    /// Class ids whose vertex set contains `x`.
    pub fn classes_at(&self, x: usize) -> &BTreeSet<usize> {
        &self.classes_at[x]
    }

    /// Classes hosted by a component, ascending.
    pub fn classes_in_component(&self, component: usize) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| self.classes[i].component == component)
            .collect()
    }

    /// `V(x, i)`: `x`, the vertices of class `i`, and everything reachable
    /// from them without passing through `x`.
    pub fn v_set(&self, x: usize, i: usize) -> Result<BTreeSet<usize>, PreorderError> {
        let class = self.class(i)?;
        if !class.vertices.contains(&x) {
            return Err(PreorderError::NotIncident {
                vertex: x,
                class: i,
            });
        }
        let mut seen: BTreeSet<usize> = class.vertices.clone();
        let mut queue: VecDeque<usize> = class.vertices.iter().copied().filter(|&v| v != x).collect();
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if v != x && seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        Ok(seen)
    }

    /// For each `x` in the vertex set of class `i`, the points of the host
    /// component reachable from `x` through vertices outside that set.
    pub fn vx_partition(&self, i: usize) -> Result<BTreeMap<usize, BTreeSet<usize>>, PreorderError> {
        let blocked = &self.class(i)?.vertices;
        let mut out = BTreeMap::new();
        for &x in blocked {
            let mut reach = BTreeSet::from([x]);
            let mut queue = VecDeque::from([x]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if !blocked.contains(&v) && reach.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
            out.insert(x, reach);
        }
        Ok(out)
    }
}

/// Tarjan's biconnected components over a simple undirected graph, returning
/// each block as its list of edges `(a, b)` with `a < b`.
struct Blocks<'a> {
    adjacency: &'a [Vec<usize>],
    disc: Vec<usize>,
    low: Vec<usize>,
    timer: usize,
    stack: Vec<(usize, usize)>,
    blocks: Vec<Vec<(usize, usize)>>,
}

const UNSEEN: usize = usize::MAX;

impl<'a> Blocks<'a> {
    fn new(adjacency: &'a [Vec<usize>]) -> Self {
        let n = adjacency.len();
        Blocks {
            adjacency,
            disc: vec![UNSEEN; n],
            low: vec![0; n],
            timer: 0,
            stack: Vec::new(),
            blocks: Vec::new(),
        }
    }

    fn run(mut self) -> Vec<Vec<(usize, usize)>> {
        for root in 0..self.adjacency.len() {
            if self.disc[root] == UNSEEN {
                self.visit(root);
            }
        }
        self.blocks
    }

    // Iterative DFS; frames hold (vertex, parent, next neighbour index).
    fn visit(&mut self, root: usize) {
        let mut frames = vec![(root, UNSEEN, 0usize)];
        self.disc[root] = self.timer;
        self.low[root] = self.timer;
        self.timer += 1;
        while let Some(frame) = frames.last_mut() {
            let (u, parent, idx) = *frame;
            if let Some(&v) = self.adjacency[u].get(idx) {
                frame.2 += 1;
                if self.disc[v] == UNSEEN {
                    self.stack.push((u, v));
                    self.disc[v] = self.timer;
                    self.low[v] = self.timer;
                    self.timer += 1;
                    frames.push((v, u, 0));
                } else if v != parent && self.disc[v] < self.disc[u] {
                    self.stack.push((u, v));
                    self.low[u] = self.low[u].min(self.disc[v]);
                }
                continue;
            }
            frames.pop();
            if parent == UNSEEN {
                continue;
            }
            self.low[parent] = self.low[parent].min(self.low[u]);
            if self.low[u] >= self.disc[parent] {
                let mut block = Vec::new();
                while let Some((a, b)) = self.stack.pop() {
                    block.push((a.min(b), a.max(b)));
                    if (a, b) == (parent, u) {
                        break;
                    }
                }
                self.blocks.push(block);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> Preorder {
        Preorder::from_generators(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn vee() -> Preorder {
        Preorder::from_generators(3, [(0, 1), (0, 2)]).unwrap()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn closure_examples() {
        let c = chain3();
        assert!(c.leq(0, 2));
        assert!(!c.leq(2, 0));
        let loop2 = Preorder::from_generators(2, [(0, 1), (1, 0)]).unwrap();
        assert!(loop2.equivalent(0, 1));
        assert!(!loop2.is_poset());
        let one = Preorder::from_generators(1, []).unwrap();
        assert!(one.leq(0, 0));
        assert_eq!(
            Preorder::from_generators(2, [(0, 2)]),
            Err(PreorderError::OutOfRange { vertex: 2, size: 2 })
        );
    }

    #[test]
    fn from_relation_requires_closure() {
        assert_eq!(
            Preorder::from_relation(2, [(0, 0), (0, 1)]),
            Err(PreorderError::NotReflexive(1))
        );
        assert_eq!(
            Preorder::from_relation(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]),
            Err(PreorderError::NotTransitive(0, 1, 2))
        );
        assert_eq!(
            Preorder::from_relation(3, chain3().pairs()).unwrap(),
            chain3()
        );
    }

    #[test]
    fn components_examples() {
        assert_eq!(chain3().connected_components().count(), 1);
        let two = Preorder::from_generators(4, [(0, 1), (2, 3)]).unwrap();
        let comps = two.connected_components();
        assert_eq!(comps.count(), 2);
        assert_eq!(comps.members(0).unwrap(), &[0, 1]);
        assert_eq!(comps.members(1).unwrap(), &[2, 3]);
        let iso = Preorder::from_generators(3, [(0, 1)]).unwrap();
        assert_eq!(iso.connected_components().members(1).unwrap(), &[2]);
    }

    #[test]
    fn class_examples() {
        let c = chain3().edge_classes();
        assert_eq!(c.num_classes(), 1);
        assert_eq!(c.class(0).unwrap().edges, vec![(0, 1), (0, 2), (1, 2)]);

        let v = vee().edge_classes();
        assert_eq!(v.num_classes(), 2);
        assert_eq!(v.class_of(0, 1), Some(0));
        assert_eq!(v.class_of(0, 2), Some(1));

        let l = Preorder::from_generators(2, [(0, 1), (1, 0)]).unwrap().edge_classes();
        assert_eq!(l.num_classes(), 1);
        assert_eq!(l.class(0).unwrap().edges, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn v_set_examples() {
        let v = vee().edge_classes();
        assert_eq!(v.v_set(0, 0).unwrap(), set(&[0, 1]));
        assert_eq!(v.v_set(1, 0).unwrap(), set(&[0, 1, 2]));
        assert_eq!(
            v.v_set(2, 0),
            Err(PreorderError::NotIncident { vertex: 2, class: 0 })
        );
        assert_eq!(chain3().edge_classes().v_set(0, 0).unwrap(), set(&[0, 1, 2]));
    }

    #[test]
    fn vx_partition_examples() {
        let v = vee().edge_classes();
        let part = v.vx_partition(0).unwrap();
        assert_eq!(part[&0], set(&[0, 2]));
        assert_eq!(part[&1], set(&[1]));

        let l = Preorder::from_generators(2, [(0, 1), (1, 0)]).unwrap().edge_classes();
        let part = l.vx_partition(0).unwrap();
        assert_eq!(part[&0], set(&[0]));
        assert_eq!(part[&1], set(&[1]));

        let part = chain3().edge_classes().vx_partition(0).unwrap();
        assert!(part.iter().all(|(x, vx)| *vx == set(&[*x])));
    }

    #[test]
    fn full_components() {
        let loop2 = Preorder::from_generators(2, [(0, 1), (1, 0)]).unwrap();
        assert!(loop2.is_full_component(0).unwrap());
        let c2 = Preorder::from_generators(2, [(0, 1)]).unwrap();
        assert!(!c2.is_full_component(0).unwrap());
        let single = Preorder::from_generators(1, []).unwrap();
        assert!(single.is_full_component(0).unwrap());
        assert!(single.is_full_component(1).is_err());
    }
}
