//! Diagrams: an oriented solid skeleton (circles and intervals) with a
//! dashed uni-trivalent graph attached.
//!
//! Univalent dashed vertices ("legs") sit on skeleton components at ordered
//! sites; trivalent vertices carry a cyclic order of their three slots.
//! Degree is half the number of dashed vertices. Closed dashed circles with
//! no vertices are tracked by a counter.
//!
//! [`Diagram::canonical`] computes a label-independent code together with an
//! orientation sign, quotienting by circle rotation, trivalent relabeling
//! and cyclic slot rotation. A diagram whose minimal code is reachable with
//! both signs is zero by antisymmetry and gets sign 0.

use serde::Serialize;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("leg {0} out of range or not attached to exactly one component site")]
    BadLeg(usize),
    #[error("edge end {0:?} invalid or not used exactly once")]
    BadEnd(End),
    #[error("edge connects an end to itself")]
    SelfEnd,
    #[error("edge count inconsistent with vertex degrees")]
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ComponentKind {
    Circle,
    Interval,
}

/// One skeleton component with its legs in traversal order (circles: cyclic
/// from an arbitrary basepoint; intervals: start to end).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub legs: Vec<usize>,
}

/// Endpoint of a dashed edge: a leg, or slot 0..3 of a trivalent vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum End {
    Leg(usize),
    Tri(usize, u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagram {
    components: Vec<Component>,
    n_legs: usize,
    n_tri: usize,
    edges: Vec<(End, End)>,
    free_loops: u32,
}

impl Diagram {
    pub fn new(
        components: Vec<Component>,
        n_tri: usize,
        edges: Vec<(End, End)>,
        free_loops: u32,
    ) -> Result<Self, DiagramError> {
        let n_legs: usize = components.iter().map(|c| c.legs.len()).sum();
        let d = Diagram {
            components,
            n_legs,
            n_tri,
            edges,
            free_loops,
        };
        d.validate()?;
        Ok(d)
    }

    /// Bare skeleton: the unit diagram on the given components.
    pub fn skeleton(kinds: &[ComponentKind]) -> Self {
        Diagram {
            components: kinds
                .iter()
                .map(|&kind| Component {
                    kind,
                    legs: Vec::new(),
                })
                .collect(),
            n_legs: 0,
            n_tri: 0,
            edges: Vec::new(),
            free_loops: 0,
        }
    }

    fn validate(&self) -> Result<(), DiagramError> {
        let mut seen = vec![false; self.n_legs];
        for c in &self.components {
            for &l in &c.legs {
                if l >= self.n_legs || seen[l] {
                    return Err(DiagramError::BadLeg(l));
                }
                seen[l] = true;
            }
        }
        if 2 * self.edges.len() != self.n_legs + 3 * self.n_tri {
            return Err(DiagramError::Count);
        }
        let mut used = vec![false; self.n_legs + 3 * self.n_tri];
        for &(a, b) in &self.edges {
            if a == b {
                return Err(DiagramError::SelfEnd);
            }
            for e in [a, b] {
                let i = self.end_index(e).ok_or(DiagramError::BadEnd(e))?;
                if used[i] {
                    return Err(DiagramError::BadEnd(e));
                }
                used[i] = true;
            }
        }
        Ok(())
    }

    fn end_index(&self, e: End) -> Option<usize> {
        match e {
            End::Leg(l) if l < self.n_legs => Some(l),
            End::Tri(v, s) if v < self.n_tri && s < 3 => {
                Some(self.n_legs + 3 * v + s as usize)
            }
            _ => None,
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn kinds(&self) -> Vec<ComponentKind> {
        self.components.iter().map(|c| c.kind).collect()
    }

    pub fn edges(&self) -> &[(End, End)] {
        &self.edges
    }

    pub fn n_legs(&self) -> usize {
        self.n_legs
    }

    pub fn n_tri(&self) -> usize {
        self.n_tri
    }

    pub fn free_loops(&self) -> u32 {
        self.free_loops
    }

    pub fn with_free_loops(mut self, loops: u32) -> Self {
        self.free_loops = loops;
        self
    }

    /// Same graph with slots 1 and 2 swapped at trivalent vertex `v`;
    /// by antisymmetry this negates the orientation, so it turns a
    /// canonical-sign −1 representative into a +1 one.
    pub(crate) fn flip_vertex(&self, v: usize) -> Diagram {
        debug_assert!(v < self.n_tri);
        let mut d = self.clone();
        for e in &mut d.edges {
            for end in [&mut e.0, &mut e.1] {
                if let End::Tri(w, s) = end {
                    if *w == v && *s > 0 {
                        *s = 3 - *s;
                    }
                }
            }
        }
        d
    }

    /// Half the number of dashed vertices.
    pub fn degree(&self) -> u32 {
        debug_assert!((self.n_legs + self.n_tri) % 2 == 0);
        ((self.n_legs + self.n_tri) / 2) as u32
    }

    /// Number of legs sitting on component `c`.
    pub fn legs_on(&self, c: usize) -> usize {
        self.components[c].legs.len()
    }

    /// Place the two diagrams side by side; `other`'s components, legs and
    /// vertices are renumbered past `self`'s.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        let mut components = self.components.clone();
        components.extend(other.components.iter().map(|c| Component {
            kind: c.kind,
            legs: c.legs.iter().map(|l| l + self.n_legs).collect(),
        }));
        let shift = |e: End| match e {
            End::Leg(l) => End::Leg(l + self.n_legs),
            End::Tri(v, s) => End::Tri(v + self.n_tri, s),
        };
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (shift(a), shift(b))));
        Diagram {
            components,
            n_legs: self.n_legs + other.n_legs,
            n_tri: self.n_tri + other.n_tri,
            edges,
            free_loops: self.free_loops + other.free_loops,
        }
    }

    /// Compose vertically on a common skeleton of intervals: `self`'s legs
    /// come first on every component, `other`'s after.
    pub fn stack(&self, other: &Diagram) -> Diagram {
        assert_eq!(self.kinds(), other.kinds());
        assert!(self
            .components
            .iter()
            .all(|c| c.kind == ComponentKind::Interval));
        let mut components = Vec::with_capacity(self.components.len());
        for (a, b) in self.components.iter().zip(&other.components) {
            let mut legs = a.legs.clone();
            legs.extend(b.legs.iter().map(|l| l + self.n_legs));
            components.push(Component {
                kind: a.kind,
                legs,
            });
        }
        let shift = |e: End| match e {
            End::Leg(l) => End::Leg(l + self.n_legs),
            End::Tri(v, s) => End::Tri(v + self.n_tri, s),
        };
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (shift(a), shift(b))));
        Diagram {
            components,
            n_legs: self.n_legs + other.n_legs,
            n_tri: self.n_tri + other.n_tri,
            edges,
            free_loops: self.free_loops + other.free_loops,
        }
    }

    /// Reverse the orientation of skeleton component `c`: legs reverse
    /// order, and the sign (−1)^{#legs on c} comes out.
    pub fn reverse_component(&self, c: usize) -> (Diagram, i8) {
        let mut d = self.clone();
        d.components[c].legs.reverse();
        let sign = if d.components[c].legs.len() % 2 == 0 {
            1
        } else {
            -1
        };
        (d, sign)
    }

    /// Canonical code and orientation sign (0 if the diagram dies by
    /// antisymmetry).
    pub fn canonical(&self) -> (Vec<u32>, i8) {
        Canonizer::run(self)
    }
}

/// Builder used by the gluing and tangle-evaluation code.
#[derive(Debug, Clone, Default)]
pub struct DiagramBuilder {
    components: Vec<Component>,
    n_legs: usize,
    n_tri: usize,
    edges: Vec<(End, End)>,
    free_loops: u32,
}

impl DiagramBuilder {
    pub fn new() -> Self {
        DiagramBuilder::default()
    }

    pub fn add_component(&mut self, kind: ComponentKind) -> usize {
        self.components.push(Component {
            kind,
            legs: Vec::new(),
        });
        self.components.len() - 1
    }

    /// Append a leg at the end of component `c`'s site list.
    pub fn new_leg(&mut self, c: usize) -> End {
        let id = self.n_legs;
        self.n_legs += 1;
        self.components[c].legs.push(id);
        End::Leg(id)
    }

    pub fn new_vertex(&mut self) -> usize {
        self.n_tri += 1;
        self.n_tri - 1
    }

    pub fn connect(&mut self, a: End, b: End) {
        self.edges.push((a, b));
    }

    pub fn add_free_loops(&mut self, n: u32) {
        self.free_loops += n;
    }

    pub fn build(self) -> Result<Diagram, DiagramError> {
        Diagram::new(self.components, self.n_tri, self.edges, self.free_loops)
    }
}

/// Backtracking search for the lexicographically minimal emission code.
///
/// The code lists, after a fixed header, one edge label per leg site (in
/// skeleton order, each circle starting at a chosen rotation) and then three
/// labels per trivalent vertex in discovery order, each vertex read in a
/// chosen rotation or reflection of its cyclic order. Labels are assigned by
/// first appearance. Reflections flip the tracked sign.
struct Canonizer<'a> {
    d: &'a Diagram,
    /// For each end index: (edge id, opposite end index).
    adj: Vec<(usize, usize)>,
    best: Option<Vec<u32>>,
    plus: bool,
    minus: bool,
}

#[derive(Clone)]
struct EmitState {
    code: Vec<u32>,
    labels: Vec<Option<u32>>,
    next_label: u32,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    emitted: Vec<bool>,
    comp_pos: usize,
    sign: i8,
    /// Strictly below the incumbent best on some earlier position.
    ahead: bool,
}

impl<'a> Canonizer<'a> {
    fn run(d: &Diagram) -> (Vec<u32>, i8) {
        let n_ends = d.n_legs + 3 * d.n_tri;
        let mut adj = vec![(usize::MAX, usize::MAX); n_ends];
        for (eid, &(a, b)) in d.edges.iter().enumerate() {
            let ia = d.end_index(a).unwrap();
            let ib = d.end_index(b).unwrap();
            adj[ia] = (eid, ib);
            adj[ib] = (eid, ia);
        }
        let mut cz = Canonizer {
            d,
            adj,
            best: None,
            plus: false,
            minus: false,
        };
        let mut header = vec![d.free_loops, d.components.len() as u32];
        for c in &d.components {
            header.push(match c.kind {
                ComponentKind::Circle => 0,
                ComponentKind::Interval => 1,
            });
            header.push(c.legs.len() as u32);
        }
        header.push(d.n_tri as u32);
        let state = EmitState {
            code: header,
            labels: vec![None; d.edges.len()],
            next_label: 0,
            queue: VecDeque::new(),
            queued: vec![false; d.n_tri],
            emitted: vec![false; d.n_tri],
            comp_pos: 0,
            sign: 1,
            ahead: false,
        };
        cz.search(state);
        let code = cz.best.expect("canonical search always completes");
        let sign = match (cz.plus, cz.minus) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => -1,
            (false, false) => unreachable!(),
        };
        (code, sign)
    }

    /// Emit one end's edge label; returns false if the prefix already
    /// exceeds the incumbent best.
    fn emit_end(&mut self, st: &mut EmitState, end_idx: usize) -> bool {
        let (eid, opp) = self.adj[end_idx];
        let label = *st.labels[eid].get_or_insert(st.next_label);
        if label == st.next_label {
            st.next_label += 1;
            // Edge seen for the first time: discover the far vertex.
            if opp >= self.d.n_legs {
                let v = (opp - self.d.n_legs) / 3;
                if !st.queued[v] {
                    st.queued[v] = true;
                    st.queue.push_back(v);
                }
            }
        }
        st.code.push(label);
        if !st.ahead {
            if let Some(best) = &self.best {
                let i = st.code.len() - 1;
                match st.code[i].cmp(&best[i]) {
                    std::cmp::Ordering::Greater => return false,
                    std::cmp::Ordering::Less => st.ahead = true,
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
        true
    }

    fn search(&mut self, st: EmitState) {
        // Phase 1: leg sites, one component at a time.
        if st.comp_pos < self.d.components.len() {
            let c = &self.d.components[st.comp_pos];
            let n = c.legs.len();
            let rotations: Vec<usize> = match c.kind {
                ComponentKind::Circle if n > 1 => (0..n).collect(),
                _ => vec![0],
            };
            for r in rotations {
                let mut s2 = st.clone();
                s2.comp_pos += 1;
                let mut ok = true;
                for i in 0..n {
                    let leg = c.legs[(r + i) % n];
                    if !self.emit_end(&mut s2, leg) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    self.search(s2);
                }
            }
            return;
        }
        // Phase 2: trivalent vertices in discovery order.
        let mut st = st;
        if let Some(v) = st.queue.pop_front() {
            st.emitted[v] = true;
            let base = self.d.n_legs + 3 * v;
            for rot in 0..3u8 {
                for refl in [false, true] {
                    let slots: [u8; 3] = if refl {
                        [rot, (rot + 2) % 3, (rot + 1) % 3]
                    } else {
                        [rot, (rot + 1) % 3, (rot + 2) % 3]
                    };
                    let mut s2 = st.clone();
                    if refl {
                        s2.sign = -s2.sign;
                    }
                    let mut ok = true;
                    for s in slots {
                        if !self.emit_end(&mut s2, base + s as usize) {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        self.search(s2);
                    }
                }
            }
            return;
        }
        // Phase 3: seed a vacuum part not reachable from the skeleton.
        if let Some(_) = (0..self.d.n_tri).find(|&v| !st.queued[v]) {
            for v in 0..self.d.n_tri {
                if !st.queued[v] {
                    let mut s2 = st.clone();
                    s2.queued[v] = true;
                    s2.queue.push_back(v);
                    self.search(s2);
                }
            }
            return;
        }
        // Complete code.
        let better = match &self.best {
            None => true,
            Some(best) => st.code < *best,
        };
        if better {
            self.best = Some(st.code);
            self.plus = st.sign == 1;
            self.minus = st.sign == -1;
        } else if self.best.as_ref() == Some(&st.code) {
            if st.sign == 1 {
                self.plus = true;
            } else {
                self.minus = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComponentKind::*;
    use End::*;

    fn circle_chords(n_legs: usize, chords: &[(usize, usize)]) -> Diagram {
        Diagram::new(
            vec![Component {
                kind: Circle,
                legs: (0..n_legs).collect(),
            }],
            0,
            chords.iter().map(|&(a, b)| (Leg(a), Leg(b))).collect(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_diagrams() {
        // leg used twice
        assert!(Diagram::new(
            vec![Component { kind: Circle, legs: vec![0, 0] }],
            0,
            vec![(Leg(0), Leg(1))],
            0
        )
        .is_err());
        // dangling slot
        assert!(Diagram::new(vec![], 1, vec![(Tri(0, 0), Tri(0, 1))], 0).is_err());
        // end reused
        assert!(circle_chords_checked(2, &[(0, 1), (0, 1)]).is_err());
        fn circle_chords_checked(
            n: usize,
            ch: &[(usize, usize)],
        ) -> Result<Diagram, DiagramError> {
            Diagram::new(
                vec![Component { kind: Circle, legs: (0..n).collect() }],
                0,
                ch.iter().map(|&(a, b)| (Leg(a), Leg(b))).collect(),
                0,
            )
        }
    }

    #[test]
    fn degree_counts_half_the_vertices() {
        let d = circle_chords(4, &[(0, 2), (1, 3)]);
        assert_eq!(d.degree(), 2);
        assert_eq!(Diagram::skeleton(&[Circle]).degree(), 0);
    }

    #[test]
    fn circle_rotation_is_quotiented() {
        // two parallel chords vs the same picture rotated by one site
        let a = circle_chords(4, &[(0, 1), (2, 3)]);
        let b = circle_chords(4, &[(1, 2), (3, 0)]);
        assert_eq!(a.canonical(), b.canonical());
        // crossing chords differ from parallel ones
        let x = circle_chords(4, &[(0, 2), (1, 3)]);
        assert_ne!(a.canonical().0, x.canonical().0);
    }

    #[test]
    fn interval_sites_are_not_rotated() {
        let mk = |chords: &[(usize, usize)]| {
            Diagram::new(
                vec![Component { kind: Interval, legs: (0..4).collect() }],
                0,
                chords.iter().map(|&(a, b)| (Leg(a), Leg(b))).collect(),
                0,
            )
            .unwrap()
        };
        let a = mk(&[(0, 1), (2, 3)]);
        let b = mk(&[(1, 2), (3, 0)]);
        assert_ne!(a.canonical().0, b.canonical().0);
    }

    #[test]
    fn edge_list_order_is_irrelevant() {
        let a = circle_chords(4, &[(0, 2), (1, 3)]);
        let b = circle_chords(4, &[(3, 1), (2, 0)]);
        assert_eq!(a.canonical(), b.canonical());
    }

    fn theta(pairing: [u8; 3]) -> Diagram {
        // two trivalent vertices joined by three edges; slot s of vertex 0
        // meets slot pairing[s] of vertex 1
        Diagram::new(
            vec![],
            2,
            (0..3)
                .map(|s| (Tri(0, s as u8), Tri(1, pairing[s])))
                .collect(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn theta_is_nonzero_and_orientation_independent() {
        let t = theta([0, 1, 2]);
        let (code, sign) = t.canonical();
        assert_eq!(sign, 1);
        // reversed pairing is the same diagram up to vertex orientation
        let r = theta([0, 2, 1]);
        let (code_r, sign_r) = r.canonical();
        assert_eq!(code, code_r);
        assert_eq!(sign_r, -1);
    }

    #[test]
    fn tadpole_and_dumbbell_die_by_antisymmetry() {
        // vertex 0 has a self-loop on slots 0,1; slot 2 runs to vertex 1,
        // which also has a self-loop
        let dumbbell = Diagram::new(
            vec![],
            2,
            vec![
                (Tri(0, 0), Tri(0, 1)),
                (Tri(0, 2), Tri(1, 2)),
                (Tri(1, 0), Tri(1, 1)),
            ],
            0,
        )
        .unwrap();
        assert_eq!(dumbbell.canonical().1, 0);
        // tadpole hanging off a circle
        let tadpole = Diagram::new(
            vec![Component { kind: Circle, legs: vec![0] }],
            1,
            vec![(Leg(0), Tri(0, 2)), (Tri(0, 0), Tri(0, 1))],
            0,
        )
        .unwrap();
        assert_eq!(tadpole.canonical().1, 0);
    }

    #[test]
    fn free_loops_distinguish() {
        let a = Diagram::skeleton(&[Circle]);
        let b = Diagram::skeleton(&[Circle]).with_free_loops(1);
        assert_ne!(a.canonical().0, b.canonical().0);
    }

    #[test]
    fn disjoint_union_offsets() {
        let a = circle_chords(2, &[(0, 1)]);
        let u = a.disjoint_union(&a);
        assert_eq!(u.n_legs(), 4);
        assert_eq!(u.components().len(), 2);
        assert_eq!(u.degree(), 2);
        u.clone().canonical();
    }

    #[test]
    fn reverse_component_sign() {
        let d4 = circle_chords(4, &[(0, 1), (2, 3)]);
        let (_, s) = d4.reverse_component(0);
        assert_eq!(s, 1);
        let d1 = Diagram::new(
            vec![
                Component { kind: Circle, legs: vec![0] },
                Component { kind: Circle, legs: vec![1] },
            ],
            0,
            vec![(Leg(0), Leg(1))],
            0,
        )
        .unwrap();
        assert_eq!(d1.reverse_component(0).1, -1);
    }

    #[test]
    fn vacuum_parts_are_found() {
        // wheel-like: circle with 2 legs joined by an edge, plus a theta
        let skel = circle_chords(2, &[(0, 1)]);
        let both = skel.disjoint_union(&theta([0, 1, 2]));
        let (code, sign) = both.canonical();
        assert_eq!(sign, 1);
        assert!(code.len() > 4);
    }
}
