//! Linear combinations of diagrams, the structural maps (orientation
//! reversal, doubling, connected sum, comultiplication, the degree
//! involution), and reduction modulo selectable relation sets.
//!
//! Reduction builds a relation closure breadth-first from the support of the
//! element, performs exact rational elimination with canonically ordered
//! pivots, and reports an explicit error when the closure budget runs out
//! before a nonzero normal form can be certified.

use crate::diagrams::{Component, ComponentKind, Diagram, DiagramError, End};
use crate::scalars::Scalar;
use num::{BigInt, BigRational, One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("elements live on different skeletons")]
    SkeletonMismatch,
    #[error("component {0} does not exist")]
    UnknownComponent(usize),
    #[error("component {0} is not a circle")]
    NotCircle(usize),
    #[error("relation closure budget ({budget} rounds) exhausted with a nonzero residue")]
    BudgetExceeded { budget: u32 },
    #[error("degree-0 coefficient is not an invertible rational")]
    NotInvertible,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Finite combination of diagrams over the scalar ring, keyed by canonical
/// code with the orientation sign folded into the coefficient. All terms
/// share one skeleton; degrees above `degree_cap` are discarded on entry.
#[derive(Debug, Clone)]
pub struct Element {
    kinds: Vec<ComponentKind>,
    degree_cap: u32,
    terms: BTreeMap<Vec<u32>, (Diagram, Scalar)>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.kinds == other.kinds
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(other.terms.iter())
                .all(|((c1, (_, s1)), (c2, (_, s2)))| c1 == c2 && s1 == s2)
    }
}

impl Element {
    pub fn zero(kinds: Vec<ComponentKind>, degree_cap: u32) -> Self {
        Element {
            kinds,
            degree_cap,
            terms: BTreeMap::new(),
        }
    }

    /// The unit: bare skeleton with coefficient 1.
    pub fn unit(kinds: Vec<ComponentKind>, degree_cap: u32) -> Self {
        let d = Diagram::skeleton(&kinds);
        let mut e = Element::zero(kinds, degree_cap);
        e.add_diagram(d, Scalar::one());
        e
    }

    pub fn from_diagram(d: Diagram, degree_cap: u32) -> Self {
        let mut e = Element::zero(d.kinds(), degree_cap);
        e.add_diagram(d, Scalar::one());
        e
    }

    pub fn kinds(&self) -> &[ComponentKind] {
        &self.kinds
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self.terms.retain(|_, (d, _)| d.degree() <= cap);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Diagram, &Scalar)> {
        self.terms.iter().map(|(c, (d, s))| (c, d, s))
    }

    /// Canonicalize and accumulate; antisymmetry-zero diagrams and terms
    /// above the cap are dropped. The stored representative is reoriented
    /// to canonical sign +1, so every stored coefficient is the literal
    /// coefficient of its stored diagram.
    pub fn add_diagram(&mut self, d: Diagram, coeff: Scalar) {
        debug_assert_eq!(d.kinds(), self.kinds);
        if coeff.is_zero() || d.degree() > self.degree_cap {
            return;
        }
        let (code, sign) = d.canonical();
        if sign == 0 {
            return;
        }
        let (d, coeff) = if sign < 0 {
            let flipped = d.flip_vertex(0);
            debug_assert_eq!(flipped.canonical(), (code.clone(), 1));
            (flipped, -coeff)
        } else {
            (d, coeff)
        };
        match self.terms.get_mut(&code) {
            Some((_, s)) => {
                *s = &*s + &coeff;
                if s.is_zero() {
                    self.terms.remove(&code);
                }
            }
            None => {
                self.terms.insert(code, (d, coeff));
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.kinds, other.kinds);
        let mut out = self.clone();
        for (_, (d, s)) in &other.terms {
            out.add_diagram(d.clone(), s.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        if c.is_zero() {
            return Element::zero(self.kinds.clone(), self.degree_cap);
        }
        let mut out = Element::zero(self.kinds.clone(), self.degree_cap);
        for (code, (d, s)) in &self.terms {
            let ns = s * c;
            if !ns.is_zero() {
                out.terms.insert(code.clone(), (d.clone(), ns));
            }
        }
        out
    }

    /// Coefficient of the bare skeleton (degree-0 projection).
    pub fn epsilon(&self) -> Scalar {
        let (code, _) = Diagram::skeleton(&self.kinds).canonical();
        self.terms
            .get(&code)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(Scalar::zero)
    }

    /// Keep only the degree-d part.
    pub fn graded_part(&self, d: u32) -> Element {
        let mut out = Element::zero(self.kinds.clone(), self.degree_cap);
        for (code, (dg, s)) in &self.terms {
            if dg.degree() == d {
                out.terms.insert(code.clone(), (dg.clone(), s.clone()));
            }
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.values().map(|(d, _)| d.degree()).max().unwrap_or(0)
    }

    /// Product by juxtaposition: skeletons concatenate, dashed parts stay
    /// apart. For empty skeletons this is the vacuum algebra product; in
    /// general it is the tensor product of elements.
    pub fn product_disjoint(&self, other: &Element) -> Element {
        let mut kinds = self.kinds.clone();
        kinds.extend_from_slice(&other.kinds);
        let cap = self.degree_cap.min(other.degree_cap);
        let mut out = Element::zero(kinds, cap);
        for (_, (d1, s1)) in &self.terms {
            for (_, (d2, s2)) in &other.terms {
                if d1.degree() + d2.degree() > cap {
                    continue;
                }
                out.add_diagram(d1.disjoint_union(d2), s1 * s2);
            }
        }
        out
    }

    /// Vertical composition on a common all-interval skeleton.
    pub fn stack(&self, other: &Element) -> Element {
        assert_eq!(self.kinds, other.kinds);
        let cap = self.degree_cap.min(other.degree_cap);
        let mut out = Element::zero(self.kinds.clone(), cap);
        for (_, (d1, s1)) in &self.terms {
            for (_, (d2, s2)) in &other.terms {
                if d1.degree() + d2.degree() > cap {
                    continue;
                }
                out.add_diagram(d1.stack(d2), s1 * s2);
            }
        }
        out
    }

    /// Power under the disjoint product, for elements on an empty skeleton.
    pub fn vacuum_pow(&self, n: u32) -> Element {
        assert!(self.kinds.is_empty());
        let mut acc = Element::unit(Vec::new(), self.degree_cap);
        for _ in 0..n {
            acc = acc.product_disjoint(self);
        }
        acc
    }

    /// Orientation reversal of skeleton component `c`: reverses its site
    /// order and multiplies each term by (−1)^{legs on c}.
    pub fn s_map(&self, c: usize) -> Result<Element, SpaceError> {
        if c >= self.kinds.len() {
            return Err(SpaceError::UnknownComponent(c));
        }
        let mut out = Element::zero(self.kinds.clone(), self.degree_cap);
        for (_, (d, s)) in &self.terms {
            let (rd, sign) = d.reverse_component(c);
            let ns = if sign < 0 { -s.clone() } else { s.clone() };
            out.add_diagram(rd, ns);
        }
        Ok(out)
    }

    /// Doubling of component `c`: each leg on `c` lifts to one of the two
    /// parallel copies, preserving site order; 2^m terms per diagram.
    pub fn delta_map(&self, c: usize) -> Result<Element, SpaceError> {
        if c >= self.kinds.len() {
            return Err(SpaceError::UnknownComponent(c));
        }
        let mut kinds = self.kinds.clone();
        kinds.insert(c + 1, kinds[c]);
        let mut out = Element::zero(kinds, self.degree_cap);
        for (_, (d, s)) in &self.terms {
            let legs = d.components()[c].legs.clone();
            let m = legs.len();
            for mask in 0u64..(1 << m) {
                let mut first = Vec::new();
                let mut second = Vec::new();
                for (i, &l) in legs.iter().enumerate() {
                    if mask & (1 << i) == 0 {
                        first.push(l);
                    } else {
                        second.push(l);
                    }
                }
                let mut comps = d.components().to_vec();
                let kind = comps[c].kind;
                comps[c] = Component { kind, legs: first };
                comps.insert(c + 1, Component { kind, legs: second });
                let nd = Diagram::new(comps, d.n_tri(), d.edges().to_vec(), d.free_loops())
                    .expect("doubling preserves validity");
                out.add_diagram(nd, s.clone());
            }
        }
        Ok(out)
    }

    /// Degree involution: degree-d terms scaled by (−1)^d.
    pub fn shat(&self) -> Element {
        let mut out = Element::zero(self.kinds.clone(), self.degree_cap);
        for (code, (d, s)) in &self.terms {
            let ns = if d.degree() % 2 == 1 { -s.clone() } else { s.clone() };
            out.terms.insert(code.clone(), (d.clone(), ns));
        }
        out
    }

    /// Connected sum along circle `c1` of self and circle `c2` of `other`:
    /// both circles are cut at their basepoints and spliced, keeping
    /// orientations. The merged circle stays at position `c1`; the other
    /// element's remaining components are appended.
    pub fn connect_sum(
        &self,
        c1: usize,
        other: &Element,
        c2: usize,
    ) -> Result<Element, SpaceError> {
        if c1 >= self.kinds.len() {
            return Err(SpaceError::UnknownComponent(c1));
        }
        if c2 >= other.kinds.len() {
            return Err(SpaceError::UnknownComponent(c2));
        }
        if self.kinds[c1] != ComponentKind::Circle {
            return Err(SpaceError::NotCircle(c1));
        }
        if other.kinds[c2] != ComponentKind::Circle {
            return Err(SpaceError::NotCircle(c2));
        }
        let mut kinds = self.kinds.clone();
        let mut other_kinds = other.kinds.clone();
        other_kinds.remove(c2);
        kinds.extend(other_kinds);
        let cap = self.degree_cap.min(other.degree_cap);
        let mut out = Element::zero(kinds, cap);
        for (_, (d1, s1)) in &self.terms {
            for (_, (d2, s2)) in &other.terms {
                if d1.degree() + d2.degree() > cap {
                    continue;
                }
                let u = d1.disjoint_union(d2);
                let mut comps = u.components().to_vec();
                let merged_from = self.kinds.len() + c2;
                let extra = comps[merged_from].legs.clone();
                comps[c1].legs.extend(extra);
                comps.remove(merged_from);
                let nd = Diagram::new(comps, u.n_tri(), u.edges().to_vec(), u.free_loops())
                    .expect("splice preserves validity");
                out.add_diagram(nd, s1 * s2);
            }
        }
        Ok(out)
    }

    /// Comultiplication: for each term, sum over subsets of connected
    /// dashed parts; the subset lands on the first skeleton copy, the
    /// complement on the second. Output lives on the doubled skeleton.
    pub fn comultiply(&self) -> Element {
        let k = self.kinds.len();
        let mut kinds = self.kinds.clone();
        kinds.extend_from_slice(&self.kinds);
        let mut out = Element::zero(kinds, self.degree_cap);
        for (_, (d, s)) in &self.terms {
            let part_of = dashed_parts(d);
            let n_parts = *part_of.legs.iter().chain(part_of.tris.iter()).max().map(|m| m + 1).get_or_insert(0);
            let loops = d.free_loops();
            for mask in 0u64..(1 << n_parts) {
                for left_loops in 0..=loops {
                    let mult = binomial(loops, left_loops);
                    let mut comps: Vec<Component> = Vec::with_capacity(2 * k);
                    for c in 0..k {
                        comps.push(Component {
                            kind: self.kinds[c],
                            legs: d.components()[c]
                                .legs
                                .iter()
                                .copied()
                                .filter(|&l| mask & (1 << part_of.legs[l]) == 0)
                                .collect(),
                        });
                    }
                    for c in 0..k {
                        comps.push(Component {
                            kind: self.kinds[c],
                            legs: d.components()[c]
                                .legs
                                .iter()
                                .copied()
                                .filter(|&l| mask & (1 << part_of.legs[l]) != 0)
                                .collect(),
                        });
                    }
                    // loops are a bare count, so the two sides of the split
                    // are indistinguishable in the flattened representation;
                    // the choice multiplicity is all that remains of it
                    let nd =
                        Diagram::new(comps, d.n_tri(), d.edges().to_vec(), loops)
                            .expect("redistribution preserves validity");
                    out.add_diagram(nd, s.scale(&BigRational::from_integer(BigInt::from(mult))));
                }
            }
        }
        out
    }

    /// Swap the two halves of a doubled skeleton (for cocommutativity
    /// checks). `k` is the size of each half.
    pub fn swap_tensor_factors(&self, k: usize) -> Element {
        assert_eq!(self.kinds.len(), 2 * k);
        let mut kinds = self.kinds[k..].to_vec();
        kinds.extend_from_slice(&self.kinds[..k]);
        let mut out = Element::zero(kinds, self.degree_cap);
        for (_, (d, s)) in &self.terms {
            let mut comps = d.components()[k..].to_vec();
            comps.extend_from_slice(&d.components()[..k]);
            let nd = Diagram::new(comps, d.n_tri(), d.edges().to_vec(), d.free_loops())
                .expect("component permutation preserves validity");
            out.add_diagram(nd, s.clone());
        }
        out
    }
}

impl serde::Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Element", 3)?;
        st.serialize_field("kinds", &self.kinds)?;
        st.serialize_field("degree_cap", &self.degree_cap)?;
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(code, (d, sc))| {
                serde_json::json!({
                    "diagram_code": code,
                    "degree": d.degree(),
                    "coefficient": sc.to_string(),
                })
            })
            .collect();
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let mut r: u64 = 1;
    for i in 0..k.min(n - k) {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// Connected components of the dashed graph: part index per leg and per
/// trivalent vertex.
struct DashedParts {
    legs: Vec<usize>,
    tris: Vec<usize>,
}

fn dashed_parts(d: &Diagram) -> DashedParts {
    let nl = d.n_legs();
    let nt = d.n_tri();
    let mut uf: Vec<usize> = (0..nl + nt).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let n = uf[c];
            uf[c] = r;
            c = n;
        }
        r
    }
    let node = |e: End| match e {
        End::Leg(l) => l,
        End::Tri(v, _) => nl + v,
    };
    for &(a, b) in d.edges() {
        let (ra, rb) = (find(&mut uf, node(a)), find(&mut uf, node(b)));
        uf[ra] = rb;
    }
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = DashedParts {
        legs: vec![0; nl],
        tris: vec![0; nt],
    };
    for x in 0..nl + nt {
        let r = find(&mut uf, x);
        let next = index.len();
        let id = *index.entry(r).or_insert(next);
        if x < nl {
            out.legs[x] = id;
        } else {
            out.tris[x - nl] = id;
        }
    }
    out
}

/// Which relations to reduce by. Antisymmetry is always folded into
/// canonical forms and needs no flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    pub stu: bool,
    pub ihx: bool,
    /// P_p: the sum over all pairings of 2p cut ends vanishes.
    pub p: Option<u32>,
    /// O_n: a free dashed loop equals −2n.
    pub o: Option<u32>,
    /// L_{<2n}: a solid circle carrying fewer than 2n legs kills the term.
    pub l: Option<u32>,
    /// D_{>n}: terms of degree above n die.
    pub d: Option<u32>,
}

impl RelationSet {
    pub fn stu_ihx() -> Self {
        RelationSet {
            stu: true,
            ihx: true,
            ..Default::default()
        }
    }

    pub fn ihx_only() -> Self {
        RelationSet {
            ihx: true,
            ..Default::default()
        }
    }

    /// The target-space relations for the n-th circle elimination map.
    pub fn vacuum(n: u32) -> Self {
        RelationSet {
            ihx: true,
            o: Some(n),
            d: Some(n),
            p: Some(n + 1),
            ..Default::default()
        }
    }
}

type Code = Vec<u32>;
type Row = BTreeMap<Code, BigRational>;

/// Relation-closure reducer bound to one relation set. Caches one-step
/// relations per diagram code; reusable across elements.
pub struct Reducer {
    rel: RelationSet,
    budget: u32,
    rel_cache: HashMap<Code, Vec<Vec<(Diagram, i64)>>>,
}

pub const DEFAULT_CLOSURE_BUDGET: u32 = 4;

impl Reducer {
    pub fn new(rel: RelationSet) -> Self {
        Reducer {
            rel,
            budget: DEFAULT_CLOSURE_BUDGET,
            rel_cache: HashMap::new(),
        }
    }

    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    /// Local rewrites that need no elimination: loop removal (O_n), the
    /// leg-count filter (L), and the degree filter (D).
    fn apply_local(&self, e: &Element) -> Element {
        let mut out = Element::zero(e.kinds().to_vec(), e.degree_cap());
        'term: for (_, d, s) in e.terms() {
            if let Some(n) = self.rel.d {
                if d.degree() > n {
                    continue;
                }
            }
            if let Some(n) = self.rel.l {
                for (c, comp) in d.components().iter().enumerate() {
                    if comp.kind == ComponentKind::Circle && (d.legs_on(c) as u32) < 2 * n {
                        continue 'term;
                    }
                }
            }
            let mut coeff = s.clone();
            let mut nd = d.clone();
            if let Some(n) = self.rel.o {
                let loops = d.free_loops();
                if loops > 0 {
                    let f = BigRational::from_integer(BigInt::from(-2i64 * n as i64)).pow(loops as i32);
                    coeff = coeff.scale(&f);
                    nd = nd.with_free_loops(0);
                }
            }
            out.add_diagram(nd, coeff);
        }
        out
    }

    /// Run a diagram through the local filters, for diagrams appearing in
    /// generated relation rows.
    fn local_diagram(&self, d: Diagram, cap: u32) -> Option<(Diagram, BigRational)> {
        if d.degree() > cap {
            return None;
        }
        if let Some(n) = self.rel.d {
            if d.degree() > n {
                return None;
            }
        }
        if let Some(n) = self.rel.l {
            for (c, comp) in d.components().iter().enumerate() {
                if comp.kind == ComponentKind::Circle && (d.legs_on(c) as u32) < 2 * n {
                    return None;
                }
            }
        }
        let mut f = BigRational::one();
        let mut nd = d;
        if let Some(n) = self.rel.o {
            let loops = nd.free_loops();
            if loops > 0 {
                f = BigRational::from_integer(BigInt::from(-2i64 * n as i64)).pow(loops as i32);
                nd = nd.with_free_loops(0);
            }
        }
        Some((nd, f))
    }

    /// Normal form of `e`. Errors if the closure budget ran out and the
    /// residue is nonzero (a zero residue is sound regardless).
    pub fn reduce(&mut self, e: &Element) -> Result<Element, SpaceError> {
        let mut cur = self.apply_local(e);
        if !(self.rel.stu || self.rel.ihx || self.rel.p.is_some()) {
            return Ok(cur);
        }
        if cur.is_zero() {
            return Ok(cur);
        }
        let cap = cur.degree_cap().min(self.rel.d.unwrap_or(u32::MAX));

        // Breadth-first closure from the support.
        let mut seen: BTreeMap<Code, Diagram> = cur
            .terms()
            .map(|(c, d, _)| (c.clone(), d.clone()))
            .collect();
        let mut frontier: Vec<Code> = seen.keys().cloned().collect();
        let mut rows: Vec<Row> = Vec::new();
        let mut converged = false;
        for _ in 0..self.budget {
            if frontier.is_empty() {
                converged = true;
                break;
            }
            let mut next: BTreeSet<Code> = BTreeSet::new();
            for code in &frontier {
                let d = seen[code].clone();
                let raw = self.one_step_relations(&d);
                for rel in raw {
                    let mut row: Row = BTreeMap::new();
                    for (rd, c) in rel {
                        let Some((rd, f)) = self.local_diagram(rd, cap) else {
                            continue;
                        };
                        let (rcode, sign) = rd.canonical();
                        if sign == 0 {
                            continue;
                        }
                        let coeff =
                            BigRational::from_integer(BigInt::from(c * sign as i64)) * f;
                        let entry = row.entry(rcode.clone()).or_insert_with(BigRational::zero);
                        *entry += coeff;
                        if entry.is_zero() {
                            row.remove(&rcode);
                        } else if !seen.contains_key(&rcode) {
                            let rd = if sign < 0 { rd.flip_vertex(0) } else { rd };
                            seen.insert(rcode.clone(), rd);
                            next.insert(rcode);
                        }
                    }
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
            frontier = next.into_iter().collect();
        }
        if frontier.is_empty() {
            converged = true;
        }

        // Exact elimination to reduced row echelon form, pivots in
        // canonical-code order.
        let mut basis: BTreeMap<Code, Row> = BTreeMap::new();
        for mut row in rows {
            loop {
                let Some(pivot) = row.keys().next().cloned() else {
                    break;
                };
                match basis.get(&pivot) {
                    Some(b) => {
                        let f = row[&pivot].clone();
                        row = row_sub(&row, b, &f);
                    }
                    None => {
                        let lead = row[&pivot].clone();
                        let row: Row =
                            row.iter().map(|(k, v)| (k.clone(), v / &lead)).collect();
                        // keep existing rows reduced against the new pivot
                        let updates: Vec<(Code, Row)> = basis
                            .iter()
                            .filter(|(_, b)| b.contains_key(&pivot))
                            .map(|(k, b)| {
                                let f = b[&pivot].clone();
                                (k.clone(), row_sub(b, &row, &f))
                            })
                            .collect();
                        for (k, b) in updates {
                            basis.insert(k, b);
                        }
                        basis.insert(pivot, row);
                        break;
                    }
                }
            }
        }

        // Reduce the element against the basis.
        for (pivot, row) in &basis {
            let coeff = match cur.terms.get(pivot) {
                Some((_, s)) => s.clone(),
                None => continue,
            };
            for (code, r) in row {
                let d = seen[code].clone();
                // subtract coeff * r * (diagram at code)
                let delta = -(coeff.scale(r));
                cur.add_raw(code, d, delta);
            }
        }

        if cur.is_zero() || converged {
            Ok(cur)
        } else {
            Err(SpaceError::BudgetExceeded {
                budget: self.budget,
            })
        }
    }

    /// Equality modulo the relation set. A zero reduced difference is
    /// conclusive even without closure convergence.
    pub fn equal(&mut self, a: &Element, b: &Element) -> Result<bool, SpaceError> {
        if a.kinds() != b.kinds() {
            return Err(SpaceError::SkeletonMismatch);
        }
        match self.reduce(&a.sub(b)) {
            Ok(e) => Ok(e.is_zero()),
            Err(SpaceError::BudgetExceeded { budget }) => {
                Err(SpaceError::BudgetExceeded { budget })
            }
            Err(e) => Err(e),
        }
    }

    /// All one-step relation rows mentioning `d`, as (diagram, integer
    /// coefficient) lists; AS-canonicalization happens at the call site.
    fn one_step_relations(&mut self, d: &Diagram) -> Vec<Vec<(Diagram, i64)>> {
        let (code, _) = d.canonical();
        if let Some(cached) = self.rel_cache.get(&code) {
            return cached.clone();
        }
        let mut out = Vec::new();
        if self.rel.stu {
            out.extend(stu_vertex_relations(d));
            out.extend(stu_leg_relations(d));
        }
        if self.rel.ihx {
            out.extend(ihx_relations(d));
        }
        if let Some(p) = self.rel.p {
            out.extend(pairing_relations(d, p as usize));
        }
        self.rel_cache.insert(code, out.clone());
        out
    }
}

impl Element {
    /// Internal accumulation at a known canonical code; `d` must already
    /// be canonically oriented. Used by the reducer to avoid
    /// re-canonicalizing.
    fn add_raw(&mut self, code: &Code, d: Diagram, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(code) {
            Some((_, s)) => {
                *s = &*s + &coeff;
                if s.is_zero() {
                    self.terms.remove(code);
                }
            }
            None => {
                self.terms.insert(code.clone(), (d, coeff));
            }
        }
    }
}

fn row_sub(a: &Row, b: &Row, f: &BigRational) -> Row {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(k.clone()).or_insert_with(BigRational::zero);
        *e -= v * f;
        if e.is_zero() {
            out.remove(k);
        }
    }
    out
}

fn opposite(d: &Diagram, e: End) -> End {
    for &(a, b) in d.edges() {
        if a == e {
            return b;
        }
        if b == e {
            return a;
        }
    }
    unreachable!("every end is used exactly once")
}

/// STU rows from each trivalent vertex adjacent to a leg: [S, -T, +U].
fn stu_vertex_relations(d: &Diagram) -> Vec<Vec<(Diagram, i64)>> {
    let mut out = Vec::new();
    for v in 0..d.n_tri() {
        for s in 0..3u8 {
            let End::Leg(l) = opposite(d, End::Tri(v, s)) else {
                continue;
            };
            // resolve v: its other two slots (cyclic order s, s+1, s+2)
            // become two legs at l's site, first the (s+1)-side (T) or the
            // (s+2)-side first (U)
            let (t, u) = resolve_vertex(d, v, s, l);
            let mut row = vec![(d.clone(), 1)];
            if let Some(t) = t {
                row.push((t, -1));
            }
            if let Some(u) = u {
                row.push((u, 1));
            }
            out.push(row);
        }
    }
    out
}

/// Build the two resolutions of vertex `v` whose slot `s` points at leg `l`.
fn resolve_vertex(d: &Diagram, v: usize, s: u8, l: usize) -> (Option<Diagram>, Option<Diagram>) {
    let sa = (s + 1) % 3;
    let sb = (s + 2) % 3;
    let build = |a_first: bool| -> Option<Diagram> {
        // new legs la (connected to whatever slot sa saw) and lb; la sits
        // first on the skeleton when a_first
        let nl = d.n_legs();
        let la = nl; // temp ids for the two new legs
        let lb = nl + 1;
        let mut comps = d.components().to_vec();
        let mut placed = false;
        for comp in comps.iter_mut() {
            if let Some(pos) = comp.legs.iter().position(|&x| x == l) {
                let pair = if a_first { [la, lb] } else { [lb, la] };
                comp.legs.splice(pos..pos + 1, pair);
                placed = true;
                break;
            }
        }
        assert!(placed);
        // remap ends: old slots (v,sa)->Leg(la), (v,sb)->Leg(lb); drop the
        // (v,s)-(l) edge; renumber vertices above v down by one; compact
        // leg ids afterwards
        let remap = |e: End| -> Option<End> {
            match e {
                End::Leg(x) if x == l => None,
                End::Leg(x) => Some(End::Leg(x)),
                End::Tri(w, t) if w == v => match t {
                    t if t == s => None,
                    t if t == sa => Some(End::Leg(la)),
                    t => {
                        debug_assert_eq!(t, sb);
                        Some(End::Leg(lb))
                    }
                },
                End::Tri(w, t) => Some(End::Tri(w - if w > v { 1 } else { 0 }, t)),
            }
        };
        let mut edges = Vec::new();
        for &(a, b) in d.edges() {
            match (remap(a), remap(b)) {
                (Some(x), Some(y)) => edges.push((x, y)),
                (None, None) => {} // the resolved skeleton edge
                _ => unreachable!("edge endpoints drop together"),
            }
        }
        Some(compact_legs(comps, d.n_tri() - 1, edges, d.free_loops()))
    };
    (build(true), build(false))
}

/// STU rows from each adjacent pair of legs on a component: [S, -D, +U'].
fn stu_leg_relations(d: &Diagram) -> Vec<Vec<(Diagram, i64)>> {
    let mut out = Vec::new();
    for (ci, comp) in d.components().iter().enumerate() {
        let len = comp.legs.len();
        if len < 2 {
            continue;
        }
        let pairs: Vec<(usize, usize)> = match comp.kind {
            ComponentKind::Circle => (0..len).map(|i| (i, (i + 1) % len)).collect(),
            ComponentKind::Interval => (0..len - 1).map(|i| (i, i + 1)).collect(),
        };
        for (p, q) in pairs {
            let l1 = comp.legs[p];
            let l2 = comp.legs[q];
            let s = fuse_legs(d, ci, p, q, l1, l2);
            let u = swap_leg_targets(d, l1, l2);
            let mut row = vec![(d.clone(), -1), (u, 1)];
            if let Some(s) = s {
                row.push((s, 1));
            }
            out.push(row);
        }
    }
    out
}

/// Merge legs l1, l2 (adjacent, l1 first) into one leg attached to a new
/// trivalent vertex whose other slots take over their old edges.
fn fuse_legs(
    d: &Diagram,
    ci: usize,
    p: usize,
    q: usize,
    l1: usize,
    l2: usize,
) -> Option<Diagram> {
    let v = d.n_tri();
    let nl = d.n_legs(); // temp id for the merged leg
    let mut comps = d.components().to_vec();
    {
        let legs = &mut comps[ci].legs;
        if q == p + 1 {
            legs.splice(p..p + 2, [nl]);
        } else {
            // circular wrap: pair is (last, first)
            legs.remove(q);
            legs[p - 1] = nl; // p is now the last index after removal
        }
    }
    let remap = |e: End| -> End {
        match e {
            End::Leg(x) if x == l1 => End::Tri(v, 1),
            End::Leg(x) if x == l2 => End::Tri(v, 2),
            other => other,
        }
    };
    let mut edges: Vec<(End, End)> = d
        .edges()
        .iter()
        .map(|&(a, b)| (remap(a), remap(b)))
        .collect();
    edges.push((End::Tri(v, 0), End::Leg(nl)));
    Some(compact_legs(comps, d.n_tri() + 1, edges, d.free_loops()))
}

/// Exchange what the two legs connect to (legs stay at their sites).
fn swap_leg_targets(d: &Diagram, l1: usize, l2: usize) -> Diagram {
    let remap = |e: End| -> End {
        match e {
            End::Leg(x) if x == l1 => End::Leg(l2),
            End::Leg(x) if x == l2 => End::Leg(l1),
            other => other,
        }
    };
    let edges: Vec<(End, End)> = d
        .edges()
        .iter()
        .map(|&(a, b)| (remap(a), remap(b)))
        .collect();
    Diagram::new(d.components().to_vec(), d.n_tri(), edges, d.free_loops())
        .expect("target swap preserves validity")
}

/// IHX rows from each internal edge: [I, -H, +X].
fn ihx_relations(d: &Diagram) -> Vec<Vec<(Diagram, i64)>> {
    let mut out = Vec::new();
    for &(a, b) in d.edges() {
        let (End::Tri(u, su), End::Tri(v, sv)) = (a, b) else {
            continue;
        };
        if u == v {
            continue; // a looped vertex is already zero by antisymmetry
        }
        // outer half-edges in cyclic order: at u after su: A, B; at v
        // after sv: C, D. Variants reattach them as H = (A,C | B,D) and
        // X = (A,D | B,C), each read in the new cyclic order (edge, x, y).
        let rewire = |uc: (u8, u8), vc: (u8, u8)| -> Diagram {
            // uc/vc say which old outer half-edges (coded 0=A,1=B,2=C,3=D)
            // occupy slots 1 and 2 of u and v
            let old = |h: u8| -> End {
                match h {
                    0 => End::Tri(u, (su + 1) % 3),
                    1 => End::Tri(u, (su + 2) % 3),
                    2 => End::Tri(v, (sv + 1) % 3),
                    _ => End::Tri(v, (sv + 2) % 3),
                }
            };
            let mut map: BTreeMap<End, End> = BTreeMap::new();
            map.insert(End::Tri(u, su), End::Tri(u, 0));
            map.insert(End::Tri(v, sv), End::Tri(v, 0));
            map.insert(old(uc.0), End::Tri(u, 1));
            map.insert(old(uc.1), End::Tri(u, 2));
            map.insert(old(vc.0), End::Tri(v, 1));
            map.insert(old(vc.1), End::Tri(v, 2));
            let remap = |e: End| -> End { map.get(&e).copied().unwrap_or(e) };
            let edges: Vec<(End, End)> = d
                .edges()
                .iter()
                .map(|&(x, y)| (remap(x), remap(y)))
                .collect();
            Diagram::new(d.components().to_vec(), d.n_tri(), edges, d.free_loops())
                .expect("rewiring preserves validity")
        };
        let i = rewire((0, 1), (2, 3));
        let h = rewire((0, 2), (1, 3));
        let x = rewire((0, 3), (1, 2));
        out.push(vec![(i, 1), (h, -1), (x, 1)]);
    }
    out
}

/// P_p rows: cut each p-subset of dashed edges and sum every repairing of
/// the 2p loose ends.
fn pairing_relations(d: &Diagram, p: usize) -> Vec<Vec<(Diagram, i64)>> {
    let ne = d.edges().len();
    if ne < p {
        return Vec::new();
    }
    let mut out = Vec::new();
    for subset in combinations(ne, p) {
        let kept: Vec<(End, End)> = d
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !subset.contains(i))
            .map(|(_, &e)| e)
            .collect();
        let mut stubs: Vec<End> = Vec::with_capacity(2 * p);
        for &i in &subset {
            let (a, b) = d.edges()[i];
            stubs.push(a);
            stubs.push(b);
        }
        let mut row = Vec::new();
        for matching in perfect_matchings(stubs.len()) {
            let mut edges = kept.clone();
            for &(i, j) in &matching {
                edges.push((stubs[i], stubs[j]));
            }
            let nd = Diagram::new(
                d.components().to_vec(),
                d.n_tri(),
                edges,
                d.free_loops(),
            )
            .expect("repairing preserves validity");
            row.push((nd, 1));
        }
        out.push(row);
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// All perfect matchings of {0..n}, n even, as index pairs.
fn perfect_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    let items: Vec<usize> = (0..n).collect();
    perfect_matchings_of(&items)
}

fn perfect_matchings_of(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let j = items[k];
        let rest: Vec<usize> = items[1..]
            .iter()
            .copied()
            .filter(|&x| x != j)
            .collect();
        for mut sub in perfect_matchings_of(&rest) {
            sub.insert(0, (first, j));
            out.push(sub);
        }
    }
    out
}

/// Renumber leg tokens (which may exceed the real leg count after surgery)
/// to a dense 0..n by order of appearance along the skeleton.
fn compact_legs(
    comps: Vec<Component>,
    n_tri: usize,
    edges: Vec<(End, End)>,
    free_loops: u32,
) -> Diagram {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut new_comps = Vec::with_capacity(comps.len());
    for c in comps {
        let legs = c
            .legs
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        new_comps.push(Component { kind: c.kind, legs });
    }
    let remap = |e: End| -> End {
        match e {
            End::Leg(l) => End::Leg(map[&l]),
            t => t,
        }
    };
    let edges = edges.iter().map(|&(a, b)| (remap(a), remap(b))).collect();
    Diagram::new(new_comps, n_tri, edges, free_loops).expect("compaction preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::DiagramBuilder;
    use ComponentKind::*;

    fn circle_chords(n_legs: usize, chords: &[(usize, usize)]) -> Diagram {
        Diagram::new(
            vec![Component {
                kind: Circle,
                legs: (0..n_legs).collect(),
            }],
            0,
            chords.iter().map(|&(a, b)| (End::Leg(a), End::Leg(b))).collect(),
            0,
        )
        .unwrap()
    }

    /// One trivalent vertex joined to three legs on a circle.
    fn tripod() -> Diagram {
        let mut b = DiagramBuilder::new();
        let c = b.add_component(Circle);
        let l0 = b.new_leg(c);
        let l1 = b.new_leg(c);
        let l2 = b.new_leg(c);
        let v = b.new_vertex();
        b.connect(End::Tri(v, 0), l0);
        b.connect(End::Tri(v, 1), l1);
        b.connect(End::Tri(v, 2), l2);
        b.build().unwrap()
    }

    #[test]
    fn s_map_signs_and_involution() {
        let d = circle_chords(2, &[(0, 1)]);
        let e = Element::from_diagram(d, 5);
        let s = e.s_map(0).unwrap();
        // two legs: sign +1, and reversal of a 2-leg circle is the same code
        assert_eq!(s, e);
        let ss = s.s_map(0).unwrap();
        assert_eq!(ss, e);
        // one leg on the reversed component
        let d2 = Diagram::new(
            vec![
                Component { kind: Circle, legs: vec![0] },
                Component { kind: Circle, legs: vec![1] },
            ],
            0,
            vec![(End::Leg(0), End::Leg(1))],
            0,
        )
        .unwrap();
        let e2 = Element::from_diagram(d2, 5);
        let s2 = e2.s_map(0).unwrap();
        assert_eq!(s2, e2.neg());
    }

    #[test]
    fn delta_map_counts() {
        let unit = Element::unit(vec![Circle], 5);
        assert_eq!(unit.delta_map(0).unwrap().len(), 1);
        let one = Element::from_diagram(
            Diagram::new(
                vec![
                    Component { kind: Circle, legs: vec![0] },
                    Component { kind: Circle, legs: vec![1] },
                ],
                0,
                vec![(End::Leg(0), End::Leg(1))],
                0,
            )
            .unwrap(),
            5,
        );
        assert_eq!(one.delta_map(0).unwrap().len(), 2);
        let two = Element::from_diagram(circle_chords(2, &[(0, 1)]), 5);
        // 4 assignments, two of which coincide (both legs on one copy,
        // chord between the copies in two ways)
        let d = two.delta_map(0).unwrap();
        let total: usize = d.len();
        assert!(total >= 3);
        let mut sum = Scalar::zero();
        for (_, _, s) in d.terms() {
            sum = &sum + s;
        }
        assert_eq!(sum, Scalar::from_int(4));
    }

    #[test]
    fn connect_sum_unit() {
        let e = Element::from_diagram(circle_chords(2, &[(0, 1)]), 5);
        let unit = Element::unit(vec![Circle], 5);
        let c = e.connect_sum(0, &unit, 0).unwrap();
        assert_eq!(c, e);
        let c2 = unit.connect_sum(0, &e, 0).unwrap();
        assert_eq!(c2, e);
        // two chords merge onto one circle
        let both = e.connect_sum(0, &e, 0).unwrap();
        assert_eq!(both.len(), 1);
        assert_eq!(both.terms().next().unwrap().1.degree(), 2);
    }

    #[test]
    fn shat_is_graded_involution() {
        let e = Element::from_diagram(circle_chords(2, &[(0, 1)]), 5);
        let s = e.shat();
        assert_eq!(s, e.neg()); // degree 1
        assert_eq!(s.shat(), e);
    }

    #[test]
    fn comultiply_counts_and_cocommutes() {
        let unit = Element::unit(vec![Circle], 5);
        assert_eq!(unit.comultiply().len(), 1);
        let one = Element::from_diagram(circle_chords(2, &[(0, 1)]), 5);
        let co = one.comultiply();
        assert_eq!(co.len(), 2);
        assert_eq!(co, co.swap_tensor_factors(1));
        let two = Element::from_diagram(circle_chords(4, &[(0, 1), (2, 3)]), 5);
        let co2 = two.comultiply();
        let mut total = Scalar::zero();
        for (_, _, s) in co2.terms() {
            total = &total + s;
        }
        assert_eq!(total, Scalar::from_int(4));
        assert_eq!(co2, co2.swap_tensor_factors(1));
    }

    #[test]
    fn free_loop_becomes_minus_two_n() {
        let e = Element::from_diagram(Diagram::skeleton(&[]).with_free_loops(1), 5);
        let mut r = Reducer::new(RelationSet {
            o: Some(1),
            ..Default::default()
        });
        let red = r.reduce(&e).unwrap();
        assert_eq!(red.epsilon(), Scalar::from_int(-2));
        let mut r3 = Reducer::new(RelationSet {
            o: Some(3),
            ..Default::default()
        });
        let e2 = Element::from_diagram(Diagram::skeleton(&[]).with_free_loops(2), 5);
        assert_eq!(r3.reduce(&e2).unwrap().epsilon(), Scalar::from_int(36));
    }

    #[test]
    fn stu_resolves_tripod() {
        // tripod = T - U where T, U are the two 2-chord resolutions
        let s = Element::from_diagram(tripod(), 5);
        let t = Element::from_diagram(circle_chords(4, &[(0, 2), (1, 3)]), 5);
        // U differs by the order of the two resolved legs; with legs
        // (0,1,2) resolved at site 0 the other resolution crosses the
        // other way. Build both by hand and check S - (T - U) reduces to 0.
        let u = Element::from_diagram(circle_chords(4, &[(1, 2), (0, 3)]), 5);
        let mut r = Reducer::new(RelationSet {
            stu: true,
            ..Default::default()
        });
        let diff1 = s.sub(&t.sub(&u));
        let diff2 = s.sub(&u.sub(&t));
        let z1 = r.reduce(&diff1).map(|e| e.is_zero()).unwrap_or(false);
        let z2 = r.reduce(&diff2).map(|e| e.is_zero()).unwrap_or(false);
        assert!(z1 ^ z2, "exactly one resolution order must match");
    }

    #[test]
    fn p2_kills_pairing_sum() {
        let e1 = Element::from_diagram(circle_chords(4, &[(0, 1), (2, 3)]), 5);
        let e2 = Element::from_diagram(circle_chords(4, &[(0, 2), (1, 3)]), 5);
        let e3 = Element::from_diagram(circle_chords(4, &[(0, 3), (1, 2)]), 5);
        let sum = e1.add(&e2).add(&e3);
        let mut r = Reducer::new(RelationSet {
            p: Some(2),
            ..Default::default()
        });
        let red = r.reduce(&sum).unwrap();
        assert!(red.is_zero());
    }

    #[test]
    fn theta_survives_ihx() {
        let theta = Diagram::new(
            vec![],
            2,
            (0..3).map(|s| (End::Tri(0, s), End::Tri(1, s))).collect(),
            0,
        )
        .unwrap();
        let e = Element::from_diagram(theta, 5);
        let mut r = Reducer::new(RelationSet::ihx_only());
        let red = r.reduce(&e).unwrap();
        assert!(!red.is_zero());
    }

    #[test]
    fn budget_zero_is_an_explicit_error() {
        let e = Element::from_diagram(tripod(), 5);
        let mut r = Reducer::new(RelationSet {
            stu: true,
            ..Default::default()
        })
        .with_budget(0);
        match r.reduce(&e) {
            Err(SpaceError::BudgetExceeded { budget: 0 }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn product_disjoint_degrees_add() {
        let a = Element::from_diagram(circle_chords(2, &[(0, 1)]), 5);
        let p = a.product_disjoint(&a);
        assert_eq!(p.kinds().len(), 2);
        assert_eq!(p.terms().next().unwrap().1.degree(), 2);
        // cap truncation
        let capped = a.clone().with_cap(1).product_disjoint(&a.with_cap(1));
        assert!(capped.is_zero());
    }
}
