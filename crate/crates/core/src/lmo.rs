//! The tree elements that imitate a solid circle, the circle-elimination
//! maps, and (further down) the surgery invariant built from them.
//!
//! Diagrams "on m points" live on a skeleton of m single-leg intervals:
//! point j is the unique leg of interval j. Gluing identifies point j of a
//! tree element with the j-th leg of a circle, read cyclically from the
//! circle's basepoint.

use crate::diagrams::{ComponentKind, Diagram, DiagramBuilder, End};
use crate::kontsevich::{check_z, ZContext};
use crate::links::{from_braid, BraidWord, LinkDiagram, LinkError, LinkingMatrix};
use crate::scalars::Scalar;
use crate::spaces::{Element, Reducer, RelationSet, SpaceError};
use num::{BigInt, BigRational, One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

/// Number of descents of a permutation (positions k with p[k] > p[k+1]).
pub fn descents(p: &[usize]) -> usize {
    p.windows(2).filter(|w| w[0] > w[1]).count()
}

/// All permutations of the given values, in no particular order.
pub fn permutations(vals: &[usize]) -> Vec<Vec<usize>> {
    if vals.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        let mut rest: Vec<usize> = vals.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, v);
            out.push(tail);
        }
    }
    out
}

fn points_skeleton(m: usize) -> Vec<ComponentKind> {
    vec![ComponentKind::Interval; m]
}

/// Attach a caterpillar tree to the given leg ends: a spine from the first
/// leg to the last, with branches to legs branch[0], branch[1], ... in
/// spine order. Cyclic order at each spine vertex: (toward first leg,
/// branch, toward last leg).
fn build_caterpillar(b: &mut DiagramBuilder, legs: &[End], branch: &[usize]) {
    let m = legs.len();
    assert_eq!(branch.len(), m.saturating_sub(2));
    if m == 2 {
        b.connect(legs[0], legs[1]);
        return;
    }
    let vs: Vec<usize> = (0..m - 2).map(|_| b.new_vertex()).collect();
    b.connect(legs[0], End::Tri(vs[0], 0));
    for i in 0..m - 3 {
        b.connect(End::Tri(vs[i], 2), End::Tri(vs[i + 1], 0));
    }
    b.connect(End::Tri(vs[m - 3], 2), legs[m - 1]);
    for (i, &t) in branch.iter().enumerate() {
        b.connect(End::Tri(vs[i], 1), legs[t]);
    }
}

/// Public entry to the caterpillar construction, for callers assembling
/// basis diagrams over custom ends.
pub fn attach_caterpillar(b: &mut DiagramBuilder, legs: &[End], branch: &[usize]) {
    build_caterpillar(b, legs, branch)
}

/// The caterpillar tree on m points: spine from point 0 to point m−1,
/// branches to points τ(1),…,τ(m−2) in spine order.
pub fn t_tau(tau: &[usize], m: usize) -> Result<Diagram, SpaceError> {
    if m < 2 {
        return Err(SpaceError::Argument(format!("need m >= 2, got {m}")));
    }
    let mut sorted: Vec<usize> = tau.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=m - 2).collect::<Vec<_>>() {
        return Err(SpaceError::Argument(format!(
            "not a permutation of 1..={}",
            m - 2
        )));
    }
    let mut b = DiagramBuilder::new();
    let legs: Vec<End> = (0..m)
        .map(|_| {
            let c = b.add_component(ComponentKind::Interval);
            b.new_leg(c)
        })
        .collect();
    build_caterpillar(&mut b, &legs, tau);
    Ok(b.build()?)
}

fn t_coeff(tau: &[usize], m: usize) -> BigRational {
    let r = descents(tau);
    let sign = if r % 2 == 0 { 1 } else { -1 };
    let den = BigInt::from((m as i64 - 1) * binom_i64(m as i64 - 2, r as i64));
    BigRational::new(BigInt::from(sign), den)
}

fn binom_i64(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let mut num = 1i64;
    for i in 0..k {
        num = num * (n - i) / (i + 1);
    }
    num
}

/// The coefficient (−1)^{r(σ)} / ((m−1)·C(m−2, r(σ))) of the tree sums,
/// with r the descent count of the branch sequence.
pub fn tree_coefficient(seq: &[usize], m: usize) -> BigRational {
    t_coeff(seq, m)
}

/// The circle-imitating sum built over caller-supplied attachment ends:
/// `mk` prepares a fresh builder per term and returns the m ends in cyclic
/// position order. Used for the relabeled and branch-inserted variants.
pub fn t_m_over<F>(m: usize, cap: u32, mk: F) -> Result<Element, SpaceError>
where
    F: Fn(&mut DiagramBuilder) -> Vec<End>,
{
    if m < 2 {
        return Err(SpaceError::Argument(format!("need m >= 2, got {m}")));
    }
    let vals: Vec<usize> = (1..=m - 2).collect();
    let mut terms: Vec<(Diagram, Scalar)> = Vec::new();
    for tau in permutations(&vals) {
        let mut b = DiagramBuilder::new();
        let legs = mk(&mut b);
        assert_eq!(legs.len(), m, "mk must supply one end per cyclic position");
        build_caterpillar(&mut b, &legs, &tau);
        terms.push((b.build()?, Scalar::from_rational(t_coeff(&tau, m))));
    }
    let kinds = terms[0].0.kinds();
    let mut out = Element::zero(kinds, cap);
    for (d, s) in terms {
        out.add_diagram(d, s);
    }
    Ok(out)
}

/// The circle-imitating element on m points:
/// Σ_τ (−1)^{r(τ)} / ((m−1)·C(m−2, r(τ))) · T_τ.
pub fn t_m(m: usize) -> Result<Element, SpaceError> {
    t_m_over(m, m as u32, |b| {
        (0..m)
            .map(|_| {
                let c = b.add_component(ComponentKind::Interval);
                b.new_leg(c)
            })
            .collect()
    })
}

/// Unordered partitions of {0,…,m−1} into exactly n blocks of size ≥ 2,
/// each block sorted ascending, blocks ordered by minimum.
fn set_partitions(m: usize, n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn rec(
        next: usize,
        m: usize,
        n: usize,
        blocks: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if next == m {
            if blocks.len() == n && blocks.iter().all(|b| b.len() >= 2) {
                out.push(blocks.clone());
            }
            return;
        }
        // prune: remaining elements must fill every short block and open
        // the missing ones
        let deficit: usize = blocks
            .iter()
            .map(|b| 2usize.saturating_sub(b.len()))
            .sum::<usize>()
            + 2 * (n - blocks.len());
        if m - next < deficit {
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(next);
            rec(next + 1, m, n, blocks, out);
            blocks[i].pop();
        }
        if blocks.len() < n {
            blocks.push(vec![next]);
            rec(next + 1, m, n, blocks, out);
            blocks.pop();
        }
    }
    rec(0, m, n, &mut blocks, &mut out);
    out
}

fn tree_cache() -> &'static Mutex<HashMap<(u32, usize), Element>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Element>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The n-block forest sum over caller-supplied attachment ends, analogous
/// to `t_m_over`. `kinds` is the skeleton to report when the sum is empty.
pub fn t_n_m_over<F>(
    n: u32,
    m: usize,
    kinds: Vec<ComponentKind>,
    cap: u32,
    mk: F,
) -> Result<Element, SpaceError>
where
    F: Fn(&mut DiagramBuilder) -> Vec<End>,
{
    if n == 0 {
        return Err(SpaceError::Argument("need n >= 1".into()));
    }
    let mut out = Element::zero(kinds, cap);
    if m >= 2 * n as usize {
        for blocks in set_partitions(m, n as usize) {
            // per-block permutation choices
            let choices: Vec<Vec<Vec<usize>>> = blocks
                .iter()
                .map(|b| permutations(&(1..=b.len() - 2).collect::<Vec<_>>()))
                .collect();
            let mut idx = vec![0usize; blocks.len()];
            loop {
                let mut b = DiagramBuilder::new();
                let legs = mk(&mut b);
                assert_eq!(legs.len(), m, "mk must supply one end per cyclic position");
                let mut coeff = BigRational::one();
                for (bi, block) in blocks.iter().enumerate() {
                    let tau = &choices[bi][idx[bi]];
                    // tau permutes local positions; build on the block's legs
                    let block_legs: Vec<End> = block.iter().map(|&p| legs[p]).collect();
                    build_caterpillar(&mut b, &block_legs, tau);
                    coeff *= t_coeff(tau, block.len());
                }
                out.add_diagram(b.build()?, Scalar::from_rational(coeff));
                // advance the mixed-radix index
                let mut i = 0;
                loop {
                    if i == idx.len() {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < choices[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// The n-block forest element on m points: sum over partitions of the m
/// points into n blocks of size ≥ 2, of the product of circle-imitating
/// elements on each block (legs assigned in ascending order). Zero when
/// m < 2n.
pub fn t_n_m(n: u32, m: usize) -> Result<Element, SpaceError> {
    if let Some(e) = tree_cache().lock().unwrap().get(&(n, m)) {
        return Ok(e.clone());
    }
    let out = t_n_m_over(n, m, points_skeleton(m), m as u32, |b| {
        (0..m)
            .map(|_| {
                let c = b.add_component(ComponentKind::Interval);
                b.new_leg(c)
            })
            .collect()
    })?;
    tree_cache().lock().unwrap().insert((n, m), out.clone());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Tri(usize, u8),
    Wire(usize),
}

/// Replace every solid circle of every term by the n-block forest element,
/// gluing forest point j to the circle's j-th leg (cyclic order from the
/// basepoint), then reduce in the vacuum target space.
pub fn iota(e: &Element, n: u32) -> Result<Element, SpaceError> {
    let mut red = Reducer::new(RelationSet::vacuum(n));
    iota_in(e, n, &mut red)
}

/// `iota` with a caller-supplied reducer (so relation caches survive
/// across calls).
pub fn iota_in(e: &Element, n: u32, red: &mut Reducer) -> Result<Element, SpaceError> {
    for (c, k) in e.kinds().iter().enumerate() {
        if *k != ComponentKind::Circle {
            return Err(SpaceError::NotCircle(c));
        }
    }
    let mut out = Element::zero(Vec::new(), n);
    for (_, d, coeff) in e.terms() {
        glue_term(d, coeff, n, &mut out)?;
    }
    red.reduce(&out)
}

fn glue_term(
    d: &Diagram,
    coeff: &Scalar,
    n: u32,
    out: &mut Element,
) -> Result<(), SpaceError> {
    let ell = d.components().len();
    // every forest block of size m adds m − 2 vertices and there are n
    // blocks per circle, so gluing drops the degree by exactly n·ℓ
    if d.degree() as i64 - (n as i64) * (ell as i64) > out.degree_cap() as i64 {
        return Ok(());
    }
    // forest element per circle; a short circle kills the whole term
    let mut forests: Vec<Element> = Vec::with_capacity(ell);
    for c in 0..ell {
        let f = t_n_m(n, d.legs_on(c))?;
        if f.is_zero() {
            return Ok(());
        }
        forests.push(f);
    }
    let forest_terms: Vec<Vec<(&Diagram, &Scalar)>> = forests
        .iter()
        .map(|f| f.terms().map(|(_, td, ts)| (td, ts)).collect())
        .collect();

    let mut pick = vec![0usize; ell];
    loop {
        let mut total_coeff = coeff.clone();
        let mut edges: Vec<(Node, Node)> = Vec::new();
        let mut n_tri = d.n_tri();
        let mut loops = d.free_loops();

        // wires: one per circle leg, indexed by the leg's global id in d
        let wire_of_leg: Vec<usize> = (0..d.n_legs()).collect();
        let map_d = |end: &End| match *end {
            End::Leg(l) => Node::Wire(wire_of_leg[l]),
            End::Tri(v, s) => Node::Tri(v, s),
        };
        for (a, b) in d.edges() {
            edges.push((map_d(a), map_d(b)));
        }
        for c in 0..ell {
            let (td, ts) = forest_terms[c][pick[c]];
            total_coeff = &total_coeff * ts;
            // forest point j ↔ j-th leg of circle c
            let mut tree_wire: HashMap<usize, usize> = HashMap::new();
            let circle_legs = &d.components()[c].legs;
            for (j, comp) in td.components().iter().enumerate() {
                tree_wire.insert(comp.legs[0], wire_of_leg[circle_legs[j]]);
            }
            let off = n_tri;
            let map_t = |end: &End| match *end {
                End::Leg(l) => Node::Wire(tree_wire[&l]),
                End::Tri(v, s) => Node::Tri(v + off, s),
            };
            for (a, b) in td.edges() {
                edges.push((map_t(a), map_t(b)));
            }
            n_tri += td.n_tri();
        }

        // contract wires: each wire is a valence-2 joint; chains become
        // edges, all-wire cycles become free loops
        let ne = edges.len();
        let ep = |h: usize| if h % 2 == 0 { edges[h / 2].0 } else { edges[h / 2].1 };
        let mut wire_inc: HashMap<usize, Vec<usize>> = HashMap::new();
        for h in 0..2 * ne {
            if let Node::Wire(w) = ep(h) {
                wire_inc.entry(w).or_default().push(h);
            }
        }
        let mut mate = vec![usize::MAX; 2 * ne];
        for (_, inc) in &wire_inc {
            assert_eq!(inc.len(), 2, "wires join exactly two edge ends");
            mate[inc[0]] = inc[1];
            mate[inc[1]] = inc[0];
        }
        let mut seen = vec![false; 2 * ne];
        let mut final_edges: Vec<(End, End)> = Vec::new();
        for h0 in 0..2 * ne {
            if seen[h0] {
                continue;
            }
            let Node::Tri(v0, s0) = ep(h0) else { continue };
            seen[h0] = true;
            let mut h = h0 ^ 1;
            loop {
                seen[h] = true;
                match ep(h) {
                    Node::Tri(v, s) => {
                        final_edges.push((End::Tri(v0, s0), End::Tri(v, s)));
                        break;
                    }
                    Node::Wire(_) => {
                        let m = mate[h];
                        seen[m] = true;
                        h = m ^ 1;
                    }
                }
            }
        }
        for e0 in 0..ne {
            if seen[2 * e0] {
                continue;
            }
            let mut h = 2 * e0;
            loop {
                seen[h] = true;
                seen[h ^ 1] = true;
                let nxt = mate[h ^ 1];
                if nxt == 2 * e0 {
                    break;
                }
                h = nxt;
            }
            loops += 1;
        }

        let glued = Diagram::new(Vec::new(), n_tri, final_edges, loops)?;
        debug_assert_eq!(
            glued.degree() as i64,
            d.degree() as i64 - (n as i64) * (ell as i64)
        );
        out.add_diagram(glued, total_coeff);

        // next combination
        let mut i = 0;
        loop {
            if i == ell {
                return Ok(());
            }
            pick[i] += 1;
            if pick[i] < forest_terms[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Inverse under disjoint union, truncated at the element's degree cap.
/// The degree-0 part must be a nonzero rational.
pub fn graded_invert(e: &Element) -> Result<Element, SpaceError> {
    let a = e.epsilon();
    let ainv = a.invert().ok_or(SpaceError::NotInvertible)?;
    let u = e.scale(&Scalar::from_rational(
        ainv.as_rational().ok_or(SpaceError::NotInvertible)?,
    ));
    let x = u.sub(&Element::unit(e.kinds().to_vec(), e.degree_cap()));
    let mut acc = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut xp = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut sign = 1i64;
    loop {
        xp = xp.product_disjoint(&x);
        if xp.is_zero() {
            break;
        }
        sign = -sign;
        acc = acc.add(&xp.scale(&Scalar::from_int(sign)));
    }
    Ok(acc.scale(&ainv))
}

/// Formal logarithm log(1+x) truncated at dmax; requires degree-0 part 1.
pub fn log_group_like(e: &Element, dmax: u32) -> Result<Element, SpaceError> {
    if !e.epsilon().is_one() {
        return Err(SpaceError::NotInvertible);
    }
    let e = e.clone().with_cap(dmax.min(e.degree_cap()));
    let x = e.sub(&Element::unit(e.kinds().to_vec(), e.degree_cap()));
    let mut acc = Element::zero(e.kinds().to_vec(), e.degree_cap());
    let mut xp = Element::unit(e.kinds().to_vec(), e.degree_cap());
    for k in 1..=dmax as i64 {
        xp = xp.product_disjoint(&x);
        if xp.is_zero() {
            break;
        }
        let c = if k % 2 == 1 {
            Scalar::from_ratio(1, k)
        } else {
            Scalar::from_ratio(-1, k)
        };
        acc = acc.add(&xp.scale(&c));
    }
    Ok(acc)
}

/// Formal exponential of a positive-degree element, truncated at the cap.
pub fn exp_truncated(e: &Element) -> Element {
    let mut acc = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut xp = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut fact = BigRational::one();
    let mut k = 1i64;
    loop {
        xp = xp.product_disjoint(e);
        if xp.is_zero() {
            break;
        }
        fact *= BigRational::from_integer(BigInt::from(k));
        acc = acc.add(&xp.scale(&Scalar::from_rational(fact.recip())));
        k += 1;
    }
    acc
}

/// A framed link presenting a closed oriented 3-manifold by surgery.
#[derive(Debug, Clone)]
pub struct SurgeryPresentation {
    pub diagram: LinkDiagram,
    pub framings: Vec<i64>,
}

impl SurgeryPresentation {
    pub fn new(diagram: LinkDiagram, framings: Vec<i64>) -> Result<Self, SpaceError> {
        if framings.len() != diagram.n_components() {
            return Err(SpaceError::Argument(format!(
                "expected {} framings, got {}",
                diagram.n_components(),
                framings.len()
            )));
        }
        Ok(SurgeryPresentation { diagram, framings })
    }

    pub fn linking_matrix(&self) -> Result<LinkingMatrix, SpaceError> {
        self.diagram
            .linking_matrix(&self.framings)
            .map_err(link_err)
    }
}

fn link_err(e: LinkError) -> SpaceError {
    SpaceError::Argument(e.to_string())
}

/// The framed unknot presentation (round diagram, one maximum).
pub fn unknot_presentation(framing: i64) -> SurgeryPresentation {
    let d = from_braid(&BraidWord {
        strands: 1,
        word: Vec::new(),
    })
    .expect("one-strand closure");
    SurgeryPresentation {
        diagram: d,
        framings: vec![framing],
    }
}

/// ι_n(Ž(L)) for the presentation's framed diagram, computed at the sound
/// internal degree cap n(ℓ+1).
pub fn iota_check_z(
    p: &SurgeryPresentation,
    n: u32,
    ctx: &mut ZContext,
    red: &mut Reducer,
) -> Result<Element, SpaceError> {
    let framed = p
        .diagram
        .add_framing_curls(&p.framings)
        .map_err(link_err)?;
    let ell = framed.n_components() as u32;
    let cap = n * (ell + 1);
    let z = check_z(&framed, cap, ctx)?;
    iota_in(&z, n, red)
}

/// The degree-≤n surgery invariant:
/// [ι_n Ž(U₊)]^{−σ₊} · [ι_n Ž(U₋)]^{−σ₋} · ι_n Ž(L).
pub fn omega_n(
    p: &SurgeryPresentation,
    n: u32,
    ctx: &mut ZContext,
) -> Result<Element, SpaceError> {
    let mut red = Reducer::new(RelationSet::vacuum(n));
    let (sp, sm, _) = p.linking_matrix()?.signature_counts();
    let i_l = iota_check_z(p, n, ctx, &mut red)?;
    let mut acc = i_l;
    if sp > 0 {
        let up = iota_check_z(&unknot_presentation(1), n, ctx, &mut red)?;
        let up_inv = graded_invert(&up)?;
        for _ in 0..sp {
            acc = acc.product_disjoint(&up_inv);
        }
    }
    if sm > 0 {
        let um = iota_check_z(&unknot_presentation(-1), n, ctx, &mut red)?;
        let um_inv = graded_invert(&um)?;
        for _ in 0..sm {
            acc = acc.product_disjoint(&um_inv);
        }
    }
    red.reduce(&acc)
}

/// Ω(M) truncated at dmax: 1 + Σ_{n ≤ dmax} (degree-n part of Ω_n).
pub fn omega_series(
    p: &SurgeryPresentation,
    dmax: u32,
    ctx: &mut ZContext,
) -> Result<Element, SpaceError> {
    let mut acc = Element::unit(Vec::new(), dmax);
    for n in 1..=dmax {
        let on = omega_n(p, n, ctx)?;
        acc = acc.add(&on.graded_part(n).with_cap(dmax));
    }
    Ok(acc)
}

/// ω(M) = log Ω(M), truncated at dmax.
pub fn omega_log(
    p: &SurgeryPresentation,
    dmax: u32,
    ctx: &mut ZContext,
) -> Result<Element, SpaceError> {
    let series = omega_series(p, dmax, ctx)?;
    log_group_like(&series, dmax)
}

/// The dashed θ-graph (two vertices joined by three edges).
pub fn theta_diagram() -> Diagram {
    let mut b = DiagramBuilder::new();
    let v0 = b.new_vertex();
    let v1 = b.new_vertex();
    b.connect(End::Tri(v0, 0), End::Tri(v1, 0));
    b.connect(End::Tri(v0, 1), End::Tri(v1, 2));
    b.connect(End::Tri(v0, 2), End::Tri(v1, 1));
    b.build().expect("theta is a valid diagram")
}

/// Coefficient of the θ-graph (in its canonical orientation) in a vacuum
/// element.
pub fn theta_coefficient(e: &Element) -> Scalar {
    let (code, sign) = theta_diagram().canonical();
    for (c, _, s) in e.terms() {
        if *c == code {
            return if sign < 0 { -s.clone() } else { s.clone() };
        }
    }
    Scalar::zero()
}

/// Rank of the span of the given elements in the quotient by the reducer's
/// relations. All coefficients must be rational.
pub fn elimination_rank(
    elems: &[Element],
    red: &mut Reducer,
) -> Result<usize, SpaceError> {
    let mut basis: BTreeMap<Vec<u32>, BTreeMap<Vec<u32>, BigRational>> = BTreeMap::new();
    let mut rank = 0;
    for e in elems {
        let r = red.reduce(e)?;
        let mut row: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (code, _, s) in r.terms() {
            let c = s
                .as_rational()
                .ok_or_else(|| SpaceError::Argument("non-rational coefficient".into()))?;
            if !c.is_zero() {
                row.insert(code.clone(), c);
            }
        }
        loop {
            let Some(pivot) = row.keys().next().cloned() else {
                break;
            };
            match basis.get(&pivot) {
                Some(b) => {
                    let f = row[&pivot].clone();
                    let keys: Vec<Vec<u32>> = b.keys().cloned().collect();
                    for k in keys {
                        let delta = &f * &b[&k];
                        let entry = row.entry(k.clone()).or_insert_with(BigRational::zero);
                        *entry -= delta;
                        if entry.is_zero() {
                            row.remove(&k);
                        }
                    }
                }
                None => {
                    let lead = row[&pivot].clone();
                    let norm: BTreeMap<Vec<u32>, BigRational> =
                        row.iter().map(|(k, v)| (k.clone(), v / &lead)).collect();
                    basis.insert(pivot, norm);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::ComponentKind::{Circle, Interval};

    fn theta() -> Diagram {
        let mut b = DiagramBuilder::new();
        let v0 = b.new_vertex();
        let v1 = b.new_vertex();
        b.connect(End::Tri(v0, 0), End::Tri(v1, 0));
        b.connect(End::Tri(v0, 1), End::Tri(v1, 2));
        b.connect(End::Tri(v0, 2), End::Tri(v1, 1));
        b.build().unwrap()
    }

    fn circle_with_adjacent_chords(n: usize) -> Element {
        let mut b = DiagramBuilder::new();
        let c = b.add_component(Circle);
        let legs: Vec<End> = (0..2 * n).map(|_| b.new_leg(c)).collect();
        for i in 0..n {
            b.connect(legs[2 * i], legs[2 * i + 1]);
        }
        Element::from_diagram(b.build().unwrap(), 16)
    }

    #[test]
    fn t_tau_shapes() {
        let e = t_tau(&[], 2).unwrap();
        assert_eq!(e.degree(), 1);
        assert_eq!(e.n_tri(), 0);
        let tri = t_tau(&[1], 3).unwrap();
        assert_eq!(tri.n_tri(), 1);
        let id4 = t_tau(&[1, 2], 4).unwrap();
        let sw4 = t_tau(&[2, 1], 4).unwrap();
        assert_ne!(id4.canonical().0, sw4.canonical().0);
        assert!(t_tau(&[1, 1], 4).is_err());
        assert!(t_tau(&[], 1).is_err());
    }

    #[test]
    fn t_m_coefficients() {
        let t2 = t_m(2).unwrap();
        assert_eq!(t2.len(), 1);
        assert!(t2.terms().next().unwrap().2.is_one());

        let t3 = t_m(3).unwrap();
        assert_eq!(t3.len(), 1);
        assert_eq!(
            t3.terms().next().unwrap().2.as_rational().unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );

        let t4 = t_m(4).unwrap();
        assert_eq!(t4.len(), 2);
        let mut coeffs: Vec<BigRational> = t4
            .terms()
            .map(|(_, _, s)| s.as_rational().unwrap())
            .collect();
        coeffs.sort();
        assert_eq!(
            coeffs,
            vec![
                BigRational::new(BigInt::from(-1), BigInt::from(6)),
                BigRational::new(BigInt::from(1), BigInt::from(3)),
            ]
        );
    }

    #[test]
    fn forests() {
        assert!(t_n_m(2, 3).unwrap().is_zero());
        assert!(t_n_m(1, 0).unwrap().is_zero());
        // single block reduces to the plain tree element
        for m in 2..=5 {
            let a = t_n_m(1, m).unwrap();
            let b = t_m(m).unwrap();
            assert_eq!(a, b);
        }
        // two blocks on four points: the three chord pairings, coefficient 1
        let f = t_n_m(2, 4).unwrap();
        assert_eq!(f.len(), 3);
        for (_, d, s) in f.terms() {
            assert!(s.is_one());
            assert_eq!(d.n_tri(), 0);
            assert_eq!(d.degree(), 2);
        }
    }

    #[test]
    fn iota_of_isolated_chords() {
        for n in 1..=3u32 {
            let e = circle_with_adjacent_chords(n as usize);
            let got = iota(&e, n).unwrap();
            // (−2)(−4)…(−2n)
            let mut expect = BigRational::one();
            for k in 1..=n as i64 {
                expect *= BigRational::from_integer(BigInt::from(-2 * k));
            }
            assert_eq!(got.epsilon().as_rational().unwrap(), expect);
            assert_eq!(got.graded_part(0).epsilon().as_rational().unwrap(), expect);
        }
    }

    #[test]
    fn iota_kills_bare_circle() {
        let d = Diagram::skeleton(&[Circle]);
        let e = Element::from_diagram(d, 4);
        assert!(iota(&e, 1).unwrap().is_zero());
    }

    #[test]
    fn iota_rejects_intervals() {
        let d = Diagram::skeleton(&[Interval]);
        let e = Element::from_diagram(d, 4);
        assert!(matches!(iota(&e, 1), Err(SpaceError::NotCircle(0))));
    }

    // all leaf-labeled binary trees on m leaves, built by leaf insertion
    fn all_trees(m: usize) -> Vec<Diagram> {
        // tree as edge list over nodes; leaves 0..m-1, internal nodes after
        #[derive(Clone)]
        struct T {
            edges: Vec<(usize, usize)>,
            next: usize,
        }
        let mut trees = vec![T {
            edges: vec![(0, 1)],
            next: m,
        }];
        for leaf in 2..m {
            let mut grown = Vec::new();
            for t in &trees {
                for (i, &(u, v)) in t.edges.iter().enumerate() {
                    let mut nt = t.clone();
                    let w = nt.next;
                    nt.next += 1;
                    nt.edges.remove(i);
                    nt.edges.push((u, w));
                    nt.edges.push((w, v));
                    nt.edges.push((w, leaf));
                    grown.push(nt);
                }
            }
            trees = grown;
        }
        trees
            .into_iter()
            .map(|t| {
                let mut b = DiagramBuilder::new();
                let legs: Vec<End> = (0..m)
                    .map(|_| {
                        let c = b.add_component(Interval);
                        b.new_leg(c)
                    })
                    .collect();
                for _ in 0..t.next - m {
                    b.new_vertex();
                }
                let mut slot = vec![0u8; t.next - m];
                let end_of = |node: usize, slot: &mut Vec<u8>| -> End {
                    if node < m {
                        legs[node]
                    } else {
                        let s = slot[node - m];
                        slot[node - m] += 1;
                        End::Tri(node - m, s)
                    }
                };
                for (u, v) in t.edges {
                    let a = end_of(u, &mut slot);
                    let c = end_of(v, &mut slot);
                    b.connect(a, c);
                }
                b.build().unwrap()
            })
            .collect()
    }

    #[test]
    fn tree_space_ranks() {
        // span of all trees on m points has dimension (m−2)!
        let expect = [1usize, 1, 2, 6];
        for (i, m) in (2..=5).enumerate() {
            let trees = all_trees(m);
            let elems: Vec<Element> = trees
                .into_iter()
                .map(|d| Element::from_diagram(d, m as u32))
                .collect();
            let mut red = Reducer::new(RelationSet::ihx_only());
            let rank = elimination_rank(&elems, &mut red).unwrap();
            assert_eq!(rank, expect[i], "m = {m}");
        }
    }

    #[test]
    fn invert_small_elements() {
        let one = Element::unit(Vec::new(), 2);
        assert_eq!(graded_invert(&one).unwrap(), one);

        // −1 + θ/16 at cap 1
        let mut e = Element::unit(Vec::new(), 1).scale(&Scalar::from_int(-1));
        e.add_diagram(theta(), Scalar::from_ratio(1, 16));
        let inv = graded_invert(&e).unwrap();
        let mut expect = Element::unit(Vec::new(), 1).scale(&Scalar::from_int(-1));
        expect.add_diagram(theta(), Scalar::from_ratio(-1, 16));
        assert_eq!(inv, expect);
        assert_eq!(e.product_disjoint(&inv), Element::unit(Vec::new(), 1));

        // 2 + θ at cap 1
        let mut f = Element::unit(Vec::new(), 1).scale(&Scalar::from_int(2));
        f.add_diagram(theta(), Scalar::from_int(1));
        let finv = graded_invert(&f).unwrap();
        let mut expect2 = Element::unit(Vec::new(), 1).scale(&Scalar::from_ratio(1, 2));
        expect2.add_diagram(theta(), Scalar::from_ratio(-1, 4));
        assert_eq!(finv, expect2);

        let zero = Element::zero(Vec::new(), 1);
        assert!(graded_invert(&zero).is_err());
    }

    #[test]
    fn iota_of_framed_unknots() {
        // ι₁(Ž(U±)) = ∓1 + θ/16
        let mut ctx = ZContext::new();
        let mut red = Reducer::new(RelationSet::vacuum(1));
        for (framing, sign) in [(1i64, -1i64), (-1, 1)] {
            let p = unknot_presentation(framing);
            let got = iota_check_z(&p, 1, &mut ctx, &mut red).unwrap();
            let mut expect = Element::unit(Vec::new(), 1).scale(&Scalar::from_int(sign));
            expect.add_diagram(theta_diagram(), Scalar::from_ratio(1, 16));
            let expect = red.reduce(&expect).unwrap();
            assert_eq!(got, expect, "framing {framing}");
        }
    }

    #[test]
    fn omega_basics() {
        let mut ctx = ZContext::new();
        // empty link: S³
        let empty = SurgeryPresentation::new(
            crate::links::LinkDiagram::new(Vec::new()).unwrap(),
            Vec::new(),
        )
        .unwrap();
        let o1 = omega_n(&empty, 1, &mut ctx).unwrap();
        assert_eq!(o1, Element::unit(Vec::new(), 1));
        assert_eq!(
            omega_series(&empty, 2, &mut ctx).unwrap(),
            Element::unit(Vec::new(), 2)
        );

        // unknot with framing +1: the two factors cancel by construction
        let p1 = unknot_presentation(1);
        let o = omega_n(&p1, 1, &mut ctx).unwrap();
        assert_eq!(o, Element::unit(Vec::new(), 1));

        // unknot with framing 5: degree-0 part is |H₁| = 5
        let p5 = unknot_presentation(5);
        let o5 = omega_n(&p5, 1, &mut ctx).unwrap();
        assert_eq!(
            o5.epsilon().as_rational().unwrap(),
            BigRational::from_integer(BigInt::from(5))
        );
    }

    #[test]
    fn log_and_exp() {
        let one = Element::unit(Vec::new(), 2);
        assert!(log_group_like(&one, 2).unwrap().is_zero());

        let mut e = Element::unit(Vec::new(), 1);
        e.add_diagram(theta(), Scalar::from_ratio(3, 7));
        let l = log_group_like(&e, 1).unwrap();
        let mut expect = Element::zero(Vec::new(), 1);
        expect.add_diagram(theta(), Scalar::from_ratio(3, 7));
        assert_eq!(l, expect);

        // exp(log(e)) = e at cap 2
        let mut g = Element::unit(Vec::new(), 2);
        g.add_diagram(theta(), Scalar::from_ratio(1, 5));
        g.add_diagram(theta().disjoint_union(&theta()), Scalar::from_ratio(2, 3));
        let back = exp_truncated(&log_group_like(&g, 2).unwrap());
        assert_eq!(back, g);

        let bad = Element::unit(Vec::new(), 1).scale(&Scalar::from_int(2));
        assert!(log_group_like(&bad, 1).is_err());
    }
}
