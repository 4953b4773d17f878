//! Values of elementary tangles, their stacking product over a link
//! diagram, the correction element ν, and the normalized invariants.
//!
//! Token chord words live on the wide side of each tangle (below crossings
//! and maxima, above minima) with all strands pointing down as reference;
//! the actual strand orientations of the traced diagram are accounted for
//! by the one-strand reversal map.

use crate::associator::{phi, phi_inverse, substitute, FreeSeries};
use crate::diagrams::{ComponentKind, DiagramBuilder, End};
use crate::links::{LinkDiagram, TangleToken};
use crate::scalars::{ReductionTable, Scalar};
use crate::spaces::{Element, SpaceError};
use num::{BigInt, BigRational, One};
use std::collections::{BTreeMap, HashMap};

/// The single-chord element connecting strands i and j of n downward
/// strands (1-based, i < j).
pub fn omega_chord(i: usize, j: usize, n: usize, cap: u32) -> Result<Element, SpaceError> {
    if i == 0 || i >= j || j > n {
        return Err(SpaceError::Argument(format!(
            "need 1 <= i < j <= n, got i={i}, j={j}, n={n}"
        )));
    }
    let mut b = DiagramBuilder::new();
    let mut legs = Vec::new();
    for c in 0..n {
        b.add_component(ComponentKind::Interval);
        if c + 1 == i || c + 1 == j {
            legs.push(b.new_leg(c));
        }
    }
    b.connect(legs[0], legs[1]);
    Ok(Element::from_diagram(b.build()?, cap))
}

fn strands(n: usize) -> Vec<ComponentKind> {
    vec![ComponentKind::Interval; n]
}

/// Exponential under the stacking product.
pub fn stack_exp(e: &Element) -> Element {
    let mut acc = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut xp = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let mut fact = BigRational::one();
    let mut k = 1i64;
    loop {
        xp = xp.stack(e);
        if xp.is_zero() {
            break;
        }
        fact *= BigRational::from_integer(BigInt::from(k));
        acc = acc.add(&xp.scale(&Scalar::from_rational(fact.recip())));
        k += 1;
    }
    acc
}

/// Caches for associator series, token values and ν, keyed by degree cap.
pub struct ZContext {
    table: &'static ReductionTable,
    phi_cache: HashMap<u32, FreeSeries>,
    phi_inv_cache: HashMap<u32, FreeSeries>,
    token_cache: HashMap<(u8, usize, usize, u32), Element>,
    nu_cache: HashMap<u32, Element>,
}

impl ZContext {
    pub fn new() -> Self {
        ZContext {
            table: ReductionTable::shipped(),
            phi_cache: HashMap::new(),
            phi_inv_cache: HashMap::new(),
            token_cache: HashMap::new(),
            nu_cache: HashMap::new(),
        }
    }

    fn phi_at(&mut self, cap: u32) -> FreeSeries {
        self.phi_cache
            .entry(cap)
            .or_insert_with(|| phi(cap, self.table))
            .clone()
    }

    fn phi_inv_at(&mut self, cap: u32) -> FreeSeries {
        self.phi_inv_cache
            .entry(cap)
            .or_insert_with(|| phi_inverse(cap, self.table))
            .clone()
    }

    /// Reference (all strands down) chord word of a token, on the wide
    /// side's strand count.
    pub fn elementary_value(
        &mut self,
        t: &TangleToken,
        cap: u32,
    ) -> Result<Element, SpaceError> {
        let (code, k, n) = match *t {
            TangleToken::XPlus { k, n } => (0u8, k, n),
            TangleToken::XMinus { k, n } => (1, k, n),
            TangleToken::Max { k, n, .. } => (2, k, n),
            TangleToken::Min { k, n } => (3, k, n),
        };
        if let Some(v) = self.token_cache.get(&(code, k, n, cap)) {
            return Ok(v.clone());
        }
        let chords_to = |target: usize| -> Result<Element, SpaceError> {
            let mut acc = Element::zero(strands(n), cap);
            for i in 1..k {
                acc = acc.add(&omega_chord(i, target, n, cap)?);
            }
            Ok(acc)
        };
        let a_k = chords_to(k)?;
        let b = omega_chord(k, k + 1, n, cap)?;
        let val = match code {
            2 => {
                let f = self.phi_at(cap);
                substitute(&f, &a_k, &b)
            }
            3 => {
                let f = self.phi_inv_at(cap);
                substitute(&f, &a_k, &b)
            }
            _ => {
                let a_k1 = chords_to(k + 1)?;
                let half = if code == 0 {
                    Scalar::from_ratio(1, 2)
                } else {
                    Scalar::from_ratio(-1, 2)
                };
                let fi = self.phi_inv_at(cap);
                let f = self.phi_at(cap);
                substitute(&fi, &a_k, &b)
                    .stack(&stack_exp(&b.scale(&half)))
                    .stack(&substitute(&f, &a_k1, &b))
            }
        };
        self.token_cache.insert((code, k, n, cap), val.clone());
        Ok(val)
    }
}

impl Default for ZContext {
    fn default() -> Self {
        ZContext::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum PEnd {
    L(u32),
    T(u32, u8),
}

/// Open-diagram term during stacking: legs keyed by (segment, token,
/// position-in-strand-word), identified by index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Partial {
    n_tri: u32,
    legs: Vec<(u32, u32, u32)>,
    edges: Vec<(PEnd, PEnd)>,
}

fn norm_edge(a: PEnd, b: PEnd) -> (PEnd, PEnd) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The stacking product of all token values of a closed diagram, as an
/// element on the link's solid circles.
pub fn z_of_diagram(
    d: &LinkDiagram,
    cap: u32,
    ctx: &mut ZContext,
) -> Result<Element, SpaceError> {
    let mut terms: BTreeMap<Partial, Scalar> = BTreeMap::new();
    terms.insert(
        Partial {
            n_tri: 0,
            legs: Vec::new(),
            edges: Vec::new(),
        },
        Scalar::one(),
    );

    for (i, tok) in d.tokens().iter().enumerate() {
        let (n, above) = match *tok {
            TangleToken::XPlus { n, .. } | TangleToken::XMinus { n, .. } => (n, false),
            TangleToken::Max { n, .. } => (n, false),
            TangleToken::Min { n, .. } => (n, true),
        };
        // the segment carrying strand p of the chord word
        let seg_at = |p: usize| {
            if above {
                d.segment_above(i, p)
            } else {
                d.segment_below(i, p)
            }
        };
        let mut value = ctx.elementary_value(tok, cap)?;
        for p in 1..=n {
            if !d.is_down(seg_at(p)) {
                // reversal twist: legs keep their geometric heights (the
                // closure below orders them by traversal direction), so
                // only the per-endpoint sign applies here
                value = orientation_sign(&value, p - 1);
            }
        }
        if value.len() == 1 && !value.epsilon().is_zero() && value.epsilon().is_one() {
            // bare unit token: nothing to attach
            continue;
        }

        // token terms as attachable pieces
        struct Piece {
            n_tri: u32,
            legs: Vec<(u32, u32, u32)>,
            edges: Vec<(PEnd, PEnd)>,
            coeff: Scalar,
        }
        let mut pieces: Vec<Piece> = Vec::new();
        for (_, vd, vs) in value.terms() {
            let mut leg_index: HashMap<usize, u32> = HashMap::new();
            let mut legs = Vec::new();
            for (j, comp) in vd.components().iter().enumerate() {
                let seg = seg_at(j + 1) as u32;
                for (pos, &l) in comp.legs.iter().enumerate() {
                    leg_index.insert(l, legs.len() as u32);
                    legs.push((seg, i as u32, pos as u32));
                }
            }
            let edges = vd
                .edges()
                .iter()
                .map(|(a, b)| {
                    let m = |e: &End| match *e {
                        End::Leg(l) => PEnd::L(leg_index[&l]),
                        End::Tri(v, s) => PEnd::T(v as u32, s),
                    };
                    norm_edge(m(a), m(b))
                })
                .collect();
            pieces.push(Piece {
                n_tri: vd.n_tri() as u32,
                legs,
                edges,
                coeff: vs.clone(),
            });
        }

        let mut next: BTreeMap<Partial, Scalar> = BTreeMap::new();
        for (part, coeff) in &terms {
            for piece in &pieces {
                let n_legs = part.legs.len() as u32 + piece.legs.len() as u32;
                let n_tri = part.n_tri + piece.n_tri;
                if (n_legs + n_tri) / 2 > cap {
                    continue;
                }
                let mut legs = part.legs.clone();
                legs.extend_from_slice(&piece.legs);
                let mut edges = part.edges.clone();
                let leg_off = part.legs.len() as u32;
                for (a, b) in &piece.edges {
                    let m = |e: &PEnd| match *e {
                        PEnd::L(l) => PEnd::L(l + leg_off),
                        PEnd::T(v, s) => PEnd::T(v + part.n_tri, s),
                    };
                    edges.push(norm_edge(m(a), m(b)));
                }
                edges.sort_unstable();
                let key = Partial { n_tri, legs, edges };
                let c = coeff * &piece.coeff;
                let entry = terms_entry(&mut next, key);
                *entry = &*entry + &c;
                if entry.is_zero() {
                    // leave it; pruned below
                }
            }
        }
        next.retain(|_, c| !c.is_zero());
        terms = next;
    }

    // assemble closed diagrams: traverse each circle, placing the legs of
    // each segment in manifold order
    let ell = d.n_components();
    let mut out = Element::zero(vec![ComponentKind::Circle; ell], cap);
    for (part, coeff) in &terms {
        let mut by_seg: HashMap<u32, Vec<(usize, u32, u32)>> = HashMap::new();
        for (idx, &(seg, tok, pos)) in part.legs.iter().enumerate() {
            by_seg.entry(seg).or_default().push((idx, tok, pos));
        }
        let mut b = DiagramBuilder::new();
        for _ in 0..ell {
            b.add_component(ComponentKind::Circle);
        }
        let mut leg_end: Vec<Option<End>> = vec![None; part.legs.len()];
        for c in 0..ell {
            for &seg in d.traversal(c) {
                let Some(entries) = by_seg.get_mut(&(seg as u32)) else {
                    continue;
                };
                entries.sort_by_key(|&(_, tok, pos)| (tok, pos));
                if d.is_down(seg) {
                    for &(idx, _, _) in entries.iter() {
                        leg_end[idx] = Some(b.new_leg(c));
                    }
                } else {
                    for &(idx, _, _) in entries.iter().rev() {
                        leg_end[idx] = Some(b.new_leg(c));
                    }
                }
            }
        }
        for _ in 0..part.n_tri {
            b.new_vertex();
        }
        for (x, y) in &part.edges {
            let m = |e: &PEnd| match *e {
                PEnd::L(l) => leg_end[l as usize].expect("leg placed"),
                PEnd::T(v, s) => End::Tri(v as usize, s),
            };
            b.connect(m(x), m(y));
        }
        out.add_diagram(b.build()?, coeff.clone());
    }
    Ok(out)
}

fn terms_entry(map: &mut BTreeMap<Partial, Scalar>, key: Partial) -> &mut Scalar {
    map.entry(key).or_insert_with(Scalar::zero)
}

/// Inverse under repeated connected sum at the basepoint of circle 0.
fn connect_invert(e: &Element) -> Result<Element, SpaceError> {
    let a = e.epsilon();
    if !a.is_one() {
        return Err(SpaceError::NotInvertible);
    }
    let unit = Element::unit(e.kinds().to_vec(), e.degree_cap());
    let x = e.sub(&unit);
    let mut acc = unit.clone();
    let mut xp = unit;
    let mut sign = 1i64;
    loop {
        xp = xp.connect_sum(0, &x, 0)?;
        if xp.is_zero() {
            break;
        }
        sign = -sign;
        acc = acc.add(&xp.scale(&Scalar::from_int(sign)));
    }
    Ok(acc)
}

/// Scale each term by (−1)^{number of legs on component `c`}.
fn orientation_sign(e: &Element, c: usize) -> Element {
    let mut out = Element::zero(e.kinds().to_vec(), e.degree_cap());
    for (_, d, s) in e.terms() {
        let ns = if d.legs_on(c) % 2 == 1 { -s.clone() } else { s.clone() };
        out.add_diagram(d.clone(), ns);
    }
    out
}

fn hump() -> LinkDiagram {
    LinkDiagram::new(vec![
        TangleToken::Max { k: 1, n: 2, rev: false },
        TangleToken::Max { k: 2, n: 4, rev: false },
        TangleToken::Min { k: 1, n: 4 },
        TangleToken::Min { k: 1, n: 2 },
    ])
    .expect("hump is a valid diagram")
}

/// ν: the inverse, under connected sum, of the value of the two-maximum
/// crossingless unknot diagram.
pub fn nu(cap: u32, ctx: &mut ZContext) -> Result<Element, SpaceError> {
    if let Some(v) = ctx.nu_cache.get(&cap) {
        return Ok(v.clone());
    }
    let z = z_of_diagram(&hump(), cap, ctx)?;
    let v = connect_invert(&z)?;
    ctx.nu_cache.insert(cap, v.clone());
    Ok(v)
}

/// Z(D) # (ν^{s_1} ⊗ … ⊗ ν^{s_l}) with s_i the maxima count of
/// component i.
pub fn hat_z(d: &LinkDiagram, cap: u32, ctx: &mut ZContext) -> Result<Element, SpaceError> {
    let mut z = z_of_diagram(d, cap, ctx)?;
    let v = nu(cap, ctx)?;
    for (i, &s) in d.maxima_counts().iter().enumerate() {
        for _ in 0..s {
            z = z.connect_sum(i, &v, 0)?;
        }
    }
    Ok(z)
}

/// Ẑ(L) with one extra ν on every component.
pub fn check_z(d: &LinkDiagram, cap: u32, ctx: &mut ZContext) -> Result<Element, SpaceError> {
    let mut z = hat_z(d, cap, ctx)?;
    let v = nu(cap, ctx)?;
    for i in 0..d.n_components() {
        z = z.connect_sum(i, &v, 0)?;
    }
    Ok(z)
}
