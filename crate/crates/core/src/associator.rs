//! The Drinfeld associator as a truncated series in two noncommuting
//! symbols, its inverse, and substitution of diagram-valued arguments.
//!
//! Coefficients are normalized zeta symbols, so the 1/(2π√−1) factors that
//! accompany the arguments in the analytic formulas are already folded in.

use crate::scalars::{mzv_symbol, MzvIndex, ReductionTable, Scalar};
use crate::spaces::Element;
use num::{BigInt, BigRational};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Letter {
    A,
    B,
}

pub type Word = Vec<Letter>;

/// Weight-truncated series in noncommuting A, B.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSeries {
    trunc: u32,
    terms: BTreeMap<Word, Scalar>,
}

impl FreeSeries {
    pub fn zero(trunc: u32) -> Self {
        FreeSeries {
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(trunc: u32) -> Self {
        let mut s = FreeSeries::zero(trunc);
        s.add_term(Vec::new(), Scalar::one());
        s
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() || w.len() as u32 > self.trunc {
            return;
        }
        let e = self.terms.entry(w).or_insert_with(Scalar::zero);
        *e = &*e + &c;
        if e.is_zero() {
            let dead: Vec<Word> = self
                .terms
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in dead {
                self.terms.remove(&k);
            }
        }
    }

    pub fn coefficient(&self, w: &[Letter]) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    /// Part of homogeneous word length w.
    pub fn graded_part(&self, w: u32) -> FreeSeries {
        let mut out = FreeSeries::zero(self.trunc);
        for (word, c) in &self.terms {
            if word.len() as u32 == w {
                out.add_term(word.clone(), c.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &FreeSeries) -> FreeSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = FreeSeries::zero(trunc);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                if (w1.len() + w2.len()) as u32 > trunc {
                    continue;
                }
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }

    pub fn sub(&self, other: &FreeSeries) -> FreeSeries {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

/// η(p; q): zero when any entry vanishes, otherwise the normalized symbol of
/// ζ(1_{p₁−1}, q₁+1, …, 1_{p_k−1}, q_k+1).
pub fn eta(p: &[u32], q: &[u32], table: &ReductionTable) -> Scalar {
    assert_eq!(p.len(), q.len(), "multi-index length mismatch");
    if p.iter().chain(q.iter()).any(|&x| x == 0) {
        return Scalar::zero();
    }
    let mut entries = Vec::new();
    for (&pi, &qi) in p.iter().zip(q) {
        entries.extend(std::iter::repeat(1).take(pi as usize - 1));
        entries.push(qi + 1);
    }
    let idx = MzvIndex::new(entries).expect("positive entries, last >= 2");
    mzv_symbol(&idx, table)
}

fn binom(n: u32, k: u32) -> BigRational {
    let mut r = BigInt::from(1);
    for i in 0..k.min(n - k) {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(r)
}

/// The associator series up to the given weight.
pub fn phi(trunc: u32, table: &ReductionTable) -> FreeSeries {
    let mut out = FreeSeries::one(trunc);
    // quadruples (p, q, r, s) of common length k; position i contributes
    // p_i + q_i + r_i + s_i to the weight and needs p_i + r_i >= 1 and
    // q_i + s_i >= 1, so weight >= 2k
    for k in 1..=(trunc / 2) as usize {
        let mut p = vec![0u32; k];
        let mut q = vec![0u32; k];
        let mut r = vec![0u32; k];
        let mut s = vec![0u32; k];
        enumerate_position(0, trunc, &mut p, &mut q, &mut r, &mut s, &mut |p, q, r, s| {
            let pr: Vec<u32> = p.iter().zip(r).map(|(a, b)| a + b).collect();
            let qs: Vec<u32> = q.iter().zip(s).map(|(a, b)| a + b).collect();
            let e = eta(&pr, &qs, table);
            if e.is_zero() {
                return;
            }
            let mut c = binom_vec(&pr, r) * binom_vec(&qs, s);
            let parity = (r.iter().sum::<u32>() + q.iter().sum::<u32>()) % 2;
            if parity == 1 {
                c = -c;
            }
            let mut w: Word = Vec::new();
            w.extend(std::iter::repeat(Letter::B).take(s.iter().sum::<u32>() as usize));
            for i in 0..p.len() {
                w.extend(std::iter::repeat(Letter::A).take(p[i] as usize));
                w.extend(std::iter::repeat(Letter::B).take(q[i] as usize));
            }
            w.extend(std::iter::repeat(Letter::A).take(r.iter().sum::<u32>() as usize));
            out.add_term(w, e.scale(&c));
        });
    }
    out
}

fn binom_vec(top: &[u32], bottom: &[u32]) -> BigRational {
    top.iter()
        .zip(bottom)
        .map(|(&n, &k)| binom(n, k))
        .product()
}

/// Enumerate entries position by position under the remaining weight budget.
fn enumerate_position(
    i: usize,
    budget: u32,
    p: &mut Vec<u32>,
    q: &mut Vec<u32>,
    r: &mut Vec<u32>,
    s: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32], &[u32], &[u32], &[u32]),
) {
    let k = p.len();
    if i == k {
        f(p, q, r, s);
        return;
    }
    // the remaining positions need at least 2 each
    let reserved = 2 * (k - i - 1) as u32;
    if budget < reserved + 2 {
        return;
    }
    let avail = budget - reserved;
    for pi in 0..=avail {
        for ri in 0..=(avail - pi) {
            if pi + ri == 0 {
                continue;
            }
            for qi in 0..=(avail - pi - ri) {
                for si in 0..=(avail - pi - ri - qi) {
                    if qi + si == 0 {
                        continue;
                    }
                    p[i] = pi;
                    q[i] = qi;
                    r[i] = ri;
                    s[i] = si;
                    enumerate_position(i + 1, budget - pi - qi - ri - si, p, q, r, s, f);
                }
            }
        }
    }
    p[i] = 0;
    q[i] = 0;
    r[i] = 0;
    s[i] = 0;
}

/// Multiplicative inverse by graded recursion.
pub fn phi_inverse(trunc: u32, table: &ReductionTable) -> FreeSeries {
    let f = phi(trunc, table);
    invert_series(&f)
}

pub fn invert_series(f: &FreeSeries) -> FreeSeries {
    let trunc = f.trunc();
    assert!(f.coefficient(&[]).is_one(), "constant term must be 1");
    let mut inv = FreeSeries::one(trunc);
    for w in 1..=trunc {
        // inv_w = - sum_{u=1..w} f_u * inv_{w-u}
        let mut acc = FreeSeries::zero(trunc);
        for u in 1..=w {
            let prod = f.graded_part(u).mul(&inv.graded_part(w - u));
            for (word, c) in prod.terms() {
                acc.add_term(word.clone(), c.clone());
            }
        }
        for (word, c) in acc.terms() {
            inv.add_term(word.clone(), -c.clone());
        }
    }
    inv
}

/// Evaluate the series on diagram-valued arguments by vertical stacking.
/// Arguments must live on the same all-interval skeleton.
pub fn substitute(f: &FreeSeries, a_val: &Element, b_val: &Element) -> Element {
    assert_eq!(a_val.kinds(), b_val.kinds());
    let cap = a_val.degree_cap().min(b_val.degree_cap());
    let kinds = a_val.kinds().to_vec();
    let mut out = Element::zero(kinds.clone(), cap);
    for (w, c) in f.terms() {
        if w.len() as u32 > cap {
            continue;
        }
        let mut val = Element::unit(kinds.clone(), cap);
        for &l in w {
            let factor = match l {
                Letter::A => a_val,
                Letter::B => b_val,
            };
            val = val.stack(factor);
            if val.is_zero() {
                break;
            }
        }
        out = out.add(&val.scale(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::{Component, ComponentKind, Diagram, End};

    fn table() -> &'static ReductionTable {
        ReductionTable::shipped()
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(&[1], &[1], table()), Scalar::from_ratio(-1, 24));
        assert_eq!(eta(&[0], &[1], table()), Scalar::zero());
        assert_eq!(eta(&[2], &[1], table()), Scalar::gen("z3", 3));
        assert_eq!(eta(&[1], &[2], table()), Scalar::gen("z3", 3));
        assert_eq!(eta(&[1, 1], &[1, 1], table()), mzv_symbol(&MzvIndex::new(vec![2, 2]).unwrap(), table()));
    }

    #[test]
    fn phi_weight_one_vanishes_and_weight_two_is_a_commutator() {
        let f = phi(4, table());
        assert!(f.graded_part(1).is_zero());
        use Letter::*;
        assert_eq!(f.coefficient(&[A, B]), Scalar::from_ratio(1, 24));
        assert_eq!(f.coefficient(&[B, A]), Scalar::from_ratio(-1, 24));
        assert!(f.coefficient(&[A, A]).is_zero());
        assert!(f.coefficient(&[B, B]).is_zero());
        assert!(f.coefficient(&[]).is_one());
    }

    #[test]
    fn phi_times_inverse_is_one_through_weight_four() {
        let f = phi(4, table());
        let g = phi_inverse(4, table());
        let prod = f.mul(&g);
        assert_eq!(prod, FreeSeries::one(4));
        let prod2 = g.mul(&f);
        assert_eq!(prod2, FreeSeries::one(4));
    }

    #[test]
    fn inverse_weight_two_negates() {
        let f = phi(2, table());
        let g = phi_inverse(2, table());
        assert_eq!(g.graded_part(2), {
            let mut z = FreeSeries::zero(2);
            for (w, c) in f.graded_part(2).terms() {
                z.add_term(w.clone(), -c.clone());
            }
            z
        });
    }

    fn strand_chord(i: usize, j: usize, n: usize, cap: u32) -> Element {
        let comps: Vec<Component> = (0..n)
            .map(|c| Component {
                kind: ComponentKind::Interval,
                legs: if c == i {
                    vec![0]
                } else if c == j {
                    vec![1]
                } else {
                    vec![]
                },
            })
            .collect();
        let d = Diagram::new(comps, 0, vec![(End::Leg(0), End::Leg(1))], 0).unwrap();
        Element::from_diagram(d, cap)
    }

    #[test]
    fn substitute_unit_and_zero() {
        let a = strand_chord(0, 1, 3, 3);
        let b = strand_chord(1, 2, 3, 3);
        let one = substitute(&FreeSeries::one(3), &a, &b);
        assert_eq!(one, Element::unit(a.kinds().to_vec(), 3));
        // phi with a zero first argument collapses to 1
        let z = Element::zero(a.kinds().to_vec(), 3);
        let f = phi(3, table());
        let e = substitute(&f, &z, &b);
        assert_eq!(e, Element::unit(a.kinds().to_vec(), 3));
    }

    #[test]
    fn substitute_degree_two_commutator() {
        let a = strand_chord(0, 1, 3, 2);
        let b = strand_chord(1, 2, 3, 2);
        let f = phi(2, table());
        let e = substitute(&f, &a, &b);
        let expect = Element::unit(a.kinds().to_vec(), 2).add(
            &a.stack(&b)
                .sub(&b.stack(&a))
                .scale(&Scalar::from_ratio(1, 24)),
        );
        assert_eq!(e, expect);
    }
}
