//! Exact scalar ring: rational polynomials in formal normalized multiple
//! zeta value symbols.
//!
//! A normalized symbol stands for ζ(i₁,…,i_k)/(2π√−1)^w where w is the
//! weight i₁+…+i_k. Low-weight symbols reduce to rationals or to a single
//! transcendental generator via a shipped [`ReductionTable`]; everything the
//! table does not cover stays formal. The main pipeline is exact; the
//! [`numeric`] submodule is a floating-point oracle used only by tests and
//! by the table generator.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScalarError {
    #[error("invalid zeta index {0:?}: entries must be >= 1 and the last >= 2")]
    InvalidIndex(Vec<u32>),
    #[error("reduction table, line {line}: {msg}")]
    TableParse { line: usize, msg: String },
}

/// Index (i₁,…,i_k) of a convergent multiple zeta value
/// Σ_{0<m₁<…<m_k} m₁^{−i₁}…m_k^{−i_k}. All entries ≥ 1 and the last ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MzvIndex(Vec<u32>);

impl MzvIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self, ScalarError> {
        let ok = !entries.is_empty()
            && entries.iter().all(|&e| e >= 1)
            && *entries.last().unwrap() >= 2;
        if ok {
            Ok(MzvIndex(entries))
        } else {
            Err(ScalarError::InvalidIndex(entries))
        }
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Sum of the entries.
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MzvIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for MzvIndex {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, ScalarError> {
        let entries: Result<Vec<u32>, _> =
            s.split(',').map(|p| p.trim().parse::<u32>()).collect();
        match entries {
            Ok(v) => MzvIndex::new(v),
            Err(_) => Err(ScalarError::InvalidIndex(vec![])),
        }
    }
}

/// A transcendental generator of the scalar ring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Named generator introduced by the reduction table, e.g. `z3`.
    Gen { name: String, weight: u32 },
    /// Unreduced normalized zeta symbol.
    Zeta(MzvIndex),
}

impl Symbol {
    pub fn weight(&self) -> u32 {
        match self {
            Symbol::Gen { weight, .. } => *weight,
            Symbol::Zeta(idx) => idx.weight(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Gen { name, .. } => write!(f, "{name}"),
            Symbol::Zeta(idx) => write!(f, "zbar({idx})"),
        }
    }
}

/// Commutative product of symbols, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Symbol>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_symbol(s: Symbol) -> Self {
        Monomial(vec![s])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|s| s.weight()).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort();
        Monomial(v)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Element of the scalar ring: finite rational combination of monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact fraction n/d. Panics if d = 0.
    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Scalar::zero();
        s.add_term(Monomial::one(), r);
        s
    }

    pub fn gen(name: &str, weight: u32) -> Self {
        let mut s = Scalar::zero();
        s.add_term(
            Monomial::from_symbol(Symbol::Gen {
                name: name.to_string(),
                weight,
            }),
            BigRational::one(),
        );
        s
    }

    pub fn formal(index: MzvIndex) -> Self {
        let mut s = Scalar::zero();
        s.add_term(
            Monomial::from_symbol(Symbol::Zeta(index)),
            BigRational::one(),
        );
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map_or(false, |r| r.is_one())
    }

    /// Some(r) iff the scalar is a pure rational (zero included).
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Multiplicative inverse, defined only for nonzero pure rationals.
    pub fn invert(&self) -> Option<Scalar> {
        let r = self.as_rational()?;
        if r.is_zero() {
            None
        } else {
            Some(Scalar::from_rational(r.recip()))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Largest symbol weight appearing, 0 for rationals.
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// What an index reduces to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableEntry {
    Rational(BigRational),
    Gen(String),
}

/// Map from zeta indices to rationals or named generators, shipped as a
/// plain-text data file and regenerable from the numeric oracle.
#[derive(Debug, Clone, Default)]
pub struct ReductionTable {
    map: BTreeMap<MzvIndex, TableEntry>,
}

static DEFAULT_TABLE: OnceLock<ReductionTable> = OnceLock::new();

impl ReductionTable {
    pub fn empty() -> Self {
        ReductionTable::default()
    }

    /// The table bundled with the crate (weights 2 through 4).
    pub fn shipped() -> &'static ReductionTable {
        DEFAULT_TABLE.get_or_init(|| {
            ReductionTable::parse(include_str!("../data/mzv_table.txt"))
                .expect("bundled reduction table must parse")
        })
    }

    /// Parse lines of the form `1,3 -> 1/5760` or `3 -> z3`.
    /// `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, ScalarError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ScalarError::TableParse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("missing ->"))?;
            let index: MzvIndex = lhs.trim().parse()?;
            let rhs = rhs.trim();
            let entry = if rhs
                .chars()
                .next()
                .map_or(false, |c| c.is_ascii_alphabetic())
            {
                TableEntry::Gen(rhs.to_string())
            } else {
                let r = parse_rational(rhs).ok_or_else(|| err("bad rational"))?;
                TableEntry::Rational(r)
            };
            map.insert(index, entry);
        }
        Ok(ReductionTable { map })
    }

    pub fn get(&self, index: &MzvIndex) -> Option<&TableEntry> {
        self.map.get(index)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MzvIndex, &TableEntry)> {
        self.map.iter()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (idx, e) in &self.map {
            match e {
                TableEntry::Rational(r) => out.push_str(&format!("{idx} -> {r}\n")),
                TableEntry::Gen(name) => out.push_str(&format!("{idx} -> {name}\n")),
            }
        }
        out
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

/// The normalized zeta symbol for `index`, reduced through `table` when
/// possible and kept formal otherwise.
pub fn mzv_symbol(index: &MzvIndex, table: &ReductionTable) -> Scalar {
    match table.get(index) {
        Some(TableEntry::Rational(r)) => Scalar::from_rational(r.clone()),
        Some(TableEntry::Gen(name)) => Scalar::gen(name, index.weight()),
        None => Scalar::formal(index.clone()),
    }
}

/// Floating-point multiple zeta oracle with rigorous tail bounds, plus
/// rational recognition. Test and table-generation use only.
pub mod numeric {
    use super::{MzvIndex, ReductionTable, TableEntry};
    use num::{BigInt, BigRational};

    /// Compensated (Kahan) accumulator.
    #[derive(Clone, Copy, Default)]
    struct Kahan {
        sum: f64,
        c: f64,
    }

    impl Kahan {
        fn add(&mut self, x: f64) {
            let y = x - self.c;
            let t = self.sum + y;
            self.c = (t - self.sum) - y;
            self.sum = t;
        }
    }

    /// ∫_N^∞ x^{−s}(1+ln x)^j dx for s > 1, via the incomplete-gamma
    /// closed form: with λ = s−1 and a = 1+ln N this equals
    /// (j!/λ^{j+1}) N^{−λ} Σ_{i≤j} (λa)^i / i!.
    fn log_power_tail_integral(n: f64, s: f64, j: u32) -> f64 {
        let lam = s - 1.0;
        let a = 1.0 + n.ln();
        let mut series = 0.0;
        let mut term = 1.0;
        for i in 0..=j {
            if i > 0 {
                term *= lam * a / i as f64;
            }
            series += term;
        }
        let mut jfact = 1.0;
        for i in 2..=j {
            jfact *= i as f64;
        }
        jfact / lam.powi(j as i32 + 1) * n.powf(-lam) * series
    }

    /// Partial sums Q_j(n) of the nested series, updated one n at a time.
    struct Partial {
        exps: Vec<u32>,
        q: Vec<Kahan>,
        n: u64,
    }

    impl Partial {
        fn new(index: &MzvIndex) -> Self {
            let exps = index.entries().to_vec();
            let k = exps.len();
            Partial {
                exps,
                q: vec![Kahan::default(); k],
                n: 0,
            }
        }

        fn extend_to(&mut self, n: u64) {
            let k = self.exps.len();
            for m in (self.n + 1)..=n {
                let inv = 1.0 / m as f64;
                // Q_j(m) = Q_j(m−1) + m^{−i_j} Q_{j−1}(m−1); updating from
                // the top level down keeps the lower levels one step behind,
                // which is exactly what the recurrence needs.
                for j in (0..k).rev() {
                    let lower = if j == 0 { 1.0 } else { self.q[j - 1].sum };
                    self.q[j].add(inv.powi(self.exps[j] as i32) * lower);
                }
            }
            self.n = n;
        }

        /// (estimate, rigorous error bound) after summing up to self.n.
        ///
        /// Tail over m > N splits as frozen·Σ m^{−s} + D where
        /// frozen = Q_{k−1}(N) and 0 ≤ D ≤ D_up below; Σ m^{−s} is bracketed
        /// by the integrals from N and N+1. Both halves take their midpoint.
        /// D_up uses Q_j(n) ≤ (1+ln n)^j / j! and the pointwise comparison
        /// m^{−s} h(m−1) ≤ x^{−s} h(x) on [m−1, m], which needs
        /// (1+ln x)^{k−2}/x decreasing, true for N ≥ 16 and depth ≤ 5.
        fn estimate(&self) -> (f64, f64) {
            let k = self.exps.len();
            assert!(k <= 5, "tail bound derived for depth <= 5");
            let nn = self.n as f64;
            assert!(self.n >= 16);
            let s = *self.exps.last().unwrap() as f64;
            let lam = s - 1.0;
            let frozen = if k == 1 { 1.0 } else { self.q[k - 2].sum };
            let z_up = nn.powf(-lam) / lam;
            let z_lo = (nn + 1.0).powf(-lam) / lam;
            let d_up = if k == 1 {
                0.0
            } else {
                let j = (k - 1) as u32;
                let a = 1.0 + nn.ln();
                let mut jfact = 1.0;
                for i in 2..=j {
                    jfact *= i as f64;
                }
                (log_power_tail_integral(nn, s, j) - a.powi(j as i32) * nn.powf(-lam) / lam)
                    / jfact
            };
            let est = self.q[k - 1].sum + frozen * (z_lo + z_up) / 2.0 + d_up / 2.0;
            let err = frozen * (z_up - z_lo) / 2.0 + d_up / 2.0 + 1e-14 * est.abs();
            (est, err)
        }
    }

    /// Approximate ζ(index) within `tol`, returning (value, achieved bound).
    /// Returns the best achieved pair even if `tol` was not reached within
    /// the internal summation limit; the caller checks the bound.
    pub fn mzv_numeric_bounded(index: &MzvIndex, tol: f64) -> (f64, f64) {
        let mut p = Partial::new(index);
        let mut n: u64 = 1 << 10;
        loop {
            p.extend_to(n);
            let (est, err) = p.estimate();
            if err <= tol || n >= (1 << 34) {
                return (est, err);
            }
            n *= 2;
        }
    }

    /// Approximate ζ(index) within `tol`. Panics if the bound is not
    /// reached, so tests never silently use a loose value.
    pub fn mzv_numeric(index: &MzvIndex, tol: f64) -> f64 {
        assert!(tol > 0.0);
        let (est, err) = mzv_numeric_bounded(index, tol);
        assert!(
            err <= tol,
            "zeta({index}) oracle stalled at error {err:.3e} > tol {tol:.3e}"
        );
        est
    }

    /// Smallest-denominator fraction within `tol` of `x` (Stern-Brocot
    /// interval search). None if every such fraction needs a denominator
    /// above `max_den`.
    pub fn recognize_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
        let (mut lo, mut hi) = (x - tol, x + tol);
        // Peel off integer parts until the interval lies strictly inside a
        // unit interval; each peeled quotient is a continued-fraction digit.
        let mut digits: Vec<i64> = Vec::new();
        loop {
            if digits.len() > 64 {
                return None;
            }
            let fl = lo.ceil();
            if fl <= hi {
                digits.push(fl as i64);
                break;
            }
            let n = lo.floor();
            digits.push(n as i64);
            let (a, b) = (1.0 / (hi - n), 1.0 / (lo - n));
            lo = a;
            hi = b;
        }
        // Fold the digits back into p/q.
        let (mut p, mut q): (i128, i128) = (1, 0);
        for &d in digits.iter().rev() {
            let (np, nq) = (d as i128 * p + q, p);
            p = np;
            q = nq;
        }
        if q < 0 {
            p = -p;
            q = -q;
        }
        if q == 0 || q as u64 > max_den {
            return None;
        }
        Some((p as i64, q as u64))
    }

    const RECOGNITION_TOL: f64 = 1e-9;
    const RECOGNITION_MAX_DEN: u64 = 1_000_000;

    /// Build the weight 2-4 reduction table from scratch: evaluate each
    /// convergent index numerically, recognize ζ/π^w as a rational for even
    /// w, and map weight-3 indices to the z3 generator after confirming
    /// numerically that ζ(1,2) = ζ(3). Unrecognized indices are omitted and
    /// stay formal.
    pub fn generate_table() -> ReductionTable {
        let pi = std::f64::consts::PI;
        let mut table = ReductionTable::empty();

        let even: &[&[u32]] = &[&[2], &[4], &[1, 3], &[2, 2], &[1, 1, 2]];
        for entries in even {
            let idx = MzvIndex::new(entries.to_vec()).unwrap();
            let w = idx.weight();
            let piw = pi.powi(w as i32);
            // Error budget: half the recognition window, measured on ζ/π^w.
            let (val, err) = mzv_numeric_bounded(&idx, 0.5 * RECOGNITION_TOL * piw);
            if err > 0.5 * RECOGNITION_TOL * piw {
                continue;
            }
            let Some((p, q)) = recognize_rational(val / piw, RECOGNITION_MAX_DEN, RECOGNITION_TOL)
            else {
                continue;
            };
            // ζ/(2π√−1)^w = (ζ/π^w) · (−1)^{w/2} / 2^w for even w.
            let sign = if (w / 2) % 2 == 0 { 1 } else { -1 };
            let r = BigRational::new(
                BigInt::from(p) * BigInt::from(sign),
                BigInt::from(q) * (BigInt::from(2).pow(w)),
            );
            table.map.insert(idx, TableEntry::Rational(r));
        }

        let z3 = mzv_numeric(&MzvIndex::new(vec![3]).unwrap(), 1e-8);
        let z12 = mzv_numeric(&MzvIndex::new(vec![1, 2]).unwrap(), 1e-8);
        if (z3 - z12).abs() <= 2e-8 {
            table
                .map
                .insert(MzvIndex::new(vec![3]).unwrap(), TableEntry::Gen("z3".into()));
            table.map.insert(
                MzvIndex::new(vec![1, 2]).unwrap(),
                TableEntry::Gen("z3".into()),
            );
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::numeric::{mzv_numeric, recognize_rational};
    use super::*;

    fn idx(v: &[u32]) -> MzvIndex {
        MzvIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(MzvIndex::new(vec![]).is_err());
        assert!(MzvIndex::new(vec![1]).is_err());
        assert!(MzvIndex::new(vec![2, 1]).is_err());
        assert!(MzvIndex::new(vec![0, 2]).is_err());
        assert!(MzvIndex::new(vec![1, 2]).is_ok());
        assert!(MzvIndex::new(vec![2]).is_ok());
    }

    #[test]
    fn ring_basics() {
        let a = Scalar::from_ratio(1, 2);
        let b = Scalar::from_ratio(1, 3);
        assert_eq!((&a + &b).as_rational().unwrap(), BigRational::new(5.into(), 6.into()));
        assert_eq!((&a * &b).as_rational().unwrap(), BigRational::new(1.into(), 6.into()));
        assert!((&a - &a).is_zero());
        let z = Scalar::gen("z3", 3);
        let p = &(&a + &z) * &(&a - &z);
        let expect = &(&a * &a) - &(&z * &z);
        assert_eq!(p, expect);
        assert_eq!(p.max_weight(), 6);
        assert_eq!(Scalar::from_ratio(2, 5).invert().unwrap(), Scalar::from_ratio(5, 2));
        assert!(z.invert().is_none());
        assert!(Scalar::zero().invert().is_none());
    }

    #[test]
    fn display_is_deterministic() {
        let s = &Scalar::from_ratio(-1, 24) + &Scalar::gen("z3", 3).scale(&BigRational::from_integer(2.into()));
        assert_eq!(s.to_string(), "-1/24 + 2*z3");
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(Scalar::formal(idx(&[1, 2])).to_string(), "zbar(1,2)");
    }

    #[test]
    fn table_parse_roundtrip() {
        let text = "# comment\n2 -> -1/24\n3 -> z3\n1,3 -> 1/5760\n";
        let t = ReductionTable::parse(text).unwrap();
        assert_eq!(
            t.get(&idx(&[2])),
            Some(&TableEntry::Rational(BigRational::new((-1).into(), 24.into())))
        );
        assert_eq!(t.get(&idx(&[3])), Some(&TableEntry::Gen("z3".into())));
        let t2 = ReductionTable::parse(&t.to_text()).unwrap();
        assert_eq!(t2.get(&idx(&[1, 3])), t.get(&idx(&[1, 3])));
        assert!(ReductionTable::parse("2 -> 1/0").is_err());
        assert!(ReductionTable::parse("nonsense").is_err());
    }

    #[test]
    fn symbol_reduction_uses_table() {
        let t = ReductionTable::parse("2 -> -1/24\n3 -> z3\n").unwrap();
        assert_eq!(mzv_symbol(&idx(&[2]), &t), Scalar::from_ratio(-1, 24));
        assert_eq!(mzv_symbol(&idx(&[3]), &t), Scalar::gen("z3", 3));
        assert_eq!(mzv_symbol(&idx(&[1, 1, 2]), &ReductionTable::empty()), Scalar::formal(idx(&[1, 1, 2])));
    }

    #[test]
    fn oracle_matches_known_values() {
        let pi = std::f64::consts::PI;
        assert!((mzv_numeric(&idx(&[2]), 1e-9) - pi * pi / 6.0).abs() < 2e-9);
        assert!((mzv_numeric(&idx(&[3]), 1e-9) - 1.2020569).abs() < 1e-7);
        let z12 = mzv_numeric(&idx(&[1, 2]), 1e-7);
        let z3 = mzv_numeric(&idx(&[3]), 1e-7);
        assert!((z12 - z3).abs() < 1e-7);
    }

    #[test]
    fn recognition_finds_smallest_denominator() {
        assert_eq!(recognize_rational(1.0 / 6.0, 1000, 1e-9), Some((1, 6)));
        assert_eq!(recognize_rational(-0.25, 1000, 1e-9), Some((-1, 4)));
        assert_eq!(recognize_rational(3.0, 1000, 1e-9), Some((3, 1)));
        assert_eq!(recognize_rational(1.0 / 5760.0, 1_000_000, 1e-9), Some((1, 5760)));
        // 1.2020569... is not close to any small fraction
        assert_eq!(recognize_rational(1.2020569, 100, 1e-9), None);
        // smallest denominator in a wide window
        assert_eq!(recognize_rational(0.3, 1000, 0.05), Some((1, 3)));
    }

    #[test]
    fn shipped_table_parses_and_covers_weights_2_to_4() {
        let t = ReductionTable::shipped();
        for entries in [&[2][..], &[3], &[1, 2], &[4], &[1, 3], &[2, 2], &[1, 1, 2]] {
            assert!(t.get(&idx(entries)).is_some(), "missing {entries:?}");
        }
    }
}
