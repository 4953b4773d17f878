//! Link-diagram input: token streams and braid words, component tracing
//! with orientations, linking matrices, signatures and framing curls.
//!
//! A diagram is a top-to-bottom stream of elementary tangles. Widths must
//! chain and the stream must open and close at width zero. Components are
//! numbered by first appearance; each component is oriented so that the
//! left leg of its first maximum points down (a `rev` mark on that maximum
//! flips this).

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("token {index}: {msg}")]
    Glue { index: usize, msg: String },
    #[error("diagram does not close (final width {0})")]
    Open(usize),
    #[error("components {i} and {j} cross an odd number of times")]
    OddCrossings { i: usize, j: usize },
    #[error("expected {expected} framings, got {got}")]
    FramingCount { expected: usize, got: usize },
    #[error("braid generator {0} out of range")]
    BadGenerator(i64),
}

/// Elementary tangle. `k` and `n` are 1-based; crossings act on strands
/// k, k+1 of n; extrema create or remove strands at positions k, k+1 with
/// the wider side having n strands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TangleToken {
    XPlus { k: usize, n: usize },
    XMinus { k: usize, n: usize },
    Max { k: usize, n: usize, rev: bool },
    Min { k: usize, n: usize },
}

impl TangleToken {
    pub fn width_before(&self, _index: usize) -> usize {
        match *self {
            TangleToken::XPlus { n, .. } | TangleToken::XMinus { n, .. } => n,
            TangleToken::Max { n, .. } => n - 2,
            TangleToken::Min { n, .. } => n,
        }
    }

    pub fn width_after(&self) -> usize {
        match *self {
            TangleToken::XPlus { n, .. } | TangleToken::XMinus { n, .. } => n,
            TangleToken::Max { n, .. } => n,
            TangleToken::Min { n, .. } => n - 2,
        }
    }

    fn check(&self) -> Result<(), String> {
        let (k, n) = match *self {
            TangleToken::XPlus { k, n } | TangleToken::XMinus { k, n } => (k, n),
            TangleToken::Max { k, n, .. } | TangleToken::Min { k, n } => (k, n),
        };
        if n < 2 || k == 0 || k + 1 > n {
            return Err(format!("invalid positions k={k}, n={n}"));
        }
        Ok(())
    }
}

impl std::fmt::Display for TangleToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            TangleToken::XPlus { k, n } => write!(f, "X+ {k} {n}"),
            TangleToken::XMinus { k, n } => write!(f, "X- {k} {n}"),
            TangleToken::Max { k, n, rev } => {
                write!(f, "MAX {k} {n}")?;
                if rev {
                    write!(f, " rev")?;
                }
                Ok(())
            }
            TangleToken::Min { k, n } => write!(f, "MIN {k} {n}"),
        }
    }
}

/// A validated, traced closed diagram.
#[derive(Debug, Clone)]
pub struct LinkDiagram {
    tokens: Vec<TangleToken>,
    /// widths[t] = strand count after token t; widths[0] = 0.
    widths: Vec<usize>,
    /// levels[t][p-1] = segment id at position p of level t (t = 1..m-1).
    levels: Vec<Vec<usize>>,
    seg_comp: Vec<usize>,
    seg_down: Vec<bool>,
    /// per component: segment ids in traversal order, starting at the left
    /// leg of the component's first maximum
    traversals: Vec<Vec<usize>>,
    n_components: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EndSide {
    Top,
    Bottom,
}

impl LinkDiagram {
    pub fn new(tokens: Vec<TangleToken>) -> Result<Self, LinkError> {
        // widths
        let m = tokens.len();
        let mut widths = vec![0usize; m + 1];
        for (i, t) in tokens.iter().enumerate() {
            t.check().map_err(|msg| LinkError::Glue { index: i, msg })?;
            if t.width_before(i) != widths[i] {
                return Err(LinkError::Glue {
                    index: i,
                    msg: format!(
                        "token expects width {}, stream has {}",
                        t.width_before(i),
                        widths[i]
                    ),
                });
            }
            widths[i + 1] = t.width_after();
        }
        if widths[m] != 0 {
            return Err(LinkError::Open(widths[m]));
        }

        // segments per level
        let mut levels: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
        let mut n_segs = 0usize;
        for (t, level) in levels.iter_mut().enumerate() {
            for _ in 0..widths[t] {
                level.push(n_segs);
                n_segs += 1;
            }
        }

        // mate of each segment end
        let mut mate: Vec<[(usize, EndSide); 2]> =
            vec![[(usize::MAX, EndSide::Top); 2]; n_segs];
        let set = |mate: &mut Vec<[(usize, EndSide); 2]>,
                   a: (usize, EndSide),
                   b: (usize, EndSide)| {
            let ia = if a.1 == EndSide::Top { 0 } else { 1 };
            let ib = if b.1 == EndSide::Top { 0 } else { 1 };
            mate[a.0][ia] = b;
            mate[b.0][ib] = a;
        };
        for (i, tok) in tokens.iter().enumerate() {
            // token i joins level i (above) to level i+1 (below)
            let above = &levels[i];
            let below = &levels[i + 1];
            match *tok {
                TangleToken::Max { k, .. } => {
                    set(&mut mate, (below[k - 1], EndSide::Top), (below[k], EndSide::Top));
                    for p in 0..above.len() {
                        let p2 = if p + 1 >= k { p + 2 } else { p };
                        set(
                            &mut mate,
                            (above[p], EndSide::Bottom),
                            (below[p2], EndSide::Top),
                        );
                    }
                }
                TangleToken::Min { k, .. } => {
                    set(
                        &mut mate,
                        (above[k - 1], EndSide::Bottom),
                        (above[k], EndSide::Bottom),
                    );
                    for p in 0..above.len() {
                        if p == k - 1 || p == k {
                            continue;
                        }
                        let p2 = if p > k { p - 2 } else { p };
                        set(
                            &mut mate,
                            (above[p], EndSide::Bottom),
                            (below[p2], EndSide::Top),
                        );
                    }
                }
                TangleToken::XPlus { k, .. } | TangleToken::XMinus { k, .. } => {
                    for p in 0..above.len() {
                        let p2 = if p == k - 1 {
                            k
                        } else if p == k {
                            k - 1
                        } else {
                            p
                        };
                        set(
                            &mut mate,
                            (above[p], EndSide::Bottom),
                            (below[p2], EndSide::Top),
                        );
                    }
                }
            }
        }

        // trace components and orientations
        let mut seg_comp = vec![usize::MAX; n_segs];
        let mut seg_down = vec![false; n_segs];
        let mut traversals: Vec<Vec<usize>> = Vec::new();
        let mut n_components = 0usize;
        for start in 0..n_segs {
            if seg_comp[start] != usize::MAX {
                continue;
            }
            let comp = n_components;
            n_components += 1;
            // locate the creating maximum: `start` is the leftmost new
            // segment of the earliest level of this component, i.e. a left
            // cap leg; its token is the one just above its level
            let (lvl, _pos) = locate(&levels, start);
            let rev = match tokens[lvl - 1] {
                TangleToken::Max { rev, .. } => rev,
                _ => unreachable!("components are born at maxima"),
            };
            // propagate: moving down a segment exits at its bottom
            let mut order = Vec::new();
            let mut seg = start;
            let mut down = !rev;
            loop {
                seg_comp[seg] = comp;
                seg_down[seg] = down;
                order.push(seg);
                let exit = if down { EndSide::Bottom } else { EndSide::Top };
                let (next, entered) =
                    mate[seg][if exit == EndSide::Top { 0 } else { 1 }];
                let next_down = entered == EndSide::Top;
                if next == start {
                    break;
                }
                seg = next;
                down = next_down;
            }
            traversals.push(order);
        }

        Ok(LinkDiagram {
            tokens,
            widths,
            levels,
            seg_comp,
            seg_down,
            traversals,
            n_components,
        })
    }

    /// Segment ids of one component in traversal order.
    pub fn traversal(&self, comp: usize) -> &[usize] {
        &self.traversals[comp]
    }

    pub fn tokens(&self) -> &[TangleToken] {
        &self.tokens
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn width_after(&self, token_index: usize) -> usize {
        self.widths[token_index + 1]
    }

    /// Segment id at 1-based position `p` of the level below token
    /// `token_index`.
    pub fn segment_below(&self, token_index: usize, p: usize) -> usize {
        self.levels[token_index + 1][p - 1]
    }

    pub fn segment_above(&self, token_index: usize, p: usize) -> usize {
        self.levels[token_index][p - 1]
    }

    pub fn component_of(&self, seg: usize) -> usize {
        self.seg_comp[seg]
    }

    pub fn is_down(&self, seg: usize) -> bool {
        self.seg_down[seg]
    }

    /// Number of maxima per component.
    pub fn maxima_counts(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.n_components];
        for (i, t) in self.tokens.iter().enumerate() {
            if let TangleToken::Max { k, .. } = *t {
                let seg = self.segment_below(i, k);
                out[self.seg_comp[seg]] += 1;
            }
        }
        out
    }

    /// Signed crossings: (component a, component b, sign), one per crossing.
    pub fn crossings(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let (k, base) = match *t {
                TangleToken::XPlus { k, .. } => (k, 1i64),
                TangleToken::XMinus { k, .. } => (k, -1i64),
                _ => continue,
            };
            let a = self.segment_above(i, k);
            let b = self.segment_above(i, k + 1);
            let ups = [a, b].iter().filter(|&&s| !self.seg_down[s]).count();
            let sign = if ups % 2 == 1 { -base } else { base };
            out.push((self.seg_comp[a], self.seg_comp[b], sign));
        }
        out
    }

    /// Self-writhe per component.
    pub fn writhes(&self) -> Vec<i64> {
        let mut out = vec![0i64; self.n_components];
        for (a, b, s) in self.crossings() {
            if a == b {
                out[a] += s;
            }
        }
        out
    }

    /// Linking matrix with the given framings on the diagonal.
    pub fn linking_matrix(&self, framings: &[i64]) -> Result<LinkingMatrix, LinkError> {
        if framings.len() != self.n_components {
            return Err(LinkError::FramingCount {
                expected: self.n_components,
                got: framings.len(),
            });
        }
        let l = self.n_components;
        let mut cross = vec![vec![0i64; l]; l];
        for (a, b, s) in self.crossings() {
            if a != b {
                cross[a][b] += s;
                cross[b][a] += s;
            }
        }
        let mut mat = vec![vec![0i64; l]; l];
        for i in 0..l {
            mat[i][i] = framings[i];
            for j in 0..l {
                if i == j {
                    continue;
                }
                if cross[i][j] % 2 != 0 {
                    return Err(LinkError::OddCrossings { i, j });
                }
                mat[i][j] = cross[i][j] / 2;
            }
        }
        Ok(LinkingMatrix { mat })
    }

    /// Append curl gadgets after each component's first maximum until its
    /// self-writhe equals the target framing.
    pub fn add_framing_curls(&self, targets: &[i64]) -> Result<LinkDiagram, LinkError> {
        if targets.len() != self.n_components {
            return Err(LinkError::FramingCount {
                expected: self.n_components,
                got: targets.len(),
            });
        }
        let writhes = self.writhes();
        let mut tokens = self.tokens.clone();
        // insertion points: index just after the first MAX of each
        // component, recorded before any insertions shift indices
        let mut first_max: Vec<Option<(usize, usize, usize)>> = vec![None; self.n_components];
        for (i, t) in self.tokens.iter().enumerate() {
            if let TangleToken::Max { k, n, .. } = *t {
                let comp = self.seg_comp[self.segment_below(i, k)];
                if first_max[comp].is_none() {
                    first_max[comp] = Some((i, k, n));
                }
            }
        }
        // insert from the bottom up so earlier indices stay valid
        let mut inserts: Vec<(usize, Vec<TangleToken>)> = Vec::new();
        for comp in 0..self.n_components {
            let delta = targets[comp] - writhes[comp];
            if delta == 0 {
                continue;
            }
            let (i, k, n) = first_max[comp].expect("every component has a maximum");
            let mut gadgets = Vec::new();
            for _ in 0..delta.unsigned_abs() {
                gadgets.push(TangleToken::Max {
                    k: k + 1,
                    n: n + 2,
                    rev: false,
                });
                gadgets.push(if delta > 0 {
                    TangleToken::XPlus { k, n: n + 2 }
                } else {
                    TangleToken::XMinus { k, n: n + 2 }
                });
                gadgets.push(TangleToken::Min { k: k + 1, n: n + 2 });
            }
            inserts.push((i + 1, gadgets));
        }
        inserts.sort_by(|a, b| b.0.cmp(&a.0));
        for (at, gadgets) in inserts {
            tokens.splice(at..at, gadgets);
        }
        let out = LinkDiagram::new(tokens)?;
        debug_assert_eq!(out.writhes(), targets);
        Ok(out)
    }

    /// Mirror image: every crossing sign flips.
    pub fn mirror(&self) -> LinkDiagram {
        let tokens = self
            .tokens
            .iter()
            .map(|t| match *t {
                TangleToken::XPlus { k, n } => TangleToken::XMinus { k, n },
                TangleToken::XMinus { k, n } => TangleToken::XPlus { k, n },
                other => other,
            })
            .collect();
        LinkDiagram::new(tokens).expect("mirroring preserves validity")
    }

    /// Reverse the orientation of one component.
    pub fn reverse_component(&self, comp: usize) -> LinkDiagram {
        let mut tokens = self.tokens.clone();
        for (i, t) in self.tokens.iter().enumerate() {
            if let TangleToken::Max { k, n, rev } = *t {
                let c = self.seg_comp[self.segment_below(i, k)];
                if c == comp {
                    // only the first maximum of the component decides, but
                    // flipping the mark everywhere on it is harmless
                    tokens[i] = TangleToken::Max { k, n, rev: !rev };
                }
            }
        }
        LinkDiagram::new(tokens).expect("orientation flip preserves validity")
    }
}

fn locate(levels: &[Vec<usize>], seg: usize) -> (usize, usize) {
    for (t, level) in levels.iter().enumerate() {
        for (p, &s) in level.iter().enumerate() {
            if s == seg {
                return (t, p + 1);
            }
        }
    }
    unreachable!("segment exists")
}

/// Braid word with trace closure.
#[derive(Debug, Clone)]
pub struct BraidWord {
    pub strands: usize,
    /// ±i stands for the i-th generator or its inverse.
    pub word: Vec<i64>,
}

/// Trace closure of a braid as a token stream: nested maxima, the braid
/// letters, nested minima; one maximum per strand.
pub fn from_braid(b: &BraidWord) -> Result<LinkDiagram, LinkError> {
    let s = b.strands;
    assert!(s >= 1);
    let mut tokens = Vec::new();
    for i in 1..=s {
        tokens.push(TangleToken::Max {
            k: i,
            n: 2 * i,
            rev: false,
        });
    }
    for &g in &b.word {
        let i = g.unsigned_abs() as usize;
        if i == 0 || i >= s {
            return Err(LinkError::BadGenerator(g));
        }
        tokens.push(if g > 0 {
            TangleToken::XPlus { k: i, n: 2 * s }
        } else {
            TangleToken::XMinus { k: i, n: 2 * s }
        });
    }
    for i in (1..=s).rev() {
        tokens.push(TangleToken::Min { k: i, n: 2 * i });
    }
    LinkDiagram::new(tokens)
}

/// Symmetric integer matrix with framings on the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkingMatrix {
    pub mat: Vec<Vec<i64>>,
}

impl LinkingMatrix {
    pub fn size(&self) -> usize {
        self.mat.len()
    }

    pub fn det(&self) -> BigInt {
        let n = self.size();
        let mut m: Vec<Vec<BigRational>> = self
            .mat
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| BigRational::from_integer(BigInt::from(x)))
                    .collect()
            })
            .collect();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return BigInt::zero();
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                let f = &m[r][col] / &p;
                for c in col..n {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
        assert!(det.is_integer());
        det.to_integer()
    }

    /// Inertia (σ₊, σ₋, σ₀) by exact symmetric congruence diagonalization.
    pub fn signature_counts(&self) -> (usize, usize, usize) {
        let n = self.size();
        let mut m: Vec<Vec<BigRational>> = self
            .mat
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| BigRational::from_integer(BigInt::from(x)))
                    .collect()
            })
            .collect();
        let mut pos = 0;
        let mut neg = 0;
        let mut zero = 0;
        let mut live: Vec<usize> = (0..n).collect();
        while let Some(&i0) = live.first() {
            // prefer a nonzero diagonal entry
            if let Some(&d) = live.iter().find(|&&i| !m[i][i].is_zero()) {
                let p = m[d][d].clone();
                if p.is_positive() {
                    pos += 1;
                } else {
                    neg += 1;
                }
                live.retain(|&x| x != d);
                for &r in &live {
                    let f = &m[r][d] / &p;
                    for &c in &live {
                        let sub = &f * &m[d][c];
                        m[r][c] -= sub;
                    }
                }
                continue;
            }
            // all-zero diagonal: look for an off-diagonal coupling
            let mut coupled = None;
            'outer: for (a_idx, &a) in live.iter().enumerate() {
                for &b in &live[a_idx + 1..] {
                    if !m[a][b].is_zero() {
                        coupled = Some((a, b));
                        break 'outer;
                    }
                }
            }
            match coupled {
                None => {
                    zero += live.len();
                    break;
                }
                Some((a, b)) => {
                    // congruence e_a += e_b turns the zero diagonal entry
                    // into 2*m[a][b] != 0
                    for c in 0..n {
                        let add = m[b][c].clone();
                        m[a][c] += add;
                    }
                    for r in 0..n {
                        let add = m[r][b].clone();
                        m[r][a] += add;
                    }
                    let _ = i0;
                }
            }
        }
        (pos, neg, zero)
    }
}

/// Parsed input: a diagram plus declared framings.
#[derive(Debug, Clone)]
pub struct LinkInput {
    pub diagram: LinkDiagram,
    pub framings: Vec<i64>,
}

/// Parse the text token format: one token per line (`MAX k n [rev]`,
/// `MIN k n`, `X+ k n`, `X- k n`), optional `framings a b ...` line,
/// `#` comments.
pub fn parse_text(text: &str) -> Result<LinkInput, LinkError> {
    let mut tokens = Vec::new();
    let mut framings: Option<Vec<i64>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| LinkError::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "framings" => {
                let fs: Result<Vec<i64>, _> = parts[1..].iter().map(|p| p.parse()).collect();
                framings = Some(fs.map_err(|_| err("bad framing number"))?);
            }
            kind @ ("MAX" | "MIN" | "X+" | "X-") => {
                if parts.len() < 3 {
                    return Err(err("expected k and n"));
                }
                let k: usize = parts[1].parse().map_err(|_| err("bad k"))?;
                let n: usize = parts[2].parse().map_err(|_| err("bad n"))?;
                let rev = parts.len() > 3 && parts[3] == "rev";
                if rev && kind != "MAX" {
                    return Err(err("rev applies only to MAX"));
                }
                if parts.len() > 4 || (parts.len() == 4 && !rev) {
                    return Err(err("trailing junk"));
                }
                tokens.push(match kind {
                    "MAX" => TangleToken::Max { k, n, rev },
                    "MIN" => TangleToken::Min { k, n },
                    "X+" => TangleToken::XPlus { k, n },
                    _ => TangleToken::XMinus { k, n },
                });
            }
            other => {
                return Err(err(&format!("unknown token {other}")));
            }
        }
    }
    let diagram = LinkDiagram::new(tokens)?;
    let framings = framings.unwrap_or_else(|| vec![0; diagram.n_components()]);
    if framings.len() != diagram.n_components() {
        return Err(LinkError::FramingCount {
            expected: diagram.n_components(),
            got: framings.len(),
        });
    }
    Ok(LinkInput { diagram, framings })
}

/// Parse either the JSON form ({"braid": {"strands": s, "word": [...]}} or
/// {"tokens": ["MAX 1 2", ...]}, plus "framings") or the plain text form.
pub fn parse_input(text: &str) -> Result<LinkInput, LinkError> {
    let trimmed = text.trim_start();
    if !trimmed.starts_with('{') {
        return parse_text(text);
    }
    let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| LinkError::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let badfmt = |msg: &str| LinkError::Parse {
        line: 0,
        msg: msg.to_string(),
    };
    let diagram = if let Some(b) = v.get("braid") {
        let strands = b
            .get("strands")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| badfmt("braid.strands missing"))? as usize;
        let word: Vec<i64> = b
            .get("word")
            .and_then(|x| x.as_array())
            .ok_or_else(|| badfmt("braid.word missing"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| badfmt("braid.word entries must be integers")))
            .collect::<Result<_, _>>()?;
        from_braid(&BraidWord { strands, word })?
    } else if let Some(toks) = v.get("tokens") {
        let lines: Vec<String> = toks
            .as_array()
            .ok_or_else(|| badfmt("tokens must be an array"))?
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| badfmt("tokens entries must be strings"))
            })
            .collect::<Result<_, _>>()?;
        parse_text(&lines.join("\n"))?.diagram
    } else {
        return Err(badfmt("need \"braid\" or \"tokens\""));
    };
    let framings = match v.get("framings") {
        Some(f) => f
            .as_array()
            .ok_or_else(|| badfmt("framings must be an array"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| badfmt("framings must be integers")))
            .collect::<Result<_, _>>()?,
        None => vec![0; diagram.n_components()],
    };
    if framings.len() != diagram.n_components() {
        return Err(LinkError::FramingCount {
            expected: diagram.n_components(),
            got: framings.len(),
        });
    }
    Ok(LinkInput { diagram, framings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(text: &str) -> LinkDiagram {
        parse_text(text).unwrap().diagram
    }

    #[test]
    fn round_unknot() {
        let d = diag("MAX 1 2\nMIN 1 2\n");
        assert_eq!(d.n_components(), 1);
        assert_eq!(d.maxima_counts(), vec![1]);
        assert_eq!(d.writhes(), vec![0]);
    }

    #[test]
    fn hump_has_two_maxima() {
        let d = diag("MAX 1 2\nMAX 2 4\nMIN 1 4\nMIN 1 2\n");
        assert_eq!(d.n_components(), 1);
        assert_eq!(d.maxima_counts(), vec![2]);
    }

    #[test]
    fn braid_closures() {
        let u = from_braid(&BraidWord { strands: 1, word: vec![] }).unwrap();
        assert_eq!(u.n_components(), 1);
        assert_eq!(u.maxima_counts(), vec![1]);

        let curl = from_braid(&BraidWord { strands: 2, word: vec![1] }).unwrap();
        assert_eq!(curl.n_components(), 1);
        assert_eq!(curl.writhes(), vec![1]);
        assert_eq!(curl.maxima_counts(), vec![2]);

        let hopf = from_braid(&BraidWord { strands: 2, word: vec![1, 1] }).unwrap();
        assert_eq!(hopf.n_components(), 2);
        let lm = hopf.linking_matrix(&[5, 7]).unwrap();
        assert_eq!(lm.mat, vec![vec![5, 1], vec![1, 7]]);

        let neg_hopf = from_braid(&BraidWord { strands: 2, word: vec![-1, -1] }).unwrap();
        let lm2 = neg_hopf.linking_matrix(&[0, 0]).unwrap();
        assert_eq!(lm2.mat, vec![vec![0, -1], vec![-1, 0]]);
    }

    #[test]
    fn split_unknots() {
        let d = diag("MAX 1 2\nMIN 1 2\nMAX 1 2\nMIN 1 2\n");
        assert_eq!(d.n_components(), 2);
        let lm = d.linking_matrix(&[3, -4]).unwrap();
        assert_eq!(lm.mat, vec![vec![3, 0], vec![0, -4]]);
        assert_eq!(lm.det(), BigInt::from(-12));
    }

    #[test]
    fn validation_errors() {
        assert!(parse_text("MIN 1 2\n").is_err());
        assert!(parse_text("MAX 1 2\n").is_err());
        assert!(parse_text("MAX 1 2\nX+ 1 4\nMIN 1 2\n").is_err());
        assert!(parse_text("MAX 0 2\n").is_err());
        assert!(parse_text("WAT 1 2\n").is_err());
        assert!(parse_text("MAX 1 2\nMIN 1 2\nframings 1 2\n").is_err());
    }

    #[test]
    fn signatures() {
        let m = |rows: Vec<Vec<i64>>| LinkingMatrix { mat: rows };
        assert_eq!(m(vec![vec![1]]).signature_counts(), (1, 0, 0));
        assert_eq!(m(vec![vec![0, 1], vec![1, 0]]).signature_counts(), (1, 1, 0));
        assert_eq!(
            m(vec![vec![2, 0, 0], vec![0, -3, 0], vec![0, 0, 0]]).signature_counts(),
            (1, 1, 1)
        );
        assert_eq!(m(vec![vec![5, 1], vec![1, 7]]).signature_counts(), (2, 0, 0));
        assert_eq!(m(vec![vec![0]]).signature_counts(), (0, 0, 1));
    }

    #[test]
    fn framing_curls_hit_targets() {
        let u = diag("MAX 1 2\nMIN 1 2\n");
        let plus = u.add_framing_curls(&[1]).unwrap();
        assert_eq!(plus.writhes(), vec![1]);
        assert_eq!(plus.maxima_counts(), vec![2]);
        let minus2 = u.add_framing_curls(&[-2]).unwrap();
        assert_eq!(minus2.writhes(), vec![-2]);
        assert_eq!(minus2.maxima_counts(), vec![3]);
        let same = u.add_framing_curls(&[0]).unwrap();
        assert_eq!(same.tokens().len(), 2);
        // also on a multi-component diagram
        let hopf = from_braid(&BraidWord { strands: 2, word: vec![1, 1] }).unwrap();
        let framed = hopf.add_framing_curls(&[2, -1]).unwrap();
        assert_eq!(framed.writhes(), vec![2, -1]);
        assert_eq!(
            framed.linking_matrix(&[2, -1]).unwrap().mat,
            vec![vec![2, 1], vec![1, -1]]
        );
    }

    #[test]
    fn mirror_flips_signs() {
        let hopf = from_braid(&BraidWord { strands: 2, word: vec![1, 1] }).unwrap();
        let m = hopf.mirror();
        assert_eq!(m.linking_matrix(&[0, 0]).unwrap().mat, vec![vec![0, -1], vec![-1, 0]]);
    }

    #[test]
    fn json_input_forms() {
        let j = r#"{"braid": {"strands": 2, "word": [1, 1]}, "framings": [2, 3]}"#;
        let inp = parse_input(j).unwrap();
        assert_eq!(inp.framings, vec![2, 3]);
        assert_eq!(inp.diagram.n_components(), 2);
        let j2 = r#"{"tokens": ["MAX 1 2", "MIN 1 2"]}"#;
        let inp2 = parse_input(j2).unwrap();
        assert_eq!(inp2.framings, vec![0]);
        assert!(parse_input("{\"nope\": 1}").is_err());
    }

    #[test]
    fn reverse_component_keeps_writhe() {
        let curl = from_braid(&BraidWord { strands: 2, word: vec![1] }).unwrap();
        let r = curl.reverse_component(0);
        assert_eq!(r.writhes(), vec![1]);
        let hopf = from_braid(&BraidWord { strands: 2, word: vec![1, 1] }).unwrap();
        let r0 = hopf.reverse_component(0);
        assert_eq!(r0.linking_matrix(&[0, 0]).unwrap().mat, vec![vec![0, -1], vec![-1, 0]]);
    }
}
