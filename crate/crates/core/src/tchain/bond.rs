use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::site::{Configuration, Head, Levels, SiteState};
use crate::error::{Error, Result};
use crate::globalprog::g_gate;
use crate::numkit::{SparseOperator, TripletBuilder};
use crate::statevec::{swap, Gate2};

/// Largest full-ring dimension [`build_ht`] will assemble.
pub const FULL_SPACE_CAP: usize = 1_000_000;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Gate carried by command bit `r`: `G` for `0`, `SWAP` for `1`.
pub fn command_gate(r: u8) -> Gate2 {
    if r == 0 {
        g_gate()
    } else {
        swap()
    }
}

/// Forward half `F` of the bond term `h = F + F†`, as `(left', right', amplitude)`
/// images of the basis pair `(left, right)`.
pub fn forward(left: SiteState, right: SiteState, levels: Levels) -> Vec<(SiteState, SiteState, C64)> {
    use SiteState::{Sp, M};
    let ext = levels == Levels::Extended;
    let none = Head::None;
    let free = |s: SiteState| matches!(s, Sp { head: Head::None, .. });
    let mut out = Vec::new();
    match (left, right) {
        // read-head propagation, toggling the activity bit; the marker only accepts a
        // head arriving inactive
        (Sp { head: Head::Active { a: a @ 0..=1, r }, .. }, right)
            if !left.is_marker() && free(right) && !(right.is_marker() && a == 0) =>
        {
            let head = Head::Active { a: 1 - a, r };
            match (a, left.bit(), right.bit()) {
                (1, Some(ql), Some(qr)) => {
                    let u = command_gate(r);
                    let col = (ql * 2 + qr) as usize;
                    for (row, urow) in u.iter().enumerate() {
                        let amp = urow[col];
                        if amp != C64::new(0.0, 0.0) {
                            let l2 = SiteState::data((row >> 1) as u8);
                            let r2 = SiteState::data((row & 1) as u8).with_head(head);
                            out.push((l2, r2, amp));
                        }
                    }
                }
                _ => out.push((left.with_head(none), right.with_head(head), one())),
            }
        }
        // emission of the command held by the marker
        (Sp { q: 2, l: 0, head: Head::Active { a: 1, r } }, right) if free(right) => {
            out.push((SiteState::MARKER, right.with_head(Head::Active { a: 0, r }), one()));
        }
        (Sp { q: 2, l: 0, head: Head::Active { a: 0, r: x } }, right) if free(right) => {
            let restored = SiteState::program(x + 1);
            if let Some(y) = right.command() {
                out.push((restored, SiteState::MARKER.with_head(Head::Active { a: 1, r: y }), one()));
            } else if right.is_skip() {
                out.push((restored, M, one()));
            } else if ext && right.is_data() {
                out.push((restored, right.with_head(Head::Active { a: 2, r: x }), one()));
            }
        }
        (M, right) if free(right) => {
            if let Some(y) = right.command() {
                out.push((SiteState::SKIP, SiteState::MARKER.with_head(Head::Active { a: 1, r: y }), one()));
            } else if right.is_skip() {
                out.push((SiteState::SKIP, M, one()));
            } else if ext && right.is_data() {
                out.push((SiteState::SKIP, right.with_head(Head::Active { a: 2, r: 0 }), one()));
            }
        }
        (Sp { head: Head::First, .. }, right) if ext && free(right) && !right.is_marker() => {
            if left.is_data() && right.is_skip() {
                out.push((left.with_head(none), M, one()));
            } else if !(left.is_data() && right.is_program()) {
                out.push((left.with_head(none), right.with_head(Head::First), one()));
            }
        }
        (Sp { head: Head::Active { a: 2, .. }, .. }, right)
            if ext && left.is_data() && right.is_data() && free(right) =>
        {
            out.push((left.with_head(none), right.with_head(left.head()), one()));
        }
        _ => {}
    }
    out
}

/// The two-site term `h = F + F†` as a column-indexed table on one bond.
#[derive(Clone, Debug)]
pub struct BondTable {
    levels: Levels,
    columns: BTreeMap<(usize, usize), Vec<(usize, usize, C64)>>,
}

impl BondTable {
    pub fn new(levels: Levels) -> Self {
        let d = levels.dim();
        let sites: Vec<SiteState> = (0..d).map(|i| SiteState::from_index(i, levels).unwrap()).collect();
        let mut acc: BTreeMap<((usize, usize), (usize, usize)), C64> = BTreeMap::new();
        for &l in &sites {
            for &r in &sites {
                let col = (l.index(levels).unwrap(), r.index(levels).unwrap());
                for (l2, r2, amp) in forward(l, r, levels) {
                    let row = (l2.index(levels).unwrap(), r2.index(levels).unwrap());
                    *acc.entry((row, col)).or_default() += amp;
                    *acc.entry((col, row)).or_default() += amp.conj();
                }
            }
        }
        let mut columns: BTreeMap<(usize, usize), Vec<(usize, usize, C64)>> = BTreeMap::new();
        for ((row, col), v) in acc {
            if v.norm() > 0.0 {
                columns.entry(col).or_default().push((row.0, row.1, v));
            }
        }
        Self { levels, columns }
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    /// Nonzero entries `(row_left, row_right, value)` in the column `(left, right)`.
    pub fn column(&self, left: usize, right: usize) -> &[(usize, usize, C64)] {
        self.columns.get(&(left, right)).map_or(&[], Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.columns.values().map(Vec::len).sum()
    }

    /// Images of a site pair under `h`.
    pub fn apply_pair(&self, left: SiteState, right: SiteState) -> Result<Vec<(SiteState, SiteState, C64)>> {
        let col = (left.index(self.levels)?, right.index(self.levels)?);
        self.column(col.0, col.1)
            .iter()
            .map(|&(a, b, v)| Ok((SiteState::from_index(a, self.levels)?, SiteState::from_index(b, self.levels)?, v)))
            .collect()
    }

    /// Dense `d² × d²` matrix of the bond term, left site most significant.
    pub fn to_operator(&self) -> Result<SparseOperator> {
        let d = self.levels.dim();
        let mut b = TripletBuilder::new(d * d);
        for (&(l, r), entries) in &self.columns {
            for &(l2, r2, v) in entries {
                b.push(l2 * d + r2, l * d + r, v);
            }
        }
        b.build_hermitian()
    }
}

/// `H_T = Σ_i h_{i,i+1}` on a ring of `m` sites, indices taken modulo `m`.
pub fn build_ht(m: usize, levels: Levels) -> Result<SparseOperator> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("ring needs at least 2 sites, got {m}")));
    }
    let d = levels.dim();
    let dim = d.checked_pow(m as u32).filter(|&n| n <= FULL_SPACE_CAP).ok_or(Error::SizeCap {
        what: "transition ring",
        size: d.saturating_pow(m as u32),
        cap: FULL_SPACE_CAP,
    })?;
    let table = BondTable::new(levels);
    let weight = |k: usize| d.pow((m - 1 - k) as u32);
    let mut builder = TripletBuilder::with_capacity(dim, m * table.nnz() * d.pow(m as u32 - 2));
    for i in 0..m {
        let j = (i + 1) % m;
        let (wi, wj) = (weight(i), weight(j));
        let others: Vec<usize> = (0..m).filter(|&k| k != i && k != j).collect();
        for rest in 0..d.pow(others.len() as u32) {
            let mut base = 0;
            let mut x = rest;
            for &k in others.iter().rev() {
                base += (x % d) * weight(k);
                x /= d;
            }
            for (&(l, r), entries) in &table.columns {
                let col = base + l * wi + r * wj;
                for &(l2, r2, v) in entries {
                    builder.push(base + l2 * wi + r2 * wj, col, v);
                }
            }
        }
    }
    builder.build_hermitian()
}

/// Basis permutation of the cyclic shift `site k -> site k+1`.
pub fn ring_shift_permutation(m: usize, levels: Levels) -> Result<Vec<usize>> {
    let d = levels.dim();
    let dim = d.pow(m as u32);
    (0..dim)
        .map(|idx| {
            let mut c = Configuration::from_index(idx, m, levels)?;
            c.0.rotate_right(1);
            c.index(levels)
        })
        .collect()
}

/// `max |H − P H P†|` for the cyclic shift `P`.
pub fn translation_defect(ht: &SparseOperator, m: usize, levels: Levels) -> Result<f64> {
    let perm = ring_shift_permutation(m, levels)?;
    ht.max_abs_diff(&ht.permuted(&perm)?)
}

/// Checks every nonzero matrix element couples configurations differing on a subset of
/// one adjacent ring pair. Returns the number of off-diagonal entries inspected.
pub fn check_two_body_support(ht: &SparseOperator, m: usize, levels: Levels) -> Result<usize> {
    let mut seen = 0;
    for (r, c, _) in ht.triplets() {
        let a = Configuration::from_index(r, m, levels)?;
        let b = Configuration::from_index(c, m, levels)?;
        let diff: Vec<usize> = (0..m).filter(|&k| a.0[k] != b.0[k]).collect();
        let local = match diff.as_slice() {
            [] | [_] => true,
            [x, y] => (x + 1) % m == *y || (y + 1) % m == *x,
            _ => false,
        };
        if !local {
            return Err(Error::InvalidConfiguration(format!("entry couples {a} to {b}")));
        }
        seen += usize::from(r != c);
    }
    Ok(seen)
}
