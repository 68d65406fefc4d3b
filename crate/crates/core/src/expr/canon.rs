//! Canonical renaming of summation indices.
//!
//! Dummies that touch a letter are numbered by their first occurrence in the
//! tensor factors, left to right. The remaining dummies live in closed scalar
//! sub-networks; those are numbered by a search that repeatedly takes the
//! smallest atom still carrying an unnumbered index, branching on ties and
//! keeping the lexicographically smallest outcome. The result does not depend
//! on the incoming dummy names.

use std::collections::HashMap;

use super::{Index, ScalarAtom, ScalarKind, Term};
use crate::coeff::Coeff;

/// Node budget for the tie-breaking search; past it the first branch wins.
const SEARCH_BUDGET: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Value(u32),
    Free(u32),
    Known(u32),
    Unknown,
}

fn is_symmetric(kind: ScalarKind, sym: bool) -> bool {
    match kind {
        ScalarKind::Delta => true,
        ScalarKind::FormE | ScalarKind::FormEInv => sym,
        ScalarKind::DerMat(_) => false,
    }
}

struct Search<'a> {
    scalars: &'a [ScalarAtom],
    sym: bool,
    nodes: usize,
    best: Option<(Vec<ScalarAtom>, bool)>,
}

impl Search<'_> {
    fn key(&self, ix: Index, map: &HashMap<u32, u32>) -> Key {
        match ix {
            Index::Value(v) => Key::Value(v),
            Index::Free(f) => Key::Free(f),
            Index::Dummy(d) => map.get(&d).map_or(Key::Unknown, |&n| Key::Known(n)),
        }
    }

    fn atom_key(&self, a: &ScalarAtom, map: &HashMap<u32, u32>) -> (ScalarKind, Key, Key) {
        let (r, c) = (self.key(a.row, map), self.key(a.col, map));
        if is_symmetric(a.kind, self.sym) && c < r {
            (a.kind, c, r)
        } else {
            (a.kind, r, c)
        }
    }

    fn run(&mut self, map: HashMap<u32, u32>, next: u32) {
        self.nodes += 1;
        let pending: Vec<usize> = (0..self.scalars.len())
            .filter(|&k| {
                let a = &self.scalars[k];
                self.key(a.row, &map) == Key::Unknown || self.key(a.col, &map) == Key::Unknown
            })
            .collect();
        if pending.is_empty() {
            self.finish(&map);
            return;
        }
        let min = pending
            .iter()
            .map(|&k| self.atom_key(&self.scalars[k], &map))
            .min()
            .unwrap();
        let ties: Vec<usize> = pending
            .into_iter()
            .filter(|&k| self.atom_key(&self.scalars[k], &map) == min)
            .collect();
        for k in ties {
            let a = self.scalars[k];
            let mut orders = vec![[a.row, a.col]];
            if is_symmetric(a.kind, self.sym)
                && a.row != a.col
                && self.key(a.row, &map) == Key::Unknown
                && self.key(a.col, &map) == Key::Unknown
            {
                orders.push([a.col, a.row]);
            }
            for order in orders {
                if self.best.is_some() && self.nodes > SEARCH_BUDGET {
                    return;
                }
                let mut m = map.clone();
                let mut n = next;
                for ix in order {
                    if let Index::Dummy(d) = ix {
                        m.entry(d).or_insert_with(|| {
                            n += 1;
                            n - 1
                        });
                    }
                }
                self.run(m, n);
            }
        }
    }

    fn finish(&mut self, map: &HashMap<u32, u32>) {
        let rename = |ix: Index| match ix {
            Index::Dummy(d) => Index::Dummy(map[&d]),
            other => other,
        };
        let mut flips = false;
        let mut out: Vec<ScalarAtom> = self
            .scalars
            .iter()
            .map(|a| {
                let (mut row, mut col) = (rename(a.row), rename(a.col));
                if is_symmetric(a.kind, self.sym) && col < row {
                    std::mem::swap(&mut row, &mut col);
                    if a.kind != ScalarKind::Delta {
                        flips = !flips;
                    }
                }
                ScalarAtom::new(a.kind, row, col)
            })
            .collect();
        out.sort();
        match &self.best {
            Some((b, _)) if *b <= out => {}
            _ => self.best = Some((out, flips)),
        }
    }
}

/// Renames dummies canonically and sorts the scalar atoms.
///
/// With `flip = Some(s)`, `E`/`Einv` atoms are treated as symmetric up to the
/// factor `s` (the sign symbol or its bound value), which is multiplied into
/// the coefficient once per transposed atom.
pub(crate) fn canonicalize(mut t: Term, flip: Option<&Coeff>) -> Term {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut next = 0;
    for l in t.factors.iter().flatten() {
        for ix in [l.row, l.col] {
            if let Index::Dummy(d) = ix {
                map.entry(d).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
            }
        }
    }
    let mut search = Search {
        scalars: &t.scalars,
        sym: flip.is_some(),
        nodes: 0,
        best: None,
    };
    search.run(map.clone(), next);
    let (scalars, flipped) = search.best.expect("search always finishes at least once");

    for l in t.factors.iter_mut().flatten() {
        for ix in [&mut l.row, &mut l.col] {
            if let Index::Dummy(d) = ix {
                *d = map[d];
            }
        }
    }
    t.scalars = scalars;
    if flipped {
        t.coeff = &t.coeff * flip.expect("flips only happen in symmetric mode");
    }
    t
}
