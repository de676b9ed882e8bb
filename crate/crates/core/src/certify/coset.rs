//! Todd–Coxeter coset enumeration, HLT strategy with lookahead.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::presentation::FpPresentation;
use crate::word::Word;

use super::Budget;

const NONE: u32 = u32::MAX;

/// Definitions allowed over the whole run, as a multiple of `max_cosets`.
const DEFINITION_FACTOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetEnumeration {
    pub index: usize,
    /// Largest number of simultaneously live cosets.
    pub cosets_defined: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CosetError {
    #[error("coset enumeration exceeded {max_cosets} cosets")]
    Exceeded { max_cosets: usize, cosets_defined: usize },
}

struct Table {
    cols: usize,
    data: Vec<u32>,
    parent: Vec<u32>,
    live: usize,
    peak: usize,
    queue: VecDeque<u32>,
}

impl Table {
    fn len(&self) -> usize {
        self.parent.len()
    }

    fn get(&self, c: u32, x: usize) -> u32 {
        self.data[c as usize * self.cols + x]
    }

    fn set(&mut self, c: u32, x: usize, v: u32) {
        self.data[c as usize * self.cols + x] = v;
    }

    fn alive(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn new_coset(&mut self) -> u32 {
        let c = self.len() as u32;
        self.parent.push(c);
        self.data.extend(std::iter::repeat_n(NONE, self.cols));
        self.live += 1;
        self.peak = self.peak.max(self.live);
        c
    }

    fn define(&mut self, c: u32, x: usize) -> u32 {
        let d = self.new_coset();
        self.set(c, x, d);
        self.set(d, x ^ 1, c);
        d
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut r = c;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut k = c;
        while self.parent[k as usize] != r {
            let next = self.parent[k as usize];
            self.parent[k as usize] = r;
            k = next;
        }
        r
    }

    fn merge(&mut self, a: u32, b: u32) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.parent[hi as usize] = lo;
        self.live -= 1;
        self.queue.push_back(hi);
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        self.merge(a, b);
        while let Some(g) = self.queue.pop_front() {
            for x in 0..self.cols {
                let d = self.get(g, x);
                if d == NONE {
                    continue;
                }
                self.set(d, x ^ 1, NONE);
                let mu = self.rep(g);
                let nu = self.rep(d);
                let m_x = self.get(mu, x);
                if m_x != NONE {
                    self.merge(nu, m_x);
                } else {
                    let n_xi = self.get(nu, x ^ 1);
                    if n_xi != NONE {
                        self.merge(mu, n_xi);
                    } else {
                        self.set(mu, x, nu);
                        self.set(nu, x ^ 1, mu);
                    }
                }
            }
        }
    }

    /// Scans `w` at `a`; fills gaps by defining cosets when `fill` is set.
    /// Returns false when a definition was needed but not allowed.
    fn scan(&mut self, a: u32, w: &[usize], fill: bool) -> bool {
        if w.is_empty() {
            return true;
        }
        let (mut f, mut b) = (a, a);
        let (mut i, mut j) = (0usize, w.len() as isize - 1);
        loop {
            while i < w.len() && self.get(f, w[i]) != NONE {
                f = self.get(f, w[i]);
                i += 1;
            }
            if i == w.len() {
                if f != a {
                    self.coincidence(f, a);
                }
                return true;
            }
            while j >= i as isize && self.get(b, w[j as usize] ^ 1) != NONE {
                b = self.get(b, w[j as usize] ^ 1);
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return true;
            } else if j == i as isize {
                self.set(f, w[i], b);
                self.set(b, w[i] ^ 1, f);
                return true;
            } else if !fill {
                return false;
            } else {
                self.define(f, w[i]);
            }
        }
    }

    /// Drops dead rows, renumbering live cosets in order. Returns the new
    /// number of the coset `keep`, or of the first live coset after it.
    fn compact(&mut self, keep: u32) -> u32 {
        let n = self.len();
        let mut map = vec![NONE; n];
        let mut next = 0u32;
        let mut keep_new = None;
        for c in 0..n as u32 {
            if c >= keep && keep_new.is_none() && self.alive(c) {
                keep_new = Some(next);
            }
            if self.alive(c) {
                map[c as usize] = next;
                next += 1;
            }
        }
        let mut data = Vec::with_capacity(next as usize * self.cols);
        for c in 0..n as u32 {
            if !self.alive(c) {
                continue;
            }
            for x in 0..self.cols {
                let v = self.get(c, x);
                data.push(if v == NONE { NONE } else { map[self.rep_const(v) as usize] });
            }
        }
        self.data = data;
        self.parent = (0..next).collect();
        keep_new.unwrap_or(next)
    }

    fn rep_const(&self, c: u32) -> u32 {
        let mut r = c;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        r
    }
}

fn encode(w: &Word, p: &FpPresentation) -> Vec<usize> {
    w.letters()
        .iter()
        .map(|l| {
            let g = p.generators().iter().position(|x| *x == l.gen).expect("letter is a generator");
            2 * g + usize::from(l.inverse)
        })
        .collect()
}

/// Index of the subgroup generated by `subgroup` in the group of `p`
/// (meridional tier ignored). Exceeding the coset budget is not evidence of
/// infinite index.
pub fn todd_coxeter(p: &FpPresentation, subgroup: &[Word], budget: &Budget) -> Result<CosetEnumeration, CosetError> {
    let cols = 2 * p.generators().len();
    let mut rels: Vec<Vec<usize>> = p.relators().iter().map(|r| encode(&r.cyclically_reduced(), p)).collect();
    rels.retain(|r| !r.is_empty());
    rels.sort_by_key(|r| r.len());
    let subs: Vec<Vec<usize>> = subgroup.iter().map(|w| encode(w, p)).collect();
    let mut t = Table { cols, data: Vec::new(), parent: Vec::new(), live: 0, peak: 0, queue: VecDeque::new() };
    t.new_coset();
    if cols == 0 {
        return Ok(CosetEnumeration { index: 1, cosets_defined: 1 });
    }
    let max = budget.max_cosets;
    let exceeded = |t: &Table| CosetError::Exceeded { max_cosets: max, cosets_defined: t.peak };
    for s in &subs {
        if t.live >= max {
            return Err(exceeded(&t));
        }
        t.scan(0, s, true);
    }
    let mut definitions = 0usize;
    let mut a: u32 = 0;
    while (a as usize) < t.len() {
        if t.alive(a) {
            for r in &rels {
                if !t.alive(a) {
                    break;
                }
                if t.live + r.len() >= max {
                    // Lookahead: scan everything without defining, then compact.
                    for b in 0..t.len() as u32 {
                        for r2 in &rels {
                            if !t.alive(b) {
                                break;
                            }
                            t.scan(b, r2, false);
                        }
                    }
                    a = t.compact(a);
                    if t.live + r.len() >= max {
                        return Err(exceeded(&t));
                    }
                    if (a as usize) >= t.len() || !t.alive(a) {
                        break;
                    }
                }
                let before = t.len();
                t.scan(a, r, true);
                definitions += t.len() - before;
                if definitions > max.saturating_mul(DEFINITION_FACTOR) {
                    return Err(exceeded(&t));
                }
            }
            if (a as usize) < t.len() && t.alive(a) {
                for x in 0..cols {
                    if t.get(a, x) == NONE {
                        if t.live >= max {
                            return Err(exceeded(&t));
                        }
                        t.define(a, x);
                        definitions += 1;
                    }
                }
            }
        }
        a += 1;
    }
    Ok(CosetEnumeration { index: t.live, cosets_defined: t.peak })
}
