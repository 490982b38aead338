use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Exponent tuple of a monomial, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    exponents: Vec<u32>,
    order: usize,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let order = exponents.iter().map(|&e| e as usize).sum();
        Self { exponents, order }
    }

    /// `k e_axis` in `dim` coordinates.
    pub fn pure(dim: usize, axis: usize, k: u32) -> Self {
        let mut exponents = vec![0; dim];
        exponents[axis] = k;
        Self::new(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// `alpha! = prod alpha_i!`
    pub fn factorial(&self) -> f64 {
        self.exponents
            .iter()
            .map(|&e| (1..=e).fold(1.0, |acc, i| acc * i as f64))
            .product()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(exponents: Vec<u32>) -> Self {
        Self::new(exponents)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.exponents
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NONE: u32 = u32::MAX;

// Pair tables beyond this many entries are not materialised; products then
// walk the successor table instead.
const PAIR_TABLE_LIMIT: usize = 4_000_000;

type BasisCache = Mutex<HashMap<(usize, usize), Arc<MonomialBasis>>>;

/// All multi-indices of order `<= degree` in `dim` variables, in graded-lex order.
#[derive(Debug)]
pub struct MonomialBasis {
    dim: usize,
    degree: usize,
    monomials: Vec<MultiIndex>,
    // order_start[k] = index of the first monomial of order k; order_start[degree + 1] = len.
    order_start: Vec<usize>,
    successors: Vec<u32>,
    lookup: HashMap<Vec<u32>, usize>,
    pairs: OnceLock<Option<PairTable>>,
}

#[derive(Debug)]
struct PairTable {
    offsets: Vec<usize>,
    entries: Vec<u32>,
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if parts == 1 {
        prefix.push(total);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim >= 1, "monomial basis needs at least one variable");
        let mut monomials = Vec::new();
        let mut order_start = Vec::with_capacity(degree + 2);
        for k in 0..=degree {
            order_start.push(monomials.len());
            compositions(k as u32, dim, &mut Vec::with_capacity(dim), &mut monomials);
        }
        order_start.push(monomials.len());
        let lookup: HashMap<Vec<u32>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.exponents.clone(), i))
            .collect();
        let mut successors = vec![NONE; monomials.len() * dim];
        for (i, m) in monomials.iter().enumerate() {
            if m.order == degree {
                continue;
            }
            for axis in 0..dim {
                let mut e = m.exponents.clone();
                e[axis] += 1;
                successors[i * dim + axis] = lookup[&e] as u32;
            }
        }
        Self {
            dim,
            degree,
            monomials,
            order_start,
            successors,
            lookup,
            pairs: OnceLock::new(),
        }
    }

    /// Process-wide cached basis for `(dim, degree)`.
    pub fn shared(dim: usize, degree: usize) -> Arc<MonomialBasis> {
        static CACHE: OnceLock<BasisCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(b) = cache
            .lock()
            .expect("basis cache poisoned")
            .get(&(dim, degree))
        {
            return b.clone();
        }
        let built = Arc::new(MonomialBasis::new(dim, degree));
        cache
            .lock()
            .expect("basis cache poisoned")
            .entry((dim, degree))
            .or_insert(built)
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.monomials.iter()
    }

    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monomials[i]
    }

    pub fn order_at(&self, i: usize) -> usize {
        self.monomials[i].order
    }

    pub fn exponent(&self, i: usize, axis: usize) -> u32 {
        self.monomials[i].exponents[axis]
    }

    /// Number of monomials of order `<= k`.
    pub fn count_up_to(&self, k: usize) -> usize {
        self.order_start[k.min(self.degree) + 1]
    }

    /// Index range of the monomials of exactly order `k`.
    pub fn order_range(&self, k: usize) -> std::ops::Range<usize> {
        self.order_start[k]..self.order_start[k + 1]
    }

    pub fn index_of(&self, exponents: &[u32]) -> Option<usize> {
        self.lookup.get(exponents).copied()
    }

    /// Index of `alpha_i + e_axis`, if still within the degree.
    pub fn successor(&self, i: usize, axis: usize) -> Option<usize> {
        match self.successors[i * self.dim + axis] {
            NONE => None,
            s => Some(s as usize),
        }
    }

    /// Index of `alpha_i + alpha_j`; the caller guarantees the order fits.
    pub fn sum_index(&self, i: usize, j: usize) -> usize {
        if let Some(table) = self.pair_table() {
            return table.entries[table.offsets[i] + j] as usize;
        }
        self.walk_sum(i, j)
    }

    fn walk_sum(&self, i: usize, j: usize) -> usize {
        let mut idx = i;
        for (axis, &e) in self.monomials[j].exponents.iter().enumerate() {
            for _ in 0..e {
                idx = self.successors[idx * self.dim + axis] as usize;
            }
        }
        idx
    }

    fn pair_table(&self) -> Option<&PairTable> {
        self.pairs
            .get_or_init(|| {
                let total: usize = (0..self.len())
                    .map(|i| self.count_up_to(self.degree - self.order_at(i)))
                    .sum();
                if total > PAIR_TABLE_LIMIT {
                    return None;
                }
                let mut offsets = Vec::with_capacity(self.len());
                let mut entries = Vec::with_capacity(total);
                for i in 0..self.len() {
                    offsets.push(entries.len());
                    let limit = self.count_up_to(self.degree - self.order_at(i));
                    entries.extend((0..limit).map(|j| self.walk_sum(i, j) as u32));
                }
                Some(PairTable { offsets, entries })
            })
            .as_ref()
    }
}
