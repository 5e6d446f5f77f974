//! Finite abelian groups given by cyclic factors, with subgroups, cosets, characters
//! and alternating bicharacters.
//!
//! Elements are encoded as integers `a_1 + m_1 a_2 + m_1 m_2 a_3 + ...` for the residue
//! vector `(a_1, ..., a_r)`. This encoding is the canonical element order used for every
//! tie-break (transversals, canonical characters, symplectic pairs).

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gcd, lcm};

/// Encoded group element.
pub type Elem = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct FinAbGroup {
    factors: Vec<u32>,
    strides: Vec<usize>,
    order: usize,
}

impl TryFrom<Vec<u32>> for FinAbGroup {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        FinAbGroup::new(&v)
    }
}

impl From<FinAbGroup> for Vec<u32> {
    fn from(g: FinAbGroup) -> Vec<u32> {
        g.factors
    }
}

impl FinAbGroup {
    /// `Z_{m_1} x ... x Z_{m_r}`; the factors need not form a divisibility chain.
    pub fn new(factors: &[u32]) -> Result<Self> {
        if let Some(&m) = factors.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidParameter(format!("cyclic factor {m} must be at least 2")));
        }
        let mut strides = Vec::with_capacity(factors.len());
        let mut order = 1usize;
        for &m in factors {
            strides.push(order);
            order = order.checked_mul(m as usize).ok_or_else(|| Error::InvalidParameter("group too large".into()))?;
        }
        Ok(FinAbGroup { factors: factors.to_vec(), strides, order })
    }

    pub fn trivial() -> Self {
        FinAbGroup { factors: Vec::new(), strides: Vec::new(), order: 1 }
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Least common multiple of the element orders (1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &m| lcm(acc, m as u64))
    }

    /// Invariant factors `d_1 | d_2 | ... | d_k` of the group.
    pub fn invariant_factors(&self) -> Vec<u32> {
        let mut by_prime: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
        for &m in &self.factors {
            let mut m = m;
            let mut q = 2;
            while m > 1 {
                if m % q == 0 {
                    let mut pk = 1;
                    while m % q == 0 {
                        m /= q;
                        pk *= q;
                    }
                    by_prime.entry(q).or_default().push(pk);
                }
                q += 1;
            }
        }
        let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![1u32; len];
        for powers in by_prime.values_mut() {
            powers.sort_unstable();
            let off = len - powers.len();
            for (i, &pk) in powers.iter().enumerate() {
                out[off + i] *= pk;
            }
        }
        out
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order
    }

    pub fn coords(&self, a: Elem) -> Vec<u32> {
        self.factors.iter().zip(&self.strides).map(|(&m, &s)| ((a / s) % m as usize) as u32).collect()
    }

    pub fn from_coords(&self, c: &[i64]) -> Result<Elem> {
        if c.len() != self.factors.len() {
            return Err(Error::InvalidParameter(format!(
                "element {c:?} has {} coordinates, group has {} factors",
                c.len(),
                self.factors.len()
            )));
        }
        Ok(self
            .factors
            .iter()
            .zip(&self.strides)
            .zip(c)
            .map(|((&m, &s), &x)| x.rem_euclid(m as i64) as usize * s)
            .sum())
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let mut out = 0;
        for (&m, &s) in self.factors.iter().zip(&self.strides) {
            let m = m as usize;
            out += ((a / s % m + b / s % m) % m) * s;
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let mut out = 0;
        for (&m, &s) in self.factors.iter().zip(&self.strides) {
            let m = m as usize;
            out += ((m - a / s % m) % m) * s;
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    /// `k * a` (the `k`-th power in multiplicative notation).
    pub fn times(&self, k: i64, a: Elem) -> Elem {
        let mut out = 0;
        for (&m, &s) in self.factors.iter().zip(&self.strides) {
            let x = (a / s % m as usize) as i64;
            out += ((k * x).rem_euclid(m as i64) as usize) * s;
        }
        out
    }

    pub fn elem_order(&self, a: Elem) -> u64 {
        self.coords(a).iter().zip(&self.factors).fold(1, |acc, (&x, &m)| lcm(acc, m as u64 / gcd(x as u64, m as u64)))
    }

    pub fn is_elementary_two(&self) -> bool {
        self.factors.iter().all(|&m| m == 2)
    }

    pub fn fmt_elem(&self, a: Elem) -> String {
        format!("{:?}", self.coords(a))
    }
}

/// Subgroup stored by explicit sorted enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub parent: FinAbGroup,
    elements: Vec<Elem>,
    pos: Vec<usize>,
    gens: Vec<Elem>,
}

impl Subgroup {
    pub fn from_generators(parent: &FinAbGroup, gens: &[Elem]) -> Result<Self> {
        if let Some(&g) = gens.iter().find(|&&g| g >= parent.order()) {
            return Err(Error::InvalidParameter(format!("generator {g} outside the group")));
        }
        let mut seen = vec![false; parent.order()];
        seen[0] = true;
        let mut elements = vec![0];
        let mut i = 0;
        while i < elements.len() {
            let x = elements[i];
            for &g in gens {
                let y = parent.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    elements.push(y);
                }
            }
            i += 1;
        }
        Ok(Self::from_members(parent, seen))
    }

    pub fn trivial(parent: &FinAbGroup) -> Self {
        Self::from_generators(parent, &[]).expect("trivial subgroup")
    }

    pub fn whole(parent: &FinAbGroup) -> Self {
        let gens: Vec<Elem> = parent.elements().collect();
        Self::from_generators(parent, &gens).expect("whole group")
    }

    fn from_members(parent: &FinAbGroup, member: Vec<bool>) -> Self {
        let elements: Vec<Elem> = (0..parent.order()).filter(|&x| member[x]).collect();
        let mut pos = vec![usize::MAX; parent.order()];
        for (i, &x) in elements.iter().enumerate() {
            pos[x] = i;
        }
        // Greedy generating set in canonical order.
        let mut gens = Vec::new();
        let mut span = vec![false; parent.order()];
        span[0] = true;
        let mut span_list = vec![0];
        for &x in &elements {
            if span[x] {
                continue;
            }
            gens.push(x);
            let mut i = 0;
            while i < span_list.len() {
                let y = span_list[i];
                for &g in &gens {
                    let z = parent.add(y, g);
                    if !span[z] {
                        span[z] = true;
                        span_list.push(z);
                    }
                }
                i += 1;
            }
        }
        Subgroup { parent: parent.clone(), elements, pos, gens }
    }

    /// Builds a subgroup from an explicit element list, checking closure.
    pub fn from_elements(parent: &FinAbGroup, elems: &[Elem]) -> Result<Self> {
        let s = Self::from_generators(parent, elems)?;
        if s.order() != elems.iter().collect::<BTreeSet<_>>().len() {
            return Err(Error::InvalidParameter("element list is not closed under the group law".into()));
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn gens(&self) -> &[Elem] {
        &self.gens
    }

    pub fn contains(&self, x: Elem) -> bool {
        x < self.pos.len() && self.pos[x] != usize::MAX
    }

    /// Position of a member in the sorted element list.
    pub fn index_of(&self, x: Elem) -> Option<usize> {
        self.pos.get(x).copied().filter(|&i| i != usize::MAX)
    }

    pub fn is_elementary_two(&self) -> bool {
        self.elements.iter().all(|&x| self.parent.add(x, x) == 0)
    }

    /// `ell` with `ell^2 = |T|`, if the order is a perfect square.
    pub fn sqrt_order(&self) -> Option<usize> {
        let o = self.order();
        (1..=o).find(|l| l * l >= o).filter(|l| l * l == o)
    }

    pub fn exponent(&self) -> u64 {
        self.elements.iter().fold(1, |acc, &x| lcm(acc, self.parent.elem_order(x)))
    }

    /// All subgroups of `g`, sorted by their element lists.
    pub fn all(g: &FinAbGroup) -> Vec<Subgroup> {
        let mut seen: HashSet<Vec<Elem>> = HashSet::new();
        let mut out = Vec::new();
        let mut frontier = vec![Subgroup::trivial(g)];
        seen.insert(frontier[0].elements.clone());
        while let Some(h) = frontier.pop() {
            for x in g.elements() {
                if h.contains(x) {
                    continue;
                }
                let mut gens = h.gens.clone();
                gens.push(x);
                let k = Subgroup::from_generators(g, &gens).expect("valid generators");
                if seen.insert(k.elements.clone()) {
                    frontier.push(k);
                }
            }
            out.push(h);
        }
        out.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
        out
    }
}

/// Partition of the parent group into cosets of a subgroup, with a transversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTable {
    pub subgroup: Subgroup,
    /// Cosets sorted by their least member; each member list sorted.
    pub cosets: Vec<Vec<Elem>>,
    /// Coset index of every group element.
    pub coset_of: Vec<usize>,
    /// Transversal `gamma(A)`.
    pub gamma: Vec<Elem>,
    /// The pairing element `g0`, if built in paired mode.
    pub pairing: Option<Elem>,
    /// Partner coset `g0^{-1} A^{-1}` (identity map when unpaired).
    pub partner: Vec<usize>,
}

impl CosetTable {
    pub fn new(t: &Subgroup, pairing: Option<Elem>) -> Result<Self> {
        let g = &t.parent;
        if let Some(g0) = pairing {
            if g0 >= g.order() {
                return Err(Error::InvalidParameter(format!("pairing element {g0} outside the group")));
            }
        }
        let mut coset_of = vec![usize::MAX; g.order()];
        let mut cosets = Vec::new();
        for x in g.elements() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let mut members: Vec<Elem> = t.elements().iter().map(|&s| g.add(x, s)).collect();
            members.sort_unstable();
            for &m in &members {
                coset_of[m] = cosets.len();
            }
            cosets.push(members);
        }
        let mut gamma: Vec<Elem> = cosets.iter().map(|c| c[0]).collect();
        let partner: Vec<usize> = match pairing {
            None => (0..cosets.len()).collect(),
            Some(g0) => {
                let p: Vec<usize> = cosets.iter().map(|c| coset_of[g.neg(g.add(g0, c[0]))]).collect();
                for a in 0..cosets.len() {
                    let b = p[a];
                    if b > a {
                        gamma[b] = g.neg(g.add(g0, gamma[a]));
                    }
                }
                p
            }
        };
        Ok(CosetTable { subgroup: t.clone(), cosets, coset_of, gamma, pairing, partner })
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.subgroup.parent
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    /// Whether `g0 A^2 = T`, i.e. the coset is its own partner.
    pub fn is_self_paired(&self, a: usize) -> bool {
        self.pairing.is_some() && self.partner[a] == a
    }

    /// In paired mode, whether `a` is the lesser coset of a partnered pair.
    pub fn is_free(&self, a: usize) -> bool {
        self.partner[a] > a
    }

    /// Coset of `x + A` (the translate `Ax`).
    pub fn shift(&self, a: usize, x: Elem) -> usize {
        self.coset_of[self.group().add(self.cosets[a][0], x)]
    }

    /// Coset `A^{-1}`.
    pub fn inverse(&self, a: usize) -> usize {
        self.coset_of[self.group().neg(self.cosets[a][0])]
    }
}

/// Root of unity `zeta_E^k` with `E` the exponent of the ambient group, stored as `k mod E`.
pub type RootExp = u64;

/// Character of a finite abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    /// `chi(unit vector i) = zeta_{m_i}^{exponents[i]}`.
    pub exponents: Vec<u32>,
}

impl Character {
    pub fn trivial(g: &FinAbGroup) -> Self {
        Character { exponents: vec![0; g.factors().len()] }
    }

    /// `chi(a)` as an exponent of `zeta_E`.
    pub fn value(&self, g: &FinAbGroup, a: Elem) -> RootExp {
        let e = g.exponent();
        g.coords(a)
            .iter()
            .zip(&self.exponents)
            .zip(g.factors())
            .map(|((&x, &k), &m)| x as u64 * k as u64 * (e / m as u64))
            .sum::<u64>()
            % e
    }

    pub fn square(&self, g: &FinAbGroup) -> Character {
        Character { exponents: self.exponents.iter().zip(g.factors()).map(|(&k, &m)| (2 * k) % m).collect() }
    }

    /// All characters, in the canonical order of their exponent vectors.
    pub fn all(g: &FinAbGroup) -> Vec<Character> {
        g.elements().map(|a| Character { exponents: g.coords(a) }).collect()
    }
}

/// Lexicographically least character (canonical order on exponent vectors) with
/// `chi(x) = zeta_E^k` for every constraint `(x, k)`.
pub fn solve_character(g: &FinAbGroup, constraints: &[(Elem, RootExp)]) -> Result<Character> {
    let e = g.exponent();
    Character::all(g)
        .into_iter()
        .find(|chi| constraints.iter().all(|&(x, k)| chi.value(g, x) == k % e))
        .ok_or_else(|| Error::NoCharacter(format!("no character satisfies {constraints:?}")))
}

/// Bicharacter on a subgroup, given by exponents on the subgroup's generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bicharacter {
    pub subgroup: Subgroup,
    /// `beta(gens[i], gens[j]) = zeta_E^{gram[i][j]}`.
    pub gram: Vec<Vec<RootExp>>,
    table: Vec<RootExp>,
}

impl Bicharacter {
    /// Evaluates the gram data on all pairs; call [`Bicharacter::validate`] before use.
    pub fn from_gram(t: &Subgroup, gram: Vec<Vec<RootExp>>) -> Result<Self> {
        let k = t.gens().len();
        if gram.len() != k || gram.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "gram matrix must be {k}x{k} for the generators {:?}",
                t.gens().iter().map(|&x| t.parent.coords(x)).collect::<Vec<_>>()
            )));
        }
        let g = &t.parent;
        let e = g.exponent();
        let coords = subgroup_coords(t);
        let n = t.order();
        let mut table = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0u64;
                for a in 0..k {
                    for b in 0..k {
                        s += coords[i][a] as u64 * coords[j][b] as u64 * (gram[a][b] % e);
                    }
                }
                table[i * n + j] = s % e;
            }
        }
        Ok(Bicharacter { subgroup: t.clone(), gram, table })
    }

    /// Builds the bicharacter from a full value table indexed by sorted subgroup elements.
    pub fn from_table(t: &Subgroup, table: Vec<RootExp>) -> Result<Self> {
        let n = t.order();
        if table.len() != n * n {
            return Err(Error::InvalidParameter("bicharacter table has wrong size".into()));
        }
        let gram = t
            .gens()
            .iter()
            .map(|&a| t.gens().iter().map(|&b| table[t.index_of(a).unwrap() * n + t.index_of(b).unwrap()]).collect())
            .collect();
        Ok(Bicharacter { subgroup: t.clone(), gram, table })
    }

    /// Trivial bicharacter (the only one on a trivial subgroup).
    pub fn trivial(t: &Subgroup) -> Self {
        let k = t.gens().len();
        Self::from_gram(t, vec![vec![0; k]; k]).expect("square gram")
    }

    /// `beta(x, y)` as an exponent of `zeta_E`.
    pub fn value(&self, x: Elem, y: Elem) -> RootExp {
        let t = &self.subgroup;
        let i = t.index_of(x).expect("first argument outside the subgroup");
        let j = t.index_of(y).expect("second argument outside the subgroup");
        self.table[i * t.order() + j]
    }

    pub fn table(&self) -> &[RootExp] {
        &self.table
    }

    /// Checks multiplicativity, alternation and nondegeneracy.
    pub fn validate(&self) -> Result<()> {
        let t = &self.subgroup;
        let g = &t.parent;
        let e = g.exponent();
        let els = t.elements();
        for &x in els {
            for &y in els {
                for &z in els {
                    let lhs = self.value(g.add(x, y), z);
                    let rhs = (self.value(x, z) + self.value(y, z)) % e;
                    let lhs2 = self.value(z, g.add(x, y));
                    let rhs2 = (self.value(z, x) + self.value(z, y)) % e;
                    if lhs != rhs || lhs2 != rhs2 {
                        return Err(Error::InvalidBicharacter {
                            reason: "not multiplicative".into(),
                            witness: g.coords(x),
                        });
                    }
                }
            }
            if self.value(x, x) != 0 {
                return Err(Error::InvalidBicharacter { reason: "not alternating".into(), witness: g.coords(x) });
            }
        }
        if let Some(&r) = els.iter().find(|&&x| x != 0 && els.iter().all(|&y| self.value(x, y) == 0)) {
            return Err(Error::InvalidBicharacter { reason: "degenerate".into(), witness: g.coords(r) });
        }
        Ok(())
    }

    /// Nonidentity elements of the radical.
    pub fn radical(&self) -> Vec<Elem> {
        let els = self.subgroup.elements();
        els.iter().copied().filter(|&x| els.iter().all(|&y| self.value(x, y) == 0)).collect()
    }

    /// Pointwise inverse `beta^{-1}`.
    pub fn inverse(&self) -> Bicharacter {
        let e = self.subgroup.parent.exponent();
        let table = self.table.iter().map(|&v| (e - v) % e).collect();
        Bicharacter::from_table(&self.subgroup, table).expect("same size")
    }

    /// All nondegenerate alternating bicharacters on `t`, in canonical table order.
    pub fn enumerate_nondegenerate(t: &Subgroup) -> Vec<Bicharacter> {
        let k = t.gens().len();
        let e = t.parent.exponent();
        let slots: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let total = (e as usize).pow(slots.len() as u32);
        for code in 0..total {
            let mut gram = vec![vec![0u64; k]; k];
            let mut c = code;
            for &(i, j) in &slots {
                let v = (c % e as usize) as u64;
                c /= e as usize;
                gram[i][j] = v;
                gram[j][i] = (e - v) % e;
            }
            let b = Bicharacter::from_gram(t, gram).expect("square gram");
            if b.validate().is_ok() && seen.insert(b.table.clone()) {
                out.push(b);
            }
        }
        out.sort_by(|a, b| a.table.cmp(&b.table));
        out
    }
}

/// Generator coordinates of every subgroup element (first representation in canonical order).
fn subgroup_coords(t: &Subgroup) -> Vec<Vec<u32>> {
    let g = &t.parent;
    let orders: Vec<u64> = t.gens().iter().map(|&x| g.elem_order(x)).collect();
    let mut out: Vec<Option<Vec<u32>>> = vec![None; t.order()];
    let total: u64 = orders.iter().product();
    for code in 0..total {
        let mut c = code;
        let mut coord = Vec::with_capacity(orders.len());
        let mut x = 0;
        for (&gen, &o) in t.gens().iter().zip(&orders) {
            let a = c % o;
            c /= o;
            coord.push(a as u32);
            x = g.add(x, g.times(a as i64, gen));
        }
        let i = t.index_of(x).expect("generated element in subgroup");
        if out[i].is_none() {
            out[i] = Some(coord);
        }
    }
    out.into_iter().map(|c| c.expect("generators span the subgroup")).collect()
}

/// Symplectic pairs `(u_i, v_i)` of order `ell_i` with `beta(u_i, v_i) = zeta_{ell_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticBasis {
    pub pairs: Vec<(Elem, Elem)>,
    pub ells: Vec<u64>,
}

impl SymplecticBasis {
    /// Coordinates `(a_1, b_1, a_2, b_2, ...)` with `t = sum a_i u_i + b_i v_i`.
    pub fn coordinates(&self, g: &FinAbGroup, t: Elem) -> Option<Vec<u64>> {
        let mut out = vec![0u64; 2 * self.pairs.len()];
        search_coords(g, self, 0, 0, t, &mut out).then_some(out)
    }
}

fn search_coords(g: &FinAbGroup, b: &SymplecticBasis, i: usize, acc: Elem, t: Elem, out: &mut [u64]) -> bool {
    if i == b.pairs.len() {
        return acc == t;
    }
    let (u, v) = b.pairs[i];
    let l = b.ells[i];
    for a in 0..l {
        for c in 0..l {
            let x = g.add(acc, g.add(g.times(a as i64, u), g.times(c as i64, v)));
            out[2 * i] = a;
            out[2 * i + 1] = c;
            if search_coords(g, b, i + 1, x, t, out) {
                return true;
            }
        }
    }
    false
}

/// Deterministic symplectic basis: repeatedly take the least element of maximal order,
/// pair it with the least element on which `beta` is the primitive root, and pass to the
/// orthogonal complement.
pub fn symplectic_basis(beta: &Bicharacter) -> Result<SymplecticBasis> {
    let t = &beta.subgroup;
    let g = &t.parent;
    let e = g.exponent();
    if t.sqrt_order().is_none() {
        return Err(Error::InvalidParameter(format!("|T| = {} is not a perfect square", t.order())));
    }
    if beta.validate().is_err() {
        return Err(Error::InvalidParameter("bicharacter is not nondegenerate alternating".into()));
    }
    let mut rest: Vec<Elem> = t.elements().to_vec();
    let mut pairs = Vec::new();
    let mut ells = Vec::new();
    while rest.len() > 1 {
        let max_ord = rest.iter().map(|&x| g.elem_order(x)).max().unwrap();
        let u = *rest.iter().find(|&&x| g.elem_order(x) == max_ord).unwrap();
        let want = e / max_ord;
        let v = *rest
            .iter()
            .find(|&&y| beta.value(u, y) == want)
            .ok_or_else(|| Error::InvalidParameter("bicharacter degenerate on a complement".into()))?;
        pairs.push((u, v));
        ells.push(max_ord);
        rest.retain(|&w| beta.value(u, w) == 0 && beta.value(v, w) == 0);
    }
    Ok(SymplecticBasis { pairs, ells })
}

/// Quotient `G / N` realized on the cyclic decomposition of its invariant factors,
/// with the projection given elementwise.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: FinAbGroup,
    /// `proj[x]` is the image of `x in G`.
    pub proj: Vec<Elem>,
}

pub fn quotient(g: &FinAbGroup, n: &Subgroup) -> Result<Quotient> {
    let table = CosetTable::new(n, None)?;
    let k = table.len();
    // Find an isomorphism of the coset group with a product of cyclic groups by greedy
    // choice of independent generators of maximal order in the coset group.
    let coset_add = |a: usize, b: usize| table.coset_of[g.add(table.cosets[a][0], table.cosets[b][0])];
    let coset_order = |a: usize| {
        let mut o = 1;
        let mut x = a;
        while x != 0 {
            x = coset_add(x, a);
            o += 1;
        }
        o
    };
    let mut gens: Vec<(usize, u32)> = Vec::new();
    let mut span: Vec<bool> = vec![false; k];
    span[0] = true;
    let mut size = 1usize;
    while size < k {
        // Pick a coset whose order in the quotient by the current span is maximal, then
        // adjust it so that its cyclic subgroup meets the span trivially.
        let mut best: Option<(usize, usize)> = None;
        for a in 0..k {
            if span[a] {
                continue;
            }
            let mut o = 1;
            let mut x = a;
            while !span[x] {
                x = coset_add(x, a);
                o += 1;
            }
            if best.is_none_or(|(_, bo)| o > bo) {
                best = Some((a, o));
            }
        }
        let (a, o) = best.unwrap();
        let mut chosen = None;
        // Search the coset a + span for an element of order exactly o.
        for s in (0..k).filter(|&s| span[s]) {
            let c = coset_add(a, s);
            if coset_order(c) == o {
                chosen = Some(c);
                break;
            }
        }
        let c = chosen.ok_or_else(|| Error::Internal("quotient decomposition failed".into()))?;
        gens.push((c, o as u32));
        let mut new_span = span.clone();
        let current: Vec<usize> = (0..k).filter(|&x| span[x]).collect();
        let mut m = c;
        for _ in 1..o {
            for &x in &current {
                new_span[coset_add(x, m)] = true;
            }
            m = coset_add(m, c);
        }
        span = new_span;
        size = span.iter().filter(|&&b| b).count();
    }
    let qgroup = FinAbGroup::new(&gens.iter().map(|&(_, o)| o).collect::<Vec<_>>())?;
    let mut coset_to_q = vec![usize::MAX; k];
    for q in qgroup.elements() {
        let cs = qgroup.coords(q);
        let mut x = 0;
        for (&(c, _), &a) in gens.iter().zip(&cs) {
            for _ in 0..a {
                x = coset_add(x, c);
            }
        }
        if coset_to_q[x] != usize::MAX {
            return Err(Error::Internal("quotient generators not independent".into()));
        }
        coset_to_q[x] = q;
    }
    let proj = g.elements().map(|x| coset_to_q[table.coset_of[x]]).collect();
    Ok(Quotient { group: qgroup, proj })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_examples() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.exponent(), 2);
        let t = FinAbGroup::new(&[]).unwrap();
        assert_eq!(t.order(), 1);
        let z4 = FinAbGroup::new(&[4]).unwrap();
        assert_eq!(z4.neg(3), 1);
        assert!(matches!(FinAbGroup::new(&[2, 1]), Err(Error::InvalidParameter(_))));
        assert_eq!(FinAbGroup::new(&[6, 4]).unwrap().invariant_factors(), vec![2, 12]);
    }

    #[test]
    fn subgroup_examples() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let s =
            Subgroup::from_generators(&g, &[g.from_coords(&[1, 0]).unwrap(), g.from_coords(&[0, 1]).unwrap()]).unwrap();
        assert_eq!(s.order(), 4);
        let z4 = FinAbGroup::new(&[4]).unwrap();
        assert_eq!(Subgroup::from_generators(&z4, &[2]).unwrap().elements(), &[0, 2]);
        let z2 = FinAbGroup::new(&[2]).unwrap();
        assert_eq!(Subgroup::from_generators(&z2, &[]).unwrap().elements(), &[0]);
        assert_eq!(Subgroup::all(&FinAbGroup::new(&[2, 2]).unwrap()).len(), 5);
        assert_eq!(Subgroup::all(&FinAbGroup::new(&[8]).unwrap()).len(), 4);
    }

    #[test]
    fn paired_coset_table_z4() {
        let z4 = FinAbGroup::new(&[4]).unwrap();
        let t = Subgroup::from_generators(&z4, &[2]).unwrap();
        let ct = CosetTable::new(&t, Some(1)).unwrap();
        assert_eq!(ct.cosets, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(ct.partner, vec![1, 0]);
        assert_eq!(ct.gamma, vec![0, 3]);
    }

    #[test]
    fn character_examples() {
        let z2 = FinAbGroup::new(&[2]).unwrap();
        assert_eq!(solve_character(&z2, &[(1, 1)]).unwrap().exponents, vec![1]);
        let v4 = FinAbGroup::new(&[2, 2]).unwrap();
        let x = v4.from_coords(&[1, 1]).unwrap();
        assert_eq!(solve_character(&v4, &[(x, 1)]).unwrap().exponents, vec![1, 0]);
        let z4 = FinAbGroup::new(&[4]).unwrap();
        assert!(matches!(solve_character(&z4, &[(2, 0), (2, 2)]), Err(Error::NoCharacter(_))));
    }

    #[test]
    fn degenerate_bicharacter_rejected() {
        let v4 = FinAbGroup::new(&[2, 2]).unwrap();
        let t = Subgroup::whole(&v4);
        let b = Bicharacter::trivial(&t);
        assert!(matches!(b.validate(), Err(Error::InvalidBicharacter { .. })));
        assert_eq!(b.radical().len(), 4);
    }

    #[test]
    fn quotient_examples() {
        let v4 = FinAbGroup::new(&[2, 2]).unwrap();
        let n = Subgroup::from_generators(&v4, &[v4.from_coords(&[0, 1]).unwrap()]).unwrap();
        let q = quotient(&v4, &n).unwrap();
        assert_eq!(q.group.order(), 2);
        assert_eq!(q.proj[v4.from_coords(&[1, 0]).unwrap()], 1);
        let z4 = FinAbGroup::new(&[4]).unwrap();
        let q = quotient(&z4, &Subgroup::from_generators(&z4, &[2]).unwrap()).unwrap();
        assert_eq!(q.group.factors(), &[2]);
        let q = quotient(&z4, &Subgroup::whole(&z4)).unwrap();
        assert_eq!(q.group.order(), 1);
    }
}
