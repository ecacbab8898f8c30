//! Evaluating a ring homomorphism `f: A -> R` on a subring `A` of
//! `Mat_n(Z_m)` from a public description: generators of `ker f`, a
//! transversal `X` of `ker f` in `A`, and `f` restricted to `X`.
//!
//! `f(a) = f(x_a)` for the unique `x_a` in `X` with `x_a - a` in `ker f`.
//! Membership in `ker f` is decided with a Howell-style normal form of the
//! kernel as a `Z_m`-module.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;

use crate::ring::FiniteRing;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("modulus must be in 2..=2^31, got {0}")]
    InvalidModulus(u64),
    #[error("expected {expected} entries, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("no transversal element matches the query")]
    NoTransversalMatch,
    #[error("transversal and image lists differ in length")]
    ImageCount,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An `n x n` matrix over `Z_m`, entries in `[0, m)`, row major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatRingElement {
    n: usize,
    m: u64,
    e: Vec<u64>,
}

impl MatRingElement {
    /// Entries are reduced modulo `m`.
    pub fn new(n: usize, m: u64, entries: &[i64]) -> Result<Self, AttackError> {
        check_modulus(m)?;
        if entries.len() != n * n {
            return Err(AttackError::Dimension { expected: n * n, got: entries.len() });
        }
        Ok(MatRingElement { n, m, e: entries.iter().map(|&x| x.rem_euclid(m as i64) as u64).collect() })
    }

    pub fn zero(n: usize, m: u64) -> Self {
        MatRingElement { n, m, e: vec![0; n * n] }
    }

    pub fn identity(n: usize, m: u64) -> Self {
        let mut z = Self::zero(n, m);
        for i in 0..n {
            z.e[i * n + i] = 1 % m;
        }
        z
    }

    /// Matrix unit `E_{ij}`.
    pub fn unit(n: usize, m: u64, i: usize, j: usize) -> Self {
        let mut z = Self::zero(n, m);
        z.e[i * n + j] = 1 % m;
        z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn entries(&self) -> &[u64] {
        &self.e
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.e[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| (a + b) % self.m)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| (a + self.m - b) % self.m)
    }

    pub fn neg(&self) -> Self {
        self.scale(self.m - 1)
    }

    pub fn scale(&self, k: u64) -> Self {
        let k = k % self.m;
        MatRingElement { n: self.n, m: self.m, e: self.e.iter().map(|&a| a * k % self.m).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!((self.n, self.m), (o.n, o.m), "shape mismatch");
        let n = self.n;
        let mut e = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = (0..n).map(|k| self.get(i, k) * o.get(k, j) % self.m).sum::<u64>() % self.m;
            }
        }
        MatRingElement { n, m: self.m, e }
    }

    fn zip(&self, o: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!((self.n, self.m), (o.n, o.m), "shape mismatch");
        MatRingElement { n: self.n, m: self.m, e: self.e.iter().zip(&o.e).map(|(&a, &b)| f(a, b)).collect() }
    }

    /// Whitespace-separated entries, row major.
    pub fn parse(n: usize, m: u64, text: &str) -> Result<Self, String> {
        let entries = text
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| format!("bad matrix entry {t:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        MatRingElement::new(n, m, &entries).map_err(|e| e.to_string())
    }
}

impl fmt::Display for MatRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.e.iter().map(|x| x.to_string()).collect();
        f.write_str(&cells.join(" "))
    }
}

impl fmt::Debug for MatRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.e.chunks(self.n.max(1)).map(|r| format!("{r:?}")).collect();
        write!(f, "[{}] mod {}", rows.join(", "), self.m)
    }
}

fn check_modulus(m: u64) -> Result<(), AttackError> {
    if !(2..=1 << 31).contains(&m) {
        return Err(AttackError::InvalidModulus(m));
    }
    Ok(())
}

/// Maximal prime powers `q` dividing `m` with cofactors `m / q`, by
/// increasing prime.
pub fn char_decompose(m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut rest = m;
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut q = 1;
            while rest.is_multiple_of(p) {
                rest /= p;
                q *= p;
            }
            out.push((q, m / q));
        }
        p += 1;
    }
    if rest > 1 {
        out.push((rest, m / rest));
    }
    out
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

/// A unit `u` of `Z_m` with `u * c = gcd(c, m)`.
fn normalizing_unit(c: u64, m: u64) -> u64 {
    let p = c.gcd(&m);
    let (cp, mp) = (c / p, m / p);
    let u0 = if mp == 1 {
        1
    } else {
        let (_, s, _) = ext_gcd(cp as i128, mp as i128);
        s.rem_euclid(mp as i128) as u64
    };
    (0..p).map(|k| u0 + k * mp).find(|u| u.gcd(&m) == 1).expect("units lift along Z_m -> Z_{m/p}")
}

/// Echelon form of a submodule of `Z_m^dim` with at most one row per pivot
/// column. Each pivot divides `m`, and `(m / p) * row` lies in the span of
/// the rows with later pivots, so reduction decides membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleForm {
    m: u64,
    dim: usize,
    rows: Vec<Option<Vec<u64>>>,
}

impl ModuleForm {
    pub fn new(m: u64, dim: usize) -> Self {
        ModuleForm { m, dim, rows: vec![None; dim] }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.iter().flatten().count()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.rows.iter().flatten()
    }

    /// Number of elements in the module.
    pub fn cardinality(&self) -> u128 {
        self.rows.iter().enumerate().filter_map(|(c, r)| r.as_ref().map(|r| (self.m / r[c]) as u128)).product()
    }

    fn combine(&self, x: &[u64], a: i128, y: &[u64], b: i128) -> Vec<u64> {
        let m = self.m as i128;
        x.iter().zip(y).map(|(&p, &q)| (a * p as i128 + b * q as i128).rem_euclid(m) as u64).collect()
    }

    fn scaled(&self, x: &[u64], k: u64) -> Vec<u64> {
        x.iter().map(|&v| (v as u128 * k as u128 % self.m as u128) as u64).collect()
    }

    /// Adds `v` to the module; returns whether the span grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let m = self.m;
        let mut grew = false;
        let mut pending = vec![v.iter().map(|x| x % m).collect::<Vec<u64>>()];
        while let Some(mut v) = pending.pop() {
            let mut col = 0;
            while let Some(c) = (col..self.dim).find(|&c| v[c] != 0) {
                col = c;
                let Some(row) = self.rows[c].clone() else {
                    let u = normalizing_unit(v[c], m);
                    let row = self.scaled(&v, u);
                    pending.push(self.scaled(&row, m / row[c]));
                    self.rows[c] = Some(row);
                    grew = true;
                    break;
                };
                let (a, b) = (row[c] as i128, v[c] as i128);
                if b % a == 0 {
                    v = self.combine(&v, 1, &row, -(b / a));
                    continue;
                }
                // unimodular 2x2 move putting gcd(a, b) on the pivot
                let (g, s, t) = ext_gcd(a, b);
                let new_row = self.combine(&row, s, &v, t);
                v = self.combine(&v, a / g, &row, -(b / g));
                pending.push(self.scaled(&new_row, m / g as u64));
                self.rows[c] = Some(new_row);
                grew = true;
            }
        }
        grew
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.contains_counted(v).0
    }

    /// Membership together with the number of entry operations spent.
    pub fn contains_counted(&self, v: &[u64]) -> (bool, u64) {
        let mut v: Vec<u64> = v.iter().map(|x| x % self.m).collect();
        let mut ops = self.dim as u64;
        for c in 0..self.dim {
            if v[c] == 0 {
                continue;
            }
            let Some(row) = &self.rows[c] else { return (false, ops) };
            if !v[c].is_multiple_of(row[c]) {
                return (false, ops);
            }
            let k = v[c] / row[c];
            v = self.combine(&v, 1, row, -(k as i128));
            ops += self.dim as u64;
        }
        (true, ops)
    }
}

/// `f: A -> R` presented by kernel generators, a transversal and its images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedHomomorphism {
    pub n: usize,
    pub m: u64,
    pub kernel_gens: Vec<MatRingElement>,
    pub transversal: Vec<MatRingElement>,
    /// `images[i] = f(transversal[i])` as an element of `ring`.
    pub images: Vec<usize>,
    pub ring: FiniteRing,
    /// Extra ring generators of `A` used when closing the kernel.
    pub algebra: Vec<MatRingElement>,
}

impl PresentedHomomorphism {
    pub fn new(
        n: usize,
        m: u64,
        kernel_gens: Vec<MatRingElement>,
        transversal: Vec<MatRingElement>,
        images: Vec<usize>,
        ring: FiniteRing,
    ) -> Result<Self, AttackError> {
        check_modulus(m)?;
        if transversal.len() != images.len() || images.iter().any(|&i| i >= ring.size()) {
            return Err(AttackError::ImageCount);
        }
        for x in kernel_gens.iter().chain(&transversal) {
            if x.n != n || x.m != m {
                return Err(AttackError::Dimension { expected: n * n, got: x.e.len() });
            }
        }
        Ok(PresentedHomomorphism { n, m, kernel_gens, transversal, images, ring, algebra: Vec::new() })
    }

    pub fn with_algebra(mut self, algebra: Vec<MatRingElement>) -> Self {
        self.algebra = algebra;
        self
    }

    /// Generators used for the two-sided closure: the supplied algebra
    /// generators, the transversal, the kernel generators and the identity.
    pub fn closure_generators(&self) -> Vec<MatRingElement> {
        let mut gens: Vec<MatRingElement> = self.algebra.clone();
        gens.extend(self.transversal.iter().cloned());
        gens.extend(self.kernel_gens.iter().cloned());
        gens.push(MatRingElement::identity(self.n, self.m));
        let mut seen = HashSet::new();
        gens.retain(|g| seen.insert(g.clone()));
        gens
    }

    /// Transversal elements are pairwise incongruent modulo the kernel.
    pub fn transversal_is_valid(&self, kernel: &KernelForm) -> bool {
        let x = &self.transversal;
        (0..x.len()).all(|i| (i + 1..x.len()).all(|j| !kernel_membership(kernel, &x[i].sub(&x[j]))))
    }

    /// Line format: `format: 1`, `n:`, `m:`, `ring: <path>`, then any number
    /// of `algebra: <entries>`, `kernel: <entries>` and
    /// `transversal: <entries> -> <ring element>` lines.
    pub fn parse(
        text: &str,
        mut load_ring: impl FnMut(&str) -> Result<FiniteRing, String>,
    ) -> Result<Self, AttackError> {
        let (mut n, mut m, mut ring) = (None, None, None);
        let mut kernel = Vec::new();
        let mut algebra = Vec::new();
        let mut transversal: Vec<(usize, MatRingElement, String)> = Vec::new();
        let mut last = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| AttackError::Parse { line: line_no, msg };
            let (key, rest) = line.split_once(':').ok_or_else(|| err("expected `key: value`".into()))?;
            let rest = rest.trim();
            let shape = |n: Option<usize>, m: Option<u64>| {
                n.zip(m).ok_or_else(|| err("`n:` and `m:` must precede matrices".into()))
            };
            match key.trim() {
                "format" if rest == "1" => {}
                "format" => return Err(err(format!("unsupported format {rest:?}"))),
                "n" => n = Some(rest.parse().map_err(|_| err("bad n".into()))?),
                "m" => {
                    let v: u64 = rest.parse().map_err(|_| err("bad m".into()))?;
                    check_modulus(v).map_err(|e| err(e.to_string()))?;
                    m = Some(v);
                }
                "ring" => ring = Some(load_ring(rest).map_err(err)?),
                "kernel" | "algebra" => {
                    let (n, m) = shape(n, m)?;
                    let x = MatRingElement::parse(n, m, rest).map_err(err)?;
                    if key.trim() == "kernel" {
                        kernel.push(x)
                    } else {
                        algebra.push(x)
                    }
                }
                "transversal" => {
                    let (n, m) = shape(n, m)?;
                    let (mat, label) =
                        rest.split_once("->").ok_or_else(|| err("expected `<entries> -> <label>`".into()))?;
                    let x = MatRingElement::parse(n, m, mat).map_err(err)?;
                    transversal.push((line_no, x, label.trim().to_string()));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |what: &str| AttackError::Parse { line: last, msg: format!("missing {what}") };
        let ring = ring.ok_or_else(|| missing("ring"))?;
        let images = transversal
            .iter()
            .map(|(line, _, label)| {
                ring.element(label)
                    .ok_or_else(|| AttackError::Parse { line: *line, msg: format!("unknown ring element {label:?}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ph = PresentedHomomorphism::new(
            n.ok_or_else(|| missing("n"))?,
            m.ok_or_else(|| missing("m"))?,
            kernel,
            transversal.into_iter().map(|(_, x, _)| x).collect(),
            images,
            ring,
        )?;
        Ok(ph.with_algebra(algebra))
    }

    pub fn to_text(&self, ring_ref: &str) -> String {
        let mut out = format!("format: 1\nn: {}\nm: {}\nring: {ring_ref}\n", self.n, self.m);
        for a in &self.algebra {
            out += &format!("algebra: {a}\n");
        }
        for k in &self.kernel_gens {
            out += &format!("kernel: {k}\n");
        }
        for (x, &i) in self.transversal.iter().zip(&self.images) {
            out += &format!("transversal: {x} -> {}\n", self.ring.label(i));
        }
        out
    }
}

/// The two-sided ideal generated by the kernel generators, as a module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelForm {
    pub n: usize,
    pub form: ModuleForm,
}

/// Closes the kernel generators under left and right multiplication by
/// `generators` until the additive span stops growing.
pub fn kernel_closure(ph: &PresentedHomomorphism, generators: &[MatRingElement]) -> KernelForm {
    let mut form = ModuleForm::new(ph.m, ph.n * ph.n);
    let mut queue: VecDeque<MatRingElement> = ph.kernel_gens.iter().cloned().collect();
    while let Some(k) = queue.pop_front() {
        if form.insert(k.entries()) {
            for g in generators {
                queue.push_back(g.mul(&k));
                queue.push_back(k.mul(g));
            }
        }
    }
    KernelForm { n: ph.n, form }
}

/// [`kernel_closure`] with [`PresentedHomomorphism::closure_generators`].
pub fn kernel_closure_default(ph: &PresentedHomomorphism) -> KernelForm {
    kernel_closure(ph, &ph.closure_generators())
}

pub fn kernel_membership(kf: &KernelForm, a: &MatRingElement) -> bool {
    kf.form.contains(a.entries())
}

/// `f(a)` via the transversal element congruent to `a`.
pub fn evaluate_homomorphism(
    ph: &PresentedHomomorphism,
    kf: &KernelForm,
    a: &MatRingElement,
) -> Result<usize, AttackError> {
    evaluate_counted(ph, kf, a).map(|(r, _)| r)
}

/// [`evaluate_homomorphism`] and the entry operations it used.
pub fn evaluate_counted(
    ph: &PresentedHomomorphism,
    kf: &KernelForm,
    a: &MatRingElement,
) -> Result<(usize, u64), AttackError> {
    let mut ops = 0;
    for (x, &img) in ph.transversal.iter().zip(&ph.images) {
        let (hit, cost) = kf.form.contains_counted(x.sub(a).entries());
        ops += cost + (ph.n * ph.n) as u64;
        if hit {
            return Ok((img, ops));
        }
    }
    Err(AttackError::NoTransversalMatch)
}

/// Evaluates each primary component `a_q = (m / q) a` separately and
/// recombines with `u_q = (m / q)^{-1} mod q`, using
/// `sum_q u_q (m / q) = 1 mod m`.
pub fn evaluate_by_components(
    ph: &PresentedHomomorphism,
    kf: &KernelForm,
    a: &MatRingElement,
) -> Result<usize, AttackError> {
    let r = &ph.ring;
    let mut acc = r.zero();
    for (q, cof) in char_decompose(ph.m) {
        let u = if q == 1 { 0 } else { ext_gcd(cof as i128, q as i128).1.rem_euclid(q as i128) as u64 };
        let part = evaluate_homomorphism(ph, kf, &a.scale(cof))?;
        acc = r.add(acc, r.scale(u, part));
    }
    Ok(acc)
}

/// All elements of the subring of `Mat_n(Z_m)` generated by `gens` and the
/// identity, or `None` if it exceeds `limit` elements.
pub fn enumerate_subring(n: usize, m: u64, gens: &[MatRingElement], limit: usize) -> Option<Vec<MatRingElement>> {
    let one = MatRingElement::identity(n, m);
    let mut ring_gens: Vec<MatRingElement> = gens.to_vec();
    ring_gens.push(one.clone());
    let mut seen: HashSet<MatRingElement> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([MatRingElement::zero(n, m), one]);
    while let Some(x) = queue.pop_front() {
        if !seen.insert(x.clone()) {
            continue;
        }
        if seen.len() > limit {
            return None;
        }
        order.push(x.clone());
        for g in &ring_gens {
            // additive closure by generators plus multiplicative closure
            for y in [x.add(g), x.mul(g), g.mul(&x)] {
                if !seen.contains(&y) {
                    queue.push_back(y);
                }
            }
        }
    }
    // close under addition of arbitrary pairs
    let mut i = 0;
    while i < order.len() {
        let mut fresh = Vec::new();
        for j in 0..=i {
            for y in [order[i].add(&order[j]), order[i].mul(&order[j]), order[j].mul(&order[i])] {
                if seen.insert(y.clone()) {
                    fresh.push(y);
                }
            }
        }
        if seen.len() > limit {
            return None;
        }
        order.extend(fresh);
        i += 1;
    }
    Some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(n: usize, m: u64, e: &[i64]) -> MatRingElement {
        MatRingElement::new(n, m, e).unwrap()
    }

    #[test]
    fn char_decompose_examples() {
        assert_eq!(char_decompose(12), vec![(4, 3), (3, 4)]);
        assert_eq!(char_decompose(7), vec![(7, 1)]);
        assert_eq!(char_decompose(8), vec![(8, 1)]);
        assert_eq!(char_decompose(30), vec![(2, 15), (3, 10), (5, 6)]);
    }

    #[test]
    fn closure_examples() {
        let z4 = FiniteRing::zmod(4);
        let empty = PresentedHomomorphism::new(1, 4, vec![], vec![], vec![], z4.clone()).unwrap();
        let kf = kernel_closure_default(&empty);
        assert!(kernel_membership(&kf, &mat(1, 4, &[0])));
        assert!(!kernel_membership(&kf, &mat(1, 4, &[2])));

        let z2 = FiniteRing::zmod(2);
        let ph = PresentedHomomorphism::new(
            1,
            4,
            vec![mat(1, 4, &[2])],
            vec![mat(1, 4, &[0]), mat(1, 4, &[1])],
            vec![0, 1],
            z2,
        )
        .unwrap();
        let kf = kernel_closure_default(&ph);
        let members: Vec<i64> = (0..4).filter(|&x| kernel_membership(&kf, &mat(1, 4, &[x]))).collect();
        assert_eq!(members, vec![0, 2]);
        assert!(ph.transversal_is_valid(&kf));

        let full = PresentedHomomorphism::new(2, 6, vec![MatRingElement::identity(2, 6)], vec![], vec![], z4).unwrap();
        // with only the identity available the algebra is the scalars
        assert_eq!(kernel_closure_default(&full).form.cardinality(), 6);
        let units: Vec<MatRingElement> = (0..4).map(|k| MatRingElement::unit(2, 6, k / 2, k % 2)).collect();
        let kf = kernel_closure(&full, &units);
        assert_eq!(kf.form.cardinality(), 6u128.pow(4));
        assert!(kernel_membership(&kf, &mat(2, 6, &[5, 1, 3, 2])));
    }

    #[test]
    fn z6_to_z3() {
        let z3 = FiniteRing::zmod(3);
        let x: Vec<MatRingElement> = (0..3).map(|i| mat(1, 6, &[i])).collect();
        let ph = PresentedHomomorphism::new(1, 6, vec![mat(1, 6, &[3])], x.clone(), vec![0, 1, 2], z3).unwrap();
        let kf = kernel_closure_default(&ph);
        assert_eq!(evaluate_homomorphism(&ph, &kf, &mat(1, 6, &[4])).unwrap(), 1);
        for a in 0..6 {
            let q = mat(1, 6, &[a]);
            assert_eq!(evaluate_homomorphism(&ph, &kf, &q).unwrap(), (a % 3) as usize);
            assert_eq!(evaluate_by_components(&ph, &kf, &q).unwrap(), (a % 3) as usize);
        }
        for (i, xi) in x.iter().enumerate() {
            assert_eq!(evaluate_homomorphism(&ph, &kf, xi).unwrap(), i);
        }
    }

    #[test]
    fn no_match_outside_algebra() {
        // diagonal matrices over Z_2, query off the diagonal
        let r = FiniteRing::zmod(2);
        let ph = PresentedHomomorphism::new(
            2,
            2,
            vec![MatRingElement::unit(2, 2, 1, 1)],
            vec![MatRingElement::zero(2, 2), MatRingElement::unit(2, 2, 0, 0)],
            vec![0, 1],
            r,
        )
        .unwrap();
        let kf = kernel_closure(&ph, &[MatRingElement::unit(2, 2, 0, 0), MatRingElement::unit(2, 2, 1, 1)]);
        assert_eq!(
            evaluate_homomorphism(&ph, &kf, &MatRingElement::unit(2, 2, 0, 1)),
            Err(AttackError::NoTransversalMatch)
        );
    }

    #[test]
    fn subring_enumeration() {
        let gens =
            [MatRingElement::unit(2, 4, 0, 0), MatRingElement::unit(2, 4, 0, 1), MatRingElement::unit(2, 4, 1, 1)];
        assert_eq!(enumerate_subring(2, 4, &gens, 10_000).unwrap().len(), 64);
        assert_eq!(enumerate_subring(2, 3, &[], 100).unwrap().len(), 3);
        assert!(enumerate_subring(2, 4, &gens, 10).is_none());
    }

    #[test]
    fn query_cost_is_bounded() {
        for f in crate::fixtures::attack_fixtures() {
            let ph = &f.ph;
            let kf = kernel_closure_default(ph);
            let n2 = (ph.n * ph.n) as u64;
            let bound = ph.transversal.len() as u64 * n2 * (kf.form.rank() as u64 + 2);
            for a in enumerate_subring(ph.n, ph.m, &ph.closure_generators(), 5000).unwrap() {
                let (img, ops) = evaluate_counted(ph, &kf, &a).unwrap();
                assert_eq!(img, (f.truth)(&a), "{}", f.name);
                assert!(ops <= bound, "{}: {ops} > {bound}", f.name);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let z3 = FiniteRing::zmod(3);
        let ph = PresentedHomomorphism::new(
            1,
            6,
            vec![mat(1, 6, &[3])],
            (0..3).map(|i| mat(1, 6, &[i])).collect(),
            vec![0, 1, 2],
            z3.clone(),
        )
        .unwrap()
        .with_algebra(vec![mat(1, 6, &[1])]);
        let text = ph.to_text("z3.ring");
        let back = PresentedHomomorphism::parse(&text, |p| {
            assert_eq!(p, "z3.ring");
            Ok(z3.clone())
        })
        .unwrap();
        assert_eq!(back, ph);
        let bad = text.replace("kernel: 3", "kernel: 3 1");
        assert!(matches!(
            PresentedHomomorphism::parse(&bad, |_| Ok(z3.clone())),
            Err(AttackError::Parse { line: 6, .. })
        ));
    }

    /// Additive span by breadth-first closure.
    fn brute_span(m: u64, dim: usize, gens: &[Vec<u64>]) -> HashSet<Vec<u64>> {
        let mut seen = HashSet::from([vec![0; dim]]);
        let mut queue = VecDeque::from([vec![0; dim]]);
        while let Some(v) = queue.pop_front() {
            for g in gens {
                let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % m).collect();
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn all_vectors(m: u64, dim: usize) -> Vec<Vec<u64>> {
        (0..m.pow(dim as u32))
            .map(|mut k| {
                (0..dim)
                    .map(|_| {
                        let d = k % m;
                        k /= m;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn module_form_matches_brute_force(
            m in prop::sample::select(vec![2u64, 4, 6, 8, 9, 12]),
            dim in 1usize..=3,
            raw in prop::collection::vec(prop::collection::vec(0u64..100, 3), 0..5),
        ) {
            let gens: Vec<Vec<u64>> = raw.iter().map(|g| g[..dim].iter().map(|x| x % m).collect()).collect();
            let mut form = ModuleForm::new(m, dim);
            for g in &gens {
                form.insert(g);
            }
            let span = brute_span(m, dim, &gens);
            prop_assert_eq!(form.cardinality(), span.len() as u128);
            for v in all_vectors(m, dim) {
                prop_assert_eq!(form.contains(&v), span.contains(&v));
            }
        }

        #[test]
        fn pivots_divide_modulus(m in 2u64..40, raw in prop::collection::vec(prop::collection::vec(0u64..1000, 4), 1..6)) {
            let mut form = ModuleForm::new(m, 4);
            for g in &raw {
                form.insert(g);
            }
            for (c, row) in form.rows.iter().enumerate() {
                if let Some(r) = row {
                    prop_assert!(r[c] != 0 && m % r[c] == 0);
                    prop_assert!(r[..c].iter().all(|&x| x == 0));
                }
            }
        }
    }
}
