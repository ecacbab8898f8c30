//! Representation algorithms for the free groups `<A_n, B_n>` and
//! `G(n, S) = <A_n^{-s} B_n A_n^s : s in S>` inside SL2(Z).
//!
//! [`pingpong_decompose`] recovers the `{A, B}`-word of a matrix by tracking
//! the orbits of `1/2` (inside the unit disk) and `2` (outside it) under
//! the projective action; [`conjugate_rewrite`] rewrites an `{A, B}`-word
//! over the conjugate basis. [`x_representation`] composes the two. The
//! breadth-first [`BfsOracle`] is an independent, exponential-time check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{classify_fraction, Mat2Z, ProjectivePoint, Region};
use crate::word::{Letter, Word};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("n must be at least 2, got {0}")]
    InvalidModulus(i64),
    #[error("basis index set is empty")]
    EmptyBasis,
    #[error("duplicate basis index {0}")]
    DuplicateBasisIndex(i64),
    #[error("point lies on the unit circle")]
    BoundaryPoint,
    #[error("matrix is not in the free group <A_n, B_n>")]
    NotInFreeGroup,
    #[error("matrix is not in the group generated by the conjugate basis")]
    NotInGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AB {
    A,
    B,
}

impl fmt::Display for AB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AB::A => "A",
            AB::B => "B",
        })
    }
}

/// Parameters of the ping-pong decomposition. The probe points are fixed
/// at `1/2` and `2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PingPongParams {
    n: i64,
    max_iterations: Option<usize>,
}

impl PingPongParams {
    pub fn new(n: i64) -> Result<Self, RepError> {
        if n < 2 {
            return Err(RepError::InvalidModulus(n));
        }
        Ok(PingPongParams { n, max_iterations: None })
    }

    /// Override the default cap of `4 * (entry bit size) + 8` iterations.
    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = Some(cap);
        self
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    fn cap_for(&self, m: &Mat2Z) -> usize {
        self.max_iterations.unwrap_or_else(|| 4 * m.entry_bit_size() as usize + 8)
    }
}

/// `X(n, S) = { A_n^{-s} B_n A_n^s : s in S }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugateBasis {
    n: i64,
    s: BTreeSet<i64>,
}

impl ConjugateBasis {
    pub fn new(n: i64, s: &[i64]) -> Result<Self, RepError> {
        if n < 2 {
            return Err(RepError::InvalidModulus(n));
        }
        if s.is_empty() {
            return Err(RepError::EmptyBasis);
        }
        let mut set = BTreeSet::new();
        for &x in s {
            if !set.insert(x) {
                return Err(RepError::DuplicateBasisIndex(x));
            }
        }
        Ok(ConjugateBasis { n, s: set })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn indices(&self) -> &BTreeSet<i64> {
        &self.s
    }

    /// `x_s^e = A^{-s} B^e A^s`; `s` need not belong to the basis.
    pub fn letter_power(&self, s: i64, e: i64) -> Mat2Z {
        let n = BigInt::from(self.n);
        let shift = BigInt::from(s) * &n;
        let m = &Mat2Z::upper(-&shift) * &Mat2Z::lower(BigInt::from(e) * &n);
        &m * &Mat2Z::upper(shift)
    }

    pub fn basis_matrix(&self, s: i64) -> Mat2Z {
        self.letter_power(s, 1)
    }

    pub fn basis_matrices(&self) -> BTreeMap<i64, Mat2Z> {
        self.s.iter().map(|&s| (s, self.basis_matrix(s))).collect()
    }

    /// Product of basis powers along an `X(n, S)`-word.
    pub fn word_matrix(&self, w: &Word<i64>) -> Mat2Z {
        w.syllables().iter().fold(Mat2Z::identity(), |acc, &(s, e)| &acc * &self.letter_power(s, e))
    }
}

/// Expand `X(n, S)`-letters into the `{A, B}`-word `A^{-s} B^e A^s`.
pub fn expand_conjugates(w: &Word<i64>) -> Word<AB> {
    w.syllables().iter().flat_map(|&(s, e)| [(AB::A, -s), (AB::B, e), (AB::A, s)]).collect()
}

/// Matrix of an `{A, B}`-word for the given `n`.
pub fn ab_word_matrix(w: &Word<AB>, n: i64) -> Mat2Z {
    let n = BigInt::from(n);
    w.syllables().iter().fold(Mat2Z::identity(), |acc, &(l, e)| {
        let t = BigInt::from(e) * &n;
        let step = match l {
            AB::A => Mat2Z::upper(t),
            AB::B => Mat2Z::lower(t),
        };
        &acc * &step
    })
}

/// Unique integer `k` with `|num/den + k n| < 1`, if any (`den != 0`).
fn translation_into_disk(num: &BigInt, den: &BigInt, n: i64) -> Option<BigInt> {
    let (num, den) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
    let step = &den * n;
    // -den < num + k*step < den
    let k = (-&den - &num).div_floor(&step) + 1;
    if &num + &k * &step < den {
        Some(k)
    } else {
        None
    }
}

/// The ping-pong step for a point strictly inside or strictly outside the
/// unit disk: the `A`-power moving an exterior point into the disk, or the
/// `B`-power moving a disk point outside it.
pub fn compute_k(z: &ProjectivePoint, n: i64) -> Result<Option<(AB, BigInt)>, RepError> {
    if n < 2 {
        return Err(RepError::InvalidModulus(n));
    }
    match z {
        ProjectivePoint::Infinity => Ok(None),
        ProjectivePoint::Finite(q) => step_for_fraction(q.numer(), q.denom(), n),
    }
}

fn step_for_fraction(num: &BigInt, den: &BigInt, n: i64) -> Result<Option<(AB, BigInt)>, RepError> {
    if den.is_zero() {
        return Ok(None);
    }
    match classify_fraction(num, den) {
        Region::Boundary => Err(RepError::BoundaryPoint),
        Region::Exterior => Ok(translation_into_disk(num, den, n).map(|k| (AB::A, k))),
        Region::Disk => {
            if num.is_zero() {
                return Ok(None);
            }
            // B^k z = 1 / (1/z + kn), exterior iff |1/z + kn| < 1
            let Some(k) = translation_into_disk(den, num, n) else {
                return Ok(None);
            };
            let image_den = &k * n * num + den;
            let exterior = image_den.is_zero() || classify_fraction(num, &image_den) == Region::Exterior;
            Ok(exterior.then_some((AB::B, k)))
        }
    }
}

/// Result of [`pingpong_decompose`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub word: Word<AB>,
    /// Number of executed ping-pong steps.
    pub iterations: usize,
}

struct Tracker {
    state: Mat2Z,
    word: Word<AB>,
    probe: (BigInt, BigInt),
    alive: bool,
}

impl Tracker {
    fn new(m: &Mat2Z, num: i64, den: i64) -> Self {
        Tracker { state: m.clone(), word: Word::empty(), probe: (BigInt::from(num), BigInt::from(den)), alive: true }
    }

    fn step(&mut self, n: i64) {
        let (p, q) = &self.probe;
        let num = &self.state.m11 * p + &self.state.m12 * q;
        let den = &self.state.m21 * p + &self.state.m22 * q;
        let step = match step_for_fraction(&num, &den, n) {
            Ok(Some((side, k))) => k.to_i64().map(|k| (side, k)),
            _ => None,
        };
        let Some((side, k)) = step else {
            self.alive = false;
            return;
        };
        let t = BigInt::from(k) * n;
        match side {
            AB::A => self.state.left_mul_upper(&t),
            AB::B => self.state.left_mul_lower(&t),
        }
        // M = word * state is kept invariant
        self.word.push(side, -k);
        if self.state.is_neg_identity() {
            self.alive = false;
        }
    }
}

/// `{A_n, B_n}`-representation of a determinant-1 matrix.
pub fn pingpong_decompose(m: &Mat2Z, params: &PingPongParams) -> Result<Decomposition, RepError> {
    if !m.det().is_one() {
        return Err(RepError::NotInFreeGroup);
    }
    let cap = params.cap_for(m);
    let mut inner = Tracker::new(m, 1, 2);
    let mut outer = Tracker::new(m, 2, 1);
    let mut iterations = 0;
    loop {
        if inner.alive && inner.state.is_identity() {
            return Ok(Decomposition { word: inner.word, iterations });
        }
        if outer.alive && outer.state.is_identity() {
            return Ok(Decomposition { word: outer.word, iterations });
        }
        if !(inner.alive || outer.alive) || iterations >= cap {
            return Err(RepError::NotInFreeGroup);
        }
        if inner.alive {
            inner.step(params.n);
        }
        if outer.alive {
            outer.step(params.n);
        }
        iterations += 1;
    }
}

/// Rewrite a reduced `{A, B}`-word over `{A^{-s} B A^s : s in S}`, or
/// `None` when the word is not in that subgroup.
///
/// Peels `A^a B^b` off the front, emits `x_{-a}^b` and carries `A^a` into
/// the next `A`-syllable. Rejects when `-a` is not in `S` or when no
/// `B`-syllable follows.
pub fn conjugate_rewrite(w: &Word<AB>, s: &BTreeSet<i64>) -> Option<Word<i64>> {
    let syl = w.syllables();
    let mut out = Word::empty();
    let mut carry: i64 = 0;
    let mut i = 0;
    loop {
        let mut a = carry;
        if let Some(&(AB::A, c)) = syl.get(i) {
            a = a.checked_add(c)?;
            i += 1;
        }
        let b = match syl.get(i) {
            Some(&(AB::B, b)) => {
                i += 1;
                b
            }
            _ => 0,
        };
        if a == 0 && b == 0 && i >= syl.len() {
            return Some(out);
        }
        if !s.contains(&a.checked_neg()?) || b == 0 {
            return None;
        }
        out.push(-a, b);
        carry = a;
    }
}

/// Full solution of the representation problem for `G(n, S)` together with
/// the intermediate `{A, B}`-word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XRepresentation {
    pub word: Word<i64>,
    pub ab_word: Word<AB>,
    pub iterations: usize,
}

pub fn x_representation_detailed(m: &Mat2Z, cb: &ConjugateBasis) -> Result<XRepresentation, RepError> {
    let params = PingPongParams::new(cb.n)?;
    let d = pingpong_decompose(m, &params).map_err(|_| RepError::NotInGroup)?;
    let word = conjugate_rewrite(&d.word, &cb.s).ok_or(RepError::NotInGroup)?;
    Ok(XRepresentation { word, ab_word: d.word, iterations: d.iterations })
}

/// `X(n, S)`-representation of `m`.
pub fn x_representation(m: &Mat2Z, cb: &ConjugateBasis) -> Result<Word<i64>, RepError> {
    x_representation_detailed(m, cb).map(|r| r.word)
}

/// Breadth-first table of all reduced words with at most `max_syllables`
/// syllables and exponents in `[-max_exponent, max_exponent]` over a set
/// of named matrices, keyed by their product. The first word found for a
/// matrix is kept, so lookups return a shortest word by syllable count.
pub struct BfsOracle<L: Letter> {
    table: HashMap<Mat2Z, Word<L>>,
}

impl<L: Letter> BfsOracle<L> {
    pub fn build(gens: &BTreeMap<L, Mat2Z>, max_syllables: usize, max_exponent: i64) -> Self {
        Self::search(gens, max_syllables, max_exponent, None)
    }

    fn search(gens: &BTreeMap<L, Mat2Z>, max_syllables: usize, max_exponent: i64, target: Option<&Mat2Z>) -> Self {
        let powers: Vec<(L, i64, Mat2Z)> = gens
            .iter()
            .flat_map(|(l, m)| {
                (-max_exponent..=max_exponent)
                    .filter(|&e| e != 0)
                    .filter_map(move |e| m.pow(e).ok().map(|p| (l.clone(), e, p)))
            })
            .collect();
        let mut table = HashMap::new();
        table.insert(Mat2Z::identity(), Word::empty());
        let mut frontier: Vec<(Mat2Z, Word<L>)> = vec![(Mat2Z::identity(), Word::empty())];
        for _ in 0..max_syllables {
            if target.is_some_and(|t| table.contains_key(t)) {
                break;
            }
            let mut next = Vec::new();
            for (m, w) in &frontier {
                let last = w.syllables().last().map(|(l, _)| l);
                for (l, e, p) in &powers {
                    if last == Some(l) {
                        continue;
                    }
                    let prod = m * p;
                    if !table.contains_key(&prod) {
                        let mut nw = w.clone();
                        nw.push(l.clone(), *e);
                        table.insert(prod.clone(), nw.clone());
                        next.push((prod, nw));
                    }
                }
            }
            frontier = next;
        }
        BfsOracle { table }
    }

    pub fn lookup(&self, m: &Mat2Z) -> Option<&Word<L>> {
        self.table.get(m)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Shortest word over `gens` (syllable count at most `max_syllables`,
/// exponents bounded by `max_exponent`) whose product is `m`.
pub fn brute_force_representation<L: Letter>(
    m: &Mat2Z,
    gens: &BTreeMap<L, Mat2Z>,
    max_syllables: usize,
    max_exponent: i64,
) -> Option<Word<L>> {
    BfsOracle::search(gens, max_syllables, max_exponent, Some(m)).lookup(m).cloned()
}
