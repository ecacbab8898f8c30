//! Finite commutative rings with identity given by addition and
//! multiplication tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::group::ConcreteGroup;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRing", into = "RawRing")]
pub struct FiniteRing {
    labels: Vec<String>,
    add: Vec<Vec<usize>>,
    mul: Vec<Vec<usize>>,
    zero: usize,
    one: usize,
    neg: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawRing {
    labels: Vec<String>,
    add: Vec<Vec<usize>>,
    mul: Vec<Vec<usize>>,
    zero: usize,
    one: usize,
}

impl TryFrom<RawRing> for FiniteRing {
    type Error = RingError;
    fn try_from(r: RawRing) -> Result<Self, RingError> {
        FiniteRing::new(r.labels, r.add, r.mul, r.zero, r.one)
    }
}

impl From<FiniteRing> for RawRing {
    fn from(r: FiniteRing) -> Self {
        RawRing { labels: r.labels, add: r.add, mul: r.mul, zero: r.zero, one: r.one }
    }
}

impl FiniteRing {
    /// Checks every ring axiom exhaustively.
    pub fn new(
        labels: Vec<String>,
        add: Vec<Vec<usize>>,
        mul: Vec<Vec<usize>>,
        zero: usize,
        one: usize,
    ) -> Result<Self, RingError> {
        let n = labels.len();
        let bad = |m: &str| Err(RingError::InvalidRing(m.to_string()));
        if n == 0 {
            return bad("no elements");
        }
        for t in [&add, &mul] {
            if t.len() != n || t.iter().any(|r| r.len() != n) || t.iter().flatten().any(|&x| x >= n) {
                return bad("tables must be square with in-range entries");
            }
        }
        if zero >= n || one >= n {
            return bad("zero/one out of range");
        }
        let mut neg = vec![usize::MAX; n];
        for a in 0..n {
            if add[zero][a] != a || mul[one][a] != a {
                return bad("zero or one is not an identity");
            }
            match (0..n).find(|&b| add[a][b] == zero) {
                Some(b) => neg[a] = b,
                None => return bad("missing additive inverse"),
            }
            for b in 0..n {
                if add[a][b] != add[b][a] || mul[a][b] != mul[b][a] {
                    return bad("not commutative");
                }
                for c in 0..n {
                    if add[add[a][b]][c] != add[a][add[b][c]] {
                        return bad("addition not associative");
                    }
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return bad("multiplication not associative");
                    }
                    if mul[a][add[b][c]] != add[mul[a][b]][mul[a][c]] {
                        return bad("not distributive");
                    }
                }
            }
        }
        Ok(FiniteRing { labels, add, mul, zero, one, neg })
    }

    /// `Z/m`, elements labelled `0..m-1`.
    pub fn zmod(m: usize) -> Self {
        assert!(m >= 1);
        let labels = (0..m).map(|i| i.to_string()).collect();
        let add = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        let mul = (0..m).map(|a| (0..m).map(|b| (a * b) % m).collect()).collect();
        FiniteRing::new(labels, add, mul, 0, 1 % m).expect("Z/m is a ring")
    }

    /// The field with four elements as `F2[t]/(t^2 + t + 1)`; element
    /// `c0 + c1 t` has index `c0 + 2 c1`.
    pub fn f4() -> Self {
        let labels = ["0", "1", "t", "t+1"].map(String::from).to_vec();
        let add = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        let mul = (0..4)
            .map(|a| {
                (0..4)
                    .map(|b| {
                        // (a0 + a1 t)(b0 + b1 t) with t^2 = t + 1
                        let (a0, a1, b0, b1) = (a & 1, a >> 1, b & 1, b >> 1);
                        let t2 = a1 & b1;
                        let c0 = (a0 & b0) ^ t2;
                        let c1 = (a0 & b1) ^ (a1 & b0) ^ t2;
                        c0 | (c1 << 1)
                    })
                    .collect()
            })
            .collect();
        FiniteRing::new(labels, add, mul, 0, 1).expect("F4 is a field")
    }

    /// Direct product, element `(a, b)` at index `a * |S| + b`.
    pub fn product(r: &FiniteRing, s: &FiniteRing) -> Self {
        let (nr, ns) = (r.size(), s.size());
        let idx = |a: usize, b: usize| a * ns + b;
        let labels = (0..nr * ns).map(|i| format!("({},{})", r.label(i / ns), s.label(i % ns))).collect();
        let table = |f: &dyn Fn(usize, usize, usize, usize) -> usize| -> Vec<Vec<usize>> {
            (0..nr * ns).map(|x| (0..nr * ns).map(|y| f(x / ns, x % ns, y / ns, y % ns)).collect()).collect()
        };
        let add = table(&|a1, b1, a2, b2| idx(r.add(a1, a2), s.add(b1, b2)));
        let mul = table(&|a1, b1, a2, b2| idx(r.mul(a1, a2), s.mul(b1, b2)));
        FiniteRing::new(labels, add, mul, idx(r.zero, s.zero), idx(r.one, s.one)).expect("product of rings is a ring")
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `k * a` by repeated addition.
    pub fn scale(&self, k: u64, a: usize) -> usize {
        (0..k).fold(self.zero, |acc, _| self.add(acc, a))
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        (0..self.size()).find(|&b| self.mul(a, b) == self.one)
    }

    pub fn sum(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(self.zero, |acc, x| self.add(acc, x))
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Element by label, falling back to a decimal index.
    pub fn element(&self, s: &str) -> Option<usize> {
        self.index_of(s).or_else(|| s.parse::<usize>().ok().filter(|&i| i < self.size()))
    }

    pub fn units(&self) -> Vec<usize> {
        let mut units: Vec<usize> = (0..self.size()).filter(|&a| self.inverse(a).is_some()).collect();
        // identity first
        units.sort_by_key(|&u| (u != self.one, u));
        units
    }

    /// Text form: `format: 1`, `size:`, optional `labels:`, `zero:`, `one:`,
    /// then `add:` and `mul:` each followed by `size` rows of indices.
    pub fn parse(text: &str) -> Result<Self, RingError> {
        let mut size: Option<usize> = None;
        let mut labels: Option<Vec<String>> = None;
        let (mut zero, mut one) = (None, None);
        let mut add: Vec<Vec<usize>> = Vec::new();
        let mut mul: Vec<Vec<usize>> = Vec::new();
        let mut section: Option<bool> = None; // Some(true) = add rows
        let mut last = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| RingError::Parse { line: line_no, msg: msg.to_string() };
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| err("expected a number"));
            if let Some(rest) = line.strip_prefix("format:") {
                if rest.trim() != "1" {
                    return Err(err("unsupported format version"));
                }
            } else if let Some(rest) = line.strip_prefix("size:") {
                size = Some(num(rest)?);
            } else if let Some(rest) = line.strip_prefix("labels:") {
                labels = Some(rest.split_whitespace().map(String::from).collect());
            } else if let Some(rest) = line.strip_prefix("zero:") {
                zero = Some(num(rest)?);
            } else if let Some(rest) = line.strip_prefix("one:") {
                one = Some(num(rest)?);
            } else if line == "add:" {
                section = Some(true);
            } else if line == "mul:" {
                section = Some(false);
            } else if let Some(is_add) = section {
                let row = line
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err("table rows must be element indices"))?;
                if is_add {
                    add.push(row)
                } else {
                    mul.push(row)
                }
            } else {
                return Err(err("unrecognised line"));
            }
        }
        let missing = |what: &str| RingError::Parse { line: last, msg: format!("missing {what}") };
        let n = size.ok_or_else(|| missing("size"))?;
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(RingError::Parse { line: last, msg: format!("expected {n} labels") });
        }
        FiniteRing::new(labels, add, mul, zero.ok_or_else(|| missing("zero"))?, one.ok_or_else(|| missing("one"))?)
            .map_err(|e| RingError::Parse { line: last, msg: e.to_string() })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "format: 1\nsize: {}\nlabels: {}\nzero: {}\none: {}\n",
            self.size(),
            self.labels.join(" "),
            self.zero,
            self.one
        );
        for (name, t) in [("add", &self.add), ("mul", &self.mul)] {
            let _ = writeln!(out, "{name}:");
            for row in t {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
        out
    }
}

/// The multiplicative group of a ring with its embedding back into the ring.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    pub group: ConcreteGroup,
    /// `elements[i]` is the ring element of group element `i`.
    pub elements: Vec<usize>,
}

/// Units under the multiplication table, identity first. Every non-identity
/// unit is assigned a generator `u1, u2, ...`.
pub fn unit_group(r: &FiniteRing) -> UnitGroup {
    let elements = r.units();
    let pos: BTreeMap<usize, usize> = elements.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let table = elements.iter().map(|&a| elements.iter().map(|&b| pos[&r.mul(a, b)]).collect()).collect();
    let labels = elements.iter().map(|&u| r.label(u).to_string()).collect();
    let assignment = (1..elements.len()).map(|i| (format!("u{i}"), i)).collect();
    let group = ConcreteGroup::new(labels, table, assignment).expect("units form a group");
    UnitGroup { group, elements }
}

/// A ring admits the group-ring scheme iff its unit group is nontrivial,
/// i.e. it is not a direct sum of copies of `Z/2`.
pub fn ring_eligible(r: &FiniteRing) -> bool {
    r.units().len() >= 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boolean(k: usize) -> FiniteRing {
        (1..k).fold(FiniteRing::zmod(2), |acc, _| FiniteRing::product(&acc, &FiniteRing::zmod(2)))
    }

    #[test]
    fn eligibility() {
        assert!(!ring_eligible(&FiniteRing::zmod(2)));
        assert!(!ring_eligible(&boolean(2)));
        assert!(!ring_eligible(&boolean(3)));
        assert!(ring_eligible(&FiniteRing::zmod(4)));
        assert!(ring_eligible(&FiniteRing::zmod(3)));
        assert!(ring_eligible(&FiniteRing::f4()));
        assert!(ring_eligible(&FiniteRing::product(&FiniteRing::zmod(2), &FiniteRing::zmod(3))));
    }

    #[test]
    fn unit_groups() {
        let u = unit_group(&FiniteRing::zmod(3));
        assert_eq!(u.group.order(), 2);
        assert_eq!(u.elements, vec![1, 2]);
        let u = unit_group(&FiniteRing::f4());
        assert_eq!(u.group.order(), 3);
        assert!(u.group.is_abelian());
        assert!((1..3).all(|x| u.group.element_order(x) == 3));
        let u = unit_group(&FiniteRing::zmod(2));
        assert_eq!(u.group.order(), 1);
        let u = unit_group(&boolean(2));
        assert_eq!(u.elements.len(), 1);
        let r = FiniteRing::zmod(4);
        let u = unit_group(&r);
        assert_eq!(u.elements.iter().map(|&e| r.label(e)).collect::<Vec<_>>(), vec!["1", "3"]);
    }

    #[test]
    fn f4_is_a_field() {
        let f = FiniteRing::f4();
        assert!((1..4).all(|a| f.inverse(a).is_some()));
        assert_eq!(f.mul(2, 2), 3); // t^2 = t + 1
    }

    #[test]
    fn rejects_non_rings() {
        // Z/4 addition with a multiplication that is not distributive
        let add: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        let mut mul: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a * b) % 4).collect()).collect();
        mul[2][2] = 2;
        let labels: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        assert!(FiniteRing::new(labels, add, mul, 0, 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        for r in [FiniteRing::zmod(6), FiniteRing::f4(), boolean(2)] {
            assert_eq!(FiniteRing::parse(&r.to_text()).unwrap(), r);
        }
        let err =
            FiniteRing::parse("format: 1\nsize: 2\nzero: 0\none: 1\nadd:\n0 1\n1 0\nmul:\n0 0\n0 q\n").unwrap_err();
        assert!(matches!(err, RingError::Parse { line: 10, .. }));
        assert!(FiniteRing::parse("format: 2\n").is_err());
    }
}
