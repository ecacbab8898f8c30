//! Finite group presentations and concrete finite groups given by Cayley
//! tables, which supply the solved word problem for plaintexts.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::word::{parse_word, Word};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("assigned generators do not generate the group")]
    NotGenerating,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("invalid presentation: {0}")]
    BadPresentation(String),
    #[error("group is not abelian")]
    NotAbelian,
    #[error("group is trivial")]
    NotNonidentity,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `<gens ; relators>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPresentation", into = "RawPresentation")]
pub struct Presentation {
    gens: Vec<String>,
    relators: Vec<Word<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawPresentation {
    gens: Vec<String>,
    relators: Vec<Word<String>>,
}

impl TryFrom<RawPresentation> for Presentation {
    type Error = GroupError;
    fn try_from(raw: RawPresentation) -> Result<Self, GroupError> {
        Presentation::new(raw.gens, raw.relators)
    }
}

impl From<Presentation> for RawPresentation {
    fn from(p: Presentation) -> Self {
        RawPresentation { gens: p.gens, relators: p.relators }
    }
}

impl Presentation {
    pub fn new(gens: Vec<String>, relators: Vec<Word<String>>) -> Result<Self, GroupError> {
        let distinct: BTreeSet<&String> = gens.iter().collect();
        if distinct.len() != gens.len() {
            return Err(GroupError::BadPresentation("duplicate generator name".into()));
        }
        if gens.is_empty() {
            return Err(GroupError::BadPresentation("no generators".into()));
        }
        if relators.is_empty() {
            return Err(GroupError::BadPresentation("no relators".into()));
        }
        for r in &relators {
            if r.is_empty() {
                return Err(GroupError::BadPresentation("empty relator".into()));
            }
            if let Some(l) = r.letters().find(|l| !distinct.contains(l)) {
                return Err(GroupError::UnknownGenerator(l.clone()));
            }
        }
        Ok(Presentation { gens, relators })
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn relators(&self) -> &[Word<String>] {
        &self.relators
    }

    pub fn has_generator(&self, name: &str) -> bool {
        self.gens.iter().any(|g| g == name)
    }

    /// Expand a word over the relator alphabet (letters are relator
    /// indices) into a reduced word over the generators.
    pub fn expand(&self, w: &Word<usize>) -> Word<String> {
        w.substitute::<_, std::convert::Infallible>(|&i| Ok(self.relators[i].clone())).expect("relator index in range")
    }

    /// Text form: `gens: a b` followed by one `rel: ...` line per relator.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let mut gens: Option<(usize, Vec<String>)> = None;
        let mut relators = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| GroupError::Parse { line: line_no, msg };
            if let Some(rest) = line.strip_prefix("gens:") {
                if gens.is_some() {
                    return Err(err("duplicate gens line".into()));
                }
                gens = Some((line_no, rest.split_whitespace().map(String::from).collect()));
            } else if let Some(rest) = line.strip_prefix("rel:") {
                let w = parse_word(rest).map_err(err)?;
                if w.is_empty() {
                    return Err(err("relator reduces to the empty word".into()));
                }
                if let Some((_, g)) = &gens {
                    if let Some(l) = w.letters().find(|l| !g.contains(l)) {
                        return Err(err(format!("unknown generator {l:?}")));
                    }
                }
                relators.push(w);
            } else {
                return Err(err(format!("unrecognised line {line:?}")));
            }
        }
        let (gens_line, gens) = gens.ok_or(GroupError::Parse { line: 0, msg: "missing gens line".into() })?;
        Presentation::new(gens, relators).map_err(|e| GroupError::Parse { line: gens_line, msg: e.to_string() })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("gens: {}\n", self.gens.join(" "));
        for r in &self.relators {
            let _ = writeln!(out, "rel: {r}");
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// A finite group with an explicit multiplication table. Element 0 is the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroup", into = "RawGroup")]
pub struct ConcreteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    assignment: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    assignment: BTreeMap<String, usize>,
}

impl TryFrom<RawGroup> for ConcreteGroup {
    type Error = GroupError;
    fn try_from(raw: RawGroup) -> Result<Self, GroupError> {
        ConcreteGroup::new(raw.labels, raw.table, raw.assignment)
    }
}

impl From<ConcreteGroup> for RawGroup {
    fn from(g: ConcreteGroup) -> Self {
        RawGroup { labels: g.labels, table: g.table, assignment: g.assignment }
    }
}

impl ConcreteGroup {
    /// Validates the group law exhaustively, including associativity.
    pub fn new(
        labels: Vec<String>,
        table: Vec<Vec<usize>>,
        assignment: BTreeMap<String, usize>,
    ) -> Result<Self, GroupError> {
        let n = labels.len();
        let bad = |m: String| Err(GroupError::InvalidTable(m));
        if n == 0 {
            return bad("no elements".into());
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return bad(format!("table must be {n}x{n}"));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return bad("table entry out of range".into());
        }
        if (0..n).any(|j| table[0][j] != j || table[j][0] != j) {
            return bad("element 0 is not the identity".into());
        }
        let mut inverse = vec![usize::MAX; n];
        for i in 0..n {
            match (0..n).find(|&j| table[i][j] == 0) {
                Some(j) if table[j][i] == 0 => inverse[i] = j,
                _ => return bad(format!("element {} has no inverse", labels[i])),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return bad(format!("not associative at ({}, {}, {})", labels[a], labels[b], labels[c]));
                    }
                }
            }
        }
        if let Some((name, _)) = assignment.iter().find(|(_, &i)| i >= n) {
            return bad(format!("generator {name:?} assigned to an out-of-range element"));
        }
        let g = ConcreteGroup { labels, table, inverse, assignment };
        let gens: Vec<usize> = g.assignment.values().copied().collect();
        if g.subgroup(&gens).len() != n {
            return Err(GroupError::NotGenerating);
        }
        Ok(g)
    }

    /// Closure of a set of permutations of `0..degree` under composition
    /// `(p q)(x) = p(q(x))`. Each named permutation becomes a generator.
    pub fn from_permutations(degree: usize, gens: &[(&str, Vec<usize>)]) -> Result<Self, GroupError> {
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(elements[0].clone(), 0);
        let compose = |p: &[usize], q: &[usize]| q.iter().map(|&x| p[x]).collect::<Vec<_>>();
        let mut i = 0;
        while i < elements.len() {
            for (_, g) in gens {
                if g.len() != degree {
                    return Err(GroupError::InvalidTable("permutation of wrong degree".into()));
                }
                let next = compose(&elements[i], g);
                if !index.contains_key(&next) {
                    index.insert(next.clone(), elements.len());
                    elements.push(next);
                }
            }
            i += 1;
        }
        let table = elements.iter().map(|p| elements.iter().map(|q| index[&compose(p, q)]).collect()).collect();
        let labels = elements.iter().map(|p| cycle_notation(p)).collect();
        let assignment = gens.iter().map(|(name, p)| (name.to_string(), index[p])).collect();
        ConcreteGroup::new(labels, table, assignment)
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn pow(&self, a: usize, e: i64) -> usize {
        let base = if e < 0 { self.inv(a) } else { a };
        (0..e.unsigned_abs()).fold(0, |acc, _| self.mul(acc, base))
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
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

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.assignment.get(name).copied()
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Same table, new generator assignment.
    pub fn with_assignment(&self, assignment: BTreeMap<String, usize>) -> Result<Self, GroupError> {
        let n = self.order();
        if assignment.values().any(|&i| i >= n) {
            return Err(GroupError::InvalidTable("generator out of range".into()));
        }
        let gens: Vec<usize> = assignment.values().copied().collect();
        if self.subgroup(&gens).len() != n {
            return Err(GroupError::NotGenerating);
        }
        Ok(ConcreteGroup { assignment, ..self.clone() })
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn subgroup(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([0]);
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Text form: `order:`, optional `labels:`, `table:` with one row per
    /// line, then `gen: name element` lines (element by label or index).
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let mut order: Option<usize> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut gens: Vec<(usize, String, String)> = Vec::new();
        let mut in_table = false;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| GroupError::Parse { line: line_no, msg };
            if let Some(rest) = line.strip_prefix("order:") {
                order = Some(rest.trim().parse().map_err(|_| err("bad order".into()))?);
                in_table = false;
            } else if let Some(rest) = line.strip_prefix("labels:") {
                labels = Some(rest.split_whitespace().map(String::from).collect());
                in_table = false;
            } else if line == "table:" {
                in_table = true;
            } else if let Some(rest) = line.strip_prefix("gen:") {
                in_table = false;
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(err("expected `gen: name element`".into()));
                }
                gens.push((line_no, parts[0].to_string(), parts[1].to_string()));
            } else if in_table {
                let row = line
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err("table rows must be element indices".into()))?;
                rows.push(row);
            } else {
                return Err(err(format!("unrecognised line {line:?}")));
            }
        }
        let n = order.ok_or(GroupError::Parse { line: last_line, msg: "missing order".into() })?;
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(GroupError::Parse { line: last_line, msg: format!("expected {n} labels") });
        }
        let mut assignment = BTreeMap::new();
        for (line, name, elem) in gens {
            let idx = labels
                .iter()
                .position(|l| *l == elem)
                .or_else(|| elem.parse::<usize>().ok().filter(|&i| i < n))
                .ok_or(GroupError::Parse { line, msg: format!("unknown element {elem:?}") })?;
            assignment.insert(name, idx);
        }
        ConcreteGroup::new(labels, rows, assignment)
            .map_err(|e| GroupError::Parse { line: last_line, msg: e.to_string() })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("order: {}\nlabels: {}\ntable:\n", self.order(), self.labels.join(" "));
        for row in &self.table {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        for (name, &idx) in &self.assignment {
            let _ = writeln!(out, "gen: {name} {idx}");
        }
        out
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = p[x];
        }
        let parts: Vec<String> = cycle.iter().map(|c| (c + 1).to_string()).collect();
        let _ = write!(out, "({})", parts.join(","));
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

/// Table product of the assigned generator elements along the word.
pub fn evaluate_word(cg: &ConcreteGroup, w: &Word<String>) -> Result<usize, GroupError> {
    let mut acc = cg.identity();
    for (l, e) in w.syllables() {
        let g = cg.generator(l).ok_or_else(|| GroupError::UnknownGenerator(l.clone()))?;
        acc = cg.mul(acc, cg.pow(g, *e));
    }
    Ok(acc)
}

/// True iff the generator names agree, every relator evaluates to the
/// identity and the generators generate the group.
pub fn verify_presentation(cg: &ConcreteGroup, p: &Presentation) -> bool {
    let names: BTreeSet<&String> = p.gens().iter().collect();
    let assigned: BTreeSet<&String> = cg.assignment().keys().collect();
    if names != assigned {
        return false;
    }
    let relators_hold = p.relators().iter().all(|r| evaluate_word(cg, r).map(|x| x == cg.identity()).unwrap_or(false));
    let gens: Vec<usize> = cg.assignment().values().copied().collect();
    relators_hold && cg.subgroup(&gens).len() == cg.order()
}

/// A uniformly random freely reduced word of `length` letters over the
/// relators and their inverses, together with its expansion over the
/// generators.
pub fn random_relator_word<R: Rng + ?Sized>(
    p: &Presentation,
    rng: &mut R,
    length: usize,
) -> (Word<usize>, Word<String>) {
    let k = p.relators().len();
    let mut w: Word<usize> = Word::empty();
    let mut prev: Option<(usize, i64)> = None;
    for _ in 0..length {
        let (r, e) = loop {
            let r = rng.gen_range(0..k);
            let e = if rng.gen_bool(0.5) { 1 } else { -1 };
            if prev != Some((r, -e)) {
                break (r, e);
            }
        };
        w.push(r, e);
        prev = Some((r, e));
    }
    let expansion = p.expand(&w);
    (w, expansion)
}

/// A shortest word over the assigned generators evaluating to `target`.
pub fn word_for_element(cg: &ConcreteGroup, target: usize) -> Option<Word<String>> {
    let steps: Vec<(String, i64, usize)> =
        cg.assignment().iter().flat_map(|(name, &g)| [(name.clone(), 1, g), (name.clone(), -1, cg.inv(g))]).collect();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; cg.order()];
    let mut seen = vec![false; cg.order()];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        if x == target {
            break;
        }
        for (si, (_, _, g)) in steps.iter().enumerate() {
            let y = cg.mul(x, *g);
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, si));
                queue.push_back(y);
            }
        }
    }
    if !seen.get(target).copied().unwrap_or(false) {
        return None;
    }
    let mut letters = Vec::new();
    let mut x = target;
    while let Some((prev, si)) = parent[x] {
        letters.push((steps[si].0.clone(), steps[si].1));
        x = prev;
    }
    letters.reverse();
    Some(letters.into_iter().collect())
}

/// Cyclic decomposition of a finite abelian group.
#[derive(Clone, Debug)]
pub struct AbelianDecomposition {
    /// Elements `g_1..g_k` with `G = <g_1> x ... x <g_k>`.
    pub generators: Vec<usize>,
    pub orders: Vec<u64>,
    /// Relators `g_i^{ord_i}` and commutators; a redundant second generator
    /// is appended when `k = 1`.
    pub presentation: Presentation,
    /// The input table with generators assigned per `presentation`.
    pub group: ConcreteGroup,
}

/// Repeatedly takes an element of maximal order in the quotient by the
/// subgroup built so far, lifted to an element of the same order.
pub fn abelian_decomposition(cg: &ConcreteGroup) -> Result<AbelianDecomposition, GroupError> {
    if !cg.is_abelian() {
        return Err(GroupError::NotAbelian);
    }
    if cg.order() == 1 {
        return Err(GroupError::NotNonidentity);
    }
    let n = cg.order();
    let mut chosen: Vec<usize> = Vec::new();
    let mut orders: Vec<u64> = Vec::new();
    let mut sub = cg.subgroup(&[]);
    while sub.len() < n {
        let quotient_order = |g: usize| {
            let mut x = g;
            let mut k = 1u64;
            while !sub.contains(&x) {
                x = cg.mul(x, g);
                k += 1;
            }
            k
        };
        let q_orders: Vec<u64> = (0..n).map(quotient_order).collect();
        let d = *q_orders.iter().max().expect("nonempty");
        let g = (0..n)
            .find(|&g| q_orders[g] == d && cg.element_order(g) == d)
            .ok_or_else(|| GroupError::InvalidTable("no lift of maximal quotient order".into()))?;
        chosen.push(g);
        orders.push(d);
        sub = cg.subgroup(&chosen);
    }

    let mut names: Vec<String> = (1..=chosen.len()).map(|i| format!("g{i}")).collect();
    let mut relators: Vec<Word<String>> =
        names.iter().zip(&orders).map(|(g, &o)| Word::power(g.clone(), o as i64)).collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (&names[i], &names[j]);
            relators.push([(a.clone(), 1), (b.clone(), 1), (a.clone(), -1), (b.clone(), -1)].into_iter().collect());
        }
    }
    let mut assignment: BTreeMap<String, usize> = names.iter().cloned().zip(chosen.iter().copied()).collect();
    if chosen.len() == 1 {
        let extra = "g2".to_string();
        assignment.insert(extra.clone(), cg.pow(chosen[0], 2));
        relators.push([(extra.clone(), 1), (names[0].clone(), -2)].into_iter().collect());
        names.push(extra);
    }
    let presentation = Presentation::new(names, relators)?;
    let group = cg.with_assignment(assignment)?;
    Ok(AbelianDecomposition { generators: chosen, orders, presentation, group })
}
