//! Small groups and rings with known presentations, used by tests, the
//! acceptance suite and `grpcrypt write-fixtures`.

use crate::group::{ConcreteGroup, Presentation};
use crate::hom_eval::{MatRingElement, PresentedHomomorphism};
use crate::ring::FiniteRing;
use crate::word::parse_word;

fn presentation(gens: &[&str], relators: &[&str]) -> Presentation {
    Presentation::new(
        gens.iter().map(|g| g.to_string()).collect(),
        relators.iter().map(|r| parse_word(r).expect("fixture relator")).collect(),
    )
    .expect("fixture presentation")
}

/// `S3 = <a, b | a^3, b^2, abab>` acting on `{0, 1, 2}`.
pub fn s3() -> (Presentation, ConcreteGroup) {
    let p = presentation(&["a", "b"], &["a^3", "b^2", "a b a b"]);
    let g = ConcreteGroup::from_permutations(3, &[("a", vec![1, 2, 0]), ("b", vec![1, 0, 2])]).expect("S3");
    (p, g)
}

/// `D4 = <r, s | r^4, s^2, srsr>` acting on the corners of a square.
pub fn d4() -> (Presentation, ConcreteGroup) {
    let p = presentation(&["r", "s"], &["r^4", "s^2", "s r s r"]);
    let g = ConcreteGroup::from_permutations(4, &[("r", vec![1, 2, 3, 0]), ("s", vec![0, 3, 2, 1])]).expect("D4");
    (p, g)
}

/// `Q8 = <i, j | i^4, i^2 j^-2, j^-1 i j i>`.
pub fn q8() -> (Presentation, ConcreteGroup) {
    let p = presentation(&["i", "j"], &["i^4", "i^2 j^-2", "j^-1 i j i"]);
    // element 2b + s is (-1)^s times basis unit b in (1, i, j, k)
    let basis = |x: usize, y: usize| -> (usize, usize) {
        match (x, y) {
            (0, b) | (b, 0) => (0, b),
            (a, b) if a == b => (1, 0),
            (1, 2) => (0, 3),
            (2, 3) => (0, 1),
            (3, 1) => (0, 2),
            (2, 1) => (1, 3),
            (3, 2) => (1, 1),
            (1, 3) => (1, 2),
            _ => unreachable!(),
        }
    };
    let table = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (s, b) = basis(x / 2, y / 2);
                    2 * b + ((x % 2) ^ (y % 2) ^ s)
                })
                .collect()
        })
        .collect();
    let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].map(String::from).to_vec();
    let assignment = [("i".to_string(), 2), ("j".to_string(), 4)].into_iter().collect();
    (p, ConcreteGroup::new(labels, table, assignment).expect("Q8"))
}

/// `Z6 = <a, b | a^6, b a^-2, a b a^-1 b^-1>` with `a = 1`, `b = 2`.
pub fn z6() -> (Presentation, ConcreteGroup) {
    let p = presentation(&["a", "b"], &["a^6", "b a^-2", "a b a^-1 b^-1"]);
    let table = (0..6).map(|x| (0..6).map(|y| (x + y) % 6).collect()).collect();
    let labels = (0..6).map(|x| x.to_string()).collect();
    let assignment = [("a".to_string(), 1), ("b".to_string(), 2)].into_iter().collect();
    (p, ConcreteGroup::new(labels, table, assignment).expect("Z6"))
}

pub fn group_fixtures() -> Vec<(Presentation, ConcreteGroup)> {
    vec![s3(), d4(), q8(), z6()]
}

pub fn group_fixture(name: &str) -> Option<(Presentation, ConcreteGroup)> {
    match name {
        "s3" => Some(s3()),
        "d4" => Some(d4()),
        "q8" => Some(q8()),
        "z6" => Some(z6()),
        _ => None,
    }
}

pub const GROUP_FIXTURE_NAMES: [&str; 4] = ["s3", "d4", "q8", "z6"];

/// `(Z/2)^k`.
pub fn boolean_ring(k: usize) -> FiniteRing {
    (1..k.max(1)).fold(FiniteRing::zmod(2), |acc, _| FiniteRing::product(&acc, &FiniteRing::zmod(2)))
}

/// Rings with nontrivial unit group.
pub fn eligible_rings() -> Vec<(&'static str, FiniteRing)> {
    vec![
        ("z3", FiniteRing::zmod(3)),
        ("z4", FiniteRing::zmod(4)),
        ("z6", FiniteRing::zmod(6)),
        ("f4", FiniteRing::f4()),
        ("z2xz3", FiniteRing::product(&FiniteRing::zmod(2), &FiniteRing::zmod(3))),
    ]
}

/// Direct sums of copies of `Z/2`.
pub fn ineligible_rings() -> Vec<(&'static str, FiniteRing)> {
    vec![("z2", boolean_ring(1)), ("z2^2", boolean_ring(2)), ("z2^3", boolean_ring(3))]
}

pub fn ring_fixture(name: &str) -> Option<FiniteRing> {
    eligible_rings().into_iter().chain(ineligible_rings()).find(|(n, _)| *n == name).map(|(_, r)| r)
}

/// A homomorphism `f: A -> R` with `A` generated by `ph.algebra`, together
/// with `f` computed directly from the matrix entries.
pub struct AttackFixture {
    pub name: &'static str,
    pub ph: PresentedHomomorphism,
    pub truth: Box<dyn Fn(&MatRingElement) -> usize>,
}

fn mat(n: usize, m: u64, e: &[i64]) -> MatRingElement {
    MatRingElement::new(n, m, e).expect("fixture matrix")
}

fn unit(n: usize, m: u64, i: usize, j: usize) -> MatRingElement {
    MatRingElement::unit(n, m, i, j)
}

fn attack(
    name: &'static str,
    (n, m): (usize, u64),
    algebra: Vec<MatRingElement>,
    kernel: Vec<MatRingElement>,
    transversal: Vec<(MatRingElement, usize)>,
    ring: FiniteRing,
    truth: impl Fn(&MatRingElement) -> usize + 'static,
) -> AttackFixture {
    let (x, images) = transversal.into_iter().unzip();
    let ph = PresentedHomomorphism::new(n, m, kernel, x, images, ring).expect("fixture homomorphism");
    AttackFixture { name, ph: ph.with_algebra(algebra), truth: Box::new(truth) }
}

/// Upper triangular 2x2 matrices over `Z_12` onto `Z_12` by the top-left entry.
pub fn upper_triangular_attack() -> PresentedHomomorphism {
    attack_fixtures().into_iter().find(|f| f.name == "upper-z12").expect("listed").ph
}

pub fn attack_fixtures() -> Vec<AttackFixture> {
    let upper12 = || vec![unit(2, 12, 0, 0), unit(2, 12, 0, 1), unit(2, 12, 1, 1)];
    let upper3_z2: Vec<MatRingElement> =
        [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)].iter().map(|&(i, j)| unit(3, 2, i, j)).collect();
    vec![
        attack(
            "z6-mod3",
            (1, 6),
            vec![mat(1, 6, &[1])],
            vec![mat(1, 6, &[3])],
            (0..3).map(|a| (mat(1, 6, &[a]), a as usize)).collect(),
            FiniteRing::zmod(3),
            |a| (a.get(0, 0) % 3) as usize,
        ),
        attack(
            "z4-mod2",
            (1, 4),
            vec![],
            vec![mat(1, 4, &[2])],
            (0..2).map(|a| (mat(1, 4, &[a]), a as usize)).collect(),
            FiniteRing::zmod(2),
            |a| (a.get(0, 0) % 2) as usize,
        ),
        attack(
            "upper-z12",
            (2, 12),
            upper12(),
            vec![unit(2, 12, 0, 1), unit(2, 12, 1, 1)],
            (0..12).map(|a| (unit(2, 12, 0, 0).scale(a), a as usize)).collect(),
            FiniteRing::zmod(12),
            |a| a.get(0, 0) as usize,
        ),
        attack(
            "upper-z12-mod4",
            (2, 12),
            upper12(),
            vec![unit(2, 12, 0, 1), unit(2, 12, 1, 1), unit(2, 12, 0, 0).scale(4)],
            (0..4).map(|a| (unit(2, 12, 0, 0).scale(a), a as usize)).collect(),
            FiniteRing::zmod(4),
            |a| (a.get(0, 0) % 4) as usize,
        ),
        attack(
            "dual-numbers-z3",
            (2, 3),
            vec![unit(2, 3, 0, 1)],
            vec![unit(2, 3, 0, 1)],
            (0..3).map(|a| (MatRingElement::identity(2, 3).scale(a), a as usize)).collect(),
            FiniteRing::zmod(3),
            |a| a.get(0, 0) as usize,
        ),
        attack(
            "upper3-z2",
            (3, 2),
            upper3_z2,
            vec![unit(3, 2, 0, 1), unit(3, 2, 0, 2), unit(3, 2, 1, 2), unit(3, 2, 1, 1)],
            (0..4u64)
                .map(|k| (unit(3, 2, 0, 0).scale(k / 2).add(&unit(3, 2, 2, 2).scale(k % 2)), k as usize))
                .collect(),
            boolean_ring(2),
            |a| (a.get(0, 0) * 2 + a.get(2, 2)) as usize,
        ),
        attack(
            // t acts as the companion matrix of t^2 + t + 1
            "f4-in-mat2-z2",
            (2, 2),
            vec![mat(2, 2, &[0, 1, 1, 1])],
            vec![],
            (0..4i64).map(|k| (mat(2, 2, &[k & 1, k >> 1, k >> 1, (k & 1) ^ (k >> 1)]), k as usize)).collect(),
            FiniteRing::f4(),
            |a| (a.get(0, 0) + 2 * a.get(0, 1)) as usize,
        ),
        attack(
            "diag-z6",
            (2, 6),
            vec![unit(2, 6, 0, 0), unit(2, 6, 1, 1)],
            vec![unit(2, 6, 0, 0)],
            (0..6).map(|d| (unit(2, 6, 1, 1).scale(d), d as usize)).collect(),
            FiniteRing::zmod(6),
            |a| a.get(1, 1) as usize,
        ),
    ]
}
