//! Public-key encryption for a finitely presented group `H` over the free
//! subgroup `G(n, S)` of SL2(Z).
//!
//! Each generator `h` gets a secret basis letter `x_h = x_{s_h}` and a mask
//! `r_h`, a random word in the relators. The public image is
//! `y_h = x_h * r_h(x)`, which maps to `h` under `G -> H`. Ciphertexts are
//! `M_r * M_h` where `M_h` multiplies public images along the plaintext
//! and `M_r` multiplies public images along a fresh relator word.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::Mat2Z;
use crate::group::{
    evaluate_word, random_relator_word, verify_presentation, word_for_element, ConcreteGroup, Presentation,
};
use crate::rep_solver::{x_representation, ConjugateBasis, RepError};
use crate::word::Word;

pub const FORMAT_VERSION: u32 = 1;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("at least two generators are required")]
    TooFewGenerators,
    #[error("the group is trivial")]
    IdentityGroup,
    #[error("the concrete group does not satisfy the presentation")]
    PresentationMismatch,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("ciphertext is not in the group generated by the secret basis")]
    NotInGroup,
    #[error("basis index {0} has no generator")]
    UnmappedBasisLetter(i64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed key or ciphertext: {0}")]
    Format(String),
}

/// Key generation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyParams {
    /// `n` and the elements of `S` are drawn with magnitude at most `2^lambda`.
    pub lambda: u32,
    /// Inclusive range of relator letters per mask.
    pub mask_len: (usize, usize),
}

impl Default for KeyParams {
    fn default() -> Self {
        KeyParams { lambda: 16, mask_len: (1, 3) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    cb: ConjugateBasis,
    assignment: BTreeMap<String, i64>,
    masks: BTreeMap<String, Word<usize>>,
    by_index: BTreeMap<i64, String>,
}

/// A public pair added by [`extend_public_key`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraPair {
    pub name: String,
    pub matrix: Mat2Z,
    pub element: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPublicKey", into = "RawPublicKey")]
pub struct PublicKey {
    presentation: Presentation,
    group: ConcreteGroup,
    generators: BTreeMap<String, Mat2Z>,
    extra: Vec<ExtraPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub m: Mat2Z,
}

impl SecretKey {
    pub fn basis(&self) -> &ConjugateBasis {
        &self.cb
    }

    pub fn n(&self) -> i64 {
        self.cb.n()
    }

    pub fn assignment(&self) -> &BTreeMap<String, i64> {
        &self.assignment
    }

    pub fn masks(&self) -> &BTreeMap<String, Word<usize>> {
        &self.masks
    }

    /// Secret basis matrix `x_h`.
    pub fn secret_matrix(&self, h: &str) -> Option<Mat2Z> {
        self.assignment.get(h).map(|&s| self.cb.basis_matrix(s))
    }

    fn from_parts(
        n: i64,
        assignment: BTreeMap<String, i64>,
        masks: BTreeMap<String, Word<usize>>,
    ) -> Result<Self, SchemeError> {
        let s: Vec<i64> = assignment.values().copied().collect();
        let cb = ConjugateBasis::new(n, &s).map_err(|e| SchemeError::Format(e.to_string()))?;
        if masks.keys().ne(assignment.keys()) {
            return Err(SchemeError::Format("masks and assignment name different generators".into()));
        }
        let by_index = assignment.iter().map(|(h, &s)| (s, h.clone())).collect();
        Ok(SecretKey { cb, assignment, masks, by_index })
    }
}

impl PublicKey {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn group(&self) -> &ConcreteGroup {
        &self.group
    }

    pub fn generators(&self) -> &BTreeMap<String, Mat2Z> {
        &self.generators
    }

    pub fn extra(&self) -> &[ExtraPair] {
        &self.extra
    }

    /// Public matrix and group element for a plaintext letter.
    pub fn lookup(&self, name: &str) -> Option<(&Mat2Z, usize)> {
        if let Some(m) = self.generators.get(name) {
            return Some((m, self.group.generator(name)?));
        }
        self.extra.iter().find(|p| p.name == name).map(|p| (&p.matrix, p.element))
    }

    /// Group element a plaintext word denotes, extra letters included.
    pub fn evaluate(&self, w: &Word<String>) -> Result<usize, SchemeError> {
        let g = &self.group;
        w.syllables().iter().try_fold(g.identity(), |acc, (l, e)| {
            let (_, x) = self.lookup(l).ok_or_else(|| SchemeError::UnknownGenerator(l.clone()))?;
            Ok(g.mul(acc, g.pow(x, *e)))
        })
    }

    fn public_word_matrix(&self, w: &Word<String>) -> Result<Mat2Z, SchemeError> {
        let mut acc = Mat2Z::identity();
        for (l, e) in w.syllables() {
            let (m, _) = self.lookup(l).ok_or_else(|| SchemeError::UnknownGenerator(l.clone()))?;
            acc = &acc * &m.pow(*e).expect("public matrices are unimodular");
        }
        Ok(acc)
    }
}

/// Samples `n`, `S`, the generator assignment and the masks.
pub fn keygen<R: Rng + ?Sized>(
    p: &Presentation,
    cg: &ConcreteGroup,
    params: &KeyParams,
    rng: &mut R,
) -> Result<(PublicKey, SecretKey), SchemeError> {
    if p.gens().len() < 2 {
        return Err(SchemeError::TooFewGenerators);
    }
    if cg.order() < 2 {
        return Err(SchemeError::IdentityGroup);
    }
    if !verify_presentation(cg, p) || cg.assignment().keys().ne(p.gens().iter()) {
        return Err(SchemeError::PresentationMismatch);
    }
    let (lo, hi) = params.mask_len;
    if !(1..=62).contains(&params.lambda) || lo > hi {
        return Err(SchemeError::InvalidParams(format!(
            "lambda must be in 1..=62 and the mask range nonempty, got {} and {lo}..={hi}",
            params.lambda
        )));
    }
    let bound = 1i64 << params.lambda;
    if (2 * bound + 1) < p.gens().len() as i64 {
        return Err(SchemeError::InvalidParams("lambda too small for the generator count".into()));
    }

    let n = rng.gen_range(2..=bound);
    let mut chosen = BTreeSet::new();
    let mut assignment = BTreeMap::new();
    for h in p.gens() {
        let s = loop {
            let s = rng.gen_range(-bound..=bound);
            if chosen.insert(s) {
                break s;
            }
        };
        assignment.insert(h.clone(), s);
    }
    let masks: BTreeMap<String, Word<usize>> = p
        .gens()
        .iter()
        .map(|h| {
            let len = rng.gen_range(lo..=hi);
            (h.clone(), random_relator_word(p, rng, len).0)
        })
        .collect();
    let sk = SecretKey::from_parts(n, assignment, masks)?;
    let generators =
        p.gens().iter().map(|h| Ok((h.clone(), public_image(&sk, p, h)?))).collect::<Result<_, SchemeError>>()?;
    let pk = PublicKey { presentation: p.clone(), group: cg.clone(), generators, extra: Vec::new() };
    Ok((pk, sk))
}

/// `y_h = x_h * r_h`, with the mask expanded over the secret basis.
fn public_image(sk: &SecretKey, p: &Presentation, h: &str) -> Result<Mat2Z, SchemeError> {
    let to_basis = |g: &String| -> Result<Word<i64>, SchemeError> {
        sk.assignment.get(g).map(|&s| Word::letter(s)).ok_or_else(|| SchemeError::UnknownGenerator(g.clone()))
    };
    let mask = p.expand(&sk.masks[h]).substitute(to_basis)?;
    let x = Word::letter(sk.assignment[h]);
    Ok(sk.cb.word_matrix(&x.concat(&mask)))
}

/// `M_r` for a random relator word of `mask_len` letters.
pub fn randomizer<R: Rng + ?Sized>(pk: &PublicKey, rng: &mut R, mask_len: usize) -> Mat2Z {
    let (_, expansion) = random_relator_word(&pk.presentation, rng, mask_len);
    pk.public_word_matrix(&expansion).expect("relators use presentation generators")
}

pub fn encrypt<R: Rng + ?Sized>(
    pk: &PublicKey,
    plaintext: &Word<String>,
    rng: &mut R,
    mask_len: usize,
) -> Result<Ciphertext, SchemeError> {
    let m_h = pk.public_word_matrix(plaintext)?;
    let m_r = randomizer(pk, rng, mask_len);
    Ok(Ciphertext { m: &m_r * &m_h })
}

/// Encrypts a group element via a shortest word over the generators.
pub fn encrypt_element<R: Rng + ?Sized>(
    pk: &PublicKey,
    element: usize,
    rng: &mut R,
    mask_len: usize,
) -> Result<Ciphertext, SchemeError> {
    let w = word_for_element(&pk.group, element)
        .ok_or_else(|| SchemeError::InvalidParams(format!("no element {element}")))?;
    encrypt(pk, &w, rng, mask_len)
}

/// The plaintext word recovered from the `X(n, S)`-representation.
pub fn decrypt_word(sk: &SecretKey, c: &Ciphertext) -> Result<Word<String>, SchemeError> {
    let rep = x_representation(&c.m, &sk.cb).map_err(|e| match e {
        RepError::InvalidModulus(_) | RepError::EmptyBasis | RepError::DuplicateBasisIndex(_) => {
            SchemeError::Format(e.to_string())
        }
        _ => SchemeError::NotInGroup,
    })?;
    rep.substitute(|s| sk.by_index.get(s).map(|h| Word::letter(h.clone())).ok_or(SchemeError::UnmappedBasisLetter(*s)))
}

pub fn decrypt(sk: &SecretKey, pk: &PublicKey, c: &Ciphertext) -> Result<usize, SchemeError> {
    let w = decrypt_word(sk, c)?;
    evaluate_word(&pk.group, &w).map_err(|_| SchemeError::PresentationMismatch)
}

pub fn ciphertext_mul(c1: &Ciphertext, c2: &Ciphertext) -> Ciphertext {
    Ciphertext { m: &c1.m * &c2.m }
}

pub fn rerandomize<R: Rng + ?Sized>(pk: &PublicKey, c: &Ciphertext, rng: &mut R, mask_len: usize) -> Ciphertext {
    Ciphertext { m: &randomizer(pk, rng, mask_len) * &c.m }
}

/// Appends `count` pairs obtained by Nielsen moves on the existing public
/// pairs: inversion of one pair or the product of two. New pairs are named
/// `e0, e1, ...` continuing any existing numbering.
pub fn extend_public_key<R: Rng + ?Sized>(pk: &PublicKey, rng: &mut R, count: usize) -> PublicKey {
    let mut out = pk.clone();
    let g = &pk.group;
    for _ in 0..count {
        let mut pairs: Vec<(Mat2Z, usize)> =
            out.generators.iter().map(|(h, m)| (m.clone(), g.generator(h).expect("assigned generator"))).collect();
        pairs.extend(out.extra.iter().map(|p| (p.matrix.clone(), p.element)));
        let i = rng.gen_range(0..pairs.len());
        let (matrix, element) = if rng.gen_bool(0.5) {
            let (m, h) = &pairs[i];
            (m.inverse().expect("unimodular"), g.inv(*h))
        } else {
            let j = loop {
                let j = rng.gen_range(0..pairs.len());
                if j != i {
                    break j;
                }
            };
            (&pairs[i].0 * &pairs[j].0, g.mul(pairs[i].1, pairs[j].1))
        };
        let mut k = out.extra.len();
        while out.lookup(&format!("e{k}")).is_some() {
            k += 1;
        }
        out.extra.push(ExtraPair { name: format!("e{k}"), matrix, element });
    }
    out
}

#[derive(Serialize, Deserialize)]
struct RawSecretKey {
    format: u32,
    n: i64,
    assignment: BTreeMap<String, i64>,
    masks: BTreeMap<String, Word<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawPublicKey {
    format: u32,
    presentation: Presentation,
    group: ConcreteGroup,
    generators: BTreeMap<String, Mat2Z>,
    #[serde(default)]
    extra: Vec<ExtraPair>,
}

#[derive(Serialize, Deserialize)]
struct RawCiphertext {
    format: u32,
    matrix: Mat2Z,
}

fn check_format(v: u32) -> Result<(), SchemeError> {
    if v != FORMAT_VERSION {
        return Err(SchemeError::Format(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn json_err(e: serde_json::Error) -> SchemeError {
    SchemeError::Format(e.to_string())
}

impl SecretKey {
    pub fn to_json(&self) -> String {
        let raw = RawSecretKey {
            format: FORMAT_VERSION,
            n: self.cb.n(),
            assignment: self.assignment.clone(),
            masks: self.masks.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let raw: RawSecretKey = serde_json::from_str(text).map_err(json_err)?;
        check_format(raw.format)?;
        SecretKey::from_parts(raw.n, raw.assignment, raw.masks)
    }
}

impl TryFrom<RawPublicKey> for PublicKey {
    type Error = SchemeError;
    fn try_from(raw: RawPublicKey) -> Result<Self, SchemeError> {
        check_format(raw.format)?;
        if !verify_presentation(&raw.group, &raw.presentation)
            || raw.generators.keys().ne(raw.presentation.gens().iter())
            || raw.group.assignment().keys().ne(raw.presentation.gens().iter())
        {
            return Err(SchemeError::PresentationMismatch);
        }
        let matrices = raw.generators.values().chain(raw.extra.iter().map(|p| &p.matrix));
        if matrices.map(|m| m.det()).any(|d| !num_traits::One::is_one(&d)) {
            return Err(SchemeError::Format("public matrix with determinant other than 1".into()));
        }
        if raw.extra.iter().any(|p| p.element >= raw.group.order()) {
            return Err(SchemeError::Format("extra pair element out of range".into()));
        }
        Ok(PublicKey { presentation: raw.presentation, group: raw.group, generators: raw.generators, extra: raw.extra })
    }
}

impl From<PublicKey> for RawPublicKey {
    fn from(pk: PublicKey) -> Self {
        RawPublicKey {
            format: FORMAT_VERSION,
            presentation: pk.presentation,
            group: pk.group,
            generators: pk.generators,
            extra: pk.extra,
        }
    }
}

impl PublicKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        serde_json::from_str(text).map_err(json_err)
    }
}

impl Ciphertext {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawCiphertext { format: FORMAT_VERSION, matrix: self.m.clone() })
            .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let raw: RawCiphertext = serde_json::from_str(text).map_err(json_err)?;
        check_format(raw.format)?;
        Ok(Ciphertext { m: raw.matrix })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use num_traits::One;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn keys(which: usize, seed: u64) -> (PublicKey, SecretKey) {
        let (p, g) = fixtures::group_fixtures()[which].clone();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        keygen(&p, &g, &KeyParams::default(), &mut rng).unwrap()
    }

    fn word(s: &str) -> Word<String> {
        crate::word::parse_word(s).unwrap()
    }

    #[test]
    fn keygen_errors() {
        let (p, g) = fixtures::s3();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let one_gen = Presentation::new(vec!["a".into()], vec![word("a^3")]).unwrap();
        let z3 = g.with_assignment([("a".to_string(), 1)].into_iter().collect());
        // a 3-cycle alone does not generate S3, so build Z3 directly
        assert!(z3.is_err());
        let z3 = ConcreteGroup::from_permutations(3, &[("a", vec![1, 2, 0])]).unwrap();
        assert_eq!(keygen(&one_gen, &z3, &KeyParams::default(), &mut rng), Err(SchemeError::TooFewGenerators));
        let trivial_p = Presentation::new(vec!["a".into(), "b".into()], vec![word("a"), word("b")]).unwrap();
        let trivial = ConcreteGroup::from_permutations(1, &[("a", vec![0]), ("b", vec![0])]).unwrap();
        assert_eq!(keygen(&trivial_p, &trivial, &KeyParams::default(), &mut rng), Err(SchemeError::IdentityGroup));
        let wrong = Presentation::new(vec!["a".into(), "b".into()], vec![word("a^2")]).unwrap();
        assert_eq!(keygen(&wrong, &g, &KeyParams::default(), &mut rng), Err(SchemeError::PresentationMismatch));
        let small = KeyParams { lambda: 4, mask_len: (1, 3) };
        assert!(keygen(&p, &g, &small, &mut rng).is_ok());
    }

    #[test]
    fn key_invariants() {
        for which in 0..4 {
            let (pk, sk) = keys(which, 7 + which as u64);
            let s: BTreeSet<i64> = sk.assignment().values().copied().collect();
            assert_eq!(s.len(), pk.presentation().gens().len());
            assert!(sk.n() >= 2 && sk.n() <= 1 << 16);
            for (h, y) in pk.generators() {
                assert!(y.det().is_one());
                let c = Ciphertext { m: y.clone() };
                assert_eq!(decrypt(&sk, &pk, &c).unwrap(), pk.group().generator(h).unwrap());
            }
        }
    }

    #[test]
    fn trivial_cases() {
        let (pk, sk) = keys(0, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let c = encrypt(&pk, &Word::empty(), &mut rng, 0).unwrap();
        assert!(c.m.is_identity());
        assert_eq!(decrypt(&sk, &pk, &c).unwrap(), 0);
        let a = encrypt(&pk, &word("a"), &mut rng, 2).unwrap();
        assert_eq!(ciphertext_mul(&a, &c), a);
        assert_eq!(rerandomize(&pk, &a, &mut rng, 0), a);
        assert_eq!(extend_public_key(&pk, &mut rng, 0), pk);
        assert!(matches!(encrypt(&pk, &word("z"), &mut rng, 1), Err(SchemeError::UnknownGenerator(_))));
    }

    #[test]
    fn probabilistic_encryption() {
        let (pk, sk) = keys(1, 11);
        let w = word("r s");
        let c1 = encrypt(&pk, &w, &mut ChaCha20Rng::seed_from_u64(1), 2).unwrap();
        let c2 = encrypt(&pk, &w, &mut ChaCha20Rng::seed_from_u64(2), 2).unwrap();
        assert_ne!(c1, c2);
        assert_eq!(decrypt(&sk, &pk, &c1).unwrap(), decrypt(&sk, &pk, &c2).unwrap());
        let r1 = rerandomize(&pk, &c1, &mut ChaCha20Rng::seed_from_u64(3), 2);
        let r2 = rerandomize(&pk, &c1, &mut ChaCha20Rng::seed_from_u64(4), 2);
        assert_ne!(r1, r2);
        assert_eq!(decrypt(&sk, &pk, &r1).unwrap(), decrypt(&sk, &pk, &c1).unwrap());
    }

    #[test]
    fn extended_keys_decrypt() {
        let (pk, sk) = keys(0, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let ext = extend_public_key(&pk, &mut rng, 6);
        assert_eq!(ext.extra().len(), 6);
        for pair in ext.extra() {
            let c = Ciphertext { m: pair.matrix.clone() };
            assert_eq!(decrypt(&sk, &ext, &c).unwrap(), pair.element);
        }
        let w = word("e0 a e5^-1 b");
        let c = encrypt(&ext, &w, &mut rng, 2).unwrap();
        assert_eq!(decrypt(&sk, &ext, &c).unwrap(), ext.evaluate(&w).unwrap());
        // explicit moves
        let g = pk.group();
        let (ya, yb) = (&pk.generators()["a"], &pk.generators()["b"]);
        let ab = Ciphertext { m: ya * yb };
        assert_eq!(decrypt(&sk, &pk, &ab).unwrap(), g.mul(g.generator("a").unwrap(), g.generator("b").unwrap()));
        let inv = Ciphertext { m: ya.inverse().unwrap() };
        assert_eq!(decrypt(&sk, &pk, &inv).unwrap(), g.inv(g.generator("a").unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let (pk, sk) = keys(2, 21);
        let pk = extend_public_key(&pk, &mut ChaCha20Rng::seed_from_u64(1), 2);
        assert_eq!(PublicKey::from_json(&pk.to_json()).unwrap(), pk);
        assert_eq!(SecretKey::from_json(&sk.to_json()).unwrap(), sk);
        let c = encrypt(&pk, &word("i j"), &mut ChaCha20Rng::seed_from_u64(2), 3).unwrap();
        assert_eq!(Ciphertext::from_json(&c.to_json()).unwrap(), c);
        assert!(Ciphertext::from_json(&c.to_json().replace("\"format\": 1", "\"format\": 2")).is_err());
    }

    #[test]
    fn foreign_matrix_is_rejected() {
        let (pk, sk) = keys(0, 1);
        // A_n itself is not in G(n, S)
        let c = Ciphertext { m: Mat2Z::upper(sk.n()) };
        assert_eq!(decrypt(&sk, &pk, &c), Err(SchemeError::NotInGroup));
        let c = Ciphertext { m: Mat2Z::upper(1) };
        assert_eq!(decrypt(&sk, &pk, &c), Err(SchemeError::NotInGroup));
    }

    fn plaintext(gens: &'static [&'static str]) -> impl Strategy<Value = Word<String>> {
        prop::collection::vec((0..gens.len(), -3i64..=3), 0..6)
            .prop_map(move |v| v.into_iter().map(|(g, e)| (gens[g].to_string(), e)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn homomorphic(seed in any::<u64>(), w1 in plaintext(&["a", "b"]), w2 in plaintext(&["a", "b"]), rel_len in 0usize..4) {
            let (pk, sk) = keys(0, seed);
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xabc);
            let c1 = encrypt(&pk, &w1, &mut rng, 2).unwrap();
            let c2 = encrypt(&pk, &w2, &mut rng, 1).unwrap();
            let g = pk.group();
            let d1 = decrypt(&sk, &pk, &c1).unwrap();
            prop_assert_eq!(d1, evaluate_word(g, &w1).unwrap());
            let d12 = decrypt(&sk, &pk, &ciphertext_mul(&c1, &c2)).unwrap();
            prop_assert_eq!(d12, g.mul(d1, decrypt(&sk, &pk, &c2).unwrap()));
            let kernel = Ciphertext { m: randomizer(&pk, &mut rng, rel_len) };
            prop_assert_eq!(decrypt(&sk, &pk, &ciphertext_mul(&kernel, &c1)).unwrap(), d1);
            prop_assert!(c1.m.det().is_one());
        }
    }
}
