//! Homomorphic encryption over a finite commutative ring `R` through the
//! group ring `R[G]`.
//!
//! The group scheme runs over the unit group `R^x`, giving `phi: G -> R^x`.
//! Its linear extension `sum r_g g -> sum r_g phi(g)` is a ring
//! homomorphism `R[G] -> R`, so sums and products of group-ring
//! ciphertexts decrypt to sums and products of plaintexts.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::Mat2Z;
use crate::group::{abelian_decomposition, word_for_element};
use crate::ring::{ring_eligible, unit_group, FiniteRing};
use crate::scheme::{self, decrypt, encrypt, keygen, KeyParams, PublicKey, SchemeError, SecretKey, FORMAT_VERSION};
use crate::word::Word;

/// Relator letters in the randomizer of each encrypted unit.
pub const DEFAULT_MASK_LEN: usize = 2;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum RingSchemeError {
    #[error("ring has trivial unit group")]
    IneligibleRing,
    #[error("encryption needs at least two terms, got {0}")]
    TooFewTerms(usize),
    #[error("ring element {0} out of range")]
    NoSuchElement(usize),
    #[error(transparent)]
    Group(#[from] SchemeError),
}

/// `sum r_g g` with nonzero coefficients, keyed by the matrix `g`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Mat2Z, usize>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(r: &FiniteRing, coeff: usize, g: Mat2Z) -> Self {
        let mut e = Self::zero();
        e.add_term(r, g, coeff);
        e
    }

    pub fn terms(&self) -> &BTreeMap<Mat2Z, usize> {
        &self.terms
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, r: &FiniteRing, g: Mat2Z, coeff: usize) {
        let c = r.add(self.terms.get(&g).copied().unwrap_or(r.zero()), coeff);
        if c == r.zero() {
            self.terms.remove(&g);
        } else {
            self.terms.insert(g, c);
        }
    }

    pub fn to_json(&self) -> String {
        let terms = self.terms.iter().map(|(m, &c)| RawTerm { matrix: m.clone(), coeff: c }).collect();
        serde_json::to_string_pretty(&RawGroupRingElement { format: FORMAT_VERSION, terms }).expect("serializable")
    }

    /// Terms are merged through `r`, so repeated matrices are allowed.
    pub fn from_json(text: &str, r: &FiniteRing) -> Result<Self, RingSchemeError> {
        let raw: RawGroupRingElement = serde_json::from_str(text).map_err(|e| SchemeError::Format(e.to_string()))?;
        if raw.format != FORMAT_VERSION {
            return Err(SchemeError::Format(format!("unsupported format version {}", raw.format)).into());
        }
        let mut e = Self::zero();
        for t in raw.terms {
            if t.coeff >= r.size() {
                return Err(RingSchemeError::NoSuchElement(t.coeff));
            }
            e.add_term(r, t.matrix, t.coeff);
        }
        Ok(e)
    }
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    matrix: Mat2Z,
    coeff: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGroupRingElement {
    format: u32,
    terms: Vec<RawTerm>,
}

pub fn gr_add(e1: &GroupRingElement, e2: &GroupRingElement, r: &FiniteRing) -> GroupRingElement {
    let mut out = e1.clone();
    for (g, &c) in &e2.terms {
        out.add_term(r, g.clone(), c);
    }
    out
}

/// Convolution; the group product is the matrix product.
pub fn gr_mul(e1: &GroupRingElement, e2: &GroupRingElement, r: &FiniteRing) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    for (g1, &c1) in &e1.terms {
        for (g2, &c2) in &e2.terms {
            out.add_term(r, g1 * g2, r.mul(c1, c2));
        }
    }
    out
}

pub fn gr_neg(e: &GroupRingElement, r: &FiniteRing) -> GroupRingElement {
    GroupRingElement { terms: e.terms.iter().map(|(g, &c)| (g.clone(), r.neg(c))).collect() }
}

/// The group-scheme public key over `R^x` plus the ring tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPublicKey {
    ring: FiniteRing,
    group_key: PublicKey,
    /// Ring element of each unit-group element.
    units: Vec<usize>,
    /// Shortest generator word for each unit-group element.
    unit_words: Vec<Word<String>>,
}

impl RingPublicKey {
    fn new(ring: FiniteRing, group_key: PublicKey) -> Result<Self, RingSchemeError> {
        let ug = unit_group(&ring);
        if ug.elements.len() < 2 {
            return Err(RingSchemeError::IneligibleRing);
        }
        let g = group_key.group();
        if g.labels() != ug.group.labels() || g.table() != ug.group.table() {
            return Err(SchemeError::Format("group key does not match the unit group of the ring".into()).into());
        }
        let unit_words =
            (0..g.order()).map(|u| word_for_element(g, u).expect("assigned generators generate")).collect();
        Ok(RingPublicKey { ring, group_key, units: ug.elements, unit_words })
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn group_key(&self) -> &PublicKey {
        &self.group_key
    }

    /// Ring elements of the units, indexed like the unit group.
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn to_json(&self) -> String {
        let raw =
            RawRingPublicKey { format: FORMAT_VERSION, ring: self.ring.clone(), group_key: self.group_key.clone() };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, RingSchemeError> {
        let raw: RawRingPublicKey = serde_json::from_str(text).map_err(|e| SchemeError::Format(e.to_string()))?;
        if raw.format != FORMAT_VERSION {
            return Err(SchemeError::Format(format!("unsupported format version {}", raw.format)).into());
        }
        RingPublicKey::new(raw.ring, raw.group_key)
    }
}

#[derive(Serialize, Deserialize)]
struct RawRingPublicKey {
    format: u32,
    ring: FiniteRing,
    group_key: PublicKey,
}

/// Decomposes `R^x` into cyclic factors and runs the group key generation
/// over the resulting presentation.
pub fn ring_keygen<R: Rng + ?Sized>(
    ring: &FiniteRing,
    params: &KeyParams,
    rng: &mut R,
) -> Result<(RingPublicKey, SecretKey), RingSchemeError> {
    if !ring_eligible(ring) {
        return Err(RingSchemeError::IneligibleRing);
    }
    let ug = unit_group(ring);
    let dec = abelian_decomposition(&ug.group).map_err(|e| SchemeError::Format(e.to_string()))?;
    let (pk, sk) = keygen(&dec.presentation, &dec.group, params, rng)?;
    Ok((RingPublicKey::new(ring.clone(), pk)?, sk))
}

pub fn ring_encrypt<R: Rng + ?Sized>(
    pk: &RingPublicKey,
    r: usize,
    rng: &mut R,
    t: usize,
) -> Result<GroupRingElement, RingSchemeError> {
    ring_encrypt_with(pk, r, rng, t, DEFAULT_MASK_LEN)
}

/// Writes `r = c_1 u_1 + ... + c_t u_t` with random units `u_j`, random
/// `c_1..c_{t-1}` and `c_t` solved through `u_t^{-1}`, then replaces each
/// `u_j` by a fresh group-scheme encryption.
pub fn ring_encrypt_with<R: Rng + ?Sized>(
    pk: &RingPublicKey,
    r: usize,
    rng: &mut R,
    t: usize,
    mask_len: usize,
) -> Result<GroupRingElement, RingSchemeError> {
    let ring = &pk.ring;
    if t < 2 {
        return Err(RingSchemeError::TooFewTerms(t));
    }
    if r >= ring.size() {
        return Err(RingSchemeError::NoSuchElement(r));
    }
    let k = pk.units.len();
    let units: Vec<usize> = (0..t).map(|_| rng.gen_range(0..k)).collect();
    let mut coeffs: Vec<usize> = (0..t - 1).map(|_| rng.gen_range(0..ring.size())).collect();
    let partial = ring.sum(coeffs.iter().zip(&units).map(|(&c, &u)| ring.mul(c, pk.units[u])));
    let last_inv = ring.inverse(pk.units[units[t - 1]]).expect("unit");
    coeffs.push(ring.mul(ring.sub(r, partial), last_inv));

    let mut out = GroupRingElement::zero();
    for (&c, &u) in coeffs.iter().zip(&units) {
        let g = encrypt(&pk.group_key, &pk.unit_words[u], rng, mask_len)?;
        out.add_term(ring, g.m, c);
    }
    Ok(out)
}

/// `sum r_g phi(g)`.
pub fn ring_decrypt(sk: &SecretKey, pk: &RingPublicKey, e: &GroupRingElement) -> Result<usize, RingSchemeError> {
    let ring = &pk.ring;
    let mut acc = ring.zero();
    for (g, &c) in &e.terms {
        let u = decrypt(sk, &pk.group_key, &scheme::Ciphertext { m: g.clone() })?;
        acc = ring.add(acc, ring.mul(c, pk.units[u]));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn keys(ring: &FiniteRing, seed: u64) -> (RingPublicKey, SecretKey) {
        ring_keygen(ring, &KeyParams::default(), &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn ineligible_rings_rejected() {
        for (_, r) in fixtures::ineligible_rings() {
            let got = ring_keygen(&r, &KeyParams::default(), &mut ChaCha20Rng::seed_from_u64(0));
            assert_eq!(got.unwrap_err(), RingSchemeError::IneligibleRing);
        }
    }

    #[test]
    fn unit_layer_round_trip() {
        let z4 = FiniteRing::zmod(4);
        let (pk, sk) = keys(&z4, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut seen = Vec::new();
        for u in 0..pk.units().len() {
            let g = encrypt(pk.group_key(), &pk.unit_words[u], &mut rng, 2).unwrap();
            let e = GroupRingElement::term(&z4, z4.one(), g.m);
            seen.push(ring_decrypt(&sk, &pk, &e).unwrap());
        }
        seen.sort();
        assert_eq!(seen, vec![1, 3]);
        // cyclic unit group goes through the redundant generator
        let z2z3 = FiniteRing::product(&FiniteRing::zmod(2), &FiniteRing::zmod(3));
        let (pk, _) = keys(&z2z3, 3);
        assert_eq!(pk.group_key().presentation().gens().len(), 2);
    }

    #[test]
    fn group_ring_identities() {
        let r = FiniteRing::zmod(6);
        let g = Mat2Z::upper(2);
        let h = Mat2Z::lower(2);
        let e = gr_add(&GroupRingElement::term(&r, 2, g.clone()), &GroupRingElement::term(&r, 5, h.clone()), &r);
        assert_eq!(gr_add(&e, &GroupRingElement::zero(), &r), e);
        assert_eq!(gr_add(&e, &gr_neg(&e, &r), &r), GroupRingElement::zero());
        let one = GroupRingElement::term(&r, 1, Mat2Z::identity());
        assert_eq!(gr_mul(&e, &one, &r), e);
        let gh = gr_mul(&GroupRingElement::term(&r, 1, g.clone()), &GroupRingElement::term(&r, 1, h.clone()), &r);
        assert_eq!(gh, GroupRingElement::term(&r, 1, &g * &h));
        // coefficient merge 2 + 4 = 0 in Z6 drops the term
        let z = gr_add(&GroupRingElement::term(&r, 2, g.clone()), &GroupRingElement::term(&r, 4, g), &r);
        assert_eq!(z.support_size(), 0);
    }

    #[test]
    fn encrypt_decrypt_homomorphic() {
        for (name, r) in fixtures::eligible_rings() {
            let (pk, sk) = keys(&r, name.len() as u64);
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            let cts: Vec<GroupRingElement> =
                (0..r.size()).map(|x| ring_encrypt(&pk, x, &mut rng, 2).unwrap()).collect();
            for x in 0..r.size() {
                assert_eq!(ring_decrypt(&sk, &pk, &cts[x]).unwrap(), x, "{name}");
                for y in 0..r.size() {
                    let s = gr_add(&cts[x], &cts[y], &r);
                    assert_eq!(ring_decrypt(&sk, &pk, &s).unwrap(), r.add(x, y));
                    let p = gr_mul(&cts[x], &cts[y], &r);
                    assert!(p.support_size() <= cts[x].support_size() * cts[y].support_size());
                    assert_eq!(ring_decrypt(&sk, &pk, &p).unwrap(), r.mul(x, y));
                }
            }
        }
    }

    #[test]
    fn probabilistic_and_errors() {
        let r = FiniteRing::f4();
        let (pk, sk) = keys(&r, 8);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = ring_encrypt(&pk, 0, &mut rng, 2).unwrap();
        let b = ring_encrypt(&pk, 0, &mut rng, 2).unwrap();
        assert_ne!(a, b);
        assert_eq!(ring_decrypt(&sk, &pk, &a).unwrap(), 0);
        assert_eq!(ring_decrypt(&sk, &pk, &GroupRingElement::zero()).unwrap(), 0);
        assert_eq!(ring_encrypt(&pk, 1, &mut rng, 1), Err(RingSchemeError::TooFewTerms(1)));
        assert_eq!(ring_encrypt(&pk, 9, &mut rng, 2), Err(RingSchemeError::NoSuchElement(9)));
        for t in 2..=4 {
            for x in 0..r.size() {
                let c = ring_encrypt(&pk, x, &mut rng, t).unwrap();
                assert_eq!(ring_decrypt(&sk, &pk, &c).unwrap(), x);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let r = FiniteRing::zmod(3);
        let (pk, _) = keys(&r, 4);
        assert_eq!(RingPublicKey::from_json(&pk.to_json()).unwrap(), pk);
        let c = ring_encrypt(&pk, 2, &mut ChaCha20Rng::seed_from_u64(0), 3).unwrap();
        assert_eq!(GroupRingElement::from_json(&c.to_json(), &r).unwrap(), c);
    }
}
