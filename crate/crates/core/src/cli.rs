//! Command-line interface. Every randomized command takes a mandatory
//! `--seed`; identical inputs and seed give byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::arith::Mat2Z;
use crate::fixtures;
use crate::group::{ConcreteGroup, Presentation};
use crate::hom_eval::{
    enumerate_subring, evaluate_homomorphism, kernel_closure_default, AttackError, MatRingElement,
    PresentedHomomorphism,
};
use crate::rep_solver::{brute_force_representation, x_representation, ConjugateBasis, RepError};
use crate::ring::FiniteRing;
use crate::ring_scheme::{
    gr_add, gr_mul, gr_neg, ring_decrypt, ring_encrypt_with, ring_keygen, GroupRingElement, RingPublicKey,
    RingSchemeError,
};
use crate::scheme::{
    ciphertext_mul, decrypt, encrypt, extend_public_key, keygen, rerandomize, Ciphertext, KeyParams, PublicKey,
    SchemeError, SecretKey,
};
use crate::word::{parse_word, Word};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const VERIFY: i32 = 3;
    pub const ELIGIBILITY: i32 = 4;
    pub const SOLVER: i32 = 5;
    pub const ATTACK: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn parse(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::new(exit::PARSE, format!("{}: {e}", path.display()))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(exit::IO, e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        let code = match e {
            SchemeError::NotInGroup | SchemeError::UnmappedBasisLetter(_) => exit::SOLVER,
            SchemeError::Format(_) | SchemeError::UnknownGenerator(_) | SchemeError::InvalidParams(_) => exit::PARSE,
            SchemeError::TooFewGenerators | SchemeError::IdentityGroup | SchemeError::PresentationMismatch => {
                exit::VERIFY
            }
        };
        CliError::new(code, e.to_string())
    }
}

impl From<RingSchemeError> for CliError {
    fn from(e: RingSchemeError) -> Self {
        match e {
            RingSchemeError::Group(g) => g.into(),
            RingSchemeError::IneligibleRing => CliError::new(exit::ELIGIBILITY, e.to_string()),
            _ => CliError::new(exit::PARSE, e.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        let code = if e == AttackError::NoTransversalMatch { exit::ATTACK } else { exit::PARSE };
        CliError::new(code, e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "grpcrypt", version, about = "Homomorphic encryption over free subgroups of SL2(Z)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct KeyOpts {
    /// Bit bound for n and the basis indices.
    #[arg(long, default_value_t = 16)]
    pub lambda: u32,
    /// Relator letters per mask: `K` or `LO-HI`.
    #[arg(long, default_value = "1-3")]
    pub mask_len: String,
    #[arg(long)]
    pub seed: u64,
    /// Public key output.
    #[arg(long)]
    pub pk: PathBuf,
    /// Secret key output.
    #[arg(long)]
    pub sk: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a key pair for a finite group.
    Keygen {
        /// Presentation file (`gens:` and `rel:` lines).
        #[arg(long, required_unless_present = "fixture")]
        presentation: Option<PathBuf>,
        /// Group table file.
        #[arg(long, required_unless_present = "fixture")]
        group: Option<PathBuf>,
        /// Built-in group instead of files: s3, d4, q8, z6.
        #[arg(long, conflicts_with_all = ["presentation", "group"])]
        fixture: Option<String>,
        #[command(flatten)]
        key: KeyOpts,
    },
    /// Encrypt a word over the generators.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        /// File holding the plaintext word.
        #[arg(long = "in", required_unless_present = "word")]
        input: Option<PathBuf>,
        /// Plaintext word given inline, e.g. "a b^-1".
        #[arg(long, conflicts_with = "input")]
        word: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        mask_len: usize,
    },
    /// Decrypt a ciphertext and print the group element's label.
    Decrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Multiply ciphertexts in order.
    Eval {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiply a ciphertext by a fresh randomizer.
    Rerandomize {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        mask_len: usize,
    },
    /// Append public pairs obtained by Nielsen moves.
    ExtendKey {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Generate a key pair for a finite commutative ring.
    RingKeygen {
        #[arg(long)]
        ring: PathBuf,
        #[command(flatten)]
        key: KeyOpts,
    },
    /// Encrypt a ring element (by label or index).
    RingEncrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        value: String,
        /// Number of encrypted units in the sum.
        #[arg(long, default_value_t = 2)]
        terms: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        mask_len: usize,
    },
    /// Decrypt a group-ring ciphertext and print the ring element's label.
    RingDecrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Evaluate an expression such as "(a + b) * c" over ciphertexts.
    RingEval {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        expr: String,
        /// Ciphertext binding `name=path`; repeatable.
        #[arg(long = "ct", value_parser = parse_binding)]
        cts: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the representation problem over X(n, S).
    Solve {
        /// Matrix file: four integers or a ciphertext.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: i64,
        /// Comma-separated basis indices.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<i64>,
    },
    /// Breadth-first search for a representation.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        /// Named generator matrix `name=path`; repeatable.
        #[arg(long = "gen", value_parser = parse_binding)]
        gens: Vec<(String, PathBuf)>,
        /// Use the basis X(n, S) as generators instead of files.
        #[arg(long, requires = "s")]
        n: Option<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<i64>,
        /// Maximum syllable count.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        max_exp: i64,
    },
    /// Evaluate a homomorphism presented by kernel and transversal.
    AttackEval {
        #[arg(long = "in")]
        input: PathBuf,
        /// Query matrix entries, row major; repeatable.
        #[arg(long = "query", allow_hyphen_values = true)]
        queries: Vec<String>,
        /// Evaluate every element of the algebra generated by the file's
        /// matrices.
        #[arg(long)]
        all: bool,
    },
    /// Write the built-in groups, rings and an attack example.
    WriteFixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or_else(|| format!("expected name=path, got {s:?}"))?;
    Ok((name.trim().to_string(), PathBuf::from(path)))
}

fn parse_mask_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::new(exit::PARSE, format!("bad --mask-len {s:?}"));
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(exit::IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::new(exit::IO, format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, SchemeError>) -> Result<T, CliError> {
    let text = read(path)?;
    f(&text).map_err(|e| match e {
        SchemeError::Format(_) => CliError::parse(path, e),
        other => other.into(),
    })
}

fn load_ring(path: &Path) -> Result<FiniteRing, CliError> {
    FiniteRing::parse(&read(path)?).map_err(|e| CliError::parse(path, e))
}

fn load_ring_pk(path: &Path) -> Result<RingPublicKey, CliError> {
    RingPublicKey::from_json(&read(path)?).map_err(|e| match e {
        RingSchemeError::IneligibleRing => e.into(),
        _ => CliError::parse(path, e),
    })
}

fn load_gr(path: &Path, ring: &FiniteRing) -> Result<GroupRingElement, CliError> {
    GroupRingElement::from_json(&read(path)?, ring).map_err(|e| CliError::parse(path, e))
}

/// A matrix file holds four integers or a ciphertext.
fn load_matrix(path: &Path) -> Result<Mat2Z, CliError> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        return Ciphertext::from_json(&text).map(|c| c.m).map_err(|e| CliError::parse(path, e));
    }
    text.parse().map_err(|e| CliError::parse(path, e))
}

fn basis_word_text(w: &Word<i64>) -> String {
    w.map_letters(|s| format!("x[{s}]")).to_string()
}

fn key_params(k: &KeyOpts) -> Result<KeyParams, CliError> {
    Ok(KeyParams { lambda: k.lambda, mask_len: parse_mask_range(&k.mask_len)? })
}

fn write_keys(k: &KeyOpts, pk_json: String, sk: &SecretKey) -> Result<(), CliError> {
    write(&k.pk, &(pk_json + "\n"))?;
    write(&k.sk, &(sk.to_json() + "\n"))
}

/// Runs one command, writing human-readable results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Keygen { presentation, group, fixture, key } => {
            let (p, g) = match fixture {
                Some(name) => fixtures::group_fixture(&name)
                    .ok_or_else(|| CliError::new(exit::PARSE, format!("unknown fixture {name:?}")))?,
                None => {
                    let (pp, gp) = (presentation.expect("clap"), group.expect("clap"));
                    let p = Presentation::parse(&read(&pp)?).map_err(|e| CliError::parse(&pp, e))?;
                    let g = ConcreteGroup::parse(&read(&gp)?).map_err(|e| CliError::parse(&gp, e))?;
                    (p, g)
                }
            };
            let mut rng = ChaCha20Rng::seed_from_u64(key.seed);
            let (pk, sk) = keygen(&p, &g, &key_params(&key)?, &mut rng)?;
            write_keys(&key, pk.to_json(), &sk)?;
            let bits = 64 - sk.n().leading_zeros();
            writeln!(out, "n bits: {bits}\ngenerators: {}", p.gens().len())?;
        }
        Command::Encrypt { pk, input, word, out: path, seed, mask_len } => {
            let pk = load(&pk, PublicKey::from_json)?;
            let text = match (input, word) {
                (Some(p), _) => read(&p)?,
                (None, Some(w)) => w,
                (None, None) => unreachable!("clap requires one"),
            };
            let w = parse_word(&text).map_err(|e| CliError::new(exit::PARSE, e))?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let c = encrypt(&pk, &w, &mut rng, mask_len)?;
            write(&path, &(c.to_json() + "\n"))?;
        }
        Command::Decrypt { pk, sk, input } => {
            let pk = load(&pk, PublicKey::from_json)?;
            let sk = load(&sk, SecretKey::from_json)?;
            let c = load(&input, Ciphertext::from_json)?;
            let h = decrypt(&sk, &pk, &c)?;
            writeln!(out, "{}", pk.group().label(h))?;
        }
        Command::Eval { inputs, out: path } => {
            let mut acc = Ciphertext { m: Mat2Z::identity() };
            for p in &inputs {
                acc = ciphertext_mul(&acc, &load(p, Ciphertext::from_json)?);
            }
            write(&path, &(acc.to_json() + "\n"))?;
        }
        Command::Rerandomize { pk, input, out: path, seed, mask_len } => {
            let pk = load(&pk, PublicKey::from_json)?;
            let c = load(&input, Ciphertext::from_json)?;
            let c = rerandomize(&pk, &c, &mut ChaCha20Rng::seed_from_u64(seed), mask_len);
            write(&path, &(c.to_json() + "\n"))?;
        }
        Command::ExtendKey { pk, count, out: path, seed } => {
            let pk = load(&pk, PublicKey::from_json)?;
            let ext = extend_public_key(&pk, &mut ChaCha20Rng::seed_from_u64(seed), count);
            write(&path, &(ext.to_json() + "\n"))?;
            for p in &ext.extra()[pk.extra().len()..] {
                writeln!(out, "{} -> {}", p.name, ext.group().label(p.element))?;
            }
        }
        Command::RingKeygen { ring, key } => {
            let r = load_ring(&ring)?;
            let mut rng = ChaCha20Rng::seed_from_u64(key.seed);
            let (pk, sk) = ring_keygen(&r, &key_params(&key)?, &mut rng)?;
            write_keys(&key, pk.to_json(), &sk)?;
            writeln!(out, "units: {}\ngenerators: {}", pk.units().len(), pk.group_key().presentation().gens().len())?;
        }
        Command::RingEncrypt { pk, value, terms, out: path, seed, mask_len } => {
            let pk = load_ring_pk(&pk)?;
            let r = pk
                .ring()
                .element(&value)
                .ok_or_else(|| CliError::new(exit::PARSE, format!("unknown ring element {value:?}")))?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let e = ring_encrypt_with(&pk, r, &mut rng, terms, mask_len)?;
            write(&path, &(e.to_json() + "\n"))?;
        }
        Command::RingDecrypt { pk, sk, input } => {
            let pk = load_ring_pk(&pk)?;
            let sk = load(&sk, SecretKey::from_json)?;
            let e = load_gr(&input, pk.ring())?;
            let r = ring_decrypt(&sk, &pk, &e)?;
            writeln!(out, "{}", pk.ring().label(r))?;
        }
        Command::RingEval { pk, expr, cts, out: path } => {
            let pk = load_ring_pk(&pk)?;
            let mut env = BTreeMap::new();
            for (name, p) in &cts {
                env.insert(name.clone(), load_gr(p, pk.ring())?);
            }
            let e = eval_expression(&expr, &env, pk.ring())?;
            write(&path, &(e.to_json() + "\n"))?;
            writeln!(out, "support: {}", e.support_size())?;
        }
        Command::Solve { input, n, s } => {
            let m = load_matrix(&input)?;
            let cb = ConjugateBasis::new(n, &s).map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
            match x_representation(&m, &cb) {
                Ok(w) => writeln!(out, "{}", basis_word_text(&w))?,
                Err(e @ (RepError::NotInGroup | RepError::NotInFreeGroup | RepError::BoundaryPoint)) => {
                    return Err(CliError::new(exit::SOLVER, e.to_string()))
                }
                Err(e) => return Err(CliError::new(exit::PARSE, e.to_string())),
            }
        }
        Command::Oracle { input, gens, n, s, depth, max_exp } => {
            let m = load_matrix(&input)?;
            let found = match n {
                Some(n) => {
                    let cb = ConjugateBasis::new(n, &s).map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
                    brute_force_representation(&m, &cb.basis_matrices(), depth, max_exp).map(|w| basis_word_text(&w))
                }
                None => {
                    let mut named = BTreeMap::new();
                    for (name, p) in &gens {
                        named.insert(name.clone(), load_matrix(p)?);
                    }
                    if named.is_empty() {
                        return Err(CliError::new(exit::PARSE, "no generators given"));
                    }
                    brute_force_representation(&m, &named, depth, max_exp).map(|w| w.to_string())
                }
            };
            writeln!(out, "{}", found.as_deref().unwrap_or("none"))?;
        }
        Command::AttackEval { input, queries, all } => {
            let dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
            let text = read(&input)?;
            let ph = PresentedHomomorphism::parse(&text, |p| {
                let path = dir.join(p);
                let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                FiniteRing::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
            })
            .map_err(|e| CliError::parse(&input, e))?;
            let kf = kernel_closure_default(&ph);
            if !ph.transversal_is_valid(&kf) {
                return Err(CliError::new(exit::VERIFY, "transversal elements are congruent modulo the kernel"));
            }
            let mut items = Vec::new();
            for q in &queries {
                items.push(MatRingElement::parse(ph.n, ph.m, q).map_err(|e| CliError::new(exit::PARSE, e))?);
            }
            if all {
                let gens = ph.closure_generators();
                let elems = enumerate_subring(ph.n, ph.m, &gens, 1 << 20)
                    .ok_or_else(|| CliError::new(exit::ATTACK, "algebra too large to enumerate"))?;
                let mut elems = elems;
                elems.sort();
                items.extend(elems);
            }
            writeln!(out, "kernel rank: {}", kf.form.rank())?;
            for a in &items {
                let r = evaluate_homomorphism(&ph, &kf, a)?;
                writeln!(out, "{a} -> {}", ph.ring.label(r))?;
            }
        }
        Command::WriteFixtures { out: dir } => {
            fs::create_dir_all(&dir)?;
            for name in fixtures::GROUP_FIXTURE_NAMES {
                let (p, g) = fixtures::group_fixture(name).expect("listed");
                write(&dir.join(format!("{name}.pres")), &p.to_text())?;
                write(&dir.join(format!("{name}.group")), &g.to_text())?;
            }
            for (name, r) in fixtures::eligible_rings().into_iter().chain(fixtures::ineligible_rings()) {
                write(&dir.join(format!("{}.ring", name.replace('^', "_"))), &r.to_text())?;
            }
            write(&dir.join("z12.ring"), &FiniteRing::zmod(12).to_text())?;
            write(&dir.join("upper_z12.attack"), &fixtures::upper_triangular_attack().to_text("z12.ring"))?;
            writeln!(out, "wrote fixtures to {}", dir.display())?;
        }
    }
    Ok(())
}

/// Infix `+`, `-` and `*` over ciphertext names with parentheses; `*`
/// binds tighter.
pub fn eval_expression(
    expr: &str,
    env: &BTreeMap<String, GroupRingElement>,
    ring: &FiniteRing,
) -> Result<GroupRingElement, CliError> {
    let tokens = tokenize(expr)?;
    let mut p = ExprParser { tokens, pos: 0, env, ring };
    let v = p.sum()?;
    if p.pos != p.tokens.len() {
        return Err(CliError::new(exit::PARSE, format!("unexpected {:?} in expression", p.tokens[p.pos])));
    }
    Ok(v)
}

fn tokenize(s: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if "+-*()".contains(c) {
            out.push(c.to_string());
            chars.next();
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let mut name = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_alphanumeric() || **d == '_') {
                name.push(d);
                chars.next();
            }
            out.push(name);
        } else {
            return Err(CliError::new(exit::PARSE, format!("unexpected character {c:?} in expression")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: Vec<String>,
    pos: usize,
    env: &'a BTreeMap<String, GroupRingElement>,
    ring: &'a FiniteRing,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(String::as_str)
    }

    fn sum(&mut self) -> Result<GroupRingElement, CliError> {
        let mut acc = self.product()?;
        while let Some(op @ ("+" | "-")) = self.peek() {
            let minus = op == "-";
            self.pos += 1;
            let rhs = self.product()?;
            let rhs = if minus { gr_neg(&rhs, self.ring) } else { rhs };
            acc = gr_add(&acc, &rhs, self.ring);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<GroupRingElement, CliError> {
        let mut acc = self.atom()?;
        while self.peek() == Some("*") {
            self.pos += 1;
            acc = gr_mul(&acc, &self.atom()?, self.ring);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<GroupRingElement, CliError> {
        let err = |m: String| CliError::new(exit::PARSE, m);
        let tok = self.peek().ok_or_else(|| err("expression ended early".into()))?.to_string();
        self.pos += 1;
        match tok.as_str() {
            "(" => {
                let v = self.sum()?;
                if self.peek() != Some(")") {
                    return Err(err("missing )".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            "-" => Ok(gr_neg(&self.atom()?, self.ring)),
            name => self.env.get(name).cloned().ok_or_else(|| err(format!("no ciphertext bound to {name:?}"))),
        }
    }
}
