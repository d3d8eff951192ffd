//! Stabilizer codes encoding one logical qubit.
//!
//! A [`StabilizerCode`] is validated on construction and carries a reduced
//! symplectic basis of its normalizer (the `n - 1` generators followed by the
//! two logical representatives). Every normalizer element decomposes uniquely
//! over that basis, which gives signed group membership and the exact logical
//! action of any Pauli word.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::pauli::{Letter, PauliOperator, Phase, MAX_QUBITS};

/// Largest `n` for which the stabilizer group and cosets are enumerated.
pub const ENUMERATION_LIMIT: usize = 16;
/// Largest `n` for the brute-force `4^n` distance search.
pub const DISTANCE_LIMIT: usize = 8;

/// Unvalidated code data, as read from a file or assembled by hand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeDefinition {
    pub name: String,
    pub n: usize,
    pub generators: Vec<PauliOperator>,
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    QubitCount {
        what: String,
        expected: usize,
        found: usize,
    },
    NonHermitian(String),
    GeneratorCount {
        expected: usize,
        found: usize,
    },
    AnticommutingGenerators(usize, usize),
    /// The listed generators multiply to `±I`.
    DependentGenerators(Vec<usize>),
    LogicalAnticommutes {
        logical: &'static str,
        generator: usize,
    },
    LogicalsCommute,
    LogicalInStabilizerGroup(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::QubitCount {
                what,
                expected,
                found,
            } => write!(f, "{what} acts on {found} qubits, expected {expected}"),
            Violation::NonHermitian(what) => write!(f, "{what} is not Hermitian"),
            Violation::GeneratorCount { expected, found } => write!(
                f,
                "expected {expected} generators for a single logical qubit, found {found}"
            ),
            Violation::AnticommutingGenerators(i, j) => {
                write!(f, "generators {i} and {j} anticommute")
            }
            Violation::DependentGenerators(idx) => {
                let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                write!(f, "product of generators {{{}}} is ±identity", list.join(", "))
            }
            Violation::LogicalAnticommutes { logical, generator } => {
                write!(f, "{logical} anticommutes with generator {generator}")
            }
            Violation::LogicalsCommute => write!(f, "logical_x and logical_z commute"),
            Violation::LogicalInStabilizerGroup(which) => {
                write!(f, "{which} lies in the stabilizer group")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Packs a word into a 128-bit symplectic vector: x-part low, z-part high.
fn symplectic(p: &PauliOperator) -> u128 {
    p.x_bits() as u128 | (p.z_bits() as u128) << 64
}

/// Row-reduced span of a list of words, remembering which inputs form each row.
#[derive(Clone, Debug)]
struct ReducedBasis {
    /// (pivot bit, reduced vector, combination mask over the inputs)
    rows: Vec<(u32, u128, u128)>,
}

impl ReducedBasis {
    /// Reduces `vectors` in order. Returns the basis and, for every input that
    /// reduced to zero, the combination of inputs that cancels.
    fn build(vectors: &[u128]) -> (Self, Vec<u128>) {
        let mut basis = ReducedBasis { rows: Vec::new() };
        let mut dependent = Vec::new();
        for (i, &v) in vectors.iter().enumerate() {
            let (rest, combo) = basis.reduce(v, 1u128 << i);
            if rest == 0 {
                dependent.push(combo);
            } else {
                let pivot = rest.trailing_zeros();
                basis.rows.push((pivot, rest, combo));
            }
        }
        (basis, dependent)
    }

    fn reduce(&self, mut v: u128, mut combo: u128) -> (u128, u128) {
        for &(pivot, row, row_combo) in &self.rows {
            if v >> pivot & 1 == 1 {
                v ^= row;
                combo ^= row_combo;
            }
        }
        (v, combo)
    }

    /// Combination of inputs spanning `v`, if any.
    fn decompose(&self, v: u128) -> Option<u128> {
        match self.reduce(v, 0) {
            (0, combo) => Some(combo),
            _ => None,
        }
    }
}

/// Validates raw code data.
pub fn validate_code(def: &CodeDefinition) -> ValidationReport {
    let mut violations = Vec::new();
    let n = def.n;
    let check_op = |what: String, p: &PauliOperator, violations: &mut Vec<Violation>| {
        if p.n() != n {
            violations.push(Violation::QubitCount {
                what: what.clone(),
                expected: n,
                found: p.n(),
            });
        }
        if !p.is_hermitian() {
            violations.push(Violation::NonHermitian(what));
        }
    };
    for (i, g) in def.generators.iter().enumerate() {
        check_op(format!("generator {i} ({g})"), g, &mut violations);
    }
    check_op(format!("logical_x ({})", def.logical_x), &def.logical_x, &mut violations);
    check_op(format!("logical_z ({})", def.logical_z), &def.logical_z, &mut violations);
    if n == 0 || n > MAX_QUBITS {
        violations.push(Violation::QubitCount {
            what: "code".into(),
            expected: n.clamp(1, MAX_QUBITS),
            found: n,
        });
    }
    if def.generators.len() + 1 != n {
        violations.push(Violation::GeneratorCount {
            expected: n.saturating_sub(1),
            found: def.generators.len(),
        });
    }
    // Structural checks need consistent dimensions.
    if !violations.is_empty() {
        return ValidationReport { violations };
    }

    let gens = &def.generators;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if !gens[i].commutes_unchecked(&gens[j]) {
                violations.push(Violation::AnticommutingGenerators(i, j));
            }
        }
    }
    let vectors: Vec<u128> = gens.iter().map(symplectic).collect();
    let (basis, dependent) = ReducedBasis::build(&vectors);
    for combo in dependent {
        let idx: Vec<usize> = (0..gens.len()).filter(|i| combo >> i & 1 == 1).collect();
        violations.push(Violation::DependentGenerators(idx));
    }
    for (name, logical) in [("logical_x", &def.logical_x), ("logical_z", &def.logical_z)] {
        for (i, g) in gens.iter().enumerate() {
            if !logical.commutes_unchecked(g) {
                violations.push(Violation::LogicalAnticommutes {
                    logical: name,
                    generator: i,
                });
            }
        }
        if basis.decompose(symplectic(logical)).is_some() {
            violations.push(Violation::LogicalInStabilizerGroup(name));
        }
    }
    if def.logical_x.commutes_unchecked(&def.logical_z) {
        violations.push(Violation::LogicalsCommute);
    }
    ValidationReport { violations }
}

/// A validated `[[n, 1]]` stabilizer code.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliOperator>,
    logical_x: PauliOperator,
    logical_z: PauliOperator,
    normalizer: ReducedBasis,
}

impl PartialEq for StabilizerCode {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.generators == other.generators
            && self.logical_x == other.logical_x
            && self.logical_z == other.logical_z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Stabilizer,
    Detectable,
    LogicalAction,
    /// Normalizer elements outside stabilizer and logical cosets; cannot occur
    /// for a single encoded qubit.
    UndetectableNonLogical,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Stabilizer => "Stabilizer",
            Kind::Detectable => "Detectable",
            Kind::LogicalAction => "LogicalAction",
            Kind::UndetectableNonLogical => "UndetectableNonLogical",
        };
        f.write_str(s)
    }
}

/// How a Pauli word acts on the code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Classification {
    pub kind: Kind,
    /// Logical letter on the encoded qubit (stabilizer and logical kinds only).
    pub logical_letter: Option<Letter>,
    /// The exact scalar `c` such that the operator acts as `c·L` on the codespace.
    pub action_sign: Option<i8>,
}

impl Classification {
    pub fn detectable() -> Self {
        Classification {
            kind: Kind::Detectable,
            logical_letter: None,
            action_sign: None,
        }
    }

    pub fn acting_as(letter: Letter, sign: i8) -> Self {
        Classification {
            kind: if letter == Letter::I {
                Kind::Stabilizer
            } else {
                Kind::LogicalAction
            },
            logical_letter: Some(letter),
            action_sign: Some(sign),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let (Some(l), Some(s)) = (self.logical_letter, self.action_sign) {
            write!(f, " {}{l}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalAxis {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetElement {
    pub operator: PauliOperator,
    pub action_sign: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitEntry {
    pub shift: usize,
    pub operator: PauliOperator,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    pub distance: usize,
    /// Lexicographically smallest minimum-weight logical operator.
    pub witness: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectabilityReport {
    pub pairs_checked: usize,
    /// First ordered pair `(E_i, E_j)` whose product is neither a stabilizer nor detectable.
    pub violation: Option<(PauliOperator, PauliOperator)>,
}

impl CorrectabilityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Symplectic (phase-free) view of a normalizer decomposition.
struct Decomposition {
    generators: u128,
    logical_x: bool,
    logical_z: bool,
}

impl StabilizerCode {
    pub fn from_definition(def: CodeDefinition) -> Result<Self> {
        let report = validate_code(&def);
        if !report.passed() {
            return Err(Error::InvalidCode(report));
        }
        let mut vectors: Vec<u128> = def.generators.iter().map(symplectic).collect();
        vectors.push(symplectic(&def.logical_x));
        vectors.push(symplectic(&def.logical_z));
        let (normalizer, dependent) = ReducedBasis::build(&vectors);
        debug_assert!(dependent.is_empty());
        Ok(StabilizerCode {
            name: def.name,
            n: def.n,
            generators: def.generators,
            logical_x: def.logical_x,
            logical_z: def.logical_z,
            normalizer,
        })
    }

    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
    ) -> Result<Self> {
        StabilizerCode::from_definition(CodeDefinition {
            name: name.into(),
            n: logical_x.n(),
            generators,
            logical_x,
            logical_z,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn logical_x(&self) -> &PauliOperator {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOperator {
        &self.logical_z
    }

    pub fn logical(&self, axis: LogicalAxis) -> &PauliOperator {
        match axis {
            LogicalAxis::X => &self.logical_x,
            LogicalAxis::Z => &self.logical_z,
        }
    }

    /// `Ȳ = i·X̄·Z̄`, mirroring `Y = iXZ`.
    pub fn logical_y(&self) -> PauliOperator {
        let xz = self.logical_x.mul_unchecked(&self.logical_z);
        xz.with_phase(xz.phase() * Phase::I)
    }

    pub fn logical_for(&self, letter: Letter) -> PauliOperator {
        match letter {
            Letter::I => PauliOperator::identity(self.n),
            Letter::X => self.logical_x,
            Letter::Y => self.logical_y(),
            Letter::Z => self.logical_z,
        }
    }

    pub fn definition(&self) -> CodeDefinition {
        CodeDefinition {
            name: self.name.clone(),
            n: self.n,
            generators: self.generators.clone(),
            logical_x: self.logical_x,
            logical_z: self.logical_z,
        }
    }

    fn check_dims(&self, p: &PauliOperator) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: p.n(),
            });
        }
        Ok(())
    }

    /// Bit `i` is set iff `p` anticommutes with generator `i`.
    pub fn syndrome(&self, p: &PauliOperator) -> u64 {
        self.generators
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, g)| acc | ((!p.commutes_unchecked(g)) as u64) << i)
    }

    fn decompose(&self, p: &PauliOperator) -> Option<Decomposition> {
        if self.syndrome(p) != 0 {
            return None;
        }
        let combo = self
            .normalizer
            .decompose(symplectic(p))
            .expect("normalizer of a k = 1 code is spanned by generators and logicals");
        let k = self.generators.len();
        Some(Decomposition {
            generators: combo & ((1u128 << k) - 1),
            logical_x: combo >> k & 1 == 1,
            logical_z: combo >> (k + 1) & 1 == 1,
        })
    }

    /// Ordered product of the generators selected by `mask`.
    pub fn group_element(&self, mask: u64) -> PauliOperator {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(PauliOperator::identity(self.n), |acc, (_, g)| acc.mul_unchecked(g))
    }

    /// Phase-free classification; accepts non-Hermitian words and never fails.
    pub fn classify_word(&self, p: &PauliOperator) -> (Kind, Option<Letter>) {
        match self.decompose(p) {
            None => (Kind::Detectable, None),
            Some(d) => {
                let letter = match (d.logical_x, d.logical_z) {
                    (false, false) => Letter::I,
                    (true, false) => Letter::X,
                    (true, true) => Letter::Y,
                    (false, true) => Letter::Z,
                };
                let kind = if letter == Letter::I {
                    Kind::Stabilizer
                } else {
                    Kind::LogicalAction
                };
                (kind, Some(letter))
            }
        }
    }

    /// Classifies a Hermitian Pauli word, resolving the exact action sign.
    pub fn classify(&self, p: &PauliOperator) -> Result<Classification> {
        self.check_dims(p)?;
        if !p.is_hermitian() {
            return Err(Error::NonHermitian(p.to_string()));
        }
        let Some(d) = self.decompose(p) else {
            return Ok(Classification::detectable());
        };
        let letter = match (d.logical_x, d.logical_z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        };
        // p = c · L · S with S acting as +1 on the codespace.
        let stabilizer = self.group_element(d.generators as u64);
        let reference = self.logical_for(letter).mul_unchecked(&stabilizer);
        debug_assert!(reference.same_word(p));
        let c = p.phase() * reference.phase().conj();
        let sign = c
            .real_sign()
            .expect("Hermitian operator and Hermitian representative differ by a real sign");
        Ok(Classification::acting_as(letter, sign))
    }

    /// All `2^(n-1)` elements of the stabilizer group, indexed by generator subset.
    pub fn enumerate_group(&self) -> Result<Vec<PauliOperator>> {
        if self.n > ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                what: "stabilizer group enumeration",
                limit: ENUMERATION_LIMIT,
                n: self.n,
            });
        }
        let size = 1u64 << self.generators.len();
        Ok((0..size).map(|m| self.group_element(m)).collect())
    }

    /// Every physical word implementing the chosen logical rotation: `{L·S}`.
    pub fn logical_coset(&self, axis: LogicalAxis) -> Result<Vec<CosetElement>> {
        let logical = *self.logical(axis);
        self.enumerate_group()?
            .iter()
            .map(|s| {
                let operator = logical.mul_unchecked(s);
                let c = self.classify(&operator)?;
                Ok(CosetElement {
                    operator,
                    action_sign: c.action_sign.expect("coset elements are logical"),
                })
            })
            .collect()
    }

    /// Lowest-weight coset element, ties broken lexicographically.
    pub fn min_weight_logical(&self, axis: LogicalAxis) -> Result<CosetElement> {
        let coset = self.logical_coset(axis)?;
        Ok(*coset
            .iter()
            .min_by_key(|e| (e.operator.weight(), e.operator.lex_index()))
            .expect("coset is never empty"))
    }

    /// Classifies every cyclic shift `0..n` of `p`.
    pub fn cyclic_orbit_report(&self, p: &PauliOperator) -> Result<Vec<OrbitEntry>> {
        self.check_dims(p)?;
        (0..self.n)
            .map(|shift| {
                let operator = p.cyclic_shift(shift as i64);
                Ok(OrbitEntry {
                    shift,
                    operator,
                    classification: self.classify(&operator)?,
                })
            })
            .collect()
    }

    /// Checks the pairwise correction condition over `errors` plus the
    /// no-error case (identity), which is always included first.
    pub fn correctable_set_check(&self, errors: &[PauliOperator]) -> Result<CorrectabilityReport> {
        for e in errors {
            self.check_dims(e)?;
            if !e.is_hermitian() {
                return Err(Error::NonHermitian(e.to_string()));
            }
        }
        let mut set = vec![PauliOperator::identity(self.n)];
        set.extend_from_slice(errors);
        let mut pairs_checked = 0;
        for a in &set {
            for b in &set {
                pairs_checked += 1;
                // a is Hermitian, so a† = a.
                let product = a.mul_unchecked(b);
                match self.classify_word(&product).0 {
                    Kind::Stabilizer | Kind::Detectable => {}
                    _ => {
                        return Ok(CorrectabilityReport {
                            pairs_checked,
                            violation: Some((*a, *b)),
                        })
                    }
                }
            }
        }
        Ok(CorrectabilityReport {
            pairs_checked,
            violation: None,
        })
    }

    pub fn distance(&self) -> Result<DistanceReport> {
        self.distance_with(Execution::default())
    }

    /// Brute-force minimum weight of a nontrivial logical operator over all `4^n` words.
    pub fn distance_with(&self, exec: Execution) -> Result<DistanceReport> {
        if self.n > DISTANCE_LIMIT {
            return Err(Error::Capacity {
                what: "brute-force distance",
                limit: DISTANCE_LIMIT,
                n: self.n,
            });
        }
        let total = 4u64.pow(self.n as u32);
        let (distance, index) = parallel::min_by_key_indices(exec, total, |i| {
            let word = PauliOperator::from_index(self.n, i);
            match self.classify_word(&word).0 {
                Kind::LogicalAction => Some(word.weight()),
                _ => None,
            }
        })
        .expect("logical operators exist for a valid code");
        Ok(DistanceReport {
            distance,
            witness: PauliOperator::from_index(self.n, index),
        })
    }
}

/// Minimum-weight correction for every syndrome, ties broken lexicographically.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    corrections: HashMap<u64, PauliOperator>,
}

impl SyndromeTable {
    pub fn build(code: &StabilizerCode) -> Result<Self> {
        if code.n() > ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                what: "syndrome table",
                limit: ENUMERATION_LIMIT,
                n: code.n(),
            });
        }
        let wanted = 1usize << code.generators().len();
        let mut corrections = HashMap::with_capacity(wanted);
        'outer: for w in 0..=code.n() {
            for word in PauliOperator::words_of_weight(code.n(), w) {
                corrections.entry(code.syndrome(&word)).or_insert(word);
                if corrections.len() == wanted {
                    break 'outer;
                }
            }
        }
        Ok(SyndromeTable { corrections })
    }

    pub fn correction(&self, syndrome: u64) -> Option<&PauliOperator> {
        self.corrections.get(&syndrome)
    }

    pub fn len(&self) -> usize {
        self.corrections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corrections.is_empty()
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_CODES: [&str; 3] = ["trivial", "repetition3", "fivequbit"];

fn parse_all(words: &[&str]) -> Vec<PauliOperator> {
    words
        .iter()
        .map(|w| PauliOperator::parse(w).expect("built-in words are well formed"))
        .collect()
}

pub fn builtin(name: &str) -> Result<StabilizerCode> {
    let (gens, lx, lz): (&[&str], &str, &str) = match name {
        "trivial" => (&[], "X", "Z"),
        "repetition3" => (&["ZZI", "IZZ"], "XXX", "ZII"),
        "fivequbit" => (&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"], "XXXXX", "ZZZZZ"),
        other => {
            return Err(Error::Config(format!(
                "unknown built-in code {other:?} (known: {})",
                BUILTIN_CODES.join(", ")
            )))
        }
    };
    let generators = parse_all(gens);
    let [lx, lz]: [PauliOperator; 2] = parse_all(&[lx, lz]).try_into().expect("two logicals");
    StabilizerCode::new(name, generators, lx, lz)
}

/// Parses the line-oriented code file format:
///
/// ```text
/// # comment
/// n=3
/// gen ZZI
/// gen IZZ
/// logical_x XXX
/// logical_z ZII
/// ```
pub fn parse_code_definition(name: &str, text: &str) -> Result<CodeDefinition> {
    let err = |line: usize, message: String| Error::Parse {
        position: line,
        message: format!("line {line}: {message}"),
    };
    let mut n = None;
    let mut generators = Vec::new();
    let mut logical_x = None;
    let mut logical_z = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if n.is_none() {
            let value = line
                .strip_prefix("n=")
                .ok_or_else(|| err(lineno, format!("expected `n=<int>`, found {line:?}")))?;
            n = Some(
                value
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| err(lineno, format!("bad qubit count: {e}")))?,
            );
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err(lineno, format!("expected `<key> <pauli>`, found {line:?}")))?;
        let op = PauliOperator::parse(value.trim())
            .map_err(|e| err(lineno, format!("bad Pauli word: {e}")))?;
        match key {
            "gen" => generators.push(op),
            "logical_x" => logical_x = Some(op),
            "logical_z" => logical_z = Some(op),
            other => return Err(err(lineno, format!("unknown key {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing `n=<int>` header".into()))?;
    Ok(CodeDefinition {
        name: name.to_string(),
        n,
        generators,
        logical_x: logical_x.ok_or_else(|| err(0, "missing logical_x".into()))?,
        logical_z: logical_z.ok_or_else(|| err(0, "missing logical_z".into()))?,
    })
}

pub fn format_code_definition(def: &CodeDefinition) -> String {
    let mut out = format!("# {}\nn={}\n", def.name, def.n);
    for g in &def.generators {
        out.push_str(&format!("gen {g}\n"));
    }
    out.push_str(&format!("logical_x {}\nlogical_z {}\n", def.logical_x, def.logical_z));
    out
}

pub fn load_code_file(path: &Path) -> Result<StabilizerCode> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "custom".into());
    StabilizerCode::from_definition(parse_code_definition(&name, &text)?)
}
