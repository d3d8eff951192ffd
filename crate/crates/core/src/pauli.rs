//! Signed Pauli words over `n` qubits.
//!
//! An operator is stored as a pair of bitmasks (x-part, z-part) plus a global
//! phase `i^k`. Bit `q` of each mask refers to qubit `q`, and qubit 0 is the
//! leftmost letter of the text form.
//!
//! Phase convention: the letter-form phase multiplies the tensor product of the
//! letters as written, and single-qubit products follow the usual Pauli algebra
//! `XY = iZ`, `YZ = iX`, `ZX = iY` (so `XZ = -iY`, equivalently `Y = iXZ`). Every
//! phase computed in this crate derives from that table.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest qubit count a [`PauliOperator`] can represent.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Global phase `i^k`, `k` taken mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `+1` or `-1` for real phases.
    pub fn real_sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn conj(self) -> Self {
        Phase::from_exponent(-(self.0 as i64))
    }

    fn prefix(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A signed `n`-qubit Pauli word.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliOperator {
            n,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    pub fn from_letters(letters: &[Letter], phase: Phase) -> Self {
        assert!(letters.len() <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, letter) in letters.iter().enumerate() {
            let (xb, zb) = letter.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        PauliOperator {
            n: letters.len(),
            x,
            z,
            phase,
        }
    }

    /// Builds an operator from raw masks; bits above `n` are discarded.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: Phase) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliOperator {
            n,
            x: x & mask(n),
            z: z & mask(n),
            phase,
        }
    }

    /// The `index`-th unsigned word in lexicographic order (`I < X < Y < Z`,
    /// qubit 0 most significant). Valid for `index < 4^n`.
    pub fn from_index(n: usize, mut index: u64) -> Self {
        let mut letters = vec![Letter::I; n];
        for q in (0..n).rev() {
            letters[q] = Letter::ALL[(index % 4) as usize];
            index /= 4;
        }
        PauliOperator::from_letters(&letters, Phase::ONE)
    }

    /// Inverse of [`PauliOperator::from_index`], ignoring the phase.
    pub fn lex_index(&self) -> u64 {
        self.letters()
            .iter()
            .fold(0u64, |acc, l| acc * 4 + *l as u64)
    }

    /// Parses text such as `"XZZXI"`, `"-YZYII"` or `"+iXY"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (phase, body, offset) = if let Some(rest) = text.strip_prefix("+i") {
            (Phase::I, rest, 2)
        } else if let Some(rest) = text.strip_prefix("-i") {
            (Phase::MINUS_I, rest, 2)
        } else if let Some(rest) = text.strip_prefix('+') {
            (Phase::ONE, rest, 1)
        } else if let Some(rest) = text.strip_prefix('-') {
            (Phase::MINUS_ONE, rest, 1)
        } else {
            (Phase::ONE, text, 0)
        };
        if body.is_empty() {
            return Err(Error::Parse {
                position: offset,
                message: "empty Pauli word".into(),
            });
        }
        let mut letters = Vec::with_capacity(body.len());
        for (i, c) in body.chars().enumerate() {
            match Letter::from_char(c) {
                Some(l) => letters.push(l),
                None => {
                    return Err(Error::Parse {
                        position: offset + i,
                        message: format!("unexpected character {c:?}, expected one of I, X, Y, Z"),
                    })
                }
            }
        }
        if letters.len() > MAX_QUBITS {
            return Err(Error::Parse {
                position: offset + MAX_QUBITS,
                message: format!("word longer than {MAX_QUBITS} qubits"),
            });
        }
        Ok(PauliOperator::from_letters(&letters, phase))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    /// Sign as `+1`/`-1` for Hermitian operators.
    pub fn sign(&self) -> Option<i8> {
        self.phase.real_sign()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        PauliOperator { phase, ..*self }
    }

    /// The same word with phase `+1`.
    pub fn unsigned(&self) -> Self {
        self.with_phase(Phase::ONE)
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase * Phase::MINUS_ONE)
    }

    /// True if the letters agree, ignoring phase.
    pub fn same_word(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Qubits on which the operator acts non-trivially.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let (px, py, pz) = self.letter_masks();
        let (qx, qy, qz) = other.letter_masks();
        // XY = iZ, YZ = iX, ZX = iY; reversed orders pick up -i.
        let plus = ((px & qy) | (py & qz) | (pz & qx)).count_ones() as i64;
        let minus = ((px & qz) | (py & qx) | (pz & qy)).count_ones() as i64;
        let phase = self.phase * other.phase * Phase::from_exponent(plus - minus);
        PauliOperator {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase,
        }
    }

    fn letter_masks(&self) -> (u64, u64, u64) {
        (self.x & !self.z, self.x & self.z, !self.x & self.z)
    }

    /// Symplectic commutation test; phases are ignored.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Rotates the letters right by `shift` positions (negative shifts rotate left).
    pub fn cyclic_shift(&self, shift: i64) -> Self {
        if self.n == 0 {
            return *self;
        }
        let s = shift.rem_euclid(self.n as i64) as u32;
        let rot = |bits: u64| -> u64 {
            if s == 0 {
                bits
            } else {
                ((bits << s) | (bits >> (self.n as u32 - s))) & mask(self.n)
            }
        };
        PauliOperator {
            n: self.n,
            x: rot(self.x),
            z: rot(self.z),
            phase: self.phase,
        }
    }

    /// All `4^n` unsigned words in lexicographic order.
    pub fn all_words(n: usize) -> impl Iterator<Item = PauliOperator> {
        let count = 4u64.pow(n as u32);
        (0..count).map(move |i| PauliOperator::from_index(n, i))
    }

    /// Every unsigned word of weight `1..=max_weight`, in lexicographic order.
    pub fn words_up_to_weight(n: usize, max_weight: usize) -> Vec<PauliOperator> {
        let mut out = Vec::new();
        collect_words(n, &mut vec![Letter::I; n], 0, max_weight, false, &mut out);
        out.retain(|p| p.weight() > 0);
        out
    }

    /// Every unsigned word of weight exactly `weight`, in lexicographic order.
    pub fn words_of_weight(n: usize, weight: usize) -> Vec<PauliOperator> {
        let mut out = Vec::new();
        collect_words(n, &mut vec![Letter::I; n], 0, weight, true, &mut out);
        out
    }
}

fn collect_words(
    n: usize,
    letters: &mut Vec<Letter>,
    q: usize,
    left: usize,
    exact: bool,
    out: &mut Vec<PauliOperator>,
) {
    if q == n {
        if !exact || left == 0 {
            out.push(PauliOperator::from_letters(letters, Phase::ONE));
        }
        return;
    }
    if exact && n - q < left {
        return;
    }
    for l in Letter::ALL {
        if l != Letter::I && left == 0 {
            break;
        }
        letters[q] = l;
        let next = if l == Letter::I { left } else { left - 1 };
        collect_words(n, letters, q + 1, next, exact, out);
    }
    letters[q] = Letter::I;
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != Phase::ONE {
            f.write_str(self.phase.prefix())?;
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliOperator::parse(s)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliOperator::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Convenience for tests and literals; panics on malformed input.
pub fn pauli(text: &str) -> PauliOperator {
    PauliOperator::parse(text).unwrap_or_else(|e| panic!("bad Pauli literal {text:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    type Mat = Vec<Vec<Complex64>>;

    fn single(l: Letter) -> Mat {
        let o = Complex64::new(0.0, 0.0);
        let r = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match l {
            Letter::I => vec![vec![r, o], vec![o, r]],
            Letter::X => vec![vec![o, r], vec![r, o]],
            Letter::Y => vec![vec![o, -i], vec![i, o]],
            Letter::Z => vec![vec![r, o], vec![o, -r]],
        }
    }

    fn kron(a: &Mat, b: &Mat) -> Mat {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![Complex64::new(0.0, 0.0); ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn matmul(a: &Mat, b: &Mat) -> Mat {
        let d = a.len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn dense(p: &PauliOperator) -> Mat {
        let phase = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][p.phase().exponent() as usize];
        let mut m = vec![vec![phase]];
        for l in p.letters() {
            m = kron(&m, &single(l));
        }
        m
    }

    fn close(a: &Mat, b: &Mat) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn parse_examples() {
        let p = pauli("ZZI");
        assert_eq!(p.n(), 3);
        assert_eq!(p.letters(), vec![Letter::Z, Letter::Z, Letter::I]);
        assert_eq!(p.sign(), Some(1));

        let id = pauli("III");
        assert!(id.is_identity_up_to_phase());
        assert_eq!(id, PauliOperator::identity(3));

        let m = pauli("-YZYII");
        assert_eq!(m.n(), 5);
        assert_eq!(m.letters(), vec![Letter::Y, Letter::Z, Letter::Y, Letter::I, Letter::I]);
        assert_eq!(m.sign(), Some(-1));

        assert_eq!(pauli("+iXZ").phase(), Phase::I);
        assert_eq!(pauli("-iXZ").phase(), Phase::MINUS_I);
        assert_eq!(pauli("+XZ").phase(), Phase::ONE);
    }

    #[test]
    fn parse_errors_name_position() {
        assert_eq!(
            PauliOperator::parse("XZQ").unwrap_err(),
            Error::Parse {
                position: 2,
                message: "unexpected character 'Q', expected one of I, X, Y, Z".into()
            }
        );
        match PauliOperator::parse("-iXa").unwrap_err() {
            Error::Parse { position, .. } => assert_eq!(position, 3),
            e => panic!("{e}"),
        }
        assert!(matches!(PauliOperator::parse(""), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(PauliOperator::parse("-"), Err(Error::Parse { position: 1, .. })));
        assert!(matches!(PauliOperator::parse("+i"), Err(Error::Parse { position: 2, .. })));
    }

    #[test]
    fn display_round_trips() {
        for s in ["ZZI", "-YZYII", "+iX", "-iIIZ", "I"] {
            assert_eq!(pauli(s).to_string(), s);
        }
        assert_eq!(pauli("+ZZ").to_string(), "ZZ");
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(pauli("ZII").multiply(&pauli("ZZI")).unwrap(), pauli("IZI"));
        // X·Z = -iY
        assert_eq!(pauli("XII").multiply(&pauli("ZII")).unwrap(), pauli("-iYII"));
        let p = pauli("-XYZ");
        assert_eq!(p.multiply(&PauliOperator::identity(3)).unwrap(), p);
        assert!(matches!(
            pauli("XI").multiply(&pauli("X")),
            Err(Error::Dimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn multiply_convention_matches_matrices() {
        let xz = matmul(&single(Letter::X), &single(Letter::Z));
        assert!(close(&xz, &dense(&pauli("-iY"))));
        assert!(close(&dense(&pauli("X").multiply(&pauli("Z")).unwrap()), &xz));
    }

    #[test]
    fn commutes_examples() {
        assert!(pauli("ZZI").commutes(&pauli("IZZ")).unwrap());
        assert!(!pauli("XII").commutes(&pauli("ZII")).unwrap());
        assert!(pauli("YZYII").commutes(&pauli("IYZYI")).unwrap());
        assert!(pauli("X").commutes(&pauli("XX")).is_err());
    }

    #[test]
    fn commutes_yzyii_against_dense_commutator() {
        let a = dense(&pauli("YZYII"));
        let b = dense(&pauli("IYZYI"));
        assert!(close(&matmul(&a, &b), &matmul(&b, &a)));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(pauli("XZZXI").weight(), 4);
        assert_eq!(pauli("III").weight(), 0);
        assert_eq!(pauli("YZYII").weight(), 3);
    }

    #[test]
    fn cyclic_shift_examples() {
        assert_eq!(pauli("YZYII").cyclic_shift(1), pauli("IYZYI"));
        assert_eq!(pauli("YZYII").cyclic_shift(3), pauli("YIIYZ"));
        assert_eq!(pauli("YZYII").cyclic_shift(4), pauli("ZYIIY"));
        assert_eq!(pauli("-XZY").cyclic_shift(0), pauli("-XZY"));
        assert_eq!(pauli("YZYII").cyclic_shift(-1), pauli("ZYIIY"));
    }

    #[test]
    fn lexicographic_index_round_trip() {
        assert_eq!(PauliOperator::from_index(3, 0), pauli("III"));
        assert_eq!(PauliOperator::from_index(3, 1), pauli("IIX"));
        assert_eq!(PauliOperator::from_index(3, 16), pauli("XII"));
        for i in 0..64 {
            assert_eq!(PauliOperator::from_index(3, i).lex_index(), i);
        }
    }

    #[test]
    fn words_up_to_weight_counts() {
        // sum_{w=1}^{3} C(5,w) 3^w = 15 + 90 + 270
        assert_eq!(PauliOperator::words_up_to_weight(5, 3).len(), 375);
        assert_eq!(PauliOperator::words_up_to_weight(3, 3).len(), 63);
        let w = PauliOperator::words_up_to_weight(4, 2);
        assert!(w.windows(2).all(|p| p[0].lex_index() < p[1].lex_index()));
        assert_eq!(PauliOperator::words_of_weight(5, 0), vec![PauliOperator::identity(5)]);
        assert_eq!(PauliOperator::words_of_weight(5, 2).len(), 90);
        assert_eq!(PauliOperator::words_of_weight(3, 3).len(), 27);
        assert!(PauliOperator::words_of_weight(3, 4).is_empty());
    }

    #[test]
    fn exhaustive_two_qubit_oracle() {
        let words: Vec<_> = PauliOperator::all_words(2).collect();
        for p in &words {
            for q in &words {
                let prod = p.multiply(q).unwrap();
                assert!(close(&dense(&prod), &matmul(&dense(p), &dense(q))), "{p} * {q}");
                let (a, b) = (dense(p), dense(q));
                assert_eq!(p.commutes(q).unwrap(), close(&matmul(&a, &b), &matmul(&b, &a)));
            }
        }
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (proptest::collection::vec(0usize..4, n), 0i64..4).prop_map(|(ls, ph)| {
            let letters: Vec<Letter> = ls.into_iter().map(|i| Letter::ALL[i]).collect();
            PauliOperator::from_letters(&letters, Phase::from_exponent(ph))
        })
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = PauliOperator> {
        arb_pauli(n).prop_map(|p| if p.is_hermitian() { p } else { p.with_phase(p.phase() * Phase::I) })
    }

    proptest! {
        #[test]
        fn matrix_oracle_n3(p in arb_pauli(3), q in arb_pauli(3)) {
            let prod = p.multiply(&q).unwrap();
            prop_assert!(close(&dense(&prod), &matmul(&dense(&p), &dense(&q))));
            let (a, b) = (dense(&p), dense(&q));
            prop_assert_eq!(p.commutes(&q).unwrap(), close(&matmul(&a, &b), &matmul(&b, &a)));
        }

        #[test]
        fn commutation_is_symmetric(p in arb_pauli(7), q in arb_pauli(7)) {
            prop_assert_eq!(p.commutes(&q).unwrap(), q.commutes(&p).unwrap());
        }

        #[test]
        fn multiply_is_associative(p in arb_pauli(6), q in arb_pauli(6), r in arb_pauli(6)) {
            let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn hermitian_squares_to_identity(p in arb_hermitian(8), q in arb_pauli(8)) {
            prop_assert_eq!(p.multiply(&p).unwrap(), PauliOperator::identity(8));
            prop_assert_eq!(p.multiply(&p.multiply(&q).unwrap()).unwrap(), q);
        }

        #[test]
        fn shift_by_n_is_identity(p in arb_pauli(5), s in -12i64..12) {
            prop_assert_eq!(p.cyclic_shift(5), p);
            prop_assert_eq!(p.cyclic_shift(s).weight(), p.weight());
            prop_assert_eq!(p.cyclic_shift(s).cyclic_shift(-s), p);
        }

        #[test]
        fn parse_format_round_trip(p in arb_pauli(6)) {
            prop_assert_eq!(PauliOperator::parse(&p.to_string()).unwrap(), p);
        }
    }
}
