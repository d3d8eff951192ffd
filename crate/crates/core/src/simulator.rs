//! Dense statevector engine.
//!
//! Basis index convention: qubit 0 (the leftmost Pauli letter) is the most
//! significant bit of the amplitude index, so `|q0 q1 ... q(n-1)>` has index
//! `q0·2^(n-1) + ... + q(n-1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliOperator};
use crate::stabilizer::{Classification, StabilizerCode};

/// Largest `n` for Pauli application, codewords and commuting-term evolution.
pub const STATE_LIMIT: usize = 16;
/// Largest `n` for evolution through a dense Hermitian eigendecomposition.
pub const DENSE_LIMIT: usize = 10;

pub const NORM_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

fn check_capacity(what: &'static str, limit: usize, n: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Capacity { what, limit, n });
    }
    Ok(())
}

fn reverse_bits(bits: u64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    (bits.reverse_bits() >> (64 - n)) as usize
}

/// A Pauli word translated into amplitude-index masks.
#[derive(Clone, Copy, Debug)]
struct IndexPauli {
    flip: usize,
    phase_mask: usize,
    scalar: Complex64,
}

impl IndexPauli {
    fn new(p: &PauliOperator) -> Self {
        let n = p.n();
        let y_count = (p.x_bits() & p.z_bits()).count_ones() as u8;
        // Y = iXZ on every qubit; the stored phase multiplies the word.
        let k = (p.phase().exponent() + y_count) % 4;
        let scalar = [
            Complex64::new(1.0, 0.0),
            I,
            Complex64::new(-1.0, 0.0),
            -I,
        ][k as usize];
        IndexPauli {
            flip: reverse_bits(p.x_bits(), n),
            phase_mask: reverse_bits(p.z_bits(), n),
            scalar,
        }
    }

    /// Coefficient `c` and target `b'` such that `P|b> = c|b'>`.
    #[inline]
    fn act(&self, b: usize) -> (Complex64, usize) {
        let c = if (b & self.phase_mask).count_ones() % 2 == 1 {
            -self.scalar
        } else {
            self.scalar
        };
        (c, b ^ self.flip)
    }

    fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; amps.len()];
        for (b, a) in amps.iter().enumerate() {
            let (c, target) = self.act(b);
            out[target] = c * a;
        }
        out
    }
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity("state vector", STATE_LIMIT, n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Dimension {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amplitudes })
    }

    /// Normalizes the given amplitudes; rejects zero vectors and wrong lengths.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity("state vector", STATE_LIMIT, n)?;
        if amplitudes.len() != 1usize << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let state = StateVector { n, amplitudes };
        state.normalized()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_n(other.n)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm < 1e-12 || !norm.is_finite() {
            return Err(Error::Construction("cannot normalize a zero vector".into()));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(self)
    }

    /// `(a·self + b·other)` normalized.
    pub fn superpose(&self, a: Complex64, other: &StateVector, b: Complex64) -> Result<Self> {
        self.check_n(other.n)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| a * x + b * y)
            .collect();
        StateVector { n: self.n, amplitudes }.normalized()
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }

    /// Projects onto the `outcome` (`+1`/`-1`) eigenspace of a Hermitian Pauli
    /// and renormalizes. Returns the outcome probability alongside the state.
    pub fn project(&self, p: &PauliOperator, outcome: i8) -> Result<(f64, StateVector)> {
        self.check_n(p.n())?;
        let image = IndexPauli::new(p).apply(&self.amplitudes);
        let s = if outcome > 0 { 1.0 } else { -1.0 };
        let amplitudes: Vec<Complex64> = self
            .amplitudes
            .iter()
            .zip(&image)
            .map(|(a, pa)| (a + pa * s) * 0.5)
            .collect();
        let prob = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let state = StateVector { n: self.n, amplitudes }.normalized()?;
        Ok((prob, state))
    }
}

pub fn apply_pauli(state: &StateVector, p: &PauliOperator) -> Result<StateVector> {
    state.check_n(p.n())?;
    Ok(StateVector {
        n: state.n,
        amplitudes: IndexPauli::new(p).apply(&state.amplitudes),
    })
}

/// `<state|P|state>` for Hermitian `P`.
pub fn expectation(state: &StateVector, p: &PauliOperator) -> Result<f64> {
    state.check_n(p.n())?;
    if !p.is_hermitian() {
        return Err(Error::NonHermitian(p.to_string()));
    }
    let ip = IndexPauli::new(p);
    let value: Complex64 = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let (c, target) = ip.act(b);
            state.amplitudes[target].conj() * c * a
        })
        .sum();
    Ok(value.re.clamp(-1.0, 1.0))
}

/// A Hermitian sum of Pauli words, `H = Σ c_k P_k` (ħ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SignalHamiltonian {
    n: usize,
    terms: Vec<(f64, PauliOperator)>,
}

impl SignalHamiltonian {
    pub fn new(terms: Vec<(f64, PauliOperator)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Hamiltonian("no terms".into()));
        };
        let n = first.n();
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::Hamiltonian(format!("non-finite coefficient {c} on {p}")));
            }
            if !p.is_hermitian() {
                return Err(Error::NonHermitian(p.to_string()));
            }
            if p.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.n(),
                });
            }
        }
        Ok(SignalHamiltonian { n, terms })
    }

    /// Equal unit coefficients on every operator.
    pub fn uniform(ops: &[PauliOperator]) -> Result<Self> {
        SignalHamiltonian::new(ops.iter().map(|p| (1.0, *p)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliOperator)] {
        &self.terms
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SignalHamiltonian::new(self.terms.iter().map(|(c, p)| (c * factor, *p)).collect())
    }

    pub fn is_commuting(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, (_, a))| {
            self.terms[i + 1..]
                .iter()
                .all(|(_, b)| a.commutes_unchecked(b))
        })
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        check_capacity("dense Hamiltonian", DENSE_LIMIT, self.n)?;
        let dim = 1usize << self.n;
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for (c, p) in &self.terms {
            let ip = IndexPauli::new(p);
            for b in 0..dim {
                let (coef, target) = ip.act(b);
                h[(target, b)] += coef * *c;
            }
        }
        Ok(h)
    }
}

/// `exp(-i·H·tau)|state>`.
///
/// Commuting Hamiltonians use the exact product `Π (cos(c·tau) - i·sin(c·tau)·P)`;
/// anything else goes through a dense eigendecomposition.
pub fn evolve(state: &StateVector, h: &SignalHamiltonian, tau: f64) -> Result<StateVector> {
    state.check_n(h.n())?;
    if h.is_commuting() {
        evolve_commuting(state, h, tau)
    } else {
        evolve_dense(state, h, tau)
    }
}

pub fn evolve_commuting(state: &StateVector, h: &SignalHamiltonian, tau: f64) -> Result<StateVector> {
    state.check_n(h.n())?;
    check_capacity("commuting evolution", STATE_LIMIT, state.n)?;
    if !h.is_commuting() {
        return Err(Error::Hamiltonian("terms do not pairwise commute".into()));
    }
    let mut amps = state.amplitudes.clone();
    let mut next = vec![ZERO; amps.len()];
    for (c, p) in h.terms() {
        let theta = c * tau;
        if theta == 0.0 {
            continue;
        }
        let ip = IndexPauli::new(p);
        let cos = Complex64::new(theta.cos(), 0.0);
        let msin = -I * theta.sin();
        next.copy_from_slice(&amps);
        for v in next.iter_mut() {
            *v *= cos;
        }
        for (b, a) in amps.iter().enumerate() {
            let (coef, target) = ip.act(b);
            next[target] += msin * coef * a;
        }
        std::mem::swap(&mut amps, &mut next);
    }
    Ok(StateVector {
        n: state.n,
        amplitudes: amps,
    })
}

/// Evolution through `U = V·diag(exp(-i·λ·tau))·V†`.
pub fn evolve_dense(state: &StateVector, h: &SignalHamiltonian, tau: f64) -> Result<StateVector> {
    state.check_n(h.n())?;
    let eig = h.matrix()?.symmetric_eigen();
    let v = &eig.eigenvectors;
    let psi = DVector::from_column_slice(&state.amplitudes);
    let mut coeffs = v.adjoint() * psi;
    for (c, lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * tau);
    }
    let out = v * coeffs;
    Ok(StateVector {
        n: state.n,
        amplitudes: out.iter().copied().collect(),
    })
}

/// The logical basis `(|0̄>, |1̄>)` of a code.
#[derive(Clone, Debug)]
pub struct Codespace {
    pub zero: StateVector,
    pub one: StateVector,
}

/// Builds `|0̄>` by projecting computational basis states onto the codespace
/// (first nonzero image in index order), splitting by the `Z̄` eigenvalue, and
/// setting `|1̄> = X̄|0̄>`.
pub fn codespace_basis(code: &StabilizerCode) -> Result<Codespace> {
    let n = code.n();
    check_capacity("codespace construction", STATE_LIMIT, n)?;
    let projectors: Vec<IndexPauli> = code.generators().iter().map(IndexPauli::new).collect();
    let project = |amps: Vec<Complex64>, ip: &IndexPauli, sign: f64| -> Vec<Complex64> {
        let image = ip.apply(&amps);
        amps.iter()
            .zip(&image)
            .map(|(a, pa)| (a + pa * sign) * 0.5)
            .collect()
    };
    let lz = IndexPauli::new(code.logical_z());
    let lx = IndexPauli::new(code.logical_x());
    for b in 0..1usize << n {
        let mut amps = StateVector::basis(n, b)?.amplitudes;
        for ip in &projectors {
            amps = project(amps, ip, 1.0);
        }
        let weight: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if weight < 1e-12 {
            continue;
        }
        let plus = project(amps.clone(), &lz, 1.0);
        let (zero, one) = if plus.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-12 {
            let zero = StateVector { n, amplitudes: plus }.normalized()?;
            let one = StateVector {
                n,
                amplitudes: lx.apply(&zero.amplitudes),
            };
            (zero, one)
        } else {
            let one = StateVector {
                n,
                amplitudes: project(amps, &lz, -1.0),
            }
            .normalized()?;
            let zero = StateVector {
                n,
                amplitudes: lx.apply(&one.amplitudes),
            };
            (zero, one)
        };
        return Ok(Codespace { zero, one });
    }
    Err(Error::Construction(format!(
        "stabilizer projector of code {:?} annihilates every basis state",
        code.name()
    )))
}

impl Codespace {
    /// `(|0̄> + |1̄>)/√2`, the `+1` eigenstate of `X̄`.
    pub fn plus(&self) -> StateVector {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.zero
            .superpose(h, &self.one, h)
            .expect("logical basis states are orthonormal")
    }

    /// Measures the action of `p` on the logical basis directly.
    pub fn logical_action(&self, p: &PauliOperator) -> Result<Classification> {
        if !p.is_hermitian() {
            return Err(Error::NonHermitian(p.to_string()));
        }
        let a = apply_pauli(&self.zero, p)?;
        let b = apply_pauli(&self.one, p)?;
        let m00 = self.zero.inner(&a)?;
        let m10 = self.one.inner(&a)?;
        let m01 = self.zero.inner(&b)?;
        let m11 = self.one.inner(&b)?;
        let inside = m00.norm_sqr() + m10.norm_sqr() + m01.norm_sqr() + m11.norm_sqr();
        // Each image has unit norm; anything not captured by the 2×2 block leaked out.
        if (2.0 - inside).abs() > NORM_TOLERANCE {
            return Ok(Classification::detectable());
        }
        let coefficients = [
            (Letter::I, (m00 + m11) * 0.5),
            (Letter::X, (m01 + m10) * 0.5),
            (Letter::Y, (m10 - m01) / (I * 2.0)),
            (Letter::Z, (m00 - m11) * 0.5),
        ];
        let (letter, alpha) = coefficients
            .iter()
            .copied()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("four coefficients");
        if (alpha.norm() - 1.0).abs() > NORM_TOLERANCE || alpha.im.abs() > NORM_TOLERANCE {
            return Err(Error::Construction(format!(
                "{p} does not act as a signed logical Pauli (coefficient {alpha})"
            )));
        }
        Ok(Classification::acting_as(letter, if alpha.re > 0.0 { 1 } else { -1 }))
    }
}

/// Statevector counterpart of [`StabilizerCode::classify`].
pub fn logical_action_oracle(code: &StabilizerCode, p: &PauliOperator) -> Result<Classification> {
    if p.n() != code.n() {
        return Err(Error::Dimension {
            expected: code.n(),
            found: p.n(),
        });
    }
    codespace_basis(code)?.logical_action(p)
}
