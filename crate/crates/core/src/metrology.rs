//! Protected-probe phase estimation.
//!
//! The probe is prepared in the logical eigenstate orthogonal to the signal
//! axis, evolves under the signal Hamiltonian for a time `tau`, and is read out
//! along the conjugate logical axis. For `M` signal terms that all act as the
//! same logical Pauli with action signs `s_k` and couplings `w_k·xi`, the readout
//! mean is `cos(2·M_eff·xi·tau)` with `M_eff = Σ w_k·s_k`.
//!
//! Every shot draws its randomness from `(seed, shot index)` alone, so results
//! do not depend on how shots are scheduled across threads.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::pauli::{Letter, PauliOperator};
use crate::simulator::{self, codespace_basis, Codespace, SignalHamiltonian, StateVector};
use crate::stabilizer::{CodeDefinition, Kind, LogicalAxis, StabilizerCode, SyndromeTable};

/// Default number of shot batches used for the empirical spread.
pub const DEFAULT_BATCHES: usize = 100;
/// Finite-difference step is `FD_STEP / tau`.
pub const FD_STEP: f64 = 1e-6;
const MIN_DERIVATIVE: f64 = 1e-12;

const READOUT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// How the signal Hamiltonian acts on the encoded qubit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalModel {
    /// Logical Pauli generated by the signal (`X`, `Y` or `Z`).
    pub letter: Letter,
    /// `Σ w_k·s_k` over the logical terms.
    pub effective_m: f64,
    pub logical_terms: usize,
    pub stabilizer_terms: usize,
    /// Terms that leave the codespace.
    pub non_logical_terms: Vec<PauliOperator>,
}

/// Classifies every term and checks that the logical ones share one letter.
pub fn analyze_signal(code: &StabilizerCode, h: &SignalHamiltonian) -> Result<SignalModel> {
    if h.n() != code.n() {
        return Err(Error::Dimension {
            expected: code.n(),
            found: h.n(),
        });
    }
    let mut letter = None;
    let mut effective_m = 0.0;
    let mut logical_terms = 0;
    let mut stabilizer_terms = 0;
    let mut non_logical_terms = Vec::new();
    for (w, p) in h.terms() {
        let c = code.classify(p)?;
        match c.kind {
            Kind::LogicalAction => {
                let l = c.logical_letter.expect("logical kinds carry a letter");
                match letter {
                    None => letter = Some(l),
                    Some(prev) if prev != l => {
                        return Err(Error::Contract(format!(
                            "signal mixes logical {prev} and {l} terms ({p})"
                        )))
                    }
                    _ => {}
                }
                effective_m += w * c.action_sign.expect("logical kinds carry a sign") as f64;
                logical_terms += 1;
            }
            Kind::Stabilizer => stabilizer_terms += 1,
            _ => non_logical_terms.push(*p),
        }
    }
    let letter = letter.ok_or_else(|| {
        Error::Contract("signal has no term acting as a logical rotation".into())
    })?;
    Ok(SignalModel {
        letter,
        effective_m,
        logical_terms,
        stabilizer_terms,
        non_logical_terms,
    })
}

/// Probe for a signal about `axis`: `|+X̄>` for a `Z̄` signal, `|0̄>` otherwise.
pub fn prepare_probe(code: &StabilizerCode, axis: Letter) -> Result<StateVector> {
    let cs = codespace_basis(code)?;
    probe_from(&cs, axis)
}

fn probe_from(cs: &Codespace, axis: Letter) -> Result<StateVector> {
    match axis {
        Letter::Z => Ok(cs.plus()),
        Letter::X | Letter::Y => Ok(cs.zero.clone()),
        Letter::I => Err(Error::Contract("identity is not a signal axis".into())),
    }
}

fn readout_for(code: &StabilizerCode, axis: Letter) -> PauliOperator {
    match axis {
        Letter::Z => *code.logical_x(),
        _ => *code.logical_z(),
    }
}

/// `1/(2·tau·√N)`.
pub fn sql_baseline(tau: f64, repetitions: usize) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) || repetitions == 0 {
        return Err(Error::Config(format!(
            "standard quantum limit needs tau > 0 and N >= 1 (got tau = {tau}, N = {repetitions})"
        )));
    }
    Ok(1.0 / (2.0 * tau * (repetitions as f64).sqrt()))
}

/// Coupling at which `2·|M_eff|·xi·tau = π/2`, the steepest point of the readout curve.
pub fn default_xi(effective_m: f64, tau: f64) -> f64 {
    PI / (4.0 * effective_m.abs() * tau)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// A code, a signal shape and everything precomputed to run the protocol.
#[derive(Clone, Debug)]
pub struct RamseyProtocol {
    code: StabilizerCode,
    hamiltonian: SignalHamiltonian,
    model: SignalModel,
    probe: StateVector,
    readout: PauliOperator,
}

impl RamseyProtocol {
    pub fn new(code: StabilizerCode, hamiltonian: SignalHamiltonian) -> Result<Self> {
        let model = analyze_signal(&code, &hamiltonian)?;
        let cs = codespace_basis(&code)?;
        let probe = probe_from(&cs, model.letter)?;
        let readout = readout_for(&code, model.letter);
        Ok(RamseyProtocol {
            code,
            hamiltonian,
            model,
            probe,
            readout,
        })
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn hamiltonian(&self) -> &SignalHamiltonian {
        &self.hamiltonian
    }

    pub fn model(&self) -> &SignalModel {
        &self.model
    }

    pub fn probe(&self) -> &StateVector {
        &self.probe
    }

    pub fn readout(&self) -> &PauliOperator {
        &self.readout
    }

    pub fn evolved(&self, tau: f64, xi: f64) -> Result<StateVector> {
        simulator::evolve(&self.probe, &self.hamiltonian.scaled(xi)?, tau)
    }

    /// Readout expectation after full simulation.
    pub fn signal(&self, tau: f64, xi: f64) -> Result<f64> {
        simulator::expectation(&self.evolved(tau, xi)?, &self.readout)
    }

    /// `cos(2·M_eff·xi·tau)`.
    pub fn closed_form(&self, tau: f64, xi: f64) -> f64 {
        (2.0 * self.model.effective_m * xi * tau).cos()
    }

    /// `1/(2·|M_eff|·tau)`, valid when every term is logical.
    pub fn heisenberg_uncertainty(&self, tau: f64) -> f64 {
        1.0 / (2.0 * self.model.effective_m.abs() * tau)
    }

    /// Inverts the readout mean through the signal model on `[0, π]`.
    pub fn invert(&self, mean: f64, tau: f64) -> f64 {
        mean.clamp(-1.0, 1.0).acos() / (2.0 * self.model.effective_m.abs() * tau)
    }

    /// Single-shot Cramér–Rao uncertainty `ΔR / |∂<R>/∂xi|` with `ΔR = sqrt(1 - <R>²)`
    /// and a central finite difference on the full simulation.
    pub fn cramer_rao(&self, tau: f64, xi: f64) -> Result<f64> {
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if self.model.effective_m == 0.0 {
            return Err(Error::Uninformative(
                "logical signal terms cancel (effective M = 0)".into(),
            ));
        }
        let step = FD_STEP / tau;
        let r = self.signal(tau, xi)?;
        let derivative = (self.signal(tau, xi + step)? - self.signal(tau, xi - step)?) / (2.0 * step);
        if derivative.abs() < MIN_DERIVATIVE {
            if self.model.non_logical_terms.is_empty() {
                return Ok(self.heisenberg_uncertainty(tau));
            }
            return Err(Error::Uninformative(format!(
                "readout slope {derivative:e} at xi = {xi}"
            )));
        }
        Ok((1.0 - r * r).max(0.0).sqrt() / derivative.abs())
    }
}

/// Free-function form of [`RamseyProtocol::signal`].
pub fn ramsey_signal(code: &StabilizerCode, h: &SignalHamiltonian, tau: f64, xi: f64) -> Result<f64> {
    RamseyProtocol::new(code.clone(), h.clone())?.signal(tau, xi)
}

/// Free-function form of [`RamseyProtocol::cramer_rao`].
pub fn cramer_rao_uncertainty(
    code: &StabilizerCode,
    h: &SignalHamiltonian,
    tau: f64,
    xi: f64,
) -> Result<f64> {
    RamseyProtocol::new(code.clone(), h.clone())?.cramer_rao(tau, xi)
}

/// Distinct cyclic shifts of the lowest-weight logical representative, unit couplings.
pub fn logical_orbit_signal(code: &StabilizerCode, axis: LogicalAxis) -> Result<SignalHamiltonian> {
    let rep = code.min_weight_logical(axis)?.operator.unsigned();
    let mut ops: Vec<PauliOperator> = Vec::new();
    for s in 0..code.n() {
        let shifted = rep.cyclic_shift(s as i64);
        if !ops.contains(&shifted) {
            ops.push(shifted);
        }
    }
    SignalHamiltonian::uniform(&ops)
}

/// Resolves a named signal preset (`logicalZ-all`, `logicalX-all`).
pub fn signal_preset(code: &StabilizerCode, name: &str) -> Result<SignalHamiltonian> {
    match name {
        "logicalZ-all" => logical_orbit_signal(code, LogicalAxis::Z),
        "logicalX-all" => logical_orbit_signal(code, LogicalAxis::X),
        other => Err(Error::Config(format!(
            "unknown signal preset {other:?} (known: logicalZ-all, logicalX-all)"
        ))),
    }
}

/// Parses `<coefficient> <pauli>` lines; `#` starts a comment.
pub fn parse_signal_terms(text: &str) -> Result<SignalHamiltonian> {
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            position: idx + 1,
            message: format!("line {}: {message}", idx + 1),
        };
        let (coef, word) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| bad(format!("expected `<coefficient> <pauli>`, found {line:?}")))?;
        let coef: f64 = coef
            .parse()
            .map_err(|e| bad(format!("bad coefficient {coef:?}: {e}")))?;
        let op = PauliOperator::parse(word.trim()).map_err(|e| bad(e.to_string()))?;
        terms.push((coef, op));
    }
    SignalHamiltonian::new(terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub error_ops: Vec<PauliOperator>,
    /// Independent probability of each operator per cycle.
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSchedule {
    pub cycles: usize,
}

/// Full description of a metrology run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub code: StabilizerCode,
    /// Signal shape; every coefficient is multiplied by `xi`.
    pub hamiltonian: SignalHamiltonian,
    pub xi: f64,
    pub tau: f64,
    pub shots: usize,
    pub batches: usize,
    pub noise: Option<NoiseModel>,
    pub correction: Option<CorrectionSchedule>,
    pub seed: u64,
    /// Scheduling only; never affects results.
    pub execution: Execution,
}

#[derive(Serialize)]
struct TermRecord {
    coefficient: f64,
    operator: PauliOperator,
}

#[derive(Serialize)]
struct ConfigRecord<'a> {
    code: CodeDefinition,
    terms: Vec<TermRecord>,
    xi: f64,
    tau: f64,
    shots: usize,
    batches: usize,
    noise: &'a Option<NoiseModel>,
    correction: &'a Option<CorrectionSchedule>,
    seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        code: StabilizerCode,
        hamiltonian: SignalHamiltonian,
        tau: f64,
        xi: f64,
        shots: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            code,
            hamiltonian,
            xi,
            tau,
            shots,
            batches: DEFAULT_BATCHES,
            noise: None,
            correction: None,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel, cycles: usize) -> Self {
        self.noise = Some(noise);
        self.correction = Some(CorrectionSchedule { cycles });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !self.xi.is_finite() {
            return Err(Error::Config(format!("xi must be finite, got {}", self.xi)));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.batches == 0 {
            return Err(Error::Config("batches must be at least 1".into()));
        }
        if let Some(noise) = &self.noise {
            if !(0.0..=1.0).contains(&noise.probability) {
                return Err(Error::Config(format!(
                    "noise probability must lie in [0, 1], got {}",
                    noise.probability
                )));
            }
            for op in &noise.error_ops {
                if op.n() != self.code.n() {
                    return Err(Error::Dimension {
                        expected: self.code.n(),
                        found: op.n(),
                    });
                }
                if !op.is_hermitian() {
                    return Err(Error::NonHermitian(op.to_string()));
                }
            }
        }
        if let Some(c) = &self.correction {
            if c.cycles == 0 {
                return Err(Error::Config("correction cycles must be at least 1".into()));
            }
        }
        Ok(())
    }

    fn record(&self) -> ConfigRecord<'_> {
        ConfigRecord {
            code: self.code.definition(),
            terms: self
                .hamiltonian
                .terms()
                .iter()
                .map(|(c, p)| TermRecord {
                    coefficient: *c,
                    operator: *p,
                })
                .collect(),
            xi: self.xi,
            tau: self.tau,
            shots: self.shots,
            batches: self.batches,
            noise: &self.noise,
            correction: &self.correction,
            seed: self.seed,
        }
    }

    /// SHA-256 of the canonical JSON form (execution mode excluded).
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(&self.record()).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn serialize_outcomes<S: Serializer>(outcomes: &[i8], s: S) -> std::result::Result<S::Ok, S::Error> {
    let text: String = outcomes.iter().map(|&o| if o > 0 { '+' } else { '-' }).collect();
    s.serialize_str(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalSummary {
    pub letter: Letter,
    pub effective_m: f64,
    pub terms: Vec<String>,
    pub non_logical_terms: Vec<PauliOperator>,
    pub readout: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSummary {
    pub error_ops: Vec<PauliOperator>,
    pub probability: f64,
    pub cycles: usize,
    pub corrected: bool,
    /// Noise operators the code cannot detect; they mimic or corrupt the signal.
    pub undetectable_ops: Vec<PauliOperator>,
    pub trajectories_with_errors: usize,
    /// Inversion of the trajectory-averaged exact readout mean.
    pub expected_estimate: f64,
    pub expected_bias: f64,
    /// Mean of `1 - |<ideal|final>|²` over trajectories.
    pub infidelity: f64,
    /// Fraction of trajectories whose net error-times-correction is not a stabilizer.
    pub logical_fault_rate: f64,
    pub decoding_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config_digest: String,
    pub code: String,
    pub n: usize,
    pub seed: u64,
    pub xi_true: f64,
    pub tau: f64,
    pub shots: usize,
    pub batches: usize,
    pub signal: SignalSummary,
    /// Exact readout mean at the true coupling, without noise.
    pub ideal_readout: f64,
    /// Sample mean of the ±1 outcomes.
    pub mean_readout: f64,
    pub xi_hat: f64,
    pub bias: f64,
    /// Spread of the all-shot estimate: batch standard deviation over `√batches`.
    pub empirical_std: f64,
    pub batch_std: f64,
    /// Single-shot Cramér–Rao uncertainty.
    pub cr_bound: Option<f64>,
    /// `cr_bound / √shots`.
    pub cr_bound_total: Option<f64>,
    pub sql_baseline: f64,
    pub batch_estimates: Vec<f64>,
    #[serde(serialize_with = "serialize_outcomes")]
    pub outcomes: Vec<i8>,
    pub warnings: Vec<String>,
    pub noise: Option<NoiseSummary>,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

fn shot_rng(seed: u64, shot: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot as u64 * 2 + stream);
    rng
}

fn draw_outcome(seed: u64, shot: usize, readout: f64) -> i8 {
    let u: f64 = shot_rng(seed, shot, READOUT_STREAM).random();
    if u < (1.0 + readout) / 2.0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug)]
struct ShotRecord {
    outcome: i8,
    readout: f64,
    infidelity: f64,
    fault: bool,
    had_errors: bool,
    decoding_failure: bool,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let k = xs.len() as f64;
    xs.sum::<f64>() / k
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

struct Prepared {
    protocol: RamseyProtocol,
    ideal_state: StateVector,
    ideal_readout: f64,
    cr_bound: Option<f64>,
    warnings: Vec<String>,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let protocol = RamseyProtocol::new(config.code.clone(), config.hamiltonian.clone())?;
    if protocol.model().effective_m == 0.0 {
        return Err(Error::Uninformative(
            "logical signal terms cancel (effective M = 0)".into(),
        ));
    }
    let ideal_state = protocol.evolved(config.tau, config.xi)?;
    let ideal_readout = simulator::expectation(&ideal_state, protocol.readout())?;
    let mut warnings = Vec::new();
    if !protocol.model().non_logical_terms.is_empty() {
        let terms: Vec<String> = protocol
            .model()
            .non_logical_terms
            .iter()
            .map(|p| p.to_string())
            .collect();
        warnings.push(format!("signal includes non-logical terms: {}", terms.join(", ")));
    }
    let angle = 2.0 * protocol.model().effective_m.abs() * config.xi * config.tau;
    if !(0.0..=PI).contains(&angle) {
        warnings.push(format!(
            "operating point 2|M|xi*tau = {angle:.6} lies outside the principal branch [0, pi]; \
             the estimate is folded back onto it"
        ));
    }
    let cr_bound = match protocol.cramer_rao(config.tau, config.xi) {
        Ok(v) => Some(v),
        Err(Error::Uninformative(msg)) => {
            warnings.push(format!("no Cramér–Rao bound: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(Prepared {
        protocol,
        ideal_state,
        ideal_readout,
        cr_bound,
        warnings,
    })
}

fn summarize(
    config: &ExperimentConfig,
    prepared: Prepared,
    records: &[ShotRecord],
    noise: Option<NoiseSummary>,
) -> Result<ExperimentResult> {
    let protocol = &prepared.protocol;
    let shots = records.len();
    let batches = config.batches.min(shots);
    let outcomes: Vec<i8> = records.iter().map(|r| r.outcome).collect();
    let batch_estimates: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk = &outcomes[b * shots / batches..(b + 1) * shots / batches];
            protocol.invert(mean(chunk.iter().map(|&o| o as f64)), config.tau)
        })
        .collect();
    let mean_readout = mean(outcomes.iter().map(|&o| o as f64));
    let xi_hat = protocol.invert(mean_readout, config.tau);
    let batch_std = sample_std(&batch_estimates);
    let model = protocol.model();
    Ok(ExperimentResult {
        config_digest: config.digest(),
        code: config.code.name().to_string(),
        n: config.code.n(),
        seed: config.seed,
        xi_true: config.xi,
        tau: config.tau,
        shots,
        batches,
        signal: SignalSummary {
            letter: model.letter,
            effective_m: model.effective_m,
            terms: config
                .hamiltonian
                .terms()
                .iter()
                .map(|(c, p)| format!("{c}*{p}"))
                .collect(),
            non_logical_terms: model.non_logical_terms.clone(),
            readout: *protocol.readout(),
        },
        ideal_readout: prepared.ideal_readout,
        mean_readout,
        xi_hat,
        bias: xi_hat - config.xi,
        empirical_std: batch_std / (batches as f64).sqrt(),
        batch_std,
        cr_bound: prepared.cr_bound,
        cr_bound_total: prepared.cr_bound.map(|b| b / (shots as f64).sqrt()),
        sql_baseline: sql_baseline(config.tau, shots)?,
        batch_estimates,
        outcomes,
        warnings: prepared.warnings,
        noise,
    })
}

/// Noiseless shot-noise-limited estimation.
pub fn monte_carlo_estimate(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.noise.is_some() {
        return Err(Error::Config(
            "noise configured; use noisy_run for noisy experiments".into(),
        ));
    }
    let prepared = prepare(config)?;
    let r = prepared.ideal_readout;
    let seed = config.seed;
    let records = parallel::map_indices(config.execution, config.shots, |shot| ShotRecord {
        outcome: draw_outcome(seed, shot, r),
        readout: r,
        infidelity: 0.0,
        fault: false,
        had_errors: false,
        decoding_failure: false,
    });
    summarize(config, prepared, &records, None)
}

struct Trajectories<'a> {
    code: &'a StabilizerCode,
    probe: &'a StateVector,
    readout: &'a PauliOperator,
    ideal_state: &'a StateVector,
    ideal_readout: f64,
    segment: SignalHamiltonian,
    segment_tau: f64,
    ops: &'a [PauliOperator],
    probability: f64,
    cycles: usize,
    table: Option<SyndromeTable>,
    seed: u64,
}

impl Trajectories<'_> {
    fn run(&self, shot: usize) -> Result<ShotRecord> {
        let mut rng = shot_rng(self.seed, shot, NOISE_STREAM);
        let events: Vec<bool> = (0..self.cycles * self.ops.len())
            .map(|_| rng.random::<f64>() < self.probability)
            .collect();
        if !events.contains(&true) {
            // Syndrome extraction on an undisturbed codespace state is the identity.
            return Ok(ShotRecord {
                outcome: draw_outcome(self.seed, shot, self.ideal_readout),
                readout: self.ideal_readout,
                infidelity: 0.0,
                fault: false,
                had_errors: false,
                decoding_failure: false,
            });
        }
        let n = self.code.n();
        let mut state = self.probe.clone();
        let mut frame = PauliOperator::identity(n);
        let mut decoding_failure = false;
        for cycle in 0..self.cycles {
            state = simulator::evolve(&state, &self.segment, self.segment_tau)?;
            for (j, op) in self.ops.iter().enumerate() {
                if events[cycle * self.ops.len() + j] {
                    state = simulator::apply_pauli(&state, op)?;
                    frame = frame.multiply(op)?;
                }
            }
            let Some(table) = &self.table else { continue };
            let mut syndrome = 0u64;
            for (i, g) in self.code.generators().iter().enumerate() {
                let p_plus = (1.0 + simulator::expectation(&state, g)?) / 2.0;
                let u: f64 = rng.random();
                let outcome = if p_plus > 1.0 - 1e-12 {
                    1
                } else if p_plus < 1e-12 {
                    -1
                } else if u < p_plus {
                    1
                } else {
                    -1
                };
                if outcome < 0 {
                    syndrome |= 1 << i;
                }
                state = state.project(g, outcome)?.1;
            }
            match table.correction(syndrome) {
                Some(c) => {
                    state = simulator::apply_pauli(&state, c)?;
                    frame = frame.multiply(c)?;
                }
                None => decoding_failure = true,
            }
        }
        let readout = simulator::expectation(&state, self.readout)?;
        Ok(ShotRecord {
            outcome: draw_outcome(self.seed, shot, readout),
            readout,
            infidelity: (1.0 - self.ideal_state.fidelity(&state)?).max(0.0),
            fault: self.code.classify_word(&frame).0 != Kind::Stabilizer,
            had_errors: true,
            decoding_failure,
        })
    }
}

/// Stochastic pure-state trajectories with Pauli noise and syndrome correction.
///
/// The run is split into `cycles` equal segments. Each segment evolves under the
/// signal, applies every noise operator independently with the configured
/// probability, then (with a correction schedule) measures all generators and
/// applies the minimum-weight correction for the observed syndrome. Without a
/// correction schedule the errors are applied once, after a single segment.
pub fn noisy_run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let noise = config
        .noise
        .as_ref()
        .ok_or_else(|| Error::Config("noisy_run needs a noise model".into()))?;
    let mut prepared = prepare(config)?;
    let code = &config.code;
    let mut undetectable_ops = Vec::new();
    for op in &noise.error_ops {
        let c = code.classify(op)?;
        if c.kind != Kind::Detectable {
            prepared.warnings.push(format!(
                "noise operator {op} is not detectable ({c}); it cannot be told apart from signal evolution"
            ));
            undetectable_ops.push(*op);
        }
    }
    let (cycles, table) = match config.correction {
        Some(c) => (c.cycles, Some(SyndromeTable::build(code)?)),
        None => (1, None),
    };
    let trajectories = Trajectories {
        code,
        probe: prepared.protocol.probe(),
        readout: prepared.protocol.readout(),
        ideal_state: &prepared.ideal_state,
        ideal_readout: prepared.ideal_readout,
        segment: config.hamiltonian.scaled(config.xi)?,
        segment_tau: config.tau / cycles as f64,
        ops: &noise.error_ops,
        probability: noise.probability,
        cycles,
        table,
        seed: config.seed,
    };
    let records = parallel::map_indices(config.execution, config.shots, |shot| trajectories.run(shot))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let expected_readout = mean(records.iter().map(|r| r.readout));
    let expected_estimate = prepared.protocol.invert(expected_readout, config.tau);
    let summary = NoiseSummary {
        error_ops: noise.error_ops.clone(),
        probability: noise.probability,
        cycles,
        corrected: config.correction.is_some(),
        undetectable_ops,
        trajectories_with_errors: records.iter().filter(|r| r.had_errors).count(),
        expected_estimate,
        expected_bias: expected_estimate - config.xi,
        infidelity: mean(records.iter().map(|r| r.infidelity)),
        logical_fault_rate: records.iter().filter(|r| r.fault).count() as f64 / records.len() as f64,
        decoding_failures: records.iter().filter(|r| r.decoding_failure).count(),
    };
    summarize(config, prepared, &records, Some(summary))
}

/// Dispatches to [`monte_carlo_estimate`] or [`noisy_run`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.noise.is_some() {
        noisy_run(config)
    } else {
        monte_carlo_estimate(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanMRow {
    pub label: String,
    pub n: usize,
    pub terms: usize,
    pub effective_m: f64,
    pub tau: f64,
    pub xi: f64,
    pub cr_bound: f64,
    pub cr_bound_times_tau: f64,
    pub heisenberg_prediction: f64,
    pub xi_hat: f64,
    pub empirical_std: f64,
    pub cr_bound_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPRow {
    pub p: f64,
    pub xi: f64,
    pub xi_hat: f64,
    pub bias: f64,
    pub expected_bias: f64,
    pub infidelity: f64,
    pub logical_fault_rate: f64,
    pub trajectories_with_errors: usize,
    pub empirical_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanNRow {
    pub shots: usize,
    pub xi: f64,
    pub xi_hat: f64,
    pub empirical_std: f64,
    pub cr_bound_total: f64,
    pub sql_baseline: f64,
}

/// One Monte Carlo run per labelled configuration.
pub fn scan_m(configs: &[(String, ExperimentConfig)]) -> Result<Vec<ScanMRow>> {
    configs
        .iter()
        .map(|(label, config)| {
            let result = run_experiment(config)?;
            let cr = result.cr_bound.ok_or_else(|| {
                Error::Uninformative(format!("no Cramér–Rao bound for {label}"))
            })?;
            Ok(ScanMRow {
                label: label.clone(),
                n: result.n,
                terms: config.hamiltonian.terms().len(),
                effective_m: result.signal.effective_m,
                tau: config.tau,
                xi: config.xi,
                cr_bound: cr,
                cr_bound_times_tau: cr * config.tau,
                heisenberg_prediction: 1.0 / (2.0 * result.signal.effective_m.abs() * config.tau),
                xi_hat: result.xi_hat,
                empirical_std: result.empirical_std,
                cr_bound_total: result.cr_bound_total.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

/// Noisy runs of `base` at each noise probability.
pub fn scan_p(base: &ExperimentConfig, probabilities: &[f64]) -> Result<Vec<ScanPRow>> {
    let noise = base
        .noise
        .clone()
        .ok_or_else(|| Error::Config("a p-scan needs noise operators".into()))?;
    probabilities
        .iter()
        .map(|&p| {
            let mut config = base.clone();
            config.noise = Some(NoiseModel {
                probability: p,
                ..noise.clone()
            });
            let result = noisy_run(&config)?;
            let summary = result.noise.as_ref().expect("noisy runs carry a summary");
            Ok(ScanPRow {
                p,
                xi: config.xi,
                xi_hat: result.xi_hat,
                bias: result.bias,
                expected_bias: summary.expected_bias,
                infidelity: summary.infidelity,
                logical_fault_rate: summary.logical_fault_rate,
                trajectories_with_errors: summary.trajectories_with_errors,
                empirical_std: result.empirical_std,
            })
        })
        .collect()
}

/// Runs of `base` at each shot count.
pub fn scan_n(base: &ExperimentConfig, shot_counts: &[usize]) -> Result<Vec<ScanNRow>> {
    shot_counts
        .iter()
        .map(|&shots| {
            let mut config = base.clone();
            config.shots = shots;
            let result = run_experiment(&config)?;
            Ok(ScanNRow {
                shots,
                xi: config.xi,
                xi_hat: result.xi_hat,
                empirical_std: result.empirical_std,
                cr_bound_total: result.cr_bound_total.unwrap_or(f64::NAN),
                sql_baseline: result.sql_baseline,
            })
        })
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

impl fmt::Display for SignalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "logical {} signal, {} logical term(s), effective M = {}",
            self.letter, self.logical_terms, self.effective_m
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::pauli;
    use crate::stabilizer::builtin;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rep3_signal() -> SignalHamiltonian {
        SignalHamiltonian::uniform(&[pauli("ZII"), pauli("IZI"), pauli("IIZ")]).unwrap()
    }

    fn five_signal() -> SignalHamiltonian {
        let ops: Vec<_> = (0..5).map(|s| pauli("YZYII").cyclic_shift(s)).collect();
        SignalHamiltonian::uniform(&ops).unwrap()
    }

    #[test]
    fn probes() {
        let rep = builtin("repetition3").unwrap();
        let probe = prepare_probe(&rep, Letter::Z).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(probe.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(probe.amplitudes()[7].re, h, epsilon = 1e-15);
        let trivial = prepare_probe(&builtin("trivial").unwrap(), Letter::X).unwrap();
        assert_eq!(trivial, StateVector::basis(1, 0).unwrap());
        let five = builtin("fivequbit").unwrap();
        let probe = prepare_probe(&five, Letter::Z).unwrap();
        assert_abs_diff_eq!(probe.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(simulator::expectation(&probe, five.logical_x()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn signal_model_signs() {
        let five = builtin("fivequbit").unwrap();
        let model = analyze_signal(&five, &five_signal()).unwrap();
        assert_eq!(model.letter, Letter::Z);
        assert_eq!(model.logical_terms, 5);
        assert_abs_diff_eq!(model.effective_m.abs(), 5.0);

        let rep = builtin("repetition3").unwrap();
        let mixed = SignalHamiltonian::uniform(&[pauli("ZII"), pauli("XXX")]).unwrap();
        assert!(matches!(analyze_signal(&rep, &mixed), Err(Error::Contract(_))));
        let leaky = SignalHamiltonian::uniform(&[pauli("ZII"), pauli("XII"), pauli("ZZI")]).unwrap();
        let model = analyze_signal(&rep, &leaky).unwrap();
        assert_eq!(model.non_logical_terms, vec![pauli("XII")]);
        assert_eq!(model.stabilizer_terms, 1);
    }

    #[test]
    fn ramsey_signal_examples() {
        let trivial = builtin("trivial").unwrap();
        let single = SignalHamiltonian::uniform(&[pauli("X")]).unwrap();
        let tau = 1.7;
        assert_abs_diff_eq!(
            ramsey_signal(&trivial, &single, tau, PI / 4.0 / tau).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(ramsey_signal(&trivial, &single, tau, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let rep = builtin("repetition3").unwrap();
        assert_abs_diff_eq!(
            ramsey_signal(&rep, &rep3_signal(), 1.0, PI / 12.0).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let protocol = RamseyProtocol::new(rep, rep3_signal()).unwrap();
        for xi in [0.05, 0.2, 0.41, 1.3] {
            assert_abs_diff_eq!(
                protocol.signal(0.8, xi).unwrap(),
                protocol.closed_form(0.8, xi),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn cramer_rao_examples() {
        let tau = 2.5;
        let trivial = builtin("trivial").unwrap();
        let single = SignalHamiltonian::uniform(&[pauli("X")]).unwrap();
        let v = cramer_rao_uncertainty(&trivial, &single, tau, 0.123).unwrap();
        assert_relative_eq!(v * tau, 0.5, max_relative = 1e-6);
        let rep = builtin("repetition3").unwrap();
        let v = cramer_rao_uncertainty(&rep, &rep3_signal(), tau, 0.05).unwrap();
        assert_relative_eq!(v * tau, 1.0 / 6.0, max_relative = 1e-6);
        let five = builtin("fivequbit").unwrap();
        let v = cramer_rao_uncertainty(&five, &five_signal(), tau, 0.02).unwrap();
        assert_relative_eq!(v * tau, 0.1, max_relative = 1e-6);
    }

    #[test]
    fn cramer_rao_is_flat_in_xi() {
        let rep = builtin("repetition3").unwrap();
        let protocol = RamseyProtocol::new(rep, rep3_signal()).unwrap();
        let tau = 1.0;
        let reference = protocol.heisenberg_uncertainty(tau);
        for k in 1..20 {
            // 2Mξτ sweeps (0, π) away from the edges.
            let angle = 0.1 + (PI - 0.2) * k as f64 / 20.0;
            let xi = angle / (6.0 * tau);
            assert_relative_eq!(protocol.cramer_rao(tau, xi).unwrap(), reference, max_relative = 1e-6);
        }
    }

    #[test]
    fn uninformative_points() {
        let rep = builtin("repetition3").unwrap();
        let protocol = RamseyProtocol::new(rep.clone(), rep3_signal()).unwrap();
        assert_relative_eq!(protocol.cramer_rao(1.0, 0.0).unwrap(), 1.0 / 6.0, max_relative = 1e-12);
        let cancel = SignalHamiltonian::new(vec![(1.0, pauli("ZII")), (-1.0, pauli("IZI"))]).unwrap();
        assert!(matches!(
            cramer_rao_uncertainty(&rep, &cancel, 1.0, 0.3),
            Err(Error::Uninformative(_))
        ));
    }

    #[test]
    fn sql_examples() {
        let tau = 3.0;
        assert_relative_eq!(sql_baseline(tau, 1).unwrap(), 1.0 / (2.0 * tau));
        assert_relative_eq!(sql_baseline(tau, 4).unwrap(), 1.0 / (4.0 * tau));
        assert_relative_eq!(sql_baseline(tau, 100).unwrap(), 1.0 / (20.0 * tau));
        assert!(sql_baseline(0.0, 1).is_err());
        assert!(sql_baseline(1.0, 0).is_err());
    }

    #[test]
    fn loglog_slope_recovers_power_law() {
        let xs = [1.0, 2.0, 5.0, 10.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys), -0.5, max_relative = 1e-12);
    }

    #[test]
    fn zero_signal_estimates_zero() {
        let rep = builtin("repetition3").unwrap();
        let config = ExperimentConfig::new(rep, rep3_signal(), 1.0, 0.0, 500, 3);
        let result = monte_carlo_estimate(&config).unwrap();
        assert_eq!(result.xi_hat, 0.0);
        assert!(result.outcomes.iter().all(|&o| o == 1));
        assert!(result.warnings.is_empty(), "{:?}", result.warnings);
    }

    #[test]
    fn execution_mode_does_not_change_results() {
        let rep = builtin("repetition3").unwrap();
        let mut config = ExperimentConfig::new(rep, rep3_signal(), 1.0, PI / 12.0, 2000, 11);
        config.execution = Execution::Sequential;
        let seq = monte_carlo_estimate(&config).unwrap();
        config.execution = Execution::Parallel;
        let par = monte_carlo_estimate(&config).unwrap();
        assert_eq!(seq.to_json(), par.to_json());

        let noisy = config.clone().with_noise(
            NoiseModel {
                error_ops: vec![pauli("XII"), pauli("IXI"), pauli("IIX")],
                probability: 0.1,
            },
            4,
        );
        let mut a = noisy.clone();
        a.execution = Execution::Sequential;
        assert_eq!(noisy_run(&a).unwrap().to_json(), noisy_run(&noisy).unwrap().to_json());
    }

    #[test]
    fn zero_noise_matches_noiseless() {
        let rep = builtin("repetition3").unwrap();
        let base = ExperimentConfig::new(rep, rep3_signal(), 1.0, PI / 12.0, 3000, 5);
        let clean = monte_carlo_estimate(&base).unwrap();
        let noisy = noisy_run(&base.clone().with_noise(
            NoiseModel {
                error_ops: vec![pauli("XII"), pauli("IXI"), pauli("IIX")],
                probability: 0.0,
            },
            10,
        ))
        .unwrap();
        assert_eq!(clean.outcomes, noisy.outcomes);
        assert_eq!(clean.batch_estimates, noisy.batch_estimates);
        assert_eq!(clean.xi_hat.to_bits(), noisy.xi_hat.to_bits());
        assert_eq!(clean.empirical_std.to_bits(), noisy.empirical_std.to_bits());
        let summary = noisy.noise.unwrap();
        assert_eq!(summary.trajectories_with_errors, 0);
        assert_eq!(summary.infidelity, 0.0);
    }

    #[test]
    fn single_flips_are_corrected() {
        // With p = 1 on a single operator every cycle sees exactly one flip,
        // which the lookup table undoes.
        let rep = builtin("repetition3").unwrap();
        let config = ExperimentConfig::new(rep, rep3_signal(), 1.0, PI / 12.0, 200, 9).with_noise(
            NoiseModel {
                error_ops: vec![pauli("IXI")],
                probability: 1.0,
            },
            5,
        );
        let result = noisy_run(&config).unwrap();
        let summary = result.noise.unwrap();
        assert_eq!(summary.trajectories_with_errors, 200);
        assert_eq!(summary.logical_fault_rate, 0.0);
        assert_eq!(summary.decoding_failures, 0);
        assert!(summary.infidelity < 1e-12);
        assert_abs_diff_eq!(summary.expected_bias, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn undetectable_noise_is_flagged() {
        let rep = builtin("repetition3").unwrap();
        let config = ExperimentConfig::new(rep, rep3_signal(), 1.0, PI / 12.0, 500, 9).with_noise(
            NoiseModel {
                error_ops: vec![pauli("ZII")],
                probability: 0.2,
            },
            5,
        );
        let result = noisy_run(&config).unwrap();
        let summary = result.noise.as_ref().unwrap();
        assert_eq!(summary.undetectable_ops, vec![pauli("ZII")]);
        assert!(summary.logical_fault_rate > 0.2);
        assert!(result.warnings.iter().any(|w| w.contains("not detectable")));
    }

    #[test]
    fn config_validation() {
        let rep = builtin("repetition3").unwrap();
        let base = ExperimentConfig::new(rep, rep3_signal(), 1.0, 0.1, 10, 0);
        let mut c = base.clone();
        c.tau = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.shots = 0;
        assert!(c.validate().is_err());
        let c = base.clone().with_noise(
            NoiseModel {
                error_ops: vec![pauli("XII")],
                probability: 1.5,
            },
            1,
        );
        assert!(c.validate().is_err());
        let c = base.clone().with_noise(
            NoiseModel {
                error_ops: vec![pauli("XII")],
                probability: 0.1,
            },
            0,
        );
        assert!(c.validate().is_err());
        assert!(monte_carlo_estimate(&base.clone().with_noise(
            NoiseModel {
                error_ops: vec![],
                probability: 0.0
            },
            1
        ))
        .is_err());
        assert!(noisy_run(&base).is_err());
    }

    #[test]
    fn signal_presets_and_files() {
        let rep = builtin("repetition3").unwrap();
        let h = signal_preset(&rep, "logicalZ-all").unwrap();
        let ops: Vec<_> = h.terms().iter().map(|(_, p)| p.to_string()).collect();
        assert_eq!(ops, vec!["IIZ", "ZII", "IZI"]);
        let five = builtin("fivequbit").unwrap();
        let h = signal_preset(&five, "logicalZ-all").unwrap();
        assert_eq!(h.terms().len(), 5);
        for (_, p) in h.terms() {
            assert!((0..5).any(|s| pauli("YZYII").cyclic_shift(s) == *p));
        }
        assert_eq!(signal_preset(&builtin("trivial").unwrap(), "logicalZ-all").unwrap().terms().len(), 1);
        assert!(signal_preset(&rep, "logicalW").is_err());

        let h = parse_signal_terms("# two terms\n1.0 ZII\n0.5 IZI # half\n").unwrap();
        assert_eq!(h.terms(), &[(1.0, pauli("ZII")), (0.5, pauli("IZI"))]);
        assert!(matches!(parse_signal_terms("1.0 ZII\nabc IZI\n"), Err(Error::Parse { position: 2, .. })));
        assert!(parse_signal_terms("ZII\n").is_err());
    }

    #[test]
    fn inhomogeneous_couplings_shift_effective_m() {
        let rep = builtin("repetition3").unwrap();
        let h = SignalHamiltonian::new(vec![(1.0, pauli("ZII")), (0.9, pauli("IZI")), (1.1, pauli("IIZ"))]).unwrap();
        let protocol = RamseyProtocol::new(rep, h).unwrap();
        assert_relative_eq!(protocol.model().effective_m, 3.0, max_relative = 1e-12);
        let h = SignalHamiltonian::new(vec![(1.0, pauli("ZII")), (0.5, pauli("IZI"))]).unwrap();
        let protocol = RamseyProtocol::new(builtin("repetition3").unwrap(), h).unwrap();
        assert_relative_eq!(protocol.cramer_rao(1.0, 0.3).unwrap(), 1.0 / 3.0, max_relative = 1e-6);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn simulated_readout_matches_closed_form(
            xi in -2.0f64..2.0,
            tau in 0.1f64..3.0,
            w in proptest::collection::vec(0.2f64..1.5, 5),
        ) {
            let five = builtin("fivequbit").unwrap();
            let terms = (0..5).map(|s| (w[s], pauli("YZYII").cyclic_shift(s as i64))).collect();
            let protocol = RamseyProtocol::new(five, SignalHamiltonian::new(terms).unwrap()).unwrap();
            let sim = protocol.signal(tau, xi).unwrap();
            proptest::prop_assert!((sim - protocol.closed_form(tau, xi)).abs() < 1e-9);
        }

        #[test]
        fn estimator_inverts_readout(angle in 0.01f64..3.13, tau in 0.1f64..3.0) {
            let rep = builtin("repetition3").unwrap();
            let protocol = RamseyProtocol::new(rep, rep3_signal()).unwrap();
            let xi = angle / (6.0 * tau);
            let back = protocol.invert(protocol.closed_form(tau, xi), tau);
            proptest::prop_assert!((back - xi).abs() < 1e-9);
        }

        #[test]
        fn seeded_runs_repeat(seed in 0u64..1_000, shots in 1usize..400) {
            let rep = builtin("repetition3").unwrap();
            let config = ExperimentConfig::new(rep, rep3_signal(), 1.0, PI / 12.0, shots, seed);
            let a = monte_carlo_estimate(&config).unwrap();
            let b = monte_carlo_estimate(&config).unwrap();
            proptest::prop_assert_eq!(a.to_json(), b.to_json());
            proptest::prop_assert!(a.batches <= shots);
        }
    }

    #[test]
    fn csv_has_header() {
        let rows = vec![ScanNRow {
            shots: 10,
            xi: 0.1,
            xi_hat: 0.2,
            empirical_std: 0.3,
            cr_bound_total: 0.4,
            sql_baseline: 0.5,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "shots,xi,xi_hat,empirical_std,cr_bound_total,sql_baseline\n10,0.1,0.2,0.3,0.4,0.5\n"
        );
    }
}
