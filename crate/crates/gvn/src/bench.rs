//! Benchmark harness comparing the three decimal-adder builds.
//!
//! The harness answers three questions about each build — does it add
//! correctly, how slow is its worst input, and what does a realistic
//! workload cost — and renders the answers side by side:
//!
//! * [`verify_variant`] drives every legal input triple (two decimal digits
//!   and a carry-in: 10 x 10 x 2 = 200 vectors) and compares the settled
//!   outputs against [`bcd_add_oracle`]. Clocked builds are exercised
//!   through a derived two-phase schedule and sampled at the instant the
//!   schedule promises valid outputs; a frequency the schedule cannot meet
//!   is reported as infeasible rather than as a functional failure.
//! * [`measure_delays`] walks the same 200 vectors with any clocks held
//!   high and records, per vector, when the binary stage and the final
//!   outputs stop moving. The worst cases size the clock schedule and the
//!   reported critical delay.
//! * [`sweep`] prices a seeded pseudo-random workload (uniform digit pairs
//!   plus a fair carry bit, 1000 cycles by default) at each requested clock
//!   frequency: switching energy comes from the simulator's per-transition
//!   log, and leakage is integrated piecewise between phase boundaries,
//!   each span priced at the logic state it settles into. The same seed and
//!   parameter file always reproduce the same report, byte for byte.
//!
//! Reports carry a SHA-256 digest of the parameter-file text they were run
//! with, and [`emit`] renders them as an aligned table, a CSV with
//! six-significant-digit scientific notation, or a grouped-bar SVG chart.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::format::format_sci6;
use crate::gating::{self, ClockConfig, GatingError};
use crate::generators::{
    bcd_conventional, bcd_dvt, bcd_gated, BcdNets, SizingPolicy, VthAssignment,
};
use crate::netlist::{NetId, Netlist};
use crate::power::{
    average_power, pdp, LeakageModel, ModelError, ParamError, PowerTrace, ProcessParams,
};
use crate::sim::{measure_delay, LogicLevel, SimError, SimState};

/// Parameter file shipped with the crate; used when the caller supplies none.
pub const DEFAULT_PARAMS_TEXT: &str = include_str!("../params/default.params");

/// Default workload length of a sweep, in clock cycles per measured cell.
pub const DEFAULT_CYCLES: u32 = 1000;

/// Default seed of the pseudo-random workload generator.
pub const DEFAULT_SEED: u64 = 7;

/// Quiet gap inserted between vectors when clocks are held static for
/// functional checks and delay characterization.
const VECTOR_GAP_S: f64 = 1.0e-9;

/// The three adder builds the harness compares.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Variant {
    /// Uniform low-threshold devices, no gating.
    Conventional,
    /// Dual threshold: low-threshold devices only on the carry-critical path.
    Dvt,
    /// Dual threshold plus clocked sleep footers under the off-path clusters.
    Gated,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Conventional, Variant::Dvt, Variant::Gated];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Conventional => "conventional",
            Variant::Dvt => "dvt",
            Variant::Gated => "gated",
        }
    }

    pub fn from_name(name: &str) -> Option<Variant> {
        Variant::ALL.iter().copied().find(|v| v.name() == name)
    }

    /// Builds the variant's netlist with the standard threshold assignment
    /// and channel sizing.
    pub fn build(self) -> Netlist {
        let vth = VthAssignment::critical_path_low();
        match self {
            Variant::Conventional => bcd_conventional(),
            Variant::Dvt => bcd_dvt(&vth),
            Variant::Gated => bcd_gated(&vth, &SizingPolicy::default()),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(thiserror::Error, Debug)]
pub enum BenchError {
    #[error("digit operand {0} is outside the decimal range 0-9")]
    DigitRange(u32),
    #[error("carry-in {0} must be 0 or 1")]
    CarryRange(u32),
    #[error("frequency {0} Hz is not positive and finite")]
    BadFrequency(f64),
    #[error("netlist is missing an expected net: {0}")]
    MissingNets(String),
    #[error(transparent)]
    Gating(#[from] GatingError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

impl BenchError {
    /// True when the error means a clock schedule cannot fit the period,
    /// as opposed to a wrong answer or a broken input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, BenchError::Gating(GatingError::Infeasible { .. }))
    }
}

/// Decimal single-digit addition reference: returns `(carry, digit)`.
pub fn bcd_add_oracle(a: u32, b: u32, cin: u32) -> Result<(u32, u32), BenchError> {
    if a > 9 {
        return Err(BenchError::DigitRange(a));
    }
    if b > 9 {
        return Err(BenchError::DigitRange(b));
    }
    if cin > 1 {
        return Err(BenchError::CarryRange(cin));
    }
    let sum = a + b + cin;
    Ok((sum / 10, sum % 10))
}

/// Every legal input triple `(a, b, cin)` in lexicographic order; 200 total.
pub fn all_vectors() -> impl Iterator<Item = (u32, u32, u32)> {
    (0..10).flat_map(|a| (0..10).flat_map(move |b| (0..2).map(move |cin| (a, b, cin))))
}

fn bit(v: u32, k: u32) -> LogicLevel {
    if v >> k & 1 == 1 {
        LogicLevel::L1
    } else {
        LogicLevel::L0
    }
}

/// Stimuli that place one input triple on the operand ports at time `t_s`.
fn vector_stimuli(
    nets: &BcdNets,
    a: u32,
    b: u32,
    cin: u32,
    t_s: f64,
) -> Vec<(NetId, LogicLevel, f64)> {
    let mut stim = Vec::with_capacity(9);
    for k in 0..4 {
        stim.push((nets.a[k as usize], bit(a, k), t_s));
        stim.push((nets.b[k as usize], bit(b, k), t_s));
    }
    stim.push((nets.cin, bit(cin, 0), t_s));
    stim
}

/// Reads the settled `(carry, digit)` pair; `None` if any output is not a
/// definite level.
fn read_result(sim: &SimState, nets: &BcdNets) -> Option<(u32, u32)> {
    let mut digit = 0;
    for k in 0..4 {
        match sim.value(nets.digit[k]) {
            LogicLevel::L1 => digit |= 1 << k,
            LogicLevel::L0 => {}
            _ => return None,
        }
    }
    match sim.value(nets.carry) {
        LogicLevel::L1 => Some((1, digit)),
        LogicLevel::L0 => Some((0, digit)),
        _ => None,
    }
}

/// One failing vector from a verification run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Counterexample {
    pub a: u32,
    pub b: u32,
    pub cin: u32,
    pub expect_carry: u32,
    pub expect_digit: u32,
    /// Observed `(carry, digit)`; `None` when an output never resolved.
    pub got: Option<(u32, u32)>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{}+{}: expected carry {} digit {}, got ",
            self.a, self.b, self.cin, self.expect_carry, self.expect_digit
        )?;
        match self.got {
            Some((c, d)) => write!(f, "carry {c} digit {d}"),
            None => f.write_str("an unresolved output"),
        }
    }
}

/// Result of an exhaustive functional check.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub vectors_run: u32,
    pub counterexamples: Vec<Counterexample>,
    /// The clock schedule the check ran under (clocked builds only).
    pub clock: Option<ClockConfig>,
}

impl VerifyOutcome {
    pub fn pass(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Exhaustively checks one build against the arithmetic reference.
pub fn verify_variant(
    variant: Variant,
    frequency_hz: f64,
    pp: &ProcessParams,
) -> Result<VerifyOutcome, BenchError> {
    verify_netlist(&variant.build(), frequency_hz, pp)
}

/// Exhaustive check on an explicit netlist; clocked builds are detected by
/// the presence of their clock nets. Also the entry point for fault-seeded
/// netlists in tests.
pub fn verify_netlist(
    netlist: &Netlist,
    frequency_hz: f64,
    pp: &ProcessParams,
) -> Result<VerifyOutcome, BenchError> {
    let nets = BcdNets::find(netlist).map_err(BenchError::MissingNets)?;
    if nets.clk1.is_some() && nets.clk2.is_some() {
        verify_clocked(netlist, &nets, frequency_hz, pp)
    } else {
        verify_static(netlist, &nets, pp)
    }
}

fn verify_static(
    netlist: &Netlist,
    nets: &BcdNets,
    pp: &ProcessParams,
) -> Result<VerifyOutcome, BenchError> {
    let mut sim = SimState::new(netlist, pp)?;
    let mut counterexamples = Vec::new();
    let mut t = 0.0;
    let mut vectors_run = 0;
    for (a, b, cin) in all_vectors() {
        sim.apply_inputs(&vector_stimuli(nets, a, b, cin, t))?;
        sim.settle()?;
        record_mismatch(&sim, nets, a, b, cin, &mut counterexamples)?;
        vectors_run += 1;
        t = sim.now_s() + VECTOR_GAP_S;
    }
    Ok(VerifyOutcome { vectors_run, counterexamples, clock: None })
}

fn verify_clocked(
    netlist: &Netlist,
    nets: &BcdNets,
    frequency_hz: f64,
    pp: &ProcessParams,
) -> Result<VerifyOutcome, BenchError> {
    let delays = measure_delays(netlist, nets, pp)?;
    let clock = gating::derive_clock_config(
        frequency_hz,
        delays.stage1_worst_s,
        delays.stage2_worst_s,
    )?;
    let period = clock.period_s();
    let n: u32 = 200;

    let mut sim = SimState::new(netlist, pp)?;
    let (clk1, clk2) = (nets.clk1.unwrap(), nets.clk2.unwrap());
    // Uncounted warm-up evaluation: the schedule is characterized from a
    // settled sleeping state, not from the power-up state.
    sim.apply_inputs(&[(clk1, LogicLevel::L1, 0.0), (clk2, LogicLevel::L1, 0.0)])?;
    sim.apply_inputs(&vector_stimuli(nets, 0, 0, 0, 0.0))?;
    sim.settle()?;
    let t = sim.now_s() + VECTOR_GAP_S;
    sim.apply_inputs(&[(clk1, LogicLevel::L0, t), (clk2, LogicLevel::L0, t)])?;
    sim.settle()?;
    let t_start = period * ((sim.now_s() / period).floor() + 1.0);

    let mut stim = Vec::new();
    let (w1, w2) = gating::clock_waveforms(&clock, n);
    for &(t, v) in &w1 {
        stim.push((clk1, v, t_start + t));
    }
    for &(t, v) in &w2 {
        stim.push((clk2, v, t_start + t));
    }
    for (k, (a, b, cin)) in all_vectors().enumerate() {
        stim.extend(vector_stimuli(nets, a, b, cin, t_start + k as f64 * period));
    }
    sim.apply_inputs(&stim)?;

    // Sample just past the promised instant so a transition landing exactly
    // on it is included; the duty guard keeps the next edge farther away.
    let samples = gating::output_sample_times(&clock, n);
    let eps = 0.25 * gating::TIME_RESOLUTION_S;
    let mut counterexamples = Vec::new();
    let mut vectors_run = 0;
    for (k, (a, b, cin)) in all_vectors().enumerate() {
        sim.advance_until(t_start + samples[k] + eps)?;
        record_mismatch(&sim, nets, a, b, cin, &mut counterexamples)?;
        vectors_run += 1;
    }
    Ok(VerifyOutcome { vectors_run, counterexamples, clock: Some(clock) })
}

fn record_mismatch(
    sim: &SimState,
    nets: &BcdNets,
    a: u32,
    b: u32,
    cin: u32,
    out: &mut Vec<Counterexample>,
) -> Result<(), BenchError> {
    let (expect_carry, expect_digit) = bcd_add_oracle(a, b, cin)?;
    let got = read_result(sim, nets);
    if got != Some((expect_carry, expect_digit)) {
        out.push(Counterexample { a, b, cin, expect_carry, expect_digit, got });
    }
    Ok(())
}

/// Worst-case settle delays over the exhaustive vector walk.
///
/// The stage fields size the clock schedule, so on clocked builds they are
/// measured in the regime the schedule runs in: each vector wakes the
/// circuit from sleep, and the wake-up transient counts against the stage.
/// The end-to-end field is the plain combinational delay with any clocks
/// held high — the number comparable across builds.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DelayProfile {
    /// Stimulus to the last movement on the binary-stage outputs (z, k),
    /// including cluster wake-up on clocked builds.
    pub stage1_worst_s: f64,
    /// Stage-two start to the last final-output movement, including cluster
    /// wake-up on clocked builds.
    pub stage2_worst_s: f64,
    /// Stimulus to the last final-output movement with clocks held high.
    pub total_worst_s: f64,
}

/// Walks all 200 vectors in lexicographic order — after one uncounted
/// warm-up evaluation that clears the power-up state — and keeps the worst
/// per-stage and end-to-end settle times.
pub fn measure_delays(
    netlist: &Netlist,
    nets: &BcdNets,
    pp: &ProcessParams,
) -> Result<DelayProfile, BenchError> {
    let stage1_nets: Vec<NetId> = nets.z.iter().copied().chain([nets.k]).collect();
    let stage2_nets: Vec<NetId> = nets.digit.iter().copied().chain([nets.carry]).collect();

    // Combinational pass: clocks (if any) held high throughout.
    let mut sim = SimState::new(netlist, pp)?;
    if let (Some(c1), Some(c2)) = (nets.clk1, nets.clk2) {
        sim.apply_inputs(&[(c1, LogicLevel::L1, 0.0), (c2, LogicLevel::L1, 0.0)])?;
    }
    sim.apply_inputs(&vector_stimuli(nets, 0, 0, 0, 0.0))?;
    sim.settle()?;
    let mut profile = DelayProfile { stage1_worst_s: 0.0, stage2_worst_s: 0.0, total_worst_s: 0.0 };
    let mut t = sim.now_s() + VECTOR_GAP_S;
    for (a, b, cin) in all_vectors() {
        sim.apply_inputs(&vector_stimuli(nets, a, b, cin, t))?;
        let events = sim.settle()?;
        let t1 = measure_delay(&events, &stage1_nets, t).unwrap_or(0.0);
        let total = measure_delay(&events, &stage2_nets, t).unwrap_or(0.0);
        profile.stage1_worst_s = profile.stage1_worst_s.max(t1);
        profile.stage2_worst_s = profile.stage2_worst_s.max((total - t1).max(0.0));
        profile.total_worst_s = profile.total_worst_s.max(total);
        t = sim.now_s() + VECTOR_GAP_S;
    }

    if let (Some(c1), Some(c2)) = (nets.clk1, nets.clk2) {
        let (s1, s2) =
            wake_stage_delays(netlist, nets, pp, c1, c2, &stage1_nets, &stage2_nets)?;
        profile.stage1_worst_s = s1;
        profile.stage2_worst_s = s2;
    }
    Ok(profile)
}

/// Per-stage worst delays when every vector starts from sleep: the first
/// clock wakes stage one together with the operand change, the second wakes
/// stage two once stage one has settled. This is the sequence a derived
/// schedule replays, so its transients belong in the schedule's offsets.
fn wake_stage_delays(
    netlist: &Netlist,
    nets: &BcdNets,
    pp: &ProcessParams,
    clk1: NetId,
    clk2: NetId,
    stage1_nets: &[NetId],
    stage2_nets: &[NetId],
) -> Result<(f64, f64), BenchError> {
    let mut sim = SimState::new(netlist, pp)?;
    // Uncounted first evaluation from the power-up state, ending asleep.
    sim.apply_inputs(&[(clk1, LogicLevel::L1, 0.0), (clk2, LogicLevel::L1, 0.0)])?;
    sim.apply_inputs(&vector_stimuli(nets, 0, 0, 0, 0.0))?;
    sim.settle()?;
    let t = sim.now_s() + VECTOR_GAP_S;
    sim.apply_inputs(&[(clk1, LogicLevel::L0, t), (clk2, LogicLevel::L0, t)])?;
    sim.settle()?;

    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for (a, b, cin) in all_vectors() {
        let t1_start = sim.now_s() + VECTOR_GAP_S;
        let mut stim = vector_stimuli(nets, a, b, cin, t1_start);
        stim.push((clk1, LogicLevel::L1, t1_start));
        sim.apply_inputs(&stim)?;
        let events = sim.settle()?;
        worst1 = worst1.max(measure_delay(&events, stage1_nets, t1_start).unwrap_or(0.0));

        let t2_start = sim.now_s() + VECTOR_GAP_S;
        sim.apply_inputs(&[(clk2, LogicLevel::L1, t2_start)])?;
        let events = sim.settle()?;
        worst2 = worst2.max(measure_delay(&events, stage2_nets, t2_start).unwrap_or(0.0));

        let t_sleep = sim.now_s() + VECTOR_GAP_S;
        sim.apply_inputs(&[
            (clk1, LogicLevel::L0, t_sleep),
            (clk2, LogicLevel::L0, t_sleep),
        ])?;
        sim.settle()?;
    }
    Ok((worst1, worst2))
}

/// Knobs of a benchmark sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub params: ProcessParams,
    /// Exact parameter-file text; its SHA-256 is stamped into the report.
    pub params_text: String,
    pub seed: u64,
    pub cycles: u32,
    /// Fractional margin added to the awake window of derived schedules.
    pub duty_guard: f64,
    /// Override for the charge billed when a sleeping cluster reconnects.
    pub wake_cap_f: Option<f64>,
}

impl SweepConfig {
    /// Builds a config whose parameters come from `text`.
    pub fn from_params_text(text: &str) -> Result<SweepConfig, BenchError> {
        let params = ProcessParams::from_text(text)?;
        params.check()?;
        Ok(SweepConfig { params, params_text: text.to_string(), ..SweepConfig::default() })
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            params: ProcessParams::default(),
            params_text: DEFAULT_PARAMS_TEXT.to_string(),
            seed: DEFAULT_SEED,
            cycles: DEFAULT_CYCLES,
            duty_guard: gating::DEFAULT_DUTY_GUARD,
            wake_cap_f: None,
        }
    }
}

/// One measured cell of the sweep.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct BenchRow {
    pub variant: Variant,
    pub frequency_hz: f64,
    pub avg_power_w: f64,
    pub worst_delay_s: f64,
    pub pdp_j: f64,
}

/// Full sweep result plus the provenance digest of the parameter set.
#[derive(Clone, PartialEq, Debug)]
pub struct BenchReport {
    /// Ordered by frequency ascending, then by variant in [`Variant::ALL`]
    /// order.
    pub rows: Vec<BenchRow>,
    /// Hex SHA-256 of the parameter-file text the sweep ran with.
    pub params_digest: String,
}

/// Runs the benchmark matrix: for every requested variant and frequency, the
/// worst-case delay over the exhaustive vector walk and the average power of
/// the seeded pseudo-random workload.
pub fn sweep(
    variants: &[Variant],
    frequencies_hz: &[f64],
    cfg: &SweepConfig,
) -> Result<BenchReport, BenchError> {
    for &f in frequencies_hz {
        if !(f.is_finite() && f > 0.0) {
            return Err(BenchError::BadFrequency(f));
        }
    }
    struct Prepared {
        variant: Variant,
        netlist: Netlist,
        delays: DelayProfile,
    }
    let mut prepared = Vec::new();
    // Build and characterize each variant once; delays are set by device
    // thresholds and loads, not by the clock frequency.
    for v in Variant::ALL {
        if !variants.contains(&v) {
            continue;
        }
        let netlist = v.build();
        let nets = BcdNets::find(&netlist).map_err(BenchError::MissingNets)?;
        let delays = measure_delays(&netlist, &nets, &cfg.params)?;
        prepared.push(Prepared { variant: v, netlist, delays });
    }

    let mut freqs = frequencies_hz.to_vec();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();

    let mut rows = Vec::new();
    for &freq in &freqs {
        for p in &prepared {
            let nets = BcdNets::find(&p.netlist).map_err(BenchError::MissingNets)?;
            let avg_power_w = workload_power(&p.netlist, &nets, &p.delays, freq, cfg)?;
            rows.push(BenchRow {
                variant: p.variant,
                frequency_hz: freq,
                avg_power_w,
                worst_delay_s: p.delays.total_worst_s,
                pdp_j: pdp(avg_power_w, p.delays.total_worst_s),
            });
        }
    }
    Ok(BenchReport { rows, params_digest: sha256_hex(cfg.params_text.as_bytes()) })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Leakage evaluator with a cache keyed on the full logic state, so repeated
/// workload states are priced once.
struct LeakageMemo<'n> {
    model: LeakageModel<'n>,
    cache: HashMap<Vec<u8>, f64>,
}

impl<'n> LeakageMemo<'n> {
    fn new(netlist: &'n Netlist) -> Self {
        LeakageMemo { model: LeakageModel::build(netlist), cache: HashMap::new() }
    }

    fn rate(&mut self, values: &[LogicLevel], pp: &ProcessParams) -> f64 {
        let key: Vec<u8> = values.iter().map(|&v| v as u8).collect();
        *self.cache.entry(key).or_insert_with(|| self.model.evaluate(values, pp))
    }

    /// Prices a fully gated span. While both stage clocks are low, the
    /// producers and consumers around the adder are gated by the same clock
    /// tree, so nothing holds the operand ports at a driven level; they are
    /// released to high impedance for the span so the sleep transistors —
    /// not the test harness's held operands — set the standby current.
    fn rate_released(
        &mut self,
        values: &[LogicLevel],
        nets: &BcdNets,
        pp: &ProcessParams,
    ) -> f64 {
        let mut freed = values.to_vec();
        for port in nets.operand_ports() {
            freed[port.index()] = LogicLevel::LZ;
        }
        self.rate(&freed, pp)
    }
}

/// Average power of the seeded workload on one build at one frequency.
///
/// The run warms the circuit up with one uncounted evaluation, then applies
/// `cfg.cycles` random vectors on cycle boundaries (with the derived clock
/// schedule on clocked builds) and integrates switching energy plus leakage
/// over exactly that window. Leakage is piecewise constant between phase
/// boundaries — clock edges and cycle ends — with each span priced at the
/// state it settles into.
fn workload_power(
    netlist: &Netlist,
    nets: &BcdNets,
    delays: &DelayProfile,
    frequency_hz: f64,
    cfg: &SweepConfig,
) -> Result<f64, BenchError> {
    let clocked = nets.clk1.is_some() && nets.clk2.is_some();
    let clock = if clocked {
        Some(gating::derive_clock_config_with_guard(
            frequency_hz,
            delays.stage1_worst_s,
            delays.stage2_worst_s,
            cfg.duty_guard,
        )?)
    } else {
        None
    };
    let period = 1.0 / frequency_hz;
    let cycles = cfg.cycles.max(1);

    let mut sim = SimState::new(netlist, &cfg.params)?;
    if let Some(c) = cfg.wake_cap_f {
        sim.set_wake_capacitance(c);
    }

    // Warm-up: one settled evaluation, then (on clocked builds) back to
    // sleep, so the measured window starts from a representative state
    // rather than the power-up storm.
    if let (Some(c1), Some(c2)) = (nets.clk1, nets.clk2) {
        sim.apply_inputs(&[(c1, LogicLevel::L1, 0.0), (c2, LogicLevel::L1, 0.0)])?;
        sim.apply_inputs(&vector_stimuli(nets, 0, 0, 0, 0.0))?;
        sim.settle()?;
        let t = sim.now_s() + VECTOR_GAP_S;
        sim.apply_inputs(&[(c1, LogicLevel::L0, t), (c2, LogicLevel::L0, t)])?;
        sim.settle()?;
    } else {
        sim.apply_inputs(&vector_stimuli(nets, 0, 0, 0, 0.0))?;
        sim.settle()?;
    }
    let t_start = period * ((sim.now_s() / period).floor() + 1.0);
    let t_end = t_start + f64::from(cycles) * period;

    // Queue the whole schedule up front, then walk it boundary by boundary.
    let mut stim = Vec::new();
    let mut bounds: Vec<f64> = Vec::new();
    if let Some(clk) = &clock {
        let (w1, w2) = gating::clock_waveforms(clk, cycles);
        for &(t, v) in &w1 {
            stim.push((nets.clk1.unwrap(), v, t_start + t));
            bounds.push(t_start + t);
        }
        for &(t, v) in &w2 {
            stim.push((nets.clk2.unwrap(), v, t_start + t));
            bounds.push(t_start + t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..cycles {
        let (a, b, cin) = (rng.gen_range(0..10), rng.gen_range(0..10), rng.gen_range(0..2));
        stim.extend(vector_stimuli(nets, a, b, cin, t_start + f64::from(k) * period));
    }
    sim.apply_inputs(&stim)?;

    bounds.extend((1..=cycles).map(|k| t_start + f64::from(k) * period));
    bounds.retain(|&b| b > t_start && b <= t_end);
    bounds.sort_by(f64::total_cmp);

    let mut memo = LeakageMemo::new(netlist);
    let mut trace = PowerTrace::default();
    let mut prev = t_start;
    // Each span (prev, b] is priced at the state just before b, so a span
    // that ends on a clock edge is still priced in the phase it spent.
    for &b in &bounds {
        sim.advance_until(b)?;
        let values = sim.values();
        let gated_span = clocked
            && nets.clk1.map(|n| values[n.index()]) == Some(LogicLevel::L0)
            && nets.clk2.map(|n| values[n.index()]) == Some(LogicLevel::L0);
        let rate = if gated_span {
            memo.rate_released(values, nets, &cfg.params)
        } else {
            memo.rate(values, &cfg.params)
        };
        trace.record_leakage(prev, b, rate);
        prev = b;
    }
    for e in sim.switching_log() {
        if e.time_s >= t_start {
            trace.record_switch(e.time_s, e.net, e.c_load_f);
        }
    }
    trace.duration_s = t_end - t_start;
    Ok(average_power(&trace, &cfg.params)?)
}

/// Output formats for [`emit`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    Table,
    Csv,
    Svg,
}

impl ReportFormat {
    pub fn from_name(name: &str) -> Option<ReportFormat> {
        match name {
            "table" => Some(ReportFormat::Table),
            "csv" => Some(ReportFormat::Csv),
            "svg" => Some(ReportFormat::Svg),
            _ => None,
        }
    }
}

/// Column header of the CSV rendering.
pub const CSV_HEADER: &str = "variant,frequency_hz,avg_power_w,worst_delay_s,pdp_j";

/// Renders a report. Every line ends with `\n`; numbers use six significant
/// digits of scientific notation, so re-parsing a CSV reproduces the values
/// to that precision.
pub fn emit(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => emit_table(report),
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Svg => emit_svg(report),
    }
}

fn emit_csv(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.variant,
            format_sci6(r.frequency_hz),
            format_sci6(r.avg_power_w),
            format_sci6(r.worst_delay_s),
            format_sci6(r.pdp_j),
        ));
    }
    out
}

fn emit_table(report: &BenchReport) -> String {
    const HEADERS: [&str; 5] =
        ["variant", "frequency_hz", "avg_power_w", "worst_delay_s", "pdp_j"];
    let cells: Vec<[String; 5]> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.variant.to_string(),
                format_sci6(r.frequency_hz),
                format_sci6(r.avg_power_w),
                format_sci6(r.worst_delay_s),
                format_sci6(r.pdp_j),
            ]
        })
        .collect();
    let mut widths = HEADERS.map(str::len);
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |row: [&str; 5]| {
        for (i, (cell, w)) in row.iter().zip(widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("{cell:>w$}"));
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    push_row(HEADERS);
    for row in &cells {
        push_row([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    out.push_str(&format!("params sha256: {}\n", report.params_digest));
    out
}

/// Fixed bar colors, one per variant, chosen to stay readable in print.
fn variant_color(v: Variant) -> &'static str {
    match v {
        Variant::Conventional => "#5b7da5",
        Variant::Dvt => "#c08a2d",
        Variant::Gated => "#3f8f5f",
    }
}

/// Grouped-bar chart: one panel per metric (average power, then
/// power-delay product), frequencies as groups, variants as bars.
fn emit_svg(report: &BenchReport) -> String {
    let mut freqs: Vec<f64> = report.rows.iter().map(|r| r.frequency_hz).collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    let variants: Vec<Variant> = Variant::ALL
        .iter()
        .copied()
        .filter(|v| report.rows.iter().any(|r| r.variant == *v))
        .collect();

    const PLOT_W: f64 = 560.0;
    const PLOT_H: f64 = 170.0;
    const LEFT: f64 = 90.0;
    const TOP0: f64 = 46.0;
    const PANEL_GAP: f64 = 70.0;
    let width = LEFT + PLOT_W + 24.0;
    let height = TOP0 + 2.0 * PLOT_H + PANEL_GAP + 40.0;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    );

    // Legend across the top.
    let mut lx = LEFT;
    for &v in &variants {
        svg.push_str(&format!(
            "<rect x=\"{lx:.2}\" y=\"14\" width=\"12\" height=\"12\" fill=\"{}\"/>\n\
             <text x=\"{:.2}\" y=\"24\">{v}</text>\n",
            variant_color(v),
            lx + 16.0,
        ));
        lx += 120.0;
    }

    let metrics: [(&str, fn(&BenchRow) -> f64); 2] = [
        ("average power (W)", |r| r.avg_power_w),
        ("power-delay product (J)", |r| r.pdp_j),
    ];
    for (panel, (title, metric)) in metrics.iter().enumerate() {
        let top = TOP0 + panel as f64 * (PLOT_H + PANEL_GAP);
        let base = top + PLOT_H;
        let max = report.rows.iter().map(|r| metric(r)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let scale = max * 1.08;

        svg.push_str(&format!(
            "<text x=\"{LEFT}\" y=\"{:.2}\" font-weight=\"bold\">{title}</text>\n",
            top - 8.0
        ));
        // Horizontal gridlines with value labels at quarter steps.
        for g in 0..=4 {
            let value = scale * f64::from(g) / 4.0;
            let y = base - PLOT_H * f64::from(g) / 4.0;
            svg.push_str(&format!(
                "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#dddddd\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                LEFT + PLOT_W,
                LEFT - 6.0,
                y + 4.0,
                format_sci6(value),
            ));
        }

        let slot = PLOT_W / freqs.len() as f64;
        let bar_w = slot * 0.7 / variants.len() as f64;
        for (gi, &freq) in freqs.iter().enumerate() {
            let group_x = LEFT + gi as f64 * slot;
            for (vi, &v) in variants.iter().enumerate() {
                let Some(row) = report
                    .rows
                    .iter()
                    .find(|r| r.variant == v && r.frequency_hz == freq)
                else {
                    continue;
                };
                let h = PLOT_H * metric(row) / scale;
                let x = group_x + slot * 0.15 + vi as f64 * bar_w;
                svg.push_str(&format!(
                    "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
                     fill=\"{}\"/>\n",
                    base - h,
                    bar_w * 0.9,
                    variant_color(v),
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.0} MHz</text>\n",
                group_x + slot / 2.0,
                base + 16.0,
                freq / 1.0e6,
            ));
        }
        svg.push_str(&format!(
            "<line x1=\"{LEFT}\" y1=\"{base:.2}\" x2=\"{:.2}\" y2=\"{base:.2}\" \
             stroke=\"#333333\"/>\n",
            LEFT + PLOT_W,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{LEFT}\" y=\"{:.2}\" fill=\"#888888\">params sha256: {}</text>\n",
        height - 10.0,
        report.params_digest,
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_covers_every_vector_and_decomposes_the_sum() {
        let mut n = 0;
        for (a, b, cin) in all_vectors() {
            let (carry, digit) = bcd_add_oracle(a, b, cin).unwrap();
            assert_eq!(carry * 10 + digit, a + b + cin);
            assert!(digit <= 9);
            n += 1;
        }
        assert_eq!(n, 200);
    }

    #[test]
    fn oracle_rejects_out_of_range_operands() {
        assert!(matches!(bcd_add_oracle(10, 0, 0), Err(BenchError::DigitRange(10))));
        assert!(matches!(bcd_add_oracle(0, 12, 1), Err(BenchError::DigitRange(12))));
        assert!(matches!(bcd_add_oracle(3, 4, 2), Err(BenchError::CarryRange(2))));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::from_name(v.name()), Some(v));
        }
        assert_eq!(Variant::from_name("fast"), None);
    }

    #[test]
    fn shipped_parameter_file_parses_to_the_defaults() {
        let parsed = ProcessParams::from_text(DEFAULT_PARAMS_TEXT).unwrap();
        parsed.check().unwrap();
    }

    #[test]
    fn conventional_build_verifies_exhaustively() {
        let outcome =
            verify_variant(Variant::Conventional, 200.0e6, &ProcessParams::default()).unwrap();
        assert_eq!(outcome.vectors_run, 200);
        assert!(outcome.pass(), "counterexamples: {:?}", outcome.counterexamples);
        assert!(outcome.clock.is_none());
    }

    #[test]
    fn delay_profile_orders_stages_sensibly() {
        let netlist = Variant::Conventional.build();
        let nets = BcdNets::find(&netlist).unwrap();
        let d = measure_delays(&netlist, &nets, &ProcessParams::default()).unwrap();
        assert!(d.stage1_worst_s > 0.0);
        assert!(d.stage2_worst_s > 0.0);
        assert!(d.total_worst_s >= d.stage1_worst_s);
        assert!(d.total_worst_s <= d.stage1_worst_s + d.stage2_worst_s + 1.0e-15);
    }

    fn tiny_report() -> BenchReport {
        BenchReport {
            rows: vec![
                BenchRow {
                    variant: Variant::Conventional,
                    frequency_hz: 5.0e7,
                    avg_power_w: 1.25e-6,
                    worst_delay_s: 1.1e-10,
                    pdp_j: 1.375e-16,
                },
                BenchRow {
                    variant: Variant::Gated,
                    frequency_hz: 5.0e7,
                    avg_power_w: 4.0e-7,
                    worst_delay_s: 1.6e-10,
                    pdp_j: 6.4e-17,
                },
            ],
            params_digest: "ab".repeat(32),
        }
    }

    #[test]
    fn csv_has_header_one_line_per_row_and_reparses() {
        let report = tiny_report();
        let csv = emit(&report, ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + report.rows.len());
        assert_eq!(lines[0], CSV_HEADER);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
        for (line, row) in lines[1..].iter().zip(&report.rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            assert_eq!(fields[0], row.variant.name());
            let back: f64 = fields[2].parse().unwrap();
            assert!((back - row.avg_power_w).abs() <= 1.0e-5 * row.avg_power_w.abs());
        }
    }

    #[test]
    fn table_lists_rows_in_report_order_with_digest_footer() {
        let report = tiny_report();
        let table = emit(&report, ReportFormat::Table);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("variant"));
        assert!(lines[1].starts_with("conventional"));
        assert!(lines[2].starts_with("gated"));
        assert!(lines[3].starts_with("params sha256: abab"));
    }

    #[test]
    fn svg_draws_a_bar_per_row_per_panel() {
        let report = tiny_report();
        let svg = emit(&report, ReportFormat::Svg);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        // Background + legend swatches + one bar per row per panel.
        let rects = svg.matches("<rect ").count();
        assert_eq!(rects, 1 + 2 + 2 * report.rows.len());
        assert!(svg.contains("50 MHz"));
    }

    #[test]
    fn sweeps_with_the_same_seed_are_byte_identical() {
        let cfg = SweepConfig { cycles: 12, ..SweepConfig::default() };
        let run = || {
            let report = sweep(&[Variant::Conventional], &[2.0e8], &cfg).unwrap();
            emit(&report, ReportFormat::Csv)
        };
        let first = run();
        assert_eq!(first, run());
        assert_eq!(first.lines().count(), 2);
    }

    #[test]
    fn sweep_rows_are_ordered_by_frequency_then_variant() {
        let cfg = SweepConfig { cycles: 6, ..SweepConfig::default() };
        let report =
            sweep(&[Variant::Dvt, Variant::Conventional], &[2.0e8, 1.0e8], &cfg).unwrap();
        let order: Vec<(f64, Variant)> =
            report.rows.iter().map(|r| (r.frequency_hz, r.variant)).collect();
        assert_eq!(
            order,
            vec![
                (1.0e8, Variant::Conventional),
                (1.0e8, Variant::Dvt),
                (2.0e8, Variant::Conventional),
                (2.0e8, Variant::Dvt),
            ]
        );
        assert_eq!(report.params_digest.len(), 64);
    }
}
