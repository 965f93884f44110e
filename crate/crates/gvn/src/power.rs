//! Closed-form leakage, delay, and energy models.
//!
//! Two analytic models drive every figure this crate produces:
//!
//! * Subthreshold conduction of an OFF transistor,
//!   `I = A * exp(gamma*q*(Vg - Vs - Vto) / (n' k T)) * (1 - exp(-q*Vds / (k T)))`
//!   with prefactor `A = mu0 * Cox * (W/L) * (kT/q)^2 * e^1.8`. PMOS
//!   quantities are mirrored so the same expression serves both polarities.
//! * Alpha-power switching delay of a logic stage,
//!   `T = C_L * Vdd / (K * (Vdd - Vth)^alpha)`, where `K` absorbs drive
//!   strength and process and scales linearly with the driving device's
//!   aspect ratio.
//!
//! Static leakage of a whole circuit state is computed path-wise: conducting
//! transistors merge nets into equal-potential islands, every OFF (or
//! unknown-gate) transistor is a blocked edge between islands, and each
//! simple island path from a high driver to a low driver contributes the
//! minimum off-current along it, derated by `stack_factor` per additional
//! blocked device in series. Dynamic energy is the usual `1/2 C V^2` per
//! recorded transition. Short-circuit current is outside the model.

use crate::netlist::{DeviceType, NetId, NetKind, Netlist, Transistor, VthClass};
use crate::sim::LogicLevel;

/// Process and supply parameters. Everything the models need is a plain
/// field, so a parameter file is a flat `key = value` list using exactly
/// these names (in their documented capitalizations, e.g. `temperature_K`).
#[derive(Clone, PartialEq, Debug)]
pub struct ProcessParams {
    /// Junction temperature, kelvin.
    pub temperature_k: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann_j_per_k: f64,
    /// Elementary charge, coulomb.
    pub charge_c: f64,
    /// Subthreshold slope factor n'.
    pub n_prime: f64,
    /// Zero-bias mobility, m^2/(V s).
    pub mu0_m2_per_vs: f64,
    /// Gate oxide capacitance per area, F/m^2.
    pub cox_f_per_m2: f64,
    /// Body-effect coefficient applied to the gate overdrive.
    pub gamma: f64,
    /// Threshold voltage of the low-Vth device class, volts.
    pub vth_low_v: f64,
    /// Threshold voltage of the high-Vth device class, volts.
    pub vth_high_v: f64,
    /// Supply voltage, volts.
    pub vdd_v: f64,
    /// Velocity-saturation exponent of the delay model.
    pub alpha: f64,
    /// Drive factor of the delay model per unit W/L of the driving device.
    pub k_drive: f64,
    /// Series derating per additional OFF device in a blocked path.
    pub stack_factor: f64,
    /// Fixed wiring capacitance added to every net's gate load, farads.
    pub wire_cap_f: f64,
}

impl Default for ProcessParams {
    /// Calibrated defaults. These are fitted so that the three generated
    /// adder variants land on the reference power/delay comparison at the
    /// benchmark frequencies; they are a working point, not measurements.
    fn default() -> Self {
        ProcessParams {
            temperature_k: 300.0,
            boltzmann_j_per_k: 1.380649e-23,
            charge_c: 1.602176634e-19,
            n_prime: 1.5,
            mu0_m2_per_vs: 0.02,
            cox_f_per_m2: 0.012,
            gamma: 1.0,
            vth_low_v: 0.22,
            vth_high_v: 0.45,
            vdd_v: 1.0,
            alpha: 1.3,
            k_drive: 1.7e-5,
            stack_factor: 0.2,
            wire_cap_f: 1.0e-16,
        }
    }
}

type Getter = fn(&ProcessParams) -> f64;
type Setter = fn(&mut ProcessParams, f64);

/// Field table shared by the parameter-file reader and writer.
const PARAM_KEYS: [(&str, Getter, Setter); 14] = [
    ("temperature_K", |p| p.temperature_k, |p, v| p.temperature_k = v),
    ("boltzmann_J_per_K", |p| p.boltzmann_j_per_k, |p, v| p.boltzmann_j_per_k = v),
    ("charge_C", |p| p.charge_c, |p, v| p.charge_c = v),
    ("n_prime", |p| p.n_prime, |p, v| p.n_prime = v),
    ("mu0_m2_per_Vs", |p| p.mu0_m2_per_vs, |p, v| p.mu0_m2_per_vs = v),
    ("cox_F_per_m2", |p| p.cox_f_per_m2, |p, v| p.cox_f_per_m2 = v),
    ("gamma", |p| p.gamma, |p, v| p.gamma = v),
    ("vth_low_V", |p| p.vth_low_v, |p, v| p.vth_low_v = v),
    ("vth_high_V", |p| p.vth_high_v, |p, v| p.vth_high_v = v),
    ("vdd_V", |p| p.vdd_v, |p, v| p.vdd_v = v),
    ("alpha", |p| p.alpha, |p, v| p.alpha = v),
    ("k_drive", |p| p.k_drive, |p, v| p.k_drive = v),
    ("stack_factor", |p| p.stack_factor, |p, v| p.stack_factor = v),
    ("wire_cap_F", |p| p.wire_cap_f, |p, v| p.wire_cap_f = v),
];

#[derive(thiserror::Error, Clone, PartialEq, Debug)]
pub enum ParamError {
    #[error("line {line}: expected key = value, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown parameter {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad numeric value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
    #[error("line {line}: parameter {key} set twice")]
    DuplicateKey { line: usize, key: String },
    #[error("parameter check failed: {0}")]
    Invalid(String),
}

impl ProcessParams {
    /// Thermal voltage kT/q, volts.
    pub fn thermal_voltage(&self) -> f64 {
        self.boltzmann_j_per_k * self.temperature_k / self.charge_c
    }

    pub fn vth(&self, class: VthClass) -> f64 {
        match class {
            VthClass::Low => self.vth_low_v,
            VthClass::High => self.vth_high_v,
        }
    }

    /// Parses a `key = value` parameter file over the defaults. Keys not
    /// present keep their default value; unknown or repeated keys are
    /// errors. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, ParamError> {
        let mut params = ProcessParams::default();
        params.apply_text(text)?;
        Ok(params)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ParamError> {
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ParamError::Syntax { line: lineno, text: line.to_string() });
            };
            let key = key.trim();
            let value = value.trim();
            let Some((canonical, _, set)) = PARAM_KEYS.iter().find(|(k, _, _)| *k == key) else {
                return Err(ParamError::UnknownKey { line: lineno, key: key.to_string() });
            };
            if seen.contains(canonical) {
                return Err(ParamError::DuplicateKey { line: lineno, key: key.to_string() });
            }
            seen.push(canonical);
            let parsed: f64 = value.parse().map_err(|_| ParamError::BadValue {
                line: lineno,
                key: key.to_string(),
                value: value.to_string(),
            })?;
            set(self, parsed);
        }
        Ok(())
    }

    /// Serializes every parameter, one `key = value` per line, in the fixed
    /// table order. Values round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, get, _) in PARAM_KEYS {
            out.push_str(&format!("{key} = {:e}\n", get(self)));
        }
        out
    }

    /// Rejects parameter sets the models cannot evaluate sensibly.
    pub fn check(&self) -> Result<(), ParamError> {
        let positive = [
            ("temperature_K", self.temperature_k),
            ("boltzmann_J_per_K", self.boltzmann_j_per_k),
            ("charge_C", self.charge_c),
            ("n_prime", self.n_prime),
            ("mu0_m2_per_Vs", self.mu0_m2_per_vs),
            ("cox_F_per_m2", self.cox_f_per_m2),
            ("gamma", self.gamma),
            ("vdd_V", self.vdd_v),
            ("alpha", self.alpha),
            ("k_drive", self.k_drive),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::Invalid(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.vth_low_v > 0.0 && self.vth_high_v > self.vth_low_v) {
            return Err(ParamError::Invalid(format!(
                "need 0 < vth_low_V < vth_high_V, got {} and {}",
                self.vth_low_v, self.vth_high_v
            )));
        }
        if self.vth_high_v >= self.vdd_v {
            return Err(ParamError::Invalid(format!(
                "vth_high_V {} must stay below vdd_V {}",
                self.vth_high_v, self.vdd_v
            )));
        }
        if !(self.stack_factor > 0.0 && self.stack_factor <= 1.0) {
            return Err(ParamError::Invalid(format!(
                "stack_factor must be in (0, 1], got {}",
                self.stack_factor
            )));
        }
        if !(self.wire_cap_f.is_finite() && self.wire_cap_f >= 0.0) {
            return Err(ParamError::Invalid(format!(
                "wire_cap_F must be nonnegative, got {}",
                self.wire_cap_f
            )));
        }
        Ok(())
    }
}

/// Subthreshold prefactor `A` for a device of the given aspect ratio.
pub fn leakage_prefactor(aspect: f64, pp: &ProcessParams) -> f64 {
    let vt = pp.thermal_voltage();
    pp.mu0_m2_per_vs * pp.cox_f_per_m2 * aspect * vt * vt * 1.8f64.exp()
}

/// Subthreshold current of `device` under the given terminal voltages.
/// PMOS voltages are mirrored internally, so callers always pass physical
/// node voltages and a nonnegative source-drain magnitude `vds_v`. A device
/// whose gate overdrive reaches its threshold is conducting and contributes
/// no subthreshold leakage: the function returns zero for it.
pub fn subthreshold_current(
    device: &Transistor,
    vg_v: f64,
    vs_v: f64,
    vds_v: f64,
    pp: &ProcessParams,
) -> f64 {
    let overdrive = match device.device_type {
        DeviceType::Nmos => vg_v - vs_v,
        DeviceType::Pmos => vs_v - vg_v,
    };
    let vto = pp.vth(device.vth_class);
    if overdrive >= vto {
        return 0.0;
    }
    off_current(device.geometry.aspect(), overdrive, vto, vds_v.max(0.0), pp)
}

/// Shared core of the subthreshold model: current for a non-conducting
/// channel at the given overdrive and threshold.
fn off_current(aspect: f64, overdrive: f64, vto: f64, vds: f64, pp: &ProcessParams) -> f64 {
    let vt = pp.thermal_voltage();
    let a = leakage_prefactor(aspect, pp);
    let exponent = pp.gamma * (overdrive - vto) / (pp.n_prime * vt);
    a * exponent.exp() * (1.0 - (-vds / vt).exp())
}

#[derive(thiserror::Error, Clone, PartialEq, Debug)]
pub enum ModelError {
    #[error("threshold {vth_v} V does not stay below supply {vdd_v} V")]
    VthExceedsVdd { vth_v: f64, vdd_v: f64 },
    #[error("trace duration must be positive, got {0} s")]
    NonpositiveDuration(f64),
}

/// Alpha-power stage delay: `C_L * Vdd / (K * (Vdd - Vth)^alpha)`.
pub fn gate_delay(
    c_load_f: f64,
    vdd_v: f64,
    k_drive: f64,
    vth_v: f64,
    alpha: f64,
) -> Result<f64, ModelError> {
    if vth_v >= vdd_v {
        return Err(ModelError::VthExceedsVdd { vth_v, vdd_v });
    }
    Ok(c_load_f * vdd_v / (k_drive * (vdd_v - vth_v).powf(alpha)))
}

/// One recorded output transition: the driven net and the capacitance that
/// was charged or discharged.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SwitchingEvent {
    pub time_s: f64,
    pub net: NetId,
    pub c_load_f: f64,
}

/// One span of constant static leakage.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LeakageInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub leakage_w: f64,
}

/// Everything a simulation run accumulates for power accounting.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct PowerTrace {
    pub switching_events: Vec<SwitchingEvent>,
    pub leakage_intervals: Vec<LeakageInterval>,
    pub duration_s: f64,
}

impl PowerTrace {
    pub fn record_switch(&mut self, time_s: f64, net: NetId, c_load_f: f64) {
        debug_assert!(time_s >= 0.0 && c_load_f >= 0.0);
        self.switching_events.push(SwitchingEvent { time_s, net, c_load_f });
    }

    /// Appends a leakage span. Spans must be recorded in order and must not
    /// overlap; zero-width spans are dropped.
    pub fn record_leakage(&mut self, start_s: f64, end_s: f64, leakage_w: f64) {
        debug_assert!(end_s >= start_s && leakage_w >= 0.0);
        if let Some(last) = self.leakage_intervals.last() {
            debug_assert!(start_s >= last.end_s, "leakage intervals must not overlap");
        }
        if end_s > start_s {
            self.leakage_intervals.push(LeakageInterval { start_s, end_s, leakage_w });
        }
    }
}

/// Total `1/2 C V^2` switching energy of a trace, joules.
pub fn dynamic_energy(trace: &PowerTrace, pp: &ProcessParams) -> f64 {
    let half_v2 = 0.5 * pp.vdd_v * pp.vdd_v;
    trace.switching_events.iter().map(|e| half_v2 * e.c_load_f).sum()
}

/// Average power of a trace: switching energy plus integrated leakage,
/// divided by the recorded duration.
pub fn average_power(trace: &PowerTrace, pp: &ProcessParams) -> Result<f64, ModelError> {
    if !(trace.duration_s > 0.0) {
        return Err(ModelError::NonpositiveDuration(trace.duration_s));
    }
    let leakage: f64 = trace
        .leakage_intervals
        .iter()
        .map(|iv| iv.leakage_w * (iv.end_s - iv.start_s))
        .sum();
    Ok((dynamic_energy(trace, pp) + leakage) / trace.duration_s)
}

/// Power-delay product, joules.
pub fn pdp(avg_power_w: f64, delay_s: f64) -> f64 {
    avg_power_w * delay_s
}

/// Reusable leakage evaluator for one netlist. Building it precomputes the
/// channel adjacency; [`LeakageModel::evaluate`] then prices any logic state.
pub struct LeakageModel<'n> {
    netlist: &'n Netlist,
    /// Rails plus input/clock ports: the only nets that source or sink
    /// leakage current.
    endpoints: Vec<NetId>,
}

/// Upper bound on island paths priced per evaluation; a blow-up past this
/// means the netlist is far outside this crate's intended scale.
const MAX_LEAKAGE_PATHS: usize = 1_000_000;

impl<'n> LeakageModel<'n> {
    pub fn build(netlist: &'n Netlist) -> Self {
        let mut endpoints = Vec::new();
        for (idx, net) in netlist.nets().iter().enumerate() {
            if net.kind.is_rail() {
                endpoints.push(NetId(idx as u32));
            }
        }
        for &p in netlist.input_ports().iter().chain(netlist.clock_ports()) {
            if !endpoints.contains(&p) {
                endpoints.push(p);
            }
        }
        LeakageModel { netlist, endpoints }
    }

    /// Static leakage power of one logic state, watts.
    ///
    /// Conducting devices merge nets into islands. Every simple island path
    /// from a high endpoint to a low endpoint through blocked devices
    /// contributes `min(off currents) * stack_factor^(blocked - 1)`; a
    /// device whose gate is unresolved is priced as OFF at the lowest
    /// threshold present on its path, which is the worst case.
    pub fn evaluate(&self, values: &[LogicLevel], pp: &ProcessParams) -> f64 {
        let nets = self.netlist.nets();
        assert_eq!(values.len(), nets.len(), "state must cover every net");

        #[derive(Clone, Copy, PartialEq)]
        enum Conduction {
            On,
            Off,
            Unknown,
        }
        let conduction: Vec<Conduction> = self
            .netlist
            .devices()
            .iter()
            .map(|d| {
                let gate = values[d.gate.index()];
                match (d.device_type, gate) {
                    (DeviceType::Nmos, LogicLevel::L1) | (DeviceType::Pmos, LogicLevel::L0) => {
                        Conduction::On
                    }
                    (DeviceType::Nmos, LogicLevel::L0) | (DeviceType::Pmos, LogicLevel::L1) => {
                        Conduction::Off
                    }
                    _ => Conduction::Unknown,
                }
            })
            .collect();

        // Union nets joined by conducting channels into islands.
        let mut uf = UnionFind::new(nets.len());
        for (idx, dev) in self.netlist.devices().iter().enumerate() {
            if conduction[idx] == Conduction::On {
                uf.union(dev.source.index(), dev.drain.index());
            }
        }

        // Polarity of driver islands. An island pinned both high and low is
        // in contention; no well-defined leakage path terminates on it.
        let mut high: Vec<bool> = vec![false; nets.len()];
        let mut low: Vec<bool> = vec![false; nets.len()];
        for &ep in &self.endpoints {
            let root = uf.find(ep.index());
            let level = match nets[ep.index()].kind {
                NetKind::RailVdd => LogicLevel::L1,
                NetKind::RailGnd => LogicLevel::L0,
                _ => values[ep.index()],
            };
            match level {
                LogicLevel::L1 => high[root] = true,
                LogicLevel::L0 => low[root] = true,
                _ => {}
            }
        }

        // Blocked edges between distinct islands. A blocked device whose
        // terminals are shorted by a conducting detour sees no voltage and
        // is skipped.
        let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nets.len()];
        for (idx, dev) in self.netlist.devices().iter().enumerate() {
            if conduction[idx] == Conduction::On || dev.source == dev.drain {
                continue;
            }
            let a = uf.find(dev.source.index());
            let b = uf.find(dev.drain.index());
            if a != b {
                edges[a].push((idx, b));
                edges[b].push((idx, a));
            }
        }

        let vt = pp.thermal_voltage();
        let vds_term = 1.0 - (-pp.vdd_v / vt).exp();
        let class_current = |aspect: f64, vto: f64| -> f64 {
            leakage_prefactor(aspect, pp) * (pp.gamma * (-vto) / (pp.n_prime * vt)).exp() * vds_term
        };

        // Depth-first enumeration of simple island paths from each high
        // driver island to any low driver island. Other driver islands pin
        // their own potential and are never path interiors.
        let devices = self.netlist.devices();
        let mut total = 0.0f64;
        let mut paths = 0usize;
        let mut sources: Vec<usize> = (0..nets.len())
            .filter(|&r| uf.find(r) == r && high[r] && !low[r])
            .collect();
        sources.sort_unstable();
        let driver = |r: usize| high[r] || low[r];

        let mut visited = vec![false; nets.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &start in &sources {
            visited[start] = true;
            let mut frame: Vec<(usize, usize)> = vec![(start, 0)];
            while let Some(&mut (node, ref mut next)) = frame.last_mut() {
                if *next >= edges[node].len() {
                    frame.pop();
                    visited[node] = false;
                    stack.pop();
                    continue;
                }
                let (dev_idx, target) = edges[node][*next];
                *next += 1;
                if low[target] && !high[target] {
                    // Complete path: stack devices plus this edge.
                    paths += 1;
                    assert!(paths <= MAX_LEAKAGE_PATHS, "leakage path explosion");
                    stack.push(dev_idx);
                    let min_vth_v = stack
                        .iter()
                        .map(|&d| pp.vth(devices[d].vth_class))
                        .fold(f64::INFINITY, f64::min);
                    let mut current = f64::INFINITY;
                    for &d in &*stack {
                        let dev = &devices[d];
                        let vto = match conduction[d] {
                            Conduction::Unknown => min_vth_v,
                            _ => pp.vth(dev.vth_class),
                        };
                        current = current.min(class_current(dev.geometry.aspect(), vto));
                    }
                    let derate = pp.stack_factor.powi(stack.len() as i32 - 1);
                    total += current * derate;
                    stack.pop();
                    continue;
                }
                if visited[target] || driver(target) {
                    continue;
                }
                visited[target] = true;
                stack.push(dev_idx);
                frame.push((target, 0));
            }
            visited[start] = false;
        }

        pp.vdd_v * total
    }
}

/// Static leakage power of `netlist` in the given state, watts. Convenience
/// wrapper over [`LeakageModel`]; callers pricing many states of one netlist
/// should build the model once instead.
pub fn state_leakage(netlist: &Netlist, values: &[LogicLevel], pp: &ProcessParams) -> f64 {
    LeakageModel::build(netlist).evaluate(values, pp)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Lower index wins so island representatives are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
