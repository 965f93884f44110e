//! Constructors for the benchmark circuits: a transmission-gate full adder,
//! ripple-carry adders, and three 4-bit BCD adder variants.
//!
//! All three variants share one topology: a binary ripple stage, a
//! carry-detect block deciding whether the binary sum exceeds nine, and a
//! correction stage that adds six when it does.
//!
//! * **conventional** — every device at the low threshold.
//! * **dual threshold** — devices on the longest combinational path keep the
//!   low threshold for speed; everything off that path gets the high
//!   threshold to cut leakage. The path is found by longest-chain search
//!   over the generated gate graph, so it is derived, not hand-listed.
//! * **gated** — the dual-threshold design split into two power clusters
//!   (ripple stage; carry-detect plus correction), each pulling down
//!   through a high-threshold sleep footer controlled by its own clock.
//!   Footers are lengthened and widened, and transmission gates widened,
//!   per a [`SizingPolicy`].
//!
//! Cells are emitted onto a flat namespace with dotted instance names
//! (`s1.fa2.xor.p1`), which keeps generated netlists diffable and lets
//! threshold assignment address any sub-gate by name prefix.

use crate::netlist::{
    ChannelGeometry, DeviceType, NetId, NetKind, Netlist, PortDirection, Transistor, VthClass,
};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Drawn channel width of every generated device before sizing, meters.
pub const BASE_WIDTH_M: f64 = 9.0e-8;
/// Drawn channel length of every generated device before sizing, meters.
pub const BASE_LENGTH_M: f64 = 4.5e-8;
/// Gate capacitance each generated device presents to the net driving it.
pub const GATE_LOAD_F: f64 = 5.0e-17;

fn base_geometry() -> ChannelGeometry {
    ChannelGeometry { width_m: BASE_WIDTH_M, length_m: BASE_LENGTH_M }
}

/// How thresholds are distributed over a generated circuit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VthPolicy {
    AllLow,
    AllHigh,
    /// Low threshold on the longest gate chain, high elsewhere.
    CriticalPathLow,
}

/// Threshold assignment: a policy plus per-instance overrides. Override
/// keys are dotted name prefixes; the longest matching prefix wins, so
/// `"s1.fa0"` retunes a whole adder cell and `"s1.fa0.xor"` one sub-gate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VthAssignment {
    pub policy: VthPolicy,
    pub overrides: BTreeMap<String, VthClass>,
}

impl VthAssignment {
    pub fn all_low() -> Self {
        VthAssignment { policy: VthPolicy::AllLow, overrides: BTreeMap::new() }
    }

    pub fn all_high() -> Self {
        VthAssignment { policy: VthPolicy::AllHigh, overrides: BTreeMap::new() }
    }

    pub fn critical_path_low() -> Self {
        VthAssignment { policy: VthPolicy::CriticalPathLow, overrides: BTreeMap::new() }
    }
}

impl Default for VthAssignment {
    fn default() -> Self {
        VthAssignment::all_low()
    }
}

/// Channel sizing applied to the gated variant: sleep footers trade drive
/// for leakage (longer and wider), transmission gates buy speed (wider).
/// Gate loads scale with the drawn area so the costs stay visible.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SizingPolicy {
    pub sleep_length_multiplier: f64,
    pub sleep_width_multiplier: f64,
    pub tg_width_multiplier: f64,
}

impl SizingPolicy {
    /// Leaves every device at its drawn geometry.
    pub fn neutral() -> Self {
        SizingPolicy {
            sleep_length_multiplier: 1.0,
            sleep_width_multiplier: 1.0,
            tg_width_multiplier: 1.0,
        }
    }
}

impl Default for SizingPolicy {
    fn default() -> Self {
        SizingPolicy {
            sleep_length_multiplier: 2.0,
            sleep_width_multiplier: 4.0,
            tg_width_multiplier: 1.5,
        }
    }
}

/// One emitted gate instance: its data inputs, its driven net, and the
/// devices realizing it. The generator's gate graph for path analysis.
struct SubGate {
    name: String,
    inputs: Vec<NetId>,
    output: NetId,
    devices: Vec<usize>,
}

/// Emits gates onto a growing netlist. `pdn_rail` is where pull-down
/// networks terminate; pointing it at a virtual rail while emitting a
/// cluster is how power gating is wired in.
struct Builder {
    n: Netlist,
    vdd: NetId,
    gnd: NetId,
    pdn_rail: NetId,
    subgates: Vec<SubGate>,
}

impl Builder {
    fn new() -> Self {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        Builder { n, vdd, gnd, pdn_rail: gnd, subgates: Vec::new() }
    }

    fn net(&mut self, name: &str, kind: NetKind) -> NetId {
        self.n.add_net(name, kind)
    }

    fn input(&mut self, name: &str) -> NetId {
        let id = self.n.add_net(name, NetKind::Input);
        self.n.add_port(id, PortDirection::Input);
        id
    }

    fn output(&mut self, name: &str) -> NetId {
        let id = self.n.add_net(name, NetKind::Output);
        self.n.add_port(id, PortDirection::Output);
        id
    }

    fn clock(&mut self, name: &str) -> NetId {
        let id = self.n.add_net(name, NetKind::Clock);
        self.n.add_port(id, PortDirection::Clock);
        id
    }

    fn dev(
        &mut self,
        name: String,
        device_type: DeviceType,
        gate: NetId,
        source: NetId,
        drain: NetId,
    ) -> usize {
        self.n.add_device(Transistor {
            name,
            device_type,
            vth_class: VthClass::Low,
            geometry: base_geometry(),
            gate,
            source,
            drain,
            is_sleep: false,
            load_cap_f: GATE_LOAD_F,
        });
        self.n.devices().len() - 1
    }

    fn record(&mut self, name: &str, inputs: &[NetId], output: NetId, devices: Vec<usize>) {
        self.subgates.push(SubGate {
            name: name.to_string(),
            inputs: inputs.to_vec(),
            output,
            devices,
        });
    }

    fn inv(&mut self, name: &str, a: NetId, y: NetId) {
        let p = self.dev(format!("{name}.p"), DeviceType::Pmos, a, self.vdd, y);
        let n = self.dev(format!("{name}.n"), DeviceType::Nmos, a, self.pdn_rail, y);
        self.record(name, &[a], y, vec![p, n]);
    }

    fn nand2(&mut self, name: &str, a: NetId, b: NetId, y: NetId) {
        let mid = self.net(&format!("{name}.m"), NetKind::Signal);
        let pa = self.dev(format!("{name}.pa"), DeviceType::Pmos, a, self.vdd, y);
        let pb = self.dev(format!("{name}.pb"), DeviceType::Pmos, b, self.vdd, y);
        let na = self.dev(format!("{name}.na"), DeviceType::Nmos, a, mid, y);
        let nb = self.dev(format!("{name}.nb"), DeviceType::Nmos, b, self.pdn_rail, mid);
        self.record(name, &[a, b], y, vec![pa, pb, na, nb]);
    }

    fn nor3(&mut self, name: &str, a: NetId, b: NetId, c: NetId, y: NetId) {
        let m1 = self.net(&format!("{name}.m1"), NetKind::Signal);
        let m2 = self.net(&format!("{name}.m2"), NetKind::Signal);
        let pa = self.dev(format!("{name}.pa"), DeviceType::Pmos, a, self.vdd, m1);
        let pb = self.dev(format!("{name}.pb"), DeviceType::Pmos, b, m1, m2);
        let pc = self.dev(format!("{name}.pc"), DeviceType::Pmos, c, m2, y);
        let na = self.dev(format!("{name}.na"), DeviceType::Nmos, a, self.pdn_rail, y);
        let nb = self.dev(format!("{name}.nb"), DeviceType::Nmos, b, self.pdn_rail, y);
        let nc = self.dev(format!("{name}.nc"), DeviceType::Nmos, c, self.pdn_rail, y);
        self.record(name, &[a, b, c], y, vec![pa, pb, pc, na, nb, nc]);
    }

    fn and2(&mut self, name: &str, a: NetId, b: NetId, y: NetId) {
        let w = self.net(&format!("{name}.w"), NetKind::Signal);
        self.nand2(&format!("{name}.nand"), a, b, w);
        self.inv(&format!("{name}.inv"), w, y);
    }

    fn or3(&mut self, name: &str, a: NetId, b: NetId, c: NetId, y: NetId) {
        let w = self.net(&format!("{name}.w"), NetKind::Signal);
        self.nor3(&format!("{name}.nor"), a, b, c, w);
        self.inv(&format!("{name}.inv"), w, y);
    }

    fn buffer(&mut self, name: &str, a: NetId, y: NetId) {
        let w = self.net(&format!("{name}.w"), NetKind::Signal);
        self.inv(&format!("{name}.i1"), a, w);
        self.inv(&format!("{name}.i2"), w, y);
    }

    /// Four-transistor pass XOR: `h = a ^ b`. The PMOS pair passes the
    /// opposite input when the inputs differ; the NMOS stack pulls low when
    /// they are both high, and the pass paths pull low when both are low.
    fn xor4(&mut self, name: &str, a: NetId, b: NetId, h: NetId) {
        let xm = self.net(&format!("{name}.xm"), NetKind::Signal);
        let p1 = self.dev(format!("{name}.p1"), DeviceType::Pmos, a, b, h);
        let p2 = self.dev(format!("{name}.p2"), DeviceType::Pmos, b, a, h);
        let n1 = self.dev(format!("{name}.n1"), DeviceType::Nmos, a, xm, h);
        let n2 = self.dev(format!("{name}.n2"), DeviceType::Nmos, b, self.pdn_rail, xm);
        self.record(name, &[a, b], h, vec![p1, p2, n1, n2]);
    }

    /// Two transmission gates steering the sum: `h` selects `cinb`, its
    /// complement selects `cin`.
    fn summux(&mut self, name: &str, h: NetId, hb: NetId, cinb: NetId, cin: NetId, sum: NetId) {
        let tn1 = self.dev(format!("{name}.tn1"), DeviceType::Nmos, h, cinb, sum);
        let tp1 = self.dev(format!("{name}.tp1"), DeviceType::Pmos, hb, cinb, sum);
        let tn2 = self.dev(format!("{name}.tn2"), DeviceType::Nmos, hb, cin, sum);
        let tp2 = self.dev(format!("{name}.tp2"), DeviceType::Pmos, h, cin, sum);
        self.record(name, &[h, hb, cinb, cin], sum, vec![tn1, tp1, tn2, tp2]);
    }

    /// Two transmission gates steering the carry: propagate (`cin`) when
    /// `h`, generate (`a`, which equals `b` then) otherwise.
    fn coutmux(&mut self, name: &str, h: NetId, hb: NetId, cin: NetId, a: NetId, cout: NetId) {
        let tn1 = self.dev(format!("{name}.tn1"), DeviceType::Nmos, h, cin, cout);
        let tp1 = self.dev(format!("{name}.tp1"), DeviceType::Pmos, hb, cin, cout);
        let tn2 = self.dev(format!("{name}.tn2"), DeviceType::Nmos, hb, a, cout);
        let tp2 = self.dev(format!("{name}.tp2"), DeviceType::Pmos, h, a, cout);
        self.record(name, &[h, hb, cin, a], cout, vec![tn1, tp1, tn2, tp2]);
    }

    /// Sixteen-transistor transmission-gate full adder.
    fn full_adder(&mut self, name: &str, a: NetId, b: NetId, cin: NetId, sum: NetId, cout: NetId) {
        let h = self.net(&format!("{name}.h"), NetKind::Signal);
        let hb = self.net(&format!("{name}.hb"), NetKind::Signal);
        let cinb = self.net(&format!("{name}.cinb"), NetKind::Signal);
        self.xor4(&format!("{name}.xor"), a, b, h);
        self.inv(&format!("{name}.hbinv"), h, hb);
        self.inv(&format!("{name}.cinbinv"), cin, cinb);
        self.summux(&format!("{name}.summux"), h, hb, cinb, cin, sum);
        self.coutmux(&format!("{name}.coutmux"), h, hb, cin, a, cout);
    }

    /// Four-bit ripple-carry adder from full-adder cells.
    fn rca4(
        &mut self,
        name: &str,
        a: [NetId; 4],
        b: [NetId; 4],
        cin: NetId,
        sum: [NetId; 4],
        cout: NetId,
    ) {
        let mut carry = cin;
        for k in 0..4 {
            let next = if k == 3 {
                cout
            } else {
                self.net(&format!("{name}.c{}", k + 1), NetKind::Signal)
            };
            self.full_adder(&format!("{name}.fa{k}"), a[k], b[k], carry, sum[k], next);
            carry = next;
        }
    }

    /// Adds a power-gating footer between `virtual_gnd` and ground,
    /// controlled by `clk`. High threshold, marked as a sleep device.
    fn footer(&mut self, name: &str, clk: NetId, virtual_gnd: NetId) {
        let idx = self.dev(name.to_string(), DeviceType::Nmos, clk, self.gnd, virtual_gnd);
        let dev = &mut self.n.devices_mut()[idx];
        dev.vth_class = VthClass::High;
        dev.is_sleep = true;
    }

    /// Resolves every device's threshold class from the assignment.
    fn apply_vth(&mut self, assignment: &VthAssignment) {
        let critical = match assignment.policy {
            VthPolicy::CriticalPathLow => Some(critical_chain(&self.subgates)),
            _ => None,
        };
        for sg in &self.subgates {
            let class = class_for(&sg.name, assignment, critical.as_ref());
            for &d in &sg.devices {
                self.n.devices_mut()[d].vth_class = class;
            }
        }
    }
}

/// Longest gate chain by stage count, as a set of sub-gate names. Ties are
/// broken toward the lexicographically smaller name so the result is
/// reproducible.
fn critical_chain(subgates: &[SubGate]) -> BTreeSet<String> {
    let mut producer: HashMap<NetId, usize> = HashMap::new();
    for (i, sg) in subgates.iter().enumerate() {
        let prev = producer.insert(sg.output, i);
        debug_assert!(prev.is_none(), "one driver per net in generated circuits");
    }
    // Stage depth per sub-gate; generation order is feed-forward but the
    // memoized walk does not rely on it.
    let mut depth: Vec<Option<u32>> = vec![None; subgates.len()];
    fn depth_of(
        i: usize,
        subgates: &[SubGate],
        producer: &HashMap<NetId, usize>,
        depth: &mut Vec<Option<u32>>,
        visiting: &mut Vec<bool>,
    ) -> u32 {
        if let Some(d) = depth[i] {
            return d;
        }
        assert!(!visiting[i], "combinational loop through {}", subgates[i].name);
        visiting[i] = true;
        let mut best = 0;
        for input in &subgates[i].inputs {
            if let Some(&j) = producer.get(input) {
                best = best.max(depth_of(j, subgates, producer, depth, visiting));
            }
        }
        visiting[i] = false;
        depth[i] = Some(best + 1);
        best + 1
    }
    let mut visiting = vec![false; subgates.len()];
    for i in 0..subgates.len() {
        depth_of(i, subgates, &producer, &mut depth, &mut visiting);
    }

    let deeper = |a: usize, b: usize| -> usize {
        match depth[a].cmp(&depth[b]) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if subgates[a].name <= subgates[b].name {
                    a
                } else {
                    b
                }
            }
        }
    };
    let Some(sink) = (0..subgates.len()).reduce(deeper) else {
        return BTreeSet::new();
    };

    let mut chain = BTreeSet::new();
    let mut cur = sink;
    loop {
        chain.insert(subgates[cur].name.clone());
        let pred = subgates[cur]
            .inputs
            .iter()
            .filter_map(|input| producer.get(input).copied())
            .reduce(deeper);
        match pred {
            Some(p) => cur = p,
            None => break,
        }
    }
    chain
}

fn class_for(
    name: &str,
    assignment: &VthAssignment,
    critical: Option<&BTreeSet<String>>,
) -> VthClass {
    let mut best: Option<(&str, VthClass)> = None;
    for (key, &class) in &assignment.overrides {
        let matches = name == key || name.starts_with(&format!("{key}."));
        if matches && best.map_or(true, |(k, _)| key.len() > k.len()) {
            best = Some((key, class));
        }
    }
    if let Some((_, class)) = best {
        return class;
    }
    match assignment.policy {
        VthPolicy::AllLow => VthClass::Low,
        VthPolicy::AllHigh => VthClass::High,
        VthPolicy::CriticalPathLow => {
            if critical.map_or(false, |c| c.contains(name)) {
                VthClass::Low
            } else {
                VthClass::High
            }
        }
    }
}

/// Device indices that form transmission gates: an NMOS and a PMOS sharing
/// the same unordered pair of channel nets. Detection is structural, so
/// parsed and generated netlists answer alike.
pub fn transmission_gate_devices(netlist: &Netlist) -> Vec<usize> {
    let mut groups: BTreeMap<(NetId, NetId), Vec<usize>> = BTreeMap::new();
    for (i, dev) in netlist.devices().iter().enumerate() {
        let key = if dev.source <= dev.drain {
            (dev.source, dev.drain)
        } else {
            (dev.drain, dev.source)
        };
        groups.entry(key).or_default().push(i);
    }
    let mut out = Vec::new();
    for devices in groups.values() {
        let devs = netlist.devices();
        let has_n = devices.iter().any(|&i| devs[i].device_type == DeviceType::Nmos);
        let has_p = devices.iter().any(|&i| devs[i].device_type == DeviceType::Pmos);
        if has_n && has_p {
            out.extend_from_slice(devices);
        }
    }
    out.sort_unstable();
    out
}

/// Scales sleep footers and transmission gates per the policy. Gate loads
/// scale with drawn area so the extra capacitance the sized devices present
/// is accounted for.
pub fn apply_channel_sizing(netlist: &mut Netlist, sizing: &SizingPolicy) {
    let tg: BTreeSet<usize> = transmission_gate_devices(netlist).into_iter().collect();
    for (i, dev) in netlist.devices_mut().iter_mut().enumerate() {
        if dev.is_sleep {
            dev.geometry.width_m *= sizing.sleep_width_multiplier;
            dev.geometry.length_m *= sizing.sleep_length_multiplier;
            dev.load_cap_f *= sizing.sleep_width_multiplier * sizing.sleep_length_multiplier;
        } else if tg.contains(&i) {
            dev.geometry.width_m *= sizing.tg_width_multiplier;
            dev.load_cap_f *= sizing.tg_width_multiplier;
        }
    }
}

/// Well-known nets of a generated BCD adder, looked up by name.
pub struct BcdNets {
    pub a: [NetId; 4],
    pub b: [NetId; 4],
    pub cin: NetId,
    pub digit: [NetId; 4],
    pub carry: NetId,
    /// Binary-stage sums feeding carry-detect and the correction stage.
    pub z: [NetId; 4],
    /// Binary-stage carry out.
    pub k: NetId,
    pub clk1: Option<NetId>,
    pub clk2: Option<NetId>,
    pub vgnd1: Option<NetId>,
    pub vgnd2: Option<NetId>,
}

impl BcdNets {
    /// Resolves the standard net names; errors name the first one missing.
    pub fn find(netlist: &Netlist) -> Result<Self, String> {
        let get = |name: &str| {
            netlist.find_net(name).ok_or_else(|| format!("net {name:?} not found"))
        };
        let quad = |prefix: &str| -> Result<[NetId; 4], String> {
            Ok([
                get(&format!("{prefix}0"))?,
                get(&format!("{prefix}1"))?,
                get(&format!("{prefix}2"))?,
                get(&format!("{prefix}3"))?,
            ])
        };
        Ok(BcdNets {
            a: quad("a")?,
            b: quad("b")?,
            cin: get("cin")?,
            digit: quad("d")?,
            carry: get("carry")?,
            z: quad("z")?,
            k: get("k")?,
            clk1: netlist.find_net("clk1"),
            clk2: netlist.find_net("clk2"),
            vgnd1: netlist.find_net("vgnd1"),
            vgnd2: netlist.find_net("vgnd2"),
        })
    }

    /// The nine operand ports: both BCD digits plus the incoming carry.
    pub fn operand_ports(&self) -> impl Iterator<Item = NetId> + '_ {
        self.a.iter().chain(self.b.iter()).copied().chain(std::iter::once(self.cin))
    }
}

fn bcd_body(gated: bool) -> Builder {
    let mut bb = Builder::new();
    let a = [bb.input("a0"), bb.input("a1"), bb.input("a2"), bb.input("a3")];
    let b = [bb.input("b0"), bb.input("b1"), bb.input("b2"), bb.input("b3")];
    let cin = bb.input("cin");
    let d = [bb.output("d0"), bb.output("d1"), bb.output("d2"), bb.output("d3")];
    let carry = bb.output("carry");
    let z = [
        bb.net("z0", NetKind::Signal),
        bb.net("z1", NetKind::Signal),
        bb.net("z2", NetKind::Signal),
        bb.net("z3", NetKind::Signal),
    ];
    let k = bb.net("k", NetKind::Signal);

    let clocks = if gated {
        let clk1 = bb.clock("clk1");
        let clk2 = bb.clock("clk2");
        let vgnd1 = bb.net("vgnd1", NetKind::VirtualGnd);
        let vgnd2 = bb.net("vgnd2", NetKind::VirtualGnd);
        bb.n.set_cluster(vgnd1, "stage1");
        bb.n.set_cluster(vgnd2, "stage2");
        Some((clk1, clk2, vgnd1, vgnd2))
    } else {
        None
    };

    // Binary ripple stage.
    if let Some((_, _, vgnd1, _)) = clocks {
        bb.pdn_rail = vgnd1;
    }
    bb.rca4("s1", a, b, cin, z, k);
    if let Some((clk1, _, vgnd1, _)) = clocks {
        bb.footer("sleep1", clk1, vgnd1);
    }

    // Carry detect: the binary sum exceeds nine when the stage overflowed
    // or its high bit pairs with either middle bit.
    if let Some((_, _, _, vgnd2)) = clocks {
        bb.pdn_rail = vgnd2;
    }
    let t1 = bb.net("cd.t1", NetKind::Signal);
    let t2 = bb.net("cd.t2", NetKind::Signal);
    bb.and2("cd.anda", z[3], z[2], t1);
    bb.and2("cd.andb", z[3], z[1], t2);
    bb.or3("cd.or", k, t1, t2, carry);

    // Correction stage: add six (binary 0110) when carry-detect fired. The
    // buffers isolate the decision net from the adder's pass inputs.
    let addc1 = bb.net("addc1", NetKind::Signal);
    let addc2 = bb.net("addc2", NetKind::Signal);
    bb.buffer("cb1", carry, addc1);
    bb.buffer("cb2", carry, addc2);
    let s2cout = bb.net("s2.cout", NetKind::Signal);
    let gnd = bb.gnd;
    bb.rca4("s2", z, [gnd, addc1, addc2, gnd], gnd, d, s2cout);
    if let Some((_, clk2, _, vgnd2)) = clocks {
        bb.footer("sleep2", clk2, vgnd2);
    }
    bb.pdn_rail = bb.gnd;
    bb
}

/// Conventional 4-bit BCD adder: two ripple stages with carry detect,
/// every device at the low threshold.
pub fn bcd_conventional() -> Netlist {
    let mut bb = bcd_body(false);
    bb.apply_vth(&VthAssignment::all_low());
    bb.n
}

/// Dual-threshold BCD adder: same topology, thresholds per `assignment`
/// (typically [`VthAssignment::critical_path_low`]).
pub fn bcd_dvt(assignment: &VthAssignment) -> Netlist {
    let mut bb = bcd_body(false);
    bb.apply_vth(assignment);
    bb.n
}

/// Power-gated BCD adder: the dual-threshold design in two footed clusters
/// with per-cluster clocks, then sized per the policy.
pub fn bcd_gated(assignment: &VthAssignment, sizing: &SizingPolicy) -> Netlist {
    let mut bb = bcd_body(true);
    bb.apply_vth(assignment);
    let mut n = bb.n;
    apply_channel_sizing(&mut n, sizing);
    n
}

fn cell_with_ports(build: impl FnOnce(&mut Builder)) -> Netlist {
    let mut bb = Builder::new();
    build(&mut bb);
    bb.apply_vth(&VthAssignment::all_low());
    bb.n
}

/// Standalone two-transistor inverter cell (ports `a`, `y`).
pub fn inverter_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let y = bb.output("y");
        bb.inv("inv", a, y);
    })
}

/// Standalone two-input NAND cell (ports `a`, `b`, `y`).
pub fn nand2_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let b = bb.input("b");
        let y = bb.output("y");
        bb.nand2("nand", a, b, y);
    })
}

/// Standalone three-input NOR cell (ports `a`, `b`, `c`, `y`).
pub fn nor3_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let b = bb.input("b");
        let c = bb.input("c");
        let y = bb.output("y");
        bb.nor3("nor", a, b, c, y);
    })
}

/// Standalone AND2 as NAND plus inverter (ports `a`, `b`, `y`).
pub fn and2_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let b = bb.input("b");
        let y = bb.output("y");
        bb.and2("and", a, b, y);
    })
}

/// Standalone OR3 as NOR plus inverter (ports `a`, `b`, `c`, `y`).
pub fn or3_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let b = bb.input("b");
        let c = bb.input("c");
        let y = bb.output("y");
        bb.or3("or", a, b, c, y);
    })
}

/// Standalone two-inverter buffer (ports `a`, `y`).
pub fn buffer_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let y = bb.output("y");
        bb.buffer("buf", a, y);
    })
}

/// Standalone sixteen-transistor full adder (ports `a`, `b`, `cin`, `sum`,
/// `cout`).
pub fn full_adder_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = bb.input("a");
        let b = bb.input("b");
        let cin = bb.input("cin");
        let sum = bb.output("sum");
        let cout = bb.output("cout");
        bb.full_adder("fa", a, b, cin, sum, cout);
    })
}

/// Standalone four-bit ripple-carry adder (ports `a0..a3`, `b0..b3`,
/// `cin`, `s0..s3`, `cout`).
pub fn rca4_cell() -> Netlist {
    cell_with_ports(|bb| {
        let a = [bb.input("a0"), bb.input("a1"), bb.input("a2"), bb.input("a3")];
        let b = [bb.input("b0"), bb.input("b1"), bb.input("b2"), bb.input("b3")];
        let cin = bb.input("cin");
        let s = [bb.output("s0"), bb.output("s1"), bb.output("s2"), bb.output("s3")];
        let cout = bb.output("cout");
        bb.rca4("rca", a, b, cin, s, cout);
    })
}
