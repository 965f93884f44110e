//! Event-driven switch-level simulation with four-valued logic.
//!
//! Nets carry one of four levels: driven low, driven high, unknown, or
//! released. Transistors are voltage-controlled switches: an NMOS conducts
//! when its gate is high, a PMOS when its gate is low, and an unknown gate
//! leaves the channel in an uncertain state that the solver must respect.
//!
//! The netlist is partitioned once into channel-connected regions bounded
//! by pinned nets (supply rails plus input and clock ports). When a net
//! transitions, every region it can influence — its own, those it gates,
//! those it borders — is re-solved against the current boundary values:
//!
//! * a net with a conducting path to boundaries of exactly one level takes
//!   that level, provided no uncertain path could supply a different one;
//! * conflicting definite drivers, or an uncertain path that could disagree
//!   with the only other outcome, yield unknown;
//! * a net with no conducting or uncertain path to any boundary keeps its
//!   previous value (dynamic-node retention);
//! * a virtual rail whose sleep device is conducting stands in for the rail
//!   it gates: it sources that level, and momentary sneak paths carrying any
//!   other level terminate against the tie instead of disturbing it — the
//!   sleep device is a deliberately strong pull, wide enough that series
//!   pass-channel chains cannot move the rail.
//!
//! Each resulting change is scheduled after an alpha-power stage delay whose
//! threshold voltage is the minimax over conducting driver paths (the best
//! path's worst device) and whose drive strength comes from the aspect ratio
//! of the path device adjacent to the switching net. A superseded pending
//! change is cancelled rather than double-applied, so glitches shorter than
//! a stage delay are absorbed. Every applied transition is logged with the
//! capacitance it moved, and a sleep transistor's gate rising additionally
//! logs the configured wake-up charge on its virtual rail.

use crate::netlist::{DeviceType, NetId, NetKind, Netlist, VthClass};
use crate::power::{gate_delay, ProcessParams, SwitchingEvent, UnionFind};
use crate::power::ParamError;
use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

/// Four-valued signal level.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LogicLevel {
    /// Driven to ground.
    L0,
    /// Driven to the supply.
    L1,
    /// Unknown or conflicting.
    LX,
    /// Released / high impedance.
    LZ,
}

impl LogicLevel {
    pub fn is_definite(self) -> bool {
        matches!(self, LogicLevel::L0 | LogicLevel::L1)
    }

    pub fn to_char(self) -> char {
        match self {
            LogicLevel::L0 => '0',
            LogicLevel::L1 => '1',
            LogicLevel::LX => 'x',
            LogicLevel::LZ => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            '0' => Some(LogicLevel::L0),
            '1' => Some(LogicLevel::L1),
            'x' => Some(LogicLevel::LX),
            'z' => Some(LogicLevel::LZ),
            _ => None,
        }
    }
}

impl From<bool> for LogicLevel {
    fn from(b: bool) -> Self {
        if b { LogicLevel::L1 } else { LogicLevel::L0 }
    }
}

impl std::fmt::Display for LogicLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(thiserror::Error, Clone, PartialEq, Debug)]
pub enum SimError {
    #[error("simulation needs both supply rails in the netlist")]
    MissingRails,
    #[error("invalid parameters: {0}")]
    BadParams(#[from] ParamError),
    #[error("net {0:?} is not an input or clock port and cannot be driven")]
    NotDrivable(String),
    #[error("stimulus at {at_s} s is earlier than current time {now_s} s")]
    StimulusInPast { at_s: f64, now_s: f64 },
    #[error("event limit {limit} exceeded; the circuit may be oscillating")]
    EventLimit { limit: u64 },
}

/// One applied transition, as returned by [`SimState::settle`].
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Event {
    /// Position in the run's global applied-transition sequence.
    pub ordinal: u64,
    pub time_s: f64,
    pub net: NetId,
    pub value: LogicLevel,
    /// Ordinal of the transition whose region resolution scheduled this one;
    /// `None` for external stimuli.
    pub cause: Option<u64>,
    /// Threshold class the stage delay was priced at (internal events only).
    pub stage_vth: Option<VthClass>,
    /// Aspect ratio of the driving device adjacent to the net.
    pub stage_aspect: Option<f64>,
}

/// Latest transition time on any of `outputs` at or after `t_start_s`,
/// relative to `t_start_s`. `None` if no output moved.
pub fn measure_delay(events: &[Event], outputs: &[NetId], t_start_s: f64) -> Option<f64> {
    events
        .iter()
        .filter(|e| e.time_s >= t_start_s && outputs.contains(&e.net))
        .map(|e| e.time_s - t_start_s)
        .fold(None, |acc, t| Some(acc.map_or(t, |m: f64| m.max(t))))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum EntryKind {
    /// Externally applied; several may coexist per net.
    Stimulus,
    /// Region-resolution result; at most one live entry per net.
    Internal,
}

#[derive(Clone, Copy, Debug)]
struct QueueEntry {
    time_s: f64,
    seq: u64,
    net: NetId,
    value: LogicLevel,
    kind: EntryKind,
    cause: Option<u64>,
    stage_vth: Option<VthClass>,
    stage_aspect: Option<f64>,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // seq is unique, so this is a total order and pops are deterministic.
        self.time_s.total_cmp(&other.time_s).then_with(|| self.seq.cmp(&other.seq))
    }
}

/// In-flight internal transition for one net. The delivery time is kept so
/// a retargeted verdict can reuse it: the net has been in transit since its
/// first cause, and re-evaluation only refines where it lands.
#[derive(Clone, Copy, Debug)]
struct Pending {
    seq: u64,
    time_s: f64,
    value: LogicLevel,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Conduction {
    On,
    Off,
    Unknown,
}

fn conduction(device_type: DeviceType, gate: LogicLevel) -> Conduction {
    match (device_type, gate) {
        (DeviceType::Nmos, LogicLevel::L1) | (DeviceType::Pmos, LogicLevel::L0) => Conduction::On,
        (DeviceType::Nmos, LogicLevel::L0) | (DeviceType::Pmos, LogicLevel::L1) => Conduction::Off,
        _ => Conduction::Unknown,
    }
}

/// One end of a device channel, region-local.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum End {
    Internal(usize),
    Boundary(usize),
}

/// A channel-connected region: the unit of re-solving. Interior nets are
/// unpinned; boundary nets are the pinned drivers it sees.
struct Region {
    /// Interior nets, sorted by id.
    nets: Vec<NetId>,
    /// Pinned neighbor nets, sorted by id.
    boundary: Vec<NetId>,
    /// Global indices of member devices, sorted.
    devices: Vec<usize>,
    /// Channel ends per member device, aligned with `devices`.
    ends: Vec<(End, End)>,
    /// Adjacency per interior net: (member device index, other end).
    adj: Vec<Vec<(usize, End)>>,
    /// Interior nets that are virtual rails, with the hard-rail level each
    /// one stands in for: (local index, polarity).
    virtual_rails: Vec<(usize, LogicLevel)>,
}

/// Virtual rails currently tied to their hard rail through an ON sleep
/// device, mapped to the level they source. While tied, the rail behaves as
/// the rail it gates: the sleep device is a deliberately strong restoring
/// pull, so momentary sneak paths arriving through series pass channels
/// cannot move the rail, and flows of any other level terminate there
/// instead of crossing. With the sleep device off the entry is `None` and
/// the rail is an ordinary dynamic net again.
fn rail_anchors(
    region: &Region,
    cond: &[Conduction],
    bvals: &[LogicLevel],
) -> Vec<Option<LogicLevel>> {
    let mut anchored = vec![None; region.nets.len()];
    for &(li, pol) in &region.virtual_rails {
        let tied = region.adj[li].iter().any(|&(di, other)| {
            cond[di] == Conduction::On
                && matches!(other, End::Boundary(bi) if bvals[bi] == pol)
        });
        if tied {
            anchored[li] = Some(pol);
        }
    }
    anchored
}

impl Region {
    fn local_net(&self, net: NetId) -> Option<usize> {
        self.nets.binary_search(&net).ok()
    }

    fn local_boundary(&self, net: NetId) -> Option<usize> {
        self.boundary.binary_search(&net).ok()
    }
}

const DEFAULT_EVENT_LIMIT: u64 = 1_000_000;
const DEFAULT_WAKE_CAP_F: f64 = 2.0e-15;
/// Step budget for one realizable-path enumeration before falling back to
/// plain reachability.
const POSSIBLE_WALK_STEPS: u64 = 500_000;

/// Level requirement the current path places on one net. `depended` marks
/// nets whose value the path's conduction rests on — gate nets of traversed
/// devices, plus anything that feeds such a net through a live inverter.
/// Un-depended literals are consequences only: levels the completion forces
/// but that no traversed channel is conditioned on.
#[derive(Clone, Copy, Debug)]
struct Lit {
    level: LogicLevel,
    depended: bool,
}

/// Undo record for literals added or strengthened along one path step.
#[derive(Clone, Copy, Debug)]
enum LitUndo {
    Inserted(NetId),
    Flagged(NetId),
}

/// Depth-first enumeration of realizable drive paths through a region.
/// `literals` holds the level requirements the current path has accumulated;
/// paths that would need one net at two levels, or a path-energized net at
/// a level other than the delivered one, are pruned as unrealizable. A path
/// may not arrive at a net its conduction depends on (it could only sustain
/// a value already there, and holds are modeled by retention), nor deliver
/// anything but the forced level to a net a live inverter pins.
struct PossibleWalk<'w> {
    region: &'w Region,
    cond: &'w [Conduction],
    /// Gate net and device type, aligned with `region.devices`.
    gates: Vec<(NetId, DeviceType)>,
    /// Value the path carries from its boundary source; `None` when the
    /// source class is unknown, which disables value-consistency pruning.
    deliver: Option<LogicLevel>,
    values: &'w [LogicLevel],
    inv_pair: &'w [Option<InvDrive>],
    inv_outs: &'w [Vec<NetId>],
    /// Per interior net: the level an anchored virtual rail sources, if any.
    anchored: &'w [Option<LogicLevel>],
    reached: Vec<bool>,
    on_path: Vec<bool>,
    literals: HashMap<NetId, Lit>,
    steps: u64,
    capped: bool,
}

impl PossibleWalk<'_> {
    /// True when the inverter's rails hold their working levels, so its
    /// output is actively tied to the complement of its input. A sleeping
    /// cluster's floating rail breaks the tie, and outputs behind it hold
    /// charge that no longer tracks the input.
    fn inverter_live(&self, d: &InvDrive) -> bool {
        self.values[d.up.index()] == LogicLevel::L1
            && self.values[d.down.index()] == LogicLevel::L0
    }

    /// Records that the current path needs `net` at `level`, together with
    /// every level that follows through live inverters: an inverter output
    /// and its input cannot sit at the same level. Dependence flows from a
    /// depended-on output back to the input holding it there, never forward
    /// onto a forced output. Changes are appended to `undo`; returns false
    /// on contradiction, leaving the partial changes for the caller to
    /// unwind.
    fn pin(&mut self, net: NetId, level: LogicLevel, undo: &mut Vec<LitUndo>) -> bool {
        let mut work = vec![(net, level, true)];
        while let Some((g, v, dep)) = work.pop() {
            let flipped = match v {
                LogicLevel::L0 => LogicLevel::L1,
                _ => LogicLevel::L0,
            };
            match self.literals.get(&g).copied() {
                Some(l) => {
                    if l.level != v {
                        return false;
                    }
                    if dep && !l.depended {
                        self.literals.insert(g, Lit { level: v, depended: true });
                        undo.push(LitUndo::Flagged(g));
                        if let Some(d) = self.inv_pair[g.index()] {
                            if self.inverter_live(&d) {
                                work.push((d.input, flipped, true));
                            }
                        }
                    }
                }
                None => {
                    if let (Some(dv), Some(gi)) = (self.deliver, self.region.local_net(g)) {
                        if self.on_path[gi] && dv != v {
                            return false;
                        }
                    }
                    self.literals.insert(g, Lit { level: v, depended: dep });
                    undo.push(LitUndo::Inserted(g));
                    if let Some(d) = self.inv_pair[g.index()] {
                        if self.inverter_live(&d) {
                            work.push((d.input, flipped, dep));
                        }
                    }
                    for &out in &self.inv_outs[g.index()] {
                        let d = self.inv_pair[out.index()].expect("listed output is paired");
                        if self.inverter_live(&d) {
                            work.push((out, flipped, false));
                        }
                    }
                }
            }
        }
        true
    }

    fn unwind(&mut self, undo: Vec<LitUndo>) {
        for op in undo.into_iter().rev() {
            match op {
                LitUndo::Inserted(g) => {
                    self.literals.remove(&g);
                }
                LitUndo::Flagged(g) => {
                    if let Some(l) = self.literals.get_mut(&g) {
                        l.depended = false;
                    }
                }
            }
        }
    }

    /// Tries to extend the current path into interior net `ni` through
    /// member device `di`, then explores onward.
    ///
    /// Every traversed device needs its gate at the conducting level, so it
    /// pins that level as a path requirement. For a conducting device the
    /// pin matters only if the path could later energize the gate net to
    /// the opposite level — possible only for gates interior to this
    /// region, so others are skipped, which also makes parallel conducting
    /// channels interchangeable.
    fn step(&mut self, di: usize, ni: usize) {
        if self.capped || self.on_path[ni] {
            return;
        }
        if self.steps == 0 {
            self.capped = true;
            return;
        }
        self.steps -= 1;

        if self.cond[di] == Conduction::Off {
            return;
        }
        // An anchored virtual rail only ever carries its own polarity;
        // completions delivering anything else terminate against its tie.
        if let Some(p) = self.anchored[ni] {
            if self.deliver != Some(p) {
                return;
            }
        }
        let (gate, device_type) = self.gates[di];
        let need = match device_type {
            DeviceType::Nmos => LogicLevel::L1,
            DeviceType::Pmos => LogicLevel::L0,
        };
        let track_gate =
            self.cond[di] == Conduction::Unknown || self.region.local_net(gate).is_some();
        let mut pinned_here = Vec::new();
        if track_gate && !self.pin(gate, need, &mut pinned_here) {
            self.unwind(pinned_here);
            return;
        }

        // A path may not arrive at a net its own conduction depends on: it
        // could only sustain a value already there, and sustained values are
        // modeled by retention. A net a live inverter forces can be reached,
        // but only carrying the forced level — the restoring driver beats
        // anything delivered through pass channels.
        let join_ok = match self.literals.get(&self.region.nets[ni]) {
            None => true,
            Some(l) => !l.depended && self.deliver == Some(l.level),
        };
        if join_ok {
            self.reached[ni] = true;
            self.on_path[ni] = true;
            let region = self.region;
            // Conducting channels with untracked gates are interchangeable
            // when parallel; visit one per neighbor.
            let mut on_taken: Vec<usize> = Vec::new();
            for &(dj, other) in &region.adj[ni] {
                let End::Internal(ti) = other else { continue };
                let plain = self.cond[dj] == Conduction::On
                    && self.region.local_net(self.gates[dj].0).is_none();
                if plain {
                    if on_taken.contains(&ti) {
                        continue;
                    }
                    on_taken.push(ti);
                }
                self.step(dj, ti);
            }
            self.on_path[ni] = false;
        }
        self.unwind(pinned_here);
    }
}

/// Simulation state over a borrowed netlist.
pub struct SimState<'n> {
    netlist: &'n Netlist,
    params: ProcessParams,
    values: Vec<LogicLevel>,
    now_s: f64,
    queue: BinaryHeap<Reverse<QueueEntry>>,
    next_seq: u64,
    /// Per net: the single live internal entry, if any.
    live_internal: Vec<Option<Pending>>,
    next_ordinal: u64,
    event_limit: u64,
    wake_cap_f: f64,
    switch_log: Vec<SwitchingEvent>,
    load_cap: Vec<f64>,
    regions: Vec<Region>,
    /// Regions to re-solve when a given net transitions.
    affected: Vec<Vec<usize>>,
    /// Sleep devices as (gate net, virtual rail net): a rising gate logs the
    /// wake-up charge on the rail.
    sleep_watch: Vec<(NetId, NetId)>,
    /// Per net: the inverter structure that exclusively drives it, if any.
    inv_pair: Vec<Option<InvDrive>>,
    /// Per net: the inverter-driven nets whose input it is.
    inv_outs: Vec<Vec<NetId>>,
}

/// A net whose only channel connections are one PMOS and one NMOS sharing a
/// gate: a restoring inverter output. While `up` is high and `down` is low
/// the net's settled level is the complement of `input`, which lets path
/// search rule out assignments that would need both levels at once.
#[derive(Clone, Copy, Debug)]
struct InvDrive {
    input: NetId,
    up: NetId,
    down: NetId,
}

impl<'n> SimState<'n> {
    /// Builds simulation state: both rails must exist and the parameters
    /// must pass [`ProcessParams::check`]. All nets start unknown except the
    /// rails.
    pub fn new(netlist: &'n Netlist, params: &ProcessParams) -> Result<Self, SimError> {
        let (Some(vdd), Some(gnd)) = (netlist.rail_vdd(), netlist.rail_gnd()) else {
            return Err(SimError::MissingRails);
        };
        params.check()?;

        let n = netlist.nets().len();
        let mut pinned = vec![false; n];
        for (idx, net) in netlist.nets().iter().enumerate() {
            if net.kind.is_rail() {
                pinned[idx] = true;
            }
        }
        for &p in netlist.input_ports().iter().chain(netlist.clock_ports()) {
            pinned[p.index()] = true;
        }

        let mut values = vec![LogicLevel::LX; n];
        values[vdd.index()] = LogicLevel::L1;
        values[gnd.index()] = LogicLevel::L0;

        let load_cap: Vec<f64> = (0..n)
            .map(|i| netlist.load_capacitance(NetId(i as u32), params.wire_cap_f))
            .collect();

        let regions = build_regions(netlist, &pinned);
        let mut region_of = vec![None; n];
        for (r, region) in regions.iter().enumerate() {
            for net in &region.nets {
                region_of[net.index()] = Some(r);
            }
        }
        let mut affected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(r) = region_of[i] {
                affected[i].push(r);
            }
        }
        for (r, region) in regions.iter().enumerate() {
            for b in &region.boundary {
                affected[b.index()].push(r);
            }
        }
        for dev in netlist.devices() {
            for t in [dev.source, dev.drain] {
                if let Some(r) = region_of[t.index()] {
                    affected[dev.gate.index()].push(r);
                }
            }
        }
        for list in &mut affected {
            list.sort_unstable();
            list.dedup();
        }

        let mut chan: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, dev) in netlist.devices().iter().enumerate() {
            chan[dev.source.index()].push(i);
            chan[dev.drain.index()].push(i);
        }
        let mut inv_pair: Vec<Option<InvDrive>> = vec![None; n];
        let mut inv_outs: Vec<Vec<NetId>> = vec![Vec::new(); n];
        for (i, members) in chan.iter().enumerate() {
            let out = NetId(i as u32);
            if pinned[i] || members.len() != 2 || members[0] == members[1] {
                continue;
            }
            let a = &netlist.devices()[members[0]];
            let b = &netlist.devices()[members[1]];
            let (p, nm) = match (a.device_type, b.device_type) {
                (DeviceType::Pmos, DeviceType::Nmos) => (a, b),
                (DeviceType::Nmos, DeviceType::Pmos) => (b, a),
                _ => continue,
            };
            if p.gate != nm.gate || p.gate == out {
                continue;
            }
            let other = |d: &crate::netlist::Transistor| if d.source == out { d.drain } else { d.source };
            inv_pair[i] = Some(InvDrive { input: p.gate, up: other(p), down: other(nm) });
            inv_outs[p.gate.index()].push(out);
        }

        let mut sleep_watch = Vec::new();
        for dev in netlist.devices() {
            if !dev.is_sleep {
                continue;
            }
            let rail = [dev.source, dev.drain]
                .into_iter()
                .find(|t| netlist.net(*t).kind.is_virtual_rail())
                .or_else(|| [dev.source, dev.drain].into_iter().find(|t| !pinned[t.index()]));
            if let Some(rail) = rail {
                sleep_watch.push((dev.gate, rail));
            }
        }

        Ok(SimState {
            netlist,
            params: params.clone(),
            values,
            now_s: 0.0,
            queue: BinaryHeap::new(),
            next_seq: 0,
            live_internal: vec![None; n],
            next_ordinal: 0,
            event_limit: DEFAULT_EVENT_LIMIT,
            wake_cap_f: DEFAULT_WAKE_CAP_F,
            switch_log: Vec::new(),
            load_cap,
            regions,
            affected,
            sleep_watch,
            inv_pair,
            inv_outs,
        })
    }

    pub fn now_s(&self) -> f64 {
        self.now_s
    }

    pub fn value(&self, net: NetId) -> LogicLevel {
        self.values[net.index()]
    }

    /// Current level of every net, indexed by net id.
    pub fn values(&self) -> &[LogicLevel] {
        &self.values
    }

    pub fn params(&self) -> &ProcessParams {
        &self.params
    }

    /// Output port levels in declaration order.
    pub fn read_outputs(&self) -> Vec<(NetId, LogicLevel)> {
        self.netlist.output_ports().iter().map(|&p| (p, self.value(p))).collect()
    }

    /// Every transition logged since construction, with the capacitance each
    /// one moved. Wake-up charges appear here too, against the virtual rail.
    pub fn switching_log(&self) -> &[SwitchingEvent] {
        &self.switch_log
    }

    /// Caps the number of events one `settle`/`advance_until` call may
    /// process before reporting a probable oscillation.
    pub fn set_event_limit(&mut self, limit: u64) {
        self.event_limit = limit;
    }

    /// Capacitance charged on a virtual rail each time its sleep device
    /// turns on.
    pub fn set_wake_capacitance(&mut self, cap_f: f64) {
        self.wake_cap_f = cap_f;
    }

    /// Queues level changes on input or clock ports. Times must not precede
    /// the current simulation time; nothing is applied until the queue is
    /// pumped.
    pub fn apply_inputs(&mut self, stimuli: &[(NetId, LogicLevel, f64)]) -> Result<(), SimError> {
        for &(net, _, at_s) in stimuli {
            let drivable = self.netlist.input_ports().contains(&net)
                || self.netlist.clock_ports().contains(&net);
            if !drivable {
                return Err(SimError::NotDrivable(self.netlist.net_name(net).to_string()));
            }
            if at_s < self.now_s {
                return Err(SimError::StimulusInPast { at_s, now_s: self.now_s });
            }
        }
        for &(net, value, at_s) in stimuli {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.queue.push(Reverse(QueueEntry {
                time_s: at_s,
                seq,
                net,
                value,
                kind: EntryKind::Stimulus,
                cause: None,
                stage_vth: None,
                stage_aspect: None,
            }));
        }
        Ok(())
    }

    /// Processes every queued event, in time order, until quiescence.
    /// Returns the applied transitions. An empty queue settles trivially.
    pub fn settle(&mut self) -> Result<Vec<Event>, SimError> {
        self.pump(None)
    }

    /// Processes events strictly earlier than `t_s`, then moves time forward
    /// to `t_s`. Later events stay queued.
    pub fn advance_until(&mut self, t_s: f64) -> Result<Vec<Event>, SimError> {
        let events = self.pump(Some(t_s))?;
        if t_s > self.now_s {
            self.now_s = t_s;
        }
        Ok(events)
    }

    fn is_stale(&self, e: &QueueEntry) -> bool {
        e.kind == EntryKind::Internal
            && self.live_internal[e.net.index()].map(|p| p.seq) != Some(e.seq)
    }

    fn pump(&mut self, t_limit_s: Option<f64>) -> Result<Vec<Event>, SimError> {
        let mut applied = Vec::new();
        let mut processed: u64 = 0;
        loop {
            let head = match self.queue.peek() {
                None => break,
                Some(Reverse(e)) => *e,
            };
            if self.is_stale(&head) {
                self.queue.pop();
                continue;
            }
            if let Some(t) = t_limit_s {
                if head.time_s >= t {
                    break;
                }
            }
            // Drain the whole simultaneous batch so regions touched by
            // several equal-time transitions are solved once, afterwards.
            let batch_time = head.time_s;
            let mut batch = Vec::new();
            while let Some(&Reverse(e)) = self.queue.peek() {
                if e.time_s.total_cmp(&batch_time) != Ordering::Equal {
                    break;
                }
                self.queue.pop();
                if !self.is_stale(&e) {
                    batch.push(e);
                }
            }
            processed += batch.len() as u64;
            if processed > self.event_limit {
                return Err(SimError::EventLimit { limit: self.event_limit });
            }
            debug_assert!(batch_time >= self.now_s);
            self.now_s = batch_time;

            let mut triggers: BTreeMap<usize, u64> = BTreeMap::new();
            for e in batch {
                if e.kind == EntryKind::Internal {
                    self.live_internal[e.net.index()] = None;
                }
                if e.value == self.values[e.net.index()] {
                    continue;
                }
                let was = self.values[e.net.index()];
                self.values[e.net.index()] = e.value;
                let ordinal = self.next_ordinal;
                self.next_ordinal += 1;
                applied.push(Event {
                    ordinal,
                    time_s: batch_time,
                    net: e.net,
                    value: e.value,
                    cause: e.cause,
                    stage_vth: e.stage_vth,
                    stage_aspect: e.stage_aspect,
                });
                self.switch_log.push(SwitchingEvent {
                    time_s: batch_time,
                    net: e.net,
                    c_load_f: self.load_cap[e.net.index()],
                });
                if e.value == LogicLevel::L1 && was != LogicLevel::L1 {
                    for &(gate, rail) in &self.sleep_watch {
                        if gate == e.net {
                            self.switch_log.push(SwitchingEvent {
                                time_s: batch_time,
                                net: rail,
                                c_load_f: self.wake_cap_f,
                            });
                        }
                    }
                }
                for &r in &self.affected[e.net.index()] {
                    let slot = triggers.entry(r).or_insert(ordinal);
                    *slot = (*slot).max(ordinal);
                }
            }
            for (&r, &cause) in &triggers {
                self.resolve_region(r, cause);
            }
        }
        Ok(applied)
    }

    /// Re-solves one region against current boundary values and schedules
    /// the changes it implies, superseding stale pending changes.
    fn resolve_region(&mut self, r: usize, cause: u64) {
        let region = &self.regions[r];
        let cond: Vec<Conduction> = region
            .devices
            .iter()
            .map(|&d| {
                let dev = &self.netlist.devices()[d];
                conduction(dev.device_type, self.values[dev.gate.index()])
            })
            .collect();
        let bvals: Vec<LogicLevel> =
            region.boundary.iter().map(|&b| self.values[b.index()]).collect();

        let is0 = |v: LogicLevel| v == LogicLevel::L0;
        let is1 = |v: LogicLevel| v == LogicLevel::L1;
        let isx = |v: LogicLevel| matches!(v, LogicLevel::LX | LogicLevel::LZ);
        let anchored = rail_anchors(region, &cond, &bvals);
        let d0 = self.region_reach(region, &cond, &bvals, true, &is0, None, &anchored);
        let d1 = self.region_reach(region, &cond, &bvals, true, &is1, None, &anchored);
        let dx = self.region_reach(region, &cond, &bvals, true, &isx, None, &anchored);
        let p0 = self.region_possible(region, &cond, &bvals, &is0, Some(LogicLevel::L0), &anchored);
        let p1 = self.region_possible(region, &cond, &bvals, &is1, Some(LogicLevel::L1), &anchored);
        let px = self.region_possible(region, &cond, &bvals, &isx, None, &anchored);

        // Charge sharing: interior nets joined by an ON channel pool their
        // stored charge, so an undriven net's level draws on every retained
        // value in its conducting cluster, not just its own. In a settled
        // state every such cluster already agrees (conduction came from the
        // same values), so retention is unaffected; disagreement marks a
        // node whose stored level was contradicted while it floated, and
        // that node must decay to X rather than hold the stale value.
        let mut charge = UnionFind::new(region.nets.len());
        for (di, &(a, b)) in region.ends.iter().enumerate() {
            if cond[di] == Conduction::On {
                if let (End::Internal(i), End::Internal(j)) = (a, b) {
                    charge.union(i, j);
                }
            }
        }
        let mut pool: HashMap<usize, LogicLevel> = HashMap::new();
        for (i, &net) in region.nets.iter().enumerate() {
            let v = self.values[net.index()];
            pool.entry(charge.find(i))
                .and_modify(|p| {
                    if *p != v {
                        *p = LogicLevel::LX;
                    }
                })
                .or_insert(v);
        }

        let mut plans: Vec<(NetId, LogicLevel, VthClass, f64, Option<f64>)> = Vec::new();
        let mut cancels: Vec<NetId> = Vec::new();
        for (i, &net) in region.nets.iter().enumerate() {
            let prev = self.values[net.index()];
            let next = if dx[i] || (d0[i] && d1[i]) {
                LogicLevel::LX
            } else if d0[i] {
                if p1[i] || px[i] { LogicLevel::LX } else { LogicLevel::L0 }
            } else if d1[i] {
                if p0[i] || px[i] { LogicLevel::LX } else { LogicLevel::L1 }
            } else {
                // No definite driver: the net either floats (holding the
                // pooled charge of its conducting cluster) or is driven
                // through some uncertain path. Only full agreement produces
                // a definite level.
                let mut candidates = vec![pool[&charge.find(i)]];
                if p0[i] {
                    candidates.push(LogicLevel::L0);
                }
                if p1[i] {
                    candidates.push(LogicLevel::L1);
                }
                if px[i] {
                    candidates.push(LogicLevel::LX);
                }
                if candidates.iter().all(|&c| c == candidates[0]) {
                    candidates[0]
                } else {
                    LogicLevel::LX
                }
            };
            if next != prev {
                match self.live_internal[net.index()] {
                    // The same transition is already in flight; its schedule
                    // stands, so repeated confirmation while neighbors settle
                    // cannot push the commit time out.
                    Some(p) if p.value == next => {}
                    pending => {
                        let (vth, aspect) =
                            self.stage_drive(region, &cond, &bvals, i, next, &anchored);
                        plans.push((net, next, vth, aspect, pending.map(|p| p.time_s)));
                    }
                }
            } else if self.live_internal[net.index()].is_some() {
                cancels.push(net);
            }
        }

        for net in cancels {
            self.live_internal[net.index()] = None;
        }
        for (net, value, vth, aspect, prior_time) in plans {
            let delay = gate_delay(
                self.load_cap[net.index()],
                self.params.vdd_v,
                self.params.k_drive * aspect,
                self.params.vth(vth),
                self.params.alpha,
            )
            .expect("parameters were checked at construction");
            // A retargeted transition keeps the earlier delivery time so a
            // net whose verdict keeps flipping still commits to something;
            // otherwise each re-evaluation would restart its clock and a
            // fast local exchange could defer it forever.
            let mut time_s = self.now_s + delay;
            if let Some(t) = prior_time {
                time_s = time_s.min(t);
            }
            let seq = self.next_seq;
            self.next_seq += 1;
            self.live_internal[net.index()] = Some(Pending { seq, time_s, value });
            self.queue.push(Reverse(QueueEntry {
                time_s,
                seq,
                net,
                value,
                kind: EntryKind::Internal,
                cause: Some(cause),
                stage_vth: Some(vth),
                stage_aspect: Some(aspect),
            }));
        }
    }

    #[doc(hidden)]
    pub fn debug_flags(&self, name: &str) -> Option<(LogicLevel, [bool; 6])> {
        let net = self.netlist.find_net(name)?;
        let (r, i) = self.regions.iter().enumerate().find_map(|(r, reg)| {
            reg.nets.iter().position(|&n| n == net).map(|i| (r, i))
        })?;
        let region = &self.regions[r];
        let cond: Vec<Conduction> = region
            .devices
            .iter()
            .map(|&d| {
                let dev = &self.netlist.devices()[d];
                conduction(dev.device_type, self.values[dev.gate.index()])
            })
            .collect();
        let bvals: Vec<LogicLevel> =
            region.boundary.iter().map(|&b| self.values[b.index()]).collect();
        let is0 = |v: LogicLevel| v == LogicLevel::L0;
        let is1 = |v: LogicLevel| v == LogicLevel::L1;
        let isx = |v: LogicLevel| matches!(v, LogicLevel::LX | LogicLevel::LZ);
        let anchored = rail_anchors(region, &cond, &bvals);
        Some((
            self.values[net.index()],
            [
                self.region_reach(region, &cond, &bvals, true, &is0, None, &anchored)[i],
                self.region_reach(region, &cond, &bvals, true, &is1, None, &anchored)[i],
                self.region_reach(region, &cond, &bvals, true, &isx, None, &anchored)[i],
                self.region_possible(region, &cond, &bvals, &is0, Some(LogicLevel::L0), &anchored)[i],
                self.region_possible(region, &cond, &bvals, &is1, Some(LogicLevel::L1), &anchored)[i],
                self.region_possible(region, &cond, &bvals, &isx, None, &anchored)[i],
            ],
        ))
    }

    /// Interior nets reachable from boundary nets matching `want`, through
    /// conducting channels (or conducting-or-uncertain when `definite` is
    /// false). Boundary nets terminate paths; `exclude` is never entered.
    fn region_reach(
        &self,
        region: &Region,
        cond: &[Conduction],
        bvals: &[LogicLevel],
        definite: bool,
        want: &dyn Fn(LogicLevel) -> bool,
        exclude: Option<usize>,
        anchored: &[Option<LogicLevel>],
    ) -> Vec<bool> {
        let passes = |di: usize| match cond[di] {
            Conduction::On => true,
            Conduction::Unknown => !definite,
            Conduction::Off => false,
        };
        self.region_reach_filtered(region, bvals, &passes, want, exclude, anchored)
    }

    /// Interior nets that could be driven to a `want` boundary value under
    /// *some one* assignment of the unknown gate levels. Unlike plain
    /// reachability, a path here must be realizable: every uncertain device
    /// it crosses pins its gate at the conducting level, the pins must agree
    /// with one another, and a pin on a net the path itself energizes must
    /// agree with the value being delivered. Without this, mutually
    /// exclusive selects in pass-transistor fabrics would sustain phantom
    /// drive paths and deadlock resolution at X.
    ///
    /// Falls back to plain (more pessimistic, still safe) reachability if
    /// the path enumeration exceeds its step budget.
    fn region_possible(
        &self,
        region: &Region,
        cond: &[Conduction],
        bvals: &[LogicLevel],
        want: &dyn Fn(LogicLevel) -> bool,
        deliver: Option<LogicLevel>,
        anchored: &[Option<LogicLevel>],
    ) -> Vec<bool> {
        let devices = self.netlist.devices();
        let gates: Vec<(NetId, DeviceType)> = region
            .devices
            .iter()
            .map(|&d| (devices[d].gate, devices[d].device_type))
            .collect();
        let mut walk = PossibleWalk {
            region,
            cond,
            gates,
            deliver,
            values: &self.values,
            inv_pair: &self.inv_pair,
            inv_outs: &self.inv_outs,
            anchored,
            reached: vec![false; region.nets.len()],
            on_path: vec![false; region.nets.len()],
            literals: HashMap::new(),
            steps: POSSIBLE_WALK_STEPS,
            capped: false,
        };
        for (di, &(a, b)) in region.ends.iter().enumerate() {
            for (from, to) in [(a, b), (b, a)] {
                if let (End::Boundary(bi), End::Internal(ni)) = (from, to) {
                    if want(bvals[bi]) {
                        walk.step(di, ni);
                    }
                }
            }
        }
        if walk.capped {
            return self.region_reach(region, cond, bvals, false, want, None, anchored);
        }
        walk.reached
    }

    fn region_reach_filtered(
        &self,
        region: &Region,
        bvals: &[LogicLevel],
        passes: &dyn Fn(usize) -> bool,
        want: &dyn Fn(LogicLevel) -> bool,
        exclude: Option<usize>,
        anchored: &[Option<LogicLevel>],
    ) -> Vec<bool> {
        // An anchored virtual rail terminates any flow it would not itself
        // source.
        let blocked = |ni: usize| anchored[ni].is_some_and(|p| !want(p));
        let mut reached = vec![false; region.nets.len()];
        let mut frontier: Vec<usize> = Vec::new();
        // Seed from matching boundaries through passing devices.
        for (di, &(a, b)) in region.ends.iter().enumerate() {
            if !passes(di) {
                continue;
            }
            for (from, to) in [(a, b), (b, a)] {
                if let (End::Boundary(bi), End::Internal(ni)) = (from, to) {
                    if want(bvals[bi]) && Some(ni) != exclude && !reached[ni] && !blocked(ni) {
                        reached[ni] = true;
                        frontier.push(ni);
                    }
                }
            }
        }
        while let Some(ni) = frontier.pop() {
            for &(di, other) in &region.adj[ni] {
                if !passes(di) {
                    continue;
                }
                if let End::Internal(mi) = other {
                    if Some(mi) != exclude && !reached[mi] && !blocked(mi) {
                        reached[mi] = true;
                        frontier.push(mi);
                    }
                }
            }
        }
        reached
    }

    /// Threshold class and drive aspect for interior net `ui` switching to
    /// `next`. The class is the minimax over conducting driver paths: low
    /// only if some all-low-threshold path delivers the value. The aspect is
    /// taken from the qualifying path device whose channel touches the net
    /// (widest wins among parallels).
    fn stage_drive(
        &self,
        region: &Region,
        cond: &[Conduction],
        bvals: &[LogicLevel],
        ui: usize,
        next: LogicLevel,
        anchored: &[Option<LogicLevel>],
    ) -> (VthClass, f64) {
        let devices = self.netlist.devices();
        let aspect_of = |di: usize| devices[region.devices[di]].geometry.aspect();
        if next.is_definite() {
            let want = |v: LogicLevel| v == next;
            for low_only in [true, false] {
                let passes = |di: usize| {
                    cond[di] == Conduction::On
                        && (!low_only || devices[region.devices[di]].vth_class == VthClass::Low)
                };
                let reached =
                    self.region_reach_filtered(region, bvals, &passes, &want, Some(ui), anchored);
                let mut best: Option<f64> = None;
                for &(di, other) in &region.adj[ui] {
                    if !passes(di) {
                        continue;
                    }
                    let fed = match other {
                        End::Internal(mi) => reached[mi],
                        End::Boundary(bi) => want(bvals[bi]),
                    };
                    if fed {
                        best = Some(best.map_or(aspect_of(di), |b: f64| b.max(aspect_of(di))));
                    }
                }
                if let Some(aspect) = best {
                    return (if low_only { VthClass::Low } else { VthClass::High }, aspect);
                }
            }
        }
        // Unknown target, or no conducting source found: price the stage
        // pessimistically at the high threshold through the strongest
        // adjacent channel that could be involved.
        let mut best: Option<f64> = None;
        for &(di, _) in &region.adj[ui] {
            if cond[di] != Conduction::Off {
                best = Some(best.map_or(aspect_of(di), |b: f64| b.max(aspect_of(di))));
            }
        }
        let aspect = best
            .or_else(|| {
                region.adj[ui]
                    .iter()
                    .map(|&(di, _)| aspect_of(di))
                    .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |b| b.max(x))))
            })
            .unwrap_or(1.0);
        (VthClass::High, aspect)
    }
}

/// Splits the netlist into channel-connected regions bounded at pinned
/// nets. Devices whose channel ends are both pinned belong to no region:
/// both their terminals are externally held.
fn build_regions(netlist: &Netlist, pinned: &[bool]) -> Vec<Region> {
    let n = netlist.nets().len();
    let mut uf = UnionFind::new(n);
    for dev in netlist.devices() {
        let (s, d) = (dev.source.index(), dev.drain.index());
        if s != d && !pinned[s] && !pinned[d] {
            uf.union(s, d);
        }
    }
    // Group interior nets by component root, in id order for determinism.
    let mut root_region: BTreeMap<usize, usize> = BTreeMap::new();
    let mut regions: Vec<Region> = Vec::new();
    for dev in netlist.devices() {
        for t in [dev.source, dev.drain] {
            if pinned[t.index()] {
                continue;
            }
            let root = uf.find(t.index());
            root_region.entry(root).or_insert_with(|| {
                regions.push(Region {
                    nets: Vec::new(),
                    boundary: Vec::new(),
                    devices: Vec::new(),
                    ends: Vec::new(),
                    adj: Vec::new(),
                    virtual_rails: Vec::new(),
                });
                regions.len() - 1
            });
        }
    }
    let mut seen_net = vec![false; n];
    for i in 0..n {
        if pinned[i] || seen_net[i] {
            continue;
        }
        let root = uf.find(i);
        if let Some(&r) = root_region.get(&root) {
            // Only nets that actually touch a device channel were rooted.
            regions[r].nets.push(NetId(i as u32));
            seen_net[i] = true;
        }
    }
    for (idx, dev) in netlist.devices().iter().enumerate() {
        let s_in = !pinned[dev.source.index()];
        let d_in = !pinned[dev.drain.index()];
        if !s_in && !d_in {
            continue;
        }
        let root = if s_in { uf.find(dev.source.index()) } else { uf.find(dev.drain.index()) };
        let r = root_region[&root];
        regions[r].devices.push(idx);
        for t in [dev.source, dev.drain] {
            if pinned[t.index()] && !regions[r].boundary.contains(&t) {
                regions[r].boundary.push(t);
            }
        }
    }
    for region in &mut regions {
        region.boundary.sort_unstable();
        region.devices.sort_unstable();
        region.devices.dedup();
        let ends: Vec<(End, End)> = region
            .devices
            .iter()
            .map(|&d| {
                let dev = &netlist.devices()[d];
                let end_of = |net: NetId| match region.local_net(net) {
                    Some(i) => End::Internal(i),
                    None => End::Boundary(
                        region.local_boundary(net).expect("terminal must be in region"),
                    ),
                };
                (end_of(dev.source), end_of(dev.drain))
            })
            .collect();
        let mut adj: Vec<Vec<(usize, End)>> = vec![Vec::new(); region.nets.len()];
        for (di, &(a, b)) in ends.iter().enumerate() {
            if a == b {
                continue;
            }
            if let End::Internal(i) = a {
                adj[i].push((di, b));
            }
            if let End::Internal(i) = b {
                adj[i].push((di, a));
            }
        }
        region.ends = ends;
        region.adj = adj;
        region.virtual_rails = region
            .nets
            .iter()
            .enumerate()
            .filter_map(|(li, &net)| match netlist.net(net).kind {
                NetKind::VirtualGnd => Some((li, LogicLevel::L0)),
                NetKind::VirtualVdd => Some((li, LogicLevel::L1)),
                _ => None,
            })
            .collect();
    }
    regions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{ChannelGeometry, NetKind, PortDirection, Transistor};
    use approx::assert_relative_eq;

    fn geometry() -> ChannelGeometry {
        ChannelGeometry { width_m: 9.0e-8, length_m: 4.5e-8 }
    }

    fn device(
        name: &str,
        device_type: DeviceType,
        vth: VthClass,
        gate: NetId,
        source: NetId,
        drain: NetId,
    ) -> Transistor {
        Transistor {
            name: name.into(),
            device_type,
            vth_class: vth,
            geometry: geometry(),
            gate,
            source,
            drain,
            is_sleep: false,
            load_cap_f: 5.0e-17,
        }
    }

    fn nmos(name: &str, gate: NetId, source: NetId, drain: NetId) -> Transistor {
        device(name, DeviceType::Nmos, VthClass::Low, gate, source, drain)
    }

    fn pmos(name: &str, gate: NetId, source: NetId, drain: NetId) -> Transistor {
        device(name, DeviceType::Pmos, VthClass::Low, gate, source, drain)
    }

    struct Inv {
        netlist: Netlist,
        a: NetId,
        y: NetId,
    }

    fn inverter() -> Inv {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        let y = n.add_net("y", NetKind::Output);
        n.add_port(a, PortDirection::Input);
        n.add_port(y, PortDirection::Output);
        n.add_device(pmos("p", a, vdd, y));
        n.add_device(nmos("n", a, gnd, y));
        Inv { netlist: n, a, y }
    }

    #[test]
    fn inverter_drives_its_output() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        s.apply_inputs(&[(inv.a, LogicLevel::L0, 0.0)]).unwrap();
        let events = s.settle().unwrap();
        assert_eq!(s.value(inv.y), LogicLevel::L1);
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].net, inv.a);
        assert_eq!(events[1].net, inv.y);
        assert_eq!(events[1].cause, Some(events[0].ordinal));
        assert_eq!(events[1].stage_vth, Some(VthClass::Low));
        assert_eq!(events[1].stage_aspect, Some(2.0));
        // y gates nothing, so its load is the wire capacitance alone.
        let d = gate_delay(pp.wire_cap_f, pp.vdd_v, pp.k_drive * 2.0, pp.vth_low_v, pp.alpha)
            .unwrap();
        assert_relative_eq!(events[1].time_s, d, max_relative = 1e-12);
        assert_eq!(s.now_s(), events[1].time_s);
    }

    #[test]
    fn unknown_input_yields_unknown_output() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        s.apply_inputs(&[(inv.a, LogicLevel::L1, 0.0)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(inv.y), LogicLevel::L0);
        s.apply_inputs(&[(inv.a, LogicLevel::LX, 1.0e-9)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(inv.y), LogicLevel::LX);
    }

    #[test]
    fn outputs_are_unknown_before_any_stimulus() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        assert_eq!(s.read_outputs(), vec![(inv.y, LogicLevel::LX)]);
        // With nothing queued the state is already quiescent.
        assert!(s.settle().unwrap().is_empty());
        assert_eq!(s.now_s(), 0.0);
    }

    #[test]
    fn nand_covers_its_truth_table() {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        let b = n.add_net("b", NetKind::Input);
        let y = n.add_net("y", NetKind::Output);
        let mid = n.add_net("mid", NetKind::Signal);
        n.add_port(a, PortDirection::Input);
        n.add_port(b, PortDirection::Input);
        n.add_port(y, PortDirection::Output);
        n.add_device(pmos("pa", a, vdd, y));
        n.add_device(pmos("pb", b, vdd, y));
        n.add_device(nmos("na", a, y, mid));
        n.add_device(nmos("nb", b, mid, gnd));

        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        let mut t = 0.0;
        for (va, vb, expect) in [
            (LogicLevel::L0, LogicLevel::L0, LogicLevel::L1),
            (LogicLevel::L0, LogicLevel::L1, LogicLevel::L1),
            (LogicLevel::L1, LogicLevel::L0, LogicLevel::L1),
            (LogicLevel::L1, LogicLevel::L1, LogicLevel::L0),
        ] {
            s.apply_inputs(&[(a, va, t), (b, vb, t)]).unwrap();
            s.settle().unwrap();
            assert_eq!(s.value(y), expect, "nand({va}, {vb})");
            t = s.now_s() + 1.0e-9;
        }
    }

    struct Tg {
        netlist: Netlist,
        input: NetId,
        sel: NetId,
        selb: NetId,
        y: NetId,
    }

    fn transmission_gate() -> Tg {
        let mut n = Netlist::new();
        n.add_net("vdd", NetKind::RailVdd);
        n.add_net("gnd", NetKind::RailGnd);
        let input = n.add_net("in", NetKind::Input);
        let sel = n.add_net("sel", NetKind::Input);
        let selb = n.add_net("selb", NetKind::Input);
        let y = n.add_net("y", NetKind::Output);
        n.add_port(input, PortDirection::Input);
        n.add_port(sel, PortDirection::Input);
        n.add_port(selb, PortDirection::Input);
        n.add_port(y, PortDirection::Output);
        n.add_device(nmos("tn", sel, input, y));
        n.add_device(pmos("tp", selb, input, y));
        Tg { netlist: n, input, sel, selb, y }
    }

    #[test]
    fn transmission_gate_passes_then_holds() {
        let tg = transmission_gate();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&tg.netlist, &pp).unwrap();
        s.apply_inputs(&[
            (tg.input, LogicLevel::L1, 0.0),
            (tg.sel, LogicLevel::L1, 0.0),
            (tg.selb, LogicLevel::L0, 0.0),
        ])
        .unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(tg.y), LogicLevel::L1);

        // Deselect: the output floats and retains its level.
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(tg.sel, LogicLevel::L0, t), (tg.selb, LogicLevel::L1, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(tg.y), LogicLevel::L1);

        // The floating node ignores input wiggles...
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(tg.input, LogicLevel::L0, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(tg.y), LogicLevel::L1);

        // ...until reselected.
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(tg.sel, LogicLevel::L1, t), (tg.selb, LogicLevel::L0, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(tg.y), LogicLevel::L0);
    }

    #[test]
    fn conflicting_drivers_resolve_to_unknown() {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        let b = n.add_net("b", NetKind::Input);
        let y = n.add_net("y", NetKind::Output);
        n.add_port(a, PortDirection::Input);
        n.add_port(b, PortDirection::Input);
        n.add_port(y, PortDirection::Output);
        n.add_device(nmos("n1", vdd, a, y));
        n.add_device(nmos("n2", vdd, b, y));

        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        s.apply_inputs(&[(a, LogicLevel::L1, 0.0), (b, LogicLevel::L0, 0.0)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(y), LogicLevel::LX);
        // Agreeing drivers are fine.
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(b, LogicLevel::L1, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(y), LogicLevel::L1);
    }

    #[test]
    fn event_limit_flags_runaway_activity() {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        n.add_port(a, PortDirection::Input);
        let mut prev = a;
        for k in 0..3 {
            let y = n.add_net(&format!("y{k}"), NetKind::Signal);
            n.add_device(pmos(&format!("p{k}"), prev, vdd, y));
            n.add_device(nmos(&format!("n{k}"), prev, gnd, y));
            prev = y;
        }
        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        s.set_event_limit(2);
        s.apply_inputs(&[(a, LogicLevel::L0, 0.0)]).unwrap();
        assert_eq!(s.settle(), Err(SimError::EventLimit { limit: 2 }));

        // A fresh state with a generous limit settles the same chain.
        let mut s = SimState::new(&n, &pp).unwrap();
        s.apply_inputs(&[(a, LogicLevel::L0, 0.0)]).unwrap();
        let events = s.settle().unwrap();
        assert_eq!(events.len(), 4);
        assert_eq!(s.value(prev), LogicLevel::L1);
    }

    #[test]
    fn pending_change_is_superseded_not_duplicated() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        // Flip the input back before the output transition matures: the
        // output must move exactly once, to the final value.
        s.apply_inputs(&[(inv.a, LogicLevel::L0, 0.0), (inv.a, LogicLevel::L1, 1.0e-13)])
            .unwrap();
        let events = s.settle().unwrap();
        let y_events: Vec<&Event> = events.iter().filter(|e| e.net == inv.y).collect();
        assert_eq!(y_events.len(), 1);
        assert_eq!(y_events[0].value, LogicLevel::L0);
        assert_eq!(s.value(inv.y), LogicLevel::L0);
    }

    #[test]
    fn stimuli_on_one_net_all_apply_in_order() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        s.apply_inputs(&[
            (inv.a, LogicLevel::L0, 0.0),
            (inv.a, LogicLevel::L1, 1.0e-9),
            (inv.a, LogicLevel::L0, 2.0e-9),
        ])
        .unwrap();
        let events = s.settle().unwrap();
        let a_values: Vec<LogicLevel> =
            events.iter().filter(|e| e.net == inv.a).map(|e| e.value).collect();
        assert_eq!(a_values, vec![LogicLevel::L0, LogicLevel::L1, LogicLevel::L0]);
        assert_eq!(s.value(inv.y), LogicLevel::L1);
    }

    #[test]
    fn advance_until_stops_strictly_before_the_bound() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        s.apply_inputs(&[(inv.a, LogicLevel::L0, 0.0)]).unwrap();
        let d = gate_delay(pp.wire_cap_f, pp.vdd_v, pp.k_drive * 2.0, pp.vth_low_v, pp.alpha)
            .unwrap();
        // Pump exactly to the output event's timestamp: the input applies,
        // the output event stays queued.
        let events = s.advance_until(d).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].net, inv.a);
        assert_eq!(s.value(inv.y), LogicLevel::LX);
        assert_eq!(s.now_s(), d);
        let events = s.settle().unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].net, inv.y);
        assert_eq!(s.value(inv.y), LogicLevel::L1);
    }

    #[test]
    fn only_input_and_clock_ports_accept_stimulus() {
        let inv = inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&inv.netlist, &pp).unwrap();
        let err = s.apply_inputs(&[(inv.y, LogicLevel::L0, 0.0)]).unwrap_err();
        assert_eq!(err, SimError::NotDrivable("y".into()));

        s.apply_inputs(&[(inv.a, LogicLevel::L0, 0.0)]).unwrap();
        s.settle().unwrap();
        let err = s.apply_inputs(&[(inv.a, LogicLevel::L1, 0.0)]).unwrap_err();
        assert!(matches!(err, SimError::StimulusInPast { .. }));
    }

    #[test]
    fn construction_requires_both_rails() {
        let mut n = Netlist::new();
        n.add_net("vdd", NetKind::RailVdd);
        let pp = ProcessParams::default();
        assert!(matches!(SimState::new(&n, &pp), Err(SimError::MissingRails)));
    }

    #[test]
    fn switching_log_records_moved_capacitance() {
        // Inverter driving a second inverter: the first output's load is the
        // wire plus two gate loads.
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        let y1 = n.add_net("y1", NetKind::Signal);
        let y2 = n.add_net("y2", NetKind::Output);
        n.add_port(a, PortDirection::Input);
        n.add_port(y2, PortDirection::Output);
        n.add_device(pmos("p1", a, vdd, y1));
        n.add_device(nmos("n1", a, gnd, y1));
        n.add_device(pmos("p2", y1, vdd, y2));
        n.add_device(nmos("n2", y1, gnd, y2));

        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        s.apply_inputs(&[(a, LogicLevel::L1, 0.0)]).unwrap();
        s.settle().unwrap();
        let log = s.switching_log();
        assert_eq!(log.len(), 3);
        let y1_entry = log.iter().find(|e| e.net == y1).unwrap();
        assert_relative_eq!(y1_entry.c_load_f, 1.0e-16 + 2.0 * 5.0e-17, max_relative = 1e-12);
        let y2_entry = log.iter().find(|e| e.net == y2).unwrap();
        assert_relative_eq!(y2_entry.c_load_f, 1.0e-16, max_relative = 1e-12);
    }

    struct Gated {
        netlist: Netlist,
        a: NetId,
        clk: NetId,
        y: NetId,
        vgnd: NetId,
    }

    fn gated_inverter() -> Gated {
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        let gnd = n.add_net("gnd", NetKind::RailGnd);
        let a = n.add_net("a", NetKind::Input);
        let clk = n.add_net("clk", NetKind::Clock);
        let y = n.add_net("y", NetKind::Output);
        let vgnd = n.add_net("vgnd", NetKind::VirtualGnd);
        n.add_port(a, PortDirection::Input);
        n.add_port(clk, PortDirection::Clock);
        n.add_port(y, PortDirection::Output);
        n.add_device(pmos("p", a, vdd, y));
        n.add_device(nmos("n", a, y, vgnd));
        let mut footer = device("sleep", DeviceType::Nmos, VthClass::High, clk, vgnd, gnd);
        footer.is_sleep = true;
        n.add_device(footer);
        Gated { netlist: n, a, clk, y, vgnd }
    }

    #[test]
    fn sleep_gate_rising_logs_a_wake_charge() {
        let g = gated_inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&g.netlist, &pp).unwrap();
        s.apply_inputs(&[(g.a, LogicLevel::L1, 0.0), (g.clk, LogicLevel::L1, 0.0)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L0);
        assert_eq!(s.value(g.vgnd), LogicLevel::L0);
        let wakes: Vec<&SwitchingEvent> =
            s.switching_log().iter().filter(|e| e.net == g.vgnd && e.c_load_f == 2.0e-15).collect();
        assert_eq!(wakes.len(), 1);

        // Sleep, retain, wake again with a custom wake charge.
        s.set_wake_capacitance(5.0e-15);
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.clk, LogicLevel::L0, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L0, "state holds while gated off");
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.clk, LogicLevel::L1, t)]).unwrap();
        s.settle().unwrap();
        assert!(s.switching_log().iter().any(|e| e.net == g.vgnd && e.c_load_f == 5.0e-15));
    }

    #[test]
    fn gated_logic_reevaluates_on_wake() {
        let g = gated_inverter();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&g.netlist, &pp).unwrap();
        s.apply_inputs(&[(g.a, LogicLevel::L1, 0.0), (g.clk, LogicLevel::L1, 0.0)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L0);

        // Gate off, then raise the input: the pull-up drives the output
        // high even asleep (the PMOS still sees the real rail).
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.clk, LogicLevel::L0, t)]).unwrap();
        s.settle().unwrap();
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.a, LogicLevel::L0, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L1);

        // Drop the input again while asleep: pull-down path is severed, the
        // output floats high, and waking restores the driven low.
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.a, LogicLevel::L1, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L1, "output floats at its old level");
        let t = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(g.clk, LogicLevel::L1, t)]).unwrap();
        s.settle().unwrap();
        assert_eq!(s.value(g.y), LogicLevel::L0);
    }

    #[test]
    fn stage_threshold_is_the_minimax_over_driver_paths() {
        // in --[low NMOS]-- m --[high NMOS]-- u : every path to u crosses
        // the high-threshold device, so u's stage prices high while m's
        // prices low.
        let mut n = Netlist::new();
        let vdd = n.add_net("vdd", NetKind::RailVdd);
        n.add_net("gnd", NetKind::RailGnd);
        let input = n.add_net("in", NetKind::Input);
        let m = n.add_net("m", NetKind::Signal);
        let u = n.add_net("u", NetKind::Output);
        n.add_port(input, PortDirection::Input);
        n.add_port(u, PortDirection::Output);
        n.add_device(nmos("nl", vdd, input, m));
        n.add_device(device("nh", DeviceType::Nmos, VthClass::High, vdd, m, u));

        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        s.apply_inputs(&[(input, LogicLevel::L1, 0.0)]).unwrap();
        let events = s.settle().unwrap();
        let m_event = events.iter().find(|e| e.net == m).unwrap();
        let u_event = events.iter().find(|e| e.net == u).unwrap();
        assert_eq!(m_event.stage_vth, Some(VthClass::Low));
        assert_eq!(u_event.stage_vth, Some(VthClass::High));

        // A parallel all-low path to u flips its pricing to low.
        let mut n2 = n.clone();
        n2.add_device(nmos("bypass", vdd, input, u));
        let mut s2 = SimState::new(&n2, &pp).unwrap();
        s2.apply_inputs(&[(input, LogicLevel::L1, 0.0)]).unwrap();
        let events2 = s2.settle().unwrap();
        let u_event2 = events2.iter().find(|e| e.net == u).unwrap();
        assert_eq!(u_event2.stage_vth, Some(VthClass::Low));
    }

    #[test]
    fn widening_the_driving_device_shortens_the_stage() {
        let build = |pullup_width_scale: f64| {
            let mut n = Netlist::new();
            let vdd = n.add_net("vdd", NetKind::RailVdd);
            let gnd = n.add_net("gnd", NetKind::RailGnd);
            let a = n.add_net("a", NetKind::Input);
            let y = n.add_net("y", NetKind::Output);
            n.add_port(a, PortDirection::Input);
            n.add_port(y, PortDirection::Output);
            let mut p = pmos("p", a, vdd, y);
            p.geometry.width_m *= pullup_width_scale;
            n.add_device(p);
            n.add_device(nmos("n", a, gnd, y));
            (n, a, y)
        };
        let pp = ProcessParams::default();
        let run = |scale: f64| {
            let (n, a, y) = build(scale);
            let mut s = SimState::new(&n, &pp).unwrap();
            s.apply_inputs(&[(a, LogicLevel::L0, 0.0)]).unwrap();
            let events = s.settle().unwrap();
            events.iter().find(|e| e.net == y).unwrap().time_s
        };
        let t_slow = run(1.0);
        let t_fast = run(2.0);
        assert_relative_eq!(t_fast, t_slow / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn measure_delay_reports_the_last_output_transition() {
        let events = [
            Event {
                ordinal: 0,
                time_s: 1.0,
                net: NetId(4),
                value: LogicLevel::L1,
                cause: None,
                stage_vth: None,
                stage_aspect: None,
            },
            Event {
                ordinal: 1,
                time_s: 3.0,
                net: NetId(5),
                value: LogicLevel::L0,
                cause: Some(0),
                stage_vth: Some(VthClass::Low),
                stage_aspect: Some(2.0),
            },
        ];
        let outs = [NetId(4), NetId(5)];
        assert_eq!(measure_delay(&events, &outs, 0.5), Some(2.5));
        assert_eq!(measure_delay(&events, &outs, 2.0), Some(1.0));
        assert_eq!(measure_delay(&events, &[NetId(9)], 0.0), None);
    }
}
