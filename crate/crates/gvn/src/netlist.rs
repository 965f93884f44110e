//! Flattened transistor netlist model.
//!
//! A [`Netlist`] is a flat bag of nets and transistors plus port lists and an
//! optional net-to-cluster map used by power gating. Nets are addressed by
//! [`NetId`], which is a plain index into the net table; names exist for the
//! text format and for diagnostics, not for lookup during simulation.
//!
//! Netlists are built once (by the generators in [`crate::generators`], by the
//! parser in [`crate::format`], or by hand in tests) and treated as immutable
//! afterwards. All mutable simulation state lives in
//! [`crate::sim::SimState`], so a single netlist can back any number of
//! concurrent simulations.

use std::collections::BTreeMap;
use std::fmt;

/// Index of a net within its owning [`Netlist`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Electrical role of a net. Rails are pinned by the simulator; virtual rails
/// are ordinary dynamic nets that happen to sit between a sleep transistor and
/// the gates it starves.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetKind {
    Signal,
    RailVdd,
    RailGnd,
    VirtualVdd,
    VirtualGnd,
    Input,
    Output,
    Clock,
}

impl NetKind {
    pub fn is_rail(self) -> bool {
        matches!(self, NetKind::RailVdd | NetKind::RailGnd)
    }

    pub fn is_virtual_rail(self) -> bool {
        matches!(self, NetKind::VirtualVdd | NetKind::VirtualGnd)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Net {
    pub name: String,
    pub kind: NetKind,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DeviceType {
    Nmos,
    Pmos,
}

/// Threshold-voltage class. The actual voltages live in
/// [`crate::power::ProcessParams`]; the netlist only records which of the two
/// classes a device belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum VthClass {
    Low,
    High,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ChannelGeometry {
    pub width_m: f64,
    pub length_m: f64,
}

impl ChannelGeometry {
    pub fn aspect(&self) -> f64 {
        self.width_m / self.length_m
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Transistor {
    pub name: String,
    pub device_type: DeviceType,
    pub vth_class: VthClass,
    pub geometry: ChannelGeometry,
    pub gate: NetId,
    pub source: NetId,
    pub drain: NetId,
    /// Sleep transistors cut a virtual rail from a real rail during power
    /// gating. The flag affects sizing policies and wake-energy accounting,
    /// not switch-level conduction.
    pub is_sleep: bool,
    /// Gate load this device presents to whatever drives its gate net, in
    /// farads. Summed per net (plus wire capacitance) to form C_L.
    pub load_cap_f: f64,
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct Netlist {
    nets: Vec<Net>,
    devices: Vec<Transistor>,
    input_ports: Vec<NetId>,
    output_ports: Vec<NetId>,
    clock_ports: Vec<NetId>,
    cluster_of: BTreeMap<NetId, String>,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    /// Appends a net and returns its id. Name uniqueness is checked by
    /// [`validate`], not here, so the parser can report duplicates with
    /// source positions.
    pub fn add_net(&mut self, name: impl Into<String>, kind: NetKind) -> NetId {
        let id = NetId(self.nets.len() as u32);
        self.nets.push(Net { name: name.into(), kind });
        id
    }

    pub fn add_device(&mut self, device: Transistor) {
        self.devices.push(device);
    }

    /// Declares `net` as a port of the given direction. Order of declaration
    /// is the order ports appear in the serialized form and in vector files.
    pub fn add_port(&mut self, net: NetId, direction: PortDirection) {
        match direction {
            PortDirection::Input => self.input_ports.push(net),
            PortDirection::Output => self.output_ports.push(net),
            PortDirection::Clock => self.clock_ports.push(net),
        }
    }

    pub fn set_cluster(&mut self, net: NetId, tag: impl Into<String>) {
        self.cluster_of.insert(net, tag.into());
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn devices(&self) -> &[Transistor] {
        &self.devices
    }

    /// Mutable device access for post-construction passes such as threshold
    /// assignment or channel sizing. Renaming or rewiring devices here can
    /// invalidate the netlist; run [`Netlist::validate`] afterwards if the
    /// connectivity changed.
    pub fn devices_mut(&mut self) -> &mut [Transistor] {
        &mut self.devices
    }

    pub fn input_ports(&self) -> &[NetId] {
        &self.input_ports
    }

    pub fn output_ports(&self) -> &[NetId] {
        &self.output_ports
    }

    pub fn clock_ports(&self) -> &[NetId] {
        &self.clock_ports
    }

    pub fn cluster_of(&self) -> &BTreeMap<NetId, String> {
        &self.cluster_of
    }

    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.index()]
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id.index()].name
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.nets
            .iter()
            .position(|n| n.name == name)
            .map(|i| NetId(i as u32))
    }

    pub fn rail_vdd(&self) -> Option<NetId> {
        self.find_kind(NetKind::RailVdd)
    }

    pub fn rail_gnd(&self) -> Option<NetId> {
        self.find_kind(NetKind::RailGnd)
    }

    fn find_kind(&self, kind: NetKind) -> Option<NetId> {
        self.nets
            .iter()
            .position(|n| n.kind == kind)
            .map(|i| NetId(i as u32))
    }

    /// Total capacitive load seen by a driver of `net`: the wire constant
    /// plus the gate loads of every device whose gate is attached to it.
    pub fn load_capacitance(&self, net: NetId, wire_cap_f: f64) -> f64 {
        let gates: f64 = self
            .devices
            .iter()
            .filter(|d| d.gate == net)
            .map(|d| d.load_cap_f)
            .sum();
        wire_cap_f + gates
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PortDirection {
    Input,
    Output,
    Clock,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValidationIssue {
    pub severity: Severity,
    /// Stable rule identifier, e.g. `unresolved-terminal`.
    pub rule: &'static str,
    /// Name of the offending net or device.
    pub subject: String,
    pub message: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    /// True when no error-severity issue was found. Warnings do not block
    /// simulation.
    pub fn is_clean(&self) -> bool {
        self.issues.iter().all(|i| i.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    fn push(
        &mut self,
        severity: Severity,
        rule: &'static str,
        subject: impl Into<String>,
        message: impl Into<String>,
    ) {
        self.issues.push(ValidationIssue {
            severity,
            rule,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}] {}: {}", self.rule, self.subject, self.message)
    }
}

/// Structural well-formedness check. Returns every issue found rather than
/// stopping at the first, so callers can report a complete picture.
pub fn validate(netlist: &Netlist) -> ValidationReport {
    let mut report = ValidationReport::default();
    let net_count = netlist.nets.len();

    let mut seen_names: BTreeMap<&str, usize> = BTreeMap::new();
    for net in &netlist.nets {
        *seen_names.entry(net.name.as_str()).or_insert(0) += 1;
    }
    for (name, count) in &seen_names {
        if *count > 1 {
            report.push(
                Severity::Error,
                "duplicate-net-name",
                *name,
                format!("declared {count} times"),
            );
        }
    }

    for kind in [NetKind::RailVdd, NetKind::RailGnd] {
        let rails: Vec<&Net> = netlist.nets.iter().filter(|n| n.kind == kind).collect();
        if rails.len() > 1 {
            let rule = match kind {
                NetKind::RailVdd => "multiple-railvdd",
                _ => "multiple-railgnd",
            };
            report.push(
                Severity::Error,
                rule,
                rails[1].name.clone(),
                format!("{} rail declared {} times", rails[0].name, rails.len()),
            );
        }
    }

    let mut seen_devices: BTreeMap<&str, usize> = BTreeMap::new();
    for dev in &netlist.devices {
        *seen_devices.entry(dev.name.as_str()).or_insert(0) += 1;
    }
    for (name, count) in &seen_devices {
        if *count > 1 {
            report.push(
                Severity::Error,
                "duplicate-device-name",
                *name,
                format!("declared {count} times"),
            );
        }
    }

    let bad_name = |name: &str| {
        name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '#')
    };
    for net in &netlist.nets {
        if bad_name(&net.name) {
            report.push(
                Severity::Error,
                "bad-name",
                net.name.clone(),
                "net names must be nonempty and free of whitespace and '#'".to_string(),
            );
        }
    }
    for dev in &netlist.devices {
        if bad_name(&dev.name) {
            report.push(
                Severity::Error,
                "bad-name",
                dev.name.clone(),
                "device names must be nonempty and free of whitespace and '#'".to_string(),
            );
        }
        let g = &dev.geometry;
        let geometry_ok = g.width_m.is_finite()
            && g.length_m.is_finite()
            && g.width_m > 0.0
            && g.length_m > 0.0;
        if !geometry_ok || !dev.load_cap_f.is_finite() || dev.load_cap_f < 0.0 {
            report.push(
                Severity::Error,
                "bad-geometry",
                dev.name.clone(),
                "channel dimensions must be positive and finite, load capacitance nonnegative"
                    .to_string(),
            );
        }
    }

    for dev in &netlist.devices {
        for (terminal, id) in [("gate", dev.gate), ("source", dev.source), ("drain", dev.drain)] {
            if id.index() >= net_count {
                report.push(
                    Severity::Error,
                    "unresolved-terminal",
                    dev.name.clone(),
                    format!("{terminal} references nonexistent net {id}"),
                );
            }
        }
    }

    // Port lists must agree with net kinds in both directions so that the
    // serialized form is unambiguous.
    let port_sets = [
        (netlist.input_ports(), NetKind::Input, "in"),
        (netlist.output_ports(), NetKind::Output, "out"),
        (netlist.clock_ports(), NetKind::Clock, "clk"),
    ];
    for (ports, kind, dir) in port_sets {
        for &id in ports {
            if id.index() >= net_count {
                report.push(
                    Severity::Error,
                    "unresolved-port",
                    id.to_string(),
                    format!("{dir} port references nonexistent net"),
                );
            } else if netlist.net(id).kind != kind {
                report.push(
                    Severity::Error,
                    "port-kind-mismatch",
                    netlist.net_name(id),
                    format!("listed as {dir} port but net kind is {:?}", netlist.net(id).kind),
                );
            }
        }
    }
    for (idx, net) in netlist.nets.iter().enumerate() {
        let id = NetId(idx as u32);
        let listed = match net.kind {
            NetKind::Input => netlist.input_ports.contains(&id),
            NetKind::Output => netlist.output_ports.contains(&id),
            NetKind::Clock => netlist.clock_ports.contains(&id),
            _ => true,
        };
        if !listed {
            report.push(
                Severity::Error,
                "port-undeclared",
                net.name.clone(),
                format!("net kind {:?} requires a matching port declaration", net.kind),
            );
        }
    }

    for (&id, tag) in &netlist.cluster_of {
        if id.index() >= net_count {
            report.push(
                Severity::Error,
                "cluster-unknown-net",
                id.to_string(),
                format!("cluster tag {tag:?} references nonexistent net"),
            );
        }
    }

    for dev in &netlist.devices {
        if !dev.is_sleep {
            continue;
        }
        let on_rail = [dev.source, dev.drain].iter().any(|&t| {
            t.index() < net_count
                && (netlist.net(t).kind.is_rail() || netlist.net(t).kind.is_virtual_rail())
        });
        if !on_rail {
            report.push(
                Severity::Warning,
                "sleep-off-rail",
                dev.name.clone(),
                "sleep transistor has no channel terminal on a rail or virtual rail".to_string(),
            );
        }
    }

    report
}

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum InstantiateError {
    #[error("cell port {0:?} is not bound")]
    UnboundPort(String),
    #[error("binding names {0:?}, which is not a port of the cell")]
    UnknownPort(String),
    #[error("binding for {port:?} targets nonexistent parent net {target}")]
    BindTargetMissing { port: String, target: NetId },
    #[error("instantiation would duplicate name {0:?} in the parent")]
    NameCollision(String),
}

/// Copies `cell` into `parent`, renaming every internal net and device with
/// `prefix` + `.` and rewiring the cell's ports onto the parent nets given in
/// `binding` (port name, parent net). The cell's supply rails are merged onto
/// the parent rails, which are created (as `vdd` / `gnd`) if the parent has
/// none yet. Device count is strictly additive.
pub fn instantiate(
    parent: &Netlist,
    cell: &Netlist,
    binding: &[(&str, NetId)],
    prefix: &str,
) -> Result<Netlist, InstantiateError> {
    let mut out = parent.clone();

    let cell_ports: Vec<NetId> = cell
        .input_ports
        .iter()
        .chain(&cell.output_ports)
        .chain(&cell.clock_ports)
        .copied()
        .collect();

    for (name, target) in binding {
        if !cell.find_net(name).is_some_and(|id| cell_ports.contains(&id)) {
            return Err(InstantiateError::UnknownPort(name.to_string()));
        }
        if target.index() >= parent.nets.len() {
            return Err(InstantiateError::BindTargetMissing {
                port: name.to_string(),
                target: *target,
            });
        }
    }

    // Map from cell net index to parent net id, filled port-by-port and then
    // rail-by-rail before internal nets are copied.
    let mut map: Vec<Option<NetId>> = vec![None; cell.nets.len()];
    for &port in &cell_ports {
        let name = cell.net_name(port);
        let target = binding
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| InstantiateError::UnboundPort(name.to_string()))?;
        map[port.index()] = Some(target);
    }

    for (idx, net) in cell.nets.iter().enumerate() {
        if map[idx].is_some() {
            continue;
        }
        let id = match net.kind {
            NetKind::RailVdd => match out.rail_vdd() {
                Some(r) => r,
                None => out.add_net("vdd", NetKind::RailVdd),
            },
            NetKind::RailGnd => match out.rail_gnd() {
                Some(r) => r,
                None => out.add_net("gnd", NetKind::RailGnd),
            },
            // Internal nets, including virtual rails, are copied verbatim
            // under the instance prefix. Port kinds do not survive into the
            // parent; whether the parent exposes them is the parent's call.
            kind => {
                let name = format!("{prefix}.{}", net.name);
                if out.find_net(&name).is_some() {
                    return Err(InstantiateError::NameCollision(name));
                }
                let kind = match kind {
                    NetKind::Input | NetKind::Output | NetKind::Clock => NetKind::Signal,
                    other => other,
                };
                out.add_net(name, kind)
            }
        };
        map[idx] = Some(id);
    }

    for dev in &cell.devices {
        let name = format!("{prefix}.{}", dev.name);
        if out.devices.iter().any(|d| d.name == name) {
            return Err(InstantiateError::NameCollision(name));
        }
        out.add_device(Transistor {
            name,
            gate: map[dev.gate.index()].expect("mapped"),
            source: map[dev.source.index()].expect("mapped"),
            drain: map[dev.drain.index()].expect("mapped"),
            ..dev.clone()
        });
    }

    for (&net, tag) in &cell.cluster_of {
        let mapped = map[net.index()].expect("mapped");
        out.set_cluster(mapped, tag.clone());
    }

    Ok(out)
}
