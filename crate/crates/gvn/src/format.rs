//! Netlist text format.
//!
//! Files are line oriented; `#` starts a comment that runs to end of line and
//! blank lines are ignored. Keywords are case-insensitive on input. Four
//! directives exist:
//!
//! ```text
//! net <name> <signal|railvdd|railgnd|virtualvdd|virtualgnd|input|output|clock>
//! port <in|out|clk> <net>
//! m <name> <nmos|pmos> <gate> <src> <drn> w=<m> l=<m> vth=<low|high> sleep=<0|1> cl=<F>
//! cluster <net> <tag>
//! ```
//!
//! [`serialize`] emits one canonical form: one declaration per line, nets
//! first (in table order), then ports, devices, and cluster tags; lowercase
//! keywords; numeric fields in scientific notation with exactly six
//! significant digits; LF line endings. Canonical output re-parses to a
//! structurally equal netlist, and serializing again reproduces the same
//! bytes, so files can be diffed and hashed.

use crate::netlist::{
    ChannelGeometry, DeviceType, NetId, NetKind, Netlist, PortDirection, Transistor, VthClass,
};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    /// 1-based source line.
    pub line: usize,
    /// 1-based character column of the offending token.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Formats a float in the canonical notation used by netlist and CSV output:
/// scientific, exactly six significant digits.
pub fn format_sci6(value: f64) -> String {
    format!("{value:.5e}")
}

struct Token<'a> {
    column: usize,
    text: &'a str,
}

/// Splits a line into whitespace-separated tokens, dropping any `#` comment
/// and remembering 1-based columns for error reporting.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut col = 0usize;
    let mut start = None;
    for (i, ch) in body.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((s, c)) = start.take() {
                tokens.push(Token { column: c, text: &body[s..i] });
            }
        } else if start.is_none() {
            start = Some((i, col));
        }
    }
    if let Some((s, c)) = start {
        tokens.push(Token { column: c, text: &body[s..] });
    }
    tokens
}

fn kind_keyword(kind: NetKind) -> &'static str {
    match kind {
        NetKind::Signal => "signal",
        NetKind::RailVdd => "railvdd",
        NetKind::RailGnd => "railgnd",
        NetKind::VirtualVdd => "virtualvdd",
        NetKind::VirtualGnd => "virtualgnd",
        NetKind::Input => "input",
        NetKind::Output => "output",
        NetKind::Clock => "clock",
    }
}

fn parse_kind(text: &str) -> Option<NetKind> {
    Some(match text.to_ascii_lowercase().as_str() {
        "signal" => NetKind::Signal,
        "railvdd" => NetKind::RailVdd,
        "railgnd" => NetKind::RailGnd,
        "virtualvdd" => NetKind::VirtualVdd,
        "virtualgnd" => NetKind::VirtualGnd,
        "input" => NetKind::Input,
        "output" => NetKind::Output,
        "clock" => NetKind::Clock,
        _ => return None,
    })
}

/// Parses netlist text. All recoverable problems are collected so a bad file
/// reports every offending line, not just the first.
pub fn parse(input: &str) -> Result<Netlist, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut netlist = Netlist::new();
    let mut net_ids: HashMap<String, (NetId, usize)> = HashMap::new();

    // Nets are registered in a first pass so that ports, devices, and cluster
    // tags may reference a net declared later in the file.
    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens = tokenize(line);
        let Some(first) = tokens.first() else { continue };
        if !first.text.eq_ignore_ascii_case("net") {
            continue;
        }
        if tokens.len() != 3 {
            errors.push(ParseError {
                line: lineno,
                column: first.column,
                message: format!("net directive takes 2 fields, found {}", tokens.len() - 1),
            });
            continue;
        }
        let name = tokens[1].text;
        let Some(kind) = parse_kind(tokens[2].text) else {
            errors.push(ParseError {
                line: lineno,
                column: tokens[2].column,
                message: format!("unknown net kind {:?}", tokens[2].text),
            });
            continue;
        };
        if let Some((_, prev_line)) = net_ids.get(name) {
            errors.push(ParseError {
                line: lineno,
                column: tokens[1].column,
                message: format!("net {name:?} already declared on line {prev_line}"),
            });
            continue;
        }
        let id = netlist.add_net(name, kind);
        net_ids.insert(name.to_string(), (id, lineno));
    }

    let lookup = |tok: &Token<'_>, lineno: usize, errors: &mut Vec<ParseError>| -> Option<NetId> {
        match net_ids.get(tok.text) {
            Some((id, _)) => Some(*id),
            None => {
                errors.push(ParseError {
                    line: lineno,
                    column: tok.column,
                    message: format!("unknown net {:?}", tok.text),
                });
                None
            }
        }
    };

    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens = tokenize(line);
        let Some(first) = tokens.first() else { continue };
        match first.text.to_ascii_lowercase().as_str() {
            "net" => {} // handled above
            "port" => {
                if tokens.len() != 3 {
                    errors.push(ParseError {
                        line: lineno,
                        column: first.column,
                        message: format!("port directive takes 2 fields, found {}", tokens.len() - 1),
                    });
                    continue;
                }
                let direction = match tokens[1].text.to_ascii_lowercase().as_str() {
                    "in" => PortDirection::Input,
                    "out" => PortDirection::Output,
                    "clk" => PortDirection::Clock,
                    other => {
                        errors.push(ParseError {
                            line: lineno,
                            column: tokens[1].column,
                            message: format!("unknown port direction {other:?}"),
                        });
                        continue;
                    }
                };
                if let Some(net) = lookup(&tokens[2], lineno, &mut errors) {
                    netlist.add_port(net, direction);
                }
            }
            "m" => {
                if let Some(dev) = parse_device(&tokens, lineno, &mut errors, |t, e| lookup(t, lineno, e)) {
                    netlist.add_device(dev);
                }
            }
            "cluster" => {
                if tokens.len() != 3 {
                    errors.push(ParseError {
                        line: lineno,
                        column: first.column,
                        message: format!("cluster directive takes 2 fields, found {}", tokens.len() - 1),
                    });
                    continue;
                }
                if let Some(net) = lookup(&tokens[1], lineno, &mut errors) {
                    netlist.set_cluster(net, tokens[2].text);
                }
            }
            other => {
                errors.push(ParseError {
                    line: lineno,
                    column: first.column,
                    message: format!("unknown directive {other:?}"),
                });
            }
        }
    }

    if errors.is_empty() {
        Ok(netlist)
    } else {
        Err(errors)
    }
}

fn parse_device(
    tokens: &[Token<'_>],
    lineno: usize,
    errors: &mut Vec<ParseError>,
    mut lookup: impl FnMut(&Token<'_>, &mut Vec<ParseError>) -> Option<NetId>,
) -> Option<Transistor> {
    if tokens.len() != 11 {
        errors.push(ParseError {
            line: lineno,
            column: tokens[0].column,
            message: format!("m directive takes 10 fields, found {}", tokens.len() - 1),
        });
        return None;
    }

    let name = tokens[1].text.to_string();
    let device_type = match tokens[2].text.to_ascii_lowercase().as_str() {
        "nmos" => DeviceType::Nmos,
        "pmos" => DeviceType::Pmos,
        other => {
            errors.push(ParseError {
                line: lineno,
                column: tokens[2].column,
                message: format!("unknown device type {other:?}"),
            });
            return None;
        }
    };
    let gate = lookup(&tokens[3], errors);
    let source = lookup(&tokens[4], errors);
    let drain = lookup(&tokens[5], errors);

    let mut keyed = |idx: usize, key: &str| -> Option<&str> {
        let tok = &tokens[idx];
        let lower = tok.text.to_ascii_lowercase();
        match lower.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
            Some(_) => Some(&tok.text[key.len() + 1..]),
            None => {
                errors.push(ParseError {
                    line: lineno,
                    column: tok.column,
                    message: format!("expected {key}=<value>, found {:?}", tok.text),
                });
                None
            }
        }
    };

    let width = keyed(6, "w").map(str::to_owned);
    let length = keyed(7, "l").map(str::to_owned);
    let vth = keyed(8, "vth").map(str::to_owned);
    let sleep = keyed(9, "sleep").map(str::to_owned);
    let load = keyed(10, "cl").map(str::to_owned);

    let mut float = |value: Option<String>, idx: usize| -> Option<f64> {
        let value = value?;
        match value.parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                errors.push(ParseError {
                    line: lineno,
                    column: tokens[idx].column,
                    message: format!("bad numeric value {value:?}"),
                });
                None
            }
        }
    };
    let width = float(width, 6);
    let length = float(length, 7);
    let load = float(load, 10);

    let vth_class = match vth.as_deref().map(str::to_ascii_lowercase).as_deref() {
        Some("low") => Some(VthClass::Low),
        Some("high") => Some(VthClass::High),
        Some(other) => {
            errors.push(ParseError {
                line: lineno,
                column: tokens[8].column,
                message: format!("vth must be low or high, found {other:?}"),
            });
            None
        }
        None => None,
    };
    let is_sleep = match sleep.as_deref() {
        Some("0") => Some(false),
        Some("1") => Some(true),
        Some(other) => {
            errors.push(ParseError {
                line: lineno,
                column: tokens[9].column,
                message: format!("sleep must be 0 or 1, found {other:?}"),
            });
            None
        }
        None => None,
    };

    Some(Transistor {
        name,
        device_type,
        vth_class: vth_class?,
        geometry: ChannelGeometry { width_m: width?, length_m: length? },
        gate: gate?,
        source: source?,
        drain: drain?,
        is_sleep: is_sleep?,
        load_cap_f: load?,
    })
}

/// Emits the canonical text form. The netlist is expected to pass
/// [`crate::netlist::validate`]; names containing whitespace or `#` would not
/// re-parse and are rejected there.
pub fn serialize(netlist: &Netlist) -> String {
    let mut out = String::new();
    for net in netlist.nets() {
        out.push_str(&format!("net {} {}\n", net.name, kind_keyword(net.kind)));
    }
    for (ports, dir) in [
        (netlist.input_ports(), "in"),
        (netlist.output_ports(), "out"),
        (netlist.clock_ports(), "clk"),
    ] {
        for &port in ports {
            out.push_str(&format!("port {dir} {}\n", netlist.net_name(port)));
        }
    }
    for dev in netlist.devices() {
        let ty = match dev.device_type {
            DeviceType::Nmos => "nmos",
            DeviceType::Pmos => "pmos",
        };
        let vth = match dev.vth_class {
            VthClass::Low => "low",
            VthClass::High => "high",
        };
        out.push_str(&format!(
            "m {} {} {} {} {} w={} l={} vth={} sleep={} cl={}\n",
            dev.name,
            ty,
            netlist.net_name(dev.gate),
            netlist.net_name(dev.source),
            netlist.net_name(dev.drain),
            format_sci6(dev.geometry.width_m),
            format_sci6(dev.geometry.length_m),
            vth,
            u8::from(dev.is_sleep),
            format_sci6(dev.load_cap_f),
        ));
    }
    for (&net, tag) in netlist.cluster_of() {
        out.push_str(&format!("cluster {} {}\n", netlist.net_name(net), tag));
    }
    out
}
