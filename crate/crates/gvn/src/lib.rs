//! Switch-level CMOS simulation and power/timing analysis, built around a
//! family of 4-bit BCD adders that trade leakage against speed.
//!
//! The crate models circuits at the transistor level: a [`netlist::Netlist`]
//! holds nets and MOS switches, [`format`] reads and writes them as text,
//! [`sim`] evaluates them event by event with four-valued logic, and
//! [`power`] prices every transition and every idle state with closed-form
//! delay and subthreshold-leakage models.
//!
//! ```
//! use gvn::netlist::{NetKind, Netlist, PortDirection};
//! use gvn::power::ProcessParams;
//! use gvn::sim::{LogicLevel, SimState};
//!
//! // An inverter, driven low: its output rises after one stage delay.
//! let text = "
//!     net vdd railvdd
//!     net gnd railgnd
//!     net a input
//!     net y output
//!     port in a
//!     port out y
//!     m p pmos a vdd y w=9e-8 l=4.5e-8 vth=low sleep=0 cl=5e-17
//!     m n nmos a gnd y w=9e-8 l=4.5e-8 vth=low sleep=0 cl=5e-17
//! ";
//! let netlist = gvn::format::parse(text).unwrap();
//! let params = ProcessParams::default();
//! let mut sim = SimState::new(&netlist, &params).unwrap();
//! let a = netlist.find_net("a").unwrap();
//! let y = netlist.find_net("y").unwrap();
//! sim.apply_inputs(&[(a, LogicLevel::L0, 0.0)]).unwrap();
//! sim.settle().unwrap();
//! assert_eq!(sim.value(y), LogicLevel::L1);
//! ```

pub mod bench;
pub mod format;
pub mod gating;
pub mod generators;
pub mod netlist;
pub mod power;
pub mod sim;
