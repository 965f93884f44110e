use std::time::Instant;

use gvn::bench::{emit, sweep, verify_variant, ReportFormat, SweepConfig, Variant};
use gvn::netlist::VthClass;
use gvn::power::ProcessParams;

#[test]
#[ignore]
fn inspect() {
    use gvn::generators::BcdNets;
    use gvn::power::state_leakage;
    use gvn::sim::{LogicLevel, SimState};

    for v in Variant::ALL {
        let n = v.build();
        let mut by: std::collections::BTreeMap<(VthClass, bool), usize> = Default::default();
        for d in n.devices() {
            *by.entry((d.vth_class, d.is_sleep)).or_default() += 1;
        }
        println!("{v}: {} devices {:?}", n.devices().len(), by);

        let nets = BcdNets::find(&n).unwrap();
        let pp = ProcessParams::default();
        let mut s = SimState::new(&n, &pp).unwrap();
        let clocks = nets.clk1.zip(nets.clk2);
        if let Some((c1, c2)) = clocks {
            s.apply_inputs(&[(c1, LogicLevel::L1, 0.0), (c2, LogicLevel::L1, 0.0)]).unwrap();
        }
        let mut t = 0.0;
        let mut awake_sum = 0.0;
        let vectors = [(0u32, 0u32, 0u32), (5, 5, 0), (9, 9, 1), (3, 4, 0), (7, 8, 1), (2, 6, 0)];
        for &(a, b, cin) in &vectors {
            let mut stim = Vec::new();
            for k in 0..4 {
                stim.push((nets.a[k as usize], lvl(a >> k & 1), t));
                stim.push((nets.b[k as usize], lvl(b >> k & 1), t));
            }
            stim.push((nets.cin, lvl(cin), t));
            s.apply_inputs(&stim).unwrap();
            s.settle().unwrap();
            awake_sum += state_leakage(&n, s.values(), &pp);
            t = s.now_s() + 1.0e-9;
        }
        println!("  awake leakage avg over {} vectors: {:.4e} W", vectors.len(), awake_sum / vectors.len() as f64);
        if let Some((c1, c2)) = clocks {
            s.apply_inputs(&[(c1, LogicLevel::L0, t), (c2, LogicLevel::L0, t)]).unwrap();
            s.settle().unwrap();
            println!("  asleep leakage: {:.4e} W", state_leakage(&n, s.values(), &pp));
        }
    }
}

fn lvl(b: u32) -> gvn::sim::LogicLevel {
    if b & 1 == 1 {
        gvn::sim::LogicLevel::L1
    } else {
        gvn::sim::LogicLevel::L0
    }
}

#[test]
#[ignore]
fn calibrate() {
    let cfg = SweepConfig::default();
    let t0 = Instant::now();
    for v in Variant::ALL {
        let t = Instant::now();
        let out = verify_variant(v, 2.0e8, &ProcessParams::default()).unwrap();
        println!(
            "verify {v}: pass={} ({} cex) in {:?}  clock={:?}",
            out.pass(),
            out.counterexamples.len(),
            t.elapsed(),
            out.clock
        );
        for c in out.counterexamples.iter().take(5) {
            println!("   cex: {c}");
        }
    }
    println!("verify total {:?}", t0.elapsed());

    let t1 = Instant::now();
    let report = sweep(&Variant::ALL, &[5.0e7, 1.0e8, 2.0e8], &cfg).unwrap();
    println!("sweep in {:?}", t1.elapsed());
    print!("{}", emit(&report, ReportFormat::Table));

    // Paper-style summary at 200 MHz.
    let row = |v: Variant| report.rows.iter().find(|r| r.variant == v && r.frequency_hz == 2.0e8).unwrap();
    let (c, d, g) = (row(Variant::Conventional), row(Variant::Dvt), row(Variant::Gated));
    println!("targets  : conv 3.722e-6 W 11.440e-11 s | dvt 1.668e-6 W 19.229e-11 s | gated 1.384e-6 W 16.181e-11 s");
    println!(
        "power reduction gated vs conv: {:.1}% (target 62.8 +/- 15)",
        100.0 * (1.0 - g.avg_power_w / c.avg_power_w)
    );
    println!(
        "pdp   reduction gated vs conv: {:.2}% (target 47.41 +/- 15)",
        100.0 * (1.0 - g.pdp_j / c.pdp_j)
    );
    println!(
        "orderings: power G<D<C {} | delay C<G<D {} | pdp G<D<C {}",
        g.avg_power_w < d.avg_power_w && d.avg_power_w < c.avg_power_w,
        c.worst_delay_s < g.worst_delay_s && g.worst_delay_s < d.worst_delay_s,
        g.pdp_j < d.pdp_j && d.pdp_j < c.pdp_j,
    );
}
