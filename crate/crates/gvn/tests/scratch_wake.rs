use gvn::bench::{all_vectors, Variant};
use gvn::generators::BcdNets;
use gvn::power::ProcessParams;
use gvn::sim::{LogicLevel, SimState};

fn lvl(b: u32) -> LogicLevel {
    if b & 1 == 1 {
        LogicLevel::L1
    } else {
        LogicLevel::L0
    }
}

#[test]
#[ignore]
fn wake_walk_event_counts() {
    let n = Variant::Gated.build();
    let nets = BcdNets::find(&n).unwrap();
    let pp = ProcessParams::default();
    let mut s = SimState::new(&n, &pp).unwrap();
    let (c1, c2) = (nets.clk1.unwrap(), nets.clk2.unwrap());
    s.apply_inputs(&[(c1, LogicLevel::L1, 0.0), (c2, LogicLevel::L1, 0.0)]).unwrap();
    let mut stim = Vec::new();
    for k in 0..4 {
        stim.push((nets.a[k as usize], LogicLevel::L0, 0.0));
        stim.push((nets.b[k as usize], LogicLevel::L0, 0.0));
    }
    stim.push((nets.cin, LogicLevel::L0, 0.0));
    s.apply_inputs(&stim).unwrap();
    println!("warmup awake: {} events", s.settle().unwrap().len());
    let t = s.now_s() + 1.0e-9;
    s.apply_inputs(&[(c1, LogicLevel::L0, t), (c2, LogicLevel::L0, t)]).unwrap();
    println!("warmup sleep: {} events", s.settle().unwrap().len());

    for (i, (a, b, cin)) in all_vectors().enumerate() {
        let t1 = s.now_s() + 1.0e-9;
        let mut stim = Vec::new();
        for k in 0..4 {
            stim.push((nets.a[k as usize], lvl(a >> k), t1));
            stim.push((nets.b[k as usize], lvl(b >> k), t1));
        }
        stim.push((nets.cin, lvl(cin), t1));
        stim.push((c1, LogicLevel::L1, t1));
        s.apply_inputs(&stim).unwrap();
        let e1 = match s.settle() {
            Ok(ev) => ev.len(),
            Err(e) => {
                println!("vector {i} ({a},{b},{cin}) stage1 FAILED: {e}");
                return;
            }
        };
        let t2 = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(c2, LogicLevel::L1, t2)]).unwrap();
        let e2 = match s.settle() {
            Ok(ev) => ev.len(),
            Err(e) => {
                println!("vector {i} ({a},{b},{cin}) stage2 FAILED: {e}");
                return;
            }
        };
        let t3 = s.now_s() + 1.0e-9;
        s.apply_inputs(&[(c1, LogicLevel::L0, t3), (c2, LogicLevel::L0, t3)]).unwrap();
        let e3 = match s.settle() {
            Ok(ev) => ev.len(),
            Err(e) => {
                println!("vector {i} ({a},{b},{cin}) sleep FAILED: {e}");
                return;
            }
        };
        if e1 + e2 + e3 > 400 || i % 40 == 0 {
            println!("vector {i} ({a},{b},{cin}): wake {e1}, clk2 {e2}, sleep {e3}");
        }
    }
    println!("all vectors done");
}
