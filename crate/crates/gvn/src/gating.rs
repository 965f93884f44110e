//! Two-phase clock scheduling for power-gated pipelines.
//!
//! The gated adder splits into two clusters, each behind its own sleep
//! footer. Cluster 1 computes from the cycle start; cluster 2 only has work
//! once cluster 1's results are ready, so its clock is a delayed copy of the
//! first. Both offsets derive from measured worst-case stage delays, rounded
//! up to the event resolution, and each cluster stays awake for its active
//! window plus a guard margin — the rest of the cycle it sleeps.
//!
//! Everything here is pure arithmetic over a [`ClockConfig`]: waveform
//! synthesis emits plain `(time, level)` streams the simulator can apply to
//! clock ports, and the sampling schedule names the one instant per cycle at
//! which outputs are both settled and still actively driven.

use crate::sim::LogicLevel;
use thiserror::Error;

/// Time quantum clock edges and sampling instants are aligned to. Stage
/// delays are continuous model outputs; rounding them up to this grid keeps
/// derived schedules representable and comparison-stable.
pub const TIME_RESOLUTION_S: f64 = 1.0e-12;

/// Fraction of its active window each cluster stays awake beyond the
/// measured worst delay, absorbing grid rounding and model slack.
pub const DEFAULT_DUTY_GUARD: f64 = 0.1;

/// One period of the two-phase schedule.
///
/// `clk2_offset_s` is how long after the cycle start the second cluster
/// wakes; `sample_offset_s` is how long after that wake the outputs are
/// read. Both clocks share `duty`: the awake fraction of the period.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ClockConfig {
    pub frequency_hz: f64,
    /// Awake fraction of each period, in (0, 1].
    pub duty: f64,
    /// Delay from a cycle start (clk1 rise) to the clk2 rise.
    pub clk2_offset_s: f64,
    /// Delay from a clk2 rise to the output sampling instant.
    pub sample_offset_s: f64,
}

impl ClockConfig {
    pub fn period_s(&self) -> f64 {
        1.0 / self.frequency_hz
    }

    /// Fraction of each period a cluster spends asleep.
    pub fn sleep_fraction(&self) -> f64 {
        1.0 - self.duty
    }
}

#[derive(Error, Debug, PartialEq)]
pub enum GatingError {
    #[error("frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("stage delay must be non-negative, got {0}")]
    BadDelay(f64),
    #[error("duty guard must be non-negative, got {0}")]
    BadGuard(f64),
    #[error(
        "timing infeasible: period {period_s:e} s cannot fit stage delays \
         totalling {required_s:e} s"
    )]
    Infeasible { period_s: f64, required_s: f64 },
}

/// Rounds a non-negative duration up to the schedule grid. Values already
/// within a part-per-billion of a grid line count as on it, so measured
/// delays that are exact multiples up to float error do not jump a slot.
fn round_up_to_grid(t_s: f64) -> f64 {
    let q = t_s / TIME_RESOLUTION_S;
    let snapped = if (q - q.round()).abs() < 1.0e-9 { q.round() } else { q.ceil() };
    snapped * TIME_RESOLUTION_S
}

/// Builds the schedule for one frequency from measured worst-case stage
/// delays, with the default guard margin.
pub fn derive_clock_config(
    frequency_hz: f64,
    stage1_worst_delay_s: f64,
    stage2_worst_delay_s: f64,
) -> Result<ClockConfig, GatingError> {
    derive_clock_config_with_guard(
        frequency_hz,
        stage1_worst_delay_s,
        stage2_worst_delay_s,
        DEFAULT_DUTY_GUARD,
    )
}

/// Builds the schedule with an explicit guard margin.
///
/// The clk2 offset is the stage-1 worst delay rounded up to the grid, the
/// sample offset is the stage-2 worst delay rounded up, and the shared duty
/// keeps each cluster awake for the larger window scaled by `1 + guard`
/// (clamped to a full period). The schedule is infeasible when the two
/// rounded offsets no longer fit inside one period.
pub fn derive_clock_config_with_guard(
    frequency_hz: f64,
    stage1_worst_delay_s: f64,
    stage2_worst_delay_s: f64,
    guard: f64,
) -> Result<ClockConfig, GatingError> {
    if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
        return Err(GatingError::BadFrequency(frequency_hz));
    }
    for d in [stage1_worst_delay_s, stage2_worst_delay_s] {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(GatingError::BadDelay(d));
        }
    }
    if !(guard >= 0.0) || !guard.is_finite() {
        return Err(GatingError::BadGuard(guard));
    }
    let period_s = 1.0 / frequency_hz;
    let clk2_offset_s = round_up_to_grid(stage1_worst_delay_s);
    let sample_offset_s = round_up_to_grid(stage2_worst_delay_s);
    let required_s = clk2_offset_s + sample_offset_s;
    if required_s >= period_s {
        return Err(GatingError::Infeasible { period_s, required_s });
    }
    // Keep at least one grid quantum of awake time so the degenerate
    // zero-delay schedule still yields distinct rise and fall edges.
    let window_s = clk2_offset_s.max(sample_offset_s).max(TIME_RESOLUTION_S) * (1.0 + guard);
    let duty = (window_s / period_s).min(1.0);
    Ok(ClockConfig { frequency_hz, duty, clk2_offset_s, sample_offset_s })
}

/// Periodic rise/fall streams for the two clocks over `n_cycles` periods,
/// time-sorted. Clk1 rises at each cycle start, clk2 exactly
/// `clk2_offset_s` later; both stay high for `duty` of the period. A duty of
/// one collapses interior fall/rise pairs, leaving the clock held high.
pub fn clock_waveforms(
    cfg: &ClockConfig,
    n_cycles: u32,
) -> (Vec<(f64, LogicLevel)>, Vec<(f64, LogicLevel)>) {
    let period = cfg.period_s();
    let high = cfg.duty * period;
    let phase = |start_offset: f64| {
        let mut events = Vec::with_capacity(2 * n_cycles as usize);
        for k in 0..n_cycles as u64 {
            let t0 = k as f64 * period + start_offset;
            events.push((t0, LogicLevel::L1));
            events.push((t0 + high, LogicLevel::L0));
        }
        // A full-duty clock's fall lands exactly on the next rise; drop
        // both so the stream stays alternating.
        let mut merged: Vec<(f64, LogicLevel)> = Vec::with_capacity(events.len());
        for e in events {
            match merged.last() {
                Some(&(t, LogicLevel::L0)) if e.1 == LogicLevel::L1 && e.0 <= t => {
                    merged.pop();
                }
                _ => merged.push(e),
            }
        }
        merged
    };
    (phase(0.0), phase(cfg.clk2_offset_s))
}

/// The instant per cycle at which gated outputs are settled and still
/// driven: the clk2 rise plus the sample offset.
pub fn output_sample_times(cfg: &ClockConfig, n_cycles: u32) -> Vec<f64> {
    let period = cfg.period_s();
    (0..n_cycles as u64)
        .map(|k| k as f64 * period + cfg.clk2_offset_s + cfg.sample_offset_s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn offsets_round_stage_delays_up_to_the_grid() {
        let cfg = derive_clock_config(200.0e6, 1.5371e-10, 2.043e-10).unwrap();
        assert_relative_eq!(cfg.clk2_offset_s, 1.54e-10, max_relative = 1e-12);
        assert_relative_eq!(cfg.sample_offset_s, 2.05e-10, max_relative = 1e-12);
    }

    #[test]
    fn exact_grid_multiples_do_not_jump_a_slot() {
        let cfg = derive_clock_config(100.0e6, 2.0e-10, 3.0e-10).unwrap();
        assert_relative_eq!(cfg.clk2_offset_s, 2.0e-10, max_relative = 1e-12);
        assert_relative_eq!(cfg.sample_offset_s, 3.0e-10, max_relative = 1e-12);
    }

    #[test]
    fn double_the_total_delay_fits_and_leaves_sleep_time() {
        let (s1, s2) = (1.0e-9, 1.5e-9);
        let freq = 1.0 / (2.0 * (s1 + s2));
        let cfg = derive_clock_config(freq, s1, s2).unwrap();
        assert!(cfg.duty > 0.0 && cfg.duty <= 1.0);
        assert!(cfg.sleep_fraction() > 0.0);
    }

    #[test]
    fn period_shorter_than_stage_delays_is_infeasible() {
        let err = derive_clock_config(1.0e9, 0.6e-9, 0.6e-9).unwrap_err();
        assert!(matches!(err, GatingError::Infeasible { .. }));
    }

    #[test]
    fn subnanosecond_stages_at_200_mhz_sleep_deeply() {
        let cfg = derive_clock_config(200.0e6, 1.6e-10, 1.6e-10).unwrap();
        assert!(cfg.sleep_fraction() > 0.9);
    }

    #[test]
    fn lowering_the_frequency_deepens_sleep() {
        let (s1, s2) = (1.6e-10, 1.9e-10);
        let d200 = derive_clock_config(200.0e6, s1, s2).unwrap().duty;
        let d100 = derive_clock_config(100.0e6, s1, s2).unwrap().duty;
        let d50 = derive_clock_config(50.0e6, s1, s2).unwrap().duty;
        assert!(d50 < d100 && d100 < d200);
    }

    #[test]
    fn one_cycle_yields_one_rise_and_one_fall_per_clock() {
        let cfg = derive_clock_config(100.0e6, 1.0e-9, 1.0e-9).unwrap();
        let (c1, c2) = clock_waveforms(&cfg, 1);
        assert_eq!(c1.len(), 2);
        assert_eq!(c2.len(), 2);
        assert_eq!(c1[0].1, LogicLevel::L1);
        assert_eq!(c1[1].1, LogicLevel::L0);
    }

    #[test]
    fn clk2_rises_lag_clk1_by_the_offset() {
        let cfg = derive_clock_config(50.0e6, 2.3e-9, 1.1e-9).unwrap();
        let (c1, c2) = clock_waveforms(&cfg, 4);
        let rises = |s: &[(f64, LogicLevel)]| {
            s.iter().filter(|e| e.1 == LogicLevel::L1).map(|e| e.0).collect::<Vec<_>>()
        };
        for (r1, r2) in rises(&c1).iter().zip(rises(&c2).iter()) {
            assert_relative_eq!(r2 - r1, cfg.clk2_offset_s, max_relative = 1e-9);
        }
    }

    #[test]
    fn three_cycles_at_100_mhz_end_before_30_ns() {
        let cfg = derive_clock_config(100.0e6, 1.0e-9, 1.0e-9).unwrap();
        let (c1, c2) = clock_waveforms(&cfg, 3);
        let last = c1.iter().chain(c2.iter()).map(|e| e.0).fold(0.0f64, f64::max);
        assert!(last < 30.0e-9);
    }

    #[test]
    fn full_duty_never_emits_a_fall_between_cycles() {
        let cfg = ClockConfig {
            frequency_hz: 1.0e8,
            duty: 1.0,
            clk2_offset_s: 1.0e-9,
            sample_offset_s: 1.0e-9,
        };
        let (c1, _) = clock_waveforms(&cfg, 3);
        // One initial rise, one final fall: the clock never drops mid-run.
        assert_eq!(c1.len(), 2);
        assert_eq!(c1[0].1, LogicLevel::L1);
        assert_eq!(c1[1].1, LogicLevel::L0);
    }

    #[test]
    fn first_sample_lands_inside_the_first_period() {
        let cfg = derive_clock_config(100.0e6, 1.0e-9, 2.0e-9).unwrap();
        let samples = output_sample_times(&cfg, 1);
        assert_eq!(samples.len(), 1);
        assert!(samples[0] < cfg.period_s());
    }

    #[test]
    fn samples_advance_by_exactly_one_period() {
        let cfg = derive_clock_config(50.0e6, 1.0e-9, 2.0e-9).unwrap();
        let samples = output_sample_times(&cfg, 5);
        for w in samples.windows(2) {
            assert_relative_eq!(w[1] - w[0], cfg.period_s(), max_relative = 1e-12);
        }
    }

    #[test]
    fn identical_inputs_reproduce_identical_streams() {
        let cfg = derive_clock_config(200.0e6, 1.6e-10, 1.9e-10).unwrap();
        assert_eq!(clock_waveforms(&cfg, 7), clock_waveforms(&cfg, 7));
        assert_eq!(output_sample_times(&cfg, 7), output_sample_times(&cfg, 7));
    }

    proptest! {
        #[test]
        fn derived_schedules_cover_their_stage_delays(
            s1 in 0.0e-9..3.0e-9f64,
            s2 in 0.0e-9..3.0e-9f64,
            freq in 1.0e6..2.0e8f64,
        ) {
            match derive_clock_config(freq, s1, s2) {
                Ok(cfg) => {
                    // Rounded offsets never under-cover the measured delays,
                    // and the whole schedule fits in one period.
                    prop_assert!(cfg.clk2_offset_s >= s1 - 1.0e-21);
                    prop_assert!(cfg.sample_offset_s >= s2 - 1.0e-21);
                    prop_assert!(
                        cfg.clk2_offset_s + cfg.sample_offset_s < cfg.period_s()
                    );
                    prop_assert!(cfg.duty > 0.0 && cfg.duty <= 1.0);
                    // Every sample instant falls while cluster 2 is awake.
                    prop_assert!(
                        cfg.sample_offset_s <= cfg.duty * cfg.period_s() + 1.0e-21
                    );
                }
                Err(GatingError::Infeasible { .. }) => {
                    // Only when the delays genuinely crowd the period.
                    prop_assert!(s1 + s2 > 0.8 / freq);
                }
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }

        #[test]
        fn waveforms_are_sorted_and_alternate(
            freq in 1.0e6..2.0e8f64,
            cycles in 1u32..6,
        ) {
            let period = 1.0 / freq;
            if let Ok(cfg) = derive_clock_config(freq, period * 0.2, period * 0.3) {
                let (c1, c2) = clock_waveforms(&cfg, cycles);
                for stream in [&c1, &c2] {
                    for w in stream.windows(2) {
                        prop_assert!(w[0].0 < w[1].0);
                        prop_assert!(w[0].1 != w[1].1);
                    }
                }
            }
        }
    }
}
