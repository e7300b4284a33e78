use super::baseline::{window_statistic, BaselineModel};
use super::calibration::ThresholdTable;
use crate::embedding::Observation;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// State of the cumulative statistic between windows.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState<T> {
    /// Current `S_w`.
    pub s: T,
    /// Windows since the last reset.
    pub w: usize,
    /// Offset subtracted from every window statistic.
    pub q: T,
    /// Global indices (1-based) of the windows that raised an alarm.
    pub alarms: Vec<usize>,
    /// Windows consumed in total.
    pub seen: usize,
}

impl<T: Real> DetectorState<T> {
    pub fn new(q: T) -> Self {
        Self {
            s: T::zero(),
            w: 0,
            q,
            alarms: Vec::new(),
            seen: 0,
        }
    }
}

/// One step of `S_w = max(0, S_{w-1} + s_w - q)`. An alarm fires when
/// `S_w > h_w`; it is recorded and the state restarts from zero.
pub fn cusum_step<T: Real>(state: &mut DetectorState<T>, s_w: T, h_w: T) -> bool {
    state.w += 1;
    state.seen += 1;
    let next = state.s + s_w - state.q;
    state.s = if next > T::zero() { next } else { T::zero() };
    if state.s > h_w {
        state.alarms.push(state.seen);
        state.s = T::zero();
        state.w = 0;
        true
    } else {
        false
    }
}

/// Value of the cumulative statistic and threshold at one window, recorded
/// before any reset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint<T> {
    pub s_w: T,
    pub cumulative: T,
    pub threshold: T,
    pub alarm: bool,
}

/// Feeds precomputed window statistics through the recursion.
pub fn run_on_statistics<T: Real, I: IntoIterator<Item = T>>(stats: I, q: T, table: &ThresholdTable) -> Vec<usize> {
    let mut state = DetectorState::new(q);
    for s in stats {
        let h = T::lit(table.threshold(state.w + 1));
        cusum_step(&mut state, s, h);
    }
    state.alarms
}

/// As [`run_on_statistics`], also returning the per-window trace.
pub fn trace_statistics<T: Real, I: IntoIterator<Item = T>>(
    stats: I,
    q: T,
    table: &ThresholdTable,
) -> (Vec<usize>, Vec<TracePoint<T>>) {
    let mut state = DetectorState::new(q);
    let mut trace = Vec::new();
    for s in stats {
        let h = T::lit(table.threshold(state.w + 1));
        let before = state.s + s - q;
        let cumulative = if before > T::zero() { before } else { T::zero() };
        let alarm = cusum_step(&mut state, s, h);
        trace.push(TracePoint {
            s_w: s,
            cumulative,
            threshold: h,
            alarm,
        });
    }
    (state.alarms, trace)
}

/// Window statistics over non-overlapping windows of `n` observations; a
/// trailing partial window is dropped.
pub fn window_statistics<T: Real, O: Observation<T>>(
    stream: &[O],
    model: &BaselineModel<T>,
    n: usize,
) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::invalid("window size must be at least 1"));
    }
    stream.chunks_exact(n).map(|w| window_statistic(model, w)).collect()
}

/// Runs the detector over `stream` and returns the alarm window indices.
pub fn run_detector<T: Real, O: Observation<T>>(
    stream: &[O],
    model: &BaselineModel<T>,
    table: &ThresholdTable,
    n: usize,
) -> Result<Vec<usize>> {
    let stats = window_statistics(stream, model, n)?;
    Ok(run_on_statistics(stats, T::lit(table.offset), table))
}
