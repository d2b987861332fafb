use super::{CoincidenceEvent, DetectionEvent, PairLabel, TimetagError, TimingConfig};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Running counters of a coincidence filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceStats {
    pub clicks: u64,
    pub coincidences: u64,
    pub unpaired: u64,
    /// Windows opened by a click that held three or more clicks. Greedy
    /// pairing splits these (e.g. four-folds into two pairs), so they are
    /// counted rather than silently absorbed.
    pub multi_click_windows: u64,
}

/// Greedy earliest-first coincidence circuit over a time-sorted click stream.
///
/// The earliest unconsumed click pairs with the earliest later unconsumed
/// click on a different detector at most one window away; both are consumed.
/// A click with no partner is discarded.
pub struct CoincidenceFilter<I> {
    input: I,
    window_ps: i64,
    /// Clicks with their stream index and whether they sat in a multi-click window.
    buffer: VecDeque<(usize, DetectionEvent, bool)>,
    next_index: usize,
    exhausted: bool,
    stats: CoincidenceStats,
}

impl<I: Iterator<Item = DetectionEvent>> CoincidenceFilter<I> {
    /// `input` must be time-sorted.
    pub fn new(input: I, timing: &TimingConfig) -> Self {
        Self {
            input,
            window_ps: timing.window_ps(),
            buffer: VecDeque::new(),
            next_index: 0,
            exhausted: false,
            stats: CoincidenceStats::default(),
        }
    }

    pub fn stats(&self) -> CoincidenceStats {
        self.stats
    }

    fn fill_until(&mut self, limit_ps: i64) {
        while !self.exhausted && self.buffer.back().is_none_or(|(_, e, _)| e.time_ps <= limit_ps) {
            match self.input.next() {
                Some(e) => {
                    debug_assert!(self.buffer.back().is_none_or(|(_, b, _)| b.time_ps <= e.time_ps));
                    self.buffer.push_back((self.next_index, e, false));
                    self.next_index += 1;
                    self.stats.clicks += 1;
                }
                None => self.exhausted = true,
            }
        }
    }

    /// Next coincidence with the stream indices of its two clicks.
    pub fn next_indexed(&mut self) -> Option<(usize, usize, CoincidenceEvent)> {
        self.next_tagged().map(|t| (t.first_index, t.second_index, t.event))
    }

    /// Next coincidence with its click indices and multi-click flag.
    pub fn next_tagged(&mut self) -> Option<TaggedCoincidence> {
        loop {
            if self.buffer.is_empty() {
                self.fill_until(i64::MIN);
            }
            let (first_idx, first, _) = *self.buffer.front()?;
            let limit = first.time_ps.saturating_add(self.window_ps);
            self.fill_until(limit);

            let in_window = self
                .buffer
                .iter()
                .take_while(|(_, e, _)| e.time_ps <= limit)
                .count();
            if in_window >= 3 {
                self.stats.multi_click_windows += 1;
                for entry in self.buffer.iter_mut().take(in_window) {
                    entry.2 = true;
                }
            }
            let partner = self
                .buffer
                .iter()
                .take(in_window)
                .skip(1)
                .position(|(_, e, _)| e.detector != first.detector)
                .map(|p| p + 1);

            let (_, _, first_multi) = self.buffer.pop_front().expect("front exists");
            match partner {
                Some(p) => {
                    let (second_idx, second, second_multi) = self
                        .buffer
                        .remove(p - 1)
                        .expect("partner index is inside the buffer");
                    let pair = PairLabel::of(first.detector, second.detector)
                        .expect("partner is on a different detector");
                    self.stats.coincidences += 1;
                    return Some(TaggedCoincidence {
                        event: CoincidenceEvent {
                            pair,
                            time_ps: first.time_ps,
                        },
                        first_index: first_idx,
                        second_index: second_idx,
                        multi_click: first_multi || second_multi,
                    });
                }
                None => self.stats.unpaired += 1,
            }
        }
    }
}

/// A coincidence with the stream indices of its clicks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedCoincidence {
    pub event: CoincidenceEvent,
    pub first_index: usize,
    pub second_index: usize,
    /// Either click shared a window with at least two other clicks, so the
    /// pairing came from overlapping emissions rather than a single pair.
    pub multi_click: bool,
}

impl<I: Iterator<Item = DetectionEvent>> Iterator for CoincidenceFilter<I> {
    type Item = CoincidenceEvent;

    fn next(&mut self) -> Option<CoincidenceEvent> {
        self.next_indexed().map(|(_, _, c)| c)
    }
}

fn check_sorted(events: &[DetectionEvent]) -> Result<(), TimetagError> {
    match events.windows(2).position(|w| w[1].time_ps < w[0].time_ps) {
        Some(i) => Err(TimetagError::UnsortedInput(i + 1)),
        None => Ok(()),
    }
}

pub fn coincidence_filter(
    events: &[DetectionEvent],
    timing: &TimingConfig,
) -> Result<Vec<CoincidenceEvent>, TimetagError> {
    timing.validate()?;
    check_sorted(events)?;
    Ok(CoincidenceFilter::new(events.iter().copied(), timing).collect())
}

/// Index pairs `(earlier, later)` into `events` consumed by each coincidence.
pub fn coincidence_pairs(
    events: &[DetectionEvent],
    timing: &TimingConfig,
) -> Result<Vec<(usize, usize)>, TimetagError> {
    timing.validate()?;
    check_sorted(events)?;
    let mut filter = CoincidenceFilter::new(events.iter().copied(), timing);
    let mut out = Vec::new();
    while let Some((a, b, _)) = filter.next_indexed() {
        out.push((a, b));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MonitorVerdict {
    Ok,
    Alarm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub verdict: MonitorVerdict,
    pub cross_arm_count: u64,
    pub threshold: u64,
}

/// State-purity check: any cross-arm coincidence above `threshold` raises
/// an alarm.
pub fn purity_monitor(coincidences: &[CoincidenceEvent], threshold: u64) -> MonitorReport {
    let cross_arm_count = coincidences.iter().filter(|c| c.pair.is_cross_arm()).count() as u64;
    MonitorReport::from_count(cross_arm_count, threshold)
}

impl MonitorReport {
    pub fn from_count(cross_arm_count: u64, threshold: u64) -> Self {
        let verdict = if cross_arm_count > threshold {
            MonitorVerdict::Alarm
        } else {
            MonitorVerdict::Ok
        };
        Self {
            verdict,
            cross_arm_count,
            threshold,
        }
    }
}
