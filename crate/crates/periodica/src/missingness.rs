//! Weekday/weekend-stratified missing-at-random mask simulation and
//! missingness diagnostics.
//!
//! The simulator deletes a fixed share of entries from a complete series,
//! skewing the deletions toward weekends. Deleted truth values are kept in a
//! holdout map so imputations can be scored against them later.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Weekday};

/// Parameters of the stratified deletion mechanism.
#[derive(Debug, Clone, Copy)]
pub struct MarSpec {
    /// Fraction of all entries to delete, in [0, 1].
    pub total_rate: f64,
    /// Share of the deleted entries that fall on weekends, in [0, 1].
    pub weekend_share: f64,
    pub seed: u64,
}

impl MarSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.total_rate) || self.total_rate.is_nan() {
            return Err(Error::InvalidParam(format!(
                "total_rate {} outside [0, 1]",
                self.total_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.weekend_share) || self.weekend_share.is_nan() {
            return Err(Error::InvalidParam(format!(
                "weekend_share {} outside [0, 1]",
                self.weekend_share
            )));
        }
        Ok(())
    }
}

/// A series with injected gaps plus the held-out truth for those gaps.
#[derive(Debug, Clone)]
pub struct MaskedSeries {
    pub observed: TimeSeries,
    /// index -> true value for every masked entry.
    pub holdout: BTreeMap<usize, f64>,
    /// mask[i] is true iff entry i was deleted by the simulator.
    pub mask: Vec<bool>,
    pub warnings: Vec<String>,
}

impl MaskedSeries {
    /// Reassembles an observed-with-gaps series and a separately supplied
    /// holdout map (the no-simulation path).
    pub fn from_parts(observed: TimeSeries, holdout: BTreeMap<usize, f64>) -> Result<Self> {
        let mut mask = vec![false; observed.len()];
        for (&i, v) in &holdout {
            if i >= observed.len() {
                return Err(Error::InvalidParam(format!(
                    "holdout index {i} out of range"
                )));
            }
            if observed.get(i).is_some() {
                return Err(Error::InvalidParam(format!(
                    "holdout index {i} is not missing in the observed series"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "non-finite holdout value at index {i}"
                )));
            }
            mask[i] = true;
        }
        Ok(Self {
            observed,
            holdout,
            mask,
            warnings: Vec::new(),
        })
    }

    pub fn n_masked(&self) -> usize {
        self.holdout.len()
    }

    /// Restores the holdout values, reproducing the pre-deletion series.
    pub fn restore(&self) -> TimeSeries {
        let values: Vec<Option<f64>> = (0..self.observed.len())
            .map(|i| match self.observed.get(i) {
                Some(v) => Some(v),
                None => self.holdout.get(&i).copied(),
            })
            .collect();
        self.observed
            .with_values(values)
            .expect("restore preserves length and finiteness")
    }
}

/// Per-weekday missingness counts and gap structure.
#[derive(Debug, Clone, Serialize)]
pub struct MissingnessReport {
    pub total: usize,
    pub rate: f64,
    /// Counts indexed Sunday..Saturday; serialized as {Sun..Sat} keys.
    #[serde(serialize_with = "weekday_counts_as_map")]
    pub by_weekday: [usize; 7],
    /// Longest run of consecutive missing days.
    pub longest_gap: usize,
}

fn weekday_counts_as_map<S>(
    counts: &[usize; 7],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    use serde::ser::SerializeMap;
    let mut map = serializer.serialize_map(Some(7))?;
    for day in Weekday::ALL {
        map.serialize_entry(day.abbrev(), &counts[day.index()])?;
    }
    map.end()
}

impl MissingnessReport {
    pub fn count(&self, day: Weekday) -> usize {
        self.by_weekday[day.index()]
    }

    pub fn weekend_total(&self) -> usize {
        self.count(Weekday::Saturday) + self.count(Weekday::Sunday)
    }
}

/// Deletes entries from a complete series under the stratified mechanism.
///
/// Exactly `round(total_rate * n)` entries are masked; of those,
/// `round(weekend_share * n_miss)` fall on weekends, the rest on weekdays.
/// When a stratum has too few days the shortfall spills into the other
/// stratum and a warning is recorded. Rounding is half-to-even. Selection is
/// uniform without replacement within each stratum and deterministic for a
/// given seed.
pub fn apply_mar_mask(series: &TimeSeries, spec: &MarSpec) -> Result<MaskedSeries> {
    spec.validate()?;
    if !series.is_complete() {
        return Err(Error::AlreadyMissing);
    }

    let n = series.len();
    let n_miss = (spec.total_rate * n as f64).round_ties_even() as usize;
    let weekend_target = (spec.weekend_share * n_miss as f64).round_ties_even() as usize;

    let mut weekend_pool: Vec<usize> = Vec::new();
    let mut weekday_pool: Vec<usize> = Vec::new();
    for i in 0..n {
        if series.weekday_at(i).is_weekend() {
            weekend_pool.push(i);
        } else {
            weekday_pool.push(i);
        }
    }

    let mut warnings = Vec::new();
    let mut weekend_quota = weekend_target.min(n_miss);
    let mut weekday_quota = n_miss - weekend_quota;
    if weekend_quota > weekend_pool.len() {
        let spill = weekend_quota - weekend_pool.len();
        weekend_quota = weekend_pool.len();
        weekday_quota += spill;
        warnings.push(format!(
            "weekend stratum short by {spill} days; spilled into weekdays"
        ));
    }
    if weekday_quota > weekday_pool.len() {
        let spill = weekday_quota - weekday_pool.len();
        weekday_quota = weekday_pool.len();
        weekend_quota += spill;
        warnings.push(format!(
            "weekday stratum short by {spill} days; spilled into weekends"
        ));
        if weekend_quota > weekend_pool.len() {
            // total_rate <= 1 makes this unreachable; guard anyway.
            weekend_quota = weekend_pool.len();
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut masked_indices: Vec<usize> = Vec::with_capacity(n_miss);
    for (pool, quota) in [(&weekend_pool, weekend_quota), (&weekday_pool, weekday_quota)] {
        let picks = rand::seq::index::sample(&mut rng, pool.len(), quota);
        masked_indices.extend(picks.iter().map(|j| pool[j]));
    }

    let mut values: Vec<Option<f64>> = series.values().to_vec();
    let mut holdout = BTreeMap::new();
    let mut mask = vec![false; n];
    for &i in &masked_indices {
        let truth = values[i].expect("series verified complete");
        holdout.insert(i, truth);
        mask[i] = true;
        values[i] = None;
    }

    let observed = series.with_values(values)?;
    Ok(MaskedSeries {
        observed,
        holdout,
        mask,
        warnings,
    })
}

/// Counts missing entries per weekday and the longest consecutive gap.
pub fn describe_missingness(series: &TimeSeries) -> MissingnessReport {
    let mut counts = [0usize; 7];
    let mut total = 0usize;
    let mut longest = 0usize;
    let mut run = 0usize;
    for i in 0..series.len() {
        if series.get(i).is_none() {
            total += 1;
            counts[series.weekday_at(i).index()] += 1;
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    MissingnessReport {
        total,
        rate: total as f64 / series.len() as f64,
        by_weekday: counts,
        longest_gap: longest,
    }
}
