use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::risk::{path_risk_from_states, RiskModel, RiskTable};
use crate::workspace::Path;

/// Trials per random sub-stream. Chunk `j` draws from stream `j` of the
/// master seed, so counts do not depend on the number of worker threads.
pub const TRIALS_PER_STREAM: u64 = 4096;

pub const GENERATOR: &str = "ChaCha8 (rand_chacha), one stream per 4096-trial chunk";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub failures: u64,
    pub empirical_failure_rate: f64,
    /// Failures by the state at which the trial failed.
    pub failure_histogram: Vec<u64>,
    /// Per-state failure probabilities the trials were drawn from.
    pub hazards: Vec<f64>,
    /// Exact failure probability of the whole path.
    pub path_risk: f64,
    pub rng_seed: u64,
    pub generator: String,
}

impl SimulationReport {
    /// Trials that reached each state.
    pub fn arrivals(&self) -> Vec<u64> {
        let mut left = self.trials;
        self.failure_histogram
            .iter()
            .map(|&f| {
                let here = left;
                left -= f;
                here
            })
            .collect()
    }

    /// `index,hazard,arrivals,failures` per state.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("index,hazard,arrivals,failures\n");
        for (i, (a, f)) in self.arrivals().iter().zip(&self.failure_histogram).enumerate() {
            writeln!(out, "{i},{},{a},{f}", self.hazards[i]).unwrap();
        }
        out
    }
}

/// Walks `path` `trials` times, failing at each state with its state risk
/// evaluated on the full prefix.
pub fn simulate_path(path: &Path, model: &RiskModel, trials: u64, seed: u64) -> Result<SimulationReport> {
    model.path_risk(path)?;
    let hazards: Vec<f64> = model
        .per_state(path.states())?
        .iter()
        .map(|s| s.state_risk.get())
        .collect();
    simulate_hazards(&hazards, trials, seed)
}

/// Simulation directly from per-state failure probabilities.
pub fn simulate_hazards(hazards: &[f64], trials: u64, seed: u64) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Precondition("simulation needs at least one trial".into()));
    }
    if hazards.is_empty() {
        return Err(Error::Precondition("simulation needs at least one state".into()));
    }
    if let Some(h) = hazards.iter().find(|h| !(0.0..=1.0).contains(*h)) {
        return Err(Error::Precondition(format!("state risk {h} outside [0, 1]")));
    }
    let chunks = trials.div_ceil(TRIALS_PER_STREAM);
    let histogram = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let n = TRIALS_PER_STREAM.min(trials - j * TRIALS_PER_STREAM);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j);
            let mut bins = vec![0u64; hazards.len()];
            for _ in 0..n {
                if let Some(i) = hazards.iter().position(|&h| rng.random::<f64>() < h) {
                    bins[i] += 1;
                }
            }
            bins
        })
        .reduce(
            || vec![0u64; hazards.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let failures = histogram.iter().sum();
    Ok(SimulationReport {
        trials,
        failures,
        empirical_failure_rate: failures as f64 / trials as f64,
        failure_histogram: histogram,
        hazards: hazards.to_vec(),
        path_risk: path_risk_from_states(hazards).get(),
        rng_seed: seed,
        generator: GENERATOR.into(),
    })
}

/// Simulation of a tabulated path, drawing from its `State` column.
pub fn simulate_table(table: &RiskTable, trials: u64, seed: u64) -> Result<SimulationReport> {
    let hazards: Vec<f64> = table.listed_states().iter().map(|r| r.get()).collect();
    simulate_hazards(&hazards, trials, seed)
}

/// Central `level` band of the failure rate over `batches` independent
/// groups of `batch_size` trials each.
pub fn batch_failure_band(hazards: &[f64], batch_size: u64, batches: u64, level: f64, seed: u64) -> Result<(f64, f64)> {
    if batch_size == 0 || batches == 0 || !(0.0..1.0).contains(&level) {
        return Err(Error::Precondition(
            "batch band needs positive sizes and a level in [0, 1)".into(),
        ));
    }
    let mut rates: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let failures = (0..batch_size)
                .filter(|_| hazards.iter().any(|&h| rng.random::<f64>() < h))
                .count();
            failures as f64 / batch_size as f64
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| rates[((q * (batches - 1) as f64).round() as usize).min(rates.len() - 1)];
    Ok((at(tail), at(1.0 - tail)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedState {
    pub index: usize,
    pub hazard: f64,
    pub arrivals: u64,
    pub failures: u64,
    /// Failures among trials that reached this state.
    pub conditional_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSummary {
    /// States with at least one failure, most failures first.
    pub by_failures: Vec<RankedState>,
    /// The same states, highest conditional failure rate first.
    pub by_conditional_rate: Vec<RankedState>,
    /// Spearman correlation of hazard against conditional failure rate.
    pub hazard_rank_correlation: Option<f64>,
}

/// Where the simulated trials failed, and how that tracks the state risks.
pub fn failure_location_summary(report: &SimulationReport) -> FailureSummary {
    let states: Vec<RankedState> = report
        .arrivals()
        .into_iter()
        .zip(&report.failure_histogram)
        .enumerate()
        .filter(|(_, (_, &f))| f > 0)
        .map(|(index, (arrivals, &failures))| RankedState {
            index,
            hazard: report.hazards[index],
            arrivals,
            failures,
            conditional_rate: failures as f64 / arrivals as f64,
        })
        .collect();
    let mut by_failures = states.clone();
    by_failures.sort_by(|a, b| b.failures.cmp(&a.failures).then(a.index.cmp(&b.index)));
    let mut by_conditional_rate = states.clone();
    by_conditional_rate.sort_by(|a, b| {
        b.conditional_rate
            .total_cmp(&a.conditional_rate)
            .then(a.index.cmp(&b.index))
    });
    let hazard: Vec<f64> = states.iter().map(|s| s.hazard).collect();
    let rate: Vec<f64> = states.iter().map(|s| s.conditional_rate).collect();
    FailureSummary {
        by_failures,
        by_conditional_rate,
        hazard_rank_correlation: spearman(&hazard, &rate),
    }
}

/// Average ranks, ties sharing the mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_risk_never_fails() {
        let r = simulate_hazards(&[0.0; 5], 10_000, 1).unwrap();
        assert_eq!(r.failures, 0);
        assert!(failure_location_summary(&r).by_failures.is_empty());
    }

    #[test]
    fn certain_failure_at_first_state() {
        let r = simulate_hazards(&[1.0], 777, 3).unwrap();
        assert_eq!(r.failure_histogram, vec![777]);
        let s = failure_location_summary(&r);
        assert_eq!(s.by_failures[0].index, 0);
        assert_eq!(s.hazard_rank_correlation, None);
    }

    #[test]
    fn seeded_and_chunk_stable() {
        let h = [0.1, 0.2, 0.05];
        let a = simulate_hazards(&h, 10_001, 42).unwrap();
        let b = simulate_hazards(&h, 10_001, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failure_histogram.iter().sum::<u64>(), a.failures);
        assert_ne!(a, simulate_hazards(&h, 10_001, 43).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| simulate_hazards(&h, 10_001, 42).unwrap());
        assert_eq!(a, single);
    }

    #[test]
    fn arrivals_and_csv() {
        let r = simulate_hazards(&[0.5, 0.5], 1000, 9).unwrap();
        let arr = r.arrivals();
        assert_eq!(arr[0], 1000);
        assert_eq!(arr[1], 1000 - r.failure_histogram[0]);
        assert_eq!(r.histogram_csv().lines().count(), 3);
    }

    #[test]
    fn rank_correlation() {
        assert_eq!(ranks(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.5, 3.0, 1.5]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(simulate_hazards(&[0.1], 0, 1).is_err());
        assert!(simulate_hazards(&[], 10, 1).is_err());
        assert!(simulate_hazards(&[1.5], 10, 1).is_err());
    }
}
