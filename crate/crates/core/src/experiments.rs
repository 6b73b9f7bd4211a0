//! Monte Carlo harness: average slot DoF over Zipf request profiles, the
//! shared-cache (N_CMP) sweep, and the CMP/CD crossover search in C.
//!
//! Trial `t` of a run seeded with `s` always draws its requests from
//! `trial_rng(s, t)`. Runs with the same seed therefore share request
//! profiles (common random numbers), and results do not depend on how the
//! trials are scheduled across threads. Means are exact rationals.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coloring::{Coloring, ColoringError, ColoringMethod};
use crate::dof::{DofError, SlotResult};
use crate::hypergraph::{build_hypergraph, Hypergraph, HypergraphError};
use crate::model::{Availability, ModelError, RequestProfile, SystemConfig};
use crate::policies::{gd_allocate, BackhaulPolicy, CachePolicy, DownloadPlan, PolicyError};
use crate::popularity::{sample_requests, trial_rng, zipf_pmf, PopularityError};
use crate::scalar::{int_from_usize, ratio_to_f64, DofInt};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Popularity(#[from] PopularityError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Dof(#[from] DofError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Everything computed for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome<T: DofInt> {
    pub availability: Availability,
    pub plan: DownloadPlan,
    pub hypergraph: Hypergraph,
    pub coloring: Coloring,
    pub result: SlotResult<T>,
}

/// Backhaul allocation, hypergraph, coloring and slot DoF for one request
/// profile.
pub fn run_slot<T: DofInt>(
    caches: &Availability,
    requests: &RequestProfile,
    backhaul: &Ratio<T>,
    method: ColoringMethod,
) -> Result<SlotOutcome<T>, ExperimentError> {
    let (availability, plan) = gd_allocate(caches, requests, backhaul, method)?;
    let hypergraph = build_hypergraph(&availability, requests)?;
    let coloring = method.color(&hypergraph)?;
    let result = SlotResult::new(backhaul, plan.f_max(), coloring.num_colors())?;
    Ok(SlotOutcome { availability, plan, hypergraph, coloring, result })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord<T: DofInt> {
    pub trial: u64,
    pub requests: RequestProfile,
    pub chromatic: u32,
    pub f_max: usize,
    pub dof: Ratio<T>,
}

/// Sample statistics of a set of slot DoFs.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary<T: DofInt> {
    pub count: u64,
    pub mean: Ratio<T>,
    /// Unbiased sample variance, exact.
    pub variance: Ratio<T>,
    pub std: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
}

pub fn summarize<T: DofInt>(values: &[Ratio<T>]) -> Summary<T> {
    let n = values.len();
    if n == 0 {
        return Summary { count: 0, mean: Ratio::zero(), variance: Ratio::zero(), std: 0.0, ci95: 0.0 };
    }
    let count = Ratio::from_integer(int_from_usize::<T>(n));
    let mean = values.iter().fold(Ratio::zero(), |acc: Ratio<T>, v| acc + v) / count;
    let variance = if n > 1 {
        let ss = values.iter().fold(Ratio::zero(), |acc: Ratio<T>, v| {
            let d = v - &mean;
            acc + &d * &d
        });
        ss / Ratio::from_integer(int_from_usize::<T>(n - 1))
    } else {
        Ratio::zero()
    };
    let std = ratio_to_f64(&variance).sqrt();
    let ci95 = Z95 * std / (n as f64).sqrt();
    Summary { count: n as u64, mean, variance, std, ci95 }
}

/// Settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub backhaul: BackhaulPolicy,
    /// Used both inside Greedy Download and for the final slot coloring.
    pub coloring: ColoringMethod,
}

fn check_trials(trials: u64) -> Result<(), ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs `trials` independent slots under one caching policy.
pub fn simulate_trials<T: DofInt>(
    config: &SystemConfig<T>,
    cache: CachePolicy,
    trials: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Vec<TrialRecord<T>>, ExperimentError> {
    config.validate()?;
    check_trials(trials)?;
    let caches = cache.allocate(config.cache_size, config.library_size, config.num_bs)?;
    let pmf = zipf_pmf(config.library_size, config.zipf_exponent)?;
    match opts.backhaul {
        BackhaulPolicy::GreedyDownload => {}
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let requests = sample_requests(&pmf, config.num_ms, &mut trial_rng(seed, t));
            let slot = run_slot(&caches, &requests, &config.backhaul_dof, opts.coloring)?;
            Ok(TrialRecord {
                trial: t,
                requests,
                chromatic: slot.result.chromatic,
                f_max: slot.result.f_max,
                dof: slot.result.dof,
            })
        })
        .collect()
}

/// One aggregated output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T: DofInt> {
    pub experiment: String,
    pub gamma: f64,
    pub cache_size: usize,
    pub ncmp: usize,
    pub backhaul: Ratio<T>,
    pub trials: u64,
    pub seed: u64,
    pub mean: Ratio<T>,
    pub std: f64,
    pub ci95: f64,
}

impl<T: DofInt> SweepRow<T> {
    pub const CSV_HEADER: &'static str =
        "experiment,gamma,N,N_cmp,C,trials,seed,mean_dof_rational,mean_dof_decimal,std,ci95";

    pub fn mean_f64(&self) -> f64 {
        ratio_to_f64(&self.mean)
    }

    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.experiment,
            self.gamma,
            self.cache_size,
            self.ncmp,
            self.backhaul,
            self.trials,
            self.seed,
            self.mean,
            self.mean_f64(),
            self.std,
            self.ci95
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "gamma": self.gamma,
            "N": self.cache_size,
            "N_cmp": self.ncmp,
            "C": self.backhaul.to_string(),
            "trials": self.trials,
            "seed": self.seed,
            "mean_dof_rational": self.mean.to_string(),
            "mean_dof_decimal": self.mean_f64(),
            "std": self.std,
            "ci95": self.ci95,
        })
    }

    /// Lower and upper ends of the 95% interval.
    pub fn ci_bounds(&self) -> (f64, f64) {
        let m = self.mean_f64();
        (m - self.ci95, m + self.ci95)
    }

    /// Same numbers, ignoring the experiment label.
    pub fn same_values(&self, other: &Self) -> bool {
        self.gamma == other.gamma
            && self.cache_size == other.cache_size
            && self.ncmp == other.ncmp
            && self.backhaul == other.backhaul
            && self.trials == other.trials
            && self.seed == other.seed
            && self.mean == other.mean
            && self.std == other.std
            && self.ci95 == other.ci95
    }
}

fn row_from<T: DofInt>(
    experiment: &str,
    config: &SystemConfig<T>,
    cache: CachePolicy,
    records: &[TrialRecord<T>],
    seed: u64,
) -> SweepRow<T> {
    let dofs: Vec<Ratio<T>> = records.iter().map(|r| r.dof.clone()).collect();
    let s = summarize(&dofs);
    SweepRow {
        experiment: experiment.to_owned(),
        gamma: config.zipf_exponent,
        cache_size: config.cache_size,
        ncmp: cache.shared_files(config.cache_size),
        backhaul: config.backhaul_dof.clone(),
        trials: s.count,
        seed,
        mean: s.mean,
        std: s.std,
        ci95: s.ci95,
    }
}

/// Mean slot DoF of a caching policy under Greedy Download.
pub fn monte_carlo<T: DofInt>(
    config: &SystemConfig<T>,
    cache: CachePolicy,
    trials: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<SweepRow<T>, ExperimentError> {
    let records = simulate_trials(config, cache, trials, seed, opts)?;
    Ok(row_from("simulate", config, cache, &records, seed))
}

/// Best shared-cache size for one exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T: DofInt> {
    pub gamma: f64,
    pub ncmp: usize,
    pub mean: Ratio<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<T: DofInt> {
    pub rows: Vec<SweepRow<T>>,
    /// Per gamma, the N_CMP with the largest mean (smallest on ties).
    pub optima: Vec<Optimum<T>>,
}

/// Hybrid caching over each `(gamma, N_CMP)` pair with common request
/// profiles across N_CMP values.
pub fn sweep_ncmp<T: DofInt>(
    config: &SystemConfig<T>,
    ncmp_values: &[usize],
    gammas: &[f64],
    trials: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Sweep<T>, ExperimentError> {
    if ncmp_values.is_empty() || gammas.is_empty() {
        return Err(ExperimentError::InvalidArgument("sweep needs at least one N_CMP and one gamma".into()));
    }
    let mut rows = Vec::with_capacity(ncmp_values.len() * gammas.len());
    let mut optima = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let cfg = SystemConfig { zipf_exponent: gamma, ..config.clone() };
        let mut best: Option<Optimum<T>> = None;
        for &ncmp in ncmp_values {
            let cache = CachePolicy::Hybrid { ncmp };
            let records = simulate_trials(&cfg, cache, trials, seed, opts)?;
            let row = row_from("sweep-ncmp", &cfg, cache, &records, seed);
            if best.as_ref().is_none_or(|b| row.mean > b.mean) {
                best = Some(Optimum { gamma, ncmp, mean: row.mean.clone() });
            }
            rows.push(row);
        }
        optima.extend(best);
    }
    Ok(Sweep { rows, optima })
}

/// Search interval and resolution for the crossover in C.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSearch<T: DofInt> {
    pub c_min: Ratio<T>,
    pub c_max: Ratio<T>,
    pub tolerance: Ratio<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary<T: DofInt> {
    /// CMP trails CD at `lo` and matches or beats it at `hi`; `hi - lo`
    /// is within tolerance.
    Crossover { lo: Ratio<T>, hi: Ratio<T> },
    /// CMP already matches or beats CD at the bottom of the range.
    AtMinimum(Ratio<T>),
    /// CMP trails CD over the whole range.
    NotFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint<T: DofInt> {
    pub gamma: f64,
    pub cache_size: usize,
    pub boundary: Boundary<T>,
    pub steps: u32,
    pub trials: u64,
    pub seed: u64,
}

impl<T: DofInt> BoundaryPoint<T> {
    pub const CSV_HEADER: &'static str = "experiment,gamma,N,C_star,C_lo,C_hi,status,steps,trials,seed";

    /// Smallest examined C at which CMP is at least as good as CD.
    pub fn c_star(&self) -> Option<&Ratio<T>> {
        match &self.boundary {
            Boundary::Crossover { hi, .. } => Some(hi),
            Boundary::AtMinimum(c) => Some(c),
            Boundary::NotFound => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.boundary {
            Boundary::Crossover { .. } => "crossover",
            Boundary::AtMinimum(_) => "cmp-dominates-at-min",
            Boundary::NotFound => "no-crossover",
        }
    }

    fn bracket(&self) -> (Option<&Ratio<T>>, Option<&Ratio<T>>) {
        match &self.boundary {
            Boundary::Crossover { lo, hi } => (Some(lo), Some(hi)),
            Boundary::AtMinimum(c) => (Some(c), Some(c)),
            Boundary::NotFound => (None, None),
        }
    }

    pub fn csv_record(&self) -> String {
        let show = |r: Option<&Ratio<T>>| r.map(|r| r.to_string()).unwrap_or_default();
        let (lo, hi) = self.bracket();
        format!(
            "region,{},{},{},{},{},{},{},{},{}",
            self.gamma,
            self.cache_size,
            show(self.c_star()),
            show(lo),
            show(hi),
            self.status(),
            self.steps,
            self.trials,
            self.seed
        )
    }

    pub fn to_json(&self) -> Value {
        let show = |r: Option<&Ratio<T>>| r.map(|r| Value::String(r.to_string())).unwrap_or(Value::Null);
        let (lo, hi) = self.bracket();
        json!({
            "experiment": "region",
            "gamma": self.gamma,
            "N": self.cache_size,
            "C_star": show(self.c_star()),
            "C_lo": show(lo),
            "C_hi": show(hi),
            "status": self.status(),
            "steps": self.steps,
            "trials": self.trials,
            "seed": self.seed,
        })
    }
}

/// Mean DoF of CMP minus mean DoF of CD at backhaul `c`, common requests.
pub fn cmp_cd_gap<T: DofInt>(
    config: &SystemConfig<T>,
    c: &Ratio<T>,
    trials: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Ratio<T>, ExperimentError> {
    let cfg = SystemConfig { backhaul_dof: c.clone(), ..config.clone() };
    let cmp = monte_carlo(&cfg, CachePolicy::Cmp, trials, seed, opts)?;
    let cd = monte_carlo(&cfg, CachePolicy::Cd, trials, seed, opts)?;
    Ok(cmp.mean - cd.mean)
}

/// For every `(gamma, N)`, bisects C for the point where CMP stops
/// trailing CD. Assumes the gap is monotone in C.
pub fn region_boundary<T: DofInt>(
    config: &SystemConfig<T>,
    cache_sizes: &[usize],
    gammas: &[f64],
    search: &RegionSearch<T>,
    trials: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<Vec<BoundaryPoint<T>>, ExperimentError> {
    check_trials(trials)?;
    if search.c_min.is_negative() || search.c_max < search.c_min {
        return Err(ExperimentError::InvalidArgument("need 0 <= c_min <= c_max".into()));
    }
    if !search.tolerance.is_positive() {
        return Err(ExperimentError::InvalidArgument("tolerance must be positive".into()));
    }
    for &n in cache_sizes {
        if n * config.num_bs > config.library_size {
            return Err(PolicyError::LibraryTooSmall { needed: n * config.num_bs, f: config.library_size }.into());
        }
    }
    let two = Ratio::from_integer(int_from_usize::<T>(2));
    let mut points = Vec::with_capacity(cache_sizes.len() * gammas.len());
    for &gamma in gammas {
        for &n in cache_sizes {
            let cfg = SystemConfig { zipf_exponent: gamma, cache_size: n, ..config.clone() };
            let gap = |c: &Ratio<T>| cmp_cd_gap(&cfg, c, trials, seed, opts);
            let mut steps = 0u32;
            let boundary = if !gap(&search.c_min)?.is_negative() {
                Boundary::AtMinimum(search.c_min.clone())
            } else if gap(&search.c_max)?.is_negative() {
                Boundary::NotFound
            } else {
                let (mut lo, mut hi) = (search.c_min.clone(), search.c_max.clone());
                while &hi - &lo > search.tolerance {
                    let mid = (&lo + &hi) / &two;
                    if gap(&mid)?.is_negative() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    steps += 1;
                }
                Boundary::Crossover { lo, hi }
            };
            points.push(BoundaryPoint { gamma, cache_size: n, boundary, steps, trials, seed });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;
    use crate::policies::{cache_cd, cache_cmp};

    type R = Ratio<i128>;

    fn reference_config(c: R, gamma: f64) -> SystemConfig<i128> {
        SystemConfig {
            num_bs: 5,
            num_ms: 5,
            library_size: 60,
            cache_size: 12,
            backhaul_dof: c,
            zipf_exponent: gamma,
        }
    }

    #[test]
    fn fix_c_slot() {
        let caches = Availability::from_lists([vec![1], vec![1]]);
        let slot = run_slot(&caches, &RequestProfile::new(vec![1, 2]), &R::one(), ColoringMethod::default()).unwrap();
        assert_eq!((slot.result.chromatic, slot.result.f_max, slot.result.dof), (1, 1, R::one()));
    }

    #[test]
    fn cd_slots_are_one_fifth() {
        let caches = cache_cd(12, 60, 5).unwrap();
        for reqs in [vec![1, 2, 3, 4, 5], vec![1, 1, 1, 1, 1], vec![60, 13, 25, 37, 49]] {
            let slot = run_slot(&caches, &RequestProfile::new(reqs), &R::new(1, 7), ColoringMethod::default()).unwrap();
            assert_eq!(slot.result.dof, R::new(1, 5));
            assert_eq!(slot.result.f_max, 0);
        }
    }

    #[test]
    fn cmp_slot_without_misses_is_full_rate() {
        let caches = cache_cmp(12, 60, 5).unwrap();
        let slot =
            run_slot(&caches, &RequestProfile::new(vec![12, 3, 3, 7, 1]), &R::zero(), ColoringMethod::default())
                .unwrap();
        assert_eq!(slot.result.dof, R::one());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[R::new(1, 2), R::new(1, 2)]);
        assert_eq!(s.mean, R::new(1, 2));
        assert_eq!(s.variance, R::zero());
        let s = summarize(&[R::zero(), R::one()]);
        assert_eq!(s.mean, R::new(1, 2));
        assert_eq!(s.variance, R::new(1, 2));
        assert!((s.ci95 - 1.96 * 0.5f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(summarize::<i128>(&[R::one()]).std, 0.0);
    }

    #[test]
    fn single_file_library_is_full_rate() {
        let cfg = SystemConfig { library_size: 1, cache_size: 1, ..reference_config(R::one(), 2.5) };
        let row = monte_carlo(&cfg, CachePolicy::Cmp, 50, 3, SimOptions::default()).unwrap();
        assert_eq!(row.mean, R::one());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(monte_carlo(&reference_config(R::one(), 1.0), CachePolicy::Cd, 0, 3, SimOptions::default()).is_err());
    }

    #[test]
    fn csv_row_format() {
        let row = monte_carlo(&reference_config(R::one(), 0.5), CachePolicy::Cd, 20, 11, SimOptions::default()).unwrap();
        assert_eq!(row.csv_record(), "simulate,0.5,12,0,1,20,11,1/5,0.200000,0.000000,0.000000");
        assert_eq!(row.to_json()["mean_dof_rational"], "1/5");
    }

    #[test]
    fn sweep_endpoints_match_standalone_runs() {
        let cfg = reference_config(R::one(), 1.0);
        let opts = SimOptions::default();
        let sweep = sweep_ncmp(&cfg, &[0, 6, 12], &[1.0], 60, 5, opts).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        let cd = monte_carlo(&cfg, CachePolicy::Cd, 60, 5, opts).unwrap();
        let cmp = monte_carlo(&cfg, CachePolicy::Cmp, 60, 5, opts).unwrap();
        assert!(sweep.rows[0].same_values(&cd));
        assert!(sweep.rows[2].same_values(&cmp));
        assert_eq!(sweep.optima.len(), 1);
        let best = sweep.rows.iter().map(|r| r.mean).max().unwrap();
        assert_eq!(sweep.optima[0].mean, best);
    }

    #[test]
    fn region_degenerate_and_open_cases() {
        let opts = SimOptions::default();
        // uniform requests almost always miss a 12-file CMP cache, so at C = 0
        // CMP cannot reach CD's 1/5
        let cfg = reference_config(R::zero(), 0.0);
        let search = RegionSearch { c_min: R::zero(), c_max: R::zero(), tolerance: R::new(1, 2) };
        let pts = region_boundary(&cfg, &[12], &[0.0], &search, 40, 1, opts).unwrap();
        assert_eq!(pts[0].boundary, Boundary::NotFound);
        assert_eq!(pts[0].c_star(), None);
        // C = 5 saturates CMP
        let search = RegionSearch { c_min: R::from_integer(5), c_max: R::from_integer(6), tolerance: R::new(1, 2) };
        let pts = region_boundary(&cfg, &[12], &[1.0], &search, 40, 1, opts).unwrap();
        assert_eq!(pts[0].boundary, Boundary::AtMinimum(R::from_integer(5)));
        assert_eq!(pts[0].steps, 0);
    }

    #[test]
    fn region_rejects_bad_arguments() {
        let opts = SimOptions::default();
        let cfg = reference_config(R::one(), 1.0);
        let ok = RegionSearch { c_min: R::zero(), c_max: R::one(), tolerance: R::new(1, 4) };
        assert!(region_boundary(&cfg, &[13], &[1.0], &ok, 10, 1, opts).is_err());
        let bad_tol = RegionSearch { tolerance: R::zero(), ..ok.clone() };
        assert!(region_boundary(&cfg, &[12], &[1.0], &bad_tol, 10, 1, opts).is_err());
        let inverted = RegionSearch { c_min: R::one(), c_max: R::zero(), ..ok };
        assert!(region_boundary(&cfg, &[12], &[1.0], &inverted, 10, 1, opts).is_err());
    }
}
