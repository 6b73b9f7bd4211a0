//! Cache placement (CMP, CD, HC) and the Greedy Download backhaul policy.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::coloring::{ColoringError, ColoringMethod};
use crate::dof::{slot_dof, DofError};
use crate::hypergraph::{canonical_key, full_set, holder_masks, members, Hypergraph, HypergraphError, VertexSet};
use crate::model::{Availability, FileId, RequestProfile};
use crate::scalar::DofInt;

/// Largest BS count for the exhaustive subset search in [`gd_allocate`].
pub const GD_MAX_BS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("cache size N = {n} exceeds library size F = {f}")]
    CacheLargerThanLibrary { n: usize, f: usize },
    #[error("N_CMP = {ncmp} exceeds cache size N = {n}")]
    SharedExceedsCache { ncmp: usize, n: usize },
    #[error("distinct caching needs {needed} files but the library has {f}")]
    LibraryTooSmall { needed: usize, f: usize },
    #[error("greedy download supports at most {GD_MAX_BS} BSs, got {0}")]
    TooManyBs(usize),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Dof(#[from] DofError),
}

/// Every BS caches files `1..=N`.
pub fn cache_cmp(n: usize, f: usize, m: usize) -> Result<Availability, PolicyError> {
    if n > f {
        return Err(PolicyError::CacheLargerThanLibrary { n, f });
    }
    cache_hc(n, n, f, m)
}

/// BS m (1-based) caches the m-th block of N files; needs `M * N <= F`.
pub fn cache_cd(n: usize, f: usize, m: usize) -> Result<Availability, PolicyError> {
    cache_hc(n, 0, f, m)
}

/// All BSs share files `1..=N_CMP`; each BS then takes its own block of
/// `N - N_CMP` files following the shared prefix.
pub fn cache_hc(n: usize, ncmp: usize, f: usize, m: usize) -> Result<Availability, PolicyError> {
    if ncmp > n {
        return Err(PolicyError::SharedExceedsCache { ncmp, n });
    }
    let distinct = n - ncmp;
    let needed = ncmp + m * distinct;
    if n > f {
        return Err(PolicyError::CacheLargerThanLibrary { n, f });
    }
    if needed > f {
        return Err(PolicyError::LibraryTooSmall { needed, f });
    }
    let per_bs = (0..m)
        .map(|bs| {
            let start = ncmp + bs * distinct;
            (1..=ncmp).chain(start + 1..=start + distinct).map(|x| x as FileId).collect()
        })
        .collect();
    Ok(Availability::new(per_bs))
}

/// Long-timescale cache placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CachePolicy {
    /// Cache Most Popular.
    Cmp,
    /// Cache Distinct.
    Cd,
    /// Hybrid: `ncmp` shared files, the rest distinct.
    Hybrid { ncmp: usize },
}

impl CachePolicy {
    pub fn allocate(self, n: usize, f: usize, m: usize) -> Result<Availability, PolicyError> {
        match self {
            CachePolicy::Cmp => cache_cmp(n, f, m),
            CachePolicy::Cd => cache_cd(n, f, m),
            CachePolicy::Hybrid { ncmp } => cache_hc(n, ncmp, f, m),
        }
    }

    /// Number of files shared by all BSs for a cache of size `n`.
    pub fn shared_files(self, n: usize) -> usize {
        match self {
            CachePolicy::Cmp => n,
            CachePolicy::Cd => 0,
            CachePolicy::Hybrid { ncmp } => ncmp,
        }
    }
}

impl fmt::Display for CachePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CachePolicy::Cmp => f.write_str("cmp"),
            CachePolicy::Cd => f.write_str("cd"),
            CachePolicy::Hybrid { ncmp } => write!(f, "hc({ncmp})"),
        }
    }
}

/// Short-timescale backhaul policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackhaulPolicy {
    /// Greedy Download.
    #[default]
    GreedyDownload,
}

impl FromStr for BackhaulPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gd" | "greedy-download" => Ok(BackhaulPolicy::GreedyDownload),
            other => Err(format!("unknown backhaul policy {other:?}")),
        }
    }
}

/// Files sent over each backhaul link in one slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DownloadPlan {
    downloads_per_bs: Vec<BTreeSet<FileId>>,
}

impl DownloadPlan {
    pub fn empty(num_bs: usize) -> Self {
        Self { downloads_per_bs: vec![BTreeSet::new(); num_bs] }
    }

    pub fn downloads(&self, bs: usize) -> &BTreeSet<FileId> {
        &self.downloads_per_bs[bs]
    }

    pub fn per_bs(&self) -> &[BTreeSet<FileId>] {
        &self.downloads_per_bs
    }

    /// Heaviest backhaul link load.
    pub fn f_max(&self) -> usize {
        self.downloads_per_bs.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.downloads_per_bs.iter().all(BTreeSet::is_empty)
    }

    /// BSs receiving `file`.
    pub fn recipients(&self, file: FileId) -> Vec<usize> {
        (0..self.downloads_per_bs.len()).filter(|&m| self.downloads_per_bs[m].contains(&file)).collect()
    }
}

/// DoF of one tentative placement of a missing file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate<T: DofInt> {
    /// 0-based BS indices, ascending.
    pub bs: Vec<usize>,
    pub chromatic: u32,
    pub f_max: usize,
    pub dof: Ratio<T>,
}

/// One Greedy Download decision: every candidate examined and the winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GdStep<T: DofInt> {
    pub file: FileId,
    pub candidates: Vec<Candidate<T>>,
    pub chosen: usize,
}

impl<T: DofInt> GdStep<T> {
    pub fn chosen(&self) -> &Candidate<T> {
        &self.candidates[self.chosen]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GdOutcome<T: DofInt> {
    /// Caches plus downloads.
    pub availability: Availability,
    pub plan: DownloadPlan,
    pub steps: Vec<GdStep<T>>,
}

/// Requested files held by no cache, most popular first.
pub fn missing_files(caches: &Availability, requests: &RequestProfile) -> Vec<FileId> {
    let cached = caches.all_files();
    requests.requested_files().into_iter().filter(|f| !cached.contains(f)).collect()
}

/// Non-empty BS subsets ordered by size, then lexicographically.
fn candidate_subsets(num_bs: usize) -> Vec<VertexSet> {
    let mut subsets: Vec<VertexSet> = (1..=full_set(num_bs)).collect();
    subsets.sort_by_cached_key(|&s| canonical_key(s));
    subsets
}

/// Greedy Download with per-candidate traces.
///
/// Missing files are placed one at a time in popularity order. For each,
/// every non-empty BS subset is scored by the slot DoF that would result:
/// the file is added to those BSs, f_max counts it together with the
/// downloads already committed, and MSs whose files are still pending are
/// treated as servable by every BS. The highest DoF wins; ties go to the
/// smallest subset, then the lexicographically smallest.
pub fn gd_allocate_traced<T: DofInt>(
    caches: &Availability,
    requests: &RequestProfile,
    backhaul: &Ratio<T>,
    method: ColoringMethod,
) -> Result<GdOutcome<T>, PolicyError> {
    let m = caches.num_bs();
    let missing = missing_files(caches, requests);
    let mut availability = caches.clone();
    let mut plan = DownloadPlan::empty(m);
    let mut steps = Vec::with_capacity(missing.len());
    if missing.is_empty() {
        return Ok(GdOutcome { availability, plan, steps });
    }
    if m > GD_MAX_BS {
        return Err(PolicyError::TooManyBs(m));
    }

    let all_bs = full_set(m);
    let subsets = candidate_subsets(m);
    let mut holders = holder_masks(caches, requests)?;
    let mut load = vec![0usize; m];
    for (i, &file) in missing.iter().enumerate() {
        let pending: BTreeSet<FileId> = missing[i + 1..].iter().copied().collect();
        let mut scenario = holders.clone();
        for (k, &f) in requests.as_slice().iter().enumerate() {
            if pending.contains(&f) {
                scenario[k] = all_bs;
            }
        }
        let targets: Vec<usize> =
            (0..requests.num_ms()).filter(|&k| requests.file_of(k) == file).collect();

        let mut candidates = Vec::with_capacity(subsets.len());
        let mut chosen = 0usize;
        for &subset in &subsets {
            for &k in &targets {
                scenario[k] = subset;
            }
            let h = Hypergraph::from_holder_masks(&scenario)?;
            let chromatic = method.color(&h)?.num_colors();
            let f_max = (0..m)
                .map(|bs| load[bs] + usize::from(subset & (1u64 << bs) != 0))
                .max()
                .unwrap_or(0);
            let dof = slot_dof(backhaul, f_max, chromatic)?;
            if candidates.get(chosen).is_some_and(|best: &Candidate<T>| dof > best.dof) {
                chosen = candidates.len();
            }
            candidates.push(Candidate { bs: members(subset).collect(), chromatic, f_max, dof });
        }

        let winner = &candidates[chosen];
        for &bs in &winner.bs {
            load[bs] += 1;
            availability.insert(bs, file);
            plan.downloads_per_bs[bs].insert(file);
        }
        let winner_mask = winner.bs.iter().fold(0u64, |acc, &b| acc | (1u64 << b));
        for &k in &targets {
            holders[k] = winner_mask;
        }
        steps.push(GdStep { file, candidates, chosen });
    }
    Ok(GdOutcome { availability, plan, steps })
}

/// Greedy Download: returns the augmented availability and the plan.
pub fn gd_allocate<T: DofInt>(
    caches: &Availability,
    requests: &RequestProfile,
    backhaul: &Ratio<T>,
    method: ColoringMethod,
) -> Result<(Availability, DownloadPlan), PolicyError> {
    let out = gd_allocate_traced(caches, requests, backhaul, method)?;
    Ok((out.availability, out.plan))
}
