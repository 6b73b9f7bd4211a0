//! Identifiers, configuration and per-slot instance types.
//!
//! File ids are 1-based and ordered by decreasing popularity (file 1 is the
//! most popular). BS and MS indices are 0-based inside the library; the CLI
//! and JSON reports print them 1-based.

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::scalar::{parse_rational, DofInt};

/// 1-based file identifier; smaller ids are more popular.
pub type FileId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {what} has {found} entries, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("file id out of range: {what} references file {file}, library has files 1..={library}")]
    FileOutOfRange { what: String, file: FileId, library: usize },
    #[error("negative parameter: {0}")]
    NegativeParameter(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Network dimensions and caching/backhaul parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T: DofInt> {
    /// M
    pub num_bs: usize,
    /// K
    pub num_ms: usize,
    /// F
    pub library_size: usize,
    /// N, files per cache
    pub cache_size: usize,
    /// C, backhaul capacity in DoF units
    pub backhaul_dof: Ratio<T>,
    /// gamma
    pub zipf_exponent: f64,
}

impl<T: DofInt> SystemConfig<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_bs == 0 {
            return Err(ModelError::InvalidParameter("M must be at least 1".into()));
        }
        if self.num_ms == 0 {
            return Err(ModelError::InvalidParameter("K must be at least 1".into()));
        }
        if self.library_size == 0 {
            return Err(ModelError::InvalidParameter("F must be at least 1".into()));
        }
        if self.cache_size > self.library_size {
            return Err(ModelError::InvalidParameter(format!(
                "N = {} exceeds F = {}",
                self.cache_size, self.library_size
            )));
        }
        if self.backhaul_dof.is_negative() {
            return Err(ModelError::NegativeParameter("C"));
        }
        if self.zipf_exponent.is_nan() {
            return Err(ModelError::InvalidParameter("gamma is NaN".into()));
        }
        if self.zipf_exponent < 0.0 {
            return Err(ModelError::NegativeParameter("gamma"));
        }
        Ok(())
    }
}

/// Files held by each BS in a slot: cached files plus backhaul downloads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Availability {
    per_bs_files: Vec<BTreeSet<FileId>>,
}

impl Availability {
    pub fn new(per_bs_files: Vec<BTreeSet<FileId>>) -> Self {
        Self { per_bs_files }
    }

    pub fn empty(num_bs: usize) -> Self {
        Self { per_bs_files: vec![BTreeSet::new(); num_bs] }
    }

    pub fn from_lists<I, J>(lists: I) -> Self
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = FileId>,
    {
        Self::new(lists.into_iter().map(|l| l.into_iter().collect()).collect())
    }

    pub fn num_bs(&self) -> usize {
        self.per_bs_files.len()
    }

    pub fn files(&self, bs: usize) -> &BTreeSet<FileId> {
        &self.per_bs_files[bs]
    }

    pub fn per_bs(&self) -> &[BTreeSet<FileId>] {
        &self.per_bs_files
    }

    pub fn holds(&self, bs: usize, file: FileId) -> bool {
        self.per_bs_files[bs].contains(&file)
    }

    pub fn insert(&mut self, bs: usize, file: FileId) -> bool {
        self.per_bs_files[bs].insert(file)
    }

    /// Union of every BS's file set.
    pub fn all_files(&self) -> BTreeSet<FileId> {
        self.per_bs_files.iter().flatten().copied().collect()
    }

    /// Bitmask of the BSs holding `file`. Requires at most 64 BSs.
    pub fn holder_mask(&self, file: FileId) -> u64 {
        debug_assert!(self.num_bs() <= 64);
        self.per_bs_files
            .iter()
            .enumerate()
            .filter(|(_, set)| set.contains(&file))
            .fold(0u64, |mask, (m, _)| mask | (1u64 << m))
    }
}

/// The file requested by each MS in a slot. Duplicates are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestProfile {
    request_of_ms: Vec<FileId>,
}

impl RequestProfile {
    pub fn new(request_of_ms: Vec<FileId>) -> Self {
        Self { request_of_ms }
    }

    pub fn num_ms(&self) -> usize {
        self.request_of_ms.len()
    }

    pub fn file_of(&self, ms: usize) -> FileId {
        self.request_of_ms[ms]
    }

    pub fn as_slice(&self) -> &[FileId] {
        &self.request_of_ms
    }

    /// The set of distinct requested files.
    pub fn requested_files(&self) -> BTreeSet<FileId> {
        self.request_of_ms.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T: DofInt> {
    pub config: SystemConfig<T>,
    pub availability: Availability,
    pub requests: RequestProfile,
}

impl<T: DofInt> Instance<T> {
    pub fn new(config: SystemConfig<T>, availability: Availability, requests: RequestProfile) -> Self {
        Self { config, availability, requests }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        validate_instance(self)
    }
}

/// Checks every type invariant, reporting the first violation.
pub fn validate_instance<T: DofInt>(instance: &Instance<T>) -> Result<(), ModelError> {
    let cfg = &instance.config;
    cfg.validate()?;
    if instance.availability.num_bs() != cfg.num_bs {
        return Err(ModelError::DimensionMismatch {
            what: "availability",
            expected: cfg.num_bs,
            found: instance.availability.num_bs(),
        });
    }
    if instance.requests.num_ms() != cfg.num_ms {
        return Err(ModelError::DimensionMismatch {
            what: "requests",
            expected: cfg.num_ms,
            found: instance.requests.num_ms(),
        });
    }
    let in_range = |f: FileId| f >= 1 && (f as usize) <= cfg.library_size;
    for (m, files) in instance.availability.per_bs().iter().enumerate() {
        if let Some(&bad) = files.iter().find(|&&f| !in_range(f)) {
            return Err(ModelError::FileOutOfRange {
                what: format!("availability of BS {}", m + 1),
                file: bad,
                library: cfg.library_size,
            });
        }
    }
    for (k, &f) in instance.requests.as_slice().iter().enumerate() {
        if !in_range(f) {
            return Err(ModelError::FileOutOfRange {
                what: format!("request of MS {}", k + 1),
                file: f,
                library: cfg.library_size,
            });
        }
    }
    Ok(())
}

fn de_opt_rational<'de, D>(deserializer: D) -> Result<Option<String>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(serde_json::Number),
    }
    Ok(Option::<Raw>::deserialize(deserializer)?.map(|raw| match raw {
        Raw::Text(s) => s,
        Raw::Number(n) => n.to_string(),
    }))
}

/// On-disk JSON form of an instance.
///
/// `C` is carried as text (`"3/10"`, `"0.3"`, `"1"`); a bare JSON number is
/// accepted and read through its decimal representation. `availability` and
/// `requests` may be omitted when a caching policy generates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "M")]
    pub num_bs: usize,
    #[serde(rename = "K")]
    pub num_ms: usize,
    #[serde(rename = "F")]
    pub library_size: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub cache_size: Option<usize>,
    #[serde(rename = "C", default, deserialize_with = "de_opt_rational", skip_serializing_if = "Option::is_none")]
    pub backhaul_dof: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability: Option<Vec<Vec<FileId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests: Option<Vec<FileId>>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Parsed `C`, if present.
    pub fn backhaul<T: DofInt>(&self) -> Result<Option<Ratio<T>>, ModelError> {
        self.backhaul_dof
            .as_deref()
            .map(|s| parse_rational(s).map_err(|e| ModelError::InvalidParameter(format!("C: {e}"))))
            .transpose()
    }

    /// Config with defaults `N = 0`, `C = 0`, `gamma = 0` for absent fields.
    pub fn config<T: DofInt>(&self) -> Result<SystemConfig<T>, ModelError> {
        let cfg = SystemConfig {
            num_bs: self.num_bs,
            num_ms: self.num_ms,
            library_size: self.library_size,
            cache_size: self.cache_size.unwrap_or(0),
            backhaul_dof: self.backhaul()?.unwrap_or_else(Ratio::zero),
            zipf_exponent: self.gamma.unwrap_or(0.0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a full instance; `availability` and `requests` must be present.
    pub fn instance<T: DofInt>(&self) -> Result<Instance<T>, ModelError> {
        let config = self.config()?;
        let availability = self
            .availability
            .as_ref()
            .ok_or_else(|| ModelError::InvalidParameter("missing availability".into()))?;
        let requests = self
            .requests
            .as_ref()
            .ok_or_else(|| ModelError::InvalidParameter("missing requests".into()))?;
        let instance = Instance::new(
            config,
            Availability::from_lists(availability.iter().map(|l| l.iter().copied())),
            RequestProfile::new(requests.clone()),
        );
        validate_instance(&instance)?;
        Ok(instance)
    }

    pub fn from_instance<T: DofInt>(instance: &Instance<T>) -> Self {
        let cfg = &instance.config;
        Self {
            num_bs: cfg.num_bs,
            num_ms: cfg.num_ms,
            library_size: cfg.library_size,
            cache_size: Some(cfg.cache_size),
            backhaul_dof: Some(cfg.backhaul_dof.to_string()),
            gamma: Some(cfg.zipf_exponent),
            availability: Some(
                instance.availability.per_bs().iter().map(|s| s.iter().copied().collect()).collect(),
            ),
            requests: Some(instance.requests.as_slice().to_vec()),
        }
    }
}

/// Canonical small instances with hand-checked structure.
pub mod fixtures {
    use super::*;

    fn config<T: DofInt>(m: usize, k: usize, f: usize, c: Ratio<T>) -> SystemConfig<T> {
        SystemConfig {
            num_bs: m,
            num_ms: k,
            library_size: f,
            cache_size: 0,
            backhaul_dof: c,
            zipf_exponent: 0.0,
        }
    }

    /// Six BSs and six MSs, MS k requesting file k. {MS1,MS2,MS3} is the only
    /// independent triple; every pair is independent; chromatic number 3.
    pub fn fix_a<T: DofInt>() -> Instance<T> {
        Instance::new(
            config(6, 6, 6, Ratio::zero()),
            Availability::from_lists([
                vec![1, 2, 3, 4, 5],
                vec![1, 2, 3, 5, 6],
                vec![1, 2, 3, 4, 6],
                vec![4, 5],
                vec![5, 6],
                vec![4, 6],
            ]),
            RequestProfile::new(vec![1, 2, 3, 4, 5, 6]),
        )
    }

    /// Two disjoint clusters: BS1..BS3 hold {1,2,3}, BS4..BS5 hold {4,5}.
    pub fn fix_b<T: DofInt>() -> Instance<T> {
        Instance::new(
            config(5, 5, 5, Ratio::zero()),
            Availability::from_lists([
                vec![1, 2, 3],
                vec![1, 2, 3],
                vec![1, 2, 3],
                vec![4, 5],
                vec![4, 5],
            ]),
            RequestProfile::new(vec![1, 2, 3, 4, 5]),
        )
    }

    /// Two BSs caching file 1, MSs requesting files 1 and 2, backhaul `c`.
    pub fn fix_c<T: DofInt>(c: Ratio<T>) -> Instance<T> {
        let mut cfg = config(2, 2, 2, c);
        cfg.cache_size = 1;
        Instance::new(
            cfg,
            Availability::from_lists([vec![1], vec![1]]),
            RequestProfile::new(vec![1, 2]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    type R = Ratio<i64>;

    #[test]
    fn fixtures_validate() {
        assert_eq!(validate_instance(&fix_a::<i64>()), Ok(()));
        assert_eq!(validate_instance(&fix_b::<i64>()), Ok(()));
        assert_eq!(validate_instance(&fix_c::<i64>(R::new(3, 10))), Ok(()));
    }

    #[test]
    fn request_beyond_library_is_out_of_range() {
        let mut inst = fix_a::<i64>();
        inst.requests = RequestProfile::new(vec![7, 2, 3, 4, 5, 6]);
        let err = validate_instance(&inst).unwrap_err();
        assert!(matches!(err, ModelError::FileOutOfRange { file: 7, .. }));
        assert!(err.to_string().contains("file id out of range"));
    }

    #[test]
    fn file_zero_is_out_of_range() {
        let mut inst = fix_b::<i64>();
        inst.availability.insert(0, 0);
        assert!(matches!(validate_instance(&inst), Err(ModelError::FileOutOfRange { file: 0, .. })));
    }

    #[test]
    fn missing_bs_is_dimension_mismatch() {
        let mut inst = fix_c::<i64>(R::from_integer(1));
        inst.config.num_bs = 3;
        let err = validate_instance(&inst).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"));
    }

    #[test]
    fn request_count_mismatch() {
        let mut inst = fix_b::<i64>();
        inst.requests = RequestProfile::new(vec![1, 2]);
        assert!(matches!(
            validate_instance(&inst),
            Err(ModelError::DimensionMismatch { what: "requests", expected: 5, found: 2 })
        ));
    }

    #[test]
    fn each_broken_parameter_is_rejected() {
        let base = fix_a::<i64>();
        type Mutation = Box<dyn Fn(&mut Instance<i64>)>;
        let mutations: Vec<Mutation> = vec![
            Box::new(|i| i.config.num_bs = 0),
            Box::new(|i| i.config.num_ms = 0),
            Box::new(|i| i.config.library_size = 0),
            Box::new(|i| i.config.cache_size = 7),
            Box::new(|i| i.config.backhaul_dof = R::new(-1, 2)),
            Box::new(|i| i.config.zipf_exponent = -0.5),
            Box::new(|i| i.config.zipf_exponent = f64::NAN),
            Box::new(|i| i.config.library_size = 5),
        ];
        for mutate in mutations {
            let mut inst = base.clone();
            mutate(&mut inst);
            assert!(validate_instance(&inst).is_err(), "{:?}", inst.config);
        }
        let mut neg = base.clone();
        neg.config.backhaul_dof = R::new(-1, 1);
        assert_eq!(validate_instance(&neg), Err(ModelError::NegativeParameter("C")));
    }

    #[test]
    fn instance_file_round_trip_and_c_forms() {
        let text = r#"{"M":2,"K":2,"F":2,"N":1,"C":"3/10","gamma":1.0,
                       "availability":[[1],[1]],"requests":[1,2]}"#;
        let doc = InstanceFile::from_json(text).unwrap();
        let inst: Instance<i64> = doc.instance().unwrap();
        assert_eq!(inst, {
            let mut f = fix_c::<i64>(R::new(3, 10));
            f.config.zipf_exponent = 1.0;
            f
        });
        let again = InstanceFile::from_json(&serde_json::to_string(&InstanceFile::from_instance(&inst)).unwrap())
            .unwrap();
        assert_eq!(again.instance::<i64>().unwrap(), inst);

        let numeric = InstanceFile::from_json(r#"{"M":1,"K":1,"F":1,"C":0.25}"#).unwrap();
        assert_eq!(numeric.backhaul::<i64>().unwrap(), Some(R::new(1, 4)));
        let absent = InstanceFile::from_json(r#"{"M":1,"K":1,"F":1}"#).unwrap();
        assert_eq!(absent.backhaul::<i64>().unwrap(), None);
        assert!(absent.instance::<i64>().is_err());
    }

    #[test]
    fn holder_mask_and_union() {
        let a = fix_a::<i64>().availability;
        assert_eq!(a.holder_mask(1), 0b000111);
        assert_eq!(a.holder_mask(6), 0b110110);
        assert_eq!(a.all_files().len(), 6);
    }
}
