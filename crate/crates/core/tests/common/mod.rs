//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's hypergraph or coloring code.

#![allow(dead_code)]

use hyperdof::model::{Availability, FileId, Instance, RequestProfile, SystemConfig};
use hyperdof::Ratio;
use rand::Rng;

/// Plain-vector view of an instance: `holds[m][f]`, `requests[k]`.
pub struct Plain {
    pub holds: Vec<Vec<bool>>,
    pub requests: Vec<usize>,
}

impl Plain {
    pub fn of(inst: &Instance<i64>) -> Self {
        let f = inst.config.library_size;
        let holds = (0..inst.config.num_bs)
            .map(|m| (0..=f).map(|file| inst.availability.holds(m, file as FileId)).collect())
            .collect();
        let requests = inst.requests.as_slice().iter().map(|&x| x as usize).collect();
        Self { holds, requests }
    }

    pub fn num_ms(&self) -> usize {
        self.requests.len()
    }

    /// Literal reading of the definition: some group of |e| distinct BSs in
    /// which every BS holds every file requested by the MSs of `e`.
    pub fn independent(&self, e: u64) -> bool {
        let size = e.count_ones();
        let ms: Vec<usize> = (0..self.num_ms()).filter(|k| e >> k & 1 == 1).collect();
        let m = self.holds.len();
        (0u64..(1u64 << m)).filter(|g| g.count_ones() == size).any(|group| {
            (0..m)
                .filter(|b| group >> b & 1 == 1)
                .all(|b| ms.iter().all(|&k| self.holds[b][self.requests[k]]))
        })
    }

    /// Every non-independent subset with only independent proper subsets.
    pub fn minimal_edges(&self) -> Vec<u64> {
        let k = self.num_ms();
        let indep: Vec<bool> = (0u64..(1u64 << k)).map(|s| s == 0 || self.independent(s)).collect();
        let mut edges: Vec<u64> = (1u64..(1u64 << k))
            .filter(|&s| !indep[s as usize])
            .filter(|&s| proper_subsets(s).all(|t| indep[t as usize]))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Fewest independent sets partitioning the MSs, by enumerating every
    /// assignment of MSs to `c` classes for increasing `c`. `None` when some
    /// MS cannot be served at all.
    pub fn chromatic(&self) -> Option<u32> {
        let k = self.num_ms();
        let indep: Vec<bool> = (0u64..(1u64 << k)).map(|s| s == 0 || self.independent(s)).collect();
        if (0..k).any(|v| !indep[1 << v]) {
            return None;
        }
        for c in 1..=k as u32 {
            let mut assign = vec![0u32; k];
            loop {
                let mut classes = vec![0u64; c as usize];
                for (v, &a) in assign.iter().enumerate() {
                    classes[a as usize] |= 1 << v;
                }
                if classes.iter().all(|&m| indep[m as usize]) {
                    return Some(c);
                }
                // odometer increment
                let mut i = 0;
                while i < k {
                    assign[i] += 1;
                    if assign[i] < c {
                        break;
                    }
                    assign[i] = 0;
                    i += 1;
                }
                if i == k {
                    break;
                }
            }
        }
        unreachable!("singletons are independent so K colors always suffice")
    }
}

/// Non-empty proper subsets of `s`.
pub fn proper_subsets(s: u64) -> impl Iterator<Item = u64> {
    let mut t = s;
    std::iter::from_fn(move || {
        t = (t.wrapping_sub(1)) & s;
        if t == 0 {
            None
        } else {
            Some(t)
        }
    })
}

/// Every superset of `s` inside a `k`-vertex universe.
pub fn supersets(s: u64, k: usize) -> impl Iterator<Item = u64> {
    (0u64..(1u64 << k)).filter(move |&t| t & s == s)
}

/// Random instance with M, K <= 6 and F <= 8.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance<i64> {
    let m = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=6);
    let f = rng.gen_range(1..=8usize);
    let density: f64 = rng.gen_range(0.2..0.9);
    let availability = Availability::from_lists((0..m).map(|_| {
        (1..=f as FileId).filter(|_| rng.gen_bool(density)).collect::<Vec<_>>()
    }));
    let requests = RequestProfile::new((0..k).map(|_| rng.gen_range(1..=f as FileId)).collect());
    Instance::new(
        SystemConfig {
            num_bs: m,
            num_ms: k,
            library_size: f,
            cache_size: 0,
            backhaul_dof: Ratio::from_integer(1),
            zipf_exponent: 0.0,
        },
        availability,
        requests,
    )
}

/// Same as [`random_instance`] but with every requested file held by at
/// least one BS, so colorings exist.
pub fn random_servable_instance<R: Rng>(rng: &mut R) -> Instance<i64> {
    let mut inst = random_instance(rng);
    let m = inst.config.num_bs;
    for &f in inst.requests.clone().as_slice() {
        if (0..m).all(|b| !inst.availability.holds(b, f)) {
            let b = rng.gen_range(0..m);
            inst.availability.insert(b, f);
        }
    }
    inst
}
