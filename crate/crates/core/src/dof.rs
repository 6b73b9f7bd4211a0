//! Per-MS degrees of freedom of a slot.
//!
//! With `X` orthogonally scheduled independent sets each MS gets `1/X` of the
//! resources. When some requested file travels over the backhaul, the rate is
//! further capped by `C / f_max`, where `f_max` is the heaviest per-link load.

use num_rational::Ratio;
use num_traits::One;
use thiserror::Error;

use crate::scalar::{int_from_usize, DofInt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DofError {
    #[error("chromatic number must be at least 1")]
    ZeroChromatic,
}

/// `1 / X`.
pub fn downlink_dof<T: DofInt>(chromatic: u32) -> Result<Ratio<T>, DofError> {
    if chromatic == 0 {
        return Err(DofError::ZeroChromatic);
    }
    Ok(Ratio::new(T::one(), int_from_usize(chromatic as usize)))
}

/// `min(C / f_max, 1 / X)`; the backhaul term is inactive when nothing was
/// downloaded (`f_max = 0`).
pub fn slot_dof<T: DofInt>(backhaul: &Ratio<T>, f_max: usize, chromatic: u32) -> Result<Ratio<T>, DofError> {
    let downlink = downlink_dof(chromatic)?;
    if f_max == 0 {
        return Ok(downlink);
    }
    let cap = backhaul / Ratio::from_integer(int_from_usize::<T>(f_max));
    Ok(cap.min(downlink))
}

/// Outcome of one slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlotResult<T: DofInt> {
    pub chromatic: u32,
    pub f_max: usize,
    pub dof: Ratio<T>,
}

impl<T: DofInt> SlotResult<T> {
    pub fn new(backhaul: &Ratio<T>, f_max: usize, chromatic: u32) -> Result<Self, DofError> {
        Ok(Self { chromatic, f_max, dof: slot_dof(backhaul, f_max, chromatic)? })
    }

    pub fn is_full_rate(&self) -> bool {
        self.dof.is_one()
    }
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;

    type R = Ratio<i64>;

    #[test]
    fn downlink_examples() {
        assert_eq!(downlink_dof::<i64>(3), Ok(R::new(1, 3)));
        assert_eq!(downlink_dof::<i64>(1), Ok(R::one()));
        assert_eq!(downlink_dof::<i64>(5), Ok(R::new(1, 5)));
        assert_eq!(downlink_dof::<i64>(0), Err(DofError::ZeroChromatic));
    }

    #[test]
    fn slot_examples() {
        assert_eq!(slot_dof(&R::one(), 2, 3), Ok(R::new(1, 3)));
        assert_eq!(slot_dof(&R::new(1234, 7), 0, 2), Ok(R::new(1, 2)));
        assert_eq!(slot_dof(&R::zero(), 0, 2), Ok(R::new(1, 2)));
        assert_eq!(slot_dof(&R::new(3, 10), 1, 1), Ok(R::new(3, 10)));
        assert_eq!(slot_dof(&R::zero(), 3, 1), Ok(R::zero()));
    }

    #[test]
    fn monotone_on_grid() {
        let cs: Vec<R> = (0..=12).map(|n| R::new(n, 4)).collect();
        for x in 1..=6u32 {
            for f in 0..=6usize {
                for w in cs.windows(2) {
                    assert!(slot_dof(&w[0], f, x).unwrap() <= slot_dof(&w[1], f, x).unwrap());
                }
                for c in &cs {
                    let here = slot_dof(c, f, x).unwrap();
                    assert!(here <= downlink_dof(x).unwrap());
                    if f >= 1 {
                        assert!(slot_dof(c, f + 1, x).unwrap() <= slot_dof(c, f, x).unwrap());
                    }
                    assert!(slot_dof(c, f, x + 1).unwrap() <= here);
                }
            }
        }
    }

    #[test]
    fn slot_result_wraps_dof() {
        let r = SlotResult::new(&R::from_integer(5), 5, 1).unwrap();
        assert!(r.is_full_rate());
        assert_eq!(SlotResult::new(&R::one(), 0, 0), Err(DofError::ZeroChromatic));
    }
}
