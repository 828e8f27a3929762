//! Float helpers missing from `core`.
#![allow(dead_code)]

pub(crate) trait RemEuclid {
    fn rem_euclid(self, m: Self) -> Self;
}

impl RemEuclid for f64 {
    #[inline]
    fn rem_euclid(self, m: f64) -> f64 {
        let r = libm::fmod(self, m);
        if r < 0.0 {
            r + m.abs()
        } else {
            r
        }
    }
}
