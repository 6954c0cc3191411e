//! Sampled spectra shared between campaigns. Replicates are drawn in
//! parallel and collected in replicate order, so contents never depend on
//! the thread count.

use std::collections::BTreeMap;

use circlaw::{sample_spectrum, Spectrum64};
use rayon::prelude::*;

use crate::error::LabResult;

#[derive(Debug, Default)]
pub struct SpectrumBank {
    seed: u64,
    reps: usize,
    spectra: BTreeMap<usize, Vec<Spectrum64>>,
}

impl SpectrumBank {
    pub fn new(seed: u64, reps: usize) -> Self {
        Self {
            seed,
            reps,
            spectra: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    /// A bank with fewer replicates, sharing whatever is already sampled.
    pub fn truncated(&self, reps: usize) -> Self {
        let reps = reps.min(self.reps);
        Self {
            seed: self.seed,
            reps,
            spectra: self.spectra.iter().map(|(&n, v)| (n, v[..reps].to_vec())).collect(),
        }
    }

    /// Replicates `0..reps` at size `n`, sampled on first use.
    pub fn get(&mut self, n: usize) -> LabResult<&[Spectrum64]> {
        if !self.spectra.contains_key(&n) {
            let seed = self.seed;
            let drawn = (0..self.reps as u64)
                .into_par_iter()
                .map(|r| sample_spectrum::<f64>(n, seed, r))
                .collect::<Result<Vec<_>, _>>()?;
            self.spectra.insert(n, drawn);
        }
        Ok(&self.spectra[&n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_keeps_the_leading_replicates() {
        let mut big = SpectrumBank::new(3, 4);
        let first = big.get(5).unwrap().to_vec();
        let mut small = big.truncated(2);
        assert_eq!(small.reps(), 2);
        assert_eq!(small.get(5).unwrap(), &first[..2]);
        let mut fresh = SpectrumBank::new(3, 2);
        assert_eq!(small.get(6).unwrap(), fresh.get(6).unwrap());
    }
}
