//! Points, finitely supported measures, test regions and spectra.
//!
//! Angles follow the convention `arg z ∈ (0, 2π]`, so the positive real axis
//! has argument `2π`. Ring membership `⌊√n |z|⌋` snaps values within a few
//! ulps of an integer up to that integer, which keeps lattice points that sit
//! exactly on a ring boundary in the higher ring.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::spiral::lattice_index;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexPoint<T> {
    re: T,
    im: T,
}

impl<T: Real> ComplexPoint<T> {
    pub fn new(re: T, im: T) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            domain(format!("non-finite point ({re}, {im})"))
        }
    }

    pub fn origin() -> Self {
        Self {
            re: T::zero(),
            im: T::zero(),
        }
    }

    pub fn from_polar(radius: T, angle: T) -> Result<Self> {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub(crate) fn new_unchecked(re: T, im: T) -> Self {
        debug_assert!(re.is_finite() && im.is_finite());
        Self { re, im }
    }

    #[inline]
    pub fn re(&self) -> T {
        self.re
    }

    #[inline]
    pub fn im(&self) -> T {
        self.im
    }

    #[inline]
    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    #[inline]
    pub fn modulus(&self) -> T {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn modulus_sqr(&self) -> T {
        self.re * self.re + self.im * self.im
    }

    /// Argument in `(0, 2π]`. The origin reports `2π`; callers that care
    /// treat the origin separately.
    #[inline]
    pub fn arg(&self) -> T {
        arg_2pi(self.re, self.im)
    }

    #[inline]
    pub fn dist(&self, other: &Self) -> T {
        (self.re - other.re).hypot(self.im - other.im)
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.re == T::zero() && self.im == T::zero()
    }
}

/// `atan2` folded into `(0, 2π]`.
#[inline]
pub fn arg_2pi<T: Real>(re: T, im: T) -> T {
    let a = im.atan2(re);
    if a <= T::zero() {
        a + T::TAU()
    } else {
        a
    }
}

/// `⌊√n · modulus⌋`, with near-integers snapped upward.
#[inline]
pub fn ring_index<T: Real>(modulus: T, n: usize) -> usize {
    let t = modulus * T::of(n).sqrt();
    let r = t.round();
    let snapped = if (t - r).abs() <= T::lit(16.0) * T::epsilon() * r.max(T::one()) {
        r
    } else {
        t.floor()
    };
    snapped.to_usize().unwrap_or(usize::MAX)
}

/// A probability measure with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    atoms: Vec<ComplexPoint<T>>,
    weights: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    /// Builds the measure, renormalizing the weights to total mass one.
    pub fn new(atoms: Vec<ComplexPoint<T>>, weights: Vec<T>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return domain(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            ));
        }
        if atoms.is_empty() {
            return domain("empty measure");
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= T::zero())) {
            return domain(format!("invalid weight {w}"));
        }
        let total = crate::special::compensated_sum(weights.iter().copied());
        if total <= T::zero() {
            return domain("weights sum to zero");
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Vec<ComplexPoint<T>>) -> Result<Self> {
        if atoms.is_empty() {
            return domain("empty measure");
        }
        let w = T::of(atoms.len()).recip();
        let weights = vec![w; atoms.len()];
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[ComplexPoint<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every weight equals `1/len` to within a few ulps.
    pub fn is_uniform(&self) -> bool {
        let w = T::of(self.len()).recip();
        let tol = T::lit(64.0) * T::epsilon() * w;
        self.weights.iter().all(|x| (*x - w).abs() <= tol)
    }
}

/// Measurable test sets used for counting statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region<T> {
    /// Closed disc `|z| ≤ radius`.
    Disc { radius: T },
    /// `|z| > radius`.
    DiscComplement { radius: T },
    /// Closed annulus `inner ≤ |z| ≤ outer`.
    Annulus { inner: T, outer: T },
    /// The lattice cell `S_k` of ring `ℓ - 1`, angles `[2π(q-1), 2πq] / (2ℓ-1)`.
    Sector { k: usize, n: usize },
    /// Points preceding `(j/√n) e^{iθ}` in spiral order: the disc of radius
    /// `j/√n` plus the part of ring `j` with argument in `(0, θ]`.
    InitialSegment { j: usize, theta: T, n: usize },
}

impl<T: Real> Region<T> {
    pub fn disc(radius: T) -> Result<Self> {
        Self::Disc { radius }.validated()
    }

    pub fn disc_complement(radius: T) -> Result<Self> {
        Self::DiscComplement { radius }.validated()
    }

    pub fn annulus(inner: T, outer: T) -> Result<Self> {
        Self::Annulus { inner, outer }.validated()
    }

    pub fn sector(k: usize, n: usize) -> Result<Self> {
        Self::Sector { k, n }.validated()
    }

    pub fn initial_segment(j: usize, theta: T, n: usize) -> Result<Self> {
        Self::InitialSegment { j, theta, n }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let radius_ok = |r: T| r.is_finite() && r >= T::zero();
        match *self {
            Region::Disc { radius } | Region::DiscComplement { radius } => {
                if !radius_ok(radius) {
                    return domain(format!("invalid radius {radius}"));
                }
            }
            Region::Annulus { inner, outer } => {
                if !(radius_ok(inner) && radius_ok(outer) && inner <= outer) {
                    return domain(format!("invalid annulus [{inner}, {outer}]"));
                }
            }
            Region::Sector { k, n } => {
                if k == 0 || k > n {
                    return domain(format!("sector index {k} outside 1..={n}"));
                }
            }
            Region::InitialSegment { j, theta, n } => {
                if j == 0 || n == 0 {
                    return domain(format!("initial segment needs j ≥ 1 and n ≥ 1 (j={j}, n={n})"));
                }
                if !(theta > T::zero() && theta <= T::TAU()) {
                    return domain(format!("initial segment angle {theta} outside (0, 2π]"));
                }
            }
        }
        Ok(())
    }

    /// Lebesgue area; infinite for a disc complement.
    pub fn area(&self) -> Result<T> {
        self.validate()?;
        let pi = T::PI();
        Ok(match *self {
            Region::Disc { radius } => pi * radius * radius,
            Region::DiscComplement { .. } => T::infinity(),
            Region::Annulus { inner, outer } => pi * (outer * outer - inner * inner),
            Region::Sector { n, .. } => pi / T::of(n),
            Region::InitialSegment { j, theta, n } => {
                if j * j >= n {
                    return domain(format!(
                        "initial segment j={j} is not below √n for n={n}"
                    ));
                }
                let jj = T::of(j);
                let frac = theta / T::TAU();
                pi / T::of(n) * (jj * jj + frac * (T::lit(2.0) * jj + T::one()))
            }
        })
    }

    pub fn contains(&self, z: &ComplexPoint<T>) -> bool {
        match *self {
            Region::Disc { radius } => z.modulus() <= radius,
            Region::DiscComplement { radius } => z.modulus() > radius,
            Region::Annulus { inner, outer } => {
                let r = z.modulus();
                inner <= r && r <= outer
            }
            Region::Sector { k, n } => {
                let idx = lattice_index(k);
                if ring_index(z.modulus(), n) != idx.ell - 1 {
                    return false;
                }
                if idx.ell == 1 {
                    return true;
                }
                let (lo, hi) = sector_angles::<T>(idx.ell, idx.q);
                let a = z.arg();
                lo <= a && a <= hi
            }
            Region::InitialSegment { j, theta, n } => {
                if z.is_origin() {
                    return true;
                }
                let ring = ring_index(z.modulus(), n);
                ring < j || (ring == j && z.arg() <= theta)
            }
        }
    }
}

/// Angular extent `[2π(q-1)/(2ℓ-1), 2πq/(2ℓ-1)]` of a lattice cell, with the
/// last cell of a ring closing exactly at `2π`.
pub(crate) fn sector_angles<T: Real>(ell: usize, q: usize) -> (T, T) {
    let width = T::of(2 * ell - 1);
    let lo = T::TAU() * T::of(q - 1) / width;
    let hi = if q == 2 * ell - 1 {
        T::TAU()
    } else {
        T::TAU() * T::of(q) / width
    };
    (lo, hi)
}

/// Normalized eigenvalues of one sampled matrix plus their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<ComplexPoint<T>>,
    trace: Complex<T>,
    seed: u64,
    replicate: u64,
}

impl<T: Real> Spectrum<T> {
    /// Spectrum with no external trace to check against (synthetic fixtures,
    /// files); the recorded trace is the eigenvalue sum.
    pub fn new(eigenvalues: Vec<ComplexPoint<T>>, seed: u64, replicate: u64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return domain("spectrum needs at least one eigenvalue");
        }
        let trace = eigen_sum(&eigenvalues);
        Ok(Self {
            eigenvalues,
            trace,
            seed,
            replicate,
        })
    }

    /// Spectrum whose eigenvalue sum must reproduce `normalized_trace`
    /// (the matrix trace divided by `√n`).
    pub fn with_trace(
        eigenvalues: Vec<ComplexPoint<T>>,
        normalized_trace: Complex<T>,
        seed: u64,
        replicate: u64,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return domain("spectrum needs at least one eigenvalue");
        }
        let sum = eigen_sum(&eigenvalues);
        let scale = eigenvalues
            .iter()
            .map(|z| z.modulus())
            .fold(normalized_trace.norm(), |a, b| a + b)
            .max(T::one());
        let err = (sum - normalized_trace).norm();
        if err > T::identity_tolerance() * scale {
            return Err(Error::Certification(format!(
                "trace identity violated: |Σλ - tr/√n| = {err:e} (seed {seed}, replicate {replicate})"
            )));
        }
        Ok(Self {
            eigenvalues,
            trace: normalized_trace,
            seed,
            replicate,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[ComplexPoint<T>] {
        &self.eigenvalues
    }

    pub fn normalized_trace(&self) -> Complex<T> {
        self.trace
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    /// `N(A)`, the number of eigenvalues in `region`.
    pub fn count_in(&self, region: &Region<T>) -> usize {
        self.eigenvalues.iter().filter(|z| region.contains(z)).count()
    }

    pub fn to_measure(&self) -> DiscreteMeasure<T> {
        DiscreteMeasure::uniform(self.eigenvalues.clone()).expect("spectrum is non-empty")
    }

    pub(crate) fn with_order(&self, eigenvalues: Vec<ComplexPoint<T>>) -> Self {
        debug_assert_eq!(eigenvalues.len(), self.eigenvalues.len());
        Self {
            eigenvalues,
            trace: self.trace,
            seed: self.seed,
            replicate: self.replicate,
        }
    }
}

fn eigen_sum<T: Real>(z: &[ComplexPoint<T>]) -> Complex<T> {
    let re = crate::special::compensated_sum(z.iter().map(|p| p.re()));
    let im = crate::special::compensated_sum(z.iter().map(|p| p.im()));
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pt(re: f64, im: f64) -> ComplexPoint<f64> {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn arg_convention() {
        assert_eq!(pt(1.0, 0.0).arg(), 2.0 * PI);
        assert_eq!(pt(1.0, -0.0).arg(), 2.0 * PI);
        assert!((pt(0.0, 1.0).arg() - PI / 2.0).abs() < 1e-15);
        assert!((pt(-1.0, -0.0).arg() - PI).abs() < 1e-15);
        assert!((pt(0.0, -1.0).arg() - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ComplexPoint::new(f64::NAN, 0.0).is_err());
        assert!(ComplexPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn area_examples() {
        assert!((Region::disc(1.0).unwrap().area().unwrap() - PI).abs() < 1e-15);
        let seg = Region::initial_segment(2, 2.0 * PI, 16).unwrap();
        assert!((seg.area().unwrap() - 9.0 * PI / 16.0).abs() < 1e-14);
        for k in 1..=16 {
            let a = Region::<f64>::sector(k, 16).unwrap().area().unwrap();
            assert!((a - PI / 16.0).abs() < 1e-15);
        }
        assert!(Region::initial_segment(4, 1.0, 16).unwrap().area().is_err());
        assert!(Region::<f64>::disc_complement(2.0).unwrap().area().unwrap().is_infinite());
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(Region::disc(-1.0).is_err());
        assert!(Region::annulus(0.6, 0.5).is_err());
        assert!(Region::<f64>::sector(0, 4).is_err());
        assert!(Region::<f64>::sector(5, 4).is_err());
        assert!(Region::initial_segment(0, 1.0, 16).is_err());
        assert!(Region::initial_segment(1, 0.0, 16).is_err());
        assert!(Region::initial_segment(1, 7.0, 16).is_err());
    }

    #[test]
    fn containment_examples() {
        assert!(Region::disc(1.0).unwrap().contains(&pt(0.0, 0.0)));
        // |z| = 0.3 ∈ [1/4, 2/4) and arg = π/2 ≤ π.
        let seg = Region::initial_segment(1, PI, 16).unwrap();
        assert!(seg.contains(&ComplexPoint::from_polar(0.3, PI / 2.0).unwrap()));
        assert!(!seg.contains(&ComplexPoint::from_polar(0.3, 1.5 * PI).unwrap()));
        // positive real axis has argument 2π, only in full segments
        assert!(!seg.contains(&pt(0.3, 0.0)));
        let full = Region::initial_segment(1, 2.0 * PI, 16).unwrap();
        assert!(full.contains(&pt(0.3, 0.0)));
        assert!(!Region::annulus(0.5, 1.0).unwrap().contains(&pt(0.25, 0.0)));
    }

    #[test]
    fn synthetic_counts() {
        let s = Spectrum::new(vec![pt(0.1, 0.0), pt(0.0, 0.5), pt(0.9, 0.0)], 0, 0).unwrap();
        assert_eq!(s.count_in(&Region::disc(0.6).unwrap()), 2);
        assert_eq!(s.count_in(&Region::disc_complement(2.0).unwrap()), 0);
        assert_eq!(s.count_in(&Region::disc(1e6).unwrap()), 3);
    }

    #[test]
    fn sectors_tile_the_disc() {
        for &n in &[1usize, 4, 9, 16, 25, 64] {
            let total: f64 = (1..=n)
                .map(|k| Region::<f64>::sector(k, n).unwrap().area().unwrap())
                .sum();
            assert!((total - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn full_segment_equals_next_disc() {
        for &n in &[16usize, 64, 100, 256] {
            let root = (n as f64).sqrt() as usize;
            for j in 1..root {
                let seg = Region::initial_segment(j, 2.0 * PI, n).unwrap().area().unwrap();
                let disc = Region::disc((j + 1) as f64 / (n as f64).sqrt())
                    .unwrap()
                    .area()
                    .unwrap();
                assert!((seg - disc).abs() < 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn measure_renormalizes_and_rejects_negative() {
        let m = DiscreteMeasure::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)], vec![1.0, 3.0]).unwrap();
        assert!((m.weights()[0] - 0.25).abs() < 1e-15);
        let total: f64 = m.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(DiscreteMeasure::new(vec![pt(0.0, 0.0)], vec![-1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![pt(0.0, 0.0)], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn trace_identity_is_enforced() {
        let ev = vec![pt(0.5, 0.0), pt(-0.25, 0.1)];
        assert!(Spectrum::with_trace(ev.clone(), Complex::new(0.25, 0.1), 1, 2).is_ok());
        assert!(Spectrum::with_trace(ev, Complex::new(0.3, 0.1), 1, 2).is_err());
    }

    proptest! {
        #[test]
        fn disc_annulus_decomposition_adds_up(
            pts in proptest::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 1..60),
            r1 in 0.05f64..0.6,
            dr in 0.05f64..0.8,
        ) {
            let ev: Vec<_> = pts.iter().map(|&(a, b)| pt(a, b)).collect();
            let s = Spectrum::new(ev, 0, 0).unwrap();
            let r2 = r1 + dr;
            let disc = s.count_in(&Region::disc(r1).unwrap());
            let ring = s.count_in(&Region::annulus(r1, r2).unwrap());
            let outer = s.count_in(&Region::disc(r2).unwrap());
            let on_boundary = s.eigenvalues().iter().filter(|z| z.modulus() == r1).count();
            prop_assert_eq!(disc + ring - on_boundary, outer);
            let out = s.count_in(&Region::disc_complement(r2).unwrap());
            prop_assert_eq!(outer + out, s.n());
        }
    }
}
