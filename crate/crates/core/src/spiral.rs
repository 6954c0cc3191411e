//! Spiral order, the predicted-location lattice and the reference measure.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{domain, Result};
use crate::ginibre::{stream, Purpose};
use crate::measures::{ring_index, sector_angles, ComplexPoint, DiscreteMeasure, Spectrum};
use crate::scalar::Real;
use crate::special::CompensatedSum;
use crate::transport::pow_cost;

/// Comparator data for the spiral order at scale `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpiralKey<T> {
    pub ring: usize,
    pub angle: T,
    pub modulus: T,
    pub is_origin: bool,
}

impl<T: Real> SpiralKey<T> {
    pub fn of(z: &ComplexPoint<T>, n: usize) -> Self {
        let modulus = z.modulus();
        Self {
            ring: ring_index(modulus, n),
            angle: z.arg(),
            modulus,
            is_origin: z.is_origin(),
        }
    }
}

/// The spiral order: the origin first, then ring `⌊√n|z|⌋`, then argument in
/// `(0, 2π]`, then modulus descending.
pub fn spiral_compare<T: Real>(w: &ComplexPoint<T>, z: &ComplexPoint<T>, n: usize) -> Ordering {
    compare_keys(&SpiralKey::of(w, n), &SpiralKey::of(z, n)).then_with(|| {
        // distinct points with identical keys only arise from rounding in
        // atan2/hypot; break the tie on coordinates so Equal means w == z
        w.re()
            .partial_cmp(&z.re())
            .unwrap_or(Ordering::Equal)
            .then(w.im().partial_cmp(&z.im()).unwrap_or(Ordering::Equal))
    })
}

fn compare_keys<T: Real>(a: &SpiralKey<T>, b: &SpiralKey<T>) -> Ordering {
    match (a.is_origin, b.is_origin) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    a.ring
        .cmp(&b.ring)
        .then(a.angle.partial_cmp(&b.angle).unwrap_or(Ordering::Equal))
        .then(b.modulus.partial_cmp(&a.modulus).unwrap_or(Ordering::Equal))
}

/// `k = (ell - 1)² + q` with `1 ≤ q ≤ 2 ell - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeIndex {
    pub k: usize,
    pub ell: usize,
    pub q: usize,
}

/// # Panics
/// If `k == 0`.
pub fn lattice_index(k: usize) -> LatticeIndex {
    assert!(k >= 1, "lattice index starts at 1");
    let ell = (k - 1).isqrt() + 1;
    let q = k - (ell - 1) * (ell - 1);
    LatticeIndex { k, ell, q }
}

/// `λ̃_k = ((ℓ-1)/√n) e^{2πiq/(2ℓ-1)}`. The last point of each ring sits
/// exactly on the positive real axis.
///
/// # Panics
/// Unless `1 ≤ k ≤ n`.
pub fn predicted_location<T: Real>(k: usize, n: usize) -> ComplexPoint<T> {
    assert!(k >= 1 && k <= n, "predicted location needs 1 ≤ k ≤ n (k={k}, n={n})");
    let LatticeIndex { ell, q, .. } = lattice_index(k);
    if ell == 1 {
        return ComplexPoint::origin();
    }
    let r = T::of(ell - 1) / T::of(n).sqrt();
    if q == 2 * ell - 1 {
        return ComplexPoint::new_unchecked(r, T::zero());
    }
    let angle = T::TAU() * T::of(q) / T::of(2 * ell - 1);
    ComplexPoint::new_unchecked(r * angle.cos(), r * angle.sin())
}

/// How many eigenvalues are left off the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MPolicy {
    /// `m = n - L²` with `L` the largest integer `≤ √n - √(ln n)`.
    Paper,
    /// `m = 0`; needs `n` to be a perfect square.
    Zero,
}

pub fn choose_m(n: usize) -> Result<usize> {
    if n < 2 {
        return domain(format!("choose_m needs n ≥ 2, got {n}"));
    }
    let nf = n as f64;
    let x = nf.sqrt() - nf.ln().sqrt();
    let mut l = if x >= 1.0 { x.floor() as usize } else { 0 };
    while l > 0 && (l as f64) > x {
        l -= 1;
    }
    while ((l + 1) as f64) <= x {
        l += 1;
    }
    if l == 0 {
        l = n.isqrt();
    }
    Ok(n - l * l)
}

pub fn m_for(n: usize, policy: MPolicy) -> Result<usize> {
    match policy {
        MPolicy::Paper => choose_m(n),
        MPolicy::Zero => {
            if is_square(n) {
                Ok(0)
            } else {
                domain(format!("m = 0 needs a perfect square n, got {n}"))
            }
        }
    }
}

pub fn is_square(n: usize) -> bool {
    let r = n.isqrt();
    r * r == n
}

/// `ν_n`: mass `1/n` on each of `λ̃_1..λ̃_{n-m}` and `m/n` spread uniformly on
/// the annulus `√(1 - m/n) ≤ |z| ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedMeasure<T> {
    n: usize,
    m: usize,
    lattice: Vec<ComplexPoint<T>>,
    annulus_inner: T,
}

impl<T: Real> PredictedMeasure<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lattice(&self) -> &[ComplexPoint<T>] {
        &self.lattice
    }

    pub fn annulus_inner(&self) -> T {
        self.annulus_inner
    }

    /// The lattice as a uniform discrete measure. Only meaningful when
    /// `m == 0`, where it is all of `ν_n`.
    pub fn lattice_measure(&self) -> Result<DiscreteMeasure<T>> {
        if self.m != 0 {
            return domain(format!(
                "ν_n has an annulus band of mass {}/{}; it is not discrete",
                self.m, self.n
            ));
        }
        DiscreteMeasure::uniform(self.lattice.clone())
    }

    /// A point drawn uniformly from the annulus band.
    pub fn sample_band<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexPoint<T> {
        let inner2 = self.annulus_inner * self.annulus_inner;
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let r = (inner2 + T::lit(u) * (T::one() - inner2)).sqrt();
        let angle = T::TAU() * T::lit(v);
        ComplexPoint::new_unchecked(r * angle.cos(), r * angle.sin())
    }
}

pub fn build_reference_measure<T: Real>(n: usize, m: usize) -> Result<PredictedMeasure<T>> {
    if n == 0 || m >= n {
        return domain(format!("reference measure needs 0 ≤ m < n (n={n}, m={m})"));
    }
    let size = n - m;
    if !is_square(size) {
        return domain(format!("n - m = {size} is not a perfect square"));
    }
    let lattice = (1..=size).map(|k| predicted_location(k, n)).collect();
    let annulus_inner = (T::one() - T::of(m) / T::of(n)).sqrt();
    Ok(PredictedMeasure {
        n,
        m,
        lattice,
        annulus_inner,
    })
}

pub fn sort_spectrum_spiral<T: Real>(s: &Spectrum<T>) -> Spectrum<T> {
    let n = s.n();
    let mut keyed: Vec<(SpiralKey<T>, ComplexPoint<T>)> = s
        .eigenvalues()
        .iter()
        .map(|z| (SpiralKey::of(z, n), *z))
        .collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        compare_keys(ka, kb).then_with(|| {
            a.re()
                .partial_cmp(&b.re())
                .unwrap_or(Ordering::Equal)
                .then(a.im().partial_cmp(&b.im()).unwrap_or(Ordering::Equal))
        })
    });
    s.with_order(keyed.into_iter().map(|(_, z)| z).collect())
}

/// p-th root cost of the spiral coupling between `μ_n` and `ν_n`: the k-th
/// eigenvalue in spiral order goes to `λ̃_k`, and the last `m` go to
/// independent uniform points of the annulus band (seeded by `seed` and the
/// spectrum's replicate).
pub fn spiral_coupling_cost<T: Real>(
    s: &Spectrum<T>,
    reference: &PredictedMeasure<T>,
    p: T,
    seed: u64,
) -> Result<T> {
    if !(p >= T::one() && p.is_finite()) {
        return domain(format!("p must be finite and ≥ 1, got {p}"));
    }
    if s.n() != reference.n {
        return domain(format!(
            "spectrum has {} eigenvalues but the reference measure is for n={}",
            s.n(),
            reference.n
        ));
    }
    let sorted = sort_spectrum_spiral(s);
    let ev = sorted.eigenvalues();
    let split = reference.lattice.len();
    let mut acc = CompensatedSum::new();
    for (z, t) in ev[..split].iter().zip(&reference.lattice) {
        acc.add(pow_cost(z.dist(t), p));
    }
    if split < ev.len() {
        let mut rng = stream(seed, s.n(), s.replicate(), Purpose::Coupling);
        for z in &ev[split..] {
            let u = reference.sample_band(&mut rng);
            acc.add(pow_cost(z.dist(&u), p));
        }
    }
    Ok((acc.value() / T::of(s.n())).powf(p.recip()))
}

/// `8/√n`, the quantization bound for `W_p(ν_n, ν)`.
pub fn quantization_error_bound<T: Real>(n: usize, m: usize) -> Result<T> {
    if n == 0 || m >= n || !is_square(n - m) {
        return domain(format!("invalid (n, m) = ({n}, {m})"));
    }
    Ok(T::lit(8.0) / T::of(n).sqrt())
}

/// `sup_{z ∈ S_k} |z - λ̃_k|`, by corner enumeration.
///
/// `λ̃_k` sits at the inner radius and the upper angle of `S_k`. For a fixed
/// angle the distance grows with the radius, and for a fixed radius it
/// grows with the angular gap (the cell is narrower than π), so the
/// supremum is attained at a corner.
pub fn sector_displacement<T: Real>(k: usize, n: usize) -> T {
    let idx = lattice_index(k);
    let sqrt_n = T::of(n).sqrt();
    let target = predicted_location::<T>(k, n);
    let outer = T::of(idx.ell) / sqrt_n;
    if idx.ell == 1 {
        return outer;
    }
    let inner = T::of(idx.ell - 1) / sqrt_n;
    let (lo, hi) = sector_angles::<T>(idx.ell, idx.q);
    [(inner, lo), (inner, hi), (outer, lo), (outer, hi)]
        .iter()
        .map(|&(r, a)| ComplexPoint::new_unchecked(r * a.cos(), r * a.sin()).dist(&target))
        .fold(T::zero(), T::max)
}

/// `2πℓ/((2ℓ-1)√n) + 1/√n`, the per-ring displacement bound.
pub fn ring_displacement_bound<T: Real>(ell: usize, n: usize) -> T {
    let sqrt_n = T::of(n).sqrt();
    T::TAU() * T::of(ell) / (T::of(2 * ell - 1) * sqrt_n) + sqrt_n.recip()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingDisplacement<T> {
    pub ell: usize,
    pub max_displacement: T,
    pub bound: T,
}

/// Largest sector displacement in every ring of the lattice of `ν_n`.
pub fn ring_displacements<T: Real>(n: usize, m: usize) -> Result<Vec<RingDisplacement<T>>> {
    quantization_error_bound::<T>(n, m)?;
    let rings = (n - m).isqrt();
    Ok((1..=rings)
        .map(|ell| {
            let first = (ell - 1) * (ell - 1) + 1;
            let last = ell * ell;
            let max_displacement = (first..=last)
                .map(|k| sector_displacement::<T>(k, n))
                .fold(T::zero(), T::max);
            RingDisplacement {
                ell,
                max_displacement,
                bound: ring_displacement_bound(ell, n),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Region;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn polar(r: f64, a: f64) -> ComplexPoint<f64> {
        ComplexPoint::from_polar(r, a).unwrap()
    }

    #[test]
    fn compare_examples() {
        let z = polar(0.3, 1.0);
        assert_eq!(spiral_compare(&ComplexPoint::origin(), &z, 4), Ordering::Less);
        assert_eq!(spiral_compare(&z, &ComplexPoint::origin(), 4), Ordering::Greater);
        assert_eq!(spiral_compare(&polar(0.4, 1.0), &polar(0.6, 0.5), 4), Ordering::Less);
        assert_eq!(
            spiral_compare(&polar(0.6, PI / 3.0), &polar(0.7, PI / 2.0), 4),
            Ordering::Less
        );
        // equal angle: larger modulus first
        assert_eq!(spiral_compare(&polar(0.7, 1.0), &polar(0.6, 1.0), 4), Ordering::Less);
        assert_eq!(spiral_compare(&z, &z, 4), Ordering::Equal);
    }

    #[test]
    fn lattice_index_examples() {
        assert_eq!(lattice_index(1), LatticeIndex { k: 1, ell: 1, q: 1 });
        assert_eq!(lattice_index(5), LatticeIndex { k: 5, ell: 3, q: 1 });
        assert_eq!(lattice_index(9), LatticeIndex { k: 9, ell: 3, q: 5 });
        for k in 1..5000 {
            let i = lattice_index(k);
            assert_eq!((i.ell - 1) * (i.ell - 1) + i.q, k);
            assert!(i.q >= 1 && i.q < 2 * i.ell);
            assert_eq!(i.ell, (k as f64).sqrt().ceil() as usize);
        }
    }

    #[test]
    fn predicted_location_examples() {
        assert!(predicted_location::<f64>(1, 16).is_origin());
        let z = predicted_location::<f64>(2, 16);
        assert!((z.dist(&polar(0.25, 2.0 * PI / 3.0))) < 1e-15);
        let z = predicted_location::<f64>(5, 16);
        assert!((z.dist(&polar(0.5, 2.0 * PI / 5.0))) < 1e-15);
        let z = predicted_location::<f64>(4, 16);
        assert_eq!((z.re(), z.im()), (0.25, 0.0));
    }

    #[test]
    fn choose_m_examples() {
        assert_eq!(choose_m(16).unwrap(), 12);
        assert_eq!(choose_m(10000).unwrap(), 784);
        assert!(choose_m(1).is_err());
        for n in 2..16 {
            let m = choose_m(n).unwrap();
            assert!(m < n && is_square(n - m), "n={n}");
        }
        for n in 16..20000 {
            let m = choose_m(n).unwrap();
            let nf = n as f64;
            assert!(is_square(n - m));
            assert!((m as f64) <= 3.0 * (nf * nf.ln()).sqrt(), "n={n} m={m}");
        }
        assert_eq!(m_for(64, MPolicy::Zero).unwrap(), 0);
        assert!(m_for(65, MPolicy::Zero).is_err());
    }

    #[test]
    fn reference_measure_examples() {
        let r = build_reference_measure::<f64>(16, 12).unwrap();
        assert_eq!(r.lattice().len(), 4);
        assert!(r.lattice()[0].is_origin());
        assert!((r.annulus_inner() - 0.5).abs() < 1e-15);
        for z in &r.lattice()[1..] {
            assert!((z.modulus() - 0.25).abs() < 1e-15);
        }
        let full = build_reference_measure::<f64>(16, 0).unwrap();
        assert_eq!(full.lattice().len(), 16);
        let max_ring = full.lattice().iter().map(|z| ring_index(z.modulus(), 16)).max();
        assert_eq!(max_ring, Some(3));
        assert!(build_reference_measure::<f64>(10, 3).is_err());
    }

    #[test]
    fn lattice_is_spiral_increasing_and_on_inner_arcs() {
        for &n in &[16usize, 64, 100, 256, 1024] {
            let r = build_reference_measure::<f64>(n, 0).unwrap();
            for (k, w) in r.lattice().windows(2).enumerate() {
                assert_eq!(spiral_compare(&w[0], &w[1], n), Ordering::Less, "n={n} k={}", k + 1);
            }
            for (i, z) in r.lattice().iter().enumerate() {
                let k = i + 1;
                let ell = lattice_index(k).ell;
                assert!((z.modulus() - (ell - 1) as f64 / (n as f64).sqrt()).abs() < 1e-14);
                assert_eq!(ring_index(z.modulus(), n), ell - 1);
                if ell > 1 {
                    // on the upper edge of the cell's angular range
                    let (_, hi) = sector_angles::<f64>(ell, lattice_index(k).q);
                    assert!((z.arg() - hi).abs() < 1e-12, "n={n} k={k}");
                }
                let area = Region::<f64>::sector(k, n).unwrap().area().unwrap();
                assert!((area * n as f64 / PI - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn four_point_hand_order() {
        // n = 4: rings have width 1/2
        let a = polar(0.1, 3.0); // ring 0
        let b = polar(0.7, 0.5); // ring 1, small angle
        let c = polar(0.9, 2.0); // ring 1, larger angle
        let d = polar(0.6, 2.0); // ring 1, same angle, smaller modulus
        let s = Spectrum::new(vec![d, c, b, a], 0, 0).unwrap();
        let sorted = sort_spectrum_spiral(&s);
        assert_eq!(sorted.eigenvalues(), &[a, b, c, d]);
        let again = sort_spectrum_spiral(&sorted);
        assert_eq!(again, sorted);
    }

    #[test]
    fn coupling_identity_and_single_shift() {
        let r = build_reference_measure::<f64>(16, 0).unwrap();
        let s = Spectrum::new(r.lattice().to_vec(), 3, 0).unwrap();
        assert_eq!(spiral_coupling_cost(&s, &r, 1.0, 9).unwrap(), 0.0);
        // move the origin atom a little along the imaginary axis; it stays first
        let mut pts = r.lattice().to_vec();
        let delta = 0.01;
        pts[0] = ComplexPoint::new(0.0, delta).unwrap();
        let s = Spectrum::new(pts, 3, 0).unwrap();
        for &p in &[1.0, 2.0, 3.5] {
            let got = spiral_coupling_cost(&s, &r, p, 9).unwrap();
            let expect = (delta.powf(p) / 16.0).powf(1.0 / p);
            assert!((got - expect).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn displacement_bounds() {
        assert_eq!(quantization_error_bound::<f64>(16, 0).unwrap(), 2.0);
        for &n in &[16usize, 64, 256] {
            let bound = quantization_error_bound::<f64>(n, 0).unwrap();
            for ring in ring_displacements::<f64>(n, 0).unwrap() {
                assert!(ring.max_displacement < bound);
                assert!(ring.max_displacement <= ring.bound);
            }
        }
    }

    #[test]
    fn corner_enumeration_matches_dense_sampling() {
        let n = 64;
        for k in 1..=n {
            let idx = lattice_index(k);
            let target = predicted_location::<f64>(k, n);
            let (lo, hi) = if idx.ell == 1 { (0.0, 2.0 * PI) } else { sector_angles(idx.ell, idx.q) };
            let r0 = (idx.ell - 1) as f64 / 8.0;
            let r1 = idx.ell as f64 / 8.0;
            let mut dense = 0.0f64;
            for i in 0..=60 {
                for j in 0..=60 {
                    let r = r0 + (r1 - r0) * i as f64 / 60.0;
                    let a = lo + (hi - lo) * j as f64 / 60.0;
                    dense = dense.max(polar(r, a).dist(&target));
                }
            }
            let corner = sector_displacement::<f64>(k, n);
            assert!(corner >= dense - 1e-12 && corner <= dense + 1e-9, "k={k}");
        }
    }

    proptest! {
        #[test]
        fn order_is_total_and_antisymmetric(
            a in (0.0f64..1.2, 0.0f64..6.3),
            b in (0.0f64..1.2, 0.0f64..6.3),
            c in (0.0f64..1.2, 0.0f64..6.3),
            n in 1usize..300,
        ) {
            let (x, y, z) = (polar(a.0, a.1), polar(b.0, b.1), polar(c.0, c.1));
            let xy = spiral_compare(&x, &y, n);
            prop_assert_eq!(xy, spiral_compare(&y, &x, n).reverse());
            prop_assert_eq!(xy == Ordering::Equal, x == y);
            let yz = spiral_compare(&y, &z, n);
            if xy == Ordering::Less && yz == Ordering::Less {
                prop_assert_eq!(spiral_compare(&x, &z, n), Ordering::Less);
            }
        }

        #[test]
        fn sort_is_permutation_invariant(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..40),
            rot in 0usize..40,
        ) {
            let ev: Vec<_> = pts.iter().map(|&(r, a)| polar(r, a)).collect();
            let n = ev.len();
            let mut rotated = ev.clone();
            rotated.rotate_left(rot % n);
            rotated.reverse();
            let a = sort_spectrum_spiral(&Spectrum::new(ev, 0, 0).unwrap());
            let b = sort_spectrum_spiral(&Spectrum::new(rotated, 0, 0).unwrap());
            prop_assert_eq!(a.eigenvalues(), b.eigenvalues());
        }
    }
}
