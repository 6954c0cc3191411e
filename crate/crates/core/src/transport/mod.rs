//! Wasserstein distances between finitely supported measures, with dual
//! certificates.

mod assignment;
mod auction;
mod simplex;

use crate::error::{domain, Error, Result};
use crate::measures::{ComplexPoint, DiscreteMeasure, Spectrum};
use crate::scalar::Real;
use crate::special::CompensatedSum;
use crate::spiral::{build_reference_measure, is_square};

/// Largest dense instance (in arcs) the exact flow solver will accept.
pub const MAX_FLOW_ARCS: usize = 1 << 25;

/// `d^p`, with `0^p = 0`.
#[inline]
pub fn pow_cost<T: Real>(d: T, p: T) -> T {
    if d == T::zero() {
        T::zero()
    } else if p == T::one() {
        d
    } else if p == T::lit(2.0) {
        d * d
    } else {
        (p * d.ln()).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    AssignmentExact,
    FlowExact,
    AuctionApprox,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AssignmentExact => "assignment-exact",
            Method::FlowExact => "flow-exact",
            Method::AuctionApprox => "auction-approx",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Method::AuctionApprox)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverMode {
    Exact,
    Auction,
}

/// `value` estimates `W_p`; `[lower, upper]` brackets the quantity being
/// certified. `duality_gap` is in cost units (before the `1/p` root).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceCertificate<T> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub method: Method,
    pub duality_gap: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan<T> {
    pub pairs: Vec<(usize, usize, T)>,
    pub cost_p: T,
    pub p: T,
}

impl<T: Real> TransportPlan<T> {
    /// Checks non-negative masses, both marginals and the recorded cost,
    /// each to `1e-10`.
    pub fn verify(&self, a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>) -> Result<()> {
        let tol = T::lit(1e-10);
        let mut rows = vec![CompensatedSum::new(); a.len()];
        let mut cols = vec![CompensatedSum::new(); b.len()];
        let mut cost = CompensatedSum::new();
        for &(i, j, mass) in &self.pairs {
            if i >= a.len() || j >= b.len() {
                return Err(Error::Certification(format!("pair ({i}, {j}) out of range")));
            }
            if !(mass >= T::zero()) {
                return Err(Error::Certification(format!("negative mass {mass}")));
            }
            rows[i].add(mass);
            cols[j].add(mass);
            cost.add(mass * pow_cost(a.atoms()[i].dist(&b.atoms()[j]), self.p));
        }
        for (i, (r, &w)) in rows.iter().zip(a.weights()).enumerate() {
            if (r.value() - w).abs() > tol {
                return Err(Error::Certification(format!("source marginal {i} off by {:e}", r.value() - w)));
            }
        }
        for (j, (c, &w)) in cols.iter().zip(b.weights()).enumerate() {
            if (c.value() - w).abs() > tol {
                return Err(Error::Certification(format!("target marginal {j} off by {:e}", c.value() - w)));
            }
        }
        if (cost.value() - self.cost_p).abs() > tol * self.cost_p.max(T::one()) {
            return Err(Error::Certification("recorded cost does not match the plan".into()));
        }
        Ok(())
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p >= T::one() && p.is_finite() {
        Ok(())
    } else {
        domain(format!("p must be finite and ≥ 1, got {p}"))
    }
}

/// Row-major `|a_i - b_j|^p`.
pub fn cost_matrix<T: Real>(a: &[ComplexPoint<T>], b: &[ComplexPoint<T>], p: T) -> Vec<T> {
    let mut c = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            c.push(pow_cost(x.dist(y), p));
        }
    }
    c
}

/// Dual objective `Σ a_i u_i + Σ b_j v_j` after replacing `v` by the
/// c-transform of `u`, which makes the pair feasible whatever the solver's
/// rounding did.
fn certified_dual<T: Real>(cost: &[T], a: &[T], b: &[T], u: &[T]) -> T {
    let k = b.len();
    let mut acc = CompensatedSum::new();
    for (&w, &ui) in a.iter().zip(u) {
        acc.add(w * ui);
    }
    for j in 0..k {
        let vj = (0..a.len())
            .map(|i| cost[i * k + j] - u[i])
            .fold(T::infinity(), T::min);
        acc.add(b[j] * vj);
    }
    acc.value()
}

fn certificate<T: Real>(primal: T, dual: T, p: T, method: Method) -> DistanceCertificate<T> {
    let primal = primal.max(T::zero());
    let dual = dual.max(T::zero()).min(primal);
    let inv = p.recip();
    let value = primal.powf(inv);
    DistanceCertificate {
        value,
        lower: dual.powf(inv),
        upper: value,
        method,
        duality_gap: primal - dual,
    }
}

fn plan_cost<T: Real>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>, pairs: &[(usize, usize, T)], p: T) -> T {
    pairs
        .iter()
        .map(|&(i, j, m)| m * pow_cost(a.atoms()[i].dist(&b.atoms()[j]), p))
        .collect::<CompensatedSum<T>>()
        .value()
}

/// Exact `W_p` for two uniform measures with the same number of atoms.
pub fn wasserstein_assignment<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    p: T,
) -> Result<(DistanceCertificate<T>, TransportPlan<T>)> {
    check_p(p)?;
    if a.len() != b.len() {
        return Err(Error::NeedsFlow(format!("{} vs {} atoms", a.len(), b.len())));
    }
    if !a.is_uniform() || !b.is_uniform() {
        return Err(Error::NeedsFlow("weights are not uniform".into()));
    }
    let n = a.len();
    let cost = cost_matrix(a.atoms(), b.atoms(), p);
    let sol = assignment::solve(&cost, n);
    let w = T::of(n).recip();
    let pairs: Vec<_> = sol.row_to_col.iter().enumerate().map(|(i, &j)| (i, j, w)).collect();
    let primal = plan_cost(a, b, &pairs, p);
    let dual = certified_dual(&cost, a.weights(), b.weights(), &sol.u);
    Ok((
        certificate(primal, dual, p, Method::AssignmentExact),
        TransportPlan {
            pairs,
            cost_p: primal,
            p,
        },
    ))
}

/// Integer supplies proportional to the weights. Uniform measures scale
/// exactly (by `lcm` of the sizes); otherwise weights are rounded on a
/// `2^40` grid and the rounding residue is put on the largest atom.
fn integer_masses<T: Real>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>) -> (Vec<i64>, Vec<i64>, f64) {
    if a.is_uniform() && b.is_uniform() {
        let (na, nb) = (a.len() as i64, b.len() as i64);
        let g = gcd(na, nb);
        let total = na / g * nb;
        return (vec![total / na; a.len()], vec![total / nb; b.len()], total as f64);
    }
    let scale = (1u64 << 40) as f64;
    let round = |w: &[T]| -> Vec<i64> {
        let mut v: Vec<i64> = w.iter().map(|x| (x.to_f64_lossy() * scale).round() as i64).collect();
        let s: i64 = v.iter().sum();
        let big = (0..v.len()).max_by_key(|&i| v[i]).unwrap_or(0);
        v[big] += scale as i64 - s;
        v
    };
    (round(a.weights()), round(b.weights()), scale)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact `W_p` between arbitrary discrete measures by network simplex.
pub fn wasserstein_flow<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    p: T,
) -> Result<(DistanceCertificate<T>, TransportPlan<T>)> {
    check_p(p)?;
    let arcs = a.len().saturating_mul(b.len());
    if arcs > MAX_FLOW_ARCS {
        return Err(Error::Resource(format!(
            "{}×{} flow instance exceeds {MAX_FLOW_ARCS} arcs; use a smaller M or auction mode",
            a.len(),
            b.len()
        )));
    }
    let cost = cost_matrix(a.atoms(), b.atoms(), p);
    let (supply, demand, total) = integer_masses(a, b);
    let sol = simplex::solve(&cost, &supply, &demand);
    let total_t = T::lit(total);
    let pairs: Vec<_> = sol
        .flows
        .iter()
        .map(|&(i, j, f)| (i, j, T::lit(f as f64) / total_t))
        .collect();
    let primal = plan_cost(a, b, &pairs, p);
    let dual = certified_dual(&cost, a.weights(), b.weights(), &sol.u);
    Ok((
        certificate(primal, dual, p, Method::FlowExact),
        TransportPlan {
            pairs,
            cost_p: primal,
            p,
        },
    ))
}

/// Auction approximation for uniform measures where `b` has an integer
/// multiple of `a`'s atoms. Stops at relative duality gap `1e-2`.
pub fn wasserstein_auction<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    p: T,
) -> Result<(DistanceCertificate<T>, TransportPlan<T>)> {
    check_p(p)?;
    if !a.is_uniform() || !b.is_uniform() || !b.len().is_multiple_of(a.len()) {
        return Err(Error::NeedsFlow(
            "auction needs uniform weights and a target size that is a multiple of the source size".into(),
        ));
    }
    let cost = cost_matrix(a.atoms(), b.atoms(), p);
    let persons = b.len();
    let r = auction::solve(&cost, a.len(), persons, T::lit(1e-2));
    let w = T::of(persons).recip();
    let rep = persons / a.len();
    let mut pairs: Vec<(usize, usize, T)> = r
        .person_to_object
        .iter()
        .enumerate()
        .map(|(q, &j)| (q / rep, j, w))
        .collect();
    pairs.sort_by_key(|x| (x.0, x.1));
    let primal = plan_cost(a, b, &pairs, p);
    let dual = r.dual * w;
    Ok((
        certificate(primal, dual, p, Method::AuctionApprox),
        TransportPlan {
            pairs,
            cost_p: primal,
            p,
        },
    ))
}

/// Exact solver choice: assignment for equal-size uniform measures, flow
/// otherwise.
pub fn wasserstein_exact<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    p: T,
) -> Result<(DistanceCertificate<T>, TransportPlan<T>)> {
    match wasserstein_assignment(a, b, p) {
        Err(Error::NeedsFlow(_)) => wasserstein_flow(a, b, p),
        other => other,
    }
}

pub fn wasserstein<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    p: T,
    mode: SolverMode,
) -> Result<(DistanceCertificate<T>, TransportPlan<T>)> {
    match mode {
        SolverMode::Exact => wasserstein_exact(a, b, p),
        SolverMode::Auction => wasserstein_auction(a, b, p),
    }
}

/// Kantorovich duality check for a `p = 1` plan.
///
/// Potentials come from shortest paths in the plan's residual graph
/// (forward arcs `c_ij`, backward arcs `-c_ij` on the support). An optimal
/// plan has no negative cycle and the potentials are tight on its support.
/// Otherwise relaxation is cut off and the c-transform restores
/// feasibility, leaving a positive gap. The resulting test function
/// `f(z) = min_j (|z - y_j| - v_j)` is checked to be 1-Lipschitz on all
/// atoms; the return value is `cost - (Σ a f(x) - Σ b f(y))`.
pub fn w1_duality_check<T: Real>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    plan: &TransportPlan<T>,
) -> Result<T> {
    if plan.p != T::one() {
        return domain("duality check needs a p = 1 plan");
    }
    plan.verify(a, b)?;
    let (m, k) = (a.len(), b.len());
    let cost = cost_matrix(a.atoms(), b.atoms(), T::one());
    let support: Vec<(usize, usize)> = plan
        .pairs
        .iter()
        .filter(|&&(_, _, w)| w > T::zero())
        .map(|&(i, j, _)| (i, j))
        .collect();

    let mut du = vec![T::zero(); m];
    let mut dv = vec![T::zero(); k];
    let nodes = m + k;
    let mut converged = false;
    for _ in 0..=nodes {
        let mut changed = false;
        for j in 0..k {
            let best = (0..m).map(|i| du[i] + cost[i * k + j]).fold(dv[j], T::min);
            if best < dv[j] {
                dv[j] = best;
                changed = true;
            }
        }
        for &(i, j) in &support {
            let cand = dv[j] - cost[i * k + j];
            if cand < du[i] {
                du[i] = cand;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let u: Vec<T> = du.iter().map(|&d| -d).collect();
    let v: Vec<T> = if converged {
        dv.clone()
    } else {
        (0..k)
            .map(|j| (0..m).map(|i| cost[i * k + j] - u[i]).fold(T::infinity(), T::min))
            .collect()
    };

    let f = |z: &ComplexPoint<T>| {
        b.atoms()
            .iter()
            .zip(&v)
            .map(|(y, &vj)| z.dist(y) - vj)
            .fold(T::infinity(), T::min)
    };
    let points: Vec<&ComplexPoint<T>> = a.atoms().iter().chain(b.atoms()).collect();
    let values: Vec<T> = points.iter().map(|z| f(z)).collect();
    let lip_tol = T::lit(1e-10);
    for s in 0..points.len() {
        for t in s + 1..points.len() {
            let d = points[s].dist(points[t]);
            if (values[s] - values[t]).abs() > d + lip_tol {
                return Err(Error::Certification(format!(
                    "potential is not 1-Lipschitz between atoms {s} and {t}"
                )));
            }
        }
    }
    let mut dual = CompensatedSum::new();
    for (w, val) in a.weights().iter().zip(&values[..m]) {
        dual.add(*w * *val);
    }
    for (w, val) in b.weights().iter().zip(&values[m..]) {
        dual.add(-(*w * *val));
    }
    Ok((plan.cost_p - dual.value()).max(T::zero()))
}

/// `W_p(μ, ν)` bracketed through the `M`-point lattice `ρ_M`:
/// `value = W_p(μ, ρ_M)` and, since `W_p(ρ_M, ν) < 8/√M`, the true distance
/// to the uniform law lies in `[lower - 8/√M, value + 8/√M]`, with `lower`
/// the solver's dual bound.
pub fn wasserstein_measure_to_uniform<T: Real>(
    a: &DiscreteMeasure<T>,
    p: T,
    big_m: usize,
    mode: SolverMode,
) -> Result<DistanceCertificate<T>> {
    check_p(p)?;
    if big_m == 0 || !is_square(big_m) {
        return domain(format!("M = {big_m} is not a positive perfect square"));
    }
    if big_m < a.len() {
        return domain(format!("M = {big_m} is below the number of atoms {}", a.len()));
    }
    let rho = build_reference_measure::<T>(big_m, 0)?.lattice_measure()?;
    let (cert, _) = match mode {
        SolverMode::Exact => wasserstein_exact(a, &rho, p)?,
        SolverMode::Auction => wasserstein_auction(a, &rho, p)?,
    };
    let slack = T::lit(8.0) / T::of(big_m).sqrt();
    Ok(DistanceCertificate {
        value: cert.value,
        lower: (cert.lower - slack).max(T::zero()),
        upper: cert.value + slack,
        method: cert.method,
        duality_gap: cert.duality_gap,
    })
}

pub fn wasserstein_to_uniform<T: Real>(
    s: &Spectrum<T>,
    p: T,
    big_m: usize,
    mode: SolverMode,
) -> Result<DistanceCertificate<T>> {
    wasserstein_measure_to_uniform(&s.to_measure(), p, big_m, mode)
}

/// `2/(3√(3n))`, below which no `n`-point empirical measure gets in `W_1`.
pub fn quantization_lower_bound<T: Real>(n: usize) -> Result<T> {
    if n == 0 {
        return domain("n must be positive");
    }
    Ok(T::lit(2.0) / (T::lit(3.0) * (T::lit(3.0) * T::of(n)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> ComplexPoint<f64> {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn identical_measures() {
        let a = DiscreteMeasure::uniform(vec![pt(0.1, 0.2), pt(-0.3, 0.0), pt(0.5, 0.5)]).unwrap();
        let (c, plan) = wasserstein_assignment(&a, &a, 1.0).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(plan.pairs.iter().all(|&(i, j, _)| i == j));
        assert!(w1_duality_check(&a, &a, &plan).unwrap() <= 1e-15);
    }

    #[test]
    fn single_atoms() {
        let a = DiscreteMeasure::uniform(vec![pt(0.0, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.3, 0.4)]).unwrap();
        for &p in &[1.0, 2.0, 3.3] {
            let (c, _) = wasserstein_assignment(&a, &b, p).unwrap();
            assert!((c.value - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_to_one_by_hand() {
        let a = DiscreteMeasure::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)], vec![0.5, 0.5]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.5, 0.0)]).unwrap();
        let (c, plan) = wasserstein_flow(&a, &b, 1.0).unwrap();
        assert!((c.value - 0.5).abs() < 1e-15);
        plan.verify(&a, &b).unwrap();
        assert!(matches!(wasserstein_assignment(&a, &b, 1.0), Err(Error::NeedsFlow(_))));
    }

    #[test]
    fn perturbed_plan_has_positive_gap() {
        let a = DiscreteMeasure::uniform(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.0, 0.1), pt(1.0, 0.1)]).unwrap();
        let (_, plan) = wasserstein_assignment(&a, &b, 1.0).unwrap();
        assert!(w1_duality_check(&a, &b, &plan).unwrap() < 1e-12);
        let swapped = TransportPlan {
            pairs: vec![(0, 1, 0.5), (1, 0, 0.5)],
            cost_p: plan_cost(&a, &b, &[(0, 1, 0.5), (1, 0, 0.5)], 1.0),
            p: 1.0,
        };
        assert!(w1_duality_check(&a, &b, &swapped).unwrap() > 0.5);
    }

    #[test]
    fn lattice_to_itself_is_zero() {
        let lat = build_reference_measure::<f64>(16, 0).unwrap();
        let s = Spectrum::new(lat.lattice().to_vec(), 0, 0).unwrap();
        let c = wasserstein_to_uniform(&s, 1.0, 16, SolverMode::Exact).unwrap();
        assert!(c.value < 1e-12);
        assert_eq!(c.lower, 0.0);
        assert!((c.upper - c.value - 2.0).abs() < 1e-12);
        assert!(wasserstein_to_uniform(&s, 1.0, 15, SolverMode::Exact).is_err());
        assert!(wasserstein_to_uniform(&s, 1.0, 9, SolverMode::Exact).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!((quantization_lower_bound::<f64>(16).unwrap() - 0.09623).abs() < 1e-5);
        assert!((quantization_lower_bound::<f64>(1).unwrap() - 0.38490).abs() < 1e-5);
    }
}
