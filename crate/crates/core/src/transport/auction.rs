//! Forward auction with ε-scaling for min-cost assignment.
//!
//! `rows` persons bid for `cols == rows` objects; person `p` uses cost row
//! `row_of(p)`, which lets one source atom be replicated into several equal
//! persons.

use crate::scalar::Real;

#[allow(dead_code)]
pub(crate) struct AuctionResult<T> {
    pub person_to_object: Vec<usize>,
    pub primal: T,
    pub dual: T,
    pub phases: usize,
}

/// Runs ε-scaling phases until `(primal - dual) ≤ rel_gap · primal` (or the
/// gap falls to rounding level). Both objectives are totals over all
/// persons, not averages.
pub(crate) fn solve<T: Real>(
    cost: &[T],
    n_rows: usize,
    n_persons: usize,
    rel_gap: T,
) -> AuctionResult<T> {
    let cols = n_persons;
    debug_assert_eq!(cost.len(), n_rows * cols);
    debug_assert_eq!(n_persons % n_rows, 0);
    let rep = n_persons / n_rows;
    let row_of = |p: usize| p / rep;
    let max_cost = cost.iter().fold(T::zero(), |a, &c| a.max(c.abs()));
    let theta = T::lit(5.0);
    let mut eps = (max_cost / T::lit(4.0)).max(T::epsilon());
    let floor = T::epsilon() * T::lit(16.0) * (max_cost + T::one());
    let mut prices = vec![T::zero(); cols];
    let mut phases = 0;
    loop {
        phases += 1;
        let owner = run_phase(cost, cols, n_persons, &row_of, &mut prices, eps);
        let mut person_to_object = vec![0usize; n_persons];
        for (j, &p) in owner.iter().enumerate() {
            person_to_object[p] = j;
        }
        let primal = (0..n_persons)
            .map(|p| cost[row_of(p) * cols + person_to_object[p]])
            .fold(T::zero(), |a, b| a + b);
        // u_p = min_j (c_pj + price_j), v_j = -price_j
        let mut dual = T::zero();
        for r in 0..n_rows {
            let row = &cost[r * cols..(r + 1) * cols];
            let best = row
                .iter()
                .zip(&prices)
                .map(|(&c, &q)| c + q)
                .fold(T::infinity(), T::min);
            dual += best * T::of(rep);
        }
        dual -= prices.iter().fold(T::zero(), |a, &b| a + b);
        let gap = primal - dual;
        if gap <= rel_gap * primal || gap <= floor * T::of(n_persons) || eps <= floor {
            return AuctionResult {
                person_to_object,
                primal,
                dual: dual.min(primal),
                phases,
            };
        }
        eps = (eps / theta).max(floor);
    }
}

fn run_phase<T: Real>(
    cost: &[T],
    cols: usize,
    n_persons: usize,
    row_of: &impl Fn(usize) -> usize,
    prices: &mut [T],
    eps: T,
) -> Vec<usize> {
    const FREE: usize = usize::MAX;
    let mut owner = vec![FREE; cols];
    let mut assigned = vec![FREE; n_persons];
    let mut queue: std::collections::VecDeque<usize> = (0..n_persons).collect();
    while let Some(p) = queue.pop_front() {
        let row = &cost[row_of(p) * cols..(row_of(p) + 1) * cols];
        // maximize -(c + price)
        let mut best = T::neg_infinity();
        let mut second = T::neg_infinity();
        let mut best_j = 0;
        for (j, (&c, &q)) in row.iter().zip(prices.iter()).enumerate() {
            let val = -(c + q);
            if val > best {
                second = best;
                best = val;
                best_j = j;
            } else if val > second {
                second = val;
            }
        }
        let incr = if second.is_finite() { best - second } else { T::zero() };
        prices[best_j] += incr + eps;
        let prev = owner[best_j];
        owner[best_j] = p;
        assigned[p] = best_j;
        if prev != FREE {
            assigned[prev] = FREE;
            queue.push_back(prev);
        }
    }
    owner
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_assignment_reaches_optimum() {
        let c = [4.0f64, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let r = solve(&c, 3, 3, 1e-12);
        assert!((r.primal - 5.0).abs() < 1e-9);
        assert!(r.dual <= r.primal);
    }
}
