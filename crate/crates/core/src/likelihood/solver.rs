//! Projected gradient ascent over a rate pair.
//!
//! The objectives are concave over a convex feasible set, so ascent with a
//! backtracking line search converges; a few warm-started steps get within
//! solver noise of the optimum in practice.

/// A concave objective over `(p, q)` with a projection onto its feasible set.
pub(crate) trait RateObjective {
    fn value(&self, p: f64, q: f64) -> f64;
    fn grad(&self, p: f64, q: f64) -> (f64, f64);
    fn project(&self, p: f64, q: f64) -> (f64, f64);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolveOutcome {
    pub p: f64,
    pub q: f64,
    pub value: f64,
    pub steps: usize,
    pub converged: bool,
}

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

pub(crate) fn maximize<O: RateObjective>(
    obj: &O,
    start: (f64, f64),
    max_steps: usize,
    grad_tolerance: f64,
) -> SolveOutcome {
    maximize_traced(obj, start, max_steps, grad_tolerance, |_, _| {})
}

/// Ascent loop reporting every accepted iterate (including the start).
pub(crate) fn maximize_traced<O: RateObjective>(
    obj: &O,
    start: (f64, f64),
    max_steps: usize,
    grad_tolerance: f64,
    mut on_iterate: impl FnMut(f64, f64),
) -> SolveOutcome {
    let (mut p, mut q) = obj.project(start.0, start.1);
    on_iterate(p, q);
    let mut value = obj.value(p, q);
    let mut steps = 0;
    let mut converged = false;

    for _ in 0..max_steps {
        let (gp, gq) = obj.grad(p, q);
        // Stationarity measure: movement of a unit projected step.
        let (sp, sq) = obj.project(p + gp, q + gq);
        let pg_norm = ((sp - p).powi(2) + (sq - q).powi(2)).sqrt();
        if pg_norm < grad_tolerance {
            converged = true;
            break;
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let (np, nq) = obj.project(p + step * gp, q + step * gq);
            let dp = np - p;
            let dq = nq - q;
            if dp.abs().max(dq.abs()) < 1e-18 {
                break;
            }
            let nv = obj.value(np, nq);
            if nv.is_finite() && nv >= value + ARMIJO_SLOPE * (gp * dp + gq * dq) {
                p = np;
                q = nq;
                value = nv;
                accepted = true;
                break;
            }
            step *= BACKTRACK;
        }
        if !accepted {
            // No ascent left at line-search resolution.
            converged = true;
            break;
        }
        steps += 1;
        on_iterate(p, q);
    }

    SolveOutcome {
        p,
        q,
        value,
        steps,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Concave quadratic with box projection; optimum at (0.6, 0.3).
    struct Quad;

    impl RateObjective for Quad {
        fn value(&self, p: f64, q: f64) -> f64 {
            -(p - 0.6).powi(2) - 2.0 * (q - 0.3).powi(2)
        }
        fn grad(&self, p: f64, q: f64) -> (f64, f64) {
            (-2.0 * (p - 0.6), -4.0 * (q - 0.3))
        }
        fn project(&self, p: f64, q: f64) -> (f64, f64) {
            (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0))
        }
    }

    #[test]
    fn converges_on_quadratic() {
        let out = maximize(&Quad, (0.01, 0.99), 10_000, 1e-10);
        assert!(out.converged);
        assert!((out.p - 0.6).abs() < 1e-8);
        assert!((out.q - 0.3).abs() < 1e-8);
    }

    #[test]
    fn respects_step_budget() {
        let out = maximize(&Quad, (0.01, 0.99), 2, 1e-16);
        assert!(out.steps <= 2);
    }

    /// Optimum outside the box lands on the boundary and reports converged.
    struct EdgeQuad;

    impl RateObjective for EdgeQuad {
        fn value(&self, p: f64, q: f64) -> f64 {
            -(p - 1.5).powi(2) - (q - 0.5).powi(2)
        }
        fn grad(&self, p: f64, q: f64) -> (f64, f64) {
            (-2.0 * (p - 1.5), -2.0 * (q - 0.5))
        }
        fn project(&self, p: f64, q: f64) -> (f64, f64) {
            (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0))
        }
    }

    #[test]
    fn boundary_optimum_converges() {
        let out = maximize(&EdgeQuad, (0.2, 0.2), 10_000, 1e-10);
        assert!(out.converged);
        assert!((out.p - 1.0).abs() < 1e-9);
        assert!((out.q - 0.5).abs() < 1e-8);
    }
}
