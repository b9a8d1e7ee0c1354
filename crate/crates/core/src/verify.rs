//! Cross-checks of a computed front against the brute-force oracle, reported
//! per invariant.

use serde::Serialize;

use crate::network::{check_repair_pair, flow_cost, is_valid_flow, FlowNetwork};
use crate::oracle::{brute_force_front_with_cap, brute_force_optimum, OracleError, OracleFront};
use crate::pareto::ParetoFront;

/// Relative cost tolerance for all comparisons here.
pub const COST_TOLERANCE: f64 = 1e-6;

pub fn costs_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub oracle: Vec<(f64, f64)>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &'static str, failures: Vec<String>) -> CheckResult {
    CheckResult {
        name,
        passed: failures.is_empty(),
        detail: failures.join("; "),
    }
}

/// Whether `front` reproduces `oracle`: exactly when the step is at most half
/// the oracle's smallest repaired-cost gap, otherwise as a subset that keeps
/// both endpoints.
pub fn matches_oracle(front: &[(f64, f64)], oracle: &OracleFront, epsilon: f64) -> Result<(), String> {
    let want = oracle.costs();
    let same = |a: &(f64, f64), b: &(f64, f64)| costs_match(a.0, b.0) && costs_match(a.1, b.1);
    let fine = oracle.min_repaired_gap().is_none_or(|g| epsilon <= g / 2.0);
    if fine {
        if front.len() == want.len() && front.iter().zip(&want).all(|(a, b)| same(a, b)) {
            return Ok(());
        }
        return Err(format!("front {front:?} differs from oracle {want:?}"));
    }
    let stray: Vec<_> = front.iter().filter(|p| !want.iter().any(|q| same(p, q))).collect();
    if !stray.is_empty() {
        return Err(format!("points {stray:?} are not on the oracle front {want:?}"));
    }
    let ends_ok = match (front.first(), front.last(), want.first(), want.last()) {
        (Some(a), Some(b), Some(c), Some(d)) => same(a, c) && same(b, d),
        _ => front.is_empty() && want.is_empty(),
    };
    if ends_ok {
        Ok(())
    } else {
        Err(format!("front {front:?} misses an endpoint of oracle {want:?}"))
    }
}

/// Runs every invariant check of `front` on `net`. Fails only when the
/// oracle refuses the instance.
pub fn verify_front(net: &FlowNetwork, front: &ParetoFront, oracle_cap: usize) -> Result<VerifyReport, OracleError> {
    let oracle = brute_force_front_with_cap(net, oracle_cap)?;
    let base = brute_force_optimum(net, false, oracle_cap)?;
    let terminal = brute_force_optimum(net, true, oracle_cap)?;
    let costs = front.costs();
    let mut checks = Vec::new();

    let mut bad = Vec::new();
    for p in &front.points {
        let k = p.iteration;
        if !is_valid_flow(net, &p.initial, false) {
            bad.push(format!("point {k}: initial flow invalid"));
        }
        if !is_valid_flow(net, &p.repaired, true) {
            bad.push(format!("point {k}: repaired flow invalid"));
        }
        if !check_repair_pair(net, &p.initial, &p.repaired) {
            bad.push(format!("point {k}: repair drops an initially open edge"));
        }
        for (what, sol, claimed) in [("initial", &p.initial, p.initial_cost), ("repaired", &p.repaired, p.repaired_cost)] {
            match flow_cost(net, sol) {
                Ok(c) if costs_match(c, claimed) && costs_match(c, sol.cost) => {}
                Ok(c) => bad.push(format!("point {k}: {what} cost {claimed} but flows cost {c}")),
                Err(e) => bad.push(format!("point {k}: {e}")),
            }
        }
    }
    checks.push(check("point-validity", bad));

    checks.push(check(
        "nonempty",
        if front.points.is_empty() { vec!["front has no points".into()] } else { vec![] },
    ));

    // The closing point at the failure-free optimum may be nearer than epsilon.
    let mut bad = Vec::new();
    let steps = front.points.len().saturating_sub(1);
    for (k, w) in front.points.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let slack = COST_TOLERANCE * a.repaired_cost.abs().max(1.0);
        let closing = k + 1 == steps && costs_match(b.repaired_cost, front.terminal_cost);
        let need = if closing { slack } else { front.epsilon - slack };
        if a.repaired_cost - b.repaired_cost < need {
            bad.push(format!("repaired cost {} -> {} drops by less than {}", a.repaired_cost, b.repaired_cost, front.epsilon));
        }
        if b.initial_cost < a.initial_cost && !costs_match(a.initial_cost, b.initial_cost) {
            bad.push(format!("initial cost decreases at point {}", k + 1));
        }
    }
    checks.push(check("monotone-tradeoff", bad));

    let mut bad = Vec::new();
    for (i, a) in costs.iter().enumerate() {
        for (j, b) in costs.iter().enumerate() {
            let weakly = b.0 <= a.0 + COST_TOLERANCE && b.1 <= a.1 + COST_TOLERANCE;
            let strictly = !costs_match(a.0, b.0) || !costs_match(a.1, b.1);
            if i != j && weakly && strictly {
                bad.push(format!("point {i} {a:?} dominated by point {j} {b:?}"));
            }
        }
    }
    checks.push(check("non-dominance", bad));

    let mut bad = Vec::new();
    match (base, front.points.first()) {
        (Some(c), Some(p)) if costs_match(c, p.initial_cost) => {}
        (c, p) => bad.push(format!("base optimum {c:?}, first initial cost {:?}", p.map(|p| p.initial_cost))),
    }
    checks.push(check("first-point-minimum-cost", bad));

    let mut bad = Vec::new();
    match (terminal, front.points.last()) {
        (Some(c), Some(p)) if costs_match(c, p.initial_cost) && costs_match(c, p.repaired_cost) && costs_match(c, front.terminal_cost) => {}
        (c, p) => bad.push(format!(
            "failure-free optimum {c:?}, recorded {}, last point {:?}",
            front.terminal_cost,
            p.map(|p| (p.initial_cost, p.repaired_cost))
        )),
    }
    checks.push(check("last-point-failure-free-optimum", bad));

    checks.push(check(
        "oracle-front",
        matches_oracle(&costs, &oracle, front.epsilon).err().into_iter().collect(),
    ));

    Ok(VerifyReport {
        oracle: oracle.costs(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::PairedModelOptions;
    use crate::generate::demo_network;
    use crate::pareto::{pareto_front, ParetoSettings};

    fn demo_front() -> ParetoFront {
        pareto_front(&demo_network(), &PairedModelOptions::default(), &ParetoSettings::default()).unwrap()
    }

    #[test]
    fn demo_front_passes() {
        let r = verify_front(&demo_network(), &demo_front(), 15).unwrap();
        assert!(r.all_passed(), "{:?}", r.failed().collect::<Vec<_>>());
        assert_eq!(r.checks.len(), 7);
    }

    #[test]
    fn corrupted_cost_is_named() {
        let mut f = demo_front();
        f.points[1].initial_cost += 0.5;
        let r = verify_front(&demo_network(), &f, 15).unwrap();
        let failed: Vec<_> = r.failed().map(|c| c.name).collect();
        assert!(failed.contains(&"point-validity"));
        assert!(failed.contains(&"oracle-front"));
    }

    #[test]
    fn dropped_point_fails_exact_match_but_not_coarse_subset() {
        let mut f = demo_front();
        f.points.remove(2);
        let r = verify_front(&demo_network(), &f, 15).unwrap();
        assert!(!r.all_passed());
        let oracle = crate::oracle::brute_force_front(&demo_network()).unwrap();
        assert!(matches_oracle(&f.costs(), &oracle, 2.5).is_ok());
        assert!(matches_oracle(&f.costs(), &oracle, 0.5).is_err());
    }

    #[test]
    fn oracle_refusal_propagates() {
        assert!(matches!(
            verify_front(&demo_network(), &demo_front(), 4),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
