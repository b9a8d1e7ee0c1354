//! Mixed-integer linear programs over continuous and binary variables, an
//! exact branch-and-bound solver, and LP-format export.

mod branch;
mod lp_format;
mod simplex;

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::{solve, solve_lp, solve_with, SolveHints};
pub use lp_format::export_lp;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("term references undeclared variable #{0}")]
    UnknownVariable(usize),
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
}

/// Handle to a variable of one particular [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    /// Bounds with binaries clipped to `[0, 1]`.
    pub fn effective_bounds(&self) -> (f64, f64) {
        match self.kind {
            VarKind::Continuous => (self.lower, self.upper),
            VarKind::Binary => (self.lower.max(0.0), self.upper.min(1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveSense {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub terms: Vec<(VarId, f64)>,
}

impl Objective {
    pub fn value(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    var_names: HashMap<String, usize>,
    constraint_names: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        let id = self.variables.len();
        self.var_names.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(VarId(id))
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds a linear constraint. Repeated variables in `terms` are merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> Result<(), ModelError> {
        let name = name.into();
        if self.constraint_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        let terms = self.normalize_terms(terms, &name)?;
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        self.constraint_names.insert(name.clone(), self.constraints.len());
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, sense: ObjectiveSense, terms: Vec<(VarId, f64)>) -> Result<(), ModelError> {
        let terms = self.normalize_terms(terms, "objective")?;
        self.objective = Objective { sense, terms };
        Ok(())
    }

    fn normalize_terms(&self, terms: Vec<(VarId, f64)>, owner: &str) -> Result<Vec<(VarId, f64)>, ModelError> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(ModelError::UnknownVariable(v.0));
            }
            if !c.is_finite() {
                return Err(ModelError::NonFinite(owner.to_string()));
            }
            *merged.entry(v.0).or_insert(0.0) += c;
        }
        Ok(merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(v, c)| (VarId(v), c))
            .collect())
    }

    /// Overrides the bounds of an existing variable.
    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<(), ModelError> {
        let v = self
            .variables
            .get_mut(var.0)
            .ok_or(ModelError::UnknownVariable(var.0))?;
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvalidBounds {
                name: v.name.clone(),
                lower,
                upper,
            });
        }
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).map(|&i| VarId(i))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn binary_vars(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    /// Largest violation of any constraint or variable bound at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let a = c.activity(values);
            let v = match c.sense {
                ConstraintSense::Le => a - c.rhs,
                ConstraintSense::Ge => c.rhs - a,
                ConstraintSense::Eq => (a - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (v, x) in self.variables.iter().zip(values) {
            let (lo, hi) = v.effective_bounds();
            worst = worst.max(lo - x).max(x - hi);
        }
        worst
    }
}

/// Solver tolerances and limits. Loadable from a TOML or JSON config block;
/// missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Distance from 0 or 1 at which a binary counts as integral.
    pub integrality_tolerance: f64,
    /// Primal feasibility tolerance of the simplex.
    pub feasibility_tolerance: f64,
    /// Relative optimality gap at which branch-and-bound stops. Zero means
    /// exact to within rounding.
    pub optimality_gap: f64,
    /// Maximum number of branch-and-bound nodes (LP solves).
    pub node_limit: usize,
    /// Wall-clock limit in seconds for one `solve` call.
    pub time_limit: Option<f64>,
    /// Pivot cap for a single LP.
    pub pivot_limit: usize,
    /// Consecutive degenerate pivots after which pricing switches to Bland's
    /// rule for the rest of the phase.
    pub bland_threshold: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            integrality_tolerance: 1e-6,
            feasibility_tolerance: 1e-7,
            optimality_gap: 0.0,
            node_limit: 2_000_000,
            time_limit: None,
            pivot_limit: 100_000,
            bland_threshold: 60,
        }
    }
}

impl SolverConfig {
    pub(crate) fn time_limit(&self) -> Option<Duration> {
        self.time_limit.map(Duration::from_secs_f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_pivots: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    pub status: SolveStatus,
    /// Present when optimal, or on a limit with an incumbent.
    pub objective_value: Option<f64>,
    /// Values indexed by [`VarId::index`]; present alongside `objective_value`.
    pub values: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl MilpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> Option<f64> {
        self.values.as_ref().map(|v| v[var.0])
    }

    /// Variable name to value map.
    pub fn assignment(&self, model: &MilpModel) -> Option<BTreeMap<String, f64>> {
        self.values.as_ref().map(|vals| {
            model
                .variables
                .iter()
                .zip(vals)
                .map(|(v, x)| (v.name.clone(), *x))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut m = MilpModel::new();
        m.add_binary("y").unwrap();
        assert_eq!(m.add_binary("y"), Err(ModelError::DuplicateVariable("y".into())));
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_constraint("c", vec![(x, 1.0)], ConstraintSense::Le, 1.0).unwrap();
        assert_eq!(
            m.add_constraint("c", vec![(x, 1.0)], ConstraintSense::Le, 1.0),
            Err(ModelError::DuplicateConstraint("c".into()))
        );
    }

    #[test]
    fn foreign_var_ids_are_rejected() {
        let mut m = MilpModel::new();
        assert_eq!(
            m.add_constraint("c", vec![(VarId(3), 1.0)], ConstraintSense::Le, 1.0),
            Err(ModelError::UnknownVariable(3))
        );
    }

    #[test]
    fn terms_are_merged() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        let y = m.add_continuous("y", 0.0, 1.0).unwrap();
        m.add_constraint("c", vec![(y, 1.0), (x, 2.0), (y, -1.0), (x, 1.0)], ConstraintSense::Le, 1.0)
            .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(x, 3.0)]);
    }

    #[test]
    fn bad_bounds_are_rejected() {
        let mut m = MilpModel::new();
        assert!(m.add_continuous("x", 2.0, 1.0).is_err());
        assert!(m.add_continuous("z", f64::NAN, 1.0).is_err());
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        assert!(m.set_bounds(x, 1.0, 0.0).is_err());
    }

    #[test]
    fn config_parses_partial_toml() {
        let cfg: SolverConfig = toml::from_str("node_limit = 50\ntime_limit = 2.5").unwrap();
        assert_eq!(cfg.node_limit, 50);
        assert_eq!(cfg.time_limit, Some(2.5));
        assert_eq!(cfg.integrality_tolerance, 1e-6);
        assert!(toml::from_str::<SolverConfig>("bogus = 1").is_err());
    }
}
