//! Least-cost flow model of one year: formulation, solvers, interchange
//! text and independent re-verification.

mod check;
mod formulate;
mod lpfile;
mod oracle;
mod solve;

pub use check::{check_solution, BalanceReport, Incident, TOLERANCE};
pub use formulate::{formulate, formulate_with, FormulateOptions};
pub use lpfile::{emit_interchange, parse_solution_text, ParsedSolution};
pub use oracle::{brute_force_oracle, ORACLE_MAX_VARS};
pub use solve::{solve, Backend, SOLVER_ENV};

use crate::demand::CokingMix;
use crate::network::{NodeId, NodeKind, TransportMode};
use crate::supply::{CoalType, CvBin};
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("{kind} demand at node {node}, which is not a {expected} node")]
    WrongDemandNode {
        node: NodeId,
        kind: &'static str,
        expected: &'static str,
    },
    #[error("node {0} not in the network")]
    UnknownNode(NodeId),
    #[error("demand node {0} cannot be reached from any supply")]
    Unreachable(NodeId),
    #[error("no conversion efficiency for {0}")]
    MissingEfficiency(String),
    #[error(transparent)]
    Supply(#[from] crate::supply::SupplyError),
    #[error("oracle refuses: {0}")]
    OracleRefused(String),
    #[error("solver: {0}")]
    Solver(String),
}

/// Decision variable identity. Sorting keys gives the dense index order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKey {
    Supply {
        node: NodeId,
        coal: CoalType,
        bin: CvBin,
        year: Year,
    },
    Flow {
        from: NodeId,
        to: NodeId,
        mode: TransportMode,
        coal: CoalType,
        bin: CvBin,
        year: Year,
    },
}

impl VarKey {
    pub fn commodity(&self) -> (CoalType, CvBin) {
        match self {
            VarKey::Supply { coal, bin, .. } | VarKey::Flow { coal, bin, .. } => (*coal, *bin),
        }
    }

    pub fn arc(&self) -> Option<(&NodeId, &NodeId, TransportMode)> {
        match self {
            VarKey::Flow { from, to, mode, .. } => Some((from, to, *mode)),
            VarKey::Supply { .. } => None,
        }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Supply { node, coal, bin, .. } => write!(f, "s_{node}_{coal}_{bin}"),
            VarKey::Flow {
                from, to, coal, bin, ..
            } => write!(f, "f_{from}_{to}_{coal}_{bin}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint families in the order rows are emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SupplyCap,
    MassBalance,
    EnergyBalance,
    LinkCap,
    PortCap,
    ElecCap,
    SteelCap,
    Hcc,
    CokingMix,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::SupplyCap => "sup",
            Family::MassBalance => "mass",
            Family::EnergyBalance => "energy",
            Family::LinkCap => "link",
            Family::PortCap => "port",
            Family::ElecCap => "elec",
            Family::SteelCap => "steel",
            Family::Hcc => "hcc",
            Family::CokingMix => "mix",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub family: Family,
    pub name: String,
    /// (variable index, coefficient)
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    /// Node the row belongs to, when it has one.
    pub node: Option<NodeId>,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(j, a)| a * values[*j]).sum()
    }

    /// Non-negative when satisfied.
    pub fn slack(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => self.rhs - lhs,
            Sense::Ge => lhs - self.rhs,
            Sense::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

/// Data the checker needs to recompute balances without the rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemContext {
    /// PJ
    pub elec_demand: BTreeMap<NodeId, f64>,
    /// PJ
    pub other_demand: BTreeMap<NodeId, f64>,
    /// Mt primary steel
    pub steel_demand: BTreeMap<NodeId, f64>,
    pub kinds: BTreeMap<NodeId, NodeKind>,
    /// Energy multiplier applied on arrival, per arc.
    pub multipliers: BTreeMap<(NodeId, NodeId, TransportMode), f64>,
    /// Nodes with at least one outgoing arc.
    pub senders: BTreeSet<NodeId>,
    pub supply_caps: BTreeMap<(NodeId, CoalType, CvBin), f64>,
    /// Mt, per direction
    pub link_caps: BTreeMap<(NodeId, NodeId, TransportMode), f64>,
    /// PJ delivered
    pub elec_caps: BTreeMap<(NodeId, NodeId, TransportMode), f64>,
    pub port_caps: BTreeMap<NodeId, f64>,
    /// Already scaled by the utilization factor.
    pub steel_caps: BTreeMap<NodeId, f64>,
    pub coking_mix: CokingMix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowProblem {
    pub year: Year,
    pub vars: Vec<VarKey>,
    /// $/Mt
    pub costs: Vec<f64>,
    pub names: Vec<String>,
    pub rows: Vec<Constraint>,
    pub context: ProblemContext,
}

impl FlowProblem {
    pub fn index_of(&self, key: &VarKey) -> Option<usize> {
        self.vars.binary_search(key).ok()
    }

    /// Σ cost × value, $.
    pub fn objective_of(&self, values: &[f64]) -> f64 {
        self.costs.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    pub fn rows_of(&self, family: Family) -> impl Iterator<Item = &Constraint> + '_ {
        self.rows.iter().filter(move |r| r.family == family)
    }

    /// Same problem with every cost multiplied by `factor`.
    pub fn scaled_costs(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.costs.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    SolverError,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::SolverError => "solver_error",
        })
    }
}

/// Demand the network could not serve, from the elastic re-solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmetDemand {
    pub node: NodeId,
    pub family: Family,
    /// PJ for energy rows, Mt HCC for steel rows.
    pub shortfall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    pub status: Status,
    /// $
    pub objective: f64,
    /// Mt, aligned with `FlowProblem::vars`.
    pub values: Vec<f64>,
    /// Aligned with `FlowProblem::rows`.
    pub slacks: Vec<f64>,
    pub unmet: Vec<UnmetDemand>,
    pub message: Option<String>,
}

impl FlowSolution {
    pub fn failed(status: Status, message: impl Into<String>) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            slacks: Vec::new(),
            unmet: Vec::new(),
            message: Some(message.into()),
        }
    }

    /// Optimal solution from raw values. `objective` is the backend's own
    /// figure in $; when absent it is recomputed from the values.
    pub(crate) fn from_values(problem: &FlowProblem, values: Vec<f64>, objective: Option<f64>) -> Self {
        let slacks = problem.rows.iter().map(|r| r.slack(&values)).collect();
        Self {
            status: Status::Optimal,
            objective: objective.unwrap_or_else(|| problem.objective_of(&values)),
            values,
            slacks,
            unmet: Vec::new(),
            message: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, problem: &FlowProblem, key: &VarKey) -> Option<f64> {
        problem.index_of(key).and_then(|i| self.values.get(i).copied())
    }
}
